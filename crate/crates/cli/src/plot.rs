use std::path::Path;

use hrnvo::eval::{ErrorReport, Trajectory};
use plotters::prelude::*;

type PlotResult = Result<(), Box<dyn std::error::Error>>;

const NET_COLOR: RGBColor = RGBColor(31, 119, 180);
const GT_COLOR: RGBColor = RGBColor(255, 127, 14);

fn bounds(series: &[&[(f64, f64)]]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    let pad = ((y1 - y0) * 0.05).max(1e-6);
    ((x0, x1.max(x0 + 1e-6)), (y0 - pad, y1 + pad))
}

/// Calibrated network trajectory over ground truth, one panel per axis.
pub fn trajectory_overlay(path: &Path, net: &Trajectory, gt: &Trajectory, axes: [&str; 3]) -> PlotResult {
    let root = SVGBackend::new(path, (960, 840)).into_drawing_area();
    root.fill(&WHITE)?;
    let panels = root.split_evenly((3, 1));
    for (i, area) in panels.iter().enumerate() {
        let n: Vec<(f64, f64)> = net.samples().iter().map(|s| (s.t, s.v[i])).collect();
        let g: Vec<(f64, f64)> = gt.samples().iter().map(|s| (s.t, s.v[i])).collect();
        let (xr, yr) = bounds(&[&n, &g]);
        let mut chart = ChartBuilder::on(area)
            .margin(10)
            .x_label_area_size(30)
            .y_label_area_size(50)
            .caption(axes[i], ("sans-serif", 16))
            .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)?;
        chart.configure_mesh().x_desc("t [s]").draw()?;
        chart.draw_series(LineSeries::new(g, &GT_COLOR))?.label("ground truth").legend(|(x, y)| {
            PathElement::new(vec![(x, y), (x + 16, y)], GT_COLOR)
        });
        chart.draw_series(LineSeries::new(n, &NET_COLOR))?.label("network").legend(|(x, y)| {
            PathElement::new(vec![(x, y), (x + 16, y)], NET_COLOR)
        });
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    }
    root.present()?;
    Ok(())
}

/// Angular error, and position error when present, over time.
pub fn error_over_time(path: &Path, report: &ErrorReport) -> PlotResult {
    let has_pos = report.series.iter().any(|s| s.position.is_some());
    let root = SVGBackend::new(path, (960, if has_pos { 600 } else { 320 })).into_drawing_area();
    root.fill(&WHITE)?;
    let panels = root.split_evenly((if has_pos { 2 } else { 1 }, 1));
    let angle: Vec<(f64, f64)> = report.series.iter().map(|s| (s.t, s.angle)).collect();
    let pos: Vec<(f64, f64)> = report.series.iter().filter_map(|s| s.position.map(|p| (s.t, p))).collect();
    for (area, (data, label)) in panels.iter().zip([(angle, "angular error [deg]"), (pos, "position error")]) {
        let (xr, yr) = bounds(&[&data]);
        let mut chart = ChartBuilder::on(area)
            .margin(10)
            .x_label_area_size(30)
            .y_label_area_size(50)
            .caption(label, ("sans-serif", 16))
            .build_cartesian_2d(xr.0..xr.1, yr.0.min(0.0)..yr.1)?;
        chart.configure_mesh().x_desc("t [s]").draw()?;
        chart.draw_series(LineSeries::new(data, &NET_COLOR))?;
    }
    root.present()?;
    Ok(())
}

//! Trajectory post-processing: resampling, lag estimation, similarity
//! calibration and error metrics.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix2, UnitQuaternion, Vector2};

use crate::error::{invalid, Error, Result};
use crate::events::{quat_to_euler, unwrap_degrees, GroundTruthSample};
use crate::resonator::{wrap_signed_deg, Estimate};

pub const DEFAULT_RATE: f64 = 400.0;
pub const MAX_LAG_S: f64 = 1.0;
pub const TRAJECTORY_HEADER: &str = "t,h,v,r";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameLabel {
    /// (h px, v px, r deg) from the resonator.
    Network,
    /// (pan deg, tilt deg, roll deg).
    Rotational,
    /// (x, y, roll deg).
    Planar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub v: [f64; 3],
}

/// Timestamped triples with strictly increasing time. The third
/// component is always a roll angle in degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    label: FrameLabel,
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(label: FrameLabel, samples: Vec<Sample>) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(invalid(format!("timestamps not strictly increasing at t = {}", w[1].t)));
            }
        }
        if samples.iter().any(|s| !s.t.is_finite() || s.v.iter().any(|x| !x.is_finite())) {
            return Err(invalid("non-finite trajectory sample"));
        }
        Ok(Self { label, samples })
    }

    /// Network readouts with roll unwrapped.
    pub fn from_estimates(estimates: &[Estimate]) -> Result<Self> {
        let mut roll: Vec<f64> = estimates.iter().map(|e| e.r_signed()).collect();
        unwrap_degrees(&mut roll);
        let samples = estimates.iter().zip(roll).map(|(e, r)| Sample { t: e.t_mid, v: [e.h, e.v, r] }).collect();
        Self::new(FrameLabel::Network, samples)
    }

    /// Ground truth as (pan, tilt, roll) or (x, y, roll), roll unwrapped.
    pub fn from_ground_truth(gt: &[GroundTruthSample], mode: ErrorMode) -> Result<Self> {
        let mut out = Vec::with_capacity(gt.len());
        for g in gt {
            let (roll, pan, tilt) = quat_to_euler(g.orientation)?;
            let v = match mode {
                ErrorMode::Rotational => [pan, tilt, roll],
                ErrorMode::Planar => [g.position[0], g.position[1], roll],
            };
            out.push(Sample { t: g.t, v });
        }
        let mut roll: Vec<f64> = out.iter().map(|s| s.v[2]).collect();
        unwrap_degrees(&mut roll);
        for (s, r) in out.iter_mut().zip(roll) {
            s.v[2] = r;
        }
        let label = match mode {
            ErrorMode::Rotational => FrameLabel::Rotational,
            ErrorMode::Planar => FrameLabel::Planar,
        };
        Self::new(label, out)
    }

    pub fn label(&self) -> FrameLabel {
        self.label
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.v[i]).collect()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    /// Linear interpolation; `None` outside the time range.
    pub fn at(&self, t: f64) -> Option<[f64; 3]> {
        let (t0, t1) = self.span()?;
        if t < t0 || t > t1 {
            return None;
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        if i == 0 {
            return Some(self.samples[0].v);
        }
        if i == self.samples.len() {
            return Some(self.samples[i - 1].v);
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let u = (t - a.t) / (b.t - a.t);
        Some(std::array::from_fn(|k| a.v[k] + u * (b.v[k] - a.v[k])))
    }

    pub fn shifted(&self, dt: f64) -> Self {
        let samples = self.samples.iter().map(|s| Sample { t: s.t + dt, v: s.v }).collect();
        Self { label: self.label, samples }
    }

    pub fn filter_time(&self, keep: impl Fn(f64) -> bool) -> Self {
        let samples = self.samples.iter().filter(|s| keep(s.t)).copied().collect();
        Self { label: self.label, samples }
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
            _ => e.into(),
        })?;
        let format = |reason: String| Error::Format { path: path.to_path_buf(), reason };
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some(TRAJECTORY_HEADER) => {}
            other => return Err(format(format!("expected header {TRAJECTORY_HEADER:?}, found {other:?}"))),
        }
        let mut samples = Vec::new();
        for (no, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format(format!("line {}: {e}", no + 2)))?;
            let [t, a, b, c] = vals[..] else {
                return Err(format(format!("line {}: expected 4 fields", no + 2)));
            };
            samples.push(Sample { t, v: [a, b, c] });
        }
        Self::new(FrameLabel::Network, samples).map_err(|e| format(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(out, "{:.6},{:.6},{:.6},{:.6}", s.t, s.v[0], s.v[1], s.v[2]);
        }
        out
    }
}

fn uniform_grid(t0: f64, t1: f64, rate: f64) -> Vec<f64> {
    let n = ((t1 - t0) * rate + 1e-9).floor() as usize + 1;
    (0..n).map(|i| (t0 + i as f64 / rate).min(t1)).collect()
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("sampling rate must be positive, got {rate}")))
    }
}

pub fn resample(traj: &Trajectory, rate: f64) -> Result<Trajectory> {
    check_rate(rate)?;
    if traj.len() < 2 {
        return Err(invalid("resampling needs at least two samples"));
    }
    let (t0, t1) = traj.span().unwrap();
    resample_on(traj, &uniform_grid(t0, t1, rate))
}

fn resample_on(traj: &Trajectory, grid: &[f64]) -> Result<Trajectory> {
    let samples = grid
        .iter()
        .map(|&t| traj.at(t).map(|v| Sample { t, v }).ok_or_else(|| invalid("grid outside trajectory")))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(traj.label, samples)
}

/// Resamples both trajectories onto one uniform grid over their overlap.
pub fn resample_pair(a: &Trajectory, b: &Trajectory, rate: f64) -> Result<(Trajectory, Trajectory)> {
    check_rate(rate)?;
    if a.len() < 2 || b.len() < 2 {
        return Err(invalid("resampling needs at least two samples"));
    }
    let (a0, a1) = a.span().unwrap();
    let (b0, b1) = b.span().unwrap();
    let (t0, t1) = (a0.max(b0), a1.min(b1));
    if !(t1 > t0) {
        return Err(invalid("trajectories do not overlap in time"));
    }
    let grid = uniform_grid(t0, t1, rate);
    Ok((resample_on(a, &grid)?, resample_on(b, &grid)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lag {
    /// Seconds to add to the timestamps of `b` to align it to `a`.
    pub seconds: f64,
    pub correlation: f64,
    /// The best match was anti-correlated.
    pub degenerate: bool,
}

/// Cross-correlates the mean-removed roll traces within ±1 s.
pub fn estimate_lag(a: &Trajectory, b: &Trajectory, rate: f64) -> Result<Lag> {
    let (ra, rb) = resample_pair(a, b, rate)?;
    let mut x = ra.component(2);
    let mut y = rb.component(2);
    for s in [&mut x, &mut y] {
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        s.iter_mut().for_each(|v| *v -= mean);
        if s.iter().all(|v| v.abs() < 1e-12) {
            return Err(Error::DegenerateInput("roll trace has zero variance".into()));
        }
    }
    let n = x.len() as isize;
    let max_k = ((MAX_LAG_S * rate).round() as isize).min(n - 2).max(0);
    let mut best = (0isize, 0.0f64);
    for k in -max_k..=max_k {
        // a[i] against b[i - k]
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for i in k.max(0)..(n + k).min(n) {
            let (p, q) = (x[i as usize], y[(i - k) as usize]);
            sxy += p * q;
            sxx += p * p;
            syy += q * q;
        }
        if sxx <= 0.0 || syy <= 0.0 {
            continue;
        }
        let c = sxy / (sxx * syy).sqrt();
        if c.abs() > best.1.abs() {
            best = (k, c);
        }
    }
    Ok(Lag { seconds: best.0 as f64 / rate, correlation: best.1, degenerate: best.1 < 0.0 })
}

/// Similarity transform `p ↦ scale · rotation · p + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity2 {
    pub scale: f64,
    pub rotation: Matrix2<f64>,
    pub translation: Vector2<f64>,
}

impl Similarity2 {
    pub fn identity() -> Self {
        Self { scale: 1.0, rotation: Matrix2::identity(), translation: Vector2::zeros() }
    }

    pub fn apply(&self, p: Vector2<f64>) -> Vector2<f64> {
        self.scale * self.rotation * p + self.translation
    }

    pub fn angle_deg(&self) -> f64 {
        self.rotation[(1, 0)].atan2(self.rotation[(0, 0)]).to_degrees()
    }

    pub fn residual(&self, src: &[Vector2<f64>], dst: &[Vector2<f64>]) -> f64 {
        src.iter().zip(dst).map(|(s, d)| (self.apply(*s) - d).norm_squared()).sum()
    }
}

/// Least-squares similarity transform from `src` to `dst` with a proper
/// rotation.
pub fn umeyama(src: &[Vector2<f64>], dst: &[Vector2<f64>]) -> Result<Similarity2> {
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch { expected: src.len(), actual: dst.len() });
    }
    if src.len() < 2 {
        return Err(invalid("umeyama needs at least two point pairs"));
    }
    let n = src.len() as f64;
    let mu_s = src.iter().sum::<Vector2<f64>>() / n;
    let mu_d = dst.iter().sum::<Vector2<f64>>() / n;
    let var_s = src.iter().map(|s| (s - mu_s).norm_squared()).sum::<f64>() / n;
    if var_s <= 1e-24 * (1.0 + mu_s.norm_squared()) {
        return Err(Error::RankDeficient("source points are all identical".into()));
    }
    let cov = src
        .iter()
        .zip(dst)
        .map(|(s, d)| (d - mu_d) * (s - mu_s).transpose())
        .sum::<Matrix2<f64>>()
        / n;
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix2::identity();
    if (u.determinant() * v_t.determinant()) < 0.0 {
        d[(1, 1)] = -1.0;
    }
    let rotation = u * d * v_t;
    let scale = (Matrix2::from_diagonal(&svd.singular_values) * d).trace() / var_s;
    if !(scale > 0.0) {
        return Err(Error::RankDeficient("no positive scale fits the point sets".into()));
    }
    let translation = mu_d - scale * rotation * mu_s;
    Ok(Similarity2 { scale, rotation, translation })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CalibrationWindow {
    /// The last `seconds` before the train/test split at `train_fraction`.
    LastOfTrain { seconds: f64, train_fraction: f64 },
    /// Calibrate on the first `train_fraction` of the overlap.
    Split { train_fraction: f64 },
    /// Calibrate on `[start, end]`, evaluate everywhere else.
    Range { start: f64, end: f64 },
}

impl Default for CalibrationWindow {
    fn default() -> Self {
        Self::LastOfTrain { seconds: 10.0, train_fraction: 0.7 }
    }
}

impl CalibrationWindow {
    /// Calibration interval and evaluation intervals within `[t0, t1]`.
    pub fn intervals(&self, t0: f64, t1: f64) -> Result<((f64, f64), Vec<(f64, f64)>)> {
        let split = |f: f64| -> Result<f64> {
            if f > 0.0 && f < 1.0 {
                Ok(t0 + f * (t1 - t0))
            } else {
                Err(invalid(format!("train fraction must lie in (0, 1), got {f}")))
            }
        };
        match *self {
            Self::LastOfTrain { seconds, train_fraction } => {
                if !(seconds > 0.0) {
                    return Err(invalid("calibration window length must be positive"));
                }
                let ts = split(train_fraction)?;
                Ok(((t0.max(ts - seconds), ts), vec![(ts, t1)]))
            }
            Self::Split { train_fraction } => {
                let ts = split(train_fraction)?;
                Ok(((t0, ts), vec![(ts, t1)]))
            }
            Self::Range { start, end } => {
                if !(end > start) {
                    return Err(invalid("calibration range end must exceed its start"));
                }
                let (s, e) = (start.max(t0), end.min(t1));
                if !(e > s) {
                    return Err(invalid("calibration range does not overlap the trajectories"));
                }
                let mut rest = Vec::new();
                if s > t0 {
                    rest.push((t0, s));
                }
                if e < t1 {
                    rest.push((e, t1));
                }
                Ok(((s, e), rest))
            }
        }
    }
}

impl fmt::Display for CalibrationWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::LastOfTrain { seconds, train_fraction } => {
                write!(f, "last-{seconds}s-of-train")?;
                if train_fraction != 0.7 {
                    write!(f, "@{}", train_fraction * 100.0)?;
                }
                Ok(())
            }
            Self::Split { train_fraction } => {
                let p = (train_fraction * 100.0).round();
                write!(f, "split-{p}-{}", 100.0 - p)
            }
            Self::Range { start, end } => write!(f, "range:{start}:{end}"),
        }
    }
}

impl FromStr for CalibrationWindow {
    type Err = Error;

    /// `last-10s-of-train`, `split-70-30` or `range:<start>:<end>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid(format!("unknown calibration window {s:?}"));
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix("last-") {
            let (body, frac) = match rest.split_once('@') {
                Some((b, p)) => (b, num(p)? / 100.0),
                None => (rest, 0.7),
            };
            let secs = body.strip_suffix("s-of-train").ok_or_else(bad)?;
            return Ok(Self::LastOfTrain { seconds: num(secs)?, train_fraction: frac });
        }
        if let Some(rest) = s.strip_prefix("split-") {
            let (a, b) = rest.split_once('-').ok_or_else(bad)?;
            let (a, b) = (num(a)?, num(b)?);
            if a <= 0.0 || b <= 0.0 {
                return Err(bad());
            }
            return Ok(Self::Split { train_fraction: a / (a + b) });
        }
        if let Some(rest) = s.strip_prefix("range:") {
            let (a, b) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(Self::Range { start: num(a)?, end: num(b)? });
        }
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationParams {
    pub lag: Lag,
    pub transform: Similarity2,
    pub roll_offset: f64,
    pub window: (f64, f64),
    pub evaluation: Vec<(f64, f64)>,
}

impl CalibrationParams {
    /// Maps a network trajectory into ground-truth coordinates.
    pub fn apply(&self, net: &Trajectory) -> Trajectory {
        let samples = net
            .samples
            .iter()
            .map(|s| {
                let p = self.transform.apply(Vector2::new(s.v[0], s.v[1]));
                Sample { t: s.t + self.lag.seconds, v: [p.x, p.y, s.v[2] + self.roll_offset] }
            })
            .collect();
        Trajectory { label: net.label, samples }
    }

    pub fn in_evaluation(&self, t: f64) -> bool {
        self.evaluation.iter().any(|&(a, b)| t >= a && t <= b)
    }
}

/// Fits lag, planar similarity and roll offset of `net` to `gt` on the
/// calibration window.
pub fn calibrate(net: &Trajectory, gt: &Trajectory, window: CalibrationWindow, rate: f64) -> Result<CalibrationParams> {
    let lag = estimate_lag(gt, net, rate)?;
    let (g, n) = resample_pair(gt, &net.shifted(lag.seconds), rate)?;
    let (t0, t1) = g.span().unwrap();
    let (win, evaluation) = window.intervals(t0, t1)?;
    let pairs: Vec<_> = n
        .samples
        .iter()
        .zip(&g.samples)
        .filter(|(s, _)| s.t >= win.0 && s.t <= win.1)
        .collect();
    if pairs.len() < 2 {
        return Err(invalid("calibration window holds fewer than two samples"));
    }
    let (src, dst): (Vec<_>, Vec<_>) = pairs
        .iter()
        .map(|(s, d)| (Vector2::new(s.v[0], s.v[1]), Vector2::new(d.v[0], d.v[1])))
        .unzip();
    let transform = umeyama(&src, &dst)?;
    // circular mean of the roll difference over the window
    let (sin, cos) = pairs.iter().fold((0.0, 0.0), |(a, b), (s, d)| {
        let (si, co) = (d.v[2] - s.v[2]).to_radians().sin_cos();
        (a + si, b + co)
    });
    let roll_offset = sin.atan2(cos).to_degrees();
    Ok(CalibrationParams { lag, transform, roll_offset, window: win, evaluation })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    /// Pan, tilt and roll angles.
    Rotational,
    /// x, y position and roll.
    Planar,
}

impl FromStr for ErrorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rot3" | "rotational-3dof" => Ok(Self::Rotational),
            "planar" => Ok(Self::Planar),
            _ => Err(invalid(format!("unknown error mode {s:?}"))),
        }
    }
}

impl fmt::Display for ErrorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rotational => "rot3",
            Self::Planar => "planar",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AngleMetric {
    /// Angle of the relative rotation.
    #[default]
    Geodesic,
    /// Euclidean norm of the wrapped per-axis differences.
    PerAxis,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    pub angle: f64,
    pub position: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub mode: ErrorMode,
    pub median_angle_error: f64,
    pub median_position_error: Option<f64>,
    pub series: Vec<ErrorSample>,
    pub calibration: Option<CalibrationParams>,
}

fn orientation(v: &[f64; 3]) -> UnitQuaternion<f64> {
    let [pan, tilt, roll] = *v;
    UnitQuaternion::from_euler_angles(tilt.to_radians(), pan.to_radians(), roll.to_radians())
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { 0.5 * (values[m - 1] + values[m]) })
}

/// Per-sample errors over the common time grid of both trajectories.
pub fn compute_error(net: &Trajectory, gt: &Trajectory, mode: ErrorMode, metric: AngleMetric, rate: f64) -> Result<ErrorReport> {
    let (n, g) = resample_pair(net, gt, rate)?;
    let series: Vec<ErrorSample> = n
        .samples
        .iter()
        .zip(&g.samples)
        .map(|(a, b)| match mode {
            ErrorMode::Rotational => {
                let angle = match metric {
                    AngleMetric::Geodesic => orientation(&a.v).angle_to(&orientation(&b.v)).to_degrees(),
                    AngleMetric::PerAxis => (0..3).map(|k| wrap_signed_deg(a.v[k] - b.v[k]).powi(2)).sum::<f64>().sqrt(),
                };
                ErrorSample { t: a.t, angle, position: None }
            }
            ErrorMode::Planar => ErrorSample {
                t: a.t,
                angle: wrap_signed_deg(a.v[2] - b.v[2]).abs(),
                position: Some((a.v[0] - b.v[0]).hypot(a.v[1] - b.v[1])),
            },
        })
        .collect();
    report(mode, series, None)
}

fn report(mode: ErrorMode, series: Vec<ErrorSample>, calibration: Option<CalibrationParams>) -> Result<ErrorReport> {
    let median_angle_error = median(&mut series.iter().map(|s| s.angle).collect::<Vec<_>>())
        .ok_or_else(|| invalid("no overlapping samples to evaluate"))?;
    let median_position_error = match mode {
        ErrorMode::Planar => median(&mut series.iter().filter_map(|s| s.position).collect::<Vec<_>>()),
        ErrorMode::Rotational => None,
    };
    Ok(ErrorReport { mode, median_angle_error, median_position_error, series, calibration })
}

/// Full pipeline: calibrate on the window, then report errors on the
/// disjoint evaluation data only.
pub fn evaluate(
    net: &Trajectory,
    gt: &Trajectory,
    mode: ErrorMode,
    window: CalibrationWindow,
    metric: AngleMetric,
    rate: f64,
) -> Result<ErrorReport> {
    let cal = calibrate(net, gt, window, rate)?;
    let full = compute_error(&cal.apply(net), gt, mode, metric, rate)?;
    let series = full.series.into_iter().filter(|s| cal.in_evaluation(s.t)).collect();
    report(mode, series, Some(cal))
}

impl ErrorReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(out, "samples: {}", self.series.len());
        let _ = writeln!(out, "median_angle_error_deg: {:.6}", self.median_angle_error);
        if let Some(p) = self.median_position_error {
            let _ = writeln!(out, "median_position_error: {p:.6}");
        }
        if let Some(c) = &self.calibration {
            let _ = writeln!(out, "lag_s: {:.6}", c.lag.seconds);
            let _ = writeln!(out, "lag_correlation: {:.6}", c.lag.correlation);
            let _ = writeln!(out, "lag_degenerate: {}", c.lag.degenerate);
            let _ = writeln!(out, "scale: {:.9}", c.transform.scale);
            let _ = writeln!(out, "rotation_deg: {:.6}", c.transform.angle_deg());
            let _ = writeln!(out, "translation: {:.6} {:.6}", c.transform.translation.x, c.transform.translation.y);
            let _ = writeln!(out, "roll_offset_deg: {:.6}", c.roll_offset);
            let _ = writeln!(out, "calibration_window_s: {:.6} {:.6}", c.window.0, c.window.1);
        }
        out
    }

    /// `t,angle_error_deg[,pos_error]`.
    pub fn series_csv(&self) -> String {
        let planar = self.mode == ErrorMode::Planar;
        let mut out = String::from(if planar { "t,angle_error_deg,pos_error\n" } else { "t,angle_error_deg\n" });
        for s in &self.series {
            let _ = write!(out, "{:.6},{:.6}", s.t, s.angle);
            if let (true, Some(p)) = (planar, s.position) {
                let _ = write!(out, ",{p:.6}");
            }
            out.push('\n');
        }
        out
    }
}

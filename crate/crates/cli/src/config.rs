use std::path::{Path, PathBuf};

use hrnvo::codebook::{CartesianGrid, CodebookKind, PolarGrid, RadiusSpacing};
use hrnvo::eval::{CalibrationWindow, ErrorMode};
use hrnvo::events::DatasetFormat;
use hrnvo::resonator::ResonatorConfig;
use serde::{Deserialize, Serialize};

use crate::spec::SynthFile;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: DatasetSection,
    pub grid: GridSection,
    pub codebook: CodebookSection,
    pub preprocess: PreprocessSection,
    pub resonator: ResonatorSection,
    pub fusion: FusionSection,
    pub eval: EvalSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Directory holding events.txt, imu.txt and groundtruth.txt.
    pub path: Option<PathBuf>,
    pub format: String,
    pub sensor: [u32; 2],
    /// Generated in memory when no path is given.
    pub synth: Option<SynthFile>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self { path: None, format: "text-v1".into(), sensor: [240, 180], synth: None }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub width: usize,
    pub height: usize,
    pub angle_bins: usize,
    pub radius_bins: usize,
    pub max_radius: Option<f64>,
    pub radius_spacing: String,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { width: 64, height: 48, angle_bins: 360, radius_bins: 32, max_radius: None, radius_spacing: "linear".into() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookSection {
    pub kind: String,
    /// Only used by random codebooks.
    pub cart_dim: Option<usize>,
    pub polar_dim: Option<usize>,
}

impl Default for CodebookSection {
    fn default() -> Self {
        Self { kind: "dft".into(), cart_dim: None, polar_dim: None }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub package_size: usize,
    pub binarize_threshold: u32,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self { package_size: 2000, binarize_threshold: 0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonatorSection {
    pub gamma: f64,
    pub sharpen_k: f64,
    pub map_block_iterations: u64,
    pub mu1: f64,
    pub mu2: f64,
    pub readout_window: usize,
    pub renormalize_states: bool,
}

impl Default for ResonatorSection {
    fn default() -> Self {
        let d = ResonatorConfig::default();
        Self {
            gamma: d.gamma,
            sharpen_k: d.sharpen_k,
            map_block_iterations: d.map_block_iterations,
            mu1: d.mu1,
            mu2: d.mu2,
            readout_window: d.readout_window,
            renormalize_states: d.renormalize_states,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionSection {
    pub enabled: bool,
    /// Pixels per radian of pan.
    pub pan_scale: f64,
    pub tilt_scale: f64,
}

impl Default for FusionSection {
    fn default() -> Self {
        Self { enabled: false, pan_scale: 60.0, tilt_scale: 60.0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub mode: String,
    pub window: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { mode: ErrorMode::Rotational.to_string(), window: CalibrationWindow::default().to_string() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also write the decoded h, v and r coefficient profiles.
    pub profiles: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), profiles: false }
    }
}

/// Config values converted to library types.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub format: DatasetFormat,
    pub sensor: (u32, u32),
    pub cart: CartesianGrid,
    pub polar: PolarGrid,
    pub kind: CodebookKind,
    pub cart_dim: usize,
    pub polar_dim: usize,
    pub resonator: ResonatorConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(p) = &cfg.dataset.path {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.dataset.path = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn resolve(&self) -> Result<Resolved, String> {
        let e = |err: hrnvo::Error| err.to_string();
        let g = &self.grid;
        let cart = CartesianGrid::new(g.width, g.height).map_err(e)?;
        let max_radius = g.max_radius.unwrap_or(PolarGrid::default_for(cart).max_radius);
        let spacing = match g.radius_spacing.as_str() {
            "linear" => RadiusSpacing::Linear,
            "log" => RadiusSpacing::Log,
            other => return Err(format!("unknown radius spacing `{other}`")),
        };
        let polar = PolarGrid::new(g.angle_bins, g.radius_bins, max_radius).map_err(e)?.with_spacing(spacing);
        let kind: CodebookKind = self.codebook.kind.parse().map_err(e)?;
        let r = &self.resonator;
        let resonator = ResonatorConfig {
            gamma: r.gamma,
            sharpen_k: r.sharpen_k,
            map_block_iterations: r.map_block_iterations,
            mu1: r.mu1,
            mu2: r.mu2,
            readout_window: r.readout_window,
            fusion_enabled: self.fusion.enabled,
            renormalize_states: r.renormalize_states,
        };
        resonator.validate().map_err(e)?;
        if self.preprocess.package_size == 0 {
            return Err("package_size must be positive".into());
        }
        let sensor = match &self.dataset.synth {
            Some(s) if self.dataset.path.is_none() => (s.capture.window[0] as u32, s.capture.window[1] as u32),
            _ => (self.dataset.sensor[0], self.dataset.sensor[1]),
        };
        if self.dataset.path.is_none() && self.dataset.synth.is_none() {
            return Err("dataset needs either `path` or a `synth` table".into());
        }
        self.eval.mode.parse::<ErrorMode>().map_err(e)?;
        self.eval.window.parse::<CalibrationWindow>().map_err(e)?;
        Ok(Resolved {
            format: self.dataset.format.parse().map_err(e)?,
            sensor,
            cart,
            polar,
            kind,
            cart_dim: self.codebook.cart_dim.unwrap_or(cart.pixels()),
            polar_dim: self.codebook.polar_dim.unwrap_or(polar.pixels()),
            resonator,
        })
    }
}

//! TOML forms of the synthetic-dataset specs. The combined form matches
//! the manifest written next to every generated dataset.

use hrnvo::synth::{AxisMotion, ImuSpec, SceneSpec, Shape, ShapeKind, SynthSpec, TrajectorySpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default)]
pub struct SceneFile {
    pub canvas: [usize; 2],
    pub seed: u64,
    /// Random placement when `shapes` is empty.
    pub count: usize,
    pub kinds: Vec<String>,
    pub spread: f64,
    pub shapes: Vec<ShapeFile>,
}

impl Default for SceneFile {
    fn default() -> Self {
        Self {
            canvas: [160, 120],
            seed: 3,
            count: 6,
            kinds: ShapeKind::ALL.iter().map(|k| k.as_str().to_string()).collect(),
            spread: 0.6,
            shapes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ShapeFile {
    pub kind: String,
    pub center: [f64; 2],
    pub size: [f64; 2],
    #[serde(default)]
    pub angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MotionFile {
    Still,
    Constant {
        rate: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    RandomWalk {
        peak_speed: f64,
        interval: f64,
        bound: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for MotionFile {
    fn default() -> Self {
        Self::Still
    }
}

impl From<&MotionFile> for AxisMotion {
    fn from(m: &MotionFile) -> Self {
        match *m {
            MotionFile::Still => AxisMotion::Still,
            MotionFile::Constant { rate } => AxisMotion::Constant { rate },
            MotionFile::Sine { amplitude, frequency, phase } => AxisMotion::Sine { amplitude, frequency, phase },
            MotionFile::RandomWalk { peak_speed, interval, bound, seed } => {
                AxisMotion::RandomWalk { peak_speed, interval, bound, seed }
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default)]
pub struct TrajFile {
    pub duration: f64,
    pub sample_rate: f64,
    pub x: MotionFile,
    pub y: MotionFile,
    pub roll: MotionFile,
}

impl Default for TrajFile {
    fn default() -> Self {
        Self {
            duration: 10.0,
            sample_rate: 1000.0,
            x: MotionFile::RandomWalk { peak_speed: 20.0, interval: 0.5, bound: 5.0, seed: 11 },
            y: MotionFile::RandomWalk { peak_speed: 15.0, interval: 0.5, bound: 4.0, seed: 12 },
            roll: MotionFile::RandomWalk { peak_speed: 300.0, interval: 0.15, bound: 30.0, seed: 13 },
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default)]
pub struct ImuFile {
    pub rate: f64,
    /// rad/s
    pub noise_std: f64,
    pub bias: [f64; 3],
    pub pan_scale: f64,
    pub tilt_scale: f64,
}

impl Default for ImuFile {
    fn default() -> Self {
        let d = ImuSpec::default();
        Self { rate: d.rate, noise_std: d.noise_std, bias: d.bias, pan_scale: d.pan_scale, tilt_scale: d.tilt_scale }
    }
}

/// Settings that belong to neither the scene nor the motion.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default)]
pub struct Capture {
    pub seed: u64,
    pub window: [usize; 2],
    pub event_noise: f64,
    pub imu: ImuFile,
}

impl Default for Capture {
    fn default() -> Self {
        Self { seed: 1, window: [64, 48], event_noise: 0.0, imu: ImuFile::default() }
    }
}

/// A trajectory file may carry the capture settings at top level.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct TrajWithCapture {
    #[serde(flatten)]
    pub trajectory: TrajFile,
    #[serde(flatten)]
    pub capture: Capture,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default)]
pub struct SynthFile {
    #[serde(flatten)]
    pub capture: Capture,
    pub trajectory: TrajFile,
    pub scene: SceneFile,
}

impl SceneFile {
    pub fn build(&self) -> hrnvo::Result<SceneSpec> {
        let canvas = (self.canvas[0], self.canvas[1]);
        if self.shapes.is_empty() {
            let kinds = self.kinds.iter().map(|k| ShapeKind::parse(k)).collect::<hrnvo::Result<Vec<_>>>()?;
            return SceneSpec::random(canvas, self.count, &kinds, self.spread, self.seed);
        }
        let shapes = self
            .shapes
            .iter()
            .map(|s| {
                Ok(Shape {
                    kind: ShapeKind::parse(&s.kind)?,
                    center: (s.center[0], s.center[1]),
                    size: (s.size[0], s.size[1]),
                    angle_deg: s.angle,
                    visible: s.visible.map(|[a, b]| (a, b)),
                })
            })
            .collect::<hrnvo::Result<Vec<_>>>()?;
        let scene = SceneSpec { canvas, shapes, seed: self.seed };
        scene.validate()?;
        Ok(scene)
    }
}

impl TrajFile {
    pub fn build(&self) -> TrajectorySpec {
        TrajectorySpec {
            duration: self.duration,
            sample_rate: self.sample_rate,
            x: (&self.x).into(),
            y: (&self.y).into(),
            roll: (&self.roll).into(),
        }
    }
}

impl SynthFile {
    pub fn build(&self) -> hrnvo::Result<SynthSpec> {
        let c = &self.capture;
        Ok(SynthSpec {
            scene: self.scene.build()?,
            trajectory: self.trajectory.build(),
            window: (c.window[0], c.window[1]),
            event_noise: c.event_noise,
            imu: ImuSpec {
                rate: c.imu.rate,
                noise_std: c.imu.noise_std,
                bias: c.imu.bias,
                pan_scale: c.imu.pan_scale,
                tilt_scale: c.imu.tilt_scale,
            },
            seed: c.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let spec = SynthFile::default().build().unwrap();
        let data = hrnvo::synth::SynthDataset { window: spec.window, events: vec![], imu: vec![], ground_truth: vec![] };
        let text = hrnvo::synth::manifest(&spec, &data);
        let back: SynthFile = toml::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), spec);
    }

    #[test]
    fn motion_tags() {
        let t: TrajFile = toml::from_str("[x]\nkind = \"sine\"\namplitude = 2.0\nfrequency = 0.5\n").unwrap();
        assert_eq!(t.x, MotionFile::Sine { amplitude: 2.0, frequency: 0.5, phase: 0.0 });
        assert_eq!(t.roll, TrajFile::default().roll);
    }
}

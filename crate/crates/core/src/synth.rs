//! Synthetic planar scenes viewed by a moving camera window, rendered to
//! binary frames and converted to event streams with exact ground truth,
//! plus an exhaustive registration oracle.
//!
//! Camera model: the window pixel p shows the canvas at
//! `origin + R(−θ)(p − c) + c − d`, i.e. the view at pose (d, θ) is the
//! reference view translated by d and then rotated by θ about the window
//! center.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::events::{
    euler_to_quat, write_events, write_ground_truth, write_imu, GroundTruthSample, ImuSample, RawEvent,
    EVENTS_FILE, GROUNDTRUTH_FILE, IMU_FILE,
};
use crate::image::{center_index, BinaryImage, RealImage};

pub const MANIFEST_FILE: &str = "manifest.toml";
/// Half-width of a rendered outline, pixels.
pub const LINE_HALF_WIDTH: f64 = 0.75;
pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeKind {
    Rectangle,
    Triangle,
    Circle,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Rectangle, ShapeKind::Triangle, ShapeKind::Circle];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rectangle => "rectangle",
            Self::Triangle => "triangle",
            Self::Circle => "circle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown shape kind '{s}'")))
    }
}

/// An outline on the canvas, optionally visible only during `[t0, t1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub kind: ShapeKind,
    pub center: (f64, f64),
    /// Half-extent (circle radius, triangle circumradius).
    pub size: (f64, f64),
    pub angle_deg: f64,
    pub visible: Option<(f64, f64)>,
}

impl Shape {
    pub fn is_visible(&self, t: f64) -> bool {
        self.visible.is_none_or(|(a, b)| t >= a && t < b)
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let local: Vec<(f64, f64)> = match self.kind {
            ShapeKind::Rectangle => {
                let (a, b) = self.size;
                vec![(-a, -b), (a, -b), (a, b), (-a, b)]
            }
            ShapeKind::Triangle => (0..3)
                .map(|k| {
                    let phi = TAU * k as f64 / 3.0 - PI / 2.0;
                    (self.size.0 * phi.cos(), self.size.0 * phi.sin())
                })
                .collect(),
            ShapeKind::Circle => Vec::new(),
        };
        local
            .into_iter()
            .map(|(x, y)| (self.center.0 + c * x - s * y, self.center.1 + s * x + c * y))
            .collect()
    }

    /// Bounding radius about the center.
    pub fn radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Rectangle => self.size.0.hypot(self.size.1),
            _ => self.size.0,
        }
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let u = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - u * dx).hypot(p.1 - a.1 - u * dy)
}

#[derive(Clone, Debug)]
struct Outline {
    kind: ShapeKind,
    center: (f64, f64),
    radius: f64,
    vertices: Vec<(f64, f64)>,
}

impl Outline {
    fn new(shape: &Shape) -> Self {
        Self {
            kind: shape.kind,
            center: shape.center,
            radius: shape.radius(),
            vertices: shape.vertices(),
        }
    }

    fn distance(&self, p: (f64, f64)) -> f64 {
        if let ShapeKind::Circle = self.kind {
            return ((p.0 - self.center.0).hypot(p.1 - self.center.1) - self.radius).abs();
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub canvas: (usize, usize),
    pub shapes: Vec<Shape>,
    pub seed: u64,
}

impl SceneSpec {
    /// Places `count` shapes of the given kinds at random, non-overlapping
    /// where possible, inside the central `spread` fraction of the canvas.
    pub fn random(canvas: (usize, usize), count: usize, kinds: &[ShapeKind], spread: f64, seed: u64) -> Result<Self> {
        if kinds.is_empty() {
            return Err(invalid("scene needs at least one shape kind"));
        }
        if !(spread > 0.0 && spread <= 1.0) {
            return Err(invalid(format!("spread must be in (0, 1], got {spread}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cw, ch) = (canvas.0 as f64, canvas.1 as f64);
        let mut shapes: Vec<Shape> = Vec::with_capacity(count);
        for i in 0..count {
            let kind = kinds[i % kinds.len()];
            let mut best = None;
            for _ in 0..200 {
                let size: (f64, f64) = (rng.random_range(4.0..10.0), rng.random_range(3.0..8.0));
                let r = match kind {
                    ShapeKind::Rectangle => size.0.hypot(size.1),
                    _ => size.0,
                } + 1.0;
                let hx = (0.5 * cw * spread - r).max(0.0);
                let hy = (0.5 * ch * spread - r).max(0.0);
                let center = (
                    0.5 * cw + rng.random_range(-hx..=hx),
                    0.5 * ch + rng.random_range(-hy..=hy),
                );
                let shape = Shape {
                    kind,
                    center,
                    size,
                    angle_deg: rng.random_range(0.0..360.0),
                    visible: None,
                };
                let clear = shapes.iter().all(|o| {
                    (o.center.0 - center.0).hypot(o.center.1 - center.1) > o.radius() + shape.radius() + 2.0
                });
                best = Some(shape);
                if clear {
                    break;
                }
            }
            shapes.extend(best);
        }
        let scene = Self { canvas, shapes, seed };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let (cw, ch) = (self.canvas.0 as f64, self.canvas.1 as f64);
        if self.canvas.0 < 2 || self.canvas.1 < 2 {
            return Err(invalid("canvas must be at least 2x2"));
        }
        for (i, s) in self.shapes.iter().enumerate() {
            let r = s.radius() + LINE_HALF_WIDTH;
            let fits = s.center.0 - r >= 0.0 && s.center.0 + r <= cw && s.center.1 - r >= 0.0 && s.center.1 + r <= ch;
            if !fits || !(s.size.0 > 0.0 && s.size.1 > 0.0) {
                return Err(invalid(format!("shape {i} does not fit in the canvas")));
            }
        }
        Ok(())
    }

    fn outlines(&self, t: f64) -> Vec<Outline> {
        self.shapes.iter().filter(|s| s.is_visible(t)).map(Outline::new).collect()
    }

    /// Canvas ink at a continuous canvas coordinate.
    pub fn ink(&self, p: (f64, f64), t: f64) -> bool {
        self.outlines(t).iter().any(|o| o.distance(p) <= LINE_HALF_WIDTH)
    }
}

/// Camera pose: window shift (pixels) and roll (degrees).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub roll: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub window: (usize, usize),
    pub canvas: (usize, usize),
}

impl Camera {
    fn origin(&self) -> (f64, f64) {
        (
            0.5 * (self.canvas.0 as f64 - self.window.0 as f64),
            0.5 * (self.canvas.1 as f64 - self.window.1 as f64),
        )
    }

    /// Canvas coordinate seen at continuous window coordinate `q`.
    pub fn to_canvas(&self, q: (f64, f64), pose: Pose) -> (f64, f64) {
        let (ox, oy) = self.origin();
        let (cx, cy) = (0.5 * self.window.0 as f64, 0.5 * self.window.1 as f64);
        let (s, c) = pose.roll.to_radians().sin_cos();
        let (px, py) = (q.0 - cx, q.1 - cy);
        (ox + c * px + s * py + cx - pose.x, oy - s * px + c * py + cy - pose.y)
    }

    pub fn window_inside(&self, pose: Pose) -> bool {
        let (w, h) = (self.window.0 as f64, self.window.1 as f64);
        let (cw, ch) = (self.canvas.0 as f64, self.canvas.1 as f64);
        [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)].into_iter().all(|q| {
            let (x, y) = self.to_canvas(q, pose);
            (0.0..=cw).contains(&x) && (0.0..=ch).contains(&y)
        })
    }

    pub fn render(&self, scene: &SceneSpec, pose: Pose, t: f64) -> BinaryImage {
        let outlines = scene.outlines(t);
        BinaryImage::from_fn(self.window.0, self.window.1, |x, y| {
            let p = self.to_canvas((x as f64 + 0.5, y as f64 + 0.5), pose);
            u8::from(outlines.iter().any(|o| o.distance(p) <= LINE_HALF_WIDTH))
        })
    }
}

/// Motion of one axis.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisMotion {
    Still,
    /// value(t) = rate·t
    Constant { rate: f64 },
    /// value(t) = amplitude·sin(2π·frequency·t + phase)
    Sine { amplitude: f64, frequency: f64, phase: f64 },
    /// Smoothstep-blended random velocity knots every `interval` seconds,
    /// bounded by `peak_speed` and pulled back toward 0 past `bound`.
    RandomWalk { peak_speed: f64, interval: f64, bound: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
struct WalkTrack {
    interval: f64,
    knots: Vec<f64>,
    starts: Vec<f64>,
}

impl WalkTrack {
    fn new(peak_speed: f64, interval: f64, bound: f64, seed: u64, duration: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (duration / interval).ceil() as usize + 2;
        let mut knots = Vec::with_capacity(n);
        let mut starts = Vec::with_capacity(n);
        let mut pos = 0.0;
        let mut v: f64 = 0.0;
        for _ in 0..n {
            starts.push(pos);
            knots.push(v);
            let mut next = rng.random_range(-peak_speed..=peak_speed);
            let ahead = pos + 0.5 * interval * (v + next);
            if ahead.abs() > bound {
                next = -ahead.signum() * next.abs();
            }
            pos += 0.5 * interval * (v + next);
            v = next;
        }
        knots.push(v);
        Self { interval, knots, starts }
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let i = ((t / self.interval).floor().max(0.0) as usize).min(self.starts.len() - 1);
        (i, t / self.interval - i as f64)
    }

    fn value(&self, t: f64) -> f64 {
        let (i, u) = self.segment(t);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        self.starts[i] + self.interval * (a * u + (b - a) * (u.powi(3) - 0.5 * u.powi(4)))
    }

    fn rate(&self, t: f64) -> f64 {
        let (i, u) = self.segment(t);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        a + (b - a) * u * u * (3.0 - 2.0 * u)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Track {
    Still,
    Constant(f64),
    Sine(f64, f64, f64),
    Walk(WalkTrack),
}

impl Track {
    fn new(motion: &AxisMotion, duration: f64) -> Self {
        match *motion {
            AxisMotion::Still => Self::Still,
            AxisMotion::Constant { rate } => Self::Constant(rate),
            AxisMotion::Sine {
                amplitude,
                frequency,
                phase,
            } => Self::Sine(amplitude, frequency, phase),
            AxisMotion::RandomWalk {
                peak_speed,
                interval,
                bound,
                seed,
            } => Self::Walk(WalkTrack::new(peak_speed, interval, bound, seed, duration)),
        }
    }

    fn value(&self, t: f64) -> f64 {
        match self {
            Self::Still => 0.0,
            Self::Constant(r) => r * t,
            Self::Sine(a, f, p) => a * (TAU * f * t + p).sin(),
            Self::Walk(w) => w.value(t),
        }
    }

    fn rate(&self, t: f64) -> f64 {
        match self {
            Self::Still => 0.0,
            Self::Constant(r) => *r,
            Self::Sine(a, f, p) => a * TAU * f * (TAU * f * t + p).cos(),
            Self::Walk(w) => w.rate(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySpec {
    pub duration: f64,
    /// Render rate, Hz.
    pub sample_rate: f64,
    pub x: AxisMotion,
    pub y: AxisMotion,
    pub roll: AxisMotion,
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(invalid(format!("sample rate must be positive, got {}", self.sample_rate)));
        }
        for m in [&self.x, &self.y, &self.roll] {
            if let AxisMotion::RandomWalk { interval, peak_speed, .. } = m {
                if !(*interval > 0.0) || !(*peak_speed >= 0.0) {
                    return Err(invalid("random walk needs interval > 0 and peak speed >= 0"));
                }
            }
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.duration * self.sample_rate).round() as usize;
        (0..=n).map(|k| k as f64 / self.sample_rate).collect()
    }

    pub fn motion(&self) -> Motion {
        Motion {
            x: Track::new(&self.x, self.duration),
            y: Track::new(&self.y, self.duration),
            roll: Track::new(&self.roll, self.duration),
        }
    }
}

/// Evaluable trajectory built from a [`TrajectorySpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Motion {
    x: Track,
    y: Track,
    roll: Track,
}

impl Motion {
    pub fn pose(&self, t: f64) -> Pose {
        Pose {
            x: self.x.value(t),
            y: self.y.value(t),
            roll: self.roll.value(t),
        }
    }

    /// Pixels/s, pixels/s, degrees/s.
    pub fn rates(&self, t: f64) -> Pose {
        Pose {
            x: self.x.rate(t),
            y: self.y.rate(t),
            roll: self.roll.rate(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSpec {
    pub rate: f64,
    /// Gyro noise standard deviation, rad/s.
    pub noise_std: f64,
    /// Constant gyro bias per axis (x, y, z), rad/s.
    pub bias: [f64; 3],
    /// Pixels per radian of pan (about y) and tilt (about x).
    pub pan_scale: f64,
    pub tilt_scale: f64,
}

impl Default for ImuSpec {
    fn default() -> Self {
        Self {
            rate: 200.0,
            noise_std: 0.5f64.to_radians(),
            bias: [0.0; 3],
            pan_scale: 60.0,
            tilt_scale: 60.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub scene: SceneSpec,
    pub trajectory: TrajectorySpec,
    pub window: (usize, usize),
    /// Uniform noise events per rendered frame.
    pub event_noise: f64,
    pub imu: ImuSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthDataset {
    pub window: (usize, usize),
    pub events: Vec<RawEvent>,
    pub imu: Vec<ImuSample>,
    pub ground_truth: Vec<GroundTruthSample>,
}

/// Ground-truth sample of a pose: position (x, y, 0) in pixels and the
/// roll as a rotation about the optical axis.
pub fn pose_sample(t: f64, pose: Pose) -> GroundTruthSample {
    GroundTruthSample {
        t,
        position: [pose.x, pose.y, 0.0],
        orientation: euler_to_quat(pose.roll, 0.0, 0.0),
    }
}

/// Renders the window along the trajectory and emits one event per pixel
/// flip between consecutive renders, at a uniformly drawn time inside the
/// interval.
pub fn generate_dataset(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.scene.validate()?;
    spec.trajectory.validate()?;
    if !(spec.event_noise >= 0.0 && spec.event_noise.is_finite()) {
        return Err(invalid("event noise must be non-negative"));
    }
    if !(spec.imu.rate > 0.0 && spec.imu.noise_std >= 0.0) {
        return Err(invalid("imu rate must be positive and noise non-negative"));
    }
    let camera = Camera {
        window: spec.window,
        canvas: spec.scene.canvas,
    };
    let motion = spec.trajectory.motion();
    let times = spec.trajectory.sample_times();
    if let Some(&t) = times.iter().find(|&&t| !camera.window_inside(motion.pose(t))) {
        return Err(invalid(format!("camera window leaves the canvas at t = {t:.3} s")));
    }

    let frames: Vec<BinaryImage> = times
        .par_iter()
        .map(|&t| camera.render(&spec.scene, motion.pose(t), t))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = spec.window;
    let mut events = Vec::new();
    let mut step = Vec::new();
    for k in 1..frames.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        let span = t1 - t0;
        step.clear();
        for (i, (&a, &b)) in frames[k - 1].data().iter().zip(frames[k].data()).enumerate() {
            if a != b {
                let u: f64 = 1.0 - rng.random::<f64>();
                step.push(RawEvent {
                    t: t0 + u * span,
                    x: (i % w) as u32,
                    y: (i / w) as u32,
                    polarity: b,
                });
            }
        }
        let whole = spec.event_noise.floor();
        let noise = whole as usize + usize::from(rng.random::<f64>() < spec.event_noise - whole);
        for _ in 0..noise {
            let u: f64 = 1.0 - rng.random::<f64>();
            step.push(RawEvent {
                t: t0 + u * span,
                x: rng.random_range(0..w as u32),
                y: rng.random_range(0..h as u32),
                polarity: rng.random_range(0..=1),
            });
        }
        step.sort_by(|a, b| a.t.total_cmp(&b.t));
        events.extend_from_slice(&step);
    }

    let ground_truth = times.iter().map(|&t| pose_sample(t, motion.pose(t))).collect();

    let normal = Normal::new(0.0, spec.imu.noise_std).map_err(|e| invalid(e.to_string()))?;
    let n_imu = (spec.trajectory.duration * spec.imu.rate).round() as usize;
    let imu = (0..=n_imu)
        .map(|k| {
            let t = k as f64 / spec.imu.rate;
            let r = motion.rates(t);
            let clean = [
                r.y / spec.imu.tilt_scale,
                r.x / spec.imu.pan_scale,
                r.roll.to_radians(),
            ];
            let gyro: [f64; 3] = std::array::from_fn(|i| clean[i] + spec.imu.bias[i] + normal.sample(&mut rng));
            ImuSample {
                t,
                angular_velocity: gyro,
                linear_acceleration: [0.0, 0.0, GRAVITY],
            }
        })
        .collect();

    Ok(SynthDataset {
        window: spec.window,
        events,
        imu,
        ground_truth,
    })
}

fn motion_manifest(name: &str, m: &AxisMotion) -> String {
    match m {
        AxisMotion::Still => format!("[trajectory.{name}]\nkind = \"still\"\n"),
        AxisMotion::Constant { rate } => format!("[trajectory.{name}]\nkind = \"constant\"\nrate = {rate:?}\n"),
        AxisMotion::Sine {
            amplitude,
            frequency,
            phase,
        } => format!(
            "[trajectory.{name}]\nkind = \"sine\"\namplitude = {amplitude:?}\nfrequency = {frequency:?}\nphase = {phase:?}\n"
        ),
        AxisMotion::RandomWalk {
            peak_speed,
            interval,
            bound,
            seed,
        } => format!(
            "[trajectory.{name}]\nkind = \"random-walk\"\npeak_speed = {peak_speed:?}\ninterval = {interval:?}\nbound = {bound:?}\nseed = {seed}\n"
        ),
    }
}

/// TOML record of everything needed to regenerate a dataset.
pub fn manifest(spec: &SynthSpec, data: &SynthDataset) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "generator = \"hrnvo-synth\"\nversion = \"{}\"\nseed = {}\nwindow = [{}, {}]\nevent_noise = {:?}\nevents = {}\nimu_samples = {}\nground_truth_samples = {}\n\n",
        env!("CARGO_PKG_VERSION"),
        spec.seed,
        spec.window.0,
        spec.window.1,
        spec.event_noise,
        data.events.len(),
        data.imu.len(),
        data.ground_truth.len()
    ));
    s.push_str(&format!(
        "[imu]\nrate = {:?}\nnoise_std = {:?}\nbias = [{:?}, {:?}, {:?}]\npan_scale = {:?}\ntilt_scale = {:?}\n\n",
        spec.imu.rate,
        spec.imu.noise_std,
        spec.imu.bias[0],
        spec.imu.bias[1],
        spec.imu.bias[2],
        spec.imu.pan_scale,
        spec.imu.tilt_scale
    ));
    s.push_str(&format!(
        "[trajectory]\nduration = {:?}\nsample_rate = {:?}\n\n",
        spec.trajectory.duration, spec.trajectory.sample_rate
    ));
    for (name, m) in [("x", &spec.trajectory.x), ("y", &spec.trajectory.y), ("roll", &spec.trajectory.roll)] {
        s.push_str(&motion_manifest(name, m));
        s.push('\n');
    }
    s.push_str(&format!(
        "[scene]\ncanvas = [{}, {}]\nseed = {}\n\n",
        spec.scene.canvas.0, spec.scene.canvas.1, spec.scene.seed
    ));
    for shape in &spec.scene.shapes {
        s.push_str(&format!(
            "[[scene.shapes]]\nkind = \"{}\"\ncenter = [{:?}, {:?}]\nsize = [{:?}, {:?}]\nangle = {:?}\n",
            shape.kind.as_str(),
            shape.center.0,
            shape.center.1,
            shape.size.0,
            shape.size.1,
            shape.angle_deg
        ));
        if let Some((a, b)) = shape.visible {
            s.push_str(&format!("visible = [{a:?}, {b:?}]\n"));
        }
        s.push('\n');
    }
    s
}

/// Writes the three text files and the manifest into `dir`, returning the
/// manifest path.
pub fn write_dataset(dir: &Path, spec: &SynthSpec, data: &SynthDataset) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_events(&dir.join(EVENTS_FILE), &data.events)?;
    write_imu(&dir.join(IMU_FILE), &data.imu)?;
    write_ground_truth(&dir.join(GROUNDTRUTH_FILE), &data.ground_truth)?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest(spec, data))?;
    Ok(path)
}

/// Candidate grid of the registration oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegisterGrid {
    pub shift_range: f64,
    pub shift_step: f64,
    pub angle_range: f64,
    pub angle_step: f64,
}

impl RegisterGrid {
    fn axis(range: f64, step: f64) -> Vec<f64> {
        let n = (range / step + 1e-9).floor() as i64;
        (-n..=n).map(|k| k as f64 * step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Registration {
    pub dx: f64,
    pub dy: f64,
    pub angle_deg: f64,
    pub score: f64,
}

fn tie_key(r: &Registration) -> (f64, f64, f64, f64, f64, f64) {
    (r.dx.abs(), r.dy.abs(), r.angle_deg.abs(), r.dx, r.dy, r.angle_deg)
}

fn better(a: Registration, b: Registration) -> Registration {
    if a.score > b.score {
        return a;
    }
    if b.score > a.score {
        return b;
    }
    if tie_key(&b).partial_cmp(&tie_key(&a)) == Some(std::cmp::Ordering::Less) {
        b
    } else {
        a
    }
}

/// Exhaustive search for the transform (dx, dy, θ) maximizing
/// Σ frame · warp(map, dx, dy, θ).
pub fn brute_force_register(frame: &BinaryImage, map: &RealImage, grid: RegisterGrid) -> Result<Registration> {
    if frame.width() != map.width() || frame.height() != map.height() {
        return Err(invalid("frame and map sizes differ"));
    }
    if !(grid.shift_step > 0.0 && grid.angle_step > 0.0 && grid.shift_range >= 0.0 && grid.angle_range >= 0.0) {
        return Err(invalid("registration grid needs positive steps and non-negative ranges"));
    }
    let active: Vec<(f64, f64)> = (0..frame.height())
        .flat_map(|y| (0..frame.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| frame.get(x, y) != 0)
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    if active.is_empty() {
        return Err(Error::DegenerateInput("frame has no active pixels".into()));
    }
    let (cx, cy) = center_index(frame.width(), frame.height());
    let shifts = RegisterGrid::axis(grid.shift_range, grid.shift_step);
    let angles = RegisterGrid::axis(grid.angle_range, grid.angle_step);
    let best = angles
        .par_iter()
        .map(|&theta| {
            let (s, c) = theta.to_radians().sin_cos();
            let rotated: Vec<(f64, f64)> = active
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = (x - cx, y - cy);
                    (c * px + s * py + cx, -s * px + c * py + cy)
                })
                .collect();
            let mut local: Option<Registration> = None;
            for &dy in &shifts {
                for &dx in &shifts {
                    let score = rotated.iter().map(|&(x, y)| map.sample_bilinear(x - dx, y - dy)).sum();
                    let cand = Registration {
                        dx,
                        dy,
                        angle_deg: theta,
                        score,
                    };
                    local = Some(local.map_or(cand, |l| better(l, cand)));
                }
            }
            local.expect("non-empty grid")
        })
        .reduce_with(better)
        .expect("non-empty grid");
    Ok(best)
}

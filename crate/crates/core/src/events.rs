//! Event-camera dataset ingestion: text loaders, downsampling, fixed-count
//! packaging and binarization, plus the quaternion helpers used for the
//! ground truth.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{Quaternion, UnitQuaternion};

use crate::codebook::CartesianGrid;
use crate::error::{invalid, Error, Result};
use crate::image::BinaryImage;

pub const EVENTS_FILE: &str = "events.txt";
pub const IMU_FILE: &str = "imu.txt";
pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";

/// Fraction of malformed lines above which a file is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawEvent {
    pub t: f64,
    pub x: u32,
    pub y: u32,
    pub polarity: u8,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// rad/s
    pub angular_velocity: [f64; 3],
    /// m/s²
    pub linear_acceleration: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundTruthSample {
    pub t: f64,
    pub position: [f64; 3],
    /// (w, x, y, z), unit norm.
    pub orientation: [f64; 4],
}

impl GroundTruthSample {
    pub fn rotation(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.orientation;
        UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryFrame {
    pub bits: BinaryImage,
    pub t_mid: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    TextV1,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text-v1" => Ok(Self::TextV1),
            other => Err(invalid(format!("unknown dataset format '{other}'"))),
        }
    }
}

/// Line counters from parsing one file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub parsed: usize,
    pub malformed: usize,
    pub out_of_range: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub events: Vec<RawEvent>,
    pub imu: Vec<ImuSample>,
    pub ground_truth: Vec<GroundTruthSample>,
    pub event_stats: ParseStats,
    pub imu_stats: ParseStats,
    pub ground_truth_stats: ParseStats,
}

enum Line<T> {
    Ok(T),
    Malformed,
    OutOfRange,
}

fn parse_fields<const K: usize>(line: &str) -> Option<[f64; K]> {
    let mut out = [0.0f64; K];
    let mut it = line.split_ascii_whitespace();
    for slot in out.iter_mut() {
        *slot = it.next()?.parse().ok()?;
        if !slot.is_finite() {
            return None;
        }
    }
    if it.next().is_some() {
        return None;
    }
    Some(out)
}

fn parse_event(line: &str, sensor: (u32, u32), last_t: &mut f64) -> Line<RawEvent> {
    let mut it = line.split_ascii_whitespace();
    let (Some(t), Some(x), Some(y), Some(p), None) = (it.next(), it.next(), it.next(), it.next(), it.next()) else {
        return Line::Malformed;
    };
    let (Ok(t), Ok(x), Ok(y), Ok(p)) = (t.parse::<f64>(), x.parse::<i64>(), y.parse::<i64>(), p.parse::<u8>()) else {
        return Line::Malformed;
    };
    if !t.is_finite() || p > 1 || t < *last_t {
        return Line::Malformed;
    }
    if x < 0 || y < 0 || x >= sensor.0 as i64 || y >= sensor.1 as i64 {
        return Line::OutOfRange;
    }
    *last_t = t;
    Line::Ok(RawEvent {
        t,
        x: x as u32,
        y: y as u32,
        polarity: p,
    })
}

fn parse_imu(line: &str) -> Line<ImuSample> {
    match parse_fields::<7>(line) {
        Some([t, ax, ay, az, gx, gy, gz]) => Line::Ok(ImuSample {
            t,
            angular_velocity: [gx, gy, gz],
            linear_acceleration: [ax, ay, az],
        }),
        None => Line::Malformed,
    }
}

fn parse_ground_truth(line: &str) -> Line<GroundTruthSample> {
    let Some([t, px, py, pz, qx, qy, qz, qw]) = parse_fields::<8>(line) else {
        return Line::Malformed;
    };
    let norm = (qw * qw + qx * qx + qy * qy + qz * qz).sqrt();
    if (norm - 1.0).abs() > 1e-3 {
        return Line::Malformed;
    }
    Line::Ok(GroundTruthSample {
        t,
        position: [px, py, pz],
        orientation: [qw / norm, qx / norm, qy / norm, qz / norm],
    })
}

fn parse_text<T>(path: &Path, mut parse: impl FnMut(&str) -> Line<T>) -> Result<(Vec<T>, ParseStats)> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut out = Vec::new();
    let mut stats = ParseStats::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse(line) {
            Line::Ok(v) => {
                out.push(v);
                stats.parsed += 1;
            }
            Line::Malformed => stats.malformed += 1,
            Line::OutOfRange => stats.out_of_range += 1,
        }
    }
    let total = stats.parsed + stats.malformed + stats.out_of_range;
    if total > 0 && stats.malformed as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("{} of {total} lines are malformed", stats.malformed),
        });
    }
    Ok((out, stats))
}

pub fn load_events(path: &Path, sensor: (u32, u32)) -> Result<(Vec<RawEvent>, ParseStats)> {
    let mut last_t = f64::NEG_INFINITY;
    parse_text(path, |l| parse_event(l, sensor, &mut last_t))
}

pub fn load_imu(path: &Path) -> Result<(Vec<ImuSample>, ParseStats)> {
    parse_text(path, parse_imu)
}

pub fn load_ground_truth(path: &Path) -> Result<(Vec<GroundTruthSample>, ParseStats)> {
    parse_text(path, parse_ground_truth)
}

/// Loads `events.txt` and, when present, `imu.txt` and `groundtruth.txt`.
pub fn load_dataset(dir: &Path, format: DatasetFormat, sensor: (u32, u32)) -> Result<Dataset> {
    let DatasetFormat::TextV1 = format;
    let events_path = dir.join(EVENTS_FILE);
    if !events_path.is_file() {
        return Err(Error::NotFound(events_path));
    }
    let (events, event_stats) = load_events(&events_path, sensor)?;
    let optional = |name: &str| -> Option<PathBuf> {
        let p = dir.join(name);
        p.is_file().then_some(p)
    };
    let (imu, imu_stats) = match optional(IMU_FILE) {
        Some(p) => load_imu(&p)?,
        None => Default::default(),
    };
    let (ground_truth, ground_truth_stats) = match optional(GROUNDTRUTH_FILE) {
        Some(p) => load_ground_truth(&p)?,
        None => Default::default(),
    };
    Ok(Dataset {
        events,
        imu,
        ground_truth,
        event_stats,
        imu_stats,
        ground_truth_stats,
    })
}

pub fn write_events(path: &Path, events: &[RawEvent]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for e in events {
        writeln!(w, "{:.9} {} {} {}", e.t, e.x, e.y, e.polarity)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_imu(path: &Path, imu: &[ImuSample]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for s in imu {
        let [ax, ay, az] = s.linear_acceleration;
        let [gx, gy, gz] = s.angular_velocity;
        writeln!(w, "{:.9} {ax:.12e} {ay:.12e} {az:.12e} {gx:.12e} {gy:.12e} {gz:.12e}", s.t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ground_truth(path: &Path, gt: &[GroundTruthSample]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for s in gt {
        let [px, py, pz] = s.position;
        let [qw, qx, qy, qz] = s.orientation;
        writeln!(
            w,
            "{:.9} {px:.12e} {py:.12e} {pz:.12e} {qx:.15e} {qy:.15e} {qz:.15e} {qw:.15e}",
            s.t
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreprocessConfig {
    pub sensor: (u32, u32),
    pub grid: CartesianGrid,
    pub package_size: usize,
    /// Pixels with more events than this become 1.
    pub binarize_threshold: u32,
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.package_size == 0 {
            return Err(invalid("package size must be positive"));
        }
        if self.sensor.0 == 0 || self.sensor.1 == 0 {
            return Err(invalid("sensor dimensions must be positive"));
        }
        Ok(())
    }

    fn factors(&self) -> (f64, f64) {
        (
            self.sensor.0 as f64 / self.grid.width as f64,
            self.sensor.1 as f64 / self.grid.height as f64,
        )
    }

    /// Target-grid pixel of a sensor coordinate.
    pub fn map_coordinate(&self, x: u32, y: u32) -> (usize, usize) {
        let (fx, fy) = self.factors();
        let scale = |v: u32, f: f64, n: usize| ((v as f64 / f).round_ties_even().max(0.0) as usize).min(n - 1);
        (scale(x, fx, self.grid.width), scale(y, fy, self.grid.height))
    }

    /// Binarizes one package of events.
    pub fn frame(&self, package: &[RawEvent]) -> BinaryFrame {
        let (w, h) = (self.grid.width, self.grid.height);
        let mut counts = vec![0u32; w * h];
        for e in package {
            let (x, y) = self.map_coordinate(e.x, e.y);
            counts[y * w + x] += 1;
        }
        let bits = counts.iter().map(|&c| u8::from(c > self.binarize_threshold)).collect();
        let t_mid = match (package.first(), package.last()) {
            (Some(a), Some(b)) => 0.5 * (a.t + b.t),
            _ => 0.0,
        };
        BinaryFrame {
            bits: BinaryImage::from_vec(w, h, bits).expect("buffer sized from grid"),
            t_mid,
        }
    }
}

/// Lazily packages a sorted event stream into binary frames. A trailing
/// partial package is dropped.
pub fn frames<'a>(events: &'a [RawEvent], config: &'a PreprocessConfig) -> Result<impl Iterator<Item = BinaryFrame> + 'a> {
    config.validate()?;
    Ok(events.chunks_exact(config.package_size).map(|p| config.frame(p)))
}

pub fn preprocess(events: &[RawEvent], config: &PreprocessConfig) -> Result<Vec<BinaryFrame>> {
    Ok(frames(events, config)?.collect())
}

/// Intrinsic Z-Y-X angles in degrees: (roll about the optical axis z,
/// pan about y, tilt about x).
pub fn quat_to_euler(q: [f64; 4]) -> Result<(f64, f64, f64)> {
    let [w, x, y, z] = q;
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid("zero or non-finite quaternion"));
    }
    let uq = UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z));
    // nalgebra returns (x, y, z) angles of R = Rz·Ry·Rx
    let (tilt, pan, roll) = uq.euler_angles();
    Ok((roll.to_degrees(), pan.to_degrees(), tilt.to_degrees()))
}

/// Inverse of [`quat_to_euler`], returned as (w, x, y, z).
pub fn euler_to_quat(roll_deg: f64, pan_deg: f64, tilt_deg: f64) -> [f64; 4] {
    let q = UnitQuaternion::from_euler_angles(tilt_deg.to_radians(), pan_deg.to_radians(), roll_deg.to_radians());
    [q.w, q.i, q.j, q.k]
}

/// Removes ±360° jumps so consecutive angles differ by at most 180°.
pub fn unwrap_degrees(angles: &mut [f64]) {
    let mut offset = 0.0;
    for i in 1..angles.len() {
        let prev = angles[i - 1];
        let raw = angles[i] + offset;
        let d = raw - prev;
        let k = ((d + 180.0) / 360.0).floor();
        offset -= 360.0 * k;
        angles[i] = raw - 360.0 * k;
    }
}

/// Timestamped sample that supports linear interpolation.
pub trait Timed: Copy {
    fn time(&self) -> f64;
    /// Interpolates toward `other` at fraction `u` and time `t`.
    fn lerp(&self, other: &Self, u: f64, t: f64) -> Self;
}

fn lerp3(a: [f64; 3], b: [f64; 3], u: f64) -> [f64; 3] {
    std::array::from_fn(|i| a[i] + (b[i] - a[i]) * u)
}

impl Timed for ImuSample {
    fn time(&self) -> f64 {
        self.t
    }

    fn lerp(&self, other: &Self, u: f64, t: f64) -> Self {
        Self {
            t,
            angular_velocity: lerp3(self.angular_velocity, other.angular_velocity, u),
            linear_acceleration: lerp3(self.linear_acceleration, other.linear_acceleration, u),
        }
    }
}

impl Timed for GroundTruthSample {
    fn time(&self) -> f64 {
        self.t
    }

    /// Component-wise on the quaternion (sign-aligned), then renormalized.
    fn lerp(&self, other: &Self, u: f64, t: f64) -> Self {
        let a = self.orientation;
        let mut b = other.orientation;
        if a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>() < 0.0 {
            b = b.map(|v| -v);
        }
        let mut q: [f64; 4] = std::array::from_fn(|i| a[i] + (b[i] - a[i]) * u);
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            q = q.map(|v| v / n);
        }
        Self {
            t,
            position: lerp3(self.position, other.position, u),
            orientation: q,
        }
    }
}

/// Linear interpolation at `t`, clamped to the end samples.
pub fn interpolate_at<T: Timed>(samples: &[T], t: f64) -> Result<T> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(invalid("cannot interpolate an empty sequence"));
    };
    if t <= first.time() {
        return Ok(*first);
    }
    if t >= last.time() {
        return Ok(*last);
    }
    let i = samples.partition_point(|s| s.time() <= t);
    let (a, b) = (&samples[i - 1], &samples[i]);
    if a.time() == t {
        return Ok(*a);
    }
    let u = (t - a.time()) / (b.time() - a.time());
    Ok(a.lerp(b, u, t))
}

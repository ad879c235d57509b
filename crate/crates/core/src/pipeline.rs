//! Streams binary frames through a resonator, with optional IMU fusion.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::codebook::CodebookSet;
use crate::error::{Error, Result};
use crate::events::{interpolate_at, BinaryFrame, ImuSample};
use crate::frame::FrameTransform;
use crate::resonator::{EncodedFrame, Estimate, ImuRates, Resonator, ResonatorConfig};

/// Frames encoded ahead of the resonator in one parallel batch.
const ENCODE_BATCH: usize = 64;

/// Gyro stream and its pixel-rate calibration.
#[derive(Clone, Copy, Debug)]
pub struct ImuFeed<'a> {
    pub samples: &'a [ImuSample],
    pub pan_scale: f64,
    pub tilt_scale: f64,
}

impl ImuFeed<'_> {
    pub fn rates_at(&self, t: f64) -> Result<ImuRates> {
        let s = interpolate_at(self.samples, t)?;
        Ok(ImuRates::from_gyro(s.angular_velocity, self.pan_scale, self.tilt_scale))
    }
}

/// Runs one resonator iteration per frame and returns every readout. The
/// first non-empty frame seeds the map.
pub fn track<R: Rng + ?Sized>(
    codebooks: Arc<CodebookSet>,
    transform: Arc<FrameTransform>,
    frames: &[BinaryFrame],
    config: ResonatorConfig,
    imu: Option<ImuFeed<'_>>,
    rng: &mut R,
) -> Result<Vec<Estimate>> {
    let mut out = Vec::with_capacity(frames.len());
    track_with(codebooks, transform, frames, config, imu, rng, |e| {
        out.push(e);
        Ok(())
    })?;
    Ok(out)
}

/// As [`track`], handing each readout to `sink` as it is produced.
pub fn track_with<R: Rng + ?Sized>(
    codebooks: Arc<CodebookSet>,
    transform: Arc<FrameTransform>,
    frames: &[BinaryFrame],
    config: ResonatorConfig,
    imu: Option<ImuFeed<'_>>,
    rng: &mut R,
    mut sink: impl FnMut(Estimate) -> Result<()>,
) -> Result<usize> {
    let first = frames
        .iter()
        .find(|f| f.bits.count_ones() > 0)
        .ok_or_else(|| Error::DegenerateInput("no frame has active pixels".into()))?;
    let mut res = Resonator::new(codebooks, transform, &first.bits, config, rng)?;
    let mut prev_t: Option<f64> = None;
    let mut steps = 0;
    for batch in frames.chunks(ENCODE_BATCH) {
        let encoded: Vec<EncodedFrame> = batch
            .par_iter()
            .map(|f| res.encode_frame(&f.bits, f.t_mid))
            .collect::<Result<_>>()?;
        for enc in &encoded {
            let dt = prev_t.map_or(0.0, |p| enc.t_mid - p);
            let rates = match imu {
                Some(feed) if dt > 0.0 => Some(feed.rates_at(enc.t_mid - 0.5 * dt)?),
                _ => None,
            };
            sink(res.step(enc, rates, dt)?)?;
            prev_t = Some(enc.t_mid);
            steps += 1;
        }
    }
    Ok(steps)
}

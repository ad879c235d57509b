//! Hierarchical resonator network for 3-DoF visual odometry.
//!
//! Generative model: input = rotate(translate(map, h, v), r). The
//! Cartesian partition holds the shift states ĥ, v̂; the polar partition
//! holds the roll state r̂. Each [`Resonator::step`] consumes one encoded
//! frame, updates the shift states and then the roll state, reads out the
//! population-vector estimate, and (after the blocking period) folds the
//! frame into the anchored map.

use std::sync::Arc;

use rand::Rng;

use crate::codebook::{Codebook, CodebookSet};
use crate::error::{check_len, invalid, Error, Result};
use crate::frame::FrameTransform;
use crate::hd::{sharpen, CoefficientVector, PhasorVector};
use crate::image::BinaryImage;

#[derive(Clone, Debug, PartialEq)]
pub struct ResonatorConfig {
    /// Leaky update rate of the states.
    pub gamma: f64,
    /// Exponent of the cleanup nonlinearity.
    pub sharpen_k: f64,
    /// Map updates are blocked for this many iterations.
    pub map_block_iterations: u64,
    /// Weight of the current map in a map update.
    pub mu1: f64,
    /// Weight of the anchor (initial) map in a map update.
    pub mu2: f64,
    /// Half-width of the population-vector window, in indices.
    pub readout_window: usize,
    pub fusion_enabled: bool,
    /// Project the states back onto the unit circle after each leaky
    /// update.
    pub renormalize_states: bool,
}

impl Default for ResonatorConfig {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            sharpen_k: 8.0,
            map_block_iterations: 100,
            mu1: 0.9,
            mu2: 0.02,
            readout_window: 5,
            fusion_enabled: false,
            renormalize_states: false,
        }
    }
}

impl ResonatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(1.0..=20.0).contains(&self.sharpen_k) {
            return Err(invalid(format!(
                "sharpen_k must be in [1, 20], got {}",
                self.sharpen_k
            )));
        }
        if !(self.mu1 >= 0.0 && self.mu2 >= 0.0 && self.mu1 + self.mu2 < 1.0) {
            return Err(invalid(format!(
                "need mu1, mu2 >= 0 and mu1 + mu2 < 1, got {} and {}",
                self.mu1, self.mu2
            )));
        }
        Ok(())
    }
}

/// Rates used for the prediction step: roll in degrees/s, pan and tilt
/// already mapped to pixels/s.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ImuRates {
    pub roll_deg_s: f64,
    pub pan_px_s: f64,
    pub tilt_px_s: f64,
}

impl ImuRates {
    /// Maps gyro rates (rad/s, camera axes x, y, z with z the optical axis)
    /// to resonator rates. `pan_scale` and `tilt_scale` are pixels per
    /// radian and may be negative to flip an axis.
    pub fn from_gyro(gyro: [f64; 3], pan_scale: f64, tilt_scale: f64) -> Self {
        Self {
            roll_deg_s: gyro[2].to_degrees(),
            pan_px_s: gyro[1] * pan_scale,
            tilt_px_s: gyro[0] * tilt_scale,
        }
    }

    fn is_finite(&self) -> bool {
        self.roll_deg_s.is_finite() && self.pan_px_s.is_finite() && self.tilt_px_s.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonatorState {
    pub h: PhasorVector,
    pub v: PhasorVector,
    /// Polar frame.
    pub r: PhasorVector,
    /// Cartesian, map frame. A bundle; not phasor-normalized.
    pub map: PhasorVector,
    pub anchor: PhasorVector,
    pub iteration: u64,
}

/// Population-vector readout of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    /// Fractional codebook index.
    pub index: f64,
    pub profile: CoefficientVector,
    /// Set when no positive similarity was found around the peak.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    /// Horizontal shift, pixels.
    pub h: f64,
    /// Vertical shift, pixels.
    pub v: f64,
    /// Roll, degrees in [0, 360).
    pub r: f64,
    pub t_mid: f64,
    pub h_profile: CoefficientVector,
    pub v_profile: CoefficientVector,
    pub r_profile: CoefficientVector,
    pub degenerate: bool,
}

impl Estimate {
    /// Roll mapped to (−180, 180].
    pub fn r_signed(&self) -> f64 {
        wrap_signed_deg(self.r)
    }
}

pub fn wrap_signed_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Argmax of a profile; ties resolve to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Similarity-weighted mean of the indices within ±`window` of the peak.
/// Negative values are clamped to zero; periodic axes wrap. Returns the
/// fractional index and whether the window held no positive mass.
pub fn population_vector(profile: &[f64], window: usize, periodic: bool) -> (f64, bool) {
    let m = profile.len();
    if m == 0 {
        return (0.0, true);
    }
    if profile.iter().all(|&x| x == 0.0) {
        return (0.0, true);
    }
    let peak = argmax(profile);
    let w = if periodic { window.min((m - 1) / 2) } else { window } as i64;
    let mut mass = 0.0;
    let mut moment = 0.0;
    for d in -w..=w {
        let i = peak as i64 + d;
        let idx = if periodic {
            i.rem_euclid(m as i64)
        } else if i < 0 || i >= m as i64 {
            continue;
        } else {
            i
        };
        let p = profile[idx as usize].max(0.0);
        mass += p;
        moment += d as f64 * p;
    }
    if mass <= 0.0 {
        return (peak as f64, true);
    }
    let out = peak as f64 + moment / mass;
    if periodic {
        (out.rem_euclid(m as f64), false)
    } else {
        (out, false)
    }
}

/// Decodes a state against a codebook and applies the population-vector
/// readout.
pub fn readout(state: &PhasorVector, codebook: &Codebook, window: usize) -> Result<Readout> {
    let profile = codebook.decode(state)?;
    let (index, degenerate) = population_vector(profile.values(), window, codebook.is_periodic());
    Ok(Readout {
        index,
        profile,
        degenerate,
    })
}

/// Encoded input frame in both reference frames.
#[derive(Clone, Debug)]
pub struct EncodedFrame {
    pub cart: PhasorVector,
    pub polar: PhasorVector,
    pub t_mid: f64,
}

impl EncodedFrame {
    pub fn is_empty(&self) -> bool {
        self.cart.entries().iter().all(|z| z.norm_sqr() == 0.0)
    }
}

pub struct Resonator {
    config: ResonatorConfig,
    codebooks: Arc<CodebookSet>,
    transform: Arc<FrameTransform>,
    state: ResonatorState,
}

impl Resonator {
    /// Initializes random unit states and takes the encoding of the first
    /// frame as both the map and the anchor.
    pub fn new<R: Rng + ?Sized>(
        codebooks: Arc<CodebookSet>,
        transform: Arc<FrameTransform>,
        first_frame: &BinaryImage,
        config: ResonatorConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if first_frame.count_ones() == 0 {
            return Err(Error::DegenerateInput("first frame has no active pixels".into()));
        }
        let map = codebooks.cart.pixels.encode_real(&first_frame.to_real())?;
        let state = ResonatorState {
            h: PhasorVector::random(codebooks.cart.h.dim(), rng)?,
            v: PhasorVector::random(codebooks.cart.v.dim(), rng)?,
            r: PhasorVector::random(codebooks.polar.angle.dim(), rng)?,
            anchor: map.clone(),
            map,
            iteration: 0,
        };
        Ok(Self {
            config,
            codebooks,
            transform,
            state,
        })
    }

    pub fn config(&self) -> &ResonatorConfig {
        &self.config
    }

    pub fn state(&self) -> &ResonatorState {
        &self.state
    }

    pub fn codebooks(&self) -> &Arc<CodebookSet> {
        &self.codebooks
    }

    pub fn transform(&self) -> &Arc<FrameTransform> {
        &self.transform
    }

    /// Replaces the map and the anchor, e.g. to seed a known scene.
    pub fn set_map(&mut self, map: PhasorVector) -> Result<()> {
        check_len(self.state.map.len(), map.len())?;
        self.state.anchor = map.clone();
        self.state.map = map;
        Ok(())
    }

    /// Overrides the three factor states, e.g. with a prediction from an
    /// external tracker. Each vector is phasor-normalized.
    pub fn set_factors(&mut self, h: PhasorVector, v: PhasorVector, r: PhasorVector) -> Result<()> {
        check_len(self.state.h.len(), h.len())?;
        check_len(self.state.v.len(), v.len())?;
        check_len(self.state.r.len(), r.len())?;
        self.state.h = h.normalized();
        self.state.v = v.normalized();
        self.state.r = r.normalized();
        Ok(())
    }

    pub fn encode_frame(&self, frame: &BinaryImage, t_mid: f64) -> Result<EncodedFrame> {
        let cart = self.codebooks.cart.pixels.encode_real(&frame.to_real())?;
        let polar = self.transform.to_polar(&cart)?;
        Ok(EncodedFrame { cart, polar, t_mid })
    }

    fn cleanup(&self, codebook: &Codebook, input: &PhasorVector) -> Result<PhasorVector> {
        let profile = codebook.decode(input)?;
        let coeffs = sharpen(&profile, self.config.sharpen_k)?;
        Ok(codebook.encode(&coeffs)?.normalized())
    }

    fn leaky(&self, old: &PhasorVector, new: &PhasorVector) -> PhasorVector {
        let g = self.config.gamma;
        let mixed = &old.scaled(1.0 - g) + &new.scaled(g);
        if self.config.renormalize_states {
            mixed.normalized()
        } else {
            mixed
        }
    }

    /// One resonator iteration on one frame.
    pub fn step(&mut self, frame: &EncodedFrame, imu: Option<ImuRates>, dt: f64) -> Result<Estimate> {
        check_len(self.state.map.len(), frame.cart.len())?;
        check_len(self.state.r.len(), frame.polar.len())?;

        if self.config.fusion_enabled {
            if let Some(rates) = imu {
                self.predict_with_imu(rates, dt)?;
            }
        }

        if !frame.is_empty() {
            let st = &self.state;
            let cart = &self.codebooks.cart;
            let polar = &self.codebooks.polar;

            // input un-rotated by the current roll hypothesis
            let p_hat = self.transform.to_cartesian(&frame.polar.unbind(&st.r)?)?;

            let mut h_in = p_hat.unbind(&st.v)?;
            h_in.unbind_assign(&st.map)?;
            let h_new = self.cleanup(&cart.h, &h_in)?;

            let mut v_in = p_hat.unbind(&st.h)?;
            v_in.unbind_assign(&st.map)?;
            let v_new = self.cleanup(&cart.v, &v_in)?;

            let h = self.leaky(&st.h, &h_new);
            let v = self.leaky(&st.v, &v_new);

            // map translated by the updated shift hypothesis, in polar frame
            let mut moved = st.map.bind(&h)?;
            moved.bind_assign(&v)?;
            let l_hat = self.transform.to_polar(&moved)?;
            let r_new = self.cleanup(&polar.angle, &frame.polar.unbind(&l_hat)?)?;
            let r = self.leaky(&st.r, &r_new);
            self.state.h = h;
            self.state.v = v;
            self.state.r = r;
        }

        let estimate = self.readout(frame.t_mid)?;

        if !frame.is_empty() && self.state.iteration >= self.config.map_block_iterations {
            let m_est = self.transform_to_map_frame(&frame.polar, &estimate)?;
            self.update_map(&m_est)?;
        }
        self.state.iteration += 1;
        Ok(estimate)
    }

    /// Population-vector readout of all three states.
    pub fn readout(&self, t_mid: f64) -> Result<Estimate> {
        let w = self.config.readout_window;
        let cart = &self.codebooks.cart;
        let polar = &self.codebooks.polar;
        let h = readout(&self.state.h, &cart.h, w)?;
        let v = readout(&self.state.v, &cart.v, w)?;
        let r = readout(&self.state.r, &polar.angle, w)?;
        let deg = polar.grid.degrees_per_bin();
        Ok(Estimate {
            h: cart.h.value_at(h.index),
            v: cart.v.value_at(v.index),
            r: (polar.angle.value_at(r.index) * deg).rem_euclid(360.0),
            t_mid,
            degenerate: h.degenerate || v.degenerate || r.degenerate,
            h_profile: h.profile,
            v_profile: v.profile,
            r_profile: r.profile,
        })
    }

    /// Un-rotates the polar input by the scalar roll estimate, converts to
    /// Cartesian and un-translates by the scalar shift estimate.
    pub fn transform_to_map_frame(&self, s_polar: &PhasorVector, est: &Estimate) -> Result<PhasorVector> {
        let cart = &self.codebooks.cart;
        let polar = &self.codebooks.polar;
        let r_bins = est.r / polar.grid.degrees_per_bin();
        let unrotated = s_polar.unbind(&polar.angle_seed().frac_pow(r_bins)?)?;
        let mut m = self.transform.to_cartesian(&unrotated)?;
        m.bind_assign(&cart.h_seed().frac_pow(-est.h)?)?;
        m.bind_assign(&cart.v_seed().frac_pow(-est.v)?)?;
        Ok(m)
    }

    /// m̂ ← μ₁·m̂ + μ₂·m̂(0) + (1 − μ₁ − μ₂)·m_est.
    pub fn update_map(&mut self, m_est: &PhasorVector) -> Result<()> {
        check_len(self.state.map.len(), m_est.len())?;
        let (mu1, mu2) = (self.config.mu1, self.config.mu2);
        let rest = 1.0 - mu1 - mu2;
        let anchor = self.state.anchor.entries();
        for ((m, a), e) in self
            .state
            .map
            .entries_mut()
            .iter_mut()
            .zip(anchor)
            .zip(m_est.entries())
        {
            *m = *m * mu1 + a * mu2 + e * rest;
        }
        Ok(())
    }

    /// Advances every state by its axis seed raised to rate·dt.
    pub fn predict_with_imu(&mut self, rates: ImuRates, dt: f64) -> Result<()> {
        if !rates.is_finite() {
            return Err(invalid("non-finite IMU rates"));
        }
        if !(dt > 0.0) {
            return Err(invalid(format!("prediction needs dt > 0, got {dt}")));
        }
        let cart = &self.codebooks.cart;
        let polar = &self.codebooks.polar;
        if rates.pan_px_s != 0.0 {
            self.state.h.bind_assign(&cart.h_seed().frac_pow(rates.pan_px_s * dt)?)?;
        }
        if rates.tilt_px_s != 0.0 {
            self.state.v.bind_assign(&cart.v_seed().frac_pow(rates.tilt_px_s * dt)?)?;
        }
        if rates.roll_deg_s != 0.0 {
            let bins = rates.roll_deg_s * dt / polar.grid.degrees_per_bin();
            self.state.r.bind_assign(&polar.angle_seed().frac_pow(bins)?)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_vector_examples() {
        let mut p = vec![0.0; 64];
        p[17] = 1.0;
        assert_eq!(population_vector(&p, 5, false), (17.0, false));
        p[18] = 1.0;
        assert_eq!(population_vector(&p, 5, false), (17.5, false));

        let mut q = vec![0.0; 360];
        q[359] = 1.0;
        q[0] = 1.0;
        // tie at the argmax resolves to index 0, the wrap gives 359.5
        let (out, deg) = population_vector(&q, 5, true);
        assert!(!deg);
        assert!((out - 359.5).abs() < 1e-12);
    }

    #[test]
    fn population_vector_clamps_negatives_and_flags_zero() {
        let p = vec![-0.5, 0.2, 1.0, -3.0, 0.0];
        let (out, _) = population_vector(&p, 2, false);
        assert!((out - (0.2 * 1.0 + 2.0) / 1.2).abs() < 1e-12);
        assert_eq!(population_vector(&[0.0; 8], 3, false), (0.0, true));
        let (idx, degenerate) = population_vector(&[-1.0, -0.5, -2.0], 1, false);
        assert!(degenerate);
        assert_eq!(idx, 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(ResonatorConfig::default().validate().is_ok());
        let bad = ResonatorConfig {
            gamma: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ResonatorConfig {
            mu1: 0.9,
            mu2: 0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ResonatorConfig {
            sharpen_k: 25.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn signed_wrap() {
        assert_eq!(wrap_signed_deg(359.0), -1.0);
        assert_eq!(wrap_signed_deg(180.0), 180.0);
        assert_eq!(wrap_signed_deg(-190.0), 170.0);
    }
}

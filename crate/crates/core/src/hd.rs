//! Complex phasor hypervector algebra (FHRR).
//!
//! A [`PhasorVector`] is a length-N vector of complex numbers. Seeds and
//! resonator states carry unit-magnitude entries; encodings of images and
//! the scene map are bundles whose magnitudes carry evidence weight.
//!
//! Binding is the element-wise product, unbinding multiplies by the
//! conjugate, bundling is the element-wise sum, and fractional powers
//! scale every phase by a real exponent.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_len, invalid, Result};

/// Entries with magnitude below this are treated as absent by
/// [`PhasorVector::normalized`].
pub const PHASOR_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PhasorVector(Vec<Complex64>);

impl PhasorVector {
    pub fn from_entries(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    /// Builds a unit phasor vector from explicit phases (radians).
    pub fn from_phases(phases: &[f64]) -> Self {
        Self(phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect())
    }

    /// The binding identity.
    pub fn ones(n: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Random seed with phases drawn uniformly from [0, 2π).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(invalid("seed dimension must be at least 1"));
        }
        Ok(Self(
            (0..n)
                .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * TAU))
                .collect(),
        ))
    }

    /// Random seed whose phases are integer multiples of 2π/period, so that
    /// raising it to `period` wraps back to the identity.
    pub fn periodic<R: Rng + ?Sized>(n: usize, period: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(invalid("seed dimension must be at least 1"));
        }
        if period < 2 {
            return Err(invalid(format!("period must be at least 2, got {period}")));
        }
        Ok(Self(
            (0..n)
                .map(|_| {
                    let k = rng.random_range(0..period);
                    Complex64::from_polar(1.0, TAU * k as f64 / period as f64)
                })
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.0
    }

    /// Phases of all entries in (−π, π].
    pub fn phases(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.arg()).collect()
    }

    /// Fractional power: entry j becomes exp(i·exponent·φ_j).
    pub fn frac_pow(&self, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(invalid(format!("non-finite exponent {exponent}")));
        }
        Ok(Self(
            self.0
                .iter()
                .map(|z| Complex64::from_polar(1.0, exponent * z.arg()))
                .collect(),
        ))
    }

    pub fn bind(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }

    pub fn unbind(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a * b.conj())
                .collect(),
        ))
    }

    pub fn bind_assign(&mut self, other: &Self) -> Result<()> {
        check_len(self.len(), other.len())?;
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a *= b);
        Ok(())
    }

    pub fn unbind_assign(&mut self, other: &Self) -> Result<()> {
        check_len(self.len(), other.len())?;
        self.0
            .iter_mut()
            .zip(&other.0)
            .for_each(|(a, b)| *a *= b.conj());
        Ok(())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Re⟨a, b⟩ / N. Equals 1 for identical unit-magnitude vectors.
    pub fn similarity(&self, other: &Self) -> Result<f64> {
        check_len(self.len(), other.len())?;
        if self.is_empty() {
            return Ok(0.0);
        }
        Ok(self.inner(other).re / self.len() as f64)
    }

    /// Re⟨a, b⟩ / (‖a‖‖b‖); scale-free similarity for bundled vectors.
    /// Zero when either vector is zero.
    pub fn cosine(&self, other: &Self) -> Result<f64> {
        check_len(self.len(), other.len())?;
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok(self.inner(other).re / denom)
    }

    /// Σ a_j · conj(b_j).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Projects every entry onto the unit circle; entries with magnitude
    /// below [`PHASOR_EPS`] become exactly zero.
    pub fn normalized(&self) -> Self {
        Self(self.0.iter().copied().map(normalize_entry).collect())
    }

    pub fn normalize_in_place(&mut self) {
        self.0.iter_mut().for_each(|z| *z = normalize_entry(*z));
    }

    /// True when every entry has magnitude 1 (within `tol`) or is exactly 0.
    pub fn is_phasor(&self, tol: f64) -> bool {
        self.0
            .iter()
            .all(|z| (*z == Complex64::new(0.0, 0.0)) || (z.norm() - 1.0).abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn normalize_entry(z: Complex64) -> Complex64 {
    let m = z.norm();
    if m < PHASOR_EPS {
        Complex64::new(0.0, 0.0)
    } else {
        z / m
    }
}

impl std::ops::Add for &PhasorVector {
    type Output = PhasorVector;

    fn add(self, rhs: Self) -> PhasorVector {
        assert_eq!(self.len(), rhs.len(), "adding vectors of different length");
        PhasorVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// Weighted element-wise sum. The result is not normalized.
pub fn bundle(vs: &[&PhasorVector], weights: Option<&[f64]>) -> Result<PhasorVector> {
    let first = vs.first().ok_or_else(|| invalid("cannot bundle an empty set"))?;
    if let Some(w) = weights {
        check_len(vs.len(), w.len())?;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); first.len()];
    for (i, v) in vs.iter().enumerate() {
        check_len(first.len(), v.len())?;
        let w = weights.map_or(1.0, |w| w[i]);
        out.iter_mut().zip(v.entries()).for_each(|(o, z)| *o += z * w);
    }
    Ok(PhasorVector(out))
}

/// Real similarity profile of a state against the columns of a codebook.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector(pub Vec<f64>);

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Cleanup nonlinearity: clamp negatives to zero, raise to the k-th power
/// and divide by the L2 norm of the powered vector.
pub fn sharpen(c: &CoefficientVector, k: f64) -> Result<CoefficientVector> {
    if !k.is_finite() {
        return Err(invalid(format!("non-finite sharpening exponent {k}")));
    }
    if k < 1.0 {
        return Err(invalid(format!("sharpening exponent must be >= 1, got {k}")));
    }
    // Scale by the max first so large k cannot overflow; the L2 division
    // cancels the factor.
    let max = c.0.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 || !max.is_finite() {
        return Ok(CoefficientVector(vec![0.0; c.len()]));
    }
    let powered: Vec<f64> = c
        .0
        .iter()
        .map(|&x| if x > 0.0 { (x / max).powf(k) } else { 0.0 })
        .collect();
    let norm = powered.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(CoefficientVector(powered.into_iter().map(|x| x / norm).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn random_seed_has_unit_entries() {
        let s = PhasorVector::random(4, &mut rng(1)).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.is_phasor(1e-15));
    }

    #[test]
    fn random_seed_is_deterministic() {
        let a = PhasorVector::random(64, &mut rng(9)).unwrap();
        let b = PhasorVector::random(64, &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(PhasorVector::random(0, &mut rng(1)).is_err());
        assert!(PhasorVector::periodic(0, 8, &mut rng(1)).is_err());
    }

    #[test]
    fn periodic_seed_wraps() {
        let s = PhasorVector::periodic(8, 360, &mut rng(3)).unwrap();
        let full = s.frac_pow(360.0).unwrap();
        assert!(full.max_abs_diff(&PhasorVector::ones(8)) < 1e-9);
        let half = s.frac_pow(180.0).unwrap();
        let twice = half.bind(&half).unwrap();
        assert!(twice.max_abs_diff(&PhasorVector::ones(8)) < 1e-9);
        for p in s.phases() {
            let k = p / (TAU / 360.0);
            assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_seed_rejects_short_period() {
        assert!(PhasorVector::periodic(8, 1, &mut rng(1)).is_err());
    }

    #[test]
    fn frac_pow_zero_is_identity() {
        let s = PhasorVector::random(16, &mut rng(2)).unwrap();
        assert!(s.frac_pow(0.0).unwrap().max_abs_diff(&PhasorVector::ones(16)) < 1e-15);
        assert!(s.frac_pow(f64::NAN).is_err());
        assert!(s.frac_pow(f64::INFINITY).is_err());
    }

    #[test]
    fn frac_pow_scales_phases() {
        let s = PhasorVector::random(16, &mut rng(4)).unwrap();
        let p = s.frac_pow(2.5).unwrap();
        for (z, phi) in p.entries().iter().zip(s.phases()) {
            let expected = Complex64::from_polar(1.0, 2.5 * phi);
            assert!((z - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn bind_identity_and_inverse() {
        let a = PhasorVector::random(32, &mut rng(5)).unwrap();
        let b = PhasorVector::random(32, &mut rng(6)).unwrap();
        assert_eq!(a.bind(&PhasorVector::ones(32)).unwrap(), a);
        let back = a.bind(&b).unwrap().unbind(&b).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = PhasorVector::ones(3);
        let b = PhasorVector::ones(4);
        assert!(a.bind(&b).is_err());
        assert!(a.unbind(&b).is_err());
        assert!(a.similarity(&b).is_err());
        assert!(bundle(&[&a, &b], None).is_err());
    }

    #[test]
    fn bundle_edge_cases() {
        let a = PhasorVector::random(8, &mut rng(7)).unwrap();
        assert_eq!(bundle(&[&a], None).unwrap(), a);
        assert!(bundle(&[], None).is_err());
        assert!(bundle(&[&a], Some(&[1.0, 2.0])).is_err());
        let w = bundle(&[&a, &a], Some(&[0.25, 0.75])).unwrap();
        assert!(w.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn similarity_self_and_antipode() {
        let a = PhasorVector::random(100, &mut rng(8)).unwrap();
        assert!((a.similarity(&a).unwrap() - 1.0).abs() < 1e-12);
        assert!((a.similarity(&a.neg()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        let v = PhasorVector::from_entries(vec![Complex64::new(2.0, 0.0); 3]);
        assert_eq!(v.normalized(), PhasorVector::ones(3));
        let w = PhasorVector::from_entries(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(3.0, 4.0),
            Complex64::new(1e-13, 0.0),
        ]);
        let n = w.normalized();
        assert_eq!(n.entries()[0], Complex64::new(0.0, 0.0));
        assert!((n.entries()[1] - Complex64::new(0.6, 0.8)).norm() < 1e-15);
        assert_eq!(n.entries()[2], Complex64::new(0.0, 0.0));
        assert_eq!(n.normalized(), n);
    }

    #[test]
    fn sharpen_examples() {
        let one_hot = CoefficientVector(vec![1.0, 0.0, 0.0]);
        for k in [1.0, 2.0, 8.0, 20.0] {
            assert_eq!(sharpen(&one_hot, k).unwrap(), one_hot);
        }
        let tie = sharpen(&CoefficientVector(vec![0.3, 0.3, 0.0]), 8.0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((tie.0[0] - h).abs() < 1e-15 && (tie.0[1] - h).abs() < 1e-15);
        assert_eq!(tie.0[2], 0.0);
        let clamped = sharpen(&CoefficientVector(vec![-0.5, 1.0]), 2.0).unwrap();
        assert_eq!(clamped.0, vec![0.0, 1.0]);
        let zero = sharpen(&CoefficientVector(vec![-1.0, 0.0]), 4.0).unwrap();
        assert_eq!(zero.0, vec![0.0, 0.0]);
        assert!(sharpen(&one_hot, f64::NAN).is_err());
        assert!(sharpen(&one_hot, 0.5).is_err());
    }

    #[test]
    fn sharpen_survives_large_powers() {
        let c = CoefficientVector(vec![1e30, 5e29, 1.0]);
        let s = sharpen(&c, 20.0).unwrap();
        assert!((s.l2_norm() - 1.0).abs() < 1e-12);
        assert!(s.0.iter().all(|x| x.is_finite()));
    }
}

//! Linear transform Λ between Cartesian-frame and polar-frame encodings.
//!
//! Λ = Φ_p · S_{c→p} · Φ_c† / N_c: decode to a (complex) Cartesian image,
//! bilinearly resample onto the polar grid about the image center, and
//! re-encode with the polar pixel codebook. The reverse direction swaps
//! the roles. Both directions are linear; no clamping is applied.
//!
//! The transform is applied in factored form by default. Small grids can
//! materialize the two dense matrices with [`FrameTransform::with_dense_matrices`].

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::codebook::{CartesianCodebooks, CartesianGrid, PixelCodebook, PolarCodebooks, PolarGrid};
use crate::error::{check_len, invalid, Result};
use crate::hd::PhasorVector;
use crate::image::{center_index, ComplexImage, Image, RealImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameDirection {
    ToPolar,
    ToCartesian,
}

/// Sparse interpolation weights: output pixel i reads
/// `weights[offsets[i]..offsets[i+1]]` from `sources[..]`.
#[derive(Clone, Debug)]
pub struct Resampler {
    offsets: Vec<usize>,
    sources: Vec<u32>,
    weights: Vec<f64>,
}

impl Resampler {
    fn build(outputs: usize, mut taps: impl FnMut(usize, &mut Vec<(usize, f64)>)) -> Self {
        let mut offsets = Vec::with_capacity(outputs + 1);
        let mut sources = Vec::new();
        let mut weights = Vec::new();
        let mut scratch = Vec::with_capacity(4);
        offsets.push(0);
        for i in 0..outputs {
            scratch.clear();
            taps(i, &mut scratch);
            for &(s, w) in &scratch {
                if w != 0.0 {
                    sources.push(s as u32);
                    weights.push(w);
                }
            }
            offsets.push(sources.len());
        }
        Self {
            offsets,
            sources,
            weights,
        }
    }

    pub fn outputs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn apply<T>(&self, input: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        (0..self.outputs())
            .map(|i| {
                let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
                self.sources[lo..hi]
                    .iter()
                    .zip(&self.weights[lo..hi])
                    .fold(T::default(), |acc, (&s, &w)| acc + input[s as usize] * w)
            })
            .collect()
    }
}

/// Dense column-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn mul_vec(&self, v: &PhasorVector) -> Result<PhasorVector> {
        check_len(self.cols, v.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (j, z) in v.entries().iter().enumerate() {
            if *z == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = &self.data[j * self.rows..(j + 1) * self.rows];
            out.iter_mut().zip(col).for_each(|(o, c)| *o += c * z);
        }
        Ok(PhasorVector::from_entries(out))
    }
}

#[derive(Clone, Debug)]
struct DenseTransform {
    to_polar: ComplexMatrix,
    to_cart: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct FrameTransform {
    cart_grid: CartesianGrid,
    polar_grid: PolarGrid,
    cart: Arc<PixelCodebook>,
    polar: Arc<PixelCodebook>,
    to_polar: Resampler,
    to_cart: Resampler,
    dense: Option<DenseTransform>,
}

/// Builds Λ and its reverse from the two pixel codebooks.
pub fn build_frame_transform(cart: &CartesianCodebooks, polar: &PolarCodebooks) -> Result<FrameTransform> {
    let cg = cart.grid;
    let pg = polar.grid;
    let half_diag = 0.5 * ((cg.width * cg.width + cg.height * cg.height) as f64).sqrt();
    if pg.max_radius > half_diag {
        return Err(invalid(format!(
            "polar max radius {} exceeds half the image diagonal {half_diag:.3}",
            pg.max_radius
        )));
    }
    if cart.pixels.width() != cg.width || cart.pixels.height() != cg.height {
        return Err(invalid("Cartesian pixel codebook does not match its grid"));
    }
    if polar.pixels.width() != pg.angle_bins || polar.pixels.height() != pg.radius_bins {
        return Err(invalid("polar pixel codebook does not match its grid"));
    }
    Ok(FrameTransform {
        cart_grid: cg,
        polar_grid: pg,
        cart: cart.pixels.clone(),
        polar: polar.pixels.clone(),
        to_polar: cart_to_polar_weights(cg, pg),
        to_cart: polar_to_cart_weights(cg, pg),
        dense: None,
    })
}

fn bilinear_taps(x: f64, y: f64, width: usize, height: usize, wrap_x: bool, out: &mut Vec<(usize, f64)>) {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
        for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
            let mut xi = x0 + dx;
            let yi = y0 + dy;
            if wrap_x {
                xi = xi.rem_euclid(width as i64);
            }
            if xi >= 0 && yi >= 0 && (xi as usize) < width && (yi as usize) < height {
                out.push((yi as usize * width + xi as usize, wx * wy));
            }
        }
    }
}

fn cart_to_polar_weights(cg: CartesianGrid, pg: PolarGrid) -> Resampler {
    let (cx, cy) = center_index(cg.width, cg.height);
    Resampler::build(pg.pixels(), |i, taps| {
        let (a, b) = (i % pg.angle_bins, i / pg.angle_bins);
        let theta = TAU * a as f64 / pg.angle_bins as f64;
        let rho = pg.radius_of(b as f64);
        let (s, c) = theta.sin_cos();
        bilinear_taps(cx + rho * c, cy + rho * s, cg.width, cg.height, false, taps);
    })
}

fn polar_to_cart_weights(cg: CartesianGrid, pg: PolarGrid) -> Resampler {
    let (cx, cy) = center_index(cg.width, cg.height);
    Resampler::build(cg.pixels(), |i, taps| {
        let (x, y) = ((i % cg.width) as f64 - cx, (i / cg.width) as f64 - cy);
        let rho = x.hypot(y);
        if rho > pg.max_radius {
            return;
        }
        let theta = y.atan2(x).rem_euclid(TAU);
        let a = theta * pg.angle_bins as f64 / TAU;
        let b = pg
            .bin_of_radius(rho)
            .clamp(0.0, (pg.radius_bins - 1) as f64);
        bilinear_taps(a, b, pg.angle_bins, pg.radius_bins, true, taps);
    })
}

impl FrameTransform {
    pub fn cartesian_grid(&self) -> CartesianGrid {
        self.cart_grid
    }

    pub fn polar_grid(&self) -> PolarGrid {
        self.polar_grid
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    /// Resamples a Cartesian image onto the polar grid (image space only).
    pub fn polar_image<T>(&self, img: &Image<T>) -> Result<Image<T>>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        if img.width() != self.cart_grid.width || img.height() != self.cart_grid.height {
            return Err(invalid("image does not match the Cartesian grid"));
        }
        Image::from_vec(
            self.polar_grid.angle_bins,
            self.polar_grid.radius_bins,
            self.to_polar.apply(img.data()),
        )
    }

    /// Resamples a polar-grid image back onto the Cartesian grid.
    pub fn cartesian_image<T>(&self, img: &Image<T>) -> Result<Image<T>>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        if img.width() != self.polar_grid.angle_bins || img.height() != self.polar_grid.radius_bins {
            return Err(invalid("image does not match the polar grid"));
        }
        Image::from_vec(
            self.cart_grid.width,
            self.cart_grid.height,
            self.to_cart.apply(img.data()),
        )
    }

    pub fn convert(&self, v: &PhasorVector, direction: FrameDirection) -> Result<PhasorVector> {
        if let Some(d) = &self.dense {
            return match direction {
                FrameDirection::ToPolar => d.to_polar.mul_vec(v),
                FrameDirection::ToCartesian => d.to_cart.mul_vec(v),
            };
        }
        self.convert_factored(v, direction)
    }

    pub fn to_polar(&self, v: &PhasorVector) -> Result<PhasorVector> {
        self.convert(v, FrameDirection::ToPolar)
    }

    pub fn to_cartesian(&self, v: &PhasorVector) -> Result<PhasorVector> {
        self.convert(v, FrameDirection::ToCartesian)
    }

    fn convert_factored(&self, v: &PhasorVector, direction: FrameDirection) -> Result<PhasorVector> {
        match direction {
            FrameDirection::ToPolar => {
                let img: ComplexImage = self.cart.decode(v)?;
                self.polar.encode(&self.polar_image(&img)?)
            }
            FrameDirection::ToCartesian => {
                let img: ComplexImage = self.polar.decode(v)?;
                self.cart.encode(&self.cartesian_image(&img)?)
            }
        }
    }

    /// Materializes both directions as dense matrices (N_p × N_c and
    /// N_c × N_p). Memory grows as N_p·N_c, so this is meant for small grids
    /// and for writing matrix caches.
    pub fn with_dense_matrices(mut self) -> Result<Self> {
        self.dense = None;
        let nc = self.cart.dim();
        let np = self.polar.dim();
        let to_polar = self.materialize(nc, np, FrameDirection::ToPolar)?;
        let to_cart = self.materialize(np, nc, FrameDirection::ToCartesian)?;
        self.dense = Some(DenseTransform { to_polar, to_cart });
        Ok(self)
    }

    fn materialize(&self, cols: usize, rows: usize, direction: FrameDirection) -> Result<ComplexMatrix> {
        let columns: Result<Vec<Vec<Complex64>>> = (0..cols)
            .into_par_iter()
            .map(|j| {
                let mut e = PhasorVector::zeros(cols);
                e.entries_mut()[j] = Complex64::new(1.0, 0.0);
                Ok(self.convert_factored(&e, direction)?.into_entries())
            })
            .collect();
        Ok(ComplexMatrix {
            rows,
            cols,
            data: columns?.into_iter().flatten().collect(),
        })
    }

    pub fn dense_matrices(&self) -> Option<(&ComplexMatrix, &ComplexMatrix)> {
        self.dense.as_ref().map(|d| (&d.to_polar, &d.to_cart))
    }

    /// Installs previously materialized matrices (e.g. read from a cache).
    pub fn set_dense_matrices(&mut self, to_polar: ComplexMatrix, to_cart: ComplexMatrix) -> Result<()> {
        let (nc, np) = (self.cart.dim(), self.polar.dim());
        if to_polar.rows != np || to_polar.cols != nc || to_cart.rows != nc || to_cart.cols != np {
            return Err(invalid("dense frame-transform matrices have the wrong shape"));
        }
        self.dense = Some(DenseTransform { to_polar, to_cart });
        Ok(())
    }
}

/// Real part of a decoded Cartesian encoding, as an image.
pub fn decode_cartesian(cart: &CartesianCodebooks, v: &PhasorVector) -> Result<RealImage> {
    cart.pixels.decode_real(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{build_cartesian_codebooks, build_polar_codebooks, CodebookKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> (CartesianCodebooks, PolarCodebooks) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cg = CartesianGrid::new(8, 6).unwrap();
        let pg = PolarGrid::new(16, 4, 3.0).unwrap();
        (
            build_cartesian_codebooks(cg, 48, CodebookKind::Dft, &mut rng).unwrap(),
            build_polar_codebooks(pg, 64, CodebookKind::Dft, &mut rng).unwrap(),
        )
    }

    #[test]
    fn rejects_radius_beyond_half_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cg = CartesianGrid::new(8, 6).unwrap();
        let pg = PolarGrid::new(16, 4, 5.01).unwrap();
        let c = build_cartesian_codebooks(cg, 48, CodebookKind::Dft, &mut rng).unwrap();
        let p = build_polar_codebooks(pg, 64, CodebookKind::Dft, &mut rng).unwrap();
        assert!(build_frame_transform(&c, &p).is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let (c, p) = small();
        let t = build_frame_transform(&c, &p).unwrap();
        let z = t.to_polar(&PhasorVector::zeros(48)).unwrap();
        assert_eq!(z, PhasorVector::zeros(64));
        let z = t.to_cartesian(&PhasorVector::zeros(64)).unwrap();
        assert_eq!(z, PhasorVector::zeros(48));
    }

    #[test]
    fn dense_and_factored_agree() {
        let (c, p) = small();
        let t = build_frame_transform(&c, &p).unwrap();
        let dense = t.clone().with_dense_matrices().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = PhasorVector::random(48, &mut rng).unwrap();
        let a = t.to_polar(&v).unwrap();
        let b = dense.to_polar(&v).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
        let w = PhasorVector::random(64, &mut rng).unwrap();
        assert!(t.to_cartesian(&w).unwrap().max_abs_diff(&dense.to_cartesian(&w).unwrap()) < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (c, p) = small();
        let t = build_frame_transform(&c, &p).unwrap();
        assert!(t.to_polar(&PhasorVector::zeros(64)).is_err());
        assert!(t.to_cartesian(&PhasorVector::zeros(48)).is_err());
    }
}

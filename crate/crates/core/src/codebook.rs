//! Fractional-power codebooks for the image axes and the transform axes.
//!
//! An axis [`Codebook`] holds one column per index, column j being the
//! seed raised to `exponents[j]`. A [`PixelCodebook`] is the separable
//! product of two axis codebooks: the column for pixel (x, y) is
//! `first^x ⊙ second^y`. Cartesian frames use (h₀, v₀); the polar frame
//! uses (angle seed, radius seed).
//!
//! When every seed phase is a multiple of 2π/P and the exponents are
//! integers (always true for DFT codebooks and for angle axes), decode and
//! encode run through an FFT of size P instead of the dense matrix.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_len, invalid, Result};
use crate::fft::{Plan1, Plan2};
use crate::hd::{CoefficientVector, PhasorVector};
use crate::image::{ComplexImage, Image, RealImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodebookKind {
    /// Regularly spaced seed phases; the pixel codebook is the DFT matrix.
    Dft,
    /// Uniformly random seed phases.
    Random,
}

impl CodebookKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodebookKind::Dft => "dft",
            CodebookKind::Random => "random",
        }
    }
}

impl std::str::FromStr for CodebookKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dft" => Ok(CodebookKind::Dft),
            "random" => Ok(CodebookKind::Random),
            other => Err(invalid(format!("unknown codebook kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CartesianGrid {
    pub width: usize,
    pub height: usize,
}

impl CartesianGrid {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(invalid(format!("grid {width}x{height} must be at least 2x2")));
        }
        Ok(Self { width, height })
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RadiusSpacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarGrid {
    pub angle_bins: usize,
    pub radius_bins: usize,
    /// Pixels, measured from the image center.
    pub max_radius: f64,
    pub spacing: RadiusSpacing,
}

/// Innermost radius of the log-spaced grid, in pixels.
const LOG_MIN_RADIUS: f64 = 0.5;

impl PolarGrid {
    pub fn new(angle_bins: usize, radius_bins: usize, max_radius: f64) -> Result<Self> {
        if angle_bins < 2 || radius_bins < 2 {
            return Err(invalid(format!(
                "polar grid {angle_bins}x{radius_bins} must be at least 2x2"
            )));
        }
        if !(max_radius > 0.0) || !max_radius.is_finite() {
            return Err(invalid(format!("max radius {max_radius} must be positive")));
        }
        Ok(Self {
            angle_bins,
            radius_bins,
            max_radius,
            spacing: RadiusSpacing::Linear,
        })
    }

    /// 360 × 32 bins out to the corners of the Cartesian grid.
    pub fn default_for(cart: CartesianGrid) -> Self {
        Self {
            angle_bins: 360,
            radius_bins: 32,
            max_radius: 0.5 * (cart.width as f64).hypot(cart.height as f64),
            spacing: RadiusSpacing::Linear,
        }
    }

    pub fn with_spacing(mut self, spacing: RadiusSpacing) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn pixels(&self) -> usize {
        self.angle_bins * self.radius_bins
    }

    pub fn degrees_per_bin(&self) -> f64 {
        360.0 / self.angle_bins as f64
    }

    /// Radius (pixels) at the center of radius bin `b`.
    pub fn radius_of(&self, b: f64) -> f64 {
        let u = (b + 0.5) / self.radius_bins as f64;
        match self.spacing {
            RadiusSpacing::Linear => u * self.max_radius,
            RadiusSpacing::Log => {
                LOG_MIN_RADIUS * (self.max_radius / LOG_MIN_RADIUS).powf(u)
            }
        }
    }

    /// Continuous radius-bin coordinate for a radius in pixels.
    pub fn bin_of_radius(&self, radius: f64) -> f64 {
        let u = match self.spacing {
            RadiusSpacing::Linear => radius / self.max_radius,
            RadiusSpacing::Log => {
                (radius.max(1e-9) / LOG_MIN_RADIUS).ln() / (self.max_radius / LOG_MIN_RADIUS).ln()
            }
        };
        u * self.radius_bins as f64 - 0.5
    }
}

/// Entry k of a lattice seed has phase 2π·bins[k]/period.
#[derive(Clone, Debug)]
struct Lattice {
    period: usize,
    bins: Vec<usize>,
    /// exponent of column j reduced mod period
    columns: Vec<usize>,
    plan: Plan1,
}

impl Lattice {
    fn detect(seed: &PhasorVector, exponents: &[f64], period: usize) -> Option<Self> {
        let mut bins = Vec::with_capacity(seed.len());
        for z in seed.entries() {
            let q = z.arg() * period as f64 / TAU;
            if (q - q.round()).abs() > 1e-6 || (z.norm() - 1.0).abs() > 1e-9 {
                return None;
            }
            bins.push((q.round() as i64).rem_euclid(period as i64) as usize);
        }
        let mut columns = Vec::with_capacity(exponents.len());
        for &e in exponents {
            if (e - e.round()).abs() > 1e-12 {
                return None;
            }
            columns.push((e.round() as i64).rem_euclid(period as i64) as usize);
        }
        Some(Self {
            period,
            bins,
            columns,
            plan: Plan1::new(period),
        })
    }
}

/// FPE codebook for one axis. Immutable after construction.
pub struct Codebook {
    axis: String,
    seed: PhasorVector,
    exponents: Vec<f64>,
    kind: CodebookKind,
    /// Readout wraps with this many indices.
    wrap: Option<usize>,
    lattice: Option<Lattice>,
    matrix: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Codebook")
            .field("axis", &self.axis)
            .field("dim", &self.dim())
            .field("size", &self.size())
            .field("kind", &self.kind)
            .field("wrap", &self.wrap)
            .field("lattice", &self.lattice.as_ref().map(|l| l.period))
            .finish()
    }
}

impl Codebook {
    /// `lattice_period`, when given, enables the FFT path if the seed
    /// phases actually sit on that lattice. `wrap` marks the index axis as
    /// periodic for readout.
    pub fn new(
        axis: impl Into<String>,
        seed: PhasorVector,
        exponents: Vec<f64>,
        kind: CodebookKind,
        lattice_period: Option<usize>,
        wrap: Option<usize>,
    ) -> Result<Self> {
        if seed.is_empty() {
            return Err(invalid("codebook seed is empty"));
        }
        if exponents.is_empty() {
            return Err(invalid("codebook has no columns"));
        }
        if exponents.iter().any(|e| !e.is_finite()) {
            return Err(invalid("codebook exponents must be finite"));
        }
        if let Some(w) = wrap {
            if w != exponents.len() {
                return Err(invalid(format!(
                    "wrap period {w} must equal the number of columns {}",
                    exponents.len()
                )));
            }
        }
        let lattice = lattice_period.and_then(|p| Lattice::detect(&seed, &exponents, p));
        Ok(Self {
            axis: axis.into(),
            seed,
            exponents,
            kind,
            wrap,
            lattice,
            matrix: OnceLock::new(),
        })
    }

    pub fn axis(&self) -> &str {
        &self.axis
    }

    pub fn seed(&self) -> &PhasorVector {
        &self.seed
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    /// Vector dimension N.
    pub fn dim(&self) -> usize {
        self.seed.len()
    }

    /// Number of columns M.
    pub fn size(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.wrap.is_some()
    }

    pub fn has_fast_path(&self) -> bool {
        self.lattice.is_some()
    }

    pub fn column(&self, j: usize) -> PhasorVector {
        self.seed
            .frac_pow(self.exponents[j])
            .expect("exponents validated finite")
    }

    /// Column-major N×M matrix, materialized on first use.
    pub fn matrix(&self) -> &[Complex64] {
        self.matrix.get_or_init(|| {
            let mut m = Vec::with_capacity(self.dim() * self.size());
            for j in 0..self.size() {
                m.extend_from_slice(self.column(j).entries());
            }
            m
        })
    }

    /// Value of the axis at a (possibly fractional) column index; periodic
    /// axes wrap into [exponents[0], exponents[0] + M·step).
    pub fn value_at(&self, index: f64) -> f64 {
        let e0 = self.exponents[0];
        let step = if self.size() > 1 {
            self.exponents[1] - self.exponents[0]
        } else {
            1.0
        };
        match self.wrap {
            Some(m) => e0 + index.rem_euclid(m as f64) * step,
            None => e0 + index * step,
        }
    }

    /// Continuous column index of an axis value (inverse of `value_at`).
    pub fn index_of(&self, value: f64) -> f64 {
        let e0 = self.exponents[0];
        let step = if self.size() > 1 {
            self.exponents[1] - self.exponents[0]
        } else {
            1.0
        };
        let idx = (value - e0) / step;
        match self.wrap {
            Some(m) => idx.rem_euclid(m as f64),
            None => idx,
        }
    }

    /// Similarity profile Re(C† v)/N.
    pub fn decode(&self, v: &PhasorVector) -> Result<CoefficientVector> {
        check_len(self.dim(), v.len())?;
        match &self.lattice {
            Some(lat) => Ok(self.decode_lattice(lat, v)),
            None => self.decode_dense(v),
        }
    }

    /// Reference decode through the dense matrix.
    pub fn decode_dense(&self, v: &PhasorVector) -> Result<CoefficientVector> {
        check_len(self.dim(), v.len())?;
        let n = self.dim();
        let m = self.matrix();
        let x = v.entries();
        let profile = (0..self.size())
            .into_par_iter()
            .map(|j| {
                let col = &m[j * n..(j + 1) * n];
                let acc: Complex64 = col.iter().zip(x).map(|(c, z)| c.conj() * z).sum();
                acc.re / n as f64
            })
            .collect();
        Ok(CoefficientVector(profile))
    }

    fn decode_lattice(&self, lat: &Lattice, v: &PhasorVector) -> CoefficientVector {
        let mut buf = vec![Complex64::new(0.0, 0.0); lat.period];
        for (&q, z) in lat.bins.iter().zip(v.entries()) {
            buf[q] += z;
        }
        lat.plan.forward(&mut buf);
        let n = self.dim() as f64;
        CoefficientVector(lat.columns.iter().map(|&m| buf[m].re / n).collect())
    }

    /// Re-encoding C·c (a weighted bundle of the columns).
    pub fn encode(&self, c: &CoefficientVector) -> Result<PhasorVector> {
        check_len(self.size(), c.len())?;
        match &self.lattice {
            Some(lat) => Ok(self.encode_lattice(lat, c)),
            None => self.encode_dense(c),
        }
    }

    pub fn encode_dense(&self, c: &CoefficientVector) -> Result<PhasorVector> {
        check_len(self.size(), c.len())?;
        let n = self.dim();
        let m = self.matrix();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, &w) in c.values().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let col = &m[j * n..(j + 1) * n];
            out.iter_mut().zip(col).for_each(|(o, z)| *o += z * w);
        }
        Ok(PhasorVector::from_entries(out))
    }

    fn encode_lattice(&self, lat: &Lattice, c: &CoefficientVector) -> PhasorVector {
        let mut buf = vec![Complex64::new(0.0, 0.0); lat.period];
        for (&m, &w) in lat.columns.iter().zip(c.values()) {
            buf[m] += w;
        }
        lat.plan.inverse(&mut buf);
        PhasorVector::from_entries(lat.bins.iter().map(|&q| buf[q]).collect())
    }
}

/// Separable two-axis pixel codebook Φ.
#[derive(Debug)]
pub struct PixelCodebook {
    first: Arc<Codebook>,
    second: Arc<Codebook>,
    plan: Option<Plan2>,
}

impl PixelCodebook {
    pub fn new(first: Arc<Codebook>, second: Arc<Codebook>) -> Result<Self> {
        check_len(first.dim(), second.dim())?;
        let plan = match (&first.lattice, &second.lattice) {
            (Some(a), Some(b)) => Some(Plan2::new(a.period, b.period)),
            _ => None,
        };
        Ok(Self {
            first,
            second,
            plan,
        })
    }

    pub fn dim(&self) -> usize {
        self.first.dim()
    }

    pub fn width(&self) -> usize {
        self.first.size()
    }

    pub fn height(&self) -> usize {
        self.second.size()
    }

    pub fn first(&self) -> &Arc<Codebook> {
        &self.first
    }

    pub fn second(&self) -> &Arc<Codebook> {
        &self.second
    }

    pub fn has_fast_path(&self) -> bool {
        self.plan.is_some()
    }

    /// Column for pixel (x, y).
    pub fn column(&self, x: usize, y: usize) -> PhasorVector {
        self.first
            .column(x)
            .bind(&self.second.column(y))
            .expect("axes share a dimension")
    }

    fn check_image<T: Copy + Default>(&self, img: &Image<T>) -> Result<()> {
        if img.width() != self.width() || img.height() != self.height() {
            return Err(invalid(format!(
                "image {}x{} does not match codebook grid {}x{}",
                img.width(),
                img.height(),
                self.width(),
                self.height()
            )));
        }
        Ok(())
    }

    /// s = Φ I for a real (e.g. binary) image.
    pub fn encode_real(&self, img: &RealImage) -> Result<PhasorVector> {
        self.encode(&img.map(|v| Complex64::new(v, 0.0)))
    }

    /// s = Φ I for a complex image.
    pub fn encode(&self, img: &ComplexImage) -> Result<PhasorVector> {
        self.check_image(img)?;
        if let (Some(plan), Some(a), Some(b)) = (&self.plan, &self.first.lattice, &self.second.lattice) {
            let mut buf = vec![Complex64::new(0.0, 0.0); a.period * b.period];
            for y in 0..img.height() {
                let row = b.columns[y] * a.period;
                for x in 0..img.width() {
                    buf[row + a.columns[x]] += img.get(x, y);
                }
            }
            plan.inverse(&mut buf);
            return Ok(PhasorVector::from_entries(
                a.bins
                    .iter()
                    .zip(&b.bins)
                    .map(|(&qa, &qb)| buf[qb * a.period + qa])
                    .collect(),
            ));
        }
        self.encode_dense(img)
    }

    /// Reference encode through the separable dense columns.
    pub fn encode_dense(&self, img: &ComplexImage) -> Result<PhasorVector> {
        self.check_image(img)?;
        let n = self.dim();
        let (w, h) = (self.width(), self.height());
        let m1 = self.first.matrix();
        let m2 = self.second.matrix();
        let pix = img.data();
        let zero = Complex64::new(0.0, 0.0);
        let out = (0..h)
            .into_par_iter()
            .fold(
                || vec![zero; n],
                |mut acc, y| {
                    let mut row = vec![zero; n];
                    let mut any = false;
                    for x in 0..w {
                        let p = pix[y * w + x];
                        if p != zero {
                            any = true;
                            row.iter_mut().zip(&m1[x * n..(x + 1) * n]).for_each(|(r, c)| *r += p * c);
                        }
                    }
                    if any {
                        acc.iter_mut()
                            .zip(&row)
                            .zip(&m2[y * n..(y + 1) * n])
                            .for_each(|((a, r), c)| *a += r * c);
                    }
                    acc
                },
            )
            .reduce(
                || vec![zero; n],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Ok(PhasorVector::from_entries(out))
    }

    /// Φ† v / N as a complex image (the linear decode used by frame
    /// transforms).
    pub fn decode(&self, v: &PhasorVector) -> Result<ComplexImage> {
        check_len(self.dim(), v.len())?;
        let n = self.dim() as f64;
        if let (Some(plan), Some(a), Some(b)) = (&self.plan, &self.first.lattice, &self.second.lattice) {
            let mut buf = vec![Complex64::new(0.0, 0.0); a.period * b.period];
            for ((&qa, &qb), z) in a.bins.iter().zip(&b.bins).zip(v.entries()) {
                buf[qb * a.period + qa] += z;
            }
            plan.forward(&mut buf);
            return Ok(Image::from_fn(self.width(), self.height(), |x, y| {
                buf[b.columns[y] * a.period + a.columns[x]] / n
            }));
        }
        self.decode_dense(v)
    }

    pub fn decode_dense(&self, v: &PhasorVector) -> Result<ComplexImage> {
        check_len(self.dim(), v.len())?;
        let n = self.dim();
        let (w, h) = (self.width(), self.height());
        let m1 = self.first.matrix();
        let m2 = self.second.matrix();
        let rows: Vec<Vec<Complex64>> = (0..h)
            .into_par_iter()
            .map(|y| {
                let u: Vec<Complex64> = m2[y * n..(y + 1) * n]
                    .iter()
                    .zip(v.entries())
                    .map(|(c, z)| c.conj() * z)
                    .collect();
                (0..w)
                    .map(|x| {
                        let acc: Complex64 = m1[x * n..(x + 1) * n].iter().zip(&u).map(|(c, z)| c.conj() * z).sum();
                        acc / n as f64
                    })
                    .collect()
            })
            .collect();
        ComplexImage::from_vec(w, h, rows.concat())
    }

    /// Re(Φ† v)/N.
    pub fn decode_real(&self, v: &PhasorVector) -> Result<RealImage> {
        Ok(self.decode(v)?.map(|z| z.re))
    }
}

/// Encoding matrices for the Cartesian frame.
#[derive(Clone, Debug)]
pub struct CartesianCodebooks {
    pub grid: CartesianGrid,
    /// Horizontal shift readout, exponents −W/2 .. W/2−1.
    pub h: Arc<Codebook>,
    /// Vertical shift readout, exponents −H/2 .. H/2−1.
    pub v: Arc<Codebook>,
    pub pixels: Arc<PixelCodebook>,
}

impl CartesianCodebooks {
    pub fn h_seed(&self) -> &PhasorVector {
        self.h.seed()
    }

    pub fn v_seed(&self) -> &PhasorVector {
        self.v.seed()
    }

    pub fn dim(&self) -> usize {
        self.pixels.dim()
    }
}

/// Encoding matrices for the polar frame.
#[derive(Clone, Debug)]
pub struct PolarCodebooks {
    pub grid: PolarGrid,
    /// Rotation codebook (exponents in angle bins 0 .. angleBins−1, periodic).
    pub angle: Arc<Codebook>,
    pub radius: Arc<Codebook>,
    pub pixels: Arc<PixelCodebook>,
}

impl PolarCodebooks {
    pub fn angle_seed(&self) -> &PhasorVector {
        self.angle.seed()
    }

    pub fn dim(&self) -> usize {
        self.pixels.dim()
    }
}

fn centered(count: usize) -> Vec<f64> {
    let half = (count / 2) as f64;
    (0..count).map(|i| i as f64 - half).collect()
}

fn from_zero(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64).collect()
}

/// DFT seeds for a 2-D lattice of `w`×`h` entries, entry k = ky·w + kx.
fn dft_seeds(w: usize, h: usize) -> (PhasorVector, PhasorVector) {
    let mut first = Vec::with_capacity(w * h);
    let mut second = Vec::with_capacity(w * h);
    for ky in 0..h {
        for kx in 0..w {
            first.push(Complex64::from_polar(1.0, TAU * kx as f64 / w as f64));
            second.push(Complex64::from_polar(1.0, TAU * ky as f64 / h as f64));
        }
    }
    (
        PhasorVector::from_entries(first),
        PhasorVector::from_entries(second),
    )
}

/// Builds H, V and the pixel codebook Φ for a Cartesian grid.
///
/// `dft` requires `n == width·height` and makes Φ the 2-D DFT matrix; shift
/// axes then wrap around. `random` draws h₀ and v₀ uniformly.
pub fn build_cartesian_codebooks<R: Rng + ?Sized>(
    grid: CartesianGrid,
    n: usize,
    kind: CodebookKind,
    rng: &mut R,
) -> Result<CartesianCodebooks> {
    let (w, h) = (grid.width, grid.height);
    let (h0, v0, lat_w, lat_h, wrap_w, wrap_h) = match kind {
        CodebookKind::Dft => {
            if n != grid.pixels() {
                return Err(invalid(format!(
                    "dft codebooks need n = width*height = {}, got {n}",
                    grid.pixels()
                )));
            }
            let (a, b) = dft_seeds(w, h);
            (a, b, Some(w), Some(h), Some(w), Some(h))
        }
        CodebookKind::Random => {
            let a = PhasorVector::random(n, rng)?;
            let b = PhasorVector::random(n, rng)?;
            (a, b, None, None, None, None)
        }
    };
    let h_cb = Codebook::new("h", h0.clone(), centered(w), kind, lat_w, wrap_w)?;
    let v_cb = Codebook::new("v", v0.clone(), centered(h), kind, lat_h, wrap_h)?;
    let px = Arc::new(Codebook::new("x", h0, from_zero(w), kind, lat_w, None)?);
    let py = Arc::new(Codebook::new("y", v0, from_zero(h), kind, lat_h, None)?);
    Ok(CartesianCodebooks {
        grid,
        h: Arc::new(h_cb),
        v: Arc::new(v_cb),
        pixels: Arc::new(PixelCodebook::new(px, py)?),
    })
}

/// Builds the angle and radius codebooks for the polar frame.
///
/// The angle seed is periodic with period `angle_bins`, so binding with
/// `angle_seed^angle_bins` is the identity. For `dft`, `n` must equal
/// `angle_bins·radius_bins`.
pub fn build_polar_codebooks<R: Rng + ?Sized>(
    grid: PolarGrid,
    n: usize,
    kind: CodebookKind,
    rng: &mut R,
) -> Result<PolarCodebooks> {
    let (na, nr) = (grid.angle_bins, grid.radius_bins);
    let (a0, b0, lat_r) = match kind {
        CodebookKind::Dft => {
            if n != grid.pixels() {
                return Err(invalid(format!(
                    "dft polar codebooks need n = angleBins*radiusBins = {}, got {n}",
                    grid.pixels()
                )));
            }
            let (a, b) = dft_seeds(na, nr);
            (a, b, Some(nr))
        }
        CodebookKind::Random => {
            let a = PhasorVector::periodic(n, na, rng)?;
            let b = PhasorVector::random(n, rng)?;
            (a, b, None)
        }
    };
    let angle = Arc::new(Codebook::new("r", a0, from_zero(na), kind, Some(na), Some(na))?);
    let radius = Arc::new(Codebook::new("rho", b0, from_zero(nr), kind, lat_r, None)?);
    Ok(PolarCodebooks {
        grid,
        pixels: Arc::new(PixelCodebook::new(angle.clone(), radius.clone())?),
        angle,
        radius,
    })
}

/// Every encoding matrix the resonator needs, for one pair of grids.
#[derive(Clone, Debug)]
pub struct CodebookSet {
    pub kind: CodebookKind,
    pub cart: CartesianCodebooks,
    pub polar: PolarCodebooks,
}

impl CodebookSet {
    /// `n_polar` is ignored for `dft`, where the polar dimension is fixed
    /// to `angle_bins·radius_bins`; likewise `n_cart` must be `width·height`.
    pub fn build<R: Rng + ?Sized>(
        cart_grid: CartesianGrid,
        polar_grid: PolarGrid,
        kind: CodebookKind,
        n_cart: usize,
        n_polar: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let n_polar = match kind {
            CodebookKind::Dft => polar_grid.pixels(),
            CodebookKind::Random => n_polar,
        };
        let cart = build_cartesian_codebooks(cart_grid, n_cart, kind, rng)?;
        let polar = build_polar_codebooks(polar_grid, n_polar, kind, rng)?;
        Ok(Self { kind, cart, polar })
    }

    /// DFT codebooks with the default polar grid for `cart_grid`.
    pub fn dft(cart_grid: CartesianGrid) -> Result<Self> {
        // dft construction draws nothing from the rng
        let mut unused = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        Self::build(
            cart_grid,
            PolarGrid::default_for(cart_grid),
            CodebookKind::Dft,
            cart_grid.pixels(),
            0,
            &mut unused,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn dft_requires_matching_dimension() {
        let g = CartesianGrid::new(4, 4).unwrap();
        assert!(build_cartesian_codebooks(g, 15, CodebookKind::Dft, &mut rng()).is_err());
        let p = PolarGrid::new(8, 4, 2.0).unwrap();
        assert!(build_polar_codebooks(p, 31, CodebookKind::Dft, &mut rng()).is_err());
    }

    #[test]
    fn grids_reject_tiny_dimensions() {
        assert!(CartesianGrid::new(1, 4).is_err());
        assert!(PolarGrid::new(1, 4, 2.0).is_err());
        assert!(PolarGrid::new(8, 4, 0.0).is_err());
    }

    #[test]
    fn dft_pixel_origin_is_all_ones() {
        let g = CartesianGrid::new(4, 4).unwrap();
        let cb = build_cartesian_codebooks(g, 16, CodebookKind::Dft, &mut rng()).unwrap();
        assert!(cb.pixels.column(0, 0).max_abs_diff(&PhasorVector::ones(16)) < 1e-15);
        assert!(cb.pixels.has_fast_path());
    }

    #[test]
    fn lattice_and_dense_paths_agree() {
        let g = CartesianGrid::new(8, 6).unwrap();
        let cb = build_cartesian_codebooks(g, 48, CodebookKind::Dft, &mut rng()).unwrap();
        assert!(cb.h.has_fast_path());
        let v = PhasorVector::random(48, &mut rng()).unwrap();
        let fast = cb.h.decode(&v).unwrap();
        let slow = cb.h.decode_dense(&v).unwrap();
        for (a, b) in fast.values().iter().zip(slow.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = CoefficientVector((0..8).map(|i| (i as f64 * 0.37).sin()).collect());
        let e1 = cb.h.encode(&c).unwrap();
        let e2 = cb.h.encode_dense(&c).unwrap();
        assert!(e1.max_abs_diff(&e2) < 1e-12);

        let img = RealImage::from_fn(8, 6, |x, y| ((x * 3 + y * 5) % 7) as f64);
        let s1 = cb.pixels.encode_real(&img).unwrap();
        let s2 = cb
            .pixels
            .encode_dense(&img.map(|v| Complex64::new(v, 0.0)))
            .unwrap();
        assert!(s1.max_abs_diff(&s2) < 1e-9);
        let d1 = cb.pixels.decode(&v).unwrap();
        let d2 = cb.pixels.decode_dense(&v).unwrap();
        for (a, b) in d1.data().iter().zip(d2.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn random_polar_angle_axis_is_periodic_and_fast() {
        let p = PolarGrid::new(12, 4, 3.0).unwrap();
        let cb = build_polar_codebooks(p, 64, CodebookKind::Random, &mut rng()).unwrap();
        assert!(cb.angle.has_fast_path());
        assert!(!cb.radius.has_fast_path());
        let wrap = cb.angle_seed().frac_pow(12.0).unwrap();
        assert!(wrap.max_abs_diff(&PhasorVector::ones(64)) < 1e-9);
        assert!(cb.angle.column(0).max_abs_diff(&PhasorVector::ones(64)) < 1e-15);
    }

    #[test]
    fn value_and_index_round_trip() {
        let g = CartesianGrid::new(8, 6).unwrap();
        let cb = build_cartesian_codebooks(g, 48, CodebookKind::Dft, &mut rng()).unwrap();
        assert_eq!(cb.h.value_at(0.0), -4.0);
        assert_eq!(cb.h.value_at(7.5), 3.5);
        assert_eq!(cb.h.value_at(8.0), -4.0);
        assert!((cb.h.index_of(-0.5) - 3.5).abs() < 1e-12);
        assert!((cb.h.index_of(-4.5) - 7.5).abs() < 1e-12);
    }

    #[test]
    fn log_radius_spacing_inverts() {
        let p = PolarGrid::new(8, 16, 24.0).unwrap().with_spacing(RadiusSpacing::Log);
        for b in [0.0, 3.3, 15.0] {
            assert!((p.bin_of_radius(p.radius_of(b)) - b).abs() < 1e-9);
        }
        let lin = PolarGrid::new(8, 16, 24.0).unwrap();
        assert!((lin.radius_of(15.0) - 23.25).abs() < 1e-12);
    }
}

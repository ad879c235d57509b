//! Small row-major raster type plus the geometric warps shared by the
//! frame transform, the synthetic renderer and the registration oracle.
//!
//! Pixel (x, y) has its center at continuous coordinate (x + 0.5, y + 0.5);
//! the rotation center of a W×H image is (W/2, H/2).

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type RealImage = Image<f64>;
pub type ComplexImage = Image<Complex64>;
pub type BinaryImage = Image<u8>;

impl<T: Copy + Default> Image<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::default(); width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(invalid(format!(
                "image buffer of {} values does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    /// Integer shift with wraparound.
    pub fn roll(&self, dx: i64, dy: i64) -> Self {
        let (w, h) = (self.width as i64, self.height as i64);
        Self::from_fn(self.width, self.height, |x, y| {
            let sx = (x as i64 - dx).rem_euclid(w) as usize;
            let sy = (y as i64 - dy).rem_euclid(h) as usize;
            self.get(sx, sy)
        })
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T> Image<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    /// Bilinear sample at continuous pixel-index coordinates (pixel centers
    /// at integers). Taps outside the image contribute zero.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> T {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let mut acc = T::default();
        for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let (xi, yi) = (x0 + dx, y0 + dy);
                if xi >= 0 && yi >= 0 && (xi as usize) < self.width && (yi as usize) < self.height {
                    acc = acc + self.get(xi as usize, yi as usize) * w;
                }
            }
        }
        acc
    }

    /// Image of the same size showing this image translated by (dx, dy)
    /// and then rotated by `angle_deg` about the image center.
    pub fn warp(&self, dx: f64, dy: f64, angle_deg: f64) -> Self {
        let (cx, cy) = center_index(self.width, self.height);
        let (s, c) = angle_deg.to_radians().sin_cos();
        Self::from_fn(self.width, self.height, |x, y| {
            let (px, py) = (x as f64 - cx, y as f64 - cy);
            // inverse rotation, then inverse translation
            let sx = c * px + s * py + cx - dx;
            let sy = -s * px + c * py + cy - dy;
            self.sample_bilinear(sx, sy)
        })
    }
}

impl RealImage {
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn threshold(&self, level: f64) -> BinaryImage {
        self.map(|v| u8::from(v > level))
    }
}

impl BinaryImage {
    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b != 0).count()
    }

    pub fn to_real(&self) -> RealImage {
        self.map(|b| if b != 0 { 1.0 } else { 0.0 })
    }
}

/// Rotation center in pixel-index coordinates.
pub fn center_index(width: usize, height: usize) -> (f64, f64) {
    (width as f64 / 2.0 - 0.5, height as f64 / 2.0 - 0.5)
}

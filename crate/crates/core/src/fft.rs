//! Thin wrappers over rustfft for the 1-D and 2-D transforms behind the
//! lattice (regularly spaced phase) codebook fast paths.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward (e^{-i...}) and inverse (e^{+i...}, unnormalized) plans of one size.
#[derive(Clone)]
pub(crate) struct Plan1 {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plan1 {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

impl fmt::Debug for Plan1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Plan1({})", self.len)
    }
}

/// 2-D transform over a row-major `width` x `height` buffer
/// (index = y * width + x).
#[derive(Clone, Debug)]
pub(crate) struct Plan2 {
    pub width: usize,
    pub height: usize,
    along_x: Plan1,
    along_y: Plan1,
}

impl Plan2 {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            along_x: Plan1::new(width),
            along_y: Plan1::new(height),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(buf.len(), self.width * self.height);
        for row in buf.chunks_exact_mut(self.width) {
            if inverse {
                self.along_x.inverse(row);
            } else {
                self.along_x.forward(row);
            }
        }
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for x in 0..self.width {
            for (y, c) in column.iter_mut().enumerate() {
                *c = buf[y * self.width + x];
            }
            if inverse {
                self.along_y.inverse(&mut column);
            } else {
                self.along_y.forward(&mut column);
            }
            for (y, c) in column.iter().enumerate() {
                buf[y * self.width + x] = *c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn forward_matches_direct_dft() {
        let (w, h) = (5, 3);
        let input: Vec<Complex64> = (0..w * h)
            .map(|i| Complex64::new(i as f64, (i * i % 7) as f64))
            .collect();
        let mut buf = input.clone();
        Plan2::new(w, h).forward(&mut buf);
        for ky in 0..h {
            for kx in 0..w {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..h {
                    for x in 0..w {
                        let ph = -TAU * ((kx * x) as f64 / w as f64 + (ky * y) as f64 / h as f64);
                        acc += input[y * w + x] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - buf[ky * w + kx]).norm() < 1e-9);
            }
        }
    }
}

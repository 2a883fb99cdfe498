//! Square sample grids with the unitary Fourier transform
//! f̂(ξ) = (2π)^{-1} ∫ f(x) e^{-i x·ξ} dx.
//!
//! Physical samples sit at x_j = -W + j h with h = 2W/N; frequency samples at
//! ξ_k = c + (k - N/2) Δξ with Δξ = π/W. With this pairing the discrete transform is a DFT
//! up to checkerboard signs and a modulation by the frequency centre c.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n: usize,
    /// W: the physical window is [-W, W)^2.
    pub half_width: f64,
    pub freq_center: [f64; 2],
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::param("N", "grid size must be a power of two ≥ 4"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("half_width", "must be positive"));
        }
        Ok(GridSpec { n, half_width, freq_center: [0.0, 0.0] })
    }

    /// Grid whose frequency window is `center ± xi_half` in each coordinate.
    pub fn for_frequency_window(n: usize, center: [f64; 2], xi_half: f64) -> Result<Self> {
        if !(xi_half > 0.0) {
            return Err(Error::param("xi_half", "must be positive"));
        }
        let mut spec = GridSpec::new(n, PI * n as f64 / (2.0 * xi_half))?;
        spec.freq_center = center;
        Ok(spec)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    /// Half the side of the frequency window.
    pub fn xi_half(&self) -> f64 {
        0.5 * self.n as f64 * self.dxi()
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h()
    }

    pub fn xi(&self, axis: usize, k: usize) -> f64 {
        self.freq_center[axis] + (k as f64 - (self.n / 2) as f64) * self.dxi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Space {
    Physical,
    Frequency,
}

/// Row-major samples: `data[j2 * n + j1]` holds the value at (x_{j1}, x_{j2}).
#[derive(Debug, Clone)]
pub struct GridField {
    pub spec: GridSpec,
    pub space: Space,
    pub data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec, space: Space) -> Self {
        GridField { spec, space, data: vec![Complex64::new(0.0, 0.0); spec.n * spec.n] }
    }

    pub fn from_physical_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = spec.n;
        let xs: Vec<f64> = (0..n).map(|j| spec.x(j)).collect();
        let mut data = Vec::with_capacity(n * n);
        for &y in &xs {
            for &x in &xs {
                data.push(f(x, y));
            }
        }
        GridField { spec, space: Space::Physical, data }
    }

    pub fn from_frequency_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = spec.n;
        let k1: Vec<f64> = (0..n).map(|k| spec.xi(0, k)).collect();
        let mut data = Vec::with_capacity(n * n);
        for k2 in 0..n {
            let y = spec.xi(1, k2);
            for &x in &k1 {
                data.push(f(x, y));
            }
        }
        GridField { spec, space: Space::Frequency, data }
    }

    fn cell_area(&self) -> f64 {
        match self.space {
            Space::Physical => self.spec.h().powi(2),
            Space::Frequency => self.spec.dxi().powi(2),
        }
    }

    /// (Σ |f|^p dA)^{1/p}; p = ∞ gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let s: f64 = if p == 1.0 {
            self.data.iter().map(|z| z.norm()).sum()
        } else if p == 2.0 {
            self.data.iter().map(|z| z.norm_sqr()).sum()
        } else {
            self.data.iter().map(|z| z.norm().powf(p)).sum()
        };
        (s * self.cell_area()).powf(1.0 / p)
    }

    pub fn to_frequency(mut self) -> Result<GridField> {
        if self.space != Space::Physical {
            return Err(Error::GridMismatch("forward transform needs a physical field".into()));
        }
        let spec = self.spec;
        let n = spec.n;
        let (m1, m2) = modulation(&spec, -1.0);
        for (j2, row) in self.data.chunks_exact_mut(n).enumerate() {
            for (j1, z) in row.iter_mut().enumerate() {
                let sign = if (j1 + j2) % 2 == 0 { 1.0 } else { -1.0 };
                *z *= m1[j1] * m2[j2] * sign;
            }
        }
        fft2(&mut self.data, n, false);
        let scale = spec.h().powi(2) / (2.0 * PI);
        for (k2, row) in self.data.chunks_exact_mut(n).enumerate() {
            for (k1, z) in row.iter_mut().enumerate() {
                let sign = if (k1 + k2) % 2 == 0 { scale } else { -scale };
                *z *= sign;
            }
        }
        self.space = Space::Frequency;
        Ok(self)
    }

    pub fn to_physical(mut self) -> Result<GridField> {
        if self.space != Space::Frequency {
            return Err(Error::GridMismatch("inverse transform needs a frequency field".into()));
        }
        let spec = self.spec;
        let n = spec.n;
        for (k2, row) in self.data.chunks_exact_mut(n).enumerate() {
            for (k1, z) in row.iter_mut().enumerate() {
                if (k1 + k2) % 2 == 1 {
                    *z = -*z;
                }
            }
        }
        fft2(&mut self.data, n, true);
        let scale = spec.dxi().powi(2) / (2.0 * PI);
        let (m1, m2) = modulation(&spec, 1.0);
        for (j2, row) in self.data.chunks_exact_mut(n).enumerate() {
            for (j1, z) in row.iter_mut().enumerate() {
                let sign = if (j1 + j2) % 2 == 0 { scale } else { -scale };
                *z *= m1[j1] * m2[j2] * sign;
            }
        }
        self.space = Space::Physical;
        Ok(self)
    }

    /// Pointwise product with a frequency-space multiplier on the same grid.
    pub fn multiply(&mut self, m: &GridField) -> Result<()> {
        if m.spec != self.spec || m.space != Space::Frequency || self.space != Space::Frequency {
            return Err(Error::GridMismatch("multiplier and field grids differ".into()));
        }
        for (z, w) in self.data.iter_mut().zip(&m.data) {
            *z *= *w;
        }
        Ok(())
    }
}

/// e^{sign · i x_j c_axis} for both axes.
fn modulation(spec: &GridSpec, sign: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let axis = |c: f64| -> Vec<Complex64> {
        (0..spec.n).map(|j| Complex64::from_polar(1.0, sign * spec.x(j) * c)).collect()
    };
    (axis(spec.freq_center[0]), axis(spec.freq_center[1]))
}

/// Unnormalized 2-D DFT, forward (e^{-2πi jk/n}) or inverse (e^{+2πi jk/n}).
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for _ in 0..2 {
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose(data, n);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (ib..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                let start = if ib == jb { i + 1 } else { jb };
                for j in start..(jb + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

//! Bumps, sampled multipliers m_{δ,λ}(ξ) = δ^λ β((1 - ρ(ξ))/(2δ)), their kernels, and the
//! decomposition of the lower shell into flat pieces.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::flat_intervals;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryGraph, ConvexDomain, Vec2};
use crate::grid::{GridField, GridSpec, Space};

/// The thinnest part of the shell must span at least this many frequency cells.
pub const MIN_SHELL_CELLS: f64 = 0.9;

/// Largest fraction of the kernel's L^1 mass allowed in the outermost dyadic annulus.
pub const TAIL_LIMIT: f64 = 0.01;

/// Bumps supported in (-1/2, 1/2), scaled so that |β^{(k)}| ≤ 1 for k ≤ 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bump {
    /// (1 - 4t²)^4 / 6144.
    #[default]
    Polynomial,
    /// (1 - 2|t|)^4 (1 + 8|t|) / 5760; C² at the origin, derivatives bounded one-sidedly.
    SmoothedTent,
}

impl Bump {
    pub fn eval(self, t: f64) -> f64 {
        if t.abs() >= 0.5 {
            return 0.0;
        }
        match self {
            Bump::Polynomial => (1.0 - 4.0 * t * t).powi(4) / 6144.0,
            Bump::SmoothedTent => {
                let a = t.abs();
                (1.0 - 2.0 * a).powi(4) * (1.0 + 8.0 * a) / 5760.0
            }
        }
    }

    /// Unscaled profile, for partitions of unity where the constant cancels.
    fn shape(self, t: f64) -> f64 {
        match self {
            Bump::Polynomial => 6144.0 * self.eval(t),
            Bump::SmoothedTent => 5760.0 * self.eval(t),
        }
    }
}

/// Smooth plateau: 1 on [-1, 1], 0 outside (-2, 2), monotone in between.
pub fn plateau(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    // 1 - I_u(5,5): normalized integral of (4v(1-v))^4 from 0 to u.
    let u = a - 1.0;
    let coeffs = [1.0, -4.0, 6.0, -4.0, 1.0];
    let mut s = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        s += c * u.powi(5 + k as i32) / (5 + k) as f64;
    }
    1.0 - 630.0 * s
}

fn check_grid(domain: &ConvexDomain, delta: f64, spec: &GridSpec) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    let reach = domain.polygon.max_norm() * (1.0 + delta);
    let xi_half = spec.xi_half();
    let [c1, c2] = spec.freq_center;
    if c1.abs() + reach > xi_half || c2.abs() + reach > xi_half {
        return Err(Error::Resolution(format!(
            "frequency window ±{xi_half:.4} does not contain the dilated domain (reach {reach:.4})"
        )));
    }
    let shell = 2.0 * delta * domain.polygon.inradius();
    if shell < MIN_SHELL_CELLS * spec.dxi() {
        return Err(Error::Resolution(format!(
            "shell thickness {shell:e} is below {MIN_SHELL_CELLS} cells of Δξ = {:e}",
            spec.dxi()
        )));
    }
    Ok(())
}

/// Frequency window just containing (1 + 2δ)Ω with the given oversampling factor.
pub fn multiplier_grid(domain: &ConvexDomain, delta: f64, n: usize, oversample: f64) -> Result<GridSpec> {
    let reach = domain.polygon.max_norm() * (1.0 + 2.0 * delta);
    GridSpec::for_frequency_window(n, [0.0, 0.0], reach * oversample)
}

/// Sample m_{δ,λ} = δ^λ β((1 - ρ)/(2δ)); rejects grids that do not resolve the shell.
pub fn sample_multiplier(domain: &ConvexDomain, delta: f64, lambda: f64, bump: Bump, spec: GridSpec) -> Result<GridField> {
    check_grid(domain, delta, &spec)?;
    let r_in = domain.polygon.inradius();
    let r_out = domain.polygon.max_norm();
    let (lo, hi) = ((r_in * (1.0 - delta)).powi(2), (r_out * (1.0 + delta)).powi(2));
    let amp = delta.powf(lambda);
    Ok(GridField::from_frequency_fn(spec, |x, y| {
        let r2 = x * x + y * y;
        if r2 <= lo || r2 >= hi {
            return Complex64::new(0.0, 0.0);
        }
        let rho = domain.rho(Vec2::new(x, y));
        Complex64::new(amp * bump.eval((1.0 - rho) / (2.0 * delta)), 0.0)
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelL1 {
    pub l1: f64,
    /// L^1 mass fractions in sup-norm annuli [W/2^{k+1}, W/2^k), k = 0..6, then the core.
    pub annuli: Vec<f64>,
    pub tail_fraction: f64,
    pub reliable: bool,
}

/// ‖F^{-1} m‖_1 with the dyadic-annulus tail audit.
pub fn kernel_l1(multiplier: &GridField) -> Result<KernelL1> {
    let kernel = multiplier.clone().to_physical()?;
    Ok(l1_with_audit(&kernel))
}

pub(crate) fn l1_with_audit(field: &GridField) -> KernelL1 {
    const RINGS: usize = 7;
    let spec = field.spec;
    let n = spec.n;
    let w = spec.half_width;
    let mut mass = [0.0f64; RINGS + 1];
    for j2 in 0..n {
        let y = spec.x(j2).abs();
        for j1 in 0..n {
            let r = spec.x(j1).abs().max(y);
            let v = field.data[j2 * n + j1].norm();
            let ring = if r <= 0.0 { RINGS } else { ((w / r).log2().floor().max(0.0) as usize).min(RINGS) };
            mass[ring] += v;
        }
    }
    let total: f64 = mass.iter().sum();
    let area = spec.h().powi(2);
    let annuli: Vec<f64> = mass.iter().map(|m| if total > 0.0 { m / total } else { 0.0 }).collect();
    let tail_fraction = annuli[0];
    KernelL1 { l1: total * area, annuli, tail_fraction, reliable: tail_fraction < TAIL_LIMIT }
}

/// T_m f = F^{-1}(m f̂).
pub fn apply_multiplier(f: &GridField, m: &GridField) -> Result<GridField> {
    if f.space != Space::Physical {
        return Err(Error::GridMismatch("input must be a physical field".into()));
    }
    if f.spec != m.spec {
        return Err(Error::GridMismatch("field and multiplier grids differ".into()));
    }
    let mut g = f.clone().to_frequency()?;
    g.multiply(m)?;
    g.to_physical()
}

/// Flat-interval partition of unity on the lower shell: piece i is
/// b(ξ) m_{δ,λ}(ξ) w_i(ξ1) with Σ w_i = 1 on the support of b.
#[derive(Debug, Clone)]
pub struct PieceDecomposition {
    pub domain: ConvexDomain,
    pub delta: f64,
    pub lambda: f64,
    pub bump: Bump,
    pub intervals: Vec<(f64, f64)>,
    graph: BoundaryGraph,
}

pub fn decompose_pieces(domain: &ConvexDomain, delta: f64, lambda: f64, bump: Bump) -> Result<PieceDecomposition> {
    let graph = domain.graph(0.0)?;
    let intervals = flat_intervals(&graph, delta, domain.m)?;
    Ok(PieceDecomposition { domain: domain.clone(), delta, lambda, bump, intervals, graph })
}

impl PieceDecomposition {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Sector cutoff: ξ1 within the graph window, lower half-plane.
    pub fn cutoff(&self, xi: Vec2) -> f64 {
        if xi.y >= 0.0 {
            0.0
        } else {
            plateau(2.0 * xi.x)
        }
    }

    pub fn weight(&self, i: usize, t: f64) -> f64 {
        let profile = |(a, b): (f64, f64)| Bump::Polynomial.shape((t - 0.5 * (a + b)) / (b - a));
        let total: f64 = self.intervals.iter().map(|&iv| profile(iv)).sum();
        if total > 0.0 {
            profile(self.intervals[i]) / total
        } else {
            0.0
        }
    }

    fn shell_value(&self, xi: Vec2) -> f64 {
        let rho = self.domain.rho(xi);
        self.delta.powf(self.lambda) * self.bump.eval((1.0 - rho) / (2.0 * self.delta))
    }

    /// Piece i on the grid, or the whole cut-off multiplier b m when `piece` is None.
    pub fn sample(&self, piece: Option<usize>, spec: GridSpec) -> Result<GridField> {
        check_grid(&self.domain, self.delta, &spec)?;
        let window = piece.map(|i| {
            let (a, b) = self.intervals[i];
            (a, b)
        });
        Ok(GridField::from_frequency_fn(spec, |x, y| {
            let xi = Vec2::new(x, y);
            if let Some((a, b)) = window {
                if x <= a || x >= b {
                    return Complex64::new(0.0, 0.0);
                }
            }
            let c = self.cutoff(xi);
            if c == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w = piece.map_or(1.0, |i| self.weight(i, x));
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(c * w * self.shell_value(xi), 0.0)
        }))
    }

    /// Lower boundary used for the decomposition.
    pub fn graph(&self) -> &BoundaryGraph {
        &self.graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_is_monotone_and_matches_ends() {
        assert_eq!(plateau(0.3), 1.0);
        assert_eq!(plateau(-2.5), 0.0);
        assert!((plateau(1.0 + 1e-12) - 1.0).abs() < 1e-9);
        assert!(plateau(2.0 - 1e-9).abs() < 1e-9);
        let mut prev = 1.0;
        for k in 0..=1000 {
            let v = plateau(1.0 + k as f64 / 1000.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((plateau(1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bump_support() {
        for b in [Bump::Polynomial, Bump::SmoothedTent] {
            assert_eq!(b.eval(0.5), 0.0);
            assert!(b.eval(0.0) > 0.0);
            assert_eq!(b.eval(0.2), b.eval(-0.2));
        }
    }
}

//! The boundary decomposition 𝔄(δ), flat intervals, covering numbers and κ estimates.

use serde::{Deserialize, Serialize};

use crate::constructions::{Provenance, Sandwich};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LogLogFit};
use crate::geometry::{caps_cover, rotation_grid, BoundaryGraph, ConvexDomain};

/// Relative slack allowed when re-checking the defining inequality in floating point.
const LEFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryDecomposition {
    pub delta: f64,
    pub m: u32,
    pub rotation: f64,
    /// a_0 = -1 < a_1 < ... < a_Q; the last point may exceed 1 by at most 2^{-M}δ.
    pub points: Vec<f64>,
    /// γ_R'(a_j) for j < Q.
    pub slopes: Vec<f64>,
}

impl BoundaryDecomposition {
    pub fn count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Upper bound 2^{M+2} δ^{-1/2} on the number of pieces.
    pub fn count_bound(&self) -> f64 {
        2f64.powi(self.m as i32 + 2) / self.delta.sqrt()
    }

    /// Largest (a_{j+1}-a_j)(γ_L'(a_{j+1}) - γ_R'(a_j)) / δ over all pieces.
    pub fn worst_left_ratio(&self, graph: &BoundaryGraph) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1] - w[0]) * (graph.left_slope(w[1]) - graph.right_slope(w[0])) / self.delta)
            .fold(0.0, f64::max)
    }

    /// Every piece except the last is maximal: just beyond a_{j+1} the product exceeds δ.
    pub fn right_condition_holds(&self, graph: &BoundaryGraph) -> bool {
        let q = self.count();
        let bps = graph.breakpoints();
        (0..q.saturating_sub(1)).all(|j| {
            let (a, b) = (self.points[j], self.points[j + 1]);
            let next = bps.iter().copied().find(|&x| x > b).unwrap_or(1.0 + 1.0);
            let t = 0.5 * (b + next.min(b + 1e-3));
            (t - a) * (graph.left_slope(t) - graph.right_slope(a)) > self.delta
        })
    }

    pub fn left_condition_holds(&self, graph: &BoundaryGraph) -> bool {
        self.worst_left_ratio(graph) <= 1.0 + LEFT_TOLERANCE
    }
}

/// Greedy partition of [-1, 1] into maximal pieces on which the graph is δ-flat.
pub fn decompose_boundary(graph: &BoundaryGraph, delta: f64, m: u32) -> Result<BoundaryDecomposition> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1]"));
    }
    let xs = graph.breakpoints();
    let slopes = graph.piece_slopes();
    let step = 2f64.powi(-(m as i32)) * delta;
    let max_steps = (2f64.powi(m as i32 + 1) / delta).ceil() as usize + 2;
    let end_slope = *slopes.last().expect("graph has at least one piece");

    let mut points = vec![-1.0];
    let mut piece_slopes = Vec::new();
    let mut a = -1.0_f64;
    while a < 1.0 {
        if points.len() > max_steps {
            return Err(Error::Audit(format!("decomposition did not terminate within {max_steps} steps")));
        }
        let s0 = graph.right_slope(a);
        piece_slopes.push(s0);
        if (1.0 - a) * (end_slope - s0) <= delta {
            let next = if a <= 1.0 - step { 1.0 } else { a + step };
            points.push(next);
            break;
        }
        let mut k = xs.partition_point(|&x| x <= a) - 1;
        let next = loop {
            let e = slopes[k];
            if (xs[k + 1] - a) * (e - s0) > delta {
                break xs[k].max(a + delta / (e - s0));
            }
            k += 1;
        };
        points.push(next);
        a = next;
    }
    Ok(BoundaryDecomposition { delta, m, rotation: graph.rotation(), points, slopes: piece_slopes })
}

/// Cover of [-1, 1] by maximal intervals I whose 4/3-dilate satisfies
/// |I*| (γ_L'(sup I*) - γ_R'(inf I*)) ≤ 2^5 δ. Consecutive intervals overlap.
pub fn flat_intervals(graph: &BoundaryGraph, delta: f64, m: u32) -> Result<Vec<(f64, f64)>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1]"));
    }
    let bound = 32.0 * delta;
    let flat = |c: f64, len: f64| {
        let half = len * 2.0 / 3.0;
        let (l, r) = ((c - half).max(-1.0), (c + half).min(1.0));
        (r - l) * (graph.left_slope(r) - graph.right_slope(l)) <= bound
    };
    let min_len = 2f64.powi(-5 * m as i32) * delta;
    let mut out = Vec::new();
    let mut c = -1.0_f64;
    loop {
        if !flat(c, min_len) {
            return Err(Error::Audit(format!("no flat interval of length ≥ {min_len:e} at {c}")));
        }
        let len = if flat(c, 4.0) {
            4.0
        } else {
            let (mut lo, mut hi) = (min_len, 4.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if flat(c, mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        out.push((c - len / 2.0, c + len / 2.0));
        if c + len / 2.0 >= 1.0 {
            return Ok(out);
        }
        c += len / 2.0;
        if out.len() > 1 << 24 {
            return Err(Error::Audit("flat interval cover does not terminate".into()));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    /// Greedy cap cover of the whole boundary.
    Caps,
    /// Σ_θ Q(R_θΩ, δ) over equispaced rotations in [0, 2π).
    RotationSum { angles: usize },
}

pub fn covering_number(domain: &ConvexDomain, delta: f64, mode: CoverMode) -> Result<usize> {
    match mode {
        CoverMode::Caps => Ok(caps_cover(&domain.polygon, delta)?.len()),
        CoverMode::RotationSum { angles } => {
            let mut total = 0;
            for theta in rotation_grid(angles) {
                let graph = domain.graph(theta)?;
                total += decompose_boundary(&graph, delta, domain.m)?.count();
            }
            Ok(total)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub deltas: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: LogLogFit,
    /// Present for Cantor-type domains at dyadic scales.
    pub sandwich: Option<Vec<Sandwich>>,
}

/// Slope of log N(Ω, δ) against log δ^{-1}.
pub fn kappa_estimate(domain: &ConvexDomain, deltas: &[f64], mode: CoverMode) -> Result<KappaEstimate> {
    if deltas.len() < 4 {
        return Err(Error::param("deltas", "need at least four scales"));
    }
    let floor = domain.provenance.resolution_floor();
    for &d in deltas {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::param("deltas", format!("scale {d} outside (0, 1]")));
        }
        if d < floor {
            return Err(Error::Resolution(format!("scale {d:e} below construction floor {floor:e}")));
        }
    }
    let counts = deltas
        .iter()
        .map(|&d| covering_number(domain, d, mode))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = deltas.iter().map(|d| 1.0 / d).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = loglog_fit(&xs, &ys)?;
    let sandwich = match &domain.provenance {
        Provenance::Cantor { params, .. } => deltas
            .iter()
            .map(|&d| dyadic_exponent(d).map(|e| params.sandwich(e)))
            .collect::<Option<Vec<_>>>(),
        _ => None,
    };
    Ok(KappaEstimate { kappa: fit.slope, deltas: deltas.to_vec(), counts, fit, sandwich })
}

/// e with δ = 2^{-e}, if δ is an exact negative power of two.
pub fn dyadic_exponent(delta: f64) -> Option<u32> {
    if !(delta > 0.0 && delta <= 1.0) {
        return None;
    }
    let e = -delta.log2().round();
    (2f64.powi(-(e as i32)) == delta).then_some(e as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_exponents() {
        assert_eq!(dyadic_exponent(0.25), Some(2));
        assert_eq!(dyadic_exponent(2f64.powi(-40)), Some(40));
        assert_eq!(dyadic_exponent(0.3), None);
    }
}

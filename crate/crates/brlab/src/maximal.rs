//! Directional maximal operators over centred L×δ rectangles on a periodic grid.
//!
//! For each direction the input is resampled (bilinearly) onto a lattice aligned with the
//! direction, rectangle averages come from running sums along and across that lattice, and
//! the per-direction maximum is interpolated back. Only lattice rows that can see the
//! support of f are visited.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::decompose_boundary;
use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LogLogFit};
use crate::geometry::ConvexDomain;
use crate::grid::{GridField, GridSpec, Space};

/// Rectangles with long side at `angle` and the given lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectSpec {
    pub angle: f64,
    pub lengths: Vec<f64>,
}

/// Dyadic lengths δ, 2δ, 4δ, ... not exceeding 1.
pub fn dyadic_lengths(delta: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut l = delta;
    while l <= 1.0 + 1e-12 {
        v.push(l);
        l *= 2.0;
    }
    v
}

fn real_values(f: &GridField) -> Result<Vec<f64>> {
    if f.space != Space::Physical {
        return Err(Error::GridMismatch("maximal operators act on physical fields".into()));
    }
    let v: Vec<f64> = f.data.iter().map(|z| z.re).collect();
    if v.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::param("f", "maximal operators need a nonnegative real field"));
    }
    Ok(v)
}

fn to_field(spec: GridSpec, v: Vec<f64>) -> GridField {
    GridField { spec, space: Space::Physical, data: v.into_iter().map(|x| Complex64::new(x, 0.0)).collect() }
}

fn check_resolution(spec: &GridSpec, width: f64) -> Result<()> {
    if spec.h() > width / 4.0 * (1.0 + 1e-12) {
        return Err(Error::Resolution(format!("grid spacing {:e} exceeds δ/4 = {:e}", spec.h(), width / 4.0)));
    }
    Ok(())
}

/// M_{Θ,δ} f(x): sup over θ ∈ Θ and dyadic L ∈ [δ, 1] of the average over the L×δ rectangle
/// centred at x with long side at angle θ.
pub fn nikodym_apply(f: &GridField, directions: &DirectionSet, delta: f64) -> Result<GridField> {
    check_resolution(&f.spec, delta)?;
    let lengths = dyadic_lengths(delta);
    let family: Vec<RectSpec> =
        directions.angles.iter().map(|&angle| RectSpec { angle, lengths: lengths.clone() }).collect();
    let v = real_values(f)?;
    Ok(to_field(f.spec, rectangle_maximal(&v, &f.spec, &family, delta)))
}

/// Maximal operator over the rectangles δ × (a_{j+1} - a_j) with long side of slope γ_L'(a_j),
/// one per piece of the boundary decomposition.
pub fn decomposition_maximal_apply(f: &GridField, domain: &ConvexDomain, delta: f64) -> Result<GridField> {
    check_resolution(&f.spec, delta)?;
    let graph = domain.graph(0.0)?;
    let dec = decompose_boundary(&graph, delta, domain.m)?;
    let mut family: Vec<RectSpec> = Vec::new();
    for (a, b) in dec.intervals() {
        let angle = graph.left_slope(a).atan().rem_euclid(std::f64::consts::PI);
        let len = b - a;
        match family.iter_mut().find(|r| r.angle == angle) {
            Some(r) => r.lengths.push(len),
            None => family.push(RectSpec { angle, lengths: vec![len] }),
        }
    }
    let v = real_values(f)?;
    Ok(to_field(f.spec, rectangle_maximal(&v, &f.spec, &family, delta)))
}

/// Estimated lattice work for one application, used by the probe budget.
pub fn estimate_work(f: &[f64], spec: &GridSpec, family: &[RectSpec], width: f64) -> f64 {
    let n = spec.n;
    let h = spec.h();
    let w = spec.half_width;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for j2 in 0..n {
        for j1 in 0..n {
            if f[j2 * n + j1] != 0.0 {
                x0 = x0.min(spec.x(j1));
                x1 = x1.max(spec.x(j1));
                y0 = y0.min(spec.x(j2));
                y1 = y1.max(spec.x(j2));
            }
        }
    }
    if x0 > x1 {
        return 0.0;
    }
    let ks = (width / (2.0 * h)).round();
    family
        .iter()
        .map(|r| {
            let (s, c) = r.angle.sin_cos();
            let ext = w * (c.abs() + s.abs());
            let total_rows = 2.0 * ext / h + 2.0 * ks + 6.0;
            let span = (x1 - x0) * s.abs() + (y1 - y0) * c.abs();
            let rows = (span / h + 4.0 * ks + 6.0).min(total_rows);
            let kt = r.lengths.iter().fold(0.0f64, |a, &l| a.max((l / (2.0 * h)).round()));
            let cols = 2.0 * ext / h + 2.0 * kt + 6.0;
            rows * cols * (r.lengths.len() as f64 + 2.0 * ks + 6.0)
        })
        .sum()
}

pub fn rectangle_maximal(f: &[f64], spec: &GridSpec, family: &[RectSpec], width: f64) -> Vec<f64> {
    let n = spec.n;
    let h = spec.h();
    let w = spec.half_width;
    let period = 2.0 * w;
    let ks = (width / (2.0 * h)).round() as usize;
    let support: Vec<(f64, f64)> = (0..n * n)
        .filter(|&i| f[i] != 0.0)
        .map(|i| (spec.x(i % n), spec.x(i / n)))
        .collect();
    let dense = support.len() * 9 > n * n;
    let mut out = vec![0.0; n * n];
    if support.is_empty() {
        return out;
    }
    let sample = |x: f64, y: f64| -> f64 {
        let u = (x + w) / h;
        let v = (y + w) / h;
        let (i0, j0) = (u.floor(), v.floor());
        let (a, b) = (u - i0, v - j0);
        let wrap = |k: f64| (k as i64).rem_euclid(n as i64) as usize;
        let (i0, i1, j0, j1) = (wrap(i0), wrap(i0 + 1.0), wrap(j0), wrap(j0 + 1.0));
        (1.0 - a) * (1.0 - b) * f[j0 * n + i0]
            + a * (1.0 - b) * f[j0 * n + i1]
            + (1.0 - a) * b * f[j1 * n + i0]
            + a * b * f[j1 * n + i1]
    };

    for rect in family {
        if rect.lengths.is_empty() {
            continue;
        }
        let (sn, cs) = rect.angle.sin_cos();
        let kts: Vec<usize> = rect.lengths.iter().map(|&l| (l / (2.0 * h)).round() as usize).collect();
        let kt_max = *kts.iter().max().unwrap();
        let ext = w * (cs.abs() + sn.abs());
        let s0 = -ext - (ks + 2) as f64 * h;
        let rows = ((2.0 * ext) / h).ceil() as usize + 2 * (ks + 2) + 2;
        let t0 = -ext - (kt_max + 2) as f64 * h;
        let cols = ((2.0 * ext) / h).ceil() as usize + 2 * (kt_max + 2) + 2;
        let t_end = t0 + cols as f64 * h;

        let mut marked = vec![dense; rows];
        if !dense {
            for &(x, y) in &support {
                for a in -1..=1 {
                    for b in -1..=1 {
                        let (xs, ys) = (x + a as f64 * period, y + b as f64 * period);
                        let t = xs * cs + ys * sn;
                        if t < t0 - 2.0 * h || t > t_end + 2.0 * h {
                            continue;
                        }
                        let s = -xs * sn + ys * cs;
                        let lo = ((s - 1.5 * h - s0) / h).ceil().max(0.0) as usize;
                        let hi = ((s + 1.5 * h - s0) / h).floor();
                        if hi < 0.0 {
                            continue;
                        }
                        for m in marked.iter_mut().take((hi as usize + 1).min(rows)).skip(lo) {
                            *m = true;
                        }
                    }
                }
            }
        }
        let mut active = vec![false; rows];
        for r in (0..rows).filter(|&r| marked[r]) {
            for a in active.iter_mut().take((r + ks + 1).min(rows)).skip(r.saturating_sub(ks)) {
                *a = true;
            }
        }

        let mut r = 0;
        while r < rows {
            if !active[r] {
                r += 1;
                continue;
            }
            let r0 = r;
            while r < rows && active[r] {
                r += 1;
            }
            let r1 = r - 1;
            let lo = r0.saturating_sub(ks);
            let hi = (r1 + ks).min(rows - 1);
            let stride = cols + 1;
            let mut pref = vec![0.0; (hi - lo + 1) * stride];
            for rr in lo..=hi {
                if !marked[rr] {
                    continue;
                }
                let s = s0 + rr as f64 * h;
                let row = &mut pref[(rr - lo) * stride..(rr - lo + 1) * stride];
                let mut acc = 0.0;
                for c in 0..cols {
                    let t = t0 + c as f64 * h;
                    acc += sample(t * cs - s * sn, t * sn + s * cs);
                    row[c + 1] = acc;
                }
            }
            let bw = r1 - r0 + 1;
            let mut block = vec![0.0; bw * cols];
            let mut vsum = vec![0.0; stride];
            let across = (2 * ks + 1) as f64;
            for or in r0..=r1 {
                vsum.iter_mut().for_each(|v| *v = 0.0);
                for rr in or.saturating_sub(ks)..=(or + ks) {
                    if rr < lo || rr > hi || !marked[rr] {
                        continue;
                    }
                    let row = &pref[(rr - lo) * stride..(rr - lo + 1) * stride];
                    for (v, p) in vsum.iter_mut().zip(row) {
                        *v += p;
                    }
                }
                let dst = &mut block[(or - r0) * cols..(or - r0 + 1) * cols];
                for &kt in &kts {
                    let norm = 1.0 / ((2 * kt + 1) as f64 * across);
                    for c in kt..cols.saturating_sub(kt) {
                        let val = (vsum[c + kt + 1] - vsum[c - kt]) * norm;
                        if val > dst[c] {
                            dst[c] = val;
                        }
                    }
                }
            }
            pull_back(&mut out, spec, &block, r0, r1, cols, s0, t0, sn, cs);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn pull_back(
    out: &mut [f64],
    spec: &GridSpec,
    block: &[f64],
    r0: usize,
    r1: usize,
    cols: usize,
    s0: f64,
    t0: f64,
    sn: f64,
    cs: f64,
) {
    let n = spec.n;
    let h = spec.h();
    let w = spec.half_width;
    let s_lo = s0 + (r0 as f64 - 1.0) * h;
    let s_hi = s0 + (r1 as f64 + 1.0) * h;
    let value = |r: i64, c: i64| -> f64 {
        if r < r0 as i64 || r > r1 as i64 || c < 0 || c >= cols as i64 {
            0.0
        } else {
            block[(r as usize - r0) * cols + c as usize]
        }
    };
    for j2 in 0..n {
        let y = spec.x(j2);
        let (j_lo, j_hi) = if sn.abs() < 1e-12 {
            let s = y * cs;
            if s < s_lo || s >= s_hi {
                continue;
            }
            (0, n - 1)
        } else {
            let xa = (y * cs - s_lo) / sn;
            let xb = (y * cs - s_hi) / sn;
            let (xmin, xmax) = (xa.min(xb), xa.max(xb));
            let a = ((xmin + w) / h).ceil().max(0.0);
            let b = ((xmax + w) / h).floor().min((n - 1) as f64);
            if a > b {
                continue;
            }
            (a as usize, b as usize)
        };
        for j1 in j_lo..=j_hi {
            let x = spec.x(j1);
            let t = x * cs + y * sn;
            let s = -x * sn + y * cs;
            let fr = (s - s0) / h;
            let fc = (t - t0) / h;
            let (r, c) = (fr.floor(), fc.floor());
            let (a, b) = (fr - r, fc - c);
            let (r, c) = (r as i64, c as i64);
            let v = (1.0 - a) * (1.0 - b) * value(r, c)
                + (1.0 - a) * b * value(r, c + 1)
                + a * (1.0 - b) * value(r + 1, c)
                + a * b * value(r + 1, c + 1);
            let slot = &mut out[j2 * n + j1];
            if v > *slot {
                *slot = v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeTest {
    /// Indicator of the δ-ball at the origin.
    Ball,
    /// Unit δ-tubes through the origin, one per direction (at most 64).
    Bush,
    /// 32 random δ-squares near the origin.
    RandomSparse,
}

impl ProbeTest {
    pub const ALL: [ProbeTest; 3] = [ProbeTest::Ball, ProbeTest::Bush, ProbeTest::RandomSparse];
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutcome {
    pub test: ProbeTest,
    pub work: f64,
    /// None when the test exceeded the work budget.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub delta: f64,
    pub p: f64,
    pub n: usize,
    pub directions: usize,
    pub outcomes: Vec<ProbeOutcome>,
    pub best_ratio: f64,
    pub winner: Option<ProbeTest>,
}

/// Test function for the probe on a grid.
pub fn probe_function(test: ProbeTest, spec: GridSpec, directions: &DirectionSet, delta: f64, seed: u64) -> GridField {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match test {
        ProbeTest::Ball => GridField::from_physical_fn(spec, |x, y| if x * x + y * y <= delta * delta { one } else { zero }),
        ProbeTest::Bush => {
            let dirs: Vec<(f64, f64)> = directions.subsample(64).angles.iter().map(|a| a.sin_cos()).collect();
            GridField::from_physical_fn(spec, |x, y| {
                let hit = dirs.iter().any(|&(s, c)| (x * c + y * s).abs() <= 0.5 && (-x * s + y * c).abs() <= delta / 2.0);
                if hit {
                    one
                } else {
                    zero
                }
            })
        }
        ProbeTest::RandomSparse => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centres: Vec<(f64, f64)> =
                (0..32).map(|_| (rng.gen_range(-0.25..0.25), rng.gen_range(-0.25..0.25))).collect();
            GridField::from_physical_fn(spec, |x, y| {
                let hit = centres.iter().any(|&(a, b)| (x - a).abs() <= delta / 2.0 && (y - b).abs() <= delta / 2.0);
                if hit {
                    one
                } else {
                    zero
                }
            })
        }
    }
}

/// Largest ‖M_{Θ,δ} f‖_p / ‖f‖_p over the selected tests, on the window [-1/2, 1/2)^2.
pub fn maximal_norm_probe(
    directions: &DirectionSet,
    delta: f64,
    p: f64,
    n: usize,
    tests: &[ProbeTest],
    seed: u64,
    work_budget: f64,
) -> Result<ProbeReport> {
    if !(1.0..=f64::INFINITY).contains(&p) {
        return Err(Error::param("p", "must be at least 1"));
    }
    let spec = GridSpec::new(n, 0.5)?;
    check_resolution(&spec, delta)?;
    let lengths = dyadic_lengths(delta);
    let family: Vec<RectSpec> =
        directions.angles.iter().map(|&angle| RectSpec { angle, lengths: lengths.clone() }).collect();
    let mut outcomes = Vec::new();
    for &test in tests {
        let f = probe_function(test, spec, directions, delta, seed);
        let v = real_values(&f)?;
        let work = estimate_work(&v, &spec, &family, delta);
        if work > work_budget {
            outcomes.push(ProbeOutcome { test, work, ratio: None });
            continue;
        }
        let fnorm = f.lp_norm(p);
        let mf = to_field(spec, rectangle_maximal(&v, &spec, &family, delta));
        outcomes.push(ProbeOutcome { test, work, ratio: Some(mf.lp_norm(p) / fnorm) });
    }
    let (best_ratio, winner) = outcomes
        .iter()
        .filter_map(|o| o.ratio.map(|r| (r, o.test)))
        .fold((0.0, None), |acc, (r, t)| if r > acc.0 { (r, Some(t)) } else { acc });
    Ok(ProbeReport { delta, p, n, directions: directions.len(), outcomes, best_ratio, winner })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSweep {
    pub reports: Vec<ProbeReport>,
    pub fit: LogLogFit,
    pub exponent: f64,
}

/// Probe at δ = 1/card with card equispaced directions and h ≤ δ/cells_per_delta; fit the ratio
/// against δ^{-1}.
pub fn probe_sweep(
    cards: &[usize],
    p: f64,
    tests: &[ProbeTest],
    cells_per_delta: usize,
    seed: u64,
    work_budget: f64,
) -> Result<ProbeSweep> {
    if cells_per_delta < 4 {
        return Err(Error::param("cells_per_delta", "must be at least 4"));
    }
    let mut reports = Vec::new();
    for &card in cards {
        if card < 2 {
            return Err(Error::param("cards", "need at least two directions"));
        }
        let delta = 1.0 / card as f64;
        let n = (cells_per_delta * card).next_power_of_two();
        let report = maximal_norm_probe(&DirectionSet::equispaced(card), delta, p, n, tests, seed, work_budget)?;
        if report.winner.is_none() {
            return Err(Error::BudgetExceeded {
                needed: report.outcomes.iter().map(|o| o.work).fold(f64::INFINITY, f64::min) as u128,
                budget: work_budget as u128,
            });
        }
        reports.push(report);
    }
    let xs: Vec<f64> = reports.iter().map(|r| 1.0 / r.delta).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.best_ratio).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(ProbeSweep { exponent: fit.slope, reports, fit })
}

//! Overlap multiplicity of n-fold interval sumsets and the additive-energy exponent.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::Add;

use serde::Serialize;

use crate::constructions::{ap_levels, ap_scale_constant, cantor_family, CantorParams, Provenance};
use crate::decomposition::{decompose_boundary, dyadic_exponent};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LogLogFit};
use crate::geometry::{BoundaryGraph, ConvexDomain, Vec2};
use crate::intervals::IntervalFamily;

/// Interval endpoint type: exact lattice numerators or floats.
pub trait Coord: Copy + PartialOrd + Add<Output = Self> + Debug + Default + Serialize {
    fn to_f64(self) -> f64;
}

impl Coord for i128 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Coord for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap<T> {
    /// max_x #{multisets {i_1..i_n} : x ∈ I_{i_1} + ... + I_{i_n}}
    pub multiplicity: u64,
    /// Leftmost point attaining the maximum.
    pub witness: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapPath {
    Enumerate,
    Convolve,
}

/// Number of n-element multisets drawn from `items` items.
pub fn multiset_count(items: usize, n: usize) -> u128 {
    // C(items + n - 1, n), saturating.
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        let num = items as u128 + i;
        c = match c.checked_mul(num) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

pub fn sumset_overlap<T: Coord>(
    intervals: &[(T, T)],
    n: usize,
    path: OverlapPath,
    budget: u128,
) -> Result<Overlap<T>> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if intervals.is_empty() {
        return Err(Error::param("intervals", "family is empty"));
    }
    if intervals.iter().any(|(a, b)| !(a < b)) {
        return Err(Error::param("intervals", "every interval needs lo < hi"));
    }
    match path {
        OverlapPath::Enumerate => overlap_enumerate(intervals, n, budget),
        OverlapPath::Convolve => Ok(overlap_convolve(intervals, n)),
    }
}

/// Events (coordinate, change): half-open sums close before others open at the same point.
fn sweep<T: Coord>(events: impl Iterator<Item = (T, i64)>) -> Overlap<T> {
    let mut best = 0i64;
    let mut witness = T::default();
    let mut current = 0i64;
    let mut pending: Option<T> = None;
    for (x, delta) in events {
        if let Some(p) = pending {
            if p != x {
                if current > best {
                    best = current;
                    witness = p;
                }
            }
        }
        current += delta;
        pending = Some(x);
    }
    if let Some(p) = pending {
        if current > best {
            best = current;
            witness = p;
        }
    }
    Overlap { multiplicity: best as u64, witness }
}

fn event_order<T: Coord>(a: &(T, i64), b: &(T, i64)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

fn overlap_enumerate<T: Coord>(intervals: &[(T, T)], n: usize, budget: u128) -> Result<Overlap<T>> {
    let needed = multiset_count(intervals.len(), n);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut events = Vec::with_capacity(2 * needed as usize);
    let mut idx = vec![0usize; n];
    loop {
        let (mut lo, mut hi) = intervals[idx[0]];
        for &i in &idx[1..] {
            lo = lo + intervals[i].0;
            hi = hi + intervals[i].1;
        }
        events.push((lo, 1i64));
        events.push((hi, -1i64));
        // Next nondecreasing index tuple.
        let mut p = n;
        while p > 0 && idx[p - 1] == intervals.len() - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        let v = idx[p - 1];
        for slot in &mut idx[p..] {
            *slot = v;
        }
    }
    events.sort_by(event_order);
    Ok(sweep(events.into_iter()))
}

/// Distribution of multiset sums as a sorted (value, count) list.
fn multiset_sum_measure<T: Coord>(values: &[T], n: usize) -> Vec<(T, u64)> {
    let mut dp: Vec<Vec<(T, u64)>> = vec![Vec::new(); n + 1];
    dp[0].push((T::default(), 1));
    for &x in values {
        for j in 1..=n {
            let shifted: Vec<(T, u64)> = dp[j - 1].iter().map(|&(v, c)| (v + x, c)).collect();
            dp[j] = merge_measures(&dp[j], &shifted);
        }
    }
    dp.swap_remove(n)
}

fn merge_measures<T: Coord>(a: &[(T, u64)], b: &[(T, u64)]) -> Vec<(T, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let next = if take_a {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        match out.last_mut() {
            Some((v, c)) if *v == next.0 => *c += next.1,
            _ => out.push(next),
        }
    }
    out
}

/// Multiplicity at x equals #{Σ lo ≤ x} - #{Σ hi ≤ x}; both counts come from a multiset DP.
fn overlap_convolve<T: Coord>(intervals: &[(T, T)], n: usize) -> Overlap<T> {
    let los: Vec<T> = intervals.iter().map(|p| p.0).collect();
    let his: Vec<T> = intervals.iter().map(|p| p.1).collect();
    let lo = multiset_sum_measure(&los, n);
    let hi = multiset_sum_measure(&his, n);
    let mut events = Vec::with_capacity(lo.len() + hi.len());
    let (mut i, mut j) = (0, 0);
    while i < lo.len() || j < hi.len() {
        let take_hi = i == lo.len() || (j < hi.len() && hi[j].0 <= lo[i].0);
        if take_hi {
            events.push((hi[j].0, -(hi[j].1 as i64)));
            j += 1;
        } else {
            events.push((lo[i].0, lo[i].1 as i64));
            i += 1;
        }
    }
    sweep(events.into_iter())
}

#[derive(Debug, Clone, Serialize)]
pub struct Subcollection {
    /// 0 for the level-K intervals; k ≥ 1 for the gaps left when level k-1 was subdivided.
    pub index: usize,
    pub card: usize,
    pub multiplicity: u64,
    pub witness: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub delta: f64,
    pub level: usize,
    pub n: usize,
    pub subcollections: Vec<Subcollection>,
    pub m0: usize,
    pub m1: u64,
    /// Ξ = M0^{2n} M1.
    pub xi: f64,
}

/// Split 𝓘'_K into the level-K intervals and the gap collections of levels 1..=K, and bound
/// the n-fold overlap of each.
pub fn energy_partition(
    params: &CantorParams,
    levels: &[IntervalFamily],
    n: usize,
    delta: f64,
) -> Result<EnergyReport> {
    let k = match dyadic_exponent(delta) {
        Some(e) => params.level_for_scale(e),
        None => {
            let mut k = 0;
            while k + 1 < levels.len() && {
                let w = 1.0 / crate::constructions::biguint_to_f64(&params.inverse_width(k + 1));
                w * w >= delta
            } {
                k += 1;
            }
            k
        }
    };
    if k >= levels.len() {
        return Err(Error::Resolution(format!(
            "scale {delta:e} needs level {k}, family has depth {}",
            levels.len() - 1
        )));
    }
    let mut collections = vec![(0usize, levels[k].clone())];
    for j in 1..=k {
        let parent = levels[j - 1].rescaled(levels[j].denom).ok_or_else(|| {
            Error::Overflow(format!("rescaling level {} to level {j}", j - 1))
        })?;
        collections.push((j, parent.gaps_after(&levels[j])));
    }
    let factorial: f64 = (1..=params.m).map(|v| v as f64).product();
    let base = factorial.powi(k as i32);
    let mut subcollections = Vec::new();
    for (index, family) in collections {
        if family.is_empty() {
            continue;
        }
        let ov = sumset_overlap(&family.intervals, n, OverlapPath::Convolve, u128::MAX)?;
        let bound = (n == params.m as usize).then(|| {
            if index == 0 {
                base
            } else {
                2f64.powi(k as i32 + 10) * base
            }
        });
        subcollections.push(Subcollection {
            index,
            card: family.len(),
            multiplicity: ov.multiplicity,
            witness: ov.witness as f64 / family.denom as f64,
            bound,
        });
    }
    let m0 = k + 1;
    let m1 = subcollections.iter().map(|s| s.multiplicity).max().unwrap_or(0);
    let xi = (m0 as f64).powi(2 * n as i32) * m1 as f64;
    Ok(EnergyReport { delta, level: k, n, subcollections, m0, m1, xi })
}

/// AP analogue at scale δ: the cut points of every level whose spacing is at least δ^{1/2},
/// as a single collection of consecutive intervals.
pub fn ap_partition(kappa: f64, depth: usize, delta: f64) -> Result<Vec<(f64, f64)>> {
    let c = ap_scale_constant(kappa);
    let q = 2f64.powf(-(0.5 - kappa));
    let resolved = (1..=depth).take_while(|&k| c * 2f64.powf(-(k as f64) / 2.0) >= delta.sqrt()).count();
    if resolved == depth && depth > 0 && c * 2f64.powf(-((depth + 1) as f64) / 2.0) >= delta.sqrt() {
        return Err(Error::Resolution(format!("scale {delta:e} resolves levels beyond depth {depth}")));
    }
    if resolved == 0 {
        return Ok(vec![(0.0, 1.0)]);
    }
    let levels = ap_levels(kappa, resolved)?;
    let end: f64 = (1..=resolved).map(|k| c * q.powi(k as i32)).sum();
    let mut cuts: Vec<f64> = levels.into_iter().flatten().collect();
    cuts.push(end);
    Ok(cuts.windows(2).map(|w| (w[0], w[1])).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyPoint {
    pub delta: f64,
    /// Construction level K(δ); absent for AP domains.
    pub level: Option<usize>,
    pub m0: usize,
    pub m1: u64,
    /// Largest overlap bound over the subcollections, when one applies.
    pub m1_bound: Option<f64>,
    pub xi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyExponent {
    pub n: usize,
    pub exponent: f64,
    pub points: Vec<EnergyPoint>,
    pub fit: LogLogFit,
}

/// Slope of log Ξ against log δ^{-1} for a domain carrying Cantor or AP metadata.
pub fn energy_exponent(domain: &ConvexDomain, n: usize, deltas: &[f64]) -> Result<EnergyExponent> {
    if deltas.len() < 2 {
        return Err(Error::param("deltas", "need at least two scales"));
    }
    let mut points = Vec::new();
    match &domain.provenance {
        Provenance::Cantor { params, depth } => {
            let levels = cantor_family(params, *depth)?;
            for &d in deltas {
                let r = energy_partition(params, &levels, n, d)?;
                let m1_bound = r.subcollections.iter().filter_map(|s| s.bound).reduce(f64::max);
                points.push(EnergyPoint { delta: d, level: Some(r.level), m0: r.m0, m1: r.m1, m1_bound, xi: r.xi });
            }
        }
        Provenance::Ap { kappa, depth, .. } => {
            for &d in deltas {
                let fam = ap_partition(*kappa, *depth, d)?;
                let ov = sumset_overlap(&fam, n, OverlapPath::Convolve, u128::MAX)?;
                points.push(EnergyPoint {
                    delta: d,
                    level: None,
                    m0: 1,
                    m1: ov.multiplicity,
                    m1_bound: None,
                    xi: ov.multiplicity as f64,
                });
            }
        }
        _ => {
            return Err(Error::param("domain", "energy exponent needs Cantor or AP metadata"));
        }
    }
    let xs: Vec<f64> = deltas.iter().map(|d| 1.0 / d).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.xi).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(EnergyExponent { n, exponent: fit.slope, points, fit })
}

/// Rectangle `corner + [0,1] e1 + [0,1] e2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rect {
    pub corner: Vec2,
    pub e1: Vec2,
    pub e2: Vec2,
}

/// Rectangle with one side along (1, γ_R'(α0)) enclosing the part of the shell
/// 1-δ ≤ ρ ≤ 1+δ below the origin with ξ1 ∈ [α0, α1].
pub fn piece_rectangle(graph: &BoundaryGraph, alpha: (f64, f64), delta: f64) -> Rect {
    let (a0, a1) = alpha;
    let u = Vec2::new(1.0, graph.right_slope(a0.max(-1.0))).unit();
    let v = Vec2::new(-u.y, u.x);
    let mut pts = Vec::new();
    for c in [1.0 - delta, 1.0 + delta] {
        pts.push(Vec2::new(a0, c * graph.gamma(a0 / c)));
        pts.push(Vec2::new(a1, c * graph.gamma(a1 / c)));
        for &b in graph.breakpoints() {
            if b > a0 / c && b < a1 / c {
                pts.push(Vec2::new(c * b, c * graph.gamma(b)));
            }
        }
    }
    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        umin = umin.min(p.dot(u));
        umax = umax.max(p.dot(u));
        vmin = vmin.min(p.dot(v));
        vmax = vmax.max(p.dot(v));
    }
    Rect { corner: u * umin + v * vmin, e1: u * (umax - umin), e2: v * (vmax - vmin) }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupOverlap {
    /// Subcollection index, or None for pieces outside the Cantor window.
    pub group: Option<usize>,
    pub pieces: usize,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceOverlap {
    pub delta: f64,
    pub n: usize,
    pub cell: f64,
    pub groups: Vec<GroupOverlap>,
    pub max: u64,
}

/// Upper bound for the overlap of n-fold sums of the piece rectangles B(I), I ∈ 𝔄(δ),
/// counted on a grid of cell δ/2 (a cell counts when it meets the sum).
pub fn piece_support_overlap(domain: &ConvexDomain, delta: f64, n: usize, budget: u128) -> Result<PieceOverlap> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let graph = domain.graph(0.0)?;
    let dec = decompose_boundary(&graph, delta, domain.m)?;
    let pieces: Vec<(f64, f64)> = dec.intervals().map(|(a, b)| (a, b.min(1.0))).filter(|(a, b)| b > a).collect();
    let groups = group_pieces(domain, &pieces, delta)?;
    let cell = delta / 2.0;
    let mut out = Vec::new();
    for (group, members) in groups {
        let rects: Vec<Rect> = members.iter().map(|&i| piece_rectangle(&graph, pieces[i], delta)).collect();
        let needed = multiset_count(rects.len(), n);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let multiplicity = raster_overlap(&rects, n, cell)?;
        out.push(GroupOverlap { group, pieces: rects.len(), multiplicity });
    }
    let max = out.iter().map(|g| g.multiplicity).max().unwrap_or(0);
    Ok(PieceOverlap { delta, n, cell, groups: out, max })
}

fn group_pieces(domain: &ConvexDomain, pieces: &[(f64, f64)], delta: f64) -> Result<Vec<(Option<usize>, Vec<usize>)>> {
    let Provenance::Cantor { params, depth } = &domain.provenance else {
        return Ok(vec![(Some(0), (0..pieces.len()).collect())]);
    };
    let levels = cantor_family(params, *depth)?;
    let report_level = match dyadic_exponent(delta) {
        Some(e) => params.level_for_scale(e),
        None => 0,
    }
    .min(*depth);
    // Subcollection membership on the level-K denominator; graph abscissa u is family coordinate u + 1/2.
    let mut members: Vec<(usize, Vec<(f64, f64)>)> = vec![(0, levels[report_level].to_f64())];
    for j in 1..=report_level {
        let parent = levels[j - 1].rescaled(levels[j].denom).ok_or_else(|| Error::Overflow("rescale".into()))?;
        members.push((j, parent.gaps_after(&levels[j]).to_f64()));
    }
    let mut groups: Vec<(Option<usize>, Vec<usize>)> = Vec::new();
    for (i, &(a, b)) in pieces.iter().enumerate() {
        let mid = 0.5 * (a + b) + 0.5;
        let g = members
            .iter()
            .find(|(_, ivs)| ivs.iter().any(|&(lo, hi)| mid >= lo && mid < hi))
            .map(|(j, _)| *j);
        match groups.iter_mut().find(|(key, _)| *key == g) {
            Some((_, v)) => v.push(i),
            None => groups.push((g, vec![i])),
        }
    }
    Ok(groups)
}

const MAX_RASTER_CELLS: usize = 200_000_000;

fn raster_overlap(rects: &[Rect], n: usize, cell: f64) -> Result<u64> {
    let mut keys: Vec<(i64, i64)> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let mut base = Vec2::new(-cell / 2.0, -cell / 2.0);
        let mut gens = vec![Vec2::new(cell, 0.0), Vec2::new(0.0, cell)];
        for &i in &idx {
            base = base + rects[i].corner;
            gens.push(rects[i].e1);
            gens.push(rects[i].e2);
        }
        let poly = zonotope(base, &gens);
        raster_cells(&poly, cell, &mut keys);
        if keys.len() > MAX_RASTER_CELLS {
            return Err(Error::BudgetExceeded { needed: keys.len() as u128, budget: MAX_RASTER_CELLS as u128 });
        }
        let mut p = n;
        while p > 0 && idx[p - 1] == rects.len() - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        let v = idx[p - 1];
        for slot in &mut idx[p..] {
            *slot = v;
        }
    }
    keys.sort_unstable();
    let mut best = 0u64;
    let mut run = 0u64;
    for (i, k) in keys.iter().enumerate() {
        run = if i > 0 && keys[i - 1] == *k { run + 1 } else { 1 };
        best = best.max(run);
    }
    Ok(best)
}

/// Counter-clockwise vertices of `base + Σ [0,1] g`.
fn zonotope(mut base: Vec2, gens: &[Vec2]) -> Vec<Vec2> {
    let mut up: Vec<Vec2> = Vec::with_capacity(gens.len());
    for &g in gens {
        if g.x == 0.0 && g.y == 0.0 {
            continue;
        }
        if g.y < 0.0 || (g.y == 0.0 && g.x < 0.0) {
            base = base + g;
            up.push(-g);
        } else {
            up.push(g);
        }
    }
    up.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    let mut verts = vec![base];
    let mut p = base;
    for &g in &up {
        p = p + g;
        verts.push(p);
    }
    for &g in &up[..up.len().saturating_sub(1)] {
        p = p - g;
        verts.push(p);
    }
    verts
}

fn raster_cells(poly: &[Vec2], cell: f64, keys: &mut Vec<(i64, i64)>) {
    let ymin = poly.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let ymax = poly.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let j0 = (ymin / cell - 0.5).ceil() as i64;
    let j1 = (ymax / cell - 0.5).floor() as i64;
    for j in j0..=j1 {
        let y = (j as f64 + 0.5) * cell;
        let (mut xl, mut xr) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..poly.len() {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            if (a.y <= y && y <= b.y) || (b.y <= y && y <= a.y) {
                if a.y == b.y {
                    xl = xl.min(a.x.min(b.x));
                    xr = xr.max(a.x.max(b.x));
                } else {
                    let x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
                    xl = xl.min(x);
                    xr = xr.max(x);
                }
            }
        }
        if xl > xr {
            continue;
        }
        let i0 = (xl / cell - 0.5).ceil() as i64;
        let i1 = (xr / cell - 0.5).floor() as i64;
        for i in i0..=i1 {
            keys.push((j, i));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(4, 2), 10);
        assert_eq!(multiset_count(10, 3), 220);
        assert_eq!(multiset_count(1, 5), 1);
    }

    #[test]
    fn two_unit_intervals() {
        // [0,1) and [1,2): 2-fold sums [0,2), [1,3), [2,4): max 2 on [1,2).
        let iv = [(0i128, 1i128), (1, 2)];
        for path in [OverlapPath::Enumerate, OverlapPath::Convolve] {
            let ov = sumset_overlap(&iv, 2, path, 1000).unwrap();
            assert_eq!(ov.multiplicity, 2);
            assert_eq!(ov.witness, 1);
        }
    }

    #[test]
    fn zonotope_of_unit_square() {
        let z = zonotope(Vec2::new(0.0, 0.0), &[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]);
        assert_eq!(z.len(), 4);
        let mut keys = Vec::new();
        raster_cells(&z, 0.25, &mut keys);
        assert_eq!(keys.len(), 16);
    }
}

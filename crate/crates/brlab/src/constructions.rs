//! Sum-free interval families, the Cantor-type family and the domains built from them.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, ConvexPolygon, Vec2};
use crate::intervals::IntervalFamily;

/// Where each new interval of a sum-free family is searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Leftmost admissible slot overall.
    Leftmost,
    /// Leftmost admissible slot at or after the i-th of N equispaced targets.
    #[default]
    Spread,
}

/// Slot layout of a sum-free family on [0, 1): interval i is `[slots[i], slots[i]+1) / slot_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumFreeTemplate {
    pub m: u32,
    pub slot_count: i128,
    /// In placement order.
    pub slots: Vec<i128>,
}

impl SumFreeTemplate {
    pub fn width(&self) -> f64 {
        1.0 / self.slot_count as f64
    }

    pub fn sorted_slots(&self) -> Vec<i128> {
        let mut s = self.slots.clone();
        s.sort_unstable();
        s
    }

    pub fn family(&self) -> IntervalFamily {
        IntervalFamily {
            denom: self.slot_count,
            intervals: self.sorted_slots().into_iter().map(|k| (k, k + 1)).collect(),
        }
    }
}

/// N intervals of width 1/(3m N^{2m-1}) in [0, 1) whose m-fold sums are pairwise disjoint.
pub fn sum_free_intervals(n: usize, m: u32, placement: Placement) -> Result<SumFreeTemplate> {
    if n <= 10 {
        return Err(Error::param("N", "must exceed 10"));
    }
    sum_free_template(n, n, m, placement)
}

/// Place `count` intervals on the slot lattice sized for `width_n` intervals.
pub(crate) fn sum_free_template(
    count: usize,
    width_n: usize,
    m: u32,
    placement: Placement,
) -> Result<SumFreeTemplate> {
    if m == 0 {
        return Err(Error::param("m", "must be at least 1"));
    }
    if count == 0 || count > width_n {
        return Err(Error::param("N", "count must lie in 1..=width"));
    }
    let slot_count = (width_n as i128)
        .checked_pow(2 * m - 1)
        .and_then(|p| p.checked_mul(3 * m as i128))
        .ok_or_else(|| Error::Overflow(format!("3m N^(2m-1) for N={width_n}, m={m}")))?;
    let mi = m as i128;
    let mut slots: Vec<i128> = Vec::with_capacity(count);
    // sums[s] = sorted distinct sums of s-element multisets of the chosen slots.
    let mut sums: Vec<Vec<i128>> = vec![vec![0]];
    sums.extend((1..=m).map(|_| Vec::new()));
    for i in 0..count {
        let target = match placement {
            Placement::Leftmost => 0,
            Placement::Spread => i as i128 * slot_count / count as i128,
        };
        let k = next_admissible(&sums, mi, target, slot_count)
            .or_else(|| next_admissible(&sums, mi, 0, slot_count))
            .ok_or(Error::NoGap { index: i })?;
        slots.push(k);
        sums = multiset_sums(&slots, m as usize);
    }
    Ok(SumFreeTemplate { m, slot_count, slots })
}

/// Smallest k in [from, limit) whose insertion keeps all m-fold slot sums at distance ≥ m.
///
/// With the new slot used a times in one multiset and b < a times in another, the sums
/// collide iff |d k + ΣA' - ΣB'| < m with d = a - b and |B'| = |A'| + d.
fn next_admissible(sums: &[Vec<i128>], m: i128, from: i128, limit: i128) -> Option<i128> {
    let mut k = from;
    'search: while k < limit {
        for d in 1..=m {
            for s in 0..=(m - d) as usize {
                let big = &sums[s + d as usize];
                for &a in &sums[s] {
                    // Look for b with |d k + a - b| < m.
                    let centre = d * k + a;
                    let j = big.partition_point(|&b| b <= centre - m);
                    if j < big.len() && big[j] < centre + m {
                        let t = big[j] - a;
                        // Forbidden while k < (t + m) / d; jump past it.
                        let next = (t + m + d - 1).div_euclid(d);
                        k = next.max(k + 1);
                        continue 'search;
                    }
                }
            }
        }
        return Some(k);
    }
    None
}

fn multiset_sums(slots: &[i128], m: usize) -> Vec<Vec<i128>> {
    let mut sums: Vec<BTreeSet<i128>> = vec![BTreeSet::new(); m + 1];
    sums[0].insert(0);
    for &x in slots {
        for s in 1..=m {
            let prev: Vec<i128> = sums[s - 1].iter().copied().collect();
            for p in prev {
                sums[s].insert(p + x);
            }
        }
    }
    sums.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Parameters of the Cantor-type family: level k+1 splits each interval into
/// ⌊(2^{k+base_shift})^c⌋ children.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorParams {
    pub m: u32,
    pub base_shift: u32,
    pub c: f64,
    #[serde(default)]
    pub placement: Placement,
}

impl CantorParams {
    pub fn standard(m: u32) -> Self {
        CantorParams { m, base_shift: 4, c: 1.0, placement: Placement::Spread }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::param("m", "must be at least 2"));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::param("c", "must lie in (0, 1]"));
        }
        if self.base_shift > 40 {
            return Err(Error::param("base_shift", "too large"));
        }
        Ok(())
    }

    /// (full N driving the width, number of children kept) at the step from level k to k+1.
    pub fn branching(&self, k: usize) -> (usize, usize) {
        let full = 1usize << (k as u32 + self.base_shift);
        let kept = if self.c == 1.0 { full } else { (full as f64).powf(self.c).floor() as usize };
        (full, kept.max(1))
    }

    /// Slot count 3m N^{2m-1} at step k.
    pub fn slot_count(&self, k: usize) -> BigUint {
        let (full, _) = self.branching(k);
        BigUint::from(3 * self.m) * BigUint::from(full).pow(2 * self.m - 1)
    }

    /// Reciprocal of the common interval width of level k.
    pub fn inverse_width(&self, k: usize) -> BigUint {
        (0..k).fold(BigUint::from(1u32), |acc, l| acc * self.slot_count(l))
    }

    /// Number of intervals at level k.
    pub fn card(&self, k: usize) -> BigUint {
        (0..k).fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(self.branching(l).1))
    }

    /// Largest level whose intervals have width ≥ δ^{1/2}, for δ = 2^{-e}.
    pub fn level_for_scale(&self, e: u32) -> usize {
        let bound = BigUint::from(1u32) << e as usize;
        let mut k = 0;
        loop {
            let w = self.inverse_width(k + 1);
            if &w * &w > bound {
                return k;
            }
            k += 1;
        }
    }

    /// Sandwich card^{4m-2} ≤ δ^{-1} ≤ card^{4m-2} 2^{(K+4)(4m-2)} at δ = 2^{-e}.
    pub fn sandwich(&self, e: u32) -> Sandwich {
        let k = self.level_for_scale(e);
        let card = self.card(k);
        let p = 4 * self.m - 2;
        let power = card.pow(p);
        let delta_inv = BigUint::from(1u32) << e as usize;
        let upper = &power << ((k as u32 + 4) * p) as usize;
        Sandwich {
            exponent: e,
            level: k,
            card: card.to_string(),
            lower_holds: power <= delta_inv,
            upper_holds: upper >= delta_inv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sandwich {
    pub exponent: u32,
    pub level: usize,
    pub card: String,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Levels 0..=depth of the Cantor-type family on [-1/2, 1/2), each over its own denominator.
pub fn cantor_family(params: &CantorParams, depth: usize) -> Result<Vec<IntervalFamily>> {
    params.validate()?;
    let mut levels = vec![IntervalFamily { denom: 2, intervals: vec![(-1, 1)] }];
    for k in 0..depth {
        let (full, kept) = params.branching(k);
        let template = sum_free_template(kept, full, params.m, params.placement)?;
        let slots = template.sorted_slots();
        let s = template.slot_count;
        let parent = &levels[k];
        let overflow = || Error::Overflow(format!("level {} denominator", k + 1));
        let denom = parent.denom.checked_mul(s).ok_or_else(overflow)?;
        let mut intervals = Vec::with_capacity(parent.len() * slots.len());
        for &(lo, hi) in &parent.intervals {
            let base = lo.checked_mul(s).ok_or_else(overflow)?;
            let step = hi - lo;
            for &slot in &slots {
                let a = slot.checked_mul(step).and_then(|v| v.checked_add(base)).ok_or_else(overflow)?;
                intervals.push((a, a + step));
            }
        }
        levels.push(IntervalFamily { denom, intervals });
    }
    Ok(levels)
}

/// How a domain was produced; written to the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Custom,
    Disk { radius: f64, sides: usize },
    Square { half_side: f64 },
    Cantor { params: CantorParams, depth: usize },
    Ap { kappa: f64, depth: usize, scale: f64 },
}

impl Provenance {
    /// Smallest δ at which the finite construction still represents the limiting domain.
    pub fn resolution_floor(&self) -> f64 {
        match self {
            Provenance::Custom | Provenance::Square { .. } => 0.0,
            Provenance::Disk { radius, sides } => {
                let edge = 2.0 * radius * (std::f64::consts::PI / *sides as f64).sin();
                edge * edge / (8.0 * radius)
            }
            Provenance::Cantor { params, depth } => {
                let w = 1.0 / biguint_to_f64(&params.inverse_width(*depth));
                w * w
            }
            Provenance::Ap { kappa, depth, scale } => {
                let c = ap_scale_constant(*kappa);
                // Sagitta-sized contribution of the first omitted level.
                scale * c * c * 2f64.powi(-(*depth as i32 + 1))
            }
        }
    }
}

pub(crate) fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse::<f64>().unwrap_or(f64::INFINITY)
}

pub fn disk_domain(radius: f64, sides: usize) -> Result<ConvexDomain> {
    if sides < 3 {
        return Err(Error::param("sides", "need at least 3"));
    }
    let vertices = (0..sides)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / sides as f64;
            Vec2::new(radius * t.cos(), radius * t.sin())
        })
        .collect();
    let m = minimal_m(radius);
    ConvexDomain::new(ConvexPolygon::new(vertices)?, m, Provenance::Disk { radius, sides })
}

pub fn square_domain(half_side: f64) -> Result<ConvexDomain> {
    let h = half_side;
    let vertices = vec![Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h), Vec2::new(-h, -h)];
    let m = minimal_m(h * std::f64::consts::SQRT_2);
    ConvexDomain::new(ConvexPolygon::new(vertices)?, m, Provenance::Square { half_side })
}

fn minimal_m(r_out: f64) -> u32 {
    (r_out.log2().ceil() as u32).max(3)
}

/// Hull of (x - 1/2, x^2 - 8) over endpoints x ∈ [-1/2, 1/2] of level `depth` and the corners
/// (±8, 1), (±8, 8); M = 10. The lower corners sit at height 1 rather than 0 so that the edges
/// leaving the parabola (slopes ±1 at its ends) still turn left and every parabola point is a
/// vertex.
pub fn build_cantor_domain(params: &CantorParams, depth: usize) -> Result<ConvexDomain> {
    let levels = cantor_family(params, depth)?;
    let family = &levels[depth];
    let d = family.denom as f64;
    let mut xs: Vec<f64> = family
        .intervals
        .iter()
        .flat_map(|&(a, b)| [a as f64 / d, b as f64 / d])
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    check_parabola_resolution(&xs, 8.0)?;
    let mut vertices = vec![Vec2::new(8.0, 1.0), Vec2::new(8.0, 8.0), Vec2::new(-8.0, 8.0), Vec2::new(-8.0, 1.0)];
    vertices.extend(xs.iter().map(|&x| Vec2::new(x - 0.5, x * x - 8.0)));
    let polygon = ConvexPolygon::new(vertices).map_err(|e| match e {
        Error::NotConvex { .. } => Error::Resolution(format!(
            "depth {depth} parabola points are not in strictly convex position in f64"
        )),
        other => other,
    })?;
    if polygon.len() != xs.len() + 4 {
        return Err(Error::Resolution("some parabola points are not hull vertices".into()));
    }
    ConvexDomain::new(polygon, 10, Provenance::Cantor { params: *params, depth })
}

/// Reject point sets on y = x^2 + const whose turn at some vertex is below f64 resolution.
fn check_parabola_resolution(xs: &[f64], magnitude: f64) -> Result<()> {
    let eps = f64::EPSILON * magnitude;
    for w in xs.windows(3) {
        let (g1, g2) = (w[1] - w[0], w[2] - w[1]);
        // Exact turn is g1 g2 (g1 + g2); the coordinate rounding contributes ~eps (g1 + g2).
        if g1 * g2 <= 64.0 * eps {
            return Err(Error::Resolution(format!(
                "consecutive parabola gaps {g1:e}, {g2:e} below f64 resolution"
            )));
        }
    }
    Ok(())
}

/// Constant c = 2^{1/2-κ} - 1 that makes the blocks I_1, I_2, ... tile [0, 1).
pub fn ap_scale_constant(kappa: f64) -> f64 {
    2f64.powf(0.5 - kappa) - 1.0
}

/// Abscissas of the equally spaced point sets E_1..E_depth in [0, 1).
pub fn ap_levels(kappa: f64, depth: usize) -> Result<Vec<Vec<f64>>> {
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(Error::param("kappa", "must lie in (0, 1/2)"));
    }
    let c = ap_scale_constant(kappa);
    let q = 2f64.powf(-(0.5 - kappa));
    let mut start = 0.0;
    let mut levels = Vec::with_capacity(depth);
    for k in 1..=depth {
        let len = c * q.powi(k as i32);
        let spacing = c * 2f64.powf(-(k as f64) / 2.0);
        let count = 2f64.powf(k as f64 * kappa).ceil() as usize;
        levels.push((0..count).map(|i| start + i as f64 * spacing).collect());
        start += len;
    }
    Ok(levels)
}

/// Hull of {(-1,1), (-1,-2), (0,1)} ∪ {(x, x^2 - 2) : x ∈ E_k, k ≤ depth}, dilated by `scale`.
pub fn build_ap_domain(kappa: f64, depth: usize, scale: f64) -> Result<ConvexDomain> {
    let levels = ap_levels(kappa, depth)?;
    let mut vertices = vec![Vec2::new(0.0, 1.0), Vec2::new(-1.0, 1.0), Vec2::new(-1.0, -2.0)];
    let xs: Vec<f64> = levels.iter().flatten().copied().collect();
    check_parabola_resolution(&xs, 2.0)?;
    vertices.extend(xs.iter().map(|&x| Vec2::new(x, x * x - 2.0)));
    let vertices: Vec<Vec2> = vertices.into_iter().map(|v| v * scale).collect();
    let polygon = ConvexPolygon::new(vertices)?;
    if polygon.len() != xs.len() + 3 {
        return Err(Error::Resolution("some AP points are not hull vertices".into()));
    }
    let m = minimal_m(polygon.max_norm());
    ConvexDomain::new(polygon, m, Provenance::Ap { kappa, depth, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_count_matches_width() {
        let t = sum_free_intervals(16, 2, Placement::Leftmost).unwrap();
        assert_eq!(t.slot_count, 3 * 2 * 16i128.pow(3));
        assert_eq!(t.slots.len(), 16);
    }

    #[test]
    fn small_n_rejected() {
        assert!(sum_free_intervals(10, 2, Placement::Spread).is_err());
    }

    #[test]
    fn ap_blocks_tile_unit_interval() {
        let kappa = 0.25;
        let c = ap_scale_constant(kappa);
        let q = 2f64.powf(-(0.5 - kappa));
        let total: f64 = (1..2000).map(|j| c * q.powi(j)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

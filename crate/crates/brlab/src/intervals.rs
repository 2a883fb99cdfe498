//! Exact half-open interval families with a shared denominator.

use serde::{Deserialize, Serialize};

/// Half-open intervals `[lo/denom, hi/denom)`, sorted and pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub denom: i128,
    pub intervals: Vec<(i128, i128)>,
}

impl IntervalFamily {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        let d = self.denom as f64;
        self.intervals.iter().map(|&(a, b)| (a as f64 / d, b as f64 / d)).collect()
    }

    /// Sorted interval endpoints as floats.
    pub fn endpoints(&self) -> Vec<f64> {
        let d = self.denom as f64;
        let mut v: Vec<f64> =
            self.intervals.iter().flat_map(|&(a, b)| [a as f64 / d, b as f64 / d]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn is_sorted_disjoint(&self) -> bool {
        self.intervals.iter().all(|&(a, b)| a < b)
            && self.intervals.windows(2).all(|w| w[0].1 <= w[1].0)
    }

    /// Re-express the family over a denominator that is a multiple of the current one.
    pub fn rescaled(&self, denom: i128) -> Option<IntervalFamily> {
        if denom % self.denom != 0 {
            return None;
        }
        let f = denom / self.denom;
        let intervals = self
            .intervals
            .iter()
            .map(|&(a, b)| Some((a.checked_mul(f)?, b.checked_mul(f)?)))
            .collect::<Option<Vec<_>>>()?;
        Some(IntervalFamily { denom, intervals })
    }

    /// Intervals of `children` lying inside each interval of `self`, and the gaps they leave.
    /// Both families must share a denominator.
    pub fn gaps_after(&self, children: &IntervalFamily) -> IntervalFamily {
        assert_eq!(self.denom, children.denom);
        let mut gaps = Vec::new();
        let mut c = 0;
        for &(lo, hi) in &self.intervals {
            let mut cursor = lo;
            while c < children.intervals.len() && children.intervals[c].0 < hi {
                let (a, b) = children.intervals[c];
                if a >= lo {
                    if a > cursor {
                        gaps.push((cursor, a));
                    }
                    cursor = b;
                }
                c += 1;
            }
            if cursor < hi {
                gaps.push((cursor, hi));
            }
        }
        IntervalFamily { denom: self.denom, intervals: gaps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_fill_parent() {
        let parent = IntervalFamily { denom: 10, intervals: vec![(0, 10)] };
        let kids = IntervalFamily { denom: 10, intervals: vec![(1, 2), (4, 6)] };
        let gaps = parent.gaps_after(&kids);
        assert_eq!(gaps.intervals, vec![(0, 1), (2, 4), (6, 10)]);
    }

    #[test]
    fn rescale_keeps_values() {
        let f = IntervalFamily { denom: 4, intervals: vec![(-2, -1), (1, 2)] };
        let g = f.rescaled(12).unwrap();
        assert_eq!(g.to_f64(), f.to_f64());
        assert!(f.rescaled(6).is_none());
    }
}

//! Direction sets in [0, π).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSet {
    /// Sorted angles in [0, π).
    pub angles: Vec<f64>,
}

impl DirectionSet {
    pub fn new(mut angles: Vec<f64>) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("angles", "non-finite angle"));
        }
        for a in &mut angles {
            *a = a.rem_euclid(PI);
            if *a >= PI {
                *a = 0.0;
            }
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup();
        Ok(DirectionSet { angles })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn equispaced(count: usize) -> Self {
        DirectionSet { angles: (0..count).map(|k| PI * k as f64 / count as f64).collect() }
    }

    /// {0} ∪ {(π/2) 2^{-k} : 0 ≤ k < levels}.
    pub fn lacunary(levels: usize) -> Self {
        let mut angles: Vec<f64> = (0..levels).map(|k| 0.5 * PI * 2f64.powi(-(k as i32))).collect();
        angles.push(0.0);
        DirectionSet::new(angles).expect("finite angles")
    }

    /// Subset of at most `count` angles, evenly spaced in index.
    pub fn subsample(&self, count: usize) -> DirectionSet {
        if self.len() <= count {
            return self.clone();
        }
        let angles = (0..count).map(|i| self.angles[i * self.len() / count]).collect();
        DirectionSet { angles }
    }
}

/// Edge directions of a polygon modulo π, merged when closer than δ/4.
pub fn extract_directions(polygon: &ConvexPolygon, delta: f64) -> Result<DirectionSet> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", "must be positive"));
    }
    let tol = delta / 4.0;
    let raw = DirectionSet::new((0..polygon.len()).map(|i| polygon.edge(i).angle()).collect())?;
    let mut kept: Vec<f64> = Vec::with_capacity(raw.len());
    for a in raw.angles {
        match kept.last() {
            Some(&b) if a - b < tol => {}
            _ => kept.push(a),
        }
    }
    // Angles near π are parallel to angles near 0.
    while kept.len() > 1 && kept[0] + PI - kept[kept.len() - 1] < tol {
        kept.pop();
    }
    Ok(DirectionSet { angles: kept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    #[test]
    fn square_has_two_directions() {
        let sq = ConvexPolygon::new(vec![
            Vec2::new(5.0, -5.0),
            Vec2::new(5.0, 5.0),
            Vec2::new(-5.0, 5.0),
            Vec2::new(-5.0, -5.0),
        ])
        .unwrap();
        let d = extract_directions(&sq, 0.01).unwrap();
        assert_eq!(d.angles, vec![0.0, PI / 2.0]);
    }

    #[test]
    fn regular_polygon_directions() {
        for k in 3..8 {
            let n = 1usize << k;
            let verts = (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    Vec2::new(5.0 * t.cos(), 5.0 * t.sin())
                })
                .collect();
            let p = ConvexPolygon::new(verts).unwrap();
            assert_eq!(extract_directions(&p, 1e-3).unwrap().len(), n / 2);
        }
    }
}

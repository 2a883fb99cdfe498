//! Convex polygons, their Minkowski functional, boundary graphs and cap covers.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::constructions::Provenance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn unit(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A strictly convex polygon with the origin in its interior, vertices counter-clockwise.
#[derive(Debug, Clone)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
    // Edge i runs from vertex i to vertex i+1; `gauge[i]` is its outward normal divided by
    // the support value, so that rho(xi) = max_i gauge[i]·xi.
    gauge: Vec<Vec2>,
    // Vertex angles unwrapped into [angles[0], angles[0] + 2π).
    angles: Vec<f64>,
}

impl ConvexPolygon {
    /// Accepts either orientation; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self> {
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::param("vertices", "need at least three distinct vertices"));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::param("vertices", "non-finite coordinate"));
        }
        let n = vertices.len();
        let twice_area: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
        if twice_area < 0.0 {
            vertices.reverse();
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::NotConvex { index: (i + 1) % n });
            }
        }
        let mut gauge = Vec::with_capacity(n);
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            let normal = Vec2::new(e.y, -e.x);
            let h = normal.dot(vertices[i]);
            if h <= 0.0 {
                return Err(Error::OriginNotInterior);
            }
            gauge.push(normal * (1.0 / h));
        }
        let mut angles = Vec::with_capacity(n);
        let mut prev = vertices[0].angle();
        angles.push(prev);
        for v in &vertices[1..] {
            let mut a = v.angle();
            while a <= prev {
                a += TAU;
            }
            angles.push(a);
            prev = a;
        }
        if angles[n - 1] - angles[0] >= TAU {
            return Err(Error::OriginNotInterior);
        }
        Ok(ConvexPolygon { vertices, gauge, angles })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge vector from vertex i to vertex i+1.
    pub fn edge(&self, i: usize) -> Vec2 {
        self.vertex(i + 1) - self.vertex(i)
    }

    /// Minkowski functional, located by an angular binary search over the vertices.
    pub fn rho(&self, xi: Vec2) -> f64 {
        if xi.x == 0.0 && xi.y == 0.0 {
            return 0.0;
        }
        let n = self.vertices.len();
        let mut theta = xi.angle();
        while theta < self.angles[0] {
            theta += TAU;
        }
        while theta >= self.angles[0] + TAU {
            theta -= TAU;
        }
        let k = self.angles.partition_point(|&a| a <= theta);
        let i = (k + n - 1) % n;
        let mut best = self.gauge[i].dot(xi);
        best = best.max(self.gauge[(i + 1) % n].dot(xi));
        best.max(self.gauge[(i + n - 1) % n].dot(xi))
    }

    /// Minkowski functional as a maximum over all edge half-planes.
    pub fn rho_bruteforce(&self, xi: Vec2) -> f64 {
        self.gauge.iter().map(|g| g.dot(xi)).fold(f64::NEG_INFINITY, f64::max).max(0.0)
    }

    pub fn rotated(&self, theta: f64) -> ConvexPolygon {
        let vertices = self.vertices.iter().map(|v| v.rotated(theta)).collect();
        ConvexPolygon::new(vertices).expect("rotation preserves convexity")
    }

    pub fn scaled(&self, s: f64) -> Result<ConvexPolygon> {
        if !(s > 0.0) {
            return Err(Error::param("scale", "must be positive"));
        }
        ConvexPolygon::new(self.vertices.iter().map(|&v| v * s).collect())
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.edge(i).norm()).sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Distance from the origin to the nearest edge line.
    pub fn inradius(&self) -> f64 {
        self.gauge.iter().map(|g| 1.0 / g.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((*a - *b).norm());
            }
        }
        d
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.rho_bruteforce(p) <= 1.0
    }

    /// Point at boundary parameter `s`; integer parameters are vertices.
    pub fn boundary_point(&self, s: f64) -> Vec2 {
        let n = self.len() as f64;
        let s = s.rem_euclid(n);
        let i = (s.floor() as usize).min(self.len() - 1);
        let u = s - i as f64;
        self.vertex(i) + self.edge(i) * u
    }
}

/// A convex polygon Ω with B(0,4) ⊂ Ω ⊂ B(0,2^M).
#[derive(Debug, Clone)]
pub struct ConvexDomain {
    pub polygon: ConvexPolygon,
    pub m: u32,
    pub provenance: Provenance,
}

impl ConvexDomain {
    pub fn new(polygon: ConvexPolygon, m: u32, provenance: Provenance) -> Result<Self> {
        if !(3..=40).contains(&m) {
            return Err(Error::param("M", "must lie in 3..=40"));
        }
        let r_in = polygon.inradius();
        if r_in < 4.0 {
            return Err(Error::Containment(format!("inradius {r_in} < 4")));
        }
        let r_out = polygon.max_norm();
        if r_out > 2f64.powi(m as i32) {
            return Err(Error::Containment(format!("circumradius {r_out} > 2^{m}")));
        }
        Ok(ConvexDomain { polygon, m, provenance })
    }

    pub fn rho(&self, xi: Vec2) -> f64 {
        self.polygon.rho(xi)
    }

    pub fn graph(&self, rotation: f64) -> Result<BoundaryGraph> {
        BoundaryGraph::new(&self.polygon, rotation)
    }

    pub fn to_file(&self) -> DomainFile {
        DomainFile {
            kind: "polygon".into(),
            vertices: self.polygon.vertices().iter().map(|v| [v.x, v.y]).collect(),
            m: self.m,
        }
    }
}

/// On-disk polygon format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub vertices: Vec<[f64; 2]>,
    #[serde(rename = "M")]
    pub m: u32,
}

impl DomainFile {
    pub fn into_domain(self, provenance: Provenance) -> Result<ConvexDomain> {
        if self.kind != "polygon" {
            return Err(Error::param("type", format!("unsupported domain type {:?}", self.kind)));
        }
        let vertices = self.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect();
        ConvexDomain::new(ConvexPolygon::new(vertices)?, self.m, provenance)
    }
}

/// Lower boundary of a rotated polygon, as a convex piecewise-linear function on [-1, 1].
#[derive(Debug, Clone)]
pub struct BoundaryGraph {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    slope_before: f64,
    slope_after: f64,
    rotation: f64,
}

impl BoundaryGraph {
    pub fn new(polygon: &ConvexPolygon, rotation: f64) -> Result<Self> {
        let rot: Vec<Vec2> = polygon.vertices().iter().map(|v| v.rotated(rotation)).collect();
        let n = rot.len();
        let key = |a: &Vec2, b: &Vec2| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y));
        let left = (0..n).min_by(|&i, &j| key(&rot[i], &rot[j])).unwrap();
        let right = (0..n)
            .min_by(|&i, &j| rot[j].x.total_cmp(&rot[i].x).then(rot[i].y.total_cmp(&rot[j].y)))
            .unwrap();
        let mut chain = vec![rot[left]];
        let mut i = left;
        while i != right {
            i = (i + 1) % n;
            chain.push(rot[i]);
        }
        if chain[0].x >= -1.0 || chain[chain.len() - 1].x <= 1.0 {
            return Err(Error::param("domain", "lower boundary does not span [-1, 1]"));
        }
        let edge_slope = |k: usize| (chain[k + 1].y - chain[k].y) / (chain[k + 1].x - chain[k].x);
        let interp = |k: usize, t: f64| chain[k].y + edge_slope(k) * (t - chain[k].x);

        // Edge containing -1 from the left, and the edge containing 1 from the right.
        let first = (0..chain.len() - 1).find(|&k| chain[k + 1].x >= -1.0).unwrap();
        let last = (0..chain.len() - 1).rev().find(|&k| chain[k].x <= 1.0).unwrap();
        let mut xs = vec![-1.0];
        let mut ys = vec![interp(first, -1.0)];
        let mut slopes = Vec::new();
        let slope_before = edge_slope(first);
        let mut k = first;
        if chain[first + 1].x == -1.0 {
            k += 1;
        }
        loop {
            slopes.push(edge_slope(k));
            if chain[k + 1].x < 1.0 {
                xs.push(chain[k + 1].x);
                ys.push(chain[k + 1].y);
                k += 1;
            } else {
                xs.push(1.0);
                ys.push(interp(k, 1.0));
                break;
            }
        }
        let slope_after = if chain[k + 1].x == 1.0 && k + 1 < chain.len() - 1 {
            edge_slope(k + 1)
        } else {
            edge_slope(last.max(k))
        };
        if ys[0] >= 0.0 || ys[ys.len() - 1] >= 0.0 {
            return Err(Error::GraphNotBelow);
        }
        Ok(BoundaryGraph { xs, ys, slopes, slope_before, slope_after, rotation })
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// Breakpoints of the graph in [-1, 1], including both ends.
    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    /// Slope on each open piece between consecutive breakpoints.
    pub fn piece_slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn locate(&self, t: f64) -> Location {
        let k = self.xs.partition_point(|&x| x < t);
        if k < self.xs.len() && self.xs[k] == t {
            Location::Breakpoint(k)
        } else {
            Location::Inside(k)
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        match self.locate(t) {
            Location::Breakpoint(k) => self.ys[k],
            Location::Inside(0) => self.ys[0] + self.slope_before * (t - self.xs[0]),
            Location::Inside(k) if k == self.xs.len() => {
                self.ys[k - 1] + self.slope_after * (t - self.xs[k - 1])
            }
            Location::Inside(k) => self.ys[k - 1] + self.slopes[k - 1] * (t - self.xs[k - 1]),
        }
    }

    /// Slope of the piece on the left of `t`, written γ_L'(t).
    pub fn left_slope(&self, t: f64) -> f64 {
        match self.locate(t) {
            Location::Breakpoint(0) | Location::Inside(0) => self.slope_before,
            Location::Breakpoint(k) => self.slopes[k - 1],
            Location::Inside(k) => self.piece_slope(k - 1),
        }
    }

    /// Slope of the piece on the right of `t`, written γ_R'(t).
    pub fn right_slope(&self, t: f64) -> f64 {
        match self.locate(t) {
            Location::Breakpoint(k) => self.piece_slope(k),
            Location::Inside(0) => self.slope_before,
            Location::Inside(k) => self.piece_slope(k - 1),
        }
    }

    fn piece_slope(&self, k: usize) -> f64 {
        if k >= self.slopes.len() {
            self.slope_after
        } else {
            self.slopes[k]
        }
    }
}

enum Location {
    Breakpoint(usize),
    // Strictly between xs[k-1] and xs[k]; k == 0 or k == len means outside [-1, 1].
    Inside(usize),
}

/// Cap B(p, ℓ, δ): boundary points within δ of the supporting line ℓ at p.
#[derive(Debug, Clone, Serialize)]
pub struct Cap {
    pub anchor: Vec2,
    /// Unit outward normal of ℓ.
    pub normal: Vec2,
    /// Unit direction of ℓ.
    pub direction: Vec2,
    pub delta: f64,
    /// Boundary parameters covered, unwrapped; may start below 0 or end above n.
    pub window: (f64, f64),
}

impl Cap {
    pub fn distance(&self, x: Vec2) -> f64 {
        self.normal.dot(self.anchor - x)
    }

    pub fn window_contains(&self, s: f64, n: f64) -> bool {
        let (a, b) = self.window;
        [-n, 0.0, n].iter().any(|&shift| {
            let t = s + shift;
            t >= a && t < b
        })
    }
}

/// Greedy cover of ∂Ω by caps, each anchored at the first uncovered boundary point.
pub fn caps_cover(polygon: &ConvexPolygon, delta: f64) -> Result<Vec<Cap>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::param("delta", "must be positive and finite"));
    }
    let n = polygon.len();
    let nf = n as f64;
    let make_cap = |s: f64| -> Cap {
        let i = (s.floor() as i64).rem_euclid(n as i64) as usize;
        let e = polygon.edge(i).unit();
        Cap {
            anchor: polygon.boundary_point(s),
            normal: Vec2::new(e.y, -e.x),
            direction: e,
            delta,
            window: (s, s),
        }
    };

    let mut first = make_cap(0.0);
    let Some(f0) = forward_reach(polygon, &first, 0.0) else {
        first.window = (0.0, nf);
        return Ok(vec![first]);
    };
    let b0 = backward_reach(polygon, &first);
    first.window = (b0, f0);
    let stop = nf + b0;
    let mut caps = vec![first];
    let mut a = f0;
    while a < stop {
        let mut cap = make_cap(a);
        match forward_reach(polygon, &cap, a) {
            Some(f) => {
                cap.window = (a, f);
                caps.push(cap);
                a = f;
            }
            None => {
                cap.window = (a, stop);
                caps.push(cap);
                break;
            }
        }
    }
    Ok(caps)
}

/// First parameter after `s` whose distance to the cap's line reaches δ.
fn forward_reach(polygon: &ConvexPolygon, cap: &Cap, s: f64) -> Option<f64> {
    let n = polygon.len() as f64;
    let mut a = s;
    let mut da = cap.distance(polygon.boundary_point(a));
    loop {
        let b = a.floor() + 1.0;
        if b - s > n {
            return None;
        }
        let pb = polygon.boundary_point(b);
        let db = cap.distance(pb);
        if db >= cap.delta {
            let u = ((cap.delta - da) / (db - da)).clamp(0.0, 1.0);
            return Some(a + u * (b - a));
        }
        a = b;
        da = db;
    }
}

/// Parameter in (-n, 0] where the first cap's coverage begins when walking backwards.
fn backward_reach(polygon: &ConvexPolygon, cap: &Cap) -> f64 {
    let n = polygon.len() as f64;
    let mut b = 0.0_f64;
    let mut db = 0.0;
    loop {
        let a = b - 1.0;
        if a <= -n {
            return -n;
        }
        let da = cap.distance(polygon.boundary_point(a));
        if da >= cap.delta {
            let u = ((cap.delta - db) / (da - db)).clamp(0.0, 1.0);
            return b - u;
        }
        b = a;
        db = da;
    }
}

/// Angles spanning [0, 2π) for the rotation-sum proxy; each rotation exposes one arc of normals.
pub fn rotation_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

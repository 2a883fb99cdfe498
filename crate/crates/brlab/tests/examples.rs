//! Worked examples with hand-derivable answers.

use brlab::constructions::{
    ap_levels, build_ap_domain, build_cantor_domain, cantor_family, disk_domain, square_domain, sum_free_intervals,
    CantorParams, Placement, Provenance,
};
use brlab::decomposition::{covering_number, decompose_boundary, flat_intervals, CoverMode};
use brlab::directions::{extract_directions, DirectionSet};
use brlab::energy::{energy_exponent, energy_partition, sumset_overlap, OverlapPath};
use brlab::geometry::{caps_cover, ConvexDomain, ConvexPolygon, Vec2};
use brlab::grid::{GridField, GridSpec, Space};
use brlab::maximal::{decomposition_maximal_apply, nikodym_apply};
use brlab::multiplier::{apply_multiplier, decompose_pieces, kernel_l1, multiplier_grid, sample_multiplier, Bump};
use rustfft::num_complex::Complex64;

/// Lower boundary t ↦ t² - 10 on [-1, 1] sampled at 2^14 + 1 points, closed above by y = 16.
fn parabola_domain() -> ConvexDomain {
    let k = 1 << 14;
    let mut v: Vec<Vec2> = (0..=k)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / k as f64;
            Vec2::new(t, t * t - 10.0)
        })
        .collect();
    v.push(Vec2::new(12.0, 16.0));
    v.push(Vec2::new(-12.0, 16.0));
    ConvexDomain::new(ConvexPolygon::new(v).unwrap(), 10, Provenance::Custom).unwrap()
}

/// Flat for t < 0, slope 1 for t > 0.
fn corner_domain() -> ConvexDomain {
    let v = [(-12.0, -10.0), (0.0, -10.0), (12.0, 2.0), (12.0, 14.0), (-12.0, 14.0)];
    let poly = ConvexPolygon::new(v.iter().map(|&(x, y)| Vec2::new(x, y)).collect()).unwrap();
    ConvexDomain::new(poly, 5, Provenance::Custom).unwrap()
}

#[test]
fn gauge_of_unit_square() {
    let sq = ConvexPolygon::new(vec![
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
        Vec2::new(-1.0, -1.0),
        Vec2::new(1.0, -1.0),
    ])
    .unwrap();
    assert!((sq.rho(Vec2::new(0.5, 0.0)) - 0.5).abs() < 1e-15);
    for &v in sq.vertices() {
        assert!((sq.rho(v) - 1.0).abs() < 1e-15);
    }
    let d = disk_domain(4.5, 1 << 12).unwrap();
    for &v in d.polygon.vertices().iter().step_by(97) {
        assert!((d.rho(v) - 1.0).abs() < 1e-12);
        assert!((d.rho(v * 2.0) - 2.0).abs() < 1e-12);
    }
}

#[test]
fn square_graph_is_flat() {
    let g = square_domain(5.0).unwrap().graph(0.0).unwrap();
    for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        assert_eq!(g.gamma(t), -5.0);
        assert_eq!(g.left_slope(t), 0.0);
        assert_eq!(g.right_slope(t), 0.0);
    }
}

#[test]
fn cantor_graph_breakpoints_are_parabola_points() {
    let params = CantorParams::standard(2);
    let d = build_cantor_domain(&params, 1).unwrap();
    let g = d.graph(0.0).unwrap();
    let fam = &cantor_family(&params, 1).unwrap()[1];
    // Vertices sit at (x - 1/2, x² - 8) for x in S_k ⊂ [-1/2, 1/2].
    for x in fam.endpoints() {
        let t = x - 0.5;
        assert!((g.gamma(t) - (x * x - 8.0)).abs() < 1e-12);
        assert!(g.breakpoints().iter().any(|&b| (b - t).abs() < 1e-15));
    }
}

#[test]
fn right_slope_is_outgoing_edge() {
    let g = corner_domain().graph(0.0).unwrap();
    assert_eq!(g.left_slope(0.0), 0.0);
    assert_eq!(g.right_slope(0.0), 1.0);
}

#[test]
fn caps_on_square_and_disk() {
    let sq = square_domain(5.0).unwrap();
    assert_eq!(caps_cover(&sq.polygon, 0.01).unwrap().len(), 4);
    assert_eq!(caps_cover(&sq.polygon, 2f64.powi(-10)).unwrap().len(), 4);
    assert_eq!(caps_cover(&sq.polygon, sq.polygon.diameter()).unwrap().len(), 1);
    let disk = disk_domain(4.5, 1 << 16).unwrap();
    for e in [6, 9, 12] {
        let delta = 2f64.powi(-e);
        let count = caps_cover(&disk.polygon, delta).unwrap().len() as f64;
        // One-sided greedy caps span √(2Rδ) of arc each.
        let predicted = std::f64::consts::TAU * 4.5 / (2.0 * 4.5 * delta).sqrt();
        assert!((0.25..=4.0).contains(&(count / predicted)), "δ=2^-{e}: {count}");
    }
    assert!(caps_cover(&sq.polygon, 0.0).is_err());
}

#[test]
fn sum_free_small_cases() {
    let t = sum_free_intervals(11, 1, Placement::Spread).unwrap();
    assert!((t.width() - 1.0 / 33.0).abs() < 1e-15);
    for (n, m, sums) in [(12usize, 2u32, 78usize), (11, 3, 286)] {
        let t = sum_free_intervals(n, m, Placement::Spread).unwrap();
        let expected = (n as f64).powi(-(2 * m as i32 - 1)) / (3.0 * m as f64);
        assert!((t.width() - expected).abs() / expected < 1e-12);
        let fam = t.family();
        assert_eq!(fam.len(), n);
        assert_eq!(brlab::energy::multiset_count(n, m as usize), sums as u128);
        let ov = sumset_overlap(&fam.intervals, m as usize, OverlapPath::Enumerate, u128::MAX).unwrap();
        assert_eq!(ov.multiplicity, 1);
    }
}

#[test]
fn cantor_family_levels() {
    let params = CantorParams::standard(2);
    let levels = cantor_family(&params, 1).unwrap();
    assert_eq!(levels[0].to_f64(), vec![(-0.5, 0.5)]);
    assert_eq!(levels[1].len(), 16);
    let w = levels[1].to_f64()[0];
    let expected = 16f64.powi(-3) / 6.0;
    assert!(((w.1 - w.0) - expected).abs() < 1e-12 * expected);

    let reduced = CantorParams { base_shift: 2, ..params };
    let levels = cantor_family(&reduced, 3).unwrap();
    for (k, fam) in levels.iter().enumerate() {
        assert_eq!(num_bigint::BigUint::from(fam.len()), reduced.card(k));
        assert!(fam.is_sorted_disjoint());
    }
    // Nesting: every child sits inside exactly one parent.
    for k in 0..3 {
        let parent = levels[k].rescaled(levels[k + 1].denom).unwrap();
        for &(lo, hi) in &levels[k + 1].intervals {
            let hits = parent.intervals.iter().filter(|&&(a, b)| a <= lo && hi <= b).count();
            assert_eq!(hits, 1);
        }
    }
}

#[test]
fn cantor_domain_shape() {
    for m in [2, 3] {
        let params = CantorParams::standard(m);
        let d0 = build_cantor_domain(&params, 0).unwrap();
        assert_eq!(d0.polygon.len(), 6);
        let d1 = build_cantor_domain(&params, 1).unwrap();
        let card_s = cantor_family(&params, 1).unwrap()[1].endpoints().len();
        assert_eq!(d1.polygon.len(), card_s + 4);
        for i in 0..64 {
            let xi = Vec2::new(1.0, 0.0).rotated(i as f64 * std::f64::consts::TAU / 64.0);
            assert!(d1.rho(xi) <= 0.25);
        }
    }
}

#[test]
fn ap_levels_and_caps() {
    let levels = ap_levels(0.25, 4).unwrap();
    // ⌈2^{k/4}⌉ for k = 1..4.
    assert_eq!(levels.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2, 2, 2]);
    let xs: Vec<f64> = ap_levels(0.25, 12).unwrap().into_iter().flatten().collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    assert!(ap_levels(0.5, 3).is_err());

    let d = build_ap_domain(0.25, 12, 16.0).unwrap();
    let delta = 2f64.powi(-12);
    let count = caps_cover(&d.polygon, delta).unwrap().len() as f64;
    let target = delta.powf(-0.25);
    assert!(count <= 8.0 * target && count >= target / 8.0, "{count} vs {target}");
}

#[test]
fn decomposition_of_a_line() {
    let d = square_domain(5.0).unwrap();
    let dec = decompose_boundary(&d.graph(0.0).unwrap(), 0.01, 10).unwrap();
    assert_eq!(dec.points, vec![-1.0, 1.0]);
}

#[test]
fn decomposition_of_a_parabola() {
    let d = parabola_domain();
    let g = d.graph(0.0).unwrap();
    let dec = decompose_boundary(&g, 2f64.powi(-10), 10).unwrap();
    assert!((64..=128).contains(&dec.count()), "{}", dec.count());
    assert!(dec.left_condition_holds(&g) && dec.right_condition_holds(&g));

    let flats = flat_intervals(&g, 2f64.powi(-10), 10).unwrap();
    let expected = (16.0 * 2f64.powi(-10)).sqrt();
    for &(a, b) in &flats[1..flats.len() - 1] {
        let len = b - a;
        assert!(len > 0.5 * expected && len < 4.0 * expected, "{len}");
    }
    for (a, b) in dec.intervals() {
        let meets = flats.iter().filter(|&&(c, e)| c < b && a < e).count();
        assert!(meets <= 10);
    }
}

#[test]
fn decomposition_at_a_corner() {
    let d = corner_domain();
    let dec = decompose_boundary(&d.graph(0.0).unwrap(), 2f64.powi(-10), d.m).unwrap();
    assert_eq!(dec.count(), 2);
    assert!(dec.points[1].abs() < 2f64.powi(-10));
}

#[test]
fn covering_count_is_monotone() {
    let d = disk_domain(4.5, 1 << 16).unwrap();
    let counts: Vec<usize> = (6..=12)
        .map(|e| covering_number(&d, 2f64.powi(-e), CoverMode::RotationSum { angles: 16 }).unwrap())
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    let sq = square_domain(5.0).unwrap();
    let delta = 2f64.powi(-10);
    let proxy = covering_number(&sq, delta, CoverMode::RotationSum { angles: 64 }).unwrap() as f64;
    assert!(proxy / 64.0 <= (1.0 / delta).log2());
    assert_eq!(covering_number(&sq, delta, CoverMode::Caps).unwrap(), 4);
}

#[test]
fn sumset_hand_cases() {
    let fam = [(0i128, 1i128), (2, 3)];
    assert_eq!(sumset_overlap(&fam, 2, OverlapPath::Enumerate, u128::MAX).unwrap().multiplicity, 1);
    let fam = [(0i128, 1i128), (1, 2), (2, 3)];
    for path in [OverlapPath::Enumerate, OverlapPath::Convolve] {
        let ov = sumset_overlap(&fam, 2, path, u128::MAX).unwrap();
        assert_eq!(ov.multiplicity, 3);
        assert!((2..=3).contains(&ov.witness));
    }
    let t = sum_free_intervals(12, 2, Placement::Spread).unwrap();
    let ov = sumset_overlap(&t.family().intervals, 2, OverlapPath::Convolve, u128::MAX).unwrap();
    assert_eq!(ov.multiplicity, 1);
}

#[test]
fn energy_partition_bounds() {
    let params = CantorParams { base_shift: 2, ..CantorParams::standard(2) };
    let levels = cantor_family(&params, 3).unwrap();
    for e in (4..=40).step_by(4) {
        let r = energy_partition(&params, &levels, 2, 2f64.powi(-e)).unwrap();
        let interval = r.subcollections.iter().find(|s| s.index == 0).unwrap();
        assert!(interval.multiplicity as f64 <= 2f64.powi(r.level as i32));
        for s in &r.subcollections {
            assert!(s.multiplicity as f64 <= s.bound.unwrap());
        }
    }
    let standard = CantorParams::standard(2);
    for e in (8..=60).step_by(4) {
        let k = standard.level_for_scale(e) as f64;
        assert!(k * k <= 4.0 * e as f64);
    }
}

#[test]
fn pair_energy_is_flat() {
    let deltas: Vec<f64> = (8..=20).step_by(4).map(|e| 2f64.powi(-e)).collect();
    let d = build_cantor_domain(&CantorParams::standard(2), 1).unwrap();
    assert!(energy_exponent(&d, 2, &deltas).unwrap().exponent <= 0.1);
}

#[test]
fn direction_extraction() {
    let sq = square_domain(5.0).unwrap();
    let dirs = extract_directions(&sq.polygon, 0.01).unwrap();
    assert_eq!(dirs.len(), 2);
    let ngon = disk_domain(4.5, 256).unwrap();
    assert_eq!(extract_directions(&ngon.polygon, 1e-4).unwrap().len(), 128);
    let c = build_cantor_domain(&CantorParams::standard(2), 1).unwrap();
    let n = extract_directions(&c.polygon, 1e-12).unwrap().len();
    // Two of the four corner edges are parallel to others.
    assert!(n <= c.polygon.len() && n + 2 >= c.polygon.len(), "{n} vs {}", c.polygon.len());
}

fn real_field(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> GridField {
    GridField::from_physical_fn(spec, |x, y| Complex64::new(f(x, y), 0.0))
}

#[test]
fn maximal_examples() {
    let spec = GridSpec::new(128, 0.5).unwrap();
    let delta = 1.0 / 16.0;
    let dirs = DirectionSet::equispaced(8);
    let one = real_field(spec, |_, _| 1.0);
    let m = nikodym_apply(&one, &dirs, delta).unwrap();
    assert!(m.data.iter().all(|z| (z.re - 1.0).abs() < 0.05));

    // A δ × 1/4 rectangle along the x-axis; its own average at the centre is 1.
    let rect = real_field(spec, |x, y| if x.abs() <= 0.125 && y.abs() <= delta / 2.0 { 1.0 } else { 0.0 });
    let m = nikodym_apply(&rect, &dirs, delta).unwrap();
    assert!(m.data[(spec.n / 2) * spec.n + spec.n / 2].re >= 0.9);

    let d = build_cantor_domain(&CantorParams::standard(2), 1).unwrap();
    let theta = extract_directions(&d.polygon, delta).unwrap();
    let bump = real_field(spec, |x, y| (-(x * x + y * y) * 40.0).exp());
    let dm = decomposition_maximal_apply(&bump, &d, delta).unwrap();
    let nm = nikodym_apply(&bump, &theta, delta).unwrap();
    for (a, b) in dm.data.iter().zip(&nm.data) {
        assert!(a.re <= 4.0 * b.re + 1e-12);
    }
    let dm_one = decomposition_maximal_apply(&one, &d, delta).unwrap();
    assert!(dm_one.data.iter().all(|z| (z.re - 1.0).abs() < 0.05));
}

#[test]
fn multiplier_examples() {
    let d = disk_domain(4.5, 1 << 12).unwrap();
    let delta = 2f64.powi(-6);
    let spec = multiplier_grid(&d, delta, 512, 1.05).unwrap();
    let m0 = sample_multiplier(&d, delta, 0.0, Bump::Polynomial, spec).unwrap();
    let m1 = sample_multiplier(&d, delta, 1.0, Bump::Polynomial, spec).unwrap();
    let mut nonzero = 0;
    for (k, (a, b)) in m0.data.iter().zip(&m1.data).enumerate() {
        assert!(a.re >= 0.0 && a.re <= 1.0);
        assert_eq!(b.re, delta * a.re);
        if a.re > 0.0 {
            nonzero += 1;
            let (i, j) = (k % spec.n, k / spec.n);
            let xi = Vec2::new(spec.xi(0, i), spec.xi(1, j));
            assert!((1.0 - d.rho(xi)).abs() < delta);
        }
    }
    // Support of β((1-ρ)/2δ) is the shell |1-ρ| < δ, of area ≈ 2·2πR·Rδ.
    let r = 4.5;
    let expected = 4.0 * std::f64::consts::PI * r * r * delta / spec.dxi().powi(2);
    assert!((nonzero as f64 / expected - 1.0).abs() < 0.2, "{nonzero} vs {expected}");

    let k0 = kernel_l1(&m0).unwrap().l1;
    let k1 = kernel_l1(&m1).unwrap().l1;
    assert!((k1 / k0 - delta).abs() < 1e-12 * delta);
}

#[test]
fn apply_multiplier_examples() {
    let spec = GridSpec::new(128, 8.0).unwrap();
    let f = real_field(spec, |x, y| (-(x * x + 2.0 * y * y)).exp() * (1.0 + x));
    let ones = GridField::from_frequency_fn(spec, |_, _| Complex64::new(1.0, 0.0));
    let g = apply_multiplier(&f, &ones).unwrap();
    let err: f64 = g.data.iter().zip(&f.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let norm: f64 = f.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(err <= 1e-12 * norm, "{err}");

    let bounded = GridField::from_frequency_fn(spec, |x, y| Complex64::new(0.5 + 0.25 * (x + y).sin(), 0.0));
    let g = apply_multiplier(&f, &bounded).unwrap();
    assert!(g.lp_norm(2.0) <= 0.75 * f.lp_norm(2.0) * (1.0 + 1e-12));

    // f̂ concentrated near the origin, multiplier supported far away.
    let far = GridField::from_frequency_fn(spec, |x, y| {
        Complex64::new(if x * x + y * y > 225.0 { 1.0 } else { 0.0 }, 0.0)
    });
    let g = apply_multiplier(&f, &far).unwrap();
    assert!(g.lp_norm(2.0) <= 1e-10 * f.lp_norm(2.0));
    let zero = GridField::zeros(spec, Space::Physical);
    assert!(apply_multiplier(&zero, &far).unwrap().lp_norm(2.0) == 0.0);
}

#[test]
fn piece_examples() {
    let sq = square_domain(5.0).unwrap();
    assert!(decompose_pieces(&sq, 2f64.powi(-8), 0.0, Bump::Polynomial).unwrap().len() <= 3);

    let d = disk_domain(4.5, 1 << 16).unwrap();
    let delta = 2f64.powi(-8);
    let pieces = decompose_pieces(&d, delta, 0.0, Bump::Polynomial).unwrap();
    let target = delta.powf(-0.5);
    assert!(pieces.len() as f64 <= 4.0 * target && pieces.len() as f64 >= target / 4.0, "{}", pieces.len());

    let spec = multiplier_grid(&d, delta, 1024, 1.05).unwrap();
    let whole = pieces.sample(None, spec).unwrap();
    let mut sum = vec![0.0; whole.data.len()];
    for i in 0..pieces.len() {
        for (s, z) in sum.iter_mut().zip(&pieces.sample(Some(i), spec).unwrap().data) {
            *s += z.re;
        }
    }
    let worst = sum.iter().zip(&whole.data).map(|(s, w)| (s - w.re).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

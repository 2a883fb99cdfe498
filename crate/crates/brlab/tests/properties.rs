use brlab::constructions::Provenance;
use brlab::decomposition::decompose_boundary;
use brlab::directions::DirectionSet;
use brlab::energy::{sumset_overlap, OverlapPath};
use brlab::geometry::{ConvexDomain, ConvexPolygon, Vec2};
use brlab::grid::{GridField, GridSpec, Space};
use brlab::maximal::nikodym_apply;
use proptest::prelude::*;
use rustfft::num_complex::Complex64;

/// Vertices on an ellipse with semi-axes in [5, 12], rotated by `tilt`.
fn ellipse_polygon(a: f64, b: f64, tilt: f64, mut angles: Vec<f64>) -> Option<ConvexDomain> {
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
    let v: Vec<Vec2> = angles.iter().map(|&t| Vec2::new(a * t.cos(), b * t.sin()).rotated(tilt)).collect();
    let poly = ConvexPolygon::new(v).ok()?;
    ConvexDomain::new(poly, 4, Provenance::Custom).ok()
}

fn domain_strategy() -> impl Strategy<Value = ConvexDomain> {
    (5.0..12.0f64, 5.0..12.0f64, 0.0..3.0f64, prop::collection::vec(0.0..std::f64::consts::TAU, 24..200))
        .prop_filter_map("not a valid domain", |(a, b, tilt, angles)| ellipse_polygon(a, b, tilt, angles))
}

fn vec_strategy() -> impl Strategy<Value = Vec2> {
    (-40.0..40.0f64, -40.0..40.0f64).prop_filter_map("zero", |(x, y)| {
        let v = Vec2::new(x, y);
        (v.norm() > 1e-6).then_some(v)
    })
}

fn family_strategy() -> impl Strategy<Value = Vec<(i128, i128)>> {
    prop::collection::vec((1i128..20, 1i128..15), 1..40).prop_map(|steps| {
        let mut out = Vec::new();
        let mut x = 0;
        for (gap, len) in steps {
            x += gap;
            out.push((x, x + len));
            x += len;
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn gauge_is_homogeneous_and_convex(d in domain_strategy(), xi in vec_strategy(), eta in vec_strategy(), t in 0.001..10.0f64) {
        let r = d.rho(xi);
        prop_assert!((d.rho(xi * t) - t * r).abs() <= 1e-12 * (1.0 + d.rho(xi * t)));
        let mid = d.rho((xi + eta) * 0.5);
        prop_assert!(mid <= 0.5 * (r + d.rho(eta)) + 1e-12);
        let brute = d.polygon.rho_bruteforce(xi);
        prop_assert!((r - brute).abs() <= 1e-12 * brute);
    }

    #[test]
    fn graph_slopes_are_ordered(d in domain_strategy(), rot in 0.0..std::f64::consts::PI) {
        let Ok(g) = d.graph(rot) else { return Ok(()); };
        let bound = 2f64.powi(d.m as i32 - 1);
        for &b in g.breakpoints() {
            prop_assert!(g.left_slope(b) <= g.right_slope(b));
            prop_assert!(g.right_slope(b).abs() <= bound && g.left_slope(b).abs() <= bound);
        }
    }

    #[test]
    fn decomposition_postconditions(d in domain_strategy(), e in 4i32..16) {
        let g = d.graph(0.0).unwrap();
        let delta = 2f64.powi(-e);
        let dec = decompose_boundary(&g, delta, d.m).unwrap();
        prop_assert!(dec.left_condition_holds(&g));
        prop_assert!(dec.right_condition_holds(&g));
        prop_assert!((dec.count() as f64) <= dec.count_bound());
        let coarser = decompose_boundary(&g, 2.0 * delta, d.m).unwrap();
        prop_assert!(coarser.count() <= dec.count());
    }

    #[test]
    fn overlap_paths_agree(fam in family_strategy(), n in 1usize..=3) {
        let a = sumset_overlap(&fam, n, OverlapPath::Enumerate, u128::MAX).unwrap();
        let b = sumset_overlap(&fam, n, OverlapPath::Convolve, u128::MAX).unwrap();
        prop_assert_eq!(a.multiplicity, b.multiplicity);
    }

    #[test]
    fn overlap_is_translation_invariant_and_monotone(fam in family_strategy(), shift in -500i128..500) {
        let moved: Vec<(i128, i128)> = fam.iter().map(|&(a, b)| (a + shift, b + shift)).collect();
        let mut prev = 0;
        for n in 1..=3 {
            let a = sumset_overlap(&fam, n, OverlapPath::Convolve, u128::MAX).unwrap();
            let b = sumset_overlap(&moved, n, OverlapPath::Convolve, u128::MAX).unwrap();
            prop_assert_eq!(a.multiplicity, b.multiplicity);
            prop_assert_eq!(a.witness + n as i128 * shift, b.witness);
            prop_assert!(a.multiplicity >= prev);
            prev = a.multiplicity;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), w in 0.5..30.0f64, cx in -5.0..5.0f64, cy in -5.0..5.0f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut spec = GridSpec::new(64, w).unwrap();
        spec.freq_center = [cx, cy];
        let mut f = GridField::zeros(spec, Space::Physical);
        for z in f.data.iter_mut() {
            *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let g = f.clone().to_frequency().unwrap();
        prop_assert!((g.lp_norm(2.0) - f.lp_norm(2.0)).abs() <= 1e-12 * f.lp_norm(2.0));
        let back = g.to_physical().unwrap();
        let err: f64 = back.data.iter().zip(&f.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = f.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * norm);
    }

    #[test]
    fn maximal_is_sublinear_monotone_contractive(
        a in prop::collection::vec(0.0..2.0f64, 32 * 32),
        b in prop::collection::vec(0.0..2.0f64, 32 * 32),
        count in 1usize..6,
    ) {
        let spec = GridSpec::new(32, 0.5).unwrap();
        let field = |v: &[f64]| {
            let mut f = GridField::zeros(spec, Space::Physical);
            for (z, &x) in f.data.iter_mut().zip(v) {
                *z = Complex64::new(x, 0.0);
            }
            f
        };
        let dirs = DirectionSet::equispaced(count);
        let delta = 0.125;
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ma = nikodym_apply(&field(&a), &dirs, delta).unwrap();
        let mb = nikodym_apply(&field(&b), &dirs, delta).unwrap();
        let ms = nikodym_apply(&field(&sum), &dirs, delta).unwrap();
        let sup = a.iter().copied().fold(0.0, f64::max);
        for i in 0..a.len() {
            prop_assert!(ms.data[i].re <= ma.data[i].re + mb.data[i].re + 1e-12);
            prop_assert!(ma.data[i].re <= ms.data[i].re + 1e-12);
            prop_assert!(ma.data[i].re <= sup + 1e-12);
        }
    }
}

use brlab::constructions::disk_domain;
use brlab::khinchine::{khinchine_experiment, select_bumps, KhinchineConfig};

fn config(trials: usize, seed: u64) -> KhinchineConfig {
    KhinchineConfig { delta: 2f64.powi(-8), lambda: 0.0, p_list: vec![1.0, 2.0], trials, seed, grid: 1024 }
}

#[test]
fn disk_run_is_sane() {
    let d = disk_domain(4.5, 1 << 16).unwrap();
    let r = khinchine_experiment(&d, &config(32, 3)).unwrap();
    assert!(r.reliable);
    assert!(r.energy_check.relative_error < 0.01);
    assert!(r.l1_relative_standard_error <= 0.25);
    assert_eq!(r.trials.len(), 32);
    for t in &r.trials {
        // At p = 2 the operator cannot amplify: the multiplier is bounded by one.
        assert!(t.norms[1].ratio <= 1.0 + 1e-12);
        assert!(t.norms.iter().all(|n| n.psi > 0.0 && n.t_psi > 0.0));
    }
}

#[test]
fn seeded_runs_repeat() {
    let d = disk_domain(4.5, 1 << 16).unwrap();
    let a = khinchine_experiment(&d, &config(2, 11)).unwrap();
    let b = khinchine_experiment(&d, &config(2, 11)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn bump_layout_uses_most_populated_class() {
    let d = disk_domain(4.5, 1 << 16).unwrap();
    let layout = select_bumps(&d, 2f64.powi(-10)).unwrap();
    let best = layout.class_counts.iter().map(|c| c.1).max().unwrap();
    assert_eq!(layout.qprime, best);
    let first = layout.class_counts.iter().find(|c| c.1 == best).unwrap();
    assert_eq!(layout.r, first.0);
    assert!(layout.r_min <= layout.r);
    assert_eq!(layout.card(), layout.qprime.div_ceil(layout.stride));
}

#[test]
fn rejects_bad_configs() {
    let d = disk_domain(4.5, 1 << 16).unwrap();
    let mut c = config(1, 0);
    c.p_list = vec![3.0];
    assert!(khinchine_experiment(&d, &c).is_err());
    let mut c = config(0, 0);
    c.p_list = vec![1.0];
    assert!(khinchine_experiment(&d, &c).is_err());
}

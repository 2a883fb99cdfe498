//! Random-sign lower-bound experiment: a sum of frequency bumps at selected boundary points
//! with i.i.d. signs, pushed through the shell multiplier φ((1 - ρ)/δ).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::decomposition::{covering_number, decompose_boundary, CoverMode};
use crate::error::{Error, Result};
use crate::geometry::{ConvexDomain, Vec2};
use crate::grid::{GridField, GridSpec, Space};
use crate::multiplier::{l1_with_audit, plateau, MIN_SHELL_CELLS, TAIL_LIMIT};

/// Frequency half-window relative to the half-extent of the bump supports.
const WINDOW_MARGIN: f64 = 1.1;

/// Bumps must span at least this many frequency cells per unit of 2^{-r}.
const BUMP_CELLS: f64 = 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct KhinchineConfig {
    pub delta: f64,
    pub lambda: f64,
    pub p_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
}

/// Which boundary points carry a bump.
#[derive(Debug, Clone, Serialize)]
pub struct BumpLayout {
    /// Number of pieces of the boundary decomposition.
    pub q: usize,
    /// (r, number of pieces with a_{j+1} - a_j in (2^{-r-1}, 2^{-r}]).
    pub class_counts: Vec<(i32, usize)>,
    pub r: i32,
    /// Smallest populated class, reported for comparison with the chosen one.
    pub r_min: i32,
    /// Indices in the chosen class.
    pub qprime: usize,
    /// Every `stride`-th index of the class carries a bump.
    pub stride: usize,
    pub centres: Vec<[f64; 2]>,
}

impl BumpLayout {
    pub fn card(&self) -> usize {
        self.centres.len()
    }
}

/// Midpoints c_j of the decomposition pieces, grouped by the dyadic size of the piece; the most
/// populated class wins, ties going to the smaller r.
pub fn select_bumps(domain: &ConvexDomain, delta: f64) -> Result<BumpLayout> {
    let graph = domain.graph(0.0)?;
    let dec = decompose_boundary(&graph, delta, domain.m)?;
    let pieces: Vec<(f64, f64)> = dec.intervals().map(|(a, b)| (a, b.min(1.0))).filter(|(a, b)| b > a).collect();
    let mids: Vec<f64> = pieces.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let classes: Vec<i32> = pieces.iter().map(|(a, b)| (-(b - a).log2()).ceil() as i32 - 1).collect();
    let mut class_counts: Vec<(i32, usize)> = Vec::new();
    for &c in &classes {
        match class_counts.iter_mut().find(|(r, _)| *r == c) {
            Some(e) => e.1 += 1,
            None => class_counts.push((c, 1)),
        }
    }
    class_counts.sort();
    let (r, qprime) = class_counts
        .iter()
        .copied()
        .fold((i32::MAX, 0), |best, (r, n)| if n > best.1 { (r, n) } else { best });
    if qprime < 8 {
        return Err(Error::param("delta", format!("only {qprime} indices share a gap scale; need at least 8")));
    }
    let r_min = class_counts[0].0;
    let stride = ((1.0 / delta).log2().floor() as usize).max(1);
    let centres = classes
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == r)
        .map(|(j, _)| j)
        .step_by(stride)
        .map(|j| [mids[j], graph.gamma(mids[j])])
        .collect();
    Ok(BumpLayout { q: dec.count(), class_counts, r, r_min, qprime, stride, centres })
}

#[derive(Debug, Clone, Serialize)]
pub struct PNorms {
    pub p: f64,
    pub psi: f64,
    pub t_psi: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KhinchineTrial {
    pub seed: u64,
    pub norms: Vec<PNorms>,
    pub psi_l1: f64,
    pub psi_tail_fraction: f64,
    pub t_psi_tail_fraction: f64,
    /// Mass fractions of Tψ in the dyadic annuli of the kernel audit, outermost first.
    pub t_psi_annuli: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyCheck {
    /// ‖ψ‖₂² with every sign +1.
    pub measured: f64,
    /// Σ_i of the single-bump energies.
    pub bump_sum: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Predictions {
    pub sqrt_qprime: f64,
    /// (card 2^{-2r})^{1/2}.
    pub l2_card: f64,
    /// (N(Ω,δ) 2^{-2r})^{1/2}.
    pub l2_cover: f64,
    /// (p, N(Ω,δ)^{1/2} δ^{(p-1)/p}).
    pub operator: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KhinchineReport {
    pub config: KhinchineConfig,
    pub grid: GridSpec,
    pub layout: BumpLayout,
    pub covering_number: usize,
    pub trials: Vec<KhinchineTrial>,
    /// Per p: means over trials of ‖ψ‖_p, ‖Tψ‖_p and the ratio.
    pub mean: Vec<PNorms>,
    /// Relative standard error of the mean of ‖ψ‖₁.
    pub l1_relative_standard_error: f64,
    pub energy_check: EnergyCheck,
    pub predicted: Predictions,
    /// All trials kept kernel tails below the audit limit.
    pub reliable: bool,
}

struct Bump {
    /// Flat indices into the frequency grid with χ and the multiplier value there.
    cells: Vec<(usize, f64, f64)>,
    energy: f64,
}

fn bumps_on_grid(
    domain: &ConvexDomain,
    layout: &BumpLayout,
    spec: &GridSpec,
    delta: f64,
    lambda: f64,
) -> Vec<Bump> {
    let n = spec.n;
    let scale = 2f64.powi(layout.r);
    let reach = 2.0 / scale;
    let dxi = spec.dxi();
    let amp = delta.powf(lambda);
    let index_range = |axis: usize, centre: f64| {
        let k0 = (spec.n / 2) as f64;
        let lo = ((centre - reach - spec.freq_center[axis]) / dxi + k0).ceil().max(0.0) as usize;
        let hi = ((centre + reach - spec.freq_center[axis]) / dxi + k0).floor().min((n - 1) as f64) as usize;
        lo..=hi
    };
    layout
        .centres
        .iter()
        .map(|&[p1, p2]| {
            let mut cells = Vec::new();
            let mut energy = 0.0;
            for k2 in index_range(1, p2) {
                let y = spec.xi(1, k2);
                let cy = plateau(scale * (y - p2));
                if cy == 0.0 {
                    continue;
                }
                for k1 in index_range(0, p1) {
                    let x = spec.xi(0, k1);
                    let chi = cy * plateau(scale * (x - p1));
                    if chi == 0.0 {
                        continue;
                    }
                    let m = amp * plateau((1.0 - domain.rho(Vec2::new(x, y))) / delta);
                    energy += chi * chi;
                    cells.push((k2 * n + k1, chi, m));
                }
            }
            Bump { cells, energy: energy * dxi * dxi }
        })
        .collect()
}

/// Frequency grid centred on the bumps, with a small margin around them.
fn experiment_grid(domain: &ConvexDomain, layout: &BumpLayout, delta: f64, n: usize) -> Result<GridSpec> {
    let reach = 2.0 * 2f64.powi(-layout.r);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for c in &layout.centres {
        for a in 0..2 {
            lo[a] = lo[a].min(c[a] - reach);
            hi[a] = hi[a].max(c[a] + reach);
        }
    }
    let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let half = (0.5 * (hi[0] - lo[0])).max(0.5 * (hi[1] - lo[1]));
    let spec = GridSpec::for_frequency_window(n, centre, WINDOW_MARGIN * half)?;
    let bump_cells = 2f64.powi(-layout.r) / spec.dxi();
    if bump_cells < BUMP_CELLS {
        return Err(Error::Resolution(format!(
            "bump scale 2^-{} spans {bump_cells:.2} cells; need {BUMP_CELLS}",
            layout.r
        )));
    }
    let shell = 2.0 * delta * domain.polygon.inradius();
    if shell < MIN_SHELL_CELLS * spec.dxi() {
        return Err(Error::Resolution(format!("shell thickness {shell:e} under-resolved by Δξ = {:e}", spec.dxi())));
    }
    Ok(spec)
}

fn signed_field(spec: GridSpec, bumps: &[Bump], signs: &[f64], with_multiplier: bool) -> Result<GridField> {
    let mut f = GridField::zeros(spec, Space::Frequency);
    for (b, &s) in bumps.iter().zip(signs) {
        for &(idx, chi, m) in &b.cells {
            let v = if with_multiplier { s * chi * m } else { s * chi };
            f.data[idx] += Complex64::new(v, 0.0);
        }
    }
    f.to_physical()
}

pub fn khinchine_experiment(domain: &ConvexDomain, config: &KhinchineConfig) -> Result<KhinchineReport> {
    let delta = config.delta;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if config.trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    if config.p_list.is_empty() || config.p_list.iter().any(|p| !(1.0..=2.0).contains(p)) {
        return Err(Error::param("p", "each p must lie in [1, 2]"));
    }
    let layout = select_bumps(domain, delta)?;
    let spec = experiment_grid(domain, &layout, delta, config.grid)?;
    let bumps = bumps_on_grid(domain, &layout, &spec, delta, config.lambda);
    let cover = covering_number(domain, delta, CoverMode::Caps)?;

    let plus = vec![1.0; bumps.len()];
    let measured = signed_field(spec, &bumps, &plus, false)?.lp_norm(2.0).powi(2);
    let bump_sum: f64 = bumps.iter().map(|b| b.energy).sum();
    let energy_check = EnergyCheck { measured, bump_sum, relative_error: (measured - bump_sum).abs() / bump_sum };

    let mut trials = Vec::with_capacity(config.trials);
    for t in 0..config.trials {
        let seed = config.seed.wrapping_add(t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs: Vec<f64> = (0..bumps.len()).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let psi = signed_field(spec, &bumps, &signs, false)?;
        let t_psi = signed_field(spec, &bumps, &signs, true)?;
        let norms = config
            .p_list
            .iter()
            .map(|&p| {
                let (a, b) = (psi.lp_norm(p), t_psi.lp_norm(p));
                PNorms { p, psi: a, t_psi: b, ratio: b / a }
            })
            .collect();
        let audit = l1_with_audit(&psi);
        let t_audit = l1_with_audit(&t_psi);
        trials.push(KhinchineTrial {
            seed,
            norms,
            psi_l1: audit.l1,
            psi_tail_fraction: audit.tail_fraction,
            t_psi_tail_fraction: t_audit.tail_fraction,
            t_psi_annuli: t_audit.annuli,
        });
    }

    let count = trials.len() as f64;
    let mean = (0..config.p_list.len())
        .map(|k| {
            let avg = |f: fn(&PNorms) -> f64| trials.iter().map(|t| f(&t.norms[k])).sum::<f64>() / count;
            PNorms { p: config.p_list[k], psi: avg(|n| n.psi), t_psi: avg(|n| n.t_psi), ratio: avg(|n| n.ratio) }
        })
        .collect();
    let l1: Vec<f64> = trials.iter().map(|t| t.psi_l1).collect();
    let l1_mean = l1.iter().sum::<f64>() / count;
    let l1_rse = if l1.len() > 1 {
        let var = l1.iter().map(|v| (v - l1_mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt() / l1_mean
    } else {
        f64::NAN
    };

    let two_r = 2f64.powi(-2 * layout.r);
    let predicted = Predictions {
        sqrt_qprime: (layout.qprime as f64).sqrt(),
        l2_card: (layout.card() as f64 * two_r).sqrt(),
        l2_cover: (cover as f64 * two_r).sqrt(),
        operator: config.p_list.iter().map(|&p| (p, (cover as f64).sqrt() * delta.powf((p - 1.0) / p))).collect(),
    };
    let reliable = trials.iter().all(|t| t.psi_tail_fraction < TAIL_LIMIT && t.t_psi_tail_fraction < TAIL_LIMIT);
    Ok(KhinchineReport {
        config: config.clone(),
        grid: spec,
        layout,
        covering_number: cover,
        trials,
        mean,
        l1_relative_standard_error: l1_rse,
        energy_check,
        predicted,
        reliable,
    })
}

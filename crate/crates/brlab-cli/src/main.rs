mod args;
mod output;

use std::fmt;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use brlab::constructions::{
    ap_levels, build_ap_domain, build_cantor_domain, cantor_family, disk_domain, square_domain, CantorParams,
    Provenance,
};
use brlab::decomposition::{covering_number, decompose_boundary, dyadic_exponent, kappa_estimate, CoverMode};
use brlab::directions::{extract_directions, DirectionSet};
use brlab::energy::{energy_exponent, sumset_overlap, OverlapPath};
use brlab::fit::loglog_fit;
use brlab::geometry::{ConvexDomain, DomainFile};
use brlab::intervals::IntervalFamily;
use brlab::khinchine::{khinchine_experiment, KhinchineConfig};
use brlab::maximal::{maximal_norm_probe, ProbeTest};
use brlab::multiplier::{kernel_l1, multiplier_grid, sample_multiplier, Bump};
use brlab::Error;
use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::json;

use args::*;
use output::{sidecar_path, Sink};

/// A failure reported on one line of stderr.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    kind: &'static str,
    flag: Option<String>,
    message: String,
}

impl Failure {
    pub fn config(flag: impl Into<String>, message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "config", flag: Some(flag.into()), message: message.into() }
    }

    pub fn audit(message: impl Into<String>) -> Self {
        Failure { code: 3, kind: "audit", flag: None, message: message.into() }
    }

    /// Library error raised while handling the value of `flag`.
    fn from_lib(flag: &str, err: Error) -> Self {
        if err.is_audit() {
            return Failure::audit(err.to_string());
        }
        let flag = match &err {
            Error::InvalidParameter { name, .. } => lib_param_flag(name).unwrap_or(flag).to_string(),
            Error::BudgetExceeded { .. } => "--budget".to_string(),
            _ => flag.to_string(),
        };
        Failure::config(flag, err.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "brlab: error={}", self.kind)?;
        if let Some(flag) = &self.flag {
            write!(f, " flag={flag}")?;
        }
        // Debug formatting keeps the message on one line and quoted.
        write!(f, " message={:?}", self.message.replace('\n', " "))
    }
}

fn lib_param_flag(name: &str) -> Option<&'static str> {
    Some(match name {
        "delta" => "--delta",
        "deltas" => "--deltas",
        "p" => "--p",
        "trials" => "--trials",
        "lambda" => "--lambda",
        "N" => "--grid",
        "kappa" => "--kappa",
        "m" => "--m",
        "depth" => "--depth",
        "c" => "--c",
        "base_shift" => "--base-shift",
        "radius" => "--radius",
        "sides" => "--sides",
        "half_side" => "--half-side",
        "n" => "--n",
        "M" | "vertices" | "type" | "domain" => "--domain",
        _ => return None,
    })
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let flag = match e.get(ContextKind::InvalidArg) {
                Some(ContextValue::String(s)) => s.split_whitespace().next().unwrap_or("").to_string(),
                _ => "-".to_string(),
            };
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", Failure::config(flag, first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if cli.threads == 0 {
        return Err(Failure::config("--threads", "must be at least 1"));
    }
    let config = serde_json::to_value(&cli).expect("config serializes");
    let sink = Sink::new(cli.out_dir.clone(), config)?;
    match &cli.command {
        Command::Construct(a) => construct(&sink, a),
        Command::Decompose(a) => decompose(&sink, a),
        Command::Cover(a) => cover(&sink, a, cli.threads),
        Command::Kappa(a) => kappa(&sink, a),
        Command::Energy(a) => energy(&sink, a),
        Command::Sumset(a) => sumset(&sink, a),
        Command::Maximal(a) => maximal(&sink, a, cli.seed),
        Command::Kernel(a) => kernel(&sink, a, cli.threads),
        Command::Khinchine(a) => khinchine(&sink, a, cli.seed),
    }
}

/// Parses `0.01,2^-8,2^-10..2^-14`. Every scale must be a power of two in (0, 1].
fn parse_scales(flag: &'static str, text: &str) -> Result<Vec<f64>, Failure> {
    let power = |t: &str| -> Result<i32, Failure> {
        let t = t.trim();
        let e = t
            .strip_prefix("2^")
            .and_then(|r| r.trim_start_matches('(').trim_end_matches(')').parse::<i32>().ok())
            .ok_or_else(|| Failure::config(flag, format!("cannot read {t:?} as 2^-e")))?;
        Ok(-e)
    };
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let (a, b) = (power(lo)?, power(hi)?);
            let range: Vec<i32> = if a <= b { (a..=b).collect() } else { (b..=a).rev().collect() };
            out.extend(range.into_iter().map(|e| 2f64.powi(-e)));
        } else if item.starts_with("2^") {
            out.push(2f64.powi(-power(item)?));
        } else {
            let v: f64 = item.parse().map_err(|_| Failure::config(flag, format!("cannot read {item:?} as a number")))?;
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Failure::config(flag, "no scales given"));
    }
    for &d in &out {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Failure::config(flag, format!("scale {d} outside (0, 1]")));
        }
        if dyadic_exponent(d).is_none() {
            return Err(Failure::config(flag, format!("scale {d} is not a power of two")));
        }
    }
    Ok(out)
}

fn parse_scale(flag: &'static str, text: &str) -> Result<f64, Failure> {
    match parse_scales(flag, text)?.as_slice() {
        [d] => Ok(*d),
        _ => Err(Failure::config(flag, "expected a single scale")),
    }
}

/// Reads a domain file and, when present, its metadata sidecar.
fn load_domain(path: &Path) -> Result<ConvexDomain, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config("--domain", format!("{}: {e}", path.display())))?;
    let file: DomainFile =
        serde_json::from_str(&text).map_err(|e| Failure::config("--domain", format!("{}: {e}", path.display())))?;
    let provenance = match fs::read_to_string(sidecar_path(path)) {
        Ok(meta) => {
            let v: serde_json::Value = serde_json::from_str(&meta)
                .map_err(|e| Failure::config("--domain", format!("metadata sidecar: {e}")))?;
            serde_json::from_value(v["result"]["provenance"].clone())
                .map_err(|e| Failure::config("--domain", format!("metadata sidecar: {e}")))?
        }
        Err(_) => Provenance::Custom,
    };
    file.into_domain(provenance).map_err(|e| Failure::from_lib("--domain", e))
}

/// Applies `f` to every item on up to `threads` scoped workers, preserving order.
fn par_map<T: Sync, R: Send>(threads: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn construct(sink: &Sink, a: &ConstructArgs) -> Outcome {
    let lib = |e| Failure::from_lib("--kind", e);
    let (domain, levels) = match a.kind {
        DomainKind::Cantor => {
            let params = CantorParams { m: a.m, base_shift: a.base_shift, c: a.c, ..CantorParams::standard(a.m) };
            let domain = build_cantor_domain(&params, a.depth).map_err(lib)?;
            let families = cantor_family(&params, a.depth).map_err(lib)?;
            (domain, serde_json::to_value(families).expect("families serialize"))
        }
        DomainKind::Ap => {
            let domain = build_ap_domain(a.kappa, a.depth, a.scale).map_err(lib)?;
            let levels = ap_levels(a.kappa, a.depth).map_err(lib)?;
            (domain, serde_json::to_value(levels).expect("levels serialize"))
        }
        DomainKind::Disk => (disk_domain(a.radius, a.sides).map_err(lib)?, json!([])),
        DomainKind::Square => (square_domain(a.half_side).map_err(lib)?, json!([])),
    };
    let file = serde_json::to_value(domain.to_file()).expect("domain serializes");
    let path = sink.write_json(&a.out, "--out", &file)?;
    let meta = sink.envelope(json!({
        "provenance": domain.provenance,
        "vertex_count": domain.polygon.len(),
        "resolution_floor": domain.provenance.resolution_floor(),
        "levels": levels,
    }));
    sink.write_json(&sidecar_path(&a.out), "--out", &meta)?;
    eprintln!("wrote {} ({} vertices)", path.display(), domain.polygon.len());
    Ok(())
}

#[derive(Serialize)]
struct DecomposeRow {
    j: usize,
    a_j: f64,
    gap: f64,
    slope: f64,
    flatness_product: f64,
}

fn decompose(sink: &Sink, a: &DecomposeArgs) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let delta = parse_scale("--delta", &a.delta)?;
    let graph = domain.graph(a.rotation).map_err(|e| Failure::from_lib("--rotation", e))?;
    let dec = decompose_boundary(&graph, delta, domain.m).map_err(|e| Failure::from_lib("--delta", e))?;
    let rows: Vec<DecomposeRow> = dec
        .intervals()
        .enumerate()
        .map(|(j, (lo, hi))| DecomposeRow {
            j,
            a_j: lo,
            gap: hi - lo,
            slope: dec.slopes[j],
            flatness_product: (hi - lo) * (graph.left_slope(hi) - graph.right_slope(lo)),
        })
        .collect();
    sink.write_csv(&a.csv, "--csv", &rows)?;
    eprintln!("Q = {} (bound {:.1})", dec.count(), dec.count_bound());
    Ok(())
}

#[derive(Serialize)]
struct CoverRow {
    delta: f64,
    greedy_count: usize,
    rotation_proxy: usize,
}

fn cover(sink: &Sink, a: &CoverArgs, threads: usize) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let deltas = parse_scales("--deltas", &a.deltas)?;
    if a.angles == 0 {
        return Err(Failure::config("--angles", "must be at least 1"));
    }
    let rows = par_map(threads, &deltas, |&delta| -> Result<CoverRow, Failure> {
        let lib = |e| Failure::from_lib("--deltas", e);
        Ok(CoverRow {
            delta,
            greedy_count: covering_number(&domain, delta, CoverMode::Caps).map_err(lib)?,
            rotation_proxy: covering_number(&domain, delta, CoverMode::RotationSum { angles: a.angles }).map_err(lib)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    sink.write_csv(&a.csv, "--csv", &rows)?;
    Ok(())
}

fn kappa(sink: &Sink, a: &KappaArgs) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let deltas = parse_scales("--deltas", &a.deltas)?;
    let mode = match a.mode {
        CoverKind::Caps => CoverMode::Caps,
        CoverKind::Rotation => CoverMode::RotationSum { angles: a.angles },
    };
    let est = kappa_estimate(&domain, &deltas, mode).map_err(|e| Failure::from_lib("--deltas", e))?;
    let report = sink.envelope(&est);
    match &a.json {
        Some(path) => {
            sink.write_json(path, "--json", &report)?;
            eprintln!("kappa = {:.4}", est.kappa);
        }
        None => sink.print_json(&report),
    }
    Ok(())
}

#[derive(Serialize)]
struct EnergyRow {
    delta: f64,
    #[serde(rename = "K")]
    k: Option<usize>,
    #[serde(rename = "M0")]
    m0: usize,
    #[serde(rename = "M1_measured")]
    m1_measured: u64,
    #[serde(rename = "M1_bound")]
    m1_bound: Option<f64>,
    xi_upper: f64,
}

fn energy(sink: &Sink, a: &EnergyArgs) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let deltas = parse_scales("--deltas", &a.deltas)?;
    if a.n == 0 {
        return Err(Failure::config("--n", "must be at least 1"));
    }
    let ex = energy_exponent(&domain, a.n, &deltas).map_err(|e| Failure::from_lib("--deltas", e))?;
    let rows: Vec<EnergyRow> = ex
        .points
        .iter()
        .map(|p| EnergyRow {
            delta: p.delta,
            k: p.level,
            m0: p.m0,
            m1_measured: p.m1,
            m1_bound: p.m1_bound,
            xi_upper: p.xi,
        })
        .collect();
    sink.write_csv(&a.csv, "--csv", &rows)?;
    eprintln!("fitted exponent {:.4}", ex.exponent);
    Ok(())
}

#[derive(Deserialize)]
struct IntervalInput {
    denom: i128,
    intervals: Vec<(i128, i128)>,
}

fn sumset(sink: &Sink, a: &SumsetArgs) -> Outcome {
    let text = fs::read_to_string(&a.intervals)
        .map_err(|e| Failure::config("--intervals", format!("{}: {e}", a.intervals.display())))?;
    let input: IntervalInput = serde_json::from_str(&text).map_err(|e| Failure::config("--intervals", e.to_string()))?;
    if input.denom <= 0 {
        return Err(Failure::config("--intervals", "denom must be positive"));
    }
    let family = IntervalFamily { denom: input.denom, intervals: input.intervals };
    if !family.is_sorted_disjoint() {
        return Err(Failure::config("--intervals", "intervals must be sorted, nonempty and disjoint"));
    }
    let path = match a.path {
        PathKind::Enumerate => OverlapPath::Enumerate,
        PathKind::Convolve => OverlapPath::Convolve,
    };
    let ov = sumset_overlap(&family.intervals, a.n, path, a.budget).map_err(|e| Failure::from_lib("--n", e))?;
    let report = sink.envelope(json!({
        "n": a.n,
        "count": family.len(),
        "multiplicity": ov.multiplicity,
        "witness": ov.witness,
        "witness_value": ov.witness as f64 / family.denom as f64,
    }));
    match &a.json {
        Some(p) => {
            sink.write_json(p, "--json", &report)?;
        }
        None => sink.print_json(&report),
    }
    Ok(())
}

#[derive(Serialize)]
struct MaximalRow {
    delta: f64,
    p: f64,
    directions: usize,
    grid: usize,
    test_name: &'static str,
    work: f64,
    ratio: Option<f64>,
    fitted_beta: Option<f64>,
}

fn read_angles(path: &str) -> Result<DirectionSet, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config("--directions", format!("{path}: {e}")))?;
    let angles: Vec<f64> = serde_json::from_str(&text).map_err(|e| Failure::config("--directions", e.to_string()))?;
    DirectionSet::new(angles).map_err(|e| Failure::from_lib("--directions", e))
}

fn directions_for(spec: &[String], delta: f64) -> Result<DirectionSet, Failure> {
    let bad = |m: &str| Failure::config("--directions", m.to_string());
    let [kind, value] = spec else {
        return Err(bad("expected KIND VALUE"));
    };
    match kind.as_str() {
        "equispaced" => {
            let count = if value == "auto" {
                (1.0 / delta).round() as usize
            } else {
                value.parse().map_err(|_| bad("equispaced needs a count or `auto`"))?
            };
            if count == 0 {
                return Err(bad("equispaced needs at least one direction"));
            }
            Ok(DirectionSet::equispaced(count))
        }
        "lacunary" => {
            let levels: usize = value.parse().map_err(|_| bad("lacunary needs a level count"))?;
            Ok(DirectionSet::lacunary(levels))
        }
        "domain" => {
            let domain = load_domain(Path::new(value)).map_err(|f| Failure { flag: Some("--directions".into()), ..f })?;
            extract_directions(&domain.polygon, delta).map_err(|e| Failure::from_lib("--directions", e))
        }
        "cantor-angles" => read_angles(value),
        other => Err(bad(&format!("unknown direction source {other:?}"))),
    }
}

fn test_name(t: ProbeTest) -> &'static str {
    match t {
        ProbeTest::Ball => "ball",
        ProbeTest::Bush => "bush",
        ProbeTest::RandomSparse => "random_sparse",
    }
}

fn maximal(sink: &Sink, a: &MaximalArgs, seed: u64) -> Outcome {
    let deltas = parse_scales("--delta", &a.delta)?;
    let tests: Vec<ProbeTest> = a
        .tests
        .iter()
        .map(|t| match t {
            TestKind::Ball => ProbeTest::Ball,
            TestKind::Bush => ProbeTest::Bush,
            TestKind::RandomSparse => ProbeTest::RandomSparse,
        })
        .collect();
    let mut rows = Vec::new();
    let mut best = Vec::new();
    for &delta in &deltas {
        let dirs = directions_for(&a.directions, delta)?;
        let n = a.grid.unwrap_or_else(|| ((4.0 / delta).ceil() as usize).next_power_of_two());
        let report = maximal_norm_probe(&dirs, delta, a.p, n, &tests, seed, a.budget)
            .map_err(|e| Failure::from_lib("--delta", e))?;
        for o in &report.outcomes {
            rows.push(MaximalRow {
                delta,
                p: a.p,
                directions: report.directions,
                grid: n,
                test_name: test_name(o.test),
                work: o.work,
                ratio: o.ratio,
                fitted_beta: None,
            });
        }
        if report.winner.is_none() {
            return Err(Failure::config("--budget", format!("every test exceeds the work budget at δ = {delta:e}")));
        }
        best.push((delta, report.best_ratio));
    }
    if best.len() >= 2 {
        let xs: Vec<f64> = best.iter().map(|b| 1.0 / b.0).collect();
        let ys: Vec<f64> = best.iter().map(|b| b.1).collect();
        let fit = loglog_fit(&xs, &ys).map_err(|e| Failure::from_lib("--delta", e))?;
        for r in &mut rows {
            r.fitted_beta = Some(fit.slope);
        }
        eprintln!("fitted exponent {:.4}", fit.slope);
    }
    sink.write_csv(&a.csv, "--csv", &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct KernelRow {
    delta: f64,
    lambda: f64,
    grid: usize,
    l1: f64,
    tail_fraction: f64,
    reliable: bool,
}

fn kernel(sink: &Sink, a: &KernelArgs, threads: usize) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let deltas = parse_scales("--deltas", &a.deltas)?;
    if !(a.lambda >= 0.0) {
        return Err(Failure::config("--lambda", "must be nonnegative"));
    }
    let bump = match a.bump {
        BumpKind::Polynomial => Bump::Polynomial,
        BumpKind::SmoothedTent => Bump::SmoothedTent,
    };
    let rows = par_map(threads, &deltas, |&delta| -> Result<KernelRow, Failure> {
        let spec = multiplier_grid(&domain, delta, a.grid, a.oversample).map_err(|e| Failure::from_lib("--grid", e))?;
        let m = sample_multiplier(&domain, delta, a.lambda, bump, spec).map_err(|e| Failure::from_lib("--deltas", e))?;
        let k = kernel_l1(&m).map_err(|e| Failure::from_lib("--grid", e))?;
        Ok(KernelRow { delta, lambda: a.lambda, grid: a.grid, l1: k.l1, tail_fraction: k.tail_fraction, reliable: k.reliable })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    sink.write_csv(&a.csv, "--csv", &rows)?;
    if let Some(bad) = rows.iter().find(|r| !r.reliable) {
        return Err(Failure::audit(format!(
            "kernel tail at δ = {:e} holds {:.3} of the mass; results written but unreliable",
            bad.delta, bad.tail_fraction
        )));
    }
    Ok(())
}

fn khinchine(sink: &Sink, a: &KhinchineArgs, seed: u64) -> Outcome {
    let domain = load_domain(&a.domain)?;
    let delta = parse_scale("--delta", &a.delta)?;
    let config = KhinchineConfig { delta, lambda: a.lambda, p_list: a.p.clone(), trials: a.trials, seed, grid: a.grid };
    let report = khinchine_experiment(&domain, &config).map_err(|e| Failure::from_lib("--delta", e))?;
    sink.write_json(&a.json, "--json", &sink.envelope(&report))?;
    if !report.reliable {
        return Err(Failure::audit("kernel tail audit failed; report written but unreliable"));
    }
    Ok(())
}

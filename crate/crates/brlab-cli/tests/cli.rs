use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn brlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brlab"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn square_cover_has_four_caps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&brlab(dir.path(), &["construct", "--kind", "square", "--out", "sq.json"]));
    assert!(dir.path().join("sq.meta.json").exists());
    ok(&brlab(dir.path(), &["cover", "--domain", "sq.json", "--deltas", "2^-6..2^-10", "--csv", "cover.csv"]));
    let text = fs::read_to_string(dir.path().join("cover.csv")).unwrap();
    assert!(text.starts_with("# brlab "));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[1] == "4"), "{text}");
}

#[test]
fn config_is_embedded_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(&brlab(dir.path(), &["construct", "--kind", "cantor", "--m", "3", "--out", "c3.json"]));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c3.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["command"]["name"], "construct");
    assert_eq!(meta["config"]["command"]["m"], 3);
    assert_eq!(meta["result"]["provenance"]["kind"], "cantor");
    let levels = meta["result"]["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);

    ok(&brlab(dir.path(), &["energy", "--domain", "c3.json", "--n", "3", "--deltas", "2^-8,2^-12", "--csv", "e.csv"]));
    let text = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let config_line = text.lines().nth(1).unwrap().strip_prefix("# config ").unwrap();
    let config: serde_json::Value = serde_json::from_str(config_line).unwrap();
    assert_eq!(config["command"]["deltas"], "2^-8,2^-12");
    assert!(text.contains("delta,K,M0,M1_measured,M1_bound,xi_upper"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--seed", "7", "maximal", "--directions", "equispaced", "8", "--delta", "2^-4,2^-5", "--grid", "128",
        "--tests", "random_sparse,ball",
    ];
    let a: Vec<&str> = args.iter().copied().chain(["--csv", "a.csv"]).collect();
    let b: Vec<&str> = args.iter().copied().chain(["--csv", "b.csv"]).collect();
    ok(&brlab(dir.path(), &a));
    ok(&brlab(dir.path(), &b));
    let read = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap();
    let strip = |s: String| s.lines().skip(2).collect::<Vec<_>>().join("\n");
    let (x, y) = (read("a.csv"), read("b.csv"));
    assert_eq!(strip(x.clone()), strip(y));
    assert_eq!(data_rows(&x).len(), 4);
}

#[test]
fn invalid_scale_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    ok(&brlab(dir.path(), &["construct", "--kind", "square", "--out", "sq.json"]));
    for bad in ["0", "-0.5", "0.3", "2"] {
        let out = brlab(dir.path(), &["decompose", "--domain", "sq.json", "--delta", bad, "--csv", "d.csv"]);
        assert_eq!(out.status.code(), Some(2), "δ = {bad}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.lines().count(), 1);
        assert!(err.contains("flag=--delta"), "{err}");
    }
    let out = brlab(dir.path(), &["cover", "--domain", "missing.json", "--deltas", "2^-6", "--csv", "c.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flag=--domain"));
}

#[test]
fn unresolved_kernel_exits_with_audit_code() {
    let dir = tempfile::tempdir().unwrap();
    ok(&brlab(dir.path(), &["construct", "--kind", "disk", "--sides", "4096", "--out", "disk.json"]));
    let out = brlab(dir.path(), &["kernel", "--domain", "disk.json", "--deltas", "2^-8", "--grid", "256", "--csv", "k.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error=audit"));
    assert!(dir.path().join("k.csv").exists());
}

#[test]
fn decompose_rows_respect_flatness() {
    let dir = tempfile::tempdir().unwrap();
    ok(&brlab(dir.path(), &["construct", "--kind", "disk", "--sides", "65536", "--out", "disk.json"]));
    ok(&brlab(dir.path(), &["decompose", "--domain", "disk.json", "--delta", "2^-10", "--csv", "d.csv"]));
    let rows = data_rows(&fs::read_to_string(dir.path().join("d.csv")).unwrap());
    assert!(rows.len() > 10);
    let delta = 2f64.powi(-10);
    for r in &rows {
        let product: f64 = r[4].parse().unwrap();
        assert!(product <= delta * (1.0 + 1e-9), "{r:?}");
    }
}

#[test]
fn sumset_reports_multiplicity() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("i.json"), r#"{"denom": 10, "intervals": [[0, 2], [5, 6]]}"#).unwrap();
    let out = brlab(dir.path(), &["sumset", "--intervals", "i.json", "--n", "2", "--path", "enumerate"]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["count"], 2);
    let conv = brlab(dir.path(), &["sumset", "--intervals", "i.json", "--n", "2"]);
    let w: serde_json::Value = serde_json::from_slice(&conv.stdout).unwrap();
    assert_eq!(v["result"]["multiplicity"], w["result"]["multiplicity"]);
}

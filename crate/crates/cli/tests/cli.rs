use std::path::Path;
use std::process::{Command, Output};

fn aqrm(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqrm")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_four_identities() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["verify", "--eps", "1/2", "--g", "4/5", "--delta", "7/10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = json(&dir.path().join("verify_eps1_2_g4_5_delta7_10.json"));
    let ids = report["identities"].as_array().unwrap();
    assert_eq!(ids.len(), 4);
    assert!(ids.iter().all(|r| r["holds"] == true && r["residual_norm"] == "0"));
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_rejects_uncatalogued_bias() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["verify", "--eps", "1/3", "--g", "4/5", "--delta", "7/10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("±1/2"));
}

#[test]
fn verify_zero_bias_reports_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["verify", "--eps", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS  J^2 = 1"));
}

#[test]
fn verify_negative_bias_symbolic() {
    let dir = tempfile::tempdir().unwrap();
    for eps in ["-1/2", "-1", "1"] {
        assert_eq!(aqrm(dir.path(), &["verify", "--eps", eps]).status.code(), Some(0), "ε = {}", eps);
    }
}

#[test]
fn exact_commands_reject_decimals() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqrm(dir.path(), &["verify", "--eps", "0.5"]).status.code(), Some(2));
    assert_eq!(aqrm(dir.path(), &["export-op", "--eps", "1/2", "--g", "0.8"]).status.code(), Some(2));
}

#[test]
fn derive_reports_bias_conditions() {
    let dir = tempfile::tempdir().unwrap();
    for (m, condition, roots) in [(0, "α·ε = 0", "ε = 0"), (1, "4ε^2 - 1", "ε = ±1/2"), (2, "ε^2 - 1", "ε = ±1")]
    {
        let o = aqrm(dir.path(), &["derive", "--M", &m.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let s = stdout(&o);
        let first = s.lines().nth(1).unwrap();
        assert!(first.contains(condition) && first.contains("(new)"), "{}", s);
        assert!(s.lines().nth(2).unwrap().trim() == roots, "{}", s);
        let report = json(&dir.path().join(format!("derive_M{}.json", m)));
        assert_eq!(report["M"], m);
        assert!(!report["solutions"].as_array().unwrap().is_empty());
    }
}

#[test]
fn derive_surfaces_exhausted_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["derive", "--M", "2", "--bound", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("function basis exhausted"));
    assert_eq!(aqrm(dir.path(), &["derive", "--M", "3"]).status.code(), Some(2));
}

#[test]
fn scan_flags_crossings_only_at_special_bias() {
    let dir = tempfile::tempdir().unwrap();
    let special = aqrm(dir.path(), &["scan", "--eps", "0.5"]);
    assert_eq!(special.status.code(), Some(0));
    let s = stdout(&special);
    assert!(s.contains("crossing pair(s)") && s.lines().any(|l| l.ends_with("crossing")), "{}", s);

    let generic = aqrm(dir.path(), &["scan", "--eps", "0.45"]);
    assert_eq!(generic.status.code(), Some(0));
    assert!(stdout(&generic).contains("no crossings detected"));

    let csv = std::fs::read_to_string(dir.path().join("scan_eps0.5.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("g,eps,delta,level,energy,certified"));
    assert_eq!(csv.lines().count(), 1 + 401 * 8);
}

#[test]
fn scan_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args =
        ["scan", "--eps", "1/2", "--g-min", "0.3", "--g-max", "0.7", "--steps", "40", "--N", "30", "--levels", "4"];
    assert_eq!(aqrm(a.path(), &args).status.code(), Some(0));
    assert_eq!(aqrm(b.path(), &args).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("scan_eps1_2.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn scan_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["scan", "--eps", "0.5", "--g-min", "1", "--g-max", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(aqrm(dir.path(), &["scan", "--eps", "0.5", "--steps", "0"]).status.code(), Some(2));
}

#[test]
fn discover_half_bias_matches_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["discover", "--eps", "1/2", "--D", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("normalized against the catalog"));
    let r = json(&dir.path().join("discover_eps1_2_D1.json"));
    assert_eq!(r["nullspace_dimension"], 1);
    assert!(r["catalog_deviation"].as_f64().unwrap() < 1e-9);
    let fit = json(&dir.path().join("fit_eps1_2_M1.json"));
    // λ = 4g² + Δ²/g² + 2 at g = 0.8, Δ = 0.7
    let alphas: Vec<f64> = fit["alphas"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
    assert!((alphas[0] - 5.325625).abs() < 1e-9 && (alphas[1] - 4.0).abs() < 1e-9, "{:?}", alphas);
}

#[test]
fn discover_generic_bias_finds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["discover", "--eps", "0.3", "--D", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("discover_eps0.3_D1.json"))["nullspace_dimension"], 0);
    assert!(!dir.path().join("fit_eps0.3_M1.json").exists());
}

#[test]
fn discover_three_halves_fits_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["discover", "--eps", "3/2", "--D", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&dir.path().join("discover_eps3_2_D3.json"))["exact_verified"], true);
    let fit = json(&dir.path().join("fit_eps3_2_M3.json"));
    assert_eq!(fit["alphas"].as_array().unwrap().len(), 4);
    assert!(fit["relative_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn discover_rejects_small_truncation_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqrm(dir.path(), &["discover", "--eps", "1/2", "--D", "3", "--N", "10"]).status.code(), Some(2));
    assert_eq!(aqrm(dir.path(), &["discover", "--eps", "1/2", "--D", "1", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn fit_jsq_agrees_with_exact_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["fit-jsq", "--eps", "-1", "--g", "0.6", "--delta", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let fit = json(&dir.path().join("fit_epsm1_M2.json"));
    let get = |k: &str| -> Vec<f64> { fit[k].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect() };
    for (a, b) in get("alphas").iter().zip(get("predicted_alphas")) {
        assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{} vs {}", a, b);
    }
}

#[test]
fn fit_jsq_without_symmetry_fails_checks() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqrm(dir.path(), &["fit-jsq", "--eps", "0.3", "--D", "1"]).status.code(), Some(1));
}

#[test]
fn export_op_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqrm(dir.path(), &["export-op", "--eps", "1", "--g", "1/2", "--delta", "3/4", "--basis", "transformed"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("j_eps1_g1_2_delta3_4_transformed.json"));
    let j: aqrm_core::BlockOp = serde_json::from_value(v).unwrap();
    assert!(!j.is_zero());
    let o = aqrm(dir.path(), &["export-op", "--op", "h", "--eps", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("h_eps1_2_original.json").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_aqrm"))
        .args(["verify", "--eps", "1/2"])
        .env("AQRM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("verify_eps1_2.json").exists());
}

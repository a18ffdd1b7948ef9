use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swipt_ac::config::{ChannelFile, ScenarioFile};
use swipt_ac::oracle::{run_validation, validate, ValidationLevel};
use swipt_ac::report::RunManifest;
use swipt_ac::solver::optimal_splits;
use swipt_ac::{Result, SplitPair, SystemConfig};

fn swipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference_setup.json")
}

fn write_scenario(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(reference_config()).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join("scenario.json");
    fs::write(&path, v.to_string()).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn bundled_config_is_the_reference_scenario() {
    let loaded = ScenarioFile::load(reference_config()).unwrap();
    assert_eq!(loaded.scenario, ScenarioFile::default());
}

#[test]
fn solve_prints_a_feasible_design() {
    let out = swipt(&["solve", "--config", p(&reference_config()), "--seed", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    for key in [
        "feasible        true",
        "w[3]",
        "rho*",
        "phi*",
        "Gamma",
        "eps_bar",
        "rate (worst)",
        "SP_AC",
        "EH_DC",
    ] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn solve_json_record_meets_both_thresholds() {
    let out = swipt(&["solve", "--seed", "3", "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], true);
    let sp_ac = v["sp_ac_mw"].as_f64().unwrap();
    let eh = v["eh_dc_mw"].as_f64().unwrap();
    assert!((sp_ac - 0.00027).abs() < 1e-12, "{sp_ac}");
    assert!((eh - 0.2).abs() < 1e-9, "{eh}");
}

#[test]
fn solve_accepts_an_explicit_channel_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let file = ChannelFile {
        h_hat: vec![[0.1, 0.0], [0.0, 0.1], [-0.1, 0.0], [0.0, -0.1]],
    };
    fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let out = swipt(&["solve", "--channel", p(&path), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gamma = v["gamma_mw"].as_f64().unwrap();
    let expected = SystemConfig::default().radiated_mw() * 0.04;
    assert!(
        (gamma - expected).abs() < 1e-12 * expected,
        "{gamma} vs {expected}"
    );
}

#[test]
fn circuit_power_at_or_above_budget_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), |v| v["system"]["p_circ_dbm"] = 11.0.into());
    let out = swipt(&["solve", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p_circ_dbm"), "{}", stderr(&out));
}

#[test]
fn saturating_harvest_target_is_explained() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), |v| v["system"]["epsilon_mw"] = 3.9.into());
    let out = swipt(&["solve", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("saturat"), "{}", stderr(&out));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), |v| v["system"]["psi"] = "lots".into());
    let out = swipt(&["solve", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("psi"), "{}", stderr(&out));
}

#[test]
fn zero_realizations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = swipt(&["region", "--realizations", "0", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("region.csv").exists());
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = swipt(&[
        "region",
        "--realizations",
        "5",
        "--out",
        p(&blocker.join("sub")),
    ]);
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn region_outputs_match_their_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = swipt(&[
        "region",
        "--seed",
        "1",
        "--realizations",
        "200",
        "--plot",
        "--out",
        p(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = ScenarioFile::load(dir.path().join("region.manifest.json"))
        .unwrap()
        .from_manifest
        .expect("manifest detected");
    assert_eq!(manifest.command, "region");
    assert!(manifest.mismatches(dir.path()).is_empty());
    let files: Vec<&str> = manifest.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(files, ["region.csv", "region.svg"]);
    let csv = fs::read_to_string(dir.path().join("region.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "epsilon_mw,scenario,mean_rate_bpshz,stderr_rate,mean_eh_mw,feasible_frac,n_feasible"
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 40);
}

#[test]
fn tampered_output_is_detected_by_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        swipt(&["csi-sweep", "--realizations", "50", "--out", p(dir.path())])
            .status
            .success()
    );
    let text = fs::read_to_string(dir.path().join("csi_sweep.manifest.json")).unwrap();
    let manifest: RunManifest = serde_json::from_str(&text).unwrap();
    fs::write(dir.path().join("csi_sweep.csv"), b"p0_dbm\n").unwrap();
    assert_eq!(manifest.mismatches(dir.path()), ["csi_sweep.csv"]);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let args = [
            "csi-sweep",
            "--seed",
            "9",
            "--realizations",
            "300",
            "--psi-list",
            "0,0.05",
            "--out",
            p(out),
        ];
        assert!(swipt(&args).status.success());
    }
    for file in ["csi_sweep.csv", "csi_sweep.manifest.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let csv = fs::read_to_string(a.join("csi_sweep.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "p0_dbm,psi,mean_rate_bpshz,stderr_rate,feasible_frac"
    );
    assert_eq!(csv.lines().count(), 1 + 11 * 2);
}

#[test]
fn grid_overrides_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "region",
        "--eps-grid",
        "0.01,0.1,1",
        "--realizations",
        "20",
        "--out",
        p(dir.path()),
    ];
    assert!(swipt(&args).status.success());
    let loaded = ScenarioFile::load(dir.path().join("region.manifest.json")).unwrap();
    assert_eq!(
        loaded.scenario.experiments.epsilon_grid_mw,
        [0.01, 0.1, 1.0]
    );
    assert_eq!(loaded.scenario.experiments.realizations, 20);
}

#[test]
fn fast_validation_passes_with_a_report() {
    let out = swipt(&[
        "validate",
        "--config",
        p(&reference_config()),
        "--level",
        "fast",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "eh_round_trip",
            "grid_equivalence",
            "beamformer_optimality",
            "worst_case_ball",
            "split_balance_perturbation"
        ]
    );
    for c in v["checks"].as_array().unwrap() {
        assert!(c["tolerance"].as_str().is_some_and(|t| !t.is_empty()));
        assert!(c["observed"].is_number());
    }
}

#[test]
fn perturbed_split_rule_fails_grid_equivalence() {
    fn skewed(gamma: f64, theta: f64, eps_bar: f64) -> Result<SplitPair> {
        let s = optimal_splits(gamma, theta, eps_bar)?;
        SplitPair::new(s.rho(), s.phi() * 1.01)
    }
    let config = SystemConfig::default();
    let honest = validate(&config, ValidationLevel::Fast, 1).unwrap();
    assert!(honest.passed);
    let report = run_validation(&config, ValidationLevel::Fast, 1, skewed).unwrap();
    assert!(!report.passed);
    let grid = report
        .checks
        .iter()
        .find(|c| c.name == "grid_equivalence")
        .unwrap();
    assert!(!grid.passed, "{}", grid.detail);
}

#[test]
fn psi_zero_ball_check_is_exact() {
    let report = validate(&SystemConfig::default(), ValidationLevel::Fast, 4).unwrap();
    let ball = report
        .checks
        .iter()
        .find(|c| c.name == "worst_case_ball")
        .unwrap();
    assert!(ball.passed);
    assert!(ball.tolerance.starts_with("psi = 0"));
    assert!(ball.observed.abs() <= 1e-12);
}

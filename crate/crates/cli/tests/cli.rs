//! End-to-end runs of the `weakmeas` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn weakmeas(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weakmeas"));
    cmd.args(args).env_remove("WEAKMEAS_SEED");
    if let Some(s) = env_seed {
        cmd.env("WEAKMEAS_SEED", s);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn saturation_args(out: &Path) -> Vec<String> {
    [
        "saturation",
        "--delta",
        "20",
        "--n-steps",
        "10",
        "--trajectories",
        "500",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.to_string_lossy().into_owned()])
    .collect()
}

fn run_saturation(out: &Path, extra: &[&str], env_seed: Option<&str>) -> Output {
    let mut args = saturation_args(out);
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    weakmeas(&refs, env_seed)
}

#[test]
fn unknown_config_field_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"drift","dt":1e-3,"t_end":0.1,"trajectories":10,"seed":1,"wobble":3}"#,
    );
    let out = dir.path().join("o.csv");
    let o = weakmeas(
        &[
            "drift",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wobble"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"drift","dt":1e-3,"trajectories":10,"seed":1}"#,
    );
    let out = dir.path().join("o.csv");
    let o = weakmeas(
        &[
            "drift",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("'t_end'"), "{}", stderr(&o));
}

#[test]
fn missing_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_saturation(&dir.path().join("s.csv"), &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("'seed'"), "{}", stderr(&o));
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment":"single","delta":1,"samples":10,"seed":1}"#,
    );
    let out = dir.path().join("o.csv");
    let o = weakmeas(
        &[
            "drift",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    // Δ² overflows, so the quadrature produces NaN
    let o = weakmeas(
        &[
            "completeness",
            "--delta",
            "1e200",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing-dir").join("s.csv");
    let o = run_saturation(&out, &["--seed", "1"], None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn seed_precedence_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str, extra: &[&str], env: Option<&str>| {
        let out = dir.path().join(name);
        let o = run_saturation(&out, extra, env);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let flag = read("flag.csv", &["--seed", "42"], None);
    let again = read("again.csv", &["--seed", "42"], None);
    let env = read("env.csv", &[], Some("42"));
    let flag_wins = read("wins.csv", &["--seed", "42"], Some("7"));
    let other = read("other.csv", &[], Some("7"));
    assert_eq!(flag, again);
    assert_eq!(flag, env);
    assert_eq!(flag, flag_wins);
    assert_ne!(flag, other);

    let cfg = write_config(
        dir.path(),
        "seeded.json",
        r#"{"experiment":"saturation","delta":20,"n_steps":10,"trajectories":500,"seed":42}"#,
    );
    let file_wins = read("file.csv", &["--config", cfg.to_str().unwrap()], Some("7"));
    assert_eq!(flag, file_wins);
}

#[test]
fn saturation_output_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sat.csv");
    let o = run_saturation(&out, &["--seed", "5"], None);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,t,fbar_mc,fbar_se,fbar_closed"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[2], "5.0000000000000000e-1");
    assert_eq!(first[4], "5.0000000000000000e-1");
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!(r[2] >= 0.5 && r[2] <= 1.0);
        assert!(r[4] >= 0.5 && r[4] <= 2.0 / 3.0);
    }

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sat.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["experiment"], "saturation");
    assert_eq!(sidecar["config"]["seed"], 5);
    assert_eq!(sidecar["config"]["delta"], 20.0);
    assert_eq!(sidecar["rows"], 11);
    let columns: Vec<&str> = sidecar["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(columns, ["n", "t", "fbar_mc", "fbar_se", "fbar_closed"]);
    assert!(sidecar["version"]
        .as_str()
        .unwrap()
        .starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn every_experiment_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "saturation",
            r#"{"delta":20,"n_steps":20,"n_stride":5,"trajectories":200,"seed":1}"#,
        ),
        (
            "drift",
            r#"{"dt":1e-3,"t_end":0.2,"trajectories":200,"seed":1}"#,
        ),
        ("single", r#"{"deltas":[0.5,2],"samples":2000,"seed":1}"#),
        (
            "equivalence",
            r#"{"deltas":[0.5,2],"samples":2000,"seed":1}"#,
        ),
        (
            "propagator",
            r#"{"dt":1e-3,"t_end":0.2,"seed":1,"apriori":[0,0.6,0.8]}"#,
        ),
        ("completeness", r#"{"deltas":[0.1,1,20]}"#),
        (
            "sequence_vs_continuum",
            r#"{"delta":20,"n_steps":40,"n_stride":10,"dt":1e-3,"trajectories":200,"seed":1}"#,
        ),
    ];
    for (name, body) in configs {
        let cfg = write_config(dir.path(), &format!("{name}-config.json"), body);
        let out = dir.path().join(format!("{name}.csv"));
        let o = weakmeas(
            &[
                name,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            None,
        );
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let header = text.lines().next().unwrap();
        let width = header.split(',').count();
        assert!(text.lines().count() > 1, "{name}");
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), width, "{name}: {line}");
        }
        assert!(dir.path().join(format!("{name}.json")).exists());
    }
}

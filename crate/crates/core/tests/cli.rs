use std::path::Path;
use std::process::Command;

use hetdoa::io::{read_rmse_csv, read_snapshots, read_spectrum_csv};

const CONFIG: &str = r#"
methods = ["CBF", "SBL2"]
snapshots = [12]
n_trials = 3
base_seed = 17

[geometry]
n_sensors = 10

[scenario]
doas_deg = [20.0]
powers_db = [0.0]

[noise]
cases = ["II"]
snr_db = [0.0, 10.0]
"#;

fn hetdoa(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hetdoa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_then_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONFIG);
    let out = dir.path().to_str().unwrap();
    let o = hetdoa(&["simulate", "--config", &cfg, "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let snaps = dir.path().join("snapshots.json");
    let y = read_snapshots(&snaps).unwrap();
    assert_eq!((y.n_sensors(), y.n_snapshots()), (10, 12));
    assert_eq!(y.seed, Some(17));

    let spec_dir = dir.path().join("spec");
    let o = hetdoa(&[
        "spectrum",
        "--input",
        snaps.to_str().unwrap(),
        "--method",
        "SBL2",
        "--config",
        &cfg,
        "--out",
        spec_dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("SBL2: DOA estimate [20] deg"), "{stdout}");
    let s = read_spectrum_csv(&std::fs::read_to_string(spec_dir.join("spectrum.csv")).unwrap()).unwrap();
    assert_eq!(s.values.len(), 360);
    for f in ["spectrum.gp", "sbl_gamma.csv", "sbl_meta.json"] {
        assert!(spec_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn spectrum_rejects_mismatched_array() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONFIG);
    let other = write_config(dir.path(), "d.toml", &CONFIG.replace("n_sensors = 10", "n_sensors = 12"));
    let out = dir.path().to_str().unwrap();
    assert!(hetdoa(&["simulate", "--config", &cfg, "--out", out]).status.success());
    let snaps = dir.path().join("snapshots.json");
    let o = hetdoa(&["spectrum", "--input", snaps.to_str().unwrap(), "--config", &other, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("typo.toml", CONFIG.replace("n_trials", "ntrials")),
        ("empty.toml", CONFIG.replace("methods = [\"CBF\", \"SBL2\"]", "methods = []")),
        ("offgrid.toml", CONFIG.replace("[20.0]", "[20.25]")),
    ] {
        let cfg = write_config(dir.path(), name, &text);
        let o = hetdoa(&["benchmark", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let o = hetdoa(&["benchmark", "--config", "/nonexistent/c.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONFIG);
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let o = hetdoa(&["benchmark", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("rmse.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a, b);
    let rows = read_rmse_csv(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.n_trials == 3 && r.rmse_deg.is_finite()));
}

#[test]
fn noise_study_refuses_noise_free_data() {
    let dir = tempfile::tempdir().unwrap();
    let text = CONFIG
        .replace("[\"CBF\", \"SBL2\"]", "[\"SBL2\", \"SBL2-EM\"]")
        .replace("[0.0, 10.0]", "[inf]");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = hetdoa(&["noise-study", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("without noise"));
}

#[test]
fn noise_study_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = CONFIG.replace("[\"CBF\", \"SBL2\"]", "[\"SBL2\", \"SBL2-EM\"]");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = hetdoa(&["noise-study", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("noise_trace.csv")).unwrap();
    assert!(trace.starts_with("# hetdoa noise-trace v1\n"));
    assert!(trace.lines().any(|l| l.starts_with("SBL2-EM,")));
    assert!(dir.path().join("noise_histogram.csv").exists());
}

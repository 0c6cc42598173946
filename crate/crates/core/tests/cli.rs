use std::fs;
use std::path::{Path, PathBuf};

use spinsyn::actor::UpdateRule;
use spinsyn::cli::{run, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use spinsyn::harness::TrialResult;
use spinsyn::output::{learning_curve_csv, plot_csv, Table};

fn spinsyn(args: &[&str]) -> i32 {
    run(std::iter::once("spinsyn").chain(args.iter().copied()))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn write_cfg(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn missing_config_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    assert_eq!(spinsyn(&["compare", "--config", "/no/such/file.cfg", "--out", out.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn bad_key_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "actor.alpha_flip = 0.1\ncritic.colour = blue\n");
    assert_eq!(spinsyn(&["train", "--config", &cfg, "--out", d.path().to_str().unwrap()]), EXIT_USAGE);
    let cfg = write_cfg(d.path(), "device.g_min = 1e-3\n");
    assert_eq!(spinsyn(&["device-map", "--config", &cfg, "--out", d.path().to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(spinsyn(&["launch"]), EXIT_USAGE);
    assert_eq!(spinsyn(&[]), EXIT_USAGE);
    assert_eq!(spinsyn(&["train", "--rule", "cubic"]), EXIT_USAGE);
    assert_eq!(spinsyn(&["compare", "--parallelism", "0"]), EXIT_USAGE);
    assert_eq!(spinsyn(&["compare", "--seed", "-4"]), EXIT_USAGE);
}

#[test]
fn unwritable_out_dir_is_runtime_error() {
    let d = tempfile::tempdir().unwrap();
    let blocker = d.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    assert_eq!(spinsyn(&["device-map", "--out", out.to_str().unwrap()]), EXIT_RUNTIME);
}

#[test]
fn plot_of_unknown_csv_is_runtime_error() {
    let d = tempfile::tempdir().unwrap();
    let f = d.path().join("odd.csv");
    fs::write(&f, "a,b\n1,2\n").unwrap();
    assert_eq!(spinsyn(&["plot", f.to_str().unwrap(), "--out", d.path().to_str().unwrap()]), EXIT_RUNTIME);
    let missing = d.path().join("missing.csv");
    assert_eq!(spinsyn(&["plot", missing.to_str().unwrap()]), EXIT_RUNTIME);
}

#[test]
fn device_map_writes_reference_cell() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("nested/out");
    assert_eq!(spinsyn(&["device-map", "--out", out.to_str().unwrap()]), EXIT_OK);
    let t = Table::parse(&fs::read_to_string(out.join("pulse_map.csv")).unwrap()).unwrap();
    assert_eq!(t.header_line(), "voltage_v,duration_s,onoff_ratio");
    let v = t.f64_column("voltage_v").unwrap();
    let dur = t.f64_column("duration_s").unwrap();
    let r = t.f64_column("onoff_ratio").unwrap();
    let i = (0..v.len()).find(|&i| v[i] == 2.5 && dur[i] == 0.005).expect("reference cell");
    assert!((r[i] - 47.0).abs() <= 0.5);
    assert_eq!(spinsyn(&["plot", out.join("pulse_map.csv").to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_OK);
    assert!(fs::read_to_string(out.join("pulse_map.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn train_writes_curves_and_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "harness.n_trials = 3\nharness.max_epochs = 40\n");
    let a = d.path().join("a");
    let b = d.path().join("b");
    for (out, par) in [(&a, "1"), (&b, "3")] {
        let code = spinsyn(&[
            "train", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11", "--rule", "linear",
            "--parallelism", par,
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let text = fs::read(a.join("learning_curve.csv")).unwrap();
    assert_eq!(text, fs::read(b.join("learning_curve.csv")).unwrap());
    let t = Table::parse(std::str::from_utf8(&text).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 3 * 40);
    assert!(t.f64_column("filtered_reward").unwrap().iter().all(|v| (0.0..=1.0).contains(v)));
    let c = d.path().join("c");
    spinsyn(&["train", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "12", "--rule", "linear"]);
    assert_ne!(text, fs::read(c.join("learning_curve.csv")).unwrap());
}

#[test]
fn sweep_writes_one_row_per_lr() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "harness.n_trials = 2\nharness.max_epochs = 20\nharness.lr_sweep_from = 0.5\nharness.lr_sweep_to = 0.6\n");
    assert_eq!(spinsyn(&["sweep", "--config", &cfg, "--out", d.path().to_str().unwrap()]), EXIT_OK);
    let t = Table::parse(&fs::read_to_string(d.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(t.header_line(), "rule,lr_hidden,mean_epochs,std_epochs,n_converged");
    assert_eq!(t.str_column("rule").unwrap(), ["powerlaw", "powerlaw", "powerlaw", "linear", "linear", "linear"]);
}

#[test]
fn compare_with_too_few_converged_fails_at_runtime() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "harness.n_trials = 2\nharness.max_epochs = 10\n");
    assert_eq!(spinsyn(&["compare", "--config", &cfg, "--out", d.path().to_str().unwrap()]), EXIT_RUNTIME);
}

#[test]
fn learning_curve_csv_round_trips() {
    let trials: Vec<TrialResult> = (0..2)
        .map(|trial| TrialResult {
            trial,
            seed: 1,
            rule: UpdateRule::PowerLaw,
            lr_hidden: 1.1,
            raw_curve: vec![0.1 * trial as f64, 1.0 / 3.0, 0.7],
            filtered_curve: vec![0.5005, 0.500_499_5 + 1e-17, std::f64::consts::FRAC_1_PI],
            epochs_to_goal: None,
        })
        .collect();
    let text = learning_curve_csv(&trials);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "trial,epoch,raw_reward,filtered_reward");
    // independent parse with the standard library only
    for (k, line) in lines[1..].iter().enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let (ti, ei) = (k / 3, k % 3);
        assert_eq!(f[0].parse::<usize>().unwrap(), ti);
        assert_eq!(f[1].parse::<usize>().unwrap(), ei + 1);
        assert_eq!(f[2].parse::<f64>().unwrap().to_bits(), trials[ti].raw_curve[ei].to_bits());
        assert_eq!(f[3].parse::<f64>().unwrap().to_bits(), trials[ti].filtered_curve[ei].to_bits());
    }
}

#[test]
fn svg_matches_golden() {
    for name in ["learning_curve_small", "pulse_map_small"] {
        let csv = fs::read_to_string(golden(&format!("{name}.csv"))).unwrap();
        let want = fs::read_to_string(golden(&format!("{name}.svg"))).unwrap();
        assert_eq!(plot_csv(&csv).unwrap(), want, "{name}");
    }
}

#[test]
fn plot_coordinates_are_affine() {
    // three evenly spaced points must land on evenly spaced pixels
    let csv = "rule,mean,std,n_converged\nlinear,1.0e2,0.0e0,5\npowerlaw,2.0e2,0.0e0,5\nother,3.0e2,0.0e0,5\n";
    let svg = plot_csv(csv).unwrap();
    let cys: Vec<f64> = svg
        .lines()
        .filter(|l| l.starts_with("<circle"))
        .map(|l| l.split("cy=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(cys.len(), 3);
    assert!(((cys[0] - cys[1]) - (cys[1] - cys[2])).abs() < 1e-3);
    assert!(cys[0] > cys[2]);
}

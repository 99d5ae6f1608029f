use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sample_index.csv")
}

fn symbio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbio")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_single_replication() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sos");
    let o = symbio(&["run", "--model", "sos", "--data", s(&sample()), "--reps", "1", "--seed", "7", "--iters", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{o:?}");
    let mut files: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["config.json", "predictions_r1.csv", "summary.csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].split_whitespace().eq(["model", "stat", "rmse", "mape", "mad", "mse"]));
    assert!(lines[1].starts_with("sos") && lines[1].contains("single"));
    assert!(o.stderr.is_empty());
}

#[test]
fn missing_data_is_a_usage_error() {
    let o = symbio(&["run", "--model", "sos"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(o.stdout.is_empty());
}

#[test]
fn flag_errors_exit_two() {
    let data = sample();
    for args in [
        vec!["run", "--model", "lstm", "--data", s(&data)],
        vec!["run", "--model", "sos", "--data", s(&data), "--reps", "-1"],
        vec!["run", "--model", "pso", "--data", s(&data), "--arima-order", "1,0"],
        vec!["sweep-arima", "--data", s(&data), "--grid", "1,0,1;x"],
        vec!["compare", "--data", s(&data), "--models", "sos,lstm"],
        vec!["plot", "--pred", "p.csv", "--out", "x.svg", "--channel", "high"],
        vec!["frobnicate"],
    ] {
        assert_eq!(symbio(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_one_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = symbio(&["run", "--model", "ga", "--data", s(&missing), "--reps", "1", "--iters", "1", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("nope.csv"));
}

#[test]
fn summary_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut summaries = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(k.to_string());
        let o = symbio(&["run", "--model", "pso", "--data", s(&sample()), "--reps", "2", "--iters", "5", "--out", s(&out)]);
        assert!(o.status.success());
        summaries.push(fs::read(out.join("summary.csv")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# quick run\nmodel = ga\nreps = 2\niters = 9\ncrossover-rate = 0.7\n").unwrap();
    let out = dir.path().join("out");
    let o = symbio(&["run", "--config", s(&cfg), "--data", s(&sample()), "--iters", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{o:?}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["model"], "ga");
    assert_eq!(json["config"]["replications"], 2);
    assert_eq!(json["config"]["ga"]["generations"], 3);
    assert_eq!(json["config"]["ga"]["crossover_rate"], 0.7);

    fs::write(&cfg, "colour = blue\n").unwrap();
    let o = symbio(&["run", "--config", s(&cfg), "--model", "sos", "--data", s(&sample())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_custom_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = symbio(&["sweep-arima", "--data", s(&sample()), "--grid", "1,0,0", "--out", s(dir.path())]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("arima_sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "p,d,q,rmse,mape,mad");
    assert!(lines[1].starts_with("1,0,0,"));
    assert!(stdout(&o).lines().last().unwrap().starts_with("# best 1,0,0 rmse="));
}

#[test]
fn compare_single_model_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = symbio(&["compare", "--data", s(&sample()), "--models", "ga", "--reps", "2", "--iters", "2", "--out", s(dir.path())]);
    assert!(o.status.success(), "{o:?}");
    let table = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.len() == 3));
    assert_eq!(rows[0], ["metric", "statistic", "ga"]);
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn plot_from_run_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(symbio(&["run", "--model", "arima", "--data", s(&sample()), "--out", s(&out)]).status.success());
    let svg_path = dir.path().join("charts/close.svg");
    let o = symbio(&[
        "plot", "--pred", s(&out.join("predictions_r1.csv")), "--channel", "close", "--out", s(&svg_path), "--title", "Index close",
    ]);
    assert!(o.status.success(), "{o:?}");
    let svg = fs::read_to_string(&svg_path).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let lines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].attribute("stroke"), Some("#1f77b4"));
    assert_eq!(lines[1].attribute("stroke"), Some("#d62728"));
    for l in &lines {
        assert_eq!(l.attribute("points").unwrap().split(' ').count(), 252);
    }
    assert!(svg.contains("Index close"));
}

#[test]
fn plot_rejects_malformed_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let o = symbio(&["plot", "--pred", s(&sample()), "--out", s(&dir.path().join("x.svg"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("x.svg").exists());
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lnat_core::solvers::full_info_bound;

fn lnat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnat")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let out = dir.join(format!("{name}_out"));
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, format!("output = {:?}\n{body}", out.to_str().unwrap())).unwrap();
    path
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_horizon_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c", "T = 0\nd = 2\nN = 3\n");
    let o = lnat(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("T must be ≥ 1"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_adversaries_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a", "T = 5\nd = 2\nN = 3\ncolour = 1\n");
    assert_eq!(lnat(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
    let cfg = write_config(tmp.path(), "b", "T = 5\nadversary = \"oracle\"\n");
    assert_eq!(lnat(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lnat(&["run", tmp.path().join("missing.toml").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn single_round_trace_has_header_and_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c", "T = 1\nd = 2\nN = 3\nseed = 4\n");
    let o = lnat(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("c_out/trace_seed4.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(csv.lines().next(), Some("t,loss,cumloss,regret_to_date"));
}

#[test]
fn summary_matches_traces_and_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c", "T = 400\nd = 2\nN = 3\nseeds = 100\n");
    let o = lnat(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("c_out");
    let s = json(&out.join("summary.json"));
    assert_eq!(s["seeds"], 100);
    assert_eq!(s["theoretical_bound"].as_f64().unwrap(), full_info_bound(2, 3, 400, 1.0));
    let mean = s["mean_regret"].as_f64().unwrap();
    assert!(mean > 0.0 && mean <= s["theoretical_bound"].as_f64().unwrap());

    let mut total = 0.0;
    for seed in 0..100 {
        let csv = std::fs::read_to_string(out.join(format!("trace_seed{seed}.csv"))).unwrap();
        let last = csv.lines().last().unwrap();
        let regret: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        let side = json(&out.join(format!("trace_seed{seed}.json")));
        assert_eq!(side["regret"].as_f64().unwrap(), regret);
        assert_eq!(s["per_seed"][seed]["regret"].as_f64().unwrap(), regret);
        total += regret;
    }
    assert!((total / 100.0 - mean).abs() < 1e-9);
}

#[test]
fn per_round_regret_flag_fills_every_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c", "T = 20\nd = 2\nN = 2\n");
    let o = lnat(&["run", cfg.to_str().unwrap(), "--regret-per-round", "--algo", "bandit", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("c_out/trace_seed3.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| !l.ends_with(',')));
    let side = json(&tmp.path().join("c_out/trace_seed3.json"));
    assert_eq!(side["meta"]["algorithm"], "bandit");
    assert_eq!(side["config"]["regret_per_round"], true);
}

#[test]
fn flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c", "T = 50\nd = 1\nN = 2\nseeds = 3\n");
    let out = tmp.path().join("elsewhere");
    let o = lnat(&[
        "run",
        cfg.to_str().unwrap(),
        "--T",
        "7",
        "--seeds",
        "1",
        "--eta",
        "0.25",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = json(&out.join("trace_seed0.json"));
    assert_eq!(side["meta"]["horizon"], 7);
    assert_eq!(side["meta"]["eta"], 0.25);
    assert!(!out.join("trace_seed1.csv").exists());
}

const CHAIN_DOMAIN: &str = "dim = 2\nlower = [0, 0]\nupper = [3, 3]\ngamma = [[1, 2, 1]]\n";

#[test]
fn fixed_function_runs_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("k.toml"), CHAIN_DOMAIN).unwrap();
    std::fs::write(tmp.path().join("f.toml"), "[[term]]\nkind = \"quadratic\"\na = [1.0, 0.5]\nb = [1.0, 2.0]\n")
        .unwrap();
    let cfg = write_config(
        tmp.path(),
        "c",
        "T = 30\nadversary = \"fixed\"\ndomain = \"k.toml\"\nfunction = \"f.toml\"\nalgo = \"bandit\"\n",
    );
    let o = lnat(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = json(&tmp.path().join("c_out/trace_seed0.json"));
    assert_eq!(side["best_fixed_point"], serde_json::json!([1, 2]));
    // Measured over K, where z1 - z2 <= 1 rules out (3, 0): the max is at (3, 3).
    assert_eq!(side["meta"]["bound"], 4.5);
}

#[test]
fn bandit_without_derivable_bound_asks_for_m() {
    let tmp = tempfile::tempdir().unwrap();
    let big = "[domain]\ndim = 8\nlower = [0, 0, 0, 0, 0, 0, 0, 0]\nupper = [9, 9, 9, 9, 9, 9, 9, 9]\n\
               [[function.term]]\nkind = \"linear\"\nc = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]\n";
    let cfg = write_config(tmp.path(), "c", &format!("T = 10\nadversary = \"fixed\"\nalgo = \"bandit\"\n{big}"));
    let o = lnat(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("set M explicitly"), "{}", stderr(&o));
    let cfg =
        write_config(tmp.path(), "d", &format!("T = 10\nM = 72.0\nadversary = \"fixed\"\nalgo = \"bandit\"\n{big}"));
    let o = lnat(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = json(&tmp.path().join("d_out/trace_seed0.json"));
    assert_eq!(side["regret"], serde_json::Value::Null);
    assert_eq!(side["meta"]["regret_omitted"], true);
}

#[test]
fn applications_run() {
    let tmp = tempfile::tempdir().unwrap();
    let inv = "T = 40\nadversary = \"inventory\"\n[inventory]\nd = 2\np = 2.0\nc = [1.0, 0.5]\nn = 4\n\
               demand = { kind = \"uniform\", max = 5 }\n";
    let o = lnat(&["run", write_config(tmp.path(), "inv", inv).to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sched = "T = 12\nadversary = \"scheduling\"\n[scheduling]\nshift_starts = [1, 2]\nintervals = 3\n\
                 shift_length = 2\nn = 3\nlabor = [0.3, 0.2]\nprofit = 2.0\nmiss = 0.5\nc_wait = 0.5\nmu = 1.0\n\
                 lambda = [[0.5, 1.0, 0.5], [0.2, 0.4, 0.8]]\n";
    let o = lnat(&["run", write_config(tmp.path(), "sched", sched).to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&tmp.path().join("sched_out/summary.json"));
    assert_eq!(s["horizon"], 12);
}

#[test]
fn short_demand_trace_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("y.txt"), "1 2\n0 1\n").unwrap();
    let inv =
        "T = 3\nadversary = \"inventory\"\ndemand_file = \"y.txt\"\n[inventory]\nd = 2\np = 2.0\nc = [1.0, 0.5]\n\
               n = 4\ndemand = { kind = \"uniform\", max = 5 }\n";
    let o = lnat(&["run", write_config(tmp.path(), "c", inv).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_json_and_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let k = tmp.path().join("k.toml");
    std::fs::write(&k, "dim = 2\nlower = [0, 0]\nupper = [2, 2]\n").unwrap();
    let good = tmp.path().join("good.toml");
    std::fs::write(&good, "[[term]]\nkind = \"quadratic\"\na = [1.0, 2.0]\nb = [0.5, 1.5]\n").unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[[term]]\nkind = \"bilinear\"\ncoef = 1.0\ni = 1\nj = 2\n").unwrap();

    let o = lnat(&["check", k.to_str().unwrap(), good.to_str().unwrap()]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["midpoint_convexity"]["passed"], true);
    assert_eq!(r["points"], 9);

    let o = lnat(&["check", k.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["midpoint_convexity"]["passed"], false);
    assert_eq!(r["midpoint_convexity"]["metric"], 2.0);

    let o = lnat(&["check", k.to_str().unwrap(), tmp.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_fits_a_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c", "T = 1\nd = 2\nN = 3\nseeds = 40\n");
    let o = lnat(&["sweep", cfg.to_str().unwrap(), "--T-grid", "64,256,1024"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&tmp.path().join("c_out/sweep.json"));
    assert_eq!(r["points"].as_array().unwrap().len(), 3);
    let slope = r["slope"].as_f64().unwrap();
    assert!(slope > 0.2 && slope < 0.8, "slope {slope}");
    assert_eq!(lnat(&["sweep", cfg.to_str().unwrap(), "--T-grid", "0,5"]).status.code(), Some(2));
}

#[test]
fn help_documents_config_keys() {
    let o = lnat(&["run", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for key in ["adversary", "proj_tol", "regret_per_round", "L_hat", "[inventory]"] {
        assert!(text.contains(key), "missing {key}");
    }
}

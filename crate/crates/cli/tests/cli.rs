use std::path::Path;
use std::process::{Command, Output};

fn moran(args: &[&str]) -> Output {
    moran_in(None, args)
}

fn moran_in(out_dir: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_moran"));
    cmd.args(args).env_remove("MORAN_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("MORAN_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn header_value(csv: &str, key: &str) -> Option<String> {
    csv.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
}

const SMALL_SWEEP: [&str; 11] = [
    "sweep", "--N", "100", "--s", "1", "--a-grid", "0.01,0.1", "--reps", "3", "--steps", "500",
];

#[test]
fn example_sweep_parses_and_echoes_config() {
    let o = moran(&["sweep", "--N", "100", "--s", "1", "--a-grid", "0.01,0.1", "--reps", "10", "--seed", "7", "--steps", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("# moran "));
    assert_eq!(header_value(&csv, "a-grid").as_deref(), Some("0.01,0.1"));
    assert_eq!(header_value(&csv, "seed").as_deref(), Some("7"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "N,a,s,seed,rep,steps,y_n,u_n,v_n,w_n,fixed_at_n,fixation_step,y_fix,w_fix"
    );
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 10);
}

#[test]
fn out_of_range_parameter_names_the_bound() {
    let o = moran(&["theory", "--a", "1.5", "--s", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("a = 1.5") && err.contains("(0, 1)"), "{err}");
    assert!(o.stdout.is_empty());

    for args in [
        &["sweep", "--N", "1"][..],
        &["sweep", "--s", "0"],
        &["hitting", "--a-grid", "0.2", "--b-grid", "0.2"],
        &["simulate", "--N", "10", "--a", "0.1", "--s", "1", "--stop", "level"],
    ] {
        assert_eq!(moran(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(moran(&["sweep", "--bogus"]).status.code(), Some(1));
    assert_eq!(moran(&["--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# provenance\ns = 10\na = 0.2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = moran(&["theory", "--config", cfg, "--s", "1", "--t-max", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(header_value(&csv, "s").as_deref(), Some("1"));
    assert_eq!(header_value(&csv, "a").as_deref(), Some("0.2"));
    assert_eq!(header_value(&csv, "config"), None);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "s = 1\nwobble = 3\n").unwrap();
    let o = moran(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("wobble"));
}

#[test]
fn reruns_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let paths = ["a.csv", "b.csv"].map(|f| dir.path().join(f));
    for p in &paths {
        let mut args = SMALL_SWEEP.to_vec();
        args.extend(["--out", p.to_str().unwrap()]);
        assert_eq!(moran(&args).status.code(), Some(0));
    }
    let [a, b] = paths.map(|p| std::fs::read(p).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn svg_output_is_deterministic() {
    let args = ["trajectories", "--N", "50", "--a-grid", "0.1", "--horizon", "2", "--reps", "3", "--format", "svg"];
    let first = moran(&args);
    assert_eq!(first.status.code(), Some(0));
    let svg = stdout(&first);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(first.stdout, moran(&args).stdout);
}

#[test]
fn single_point_plot_is_valid() {
    let o = moran(&["theory", "--a", "0.1", "--s", "1", "--t-max", "0", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("NaN") && !svg.contains("inf"));
}

#[test]
fn selftest_exit_codes() {
    let ok = moran(&["selftest"]);
    assert_eq!(ok.status.code(), Some(0));
    let report = stdout(&ok);
    assert!(report.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert!(!report.contains("FAIL"));

    let flipped = moran(&["selftest", "--inject-sign-flip"]);
    assert_eq!(flipped.status.code(), Some(3));
    assert!(stdout(&flipped).contains("FAIL"));
}

#[test]
fn relative_outputs_go_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL_SWEEP.to_vec();
    args.extend(["--out", "sweep.csv", "--summary", "summary.csv"]);
    let o = moran_in(Some(dir.path()), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("sweep.csv").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("x.csv");
    let o = moran(&["theory", "--a", "0.1", "--s", "1", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing"));
}

#[test]
fn step_log_replays_to_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.bin");
    let log = log.to_str().unwrap();
    let base = ["simulate", "--N", "40", "--a", "0.25", "--s", "2", "--seed", "5", "--stop", "fixation"];
    let mut rec = base.to_vec();
    rec.extend(["--step-log", log]);
    let recorded = moran(&rec);
    assert_eq!(recorded.status.code(), Some(0), "{}", stderr(&recorded));
    let len = std::fs::metadata(log).unwrap().len();
    assert!(len > 0 && len.is_multiple_of(48));

    let mut rep = base.to_vec();
    rep.extend(["--replay", log]);
    let replayed = moran(&rep);
    assert_eq!(replayed.status.code(), Some(0), "{}", stderr(&replayed));
    assert_eq!(recorded.stdout, replayed.stdout);

    let mut bytes = std::fs::read(log).unwrap();
    bytes.truncate(bytes.len() - 5);
    std::fs::write(log, bytes).unwrap();
    assert_eq!(moran(&rep).status.code(), Some(2));
}

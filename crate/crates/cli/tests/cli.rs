use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use plurikit_cli::config::RunConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn plurikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plurikit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(command: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = configs().join(format!("{config}.json"));
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    plurikit(&args)
}

fn summary(out: &Path) -> Vec<(String, String)> {
    fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value");
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn value(s: &[(String, String)], key: &str) -> String {
    s.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("missing {key}")).1.clone()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let i = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn hyperplane_profile_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("profile", "hyperplane_profile", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let v = column(&csv, "value");
    assert_eq!(v.len(), 9);
    assert!(v.iter().all(|x| (x - 1.0).abs() <= 0.01), "{v:?}");
    assert!(dir.path().join("meta.txt").exists());
}

#[test]
fn kahler_form_has_order_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("order", "kahler_order", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let rho: f64 = value(&summary(dir.path()), "rho").parse().unwrap();
    assert!((rho - 2.0).abs() <= 0.05, "rho = {rho}");
}

#[test]
fn line_inside_the_variety_saturates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("crofton", "line_in_variety_crofton", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    let s = summary(dir.path());
    assert_eq!(value(&s, "frames_degenerate"), "1");
    assert_eq!(value(&s, "pass"), "false");
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let extra = ["--budget", "2000", "--frames", "6"];
    let oa = run("slice", "cubic_slices", a.path(), &[&extra[..], &["--threads", "1"]].concat());
    let ob = run("slice", "cubic_slices", b.path(), &[&extra[..], &["--threads", "3"]].concat());
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(ob.status.code(), Some(0));
    for f in ["report.csv", "summary.txt", "config.json", "slices/slice_0000.csv", "slices/slice_0005.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("profile", "hyperplane_profile", dir.path(), &["--seed", "77", "--budget", "5000"]);
    assert_eq!(o.status.code(), Some(0));
    let meta = fs::read_to_string(dir.path().join("meta.txt")).unwrap();
    assert!(meta.contains("seed=77"));
    assert!(meta.contains("budget=5000"));
}

#[test]
fn bundled_configs_round_trip() {
    let mut n = 0;
    for e in fs::read_dir(configs()).unwrap() {
        let path = e.unwrap().path();
        let cfg = RunConfig::load(&path).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        let again = RunConfig::parse(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn unknown_command_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("frobnicate", "hyperplane_profile", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // no seed
    fs::write(
        &bad,
        r#"{"space":{"n":2},"current":{"kind":"const_form","form":{"family":"kahler"}},
            "grid":{"r_min":1,"r_max":10,"points":3},"mc":{"budget":100}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = plurikit(&["profile", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    // missing command-specific block
    let o = run("ratios", "hyperplane_profile", &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = plurikit(&["profile", "--config", "/nonexistent.json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plot_script_references_the_csvs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("profile", "hyperplane_profile", dir.path(), &[]).status.code(), Some(0));
    assert_eq!(run("plot", "hyperplane_profile", dir.path(), &[]).status.code(), Some(0));
    let script = fs::read_to_string(dir.path().join("plot.py")).unwrap();
    assert!(script.contains("\"report.csv\""));
    assert!(script.contains("savefig"));
}

#[test]
fn chi_of_a_constant_order() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("chi", "chi_constant", dir.path(), &[]).status.code(), Some(0));
    let s = summary(dir.path());
    assert_eq!(value(&s, "pass"), "true");
    assert_eq!(value(&s, "chi_at_1"), value(&s, "rho_at_1_plus_inv_e"));
}

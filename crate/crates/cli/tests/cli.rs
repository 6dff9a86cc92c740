use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "grid.n = 32\ngeometry.n_gamma = 96\nshell.modes = 16\nrun.windows = 2\n";

fn sim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsi-heat-sim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FSI_HEAT_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_writes_outputs_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.txt", SMALL);
    let out = sim(&["run", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("o");
    assert_eq!(fs::read_to_string(o.join("config.txt")).unwrap(), SMALL);
    assert!(fs::read_to_string(o.join("config_effective.txt")).unwrap().contains("grid.n = 32"));
    assert_eq!(fs::read_to_string(o.join("stop.txt")).unwrap(), "completed\n");
    for f in ["ledger.csv", "shell_modes.csv", "gamma_trace.csv", "field_0000.dat", "plots/energy.csv", "plots/exterior.csv"] {
        assert!(o.join(f).exists(), "{f} missing");
    }
    assert_eq!(fs::read_to_string(o.join("ledger.csv")).unwrap().lines().count(), 3);
}

#[test]
fn run_is_byte_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.txt", SMALL);
    assert!(sim(&["run", "--config", &cfg, "--out", "a"], dir.path()).status.success());
    let threaded = Command::new(env!("CARGO_BIN_EXE_fsi-heat-sim"))
        .args(["run", "--config", &cfg, "--out", "b"])
        .current_dir(dir.path())
        .env("FSI_HEAT_THREADS", "3")
        .status()
        .unwrap();
    assert!(threaded.success());
    for f in ["ledger.csv", "shell_modes.csv", "gamma_trace.csv", "field_0000.dat", "plots/interface.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_window_run_gives_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.txt", "run.windows = 0\n");
    assert_eq!(sim(&["run", "--config", &cfg, "--out", "z"], dir.path()).status.code(), Some(0));
    for f in ["ledger.csv", "shell_modes.csv", "gamma_trace.csv", "plots/energy.csv", "plots/penalties.csv"] {
        assert_eq!(fs::read_to_string(dir.path().join("z").join(f)).unwrap().lines().count(), 1, "{f}");
    }
}

#[test]
fn invalid_configuration_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.txt", "shell.alpha1 = 0\nshell.alpha2 = 0\n");
    let out = sim(&["run", "--config", &cfg, "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha1"));
    let missing = sim(&["run", "--config", "nope.txt", "--out", "x"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fsi-heat-sim"))
        .args(["validate-model"])
        .current_dir(dir.path())
        .env("FSI_HEAT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn degenerate_run_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.txt", "initial.v_amplitude = 3\ninitial.w_mode = 0\nrun.windows = 8\n");
    let out = sim(&["run", "--config", &cfg, "--out", "d"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let stop = fs::read_to_string(dir.path().join("d/stop.txt")).unwrap();
    assert!(stop.starts_with("degenerate\nwindow "));
    let check = sim(&["check", "--ledger", "d/ledger.csv"], dir.path());
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn check_revalidates_and_flags_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.txt", SMALL);
    assert!(sim(&["run", "--config", &cfg, "--out", "o"], dir.path()).status.success());
    let ok = sim(&["check", "--ledger", "o/ledger.csv"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).trim_end().ends_with("PASS"));

    // Inflate the fluid kinetic energy of the last row: its slack no longer matches.
    let text = fs::read_to_string(dir.path().join("o/ledger.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.len() - 1;
    let mut cells: Vec<String> = lines[last].split(',').map(str::to_string).collect();
    cells[2] = format!("{:?}", cells[2].parse::<f64>().unwrap() + 1.0);
    lines[last] = cells.join(",");
    fs::write(dir.path().join("tampered.csv"), lines.join("\n") + "\n").unwrap();
    let bad = sim(&["check", "--ledger", "tampered.csv"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn mms_prints_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&["mms", "--case", "C", "--levels", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,h,entropy_residual,energy_residual");
    assert!(lines[1].starts_with("32,"));
    assert!(lines[2].starts_with("64,"));
    assert!(lines[3].starts_with("order,,"));
    assert_eq!(sim(&["mms", "--case", "Z"], dir.path()).status.code(), Some(1));
}

#[test]
fn study_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.txt", "grid.n = 32\ngeometry.n_gamma = 96\nshell.modes = 16\nrun.windows = 1\n");
    let out = sim(&["study", "--config", &cfg, "--sweep", "k=0.5,0.35", "--out", "study.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert!(text.lines().next().unwrap().starts_with("k,"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert_eq!(sim(&["study", "--sweep", "q=1"], dir.path()).status.code(), Some(1));
}

#[test]
fn validate_model_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&["validate-model"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gibbs"));
    assert!(text.trim_end().ends_with("overall: PASS"));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rotwave::load_config;

const BASE: &str = "molecule.name = D2\n";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

fn rotwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotwave")).args(args).output().unwrap()
}

fn run_in(dir: &Path, command: &str, config: &Path, extra: &[&str]) -> Output {
    let out_dir = dir.join("out");
    let mut args = vec![
        command,
        config.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    rotwave(&args)
}

fn column(csv: &str, index: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(index).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn populations_at_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let out = run_in(dir.path(), "populations", &config, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/populations.csv")).unwrap();
    assert!(csv.starts_with("J,population,spin_weight,per_M_weight\n"));
    let p = column(&csv, 1);
    assert_eq!(p.len(), 9);
    assert!((p[2] - 0.386).abs() <= 0.01);
    assert_eq!(column(&csv, 0), (0..9).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn cold_populations() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let out = run_in(dir.path(), "populations", &config, &["--set", "run.temperature=1"]);
    assert!(out.status.success());
    let p = column(&fs::read_to_string(dir.path().join("out/populations.csv")).unwrap(), 1);
    assert!(p[0] >= 0.999);
}

#[test]
fn manifest_round_trips_to_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "molecule.name = D2\nrun.tune_temperature = true\n");
    assert!(run_in(dir.path(), "populations", &config, &[]).status.success());
    let manifest = fs::read_to_string(dir.path().join("out/populations.manifest")).unwrap();
    assert!(manifest.contains("diagnostics.data_file = populations.csv"));
    assert!(manifest.contains("diagnostics.tool_version = "));
    let t: f64 = manifest
        .lines()
        .find_map(|l| l.strip_prefix("diagnostics.temperature = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((290.0..=300.0).contains(&t));
    let original = load_config(&fs::read_to_string(&config).unwrap()).unwrap();
    assert_eq!(load_config(&manifest).unwrap(), original);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "molecule.name D2\n",
        "molecule.name = D2\nrun.bogus = 1\n",
        "run.temperature = 3\n",
    ] {
        let config = write_config(dir.path(), text);
        let out = run_in(dir.path(), "populations", &config, &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn missing_config_exits_4() {
    let out = rotwave(&["populations", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_thread_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let out = Command::new(env!("CARGO_BIN_EXE_rotwave"))
        .args(["revivals", config.to_str().unwrap()])
        .env("ROTWAVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncated_basis_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let out = run_in(
        dir.path(),
        "trace",
        &config,
        &["--set", "run.j_max=16", "--set", "pulse.peak_intensity=1e15"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("out/trace.csv").exists());
}

#[test]
fn zero_field_trace_and_carpet_are_isotropic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "molecule.name = D2\npulse.peak_intensity = 0\nrun.time_stop = 100\n",
    );
    assert!(run_in(dir.path(), "trace", &config, &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(csv.starts_with("t_fs,cos2_raw,cos2_smoothed\n"));
    let raw = column(&csv, 1);
    assert_eq!(raw.len(), 101);
    assert!(raw.iter().all(|v| (v - 1.0 / 3.0).abs() <= 1e-10));

    assert!(run_in(dir.path(), "carpet", &config, &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("out/carpet.csv")).unwrap();
    assert!(csv.starts_with("t_fs,theta_rad,density\n"));
    let density = column(&csv, 2);
    assert_eq!(density.len(), 101 * 128);
    let flat = 1.0 / (4.0 * std::f64::consts::PI);
    assert!(density.iter().all(|v| (v - flat).abs() <= 1e-10));
    let times = column(&csv, 0);
    assert!(times.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "molecule.name = D2\nrun.time_stop = 300\n");
    assert!(run_in(dir.path(), "signal", &config, &[]).status.success());
    let first = fs::read(dir.path().join("out/signal.csv")).unwrap();
    assert!(run_in(dir.path(), "signal", &config, &[]).status.success());
    assert_eq!(first, fs::read(dir.path().join("out/signal.csv")).unwrap());
}

#[test]
fn two_level_spectrum_has_a_single_beat() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "molecule.name = D2\nspectrum.source = two_level\n");
    assert!(run_in(dir.path(), "spectrum", &config, &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    assert!(csv.starts_with("freq_THz,amplitude\n"));
    let footer: Vec<&str> = csv.lines().skip_while(|l| *l != "#peaks").skip(2).collect();
    assert_eq!(footer.len(), 1, "{footer:?}");
    let fields: Vec<&str> = footer[0].trim_start_matches('#').split(',').collect();
    let f: f64 = fields[0].parse().unwrap();
    assert!((f - 5.476).abs() < 0.05);
    assert_eq!(&fields[2..], ["0", "2"]);
}

#[test]
fn spectral_window_inside_the_pulse_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let out = run_in(dir.path(), "spectrum", &config, &["--set", "spectrum.t_start=10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn revival_table_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let table = |extra: &[&str]| {
        let mut args = vec!["revivals", config.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = rotwave(&args);
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let base = table(&[]);
    let rows: Vec<&str> = base.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let full: f64 = rows[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((full - 547.8).abs() < 0.05);

    assert_eq!(table(&["--set", "revivals.count=2"]).lines().count(), 9);

    let halved = table(&["--set", "molecule.rotational_constant=15.2218"]);
    let slow: f64 = halved
        .lines()
        .nth(4)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((slow - 2.0 * full).abs() < 1e-6);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qslab_cli::args::PresetName;
use qslab_cli::run::{run, OutputDir};
use qslab_cli::scenario::{preset, FIG_R_RATIOS};
use qslab_cli::settings::Settings;
use qslab_core::model::simulate;
use qslab_core::trajectory_csv::{read_trajectory_file, write_trajectory};
use qslab_core::{diagnostics, TimeGrid};

fn qslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qslab")).args(args).env("QSLAB_OUT_DIR", dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = qslab(dir.path(), &["preset", "figAB", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage:"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qslab(dir.path(), &["preset", "figZ"]).status.code(), Some(2));
}

#[test]
fn fig_ab_separates_time_scales() {
    let dir = tempfile::tempdir().unwrap();
    let o = qslab(dir.path(), &["preset", "figAB"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let traj = read_trajectory_file(dir.path().join("figAB.csv")).unwrap();
    let nu = traj.meta.get("nu").unwrap();
    assert_eq!(nu, 0.01);
    let d0 = diagnostics(traj.first());
    let horizon = 1.0 / nu;
    let drop = traj.iter().find(|(_, s)| diagnostics(s).b < 0.01 * d0.b).map(|(t, _)| t).expect("B drops");
    assert!(drop < horizon, "B fell below 1% only at t = {drop}");
    for (t, s) in traj.iter().filter(|(t, _)| *t <= horizon) {
        assert!(diagnostics(s).a >= d0.a * (-2.0f64).exp(), "A too small at t = {t}");
    }
    assert!(stdout(&o).lines().filter(|l| l.starts_with("CERT ")).all(|l| l.contains("pass=true")));
}

#[test]
fn fig_r_ratios_settle() {
    let dir = tempfile::tempdir().unwrap();
    let o = qslab(dir.path(), &["preset", "figR"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for (i, r0) in FIG_R_RATIOS.iter().enumerate() {
        let traj = read_trajectory_file(dir.path().join(format!("figR_{}.csv", i + 1))).unwrap();
        let r = |k: usize| diagnostics(&traj.states[k]).r.unwrap();
        assert!((r(0) - r0).abs() <= 1e-12 * r0);
        let n = traj.len();
        let end = r(n - 1);
        let earlier = r(n - 1 - n / 10);
        assert!(end.is_finite() && end > 0.0);
        assert!(((end - earlier) / end).abs() < 1e-3, "run {i}: R still moving ({earlier} -> {end})");
    }
}

fn file_bytes(dir: &Path, names: &[String]) -> Vec<Vec<u8>> {
    names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn presets_are_byte_identical_on_rerun() {
    for (name, files) in [
        ("figAB", vec!["figAB.csv".to_string()]),
        ("figR", (1..=FIG_R_RATIOS.len()).map(|i| format!("figR_{i}.csv")).collect()),
        ("figLogB", vec!["figLogB.csv".to_string()]),
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let oa = qslab(a.path(), &["preset", name, "--seed", "7"]);
        let ob = qslab(b.path(), &["preset", name, "--seed", "7"]);
        assert_eq!(oa.status.code(), Some(0));
        assert_eq!(file_bytes(a.path(), &files), file_bytes(b.path(), &files), "{name}");
        let strip = |s: String| s.lines().filter(|l| !l.starts_with("CSV ")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(stdout(&oa)), strip(stdout(&ob)));
    }
}

#[test]
fn seed_changes_the_data() {
    let a = tempfile::tempdir().unwrap();
    qslab(a.path(), &["simulate", "--t-end", "5", "--seed", "1", "--out", "s1.csv"]);
    qslab(a.path(), &["simulate", "--t-end", "5", "--seed", "2", "--out", "s2.csv"]);
    assert_ne!(std::fs::read(a.path().join("s1.csv")).unwrap(), std::fs::read(a.path().join("s2.csv")).unwrap());
}

#[test]
fn csv_round_trips_against_in_memory_run() {
    let dir = tempfile::tempdir().unwrap();
    let sc = preset(PresetName::FigAb, &Settings { t_end: Some(20.0), ..Settings::default() }).unwrap().remove(0);
    let out = OutputDir(Some(dir.path().to_path_buf()));
    let outcome = run(&sc, &out).unwrap();
    let path: PathBuf = outcome.csv[0].clone();

    let grid = TimeGrid::fixed(0.0, sc.t_end, sc.dt).unwrap().with_stride(sc.stride).unwrap();
    let direct = simulate(sc.initial_modes().unwrap(), &sc.params().unwrap(), &grid).unwrap();
    let back = read_trajectory_file(&path).unwrap();
    assert_eq!(back, direct);

    let mut again = Vec::new();
    write_trajectory(&mut again, &back).unwrap();
    assert_eq!(again, std::fs::read(&path).unwrap());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# short run\nnu=0.02\nt-end=10\nseed=3\n").unwrap();
    let o = qslab(dir.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--t-end", "4", "--out", "c.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let traj = read_trajectory_file(dir.path().join("c.csv")).unwrap();
    assert_eq!(traj.meta.get("nu"), Some(0.02));
    assert_eq!(traj.t_end(), 4.0);
}

#[test]
fn bad_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "viscosity=0.1\n").unwrap();
    let o = qslab(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_env_overrides_directory_of_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = qslab(dir.path(), &["simulate", "--t-end", "1", "--out", "/nonexistent/place/x.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("x.csv").exists());
}

#[test]
fn blow_up_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        qslab(dir.path(), &["simulate", "--init", "1e4,1e4,1e4,1e4,1e4,1e4,1e4,1e4", "--dt", "0.5", "--t-end", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn strict_turns_failed_check_into_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // With eps0 = -1 the halving ratios of the first-order error leave the accepted band.
    let lax = qslab(dir.path(), &["perturb", "sweep", "--eps0", "-1"]);
    assert_eq!(lax.status.code(), Some(0));
    assert!(stdout(&lax).contains("CHECK perturbation_order pass=false"));
    let strict = qslab(dir.path(), &["perturb", "sweep", "--eps0", "-1", "--strict"]);
    assert_eq!(strict.status.code(), Some(4));
    let ok = qslab(dir.path(), &["perturb", "sweep", "--strict"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn certificate_commands_report_lines() {
    let dir = tempfile::tempdir().unwrap();
    let sym = qslab(dir.path(), &["certify", "symmetric", "--strict"]);
    assert_eq!(sym.status.code(), Some(0), "{}", stdout(&sym));
    assert_eq!(stdout(&sym).lines().filter(|l| l.starts_with("CERT sym_")).count(), 3);

    let asym = qslab(dir.path(), &["certify", "asymmetric", "--nu", "0.005", "--strict"]);
    assert_eq!(asym.status.code(), Some(0), "{}", stdout(&asym));
    assert!(stdout(&asym).contains("CONSTANTS eta="));
    assert_eq!(stdout(&asym).lines().filter(|l| l.starts_with("CERT asym_")).count(), 4);

    let ratio = qslab(dir.path(), &["certify", "ratio", "--delta", "0.95", "--t-end", "2000", "--strict"]);
    assert_eq!(ratio.status.code(), Some(0), "{}", stdout(&ratio));
    assert!(stdout(&ratio).contains("CERT ratio_decay pass=true"));

    let wrong = qslab(dir.path(), &["certify", "symmetric", "--delta", "0.95"]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn manifold_and_perturbation_commands_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = qslab(dir.path(), &["manifold-residual", "--r", "2", "--nu", "0.05", "--strict"]);
    assert_eq!(m.status.code(), Some(0), "{}", stdout(&m));
    let text = std::fs::read_to_string(dir.path().join("manifold_residual.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 32 * 9);

    let c = qslab(dir.path(), &["perturb", "compare", "--eps", "0.01"]);
    assert_eq!(c.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("perturb_compare.csv")).unwrap();
    assert!(text.lines().any(|l| l == "tau,X,Y,X_bar,Y_bar"));

    let t = qslab(dir.path(), &["perturb", "critical-times", "--eps0", "-1"]);
    assert!(stdout(&t).starts_with("CRITICAL eps=0.02 eps0=-1"));
}

#[test]
fn every_simulate_model_runs() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["reduced", "observable", "scaled", "spectral"] {
        let o = qslab(dir.path(), &["simulate", "--model", model, "--t-end", "2", "--k-max", "3"]);
        assert_eq!(o.status.code(), Some(0), "{model}: {}", stderr(&o));
        assert!(dir.path().join(format!("simulate_{model}.csv")).exists());
    }
    let spectral = read_trajectory_file(dir.path().join("simulate_spectral.csv")).unwrap();
    assert_eq!(spectral.meta.rhs, "spectral");
}

//! Stable-manifold residual scans and slow-fast perturbation runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qslab_core::integrate::integrate;
use qslab_core::manifold::{manifold_residual, residual_order, sample_directions};
use qslab_core::perturbation::{
    asymptotic_solution, consistent_initial_state, convergence_study, critical_times, default_tau_step, halving_ratios,
    selection_ratio, ScaledOrder, ScaledSystem,
};
use qslab_core::{ModeState, TimeGrid};
use rayon::prelude::*;

use crate::args::PerturbAction;
use crate::run::{OutputDir, RunOutcome};
use crate::scenario::{perturbation_config, slow_init};
use crate::settings::Settings;
use crate::CliError;

/// Number of sample directions in a residual scan.
pub const RESIDUAL_DIRECTIONS: usize = 32;

/// Smallest acceptable log-log slope of the residual.
pub const MIN_RESIDUAL_SLOPE: f64 = 2.5;

/// Nine scales from `1e-4` to `1e-2`, a quarter decade apart.
pub fn residual_scales() -> Vec<f64> {
    (0..=8).map(|i| 1e-4 * 10f64.powf(i as f64 / 4.0)).collect()
}

/// Accepted band for successive error ratios when ε halves.
pub const HALVING_BAND: (f64, f64) = (3.2, 4.8);

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn csv_path(s: &Settings, default: &str, out: &OutputDir) -> PathBuf {
    out.resolve(&s.out.clone().unwrap_or_else(|| PathBuf::from(default)))
}

pub fn manifold_residual_scan(s: &Settings, out: &OutputDir) -> Result<RunOutcome, CliError> {
    let r = s.r.unwrap_or(0.5);
    let nu = s.nu.unwrap_or(0.1);
    let scales = residual_scales();
    let dirs = sample_directions(RESIDUAL_DIRECTIONS);
    let rows: Vec<(Vec<f64>, f64)> = dirs
        .par_iter()
        .map(|d| {
            let res = scales.iter().map(|&h| manifold_residual(r, nu, d, h)).collect::<Result<Vec<f64>, _>>()?;
            Ok((res, residual_order(r, nu, d, &scales)?))
        })
        .collect::<Result<_, qslab_core::Error>>()?;

    let mut text = format!("# r={r:.16e}\n# nu={nu:.16e}\ndirection,scale,residual\n");
    let mut outcome = RunOutcome::default();
    let mut min_slope = f64::INFINITY;
    for (k, (res, slope)) in rows.iter().enumerate() {
        for (h, v) in scales.iter().zip(res) {
            let _ = writeln!(text, "{k},{h:.16e},{v:.16e}");
        }
        outcome.lines.push(format!("RESIDUAL r={r} nu={nu} direction={k} slope={slope:.6}"));
        min_slope = min_slope.min(*slope);
    }
    let path = csv_path(s, "manifold_residual.csv", out);
    write_text(&path, &text)?;
    outcome.csv.push(path);
    let pass = min_slope >= MIN_RESIDUAL_SLOPE;
    outcome.lines.push(format!(
        "CHECK manifold_residual_order pass={pass} min_slope={min_slope:.6} threshold={MIN_RESIDUAL_SLOPE}"
    ));
    outcome.failures += usize::from(!pass);
    Ok(outcome)
}

pub fn perturb(action: PerturbAction, s: &Settings, out: &OutputDir) -> Result<RunOutcome, CliError> {
    match action {
        PerturbAction::Compare => compare(s, out),
        PerturbAction::Sweep => sweep(s, out),
        PerturbAction::CriticalTimes => critical(s, out),
    }
}

/// First-order scaled integration against `X̄`, `Ȳ`.
fn compare(s: &Settings, out: &OutputDir) -> Result<RunOutcome, CliError> {
    let cfg = perturbation_config(s)?;
    let sol = asymptotic_solution(slow_init(s)?, &cfg)?;
    let (tp, tm) = critical_times(&sol)?;
    let tau_end = s.t_end.unwrap_or(1.0f64.min(0.45 * tp.min(tm)));
    let dt = s.dt.unwrap_or(default_tau_step(cfg.epsilon));
    let grid = TimeGrid::fixed(0.0, tau_end, dt).map_err(|e| CliError::Invalid(e.to_string()))?;
    let sys = ScaledSystem::new(cfg, ScaledOrder::First)?;
    let traj = integrate(|w: &ModeState| sys.rhs(w), consistent_initial_state(&sol), &grid)?;

    let mut text = format!(
        "# eps={:.16e}\n# eps0={:.16e}\n# nu0={:.16e}\n# alpha={:.16e}\ntau,X,Y,X_bar,Y_bar\n",
        cfg.epsilon, cfg.epsilon0, cfg.nu0, cfg.alpha
    );
    let (mut ex, mut ey) = (0.0f64, 0.0f64);
    for (tau, w) in traj.iter() {
        let (x, y, xb, yb) = (w.omega1.norm_sqr(), w.omega3.norm_sqr(), sol.x_bar(tau), sol.y_bar(tau));
        ex = ex.max((x - xb).abs());
        ey = ey.max((y - yb).abs());
        let _ = writeln!(text, "{tau:.16e},{x:.16e},{y:.16e},{xb:.16e},{yb:.16e}");
    }
    let path = csv_path(s, "perturb_compare.csv", out);
    write_text(&path, &text)?;
    let mut outcome = RunOutcome::default();
    outcome.csv.push(path);
    outcome.lines.push(format!(
        "COMPARE eps={} eps0={} alpha={} tau_end={tau_end:.6e} max_err_x={ex:.6e} max_err_y={ey:.6e} tau_plus={tp:.6e} tau_minus={tm:.6e}",
        cfg.epsilon, cfg.epsilon0, cfg.alpha
    ));
    Ok(outcome)
}

/// Errors at `ε, ε/2, ε/4` and their ratios, which should be close to 4.
fn sweep(s: &Settings, out: &OutputDir) -> Result<RunOutcome, CliError> {
    let base = perturbation_config(&Settings { eps: Some(s.eps.unwrap_or(0.04)), ..s.clone() })?;
    let eps = [base.epsilon, base.epsilon / 2.0, base.epsilon / 4.0];
    let tau_end = s.t_end.unwrap_or(1.0);
    let rows = convergence_study(&eps, base.epsilon0, base.nu0, base.alpha, slow_init(s)?, (0.0, tau_end))?;
    let ratios = halving_ratios(&rows);

    let mut text = format!("# eps0={:.16e}\n# alpha={:.16e}\neps,max_err_x,max_err_y\n", base.epsilon0, base.alpha);
    let mut outcome = RunOutcome::default();
    for r in &rows {
        let _ = writeln!(text, "{:.16e},{:.16e},{:.16e}", r.epsilon, r.max_err_x, r.max_err_y);
        outcome.lines.push(format!(
            "SWEEP eps={} max_err_x={:.6e} max_err_y={:.6e} max_err={:.6e}",
            r.epsilon,
            r.max_err_x,
            r.max_err_y,
            r.max_err()
        ));
    }
    let path = csv_path(s, "perturb_sweep.csv", out);
    write_text(&path, &text)?;
    outcome.csv.push(path);
    let pass = ratios.iter().all(|q| (HALVING_BAND.0..=HALVING_BAND.1).contains(q));
    let listed: Vec<String> = ratios.iter().map(|q| format!("{q:.4}")).collect();
    outcome.lines.push(format!(
        "CHECK perturbation_order pass={pass} ratios={} band=[{}, {}]",
        listed.join(","),
        HALVING_BAND.0,
        HALVING_BAND.1
    ));
    outcome.failures += usize::from(!pass);
    Ok(outcome)
}

/// Critical times and the selection ratio `X̄/Ȳ` up to the first of them.
fn critical(s: &Settings, out: &OutputDir) -> Result<RunOutcome, CliError> {
    let cfg = perturbation_config(s)?;
    let sol = asymptotic_solution(slow_init(s)?, &cfg)?;
    let (tp, tm) = critical_times(&sol)?;
    let horizon = 0.99 * if cfg.epsilon0 > 0.0 { tp } else { tm };
    let n = 200;
    let mut text = format!("# eps={:.16e}\n# eps0={:.16e}\ntau,X_bar,Y_bar,ratio\n", cfg.epsilon, cfg.epsilon0);
    for i in 0..=n {
        let tau = horizon * i as f64 / n as f64;
        let ratio = selection_ratio(&sol, tau)?;
        let _ = writeln!(text, "{tau:.16e},{:.16e},{:.16e},{ratio:.16e}", sol.x_bar(tau), sol.y_bar(tau));
    }
    let path = csv_path(s, "perturb_critical_times.csv", out);
    write_text(&path, &text)?;
    let mut outcome = RunOutcome::default();
    outcome.csv.push(path);
    outcome.lines.push(format!(
        "CRITICAL eps={} eps0={} K={:.6e} tau_plus={tp:.6e} tau_minus={tm:.6e} t_plus={:.6e} t_minus={:.6e}",
        cfg.epsilon,
        cfg.epsilon0,
        sol.k,
        cfg.original_time(tp),
        cfg.original_time(tm)
    ));
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_span_two_decades() {
        let s = residual_scales();
        assert_eq!(s.len(), 9);
        assert!((s[0] - 1e-4).abs() < 1e-18 && (s[8] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn critical_times_line_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir(Some(dir.path().to_path_buf()));
        let o = perturb(PerturbAction::CriticalTimes, &Settings::default(), &out).unwrap();
        assert!(o.lines[0].starts_with("CRITICAL eps=0.02 eps0=1"));
        let text = std::fs::read_to_string(&o.csv[0]).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 202);
    }

    #[test]
    fn wrong_init_length_is_invalid() {
        let s = Settings { init: Some(vec![1.0, 2.0, 3.0]), ..Settings::default() };
        assert!(matches!(perturb(PerturbAction::Compare, &s, &OutputDir::default()), Err(CliError::Invalid(_))));
    }
}

//! Executes scenarios and collects their report lines.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use qslab_core::bounds::{
    asymmetric_certificates, default_eta, ratio_certificate, symmetric_certificates, u_ratio_certificate,
};
use qslab_core::integrate::integrate;
use qslab_core::observables::{fit_decay_rate, ObservableSystem};
use qslab_core::perturbation::{ScaledOrder, ScaledSystem};
use qslab_core::spectral::{project8, SpectralModel};
use qslab_core::trajectory_csv::write_trajectory_file;
use qslab_core::{
    diagnostics, simulate, to_observables, AsymmetricConstants, DecayCertificate, ModeState, ObservableState, Quantity,
    TimeGrid, Trajectory, TrajectoryMeta,
};
use rayon::prelude::*;

use crate::args::ModelKind;
use crate::scenario::{Check, Scenario};
use crate::CliError;

/// Where CSV files go. A directory set here replaces the directory part of every path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputDir(pub Option<PathBuf>);

impl OutputDir {
    pub fn from_env() -> Self {
        Self(std::env::var_os("QSLAB_OUT_DIR").filter(|v| !v.is_empty()).map(PathBuf::from))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match (&self.0, path.file_name()) {
            (Some(dir), Some(file)) => dir.join(file),
            _ => path.to_path_buf(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub lines: Vec<String>,
    pub csv: Vec<PathBuf>,
    /// Certificates and checks that did not pass.
    pub failures: usize,
}

impl RunOutcome {
    fn line(&mut self, pass: bool, text: String) {
        if !pass {
            self.failures += 1;
        }
        self.lines.push(text);
    }

    fn cert(&mut self, c: &DecayCertificate) {
        self.line(c.pass, c.report_line());
    }

    pub fn merge(&mut self, other: RunOutcome) {
        self.lines.extend(other.lines);
        self.csv.extend(other.csv);
        self.failures += other.failures;
    }
}

fn grid(sc: &Scenario) -> Result<TimeGrid, CliError> {
    TimeGrid::fixed(0.0, sc.t_end, sc.dt)
        .and_then(|g| g.with_stride(sc.stride))
        .map_err(|e| CliError::Invalid(e.to_string()))
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

const OBSERVABLE_HEADER: &str = "t,R,A,w,z,P_re,P_im,Q_re,Q_im";

/// Observable trajectories use their own column set.
pub fn write_observable_csv(path: &Path, traj: &Trajectory<ObservableState>, nu: f64) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut text = String::new();
    let _ = writeln!(text, "# rhs=observable\n# nu={nu:.16e}\n{OBSERVABLE_HEADER}");
    for (t, o) in traj.iter() {
        let _ = write!(text, "{t:.16e}");
        for v in o.to_array() {
            let _ = write!(text, ",{v:.16e}");
        }
        text.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}

/// Runs one scenario: integrate, write CSV, evaluate checks.
pub fn run(sc: &Scenario, out: &OutputDir) -> Result<RunOutcome, CliError> {
    sc.validate()?;
    let grid = grid(sc)?;
    let params = sc.params()?;
    let mut outcome = RunOutcome::default();
    let csv_path = sc.csv.as_ref().map(|p| out.resolve(p));
    if let Some(p) = &csv_path {
        create_parent(p)?;
    }

    let modes: Option<Trajectory<ModeState>> = match sc.model {
        ModelKind::Reduced => Some(simulate(sc.initial_modes()?, &params, &grid)?),
        ModelKind::Scaled => {
            let cfg = sc.perturbation.ok_or_else(|| CliError::Invalid("scaled model without config".into()))?;
            let sys = ScaledSystem::new(cfg, ScaledOrder::Full)?;
            let mut traj = integrate(|s: &ModeState| sys.rhs(s), sc.initial_modes()?, &grid)?;
            traj.meta = TrajectoryMeta::new("scaled")
                .param("eps", cfg.epsilon)
                .param("eps0", cfg.epsilon0)
                .param("nu0", cfg.nu0)
                .param("alpha", cfg.alpha);
            Some(traj)
        }
        ModelKind::Spectral => {
            let model = SpectralModel::new(sc.k_max, sc.delta, sc.nu)?;
            let field = sc.initial_field()?;
            let traj = integrate(|f| model.rhs(f), field, &grid)?;
            let mut proj = traj.map(project8);
            proj.meta = TrajectoryMeta::new("spectral")
                .param("nu", sc.nu)
                .param("delta", sc.delta)
                .param("k_max", sc.k_max as f64);
            Some(proj)
        }
        ModelKind::Observable => {
            let sys = ObservableSystem::new(&params)?;
            let o0 = to_observables(&sc.initial_modes()?)?;
            let traj = integrate(|o: &ObservableState| sys.rhs(o), o0, &grid)?;
            if let Some(p) = &csv_path {
                write_observable_csv(p, &traj, sc.nu)?;
                outcome.csv.push(p.clone());
            }
            outcome.lines.push(format!(
                "RUN {} model=observable samples={} t_end={}",
                sc.name,
                traj.len(),
                traj.t_end()
            ));
            None
        }
    };

    if let Some(traj) = modes {
        if let Some(p) = &csv_path {
            write_trajectory_file(p, &traj).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            outcome.csv.push(p.clone());
        }
        let last = diagnostics(traj.last());
        outcome.lines.push(format!(
            "RUN {} model={} samples={} t_end={} A={:.6e} B={:.6e} E={:.6e}",
            sc.name,
            traj.meta.rhs,
            traj.len(),
            traj.t_end(),
            last.a,
            last.b,
            last.e
        ));
        for check in &sc.checks {
            evaluate(check, sc, &traj, &mut outcome)?;
        }
    }
    Ok(outcome)
}

fn asym_constants(
    sc: &Scenario,
    traj: &Trajectory<ModeState>,
    eta: Option<f64>,
) -> Result<AsymmetricConstants, CliError> {
    let params = sc.params()?;
    let s0 = traj.first();
    let eta = eta.unwrap_or(default_eta(sc.delta));
    Ok(AsymmetricConstants::evaluate(&params, eta, s0.low_energy(), s0.high_energy())?)
}

fn constants_line(c: &AsymmetricConstants) -> String {
    let t_star = c.t_star.map_or("none".to_string(), |t| format!("{t:.6e}"));
    format!(
        "CONSTANTS eta={:.6e} A0={:.6e} B0={:.6e} K1={:.6e} K2={:.6e} D0={:.6e} B_star={:.6e} M0={:.6e} t_star={t_star} gamma={:.6e}",
        c.eta, c.a0, c.b0, c.k1, c.k2, c.d0, c.b_star, c.m0, c.gamma
    )
}

fn series(traj: &Trajectory<ModeState>, q: Quantity) -> Vec<(f64, f64)> {
    traj.iter().map(|(t, s)| (t, q.eval(s).unwrap_or(f64::NAN))).collect()
}

fn evaluate(check: &Check, sc: &Scenario, traj: &Trajectory<ModeState>, out: &mut RunOutcome) -> Result<(), CliError> {
    let nu = sc.nu;
    let name = &sc.name;
    match *check {
        Check::SymmetricCertificates => {
            for c in symmetric_certificates(traj, &sc.params()?)? {
                out.cert(&c);
            }
        }
        Check::AsymmetricCertificates { eta } => {
            let consts = asym_constants(sc, traj, eta)?;
            out.lines.push(constants_line(&consts));
            for c in asymmetric_certificates(traj, &consts)? {
                out.cert(&c);
            }
        }
        Check::RatioCertificate { eta, cap } => {
            let consts = asym_constants(sc, traj, eta)?;
            out.lines.push(constants_line(&consts));
            let c = if sc.delta < 1.0 {
                ratio_certificate(traj, &consts, cap)?
            } else {
                u_ratio_certificate(traj, &consts, cap)?
            };
            out.cert(&c);
        }
        Check::FastHighDecay => {
            let horizon = 1.0 / nu;
            let b = series(traj, Quantity::B);
            let a = series(traj, Quantity::A);
            let (a0, b0) = (a[0].1, b[0].1);
            let drop_t = b.iter().find(|(_, v)| *v <= 0.01 * b0).map(|(t, _)| *t);
            let a_min = a.iter().filter(|(t, _)| *t <= horizon).map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
            let floor = (-2.0f64).exp();
            let pass = drop_t.is_some_and(|t| t <= horizon) && a_min / a0 >= floor;
            let drop = drop_t.map_or("never".to_string(), |t| format!("{t:.6e}"));
            out.line(
                pass,
                format!(
                    "CHECK {name}_fast_high_decay pass={pass} B_below_1pct_at={drop} horizon={horizon:.6e} min_A_ratio={:.6e} floor={floor:.6e}",
                    a_min / a0
                ),
            );
        }
        Check::RatioFlattens => {
            let r = series(traj, Quantity::R);
            let t_end = traj.t_end();
            let late = r.iter().find(|(t, _)| *t >= 0.8 * t_end).map_or(f64::NAN, |p| p.1);
            let (r0, r_end) = (r[0].1, r[r.len() - 1].1);
            let change = ((r_end - late) / r_end).abs();
            let pass = r_end.is_finite() && r_end > 0.0 && change <= 1e-3;
            out.line(
                pass,
                format!("CHECK {name}_ratio_flattens pass={pass} R0={r0:.6e} R_end={r_end:.6e} late_rel_change={change:.3e} tol=1e-3"),
            );
        }
        Check::BackgroundLowRate => {
            let t_end = traj.t_end();
            let rate = fit_decay_rate(traj, Quantity::A, (0.5 * t_end, t_end))?;
            let rel = (rate - 2.0 * nu).abs() / (2.0 * nu);
            let pass = rel <= 1e-2;
            out.line(
                pass,
                format!("CHECK {name}_background_low_rate pass={pass} fitted={rate:.6e} expected={:.6e} rel_err={rel:.3e} tol=1e-2", 2.0 * nu),
            );
        }
        Check::EarlyHighDecay => {
            let t_end = traj.t_end();
            let early = fit_decay_rate(traj, Quantity::B, (0.0, (0.5 / nu).min(t_end / 3.0)))?;
            let late = fit_decay_rate(traj, Quantity::B, (2.0 * t_end / 3.0, t_end))?;
            let rel = (late - 4.0 * nu).abs() / (4.0 * nu);
            let pass = early >= 1.5 * late && rel <= 5e-2;
            out.line(
                pass,
                format!(
                    "CHECK {name}_early_high_decay pass={pass} early_rate={early:.6e} late_rate={late:.6e} background={:.6e} late_rel_err={rel:.3e}",
                    4.0 * nu
                ),
            );
        }
    }
    Ok(())
}

/// Runs scenarios in parallel and concatenates their outcomes in input order.
pub fn run_all(list: &[Scenario], out: &OutputDir) -> Result<RunOutcome, CliError> {
    let results: Vec<Result<RunOutcome, CliError>> = list.par_iter().map(|sc| run(sc, out)).collect();
    let mut total = RunOutcome::default();
    for r in results {
        total.merge(r?);
    }
    Ok(total)
}

//! Decay certificates: each bound is checked sample by sample along a
//! trajectory and summarized by its worst signed margin.
//!
//! Constants that only exist abstractly (`M₁`, `M₂`) are measured from the
//! trajectory and reported; the certificate then checks the functional form.

use std::f64::consts::E as EULER;
use std::fmt;

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::model::{Coefficients, ModeState, ModelParams};
use crate::observables::{diagnostics, fit_log_slope, late_window};

/// Relative slack used when comparing a sample with its bound.
pub const RELATIVE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// The quantity must stay below the curve.
    Upper,
    /// The quantity must stay above the curve.
    Lower,
}

/// A bound as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundCurve {
    /// `amp · e^{-rate t}`.
    Exp { amp: f64, rate: f64 },
    /// `amp · e^{-rate t}` up to `t_switch`, then frozen at its value there.
    ExpThenConst { amp: f64, rate: f64, t_switch: f64 },
}

impl BoundCurve {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            BoundCurve::Exp { amp, rate } => amp * (-rate * t).exp(),
            BoundCurve::ExpThenConst { amp, rate, t_switch } => amp * (-rate * t.min(t_switch)).exp(),
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            BoundCurve::Exp { rate, .. } | BoundCurve::ExpThenConst { rate, .. } => rate,
        }
    }
}

/// Outcome of checking one bound over a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCertificate {
    pub name: String,
    /// Label of the checked diagnostic, e.g. `"A+B"`.
    pub quantity: &'static str,
    pub sense: Sense,
    pub curve: BoundCurve,
    /// Closed time interval on which the bound is asserted.
    pub window: (f64, f64),
    /// Smallest `bound - quantity` (upper) or `quantity - bound` (lower).
    pub worst_margin: f64,
    /// Time of `worst_margin`; NaN when no sample falls in the window.
    pub at_t: f64,
    pub samples: usize,
    pub pass: bool,
    /// Empirical constant, for bounds whose prefactor is measured.
    pub measured_constant: Option<f64>,
    /// Late-window decay rate, for the ratio certificates.
    pub fitted_rate: Option<f64>,
}

impl DecayCertificate {
    /// True when no sample was inside the window.
    pub fn is_vacuous(&self) -> bool {
        self.samples == 0
    }

    /// The one-line report form.
    pub fn report_line(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DecayCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CERT {} pass={} worst_margin={:e} at_t={}", self.name, self.pass, self.worst_margin, self.at_t)?;
        if let Some(m) = self.measured_constant {
            write!(f, " constant={m:e}")?;
        }
        if let Some(r) = self.fitted_rate {
            write!(f, " fitted_rate={r:e}")?;
        }
        Ok(())
    }
}

/// Folds a bound over the samples of `traj` inside `window`.
pub fn check_bound(
    name: &str,
    traj: &Trajectory<ModeState>,
    quantity: (&'static str, &dyn Fn(&ModeState) -> f64),
    sense: Sense,
    curve: BoundCurve,
    window: (f64, f64),
) -> DecayCertificate {
    let (label, eval) = quantity;
    let mut worst = f64::INFINITY;
    let mut at_t = f64::NAN;
    let mut samples = 0;
    let mut pass = true;
    for (t, s) in traj.iter().filter(|(t, _)| *t >= window.0 && *t <= window.1) {
        let q = eval(s);
        let b = curve.eval(t);
        let margin = match sense {
            Sense::Upper => b - q,
            Sense::Lower => q - b,
        };
        // NaN never passes.
        if !(margin >= -RELATIVE_SLACK * b.abs().max(q.abs())) {
            pass = false;
        }
        if !(margin >= worst) {
            worst = margin;
            at_t = t;
        }
        samples += 1;
    }
    DecayCertificate {
        name: name.to_string(),
        quantity: label,
        sense,
        curve,
        window,
        worst_margin: worst,
        at_t,
        samples,
        pass,
        measured_constant: None,
        fitted_rate: None,
    }
}

fn low(s: &ModeState) -> f64 {
    s.low_energy()
}

fn high(s: &ModeState) -> f64 {
    s.high_energy()
}

fn total(s: &ModeState) -> f64 {
    s.low_energy() + s.high_energy()
}

fn energy(s: &ModeState) -> f64 {
    0.5 * total(s)
}

/// Exponent `2A₀/(5νe²)` of the fast B-decay on the symmetric torus.
pub fn symmetric_fast_rate(a0: f64, nu: f64) -> f64 {
    2.0 * a0 / (5.0 * nu * EULER * EULER)
}

/// The three decay certificates on the symmetric torus.
pub fn symmetric_certificates(traj: &Trajectory<ModeState>, params: &ModelParams) -> Result<Vec<DecayCertificate>> {
    params.validate()?;
    if !params.is_symmetric() {
        return Err(Error::Precondition(format!("symmetric certificates need delta = 1, got {}", params.delta)));
    }
    let nu = params.nu;
    let t0 = traj.times[0];
    let s0 = traj.first();
    let (a0, b0) = (low(s0), high(s0));
    let all = (t0, f64::INFINITY);
    let first_phase = (t0, t0 + 1.0 / nu);
    Ok(vec![
        check_bound(
            "sym_total_decay",
            traj,
            ("A+B", &total),
            Sense::Upper,
            BoundCurve::Exp { amp: (a0 + b0) * (2.0 * nu * t0).exp(), rate: 2.0 * nu },
            all,
        ),
        check_bound(
            "sym_low_floor",
            traj,
            ("A", &low),
            Sense::Lower,
            BoundCurve::Exp { amp: a0 * (-2.0f64).exp(), rate: 0.0 },
            first_phase,
        ),
        check_bound(
            "sym_high_fast_decay",
            traj,
            ("B", &high),
            Sense::Upper,
            BoundCurve::ExpThenConst { amp: b0, rate: symmetric_fast_rate(a0, nu), t_switch: 1.0 / nu },
            all,
        ),
    ])
}

/// Constants of the two-phase decay on an asymmetric torus, evaluated for one
/// fixed `(ν, δ, η, A₀, B₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricConstants {
    pub params: ModelParams,
    pub eta: f64,
    pub a0: f64,
    pub b0: f64,
    pub k1: f64,
    pub k2: f64,
    pub d0: f64,
    pub b_star: f64,
    pub m0: f64,
    /// End of the fast phase; absent when `B₀ <= B_star`.
    pub t_star: Option<f64>,
    pub gamma: f64,
}

/// Default `η = 2|δ² − 1|`.
pub fn default_eta(delta: f64) -> f64 {
    2.0 * (delta * delta - 1.0).abs()
}

impl AsymmetricConstants {
    /// Evaluates every constant; `t_star` is left empty when the fast phase is absent.
    pub fn evaluate(params: &ModelParams, eta: f64, a0: f64, b0: f64) -> Result<Self> {
        params.validate()?;
        let (nu, d) = (params.nu, params.delta);
        let d2 = d * d;
        let gap = (d2 - 1.0).abs();
        if !(gap > 0.0 && gap < eta && eta.is_finite()) {
            return Err(Error::Precondition(format!("need 0 < |delta^2 - 1| = {gap:e} < eta = {eta:e}")));
        }
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(Error::Precondition(format!("A0 must be positive, got {a0:e}")));
        }
        if !(b0 >= 0.0 && b0.is_finite()) {
            return Err(Error::Precondition(format!("B0 must be nonnegative, got {b0:e}")));
        }
        let k1 = 1.0f64.min(1.0 / d2);
        let k2 = 2.0 * 1.0f64.max(1.0 / d2) + 6.0 * 2.0f64.sqrt() * (a0 + b0).sqrt();
        let d0 = ((1.0 + 3.0 * d2) / (d2 * (1.0 + d2) * (1.0 + 4.0 * d2)))
            .min(d2 * d2 * d2 * (3.0 + d2) / ((1.0 + d2) * (4.0 + d2)));
        let b_star = 128.0 * nu * nu * eta * eta / (d2 * d0 * d0);
        let m0 = d0 * a0 / (2.0 * k2.exp());
        let t_star = (b0 > b_star).then(|| -(nu / m0) * (b_star / b0).ln());
        Ok(Self { params: *params, eta, a0, b0, k1, k2, d0, b_star, m0, t_star, gamma: 2.0 * nu * (1.0 / d2 - 1.0) })
    }

    /// End of the window on which `A >= A₀e^{-K₂}` is asserted.
    pub fn low_floor_horizon(&self) -> f64 {
        (1.0 / self.params.nu).min(1.0 / self.eta)
    }
}

/// Constants for a run starting with low energy `a0` and high energy `b0`.
///
/// Fails with [`Error::FastPhaseAbsent`] when `b0 <= B_star`.
pub fn asymmetric_constants(params: &ModelParams, eta: f64, a0: f64, b0: f64) -> Result<AsymmetricConstants> {
    let c = AsymmetricConstants::evaluate(params, eta, a0, b0)?;
    if c.t_star.is_none() {
        return Err(Error::FastPhaseAbsent { b0, b_star: c.b_star });
    }
    Ok(c)
}

/// The four decay certificates on an asymmetric torus.
///
/// Without a fast phase the fast-decay bound is vacuous and the background
/// constant `M₁` is measured from the first sample.
pub fn asymmetric_certificates(
    traj: &Trajectory<ModeState>,
    consts: &AsymmetricConstants,
) -> Result<Vec<DecayCertificate>> {
    let p = consts.params;
    if p.is_symmetric() {
        return Err(Error::Precondition("asymmetric certificates need delta != 1".into()));
    }
    let nu = p.nu;
    let t0 = traj.times[0];
    let background = 2.0 * nu * consts.k1;
    let e0 = energy(traj.first());

    let energy_cert = check_bound(
        "asym_energy_decay",
        traj,
        ("E", &energy),
        Sense::Upper,
        BoundCurve::Exp { amp: e0 * (background * t0).exp(), rate: background },
        (t0, f64::INFINITY),
    );

    let (fast_window, t_late) = match consts.t_star {
        Some(ts) => ((t0, t0 + ts), t0 + ts),
        None => ((f64::INFINITY, f64::NEG_INFINITY), t0),
    };
    let fast_cert = check_bound(
        "asym_high_fast_decay",
        traj,
        ("B", &high),
        Sense::Upper,
        BoundCurve::Exp { amp: consts.b0 * ((consts.m0 / nu) * t0).exp(), rate: consts.m0 / nu },
        fast_window,
    );

    let scale = consts.eta * consts.eta * nu * nu;
    let late_cert = if t_late <= traj.t_end() {
        let i = traj.times.partition_point(|&t| t < t_late);
        let t1 = traj.times[i];
        let m1 = high(&traj.states[i]) * (background * t1).exp() / scale;
        let mut c = check_bound(
            "asym_high_background",
            traj,
            ("B", &high),
            Sense::Upper,
            BoundCurve::Exp { amp: m1 * scale, rate: background },
            (t1, f64::INFINITY),
        );
        c.measured_constant = Some(m1);
        c
    } else {
        check_bound(
            "asym_high_background",
            traj,
            ("B", &high),
            Sense::Upper,
            BoundCurve::Exp { amp: 0.0, rate: background },
            (f64::INFINITY, f64::NEG_INFINITY),
        )
    };

    let floor_cert = check_bound(
        "asym_low_floor",
        traj,
        ("A", &low),
        Sense::Lower,
        BoundCurve::Exp { amp: consts.a0 * (-consts.k2).exp(), rate: 0.0 },
        (t0, t0 + consts.low_floor_horizon()),
    );

    Ok(vec![energy_cert, fast_cert, late_cert, floor_cert])
}

#[derive(Clone, Copy)]
enum Chart {
    R,
    U,
}

fn ratio_cert(
    traj: &Trajectory<ModeState>,
    consts: &AsymmetricConstants,
    cap: f64,
    chart: Chart,
) -> Result<DecayCertificate> {
    let nu = consts.params.nu;
    let d2 = consts.params.delta * consts.params.delta;
    let (name, label, rate) = match chart {
        Chart::R => ("ratio_decay", "R", consts.gamma),
        Chart::U => ("inverse_ratio_decay", "U", 2.0 * nu * (1.0 - 1.0 / d2)),
    };
    let mut values = Vec::with_capacity(traj.len());
    for (t, s) in traj.iter() {
        let d = diagnostics(s);
        let v = match chart {
            Chart::R => d.r.ok_or(Error::DegenerateOmega3(s.omega3.norm_sqr()))?,
            Chart::U => d.u.ok_or(Error::DivisionHazard { what: "|omega1|^2", value: s.omega1.norm_sqr() })?,
        };
        if t == traj.times[0] && !(v <= cap) {
            return Err(Error::Precondition(format!("initial {label} = {v:e} exceeds the cap {cap:e}")));
        }
        values.push(v);
    }
    let m2 = traj.times.iter().zip(&values).map(|(t, v)| v * (rate * t).exp()).fold(0.0, f64::max);
    let lookup = |s: &ModeState| {
        let d = diagnostics(s);
        match chart {
            Chart::R => d.r.unwrap_or(f64::NAN),
            Chart::U => d.u.unwrap_or(f64::NAN),
        }
    };
    let mut cert = check_bound(
        name,
        traj,
        (label, &lookup),
        Sense::Upper,
        BoundCurve::Exp { amp: m2, rate },
        (traj.times[0], f64::INFINITY),
    );
    cert.measured_constant = Some(m2);
    if m2 == 0.0 {
        return Ok(cert);
    }
    let (ta, tb) = late_window(traj, consts.t_star.map_or(traj.times[0], |ts| traj.times[0] + ts));
    let (ts, vs): (Vec<f64>, Vec<f64>) =
        traj.times.iter().zip(&values).filter(|(t, _)| **t >= ta && **t <= tb).map(|(t, v)| (*t, *v)).unzip();
    let fitted = -fit_log_slope(&ts, &vs)?;
    cert.fitted_rate = Some(fitted);
    cert.pass = cert.pass && fitted >= 0.9 * rate;
    Ok(cert)
}

/// Decay of `R = |ω₁|²/|ω₃|²` at rate `γ` for `δ < 1`.
///
/// `M₂` is measured as `max R(t)e^{γt}`; the certificate passes when the
/// late-window decay rate is at least `0.9γ`.
pub fn ratio_certificate(
    traj: &Trajectory<ModeState>,
    consts: &AsymmetricConstants,
    r0_cap: f64,
) -> Result<DecayCertificate> {
    if !(consts.params.delta < 1.0) {
        return Err(Error::Precondition(format!(
            "R decays only for delta < 1 (got {}); use u_ratio_certificate for delta > 1",
            consts.params.delta
        )));
    }
    ratio_cert(traj, consts, r0_cap, Chart::R)
}

/// Mirror of [`ratio_certificate`] for `U = 1/R` and `δ > 1`, with rate `2ν(1 − 1/δ²)`.
pub fn u_ratio_certificate(
    traj: &Trajectory<ModeState>,
    consts: &AsymmetricConstants,
    u0_cap: f64,
) -> Result<DecayCertificate> {
    if !(consts.params.delta > 1.0) {
        return Err(Error::Precondition(format!(
            "U decays only for delta > 1 (got {}); use ratio_certificate for delta < 1",
            consts.params.delta
        )));
    }
    ratio_cert(traj, consts, u0_cap, Chart::U)
}

/// `dE/dt` computed directly as `Re Σ conj(ω_k) dω_k/dt`.
pub fn energy_rate(state: &ModeState, params: &ModelParams) -> Result<f64> {
    let d = crate::model::reduced_rhs(state, params)?;
    Ok(state.components().iter().zip(d.components()).map(|(w, dw)| (w.conj() * dw).re).sum())
}

/// The closed negative-definite expression for `dE/dt`.
pub fn energy_rate_closed_form(state: &ModeState, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let (nu, d2) = (params.nu, params.delta * params.delta);
    let n1 = state.omega1.norm_sqr();
    let n3 = state.omega3.norm_sqr();
    let b = state.high_energy();
    let s = (1.0 + d2) * (1.0 + d2);
    Ok(-nu * (n1 / d2 + n3 + (1.0 + d2) / d2 * b)
        - d2 * d2 * d2 * d2 / (2.0 * nu * s) * n1 * b
        - 1.0 / (2.0 * nu * d2 * s) * n3 * b)
}

/// `dB/dt` at δ = 1, which is never positive.
pub fn symmetric_high_rate(state: &ModeState, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let k = Coefficients::new(params);
    let d = k.rhs(state);
    Ok(2.0 * ((state.omega5.conj() * d.omega5).re + (state.omega7.conj() * d.omega7).re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, TimeGrid, TrajectoryMeta};
    use crate::model::ReducedSystem;
    use approx::assert_relative_eq;

    fn run(s0: ModeState, p: ModelParams, t_end: f64, dt: f64) -> Trajectory<ModeState> {
        let sys = ReducedSystem::new(p).unwrap();
        let grid = TimeGrid::fixed(0.0, t_end, dt).unwrap();
        integrate(|s: &ModeState| sys.rhs(s), s0, &grid).unwrap()
    }

    #[test]
    fn zero_data_passes_with_zero_margin() {
        let p = ModelParams::symmetric(0.01).unwrap();
        let traj = run(ModeState::zero(), p, 10.0, 0.1);
        for c in symmetric_certificates(&traj, &p).unwrap() {
            assert!(c.pass, "{c}");
            assert_eq!(c.worst_margin, 0.0);
        }
    }

    #[test]
    fn lemma_example_passes() {
        let p = ModelParams::symmetric(0.01).unwrap();
        let s0 = ModeState::real(0.3, 0.1, 0.05f64.sqrt() * 0.6, 0.05f64.sqrt() * 0.8);
        assert_relative_eq!(s0.low_energy(), 0.1, max_relative = 1e-12);
        assert_relative_eq!(s0.high_energy(), 0.05, max_relative = 1e-12);
        let traj = run(s0, p, 200.0, 0.01);
        for c in symmetric_certificates(&traj, &p).unwrap() {
            assert!(c.pass, "{c}");
        }
    }

    #[test]
    fn injected_violation_is_located() {
        let p = ModelParams::symmetric(0.1).unwrap();
        let times: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let mut states: Vec<ModeState> =
            times.iter().map(|t| ModeState::real((-0.2 * t).exp() * 0.1, 0.0, 0.0, 0.0)).collect();
        states[7] = ModeState::real(0.2, 0.0, 0.0, 0.0);
        let traj = Trajectory::from_samples(times, states, TrajectoryMeta::new("synthetic")).unwrap();
        let certs = symmetric_certificates(&traj, &p).unwrap();
        assert!(!certs[0].pass);
        assert_eq!(certs[0].at_t, 7.0);
        assert!(certs[0].worst_margin < 0.0);
        assert!(symmetric_certificates(&traj, &ModelParams::new(0.1, 0.9).unwrap()).is_err());
    }

    #[test]
    fn constants_by_hand() {
        let p = ModelParams::new(0.01, 0.95).unwrap();
        let c = AsymmetricConstants::evaluate(&p, 0.1, 0.1, 0.05).unwrap();
        let d2: f64 = 0.9025;
        assert_eq!(c.k1, 1.0);
        assert_relative_eq!(c.k2, 2.0 / d2 + 6.0 * (2.0f64 * 0.15).sqrt(), max_relative = 1e-15);
        let first = (1.0 + 3.0 * d2) / (d2 * (1.0 + d2) * (1.0 + 4.0 * d2));
        let second = d2.powi(3) * (3.0 + d2) / ((1.0 + d2) * (4.0 + d2));
        assert_relative_eq!(c.d0, first.min(second), max_relative = 1e-15);
        assert_relative_eq!(c.b_star, 128.0 * 1e-4 * 0.01 / (d2 * c.d0 * c.d0), max_relative = 1e-14);
        assert_relative_eq!(c.m0, c.d0 * 0.1 / (2.0 * c.k2.exp()), max_relative = 1e-15);
        let ts = c.t_star.unwrap();
        assert!(ts > 0.0);
        assert_relative_eq!(0.05 * (-(c.m0 / 0.01) * ts).exp(), c.b_star, max_relative = 1e-12);
        assert_relative_eq!(c.gamma, 0.02 * (1.0 / d2 - 1.0), max_relative = 1e-15);
    }

    #[test]
    fn constants_preconditions() {
        let wide = ModelParams::new(0.01, 1.1).unwrap();
        assert!(AsymmetricConstants::evaluate(&wide, 0.5, 0.1, 0.05).unwrap().k1 < 1.0);
        let p = ModelParams::new(0.01, 0.95).unwrap();
        assert!(matches!(asymmetric_constants(&p, 0.1, 0.1, 1e-12), Err(Error::FastPhaseAbsent { .. })));
        assert!(asymmetric_constants(&p, 0.05, 0.1, 0.05).is_err());
        assert!(asymmetric_constants(&p, 0.1, 0.0, 0.05).is_err());
        let sym = ModelParams::symmetric(0.01).unwrap();
        assert!(asymmetric_constants(&sym, 0.1, 0.1, 0.05).is_err());
    }

    #[test]
    fn higher_low_energy_tightens_fast_exponent() {
        assert!(symmetric_fast_rate(0.2, 0.01) > symmetric_fast_rate(0.1, 0.01));
        let p = ModelParams::new(0.01, 0.95).unwrap();
        let lo = AsymmetricConstants::evaluate(&p, 0.1, 0.01, 0.05).unwrap();
        let hi = AsymmetricConstants::evaluate(&p, 0.1, 0.02, 0.05).unwrap();
        assert!(hi.m0 > lo.m0);
    }

    #[test]
    fn bar_state_is_vacuous_for_high_modes() {
        let p = ModelParams::new(0.01, 0.95).unwrap();
        let s0 = ModeState::real(0.0, 0.3, 0.0, 0.0);
        let consts = AsymmetricConstants::evaluate(&p, default_eta(0.95), s0.low_energy(), 0.0).unwrap();
        assert!(consts.t_star.is_none());
        let traj = run(s0, p, 50.0, 0.1);
        let certs = asymmetric_certificates(&traj, &consts).unwrap();
        assert!(certs.iter().all(|c| c.pass));
        assert!(certs[1].is_vacuous());
        assert_eq!(certs[2].measured_constant, Some(0.0));
        let ratio = ratio_certificate(&traj, &consts, 1.0).unwrap();
        assert!(ratio.pass);
        assert_eq!(ratio.measured_constant, Some(0.0));
        assert!(u_ratio_certificate(&traj, &consts, 1.0).is_err());
    }

    #[test]
    fn x_bar_mirror_is_vacuous() {
        let p = ModelParams::new(0.01, 1.05).unwrap();
        let s0 = ModeState::real(0.3, 0.0, 0.0, 0.0);
        let consts = AsymmetricConstants::evaluate(&p, default_eta(1.05), s0.low_energy(), 0.0).unwrap();
        let traj = run(s0, p, 20.0, 0.1);
        let u = u_ratio_certificate(&traj, &consts, 1.0).unwrap();
        assert!(u.pass);
        assert_eq!(u.measured_constant, Some(0.0));
        assert!(ratio_certificate(&traj, &consts, 1.0).is_err());
    }

    #[test]
    fn energy_identity_and_monotone_high_energy() {
        let states = [
            ModeState::real(0.3, -0.2, 0.05, 0.07),
            ModeState::new(
                num_complex::Complex64::new(0.1, 0.2),
                num_complex::Complex64::new(-0.3, 0.05),
                num_complex::Complex64::new(0.02, -0.04),
                num_complex::Complex64::new(0.01, 0.03),
            ),
        ];
        for delta in [0.85, 0.95, 1.0, 1.1, 1.2] {
            let p = ModelParams::new(0.03, delta).unwrap();
            let k1 = 1.0f64.min(1.0 / (delta * delta));
            for s in &states {
                let direct = energy_rate(s, &p).unwrap();
                let closed = energy_rate_closed_form(s, &p).unwrap();
                assert_relative_eq!(direct, closed, max_relative = 1e-10);
                assert!(direct <= -2.0 * 0.03 * k1 * energy(s));
            }
        }
        let p = ModelParams::symmetric(0.03).unwrap();
        for s in &states {
            assert!(symmetric_high_rate(s, &p).unwrap() <= 0.0);
        }
    }
}

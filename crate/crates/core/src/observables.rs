//! Phase-reduced observables `(R, A, w, z, P, Q)` and scalar diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{Phase, Trajectory};
use crate::model::{Coefficients, ModeState, ModelParams};

/// Floor on `|ω3|²` (and on `|ω1|²` for the mirrored chart) below which the
/// ratio charts are treated as degenerate.
pub const CHART_FLOOR: f64 = 1e-30;

/// The real 8-vector `(R, A, w, z, Re P, Im P, Re Q, Im Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObservableState {
    pub r: f64,
    pub a: f64,
    pub w: f64,
    pub z: f64,
    pub p: Complex64,
    pub q: Complex64,
}

impl ObservableState {
    pub fn from_array(v: [f64; 8]) -> Self {
        Self { r: v[0], a: v[1], w: v[2], z: v[3], p: Complex64::new(v[4], v[5]), q: Complex64::new(v[6], v[7]) }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [self.r, self.a, self.w, self.z, self.p.re, self.p.im, self.q.re, self.q.im]
    }

    /// The fixed point `(r, 0, ..., 0)`.
    pub fn fixed_point(r: f64) -> Self {
        Self { r, ..Self::default() }
    }
}

impl Phase for ObservableState {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        Self::from_array(self.to_array().axpy(a, &x.to_array()))
    }
    fn max_abs(&self) -> f64 {
        self.to_array().max_abs()
    }
}

pub fn to_observables(state: &ModeState) -> Result<ObservableState> {
    to_observables_with_floor(state, CHART_FLOOR)
}

pub fn to_observables_with_floor(state: &ModeState, floor: f64) -> Result<ObservableState> {
    let n3 = state.omega3.norm_sqr();
    if !(n3 >= floor) || n3 == 0.0 {
        return Err(Error::DegenerateOmega3(n3));
    }
    let ModeState { omega1: w1, omega3: w3, omega5: w5, omega7: w7 } = *state;
    Ok(ObservableState {
        r: w1.norm_sqr() / n3,
        a: w1.norm_sqr() + n3,
        w: w5.norm_sqr(),
        z: w7.norm_sqr(),
        p: w1 * w3.conj() * w7.conj() / n3,
        q: w1.conj() * w3.conj() * w5 / n3,
    })
}

/// Vector field in observable coordinates on the symmetric torus (δ = 1).
#[derive(Debug, Clone, Copy)]
pub struct ObservableSystem {
    pub nu: f64,
}

impl ObservableSystem {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if !params.is_symmetric() {
            return Err(Error::InvalidParams(format!(
                "observable dynamics are closed only for delta = 1, got {}",
                params.delta
            )));
        }
        Ok(Self { nu: params.nu })
    }

    /// Evaluates the eight real equations without checking `R`.
    pub fn rhs(&self, o: &ObservableState) -> ObservableState {
        let nu = self.nu;
        let ObservableState { r, a, w, z, p, q } = *o;
        let (pr, pi, qr, qi) = (p.re, p.im, q.re, q.im);
        let ir = 1.0 / r;
        let damp = a / (5.0 * nu);
        let diff = pr - qr;

        let dr = (1.0 + r) * diff;
        let da = -2.0 * nu * a + 3.0 / (20.0 * nu) * a * (w + z);
        let dw = -4.0 * nu * w - 2.0 / (5.0 * nu) * w * a;
        let dz = -4.0 * nu * z - 2.0 / (5.0 * nu) * z * a;
        let dpr = -2.0 * nu * pr + z / 2.0 * (1.0 - r) - pr * damp
            + diff * pr
            + 0.5 * pr * qr * (1.0 - ir)
            + 0.5 * pi * qi * (1.0 + ir);
        let dpi = -2.0 * nu * pi - pi * damp + diff * pi + 0.5 * pi * qr * (1.0 - ir) - 0.5 * pr * qi * (1.0 + ir);
        let dqr = -2.0 * nu * qr + w / 2.0 * (r - 1.0) - qr * damp + diff * qr + 0.5 * pr * qr * (ir - 1.0)
            - 0.5 * pi * qi * (ir + 1.0);
        let dqi = -2.0 * nu * qi - qi * damp + diff * qi + 0.5 * pi * qr * (ir + 1.0) + 0.5 * pr * qi * (ir - 1.0);
        ObservableState::from_array([dr, da, dw, dz, dpr, dpi, dqr, dqi])
    }
}

pub fn observable_rhs(obs: &ObservableState, params: &ModelParams) -> Result<ObservableState> {
    let sys = ObservableSystem::new(params)?;
    if !(obs.r >= CHART_FLOOR) {
        return Err(Error::DivisionHazard { what: "R", value: obs.r });
    }
    Ok(sys.rhs(obs))
}

/// Derivative of `(A, B)` on the symmetric torus.
pub fn ab_rhs(a: f64, b: f64, params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    if !params.is_symmetric() {
        return Err(Error::InvalidParams("the (A, B) system needs delta = 1".into()));
    }
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Precondition(format!("A and B must be nonnegative, got ({a}, {b})")));
    }
    let nu = params.nu;
    Ok((-2.0 * nu * a + 3.0 / (20.0 * nu) * a * b, -4.0 * nu * b - 2.0 / (5.0 * nu) * a * b))
}

/// Velocity of the observables induced by a mode-space velocity `deriv` at `state`.
pub fn pushforward(state: &ModeState, deriv: &ModeState) -> Result<ObservableState> {
    let n3 = state.omega3.norm_sqr();
    if !(n3 >= CHART_FLOOR) {
        return Err(Error::DegenerateOmega3(n3));
    }
    let ModeState { omega1: w1, omega3: w3, omega5: w5, omega7: w7 } = *state;
    let ModeState { omega1: d1, omega3: d3, omega5: d5, omega7: d7 } = *deriv;
    let dn1 = 2.0 * (w1.conj() * d1).re;
    let dn3 = 2.0 * (w3.conj() * d3).re;
    let n1 = w1.norm_sqr();
    let p_num = w1 * w3.conj() * w7.conj();
    let dp_num = d1 * w3.conj() * w7.conj() + w1 * d3.conj() * w7.conj() + w1 * w3.conj() * d7.conj();
    let q_num = w1.conj() * w3.conj() * w5;
    let dq_num = d1.conj() * w3.conj() * w5 + w1.conj() * d3.conj() * w5 + w1.conj() * w3.conj() * d5;
    Ok(ObservableState {
        r: (dn1 * n3 - n1 * dn3) / (n3 * n3),
        a: dn1 + dn3,
        w: 2.0 * (w5.conj() * d5).re,
        z: 2.0 * (w7.conj() * d7).re,
        p: (dp_num * n3 - p_num * dn3) / (n3 * n3),
        q: (dq_num * n3 - q_num * dn3) / (n3 * n3),
    })
}

/// Central-difference version of [`pushforward`] with step `h`.
pub fn pushforward_fd(state: &ModeState, deriv: &ModeState, h: f64) -> Result<ObservableState> {
    let plus = to_observables(&state.axpy(h, deriv))?;
    let minus = to_observables(&state.axpy(-h, deriv))?;
    Ok(plus.axpy(-1.0, &minus).scaled(0.5 / h))
}

impl ObservableState {
    fn scaled(&self, s: f64) -> Self {
        Self::from_array(self.to_array().map(|x| x * s))
    }
}

/// Scalar diagnostics of a mode state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub a: f64,
    pub b: f64,
    pub e: f64,
    /// `|ω1|²/|ω3|²`, absent when `|ω3|²` is below the chart floor.
    pub r: Option<f64>,
    /// `|ω3|²/|ω1|²`, absent when `|ω1|²` is below the chart floor.
    pub u: Option<f64>,
}

pub fn diagnostics(state: &ModeState) -> Diagnostics {
    let n1 = state.omega1.norm_sqr();
    let n3 = state.omega3.norm_sqr();
    let a = n1 + n3;
    let b = state.high_energy();
    let valid = |n: f64| n >= CHART_FLOOR;
    Diagnostics { a, b, e: 0.5 * (a + b), r: valid(n3).then(|| n1 / n3), u: valid(n1).then(|| n3 / n1) }
}

/// Selects a scalar diagnostic of a mode state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    A,
    B,
    E,
    R,
    U,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::A => "A",
            Quantity::B => "B",
            Quantity::E => "E",
            Quantity::R => "R",
            Quantity::U => "U",
        }
    }

    pub fn eval(&self, s: &ModeState) -> Option<f64> {
        let d = diagnostics(s);
        match self {
            Quantity::A => Some(d.a),
            Quantity::B => Some(d.b),
            Quantity::E => Some(d.e),
            Quantity::R => d.r,
            Quantity::U => d.u,
        }
    }
}

/// Least-squares slope of `ln(values)` against `times`.
pub fn fit_log_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::FitWindow(format!("need at least two samples, got {}", times.len())));
    }
    for (&t, &v) in times.iter().zip(values) {
        if !(v > 0.0) {
            return Err(Error::NonPositive { what: "fitted quantity", value: v, t });
        }
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let ym = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        sxy += (t - tm) * (v.ln() - ym);
        sxx += (t - tm) * (t - tm);
    }
    if sxx == 0.0 {
        return Err(Error::FitWindow("window contains a single time".into()));
    }
    Ok(sxy / sxx)
}

/// Decay rate (negated log-slope) of `quantity` over the window `[ta, tb]`.
pub fn fit_decay_rate(traj: &Trajectory<ModeState>, quantity: Quantity, window: (f64, f64)) -> Result<f64> {
    let (ta, tb) = window;
    if !(ta < tb && ta >= traj.times[0] && tb <= traj.t_end()) {
        return Err(Error::FitWindow(format!(
            "[{ta}, {tb}] not inside trajectory span [{}, {}]",
            traj.times[0],
            traj.t_end()
        )));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (t, s) in traj.iter().filter(|(t, _)| *t >= ta && *t <= tb) {
        let v = quantity.eval(s).ok_or(Error::NonPositive { what: quantity.name(), value: f64::NAN, t })?;
        ts.push(t);
        vs.push(v);
    }
    fit_log_slope(&ts, &vs).map(|slope| -slope).map_err(|e| match e {
        Error::NonPositive { value, t, .. } => Error::NonPositive { what: quantity.name(), value, t },
        e => e,
    })
}

/// Second half of the part of the trajectory after `t_star`.
pub fn late_window<S>(traj: &Trajectory<S>, t_star: f64) -> (f64, f64) {
    let start = t_star.max(traj.times[0]);
    (start + 0.5 * (traj.t_end() - start), traj.t_end())
}

/// Real-part bracket `Re(conj(ω1) ω3 ω7) - Re(conj(ω1) conj(ω3) ω5)` that drives R.
pub fn ratio_bracket(s: &ModeState) -> f64 {
    (s.omega1.conj() * s.omega3 * s.omega7).re - (s.omega1.conj() * s.omega3.conj() * s.omega5).re
}

/// dR/dt written with the growth rate γ = 2ν(1/δ² − 1) split off, valid for any admissible δ.
pub fn asymmetric_ratio_rate(state: &ModeState, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let n3 = state.omega3.norm_sqr();
    if !(n3 >= CHART_FLOOR) {
        return Err(Error::DegenerateOmega3(n3));
    }
    let k = Coefficients::new(params);
    let gamma = 2.0 * params.nu * (k.lin1 - 1.0);
    let r = state.omega1.norm_sqr() / n3;
    let b = state.high_energy();
    let br = ratio_bracket(state);
    Ok(-gamma * r + 2.0 * (k.cub1 - k.cub3) * r * b + 2.0 * k.quad1 * br / n3 + 2.0 * k.quad3 * r * br / n3)
}

/// dU/dt for U = 1/R, the mirror of [`asymmetric_ratio_rate`].
pub fn asymmetric_inverse_ratio_rate(state: &ModeState, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let n1 = state.omega1.norm_sqr();
    if !(n1 >= CHART_FLOOR) {
        return Err(Error::DivisionHazard { what: "|omega1|^2", value: n1 });
    }
    let k = Coefficients::new(params);
    let gamma = 2.0 * params.nu * (k.lin1 - 1.0);
    let u = state.omega3.norm_sqr() / n1;
    let b = state.high_energy();
    let br = ratio_bracket(state);
    Ok(gamma * u - 2.0 * (k.cub1 - k.cub3) * u * b - 2.0 * k.quad1 * u * br / n1 - 2.0 * k.quad3 * br / n1)
}

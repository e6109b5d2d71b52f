//! Slow-fast expansion near the symmetric torus, `δ = 1 + ε₀ε`.
//!
//! Variables are scaled as `ν = ε^α ν₀`, `τ = ε^α t`, `ω₁,₃ = ε^β Ω₁,₃` and
//! `ω₅,₇ = ε^φ Ω₅,₇` with `β = α − 1/2`, `φ = α`. In these variables the high
//! modes relax on the fast scale `s = τ/ε` while the low modes evolve on `τ`.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{integrate, TimeGrid};
use crate::model::{ModeState, ModelParams};
use crate::observables::fit_log_slope;

/// Scaling parameters of the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    pub epsilon: f64,
    /// Sign of `δ − 1`; either `1.0` or `-1.0`.
    pub epsilon0: f64,
    pub nu0: f64,
    pub alpha: f64,
}

impl PerturbationConfig {
    pub fn new(epsilon: f64, epsilon0: f64, nu0: f64, alpha: f64) -> Result<Self> {
        let c = Self { epsilon, epsilon0, nu0, alpha };
        c.validate()?;
        Ok(c)
    }

    /// `α = 1`, `ν₀ = 1`.
    pub fn standard(epsilon: f64, epsilon0: f64) -> Result<Self> {
        Self::new(epsilon, epsilon0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.epsilon0 != 1.0 && self.epsilon0 != -1.0 {
            return Err(Error::InvalidParams(format!("epsilon0 must be +1 or -1, got {}", self.epsilon0)));
        }
        if !(self.nu0 > 0.0 && self.nu0.is_finite()) {
            return Err(Error::InvalidParams(format!("nu0 must be positive, got {}", self.nu0)));
        }
        if !(self.alpha > 0.5 && self.alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("alpha must exceed 1/2, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.alpha - 0.5
    }

    pub fn phi(&self) -> f64 {
        self.alpha
    }

    /// `β − α`, always `−1/2`.
    pub fn sigma(&self) -> f64 {
        self.beta() - self.alpha
    }

    /// `φ − α`, always `0`.
    pub fn rho(&self) -> f64 {
        self.phi() - self.alpha
    }

    pub fn delta(&self) -> f64 {
        1.0 + self.epsilon0 * self.epsilon
    }

    /// Unscaled parameters `ν = ε^α ν₀`, `δ = 1 + ε₀ε`.
    pub fn original_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.epsilon.powf(self.alpha) * self.nu0, self.delta())
    }

    /// Maps scaled amplitudes `Ω` to the unscaled `ω`.
    pub fn to_original(&self, big: &ModeState) -> ModeState {
        let lo = self.epsilon.powf(self.beta());
        let hi = self.epsilon.powf(self.phi());
        ModeState::new(big.omega1 * lo, big.omega3 * lo, big.omega5 * hi, big.omega7 * hi)
    }

    /// Maps unscaled `ω` to scaled `Ω`.
    pub fn from_original(&self, small: &ModeState) -> ModeState {
        let lo = self.epsilon.powf(-self.beta());
        let hi = self.epsilon.powf(-self.phi());
        ModeState::new(small.omega1 * lo, small.omega3 * lo, small.omega5 * hi, small.omega7 * hi)
    }

    /// Unscaled time `t = ε^{−α} τ`.
    pub fn original_time(&self, tau: f64) -> f64 {
        tau * self.epsilon.powf(-self.alpha)
    }
}

/// Truncated Taylor polynomial in `ε` through second order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet([f64; 3]);

impl Jet {
    fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0])
    }
}

impl From<f64> for Jet {
    fn from(c: f64) -> Self {
        Jet::constant(c)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[0] * b[2] + a[1] * b[1] + a[2] * b[0]])
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        let q0 = a[0] / b[0];
        let q1 = (a[1] - q0 * b[1]) / b[0];
        let q2 = (a[2] - q0 * b[2] - q1 * b[1]) / b[0];
        Jet([q0, q1, q2])
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet(o.0.map(|x| self * x))
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::constant(self) + o
    }
}

/// The nine δ-dependent coefficient functions, generic over the number type.
fn generating_functions<T>(d: T) -> [T; 9]
where
    T: Copy + From<f64> + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
    f64: Mul<T, Output = T> + Add<T, Output = T>,
{
    let d2 = d * d;
    let d3 = d2 * d;
    let d6 = d3 * d3;
    let one = T::from(1.0);
    let p1 = 1.0 + d2;
    let p4 = 4.0 + d2;
    let q4 = 1.0 + 4.0 * d2;
    [
        one / d2,
        one / (d * p1),
        3.0 * d6 / (2.0 * (p4 * p1 * p1)),
        d3 / p1,
        3.0 * d2 / (2.0 * (q4 * p1 * p1)),
        d6 * (3.0 + d2) / (2.0 * (p4 * p1)),
        (1.0 + 3.0 * d2) / (2.0 * (d2 * q4 * p1)),
        p1 / d2,
        (d2 - one) / d,
    ]
}

/// Evaluates the coefficient functions at a real δ.
pub fn coefficient_functions(delta: f64) -> [f64; 9] {
    generating_functions(delta)
}

/// Taylor coefficients `c^i_j`, `j = 0, 1, 2`, of the nine coefficient
/// functions at `δ = 1 + ε₀ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSeries {
    pub epsilon0: f64,
    /// `c[i - 1][j]` holds `c^i_j`.
    pub c: [[f64; 3]; 9],
}

impl CoefficientSeries {
    /// `c^i_j` with the 1-based index used in the expansion.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i - 1][j]
    }
}

pub fn coefficient_series(epsilon0: f64) -> CoefficientSeries {
    let delta = Jet([1.0, epsilon0, 0.0]);
    let f = generating_functions(delta);
    CoefficientSeries { epsilon0, c: f.map(|j| j.0) }
}

/// Truncation of the coefficient sums in [`scaled_rhs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaledOrder {
    /// `j = 0` only.
    Leading,
    /// `j <= 1`.
    First,
    /// Exact coefficient functions: an exact change of variables.
    Full,
}

/// Effective coefficients for one `(config, order)`; the ninth entry already
/// carries the `1/ε` so that it multiplies the forcing directly.
fn effective_coefficients(cfg: &PerturbationConfig, order: ScaledOrder) -> [f64; 9] {
    let eps = cfg.epsilon;
    match order {
        ScaledOrder::Full => {
            let mut c = coefficient_functions(cfg.delta());
            c[8] /= eps;
            c
        }
        ScaledOrder::Leading | ScaledOrder::First => {
            let top = if order == ScaledOrder::Leading { 0 } else { 1 };
            let s = coefficient_series(cfg.epsilon0);
            let mut c = [0.0; 9];
            for (i, ci) in c.iter_mut().enumerate() {
                let shift = usize::from(i == 8);
                *ci = (0..=top).map(|j| s.c[i][j + shift] * eps.powi(j as i32)).sum();
            }
            c
        }
    }
}

/// A scaled vector field with its coefficients frozen.
#[derive(Debug, Clone, Copy)]
pub struct ScaledSystem {
    pub config: PerturbationConfig,
    pub order: ScaledOrder,
    c: [f64; 9],
}

impl ScaledSystem {
    pub fn new(config: PerturbationConfig, order: ScaledOrder) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, order, c: effective_coefficients(&config, order) })
    }

    pub fn rhs(&self, s: &ModeState) -> ModeState {
        let c = &self.c;
        let nu0 = self.config.nu0;
        let eps = self.config.epsilon;
        let ModeState { omega1: w1, omega3: w3, omega5: w5, omega7: w7 } = *s;
        let b = w5.norm_sqr() + w7.norm_sqr();
        let fast = (c[5] * w1.norm_sqr() + c[6] * w3.norm_sqr()) / (eps * nu0);
        ModeState::new(
            -c[0] * nu0 * w1 + c[1] * (w3 * w7 - w3.conj() * w5) + c[2] / nu0 * b * w1,
            -nu0 * w3 + c[3] * (w1.conj() * w5 - w1 * w7.conj()) + c[4] / nu0 * b * w3,
            -fast * w5 - c[7] * nu0 * w5 - c[8] * w1 * w3,
            -fast * w7 - c[7] * nu0 * w7 + c[8] * w1 * w3.conj(),
        )
    }
}

/// `dΩ/dτ` with the coefficient sums truncated at `order`.
pub fn scaled_rhs(omega: &ModeState, config: &PerturbationConfig, order: ScaledOrder) -> Result<ModeState> {
    if !omega.is_finite() {
        return Err(Error::NonFinite("Omega"));
    }
    Ok(ScaledSystem::new(*config, order)?.rhs(omega))
}

/// Initial data of the order-0 and order-1 low-mode terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowInit {
    pub omega10: Complex64,
    pub omega30: Complex64,
    pub omega11: Complex64,
    pub omega31: Complex64,
}

impl SlowInit {
    /// Order-1 corrections set to zero.
    pub fn leading(omega10: Complex64, omega30: Complex64) -> Self {
        Self { omega10, omega30, omega11: Complex64::new(0.0, 0.0), omega31: Complex64::new(0.0, 0.0) }
    }
}

/// Closed-form slow-time expansion through `O(ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSolution {
    pub config: PerturbationConfig,
    pub init: SlowInit,
    pub omega51: Complex64,
    pub omega71: Complex64,
    pub x0: f64,
    pub y0: f64,
    pub x1_0: f64,
    pub y1_0: f64,
    /// `K = 20 X₀(0) Y₀(0) / (X₀(0) + Y₀(0))`.
    pub k: f64,
}

pub fn asymptotic_solution(init: SlowInit, config: &PerturbationConfig) -> Result<AsymptoticSolution> {
    config.validate()?;
    let x0 = init.omega10.norm_sqr();
    let y0 = init.omega30.norm_sqr();
    let total = x0 + y0;
    if !(total > 0.0) {
        return Err(Error::ZeroDenominator("|Omega10(0)|^2 + |Omega30(0)|^2"));
    }
    let (nu0, e0) = (config.nu0, config.epsilon0);
    Ok(AsymptoticSolution {
        config: *config,
        init,
        omega51: -10.0 * nu0 * e0 * init.omega10 * init.omega30 / total,
        omega71: 10.0 * nu0 * e0 * init.omega10 * init.omega30.conj() / total,
        x0,
        y0,
        x1_0: 2.0 * (init.omega10.conj() * init.omega11).re,
        y1_0: 2.0 * (init.omega30.conj() * init.omega31).re,
        k: 20.0 * x0 * y0 / total,
    })
}

impl AsymptoticSolution {
    fn decay(&self, tau: f64) -> f64 {
        (-self.config.nu0 * tau).exp()
    }

    pub fn omega10(&self, tau: f64) -> Complex64 {
        self.init.omega10 * self.decay(tau)
    }

    pub fn omega30(&self, tau: f64) -> Complex64 {
        self.init.omega30 * self.decay(tau)
    }

    pub fn omega11(&self, tau: f64) -> Complex64 {
        let (nu0, e0) = (self.config.nu0, self.config.epsilon0);
        let total = self.x0 + self.y0;
        let w10 = self.init.omega10;
        let e = self.decay(tau);
        self.init.omega11 * e + nu0 * e0 * tau * e * (2.0 * w10 + 10.0 * self.y0 * w10 / total)
    }

    pub fn omega31(&self, tau: f64) -> Complex64 {
        let (nu0, e0) = (self.config.nu0, self.config.epsilon0);
        let total = self.x0 + self.y0;
        let e = self.decay(tau);
        self.init.omega31 * e - nu0 * e0 * tau * e * 10.0 * self.x0 * self.init.omega30 / total
    }

    /// `(Ω̄₁, Ω̄₃, εΩ₅₁, εΩ₇₁)` at `tau`.
    pub fn state(&self, tau: f64) -> ModeState {
        let eps = self.config.epsilon;
        ModeState::new(
            self.omega10(tau) + eps * self.omega11(tau),
            self.omega30(tau) + eps * self.omega31(tau),
            eps * self.omega51,
            eps * self.omega71,
        )
    }

    /// `X₁(τ)`.
    pub fn x1(&self, tau: f64) -> f64 {
        let nu0 = self.config.nu0;
        let e = (-2.0 * nu0 * tau).exp();
        self.x1_0 * e + self.config.epsilon0 * nu0 * tau * e * (4.0 * self.x0 + self.k)
    }

    /// `Y₁(τ)`.
    pub fn y1(&self, tau: f64) -> f64 {
        let nu0 = self.config.nu0;
        let e = (-2.0 * nu0 * tau).exp();
        self.y1_0 * e - self.k * self.config.epsilon0 * nu0 * tau * e
    }

    /// `X̄ = X₀ + εX₁`, without any validity check.
    pub fn x_bar(&self, tau: f64) -> f64 {
        self.x0 * (-2.0 * self.config.nu0 * tau).exp() + self.config.epsilon * self.x1(tau)
    }

    /// `Ȳ = Y₀ + εY₁`, without any validity check.
    pub fn y_bar(&self, tau: f64) -> f64 {
        self.y0 * (-2.0 * self.config.nu0 * tau).exp() + self.config.epsilon * self.y1(tau)
    }

    /// End of the interval on which the approximations stay nonnegative.
    pub fn validity_horizon(&self) -> Result<f64> {
        let (tp, tm) = critical_times(self)?;
        Ok(if self.config.epsilon0 > 0.0 { tp } else { tm })
    }

    /// `(X̄, Ȳ)` restricted to `[0, τ±]`.
    pub fn physical_magnitudes(&self, tau: f64) -> Result<(f64, f64)> {
        let horizon = self.validity_horizon()?;
        if !(tau >= 0.0 && tau <= horizon) {
            return Err(Error::Precondition(format!(
                "tau = {tau} is outside [0, {horizon}] where the expansion is nonnegative"
            )));
        }
        Ok((self.x_bar(tau), self.y_bar(tau)))
    }

    /// Residuals of the two algebraic slow-manifold relations at `tau`.
    pub fn slow_manifold_residual(&self, tau: f64) -> f64 {
        let (nu0, e0) = (self.config.nu0, self.config.epsilon0);
        let w10 = self.omega10(tau);
        let w30 = self.omega30(tau);
        let total = w10.norm_sqr() + w30.norm_sqr();
        let r5 = -self.omega51 * total / (5.0 * nu0) - 2.0 * e0 * w10 * w30;
        let r7 = -self.omega71 * total / (5.0 * nu0) + 2.0 * e0 * w10 * w30.conj();
        r5.norm().max(r7.norm())
    }
}

/// `(τ₊, τ₋)`, where `Ȳ` (for `ε₀ = +1`) or `X̄` (for `ε₀ = −1`) reaches zero.
pub fn critical_times(sol: &AsymptoticSolution) -> Result<(f64, f64)> {
    if sol.x0 == 0.0 || sol.y0 == 0.0 {
        return Err(Error::ZeroDenominator("K vanishes when X0(0) or Y0(0) is zero"));
    }
    let (eps, nu0) = (sol.config.epsilon, sol.config.nu0);
    let tau_plus = (sol.y0 / eps + sol.y1_0) / (nu0 * sol.k);
    let tau_minus = (sol.x0 / eps + sol.x1_0) / (nu0 * (sol.k + 4.0 * sol.x0));
    Ok((tau_plus, tau_minus))
}

/// `X̄/Ȳ` with the common exponential cancelled.
pub fn selection_ratio(sol: &AsymptoticSolution, tau: f64) -> Result<f64> {
    let (eps, nu0, e0) = (sol.config.epsilon, sol.config.nu0, sol.config.epsilon0);
    let num = sol.x0 + eps * (sol.x1_0 + e0 * nu0 * (sol.k + 4.0 * sol.x0) * tau);
    let den = sol.y0 + eps * (sol.y1_0 - e0 * nu0 * sol.k * tau);
    if den.abs() <= f64::EPSILON * (sol.y0.abs() + eps * sol.y1_0.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroDenominator("Y-bar vanishes"));
    }
    Ok(num / den)
}

/// Numerical initial data on the slow manifold to `O(ε)`.
pub fn consistent_initial_state(sol: &AsymptoticSolution) -> ModeState {
    sol.state(0.0)
}

/// Maximum deviations of a direct integration from the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub max_err_x: f64,
    pub max_err_y: f64,
}

impl ConvergenceRow {
    pub fn max_err(&self) -> f64 {
        self.max_err_x.max(self.max_err_y)
    }
}

/// Default step in `τ`: a twentieth of `ε`, so the fast layer is resolved.
pub fn default_tau_step(epsilon: f64) -> f64 {
    epsilon / 20.0
}

/// Integrates the first-order scaled system from consistent data and
/// compares `|Ω₁|²`, `|Ω₃|²` with `X̄`, `Ȳ` on `window`.
pub fn convergence_row(init: SlowInit, config: &PerturbationConfig, window: (f64, f64)) -> Result<ConvergenceRow> {
    let sol = asymptotic_solution(init, config)?;
    let (tp, tm) = critical_times(&sol)?;
    let limit = 0.5 * tp.min(tm);
    let (a, b) = window;
    if !(a >= 0.0 && a < b && b < limit) {
        return Err(Error::Precondition(format!(
            "tau window [{a}, {b}] must lie inside [0, {limit}) (half the critical time)"
        )));
    }
    let sys = ScaledSystem::new(*config, ScaledOrder::First)?;
    let grid = TimeGrid::fixed(0.0, b, default_tau_step(config.epsilon))?;
    let traj = integrate(|s: &ModeState| sys.rhs(s), consistent_initial_state(&sol), &grid)?;
    let mut row = ConvergenceRow { epsilon: config.epsilon, max_err_x: 0.0, max_err_y: 0.0 };
    for (tau, s) in traj.iter().filter(|(t, _)| *t >= a) {
        row.max_err_x = row.max_err_x.max((s.omega1.norm_sqr() - sol.x_bar(tau)).abs());
        row.max_err_y = row.max_err_y.max((s.omega3.norm_sqr() - sol.y_bar(tau)).abs());
    }
    Ok(row)
}

/// [`convergence_row`] over several `ε` in parallel, in input order.
pub fn convergence_study(
    epsilons: &[f64],
    epsilon0: f64,
    nu0: f64,
    alpha: f64,
    init: SlowInit,
    window: (f64, f64),
) -> Result<Vec<ConvergenceRow>> {
    epsilons
        .par_iter()
        .map(|&eps| convergence_row(init, &PerturbationConfig::new(eps, epsilon0, nu0, alpha)?, window))
        .collect()
}

/// Ratios `err(ε_k) / err(ε_{k+1})` of consecutive rows.
pub fn halving_ratios(rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[0].max_err() / w[1].max_err()).collect()
}

/// Decay rate of the high modes in the fast variable `s = τ/ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastLayer {
    pub fitted_rate: f64,
    /// `(|Ω₁₀(0)|² + |Ω₃₀(0)|²) / (5ν₀)`.
    pub predicted_rate: f64,
}

/// Starts off the slow manifold with high modes `(omega5, omega7)` and fits
/// the decay of `|Ω₅ − εΩ₅₁|` over `s ∈ [0, s_end]`.
pub fn fast_layer_check(
    init: SlowInit,
    omega5: Complex64,
    omega7: Complex64,
    config: &PerturbationConfig,
    s_end: f64,
) -> Result<FastLayer> {
    let sol = asymptotic_solution(init, config)?;
    let eps = config.epsilon;
    let sys = ScaledSystem::new(*config, ScaledOrder::First)?;
    let start = ModeState::new(init.omega10, init.omega30, omega5, omega7);
    let tau_end = s_end * eps;
    let grid = TimeGrid::fixed(0.0, tau_end, tau_end / 400.0)?;
    let traj = integrate(|s: &ModeState| sys.rhs(s), start, &grid)?;
    let slow5 = eps * sol.omega51;
    let s_values: Vec<f64> = traj.times.iter().map(|t| t / eps).collect();
    let dev: Vec<f64> = traj.states.iter().map(|s| (s.omega5 - slow5).norm()).collect();
    let fitted_rate = -fit_log_slope(&s_values, &dev)?;
    Ok(FastLayer { fitted_rate, predicted_rate: (sol.x0 + sol.y0) / (5.0 * config.nu0) })
}

//! The reduced eight-mode model.
//!
//! Four complex amplitudes are stored: `omega1 = ω̂(1,0)`, `omega3 = ω̂(0,1)`,
//! `omega5 = ω̂(1,1)` and `omega7 = ω̂(1,-1)`. Their partners at the negated
//! wavevectors are conjugates and are never stored.
//!
//! The higher modes ω̂(±2,±1), ω̂(±1,±2) are slaved to the retained ones
//! through the quadratic center-manifold graph evaluated by [`center_graph`],
//! and the graph for ω̂(±2,0), ω̂(0,±2) is fixed to zero.

use num_complex::Complex64;

use crate::error::{require_finite, Error, Result};
use crate::integrate::{integrate, TimeGrid, Trajectory, TrajectoryMeta};
use crate::spectral::{pair_coefficient, Wavevector};

/// Lower edge of the admissible aspect-ratio window, `sqrt(2/3)`.
pub const DELTA_MIN: f64 = 0.816_496_580_927_726;
/// Upper edge of the admissible aspect-ratio window, `sqrt(3/2)`.
pub const DELTA_MAX: f64 = 1.224_744_871_391_589;

/// Viscosity and aspect ratio of the torus `[0, 2πδ] × [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub nu: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(nu: f64, delta: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParams(format!("nu must be positive, got {nu}")));
        }
        if !(delta.is_finite() && delta > DELTA_MIN && delta < DELTA_MAX) {
            return Err(Error::InvalidParams(format!(
                "delta = {delta} outside the admissible window (sqrt(2/3), sqrt(3/2))"
            )));
        }
        Ok(Self { nu, delta })
    }

    /// The symmetric torus, δ = 1.
    pub fn symmetric(nu: f64) -> Result<Self> {
        Self::new(nu, 1.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.delta == 1.0
    }

    /// Re-checks the invariants; useful for values built with struct syntax.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.nu, self.delta).map(|_| ())
    }
}

/// The four stored amplitudes of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeState {
    pub omega1: Complex64,
    pub omega3: Complex64,
    pub omega5: Complex64,
    pub omega7: Complex64,
}

impl ModeState {
    pub fn new(omega1: Complex64, omega3: Complex64, omega5: Complex64, omega7: Complex64) -> Self {
        Self { omega1, omega3, omega5, omega7 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// State with real amplitudes.
    pub fn real(w1: f64, w3: f64, w5: f64, w7: f64) -> Self {
        Self::new(w1.into(), w3.into(), w5.into(), w7.into())
    }

    /// Builds a state from `[re1, im1, re3, im3, re5, im5, re7, im7]`.
    pub fn from_reals(v: [f64; 8]) -> Self {
        Self::new(
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
            Complex64::new(v[6], v[7]),
        )
    }

    pub fn to_reals(&self) -> [f64; 8] {
        let c = self.components();
        [c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im, c[3].re, c[3].im]
    }

    pub fn components(&self) -> [Complex64; 4] {
        [self.omega1, self.omega3, self.omega5, self.omega7]
    }

    pub fn from_components(c: [Complex64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_components(self.components().map(|c| c * s))
    }

    pub fn is_finite(&self) -> bool {
        self.to_reals().iter().all(|x| x.is_finite())
    }

    pub fn is_real(&self) -> bool {
        self.components().iter().all(|c| c.im == 0.0)
    }

    /// Squared magnitude of the high modes, `|ω5|² + |ω7|²`.
    pub fn high_energy(&self) -> f64 {
        self.omega5.norm_sqr() + self.omega7.norm_sqr()
    }

    /// Squared magnitude of the low modes, `|ω1|² + |ω3|²`.
    pub fn low_energy(&self) -> f64 {
        self.omega1.norm_sqr() + self.omega3.norm_sqr()
    }

    fn check_finite(&self) -> Result<()> {
        const NAMES: [&str; 8] =
            ["omega1.re", "omega1.im", "omega3.re", "omega3.im", "omega5.re", "omega5.im", "omega7.re", "omega7.im"];
        for (x, name) in self.to_reals().iter().zip(NAMES) {
            require_finite(*x, name)?;
        }
        Ok(())
    }
}

/// Rational coefficients of the reduced right-hand side at a given (ν, δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub nu: f64,
    /// Linear rate factor of ω1: `1/δ²`.
    pub lin1: f64,
    /// Linear rate factor of ω5, ω7: `(1+δ²)/δ²`.
    pub lin5: f64,
    /// `1/(δ(1+δ²))`
    pub quad1: f64,
    /// `δ³/(1+δ²)`
    pub quad3: f64,
    /// `(δ²-1)/δ`
    pub quad5: f64,
    /// `3δ⁶/(2ν(4+δ²)(1+δ²)²)`
    pub cub1: f64,
    /// `3δ²/(2ν(1+4δ²)(1+δ²)²)`
    pub cub3: f64,
    /// `δ⁶(3+δ²)/(2ν(4+δ²)(1+δ²))`
    pub damp1: f64,
    /// `(1+3δ²)/(2νδ²(1+4δ²)(1+δ²))`
    pub damp3: f64,
}

impl Coefficients {
    pub fn new(p: &ModelParams) -> Self {
        let (nu, d) = (p.nu, p.delta);
        let d2 = d * d;
        let d6 = d2 * d2 * d2;
        let s = 1.0 + d2;
        Self {
            nu,
            lin1: 1.0 / d2,
            lin5: s / d2,
            quad1: 1.0 / (d * s),
            quad3: d2 * d / s,
            quad5: (d2 - 1.0) / d,
            cub1: 3.0 * d6 / (2.0 * nu * (4.0 + d2) * s * s),
            cub3: 3.0 * d2 / (2.0 * nu * (1.0 + 4.0 * d2) * s * s),
            damp1: d6 * (3.0 + d2) / (2.0 * nu * (4.0 + d2) * s),
            damp3: (1.0 + 3.0 * d2) / (2.0 * nu * d2 * (1.0 + 4.0 * d2) * s),
        }
    }

    /// Evaluates the reduced vector field without validating anything.
    pub fn rhs(&self, s: &ModeState) -> ModeState {
        let ModeState { omega1: w1, omega3: w3, omega5: w5, omega7: w7 } = *s;
        let nu = self.nu;
        let a1 = w1.norm_sqr();
        let a3 = w3.norm_sqr();
        let b = w5.norm_sqr() + w7.norm_sqr();
        let high_damp = self.damp1 * a1 + self.damp3 * a3;

        let d1 = -nu * self.lin1 * w1 + self.quad1 * (w3 * w7 - w3.conj() * w5) + self.cub1 * b * w1;
        let d3 = -nu * w3 + self.quad3 * (w1.conj() * w5 - w1 * w7.conj()) + self.cub3 * b * w3;
        let d5 = -nu * self.lin5 * w5 - self.quad5 * w1 * w3 - high_damp * w5;
        let d7 = -nu * self.lin5 * w7 + self.quad5 * w1 * w3.conj() - high_damp * w7;
        ModeState::new(d1, d3, d5, d7)
    }
}

/// Autonomous reduced system with its coefficients cached for integration.
#[derive(Debug, Clone, Copy)]
pub struct ReducedSystem {
    pub params: ModelParams,
    coeffs: Coefficients,
}

impl ReducedSystem {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, coeffs: Coefficients::new(&params) })
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn rhs(&self, s: &ModeState) -> ModeState {
        self.coeffs.rhs(s)
    }
}

/// Time derivative `(dω1, dω3, dω5, dω7)` of the reduced model.
pub fn reduced_rhs(state: &ModeState, params: &ModelParams) -> Result<ModeState> {
    params.validate()?;
    state.check_finite()?;
    Ok(Coefficients::new(params).rhs(state))
}

/// Integrates the reduced model on `grid`, tagging the trajectory with `nu` and `delta`.
pub fn simulate(y0: ModeState, params: &ModelParams, grid: &TimeGrid) -> Result<Trajectory<ModeState>> {
    let sys = ReducedSystem::new(*params)?;
    y0.check_finite()?;
    let mut traj = integrate(|s: &ModeState| sys.rhs(s), y0, grid)?;
    traj.meta = TrajectoryMeta::new("reduced").param("nu", params.nu).param("delta", params.delta);
    Ok(traj)
}

/// Symmetries of the torus acting on the four stored amplitudes.
///
/// Vorticity is a pseudoscalar, so orientation-reversing maps flip its sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symmetry {
    /// Rotation by π: `ω̂(k) ↦ ω̂(-k)`.
    PointReflection,
    /// `x ↦ -x`.
    ReflectX,
    /// `y ↦ -y`.
    ReflectY,
    /// Translation in x by phase `θ = a/δ`.
    ShiftX(f64),
    /// Translation in y by phase `θ`.
    ShiftY(f64),
    /// Exchange of x and y; a symmetry only when δ = 1.
    SwapXY,
}

impl Symmetry {
    pub fn apply(&self, s: &ModeState) -> ModeState {
        let ModeState { omega1: w1, omega3: w3, omega5: w5, omega7: w7 } = *s;
        match *self {
            Symmetry::PointReflection => ModeState::new(w1.conj(), w3.conj(), w5.conj(), w7.conj()),
            Symmetry::ReflectX => ModeState::new(-w1.conj(), -w3, -w7.conj(), -w5.conj()),
            Symmetry::ReflectY => ModeState::new(-w1, -w3.conj(), -w7, -w5),
            Symmetry::ShiftX(theta) => {
                let e = Complex64::from_polar(1.0, theta);
                ModeState::new(e * w1, w3, e * w5, e * w7)
            }
            Symmetry::ShiftY(theta) => {
                let e = Complex64::from_polar(1.0, theta);
                ModeState::new(w1, e * w3, e * w5, e.conj() * w7)
            }
            Symmetry::SwapXY => ModeState::new(-w3, -w1, -w5, -w7.conj()),
        }
    }

    /// Whether the map commutes with the flow at aspect ratio `delta`.
    pub fn holds_at(&self, delta: f64) -> bool {
        !matches!(self, Symmetry::SwapXY) || delta == 1.0
    }
}

/// Values of ω̂(2,1), ω̂(2,-1), ω̂(1,2), ω̂(1,-2) on the quadratic graph.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CenterGraphValues {
    pub w21: Complex64,
    pub w2m1: Complex64,
    pub w12: Complex64,
    pub w1m2: Complex64,
}

/// Graph coefficients `(a, c)` with `w21 = -a ω1ω5`, `w2m1 = a ω1ω7`,
/// `w12 = c ω3ω5`, `w1m2 = -c conj(ω3)ω7`.
fn graph_coefficients(p: &ModelParams) -> (f64, f64) {
    let d = p.delta;
    let s = 1.0 + d * d;
    (d.powi(5) / (2.0 * p.nu * s), 1.0 / (2.0 * p.nu * d * s))
}

fn graph_unchecked(s: &ModeState, p: &ModelParams) -> CenterGraphValues {
    let (a, c) = graph_coefficients(p);
    CenterGraphValues {
        w21: -a * s.omega1 * s.omega5,
        w2m1: a * s.omega1 * s.omega7,
        w12: c * s.omega3 * s.omega5,
        w1m2: -c * s.omega3.conj() * s.omega7,
    }
}

pub fn center_graph(state: &ModeState, params: &ModelParams) -> Result<CenterGraphValues> {
    params.validate()?;
    state.check_finite()?;
    Ok(graph_unchecked(state, params))
}

/// Max-norm mismatch between the two ways of computing d/dt of the graph modes.
///
/// One side differentiates the graph along the reduced flow. The other side
/// evaluates the Galerkin tendency of each graph mode using only the modes
/// available in the closure: the eight retained modes, the graph modes
/// themselves, and ω̂(±2,0) = ω̂(0,±2) = 0. The two agree through quadratic
/// order, so the result scales like `scale³`.
pub fn graph_invariance_defect(state: &ModeState, params: &ModelParams, scale: f64) -> Result<f64> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::Precondition(format!("scale must lie in (0, 1], got {scale}")));
    }
    params.validate()?;
    state.check_finite()?;
    let s = state.scaled(scale);
    let ds = Coefficients::new(params).rhs(&s);
    let (a, c) = graph_coefficients(params);
    let g = graph_unchecked(&s, params);

    let chain = [
        -a * (ds.omega1 * s.omega5 + s.omega1 * ds.omega5),
        a * (ds.omega1 * s.omega7 + s.omega1 * ds.omega7),
        c * (ds.omega3 * s.omega5 + s.omega3 * ds.omega5),
        -c * (ds.omega3.conj() * s.omega7 + s.omega3.conj() * ds.omega7),
    ];

    let modes = closure_modes(&s, &g);
    let targets: [Wavevector; 4] = [(2, 1), (2, -1), (1, 2), (1, -2)];
    let values = [g.w21, g.w2m1, g.w12, g.w1m2];
    let d = params.delta;
    let mut worst = 0.0_f64;
    for ((k, hk), ch) in targets.iter().zip(values).zip(chain) {
        let norm = (k.0 * k.0) as f64 + d * d * (k.1 * k.1) as f64;
        let mut flow = -(params.nu / (d * d)) * norm * hk;
        for (j, wj) in &modes {
            for (l, wl) in &modes {
                if j.0 + l.0 == k.0 && j.1 + l.1 == k.1 {
                    flow += pair_coefficient(*j, *l, d) * wj * wl;
                }
            }
        }
        worst = worst.max((flow - ch).norm());
    }
    Ok(worst)
}

/// All modes present in the closure, with conjugate partners made explicit.
fn closure_modes(s: &ModeState, g: &CenterGraphValues) -> Vec<(Wavevector, Complex64)> {
    let half = [
        ((1, 0), s.omega1),
        ((0, 1), s.omega3),
        ((1, 1), s.omega5),
        ((1, -1), s.omega7),
        ((2, 1), g.w21),
        ((2, -1), g.w2m1),
        ((1, 2), g.w12),
        ((1, -2), g.w1m2),
    ];
    half.iter().flat_map(|&((k1, k2), w)| [((k1, k2), w), ((-k1, -k2), w.conj())]).collect()
}

//! Explicit one-step time integration with sampled output.
//!
//! Classical RK4 at a fixed step is the default. An embedded Dormand–Prince
//! 5(4) pair is available for runs where the step should follow the error.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Component magnitude at which an integration is declared to have blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Minimal vector-space interface needed by the steppers.
pub trait Phase: Clone {
    /// Returns `self + a * x`.
    fn axpy(&self, a: f64, x: &Self) -> Self;
    /// Largest component magnitude; `+∞` if any component is not finite.
    fn max_abs(&self) -> f64;
}

fn fold_max(it: impl Iterator<Item = f64>) -> f64 {
    let mut m = 0.0_f64;
    for x in it {
        if !x.is_finite() {
            return f64::INFINITY;
        }
        m = m.max(x.abs());
    }
    m
}

impl Phase for f64 {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self + a * x
    }
    fn max_abs(&self) -> f64 {
        fold_max(std::iter::once(*self))
    }
}

impl<const N: usize> Phase for [f64; N] {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        std::array::from_fn(|i| self[i] + a * x[i])
    }
    fn max_abs(&self) -> f64 {
        fold_max(self.iter().copied())
    }
}

impl Phase for Vec<f64> {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self.iter().zip(x).map(|(s, x)| s + a * x).collect()
    }
    fn max_abs(&self) -> f64 {
        fold_max(self.iter().copied())
    }
}

impl Phase for Vec<Complex64> {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self.iter().zip(x).map(|(s, x)| s + a * x).collect()
    }
    fn max_abs(&self) -> f64 {
        fold_max(self.iter().flat_map(|c| [c.re, c.im]))
    }
}

impl Phase for crate::model::ModeState {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        let (s, x) = (self.components(), x.components());
        Self::from_components(std::array::from_fn(|i| s[i] + a * x[i]))
    }
    fn max_abs(&self) -> f64 {
        fold_max(self.to_reals().into_iter())
    }
}

/// How steps are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Classical RK4 with this step; the last step is shortened to land on `t_end`.
    Fixed { dt: f64 },
    /// Dormand–Prince 5(4) with a mixed absolute/relative tolerance.
    Adaptive { tol: f64, h0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub step: StepControl,
    /// Keep every `sample_stride`-th step (the initial and final states are always kept).
    pub sample_stride: usize,
}

impl TimeGrid {
    pub fn fixed(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        let g = Self { t0, t_end, step: StepControl::Fixed { dt }, sample_stride: 1 };
        g.validate()?;
        Ok(g)
    }

    pub fn adaptive(t0: f64, t_end: f64, tol: f64) -> Result<Self> {
        let h0 = (t_end - t0) * 1e-3;
        let g = Self { t0, t_end, step: StepControl::Adaptive { tol, h0 }, sample_stride: 1 };
        g.validate()?;
        Ok(g)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.sample_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.t_end > self.t0) {
            return bad(format!("need t_end > t0, got [{}, {}]", self.t0, self.t_end));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be positive".into());
        }
        match self.step {
            StepControl::Fixed { dt } => {
                if !(dt > 0.0 && dt <= self.t_end - self.t0) {
                    return bad(format!("dt = {dt} must lie in (0, t_end - t0]"));
                }
            }
            StepControl::Adaptive { tol, h0 } => {
                if !(tol > 0.0 && h0 > 0.0) {
                    return bad(format!("tol = {tol} and h0 = {h0} must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Provenance attached to a trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMeta {
    pub rhs: String,
    pub params: Vec<(String, f64)>,
}

impl TrajectoryMeta {
    pub fn new(rhs: impl Into<String>) -> Self {
        Self { rhs: rhs.into(), params: Vec::new() }
    }

    pub fn param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.push((name.into(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub meta: TrajectoryMeta,
}

impl<S> Trajectory<S> {
    pub fn from_samples(times: Vec<f64>, states: Vec<S>, meta: TrajectoryMeta) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::InvalidGrid(format!("{} times for {} states", times.len(), states.len())));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("sample times must be strictly increasing".into()));
        }
        Ok(Self { times, states, meta })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> &S {
        &self.states[0]
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectories are never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> Trajectory<T> {
        Trajectory { times: self.times.clone(), states: self.states.iter().map(f).collect(), meta: self.meta.clone() }
    }

    /// Index of the last sample with time `<= t` (or 0).
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }
}

/// One classical RK4 step.
pub fn rk4_step<S: Phase>(rhs: &impl Fn(&S) -> S, y: &S, h: f64) -> S {
    let k1 = rhs(y);
    let k2 = rhs(&y.axpy(0.5 * h, &k1));
    let k3 = rhs(&y.axpy(0.5 * h, &k2));
    let k4 = rhs(&y.axpy(h, &k3));
    y.axpy(h / 6.0, &k1).axpy(h / 3.0, &k2).axpy(h / 3.0, &k3).axpy(h / 6.0, &k4)
}

fn guard<S: Phase>(y: &S, t: f64) -> Result<()> {
    let m = y.max_abs();
    if m > BLOW_UP_THRESHOLD {
        Err(Error::BlowUp { t, magnitude: m })
    } else {
        Ok(())
    }
}

/// Integrates the autonomous system `dy/dt = rhs(y)` over `grid`.
pub fn integrate<S: Phase>(rhs: impl Fn(&S) -> S, y0: S, grid: &TimeGrid) -> Result<Trajectory<S>> {
    grid.validate()?;
    guard(&y0, grid.t0)?;
    match grid.step {
        StepControl::Fixed { dt } => fixed(&rhs, y0, grid, dt),
        StepControl::Adaptive { tol, h0 } => adaptive(&rhs, y0, grid, tol, h0),
    }
}

fn fixed<S: Phase>(rhs: &impl Fn(&S) -> S, y0: S, grid: &TimeGrid, dt: f64) -> Result<Trajectory<S>> {
    let span = grid.t_end - grid.t0;
    // Tolerate t_end landing a rounding error past a whole number of steps.
    let n = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let cap = n / grid.sample_stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(grid.t0);
    states.push(y0.clone());
    let mut y = y0;
    let mut t = grid.t0;
    for i in 1..=n {
        let t_next = if i == n { grid.t_end } else { grid.t0 + i as f64 * dt };
        y = rk4_step(rhs, &y, t_next - t);
        t = t_next;
        guard(&y, t)?;
        if i % grid.sample_stride == 0 || i == n {
            times.push(t);
            states.push(y.clone());
        }
    }
    Ok(Trajectory { times, states, meta: TrajectoryMeta::default() })
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn adaptive<S: Phase>(rhs: &impl Fn(&S) -> S, y0: S, grid: &TimeGrid, tol: f64, h0: f64) -> Result<Trajectory<S>> {
    let span = grid.t_end - grid.t0;
    let h_min = span * 1e-14;
    let mut times = vec![grid.t0];
    let mut states = vec![y0.clone()];
    let mut y = y0;
    let mut t = grid.t0;
    let mut h = h0.min(span);
    let mut accepted = 0usize;
    debug_assert_eq!(C[6], 1.0);
    while t < grid.t_end {
        let last = t + h >= grid.t_end;
        let step = if last { grid.t_end - t } else { h };
        let mut k: Vec<S> = Vec::with_capacity(7);
        k.push(rhs(&y));
        for row in &A[1..7] {
            let mut ys = y.clone();
            for (a, kj) in row.iter().zip(&k) {
                if *a != 0.0 {
                    ys = ys.axpy(step * a, kj);
                }
            }
            k.push(rhs(&ys));
        }
        let mut y5 = y.clone();
        let mut err = y.axpy(-1.0, &y);
        for (s, ks) in k.iter().enumerate() {
            if B5[s] != 0.0 {
                y5 = y5.axpy(step * B5[s], ks);
            }
            err = err.axpy(step * (B5[s] - B4[s]), ks);
        }
        let e = err.max_abs() / (tol * (1.0 + y.max_abs().max(y5.max_abs())));
        if e <= 1.0 {
            t = if last { grid.t_end } else { t + step };
            y = y5;
            guard(&y, t)?;
            accepted += 1;
            if accepted.is_multiple_of(grid.sample_stride) || t >= grid.t_end {
                times.push(t);
                states.push(y.clone());
            }
        }
        if !e.is_finite() {
            return Err(Error::BlowUp { t, magnitude: f64::INFINITY });
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * factor;
        if h < h_min {
            return Err(Error::InvalidGrid(format!("adaptive step underflow at t = {t}")));
        }
    }
    Ok(Trajectory { times, states, meta: TrajectoryMeta::default() })
}

//! Scenario descriptions and the named presets.

use std::f64::consts::TAU;
use std::path::PathBuf;

use qslab_core::perturbation::{asymptotic_solution, consistent_initial_state, SlowInit};
use qslab_core::spectral::{random_field, FourierField};
use qslab_core::{default_dt, Complex64, ModeState, ModelParams, PerturbationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{ModelKind, PresetName};
use crate::settings::Settings;
use crate::CliError;

/// Rows kept per CSV when the step count is large; the sample stride is chosen to stay below it.
pub const MAX_ROWS: usize = 4000;

/// Default spectral truncation.
pub const DEFAULT_K_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// Eight reals `(Re ω₁, Im ω₁, Re ω₃, …, Im ω₇)`.
    Explicit(Vec<f64>),
    /// Seeded phases with `|ω₁| = low·√r0`, `|ω₃| = low`, `|ω₅| = |ω₇| = high`.
    Seeded { seed: u64, low: f64, high: f64, r0: f64 },
    /// Seeded smooth Galerkin field with the given energy (spectral model only).
    RandomField { seed: u64, energy: f64 },
}

/// Per-trajectory checks that contribute report lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    SymmetricCertificates,
    AsymmetricCertificates {
        eta: Option<f64>,
    },
    RatioCertificate {
        eta: Option<f64>,
        cap: f64,
    },
    /// `B` drops below `0.01·B₀` before `1/ν` while `A ≥ A₀e^{-2}` there.
    FastHighDecay,
    /// `R(t)` settles to a finite positive value.
    RatioFlattens,
    /// Late decay rate of `A` equals `2ν`.
    BackgroundLowRate,
    /// Early decay rate of `B` clearly exceeds its late rate `4ν`.
    EarlyHighDecay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: ModelKind,
    pub nu: f64,
    pub delta: f64,
    /// Needed by the scaled model; `nu`/`delta` are then derived from it.
    pub perturbation: Option<PerturbationConfig>,
    pub k_max: usize,
    pub init: InitSpec,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    /// CSV file name, resolved against the output directory.
    pub csv: Option<PathBuf>,
    pub checks: Vec<Check>,
}

/// Stride that keeps at most [`MAX_ROWS`] rows.
pub fn stride_for(t_end: f64, dt: f64) -> usize {
    let steps = (t_end / dt).ceil() as usize;
    steps.div_ceil(MAX_ROWS).max(1)
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

impl Scenario {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.nu, self.delta).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = self.params()?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(invalid(format!("t-end must be positive, got {}", self.t_end)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(invalid(format!("dt must lie in (0, t-end], got {}", self.dt)));
        }
        if self.stride == 0 {
            return Err(invalid("stride must be positive"));
        }
        match (&self.init, self.model) {
            (InitSpec::Explicit(v), _) if v.len() != 8 => {
                return Err(invalid(format!("init needs 8 values, got {}", v.len())));
            }
            (InitSpec::RandomField { .. }, m) if m != ModelKind::Spectral => {
                return Err(invalid("a random Galerkin field only initializes the spectral model"));
            }
            (InitSpec::Seeded { low, high, r0, .. }, _) if !(*low >= 0.0 && *high >= 0.0 && *r0 > 0.0) => {
                return Err(invalid("seeded amplitudes must be nonnegative and r0 positive"));
            }
            _ => {}
        }
        match self.model {
            ModelKind::Observable if !p.is_symmetric() => {
                return Err(invalid(format!("the observable model needs delta = 1, got {}", self.delta)));
            }
            ModelKind::Scaled => {
                let cfg = self.perturbation.ok_or_else(|| invalid("the scaled model needs eps, eps0, alpha"))?;
                cfg.validate().map_err(|e| invalid(e.to_string()))?;
            }
            ModelKind::Spectral if self.k_max < 1 => return Err(invalid("k-max must be at least 1")),
            _ => {}
        }
        if !self.checks.is_empty() && self.model != ModelKind::Reduced {
            return Err(invalid("certificates and preset checks run on the reduced model only"));
        }
        for c in &self.checks {
            match c {
                Check::SymmetricCertificates | Check::FastHighDecay | Check::RatioFlattens if !p.is_symmetric() => {
                    return Err(invalid(format!("symmetric checks need delta = 1, got {}", self.delta)));
                }
                Check::AsymmetricCertificates { .. } | Check::RatioCertificate { .. } if p.is_symmetric() => {
                    return Err(invalid("asymmetric certificates need delta != 1"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Initial reduced-model (or scaled-model) state.
    pub fn initial_modes(&self) -> Result<ModeState, CliError> {
        match &self.init {
            InitSpec::Explicit(v) => {
                let a: [f64; 8] = v.as_slice().try_into().map_err(|_| invalid("init needs 8 values"))?;
                Ok(ModeState::from_reals(a))
            }
            InitSpec::Seeded { seed, low, high, r0 } => Ok(seeded_state(*seed, *low, *high, *r0)),
            InitSpec::RandomField { .. } => Err(invalid("a random Galerkin field has no eight-mode form")),
        }
    }

    /// Initial Galerkin field for the spectral model.
    pub fn initial_field(&self) -> Result<FourierField, CliError> {
        match &self.init {
            InitSpec::RandomField { seed, energy } => {
                random_field(*seed, self.k_max, self.delta, *energy).map_err(|e| invalid(e.to_string()))
            }
            _ => {
                let s = self.initial_modes()?;
                let mut f = FourierField::zeros(self.k_max, self.delta).map_err(|e| invalid(e.to_string()))?;
                for (k, v) in [((1, 0), s.omega1), ((0, 1), s.omega3), ((1, 1), s.omega5), ((1, -1), s.omega7)] {
                    f.set(k, v).map_err(|e| invalid(e.to_string()))?;
                }
                Ok(f)
            }
        }
    }
}

/// Modes with fixed moduli and phases drawn from a ChaCha8 stream.
pub fn seeded_state(seed: u64, low: f64, high: f64, r0: f64) -> ModeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phase = || Complex64::from_polar(1.0, TAU * rng.random::<f64>());
    let w1 = phase() * low * r0.sqrt();
    let w3 = phase() * low;
    let w5 = phase() * high;
    let w7 = phase() * high;
    ModeState::new(w1, w3, w5, w7)
}

/// Slow data used when `perturb` gets no `--init`: `Ω₁₀(0) = 2.2+0.8i`, `Ω₃₀(0) = 1.8−0.6i`.
pub fn default_slow_init() -> SlowInit {
    SlowInit::leading(Complex64::new(2.2, 0.8), Complex64::new(1.8, -0.6))
}

/// Reads `--init` as four reals `(Re Ω₁₀, Im Ω₁₀, Re Ω₃₀, Im Ω₃₀)` or eight (adding `Ω₁₁, Ω₃₁`).
pub fn slow_init(settings: &Settings) -> Result<SlowInit, CliError> {
    let Some(v) = &settings.init else { return Ok(default_slow_init()) };
    let c = |i: usize| Complex64::new(v[i], v[i + 1]);
    match v.len() {
        4 => Ok(SlowInit::leading(c(0), c(2))),
        8 => Ok(SlowInit { omega10: c(0), omega30: c(2), omega11: c(4), omega31: c(6) }),
        n => Err(invalid(format!("perturb init needs 4 or 8 values, got {n}"))),
    }
}

pub fn perturbation_config(settings: &Settings) -> Result<PerturbationConfig, CliError> {
    PerturbationConfig::new(
        settings.eps.unwrap_or(0.02),
        settings.eps0.unwrap_or(1.0),
        settings.nu.unwrap_or(1.0),
        settings.alpha.unwrap_or(1.0),
    )
    .map_err(|e| invalid(e.to_string()))
}

/// Scenario for `simulate` and `certify` from merged settings.
pub fn from_settings(name: &str, model: ModelKind, s: &Settings, checks: Vec<Check>) -> Result<Scenario, CliError> {
    let perturbation = if model == ModelKind::Scaled { Some(perturbation_config(s)?) } else { None };
    let (nu, delta) = match perturbation {
        Some(cfg) => (cfg.nu0, cfg.delta()),
        None => (s.nu.unwrap_or(0.01), s.delta.unwrap_or(1.0)),
    };
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    let init = match (&s.init, model, perturbation) {
        (Some(v), _, _) => InitSpec::Explicit(v.clone()),
        (None, ModelKind::Spectral, _) => InitSpec::RandomField { seed: s.seed(), energy: nu * nu },
        (None, ModelKind::Scaled, Some(cfg)) => {
            let sol = asymptotic_solution(default_slow_init(), &cfg).map_err(|e| invalid(e.to_string()))?;
            InitSpec::Explicit(consistent_initial_state(&sol).to_reals().to_vec())
        }
        (None, _, _) => InitSpec::Seeded { seed: s.seed(), low: 0.5 * nu, high: 0.5 * nu, r0: 1.0 },
    };
    let t_end = s.t_end.unwrap_or(if model == ModelKind::Scaled { 1.0 } else { 1.0 / nu });
    let dt = s.dt.unwrap_or(match perturbation {
        Some(cfg) => cfg.epsilon / 20.0,
        None => default_dt(nu),
    });
    let sc = Scenario {
        name: name.to_string(),
        model,
        nu,
        delta,
        perturbation,
        k_max: s.k_max.unwrap_or(DEFAULT_K_MAX),
        init,
        t_end,
        dt,
        stride: if dt > 0.0 { stride_for(t_end, dt) } else { 1 },
        csv: Some(s.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")))),
        checks,
    };
    sc.validate()?;
    Ok(sc)
}

/// Initial `R(0)` values of the `figR` family.
pub const FIG_R_RATIOS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// The scenarios behind a preset. Flags may override `nu`, `t-end`, `dt`, `seed`.
///
/// `figAB`, `figLogA` and `figLogB` start with `|ω₁| = |ω₃| = 2ν` and
/// `|ω₅| = |ω₇| = ν`. At the default `0.5ν` amplitude the fast phase is too
/// weak for `B` to lose two decades before `t = 1/ν`.
pub fn preset(name: PresetName, s: &Settings) -> Result<Vec<Scenario>, CliError> {
    let nu = s.nu.unwrap_or(0.01);
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    if let Some(d) = s.delta {
        if d != 1.0 {
            return Err(invalid(format!("presets run on the square torus, got delta = {d}")));
        }
    }
    let seed = s.seed();
    let dt = s.dt.unwrap_or(default_dt(nu));
    let base = |tag: String, t_end: f64, init: InitSpec, checks: Vec<Check>| {
        let t_end = s.t_end.unwrap_or(t_end);
        Scenario {
            name: tag.clone(),
            model: ModelKind::Reduced,
            nu,
            delta: 1.0,
            perturbation: None,
            k_max: DEFAULT_K_MAX,
            init,
            t_end,
            dt,
            stride: stride_for(t_end, dt),
            csv: Some(PathBuf::from(format!("{tag}.csv"))),
            checks,
        }
    };
    let strong = InitSpec::Seeded { seed, low: 2.0 * nu, high: nu, r0: 1.0 };
    let tag = name.as_str().to_string();
    let list = match name {
        PresetName::FigAb => {
            vec![base(tag, 2.0 / nu, strong, vec![Check::FastHighDecay, Check::SymmetricCertificates])]
        }
        PresetName::FigLogA => vec![base(tag, 6.0 / nu, strong, vec![Check::BackgroundLowRate])],
        PresetName::FigLogB => vec![base(tag, 3.0 / nu, strong, vec![Check::EarlyHighDecay])],
        PresetName::FigR => FIG_R_RATIOS
            .iter()
            .enumerate()
            .map(|(i, &r0)| {
                let init = InitSpec::Seeded { seed: seed.wrapping_add(i as u64), low: 0.5 * nu, high: 0.5 * nu, r0 };
                base(format!("{tag}_{}", i + 1), 5.0 / nu, init, vec![Check::RatioFlattens])
            })
            .collect(),
    };
    if let (Some(out), [single]) = (&s.out, list.as_slice()) {
        let mut sc = single.clone();
        sc.csv = Some(out.clone());
        sc.validate()?;
        return Ok(vec![sc]);
    }
    for sc in &list {
        sc.validate()?;
    }
    Ok(list)
}

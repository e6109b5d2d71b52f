//! Flag values merged over an optional `key=value` file.

use std::path::{Path, PathBuf};

use crate::args::CommonArgs;
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub eps0: Option<f64>,
    pub alpha: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub init: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub eta: Option<f64>,
    pub cap: Option<f64>,
    pub r: Option<f64>,
    pub k_max: Option<usize>,
}

fn invalid(msg: String) -> CliError {
    CliError::Invalid(msg)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| invalid(format!("{key}: cannot parse {v:?}: {e}")))
}

/// Parses `"v1,v2,..."` into finite reals.
pub fn parse_init(text: &str) -> Result<Vec<f64>, CliError> {
    let values = text.split(',').map(|s| parse_num::<f64>("init", s)).collect::<Result<Vec<f64>, _>>()?;
    if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
        return Err(invalid(format!("init: non-finite value {bad}")));
    }
    Ok(values)
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(invalid(format!("{key}: expected true/false, got {other:?}"))),
    }
}

impl Settings {
    /// Reads `key=value` lines. Blank lines and lines starting with `#` are skipped.
    pub fn from_config_text(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key=value, got {raw:?}", n + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn from_config_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_config_text(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "nu" => self.nu = Some(parse_num(key, v)?),
            "delta" => self.delta = Some(parse_num(key, v)?),
            "eps" => self.eps = Some(parse_num(key, v)?),
            "eps0" => self.eps0 = Some(parse_num(key, v)?),
            "alpha" => self.alpha = Some(parse_num(key, v)?),
            "t-end" | "t_end" => self.t_end = Some(parse_num(key, v)?),
            "dt" => self.dt = Some(parse_num(key, v)?),
            "seed" => self.seed = Some(parse_num(key, v)?),
            "init" => self.init = Some(parse_init(v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "strict" => self.strict = parse_bool(key, v)?,
            "eta" => self.eta = Some(parse_num(key, v)?),
            "cap" => self.cap = Some(parse_num(key, v)?),
            "r" => self.r = Some(parse_num(key, v)?),
            "k-max" | "k_max" => self.k_max = Some(parse_num(key, v)?),
            other => return Err(invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// File values (if any) overridden by every flag that was given.
    pub fn resolve(flags: &CommonArgs) -> Result<Self, CliError> {
        let base = match &flags.config {
            Some(p) => Self::from_config_file(p)?,
            None => Settings::default(),
        };
        base.overlay(flags)
    }

    pub fn overlay(mut self, f: &CommonArgs) -> Result<Self, CliError> {
        fn pick<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
            if let Some(v) = flag {
                *slot = Some(v.clone());
            }
        }
        pick(&mut self.nu, &f.nu);
        pick(&mut self.delta, &f.delta);
        pick(&mut self.eps, &f.eps);
        pick(&mut self.eps0, &f.eps0);
        pick(&mut self.alpha, &f.alpha);
        pick(&mut self.t_end, &f.t_end);
        pick(&mut self.dt, &f.dt);
        pick(&mut self.seed, &f.seed);
        pick(&mut self.out, &f.out);
        pick(&mut self.eta, &f.eta);
        pick(&mut self.cap, &f.cap);
        pick(&mut self.r, &f.r);
        pick(&mut self.k_max, &f.k_max);
        if let Some(text) = &f.init {
            self.init = Some(parse_init(text)?);
        }
        self.strict |= f.strict;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file =
            Settings::from_config_text("# run\nnu = 0.02\ndelta=0.95\n\ninit=1,-2.5,3e-3\nstrict=true\n").unwrap();
        assert_eq!(file.nu, Some(0.02));
        assert_eq!(file.init, Some(vec![1.0, -2.5, 3e-3]));
        assert!(file.strict);
        let flags = CommonArgs { nu: Some(0.05), seed: Some(9), ..CommonArgs::default() };
        let merged = file.overlay(&flags).unwrap();
        assert_eq!(merged.nu, Some(0.05));
        assert_eq!(merged.delta, Some(0.95));
        assert_eq!(merged.seed(), 9);
    }

    #[test]
    fn rejects_unknown_keys_and_garbage() {
        assert!(Settings::from_config_text("speed=3").is_err());
        assert!(Settings::from_config_text("nu").is_err());
        assert!(Settings::from_config_text("nu=fast").is_err());
        assert!(parse_init("1,,2").is_err());
        assert!(parse_init("1,NaN").is_err());
    }

    #[test]
    fn default_seed_is_one() {
        assert_eq!(Settings::default().seed(), 1);
    }
}

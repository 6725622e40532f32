//! Flat `key = value` configuration with dotted section keys.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are written
//! `[a, b, c]`. Keys under `manifest.` are accepted and ignored, so a run
//! manifest is itself a valid configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use platelab::assembly::{FeedbackParams, SystemKind};
use platelab::{Annulus, PlateConfig};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Every recognized key with its default, in manifest order.
pub const KEYS: &[(&str, &str)] = &[
    ("geometry.r0", "1"),
    ("geometry.r1", "2"),
    ("geometry.x0", "[0, 0]"),
    ("plate.mu", "0.3"),
    ("fem.elements", "64"),
    ("fem.modes", "[0, 1, 2, 3]"),
    ("system", "2"),
    ("feedback.beta1", "2"),
    ("feedback.beta2", "1"),
    ("feedback.gamma1", "3"),
    ("feedback.gamma2", "-2"),
    ("feedback.tau1", "0.7"),
    ("feedback.tau2", "1.1"),
    // 0 picks a commensurate grid with at least 64 cells.
    ("delay.n_rho1", "0"),
    ("delay.n_rho2", "0"),
    ("mgc.samples", "720"),
    ("simulate.t_end", "10"),
    // 0 means the cell width of the delay lines.
    ("simulate.dt", "0"),
    ("simulate.initial", "random"),
    ("simulate.seed", "1"),
    ("simulate.weights", "[1, 0.5, 0.25]"),
    ("spectrum.count", "20"),
    // 0 means the mesh-resolved count.
    ("t_eigs.count", "0"),
    ("quasimode.pairs", "0"),
    ("sweep.points", "41"),
    // 0 means band/100 and the resolved band edge.
    ("sweep.lambda_min", "0"),
    ("sweep.lambda_max", "0"),
    ("sweep.estimator", "random"),
    ("sweep.seed", "1"),
    ("design.case", "is1"),
    ("design.k", "0"),
    ("design.l", "0"),
    ("design.which", "0"),
    ("design.branch", "positive"),
    ("verify.periods", "10"),
    ("verify.min_cells", "64"),
    ("verify.max_cells", "4096"),
    ("fit.input", ""),
    ("fit.kind", "both"),
    ("fit.window", "auto"),
];

#[derive(Clone, Debug)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            values: KEYS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key.starts_with("manifest.") {
                continue;
            }
            if !cfg.values.contains_key(key) {
                return Err(ConfigError(format!(
                    "unknown config key '{key}' (line {})",
                    lineno + 1
                )));
            }
            let value = value.trim_matches('"');
            cfg.values.insert(key.to_string(), value.to_string());
        }
        Ok(cfg)
    }

    /// Effective configuration, defaults included, as `key = value` lines.
    pub fn echo(&self) -> String {
        KEYS.iter()
            .map(|(k, _)| format!("{k} = {}\n", self.values[*k]))
            .collect()
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("unregistered key {key}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_num(key, self.raw(key))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| ConfigError(format!("{key}: '{v}' is not a nonnegative integer")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| ConfigError(format!("{key}: '{v}' is not a nonnegative integer")))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        list_items(key, self.raw(key))?
            .iter()
            .map(|s| parse_num(key, s))
            .collect()
    }

    pub fn u32_list(&self, key: &str) -> Result<Vec<u32>> {
        list_items(key, self.raw(key))?
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| ConfigError(format!("{key}: '{s}' is not a nonnegative integer")))
            })
            .collect()
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str> {
        let v = self.raw(key);
        options
            .iter()
            .find(|o| o.eq_ignore_ascii_case(v))
            .copied()
            .ok_or_else(|| {
                ConfigError(format!("{key}: '{v}' is not one of {}", options.join(", ")))
            })
    }

    pub fn geometry(&self) -> Result<Annulus> {
        let x0 = self.f64_list("geometry.x0")?;
        if x0.len() != 2 {
            return Err(ConfigError(format!(
                "geometry.x0 needs two coordinates, got {}",
                x0.len()
            )));
        }
        Annulus::with_origin(
            self.f64("geometry.r0")?,
            self.f64("geometry.r1")?,
            [x0[0], x0[1]],
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn plate(&self) -> Result<PlateConfig> {
        PlateConfig::new(self.f64("plate.mu")?).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn modes(&self) -> Result<Vec<u32>> {
        let modes = self.u32_list("fem.modes")?;
        if modes.is_empty() {
            return Err(ConfigError("fem.modes is empty".into()));
        }
        Ok(modes)
    }

    pub fn elements(&self) -> Result<usize> {
        let e = self.usize("fem.elements")?;
        if e == 0 {
            return Err(ConfigError("fem.elements must be at least 1".into()));
        }
        Ok(e)
    }

    pub fn system(&self) -> Result<SystemKind> {
        let v = self.usize("system")?;
        SystemKind::from_index(v as u32).map_err(|e| ConfigError(e.to_string()))
    }

    /// Feedback gains and delays, without hypothesis checks.
    pub fn feedback(&self) -> Result<FeedbackParams> {
        Ok(FeedbackParams {
            beta1: self.f64("feedback.beta1")?,
            beta2: self.f64("feedback.beta2")?,
            gamma1: self.f64("feedback.gamma1")?,
            gamma2: self.f64("feedback.gamma2")?,
            tau1: self.f64("feedback.tau1")?,
            tau2: self.f64("feedback.tau2")?,
        })
    }

    /// Explicit window, or None for `auto`.
    pub fn fit_window(&self) -> Result<Option<(f64, f64)>> {
        if self.raw("fit.window").eq_ignore_ascii_case("auto") {
            return Ok(None);
        }
        let w = self.f64_list("fit.window")?;
        if w.len() != 2 {
            return Err(ConfigError(format!(
                "fit.window needs [start, end] or auto, got {} values",
                w.len()
            )));
        }
        Ok(Some((w[0], w[1])))
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError(format!("{key}: '{v}' is not finite")));
    }
    Ok(x)
}

fn list_items(key: &str, v: &str) -> Result<Vec<String>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ConfigError(format!("{key}: expected a list like [a, b], got '{v}'")))?;
    Ok(inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_key() {
        let cfg = Config::default();
        assert_eq!(cfg.modes().unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(cfg.system().unwrap(), SystemKind::System2);
        assert!(cfg.feedback().unwrap().validate().is_ok());
        assert_eq!(cfg.fit_window().unwrap(), None);
    }

    #[test]
    fn parses_sections_lists_and_comments() {
        let cfg = Config::parse(
            "# header\ngeometry.x0 = [0.5, -1]\nfem.modes=[2]  # one mode\n\nsystem = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.f64_list("geometry.x0").unwrap(), vec![0.5, -1.0]);
        assert_eq!(cfg.modes().unwrap(), vec![2]);
        assert_eq!(cfg.system().unwrap(), SystemKind::System1);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("feedback.beta3 = 1\n").unwrap_err();
        assert!(err.0.contains("feedback.beta3"), "{err}");
    }

    #[test]
    fn manifest_keys_are_ignored() {
        assert!(Config::parse("manifest.wall_time = 3.2\nmanifest.outputs = [a.csv]\n").is_ok());
    }

    #[test]
    fn echo_roundtrips() {
        let cfg = Config::parse("feedback.beta1 = 4\nfit.window = [1, 5]\n").unwrap();
        let again = Config::parse(&cfg.echo()).unwrap();
        assert_eq!(again.echo(), cfg.echo());
        assert_eq!(again.fit_window().unwrap(), Some((1.0, 5.0)));
    }

    #[test]
    fn bad_values_rejected() {
        for text in [
            "system = 3",
            "fem.modes = 1, 2",
            "geometry.r0 = abc",
            "fem.elements = -1",
            "geometry.x0 = [1]",
        ] {
            let cfg = Config::parse(text).unwrap();
            let checks = [
                cfg.system().err(),
                cfg.modes().err(),
                cfg.geometry().err(),
                cfg.elements().err(),
            ];
            assert!(checks.iter().any(Option::is_some), "{text}");
        }
        assert!(Config::parse("no equals sign").is_err());
    }
}

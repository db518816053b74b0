//! Flat `key = value` configuration with command-line overrides.
//!
//! Lines may carry `#` comments. Later settings win, so `--key value` on the
//! command line overrides the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ising_rg_core::dynamics::{ObservableSpec, Schedule};
use ising_rg_core::transfer::{Coupling, ObservableFn};
use ising_rg_core::Spin;

use crate::error::{config_err, CliResult};

pub const KNOWN_KEYS: &[&str] = &[
    "k",
    "h",
    "gamma",
    "noise_scale",
    "f2",
    "g2",
    "table",
    "sites",
    "d",
    "d_max",
    "i",
    "j",
    "n_sites",
    "oracle",
    "boundary",
    "schedule",
    "steps",
    "replicas",
    "seed",
    "format",
    "output",
    "n",
    "x1",
    "x2",
    "from",
    "m",
    "init",
    "epsilon",
    "sigmas",
];

/// Conventional spellings accepted as aliases.
fn canonical(key: &str) -> &str {
    match key {
        "K" | "K0" | "k0" => "k",
        "N" => "n_sites",
        "T" => "steps",
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse_text(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = canonical(key);
        if !KNOWN_KEYS.contains(&key) {
            return Err(config_err(format!("unknown key {key:?}")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `--key value` / `--key=value` pairs.
    pub fn apply_overrides(&mut self, args: &[String]) -> CliResult<()> {
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| config_err(format!("expected --key, got {arg:?}")))?;
            match key.split_once('=') {
                Some((k, v)) => self.set(k, v)?,
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| config_err(format!("missing value for --{key}")))?;
                    self.set(key, v)?
                }
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| config_err(format!("{key} = {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.parsed::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(config_err(format!("{key} must be finite")));
        }
        Ok(v)
    }

    pub fn opt_usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.parsed::<usize>(key)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    pub fn i64_or(&self, key: &str, default: i64) -> CliResult<i64> {
        Ok(self.parsed::<i64>(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> CliResult<u64> {
        Ok(self.parsed::<u64>(key)?.unwrap_or(default))
    }

    pub fn list_f64(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| config_err(format!("{key}: {x:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn list_usize(&self, key: &str, default: &[usize]) -> CliResult<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|e| config_err(format!("{key}: {x:?}: {e}")))
                })
                .collect(),
        }
    }

    pub fn coupling(&self) -> CliResult<Coupling> {
        Ok(Coupling::new(
            self.f64_or("k", 1.0)?,
            self.f64_or("h", 0.0)?,
            self.f64_or("gamma", 0.0)?,
        )?)
    }

    /// `f2 = v_plus,v_minus`.
    pub fn observable_fn(&self, key: &str) -> CliResult<ObservableFn> {
        let v = self.list_f64(key)?.unwrap_or_else(|| vec![2.0, 1.0]);
        match v.as_slice() {
            [p, m] => Ok(ObservableFn::new(*p, *m)?),
            _ => Err(config_err(format!(
                "{key} needs two values: f(+1)^2,f(-1)^2"
            ))),
        }
    }

    /// A `table` key selects an m-point table, otherwise the `f2`/`g2` pair.
    pub fn observable_spec(&self) -> CliResult<ObservableSpec> {
        let spec = match self.list_f64("table")? {
            Some(values) => ObservableSpec::Table { values },
            None => ObservableSpec::Pair {
                f: self.observable_fn("f2")?,
                g: self.observable_fn("g2")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn schedule(&self) -> CliResult<Schedule> {
        Ok(self
            .raw("schedule")
            .unwrap_or("geometric:0.5,0.5")
            .parse::<Schedule>()?)
    }

    pub fn format(&self) -> CliResult<Format> {
        match self.raw("format").unwrap_or("json") {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(config_err(format!(
                "format must be json or csv, got {other:?}"
            ))),
        }
    }

    pub fn output(&self) -> Option<&str> {
        self.raw("output").filter(|p| *p != "-")
    }
}

/// `periodic` or a boundary pair `(σ₀, σ_{N+1})` written like `+-` or `+,-`.
pub fn parse_boundary(text: &str) -> CliResult<Option<(Spin, Spin)>> {
    if text == "periodic" {
        return Ok(None);
    }
    let sign = |c: char| match c {
        '+' | 'p' => Ok(Spin::Up),
        '-' | 'm' => Ok(Spin::Down),
        _ => Err(config_err(format!(
            "boundary {text:?}: expected periodic or two of +/-"
        ))),
    };
    let chars: Vec<char> = text
        .chars()
        .filter(|c| !matches!(c, ',' | '(' | ')' | ' '))
        .collect();
    match chars.as_slice() {
        [a, b] => Ok(Some((sign(*a)?, sign(*b)?))),
        _ => Err(config_err(format!(
            "boundary {text:?}: expected periodic or two of +/-"
        ))),
    }
}

pub fn boundary_label(s0: Spin, s1: Spin) -> String {
    let c = |s: Spin| if s == Spin::Up { '+' } else { '-' };
    format!("{}{}", c(s0), c(s1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_overrides() {
        let mut cfg =
            RunConfig::parse_text("# run\nK = 0.5\n\nf2 = 2, 1  # comment\nN=12\n").unwrap();
        assert_eq!(cfg.raw("k"), Some("0.5"));
        assert_eq!(cfg.raw("n_sites"), Some("12"));
        cfg.apply_overrides(&["--k".into(), "0.7".into(), "--seed=9".into()])
            .unwrap();
        assert_eq!(cfg.f64_or("k", 0.0).unwrap(), 0.7);
        assert_eq!(cfg.u64_or("seed", 0).unwrap(), 9);
        assert_eq!(
            cfg.observable_fn("f2").unwrap(),
            ObservableFn::new(2.0, 1.0).unwrap()
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse_text("nonsense").is_err());
        assert!(RunConfig::parse_text("colour = red").is_err());
        let cfg = RunConfig::parse_text("k = abc\nf2 = 1\nformat = xml").unwrap();
        assert!(cfg.f64_or("k", 0.0).is_err());
        assert!(cfg.observable_fn("f2").is_err());
        assert!(cfg.format().is_err());
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_overrides(&["--k".into()]).is_err());
        assert!(cfg.apply_overrides(&["k".into(), "1".into()]).is_err());
        assert!(RunConfig::parse_text("k = inf")
            .unwrap()
            .f64_or("k", 0.0)
            .is_err());
    }

    #[test]
    fn boundaries() {
        assert_eq!(parse_boundary("periodic").unwrap(), None);
        assert_eq!(parse_boundary("+-").unwrap(), Some((Spin::Up, Spin::Down)));
        assert_eq!(
            parse_boundary("(-,+)").unwrap(),
            Some((Spin::Down, Spin::Up))
        );
        assert_eq!(
            parse_boundary("mm").unwrap(),
            Some((Spin::Down, Spin::Down))
        );
        assert!(parse_boundary("+").is_err());
        assert_eq!(boundary_label(Spin::Down, Spin::Up), "-+");
    }

    #[test]
    fn observable_selection() {
        let cfg = RunConfig::parse_text("table = 1,2,3,4,5,6,7,8").unwrap();
        assert_eq!(cfg.observable_spec().unwrap().m(), 3);
        let cfg = RunConfig::parse_text("table = 1,2,3").unwrap();
        assert!(cfg.observable_spec().is_err());
        assert!(matches!(
            RunConfig::default().observable_spec().unwrap(),
            ObservableSpec::Pair { .. }
        ));
    }
}

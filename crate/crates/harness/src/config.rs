//! Flat `key=value` experiment configuration with per-suite defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Cput,
    Fpu,
    Wave,
    Avgcheck,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Cput => "cput",
            Suite::Fpu => "fpu",
            Suite::Wave => "wave",
            Suite::Avgcheck => "avgcheck",
        }
    }

    /// Default settings; these reproduce the reference experiments.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Suite::Cput => &[
                ("mode", "steady"),
                ("epsilon", "0.069908094621482"),
                ("D", "12"),
                ("omega", "0.628318530717959"),
                ("F", "4.517732098486560"),
                ("alpha", "0.471019510657106"),
                ("beta", "3.388299073864920"),
                ("gamma", "0.208520337367901"),
                ("detuning", "0"),
                ("h", "0.01"),
                ("T", "3000"),
                ("stride", "10"),
                ("window", "0.2"),
                ("samples", "64"),
                ("basin.grid", "desk"),
                ("basin.T", "450"),
                ("basin.h", "0.01"),
                ("basin.clock", "slow"),
                ("sweep.points", "21"),
                ("sweep.max", "0.5"),
            ],
            Suite::Fpu => &[
                ("methods", "benchmark,exp,classical,improved"),
                ("m", "3"),
                ("omega", "200"),
                ("T_factor", "2"),
                ("h", "0.05"),
                ("N", "10"),
                ("exp.h", "0.05"),
                ("benchmark.h_factor", "0.01"),
                ("benchmark.stride", "1000"),
            ],
            Suite::Wave => &[
                ("methods", "benchmark,exp,classical,improved"),
                ("case", "double"),
                ("epsilon", "0.01"),
                ("a", "1"),
                ("b", "1"),
                ("M1", "50"),
                ("M2", "20"),
                ("T", "200"),
                ("h", "10"),
                ("N", "10"),
                ("delta_t", "0.17321"),
                ("tune", "false"),
                ("tune.target", "1e-12"),
                ("tune.max", "80"),
                ("dealias", "false"),
                ("benchmark.dt", "1e-3"),
                ("benchmark.scheme", "rk4"),
            ],
            Suite::Avgcheck => &[
                ("systems", "20"),
                ("states", "10"),
                ("max_dim", "8"),
                ("samples", "64"),
                ("seed", "20240601"),
            ],
        }
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cput" => Ok(Suite::Cput),
            "fpu" => Ok(Suite::Fpu),
            "wave" => Ok(Suite::Wave),
            "avgcheck" => Ok(Suite::Avgcheck),
            other => Err(HarnessError::Config(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Benchmark,
    Exp,
    Classical,
    Improved,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Benchmark => "benchmark",
            Method::Exp => "exp",
            Method::Classical => "classical",
            Method::Improved => "improved",
        }
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "benchmark" => Ok(Method::Benchmark),
            "exp" => Ok(Method::Exp),
            "classical" => Ok(Method::Classical),
            "improved" => Ok(Method::Improved),
            other => Err(HarnessError::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub out: PathBuf,
    values: BTreeMap<String, String>,
    overridden: BTreeSet<String>,
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        let values = suite.defaults().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Self { suite, out: PathBuf::from("out"), values, overridden: BTreeSet::new() }
    }

    /// Sets a known key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                self.overridden.insert(key.to_string());
                Ok(())
            }
            None => Err(HarnessError::Config(format!("unknown key `{key}` for suite {}", self.suite))),
        }
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(k, v)
    }

    /// Reads `key=value` lines; blank lines and `#` comments are skipped.
    pub fn load_str(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                self.assign(line)?;
            }
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.load_str(&text)
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| HarnessError::Config(format!("missing key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get_str(key)?;
        raw.parse().map_err(|_| HarnessError::Config(format!("cannot parse `{key}` = `{raw}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.get(key)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(HarnessError::Config(format!("`{key}` must be finite")))
        }
    }

    pub fn get_positive(&self, key: &str) -> Result<f64> {
        let v = self.get_f64(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(HarnessError::Config(format!("`{key}` must be positive, got {v}")))
        }
    }

    pub fn get_count(&self, key: &str) -> Result<usize> {
        let v: usize = self.get(key)?;
        if v > 0 {
            Ok(v)
        } else {
            Err(HarnessError::Config(format!("`{key}` must be at least 1")))
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.get_str(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(HarnessError::Config(format!("`{key}` must be a boolean, got `{other}`"))),
        }
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let mut out: Vec<Method> = self.get_str("methods")?.split(',').map(str::parse).collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// All settings, overridden ones marked, for the metadata file.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![("suite".to_string(), self.suite.to_string())];
        for (k, v) in &self.values {
            out.push((format!("config.{k}"), v.clone()));
        }
        if !self.overridden.is_empty() {
            out.push(("config.overridden".into(), self.overridden.iter().cloned().collect::<Vec<_>>().join(",")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let mut c = ExperimentConfig::new(Suite::Fpu);
        assert_eq!(c.get_f64("omega").unwrap(), 200.0);
        c.load_str("# comment\nomega = 100\n\nN=20 # trailing\n").unwrap();
        assert_eq!(c.get_f64("omega").unwrap(), 100.0);
        assert_eq!(c.get_count("N").unwrap(), 20);
        assert!(c.entries().iter().any(|(k, v)| k == "config.overridden" && v == "N,omega"));
    }

    #[test]
    fn unknown_key_is_config_error() {
        let mut c = ExperimentConfig::new(Suite::Wave);
        assert!(c.assign("nope=1").unwrap_err().is_config());
        assert!(c.assign("missing_equals").unwrap_err().is_config());
    }

    #[test]
    fn bad_values() {
        let mut c = ExperimentConfig::new(Suite::Wave);
        c.set("h", "-1").unwrap();
        assert!(c.get_positive("h").is_err());
        c.set("methods", "classical,bogus").unwrap();
        assert!(c.methods().is_err());
        c.set("methods", "improved,classical,improved").unwrap();
        assert_eq!(c.methods().unwrap(), vec![Method::Classical, Method::Improved]);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Cput, Suite::Fpu, Suite::Wave, Suite::Avgcheck] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }
}

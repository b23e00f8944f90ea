use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Context;
use serde::{Serialize, Serializer};

use crate::config::ExperimentConfig;

fn extended<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("infinity")
    } else {
        s.serialize_str("-infinity")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    #[serde(serialize_with = "extended")]
    pub max: f64,
    #[serde(serialize_with = "extended")]
    pub mean: f64,
    #[serde(serialize_with = "extended")]
    pub min: f64,
}

impl Residuals {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { max: f64::NAN, mean: f64::NAN, min: f64::NAN };
        }
        Self {
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub check: String,
    pub params: ExperimentConfig,
    pub residuals: Residuals,
    pub pass: bool,
    #[serde(serialize_with = "extended")]
    pub tolerance: f64,
    pub runtime_ms: u64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(check: &str, params: &ExperimentConfig, residuals: &[f64], pass: bool, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            params: params.clone(),
            residuals: Residuals::of(residuals),
            pass,
            tolerance,
            runtime_ms: 0,
            provenance: Provenance { tool: "warpcone", version: env!("CARGO_PKG_VERSION"), seed: params.seed },
            warnings: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn with_details(mut self, details: impl Serialize) -> anyhow::Result<Self> {
        self.details = serde_json::to_value(details)?;
        Ok(self)
    }

    /// Pretty JSON to `params.out`, or stdout.
    pub fn emit(&self) -> anyhow::Result<()> {
        match &self.params.out {
            Some(path) => {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w)?;
                w.flush()?;
            }
            None => {
                let stdout = std::io::stdout();
                let mut w = stdout.lock();
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_summary() {
        let r = Residuals::of(&[1.0, -2.0, 4.0]);
        assert_eq!((r.max, r.min, r.mean), (4.0, -2.0, 1.0));
        assert!(Residuals::of(&[]).max.is_nan());
    }

    #[test]
    fn non_finite_values_serialize_as_strings() {
        let r = Residuals::of(&[f64::NEG_INFINITY, 0.0]);
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["min"], "-infinity");
        assert_eq!(v["max"], 0.0);
    }

    #[test]
    fn provenance_carries_the_seed() {
        let cfg = ExperimentConfig { seed: Some(9), ..Default::default() };
        let r = Report::new("x", &cfg, &[0.0], true, 1e-9);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["provenance"]["seed"], 9);
        assert_eq!(v["provenance"]["tool"], "warpcone");
    }
}

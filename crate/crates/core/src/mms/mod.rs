//! Finite metric measure spaces and the constructions built on them.

mod cone;
mod suspension;
mod warped;

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cone::{
    circle_mms, cone, cone_distance, interval_model_mms, ConeIndex, RadialGrid,
};
pub use suspension::{suspension_check, SuspensionReport};
pub use warped::{warped_product, WarpedOptions};

/// Slack used by [`FiniteMMS::validate`] for the metric axioms.
pub const METRIC_SLACK: f64 = 1e-9;

/// A finite metric measure space: labelled atoms, a distance matrix stored
/// row-major, and one weight per atom.
///
/// Weights are nonnegative. Zero-weight atoms (cone apexes) take part in
/// distances but never carry mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMMS {
    labels: Vec<String>,
    dist: Vec<f64>,
    weight: Vec<f64>,
}

/// One failed invariant reported by [`FiniteMMS::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Shape { detail: String },
    NonFinite { i: usize, j: usize },
    Diagonal { i: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    Symmetry { i: usize, j: usize, gap: f64 },
    Triangle { i: usize, j: usize, via: usize, excess: f64 },
    Weight { i: usize, value: f64 },
    NoMass,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { detail } => write!(f, "shape: {detail}"),
            Violation::NonFinite { i, j } => write!(f, "non-finite distance at ({i},{j})"),
            Violation::Diagonal { i, value } => write!(f, "dist[{i}][{i}] = {value} != 0"),
            Violation::Negative { i, j, value } => write!(f, "dist[{i}][{j}] = {value} < 0"),
            Violation::Symmetry { i, j, gap } => {
                write!(f, "symmetry violation at ({i},{j}) by {gap:e}")
            }
            Violation::Triangle { i, j, via, excess } => {
                write!(f, "triangle violation d({i},{j}) > d({i},{via}) + d({via},{j}) by {excess:e}")
            }
            Violation::Weight { i, value } => write!(f, "weight[{i}] = {value} is not a valid mass"),
            Violation::NoMass => write!(f, "total weight is zero"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MmsFile {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    weight: Vec<f64>,
}

impl FiniteMMS {
    /// Builds a space from a row-major `n×n` distance buffer; only shapes are
    /// checked here, the metric axioms are left to [`validate`](Self::validate).
    pub fn from_flat(labels: Vec<String>, dist: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        let n = weight.len();
        if labels.len() != n || dist.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "{} labels, {} weights and {} distance entries do not describe one space",
                labels.len(),
                n,
                dist.len()
            )));
        }
        Ok(Self { labels, dist, weight })
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>], weight: Vec<f64>) -> Result<Self> {
        let n = weight.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "distance matrix is not {n}x{n}"
            )));
        }
        Self::from_flat(labels, rows.concat(), weight)
    }

    /// Builds a space from a distance function, filling rows in parallel.
    pub fn from_fn<F>(labels: Vec<String>, weight: Vec<f64>, dist: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let n = weight.len();
        let mut buf = vec![0.0; n * n];
        buf.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, d) in row.iter_mut().enumerate() {
                *d = if i == j { 0.0 } else { dist(i, j) };
            }
        });
        Self::from_flat(labels, buf, weight)
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weight[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total_mass(&self) -> f64 {
        self.weight.iter().sum()
    }

    /// Largest pairwise distance; 0 for a single atom.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Every invariant that fails, with indices and magnitudes.
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with_slack(METRIC_SLACK)
    }

    pub fn validate_with_slack(&self, slack: f64) -> Vec<Violation> {
        let n = self.len();
        let mut out = Vec::new();
        if self.labels.len() != n || self.dist.len() != n * n {
            out.push(Violation::Shape {
                detail: format!("{} labels, {} weights, {} distances", self.labels.len(), n, self.dist.len()),
            });
            return out;
        }
        for (i, &w) in self.weight.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                out.push(Violation::Weight { i, value: w });
            }
        }
        if n > 0 && self.total_mass() <= 0.0 {
            out.push(Violation::NoMass);
        }
        let mut finite = true;
        for i in 0..n {
            let d = self.dist(i, i);
            if d != 0.0 {
                out.push(Violation::Diagonal { i, value: d });
            }
            for j in 0..n {
                let d = self.dist(i, j);
                if !d.is_finite() {
                    out.push(Violation::NonFinite { i, j });
                    finite = false;
                } else if d < 0.0 {
                    out.push(Violation::Negative { i, j, value: d });
                }
                if j > i {
                    let gap = (d - self.dist(j, i)).abs();
                    if gap > slack || gap.is_nan() {
                        out.push(Violation::Symmetry { i, j, gap });
                    }
                }
            }
        }
        if !finite {
            return out;
        }
        // worst intermediate point per ordered pair i < j
        let triangle: Vec<Violation> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let ri = self.row(i);
                (i + 1..n).filter_map(move |j| {
                    let rj = self.row(j);
                    let dij = ri[j];
                    let (via, best) = ri
                        .iter()
                        .zip(rj)
                        .map(|(a, b)| a + b)
                        .enumerate()
                        .fold((usize::MAX, f64::INFINITY), |acc, (k, s)| {
                            if s < acc.1 {
                                (k, s)
                            } else {
                                acc
                            }
                        });
                    let excess = dij - best;
                    (excess > slack).then_some(Violation::Triangle { i, j, via, excess })
                })
            })
            .collect();
        out.extend(triangle);
        out
    }

    /// All `k` with `|d(i,k) - d(i,j)/2| <= eps` and `|d(k,j) - d(i,j)/2| <= eps`,
    /// sorted by total deviation then index. A pair `(i, i)` has itself as its
    /// only midpoint.
    pub fn midpoints(&self, i: usize, j: usize, eps: f64) -> Vec<usize> {
        if i == j {
            return vec![i];
        }
        let half = 0.5 * self.dist(i, j);
        let (ri, rj) = (self.row(i), self.row(j));
        let mut found: Vec<(f64, usize)> = (0..self.len())
            .filter_map(|k| {
                let a = (ri[k] - half).abs();
                let b = (rj[k] - half).abs();
                (a <= eps && b <= eps).then_some((a + b, k))
            })
            .collect();
        found.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        found.into_iter().map(|(_, k)| k).collect()
    }

    /// Sub-space on the given atoms, in the given order.
    pub fn restrict(&self, keep: &[usize]) -> FiniteMMS {
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let weight = keep.iter().map(|&i| self.weight[i]).collect();
        let dist = keep
            .iter()
            .flat_map(|&i| keep.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .collect();
        FiniteMMS { labels, dist, weight }
    }

    /// Same space with every weight multiplied by `c`.
    pub fn scaled_weights(&self, c: f64) -> FiniteMMS {
        let mut out = self.clone();
        out.weight.iter_mut().for_each(|w| *w *= c);
        out
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<()> {
        let n = self.len();
        let file = MmsFile {
            labels: self.labels.clone(),
            dist: (0..n).map(|i| self.row(i).to_vec()).collect(),
            weight: self.weight.clone(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    /// Loads the JSON form and rejects anything that fails [`validate`](Self::validate).
    pub fn from_json<R: Read>(r: R) -> Result<Self> {
        let file: MmsFile = serde_json::from_reader(r)?;
        let m = Self::from_rows(file.labels, &file.dist, file.weight)?;
        let violations = m.validate();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidInput(format!(
                "space fails {} invariant(s), first: {v}",
                violations.len()
            )));
        }
        Ok(m)
    }

    /// CSV with one row per atom: label, weight, then the distance row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["label".to_string(), "weight".to_string()];
        header.extend(self.labels.iter().cloned());
        out.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.labels[i].clone(), self.weight[i].to_string()];
            rec.extend(self.row(i).iter().map(|d| d.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

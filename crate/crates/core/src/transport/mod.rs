//! Exact discrete optimal transport between densities on a [`FiniteMMS`], and
//! the midpoint displacement-convexity checks built on it.

mod cd;
mod simplex;

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms::FiniteMMS;

pub use cd::{
    cd_check, cd_star_check, displacement_midpoint, mcp_check, renyi_entropy, CDReport, Coefficient, McpReport,
};
pub use simplex::{solve_transport, TransportSolution};

/// Marginal error allowed on a solved coupling.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// A probability vector on the atoms of a space, vanishing on zero-weight atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    mass: Vec<f64>,
}

impl Density {
    /// Checks the shape, signs, support and total (within 1e−9) and then
    /// renormalizes to total 1.
    pub fn new(space: &FiniteMMS, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != space.len() {
            return Err(Error::InvalidInput(format!("{} masses for {} atoms", mass.len(), space.len())));
        }
        if let Some((i, m)) = mass.iter().enumerate().find(|(_, m)| !(**m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput(format!("mass[{i}] = {m}")));
        }
        if let Some(i) = (0..mass.len()).find(|&i| mass[i] > 0.0 && space.weight(i) <= 0.0) {
            return Err(Error::InvalidInput(format!("mass on zero-weight atom {i} is not absolutely continuous")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { mass: mass.into_iter().map(|m| m / total).collect() })
    }

    /// Mass proportional to `profile(i) · weight_i`.
    pub fn from_profile(space: &FiniteMMS, profile: impl Fn(usize) -> f64) -> Result<Self> {
        let raw: Vec<f64> = (0..space.len()).map(|i| profile(i).max(0.0) * space.weight(i)).collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("profile carries no mass".into()));
        }
        Self::new(space, raw.into_iter().map(|m| m / total).collect())
    }

    /// Normalized restriction of the reference measure to `set`.
    pub fn uniform_on(space: &FiniteMMS, set: &[usize]) -> Result<Self> {
        let mut inside = vec![false; space.len()];
        for &i in set {
            if i >= space.len() {
                return Err(Error::InvalidInput(format!("atom {i} outside the space")));
            }
            inside[i] = true;
        }
        Self::from_profile(space, |i| if inside[i] { 1.0 } else { 0.0 })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `ρ_i = mass_i / weight_i`, zero off the support.
    pub fn density(&self, space: &FiniteMMS, i: usize) -> f64 {
        if self.mass[i] > 0.0 {
            self.mass[i] / space.weight(i)
        } else {
            0.0
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| self.mass[i] > 0.0).collect()
    }
}

/// On-disk form `{"space": path, "mass": [...]}`; a relative space path is
/// resolved against the file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityFile {
    pub space: PathBuf,
    pub mass: Vec<f64>,
}

impl DensityFile {
    pub fn load(path: &Path) -> Result<(FiniteMMS, Density)> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        let file: DensityFile = serde_json::from_str(&text)?;
        let space_path = if file.space.is_relative() {
            path.parent().unwrap_or(Path::new(".")).join(&file.space)
        } else {
            file.space.clone()
        };
        let space = FiniteMMS::from_json(std::fs::File::open(space_path)?)?;
        let density = Density::new(&space, file.mass)?;
        Ok((space, density))
    }
}

/// A transport plan, stored sparsely as `(from, to, mass)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    pub fn from_entries(n: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.0 >= n || e.1 >= n || !(e.2 >= 0.0)) {
            return Err(Error::InvalidInput(format!("bad coupling entry {e:?}")));
        }
        Ok(Self { n, entries })
    }

    /// The plan leaving every atom in place.
    pub fn diagonal(mu: &Density) -> Self {
        Self { n: mu.len(), entries: mu.support().into_iter().map(|i| (i, i, mu.mass[i])).collect() }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for &(i, j, x) in &self.entries {
            m[(i, j)] += x;
        }
        m
    }

    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; self.n];
        let mut b = vec![0.0; self.n];
        for &(i, j, x) in &self.entries {
            a[i] += x;
            b[j] += x;
        }
        (a, b)
    }

    /// Largest deviation of either marginal from the given densities.
    pub fn marginal_error(&self, mu0: &Density, mu1: &Density) -> f64 {
        let (a, b) = self.marginals();
        a.iter()
            .zip(&mu0.mass)
            .chain(b.iter().zip(&mu1.mass))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalTransport {
    /// `W₂(μ₀, μ₁)`.
    pub cost: f64,
    pub coupling: Coupling,
    /// Largest violation of dual feasibility; at most 1e−9 · max cost.
    pub dual_residual: f64,
    pub pivots: usize,
}

fn check_density(space: &FiniteMMS, mu: &Density) -> Result<()> {
    if mu.len() != space.len() {
        return Err(Error::InvalidInput(format!("density on {} atoms, space has {}", mu.len(), space.len())));
    }
    Ok(())
}

/// Exact `W₂` and an optimal coupling for the cost `d²`.
pub fn wasserstein2(space: &FiniteMMS, mu0: &Density, mu1: &Density) -> Result<OptimalTransport> {
    check_density(space, mu0)?;
    check_density(space, mu1)?;
    let (src, dst) = (mu0.support(), mu1.support());
    let supply: Vec<f64> = src.iter().map(|&i| mu0.mass[i]).collect();
    let demand: Vec<f64> = dst.iter().map(|&j| mu1.mass[j]).collect();
    let cost: Vec<f64> = src
        .iter()
        .flat_map(|&i| dst.iter().map(move |&j| (i, j)))
        .map(|(i, j)| space.dist(i, j).powi(2))
        .collect();
    let max_cost = cost.iter().copied().fold(0.0, f64::max);
    let sol = solve_transport(&supply, &demand, &cost)?;
    if sol.dual_residual > 1e-9 * max_cost {
        return Err(Error::Transport(format!(
            "dual residual {} exceeds 1e-9 of the largest cost {max_cost}",
            sol.dual_residual
        )));
    }
    let coupling =
        Coupling::from_entries(space.len(), sol.flows.iter().map(|&(s, t, x)| (src[s], dst[t], x)).collect())?;
    let err = coupling.marginal_error(mu0, mu1);
    if err > MARGINAL_TOLERANCE {
        return Err(Error::Transport(format!("coupling marginals off by {err}")));
    }
    Ok(OptimalTransport { cost: sol.cost.max(0.0).sqrt(), coupling, dual_residual: sol.dual_residual, pivots: sol.pivots })
}

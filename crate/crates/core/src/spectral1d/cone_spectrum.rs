//! Cone spectrum by separation of variables: each fiber eigenvalue `λ_i`
//! contributes the spectrum of the radial operator with potential `λ_i/sin²`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{discretize_fiber_operator, eigen, heat_semigroup_1d, Spectrum, SturmLiouville1D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct FiberBlock {
    pub lambda_fiber: f64,
    /// How many fiber eigenfunctions share `lambda_fiber`.
    pub multiplicity: usize,
    pub eigenvalues: Vec<f64>,
}

/// Radial spectra for each distinct fiber eigenvalue; repeated fiber
/// eigenvalues are merged into one block with their multiplicity.
pub fn cone_spectrum(
    fiber_eigenvalues: &[f64],
    k: f64,
    nu: f64,
    per_fiber: usize,
    n: usize,
) -> Result<Vec<FiberBlock>> {
    if fiber_eigenvalues.is_empty() {
        return Err(Error::InvalidInput("no fiber eigenvalues".into()));
    }
    let mut sorted = fiber_eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for l in sorted {
        // small negative values are roundoff on the constant mode
        let l = if l < 0.0 && l > -1e-10 { 0.0 } else { l };
        match groups.last_mut() {
            Some((g, m)) if (l - *g).abs() <= 1e-9 * (1.0 + g.abs()) => *m += 1,
            _ => groups.push((l, 1)),
        }
    }
    groups
        .into_par_iter()
        .map(|(lambda_fiber, multiplicity)| {
            let op = discretize_fiber_operator(k, nu, lambda_fiber, n)?;
            let s = eigen(&op, per_fiber.min(n))?;
            Ok(FiberBlock { lambda_fiber, multiplicity, eigenvalues: s.eigenvalues })
        })
        .collect()
}

/// The multiset union of all blocks, ascending.
pub fn flatten_cone_spectrum(blocks: &[FiberBlock]) -> Vec<f64> {
    let mut all: Vec<f64> = blocks
        .iter()
        .flat_map(|b| b.eigenvalues.iter().flat_map(move |&l| std::iter::repeat_n(l, b.multiplicity)))
        .collect();
    all.sort_by(f64::total_cmp);
    all
}

/// Heat flow on the cone of a product `u₁ ⊗ u₂` whose fiber factor `u₂` is
/// an eigenfunction with eigenvalue `op.lambda_fiber()`: `(P_t u₁) ⊗ u₂`,
/// rows indexed by radius, columns by fiber atom.
pub fn cone_heat(
    op: &SturmLiouville1D,
    spec: &Spectrum,
    radial: &[f64],
    fiber: &[f64],
    t: f64,
) -> Result<DMatrix<f64>> {
    let pu = heat_semigroup_1d(op, spec, radial, t)?.values;
    Ok(DMatrix::from_fn(pu.len(), fiber.len(), |i, j| pu[i] * fiber[j]))
}

//! Weighted 1-D operators `d²/dr² + ν (cos_K/sin_K) d/dr − λ/sin_K²` on the
//! model interval: discretization, spectra, Weyl classification, heat flow.

mod cone_spectrum;
mod heat;
mod tridiag;
mod weyl;

use std::io::Write;

use log::warn;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mms::RadialGrid;
use crate::model_fns::sin_k;

pub use cone_spectrum::{cone_heat, cone_spectrum, flatten_cone_spectrum, FiberBlock};
pub use heat::{
    bakry_ledoux_check, grid_gamma, heat_semigroup_1d, spectral_gap_bound_check,
    BakryLedouxReport, GapReport, HeatState,
};
pub use tridiag::SymTridiagonal;
pub use weyl::{
    essential_self_adjointness, schrodinger_transform, weyl_classify, Endpoint,
    SchrodingerPotential, WeylClassification, WeylKind, LIMIT_POINT_THRESHOLD,
};

/// Below this many cells the discretization is flagged as under-resolved.
pub const RESOLVED_CELLS: usize = 8;

/// Flux-form finite-volume discretization of the weighted operator: `−L` is
/// represented by the generalized pencil `(A, M)` with tridiagonal stiffness
/// `A` and diagonal mass `M`.
#[derive(Debug, Clone, Serialize)]
pub struct SturmLiouville1D {
    curvature: f64,
    nu: f64,
    lambda_fiber: f64,
    #[serde(skip)]
    grid: RadialGrid,
    diag: Vec<f64>,
    off: Vec<f64>,
    mass: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Assembles `−L` for `K > 0` on `n` cells of `(0, π/√K)`.
pub fn discretize_fiber_operator(k: f64, nu: f64, lambda_fiber: f64, n: usize) -> Result<SturmLiouville1D> {
    if !(nu >= 0.0) || !(lambda_fiber >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need nu >= 0 and lambda >= 0, got nu = {nu}, lambda = {lambda_fiber}"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 cells, got {n}")));
    }
    let grid = RadialGrid::model(k, nu, n)?;
    let h = grid.step();
    let mut warnings = Vec::new();
    if n < RESOLVED_CELLS {
        let msg = format!("under-resolved: {n} cells (fewer than {RESOLVED_CELLS})");
        warn!("{msg}");
        warnings.push(msg);
    }
    // conductances at interior half-nodes; the end fluxes are zero
    let face: Vec<f64> = (1..n)
        .map(|i| Ok(sin_k(k, i as f64 * h)?.powf(nu)))
        .collect::<Result<_>>()?;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let c = face[i] / h;
        diag[i] += c;
        diag[i + 1] += c;
        off[i] = -c;
    }
    if lambda_fiber > 0.0 {
        for (i, &r) in grid.nodes().iter().enumerate() {
            diag[i] += lambda_fiber * sin_k(k, r)?.powf(nu - 2.0) * h;
        }
    }
    let mass = grid.cell_weights().to_vec();
    Ok(SturmLiouville1D { curvature: k, nu, lambda_fiber, grid, diag, off, mass, warnings })
}

impl SturmLiouville1D {
    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda_fiber(&self) -> f64 {
        self.lambda_fiber
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn stiffness_diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn stiffness_off(&self) -> &[f64] {
        &self.off
    }

    pub fn stiffness_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        })
    }

    /// `A u`.
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * u[i];
                if i > 0 {
                    y += self.off[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * u[i + 1];
                }
                y
            })
            .collect()
    }

    /// The generator applied to `u`: `L u = −M⁻¹ A u`.
    pub fn apply_generator(&self, u: &[f64]) -> Vec<f64> {
        self.apply_stiffness(u)
            .into_iter()
            .zip(&self.mass)
            .map(|(a, m)| -a / m)
            .collect()
    }

    /// `M^{-1/2} A M^{-1/2}`.
    pub fn symmetric_form(&self) -> SymTridiagonal {
        let s: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let d = self.diag.iter().zip(&s).map(|(a, si)| a * si * si).collect();
        let e = self.off.iter().enumerate().map(|(i, a)| a * s[i] * s[i + 1]).collect();
        SymTridiagonal { d, e }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }
}

/// Lowest generalized eigenpairs of `(A, M)`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `n × k`, columns M-orthonormal.
    pub eigenvectors: DMatrix<f64>,
    /// `‖A v − μ M v‖` per pair.
    pub residuals: Vec<f64>,
    /// `‖A‖_∞`, the scale residuals are measured against.
    pub stiffness_norm: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// CSV with columns `index,eigenvalue,residual`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "eigenvalue", "residual"])?;
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            out.write_record(&[i.to_string(), l.to_string(), r.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Smallest eigenvalue above `floor`.
    pub fn first_above(&self, floor: f64) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&l| l > floor)
    }
}

/// Pair residuals above this multiple of `‖A‖` count as non-convergence.
const RESIDUAL_LIMIT: f64 = 1e-8;

/// The `k` smallest eigenpairs of `op`, ascending.
pub fn eigen(op: &SturmLiouville1D, k: usize) -> Result<Spectrum> {
    let n = op.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("requested {k} eigenpairs of a size-{n} operator")));
    }
    let t = op.symmetric_form();
    let values = t.eigenvalues(k);
    let (vectors, _) = t.eigenvectors(&values)?;
    let mut eigenvectors = DMatrix::zeros(n, k);
    for (j, y) in vectors.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, j)] = y[i] / op.mass[i].sqrt();
        }
    }
    let stiffness_norm = (0..n)
        .map(|i| {
            let mut s = op.diag[i].abs();
            if i > 0 {
                s += op.off[i - 1].abs();
            }
            if i + 1 < n {
                s += op.off[i].abs();
            }
            s
        })
        .fold(0.0, f64::max);
    let mut residuals = Vec::with_capacity(k);
    for (j, &mu) in values.iter().enumerate() {
        let v: Vec<f64> = eigenvectors.column(j).iter().copied().collect();
        let av = op.apply_stiffness(&v);
        let r = av
            .iter()
            .zip(&v)
            .zip(&op.mass)
            .map(|((a, x), m)| (a - mu * m * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if !(r <= RESIDUAL_LIMIT * stiffness_norm) {
            return Err(Error::Convergence { residual: r });
        }
        residuals.push(r);
    }
    Ok(Spectrum { eigenvalues: values, eigenvectors, residuals, stiffness_norm })
}

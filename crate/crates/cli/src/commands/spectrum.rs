use std::fs::File;

use anyhow::Context;
use serde::Serialize;
use warpcone::model_fns::CurvatureDimension;
use warpcone::spectral1d::{discretize_fiber_operator, eigen, spectral_gap_bound_check};

use crate::config::{resolve, ExperimentConfig};
use crate::plot::{maybe_plot, Scale, Series};
use crate::report::Report;

/// Relative eigenpair residual accepted when no gap bound applies.
const EIGEN_TOLERANCE: f64 = 1e-8;

#[derive(Serialize)]
struct Details {
    eigenvalues: Vec<f64>,
    first_eigenvalue: Option<f64>,
    /// `κN/(N−1)`, when the gap bound applies.
    bound: Option<f64>,
    csv: Option<String>,
}

/// Eigenvalues of `−L` on `(I_K, sin_K^ν)` with fiber eigenvalue λ. With
/// `λ = 0` and `ν > 0` the first nonzero eigenvalue is checked against
/// `κN/(N−1)` for `CD(κ, N)` (default `κ = νK`, `N = ν + 1`) with relative
/// tolerance `tol`; otherwise the eigenpair residuals are checked.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let k = resolve(&mut cfg.k, 1.0);
    let nu = resolve(&mut cfg.nu, 1.0);
    let lambda = resolve(&mut cfg.lambda, 0.0);
    let n = resolve(&mut cfg.grid, 2000);
    let count = resolve(&mut cfg.count, 10).min(n);
    let op = discretize_fiber_operator(k, nu, lambda, n)?;
    let spec = eigen(&op, count)?;
    let gap_applies = lambda == 0.0 && nu > 0.0 && k > 0.0;

    let (residuals, pass, tol, bound) = if gap_applies {
        let kappa = resolve(&mut cfg.kappa, nu * k);
        let dim = resolve(&mut cfg.n, nu + 1.0);
        let tol = resolve(&mut cfg.tol, 0.01);
        let cd = CurvatureDimension::new(kappa, dim)?;
        let bound = kappa * dim / (dim - 1.0);
        let gap = spectral_gap_bound_check(&spec, cd, tol * bound)?;
        (vec![gap.relative_excess.unwrap_or(f64::NEG_INFINITY)], gap.pass, tol, Some(bound))
    } else {
        let tol = resolve(&mut cfg.tol, EIGEN_TOLERANCE);
        let rel: Vec<f64> = spec.residuals.iter().map(|r| r / spec.stiffness_norm.max(f64::MIN_POSITIVE)).collect();
        let pass = rel.iter().all(|&r| r <= tol);
        (rel, pass, tol, None)
    };

    let csv = match &cfg.out {
        Some(out) => {
            let path = out.with_extension("csv");
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            spec.write_csv(file)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let points: Vec<(f64, f64)> = spec.eigenvalues.iter().enumerate().map(|(i, &l)| (i as f64, l)).collect();
    let mut series = vec![Series::new("eigenvalues", points)];
    if let Some(b) = bound {
        series.push(Series::new("gap bound", vec![(0.0, b), ((spec.len().max(2) - 1) as f64, b)]));
    }
    maybe_plot(cfg.plot.as_deref(), "radial spectrum", ("index", "eigenvalue"), &series, Scale::Linear);

    let first = spec.first_above(1e-8);
    let check = if gap_applies { "spectral_gap" } else { "eigenpairs" };
    let mut report = Report::new(check, &cfg, &residuals, pass, tol).with_details(Details {
        eigenvalues: spec.eigenvalues.clone(),
        first_eigenvalue: first,
        bound,
        csv,
    })?;
    report.warnings = op.warnings.clone();
    Ok(report)
}

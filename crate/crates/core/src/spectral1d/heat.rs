//! Heat semigroup by spectral expansion, the Bakry–Ledoux gradient estimate
//! and the spectral-gap lower bound.

use log::warn;
use serde::Serialize;

use super::{Spectrum, SturmLiouville1D};
use crate::error::{Error, Result};
use crate::model_fns::CurvatureDimension;

/// Expansions capturing less than this share of `‖u₀‖²_M` are flagged.
pub const COVERAGE_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone)]
pub struct HeatState {
    pub values: Vec<f64>,
    /// Share of `‖u₀‖²_M` captured by the available eigenvectors.
    pub coverage: f64,
    pub warning: Option<String>,
}

fn coefficients(op: &SturmLiouville1D, spec: &Spectrum, u0: &[f64]) -> Vec<f64> {
    let mu: Vec<f64> = u0.iter().zip(op.mass()).map(|(u, m)| u * m).collect();
    (0..spec.len())
        .map(|j| spec.eigenvectors.column(j).iter().zip(&mu).map(|(v, w)| v * w).sum())
        .collect()
}

/// `P_t u₀ = Σ e^{−μ_i t} ⟨u₀, v_i⟩_M v_i`.
pub fn heat_semigroup_1d(op: &SturmLiouville1D, spec: &Spectrum, u0: &[f64], t: f64) -> Result<HeatState> {
    if u0.len() != op.len() || spec.eigenvectors.nrows() != op.len() {
        return Err(Error::InvalidInput(format!(
            "u0 has {} entries, operator has {} cells, spectrum vectors have {}",
            u0.len(),
            op.len(),
            spec.eigenvectors.nrows()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("heat time must be >= 0, got {t}")));
    }
    let c = coefficients(op, spec, u0);
    let total = op.inner(u0, u0);
    let captured: f64 = c.iter().map(|x| x * x).sum();
    let coverage = if total > 0.0 { (captured / total).min(1.0) } else { 1.0 };
    let warning = (coverage < COVERAGE_THRESHOLD).then(|| {
        let msg = format!(
            "spectral truncation: {} modes capture {:.4}% of the initial datum",
            spec.len(),
            100.0 * coverage
        );
        warn!("{msg}");
        msg
    });
    let mut values = vec![0.0; op.len()];
    for (j, (&cj, &mu)) in c.iter().zip(&spec.eigenvalues).enumerate() {
        let a = cj * (-mu * t).exp();
        if a != 0.0 {
            for (x, v) in values.iter_mut().zip(spec.eigenvectors.column(j).iter()) {
                *x += a * v;
            }
        }
    }
    Ok(HeatState { values, coverage, warning })
}

/// Squared first derivative on the cell centres: central differences inside,
/// one-sided second-order stencils on the first and last cell.
pub fn grid_gamma(op: &SturmLiouville1D, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let h = op.step();
    (0..n)
        .map(|i| {
            let d = if i == 0 {
                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
            } else {
                (u[i + 1] - u[i - 1]) / (2.0 * h)
            };
            d * d
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BakryLedouxReport {
    pub t: f64,
    pub kappa: f64,
    pub dimension: f64,
    pub min_residual: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Cell where the residual is smallest.
    pub worst_cell: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residual `e^{−2κt} P_tΓ(u) − Γ(P_t u) − (1 − e^{−2κt})/(Nκ) (L P_t u)²` on
/// the interior cells; passes when its minimum is at least `−tol`.
pub fn bakry_ledoux_check(
    op: &SturmLiouville1D,
    spec: &Spectrum,
    kappa: f64,
    dimension: f64,
    u0: &[f64],
    t: f64,
    tol: f64,
) -> Result<BakryLedouxReport> {
    if op.lambda_fiber() != 0.0 {
        return Err(Error::InvalidInput(
            "the gradient estimate needs a Markov generator (lambda = 0)".into(),
        ));
    }
    if !(dimension > 0.0) {
        return Err(Error::InvalidInput(format!("dimension must be positive, got {dimension}")));
    }
    let n = op.len();
    if n < 5 {
        return Err(Error::InvalidInput(format!("need at least 5 cells, got {n}")));
    }
    let pu = heat_semigroup_1d(op, spec, u0, t)?.values;
    let pg = heat_semigroup_1d(op, spec, &grid_gamma(op, u0), t)?.values;
    let gp = grid_gamma(op, &pu);
    let lp = op.apply_generator(&pu);
    let decay = (-2.0 * kappa * t).exp();
    let factor = if kappa == 0.0 {
        2.0 * t / dimension
    } else {
        -(-2.0 * kappa * t).exp_m1() / (dimension * kappa)
    };
    let residual: Vec<f64> = (1..n - 1)
        .map(|i| decay * pg[i] - gp[i] - factor * lp[i] * lp[i])
        .collect();
    let (worst, min) = residual
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &r)| if r < acc.1 { (i, r) } else { acc });
    let max = residual.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = residual.iter().sum::<f64>() / residual.len() as f64;
    Ok(BakryLedouxReport {
        t,
        kappa,
        dimension,
        min_residual: min,
        max_residual: max,
        mean_residual: mean,
        worst_cell: worst + 1,
        tolerance: tol,
        pass: min >= -tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub first_eigenvalue: Option<f64>,
    pub bound: f64,
    /// `(λ₁ − bound) / bound`.
    pub relative_excess: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Eigenvalues below this are treated as the constant mode.
const ZERO_MODE: f64 = 1e-8;

/// Checks `λ₁ ≥ K N / (N − 1)` with `λ₁` the first eigenvalue above zero.
pub fn spectral_gap_bound_check(spec: &Spectrum, cd: CurvatureDimension, tol: f64) -> Result<GapReport> {
    let (k, n) = (cd.curvature, cd.dimension);
    if !(k > 0.0 && n > 1.0) {
        return Err(Error::InvalidInput(format!(
            "the spectral gap bound needs K > 0 and N > 1, got ({k}, {n})"
        )));
    }
    let bound = k * n / (n - 1.0);
    let first = spec.first_above(ZERO_MODE);
    let pass = first.is_some_and(|l| l >= bound - tol);
    Ok(GapReport {
        first_eigenvalue: first,
        bound,
        relative_excess: first.map(|l| (l - bound) / bound),
        tolerance: tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral1d::{discretize_fiber_operator, eigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(nu: f64, n: usize) -> (SturmLiouville1D, Spectrum) {
        let op = discretize_fiber_operator(1.0, nu, 0.0, n).unwrap();
        let s = eigen(&op, n).unwrap();
        (op, s)
    }

    fn smooth(op: &SturmLiouville1D, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        op.nodes()
            .iter()
            .map(|r| c.iter().enumerate().map(|(k, a)| a * (k as f64 * r).cos()).sum())
            .collect()
    }

    #[test]
    fn constants_are_fixed_and_time_zero_is_identity() {
        let (op, s) = setup(2.0, 60);
        let one = vec![1.0; 60];
        let out = heat_semigroup_1d(&op, &s, &one, 3.0).unwrap();
        assert!(out.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let u = smooth(&op, 1);
        let same = heat_semigroup_1d(&op, &s, &u, 0.0).unwrap();
        for (a, b) in same.values.iter().zip(&u) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_decay_exponentially() {
        let (op, s) = setup(1.0, 80);
        let v: Vec<f64> = s.eigenvectors.column(3).iter().copied().collect();
        let out = heat_semigroup_1d(&op, &s, &v, 0.2).unwrap();
        let f = (-s.eigenvalues[3] * 0.2).exp();
        for (a, b) in out.values.iter().zip(&v) {
            assert!((a - f * b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn semigroup_law_mass_and_contraction() {
        let (op, s) = setup(2.0, 100);
        for seed in 0..5 {
            let u = smooth(&op, seed);
            let pt = heat_semigroup_1d(&op, &s, &u, 0.3).unwrap().values;
            let ps_pt = heat_semigroup_1d(&op, &s, &pt, 0.2).unwrap().values;
            let pst = heat_semigroup_1d(&op, &s, &u, 0.5).unwrap().values;
            for (a, b) in ps_pt.iter().zip(&pst) {
                assert!((a - b).abs() < 1e-8);
            }
            let m0: f64 = u.iter().zip(op.mass()).map(|(a, m)| a * m).sum();
            let m1: f64 = pst.iter().zip(op.mass()).map(|(a, m)| a * m).sum();
            assert!((m0 - m1).abs() < 1e-10);
            assert!(op.inner(&pst, &pst) <= op.inner(&u, &u) + 1e-12);
        }
    }

    #[test]
    fn truncation_is_reported() {
        let op = discretize_fiber_operator(1.0, 1.0, 0.0, 50).unwrap();
        let s = eigen(&op, 2).unwrap();
        let u: Vec<f64> = op.nodes().iter().map(|r| (5.0 * r).cos()).collect();
        let out = heat_semigroup_1d(&op, &s, &u, 0.1).unwrap();
        assert!(out.coverage < COVERAGE_THRESHOLD);
        assert!(out.warning.is_some());
    }

    #[test]
    fn bakry_ledoux_time_zero_is_exact() {
        let (op, s) = setup(1.0, 80);
        let u = smooth(&op, 3);
        let r = bakry_ledoux_check(&op, &s, 1.0, 2.0, &u, 0.0, 1e-9).unwrap();
        assert!(r.min_residual.abs() < 1e-9 && r.max_residual.abs() < 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn bakry_ledoux_model_passes_and_inflated_curvature_fails() {
        for &nd in &[1.0, 2.0] {
            let (op, s) = setup(nd, 200);
            let h = op.step();
            let mut worst_inflated = f64::INFINITY;
            for seed in 0..6 {
                let u = smooth(&op, seed);
                for &t in &[0.01, 0.1, 1.0] {
                    let r = bakry_ledoux_check(&op, &s, nd, nd + 1.0, &u, t, 10.0 * h * h + 1e-6).unwrap();
                    assert!(r.pass, "N={nd} seed={seed} t={t} min={}", r.min_residual);
                    let bad = bakry_ledoux_check(&op, &s, 2.0 * nd, nd + 1.0, &u, t, 0.0).unwrap();
                    worst_inflated = worst_inflated.min(bad.min_residual);
                }
            }
            assert!(worst_inflated < -1e-3, "N={nd}: inflated min {worst_inflated}");
        }
    }

    #[test]
    fn gap_bound_examples() {
        for &nd in &[2.0, 3.0, 5.0] {
            let op = discretize_fiber_operator(1.0, nd - 1.0, 0.0, 600).unwrap();
            let s = eigen(&op, 3).unwrap();
            let cd = CurvatureDimension::new(nd - 1.0, nd).unwrap();
            let r = spectral_gap_bound_check(&s, cd, 0.01 * nd).unwrap();
            assert!(r.pass);
            assert!(r.relative_excess.unwrap().abs() < 0.01);
            if nd < 3.0 {
                let inflated = CurvatureDimension::new(nd - 0.5, nd).unwrap();
                assert!(!spectral_gap_bound_check(&s, inflated, 0.0).unwrap().pass);
            }
        }
        let op = discretize_fiber_operator(1.0, 1.0, 0.0, 20).unwrap();
        let s = eigen(&op, 3).unwrap();
        assert!(spectral_gap_bound_check(&s, CurvatureDimension::new(0.0, 1.0).unwrap(), 0.0).is_err());
    }
}

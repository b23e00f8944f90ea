use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use warpcone::gamma::TrigPoly;
use warpcone::spectral1d::{bakry_ledoux_check, discretize_fiber_operator, eigen, heat_semigroup_1d, BakryLedouxReport};

use crate::config::{resolve, ExperimentConfig};
use crate::plot::{maybe_plot, Scale, Series};
use crate::report::Report;

#[derive(Serialize)]
struct Details {
    step: f64,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Check {
    function: usize,
    #[serde(flatten)]
    report: BakryLedouxReport,
}

/// Heat flow on `(I_K, sin_K^ν)` and the gradient estimate for `(κ, N)`
/// (default `(νK, ν+1)`) over `--pairs` seeded smooth functions and `--times`.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let k = resolve(&mut cfg.k, 1.0);
    let nu = resolve(&mut cfg.nu, 1.0);
    let n = resolve(&mut cfg.grid, 200);
    let kappa = resolve(&mut cfg.kappa, nu * k);
    let dim = resolve(&mut cfg.n, nu + 1.0);
    let times = resolve(&mut cfg.times, vec![0.01, 0.1, 1.0]);
    let count = resolve(&mut cfg.pairs, 20);
    let seed = resolve(&mut cfg.seed, 0);
    let op = discretize_fiber_operator(k, nu, 0.0, n)?;
    let h = op.step();
    let tol = resolve(&mut cfg.tol, 10.0 * h * h + 1e-6);
    if times.is_empty() {
        anyhow::bail!("no heat-flow times given");
    }
    let spec = eigen(&op, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = k.sqrt();
    let functions: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            let p = TrigPoly::random(&mut rng, 5, omega, 2);
            op.nodes().iter().map(|&r| p.value(r)).collect()
        })
        .collect();
    let checks: Vec<Vec<Check>> = functions
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let reps = times
                .iter()
                .map(|&t| bakry_ledoux_check(&op, &spec, kappa, dim, u, t, tol).map(|report| Check { function: i, report }))
                .collect::<warpcone::error::Result<Vec<_>>>()?;
            info!("function {i}: min residual {:.3e}", reps.iter().map(|c| c.report.min_residual).fold(f64::INFINITY, f64::min));
            Ok(reps)
        })
        .collect::<anyhow::Result<_>>()?;
    let checks: Vec<Check> = checks.into_iter().flatten().collect();
    let residuals: Vec<f64> = checks.iter().map(|c| c.report.min_residual).collect();
    let pass = checks.iter().all(|c| c.report.pass);

    let mut warnings = Vec::new();
    if let Some(u) = functions.first() {
        let mut series = vec![Series::new("u", op.nodes().iter().copied().zip(u.iter().copied()).collect())];
        for &t in &times {
            let state = heat_semigroup_1d(&op, &spec, u, t)?;
            warnings.extend(state.warning.clone());
            series.push(Series::new(format!("P_t u, t = {t}"), op.nodes().iter().copied().zip(state.values).collect()));
        }
        maybe_plot(cfg.plot.as_deref(), "heat flow", ("r", "value"), &series, Scale::Linear);
    }
    let mut report = Report::new("bakry_ledoux", &cfg, &residuals, pass, tol).with_details(Details { step: h, checks })?;
    report.warnings = op.warnings.iter().cloned().chain(warnings).collect();
    Ok(report)
}

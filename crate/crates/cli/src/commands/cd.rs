use std::path::Path;

use anyhow::{bail, Context};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use warpcone::mms::{interval_model_mms, FiniteMMS};
use warpcone::model_fns::CurvatureDimension;
use warpcone::transport::{cd_check, cd_star_check, CDReport, Density, DensityFile};

use super::resolution;
use crate::config::{resolve, ExperimentConfig};
use crate::plot::{maybe_plot, Scale, Series};
use crate::report::Report;

#[derive(Serialize)]
struct Details {
    atoms: usize,
    resolution: f64,
    eps: f64,
    nprimes: Vec<f64>,
    checks: Vec<PairResult>,
}

#[derive(Serialize)]
struct PairResult {
    pair: usize,
    #[serde(flatten)]
    report: CDReport,
}

/// A mixture of one or two Gaussian bumps around random atoms.
fn bump_density(space: &FiniteMMS, rng: &mut ChaCha8Rng) -> anyhow::Result<Density> {
    let n = space.len();
    let diam = space.diameter();
    let bumps: Vec<(usize, f64, f64)> = (0..rng.random_range(1..=2))
        .map(|_| (rng.random_range(0..n), rng.random_range(0.05..0.15) * diam, rng.random_range(0.5..1.5)))
        .collect();
    Ok(Density::from_profile(space, |i| {
        bumps.iter().map(|&(c, w, a)| a * (-(space.dist(i, c) / w).powi(2)).exp()).sum()
    })?)
}

fn load_pair(first: &Path, second: &Path) -> anyhow::Result<(FiniteMMS, Density, Density)> {
    let (space, mu0) = DensityFile::load(first).with_context(|| format!("loading {}", first.display()))?;
    let (other, mu1) = DensityFile::load(second).with_context(|| format!("loading {}", second.display()))?;
    if space != other {
        bail!("{} and {} live on different spaces", first.display(), second.display());
    }
    Ok((space, mu0, mu1))
}

/// Midpoint CD* (`--variant star`, default) or CD (`--variant full`) for
/// `(κ, N)` at `N′ ∈ {N, 2N}`: on two `--input` density files, or on
/// `--pairs` seeded bump pairs over the model interval `(I_K, sin_K^ν)`.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let k = resolve(&mut cfg.k, 1.0);
    let nu = resolve(&mut cfg.nu, 2.0);
    let kappa = resolve(&mut cfg.kappa, nu * k);
    let dim = resolve(&mut cfg.n, nu + 1.0);
    let full = match resolve(&mut cfg.variant, "star".to_string()).as_str() {
        "star" => false,
        "full" => true,
        other => bail!("unknown cd-check variant {other:?}; expected star or full"),
    };
    let bound = CurvatureDimension::new(kappa, dim)?;

    let (space, pairs) = match cfg.input.as_slice() {
        [] => {
            let grid = resolve(&mut cfg.grid, 400);
            let count = resolve(&mut cfg.pairs, 20);
            let seed = resolve(&mut cfg.seed, 0);
            let space = interval_model_mms(k, nu, grid)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = (0..count)
                .map(|_| Ok((bump_density(&space, &mut rng)?, bump_density(&space, &mut rng)?)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            (space, pairs)
        }
        [a, b] => {
            let (space, mu0, mu1) = load_pair(a, b)?;
            (space, vec![(mu0, mu1)])
        }
        other => bail!("cd-check takes two density files or none, got {}", other.len()),
    };

    let h = resolution(&space);
    let eps = resolve(&mut cfg.eps, 2.0 * h);
    let tol = resolve(&mut cfg.tol, 5.0 * (h + eps));
    let nprimes = vec![dim, 2.0 * dim];
    let check = if full { cd_check } else { cd_star_check };
    let results: Vec<Vec<CDReport>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (mu0, mu1))| {
            let reps = nprimes
                .iter()
                .map(|&np| check(&space, mu0, mu1, bound, np, eps, tol))
                .collect::<warpcone::error::Result<Vec<_>>>()?;
            let worst = reps.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
            info!("pair {i}: min slack {worst:.3e}");
            Ok(reps)
        })
        .collect::<anyhow::Result<_>>()?;

    let checks: Vec<PairResult> = results
        .into_iter()
        .enumerate()
        .flat_map(|(pair, reps)| reps.into_iter().map(move |report| PairResult { pair, report }))
        .collect();
    let slacks: Vec<f64> = checks.iter().map(|c| c.report.slack).collect();
    let pass = checks.iter().all(|c| c.report.pass);
    let series: Vec<Series> = nprimes
        .iter()
        .map(|&np| {
            let pts = checks
                .iter()
                .filter(|c| c.report.nprime == np)
                .map(|c| (c.pair as f64, c.report.slack))
                .filter(|p| p.1.is_finite())
                .collect();
            Series::new(format!("N' = {np}"), pts)
        })
        .collect();
    maybe_plot(cfg.plot.as_deref(), "midpoint inequality slack", ("pair", "slack"), &series, Scale::Linear);

    let name = if full { "cd" } else { "cd_star" };
    Report::new(name, &cfg, &slacks, pass, tol).with_details(Details {
        atoms: space.len(),
        resolution: h,
        eps,
        nprimes,
        checks,
    })
}

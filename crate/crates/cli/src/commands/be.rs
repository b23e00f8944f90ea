use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use warpcone::gamma::{
    be_check, equality_member, random_family, sharp_gamma2_estimate_check, BeReport, BeStrategy, Dimension,
    EstimateReport, WeightedGraph,
};
use warpcone::model_fns::CurvatureDimension;

use super::warped_setup;
use crate::config::{resolve, ExperimentConfig};
use crate::plot::{maybe_plot, Scale, Series};
use crate::report::Report;

/// Default tolerance constant of the sharp estimate, `SHARP_C · h² + 1e−6`.
const SHARP_C: f64 = 50.0;

/// `{"measure": [...], "edges": [[x, y, w], ...]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    measure: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

fn load_graph(path: &Path) -> anyhow::Result<WeightedGraph> {
    let file = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
    let g: GraphFile = serde_json::from_reader(file).with_context(|| format!("reading graph {}", path.display()))?;
    Ok(WeightedGraph::new(g.measure, &g.edges)?)
}

#[derive(Serialize)]
struct ConeDetails {
    base_step: f64,
    /// Member 0 is the equality family `sin_K ⊗ φ`.
    members: Vec<EstimateReport>,
}

/// `BE(κ, N)` on an `--input` graph (sampled or exhaustive), or the sharp
/// estimate `BE(νK, ν+1)` for a seeded family on the `(K, ν)` warped cone.
pub fn run(cfg: ExperimentConfig) -> anyhow::Result<Report> {
    match cfg.input.clone().as_slice() {
        [path] => graph(cfg, path),
        [] => warped(cfg),
        other => bail!("be-check takes one graph file or none, got {}", other.len()),
    }
}

fn graph(mut cfg: ExperimentConfig, path: &Path) -> anyhow::Result<Report> {
    let g = load_graph(path)?;
    let kappa = resolve(&mut cfg.kappa, 0.0);
    let dim = match cfg.n {
        Some(n) => Dimension::Finite(n),
        None => Dimension::Infinite,
    };
    let tol = resolve(&mut cfg.tol, 1e-9);
    let strategy = match resolve(&mut cfg.variant, "sampled".to_string()).as_str() {
        "sampled" => BeStrategy::Sampled { count: resolve(&mut cfg.pairs, 100), seed: resolve(&mut cfg.seed, 0) },
        "exhaustive" => BeStrategy::ExhaustiveLocal,
        other => bail!("unknown be-check variant {other:?}; expected sampled or exhaustive"),
    };
    let rep: BeReport = be_check(&g, kappa, dim, &strategy, tol)?;
    info!("{} functions evaluated, min slack {:.3e}", rep.evaluated, rep.min_slack);
    Report::new("be_graph", &cfg, &[rep.min_slack], rep.pass, tol).with_details(&rep)
}

fn warped(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let k = resolve(&mut cfg.k, 1.0);
    let nu = resolve(&mut cfg.nu, 2.0);
    let cells = resolve(&mut cfg.grid, 80);
    let count = resolve(&mut cfg.pairs, 20);
    let seed = resolve(&mut cfg.seed, 0);
    let (cone, window) = warped_setup(k, nu, cells)?;
    let sharp = cone.sharp_bound();
    let kappa = resolve(&mut cfg.kappa, sharp.curvature);
    let dim = resolve(&mut cfg.n, sharp.dimension);
    let bound = CurvatureDimension::new(kappa, dim)?;
    let h = window.base_step();
    let tol = resolve(&mut cfg.tol, SHARP_C * h * h + 1e-6);

    let mut family = vec![equality_member(&cone)];
    family.extend(random_family(&cone, count, 1, 4, seed));
    let members: Vec<EstimateReport> = family
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let rep = sharp_gamma2_estimate_check(&cone, &window, std::slice::from_ref(u), &bound, tol)?;
            info!("member {i}: min slack {:.3e}", rep.min_slack);
            Ok(rep)
        })
        .collect::<anyhow::Result<_>>()?;
    let slacks: Vec<f64> = members.iter().map(|m| m.min_slack).collect();
    let pass = members.iter().all(|m| m.pass);
    let pts = slacks.iter().enumerate().map(|(i, &s)| (i as f64, s)).collect();
    maybe_plot(cfg.plot.as_deref(), "Bochner slack per member", ("member", "min slack"), &[Series::new("slack", pts)], Scale::Linear);
    Report::new("be_warped_cone", &cfg, &slacks, pass, tol).with_details(ConeDetails { base_step: h, members })
}

use serde::Serialize;
use warpcone::mms::{circle_mms, cone, suspension_check, FiniteMMS, RadialGrid, SuspensionReport};

use super::{load_space, resolution};
use crate::config::{resolve, ExperimentConfig};
use crate::report::Report;

#[derive(Serialize)]
struct Details {
    atoms: usize,
    #[serde(flatten)]
    report: SuspensionReport,
}

/// The lexicographically first pair at maximal distance, up to roundoff.
fn far_pair(space: &FiniteMMS) -> (usize, usize) {
    let diam = space.diameter();
    let slack = 1e-9 * diam.max(1.0);
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            if space.dist(x, y) >= diam - slack {
                return (x, y);
            }
        }
    }
    (0, 0)
}

/// Suspension recognition on the `--input` space (default: the `(1, 1)`-cone
/// over a 200-atom unit circle) with poles at a diametral pair.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let exponent = resolve(&mut cfg.n, 1.0);
    let space = match cfg.input.first() {
        Some(path) => load_space(path)?,
        None => {
            let cells = resolve(&mut cfg.grid, 15);
            cone(&circle_mms(200, 1.0)?, 1.0, exponent, &RadialGrid::model(1.0, exponent, cells)?)?
        }
    };
    if space.len() < 2 {
        anyhow::bail!("suspension check needs at least two atoms");
    }
    let tol = resolve(&mut cfg.tol, 2.0 * resolution(&space));
    let (x, y) = far_pair(&space);
    let report = suspension_check(&space, x, y, exponent, tol);
    let residual = if report.max_residual.is_nan() { f64::INFINITY } else { report.max_residual };
    Report::new("suspension", &cfg, &[residual], report.is_suspension, tol)
        .with_details(Details { atoms: space.len(), report })
}

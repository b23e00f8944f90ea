use log::info;
use rayon::prelude::*;
use serde::Serialize;
use warpcone::gamma::{random_family, warped_gamma2_identity_check, IdentityReport};

use super::warped_setup;
use crate::config::{resolve, ExperimentConfig};
use crate::plot::{maybe_plot, Scale, Series};
use crate::report::Report;

/// Accepted window for the observed order under `h → h/2`.
const ORDER_WINDOW: (f64, f64) = (1.7, 2.3);

#[derive(Serialize)]
struct Details {
    order_window: (f64, f64),
    members: Vec<IdentityReport>,
}

/// Compares finite-difference `Γ₂(u₁⊗u₂)` on the `(K, ν)` cone with the
/// product formula for `--pairs` seeded factor pairs at `--grid` cells and
/// twice that; passes when every fine residual is within `tol` (default
/// `500 h²`) and every order lies in the window.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let k = resolve(&mut cfg.k, 1.0);
    let nu = resolve(&mut cfg.nu, 2.0);
    let cells = resolve(&mut cfg.grid, 40);
    let count = resolve(&mut cfg.pairs, 10);
    let seed = resolve(&mut cfg.seed, 0);
    let (cone, window) = warped_setup(k, nu, cells)?;
    let h = window.refined().base_step();
    let tol = resolve(&mut cfg.tol, 500.0 * h * h);
    let family = random_family(&cone, count, 1, 4, seed);
    let members: Vec<IdentityReport> = family
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let (u1, u2) = &u.terms[0];
            let rep = warped_gamma2_identity_check(&cone, &window, u1, u2)?;
            info!("member {i}: residuals {:.3e} → {:.3e}, order {:.3}", rep.residuals[0], rep.residuals[1], rep.order);
            Ok(rep)
        })
        .collect::<anyhow::Result<_>>()?;
    let residuals: Vec<f64> = members.iter().map(|m| m.residuals[1]).collect();
    let pass = members
        .iter()
        .all(|m| m.residuals[1] <= tol && (ORDER_WINDOW.0..=ORDER_WINDOW.1).contains(&m.order));
    let series: Vec<Series> = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let pts = m.base_steps.iter().copied().zip(m.residuals.iter().copied()).collect();
            Series::new(format!("member {i}"), pts)
        })
        .collect();
    maybe_plot(cfg.plot.as_deref(), "identity residual vs step", ("h", "max residual"), &series, Scale::LogLog);
    Report::new("gamma2_identity", &cfg, &residuals, pass, tol).with_details(Details { order_window: ORDER_WINDOW, members })
}

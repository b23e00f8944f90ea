use serde::Serialize;
use warpcone::spectral1d::{essential_self_adjointness, weyl_classify, Endpoint, WeylClassification, LIMIT_POINT_THRESHOLD};

use crate::config::{resolve, ExperimentConfig};
use crate::report::Report;

/// Representatives of the three cases: `ν ≥ 3, λ = 0`; `1 ≤ ν < 3, λ = 0`;
/// `λ ≥ ν ≥ 1`.
const DEFAULT_TABLE: [(f64, f64); 9] =
    [(3.0, 0.0), (4.0, 0.0), (6.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.5, 0.0), (1.0, 1.0), (2.0, 2.0), (1.5, 4.0)];

#[derive(Serialize)]
struct Row {
    nu: f64,
    lambda: f64,
    left: WeylClassification,
    right: WeylClassification,
    essentially_self_adjoint: bool,
    /// What the case table predicts, when `(ν, λ)` falls in one of its cases.
    expected: Option<bool>,
}

fn expected(nu: f64, lambda: f64) -> Option<bool> {
    if (nu >= 1.0 && lambda >= nu) || (lambda == 0.0 && nu >= 3.0) {
        Some(true)
    } else if lambda == 0.0 && (1.0..3.0).contains(&nu) {
        Some(false)
    } else {
        None
    }
}

/// Endpoint classification for one `(ν, λ)` (both flags given) or the
/// default table; fails when a row contradicts its case.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<Report> {
    let k = resolve(&mut cfg.k, 1.0);
    let rows: Vec<(f64, f64)> = match (cfg.nu, cfg.lambda) {
        (Some(nu), Some(lambda)) => vec![(nu, lambda)],
        (Some(nu), None) => vec![(nu, resolve(&mut cfg.lambda, 0.0))],
        (None, Some(lambda)) => anyhow::bail!("--lambda {lambda} needs --nu"),
        (None, None) => DEFAULT_TABLE.to_vec(),
    };
    if let Some(&(nu, lambda)) = rows.iter().find(|(nu, l)| !(*nu >= 0.0) || !(*l >= 0.0)) {
        anyhow::bail!("need nu >= 0 and lambda >= 0, got ({nu}, {lambda})");
    }
    let rows: Vec<Row> = rows
        .into_iter()
        .map(|(nu, lambda)| Row {
            nu,
            lambda,
            left: weyl_classify(k, nu, lambda, Endpoint::Left),
            right: weyl_classify(k, nu, lambda, Endpoint::Right),
            essentially_self_adjoint: essential_self_adjointness(nu, lambda),
            expected: expected(nu, lambda),
        })
        .collect();
    let margins: Vec<f64> = rows.iter().map(|r| r.left.coefficient - LIMIT_POINT_THRESHOLD).collect();
    let pass = rows.iter().all(|r| r.expected.is_none_or(|e| e == r.essentially_self_adjoint));
    Report::new("weyl", &cfg, &margins, pass, 0.0).with_details(rows)
}

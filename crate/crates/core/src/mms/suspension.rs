use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::FiniteMMS;

/// Outcome of [`suspension_check`].
#[derive(Debug, Clone, Serialize)]
pub struct SuspensionReport {
    pub is_suspension: bool,
    /// Recovered cross-section with its normalized weights.
    #[serde(skip)]
    pub equator: Option<FiniteMMS>,
    /// Indices in the input space of the equator atoms.
    pub equator_atoms: Vec<usize>,
    pub poles: (usize, usize),
    pub max_residual: f64,
    /// Stage that failed, if any.
    pub failed_stage: Option<String>,
}

impl SuspensionReport {
    fn fail(poles: (usize, usize), stage: String, residual: f64) -> Self {
        Self {
            is_suspension: false,
            equator: None,
            equator_atoms: Vec::new(),
            poles,
            max_residual: residual,
            failed_stage: Some(stage),
        }
    }
}

/// `∫₀^π sin^N θ dθ`.
fn sine_power_integral(exponent: f64) -> f64 {
    PI.sqrt() * (ln_gamma(0.5 * (exponent + 1.0)) - ln_gamma(0.5 * exponent + 1.0)).exp()
}

/// Tests whether `m` splits as the spherical suspension `[0,π] ×_sin^N F′`
/// with poles `x`, `y`.
///
/// 1. every atom lies on a geodesic between the poles;
/// 2. the equator is the level set of `d(x, ·)` nearest to `π/2`;
/// 3. each atom projects to its nearest equator atom, and every pair must
///    satisfy the spherical law of cosines with the equator distance.
///
/// Geometric failures are reported, never raised.
pub fn suspension_check(
    m: &FiniteMMS,
    x: usize,
    y: usize,
    exponent: f64,
    tol: f64,
) -> SuspensionReport {
    let poles = (x, y);
    let n = m.len();
    if x >= n || y >= n {
        return SuspensionReport::fail(poles, format!("pole index out of range for {n} atoms"), f64::NAN);
    }
    let span = (m.dist(x, y) - PI).abs();
    if span > tol {
        return SuspensionReport::fail(
            poles,
            format!("poles: d(x,y) = {} is not π", m.dist(x, y)),
            span,
        );
    }

    let theta: Vec<f64> = (0..n).map(|p| m.dist(x, p)).collect();
    let stage1 = theta
        .iter()
        .enumerate()
        .map(|(p, t)| (t + m.dist(p, y) - PI).abs())
        .fold(0.0f64, f64::max);
    if stage1 > tol {
        return SuspensionReport::fail(
            poles,
            format!("stage 1: some atom is off every pole-to-pole geodesic (gap {stage1:e})"),
            stage1,
        );
    }

    let interior: Vec<usize> = (0..n)
        .filter(|&p| theta[p] > tol && theta[p] < PI - tol)
        .collect();
    if interior.is_empty() {
        // only the two poles survive: F is two points at distance π
        let residual = (0..n)
            .flat_map(|p| (0..n).map(move |q| (p, q)))
            .map(|(p, q)| (m.dist(p, q).cos() - theta[p].cos() * theta[q].cos()).abs())
            .fold(0.0, f64::max);
        return SuspensionReport {
            is_suspension: residual <= tol,
            equator: None,
            equator_atoms: Vec::new(),
            poles,
            max_residual: residual,
            failed_stage: (residual > tol).then(|| "stage 4: law of cosines".to_string()),
        };
    }

    let nearest = interior
        .iter()
        .map(|&p| (theta[p] - 0.5 * PI).abs())
        .fold(f64::INFINITY, f64::min);
    if nearest > tol {
        return SuspensionReport::fail(
            poles,
            format!("stage 2: no atom within {tol} of the equator (closest {nearest:e})"),
            nearest,
        );
    }
    let level_tol = 1e-9 * PI;
    let equator: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|&p| (theta[p] - 0.5 * PI).abs() <= nearest + level_tol)
        .collect();

    // equator distance from cos d = cos²θ* + sin²θ* cos d′, exact when the
    // level sits at π/2 and first order otherwise
    let ne = equator.len();
    let level = equator.iter().map(|&e| theta[e]).sum::<f64>() / ne as f64;
    let (c2, s2) = (level.cos().powi(2), level.sin().powi(2));
    let mut fiber_dist = vec![0.0; ne * ne];
    for a in 0..ne {
        for b in 0..ne {
            if a != b {
                let cd = (m.dist(equator[a], equator[b]).cos() - c2) / s2;
                fiber_dist[a * ne + b] = cd.clamp(-1.0, 1.0).acos();
            }
        }
    }

    // projection: nearest equator atom along the meridian, ties to the
    // smallest index
    let proj: Vec<usize> = (0..n)
        .map(|p| {
            let along = (theta[p] - 0.5 * PI).abs();
            let mut best = (f64::INFINITY, 0usize);
            for (a, &e) in equator.iter().enumerate() {
                let gap = (m.dist(p, e) - along).abs();
                if gap < best.0 {
                    best = (gap, a);
                }
            }
            best.1
        })
        .collect();

    let residual = (0..n)
        .map(|p| {
            let (cp, sp) = (theta[p].cos(), theta[p].sin());
            let mut worst = 0.0f64;
            for q in 0..n {
                let (cq, sq) = (theta[q].cos(), theta[q].sin());
                let model = cp * cq + sp * sq * fiber_dist[proj[p] * ne + proj[q]].cos();
                worst = worst.max((m.dist(p, q).cos() - model).abs());
            }
            worst
        })
        .fold(0.0, f64::max);

    let mut mass = vec![0.0; ne];
    for p in (0..n).filter(|&p| p != x && p != y) {
        mass[proj[p]] += m.weight(p);
    }
    let norm = sine_power_integral(exponent);
    mass.iter_mut().for_each(|w| *w /= norm);

    let labels = equator.iter().map(|&e| m.labels()[e].clone()).collect();
    let recovered = FiniteMMS::from_flat(labels, fiber_dist, mass).ok();
    let ok = residual <= tol;
    SuspensionReport {
        is_suspension: ok,
        equator: recovered,
        equator_atoms: equator,
        poles,
        max_residual: residual,
        failed_stage: (!ok).then(|| format!("stage 4: law of cosines residual {residual:e}")),
    }
}

//! Liouville transform of the weighted operator to Schrödinger form and the
//! Weyl limit-point / limit-circle classification of its endpoints.

use serde::Serialize;

use crate::model_fns::{cos_k, sin_k};

/// An endpoint coefficient at or above this value is in the limit-point case.
pub const LIMIT_POINT_THRESHOLD: f64 = 0.75;

/// The potential `V` of `−d²/dr² + V`, unitarily equivalent to `−L` through
/// `u = sin_K^{−ν/2} w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchrodingerPotential {
    pub curvature: f64,
    pub nu: f64,
    pub lambda_fiber: f64,
}

pub fn schrodinger_transform(k: f64, nu: f64, lambda_fiber: f64) -> SchrodingerPotential {
    SchrodingerPotential { curvature: k, nu, lambda_fiber }
}

impl SchrodingerPotential {
    /// `V(r) = ((ν²/4) cos_K² − ν/2 + λ) / sin_K²`.
    pub fn value(&self, r: f64) -> f64 {
        let s = sin_k(self.curvature, r).unwrap_or(f64::NAN);
        let c = cos_k(self.curvature, r);
        (0.25 * self.nu * self.nu * c * c - 0.5 * self.nu + self.lambda_fiber) / (s * s)
    }

    /// `c₀` in `V(r) ~ c₀ / (r − r₀)²` at a finite endpoint.
    pub fn endpoint_coefficient(&self) -> f64 {
        0.25 * self.nu * (self.nu - 2.0) + self.lambda_fiber
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeylKind {
    LimitPoint,
    LimitCircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylClassification {
    pub endpoint: Endpoint,
    pub kind: WeylKind,
    pub coefficient: f64,
}

/// Classifies one endpoint of the model interval. For `K <= 0` the right end
/// sits at infinity, where the potential is bounded below and the operator is
/// always limit point.
pub fn weyl_classify(k: f64, nu: f64, lambda_fiber: f64, endpoint: Endpoint) -> WeylClassification {
    let coefficient = schrodinger_transform(k, nu, lambda_fiber).endpoint_coefficient();
    let kind = if (endpoint == Endpoint::Right && k <= 0.0) || coefficient >= LIMIT_POINT_THRESHOLD {
        WeylKind::LimitPoint
    } else {
        WeylKind::LimitCircle
    };
    WeylClassification { endpoint, kind, coefficient }
}

/// Essential self-adjointness on compactly supported smooth functions: both
/// endpoints limit point. The answer does not depend on `K`.
pub fn essential_self_adjointness(nu: f64, lambda_fiber: f64) -> bool {
    [Endpoint::Left, Endpoint::Right]
        .iter()
        .all(|&e| weyl_classify(1.0, nu, lambda_fiber, e).kind == WeylKind::LimitPoint)
}

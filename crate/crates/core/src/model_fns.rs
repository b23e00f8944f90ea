//! Closed-form model functions: `sin_K`, `cos_K`, the volume distortion
//! coefficients σ and τ, the dimension-splitting identity and the
//! Bonnet–Myers diameter bound.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature / dimension pair `(K, N)` threaded through every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureDimension {
    pub curvature: f64,
    pub dimension: f64,
}

impl CurvatureDimension {
    /// Parameters for a CD / BE check; rejects `N < 1`.
    pub fn new(curvature: f64, dimension: f64) -> Result<Self> {
        if !curvature.is_finite() || !dimension.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite (K, N) = ({curvature}, {dimension})"
            )));
        }
        if dimension < 1.0 {
            return Err(Error::InvalidInput(format!(
                "dimension N = {dimension} < 1 is not admissible for a curvature-dimension check"
            )));
        }
        Ok(Self { curvature, dimension })
    }

    /// Cone exponents may go down to `N = 0`.
    pub fn cone_exponent(curvature: f64, dimension: f64) -> Result<Self> {
        if !curvature.is_finite() || !dimension.is_finite() || dimension < 0.0 {
            return Err(Error::InvalidInput(format!(
                "cone exponent requires finite K and N >= 0, got ({curvature}, {dimension})"
            )));
        }
        Ok(Self { curvature, dimension })
    }
}

/// A nonnegative real or the distinguished value `Infinity`.
///
/// Infinity never enters floating-point arithmetic; callers branch on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedValue {
    Finite(f64),
    Infinity,
}

impl ExtendedValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedValue::Finite(v) => Some(v),
            ExtendedValue::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedValue::Infinity)
    }
}

impl PartialOrd for ExtendedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtendedValue::Infinity, ExtendedValue::Infinity) => Some(Ordering::Equal),
            (ExtendedValue::Infinity, ExtendedValue::Finite(_)) => Some(Ordering::Greater),
            (ExtendedValue::Finite(_), ExtendedValue::Infinity) => Some(Ordering::Less),
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Finite(v) => write!(f, "{v}"),
            ExtendedValue::Infinity => write!(f, "inf"),
        }
    }
}

/// `sin_K(t)`: the solution of `f'' = -K f`, `f(0) = 0`, `f'(0) = 1`.
pub fn sin_k(k: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("sin_K requires t >= 0, got {t}")));
    }
    if k > 0.0 {
        let s = k.sqrt();
        let end = PI / s;
        if t > end * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "sin_K with K = {k} is defined on [0, {end}], got t = {t}"
            )));
        }
        Ok((s * t).sin() / s)
    } else if k < 0.0 {
        let s = (-k).sqrt();
        Ok((s * t).sinh() / s)
    } else {
        Ok(t)
    }
}

/// `cos_K(t)`, the derivative of `sin_K`.
pub fn cos_k(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * t).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * t).cosh()
    } else {
        1.0
    }
}

/// Volume distortion coefficient σ^{(t)}_{K,N}(θ).
pub fn sigma_coeff(cd: CurvatureDimension, t: f64, theta: f64) -> ExtendedValue {
    sigma_raw(cd.curvature, cd.dimension, t, theta)
}

const SIGMA_LIMIT_BAND: f64 = 1e-8;
const SIGMA_TAYLOR_BAND: f64 = 1e-4;

// N > 0 is all that σ needs; τ calls it with N - 1 which may lie in (0, 1).
fn sigma_raw(k: f64, n: f64, t: f64, theta: f64) -> ExtendedValue {
    assert!((0.0..=1.0).contains(&t), "σ needs t in [0, 1], got {t}");
    assert!(theta >= 0.0, "σ needs θ >= 0, got {theta}");
    assert!(n > 0.0, "σ needs N > 0, got {n}");
    if k == 0.0 || theta == 0.0 {
        return ExtendedValue::Finite(t);
    }
    let x = (k.abs() / n).sqrt() * theta;
    if k > 0.0 && x >= PI {
        return ExtendedValue::Infinity;
    }
    if x < SIGMA_LIMIT_BAND {
        return ExtendedValue::Finite(t);
    }
    if x <= SIGMA_TAYLOR_BAND {
        // sin(xt)/sin(x) = t [1 + (1-t²)x²/6 + (7-10t²+3t⁴)x⁴/360 + O(x⁶)];
        // the sinh ratio flips the sign of x².
        let t2 = t * t;
        let x2 = if k > 0.0 { x * x } else { -x * x };
        let c1 = (1.0 - t2) / 6.0;
        let c2 = (7.0 - 10.0 * t2 + 3.0 * t2 * t2) / 360.0;
        return ExtendedValue::Finite(t * (1.0 + c1 * x2 + c2 * x2 * x2));
    }
    if k > 0.0 {
        ExtendedValue::Finite((x * t).sin() / x.sin())
    } else {
        ExtendedValue::Finite((x * t).sinh() / x.sinh())
    }
}

/// Distortion coefficient τ^{(t)}_{K,N}(θ) of the (non-reduced) CD condition.
pub fn tau_coeff(cd: CurvatureDimension, t: f64, theta: f64) -> ExtendedValue {
    let (k, n) = (cd.curvature, cd.dimension);
    assert!(n >= 1.0, "τ needs N >= 1, got {n}");
    if k * theta * theta > (n - 1.0) * PI * PI {
        return ExtendedValue::Infinity;
    }
    if n == 1.0 {
        return ExtendedValue::Finite(t);
    }
    match sigma_raw(k, n - 1.0, t, theta) {
        ExtendedValue::Infinity => ExtendedValue::Infinity,
        ExtendedValue::Finite(s) => {
            ExtendedValue::Finite(t.powf(1.0 / n) * s.powf(1.0 - 1.0 / n))
        }
    }
}

/// Both sides of `a²/d + b²/N = (a+b)²/(N+d) + d/((N+d)N)·(b - (N/d)a)²`.
pub fn dimension_split(a: f64, b: f64, d: f64, n: f64) -> (f64, f64) {
    let lhs = a * a / d + b * b / n;
    let c = b - n / d * a;
    let rhs = (a + b) * (a + b) / (n + d) + d / ((n + d) * n) * c * c;
    (lhs, rhs)
}

/// Diameter bound `π √((N-1)/K)` implied by MCP(K, N).
pub fn bonnet_myers_bound(cd: CurvatureDimension) -> ExtendedValue {
    let (k, n) = (cd.curvature, cd.dimension);
    if k <= 0.0 {
        ExtendedValue::Infinity
    } else if n <= 1.0 {
        // only a single point satisfies MCP(K, 1) with K > 0
        ExtendedValue::Finite(0.0)
    } else {
        ExtendedValue::Finite(PI * ((n - 1.0) / k).sqrt())
    }
}

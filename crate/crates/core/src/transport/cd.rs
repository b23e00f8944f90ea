//! Midpoint (t = 1/2) forms of the CD*, CD and MCP inequalities.

use serde::{Serialize, Serializer};

use super::{wasserstein2, Coupling, Density};
use crate::error::{Error, Result};
use crate::mms::FiniteMMS;
use crate::model_fns::{sigma_coeff, tau_coeff, CurvatureDimension, ExtendedValue};

fn signed_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("infinity")
    } else {
        s.serialize_str("-infinity")
    }
}

/// Where mass landing on a zero-weight atom goes: the nearest positive-weight
/// candidate, else the nearest positive-weight atom anywhere; ties by index.
fn reroute(space: &FiniteMMS, k: usize, candidates: &[usize]) -> Result<usize> {
    let nearest = |pool: &mut dyn Iterator<Item = usize>| {
        pool.filter(|&c| space.weight(c) > 0.0)
            .min_by(|&a, &b| space.dist(k, a).total_cmp(&space.dist(k, b)).then(a.cmp(&b)))
    };
    nearest(&mut candidates.iter().copied())
        .or_else(|| nearest(&mut (0..space.len())))
        .ok_or_else(|| Error::InvalidInput("space has no positive-weight atom".into()))
}

/// Spreads `amount` evenly over the ε-midpoints of `(i, j)` into `out`.
fn spread(space: &FiniteMMS, i: usize, j: usize, amount: f64, eps: f64, out: &mut [f64]) -> Result<()> {
    let mids = space.midpoints(i, j, eps);
    if mids.is_empty() {
        return Err(Error::NoMidpoint { from: i, to: j, eps });
    }
    let share = amount / mids.len() as f64;
    for &k in &mids {
        let target = if space.weight(k) > 0.0 { k } else { reroute(space, k, &mids)? };
        out[target] += share;
    }
    Ok(())
}

/// The `t = 1/2` displacement interpolant: each transported pair splits its
/// mass evenly over its ε-midpoints.
pub fn displacement_midpoint(space: &FiniteMMS, q: &Coupling, eps: f64) -> Result<Density> {
    let mut out = vec![0.0; space.len()];
    for &(i, j, x) in q.entries() {
        if x > 0.0 {
            spread(space, i, j, x, eps, &mut out)?;
        }
    }
    let total: f64 = out.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("empty coupling".into()));
    }
    Density::new(space, out.into_iter().map(|m| m / total).collect())
}

/// `Σ_{ρ_i > 0} ρ_i^{−1/N′} mass_i`; `N′ = ∞` gives the total mass.
pub fn renyi_entropy(space: &FiniteMMS, mu: &Density, nprime: f64) -> f64 {
    assert!(nprime >= 1.0, "Rényi exponent needs N' >= 1, got {nprime}");
    let e = if nprime.is_infinite() { 0.0 } else { -1.0 / nprime };
    mu.support().into_iter().map(|i| mu.density(space, i).powf(e) * mu.mass()[i]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    /// σ, the reduced condition CD*.
    Sigma,
    /// τ, the full condition CD.
    Tau,
}

#[derive(Debug, Clone, Serialize)]
pub struct CDReport {
    pub coefficient: Coefficient,
    pub t: f64,
    pub curvature: f64,
    pub dimension: f64,
    pub nprime: f64,
    pub lhs: f64,
    pub rhs: ExtendedValue,
    #[serde(serialize_with = "signed_extended")]
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub w2: f64,
}

#[allow(clippy::too_many_arguments)]
fn convexity_check(
    space: &FiniteMMS,
    mu0: &Density,
    mu1: &Density,
    cd: CurvatureDimension,
    nprime: f64,
    eps: f64,
    tol: f64,
    coefficient: Coefficient,
) -> Result<CDReport> {
    if !(nprime >= cd.dimension) {
        return Err(Error::InvalidInput(format!("N' = {nprime} below N = {}", cd.dimension)));
    }
    let ot = wasserstein2(space, mu0, mu1)?;
    let mid = displacement_midpoint(space, &ot.coupling, eps)?;
    let lhs = renyi_entropy(space, &mid, nprime);
    let coeff_cd = CurvatureDimension { curvature: cd.curvature, dimension: nprime };
    let e = -1.0 / nprime;
    let mut rhs = 0.0;
    let mut infinite = false;
    for &(i, j, x) in ot.coupling.entries() {
        let d = space.dist(i, j);
        let c = match coefficient {
            Coefficient::Sigma => sigma_coeff(coeff_cd, 0.5, d),
            Coefficient::Tau => tau_coeff(coeff_cd, 0.5, d),
        };
        match c {
            ExtendedValue::Infinity => infinite = true,
            ExtendedValue::Finite(c) => {
                rhs += x * c * (mu0.density(space, i).powf(e) + mu1.density(space, j).powf(e));
            }
        }
    }
    let (rhs, slack) = if infinite {
        (ExtendedValue::Infinity, f64::NEG_INFINITY)
    } else {
        (ExtendedValue::Finite(rhs), lhs - rhs)
    };
    Ok(CDReport {
        coefficient,
        t: 0.5,
        curvature: cd.curvature,
        dimension: cd.dimension,
        nprime,
        lhs,
        rhs,
        slack,
        tolerance: tol,
        pass: slack >= -tol,
        w2: ot.cost,
    })
}

/// Midpoint CD*(K,N) inequality at one `N′ ≥ N`, along an optimal coupling.
pub fn cd_star_check(
    space: &FiniteMMS,
    mu0: &Density,
    mu1: &Density,
    cd: CurvatureDimension,
    nprime: f64,
    eps: f64,
    tol: f64,
) -> Result<CDReport> {
    convexity_check(space, mu0, mu1, cd, nprime, eps, tol, Coefficient::Sigma)
}

/// As [`cd_star_check`] with τ in place of σ.
pub fn cd_check(
    space: &FiniteMMS,
    mu0: &Density,
    mu1: &Density,
    cd: CurvatureDimension,
    nprime: f64,
    eps: f64,
    tol: f64,
) -> Result<CDReport> {
    convexity_check(space, mu0, mu1, cd, nprime, eps, tol, Coefficient::Tau)
}

#[derive(Debug, Clone, Serialize)]
pub struct McpReport {
    pub curvature: f64,
    pub dimension: f64,
    pub t: f64,
    pub centre: usize,
    pub set_mass: f64,
    /// Largest `pushed − weight` over receiving atoms.
    #[serde(serialize_with = "signed_extended")]
    pub max_excess: f64,
    pub worst_atom: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Midpoint surrogate of MCP(K,N): every `a ∈ set` sends `m(a) τ^{(1/2)}(d(x,a))^N`
/// to the ε-midpoints of `(x, a)`; no atom may receive more than its weight.
pub fn mcp_check(
    space: &FiniteMMS,
    centre: usize,
    set: &[usize],
    cd: CurvatureDimension,
    eps: f64,
    tol: f64,
) -> Result<McpReport> {
    if centre >= space.len() || set.iter().any(|&a| a >= space.len()) {
        return Err(Error::InvalidInput("atom index outside the space".into()));
    }
    let set_mass: f64 = set.iter().map(|&a| space.weight(a)).sum();
    if set.is_empty() || !(set_mass > 0.0) {
        return Err(Error::InvalidInput("MCP target set needs positive weight".into()));
    }
    let mut pushed = vec![0.0; space.len()];
    let mut infinite = false;
    for &a in set {
        let w = space.weight(a);
        if w <= 0.0 {
            continue;
        }
        match tau_coeff(cd, 0.5, space.dist(centre, a)) {
            ExtendedValue::Infinity => infinite = true,
            ExtendedValue::Finite(tau) => spread(space, centre, a, w * tau.powf(cd.dimension), eps, &mut pushed)?,
        }
    }
    let (worst_atom, max_excess) = if infinite {
        (centre, f64::INFINITY)
    } else {
        (0..space.len())
            .map(|k| (k, pushed[k] - space.weight(k)))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc })
    };
    Ok(McpReport {
        curvature: cd.curvature,
        dimension: cd.dimension,
        t: 0.5,
        centre,
        set_mass,
        max_excess,
        worst_atom,
        tolerance: tol,
        pass: max_excess <= tol,
    })
}

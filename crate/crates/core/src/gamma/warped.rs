//! Finite-difference Γ-calculus on the warped product `I_K ×_{sin_K}^ν F`
//! with a one-dimensional fiber.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::graph::{gamma, gamma2, WeightedGraph};
use super::grid::{Axis, Direction, GridFunction, Stencil, TrigPoly, GHOST_MARGIN};
use crate::error::{Error, Result};
use crate::model_fns::{cos_k, sin_k, CurvatureDimension};

/// A one-dimensional fiber with generator `d²/dx² + b(x) d/dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberGeometry {
    /// Circle of the given radius, arc-length coordinate, `b = 0`.
    Circle { radius: f64 },
    /// `(I_K, sin_K^ν dx)`, `b = ν cos_K / sin_K`.
    Model { curvature: f64, nu: f64 },
}

impl FiberGeometry {
    /// `(b, b′)` at `x`.
    pub fn drift(&self, x: f64) -> (f64, f64) {
        match *self {
            FiberGeometry::Circle { .. } => (0.0, 0.0),
            FiberGeometry::Model { curvature, nu } => {
                let s = sin_k(curvature, x).unwrap_or(f64::NAN);
                let c = cos_k(curvature, x);
                // (cos_K / sin_K)′ = −(K sin_K² + cos_K²)/sin_K² = −1/sin_K²
                (nu * c / s, -nu / (s * s))
            }
        }
    }

    /// Lowest nonconstant eigenfunction and its eigenvalue.
    pub fn first_eigenfunction(&self) -> (TrigPoly, f64) {
        match *self {
            FiberGeometry::Circle { radius } => (TrigPoly::cos(1.0 / radius), 1.0 / (radius * radius)),
            FiberGeometry::Model { curvature, nu } => (TrigPoly::cos(curvature.sqrt()), (nu + 1.0) * curvature),
        }
    }

    /// Base frequency for trigonometric test functions.
    fn frequency(&self) -> f64 {
        match *self {
            FiberGeometry::Circle { radius } => 1.0 / radius,
            FiberGeometry::Model { curvature, .. } => curvature.sqrt(),
        }
    }

    pub fn axis(&self, window: Option<(f64, f64)>, cells: usize) -> Result<Axis> {
        match (*self, window) {
            (FiberGeometry::Circle { radius }, None) => Axis::periodic(2.0 * std::f64::consts::PI * radius, cells),
            (FiberGeometry::Circle { .. }, Some(_)) => {
                Err(Error::InvalidInput("circle fibers are sampled whole, without a window".into()))
            }
            (FiberGeometry::Model { curvature, .. }, Some((a, b))) => {
                if curvature <= 0.0 {
                    return Err(Error::InvalidInput(format!("model fiber needs K > 0, got {curvature}")));
                }
                let axis = Axis::window(a, b, cells, GHOST_MARGIN)?;
                let end = std::f64::consts::PI / curvature.sqrt();
                if axis.start <= 0.0 || axis.coord(axis.len - 1) >= end {
                    return Err(Error::InvalidInput(format!(
                        "fiber window [{a}, {b}] with ghost cells leaves (0, {end})"
                    )));
                }
                Ok(axis)
            }
            (FiberGeometry::Model { .. }, None) => Err(Error::InvalidInput("model fiber needs a window".into())),
        }
    }
}

/// The cone `I_K ×_{sin_K}^ν F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WarpedCone {
    pub curvature: f64,
    pub nu: f64,
    pub fiber: FiberGeometry,
}

impl WarpedCone {
    /// `(f, f′, f″)` for `f = sin_K`.
    pub fn warp(&self, r: f64) -> (f64, f64, f64) {
        let s = sin_k(self.curvature, r).unwrap_or(f64::NAN);
        (s, cos_k(self.curvature, r), -self.curvature * s)
    }

    /// `(νK, ν + 1)`.
    pub fn sharp_bound(&self) -> CurvatureDimension {
        CurvatureDimension { curvature: self.nu * self.curvature, dimension: self.nu + 1.0 }
    }
}

/// Sampling region: a base window, a fiber window (omitted for circles) and
/// cell counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub base: (f64, f64),
    pub fiber: Option<(f64, f64)>,
    pub base_cells: usize,
    pub fiber_cells: usize,
}

impl Window {
    pub fn refined(&self) -> Self {
        Self { base_cells: 2 * self.base_cells, fiber_cells: 2 * self.fiber_cells, ..*self }
    }

    pub fn base_step(&self) -> f64 {
        (self.base.1 - self.base.0) / self.base_cells as f64
    }

    pub fn axes(&self, cone: &WarpedCone) -> Result<(Axis, Axis)> {
        let base = Axis::window(self.base.0, self.base.1, self.base_cells, GHOST_MARGIN)?;
        let last = base.coord(base.len - 1);
        let positive = base.start > 0.0
            && (cone.curvature <= 0.0 || last < std::f64::consts::PI / cone.curvature.sqrt());
        if !positive {
            return Err(Error::InvalidInput(format!(
                "base window [{}, {}] with ghost cells reaches a zero of the warping function",
                self.base.0, self.base.1
            )));
        }
        Ok((base, cone.fiber.axis(self.fiber, self.fiber_cells)?))
    }
}

/// `L^F u = u_xx + b u_x`, applied along the fiber direction.
pub fn fiber_generator(fiber: &FiberGeometry, u: &GridFunction, stencil: Stencil) -> GridFunction {
    u.d2(Direction::Fiber, stencil)
        .zip_with(&u.d1(Direction::Fiber, stencil), |_, x, d2, d1| d2 + fiber.drift(x).0 * d1)
}

/// `L^C u = u_rr + ν (f′/f) u_r + (1/f²) L^F u`.
pub fn cone_generator(cone: &WarpedCone, u: &GridFunction, stencil: Stencil) -> GridFunction {
    let radial = u
        .d2(Direction::Base, stencil)
        .zip_with(&u.d1(Direction::Base, stencil), |r, _, d2, d1| {
            let (f, df, _) = cone.warp(r);
            d2 + cone.nu * df / f * d1
        });
    radial.zip_with(&fiber_generator(&cone.fiber, u, stencil), |r, _, a, b| {
        let f = cone.warp(r).0;
        a + b / (f * f)
    })
}

/// `Γ^C(u, v) = u_r v_r + (1/f²) u_x v_x`.
pub fn cone_gamma(cone: &WarpedCone, u: &GridFunction, v: &GridFunction, stencil: Stencil) -> GridFunction {
    cone_gamma_mixed(cone, u, stencil, v, stencil)
}

fn cone_gamma_mixed(cone: &WarpedCone, u: &GridFunction, su: Stencil, v: &GridFunction, sv: Stencil) -> GridFunction {
    let radial = u.d1(Direction::Base, su).mul(&v.d1(Direction::Base, sv));
    let fiber = u.d1(Direction::Fiber, su).mul(&v.d1(Direction::Fiber, sv));
    radial.zip_with(&fiber, |r, _, a, b| {
        let f = cone.warp(r).0;
        a + b / (f * f)
    })
}

/// `Γ₂^C(u) = ½ L^C Γ^C(u) − Γ^C(u, L^C u)`: fourth-order stencils on `u`,
/// second-order on the derived quantities.
pub fn cone_gamma2(cone: &WarpedCone, u: &GridFunction) -> GridFunction {
    let lu = cone_generator(cone, u, Stencil::Fourth);
    let gam = cone_gamma(cone, u, u, Stencil::Fourth);
    let half_lgam = cone_generator(cone, &gam, Stencil::Second).scale(0.5);
    let cross = cone_gamma_mixed(cone, u, Stencil::Fourth, &lu, Stencil::Second);
    half_lgam.sub(&cross)
}

/// One-dimensional `Γ₂(u) = u″² − b′ u′²` for `d² + b d`.
fn weighted_gamma2(jet: [f64; 3], drift_prime: f64) -> f64 {
    jet[2] * jet[2] - drift_prime * jet[1] * jet[1]
}

/// The cross term `(I)(u₁) = −8u₁f′u₁′/f³ + 4u₁²f′²/f⁴ + 4u₁′²/f²`.
pub fn warp_cross_term(cone: &WarpedCone, u1: [f64; 3], r: f64) -> f64 {
    let (f, df, _) = cone.warp(r);
    -8.0 * u1[0] * df * u1[1] / f.powi(3) + 4.0 * (u1[0] * df).powi(2) / f.powi(4) + 4.0 * u1[1] * u1[1] / (f * f)
}

/// Explicit right side of the product identity for `Γ₂^C(u₁ ⊗ u₂)`.
pub fn warped_gamma2_rhs(cone: &WarpedCone, u1: [f64; 3], u2: [f64; 3], r: f64, x: f64) -> f64 {
    let (f, df, ddf) = cone.warp(r);
    let nu = cone.nu;
    let base_drift_prime = nu * (ddf / f - df * df / (f * f));
    let (bf, bf_prime) = cone.fiber.drift(x);
    let base = weighted_gamma2(u1, base_drift_prime) * u2[0] * u2[0];
    let fiber = u1[0] * u1[0] / f.powi(4) * weighted_gamma2(u2, bf_prime);
    let lf = u2[2] + bf * u2[1];
    let gf = u2[1] * u2[1];
    let j = 4.0 * u1[0] / f.powi(3) * df * u1[1] * lf * u2[0]
        - 2.0 * u1[0] * u1[0] / f.powi(3) * (ddf + (nu - 1.0) * df * df / f) * gf
        + warp_cross_term(cone, u1, r) * gf;
    base + fiber + 0.5 * j
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub base_steps: [f64; 2],
    /// Max interior `|lhs − rhs|` at `h` and `h/2`.
    pub residuals: [f64; 2],
    pub order: f64,
    /// Max `|lhs|` at the finer level, for scale.
    pub magnitude: f64,
    pub points: usize,
}

/// Compares the finite-difference `Γ₂^C(u₁⊗u₂)` against the explicit
/// product formula at `window` and its refinement.
pub fn warped_gamma2_identity_check(
    cone: &WarpedCone,
    window: &Window,
    u1: &TrigPoly,
    u2: &TrigPoly,
) -> Result<IdentityReport> {
    let level = |w: &Window| -> Result<(f64, f64, usize)> {
        let (base, fiber) = w.axes(cone)?;
        let u = GridFunction::sample(base, fiber, |r, x| u1.value(r) * u2.value(x));
        let lhs = cone_gamma2(cone, &u);
        let res = lhs.map(|r, x, v| v - warped_gamma2_rhs(cone, u1.jet(r), u2.jet(x), r, x));
        Ok((res.max_abs(), lhs.max_abs(), lhs.count_valid()))
    };
    let fine = window.refined();
    let ((r0, _, _), (r1, mag, points)) = (level(window)?, level(&fine)?);
    Ok(IdentityReport {
        base_steps: [window.base_step(), fine.base_step()],
        residuals: [r0, r1],
        order: (r0 / r1).log2(),
        magnitude: mag,
        points,
    })
}

/// `Σ u₁ⁱ ⊗ u₂ⁱ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparableFunction {
    pub terms: Vec<(TrigPoly, TrigPoly)>,
}

impl SeparableFunction {
    pub fn product(u1: TrigPoly, u2: TrigPoly) -> Self {
        Self { terms: vec![(u1, u2)] }
    }

    pub fn value(&self, r: f64, x: f64) -> f64 {
        self.terms.iter().map(|(a, b)| a.value(r) * b.value(x)).sum()
    }

    pub fn sample(&self, base: Axis, fiber: Axis) -> GridFunction {
        GridFunction::sample(base, fiber, |r, x| self.value(r, x))
    }
}

/// Coefficient decay `k^{-3}` of random test functions, which keeps the
/// finite-difference error of degree-6 members at the scale of low modes.
pub const FAMILY_DECAY: i32 = 3;

/// `count` random sums of `summands` products of trigonometric polynomials of
/// degree at most `degree`.
pub fn random_family(cone: &WarpedCone, count: usize, summands: usize, degree: usize, seed: u64) -> Vec<SeparableFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = cone.fiber.frequency();
    (0..count)
        .map(|_| SeparableFunction {
            terms: (0..summands)
                .map(|_| {
                    (
                        TrigPoly::random(&mut rng, degree, 1.0, FAMILY_DECAY),
                        TrigPoly::random(&mut rng, degree, omega, FAMILY_DECAY),
                    )
                })
                .collect(),
        })
        .collect()
}

/// The sharp family `sin_K ⊗ φ` with `φ` the first fiber eigenfunction.
pub fn equality_member(cone: &WarpedCone) -> SeparableFunction {
    let base = if cone.curvature > 0.0 {
        let s = cone.curvature.sqrt();
        TrigPoly { constant: 0.0, terms: vec![(s, 0.0, 1.0 / s)] }
    } else {
        // sin_K is only trigonometric for K > 0; the check rejects other K
        TrigPoly::constant(f64::NAN)
    };
    SeparableFunction::product(base, cone.fiber.first_eigenfunction().0)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub kappa: f64,
    pub dimension: f64,
    pub base_step: f64,
    /// Smallest `Γ₂ − κΓ − (1/N)(Lu)²` over members and interior nodes.
    pub min_slack: f64,
    pub worst_member: usize,
    pub worst_point: (f64, f64),
    pub members: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Pointwise slack of `Γ₂ ≥ κΓ + (1/N)(Lu)²` for a sampled function.
pub fn bochner_slack(cone: &WarpedCone, u: &GridFunction, bound: &CurvatureDimension) -> GridFunction {
    let g2 = cone_gamma2(cone, u);
    let gam = cone_gamma(cone, u, u, Stencil::Fourth);
    let lu = cone_generator(cone, u, Stencil::Fourth);
    let inv_n = 1.0 / bound.dimension;
    g2.zip_with(&gam, |_, _, a, g| a - bound.curvature * g)
        .zip_with(&lu, |_, _, a, l| a - inv_n * l * l)
}

/// Minimum over `family` of the Bochner slack against `bound`; passes when no
/// value drops below `−tol`.
pub fn sharp_gamma2_estimate_check(
    cone: &WarpedCone,
    window: &Window,
    family: &[SeparableFunction],
    bound: &CurvatureDimension,
    tol: f64,
) -> Result<EstimateReport> {
    if family.is_empty() {
        return Err(Error::InvalidInput("empty test family".into()));
    }
    let (base, fiber) = window.axes(cone)?;
    let mins: Vec<(f64, f64, f64)> = family
        .par_iter()
        .map(|u| {
            bochner_slack(cone, &u.sample(base, fiber), bound)
                .min_with_point()
                .unwrap_or((f64::NAN, f64::NAN, f64::NAN))
        })
        .collect();
    let (worst_member, &(r, x, min_slack)) = mins
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2))
        .expect("nonempty family");
    Ok(EstimateReport {
        kappa: bound.curvature,
        dimension: bound.dimension,
        base_step: window.base_step(),
        min_slack,
        worst_member,
        worst_point: (r, x),
        members: family.len(),
        tolerance: tol,
        pass: min_slack >= -tol,
    })
}

/// Fiber data for the converse check.
#[derive(Debug, Clone)]
pub enum FiberCalculus<'a> {
    /// Exact graph calculus on a vertex function.
    Graph { graph: &'a WeightedGraph, u: &'a [f64] },
    /// Finite differences on a sampled fiber function.
    Grid { geometry: FiberGeometry, window: Option<(f64, f64)>, cells: usize, u: &'a TrigPoly },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConverseReport {
    pub dimension: f64,
    /// Smallest residual of the shifted inequality,
    /// `Γ₂ − (N−1)Γ − (1/N)(Lu)²`.
    pub min_residual: f64,
    /// Vertex index or fiber coordinate of the minimum.
    pub worst_point: f64,
    /// Largest `|L u + N ũ|` after the pointwise shift; zero up to roundoff.
    pub max_shifted_term: f64,
    pub points: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates the fiber inequality that a `(K, N)` cone forces on its fiber,
/// after the pointwise constant shift `ũ = u − u(x) − (1/N) L u(x)` that
/// removes its last term, so the residual is that of `BE(N−1, N)`.
pub fn converse_deduction_check(nu: f64, fiber: &FiberCalculus<'_>, tol: f64) -> Result<ConverseReport> {
    if !(nu >= 1.0) {
        return Err(Error::InvalidInput(format!("converse check needs N >= 1, got {nu}")));
    }
    // (point, u, Lu, Γ(u), Γ₂(u))
    let data: Vec<(f64, f64, f64, f64, f64)> = match fiber {
        FiberCalculus::Graph { graph, u } => {
            if u.len() != graph.len() {
                return Err(Error::InvalidInput(format!("{} values for {} vertices", u.len(), graph.len())));
            }
            let lu = graph.generator(u);
            let gm = gamma(graph, u, u);
            let g2 = gamma2(graph, u);
            (0..graph.len()).map(|x| (x as f64, u[x], lu[x], gm[x], g2[x])).collect()
        }
        FiberCalculus::Grid { geometry, window, cells, u } => {
            let axis = geometry.axis(*window, *cells)?;
            let g = GridFunction::sample(Axis::point(0.0), axis, |_, x| u.value(x));
            let lu = fiber_generator(geometry, &g, Stencil::Fourth);
            let du = g.d1(Direction::Fiber, Stencil::Fourth);
            let gm = du.mul(&du);
            let half_lgam = fiber_generator(geometry, &gm, Stencil::Second).scale(0.5);
            let cross = du.mul(&lu.d1(Direction::Fiber, Stencil::Second));
            let g2 = half_lgam.sub(&cross);
            let (_, valid) = g2.valid();
            valid
                .map(|j| (axis.coord(j), g.get(0, j), lu.get(0, j), gm.get(0, j), g2.get(0, j)))
                .collect()
        }
    };
    let n = nu;
    let mut min = (f64::INFINITY, f64::NAN);
    let mut max_shifted: f64 = 0.0;
    for &(p, u, lu, gm, g2) in &data {
        let shift = -u - lu / n;
        let shifted = lu + n * (u + shift);
        max_shifted = max_shifted.max(shifted.abs());
        let residual = g2 - (n - 1.0) * gm - lu * lu / n - shifted * shifted / ((n + 1.0) * n);
        if residual < min.0 {
            min = (residual, p);
        }
    }
    Ok(ConverseReport {
        dimension: n,
        min_residual: min.0,
        worst_point: min.1,
        max_shifted_term: max_shifted,
        points: data.len(),
        tolerance: tol,
        pass: min.0 >= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::PI;

    fn sphere() -> WarpedCone {
        WarpedCone { curvature: 1.0, nu: 1.0, fiber: FiberGeometry::Circle { radius: 1.0 } }
    }

    fn three_sphere() -> WarpedCone {
        WarpedCone { curvature: 1.0, nu: 2.0, fiber: FiberGeometry::Model { curvature: 1.0, nu: 1.0 } }
    }

    fn window(cone: &WarpedCone, cells: usize) -> Window {
        match cone.fiber {
            FiberGeometry::Circle { radius } => Window {
                base: (0.6, 2.4),
                fiber: None,
                base_cells: cells,
                fiber_cells: ((2.0 * PI * radius / 1.8) * cells as f64).round() as usize,
            },
            FiberGeometry::Model { .. } => {
                Window { base: (0.6, 2.4), fiber: Some((0.7, 2.3)), base_cells: cells, fiber_cells: cells }
            }
        }
    }

    #[test]
    fn gamma_of_products() {
        let cone = sphere();
        let (b, f) = window(&cone, 40).axes(&cone).unwrap();
        let u1 = GridFunction::sample(b, f, |r, _| (2.0 * r).cos());
        let g = cone_gamma(&cone, &u1, &u1, Stencil::Fourth);
        let e = g.map(|r, _, v| v - (2.0 * (2.0 * r).sin()).powi(2)).max_abs();
        assert!(e < 1e-4, "{e}");
        let u2 = GridFunction::sample(b, f, |_, x| (3.0 * x).sin());
        let g = cone_gamma(&cone, &u2, &u2, Stencil::Fourth);
        assert!(g.map(|r, x, v| v - (3.0 * (3.0 * x).cos()).powi(2) / r.sin().powi(2)).max_abs() < 1e-3);
    }

    #[test]
    fn linear_function_on_flat_cone_has_unit_gradient() {
        let cone = WarpedCone { curvature: 0.0, nu: 1.0, fiber: FiberGeometry::Circle { radius: 1.0 } };
        let w = Window { base: (0.5, 3.0), fiber: None, base_cells: 40, fiber_cells: 160 };
        let (b, f) = w.axes(&cone).unwrap();
        let u = GridFunction::sample(b, f, |r, x| r * x.cos());
        let g = cone_gamma(&cone, &u, &u, Stencil::Fourth);
        assert!(g.map(|_, _, v| v - 1.0).max_abs() < 1e-6);
    }

    #[test]
    fn generator_on_separated_functions() {
        let cone = sphere();
        let (b, f) = window(&cone, 40).axes(&cone).unwrap();
        let u = GridFunction::sample(b, f, |_, x| (2.0 * x).cos());
        let lu = cone_generator(&cone, &u, Stencil::Fourth);
        assert!(lu.map(|r, x, v| v + 4.0 * (2.0 * x).cos() / r.sin().powi(2)).max_abs() < 1e-4);
        let u = GridFunction::sample(b, f, |r, _| r.cos() + 0.5 * (2.0 * r).sin());
        let lu = cone_generator(&cone, &u, Stencil::Fourth);
        let want = |r: f64| {
            let d1 = -r.sin() + (2.0 * r).cos();
            let d2 = -r.cos() - 2.0 * (2.0 * r).sin();
            d2 + r.cos() / r.sin() * d1
        };
        assert!(lu.map(|r, _, v| v - want(r)).max_abs() < 1e-5);
    }

    /// The FD generator agrees with the dense operator
    /// `(D₂ + ν f′/f D₁) ⊗ I + diag(1/f²) ⊗ (D₂ + b D₁)` assembled from the
    /// same stencils.
    #[test]
    fn generator_matches_dense_product_operator() {
        let cone = three_sphere();
        let w = Window { base: (0.8, 2.2), fiber: Some((0.9, 2.1)), base_cells: 6, fiber_cells: 5 };
        let (b, f) = w.axes(&cone).unwrap();
        let stencil_matrix = |axis: &Axis, coeffs: &[f64], power: i32| {
            let half = coeffs.len() / 2;
            DMatrix::from_fn(axis.len, axis.len, |i, j| {
                let k = j as isize - i as isize + half as isize;
                if k >= 0 && (k as usize) < coeffs.len() {
                    coeffs[k as usize] / axis.step.powi(power)
                } else {
                    0.0
                }
            })
        };
        let first = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let second = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        let diag = |axis: &Axis, g: &dyn Fn(f64) -> f64| DMatrix::from_fn(axis.len, axis.len, |i, j| if i == j { g(axis.coord(i)) } else { 0.0 });
        let radial = stencil_matrix(&b, &second, 2)
            + diag(&b, &|r| cone.nu * r.cos() / r.sin()) * stencil_matrix(&b, &first, 1);
        let fib = stencil_matrix(&f, &second, 2) + diag(&f, &|x| cone.fiber.drift(x).0) * stencil_matrix(&f, &first, 1);
        let op = radial.kronecker(&DMatrix::identity(f.len, f.len)) + diag(&b, &|r| 1.0 / r.sin().powi(2)).kronecker(&fib);
        let u = GridFunction::sample(b, f, |r, x| (1.3 * r).sin() * (x * x + 0.2) + r.cos() * (2.0 * x).sin());
        let vec = DVector::from_fn(b.len * f.len, |k, _| u.get(k / f.len, k % f.len));
        let dense = op * vec;
        let lu = cone_generator(&cone, &u, Stencil::Fourth);
        let (vb, vf) = lu.valid();
        assert_eq!(vb.len(), 7 + 2 * (GHOST_MARGIN - 2));
        for i in vb {
            for j in vf.clone() {
                assert!((lu.get(i, j) - dense[i * f.len + j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identity_with_constant_fiber_factor() {
        let cone = three_sphere();
        let u1 = TrigPoly { constant: 0.2, terms: vec![(1.0, 0.5, -0.3), (3.0, 0.1, 0.4)] };
        let rep = warped_gamma2_identity_check(&cone, &window(&cone, 40), &u1, &TrigPoly::constant(1.0)).unwrap();
        assert!(rep.residuals[1] < 5e-3 * rep.magnitude, "{rep:?}");
        assert!((rep.order - 2.0).abs() < 0.3, "{rep:?}");
    }

    #[test]
    fn cross_term_vanishes_for_the_warping_function() {
        for k in [1.0, 0.25, 0.0, -1.0] {
            let cone = WarpedCone { curvature: k, nu: 2.0, fiber: FiberGeometry::Circle { radius: 1.0 } };
            let w = Window { base: (0.6, 2.4), fiber: None, base_cells: 60, fiber_cells: 24 };
            let (b, f) = w.axes(&cone).unwrap();
            let u1 = GridFunction::sample(b, f, |r, _| sin_k(k, r).unwrap());
            let d1 = u1.d1(Direction::Base, Stencil::Fourth);
            let mut worst: f64 = 0.0;
            for (r, _, v) in d1.valid_points() {
                let jet = [sin_k(k, r).unwrap(), v, 0.0];
                worst = worst.max(warp_cross_term(&cone, jet, r).abs());
                let exact = [sin_k(k, r).unwrap(), cos_k(k, r), -k * sin_k(k, r).unwrap()];
                assert!(warp_cross_term(&cone, exact, r).abs() < 1e-12);
            }
            assert!(worst < 1e-6, "K={k}: {worst}");
        }
    }

    #[test]
    fn identity_converges_at_second_order_for_random_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cone in [sphere(), three_sphere()] {
            for _ in 0..3 {
                let u1 = TrigPoly::random(&mut rng, 4, 1.0, 0);
                let u2 = TrigPoly::random(&mut rng, 4, 1.0, 0);
                let rep = warped_gamma2_identity_check(&cone, &window(&cone, 40), &u1, &u2).unwrap();
                let ratio = rep.residuals[0] / rep.residuals[1];
                assert!((3.2..=4.8).contains(&ratio), "{rep:?}");
            }
        }
    }

    #[test]
    fn constants_have_zero_slack() {
        let cone = three_sphere();
        let w = window(&cone, 20);
        let fam = [SeparableFunction::product(TrigPoly::constant(2.0), TrigPoly::constant(1.5))];
        let rep = sharp_gamma2_estimate_check(&cone, &w, &fam, &cone.sharp_bound(), 0.0).unwrap();
        assert!(rep.min_slack.abs() < 1e-9, "{rep:?}");
    }

    #[test]
    fn equality_family_slack_vanishes_with_the_step() {
        for cone in [sphere(), three_sphere()] {
            let fam = [equality_member(&cone)];
            let slack = |cells| {
                let w = window(&cone, cells);
                let (b, f) = w.axes(&cone).unwrap();
                bochner_slack(&cone, &fam[0].sample(b, f), &cone.sharp_bound()).max_abs()
            };
            let (a, b) = (slack(40), slack(80));
            assert!(b < 1e-3, "{a} {b}");
            assert!((a / b).log2() >= 1.9, "order {}", (a / b).log2());
        }
    }

    #[test]
    fn random_family_satisfies_the_sharp_estimate() {
        for cone in [sphere(), three_sphere()] {
            let fam = random_family(&cone, 12, 2, 6, 5);
            let w = window(&cone, 80);
            let h = w.base_step();
            let rep = sharp_gamma2_estimate_check(&cone, &w, &fam, &cone.sharp_bound(), 2000.0 * h * h + 1e-6).unwrap();
            assert!(rep.pass, "{rep:?}");
            let inflated = CurvatureDimension { curvature: (cone.nu + 1.0) * cone.curvature, dimension: cone.nu + 1.0 };
            let mut fam = fam;
            fam.push(equality_member(&cone));
            let rep = sharp_gamma2_estimate_check(&cone, &w, &fam, &inflated, 2000.0 * h * h + 1e-6).unwrap();
            assert!(!rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn converse_on_circles() {
        for radius in [1.0, 2.0] {
            let geometry = FiberGeometry::Circle { radius };
            let u = TrigPoly::cos(1.0 / radius);
            let rep = converse_deduction_check(1.0, &FiberCalculus::Grid { geometry, window: None, cells: 200, u: &u }, 1e-6).unwrap();
            let h = 2.0 * PI * radius / 200.0;
            assert!(rep.min_residual.abs() < h * h, "{rep:?}");
            assert!(rep.max_shifted_term < 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let u = TrigPoly::random(&mut rng, 6, 1.0 / radius, FAMILY_DECAY);
            let h = 2.0 * PI * radius / 400.0;
            let rep =
                converse_deduction_check(1.0, &FiberCalculus::Grid { geometry, window: None, cells: 400, u: &u }, 1e3 * h * h + 1e-6).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        let c = TrigPoly::constant(3.0);
        let rep = converse_deduction_check(
            2.0,
            &FiberCalculus::Grid { geometry: FiberGeometry::Circle { radius: 1.0 }, window: None, cells: 50, u: &c },
            0.0,
        )
        .unwrap();
        assert_eq!(rep.min_residual, 0.0);
    }

    #[test]
    fn converse_on_the_model_fiber_and_graphs() {
        let geometry = FiberGeometry::Model { curvature: 1.0, nu: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = TrigPoly::random(&mut rng, 5, 1.0, FAMILY_DECAY);
        let rep =
            converse_deduction_check(2.0, &FiberCalculus::Grid { geometry, window: Some((0.5, 2.6)), cells: 200, u: &u }, 1e-2).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep =
            converse_deduction_check(3.0, &FiberCalculus::Grid { geometry, window: Some((0.5, 2.6)), cells: 200, u: &u }, 1e-2).unwrap();
        assert!(!rep.pass, "a 2-dimensional fiber cannot carry the N = 3 bound: {rep:?}");

        let g = WeightedGraph::complete(3);
        let rep = converse_deduction_check(2.0, &FiberCalculus::Graph { graph: &g, u: &[1.0, 1.0, 1.0] }, 0.0).unwrap();
        assert_eq!(rep.min_residual, 0.0);
    }

    #[test]
    fn refused_windows() {
        let cone = sphere();
        let w = Window { base: (0.01, 2.0), fiber: None, base_cells: 10, fiber_cells: 20 };
        assert!(w.axes(&cone).is_err());
        let w = Window { base: (0.5, 2.0), fiber: Some((0.0, 1.0)), base_cells: 10, fiber_cells: 20 };
        assert!(w.axes(&cone).is_err());
    }
}

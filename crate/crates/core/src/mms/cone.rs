use std::f64::consts::PI;

use serde::Serialize;

use super::FiniteMMS;
use crate::error::{Error, Result};
use crate::model_fns::sin_k;

/// Uniform cell-centred grid on the radial interval `(0, extent)` carrying the
/// midpoint-rule weights of `sin_K^N dr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    curvature: f64,
    exponent: f64,
    extent: f64,
    step: f64,
    nodes: Vec<f64>,
    cell_weights: Vec<f64>,
}

impl RadialGrid {
    /// `extent` may be omitted for `K > 0`, in which case the whole interval
    /// `(0, π/√K)` is used. It is required for `K <= 0`.
    pub fn new(curvature: f64, exponent: f64, cells: usize, extent: Option<f64>) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidInput("radial grid needs at least one cell".into()));
        }
        if !(exponent >= 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidInput(format!("cone exponent {exponent} must be >= 0")));
        }
        let extent = match (curvature > 0.0, extent) {
            (true, None) => PI / curvature.sqrt(),
            (true, Some(e)) => {
                let full = PI / curvature.sqrt();
                if e > full * (1.0 + 1e-12) {
                    return Err(Error::Domain(format!(
                        "radial extent {e} exceeds the model interval [0, {full}] for K = {curvature}"
                    )));
                }
                e.min(full)
            }
            (false, Some(e)) => e,
            (false, None) => {
                return Err(Error::InvalidInput(format!(
                    "K = {curvature} <= 0 needs an explicit radial extent"
                )))
            }
        };
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidInput(format!("radial extent {extent} must be positive")));
        }
        let step = extent / cells as f64;
        let nodes: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * step).collect();
        let cell_weights = nodes
            .iter()
            .map(|&r| Ok(sin_k(curvature, r)?.powf(exponent) * step))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { curvature, exponent, extent, step, nodes, cell_weights })
    }

    /// Full model interval `(0, π/√K)`, `K > 0`.
    pub fn model(curvature: f64, exponent: f64, cells: usize) -> Result<Self> {
        if curvature <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "the bounded model interval needs K > 0, got {curvature}"
            )));
        }
        Self::new(curvature, exponent, cells, None)
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when the grid reaches the far endpoint `π/√K`, so the cone has a
    /// second apex.
    pub fn closes(&self) -> bool {
        self.curvature > 0.0 && (self.extent - PI / self.curvature.sqrt()).abs() <= 1e-12 * self.extent
    }
}

/// Index layout of a cone built by [`cone`]: apex first, then the nodes
/// radius-major, then the far apex when the grid closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeIndex {
    pub radial: usize,
    pub fiber: usize,
    pub far_apex: bool,
}

impl ConeIndex {
    pub fn of(grid: &RadialGrid, fiber: &FiniteMMS) -> Self {
        Self { radial: grid.len(), fiber: fiber.len(), far_apex: grid.closes() }
    }

    pub fn apex(&self) -> usize {
        0
    }

    pub fn node(&self, radial: usize, fiber: usize) -> usize {
        1 + radial * self.fiber + fiber
    }

    pub fn far_apex(&self) -> Option<usize> {
        self.far_apex.then(|| 1 + self.radial * self.fiber)
    }

    pub fn len(&self) -> usize {
        1 + self.radial * self.fiber + usize::from(self.far_apex)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(radial, fiber)` for a non-apex index.
    pub fn split(&self, idx: usize) -> Option<(usize, usize)> {
        if idx == 0 || idx > self.radial * self.fiber {
            None
        } else {
            Some(((idx - 1) / self.fiber, (idx - 1) % self.fiber))
        }
    }
}

/// Cone distance between `(s, x)` and `(t, y)` with fiber distance `theta`.
///
/// Evaluated through half-angle identities, e.g. for `K > 0`
/// `sin²(d/2) = sin²((s-t)/2) + sin s sin t sin²(θ/2)` in units of `1/√K`,
/// which stays accurate for nearby points where the arccos form cancels.
pub fn cone_distance(k: f64, s: f64, t: f64, theta: f64) -> f64 {
    let half = 0.5 * theta.clamp(0.0, PI);
    let sh = half.sin();
    if k > 0.0 {
        let c = k.sqrt();
        let (a, b) = (c * s, c * t);
        let cross = a.sin().max(0.0) * b.sin().max(0.0);
        let num = (0.5 * (a - b)).sin().powi(2) + cross * sh * sh;
        let den = (0.5 * (a + b)).cos().powi(2) + cross * half.cos().powi(2);
        2.0 * num.sqrt().atan2(den.sqrt()) / c
    } else if k < 0.0 {
        let c = (-k).sqrt();
        let (a, b) = (c * s, c * t);
        let q = (0.5 * (a - b)).sinh().powi(2) + a.sinh() * b.sinh() * sh * sh;
        2.0 * q.sqrt().asinh() / c
    } else {
        ((s - t).powi(2) + 4.0 * s * t * sh * sh).sqrt()
    }
}

/// The `(K, N)`-cone over `fiber` sampled on `grid`.
///
/// Node `(r_i, x_j)` carries weight `cell_weights[i] · fiber.weight[j]`; the
/// apex at `r = 0` (and at `r = π/√K` when the grid closes) is an explicit
/// zero-weight atom.
pub fn cone(fiber: &FiniteMMS, k: f64, n: f64, grid: &RadialGrid) -> Result<FiniteMMS> {
    if grid.curvature != k || grid.exponent != n {
        return Err(Error::InvalidInput(format!(
            "grid built for (K, N) = ({}, {}) but cone requested for ({k}, {n})",
            grid.curvature, grid.exponent
        )));
    }
    if let Some(v) = fiber.validate().first() {
        return Err(Error::InvalidInput(format!("fiber is not a valid space: {v}")));
    }
    if fiber.is_empty() {
        return Err(Error::InvalidInput("fiber has no atoms".into()));
    }
    let idx = ConeIndex::of(grid, fiber);
    let far = grid.closes().then(|| PI / k.sqrt());

    let mut labels = Vec::with_capacity(idx.len());
    let mut weight = Vec::with_capacity(idx.len());
    let mut radius = Vec::with_capacity(idx.len());
    let mut fiber_of = Vec::with_capacity(idx.len());
    labels.push("apex".to_string());
    weight.push(0.0);
    radius.push(0.0);
    fiber_of.push(usize::MAX);
    for (i, (&r, &cw)) in grid.nodes.iter().zip(&grid.cell_weights).enumerate() {
        for (j, name) in fiber.labels().iter().enumerate() {
            labels.push(format!("r{i}/{name}"));
            weight.push(cw * fiber.weight(j));
            radius.push(r);
            fiber_of.push(j);
        }
    }
    if let Some(end) = far {
        labels.push("antipode".to_string());
        weight.push(0.0);
        radius.push(end);
        fiber_of.push(usize::MAX);
    }

    FiniteMMS::from_fn(labels, weight, |p, q| {
        let (s, t) = (radius[p], radius[q]);
        match (fiber_of[p], fiber_of[q]) {
            (usize::MAX, _) | (_, usize::MAX) => {
                // an apex sees every fiber point at the same distance
                cone_distance(k, s, t, 0.0)
            }
            (x, y) => cone_distance(k, s, t, fiber.dist(x, y)),
        }
    })
}

/// `n` equispaced atoms on a circle of the given radius with arc-length metric.
pub fn circle_mms(n: usize, radius: f64) -> Result<FiniteMMS> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("circle needs at least 3 atoms, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("circle radius {radius} must be positive")));
    }
    let arc = 2.0 * PI * radius / n as f64;
    let labels = (0..n).map(|i| format!("c{i}")).collect();
    FiniteMMS::from_fn(labels, vec![arc; n], |i, j| {
        let k = i.abs_diff(j);
        k.min(n - k) as f64 * arc
    })
}

/// The model interval `(I_K, sin_K^ν dr)` on `n` cells, `K > 0`.
pub fn interval_model_mms(k: f64, nu: f64, n: usize) -> Result<FiniteMMS> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("interval needs at least 2 cells, got {n}")));
    }
    let grid = RadialGrid::model(k, nu, n)?;
    let labels = (0..n).map(|i| format!("r{i}")).collect();
    let nodes = grid.nodes().to_vec();
    FiniteMMS::from_fn(labels, grid.cell_weights().to_vec(), |i, j| (nodes[i] - nodes[j]).abs())
}

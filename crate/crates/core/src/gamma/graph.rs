//! Exact Bakry–Émery calculus on weighted graphs.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model_fns::sin_k;

/// Vertex measure `m` and symmetric edge weights `w`, defining
/// `(L u)(x) = (1/m_x) Σ_y w_xy (u_y − u_x)`.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    measure: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Undirected edges `(x, y, w)`; repeated edges add up.
    pub fn new(measure: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = measure.len();
        if let Some((i, m)) = measure.iter().enumerate().find(|(_, m)| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput(format!("vertex measure m[{i}] = {m} must be positive")));
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(x, y, w) in edges {
            if x >= n || y >= n {
                return Err(Error::InvalidInput(format!("edge ({x},{y}) outside {n} vertices")));
            }
            if x == y {
                return Err(Error::InvalidInput(format!("self-loop at {x}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!("edge ({x},{y}) has weight {w}")));
            }
            if w == 0.0 {
                continue;
            }
            for (a, b) in [(x, y), (y, x)] {
                match adj[a].iter_mut().find(|(c, _)| *c == b) {
                    Some(slot) => slot.1 += w,
                    None => adj[a].push((b, w)),
                }
            }
        }
        adj.iter_mut().for_each(|row| row.sort_by_key(|e| e.0));
        Ok(Self { measure, adj })
    }

    /// From a dense weight matrix, which must be symmetric with zero diagonal.
    pub fn from_dense(measure: Vec<f64>, w: &DMatrix<f64>) -> Result<Self> {
        let n = measure.len();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::InvalidInput(format!("weights are not {n}x{n}")));
        }
        let mut edges = Vec::new();
        for x in 0..n {
            if w[(x, x)] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal weight at {x}")));
            }
            for y in x + 1..n {
                if (w[(x, y)] - w[(y, x)]).abs() > 1e-12 * w[(x, y)].abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("weights not symmetric at ({x},{y})")));
                }
                if w[(x, y)] != 0.0 {
                    edges.push((x, y, w[(x, y)]));
                }
            }
        }
        Self::new(measure, &edges)
    }

    /// Complete graph with unit weights and unit measure.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y, 1.0))).collect();
        Self::new(vec![1.0; n], &edges).expect("complete graph")
    }

    /// Cycle on `n` vertices discretizing a circle of the given circumference:
    /// measure `δ` and weights `1/δ` with `δ = circumference / n`.
    pub fn cycle(n: usize, circumference: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("cycle needs at least 3 vertices, got {n}")));
        }
        let d = circumference / n as f64;
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0 / d)).collect();
        Self::new(vec![d; n], &edges)
    }

    /// Path graph with the same generator as the flux-form discretization of
    /// `(I_K, sin_K^ν dr)` on `n` cells.
    pub fn model_path(k: f64, nu: f64, n: usize) -> Result<Self> {
        if k <= 0.0 || n < 2 {
            return Err(Error::InvalidInput(format!("model path needs K > 0 and n >= 2, got K={k}, n={n}")));
        }
        let h = std::f64::consts::PI / k.sqrt() / n as f64;
        let measure = (0..n)
            .map(|i| Ok(sin_k(k, (i as f64 + 0.5) * h)?.powf(nu) * h))
            .collect::<Result<Vec<_>>>()?;
        let edges = (0..n - 1)
            .map(|i| Ok((i, i + 1, sin_k(k, (i + 1) as f64 * h)?.powf(nu) / h)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(measure, &edges)
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn neighbours(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adj[x].iter().find(|(z, _)| *z == y).map_or(0.0, |e| e.1)
    }

    pub fn generator(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|x| {
                self.adj[x].iter().map(|&(y, w)| w * (u[y] - u[x])).sum::<f64>() / self.measure[x]
            })
            .collect()
    }

    /// Vertices within `radius` hops of `x`, ascending.
    pub fn ball(&self, x: usize, radius: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([x]);
        let mut frontier = vec![x];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &v in &frontier {
                for &(y, _) in &self.adj[v] {
                    if seen.insert(y) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        seen.into_iter().collect()
    }

    /// Induced subgraph on `keep` (measures kept, outside edges dropped).
    fn induced(&self, keep: &[usize]) -> WeightedGraph {
        let pos = |v: usize| keep.binary_search(&v).ok();
        let adj = keep
            .iter()
            .map(|&v| self.adj[v].iter().filter_map(|&(y, w)| pos(y).map(|j| (j, w))).collect())
            .collect();
        WeightedGraph { measure: keep.iter().map(|&v| self.measure[v]).collect(), adj }
    }
}

/// `Γ(u, v) = ½ (L(uv) − u Lv − v Lu)`.
pub fn gamma(g: &WeightedGraph, u: &[f64], v: &[f64]) -> Vec<f64> {
    let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
    let luv = g.generator(&uv);
    let lu = g.generator(u);
    let lv = g.generator(v);
    (0..g.len()).map(|x| 0.5 * (luv[x] - u[x] * lv[x] - v[x] * lu[x])).collect()
}

/// `Γ₂(u, v) = ½ (L Γ(u,v) − Γ(u, Lv) − Γ(v, Lu))`.
pub fn gamma2_pair(g: &WeightedGraph, u: &[f64], v: &[f64]) -> Vec<f64> {
    let lgam = g.generator(&gamma(g, u, v));
    let a = gamma(g, u, &g.generator(v));
    let b = gamma(g, v, &g.generator(u));
    (0..g.len()).map(|x| 0.5 * lgam[x] - 0.5 * (a[x] + b[x])).collect()
}

/// `Γ₂(u) = ½ L Γ(u) − Γ(u, Lu)`.
pub fn gamma2(g: &WeightedGraph, u: &[f64]) -> Vec<f64> {
    let lgam = g.generator(&gamma(g, u, u));
    let cross = gamma(g, u, &g.generator(u));
    (0..g.len()).map(|x| 0.5 * lgam[x] - cross[x]).collect()
}

/// Dimension parameter of a curvature bound, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    /// `1/N`, zero for `N = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Dimension::Finite(n) => 1.0 / n,
            Dimension::Infinite => 0.0,
        }
    }
}

/// Pointwise curvature, `−∞` when the objective is unbounded below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kappa {
    Finite(f64),
    NegInfinity,
}

impl Kappa {
    pub fn value(self) -> f64 {
        match self {
            Kappa::Finite(k) => k,
            Kappa::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureResult {
    pub vertex: usize,
    pub dimension: Dimension,
    pub kappa: Kappa,
    /// Minimizer on the 2-ball as `(vertex, value)`, normalized to `Γ(u)(x) = 1`.
    pub certificate: Option<Vec<(usize, f64)>>,
}

/// `Γ(x)`, `Γ₂(x)` as quadratic forms and `L(x)` as a linear form in the
/// values on the 2-ball of `x` (local coordinates).
fn local_forms(g: &WeightedGraph, x: usize) -> (Vec<usize>, DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let ball = g.ball(x, 2);
    let sub = g.induced(&ball);
    let cx = ball.binary_search(&x).expect("centre in its ball");
    let k = ball.len();
    let basis = |i: usize| {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        e
    };
    let mut q_gamma = DMatrix::zeros(k, k);
    let mut q_two = DMatrix::zeros(k, k);
    let mut lin = DVector::zeros(k);
    for i in 0..k {
        let ei = basis(i);
        lin[i] = sub.generator(&ei)[cx];
        for j in i..k {
            let ej = basis(j);
            let gv = gamma(&sub, &ei, &ej)[cx];
            let g2 = gamma2_pair(&sub, &ei, &ej)[cx];
            q_gamma[(i, j)] = gv;
            q_gamma[(j, i)] = gv;
            q_two[(i, j)] = g2;
            q_two[(j, i)] = g2;
        }
    }
    (ball, q_gamma, q_two, lin)
}

/// `κ(x, N) = inf { Γ₂(u)(x) − (1/N)(Lu(x))² : Γ(u)(x) = 1 }`, solved on the
/// 2-ball as a generalized eigenproblem after splitting off the null space of
/// the `Γ(x)` form.
pub fn curvature_dimension(g: &WeightedGraph, x: usize, dim: Dimension) -> Result<CurvatureResult> {
    if x >= g.len() {
        return Err(Error::InvalidInput(format!("vertex {x} outside {} vertices", g.len())));
    }
    if let Dimension::Finite(n) = dim {
        if !(n > 0.0) {
            return Err(Error::InvalidInput(format!("dimension {n} must be positive")));
        }
    }
    if g.neighbours(x).is_empty() {
        return Err(Error::IsolatedVertex(x));
    }
    let (ball, q_gamma, q_two, lin) = local_forms(g, x);
    let objective = &q_two - dim.reciprocal() * &lin * lin.transpose();
    let k = ball.len();

    let eg = SymmetricEigen::new(q_gamma.clone());
    let gmax = eg.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = 1e-12 * gmax.max(f64::MIN_POSITIVE);
    let range: Vec<usize> = (0..k).filter(|&i| eg.eigenvalues[i] > cut).collect();
    let null: Vec<usize> = (0..k).filter(|&i| eg.eigenvalues[i] <= cut).collect();
    if range.is_empty() {
        return Err(Error::IsolatedVertex(x));
    }
    let r = DMatrix::from_fn(k, range.len(), |i, j| eg.eigenvectors[(i, range[j])]);
    let z = DMatrix::from_fn(k, null.len(), |i, j| eg.eigenvectors[(i, null[j])]);
    let d = DVector::from_fn(range.len(), |j, _| eg.eigenvalues[range[j]]);

    let scale = objective.amax().max(f64::MIN_POSITIVE);
    let a = r.transpose() * &objective * &r;
    let neg_inf = CurvatureResult { vertex: x, dimension: dim, kappa: Kappa::NegInfinity, certificate: None };

    // minimize over the null-space part for each range part
    let (schur, elim) = if null.is_empty() {
        (a, DMatrix::zeros(0, range.len()))
    } else {
        let b = r.transpose() * &objective * &z;
        let c = z.transpose() * &objective * &z;
        let ec = SymmetricEigen::new(c.clone());
        let tol = 1e-10 * scale;
        if ec.eigenvalues.iter().any(|&l| l < -tol) {
            return Ok(neg_inf);
        }
        // pseudo-inverse of C; B must not reach into ker C
        let mut c_pinv = DMatrix::zeros(null.len(), null.len());
        for (i, &l) in ec.eigenvalues.iter().enumerate() {
            let v = ec.eigenvectors.column(i);
            if l > tol {
                c_pinv += (1.0 / l) * v * v.transpose();
            } else if (&b * v).amax() > 1e-8 * scale {
                return Ok(neg_inf);
            }
        }
        let elim = -&c_pinv * b.transpose();
        (a + &b * &elim, elim)
    };
    let dinv = d.map(|v| 1.0 / v.sqrt());
    let sym = DMatrix::from_fn(range.len(), range.len(), |i, j| schur[(i, j)] * dinv[i] * dinv[j]);
    let sym = 0.5 * (&sym + sym.transpose());
    let es = SymmetricEigen::new(sym);
    let (imin, kappa) = es
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &l)| if l < acc.1 { (i, l) } else { acc });
    let a_min = es.eigenvectors.column(imin).component_mul(&dinv);
    let mut u = &r * &a_min;
    if !null.is_empty() {
        u += &z * (&elim * &a_min);
    }
    let certificate = ball.iter().copied().zip(u.iter().copied()).collect();
    Ok(CurvatureResult { vertex: x, dimension: dim, kappa: Kappa::Finite(kappa), certificate: Some(certificate) })
}

/// How [`be_check`] searches for violations.
#[derive(Debug, Clone)]
pub enum BeStrategy {
    /// Gaussian random functions.
    Sampled { count: usize, seed: u64 },
    /// Per-vertex exact curvature via [`curvature_dimension`].
    ExhaustiveLocal,
    /// Caller-supplied functions.
    Family(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize)]
pub struct BeReport {
    pub kappa: f64,
    pub dimension: Dimension,
    pub strategy: String,
    /// Smallest `Γ₂ − κΓ − (1/N)(Lu)²` (sampled / family) or `κ(x,N) − κ`
    /// (exhaustive), over vertices and functions.
    pub min_slack: f64,
    pub worst_vertex: usize,
    pub evaluated: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// `Γ₂(u) − κΓ(u) − (1/N)(Lu)²` at every vertex.
pub fn be_slack(g: &WeightedGraph, kappa: f64, dim: Dimension, u: &[f64]) -> Vec<f64> {
    let g2 = gamma2(g, u);
    let gm = gamma(g, u, u);
    let lu = g.generator(u);
    let inv = dim.reciprocal();
    (0..g.len()).map(|x| g2[x] - kappa * gm[x] - inv * lu[x] * lu[x]).collect()
}

/// Searches for a violation of `BE(κ, N)` on the whole graph.
pub fn be_check(g: &WeightedGraph, kappa: f64, dim: Dimension, strategy: &BeStrategy, tol: f64) -> Result<BeReport> {
    if let Dimension::Finite(n) = dim {
        if n < 1.0 {
            return Err(Error::InvalidInput(format!("BE needs N >= 1, got {n}")));
        }
    }
    let worst = |slacks: Vec<Vec<f64>>| {
        slacks
            .into_iter()
            .flat_map(|s| s.into_iter().enumerate())
            .fold((0, f64::INFINITY), |acc, (x, v)| if v < acc.1 { (x, v) } else { acc })
    };
    let (label, (vertex, min), evaluated) = match strategy {
        BeStrategy::Sampled { count, seed } => {
            let slacks: Vec<Vec<f64>> = (0..*count)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                    let u: Vec<f64> = (0..g.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
                    be_slack(g, kappa, dim, &u)
                })
                .collect();
            (format!("sampled({count}, seed {seed})"), worst(slacks), *count)
        }
        BeStrategy::Family(fs) => {
            if let Some(f) = fs.iter().find(|f| f.len() != g.len()) {
                return Err(Error::InvalidInput(format!(
                    "family function has {} values for {} vertices",
                    f.len(),
                    g.len()
                )));
            }
            let slacks = fs.par_iter().map(|u| be_slack(g, kappa, dim, u)).collect();
            (format!("family({})", fs.len()), worst(slacks), fs.len())
        }
        BeStrategy::ExhaustiveLocal => {
            let local: Vec<Result<f64>> = (0..g.len())
                .into_par_iter()
                .map(|x| Ok(curvature_dimension(g, x, dim)?.kappa.value() - kappa))
                .collect();
            let local = local.into_iter().collect::<Result<Vec<_>>>()?;
            ("exhaustive-local".to_string(), worst(vec![local]), g.len())
        }
    };
    Ok(BeReport {
        kappa,
        dimension: dim,
        strategy: label,
        min_slack: min,
        worst_vertex: vertex,
        evaluated,
        tolerance: tol,
        pass: min >= -tol,
    })
}

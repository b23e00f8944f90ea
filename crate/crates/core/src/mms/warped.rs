use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;

use super::FiniteMMS;
use crate::error::{Error, Result};

/// Stencil of the product graph used by [`warped_product`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarpedOptions {
    /// Fiber moves only reach this many nearest fiber neighbours.
    pub hop_cap: usize,
    /// Edges may jump this many radial nodes at once.
    pub radial_reach: usize,
}

impl Default for WarpedOptions {
    fn default() -> Self {
        Self { hop_cap: 8, radial_reach: 1 }
    }
}

fn nearest_neighbours(fiber: &FiniteMMS, cap: usize) -> Vec<Vec<usize>> {
    let n = fiber.len();
    let mut nbrs: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut order: Vec<usize> = (0..n).filter(|&y| y != j).collect();
            order.sort_by(|&a, &b| fiber.dist(j, a).total_cmp(&fiber.dist(j, b)).then(a.cmp(&b)));
            order.truncate(cap);
            order
        })
        .collect();
    for j in 0..n {
        for y in nbrs[j].clone() {
            if !nbrs[y].contains(&j) {
                nbrs[y].push(j);
            }
        }
    }
    nbrs
}

/// Discrete warped product `B ×_f F` with measure `f^N dr ⊗ m_F`.
///
/// `nodes` are increasing base coordinates and `f` the warping function
/// sampled there. Distances are shortest paths in a product graph whose edge
/// `(r_a, x) → (r_b, y)` costs `√(Δr² + f̄² d_F(x,y)²)` with `f̄` the mean of
/// `f` over `[r_a, r_b]`. An endpoint where `f` vanishes collapses to one atom.
pub fn warped_product(
    nodes: &[f64],
    f: &[f64],
    fiber: &FiniteMMS,
    exponent: f64,
    opts: &WarpedOptions,
) -> Result<FiniteMMS> {
    let nb = nodes.len();
    if nb < 2 || f.len() != nb {
        return Err(Error::InvalidInput(format!(
            "warped product needs >= 2 base nodes with one warp sample each, got {nb} and {}",
            f.len()
        )));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("base nodes must be strictly increasing".into()));
    }
    if f.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("warping function must be finite and >= 0".into()));
    }
    if let Some(i) = (1..nb - 1).find(|&i| f[i] == 0.0) {
        return Err(Error::InvalidInput(format!(
            "warping function vanishes at interior node {i}"
        )));
    }
    if fiber.is_empty() {
        return Err(Error::InvalidInput("fiber has no atoms".into()));
    }
    let nf = fiber.len();
    let collapse_lo = f[0] == 0.0;
    let collapse_hi = f[nb - 1] == 0.0;

    // graph node of each (base, fiber) pair
    let mut id = vec![0usize; nb * nf];
    let mut labels = Vec::new();
    let mut weight = Vec::new();
    let width = |i: usize| {
        let lo = if i == 0 { nodes[0] } else { 0.5 * (nodes[i - 1] + nodes[i]) };
        let hi = if i == nb - 1 { nodes[nb - 1] } else { 0.5 * (nodes[i] + nodes[i + 1]) };
        hi - lo
    };
    for i in 0..nb {
        let cell = f[i].powf(exponent) * width(i);
        let collapsed = (i == 0 && collapse_lo) || (i == nb - 1 && collapse_hi);
        if collapsed {
            let k = labels.len();
            labels.push(format!("pole{i}"));
            weight.push(if exponent > 0.0 { 0.0 } else { cell * fiber.total_mass() });
            id[i * nf..(i + 1) * nf].iter_mut().for_each(|v| *v = k);
        } else {
            for j in 0..nf {
                id[i * nf + j] = labels.len();
                labels.push(format!("b{i}/{}", fiber.labels()[j]));
                weight.push(cell * fiber.weight(j));
            }
        }
    }

    // trapezoid prefix integral of f for the mean warp over a radial jump
    let mut integral = vec![0.0; nb];
    for i in 1..nb {
        integral[i] = integral[i - 1] + 0.5 * (f[i - 1] + f[i]) * (nodes[i] - nodes[i - 1]);
    }
    let nbrs = nearest_neighbours(fiber, opts.hop_cap);

    let mut graph: UnGraph<(), f64> = UnGraph::with_capacity(labels.len(), 0);
    for _ in 0..labels.len() {
        graph.add_node(());
    }
    let mut add = |a: usize, b: usize, len: f64| {
        if a != b {
            graph.add_edge(NodeIndex::new(a), NodeIndex::new(b), len);
        }
    };
    for i in 0..nb {
        for step in 0..=opts.radial_reach.max(1) {
            let i2 = i + step;
            if i2 >= nb {
                break;
            }
            let dr = nodes[i2] - nodes[i];
            let fbar = if step == 0 { f[i] } else { (integral[i2] - integral[i]) / dr };
            for j in 0..nf {
                let a = id[i * nf + j];
                if step > 0 {
                    add(a, id[i2 * nf + j], dr);
                }
                for &y in &nbrs[j] {
                    if step == 0 && y < j {
                        continue;
                    }
                    let df = fbar * fiber.dist(j, y);
                    add(a, id[i2 * nf + y], (dr * dr + df * df).sqrt());
                }
            }
        }
    }

    let n = labels.len();
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|src| {
            let reached = dijkstra(&graph, NodeIndex::new(src), None, |e| *e.weight());
            let mut row = vec![0.0; n];
            for (dst, slot) in row.iter_mut().enumerate() {
                *slot = *reached.get(&NodeIndex::new(dst)).ok_or(Error::Disconnected(dst))?;
            }
            Ok(row)
        })
        .collect();
    let mut dist = Vec::with_capacity(n * n);
    for row in rows {
        dist.extend(row?);
    }
    // Dijkstra sums edges in path order, so d(a,b) and d(b,a) can differ in
    // the last ulp; symmetrize.
    for a in 0..n {
        for b in a + 1..n {
            let m = dist[a * n + b].min(dist[b * n + a]);
            dist[a * n + b] = m;
            dist[b * n + a] = m;
        }
    }
    FiniteMMS::from_flat(labels, dist, weight)
}

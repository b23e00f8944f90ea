//! Network simplex for the transportation problem `min Σ c_st x_st` with row
//! sums `supply` and column sums `demand`.
//!
//! The network has one node per source and sink plus a root. Start basis: the
//! artificial arcs `s → root` and `root → t` with a big-M cost. Leaving arcs
//! follow Cunningham's strongly feasible rule, which rules out cycling on
//! degenerate pivots.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TransportSolution {
    /// `(source, sink, amount)` for every positive basic flow.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// Node potentials; `p[t] − p[s]` is the dual price of moving a unit.
    pub source_potentials: Vec<f64>,
    pub sink_potentials: Vec<f64>,
    /// `max(0, −min reduced cost)` over all arcs.
    pub dual_residual: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy)]
enum ArcKind {
    Real,
    Artificial,
}

#[derive(Debug, Clone, Copy)]
struct TreeArc {
    tail: usize,
    head: usize,
    cost: f64,
    flow: f64,
    kind: ArcKind,
}

struct Tree {
    arcs: Vec<TreeArc>,
    incident: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    root: usize,
}

impl Tree {
    /// Recomputes parents, depths and potentials by a walk from the root;
    /// `p[head] = p[tail] + cost` on every tree arc.
    fn rebuild(&mut self) {
        let n = self.incident.len();
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        self.depth[self.root] = 0;
        self.potential[self.root] = 0.0;
        while let Some(v) = stack.pop() {
            for &a in &self.incident[v] {
                let arc = self.arcs[a];
                let w = if arc.tail == v { arc.head } else { arc.tail };
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                self.parent[w] = v;
                self.parent_arc[w] = a;
                self.depth[w] = self.depth[v] + 1;
                self.potential[w] = if arc.tail == v {
                    self.potential[v] + arc.cost
                } else {
                    self.potential[v] - arc.cost
                };
                stack.push(w);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis is not a spanning tree");
    }

    fn detach(&mut self, a: usize) {
        let TreeArc { tail, head, .. } = self.arcs[a];
        self.incident[tail].retain(|&x| x != a);
        self.incident[head].retain(|&x| x != a);
    }

    fn attach(&mut self, a: usize) {
        let TreeArc { tail, head, .. } = self.arcs[a];
        self.incident[tail].push(a);
        self.incident[head].push(a);
    }
}

/// Solves the balanced transportation problem. `cost` is row-major
/// `supply.len() × demand.len()`, nonnegative; all supplies and demands must
/// be positive and have equal totals.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (ns, nt) = (supply.len(), demand.len());
    if ns == 0 || nt == 0 {
        return Err(Error::Transport("empty marginal".into()));
    }
    if cost.len() != ns * nt {
        return Err(Error::Transport(format!("cost has {} entries for {ns}x{nt}", cost.len())));
    }
    if supply.iter().chain(demand).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Transport("supplies and demands must be positive".into()));
    }
    if cost.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::Transport("costs must be finite and nonnegative".into()));
    }
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - td).abs() > 1e-12 * ts.max(td) * (ns + nt) as f64 {
        return Err(Error::Transport(format!("unbalanced marginals: {ts} vs {td}")));
    }

    let max_cost = cost.iter().copied().fold(0.0f64, f64::max);
    // any path cost is below (ns + nt)·max_cost, so artificial arcs price out
    let big_m = if max_cost > 0.0 { max_cost * (ns + nt + 1) as f64 } else { 1.0 };
    let root = ns + nt;
    let n_nodes = ns + nt + 1;
    let mut arcs = Vec::with_capacity(ns + nt);
    for (s, &v) in supply.iter().enumerate() {
        arcs.push(TreeArc { tail: s, head: root, cost: big_m, flow: v, kind: ArcKind::Artificial });
    }
    for (t, &v) in demand.iter().enumerate() {
        arcs.push(TreeArc { tail: root, head: ns + t, cost: big_m, flow: v, kind: ArcKind::Artificial });
    }
    let mut tree = Tree {
        arcs,
        incident: vec![Vec::new(); n_nodes],
        parent: vec![usize::MAX; n_nodes],
        parent_arc: vec![usize::MAX; n_nodes],
        depth: vec![0; n_nodes],
        potential: vec![0.0; n_nodes],
        root,
    };
    for a in 0..tree.arcs.len() {
        tree.attach(a);
    }
    tree.rebuild();

    let tol = 1e-12 * max_cost;
    let n_arcs = ns * nt;
    let block = ((n_arcs as f64).sqrt() as usize).max(64).min(n_arcs);
    let mut cursor = 0usize;
    let mut pivots = 0usize;
    let max_pivots = 50 * n_arcs + 10 * n_nodes + 1000;

    loop {
        // block pricing: best candidate in the first block that has one
        let mut entering = None;
        let mut scanned = 0;
        while scanned < n_arcs {
            let mut best = -tol;
            let end = (scanned + block).min(n_arcs);
            for k in scanned..end {
                let idx = (cursor + k) % n_arcs;
                let (s, t) = (idx / nt, idx % nt);
                let rc = cost[idx] + tree.potential[s] - tree.potential[ns + t];
                if rc < best {
                    best = rc;
                    entering = Some(idx);
                }
            }
            scanned = end;
            if entering.is_some() {
                cursor = (cursor + scanned) % n_arcs;
                break;
            }
        }
        let Some(idx) = entering else { break };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Transport(format!("no convergence after {pivots} pivots")));
        }
        let (s, t) = (idx / nt, ns + idx % nt);
        pivot(&mut tree, s, t, cost[idx]);
    }

    if let Some(a) = tree.arcs.iter().find(|a| matches!(a.kind, ArcKind::Artificial) && a.flow > 1e-12 * ts) {
        return Err(Error::Transport(format!("artificial arc keeps flow {}", a.flow)));
    }
    let mut dual_residual: f64 = 0.0;
    for s in 0..ns {
        for t in 0..nt {
            let rc = cost[s * nt + t] + tree.potential[s] - tree.potential[ns + t];
            dual_residual = dual_residual.max(-rc);
        }
    }
    let flows: Vec<(usize, usize, f64)> = tree
        .arcs
        .iter()
        .filter(|a| matches!(a.kind, ArcKind::Real) && a.flow > 0.0)
        .map(|a| (a.tail, a.head - ns, a.flow))
        .collect();
    let total: f64 = flows.iter().map(|&(s, t, x)| x * cost[s * nt + t]).sum();
    Ok(TransportSolution {
        flows,
        cost: total,
        source_potentials: tree.potential[..ns].to_vec(),
        sink_potentials: tree.potential[ns..ns + nt].to_vec(),
        dual_residual,
        pivots,
    })
}

/// Adds arc `s → t`, pushes flow around the cycle it closes and drops the
/// leaving arc chosen by the strongly feasible rule.
fn pivot(tree: &mut Tree, s: usize, t: usize, cost: f64) {
    // paths from both ends up to the join
    let (mut a, mut b) = (s, t);
    let mut s_path = Vec::new();
    let mut t_path = Vec::new();
    while a != b {
        if tree.depth[a] >= tree.depth[b] {
            s_path.push(a);
            a = tree.parent[a];
        } else {
            t_path.push(b);
            b = tree.parent[b];
        }
    }
    // Cycle in flow direction: join ⇒ s (down), s → t, t ⇒ join (up). Each
    // tree edge is named by its lower node; it is forward when its direction
    // agrees with the traversal.
    let mut order: Vec<(usize, bool)> = Vec::with_capacity(s_path.len() + t_path.len());
    for &v in s_path.iter().rev() {
        let arc = tree.arcs[tree.parent_arc[v]];
        order.push((v, arc.head == v));
    }
    for &v in &t_path {
        let arc = tree.arcs[tree.parent_arc[v]];
        order.push((v, arc.tail == v));
    }
    let mut theta = f64::INFINITY;
    for &(v, forward) in &order {
        if !forward {
            theta = theta.min(tree.arcs[tree.parent_arc[v]].flow);
        }
    }
    assert!(theta.is_finite(), "unbounded transport cycle with nonnegative costs");
    // last blocking arc along the cycle
    let mut leave = None;
    for (pos, &(v, forward)) in order.iter().enumerate() {
        if !forward && tree.arcs[tree.parent_arc[v]].flow == theta {
            leave = Some(pos);
        }
    }
    let leave_pos = leave.expect("a blocking arc exists");
    for &(v, forward) in &order {
        let arc = &mut tree.arcs[tree.parent_arc[v]];
        if forward {
            arc.flow += theta;
        } else {
            arc.flow -= theta;
        }
    }
    let leaving = tree.parent_arc[order[leave_pos].0];
    tree.arcs[leaving].flow = 0.0;
    tree.detach(leaving);
    tree.arcs[leaving] = TreeArc { tail: s, head: t, cost, flow: theta, kind: ArcKind::Real };
    tree.attach(leaving);
    tree.rebuild();
}

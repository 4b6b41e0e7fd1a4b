//! Primal network simplex for uncapacitated min-cost flow.
//!
//! The spanning tree is rooted at an extra node joined to every real node by
//! an artificial arc. Phase 1 prices artificial arcs at 1 and real arcs at 0;
//! phase 2 freezes the artificial arcs at their residual flow (which may only
//! decrease) and prices the real arcs. No big-M constant is involved.

use alloc::vec::Vec;

use super::SolverConfig;
use crate::error::bail;
use crate::{CoreError, Result, SolverStats};

const NONE: usize = usize::MAX;

/// Flows below this are treated as a zero step when counting degenerate pivots.
const DEGENERATE_STEP: f64 = 1e-15;

pub(crate) struct Network {
    pub num_nodes: usize,
    /// Positive for sources, negative for sinks.
    pub supply: Vec<f64>,
    /// `(from, to, cost)`.
    pub arcs: Vec<(usize, usize, f64)>,
}

pub(crate) struct Flow {
    pub flow: Vec<f64>,
    /// Node potentials with `cost + pot[from] − pot[to] ≥ 0` on every arc
    /// and `= 0` on arcs carrying flow.
    pub potential: Vec<f64>,
    pub stats: SolverStats,
}

struct Tree {
    root: usize,
    from: Vec<usize>,
    to: Vec<usize>,
    upper: Vec<f64>,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    queue: Vec<usize>,
    u_side: Vec<usize>,
    v_side: Vec<usize>,
}

impl Tree {
    /// Recomputes parent pointers, depths and potentials from the tree arcs.
    fn rebuild(&mut self, cost: &[f64]) -> Result<()> {
        self.depth.iter_mut().for_each(|d| *d = NONE);
        self.queue.clear();
        self.queue.push(self.root);
        self.depth[self.root] = 0;
        self.pot[self.root] = 0.0;
        self.parent[self.root] = NONE;
        self.parent_arc[self.root] = NONE;
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for &a in &self.adj[u] {
                let forward = self.from[a] == u;
                let w = if forward { self.to[a] } else { self.from[a] };
                if self.depth[w] != NONE {
                    continue;
                }
                self.depth[w] = self.depth[u] + 1;
                self.parent[w] = u;
                self.parent_arc[w] = a;
                self.pot[w] = if forward { self.pot[u] + cost[a] } else { self.pot[u] - cost[a] };
                self.queue.push(w);
            }
        }
        if self.queue.len() != self.depth.len() {
            bail!(Internal, "spanning tree lost connectivity");
        }
        Ok(())
    }

    fn run_phase(&mut self, cost: &[f64], cfg: &SolverConfig, stats: &mut SolverStats, dimension: usize) -> Result<()> {
        self.rebuild(cost)?;
        let threshold = cfg.bland_threshold(dimension);
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= threshold;

            let mut entering = NONE;
            let mut best = -cfg.optimality_tol;
            for a in 0..cost.len() {
                if self.in_tree[a] || self.upper[a] <= self.flow[a] {
                    continue;
                }
                let rc = cost[a] + self.pot[self.from[a]] - self.pot[self.to[a]];
                if rc < best {
                    entering = a;
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            if entering == NONE {
                return Ok(());
            }
            if stats.iterations >= cfg.max_iterations {
                return Err(CoreError::IterationLimit(stats.iterations));
            }
            stats.iterations += 1;

            let e = entering;
            let (u, v) = (self.from[e], self.to[e]);
            self.u_side.clear();
            self.v_side.clear();
            let (mut a, mut b) = (u, v);
            while a != b {
                if self.depth[a] >= self.depth[b] {
                    self.u_side.push(a);
                    a = self.parent[a];
                } else {
                    self.v_side.push(b);
                    b = self.parent[b];
                }
            }

            // Walk the cycle in flow direction starting at the apex:
            // apex -> u, then e, then v -> apex.
            let mut delta = f64::INFINITY;
            let mut leaving = NONE;
            let mut leaving_forward = true;
            let mut consider = |arc: usize, forward: bool, residual: f64| {
                let residual = residual.max(0.0);
                let take = if bland {
                    residual < delta || (residual == delta && arc < leaving)
                } else {
                    residual <= delta
                };
                if take {
                    delta = residual;
                    leaving = arc;
                    leaving_forward = forward;
                }
            };
            for &w in self.u_side.iter().rev() {
                let arc = self.parent_arc[w];
                let forward = self.to[arc] == w;
                let res = if forward { self.upper[arc] - self.flow[arc] } else { self.flow[arc] };
                consider(arc, forward, res);
            }
            consider(e, true, self.upper[e] - self.flow[e]);
            for &w in &self.v_side {
                let arc = self.parent_arc[w];
                let forward = self.from[arc] == w;
                let res = if forward { self.upper[arc] - self.flow[arc] } else { self.flow[arc] };
                consider(arc, forward, res);
            }
            if delta == f64::INFINITY {
                return Err(CoreError::Unbounded);
            }
            if leaving == e {
                bail!(Internal, "entering arc blocked by its own bound");
            }

            if delta > 0.0 {
                self.flow[e] += delta;
                for &w in &self.u_side {
                    let arc = self.parent_arc[w];
                    if self.to[arc] == w {
                        self.flow[arc] += delta;
                    } else {
                        self.flow[arc] -= delta;
                    }
                }
                for &w in &self.v_side {
                    let arc = self.parent_arc[w];
                    if self.from[arc] == w {
                        self.flow[arc] += delta;
                    } else {
                        self.flow[arc] -= delta;
                    }
                }
            }
            self.flow[leaving] = if leaving_forward { self.upper[leaving] } else { 0.0 };

            stats.pivots += 1;
            if bland {
                stats.bland_pivots += 1;
            }
            if delta < DEGENERATE_STEP {
                stats.degenerate_pivots += 1;
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            self.in_tree[e] = true;
            self.in_tree[leaving] = false;
            for node in [self.from[leaving], self.to[leaving]] {
                let list = &mut self.adj[node];
                if let Some(pos) = list.iter().position(|&x| x == leaving) {
                    list.swap_remove(pos);
                }
            }
            self.adj[u].push(e);
            self.adj[v].push(e);
            self.rebuild(cost)?;
        }
    }
}

pub(crate) fn solve(net: &Network, cfg: &SolverConfig) -> Result<Flow> {
    cfg.validate()?;
    let n = net.num_nodes;
    let root = n;
    let real = net.arcs.len();
    let total = real + n;

    let mut from = Vec::with_capacity(total);
    let mut to = Vec::with_capacity(total);
    let mut cost2 = Vec::with_capacity(total);
    for &(f, t, c) in &net.arcs {
        debug_assert!(f < n && t < n && c.is_finite());
        from.push(f);
        to.push(t);
        cost2.push(c);
    }
    let mut flow = alloc::vec![0.0; total];
    let mut in_tree = alloc::vec![false; total];
    let mut adj: Vec<Vec<usize>> = alloc::vec![Vec::new(); n + 1];
    for (v, &s) in net.supply.iter().enumerate() {
        let a = real + v;
        if s >= 0.0 {
            from.push(v);
            to.push(root);
            flow[a] = s;
        } else {
            from.push(root);
            to.push(v);
            flow[a] = -s;
        }
        cost2.push(0.0);
        in_tree[a] = true;
        adj[v].push(a);
        adj[root].push(a);
    }

    let mut tree = Tree {
        root,
        from,
        to,
        upper: alloc::vec![f64::INFINITY; total],
        flow,
        in_tree,
        adj,
        parent: alloc::vec![NONE; n + 1],
        parent_arc: alloc::vec![NONE; n + 1],
        depth: alloc::vec![NONE; n + 1],
        pot: alloc::vec![0.0; n + 1],
        queue: Vec::with_capacity(n + 1),
        u_side: Vec::new(),
        v_side: Vec::new(),
    };
    let mut stats = SolverStats::default();

    let mut cost1 = alloc::vec![0.0; total];
    cost1[real..].iter_mut().for_each(|c| *c = 1.0);
    tree.run_phase(&cost1, cfg, &mut stats, n)?;

    let residual: f64 = tree.flow[real..].iter().sum();
    let scale: f64 = net.supply.iter().filter(|s| **s > 0.0).sum::<f64>().max(1.0);
    if residual > cfg.feasibility_tol * scale {
        return Err(CoreError::Infeasible);
    }
    for a in real..total {
        tree.upper[a] = if tree.in_tree[a] { tree.flow[a] } else { 0.0 };
    }
    tree.run_phase(&cost2, cfg, &mut stats, n)?;

    tree.flow.truncate(real);
    tree.pot.truncate(n);
    Ok(Flow { flow: tree.flow, potential: tree.pot, stats })
}

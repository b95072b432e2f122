//! Primal network simplex for dense transportation problems.
//!
//! The basis is a spanning tree rooted at an artificial node; artificial arcs carry a
//! big-M cost so that any feasible real solution beats them. Leaving arcs follow the
//! strongly feasible rule, which rules out cycling in exact arithmetic.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub struct Solution {
    /// (source, sink, mass) for every positive flow.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

struct Tree {
    parent: Vec<usize>,
    pred: Vec<usize>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    adj: Vec<Vec<(usize, usize)>>,
}

/// Minimizes Σ c_ij x_ij subject to row sums `a`, column sums `b`, x ≥ 0.
pub fn solve(a: &[f64], b: &[f64], cost: &[f64]) -> Result<Solution> {
    let m = a.len();
    let n = b.len();
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch { expected: m * n, got: cost.len() });
    }
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    if (sa - sb).abs() > 1e-9 * sa.abs().max(1.0) {
        return Err(Error::WeightSum { sum: sb / sa });
    }
    let n_real = m * n;
    let nodes = m + n + 1;
    let root = m + n;
    let cmax = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let big = 1.0 + 2.0 * cmax.max(1.0) * (m + n) as f64;
    let eps = 1e-12 * cmax.max(1.0);

    let arcs = n_real + m + n;
    let mut src = vec![0usize; arcs];
    let mut dst = vec![0usize; arcs];
    let mut c = vec![0.0; arcs];
    let mut flow = vec![0.0; arcs];
    for i in 0..m {
        for j in 0..n {
            let e = i * n + j;
            src[e] = i;
            dst[e] = m + j;
            c[e] = cost[e];
        }
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for k in 0..m + n {
        let e = n_real + k;
        c[e] = big;
        // zero-flow arcs must point toward the root for the initial tree to be strongly feasible
        if k < m || b[k - m] <= 0.0 {
            src[e] = k;
            dst[e] = root;
            flow[e] = if k < m { a[k] } else { 0.0 };
        } else {
            src[e] = root;
            dst[e] = k;
            flow[e] = b[k - m];
        }
        adj[k].push((root, e));
        adj[root].push((k, e));
    }
    let mut tree = Tree {
        parent: vec![usize::MAX; nodes],
        pred: vec![usize::MAX; nodes],
        depth: vec![0; nodes],
        pi: vec![0.0; nodes],
        adj,
    };
    rebuild(&mut tree, root, &src, &dst, &c);

    let block = ((n_real as f64).sqrt().ceil() as usize).max(16).min(n_real.max(1));
    let mut next = 0usize;
    let max_pivots = 50 * (n_real + nodes) + 10_000;
    let mut pivots = 0usize;
    let mut upath: Vec<usize> = Vec::new();
    let mut vpath: Vec<usize> = Vec::new();
    loop {
        // block search for the entering arc
        let mut entering = usize::MAX;
        let mut best = -eps;
        let mut scanned = 0usize;
        while scanned < n_real {
            let end = (scanned + block).min(n_real);
            for _ in scanned..end {
                let e = next;
                next += 1;
                if next == n_real {
                    next = 0;
                }
                let rc = c[e] + tree.pi[src[e]] - tree.pi[dst[e]];
                if rc < best {
                    best = rc;
                    entering = e;
                }
            }
            scanned = end;
            if entering != usize::MAX {
                break;
            }
        }
        if entering == usize::MAX {
            break;
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("network simplex exceeded {max_pivots} pivots")));
        }
        let (u, v) = (src[entering], dst[entering]);
        // paths to the join node, each listed from the endpoint upward
        upath.clear();
        vpath.clear();
        let (mut x, mut y) = (u, v);
        while tree.depth[x] > tree.depth[y] {
            upath.push(x);
            x = tree.parent[x];
        }
        while tree.depth[y] > tree.depth[x] {
            vpath.push(y);
            y = tree.parent[y];
        }
        while x != y {
            upath.push(x);
            vpath.push(y);
            x = tree.parent[x];
            y = tree.parent[y];
        }
        // flow goes u → v along the entering arc, then v ↑ join ↓ u through the tree
        let v_decreases = |node: usize| -> bool { dst[tree.pred[node]] == node };
        let u_decreases = |node: usize| -> bool { src[tree.pred[node]] == node };
        let mut delta = f64::INFINITY;
        for &w in &vpath {
            if v_decreases(w) {
                delta = delta.min(flow[tree.pred[w]]);
            }
        }
        for &w in &upath {
            if u_decreases(w) {
                delta = delta.min(flow[tree.pred[w]]);
            }
        }
        if !delta.is_finite() {
            return Err(Error::Solver("unbounded pivot".into()));
        }
        let tol = 1e-14 * sa.abs().max(1.0);
        // last blocking arc along the cycle orientation starting at the join node
        let mut leaving_node = usize::MAX;
        for &w in vpath.iter().rev() {
            if v_decreases(w) && flow[tree.pred[w]] - delta <= tol {
                leaving_node = w;
                break;
            }
        }
        if leaving_node == usize::MAX {
            for &w in upath.iter() {
                if u_decreases(w) && flow[tree.pred[w]] - delta <= tol {
                    leaving_node = w;
                    break;
                }
            }
        }
        if leaving_node == usize::MAX {
            return Err(Error::Solver("no leaving arc found".into()));
        }
        if delta > 0.0 {
            for &w in &vpath {
                let e = tree.pred[w];
                if v_decreases(w) {
                    flow[e] -= delta;
                } else {
                    flow[e] += delta;
                }
            }
            for &w in &upath {
                let e = tree.pred[w];
                if u_decreases(w) {
                    flow[e] -= delta;
                } else {
                    flow[e] += delta;
                }
            }
            flow[entering] += delta;
        }
        let leaving = tree.pred[leaving_node];
        flow[leaving] = flow[leaving].max(0.0);
        let (p, q) = (src[leaving], dst[leaving]);
        remove_edge(&mut tree.adj[p], leaving);
        remove_edge(&mut tree.adj[q], leaving);
        tree.adj[u].push((v, entering));
        tree.adj[v].push((u, entering));
        rebuild(&mut tree, root, &src, &dst, &c);
    }
    let artificial: f64 = flow[n_real..].iter().sum();
    if artificial > 1e-9 * sa.abs().max(1.0) {
        return Err(Error::Solver(format!("artificial flow {artificial} left at optimum")));
    }
    let mut flows = Vec::new();
    let mut total = 0.0;
    for e in 0..n_real {
        if flow[e] > 0.0 {
            flows.push((src[e], dst[e] - m, flow[e]));
            total += flow[e] * c[e];
        }
    }
    Ok(Solution { flows, cost: total })
}

fn remove_edge(list: &mut Vec<(usize, usize)>, arc: usize) {
    if let Some(k) = list.iter().position(|&(_, e)| e == arc) {
        list.swap_remove(k);
    }
}

fn rebuild(tree: &mut Tree, root: usize, src: &[usize], dst: &[usize], c: &[f64]) {
    let mut queue = VecDeque::new();
    tree.parent[root] = root;
    tree.pred[root] = usize::MAX;
    tree.depth[root] = 0;
    tree.pi[root] = 0.0;
    queue.push_back(root);
    while let Some(x) = queue.pop_front() {
        for k in 0..tree.adj[x].len() {
            let (y, e) = tree.adj[x][k];
            if y == tree.parent[x] && e == tree.pred[x] {
                continue;
            }
            tree.parent[y] = x;
            tree.pred[y] = e;
            tree.depth[y] = tree.depth[x] + 1;
            // reduced cost c + π_src − π_dst vanishes on tree arcs
            tree.pi[y] = if src[e] == x { tree.pi[x] + c[e] } else { tree.pi[x] - c[e] };
            debug_assert!(src[e] == y || dst[e] == y);
            queue.push_back(y);
        }
    }
}

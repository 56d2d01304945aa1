//! Test-side reference solvers and fixtures.

#![allow(dead_code)]

use std::collections::VecDeque;

use tvrelax::{GridSpec, ScalarField};

/// Exact binary minimizer of `sum g u h^d + beta sum_edges w |u_i - u_j|`
/// by a minimum s-t cut (Edmonds-Karp). Independent of the grid operators:
/// neighbours and weights are spelled out here.
pub fn min_cut_min(g: &ScalarField, beta: f64) -> (ScalarField, f64) {
    let grid = *g.grid();
    let n = grid.len();
    let (s, t) = (n, n + 1);
    let mut net = Network::new(n + 2);
    let hd = grid.cell_volume();
    let mut offset = 0.0;
    for (i, &gi) in g.values().iter().enumerate() {
        let a = gi * hd;
        if a > 0.0 {
            net.add(i, t, a, 0.0);
        } else if a < 0.0 {
            // paying a when u_i = 1 equals paying -a when u_i = 0, shifted
            net.add(s, i, -a, 0.0);
            offset += a;
        }
    }
    for (i, j, w) in neighbours(&grid, beta) {
        net.add(i, j, w, w);
    }
    let flow = net.max_flow(s, t);
    let side = net.source_side(s);
    let u = ScalarField::from_fn(grid, |i| if side[i] { 1.0 } else { 0.0 });
    (u, flow + offset)
}

/// Neighbour pairs with weight `beta h^d / h_axis`.
pub fn neighbours(grid: &GridSpec, beta: f64) -> Vec<(usize, usize, f64)> {
    let dims = grid.dims();
    let hd = grid.cell_volume();
    let mut out = Vec::new();
    if dims.len() == 1 {
        let w = beta * hd / grid.spacing()[0];
        out.extend((0..dims[0] - 1).map(|i| (i, i + 1, w)));
        return out;
    }
    let (rows, cols) = (dims[0], dims[1]);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if r + 1 < rows {
                out.push((i, i + cols, beta * hd / grid.spacing()[0]));
            }
            if c + 1 < cols {
                out.push((i, i + 1, beta * hd / grid.spacing()[1]));
            }
        }
    }
    out
}

struct Network {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    /// Arc pair stored at `e` and `e ^ 1`.
    fn add(&mut self, a: usize, b: usize, forward: f64, backward: f64) {
        self.adj[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(forward);
        self.adj[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(backward);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(v) = queue.pop_front() {
                for &e in &self.adj[v] {
                    let w = self.to[e];
                    if !seen[w] && self.cap[e] > 1e-15 {
                        seen[w] = true;
                        via[w] = e;
                        queue.push_back(w);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            total += push;
        }
    }

    fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &e in &self.adj[v] {
                let w = self.to[e];
                if !seen[w] && self.cap[e] > 1e-15 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// Strips the `timing` object from a JSON report.
pub fn without_timing(text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

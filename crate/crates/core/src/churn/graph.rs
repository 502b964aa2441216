//! Unweighted shortest paths and centralities on small dense-index graphs.

use std::collections::VecDeque;

/// Adjacency lists over nodes `0..n`. Undirected graphs store both arcs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    out: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { out: vec![Vec::new(); n] }
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    /// Adds `u -> v` once; duplicate arcs and self-loops are ignored.
    pub fn add_arc(&mut self, u: usize, v: usize) {
        if u != v && !self.out[u].contains(&v) {
            self.out[u].push(v);
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.add_arc(u, v);
        self.add_arc(v, u);
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn reversed(&self) -> Graph {
        let mut g = Graph::new(self.len());
        for (u, vs) in self.out.iter().enumerate() {
            for &v in vs {
                g.out[v].push(u);
            }
        }
        g
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Closeness from incoming distances: `r / Σ d(v, u)` over the `r` nodes
    /// that reach `u`. Unreachable nodes are left out; 0 when nothing reaches `u`.
    pub fn closeness(&self) -> Vec<f64> {
        let rev = self.reversed();
        (0..self.len())
            .map(|u| {
                let (mut reach, mut total) = (0usize, 0usize);
                for d in rev.bfs(u).into_iter().flatten() {
                    if d > 0 {
                        reach += 1;
                        total += d;
                    }
                }
                if total == 0 {
                    0.0
                } else {
                    reach as f64 / total as f64
                }
            })
            .collect()
    }

    /// Brandes betweenness normalized by `(n − 1)(n − 2)`.
    ///
    /// For an undirected graph stored as symmetric arcs this equals the usual
    /// undirected normalization `2 / ((n − 1)(n − 2))` over unordered pairs.
    pub fn betweenness(&self) -> Vec<f64> {
        let n = self.len();
        let mut cb = vec![0.0; n];
        for s in 0..n {
            let mut stack = Vec::with_capacity(n);
            let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut sigma = vec![0.0f64; n];
            let mut dist = vec![-1i64; n];
            sigma[s] = 1.0;
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                stack.push(v);
                for &w in &self.out[v] {
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            let mut delta = vec![0.0; n];
            while let Some(w) = stack.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    cb[w] += delta[w];
                }
            }
        }
        if n > 2 {
            let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
            for c in &mut cb {
                *c *= scale;
            }
        } else {
            cb.iter_mut().for_each(|c| *c = 0.0);
        }
        cb
    }
}

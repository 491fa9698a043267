//! Bundle-space metrics and level importance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::bundles::Bundle;
use crate::graph::LevelGraph;
use crate::spaces::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Geodesic distance on the total space, ignoring the base.
    #[default]
    Intrinsic,
    /// Fiber distance plus the shortest base-graph route between the nearest
    /// base vertices.
    QuotientSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ImportanceKind {
    Uniform,
    Exponential,
    EpsilonGreedy { epsilon: f64 },
}

impl ImportanceKind {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            ImportanceKind::EpsilonGreedy { epsilon } if !(epsilon > 0.0 && epsilon < 1.0) => {
                Err(format!("epsilon = {epsilon} is outside (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ImportanceKind::Uniform => "uniform",
            ImportanceKind::Exponential => "exponential",
            ImportanceKind::EpsilonGreedy { .. } => "greedy",
        }
    }
}

/// Share of growth assigned to level `k` (1-based) of `levels`:
/// `eps^(K-1)` for the first level, `eps^(K-k) - eps^(K-k+1)` otherwise.
pub fn greedy_share(epsilon: f64, k: usize, levels: usize) -> f64 {
    assert!(k >= 1 && k <= levels, "level {k} outside 1..={levels}");
    if k == 1 {
        epsilon.powi(levels as i32 - 1)
    } else {
        let e = (levels - k) as i32;
        epsilon.powi(e) - epsilon.powi(e + 1)
    }
}

/// Importance of level `k` (1-based) holding `vertices` vertices in a space of
/// dimension `dim`, out of `levels` levels. Higher is grown first.
pub fn importance(kind: ImportanceKind, k: usize, vertices: usize, dim: usize, levels: usize) -> f64 {
    let n = vertices as f64;
    match kind {
        ImportanceKind::Uniform => 1.0 / (n + 1.0),
        ImportanceKind::Exponential => 1.0 / (n.powf(1.0 / dim.max(1) as f64) + 1.0),
        ImportanceKind::EpsilonGreedy { epsilon } => {
            1.0 / (n / greedy_share(epsilon, k, levels) + 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    g: f64,
    v: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then(other.v.cmp(&self.v))
    }
}

/// Shortest-path length between two graph vertices (A* with the space metric
/// as heuristic). Infinite when disconnected.
pub fn graph_distance(graph: &LevelGraph, from: usize, to: usize) -> f64 {
    if from == to {
        return 0.0;
    }
    let space = graph.space();
    let target = graph.state(to);
    let mut best = vec![f64::INFINITY; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    best[from] = 0.0;
    heap.push(Open {
        f: space.distance(graph.state(from), target),
        g: 0.0,
        v: from,
    });
    while let Some(Open { g, v, .. }) = heap.pop() {
        if v == to {
            return g;
        }
        if g > best[v] {
            continue;
        }
        for &(w, c) in graph.neighbors(v) {
            let ng = g + c;
            if ng < best[w] {
                best[w] = ng;
                heap.push(Open {
                    f: ng + space.distance(graph.state(w), target),
                    g: ng,
                    v: w,
                });
            }
        }
    }
    f64::INFINITY
}

/// Shortest-path lengths from `from` to every vertex.
pub fn graph_distances_from(graph: &LevelGraph, from: usize) -> Vec<f64> {
    let mut best = vec![f64::INFINITY; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    best[from] = 0.0;
    heap.push(Open {
        f: 0.0,
        g: 0.0,
        v: from,
    });
    while let Some(Open { g, v, .. }) = heap.pop() {
        if g > best[v] {
            continue;
        }
        for &(w, c) in graph.neighbors(v) {
            let ng = g + c;
            if ng < best[w] {
                best[w] = ng;
                heap.push(Open { f: ng, g: ng, v: w });
            }
        }
    }
    best
}

/// Quotient-space distance between two total-space states over `base`.
/// Returns `f64::INFINITY` when the nearest base vertices are disconnected.
pub fn quotient_distance(bundle: &Bundle, base: &LevelGraph, x1: &State, x2: &State) -> f64 {
    let (b1, b2) = (bundle.project(x1), bundle.project(x2));
    let (v1, d1) = base.nearest(&b1).expect("quotient metric needs a base graph");
    let (v2, d2) = base.nearest(&b2).expect("quotient metric needs a base graph");
    if v1 == v2 {
        return bundle.total().distance(x1, x2);
    }
    let df = bundle
        .fiber()
        .distance(&bundle.project_fiber(x1), &bundle.project_fiber(x2));
    df + d1 + d2 + graph_distance(base, v1, v2)
}

/// Evaluates the chosen metric; `base` is ignored by the intrinsic metric and
/// the quotient metric falls back to it without a base.
pub fn metric(
    kind: MetricKind,
    bundle: Option<(&Bundle, &LevelGraph)>,
    space: &crate::spaces::StateSpace,
    x1: &State,
    x2: &State,
) -> f64 {
    match (kind, bundle) {
        (MetricKind::QuotientSpace, Some((b, g))) => quotient_distance(b, g, x1, x2),
        _ => space.distance(x1, x2),
    }
}

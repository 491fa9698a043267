//! Graphs and trees grown on a single bundle space.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::nn::NearestNeighbors;
use crate::spaces::{State, StateSpace};

/// Prefix sums over vertex weights, used for degree-biased vertex draws.
#[derive(Debug, Clone, Default)]
pub struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl Fenwick {
    pub fn push(&mut self, w: f64) {
        let i = self.values.len();
        self.values.push(0.0);
        self.tree.push(0.0);
        // the new node covers (i - lowbit(i+1), i]; rebuild its partial sum
        let j = i + 1;
        let low = j & j.wrapping_neg();
        let mut s = 0.0;
        let mut k = j - 1;
        while k > j - low {
            s += self.tree[k - 1];
            k -= k & k.wrapping_neg();
        }
        self.tree[i] = s;
        self.set(i, w);
    }

    pub fn set(&mut self, i: usize, w: f64) {
        let delta = w - self.values[i];
        self.values[i] = w;
        let mut j = i + 1;
        while j <= self.tree.len() {
            self.tree[j - 1] += delta;
            j += j & j.wrapping_neg();
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of the first `n` weights.
    pub fn prefix(&self, n: usize) -> f64 {
        let mut s = 0.0;
        let mut j = n;
        while j > 0 {
            s += self.tree[j - 1];
            j -= j & j.wrapping_neg();
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    /// Smallest index whose inclusive prefix sum exceeds `u`.
    pub fn find(&self, mut u: f64) -> usize {
        let n = self.tree.len();
        if n == 0 {
            return 0;
        }
        let mut pos = 0;
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= u {
                pos = next;
                u -= self.tree[next - 1];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    /// Parent links with cost-to-come telescoping along tree edges.
    Tree,
    /// Undirected roadmap; cost-to-come is the shortest-path distance from the root.
    Roadmap,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    cost: f64,
    v: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.v.cmp(&self.v))
    }
}

/// Vertices, undirected weighted edges, and cost-to-come from vertex 0.
#[derive(Debug, Clone)]
pub struct LevelGraph {
    space: StateSpace,
    mode: GraphMode,
    states: Vec<State>,
    adjacency: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize)>,
    edge_slot: HashMap<(usize, usize), usize>,
    degree_weights: Fenwick,
    cost: Vec<f64>,
    pred: Vec<Option<usize>>,
    pred_cost: Vec<f64>,
    children: Vec<Vec<usize>>,
    goals: Vec<usize>,
    index: NearestNeighbors,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl LevelGraph {
    /// A graph holding only its root (vertex 0, cost zero).
    pub fn new(space: StateSpace, mode: GraphMode, root: State) -> Self {
        let index = NearestNeighbors::new(&space);
        let mut g = LevelGraph {
            space,
            mode,
            states: Vec::new(),
            adjacency: Vec::new(),
            edges: Vec::new(),
            edge_slot: HashMap::new(),
            degree_weights: Fenwick::default(),
            cost: Vec::new(),
            pred: Vec::new(),
            pred_cost: Vec::new(),
            children: Vec::new(),
            goals: Vec::new(),
            index,
        };
        g.push_vertex(root);
        g.cost[0] = 0.0;
        g
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn vertex_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn state(&self, v: usize) -> &State {
        &self.states[v]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        self.edges[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_slot.contains_key(&key(u, v))
    }

    /// Cost-to-come from the root; infinite when unreachable.
    pub fn cost(&self, v: usize) -> f64 {
        self.cost[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.pred[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Weight used for degree-biased draws, `1 / (deg + 1)`.
    pub fn degree_weights(&self) -> &Fenwick {
        &self.degree_weights
    }

    fn push_vertex(&mut self, x: State) -> usize {
        let id = self.index.insert(x.values());
        self.states.push(x);
        self.adjacency.push(Vec::new());
        self.degree_weights.push(1.0);
        self.cost.push(f64::INFINITY);
        self.pred.push(None);
        self.pred_cost.push(0.0);
        self.children.push(Vec::new());
        id
    }

    fn link(&mut self, u: usize, v: usize, c: f64) {
        let slot = self.edges.len();
        self.edges.push(key(u, v));
        self.edge_slot.insert(key(u, v), slot);
        self.adjacency[u].push((v, c));
        self.adjacency[v].push((u, c));
        self.refresh_degree(u);
        self.refresh_degree(v);
    }

    fn unlink(&mut self, u: usize, v: usize) {
        let slot = self
            .edge_slot
            .remove(&key(u, v))
            .expect("removing a missing edge");
        self.edges.swap_remove(slot);
        if slot < self.edges.len() {
            self.edge_slot.insert(self.edges[slot], slot);
        }
        self.adjacency[u].retain(|&(w, _)| w != v);
        self.adjacency[v].retain(|&(w, _)| w != u);
        self.refresh_degree(u);
        self.refresh_degree(v);
    }

    fn refresh_degree(&mut self, v: usize) {
        let w = 1.0 / (self.adjacency[v].len() as f64 + 1.0);
        self.degree_weights.set(v, w);
    }

    /// Adds an isolated vertex (roadmaps only).
    pub fn add_vertex(&mut self, x: State) -> usize {
        assert_eq!(self.mode, GraphMode::Roadmap, "trees only grow by add_child");
        self.push_vertex(x)
    }

    /// Adds `x` as a child of `parent` joined by an edge of cost `c`.
    pub fn add_child(&mut self, parent: usize, x: State, c: f64) -> usize {
        let v = self.push_vertex(x);
        match self.mode {
            GraphMode::Tree => {
                self.link(parent, v, c);
                self.pred[v] = Some(parent);
                self.pred_cost[v] = c;
                self.cost[v] = self.cost[parent] + c;
                self.children[parent].push(v);
            }
            GraphMode::Roadmap => {
                self.connect(parent, v, c);
            }
        }
        v
    }

    /// Adds the roadmap edge `u - v` and relaxes shortest-path costs.
    /// Returns false if the edge already exists.
    pub fn connect(&mut self, u: usize, v: usize, c: f64) -> bool {
        assert_eq!(self.mode, GraphMode::Roadmap, "tree edges change by reparent");
        if u == v || self.has_edge(u, v) {
            return false;
        }
        self.link(u, v, c);
        let mut heap = BinaryHeap::new();
        for (a, b) in [(u, v), (v, u)] {
            let through = self.cost[a] + c;
            if through < self.cost[b] {
                self.cost[b] = through;
                self.pred[b] = Some(a);
                self.pred_cost[b] = c;
                heap.push(HeapEntry { cost: through, v: b });
            }
        }
        while let Some(HeapEntry { cost, v: a }) = heap.pop() {
            if cost > self.cost[a] {
                continue;
            }
            for i in 0..self.adjacency[a].len() {
                let (b, w) = self.adjacency[a][i];
                let through = cost + w;
                if through < self.cost[b] {
                    self.cost[b] = through;
                    self.pred[b] = Some(a);
                    self.pred_cost[b] = w;
                    heap.push(HeapEntry { cost: through, v: b });
                }
            }
        }
        true
    }

    /// Makes `u` the tree parent of `v` with edge cost `c` and updates the
    /// costs of the whole subtree below `v`.
    pub fn reparent(&mut self, v: usize, u: usize, c: f64) {
        assert_eq!(self.mode, GraphMode::Tree, "reparent applies to trees");
        let old = self.pred[v].expect("the root has no parent");
        if old != u {
            self.unlink(old, v);
            self.children[old].retain(|&w| w != v);
            self.link(u, v, c);
            self.children[u].push(v);
            self.pred[v] = Some(u);
        } else {
            for e in self.adjacency[v].iter_mut().filter(|e| e.0 == u) {
                e.1 = c;
            }
            for e in self.adjacency[u].iter_mut().filter(|e| e.0 == v) {
                e.1 = c;
            }
        }
        self.pred_cost[v] = c;
        let mut stack = vec![v];
        while let Some(w) = stack.pop() {
            let p = self.pred[w].unwrap();
            self.cost[w] = self.cost[p] + self.pred_cost[w];
            stack.extend_from_slice(&self.children[w]);
        }
    }

    pub fn mark_goal(&mut self, v: usize) {
        if !self.goals.contains(&v) {
            self.goals.push(v);
        }
    }

    pub fn goals(&self) -> &[usize] {
        &self.goals
    }

    /// Goal vertex with the lowest finite cost-to-come (ties to the lower id).
    pub fn best_goal(&self) -> Option<(usize, f64)> {
        self.goals
            .iter()
            .map(|&g| (g, self.cost[g]))
            .filter(|(_, c)| c.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Vertex ids from the root to `v` along predecessor links.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.pred[cur] {
            out.push(p);
            cur = p;
            assert!(out.len() <= self.states.len(), "cycle in predecessor links");
        }
        out.reverse();
        out
    }

    pub fn nearest(&self, x: &State) -> Option<(usize, f64)> {
        self.index.nearest(x.values())
    }

    pub fn k_nearest(&self, x: &State, k: usize) -> Vec<(usize, f64)> {
        self.index.k_nearest(x.values(), k)
    }
}

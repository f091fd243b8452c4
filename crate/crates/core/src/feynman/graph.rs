//! Graphs as half-edges with an incidence map and an involution.

use crate::error::{Error, Result};

/// A Feynman graph. Fixed points of `involution` are tails, two-cycles are
/// edges. Tails may carry an external-slot label; automorphisms must map a
/// labeled tail to a tail with the same label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeynmanGraph {
    n_vertices: usize,
    incidence: Vec<usize>,
    involution: Vec<usize>,
    labels: Vec<Option<usize>>,
}

impl FeynmanGraph {
    pub fn new(n_vertices: usize, incidence: Vec<usize>, involution: Vec<usize>) -> Result<Self> {
        if incidence.len() != involution.len() {
            return Err(Error::Dimension("incidence and involution lengths differ".into()));
        }
        let h = incidence.len();
        if let Some(&v) = incidence.iter().find(|&&v| v >= n_vertices) {
            return Err(Error::InvalidArgument(format!("half-edge attached to missing vertex {v}")));
        }
        for (a, &b) in involution.iter().enumerate() {
            if b >= h || involution[b] != a {
                return Err(Error::InvalidArgument(format!("involution fails at half-edge {a}")));
            }
        }
        Ok(Self { n_vertices, incidence, involution, labels: vec![None; h] })
    }

    /// Attaches external-slot labels to tails (`labels[h]` for half-edge `h`).
    pub fn with_tail_labels(mut self, labels: Vec<Option<usize>>) -> Result<Self> {
        if labels.len() != self.n_half_edges() {
            return Err(Error::Dimension("one label entry per half-edge expected".into()));
        }
        for (h, l) in labels.iter().enumerate() {
            if l.is_some() && !self.is_tail(h) {
                return Err(Error::InvalidArgument(format!("half-edge {h} is not a tail")));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Path with `n` bivalent vertices and a tail at each end.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1, "chain needs a vertex");
        let incidence = (0..2 * n).map(|h| h / 2).collect();
        let mut involution: Vec<usize> = (0..2 * n).collect();
        for v in 0..n - 1 {
            involution[2 * v + 1] = 2 * v + 2;
            involution[2 * v + 2] = 2 * v + 1;
        }
        Self::new(n, incidence, involution).expect("chain is well-formed")
    }

    /// Chain whose first tail is slot 0 and last tail slot 1.
    pub fn labeled_chain(n: usize) -> Self {
        let mut labels = vec![None; 2 * n];
        labels[0] = Some(0);
        labels[2 * n - 1] = Some(1);
        Self::chain(n).with_tail_labels(labels).expect("ends are tails")
    }

    /// Polygon with `n` bivalent vertices; `cycle(1)` is a self-loop.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 1, "cycle needs a vertex");
        let incidence = (0..2 * n).map(|h| h / 2).collect();
        let mut involution = vec![0; 2 * n];
        for v in 0..n {
            let out = 2 * v + 1;
            let inc = 2 * ((v + 1) % n);
            involution[out] = inc;
            involution[inc] = out;
        }
        Self::new(n, incidence, involution).expect("cycle is well-formed")
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_half_edges(&self) -> usize {
        self.incidence.len()
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.incidence[h]
    }

    pub fn partner(&self, h: usize) -> usize {
        self.involution[h]
    }

    pub fn label(&self, h: usize) -> Option<usize> {
        self.labels[h]
    }

    pub fn is_tail(&self, h: usize) -> bool {
        self.involution[h] == h
    }

    pub fn tails(&self) -> Vec<usize> {
        (0..self.n_half_edges()).filter(|&h| self.is_tail(h)).collect()
    }

    /// Edges as `(h, σh)` with `h < σh`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n_half_edges())
            .filter(|&h| h < self.involution[h])
            .map(|h| (h, self.involution[h]))
            .collect()
    }

    pub fn half_edges_at(&self, v: usize) -> Vec<usize> {
        (0..self.n_half_edges()).filter(|&h| self.incidence[h] == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.incidence.iter().filter(|&&w| w == v).count()
    }

    /// Connected components as vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for (a, b) in self.edges() {
            let ra = find(&mut parent, self.incidence[a]);
            let rb = find(&mut parent, self.incidence[b]);
            parent[ra] = rb;
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.n_vertices {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// First Betti number `E - V + components`.
    pub fn loop_number(&self) -> usize {
        self.edges().len() + self.components().len() - self.n_vertices
    }

    /// Number of bijections onto `other` preserving incidence, involution and
    /// tail labels.
    pub fn isomorphism_count(&self, other: &Self) -> u64 {
        if self.n_vertices != other.n_vertices || self.n_half_edges() != other.n_half_edges() {
            return 0;
        }
        let isolated = |g: &Self| (0..g.n_vertices).filter(|&v| g.valence(v) == 0).count() as u64;
        let (ia, ib) = (isolated(self), isolated(other));
        if ia != ib {
            return 0;
        }
        let mut search = Search {
            a: self,
            b: other,
            map: vec![usize::MAX; self.n_half_edges()],
            used: vec![false; other.n_half_edges()],
            vmap: vec![usize::MAX; self.n_vertices],
            vused: vec![false; other.n_vertices],
        };
        search.run(0) * (1..=ia).product::<u64>()
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.isomorphism_count(other) > 0
    }

    /// `|Aut(γ)|`.
    pub fn automorphism_order(&self) -> u64 {
        self.isomorphism_count(self)
    }
}

struct Search<'g> {
    a: &'g FeynmanGraph,
    b: &'g FeynmanGraph,
    map: Vec<usize>,
    used: Vec<bool>,
    vmap: Vec<usize>,
    vused: Vec<bool>,
}

impl Search<'_> {
    fn run(&mut self, h: usize) -> u64 {
        if h == self.map.len() {
            return 1;
        }
        if self.map[h] != usize::MAX {
            return self.run(h + 1);
        }
        let mut total = 0;
        for target in 0..self.b.n_half_edges() {
            if let Some(undo) = self.try_assign(h, target) {
                total += self.run(h + 1);
                self.undo(undo);
            }
        }
        total
    }

    fn try_assign(&mut self, h: usize, target: usize) -> Option<Vec<(usize, bool)>> {
        let mut undo = Vec::new();
        let sh = self.a.partner(h);
        let st = self.b.partner(target);
        if (sh == h) != (st == target) {
            return None;
        }
        if self.a.label(h) != self.b.label(target) {
            return None;
        }
        let pairs: &[(usize, usize)] = if sh == h { &[(h, target)] } else { &[(h, target), (sh, st)] };
        for &(x, y) in pairs {
            if self.map[x] != usize::MAX {
                if self.map[x] == y {
                    continue;
                }
                self.undo(undo);
                return None;
            }
            if self.used[y] {
                self.undo(undo);
                return None;
            }
            let (vx, vy) = (self.a.vertex_of(x), self.b.vertex_of(y));
            let new_vertex = if self.vmap[vx] == usize::MAX {
                if self.vused[vy] || self.a.valence(vx) != self.b.valence(vy) {
                    self.undo(undo);
                    return None;
                }
                self.vmap[vx] = vy;
                self.vused[vy] = true;
                true
            } else if self.vmap[vx] != vy {
                self.undo(undo);
                return None;
            } else {
                false
            };
            self.map[x] = y;
            self.used[y] = true;
            undo.push((x, new_vertex));
        }
        Some(undo)
    }

    fn undo(&mut self, undo: Vec<(usize, bool)>) {
        for (x, new_vertex) in undo.into_iter().rev() {
            let y = self.map[x];
            self.used[y] = false;
            self.map[x] = usize::MAX;
            if new_vertex {
                let vx = self.a.vertex_of(x);
                self.vused[self.vmap[vx]] = false;
                self.vmap[vx] = usize::MAX;
            }
        }
    }
}

/// Connected graphs with `n_vertices` bivalent vertices: the chain and the
/// cycle.
pub fn enumerate_connected_quadratic(n_vertices: usize) -> Result<Vec<FeynmanGraph>> {
    if n_vertices == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    Ok(vec![FeynmanGraph::chain(n_vertices), FeynmanGraph::cycle(n_vertices)])
}

/// Graphs contributing at exactly `ħ^order` when every vertex and every loop
/// carries one power of ħ: `chain(order)` and, from order 2 on,
/// `cycle(order - 1)`.
pub fn diagrams_at_hbar_order(order: usize) -> Result<Vec<FeynmanGraph>> {
    match order {
        0 => Err(Error::InvalidArgument("order must be at least 1".into())),
        1 => Ok(vec![FeynmanGraph::chain(1)]),
        n => Ok(vec![FeynmanGraph::chain(n), FeynmanGraph::cycle(n - 1)]),
    }
}

/// Power of ħ attached to a graph: one per vertex plus one per loop.
pub fn hbar_exponent(graph: &FeynmanGraph) -> usize {
    graph.n_vertices() + graph.loop_number()
}

//! Interactions, propagators and graph weights by tensor contraction.

use std::collections::BTreeMap;

use nalgebra::ComplexField;

use super::graph::{enumerate_connected_quadratic, hbar_exponent, FeynmanGraph};
use crate::error::{Error, Result};
use crate::scalar::{lit, CMatrix, CVector, Cx, Real};
use crate::series::HbarSeries;

const SYMMETRY_TOL: f64 = 1e-12;

/// Vertex tensors `I_d` indexed by valence. `I_d` is the d-th derivative of
/// the interaction polynomial, so `I(x) = Σ_d I_d(x, ..., x) / d!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction<T: Real> {
    dim: usize,
    terms: BTreeMap<usize, Vec<Cx<T>>>,
}

impl<T: Real> Interaction<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    /// Adds `I_d` as a row-major tensor of length `dim^d`.
    pub fn with_term(mut self, degree: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != self.dim.pow(degree as u32) {
            return Err(Error::Dimension(format!(
                "degree {degree} tensor needs {} entries, got {}",
                self.dim.pow(degree as u32),
                data.len()
            )));
        }
        let defect = symmetry_defect(self.dim, degree, &data);
        if defect > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { degree, defect });
        }
        self.terms.insert(degree, data);
        Ok(self)
    }

    /// Interaction `x^T T x / 2`.
    pub fn quadratic(t: &CMatrix<T>) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::Dimension("quadratic interaction must be square".into()));
        }
        let n = t.nrows();
        let data = (0..n * n).map(|k| t[(k / n, k % n)]).collect();
        Self::new(n).with_term(2, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn term(&self, degree: usize) -> Option<&[Cx<T>]> {
        self.terms.get(&degree).map(Vec::as_slice)
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|t| t.iter().all(|z| z.modulus() == T::zero()))
    }

    /// `I(x) = Σ_d I_d(x, ..., x) / d!`.
    pub fn evaluate(&self, x: &[Cx<T>]) -> Cx<T> {
        let mut total = Cx::new(T::zero(), T::zero());
        for (&d, data) in &self.terms {
            let mut fact = 1.0;
            for k in 2..=d {
                fact *= k as f64;
            }
            let mut sum = Cx::new(T::zero(), T::zero());
            for (flat, &c) in data.iter().enumerate() {
                let mut rest = flat;
                let mut term = c;
                for _ in 0..d {
                    term *= x[rest % self.dim];
                    rest /= self.dim;
                }
                sum += term;
            }
            total += sum / Cx::new(lit(fact), T::zero());
        }
        total
    }
}

fn symmetry_defect<T: Real>(dim: usize, degree: usize, data: &[Cx<T>]) -> f64 {
    if degree < 2 || dim == 0 {
        return 0.0;
    }
    let scale = data.iter().map(|z| z.modulus().to_f64().unwrap_or(f64::INFINITY)).fold(1.0, f64::max);
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; degree];
    for (flat, &c) in data.iter().enumerate() {
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % dim;
            rest /= dim;
        }
        for s in 0..degree - 1 {
            idx.swap(s, s + 1);
            let other = idx.iter().fold(0, |acc, &i| acc * dim + i);
            idx.swap(s, s + 1);
            let diff = (c - data[other]).modulus().to_f64().unwrap_or(f64::INFINITY);
            worst = worst.max(diff / scale);
        }
    }
    worst
}

/// Propagator matrix with the scale window and regulator it was built from.
/// `window.1 == None` stands for an infinite upper scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorKernel<T: Real> {
    pub matrix: CMatrix<T>,
    pub window: (T, Option<T>),
    pub lambda: Cx<T>,
}

impl<T: Real> PropagatorKernel<T> {
    pub fn new(matrix: CMatrix<T>) -> Self {
        Self { matrix, window: (T::zero(), None), lambda: Cx::new(T::zero(), T::zero()) }
    }
}

/// Factors attached to edges and vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// Edges carry `iP`, vertices `iI_d`.
    Oscillatory,
    /// Edges carry `P`, vertices `-I_d`; the real Gaussian `exp(-x·Qx/2 - I(x))`.
    Damped,
}

/// Everything a weight needs besides the graph and external fields.
#[derive(Debug, Clone)]
pub struct FeynmanRules<T: Real> {
    pub propagator: PropagatorKernel<T>,
    pub interaction: Interaction<T>,
    pub signature: Signature,
    /// Parity `±1` per basis index. When present, every closed loop picks up
    /// the graded trace `tr(g ...)` instead of the plain trace.
    pub grading: Option<Vec<i8>>,
}

impl<T: Real> FeynmanRules<T> {
    pub fn new(propagator: PropagatorKernel<T>, interaction: Interaction<T>, signature: Signature) -> Result<Self> {
        let p = &propagator.matrix;
        let n = interaction.dim();
        if p.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "propagator is {:?}, interaction lives in dimension {n}",
                p.shape()
            )));
        }
        let scale = p.iter().map(|z| z.modulus()).fold(T::one(), |a, b| a.max(b));
        let defect = (p - p.transpose()).iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b));
        if defect / scale > lit(SYMMETRY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "propagator not symmetric (defect {:e})",
                defect.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { propagator, interaction, signature, grading: None })
    }

    pub fn with_grading(mut self, grading: Vec<i8>) -> Result<Self> {
        if grading.len() != self.interaction.dim() || grading.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("grading needs one ±1 per basis index".into()));
        }
        self.grading = Some(grading);
        Ok(self)
    }

    fn edge_factor(&self) -> Cx<T> {
        match self.signature {
            Signature::Oscillatory => Cx::new(T::zero(), T::one()),
            Signature::Damped => Cx::new(T::one(), T::zero()),
        }
    }

    fn vertex_factor(&self) -> Cx<T> {
        match self.signature {
            Signature::Oscillatory => Cx::new(T::zero(), T::one()),
            Signature::Damped => Cx::new(-T::one(), T::zero()),
        }
    }
}

struct Factor<T: Real> {
    vars: Vec<usize>,
    data: Vec<Cx<T>>,
}

fn contract_all<T: Real>(mut factors: Vec<Factor<T>>, dim: usize) -> Cx<T> {
    loop {
        let mut candidates: BTreeMap<usize, usize> = BTreeMap::new();
        for f in &factors {
            for &v in &f.vars {
                candidates.entry(v).or_insert(0);
            }
        }
        if candidates.is_empty() {
            break;
        }
        let union_of = |v: usize, factors: &[Factor<T>]| {
            let mut u: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .collect();
            u.sort_unstable();
            u.dedup();
            u
        };
        let var = *candidates
            .keys()
            .min_by_key(|&&v| union_of(v, &factors).len())
            .expect("non-empty");
        let union = union_of(var, &factors);
        let (involved, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.vars.contains(&var));
        let out_vars: Vec<usize> = union.iter().copied().filter(|&v| v != var).collect();
        let mut out = vec![Cx::new(T::zero(), T::zero()); dim.pow(out_vars.len() as u32)];
        let positions: Vec<Vec<usize>> = involved
            .iter()
            .map(|f| f.vars.iter().map(|v| union.binary_search(v).unwrap()).collect())
            .collect();
        let out_pos: Vec<usize> = out_vars.iter().map(|v| union.binary_search(v).unwrap()).collect();
        let mut idx = vec![0usize; union.len()];
        let total = dim.pow(union.len() as u32);
        for flat in 0..total {
            let mut rest_flat = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest_flat % dim;
                rest_flat /= dim;
            }
            let mut prod = Cx::new(T::one(), T::zero());
            for (f, pos) in involved.iter().zip(&positions) {
                let k = pos.iter().fold(0, |acc, &p| acc * dim + idx[p]);
                prod *= f.data[k];
            }
            let o = out_pos.iter().fold(0, |acc, &p| acc * dim + idx[p]);
            out[o] += prod;
        }
        factors = rest;
        factors.push(Factor { vars: out_vars, data: out });
    }
    factors
        .iter()
        .fold(Cx::new(T::one(), T::zero()), |acc, f| acc * f.data[0])
}

/// Full contraction of a graph: tails receive external vectors, edges the
/// propagator, vertices the interaction tensors, with the factors set by the
/// signature. A tail labeled `l` takes `external[l]`, unlabeled tails
/// take `external[0]`. The symmetry factor is not applied.
pub fn graph_weight<T: Real>(graph: &FeynmanGraph, rules: &FeynmanRules<T>, external: &[CVector<T>]) -> Result<Cx<T>> {
    let n = rules.interaction.dim();
    let mut factors = Vec::new();
    for v in 0..graph.n_vertices() {
        let hs = graph.half_edges_at(v);
        let data = rules
            .interaction
            .term(hs.len())
            .ok_or(Error::MissingInteraction(hs.len()))?;
        factors.push(Factor { vars: hs, data: data.to_vec() });
    }
    for h in graph.tails() {
        let slot = graph.label(h).unwrap_or(0);
        let x = external
            .get(slot)
            .ok_or_else(|| Error::InvalidArgument(format!("no external field for slot {slot}")))?;
        if x.len() != n {
            return Err(Error::Dimension(format!("external field has length {}, expected {n}", x.len())));
        }
        factors.push(Factor { vars: vec![h], data: x.iter().copied().collect() });
    }
    let graded_edges = graded_edges(graph, rules.grading.is_some())?;
    let p = &rules.propagator.matrix;
    for (a, b) in graph.edges() {
        let sign_rows = rules.grading.as_ref().filter(|_| graded_edges.contains(&a));
        let data = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                match sign_rows {
                    Some(g) if g[i] < 0 => -p[(i, j)],
                    _ => p[(i, j)],
                }
            })
            .collect();
        factors.push(Factor { vars: vec![a, b], data });
    }
    let mut prefactor = Cx::new(T::one(), T::zero());
    for _ in 0..graph.edges().len() {
        prefactor *= rules.edge_factor();
    }
    for _ in 0..graph.n_vertices() {
        prefactor *= rules.vertex_factor();
    }
    Ok(prefactor * contract_all(factors, n))
}

/// First edge of every cyclic component, where the grading is inserted.
fn graded_edges(graph: &FeynmanGraph, graded: bool) -> Result<Vec<usize>> {
    if !graded {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for comp in graph.components() {
        let edges: Vec<(usize, usize)> = graph
            .edges()
            .into_iter()
            .filter(|(a, _)| comp.contains(&graph.vertex_of(*a)))
            .collect();
        if edges.len() + 1 == comp.len() {
            continue;
        }
        let cyclic = edges.len() == comp.len()
            && comp.iter().all(|&v| graph.valence(v) == 2)
            && graph.tails().iter().all(|&t| !comp.contains(&graph.vertex_of(t)));
        if !cyclic {
            return Err(Error::Unsupported("graded loops are only defined for bivalent cycles".into()));
        }
        out.push(edges[0].0);
    }
    Ok(out)
}

/// `Σ_γ ħ^{V + loops} Φ_γ / |Aut γ|` over connected graphs with at most
/// `max_vertices` bivalent vertices. The returned series has order
/// `max_vertices + 1`, so every included graph is kept whole.
pub fn gamma_sum<T: Real>(
    rules: &FeynmanRules<T>,
    external: &CVector<T>,
    max_vertices: usize,
) -> Result<HbarSeries<Cx<T>>> {
    if max_vertices == 0 {
        return Err(Error::InvalidArgument("max_order must be at least 1".into()));
    }
    let mut out = HbarSeries::zero(max_vertices + 1);
    if rules.interaction.term(2).is_none() || rules.interaction.is_zero() {
        return Ok(out);
    }
    let ext = [external.clone()];
    for n in 1..=max_vertices {
        for g in enumerate_connected_quadratic(n)? {
            let w = graph_weight(&g, rules, &ext)?;
            let aut = Cx::new(lit(g.automorphism_order() as f64), T::zero());
            out.add_to(hbar_exponent(&g), w / aut);
        }
    }
    Ok(out)
}

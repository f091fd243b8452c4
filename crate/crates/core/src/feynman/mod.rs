//! Feynman graphs for finite-dimensional integrals: enumeration, symmetry
//! factors, contraction weights, the connected sum Γ and scale evolution.

mod graph;
mod rge;
mod weight;

pub use graph::{diagrams_at_hbar_order, enumerate_connected_quadratic, hbar_exponent, FeynmanGraph};
pub use rge::{rge_evolve, EffectiveQuadratic};
pub use weight::{gamma_sum, graph_weight, FeynmanRules, Interaction, PropagatorKernel, Signature};

/// `|Aut(γ)|`, the symmetry factor of a graph.
pub fn automorphism_order(graph: &FeynmanGraph) -> u64 {
    graph.automorphism_order()
}

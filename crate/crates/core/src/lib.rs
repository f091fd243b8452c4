//! Twisted Ruelle zeta functions of Anosov models, computed from periodic
//! orbits and, independently, from the diagram expansion of a matrix-scale
//! perturbed BF theory.
//!
//! Modules, bottom up:
//! - [`graded`]: graded operators, supertraces, superdeterminants and the
//!   toy BF complex `V0 --d--> V1 --iota--> V0`;
//! - [`feynman`]: graphs, symmetry factors, contraction weights, the
//!   connected sum and scale evolution;
//! - [`orbits`]: prime orbits of toral-automorphism suspensions and loaded
//!   length spectra;
//! - [`flat_zeta`]: flat traces, per-degree zeta factors, Euler product,
//!   alternating assembly and flat determinants;
//! - [`bf_engine`]: chain and loop series of the perturbed theory and the
//!   identities tying them to determinant ratios and zeta values.
//!
//! Everything is generic over the real scalar `T` (`f32` or `f64`); the
//! `*F64` aliases fix `T = f64`.

pub mod bf_engine;
pub mod error;
pub mod feynman;
pub mod flat_zeta;
pub mod graded;
pub mod linalg;
pub mod orbits;
pub mod scalar;
pub mod series;
pub mod signs;

pub use bf_engine::{
    closed_form_expectation, expectation_value, gamma_int, gamma_tr, perturbing_functional,
    projection_lemma_check, regularized_propagator, simplex_volume_check, zeta_expectation_bridge,
    BridgeReport, ExpectationReport, MatrixBFModel, RegularizedPropagator,
};
pub use error::{Error, Result};
pub use feynman::{
    automorphism_order, enumerate_connected_quadratic, gamma_sum, graph_weight, rge_evolve,
    EffectiveQuadratic, FeynmanGraph, FeynmanRules, Interaction, PropagatorKernel, Signature,
};
pub use flat_zeta::{
    alternating_assembly, euler_product_log_zeta, exterior_power_trace, flat_det_via_f,
    flat_determinant_orbit, flat_trace_cyclicity_check, flat_trace_evolution, log_zeta_k,
    AtomicDistribution, ZetaSeries,
};
pub use graded::{toy_bf_partition, GradedOperator, GradedVectorSpace, PartitionValue, ToyBFComplex};
pub use orbits::{
    anosov_check, enumerate_prime_orbits, fixed_point_count, load_length_spectrum,
    HyperbolicToralModel, PrimeOrbit, Representation,
};
pub use scalar::{CMatrix, CVector, Cx, Real};
pub use series::HbarSeries;

pub type GradedOperatorF64 = GradedOperator<f64>;
pub type ToyBFComplexF64 = ToyBFComplex<f64>;
pub type FeynmanRulesF64 = FeynmanRules<f64>;
pub type InteractionF64 = Interaction<f64>;
pub type PrimeOrbitF64 = PrimeOrbit<f64>;
pub type HyperbolicToralModelF64 = HyperbolicToralModel<f64>;
pub type AtomicDistributionF64 = AtomicDistribution<f64>;
pub type ZetaSeriesF64 = ZetaSeries<f64>;
pub type MatrixBFModelF64 = MatrixBFModel<f64>;
pub type HbarSeriesF64 = HbarSeries<Cx<f64>>;

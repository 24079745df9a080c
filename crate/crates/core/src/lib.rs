//! Generalized probabilistic theories with hypersphere state spaces: the
//! Hadamard bipartite extension, dense coding beyond twice the local
//! capacity, teleportation, entanglement swapping, capacity estimates and
//! the variant theories that restore continuous local symmetry.

pub mod capacity;
pub mod cli;
pub mod error;
pub mod gpt;
pub mod hadamard;
pub mod hst;
pub mod protocols;
pub mod sampling;
pub mod theory;
pub mod variants;

pub use error::{Error, Result};
pub use gpt::{
    bipartite_contract, contract, mutual_information, product_effect, product_state,
    reduced_states, BipartiteEffect, BipartiteMeasurement, BipartiteState, Channel, Effect,
    Measurement, State, Transformation, EPS_EXACT, EPS_OPT,
};
pub use hadamard::BitString;
pub use theory::{validate_bipartite_measurement, validate_measurement, TheoryConfig};

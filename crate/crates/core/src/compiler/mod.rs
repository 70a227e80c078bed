//! Constructive synthesis of symmetric evolutions.
//!
//! Plans start at the Hamiltonian level (evolutions under recorded bracket
//! expressions), are lowered to single-generator pulses, and may be routed
//! onto a restricted coupling geometry.

pub mod chain;
pub mod pipeline;
pub mod plan;
pub mod pulses;
pub mod route;

pub use chain::{
    chain_hamiltonian, chain_shape, diagonal_with_ancilla, steps_symmetric, symmetric_with_ancilla,
    synthesize_hamiltonian, ChainIdentity, ChainSpec,
};
pub use pipeline::{certify, compile, hamiltonian_plan, CompileOptions, HAMILTONIAN_TOL};
pub use plan::{
    plan_distance, run_plan, sector_block, target_unitary, verify_plan, CircuitPlan, Leaf, LeafTable, Level, QubitGate,
    Scheme, Step, Target, Verification,
};
pub use pulses::{expand_to_pulses, ExpandOptions, PULSE_BUDGET};
pub use route::{relabel_identity_error, swap_gate_error, swap_route, Geometry};

//! Symmetric quantum circuits: Lie closures of U(1)-invariant Pauli
//! generators, charge-vector tests, and ancilla-assisted compilation of
//! diagonal and energy-conserving Hamiltonians, certified by dense simulation.

pub mod compiler;
pub mod densesim;
pub mod echelon;
pub mod error;
pub mod expr;
pub mod field;
pub mod io;
pub mod lie;
pub mod op;
pub mod pauli;
pub mod qudit;
pub mod symmetry;

pub use error::{Error, Result};
pub use expr::Expr;
pub use pauli::{make_generator, Coeff, GeneratorKind, Mode, Pauli, PauliString, PauliSum};
pub use symmetry::SymmetrySpec;

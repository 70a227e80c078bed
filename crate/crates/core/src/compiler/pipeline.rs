//! Target-to-verified-plan driver shared by the command line and tests.

use super::chain::{diagonal_with_ancilla, symmetric_with_ancilla, synthesize_hamiltonian};
use super::plan::{verify_plan, CircuitPlan, Level, Scheme, Verification};
use super::pulses::{expand_to_pulses, ExpandOptions, PULSE_BUDGET};
use super::route::{swap_route, Geometry};
use crate::error::{Error, Result};
use crate::lie::{close, klocal_symmetric_basis};
use crate::pauli::PauliSum;
use crate::symmetry::SymmetrySpec;

/// Plans at the Hamiltonian level must be exact up to rounding.
pub const HAMILTONIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CompileOptions {
    /// Use one ancilla qubit (placed after the system) instead of a closure search.
    pub ancilla: bool,
    pub epsilon: f64,
    pub geometry: Geometry,
    pub scheme: Scheme,
    pub level: Level,
    pub max_pulses: usize,
    pub max_dim: Option<usize>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            ancilla: true,
            epsilon: 1e-2,
            geometry: Geometry::None,
            scheme: Scheme::Trotter2,
            level: Level::Pulse,
            max_pulses: PULSE_BUDGET,
            max_dim: None,
        }
    }
}

/// Hamiltonian-level plan for `e^{-iHt}` on qubits.
pub fn hamiltonian_plan(h: &PauliSum, t: f64, opts: &CompileOptions) -> Result<CircuitPlan> {
    let n = h.n();
    if !opts.ancilla {
        let spec = SymmetrySpec::qubits(n);
        let gens = klocal_symmetric_basis(n, 2.min(n), &spec)?;
        let basis = close(&gens, &spec, opts.max_dim)?;
        return synthesize_hamiltonian(h, &basis, t);
    }
    if h.is_diagonal() {
        diagonal_with_ancilla(h, n, t)
    } else {
        symmetric_with_ancilla(h, t)
    }
}

/// Checks a plan against its target and records the measured error.
pub fn certify(plan: &mut CircuitPlan, eps: f64) -> Result<Verification> {
    let v = verify_plan(plan)?;
    if !v.within(eps) {
        return Err(Error::Verification(format!(
            "distance {:.3e} and leakage {:.3e} against epsilon {eps:.3e}",
            v.distance, v.leakage
        )));
    }
    plan.measured_error = Some(v.distance.max(v.leakage));
    Ok(v)
}

/// Synthesizes, expands, routes and verifies.
pub fn compile(h: &PauliSum, t: f64, opts: &CompileOptions) -> Result<(CircuitPlan, Verification)> {
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(Error::validation("epsilon must be positive"));
    }
    let mut plan = hamiltonian_plan(h, t, opts)?;
    if opts.level == Level::Hamiltonian {
        if opts.geometry != Geometry::None {
            return Err(Error::Routing("only pulse-level plans can be routed".into()));
        }
        let v = certify(&mut plan, HAMILTONIAN_TOL)?;
        plan.epsilon = Some(HAMILTONIAN_TOL);
        return Ok((plan, v));
    }
    let expand = ExpandOptions { scheme: opts.scheme, max_pulses: opts.max_pulses };
    let mut pulses = expand_to_pulses(&plan, opts.epsilon, expand)?;
    if opts.geometry != Geometry::None {
        pulses = swap_route(&pulses, opts.geometry)?;
    }
    let v = certify(&mut pulses, opts.epsilon)?;
    Ok((pulses, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zzz_end_to_end() {
        let h = PauliSum::from_words(3, &[("ZZZ", 1, 1)]).unwrap();
        let (plan, v) = compile(&h, 0.7, &CompileOptions::default()).unwrap();
        assert!(plan.is_pulse_level() && v.within(1e-2));
        let ham = CompileOptions { level: Level::Hamiltonian, ..Default::default() };
        let (_, v) = compile(&h, 0.7, &ham).unwrap();
        assert!(v.distance < HAMILTONIAN_TOL);
    }

    #[test]
    fn closure_route_without_ancilla() {
        let h = PauliSum::from_words(2, &[("XX", 1, 2), ("YY", 1, 2), ("ZI", 1, 3)]).unwrap();
        let opts = CompileOptions { ancilla: false, ..Default::default() };
        let (plan, v) = compile(&h, 0.5, &opts).unwrap();
        assert!(plan.ancilla.is_empty() && v.within(1e-2));
    }

    #[test]
    fn routed_on_a_line() {
        let h = PauliSum::from_words(4, &[("ZIIZ", 1, 1)]).unwrap();
        let opts = CompileOptions { geometry: Geometry::ChainZz, ..Default::default() };
        let (_, v) = compile(&h, 0.4, &opts).unwrap();
        assert!(v.within(1e-2));
    }
}

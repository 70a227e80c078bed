//! Mapping pulse plans onto restricted coupling geometries.

use super::plan::{CircuitPlan, LeafTable, Level, QubitGate, Step};
use crate::densesim::{distance, expm_unitary, pauli_to_matrix, swap_matrix, CMat};
use crate::error::{Error, Result};
use crate::pauli::{make_generator, GeneratorKind, PauliSum};
use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Geometry {
    /// Any pair may couple.
    #[default]
    None,
    /// Nearest-neighbour hopping along the system line, ancilla coupled to all.
    ChainStar,
    /// One line with the ancilla at the end; hopping and ZZ between neighbours.
    ChainZz,
}

impl Geometry {
    pub fn as_str(self) -> &'static str {
        match self {
            Geometry::None => "none",
            Geometry::ChainStar => "chain-star",
            Geometry::ChainZz => "chain-zz",
        }
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Geometry::None),
            "chain-star" => Ok(Geometry::ChainStar),
            "chain-zz" => Ok(Geometry::ChainZz),
            _ => Err(Error::validation(format!("unknown geometry '{s}'"))),
        }
    }
}

fn adjacent(a: usize, b: usize) -> bool {
    a.abs_diff(b) == 1
}

/// Applies adjacent swaps as `(R, -pi/2)` then `(ZZ, -pi/4)`; each adds `pi/4`
/// to the recorded phase.
struct Router {
    n: usize,
    /// Physical position of each logical qubit.
    pos: Vec<usize>,
    /// Logical qubit at each physical position.
    at: Vec<usize>,
    table: LeafTable,
    steps: Vec<Step>,
    swaps: usize,
}

impl Router {
    fn new(n: usize) -> Self {
        Self { n, pos: (0..n).collect(), at: (0..n).collect(), table: LeafTable::new(), steps: vec![], swaps: 0 }
    }

    fn pulse(&mut self, gate: QubitGate, sites: &[usize], duration: f64) -> Result<()> {
        let leaf = self.table.qubit(gate, sites, self.n)?;
        self.steps.push(Step::Pulse { leaf, duration });
        Ok(())
    }

    fn swap(&mut self, p: usize, q: usize) -> Result<()> {
        self.pulse(QubitGate::R, &[p, q], -PI / 2.0)?;
        self.pulse(QubitGate::ZZ, &[p, q], -PI / 4.0)?;
        let (lp, lq) = (self.at[p], self.at[q]);
        self.at.swap(p, q);
        self.pos[lp] = q;
        self.pos[lq] = p;
        self.swaps += 1;
        Ok(())
    }

    /// Walks logical `u` next to logical `v` without moving anything past `fixed`.
    fn bring_next_to(&mut self, u: usize, v: usize) -> Result<()> {
        while !adjacent(self.pos[u], self.pos[v]) {
            let (pu, pv) = (self.pos[u], self.pos[v]);
            let step = if pu < pv { pu + 1 } else { pu - 1 };
            self.swap(pu, step)?;
        }
        Ok(())
    }

    /// Undoes the accumulated permutation by bubble sort over `limit` positions.
    fn restore(&mut self, limit: usize) -> Result<()> {
        for i in 0..limit {
            for p in 0..limit - 1 - i {
                if self.at[p] > self.at[p + 1] {
                    self.swap(p, p + 1)?;
                }
            }
        }
        Ok(())
    }
}

/// Rewrites a pulse plan so every pulse respects `geometry`.
pub fn swap_route(plan: &CircuitPlan, geometry: Geometry) -> Result<CircuitPlan> {
    if geometry == Geometry::None {
        return Ok(plan.clone());
    }
    if !plan.is_pulse_level() {
        return Err(Error::Routing("only pulse-level plans can be routed".into()));
    }
    if plan.dims.iter().any(|&d| d != 2) || plan.ancilla.len() > 1 {
        return Err(Error::Routing("routing supports qubit plans with at most one ancilla".into()));
    }
    let n = plan.dims.len();
    let ancilla = plan.ancilla.first().copied();
    if ancilla.is_some_and(|a| a != n - 1) {
        return Err(Error::Routing("the ancilla must be the last site of the line".into()));
    }
    let system = if ancilla.is_some() { n - 1 } else { n };
    let mut router = Router::new(n);
    for step in &plan.steps {
        let Step::Pulse { leaf, duration } = step else { unreachable!() };
        let leaf = &plan.leaves[*leaf];
        let gate =
            leaf.gate().ok_or_else(|| Error::Routing(format!("leaf '{}' is not a native coupling", leaf.name)))?;
        match (gate, leaf.sites.as_slice()) {
            (QubitGate::Z, &[s]) => {
                if ancilla.is_some_and(|a| a != s) {
                    return Err(Error::Routing("local Z is only available on the ancilla".into()));
                }
                let p = router.pos[s];
                router.pulse(QubitGate::Z, &[p], *duration)?;
            }
            (QubitGate::R | QubitGate::ZZ, &[u, v]) => {
                let touches_ancilla = ancilla.is_some_and(|a| a == u || a == v);
                match geometry {
                    Geometry::ChainStar => {
                        if gate == QubitGate::ZZ {
                            return Err(Error::Routing("chain-star has no ZZ coupling".into()));
                        }
                        if !touches_ancilla && !adjacent(u, v) {
                            return Err(Error::Routing(format!("chain-star cannot couple system sites {u} and {v}")));
                        }
                        router.pulse(QubitGate::R, &[u, v], *duration)?;
                    }
                    Geometry::ChainZz => {
                        // The ancilla stays put; system qubits move.
                        let (mover, anchor) = if ancilla == Some(u) { (v, u) } else { (u, v) };
                        router.bring_next_to(mover, anchor)?;
                        let (pu, pv) = (router.pos[u], router.pos[v]);
                        router.pulse(gate, &[pu, pv], *duration)?;
                    }
                    Geometry::None => unreachable!(),
                }
            }
            _ => return Err(Error::Routing(format!("leaf '{}' is not routable", leaf.name))),
        }
    }
    router.restore(system)?;
    let mut out = plan.clone();
    out.phase = plan.phase + router.swaps as f64 * PI / 4.0;
    out.steps = router.steps;
    out.leaves = router.table.into_leaves();
    out.primitive_set = geometry.as_str().into();
    out.level = Level::Pulse;
    Ok(out)
}

/// `|| e^{i pi/4 (XX+YY+ZZ)} - e^{i pi/4} SWAP ||` without phase alignment.
pub fn swap_gate_error() -> Result<f64> {
    let h = PauliSum::from_words(2, &[("XX", 1, 1), ("YY", 1, 1), ("ZZ", 1, 1)])?;
    let u = expm_unitary(&pauli_to_matrix(&h)?, -PI / 4.0)?;
    let s = swap_matrix(2, 0, 1) * num_complex::Complex64::from_polar(1.0, PI / 4.0);
    Ok((u - s).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Distance between `S_{b,m} e^{i theta Z_a Z_b} S_{b,m}` and `e^{i theta Z_a Z_m}`.
pub fn relabel_identity_error(n: usize, a: usize, b: usize, m: usize, theta: f64) -> Result<f64> {
    let zz =
        |x: usize, y: usize| -> Result<CMat> { pauli_to_matrix(&make_generator(GeneratorKind::Zmono, &[x, y], n)?) };
    let s = swap_matrix(n, b, m);
    let lhs = &s * expm_unitary(&zz(a, b)?, -theta)? * &s;
    let rhs = expm_unitary(&zz(a, m)?, -theta)?;
    distance(&lhs, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::plan::{plan_distance, Target};
    use crate::op::Op;

    #[test]
    fn swap_identities() {
        assert!(swap_gate_error().unwrap() < 1e-12);
        assert!(relabel_identity_error(4, 0, 1, 3, 0.37).unwrap() < 1e-12);
    }

    fn zz_plan(n: usize, a: usize, b: usize, theta: f64) -> CircuitPlan {
        let mut table = LeafTable::new();
        let leaf = table.qubit(QubitGate::ZZ, &[a, b], n).unwrap();
        let mut plan = CircuitPlan::empty(vec![2; n], vec![]);
        plan.leaves = table.into_leaves();
        plan.steps = vec![Step::Pulse { leaf, duration: -theta }];
        plan.level = Level::Pulse;
        let h = make_generator(GeneratorKind::Zmono, &[a, b], n).unwrap();
        plan.target = Some(Target { hamiltonian: Op::Pauli(h), time: -theta });
        plan
    }

    #[test]
    fn long_range_zz_routes_on_a_line() {
        let plan = zz_plan(4, 0, 3, 0.6);
        let routed = swap_route(&plan, Geometry::ChainZz).unwrap();
        for s in &routed.steps {
            let Step::Pulse { leaf, .. } = s else { panic!() };
            let l = &routed.leaves[*leaf];
            assert!(l.sites.len() == 1 || adjacent(l.sites[0], l.sites[1]));
        }
        let (d, _) = plan_distance(&routed, &plan).unwrap();
        assert!(d < 1e-12, "{d}");
        let v = crate::compiler::plan::verify_plan(&routed).unwrap();
        assert!(v.recorded_phase_distance < 1e-12, "{v:?}");
    }

    #[test]
    fn neighbour_plan_unchanged() {
        let plan = zz_plan(3, 1, 2, 0.2);
        let routed = swap_route(&plan, Geometry::ChainZz).unwrap();
        assert_eq!(routed.steps.len(), 1);
    }

    #[test]
    fn chain_star_rejects_distant_system_pair() {
        let mut table = LeafTable::new();
        let leaf = table.qubit(QubitGate::R, &[0, 2], 4).unwrap();
        let mut plan = CircuitPlan::empty(vec![2; 4], vec![3]);
        plan.leaves = table.into_leaves();
        plan.steps = vec![Step::Pulse { leaf, duration: 0.1 }];
        assert!(matches!(swap_route(&plan, Geometry::ChainStar), Err(Error::Routing(_))));
    }
}

//! Circuit plans: ordered evolutions under generators or recorded combinations.

use crate::densesim::{
    apply_on_sites, distance, embed_local, expm_unitary, pauli_to_matrix, spectral_norm, CMat, DenseUnitary, DIM_BUDGET,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::op::Op;
use crate::pauli::{make_generator, GeneratorKind, PauliString, PauliSum};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Named interaction on a few sites, kept both locally and on the full space.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub name: String,
    pub sites: Vec<usize>,
    /// Level labels for qudit couplings; empty for qubits.
    pub levels: Vec<usize>,
    pub op: Op,
    /// Matrix on `sites` (in that order).
    pub local: CMat,
}

/// Native qubit interactions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitGate {
    R,
    T,
    Z,
    ZZ,
}

impl QubitGate {
    pub fn name(self) -> &'static str {
        match self {
            QubitGate::R => "R",
            QubitGate::T => "T",
            QubitGate::Z => "Z",
            QubitGate::ZZ => "ZZ",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            QubitGate::Z => 1,
            _ => 2,
        }
    }

    fn build(self, sites: &[usize], n: usize) -> Result<PauliSum> {
        match self {
            QubitGate::R => make_generator(GeneratorKind::R, sites, n),
            QubitGate::T => make_generator(GeneratorKind::T, sites, n),
            QubitGate::Z => make_generator(GeneratorKind::Zlocal, sites, n),
            QubitGate::ZZ => make_generator(GeneratorKind::Zmono, sites, n),
        }
    }
}

impl FromStr for QubitGate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(QubitGate::R),
            "T" => Ok(QubitGate::T),
            "Z" | "Za" => Ok(QubitGate::Z),
            "ZZ" => Ok(QubitGate::ZZ),
            _ => Err(Error::validation(format!("unknown qubit gate '{s}'"))),
        }
    }
}

/// Restriction of a Pauli sum to the listed sites (others must be identity).
fn local_pauli(op: &PauliSum, sites: &[usize]) -> Result<PauliSum> {
    let terms = op.terms().iter().map(|(p, c)| {
        let letters = p.restrict(sites);
        Ok((PauliString::from_letters(&letters)?, c.clone()))
    });
    let terms: Result<Vec<_>> = terms.collect();
    PauliSum::from_terms(sites.len(), op.mode(), terms?)
}

impl Leaf {
    pub fn qubit(gate: QubitGate, sites: &[usize], n: usize) -> Result<Leaf> {
        if sites.len() != gate.arity() {
            return Err(Error::validation(format!("{} takes {} site(s)", gate.name(), gate.arity())));
        }
        let op = gate.build(sites, n)?;
        let local: Vec<usize> = (0..sites.len()).collect();
        let local = pauli_to_matrix(&gate.build(&local, sites.len())?)?;
        Ok(Leaf { name: gate.name().into(), sites: sites.to_vec(), levels: vec![], op: Op::Pauli(op), local })
    }

    /// Arbitrary Pauli-sum interaction, localised on its support.
    pub fn pauli(name: &str, op: PauliSum) -> Result<Leaf> {
        let sites: Vec<usize> = op.support().into_iter().collect();
        if sites.is_empty() {
            return Err(Error::validation("leaf operator acts on no site"));
        }
        let local = pauli_to_matrix(&local_pauli(&op, &sites)?)?;
        Ok(Leaf { name: name.into(), sites, levels: vec![], op: Op::Pauli(op), local })
    }

    /// Interaction given by its matrix on `sites` of a mixed-dimension register.
    pub fn dense(name: &str, sites: &[usize], levels: &[usize], local: CMat, dims: &[usize]) -> Result<Leaf> {
        let op = Op::Dense(embed_local(&local, dims, sites)?);
        Ok(Leaf { name: name.into(), sites: sites.to_vec(), levels: levels.to_vec(), op, local })
    }

    pub fn gate(&self) -> Option<QubitGate> {
        match &self.op {
            Op::Pauli(_) => self.name.parse().ok(),
            Op::Dense(_) => None,
        }
    }
}

/// Deduplicating leaf store.
#[derive(Clone, Debug, Default)]
pub struct LeafTable {
    leaves: Vec<Leaf>,
    index: HashMap<(String, Vec<usize>, Vec<usize>), usize>,
}

impl LeafTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_leaves(leaves: Vec<Leaf>) -> Self {
        let mut t = Self::new();
        leaves.into_iter().for_each(|l| {
            t.insert(l);
        });
        t
    }

    pub fn insert(&mut self, leaf: Leaf) -> usize {
        let key = (leaf.name.clone(), leaf.sites.clone(), leaf.levels.clone());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.leaves.push(leaf);
        self.index.insert(key, self.leaves.len() - 1);
        self.leaves.len() - 1
    }

    pub fn qubit(&mut self, gate: QubitGate, sites: &[usize], n: usize) -> Result<usize> {
        let key = (gate.name().to_string(), sites.to_vec(), vec![]);
        if let Some(&i) = self.index.get(&key) {
            return Ok(i);
        }
        Ok(self.insert(Leaf::qubit(gate, sites, n)?))
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn into_leaves(self) -> Vec<Leaf> {
        self.leaves
    }
}

#[derive(Clone, Debug)]
pub enum Step {
    /// `e^{-i t G}` for a single leaf.
    Pulse { leaf: usize, duration: f64 },
    /// `e^{-i t H}` where `H` is the value of `expr` over the plan leaves.
    Evolve { expr: Expr, hamiltonian: Op, duration: f64 },
}

impl Step {
    pub fn duration(&self) -> f64 {
        match self {
            Step::Pulse { duration, .. } | Step::Evolve { duration, .. } => *duration,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Hamiltonian,
    Pulse,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Hamiltonian => "hamiltonian",
            Level::Pulse => "pulse",
        }
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamiltonian" => Ok(Level::Hamiltonian),
            "pulse" => Ok(Level::Pulse),
            _ => Err(Error::validation(format!("unknown plan level '{s}'"))),
        }
    }
}

/// How brackets and non-commuting sums become pulses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Symmetric product formula for sums; exact conjugations for brackets
    /// where available, group commutators otherwise.
    #[default]
    Trotter2,
    /// Group commutators for every bracket.
    GroupComm,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Trotter2 => "trotter2",
            Scheme::GroupComm => "groupcomm",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trotter2" => Ok(Scheme::Trotter2),
            "groupcomm" => Ok(Scheme::GroupComm),
            _ => Err(Error::validation(format!("unknown scheme '{s}'"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evolution the plan is meant to implement on the non-ancilla sites.
#[derive(Clone, Debug)]
pub struct Target {
    pub hamiltonian: Op,
    pub time: f64,
}

#[derive(Clone, Debug)]
pub struct CircuitPlan {
    /// Dimension of every site, ancillas included.
    pub dims: Vec<usize>,
    pub ancilla: Vec<usize>,
    pub level: Level,
    pub epsilon: Option<f64>,
    pub scheme: Option<Scheme>,
    pub primitive_set: String,
    pub leaves: Vec<Leaf>,
    pub steps: Vec<Step>,
    /// Recorded phase: the ancilla-|0> block equals `e^{i phase}` times the target.
    pub phase: f64,
    pub target: Option<Target>,
    pub model_error: Option<f64>,
    pub measured_error: Option<f64>,
}

impl CircuitPlan {
    pub fn empty(dims: Vec<usize>, ancilla: Vec<usize>) -> Self {
        CircuitPlan {
            dims,
            ancilla,
            level: Level::Hamiltonian,
            epsilon: None,
            scheme: None,
            primitive_set: "none".into(),
            leaves: vec![],
            steps: vec![],
            phase: 0.0,
            target: None,
            model_error: None,
            measured_error: None,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn system_sites(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|s| !self.ancilla.contains(s)).collect()
    }

    pub fn system_dims(&self) -> Vec<usize> {
        self.system_sites().iter().map(|&s| self.dims[s]).collect()
    }

    pub fn pulse_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Pulse { .. })).count()
    }

    pub fn is_pulse_level(&self) -> bool {
        self.steps.iter().all(|s| matches!(s, Step::Pulse { .. }))
    }

    /// Every step operator, evaluated on the full register.
    pub fn step_hamiltonians(&self) -> Vec<&Op> {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Pulse { leaf, .. } => &self.leaves[*leaf].op,
                Step::Evolve { hamiltonian, .. } => hamiltonian,
            })
            .collect()
    }

    /// Checks leaf indices and that evolve steps match their expression.
    pub fn validate(&self) -> Result<()> {
        let ops: Vec<Op> = self.leaves.iter().map(|l| l.op.clone()).collect();
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Pulse { leaf, duration } => {
                    if *leaf >= self.leaves.len() || !duration.is_finite() {
                        return Err(Error::validation(format!("step {i}: bad leaf or duration")));
                    }
                }
                Step::Evolve { expr, hamiltonian, duration } => {
                    if !duration.is_finite() {
                        return Err(Error::validation(format!("step {i}: bad duration")));
                    }
                    let value = expr.eval(&ops)?;
                    let scale = hamiltonian.norm().max(1.0);
                    if value.max_diff(hamiltonian)? > 1e-9 * scale {
                        return Err(Error::validation(format!("step {i}: expression does not match hamiltonian")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Executes a plan densely; the first step acts first.
pub fn run_plan(plan: &CircuitPlan) -> Result<DenseUnitary> {
    let total: usize = plan.dims.iter().product();
    if total > DIM_BUDGET {
        return Err(Error::budget(format!("plan dimension {total} exceeds {DIM_BUDGET}")));
    }
    let mut u = CMat::identity(total, total);
    for step in &plan.steps {
        match step {
            Step::Pulse { leaf, duration } => {
                let leaf =
                    plan.leaves.get(*leaf).ok_or_else(|| Error::validation(format!("leaf {leaf} out of range")))?;
                let g = expm_unitary(&leaf.local, *duration)?;
                u = apply_on_sites(&u, &plan.dims, &leaf.sites, &g)?;
            }
            Step::Evolve { hamiltonian, duration, .. } => {
                let h = hamiltonian.dense()?;
                if h.nrows() != total {
                    return Err(Error::validation("evolve step has the wrong dimension"));
                }
                u = expm_unitary(&h, *duration)? * u;
            }
        }
    }
    Ok(DenseUnitary { matrix: u, dims: plan.dims.clone() })
}

/// Block of `u` with every listed ancilla in |0>, and the leakage out of it.
pub fn sector_block(u: &CMat, dims: &[usize], ancilla: &[usize]) -> Result<(CMat, f64)> {
    let total: usize = dims.iter().product();
    if u.nrows() != total || ancilla.iter().any(|&a| a >= dims.len()) {
        return Err(Error::validation("sector_block: bad dimensions"));
    }
    let strides: Vec<usize> = (0..dims.len()).map(|j| dims[j + 1..].iter().product()).collect();
    let in_sector = |i: usize| ancilla.iter().all(|&a| (i / strides[a]).is_multiple_of(dims[a]));
    let (inside, outside): (Vec<usize>, Vec<usize>) = (0..total).partition(|&i| in_sector(i));
    let block = CMat::from_fn(inside.len(), inside.len(), |r, c| u[(inside[r], inside[c])]);
    let leak = CMat::from_fn(outside.len(), inside.len(), |r, c| u[(outside[r], inside[c])]);
    Ok((block, spectral_norm(&leak)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    /// Phase-minimised distance between the sector block and the target.
    pub distance: f64,
    /// Distance using the recorded phase instead of the optimal one.
    pub recorded_phase_distance: f64,
    pub leakage: f64,
    pub unitarity_error: f64,
}

impl Verification {
    pub fn within(&self, eps: f64) -> bool {
        self.distance <= eps && self.leakage <= eps
    }
}

/// Target unitary on the system sites.
pub fn target_unitary(target: &Target) -> Result<CMat> {
    expm_unitary(&target.hamiltonian.dense()?, target.time)
}

/// Compares the plan's ancilla-|0> block against its recorded target.
pub fn verify_plan(plan: &CircuitPlan) -> Result<Verification> {
    let target = plan.target.as_ref().ok_or_else(|| Error::validation("plan has no target to verify against"))?;
    let u = run_plan(plan)?;
    let (block, leakage) = sector_block(&u.matrix, &plan.dims, &plan.ancilla)?;
    let v = target_unitary(target)?;
    if v.shape() != block.shape() {
        return Err(Error::validation("target dimension does not match the plan's system sites"));
    }
    let phased = &v * Complex64::from_polar(1.0, plan.phase);
    let recorded = spectral_norm(&(&block - phased));
    Ok(Verification {
        distance: distance(&block, &v)?,
        recorded_phase_distance: recorded,
        leakage,
        unitarity_error: u.unitarity_error(),
    })
}

/// Distance between the ancilla-|0> blocks of two plans on the same register.
pub fn plan_distance(a: &CircuitPlan, b: &CircuitPlan) -> Result<(f64, f64)> {
    if a.dims != b.dims || a.ancilla != b.ancilla {
        return Err(Error::validation("plans act on different registers"));
    }
    let (ba, la) = sector_block(&run_plan(a)?.matrix, &a.dims, &a.ancilla)?;
    let (bb, _) = sector_block(&run_plan(b)?.matrix, &b.dims, &b.ancilla)?;
    Ok((distance(&ba, &bb)?, la))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Mode;

    #[test]
    fn empty_plan_is_identity() {
        let plan = CircuitPlan::empty(vec![2, 2], vec![]);
        let u = run_plan(&plan).unwrap();
        assert!((u.matrix - CMat::identity(4, 4)).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn pulses_match_full_exponentials() {
        let mut table = LeafTable::new();
        let r = table.qubit(QubitGate::R, &[2, 0], 3).unwrap();
        let z = table.qubit(QubitGate::Z, &[1], 3).unwrap();
        let mut plan = CircuitPlan::empty(vec![2; 3], vec![]);
        plan.leaves = table.into_leaves();
        plan.steps = vec![Step::Pulse { leaf: r, duration: 0.4 }, Step::Pulse { leaf: z, duration: -1.1 }];
        let u = run_plan(&plan).unwrap().matrix;
        let hr = pauli_to_matrix(&make_generator(GeneratorKind::R, &[0, 2], 3).unwrap()).unwrap();
        let hz = pauli_to_matrix(&make_generator(GeneratorKind::Zlocal, &[1], 3).unwrap()).unwrap();
        let expect = expm_unitary(&hz, -1.1).unwrap() * expm_unitary(&hr, 0.4).unwrap();
        assert!((u - expect).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn single_ancilla_step_phase() {
        let mut table = LeafTable::new();
        let za = table.qubit(QubitGate::Z, &[1], 2).unwrap();
        let mut plan = CircuitPlan::empty(vec![2, 2], vec![1]);
        plan.leaves = table.into_leaves();
        plan.steps = vec![Step::Pulse { leaf: za, duration: 0.3 }];
        plan.phase = -0.3;
        plan.target = Some(Target { hamiltonian: Op::Pauli(PauliSum::zero(1, Mode::Exact)), time: 1.0 });
        let v = verify_plan(&plan).unwrap();
        assert!(v.recorded_phase_distance < 1e-12 && v.leakage < 1e-12);
    }
}

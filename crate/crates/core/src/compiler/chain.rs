//! Nested-hopping chains and the plans built from them.

use super::plan::{CircuitPlan, Leaf, LeafTable, Level, QubitGate, Step, Target};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::Field;
use crate::lie::{member, LieBasis};
use crate::op::Op;
use crate::pauli::{Coeff, Mode, Pauli, PauliString, PauliSum};
use crate::symmetry::SymmetrySpec;
use std::collections::BTreeMap;

/// Ordered distinct sites `r_1 .. r_v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainSpec {
    sites: Vec<usize>,
}

impl ChainSpec {
    pub fn new(sites: Vec<usize>) -> Result<Self> {
        if sites.len() < 2 {
            return Err(Error::validation("a chain needs at least two sites"));
        }
        let mut sorted = sites.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::validation(format!("chain sites {sites:?} repeat")));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Verified chain identity.
#[derive(Clone, Debug)]
pub struct ChainIdentity {
    pub chain: ChainSpec,
    /// Tree over `leaves` using the Hermitian bracket `i[A, B]`.
    pub expr: Expr,
    pub leaves: Vec<Leaf>,
    pub realized: PauliSum,
    /// `(Z_{r_1} - Z_{r_v}) Z_{r_1} ... Z_{r_v}`.
    pub shape: PauliSum,
    /// `realized = sign * shape` with the Hermitian bracket.
    pub sign: i8,
    /// The same sign when every bracket is read as a plain commutator `[A, B]`
    /// and the tree is multiplied by it to give the shape.
    pub commutator_sign: i8,
    pub brackets: usize,
}

fn z_product(n: usize, sites: &[usize]) -> Result<PauliString> {
    PauliString::on_sites(n, sites, Pauli::Z)
}

/// `(Z_{r_1} - Z_{r_v}) Z_{r_1} ... Z_{r_v}` as a Pauli sum.
pub fn chain_shape(chain: &ChainSpec, n: usize) -> Result<PauliSum> {
    let s = chain.sites();
    let v = s.len();
    PauliSum::from_terms(
        n,
        Mode::Exact,
        [
            (z_product(n, &s[1..])?, Coeff::int(1, Mode::Exact)),
            (z_product(n, &s[..v - 1])?, Coeff::int(-1, Mode::Exact)),
        ],
    )
}

/// Builds the nested-hopping tree for a chain and certifies it symbolically.
///
/// Leaves are `R_{r_{j}, r_{j-1}}` for consecutive pairs, the closing hopping
/// `R_{r_1, r_v}`, and for even length an innermost `Z_{r_1}/2`.
pub fn chain_hamiltonian(chain: &ChainSpec, n: usize) -> Result<ChainIdentity> {
    let s = chain.sites();
    let v = s.len();
    if let Some(&bad) = s.iter().find(|&&x| x >= n) {
        return Err(Error::validation(format!("chain site {bad} out of range for {n} sites")));
    }
    let mut table = LeafTable::new();
    let first = table.qubit(QubitGate::R, &[s[1], s[0]], n)?;
    let mut brackets = 0;
    let mut expr = if v % 2 == 1 {
        Expr::leaf(first)
    } else {
        let z = table.qubit(QubitGate::Z, &[s[0]], n)?;
        brackets += 1;
        Expr::bracket(Expr::leaf(first), Expr::scale(Coeff::ratio(1, 2, Mode::Exact), Expr::leaf(z)))
    };
    for j in 2..v {
        let r = table.qubit(QubitGate::R, &[s[j], s[j - 1]], n)?;
        expr = Expr::bracket(Expr::leaf(r), expr);
        brackets += 1;
    }
    let close = table.qubit(QubitGate::R, &[s[0], s[v - 1]], n)?;
    expr = Expr::bracket(Expr::leaf(close), expr);
    brackets += 1;

    let leaves = table.into_leaves();
    let ops: Vec<PauliSum> = leaves.iter().map(|l| l.op.as_pauli().cloned().expect("qubit leaf")).collect();
    let realized = expr.eval(&ops)?;
    let shape = chain_shape(chain, n)?;
    let sign = if realized.sub(&shape)?.is_zero() {
        1
    } else if realized.add(&shape)?.is_zero() {
        -1
    } else {
        return Err(Error::Internal(format!("chain {s:?} realizes {realized}, not a signed {shape}")));
    };
    // [A,B] = -i * i[A,B], so k plain commutators differ by (-i)^k = (-1)^(k/2).
    let plain = if (brackets / 2) % 2 == 0 { 1 } else { -1 };
    if brackets % 2 != 0 {
        return Err(Error::Internal("odd bracket count in a chain".into()));
    }
    Ok(ChainIdentity {
        chain: chain.clone(),
        expr,
        leaves,
        realized,
        shape,
        sign,
        commutator_sign: sign * plain,
        brackets,
    })
}

/// Copies a chain tree into a shared leaf table.
fn import_chain(id: &ChainIdentity, table: &mut LeafTable) -> Expr {
    let map: Vec<usize> = id.leaves.iter().map(|l| table.insert(l.clone())).collect();
    id.expr.relabel(&|i| Expr::leaf(map[i]))
}

fn ensure_symmetric(h: &PauliSum) -> Result<()> {
    if !h.is_symmetric(&SymmetrySpec::qubits(h.n()))? {
        return Err(Error::validation("hamiltonian does not conserve the charge"));
    }
    Ok(())
}

/// Maps system site `j` to its index once the ancilla is inserted.
fn lift_site(j: usize, ancilla: usize) -> usize {
    if j < ancilla {
        j
    } else {
        j + 1
    }
}

fn lift(h: &PauliSum, ancilla: usize) -> Result<PauliSum> {
    let map: Vec<usize> = (0..h.n()).map(|j| lift_site(j, ancilla)).collect();
    h.embed(h.n() + 1, &map)
}

/// Chain terms, keyed by the ordered chain, whose sum plus a multiple of
/// `Z_a` reproduces a diagonal operator on the ancilla-|0> sector.
fn telescope(h: &PauliSum, ancilla: usize) -> Result<(BTreeMap<Vec<usize>, Coeff>, Coeff)> {
    let mode = h.mode();
    let mut chains: BTreeMap<Vec<usize>, Coeff> = BTreeMap::new();
    let mut za = Coeff::int(0, mode);
    let mut monomials: Vec<(&PauliString, &Coeff)> = h.terms().iter().filter(|(p, _)| !p.is_identity()).collect();
    // Heaviest monomials first.
    monomials.sort_by_key(|(p, _)| std::cmp::Reverse(p.weight()));
    for (p, c) in monomials {
        let sites: Vec<usize> = p.support().into_iter().map(|j| lift_site(j, ancilla)).collect();
        for w in (1..=sites.len()).rev() {
            let mut chain = vec![ancilla];
            chain.extend_from_slice(&sites[..w]);
            let slot = chains.entry(chain).or_insert_with(|| Coeff::int(0, mode));
            *slot = slot.add(c);
        }
        za = za.add(c);
    }
    chains.retain(|_, c| !c.is_zero());
    Ok((chains, za))
}

/// Plan for `e^{-iHt}` with diagonal `H` using chains through one ancilla.
///
/// Each chain step evolves under a single chain shape; all steps commute,
/// so the product is exact. The identity part of `H` becomes the phase.
pub fn diagonal_with_ancilla(h: &PauliSum, ancilla: usize, t: f64) -> Result<CircuitPlan> {
    if !h.is_diagonal() {
        return Err(Error::validation("diagonal_with_ancilla needs a diagonal hamiltonian"));
    }
    let n = h.n();
    if ancilla > n {
        return Err(Error::validation(format!("ancilla index {ancilla} must be at most {n}")));
    }
    let total = n + 1;
    let (chains, za) = telescope(h, ancilla)?;
    let mut table = LeafTable::new();
    let mut steps = Vec::new();
    // Longest chains first, mirroring the heaviest-first telescoping.
    let mut ordered: Vec<(&Vec<usize>, &Coeff)> = chains.iter().collect();
    ordered.sort_by_key(|(c, _)| std::cmp::Reverse(c.len()));
    for (sites, coef) in ordered {
        let id = chain_hamiltonian(&ChainSpec::new(sites.clone())?, total)?;
        let tree = import_chain(&id, &mut table);
        let expr = Expr::scale(Coeff::int(id.sign as i64, Mode::Exact), tree);
        steps.push(Step::Evolve { expr, hamiltonian: Op::Pauli(id.shape.clone()), duration: coef.to_f64() * t });
    }
    if !za.is_zero() {
        let leaf = table.qubit(QubitGate::Z, &[ancilla], total)?;
        steps.push(Step::Pulse { leaf, duration: za.to_f64() * t });
    }
    let mut plan = CircuitPlan::empty(vec![2; total], vec![ancilla]);
    plan.primitive_set = "R+Za".into();
    plan.leaves = table.into_leaves();
    plan.steps = steps;
    plan.phase = h.identity_coeff().to_f64() * t;
    plan.target = Some(Target { hamiltonian: Op::Pauli(h.clone()), time: t });
    Ok(plan)
}

/// Hopping content of a symmetric Hamiltonian: coefficients of `R_{rs}` and
/// `T_{rs}` per pair, or `None` if the off-diagonal part is not 2-local hopping.
fn hopping_terms(h: &PauliSum) -> Option<BTreeMap<(usize, usize), (Coeff, Coeff)>> {
    let mode = h.mode();
    let mut pairs: BTreeMap<(usize, usize), [Coeff; 4]> = BTreeMap::new();
    for (p, c) in h.terms().iter().filter(|(p, _)| !p.is_diagonal()) {
        let sup = p.support();
        let [r, s] = sup[..] else { return None };
        let slot = match (p.get(r), p.get(s)) {
            (Pauli::X, Pauli::X) => 0,
            (Pauli::Y, Pauli::Y) => 1,
            (Pauli::X, Pauli::Y) => 2,
            (Pauli::Y, Pauli::X) => 3,
            _ => return None,
        };
        let entry = pairs.entry((r, s)).or_insert_with(|| std::array::from_fn(|_| Coeff::int(0, mode)));
        entry[slot] = c.clone();
    }
    let two = Coeff::int(2, mode);
    pairs
        .into_iter()
        .map(|(k, [xx, yy, xy, yx])| {
            let balanced = xx.sub(&yy).is_zero() && xy.add(&yx).is_zero();
            balanced.then(|| (k, (xx.mul(&two), xy.mul(&two))))
        })
        .collect()
}

/// Plan for a charge-conserving qubit Hamiltonian whose off-diagonal part is
/// two-site hopping, using one ancilla appended after the system.
pub fn symmetric_with_ancilla(h: &PauliSum, t: f64) -> Result<CircuitPlan> {
    ensure_symmetric(h)?;
    if h.is_diagonal() {
        return diagonal_with_ancilla(h, h.n(), t);
    }
    let hops = hopping_terms(h)
        .ok_or_else(|| Error::validation("off-diagonal part must consist of two-site hopping terms"))?;
    let n = h.n();
    let a = n;
    let total = n + 1;
    let mode = h.mode();
    let diag = h.diagonal_part();
    let (chains, za) = telescope(&diag, a)?;
    let mut table = LeafTable::new();
    let mut diag_parts = Vec::new();
    let mut hamiltonian = PauliSum::zero(total, mode);
    for (sites, coef) in &chains {
        let id = chain_hamiltonian(&ChainSpec::new(sites.clone())?, total)?;
        let tree = import_chain(&id, &mut table);
        diag_parts.push(Expr::scale(coef.mul(&Coeff::int(id.sign as i64, mode)), tree));
        hamiltonian = hamiltonian.add(&id.shape.scale(coef))?;
    }
    if !za.is_zero() {
        let leaf = table.qubit(QubitGate::Z, &[a], total)?;
        diag_parts.push(Expr::scale(za.clone(), Expr::leaf(leaf)));
        hamiltonian = hamiltonian.add(&table.leaves()[leaf].op.as_pauli().expect("qubit").scale(&za))?;
    }
    let mut parts = Vec::new();
    match diag_parts.len() {
        0 => {}
        1 => parts.push(diag_parts.pop().expect("one part")),
        _ => parts.push(Expr::Sum(diag_parts)),
    }
    for (&(r, s), (cr, ct)) in &hops {
        if !cr.is_zero() {
            let leaf = table.qubit(QubitGate::R, &[r, s], total)?;
            parts.push(Expr::scale(cr.clone(), Expr::leaf(leaf)));
        }
        if !ct.is_zero() {
            // T_{rs} from the bracket of (Z_r - Z_a) with R_{rs}.
            let id = chain_hamiltonian(&ChainSpec::new(vec![a, r])?, total)?;
            let tree = Expr::scale(Coeff::int(id.sign as i64, mode), import_chain(&id, &mut table));
            let hop = table.qubit(QubitGate::R, &[r, s], total)?;
            let bracket = Expr::bracket(tree, Expr::leaf(hop));
            let ops: Vec<PauliSum> = table.leaves().iter().map(|l| l.op.as_pauli().cloned().expect("qubit")).collect();
            let value = bracket.eval(&ops)?;
            let tgen = Leaf::qubit(QubitGate::T, &[r, s], total)?;
            let ratio = Op::Pauli(value)
                .ratio_to(&tgen.op)
                .ok_or_else(|| Error::Internal("hopping bracket is not proportional to T".into()))?;
            parts.push(Expr::scale(ct.mul(&ratio.inv()), bracket));
        }
    }
    hamiltonian = hamiltonian.add(&lift(&h.sub(&diag)?, a)?)?;
    let expr = if parts.len() == 1 { parts.pop().expect("one part") } else { Expr::Sum(parts) };
    let mut plan = CircuitPlan::empty(vec![2; total], vec![a]);
    plan.primitive_set = "R+Za".into();
    plan.leaves = table.into_leaves();
    plan.steps = vec![Step::Evolve { expr, hamiltonian: Op::Pauli(hamiltonian), duration: t }];
    plan.phase = h.identity_coeff().to_f64() * t;
    plan.target = Some(Target { hamiltonian: Op::Pauli(h.clone()), time: t });
    plan.validate()?;
    Ok(plan)
}

/// Plan for `e^{-iHt}` from the recorded provenance of a closed basis.
pub fn synthesize_hamiltonian(h: &PauliSum, basis: &LieBasis, t: f64) -> Result<CircuitPlan> {
    if h.n() != basis.n() {
        return Err(Error::validation("hamiltonian and basis act on different sites"));
    }
    let m = member(h, basis)?;
    if !m.member {
        return Err(Error::Unsynthesizable { residual: m.residual.to_f64() });
    }
    // Identity parts of generators only shift the global phase.
    let mut table = LeafTable::new();
    let gens: Vec<Option<usize>> = basis
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let traceless = g.sub(&PauliSum::identity(g.n(), g.mode())?.scale(&g.identity_coeff()))?;
            if traceless.is_zero() {
                return Ok(None);
            }
            Leaf::pauli(&format!("G{i}"), traceless).map(|l| Some(table.insert(l)))
        })
        .collect::<Result<_>>()?;
    let mut terms = Vec::new();
    for (idx, c) in &m.coordinates {
        let tree = &basis.provenance()[*idx];
        if tree.leaves().iter().any(|&i| gens[i].is_none()) {
            continue;
        }
        let tree = tree.relabel(&|i| Expr::leaf(gens[i].expect("kept generator")));
        terms.push(match tree {
            e if c.sub(&Coeff::int(1, c.mode())).is_zero() => e,
            e => Expr::scale(c.clone(), e),
        });
    }
    let mut plan = CircuitPlan::empty(vec![2; h.n()], vec![]);
    plan.primitive_set = "generators".into();
    plan.leaves = table.into_leaves();
    plan.target = Some(Target { hamiltonian: Op::Pauli(h.clone()), time: t });
    plan.phase = h.identity_coeff().to_f64() * t;
    let expr = match terms.len() {
        0 => return Ok(plan),
        1 => terms.pop().expect("one term"),
        _ => Expr::Sum(terms),
    };
    let ops: Vec<Op> = plan.leaves.iter().map(|l| l.op.clone()).collect();
    let value = expr.eval(&ops)?;
    if let Op::Pauli(v) = &value {
        plan.phase -= v.identity_coeff().to_f64() * t;
    }
    plan.steps = vec![match expr {
        Expr::Leaf(leaf) => Step::Pulse { leaf, duration: t },
        expr => Step::Evolve { expr, hamiltonian: value, duration: t },
    }];
    Ok(plan)
}

/// True iff every step operator conserves the charge.
pub fn steps_symmetric(plan: &CircuitPlan) -> Result<bool> {
    for op in plan.step_hamiltonians() {
        if let Op::Pauli(p) = op {
            if !p.is_symmetric(&SymmetrySpec::qubits(p.n()))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Marks plans whose steps are all single generators.
pub fn finalize_level(plan: &mut CircuitPlan) {
    plan.level = if plan.is_pulse_level() { Level::Pulse } else { Level::Hamiltonian };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::plan::verify_plan;

    #[test]
    fn two_site_chain_sign() {
        let id = chain_hamiltonian(&ChainSpec::new(vec![0, 1]).unwrap(), 2).unwrap();
        // Hermitian brackets give Z_2 - Z_1 directly; plain commutators flip it.
        assert_eq!(id.realized, PauliSum::from_words(2, &[("IZ", 1, 1), ("ZI", -1, 1)]).unwrap());
        assert_eq!(id.sign, 1);
        assert_eq!(id.commutator_sign, -1);
    }

    #[test]
    fn chains_through_ancilla() {
        // Sites (1, 2, a) with a = 3 of 4.
        let id = chain_hamiltonian(&ChainSpec::new(vec![0, 1, 3]).unwrap(), 4).unwrap();
        let expect = PauliSum::from_words(4, &[("IZIZ", 1, 1), ("ZZII", -1, 1)]).unwrap();
        assert_eq!(id.shape, expect);
        assert_eq!(id.realized.scale(&Coeff::int(id.sign as i64, Mode::Exact)), expect);
        for v in 2..=6 {
            let sites: Vec<usize> = (0..v).rev().collect();
            let id = chain_hamiltonian(&ChainSpec::new(sites).unwrap(), 6).unwrap();
            assert_eq!(id.brackets % 2, 0);
        }
    }

    #[test]
    fn short_chain_rejected() {
        assert!(ChainSpec::new(vec![1]).is_err());
        assert!(ChainSpec::new(vec![1, 1]).is_err());
    }

    #[test]
    fn zzz_hamiltonian_plan_exact() {
        let h = PauliSum::from_words(3, &[("ZZZ", -1, 1)]).unwrap();
        let plan = diagonal_with_ancilla(&h, 3, 0.7).unwrap();
        plan.validate().unwrap();
        assert_eq!(plan.steps.len(), 4);
        let v = verify_plan(&plan).unwrap();
        assert!(v.distance < 1e-10 && v.leakage < 1e-10 && v.recorded_phase_distance < 1e-10, "{v:?}");
    }

    #[test]
    fn identity_part_is_phase() {
        let h = PauliSum::from_words(2, &[("II", 3, 2), ("ZI", 1, 1), ("IZ", -1, 3)]).unwrap();
        let plan = diagonal_with_ancilla(&h, 2, 0.4).unwrap();
        let v = verify_plan(&plan).unwrap();
        assert!(v.recorded_phase_distance < 1e-10, "{v:?}");
        let empty = diagonal_with_ancilla(&PauliSum::zero(2, Mode::Exact), 2, 1.0).unwrap();
        assert!(empty.steps.is_empty());
    }

    #[test]
    fn hopping_plan_exact() {
        let h = PauliSum::from_words(
            3,
            &[("XXI", 1, 2), ("YYI", 1, 2), ("IXY", 1, 3), ("IYX", -1, 3), ("ZIZ", 2, 1), ("IZI", 1, 5)],
        )
        .unwrap();
        let plan = symmetric_with_ancilla(&h, 0.9).unwrap();
        let v = verify_plan(&plan).unwrap();
        assert!(v.recorded_phase_distance < 1e-10 && v.leakage < 1e-10, "{v:?}");
        assert!(steps_symmetric(&plan).unwrap());
    }
}

//! Real Lie algebras generated by symmetric Hermitian Pauli sums.
//!
//! In exact mode independence decisions during the sweep are made modulo the
//! prime 2^61 - 1 (independence mod p implies independence over Q). The sweep
//! stops early once the rank reaches the charge-vector upper bound
//! `sum m_q^2 - #sectors + rank(charge vectors of generators)`; otherwise
//! every bracket is re-checked with exact rationals before `closed` is set.

use crate::echelon::Echelon;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Field, Fp};
use crate::pauli::{bracket_terms, Coeff, Mode, Pauli, PauliString, PauliSum};
use crate::symmetry::{
    charge_span_dimension, full_symmetric_dim, irrep_count, s_k_dimension, sector_multiplicities, twirl, SymmetrySpec,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Closed (or partially closed) real span with provenance.
#[derive(Debug)]
pub struct LieBasis {
    n: usize,
    mode: Mode,
    generators: Vec<PauliSum>,
    elements: Vec<PauliSum>,
    provenance: Vec<Expr>,
    closed: bool,
    echelon: OnceLock<Echelon<PauliString, Coeff>>,
}

impl Clone for LieBasis {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            mode: self.mode,
            generators: self.generators.clone(),
            elements: self.elements.clone(),
            provenance: self.provenance.clone(),
            closed: self.closed,
            echelon: OnceLock::new(),
        }
    }
}

/// Result of projecting an operator onto a basis span.
#[derive(Clone, Debug)]
pub struct Membership {
    pub member: bool,
    /// Squared Hilbert-Schmidt norm of what is left after elimination.
    pub residual: Coeff,
    /// `H - residual = sum_i c_i elements[i]`.
    pub coordinates: Vec<(usize, Coeff)>,
}

impl LieBasis {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
    pub fn generators(&self) -> &[PauliSum] {
        &self.generators
    }
    pub fn elements(&self) -> &[PauliSum] {
        &self.elements
    }
    pub fn provenance(&self) -> &[Expr] {
        &self.provenance
    }
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn echelon(&self) -> &Echelon<PauliString, Coeff> {
        self.echelon.get_or_init(|| {
            let mut e = Echelon::with_coordinates();
            for el in &self.elements {
                e.insert(el.terms().iter());
            }
            e
        })
    }

    /// Builds a basis from explicit elements and trees (used by tests and IO).
    pub fn from_parts(
        generators: Vec<PauliSum>,
        elements: Vec<PauliSum>,
        provenance: Vec<Expr>,
        closed: bool,
    ) -> Result<Self> {
        let n = generators.first().map(|g| g.n()).unwrap_or(0);
        let mode = generators.first().map(|g| g.mode()).unwrap_or_default();
        if elements.len() != provenance.len() {
            return Err(Error::validation("one provenance tree per element required"));
        }
        Ok(Self { n, mode, generators, elements, provenance, closed, echelon: OnceLock::new() })
    }
}

/// Tree for basis element `index`.
pub fn provenance_expression(index: usize, basis: &LieBasis) -> Result<&Expr> {
    basis.provenance.get(index).ok_or_else(|| Error::validation(format!("element {index} out of range")))
}

pub fn member(h: &PauliSum, basis: &LieBasis) -> Result<Membership> {
    if h.n() != basis.n {
        return Err(Error::validation("operator and basis have different site counts"));
    }
    let h = h.to_mode(basis.mode);
    let e = basis.echelon();
    let red = e.reduce(h.terms().iter());
    let residual = red.residual.iter().fold(Coeff::int(0, basis.mode), |acc, (_, c)| acc.add(&c.mul(c)));
    let member = match basis.mode {
        Mode::Exact => red.residual.is_empty(),
        Mode::Float => residual.to_f64().sqrt() < 1e-10 * h.norm1().max(1.0),
    };
    let coordinates = e.coordinates(&red).unwrap_or_default();
    Ok(Membership { member, residual, coordinates })
}

/// All Hermitian symmetric operators supported on at most `k` sites,
/// as twirls of Pauli strings, deduplicated. Includes the identity.
pub fn klocal_symmetric_basis(n: usize, k: usize, spec: &SymmetrySpec) -> Result<Vec<PauliSum>> {
    if k == 0 || k > n {
        return Err(Error::validation(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if spec.n() != n || !spec.is_qubit() {
        return Err(Error::validation("spec must describe n qubit sites"));
    }
    if n > 12 {
        return Err(Error::budget("k-local basis enumeration limited to 12 sites"));
    }
    // Twirls of strings in different classes (same I/Z pattern, same X/Y
    // positions) have disjoint supports, so independence is checked per class.
    let mut classes: BTreeMap<(usize, Vec<u8>), Vec<PauliString>> = BTreeMap::new();
    let total = 1u64 << (2 * n);
    for code in 0..total {
        let letters: Vec<Pauli> = (0..n)
            .map(|j| match (code >> (2 * (n - 1 - j))) & 3 {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        let w = letters.iter().filter(|&&l| l != Pauli::I).count();
        if w > k {
            continue;
        }
        let class: Vec<u8> = letters
            .iter()
            .map(|l| match l {
                Pauli::I => 0,
                Pauli::Z => 3,
                _ => 1,
            })
            .collect();
        classes.entry((w, class)).or_default().push(PauliString::from_letters(&letters)?);
    }
    let mut out = Vec::new();
    for strings in classes.values() {
        let mut e: Echelon<PauliString, Coeff> = Echelon::new();
        for p in strings {
            let t = twirl(&PauliSum::single(*p, Coeff::int(1, Mode::Exact)), spec)?;
            if t.is_zero() {
                continue;
            }
            if e.insert(t.terms().iter()).is_some() {
                out.push(t);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Gen(usize),
    /// Bracket of generator `.0` with element `.1`.
    Br(usize, usize),
}

type Terms<F> = BTreeMap<PauliString, F>;

struct Sweep<F> {
    echelon: Echelon<PauliString, F>,
    nodes: Vec<Node>,
    vectors: Vec<Terms<F>>,
}

/// Breadth-first closure over one field; returns when no element is added or
/// when the rank reaches `upper`.
fn sweep<F: Field + 'static>(
    gens: &[Terms<F>],
    upper: usize,
    max_dim: usize,
    mut state: Sweep<F>,
    mut frontier: Vec<usize>,
    active_gens: &[usize],
) -> Result<Sweep<F>> {
    const CHUNK: usize = 512;
    while !frontier.is_empty() && state.echelon.rank() < upper {
        let pairs: Vec<(usize, usize)> =
            frontier.iter().flat_map(|&e| active_gens.iter().map(move |&g| (g, e))).collect();
        let mut next = Vec::new();
        for chunk in pairs.chunks(CHUNK) {
            let reduced: Vec<_> = chunk
                .par_iter()
                .map(|&(g, e)| {
                    let cand = bracket_terms(&gens[g], &state.vectors[e]);
                    let red = state.echelon.reduce(cand.iter());
                    (g, e, cand, red)
                })
                .collect();
            for (g, e, cand, red) in reduced {
                if red.is_zero() {
                    continue;
                }
                let residual: Terms<F> = red.residual.into_iter().collect();
                let again = state.echelon.reduce(residual.iter());
                if state.echelon.insert_reduced(again).is_some() {
                    if state.echelon.rank() > max_dim {
                        return Err(Error::budget(format!("closure dimension exceeds max_dim = {max_dim}")));
                    }
                    state.nodes.push(Node::Br(g, e));
                    state.vectors.push(cand);
                    next.push(state.nodes.len() - 1);
                    if state.echelon.rank() >= upper {
                        return Ok(state);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(state)
}

fn start_sweep<F: Field + 'static>(gens: &[Terms<F>]) -> (Sweep<F>, Vec<usize>) {
    let mut st = Sweep { echelon: Echelon::new(), nodes: Vec::new(), vectors: Vec::new() };
    let mut active = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if st.echelon.insert(g.iter()).is_some() {
            st.nodes.push(Node::Gen(i));
            st.vectors.push(g.clone());
            active.push(i);
        }
    }
    (st, active)
}

/// Rigorous dimension upper bound from charge vectors.
pub fn closure_upper_bound(generators: &[PauliSum], spec: &SymmetrySpec) -> Result<usize> {
    let sectors = sector_multiplicities(spec).len();
    let full = full_symmetric_dim(spec) as usize;
    let exact: Vec<PauliSum> = generators.iter().map(|g| g.to_mode(Mode::Exact)).collect();
    Ok(full - sectors + charge_span_dimension(&exact, spec)?)
}

fn trees(nodes: &[Node]) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let t = match *node {
            Node::Gen(g) => Expr::Leaf(g),
            Node::Br(g, e) => Expr::bracket(Expr::Leaf(g), out[e].clone()),
        };
        out.push(t);
    }
    out
}

fn materialize(nodes: &[Node], gens: &[PauliSum]) -> Result<Vec<PauliSum>> {
    let mut out: Vec<PauliSum> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let v = match *node {
            Node::Gen(g) => gens[g].clone(),
            Node::Br(g, e) => gens[g].bracket(&out[e])?,
        };
        out.push(v);
    }
    Ok(out)
}

/// Smallest bracket-closed real span containing `generators`.
pub fn close(generators: &[PauliSum], spec: &SymmetrySpec, max_dim: Option<usize>) -> Result<LieBasis> {
    let Some(first) = generators.first() else {
        return Err(Error::validation("at least one generator required"));
    };
    let (n, mode) = (first.n(), first.mode());
    for g in generators {
        if g.n() != n || g.mode() != mode {
            return Err(Error::validation("generators must share site count and mode"));
        }
        if !g.is_symmetric(spec)? {
            return Err(Error::validation(format!("generator {g} is not symmetric")));
        }
    }
    let full = full_symmetric_dim(spec) as usize;
    let max_dim = max_dim.unwrap_or(full);
    let upper = closure_upper_bound(generators, spec)?.min(full);

    let (nodes, closed_by_bound) = match mode {
        Mode::Exact => {
            let gens_p: Vec<Terms<Fp>> = generators
                .iter()
                .map(|g| {
                    g.terms()
                        .iter()
                        .map(|(p, c)| (*p, Fp::from_rational(c.as_rational().expect("exact mode"))))
                        .filter(|(_, v)| !v.is_zero())
                        .collect()
                })
                .collect();
            let (st, active) = start_sweep(&gens_p);
            let frontier: Vec<usize> = (0..st.nodes.len()).collect();
            let st = sweep(&gens_p, upper, max_dim, st, frontier, &active)?;
            let done = st.echelon.rank() >= upper;
            (st.nodes, done)
        }
        Mode::Float => {
            let gens_f: Vec<Terms<f64>> = generators
                .iter()
                .map(|g| {
                    let scale = g.norm1().max(1e-300);
                    g.terms().iter().map(|(p, c)| (*p, c.to_f64() / scale)).collect()
                })
                .collect();
            let (st, active) = start_sweep(&gens_f);
            let frontier: Vec<usize> = (0..st.nodes.len()).collect();
            let st = sweep(&gens_f, upper, max_dim, st, frontier, &active)?;
            let done = st.echelon.rank() >= upper;
            (st.nodes, done)
        }
    };

    let mut nodes = nodes;
    let mut elements = materialize(&nodes, generators)?;
    if !closed_by_bound && mode == Mode::Exact {
        exact_completion(generators, &mut nodes, &mut elements, max_dim)?;
    }
    let provenance = trees(&nodes);
    Ok(LieBasis {
        n,
        mode,
        generators: generators.to_vec(),
        elements,
        provenance,
        closed: true,
        echelon: OnceLock::new(),
    })
}

/// Exact re-check of every generator bracket; adds anything the modular pass
/// missed and repeats until a full pass adds nothing.
fn exact_completion(
    generators: &[PauliSum],
    nodes: &mut Vec<Node>,
    elements: &mut Vec<PauliSum>,
    max_dim: usize,
) -> Result<()> {
    let mut ech: Echelon<PauliString, Coeff> = Echelon::new();
    for e in elements.iter() {
        if ech.insert(e.terms().iter()).is_none() {
            return Err(Error::Internal("modular independence not confirmed exactly".into()));
        }
    }
    let mut active = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        if nodes.contains(&Node::Gen(i)) {
            active.push(i);
            continue;
        }
        if ech.insert(g.terms().iter()).is_some() {
            nodes.push(Node::Gen(i));
            elements.push(g.clone());
            active.push(i);
        }
    }
    let mut frontier: Vec<usize> = (0..elements.len()).collect();
    while !frontier.is_empty() {
        let pairs: Vec<(usize, usize)> = frontier.iter().flat_map(|&e| active.iter().map(move |&g| (g, e))).collect();
        let cands: Vec<(usize, usize, PauliSum)> = pairs
            .par_iter()
            .map(|&(g, e)| generators[g].bracket(&elements[e]).map(|c| (g, e, c)))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (g, e, c) in cands {
            if c.is_zero() {
                continue;
            }
            if ech.insert(c.terms().iter()).is_some() {
                if ech.rank() > max_dim {
                    return Err(Error::budget(format!("closure dimension exceeds max_dim = {max_dim}")));
                }
                nodes.push(Node::Br(g, e));
                elements.push(c);
                next.push(elements.len() - 1);
            }
        }
        frontier = next;
    }
    Ok(())
}

/// One row of [`dimension_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct DimRow {
    pub k: usize,
    pub dim: usize,
    pub traceless_dim: usize,
    pub s_k_dim: usize,
    pub irreps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimReport {
    pub n: usize,
    pub full_dim: u128,
    pub rows: Vec<DimRow>,
    /// Every pair k < l satisfies dim_l - dim_k >= irreps(l) - irreps(k).
    pub bound_ok: bool,
    pub monotone: bool,
}

pub fn closure_dim(n: usize, k: usize, spec: &SymmetrySpec, max_dim: Option<usize>) -> Result<usize> {
    let basis = klocal_symmetric_basis(n, k, spec)?;
    Ok(close(&basis, spec, max_dim)?.dim())
}

pub fn dimension_report(n: usize, kmax: usize, spec: &SymmetrySpec, max_dim: Option<usize>) -> Result<DimReport> {
    if kmax > n || kmax == 0 {
        return Err(Error::validation("need 1 <= kmax <= n"));
    }
    let mut rows = Vec::new();
    for k in 1..=kmax {
        let dim = closure_dim(n, k, spec, max_dim)?;
        rows.push(DimRow {
            k,
            dim,
            traceless_dim: dim.saturating_sub(1),
            s_k_dim: s_k_dimension(n, k, spec)?,
            irreps: irrep_count(spec, k),
        });
    }
    let mut bound_ok = true;
    let mut monotone = true;
    for a in &rows {
        for b in &rows {
            if a.k < b.k {
                if b.dim < a.dim {
                    monotone = false;
                }
                if (b.dim as i64 - a.dim as i64) < (b.irreps as i64 - a.irreps as i64) {
                    bound_ok = false;
                }
            }
        }
    }
    Ok(DimReport { n, full_dim: full_symmetric_dim(spec), rows, bound_ok, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{make_generator, GeneratorKind};

    fn g(kind: GeneratorKind, sites: &[usize], n: usize) -> PauliSum {
        make_generator(kind, sites, n).unwrap()
    }

    #[test]
    fn small_bases() {
        let s = SymmetrySpec::qubits(2);
        let b1 = klocal_symmetric_basis(2, 1, &s).unwrap();
        assert_eq!(b1.len(), 3);
        let b2 = klocal_symmetric_basis(2, 2, &s).unwrap();
        assert_eq!(b2.len(), 6);
        assert!(b2.contains(&g(GeneratorKind::R, &[0, 1], 2)));
        assert!(b2.contains(&g(GeneratorKind::T, &[0, 1], 2)));
        assert_eq!(klocal_symmetric_basis(3, 3, &SymmetrySpec::qubits(3)).unwrap().len(), 20);
    }

    #[test]
    fn closure_examples() {
        let s = SymmetrySpec::qubits(2);
        let z1 = g(GeneratorKind::Zlocal, &[0], 2);
        assert_eq!(close(std::slice::from_ref(&z1), &s, None).unwrap().dim(), 1);
        let r = g(GeneratorKind::R, &[0, 1], 2);
        let b = close(&[r.clone(), z1.clone()], &s, None).unwrap();
        assert_eq!(b.dim(), 4);
        let z2 = g(GeneratorKind::Zlocal, &[1], 2);
        for want in [&z1, &z2, &r, &g(GeneratorKind::T, &[0, 1], 2)] {
            assert!(member(want, &b).unwrap().member);
        }
        for (el, tree) in b.elements().iter().zip(b.provenance()) {
            assert_eq!(&tree.eval(b.generators()).unwrap(), el);
        }
        let diff = z1.sub(&z2).unwrap();
        let m = member(&diff, &b).unwrap();
        assert!(m.member);
        let rebuilt = m
            .coordinates
            .iter()
            .map(|(i, c)| b.elements()[*i].scale(c))
            .fold(PauliSum::zero(2, Mode::Exact), |a, x| a.add(&x).unwrap());
        assert_eq!(rebuilt, diff);
    }

    #[test]
    fn non_symmetric_generator_rejected() {
        let s = SymmetrySpec::qubits(2);
        let x = PauliSum::from_words(2, &[("XI", 1, 1)]).unwrap();
        assert!(matches!(close(&[x], &s, None), Err(Error::Validation(_))));
    }

    #[test]
    fn budget_enforced() {
        let s = SymmetrySpec::qubits(3);
        let basis = klocal_symmetric_basis(3, 2, &s).unwrap();
        assert!(matches!(close(&basis, &s, Some(5)), Err(Error::Budget(_))));
    }

    #[test]
    fn report_small() {
        let s = SymmetrySpec::qubits(2);
        let r = dimension_report(2, 2, &s, None).unwrap();
        assert_eq!(r.rows[0].dim, 3);
        assert_eq!(r.rows[1].dim, 6);
        let r4 = dimension_report(4, 4, &SymmetrySpec::qubits(4), None).unwrap();
        assert_eq!(r4.rows.iter().map(|r| r.s_k_dim).collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        assert!(r4.bound_ok && r4.monotone);
    }

    #[test]
    fn three_body_not_in_two_local_closure() {
        let s = SymmetrySpec::qubits(3);
        let b = close(&klocal_symmetric_basis(3, 2, &s).unwrap(), &s, None).unwrap();
        assert!(b.dim() <= 19);
        assert!(!member(&g(GeneratorKind::Zmono, &[0, 1, 2], 3), &b).unwrap().member);
        let s4 = SymmetrySpec::qubits(4);
        let b4 = close(&klocal_symmetric_basis(4, 2, &s4).unwrap(), &s4, None).unwrap();
        let h = g(GeneratorKind::Zmono, &[0, 1, 2], 4).sub(&g(GeneratorKind::Zmono, &[0, 1, 3], 4)).unwrap();
        assert!(member(&h, &b4).unwrap().member);
    }

    #[test]
    fn float_mode_matches_exact_dimension() {
        let s = SymmetrySpec::qubits(3);
        let basis: Vec<PauliSum> =
            klocal_symmetric_basis(3, 2, &s).unwrap().iter().map(|b| b.to_mode(Mode::Float)).collect();
        let bf = close(&basis, &s, None).unwrap();
        let be = close(&klocal_symmetric_basis(3, 2, &s).unwrap(), &s, None).unwrap();
        assert_eq!(bf.dim(), be.dim());
    }
}

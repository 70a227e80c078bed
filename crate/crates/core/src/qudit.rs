//! Equal-gap qudits: energy-conserving couplings, their algebra, and
//! ancilla-assisted synthesis of energy-conserving evolutions.
//!
//! A coupling on levels `(l-1, l)` of a qudit behaves like a qubit with
//! `|l-1> = |0>` and `|l> = |1>`, so the qubit chain constructions carry over
//! with level projectors in place of identities.

use crate::compiler::{
    chain_hamiltonian, expand_to_pulses, sector_block, symmetric_with_ancilla, verify_plan, ChainSpec, CircuitPlan,
    ExpandOptions, Leaf, LeafTable, Level, Step, Target,
};
use crate::densesim::{embed_local, expm_unitary, herm_bracket, pauli_to_matrix, CMat, DIM_BUDGET};
use crate::echelon::{rank_of, Echelon};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Field, Fp};
use crate::op::Op;
use crate::pauli::{Coeff, Mode, PauliString, PauliSum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use std::collections::BTreeMap;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Entry tolerance for sparse storage and exactness checks.
const ENTRY_TOL: f64 = 1e-12;

/// `n` qudits of `d` equally spaced levels plus qubit ancillas of the same gap.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditSpec {
    pub n: usize,
    pub d: usize,
    pub gap: f64,
    pub ancillas: usize,
}

impl QuditSpec {
    pub fn new(n: usize, d: usize, gap: f64, ancillas: usize) -> Result<Self> {
        if n == 0 || d < 2 || ancillas > 2 || !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::validation("need n >= 1, d >= 2, a positive gap and at most two ancillas"));
        }
        Ok(Self { n, d, gap, ancillas })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.d; self.n];
        dims.extend(std::iter::repeat_n(2, self.ancillas));
        dims
    }

    pub fn system_dims(&self) -> Vec<usize> {
        vec![self.d; self.n]
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn ancilla_site(&self, k: usize) -> usize {
        self.n + k
    }

    pub fn ancilla_sites(&self) -> Vec<usize> {
        (0..self.ancillas).map(|k| self.ancilla_site(k)).collect()
    }

    /// Total excitation number of a basis index, ancillas included.
    pub fn excitation(&self, index: usize) -> usize {
        digits(index, &self.dims()).iter().sum()
    }

    pub fn intrinsic(&self) -> QuditOperator {
        let dims = self.dims();
        let entries = (0..self.total_dim())
            .map(|i| ((i, i), Complex64::new(self.gap * self.excitation(i) as f64, 0.0)))
            .filter(|(_, v)| v.norm() > 0.0)
            .collect();
        QuditOperator { dims, entries, hermitian: true }
    }
}

/// Mixed-radix digits of `index`, most significant site first.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn index_of(levels: &[usize], dims: &[usize]) -> usize {
    levels.iter().zip(dims).fold(0, |acc, (&l, &d)| acc * d + l)
}

/// Sparse complex matrix over a register of given site dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditOperator {
    dims: Vec<usize>,
    entries: BTreeMap<(usize, usize), Complex64>,
    hermitian: bool,
}

impl QuditOperator {
    pub fn new(dims: Vec<usize>, entries: impl IntoIterator<Item = ((usize, usize), Complex64)>) -> Result<Self> {
        let total: usize = dims.iter().product();
        let mut map: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for ((r, c), v) in entries {
            if r >= total || c >= total {
                return Err(Error::validation(format!("entry ({r}, {c}) outside dimension {total}")));
            }
            *map.entry((r, c)).or_insert(ZERO) += v;
        }
        map.retain(|_, v| v.norm() > ENTRY_TOL);
        let hermitian =
            map.iter().all(|(&(r, c), v)| (map.get(&(c, r)).copied().unwrap_or(ZERO) - v.conj()).norm() <= ENTRY_TOL);
        Ok(Self { dims, entries: map, hermitian })
    }

    pub fn from_dense(dims: Vec<usize>, m: &CMat) -> Result<Self> {
        let total: usize = dims.iter().product();
        if m.nrows() != total || m.ncols() != total {
            return Err(Error::validation("matrix does not match the dimensions"));
        }
        let entries = (0..total).flat_map(|r| (0..total).map(move |c| (r, c))).map(|(r, c)| ((r, c), m[(r, c)]));
        Self::new(dims, entries)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Complex64> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Unordered off-diagonal pairs `{r, c}` with a nonzero entry.
    pub fn offdiag_pairs(&self) -> usize {
        self.entries.keys().filter(|(r, c)| r < c).count()
            + self.entries.keys().filter(|(r, c)| r > c && !self.entries.contains_key(&(*c, *r))).count()
    }

    pub fn to_dense(&self) -> Result<CMat> {
        let d = self.dim();
        if d > DIM_BUDGET {
            return Err(Error::budget(format!("dimension {d} exceeds {DIM_BUDGET}")));
        }
        let mut m = CMat::zeros(d, d);
        for (&(r, c), v) in &self.entries {
            m[(r, c)] = *v;
        }
        Ok(m)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries.get(&(i, i)).map_or(0.0, |v| v.re)).collect()
    }
}

/// Energy-conserving couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interaction {
    /// `|l-1><l|_j (x) |1><0|_a + h.c.` with `ancilla` counted from zero.
    SystemAncilla {
        site: usize,
        ancilla: usize,
        level: usize,
    },
    /// `|l-1><l|_j (x) |l'><l'-1|_j' + h.c.`
    SystemPair {
        site: usize,
        other: usize,
        level: usize,
        other_level: usize,
    },
    /// `|l-1><l-1|_j - |l><l|_j`.
    Level {
        site: usize,
        level: usize,
    },
    AncillaZ {
        ancilla: usize,
    },
}

fn ket_bra(d: usize, r: usize, c: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(r, c)] = ONE;
    m
}

fn hc(m: CMat) -> CMat {
    let a = m.adjoint();
    m + a
}

impl Interaction {
    /// Sites (register indices) and the matrix on them.
    pub fn local(&self, spec: &QuditSpec) -> Result<(Vec<usize>, CMat)> {
        let d = spec.d;
        let check_level = |l: usize| {
            if l == 0 || l >= d {
                Err(Error::validation(format!("level {l} must lie in 1..{}", d - 1)))
            } else {
                Ok(())
            }
        };
        let check_site = |j: usize| {
            if j >= spec.n {
                Err(Error::validation(format!("site {j} out of range")))
            } else {
                Ok(())
            }
        };
        let check_ancilla = |a: usize| {
            if a >= spec.ancillas {
                Err(Error::validation(format!("ancilla {a} not present")))
            } else {
                Ok(())
            }
        };
        Ok(match *self {
            Interaction::SystemAncilla { site, ancilla, level } => {
                check_site(site)?;
                check_ancilla(ancilla)?;
                check_level(level)?;
                let m = hc(ket_bra(d, level - 1, level).kronecker(&ket_bra(2, 1, 0)));
                (vec![site, spec.ancilla_site(ancilla)], m)
            }
            Interaction::SystemPair { site, other, level, other_level } => {
                check_site(site)?;
                check_site(other)?;
                check_level(level)?;
                check_level(other_level)?;
                if site == other {
                    return Err(Error::validation("pair coupling needs two distinct sites"));
                }
                let m = hc(ket_bra(d, level - 1, level).kronecker(&ket_bra(d, other_level, other_level - 1)));
                (vec![site, other], m)
            }
            Interaction::Level { site, level } => {
                check_site(site)?;
                check_level(level)?;
                (vec![site], ket_bra(d, level - 1, level - 1) - ket_bra(d, level, level))
            }
            Interaction::AncillaZ { ancilla } => {
                check_ancilla(ancilla)?;
                (vec![spec.ancilla_site(ancilla)], ket_bra(2, 0, 0) - ket_bra(2, 1, 1))
            }
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Interaction::SystemAncilla { .. } => "Ra",
            Interaction::SystemPair { .. } => "Rss",
            Interaction::Level { .. } => "Zl",
            Interaction::AncillaZ { .. } => "Za",
        }
    }

    fn levels(&self) -> Vec<usize> {
        match *self {
            Interaction::SystemAncilla { level, .. } | Interaction::Level { level, .. } => vec![level],
            Interaction::SystemPair { level, other_level, .. } => vec![level, other_level],
            Interaction::AncillaZ { .. } => vec![],
        }
    }

    pub fn leaf(&self, spec: &QuditSpec) -> Result<Leaf> {
        let (sites, local) = self.local(spec)?;
        Leaf::dense(self.name(), &sites, &self.levels(), local, &spec.dims())
    }
}

impl Interaction {
    /// Inverse of the leaf naming used in plans.
    pub fn from_leaf(name: &str, sites: &[usize], levels: &[usize], spec: &QuditSpec) -> Result<Self> {
        let anc = |s: usize| {
            s.checked_sub(spec.n)
                .filter(|&a| a < spec.ancillas)
                .ok_or_else(|| Error::validation(format!("site {s} is not an ancilla")))
        };
        let bad = || Error::validation(format!("malformed qudit leaf '{name}' on {sites:?} levels {levels:?}"));
        let k = match (name, sites, levels) {
            ("Ra", &[site, a], &[level]) => Interaction::SystemAncilla { site, ancilla: anc(a)?, level },
            ("Rss", &[site, other], &[level, other_level]) => {
                Interaction::SystemPair { site, other, level, other_level }
            }
            ("Zl", &[site], &[level]) => Interaction::Level { site, level },
            ("Za" | "Z", &[a], &[]) => Interaction::AncillaZ { ancilla: anc(a)? },
            _ => return Err(bad()),
        };
        k.local(spec)?;
        Ok(k)
    }
}

pub fn build_interaction(kind: &Interaction, spec: &QuditSpec) -> Result<QuditOperator> {
    let (sites, local) = kind.local(spec)?;
    QuditOperator::from_dense(spec.dims(), &embed_local(&local, &spec.dims(), &sites)?)
}

/// True iff `op` commutes exactly with the intrinsic Hamiltonian, i.e. every
/// entry links basis states of equal excitation number.
pub fn check_energy_conserving(op: &QuditOperator, spec: &QuditSpec) -> Result<bool> {
    if op.dims() != spec.dims().as_slice() {
        return Err(Error::validation("operator dimensions do not match the spec"));
    }
    Ok(op.entries().keys().all(|&(r, c)| spec.excitation(r) == spec.excitation(c)))
}

/// Result of replacing a system-system coupling by couplings to ancilla `b`.
#[derive(Clone, Debug)]
pub struct TwoAncillaReduction {
    /// `s` with `R^{(l,l')}_{j,j'} Z_b = s * B(R^{(l')}_{j',b}, B(R^{(l)}_{j,b}, Z_b))`
    /// and `B(A, C) = i[A, C]`.
    pub scale: f64,
    /// The same factor when both brackets are plain commutators.
    pub commutator_scale: f64,
    pub identity_error: f64,
    /// Plan on `|psi> (x) |0>_b` acting as `e^{-i theta R}`.
    pub plan: CircuitPlan,
    pub sector_error: f64,
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real `c` with `a = c b`, if any.
fn dense_ratio(a: &CMat, b: &CMat) -> Option<f64> {
    Op::Dense(a.clone()).ratio_to(&Op::Dense(b.clone())).map(|c| c.to_f64())
}

/// Checks the two-ancilla identity for sites `j, j'` and levels `l, l'`, using
/// the last ancilla of `spec` as `b`, and builds the substitution plan.
pub fn two_ancilla_reduce(
    spec: &QuditSpec,
    j: usize,
    jp: usize,
    l: usize,
    lp: usize,
    theta: f64,
) -> Result<TwoAncillaReduction> {
    if spec.ancillas == 0 {
        return Err(Error::validation("the reduction needs an ancilla"));
    }
    let b = spec.ancillas - 1;
    let pair = Interaction::SystemPair { site: j, other: jp, level: l, other_level: lp };
    let first = Interaction::SystemAncilla { site: j, ancilla: b, level: l };
    let second = Interaction::SystemAncilla { site: jp, ancilla: b, level: lp };
    let zb = Interaction::AncillaZ { ancilla: b };
    let dims = spec.dims();
    let full = |k: &Interaction| -> Result<CMat> {
        let (s, m) = k.local(spec)?;
        embed_local(&m, &dims, &s)
    };
    let (r, r1, r2, z) = (full(&pair)?, full(&first)?, full(&second)?, full(&zb)?);
    let lhs = &r * &z;
    let nested = herm_bracket(&r2, &herm_bracket(&r1, &z));
    let scale = dense_ratio(&lhs, &nested)
        .ok_or_else(|| Error::Internal("pair coupling times Z_b is not a multiple of the nested bracket".into()))?;
    let identity_error = max_abs(&(&lhs - &nested * Complex64::new(scale, 0.0)));

    let mut table = LeafTable::new();
    let i2 = table.insert(second.leaf(spec)?);
    let i1 = table.insert(first.leaf(spec)?);
    let iz = table.insert(zb.leaf(spec)?);
    let expr =
        Expr::scale(Coeff::Float(scale), Expr::bracket(Expr::leaf(i2), Expr::bracket(Expr::leaf(i1), Expr::leaf(iz))));
    let (ps, pm) = pair.local(&QuditSpec { ancillas: 0, ..spec.clone() })?;
    let target = embed_local(&pm, &spec.system_dims(), &ps)?;
    let mut plan = CircuitPlan::empty(dims.clone(), vec![spec.ancilla_site(b)]);
    if spec.ancillas == 2 {
        // The other ancilla is a spectator: keep it in the sector as well.
        plan.ancilla = spec.ancilla_sites();
    }
    plan.primitive_set = "Ra+Za".into();
    plan.leaves = table.into_leaves();
    plan.steps = vec![Step::Evolve { expr, hamiltonian: Op::Dense(lhs), duration: theta }];
    plan.target = Some(Target { hamiltonian: Op::Dense(target), time: theta });
    plan.validate()?;
    let sector_error = verify_plan(&plan)?.recorded_phase_distance;
    Ok(TwoAncillaReduction { scale, commutator_scale: -scale, identity_error, plan, sector_error })
}

/// Coefficients of a diagonal operator over products of level operators.
///
/// Keys give one entry per site: `0` for the identity, `l` for
/// `|l-1><l-1| - |l><l|`. Exact for exact input.
pub fn qudit_diag_decompose(table: &[Coeff], n: usize, d: usize) -> Result<BTreeMap<Vec<usize>, Coeff>> {
    let total = d.checked_pow(n as u32).ok_or_else(|| Error::budget("table too large"))?;
    if table.len() != total || d < 2 {
        return Err(Error::validation(format!("table needs {total} entries")));
    }
    let mode = table.first().map_or(Mode::Exact, Coeff::mode);
    let mut data: Vec<Coeff> = table.iter().map(|c| c.in_mode(mode)).collect();
    let inv_d = Coeff::ratio(1, d as i64, mode);
    let dims = vec![d; n];
    for axis in 0..n {
        let stride = d.pow((n - 1 - axis) as u32);
        for base in (0..total).filter(|i| (i / stride).is_multiple_of(d)) {
            let v: Vec<Coeff> = (0..d).map(|r| data[base + r * stride].clone()).collect();
            let mean = v.iter().fold(Coeff::int(0, mode), |a, x| a.add(x)).mul(&inv_d);
            let mut c = vec![mean.clone()];
            c.push(v[0].sub(&mean));
            for r in 1..d - 1 {
                let next = c[r].add(&v[r]).sub(&mean);
                c.push(next);
            }
            for (r, x) in c.into_iter().enumerate() {
                data[base + r * stride] = x;
            }
        }
    }
    Ok(data.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (digits(i, &dims), c)).collect())
}

/// Diagonal of `sum_k c_k prod_j Z^{(k_j)}_j` as a table.
pub fn qudit_diag_reconstruct(coeffs: &BTreeMap<Vec<usize>, Coeff>, n: usize, d: usize, mode: Mode) -> Vec<Coeff> {
    let dims = vec![d; n];
    let total = d.pow(n as u32);
    (0..total)
        .map(|i| {
            let r = digits(i, &dims);
            coeffs.iter().fold(Coeff::int(0, mode), |acc, (key, c)| {
                // Z^{(l)} is +1 on level l-1, -1 on level l, zero elsewhere.
                let value = key.iter().zip(&r).fold(1i64, |v, (&l, &rj)| match l {
                    0 => v,
                    l if rj + 1 == l => v,
                    l if rj == l => -v,
                    _ => 0,
                });
                if value == 0 {
                    acc
                } else {
                    acc.add(&c.mul(&Coeff::int(value, mode)))
                }
            })
        })
        .collect()
}

/// Lie closure of Hermitian matrices under `i[A, B]`, with a modular rank
/// cross-check when the spanning elements have Gaussian-integer entries.
#[derive(Clone, Debug)]
pub struct DenseClosure {
    pub dim: usize,
    pub modular_rank: Option<usize>,
    pub elements: Vec<CMat>,
}

fn realify(m: &CMat) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn dense_lie_closure(generators: &[CMat], max_dim: usize, tol: f64) -> Result<DenseClosure> {
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut elements: Vec<CMat> = Vec::new();
    let try_add = |m: CMat, ortho: &mut Vec<Vec<f64>>, elements: &mut Vec<CMat>| -> Result<bool> {
        let mut v = realify(&m);
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 <= tol {
            return Ok(false);
        }
        for _ in 0..2 {
            for q in ortho.iter() {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= dot * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= tol * norm0.max(1.0) {
            return Ok(false);
        }
        if ortho.len() >= max_dim {
            return Err(Error::budget(format!("dense closure exceeds {max_dim} dimensions")));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        ortho.push(v);
        elements.push(m);
        Ok(true)
    };
    for g in generators {
        try_add(g.clone(), &mut ortho, &mut elements)?;
    }
    let mut frontier = 0;
    while frontier < elements.len() {
        let new = elements[frontier].clone();
        for k in 0..frontier {
            let c = herm_bracket(&elements[k], &new);
            try_add(c, &mut ortho, &mut elements)?;
        }
        frontier += 1;
    }
    let modular_rank = modular_rank(&elements);
    Ok(DenseClosure { dim: elements.len(), modular_rank, elements })
}

/// Rank over `F_p` of the real and imaginary parts, when they are integers.
fn modular_rank(elements: &[CMat]) -> Option<usize> {
    let rows: Option<Vec<Vec<Fp>>> = elements
        .iter()
        .map(|m| {
            realify(m)
                .into_iter()
                .map(|x| {
                    let r = x.round();
                    ((x - r).abs() < 1e-6 && r.abs() < 1e15).then(|| Fp::from_bigint(&BigInt::from(r as i64)))
                })
                .collect()
        })
        .collect();
    rows.map(|rows| rank_of(&rows))
}

#[derive(Clone, Debug)]
pub struct EnergyAlgebraReport {
    /// Number of system basis states per excitation number.
    pub multiplicities: BTreeMap<usize, usize>,
    pub dim: usize,
    pub closure_dim: usize,
    pub modular_rank: Option<usize>,
}

/// Dimension of the algebra of energy-conserving Hermitian operators on the
/// system, and the closure of diagonal projectors with neighbour couplings.
pub fn energy_algebra_dim(spec: &QuditSpec) -> Result<EnergyAlgebraReport> {
    let sys = QuditSpec { ancillas: 0, ..spec.clone() };
    let dims = sys.dims();
    let total = sys.total_dim();
    if total > 512 {
        return Err(Error::budget(format!("closure check limited to 512 states, got {total}")));
    }
    let mut multiplicities = BTreeMap::new();
    for i in 0..total {
        *multiplicities.entry(sys.excitation(i)).or_insert(0) += 1;
    }
    let dim = multiplicities.values().map(|m| m * m).sum();
    let mut gens: Vec<CMat> = (0..total).map(|i| ket_bra(total, i, i)).collect();
    for j in 0..sys.n.saturating_sub(1) {
        for l in 1..sys.d {
            for lp in 1..sys.d {
                let k = Interaction::SystemPair { site: j, other: j + 1, level: l, other_level: lp };
                let (s, m) = k.local(&sys)?;
                gens.push(embed_local(&m, &dims, &s)?);
            }
        }
    }
    let closure = dense_lie_closure(&gens, dim + 1, 1e-9)?;
    Ok(EnergyAlgebraReport { multiplicities, dim, closure_dim: closure.dim, modular_rank: closure.modular_rank })
}

/// `|a><b| - |b><a|` on the system space.
pub fn f_operator(spec: &QuditSpec, a: &[usize], b: &[usize]) -> CMat {
    let dims = spec.system_dims();
    let total: usize = dims.iter().product();
    let (ia, ib) = (index_of(a, &dims), index_of(b, &dims));
    ket_bra(total, ia, ib) - ket_bra(total, ib, ia)
}

/// `|| [F(r3, r2), F(r2, r1)] - F(r3, r1) ||_max`.
pub fn f_ladder_error(spec: &QuditSpec, r1: &[usize], r2: &[usize], r3: &[usize]) -> f64 {
    let (f32_, f21, f31) = (f_operator(spec, r3, r2), f_operator(spec, r2, r1), f_operator(spec, r3, r1));
    let comm = &f32_ * &f21 - &f21 * &f32_;
    max_abs(&(comm - f31))
}

/// Distance between `e^{i pi/4 (XX+YY+ZZ)}` on an embedded level pair of
/// two qudits and `e^{i pi/4}` times the swap of that pair.
pub fn embedded_swap_error(d: usize, l: usize, lp: usize) -> Result<f64> {
    let spec = QuditSpec::new(2, d, 1.0, 0)?;
    let dims = spec.dims();
    let hop = build_interaction(&Interaction::SystemPair { site: 0, other: 1, level: l, other_level: lp }, &spec)?;
    let (s0, z0) = Interaction::Level { site: 0, level: l }.local(&spec)?;
    let (s1, z1) = Interaction::Level { site: 1, level: lp }.local(&spec)?;
    let zz = embed_local(&z0, &dims, &s0)? * embed_local(&z1, &dims, &s1)?;
    // XX + YY is twice the hopping.
    let h = hop.to_dense()? * Complex64::new(2.0, 0.0) + zz;
    let u = expm_unitary(&h, -std::f64::consts::FRAC_PI_4)?;
    let pair = |x: usize, y: usize| index_of(&[l - 1 + x, lp - 1 + y], &dims);
    let mut err: f64 = 0.0;
    for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let expect = if (p, q) == (y, x) { Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4) } else { ZERO };
            err = err.max((u[(pair(p, q), pair(x, y))] - expect).norm());
        }
    }
    Ok(err)
}

/// Exact binary expansion of a float as a rational.
fn exact_coeff(x: f64) -> Coeff {
    BigRational::from_float(x).map_or(Coeff::Float(x), Coeff::Exact)
}

/// Pauli form of a qubit-register operator.
pub fn qubit_operator_to_pauli(op: &QuditOperator) -> Result<PauliSum> {
    if op.dims().iter().any(|&d| d != 2) {
        return Err(Error::validation("not a qubit register"));
    }
    let n = op.dims().len();
    let m = op.to_dense()?;
    let scale = 1.0 / (1usize << n) as f64;
    let mut terms = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let letters: Vec<crate::pauli::Pauli> = (0..n)
            .map(|j| match (code >> (2 * (n - 1 - j))) & 3 {
                0 => crate::pauli::Pauli::I,
                1 => crate::pauli::Pauli::X,
                2 => crate::pauli::Pauli::Y,
                _ => crate::pauli::Pauli::Z,
            })
            .collect();
        let p = PauliString::from_letters(&letters)?;
        let pm = pauli_to_matrix(&PauliSum::single(p, Coeff::int(1, Mode::Exact)))?;
        let c = (pm.adjoint() * &m).trace() * scale;
        if c.im.abs() > 1e-12 {
            return Err(Error::validation("operator is not Hermitian"));
        }
        if c.re.abs() > 1e-14 {
            terms.push((p, exact_coeff(c.re)));
        }
    }
    PauliSum::from_terms(n, Mode::Exact, terms)
}

fn check_target(h: &QuditOperator, spec: &QuditSpec) -> Result<()> {
    if spec.ancillas == 0 {
        return Err(Error::validation("synthesis needs at least one ancilla"));
    }
    if h.dims() != spec.system_dims().as_slice() {
        return Err(Error::validation("target must act on the system qudits only"));
    }
    if !h.is_hermitian() {
        return Err(Error::validation("target is not Hermitian"));
    }
    let sys = QuditSpec { ancillas: 0, ..spec.clone() };
    if !check_energy_conserving(h, &sys)? {
        return Err(Error::validation("target does not conserve the intrinsic energy"));
    }
    Ok(())
}

/// Plan for `e^{-iHt}` on the system with the first ancilla in |0>.
///
/// Two-level qudits with two-site hopping go through the qubit compiler;
/// everything else takes [`qudit_synthesize_generic`].
pub fn qudit_synthesize(h: &QuditOperator, spec: &QuditSpec, t: f64) -> Result<CircuitPlan> {
    check_target(h, spec)?;
    if spec.d == 2 && spec.ancillas == 1 {
        let pauli = qubit_operator_to_pauli(h)?;
        // Wider hopping terms are outside the qubit compiler's scope.
        match symmetric_with_ancilla(&pauli, t) {
            Err(Error::Validation(_)) => {}
            other => return other,
        }
    }
    qudit_synthesize_generic(h, spec, t)
}

/// Chain over embedded level pairs: ancilla first, then `(site, level)` hops.
struct QuditChain {
    sites: Vec<usize>,
    levels: Vec<usize>,
}

impl QuditChain {
    /// Diagonal on the system when the ancilla is in |0>:
    /// `prod_{k<t} Z^{(l_k)}_{j_k} * (-2 |l_t><l_t|_{j_t})`.
    fn sector_diagonal(&self, spec: &QuditSpec) -> Vec<f64> {
        let dims = spec.system_dims();
        let t = self.sites.len();
        (0..spec.system_dims().iter().product())
            .map(|i| {
                let r = digits(i, &dims);
                let mut v = 1.0;
                for k in 0..t {
                    let (j, l) = (self.sites[k], self.levels[k]);
                    v *= if k + 1 < t {
                        if r[j] + 1 == l {
                            1.0
                        } else if r[j] == l {
                            -1.0
                        } else {
                            0.0
                        }
                    } else if r[j] == l {
                        -2.0
                    } else {
                        0.0
                    };
                }
                v
            })
            .collect()
    }

    /// Tree over the leaf table whose value restricts to the shape on the
    /// embedded levels; returned with its evaluated operator.
    fn tree(&self, spec: &QuditSpec, table: &mut LeafTable) -> Result<(Expr, CMat)> {
        let a = 0;
        let t = self.sites.len();
        let qubits = t + 1;
        // Qubit chain on (ancilla, s_1, ..., s_t) = (0, 1, ..., t).
        let chain = ChainSpec::new((0..qubits).collect())?;
        let id = chain_hamiltonian(&chain, qubits)?;
        let map_leaf = |leaf: &Leaf| -> Result<Interaction> {
            let emb = |q: usize| (self.sites[q - 1], self.levels[q - 1]);
            Ok(match (leaf.name.as_str(), leaf.sites.as_slice()) {
                ("Z", &[0]) => Interaction::AncillaZ { ancilla: a },
                ("R", &[x, 0]) | ("R", &[0, x]) => {
                    let (site, level) = emb(x);
                    Interaction::SystemAncilla { site, ancilla: a, level }
                }
                ("R", &[x, y]) => {
                    let ((s1, l1), (s2, l2)) = (emb(x), emb(y));
                    // Embedded R on (x, y): |0 1><1 0| + h.c. in the x, y order.
                    Interaction::SystemPair { site: s1, other: s2, level: l1, other_level: l2 }
                }
                _ => return Err(Error::Internal(format!("unexpected chain leaf {}", leaf.name))),
            })
        };
        let mut map = Vec::new();
        for leaf in &id.leaves {
            map.push(table.insert(map_leaf(leaf)?.leaf(spec)?));
        }
        let expr = Expr::scale(Coeff::Float(id.sign as f64), id.expr.relabel(&|i| Expr::leaf(map[i])));
        let ops: Vec<Op> = table.leaves().iter().map(|l| l.op.clone()).collect();
        let Op::Dense(value) = expr.eval(&ops)? else { unreachable!() };
        Ok((expr, value))
    }
}

/// All chains with increasing sites and every level choice.
fn all_chains(spec: &QuditSpec) -> Vec<QuditChain> {
    let mut out = Vec::new();
    for mask in 1usize..(1 << spec.n) {
        let sites: Vec<usize> = (0..spec.n).filter(|j| mask >> j & 1 == 1).collect();
        let t = sites.len();
        for code in 0..(spec.d - 1).pow(t as u32) {
            let levels = (0..t).map(|k| (code / (spec.d - 1).pow(k as u32)) % (spec.d - 1) + 1).collect();
            out.push(QuditChain { sites: sites.clone(), levels });
        }
    }
    out
}

/// Coefficients over chains (and a final constant for `Z_a`) reproducing a
/// diagonal on the system.
fn solve_diagonal(chains: &[QuditChain], spec: &QuditSpec, target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut ech: Echelon<usize, f64> = Echelon::with_coordinates();
    let sparse = |v: &[f64]| -> Vec<(usize, f64)> {
        v.iter().enumerate().filter(|(_, x)| x.abs() > 1e-12).map(|(i, &x)| (i, x)).collect()
    };
    for c in chains {
        let v = sparse(&c.sector_diagonal(spec));
        ech.insert(v.iter().map(|(k, x)| (k, x)));
    }
    let ones = sparse(&vec![1.0; target.len()]);
    ech.insert(ones.iter().map(|(k, x)| (k, x)));
    let t = sparse(target);
    let red = ech.reduce(t.iter().map(|(k, x)| (k, x)));
    if !red.is_zero() {
        let residual = red.residual.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        return Err(Error::Internal(format!("chain diagonals do not span the target (residual {residual:.3e})")));
    }
    let coords = ech.coordinates(&red).unwrap_or_default();
    let mut x = vec![0.0; chains.len()];
    let mut constant = 0.0;
    for (i, c) in coords {
        if i < chains.len() {
            x[i] = c;
        } else {
            constant = c;
        }
    }
    Ok((x, constant))
}

/// Restriction of a full-register operator to the ancilla-|0> sector.
fn sector_part(m: &CMat, dims: &[usize], ancilla: &[usize]) -> Result<CMat> {
    Ok(sector_block(m, dims, ancilla)?.0)
}

/// Single excitation move from `p` to `q`: the coupling linking them.
fn linking_coupling(p: &[usize], q: &[usize]) -> Option<Interaction> {
    let diff: Vec<usize> = (0..p.len()).filter(|&j| p[j] != q[j]).collect();
    let [x, y] = diff[..] else { return None };
    // One site loses an excitation, the other gains it.
    let (loser, gainer) = if p[x] == q[x] + 1 && q[y] == p[y] + 1 {
        (x, y)
    } else if p[y] == q[y] + 1 && q[x] == p[x] + 1 {
        (y, x)
    } else {
        return None;
    };
    Some(Interaction::SystemPair { site: loser, other: gainer, level: p[loser], other_level: p[gainer] + 1 })
}

/// Path of single-excitation moves from `p` to `q` (equal excitation number).
fn move_path(p: &[usize], q: &[usize]) -> Vec<Vec<usize>> {
    let mut path = vec![p.to_vec()];
    let mut cur = p.to_vec();
    while cur != q {
        let gain = (0..cur.len()).find(|&j| cur[j] < q[j]).expect("unequal excitation");
        let lose = (0..cur.len()).find(|&j| cur[j] > q[j]).expect("unequal excitation");
        cur[gain] += 1;
        cur[lose] -= 1;
        path.push(cur.clone());
    }
    path
}

struct GenericBuilder<'a> {
    spec: &'a QuditSpec,
    dims: Vec<usize>,
    ancilla: Vec<usize>,
    chains: Vec<QuditChain>,
    table: LeafTable,
    projectors: BTreeMap<usize, Expr>,
}

impl GenericBuilder<'_> {
    fn ops(&self) -> Vec<Op> {
        self.table.leaves().iter().map(|l| l.op.clone()).collect()
    }

    fn value(&self, e: &Expr) -> Result<CMat> {
        match e.eval(&self.ops())? {
            Op::Dense(m) => Ok(m),
            Op::Pauli(_) => Err(Error::Internal("qudit leaves must be dense".into())),
        }
    }

    /// Sum of chain terms for a diagonal target, without the constant part.
    fn diagonal_terms(&mut self, target: &[f64]) -> Result<(Vec<Expr>, f64)> {
        let (x, constant) = solve_diagonal(&self.chains, self.spec, target)?;
        let mut terms = Vec::new();
        for (k, &c) in x.iter().enumerate() {
            if c.abs() <= 1e-12 {
                continue;
            }
            let (tree, value) = self.chains[k].tree(self.spec, &mut self.table)?;
            let sector = sector_part(&value, &self.dims, &self.ancilla)?;
            let expect = self.chains[k].sector_diagonal(self.spec);
            let err = (0..expect.len())
                .map(|i| (sector[(i, i)].re - expect[i]).abs())
                .fold(max_abs(&(sector.clone() - CMat::from_diagonal(&sector.diagonal()))), f64::max);
            if err > 1e-9 {
                return Err(Error::Internal("qudit chain does not act as predicted on the sector".into()));
            }
            terms.push(Expr::scale(Coeff::Float(c), tree));
        }
        Ok((terms, constant))
    }

    /// Lifted projector onto system basis state `p`.
    fn projector(&mut self, p: usize) -> Result<Expr> {
        if let Some(e) = self.projectors.get(&p) {
            return Ok(e.clone());
        }
        let total: usize = self.spec.system_dims().iter().product();
        let mut target = vec![0.0; total];
        target[p] = 1.0;
        let (terms, _) = self.diagonal_terms(&target)?;
        let e = if terms.len() == 1 { terms.into_iter().next().expect("one") } else { Expr::Sum(terms) };
        self.projectors.insert(p, e.clone());
        Ok(e)
    }

    /// Tree whose sector restriction is `i|p><q| - i|q><p|`.
    fn y_tree(&mut self, p: &[usize], q: &[usize]) -> Result<Expr> {
        let sys = self.spec.system_dims();
        let path = move_path(p, q);
        let mut acc: Option<Expr> = None;
        for w in path.windows(2) {
            let coupling = linking_coupling(&w[0], &w[1]).ok_or_else(|| Error::Internal("broken move path".into()))?;
            let leaf = self.table.insert(coupling.leaf(self.spec)?);
            let proj = self.projector(index_of(&w[0], &sys))?;
            let step = self.normalize(Expr::bracket(proj, Expr::leaf(leaf)), &w[0], &w[1], false)?;
            acc = Some(match acc {
                None => step,
                Some(prev) => self.normalize(Expr::bracket(step, prev), p, &w[1], false)?,
            });
        }
        acc.ok_or_else(|| Error::validation("pair states coincide"))
    }

    /// Rescales `e` so its sector restriction is exactly the Y (or X) pair
    /// operator between `p` and `q`.
    fn normalize(&self, e: Expr, p: &[usize], q: &[usize], real: bool) -> Result<Expr> {
        let sys = self.spec.system_dims();
        let total: usize = sys.iter().product();
        let (ip, iq) = (index_of(p, &sys), index_of(q, &sys));
        let mut expect = CMat::zeros(total, total);
        let (a, b) = if real { (ONE, ONE) } else { (Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)) };
        expect[(ip, iq)] = a;
        expect[(iq, ip)] = b;
        let got = sector_part(&self.value(&e)?, &self.dims, &self.ancilla)?;
        let c =
            dense_ratio(&got, &expect).ok_or_else(|| Error::Internal("pair tree does not isolate its pair".into()))?;
        Ok(if (c - 1.0).abs() < 1e-12 { e } else { Expr::scale(Coeff::Float(1.0 / c), e) })
    }
}

/// Generic construction for any `d`: diagonal part from ancilla chains over
/// embedded level pairs, off-diagonal pairs from projector brackets.
pub fn qudit_synthesize_generic(h: &QuditOperator, spec: &QuditSpec, t: f64) -> Result<CircuitPlan> {
    check_target(h, spec)?;
    let dims = spec.dims();
    let ancilla = spec.ancilla_sites();
    let sys = spec.system_dims();
    let total: usize = sys.iter().product();
    if 2 * total > DIM_BUDGET || spec.total_dim() > DIM_BUDGET {
        return Err(Error::budget("qudit register exceeds the dense budget"));
    }
    let target = h.to_dense()?;
    let mut plan = CircuitPlan::empty(dims.clone(), ancilla.clone());
    plan.primitive_set = "Ra+Rss+Za".into();
    plan.target = Some(Target { hamiltonian: Op::Dense(target.clone()), time: t });

    // A target that is a multiple of one coupling needs a single pulse.
    let sys_spec = QuditSpec { ancillas: 0, ..spec.clone() };
    for j in 0..spec.n {
        for jp in 0..spec.n {
            for l in 1..spec.d {
                for lp in 1..spec.d {
                    if j == jp {
                        continue;
                    }
                    let k = Interaction::SystemPair { site: j, other: jp, level: l, other_level: lp };
                    let m = build_interaction(&k, &sys_spec)?.to_dense()?;
                    if let Some(c) = dense_ratio(&target, &m) {
                        let mut table = LeafTable::new();
                        let leaf = table.insert(k.leaf(spec)?);
                        plan.leaves = table.into_leaves();
                        plan.steps = vec![Step::Pulse { leaf, duration: c * t }];
                        plan.level = Level::Pulse;
                        return Ok(plan);
                    }
                }
            }
        }
    }

    let mut b = GenericBuilder {
        spec,
        dims: dims.clone(),
        ancilla: ancilla.clone(),
        chains: all_chains(spec),
        table: LeafTable::new(),
        projectors: BTreeMap::new(),
    };
    let diag: Vec<f64> = (0..total).map(|i| target[(i, i)].re).collect();
    let (diag_terms, constant) =
        if diag.iter().any(|x| x.abs() > 1e-12) { b.diagonal_terms(&diag)? } else { (vec![], 0.0) };
    let mut pair_terms = Vec::new();
    for p in 0..total {
        for q in p + 1..total {
            let hpq = target[(p, q)];
            if hpq.norm() <= 1e-12 {
                continue;
            }
            let (rp, rq) = (digits(p, &sys), digits(q, &sys));
            let y = b.y_tree(&rp, &rq)?;
            if hpq.im.abs() > 1e-12 {
                // i|p><q| - i|q><p| carries Im h.
                pair_terms.push(Expr::scale(Coeff::Float(hpq.im), y.clone()));
            }
            if hpq.re.abs() > 1e-12 {
                let proj = b.projector(p)?;
                let x = b.normalize(Expr::bracket(proj, y), &rp, &rq, true)?;
                pair_terms.push(Expr::scale(Coeff::Float(hpq.re), x));
            }
        }
    }
    let za = if constant.abs() > 1e-12 {
        Some(b.table.insert(Interaction::AncillaZ { ancilla: 0 }.leaf(spec)?))
    } else {
        None
    };
    let ops = b.ops();
    let value_of = |e: &Expr| -> Result<Op> { e.eval(&ops) };
    let mut steps = Vec::new();
    if pair_terms.is_empty() {
        for term in diag_terms {
            let hamiltonian = value_of(&term)?;
            steps.push(Step::Evolve { expr: term, hamiltonian, duration: t });
        }
        if let Some(leaf) = za {
            steps.push(Step::Pulse { leaf, duration: constant * t });
        }
    } else {
        let mut parts = Vec::new();
        let mut diag_parts = diag_terms;
        if let Some(leaf) = za {
            diag_parts.push(Expr::scale(Coeff::Float(constant), Expr::leaf(leaf)));
        }
        match diag_parts.len() {
            0 => {}
            1 => parts.push(diag_parts.pop().expect("one")),
            _ => parts.push(Expr::Sum(diag_parts)),
        }
        parts.extend(pair_terms);
        let expr = if parts.len() == 1 { parts.pop().expect("one") } else { Expr::Sum(parts) };
        let hamiltonian = value_of(&expr)?;
        steps.push(Step::Evolve { expr, hamiltonian, duration: t });
    }
    plan.leaves = b.table.into_leaves();
    plan.steps = steps;
    plan.validate()?;
    Ok(plan)
}

/// Hamiltonian-level synthesis followed by pulse expansion to `eps`.
pub fn qudit_compile(
    h: &QuditOperator,
    spec: &QuditSpec,
    t: f64,
    eps: f64,
    opts: ExpandOptions,
) -> Result<CircuitPlan> {
    let plan = qudit_synthesize(h, spec, t)?;
    let pulses = expand_to_pulses(&plan, eps, opts)?;
    let v = verify_plan(&pulses)?;
    if !v.within(eps) {
        return Err(Error::Verification(format!("distance {:.3e}, leakage {:.3e}", v.distance, v.leakage)));
    }
    Ok(pulses)
}

/// `i|p><q| - i|q><p|` between two system basis states (given by levels).
pub fn pair_rotation(spec: &QuditSpec, p: &[usize], q: &[usize]) -> Result<QuditOperator> {
    let dims = spec.system_dims();
    let (ip, iq) = (index_of(p, &dims), index_of(q, &dims));
    QuditOperator::new(dims, [((ip, iq), Complex64::new(0.0, 1.0)), ((iq, ip), Complex64::new(0.0, -1.0))])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, d: usize, anc: usize) -> QuditSpec {
        QuditSpec::new(n, d, 1.0, anc).unwrap()
    }

    #[test]
    fn qubit_embedding_of_couplings() {
        let s = spec(1, 2, 1);
        let r = build_interaction(&Interaction::SystemAncilla { site: 0, ancilla: 0, level: 1 }, &s).unwrap();
        let expect = PauliSum::from_words(2, &[("XX", 1, 2), ("YY", 1, 2)]).unwrap();
        assert_eq!(qubit_operator_to_pauli(&r).unwrap(), expect);
        let z = build_interaction(&Interaction::Level { site: 0, level: 1 }, &s).unwrap();
        assert_eq!(qubit_operator_to_pauli(&z).unwrap(), PauliSum::from_words(2, &[("ZI", 1, 1)]).unwrap());
    }

    #[test]
    fn pair_coupling_has_two_pairs_with_an_ancilla() {
        let r =
            build_interaction(&Interaction::SystemPair { site: 0, other: 1, level: 1, other_level: 2 }, &spec(2, 3, 1))
                .unwrap();
        assert_eq!(r.offdiag_pairs(), 2);
        let bare =
            build_interaction(&Interaction::SystemPair { site: 0, other: 1, level: 1, other_level: 2 }, &spec(2, 3, 0))
                .unwrap();
        assert_eq!(bare.offdiag_pairs(), 1);
    }

    #[test]
    fn conservation() {
        let s = spec(2, 3, 1);
        assert!(check_energy_conserving(&s.intrinsic(), &s).unwrap());
        let raise = QuditOperator::new(s.dims(), [((0, 2), ONE), ((2, 0), ONE)]).unwrap();
        assert!(!check_energy_conserving(&raise, &s).unwrap());
    }

    #[test]
    fn diag_example() {
        let table: Vec<Coeff> = [1, 0, 0].iter().map(|&v| Coeff::int(v, Mode::Exact)).collect();
        let c = qudit_diag_decompose(&table, 1, 3).unwrap();
        assert_eq!(c[&vec![0]], Coeff::ratio(1, 3, Mode::Exact));
        assert_eq!(c[&vec![1]], Coeff::ratio(2, 3, Mode::Exact));
        assert_eq!(c[&vec![2]], Coeff::ratio(1, 3, Mode::Exact));
        assert_eq!(qudit_diag_reconstruct(&c, 1, 3, Mode::Exact), table);
    }

    #[test]
    fn two_ancilla_identity() {
        for d in [2, 3] {
            for l in 1..d {
                for lp in 1..d {
                    let red = two_ancilla_reduce(&spec(2, d, 2), 0, 1, l, lp, 0.4).unwrap();
                    assert!(red.identity_error < 1e-12, "{d} {l} {lp}");
                    assert!(red.sector_error < 1e-10, "{}", red.sector_error);
                }
            }
        }
    }

    #[test]
    fn algebra_dimensions() {
        let r = energy_algebra_dim(&spec(2, 3, 0)).unwrap();
        assert_eq!(r.multiplicities.values().copied().collect::<Vec<_>>(), vec![1, 2, 3, 2, 1]);
        assert_eq!((r.dim, r.closure_dim), (19, 19));
        assert_eq!(r.modular_rank, Some(19));
        assert_eq!(energy_algebra_dim(&spec(1, 4, 0)).unwrap().closure_dim, 4);
    }

    #[test]
    fn ladder_and_swap() {
        let s = spec(2, 3, 0);
        assert!(f_ladder_error(&s, &[0, 2], &[1, 1], &[2, 0]) < 1e-15);
        assert!(embedded_swap_error(3, 1, 2).unwrap() < 1e-12);
    }

    #[test]
    fn pair_rotation_plan_exact() {
        let s = spec(2, 3, 1);
        let h = pair_rotation(&s, &[0, 2], &[1, 1]).unwrap();
        let plan = qudit_synthesize(&h, &s, 0.8).unwrap();
        let v = verify_plan(&plan).unwrap();
        assert!(v.recorded_phase_distance < 1e-10 && v.leakage < 1e-10, "{v:?}");
    }

    #[test]
    fn diagonal_plan_exact() {
        let s = spec(2, 3, 1);
        let entries = (0..9).map(|i| ((i, i), Complex64::new((i * i) as f64 / 7.0 - 0.3, 0.0)));
        let h = QuditOperator::new(s.system_dims(), entries).unwrap();
        let plan = qudit_synthesize(&h, &s, 0.5).unwrap();
        let v = verify_plan(&plan).unwrap();
        assert!(v.recorded_phase_distance < 1e-10, "{v:?}");
    }

    /// Deterministic energy-conserving Hermitian matrix on the system.
    fn conserving(s: &QuditSpec, seed: u64) -> QuditOperator {
        let dims = s.system_dims();
        let total: usize = dims.iter().product();
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        let mut entries = Vec::new();
        for p in 0..total {
            entries.push(((p, p), Complex64::new(next(), 0.0)));
            for q in p + 1..total {
                if s.excitation(p) == s.excitation(q) {
                    let h = Complex64::new(next(), next());
                    entries.push(((p, q), h));
                    entries.push(((q, p), h.conj()));
                }
            }
        }
        QuditOperator::new(dims, entries).unwrap()
    }

    #[test]
    fn general_conserving_plan_exact() {
        let s = spec(2, 3, 1);
        let h = conserving(&QuditSpec { ancillas: 0, ..s.clone() }, 7);
        let plan = qudit_synthesize(&h, &s, 0.45).unwrap();
        let v = verify_plan(&plan).unwrap();
        assert!(v.recorded_phase_distance < 1e-9 && v.leakage < 1e-9, "{v:?}");
    }

    #[test]
    fn qubit_case_agrees_with_qubit_compiler() {
        let s = spec(3, 2, 1);
        let sys = QuditSpec { ancillas: 0, ..s.clone() };
        let mut m = conserving(&sys, 3).to_dense().unwrap();
        // Keep the diagonal, replace the couplings by neighbour hopping.
        for r in 0..8 {
            for c in 0..8 {
                if r != c {
                    m[(r, c)] = ZERO;
                }
            }
        }
        for (j, w) in [(0, 0.4), (1, -0.7)] {
            let k = Interaction::SystemPair { site: j, other: j + 1, level: 1, other_level: 1 };
            m += build_interaction(&k, &sys).unwrap().to_dense().unwrap() * Complex64::new(w, 0.0);
        }
        let h = QuditOperator::from_dense(sys.dims(), &m).unwrap();
        assert!(qudit_synthesize(&conserving(&sys, 3), &s, 0.3).is_ok());
        let direct = qudit_synthesize(&h, &s, 0.3).unwrap();
        let generic = qudit_synthesize_generic(&h, &s, 0.3).unwrap();
        let (d, _) = crate::compiler::plan_distance(&direct, &generic).unwrap();
        assert!(d < 1e-10, "{d}");
        assert!(verify_plan(&generic).unwrap().recorded_phase_distance < 1e-10);
    }

    #[test]
    fn two_ancilla_scale_is_minus_half() {
        let red = two_ancilla_reduce(&spec(2, 3, 2), 0, 1, 2, 1, 0.2).unwrap();
        assert!((red.scale + 0.5).abs() < 1e-12);
        assert!((red.commutator_scale - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_coupling_is_one_pulse() {
        let s = spec(2, 3, 1);
        let sys = QuditSpec { ancillas: 0, ..s.clone() };
        let h =
            build_interaction(&Interaction::SystemPair { site: 1, other: 0, level: 2, other_level: 1 }, &sys).unwrap();
        let plan = qudit_synthesize(&h, &s, 0.9).unwrap();
        assert_eq!(plan.pulse_count(), 1);
        assert!(verify_plan(&plan).unwrap().recorded_phase_distance < 1e-12);
    }

    #[test]
    fn pair_rotation_pulses() {
        let s = spec(2, 3, 1);
        let h = pair_rotation(&s, &[0, 2], &[1, 1]).unwrap();
        let plan = qudit_compile(&h, &s, 1.0, 1e-2, ExpandOptions::default()).unwrap();
        assert!(plan.measured_error.unwrap() <= 1e-2);
    }
}

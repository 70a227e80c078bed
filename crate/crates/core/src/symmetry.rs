//! Abelian (U(1)-type) symmetry: sectors, charge vectors, twirling and the
//! weight-sum membership test for diagonal Hamiltonians.

use crate::echelon::Echelon;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::pauli::{Coeff, Mode, Pauli, PauliString, PauliSum};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Per-site integer charges. Site `j` transforms as `diag(e^{i c theta})`
/// over its listed charges; for qubits the list is indexed by the
/// computational basis value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetrySpec {
    sites: Vec<Vec<i64>>,
}

impl SymmetrySpec {
    pub fn new(sites: Vec<Vec<i64>>) -> Result<Self> {
        if sites.iter().any(|s| s.is_empty()) {
            return Err(Error::validation("every site needs at least one charge"));
        }
        Ok(Self { sites })
    }

    /// Qubits with Pauli-Z charges: |0> has +1, |1> has -1.
    pub fn qubits(n: usize) -> Self {
        Self { sites: vec![vec![1, -1]; n] }
    }

    /// Equal-gap qudits with energy charges 0..d-1.
    pub fn qudits(n: usize, d: usize) -> Self {
        Self { sites: vec![(0..d as i64).collect(); n] }
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn site_charges(&self, j: usize) -> &[i64] {
        &self.sites[j]
    }

    pub fn is_qubit(&self) -> bool {
        self.sites.iter().all(|s| s.len() == 2)
    }

    /// The first `l` sites.
    pub fn restrict(&self, l: usize) -> SymmetrySpec {
        Self { sites: self.sites[..l.min(self.n())].to_vec() }
    }

    fn require_qubits(&self, n: usize) -> Result<()> {
        if !self.is_qubit() {
            return Err(Error::validation("operation needs a two-level (qubit) charge spec"));
        }
        if self.n() != n {
            return Err(Error::validation(format!("spec has {} sites but operator has {n}", self.n())));
        }
        Ok(())
    }

    /// Total charge as a Pauli sum: per site `(c0+c1)/2 I + (c0-c1)/2 Z`.
    pub fn charge_operator(&self, mode: Mode) -> Result<PauliSum> {
        if !self.is_qubit() {
            return Err(Error::validation("charge operator as a Pauli sum needs qubit sites"));
        }
        let n = self.n();
        let id = PauliString::identity(n)?;
        let mut terms = Vec::new();
        for (j, c) in self.sites.iter().enumerate() {
            terms.push((id, Coeff::ratio(c[0] + c[1], 2, mode)));
            terms.push((id.with(j, Pauli::Z), Coeff::ratio(c[0] - c[1], 2, mode)));
        }
        PauliSum::from_terms(n, mode, terms)
    }

    /// Total charge of the basis state whose site values are given.
    pub fn charge_of(&self, levels: &[usize]) -> i64 {
        levels.iter().enumerate().map(|(j, &v)| self.sites[j][v]).sum()
    }

    /// Total charge of the qubit basis state with bitmask `z`.
    pub fn qubit_charge(&self, z: u64) -> i64 {
        (0..self.n()).map(|j| self.sites[j][(z >> j & 1) as usize]).sum()
    }
}

/// `m_q`: number of basis states with total charge `q`.
pub fn sector_multiplicities(spec: &SymmetrySpec) -> BTreeMap<i64, u128> {
    let mut poly: BTreeMap<i64, u128> = BTreeMap::from([(0, 1)]);
    for site in spec.sites() {
        let mut next = BTreeMap::new();
        for (&q, &m) in &poly {
            for &c in site {
                *next.entry(q + c).or_insert(0) += m;
            }
        }
        poly = next;
    }
    poly
}

/// Number of distinct total charges on the first `l` sites.
pub fn irrep_count(spec: &SymmetrySpec, l: usize) -> usize {
    sector_multiplicities(&spec.restrict(l)).len()
}

pub fn dim_gap_bound(n: usize, k: usize, spec: &SymmetrySpec) -> Result<usize> {
    if k > n || n > spec.n() {
        return Err(Error::validation(format!("need k <= n <= sites, got k={k}, n={n}")));
    }
    Ok(irrep_count(spec, n) - irrep_count(spec, k))
}

/// `sum_q m_q^2`, the dimension of the full symmetric algebra.
pub fn full_symmetric_dim(spec: &SymmetrySpec) -> u128 {
    sector_multiplicities(spec).values().map(|m| m * m).sum()
}

/// Sector traces `Tr(Pi_q A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeVector {
    pub sectors: BTreeMap<i64, Coeff>,
}

impl ChargeVector {
    pub fn total(&self) -> Coeff {
        self.sectors.values().fold(Coeff::int(0, Mode::Exact), |a, c| a.add(c))
    }

    pub fn values(&self) -> Vec<Coeff> {
        self.sectors.values().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.sectors.values().all(|c| c.is_zero())
    }
}

/// Charge vector computed from the diagonal part of `a`.
pub fn charge_vector(a: &PauliSum, spec: &SymmetrySpec) -> Result<ChargeVector> {
    spec.require_qubits(a.n())?;
    if a.n() <= 20 {
        charge_vector_enumerate(a, spec)
    } else {
        charge_vector_polynomial(a, spec)
    }
}

/// Sums `<z|A|z>` over every basis state.
pub fn charge_vector_enumerate(a: &PauliSum, spec: &SymmetrySpec) -> Result<ChargeVector> {
    spec.require_qubits(a.n())?;
    let mode = a.mode();
    let mut sectors: BTreeMap<i64, Coeff> =
        sector_multiplicities(spec).keys().map(|&q| (q, Coeff::int(0, mode))).collect();
    let diag: Vec<(u64, Coeff)> = a.diagonal_part().terms().iter().map(|(p, c)| (p.z_bits(), c.clone())).collect();
    if diag.is_empty() {
        return Ok(ChargeVector { sectors });
    }
    let mut sums: BTreeMap<i64, BTreeMap<u64, i64>> = BTreeMap::new();
    for z in 0..(1u64 << a.n()) {
        let q = spec.qubit_charge(z);
        let row = sums.entry(q).or_default();
        for (b, _) in &diag {
            let sign = if (b & z).count_ones() % 2 == 0 { 1 } else { -1 };
            *row.entry(*b).or_insert(0) += sign;
        }
    }
    for (q, row) in sums {
        let mut acc = Coeff::int(0, mode);
        for (b, c) in &diag {
            acc = acc.add(&c.mul(&Coeff::int(row[b], mode)));
        }
        sectors.insert(q, acc);
    }
    Ok(ChargeVector { sectors })
}

/// Signed sector counts via products of per-site charge polynomials.
pub fn charge_vector_polynomial(a: &PauliSum, spec: &SymmetrySpec) -> Result<ChargeVector> {
    spec.require_qubits(a.n())?;
    let mode = a.mode();
    let mut sectors: BTreeMap<i64, Coeff> =
        sector_multiplicities(spec).keys().map(|&q| (q, Coeff::int(0, mode))).collect();
    for (p, c) in a.diagonal_part().terms() {
        let b = p.z_bits();
        let mut poly: BTreeMap<i64, i128> = BTreeMap::from([(0, 1)]);
        for j in 0..a.n() {
            let s = if b >> j & 1 == 1 { -1 } else { 1 };
            let (c0, c1) = (spec.sites[j][0], spec.sites[j][1]);
            let mut next = BTreeMap::new();
            for (&q, &m) in &poly {
                *next.entry(q + c0).or_insert(0) += m;
                *next.entry(q + c1).or_insert(0) += s * m;
            }
            poly = next;
        }
        for (q, m) in poly {
            if m != 0 {
                let slot = sectors.get_mut(&q).expect("sector exists");
                *slot = slot.add(&c.mul(&Coeff::int(m as i64, mode)));
            }
        }
    }
    Ok(ChargeVector { sectors })
}

/// `Tr(A U(theta))` with `U(theta) = prod_j diag(e^{i c theta})`.
pub fn character_function(a: &PauliSum, spec: &SymmetrySpec, theta: f64) -> Result<Complex64> {
    let chi = charge_vector(a, spec)?;
    Ok(chi.sectors.iter().map(|(&q, c)| Complex64::from_polar(1.0, q as f64 * theta) * c.to_f64()).sum())
}

/// `cos^{n-v}(theta) (i sin theta)^v`, the character of a weight-v Z monomial
/// divided by `2^n`.
pub fn xi(n: usize, v: usize, theta: f64) -> Complex64 {
    let c = theta.cos().powi((n - v) as i32);
    Complex64::new(0.0, theta.sin()).powu(v as u32) * c
}

/// Group average of `a` over the U(1) action of `spec`.
///
/// Each X/Y site rotates as `X -> cos X - sin Y`, `Y -> cos Y + sin X` at
/// frequency `c0 - c1`; only frequency-balanced products survive.
pub fn twirl(a: &PauliSum, spec: &SymmetrySpec) -> Result<PauliSum> {
    spec.require_qubits(a.n())?;
    let mode = a.mode();
    let mut out = PauliSum::zero(a.n(), mode);
    for (p, c) in a.terms() {
        let t = twirl_string(p, spec)?;
        out = out.add(&t.to_mode(mode).scale(c))?;
    }
    Ok(out)
}

fn twirl_string(p: &PauliString, spec: &SymmetrySpec) -> Result<PauliSum> {
    let n = p.n();
    let flips: Vec<usize> = p.flip_sites().into_iter().filter(|&j| spec.sites[j][0] != spec.sites[j][1]).collect();
    if flips.is_empty() {
        return PauliSum::from_terms(n, Mode::Exact, [(*p, Coeff::int(1, Mode::Exact))]);
    }
    let s = flips.len();
    if s > 20 {
        return Err(Error::budget("twirl of a string with more than 20 flip sites"));
    }
    let delta: Vec<i64> = flips.iter().map(|&j| spec.sites[j][0] - spec.sites[j][1]).collect();
    // Gaussian-integer accumulators keyed by the output letter pattern.
    let mut acc: BTreeMap<u64, (i64, i64)> = BTreeMap::new();
    for signs in 0..(1u64 << s) {
        let freq: i64 = (0..s).map(|i| if signs >> i & 1 == 0 { delta[i] } else { -delta[i] }).sum();
        if freq != 0 {
            continue;
        }
        for letters in 0..(1u64 << s) {
            // unit factor i^k accumulated across sites
            let mut k = 0u8;
            for (i, &site) in flips.iter().enumerate() {
                let plus = signs >> i & 1 == 0;
                let same = letters >> i & 1 == 0;
                let orig = p.get(site);
                let f = match (orig, same, plus) {
                    (_, true, _) => 0,
                    (Pauli::X, false, true) => 1,
                    (Pauli::X, false, false) => 3,
                    (Pauli::Y, false, true) => 3,
                    (Pauli::Y, false, false) => 1,
                    _ => unreachable!("flip sites carry X or Y"),
                };
                k = (k + f) & 3;
            }
            let e = acc.entry(letters).or_insert((0, 0));
            match k {
                0 => e.0 += 1,
                1 => e.1 += 1,
                2 => e.0 -= 1,
                _ => e.1 -= 1,
            }
        }
    }
    let den = 1i64 << s;
    let mut terms = Vec::new();
    for (letters, (re, im)) in acc {
        if im != 0 {
            return Err(Error::Internal(format!("twirl of {p} left an imaginary part")));
        }
        if re == 0 {
            continue;
        }
        let mut q = *p;
        for (i, &j) in flips.iter().enumerate() {
            if letters >> i & 1 == 1 {
                let l = if p.get(j) == Pauli::X { Pauli::Y } else { Pauli::X };
                q = q.with(j, l);
            }
        }
        terms.push((q, Coeff::ratio(re, den, Mode::Exact)));
    }
    PauliSum::from_terms(n, Mode::Exact, terms)
}

/// Outcome of the weight-sum test.
#[derive(Clone, Debug, PartialEq)]
pub struct SkReport {
    pub pass: bool,
    /// Non-vanishing sums of coefficients over Z^b with `w(b) = y > k`.
    pub violations: BTreeMap<usize, Coeff>,
}

pub fn s_k_test(h: &PauliSum, k: usize) -> Result<SkReport> {
    if !h.is_diagonal() {
        return Err(Error::validation("weight-sum test needs a diagonal Hamiltonian"));
    }
    let mut sums: BTreeMap<usize, Coeff> = BTreeMap::new();
    for (p, c) in h.terms() {
        let w = p.weight();
        if w > k {
            let slot = sums.entry(w).or_insert_with(|| Coeff::int(0, h.mode()));
            *slot = slot.add(c);
        }
    }
    let violations: BTreeMap<usize, Coeff> = sums.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    Ok(SkReport { pass: violations.is_empty(), violations })
}

fn rank_of_vectors(vectors: &[Vec<Coeff>]) -> usize {
    let mut e: Echelon<usize, Coeff> = Echelon::new();
    for v in vectors {
        let entries: Vec<(usize, Coeff)> =
            v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
        e.insert(entries.iter().map(|(k, v)| (k, v)));
    }
    e.rank()
}

/// True iff the charge vector of `h` is a real combination of the
/// generators' charge vectors.
pub fn charge_span_test(h: &PauliSum, generators: &[PauliSum], spec: &SymmetrySpec) -> Result<bool> {
    for g in generators {
        if !g.is_symmetric(spec)? {
            return Err(Error::validation("charge span test needs symmetric generators"));
        }
    }
    let mut vecs: Vec<Vec<Coeff>> =
        generators.iter().map(|g| charge_vector(g, spec).map(|c| c.values())).collect::<Result<_>>()?;
    let base = rank_of_vectors(&vecs);
    vecs.push(charge_vector(h, spec)?.values());
    Ok(rank_of_vectors(&vecs) == base)
}

/// Dimension of the span of the charge vectors of the given operators.
pub fn charge_span_dimension(ops: &[PauliSum], spec: &SymmetrySpec) -> Result<usize> {
    let vecs: Vec<Vec<Coeff>> =
        ops.iter().map(|g| charge_vector(g, spec).map(|c| c.values())).collect::<Result<_>>()?;
    Ok(rank_of_vectors(&vecs))
}

/// Dimension of S_k, the span of charge vectors of k-local symmetric operators.
pub fn s_k_dimension(n: usize, k: usize, spec: &SymmetrySpec) -> Result<usize> {
    if k > n {
        return Err(Error::validation("k must not exceed n"));
    }
    if k == 0 {
        return Ok(1);
    }
    let basis = crate::lie::klocal_symmetric_basis(n, k, spec)?;
    charge_span_dimension(&basis, spec)
}

/// A zero of the single-site character sum.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceZero {
    pub theta: f64,
    /// `(p, q)` when `theta = p pi / q` exactly.
    pub pi_fraction: Option<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceZeroReport {
    pub zeros: Vec<TraceZero>,
    pub non_universal: bool,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Zeros in `[0, 2 pi)` of `sum_c e^{i c theta}` for one site's charges.
pub fn trace_zeros(charges: &[i64]) -> Vec<TraceZero> {
    let mut cs: Vec<i64> = charges.to_vec();
    cs.sort();
    let m = cs.len() as i64;
    let distinct: BTreeSet<i64> = cs.iter().copied().collect();
    if m == 1 {
        return Vec::new();
    }
    let step = cs[1] - cs[0];
    let equal_spaced = distinct.len() == cs.len() && cs.windows(2).all(|w| w[1] - w[0] == step);
    if equal_spaced {
        // sum = e^{i c0 t} (1 - e^{i m s t}) / (1 - e^{i s t})
        let period = m * step;
        let mut out = Vec::new();
        for j in 1..period {
            if j % m == 0 {
                continue;
            }
            let (num, den) = (2 * j, period);
            let g = gcd(num, den);
            out.push(TraceZero { theta: PI * num as f64 / den as f64, pi_fraction: Some((num / g, den / g)) });
        }
        return out;
    }
    let f = |t: f64| -> f64 { cs.iter().map(|&c| Complex64::from_polar(1.0, c as f64 * t)).sum::<Complex64>().norm() };
    let grid = 20_000;
    let h = 2.0 * PI / grid as f64;
    let mut out: Vec<TraceZero> = Vec::new();
    for i in 0..grid {
        let (a, b, c) = ((i as f64 - 1.0) * h, i as f64 * h, (i as f64 + 1.0) * h);
        if f(b) <= f(a) && f(b) < f(c) {
            let (mut lo, mut hi) = (a, c);
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if f(m1) < f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let t = (0.5 * (lo + hi)).rem_euclid(2.0 * PI);
            if f(t) < 1e-10 && !out.iter().any(|z| (z.theta - t).abs() < 1e-8) {
                out.push(TraceZero { theta: t, pi_fraction: None });
            }
        }
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    out
}

/// Zeros of the single-site trace plus the non-universality flag for k < n.
pub fn trace_zero_scan(charges: &[i64], n: usize, k: usize) -> TraceZeroReport {
    let zeros = trace_zeros(charges);
    let non_universal = !zeros.is_empty() && k < n;
    TraceZeroReport { zeros, non_universal }
}

/// `h~(b) = 2^{-n} sum_z (-1)^{b.z} h(z)`; bit j of `z` is the value of site j.
pub fn diagonal_table_to_pauli(table: &BTreeMap<u64, Coeff>, n: usize, mode: Mode) -> Result<PauliSum> {
    if n > 24 {
        return Err(Error::budget("diagonal table larger than 2^24 entries"));
    }
    let size = 1usize << n;
    let mut v: Vec<Coeff> = vec![Coeff::int(0, mode); size];
    for (&z, c) in table {
        if z as usize >= size {
            return Err(Error::validation(format!("bitstring {z} out of range for n = {n}")));
        }
        v[z as usize] = c.in_mode(mode);
    }
    walsh_hadamard(&mut v);
    let scale = Coeff::ratio(1, size as i64, mode);
    let terms = v.into_iter().enumerate().map(|(b, c)| (PauliString::z_mask(n, b as u64), c.mul(&scale)));
    PauliSum::from_terms(n, mode, terms)
}

/// Diagonal entries `<z|A|z>` for every bitstring `z`.
pub fn diagonal_table(a: &PauliSum) -> Result<Vec<Coeff>> {
    let n = a.n();
    if n > 24 {
        return Err(Error::budget("diagonal table larger than 2^24 entries"));
    }
    let mut v: Vec<Coeff> = vec![Coeff::int(0, a.mode()); 1 << n];
    for (p, c) in a.diagonal_part().terms() {
        v[p.z_bits() as usize] = c.clone();
    }
    walsh_hadamard(&mut v);
    Ok(v)
}

fn walsh_hadamard(v: &mut [Coeff]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j].clone(), v[j + h].clone());
                v[j] = x.add(&y);
                v[j + h] = x.sub(&y);
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{make_generator, GeneratorKind};

    fn q(a: i64) -> Coeff {
        Coeff::int(a, Mode::Exact)
    }

    fn sectors(cv: &ChargeVector) -> Vec<(i64, f64)> {
        cv.sectors.iter().map(|(k, v)| (*k, v.to_f64())).collect()
    }

    #[test]
    fn multiplicities() {
        let m2 = sector_multiplicities(&SymmetrySpec::qubits(2));
        assert_eq!(m2, BTreeMap::from([(-2, 1), (0, 2), (2, 1)]));
        let m1 = sector_multiplicities(&SymmetrySpec::qubits(1));
        assert_eq!(m1, BTreeMap::from([(-1, 1), (1, 1)]));
        let mq = sector_multiplicities(&SymmetrySpec::qudits(2, 3));
        assert_eq!(mq.values().copied().collect::<Vec<_>>(), vec![1, 2, 3, 2, 1]);
    }

    #[test]
    fn irreps_and_bounds() {
        let s = SymmetrySpec::qubits(5);
        for l in 0..=5 {
            assert_eq!(irrep_count(&s, l), l + 1);
        }
        assert_eq!(irrep_count(&SymmetrySpec::qudits(2, 3), 2), 5);
        assert_eq!(dim_gap_bound(5, 2, &s).unwrap(), 3);
        assert_eq!(dim_gap_bound(4, 4, &s).unwrap(), 0);
        assert_eq!(dim_gap_bound(3, 2, &SymmetrySpec::qudits(3, 3)).unwrap(), 2);
        assert_eq!(full_symmetric_dim(&SymmetrySpec::qubits(3)), 20);
        assert_eq!(full_symmetric_dim(&SymmetrySpec::qubits(1)), 2);
        assert_eq!(full_symmetric_dim(&SymmetrySpec::qudits(2, 3)), 19);
    }

    #[test]
    fn charge_vector_examples() {
        let s2 = SymmetrySpec::qubits(2);
        let id = PauliSum::identity(2, Mode::Exact).unwrap();
        assert_eq!(sectors(&charge_vector(&id, &s2).unwrap()), vec![(-2, 1.0), (0, 2.0), (2, 1.0)]);
        let z1 = make_generator(GeneratorKind::Zlocal, &[0], 1).unwrap();
        assert_eq!(sectors(&charge_vector(&z1, &SymmetrySpec::qubits(1)).unwrap()), vec![(-1, -1.0), (1, 1.0)]);
        let zz = make_generator(GeneratorKind::Zmono, &[0, 1], 2).unwrap();
        assert_eq!(sectors(&charge_vector(&zz, &s2).unwrap()), vec![(-2, 1.0), (0, -2.0), (2, 1.0)]);
        // off-diagonal terms contribute nothing
        let r = make_generator(GeneratorKind::R, &[0, 1], 2).unwrap();
        assert!(charge_vector(&r, &s2).unwrap().is_zero());
    }

    #[test]
    fn polynomial_and_enumeration_agree() {
        let s = SymmetrySpec::new(vec![vec![1, -1], vec![2, 0], vec![0, 3], vec![1, -1]]).unwrap();
        let a = PauliSum::from_words(4, &[("ZIZI", 3, 2), ("IZZZ", -1, 1), ("IIII", 5, 1), ("ZZII", 1, 4)]).unwrap();
        assert_eq!(charge_vector_enumerate(&a, &s).unwrap(), charge_vector_polynomial(&a, &s).unwrap());
    }

    #[test]
    fn character_of_two_z() {
        let s2 = SymmetrySpec::qubits(2);
        let zz = make_generator(GeneratorKind::Zmono, &[0, 1], 2).unwrap();
        for t in [0.0, 0.3, 1.1, 2.9] {
            let v = character_function(&zz, &s2, t).unwrap();
            let sin: f64 = f64::sin(t);
            assert!((v.re + 4.0 * sin * sin).abs() < 1e-12 && v.im.abs() < 1e-12);
            assert!((v.re - (2.0 * (2.0 * t).cos() - 2.0)).abs() < 1e-12);
            let id = PauliSum::identity(2, Mode::Exact).unwrap();
            let w = character_function(&id, &s2, t).unwrap();
            assert!((w.re - (2.0 * t.cos()).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn twirl_examples() {
        let s = SymmetrySpec::qubits(2);
        let r = make_generator(GeneratorKind::R, &[0, 1], 2).unwrap();
        assert_eq!(twirl(&r, &s).unwrap(), r);
        let x1 = PauliSum::from_words(2, &[("XI", 1, 1)]).unwrap();
        assert!(twirl(&x1, &s).unwrap().is_zero());
        let xx = PauliSum::from_words(2, &[("XX", 1, 1)]).unwrap();
        assert_eq!(twirl(&xx, &s).unwrap(), r);
        let xy = PauliSum::from_words(2, &[("XY", 1, 1)]).unwrap();
        assert_eq!(twirl(&xy, &s).unwrap(), make_generator(GeneratorKind::T, &[0, 1], 2).unwrap());
    }

    #[test]
    fn weight_sum_test_examples() {
        let zzz = make_generator(GeneratorKind::Zmono, &[0, 1, 2], 3).unwrap();
        let rep = s_k_test(&zzz, 2).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.violations, BTreeMap::from([(3, q(1))]));
        assert!(s_k_test(&zzz, 3).unwrap().pass);
        let h = make_generator(GeneratorKind::Zmono, &[0, 1, 2], 4)
            .unwrap()
            .sub(&make_generator(GeneratorKind::Zmono, &[0, 1, 3], 4).unwrap())
            .unwrap();
        assert!(s_k_test(&h, 2).unwrap().pass);
        let r = make_generator(GeneratorKind::R, &[0, 1], 2).unwrap();
        assert!(s_k_test(&r, 1).is_err());
    }

    #[test]
    fn trace_zero_examples() {
        let q = trace_zero_scan(&[1, -1], 4, 2);
        assert_eq!(q.zeros.iter().map(|z| z.pi_fraction.unwrap()).collect::<Vec<_>>(), vec![(1, 2), (3, 2)]);
        assert!(q.non_universal);
        assert!(!trace_zero_scan(&[1, -1], 4, 4).non_universal);
        let one = trace_zero_scan(&[0], 3, 1);
        assert!(one.zeros.is_empty() && !one.non_universal);
        let t = trace_zeros(&[0, 1, 2]);
        assert_eq!(t.iter().map(|z| z.pi_fraction.unwrap()).collect::<Vec<_>>(), vec![(2, 3), (4, 3)]);
        // irregular charges fall back to the numeric scan
        let irr = trace_zeros(&[0, 1, 3]);
        for z in &irr {
            let v: Complex64 = [0.0, 1.0, 3.0].iter().map(|c| Complex64::from_polar(1.0, c * z.theta)).sum();
            assert!(v.norm() < 1e-9);
        }
    }

    #[test]
    fn walsh_examples() {
        let all_one: BTreeMap<u64, Coeff> = (0..8).map(|z| (z, q(1))).collect();
        assert_eq!(
            diagonal_table_to_pauli(&all_one, 3, Mode::Exact).unwrap(),
            PauliSum::identity(3, Mode::Exact).unwrap()
        );
        let parity: BTreeMap<u64, Coeff> = (0..4).map(|z| (z, q(if z & 1 == 1 { -1 } else { 1 }))).collect();
        assert_eq!(
            diagonal_table_to_pauli(&parity, 2, Mode::Exact).unwrap(),
            PauliSum::from_words(2, &[("ZI", 1, 1)]).unwrap()
        );
        let ind = BTreeMap::from([(3u64, q(1))]);
        assert_eq!(
            diagonal_table_to_pauli(&ind, 2, Mode::Exact).unwrap(),
            PauliSum::from_words(2, &[("II", 1, 4), ("ZI", -1, 4), ("IZ", -1, 4), ("ZZ", 1, 4)]).unwrap()
        );
    }
}

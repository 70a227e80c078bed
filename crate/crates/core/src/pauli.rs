//! Pauli strings and real-weighted Hermitian Pauli sums.
//!
//! A Lie-algebra element `iH` is stored as `H`; [`PauliSum::bracket`] returns
//! the Hermitian bracket `i[A, B]`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::symmetry::SymmetrySpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// Largest supported number of sites (two bits per site in a `u128`).
pub const MAX_SITES: usize = 64;

/// Terms with a float coefficient below this are dropped.
pub const FLOAT_DROP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    fn from_code(c: u8) -> Pauli {
        match c & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' | '_' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Single-site product `a*b = i^k c`, returned as `(k, c)`.
    pub fn product(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }
}

/// A word over {I, X, Y, Z}; site 0 is the leftmost character.
///
/// Words are packed two bits per site with site 0 in the most significant
/// position, so integer order is the lexicographic order with I < X < Y < Z.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    bits: u128,
}

/// Fourth root of unity `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Phase(pub u8);

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self.0 & 3 {
            0 => "1",
            1 => "i",
            2 => "-1",
            _ => "-i",
        }
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        if n > MAX_SITES {
            return Err(Error::validation(format!("at most {MAX_SITES} sites supported, got {n}")));
        }
        Ok(Self { n: n as u8, bits: 0 })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let mut p = Self::identity(letters.len())?;
        for (j, &l) in letters.iter().enumerate() {
            p = p.with(j, l);
        }
        Ok(p)
    }

    /// String with `letter` on each listed site and identity elsewhere.
    pub fn on_sites(n: usize, sites: &[usize], letter: Pauli) -> Result<Self> {
        let mut p = Self::identity(n)?;
        for &s in sites {
            if s >= n {
                return Err(Error::validation(format!("site {s} out of range for n = {n}")));
            }
            p = p.with(s, letter);
        }
        Ok(p)
    }

    /// Z^b for the bitmask `b` (bit j set means Z on site j).
    pub fn z_mask(n: usize, mask: u64) -> Self {
        let mut p = Self { n: n as u8, bits: 0 };
        for j in 0..n {
            if mask >> j & 1 == 1 {
                p = p.with(j, Pauli::Z);
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    fn shift(&self, j: usize) -> usize {
        2 * (self.n as usize - 1 - j)
    }

    pub fn get(&self, j: usize) -> Pauli {
        Pauli::from_code((self.bits >> self.shift(j)) as u8)
    }

    pub fn with(mut self, j: usize, l: Pauli) -> Self {
        let s = self.shift(j);
        self.bits &= !(3u128 << s);
        self.bits |= (l as u128) << s;
        self
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n()).map(move |j| self.get(j))
    }

    pub fn is_identity(&self) -> bool {
        self.bits == 0
    }

    /// Only I and Z letters.
    pub fn is_diagonal(&self) -> bool {
        self.letters().all(|l| matches!(l, Pauli::I | Pauli::Z))
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.get(j) != Pauli::I).collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// Bitmask of sites carrying Z (meaningful for diagonal strings).
    pub fn z_bits(&self) -> u64 {
        let mut m = 0u64;
        for j in 0..self.n() {
            if self.get(j) == Pauli::Z {
                m |= 1 << j;
            }
        }
        m
    }

    /// Sites carrying X or Y.
    pub fn flip_sites(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| matches!(self.get(j), Pauli::X | Pauli::Y)).collect()
    }

    pub fn mul(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        if self.n != other.n {
            return Err(Error::validation(format!("length mismatch: {} vs {}", self.n, other.n)));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut k = 0u8;
        let mut out = *self;
        for j in 0..self.n() {
            let (kk, l) = Pauli::product(self.get(j), other.get(j));
            k = (k + kk) & 3;
            out = out.with(j, l);
        }
        (Phase(k), out)
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let mut anti = 0;
        for j in 0..self.n() {
            let (a, b) = (self.get(j), other.get(j));
            if a != Pauli::I && b != Pauli::I && a != b {
                anti += 1;
            }
        }
        anti % 2 == 0
    }

    /// Restriction of the word to the listed sites, in list order.
    pub fn restrict(&self, sites: &[usize]) -> Vec<Pauli> {
        sites.iter().map(|&j| self.get(j)).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::validation(format!("bad Pauli letter '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::validation("empty Pauli word"));
        }
        Self::from_letters(&letters)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::validation(format!("unknown mode '{s}'"))),
        }
    }
}

/// A rational in exact mode, a double in float mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Exact(BigRational),
    Float(f64),
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Coeff {
    pub fn ratio(num: i64, den: i64, mode: Mode) -> Coeff {
        match mode {
            Mode::Exact => Coeff::Exact(rational(num, den)),
            Mode::Float => Coeff::Float(num as f64 / den as f64),
        }
    }

    pub fn int(v: i64, mode: Mode) -> Coeff {
        Coeff::ratio(v, 1, mode)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Coeff::Exact(_) => Mode::Exact,
            Coeff::Float(_) => Mode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coeff::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Coeff::Float(x) => *x,
        }
    }

    pub fn in_mode(&self, mode: Mode) -> Coeff {
        match (self, mode) {
            (Coeff::Exact(q), Mode::Float) => Coeff::Float(q.to_f64().unwrap_or(f64::NAN)),
            (Coeff::Float(x), Mode::Exact) => {
                Coeff::Exact(BigRational::from_float(*x).unwrap_or_else(<BigRational as Zero>::zero))
            }
            _ => self.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Coeff::Exact(q) => Some(q),
            Coeff::Float(_) => None,
        }
    }

    pub fn abs(&self) -> Coeff {
        match self {
            Coeff::Exact(q) => Coeff::Exact(q.abs()),
            Coeff::Float(x) => Coeff::Float(x.abs()),
        }
    }

    fn combine(
        &self,
        o: &Coeff,
        fq: impl Fn(&BigRational, &BigRational) -> BigRational,
        ff: impl Fn(f64, f64) -> f64,
    ) -> Coeff {
        match (self, o) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(fq(a, b)),
            _ => Coeff::Float(ff(self.to_f64(), o.to_f64())),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(q) => write!(f, "{q}"),
            Coeff::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Field for Coeff {
    fn zero() -> Self {
        Coeff::Exact(<BigRational as Zero>::zero())
    }
    fn one() -> Self {
        Coeff::Exact(<BigRational as One>::one())
    }
    fn from_i64(v: i64) -> Self {
        Coeff::Exact(BigRational::from_integer(BigInt::from(v)))
    }
    fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(q) => Zero::is_zero(q),
            Coeff::Float(x) => x.abs() < FLOAT_DROP,
        }
    }
    fn add(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a + b, |a, b| a + b)
    }
    fn sub(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a - b, |a, b| a - b)
    }
    fn mul(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a * b, |a, b| a * b)
    }
    fn neg(&self) -> Self {
        match self {
            Coeff::Exact(q) => Coeff::Exact(-q),
            Coeff::Float(x) => Coeff::Float(-x),
        }
    }
    fn inv(&self) -> Self {
        match self {
            Coeff::Exact(q) => Coeff::Exact(q.recip()),
            Coeff::Float(x) => Coeff::Float(1.0 / x),
        }
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

/// Hermitian bracket `i[A, B]` of two term maps over any field.
///
/// For anticommuting strings `pq = i^k r` with odd `k`, and
/// `i(pq - qp) = -2 sin(k pi / 2) r`.
pub fn bracket_terms<F: Field>(a: &BTreeMap<PauliString, F>, b: &BTreeMap<PauliString, F>) -> BTreeMap<PauliString, F> {
    let mut out: BTreeMap<PauliString, F> = BTreeMap::new();
    let two = F::from_i64(2);
    for (p, ca) in a {
        for (q, cb) in b {
            let (Phase(k), r) = p.mul_unchecked(q);
            let w = match k {
                1 => ca.mul(cb).mul(&two).neg(),
                3 => ca.mul(cb).mul(&two),
                _ => continue,
            };
            let slot = out.entry(r).or_insert_with(F::zero);
            *slot = slot.add(&w);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Real-weighted sum of Pauli strings on `n` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    mode: Mode,
    terms: BTreeMap<PauliString, Coeff>,
}

impl PauliSum {
    pub fn zero(n: usize, mode: Mode) -> Self {
        Self { n, mode, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize, mode: Mode) -> Result<Self> {
        Self::from_terms(n, mode, [(PauliString::identity(n)?, Coeff::int(1, mode))])
    }

    pub fn single(p: PauliString, c: Coeff) -> Self {
        let mode = c.mode();
        let mut s = Self::zero(p.n(), mode);
        s.add_term(p, c);
        s
    }

    pub fn from_terms(n: usize, mode: Mode, terms: impl IntoIterator<Item = (PauliString, Coeff)>) -> Result<Self> {
        let mut s = Self::zero(n, mode);
        for (p, c) in terms {
            if p.n() != n {
                return Err(Error::validation(format!("term {p} has length {} but n = {n}", p.n())));
            }
            s.add_term(p, c.in_mode(mode));
        }
        Ok(s)
    }

    /// Parses terms like `[("ZZI", 1, 2), ("XXI", -1, 1)]` as exact sums.
    pub fn from_words(n: usize, words: &[(&str, i64, i64)]) -> Result<Self> {
        let terms = words
            .iter()
            .map(|(w, a, b)| Ok((w.parse::<PauliString>()?, Coeff::ratio(*a, *b, Mode::Exact))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, Mode::Exact, terms)
    }

    pub(crate) fn from_map(n: usize, mode: Mode, terms: BTreeMap<PauliString, Coeff>) -> Self {
        let mut s = Self { n, mode, terms };
        s.terms.retain(|_, c| !c.is_zero());
        s
    }

    fn add_term(&mut self, p: PauliString, c: Coeff) {
        let slot = self.terms.entry(p).or_insert_with(|| Coeff::int(0, self.mode));
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, Coeff> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &PauliString) -> Coeff {
        self.terms.get(p).cloned().unwrap_or_else(|| Coeff::int(0, self.mode))
    }

    pub fn to_mode(&self, mode: Mode) -> PauliSum {
        Self::from_map(self.n, mode, self.terms.iter().map(|(p, c)| (*p, c.in_mode(mode))).collect())
    }

    fn check(&self, o: &PauliSum) -> Result<()> {
        if self.n != o.n {
            return Err(Error::validation(format!("site counts differ: {} vs {}", self.n, o.n)));
        }
        if self.mode != o.mode {
            return Err(Error::validation("mode mismatch between operands"));
        }
        Ok(())
    }

    pub fn add(&self, o: &PauliSum) -> Result<PauliSum> {
        self.check(o)?;
        let mut s = self.clone();
        for (p, c) in &o.terms {
            s.add_term(*p, c.clone());
        }
        Ok(s)
    }

    pub fn sub(&self, o: &PauliSum) -> Result<PauliSum> {
        self.add(&o.scale(&Coeff::int(-1, o.mode)))
    }

    pub fn scale(&self, c: &Coeff) -> PauliSum {
        let c = c.in_mode(self.mode);
        Self::from_map(self.n, self.mode, self.terms.iter().map(|(p, v)| (*p, v.mul(&c))).collect())
    }

    pub fn scale_ratio(&self, num: i64, den: i64) -> PauliSum {
        self.scale(&Coeff::ratio(num, den, self.mode))
    }

    /// `i(AB - BA)`.
    pub fn bracket(&self, o: &PauliSum) -> Result<PauliSum> {
        self.check(o)?;
        Ok(Self::from_map(self.n, self.mode, bracket_terms(&self.terms, &o.terms)))
    }

    /// `Tr(A B) / 2^n`, i.e. the dot product of coefficient vectors.
    pub fn hs_inner(&self, o: &PauliSum) -> Result<Coeff> {
        if self.n != o.n {
            return Err(Error::validation("site counts differ"));
        }
        let mut acc = Coeff::int(0, self.mode);
        for (p, c) in &self.terms {
            if let Some(d) = o.terms.get(p) {
                acc = acc.add(&c.mul(d));
            }
        }
        Ok(acc)
    }

    /// Sum of absolute coefficients; an upper bound on the operator norm.
    pub fn norm1(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).sum()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|p| p.support()).collect()
    }

    pub fn diagonal_part(&self) -> PauliSum {
        Self::from_map(
            self.n,
            self.mode,
            self.terms.iter().filter(|(p, _)| p.is_diagonal()).map(|(p, c)| (*p, c.clone())).collect(),
        )
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|p| p.is_diagonal())
    }

    /// Coefficient of the identity string.
    pub fn identity_coeff(&self) -> Coeff {
        self.coeff(&PauliString { n: self.n as u8, bits: 0 })
    }

    /// Maps site `j` of `self` to site `map[j]` of an `m`-site system.
    pub fn embed(&self, m: usize, map: &[usize]) -> Result<PauliSum> {
        if map.len() != self.n || map.iter().any(|&t| t >= m) {
            return Err(Error::validation("bad site embedding"));
        }
        let mut out = PauliSum::zero(m, self.mode);
        for (p, c) in &self.terms {
            let mut q = PauliString::identity(m)?;
            for (j, &t) in map.iter().enumerate() {
                q = q.with(t, p.get(j));
            }
            out.add_term(q, c.clone());
        }
        Ok(out)
    }

    /// True iff the bracket with the charge operator of `spec` vanishes.
    pub fn is_symmetric(&self, spec: &SymmetrySpec) -> Result<bool> {
        let q = spec.charge_operator(self.mode)?;
        if q.n != self.n {
            return Err(Error::validation("symmetry spec has a different site count"));
        }
        let b = self.bracket(&q)?;
        Ok(match self.mode {
            Mode::Exact => b.is_zero(),
            Mode::Float => b.norm1() <= 1e-10 * self.norm1().max(1.0),
        })
    }

    /// Largest coefficient difference, for float comparisons.
    pub fn max_abs_diff(&self, o: &PauliSum) -> f64 {
        let keys: BTreeSet<&PauliString> = self.terms.keys().chain(o.terms.keys()).collect();
        keys.into_iter().map(|p| (self.coeff(p).to_f64() - o.coeff(p).to_f64()).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(p, c)| format!("({c}){p}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    /// Hopping `(X_r X_s + Y_r Y_s)/2`.
    R,
    /// `(X_r Y_s - Y_r X_s)/2`, half the bracket of `Z_r` with the hopping.
    T,
    /// Product of Z over the listed sites.
    Zmono,
    /// Single-site Z.
    Zlocal,
}

impl FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(GeneratorKind::R),
            "T" => Ok(GeneratorKind::T),
            "Zmono" | "Z" => Ok(GeneratorKind::Zmono),
            "Zlocal" | "Za" => Ok(GeneratorKind::Zlocal),
            _ => Err(Error::validation(format!("unknown generator kind '{s}'"))),
        }
    }
}

pub fn make_generator(kind: GeneratorKind, sites: &[usize], n: usize) -> Result<PauliSum> {
    make_generator_in(kind, sites, n, Mode::Exact)
}

pub fn make_generator_in(kind: GeneratorKind, sites: &[usize], n: usize, mode: Mode) -> Result<PauliSum> {
    let distinct: BTreeSet<_> = sites.iter().collect();
    if distinct.len() != sites.len() {
        return Err(Error::validation(format!("repeated sites in {sites:?}")));
    }
    if let Some(&s) = sites.iter().find(|&&s| s >= n) {
        return Err(Error::validation(format!("site {s} out of range for n = {n}")));
    }
    let id = PauliString::identity(n)?;
    let half = Coeff::ratio(1, 2, mode);
    let neg_half = Coeff::ratio(-1, 2, mode);
    match kind {
        GeneratorKind::R | GeneratorKind::T => {
            let [r, s] = sites else {
                return Err(Error::validation("R and T need exactly two sites"));
            };
            let (r, s) = (*r, *s);
            let terms = if kind == GeneratorKind::R {
                vec![
                    (id.with(r, Pauli::X).with(s, Pauli::X), half.clone()),
                    (id.with(r, Pauli::Y).with(s, Pauli::Y), half),
                ]
            } else {
                vec![(id.with(r, Pauli::X).with(s, Pauli::Y), half), (id.with(r, Pauli::Y).with(s, Pauli::X), neg_half)]
            };
            PauliSum::from_terms(n, mode, terms)
        }
        GeneratorKind::Zmono => {
            let p = PauliString::on_sites(n, sites, Pauli::Z)?;
            PauliSum::from_terms(n, mode, [(p, Coeff::int(1, mode))])
        }
        GeneratorKind::Zlocal => {
            let [j] = sites else {
                return Err(Error::validation("Zlocal needs exactly one site"));
            };
            PauliSum::from_terms(n, mode, [(id.with(*j, Pauli::Z), Coeff::int(1, mode))])
        }
    }
}

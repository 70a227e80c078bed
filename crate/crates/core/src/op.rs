//! Hermitian operators as either exact Pauli sums or dense matrices.
//!
//! Compilation works on both: qubit plans keep exact Pauli arithmetic,
//! qudit plans fall back to dense complex matrices with a tolerance.

use crate::densesim::{herm_bracket, pauli_to_matrix, CMat};
use crate::error::{Error, Result};
use crate::expr::LieOps;
use crate::field::Field;
use crate::pauli::{Coeff, Mode, PauliSum};
use num_complex::Complex64;

/// Entry-wise tolerance for dense comparisons, relative to the operand scale.
pub const DENSE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Op {
    Pauli(PauliSum),
    Dense(CMat),
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Op {
    pub fn dense(&self) -> Result<CMat> {
        match self {
            Op::Pauli(p) => pauli_to_matrix(p),
            Op::Dense(m) => Ok(m.clone()),
        }
    }

    pub fn as_pauli(&self) -> Option<&PauliSum> {
        match self {
            Op::Pauli(p) => Some(p),
            Op::Dense(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Op::Pauli(p) if p.mode() == Mode::Exact)
    }

    /// Upper bound on the operator norm (sum of |coefficients|, or the
    /// largest absolute row sum for matrices).
    pub fn norm(&self) -> f64 {
        match self {
            Op::Pauli(p) => p.norm1(),
            Op::Dense(m) => m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Op::Pauli(p) => match p.mode() {
                Mode::Exact => p.is_zero(),
                Mode::Float => p.norm1() <= DENSE_TOL,
            },
            Op::Dense(m) => max_abs(m) <= DENSE_TOL,
        }
    }

    /// `c` with `self = c * other`, when one exists.
    pub fn ratio_to(&self, other: &Op) -> Option<Coeff> {
        match (self, other) {
            (Op::Pauli(a), Op::Pauli(b)) => {
                let (p, cb) = b.terms().iter().next()?;
                let c = a.coeff(p).mul(&cb.inv());
                let diff = a.sub(&b.scale(&c)).ok()?;
                let ok = match a.mode() {
                    Mode::Exact => diff.is_zero(),
                    Mode::Float => diff.norm1() <= DENSE_TOL * a.norm1().max(1.0),
                };
                ok.then_some(c)
            }
            (Op::Dense(a), Op::Dense(b)) => {
                let (idx, pivot) = b.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))?;
                if pivot.norm() <= DENSE_TOL {
                    return None;
                }
                let c = a.as_slice()[idx] / pivot;
                if c.im.abs() > DENSE_TOL * (1.0 + c.re.abs()) {
                    return None;
                }
                let diff = a - b * Complex64::new(c.re, 0.0);
                (max_abs(&diff) <= DENSE_TOL * max_abs(a).max(1.0)).then_some(Coeff::Float(c.re))
            }
            _ => None,
        }
    }

    pub fn commutes_with(&self, o: &Op) -> Result<bool> {
        Ok(self.lie_bracket(o)?.is_zero())
    }

    pub fn sub(&self, o: &Op) -> Result<Op> {
        self.lie_add(&o.lie_scale(&Coeff::Float(-1.0)))
    }

    /// Largest entry of the difference, comparing densely if needed.
    pub fn max_diff(&self, o: &Op) -> Result<f64> {
        match (self, o) {
            (Op::Pauli(a), Op::Pauli(b)) => Ok(a.max_abs_diff(b)),
            _ => Ok(max_abs(&(self.dense()? - o.dense()?))),
        }
    }
}

fn mismatch() -> Error {
    Error::validation("cannot mix Pauli and dense operators")
}

impl LieOps for Op {
    fn lie_bracket(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Op::Pauli(a), Op::Pauli(b)) => Ok(Op::Pauli(a.bracket(b)?)),
            (Op::Dense(a), Op::Dense(b)) => Ok(Op::Dense(herm_bracket(a, b))),
            _ => Err(mismatch()),
        }
    }

    fn lie_scale(&self, c: &Coeff) -> Self {
        match self {
            Op::Pauli(a) => {
                // Keep exact sums exact when the scale is exact.
                if a.mode() == Mode::Exact && c.mode() == Mode::Float {
                    Op::Pauli(a.to_mode(Mode::Float).scale(c))
                } else {
                    Op::Pauli(a.scale(c))
                }
            }
            Op::Dense(m) => Op::Dense(m * Complex64::new(c.to_f64(), 0.0)),
        }
    }

    fn lie_add(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Op::Pauli(a), Op::Pauli(b)) => {
                if a.mode() != b.mode() {
                    let (a, b) = (a.to_mode(Mode::Float), b.to_mode(Mode::Float));
                    return Ok(Op::Pauli(a.add(&b)?));
                }
                Ok(Op::Pauli(a.add(b)?))
            }
            (Op::Dense(a), Op::Dense(b)) => {
                if a.shape() != b.shape() {
                    return Err(Error::validation("dense shapes differ"));
                }
                Ok(Op::Dense(a + b))
            }
            _ => Err(mismatch()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{make_generator, GeneratorKind};

    #[test]
    fn ratio_exact_and_dense_agree() {
        let r = make_generator(GeneratorKind::R, &[0, 1], 2).unwrap();
        let a = Op::Pauli(r.scale_ratio(-3, 2));
        let b = Op::Pauli(r.clone());
        assert_eq!(a.ratio_to(&b).unwrap().to_f64(), -1.5);
        let da = Op::Dense(a.dense().unwrap());
        let db = Op::Dense(b.dense().unwrap());
        assert!((da.ratio_to(&db).unwrap().to_f64() + 1.5).abs() < 1e-12);
        let z = Op::Pauli(make_generator(GeneratorKind::Zlocal, &[0], 2).unwrap());
        assert!(z.ratio_to(&b).is_none());
    }

    #[test]
    fn dense_bracket_matches_pauli() {
        let r = Op::Pauli(make_generator(GeneratorKind::R, &[0, 1], 2).unwrap());
        let z = Op::Pauli(make_generator(GeneratorKind::Zlocal, &[0], 2).unwrap());
        let exact = z.lie_bracket(&r).unwrap().dense().unwrap();
        let dense = Op::Dense(z.dense().unwrap()).lie_bracket(&Op::Dense(r.dense().unwrap())).unwrap();
        assert!(dense.max_diff(&Op::Dense(exact)).unwrap() < 1e-12);
    }
}

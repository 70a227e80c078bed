//! Scalar fields used by the row-echelon engine and generic bracket code.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub trait Field: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Self;
    /// Rough size, used for float normalisation and reporting.
    fn magnitude(&self) -> f64;
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Threshold under which a float entry counts as zero during elimination.
pub const FLOAT_ZERO: f64 = 1e-10;

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        self.abs() < FLOAT_ZERO
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        1.0 / self
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

/// Integers modulo the Mersenne prime 2^61 - 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp(pub u64);

impl Fp {
    pub const P: u64 = (1u64 << 61) - 1;

    fn reduce(x: u128) -> u64 {
        let p = Self::P as u128;
        let lo = x & p;
        let hi = x >> 61;
        let mut s = lo + hi;
        while s >= p {
            s -= p;
        }
        s as u64
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = Field::mul(&acc, &base);
            }
            base = Field::mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn from_bigint(v: &BigInt) -> Fp {
        let p = BigInt::from(Self::P);
        let mut r = v % &p;
        if r.is_negative() {
            r += &p;
        }
        Fp(r.to_u64().expect("reduced residue fits in u64"))
    }

    /// Image of a rational whose denominator is invertible mod p.
    pub fn from_rational(q: &BigRational) -> Fp {
        let num = Fp::from_bigint(q.numer());
        let den = Fp::from_bigint(q.denom());
        Field::mul(&num, &den.inv())
    }
}

impl Field for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1)
    }
    fn from_i64(v: i64) -> Self {
        let p = Self::P as i128;
        let r = (v as i128).rem_euclid(p);
        Fp(r as u64)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, o: &Self) -> Self {
        let s = self.0 + o.0;
        Fp(if s >= Self::P { s - Self::P } else { s })
    }
    fn sub(&self, o: &Self) -> Self {
        Fp(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + Self::P - o.0 })
    }
    fn mul(&self, o: &Self) -> Self {
        Fp(Self::reduce(self.0 as u128 * o.0 as u128))
    }
    fn neg(&self) -> Self {
        Fp(if self.0 == 0 { 0 } else { Self::P - self.0 })
    }
    fn inv(&self) -> Self {
        assert!(self.0 != 0, "inverse of zero in Fp");
        self.pow(Self::P - 2)
    }
    fn magnitude(&self) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            1.0
        }
    }
}

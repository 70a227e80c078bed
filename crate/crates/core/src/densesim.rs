//! Dense complex matrices as ground truth for every other module.
//!
//! Basis ordering is the Kronecker order: site 0 is the most significant digit.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Largest total dimension handled densely.
pub const DIM_BUDGET: usize = 1 << 12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Unitary with its site dimensions.
#[derive(Clone, Debug)]
pub struct DenseUnitary {
    pub matrix: CMat,
    pub dims: Vec<usize>,
}

impl DenseUnitary {
    pub fn identity(dims: &[usize]) -> Self {
        let d = dims.iter().product();
        Self { matrix: CMat::identity(d, d), dims: dims.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let p = self.matrix.adjoint() * &self.matrix - CMat::identity(d, d);
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &DenseUnitary) -> DenseUnitary {
        DenseUnitary { matrix: &self.matrix * &first.matrix, dims: self.dims.clone() }
    }
}

fn check_budget(d: usize) -> Result<()> {
    if d > DIM_BUDGET {
        return Err(Error::budget(format!("dense dimension {d} exceeds {DIM_BUDGET}")));
    }
    Ok(())
}

/// Dense matrix of a Pauli sum.
pub fn pauli_to_matrix(a: &PauliSum) -> Result<CMat> {
    let n = a.n();
    if n > 12 {
        return Err(Error::budget(format!("{n} qubits exceed the dense budget")));
    }
    let d = 1usize << n;
    check_budget(d)?;
    let mut m = CMat::zeros(d, d);
    for (p, coef) in a.terms() {
        let w = coef.to_f64();
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ys = 0u32;
        for j in 0..n {
            let bit = 1usize << (n - 1 - j);
            match p.get(j) {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    zmask |= bit;
                    ys += 1;
                }
                Pauli::Z => zmask |= bit,
            }
        }
        // Y = i X Z acting on |b>: i (-1)^b |b^1>
        let yphase = I.powu(ys);
        for col in 0..d {
            let sign = if (col & zmask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(col ^ flip, col)] += yphase * sign * w;
        }
    }
    Ok(m)
}

/// `i(AB - BA)`.
pub fn herm_bracket(a: &CMat, b: &CMat) -> CMat {
    (a * b - b * a) * I
}

pub fn hermiticity_error(h: &CMat) -> f64 {
    (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `e^{-iHt}` via eigendecomposition of the symmetrised `H`.
pub fn expm_unitary(h: &CMat, t: f64) -> Result<CMat> {
    check_budget(h.nrows())?;
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if hermiticity_error(h) > 1e-12 * scale {
        return Err(Error::validation("expm_unitary needs a Hermitian matrix"));
    }
    let hs = (h + h.adjoint()) * c(0.5);
    let eig = hs.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases =
        CVec::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)));
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(scaled * v.adjoint())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    m.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `min_phi || U - e^{i phi} V ||`.
pub fn distance(u: &CMat, v: &CMat) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::validation("distance needs equal shapes"));
    }
    let f = |phi: f64| spectral_norm(&(u - v * Complex64::from_polar(1.0, phi)));
    let tr = (v.adjoint() * u).trace();
    let mut starts = vec![if tr.norm() > 1e-14 { tr.arg() } else { 0.0 }];
    let grid = 72;
    starts.extend((0..grid).map(|i| 2.0 * PI * i as f64 / grid as f64));
    let mut best = (f64::INFINITY, 0.0);
    for &s in &starts {
        let val = f(s);
        if val < best.0 {
            best = (val, s);
        }
    }
    let (mut lo, mut hi) = (best.1 - 2.0 * PI / grid as f64, best.1 + 2.0 * PI / grid as f64);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) * 0.381_966_011_250_105;
        let m2 = hi - (hi - lo) * 0.381_966_011_250_105;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(best.0.min(f(0.5 * (lo + hi))))
}

/// Phase `phi` minimising `|| U - e^{i phi} V ||` (trace estimate).
pub fn aligned_phase(u: &CMat, v: &CMat) -> f64 {
    (v.adjoint() * u).trace().arg()
}

/// Block `<0|U|0>` on the ancilla site and the leakage `||<1|U|0>||`.
pub fn ancilla_block(u: &CMat, dims: &[usize], ancilla: usize) -> Result<(CMat, f64)> {
    let total: usize = dims.iter().product();
    if u.nrows() != total || ancilla >= dims.len() || dims[ancilla] != 2 {
        return Err(Error::validation("ancilla_block: bad dimensions or ancilla index"));
    }
    let stride: usize = dims[ancilla + 1..].iter().product();
    let zero: Vec<usize> = (0..total).filter(|i| (i / stride).is_multiple_of(2)).collect();
    let one: Vec<usize> = zero.iter().map(|i| i + stride).collect();
    let block = CMat::from_fn(zero.len(), zero.len(), |r, col| u[(zero[r], zero[col])]);
    let leak = CMat::from_fn(one.len(), zero.len(), |r, col| u[(one[r], zero[col])]);
    Ok((block, spectral_norm(&leak)))
}

/// `A (x) B` in Kronecker order.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Embeds a state on the non-ancilla sites with the ancilla in |0>.
pub fn with_ancilla_zero(psi: &CVec, dims: &[usize], ancilla: usize) -> CVec {
    let total: usize = dims.iter().product();
    let stride: usize = dims[ancilla + 1..].iter().product();
    let mut out = CVec::zeros(total);
    let mut k = 0;
    for i in 0..total {
        if (i / stride).is_multiple_of(2) {
            out[i] = psi[k];
            k += 1;
        }
    }
    out
}

/// `(G on sites) * U` without forming the full operator for `G`.
///
/// `g` acts on the listed sites in the listed order.
pub fn apply_on_sites(u: &CMat, dims: &[usize], sites: &[usize], g: &CMat) -> Result<CMat> {
    let total: usize = dims.iter().product();
    let local: usize = sites.iter().map(|&s| dims.get(s).copied().unwrap_or(0)).product();
    if u.nrows() != total || g.nrows() != local || g.ncols() != local || sites.is_empty() {
        return Err(Error::validation("apply_on_sites: dimension mismatch"));
    }
    let strides: Vec<usize> = (0..dims.len()).map(|j| dims[j + 1..].iter().product()).collect();
    // Offsets of every local configuration relative to a base index.
    let offsets: Vec<usize> = (0..local)
        .map(|mut k| {
            let mut off = 0;
            for &s in sites.iter().rev() {
                off += (k % dims[s]) * strides[s];
                k /= dims[s];
            }
            off
        })
        .collect();
    let digit = |i: usize, s: usize| (i / strides[s]) % dims[s];
    let mut out = u.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); local];
    for base in (0..total).filter(|&i| sites.iter().all(|&s| digit(i, s) == 0)) {
        for col in 0..u.ncols() {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = u[(base + offsets[k], col)];
            }
            for r in 0..local {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, b) in buf.iter().enumerate() {
                    acc += g[(r, k)] * b;
                }
                out[(base + offsets[r], col)] = acc;
            }
        }
    }
    Ok(out)
}

/// Full-space matrix of an operator given on a subset of sites.
pub fn embed_local(g: &CMat, dims: &[usize], sites: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    check_budget(total)?;
    apply_on_sites(&CMat::identity(total, total), dims, sites, g)
}

/// SWAP of two qubits in a 2^n space.
pub fn swap_matrix(n: usize, a: usize, b: usize) -> CMat {
    let d = 1usize << n;
    let (ba, bb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
    CMat::from_fn(d, d, |r, col| {
        let va = col & ba != 0;
        let vb = col & bb != 0;
        let mut img = col & !ba & !bb;
        if va {
            img |= bb;
        }
        if vb {
            img |= ba;
        }
        if r == img {
            c(1.0)
        } else {
            c(0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{make_generator, GeneratorKind, Mode};

    #[test]
    fn local_application_matches_kron() {
        let zx = pauli_to_matrix(&PauliSum::from_words(2, &[("ZX", 1, 1), ("YY", 1, 3)]).unwrap()).unwrap();
        let full = embed_local(&zx, &[2, 2, 2], &[2, 0]).unwrap();
        let expect = pauli_to_matrix(&PauliSum::from_words(3, &[("XIZ", 1, 1), ("YIY", 1, 3)]).unwrap()).unwrap();
        assert!(close(&full, &expect) < 1e-14);
        let mixed = CMat::from_fn(3, 3, |r, c| Complex64::new((r * 3 + c) as f64, 0.0));
        let e = embed_local(&mixed, &[2, 3], &[1]).unwrap();
        assert!(close(&e, &kron(&CMat::identity(2, 2), &mixed)) < 1e-14);
    }

    fn close(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn pauli_matrices() {
        let z = make_generator(GeneratorKind::Zlocal, &[0], 1).unwrap();
        let m = pauli_to_matrix(&z).unwrap();
        assert_eq!(m, CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(-1.0)])));
        let y = PauliSum::from_words(1, &[("Y", 1, 1)]).unwrap();
        let my = pauli_to_matrix(&y).unwrap();
        assert_eq!(my[(0, 1)], -I);
        assert_eq!(my[(1, 0)], I);
        let r = make_generator(GeneratorKind::R, &[0, 1], 2).unwrap();
        let mr = pauli_to_matrix(&r).unwrap();
        let mut want = CMat::zeros(4, 4);
        want[(1, 2)] = c(1.0);
        want[(2, 1)] = c(1.0);
        assert!(close(&mr, &want) < 1e-15);
    }

    #[test]
    fn bracket_homomorphism() {
        let a = PauliSum::from_words(3, &[("XYZ", 1, 2), ("ZZI", -3, 1), ("IYX", 1, 1)]).unwrap();
        let b = PauliSum::from_words(3, &[("YYI", 1, 1), ("XIZ", 2, 3), ("ZIX", -1, 4)]).unwrap();
        let lhs = pauli_to_matrix(&a.bracket(&b).unwrap()).unwrap();
        let rhs = herm_bracket(&pauli_to_matrix(&a).unwrap(), &pauli_to_matrix(&b).unwrap());
        assert!(close(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn exponentials() {
        let z = pauli_to_matrix(&make_generator(GeneratorKind::Zlocal, &[0], 1).unwrap()).unwrap();
        let th = 0.37;
        let u = expm_unitary(&z, th).unwrap();
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -th)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, th)).norm() < 1e-14);
        assert!(close(&expm_unitary(&z, 0.0).unwrap(), &CMat::identity(2, 2)) < 1e-15);
        let r = pauli_to_matrix(&make_generator(GeneratorKind::R, &[0, 1], 2).unwrap()).unwrap();
        let ur = expm_unitary(&r, PI / 2.0).unwrap();
        assert!((ur[(1, 2)] + I).norm() < 1e-14 && (ur[(2, 1)] + I).norm() < 1e-14);
        assert!((ur[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!(DenseUnitary { matrix: ur, dims: vec![2, 2] }.unitarity_error() < 1e-12);
        assert!(expm_unitary(&CMat::from_element(2, 2, I), 1.0).is_err());
    }

    #[test]
    fn distances() {
        let id = CMat::identity(2, 2);
        let x = pauli_to_matrix(&PauliSum::from_words(1, &[("X", 1, 1)]).unwrap()).unwrap();
        assert!((distance(&id, &x).unwrap() - 2f64.sqrt()).abs() < 1e-10);
        assert!(distance(&x, &x).unwrap() < 1e-14);
        let ph = &x * Complex64::from_polar(1.0, 1.3);
        assert!(distance(&x, &ph).unwrap() < 1e-12);
    }

    #[test]
    fn ancilla_blocks() {
        let v = expm_unitary(
            &pauli_to_matrix(&PauliSum::from_words(2, &[("XY", 1, 1), ("ZZ", 1, 3)]).unwrap()).unwrap(),
            0.4,
        )
        .unwrap();
        let u = kron(&v, &CMat::identity(2, 2));
        let (b, leak) = ancilla_block(&u, &[2, 2, 2], 2).unwrap();
        assert!(close(&b, &v) < 1e-14 && leak < 1e-14);
        let r = pauli_to_matrix(&make_generator(GeneratorKind::R, &[0, 1], 2).unwrap().to_mode(Mode::Float)).unwrap();
        for th in [0.3, -1.1] {
            let u = expm_unitary(&r, -th).unwrap();
            let (_, leak) = ancilla_block(&u, &[2, 2], 1).unwrap();
            assert!((leak - f64::sin(th).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_identity() {
        let h =
            pauli_to_matrix(&PauliSum::from_words(2, &[("XX", 1, 1), ("YY", 1, 1), ("ZZ", 1, 1)]).unwrap()).unwrap();
        let u = expm_unitary(&h, -PI / 4.0).unwrap();
        let s = swap_matrix(2, 0, 1);
        assert!(distance(&u, &s).unwrap() < 1e-12);
        let want = &s * Complex64::from_polar(1.0, PI / 4.0);
        assert!(close(&u, &want) < 1e-12);
    }
}

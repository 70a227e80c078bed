//! Incremental sparse row-echelon form keyed by arbitrary column labels.
//!
//! Each stored row has its pivot at its smallest column index (columns are
//! numbered in first-seen order) with pivot value one. Reducing a vector scans
//! columns in increasing order, so a single pass leaves only non-pivot columns.

use crate::field::Field;
use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

#[derive(Clone, Debug)]
pub struct Echelon<K, F> {
    index: HashMap<K, usize>,
    keys: Vec<K>,
    rows: Vec<Vec<(usize, F)>>,
    pivot_row: Vec<Option<usize>>,
    combos: Option<Vec<Vec<(usize, F)>>>,
    inserted: usize,
}

/// Outcome of reducing a vector against the stored rows.
#[derive(Clone, Debug)]
pub struct Reduction<K, F> {
    /// Entries left after elimination, in column order (unseen keys last).
    pub residual: Vec<(K, F)>,
    /// Multiples of stored rows that were subtracted.
    pub used: Vec<(usize, F)>,
}

impl<K, F> Reduction<K, F> {
    pub fn is_zero(&self) -> bool {
        self.residual.is_empty()
    }
}

impl<K: Clone + Eq + Hash + Ord, F: Field> Echelon<K, F> {
    pub fn new() -> Self {
        Self {
            index: HashMap::new(),
            keys: Vec::new(),
            rows: Vec::new(),
            pivot_row: Vec::new(),
            combos: None,
            inserted: 0,
        }
    }

    /// Like `new`, but every row also remembers which inserted vectors it came
    /// from, so reductions can be turned into coordinates.
    pub fn with_coordinates() -> Self {
        let mut e = Self::new();
        e.combos = Some(Vec::new());
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    fn intern(&mut self, k: &K) -> usize {
        if let Some(&c) = self.index.get(k) {
            return c;
        }
        let c = self.keys.len();
        self.index.insert(k.clone(), c);
        self.keys.push(k.clone());
        self.pivot_row.push(None);
        c
    }

    pub fn reduce<'a, I>(&self, v: I) -> Reduction<K, F>
    where
        I: IntoIterator<Item = (&'a K, &'a F)>,
        K: 'a,
        F: 'a,
    {
        let mut dense: Vec<F> = vec![F::zero(); self.keys.len()];
        let mut extra: BTreeMap<K, F> = BTreeMap::new();
        for (k, val) in v {
            match self.index.get(k) {
                Some(&c) => dense[c] = dense[c].add(val),
                None => {
                    let slot = extra.entry(k.clone()).or_insert_with(F::zero);
                    *slot = slot.add(val);
                }
            }
        }
        let mut used = Vec::new();
        let mut residual = Vec::new();
        for c in 0..dense.len() {
            if dense[c].is_zero() {
                continue;
            }
            match self.pivot_row[c] {
                Some(r) => {
                    let f = dense[c].clone();
                    for (cc, val) in &self.rows[r] {
                        dense[*cc] = dense[*cc].sub(&f.mul(val));
                    }
                    dense[c] = F::zero();
                    used.push((r, f));
                }
                None => residual.push((self.keys[c].clone(), dense[c].clone())),
            }
        }
        residual.extend(extra.into_iter().filter(|(_, v)| !v.is_zero()));
        Reduction { residual, used }
    }

    /// Inserts `v`; returns the new row index when `v` was independent.
    pub fn insert<'a, I>(&mut self, v: I) -> Option<usize>
    where
        I: IntoIterator<Item = (&'a K, &'a F)>,
        K: 'a,
        F: 'a,
    {
        let red = self.reduce(v);
        self.insert_reduced(red)
    }

    /// Inserts a reduction computed against the current state.
    pub fn insert_reduced(&mut self, red: Reduction<K, F>) -> Option<usize> {
        let id = self.inserted;
        self.inserted += 1;
        if red.residual.is_empty() {
            return None;
        }
        let mut row: Vec<(usize, F)> = red.residual.iter().map(|(k, v)| (self.intern(k), v.clone())).collect();
        row.sort_by_key(|(c, _)| *c);
        let pinv = row[0].1.inv();
        for e in row.iter_mut() {
            e.1 = e.1.mul(&pinv);
        }
        let r = self.rows.len();
        self.pivot_row[row[0].0] = Some(r);
        self.rows.push(row);
        if let Some(combos) = self.combos.as_mut() {
            let mut acc: HashMap<usize, F> = HashMap::new();
            acc.insert(id, F::one());
            for (rr, f) in &red.used {
                for (src, w) in &combos[*rr] {
                    let slot = acc.entry(*src).or_insert_with(F::zero);
                    *slot = slot.sub(&f.mul(w));
                }
            }
            let mut combo: Vec<(usize, F)> =
                acc.into_iter().filter(|(_, w)| !w.is_zero()).map(|(s, w)| (s, w.mul(&pinv))).collect();
            combo.sort_by_key(|(s, _)| *s);
            combos.push(combo);
        }
        Some(r)
    }

    /// Expresses a reduction's eliminated part in terms of inserted vectors.
    pub fn coordinates(&self, red: &Reduction<K, F>) -> Option<Vec<(usize, F)>> {
        let combos = self.combos.as_ref()?;
        let mut acc: HashMap<usize, F> = HashMap::new();
        for (r, f) in &red.used {
            for (src, w) in &combos[*r] {
                let slot = acc.entry(*src).or_insert_with(F::zero);
                *slot = slot.add(&f.mul(w));
            }
        }
        let mut out: Vec<(usize, F)> = acc.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        out.sort_by_key(|(s, _)| *s);
        Some(out)
    }
}

impl<K: Clone + Eq + Hash + Ord, F: Field> Default for Echelon<K, F> {
    fn default() -> Self {
        Self::new()
    }
}

/// Rank of a list of dense vectors.
pub fn rank_of<F: Field>(vectors: &[Vec<F>]) -> usize {
    let mut e: Echelon<usize, F> = Echelon::new();
    for v in vectors {
        let entries: Vec<(usize, F)> =
            v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
        e.insert(entries.iter().map(|(k, v)| (k, v)));
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn rank_detects_dependence() {
        let v = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]];
        assert_eq!(rank_of(&v), 2);
        let w: Vec<Vec<Fp>> = vec![vec![Fp(1), Fp(2)], vec![Fp(3), Fp(6)]];
        assert_eq!(rank_of(&w), 1);
    }

    #[test]
    fn coordinates_reconstruct() {
        let mut e: Echelon<&str, BigRational> = Echelon::with_coordinates();
        let a = [("x", q(1)), ("y", q(1))];
        let b = [("y", q(2)), ("z", q(1))];
        e.insert(a.iter().map(|(k, v)| (k, v)));
        e.insert(b.iter().map(|(k, v)| (k, v)));
        // 3a - b = 3x + y - z
        let t = [("x", q(3)), ("y", q(1)), ("z", q(-1))];
        let red = e.reduce(t.iter().map(|(k, v)| (k, v)));
        assert!(red.is_zero());
        let c = e.coordinates(&red).unwrap();
        assert_eq!(c, vec![(0, q(3)), (1, q(-1))]);
    }

    #[test]
    fn late_pivot_columns_stay_consistent() {
        let mut e: Echelon<u32, BigRational> = Echelon::new();
        let r1 = [(5u32, q(1)), (7, q(1))];
        let r2 = [(7u32, q(1)), (9, q(1))];
        let r3 = [(5u32, q(1)), (9, q(-1))];
        assert!(e.insert(r1.iter().map(|(k, v)| (k, v))).is_some());
        assert!(e.insert(r2.iter().map(|(k, v)| (k, v))).is_some());
        assert!(e.insert(r3.iter().map(|(k, v)| (k, v))).is_none());
    }
}

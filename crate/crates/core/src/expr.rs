//! Expression trees recording how an operator is built from generators.

use crate::error::{Error, Result};
use crate::pauli::{Coeff, PauliSum};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Generator by index.
    Leaf(usize),
    /// Hermitian bracket `i[left, right]`.
    Bracket(Box<Expr>, Box<Expr>),
    Scale(Coeff, Box<Expr>),
    Sum(Vec<Expr>),
}

/// Operations an operator type needs for expression evaluation.
pub trait LieOps: Sized + Clone {
    fn lie_bracket(&self, o: &Self) -> Result<Self>;
    fn lie_scale(&self, c: &Coeff) -> Self;
    fn lie_add(&self, o: &Self) -> Result<Self>;
}

impl LieOps for PauliSum {
    fn lie_bracket(&self, o: &Self) -> Result<Self> {
        self.bracket(o)
    }
    fn lie_scale(&self, c: &Coeff) -> Self {
        self.scale(c)
    }
    fn lie_add(&self, o: &Self) -> Result<Self> {
        self.add(o)
    }
}

impl Expr {
    pub fn leaf(i: usize) -> Expr {
        Expr::Leaf(i)
    }

    pub fn bracket(a: Expr, b: Expr) -> Expr {
        Expr::Bracket(Box::new(a), Box::new(b))
    }

    pub fn scale(c: Coeff, e: Expr) -> Expr {
        Expr::Scale(c, Box::new(e))
    }

    pub fn eval<T: LieOps>(&self, leaves: &[T]) -> Result<T> {
        match self {
            Expr::Leaf(i) => leaves.get(*i).cloned().ok_or_else(|| Error::validation(format!("leaf {i} out of range"))),
            Expr::Bracket(a, b) => a.eval(leaves)?.lie_bracket(&b.eval(leaves)?),
            Expr::Scale(c, e) => Ok(e.eval(leaves)?.lie_scale(c)),
            Expr::Sum(es) => {
                let mut it = es.iter();
                let first = it.next().ok_or_else(|| Error::validation("empty sum expression"))?.eval(leaves)?;
                it.try_fold(first, |acc, e| acc.lie_add(&e.eval(leaves)?))
            }
        }
    }

    /// Bracket nesting depth.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Leaf(_) => 0,
            Expr::Bracket(a, b) => 1 + a.depth().max(b.depth()),
            Expr::Scale(_, e) => e.depth(),
            Expr::Sum(es) => es.iter().map(|e| e.depth()).max().unwrap_or(0),
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Leaf(i) => out.push(*i),
            Expr::Bracket(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            Expr::Scale(_, e) => e.collect_leaves(out),
            Expr::Sum(es) => es.iter().for_each(|e| e.collect_leaves(out)),
        }
    }

    /// Renumbers leaves through `map`.
    pub fn relabel(&self, map: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Leaf(i) => map(*i),
            Expr::Bracket(a, b) => Expr::bracket(a.relabel(map), b.relabel(map)),
            Expr::Scale(c, e) => Expr::scale(c.clone(), e.relabel(map)),
            Expr::Sum(es) => Expr::Sum(es.iter().map(|e| e.relabel(map)).collect()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Leaf(i) => write!(f, "g{i}"),
            Expr::Bracket(a, b) => write!(f, "[{a}, {b}]"),
            Expr::Scale(c, e) => write!(f, "({c})*{e}"),
            Expr::Sum(es) => {
                let parts: Vec<String> = es.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
        }
    }
}

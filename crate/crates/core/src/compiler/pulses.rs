//! Lowering of expression steps to single-generator pulses.
//!
//! Brackets become exact conjugations when the operands rotate into each
//! other, and second-order group commutators otherwise. Non-commuting sums use
//! the symmetric product formula. Each approximation carries an a-priori error
//! model; the measured error is checked afterwards against the dense unitary.

use super::plan::{plan_distance, CircuitPlan, Level, Scheme, Step};
use crate::error::{Error, Result};
use crate::expr::{Expr, LieOps};
use crate::op::Op;
use crate::pauli::Coeff;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Default ceiling on emitted pulses.
pub const PULSE_BUDGET: usize = 2_000_000;

/// Halvings of the model budget tried before giving up on verification.
const RETRIES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpandOptions {
    pub scheme: Scheme,
    pub max_pulses: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        Self { scheme: Scheme::Trotter2, max_pulses: PULSE_BUDGET }
    }
}

#[derive(Clone, Debug)]
enum Rule {
    /// The node evaluates to zero.
    Zero,
    Leaf(usize),
    Scale(f64),
    /// Sum of pairwise commuting terms.
    Commuting,
    /// Sum handled by the symmetric product formula; `spread` bounds the
    /// leading error term per unit time cubed.
    Trotter {
        spread: f64,
    },
    /// `right` rotates under `left` with frequency `lambda`; `swapped` puts
    /// the roles the other way round.
    Rotate {
        lambda: f64,
        swapped: bool,
    },
    /// As `Rotate`, but only the part of the rotated operand that does not
    /// commute with the rotator turns.
    Project {
        lambda: f64,
        swapped: bool,
    },
    GroupComm {
        weight: f64,
    },
}

#[derive(Clone, Debug)]
struct Node {
    rule: Rule,
    exact: bool,
}

/// Per-expression analysis keyed by node address; the tree is borrowed for
/// the lifetime of the expander, so addresses are stable.
struct Analysis<'a> {
    leaves: &'a [Op],
    scheme: Scheme,
    nodes: HashMap<*const Expr, Node>,
    values: HashMap<*const Expr, Op>,
}

fn key(e: &Expr) -> *const Expr {
    e as *const Expr
}

/// `B_a^k(b)` for k = 1, 2, 3.
fn ad_powers(a: &Op, b: &Op) -> Result<[Op; 3]> {
    let b1 = a.lie_bracket(b)?;
    let b2 = a.lie_bracket(&b1)?;
    let b3 = a.lie_bracket(&b2)?;
    Ok([b1, b2, b3])
}

/// `lambda` with `B_a^2 b = -lambda^2 b`.
fn strict_rotation(b: &Op, pw: &[Op; 3]) -> Option<f64> {
    let mu = -pw[1].ratio_to(b)?.to_f64();
    (mu > 0.0).then(|| mu.sqrt())
}

/// `lambda` with `B_a^3 b = -lambda^2 B_a b` and the kernel part of `b`
/// commuting with the rotating part.
fn projected_rotation(b: &Op, pw: &[Op; 3]) -> Result<Option<f64>> {
    let Some(r) = pw[2].ratio_to(&pw[0]) else { return Ok(None) };
    let mu = -r.to_f64();
    if mu <= 0.0 {
        return Ok(None);
    }
    let turning = pw[1].lie_scale(&Coeff::Float(-1.0 / mu));
    let fixed = b.sub(&turning)?;
    Ok(fixed.commutes_with(&turning)?.then(|| mu.sqrt()))
}

impl<'a> Analysis<'a> {
    fn new(leaves: &'a [Op], scheme: Scheme) -> Self {
        Self { leaves, scheme, nodes: HashMap::new(), values: HashMap::new() }
    }

    fn value(&mut self, e: &Expr) -> Result<Op> {
        if let Some(v) = self.values.get(&key(e)) {
            return Ok(v.clone());
        }
        let v = match e {
            Expr::Leaf(i) => {
                self.leaves.get(*i).cloned().ok_or_else(|| Error::validation(format!("leaf {i} out of range")))?
            }
            Expr::Scale(c, x) => self.value(x)?.lie_scale(c),
            Expr::Bracket(a, b) => {
                let (va, vb) = (self.value(a)?, self.value(b)?);
                va.lie_bracket(&vb)?
            }
            Expr::Sum(xs) => {
                let mut acc: Option<Op> = None;
                for x in xs {
                    let v = self.value(x)?;
                    acc = Some(match acc {
                        None => v,
                        Some(s) => s.lie_add(&v)?,
                    });
                }
                acc.ok_or_else(|| Error::validation("empty sum expression"))?
            }
        };
        self.values.insert(key(e), v.clone());
        Ok(v)
    }

    fn node(&mut self, e: &Expr) -> Result<Node> {
        if let Some(n) = self.nodes.get(&key(e)) {
            return Ok(n.clone());
        }
        let node = self.classify(e)?;
        self.nodes.insert(key(e), node.clone());
        Ok(node)
    }

    fn classify(&mut self, e: &Expr) -> Result<Node> {
        if self.value(e)?.is_zero() {
            return Ok(Node { rule: Rule::Zero, exact: true });
        }
        Ok(match e {
            Expr::Leaf(i) => Node { rule: Rule::Leaf(*i), exact: true },
            Expr::Scale(c, x) => {
                let inner = self.node(x)?;
                Node { rule: Rule::Scale(c.to_f64()), exact: inner.exact }
            }
            Expr::Sum(xs) => {
                let vals: Vec<Op> = xs.iter().map(|x| self.value(x)).collect::<Result<_>>()?;
                let mut spread = 0.0;
                let mut commuting = true;
                let norms: f64 = vals.iter().map(Op::norm).sum();
                for i in 0..vals.len() {
                    for j in i + 1..vals.len() {
                        let c = vals[i].lie_bracket(&vals[j])?;
                        commuting &= c.is_zero();
                        spread += c.norm();
                    }
                }
                let mut exact = true;
                for x in xs {
                    exact &= self.node(x)?.exact;
                }
                if commuting {
                    Node { rule: Rule::Commuting, exact }
                } else {
                    Node { rule: Rule::Trotter { spread: spread * norms }, exact: false }
                }
            }
            Expr::Bracket(a, b) => {
                let (va, vb) = (self.value(a)?, self.value(b)?);
                let exact_children = self.node(a)?.exact && self.node(b)?.exact;
                let rule = match self.scheme {
                    Scheme::GroupComm => None,
                    Scheme::Trotter2 => self.conjugation(&va, &vb)?,
                };
                match rule {
                    Some(rule) => Node { rule, exact: exact_children },
                    None => Node { rule: Rule::GroupComm { weight: group_weight(&va, &vb) }, exact: false },
                }
            }
        })
    }

    fn conjugation(&self, a: &Op, b: &Op) -> Result<Option<Rule>> {
        let forward = ad_powers(a, b)?;
        if let Some(lambda) = strict_rotation(b, &forward) {
            return Ok(Some(Rule::Rotate { lambda, swapped: false }));
        }
        let backward = ad_powers(b, a)?;
        if let Some(lambda) = strict_rotation(a, &backward) {
            return Ok(Some(Rule::Rotate { lambda, swapped: true }));
        }
        if let Some(lambda) = projected_rotation(b, &forward)? {
            return Ok(Some(Rule::Project { lambda, swapped: false }));
        }
        if let Some(lambda) = projected_rotation(a, &backward)? {
            return Ok(Some(Rule::Project { lambda, swapped: true }));
        }
        Ok(None)
    }
}

/// Leading-error weight `||a|| ||b|| (||a|| + ||b||)^2` for a group commutator.
fn group_weight(a: &Op, b: &Op) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    na * nb * (na + nb).powi(2)
}

fn trotter_reps(spread: f64, tau: f64, eps: f64) -> usize {
    let model = spread * tau.abs().powi(3) / 12.0;
    ((model / eps).sqrt().ceil() as usize).max(1)
}

fn groupcomm_pieces(weight: f64, tau: f64, eps: f64) -> usize {
    let model = weight * tau * tau / 2.0;
    ((model / eps).ceil() as usize).max(1)
}

/// Pulse emitter with merging of consecutive pulses on the same leaf.
struct Emitter<'a, 'b> {
    an: &'b mut Analysis<'a>,
    pulses: Vec<(usize, f64)>,
    model: f64,
    limit: usize,
}

impl Emitter<'_, '_> {
    fn emit(&mut self, leaf: usize, tau: f64) -> Result<()> {
        if tau == 0.0 {
            return Ok(());
        }
        if let Some(last) = self.pulses.last_mut() {
            if last.0 == leaf {
                last.1 += tau;
                if last.1 == 0.0 {
                    self.pulses.pop();
                }
                return Ok(());
            }
        }
        if self.pulses.len() >= self.limit {
            return Err(Error::budget("pulse budget exhausted"));
        }
        self.pulses.push((leaf, tau));
        Ok(())
    }

    /// Emits pulses approximating `e^{-i tau value(e)}` to within `eps`.
    fn realize(&mut self, e: &Expr, tau: f64, eps: f64) -> Result<()> {
        if tau == 0.0 {
            return Ok(());
        }
        let node = self.an.node(e)?;
        match (&node.rule, e) {
            (Rule::Zero, _) => Ok(()),
            (Rule::Leaf(i), _) => self.emit(*i, tau),
            (Rule::Scale(c), Expr::Scale(_, x)) => self.realize(x, c * tau, eps),
            (Rule::Commuting, Expr::Sum(xs)) => {
                let share = eps / xs.len() as f64;
                xs.iter().try_for_each(|x| self.realize(x, tau, share))
            }
            (Rule::Trotter { spread }, Expr::Sum(xs)) => {
                let reps = trotter_reps(*spread, tau, eps / 2.0);
                self.model += spread * tau.abs().powi(3) / (12.0 * (reps * reps) as f64);
                let share = eps / (4.0 * (reps * xs.len()) as f64);
                let half = tau / (2.0 * reps as f64);
                for _ in 0..reps {
                    for x in xs.iter() {
                        self.realize(x, half, share)?;
                    }
                    for x in xs.iter().rev() {
                        self.realize(x, half, share)?;
                    }
                }
                Ok(())
            }
            (Rule::Rotate { lambda, swapped }, Expr::Bracket(a, b)) => {
                let share = eps / 3.0;
                let quarter = PI / (2.0 * lambda);
                if *swapped {
                    self.realize(b, -quarter, share)?;
                    self.realize(a, lambda * tau, share)?;
                    self.realize(b, quarter, share)
                } else {
                    self.realize(a, -quarter, share)?;
                    self.realize(b, -lambda * tau, share)?;
                    self.realize(a, quarter, share)
                }
            }
            (Rule::Project { lambda, swapped }, Expr::Bracket(a, b)) => {
                // The roles swap by antisymmetry of the bracket.
                let (rot, turned, tau) = if *swapped { (b, a, -tau) } else { (a, b, tau) };
                let share = eps / 5.0;
                let quarter = PI / (2.0 * lambda);
                self.realize(rot, -3.0 * quarter, share)?;
                self.realize(turned, tau * lambda / 2.0, share)?;
                self.realize(rot, 2.0 * quarter, share)?;
                self.realize(turned, -tau * lambda / 2.0, share)?;
                self.realize(rot, quarter, share)
            }
            (Rule::GroupComm { weight }, Expr::Bracket(a, b)) => {
                let pieces = groupcomm_pieces(*weight, tau, eps / 2.0);
                self.model += weight * tau * tau / (2.0 * pieces as f64);
                let x = (tau.abs() / (2.0 * pieces as f64)).sqrt();
                // With (p, q) = (a, b) the four-pulse block gives e^{-i x^2 [a,b]_H};
                // negative durations use the reversed roles.
                let (p, q) = if tau > 0.0 { (a, b) } else { (b, a) };
                let share = eps / (16.0 * pieces as f64);
                for _ in 0..pieces {
                    for s in [x, -x] {
                        self.realize(p, -s, share)?;
                        self.realize(q, -s, share)?;
                        self.realize(p, s, share)?;
                        self.realize(q, s, share)?;
                    }
                }
                Ok(())
            }
            _ => Err(Error::Internal("expansion rule does not match expression".into())),
        }
    }
}

/// Estimated pulse count for realizing `e` (mirrors `Emitter::realize`
/// without merging).
fn cost(an: &mut Analysis<'_>, e: &Expr, tau: f64, eps: f64) -> Result<f64> {
    if tau == 0.0 {
        return Ok(0.0);
    }
    let node = an.node(e)?;
    Ok(match (&node.rule, e) {
        (Rule::Zero, _) => 0.0,
        (Rule::Leaf(_), _) => 1.0,
        (Rule::Scale(c), Expr::Scale(_, x)) => cost(an, x, c * tau, eps)?,
        (Rule::Commuting, Expr::Sum(xs)) => {
            let share = eps / xs.len() as f64;
            let mut total = 0.0;
            for x in xs {
                total += cost(an, x, tau, share)?;
            }
            total
        }
        (Rule::Trotter { spread }, Expr::Sum(xs)) => {
            let reps = trotter_reps(*spread, tau, eps / 2.0);
            let share = eps / (4.0 * (reps * xs.len()) as f64);
            let half = tau / (2.0 * reps as f64);
            let mut per = 0.0;
            for x in xs {
                per += cost(an, x, half, share)?;
            }
            2.0 * reps as f64 * per
        }
        (Rule::Rotate { lambda, swapped }, Expr::Bracket(a, b)) => {
            let (rot, turned) = if *swapped { (b, a) } else { (a, b) };
            let quarter = PI / (2.0 * lambda);
            2.0 * cost(an, rot, quarter, eps / 3.0)? + cost(an, turned, lambda * tau, eps / 3.0)?
        }
        (Rule::Project { lambda, swapped }, Expr::Bracket(a, b)) => {
            let (rot, turned) = if *swapped { (b, a) } else { (a, b) };
            let quarter = PI / (2.0 * lambda);
            3.0 * cost(an, rot, 2.0 * quarter, eps / 5.0)? + 2.0 * cost(an, turned, tau * lambda / 2.0, eps / 5.0)?
        }
        (Rule::GroupComm { weight }, Expr::Bracket(a, b)) => {
            let pieces = groupcomm_pieces(*weight, tau, eps / 2.0);
            let x = (tau.abs() / (2.0 * pieces as f64)).sqrt();
            let share = eps / (16.0 * pieces as f64);
            8.0 * pieces as f64 * (cost(an, a, x, share)? + cost(an, b, x, share)?)
        }
        _ => return Err(Error::Internal("expansion rule does not match expression".into())),
    })
}

struct Lowered {
    steps: Vec<Step>,
    model: f64,
}

fn lower(plan: &CircuitPlan, ops: &[Op], model_eps: f64, opts: ExpandOptions) -> Result<Lowered> {
    let mut an = Analysis::new(ops, opts.scheme);
    let inexact = plan.steps.iter().filter(|s| matches!(s, Step::Evolve { .. })).count().max(1);
    let share = model_eps / inexact as f64;
    // Cheap pre-count so hopeless budgets fail before any emission.
    let mut estimate = 0.0;
    for step in &plan.steps {
        estimate += match step {
            Step::Pulse { .. } => 1.0,
            Step::Evolve { expr, duration, .. } => cost(&mut an, expr, *duration, share)?,
        };
    }
    if estimate > opts.max_pulses as f64 {
        return Err(Error::budget(format!("about {estimate:.3e} pulses needed, budget {}", opts.max_pulses)));
    }
    let mut em = Emitter { an: &mut an, pulses: Vec::new(), model: 0.0, limit: opts.max_pulses };
    for step in &plan.steps {
        match step {
            Step::Pulse { leaf, duration } => em.emit(*leaf, *duration)?,
            Step::Evolve { expr, duration, .. } => em.realize(expr, *duration, share)?,
        }
    }
    let steps = em.pulses.iter().map(|&(leaf, duration)| Step::Pulse { leaf, duration }).collect();
    Ok(Lowered { steps, model: em.model })
}

/// Largest model budget below `eps` whose estimated pulse count fits.
fn achievable_epsilon(plan: &CircuitPlan, ops: &[Op], eps: f64, opts: ExpandOptions) -> Result<f64> {
    let fits = |e: f64| -> Result<bool> {
        let mut an = Analysis::new(ops, opts.scheme);
        let n = plan.steps.iter().filter(|s| matches!(s, Step::Evolve { .. })).count().max(1);
        let mut total = 0.0;
        for step in &plan.steps {
            if let Step::Evolve { expr, duration, .. } = step {
                total += cost(&mut an, expr, *duration, e / 2.0 / n as f64)?;
            }
        }
        Ok(total <= opts.max_pulses as f64)
    };
    let (mut lo, mut hi) = (eps, eps);
    while !fits(hi)? {
        lo = hi;
        hi *= 4.0;
        if hi > 1e6 {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..30 {
        let mid = (lo * hi).sqrt();
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Rewrites every step as single-leaf pulses, within `eps` of the input plan
/// on the ancilla-|0> sector (checked densely).
pub fn expand_to_pulses(plan: &CircuitPlan, eps: f64, opts: ExpandOptions) -> Result<CircuitPlan> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::validation("epsilon must be positive"));
    }
    plan.validate()?;
    let ops: Vec<Op> = plan.leaves.iter().map(|l| l.op.clone()).collect();
    let mut model_eps = eps / 2.0;
    let mut last = None;
    for _ in 0..=RETRIES {
        let lowered = match lower(plan, &ops, model_eps, opts) {
            Err(Error::Budget(msg)) => {
                let best = achievable_epsilon(plan, &ops, eps, opts)?;
                return Err(Error::budget(format!("{msg}; achievable epsilon about {best:.3e}")));
            }
            other => other?,
        };
        let mut out = plan.clone();
        out.steps = lowered.steps;
        out.level = Level::Pulse;
        out.epsilon = Some(eps);
        out.scheme = Some(opts.scheme);
        out.model_error = Some(lowered.model);
        let (measured, leak) = plan_distance(&out, plan)?;
        let measured = measured.max(leak);
        out.measured_error = Some(measured);
        if measured <= eps {
            return Ok(out);
        }
        last = Some(measured);
        model_eps /= 4.0;
    }
    Err(Error::Verification(format!(
        "pulse sequence misses epsilon {eps:.3e} (measured {:.3e})",
        last.unwrap_or(f64::NAN)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::chain::{diagonal_with_ancilla, synthesize_hamiltonian};
    use crate::compiler::plan::verify_plan;
    use crate::lie::close;
    use crate::pauli::{make_generator, GeneratorKind, PauliSum};
    use crate::symmetry::SymmetrySpec;

    #[test]
    fn zzz_pulses_meet_epsilon() {
        let h = PauliSum::from_words(3, &[("ZZZ", -1, 1)]).unwrap();
        let plan = diagonal_with_ancilla(&h, 3, 0.7).unwrap();
        let pulses = expand_to_pulses(&plan, 1e-2, ExpandOptions::default()).unwrap();
        assert!(pulses.is_pulse_level());
        let v = verify_plan(&pulses).unwrap();
        assert!(v.distance <= 1e-2 && v.leakage <= 1e-2, "{v:?}");
        // Conjugation rules are exact here.
        assert!(v.distance < 1e-9, "{v:?}");
    }

    #[test]
    fn bracket_target_with_both_schemes() {
        let gens = vec![
            make_generator(GeneratorKind::R, &[0, 1], 2).unwrap(),
            make_generator(GeneratorKind::T, &[0, 1], 2).unwrap(),
        ];
        let basis = close(&gens, &SymmetrySpec::qubits(2), None).unwrap();
        let h = PauliSum::from_words(2, &[("ZI", 1, 1), ("IZ", -1, 1)]).unwrap();
        let plan = synthesize_hamiltonian(&h, &basis, 0.3).unwrap();
        for scheme in [Scheme::Trotter2, Scheme::GroupComm] {
            let opts = ExpandOptions { scheme, ..Default::default() };
            let pulses = expand_to_pulses(&plan, 1e-2, opts).unwrap();
            let v = verify_plan(&pulses).unwrap();
            assert!(v.distance <= 1e-2, "{scheme}: {v:?}");
        }
    }

    #[test]
    fn pulse_plan_passes_through() {
        let h = PauliSum::from_words(2, &[("ZI", 1, 1)]).unwrap();
        let mut plan = diagonal_with_ancilla(&h, 2, 0.5).unwrap();
        plan.steps.retain(|s| matches!(s, Step::Pulse { .. }));
        let out = expand_to_pulses(&plan, 1e-3, ExpandOptions::default()).unwrap();
        assert_eq!(out.steps.len(), plan.steps.len());
    }

    #[test]
    fn tiny_budget_reports_estimate() {
        let gens = vec![
            make_generator(GeneratorKind::R, &[0, 1], 2).unwrap(),
            make_generator(GeneratorKind::T, &[0, 1], 2).unwrap(),
        ];
        let basis = close(&gens, &SymmetrySpec::qubits(2), None).unwrap();
        let h = PauliSum::from_words(2, &[("ZI", 1, 1), ("IZ", -1, 1)]).unwrap();
        let plan = synthesize_hamiltonian(&h, &basis, 0.3).unwrap();
        let opts = ExpandOptions { scheme: Scheme::GroupComm, max_pulses: 20 };
        match expand_to_pulses(&plan, 1e-6, opts) {
            Err(Error::Budget(msg)) => assert!(msg.contains("achievable"), "{msg}"),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}

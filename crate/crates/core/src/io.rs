//! JSON formats for operators, symmetry data, Lie bases and circuit plans.

use crate::compiler::{CircuitPlan, Leaf, LeafTable, Level, QubitGate, Scheme, Step, Target};
use crate::densesim::CMat;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::lie::{DimReport, LieBasis};
use crate::op::Op;
use crate::pauli::{Coeff, Mode, PauliString, PauliSum};
use crate::qudit::{Interaction, QuditOperator, QuditSpec};
use crate::symmetry::{ChargeVector, SkReport, SymmetrySpec};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

fn bad(msg: impl Into<String>) -> Error {
    Error::validation(msg)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing field '{key}'")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("'{what}' must be a non-negative integer")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("'{what}' must be a number")))
}

fn usize_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array().ok_or_else(|| bad(format!("'{what}' must be a list")))?.iter().map(|x| as_usize(x, what)).collect()
}

fn big(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| bad(format!("'{what}' must be an integer"))),
        Value::String(s) => s.parse().map_err(|_| bad(format!("'{what}' is not an integer"))),
        _ => Err(bad(format!("'{what}' must be an integer"))),
    }
}

fn big_json(x: &BigInt) -> Value {
    x.to_i64().map_or_else(|| Value::String(x.to_string()), Value::from)
}

/// Exact coefficients as `{"num", "den"}`, floats as plain numbers.
pub fn coeff_to_json(c: &Coeff) -> Value {
    match c {
        Coeff::Exact(q) => json!({"num": big_json(q.numer()), "den": big_json(q.denom())}),
        Coeff::Float(x) => json!(x),
    }
}

pub fn coeff_from_json(v: &Value) -> Result<Coeff> {
    match v {
        Value::Number(n) => Ok(Coeff::Float(n.as_f64().ok_or_else(|| bad("bad number"))?)),
        Value::Object(_) => {
            let den = big(field(v, "den")?, "den")?;
            if den == BigInt::from(0) {
                return Err(bad("zero denominator"));
            }
            Ok(Coeff::Exact(BigRational::new(big(field(v, "num")?, "num")?, den)))
        }
        _ => Err(bad("coefficient must be a number or {num, den}")),
    }
}

pub fn pauli_sum_to_json(a: &PauliSum) -> Value {
    let mode = match a.mode() {
        Mode::Exact => "exact",
        Mode::Float => "float",
    };
    let terms: Vec<Value> = a
        .terms()
        .iter()
        .map(|(p, c)| match c {
            Coeff::Exact(q) => json!({"pauli": p.to_string(), "num": big_json(q.numer()), "den": big_json(q.denom())}),
            Coeff::Float(x) => json!({"pauli": p.to_string(), "coeff": x}),
        })
        .collect();
    json!({"n": a.n(), "mode": mode, "terms": terms})
}

pub fn pauli_sum_from_json(v: &Value) -> Result<PauliSum> {
    let n = as_usize(field(v, "n")?, "n")?;
    let mode: Mode = match v.get("mode") {
        Some(m) => m.as_str().ok_or_else(|| bad("'mode' must be a string"))?.parse()?,
        None => Mode::Exact,
    };
    let terms = field(v, "terms")?.as_array().ok_or_else(|| bad("'terms' must be a list"))?;
    let terms: Result<Vec<(PauliString, Coeff)>> = terms
        .iter()
        .map(|t| {
            let word = field(t, "pauli")?.as_str().ok_or_else(|| bad("'pauli' must be a string"))?;
            if word.chars().count() != n {
                return Err(bad(format!("word '{word}' does not have {n} sites")));
            }
            let p: PauliString = word.parse()?;
            let c = if let Some(x) = t.get("coeff") {
                Coeff::Float(as_f64(x, "coeff")?)
            } else {
                let den = t.get("den").map_or(Ok(BigInt::from(1)), |d| big(d, "den"))?;
                if den == BigInt::from(0) {
                    return Err(bad("zero denominator"));
                }
                Coeff::Exact(BigRational::new(big(field(t, "num")?, "num")?, den))
            };
            Ok((p, c.in_mode(mode)))
        })
        .collect();
    PauliSum::from_terms(n, mode, terms?)
}

/// Target files: a Pauli sum or sparse operator with an optional `"time"`.
pub fn target_from_json(v: &Value) -> Result<(Op, f64)> {
    let time = v.get("time").map_or(Ok(1.0), |t| as_f64(t, "time"))?;
    Ok((op_from_json(v)?, time))
}

pub fn op_to_json(op: &Op, dims: &[usize]) -> Result<Value> {
    match op {
        Op::Pauli(p) => Ok(pauli_sum_to_json(p)),
        Op::Dense(m) => Ok(qudit_operator_to_json(&QuditOperator::from_dense(dims.to_vec(), m)?)),
    }
}

pub fn op_from_json(v: &Value) -> Result<Op> {
    if v.get("terms").is_some() {
        Ok(Op::Pauli(pauli_sum_from_json(v)?))
    } else if v.get("entries").is_some() {
        Ok(Op::Dense(qudit_operator_from_json(v)?.to_dense()?))
    } else {
        Err(bad("operator needs 'terms' or 'entries'"))
    }
}

pub fn qudit_operator_to_json(op: &QuditOperator) -> Value {
    let entries: Vec<Value> = op.entries().iter().map(|(&(r, c), z)| json!([r, c, z.re, z.im])).collect();
    json!({"dims": op.dims(), "entries": entries})
}

pub fn qudit_operator_from_json(v: &Value) -> Result<QuditOperator> {
    let dims = usize_list(field(v, "dims")?, "dims")?;
    let entries = field(v, "entries")?.as_array().ok_or_else(|| bad("'entries' must be a list"))?;
    let entries: Result<Vec<_>> = entries
        .iter()
        .map(|e| {
            let e = e.as_array().filter(|e| e.len() == 4).ok_or_else(|| bad("entry must be [i, j, re, im]"))?;
            Ok((
                (as_usize(&e[0], "i")?, as_usize(&e[1], "j")?),
                Complex64::new(as_f64(&e[2], "re")?, as_f64(&e[3], "im")?),
            ))
        })
        .collect();
    QuditOperator::new(dims, entries?)
}

pub fn qudit_spec_to_json(s: &QuditSpec) -> Value {
    json!({"n": s.n, "d": s.d, "gap": s.gap, "ancillas": s.ancillas})
}

pub fn qudit_spec_from_json(v: &Value) -> Result<QuditSpec> {
    QuditSpec::new(
        as_usize(field(v, "n")?, "n")?,
        as_usize(field(v, "d")?, "d")?,
        v.get("gap").map_or(Ok(1.0), |g| as_f64(g, "gap"))?,
        v.get("ancillas").map_or(Ok(1), |a| as_usize(a, "ancillas"))?,
    )
}

pub fn symmetry_spec_from_json(v: &Value) -> Result<SymmetrySpec> {
    if let Some(n) = v.get("qubits") {
        return Ok(SymmetrySpec::qubits(as_usize(n, "qubits")?));
    }
    if let Some(q) = v.get("qudits") {
        return Ok(SymmetrySpec::qudits(as_usize(field(q, "n")?, "n")?, as_usize(field(q, "d")?, "d")?));
    }
    let sites = field(v, "sites")?.as_array().ok_or_else(|| bad("'sites' must be a list"))?;
    let sites: Result<Vec<Vec<i64>>> = sites
        .iter()
        .map(|s| {
            s.as_array()
                .ok_or_else(|| bad("site charges must be a list"))?
                .iter()
                .map(|c| c.as_i64().ok_or_else(|| bad("charges must be integers")))
                .collect()
        })
        .collect();
    SymmetrySpec::new(sites?)
}

pub fn symmetry_spec_to_json(s: &SymmetrySpec) -> Value {
    json!({"sites": s.sites()})
}

pub fn charge_vector_to_json(c: &ChargeVector) -> Value {
    let sectors: Map<String, Value> = c.sectors.iter().map(|(q, v)| (q.to_string(), json!(v.to_f64()))).collect();
    json!({"sectors": sectors})
}

pub fn sk_report_to_json(r: &SkReport) -> Value {
    let violations: Map<String, Value> = r.violations.iter().map(|(w, v)| (w.to_string(), json!(v.to_f64()))).collect();
    json!({"pass": r.pass, "violations": violations})
}

pub fn expr_to_json(e: &Expr) -> Value {
    match e {
        Expr::Leaf(i) => json!({"leaf": i}),
        Expr::Bracket(a, b) => json!({"bracket": [expr_to_json(a), expr_to_json(b)]}),
        Expr::Scale(c, a) => json!({"scale": coeff_to_json(c), "of": expr_to_json(a)}),
        Expr::Sum(xs) => json!({"sum": xs.iter().map(expr_to_json).collect::<Vec<_>>()}),
    }
}

pub fn expr_from_json(v: &Value) -> Result<Expr> {
    if let Some(i) = v.get("leaf") {
        return Ok(Expr::Leaf(as_usize(i, "leaf")?));
    }
    if let Some(pair) = v.get("bracket") {
        let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("'bracket' takes two operands"))?;
        return Ok(Expr::bracket(expr_from_json(&pair[0])?, expr_from_json(&pair[1])?));
    }
    if let Some(c) = v.get("scale") {
        return Ok(Expr::scale(coeff_from_json(c)?, expr_from_json(field(v, "of")?)?));
    }
    if let Some(xs) = v.get("sum") {
        let xs = xs.as_array().ok_or_else(|| bad("'sum' must be a list"))?;
        return Ok(Expr::Sum(xs.iter().map(expr_from_json).collect::<Result<_>>()?));
    }
    Err(bad("unrecognised expression node"))
}

pub fn lie_basis_to_json(b: &LieBasis) -> Value {
    json!({
        "n": b.n(),
        "dim": b.dim(),
        "closed": b.is_closed(),
        "generators": b.generators().iter().map(pauli_sum_to_json).collect::<Vec<_>>(),
        "elements": b.elements().iter().map(pauli_sum_to_json).collect::<Vec<_>>(),
        "provenance": b.provenance().iter().map(expr_to_json).collect::<Vec<_>>(),
    })
}

pub fn dim_report_to_json(r: &DimReport) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            json!({"k": row.k, "dim": row.dim, "traceless_dim": row.traceless_dim,
                   "s_k_dim": row.s_k_dim, "irreps": row.irreps})
        })
        .collect();
    json!({"n": r.n, "full_dim": r.full_dim.to_string(), "rows": rows, "bound_ok": r.bound_ok, "monotone": r.monotone})
}

fn is_qudit_leaf(name: &str) -> bool {
    matches!(name, "Ra" | "Rss" | "Zl")
}

fn plan_is_qudit(plan: &CircuitPlan) -> bool {
    plan.dims.iter().any(|&d| d != 2) || plan.leaves.iter().any(|l| is_qudit_leaf(&l.name))
}

fn qudit_spec_of(dims: &[usize], ancilla: &[usize]) -> Result<QuditSpec> {
    let n = dims.len() - ancilla.len();
    let expect: Vec<usize> = (n..dims.len()).collect();
    if n == 0 || ancilla != expect.as_slice() || dims[n..].iter().any(|&d| d != 2) {
        return Err(bad("qudit plans keep their qubit ancillas after the system sites"));
    }
    let d = dims[0];
    if dims[..n].iter().any(|&x| x != d) {
        return Err(bad("qudit plans need equal system dimensions"));
    }
    QuditSpec::new(n, d, 1.0, ancilla.len())
}

fn leaf_label(leaf: &Leaf, ancilla: &[usize]) -> String {
    if leaf.name == "Z" && leaf.sites.len() == 1 && ancilla.contains(&leaf.sites[0]) {
        "Za".into()
    } else {
        leaf.name.clone()
    }
}

fn leaf_to_json(leaf: &Leaf, ancilla: &[usize]) -> Value {
    let mut v = json!({"gen": leaf_label(leaf, ancilla), "sites": leaf.sites});
    if !leaf.levels.is_empty() {
        v["levels"] = json!(leaf.levels);
    }
    if let (Op::Pauli(p), None) = (&leaf.op, leaf.gate()) {
        v["op"] = pauli_sum_to_json(p);
    }
    v
}

fn leaf_from_json(v: &Value, dims: &[usize], qudit: Option<&QuditSpec>) -> Result<Leaf> {
    let name = field(v, "gen")?.as_str().ok_or_else(|| bad("'gen' must be a string"))?;
    let sites = usize_list(field(v, "sites")?, "sites")?;
    if let Some(op) = v.get("op") {
        let p = pauli_sum_from_json(op)?;
        if p.n() != dims.len() {
            return Err(bad("leaf operator has the wrong site count"));
        }
        return Leaf::pauli(name, p);
    }
    let levels = v.get("levels").map_or(Ok(vec![]), |l| usize_list(l, "levels"))?;
    match qudit {
        Some(spec) => Interaction::from_leaf(name, &sites, &levels, spec)?.leaf(spec),
        None => {
            if sites.iter().any(|&s| s >= dims.len()) {
                return Err(bad(format!("leaf sites {sites:?} out of range")));
            }
            Leaf::qubit(name.parse::<QubitGate>()?, &sites, dims.len())
        }
    }
}

pub fn plan_to_json(plan: &CircuitPlan) -> Result<Value> {
    let steps: Result<Vec<Value>> = plan
        .steps
        .iter()
        .map(|s| match s {
            Step::Pulse { leaf, duration } => {
                let l = &plan.leaves[*leaf];
                let mut v =
                    json!({"gen": leaf_label(l, &plan.ancilla), "sites": l.sites, "leaf": leaf, "duration": duration});
                if !l.levels.is_empty() {
                    v["levels"] = json!(l.levels);
                }
                Ok(v)
            }
            Step::Evolve { expr, duration, .. } => Ok(json!({"expr": expr_to_json(expr), "duration": duration})),
        })
        .collect();
    let n_system = plan.system_sites().len();
    let mut v = json!({
        "n": n_system,
        "dims": plan.dims,
        "ancilla": plan.ancilla,
        "family": if plan_is_qudit(plan) { "qudit" } else { "qubit" },
        "level": plan.level.as_str(),
        "epsilon": plan.epsilon,
        "scheme": plan.scheme.map(Scheme::as_str),
        "primitive_set": plan.primitive_set,
        "phase": plan.phase,
        "model_error": plan.model_error,
        "measured_error": plan.measured_error,
        "pulse_count": plan.pulse_count(),
        "leaves": plan.leaves.iter().map(|l| leaf_to_json(l, &plan.ancilla)).collect::<Vec<_>>(),
        "steps": steps?,
    });
    if let Some(t) = &plan.target {
        let op = match &t.hamiltonian {
            Op::Pauli(p) => pauli_sum_to_json(p),
            Op::Dense(m) => qudit_operator_to_json(&QuditOperator::from_dense(plan.system_dims(), m)?),
        };
        v["target"] = json!({"hamiltonian": op, "time": t.time});
    }
    Ok(v)
}

fn opt_f64(v: &Value, key: &str) -> Result<Option<f64>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => as_f64(x, key).map(Some),
    }
}

/// Reads a plan; `"leaves"` may be omitted when every pulse names a native gate.
pub fn plan_from_json(v: &Value) -> Result<CircuitPlan> {
    let ancilla = v.get("ancilla").map_or(Ok(vec![]), |a| usize_list(a, "ancilla"))?;
    let dims = match v.get("dims") {
        Some(d) => usize_list(d, "dims")?,
        None => vec![2; as_usize(field(v, "n")?, "n")? + ancilla.len()],
    };
    if dims.iter().any(|&d| d < 2) || ancilla.iter().any(|&a| a >= dims.len()) {
        return Err(bad("invalid dims or ancilla"));
    }
    let qudit = match v.get("family").and_then(Value::as_str) {
        Some("qudit") => Some(qudit_spec_of(&dims, &ancilla)?),
        Some("qubit") | None if dims.iter().all(|&d| d == 2) => None,
        Some("qubit") | None => Some(qudit_spec_of(&dims, &ancilla)?),
        Some(other) => return Err(bad(format!("unknown plan family '{other}'"))),
    };
    let mut table = match v.get("leaves") {
        Some(ls) => {
            let ls = ls.as_array().ok_or_else(|| bad("'leaves' must be a list"))?;
            LeafTable::from_leaves(ls.iter().map(|l| leaf_from_json(l, &dims, qudit.as_ref())).collect::<Result<_>>()?)
        }
        None => LeafTable::new(),
    };
    let raw_steps = field(v, "steps")?.as_array().ok_or_else(|| bad("'steps' must be a list"))?;
    let mut pending = Vec::new();
    for s in raw_steps {
        let duration = as_f64(field(s, "duration")?, "duration")?;
        if let Some(e) = s.get("expr") {
            pending.push((Some(expr_from_json(e)?), 0, duration));
        } else {
            let leaf = match s.get("leaf") {
                Some(i) => as_usize(i, "leaf")?,
                None => table.insert(leaf_from_json(s, &dims, qudit.as_ref())?),
            };
            pending.push((None, leaf, duration));
        }
    }
    let leaves = table.into_leaves();
    let ops: Vec<Op> = leaves.iter().map(|l| l.op.clone()).collect();
    let mut steps = Vec::new();
    for (expr, leaf, duration) in pending {
        steps.push(match expr {
            Some(expr) => {
                let hamiltonian = expr.eval(&ops)?;
                Step::Evolve { expr, hamiltonian, duration }
            }
            None => Step::Pulse { leaf, duration },
        });
    }
    let mut plan = CircuitPlan::empty(dims, ancilla);
    plan.leaves = leaves;
    plan.steps = steps;
    plan.level = match v.get("level").and_then(Value::as_str) {
        Some(l) => l.parse()?,
        None if plan.steps.iter().all(|s| matches!(s, Step::Pulse { .. })) => Level::Pulse,
        None => Level::Hamiltonian,
    };
    if plan.level == Level::Pulse && !plan.is_pulse_level() {
        return Err(bad("pulse-level plan contains evolution steps"));
    }
    plan.epsilon = opt_f64(v, "epsilon")?;
    plan.scheme = v.get("scheme").and_then(Value::as_str).map(str::parse).transpose()?;
    if let Some(p) = v.get("primitive_set").and_then(Value::as_str) {
        plan.primitive_set = p.into();
    }
    plan.phase = opt_f64(v, "phase")?.unwrap_or(0.0);
    plan.model_error = opt_f64(v, "model_error")?;
    plan.measured_error = opt_f64(v, "measured_error")?;
    if let Some(t) = v.get("target") {
        let hamiltonian = op_from_json(field(t, "hamiltonian")?)?;
        let time = t.get("time").map_or(Ok(1.0), |x| as_f64(x, "time"))?;
        attach_target(&mut plan, hamiltonian, time)?;
    }
    plan.validate()?;
    Ok(plan)
}

/// Attaches a target read from a file, checking its size against the plan.
pub fn attach_target(plan: &mut CircuitPlan, hamiltonian: Op, time: f64) -> Result<()> {
    let sys: usize = plan.system_dims().iter().product();
    let dim = match &hamiltonian {
        Op::Pauli(p) => 1usize.checked_shl(p.n() as u32).unwrap_or(usize::MAX),
        Op::Dense(m) => m.nrows(),
    };
    if dim != sys {
        return Err(bad(format!("target acts on dimension {dim}, plan system has {sys}")));
    }
    plan.target = Some(Target { hamiltonian, time });
    Ok(())
}

/// Dense matrix of a sparse operator file, for callers that need one.
pub fn dense_from_json(v: &Value) -> Result<CMat> {
    qudit_operator_from_json(v)?.to_dense()
}

/// Writes a JSON header line, then row-major little-endian `(re, im)` doubles.
pub fn write_matrix_binary(m: &CMat, w: &mut impl std::io::Write) -> Result<()> {
    let header =
        json!({"rows": m.nrows(), "cols": m.ncols(), "dtype": "complex128", "order": "row-major", "endian": "little"});
    let io_err = |e: std::io::Error| bad(format!("write failed: {e}"));
    writeln!(w, "{header}").map_err(io_err)?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            w.write_all(&z.re.to_le_bytes()).map_err(io_err)?;
            w.write_all(&z.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary(r: &mut impl std::io::BufRead) -> Result<CMat> {
    let io_err = |e: std::io::Error| bad(format!("read failed: {e}"));
    let mut line = String::new();
    r.read_line(&mut line).map_err(io_err)?;
    let header: Value = serde_json::from_str(&line).map_err(|e| bad(format!("bad matrix header: {e}")))?;
    let rows = as_usize(field(&header, "rows")?, "rows")?;
    let cols = as_usize(field(&header, "cols")?, "cols")?;
    let mut buf = vec![0u8; rows * cols * 16];
    r.read_exact(&mut buf).map_err(io_err)?;
    let value = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().expect("eight bytes"));
    Ok(CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(value(k), value(k + 1))
    }))
}

/// One row per line, entries as `re+imi`.
pub fn matrix_text(m: &CMat) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> =
            (0..m.ncols()).map(|c| format!("{:+.12e}{:+.12e}i", m[(r, c)].re, m[(r, c)].im)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{diagonal_with_ancilla, plan_distance};

    #[test]
    fn pauli_round_trip() {
        let a = PauliSum::from_words(3, &[("ZZI", -1, 2), ("XYZ", 3, 7)]).unwrap();
        let v = pauli_sum_to_json(&a);
        assert_eq!(pauli_sum_from_json(&v).unwrap(), a);
        let f: Value = serde_json::from_str(r#"{"n":2,"mode":"float","terms":[{"pauli":"ZZ","coeff":-0.5}]}"#).unwrap();
        assert_eq!(pauli_sum_from_json(&f).unwrap().mode(), Mode::Float);
        let wrong: Value = serde_json::from_str(r#"{"n":3,"terms":[{"pauli":"ZZ","num":1}]}"#).unwrap();
        assert!(pauli_sum_from_json(&wrong).is_err());
    }

    #[test]
    fn plan_round_trip() {
        let h = PauliSum::from_words(3, &[("ZZZ", 1, 1)]).unwrap();
        let plan = diagonal_with_ancilla(&h, 3, 0.7).unwrap();
        let v = plan_to_json(&plan).unwrap();
        let back = plan_from_json(&v).unwrap();
        assert_eq!(back.steps.len(), plan.steps.len());
        assert!(plan_distance(&plan, &back).unwrap().0 < 1e-12);
        assert!(back.target.is_some());
    }

    #[test]
    fn handwritten_pulse_plan() {
        let v: Value = serde_json::from_str(
            r#"{"n":3,"ancilla":[3],"level":"pulse","epsilon":1e-2,
                "steps":[{"gen":"R","sites":[0,3],"duration":0.125},{"gen":"Za","sites":[3],"duration":0.5}],
                "phase":0.7853981634}"#,
        )
        .unwrap();
        let plan = plan_from_json(&v).unwrap();
        assert_eq!(plan.pulse_count(), 2);
        assert_eq!(plan.leaves[1].name, "Z");
    }

    #[test]
    fn symmetry_shorthands() {
        let q: Value = serde_json::from_str(r#"{"qubits": 3}"#).unwrap();
        assert_eq!(symmetry_spec_from_json(&q).unwrap(), SymmetrySpec::qubits(3));
        let d: Value = serde_json::from_str(r#"{"qudits": {"n": 2, "d": 3}}"#).unwrap();
        assert_eq!(symmetry_spec_from_json(&d).unwrap(), SymmetrySpec::qudits(2, 3));
    }

    #[test]
    fn sparse_round_trip() {
        let op =
            QuditOperator::new(vec![3, 2], [((1, 2), Complex64::new(0.5, -1.0)), ((2, 1), Complex64::new(0.5, 1.0))])
                .unwrap();
        assert_eq!(qudit_operator_from_json(&qudit_operator_to_json(&op)).unwrap(), op);
    }

    #[test]
    fn binary_matrix_round_trip() {
        let m = CMat::from_fn(3, 2, |r, c| Complex64::new(r as f64 - 0.5, c as f64 * 1e-300));
        let mut bytes = Vec::new();
        write_matrix_binary(&m, &mut bytes).unwrap();
        assert_eq!(read_matrix_binary(&mut bytes.as_slice()).unwrap(), m);
        assert_eq!(matrix_text(&m).lines().count(), 3);
    }
}

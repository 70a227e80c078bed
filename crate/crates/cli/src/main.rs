use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use symlie::compiler::{
    chain_hamiltonian, compile, relabel_identity_error, run_plan, sector_block, swap_gate_error, verify_plan,
    ChainSpec, CompileOptions, ExpandOptions, Geometry, Level, Scheme,
};
use symlie::io;
use symlie::lie::{close, dimension_report, klocal_symmetric_basis, member};
use symlie::op::Op;
use symlie::qudit::{embedded_swap_error, qudit_compile, qudit_synthesize, two_ancilla_reduce, QuditSpec};
use symlie::symmetry::{charge_vector, full_symmetric_dim, s_k_test, SymmetrySpec};
use symlie::{Error, Mode, PauliSum};

/// Exit status for each error family.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Routing(_) | Error::Unsynthesizable { .. } => 1,
        Error::Budget(_) => 2,
        Error::Verification(_) | Error::Internal(_) => 3,
    }
}

#[derive(Parser)]
#[command(name = "symlie", version, about = "Lie closures and ancilla-assisted compilation for symmetric circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Coefficient arithmetic.
    #[arg(long, default_value = "exact", value_parser = ["exact", "float"])]
    mode: String,
    /// Closure dimension budget (default: full symmetric dimension, or SYMLIE_BUDGET_DIM).
    #[arg(long)]
    max_dim: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closure dimensions of k-local symmetric generators for k = 1..kmax.
    Dims {
        #[arg(long)]
        qubits: Option<usize>,
        /// Symmetry spec file (alternative to --qubits).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        kmax: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Weight-sum test of a diagonal Hamiltonian against k-local reachability.
    ChargeTest {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Closes a generator set and optionally tests membership of a target.
    Close {
        /// JSON list of Pauli sums (or {"generators": [...]}).
        #[arg(long)]
        generators: Option<PathBuf>,
        /// Use all k-local symmetric generators on this many qubits.
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compiles a symmetric qubit Hamiltonian evolution and verifies it.
    Compile {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value = "auto", value_parser = ["auto", "none"])]
        ancilla: String,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long, default_value = "none")]
        geometry: String,
        #[arg(long, default_value = "trotter2")]
        scheme: String,
        #[arg(long, default_value = "pulse")]
        level: String,
        #[command(flatten)]
        common: Common,
    },
    /// Checks a plan against its target.
    Verify {
        #[arg(long)]
        plan: PathBuf,
        /// Target file; defaults to the target recorded in the plan.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Tolerance; defaults to the plan's declared epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also write the simulated ancilla-|0> block as a binary matrix.
        #[arg(long)]
        unitary_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compiles an energy-conserving qudit evolution and verifies it.
    QuditCompile {
        /// Qudit spec file {"n", "d", "gap", "ancillas"}.
        #[arg(long)]
        spec: PathBuf,
        /// Sparse operator on the system qudits, with optional "time".
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long, default_value = "trotter2")]
        scheme: String,
        #[arg(long, default_value = "pulse")]
        level: String,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the chain, swap and two-ancilla identity checks.
    Identities {
        /// Longest chain checked.
        #[arg(long, default_value_t = 6)]
        vmax: usize,
        /// Random site tuples per chain length.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

type Outcome = symlie::Result<(Value, Option<String>)>;

fn read_json(path: &Path) -> symlie::Result<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

fn budget(common: &Common) -> symlie::Result<Option<usize>> {
    if common.max_dim.is_some() {
        return Ok(common.max_dim);
    }
    match std::env::var("SYMLIE_BUDGET_DIM") {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::validation(format!("SYMLIE_BUDGET_DIM must be an integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn mode(common: &Common) -> symlie::Result<Mode> {
    common.mode.parse()
}

fn symmetry(qubits: Option<usize>, spec: &Option<PathBuf>) -> symlie::Result<SymmetrySpec> {
    match (qubits, spec) {
        (Some(n), None) => Ok(SymmetrySpec::qubits(n)),
        (None, Some(p)) => io::symmetry_spec_from_json(&read_json(p)?),
        _ => Err(Error::validation("give exactly one of --qubits and --spec")),
    }
}

fn dims(qubits: Option<usize>, spec: &Option<PathBuf>, kmax: Option<usize>, common: &Common) -> Outcome {
    let spec = symmetry(qubits, spec)?;
    let n = spec.n();
    if mode(common)? != Mode::Exact {
        eprintln!("note: dimension claims always use exact arithmetic");
    }
    let report = dimension_report(n, kmax.unwrap_or(n), &spec, budget(common)?)?;
    let mut table = format!("n = {n}, full symmetric dimension {}\n", report.full_dim);
    table.push_str(" k    dim   traceless  S_k  irreps\n");
    for r in &report.rows {
        table.push_str(&format!("{:>2} {:>6} {:>11} {:>4} {:>7}\n", r.k, r.dim, r.traceless_dim, r.s_k_dim, r.irreps));
    }
    table.push_str(&format!("gap bound holds: {}, monotone: {}\n", report.bound_ok, report.monotone));
    Ok((io::dim_report_to_json(&report), Some(table)))
}

fn read_pauli_target(path: &Path) -> symlie::Result<(PauliSum, f64)> {
    match io::target_from_json(&read_json(path)?)? {
        (Op::Pauli(p), t) => Ok((p, t)),
        (Op::Dense(_), _) => Err(Error::validation("expected a Pauli-sum target")),
    }
}

fn charge_test(target: &Path, k: usize) -> Outcome {
    let (h, _) = read_pauli_target(target)?;
    let report = s_k_test(&h, k)?;
    let mut v = io::sk_report_to_json(&report);
    if h.n() <= 20 {
        let cv = charge_vector(&h, &SymmetrySpec::qubits(h.n()))?;
        v["charge_vector"] = io::charge_vector_to_json(&cv);
    }
    Ok((v, None))
}

fn generator_list(v: &Value) -> symlie::Result<Vec<PauliSum>> {
    let list = v.get("generators").unwrap_or(v);
    list.as_array()
        .ok_or_else(|| Error::validation("generators must be a list of Pauli sums"))?
        .iter()
        .map(io::pauli_sum_from_json)
        .collect()
}

fn close_cmd(
    generators: &Option<PathBuf>,
    qubits: Option<usize>,
    k: usize,
    spec: &Option<PathBuf>,
    target: &Option<PathBuf>,
    common: &Common,
) -> Outcome {
    let m = mode(common)?;
    let (gens, sym) = match (generators, qubits) {
        (Some(p), None) => {
            let gens = generator_list(&read_json(p)?)?;
            let n = gens.first().map(PauliSum::n).ok_or_else(|| Error::validation("no generators"))?;
            let sym = match spec {
                Some(s) => io::symmetry_spec_from_json(&read_json(s)?)?,
                None => SymmetrySpec::qubits(n),
            };
            (gens, sym)
        }
        (None, Some(n)) => {
            let sym = symmetry(Some(n), spec).or_else(|_| symmetry(None, spec))?;
            (klocal_symmetric_basis(n, k, &sym)?, sym)
        }
        _ => return Err(Error::validation("give exactly one of --generators and --qubits")),
    };
    let gens: Vec<PauliSum> = gens.iter().map(|g| g.to_mode(m)).collect();
    let basis = close(&gens, &sym, budget(common)?)?;
    let mut v = io::lie_basis_to_json(&basis);
    v["full_dim"] = json!(full_symmetric_dim(&sym).to_string());
    let mut summary = format!("closure dimension {} (traceless {})\n", basis.dim(), basis.dim().saturating_sub(1));
    if let Some(t) = target {
        let (h, _) = read_pauli_target(t)?;
        let mb = member(&h, &basis)?;
        v["membership"] = json!({"member": mb.member, "residual": mb.residual.to_f64()});
        summary.push_str(&format!("target member: {} (residual {})\n", mb.member, mb.residual));
    }
    Ok((v, Some(summary)))
}

fn summary_of(plan: &Value) -> Value {
    let keep = ["level", "epsilon", "scheme", "phase", "pulse_count", "model_error", "measured_error", "primitive_set"];
    keep.iter().filter_map(|k| plan.get(*k).map(|x| (k.to_string(), x.clone()))).collect()
}

#[allow(clippy::too_many_arguments)]
fn compile_cmd(
    target: &Path,
    ancilla: &str,
    epsilon: f64,
    geometry: &str,
    scheme: &str,
    level: &str,
    common: &Common,
) -> Outcome {
    let (h, t) = read_pauli_target(target)?;
    let opts = CompileOptions {
        ancilla: ancilla == "auto",
        epsilon,
        geometry: geometry.parse::<Geometry>()?,
        scheme: scheme.parse::<Scheme>()?,
        level: level.parse::<Level>()?,
        max_dim: budget(common)?,
        ..Default::default()
    };
    let (plan, v) = compile(&h.to_mode(mode(common)?), t, &opts)?;
    let mut out = io::plan_to_json(&plan)?;
    out["verification"] = verification_json(&v, plan.epsilon.unwrap_or(epsilon));
    let mut summary = summary_of(&out);
    summary["verification"] = out["verification"].clone();
    Ok((out, Some(serde_json::to_string_pretty(&summary).expect("json") + "\n")))
}

fn verification_json(v: &symlie::compiler::Verification, eps: f64) -> Value {
    json!({
        "distance": v.distance,
        "recorded_phase_distance": v.recorded_phase_distance,
        "leakage": v.leakage,
        "unitarity_error": v.unitarity_error,
        "epsilon": eps,
        "pass": v.within(eps),
    })
}

fn verify_cmd(plan: &Path, target: &Option<PathBuf>, epsilon: Option<f64>, unitary_out: &Option<PathBuf>) -> Outcome {
    let mut p = io::plan_from_json(&read_json(plan)?)?;
    if let Some(t) = target {
        let (op, time) = io::target_from_json(&read_json(t)?)?;
        io::attach_target(&mut p, op, time)?;
    }
    let eps =
        epsilon.or(p.epsilon).ok_or_else(|| Error::validation("no epsilon given and none declared in the plan"))?;
    let v = verify_plan(&p)?;
    if let Some(path) = unitary_out {
        let u = run_plan(&p)?;
        let (block, _) = sector_block(&u.matrix, &p.dims, &p.ancilla)?;
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", path.display())))?;
        io::write_matrix_binary(&block, &mut file)?;
    }
    let out = verification_json(&v, eps);
    if !v.within(eps) {
        return Err(Error::Verification(out.to_string()));
    }
    Ok((out, None))
}

fn qudit_cmd(spec: &Path, target: &Path, epsilon: f64, scheme: &str, level: &str) -> Outcome {
    let spec = io::qudit_spec_from_json(&read_json(spec)?)?;
    let tv = read_json(target)?;
    let h = io::qudit_operator_from_json(&tv)?;
    let t = tv.get("time").and_then(Value::as_f64).unwrap_or(1.0);
    let (plan, eps) = match level.parse::<Level>()? {
        Level::Hamiltonian => (qudit_synthesize(&h, &spec, t)?, symlie::compiler::HAMILTONIAN_TOL),
        Level::Pulse => {
            let opts = ExpandOptions { scheme: scheme.parse()?, ..Default::default() };
            (qudit_compile(&h, &spec, t, epsilon, opts)?, epsilon)
        }
    };
    let v = verify_plan(&plan)?;
    if !v.within(eps) {
        return Err(Error::Verification(format!("distance {:.3e}, leakage {:.3e}", v.distance, v.leakage)));
    }
    let mut out = io::plan_to_json(&plan)?;
    out["spec"] = io::qudit_spec_to_json(&spec);
    out["verification"] = verification_json(&v, eps);
    let mut summary = summary_of(&out);
    summary["verification"] = out["verification"].clone();
    Ok((out, Some(serde_json::to_string_pretty(&summary).expect("json") + "\n")))
}

fn identities(vmax: usize, samples: usize, seed: u64) -> Outcome {
    if vmax < 2 {
        return Err(Error::validation("--vmax must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = vmax + 2;
    let mut chains = Vec::new();
    let mut text = String::from(" v  sign  commutator_sign  tuples\n");
    for v in 2..=vmax {
        let mut signs = std::collections::BTreeSet::new();
        for _ in 0..samples.max(1) {
            let sites = rand::seq::index::sample(&mut rng, n, v).into_vec();
            let id = chain_hamiltonian(&ChainSpec::new(sites)?, n)?;
            if id.realized != id.shape.scale_ratio(id.sign as i64, 1) {
                return Err(Error::Internal(format!("chain identity fails for v = {v}")));
            }
            signs.insert((id.sign, id.commutator_sign));
        }
        if signs.len() != 1 {
            return Err(Error::Internal(format!("inconsistent chain signs for v = {v}: {signs:?}")));
        }
        let (sign, comm) = *signs.iter().next().expect("one sign");
        text.push_str(&format!("{v:>2} {sign:>5} {comm:>16} {:>7}\n", samples.max(1)));
        chains.push(json!({"v": v, "sign": sign, "commutator_sign": comm, "tuples": samples.max(1)}));
    }
    let swap = swap_gate_error()?;
    let relabel = relabel_identity_error(4, 0, 1, 3, 0.37)?;
    let qudit_swap = embedded_swap_error(3, 1, 2)?;
    let mut two = Vec::new();
    for d in [2usize, 3] {
        let red = two_ancilla_reduce(&QuditSpec::new(2, d, 1.0, 2)?, 0, 1, 1, d - 1, 0.3)?;
        text.push_str(&format!(
            "two-ancilla d = {d}: scale {} (plain commutators {}), error {:.1e}\n",
            red.scale, red.commutator_scale, red.identity_error
        ));
        two.push(json!({"d": d, "scale": red.scale, "commutator_scale": red.commutator_scale,
                        "identity_error": red.identity_error, "sector_error": red.sector_error}));
    }
    text.push_str(&format!("swap {swap:.1e}, relabel {relabel:.1e}, embedded qudit swap {qudit_swap:.1e}\n"));
    let out = json!({
        "chains": chains,
        "swap_error": swap,
        "relabel_error": relabel,
        "qudit_swap_error": qudit_swap,
        "two_ancilla": two,
        "seed": seed,
    });
    Ok((out, Some(text)))
}

fn run(cli: Cli) -> (Outcome, Common) {
    match cli.command {
        Command::Dims { qubits, spec, kmax, common } => (dims(qubits, &spec, kmax, &common), common),
        Command::ChargeTest { target, k, common } => (charge_test(&target, k), common),
        Command::Close { generators, qubits, k, spec, target, common } => {
            (close_cmd(&generators, qubits, k, &spec, &target, &common), common)
        }
        Command::Compile { target, ancilla, epsilon, geometry, scheme, level, common } => {
            (compile_cmd(&target, &ancilla, epsilon, &geometry, &scheme, &level, &common), common)
        }
        Command::Verify { plan, target, epsilon, unitary_out, common } => {
            (verify_cmd(&plan, &target, epsilon, &unitary_out), common)
        }
        Command::QuditCompile { spec, target, epsilon, scheme, level, common } => {
            (qudit_cmd(&spec, &target, epsilon, &scheme, &level), common)
        }
        Command::Identities { vmax, samples, common } => (identities(vmax, samples, common.seed), common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Table-oriented commands print their table; the rest print JSON.
    let table = matches!(cli.command, Command::Dims { .. } | Command::Identities { .. });
    let (outcome, common) = run(cli);
    match outcome {
        Ok((value, human)) => {
            let text = serde_json::to_string_pretty(&value).expect("json") + "\n";
            match &common.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    if let Some(h) = human {
                        print!("{h}");
                    }
                }
                None => match human.filter(|_| table) {
                    Some(h) => print!("{h}"),
                    None => print!("{text}"),
                },
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! `clustercut`: plan, estimate, simulate clustered Hamiltonians, and run VQE
//! experiments from the command line.
//!
//! Results go to stdout as newline-delimited JSON (CSV for traces); a short
//! human summary goes to stderr. Failures print `{"error": code, "message": …}`
//! and exit with status 2 (library errors) or 1 (I/O and usage).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clustercut::backend::Backend;
use clustercut::circuit::{Circuit, Gate, PostProcess, QcAlgorithm};
use clustercut::estimator::{estimate, estimate_median, plan_samples, plan_samples_for, EstimatorConfig, DEFAULT_BUDGET};
use clustercut::hamsim::{correlation, ClusteredHamiltonian, CorrelationOptions, CorrelationTask, PartyObservable};
use clustercut::network::{build_network, exact_value_with_limit, Clustering, TensorNetwork, DEFAULT_ORACLE_LIMIT};
use clustercut::vqe::{
    energy, pruning_experiment, pruning_regimes, relative_error, spsa_vqe, trace_csv, AnsatzSpec, EnergyMode, Entangler,
    PauliSumHamiltonian, PruningConfig, SpsaConfig, DEFAULT_SHOTS,
};
use clustercut::{plan_cuts, CutPlan, Mode};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "clustercut", version, about = "Cluster simulation of quantum circuits by wire and gate cutting")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the main output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report cluster parameters and predicted sample counts.
    Plan(PlanArgs),
    /// Estimate the value of a clustered circuit.
    Estimate(EstimateArgs),
    /// Estimate a correlation function of a clustered Hamiltonian.
    Hamsim(HamsimArgs),
    /// VQE experiments: energies, SPSA traces, entangler pruning.
    Vqe(VqeArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Circuit JSON: {"n": 4, "gates": [{"kind": "cnot", "targets": [0, 1]}, …]}.
    #[arg(long)]
    circuit: PathBuf,
    /// Post-processing JSON ({"type": "pauli"|"blocks"|"table"|"one", …}); Z on every qubit if omitted.
    #[arg(long)]
    post: Option<PathBuf>,
    /// Clustering JSON {"clusters": [[vertex ids]…], "split": [[gate vertex, c0, c1]…]}; plan output is accepted.
    #[arg(long, conflicts_with = "auto_cluster")]
    clustering: Option<PathBuf>,
    /// Build the clustering greedily under --max-width.
    #[arg(long)]
    auto_cluster: bool,
    /// Width cap for --auto-cluster and the fragment engine.
    #[arg(long, default_value_t = 12)]
    max_width: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Enumerate,
    Montecarlo,
    Tensor,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Enumerate => Mode::Enumerate,
            ModeArg::Montecarlo => Mode::Montecarlo,
            ModeArg::Tensor => Mode::Tensor,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Enumerate)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the planned sample count (Monte Carlo) or shots per entry (tensor).
    #[arg(long)]
    samples: Option<u64>,
    /// Tensor mode: use exact fragment expectations instead of shots.
    #[arg(long)]
    exact_entries: bool,
    /// Take the median of repeated runs so the failure probability drops to this value.
    #[arg(long)]
    fail_prob: Option<f64>,
    /// Cap on enumerated assignments.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: f64,
    /// Also report the brute-force value (limited by CLUSTERCUT_ORACLE_LIMIT qubits).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct HamsimArgs {
    /// Hamiltonian JSON: {"parties": [[0,1,2],[3,4,5]], "terms": [{"pauli": "ZZ", "qubits": [2,3], "coeff": 0.2}, …]}.
    #[arg(long)]
    hamiltonian: PathBuf,
    /// Per-party Pauli observables separated by commas, e.g. "ZIZ,XII"; Z on every qubit if omitted.
    #[arg(long)]
    observables: Option<String>,
    /// Circuit JSON preparing the initial product state; every gate must stay inside one party.
    #[arg(long)]
    prep: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Share of ε spent on Trotter error.
    #[arg(long, default_value_t = 0.5)]
    trotter_fraction: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Montecarlo)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<u64>,
    /// Fragment engine width.
    #[arg(long, default_value_t = 12)]
    max_width: usize,
    /// Also report the dense-evolution value (limited by CLUSTERCUT_ORACLE_LIMIT qubits).
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    /// Energy at one parameter vector.
    Energy,
    /// SPSA trace as CSV.
    Spsa,
    /// Relative-error traces of the three pruning regimes as CSV.
    Pruning,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyArg {
    Full,
    Cut,
    Shots,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntanglerArg {
    Cz,
    Cnot,
}

#[derive(Args)]
struct VqeArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Entangler layers D.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, value_enum, default_value_t = EntanglerArg::Cz)]
    entangler: EntanglerArg,
    /// Comma-separated layers whose entangler is pruned.
    #[arg(long, value_delimiter = ',')]
    pruned: Vec<usize>,
    /// Pauli-sum JSON {"n": 6, "terms": [{"coeff": 0.5, "pauli": "XZIIYZ"}, …]}; random otherwise.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Terms of each random Hamiltonian.
    #[arg(long, default_value_t = 50)]
    terms: usize,
    /// Random Hamiltonians in the pruning experiment.
    #[arg(long, default_value_t = 20)]
    hamiltonians: usize,
    /// SPSA iterations (200 for spsa, 100000 for pruning when omitted).
    #[arg(long)]
    iterations: Option<usize>,
    /// SPSA learning-rate scale a in a_k = a/k^0.3.
    #[arg(long)]
    spsa_a: Option<f64>,
    /// SPSA perturbation scale c in c_k = c/√k.
    #[arg(long)]
    spsa_c: Option<f64>,
    #[arg(long, value_enum, default_value_t = EnergyArg::Full)]
    energy: EnergyArg,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum CliError {
    Lib(clustercut::Error),
    Io(String),
}

impl From<clustercut::Error> for CliError {
    fn from(e: clustercut::Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn oracle_limit() -> usize {
    std::env::var("CLUSTERCUT_ORACLE_LIMIT").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_ORACLE_LIMIT)
}

struct Output {
    path: Option<PathBuf>,
    text: String,
}

impl Output {
    fn line(&mut self, v: &Value) {
        self.text.push_str(&v.to_string());
        self.text.push('\n');
    }

    fn finish(self) -> CliResult<()> {
        match self.path {
            Some(p) => fs::write(&p, self.text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => {
                print!("{}", self.text);
                Ok(())
            }
        }
    }
}

fn load_algorithm(input: &InputArgs) -> CliResult<QcAlgorithm> {
    let circuit = Circuit::from_json(&read(&input.circuit)?)?;
    let post = match &input.post {
        Some(p) => PostProcess::from_json(&read(p)?)?,
        None => clustercut::pauli_observable_expectation_post(&"Z".repeat(circuit.n))?,
    };
    Ok(QcAlgorithm::new(circuit, post)?)
}

fn load_plan(input: &InputArgs) -> CliResult<(TensorNetwork, CutPlan)> {
    if !(input.epsilon > 0.0 && input.epsilon <= 1.0) {
        return Err(clustercut::Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {}", input.epsilon)).into());
    }
    let alg = load_algorithm(input)?;
    let net = build_network(&alg);
    let clustering = match (&input.clustering, input.auto_cluster) {
        (Some(p), _) => Clustering::from_json(&net, &read(p)?)?,
        (None, true) => Clustering::greedy(&net, input.max_width)?,
        (None, false) => Clustering::single(&net),
    };
    let plan = plan_cuts(&net, &clustering)?;
    Ok((net, plan))
}

fn summary_line(plan: &CutPlan) -> String {
    let p = &plan.params;
    let cc = p.cc_exact.map_or(format!("≤{}", p.cc_upper), |c| c.to_string());
    format!("K={} d={} r={} cc={cc} d_recycled={}", p.k, p.d, p.r, plan.recycled_width())
}

fn cmd_plan(args: &PlanArgs, out: &mut Output) -> CliResult<()> {
    let (_, plan) = load_plan(&args.input)?;
    let eps = args.input.epsilon;
    let d_prime = plan.params.g.max_degree();
    let mut v = serde_json::to_value(plan.summary()).expect("summary serializes");
    v["command"] = json!("plan");
    v["cc"] = json!(plan.params.cc());
    v["d_prime"] = json!(d_prime);
    v["predicted"] = json!({
        "montecarlo": plan_samples(plan.k(), plan.r(), d_prime, eps, Mode::Montecarlo),
        "tensor": plan_samples(plan.k(), plan.r(), d_prime, eps, Mode::Tensor),
        "montecarlo_actual": plan_samples_for(&plan, eps, Mode::Montecarlo),
        "tensor_actual": plan_samples_for(&plan, eps, Mode::Tensor),
    });
    out.line(&v);
    let mc = plan_samples(plan.k(), plan.r(), d_prime, eps, Mode::Montecarlo);
    let tn = plan_samples(plan.k(), plan.r(), d_prime, eps, Mode::Tensor);
    eprintln!("{}  N={} D·N={:.3e}", summary_line(&plan), mc.n, tn.predicted_executions);
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs, out: &mut Output) -> CliResult<()> {
    let (net, plan) = load_plan(&args.input)?;
    let cfg = EstimatorConfig {
        mode: args.mode.into(),
        epsilon: args.input.epsilon,
        seed: args.seed,
        budget: args.budget,
        exact_entries: args.exact_entries,
        samples: args.samples,
        backend: Backend::new(args.input.max_width),
    };
    let est = match args.fail_prob {
        Some(p) => estimate_median(&plan, &cfg, p)?,
        None => estimate(&plan, &cfg)?,
    };
    let mut v = serde_json::to_value(&est).expect("estimate serializes");
    v["command"] = json!("estimate");
    v["seed"] = json!(args.seed);
    v["epsilon"] = json!(args.input.epsilon);
    v["r"] = json!(plan.r());
    if args.oracle {
        let exact = exact_value_with_limit(&net, oracle_limit())?;
        v["oracle"] = json!(exact);
    }
    // Wall-clock time varies between runs; keep it out of the machine output so
    // repeated runs with one seed are byte-identical.
    let wall = v.as_object_mut().and_then(|o| o.remove("wallclock_ms"));
    out.line(&v);
    eprintln!(
        "{}  value={:.6} ± {:.2e} ({} fragment runs, {:.1} ms)",
        summary_line(&plan),
        est.value,
        est.stderr,
        est.fragments,
        wall.and_then(|w| w.as_f64()).unwrap_or(0.0)
    );
    Ok(())
}

fn cmd_hamsim(args: &HamsimArgs, out: &mut Output) -> CliResult<()> {
    let h = ClusteredHamiltonian::from_json(&read(&args.hamiltonian)?)?;
    let labels: Vec<String> = match &args.observables {
        Some(s) => s.split(',').map(|x| x.trim().to_string()).collect(),
        None => h.parties.iter().map(|p| "Z".repeat(p.len())).collect(),
    };
    if labels.len() != h.parties.len() {
        return Err(clustercut::Error::InvalidArgument(format!(
            "{} observables given for {} parties",
            labels.len(),
            h.parties.len()
        ))
        .into());
    }
    let observables = h
        .parties
        .iter()
        .zip(&labels)
        .map(|(qs, l)| PartyObservable::pauli(qs.clone(), l))
        .collect::<clustercut::Result<Vec<_>>>()?;
    let mut preps: Vec<Vec<Gate>> = vec![Vec::new(); h.parties.len()];
    if let Some(p) = &args.prep {
        let c = Circuit::from_json(&read(p)?)?;
        clustercut::validate(&c).into_result()?;
        for g in c.gates {
            let q = g.targets()[0];
            if q >= h.n {
                return Err(clustercut::Error::InvalidArgument(format!("prep gate on qubit {q} outside the Hamiltonian")).into());
            }
            preps[h.party_of(q)].push(g);
        }
    }
    let task = CorrelationTask { hamiltonian: h, preps, observables, t: args.t, epsilon: args.epsilon };
    let opts = CorrelationOptions {
        trotter_fraction: args.trotter_fraction,
        mode: args.mode.into(),
        seed: args.seed,
        max_width: args.max_width,
        samples: args.samples,
    };
    let report = correlation(&task, &opts)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["command"] = json!("hamsim");
    v["t"] = json!(args.t);
    v["epsilon"] = json!(args.epsilon);
    if let Some(est) = v.get_mut("estimate").and_then(|e| e.as_object_mut()) {
        est.remove("wallclock_ms");
    }
    if args.oracle {
        let limit = oracle_limit();
        if task.hamiltonian.n > limit {
            return Err(clustercut::Error::OracleTooLarge { n: task.hamiltonian.n, limit }.into());
        }
        v["oracle"] = json!(task.exact()?);
    }
    out.line(&v);
    eprintln!(
        "m1={} m2={} K={} cc={} value={:.6} ± {:.2e}",
        report.m1, report.m2, report.k, report.cc, report.estimate.value, report.estimate.stderr
    );
    Ok(())
}

fn vqe_hamiltonian(args: &VqeArgs) -> CliResult<PauliSumHamiltonian> {
    match &args.hamiltonian {
        Some(p) => Ok(PauliSumHamiltonian::from_json(&read(p)?)?),
        None => {
            let mut rng = clustercut::rng::keyed(args.seed, clustercut::rng::stream::INSTANCE, 0);
            Ok(PauliSumHamiltonian::random(args.n, args.terms, &mut rng))
        }
    }
}

fn spsa_config(args: &VqeArgs, base: SpsaConfig, iterations: usize) -> SpsaConfig {
    SpsaConfig {
        iterations: args.iterations.unwrap_or(iterations),
        seed: args.seed,
        a: args.spsa_a.unwrap_or(base.a),
        c: args.spsa_c.unwrap_or(base.c),
        ..base
    }
}

fn cmd_vqe(args: &VqeArgs, out: &mut Output) -> CliResult<()> {
    let entangler = match args.entangler {
        EntanglerArg::Cz => Entangler::CzChain,
        EntanglerArg::Cnot => Entangler::CnotLadder,
    };
    let spec = AnsatzSpec::new(args.n, args.depth, entangler).with_pruned(args.pruned.clone());
    let mode = match args.energy {
        EnergyArg::Full => EnergyMode::Full,
        EnergyArg::Cut => EnergyMode::CutExact,
        EnergyArg::Shots => EnergyMode::CutShots { shots: args.shots, seed: args.seed },
    };
    match args.experiment {
        Experiment::Energy => {
            let h = vqe_hamiltonian(args)?;
            spec.validate()?;
            let theta = SpsaConfig { seed: args.seed, ..SpsaConfig::default() }.initial_theta(spec.param_count());
            let e = energy(&spec, &theta, &h, mode)?;
            let v_opt = h.ground_energy();
            let mut v = serde_json::to_value(&e).expect("energy serializes");
            v["command"] = json!("vqe");
            v["experiment"] = json!("energy");
            v["parameters"] = json!(spec.param_count());
            v["ground_energy"] = json!(v_opt);
            out.line(&v);
            eprintln!("energy={:.6} ground={v_opt:.6} parameters={}", e.value, spec.param_count());
        }
        Experiment::Spsa => {
            let h = vqe_hamiltonian(args)?;
            let cfg = spsa_config(args, SpsaConfig::default(), 200);
            let trace = spsa_vqe(&spec, &h, &cfg, mode)?;
            let v_opt = h.ground_energy();
            out.text.push_str(&trace_csv(&trace, v_opt));
            let last = trace.steps.last().map_or(f64::NAN, |s| s.f_theta);
            eprintln!(
                "{} iterations, final F={last:.6}, ground={v_opt:.6}, relative error {:.4}",
                cfg.iterations,
                relative_error(last, v_opt)
            );
        }
        Experiment::Pruning => {
            let cfg = PruningConfig {
                n: args.n,
                hamiltonians: args.hamiltonians,
                terms: args.terms,
                spsa: spsa_config(args, SpsaConfig::pruning(), 100_000),
                regimes: pruning_regimes(),
                seed: args.seed,
            };
            let report = pruning_experiment(&cfg)?;
            out.text.push_str(&report.to_csv());
            let finals: Vec<String> = report
                .regimes
                .iter()
                .enumerate()
                .map(|(i, r)| format!("{}={:.4}", r.name, report.final_value(i, 0.05)))
                .collect();
            eprintln!("final relative errors (last 5%): {}", finals.join(" "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("--workers must be at least 1");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let mut out = Output { path: cli.out.clone(), text: String::new() };
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a, &mut out),
        Command::Estimate(a) => cmd_estimate(a, &mut out),
        Command::Hamsim(a) => cmd_hamsim(a, &mut out),
        Command::Vqe(a) => cmd_vqe(a, &mut out),
    }
    .and_then(|_| out.finish());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Lib(e)) => {
            println!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            println!("{}", json!({ "error": "io", "message": msg }));
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! Command-line front end: `compile → embed → solve → analyze`, plus the
//! `oracle`, `protocol` and `ramsey-energy` utilities. Files are the only
//! handoff between steps.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::analysis::{
    boltzmann_fit, configuration_counts, equal_energy_dispersion, estimate_from_reads, exhaustive_ground, histogram,
    max_dispersion, ramsey_protocol, EmbeddedSaSolver, OracleSolver, ProtocolReport, QaSolver, RamseySolver,
    ResultsFile, SaSolver, MAX_PROTOCOL_VERTICES,
};
use crate::cost::{ramsey_energy, RamseyInstance};
use crate::embed::{
    embed_model, find_embedding, tune_lambda, EmbeddedModel, Embedding, HardwareFile, HardwareGraph, LambdaSweep,
};
use crate::error::{Error, Result};
use crate::graph::{edge_count, GraphBits};
use crate::qa::{evolve, measure_energies, recommended_steps, sample_state, AnnealSchedule, MAX_QUBITS};
use crate::qubo::{build_ramsey_model, coef_from_f64, to_spin, Domain, PenaltyConfig, QuadraticModel};
use crate::sa::{simulated_anneal, CoolingSchedule, SampleSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Fallback for `--threads`.
pub const THREADS_ENV: &str = "RAMSEY_FORGE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ramsey-forge",
    version,
    about = "Ramsey numbers as Ising ground-state problems"
)]
pub struct Cli {
    /// Worker threads for parallel kernels.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the QUBO for an instance and write a problem file.
    Compile(CompileArgs),
    /// Minor-embed a problem into a Chimera chip.
    Embed(EmbedArgs),
    /// Sample a problem or embedded problem with SA or the QA simulator.
    Solve(SolveArgs),
    /// Histograms, success rates and fits for a sample file.
    Analyze(AnalyzeArgs),
    /// Exact ground energy and degeneracy by enumeration.
    Oracle(OracleArgs),
    /// Increase N until the minimum energy turns positive.
    Protocol(ProtocolArgs),
    /// Cost of a single graph.
    RamseyEnergy(EnergyArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Clique order.
    #[arg(short = 'm')]
    pub m: usize,
    /// Independent-set order.
    #[arg(short = 'n')]
    pub n: usize,
    /// Vertex count.
    #[arg(short = 'N')]
    pub big_n: usize,
}

impl InstanceArgs {
    fn instance(&self) -> Result<RamseyInstance> {
        RamseyInstance::new(self.big_n, self.m, self.n)
    }
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    /// Penalty weight for the ancilla constraints.
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    /// Fix the first edge to 0 (R(3,3) only).
    #[arg(long)]
    pub fix_first: bool,
    /// Convert to Ising spins before writing.
    #[arg(long)]
    pub spin: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Problem file from `compile`.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Hardware description `{rows, cols, shore, defects}`; default is the 106-qubit chip.
    #[arg(long)]
    pub hardware: Option<PathBuf>,
    /// Chain strength.
    #[arg(long, default_value_t = 2.0, conflicts_with = "tune")]
    pub lambda: f64,
    /// Raise λ until the SA feasible fraction exceeds 0.85.
    #[arg(long)]
    pub tune: bool,
    #[arg(long, default_value_t = 1000)]
    pub tune_reads: usize,
    #[command(flatten)]
    pub sa: ScheduleArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 10.0)]
    pub t_initial: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
}

impl ScheduleArgs {
    fn schedule(&self) -> Result<CoolingSchedule> {
        CoolingSchedule::new(self.t_initial, self.t_final, self.sweeps)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem or embedded-problem file.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, conflicts_with = "qa", required_unless_present = "qa")]
    pub sa: bool,
    #[arg(long)]
    pub qa: bool,
    #[arg(long, default_value_t = 1000)]
    pub reads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Anneal time for `--qa`.
    #[arg(long, default_value_t = 10.0)]
    pub tf: f64,
    /// Integrator steps for `--qa`; default keeps `dt·‖H‖ ≤ 0.01`.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Tabulated `s, A(s), B(s)` for `--qa`; default is linear.
    #[arg(long)]
    pub schedule_file: Option<PathBuf>,
    /// Sample CSV; a JSON summary goes next to it.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// The file that was solved.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    /// Sampler that produced the reads, recorded in the results file.
    #[arg(long, default_value = "sa")]
    pub source: String,
    /// Reference ground energy; `--oracle` computes it by enumeration.
    #[arg(long)]
    pub ground: Option<f64>,
    #[arg(long, conflicts_with = "ground")]
    pub oracle: bool,
    /// Fit a Boltzmann temperature to the hardware-level configurations.
    #[arg(long)]
    pub fit: bool,
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long)]
    pub histogram_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    /// Print every minimizer as a bitstring.
    #[arg(long)]
    pub list: bool,
    #[arg(long)]
    pub results: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Oracle,
    Sa,
    Qa,
    SaEmbedded,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(short = 'm')]
    pub m: usize,
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(long, value_enum, default_value = "oracle")]
    pub solver: SolverKind,
    /// First vertex count; defaults to 4 for R(3,3), else one below the larger order.
    #[arg(long)]
    pub n_start: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub reads: usize,
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 10.0)]
    pub tf: f64,
    #[arg(long)]
    pub hardware: Option<PathBuf>,
    /// Chain strength for `sa-embedded`; tuned when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(short = 'm')]
    pub m: usize,
    #[arg(short = 'n')]
    pub n: usize,
    /// Edge bits in column-wise lower-triangular order, e.g. `101101`.
    #[arg(long)]
    pub bits: String,
}

/// Parses `args`, runs the command and maps errors to exit codes.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match dispatch(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse(_) | Error::Json(_) => EXIT_USAGE,
        Error::NotFound(_) | Error::Io(_) => EXIT_NOT_FOUND,
        Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Compile(a) => cmd_compile(a, out),
        Command::Embed(a) => cmd_embed(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Protocol(a) => cmd_protocol(a, out),
        Command::RamseyEnergy(a) => cmd_energy(a, out),
    }
}

/// A compiled problem, optionally with an embedding onto hardware.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: Option<RamseyInstance>,
    pub model: QuadraticModel,
    pub embedding: Option<(Embedding, HardwareGraph)>,
}

impl Problem {
    /// Reads a problem file, an embedded-problem file, or a bare model file.
    pub fn load(path: &Path) -> Result<Self> {
        let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        let instance = match v.get("instance") {
            Some(i) => Some(serde_json::from_value(i.clone())?),
            None => None,
        };
        let Some(model) = v.get("model") else {
            return Ok(Self {
                instance,
                model: QuadraticModel::from_json(&v)?,
                embedding: None,
            });
        };
        let model = QuadraticModel::from_json(model)?;
        let embedding = match (v.get("embedding"), v.get("hardware")) {
            (Some(e), Some(h)) => {
                let hw: HardwareFile = serde_json::from_value(h.clone())?;
                Some((Embedding::from_json(e)?, HardwareGraph::from_file(&hw)?))
            }
            (None, None) => None,
            _ => return Err(Error::Parse("embedding and hardware must appear together".into())),
        };
        Ok(Self {
            instance,
            model,
            embedding,
        })
    }

    pub fn spin_model(&self) -> Result<QuadraticModel> {
        match self.model.domain() {
            Domain::Spin => Ok(self.model.clone()),
            Domain::Binary => to_spin(&self.model),
        }
    }

    pub fn embedded(&self) -> Result<Option<EmbeddedModel>> {
        match &self.embedding {
            Some((emb, hw)) => Ok(Some(embed_model(&self.spin_model()?, emb, hw)?)),
            None => Ok(None),
        }
    }

    /// The model the samplers see: hardware model when embedded, else the
    /// logical Ising model.
    pub fn target_model(&self) -> Result<QuadraticModel> {
        Ok(match self.embedded()? {
            Some(em) => em.model,
            None => self.spin_model()?,
        })
    }

    fn to_json(&self, extra: Option<(&EmbeddedModel, Option<Value>)>) -> Value {
        let mut v = json!({ "model": self.model.to_json() });
        if let Some(inst) = &self.instance {
            v["instance"] = serde_json::to_value(inst).expect("instance serializes");
        }
        if let Some((emb, hw)) = &self.embedding {
            v["embedding"] = emb.to_json();
            v["hardware"] = serde_json::to_value(hw.to_file()).expect("hardware serializes");
        }
        if let Some((em, trace)) = extra {
            v["embedded_model"] = em.model.to_json();
            v["qubits"] = json!(em.qubits);
            if let Some(t) = trace {
                v["lambda_trace"] = t;
            }
        }
        v
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn load_hardware(path: Option<&Path>) -> Result<HardwareGraph> {
    match path {
        Some(p) => {
            let file: HardwareFile = serde_json::from_str(&fs::read_to_string(p)?)?;
            HardwareGraph::from_file(&file)
        }
        None => Ok(HardwareGraph::default_chip()),
    }
}

fn cmd_compile(a: &CompileArgs, out: &mut dyn Write) -> Result<()> {
    let inst = a.inst.instance()?;
    if a.fix_first && (inst.clique_order, inst.independent_order) != (3, 3) {
        return Err(Error::domain("--fix-first is only valid for R(3,3)"));
    }
    let cfg = PenaltyConfig::new(coef_from_f64(a.mu)?)?;
    let mut model = build_ramsey_model(&inst, &cfg, a.fix_first)?;
    if a.spin {
        model = to_spin(&model)?;
    }
    let problem = Problem {
        instance: Some(inst),
        model,
        embedding: None,
    };
    write_json(&a.output, &problem.to_json(None))?;
    let m = &problem.model;
    writeln!(
        out,
        "compiled R({},{}) N={}: {} variables, {} couplings, {} ancilla constraints -> {}",
        inst.clique_order,
        inst.independent_order,
        inst.n_vertices,
        m.num_vars(),
        m.quadratic().len(),
        m.products().len(),
        a.output.display()
    )?;
    Ok(())
}

fn cmd_embed(a: &EmbedArgs, out: &mut dyn Write) -> Result<()> {
    let mut problem = Problem::load(&a.input)?;
    if problem.embedding.is_some() {
        return Err(Error::domain("input is already embedded"));
    }
    let hw = load_hardware(a.hardware.as_deref())?;
    let spin = problem.spin_model()?;
    let emb = find_embedding(&spin, &hw, a.seed)?;
    let (embedded, trace) = if a.tune {
        let sched = a.sa.schedule()?;
        let (reads, seed) = (a.tune_reads.max(1), a.seed);
        let t = tune_lambda(
            &spin,
            &emb,
            &hw,
            |em| simulated_anneal(&em.model, &sched, reads, seed),
            &LambdaSweep::default(),
        )?;
        for p in &t.trace {
            writeln!(out, "lambda {:>6.2}  F = {:.4}", p.lambda, p.feasible_fraction)?;
        }
        (t.embedded, Some(serde_json::to_value(&t.trace)?))
    } else {
        (
            embed_model(&spin, &emb.with_lambda(coef_from_f64(a.lambda)?), &hw)?,
            None,
        )
    };
    problem.embedding = Some((embedded.embedding.clone(), hw));
    write_json(&a.output, &problem.to_json(Some((&embedded, trace))))?;
    writeln!(
        out,
        "embedded {} variables on {} qubits (longest chain {}), lambda = {} -> {}",
        spin.num_vars(),
        embedded.qubits.len(),
        embedded.embedding.max_chain_length(),
        embedded.embedding.lambda.to_f64().unwrap_or(f64::NAN),
        a.output.display()
    )?;
    Ok(())
}

fn summary_path(output: &Path) -> PathBuf {
    let mut p = output.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let problem = Problem::load(&a.input)?;
    let model = problem.target_model()?;
    let mut summary = json!({
        "input": a.input.display().to_string(),
        "num_vars": model.num_vars(),
        "reads": a.reads,
        "seed": a.seed,
    });
    let set = if a.qa {
        if model.num_vars() > MAX_QUBITS {
            return Err(Error::domain(format!(
                "{} variables exceed the statevector cap of {MAX_QUBITS}; use --sa",
                model.num_vars()
            )));
        }
        let sched = match &a.schedule_file {
            Some(p) => AnnealSchedule::from_file(a.tf, p)?,
            None => AnnealSchedule::linear(a.tf)?,
        };
        let steps = match a.steps {
            Some(s) => s,
            None => recommended_steps(&model, &sched)?,
        };
        let state = evolve(&model, &sched, steps)?;
        let dist = measure_energies(&state, &model)?;
        summary["sampler"] = json!("qa-statevector");
        summary["tf"] = json!(a.tf);
        summary["steps"] = json!(steps);
        summary["norm"] = json!(state.norm());
        summary["energy_distribution"] = dist
            .levels
            .iter()
            .map(|(e, p)| json!({ "energy": e.to_f64(), "probability": p }))
            .collect();
        if let Some((e, p)) = dist.lowest_level() {
            writeln!(out, "P(E = {}) = {:.6} after t_f = {} ({} steps)", e, p, a.tf, steps)?;
        }
        sample_state(&state, &model, a.reads, a.seed)?
    } else {
        let sched = a.schedule.schedule()?;
        summary["sampler"] = json!("sa");
        summary["schedule"] = serde_json::to_value(sched)?;
        simulated_anneal(&model, &sched, a.reads, a.seed)?
    };
    summary["model_hash"] = json!(set.metadata.model_hash);
    summary["min_energy"] = json!(set.min_energy());
    summary["distinct"] = json!(set.samples.len());
    let file = fs::File::create(&a.output)?;
    set.write_csv(std::io::BufWriter::new(file))?;
    write_json(&summary_path(&a.output), &summary)?;
    writeln!(
        out,
        "{} reads, {} distinct, lowest energy {} (seed {}) -> {}",
        set.total_reads(),
        set.samples.len(),
        set.min_energy().map_or("n/a".into(), |e| e.to_string()),
        a.seed,
        a.output.display()
    )?;
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let problem = Problem::load(&a.input)?;
    let samples = SampleSet::read_csv(fs::File::open(&a.samples)?)?;
    if samples.is_empty() {
        return Err(Error::domain("sample file is empty"));
    }
    let embedded = problem.embedded()?;
    let spin = problem.spin_model()?;
    let width = embedded.as_ref().map_or(spin.num_vars(), |em| em.qubits.len());
    if samples.samples.iter().any(|s| s.spins.len() != width) {
        return Err(Error::domain(format!(
            "samples do not match the {width}-variable model"
        )));
    }
    let hists = histogram(&samples, embedded.as_ref());
    if embedded.is_some() {
        writeln!(out, "hardware energies ({} reads)", hists.hardware.total_reads)?;
        write!(out, "{}", hists.hardware.render(40))?;
    }
    writeln!(
        out,
        "logical energies ({} of {} reads feasible)",
        hists.logical.feasible_reads, hists.logical.total_reads
    )?;
    write!(out, "{}", hists.logical.render(40))?;

    let mut results = None;
    if let Some(inst) = problem.instance {
        let reads = samples.samples.iter().map(|s| {
            let x = match &embedded {
                Some(em) => em.unembed(&s.spins),
                None => Some(s.spins.clone()),
            };
            (x, s.multiplicity)
        });
        let est = estimate_from_reads(&inst, &spin, reads, 1)?;
        let reference = if a.oracle {
            Some(exhaustive_ground(&inst)?.e_gs as f64)
        } else {
            a.ground
        };
        let e_gs = est.e_min.map(|e| e as f64);
        match (e_gs, est.degeneracy) {
            (Some(e), Some(d)) => writeln!(out, "E_gs = {e}  D = {d}")?,
            _ => writeln!(out, "no feasible reads")?,
        }
        if let Some(r) = reference {
            writeln!(out, "reference ground energy {r}")?;
        }
        let target = reference.or(e_gs);
        let success = match target {
            Some(t) => {
                let hits: u64 = samples
                    .samples
                    .iter()
                    .filter_map(|s| {
                        let x = match &embedded {
                            Some(em) => em.unembed(&s.spins)?,
                            None => s.spins.clone(),
                        };
                        let g = spin
                            .products_satisfied(&x)
                            .then(|| spin.graph_of(&x))
                            .transpose()
                            .ok()??;
                        (ramsey_energy(&g, &inst).ok()? as f64 == t).then_some(s.multiplicity)
                    })
                    .sum();
                Some(hits as f64 / samples.total_reads() as f64)
            }
            None => None,
        };
        writeln!(
            out,
            "feasible fraction {:.4}  success probability {}",
            est.feasible_fraction.unwrap_or(0.0),
            success.map_or("n/a".into(), |p| format!("{p:.4}"))
        )?;
        let mut r = ResultsFile::from_histogram(inst, &a.source, &hists.logical, target, None);
        r.degeneracy = est.degeneracy;
        r.feasible_fraction = est.feasible_fraction;
        r.success_probability = success;
        results = Some(r);
    }
    if a.fit {
        let configs = configuration_counts(&samples);
        match boltzmann_fit(&configs) {
            Ok(f) if f.infinite_temperature => writeln!(out, "Boltzmann fit: infinite temperature")?,
            Ok(f) => writeln!(
                out,
                "Boltzmann fit: T_e = {:.6}  log-likelihood {:.4}",
                f.temperature, f.log_likelihood
            )?,
            Err(e) => writeln!(out, "Boltzmann fit unavailable: {e}")?,
        }
        let levels = equal_energy_dispersion(&configs);
        if let Some(r) = max_dispersion(&levels) {
            writeln!(out, "largest same-energy probability ratio {r:.3}")?;
        }
    }
    if let Some(p) = &a.histogram_csv {
        hists.logical.write_csv(fs::File::create(p)?)?;
    }
    if let Some(p) = &a.results {
        let r = results.ok_or_else(|| Error::domain("results file needs a problem file with an instance"))?;
        write_json(p, &serde_json::to_value(&r)?)?;
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<()> {
    let inst = a.inst.instance()?;
    let g = exhaustive_ground(&inst)?;
    writeln!(
        out,
        "R({},{}) N={}: E_gs = {}  D = {}",
        inst.clique_order, inst.independent_order, inst.n_vertices, g.e_gs, g.degeneracy
    )?;
    if a.list {
        for m in &g.minimizers {
            writeln!(out, "{}", m.bit_string())?;
        }
    }
    if let Some(p) = &a.results {
        write_json(p, &serde_json::to_value(ResultsFile::from_oracle(&g))?)?;
    }
    Ok(())
}

fn default_n_start(m: usize, n: usize) -> usize {
    if (m, n) == (3, 3) {
        4
    } else {
        m.max(n).saturating_sub(1).max(2)
    }
}

fn cmd_protocol(a: &ProtocolArgs, out: &mut dyn Write) -> Result<()> {
    if a.m.max(a.n) > MAX_PROTOCOL_VERTICES {
        return Err(Error::domain(format!(
            "orders above {MAX_PROTOCOL_VERTICES} need N beyond the enumeration cap"
        )));
    }
    let n_start = a.n_start.unwrap_or_else(|| default_n_start(a.m, a.n));
    let sched = a.schedule.schedule()?;
    let mut solver: Box<dyn RamseySolver> = match a.solver {
        SolverKind::Oracle => Box::new(OracleSolver),
        SolverKind::Sa => Box::new(SaSolver {
            schedule: sched,
            reads: a.reads,
            repetitions: a.repetitions,
            seed: a.seed,
        }),
        SolverKind::Qa => Box::new(QaSolver {
            schedule: AnnealSchedule::linear(a.tf)?,
            steps: None,
            reads: a.reads,
            seed: a.seed,
        }),
        SolverKind::SaEmbedded => Box::new(EmbeddedSaSolver {
            hardware: load_hardware(a.hardware.as_deref())?,
            schedule: sched,
            reads: a.reads,
            repetitions: a.repetitions,
            seed: a.seed,
            lambda: a.lambda.map(coef_from_f64).transpose()?,
            tune_reads: 1000,
        }),
    };
    let report = ramsey_protocol(a.m, a.n, solver.as_mut(), n_start)?;
    write!(out, "{}", render_protocol(&report))?;
    if let Some(p) = &a.json {
        write_json(p, &serde_json::to_value(&report)?)?;
    }
    Ok(())
}

/// Table with one row per `N`, in the layout of the usual results table.
pub fn render_protocol(r: &ProtocolReport) -> String {
    let mut s = format!("R({},{}) protocol, solver {}\n", r.m, r.n, r.solver);
    s.push_str(&format!(
        "{:>3} {:>6} {:>8} {:>10} {:>10}\n",
        "N", "E_min", "D", "P(E_min)", "F"
    ));
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    for row in &r.rows {
        let e = &row.estimate;
        s.push_str(&format!(
            "{:>3} {:>6} {:>8} {:>10} {:>10}\n",
            row.n_vertices,
            e.e_min.map_or("-".into(), |v| v.to_string()),
            e.degeneracy.map_or("-".into(), |v| v.to_string()),
            opt(e.success_probability),
            opt(e.feasible_fraction),
        ));
    }
    for w in &r.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    match r.ramsey_number {
        Some(v) => s.push_str(&format!("R({},{}) = {v}\n", r.m, r.n)),
        None => s.push_str("R not determined\n"),
    }
    s
}

fn cmd_energy(a: &EnergyArgs, out: &mut dyn Write) -> Result<()> {
    let bits: Vec<u8> = a
        .bits
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!("bad bit {other:?}"))),
        })
        .collect::<Result<_>>()?;
    let n = (2..=crate::graph::MAX_VERTICES)
        .find(|&n| edge_count(n) == bits.len())
        .ok_or_else(|| Error::domain(format!("{} bits is not a triangular number of edges", bits.len())))?;
    let g = GraphBits::from_bits(n, &bits)?;
    let inst = RamseyInstance::new(n, a.m, a.n)?;
    writeln!(out, "{}", ramsey_energy(&g, &inst)?)?;
    Ok(())
}

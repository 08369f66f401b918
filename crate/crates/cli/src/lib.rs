//! File formats, output rendering and commands of the `ssc` tool.

pub mod error;
pub mod formats;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssc_core::accuracy::accuracy_breakdown;
use ssc_core::computation::computation_cost;
use ssc_core::corpus::build_example_by_name;
use ssc_core::measures::{compression_complexity, info_flow, ComplexityMode, InfoFlowMeasure};
use ssc_core::model::{validate_system, validate_triple, Object, Violation};
use ssc_core::montecarlo::{
    estimate_cost, sample_paths_range, CostOptions, Estimator, PathSet, SampleConfig, CHECK_ABS_TOL,
};
use ssc_core::optimize::{optimize, pareto_sweep, InduceOptions, RefDist, RhoMode};
use ssc_core::{
    AccuracyKind, CompCostKind, CompCostModel, CompressionTriple, Objective, ObjectiveConfig, OptimizationResult,
    OptimizerConfig, SearchMethod, ValidationReport,
};

pub use error::CliError;
use formats::{LoadedSystem, ParseError, SystemFile};
use output::{float, render, Json, Obj, Table};

#[derive(Debug, Parser)]
#[command(name = "ssc", version, about = "Evaluate and optimize state space compressions of finite Markov chains")]
pub struct Cli {
    /// Output format for results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a system file (and optionally a triple file) for invalid entries.
    Validate {
        system: PathBuf,
        #[arg(long)]
        triple: Option<PathBuf>,
    },
    /// Evaluate the objective of one triple.
    Eval {
        system: PathBuf,
        triple: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
    },
    /// Search induced triples of hard partitions for the smallest objective.
    Optimize {
        system: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Compression complexity: best objective relative to the identity compression.
    Complexity {
        system: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Report the best objective itself instead of the ratio.
        #[arg(long)]
        unnormalized: bool,
    },
    /// Information flow from the compressed model to the observable.
    Infoflow {
        system: PathBuf,
        triple: PathBuf,
        #[arg(long, value_enum, default_value_t = MeasureArg::CondEnt)]
        measure: MeasureArg,
        /// Lag between prediction and observation (cond-ent only).
        #[arg(long, default_value_t = 1)]
        lag: usize,
    },
    /// Optimize once per accuracy weight and mark the Pareto front.
    Pareto {
        system: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Comma-separated accuracy weights; the computation weight is fixed at 1.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Also write the non-dominated (computation, accuracy) pairs to this CSV file.
        #[arg(long)]
        front_csv: Option<PathBuf>,
    },
    /// Write a corpus example as system and triple files.
    Example {
        /// SWAP2, IID4, LUMP4, CYL or RING8.
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare a sampled accuracy cost with the exact value.
    McCheck {
        system: PathBuf,
        triple: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Plugin)]
        estimator: EstimatorArg,
        /// Sampling threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AccArg {
    Expected,
    ExpectedWorst,
    AvgMi,
    MiOfAvg,
    CondEnt,
    Kl,
}

impl From<AccArg> for AccuracyKind {
    fn from(a: AccArg) -> Self {
        match a {
            AccArg::Expected => AccuracyKind::Expected,
            AccArg::ExpectedWorst => AccuracyKind::ExpectedWorstCase,
            AccArg::AvgMi => AccuracyKind::AvgMi,
            AccArg::MiOfAvg => AccuracyKind::MiOfAvg,
            AccArg::CondEnt => AccuracyKind::CondEntropy,
            AccArg::Kl => AccuracyKind::Kl,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CompArg {
    Cardinality,
    Sparsity,
    InitEntropy,
}

impl From<CompArg> for CompCostKind {
    fn from(c: CompArg) -> Self {
        match c {
            CompArg::Cardinality => CompCostKind::Cardinality,
            CompArg::Sparsity => CompCostKind::Sparsity,
            CompArg::InitEntropy => CompCostKind::InitEntropyPlusSparsity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exhaustive,
    Anneal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RefDistArg {
    WAveragedOccupancy,
    Stationary,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RhoModeArg {
    Bayes,
    ArgminCost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    CondEnt,
    Mi,
    MiOfAvg,
    CondEntOfAvg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Plugin,
    MillerMadow,
}

#[derive(Clone, Copy, Debug, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum, default_value_t = AccArg::CondEnt)]
    pub acc: AccArg,
    #[arg(long, value_enum, default_value_t = CompArg::Cardinality)]
    pub comp: CompArg,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Add this mass to every cell before taking KL divergences.
    #[arg(long, default_value_t = 0.0)]
    pub kl_smoothing: f64,
    /// Report the KL accuracy cost with a minus sign.
    #[arg(long)]
    pub kl_negate: bool,
}

impl ObjectiveArgs {
    fn config(&self) -> Result<ObjectiveConfig, CliError> {
        let cfg = ObjectiveConfig {
            kl_smoothing: self.kl_smoothing,
            kl_negate: self.kl_negate,
            ..ObjectiveConfig::new(self.acc.into(), self.kappa, self.alpha)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn model(&self) -> CompCostModel {
        CompCostModel::new(self.comp.into())
    }
}

#[derive(Clone, Copy, Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
    pub method: MethodArg,
    /// Largest number of blocks; defaults to the number of states.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Annealing iterations.
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Initial annealing temperature.
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.995)]
    pub cooling: f64,
    #[arg(long, value_enum, default_value_t = RefDistArg::WAveragedOccupancy)]
    pub ref_dist: RefDistArg,
    #[arg(long, value_enum, default_value_t = RhoModeArg::Bayes)]
    pub rho_mode: RhoModeArg,
}

impl SearchArgs {
    fn config(&self, n: usize) -> Result<OptimizerConfig, CliError> {
        let method = match self.method {
            MethodArg::Exhaustive => SearchMethod::Exhaustive,
            MethodArg::Anneal => SearchMethod::Anneal,
        };
        let mut opt = OptimizerConfig::new(method, self.k_max.unwrap_or(n));
        opt.seed = self.seed;
        opt.anneal_iters = self.iters;
        opt.t0 = self.t0;
        opt.cooling = self.cooling;
        opt.induce = InduceOptions {
            ref_dist: match self.ref_dist {
                RefDistArg::WAveragedOccupancy => RefDist::WAveragedOccupancy,
                RefDistArg::Stationary => RefDist::Stationary,
                RefDistArg::Uniform => RefDist::Uniform,
            },
            rho: match self.rho_mode {
                RhoModeArg::Bayes => RhoMode::Bayes,
                RhoModeArg::ArgminCost => RhoMode::ArgminCost,
            },
        };
        opt.validate(n)?;
        Ok(opt)
    }
}

/// What a command prints and how the process should exit.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

struct Report {
    json: Json,
    table: Table,
}

impl Report {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => render(&self.json),
            Format::Csv => self.table.render(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_error(path: &Path, error: ParseError) -> CliError {
    CliError::Parse {
        path: path.display().to_string(),
        error,
    }
}

fn load_system(path: &Path) -> Result<LoadedSystem, CliError> {
    let text = read(path)?;
    formats::parse_system(&text).map_err(|e| parse_error(path, e))?.load()
}

fn load_triple(path: &Path, loaded: &LoadedSystem) -> Result<CompressionTriple, CliError> {
    let text = read(path)?;
    formats::parse_triple(&text).map_err(|e| parse_error(path, e))?.load(loaded)
}

fn require_valid(report: ValidationReport) -> Result<(), CliError> {
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Invalid(report.violations.iter().map(|v| v.to_string()).collect()))
    }
}

/// System and weights, both checked.
fn load_checked(path: &Path) -> Result<(LoadedSystem, ssc_core::Weights), CliError> {
    let loaded = load_system(path)?;
    require_valid(validate_system(&loaded.system, &loaded.observable))?;
    let w = loaded.weights()?;
    Ok((loaded, w))
}

fn load_checked_triple(path: &Path, loaded: &LoadedSystem) -> Result<CompressionTriple, CliError> {
    let triple = load_triple(path, loaded)?;
    require_valid(validate_triple(&triple, &loaded.system, &loaded.observable))?;
    Ok(triple)
}

fn not_nan(what: &str, v: f64) -> Result<f64, CliError> {
    if v.is_nan() {
        Err(CliError::Numerical(format!("{what} is NaN")))
    } else {
        Ok(v)
    }
}

fn finite(what: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Numerical(format!("{what} is {}", float(v))))
    }
}

fn triple_json(t: &CompressionTriple) -> Json {
    Obj::new()
        .with("macrostates", t.k())
        .with("pi", t.pi())
        .with("phi", t.phi())
        .with("rho", t.rho())
        .build()
}

fn object_name(v: &Violation) -> Object {
    match v {
        Violation::Empty { object }
        | Violation::Dimension { object, .. }
        | Violation::NonFinite { object, .. }
        | Violation::Range { object, .. }
        | Violation::RowSum { object, .. } => *object,
    }
}

fn violation_json(v: &Violation) -> Json {
    let mut o = Obj::new().with("object", object_name(v).name());
    match v {
        Violation::NonFinite { row, col, .. } | Violation::Range { row, col, .. } => {
            o = o.with("row", *row).with("col", *col);
        }
        Violation::RowSum { row, sum, .. } => o = o.with("row", *row).with("sum", *sum),
        _ => {}
    }
    o.with("message", v.to_string()).build()
}

fn cmd_validate(system: &Path, triple: Option<&Path>, format: Format) -> Result<Outcome, CliError> {
    let mut table = Table::new(&["severity", "object", "message"]);
    let text = read(system)?;
    let file = match formats::parse_system(&text) {
        Ok(f) => f,
        Err(e) => {
            table.push(vec!["error".into(), "file".into(), e.message.clone()]);
            let json = Obj::new()
                .with("valid", false)
                .with(
                    "parse_error",
                    Obj::new()
                        .with("file", system.display().to_string())
                        .with("message", e.message)
                        .with("line", e.line)
                        .with("column", e.column)
                        .with("byte_offset", e.byte_offset)
                        .build(),
                )
                .build();
            return Ok(invalid(Report { json, table }, format));
        }
    };
    let mut errors: Vec<Json> = Vec::new();
    let mut violations: Vec<Json> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    match file.load() {
        Err(e) => errors.push(e.to_string().into()),
        Ok(loaded) => {
            let report = validate_system(&loaded.system, &loaded.observable);
            violations.extend(report.violations.iter().map(violation_json));
            warnings.extend(report.warnings.iter().map(|w| w.to_string()));
            if let Err(e) = loaded.weight.materialize() {
                errors.push(format!("weight: {e}").into());
            }
            if let Some(tp) = triple {
                match load_triple(tp, &loaded) {
                    Ok(t) if report.is_valid() => {
                        violations.extend(validate_triple(&t, &loaded.system, &loaded.observable).violations.iter().map(violation_json));
                    }
                    Ok(_) => {}
                    Err(e) => errors.push(e.to_string().into()),
                }
            }
        }
    }
    for e in &errors {
        if let Json::Str(s) = e {
            table.push(vec!["error".into(), "file".into(), s.clone()]);
        }
    }
    for v in &violations {
        if let Json::Obj(fields) = v {
            let get = |k: &str| match fields.iter().find(|(key, _)| key == k) {
                Some((_, Json::Str(s))) => s.clone(),
                _ => String::new(),
            };
            table.push(vec!["violation".into(), get("object"), get("message")]);
        }
    }
    for w in &warnings {
        table.push(vec!["warning".into(), "cost_matrix".into(), w.clone()]);
    }
    let valid = errors.is_empty() && violations.is_empty();
    let json = Obj::new()
        .with("valid", valid)
        .with("errors", Json::Arr(errors))
        .with("violations", Json::Arr(violations))
        .with("warnings", warnings)
        .build();
    let report = Report { json, table };
    Ok(if valid {
        Outcome {
            stdout: report.render(format),
            exit_code: 0,
        }
    } else {
        invalid(report, format)
    })
}

fn invalid(report: Report, format: Format) -> Outcome {
    Outcome {
        stdout: report.render(format),
        exit_code: 2,
    }
}

fn cmd_eval(system: &Path, triple: &Path, args: &ObjectiveArgs) -> Result<Report, CliError> {
    let (loaded, w) = load_checked(system)?;
    let triple = load_checked_triple(triple, &loaded)?;
    let cfg = args.config()?;
    let model = args.model();
    let breakdown = accuracy_breakdown(&loaded.system, &loaded.observable, &triple, &w, &cfg)?;
    let accuracy = breakdown.value;
    let computation = computation_cost(&model, &loaded.system, &triple, &w);
    let o = Objective::combine(cfg.kappa, cfg.alpha, computation, accuracy);
    not_nan("K", o.k)?;
    let mut table = Table::new(&["quantity", "t", "weight", "value"]);
    for (name, v) in [("K", o.k), ("accuracy", o.accuracy), ("computation", o.computation)] {
        table.push(vec![name.into(), String::new(), String::new(), float(v)]);
    }
    let per_time: Vec<Json> = breakdown
        .per_time
        .iter()
        .map(|p| {
            table.push(vec!["per_time".into(), p.t.to_string(), float(p.weight), float(p.value)]);
            Obj::new().with("t", p.t).with("weight", p.weight).with("value", p.value).build()
        })
        .collect();
    let json = Obj::new()
        .with("K", o.k)
        .with("accuracy", o.accuracy)
        .with("computation", o.computation)
        .with("accuracy_kind", cfg.accuracy.name())
        .with("computation_kind", model.kind.name())
        .with("kappa", cfg.kappa)
        .with("alpha", cfg.alpha)
        .with("per_time", Json::Arr(per_time))
        .build();
    Ok(Report { json, table })
}

fn partition_text(p: &ssc_core::Partition) -> String {
    p.assignment().iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ")
}

fn blocks_json(p: &ssc_core::Partition) -> Json {
    Json::Arr(p.blocks().into_iter().map(Json::from).collect())
}

fn result_fields(o: Obj, r: &OptimizationResult) -> Obj {
    o.with("K", r.k_value)
        .with("accuracy", r.accuracy_component)
        .with("computation", r.computation_component)
        .with("evaluations", r.evaluations)
        .with("partition", r.best_partition.assignment())
        .with("blocks", blocks_json(&r.best_partition))
}

fn cmd_optimize(system: &Path, args: &ObjectiveArgs, search: &SearchArgs) -> Result<Report, CliError> {
    let (loaded, w) = load_checked(system)?;
    let cfg = args.config()?;
    let opt = search.config(loaded.system.n())?;
    let r = optimize(&loaded.system, &loaded.observable, &w, &cfg, &args.model(), &opt)?;
    finite("best K", r.k_value)?;
    let mut table = Table::new(&["K", "accuracy", "computation", "evaluations", "partition"]);
    table.push(vec![
        float(r.k_value),
        float(r.accuracy_component),
        float(r.computation_component),
        r.evaluations.to_string(),
        partition_text(&r.best_partition),
    ]);
    let head = Obj::new()
        .with("method", if opt.method == SearchMethod::Exhaustive { "exhaustive" } else { "anneal" })
        .with("k_max", opt.k_max)
        .with("seed", opt.seed)
        .with("ref_dist", opt.induce.ref_dist.name())
        .with("accuracy_kind", cfg.accuracy.name())
        .with("computation_kind", args.model().kind.name())
        .with("kappa", cfg.kappa)
        .with("alpha", cfg.alpha);
    let json = result_fields(head, &r).with("triple", triple_json(&r.best_triple)).build();
    Ok(Report { json, table })
}

fn cmd_complexity(system: &Path, args: &ObjectiveArgs, search: &SearchArgs, unnormalized: bool) -> Result<Report, CliError> {
    let (loaded, w) = load_checked(system)?;
    let cfg = args.config()?;
    let opt = search.config(loaded.system.n())?;
    let mode = if unnormalized {
        ComplexityMode::Unnormalized
    } else {
        ComplexityMode::Normalized
    };
    let c = compression_complexity(&loaded.system, &loaded.observable, &w, &cfg, &args.model(), &opt, mode)?;
    finite("complexity", c.value)?;
    let mut table = Table::new(&["value", "min_K", "identity_K", "partition"]);
    table.push(vec![float(c.value), float(c.min_k), float(c.identity_k), partition_text(&c.best_partition)]);
    let json = Obj::new()
        .with("value", c.value)
        .with("normalized", !unnormalized)
        .with("min_K", c.min_k)
        .with("identity_K", c.identity_k)
        .with("partition", c.best_partition.assignment())
        .with("evaluations", c.evaluations)
        .with("class", "induced triples of hard partitions")
        .with("accuracy_kind", cfg.accuracy.name())
        .with("computation_kind", args.model().kind.name())
        .with("kappa", cfg.kappa)
        .with("alpha", cfg.alpha)
        .build();
    Ok(Report { json, table })
}

fn cmd_infoflow(system: &Path, triple: &Path, measure: MeasureArg, lag: usize) -> Result<Report, CliError> {
    let (loaded, w) = load_checked(system)?;
    let triple = load_checked_triple(triple, &loaded)?;
    let (name, m) = match measure {
        MeasureArg::CondEnt => ("cond-ent", InfoFlowMeasure::CondEntropy { lag }),
        MeasureArg::Mi => ("mi", InfoFlowMeasure::Mi),
        MeasureArg::MiOfAvg => ("mi-of-avg", InfoFlowMeasure::MiOfAvg),
        MeasureArg::CondEntOfAvg => ("cond-ent-of-avg", InfoFlowMeasure::CondEntropyOfAvg),
    };
    let value = finite("information flow", info_flow(&loaded.system, &loaded.observable, &triple, &w, m)?)?;
    let lag_json = match m {
        InfoFlowMeasure::CondEntropy { lag } => Json::from(lag),
        _ => Json::Null,
    };
    let mut table = Table::new(&["measure", "lag", "value"]);
    table.push(vec![
        name.into(),
        matches!(m, InfoFlowMeasure::CondEntropy { .. }).then(|| lag.to_string()).unwrap_or_default(),
        float(value),
    ]);
    let json = Obj::new().with("measure", name).with("lag", lag_json).with("value", value).build();
    Ok(Report { json, table })
}

fn front_table(points: &[ssc_core::optimize::ParetoPoint]) -> Table {
    let mut front: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.non_dominated)
        .map(|p| (p.result.computation_component, p.result.accuracy_component))
        .collect();
    front.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    front.dedup();
    let mut t = Table::new(&["computation", "accuracy"]);
    for (c, a) in front {
        t.push(vec![float(c), float(a)]);
    }
    t
}

fn cmd_pareto(
    system: &Path,
    args: &ObjectiveArgs,
    search: &SearchArgs,
    alphas: &[f64],
    front_csv: Option<&Path>,
) -> Result<Report, CliError> {
    let (loaded, w) = load_checked(system)?;
    if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(CliError::Config("alphas must be finite and nonnegative".into()));
    }
    let cfg = ObjectiveConfig {
        kappa: 1.0,
        ..args.config()?
    };
    let opt = search.config(loaded.system.n())?;
    let points = pareto_sweep(&loaded.system, &loaded.observable, &w, &cfg, &args.model(), alphas, &opt)?;
    let mut table = Table::new(&["alpha", "K", "computation", "accuracy", "blocks", "non_dominated", "partition"]);
    let mut json_points = Vec::new();
    for p in &points {
        let r = &p.result;
        not_nan("K", r.k_value)?;
        table.push(vec![
            float(p.alpha),
            float(r.k_value),
            float(r.computation_component),
            float(r.accuracy_component),
            r.best_partition.num_blocks().to_string(),
            p.non_dominated.to_string(),
            partition_text(&r.best_partition),
        ]);
        json_points.push(
            result_fields(Obj::new().with("alpha", p.alpha), r)
                .with("non_dominated", p.non_dominated)
                .build(),
        );
    }
    let front = front_table(&points);
    if let Some(path) = front_csv {
        fs::write(path, front.render()).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let front_json: Vec<Json> = front
        .rows
        .iter()
        .map(|r| Json::Arr(r.iter().map(|s| Json::Num(s.parse().unwrap_or(f64::NAN))).collect()))
        .collect();
    let json = Obj::new()
        .with("kappa", 1.0)
        .with("accuracy_kind", cfg.accuracy.name())
        .with("computation_kind", args.model().kind.name())
        .with("points", Json::Arr(json_points))
        .with("front", Json::Arr(front_json))
        .build();
    Ok(Report { json, table })
}

fn system_file_json(f: &SystemFile) -> Json {
    let rows = |m: &[Vec<f64>]| Json::Arr(m.iter().map(|r| Json::from(&r[..])).collect());
    let mut weight = Obj::new().with("kind", f.weight.kind.as_str());
    if let Some(g) = f.weight.gamma {
        weight = weight.with("gamma", g);
    }
    weight = weight.with("horizon", f.weight.horizon).with("include_t0", f.weight.include_t0);
    let mut o = Obj::new()
        .with("states", f.states)
        .with("transition", rows(&f.transition))
        .with("initial", &f.initial[..])
        .with(
            "observable",
            Obj::new()
                .with("space", f.observable.space)
                .with("channel", rows(&f.observable.channel))
                .build(),
        );
    if let Some(c) = &f.cost_matrix {
        o = o.with("cost_matrix", rows(c));
    }
    o.with("weight", weight.build()).build()
}

fn cmd_example(name: &str, out: &Path) -> Result<Report, CliError> {
    let ex = build_example_by_name(name)?;
    let stem = ex.name.as_str().to_ascii_lowercase();
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.display().to_string(),
        source,
    })?;
    let system_path = out.join(format!("{stem}.system.json"));
    let triple_path = out.join(format!("{stem}.triple.json"));
    let write = |path: &Path, json: &Json| {
        fs::write(path, render(json)).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write(
        &system_path,
        &system_file_json(&SystemFile::from_parts(&ex.system, &ex.observable, &ex.weight)),
    )?;
    let triple = ex
        .reference
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("{name} has no reference triple")))?;
    write(&triple_path, &triple_json(triple))?;
    let mut table = Table::new(&["example", "system", "triple"]);
    table.push(vec![
        ex.name.as_str().into(),
        system_path.display().to_string(),
        triple_path.display().to_string(),
    ]);
    let json = Obj::new()
        .with("example", ex.name.as_str())
        .with("system", system_path.display().to_string())
        .with("triple", triple_path.display().to_string())
        .build();
    Ok(Report { json, table })
}

/// Samples `cfg.n_paths` paths on `workers` threads; the result does not depend on `workers`.
pub fn sample_parallel(
    loaded: &LoadedSystem,
    triple: &CompressionTriple,
    cfg: &SampleConfig,
    workers: usize,
) -> Result<PathSet, CliError> {
    let workers = workers.clamp(1, cfg.n_paths.max(1));
    let chunk = cfg.n_paths.div_ceil(workers);
    let parts: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                let range = (i * chunk).min(cfg.n_paths)..((i + 1) * chunk).min(cfg.n_paths);
                s.spawn(move || sample_paths_range(&loaded.system, &loaded.observable, triple, cfg, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling thread panicked")).collect()
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(PathSet::concat(parts)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc_check(
    system: &Path,
    triple: &Path,
    args: &ObjectiveArgs,
    paths: usize,
    seed: u64,
    estimator: EstimatorArg,
    workers: Option<usize>,
) -> Result<Report, CliError> {
    let (loaded, w) = load_checked(system)?;
    let triple = load_checked_triple(triple, &loaded)?;
    let cfg = args.config()?;
    let exact = accuracy_breakdown(&loaded.system, &loaded.observable, &triple, &w, &cfg)?.value;
    let exact = not_nan("exact cost", exact)?;
    let sample = SampleConfig {
        n_paths: paths,
        horizon: w.horizon().max(1),
        seed,
        estimator: match estimator {
            EstimatorArg::Plugin => Estimator::Plugin,
            EstimatorArg::MillerMadow => Estimator::PluginMillerMadow,
        },
    };
    sample.validate()?;
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let set = sample_parallel(&loaded, &triple, &sample, workers)?;
    let est = estimate_cost(
        &set,
        &w,
        loaded.observable.cost_matrix(),
        CostOptions::from_objective(&cfg, sample.estimator),
    )?;
    not_nan("estimate", est.value)?;
    let pass = est.agrees_with(exact, CHECK_ABS_TOL);
    let mut table = Table::new(&["accuracy_kind", "exact", "estimate", "stderr", "pass"]);
    table.push(vec![
        cfg.accuracy.name().into(),
        float(exact),
        float(est.value),
        float(est.stderr),
        pass.to_string(),
    ]);
    let json = Obj::new()
        .with("accuracy_kind", cfg.accuracy.name())
        .with("exact", exact)
        .with("estimate", est.value)
        .with("stderr", est.stderr)
        .with("infinite", est.infinite)
        .with("paths", paths)
        .with("seed", seed)
        .with(
            "estimator",
            match estimator {
                EstimatorArg::Plugin => "plugin",
                EstimatorArg::MillerMadow => "miller-madow",
            },
        )
        .with("abs_tolerance", CHECK_ABS_TOL)
        .with("pass", pass)
        .build();
    Ok(Report { json, table })
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let report = match &cli.command {
        Command::Validate { system, triple } => return cmd_validate(system, triple.as_deref(), cli.format),
        Command::Eval {
            system,
            triple,
            objective,
        } => cmd_eval(system, triple, objective)?,
        Command::Optimize {
            system,
            objective,
            search,
        } => cmd_optimize(system, objective, search)?,
        Command::Complexity {
            system,
            objective,
            search,
            unnormalized,
        } => cmd_complexity(system, objective, search, *unnormalized)?,
        Command::Infoflow {
            system,
            triple,
            measure,
            lag,
        } => cmd_infoflow(system, triple, *measure, *lag)?,
        Command::Pareto {
            system,
            objective,
            search,
            alphas,
            front_csv,
        } => cmd_pareto(system, objective, search, alphas, front_csv.as_deref())?,
        Command::Example { name, out } => cmd_example(name, out)?,
        Command::McCheck {
            system,
            triple,
            objective,
            paths,
            seed,
            estimator,
            workers,
        } => cmd_mc_check(system, triple, objective, *paths, *seed, *estimator, *workers)?,
    };
    Ok(Outcome {
        stdout: report.render(cli.format),
        exit_code: 0,
    })
}

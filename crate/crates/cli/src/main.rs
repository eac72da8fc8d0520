use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coarse_op::lp_op::OperatorFile;
use coarse_op::pou::variation;
use coarse_op::{Exponent, MetricSpace, SpaceSpec};
use coarse_op_cli::config::{
    ApproxMethod, ExperimentConfig, ExperimentKind, OperatorSpec, PartitionMethod, PartitionSpec, StrategyKind, WeightSpec,
};
use coarse_op_cli::report::{write_outputs, Manifest, Row, Table};
use coarse_op_cli::{diagnostics, run, Failure};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "COARSE_OP_OUT";

#[derive(Parser)]
#[command(name = "coarse-op", version, about = "Finite-scale experiments with quasi-local operators on metric spaces")]
struct Cli {
    /// Experiment configuration (JSON); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: config `out`, then $COARSE_OP_OUT, then ./results).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parameter cells.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and validate metric spaces.
    Space {
        #[command(subcommand)]
        action: SpaceAction,
    },
    /// Generate operator files.
    Op {
        #[command(subcommand)]
        action: OpAction,
    },
    /// Build partitions of unity.
    Pou {
        #[command(subcommand)]
        action: PouAction,
    },
    /// Approximation curves, end-point certificates and the interior pipeline.
    Approx {
        #[command(subcommand)]
        action: ApproxAction,
    },
    /// Best localised vector over ball windows.
    Onl(OnlArgs),
    /// Localise the norm witness of a quasi-local operator.
    Qlocalise(QlArgs),
    /// Capture a mass fraction in well-separated components.
    Sparsify(SparsifyArgs),
    /// Quasi-locality of `(Id − δa)⁻¹`.
    Inverse(InverseArgs),
    /// Run the experiment described by --config.
    Sweep,
    /// Check a configuration without running it.
    Validate,
}

#[derive(Subcommand)]
enum SpaceAction {
    Gen {
        /// JSON file, inline JSON, or `path:N`, `cycle:N`, `grid:DxS`, `tree:BxD`.
        #[arg(long)]
        spec: String,
        /// Destination file (stdout when absent).
        #[arg(long = "file")]
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpKind {
    Band,
    Diagonal,
    Shift,
    SymmetricShift,
}

#[derive(Subcommand)]
enum OpAction {
    Gen {
        #[arg(long)]
        space: String,
        #[arg(long, value_enum, default_value = "band")]
        kind: OpKind,
        #[arg(long, default_value = "2")]
        p: Exponent,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 1.0)]
        magnitude: f64,
        /// Rescale to unit norm.
        #[arg(long)]
        normalize: bool,
        /// Replace the operator by its Neumann series with this ratio.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "file")]
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PouMethodArg {
    Disjoint,
    Bump,
    Folner,
}

#[derive(Subcommand)]
enum PouAction {
    Build {
        #[arg(long)]
        space: String,
        #[arg(long, value_enum)]
        method: PouMethodArg,
        /// Cover radius (disjoint, bump) or box side (folner).
        #[arg(long = "scale", alias = "r", alias = "S")]
        scale: f64,
        #[arg(long, default_value = "2")]
        p: Exponent,
        /// Radii at which to report the variation.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4")]
        r_grid: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Truncate,
    End,
    Mid,
    Certificate,
    Pipeline,
}

#[derive(Args)]
struct OperatorArgs {
    /// Operator file (JSON).
    #[arg(long = "op")]
    op: Option<PathBuf>,
    /// Exponents to evaluate the operator at.
    #[arg(long, value_delimiter = ',')]
    p: Vec<Exponent>,
}

#[derive(Subcommand)]
enum ApproxAction {
    Band {
        #[command(flatten)]
        operator: OperatorArgs,
        #[arg(long, value_enum, value_delimiter = ',')]
        method: Vec<MethodArg>,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Cover radii or box sides of the partition ladder.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
        #[arg(long = "L", value_delimiter = ',')]
        lipschitz: Vec<f64>,
        #[arg(long, value_enum)]
        partition: Option<PouMethodArg>,
    },
}

#[derive(Args)]
struct OnlArgs {
    #[command(flatten)]
    operator: OperatorArgs,
    /// Window diameters.
    #[arg(long = "S", value_delimiter = ',')]
    windows: Vec<f64>,
}

#[derive(Args)]
struct QlArgs {
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long = "L", value_delimiter = ',')]
    lipschitz: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
}

#[derive(Args)]
struct SparsifyArgs {
    #[arg(long)]
    space: Option<String>,
    /// `uniform`, `random`, `atom:X`, or a JSON file of weights.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, value_delimiter = ',')]
    m: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    c: Vec<f64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Greedy diameter cap.
    #[arg(long)]
    diameter: Option<f64>,
    #[arg(long)]
    instances: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    GridShift,
    Greedy,
}

#[derive(Args)]
struct InverseArgs {
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long = "eps-grid", value_delimiter = ',')]
    eps_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
}

fn parse_space(arg: &str) -> anyhow::Result<SpaceSpec> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return serde_json::from_str(arg).context("inline space spec");
    }
    let dims = |s: &str| -> anyhow::Result<(usize, usize)> {
        let (a, b) = s.split_once('x').with_context(|| format!("expected AxB, got '{s}'"))?;
        Ok((a.parse()?, b.parse()?))
    };
    if let Some((kind, rest)) = arg.split_once(':') {
        return Ok(match kind {
            "path" => SpaceSpec::Path { n: rest.parse()? },
            "cycle" => SpaceSpec::Cycle { n: rest.parse()? },
            "grid" => {
                let (dim, side) = dims(rest)?;
                SpaceSpec::Grid { dim, side }
            }
            "tree" => {
                let (branching, depth) = dims(rest)?;
                SpaceSpec::Tree { branching, depth }
            }
            _ => bail!("unknown space shorthand '{kind}'"),
        });
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading space file {arg}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing space file {arg}"))
}

fn parse_weights(arg: &str) -> anyhow::Result<WeightSpec> {
    Ok(match arg {
        "uniform" => WeightSpec::Uniform,
        "random" => WeightSpec::Random,
        _ => match arg.strip_prefix("atom:") {
            Some(x) => WeightSpec::Atom(x.parse().context("atom point")?),
            None => WeightSpec::File(PathBuf::from(arg)),
        },
    })
}

fn method(m: MethodArg) -> ApproxMethod {
    match m {
        MethodArg::Truncate => ApproxMethod::Truncate,
        MethodArg::End => ApproxMethod::End,
        MethodArg::Mid => ApproxMethod::Mid,
        MethodArg::Certificate => ApproxMethod::Certificate,
        MethodArg::Pipeline => ApproxMethod::Pipeline,
    }
}

fn pou_method(m: PouMethodArg) -> PartitionMethod {
    match m {
        PouMethodArg::Disjoint => PartitionMethod::Disjoint,
        PouMethodArg::Bump => PartitionMethod::Bump,
        PouMethodArg::Folner => PartitionMethod::Folner,
    }
}

/// The configuration from --config, or a fresh one of `kind`.
fn base_config(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig, Failure> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(Failure::Config)?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.kind != kind {
        return Err(Failure::Config(vec![coarse_op_cli::Diagnostic {
            field: "kind".into(),
            message: format!("config describes a {} experiment, not {}", cfg.kind.as_str(), kind.as_str()),
        }]));
    }
    Ok(cfg)
}

fn apply_operator(cfg: &mut ExperimentConfig, args: &OperatorArgs) {
    if let Some(op) = &args.op {
        cfg.operator = Some(OperatorSpec::File { path: op.clone() });
    }
    if !args.p.is_empty() {
        cfg.grid.p = args.p.clone();
    }
}

fn set<T: Clone>(target: &mut Vec<T>, values: &[T]) {
    if !values.is_empty() {
        *target = values.to_vec();
    }
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

/// Runs an experiment and writes its reports; exit code 3 on failed checks.
fn execute(cli: &Cli, mut cfg: ExperimentConfig) -> anyhow::Result<ExitCode> {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let dir = out_dir(cli, &cfg);
    let start = Instant::now();
    let output = match run(&cfg, cli.jobs) {
        Ok(o) => o,
        Err(f) => return Ok(fail(&f)),
    };
    let manifest = Manifest {
        tool: "coarse-op",
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        jobs: cli.jobs,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        checks: &output.checks,
    };
    write_outputs(&dir, &output.tables, &manifest).with_context(|| format!("writing reports to {}", dir.display()))?;
    for t in &output.tables {
        println!("{}: {} rows -> {}", t.name, t.rows.len(), dir.join(format!("{}.csv", t.name)).display());
    }
    let failed = output.failed();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for c in failed {
            eprintln!("assertion failed: {}: {}", c.name, c.detail);
        }
        Ok(ExitCode::from(3))
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("error: {f}");
    ExitCode::from(f.exit_code() as u8)
}

fn write_json(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Space { action: SpaceAction::Gen { spec, file } } => {
            let spec = parse_space(spec)?;
            let space = match MetricSpace::build(&spec) {
                Ok(s) => s,
                Err(e) => return Ok(fail(&Failure::from(e))),
            };
            write_json(file.as_deref(), &serde_json::to_string(&spec)?)?;
            eprintln!("{} points, diameter {}", space.len(), space.diameter());
            Ok(ExitCode::SUCCESS)
        }
        Command::Op { action: OpAction::Gen { space, kind, p, k, radius, density, magnitude, normalize, lambda, file } } => {
            let spec = parse_space(space)?;
            let base = match kind {
                OpKind::Band => OperatorSpec::Band {
                    p: *p,
                    k: *k,
                    radius: *radius,
                    density: *density,
                    magnitude: *magnitude,
                    normalize: *normalize,
                },
                OpKind::Diagonal => OperatorSpec::Diagonal { p: *p, k: *k, values: None },
                OpKind::Shift => OperatorSpec::Shift { p: *p },
                OpKind::SymmetricShift => OperatorSpec::SymmetricShift { p: *p },
            };
            let op_spec = match lambda {
                Some(l) => OperatorSpec::Neumann { lambda: *l, tail_tol: 1e-13, base: Box::new(base) },
                None => base,
            };
            let built = MetricSpace::build(&spec)
                .map(Arc::new)
                .and_then(|s| op_spec.build(s, coarse_op_cli::seeds::derive(cli.seed.unwrap_or(0), "operator", 0)));
            let op = match built {
                Ok(op) => op,
                Err(e) => return Ok(fail(&Failure::from(e))),
            };
            write_json(Some(file), &OperatorFile::from_operator(&op).to_json()?)?;
            eprintln!("{} nonzero entries, propagation {}", op.nnz(), op.propagation());
            Ok(ExitCode::SUCCESS)
        }
        Command::Pou { action: PouAction::Build { space, method, scale, p, r_grid } } => {
            let spec = parse_space(space)?;
            let built = MetricSpace::build(&spec).and_then(|s| {
                let pou = match method {
                    PouMethodArg::Disjoint | PouMethodArg::Bump => {
                        let width = if matches!(method, PouMethodArg::Bump) { scale.max(1.0) } else { 1.0 };
                        coarse_op::pou::pou_from_cover(&s, &coarse_op::pou::disjoint_cover(&s, *scale), *p, width)?
                    }
                    PouMethodArg::Folner => coarse_op::pou::grid_folner_pou(&s, scale.max(1.0).round() as usize, *p)?,
                };
                Ok((s, pou))
            });
            let (space, pou) = match built {
                Ok(x) => x,
                Err(e) => return Ok(fail(&Failure::from(e))),
            };
            let dir = cli.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| "results".into());
            std::fs::create_dir_all(&dir)?;
            write_json(Some(&dir.join("partition.json")), &serde_json::to_string(&pou.to_file())?)?;
            let mut table = Table::new("variation");
            for &r in r_grid {
                table.push(
                    Row::new()
                        .param_text("method", format!("{:?}", pou_method(*method)).to_lowercase())
                        .param("scale", *scale)
                        .param_text("p", p.to_string())
                        .param("r", r)
                        .exact("variation", variation(&space, &pou, r)),
                );
            }
            table.write_csv(&dir.join("variation.csv"))?;
            eprintln!("{} functions, multiplicity {}, supports ≤ {}", pou.len(), pou.multiplicity(), pou.diameter_bound());
            Ok(ExitCode::SUCCESS)
        }
        Command::Approx { action: ApproxAction::Band { operator, method: methods, eps, scales, lipschitz, partition } } => {
            let mut cfg = match base_config(cli, ExperimentKind::Approx) {
                Ok(c) => c,
                Err(f) => return Ok(fail(&f)),
            };
            apply_operator(&mut cfg, operator);
            set(&mut cfg.methods, &methods.iter().map(|&m| method(m)).collect::<Vec<_>>());
            set(&mut cfg.grid.eps, eps);
            set(&mut cfg.grid.scales, scales);
            set(&mut cfg.grid.lipschitz, lipschitz);
            if let Some(m) = partition {
                let p = cfg.grid.p.first().copied().or(cfg.operator.as_ref().and_then(|o| o.exponent())).unwrap_or(Exponent::ONE);
                cfg.partition = Some(PartitionSpec { method: pou_method(*m), p });
            }
            execute(cli, cfg)
        }
        Command::Onl(args) => {
            let mut cfg = match base_config(cli, ExperimentKind::Onl) {
                Ok(c) => c,
                Err(f) => return Ok(fail(&f)),
            };
            apply_operator(&mut cfg, &args.operator);
            set(&mut cfg.grid.scales, &args.windows);
            execute(cli, cfg)
        }
        Command::Qlocalise(args) => {
            let mut cfg = match base_config(cli, ExperimentKind::Qlocalise) {
                Ok(c) => c,
                Err(f) => return Ok(fail(&f)),
            };
            apply_operator(&mut cfg, &args.operator);
            set(&mut cfg.grid.lipschitz, &args.lipschitz);
            set(&mut cfg.grid.eps, &args.eps);
            execute(cli, cfg)
        }
        Command::Sparsify(args) => {
            let mut cfg = match base_config(cli, ExperimentKind::Sparsify) {
                Ok(c) => c,
                Err(f) => return Ok(fail(&f)),
            };
            if let Some(s) = &args.space {
                cfg.space = Some(parse_space(s)?);
            }
            if let Some(w) = &args.weights {
                cfg.weights = parse_weights(w)?;
            }
            set(&mut cfg.grid.m, &args.m);
            set(&mut cfg.grid.c, &args.c);
            if let Some(s) = args.strategy {
                cfg.strategy = Some(match s {
                    StrategyArg::GridShift => StrategyKind::GridShift,
                    StrategyArg::Greedy => StrategyKind::Greedy,
                });
            }
            if let Some(d) = args.diameter {
                cfg.grid.scales = vec![d];
            }
            if let Some(n) = args.instances {
                cfg.instances = n;
            }
            execute(cli, cfg)
        }
        Command::Inverse(args) => {
            let mut cfg = match base_config(cli, ExperimentKind::Inverse) {
                Ok(c) => c,
                Err(f) => return Ok(fail(&f)),
            };
            apply_operator(&mut cfg, &args.operator);
            set(&mut cfg.grid.delta, &args.delta);
            set(&mut cfg.grid.eps, &args.eps_grid);
            set(&mut cfg.grid.radii, &args.radii);
            execute(cli, cfg)
        }
        Command::Sweep => {
            let Some(path) = &cli.config else {
                bail!("sweep needs --config");
            };
            match ExperimentConfig::load(path) {
                Ok(cfg) => execute(cli, cfg),
                Err(d) => Ok(fail(&Failure::Config(d))),
            }
        }
        Command::Validate => {
            let Some(path) = &cli.config else {
                bail!("validate needs --config");
            };
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let diags = diagnostics(&text);
            if diags.is_empty() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                for d in &diags {
                    println!("{d}");
                }
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

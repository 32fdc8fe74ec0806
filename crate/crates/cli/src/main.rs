use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use weyl_core::experiments::{
    self, CriterionExpectation, ExperimentConfig, ExperimentOutput, Grid, HeatCase, RatioTrend,
    Rxs1Params, TauberianParams, DEFAULT_DELTA,
};
use weyl_core::{GeometryModel, MonotoneMeasure};

/// Eigenvalue counting and Weyl-law experiments.
///
/// Tables go to stdout (or --output) as CSV; assertion lines
/// (`ASSERT PASS|FAIL name: detail`) and notes go to stderr. The exit code
/// is 0 iff every assertion passes, 1 if one fails and 2 on errors.
#[derive(Parser)]
#[command(name = "weyl-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// σ, Φ, a, d_δ, b_δ, K and c_δ on a λ grid.
    Invariants(ConfigArgs),
    /// Sublevel volume σ(λ) and Weyl integral Φ(λ).
    Phi(ConfigArgs),
    /// Dirichlet/Neumann-bracketed eigenvalue counts.
    Count(ConfigArgs),
    /// Counts against Φ, with the criterion verdict.
    WeylRatio(ConfigArgs),
    /// Quantitative Tauberian check for a pair of measures.
    Tauberian(TauberianArgs),
    /// Heat-kernel checks.
    HeatCheck {
        #[arg(value_parser = parse_heat_case)]
        case: HeatCase,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Built-in examples.
    Example {
        #[command(subcommand)]
        which: Example,
    },
}

#[derive(Subcommand)]
enum Example {
    /// V = c√ln|x| on ℝ and on ℝ×S¹.
    Rxs1 {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_parser = parse_grid)]
        quadrature_lambdas: Option<Grid>,
        #[arg(long, value_parser = parse_grid)]
        count_lambdas: Option<Grid>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// V = r^{1/2} on hyperbolic 3-space.
    H3Fail {
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Slowly growing potentials for which the criterion holds.
    Positive {
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Run δ ∈ {0.4, 0.2, 0.1} instead of a single δ.
        #[arg(long)]
        delta_sweep: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// V = x² (doubling) against V = ln|x|.
    Doubling {
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// A config file, individual keys, or both (flags override the file).
#[derive(Args)]
struct ConfigArgs {
    /// key = value experiment file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_geometry)]
    geometry: Option<GeometryModel>,
    #[arg(long)]
    potential: Option<String>,
    #[arg(long, value_parser = parse_grid)]
    lambdas: Option<Grid>,
    #[arg(long, value_parser = parse_grid)]
    criterion_lambdas: Option<Grid>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_sweep: bool,
    #[arg(long)]
    h_initial: Option<f64>,
    #[arg(long)]
    refinement_rounds: Option<usize>,
    #[arg(long, value_parser = parse_expect_criterion)]
    expect_criterion: Option<CriterionExpectation>,
    #[arg(long, value_parser = parse_expect_ratio)]
    expect_ratio: Option<RatioTrend>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TauberianArgs {
    /// Measure μ, e.g. `ho` or `lattice:1:2:1+atom:0.5:3`.
    #[arg(long, default_value = "ho", value_parser = parse_measure)]
    mu: MonotoneMeasure,
    /// Reference measure ν, e.g. `power:0.5:0:1` for ν(s) = s/2.
    #[arg(long, default_value = "power:0.5:0:1", value_parser = parse_measure)]
    nu: MonotoneMeasure,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 20.0)]
    s_min: f64,
    #[arg(long, default_value_t = 2000.0)]
    s_max: f64,
    #[arg(long, default_value_t = 400)]
    s_points: usize,
    /// Largest C₁ tried.
    #[arg(long, default_value_t = 1e3)]
    cap: f64,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: weyl_core::Error| e.to_string())
}

fn parse_geometry(s: &str) -> Result<GeometryModel, String> {
    s.parse().map_err(|e: weyl_core::Error| e.to_string())
}

fn parse_measure(s: &str) -> Result<MonotoneMeasure, String> {
    s.parse().map_err(|e: weyl_core::Error| e.to_string())
}

fn parse_heat_case(s: &str) -> Result<HeatCase, String> {
    s.parse().map_err(|e: weyl_core::Error| e.to_string())
}

fn parse_expect_criterion(s: &str) -> Result<CriterionExpectation, String> {
    s.parse().map_err(|e: weyl_core::Error| e.to_string())
}

fn parse_expect_ratio(s: &str) -> Result<RatioTrend, String> {
    s.parse().map_err(|e: weyl_core::Error| e.to_string())
}

impl ConfigArgs {
    fn load(self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)
                .with_context(|| format!("reading {}", path.display()))?,
            None => {
                let (Some(g), Some(v), Some(l)) = (
                    self.geometry,
                    self.potential.as_deref(),
                    self.lambdas.clone(),
                ) else {
                    bail!("give --config or all of --geometry, --potential and --lambdas");
                };
                ExperimentConfig::new(g, v, l)?
            }
        };
        if let Some(g) = self.geometry {
            cfg.geometry = g;
        }
        if let Some(v) = self.potential {
            cfg.potential = weyl_core::PotentialModel::parse(&v)?;
            cfg.potential_spec = v;
        }
        if let Some(l) = self.lambdas {
            cfg.lambdas = l;
        }
        if let Some(l) = self.criterion_lambdas {
            cfg.criterion_lambdas = Some(l);
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        cfg.delta_sweep |= self.delta_sweep;
        if let Some(h) = self.h_initial {
            cfg.mesh.h_initial = Some(h);
        }
        if let Some(r) = self.refinement_rounds {
            cfg.mesh.max_rounds = r;
        }
        if let Some(e) = self.expect_criterion {
            cfg.expect_criterion = Some(e);
        }
        if let Some(e) = self.expect_ratio {
            cfg.expect_ratio = Some(e);
        }
        if let Some(o) = self.out.output {
            cfg.output = Some(o);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: &ExperimentOutput, path: Option<&PathBuf>) -> anyhow::Result<bool> {
    match path {
        Some(p) => {
            let file =
                std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            out.table
                .write_csv(&out.config_hash, std::io::BufWriter::new(file))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            out.table.write_csv(&out.config_hash, &mut lock)?;
            lock.flush()?;
        }
    }
    let mut err = std::io::stderr().lock();
    for note in &out.notes {
        writeln!(err, "NOTE {note}")?;
    }
    for a in &out.assertions {
        writeln!(err, "{a}")?;
    }
    Ok(out.all_passed())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Invariants(args) => with_config(args, experiments::run_invariants),
        Command::Phi(args) => with_config(args, experiments::run_phi),
        Command::Count(args) => with_config(args, experiments::run_count),
        Command::WeylRatio(args) => with_config(args, experiments::run_weyl_ratio),
        Command::Tauberian(a) => {
            let p = TauberianParams {
                mu: a.mu,
                nu: a.nu,
                epsilon: a.epsilon,
                lambda1: a.lambda1,
                s_min: a.s_min,
                s_max: a.s_max,
                s_points: a.s_points,
                cap: a.cap,
            };
            emit(&experiments::run_tauberian(&p)?, a.out.output.as_ref())
        }
        Command::HeatCheck { case, out } => {
            emit(&experiments::run_heat_check(case)?, out.output.as_ref())
        }
        Command::Example { which } => match which {
            Example::Rxs1 {
                c,
                quadrature_lambdas,
                count_lambdas,
                out,
            } => {
                let mut p = Rxs1Params {
                    c,
                    ..Rxs1Params::default()
                };
                if let Some(g) = quadrature_lambdas {
                    p.quadrature_lambdas = g;
                }
                if let Some(g) = count_lambdas {
                    p.count_lambdas = g;
                }
                emit(
                    &experiments::run_counterexample_rxs1(&p)?,
                    out.output.as_ref(),
                )
            }
            Example::H3Fail { out } => emit(&experiments::run_h3_fail()?, out.output.as_ref()),
            Example::Positive {
                delta,
                delta_sweep,
                out,
            } => {
                if !delta_sweep {
                    return emit(
                        &experiments::run_positive_examples(delta)?,
                        out.output.as_ref(),
                    );
                }
                let mut merged: Option<ExperimentOutput> = None;
                for d in experiments::DELTA_SWEEP {
                    let mut o = experiments::run_positive_examples(d)?;
                    o.table.header.insert(0, "delta".into());
                    o.table
                        .rows
                        .iter_mut()
                        .for_each(|r| r.insert(0, d.to_string()));
                    o.assertions
                        .iter_mut()
                        .for_each(|a| a.name = format!("{} delta={d}", a.name));
                    match &mut merged {
                        None => merged = Some(o),
                        Some(m) => {
                            m.table.rows.extend(o.table.rows);
                            m.assertions.extend(o.assertions);
                        }
                    }
                }
                let mut m = merged.expect("sweep is non-empty");
                m.config_hash = experiments::config_hash("example=positive\ndelta_sweep=true");
                emit(&m, out.output.as_ref())
            }
            Example::Doubling { out } => {
                emit(&experiments::run_doubling_survey()?, out.output.as_ref())
            }
        },
    }
}

fn with_config(
    args: ConfigArgs,
    runner: fn(&ExperimentConfig) -> weyl_core::Result<ExperimentOutput>,
) -> anyhow::Result<bool> {
    let cfg = args.load()?;
    let out = runner(&cfg)?;
    emit(&out, cfg.output.as_ref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

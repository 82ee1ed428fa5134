//! The `dirnet` command line: file formats and subcommands.
//!
//! Exit codes: 0 success, 1 inconsistent certificate, 2 unreadable or
//! invalid input, 3 refused for budget or size, 4 internal corruption.

pub mod format;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use dirnet_core::analyzer::{certify_with, Certificate, Verdict};
use dirnet_core::gen::{self, FiniteKind};
use dirnet_core::reductions::{solve_med, Digraph};
use dirnet_core::solver::{brute_force_oracle, solve, Solution, SolveConfig, Variant};
use dirnet_core::{Error, Instance, Network, Space};

use format::{LoadedSolution, SolverFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_CORRUPTION: i32 = 4;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::TooLarge { .. } => EXIT_BUDGET,
        Error::Corruption(_) => EXIT_CORRUPTION,
        Error::UncoveredEdge { .. } => EXIT_INCONSISTENT,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirnet", version, about = "Shortest directed (A,B)-networks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// All-pairs unless the instance lists pairs.
    Auto,
    /// Every source must reach every sink; listed pairs are ignored.
    AllPairs,
    /// Only the instance's listed pairs.
    PointToPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenSpace {
    Euclidean,
    Rectilinear,
    Explicit,
    Graph,
    Digraph,
}

#[derive(Debug, clap::Args)]
struct Output {
    /// Write the resulting file here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    /// Largest number of Steiner points to search.
    #[arg(long)]
    max_steiner: Option<usize>,
    /// Convergence tolerance of the placement solver.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Starts per topology for continuous placement.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
    variant: VariantArg,
    #[arg(long)]
    parallel: bool,
    /// Seed of the random restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shortest network for an instance file.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Recompute and check the certificate of a solution file.
    Certify {
        solution: PathBuf,
        /// Remove redundant edges before analysing.
        #[arg(long)]
        prune: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Simplify the network of a solution file.
    Simplify {
        solution: PathBuf,
        /// Also remove redundant edges.
        #[arg(long)]
        prune: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Exhaustive shortest network on a small finite instance.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Minimum equivalent digraph of a strongly connected digraph file.
    ReduceMed {
        digraph: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Random instance or digraph from a seed.
    Gen {
        #[arg(long, value_enum, default_value_t = GenSpace::Euclidean)]
        space: GenSpace,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, default_value_t = 2)]
        m: usize,
        #[arg(short, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Points of a finite space, or vertices of a digraph.
        #[arg(long, default_value_t = 6)]
        points: usize,
        /// Arc probability for digraphs.
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// What a command produced: the text for standard output or the output
/// file, a summary line for standard error, and the exit code.
struct Outcome {
    artifact: String,
    summary: Option<String>,
    code: i32,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(out: &Output, artifact: String, text: impl FnOnce() -> String) -> Result<String, Error> {
    if let Some(path) = &out.output {
        fs::write(path, &artifact).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(match out.format {
            OutputFormat::Json => String::new(),
            OutputFormat::Text => text(),
        })
    } else {
        Ok(match out.format {
            OutputFormat::Json => artifact,
            OutputFormat::Text => text(),
        })
    }
}

impl SolveArgs {
    fn config(&self, instance: &Instance) -> Result<(SolveConfig, Instance), Error> {
        let instance = match self.variant {
            VariantArg::Auto => instance.clone(),
            VariantArg::AllPairs => instance.with_pairs(None)?,
            VariantArg::PointToPoint => {
                if instance.pairs().is_none() {
                    return Err(Error::InvalidInstance(
                        "pairs: required by --variant point-to-point".into(),
                    ));
                }
                instance.clone()
            }
        };
        let variant = match instance.pairs() {
            None => Variant::AllPairs,
            Some(p) => Variant::PointToPoint(p.to_vec()),
        };
        let config = SolveConfig {
            max_steiner: self.max_steiner,
            tolerance: self.tol,
            max_iterations: self.max_iter,
            restarts: self.restarts,
            variant,
            parallel: self.parallel,
            seed: self.seed,
            ..SolveConfig::default()
        };
        config.validate()?;
        Ok((config, instance))
    }
}

fn certificate_for(net: &Network, instance: &Instance) -> Result<Option<Certificate>, Error> {
    if instance.pairs().is_some() {
        return Ok(None);
    }
    certify_with(net, instance, false).map(Some)
}

fn solution_text(file: &format::SolutionFile, net: &Network) -> String {
    let mut s = String::new();
    writeln!(s, "length: {:.16e}", file.length).unwrap();
    writeln!(s, "steiner points: {}", net.steiner_count()).unwrap();
    writeln!(s, "edges:").unwrap();
    for (u, v) in net.edges() {
        writeln!(s, "  {u} -> {v}").unwrap();
    }
    if let Some(solver) = &file.solver {
        writeln!(s, "status: {:?}", solver.status).unwrap();
        writeln!(s, "topologies examined: {}", solver.topologies_examined).unwrap();
        writeln!(
            s,
            "steiner budget: {} searched, {} sufficient{}",
            solver.budget.max_steiner,
            solver.budget.theorem_bound,
            if solver.budget.binding {
                " (budget binding)"
            } else {
                ""
            }
        )
        .unwrap();
    }
    if let Some(c) = &file.certificate {
        writeln!(
            s,
            "certificate: {}",
            if c.is_consistent() {
                "consistent"
            } else {
                "inconsistent"
            }
        )
        .unwrap();
    }
    s
}

fn solved(
    instance: &Instance,
    solution: &Solution,
    config: &SolveConfig,
    out: &Output,
) -> Result<Outcome, Error> {
    let certificate = certificate_for(&solution.network, instance)?;
    let file = format::solution_file(
        instance,
        &solution.network,
        certificate,
        Some(SolverFile {
            topologies_examined: solution.topologies_examined,
            status: solution.status,
            converged: solution.converged,
            budget: solution.budget,
            config: config.clone(),
        }),
    );
    let artifact = format::to_canonical(&file);
    let summary = format!(
        "length {:.16e}, {} steiner points",
        file.length,
        solution.network.steiner_count()
    );
    let artifact = emit(out, artifact, || solution_text(&file, &solution.network))?;
    Ok(Outcome {
        artifact,
        summary: Some(summary),
        code: EXIT_OK,
    })
}

fn certificate_text(c: &Certificate) -> String {
    let mut s = String::new();
    let ok = |b: bool| if b { "ok" } else { "FAIL" };
    writeln!(
        s,
        "verdict: {}",
        if c.is_consistent() {
            "consistent"
        } else {
            "inconsistent"
        }
    )
    .unwrap();
    writeln!(s, "terminals: m = {}, n = {}", c.m, c.n).unwrap();
    writeln!(
        s,
        "longest path: {} vertices, bound {} {}",
        c.max_path_vertices,
        c.path_bound,
        ok(c.max_path_vertices <= c.path_bound)
    )
    .unwrap();
    writeln!(
        s,
        "jump cover: {} jumps, bound {} {}",
        c.cover_size,
        c.cover_bound,
        ok(c.cover_size <= c.cover_bound)
    )
    .unwrap();
    writeln!(
        s,
        "steiner points: {}, bound {} {}",
        c.steiner_count,
        c.steiner_bound,
        ok(c.steiner_count <= c.steiner_bound)
    )
    .unwrap();
    writeln!(s, "simple: {}", ok(c.simple)).unwrap();
    writeln!(
        s,
        "path vertices classified: {}",
        ok(c.path_vertices_classified)
    )
    .unwrap();
    writeln!(s, "distinct jump indices: {}", ok(c.distinct_indices)).unwrap();
    writeln!(s, "property 1: {}", ok(c.property1_ok)).unwrap();
    writeln!(s, "property 2: {}", ok(c.property2_ok)).unwrap();
    if let Verdict::Inconsistent(ws) = &c.verdict {
        for w in ws {
            writeln!(s, "witness: {}", serde_json::to_string(w).unwrap()).unwrap();
        }
    }
    s
}

fn load_solution(path: &Path) -> Result<LoadedSolution, Error> {
    format::parse_solution(&read(path)?)
}

fn run_command(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Solve {
            instance,
            solve: args,
            out,
        } => {
            let instance = format::parse_instance(&read(&instance)?)?;
            let (config, instance) = args.config(&instance)?;
            let solution = solve(&instance, &config)?;
            solved(&instance, &solution, &config, &out)
        }
        Command::Oracle { instance, out } => {
            let instance = format::parse_instance(&read(&instance)?)?;
            let solution = brute_force_oracle(&instance)?;
            solved(&instance, &solution, &SolveConfig::default(), &out)
        }
        Command::Certify {
            solution,
            prune,
            format: fmt,
        } => {
            let loaded = load_solution(&solution)?;
            let c = certify_with(&loaded.network, &loaded.instance, prune)?;
            let code = if c.is_consistent() {
                EXIT_OK
            } else {
                EXIT_INCONSISTENT
            };
            let artifact = match fmt {
                OutputFormat::Json => format::to_canonical(&c),
                OutputFormat::Text => certificate_text(&c),
            };
            let summary = match &c.verdict {
                Verdict::Consistent => "certificate consistent".to_string(),
                Verdict::Inconsistent(ws) => {
                    let mut s = String::from("certificate inconsistent");
                    for w in ws {
                        write!(s, "\nwitness: {}", serde_json::to_string(w).unwrap()).unwrap();
                    }
                    s
                }
            };
            Ok(Outcome {
                artifact,
                summary: Some(summary),
                code,
            })
        }
        Command::Simplify {
            solution,
            prune,
            out,
        } => {
            let loaded = load_solution(&solution)?;
            let net = if prune {
                loaded.network.simplify_and_prune()?
            } else {
                loaded.network.simplify()?
            };
            let certificate = certificate_for(&net, &loaded.instance).unwrap_or(None);
            let file = format::solution_file(&loaded.instance, &net, certificate, None);
            let summary = format!(
                "length {:.16e} -> {:.16e}, {} -> {} edges",
                loaded.file.length,
                file.length,
                loaded.network.edges().len(),
                net.edges().len()
            );
            let artifact = emit(&out, format::to_canonical(&file), || {
                solution_text(&file, &net)
            })?;
            Ok(Outcome {
                artifact,
                summary: Some(summary),
                code: EXIT_OK,
            })
        }
        Command::ReduceMed {
            digraph,
            solve: args,
            out,
        } => {
            let d = format::parse_digraph(&read(&digraph)?)?;
            let config = SolveConfig {
                max_steiner: args.max_steiner,
                tolerance: args.tol,
                max_iterations: args.max_iter,
                parallel: args.parallel,
                ..SolveConfig::default()
            };
            let arcs = solve_med(&d, &config)?;
            let weight = |u: usize, v: usize| {
                d.arcs
                    .iter()
                    .find(|a| (a.from, a.to) == (u, v))
                    .map_or(1.0, |a| a.weight)
            };
            let med = Digraph::new(
                d.vertices.clone(),
                arcs.iter()
                    .map(|&(from, to)| dirnet_core::metric::WeightedEdge {
                        from,
                        to,
                        weight: weight(from, to),
                    })
                    .collect(),
            )?;
            let summary = format!("{} of {} arcs kept", med.arcs.len(), d.arcs.len());
            let artifact = emit(&out, format::write_digraph(&med), || {
                let mut s = format!("arcs: {}\n", med.arcs.len());
                for a in &med.arcs {
                    writeln!(s, "  {} -> {}", med.vertices[a.from], med.vertices[a.to]).unwrap();
                }
                s
            })?;
            Ok(Outcome {
                artifact,
                summary: Some(summary),
                code: EXIT_OK,
            })
        }
        Command::Gen {
            space,
            seed,
            m,
            n,
            dim,
            points,
            density,
            output,
        } => {
            let artifact = match space {
                GenSpace::Euclidean => {
                    format::write_instance(&gen::euclidean_instance(seed, m, n, dim)?)
                }
                GenSpace::Rectilinear => {
                    let e = gen::euclidean_instance(seed, m, n, dim)?;
                    let r = Instance::new(
                        Space::rectilinear(dim)?,
                        e.sources().to_vec(),
                        e.sinks().to_vec(),
                        None,
                    )?;
                    format::write_instance(&r)
                }
                GenSpace::Explicit | GenSpace::Graph => {
                    if m + n > points {
                        return Err(Error::InvalidInstance(format!(
                            "{m} sources and {n} sinks do not fit on {points} points"
                        )));
                    }
                    let kind = if space == GenSpace::Explicit {
                        FiniteKind::Explicit
                    } else {
                        FiniteKind::Graph
                    };
                    format::write_instance(&gen::finite_instance(seed, points, m, n, kind)?)
                }
                GenSpace::Digraph => {
                    if !(density > 0.0 && density <= 1.0) {
                        return Err(Error::InvalidInstance("density must be in (0, 1]".into()));
                    }
                    format::write_digraph(&gen::strongly_connected_digraph(seed, points, density)?)
                }
            };
            let out = Output {
                output,
                format: OutputFormat::Json,
            };
            Ok(Outcome {
                artifact: emit(&out, artifact, String::new)?,
                summary: None,
                code: EXIT_OK,
            })
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.artifact);
            if let Some(s) = outcome.summary {
                eprintln!("{s}");
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

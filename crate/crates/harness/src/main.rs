use clap::{Parser, Subcommand, ValueEnum};
use robsub::io::{parse_cover, parse_functions, parse_graph};
use robsub::solvers::{solve_selected, SolveOptions};
use robsub::{Algorithm, Constraint, RobustInstance, RobustObjective};
use robsub_harness::config::parse_methods;
use robsub_harness::report::{fmt_f64, fmt_set};
use robsub_harness::{
    run_matching_experiment, run_synthetic, ConfigFile, HarnessError, Method, Result, Seeds, SyntheticConfig,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "robsub", version, about = "Robust submodular minimization experiments")]
struct Cli {
    /// Worker threads for seed and frame-pair fan-out (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Cardinality,
    Matching,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Tree,
    Matching,
    Path,
    Cut,
    VertexCover,
    EdgeCover,
}

#[derive(Subcommand)]
enum Command {
    /// Random instances over seeds, one CSV row per (seed, algorithm).
    Synthetic {
        /// TOML file with a [synthetic] table.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in configuration used when no --config is given.
        #[arg(long, value_enum, default_value = "cardinality")]
        preset: Preset,
        /// Run this seed only.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated algorithm names.
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
        /// Add the brute-force optimum (ground sets up to 16 elements).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append wall-clock runtimes (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Keypoint matching: modular vs single-clustering vs robust models.
    Matching {
        /// TOML file with a [matching] table.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Generate this synthetic sequence only.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
    },
    /// Solve one instance given as files.
    Solve {
        /// Function file.
        #[arg(long)]
        functions: PathBuf,
        /// Cardinality lower bound `|X| >= k`.
        #[arg(long, conflicts_with_all = ["graph", "cover"])]
        cardinality: Option<usize>,
        /// Graph file for graph constraints.
        #[arg(long, requires = "kind")]
        graph: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<GraphKind>,
        /// Set-cover file.
        #[arg(long, conflicts_with = "graph")]
        cover: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(HarnessError::io(path))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(HarnessError::io(path)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input_error(path: &Path) -> impl Fn(robsub::Error) -> HarnessError + '_ {
    move |e| match e {
        robsub::Error::Parse { line, msg } => HarnessError::Input {
            path: path.to_path_buf(),
            line,
            msg,
        },
        other => HarnessError::Config(format!("{}: {other}", path.display())),
    }
}

fn load_section<T>(config: Option<&Path>, pick: impl FnOnce(ConfigFile) -> Option<T>, name: &str) -> Result<Option<T>> {
    match config {
        None => Ok(None),
        Some(path) => pick(ConfigFile::load(path)?)
            .map(Some)
            .ok_or_else(|| HarnessError::Config(format!("{} has no [{name}] table", path.display()))),
    }
}

/// CSV of every successful run and the number of failed algorithms.
fn solve_files(
    functions: &Path,
    cardinality: Option<usize>,
    graph: Option<(&Path, GraphKind)>,
    cover: Option<&Path>,
    algorithms: Option<Vec<String>>,
) -> Result<(String, usize)> {
    let fs = parse_functions(&read(functions)?).map_err(input_error(functions))?;
    let n = fs[0].n();
    let constraint = match (cardinality, graph, cover) {
        (Some(k), None, None) => Constraint::cardinality_at_least(n, k),
        (None, Some((path, kind)), None) => {
            let g = parse_graph(&read(path)?).map_err(input_error(path))?;
            match kind {
                GraphKind::Tree => Constraint::spanning_tree(g),
                GraphKind::Matching => Constraint::perfect_matching(g),
                GraphKind::Path => Constraint::st_path(g),
                GraphKind::Cut => Constraint::st_cut(g),
                GraphKind::VertexCover => Constraint::vertex_cover(g),
                GraphKind::EdgeCover => Constraint::edge_cover(g),
            }
        }
        (None, None, Some(path)) => {
            let (universe, sets) = parse_cover(&read(path)?).map_err(input_error(path))?;
            Constraint::set_cover(universe, sets)
        }
        _ => {
            return Err(HarnessError::Config(
                "give exactly one of --cardinality, --graph, --cover".into(),
            ))
        }
    }
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let inst = RobustInstance::new(
        RobustObjective::new(fs).map_err(|e| HarnessError::Config(e.to_string()))?,
        constraint,
    )
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    let algorithms: Vec<Algorithm> = match algorithms {
        None => Algorithm::ALL.to_vec(),
        Some(names) => parse_methods(&names)?
            .into_iter()
            .map(|m| match m {
                Method::Solver(a) => Ok(a),
                other => Err(HarnessError::Config(format!(
                    "{} is only available in `synthetic`",
                    other.name()
                ))),
            })
            .collect::<Result<_>>()?,
    };
    let all = solve_selected(&inst, &algorithms, &SolveOptions::default());
    if all.reports.is_empty() {
        if let Some((_, e)) = all.failures.first() {
            return Err(HarnessError::Solver(e.clone()));
        }
    }
    let mut out = String::from("algorithm,value,iterations,set\n");
    for r in &all.reports {
        out += &format!(
            "{},{},{},{}\n",
            r.algorithm,
            fmt_f64(r.value),
            r.iterations,
            fmt_set(&r.set)
        );
    }
    for (a, e) in &all.failures {
        log::error!("{a}: {e}");
    }
    Ok((out, all.failures.len()))
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Synthetic {
            config,
            preset,
            seed,
            algorithms,
            oracle,
            out,
            timing,
        } => {
            let mut cfg =
                load_section(config.as_deref(), |c| c.synthetic, "synthetic")?.unwrap_or_else(|| match preset {
                    Preset::Cardinality => SyntheticConfig::cardinality_default(),
                    Preset::Matching => SyntheticConfig::matching_default(),
                });
            if let Some(s) = seed {
                cfg.seeds = Seeds::List(vec![s]);
            }
            if let Some(a) = algorithms {
                cfg.algorithms = a;
            }
            cfg.oracle |= oracle;
            let report = run_synthetic(&cfg)?;
            emit(out.as_deref(), &report.to_csv(timing))?;
            match report.failures() {
                0 => Ok(()),
                k => Err(HarnessError::Failed(k)),
            }
        }
        Command::Matching {
            config,
            seed,
            out,
            timing,
        } => {
            let mut cfg = load_section(config.as_deref(), |c| c.matching, "matching")?.unwrap_or_default();
            if let Some(s) = seed {
                cfg.seeds = Seeds::List(vec![s]);
            }
            let report = run_matching_experiment(&cfg)?;
            emit(out.as_deref(), &report.to_csv(timing))
        }
        Command::Solve {
            functions,
            cardinality,
            graph,
            kind,
            cover,
            algorithms,
        } => {
            let graph = graph.as_deref().zip(kind);
            let (text, failed) = solve_files(&functions, cardinality, graph, cover.as_deref(), algorithms)?;
            emit(None, &text)?;
            match failed {
                0 => Ok(()),
                k => Err(HarnessError::Failed(k)),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

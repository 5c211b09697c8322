use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use flowsentry_core::graph::{parse_network, FlowNetwork};
use flowsentry_core::harness::query::{answer, parse_query, Query};
use flowsentry_core::harness::verify::{verify, Profile};
use flowsentry_core::harness::{gen, GeneratorSpec};
use flowsentry_core::{Error, SensitivityOracle};

/// Max-flow and min-cut sensitivity oracles for unit-capacity directed
/// multigraphs.
#[derive(Parser, Debug)]
#[command(name = "flowsentry", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Random,
    Diamond,
    Bottleneck,
    Twopaths,
    Matrix,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertex count (random, twopaths).
    #[arg(long)]
    n: Option<usize>,
    /// Edge count (random).
    #[arg(long)]
    m: Option<usize>,
    /// Max-flow value (bottleneck).
    #[arg(long)]
    lambda: Option<u32>,
    /// Path pairs (matrix).
    #[arg(long)]
    r: Option<usize>,
    /// Path length (matrix).
    #[arg(long)]
    l: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated network in the text graph format.
    Gen(GenArgs),
    /// Build an oracle and write it to a file.
    Build {
        #[arg(short, long)]
        graph: PathBuf,
        /// Failure budget of the k-failure oracle; omitted means none.
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Answer a file of queries, one `<query> => <answer>` line each.
    Query {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(short, long)]
        queries: PathBuf,
        /// Use a prebuilt oracle instead of building one.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Compare oracle answers with brute force.
    Verify {
        #[arg(short, long)]
        graph: PathBuf,
        /// exhaustive-1, exhaustive-2, exhaustive-k(K,NCAP), sampled(COUNT[,SEED]), invariants
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn read_graph(path: &Path) -> anyhow::Result<FlowNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_network(&text).with_context(|| format!("parsing {}", path.display()))
}

fn need<T>(value: Option<T>, flag: &str, family: Family) -> anyhow::Result<T> {
    value.with_context(|| format!("--{flag} is required for family {family:?}"))
}

fn run_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let GenArgs {
        family,
        seed,
        n,
        m,
        lambda,
        r,
        l,
        output,
    } = args;
    let spec = match family {
        Family::Random => {
            let n = need(n, "n", family)?;
            GeneratorSpec::Random { n, m: m.unwrap_or(3 * n), seed }
        }
        Family::Diamond => GeneratorSpec::Diamond,
        Family::Bottleneck => GeneratorSpec::Bottleneck { lambda: need(lambda, "lambda", family)? },
        Family::Twopaths => GeneratorSpec::TwoPaths { n: need(n, "n", family)? },
        Family::Matrix => GeneratorSpec::Matrix {
            r: need(r, "r", family)?,
            l: need(l, "l", family)?,
            seed,
        },
    };
    let text = gen(&spec)?.to_text();
    match output {
        Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run_build(graph: &Path, k: Option<usize>, output: &Path) -> anyhow::Result<ExitCode> {
    let net = read_graph(graph)?;
    let oracle = SensitivityOracle::build(&net, k)?;
    let file = fs::File::create(output).with_context(|| format!("creating {}", output.display()))?;
    let mut w = BufWriter::new(file);
    oracle.write_to(&mut w)?;
    w.flush()?;
    eprintln!(
        "oracle for n = {}, m = {}, λ = {} written to {}",
        net.vertex_count(),
        net.edge_count(),
        oracle.lambda(),
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn check_range(q: &Query, m: usize) -> anyhow::Result<()> {
    let ids = match q {
        Query::Mf(e) | Query::Mfd(e) => vec![*e],
        Query::Mfx(a, b) | Query::Mf2(a, b) | Query::Mc2(a, b) => vec![*a, *b],
        Query::Mck(es) | Query::Mckp(es) | Query::Rq(es) => es.clone(),
    };
    if let Some(e) = ids.iter().find(|e| e.index() >= m) {
        bail!("edge {} out of range (graph has {m} edges)", e.0 + 1);
    }
    Ok(())
}

fn run_query(graph: &Path, k: Option<usize>, queries: &Path, oracle: Option<&Path>) -> anyhow::Result<ExitCode> {
    let net = read_graph(graph)?;
    let oracle = match oracle {
        Some(path) => {
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let o = SensitivityOracle::read_from(io::BufReader::new(file))?;
            if o.network() != &net {
                bail!("oracle {} was built for a different graph", path.display());
            }
            o
        }
        None => SensitivityOracle::build(&net, k)?,
    };
    let text = fs::read_to_string(queries).with_context(|| format!("reading {}", queries.display()))?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let q = parse_query(trimmed).with_context(|| format!("{}:{}", queries.display(), idx + 1))?;
        check_range(&q, net.edge_count()).with_context(|| format!("{}:{}", queries.display(), idx + 1))?;
        let a = answer(&oracle, &q).with_context(|| format!("{}:{}: {q}", queries.display(), idx + 1))?;
        writeln!(out, "{q} => {a}")?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(graph: &Path, profile: &str, seed: u64) -> anyhow::Result<ExitCode> {
    let net = read_graph(graph)?;
    let profile: Profile = profile.parse()?;
    let report = verify(&net, &profile, seed)?;
    print!("{report}");
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_MISMATCH))
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) => EXIT_MISMATCH,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Build { graph, k, output } => run_build(&graph, k, &output),
        Command::Query {
            graph,
            k,
            queries,
            oracle,
        } => run_query(&graph, k, &queries, oracle.as_deref()),
        Command::Verify { graph, profile, seed } => run_verify(&graph, &profile, seed),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        ExitCode::from(exit_code(&err))
    })
}

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dynsc::generate::{
    bounded_degree, gen_demand, gen_demand_stream, gen_expander, gen_path_augmented_expander, gen_snake, gen_stream, gnp,
    read_demand, read_stream, write_demand, write_stream, StreamKind,
};
use dynsc::harness::{self, Algo, Mode, RunConfig};
use dynsc::MultiGraph;

#[derive(Parser)]
#[command(name = "dynsc", about = "Dynamic Schur complement experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a stream and write per-op CSV.
    Run(RunArgs),
    /// Generate graphs, demands, and streams.
    #[command(subcommand)]
    Gen(Gen),
    /// Walk-load experiment on path-augmented expanders.
    Load {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    stream: PathBuf,
    /// Demand file, needed for solver and energy modes.
    #[arg(long)]
    demand: Option<PathBuf>,
    #[arg(long, default_value = "er")]
    mode: String,
    #[arg(long, default_value = "dynamic")]
    algo: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long = "c-rho", default_value_t = 32.0)]
    c_rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    oracle: bool,
    #[arg(long = "max-degree")]
    max_degree: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Gnp,
    Bounded,
    Snake,
    Expander,
    PathExpander,
}

#[derive(Subcommand)]
enum Gen {
    Graph {
        #[arg(long, value_enum)]
        kind: GraphKind,
        /// Vertex count; the core size for `path-expander`.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long)]
        weighted: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Stream {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "mixed")]
        kind: String,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    SolverStream {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long = "max-degree")]
        max_degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Demand {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn load_graph(path: &Path) -> Result<MultiGraph> {
    MultiGraph::read(open(path)?).with_context(|| format!("reading graph {}", path.display()))
}

fn run(args: RunArgs) -> Result<bool> {
    let g = load_graph(&args.graph)?;
    let ops = read_stream(open(&args.stream)?).with_context(|| format!("reading stream {}", args.stream.display()))?;
    let b = match &args.demand {
        Some(p) => Some(read_demand(open(p)?, g.n()).with_context(|| format!("reading demand {}", p.display()))?),
        None => None,
    };
    let mut cfg = RunConfig::new(args.mode.parse::<Mode>()?, args.algo.parse::<Algo>()?, args.eps, args.seed);
    cfg.beta = args.beta;
    cfg.c_rho = args.c_rho;
    cfg.oracle = args.oracle;
    cfg.max_degree = args.max_degree;
    let report = harness::run(&cfg, &g, b.as_deref(), &ops)?;
    let mut out = output(&args.out)?;
    harness::write_csv(&report, &mut out)?;
    out.flush()?;
    let s = &report.summary;
    eprintln!(
        "ops={} queries={} checked={} pass_rate={:.4} hard_failures={} rebuilds={} us_per_op={}",
        s.ops,
        s.queries,
        s.checked,
        s.pass_rate(),
        s.hard_failures,
        s.rebuilds,
        s.micros_per_op()
    );
    Ok(s.hard_failures == 0)
}

fn generate(cmd: Gen) -> Result<()> {
    match cmd {
        Gen::Graph { kind, n, p, degree, weighted, seed, out } => {
            let g = match kind {
                GraphKind::Gnp => gnp(n, p, weighted, seed),
                GraphKind::Bounded => bounded_degree(n, degree, seed),
                GraphKind::Snake => gen_snake(n),
                GraphKind::Expander => gen_expander(n, degree, seed),
                GraphKind::PathExpander => gen_path_augmented_expander(n, seed)?,
            };
            let mut w = output(&out)?;
            g.write(&mut w)?;
            w.flush()?;
        }
        Gen::Stream { graph, kind, length, seed, out } => {
            let g = load_graph(&graph)?;
            let ops = gen_stream(kind.parse::<StreamKind>()?, &g, length, seed);
            let mut w = output(&out)?;
            write_stream(&ops, &mut w)?;
            w.flush()?;
        }
        Gen::SolverStream { graph, demand, length, max_degree, seed, out } => {
            let g = load_graph(&graph)?;
            let b = read_demand(open(&demand)?, g.n())?;
            let ops = gen_demand_stream(&g, &b, length, max_degree, seed);
            let mut w = output(&out)?;
            write_stream(&ops, &mut w)?;
            w.flush()?;
        }
        Gen::Demand { graph, seed, out } => {
            let g = load_graph(&graph)?;
            let mut w = output(&out)?;
            write_demand(&gen_demand(&g, seed), &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => run(args),
        Cmd::Gen(g) => generate(g).map(|_| true),
        Cmd::Load { k, seed, out } => (|| {
            let res = harness::load_experiment(&k, seed)?;
            let mut w = output(&out)?;
            harness::write_load_csv(&res, &mut w)?;
            w.flush()?;
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bnci::bench::{self, Protocol};
use bnci::error::read_to_string;
use bnci::{emit_arcs, load_csv, parse_arcs, parse_bif, parse_levels, write_csv, Error, Result};
use bnci_core::citest::DataTest;
use bnci_core::graph::shd;
use bnci_core::network::forward_sample;
use bnci_core::{mmhc, network_score, BayesNet, Dag, DiscreteDataset, LearnConfig, Method, ScoreKind, ScoreSpec, TestConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bnci", version, about = "Conditional-independence tests and MMHC structure learning for discrete Bayesian networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from a BIF network and write it as CSV.
    Sample {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test X independent of Y given Z; prints one JSON line.
    Citest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Comma separated conditioning variables.
        #[arg(long, value_delimiter = ',')]
        z: Vec<String>,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Learn a structure with MMHC and print it as an arc list.
    Learn {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        score: ScoreArgs,
        #[arg(long, default_value_t = bnci_core::learn::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = bnci_core::learn::DEFAULT_MAX_COND)]
        max_cond: usize,
        #[arg(long)]
        max_parents: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a structure (BIF network or arc list) on a dataset; prints JSON.
    Score {
        #[command(flatten)]
        data: DataArgs,
        /// BIF network or arc-list file.
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        score: ScoreArgs,
    },
    /// Structural Hamming distance between two structures.
    Shd {
        #[arg(long)]
        learned: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Run a benchmark protocol file.
    Bench {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long, default_value = "records.csv")]
        records: PathBuf,
        #[arg(long, default_value = "summary.csv")]
        summary: PathBuf,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV data file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Level declarations (`variable:level,level`), or a BIF network whose
    /// levels should be used.
    #[arg(long)]
    levels: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, default_value = "mi")]
    method: Method,
    #[arg(long, default_value_t = bnci_core::citest::DEFAULT_PERMUTATIONS)]
    permutations: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long, default_value = "bde")]
    score: ScoreKind,
    #[arg(long, default_value_t = bnci_core::score::DEFAULT_ESS)]
    ess: f64,
}

impl ScoreArgs {
    fn spec(&self) -> Result<ScoreSpec> {
        Ok(match self.score {
            ScoreKind::Bde => ScoreSpec::bde(self.ess)?,
            ScoreKind::Bic => ScoreSpec::bic(),
        })
    }
}

fn is_bif(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bif"))
}

fn load_net(path: &Path) -> Result<BayesNet> {
    parse_bif(&read_to_string(path)?)
}

fn load_data(args: &DataArgs) -> Result<DiscreteDataset> {
    let declared = match &args.levels {
        None => None,
        Some(p) if is_bif(p) => Some(load_net(p)?.variables().to_vec()),
        Some(p) => Some(parse_levels(&read_to_string(p)?)?),
    };
    let file = File::open(&args.data).map_err(|e| Error::io(&args.data, e))?;
    load_csv(io::BufReader::new(file), declared.as_deref())
}

fn load_graph(path: &Path) -> Result<Dag> {
    if is_bif(path) {
        Ok(load_net(path)?.dag().clone())
    } else {
        parse_arcs(&read_to_string(path)?)
    }
}

fn column(data: &DiscreteDataset, name: &str) -> Result<usize> {
    data.index_of(name).ok_or_else(|| Error::Format(format!("dataset has no column {name}")))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { net, n, seed, out } => {
            let data = forward_sample(&load_net(&net)?, n, seed)?;
            write_csv(&data, output(out.as_deref())?)?;
        }
        Command::Citest { data, x, y, z, test } => {
            let data = load_data(&data)?;
            let (x, y) = (column(&data, &x)?, column(&data, &y)?);
            let z = z.iter().map(|v| column(&data, v)).collect::<Result<Vec<_>>>()?;
            let cfg = TestConfig::new(test.method).with_permutations(test.permutations).with_seed(test.seed);
            let o = DataTest::new(&data, cfg).outcome(x, y, &z)?;
            let line = json!({
                "method": o.method.tag(),
                "statistic": o.statistic,
                "df": o.df,
                "p_value": o.p_value,
                "permutations_used": o.permutations_used,
                "lambda": o.lambda,
            });
            println!("{line}");
        }
        Command::Learn { data, test, score, alpha, max_cond, max_parents, out } => {
            let data = load_data(&data)?;
            let mut cfg = LearnConfig::new(TestConfig::new(test.method).with_permutations(test.permutations), score.spec()?)
                .with_alpha(alpha)
                .with_seed(test.seed);
            cfg.max_cond = max_cond;
            cfg.max_parents = max_parents;
            let dag = mmhc(&data, &cfg)?;
            let mut w = output(out.as_deref())?;
            w.write_all(emit_arcs(&dag).as_bytes()).map_err(|e| Error::io("<output>", e))?;
            w.flush().map_err(|e| Error::io("<output>", e))?;
        }
        Command::Score { data, graph, score } => {
            let data = load_data(&data)?;
            let dag = load_graph(&graph)?;
            let v = network_score(&dag, &data, score.spec()?)?;
            let per_node: serde_json::Map<String, serde_json::Value> =
                v.per_node.iter().map(|(k, s)| (k.clone(), json!(s))).collect();
            let line = json!({
                "score": score.score.tag(),
                "total": v.total,
                "n": v.n,
                "params": v.params,
                "per_node": per_node,
            });
            println!("{line}");
        }
        Command::Shd { learned, truth } => {
            println!("{}", shd(&load_graph(&learned)?, &load_graph(&truth)?)?);
        }
        Command::Bench { protocol, records, summary, threads } => {
            let base = protocol.parent().unwrap_or(Path::new("."));
            let p = Protocol::parse(&read_to_string(&protocol)?, base)?;
            let net = load_net(&p.true_net)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Format(e.to_string()))?;
            let recs = pool.install(|| bench::run_protocol(&p, &net))?;
            bench::write_records(&recs, create(&records)?)?;
            bench::write_summary(&bench::summarize(&recs), net.free_parameters(), create(&summary)?)?;
            log::info!("{} records written to {}", recs.len(), records.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

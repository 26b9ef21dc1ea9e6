use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use indel::{Alphabet, Construction, CorpusModel, DpMode};
use indel_cli::commands::{self, Experiment, GenArgs, LabArgs, LabOutput};
use indel_cli::sync::{push, Server, Store, STORE_ENV};
use indel_cli::CliError;

#[derive(Parser)]
#[command(name = "indel", version, about = "One-way file updates from insertion/deletion edit scripts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode NEW against OLD into a delta container.
    Encode {
        #[arg(long)]
        old: PathBuf,
        #[arg(long)]
        new: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the quadratic DP instead of the banded one.
        #[arg(long)]
        oracle_dp: bool,
        #[arg(long, default_value_t = 256)]
        alphabet: u32,
    },
    /// Rebuild the new file from OLD and a delta.
    Decode {
        #[arg(long)]
        old: PathBuf,
        #[arg(long)]
        delta: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write simulated (old, new) pairs.
    Gen {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        del: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 256)]
        alphabet: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print rate bounds as JSON.
    Bounds {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        del: f64,
        #[arg(long, default_value_t = 256)]
        alphabet: u32,
        #[arg(long, default_value_t = indel::bounds::DEFAULT_TAU)]
        tau: f64,
    },
    /// Encode a corpus and write per-pair rates next to the bounds.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = indel::bounds::DEFAULT_TAU)]
        tau: f64,
        /// Fail (exit 6) if any rate exceeds the achievable bound by more than this.
        #[arg(long, allow_hyphen_values = true)]
        slack: Option<f64>,
    },
    /// Run an analysis experiment; prints CSV rows or, for a single align, a JSON tree.
    Lab {
        #[arg(long, value_enum)]
        experiment: ExperimentArg,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: u32,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        del: f64,
        /// Edit rates for the align Monte Carlo.
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.02])]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Source as a digit string.
        #[arg(long)]
        x: Option<String>,
        /// Typicalized target as a digit string.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, value_enum)]
        construction: Option<ConstructionArg>,
        #[arg(long, default_value_t = 0)]
        max_ins: usize,
        #[arg(long, default_value_t = 0)]
        max_del: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Accept pushes into a store directory.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// Defaults to $INDEL_SYNC_STORE.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Exit after this many connections.
        #[arg(long)]
        max_connections: Option<usize>,
    },
    /// Send NEW to a server that holds OLD under NAME.
    Push {
        #[arg(long)]
        addr: String,
        #[arg(long)]
        name: String,
        #[arg(long)]
        old: PathBuf,
        #[arg(long)]
        new: PathBuf,
        #[arg(long, default_value_t = 256)]
        alphabet: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Rpes,
    Apes,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Typicalize,
    Align,
    Enumerate,
    NaturesSecret,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionArg {
    Same,
    Distinct,
    Alternating,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Encode { old, new, out, oracle_dp, alphabet } => {
            let report = commands::encode_files(&old, &new, &out, Alphabet::new(alphabet)?, oracle_dp)?;
            commands::print_json(&report)
        }
        Cmd::Decode { old, delta, out } => {
            let n = commands::decode_files(&old, &delta, &out)?;
            eprintln!("wrote {n} bytes to {}", out.display());
            Ok(())
        }
        Cmd::Gen { model, n, eps, del, seed, count, alphabet, out } => {
            let model = match model {
                ModelArg::Rpes => CorpusModel::Rpes,
                ModelArg::Apes => CorpusModel::Apes,
            };
            let args = GenArgs { model, n, alphabet, eps, del, seed, count };
            for p in commands::gen_corpus(&args, &out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Cmd::Bounds { eps, del, alphabet, tau } => commands::print_json(&commands::bounds_report(eps, del, alphabet, tau)?),
        Cmd::Bench { corpus, csv, tau, slack } => {
            let (_, summary) = commands::bench(&corpus, &csv, tau, slack)?;
            commands::print_json(&summary)
        }
        Cmd::Lab {
            experiment,
            n,
            alphabet,
            eps,
            del,
            rates,
            trials,
            seed,
            x,
            y,
            construction,
            max_ins,
            max_del,
            csv,
        } => {
            let exp = match experiment {
                ExperimentArg::Typicalize => Experiment::Typicalize,
                ExperimentArg::Align => Experiment::Align,
                ExperimentArg::Enumerate => Experiment::Enumerate,
                ExperimentArg::NaturesSecret => Experiment::NaturesSecret,
            };
            let construction = construction.map(|c| match c {
                ConstructionArg::Same => Construction::AllSame(0),
                ConstructionArg::Distinct => Construction::AllDistinct,
                ConstructionArg::Alternating => Construction::Alternating,
            });
            let args = LabArgs { n, alphabet, eps, del, rates, trials, seed, x, y, construction, max_ins, max_del };
            match commands::lab(exp, &args)? {
                LabOutput::Rows(rows) => commands::write_rows(&rows, csv.as_deref()),
                LabOutput::Tree(tree) => commands::print_json(&tree),
            }
        }
        Cmd::Serve { listen, store, max_connections } => {
            let dir = store
                .or_else(|| std::env::var_os(STORE_ENV).map(PathBuf::from))
                .ok_or_else(|| CliError::Usage(format!("pass --store or set {STORE_ENV}")))?;
            let server = Server::bind(&listen, Store::open(dir)?)?;
            eprintln!("listening on {}", server.local_addr()?);
            Ok(server.run(max_connections)?)
        }
        Cmd::Push { addr, name, old, new, alphabet } => {
            let report = push(&addr, &name, &std::fs::read(old)?, &std::fs::read(new)?, Alphabet::new(alphabet)?, DpMode::Banded)?;
            commands::print_json(&report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Keep 2 for I/O; argument errors share code 1 with other usage errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

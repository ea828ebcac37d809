use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lfg_dop::evaluation::{percent, EvalMode, ScoreReport, SentenceScore};
use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig, FragmentMultiset};
use lfg_dop::harness::{parse_corpus, parse_tokens, run_experiment, Corpus, ExperimentConfig, Search, SearchKind};
use lfg_dop::parsing::{DecodeOptions, McOptions, ViterbiOptions, DEFAULT_ORACLE_GUARD};
use lfg_dop::probability::{build_bank, Estimator, FragmentBank};
use lfg_dop::symbol::Sym;

const USAGE: u8 = 1;
const DATA: u8 = 2;
const NO_PARSE: u8 = 3;

#[derive(Parser)]
#[command(name = "lfg-dop", version, about = "Data-oriented parsing over LFG-annotated corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct BankArgs {
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    /// Add Discard generalizations.
    #[arg(long, overrides_with = "no_discard")]
    discard: bool,
    #[arg(long)]
    no_discard: bool,
    /// Never delete PRED pairs when discarding.
    #[arg(long)]
    protect_pred: bool,
    /// At most this many Discard subsets per fragment.
    #[arg(long)]
    discard_cap: Option<usize>,
    #[arg(long, default_value = "discounted")]
    estimator: Estimator,
}

impl BankArgs {
    fn enumeration(&self) -> EnumerationConfig {
        EnumerationConfig {
            max_depth: self.max_depth,
            include_discard: self.discard && !self.no_discard,
            protect_pred: self.protect_pred,
            discard_cap: self.discard_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that every entry of a corpus file is a valid representation.
    Validate { corpus: PathBuf },
    /// Print the fragment bank of a corpus, one fragment per line.
    Fragments {
        corpus: PathBuf,
        #[command(flatten)]
        bank: BankArgs,
    },
    /// Parse one sentence with the fragments of a corpus.
    Parse {
        corpus: PathBuf,
        sentence: String,
        #[arg(long, default_value = "mc")]
        search: SearchKind,
        /// Number of derivations for viterbi.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        max_samples: u64,
        /// Stop sampling once the estimated error probability falls below this.
        #[arg(long, default_value_t = 0.05)]
        error_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_GUARD)]
        oracle_guard: u128,
        #[command(flatten)]
        bank: BankArgs,
    },
    /// Run an experiment grid described by a key = value file.
    Experiment { config: PathBuf },
    /// Score proposed analyses against gold ones, matched by sentence id.
    Score {
        proposed: PathBuf,
        gold: PathBuf,
        #[arg(long, default_value = "full")]
        mode: EvalMode,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure { code: DATA, message: e.to_string() }
}

fn load(path: &Path) -> Result<Corpus, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    parse_corpus(&text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn bank_of(corpus: &Corpus, args: &BankArgs) -> Result<FragmentBank, Failure> {
    let cfg = args.enumeration();
    let mut bag = FragmentMultiset::new();
    for e in &corpus.entries {
        bag.merge(enumerate_fragments(&e.repr, &cfg));
    }
    build_bank(&bag, args.estimator).map_err(data)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { corpus } => {
            let c = load(&corpus)?;
            println!("{}: {} valid entries, {} distinct words", corpus.display(), c.len(), c.vocabulary().len());
        }
        Command::Fragments { corpus, bank } => {
            let b = bank_of(&load(&corpus)?, &bank)?;
            print!("{}", b.dump());
            eprintln!("{} fragments; N = {}, n1 = {}, Discard tokens = {}", b.len(), b.n(), b.n1(), b.discard_total());
        }
        Command::Parse { corpus, sentence, search, n, max_samples, error_prob, seed, oracle_guard, bank } => {
            let b = bank_of(&load(&corpus)?, &bank)?;
            let tokens: Vec<Sym> = sentence.split_whitespace().map(Sym::new).collect();
            let search = match search {
                SearchKind::Mc => Search::Mc(McOptions { max_samples, error_threshold: Some(error_prob), seed, ..McOptions::default() }),
                SearchKind::Viterbi => Search::Viterbi(ViterbiOptions { n, rescore: false }),
                SearchKind::Brute => Search::Brute { guard: oracle_guard },
            };
            let outcome = parse_tokens(&b, &tokens, &search, &DecodeOptions::default());
            match outcome.result {
                Ok(a) => {
                    println!("{}", a.canonical);
                    eprintln!("log probability {:.6}; {} composes", a.log_prob, outcome.composes);
                }
                Err(e) => return Err(Failure { code: NO_PARSE, message: e.to_string() }),
            }
        }
        Command::Experiment { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| data(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::parse(&text, config.parent()).map_err(data)?;
            let report = run_experiment(&cfg).map_err(data)?;
            print!("{}", report.render_tables());
            println!("{}", report.timing_table());
        }
        Command::Score { proposed, gold, mode } => {
            let (p, g) = (load(&proposed)?, load(&gold)?);
            let mut sentences = Vec::with_capacity(g.len());
            for entry in &g.entries {
                let guess = p.get(&entry.id).map(|e| &e.repr);
                sentences.push(SentenceScore::new(entry.id.clone(), guess, &entry.repr, mode).map_err(data)?);
            }
            let report = ScoreReport::from_sentences(sentences);
            print!("{}", report.to_csv().map_err(data)?);
            eprintln!(
                "exact match {}, precision {}, recall {}",
                percent(report.exact_match),
                percent(report.precision),
                percent(report.recall)
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gf2hdc::harness::{
    avalanche_experiment, book_table_experiment, capacity_experiment, hrr_contrast_experiment, inflection_experiment,
    intervention_experiment, pseudotokens, qod_experiment, soap_opera_experiment, tensor_experiment, CapacityParams,
    HrrParams, Tolerances, TrialReport,
};
use gf2hdc::store::KnowledgeStore;
use gf2hdc::{BlockPolynomialConfig, Error};

#[derive(Parser, Debug)]
#[command(name = "gf2hdc", version, about = "Block-LFSR hypervector engine: experiments and a small knowledge store")]
struct Cli {
    /// `paper`, `default`, or a path to a config file written by `config show`.
    #[arg(long, global = true, default_value = "default")]
    config: String,

    /// Master seed for named configs and for trials.
    #[arg(long, global = true, env = "GF2HDC_SEED", default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between diffused distinct block states against q/2 and q/4.
    Qod {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Output weight of diffused single-bit inputs, per block.
    Avalanche,
    /// Readout accuracy against bundle arity and nesting depth.
    Capacity {
        #[arg(long, default_value_t = 16)]
        vocab: usize,
        #[arg(long, default_value_t = 16)]
        max_arity: usize,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Binds a stem to never-seen tokens and checks exact recovery.
    Inflect {
        /// Number of generated novel tokens.
        #[arg(long, default_value_t = 1000)]
        tokens: usize,
        /// Known words; recovery never consults them.
        #[arg(long, value_delimiter = ',', default_value = "walk,talk,jump,play")]
        train: Vec<String>,
    },
    /// The eight-fact Lover/Beloved cycle and its closure readout.
    SoapOpera,
    /// Role-swapped two-binding bundles and per-role recovery.
    BookTable {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Filler replacement identities on random bundles.
    Intervene {
        #[arg(long, default_value_t = 8)]
        arity: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Individuals, kinds and properties kept in a store file.
    Kb(KbArgs),
    /// Real-valued comparison schemes.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Config inspection.
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Args, Debug)]
struct KbArgs {
    /// Store file; created on first use.
    #[arg(long, default_value = "gf2hdc.store")]
    store: PathBuf,
    #[command(subcommand)]
    action: KbCommand,
}

#[derive(Subcommand, Debug)]
enum KbCommand {
    /// Adds an individual with a fresh entry address.
    Add { label: String },
    /// Asserts that an individual is of a kind.
    AssertKind { label: String, kind: String },
    /// Asserts a role/value property.
    AssertProp { label: String, role: String, value: String },
    /// Reads back a role; `ISA` reads the kind.
    Query { label: String, role: String },
    /// Copies the store to a file.
    Save { path: PathBuf },
    /// Replaces the store with a file's contents.
    Load { path: PathBuf },
}

#[derive(Subcommand, Debug)]
enum BaselineCommand {
    /// Circular-convolution binding against XOR-shift.
    Hrr {
        #[arg(long, default_value_t = 512)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        arities: Vec<usize>,
    },
    /// Tensor-product binding: exact contraction, size growth per depth.
    Tensor {
        #[arg(long, default_value_t = 20)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        depth: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ConfigCommand {
    /// Prints the config in its file format.
    Show,
}

enum Outcome {
    Pass,
    ToleranceFailure,
}

fn load_config(selector: &str, seed: u64) -> gf2hdc::Result<BlockPolynomialConfig> {
    match selector {
        "paper" | "default" => BlockPolynomialConfig::named(selector, seed),
        path => BlockPolynomialConfig::parse_text_format(&fs::read_to_string(path)?),
    }
}

fn emit(cli: &Cli, body: &str) -> gf2hdc::Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn emit_report(cli: &Cli, report: &TrialReport) -> gf2hdc::Result<Outcome> {
    let body = match cli.format {
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv(),
    };
    emit(cli, &body)?;
    if cli.output.is_some() {
        println!("result: {}", if report.passed() { "PASS" } else { "FAIL" });
    }
    Ok(if report.passed() {
        Outcome::Pass
    } else {
        Outcome::ToleranceFailure
    })
}

fn open_store(path: &Path, cfg: BlockPolynomialConfig) -> gf2hdc::Result<KnowledgeStore> {
    if path.exists() {
        KnowledgeStore::from_text(&fs::read_to_string(path)?)
    } else {
        Ok(KnowledgeStore::new(cfg))
    }
}

fn write_store(path: &Path, store: &KnowledgeStore) -> gf2hdc::Result<()> {
    fs::write(path, store.to_text()?)?;
    Ok(())
}

fn ensure_defined(result: gf2hdc::Result<()>) -> gf2hdc::Result<()> {
    match result {
        Ok(()) | Err(Error::DuplicateToken(_)) => Ok(()),
        Err(e) => Err(e),
    }
}

fn run_kb(cli: &Cli, args: &KbArgs, cfg: BlockPolynomialConfig) -> gf2hdc::Result<Outcome> {
    let mut store = open_store(&args.store, cfg)?;
    if args.store.exists() {
        println!("# store config 0x{:016x}", store.config().config_id());
    }
    let out;
    match &args.action {
        KbCommand::Add { label } => {
            let ea = store.add_individual(label)?.ea.clone();
            out = format!("added {label} ea={}\n", store.config().encode_hex(&ea)?);
            write_store(&args.store, &store)?;
        }
        KbCommand::AssertKind { label, kind } => {
            ensure_defined(store.define_kind(kind))?;
            store.assert_kind(label, kind)?;
            out = format!("{label} ISA {kind}\n");
            write_store(&args.store, &store)?;
        }
        KbCommand::AssertProp { label, role, value } => {
            ensure_defined(store.define_role(role))?;
            ensure_defined(store.define_value(value))?;
            store.assert_prop(label, role, value)?;
            out = format!("{label} {role} {value}\n");
            write_store(&args.store, &store)?;
        }
        KbCommand::Query { label, role } => {
            let o = store.query(label, role)?;
            match cli.format {
                Format::Text => {
                    out = format!(
                        "{label} {role} -> {} cr1={:.6}{}\n",
                        o.readout.winner,
                        o.readout.cr1,
                        if o.reliable { "" } else { " (below confidence threshold)" }
                    )
                }
                Format::Csv => {
                    out = format!(
                        "label,role,winner,cr1,reliable\n{label},{role},{},{},{}\n",
                        o.readout.winner, o.readout.cr1, o.reliable
                    )
                }
            }
        }
        KbCommand::Save { path } => {
            write_store(path, &store)?;
            out = format!("saved {} individuals to {}\n", store.len(), path.display());
        }
        KbCommand::Load { path } => {
            let loaded = KnowledgeStore::from_text(&fs::read_to_string(path)?)?;
            write_store(&args.store, &loaded)?;
            out = format!("loaded {} individuals from {}\n", loaded.len(), path.display());
        }
    }
    emit(cli, &out)?;
    Ok(Outcome::Pass)
}

fn run(cli: &Cli) -> gf2hdc::Result<Outcome> {
    let cfg = load_config(&cli.config, cli.seed)?;
    println!("# config 0x{:016x} ({})", cfg.config_id(), cli.config);
    let tol = Tolerances::default();
    let seed = cli.seed;
    let report = match &cli.command {
        Command::Qod { samples } => qod_experiment(&cfg, *samples, seed, &tol),
        Command::Avalanche => avalanche_experiment(&cfg, &tol),
        Command::Capacity {
            vocab,
            max_arity,
            max_depth,
            trials,
        } => capacity_experiment(
            &cfg,
            &CapacityParams {
                vocab_size: *vocab,
                max_arity: *max_arity,
                max_depth: *max_depth,
                trials: *trials,
            },
            seed,
            &tol,
        )?,
        Command::Inflect { tokens, train } => {
            let novel = pseudotokens(*tokens, seed, train);
            inflection_experiment(&cfg, train, &novel, &tol)?
        }
        Command::SoapOpera => soap_opera_experiment(&cfg, seed, &tol)?,
        Command::BookTable { trials } => book_table_experiment(&cfg, *trials, seed, &tol)?,
        Command::Intervene { arity, trials } => intervention_experiment(&cfg, *arity, *trials, seed, &tol)?,
        Command::Baseline(BaselineCommand::Hrr { dim, trials, arities }) => hrr_contrast_experiment(
            &cfg,
            &HrrParams {
                dim: *dim,
                trials: *trials,
                arities: arities.clone(),
            },
            seed,
            &tol,
        )?,
        Command::Baseline(BaselineCommand::Tensor { dim, depth, trials }) => {
            tensor_experiment(&cfg, *dim, *depth, *trials, seed, &tol)?
        }
        Command::Kb(args) => return run_kb(cli, args, cfg),
        Command::Config(ConfigCommand::Show) => {
            emit(cli, &cfg.to_text_format())?;
            return Ok(Outcome::Pass);
        }
    };
    emit_report(cli, &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::ToleranceFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! Command-line front end. `run` parses arguments, dispatches, and maps
//! outcomes to exit codes: 0 success (an unsatisfiable plan included), 1
//! domain error, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::automaton;
use crate::dataset::{
    self, corpus_stats, ground_corpus, make_split, permute_augment, read_jsonl, seed_corpus, train_test, write_jsonl,
    AugmentOptions, GroundOptions, PermutationScope, ReBank, Regime, Sample, SplitSpec,
};
use crate::decode::{constrained_decode, unconstrained_decode, RandomSampler, ScoreStream, Vocabulary};
use crate::eval::{self, rer_reg_scores, EvalMode, ReRecord};
use crate::grounding::{
    ground_command, prompt_template, Backends, BackendConfig, CachedEmbedder, ChatBackend, DecodeLimits, Embedder,
    GroundingError, HashingEmbedder, HttpBackend, MockBackend, Prompts, SemanticDB,
};
use crate::ltl::{parse_infix, parse_prefix, print_infix, print_prefix, Formula, Prop};
use crate::patterns::{equivalent_pairs, template_entries, CATALOG_SIZE};
use crate::planner::{self, PlanOutcome, SemanticMap};

#[derive(Debug, Parser)]
#[command(name = "ltlground", version, about = "Ground navigation commands to LTL and plan over them")]
pub struct Cli {
    /// Backend configuration file (JSON) for network grounding.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Environment variable holding the API token; overrides the config file.
    #[arg(long, global = true)]
    pub api_key_env: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for written outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Log filter for the JSON logs on stderr, e.g. `info` or `ltlground=debug`.
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TextFormat {
    Prefix,
    Infix,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scope {
    /// Injective renamings into the placeholder vocabulary.
    Vocabulary,
    /// Reorderings of each sample's own propositions.
    WithinSample,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EmbedderChoice {
    /// Same source as chat: the mock fixture or the configured API.
    Backend,
    /// Local feature-hashing embedder.
    Hashing,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a formula and print it.
    Parse {
        formula: String,
        /// Read infix instead of prefix notation.
        #[arg(long)]
        infix: bool,
        #[arg(long, value_enum, default_value = "prefix")]
        to: TextFormat,
    },
    /// Decide language equivalence; prints EQUIVALENT or NOT EQUIVALENT with a distinguishing trace.
    CheckEquiv {
        left: String,
        right: String,
        #[arg(long)]
        infix: bool,
    },
    /// Write the template catalog to <out-dir>/templates.json.
    Templates {
        /// Also check that all skeletons are pairwise inequivalent.
        #[arg(long)]
        check: bool,
    },
    /// Permutation-augment a lifted seed corpus, optionally grounding it.
    GenDataset {
        /// Seed corpus JSONL; defaults to the shipped one.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "vocabulary")]
        scope: Scope,
        /// Samples kept per seed, the seed included.
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        no_dedup: bool,
        /// Semantic database for grounding (with --re-bank).
        #[arg(long, requires = "re_bank")]
        db: Option<PathBuf>,
        /// JSON object from landmark key to referring expressions.
        #[arg(long, requires = "db")]
        re_bank: Option<PathBuf>,
        /// Ground only this many lifted samples.
        #[arg(long)]
        sample_size: Option<usize>,
    },
    /// Assign cross-validation folds and write train/test files per fold.
    Split {
        #[arg(long)]
        input: PathBuf,
        /// utterance, formula or type.
        #[arg(long)]
        regime: String,
        #[arg(long, default_value_t = 5)]
        folds: usize,
    },
    /// Corpus statistics as JSON; defaults to the augmented shipped corpus.
    Stats {
        #[arg(long)]
        input: Option<PathBuf>,
        /// With no input, report the seed corpus before augmentation.
        #[arg(long)]
        seeds_only: bool,
    },
    /// Run the grounding pipeline on commands; one JSON result per line.
    Ground {
        utterances: Vec<String>,
        /// File with one command per line.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        db: PathBuf,
        /// Replay recorded responses instead of calling an API.
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "backend")]
        embedder: EmbedderChoice,
        /// Translate with type-constrained decoding.
        #[arg(long)]
        constrained: bool,
        /// Translation prompt: a shipped template name or a file.
        #[arg(long, default_value = "lifted_translation")]
        prompt: String,
    },
    /// Type-constrained decoding from recorded scores or a random sampler.
    Decode {
        /// JSON with `props`, `max_height`, `max_tokens` and per-step `steps` scores.
        #[arg(long, conflicts_with = "random")]
        fixture: Option<PathBuf>,
        /// Decode this many uniformly random samples.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "A,B,C,D,E")]
        props: Vec<String>,
        #[arg(long, default_value_t = 8)]
        max_height: usize,
        #[arg(long, default_value_t = 80)]
        max_tokens: usize,
        /// Disable the mask (baseline).
        #[arg(long)]
        unconstrained: bool,
    },
    /// Plan on a semantic map; prints the walk or UNSAT.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        ltl: String,
        #[arg(long)]
        infix: bool,
        #[arg(long)]
        json: bool,
    },
    /// Score predictions against gold samples; writes report.json and CSVs.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        /// JSONL with a `prediction` field per line, aligned with the gold file,
        /// plus optional recognition fields (`gold_res`, `predicted_res`, `gold_keys`, `predicted_keys`).
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value = "semantic_equivalence")]
        mode: String,
    },
}

pub enum CliError {
    Usage(String),
    Domain(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn usage(msg: impl Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn domain(msg: impl Display) -> CliError {
    CliError::Domain(msg.to_string())
}

type CliResult = Result<(), CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(&cli.log);
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            tracing::error!(kind = "usage", "{m}");
            eprintln!("error: {m}\n\nRun with --help for usage.");
            2
        }
        Err(CliError::Domain(m)) => {
            tracing::error!(kind = "domain", "{m}");
            eprintln!("error: {m}");
            1
        }
    }
}

fn init_logging(filter: &str) {
    let filter = tracing_subscriber::EnvFilter::try_new(filter).unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    // a second init (in-process tests) keeps the first subscriber
    let _ = tracing_subscriber::fmt().json().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

fn read_formula(text: &str, infix: bool) -> Result<Formula, CliError> {
    let parsed = if infix { parse_infix(text) } else { parse_prefix(text) };
    parsed.map_err(|e| domain(format!("`{text}`: {e}")))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Parse { formula, infix, to } => {
            let f = read_formula(formula, *infix)?;
            match to {
                TextFormat::Prefix => writeln!(out, "{}", print_prefix(&f))?,
                TextFormat::Infix => writeln!(out, "{}", print_infix(&f))?,
                TextFormat::Json => writeln!(out, "{}", serde_json::to_string(&f)?)?,
            }
        }
        Command::CheckEquiv { left, right, infix } => {
            let (f, g) = (read_formula(left, *infix)?, read_formula(right, *infix)?);
            match automaton::check_equivalence(&f, &g)? {
                None => writeln!(out, "EQUIVALENT")?,
                Some(trace) => {
                    writeln!(out, "NOT EQUIVALENT")?;
                    writeln!(out, "{}", serde_json::to_string(&trace)?)?;
                }
            }
        }
        Command::Templates { check } => {
            let entries = template_entries();
            let path = cli.out_dir.join("templates.json");
            write_json(&path, &entries)?;
            writeln!(out, "{} templates written to {}", entries.len(), path.display())?;
            if *check {
                let skeletons: Vec<Formula> =
                    entries.iter().map(|e| parse_prefix(&e.skeleton)).collect::<Result<_, _>>()?;
                let refs: Vec<&Formula> = skeletons.iter().collect();
                let pairs = equivalent_pairs(&refs)?;
                if !pairs.is_empty() || entries.len() != CATALOG_SIZE {
                    let names: Vec<String> =
                        pairs.iter().map(|&(i, j)| format!("{} = {}", entries[i].id, entries[j].id)).collect();
                    return Err(domain(format!("catalog check failed: {}", names.join(", "))));
                }
                writeln!(out, "pairwise inequivalent")?;
            }
        }
        Command::GenDataset { seeds, scope, cap, no_dedup, db, re_bank, sample_size } => {
            let seeds = match seeds {
                Some(p) => read_jsonl(p)?,
                None => seed_corpus(),
            };
            for s in &seeds {
                s.validate()?;
            }
            let opts = AugmentOptions {
                scope: match scope {
                    Scope::Vocabulary => PermutationScope::Vocabulary(dataset::placeholder_vocabulary()),
                    Scope::WithinSample => PermutationScope::WithinSample,
                },
                cap: *cap,
                dedup: !no_dedup,
            };
            let lifted = permute_augment(&seeds, &opts)?;
            std::fs::create_dir_all(&cli.out_dir)?;
            let path = cli.out_dir.join("lifted.jsonl");
            write_jsonl(&path, &lifted)?;
            writeln!(out, "{} lifted samples written to {}", lifted.len(), path.display())?;
            if let (Some(db), Some(bank)) = (db, re_bank) {
                let db = SemanticDB::load(db)?;
                let bank: ReBank = serde_json::from_str(&std::fs::read_to_string(bank)?)?;
                let opts = GroundOptions { sample_size: *sample_size, seed: cli.seed };
                let grounded = ground_corpus(&lifted, &bank, &db, opts)?;
                let path = cli.out_dir.join("grounded.jsonl");
                write_jsonl(&path, &grounded)?;
                writeln!(out, "{} grounded samples written to {}", grounded.len(), path.display())?;
            }
        }
        Command::Split { input, regime, folds } => {
            let regime = Regime::from_name(regime).ok_or_else(|| usage(format!("unknown regime `{regime}`")))?;
            let samples = read_jsonl(input)?;
            let spec = SplitSpec { regime, folds: *folds, seed: cli.seed };
            let assignment = make_split(&samples, &spec)?;
            write_json(&cli.out_dir.join("folds.json"), &serde_json::json!({ "spec": spec, "fold_of_sample": assignment }))?;
            for k in 0..*folds {
                let (train, test) = train_test(&assignment, k);
                let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<Sample>>();
                write_jsonl(&cli.out_dir.join(format!("fold_{k}_train.jsonl")), &pick(&train))?;
                write_jsonl(&cli.out_dir.join(format!("fold_{k}_test.jsonl")), &pick(&test))?;
                writeln!(out, "fold {k}: {} train, {} test", train.len(), test.len())?;
            }
        }
        Command::Stats { input, seeds_only } => {
            let samples = match (input, seeds_only) {
                (Some(p), _) => read_jsonl(p)?,
                (None, true) => seed_corpus(),
                (None, false) => permute_augment(&seed_corpus(), &AugmentOptions::default())?,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&corpus_stats(&samples))?)?;
        }
        Command::Ground { utterances, input, db, mock, embedder, constrained, prompt } => {
            ground(cli, utterances, input.as_deref(), db, mock.as_deref(), *embedder, *constrained, prompt, out)?;
        }
        Command::Decode { fixture, random, props, max_height, max_tokens, unconstrained } => {
            decode(cli, fixture.as_deref(), *random, props, *max_height, *max_tokens, *unconstrained, out)?;
        }
        Command::Plan { map, ltl, infix, json } => {
            let map = SemanticMap::load(map)?;
            let f = read_formula(ltl, *infix)?;
            let outcome = planner::plan(&map, &f)?;
            if *json {
                writeln!(out, "{}", serde_json::to_string(&outcome)?)?;
            } else {
                match &outcome {
                    PlanOutcome::Plan(p) => writeln!(out, "PLAN\n{p}")?,
                    PlanOutcome::Unsatisfiable { reason } => writeln!(out, "UNSAT: {reason}")?,
                }
            }
        }
        Command::Eval { gold, pred, mode } => {
            let mode = EvalMode::from_name(mode).ok_or_else(|| usage(format!("unknown mode `{mode}`")))?;
            evaluate(cli, gold, pred, mode, out)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn ground(
    cli: &Cli,
    utterances: &[String],
    input: Option<&Path>,
    db: &Path,
    mock: Option<&Path>,
    embedder: EmbedderChoice,
    constrained: bool,
    prompt: &str,
    out: &mut dyn Write,
) -> CliResult {
    let mut commands: Vec<String> = utterances.to_vec();
    if let Some(p) = input {
        commands.extend(std::fs::read_to_string(p)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    if commands.is_empty() {
        return Err(usage("no commands given"));
    }
    let db = SemanticDB::load(db)?;
    let (chat, backend_embedder): (Box<dyn ChatBackend>, Box<dyn Embedder>) = match mock {
        Some(path) => (Box::new(MockBackend::load(path)?), Box::new(MockBackend::load(path)?)),
        None => {
            let path = cli.config.as_ref().ok_or_else(|| usage("network grounding needs --config (or use --mock)"))?;
            let mut cfg = BackendConfig::load(path)?;
            if let Some(var) = &cli.api_key_env {
                cfg.api_key_env = var.clone();
            }
            let cache = cfg.cache_path.clone();
            let http = HttpBackend::new(cfg.clone())?;
            let embed: Box<dyn Embedder> = match cache {
                Some(c) => Box::new(CachedEmbedder::with_file(HttpBackend::new(cfg)?, &c)?),
                None => Box::new(HttpBackend::new(cfg)?),
            };
            (Box::new(http), embed)
        }
    };
    let hashing = HashingEmbedder::default();
    let embedder: &dyn Embedder = match embedder {
        EmbedderChoice::Backend => backend_embedder.as_ref(),
        EmbedderChoice::Hashing => &hashing,
    };
    let backends = Backends {
        chat: chat.as_ref(),
        embedder,
        prompts: Prompts { translation: prompt_template(prompt)?, ..Prompts::default() },
        constrained: constrained.then(DecodeLimits::default),
    };

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(commands.len());
    let chunk = commands.len().div_ceil(threads);
    let results: Vec<Result<_, GroundingError>> = std::thread::scope(|s| {
        let handles: Vec<_> = commands
            .chunks(chunk)
            .map(|part| {
                let (db, backends) = (&db, &backends);
                s.spawn(move || part.iter().map(|u| ground_command(u, db, backends)).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("grounding thread panicked")).collect()
    });
    let mut failed = 0;
    for (u, r) in commands.iter().zip(results) {
        match r {
            Ok(g) => writeln!(out, "{}", serde_json::to_string(&g)?)?,
            Err(e) => {
                failed += 1;
                let stage = e.stage().map(|s| s.to_string());
                tracing::error!(stage = stage.as_deref().unwrap_or("none"), utterance = %u, "{}", e.root());
                let line = serde_json::json!({ "utterance": u, "error": { "stage": stage, "message": e.root().to_string() } });
                writeln!(out, "{line}")?;
            }
        }
    }
    if failed > 0 {
        return Err(domain(format!("{failed} of {} commands failed", commands.len())));
    }
    Ok(())
}

/// Recorded decoder scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodeFixture {
    pub props: Vec<Prop>,
    pub max_height: usize,
    pub max_tokens: usize,
    pub steps: Vec<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
fn decode(
    cli: &Cli,
    fixture: Option<&Path>,
    random: Option<usize>,
    props: &[String],
    max_height: usize,
    max_tokens: usize,
    unconstrained: bool,
    out: &mut dyn Write,
) -> CliResult {
    if let Some(path) = fixture {
        let fx: DecodeFixture = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let vocab = Vocabulary::new(&fx.props);
        let mut stream = ScoreStream { steps: fx.steps };
        let f = if unconstrained {
            unconstrained_decode(&mut stream, &vocab, fx.max_tokens)?
        } else {
            constrained_decode(&mut stream, &vocab, fx.max_height, fx.max_tokens)?
        };
        writeln!(out, "{}", print_prefix(&f))?;
        return Ok(());
    }
    let n = random.ok_or_else(|| usage("decode needs --fixture or --random"))?;
    let names: Vec<&str> = props.iter().map(String::as_str).collect();
    let vocab = Vocabulary::with_prop_names(&names).map_err(|e| usage(e))?;
    let mut sampler = RandomSampler { rng: <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cli.seed) };
    let mut invalid = 0;
    for _ in 0..n {
        let r = if unconstrained {
            unconstrained_decode(&mut sampler, &vocab, max_tokens)
        } else {
            constrained_decode(&mut sampler, &vocab, max_height, max_tokens)
        };
        match r {
            Ok(f) => writeln!(out, "{}", print_prefix(&f))?,
            Err(e) => {
                invalid += 1;
                writeln!(out, "INVALID: {e}")?;
            }
        }
    }
    tracing::info!(samples = n, invalid, "random decoding finished");
    Ok(())
}

#[derive(Debug, Deserialize)]
struct PredictionLine {
    prediction: String,
    #[serde(flatten)]
    re: Option<ReRecord>,
}

fn evaluate(cli: &Cli, gold: &Path, pred: &Path, mode: EvalMode, out: &mut dyn Write) -> CliResult {
    let gold = read_jsonl(gold)?;
    let preds: Vec<PredictionLine> = std::fs::read_to_string(pred)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| domain(format!("{} line {}: {e}", pred.display(), i + 1))))
        .collect::<Result<_, _>>()?;
    if gold.len() != preds.len() {
        return Err(eval::EvalError::LengthMismatch { gold: gold.len(), predicted: preds.len() }.into());
    }
    let pairs: Vec<(Sample, String)> = gold.into_iter().zip(preds.iter().map(|p| p.prediction.clone())).collect();
    let mut report = eval::score(&pairs, mode);
    let records: Option<Vec<ReRecord>> = preds.into_iter().map(|p| p.re).collect();
    report.re = records.filter(|r| !r.is_empty()).map(|r| rer_reg_scores(&r));
    report.write_outputs(&cli.out_dir)?;
    let errors: BTreeMap<&str, usize> = report.errors.iter().map(|(c, n)| (c.name(), *n)).collect();
    writeln!(
        out,
        "accuracy {:.4} ({}/{}); errors {}",
        report.overall.accuracy,
        report.overall.correct,
        report.overall.total,
        serde_json::to_string(&errors)?
    )?;
    Ok(())
}

//! `teamtrace`: validate, analyze, match and evaluate discussion transcripts.
//!
//! Exit codes: 0 success, 1 domain error (invalid transcript, unknown ids,
//! nothing to evaluate), 2 I/O or parse error.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use teamtrace::config::LEXICON_DIR_ENV;
use teamtrace::diagnostics::to_canonical_json;
use teamtrace::fixtures::{load_fixture, ProvenanceTable, FIXTURE_NAMES};
use teamtrace::semantics::{match_structures_with, extract_structure, MatchOptions};
use teamtrace::transcript::{decode_transcript, serialize_transcript, validate_transcript, Level, Transcript};
use teamtrace::{analyze, evaluate, Config, Lexicons};

#[derive(Parser)]
#[command(name = "teamtrace", version, about = "Analyze team problem-solving transcripts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a transcript against the schema and its invariants.
    Validate { path: PathBuf },
    /// Run the full pipeline and write the diagnostics report.
    Analyze(AnalyzeArgs),
    /// Print the structure match between two utterances.
    Match {
        path: PathBuf,
        /// Two utterance ids, e.g. I1,I2
        #[arg(long, value_parser = parse_pair)]
        pair: (String, String),
        #[command(flatten)]
        settings: Settings,
    },
    /// Hide gold labels, rerun classification and linking, and score against gold.
    Eval {
        path: PathBuf,
        /// Provenance table marking quoted utterances (default: <stem>.provenance.tsv next to the input)
        #[arg(long)]
        provenance: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// List the embedded fixtures, or print one.
    Fixtures { name: Option<String> },
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Report destination (default stdout). A directory when several inputs are given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace graph in Graphviz format. A directory when several inputs are given.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Per-member mental images. A directory when several inputs are given.
    #[arg(long)]
    images: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct Settings {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of lexicon files overriding the embedded ones
    #[arg(long)]
    lexicon_dir: Option<PathBuf>,
    /// Override one configuration key, e.g. --set tau_link=0.3
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Allow matches across slots at half weight
    #[arg(long)]
    cross_slot: bool,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn io_error(context: impl Display, e: impl Display) -> Failure {
    Failure { code: 2, message: format!("{context}: {e}") }
}

fn domain_error(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s.split_once(',').ok_or("expected two ids separated by a comma")?;
    let (a, b) = (a.trim(), b.trim());
    if a.is_empty() || b.is_empty() {
        return Err("expected two ids separated by a comma".into());
    }
    Ok((a.to_string(), b.to_string()))
}

impl Settings {
    /// Defaults, then the config file, then command-line flags. The lexicon
    /// directory comes from the flag, else the environment, else the config file.
    fn resolve(&self) -> Result<(Config, Lexicons), Failure> {
        let mut config = Config::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| io_error(path.display(), e))?;
            config.apply(&text).map_err(|e| io_error(path.display(), e))?;
        }
        for item in &self.overrides {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| io_error("--set", format!("expected KEY=VALUE, found {item:?}")))?;
            config.set(k.trim(), v.trim()).map_err(|e| io_error("--set", e))?;
        }
        if self.cross_slot {
            config.cross_slot = true;
        }
        let dir = self
            .lexicon_dir
            .clone()
            .or_else(|| std::env::var_os(LEXICON_DIR_ENV).map(PathBuf::from))
            .or_else(|| config.lexicon_dir.clone());
        let lex = match &dir {
            Some(d) => Lexicons::load_dir(d).map_err(|e| io_error("lexicons", e))?,
            None => Lexicons::embedded(),
        };
        config.lexicon_dir = dir;
        Ok((config, lex))
    }
}

/// Reads and decodes; prints every diagnostic to stderr and fails on errors.
fn load(path: &Path) -> Result<Transcript, Failure> {
    let bytes = fs::read(path).map_err(|e| io_error(path.display(), e))?;
    let t = decode_transcript(&bytes).map_err(|e| io_error(path.display(), e))?;
    let diagnostics = validate_transcript(&t);
    let errors = diagnostics.iter().filter(|d| d.level == Level::Error).count();
    if errors > 0 {
        for d in &diagnostics {
            eprintln!("{}: {d}", path.display());
        }
        return Err(domain_error(format!("{}: {errors} validation error(s)", path.display())));
    }
    Ok(t)
}

fn write_or_print(dest: Option<&Path>, content: &str) -> Result<(), Failure> {
    match dest {
        Some(p) => fs::write(p, content).map_err(|e| io_error(p.display(), e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let bytes = fs::read(path).map_err(|e| io_error(path.display(), e))?;
    let t = decode_transcript(&bytes).map_err(|e| io_error(path.display(), e))?;
    let diagnostics = validate_transcript(&t);
    for d in &diagnostics {
        eprintln!("{}: {d}", path.display());
    }
    let errors = diagnostics.iter().filter(|d| d.level == Level::Error).count();
    if errors > 0 {
        return Err(domain_error(format!("{}: {errors} validation error(s)", path.display())));
    }
    Ok(())
}

struct Outputs {
    report: String,
    dot: String,
    images: String,
}

fn run_one(path: &Path, config: &Config, lex: &Lexicons) -> Result<Outputs, Failure> {
    let t = load(path)?;
    let a = analyze(&t, lex, config);
    Ok(Outputs {
        report: to_canonical_json(&a.report),
        dot: a.graph.to_dot(),
        images: to_canonical_json(&a.images_report()),
    })
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let (config, lex) = args.settings.resolve()?;
    let results: Vec<Result<Outputs, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = args.paths.iter().map(|p| s.spawn(|| run_one(p, &config, &lex))).collect();
        handles.into_iter().map(|h| h.join().expect("analysis threads do not panic")).collect()
    });
    let mut outputs = Vec::with_capacity(results.len());
    for r in results {
        outputs.push(r?);
    }

    if let [single] = outputs.as_slice() {
        write_or_print(args.out.as_deref(), &single.report)?;
        if let Some(p) = &args.dot {
            write_or_print(Some(p), &single.dot)?;
        }
        if let Some(p) = &args.images {
            write_or_print(Some(p), &single.images)?;
        }
        return Ok(());
    }

    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into());
    let into_dir = |dir: &Path, suffix: &str, pick: &dyn Fn(&Outputs) -> &str| -> Result<(), Failure> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir.display(), e))?;
        for (p, o) in args.paths.iter().zip(&outputs) {
            write_or_print(Some(&dir.join(format!("{}{suffix}", stem(p)))), pick(o))?;
        }
        Ok(())
    };
    match &args.out {
        Some(dir) => into_dir(dir, ".report.json", &|o| &o.report)?,
        None => {
            for o in &outputs {
                print!("{}", o.report);
            }
        }
    }
    if let Some(dir) = &args.dot {
        into_dir(dir, ".dot", &|o| &o.dot)?;
    }
    if let Some(dir) = &args.images {
        into_dir(dir, ".images.json", &|o| &o.images)?;
    }
    Ok(())
}

fn cmd_match(path: &Path, pair: &(String, String), settings: &Settings) -> Result<(), Failure> {
    let (config, lex) = settings.resolve()?;
    let t = load(path)?;
    let find = |id: &str| t.utterance(id).ok_or_else(|| domain_error(format!("unknown utterance id {id:?}")));
    let (a, b) = (find(&pair.0)?, find(&pair.1)?);
    let result = match_structures_with(
        &extract_structure(a, &lex.extraction),
        &extract_structure(b, &lex.extraction),
        &lex.synonyms,
        MatchOptions { cross_slot: config.cross_slot },
    );
    print!("{}", to_canonical_json(&result));
    Ok(())
}

fn sibling_provenance(path: &Path) -> Option<PathBuf> {
    let stem = path.file_stem()?.to_string_lossy().into_owned();
    let candidate = path.with_file_name(format!("{stem}.provenance.tsv"));
    candidate.is_file().then_some(candidate)
}

fn cmd_eval(path: &Path, provenance: Option<&Path>, settings: &Settings) -> Result<(), Failure> {
    let (config, lex) = settings.resolve()?;
    let t = load(path)?;
    let table = match provenance.map(Path::to_path_buf).or_else(|| sibling_provenance(path)) {
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| io_error(p.display(), e))?;
            Some(ProvenanceTable::parse(&text).map_err(|e| io_error(p.display(), e))?)
        }
        None => None,
    };
    let quoted: Option<BTreeSet<String>> = table.map(|t| t.quoted().into_iter().collect());
    let report = evaluate(&t, &lex, &config, quoted.as_ref()).map_err(|e| domain_error(e.to_string()))?;
    print!("{}", report.render());
    Ok(())
}

fn cmd_fixtures(name: Option<&str>) -> Result<(), Failure> {
    match name {
        None => {
            for n in FIXTURE_NAMES {
                let t = load_fixture(n).expect("listed fixtures exist");
                println!("{n}\t{} utterances\t{} members", t.utterances.len(), t.team.members.len());
            }
        }
        Some(n) => {
            let t = load_fixture(n).map_err(|e| domain_error(e.to_string()))?;
            print!("{}", serialize_transcript(&t));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Match { path, pair, settings } => cmd_match(path, pair, settings),
        Command::Eval { path, provenance, settings } => cmd_eval(path, provenance.as_deref(), settings),
        Command::Fixtures { name } => cmd_fixtures(name.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

//! The `pdfa-forge` command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O or network error,
//! 3 limit exceeded.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use log::info;

use crate::alphabet::Alphabet;
use crate::automaton::{lm_equivalent, quotient, realize, Pdfa, QuotientPdfa, Verdict};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::learner::{learn, LearnerLimits};
use crate::model::{CachedModel, LanguageModel, LengthLimited, RemoteConfig, RemoteModel, SyntheticModel};
use crate::relation::{EquivalenceSpec, SimilaritySpec};
use crate::teacher::{EqOracle, EqSpec, ExactOracle, ExhaustiveOracle, SamplingOracle};
use crate::tolerance::{demo_recognizable_not_regular, enumerate_clique_partitions, quotient_by_cliques};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pdfa-forge", version, about = "Learn and compare quotient PDFA of language models")]
pub struct Cli {
    /// Seed for `sample:<n>:<maxlen>` oracles given without one.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Log level (error, warn, info, debug, trace).
    #[arg(long, global = true)]
    pub log: Option<String>,

    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// `key = value` file with defaults for the flags above and below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn the quotient of a model with L*.
    Learn(LearnArgs),
    /// Compute the quotient of a PDFA.
    Quotient {
        pdfa: String,
        #[arg(long)]
        equiv: Option<String>,
    },
    /// Check two PDFA for equivalence under an equivalence.
    Compare {
        a: String,
        b: String,
        #[arg(long)]
        equiv: Option<String>,
    },
    /// Enumerate clique partitions of a distribution list.
    Cliques {
        distributions: PathBuf,
        #[arg(long)]
        sim: Option<String>,
        /// Also report quotient sizes of this PDFA for each partition.
        #[arg(long)]
        pdfa: Option<String>,
    },
    /// Print a PDFA or quotient file as DOT.
    Export { file: String },
    /// Bounded demonstration of a recognizable but non-regular model.
    #[command(name = "demo-prop17")]
    DemoProp17 {
        #[arg(long)]
        bound: Option<usize>,
    },
}

#[derive(Debug, clap::Args)]
pub struct LearnArgs {
    /// PDFA file, `builtin:<name>` or an http(s) endpoint.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub equiv: Option<String>,
    /// `exact`, `sample:<n>:<maxlen>[:<seed>]` or `exhaustive:<maxlen>`.
    #[arg(long)]
    pub eq: Option<String>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub max_cells: Option<usize>,
    #[arg(long)]
    pub max_query_len: Option<usize>,
    /// Comma-separated symbols of a remote model.
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub renormalize: bool,
    /// Also write the learner trace as JSON lines.
    #[arg(long)]
    pub trace: bool,
}

const CONFIG_KEYS: &[&str] = &[
    "seed",
    "log",
    "out-dir",
    "model",
    "equiv",
    "eq",
    "max-rounds",
    "max-cells",
    "max-query-len",
    "alphabet",
    "timeout-ms",
    "renormalize",
    "trace",
    "sim",
    "bound",
];

/// Values from the `--config` file.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    /// One `key = value` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", n + 1)))?;
            let key = key.trim().to_string();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn pick<T: FromStr>(flag: Option<T>, config: &ConfigFile, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing --{key}")))
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Remote(_) => EXIT_IO,
        Error::BudgetExceeded(_) | Error::QueryTooLong { .. } => EXIT_LIMIT,
        _ => EXIT_CONFIG,
    }
}

/// Parses and runs a command line, writing user output to `out` and
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new()
        .parse_filters(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let config = match &cli.config {
        Some(path) => ConfigFile::parse(&fs::read_to_string(path)?)?,
        None => ConfigFile::default(),
    };
    let level = pick(cli.log.clone(), &config, "log")?.unwrap_or_else(|| "warn".into());
    init_logging(&level);
    let out_dir = pick(cli.out_dir.clone(), &config, "out-dir")?.unwrap_or_else(|| PathBuf::from("."));
    let seed = pick(cli.seed, &config, "seed")?.unwrap_or(0);

    match &cli.command {
        Command::Learn(args) => cmd_learn(args, &config, &out_dir, seed, out),
        Command::Quotient { pdfa, equiv } => {
            let e = parse_equiv(pick(equiv.clone(), &config, "equiv")?)?;
            cmd_quotient(pdfa, &e, &out_dir, out)
        }
        Command::Compare { a, b, equiv } => {
            let e = parse_equiv(pick(equiv.clone(), &config, "equiv")?)?;
            cmd_compare(a, b, &e, out)
        }
        Command::Cliques {
            distributions,
            sim,
            pdfa,
        } => {
            let s: SimilaritySpec = required(pick(sim.clone(), &config, "sim")?, "sim")?.parse()?;
            cmd_cliques(distributions, &s, pdfa.as_deref(), &out_dir, out)
        }
        Command::Export { file } => cmd_export(file, out),
        Command::DemoProp17 { bound } => {
            let bound = pick(*bound, &config, "bound")?.unwrap_or(21);
            cmd_demo(bound, out)
        }
    }
}

fn parse_equiv(text: Option<String>) -> Result<EquivalenceSpec> {
    required(text, "equiv")?.parse()
}

/// Loads a PDFA from a file path or `builtin:<name>`.
pub fn load_pdfa(source: &str) -> Result<Pdfa> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return fixtures::builtin_pdfa(name)
            .ok_or_else(|| Error::Config(format!("no bundled PDFA named `{name}`")));
    }
    Pdfa::from_json(&fs::read_to_string(source)?)
}

enum Source {
    Pdfa(Pdfa),
    Other(Arc<dyn LanguageModel>),
}

fn load_model(source: &str, args: &LearnArgs, config: &ConfigFile) -> Result<Source> {
    match source {
        "builtin:m1" => return Ok(Source::Other(Arc::new(SyntheticModel::m1()))),
        "builtin:m2" => return Ok(Source::Other(Arc::new(SyntheticModel::m2()))),
        _ => {}
    }
    if source.starts_with("http://") || source.starts_with("https://") {
        let symbols = required(pick(args.alphabet.clone(), config, "alphabet")?, "alphabet")?;
        let alphabet = Arc::new(Alphabet::new(symbols.split(',').map(str::trim))?);
        let mut remote = RemoteConfig::default().with_env()?;
        if let Some(ms) = pick(args.timeout_ms, config, "timeout-ms")? {
            remote.timeout = Duration::from_millis(ms);
        }
        remote.renormalize = args.renormalize || config.flag("renormalize")?;
        return Ok(Source::Other(Arc::new(RemoteModel::new(source, alphabet, remote))));
    }
    load_pdfa(source).map(Source::Pdfa)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn cmd_learn(args: &LearnArgs, config: &ConfigFile, out_dir: &Path, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let source = required(pick(args.model.clone(), config, "model")?, "model")?;
    let e = parse_equiv(pick(args.equiv.clone(), config, "equiv")?)?;
    let mut eq_text = pick(args.eq.clone(), config, "eq")?.unwrap_or_else(|| "exact".into());
    if eq_text.starts_with("sample:") && eq_text.matches(':').count() == 2 {
        eq_text = format!("{eq_text}:{seed}");
    }
    let eq: EqSpec = eq_text.parse()?;
    let defaults = LearnerLimits::default();
    let limits = LearnerLimits {
        max_rounds: pick(args.max_rounds, config, "max-rounds")?.unwrap_or(defaults.max_rounds),
        max_cells: pick(args.max_cells, config, "max-cells")?.unwrap_or(defaults.max_cells),
    };
    let max_query_len = pick(args.max_query_len, config, "max-query-len")?;

    let (target, raw): (Option<Pdfa>, Arc<dyn LanguageModel>) = match load_model(&source, args, config)? {
        Source::Pdfa(a) => (Some(a.clone()), Arc::new(a)),
        Source::Other(m) => (None, m),
    };
    let raw: Arc<dyn LanguageModel> = match max_query_len {
        Some(n) => Arc::new(LengthLimited::new(raw, n)),
        None => raw,
    };
    let model: Arc<dyn LanguageModel> = Arc::new(CachedModel::new(raw));
    let shared_e = Arc::new(e.clone());
    let teacher: Box<dyn EqOracle> = match &eq {
        EqSpec::Exact => {
            let target = target.ok_or_else(|| {
                Error::spec("exact", "the exact oracle needs a PDFA model; use sample or exhaustive")
            })?;
            Box::new(ExactOracle::new(target, shared_e))
        }
        EqSpec::Sample(cfg) => Box::new(SamplingOracle::new(Arc::clone(&model), shared_e, cfg.clone())?),
        EqSpec::Exhaustive(n) => Box::new(ExhaustiveOracle::new(Arc::clone(&model), shared_e, *n)),
    };

    info!("learning {source} under {e} with {eq}");
    let report = learn(model.as_ref(), &e, teacher.as_ref(), limits)?;
    if let Some(h) = &report.hypothesis {
        write_file(out_dir, "hypothesis.json", &h.to_json())?;
        write_file(out_dir, "hypothesis.dot", &h.to_dot())?;
        let realization = realize(h);
        write_file(out_dir, "realization.json", &realization.to_json())?;
        write_file(out_dir, "realization.dot", &realization.to_dot())?;
    }
    write_file(out_dir, "report.json", &pretty(&report.summary()))?;
    if args.trace || config.flag("trace")? {
        write_file(out_dir, "trace.jsonl", &report.trace_jsonl())?;
    }
    let states = report.hypothesis.as_ref().map_or(0, QuotientPdfa::num_states);
    if report.converged() {
        writeln!(
            out,
            "converged: {states} states after {} rounds, {} membership queries",
            report.rounds, report.mq_count
        )?;
        Ok(EXIT_OK)
    } else {
        writeln!(
            out,
            "not converged ({}): {states} states after {} rounds, {} membership queries",
            serde_json::to_value(report.outcome)?.as_str().unwrap_or("limit"),
            report.rounds,
            report.mq_count
        )?;
        Ok(EXIT_LIMIT)
    }
}

fn cmd_quotient(source: &str, e: &EquivalenceSpec, out_dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let a = load_pdfa(source)?;
    let h = quotient(&a, e)?;
    write_file(out_dir, "quotient.json", &h.to_json())?;
    write_file(out_dir, "quotient.dot", &h.to_dot())?;
    writeln!(out, "{} states", h.num_states())?;
    Ok(EXIT_OK)
}

fn cmd_compare(a: &str, b: &str, e: &EquivalenceSpec, out: &mut dyn Write) -> Result<i32> {
    let (a, b) = (load_pdfa(a)?, load_pdfa(b)?);
    match lm_equivalent(&a, &b, e)? {
        Verdict::Equivalent => writeln!(out, "equivalent")?,
        Verdict::Counterexample(w) => writeln!(out, "counterexample \"{}\"", a.alphabet().format_word(&w))?,
    }
    Ok(EXIT_OK)
}

fn cmd_cliques(
    path: &Path,
    s: &SimilaritySpec,
    pdfa: Option<&str>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let ds = fixtures::parse_distribution_list(&fs::read_to_string(path)?)?;
    let parts = enumerate_clique_partitions(&ds, s)?;
    let a = pdfa.map(load_pdfa).transpose()?;
    writeln!(out, "{} partitions under {s}", parts.len())?;
    let mut rows = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let states = a
            .as_ref()
            .map(|a| quotient_by_cliques(a, p).map(|h| h.num_states()))
            .transpose()?;
        match states {
            Some(n) => writeln!(out, "C{}  {p}  {n} states", i + 1)?,
            None => writeln!(out, "C{}  {p}", i + 1)?,
        }
        rows.push(serde_json::json!({ "blocks": p.blocks(), "states": states }));
    }
    let doc = serde_json::json!({ "similarity": s.to_string(), "partitions": rows });
    write_file(out_dir, "cliques.json", &pretty(&doc))?;
    Ok(EXIT_OK)
}

fn cmd_export(file: &str, out: &mut dyn Write) -> Result<i32> {
    if file.starts_with("builtin:") {
        write!(out, "{}", load_pdfa(file)?.to_dot())?;
        return Ok(EXIT_OK);
    }
    let text = fs::read_to_string(file)?;
    let dot = match Pdfa::from_json(&text) {
        Ok(a) => a.to_dot(),
        Err(_) => QuotientPdfa::from_json(&text)?.to_dot(),
    };
    write!(out, "{dot}")?;
    Ok(EXIT_OK)
}

fn cmd_demo(bound: usize, out: &mut dyn Write) -> Result<i32> {
    let r = demo_recognizable_not_regular(bound)?;
    writeln!(
        out,
        "triangular model vs one-state model under {}: {}",
        r.similarity,
        if r.tolerant { r.tolerance_verdict.as_str() } else { "violated" }
    )?;
    let words: Vec<String> = r.words.iter().map(|n| format!("a^{n}")).collect();
    writeln!(out, "words: {}", words.join(" "))?;
    for s in &r.separations {
        writeln!(
            out,
            "  a^{} / a^{} separated by \"{}\" (vd {:.2})",
            s.u, s.v, s.continuation, s.distance
        )?;
    }
    writeln!(out, "clique lower bound: {}", r.clique_lower_bound)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let c = ConfigFile::parse("# defaults\nseed = 7\nequiv=quant:3  # inline\n\n").unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(c.get::<String>("equiv").unwrap().as_deref(), Some("quant:3"));
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("seed").is_err());
        assert!(ConfigFile::parse("seed = x").unwrap().get::<u64>("seed").is_err());
    }

    #[test]
    fn flags_override_config() {
        let c = ConfigFile::parse("max-rounds = 5").unwrap();
        assert_eq!(pick(Some(9), &c, "max-rounds").unwrap(), Some(9));
        assert_eq!(pick::<usize>(None, &c, "max-rounds").unwrap(), Some(5));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Remote("down".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::QueryTooLong { len: 3, max: 2 }), EXIT_LIMIT);
        assert_eq!(exit_code(&Error::spec("x", "y")), EXIT_CONFIG);
    }
}

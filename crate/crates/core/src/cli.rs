//! Batch command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numerical failure (separation, non-convergence), 4 privacy denial.
//! Data goes to `--out` or standard output; diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::codegen::{self, SqlViewSpec};
use crate::featurize::{self, FeatureTable, FEATURE_COLUMNS};
use crate::glm::GlmError;
use crate::metrics;
use crate::pipeline::{self, GroupKey, ModelArtifact, ModelId, PipelineError};
use crate::privacy::{AuditLog, ColumnApproval, PrivacyError, PrivacyGate, PrivacyPolicy, DEFAULT_PURPOSE};
use crate::registry;
use crate::synthgen::{self, GenConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PRIVACY: i32 = 4;

const DEFAULT_AUDIT_FILE: &str = "audit.ndjson";
const DEFAULT_GENERATE_STUDENTS: u64 = 1_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
    Privacy(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Privacy(_) => EXIT_PRIVACY,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) | CliError::Privacy(m) => m,
        }
    }
}

impl From<GlmError> for CliError {
    fn from(e: GlmError) -> Self {
        if e.is_numerical_failure() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Glm(g) => g.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<PrivacyError> for CliError {
    fn from(e: PrivacyError) -> Self {
        match e {
            PrivacyError::Denied { .. } | PrivacyError::UnknownPurpose(_) => CliError::Privacy(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<featurize::FeatureError> for CliError {
    fn from(e: featurize::FeatureError) -> Self {
        match e {
            featurize::FeatureError::Unapproved(_) => CliError::Privacy(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_error!(
    registry::RegistryError,
    synthgen::GenError,
    metrics::MetricsError,
    codegen::CodegenError
);

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gradpath", version, about = "Graduation analytics over a student registry")]
struct Cli {
    /// Optional JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic registry (students.csv, study_rights.csv, credits.csv).
    Generate(GenerateArgs),
    /// Select the cohort and write the feature table.
    Extract(ExtractArgs),
    /// Fit PM1, PM2 or PM3 with backward elimination and write the artifact.
    Train(TrainArgs),
    /// Score every feature row with one model.
    Score(ScoreArgs),
    /// Two-stage prediction: PM2 classification, then PM3 time-to-degree.
    Predict(PredictArgs),
    /// Expected graduates per group (sum of predicted probabilities).
    Aggregate(AggregateArgs),
    /// Time-to-degree accuracy in semester bands.
    Evaluate(EvaluateArgs),
    /// Emit a SQL view embedding model coefficients.
    EmitSql(EmitSqlArgs),
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeatureInput {
    #[arg(long, value_name = "CSV")]
    features: Option<PathBuf>,
    /// Observation date of the feature table.
    #[arg(long, value_parser = parse_date_arg, value_name = "YYYY-MM-DD")]
    observation_date: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date_arg, value_name = "YYYY-MM-DD")]
    label_horizon: Option<NaiveDate>,
    #[command(flatten)]
    privacy: PrivacyArgs,
}

#[derive(Debug, Args)]
struct PrivacyArgs {
    #[arg(long, value_name = "JSON")]
    policy: Option<PathBuf>,
    #[arg(long)]
    purpose: Option<String>,
    #[arg(long, value_name = "PATH")]
    audit_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Generator configuration (JSON); a built-in example is used otherwise.
    #[arg(long, value_name = "JSON")]
    generator: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_students: Option<u64>,
    #[arg(long, value_parser = parse_date_arg, value_name = "YYYY-MM-DD")]
    observation_date: Option<NaiveDate>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Directory holding the registry CSV files.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    #[arg(long, value_parser = parse_date_arg, value_name = "YYYY-MM-DD")]
    observation_date: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date_arg, value_name = "YYYY-MM-DD")]
    label_horizon: Option<NaiveDate>,
    /// Additional column to request; checked against the privacy policy.
    #[arg(long = "extra-column", value_name = "NAME")]
    extra_columns: Vec<String>,
    #[command(flatten)]
    privacy: PrivacyArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// pm1, pm2 or pm3.
    #[arg(long)]
    model: ModelId,
    #[arg(long, value_parser = parse_alpha, value_name = "P")]
    alpha: Option<f64>,
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Model artifact (JSON).
    #[arg(long, value_name = "JSON")]
    model: PathBuf,
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct ModelPaths {
    #[arg(long, value_name = "JSON")]
    pm1: Option<PathBuf>,
    #[arg(long, value_name = "JSON")]
    pm2: Option<PathBuf>,
    #[arg(long, value_name = "JSON")]
    pm3: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    models: ModelPaths,
    #[arg(long, value_parser = parse_threshold, value_name = "P")]
    threshold: Option<f64>,
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    /// Logistic model artifact (JSON).
    #[arg(long, value_name = "JSON")]
    model: PathBuf,
    /// field, gender or all.
    #[arg(long, default_value = "field")]
    by: GroupKey,
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    models: ModelPaths,
    /// Comma-separated band widths in semesters.
    #[arg(long, value_delimiter = ',', value_name = "K,...")]
    bands: Option<Vec<u32>>,
    #[arg(long, value_parser = parse_threshold, value_name = "P")]
    threshold: Option<f64>,
    #[command(flatten)]
    input: FeatureInput,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct EmitSqlArgs {
    /// Single-model view from this artifact.
    #[arg(long, value_name = "JSON", conflicts_with_all = ["pm2", "pm3"])]
    model: Option<PathBuf>,
    /// Two-stage view: PM2 artifact.
    #[arg(long, value_name = "JSON", requires = "pm3")]
    pm2: Option<PathBuf>,
    /// Two-stage view: PM3 artifact.
    #[arg(long, value_name = "JSON", requires = "pm2")]
    pm3: Option<PathBuf>,
    #[arg(long, value_parser = parse_threshold, value_name = "P")]
    threshold: Option<f64>,
    #[arg(long, default_value = "graduation_predictions")]
    view: String,
    #[arg(long, default_value = "features")]
    source: String,
    #[arg(long, default_value = "study_right_id")]
    key: String,
    /// Map a model term to a source column, `term=column`.
    #[arg(long = "column", value_parser = parse_mapping, value_name = "TERM=COLUMN")]
    columns: Vec<(String, String)>,
    #[command(flatten)]
    out: OutArg,
}

/// Values that may come from `--config`; flags override them.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub observation_date: Option<NaiveDate>,
    pub label_horizon: Option<NaiveDate>,
    pub threshold: Option<f64>,
    pub alpha: Option<f64>,
    pub features: Option<PathBuf>,
    pub pm1: Option<PathBuf>,
    pub pm2: Option<PathBuf>,
    pub pm3: Option<PathBuf>,
    pub policy: Option<PathBuf>,
    pub purpose: Option<String>,
    pub audit_log: Option<PathBuf>,
    pub generator: Option<PathBuf>,
    pub seed: Option<u64>,
    pub bands: Option<Vec<u32>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if let Some(t) = self.threshold {
            check_threshold(t)?;
        }
        if let Some(a) = self.alpha {
            check_alpha(a)?;
        }
        if let (Some(o), Some(h)) = (self.observation_date, self.label_horizon) {
            if h < o {
                return Err(format!("label_horizon {h} precedes observation_date {o}"));
            }
        }
        Ok(())
    }
}

fn parse_date_arg(s: &str) -> std::result::Result<NaiveDate, String> {
    registry::parse_date(s)
}

fn check_threshold(t: f64) -> std::result::Result<f64, String> {
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("threshold must be in [0, 1], got {t}"))
    }
}

fn check_alpha(a: f64) -> std::result::Result<f64, String> {
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must be in (0, 1), got {a}"))
    }
}

fn parse_threshold(s: &str) -> std::result::Result<f64, String> {
    check_threshold(s.parse::<f64>().map_err(|e| e.to_string())?)
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    check_alpha(s.parse::<f64>().map_err(|e| e.to_string())?)
}

fn parse_mapping(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((t, c)) if !t.is_empty() && !c.is_empty() => Ok((t.to_string(), c.to_string())),
        _ => Err(format!("expected TERM=COLUMN, got `{s}`")),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::Data)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => generate(a, &config),
        Command::Extract(a) => extract(a, &config),
        Command::Train(a) => train(a, &config),
        Command::Score(a) => score(a, &config),
        Command::Predict(a) => predict(a, &config),
        Command::Aggregate(a) => aggregate(a, &config),
        Command::Evaluate(a) => evaluate(a, &config),
        Command::EmitSql(a) => emit_sql(a, &config),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Usage(format!("{flag} is required (flag or --config)")))
}

/// Writes `bytes` to `out`, or to standard output.
fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

fn load_policy(args: &PrivacyArgs, config: &RunConfig) -> Result<PrivacyPolicy> {
    match args.policy.as_ref().or(config.policy.as_ref()) {
        Some(path) => Ok(PrivacyPolicy::load(path)?),
        None => Ok(PrivacyPolicy::default()),
    }
}

fn open_gate(args: &PrivacyArgs, config: &RunConfig, audit: Option<PathBuf>) -> Result<PrivacyGate> {
    let policy = load_policy(args, config)?;
    let log = match audit {
        Some(path) => AuditLog::with_file(&path)?,
        None => AuditLog::in_memory(),
    };
    Ok(PrivacyGate::new(policy, log)?)
}

fn purpose<'a>(args: &'a PrivacyArgs, config: &'a RunConfig) -> &'a str {
    args.purpose
        .as_deref()
        .or(config.purpose.as_deref())
        .unwrap_or(DEFAULT_PURPOSE)
}

fn approve_features(
    args: &PrivacyArgs,
    config: &RunConfig,
    operation: &str,
) -> Result<ColumnApproval> {
    let audit = args.audit_log.clone().or_else(|| config.audit_log.clone());
    let mut gate = open_gate(args, config, audit)?;
    Ok(gate.check_columns(operation, &FEATURE_COLUMNS, purpose(args, config))?)
}

fn read_features(
    input: &FeatureInput,
    config: &RunConfig,
    operation: &str,
    default_observation: Option<NaiveDate>,
) -> Result<FeatureTable> {
    let path = required(input.features.as_ref().or(config.features.as_ref()), "--features")?;
    let observation = input
        .observation_date
        .or(config.observation_date)
        .or(default_observation);
    let observation = required(observation, "--observation-date")?;
    let horizon = input.label_horizon.or(config.label_horizon);
    let approval = approve_features(&input.privacy, config, operation)?;
    let file = fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(FeatureTable::read_csv(
        std::io::BufReader::new(file),
        observation,
        horizon,
        &approval,
    )?)
}

fn load_model(path: &Path) -> Result<ModelArtifact> {
    Ok(pipeline::load_artifact(path)?)
}

fn generate(a: GenerateArgs, config: &RunConfig) -> Result<()> {
    let out = required(a.out, "--out")?;
    let mut gen = match a.generator.as_ref().or(config.generator.as_ref()) {
        Some(path) => GenConfig::load(path)?,
        None => GenConfig::example(DEFAULT_GENERATE_STUDENTS, 0),
    };
    if let Some(n) = a.n_students {
        gen.n_students = n;
    }
    if let Some(d) = a.observation_date.or(config.observation_date) {
        gen.observation_date = d;
    }
    let seed = a.seed.or(config.seed).unwrap_or(gen.seed);
    gen.seed = seed;
    let registry = synthgen::generate_population(&gen, seed)?;
    fs::create_dir_all(&out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    synthgen::write_registry(&registry, &out)?;
    log::info!(
        "generated {} students, {} credit events into {}",
        registry.students().len(),
        registry.credit_events().len(),
        out.display()
    );
    Ok(())
}

fn extract(a: ExtractArgs, config: &RunConfig) -> Result<()> {
    let mut requested: Vec<String> = FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect();
    requested.extend(a.extra_columns.iter().cloned());
    let audit = a
        .privacy
        .audit_log
        .clone()
        .or_else(|| config.audit_log.clone())
        .unwrap_or_else(|| match &a.out.out {
            Some(out) => out
                .parent()
                .unwrap_or(Path::new(""))
                .join(DEFAULT_AUDIT_FILE),
            None => PathBuf::from(DEFAULT_AUDIT_FILE),
        });
    let mut gate = open_gate(&a.privacy, config, Some(audit))?;
    let approval = gate.check_columns("extract", &requested, purpose(&a.privacy, config))?;

    let data = required(a.data.as_ref().or(config.data_dir.as_ref()), "--data")?;
    let observation = required(a.observation_date.or(config.observation_date), "--observation-date")?;
    let horizon = a.label_horizon.or(config.label_horizon);
    let registry = registry::load_registry_dir(data)?;
    let table = featurize::extract_features(&registry, observation, horizon, &approval)?;
    log::info!("extracted {} cohort rows at {observation}", table.len());
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    emit(&a.out.out, &buf)
}

fn train(a: TrainArgs, config: &RunConfig) -> Result<()> {
    let alpha = a.alpha.or(config.alpha).unwrap_or(pipeline::DEFAULT_ALPHA);
    let table = read_features(&a.input, config, "train", None)?;
    let artifact = pipeline::train_model(a.model, &table, alpha)?;
    if !artifact.dropped_terms.is_empty() {
        log::info!("dropped terms: {}", artifact.dropped_terms.join(", "));
    }
    emit(&a.out.out, artifact.to_json()?.as_bytes())
}

fn score(a: ScoreArgs, config: &RunConfig) -> Result<()> {
    let model = load_model(&a.model)?;
    let table = read_features(&a.input, config, "score", Some(model.observation_date))?;
    let mut buf = Vec::new();
    pipeline::write_scores(&model, &table, &mut buf)?;
    emit(&a.out.out, &buf)
}

fn optional_model(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> Result<Option<ModelArtifact>> {
    flag.as_ref().or(config.as_ref()).map(|p| load_model(p)).transpose()
}

fn predict(a: PredictArgs, config: &RunConfig) -> Result<()> {
    let pm1 = optional_model(&a.models.pm1, &config.pm1)?;
    let pm2 = load_model(required(a.models.pm2.as_ref().or(config.pm2.as_ref()), "--pm2")?)?;
    let pm3 = load_model(required(a.models.pm3.as_ref().or(config.pm3.as_ref()), "--pm3")?)?;
    let threshold = a
        .threshold
        .or(config.threshold)
        .unwrap_or(pipeline::DEFAULT_THRESHOLD);
    let table = read_features(&a.input, config, "predict", Some(pm2.observation_date))?;
    let outcomes = pipeline::predict_table(pm1.as_ref(), &pm2, &pm3, &table, threshold)?;
    let mut buf = Vec::new();
    pipeline::write_predictions(&outcomes, &mut buf)?;
    emit(&a.out.out, &buf)
}

fn aggregate(a: AggregateArgs, config: &RunConfig) -> Result<()> {
    let model = load_model(&a.model)?;
    let table = read_features(&a.input, config, "aggregate", Some(model.observation_date))?;
    let groups = pipeline::expected_graduates(&model, &table, a.by)?;
    let mut buf = Vec::new();
    pipeline::write_groups(&groups, &mut buf)?;
    emit(&a.out.out, &buf)
}

fn evaluate(a: EvaluateArgs, config: &RunConfig) -> Result<()> {
    let pm3 = load_model(required(a.models.pm3.as_ref().or(config.pm3.as_ref()), "--pm3")?)?;
    let pm2 = optional_model(&a.models.pm2, &config.pm2)?;
    let bands = a
        .bands
        .or_else(|| config.bands.clone())
        .unwrap_or_else(|| vec![0, 1, 2]);
    let table = read_features(&a.input, config, "evaluate", Some(pm3.observation_date))?;

    let mut predicted = Vec::new();
    let mut actual = Vec::new();
    for row in &table.rows {
        if let (Some(1), Some(s)) = (row.graduates_in_4y, row.semesters_to_degree) {
            predicted.push(pipeline::score(&pm3, row)?);
            actual.push(i64::from(s));
        }
    }
    let report = metrics::precision_bands(&predicted, &actual, &bands)?;
    eprint!("{report}");

    if let Some(pm2) = pm2 {
        let threshold = a
            .threshold
            .or(config.threshold)
            .unwrap_or(pipeline::DEFAULT_THRESHOLD);
        let mut probs = Vec::with_capacity(table.len());
        let mut labels = Vec::with_capacity(table.len());
        for row in &table.rows {
            if let Some(y) = row.graduates_in_4y {
                probs.push(pipeline::score(&pm2, row)?);
                labels.push(y);
            }
        }
        let counts = metrics::confusion_counts(&probs, &labels, threshold)?;
        eprint!("{counts}");
    }

    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(&a.out.out, &buf)
}

fn emit_sql(a: EmitSqlArgs, config: &RunConfig) -> Result<()> {
    let mut spec = SqlViewSpec::new(&a.view, &a.source, &a.key);
    for (term, column) in a.columns {
        spec.columns.insert(term, column);
    }
    if let Some(t) = a.threshold.or(config.threshold) {
        spec.threshold = t;
    }
    let sql = match a.model {
        Some(path) => codegen::emit_sql_view(&load_model(&path)?, &spec)?,
        None => {
            let pm2 = required(a.pm2.as_ref().or(config.pm2.as_ref()), "--model or --pm2")?;
            let pm3 = required(a.pm3.as_ref().or(config.pm3.as_ref()), "--pm3")?;
            codegen::emit_two_stage_sql(&load_model(pm2)?, &load_model(pm3)?, &spec)?
        }
    };
    emit(&a.out.out, sql.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(parse_threshold("0.5"), Ok(0.5));
        assert!(parse_threshold("1.5").is_err());
        assert!(parse_threshold("NaN").is_err());
        assert!(parse_alpha("0").is_err());
        assert!(parse_alpha("1").is_err());
        assert_eq!(parse_alpha("0.05"), Ok(0.05));
        assert_eq!(parse_mapping("sum_of_cr=credits"), Ok(("sum_of_cr".into(), "credits".into())));
        assert!(parse_mapping("sum_of_cr").is_err());
    }

    #[test]
    fn error_classes() {
        let sep = GlmError::Separation {
            iterations: 3,
            max_abs_coefficient: 2e3,
        };
        assert_eq!(CliError::from(sep).exit_code(), EXIT_NUMERICAL);
        assert_eq!(CliError::from(GlmError::SingleClass).exit_code(), EXIT_DATA);
        let denied = PrivacyError::Denied {
            columns: vec!["ethnicity".into()],
        };
        assert_eq!(CliError::from(denied).exit_code(), EXIT_PRIVACY);
    }

    #[test]
    fn usage_and_help() {
        assert_eq!(run(["gradpath", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["gradpath", "train", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["gradpath", "--help"]), EXIT_OK);
        assert_eq!(run(["gradpath", "predict", "--threshold", "2", "--pm2", "a", "--pm3", "b"]), EXIT_USAGE);
    }

    #[test]
    fn config_validation() {
        let cfg = RunConfig {
            threshold: Some(1.2),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            alpha: Some(1.0),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

//! Model training, scoring, two-stage prediction, group-level aggregation and
//! artifact persistence.
//!
//! Fitted artifacts and the published coefficient fixtures go through the same
//! [`score`] path.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Months, NaiveDate, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::{Covariates, FeatureRow, FeatureTable, COVARIATE_COLUMNS, MODEL_COVARIATES};
use crate::glm::{self, DesignMatrix, Family, GlmError, RSquaredKind, CONSTANT};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// PM1 treats students still without a degree this long after observation as non-graduates.
pub const PM1_MIN_HORIZON_YEARS: u32 = 8;
pub const FOUR_YEARS_OR_MORE: &str = "four years or more";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("model {model} needs label `{label}`, which is missing from the feature table")]
    MissingLabel { model: String, label: &'static str },
    #[error("no training rows for model {0}")]
    EmptyTrainingSet(String),
    #[error("missing covariate value for term `{0}`")]
    MissingCovariate(String),
    #[error("model {model} is {found}, expected {expected}")]
    WrongFamily {
        model: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("threshold must be a finite number, got {0}")]
    InvalidThreshold(f64),
    #[error("unknown term `{0}` (not a covariate column)")]
    UnknownTerm(String),
    #[error("artifact schema_version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u64, expected: u32 },
    #[error("invalid artifact: {0}")]
    InvalidArtifact(String),
    #[error("custom model `{0}` needs an explicit training spec")]
    CustomModel(String),
    #[error(transparent)]
    Glm(#[from] GlmError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("artifact json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum ModelId {
    Pm1,
    Pm2,
    Pm3,
    Custom(String),
}

impl ModelId {
    pub fn as_str(&self) -> &str {
        match self {
            ModelId::Pm1 => "PM1",
            ModelId::Pm2 => "PM2",
            ModelId::Pm3 => "PM3",
            ModelId::Custom(s) => s,
        }
    }

    /// Family fixed by the standard model ids.
    pub fn standard_family(&self) -> Option<Family> {
        match self {
            ModelId::Pm1 | ModelId::Pm2 => Some(Family::Logistic),
            ModelId::Pm3 => Some(Family::Linear),
            ModelId::Custom(_) => None,
        }
    }

    /// Name of the score column for this model.
    pub fn output_column(&self) -> &'static str {
        match self {
            ModelId::Pm1 => "p_graduate",
            ModelId::Pm2 => "p_graduate_4y",
            ModelId::Pm3 => "time_to_degree",
            ModelId::Custom(_) => "score",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<String> for ModelId {
    fn from(s: String) -> Self {
        match s.to_ascii_uppercase().as_str() {
            "PM1" => ModelId::Pm1,
            "PM2" => ModelId::Pm2,
            "PM3" => ModelId::Pm3,
            _ => ModelId::Custom(s),
        }
    }
}

impl FromStr for ModelId {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(ModelId::from(s.to_string()))
    }
}

impl From<ModelId> for String {
    fn from(id: ModelId) -> Self {
        id.as_str().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RSquared {
    pub value: f64,
    pub kind: RSquaredKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub model_id: ModelId,
    pub family: Family,
    pub coefficients: IndexMap<String, f64>,
    pub dropped_terms: Vec<String>,
    pub observation_date: NaiveDate,
    pub n: u64,
    pub r_squared: RSquared,
    pub created_at: DateTime<Utc>,
    pub schema_version: u32,
}

impl ModelArtifact {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(PipelineError::SchemaVersion {
                found: self.schema_version.into(),
                expected: SCHEMA_VERSION,
            });
        }
        if !self.coefficients.contains_key(CONSTANT) {
            return Err(PipelineError::InvalidArtifact(format!(
                "coefficients must include `{CONSTANT}`"
            )));
        }
        for (term, value) in &self.coefficients {
            if term != CONSTANT && !COVARIATE_COLUMNS.contains(&term.as_str()) {
                return Err(PipelineError::UnknownTerm(term.clone()));
            }
            if !value.is_finite() {
                return Err(PipelineError::InvalidArtifact(format!(
                    "coefficient for `{term}` is not finite"
                )));
            }
        }
        for term in &self.dropped_terms {
            if !COVARIATE_COLUMNS.contains(&term.as_str()) {
                return Err(PipelineError::UnknownTerm(term.clone()));
            }
        }
        if let Some(expected) = self.model_id.standard_family() {
            if expected != self.family {
                return Err(PipelineError::WrongFamily {
                    model: self.model_id.to_string(),
                    expected: expected.name(),
                    found: self.family.name(),
                });
            }
        }
        Ok(())
    }

    /// Non-constant terms in artifact order.
    pub fn covariate_terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.coefficients
            .iter()
            .filter(|(t, _)| t.as_str() != CONSTANT)
            .map(|(t, v)| (t.as_str(), *v))
    }

    pub fn constant(&self) -> f64 {
        self.coefficients[CONSTANT]
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(PipelineError::SchemaVersion {
                    found: v,
                    expected: SCHEMA_VERSION,
                })
            }
            None => {
                return Err(PipelineError::InvalidArtifact(
                    "missing integer `schema_version`".into(),
                ))
            }
        }
        let artifact: ModelArtifact = serde_json::from_value(raw)?;
        artifact.validate()?;
        Ok(artifact)
    }
}

pub fn save_artifact(artifact: &ModelArtifact, path: &Path) -> Result<()> {
    artifact.validate()?;
    std::fs::write(path, artifact.to_json()?).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_artifact(path: &Path) -> Result<ModelArtifact> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ModelArtifact::from_json(&text)
}

/// Published reference values. These depend on a private registry; they are
/// kept as fixture metadata and documentation, not as test targets.
pub mod published {
    use super::*;

    /// Training set sizes of PM1, PM2, PM3.
    pub const N: [u64; 3] = [8546, 10730, 4168];
    /// Reported R² of PM1, PM2 (statistic not named) and PM3 (coefficient of determination).
    pub const R_SQUARED: [f64; 3] = [0.1456, 0.4156, 0.404];
    /// Share of PM3 predictions within 0, ±1 and ±2 semesters, in percent.
    pub const PRECISION_BANDS: [(u32, f64); 3] = [(0, 19.5), (1, 54.9), (2, 78.9)];

    pub const PM1: [(&str, f64); 7] = [
        ("constant", -0.8304),
        ("gender_male", -0.2643),
        ("field_arts_and_design", -1.0129),
        ("field_engineering", -0.3026),
        ("no_credits_in_18m", -2.7880),
        ("sum_of_cr", 0.0101),
        ("distance_to_validity_end", 0.1925),
    ];
    pub const PM2: [(&str, f64); 5] = [
        ("constant", -3.2970),
        ("gender_male", -0.3869),
        ("field_arts_and_design", -1.0453),
        ("no_credits_in_18m", -2.0927),
        ("sum_of_cr", 0.0188),
    ];
    pub const PM3: [(&str, f64); 5] = [
        ("constant", 6.6596),
        ("gender_male", 0.3095),
        ("field_arts_and_design", 0.3532),
        ("sum_of_cr", -0.0132),
        ("distance_to_validity_end", 0.3408),
    ];

    /// Artifact carrying the published coefficients of PM1, PM2 or PM3.
    pub fn artifact(id: &ModelId) -> Option<ModelArtifact> {
        let (idx, coefs, dropped, obs): (usize, &[(&str, f64)], &[&str], (i32, u32, u32)) = match id {
            ModelId::Pm1 => (0, &PM1, &[], (2009, 8, 1)),
            ModelId::Pm2 => (
                1,
                &PM2,
                &["field_engineering", "distance_to_validity_end"],
                (2013, 8, 1),
            ),
            ModelId::Pm3 => (
                2,
                &PM3,
                &["field_engineering", "no_credits_in_18m"],
                (2013, 8, 1),
            ),
            ModelId::Custom(_) => return None,
        };
        let family = id.standard_family()?;
        let observation_date = NaiveDate::from_ymd_opt(obs.0, obs.1, obs.2)?;
        Some(ModelArtifact {
            model_id: id.clone(),
            family,
            coefficients: coefs.iter().map(|(t, v)| (t.to_string(), *v)).collect(),
            dropped_terms: dropped.iter().map(|t| t.to_string()).collect(),
            observation_date,
            n: N[idx],
            r_squared: RSquared {
                value: R_SQUARED[idx],
                kind: match family {
                    Family::Logistic => RSquaredKind::Unspecified,
                    Family::Linear => RSquaredKind::CoefficientOfDetermination,
                },
            },
            created_at: observation_date.and_hms_opt(0, 0, 0)?.and_utc(),
            schema_version: SCHEMA_VERSION,
        })
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Linear predictor `β₀ + Σ βⱼ xⱼ` over the artifact's terms.
pub fn linear_predictor<C: Covariates + ?Sized>(artifact: &ModelArtifact, row: &C) -> Result<f64> {
    let mut z = artifact.constant();
    for (term, beta) in artifact.covariate_terms() {
        let x = row
            .covariate(term)
            .ok_or_else(|| PipelineError::MissingCovariate(term.to_string()))?;
        z += beta * x;
    }
    Ok(z)
}

/// Probability for logistic artifacts, the linear predictor for linear ones.
pub fn score<C: Covariates + ?Sized>(artifact: &ModelArtifact, row: &C) -> Result<f64> {
    let z = linear_predictor(artifact, row)?;
    Ok(match artifact.family {
        Family::Logistic => sigmoid(z),
        Family::Linear => z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Numeric,
    FourYearsOrMore,
}

impl Category {
    /// Machine-readable code used in prediction files.
    pub fn code(self) -> &'static str {
        match self {
            Category::Numeric => "numeric",
            Category::FourYearsOrMore => "four_years_or_more",
        }
    }

    /// Human-readable phrase used in SQL views and reports.
    pub fn label(self) -> &'static str {
        match self {
            Category::Numeric => "numeric",
            Category::FourYearsOrMore => FOUR_YEARS_OR_MORE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionOutcome {
    pub study_right_id: String,
    pub p_graduate: Option<f64>,
    pub p_graduate_4y: f64,
    /// Semesters; present iff `category` is numeric.
    pub time_to_degree: Option<f64>,
    pub category: Category,
}

fn require_family(artifact: &ModelArtifact, family: Family) -> Result<()> {
    if artifact.family != family {
        return Err(PipelineError::WrongFamily {
            model: artifact.model_id.to_string(),
            expected: family.name(),
            found: artifact.family.name(),
        });
    }
    Ok(())
}

/// Classifies with `pm2`, then predicts time-to-degree with `pm3` for rows
/// with `p ≥ threshold`; others are "four years or more".
pub fn predict_two_stage(
    pm2: &ModelArtifact,
    pm3: &ModelArtifact,
    row: &FeatureRow,
    threshold: f64,
) -> Result<PredictionOutcome> {
    require_family(pm2, Family::Logistic)?;
    require_family(pm3, Family::Linear)?;
    if threshold.is_nan() {
        return Err(PipelineError::InvalidThreshold(threshold));
    }
    let p = score(pm2, row)?;
    let (time_to_degree, category) = if p >= threshold {
        (Some(score(pm3, row)?), Category::Numeric)
    } else {
        (None, Category::FourYearsOrMore)
    };
    Ok(PredictionOutcome {
        study_right_id: row.study_right_id.clone(),
        p_graduate: None,
        p_graduate_4y: p,
        time_to_degree,
        category,
    })
}

/// Two-stage predictions for a whole table, with PM1 probabilities when given.
pub fn predict_table(
    pm1: Option<&ModelArtifact>,
    pm2: &ModelArtifact,
    pm3: &ModelArtifact,
    table: &FeatureTable,
    threshold: f64,
) -> Result<Vec<PredictionOutcome>> {
    if let Some(m) = pm1 {
        require_family(m, Family::Logistic)?;
    }
    table
        .rows
        .iter()
        .map(|row| {
            let mut out = predict_two_stage(pm2, pm3, row, threshold)?;
            out.p_graduate = pm1.map(|m| score(m, row)).transpose()?;
            Ok(out)
        })
        .collect()
}

pub fn write_predictions<W: Write>(outcomes: &[PredictionOutcome], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["study_right_id", "p_graduate", "p_graduate_4y", "time_to_degree", "category"])?;
    for o in outcomes {
        out.write_record([
            o.study_right_id.clone(),
            o.p_graduate.map(|v| v.to_string()).unwrap_or_default(),
            o.p_graduate_4y.to_string(),
            o.time_to_degree.map(|v| v.to_string()).unwrap_or_default(),
            o.category.code().to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `study_right_id,<model output column>` for every row.
pub fn write_scores<W: Write>(artifact: &ModelArtifact, table: &FeatureTable, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["study_right_id", artifact.model_id.output_column()])?;
    for row in &table.rows {
        out.write_record([row.study_right_id.clone(), score(artifact, row)?.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Field,
    Gender,
    All,
}

impl FromStr for GroupKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "field" => Ok(GroupKey::Field),
            "gender" => Ok(GroupKey::Gender),
            "all" => Ok(GroupKey::All),
            other => Err(format!("unknown group key `{other}` (expected field, gender or all)")),
        }
    }
}

impl GroupKey {
    fn group_of(self, row: &FeatureRow) -> &'static str {
        match self {
            GroupKey::Field => row.field().code(),
            GroupKey::Gender => row.gender().name(),
            GroupKey::All => "all",
        }
    }
}

/// Expected number of graduates per group: the sum of scored probabilities.
pub fn expected_graduates(
    artifact: &ModelArtifact,
    table: &FeatureTable,
    group_key: GroupKey,
) -> Result<BTreeMap<String, f64>> {
    require_family(artifact, Family::Logistic)?;
    let mut out = BTreeMap::new();
    for row in &table.rows {
        let p = score(artifact, row)?;
        *out.entry(group_key.group_of(row).to_string()).or_insert(0.0) += p;
    }
    Ok(out)
}

pub fn write_groups<W: Write>(groups: &BTreeMap<String, f64>, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["group", "expected_graduates"])?;
    for (g, v) in groups {
        out.write_record([g.clone(), v.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Label column a model is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Graduated,
    GraduatesIn4y,
    /// Semesters to degree among rows with `graduates_in_4y = 1`.
    SemestersToDegreeIn4y,
}

impl Label {
    fn name(self) -> &'static str {
        match self {
            Label::Graduated => "graduated",
            Label::GraduatesIn4y => "graduates_in_4y",
            Label::SemestersToDegreeIn4y => "semesters_to_degree",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub model_id: ModelId,
    pub family: Family,
    pub label: Label,
    pub covariates: Vec<String>,
    pub alpha: f64,
}

impl TrainSpec {
    /// Standard spec for PM1, PM2 or PM3 with the full covariate set.
    pub fn standard(model_id: ModelId, alpha: f64) -> Result<Self> {
        let (family, label) = match model_id {
            ModelId::Pm1 => (Family::Logistic, Label::Graduated),
            ModelId::Pm2 => (Family::Logistic, Label::GraduatesIn4y),
            ModelId::Pm3 => (Family::Linear, Label::SemestersToDegreeIn4y),
            ModelId::Custom(id) => return Err(PipelineError::CustomModel(id)),
        };
        Ok(TrainSpec {
            model_id,
            family,
            label,
            covariates: MODEL_COVARIATES.iter().map(|s| s.to_string()).collect(),
            alpha,
        })
    }
}

/// Trains PM1, PM2 or PM3 with backward elimination at `alpha`.
pub fn train_model(model_id: ModelId, table: &FeatureTable, alpha: f64) -> Result<ModelArtifact> {
    train_with(&TrainSpec::standard(model_id, alpha)?, table)
}

/// Builds the design for `spec` from `table`: selected rows, covariates, response.
pub fn training_design(spec: &TrainSpec, table: &FeatureTable) -> Result<DesignMatrix> {
    let missing = || PipelineError::MissingLabel {
        model: spec.model_id.to_string(),
        label: spec.label.name(),
    };
    let mut rows: Vec<(&FeatureRow, f64)> = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        match spec.label {
            Label::Graduated => rows.push((row, f64::from(row.graduated.ok_or_else(missing)?))),
            Label::GraduatesIn4y => {
                rows.push((row, f64::from(row.graduates_in_4y.ok_or_else(missing)?)))
            }
            Label::SemestersToDegreeIn4y => {
                if row.graduates_in_4y.ok_or_else(missing)? == 1 {
                    let s = row.semesters_to_degree.ok_or_else(missing)?;
                    rows.push((row, f64::from(s)));
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(PipelineError::EmptyTrainingSet(spec.model_id.to_string()));
    }
    let mut columns = Vec::with_capacity(spec.covariates.len());
    for name in &spec.covariates {
        let values = rows
            .iter()
            .map(|(r, _)| r.covariate(name).ok_or_else(|| PipelineError::UnknownTerm(name.clone())))
            .collect::<Result<Vec<f64>>>()?;
        columns.push((name.clone(), values));
    }
    let response = rows.iter().map(|(_, y)| *y).collect();
    Ok(DesignMatrix::with_constant(columns, response)?)
}

pub fn train_with(spec: &TrainSpec, table: &FeatureTable) -> Result<ModelArtifact> {
    if spec.model_id == ModelId::Pm1 {
        let min_horizon = table
            .observation_date
            .checked_add_months(Months::new(12 * PM1_MIN_HORIZON_YEARS));
        match (table.label_horizon, min_horizon) {
            (Some(h), Some(min)) if h < min => log::warn!(
                "PM1 label horizon {h} is less than {PM1_MIN_HORIZON_YEARS} years after the observation date; late graduates will count as non-graduates"
            ),
            (None, _) => log::warn!("PM1 label horizon unknown; cannot check the {PM1_MIN_HORIZON_YEARS}-year observation window"),
            _ => {}
        }
    }
    let design = training_design(spec, table)?;
    let fit = glm::backward_eliminate(&design, spec.family, spec.alpha)?;
    let artifact = ModelArtifact {
        model_id: spec.model_id.clone(),
        family: spec.family,
        coefficients: fit.coefficients,
        dropped_terms: fit.dropped_terms,
        observation_date: table.observation_date,
        n: fit.n as u64,
        r_squared: RSquared {
            value: fit.r_squared,
            kind: fit.r_squared_kind,
        },
        created_at: table
            .observation_date
            .and_hms_opt(0, 0, 0)
            .expect("midnight")
            .and_utc(),
        schema_version: SCHEMA_VERSION,
    };
    artifact.validate()?;
    Ok(artifact)
}

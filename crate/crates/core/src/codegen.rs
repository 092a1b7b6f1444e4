//! SQL view generation for scoring inside a warehouse.
//!
//! Emitted SQL is plain ANSI: arithmetic, `EXP`, `CASE WHEN` and a derived
//! table. Coefficients are printed as the shortest decimal that parses back
//! to the same `f64`, so the view computes the same linear predictor as the
//! in-process scorer.

use indexmap::IndexMap;
use thiserror::Error;

use crate::featurize::COVARIATE_COLUMNS;
use crate::glm::Family;
use crate::pipeline::{ModelArtifact, DEFAULT_THRESHOLD, FOUR_YEARS_OR_MORE};

#[derive(Debug, Error, PartialEq)]
pub enum CodegenError {
    #[error("term `{0}` has no column mapping")]
    UnmappedTerm(String),
    #[error("invalid SQL identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("model {model} is {found}, expected {expected}")]
    WrongFamily {
        model: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("threshold must be finite, got {0}")]
    InvalidThreshold(f64),
}

pub type Result<T, E = CodegenError> = std::result::Result<T, E>;

/// Rendering of dialect-sensitive pieces. Only ANSI is provided; other
/// dialects can implement this trait.
pub trait SqlDialect {
    fn exp(&self, arg: &str) -> String;

    fn number(&self, value: f64) -> String {
        let mut s = value.to_string();
        if !s.contains('.') {
            s.push_str(".0");
        }
        s
    }

    fn string_literal(&self, value: &str) -> String {
        format!("'{}'", value.replace('\'', "''"))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Ansi;

impl SqlDialect for Ansi {
    fn exp(&self, arg: &str) -> String {
        format!("EXP({arg})")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqlViewSpec {
    pub view_name: String,
    pub source_table: String,
    pub key_column: String,
    /// Term name → source column name.
    pub columns: IndexMap<String, String>,
    /// Two-stage views only.
    pub threshold: f64,
}

impl SqlViewSpec {
    /// Spec whose covariate columns carry the same names as the model terms.
    pub fn new(view_name: &str, source_table: &str, key_column: &str) -> Self {
        SqlViewSpec {
            view_name: view_name.to_string(),
            source_table: source_table.to_string(),
            key_column: key_column.to_string(),
            columns: COVARIATE_COLUMNS
                .iter()
                .map(|c| (c.to_string(), c.to_string()))
                .collect(),
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for ident in [&self.view_name, &self.source_table, &self.key_column]
            .into_iter()
            .chain(self.columns.values())
        {
            if !is_identifier(ident) {
                return Err(CodegenError::InvalidIdentifier(ident.clone()));
            }
        }
        if !self.threshold.is_finite() {
            return Err(CodegenError::InvalidThreshold(self.threshold));
        }
        Ok(())
    }

    fn column_for(&self, term: &str) -> Result<&str> {
        self.columns
            .get(term)
            .map(String::as_str)
            .ok_or_else(|| CodegenError::UnmappedTerm(term.to_string()))
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `c0 + c1*col1 + …` in artifact term order.
pub fn linear_expression(
    artifact: &ModelArtifact,
    spec: &SqlViewSpec,
    dialect: &dyn SqlDialect,
) -> Result<String> {
    let mut out = dialect.number(artifact.constant());
    for (term, beta) in artifact.covariate_terms() {
        let column = spec.column_for(term)?;
        out.push_str(&format!(" + {}*{}", dialect.number(beta), column));
    }
    Ok(out)
}

/// Score expression: `EXP(z)/(1+EXP(z))` for logistic models, `z` for linear.
pub fn score_expression(
    artifact: &ModelArtifact,
    spec: &SqlViewSpec,
    dialect: &dyn SqlDialect,
) -> Result<String> {
    let z = linear_expression(artifact, spec, dialect)?;
    Ok(match artifact.family {
        Family::Linear => z,
        Family::Logistic => {
            let e = dialect.exp(&z);
            format!("{e}/(1+{e})")
        }
    })
}

pub fn emit_sql_view(artifact: &ModelArtifact, spec: &SqlViewSpec) -> Result<String> {
    emit_sql_view_with(artifact, spec, &Ansi)
}

pub fn emit_sql_view_with(
    artifact: &ModelArtifact,
    spec: &SqlViewSpec,
    dialect: &dyn SqlDialect,
) -> Result<String> {
    spec.validate()?;
    let expr = score_expression(artifact, spec, dialect)?;
    Ok(format!(
        "CREATE VIEW {view} AS\nSELECT\n    {key},\n    {expr} AS {out}\nFROM {src};\n",
        view = spec.view_name,
        key = spec.key_column,
        out = artifact.model_id.output_column(),
        src = spec.source_table,
    ))
}

fn require(artifact: &ModelArtifact, family: Family) -> Result<()> {
    if artifact.family != family {
        return Err(CodegenError::WrongFamily {
            model: artifact.model_id.to_string(),
            expected: family.name(),
            found: artifact.family.name(),
        });
    }
    Ok(())
}

/// One view with `p_graduate_4y`, `time_to_degree` (NULL below the
/// threshold) and a `category` text column.
pub fn emit_two_stage_sql(
    pm2: &ModelArtifact,
    pm3: &ModelArtifact,
    spec: &SqlViewSpec,
) -> Result<String> {
    emit_two_stage_sql_with(pm2, pm3, spec, &Ansi)
}

pub fn emit_two_stage_sql_with(
    pm2: &ModelArtifact,
    pm3: &ModelArtifact,
    spec: &SqlViewSpec,
    dialect: &dyn SqlDialect,
) -> Result<String> {
    require(pm2, Family::Logistic)?;
    require(pm3, Family::Linear)?;
    spec.validate()?;
    let p = score_expression(pm2, spec, dialect)?;
    let t = score_expression(pm3, spec, dialect)?;
    let threshold = dialect.number(spec.threshold);
    let key = &spec.key_column;
    Ok(format!(
        "CREATE VIEW {view} AS\n\
         SELECT\n    {key},\n    p_graduate_4y,\n    \
         CASE WHEN p_graduate_4y >= {threshold} THEN time_to_degree_estimate ELSE NULL END AS time_to_degree,\n    \
         CASE WHEN p_graduate_4y >= {threshold} THEN {numeric} ELSE {later} END AS category\n\
         FROM (\n    SELECT\n        {key},\n        {p} AS p_graduate_4y,\n        {t} AS time_to_degree_estimate\n    FROM {src}\n) AS scored;\n",
        view = spec.view_name,
        src = spec.source_table,
        numeric = dialect.string_literal("numeric"),
        later = dialect.string_literal(FOUR_YEARS_OR_MORE),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{published, ModelId};

    fn fixture(id: ModelId) -> ModelArtifact {
        published::artifact(&id).unwrap()
    }

    fn spec() -> SqlViewSpec {
        SqlViewSpec::new("predictions", "features", "study_right_id")
    }

    #[test]
    fn pm3_expression_matches_published_formula() {
        let sql = emit_sql_view(&fixture(ModelId::Pm3), &spec()).unwrap();
        assert!(sql.contains(
            "6.6596 + 0.3095*gender_male + 0.3532*field_arts_and_design + -0.0132*sum_of_cr + 0.3408*distance_to_validity_end"
        ), "{sql}");
        assert!(sql.starts_with("CREATE VIEW predictions AS\n"));
        assert!(sql.contains(" AS time_to_degree\nFROM features;"));
    }

    #[test]
    fn logistic_uses_exp_ratio() {
        let sql = emit_sql_view(&fixture(ModelId::Pm2), &spec()).unwrap();
        let z = "-3.297 + -0.3869*gender_male + -1.0453*field_arts_and_design + -2.0927*no_credits_in_18m + 0.0188*sum_of_cr";
        assert!(sql.contains(&format!("EXP({z})/(1+EXP({z})) AS p_graduate_4y")), "{sql}");
    }

    #[test]
    fn constant_only_is_bare_literal() {
        let mut a = fixture(ModelId::Pm3);
        a.coefficients.retain(|k, _| k == "constant");
        let sql = emit_sql_view(&a, &spec()).unwrap();
        assert!(sql.contains("    6.6596 AS time_to_degree\n"), "{sql}");
    }

    #[test]
    fn unmapped_term() {
        let mut s = spec();
        s.columns.shift_remove("sum_of_cr");
        assert_eq!(
            emit_sql_view(&fixture(ModelId::Pm3), &s).unwrap_err(),
            CodegenError::UnmappedTerm("sum_of_cr".into())
        );
    }

    #[test]
    fn identifiers_are_checked() {
        assert!(is_identifier("_a1"));
        assert!(!is_identifier("1a"));
        assert!(!is_identifier("a-b"));
        assert!(!is_identifier(""));
        let mut s = spec();
        s.view_name = "drop table x".into();
        assert!(matches!(
            emit_sql_view(&fixture(ModelId::Pm3), &s),
            Err(CodegenError::InvalidIdentifier(_))
        ));
        let mut s = spec();
        s.columns.insert("sum_of_cr".into(), "credits;--".into());
        assert!(emit_sql_view(&fixture(ModelId::Pm3), &s).is_err());
    }

    #[test]
    fn two_stage_view() {
        let sql = emit_two_stage_sql(&fixture(ModelId::Pm2), &fixture(ModelId::Pm3), &spec()).unwrap();
        assert!(sql.contains("CASE WHEN"));
        assert!(sql.contains("'four years or more'"));
        assert!(sql.contains(">= 0.5"));
        let again = emit_two_stage_sql(&fixture(ModelId::Pm2), &fixture(ModelId::Pm3), &spec()).unwrap();
        assert_eq!(sql, again);
        assert!(matches!(
            emit_two_stage_sql(&fixture(ModelId::Pm3), &fixture(ModelId::Pm2), &spec()),
            Err(CodegenError::WrongFamily { .. })
        ));
    }

    #[test]
    fn numbers_always_have_a_decimal_point() {
        assert_eq!(Ansi.number(5.0), "5.0");
        assert_eq!(Ansi.number(-0.0132), "-0.0132");
        assert_eq!(Ansi.number(1e-20), "0.00000000000000000001");
        assert_eq!(Ansi.string_literal("it's"), "'it''s'");
    }
}

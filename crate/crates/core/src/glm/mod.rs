//! Least squares, logistic regression by IRLS, Wald tests and backward
//! elimination. Covariates are never rescaled, so coefficients stay on the
//! scale of the input columns.

mod linear;
mod logistic;
mod qr;
mod select;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;
use thiserror::Error;

pub use linear::fit_linear;
pub use logistic::{fit_logistic, fit_logistic_with, LogisticOptions};
pub use select::{backward_eliminate, backward_eliminate_with};

/// Name of the all-ones intercept column.
pub const CONSTANT: &str = "constant";

/// Coefficient magnitude beyond which a logistic fit is treated as separated.
pub const SEPARATION_BOUND: f64 = 1e3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlmError {
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("design has {rows} row(s) but {cols} column(s)")]
    TooFewRows { rows: usize, cols: usize },
    #[error("design is rank deficient: column `{column}` is linearly dependent on earlier columns")]
    RankDeficient { column: String },
    #[error("response must be 0 or 1 for logistic fits (row {row} is {value})")]
    NonBinaryResponse { row: usize, value: f64 },
    #[error("response contains a single class; logistic fit is undefined")]
    SingleClass,
    #[error("complete or quasi-complete separation after {iterations} iteration(s) (max |coefficient| {max_abs_coefficient:.3e})")]
    Separation {
        iterations: usize,
        max_abs_coefficient: f64,
    },
    #[error("IRLS did not converge within {iterations} iteration(s)")]
    NotConverged { iterations: usize },
    #[error("no residual degrees of freedom for significance tests")]
    NoResidualDegreesOfFreedom,
    #[error("log-likelihoods must be ≤ 0 and finite (model {model}, null {null})")]
    InvalidLogLikelihood { model: f64, null: f64 },
    #[error("null log-likelihood is zero; pseudo-R² is undefined")]
    DegenerateNull,
    #[error("significance level must be in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

impl GlmError {
    /// Separation and non-convergence, as opposed to bad input.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, GlmError::Separation { .. } | GlmError::NotConverged { .. })
    }
}

pub type Result<T, E = GlmError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Logistic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Logistic => "logistic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RSquaredKind {
    McfaddenPseudo,
    CoefficientOfDetermination,
    /// A published value whose statistic was not named by its source.
    Unspecified,
}

/// Dense design with a leading all-ones `constant` column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    n_rows: usize,
    /// Column-major.
    values: Vec<f64>,
    response: Vec<f64>,
}

impl DesignMatrix {
    /// `columns` are the non-constant covariates; the constant column is added.
    pub fn with_constant(columns: Vec<(String, Vec<f64>)>, response: Vec<f64>) -> Result<Self> {
        let n = response.len();
        let mut names = vec![CONSTANT.to_string()];
        let mut values = vec![1.0; n];
        for (name, col) in columns {
            if col.len() != n {
                return Err(GlmError::InvalidDesign(format!(
                    "column `{name}` has {} values, response has {n}",
                    col.len()
                )));
            }
            names.push(name);
            values.extend(col);
        }
        Self::from_columns(names, values, response)
    }

    /// Builds from a column-major buffer whose first column must be the constant.
    pub fn from_columns(names: Vec<String>, values: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        let n = response.len();
        let p = names.len();
        if p == 0 || names[0] != CONSTANT {
            return Err(GlmError::InvalidDesign(format!(
                "first column must be `{CONSTANT}`"
            )));
        }
        if values.len() != n * p {
            return Err(GlmError::InvalidDesign(format!(
                "expected {} values for {n} × {p}, got {}",
                n * p,
                values.len()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(GlmError::InvalidDesign(format!("duplicate column `{a}`")));
            }
        }
        if values[..n].iter().any(|&v| v != 1.0) {
            return Err(GlmError::InvalidDesign(format!(
                "`{CONSTANT}` column must be all ones"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GlmError::InvalidDesign(format!(
                "non-finite value in column `{}` row {}",
                names[i / n.max(1)],
                i % n.max(1)
            )));
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(GlmError::InvalidDesign(format!("non-finite response at row {i}")));
        }
        if n < p {
            return Err(GlmError::TooFewRows { rows: n, cols: p });
        }
        Ok(DesignMatrix {
            names,
            n_rows: n,
            values,
            response,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_rows + i]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copy without column `j`. The constant column cannot be removed.
    pub fn without_column(&self, j: usize) -> DesignMatrix {
        assert!(j > 0 && j < self.n_cols(), "cannot drop column {j}");
        let n = self.n_rows;
        let mut names = self.names.clone();
        names.remove(j);
        let mut values = Vec::with_capacity(self.values.len() - n);
        values.extend_from_slice(&self.values[..j * n]);
        values.extend_from_slice(&self.values[(j + 1) * n..]);
        DesignMatrix {
            names,
            n_rows: n,
            values,
            response: self.response.clone(),
        }
    }

    /// `X β` for each row.
    pub fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.n_rows];
        for (j, b) in beta.iter().enumerate() {
            for (e, x) in eta.iter_mut().zip(self.column(j)) {
                *e += b * x;
            }
        }
        eta
    }

    pub(crate) fn rank_check(&self) -> Result<qr::Qr> {
        qr::Qr::new(self.values.clone(), self.n_rows, self.n_cols()).map_err(|j| {
            GlmError::RankDeficient {
                column: self.names[j].clone(),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: Family,
    pub coefficients: IndexMap<String, f64>,
    pub standard_errors: IndexMap<String, f64>,
    pub p_values: IndexMap<String, f64>,
    /// Logistic fits only.
    pub log_likelihood: Option<f64>,
    pub r_squared: f64,
    pub r_squared_kind: RSquaredKind,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Terms removed by backward elimination, in removal order.
    pub dropped_terms: Vec<String>,
    /// Log-likelihood after each accepted IRLS step, starting from β = 0.
    pub log_likelihood_trace: Vec<f64>,
}

impl FitResult {
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.coefficients.get(term).copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.coefficients.keys().map(String::as_str)
    }
}

/// Fits `design` with the given family using default settings.
pub fn fit(design: &DesignMatrix, family: Family) -> Result<FitResult> {
    fit_with(design, family, &LogisticOptions::default())
}

pub fn fit_with(design: &DesignMatrix, family: Family, opts: &LogisticOptions) -> Result<FitResult> {
    match family {
        Family::Linear => fit_linear(design),
        Family::Logistic => fit_logistic_with(design, opts),
    }
}

/// McFadden pseudo-R²: `1 − lnL(model) / lnL(null)`.
pub fn mcfadden_r2(log_likelihood_model: f64, log_likelihood_null: f64) -> Result<f64> {
    let (m, n) = (log_likelihood_model, log_likelihood_null);
    if !(m.is_finite() && n.is_finite()) || m > 0.0 || n > 0.0 {
        return Err(GlmError::InvalidLogLikelihood { model: m, null: n });
    }
    if n == 0.0 {
        return Err(GlmError::DegenerateNull);
    }
    Ok(1.0 - m / n)
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub(crate) fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Two-sided p-value of a standard normal statistic.
pub(crate) fn z_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Test statistic with zero standard errors mapped to the limiting p-values.
pub(crate) fn wald_p_value(coefficient: f64, se: f64, p: impl Fn(f64) -> f64) -> f64 {
    if se == 0.0 {
        if coefficient == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        p(coefficient / se)
    }
}

pub(crate) fn named(names: &[String], values: &[f64]) -> IndexMap<String, f64> {
    names.iter().cloned().zip(values.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcfadden_examples() {
        assert!((mcfadden_r2(-0.6931, -1.3863).unwrap() - 0.5).abs() < 1e-4);
        assert_eq!(mcfadden_r2(-2.0, -2.0).unwrap(), 0.0);
        assert_eq!(mcfadden_r2(0.0, -2.0).unwrap(), 1.0);
        assert_eq!(mcfadden_r2(-1.0, 0.0), Err(GlmError::DegenerateNull));
        assert!(matches!(
            mcfadden_r2(0.5, -1.0),
            Err(GlmError::InvalidLogLikelihood { .. })
        ));
    }

    #[test]
    fn design_validation() {
        let ok = DesignMatrix::with_constant(vec![("x".into(), vec![1.0, 2.0])], vec![0.0, 1.0]);
        assert!(ok.is_ok());
        let short = DesignMatrix::with_constant(
            vec![("x".into(), vec![1.0]), ("z".into(), vec![2.0])],
            vec![0.0],
        );
        assert_eq!(short, Err(GlmError::TooFewRows { rows: 1, cols: 3 }));
        let nan = DesignMatrix::with_constant(vec![("x".into(), vec![f64::NAN, 2.0])], vec![0.0, 1.0]);
        assert!(matches!(nan, Err(GlmError::InvalidDesign(_))));
        let bad_const = DesignMatrix::from_columns(
            vec!["constant".into()],
            vec![1.0, 2.0],
            vec![0.0, 1.0],
        );
        assert!(matches!(bad_const, Err(GlmError::InvalidDesign(_))));
    }

    #[test]
    fn without_column_keeps_others() {
        let d = DesignMatrix::with_constant(
            vec![("a".into(), vec![1.0, 2.0, 3.0]), ("b".into(), vec![4.0, 5.0, 6.0])],
            vec![0.0, 1.0, 0.0],
        )
        .unwrap();
        let r = d.without_column(1);
        assert_eq!(r.names(), ["constant", "b"]);
        assert_eq!(r.column(1), [4.0, 5.0, 6.0]);
    }

    #[test]
    fn p_value_helpers() {
        assert!((z_two_sided(1.959963984540054) - 0.05).abs() < 1e-9);
        assert!((t_two_sided(2.0, 10.0) - 0.07338803477074).abs() < 1e-10);
        assert_eq!(wald_p_value(0.0, 0.0, z_two_sided), 1.0);
        assert_eq!(wald_p_value(1.0, 0.0, z_two_sided), 0.0);
    }
}

use super::{fit_with, DesignMatrix, Family, FitResult, GlmError, LogisticOptions, Result, CONSTANT};

/// Backward elimination with default logistic options.
pub fn backward_eliminate(design: &DesignMatrix, family: Family, alpha: f64) -> Result<FitResult> {
    backward_eliminate_with(design, family, alpha, &LogisticOptions::default())
}

/// Refits and drops the non-constant term with the largest p-value ≥ `alpha`,
/// one term per round, until every remaining term has p < `alpha`.
///
/// Exact p-value ties drop the term that comes first in column order.
pub fn backward_eliminate_with(
    design: &DesignMatrix,
    family: Family,
    alpha: f64,
    opts: &LogisticOptions,
) -> Result<FitResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GlmError::InvalidAlpha(alpha));
    }
    let mut current = design.clone();
    let mut dropped = Vec::new();
    loop {
        let mut fit = fit_with(&current, family, opts)?;
        let mut worst: Option<(usize, f64)> = None;
        for (j, (term, &p)) in fit.p_values.iter().enumerate() {
            if term == CONSTANT {
                continue;
            }
            if p.is_nan() {
                return Err(GlmError::NoResidualDegreesOfFreedom);
            }
            if p >= alpha && worst.is_none_or(|(_, w)| p > w) {
                worst = Some((j, p));
            }
        }
        match worst {
            Some((j, _)) => {
                dropped.push(current.names()[j].clone());
                current = current.without_column(j);
            }
            None => {
                fit.dropped_terms = dropped;
                return Ok(fit);
            }
        }
    }
}

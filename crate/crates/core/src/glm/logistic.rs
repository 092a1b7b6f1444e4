use super::qr::Cholesky;
use super::{
    mcfadden_r2, named, wald_p_value, z_two_sided, DesignMatrix, Family, FitResult, GlmError,
    RSquaredKind, Result, SEPARATION_BOUND,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    pub max_iter: usize,
    /// Converged when the largest absolute coefficient change is below this.
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions {
            max_iter: 50,
            tol: 1e-10,
        }
    }
}

const MAX_STEP_HALVINGS: usize = 40;

/// Logistic regression with default options.
pub fn fit_logistic(design: &DesignMatrix) -> Result<FitResult> {
    fit_logistic_with(design, &LogisticOptions::default())
}

/// Maximum-likelihood logistic regression by Newton–Raphson (IRLS) from β = 0.
///
/// Each Newton step is halved until the log-likelihood does not decrease.
/// Standard errors come from the inverse information matrix at the optimum.
pub fn fit_logistic_with(design: &DesignMatrix, opts: &LogisticOptions) -> Result<FitResult> {
    let y = design.response();
    if let Some((row, &value)) = y.iter().enumerate().find(|(_, v)| **v != 0.0 && **v != 1.0) {
        return Err(GlmError::NonBinaryResponse { row, value });
    }
    let positives = y.iter().filter(|v| **v == 1.0).count();
    if positives == 0 || positives == y.len() {
        return Err(GlmError::SingleClass);
    }
    design.rank_check()?;

    let p = design.n_cols();
    let mut beta = vec![0.0; p];
    let mut ll = log_likelihood(design, &beta);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let eta = design.linear_predictor(&beta);
        let (gradient, information) = score_and_information(design, &eta);
        let Some(chol) = Cholesky::new(&information, p) else {
            return Err(separation(iterations, &beta));
        };
        let delta = chol.solve(&gradient);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_STEP_HALVINGS {
            let candidate: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            let cand_ll = log_likelihood(design, &candidate);
            if cand_ll >= ll {
                accepted = Some((candidate, cand_ll));
                break;
            }
            step *= 0.5;
        }
        // no ascent direction left at floating-point resolution
        let Some((next, next_ll)) = accepted else {
            converged = true;
            break;
        };
        let change = beta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = next;
        ll = next_ll;
        trace.push(ll);
        if max_abs(&beta) > SEPARATION_BOUND {
            return Err(separation(iterations, &beta));
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    if !converged {
        if is_completely_separated(design, &beta) {
            return Err(separation(iterations, &beta));
        }
        return Err(GlmError::NotConverged { iterations });
    }

    let eta = design.linear_predictor(&beta);
    let (_, information) = score_and_information(design, &eta);
    let chol = Cholesky::new(&information, p).ok_or_else(|| separation(iterations, &beta))?;
    let se: Vec<f64> = chol.inverse_diagonal().into_iter().map(f64::sqrt).collect();
    let pv: Vec<f64> = beta
        .iter()
        .zip(&se)
        .map(|(b, s)| wald_p_value(*b, *s, z_two_sided))
        .collect();

    let null_ll = null_log_likelihood(positives, y.len());
    let r_squared = mcfadden_r2(ll.min(0.0), null_ll)?.clamp(0.0, 1.0);
    let names = design.names();
    Ok(FitResult {
        family: Family::Logistic,
        coefficients: named(names, &beta),
        standard_errors: named(names, &se),
        p_values: named(names, &pv),
        log_likelihood: Some(ll),
        r_squared,
        r_squared_kind: RSquaredKind::McfaddenPseudo,
        n: y.len(),
        converged,
        iterations,
        dropped_terms: Vec::new(),
        log_likelihood_trace: trace,
    })
}

fn separation(iterations: usize, beta: &[f64]) -> GlmError {
    GlmError::Separation {
        iterations,
        max_abs_coefficient: max_abs(beta),
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, b| m.max(b.abs()))
}

/// Every fitted probability within 1e-6 of its label.
fn is_completely_separated(design: &DesignMatrix, beta: &[f64]) -> bool {
    design
        .linear_predictor(beta)
        .iter()
        .zip(design.response())
        .all(|(e, y)| (sigmoid(*e) - y).abs() < 1e-6)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn log_likelihood(design: &DesignMatrix, beta: &[f64]) -> f64 {
    design
        .linear_predictor(beta)
        .iter()
        .zip(design.response())
        .map(|(e, y)| y * e - softplus(*e))
        .sum()
}

fn null_log_likelihood(positives: usize, n: usize) -> f64 {
    let k = positives as f64;
    let n = n as f64;
    let rate = k / n;
    k * rate.ln() + (n - k) * (1.0 - rate).ln()
}

/// Gradient `Xᵀ(y − p)` and information `XᵀWX`, row-major `p × p`.
fn score_and_information(design: &DesignMatrix, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = design.n_rows();
    let p = design.n_cols();
    let x = design.values();
    let mut residual = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for (e, y) in eta.iter().zip(design.response()) {
        let mu = sigmoid(*e);
        residual.push(y - mu);
        weight.push(mu * (1.0 - mu));
    }
    let mut gradient = vec![0.0; p];
    let mut information = vec![0.0; p * p];
    for j in 0..p {
        let cj = &x[j * n..(j + 1) * n];
        gradient[j] = cj.iter().zip(&residual).map(|(a, r)| a * r).sum();
        for k in 0..=j {
            let ck = &x[k * n..(k + 1) * n];
            let s: f64 = cj
                .iter()
                .zip(ck)
                .zip(&weight)
                .map(|((a, b), w)| a * b * w)
                .sum();
            information[j * p + k] = s;
            information[k * p + j] = s;
        }
    }
    (gradient, information)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(x: Vec<f64>, y: Vec<f64>) -> DesignMatrix {
        DesignMatrix::with_constant(vec![("x".into(), x)], y).unwrap()
    }

    #[test]
    fn uninformative_covariate_gives_zero() {
        let f = fit_logistic(&design(vec![-1.0, -1.0, 1.0, 1.0], vec![0.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(f.coefficients["constant"].abs() < 1e-8);
        assert!(f.coefficients["x"].abs() < 1e-8);
        assert!(f.converged);
        assert!(f.r_squared.abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let err = fit_logistic(&design(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0])).unwrap_err();
        assert_eq!(err, GlmError::SingleClass);
    }

    #[test]
    fn non_binary_rejected() {
        let err = fit_logistic(&design(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0])).unwrap_err();
        assert!(matches!(err, GlmError::NonBinaryResponse { row: 1, .. }));
    }

    #[test]
    fn complete_separation_is_reported() {
        let err = fit_logistic(&design(
            vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        ))
        .unwrap_err();
        assert!(matches!(err, GlmError::Separation { .. }), "{err:?}");
        assert!(err.is_numerical_failure());
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let opts = LogisticOptions { max_iter: 1, tol: 1e-10 };
        let d = design(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.0, 0.0, 1.0, 1.0]);
        assert_eq!(fit_logistic_with(&d, &opts).unwrap_err(), GlmError::NotConverged { iterations: 1 });
    }

    #[test]
    fn stable_helpers() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((null_log_likelihood(2, 4) - 4.0 * 0.5f64.ln()).abs() < 1e-12);
    }
}

use super::{named, t_two_sided, wald_p_value, DesignMatrix, Family, FitResult, RSquaredKind, Result};

/// Ordinary least squares via Householder QR.
///
/// Standard errors come from `σ̂² (XᵀX)⁻¹` with `σ̂² = SSE / (n − p)`;
/// p-values are two-sided t tests. With `n = p` there are no residual degrees
/// of freedom and the standard errors and p-values are NaN.
pub fn fit_linear(design: &DesignMatrix) -> Result<FitResult> {
    let qr = design.rank_check()?;
    let n = design.n_rows();
    let p = design.n_cols();
    let y = design.response();
    let beta = qr.solve(y);

    let fitted = design.linear_predictor(&beta);
    let sse: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    // a constant response is fitted exactly by the intercept; report no explained variance
    let r_squared = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 0.0 };

    let df = (n - p) as f64;
    let (se, pv): (Vec<f64>, Vec<f64>) = if n > p {
        let sigma2 = sse / df;
        qr.inverse_gram_diagonal()
            .into_iter()
            .zip(&beta)
            .map(|(d, b)| {
                let se = (sigma2 * d).sqrt();
                (se, wald_p_value(*b, se, |t| t_two_sided(t, df)))
            })
            .unzip()
    } else {
        (vec![f64::NAN; p], vec![f64::NAN; p])
    };

    let names = design.names();
    Ok(FitResult {
        family: Family::Linear,
        coefficients: named(names, &beta),
        standard_errors: named(names, &se),
        p_values: named(names, &pv),
        log_likelihood: None,
        r_squared,
        r_squared_kind: RSquaredKind::CoefficientOfDetermination,
        n,
        converged: true,
        iterations: 1,
        dropped_terms: Vec::new(),
        log_likelihood_trace: Vec::new(),
    })
}

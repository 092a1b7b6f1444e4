//! Fits against reference results produced offline by an independent
//! statistics package (see tests/data/make_golden.py).

mod common;

use gradpath::glm::{self, Family, FitResult};
use serde_json::Value;

use common::{floats, load};

const TOL: f64 = 1e-6;

fn check(fit: &FitResult, expected: &Value, coef_key: &str, p_key: Option<&str>) {
    let terms: Vec<&str> = fit.coefficients.keys().map(String::as_str).collect();
    let names: Vec<String> = serde_json::from_value(expected["terms"].clone()).unwrap();
    if coef_key == "coefficients" {
        assert_eq!(terms, names);
    }
    for (got, want) in fit.coefficients.values().zip(floats(&expected[coef_key])) {
        assert!((got - want).abs() < TOL, "coefficient {got} vs {want}");
    }
    if coef_key == "coefficients" {
        for (got, want) in fit.standard_errors.values().zip(floats(&expected["standard_errors"])) {
            assert!((got - want).abs() < TOL, "se {got} vs {want}");
        }
    }
    if let Some(p_key) = p_key {
        for (got, want) in fit.p_values.values().zip(floats(&expected[p_key])) {
            assert!((got - want).abs() < TOL, "p {got} vs {want}");
        }
    }
}

#[test]
fn linear_matches_reference() {
    let g = load("linear_n200");
    let fit = glm::fit(&g.design, Family::Linear).unwrap();
    check(&fit, &g.expected, "coefficients", Some("p_values"));
    let r2 = g.expected["r_squared"].as_f64().unwrap();
    assert!((fit.r_squared - r2).abs() < TOL);
}

#[test]
fn logistic_matches_reference() {
    let g = load("logistic_n1000");
    let fit = glm::fit(&g.design, Family::Logistic).unwrap();
    assert!(fit.converged);
    check(&fit, &g.expected, "coefficients", Some("p_values"));
    let ll = g.expected["log_likelihood"].as_f64().unwrap();
    assert!((fit.log_likelihood.unwrap() - ll).abs() < TOL);
    let r2 = g.expected["mcfadden_r2"].as_f64().unwrap();
    assert!((fit.r_squared - r2).abs() < TOL);
}

#[test]
fn backward_elimination_drops_noise() {
    let g = load("logistic_noise_n2000");
    let full = glm::fit(&g.design, Family::Logistic).unwrap();
    check(&full, &g.expected, "coefficients", Some("p_values"));
    let reduced = glm::backward_eliminate(&g.design, Family::Logistic, 0.05).unwrap();
    let dropped: Vec<String> = serde_json::from_value(g.expected["expected_dropped"].clone()).unwrap();
    assert_eq!(reduced.dropped_terms, dropped);
    check(&reduced, &g.expected, "reduced_coefficients", Some("reduced_p_values"));
}

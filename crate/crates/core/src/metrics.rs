//! Accuracy of time-to-degree predictions in semester bands, and confusion
//! counts for the graduation classifiers.

use std::fmt;
use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {left} predictions vs {right} actual values")]
    LengthMismatch { left: usize, right: usize },
    #[error("no predictions to evaluate")]
    Empty,
    #[error("no bands requested")]
    NoBands,
    #[error("prediction {index} is not a finite number")]
    NonFinitePrediction { index: usize },
    #[error("probability {index} is outside [0, 1]: {value}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("label {index} must be 0 or 1, got {value}")]
    InvalidLabel { index: usize, value: u8 },
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    /// `(k, percentage)` for |rounded prediction − actual| ≤ k, ascending k.
    pub bands: Vec<(u32, f64)>,
    pub n: usize,
}

pub fn band_name(k: u32) -> String {
    if k == 0 {
        "same_semester".to_string()
    } else {
        format!("within_{k}")
    }
}

impl BandReport {
    pub fn percentage(&self, k: u32) -> Option<f64> {
        self.bands.iter().find(|(b, _)| *b == k).map(|(_, p)| *p)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let err = |e: csv::Error| MetricsError::Csv(e.to_string());
        out.write_record(["band", "percentage"]).map_err(err)?;
        for (k, p) in &self.bands {
            out.write_record([band_name(*k), p.to_string()]).map_err(err)?;
        }
        out.flush().map_err(|e| MetricsError::Csv(e.to_string()))?;
        Ok(())
    }
}

impl fmt::Display for BandReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "time-to-degree accuracy (n = {})", self.n)?;
        for (k, p) in &self.bands {
            let label = if *k == 0 {
                "same semester".to_string()
            } else {
                format!("+/- {k} semester{}", if *k == 1 { "" } else { "s" })
            };
            writeln!(f, "  {label:<20} {p:>6.1} %")?;
        }
        Ok(())
    }
}

/// Rounds each prediction half away from zero and reports, for each band `k`,
/// the percentage of rows with |rounded − actual| ≤ k.
pub fn precision_bands(predicted: &[f64], actual: &[i64], bands: &[u32]) -> Result<BandReport> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(MetricsError::Empty);
    }
    if bands.is_empty() {
        return Err(MetricsError::NoBands);
    }
    if let Some(index) = predicted.iter().position(|p| !p.is_finite()) {
        return Err(MetricsError::NonFinitePrediction { index });
    }
    let errors: Vec<u64> = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p.round() as i64).abs_diff(*a))
        .collect();
    let mut ks = bands.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let n = predicted.len();
    let bands = ks
        .into_iter()
        .map(|k| {
            let hits = errors.iter().filter(|e| **e <= u64::from(k)).count();
            (k, 100.0 * hits as f64 / n as f64)
        })
        .collect();
    Ok(BandReport { bands, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub threshold: f64,
}

impl ConfusionCounts {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.n() as f64
    }
}

impl fmt::Display for ConfusionCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "confusion at threshold {}", self.threshold)?;
        writeln!(f, "  tp {:>8}  fp {:>8}", self.tp, self.fp)?;
        writeln!(f, "  fn {:>8}  tn {:>8}", self.fn_, self.tn)
    }
}

/// Positive prediction iff `p ≥ threshold`.
pub fn confusion_counts(probabilities: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionCounts> {
    if probabilities.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: probabilities.len(),
            right: labels.len(),
        });
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
        threshold,
    };
    for (index, (&p, &y)) in probabilities.iter().zip(labels).enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(MetricsError::InvalidProbability { index, value: p });
        }
        match (p >= threshold, y) {
            (true, 1) => c.tp += 1,
            (true, 0) => c.fp += 1,
            (false, 0) => c.tn += 1,
            (false, 1) => c.fn_ += 1,
            (_, value) => return Err(MetricsError::InvalidLabel { index, value }),
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_bands() {
        let r = precision_bands(&[6.4, 7.2, 8.6, 5.1], &[6, 6, 6, 6], &[0, 1, 2]).unwrap();
        assert_eq!(r.bands, [(0, 25.0), (1, 75.0), (2, 75.0)]);
        assert_eq!(r.n, 4);
    }

    #[test]
    fn exact_predictions_hit_every_band() {
        let r = precision_bands(&[1.0, 2.0, 3.0], &[1, 2, 3], &[2, 0, 1]).unwrap();
        assert!(r.bands.iter().all(|(_, p)| *p == 100.0));
        assert_eq!(r.bands.iter().map(|b| b.0).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let r = precision_bands(&[2.5, -0.5], &[3, -1], &[0]).unwrap();
        assert_eq!(r.percentage(0), Some(100.0));
    }

    #[test]
    fn band_errors() {
        assert_eq!(
            precision_bands(&[1.0], &[1, 2], &[0]).unwrap_err(),
            MetricsError::LengthMismatch { left: 1, right: 2 }
        );
        assert_eq!(precision_bands(&[], &[], &[0]).unwrap_err(), MetricsError::Empty);
        assert_eq!(precision_bands(&[1.0], &[1], &[]).unwrap_err(), MetricsError::NoBands);
    }

    #[test]
    fn report_serializations() {
        let r = precision_bands(&[6.4, 7.2, 8.6, 5.1], &[6, 6, 6, 6], &[0, 1, 2]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "band,percentage\nsame_semester,25\nwithin_1,75\nwithin_2,75\n"
        );
        let text = r.to_string();
        assert!(text.contains("same semester"));
        assert!(text.contains("+/- 2 semesters"));
    }

    #[test]
    fn confusion_examples() {
        let c = confusion_counts(&[0.9, 0.2], &[1, 0], 0.5).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (1, 1, 0, 0));
        let c = confusion_counts(&[0.0, 0.3, 1.0], &[1, 1, 0], 0.0).unwrap();
        assert_eq!(c.fn_, 0);
        assert_eq!(c.n(), 3);
        assert!(confusion_counts(&[0.5], &[2], 0.5).is_err());
        assert!(confusion_counts(&[1.5], &[1], 0.5).is_err());
        assert!(confusion_counts(&[0.5], &[], 0.5).is_err());
    }
}

use serde::{Deserialize, Serialize};

/// Summary of one error series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorStats {
    /// Mean absolute error over estimated samples, metres.
    pub average_error: f64,
    /// Largest single absolute error, metres.
    pub maximum_error: f64,
    pub accuracy_percent: f64,
    /// Samples that produced an estimate.
    pub sample_count: usize,
    /// Samples including the ones with no estimate.
    pub total_count: usize,
}

/// One sample of an error series: the absolute error (`None` when nothing
/// was estimated) and the true distance it is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub error: Option<f64>,
    pub reference: f64,
}

/// `100 (1 - mean(|e| / r))`, each ratio capped at 1 and the result
/// clamped to `[0, 100]`. Empty input scores 0.
pub fn accuracy_percent(errors: &[f64], ranges: &[f64]) -> f64 {
    assert_eq!(errors.len(), ranges.len(), "one range per error");
    if errors.is_empty() {
        return 0.0;
    }
    let sum: f64 = errors
        .iter()
        .zip(ranges)
        .map(|(e, r)| if *r > 0.0 { (e.abs() / r).min(1.0) } else { 1.0 })
        .sum();
    (100.0 * (1.0 - sum / errors.len() as f64)).clamp(0.0, 100.0)
}

impl ErrorStats {
    /// Samples without an estimate count as total misses in the accuracy and
    /// are left out of the average and maximum.
    pub fn from_samples(samples: &[ErrorSample]) -> Self {
        let mut sum = 0.0;
        let mut max: f64 = 0.0;
        let mut n = 0;
        let mut errs = Vec::with_capacity(samples.len());
        let mut refs = Vec::with_capacity(samples.len());
        for s in samples {
            match s.error {
                Some(e) => {
                    let e = e.abs();
                    sum += e;
                    max = max.max(e);
                    n += 1;
                    errs.push(e);
                }
                None => errs.push(s.reference.abs().max(f64::MIN_POSITIVE)),
            }
            refs.push(s.reference);
        }
        Self {
            average_error: if n > 0 { sum / n as f64 } else { 0.0 },
            maximum_error: max,
            accuracy_percent: accuracy_percent(&errs, &refs),
            sample_count: n,
            total_count: samples.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_errors_are_perfect() {
        assert_eq!(accuracy_percent(&[0.0, 0.0], &[10.0, 20.0]), 100.0);
    }

    #[test]
    fn error_equal_to_range_scores_zero() {
        assert_eq!(accuracy_percent(&[5.0], &[5.0]), 0.0);
        assert_eq!(accuracy_percent(&[50.0], &[5.0]), 0.0);
    }

    #[test]
    fn ten_percent_errors_score_ninety() {
        let ranges = [10.0, 25.0, 80.0];
        let errors: Vec<f64> = ranges.iter().map(|r| 0.1 * r).collect();
        assert_relative_eq!(accuracy_percent(&errors, &ranges), 90.0, epsilon = 1e-12);
    }

    #[test]
    fn missing_estimates_count_against_accuracy_only() {
        let s = ErrorStats::from_samples(&[
            ErrorSample { error: Some(0.2), reference: 10.0 },
            ErrorSample { error: None, reference: 10.0 },
            ErrorSample { error: Some(0.4), reference: 10.0 },
        ]);
        assert_relative_eq!(s.average_error, 0.3, epsilon = 1e-12);
        assert_eq!(s.maximum_error, 0.4);
        assert_relative_eq!(s.accuracy_percent, 100.0 * (1.0 - (0.02 + 1.0 + 0.04) / 3.0), epsilon = 1e-9);
        assert_eq!((s.sample_count, s.total_count), (2, 3));
        assert!(s.maximum_error >= s.average_error);
    }
}

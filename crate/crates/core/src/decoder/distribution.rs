use super::{DecodeError, Result, Scorer, ScorerError};
use crate::atomizer::AtomId;
use crate::scalar::Scalar;

/// Scorer output renormalized over the candidate set only.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution<T> {
    pub candidates: Vec<AtomId>,
    pub probabilities: Vec<T>,
    pub log_probabilities: Vec<T>,
}

impl<T: Scalar> StepDistribution<T> {
    /// Normalize raw scores in log space. All-zero scores give the uniform
    /// distribution.
    pub fn from_scores(candidates: Vec<AtomId>, scores: &[T]) -> Result<Self> {
        if candidates.is_empty() {
            return Err(DecodeError::NoCandidates);
        }
        validate_scores(scores, candidates.len())?;
        let max = scores.iter().copied().fold(T::zero(), T::max);
        let log_probabilities: Vec<T> = if max == T::zero() {
            let u = -T::from_usize(candidates.len()).unwrap().ln();
            vec![u; candidates.len()]
        } else {
            // Ratios to the maximum keep equal scores exactly equal under any
            // positive rescaling; underflowing ratios fall back to a log difference.
            let ratios: Vec<T> = scores.iter().map(|&s| s / max).collect();
            let ln_sum = ratios.iter().copied().sum::<T>().ln();
            scores
                .iter()
                .zip(&ratios)
                .map(|(&s, &r)| {
                    let ln_ratio = if r >= T::min_positive_value() || s == T::zero() {
                        r.ln()
                    } else {
                        s.ln() - max.ln()
                    };
                    ln_ratio - ln_sum
                })
                .collect()
        };
        let probabilities = log_probabilities.iter().map(|l| l.exp()).collect();
        Ok(Self {
            candidates,
            probabilities,
            log_probabilities,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Position of the most probable candidate; ties go to the lowest atom id.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.len() {
            if self.log_probabilities[i] > self.log_probabilities[best]
                || (self.log_probabilities[i] == self.log_probabilities[best] && self.candidates[i] < self.candidates[best])
            {
                best = i;
            }
        }
        best
    }

    pub fn log_probability_of(&self, atom: AtomId) -> Option<T> {
        self.candidates.iter().position(|&a| a == atom).map(|i| self.log_probabilities[i])
    }
}

/// Checks length, sign and finiteness of raw scorer output.
pub fn validate_scores<T: Scalar>(scores: &[T], expected: usize) -> Result<(), ScorerError> {
    if scores.len() != expected {
        return Err(ScorerError::WrongLength {
            expected,
            actual: scores.len(),
        });
    }
    for (index, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(ScorerError::NonFinite { index });
        }
        if s < T::zero() {
            return Err(ScorerError::Negative {
                index,
                value: s.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

pub fn step_distribution<T: Scalar, S: Scorer<T> + ?Sized>(
    scorer: &S,
    query: &str,
    prefix: &[AtomId],
    candidates: &[AtomId],
) -> Result<StepDistribution<T>> {
    if candidates.is_empty() {
        return Err(DecodeError::NoCandidates);
    }
    let scores = scorer.score(query, prefix, candidates)?;
    StepDistribution::from_scores(candidates.to_vec(), &scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{TableScorer, UniformScorer};
    use proptest::prelude::*;

    fn ids(n: u32) -> Vec<AtomId> {
        (0..n).map(AtomId).collect()
    }

    #[test]
    fn uniform_four() {
        let d: StepDistribution<f64> = step_distribution(&UniformScorer, "q", &[], &ids(4)).unwrap();
        for p in &d.probabilities {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn two_to_six() {
        let d = StepDistribution::from_scores(ids(2), &[2.0f64, 6.0]).unwrap();
        assert!((d.probabilities[0] - 0.25).abs() < 1e-12);
        assert!((d.probabilities[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn all_zero_is_uniform_and_zero_gets_no_mass() {
        let d = StepDistribution::from_scores(ids(3), &[0.0f64, 0.0, 0.0]).unwrap();
        assert!(d.probabilities.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        let d = StepDistribution::from_scores(ids(2), &[0.0f64, 5.0]).unwrap();
        assert_eq!(d.probabilities[0], 0.0);
        assert_eq!(d.log_probabilities[0], f64::NEG_INFINITY);
        assert_eq!(d.probabilities[1], 1.0);
    }

    #[test]
    fn invalid_scores() {
        assert!(matches!(
            StepDistribution::from_scores(ids(3), &[1.0f64, 2.0]),
            Err(DecodeError::Scorer(ScorerError::WrongLength { expected: 3, actual: 2 }))
        ));
        assert!(matches!(
            StepDistribution::from_scores(ids(2), &[1.0f64, -2.0]),
            Err(DecodeError::Scorer(ScorerError::Negative { index: 1, .. }))
        ));
        assert!(matches!(
            StepDistribution::from_scores(ids(2), &[f64::NAN, 1.0]),
            Err(DecodeError::Scorer(ScorerError::NonFinite { index: 0 }))
        ));
        assert!(matches!(
            StepDistribution::from_scores(ids(1), &[f64::INFINITY]),
            Err(DecodeError::Scorer(ScorerError::NonFinite { index: 0 }))
        ));
        assert!(matches!(step_distribution::<f64, _>(&UniformScorer, "q", &[], &[]), Err(DecodeError::NoCandidates)));
    }

    #[test]
    fn argmax_tie_goes_to_lowest_atom() {
        let d = StepDistribution::from_scores(vec![AtomId(7), AtomId(3), AtomId(5)], &[1.0f64, 1.0, 0.5]).unwrap();
        assert_eq!(d.candidates[d.argmax()], AtomId(3));
    }

    #[test]
    fn equal_scores_exact_at_any_scale() {
        for c in [1e-300, 3.7e-9, 1.0, 0.1, 7.3e11, 1e300] {
            let d = StepDistribution::from_scores(ids(3), &[c, c, c]).unwrap();
            assert!(d.log_probabilities.iter().all(|&l| l == -(3.0f64).ln()), "{c}");
        }
    }

    #[test]
    fn extreme_range_stays_finite() {
        let d = StepDistribution::from_scores(ids(3), &[1e300, 1e-300, 5e-324]).unwrap();
        assert_eq!(d.log_probabilities[0], 0.0);
        assert!((d.log_probabilities[1] - (1e-300f64.ln() - 1e300f64.ln())).abs() < 1e-9);
        assert!(d.log_probabilities[2].is_finite());
        assert!(d.log_probabilities[2] < d.log_probabilities[1]);
    }

    #[test]
    fn table_scorer_lookup() {
        let t = TableScorer::new(1.0f64).with(&[], AtomId(1), 3.0);
        let d: StepDistribution<f64> = step_distribution(&t, "", &[], &ids(2)).unwrap();
        assert!((d.probabilities[1] - 0.75).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn scale_invariant(s in 1e-6f64..1e6, k in 1e-6f64..1e6) {
            let a = StepDistribution::from_scores(ids(2), &[s, 3.0 * s]).unwrap();
            prop_assert!((a.probabilities[0] - 0.25).abs() < 1e-9);
            let raw = [s, 0.5 * s, 2.0];
            let b = StepDistribution::from_scores(ids(3), &raw).unwrap();
            let scaled: Vec<f64> = raw.iter().map(|x| x * k).collect();
            let c = StepDistribution::from_scores(ids(3), &scaled).unwrap();
            for (x, y) in b.probabilities.iter().zip(&c.probabilities) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn normalized(raw in prop::collection::vec(0.0f64..1e3, 1..20)) {
            let d = StepDistribution::from_scores(ids(raw.len() as u32), &raw).unwrap();
            let sum: f64 = d.probabilities.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(d.probabilities.iter().all(|&p| p >= 0.0));
        }
    }
}

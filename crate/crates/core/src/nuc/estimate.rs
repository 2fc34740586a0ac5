use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Predictions are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PJsdEstimate<T> {
    pub value: T,
    pub n_negatives: usize,
    pub f_true: T,
    pub mean_log_one_minus_f_neg: T,
}

/// Pointwise JSD lower bound from one true-reply probability and the
/// probabilities of `k` sampled negatives:
/// `L = -ln f_true - mean ln(1 - f_neg)`, value `= ln 2 - L / 2`.
///
/// The value is 0 for an uninformative classifier and approaches ln 2 as the
/// classifier saturates.
pub fn pjsd_estimate<T: Scalar>(f_true: T, f_negatives: &[T]) -> Result<PJsdEstimate<T>> {
    if f_negatives.is_empty() {
        return Err(Error::Invalid("pjsd estimate needs at least one negative".into()));
    }
    for &p in std::iter::once(&f_true).chain(f_negatives) {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::ProbabilityOutOfRange(p.as_f64()));
        }
    }
    let mean_log = f_negatives.iter().map(|&f| (T::one() - f).ln()).sum::<T>() / T::count(f_negatives.len());
    let loss = -f_true.ln() - mean_log;
    Ok(PJsdEstimate {
        value: T::LN_2() - loss / T::of(2.0),
        n_negatives: f_negatives.len(),
        f_true,
        mean_log_one_minus_f_neg: mean_log,
    })
}

//! Rank correlation, agreement, median and regression statistics used to
//! validate uptake measures.

mod agreement;
mod bootstrap;
mod conversation;
mod damsl;
mod median;
mod rank;
mod regression;

pub use agreement::{fleiss_kappa, leave_out_agreement, LeaveOutAgreement, RatingMatrix};
pub use bootstrap::{bootstrap_ci, percentile, DEFAULT_ITERATIONS, DEFAULT_LEVEL};
pub use conversation::{conversation_aggregate, cue_rates, ConversationScore, CueRates};
pub use damsl::{map_damsl, phenomenon_delta, read_tags, Matcher, Phenomenon, PhenomenonDelta, PhenomenonMapping};
pub use median::{chi2_sf_1df, median_test, normal_two_sided_p, MedianTest};
pub use rank::{average_ranks, pearson, quantile_transform, spearman, SpearmanResult};
pub use regression::{
    ols, ols_named, residual_gap_set, ttest_two_sample, OlsResult, OlsTerm, ResidualGap, TTest, SMALL_DF,
};

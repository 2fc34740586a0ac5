//! Uptake measures for (S, T) pairs and batch scoring into a [`ScoreTable`].

mod metrics;
mod table;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;

use crate::corpus::ExchangePair;
use crate::embeddings::{SentenceVectorStore, WordVectorStore};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textprep::{tokenize_with_marker, PreprocessProfile, Preprocessor, TokenSequence, INAUDIBLE_MARKER};

pub use metrics::{
    bleu, glove_align, glove_utt, jaccard, lcs_norm, pct_s_in_t, pct_t_in_s, sent_sim, shared_types, SentenceSim,
    BLEU_SMOOTHING,
};
pub use table::ScoreTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricName {
    Lcs,
    PctSInT,
    PctTInS,
    Jaccard,
    Bleu,
    GloveAlign,
    GloveUtt,
    SentCosine,
    SentInner,
    NucProb,
    Pjsd,
    External,
}

impl MetricName {
    pub const ALL: [MetricName; 12] = [
        MetricName::Lcs,
        MetricName::PctSInT,
        MetricName::PctTInS,
        MetricName::Jaccard,
        MetricName::Bleu,
        MetricName::GloveAlign,
        MetricName::GloveUtt,
        MetricName::SentCosine,
        MetricName::SentInner,
        MetricName::NucProb,
        MetricName::Pjsd,
        MetricName::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Lcs => "lcs",
            MetricName::PctSInT => "pct_s_in_t",
            MetricName::PctTInS => "pct_t_in_s",
            MetricName::Jaccard => "jaccard",
            MetricName::Bleu => "bleu",
            MetricName::GloveAlign => "glove_align",
            MetricName::GloveUtt => "glove_utt",
            MetricName::SentCosine => "sent_cosine",
            MetricName::SentInner => "sent_inner",
            MetricName::NucProb => "nuc_prob",
            MetricName::Pjsd => "pjsd",
            MetricName::External => "external",
        }
    }

    /// Preprocessing each metric uses unless told otherwise.
    pub fn default_profile(self) -> PreprocessProfile {
        let code = match self {
            MetricName::PctSInT | MetricName::Bleu => "PST",
            MetricName::PctTInS | MetricName::Jaccard | MetricName::GloveUtt => "PS",
            MetricName::GloveAlign => "P",
            _ => "",
        };
        code.parse().expect("static profile code")
    }

    /// Whether the metric is a function of the two token sequences.
    pub fn is_token_metric(self) -> bool {
        matches!(
            self,
            MetricName::Lcs | MetricName::PctSInT | MetricName::PctTInS | MetricName::Jaccard | MetricName::Bleu
        )
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// A metric bound to its preprocessing profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetricId {
    pub name: MetricName,
    pub profile: PreprocessProfile,
}

impl MetricId {
    pub fn new(name: MetricName) -> Self {
        MetricId {
            name,
            profile: name.default_profile(),
        }
    }

    pub fn with_profile(name: MetricName, profile: PreprocessProfile) -> Self {
        MetricId { name, profile }
    }

    /// Score-table column: the bare metric name under its default profile,
    /// `name@CODE` otherwise.
    pub fn column(&self) -> String {
        let default = self.name.default_profile();
        if self.profile.remove_punct == default.remove_punct
            && self.profile.remove_stopwords == default.remove_stopwords
            && self.profile.stem == default.stem
        {
            self.name.as_str().to_string()
        } else {
            format!("{}@{}", self.name, self.profile.code())
        }
    }
}

impl FromStr for MetricId {
    type Err = Error;

    /// `name` or `name@PST`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('@') {
            Some((name, code)) => Ok(MetricId::with_profile(name.parse()?, code.parse()?)),
            None => Ok(MetricId::new(s.parse()?)),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.column())
    }
}

/// Shared read-only resources the metrics draw on.
#[derive(Clone, Copy)]
pub struct MetricContext<'a, T> {
    pub preprocessor: &'a Preprocessor,
    pub words: Option<&'a WordVectorStore<T>>,
    pub sentences: Option<&'a SentenceVectorStore<T>>,
}

impl<'a, T: Scalar> MetricContext<'a, T> {
    pub fn new(preprocessor: &'a Preprocessor) -> Self {
        MetricContext {
            preprocessor,
            words: None,
            sentences: None,
        }
    }

    /// Fails if `metric` cannot be computed from this context.
    pub fn check(&self, metric: &MetricId) -> Result<()> {
        let missing = |requirement| Error::MissingStore {
            metric: metric.column(),
            requirement,
        };
        match metric.name {
            MetricName::GloveAlign | MetricName::GloveUtt if self.words.is_none() => {
                Err(missing("word vectors (--vectors)"))
            }
            MetricName::SentCosine | MetricName::SentInner if self.sentences.is_none() => {
                Err(missing("sentence vectors (--sent-vectors)"))
            }
            MetricName::NucProb | MetricName::Pjsd => Err(missing("a trained classifier (use nuc-score)")),
            MetricName::External => Err(missing("scores produced elsewhere (ingest the CSV)")),
            _ => self.preprocessor.validate(&metric.profile),
        }
    }

    /// Scores one pair. `s` and `t` are raw tokenizations; each metric applies its own profile.
    pub fn score(&self, metric: &MetricId, pair_id: &str, s: &TokenSequence, t: &TokenSequence) -> Option<T> {
        let mut cache = ProfileCache::new(self.preprocessor, s, t);
        self.score_cached(metric, pair_id, &mut cache)
    }

    fn score_cached(&self, metric: &MetricId, pair_id: &str, cache: &mut ProfileCache<'_>) -> Option<T> {
        let (s, t) = cache.get(&metric.profile);
        match metric.name {
            MetricName::Lcs => lcs_norm(s, t).ok(),
            MetricName::PctSInT => pct_s_in_t(s, t),
            MetricName::PctTInS => pct_t_in_s(s, t),
            MetricName::Jaccard => jaccard(s, t),
            MetricName::Bleu => bleu(s, t, 4),
            MetricName::GloveAlign => glove_align(self.words?, s, t),
            MetricName::GloveUtt => glove_utt(self.words?, s, t),
            MetricName::SentCosine => sent_sim(self.sentences?, pair_id, SentenceSim::Cosine),
            MetricName::SentInner => sent_sim(self.sentences?, pair_id, SentenceSim::Inner),
            MetricName::NucProb | MetricName::Pjsd | MetricName::External => None,
        }
    }

    /// Scores several metrics for one pair, sharing preprocessing between them.
    pub fn score_many(
        &self,
        metrics: &[MetricId],
        pair_id: &str,
        s: &TokenSequence,
        t: &TokenSequence,
    ) -> Vec<Option<T>> {
        let mut cache = ProfileCache::new(self.preprocessor, s, t);
        metrics
            .iter()
            .map(|m| self.score_cached(m, pair_id, &mut cache))
            .collect()
    }
}

/// Preprocessed (S, T) per profile code, computed on first use.
struct ProfileCache<'a> {
    pre: &'a Preprocessor,
    raw: (&'a TokenSequence, &'a TokenSequence),
    done: HashMap<PreprocessProfile, (TokenSequence, TokenSequence)>,
}

impl<'a> ProfileCache<'a> {
    fn new(pre: &'a Preprocessor, s: &'a TokenSequence, t: &'a TokenSequence) -> Self {
        ProfileCache {
            pre,
            raw: (s, t),
            done: HashMap::new(),
        }
    }

    fn get(&mut self, profile: &PreprocessProfile) -> (&TokenSequence, &TokenSequence) {
        let (pre, (s, t)) = (self.pre, self.raw);
        let entry = self
            .done
            .entry(profile.clone())
            .or_insert_with(|| (pre.apply(s, profile), pre.apply(t, profile)));
        (&entry.0, &entry.1)
    }
}

/// Result of batch scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutcome {
    pub table: ScoreTable,
    /// Cells left missing (empty input after preprocessing, out-of-vocabulary, absent key).
    pub missing: usize,
}

/// Scores every pair on every metric. Stores are checked before any scoring;
/// rows come out ordered by pair id regardless of thread count.
pub fn score_all(pairs: &[ExchangePair], metrics: &[MetricId], ctx: &MetricContext<'_, f64>) -> Result<ScoreOutcome> {
    for m in metrics {
        ctx.check(m)?;
    }
    let mut seen = HashSet::new();
    for p in pairs {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::Invalid(format!("duplicate pair id {:?}", p.id)));
        }
    }
    let columns: Vec<String> = metrics.iter().map(MetricId::column).collect();
    if let Some(dup) = columns.iter().enumerate().find(|(i, c)| columns[..*i].contains(c)) {
        return Err(Error::Invalid(format!("metric {:?} requested twice", dup.1)));
    }

    let rows: Vec<(String, Vec<Option<f64>>)> = pairs
        .par_iter()
        .map(|p| {
            let s = tokenize_with_marker(&p.s, INAUDIBLE_MARKER);
            let t = tokenize_with_marker(&p.t, INAUDIBLE_MARKER);
            (p.id.clone(), ctx.score_many(metrics, &p.id, &s, &t))
        })
        .collect();

    let mut table = ScoreTable::new(columns.iter().cloned());
    let mut missing_by_metric: BTreeMap<&str, usize> = BTreeMap::new();
    for (id, values) in rows {
        for (c, v) in columns.iter().zip(&values) {
            if v.is_none() {
                *missing_by_metric.entry(c).or_default() += 1;
            }
        }
        table.insert_row(id, values)?;
    }
    let missing = table.missing_cells();
    for (metric, n) in &missing_by_metric {
        warn!("{metric}: {n} pair(s) have no score");
    }
    Ok(ScoreOutcome { table, missing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ExchangePair;

    fn pair(id: &str, s: &str, t: &str) -> ExchangePair {
        ExchangePair::new(id, "test", s, t)
    }

    #[test]
    fn default_profiles() {
        assert_eq!(MetricName::PctSInT.default_profile().code(), "PST");
        assert_eq!(MetricName::PctTInS.default_profile().code(), "PS");
        assert_eq!(MetricName::Jaccard.default_profile().code(), "PS");
        assert_eq!(MetricName::Bleu.default_profile().code(), "PST");
        assert_eq!(MetricName::GloveAlign.default_profile().code(), "P");
        assert_eq!(MetricName::GloveUtt.default_profile().code(), "PS");
        assert_eq!(MetricName::Lcs.default_profile().code(), "-");
    }

    #[test]
    fn metric_ids_parse() {
        let m: MetricId = "jaccard".parse().unwrap();
        assert_eq!(m.column(), "jaccard");
        let m: MetricId = "jaccard@P".parse().unwrap();
        assert_eq!(m.column(), "jaccard@P");
        assert!("nope".parse::<MetricId>().is_err());
        for name in MetricName::ALL {
            assert_eq!(name.as_str().parse::<MetricName>().unwrap(), name);
        }
    }

    #[test]
    fn shape_and_determinism() {
        let pre = Preprocessor::new();
        let ctx = MetricContext::new(&pre);
        let pairs = vec![
            pair("p3", "we add the two numbers together", "so you add them."),
            pair("p1", "I think it is three fourths", "Why three fourths?"),
            pair(
                "p2",
                "you multiply four times three",
                "Good, four times three is twelve.",
            ),
        ];
        let metrics = [MetricId::new(MetricName::PctSInT), MetricId::new(MetricName::Bleu)];
        let a = score_all(&pairs, &metrics, &ctx).unwrap();
        assert_eq!(a.table.len(), 3);
        assert_eq!(a.table.columns(), ["pct_s_in_t", "bleu"]);
        assert_eq!(a.table.pair_ids().collect::<Vec<_>>(), ["p1", "p2", "p3"]);
        let b = score_all(&pairs, &metrics, &ctx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_after_preprocessing_is_missing() {
        let pre = Preprocessor::new();
        let ctx = MetricContext::new(&pre);
        let pairs = vec![pair("p1", "and so it is what it is.", "It is.")];
        let out = score_all(&pairs, &[MetricId::new(MetricName::PctSInT)], &ctx).unwrap();
        assert_eq!(out.missing, 1);
        assert_eq!(out.table.get("p1", "pct_s_in_t"), None);
    }

    #[test]
    fn missing_store_fails_before_scoring() {
        let pre = Preprocessor::new();
        let ctx = MetricContext::<f64>::new(&pre);
        let pairs = vec![pair("p1", "a b c d e", "a b")];
        for name in [
            MetricName::GloveAlign,
            MetricName::SentCosine,
            MetricName::NucProb,
            MetricName::External,
        ] {
            assert!(matches!(
                score_all(&pairs, &[MetricId::new(name)], &ctx),
                Err(Error::MissingStore { .. })
            ));
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let pre = Preprocessor::new();
        let ctx = MetricContext::new(&pre);
        let pairs = vec![pair("p1", "a b c d e", "a"), pair("p1", "x y z w v", "x")];
        assert!(score_all(&pairs, &[MetricId::new(MetricName::Lcs)], &ctx).is_err());
    }
}

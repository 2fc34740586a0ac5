//! Token-overlap and embedding similarity between a source utterance S and a reply T.

use std::collections::HashSet;

use crate::embeddings::{cosine, dot, norm, sentence_vector, SentenceVectorStore, Side, WordVectorStore};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textprep::{ngrams, TokenSequence};

/// Precision substituted for an n-gram order with no clipped matches.
pub const BLEU_SMOOTHING: f64 = 1e-9;

/// Longest common token subsequence, normalized by `len(s)`.
pub fn lcs_norm<T: Scalar>(s: &TokenSequence, t: &TokenSequence) -> Result<T> {
    if s.is_empty() {
        return Err(Error::EmptySource);
    }
    Ok(T::count(lcs_len(&s.tokens, &t.tokens)) / T::count(s.len()))
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Fraction of token positions in `from` whose token occurs anywhere in `to`.
fn coverage<T: Scalar>(from: &TokenSequence, to: &TokenSequence) -> Option<T> {
    if from.is_empty() {
        return None;
    }
    let set: HashSet<&str> = to.iter().collect();
    let hits = from.iter().filter(|tok| set.contains(tok)).count();
    Some(T::count(hits) / T::count(from.len()))
}

/// Fraction of S's tokens that also appear in T; `None` when S is empty.
pub fn pct_s_in_t<T: Scalar>(s: &TokenSequence, t: &TokenSequence) -> Option<T> {
    coverage(s, t)
}

/// Fraction of T's tokens that also appear in S; `None` when T is empty.
pub fn pct_t_in_s<T: Scalar>(s: &TokenSequence, t: &TokenSequence) -> Option<T> {
    coverage(t, s)
}

pub fn jaccard<T: Scalar>(s: &TokenSequence, t: &TokenSequence) -> Option<T> {
    let a: HashSet<&str> = s.iter().collect();
    let b: HashSet<&str> = t.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return None;
    }
    Some(T::count(a.intersection(&b).count()) / T::count(union))
}

/// Sentence BLEU with S as the reference and T as the hypothesis.
///
/// Orders run from 1 to `min(max_n, len(t))` with uniform weights; an order
/// with no clipped matches contributes [`BLEU_SMOOTHING`] as its precision.
/// Returns `None` for an empty hypothesis.
pub fn bleu<T: Scalar>(s: &TokenSequence, t: &TokenSequence, max_n: usize) -> Option<T> {
    if t.is_empty() || max_n == 0 {
        return None;
    }
    let orders = max_n.min(t.len());
    let mut log_sum = T::zero();
    for n in 1..=orders {
        let hyp = ngrams(&t.tokens, n).ok()?;
        let reference = ngrams(&s.tokens, n).ok()?;
        let clipped: usize = hyp
            .iter()
            .map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0)))
            .sum();
        let total = t.len() - n + 1;
        let p = if clipped == 0 {
            T::of(BLEU_SMOOTHING)
        } else {
            T::count(clipped) / T::count(total)
        };
        log_sum = log_sum + p.ln();
    }
    let ratio = T::count(s.len()) / T::count(t.len());
    let bp = (T::one() - ratio).min(T::zero()).exp();
    Some(bp * (log_sum / T::count(orders)).exp())
}

fn usable_vectors<'a, T: Scalar>(store: &'a WordVectorStore<T>, seq: &TokenSequence) -> Vec<&'a [T]> {
    seq.iter()
        .filter_map(|tok| store.get(tok))
        .filter(|v| norm(v) > T::zero())
        .collect()
}

/// Mean over S's in-vocabulary tokens of the best cosine match among T's
/// in-vocabulary tokens. Directional: `glove_align(s, t) != glove_align(t, s)` in general.
pub fn glove_align<T: Scalar>(store: &WordVectorStore<T>, s: &TokenSequence, t: &TokenSequence) -> Option<T> {
    let sv = usable_vectors(store, s);
    let tv = usable_vectors(store, t);
    if sv.is_empty() || tv.is_empty() {
        return None;
    }
    let mut total = T::zero();
    for a in &sv {
        let best = tv
            .iter()
            .map(|b| cosine(a, b).expect("nonzero vectors of store dimension"))
            .fold(T::neg_infinity(), T::max);
        total = total + best;
    }
    Some(total / T::count(sv.len()))
}

/// Cosine between the averaged word vectors of S and of T.
pub fn glove_utt<T: Scalar>(store: &WordVectorStore<T>, s: &TokenSequence, t: &TokenSequence) -> Option<T> {
    let a = sentence_vector(store, s.iter())?;
    let b = sentence_vector(store, t.iter())?;
    cosine(&a, &b).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceSim {
    Cosine,
    Inner,
}

/// Similarity of the stored S and T vectors for `pair_id`; `None` if either is absent.
pub fn sent_sim<T: Scalar>(store: &SentenceVectorStore<T>, pair_id: &str, mode: SentenceSim) -> Option<T> {
    let a = store.get(pair_id, Side::S)?;
    let b = store.get(pair_id, Side::T)?;
    match mode {
        SentenceSim::Cosine => cosine(a, b).ok(),
        SentenceSim::Inner => dot(a, b).ok(),
    }
}

/// Number of distinct tokens shared by S and T.
pub fn shared_types(s: &TokenSequence, t: &TokenSequence) -> usize {
    let a: HashSet<&str> = s.iter().collect();
    t.iter().collect::<HashSet<_>>().intersection(&a).count()
}

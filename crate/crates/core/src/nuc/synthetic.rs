//! Generated corpora where the reply's dependence on the source is known.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::corpus::ExchangePair;
use crate::seeds;

pub const SYNTHETIC_SOURCE: &str = "synthetic";

const SOURCE_VOCAB: usize = 1000;
const FILLER_VOCAB: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub pair: ExchangePair,
    /// Fraction of S's tokens copied into T.
    pub alpha: f64,
}

fn word(i: usize) -> String {
    format!("w{i:04}")
}

/// `n` pairs where T copies `round(alpha * len(S))` of S's tokens, with
/// `alpha ~ U[0, 1]` per pair, mixed with filler words S never uses.
pub fn copy_corpus(n: usize, seed: u64) -> Vec<SyntheticPair> {
    (0..n)
        .map(|i| {
            let mut rng = seeds::rng(seeds::derive(seed, i as u64));
            let len_s = rng.gen_range(8..=14);
            let s: Vec<String> = (0..len_s).map(|_| word(rng.gen_range(0..SOURCE_VOCAB))).collect();
            let alpha: f64 = rng.gen();
            let copies = (alpha * len_s as f64).round() as usize;
            let mut picked = index::sample(&mut rng, len_s, copies).into_vec();
            picked.sort_unstable();
            let mut t: Vec<String> = picked.into_iter().map(|j| s[j].clone()).collect();
            let filler = len_s - copies + rng.gen_range(0..3);
            t.extend((0..filler).map(|_| word(SOURCE_VOCAB + rng.gen_range(0..FILLER_VOCAB))));
            t.shuffle(&mut rng);
            SyntheticPair {
                pair: ExchangePair::new(format!("syn{i:05}"), SYNTHETIC_SOURCE, s.join(" "), t.join(" ")),
                alpha,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copies_match_alpha() {
        for sp in copy_corpus(50, 3) {
            let s: Vec<&str> = sp.pair.s.split(' ').collect();
            let copied = sp
                .pair
                .t
                .split(' ')
                .filter(|w| w[1..].parse::<usize>().unwrap() < SOURCE_VOCAB)
                .count();
            assert_eq!(copied, (sp.alpha * s.len() as f64).round() as usize);
        }
    }

    #[test]
    fn seeded() {
        assert_eq!(copy_corpus(5, 1), copy_corpus(5, 1));
        assert_ne!(copy_corpus(5, 1), copy_corpus(5, 2));
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::ExchangePair;
use crate::error::{Error, Result};
use crate::seeds;

/// One classification example. A positive and its negatives share `pair_id` and `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NucExample {
    pub pair_id: String,
    pub s: String,
    pub t: String,
    #[serde(with = "zero_one")]
    pub z: bool,
    pub source: String,
}

mod zero_one {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*z))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("z must be 0 or 1, got {other}"))),
        }
    }
}

/// Pairs grouped by source, as indices into the input slice ordered by pair id.
fn groups(pairs: &[ExchangePair]) -> BTreeMap<&str, Vec<usize>> {
    let mut g: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        g.entry(p.source.as_str()).or_default().push(i);
    }
    for members in g.values_mut() {
        members.sort_by(|&a, &b| pairs[a].id.cmp(&pairs[b].id));
    }
    g
}

/// For every pair, `k` distinct teacher replies drawn uniformly without
/// replacement from other pairs of the same source whose reply text differs.
/// Each pair draws from its own generator seeded by `seed` and its id, so the
/// result does not depend on thread count or input order.
pub fn sample_negatives(pairs: &[ExchangePair], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Invalid(
            "at least one negative per pair is required (k >= 1)".into(),
        ));
    }
    let mut ids = BTreeSet::new();
    for p in pairs {
        if !ids.insert(p.id.as_str()) {
            return Err(Error::Invalid(format!("duplicate pair id {:?}", p.id)));
        }
    }
    let groups = groups(pairs);
    for (name, members) in &groups {
        if members.len() <= k {
            return Err(Error::SourceTooSmall {
                group: name.to_string(),
                size: members.len(),
                k,
            });
        }
    }
    let by_pair: Vec<&[usize]> = {
        let mut v = vec![&[][..]; pairs.len()];
        for members in groups.values() {
            for &i in members {
                v[i] = members.as_slice();
            }
        }
        v
    };
    (0..pairs.len())
        .into_par_iter()
        .map(|i| draw(pairs, i, by_pair[i], k, seed))
        .collect()
}

fn draw(pairs: &[ExchangePair], i: usize, group: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    let me = &pairs[i];
    let ok = |j: usize| j != i && pairs[j].t != me.t;
    let mut rng = seeds::rng(seeds::derive_keyed(seed, &me.id));
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let budget = 32 * (k + 1);
    for _ in 0..budget {
        if chosen.len() == k {
            return Ok(chosen);
        }
        let j = group[rng.gen_range(0..group.len())];
        if ok(j) && !chosen.contains(&j) {
            chosen.push(j);
        }
    }
    if chosen.len() == k {
        return Ok(chosen);
    }
    // Rejection kept failing: the group is dominated by duplicates of this reply
    // (or is barely larger than k). Finish by sampling from the explicit list.
    let mut rest: Vec<usize> = group
        .iter()
        .copied()
        .filter(|&j| ok(j) && !chosen.contains(&j))
        .collect();
    let need = k - chosen.len();
    if rest.len() < need {
        return Err(Error::SourceTooSmall {
            group: me.source.clone(),
            size: rest.len() + chosen.len(),
            k,
        });
    }
    rest.shuffle(&mut rng);
    chosen.extend_from_slice(&rest[..need]);
    Ok(chosen)
}

/// `(k + 1) * pairs.len()` examples: each pair's positive followed by its `k` negatives.
pub fn build_nuc_dataset(pairs: &[ExchangePair], k: usize, seed: u64) -> Result<Vec<NucExample>> {
    let negatives = sample_negatives(pairs, k, seed)?;
    let mut out = Vec::with_capacity(pairs.len() * (k + 1));
    for (p, negs) in pairs.iter().zip(negatives) {
        let example = |t: &str, z| NucExample {
            pair_id: p.id.clone(),
            s: p.s.clone(),
            t: t.to_string(),
            z,
            source: p.source.clone(),
        };
        out.push(example(&p.t, true));
        for j in negs {
            out.push(example(&pairs[j].t, false));
        }
    }
    Ok(out)
}

/// Splits by pair id so a positive and its negatives land on the same side.
/// Roughly `fraction` of the pair ids go to the second (held-out) half.
pub fn split_holdout(examples: &[NucExample], fraction: f64, seed: u64) -> (Vec<NucExample>, Vec<NucExample>) {
    let ids: BTreeSet<&str> = examples.iter().map(|e| e.pair_id.as_str()).collect();
    let mut ids: Vec<&str> = ids.into_iter().collect();
    ids.shuffle(&mut seeds::rng(seeds::derive(seed, 0x5eed)));
    let n_test = ((ids.len() as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let test: BTreeSet<&str> = ids[..n_test].iter().copied().collect();
    examples
        .iter()
        .cloned()
        .partition(|e| !test.contains(e.pair_id.as_str()))
}

pub fn write_nuc_dataset<W: Write>(examples: &[NucExample], mut w: W) -> std::io::Result<()> {
    for e in examples {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_nuc_dataset<R: BufRead>(r: R) -> Result<Vec<NucExample>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::parse("nuc dataset", i + 1, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse("nuc dataset", i + 1, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(n: usize, source: &str) -> Vec<ExchangePair> {
        (0..n)
            .map(|i| {
                ExchangePair::new(
                    format!("{source}{i}"),
                    source,
                    format!("s {i}"),
                    format!("{source}-t{i}"),
                )
            })
            .collect()
    }

    #[test]
    fn sizes_and_balance() {
        let ds = build_nuc_dataset(&corpus(100, "a"), 3, 7).unwrap();
        assert_eq!(ds.len(), 400);
        assert_eq!(ds.iter().filter(|e| e.z).count(), 100);
    }

    #[test]
    fn k_zero_and_small_groups() {
        assert!(build_nuc_dataset(&corpus(10, "a"), 0, 1).is_err());
        let mut pairs = corpus(10, "a");
        pairs.extend(corpus(3, "b"));
        match build_nuc_dataset(&pairs, 3, 1) {
            Err(Error::SourceTooSmall { group, size: 3, k: 3 }) => assert_eq!(group, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic_and_order_free() {
        let pairs = corpus(50, "a");
        let a = build_nuc_dataset(&pairs, 3, 42).unwrap();
        assert_eq!(a, build_nuc_dataset(&pairs, 3, 42).unwrap());
        assert_ne!(a, build_nuc_dataset(&pairs, 3, 43).unwrap());

        let mut rev = pairs.clone();
        rev.reverse();
        let b = build_nuc_dataset(&rev, 3, 42).unwrap();
        let negs = |ds: &[NucExample], id: &str| -> Vec<String> {
            ds.iter()
                .filter(|e| e.pair_id == id && !e.z)
                .map(|e| e.t.clone())
                .collect()
        };
        assert_eq!(negs(&a, "a17"), negs(&b, "a17"));
    }

    #[test]
    fn duplicate_replies_fall_back_to_enumeration() {
        let mut pairs: Vec<ExchangePair> = (0..40)
            .map(|i| ExchangePair::new(format!("p{i}"), "a", "s", "same"))
            .collect();
        pairs.push(ExchangePair::new("x", "a", "s", "other"));
        pairs.push(ExchangePair::new("y", "a", "s", "third"));
        let negs = sample_negatives(&pairs, 2, 3).unwrap();
        let mut got: Vec<&str> = negs[0].iter().map(|&j| pairs[j].t.as_str()).collect();
        got.sort();
        assert_eq!(got, ["other", "third"]);
        assert!(sample_negatives(&pairs, 3, 3).is_err());
    }

    #[test]
    fn jsonl_format() {
        let ds = build_nuc_dataset(&corpus(5, "a"), 1, 0).unwrap();
        let mut buf = Vec::new();
        write_nuc_dataset(&ds[..1], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"pair_id\":\"a0\",\"s\":\"s 0\",\"t\":\"a-t0\",\"z\":1,\"source\":\"a\"}\n"
        );
        assert_eq!(read_nuc_dataset(&buf[..]).unwrap(), ds[..1]);
        assert!(read_nuc_dataset(r#"{"pair_id":"a","s":"","t":"","z":2,"source":""}"#.as_bytes()).is_err());
    }

    #[test]
    fn holdout_keeps_groups_together() {
        let ds = build_nuc_dataset(&corpus(100, "a"), 3, 1).unwrap();
        let (train, test) = split_holdout(&ds, 0.2, 9);
        assert_eq!(test.len(), 80);
        assert_eq!(train.len(), 320);
        let train_ids: BTreeSet<_> = train.iter().map(|e| &e.pair_id).collect();
        assert!(test.iter().all(|e| !train_ids.contains(&e.pair_id)));
    }

    proptest! {
        #[test]
        fn negatives_are_valid(n in 5usize..40, k in 1usize..4, seed in any::<u64>()) {
            let mut pairs = corpus(n, "a");
            pairs.extend(corpus(n, "b"));
            let ds = build_nuc_dataset(&pairs, k, seed).unwrap();
            prop_assert_eq!(ds.len(), (k + 1) * pairs.len());
            for chunk in ds.chunks(k + 1) {
                let pos = &chunk[0];
                prop_assert!(pos.z);
                let mut seen = BTreeSet::new();
                for neg in &chunk[1..] {
                    prop_assert!(!neg.z);
                    prop_assert_eq!(&neg.s, &pos.s);
                    prop_assert_eq!(&neg.pair_id, &pos.pair_id);
                    prop_assert_ne!(&neg.t, &pos.t);
                    let prefix = format!("{}-", pos.source);
                    prop_assert!(neg.t.starts_with(&prefix));
                    prop_assert!(seen.insert(neg.t.clone()));
                }
            }
        }
    }
}

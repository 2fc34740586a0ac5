use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::median::median_test;
use crate::error::{Error, Result};
use crate::scalar::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phenomenon {
    Acknowledgment,
    Answer,
    Reformulation,
    CollaborativeCompletion,
    Repetition,
}

impl Phenomenon {
    pub const ALL: [Phenomenon; 5] = [
        Phenomenon::Acknowledgment,
        Phenomenon::Answer,
        Phenomenon::Reformulation,
        Phenomenon::CollaborativeCompletion,
        Phenomenon::Repetition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phenomenon::Acknowledgment => "acknowledgment",
            Phenomenon::Answer => "answer",
            Phenomenon::Reformulation => "reformulation",
            Phenomenon::CollaborativeCompletion => "collaborative_completion",
            Phenomenon::Repetition => "repetition",
        }
    }
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phenomenon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phenomenon::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown phenomenon {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// The whole tag is one of these.
    ExactTagSet(BTreeSet<String>),
    /// The tag contains this marker, e.g. `^2`.
    Marker(String),
    /// The part of the tag before `stop` (or the whole tag) contains `needle`.
    Substring { needle: String, stop: Option<char> },
}

impl Matcher {
    pub fn matches(&self, tag: &str) -> bool {
        match self {
            Matcher::ExactTagSet(set) => set.contains(tag),
            Matcher::Marker(m) => tag.contains(m.as_str()),
            Matcher::Substring { needle, stop } => {
                let head = match stop {
                    Some(c) => tag.split(*c).next().unwrap_or(""),
                    None => tag,
                };
                head.contains(needle.as_str())
            }
        }
    }
}

/// Ordered rules; the first match wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhenomenonMapping {
    pub rules: Vec<(Matcher, Phenomenon)>,
}

impl Default for PhenomenonMapping {
    fn default() -> Self {
        let set = |tags: &[&str]| Matcher::ExactTagSet(tags.iter().map(|t| t.to_string()).collect());
        PhenomenonMapping {
            rules: vec![
                (set(&["b", "bh", "bk"]), Phenomenon::Acknowledgment),
                (Matcher::Marker("^2".into()), Phenomenon::CollaborativeCompletion),
                (Matcher::Marker("^m".into()), Phenomenon::Repetition),
                (set(&["bf"]), Phenomenon::Reformulation),
                (
                    Matcher::Substring {
                        needle: "n".into(),
                        stop: Some('^'),
                    },
                    Phenomenon::Answer,
                ),
            ],
        }
    }
}

pub fn map_damsl(tag: &str, mapping: &PhenomenonMapping) -> Option<Phenomenon> {
    let tag = tag.trim();
    mapping.rules.iter().find(|(m, _)| m.matches(tag)).map(|(_, p)| *p)
}

/// Reads a `pair_id,tag` CSV.
pub fn read_tags<R: Read>(r: R) -> Result<BTreeMap<String, String>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = BTreeMap::new();
    for (i, rec) in rd.deserialize::<(String, String)>().enumerate() {
        let line = i + 2;
        let (id, tag) = rec.map_err(|e| Error::parse("tags", line, e))?;
        if out.insert(id.clone(), tag).is_some() {
            return Err(Error::DuplicateKey { line, key: id });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenomenonDelta {
    pub phenomenon: Phenomenon,
    pub n: usize,
    /// `median(a) - median(b)` over matching pairs; `None` with fewer than two.
    pub delta: Option<f64>,
    pub p_value: Option<f64>,
}

/// Median difference between two (quantile-transformed) score columns over
/// the pairs whose tag maps to each phenomenon, with a median-test p-value.
pub fn phenomenon_delta(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
    tags: &BTreeMap<String, String>,
    mapping: &PhenomenonMapping,
) -> Result<Vec<PhenomenonDelta>> {
    let mut groups: BTreeMap<Phenomenon, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (id, tag) in tags {
        let Some(p) = map_damsl(tag, mapping) else { continue };
        if let (Some(&x), Some(&y)) = (a.get(id), b.get(id)) {
            let g = groups.entry(p).or_default();
            g.0.push(x);
            g.1.push(y);
        }
    }
    Phenomenon::ALL
        .iter()
        .map(|&phenomenon| {
            let (xa, xb) = groups.remove(&phenomenon).unwrap_or_default();
            let n = xa.len();
            if n < 2 {
                return Ok(PhenomenonDelta {
                    phenomenon,
                    n,
                    delta: None,
                    p_value: None,
                });
            }
            let delta = median(&xa).expect("nonempty") - median(&xb).expect("nonempty");
            Ok(PhenomenonDelta {
                phenomenon,
                n,
                delta: Some(delta),
                p_value: Some(median_test(&xa, &xb)?.p_value),
            })
        })
        .collect()
}

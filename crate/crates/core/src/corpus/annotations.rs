use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low = 0,
    Mid = 1,
    High = 2,
}

impl Level {
    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn parse(s: &str) -> Option<Level> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Some(Level::Low),
            "mid" => Some(Level::Mid),
            "high" => Some(Level::High),
            _ => None,
        }
    }
}

/// One rater's judgment of one pair. `level` is `Some` exactly when `on_topic` holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaterJudgment {
    pub rater_id: String,
    pub pair_id: String,
    pub on_topic: bool,
    pub level: Option<Level>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub pair_id: String,
    pub value: f64,
    pub n_raters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub rater_id: String,
    pub pair_id: String,
    pub z: f64,
}

#[derive(Debug, Deserialize)]
struct AnnotationRow {
    rater_id: String,
    pair_id: String,
    on_topic: String,
    #[serde(default)]
    level: String,
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<RaterJudgment>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(file)
}

pub fn read_annotations<R: Read>(r: R) -> Result<Vec<RaterJudgment>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rd.deserialize::<AnnotationRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse("annotations", line, e))?;
        let on_topic = match row.on_topic.to_ascii_lowercase().as_str() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(Error::parse(
                    "annotations",
                    line,
                    format!("on_topic must be true or false, got {other:?}"),
                ))
            }
        };
        let level = if row.level.is_empty() {
            None
        } else {
            Some(Level::parse(&row.level).ok_or_else(|| Error::UnknownLevel {
                line,
                level: row.level.clone(),
            })?)
        };
        if on_topic && level.is_none() {
            return Err(Error::parse("annotations", line, "on-topic judgment without a level"));
        }
        if !seen.insert((row.rater_id.clone(), row.pair_id.clone())) {
            return Err(Error::DuplicateJudgment {
                rater: row.rater_id,
                pair: row.pair_id,
            });
        }
        out.push(RaterJudgment {
            rater_id: row.rater_id,
            pair_id: row.pair_id,
            on_topic,
            // an off-topic vote carries no level even if one was written
            level: level.filter(|_| on_topic),
        });
    }
    Ok(out)
}

fn excluded_pairs(judgments: &[RaterJudgment]) -> HashSet<&str> {
    judgments
        .iter()
        .filter(|j| !j.on_topic)
        .map(|j| j.pair_id.as_str())
        .collect()
}

/// Per-rater z-scores over the judgments that survive off-topic exclusion,
/// sorted by (rater, pair). Raters with fewer than two judgments or zero
/// variance get z = 0.
pub fn zscore_judgments(judgments: &[RaterJudgment]) -> Vec<ZScore> {
    let excluded = excluded_pairs(judgments);
    let mut by_rater: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for j in judgments {
        if excluded.contains(j.pair_id.as_str()) {
            continue;
        }
        if let Some(level) = j.level {
            by_rater
                .entry(&j.rater_id)
                .or_default()
                .push((&j.pair_id, f64::from(level.value())));
        }
    }
    let mut out = Vec::new();
    for (rater, mut items) in by_rater {
        items.sort_by(|a, b| a.0.cmp(b.0));
        let values: Vec<f64> = items.iter().map(|(_, v)| *v).collect();
        let m = mean(&values).unwrap_or(0.0);
        let sd = sample_sd(&values).filter(|sd| *sd > 0.0);
        if sd.is_none() {
            log::warn!(
                "rater {rater} has no variance across {} judgments; z-scores set to 0",
                values.len()
            );
        }
        for (pair, v) in items {
            out.push(ZScore {
                rater_id: rater.to_string(),
                pair_id: pair.to_string(),
                z: sd.map_or(0.0, |sd| (v - m) / sd),
            });
        }
    }
    out
}

/// Gold labels, sorted by pair id: pairs with any off-topic vote are dropped
/// and the remaining value is the mean of the raters' z-scores.
pub fn aggregate_labels(judgments: &[RaterJudgment]) -> Vec<GoldLabel> {
    let mut by_pair: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for z in zscore_judgments(judgments) {
        by_pair.entry(z.pair_id).or_default().push(z.z);
    }
    by_pair
        .into_iter()
        .map(|(pair_id, zs)| GoldLabel {
            pair_id,
            value: mean(&zs).expect("at least one judgment"),
            n_raters: zs.len(),
        })
        .collect()
}

/// Rows of per-item category counts (low, mid, high) over pairs that survive
/// off-topic exclusion, sorted by pair id.
pub fn level_counts(judgments: &[RaterJudgment]) -> Vec<(String, [usize; 3])> {
    let excluded = excluded_pairs(judgments);
    let mut counts: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for j in judgments {
        if let (false, Some(level)) = (excluded.contains(j.pair_id.as_str()), j.level) {
            counts.entry(&j.pair_id).or_default()[level.value() as usize] += 1;
        }
    }
    counts.into_iter().map(|(p, c)| (p.to_string(), c)).collect()
}

pub fn write_gold_labels<W: Write>(labels: &[GoldLabel], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for l in labels {
        wr.serialize(l)
            .map_err(|e| Error::Invalid(format!("writing labels: {e}")))?;
    }
    wr.flush().map_err(|e| Error::Invalid(format!("writing labels: {e}")))?;
    Ok(())
}

/// Reads `pair_id,value[,n_raters]` CSV.
pub fn read_gold_labels<R: Read>(r: R) -> Result<Vec<GoldLabel>> {
    #[derive(Deserialize)]
    struct Row {
        pair_id: String,
        value: f64,
        #[serde(default = "one")]
        n_raters: usize,
    }
    fn one() -> usize {
        1
    }
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, row) in rd.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse("labels", line, e))?;
        if !row.value.is_finite() {
            return Err(Error::parse("labels", line, "non-finite label"));
        }
        if !seen.insert(row.pair_id.clone()) {
            return Err(Error::DuplicateKey { line, key: row.pair_id });
        }
        out.push(GoldLabel {
            pair_id: row.pair_id,
            value: row.value,
            n_raters: row.n_raters,
        });
    }
    Ok(out)
}

pub fn write_zscores<W: Write>(scores: &[ZScore], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for z in scores {
        wr.serialize(z)
            .map_err(|e| Error::Invalid(format!("writing z-scores: {e}")))?;
    }
    wr.flush()
        .map_err(|e| Error::Invalid(format!("writing z-scores: {e}")))?;
    Ok(())
}

/// Reads `rater_id,pair_id,z` CSV.
pub fn read_zscores<R: Read>(r: R) -> Result<Vec<ZScore>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rd.deserialize::<ZScore>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse("z-scores", line, e))?;
        if !row.z.is_finite() {
            return Err(Error::parse("z-scores", line, "non-finite z"));
        }
        if !seen.insert((row.rater_id.clone(), row.pair_id.clone())) {
            return Err(Error::DuplicateJudgment {
                rater: row.rater_id,
                pair: row.pair_id,
            });
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(r: &str, p: &str, level: Option<Level>) -> RaterJudgment {
        RaterJudgment {
            rater_id: r.into(),
            pair_id: p.into(),
            on_topic: level.is_some(),
            level,
        }
    }

    #[test]
    fn parses_rows() {
        let csv = "rater_id,pair_id,on_topic,level\nr1,p1,true,high\nr1,p2,false,\n";
        let js = read_annotations(csv.as_bytes()).unwrap();
        assert_eq!(js[0].level, Some(Level::High));
        assert_eq!(js[0].level.unwrap().value(), 2);
        assert!(!js[1].on_topic);
        assert_eq!(js[1].level, None);
    }

    #[test]
    fn rejects_bad_rows() {
        let dup = "rater_id,pair_id,on_topic,level\nr1,p1,true,high\nr1,p1,true,low\n";
        assert!(matches!(
            read_annotations(dup.as_bytes()),
            Err(Error::DuplicateJudgment { .. })
        ));
        let unknown = "rater_id,pair_id,on_topic,level\nr1,p1,true,huge\n";
        assert!(matches!(
            read_annotations(unknown.as_bytes()),
            Err(Error::UnknownLevel { line: 2, .. })
        ));
    }

    #[test]
    fn off_topic_pair_is_dropped() {
        let js = vec![
            j("r1", "p1", Some(Level::High)),
            j("r2", "p1", None),
            j("r1", "p2", Some(Level::Low)),
            j("r2", "p2", Some(Level::Mid)),
        ];
        let labels = aggregate_labels(&js);
        assert_eq!(labels.len(), 1);
        assert_eq!(labels[0].pair_id, "p2");
    }

    #[test]
    fn zscores_of_three_levels() {
        let js = vec![
            j("r1", "a", Some(Level::Low)),
            j("r1", "b", Some(Level::Mid)),
            j("r1", "c", Some(Level::High)),
        ];
        let z: Vec<f64> = zscore_judgments(&js).iter().map(|z| z.z).collect();
        assert_eq!(z, [-1.0, 0.0, 1.0]);
    }

    #[test]
    fn shared_high_level_averages_to_one() {
        // each rater: levels {2, 1, 0} -> mean 1, sd 1, so level 2 has z = 1
        let mut js = Vec::new();
        for r in ["r1", "r2", "r3"] {
            js.push(j(r, "target", Some(Level::High)));
            js.push(j(r, &format!("{r}-mid"), Some(Level::Mid)));
            js.push(j(r, &format!("{r}-low"), Some(Level::Low)));
        }
        let labels = aggregate_labels(&js);
        let target = labels.iter().find(|l| l.pair_id == "target").unwrap();
        assert_eq!(target.value, 1.0);
        assert_eq!(target.n_raters, 3);
    }

    #[test]
    fn constant_rater_gets_zero() {
        let js = vec![j("r1", "a", Some(Level::Mid)), j("r1", "b", Some(Level::Mid))];
        assert!(zscore_judgments(&js).iter().all(|z| z.z == 0.0));
    }

    #[test]
    fn counts_per_item() {
        let js = vec![
            j("r1", "a", Some(Level::Mid)),
            j("r2", "a", Some(Level::Mid)),
            j("r3", "a", Some(Level::High)),
            j("r1", "b", None),
        ];
        assert_eq!(level_counts(&js), vec![("a".to_string(), [0, 2, 1])]);
    }

    #[test]
    fn zscores_round_trip() {
        let zs = vec![ZScore {
            rater_id: "r".into(),
            pair_id: "p".into(),
            z: 0.5,
        }];
        let mut buf = Vec::new();
        write_zscores(&zs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "rater_id,pair_id,z\nr,p,0.5\n");
        assert_eq!(read_zscores(&buf[..]).unwrap(), zs);
    }

    #[test]
    fn labels_round_trip() {
        let labels = vec![GoldLabel {
            pair_id: "p".into(),
            value: -0.25,
            n_raters: 3,
        }];
        let mut buf = Vec::new();
        write_gold_labels(&labels, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "pair_id,value,n_raters\np,-0.25,3\n"
        );
        assert_eq!(read_gold_labels(&buf[..]).unwrap(), labels);
        assert_eq!(
            read_gold_labels("pair_id,value\nq,1\n".as_bytes()).unwrap()[0].n_raters,
            1
        );
    }
}

//! Transcripts, (S, T) pair extraction, rater judgments and gold labels.

mod annotations;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::{tokenize_with_marker, INAUDIBLE_MARKER};

pub use annotations::{
    aggregate_labels, level_counts, load_annotations, read_annotations, read_gold_labels, read_zscores,
    write_gold_labels, write_zscores, zscore_judgments, GoldLabel, Level, RaterJudgment, ZScore,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Student,
    Teacher,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "student" => Ok(Role::Student),
            "teacher" => Ok(Role::Teacher),
            _ => Err(s.to_string()),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Student => "student",
            Role::Teacher => "teacher",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub speaker_role: Role,
    pub text: String,
    pub turn_index: usize,
}

/// One conversation, utterances ordered by strictly increasing turn index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptFormat {
    Jsonl,
    Csv,
}

impl FromStr for TranscriptFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" => Ok(TranscriptFormat::Jsonl),
            "csv" => Ok(TranscriptFormat::Csv),
            other => Err(Error::Invalid(format!("unknown transcript format {other:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
struct TranscriptRecord {
    transcript_id: String,
    turn: usize,
    role: String,
    text: String,
}

pub fn load_transcripts(path: impl AsRef<Path>, format: TranscriptFormat) -> Result<Vec<Transcript>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_transcripts(BufReader::new(file), format)
}

/// Parses transcript rows and groups them by transcript id, in order of first appearance.
pub fn read_transcripts<R: BufRead>(reader: R, format: TranscriptFormat) -> Result<Vec<Transcript>> {
    let records: Vec<(usize, TranscriptRecord)> = match format {
        TranscriptFormat::Jsonl => {
            let mut out = Vec::new();
            for (i, line) in reader.lines().enumerate() {
                let lineno = i + 1;
                let line = line.map_err(|e| Error::parse("transcripts", lineno, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec = serde_json::from_str(&line).map_err(|e| Error::parse("transcripts", lineno, e))?;
                out.push((lineno, rec));
            }
            out
        }
        TranscriptFormat::Csv => {
            let mut rd = csv::Reader::from_reader(reader);
            let mut out = Vec::new();
            for (i, rec) in rd.deserialize().enumerate() {
                let lineno = i + 2;
                let rec = rec.map_err(|e| Error::parse("transcripts", lineno, e))?;
                out.push((lineno, rec));
            }
            out
        }
    };

    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<(usize, Utterance)>> = BTreeMap::new();
    for (line, rec) in records {
        let speaker_role = rec
            .role
            .parse::<Role>()
            .map_err(|role| Error::UnknownRole { line, role })?;
        let text = rec.text.trim().to_string();
        if text.is_empty() {
            return Err(Error::parse("transcripts", line, "empty utterance text"));
        }
        if !groups.contains_key(&rec.transcript_id) {
            order.push(rec.transcript_id.clone());
        }
        groups.entry(rec.transcript_id).or_default().push((
            line,
            Utterance {
                speaker_role,
                text,
                turn_index: rec.turn,
            },
        ));
    }

    order
        .into_iter()
        .map(|id| {
            let mut utts = groups.remove(&id).unwrap_or_default();
            utts.sort_by_key(|(_, u)| u.turn_index);
            for w in utts.windows(2) {
                if w[0].1.turn_index == w[1].1.turn_index {
                    return Err(Error::parse(
                        "transcripts",
                        w[1].0,
                        format!("duplicate turn {} in transcript {id:?}", w[1].1.turn_index),
                    ));
                }
            }
            Ok(Transcript {
                id,
                utterances: utts.into_iter().map(|(_, u)| u).collect(),
            })
        })
        .collect()
}

/// A student utterance S and the teacher reply T that immediately follows it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangePair {
    pub id: String,
    pub source: String,
    pub s: String,
    pub t: String,
    /// Up to two utterances preceding S, oldest first.
    #[serde(default)]
    pub context: Vec<String>,
    /// Transcript the pair was extracted from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_topic_votes: Option<Vec<bool>>,
}

impl ExchangePair {
    pub fn new(id: impl Into<String>, source: impl Into<String>, s: impl Into<String>, t: impl Into<String>) -> Self {
        ExchangePair {
            id: id.into(),
            source: source.into(),
            s: s.into(),
            t: t.into(),
            context: Vec::new(),
            conversation: None,
            on_topic_votes: None,
        }
    }

    /// Conversation id, falling back to the pair id for pairs without one.
    pub fn conversation_id(&self) -> &str {
        self.conversation.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractConfig {
    pub min_s_tokens: usize,
    pub inaudible_marker: String,
    pub source: String,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            min_s_tokens: 5,
            inaudible_marker: INAUDIBLE_MARKER.to_string(),
            source: "default".to_string(),
        }
    }
}

impl ExtractConfig {
    /// S has enough non-punctuation tokens and neither side contains the marker.
    pub fn accepts(&self, s: &str, t: &str) -> bool {
        let marker = self.inaudible_marker.as_str();
        if !marker.is_empty() && (s.contains(marker) || t.contains(marker)) {
            return false;
        }
        tokenize_with_marker(s, marker).content_len() >= self.min_s_tokens
    }
}

/// Every student turn immediately followed by a teacher turn, kept when
/// [`ExtractConfig::accepts`] holds.
pub fn extract_pairs(transcripts: &[Transcript], cfg: &ExtractConfig) -> Vec<ExchangePair> {
    let mut out = Vec::new();
    for tr in transcripts {
        for (i, w) in tr.utterances.windows(2).enumerate() {
            let (s, t) = (&w[0], &w[1]);
            if s.speaker_role != Role::Student || t.speaker_role != Role::Teacher {
                continue;
            }
            if !cfg.accepts(&s.text, &t.text) {
                continue;
            }
            let context = tr.utterances[i.saturating_sub(2)..i]
                .iter()
                .map(|u| u.text.clone())
                .collect();
            out.push(ExchangePair {
                id: format!("{}:{}", tr.id, s.turn_index),
                source: cfg.source.clone(),
                s: s.text.clone(),
                t: t.text.clone(),
                context,
                conversation: Some(tr.id.clone()),
                on_topic_votes: None,
            });
        }
    }
    out
}

/// Re-applies the extraction filter to already-extracted pairs.
pub fn retain_valid(pairs: &[ExchangePair], cfg: &ExtractConfig) -> Vec<ExchangePair> {
    pairs.iter().filter(|p| cfg.accepts(&p.s, &p.t)).cloned().collect()
}

pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<ExchangePair>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse("pairs", lineno, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse("pairs", lineno, e))?);
    }
    Ok(out)
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<ExchangePair>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_pairs(BufReader::new(file))
}

pub fn write_pairs<W: Write>(pairs: &[ExchangePair], mut w: W) -> std::io::Result<()> {
    for p in pairs {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jsonl(rows: &[(&str, usize, &str, &str)]) -> String {
        rows.iter()
            .map(|(id, turn, role, text)| {
                serde_json::json!({"transcript_id": id, "turn": turn, "role": role, "text": text}).to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn load(text: &str) -> Result<Vec<Transcript>> {
        read_transcripts(text.as_bytes(), TranscriptFormat::Jsonl)
    }

    #[test]
    fn two_line_transcript() {
        let t = load(&jsonl(&[("a", 0, "student", "hi there"), ("a", 1, "Teacher", "hello")])).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].utterances.len(), 2);
        assert_eq!(t[0].utterances[1].speaker_role, Role::Teacher);
    }

    #[test]
    fn empty_file() {
        assert!(load("").unwrap().is_empty());
    }

    #[test]
    fn unknown_role() {
        let err = load(&jsonl(&[("a", 0, "observer", "hm")])).unwrap_err();
        assert!(matches!(&err, Error::UnknownRole { line: 1, role } if role == "observer"));
        assert!(err.to_string().contains("unknown speaker role"));
    }

    #[test]
    fn parse_error_carries_line() {
        let text = format!("{}\n{{not json", jsonl(&[("a", 0, "student", "x")]));
        assert!(matches!(load(&text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn orders_by_turn_and_rejects_duplicates() {
        let t = load(&jsonl(&[("a", 5, "teacher", "b"), ("a", 2, "student", "a")])).unwrap();
        assert_eq!(t[0].utterances[0].turn_index, 2);
        assert!(load(&jsonl(&[("a", 1, "teacher", "b"), ("a", 1, "student", "a")])).is_err());
    }

    #[test]
    fn csv_transcripts() {
        let text = "transcript_id,turn,role,text\nx,0,student,\"well, I think so\"\nx,1,teacher,why?\n";
        let t = read_transcripts(text.as_bytes(), TranscriptFormat::Csv).unwrap();
        assert_eq!(t[0].utterances[0].text, "well, I think so");
    }

    fn extract(rows: &[(&str, usize, &str, &str)]) -> Vec<ExchangePair> {
        extract_pairs(&load(&jsonl(rows)).unwrap(), &ExtractConfig::default())
    }

    #[test]
    fn extraction_filters() {
        assert!(extract(&[("a", 0, "student", "Yes."), ("a", 1, "teacher", "Good.")]).is_empty());
        assert!(extract(&[
            ("a", 0, "student", "you would multiply four times three"),
            ("a", 1, "teacher", "Good [Inaudible] work here today"),
        ])
        .is_empty());
        let kept = extract(&[
            ("a", 0, "student", "you would multiply four times three"),
            ("a", 1, "teacher", "Why multiply?"),
        ]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a:0");
        assert_eq!(kept[0].conversation.as_deref(), Some("a"));
    }

    #[test]
    fn adjacency_and_context() {
        let pairs = extract(&[
            ("a", 0, "teacher", "What do we do next?"),
            ("a", 1, "student", "um"),
            ("a", 2, "student", "we add the tens and the ones"),
            ("a", 3, "teacher", "Right, add them."),
            ("a", 4, "teacher", "And then?"),
        ]);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].s, "we add the tens and the ones");
        assert_eq!(pairs[0].context, ["What do we do next?", "um"]);
    }

    #[test]
    fn pairs_jsonl_round_trip() {
        let mut p = ExchangePair::new("p1", "ncte", "s text", "t text");
        p.context = vec!["c".into()];
        let mut buf = Vec::new();
        write_pairs(&[p.clone()], &mut buf).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.starts_with(r#"{"id":"p1","source":"ncte","s":"s text","t":"t text","context":["c"]}"#));
        assert_eq!(read_pairs(&buf[..]).unwrap(), vec![p]);
    }
}

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::ExchangePair;
use crate::error::{Error, Result};
use crate::similarity::ScoreTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueRates {
    pub conversation: String,
    pub n_pairs: usize,
    pub question_rate: f64,
    pub exclamation_rate: f64,
}

/// Per conversation, the fraction of pairs whose reply contains `?` and `!`.
pub fn cue_rates(pairs: &[ExchangePair]) -> Vec<CueRates> {
    let mut acc: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for p in pairs {
        let e = acc.entry(p.conversation_id()).or_default();
        e.0 += 1;
        e.1 += usize::from(p.t.contains('?'));
        e.2 += usize::from(p.t.contains('!'));
    }
    acc.into_iter()
        .map(|(c, (n, q, x))| CueRates {
            conversation: c.to_string(),
            n_pairs: n,
            question_rate: q as f64 / n as f64,
            exclamation_rate: x as f64 / n as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationScore {
    pub conversation: String,
    pub mean: f64,
    pub n_pairs: usize,
}

/// Mean of the present scores in `column` per conversation, with the number of
/// pairs that contributed. Conversations without any score are left out.
pub fn conversation_aggregate(
    scores: &ScoreTable,
    column: &str,
    pairs: &[ExchangePair],
) -> Result<Vec<ConversationScore>> {
    let conv: HashMap<&str, &str> = pairs.iter().map(|p| (p.id.as_str(), p.conversation_id())).collect();
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (id, v) in scores.column(column)? {
        let c = *conv
            .get(id)
            .ok_or_else(|| Error::Invalid(format!("scored pair {id:?} has no conversation")))?;
        let e = acc.entry(c).or_default();
        if let Some(v) = v {
            e.0 += v;
            e.1 += 1;
        }
    }
    let mut out = Vec::with_capacity(acc.len());
    for (c, (sum, n)) in acc {
        if n == 0 {
            log::warn!("conversation {c} has no {column} scores; omitted");
            continue;
        }
        out.push(ConversationScore {
            conversation: c.to_string(),
            mean: sum / n as f64,
            n_pairs: n,
        });
    }
    Ok(out)
}

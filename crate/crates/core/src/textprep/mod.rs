//! Tokenization and the three preprocessing switches (punctuation removal,
//! stopword removal, stemming) that parameterize the token-based metrics.

mod stem;
mod stopwords;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stem::stem;
pub use stopwords::{StopwordList, DEFAULT_STOPWORDS_ID};

/// Marker transcribers insert for unintelligible audio.
pub const INAUDIBLE_MARKER: &str = "[Inaudible]";

/// Lowercased tokens of one utterance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub source_text: String,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Builds a sequence from already-normalized tokens (used by fixtures and synthetic corpora).
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
        let source_text = tokens.join(" ");
        TokenSequence { tokens, source_text }
    }

    /// Number of tokens that are not pure punctuation.
    pub fn content_len(&self) -> usize {
        self.tokens.iter().filter(|t| !is_punct(t)).count()
    }
}

/// A token made up solely of non-alphanumeric characters.
pub fn is_punct(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_alphanumeric)
}

/// Tokenizes with the default inaudible marker.
pub fn tokenize(text: &str) -> TokenSequence {
    tokenize_with_marker(text, INAUDIBLE_MARKER)
}

/// Lowercases, splits on whitespace and peels leading/trailing punctuation off
/// each chunk as single-character tokens. Internal apostrophes and hyphens stay
/// inside their token; `marker` (matched case-insensitively) is kept whole.
pub fn tokenize_with_marker(text: &str, marker: &str) -> TokenSequence {
    let marker = marker.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chunk = chunk.to_lowercase();
        if marker.is_empty() {
            split_chunk(&chunk, &mut tokens);
            continue;
        }
        let mut rest = chunk.as_str();
        while let Some(pos) = rest.find(&marker) {
            split_chunk(&rest[..pos], &mut tokens);
            tokens.push(marker.clone());
            rest = &rest[pos + marker.len()..];
        }
        split_chunk(rest, &mut tokens);
    }
    TokenSequence {
        tokens,
        source_text: text.to_string(),
    }
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let start = chars.iter().position(|c| c.is_alphanumeric()).unwrap_or(chars.len());
    let end = chars.iter().rposition(|c| c.is_alphanumeric()).map_or(start, |i| i + 1);
    out.extend(chars[..start].iter().map(|c| c.to_string()));
    if start < end {
        out.push(chars[start..end].iter().collect());
    }
    out.extend(chars[end.max(start)..].iter().map(|c| c.to_string()));
}

/// Which preprocessing stages a metric applies. Stages run in the fixed order
/// punctuation removal, stopword removal, stemming.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreprocessProfile {
    pub remove_punct: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
    pub stopword_list_id: String,
}

impl PreprocessProfile {
    pub const fn flags(remove_punct: bool, remove_stopwords: bool, stem: bool) -> ProfileFlags {
        ProfileFlags {
            remove_punct,
            remove_stopwords,
            stem,
        }
    }

    pub fn none() -> Self {
        Self::from(ProfileFlags::NONE)
    }

    /// Compact `PST` code (P = punctuation, S = stopwords, T = stemming); `-` for none.
    pub fn code(&self) -> String {
        let mut s = String::new();
        if self.remove_punct {
            s.push('P');
        }
        if self.remove_stopwords {
            s.push('S');
        }
        if self.stem {
            s.push('T');
        }
        if s.is_empty() {
            s.push('-');
        }
        s
    }

    pub fn with_stopword_list(mut self, id: impl Into<String>) -> Self {
        self.stopword_list_id = id.into();
        self
    }
}

impl Default for PreprocessProfile {
    fn default() -> Self {
        Self::none()
    }
}

/// The boolean part of a profile, usable in `const` contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileFlags {
    pub remove_punct: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
}

impl ProfileFlags {
    pub const NONE: ProfileFlags = PreprocessProfile::flags(false, false, false);
}

impl From<ProfileFlags> for PreprocessProfile {
    fn from(f: ProfileFlags) -> Self {
        PreprocessProfile {
            remove_punct: f.remove_punct,
            remove_stopwords: f.remove_stopwords,
            stem: f.stem,
            stopword_list_id: DEFAULT_STOPWORDS_ID.to_string(),
        }
    }
}

impl FromStr for PreprocessProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = ProfileFlags::NONE;
        for c in s.trim().chars() {
            match c.to_ascii_uppercase() {
                'P' => flags.remove_punct = true,
                'S' => flags.remove_stopwords = true,
                'T' => flags.stem = true,
                '-' => {}
                other => {
                    return Err(Error::Invalid(format!(
                        "bad preprocessing code {other:?} in {s:?} (expected a subset of \"PST\")"
                    )))
                }
            }
        }
        Ok(flags.into())
    }
}

impl fmt::Display for PreprocessProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Holds the loaded stopword lists and applies profiles to token sequences.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    lists: HashMap<String, StopwordList>,
}

impl Default for Preprocessor {
    fn default() -> Self {
        let mut lists = HashMap::new();
        let english = StopwordList::english();
        lists.insert(english.id().to_string(), english);
        Preprocessor { lists }
    }
}

impl Preprocessor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, list: StopwordList) {
        self.lists.insert(list.id().to_string(), list);
    }

    pub fn stopwords(&self, id: &str) -> Option<&StopwordList> {
        self.lists.get(id)
    }

    /// Checks that the profile's stopword list is loaded when it is needed.
    pub fn validate(&self, profile: &PreprocessProfile) -> Result<()> {
        if profile.remove_stopwords && !self.lists.contains_key(&profile.stopword_list_id) {
            return Err(Error::Invalid(format!(
                "stopword list {:?} is not loaded",
                profile.stopword_list_id
            )));
        }
        Ok(())
    }

    /// Applies the profile stages in order. An unknown stopword list leaves
    /// stopwords in place; call [`Preprocessor::validate`] first to reject it.
    pub fn apply(&self, seq: &TokenSequence, profile: &PreprocessProfile) -> TokenSequence {
        let stop = if profile.remove_stopwords {
            self.lists.get(&profile.stopword_list_id)
        } else {
            None
        };
        let tokens = seq
            .tokens
            .iter()
            .filter(|t| !(profile.remove_punct && is_punct(t)))
            .filter(|t| stop.map_or(true, |s| !s.contains(t)))
            .map(|t| if profile.stem { stem(t) } else { t.clone() })
            .collect();
        TokenSequence {
            tokens,
            source_text: seq.source_text.clone(),
        }
    }
}

/// All contiguous `n`-grams of `tokens` with multiplicity.
pub fn ngrams(tokens: &[String], n: usize) -> Result<HashMap<&[String], usize>> {
    if n < 1 {
        return Err(Error::InvalidNgramOrder(n));
    }
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_insert(0) += 1;
        }
    }
    Ok(out)
}

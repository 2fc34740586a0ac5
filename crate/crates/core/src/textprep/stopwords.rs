use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_STOPWORDS_ID: &str = "english-127";

const ENGLISH: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    id: String,
    words: HashSet<String>,
}

impl StopwordList {
    /// The bundled 127-word English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS_ID, ENGLISH)
    }

    /// One token per line; blank lines and `#` comments are ignored. Tokens are lowercased.
    pub fn parse(id: impl Into<String>, text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        StopwordList { id: id.into(), words }
    }

    pub fn from_path(id: impl Into<String>, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(id, &text))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

//! Pretrained word vectors, precomputed utterance vectors, and the vector
//! arithmetic shared by the embedding-based metrics.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Token vectors in the common text format (`token v1 v2 ... vd` per line).
#[derive(Debug, Clone)]
pub struct WordVectorStore<T> {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Scalar> WordVectorStore<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[T]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Builds a store from in-memory entries; all vectors must share one length.
    pub fn from_entries<S: Into<String>>(entries: impl IntoIterator<Item = (S, Vec<T>)>) -> Result<Self> {
        let mut store: Option<Self> = None;
        for (line, (token, v)) in entries.into_iter().enumerate() {
            let s = store.get_or_insert_with(|| Self::empty(v.len()));
            s.push(line + 1, token.into(), v)?;
        }
        store.ok_or(Error::NoVectors)
    }

    fn empty(dim: usize) -> Self {
        WordVectorStore {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    fn push(&mut self, line: usize, token: String, v: Vec<T>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                line,
                expected: self.dim,
                found: v.len(),
            });
        }
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateKey { line, key: token });
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend(v);
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut store: Option<Self> = None;
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse("word vectors", lineno, e))?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            // word2vec-style "<count> <dim>" header
            if lineno == 1 && rest.len() == 1 && token.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                continue;
            }
            let v = rest
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map(T::of)
                        .map_err(|e| Error::parse("word vectors", lineno, format!("{f:?}: {e}")))
                })
                .collect::<Result<Vec<T>>>()?;
            if v.is_empty() {
                return Err(Error::parse("word vectors", lineno, "token without components"));
            }
            let s = store.get_or_insert_with(|| Self::empty(v.len()));
            s.push(lineno, token.to_string(), v)?;
        }
        store.ok_or(Error::NoVectors)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }

    /// Writes the store back in the text format, in load order.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, token) in self.tokens.iter().enumerate() {
            write!(w, "{token}")?;
            for x in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Mean of the vectors of in-vocabulary tokens; `None` when no token is in
/// vocabulary. Duplicates count once per occurrence.
pub fn sentence_vector<'a, T: Scalar>(
    store: &WordVectorStore<T>,
    tokens: impl IntoIterator<Item = &'a str>,
) -> Option<Vec<T>> {
    let mut acc = vec![T::zero(); store.dim()];
    let mut n = 0usize;
    for v in tokens.into_iter().filter_map(|t| store.get(t)) {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = *a + x;
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let n = T::count(n);
    acc.iter_mut().for_each(|a| *a = *a / n);
    Some(acc)
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.iter().zip(v).map(|(&a, &b)| a * b).sum())
}

pub fn norm<T: Scalar>(u: &[T]) -> T {
    u.iter().map(|&a| a * a).sum::<T>().sqrt()
}

/// Cosine similarity, clamped to [-1, 1] against rounding.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    let d = dot(u, v)?;
    let (nu, nv) = (norm(u), norm(v));
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::UndefinedCosine);
    }
    Ok((d / (nu * nv)).max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    S,
    T,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::S => "s",
            Side::T => "t",
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SentenceVectorRecord {
    pair_id: String,
    side: Side,
    vector: Vec<f64>,
}

/// Utterance vectors produced by an external sentence encoder, keyed by pair and side.
#[derive(Debug, Clone)]
pub struct SentenceVectorStore<T> {
    dim: usize,
    table: HashMap<(String, Side), Vec<T>>,
}

impl<T: Scalar> SentenceVectorStore<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, pair_id: &str, side: Side) -> Option<&[T]> {
        self.table.get(&(pair_id.to_string(), side)).map(Vec::as_slice)
    }

    /// JSONL, one `{"pair_id", "side", "vector"}` object per line.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut dim = None;
        let mut table = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse("sentence vectors", lineno, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SentenceVectorRecord =
                serde_json::from_str(&line).map_err(|e| Error::parse("sentence vectors", lineno, e))?;
            let expected = *dim.get_or_insert(rec.vector.len());
            if rec.vector.len() != expected || expected == 0 {
                return Err(Error::DimensionMismatch {
                    line: lineno,
                    expected,
                    found: rec.vector.len(),
                });
            }
            let key = (rec.pair_id, rec.side);
            if table.contains_key(&key) {
                return Err(Error::DuplicateKey {
                    line: lineno,
                    key: format!("{}/{}", key.0, key.1),
                });
            }
            table.insert(key, rec.vector.into_iter().map(T::of).collect());
        }
        Ok(SentenceVectorStore {
            dim: dim.unwrap_or(0),
            table,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(text: &str) -> Result<WordVectorStore<f64>> {
        WordVectorStore::read(text.as_bytes())
    }

    #[test]
    fn parses_text_format() {
        let s = store("a 1 0 0\nb 0 1 0.5\n").unwrap();
        assert_eq!((s.dim(), s.len()), (3, 2));
        assert_eq!(s.get("b"), Some(&[0.0, 1.0, 0.5][..]));
        assert_eq!(s.get("c"), None);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            store("a 1 0 0\nb 0 1\n"),
            Err(Error::DimensionMismatch {
                line: 2,
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(store(""), Err(Error::NoVectors)));
        assert!(matches!(store("a 1\na 2\n"), Err(Error::DuplicateKey { line: 2, .. })));
        assert!(matches!(store("a 1 x\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn skips_word2vec_header() {
        let s = store("2 2\na 1 0\nb 0 1\n").unwrap();
        assert_eq!((s.dim(), s.len()), (2, 2));
    }

    #[test]
    fn round_trips_token_set() {
        let s = store("x 0.25 -1\ny 3 4\n").unwrap();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        let back = store(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.tokens().collect::<Vec<_>>(), ["x", "y"]);
        assert_eq!(back.get("x"), s.get("x"));
    }

    #[test]
    fn sentence_vector_examples() {
        let s = store("a 1 0\nb 0 1\n").unwrap();
        assert_eq!(sentence_vector(&s, ["a", "b"]), Some(vec![0.5, 0.5]));
        assert_eq!(sentence_vector(&s, ["x", "y"]), None);
        let s = store("a 2 0\n").unwrap();
        assert_eq!(sentence_vector(&s, ["a", "oov", "a"]), Some(vec![2.0, 0.0]));
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0f64, 2.0], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::UndefinedCosine)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::LengthMismatch(1, 2))));
        assert!((cosine(&[1.0f32, 2.0], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-6);
    }

    #[test]
    fn sentence_store() {
        let text = r#"{"pair_id":"p1","side":"s","vector":[1,2]}
{"pair_id":"p1","side":"t","vector":[3,4]}
"#;
        let s = SentenceVectorStore::<f64>::read(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("p1", Side::T), Some(&[3.0, 4.0][..]));

        let dup = format!("{text}{}", r#"{"pair_id":"p1","side":"s","vector":[0,1]}"#);
        assert!(matches!(
            SentenceVectorStore::<f64>::read(dup.as_bytes()),
            Err(Error::DuplicateKey { line: 3, .. })
        ));
        let short = r#"{"pair_id":"p1","side":"s","vector":[1,2]}
{"pair_id":"p2","side":"s","vector":[1]}"#;
        assert!(matches!(
            SentenceVectorStore::<f64>::read(short.as_bytes()),
            Err(Error::DimensionMismatch { line: 2, .. })
        ));
    }
}

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Scores keyed by pair id and column name. Rows are kept sorted by pair id;
/// every present score is finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreTable {
    columns: Vec<String>,
    rows: BTreeMap<String, Vec<Option<f64>>>,
}

impl ScoreTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        ScoreTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    fn column_index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    pub fn has_column(&self, column: &str) -> bool {
        self.column_index(column).is_some()
    }

    /// Inserts (or replaces) a row. Non-finite values are stored as missing.
    pub fn insert_row(&mut self, pair_id: impl Into<String>, values: Vec<Option<f64>>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::Invalid(format!(
                "row has {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        let values = values.into_iter().map(|v| v.filter(|x| x.is_finite())).collect();
        self.rows.insert(pair_id.into(), values);
        Ok(())
    }

    pub fn row(&self, pair_id: &str) -> Option<&[Option<f64>]> {
        self.rows.get(pair_id).map(Vec::as_slice)
    }

    pub fn get(&self, pair_id: &str, column: &str) -> Option<f64> {
        let c = self.column_index(column)?;
        self.rows.get(pair_id)?[c]
    }

    /// `(pair_id, value)` for every row of `column`, missing cells included.
    pub fn column(&self, column: &str) -> Result<Vec<(&str, Option<f64>)>> {
        let c = self
            .column_index(column)
            .ok_or_else(|| Error::UnknownMetric(column.to_string()))?;
        Ok(self.rows.iter().map(|(id, r)| (id.as_str(), r[c])).collect())
    }

    /// Present values of `column` as a pair-id map.
    pub fn column_map(&self, column: &str) -> Result<BTreeMap<String, f64>> {
        Ok(self
            .column(column)?
            .into_iter()
            .filter_map(|(id, v)| v.map(|v| (id.to_string(), v)))
            .collect())
    }

    pub fn missing_cells(&self) -> usize {
        self.rows
            .values()
            .map(|r| r.iter().filter(|v| v.is_none()).count())
            .sum()
    }

    /// Outer join on pair id. Column names must not collide.
    pub fn merge(&self, other: &ScoreTable) -> Result<ScoreTable> {
        if let Some(dup) = other.columns.iter().find(|c| self.has_column(c)) {
            return Err(Error::Invalid(format!("column {dup:?} present in both tables")));
        }
        let mut out = ScoreTable::new(self.columns.iter().chain(&other.columns).cloned());
        let ids: std::collections::BTreeSet<&String> = self.rows.keys().chain(other.rows.keys()).collect();
        for id in ids {
            let mut row = self
                .rows
                .get(id)
                .cloned()
                .unwrap_or_else(|| vec![None; self.columns.len()]);
            row.extend(
                other
                    .rows
                    .get(id)
                    .cloned()
                    .unwrap_or_else(|| vec![None; other.columns.len()]),
            );
            out.rows.insert(id.clone(), row);
        }
        Ok(out)
    }

    /// CSV with header `pair_id,<columns>`; missing cells are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let header = std::iter::once("pair_id").chain(self.columns.iter().map(String::as_str));
        wr.write_record(header).map_err(csv_err)?;
        for (id, row) in &self.rows {
            let cells =
                std::iter::once(id.clone()).chain(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            wr.write_record(cells).map_err(csv_err)?;
        }
        wr.flush()
            .map_err(|e| Error::Invalid(format!("writing score table: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 csv")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<ScoreTable> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(|e| Error::parse("score table", 1, e))?.clone();
        if header.get(0) != Some("pair_id") {
            return Err(Error::parse("score table", 1, "first column must be pair_id"));
        }
        let mut table = ScoreTable::new(header.iter().skip(1));
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse("score table", line, e))?;
            let id = rec.get(0).unwrap_or("").to_string();
            if table.rows.contains_key(&id) {
                return Err(Error::DuplicateKey { line, key: id });
            }
            let mut values = Vec::with_capacity(table.columns.len());
            for cell in rec.iter().skip(1) {
                let cell = cell.trim();
                if cell.is_empty() {
                    values.push(None);
                    continue;
                }
                let v: f64 = cell
                    .parse()
                    .map_err(|e| Error::parse("score table", line, format!("{cell:?}: {e}")))?;
                if !v.is_finite() {
                    return Err(Error::parse("score table", line, "non-finite score"));
                }
                values.push(Some(v));
            }
            table.insert_row(id, values)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ScoreTable> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("writing score table: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_missing() {
        let mut t = ScoreTable::new(["a", "b"]);
        t.insert_row("p2", vec![Some(0.5), None]).unwrap();
        t.insert_row("p1", vec![Some(1.0 / 3.0), Some(f64::NAN)]).unwrap();
        let text = t.to_csv_string();
        assert_eq!(text, "pair_id,a,b\np1,0.3333333333333333,\np2,0.5,\n");
        assert_eq!(ScoreTable::read_csv(text.as_bytes()).unwrap(), t);
        assert_eq!(t.missing_cells(), 2);
    }

    #[test]
    fn read_rejects_garbage() {
        assert!(ScoreTable::read_csv("id,a\nx,1\n".as_bytes()).is_err());
        assert!(ScoreTable::read_csv("pair_id,a\nx,abc\n".as_bytes()).is_err());
        assert!(ScoreTable::read_csv("pair_id,a\nx,1\nx,2\n".as_bytes()).is_err());
        assert!(ScoreTable::read_csv("pair_id,a\nx,inf\n".as_bytes()).is_err());
    }

    #[test]
    fn merge_outer_join() {
        let mut a = ScoreTable::new(["m1"]);
        a.insert_row("p1", vec![Some(1.0)]).unwrap();
        let mut b = ScoreTable::new(["m2"]);
        b.insert_row("p2", vec![Some(2.0)]).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.columns(), ["m1", "m2"]);
        assert_eq!(m.row("p1").unwrap(), [Some(1.0), None]);
        assert_eq!(m.row("p2").unwrap(), [None, Some(2.0)]);
        assert!(a.merge(&a).is_err());
    }
}

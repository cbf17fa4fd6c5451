use std::io::{Read, Write};
use std::path::Path;

use super::RecommenderError;

/// Soil × plant rating grid. `None` marks a missing rating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingsMatrix {
    rows: usize,
    cols: usize,
    values: Vec<Option<u8>>,
}

impl RatingsMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<Option<u8>>) -> Result<Self, RecommenderError> {
        if values.len() != rows * cols {
            return Err(RecommenderError::Shape(format!(
                "{} values for a {rows} x {cols} matrix",
                values.len()
            )));
        }
        if let Some(v) = values.iter().flatten().find(|v| !(1..=5).contains(*v)) {
            return Err(RecommenderError::Rating(*v));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn complete(rows: usize, cols: usize, values: Vec<u8>) -> Result<Self, RecommenderError> {
        Self::new(rows, cols, values.into_iter().map(Some).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u8> {
        self.values[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: Option<u8>) {
        self.values[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Option<u8>] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[Option<u8>] {
        &self.values
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Fraction of missing cells.
    pub fn sparsity(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.missing_count() as f64 / self.values.len() as f64
        }
    }

    /// Row-major flags, `true` where the rating is missing.
    pub fn missing_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_none).collect()
    }

    pub fn from_csv(reader: impl Read) -> Result<Self, RecommenderError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| RecommenderError::Csv(format!("line {}: {e}", line + 1)))?;
            match cols {
                None => cols = Some(rec.len()),
                Some(c) if c != rec.len() => {
                    return Err(RecommenderError::Csv(format!(
                        "line {}: {} fields, expected {c}",
                        line + 1,
                        rec.len()
                    )))
                }
                _ => {}
            }
            for field in rec.iter() {
                values.push(if field.is_empty() {
                    None
                } else {
                    Some(field.parse::<u8>().map_err(|_| {
                        RecommenderError::Csv(format!("line {}: bad rating {field:?}", line + 1))
                    })?)
                });
            }
            rows += 1;
        }
        Self::new(rows, cols.unwrap_or(0), values)
    }

    pub fn to_csv(&self, out: impl Write) -> Result<(), RecommenderError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for i in 0..self.rows {
            let fields = self.row(i).iter().map(|v| v.map_or(String::new(), |r| r.to_string()));
            w.write_record(fields).map_err(|e| RecommenderError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| RecommenderError::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RecommenderError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| RecommenderError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_csv(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RecommenderError> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| RecommenderError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        self.to_csv(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_missing_cells() {
        let m = RatingsMatrix::new(2, 3, vec![Some(1), None, Some(5), None, Some(3), Some(2)]).unwrap();
        let mut buf = Vec::new();
        m.to_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1,,5\n,3,2\n");
        assert_eq!(RatingsMatrix::from_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn out_of_range_rating_is_rejected() {
        assert!(matches!(
            RatingsMatrix::complete(1, 2, vec![1, 6]),
            Err(RecommenderError::Rating(6))
        ));
        assert!(RatingsMatrix::from_csv("1,0\n".as_bytes()).is_err());
        assert!(RatingsMatrix::from_csv("1,2\n3\n".as_bytes()).is_err());
    }
}

//! Column-oriented numeric datasets and their CSV round trip.
//!
//! The CSV dialect is deliberately plain: a comma-separated header line,
//! then one row of decimal numbers per line, `.` as the decimal separator,
//! UTF-8, no quoting. Values are written in shortest round-trip form, so
//! write-then-read reproduces a dataset bit for bit.

use std::io::{BufRead, Write};

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Named numeric columns, all of equal length, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: IndexMap<String, Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    /// Build from (name, values) pairs, validating shape and finiteness.
    pub fn new(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |(_, v)| v.len());
        let mut map = IndexMap::with_capacity(columns.len());
        for (name, values) in columns {
            if values.len() != n_rows {
                return Err(Error::InvalidConfig(format!(
                    "column {name} has {} rows, expected {n_rows}",
                    values.len()
                )));
            }
            if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "column {name} has a non-finite value at row {pos}"
                )));
            }
            if map.insert(name.clone(), values).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate column {name}")));
            }
        }
        Ok(Dataset {
            columns: map,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(|s| s.as_str())
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    /// Keep the rows where `mask` is true; all columns are retained.
    pub fn filter_rows(&self, mask: &[bool]) -> Dataset {
        assert_eq!(mask.len(), self.n_rows);
        let kept = mask.iter().filter(|&&m| m).count();
        let columns = self
            .columns
            .iter()
            .map(|(name, values)| {
                let filtered: Vec<f64> = values
                    .iter()
                    .zip(mask)
                    .filter(|&(_, &m)| m)
                    .map(|(&v, _)| v)
                    .collect();
                (name.clone(), filtered)
            })
            .collect();
        Dataset {
            columns,
            n_rows: kept,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<&str> = self.column_names().collect();
        writeln!(w, "{}", header.join(","))?;
        let cols: Vec<&Vec<f64>> = self.columns.values().collect();
        let mut line = String::new();
        for row in 0..self.n_rows {
            line.clear();
            for (i, col) in cols.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", col[row]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Csv {
            line: 1,
            message: "empty input".into(),
        })?;
        let header = header?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_owned()).collect();
        if names.iter().any(|n| n.is_empty()) {
            return Err(Error::Csv {
                line: 1,
                message: "empty column name in header".into(),
            });
        }

        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (ix, line) in lines {
            let line_no = ix + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut count = 0;
            for (col, field) in line.split(',').enumerate() {
                count += 1;
                if col >= names.len() {
                    break;
                }
                let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                    line: line_no,
                    message: format!("bad number {:?}", field.trim()),
                })?;
                if !value.is_finite() {
                    return Err(Error::Csv {
                        line: line_no,
                        message: format!("non-finite value {value}"),
                    });
                }
                columns[col].push(value);
            }
            if count != names.len() {
                return Err(Error::Csv {
                    line: line_no,
                    message: format!("expected {} fields, got {count}", names.len()),
                });
            }
        }

        Dataset::new(names.into_iter().zip(columns).collect())
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(s.as_bytes())
    }

    pub fn load_csv(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn save_csv(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

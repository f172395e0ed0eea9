//! Cost matrices: `c[φ][θ]` is the probability of a signal-null-port click when
//! the stored phase is `θ` and the declared phase is `φ`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QdsError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Builds from rows; every row must have `rows.len()` entries in `[0, 1]`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(QdsError::MalformedCostMatrix("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(QdsError::MalformedCostMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Self::from_row_major(n, entries)
    }

    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n || n == 0 {
            return Err(QdsError::MalformedCostMatrix(format!(
                "{} entries do not form a square {n}x{n} matrix",
                entries.len()
            )));
        }
        if let Some((k, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(QdsError::MalformedCostMatrix(format!(
                "entry ({}, {}) = {v} is not a probability",
                k / n,
                k % n
            )));
        }
        Ok(Self { n, entries })
    }

    /// `c[φ][θ] = first_row[(θ − φ) mod N]`.
    pub fn circulant(first_row: &[f64]) -> Result<Self> {
        let n = first_row.len();
        let mut entries = Vec::with_capacity(n * n);
        for phi in 0..n {
            for theta in 0..n {
                entries.push(first_row[(theta + n - phi) % n]);
            }
        }
        Self::from_row_major(n, entries)
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::from_row_major(n, vec![value; n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for phi in 0..n {
            for theta in 0..n {
                entries.push(f(phi, theta));
            }
        }
        Self::from_row_major(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, phi: usize, theta: usize) -> f64 {
        self.entries[phi * self.n + theta]
    }

    pub fn row(&self, phi: usize) -> &[f64] {
        &self.entries[phi * self.n..(phi + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_diagonal(&self) -> f64 {
        self.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_diagonal(&self) -> f64 {
        self.diagonal().iter().sum::<f64>() / self.n as f64
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for phi in 0..self.n {
            for theta in (0..self.n).filter(|&t| t != phi) {
                m = m.max(self.get(phi, theta));
            }
        }
        m
    }

    /// Entry `(φ, θ)` depends only on `(θ − φ) mod N`, and offsets `d` and `N − d` agree.
    pub fn is_circulant_symmetric(&self, tol: f64) -> bool {
        let first = self.row(0);
        (0..self.n).all(|phi| {
            (0..self.n).all(|theta| {
                let d = (theta + self.n - phi) % self.n;
                (self.get(phi, theta) - first[d]).abs() <= tol
                    && (first[d] - first[(self.n - d) % self.n]).abs() <= tol
            })
        })
    }

    /// `self ≤ other` entry-wise.
    pub fn dominated_by(&self, other: &CostMatrix) -> bool {
        self.n == other.n && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }

    /// Headerless CSV, one matrix row per line.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        QdsError::MalformedCostMatrix(format!("cannot parse {s:?} as a number"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for phi in 0..self.n {
            wtr.write_record(self.row(phi).iter().map(|v| format!("{v:e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

use std::io::Write;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Which rows of the transformed coding matrix each client combines.
///
/// Coefficients are implicitly all ones: a client adds up its rows. Row
/// indices are 0-based and sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccessAssignment {
    clients: Vec<Vec<usize>>,
}

impl AccessAssignment {
    pub fn new(mut clients: Vec<Vec<usize>>) -> Self {
        for rows in &mut clients {
            rows.sort_unstable();
        }
        Self { clients }
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn rows(&self, client: usize) -> &[usize] {
        &self.clients[client]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.clients.iter().map(Vec::as_slice)
    }

    /// Largest number of rows any client touches.
    pub fn max_rows(&self) -> usize {
        self.clients.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks that every client reaches its vector with at most `k` rows of `p`.
    pub fn validate(&self, p: &BitMatrix, clients: &BitMatrix, k: usize) -> Result<()> {
        if self.clients.len() != clients.num_rows() {
            return Err(Error::DimensionMismatch {
                expected: clients.num_rows(),
                actual: self.clients.len(),
            });
        }
        for (i, rows) in self.clients.iter().enumerate() {
            if rows.len() > k {
                return Err(Error::Infeasible(format!(
                    "client {} uses {} rows, limit is {k}",
                    i + 1,
                    rows.len()
                )));
            }
            if let Some(&bad) = rows.iter().find(|&&r| r >= p.num_rows()) {
                return Err(Error::invalid(format!(
                    "client {} references missing row {}",
                    i + 1,
                    bad + 1
                )));
            }
            if &p.sum_rows(rows.iter().copied()) != clients.row(i) {
                return Err(Error::Infeasible(format!(
                    "rows assigned to client {} do not add up to its vector",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Coefficient vector over all rows of a `t_k`-row matrix for `client`.
    pub fn coefficient_vector(&self, client: usize, t_k: usize) -> BitVector {
        BitVector::from_indices(t_k, self.clients[client].iter().copied())
    }

    /// CSV with columns `client_id,row_count,rows`; ids and rows are 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["client_id", "row_count", "rows"])?;
        for (i, rows) in self.clients.iter().enumerate() {
            let list = rows.iter().map(|r| (r + 1).to_string()).collect::<Vec<_>>().join(",");
            w.write_record([(i + 1).to_string(), rows.len().to_string(), list])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

//! Bundled experimental data: the measured 8-phase cost matrix and the
//! published circulant bounding rows derived from it.

use crate::cost::CostMatrix;
use crate::error::{QdsError, Result};

/// Mean photon number per pulse at which the bundled matrix was measured.
pub const REFERENCE_MEAN_PHOTONS: f64 = 0.16;

pub const REFERENCE_N_PHASES: usize = 8;

/// Versioned asset name, recorded in reports.
pub const REFERENCE_COST_MATRIX_ID: &str = "reference_cost_matrix_n8_v1";

const COST_MATRIX_CSV: &str = include_str!("../data/reference_cost_matrix_n8_v1.csv");
const BOUNDING_ROWS_CSV: &str = include_str!("../data/reference_bounding_rows_n8_v1.csv");

pub fn reference_cost_matrix() -> CostMatrix {
    CostMatrix::from_csv_str(COST_MATRIX_CSV).expect("bundled cost matrix is well formed")
}

/// Published `(lower, upper)` first rows of the circulant bounding matrices.
pub fn published_bounding_rows() -> (Vec<f64>, Vec<f64>) {
    parse_rows(BOUNDING_ROWS_CSV).expect("bundled bounding rows are well formed")
}

fn parse_rows(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        QdsError::MalformedCostMatrix(format!("cannot parse {s:?}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        });
    let lower = rows.next().ok_or_else(|| QdsError::MalformedCostMatrix("missing lower row".into()))??;
    let upper = rows.next().ok_or_else(|| QdsError::MalformedCostMatrix("missing upper row".into()))??;
    Ok((lower, upper))
}

//! `analyze`: passive forging analysis of a cost matrix and the resulting
//! security bounds.

use qds_core::bounds::{length_sweep, log_grid, SecurityParameters, SecurityReport, SweepRow};
use qds_core::measurement::{passive_forgery_analysis_with_bounds, BoundingPair};
use qds_core::reference::{published_bounding_rows, reference_cost_matrix, REFERENCE_COST_MATRIX_ID};
use qds_core::{CostMatrix, ForgingAnalysis};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_csv_rows, write_json};

/// The same analysis with bounding rows from the orbit rule, reported next to
/// the published-row analysis for comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivedComparison {
    pub passive: ForgingAnalysis,
    pub amplified: ForgingAnalysis,
    /// `(φ, θ)` entries the primary bounding matrices fail to bracket.
    pub primary_dominance_violations: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub cost_matrix_source: String,
    pub cost_matrix: CostMatrix,
    pub passive: ForgingAnalysis,
    pub amplified: ForgingAnalysis,
    /// Present whenever the primary bounds were supplied rather than derived.
    pub derived: Option<DerivedComparison>,
    pub parameters: SecurityParameters,
    pub report: SecurityReport,
    pub certified: bool,
}

fn load_matrix(config: &RunConfig) -> CliResult<(CostMatrix, String, Option<BoundingPair>)> {
    let a = &config.analysis;
    let (cost, source, default_rows) = match &a.cost_matrix_path {
        None => {
            let (lower, upper) = published_bounding_rows();
            (reference_cost_matrix(), format!("bundled:{REFERENCE_COST_MATRIX_ID}"), Some((lower, upper)))
        }
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            (CostMatrix::from_csv_str(&text)?, path.display().to_string(), None)
        }
    };
    let rows = match (&a.lower_row, &a.upper_row) {
        (Some(l), Some(u)) => Some((l.clone(), u.clone())),
        _ => default_rows,
    };
    let bounds = rows.map(|(l, u)| BoundingPair::published(&l, &u)).transpose()?;
    Ok((cost, source, bounds))
}

pub fn analyze(config: &RunConfig) -> CliResult<(AnalysisReport, Vec<SweepRow>)> {
    let a = &config.analysis;
    let (cost, source, supplied) = load_matrix(config)?;
    if cost.n() != config.alphabet.n_phases {
        return Err(CliError::Config(format!(
            "cost matrix is {n}×{n} but the alphabet has {} phases",
            config.alphabet.n_phases,
            n = cost.n()
        )));
    }
    let alphabet = config.alphabet.build()?;
    let derived_bounds = BoundingPair::derived(&cost)?;
    let primary = supplied.clone().unwrap_or_else(|| derived_bounds.clone());
    let passive = passive_forgery_analysis_with_bounds(&cost, &primary, &alphabet, false)?;
    let amplified = passive_forgery_analysis_with_bounds(&cost, &primary, &alphabet, true)?;
    let derived = match supplied {
        Some(_) => Some(DerivedComparison {
            passive: passive_forgery_analysis_with_bounds(&cost, &derived_bounds, &alphabet, false)?,
            amplified: passive_forgery_analysis_with_bounds(&cost, &derived_bounds, &alphabet, true)?,
            primary_dominance_violations: primary.dominance_violations(&cost),
        }),
        None => None,
    };
    let parameters = SecurityParameters {
        p_original: passive.p_original,
        p_forgery: passive.p_forgery_lower,
        p_forgery_amplified: amplified.p_forgery_lower,
        rejection_threshold: a.rejection_threshold,
        hoeffding_slack: a.hoeffding_slack,
        repudiation_base: a.repudiation_base,
        receivers: a.receivers,
    };
    if passive.g_lower <= 0.0 {
        return Err(CliError::Config(format!(
            "no positive gap: forging cost {:e} ≤ honest cost {:e}",
            passive.p_forgery_lower, passive.p_original
        )));
    }
    let report = SecurityReport::build(&alphabet, &parameters, a.signature_length)?;
    let lengths = log_grid(a.lengths.start, a.lengths.stop, a.lengths.count)?;
    let sweep = length_sweep(&alphabet, &parameters, &lengths)?;
    let certified = passive.certified;
    Ok((
        AnalysisReport {
            cost_matrix_source: source,
            cost_matrix: cost,
            passive,
            amplified,
            derived,
            parameters,
            report,
            certified,
        },
        sweep,
    ))
}

/// Runs the analysis, writes `analysis.json` and `length_sweep.csv`, and fails
/// with a certification error if the bounding costs are not Helstrom-optimal.
pub fn run(config: &RunConfig) -> CliResult<AnalysisReport> {
    let (report, sweep) = analyze(config)?;
    let dir = &config.output_dir;
    write_json(&dir.join("analysis.json"), &report)?;
    write_csv_rows(
        &dir.join("length_sweep.csv"),
        &SweepRow::CSV_HEADER,
        sweep.iter().map(|r| r.csv_row()),
    )?;
    if !report.certified {
        let h = (&report.passive.helstrom_lower, &report.passive.helstrom_upper);
        return Err(CliError::Certification(format!(
            "lower satisfied = {}, upper satisfied = {} (min eigenvalues {:e}, {:e})",
            h.0.satisfied, h.1.satisfied, h.0.criterion4_min_eigenvalue, h.1.criterion4_min_eigenvalue
        )));
    }
    Ok(report)
}

pub fn summary_line(r: &AnalysisReport) -> String {
    format!(
        "cost_lower = {:.4e}, cost_upper = {:.4e}, g_lower = {:.3e}, amplified cost = {:.4e}, L(ε_forging = 1) = {:.3e}, certified = {}",
        r.passive.p_forgery_lower,
        r.passive.p_forgery_upper,
        r.passive.g_lower,
        r.amplified.p_forgery_lower,
        r.report.nontrivial_length,
        r.certified
    )
}

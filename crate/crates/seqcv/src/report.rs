//! Versioned JSON report schemas for the CLI surface.
//!
//! Reports embed the complete run configuration and every seed, so re-running
//! a command with the same inputs reproduces the report byte for byte (struct
//! field order is the serialization order; no timestamps).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cv::{CvLoops, CvStrategy, GridConfig, SelectionRule};
use crate::error::{Error, Result};
use crate::harness::{AggregateRow, StrategyLabel, TrialFailure};
use crate::permtest::PermutationResult;
use crate::seqassess::{ConditionalOutcome, SequentialConfig, SequentialResult};

pub const SPEC_VERSION: u32 = 1;

/// Which block plays the primary role in the sequential procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceOrder {
    X1First,
    X2First,
}

impl Default for SourceOrder {
    fn default() -> Self {
        SourceOrder::X1First
    }
}

/// The full configuration of an assess/stack run, sufficient to replay it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub loops: CvLoops,
    pub rule: SelectionRule,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub n_lambda: usize,
    /// None means the shape-adaptive default grid depth.
    pub eps_ratio: Option<f64>,
    pub permutations: usize,
    pub smoothed_p_value: bool,
    pub seed: u64,
    pub source_order: SourceOrder,
    pub log_y: bool,
    /// Stack runs only: per-column standardization before stacking.
    pub scale: bool,
}

impl RunConfig {
    pub fn strategy(&self) -> CvStrategy {
        CvStrategy {
            loops: self.loops,
            rule: self.rule,
            outer_folds: self.outer_folds,
            inner_folds: self.inner_folds,
            grid: GridConfig {
                n_lambda: self.n_lambda,
                eps_ratio: self.eps_ratio,
            },
        }
    }

    pub fn sequential(&self) -> SequentialConfig {
        SequentialConfig::new(self.alpha1, self.alpha2, self.strategy(), self.seed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputSummary {
    pub x1_path: PathBuf,
    pub x2_path: PathBuf,
    pub y_path: PathBuf,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

/// Per-stage provenance: the plan and penalties actually used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageDetail {
    pub chosen_lambdas: Vec<f64>,
    pub fold_assignments: Vec<usize>,
    pub fold_means: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationDetail {
    pub m: usize,
    pub seed: u64,
    pub observed: f64,
    pub null_values: Vec<f64>,
}

/// The Table-3-shaped output row of one sequential assessment plus full provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssessReport {
    pub spec_version: u32,
    pub config: RunConfig,
    pub inputs: InputSummary,
    pub q2_primary: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2_conditional: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2_conditional_simplified: Option<f64>,
    pub q2_conditional_status: String,
    pub q2_joint: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub stage1: StageDetail,
    pub stage2: StageDetail,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationDetail>,
    pub warnings: Vec<String>,
}

impl AssessReport {
    pub fn new(
        config: RunConfig,
        inputs: InputSummary,
        result: &SequentialResult,
        perm: Option<&PermutationResult>,
    ) -> Self {
        let (q2_conditional, q2_conditional_simplified, status) = match result.q2_cond {
            ConditionalOutcome::Ok(q) => (Some(q.value), Some(q.simplified), "ok"),
            ConditionalOutcome::DegenerateResidual => (None, None, "degenerate_residual"),
        };
        AssessReport {
            spec_version: SPEC_VERSION,
            config,
            inputs,
            q2_primary: result.q2_x1,
            q2_conditional,
            q2_conditional_simplified,
            q2_conditional_status: status.to_string(),
            q2_joint: result.q2_joint,
            p_value: perm.map(|p| p.p_value),
            stage1: StageDetail {
                chosen_lambdas: result.p1.chosen_lambdas.clone(),
                fold_assignments: result.p1.plan.assignments.clone(),
                fold_means: result.p1.fold_means.clone(),
            },
            stage2: StageDetail {
                chosen_lambdas: result.p2.chosen_lambdas.clone(),
                fold_assignments: result.p2.plan.assignments.clone(),
                fold_means: result.p2.fold_means.clone(),
            },
            permutation: perm.map(|p| PermutationDetail {
                m: p.m,
                seed: p.seed,
                observed: p.observed,
                null_values: p.null_values.clone(),
            }),
            warnings: result.warnings.iter().map(|w| w.to_string()).collect(),
        }
    }
}

/// Output of the naive stacking comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackReport {
    pub spec_version: u32,
    pub config: RunConfig,
    pub inputs: InputSummary,
    pub q2_stacked: f64,
    pub chosen_lambdas: Vec<f64>,
    pub fold_assignments: Vec<usize>,
}

/// Output of a Monte Carlo run: one aggregate row per strategy cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub spec_version: u32,
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub noise_sd: f64,
    pub alpha: f64,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub trials: usize,
    pub permutations: usize,
    pub seed: u64,
    pub strategies: Vec<StrategyLabel>,
    pub rows: Vec<AggregateRow>,
    pub failures: Vec<TrialFailure>,
}

/// Serializes any report with a stable layout and trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("report serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = to_json_string(value)?;
    std::fs::write(path, s).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: format!("bad report JSON: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> RunConfig {
        RunConfig {
            alpha1: 0.0,
            alpha2: 0.0,
            loops: CvLoops::Double,
            rule: SelectionRule::Opt,
            outer_folds: 5,
            inner_folds: 5,
            n_lambda: 100,
            eps_ratio: None,
            permutations: 10,
            smoothed_p_value: false,
            seed: 42,
            source_order: SourceOrder::X1First,
            log_y: false,
            scale: false,
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = sample_config();
        let s = to_json_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(to_json_string(&back).unwrap(), s);
        let strat = back.strategy();
        assert_eq!(strat.outer_folds, 5);
        assert_eq!(strat.grid.eps_ratio, None);
    }

    #[test]
    fn serialization_is_deterministic() {
        let cfg = sample_config();
        assert_eq!(to_json_string(&cfg).unwrap(), to_json_string(&cfg).unwrap());
    }

    #[test]
    fn json_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        let cfg = sample_config();
        write_json(&path, &cfg).unwrap();
        let back: RunConfig = read_json(&path).unwrap();
        assert_eq!(back.seed, 42);
    }
}

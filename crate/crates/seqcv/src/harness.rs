//! Monte Carlo driver: scenarios x strategies, aggregated into table rows.
//!
//! Trial t derives every random ingredient (dataset, CV fold plans,
//! permutation shuffles) from the stream (master seed, t), so results are
//! reproducible and independent of scheduling. Failed trials are recorded and
//! excluded, never silently dropped.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv::{CvStrategy, SelectionRule};
use crate::error::{Error, Result};
use crate::permtest::{self, PermutationOptions};
use crate::seed::{self, Domain};
use crate::seqassess::{self, SequentialConfig};
use crate::simgen::{ScenarioSampler, ScenarioSpec};

/// Nominal level of the permutation test used for rejection proportions.
pub const REJECTION_LEVEL: f64 = 0.05;

/// The three penalty-selection strategies compared in the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyLabel {
    /// Double cross-validation, error-minimizing penalty.
    #[serde(rename = "CV_D/lambda_opt")]
    CvDOpt,
    /// Double cross-validation, one-standard-error penalty.
    #[serde(rename = "CV_D/lambda_1se")]
    CvDOneSe,
    /// Single cross-validation loop, error-minimizing penalty.
    #[serde(rename = "CV_S/lambda_opt")]
    CvSOpt,
}

impl StrategyLabel {
    pub fn all() -> [StrategyLabel; 3] {
        [StrategyLabel::CvDOpt, StrategyLabel::CvDOneSe, StrategyLabel::CvSOpt]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyLabel::CvDOpt => "CV_D/lambda_opt",
            StrategyLabel::CvDOneSe => "CV_D/lambda_1se",
            StrategyLabel::CvSOpt => "CV_S/lambda_opt",
        }
    }

    /// Materializes the CV strategy for this label.
    pub fn strategy(&self, j: usize, k: usize) -> CvStrategy {
        match self {
            StrategyLabel::CvDOpt => CvStrategy::double(SelectionRule::Opt, j, k),
            StrategyLabel::CvDOneSe => CvStrategy::double(SelectionRule::OneSe, j, k),
            StrategyLabel::CvSOpt => CvStrategy::single(SelectionRule::Opt, j, k),
        }
    }
}

impl std::str::FromStr for StrategyLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "CV_D/lambda_opt" | "cvd_opt" | "cvd-opt" => StrategyLabel::CvDOpt,
            "CV_D/lambda_1se" | "cvd_1se" | "cvd-1se" => StrategyLabel::CvDOneSe,
            "CV_S/lambda_opt" | "cvs_opt" | "cvs-opt" => StrategyLabel::CvSOpt,
            other => return Err(Error::Input(format!("unknown strategy label '{other}'"))),
        })
    }
}

impl std::fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One Monte Carlo trial's summary measures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub scenario: String,
    pub strategy: StrategyLabel,
    pub alpha: f64,
    pub q2_x1: f64,
    pub q2_cond: f64,
    pub q2_joint: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub message: String,
}

/// All trial outcomes of one (scenario, strategy) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialBatch {
    pub results: Vec<TrialResult>,
    pub failures: Vec<TrialFailure>,
}

/// Runs `n_trials` Monte Carlo trials of the two-stage procedure (plus the
/// permutation test when `m_permutations > 0`) under one scenario and
/// strategy.
pub fn run_trials(
    spec: &ScenarioSpec,
    alpha1: f64,
    alpha2: f64,
    label: StrategyLabel,
    j: usize,
    k: usize,
    n_trials: usize,
    m_permutations: usize,
    master_seed: u64,
) -> Result<TrialBatch> {
    if n_trials < 1 {
        return Err(Error::Input("n_trials must be at least 1".into()));
    }
    let sampler = ScenarioSampler::new(spec.clone())?;
    let strategy = label.strategy(j, k);

    let run_one = |t: usize| -> std::result::Result<TrialResult, TrialFailure> {
        let fail = |e: Error| TrialFailure {
            trial: t,
            message: e.to_string(),
        };
        let data_seed = seed::derive(master_seed, Domain::TrialData, t as u64);
        let cfg_seed = seed::derive(master_seed, Domain::TrialConfig, t as u64);
        let ds = sampler.draw(data_seed).map_err(fail)?;
        let cfg = SequentialConfig::new(alpha1, alpha2, strategy, cfg_seed);
        let assessed = seqassess::sequential_assess(ds.x1.view(), ds.x2.view(), ds.y.view(), &cfg).map_err(fail)?;
        let q2_cond = assessed.q2_cond_value().map_err(fail)?;
        let p_value = if m_permutations > 0 {
            let perm_seed = seed::derive(master_seed, Domain::TrialPerm, t as u64);
            let r = permtest::permutation_test(
                ds.x1.view(),
                ds.x2.view(),
                ds.y.view(),
                &cfg,
                m_permutations,
                perm_seed,
                PermutationOptions::default(),
            )
            .map_err(fail)?;
            Some(r.p_value)
        } else {
            None
        };
        Ok(TrialResult {
            scenario: spec.name.to_string(),
            strategy: label,
            alpha: alpha1,
            q2_x1: assessed.q2_x1,
            q2_cond,
            q2_joint: assessed.q2_joint,
            p_value,
            seed: data_seed,
        })
    };

    let outcomes: Vec<std::result::Result<TrialResult, TrialFailure>> =
        (0..n_trials).into_par_iter().map(run_one).collect();
    let mut results = Vec::with_capacity(n_trials);
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(TrialBatch { results, failures })
}

/// Mean/SD summaries of one cell plus the rejection proportion at the 0.05 level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub strategy: StrategyLabel,
    pub alpha: f64,
    pub n_trials: usize,
    pub n_failures: usize,
    pub mean_q2_x1: f64,
    pub sd_q2_x1: f64,
    pub mean_q2_cond: f64,
    pub sd_q2_cond: f64,
    pub mean_q2_joint: f64,
    pub sd_q2_joint: f64,
    /// Fraction of trials with p-value below 0.05; absent when no permutations ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection_rate: Option<f64>,
    /// Set when only one trial contributed, where the SD is reported as 0.
    pub single_trial: bool,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, var.sqrt())
}

/// Aggregates a batch: unbiased SDs, rejection proportion at `REJECTION_LEVEL`.
pub fn aggregate(batch: &TrialBatch) -> Result<AggregateRow> {
    let rs = &batch.results;
    if rs.is_empty() {
        return Err(Error::Input("cannot aggregate an empty trial batch".into()));
    }
    let first = &rs[0];
    let (mean_q2_x1, sd_q2_x1) = mean_sd(rs.iter().map(|r| r.q2_x1));
    let (mean_q2_cond, sd_q2_cond) = mean_sd(rs.iter().map(|r| r.q2_cond));
    let (mean_q2_joint, sd_q2_joint) = mean_sd(rs.iter().map(|r| r.q2_joint));
    let p_values: Vec<f64> = rs.iter().filter_map(|r| r.p_value).collect();
    let rejection_rate = if p_values.is_empty() {
        None
    } else {
        Some(p_values.iter().filter(|&&p| p < REJECTION_LEVEL).count() as f64 / p_values.len() as f64)
    };
    Ok(AggregateRow {
        scenario: first.scenario.clone(),
        strategy: first.strategy,
        alpha: first.alpha,
        n_trials: rs.len(),
        n_failures: batch.failures.len(),
        mean_q2_x1,
        sd_q2_x1,
        mean_q2_cond,
        sd_q2_cond,
        mean_q2_joint,
        sd_q2_joint,
        rejection_rate,
        single_trial: rs.len() == 1,
    })
}

/// Serializes rows as CSV with a fixed header; floats use shortest
/// round-trip formatting, so identical rows give identical bytes.
pub fn rows_to_csv(rows: &[AggregateRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "strategy",
        "alpha",
        "n_trials",
        "n_failures",
        "mean_q2_x1",
        "sd_q2_x1",
        "mean_q2_cond",
        "sd_q2_cond",
        "mean_q2_joint",
        "sd_q2_joint",
        "rejection_rate",
        "single_trial",
    ])
    .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
    for r in rows {
        let rec = [
            r.scenario.clone(),
            r.strategy.as_str().to_string(),
            r.alpha.to_string(),
            r.n_trials.to_string(),
            r.n_failures.to_string(),
            r.mean_q2_x1.to_string(),
            r.sd_q2_x1.to_string(),
            r.mean_q2_cond.to_string(),
            r.sd_q2_cond.to_string(),
            r.mean_q2_joint.to_string(),
            r.sd_q2_joint.to_string(),
            r.rejection_rate.map(|v| v.to_string()).unwrap_or_default(),
            r.single_trial.to_string(),
        ];
        w.write_record(&rec)
            .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(format!("csv not utf-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{ScenarioName, ScenarioSpec};

    fn tiny_spec() -> ScenarioSpec {
        ScenarioSpec::preset(ScenarioName::S2a, 24, 32, 16)
    }

    #[test]
    fn one_trial_matches_direct_composition() {
        let spec = tiny_spec();
        let master = 99u64;
        let batch = run_trials(&spec, 0.0, 0.0, StrategyLabel::CvDOpt, 3, 3, 1, 5, master).unwrap();
        assert_eq!(batch.results.len(), 1);
        let r = &batch.results[0];

        // recompose by hand with the same derived seeds
        let sampler = ScenarioSampler::new(spec.clone()).unwrap();
        let ds = sampler.draw(seed::derive(master, Domain::TrialData, 0)).unwrap();
        let cfg = SequentialConfig::new(
            0.0,
            0.0,
            StrategyLabel::CvDOpt.strategy(3, 3),
            seed::derive(master, Domain::TrialConfig, 0),
        );
        let direct = seqassess::sequential_assess(ds.x1.view(), ds.x2.view(), ds.y.view(), &cfg).unwrap();
        assert_eq!(r.q2_x1, direct.q2_x1);
        assert_eq!(r.q2_joint, direct.q2_joint);
        let perm = permtest::permutation_test(
            ds.x1.view(),
            ds.x2.view(),
            ds.y.view(),
            &cfg,
            5,
            seed::derive(master, Domain::TrialPerm, 0),
            PermutationOptions::default(),
        )
        .unwrap();
        assert_eq!(r.p_value, Some(perm.p_value));
    }

    #[test]
    fn trials_are_reproducible() {
        let spec = tiny_spec();
        let a = run_trials(&spec, 0.0, 0.0, StrategyLabel::CvDOpt, 3, 3, 4, 0, 7).unwrap();
        let b = run_trials(&spec, 0.0, 0.0, StrategyLabel::CvDOpt, 3, 3, 4, 0, 7).unwrap();
        let qa: Vec<f64> = a.results.iter().map(|r| r.q2_x1).collect();
        let qb: Vec<f64> = b.results.iter().map(|r| r.q2_x1).collect();
        assert_eq!(qa, qb);
    }

    #[test]
    fn aggregate_small_batches() {
        let mk = |p: Option<f64>| TrialResult {
            scenario: "2a".into(),
            strategy: StrategyLabel::CvDOpt,
            alpha: 0.0,
            q2_x1: 0.5,
            q2_cond: 0.2,
            q2_joint: 0.6,
            p_value: p,
            seed: 0,
        };
        // single trial: SD 0 with a flag
        let one = TrialBatch {
            results: vec![mk(Some(0.01))],
            failures: vec![],
        };
        let row = aggregate(&one).unwrap();
        assert!(row.single_trial);
        assert_eq!(row.sd_q2_x1, 0.0);
        assert_eq!(row.rejection_rate, Some(1.0));

        // two trials with p-values {0.01, 0.90}: rejection 0.5
        let two = TrialBatch {
            results: vec![mk(Some(0.01)), mk(Some(0.90))],
            failures: vec![],
        };
        let row = aggregate(&two).unwrap();
        assert_eq!(row.rejection_rate, Some(0.5));
        assert!(!row.single_trial);

        // empty input errors
        let empty = TrialBatch {
            results: vec![],
            failures: vec![],
        };
        assert!(aggregate(&empty).is_err());

        // no permutations -> no rejection rate
        let none = TrialBatch {
            results: vec![mk(None), mk(None)],
            failures: vec![],
        };
        assert_eq!(aggregate(&none).unwrap().rejection_rate, None);
    }

    #[test]
    fn uniform_p_values_reject_at_nominal_rate() {
        // binomial oracle: 500 uniform p-values, rejection within the 99% band
        let mut rng = crate::seed::rng(13);
        use rand::Rng;
        let results: Vec<TrialResult> = (0..500)
            .map(|i| TrialResult {
                scenario: "1a".into(),
                strategy: StrategyLabel::CvDOpt,
                alpha: 0.0,
                q2_x1: 0.0,
                q2_cond: 0.0,
                q2_joint: 0.0,
                p_value: Some(rng.gen::<f64>()),
                seed: i,
            })
            .collect();
        let batch = TrialBatch {
            results,
            failures: vec![],
        };
        let row = aggregate(&batch).unwrap();
        let rej = row.rejection_rate.unwrap();
        // 99% binomial band around 0.05 with 500 draws: 0.05 +- 2.58*sqrt(0.05*0.95/500)
        assert!((0.05 - 0.0252..=0.05 + 0.0252).contains(&rej), "rejection {rej}");
    }

    #[test]
    fn csv_rows_are_stable() {
        let row = AggregateRow {
            scenario: "1a".into(),
            strategy: StrategyLabel::CvDOneSe,
            alpha: 1.0,
            n_trials: 10,
            n_failures: 0,
            mean_q2_x1: 0.25,
            sd_q2_x1: 0.01,
            mean_q2_cond: 0.0,
            sd_q2_cond: 0.0,
            mean_q2_joint: 0.25,
            sd_q2_joint: 0.01,
            rejection_rate: Some(0.1),
            single_trial: false,
        };
        let a = rows_to_csv(&[row.clone()]).unwrap();
        let b = rows_to_csv(&[row]).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("scenario,strategy,"));
        assert!(a.contains("CV_D/lambda_1se"));
    }

    #[test]
    fn strategy_labels_round_trip() {
        for label in StrategyLabel::all() {
            let parsed: StrategyLabel = label.as_str().parse().unwrap();
            assert_eq!(parsed, label);
        }
        assert!("CV_X/whatever".parse::<StrategyLabel>().is_err());
    }
}

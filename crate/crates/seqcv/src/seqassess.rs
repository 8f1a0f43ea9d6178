//! The two-stage sequential procedure and its Q² summary measures.
//!
//! Stage 1 cross-validates predictions of `y` from the primary block; stage 2
//! treats the stage-1 deletion residuals as a new response and cross-validates
//! predictions from the secondary block (equivalent to fitting the secondary
//! block with the stage-1 predictions as a fixed offset). Three sums-of-squares
//! ratios summarize the result: the primary, conditional and joint Q².

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::cv::{self, CvPrediction, CvStrategy};
use crate::error::{Error, Result};
use crate::seed::{self, Domain};

/// Penalty mixes, CV strategy and master seed for one sequential run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequentialConfig {
    /// Penalty mix for stage 1 (primary block).
    pub alpha1: f64,
    /// Penalty mix for stage 2 (secondary block on residuals).
    pub alpha2: f64,
    pub strategy: CvStrategy,
    pub seed: u64,
}

impl SequentialConfig {
    pub fn new(alpha1: f64, alpha2: f64, strategy: CvStrategy, seed: u64) -> Self {
        Self {
            alpha1,
            alpha2,
            strategy,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Diagnostics that do not abort a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Warning {
    /// Stage 1 explained nothing; the conditional measure loses its intended meaning.
    PrimaryQ2NotPositive { q2_x1: f64 },
    /// A Q² ratio exceeded 1; reported as computed rather than truncated.
    Q2AboveOne { measure: String, value: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::PrimaryQ2NotPositive { q2_x1 } =>

                write!(f, "primary Q² = {q2_x1:.4} is not positive; the sequential procedure assumes an informative first source"),
            Warning::Q2AboveOne { measure, value } => {
                write!(f, "{measure} = {value:.4} exceeds 1; the ratio is uncapped and reported as computed")
            }
        }
    }
}

/// Conditional Q² (stage 2), carrying both the fold-mean-corrected value and
/// the simplified zero-mean-residual approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalQ2 {
    pub value: f64,
    /// sum(p2²) / sum(res²), the approximation assuming zero-mean residuals.
    pub simplified: f64,
    pub discrepancy: f64,
}

/// Outcome of the conditional measure; the residual variance can vanish when
/// stage 1 fits exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum ConditionalOutcome {
    Ok(ConditionalQ2),
    /// Stage-1 residuals carry no variance; the conditional measure is undefined.
    DegenerateResidual,
}

impl ConditionalOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            ConditionalOutcome::Ok(q) => Some(q.value),
            ConditionalOutcome::DegenerateResidual => None,
        }
    }
}

/// Everything produced by one run of the two-stage procedure.
#[derive(Debug, Clone)]
pub struct SequentialResult {
    pub p1: CvPrediction,
    /// Stage-2 prediction of the deletion residuals.
    pub p2: CvPrediction,
    pub q2_x1: f64,
    pub q2_cond: ConditionalOutcome,
    pub q2_joint: f64,
    /// Denominator of Eq-style primary/joint measures: sum over folds of (y - ȳ^(-j))².
    pub press_null: f64,
    /// Numerator of the primary measure: sum of (p1 - ȳ^(-j))².
    pub cvss_1: f64,
    /// Numerator of the conditional measure: sum of (p2 - r̄^(-j))².
    pub cvss_2: f64,
    pub warnings: Vec<Warning>,
}

impl SequentialResult {
    /// The conditional Q², or an error when stage 1 fit exactly.
    pub fn q2_cond_value(&self) -> Result<f64> {
        self.q2_cond.value().ok_or_else(|| {
            Error::DegenerateResponse("stage-1 residuals are degenerate; conditional Q² undefined".into())
        })
    }
}

fn check_prediction_alignment(y: &ArrayView1<f64>, p: &CvPrediction) -> Result<()> {
    if p.values.len() != y.len() || p.plan.len() != y.len() {
        return Err(Error::Input(format!(
            "prediction vector length {} does not match response length {}",
            p.values.len(),
            y.len()
        )));
    }
    if p.fold_means.len() != p.plan.n_folds {
        return Err(Error::Input(
            "fold means do not match the fold plan".into(),
        ));
    }
    Ok(())
}

/// Numerator and denominator of a fold-mean-corrected Q² ratio: for every
/// observation, both the prediction and the target are centered at the
/// held-out training mean of its fold.
fn fold_corrected_sums(
    target: &Array1<f64>,
    pred: &Array1<f64>,
    plan: &cv::FoldPlan,
    fold_means: &[f64],
) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &fold) in plan.assignments.iter().enumerate() {
        let m = fold_means[fold - 1];
        let dp = pred[i] - m;
        let dy = target[i] - m;
        num += dp * dp;
        den += dy * dy;
    }
    (num, den)
}

/// Primary predictive ability: CVSS(p1, p0) / PRESS(y, p0) with the null
/// predictor p0 given by the per-fold held-out training means.
pub fn q2_primary(y: ArrayView1<f64>, p1: &CvPrediction) -> Result<f64> {
    check_prediction_alignment(&y, p1)?;
    let y_owned = y.to_owned();
    let (num, den) = fold_corrected_sums(&y_owned, &p1.values, &p1.plan, &p1.fold_means);
    if den == 0.0 {
        return Err(Error::DegenerateResponse(
            "response has zero variance around the fold means".into(),
        ));
    }
    Ok(num / den)
}

/// Conditional predictive ability of the second block: compares the stage-2
/// predictions against the stage-1 residuals, both centered at the stage-2
/// per-fold residual means. Also reports the simplified ratio sum(p2²)/sum(res²).
pub fn q2_conditional(
    y: ArrayView1<f64>,
    p1: &CvPrediction,
    p2: &CvPrediction,
) -> Result<ConditionalOutcome> {
    check_prediction_alignment(&y, p1)?;
    check_prediction_alignment(&y, p2)?;
    let res = &y.to_owned() - &p1.values;
    let res_ss = res.dot(&res);
    let (num, den) = fold_corrected_sums(&res, &p2.values, &p2.plan, &p2.fold_means);
    if den == 0.0 || res_ss == 0.0 {
        return Ok(ConditionalOutcome::DegenerateResidual);
    }
    let value = num / den;
    let simplified = p2.values.dot(&p2.values) / res_ss;
    Ok(ConditionalOutcome::Ok(ConditionalQ2 {
        value,
        simplified,
        discrepancy: (value - simplified).abs(),
    }))
}

/// Joint predictive ability of both blocks: the combined prediction p1 + p2
/// against y, centered at stage-1 fold means.
pub fn q2_joint(y: ArrayView1<f64>, p1: &CvPrediction, p2: &CvPrediction) -> Result<f64> {
    check_prediction_alignment(&y, p1)?;
    check_prediction_alignment(&y, p2)?;
    let combined = &p1.values + &p2.values;
    let y_owned = y.to_owned();
    let (num, den) = fold_corrected_sums(&y_owned, &combined, &p1.plan, &p1.fold_means);
    if den == 0.0 {
        return Err(Error::DegenerateResponse(
            "response has zero variance around the fold means".into(),
        ));
    }
    Ok(num / den)
}

/// Runs the full two-stage procedure: stage 1 cross-validates y from `x1`,
/// stage 2 cross-validates the stage-1 deletion residuals from `x2` on a
/// freshly randomized fold plan, and all three Q² measures are computed.
pub fn sequential_assess(
    x1: ArrayView2<f64>,
    x2: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &SequentialConfig,
) -> Result<SequentialResult> {
    if x1.nrows() != y.len() || x2.nrows() != y.len() {
        return Err(Error::Input(format!(
            "row mismatch: X1 has {}, X2 has {}, y has {}",
            x1.nrows(),
            x2.nrows(),
            y.len()
        )));
    }
    let p1 = cv::cv_predict(
        x1,
        y,
        None,
        cfg.alpha1,
        &cfg.strategy,
        seed::derive(cfg.seed, Domain::Stage1, 0),
    )?;
    let res = &y.to_owned() - &p1.values;
    let p2 = cv::cv_predict(
        x2,
        res.view(),
        None,
        cfg.alpha2,
        &cfg.strategy,
        seed::derive(cfg.seed, Domain::Stage2, 0),
    )?;

    let q2_x1 = q2_primary(y, &p1)?;
    let q2_cond = q2_conditional(y, &p1, &p2)?;
    let q2_joint_val = q2_joint(y, &p1, &p2)?;

    let y_owned = y.to_owned();
    let (cvss_1, press_null) = fold_corrected_sums(&y_owned, &p1.values, &p1.plan, &p1.fold_means);
    let (cvss_2, _) = fold_corrected_sums(&res, &p2.values, &p2.plan, &p2.fold_means);

    let mut warnings = Vec::new();
    if q2_x1 <= 0.0 {
        warnings.push(Warning::PrimaryQ2NotPositive { q2_x1 });
    }
    for (name, v) in [
        ("q2_x1", Some(q2_x1)),
        ("q2_cond", q2_cond.value()),
        ("q2_joint", Some(q2_joint_val)),
    ] {
        if let Some(v) = v {
            if v > 1.0 {
                warnings.push(Warning::Q2AboveOne {
                    measure: name.to_string(),
                    value: v,
                });
            }
        }
    }

    Ok(SequentialResult {
        p1,
        p2,
        q2_x1,
        q2_cond,
        q2_joint: q2_joint_val,
        press_null,
        cvss_1,
        cvss_2,
        warnings,
    })
}

/// Result of the naive stacking comparison: both blocks concatenated
/// column-wise into a single penalized fit.
#[derive(Debug, Clone)]
pub struct StackResult {
    pub q2: f64,
    pub prediction: CvPrediction,
    pub scaled: bool,
}

/// Concatenates the two blocks (optionally standardizing every column over
/// the full sample first) and cross-validates a single model of y on the
/// stack. Reported with the same primary Q² measure for comparison against
/// the sequential procedure.
pub fn stack_assess<'a>(
    x1: ArrayView2<'a, f64>,
    x2: ArrayView2<'a, f64>,
    y: ArrayView1<f64>,
    scale: bool,
    alpha: f64,
    strategy: &CvStrategy,
    seed_val: u64,
) -> Result<StackResult> {
    if x1.nrows() != y.len() || x2.nrows() != y.len() {
        return Err(Error::Input(format!(
            "row mismatch: X1 has {}, X2 has {}, y has {}",
            x1.nrows(),
            x2.nrows(),
            y.len()
        )));
    }
    let mut stacked = ndarray::concatenate(Axis(1), &[x1, x2])
        .map_err(|e| Error::Input(format!("cannot stack blocks: {e}")))?;
    if scale {
        let n = stacked.nrows() as f64;
        for mut col in stacked.columns_mut() {
            let mu = col.sum() / n;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            if var > 0.0 {
                let s = var.sqrt();
                col.mapv_inplace(|v| (v - mu) / s);
            }
        }
    }
    let prediction = cv::cv_predict(
        stacked.view(),
        y,
        None,
        alpha,
        strategy,
        seed::derive(seed_val, Domain::Stage1, 0),
    )?;
    let q2 = q2_primary(y, &prediction)?;
    Ok(StackResult {
        q2,
        prediction,
        scaled: scale,
    })
}

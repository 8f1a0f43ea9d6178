//! Elastic-net penalized least squares with an optional fixed offset.
//!
//! Internal objective, on standardized columns:
//!
//! ```text
//! (1/(2n)) ||y - offset - X b||^2 + lambda * [ (1-alpha)/2 ||b||_2^2 + alpha ||b||_1 ]
//! ```
//!
//! The 1/(2n) loss scaling keeps `lambda` comparable across fold sizes inside
//! nested cross-validation. Columns are centered and scaled to unit (1/n)
//! variance per training fit, the response is centered after offset removal,
//! and the intercept is recovered analytically. Under this scaling, multiplying
//! `y` by c multiplies every coefficient by c at the same lambda for ridge
//! (alpha = 0) and at lambda scaled by c for the lasso (alpha = 1).
//!
//! Ridge fits (alpha = 0) go through a closed-form dual/primal linear solve;
//! alpha > 0 runs cyclical coordinate descent with soft-thresholding, active-set
//! sweeps and warm starts along penalty paths.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg;

pub const DEFAULT_N_LAMBDA: usize = 100;
/// Grid depth for high-dimensional (n < p) training sets.
pub const DEFAULT_EPS_RATIO: f64 = 2.5e-3;
/// Grid depth when n >= p; the alpha-floored ridge grid top sits ~1000x above
/// useful penalties there, so the grid must reach much further down.
pub const DEFAULT_EPS_RATIO_LOWDIM: f64 = 1e-5;

/// Shape-adaptive default grid depth.
pub fn default_eps_ratio(n: usize, p: usize) -> f64 {
    if n < p {
        DEFAULT_EPS_RATIO
    } else {
        DEFAULT_EPS_RATIO_LOWDIM
    }
}

/// Convergence threshold on the max coefficient change per sweep (standardized scale).
pub const CD_TOL: f64 = 1e-7;
pub const CD_MAX_SWEEPS: usize = 100_000;

/// Floor on alpha in the lambda_max formula; ridge has no finite all-zero lambda,
/// so its grid top uses the conventional surrogate max|<x_j, y>| / (n * 0.001).
const ALPHA_FLOOR: f64 = 1e-3;

/// Elastic-net penalty mix and strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    /// 0 = ridge, 1 = lasso.
    pub alpha: f64,
    pub lambda: f64,
}

impl PenaltyConfig {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::Input(format!("alpha must lie in [0,1], got {alpha}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Input(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { alpha, lambda })
    }
}

/// Per-feature training statistics recorded for prediction.
#[derive(Debug, Clone)]
pub struct Standardization {
    pub col_means: Array1<f64>,
    /// Population (1/n) standard deviations; 0 marks a degenerate column.
    pub col_scales: Array1<f64>,
    /// Mean of (y - offset) on the training data.
    pub y_mean: f64,
}

/// A fitted penalized model on the original predictor scale.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: Array1<f64>,
    pub intercept: f64,
    pub standardization: Standardization,
    pub alpha: f64,
    pub lambda: f64,
    /// Coordinate-descent sweeps used (0 for closed-form ridge).
    pub sweeps: usize,
}

/// Standardized training data; rows of `xs_t` are the standardized columns,
/// kept contiguous for the coordinate-descent inner loops.
pub(crate) struct Standardized {
    pub xs_t: Array2<f64>,
    pub yc: Array1<f64>,
    pub std: Standardization,
    /// (1/n) squared norms of standardized columns (1 except degenerate 0).
    pub col_sq: Array1<f64>,
}

fn validate_xy(x: &ArrayView2<f64>, y: &ArrayView1<f64>, offset: Option<&ArrayView1<f64>>) -> Result<()> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::Input(format!(
            "X has {n} rows but y has {} entries",
            y.len()
        )));
    }
    if let Some(o) = offset {
        if o.len() != n {
            return Err(Error::Input(format!(
                "X has {n} rows but offset has {} entries",
                o.len()
            )));
        }
        if o.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("offset contains non-finite values".into()));
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("X contains non-finite values".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("y contains non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn standardize(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    offset: Option<&ArrayView1<f64>>,
) -> Standardized {
    let (n, p) = (x.nrows(), x.ncols());
    let nf = n as f64;
    let mut y_eff = y.to_owned();
    if let Some(o) = offset {
        y_eff -= o;
    }
    let y_mean = y_eff.sum() / nf;
    let yc = y_eff.mapv(|v| v - y_mean);

    let mut xs_t = Array2::<f64>::zeros((p, n));
    let mut means = Array1::<f64>::zeros(p);
    let mut scales = Array1::<f64>::zeros(p);
    let mut col_sq = Array1::<f64>::zeros(p);
    for j in 0..p {
        let col = x.column(j);
        let mu = col.sum() / nf;
        let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / nf;
        means[j] = mu;
        if var > 0.0 {
            let s = var.sqrt();
            scales[j] = s;
            let mut row = xs_t.row_mut(j);
            for (i, v) in col.iter().enumerate() {
                row[i] = (v - mu) / s;
            }
            col_sq[j] = row.dot(&row) / nf;
        }
        // degenerate column: left as zeros, coefficient stays 0
    }
    Standardized {
        xs_t,
        yc,
        std: Standardization {
            col_means: means,
            col_scales: scales,
            y_mean,
        },
        col_sq,
    }
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub(crate) struct CdSolution {
    pub gamma: Array1<f64>,
    pub sweeps: usize,
    /// Penalized objective recorded after each sweep when tracing is on;
    /// consumed by the monotonicity tests.
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective_trace: Vec<f64>,
}

fn cd_objective(std_data: &Standardized, r: &Array1<f64>, gamma: &Array1<f64>, alpha: f64, lambda: f64) -> f64 {
    let n = std_data.yc.len() as f64;
    let l1: f64 = gamma.iter().map(|g| g.abs()).sum();
    let l2: f64 = gamma.iter().map(|g| g * g).sum();
    r.dot(r) / (2.0 * n) + lambda * ((1.0 - alpha) / 2.0 * l2 + alpha * l1)
}

/// Cyclical coordinate descent on standardized data. `warm` seeds the
/// coefficients; the residual is rebuilt from it.
pub(crate) fn coordinate_descent(
    std_data: &Standardized,
    alpha: f64,
    lambda: f64,
    warm: Option<&Array1<f64>>,
    trace_objective: bool,
) -> Result<CdSolution> {
    let p = std_data.xs_t.nrows();
    let n = std_data.yc.len();
    let nf = n as f64;
    let mut gamma = warm.cloned().unwrap_or_else(|| Array1::zeros(p));
    let mut r = std_data.yc.clone();
    for j in 0..p {
        let g = gamma[j];
        if g != 0.0 {
            r.scaled_add(-g, &std_data.xs_t.row(j));
        }
    }
    let thresh = lambda * alpha;
    let denom_l2 = lambda * (1.0 - alpha);
    let mut trace = Vec::new();
    if trace_objective {
        trace.push(cd_objective(std_data, &r, &gamma, alpha, lambda));
    }

    let mut sweeps = 0usize;
    let mut last_max_delta;
    // A full sweep over all coordinates; returns the max coefficient change.
    let full_sweep = |gamma: &mut Array1<f64>, r: &mut Array1<f64>, active_only: bool| -> f64 {
        let mut max_delta = 0.0f64;
        for j in 0..p {
            let cs = std_data.col_sq[j];
            if cs == 0.0 {
                continue;
            }
            let old = gamma[j];
            if active_only && old == 0.0 {
                continue;
            }
            let row = std_data.xs_t.row(j);
            let z = row.dot(r) / nf + cs * old;
            let new = soft_threshold(z, thresh) / (cs + denom_l2);
            if new != old {
                r.scaled_add(old - new, &row);
                gamma[j] = new;
                let d = (new - old).abs();
                if d > max_delta {
                    max_delta = d;
                }
            }
        }
        max_delta
    };

    loop {
        // full pass establishes/refreshes the active set
        let delta_full = full_sweep(&mut gamma, &mut r, false);
        sweeps += 1;
        if trace_objective {
            trace.push(cd_objective(std_data, &r, &gamma, alpha, lambda));
        }
        last_max_delta = delta_full;
        if delta_full < CD_TOL {
            break;
        }
        if sweeps >= CD_MAX_SWEEPS {
            return Err(Error::Convergence {
                sweeps,
                max_coef_change: last_max_delta,
            });
        }
        // iterate the active set to convergence before re-checking all coordinates
        loop {
            let delta = full_sweep(&mut gamma, &mut r, true);
            sweeps += 1;
            if trace_objective {
                trace.push(cd_objective(std_data, &r, &gamma, alpha, lambda));
            }
            last_max_delta = delta;
            if delta < CD_TOL {
                break;
            }
            if sweeps >= CD_MAX_SWEEPS {
                return Err(Error::Convergence {
                    sweeps,
                    max_coef_change: last_max_delta,
                });
            }
        }
    }
    let _ = last_max_delta;
    Ok(CdSolution {
        gamma,
        sweeps,
        objective_trace: trace,
    })
}

/// Closed-form ridge on standardized data: solves the primal normal equations
/// when p <= n, the dual system otherwise (identical solutions).
pub(crate) fn ridge_gamma(std_data: &Standardized, lambda: f64) -> Result<Array1<f64>> {
    let p = std_data.xs_t.nrows();
    let n = std_data.yc.len();
    let nf = n as f64;
    let xs_t = &std_data.xs_t;
    if p <= n {
        // (X^T X + n*lambda I) g = X^T y
        let mut gram = xs_t.dot(&xs_t.t());
        for j in 0..p {
            gram[[j, j]] += nf * lambda;
        }
        let rhs = xs_t.dot(&std_data.yc);
        linalg::solve_spd(&gram, &rhs)
    } else {
        // g = X^T (X X^T + n*lambda I)^{-1} y
        let mut gram = xs_t.t().dot(xs_t);
        for i in 0..n {
            gram[[i, i]] += nf * lambda;
        }
        let u = linalg::solve_spd(&gram, &std_data.yc)?;
        Ok(xs_t.dot(&u))
    }
}

fn finish_fit(std_data: &Standardized, gamma: Array1<f64>, cfg: &PenaltyConfig, sweeps: usize) -> FitResult {
    let p = gamma.len();
    let mut beta = Array1::<f64>::zeros(p);
    let mut mean_adj = 0.0;
    for j in 0..p {
        let s = std_data.std.col_scales[j];
        if s > 0.0 {
            beta[j] = gamma[j] / s;
            mean_adj += beta[j] * std_data.std.col_means[j];
        }
    }
    FitResult {
        intercept: std_data.std.y_mean - mean_adj,
        coefficients: beta,
        standardization: std_data.std.clone(),
        alpha: cfg.alpha,
        lambda: cfg.lambda,
        sweeps,
    }
}

/// Fits the penalized model of `y` (minus `offset` when given) on `X`.
pub fn fit(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    offset: Option<ArrayView1<f64>>,
    cfg: &PenaltyConfig,
) -> Result<FitResult> {
    validate_xy(&x, &y, offset.as_ref())?;
    if x.nrows() < 3 {
        return Err(Error::Input(format!("need at least 3 observations, got {}", x.nrows())));
    }
    PenaltyConfig::new(cfg.alpha, cfg.lambda)?;
    let std_data = standardize(&x, &y, offset.as_ref());
    if cfg.alpha == 0.0 {
        let gamma = ridge_gamma(&std_data, cfg.lambda)?;
        Ok(finish_fit(&std_data, gamma, cfg, 0))
    } else {
        let sol = coordinate_descent(&std_data, cfg.alpha, cfg.lambda, None, false)?;
        Ok(finish_fit(&std_data, sol.gamma, cfg, sol.sweeps))
    }
}

/// Evaluates a fit on new rows: intercept + X_new . beta (+ offset).
pub fn predict(
    fit: &FitResult,
    x_new: ArrayView2<f64>,
    offset: Option<ArrayView1<f64>>,
) -> Result<Array1<f64>> {
    if x_new.ncols() != fit.coefficients.len() {
        return Err(Error::Input(format!(
            "fit has {} coefficients but X_new has {} columns",
            fit.coefficients.len(),
            x_new.ncols()
        )));
    }
    if let Some(o) = &offset {
        if o.len() != x_new.nrows() {
            return Err(Error::Input(format!(
                "X_new has {} rows but offset has {} entries",
                x_new.nrows(),
                o.len()
            )));
        }
    }
    let mut out = x_new.dot(&fit.coefficients) + fit.intercept;
    if let Some(o) = offset {
        out += &o;
    }
    Ok(out)
}

fn lambda_max_standardized(std_data: &Standardized, alpha: f64) -> Result<f64> {
    let n = std_data.yc.len() as f64;
    if std_data.yc.iter().all(|v| v.abs() < 1e-300) || std_data.yc.dot(&std_data.yc) == 0.0 {
        return Err(Error::DegenerateResponse(
            "response is constant after offset removal".into(),
        ));
    }
    let mut best = 0.0f64;
    for j in 0..std_data.xs_t.nrows() {
        if std_data.col_sq[j] == 0.0 {
            continue;
        }
        let v = std_data.xs_t.row(j).dot(&std_data.yc).abs();
        if v > best {
            best = v;
        }
    }
    if best == 0.0 {
        return Err(Error::Input(
            "all predictor columns are constant; no penalty grid exists".into(),
        ));
    }
    Ok(best / (n * alpha.max(ALPHA_FLOOR)))
}

/// Geometric penalty grid from lambda_max down to eps_ratio * lambda_max.
///
/// For alpha = 1 a fit at the grid top has all coefficients exactly zero; ridge
/// has no finite all-zero lambda, so the top uses the alpha-floored surrogate.
pub fn lambda_grid(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    offset: Option<ArrayView1<f64>>,
    alpha: f64,
    n_lambda: usize,
    eps_ratio: f64,
) -> Result<Vec<f64>> {
    validate_xy(&x, &y, offset.as_ref())?;
    if n_lambda < 2 {
        return Err(Error::Input(format!("n_lambda must be >= 2, got {n_lambda}")));
    }
    if !(eps_ratio > 0.0 && eps_ratio < 1.0) {
        return Err(Error::Input(format!("eps_ratio must lie in (0,1), got {eps_ratio}")));
    }
    let std_data = standardize(&x, &y, offset.as_ref());
    let lmax = lambda_max_standardized(&std_data, alpha)?;
    Ok(geometric_grid(lmax, n_lambda, eps_ratio))
}

pub(crate) fn geometric_grid(lmax: f64, n_lambda: usize, eps_ratio: f64) -> Vec<f64> {
    let ratio = eps_ratio.powf(1.0 / (n_lambda as f64 - 1.0));
    let mut grid = Vec::with_capacity(n_lambda);
    let mut lam = lmax;
    for _ in 0..n_lambda {
        grid.push(lam);
        lam *= ratio;
    }
    grid
}

/// Warm-started fits along a strictly decreasing penalty grid.
pub fn fit_path(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    offset: Option<ArrayView1<f64>>,
    alpha: f64,
    grid: &[f64],
) -> Result<Vec<FitResult>> {
    validate_xy(&x, &y, offset.as_ref())?;
    if grid.is_empty() {
        return Err(Error::Input("empty lambda grid".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Input("lambda grid must be strictly decreasing".into()));
    }
    let std_data = standardize(&x, &y, offset.as_ref());
    let mut out = Vec::with_capacity(grid.len());
    if alpha == 0.0 {
        for &lam in grid {
            let cfg = PenaltyConfig::new(0.0, lam)?;
            let gamma = ridge_gamma(&std_data, lam)?;
            out.push(finish_fit(&std_data, gamma, &cfg, 0));
        }
    } else {
        let mut warm: Option<Array1<f64>> = None;
        for &lam in grid {
            let cfg = PenaltyConfig::new(alpha, lam)?;
            let sol = coordinate_descent(&std_data, alpha, lam, warm.as_ref(), false)?;
            warm = Some(sol.gamma.clone());
            out.push(finish_fit(&std_data, sol.gamma, &cfg, sol.sweeps));
        }
    }
    Ok(out)
}

/// Held-out predictions for every lambda on the grid: row l holds the
/// predictions of grid[l] on `x_test`. This is the inner-CV workhorse; ridge
/// amortizes one eigendecomposition of the training Gram across the whole
/// grid, the lasso path reuses warm starts and predicts from active
/// coefficients only.
pub(crate) fn holdout_path_predictions(
    x_train: ArrayView2<f64>,
    y_train: ArrayView1<f64>,
    offset_train: Option<ArrayView1<f64>>,
    x_test: ArrayView2<f64>,
    offset_test: Option<ArrayView1<f64>>,
    alpha: f64,
    grid: &[f64],
) -> Result<Array2<f64>> {
    let std_data = standardize(&x_train, &y_train, offset_train.as_ref());
    let n = y_train.len();
    let nf = n as f64;
    let n_te = x_test.nrows();
    let p = x_train.ncols();

    // standardize test rows with training statistics, transposed layout
    let mut xte_t = Array2::<f64>::zeros((p, n_te));
    for j in 0..p {
        let s = std_data.std.col_scales[j];
        if s > 0.0 {
            let mu = std_data.std.col_means[j];
            let col = x_test.column(j);
            let mut row = xte_t.row_mut(j);
            for (i, v) in col.iter().enumerate() {
                row[i] = (v - mu) / s;
            }
        }
    }

    let mut preds = Array2::<f64>::zeros((grid.len(), n_te));
    if alpha == 0.0 {
        let xs_t = &std_data.xs_t;
        let mut gram = xs_t.t().dot(xs_t); // n x n
        // guard tiny negative eigenvalues from roundoff
        let (vals, q) = linalg::sym_eigen(&gram)?;
        let vals = vals.mapv(|v| v.max(0.0));
        let c = q.t().dot(&std_data.yc);
        let cross = xte_t.t().dot(xs_t); // n_te x n
        let b = cross.dot(&q); // n_te x n
        for (l, &lam) in grid.iter().enumerate() {
            let w = Array1::from_shape_fn(n, |i| c[i] / (vals[i] + nf * lam));
            let base = b.dot(&w);
            let mut row = preds.row_mut(l);
            for i in 0..n_te {
                row[i] = base[i] + std_data.std.y_mean;
            }
        }
        gram.fill(0.0); // large scratch, drop eagerly in long loops
    } else {
        let mut warm: Option<Array1<f64>> = None;
        for (l, &lam) in grid.iter().enumerate() {
            let sol = coordinate_descent(&std_data, alpha, lam, warm.as_ref(), false)?;
            let mut row = preds.row_mut(l);
            row.fill(std_data.std.y_mean);
            for j in 0..p {
                let g = sol.gamma[j];
                if g != 0.0 {
                    row.scaled_add(g, &xte_t.row(j));
                }
            }
            warm = Some(sol.gamma);
        }
    }
    if let Some(o) = offset_test {
        for mut row in preds.rows_mut() {
            row += &o;
        }
    }
    Ok(preds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use ndarray::array;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_problem(n: usize, p: usize, seed_val: u64) -> (Array2<f64>, Array1<f64>) {
        let mut rng = seed::rng(seed_val);
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        let y = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        (x, y)
    }

    /// Test-local standardization + Gaussian elimination; independent of the
    /// solver path (which uses Cholesky on a different system layout).
    fn ridge_dense_oracle(x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> (Array1<f64>, f64) {
        let (n, p) = (x.nrows(), x.ncols());
        let nf = n as f64;
        let mut mu = vec![0.0; p];
        let mut s = vec![0.0; p];
        for j in 0..p {
            mu[j] = x.column(j).sum() / nf;
            s[j] = (x.column(j).iter().map(|v| (v - mu[j]).powi(2)).sum::<f64>() / nf).sqrt();
        }
        let ym = y.sum() / nf;
        let xs = Array2::from_shape_fn((n, p), |(i, j)| (x[[i, j]] - mu[j]) / s[j]);
        let yc = y.mapv(|v| v - ym);
        // A = Xs^T Xs + n*lambda I, b = Xs^T yc
        let mut a = xs.t().dot(&xs);
        for j in 0..p {
            a[[j, j]] += nf * lambda;
        }
        let mut b = xs.t().dot(&yc);
        // plain Gaussian elimination with partial pivoting
        let mut m = a.clone();
        for k in 0..p {
            let piv = (k..p).max_by(|&i, &j| m[[i, k]].abs().partial_cmp(&m[[j, k]].abs()).unwrap()).unwrap();
            if piv != k {
                for c in 0..p {
                    let t = m[[k, c]];
                    m[[k, c]] = m[[piv, c]];
                    m[[piv, c]] = t;
                }
                b.swap(k, piv);
            }
            for i in k + 1..p {
                let f = m[[i, k]] / m[[k, k]];
                for c in k..p {
                    m[[i, c]] -= f * m[[k, c]];
                }
                b[i] -= f * b[k];
            }
        }
        let mut gamma = Array1::<f64>::zeros(p);
        for i in (0..p).rev() {
            let mut acc = b[i];
            for c in i + 1..p {
                acc -= m[[i, c]] * gamma[c];
            }
            gamma[i] = acc / m[[i, i]];
        }
        let beta = Array1::from_shape_fn(p, |j| gamma[j] / s[j]);
        let intercept = ym - (0..p).map(|j| beta[j] * mu[j]).sum::<f64>();
        (beta, intercept)
    }

    #[test]
    fn unpenalized_limit_recovers_exact_fit() {
        let x = array![[1.0], [0.0], [-1.0]];
        let y = array![1.0, 0.0, -1.0];
        let cfg = PenaltyConfig::new(0.0, 1e-10).unwrap();
        let fit_res = fit(x.view(), y.view(), None, &cfg).unwrap();
        assert!((fit_res.coefficients[0] - 1.0).abs() < 1e-6);
        assert!(fit_res.intercept.abs() < 1e-8);
        // interpolation case: predictions reproduce y
        let pred = predict(&fit_res, x.view(), None).unwrap();
        for i in 0..3 {
            assert!((pred[i] - y[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn lasso_at_lambda_max_is_all_zero() {
        let (x, y) = random_problem(12, 5, 11);
        let grid = lambda_grid(x.view(), y.view(), None, 1.0, 5, 0.1).unwrap();
        let cfg = PenaltyConfig::new(1.0, grid[0]).unwrap();
        let f = fit(x.view(), y.view(), None, &cfg).unwrap();
        assert!(f.coefficients.iter().all(|&b| b == 0.0));
        assert!((f.intercept - y.sum() / 12.0).abs() < 1e-12);
        // and with an offset, the intercept is the mean of (y - offset)
        let o = Array1::from_elem(12, 0.7);
        let grid_o = lambda_grid(x.view(), y.view(), Some(o.view()), 1.0, 5, 0.1).unwrap();
        let cfg_o = PenaltyConfig::new(1.0, grid_o[0]).unwrap();
        let fo = fit(x.view(), y.view(), Some(o.view()), &cfg_o).unwrap();
        assert!(fo.coefficients.iter().all(|&b| b == 0.0));
        assert!((fo.intercept - (y.sum() / 12.0 - 0.7)).abs() < 1e-12);
    }

    #[test]
    fn ridge_matches_independent_dense_solve() {
        let (x, y) = random_problem(10, 4, 23);
        let cfg = PenaltyConfig::new(0.0, 0.5).unwrap();
        let f = fit(x.view(), y.view(), None, &cfg).unwrap();
        let (beta, intercept) = ridge_dense_oracle(&x, &y, 0.5);
        for j in 0..4 {
            let rel = (f.coefficients[j] - beta[j]).abs() / beta[j].abs().max(1e-12);
            assert!(rel < 1e-8, "coefficient {j}: {} vs {}", f.coefficients[j], beta[j]);
        }
        assert!((f.intercept - intercept).abs() < 1e-10);
    }

    #[test]
    fn ridge_equivalence_holds_across_shapes() {
        // includes p > n, where the solver takes the dual route
        for (n, p, s) in [(10, 4, 1u64), (8, 3, 2), (12, 50, 3), (30, 7, 4)] {
            let (x, y) = random_problem(n, p, 100 + s);
            for lambda in [0.05, 0.9] {
                let cfg = PenaltyConfig::new(0.0, lambda).unwrap();
                let f = fit(x.view(), y.view(), None, &cfg).unwrap();
                let (beta, _) = ridge_dense_oracle(&x, &y, lambda);
                for j in 0..p {
                    let rel = (f.coefficients[j] - beta[j]).abs() / beta[j].abs().max(1e-12);
                    assert!(rel < 1e-8, "n={n} p={p} lambda={lambda} j={j}");
                }
            }
        }
    }

    #[test]
    fn lasso_matches_brute_force_grid() {
        let (x, y) = random_problem(8, 3, 37);
        let lambda = 0.2;
        let cfg = PenaltyConfig::new(1.0, lambda).unwrap();
        let f = fit(x.view(), y.view(), None, &cfg).unwrap();
        // brute-force the standardized objective by refining grid search
        let std_data = standardize(&x.view(), &y.view(), None);
        let obj = |g: &[f64; 3]| {
            let mut r = std_data.yc.clone();
            for j in 0..3 {
                r.scaled_add(-g[j], &std_data.xs_t.row(j));
            }
            r.dot(&r) / 16.0 + lambda * g.iter().map(|v| v.abs()).sum::<f64>()
        };
        let mut center = [0.0f64; 3];
        let mut radius = 2.0f64;
        for _ in 0..6 {
            let mut best = (f64::INFINITY, center);
            let steps = 20;
            for a in 0..=steps {
                for b in 0..=steps {
                    for c in 0..=steps {
                        let cand = [
                            center[0] - radius + 2.0 * radius * a as f64 / steps as f64,
                            center[1] - radius + 2.0 * radius * b as f64 / steps as f64,
                            center[2] - radius + 2.0 * radius * c as f64 / steps as f64,
                        ];
                        let v = obj(&cand);
                        if v < best.0 {
                            best = (v, cand);
                        }
                    }
                }
            }
            center = best.1;
            radius /= 8.0;
        }
        for j in 0..3 {
            let gamma_fit = f.coefficients[j] * std_data.std.col_scales[j];
            assert!(
                (gamma_fit - center[j]).abs() < 1e-3,
                "gamma {j}: solver {gamma_fit} vs grid {}",
                center[j]
            );
        }
    }

    #[test]
    fn predict_constant_for_zero_coefficients() {
        let f = FitResult {
            coefficients: Array1::zeros(2),
            intercept: 3.25,
            standardization: Standardization {
                col_means: Array1::zeros(2),
                col_scales: Array1::ones(2),
                y_mean: 3.25,
            },
            alpha: 1.0,
            lambda: 1.0,
            sweeps: 0,
        };
        let x = array![[5.0, -2.0], [0.0, 0.0], [9.0, 9.0]];
        let pred = predict(&f, x.view(), None).unwrap();
        assert!(pred.iter().all(|&v| v == 3.25));
    }

    #[test]
    fn offset_equivalence_identity() {
        let (x, y) = random_problem(15, 6, 91);
        let mut rng = seed::rng(17);
        let o = Array1::from_shape_fn(15, |_| rng.sample::<f64, _>(StandardNormal));
        for alpha in [0.0, 1.0, 0.5] {
            let cfg = PenaltyConfig::new(alpha, 0.3).unwrap();
            let with_offset = fit(x.view(), y.view(), Some(o.view()), &cfg).unwrap();
            let y_minus = &y - &o;
            let residual_form = fit(x.view(), y_minus.view(), None, &cfg).unwrap();
            for j in 0..6 {
                assert!((with_offset.coefficients[j] - residual_form.coefficients[j]).abs() < 1e-12);
            }
            assert!((with_offset.intercept - residual_form.intercept).abs() < 1e-12);
            let p1 = predict(&with_offset, x.view(), Some(o.view())).unwrap();
            let p2 = predict(&residual_form, x.view(), None).unwrap();
            for i in 0..15 {
                assert!((p1[i] - o[i] - p2[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_two_point_and_monotone() {
        let (x, y) = random_problem(10, 4, 5);
        let g = lambda_grid(x.view(), y.view(), None, 1.0, 2, 0.5).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g[1] - 0.5 * g[0]).abs() < 1e-12 * g[0]);
        for s in 0..5 {
            let (x, y) = random_problem(10, 4, 200 + s);
            let g = lambda_grid(x.view(), y.view(), None, 0.0, 25, 1e-3).unwrap();
            assert!(g.iter().all(|&l| l > 0.0));
            assert!(g.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn grid_rejects_constant_response() {
        let (x, _) = random_problem(10, 4, 5);
        let y = Array1::from_elem(10, 2.5);
        match lambda_grid(x.view(), y.view(), None, 1.0, 10, 0.1) {
            Err(Error::DegenerateResponse(_)) => {}
            other => panic!("expected degenerate-response error, got {other:?}"),
        }
        // offset exactly equal to y is the same situation
        let (_, y2) = random_problem(10, 4, 6);
        match lambda_grid(x.view(), y2.view(), Some(y2.view()), 1.0, 10, 0.1) {
            Err(Error::DegenerateResponse(_)) => {}
            other => panic!("expected degenerate-response error, got {other:?}"),
        }
    }

    #[test]
    fn path_single_element_equals_fit() {
        let (x, y) = random_problem(12, 5, 44);
        let path = fit_path(x.view(), y.view(), None, 1.0, &[0.15]).unwrap();
        let single = fit(x.view(), y.view(), None, &PenaltyConfig::new(1.0, 0.15).unwrap()).unwrap();
        for j in 0..5 {
            assert!((path[0].coefficients[j] - single.coefficients[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn warm_start_path_matches_cold_start() {
        let (x, y) = random_problem(20, 10, 55);
        let grid = lambda_grid(x.view(), y.view(), None, 1.0, 30, 1e-3).unwrap();
        let path = fit_path(x.view(), y.view(), None, 1.0, &grid).unwrap();
        for (l, f_warm) in path.iter().enumerate() {
            let f_cold = fit(x.view(), y.view(), None, &PenaltyConfig::new(1.0, grid[l]).unwrap()).unwrap();
            for j in 0..10 {
                assert!(
                    (f_warm.coefficients[j] - f_cold.coefficients[j]).abs() < 1e-6,
                    "lambda index {l}, coefficient {j}"
                );
            }
        }
    }

    #[test]
    fn lasso_orthogonal_design_soft_thresholds_and_grows_support() {
        // orthogonal columns: the lasso solution is coordinatewise soft-thresholding
        let n = 16;
        let mut x = Array2::<f64>::zeros((n, 4));
        for j in 0..4 {
            for i in 0..n {
                // orthogonal +-1 design (Hadamard-like)
                let bit = match j {
                    0 => i & 1,
                    1 => (i >> 1) & 1,
                    2 => (i >> 2) & 1,
                    _ => (i >> 3) & 1,
                };
                x[[i, j]] = if bit == 0 { 1.0 } else { -1.0 };
            }
        }
        let mut rng = seed::rng(7);
        let y = Array1::from_shape_fn(n, |i| {
            2.0 * x[[i, 0]] + 0.9 * x[[i, 1]] + 0.3 * x[[i, 2]] + 0.05 * rng.sample::<f64, _>(StandardNormal)
        });
        let grid = lambda_grid(x.view(), y.view(), None, 1.0, 25, 1e-3).unwrap();
        let path = fit_path(x.view(), y.view(), None, 1.0, &grid).unwrap();
        let std_data = standardize(&x.view(), &y.view(), None);
        let nf = n as f64;
        let mut prev_nnz = 0usize;
        for (l, f) in path.iter().enumerate() {
            let nnz = f.coefficients.iter().filter(|&&b| b != 0.0).count();
            assert!(nnz >= prev_nnz, "support must grow as lambda decreases");
            prev_nnz = nnz;
            for j in 0..4 {
                let z = std_data.xs_t.row(j).dot(&std_data.yc) / nf;
                let expected = soft_threshold(z, grid[l]) / std_data.col_sq[j];
                let gamma_fit = f.coefficients[j] * std_data.std.col_scales[j];
                assert!((gamma_fit - expected).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn lasso_support_bounded_by_sample_size() {
        let (x, y) = random_problem(10, 40, 71);
        let f = fit(x.view(), y.view(), None, &PenaltyConfig::new(1.0, 1e-3).unwrap()).unwrap();
        let nnz = f.coefficients.iter().filter(|&&b| b != 0.0).count();
        assert!(nnz <= 10, "lasso kept {nnz} coefficients with n=10");
    }

    #[test]
    fn objective_non_increasing_over_sweeps() {
        let (x, y) = random_problem(20, 8, 83);
        let std_data = standardize(&x.view(), &y.view(), None);
        for alpha in [1.0, 0.5] {
            let sol = coordinate_descent(&std_data, alpha, 0.05, None, true).unwrap();
            for w in sol.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn scale_equivariance() {
        let (x, y) = random_problem(14, 5, 99);
        let c = 3.7;
        let yc = y.mapv(|v| c * v);
        // ridge: same lambda
        let f1 = fit(x.view(), y.view(), None, &PenaltyConfig::new(0.0, 0.4).unwrap()).unwrap();
        let f2 = fit(x.view(), yc.view(), None, &PenaltyConfig::new(0.0, 0.4).unwrap()).unwrap();
        for j in 0..5 {
            assert!((f2.coefficients[j] - c * f1.coefficients[j]).abs() < 1e-10);
        }
        // lasso: lambda scales with |c|; comparison limited by the CD tolerance
        let f3 = fit(x.view(), y.view(), None, &PenaltyConfig::new(1.0, 0.1).unwrap()).unwrap();
        let f4 = fit(x.view(), yc.view(), None, &PenaltyConfig::new(1.0, 0.1 * c).unwrap()).unwrap();
        for j in 0..5 {
            assert!((f4.coefficients[j] - c * f3.coefficients[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_column_is_skipped() {
        let (mut x, y) = random_problem(12, 4, 13);
        for i in 0..12 {
            x[[i, 2]] = 5.0;
        }
        let f = fit(x.view(), y.view(), None, &PenaltyConfig::new(1.0, 0.05).unwrap()).unwrap();
        assert_eq!(f.coefficients[2], 0.0);
        let pred = predict(&f, x.view(), None).unwrap();
        assert!(pred.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let (x, y) = random_problem(10, 4, 3);
        let bad_y = Array1::zeros(9);
        assert!(fit(x.view(), bad_y.view(), None, &PenaltyConfig::new(0.0, 1.0).unwrap()).is_err());
        let mut x_nan = x.clone();
        x_nan[[0, 0]] = f64::NAN;
        assert!(matches!(
            fit(x_nan.view(), y.view(), None, &PenaltyConfig::new(0.0, 1.0).unwrap()),
            Err(Error::Input(_))
        ));
        let f = fit(x.view(), y.view(), None, &PenaltyConfig::new(0.0, 1.0).unwrap()).unwrap();
        let x_wide = Array2::<f64>::zeros((3, 5));
        assert!(predict(&f, x_wide.view(), None).is_err());
    }

    #[test]
    fn holdout_path_matches_fit_predict_per_lambda() {
        let (x, y) = random_problem(24, 6, 121);
        let (xt, _) = random_problem(5, 6, 122);
        for alpha in [0.0, 1.0] {
            let grid = lambda_grid(x.view(), y.view(), None, alpha, 12, 1e-2).unwrap();
            let preds = holdout_path_predictions(x.view(), y.view(), None, xt.view(), None, alpha, &grid).unwrap();
            for (l, &lam) in grid.iter().enumerate() {
                let f = fit(x.view(), y.view(), None, &PenaltyConfig::new(alpha, lam).unwrap()).unwrap();
                let direct = predict(&f, xt.view(), None).unwrap();
                for i in 0..5 {
                    assert!(
                        (preds[[l, i]] - direct[i]).abs() < 1e-7,
                        "alpha={alpha} lambda index {l} row {i}: {} vs {}",
                        preds[[l, i]],
                        direct[i]
                    );
                }
            }
        }
    }
}

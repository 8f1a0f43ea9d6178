//! Synthetic two-source datasets: hub-structured covariances, SVD latent
//! factor sharing, and scenario-specific coefficient patterns in eigenspace.
//!
//! Generation steps for a scenario: draw latent factors, build per-source hub
//! correlation matrices, draw Gaussian source matrices, take their thin SVDs,
//! replace designated left-singular columns of both sources with common
//! latent columns (inducing between-source correlation), reconstruct, and
//! simulate the outcome through eigenspace coefficients mapped back to the
//! predictor space.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::seed::{self, Domain};

/// Default outcome noise standard deviation for the scenario presets,
/// calibrated so desk-scale ridge runs reproduce the reference Monte Carlo
/// operating points (see the project README for the calibration notes).
pub const NOISE_SD_DEFAULT: f64 = 0.028284271247461905; // sqrt(8e-4)

/// Default weight of the hub-product component in off-hub correlations.
pub const PRODUCT_WEIGHT_DEFAULT: f64 = 0.45;

/// Block-structured hub correlation: features split into equal groups, the
/// first feature of each group is the hub, and correlation to the hub decays
/// linearly from `rho_hub` to `rho_min` across the group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubSpec {
    pub dim: usize,
    pub n_groups: usize,
    pub rho_hub: f64,
    pub rho_min: f64,
    /// Off-hub pairs mix the induced product correlation rho_i*rho_j (weight
    /// `product_weight`) with a lag-decay term rho(|i-j|) (complement weight).
    pub product_weight: f64,
}

impl HubSpec {
    pub fn new(dim: usize, n_groups: usize) -> Self {
        Self {
            dim,
            n_groups,
            rho_hub: 0.9,
            rho_min: 0.1,
            product_weight: PRODUCT_WEIGHT_DEFAULT,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.n_groups == 0 || self.dim % self.n_groups != 0 {
            return Err(Error::Input(format!(
                "hub dimension {} must divide into {} equal groups",
                self.dim, self.n_groups
            )));
        }
        if !(0.0 < self.rho_hub && self.rho_hub < 1.0) {
            return Err(Error::Input(format!("rho_hub must lie in (0,1), got {}", self.rho_hub)));
        }
        if !(0.0 <= self.rho_min && self.rho_min <= self.rho_hub) {
            return Err(Error::Input(format!(
                "rho_min must lie in [0, rho_hub], got {}",
                self.rho_min
            )));
        }
        if !(0.0..=1.0).contains(&self.product_weight) {
            return Err(Error::Input("product_weight must lie in [0,1]".into()));
        }
        Ok(())
    }
}

/// A hub correlation matrix plus a flag recording whether the
/// positive-definiteness repair had to fire.
#[derive(Debug, Clone)]
pub struct HubCovariance {
    pub matrix: Array2<f64>,
    pub repaired: bool,
}

/// Builds the block-diagonal hub correlation matrix. Singleton groups give
/// the identity. If the assembled matrix fails a Cholesky test it is repaired
/// by flooring eigenvalues and rescaling to unit diagonal.
pub fn hub_covariance(spec: &HubSpec) -> Result<HubCovariance> {
    spec.validate()?;
    let g = spec.dim / spec.n_groups;
    // decay profile: d[0] = 1 (hub itself), d[k] linear from rho_hub to rho_min
    let mut decay = vec![1.0; g];
    if g > 1 {
        for k in 1..g {
            let t = if g == 2 { 0.0 } else { (k - 1) as f64 / (g - 2) as f64 };
            decay[k] = spec.rho_hub + t * (spec.rho_min - spec.rho_hub);
        }
    }
    let w = spec.product_weight;
    let mut sigma = Array2::<f64>::zeros((spec.dim, spec.dim));
    for b in 0..spec.n_groups {
        let lo = b * g;
        for i in 0..g {
            for j in 0..g {
                let v = if i == j {
                    1.0
                } else {
                    w * decay[i] * decay[j] + (1.0 - w) * decay[(i as isize - j as isize).unsigned_abs()]
                };
                sigma[[lo + i, lo + j]] = v;
            }
        }
    }
    if linalg::cholesky(&sigma).is_ok() {
        return Ok(HubCovariance {
            matrix: sigma,
            repaired: false,
        });
    }
    // repair: floor eigenvalues, reconstruct, rescale to unit diagonal
    let (vals, vecs) = linalg::sym_eigen(&sigma)?;
    let max_eig = vals.iter().cloned().fold(f64::MIN, f64::max);
    let floor = 1e-8 * max_eig.max(1.0);
    let floored = vals.mapv(|v| v.max(floor));
    let mut repaired = vecs.dot(&Array2::from_diag(&floored)).dot(&vecs.t());
    let diag: Vec<f64> = (0..spec.dim).map(|i| repaired[[i, i]].sqrt()).collect();
    for i in 0..spec.dim {
        for j in 0..spec.dim {
            repaired[[i, j]] /= diag[i] * diag[j];
        }
    }
    if linalg::cholesky(&repaired).is_err() {
        return Err(Error::Numerical(
            "hub covariance is not positive definite even after eigenvalue flooring".into(),
        ));
    }
    Ok(HubCovariance {
        matrix: repaired,
        repaired: true,
    })
}

/// Draws n i.i.d. rows from N(0, sigma) via the Cholesky factor.
pub fn draw_gaussian(n: usize, sigma: &Array2<f64>, seed_val: u64) -> Result<Array2<f64>> {
    let chol = linalg::cholesky(sigma)?;
    Ok(draw_gaussian_with_factor(n, &chol, seed_val))
}

/// Same draw given a precomputed lower Cholesky factor.
pub(crate) fn draw_gaussian_with_factor(n: usize, chol_lower: &Array2<f64>, seed_val: u64) -> Array2<f64> {
    let dim = chol_lower.nrows();
    let mut rng = seed::rng(seed_val);
    let z = Array2::from_shape_fn((n, dim), |_| rng.sample::<f64, _>(StandardNormal));
    z.dot(&chol_lower.t())
}

/// Thin SVD re-export with the crate's error type; `d` is non-increasing.
pub fn thin_svd(x: ArrayView2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    linalg::thin_svd(x)
}

/// Replaces the designated (1-based) columns of both left-singular matrices
/// with shared latent columns, normalized to unit Euclidean norm so the
/// eigen-scale of the replaced directions is preserved. Pair k uses latent
/// column k.
pub fn inject_common_factors(
    u1: &Array2<f64>,
    u2: &Array2<f64>,
    pairs: &[(usize, usize)],
    latents: ArrayView2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let mut out1 = u1.clone();
    let mut out2 = u2.clone();
    if latents.nrows() != u1.nrows() || latents.nrows() != u2.nrows() {
        return Err(Error::Input(
            "latent factor rows must match the observation count of U1/U2".into(),
        ));
    }
    for (k, &(c1, c2)) in pairs.iter().enumerate() {
        if c1 == 0 || c1 > u1.ncols() || c2 == 0 || c2 > u2.ncols() {
            return Err(Error::Input(format!(
                "shared column pair ({c1}, {c2}) out of range for U1 ({} cols) / U2 ({} cols)",
                u1.ncols(),
                u2.ncols()
            )));
        }
        if k >= latents.ncols() {
            return Err(Error::Input(format!(
                "pair {k} has no latent column (L has {} columns)",
                latents.ncols()
            )));
        }
        let col = latents.column(k);
        let norm = col.dot(&col).sqrt();
        if norm == 0.0 {
            return Err(Error::Input(format!("latent column {k} has zero norm")));
        }
        for i in 0..u1.nrows() {
            let v = col[i] / norm;
            out1[[i, c1 - 1]] = v;
            out2[[i, c2 - 1]] = v;
        }
    }
    Ok((out1, out2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioName {
    #[serde(rename = "1a")]
    S1a,
    #[serde(rename = "1b")]
    S1b,
    #[serde(rename = "1c")]
    S1c,
    #[serde(rename = "1d")]
    S1d,
    #[serde(rename = "2a")]
    S2a,
    #[serde(rename = "2b")]
    S2b,
    #[serde(rename = "2c")]
    S2c,
}

impl ScenarioName {
    pub fn all() -> [ScenarioName; 7] {
        use ScenarioName::*;
        [S1a, S1b, S1c, S1d, S2a, S2b, S2c]
    }

    pub fn as_str(&self) -> &'static str {
        use ScenarioName::*;
        match self {
            S1a => "1a",
            S1b => "1b",
            S1c => "1c",
            S1d => "1d",
            S2a => "2a",
            S2b => "2b",
            S2c => "2c",
        }
    }

    /// Null scenarios carry no secondary-block association with the outcome.
    pub fn is_null(&self) -> bool {
        use ScenarioName::*;
        matches!(self, S1a | S1b | S1c | S1d)
    }
}

impl std::str::FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use ScenarioName::*;
        Ok(match s {
            "1a" => S1a,
            "1b" => S1b,
            "1c" => S1c,
            "1d" => S1d,
            "2a" => S2a,
            "2b" => S2b,
            "2c" => S2c,
            other => return Err(Error::Input(format!("unknown scenario '{other}'"))),
        })
    }
}

impl std::fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full description of one simulated data-generating mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// Sparse eigenspace coefficients of the primary source: (1-based index, value).
    pub beta1_star: Vec<(usize, f64)>,
    pub beta2_star: Vec<(usize, f64)>,
    /// (column in U1, column in U2) pairs replaced by common latent factors.
    pub shared_columns: Vec<(usize, usize)>,
    pub noise_sd: f64,
    pub hub1: HubSpec,
    pub hub2: HubSpec,
}

impl ScenarioSpec {
    /// The scenario table: coefficient patterns, shared columns, and the
    /// calibrated preset noise. The primary source uses 4 hub groups, the
    /// secondary 2.
    pub fn preset(name: ScenarioName, n: usize, p: usize, q: usize) -> Self {
        use ScenarioName::*;
        let (beta1_star, beta2_star, shared_columns): (Vec<(usize, f64)>, Vec<(usize, f64)>, Vec<(usize, usize)>) =
            match name {
                S1a => (vec![(1, 0.01)], vec![], vec![(1, 1)]),
                S1b => (vec![(6, 1.0)], vec![], vec![(1, 1)]),
                S1c => (vec![(1, 1.0), (2, 1.0)], vec![], vec![(1, 1)]),
                S1d => (vec![(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)], vec![], vec![(1, 1)]),
                S2a => (vec![(1, 0.01)], vec![(1, 0.01)], vec![(2, 2)]),
                S2b => (vec![(1, 0.01)], vec![(3, 0.01)], vec![(1, 1)]),
                S2c => (vec![(6, 0.01)], vec![(3, 0.01)], vec![(1, 1)]),
            };
        Self {
            name,
            n,
            p,
            q,
            beta1_star,
            beta2_star,
            shared_columns,
            noise_sd: NOISE_SD_DEFAULT,
            hub1: HubSpec::new(p, 4),
            hub2: HubSpec::new(q, 2),
        }
    }

    pub fn default_dims(name: ScenarioName) -> Self {
        Self::preset(name, 100, 1000, 100)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::Input(format!("scenario needs n >= 4, got {}", self.n)));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::Input("noise_sd must be positive".into()));
        }
        if self.hub1.dim != self.p || self.hub2.dim != self.q {
            return Err(Error::Input("hub dimensions must match p and q".into()));
        }
        let r = self.n.min(self.p).min(self.q);
        for &(idx, _) in self.beta1_star.iter().chain(self.beta2_star.iter()) {
            if idx == 0 || idx > r {
                return Err(Error::Input(format!(
                    "eigen index {idx} out of range (rank bound {r})"
                )));
            }
        }
        Ok(())
    }

    /// Number of latent factors drawn: the largest shared column index plus
    /// the count of active eigenspace coefficients.
    fn n_latents(&self) -> usize {
        let max_shared = self
            .shared_columns
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .max()
            .unwrap_or(0);
        let active = self.beta1_star.len() + self.beta2_star.len();
        (max_shared + active).max(1)
    }
}

/// Realized generation internals kept for debugging and oracle tests.
#[derive(Debug, Clone)]
pub struct SimTruth {
    pub spec: ScenarioSpec,
    /// Predictor-space coefficients V1 * beta1_star.
    pub beta1: Array1<f64>,
    pub beta2: Array1<f64>,
    pub noise: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub x1: Array2<f64>,
    pub x2: Array2<f64>,
    pub y: Array1<f64>,
    pub truth: SimTruth,
}

/// Draws datasets for one scenario; the hub Cholesky factors are computed
/// once and shared across trials.
pub struct ScenarioSampler {
    spec: ScenarioSpec,
    chol1: Array2<f64>,
    chol2: Array2<f64>,
    pub sigma1_repaired: bool,
    pub sigma2_repaired: bool,
}

impl ScenarioSampler {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let hub1 = hub_covariance(&spec.hub1)?;
        let hub2 = hub_covariance(&spec.hub2)?;
        Ok(Self {
            chol1: linalg::cholesky(&hub1.matrix)?,
            chol2: linalg::cholesky(&hub2.matrix)?,
            sigma1_repaired: hub1.repaired,
            sigma2_repaired: hub2.repaired,
            spec,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn draw(&self, seed_val: u64) -> Result<SimulatedDataset> {
        let spec = &self.spec;
        let n = spec.n;
        let x1_star = draw_gaussian_with_factor(n, &self.chol1, seed::derive(seed_val, Domain::SimX1, 0));
        let x2_star = draw_gaussian_with_factor(n, &self.chol2, seed::derive(seed_val, Domain::SimX2, 0));
        let (u1, d1, v1) = thin_svd(x1_star.view())?;
        let (u2, d2, v2) = thin_svd(x2_star.view())?;

        let mut latent_rng = seed::rng(seed::derive(seed_val, Domain::SimLatent, 0));
        let latents = Array2::from_shape_fn((n, spec.n_latents()), |_| {
            latent_rng.sample::<f64, _>(StandardNormal)
        });
        let (u1, u2) = inject_common_factors(&u1, &u2, &spec.shared_columns, latents.view())?;

        let x1 = u1.dot(&Array2::from_diag(&d1)).dot(&v1.t());
        let x2 = u2.dot(&Array2::from_diag(&d2)).dot(&v2.t());

        let mut b1_star = Array1::<f64>::zeros(d1.len());
        for &(idx, v) in &spec.beta1_star {
            b1_star[idx - 1] = v;
        }
        let mut b2_star = Array1::<f64>::zeros(d2.len());
        for &(idx, v) in &spec.beta2_star {
            b2_star[idx - 1] = v;
        }
        let beta1 = v1.dot(&b1_star);
        let beta2 = v2.dot(&b2_star);

        let mut noise_rng = seed::rng(seed::derive(seed_val, Domain::SimNoise, 0));
        let noise = Array1::from_shape_fn(n, |_| spec.noise_sd * noise_rng.sample::<f64, _>(StandardNormal));
        let y = &x1.dot(&beta1) + &x2.dot(&beta2) + &noise;

        Ok(SimulatedDataset {
            x1,
            x2,
            y,
            truth: SimTruth {
                spec: spec.clone(),
                beta1,
                beta2,
                noise,
            },
        })
    }
}

/// One-shot convenience over `ScenarioSampler`.
pub fn build_scenario(spec: &ScenarioSpec, seed_val: u64) -> Result<SimulatedDataset> {
    ScenarioSampler::new(spec.clone())?.draw(seed_val)
}

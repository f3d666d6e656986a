//! The Cp criterion, its per-case decomposition, and a Monte Carlo validator
//! for the covariance plug-in.
//!
//! Residual variance always comes from the full m-predictor model:
//! sigma_hat_sq = ||(I - P)Y||^2 / (n - m - 1). Per-case records use the
//! plug-in u_i for the covariance term; simulation estimates are reported
//! separately and never substituted.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::lars::{lars_path, LarsStep, Mode};
use crate::numerics::{PivotedQr, RANK_RTOL};

/// Identifier for the simulation noise stream, recorded in reports.
pub const NOISE_RNG_ID: &str = "chacha8+ziggurat(seed+replicate)";

/// Full-model projection quantities: y_hat = PY, leverages, residual variance.
#[derive(Debug, Clone)]
pub struct FullModelInfo {
    pub y_hat: Array1<f64>,
    pub hat_diagonals: Array1<f64>,
    pub sigma_hat_sq: f64,
    pub m: usize,
    pub n: usize,
}

/// Project the response onto (intercept, all predictors) and estimate the
/// residual variance.
pub fn full_model_info(dataset: &Dataset) -> Result<FullModelInfo> {
    let n = dataset.n();
    let m = dataset.m();
    if n < m + 2 {
        return Err(Error::InsufficientDof(format!(
            "n - m - 1 = {} with n = {n}, m = {m}",
            n as i64 - m as i64 - 1
        )));
    }
    let mut design = Array2::ones((n, m + 1));
    design.slice_mut(ndarray::s![.., 1..]).assign(&dataset.x);
    let qr = PivotedQr::new(&crate::numerics::unit_scaled_columns(&design));
    if qr.rank() < m + 1 {
        return Err(Error::RankDeficient {
            what: format!(
                "(intercept, predictors) design, numerical rank {}",
                qr.rank()
            ),
            tolerance: RANK_RTOL,
        });
    }
    let y_hat = qr.project(&dataset.y);
    let hat_diagonals = qr.projection_diagonals();
    let rss: f64 = dataset
        .y
        .iter()
        .zip(y_hat.iter())
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    let sigma_hat_sq = rss / (n - m - 1) as f64;
    Ok(FullModelInfo {
        y_hat,
        hat_diagonals,
        sigma_hat_sq,
        m,
        n,
    })
}

impl FullModelInfo {
    /// True when the residual variance is zero up to projection round-off
    /// (response effectively inside the column space), making Cp undefined.
    fn variance_is_degenerate(&self) -> bool {
        let scale: f64 = self.y_hat.iter().map(|v| v * v).sum::<f64>() / self.n as f64;
        self.sigma_hat_sq <= 1e-24 * scale.max(f64::MIN_POSITIVE)
    }
}

/// Cp of a fit that lies in the full model's column space.
///
/// ||Y - mu||^2 splits into ||Y - y_hat||^2 + ||y_hat - mu||^2, and the first
/// piece is sigma_hat_sq * (n - m - 1) by construction, so Y itself is not
/// needed.
pub fn cp_total(mu_hat: &Array1<f64>, df_surrogate: f64, info: &FullModelInfo) -> Result<f64> {
    if mu_hat.len() != info.n {
        return Err(Error::Dimension(format!(
            "mu_hat has {} entries, model has n = {}",
            mu_hat.len(),
            info.n
        )));
    }
    if info.variance_is_degenerate() {
        return Err(Error::InsufficientDof(
            "sigma_hat_sq is zero; Cp undefined (response lies in the column space)".into(),
        ));
    }
    let gap: f64 = info
        .y_hat
        .iter()
        .zip(mu_hat.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let n = info.n as f64;
    let m = info.m as f64;
    Ok((n - m - 1.0) + gap / info.sigma_hat_sq - n + 2.0 * df_surrogate)
}

/// One case's share of Cp: fit term + covariance plug-in - leverage deficit.
#[derive(Debug, Clone)]
pub struct CaseCpRecord {
    pub case_index: usize,
    /// (y_hat_i - mu_i)^2 / sigma_hat_sq
    pub fit_term: f64,
    /// u_i, the subset leverage standing in for cov(mu_i, y_i)/sigma^2
    pub cov_term: f64,
    /// h_i - u_i
    pub leverage_deficit: f64,
    pub c_pi: f64,
}

/// Decompose a step's Cp into per-case terms.
pub fn case_cp(step: &LarsStep, info: &FullModelInfo) -> Result<Vec<CaseCpRecord>> {
    if step.mu_hat.len() != info.n || step.subset_leverage.len() != info.n {
        return Err(Error::Dimension(format!(
            "step has {} cases, model has {}",
            step.mu_hat.len(),
            info.n
        )));
    }
    if info.variance_is_degenerate() {
        return Err(Error::InsufficientDof("sigma_hat_sq is zero".into()));
    }
    let mut records = Vec::with_capacity(info.n);
    for i in 0..info.n {
        let fit_term = (info.y_hat[i] - step.mu_hat[i]).powi(2) / info.sigma_hat_sq;
        let cov_term = step.subset_leverage[i];
        let leverage_deficit = info.hat_diagonals[i] - step.subset_leverage[i];
        records.push(CaseCpRecord {
            case_index: i,
            fit_term,
            cov_term,
            leverage_deficit,
            c_pi: fit_term + cov_term - leverage_deficit,
        });
    }
    Ok(records)
}

/// Mean vector for the simulation replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovGenerator {
    /// Use the observed response itself as the fixed truth.
    FixedBeta,
    /// Use the full-model least-squares fit of the observed response.
    FittedBeta,
}

impl CovGenerator {
    pub fn as_str(self) -> &'static str {
        match self {
            CovGenerator::FixedBeta => "fixed-beta",
            CovGenerator::FittedBeta => "fitted-beta",
        }
    }
}

/// Per-case Monte Carlo estimates of cov(mu_i, y_i)/sigma^2 at a path step.
#[derive(Debug, Clone)]
pub struct CovSimulation {
    pub estimates: Array1<f64>,
    /// Monte Carlo standard error of each estimate.
    pub std_errors: Array1<f64>,
    /// Replicates whose path ended before `step_count` (excluded, <= 5%).
    pub excluded: usize,
    pub replicates_used: usize,
    pub step_count: usize,
    pub noise_sd: f64,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub generator: CovGenerator,
    /// Subset leverages u_i of the observed data's path at `step_count`,
    /// the values the plug-in approximation would use.
    pub reference_leverage: Array1<f64>,
}

/// Hold X fixed, redraw Y* = mean + sd * eps, rerun the path to `step_count`,
/// and estimate cov(mu_i*, y_i*)/sigma^2 across replicates.
pub fn simulate_cov(
    dataset: &Dataset,
    generator: CovGenerator,
    noise_sd: f64,
    step_count: usize,
    replicates: usize,
    seed: u64,
) -> Result<CovSimulation> {
    if replicates < 100 {
        return Err(Error::BadConfig(format!(
            "replicates must be >= 100, got {replicates}"
        )));
    }
    if !(noise_sd.is_finite() && noise_sd > 0.0) {
        return Err(Error::BadConfig(format!(
            "noise_sd must be positive, got {noise_sd}"
        )));
    }
    if step_count == 0 {
        return Err(Error::BadConfig("step_count must be >= 1".into()));
    }
    let n = dataset.n();
    let info = full_model_info(dataset)?;
    let mean = match generator {
        CovGenerator::FixedBeta => dataset.y.clone(),
        CovGenerator::FittedBeta => info.y_hat.clone(),
    };
    let base_path = lars_path(dataset, Mode::Plain, Some(step_count))?;
    if base_path.steps.len() <= step_count {
        return Err(Error::BadConfig(format!(
            "observed path has only {} steps, step_count = {step_count}",
            base_path.steps.len() - 1
        )));
    }
    let reference_leverage = base_path.steps[step_count].subset_leverage.clone();

    let mut mu_rows: Vec<Array1<f64>> = Vec::with_capacity(replicates);
    let mut y_rows: Vec<Array1<f64>> = Vec::with_capacity(replicates);
    let mut excluded = 0usize;
    for b in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64));
        let y_star = Array1::from_shape_fn(n, |i| {
            mean[i] + noise_sd * rng.sample::<f64, _>(StandardNormal)
        });
        let replicate = Dataset::new(
            dataset.predictor_names.clone(),
            dataset.x.clone(),
            y_star.clone(),
            "simulate_cov replicate",
        )?;
        let path = lars_path(&replicate, Mode::Plain, Some(step_count))?;
        if path.steps.len() <= step_count {
            excluded += 1;
            continue;
        }
        mu_rows.push(path.steps[step_count].mu_hat.clone());
        y_rows.push(y_star);
    }
    if (excluded as f64) > 0.05 * replicates as f64 {
        return Err(Error::TooManyExcluded {
            excluded,
            replicates,
        });
    }
    let used = mu_rows.len();
    let sigma_sq = noise_sd * noise_sd;
    let mut mu_mean = Array1::<f64>::zeros(n);
    let mut y_mean = Array1::<f64>::zeros(n);
    for b in 0..used {
        mu_mean = &mu_mean + &mu_rows[b];
        y_mean = &y_mean + &y_rows[b];
    }
    mu_mean.mapv_inplace(|v| v / used as f64);
    y_mean.mapv_inplace(|v| v / used as f64);

    let mut estimates = Array1::<f64>::zeros(n);
    let mut std_errors = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for b in 0..used {
            let d = (mu_rows[b][i] - mu_mean[i]) * (y_rows[b][i] - y_mean[i]);
            sum += d;
            sum_sq += d * d;
        }
        let mean_d = sum / used as f64;
        estimates[i] = sum / (used as f64 - 1.0) / sigma_sq;
        let var_d = (sum_sq - used as f64 * mean_d * mean_d) / (used as f64 - 1.0);
        std_errors[i] = (var_d / used as f64).sqrt() / sigma_sq;
    }
    Ok(CovSimulation {
        estimates,
        std_errors,
        excluded,
        replicates_used: used,
        step_count,
        noise_sd,
        seed,
        rng_algorithm: NOISE_RNG_ID,
        generator,
        reference_leverage,
    })
}

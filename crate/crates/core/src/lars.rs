//! The least angle regression path, plain and lasso-modified.
//!
//! Predictors are centered and scaled to unit Euclidean norm internally; the
//! intercept is handled by centering and is never a path variable. Each
//! recorded step carries the quantities the per-case Cp diagnostics need:
//! the subset projection diagonals u_i, their sum as the degrees-of-freedom
//! surrogate, and the step's Cp.

use ndarray::{Array1, Array2};

use crate::diagnostics::{cp_total, full_model_info, FullModelInfo};
use crate::error::{Error, Result};
use crate::ingest::{standardize, Dataset, ScalingRule, StandardizedView};
use crate::numerics::projection_diagonals;

/// Gram pivot tolerance: a candidate whose admission drops the active Gram's
/// Cholesky pivot below this is treated as collinear and skipped.
const GRAM_TOL: f64 = 1e-10;

/// Relative tie tolerance for joining the active set.
const TIE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Lasso,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Lasso => "lasso",
        }
    }
}

/// One recorded state of the path. Step 0 is the intercept-only state; each
/// later step records the state after one equiangular move.
#[derive(Debug, Clone)]
pub struct LarsStep {
    pub step_index: usize,
    pub entered: Option<String>,
    pub dropped: Option<String>,
    /// Active predictors in entry order.
    pub active_set: Vec<String>,
    /// Coefficients on the unit-norm standardized scale; inactive entries are
    /// exactly zero.
    pub coefficients_std: Array1<f64>,
    /// Coefficients on the original predictor scale.
    pub coefficients_orig: Array1<f64>,
    pub intercept: f64,
    /// Fitted values in response units.
    pub mu_hat: Array1<f64>,
    /// Max absolute correlation of any predictor with the current residual.
    pub max_abs_corr: f64,
    /// Equiangular advance that produced this state (0 for step 0).
    pub step_length: f64,
    /// Diagonals of the projection onto (intercept, active columns).
    pub subset_leverage: Array1<f64>,
    pub cp: f64,
    /// Sum of subset_leverage, the plug-in degrees of freedom.
    pub df_surrogate: f64,
}

#[derive(Debug, Clone)]
pub struct LarsPath {
    pub steps: Vec<LarsStep>,
    pub mode: Mode,
    /// Predictor names in dataset column order.
    pub predictor_names: Vec<String>,
    pub standardization: StandardizedView,
    pub full_model: FullModelInfo,
    /// Collinearity skips and other recoverable events, deduplicated.
    pub warnings: Vec<String>,
}

impl LarsPath {
    /// Entry order: the predictors in the order they first joined.
    pub fn entry_order(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for step in &self.steps {
            if let Some(name) = &step.entered {
                if !seen.contains(name) {
                    seen.push(name.clone());
                }
            }
        }
        seen
    }
}

/// The Cp-chosen model.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Active set of the chosen step, in entry order.
    pub selected: Vec<String>,
    /// Original-scale coefficients aligned with `selected`.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub criterion_value: f64,
    pub chosen_step: usize,
}

impl SelectionResult {
    pub fn contains(&self, name: &str) -> bool {
        self.selected.iter().any(|s| s == name)
    }
}

/// Map standardized coefficients back to the original scale plus intercept.
pub fn unstandardize(step: &LarsStep, view: &StandardizedView) -> (Array1<f64>, f64) {
    unstandardize_coefficients(&step.coefficients_std, view)
}

pub(crate) fn unstandardize_coefficients(
    beta_std: &Array1<f64>,
    view: &StandardizedView,
) -> (Array1<f64>, f64) {
    let m = beta_std.len();
    let mut orig = Array1::zeros(m);
    let mut intercept = view.response_mean;
    for j in 0..m {
        orig[j] = beta_std[j] / view.column_scales[j];
        intercept -= orig[j] * view.column_means[j];
    }
    (orig, intercept)
}

/// Run the LARS path on a dataset.
///
/// `max_steps` defaults to min(m, n - 2) so that the per-step residual keeps
/// degrees of freedom. In lasso mode a drop step removes one predictor and
/// admits nothing; the dropped predictor may re-enter later.
pub fn lars_path(dataset: &Dataset, mode: Mode, max_steps: Option<usize>) -> Result<LarsPath> {
    let n = dataset.n();
    let m = dataset.m();
    if n < 3 {
        return Err(Error::BadConfig(format!("lars_path needs n >= 3, got {n}")));
    }
    if m == 0 {
        return Err(Error::EmptyInput("no predictors".into()));
    }
    let view = standardize(dataset, ScalingRule::UnitNorm)?;
    let full_model = full_model_info(dataset)?;
    let z = view.apply(dataset);
    let ybar = view.response_mean;
    let yc = &dataset.y - ybar;
    let y_ss: f64 = yc.iter().map(|v| v * v).sum();
    if y_ss <= 0.0 {
        return Err(Error::ConstantColumn("response".into()));
    }
    let max_steps = max_steps.unwrap_or_else(|| m.min(n - 2));

    let mut mu: Array1<f64> = Array1::zeros(n);
    let mut beta: Array1<f64> = Array1::zeros(m);
    let mut active: Vec<usize> = Vec::new();
    let mut excluded = vec![false; m];
    let mut warnings: Vec<String> = Vec::new();
    let mut warned = vec![false; m];
    let mut steps: Vec<LarsStep> = Vec::new();
    let mut admit_allowed = true;

    let c0 = {
        let c = z.t().dot(&yc);
        c.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    };
    let c_floor = 1e-12 * c0.max(1.0);

    record_step(
        &mut steps,
        dataset,
        &z,
        &yc,
        &mu,
        &beta,
        &active,
        &view,
        &full_model,
        None,
        None,
        0.0,
    )?;

    let mut factor = GramFactor::new(m.min(n));
    let mut in_active = vec![false; m];

    while steps.len() <= max_steps {
        let r = &yc - &mu;
        let c = z.t().dot(&r);
        let big_c = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if big_c <= c_floor {
            break;
        }

        if !factor.rebuild(&z, &active) {
            warnings.push("active gram matrix lost rank; path stopped".into());
            break;
        }

        // admission: every inactive predictor tied with the max joins, lowest
        // index first, unless it is collinear with the active block
        let mut entered: Option<String> = None;
        if admit_allowed {
            let tol_tie = TIE_RTOL * big_c;
            for j in 0..m {
                if excluded[j] || in_active[j] || c[j].abs() < big_c - tol_tie {
                    continue;
                }
                match factor.gate(&z, &active, j) {
                    Some((row, pivot)) => {
                        factor.push(&row, pivot);
                        active.push(j);
                        in_active[j] = true;
                        if entered.is_none() {
                            entered = Some(dataset.predictor_names[j].clone());
                        }
                    }
                    None => mark_excluded(
                        &z,
                        &active,
                        j,
                        dataset,
                        &mut excluded,
                        &mut warned,
                        &mut warnings,
                    ),
                }
            }
        }
        admit_allowed = true;
        if active.is_empty() {
            break;
        }

        // refresh exclusions against the post-admission active block
        for j in 0..m {
            if !excluded[j] && !in_active[j] && factor.gate(&z, &active, j).is_none() {
                mark_excluded(
                    &z,
                    &active,
                    j,
                    dataset,
                    &mut excluded,
                    &mut warned,
                    &mut warnings,
                );
            }
        }

        // equiangular direction over the sign-adjusted active columns: with
        // v = G^-1 s the per-unit-gamma coefficient increments are aa * v and
        // the direction is aa * Z_A v
        let signs: Vec<f64> = active
            .iter()
            .map(|&a| if c[a] >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let v = factor.solve(&signs);
        let s_dot_v: f64 = signs.iter().zip(&v).map(|(s, vk)| s * vk).sum();
        if s_dot_v <= 0.0 {
            warnings.push("active gram matrix lost positivity; path stopped".into());
            break;
        }
        let aa = 1.0 / s_dot_v.sqrt();
        let mut u_dir = Array1::<f64>::zeros(n);
        for (idx, &a) in active.iter().enumerate() {
            let scale = aa * v[idx];
            let col = z.column(a);
            for i in 0..n {
                u_dir[i] += scale * col[i];
            }
        }
        let a_vec = z.t().dot(&u_dir);

        // step length: smallest positive tie point among admissible candidates
        let gamma_full = big_c / aa;
        let mut gamma = gamma_full;
        let mut has_candidates = false;
        for j in 0..m {
            if excluded[j] || in_active[j] {
                continue;
            }
            for value in [
                (big_c - c[j]) / (aa - a_vec[j]),
                (big_c + c[j]) / (aa + a_vec[j]),
            ] {
                if value.is_finite() && value > 1e-14 {
                    has_candidates = true;
                    if value < gamma {
                        gamma = value;
                    }
                }
            }
        }

        // lasso: truncate at the first coefficient sign crossing
        let mut drop_idx: Option<usize> = None;
        if mode == Mode::Lasso {
            let mut gamma_drop = f64::INFINITY;
            for (idx, &a) in active.iter().enumerate() {
                let delta = aa * v[idx];
                if delta != 0.0 {
                    let crossing = -beta[a] / delta;
                    if crossing > 1e-14 && crossing < gamma_drop {
                        gamma_drop = crossing;
                        drop_idx = Some(idx);
                    }
                }
            }
            if drop_idx.is_some() && gamma_drop < gamma {
                gamma = gamma_drop;
            } else {
                drop_idx = None;
            }
        }

        if !gamma.is_finite() || gamma <= 0.0 {
            warnings.push("non-positive step length; path stopped".into());
            break;
        }

        for (idx, &a) in active.iter().enumerate() {
            beta[a] += gamma * aa * v[idx];
        }
        mu = &mu + &u_dir.mapv(|value| value * gamma);

        let mut dropped = None;
        if let Some(idx) = drop_idx {
            let a = active.remove(idx);
            in_active[a] = false;
            beta[a] = 0.0;
            dropped = Some(dataset.predictor_names[a].clone());
            // an exclusion may become admissible against the smaller block
            excluded.iter_mut().for_each(|e| *e = false);
            admit_allowed = false;
        }

        record_step(
            &mut steps,
            dataset,
            &z,
            &yc,
            &mu,
            &beta,
            &active,
            &view,
            &full_model,
            entered,
            dropped.clone(),
            gamma,
        )?;

        if !has_candidates && dropped.is_none() {
            break; // full advance onto the last admissible set
        }
    }

    Ok(LarsPath {
        steps,
        mode,
        predictor_names: dataset.predictor_names.clone(),
        standardization: view,
        full_model,
        warnings,
    })
}

/// Growing Cholesky factor of the active columns' unsigned Gram. Candidates
/// are gated in O(nk): a forward solve gives the new row, and the Schur
/// pivot tells whether admission keeps the Gram positive definite.
struct GramFactor {
    l: Array2<f64>, // lower triangular in the top-left k x k
    k: usize,
}

impl GramFactor {
    fn new(capacity: usize) -> GramFactor {
        GramFactor {
            l: Array2::zeros((capacity, capacity)),
            k: 0,
        }
    }

    /// Refactor from scratch over `active`; false when rank is lost.
    fn rebuild(&mut self, z: &Array2<f64>, active: &[usize]) -> bool {
        self.k = 0;
        for &a in active {
            match self.gate(z, active, a) {
                Some((row, pivot)) => self.push(&row, pivot),
                None => return false,
            }
        }
        true
    }

    /// Test column `j` against the first `k` entries of `active`. Returns the
    /// candidate's factor row and pivot, or None when the extension is
    /// singular at `GRAM_TOL`.
    fn gate(&self, z: &Array2<f64>, active: &[usize], j: usize) -> Option<(Vec<f64>, f64)> {
        let k = self.k;
        let col_j = z.column(j);
        let mut row = Vec::with_capacity(k);
        for (i, &a) in active.iter().take(k).enumerate() {
            let mut acc = z.column(a).dot(&col_j);
            for t in 0..i {
                acc -= self.l[(i, t)] * row[t];
            }
            row.push(acc / self.l[(i, i)]);
        }
        let diag = col_j.dot(&col_j);
        let pivot_sq = diag - row.iter().map(|w| w * w).sum::<f64>();
        if pivot_sq <= GRAM_TOL * diag.max(f64::MIN_POSITIVE) {
            None
        } else {
            Some((row, pivot_sq.sqrt()))
        }
    }

    fn push(&mut self, row: &[f64], pivot: f64) {
        for (t, value) in row.iter().enumerate() {
            self.l[(self.k, t)] = *value;
        }
        self.l[(self.k, self.k)] = pivot;
        self.k += 1;
    }

    /// Solve (L L') x = b over the current k x k block.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut y = vec![0.0; k];
        for i in 0..k {
            let mut acc = b[i];
            for t in 0..i {
                acc -= self.l[(i, t)] * y[t];
            }
            y[i] = acc / self.l[(i, i)];
        }
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = y[i];
            for t in i + 1..k {
                acc -= self.l[(t, i)] * x[t];
            }
            x[i] = acc / self.l[(i, i)];
        }
        x
    }
}

fn mark_excluded(
    z: &Array2<f64>,
    active: &[usize],
    j: usize,
    dataset: &Dataset,
    excluded: &mut [bool],
    warned: &mut [bool],
    warnings: &mut Vec<String>,
) {
    excluded[j] = true;
    if !warned[j] {
        warned[j] = true;
        let partner = active
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let ca = z.column(a).dot(&z.column(j)).abs();
                let cb = z.column(b).dot(&z.column(j)).abs();
                ca.partial_cmp(&cb).unwrap()
            })
            .unwrap_or(j);
        warnings.push(format!(
            "predictor '{}' skipped: admission would make the active gram singular (collinear with '{}')",
            dataset.predictor_names[j], dataset.predictor_names[partner]
        ));
    }
}

#[allow(clippy::too_many_arguments)]
fn record_step(
    steps: &mut Vec<LarsStep>,
    dataset: &Dataset,
    z: &Array2<f64>,
    yc: &Array1<f64>,
    mu: &Array1<f64>,
    beta: &Array1<f64>,
    active: &[usize],
    view: &StandardizedView,
    full_model: &FullModelInfo,
    entered: Option<String>,
    dropped: Option<String>,
    gamma: f64,
) -> Result<()> {
    let n = dataset.n();
    let r = yc - mu;
    let c = z.t().dot(&r);
    let max_abs_corr = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let mut design = Array2::zeros((n, active.len() + 1));
    design.column_mut(0).fill(1.0);
    for (idx, &a) in active.iter().enumerate() {
        design.column_mut(idx + 1).assign(&z.column(a));
    }
    let subset_leverage = projection_diagonals(&design)?;
    let df_surrogate = subset_leverage.sum();

    let mu_hat = mu + view.response_mean;
    let cp = cp_total(&mu_hat, df_surrogate, full_model)?;
    let (coefficients_orig, intercept) = unstandardize_coefficients(beta, view);

    steps.push(LarsStep {
        step_index: steps.len(),
        entered,
        dropped,
        active_set: active
            .iter()
            .map(|&a| dataset.predictor_names[a].clone())
            .collect(),
        coefficients_std: beta.clone(),
        coefficients_orig,
        intercept,
        mu_hat,
        max_abs_corr,
        step_length: gamma,
        subset_leverage,
        cp,
        df_surrogate,
    });
    Ok(())
}

/// Pick the path step with the smallest Cp; exact ties go to the smaller
/// active set.
pub fn select_by_cp(path: &LarsPath) -> Result<SelectionResult> {
    if path.steps.is_empty() {
        return Err(Error::EmptyInput("path has no steps".into()));
    }
    let mut best = 0usize;
    for (idx, step) in path.steps.iter().enumerate() {
        let better = step.cp < path.steps[best].cp
            || (step.cp == path.steps[best].cp
                && step.active_set.len() < path.steps[best].active_set.len());
        if better {
            best = idx;
        }
    }
    let step = &path.steps[best];
    let mut coefficients = Vec::with_capacity(step.active_set.len());
    for name in &step.active_set {
        let j = path
            .predictor_names
            .iter()
            .position(|n| n == name)
            .expect("active name present in path");
        coefficients.push(step.coefficients_orig[j]);
    }
    Ok(SelectionResult {
        selected: step.active_set.clone(),
        coefficients,
        intercept: step.intercept,
        criterion_value: step.cp,
        chosen_step: best,
    })
}

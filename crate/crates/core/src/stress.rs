//! Selection stress experiments: rounded-copy augmentation, scaling-order
//! audits, and marginal-shift stability under exponential tilting.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{
    expand_terms, orthogonalize_expansion, standardized_dataset, Dataset, ScalingRule, TermKind,
};
use crate::lars::{lars_path, select_by_cp, Mode, SelectionResult};

/// Pairwise selection overlap.
#[derive(Debug, Clone)]
pub struct OverlapRecord {
    pub first: String,
    pub second: String,
    pub intersection: usize,
    pub jaccard: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CompositionCounts {
    pub main: usize,
    pub interaction: usize,
    pub quadratic: usize,
}

/// A selection with the label of the pipeline that produced it.
#[derive(Debug, Clone)]
pub struct LabeledSelection {
    pub label: String,
    pub selection: SelectionResult,
    pub entry_order: Vec<String>,
    pub composition: Option<CompositionCounts>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct StressReport {
    pub baseline: LabeledSelection,
    pub perturbed: Vec<LabeledSelection>,
    pub overlap: Vec<OverlapRecord>,
    pub flags: Vec<String>,
    pub config_echo: Vec<(String, String)>,
    pub notes: Vec<String>,
}

/// Selection frequencies under reweighted resampling of a predictor pair.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub target_pair: (String, String),
    pub target_corr: f64,
    pub observed_corr: f64,
    /// Tilting parameter that steers the weighted correlation to the target.
    pub theta: f64,
    /// Plain correlation of the pair inside each resample.
    pub achieved_correlations: Vec<f64>,
    /// Per predictor: fraction of replicates whose Cp selection includes it.
    pub selection_frequency: Vec<(String, f64)>,
    pub replicates: usize,
    pub seed: u64,
}

fn overlap_record(
    first_label: &str,
    first: &SelectionResult,
    second_label: &str,
    second: &SelectionResult,
) -> OverlapRecord {
    let intersection = first
        .selected
        .iter()
        .filter(|name| second.contains(name))
        .count();
    let union = first.selected.len() + second.selected.len() - intersection;
    let jaccard = if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    };
    OverlapRecord {
        first: first_label.to_string(),
        second: second_label.to_string(),
        intersection,
        jaccard,
    }
}

/// Append round(factor * column) copies of every non-excluded predictor, on
/// the predictor's original scale. Halves round away from zero.
pub fn round_augment(
    dataset: &Dataset,
    factor: f64,
    exclude: &[String],
    prefix: &str,
) -> Result<Dataset> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::BadConfig(format!(
            "factor must be positive and finite, got {factor}"
        )));
    }
    for name in exclude {
        if dataset.column_index(name).is_none() {
            return Err(Error::MissingColumn(name.clone()));
        }
    }
    let mut names = dataset.predictor_names.clone();
    let mut new_cols: Vec<Array1<f64>> = Vec::new();
    for (j, name) in dataset.predictor_names.iter().enumerate() {
        if exclude.iter().any(|e| e == name) {
            continue;
        }
        let rounded_name = format!("{prefix}{name}");
        if names.iter().any(|n| n == &rounded_name) {
            return Err(Error::NameClash(rounded_name));
        }
        names.push(rounded_name);
        new_cols.push(dataset.x.column(j).mapv(|v| (factor * v).round()));
    }
    let m_new = names.len();
    let mut x = Array2::zeros((dataset.n(), m_new));
    x.slice_mut(ndarray::s![.., ..dataset.m()])
        .assign(&dataset.x);
    for (k, col) in new_cols.iter().enumerate() {
        x.column_mut(dataset.m() + k).assign(col);
    }
    Dataset::new(
        names,
        x,
        dataset.y.clone(),
        format!("{} [rounded x{factor}]", dataset.provenance),
    )
}

fn run_selection(dataset: &Dataset, mode: Mode, label: &str) -> Result<LabeledSelection> {
    let path = lars_path(dataset, mode, None)?;
    let selection = select_by_cp(&path)?;
    Ok(LabeledSelection {
        label: label.to_string(),
        entry_order: path.entry_order(),
        warnings: path.warnings.clone(),
        selection,
        composition: None,
    })
}

/// Baseline vs rounded-augmented selection.
pub fn run_round_stress(
    dataset: &Dataset,
    factor: f64,
    exclude: &[String],
    mode: Mode,
) -> Result<StressReport> {
    let baseline = run_selection(dataset, mode, "baseline")?;
    let augmented_data = round_augment(dataset, factor, exclude, "r")?;
    let augmented = run_selection(&augmented_data, mode, "rounded-augmented")?;

    let rounded_names: Vec<&String> = augmented_data
        .predictor_names
        .iter()
        .skip(dataset.m())
        .collect();
    let mut flags = Vec::new();
    for name in &augmented.selection.selected {
        if rounded_names.contains(&name) {
            flags.push(format!("rounded variable selected: {name}"));
        }
    }
    for name in &dataset.predictor_names {
        let rounded = format!("r{name}");
        if augmented.selection.contains(name) && augmented.selection.contains(&rounded) {
            flags.push(format!(
                "original and rounded version co-selected: {name} and {rounded}"
            ));
        }
    }
    let overlap = vec![overlap_record(
        "baseline",
        &baseline.selection,
        "rounded-augmented",
        &augmented.selection,
    )];
    let config_echo = vec![
        ("factor".to_string(), format!("{factor}")),
        ("exclude".to_string(), exclude.join(",")),
        ("prefix".to_string(), "r".to_string()),
        ("mode".to_string(), mode.as_str().to_string()),
    ];
    Ok(StressReport {
        baseline,
        perturbed: vec![augmented],
        overlap,
        flags,
        config_echo,
        notes: Vec::new(),
    })
}

fn composition(
    selection: &SelectionResult,
    names: &[String],
    kinds: &[TermKind],
) -> CompositionCounts {
    let mut counts = CompositionCounts::default();
    for name in &selection.selected {
        if let Some(idx) = names.iter().position(|n| n == name) {
            match kinds[idx] {
                TermKind::Main => counts.main += 1,
                TermKind::Interaction => counts.interaction += 1,
                TermKind::Quadratic => counts.quadratic += 1,
            }
        }
    }
    counts
}

/// Three expansion pipelines that differ only in when rescaling happens:
/// (A) standardize, then expand; (B) expand raw, then standardize; (C) expand
/// raw, orthogonalize the non-main terms against the mains, then standardize.
pub fn scale_order_audit(
    dataset: &Dataset,
    quadratic_exclusions: &[String],
    mode: Mode,
) -> Result<StressReport> {
    // A: rescale first
    let standardized = standardized_dataset(dataset, ScalingRule::UnitSd)?;
    let (expanded_a, expansion_a) = expand_terms(&standardized, true, true, quadratic_exclusions)?;
    let mut pipeline_a = run_selection(&expanded_a, mode, "scale-then-expand")?;
    pipeline_a.composition = Some(composition(
        &pipeline_a.selection,
        &expanded_a.predictor_names,
        &expansion_a.term_kinds,
    ));

    // B: expand raw, rescale afterwards
    let (expanded_raw, expansion_b) = expand_terms(dataset, true, true, quadratic_exclusions)?;
    let restandardized = standardized_dataset(&expanded_raw, ScalingRule::UnitSd)?;
    let mut pipeline_b = run_selection(&restandardized, mode, "expand-then-scale")?;
    pipeline_b.composition = Some(composition(
        &pipeline_b.selection,
        &restandardized.predictor_names,
        &expansion_b.term_kinds,
    ));

    // C: expand raw, orthogonalize the expansion terms, rescale
    let orthogonalized = orthogonalize_expansion(&expanded_raw, &expansion_b)?;
    let ortho_standardized = standardized_dataset(&orthogonalized, ScalingRule::UnitSd)?;
    let mut pipeline_c = run_selection(&ortho_standardized, mode, "expand-orthogonalize-scale")?;
    pipeline_c.composition = Some(composition(
        &pipeline_c.selection,
        &ortho_standardized.predictor_names,
        &expansion_b.term_kinds,
    ));

    let overlap = vec![
        overlap_record(
            "scale-then-expand",
            &pipeline_a.selection,
            "expand-then-scale",
            &pipeline_b.selection,
        ),
        overlap_record(
            "scale-then-expand",
            &pipeline_a.selection,
            "expand-orthogonalize-scale",
            &pipeline_c.selection,
        ),
        overlap_record(
            "expand-then-scale",
            &pipeline_b.selection,
            "expand-orthogonalize-scale",
            &pipeline_c.selection,
        ),
    ];
    let mut flags = Vec::new();
    for record in &overlap {
        if record.jaccard < 1.0 {
            flags.push(format!(
                "{} and {} select different sets",
                record.first, record.second
            ));
        }
    }
    let m = dataset.m();
    let interactions = m * (m - 1) / 2;
    let quadratics = m - quadratic_exclusions.len();
    let notes = vec![format!(
        "expansion yields {} columns ({m} mains + {interactions} interactions + {quadratics} quadratics); \
         quadratics excluded for: {}; a full quadratic in all {m} predictors would add one more column",
        expanded_a.m(),
        if quadratic_exclusions.is_empty() { "none".to_string() } else { quadratic_exclusions.join(",") },
    )];
    let config_echo = vec![
        (
            "quadratic_exclusions".to_string(),
            quadratic_exclusions.join(","),
        ),
        ("mode".to_string(), mode.as_str().to_string()),
        ("scaling_rule".to_string(), "unit-sd".to_string()),
    ];
    Ok(StressReport {
        baseline: pipeline_a,
        perturbed: vec![pipeline_b, pipeline_c],
        overlap,
        flags,
        config_echo,
        notes,
    })
}

/// Weighted correlation of two columns under weights proportional to
/// exp(theta * z_j * z_k).
fn tilted_correlation(
    col_j: &Array1<f64>,
    col_k: &Array1<f64>,
    product: &Array1<f64>,
    theta: f64,
) -> f64 {
    let n = col_j.len();
    let max_exponent = product
        .iter()
        .map(|p| theta * p)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights = Array1::zeros(n);
    let mut total = 0.0;
    for i in 0..n {
        let w = (theta * product[i] - max_exponent).exp();
        weights[i] = w;
        total += w;
    }
    weights.mapv_inplace(|w| w / total);
    let mean_j: f64 = (0..n).map(|i| weights[i] * col_j[i]).sum();
    let mean_k: f64 = (0..n).map(|i| weights[i] * col_k[i]).sum();
    let mut cov = 0.0;
    let mut var_j = 0.0;
    let mut var_k = 0.0;
    for i in 0..n {
        let dj = col_j[i] - mean_j;
        let dk = col_k[i] - mean_k;
        cov += weights[i] * dj * dk;
        var_j += weights[i] * dj * dj;
        var_k += weights[i] * dk * dk;
    }
    cov / (var_j.sqrt() * var_k.sqrt())
}

fn tilt_weights(product: &Array1<f64>, theta: f64) -> Array1<f64> {
    let max_exponent = product
        .iter()
        .map(|p| theta * p)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights = product.mapv(|p| (theta * p - max_exponent).exp());
    let total = weights.sum();
    weights.mapv_inplace(|w| w / total);
    weights
}

const THETA_RANGE: (f64, f64) = (-20.0, 20.0);
const CORR_TOLERANCE: f64 = 0.02;

/// Reweighted bootstrap: steer the sample correlation of one predictor pair
/// to `target_corr` by exponential tilting, resample under those weights, and
/// record how the Cp selection shifts.
pub fn marginal_shift_stress(
    dataset: &Dataset,
    pair: (&str, &str),
    target_corr: f64,
    replicates: usize,
    seed: u64,
    mode: Mode,
) -> Result<StabilityReport> {
    if pair.0 == pair.1 {
        return Err(Error::BadConfig(
            "pair must name two distinct predictors".into(),
        ));
    }
    if !(target_corr > -1.0 && target_corr < 1.0) {
        return Err(Error::BadConfig(format!(
            "target_corr must be in (-1, 1), got {target_corr}"
        )));
    }
    if replicates < 1 {
        return Err(Error::BadConfig("replicates must be >= 1".into()));
    }
    let j = dataset
        .column_index(pair.0)
        .ok_or_else(|| Error::MissingColumn(pair.0.into()))?;
    let k = dataset
        .column_index(pair.1)
        .ok_or_else(|| Error::MissingColumn(pair.1.into()))?;

    let col_j = dataset.x.column(j).to_owned();
    let col_k = dataset.x.column(k).to_owned();
    let standardize_col = |col: &Array1<f64>| -> Result<Array1<f64>> {
        let mean = col.mean().unwrap();
        let n = col.len() as f64;
        let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        if var <= 0.0 {
            return Err(Error::ConstantColumn("tilting pair".into()));
        }
        Ok(col.mapv(|v| (v - mean) / var.sqrt()))
    };
    let z_j = standardize_col(&col_j)?;
    let z_k = standardize_col(&col_k)?;
    let product = &z_j * &z_k;

    // The weighted correlation need not be monotone in theta, so hunt for the
    // sign-change bracket nearest zero and bisect inside it. target = observed
    // then lands exactly on theta = 0 (a plain bootstrap).
    let observed_corr = tilted_correlation(&col_j, &col_k, &product, 0.0);
    let f0 = observed_corr - target_corr;
    let theta = if f0 == 0.0 {
        0.0
    } else {
        let grid = 0.25;
        let steps = (THETA_RANGE.1 / grid) as usize;
        let preferred = if f0 < 0.0 { 1.0 } else { -1.0 };
        let mut bracket: Option<(f64, f64, f64)> = None;
        let mut reach_min = observed_corr;
        let mut reach_max = observed_corr;
        'search: for dir in [preferred, -preferred] {
            let mut prev_theta = 0.0;
            let mut prev_f = f0;
            for k in 1..=steps {
                let theta_k = dir * grid * k as f64;
                let value = tilted_correlation(&col_j, &col_k, &product, theta_k);
                reach_min = reach_min.min(value);
                reach_max = reach_max.max(value);
                let f_k = value - target_corr;
                if f_k == 0.0 || f_k.signum() != prev_f.signum() {
                    bracket = Some((prev_theta, theta_k, prev_f));
                    break 'search;
                }
                prev_theta = theta_k;
                prev_f = f_k;
            }
        }
        let (mut near, mut far, mut f_near) = bracket.ok_or(Error::TargetUnreachable {
            target: target_corr,
            lo: reach_min,
            hi: reach_max,
        })?;
        for _ in 0..100 {
            let mid = 0.5 * (near + far);
            let f_mid = tilted_correlation(&col_j, &col_k, &product, mid) - target_corr;
            if f_mid != 0.0 && f_mid.signum() == f_near.signum() {
                near = mid;
                f_near = f_mid;
            } else {
                far = mid;
            }
            if (far - near).abs() < 1e-13 {
                break;
            }
        }
        0.5 * (near + far)
    };
    let achieved = tilted_correlation(&col_j, &col_k, &product, theta);
    if (achieved - target_corr).abs() > CORR_TOLERANCE {
        return Err(Error::TargetUnreachable {
            target: target_corr,
            lo: achieved,
            hi: achieved,
        });
    }

    let weights = tilt_weights(&product, theta);
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights.iter() {
        acc += w;
        cumulative.push(acc);
    }

    let n = dataset.n();
    let mut selection_counts = vec![0usize; dataset.m()];
    let mut achieved_correlations = Vec::with_capacity(replicates);
    for b in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64));
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let idx = cumulative.partition_point(|c| *c <= u).min(n - 1);
            rows.push(idx);
        }
        let x = Array2::from_shape_fn((n, dataset.m()), |(i, c)| dataset.x[(rows[i], c)]);
        let y = Array1::from_shape_fn(n, |i| dataset.y[rows[i]]);
        let resample = Dataset::new(
            dataset.predictor_names.clone(),
            x,
            y,
            "marginal-shift resample",
        )?;
        let rcol_j = resample.x.column(j).to_owned();
        let rcol_k = resample.x.column(k).to_owned();
        let zero = Array1::zeros(n);
        achieved_correlations.push(tilted_correlation(&rcol_j, &rcol_k, &zero, 0.0));

        let path = lars_path(&resample, mode, None)?;
        let selection = select_by_cp(&path)?;
        for name in &selection.selected {
            if let Some(idx) = dataset.column_index(name) {
                selection_counts[idx] += 1;
            }
        }
    }
    let selection_frequency = dataset
        .predictor_names
        .iter()
        .zip(&selection_counts)
        .map(|(name, &count)| (name.clone(), count as f64 / replicates as f64))
        .collect();
    Ok(StabilityReport {
        target_pair: (pair.0.to_string(), pair.1.to_string()),
        target_corr,
        observed_corr,
        theta,
        achieved_correlations,
        selection_frequency,
        replicates,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn seeded_dataset(n: usize, m: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, m), |_| rng.sample(StandardNormal));
        let y = Array1::from_shape_fn(n, |i| {
            let signal: f64 = (0..m).map(|j| (m - j) as f64 * x[(i, j)]).sum();
            signal + 0.5 * rng.sample::<f64, _>(StandardNormal)
        });
        let names = (0..m).map(|j| format!("x{}", j + 1)).collect();
        Dataset::new(names, x, y, "seeded").unwrap()
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let x = ndarray::array![[7.0], [-7.0], [2.0]];
        let y = ndarray::array![1.0, 2.0, 3.0];
        let ds = Dataset::new(vec!["v".into()], x, y, "t").unwrap();
        let augmented = round_augment(&ds, 2.2, &[], "r").unwrap();
        assert_eq!(augmented.m(), 2);
        // 7 * 2.2 = 15.4 -> 15; -7 * 2.2 = -15.4 -> -15; 2 * 2.2 = 4.4 -> 4
        assert_eq!(augmented.x[(0, 1)], 15.0);
        assert_eq!(augmented.x[(1, 1)], -15.0);
        assert_eq!(augmented.x[(2, 1)], 4.0);
        // half-away: 2.5 rounds to 3, -2.5 rounds to -3
        assert_eq!((2.5f64).round(), 3.0);
        assert_eq!((-2.5f64).round(), -3.0);
    }

    #[test]
    fn factor_one_on_integers_copies_exactly() {
        let x = ndarray::array![[3.0, 0.5], [5.0, 1.5], [9.0, -0.5]];
        let y = ndarray::array![1.0, 2.0, 3.0];
        let ds = Dataset::new(vec!["ints".into(), "other".into()], x.clone(), y, "t").unwrap();
        let augmented = round_augment(&ds, 1.0, &["other".into()], "r").unwrap();
        assert_eq!(augmented.m(), 3);
        for i in 0..3 {
            assert_eq!(augmented.x[(i, 2)], x[(i, 0)]); // bitwise copy
            assert_eq!(augmented.x[(i, 0)], x[(i, 0)]); // originals untouched
            assert_eq!(augmented.x[(i, 1)], x[(i, 1)]);
        }
    }

    #[test]
    fn augment_rejects_name_collision() {
        let x = ndarray::array![[1.0, 2.0], [3.0, 4.0]];
        let y = ndarray::array![1.0, 2.0];
        let ds = Dataset::new(vec!["a".into(), "ra".into()], x, y, "t").unwrap();
        assert!(matches!(
            round_augment(&ds, 2.0, &["ra".into()], "r"),
            Err(Error::NameClash(name)) if name == "ra"
        ));
    }

    #[test]
    fn all_excluded_leaves_selection_unchanged() {
        let ds = seeded_dataset(30, 3, 77);
        let exclude: Vec<String> = ds.predictor_names.clone();
        let report = run_round_stress(&ds, 2.2, &exclude, Mode::Plain).unwrap();
        assert_eq!(report.overlap[0].jaccard, 1.0);
        assert_eq!(
            report.baseline.selection.selected,
            report.perturbed[0].selection.selected
        );
    }

    #[test]
    fn huge_factor_near_duplicates_do_not_crash() {
        // rounding at factor 1e7 perturbs by ~5e-8 relative: full rank for
        // the full model, collinear for admission
        let ds = seeded_dataset(40, 2, 88);
        let report = run_round_stress(&ds, 1.0e7, &[], Mode::Plain).unwrap();
        let has_skip = report.perturbed[0]
            .warnings
            .iter()
            .any(|w| w.contains("skipped"));
        let has_coselection = report.flags.iter().any(|f| f.contains("co-selected"));
        assert!(
            has_skip || has_coselection,
            "expected a collinearity skip or co-selection flag; warnings {:?} flags {:?}",
            report.perturbed[0].warnings,
            report.flags
        );
    }

    #[test]
    fn single_predictor_quadratic_pipelines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((60, 1), |_| rng.sample::<f64, _>(StandardNormal) + 1.5);
        let y = Array1::from_shape_fn(60, |i| {
            x[(i, 0)] + x[(i, 0)] * x[(i, 0)] + 0.05 * rng.sample::<f64, _>(StandardNormal)
        });
        let ds = Dataset::new(vec!["a".into()], x, y, "t").unwrap();
        let report = scale_order_audit(&ds, &[], Mode::Plain).unwrap();
        let mut a: Vec<String> = report.baseline.selection.selected.clone();
        let mut b: Vec<String> = report.perturbed[0].selection.selected.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn null_target_keeps_theta_at_zero() {
        let ds = seeded_dataset(50, 4, 99);
        let observed = {
            let col_j = ds.x.column(0).to_owned();
            let col_k = ds.x.column(1).to_owned();
            let zero = Array1::zeros(50);
            tilted_correlation(&col_j, &col_k, &zero, 0.0)
        };
        let report =
            marginal_shift_stress(&ds, ("x1", "x2"), observed, 5, 42, Mode::Plain).unwrap();
        assert!(report.theta.abs() <= 1e-6, "theta = {}", report.theta);
        assert_eq!(report.achieved_correlations.len(), 5);
        assert_eq!(report.replicates, 5);
    }

    #[test]
    fn plain_bootstrap_equivalence_at_observed_target() {
        // theta = 0 means uniform weights; the drawn rows must match a
        // uniform inverse-cdf bootstrap with the same seed stream
        let ds = seeded_dataset(40, 3, 111);
        let observed = {
            let zero = Array1::zeros(40);
            tilted_correlation(
                &ds.x.column(0).to_owned(),
                &ds.x.column(1).to_owned(),
                &zero,
                0.0,
            )
        };
        let report =
            marginal_shift_stress(&ds, ("x1", "x2"), observed, 1, 2024, Mode::Plain).unwrap();
        // reproduce replicate 0 by hand
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 40;
        let mut rows = Vec::new();
        for _ in 0..n {
            let u: f64 = rng.gen();
            rows.push(((u * n as f64).floor() as usize).min(n - 1));
        }
        let col_j = Array1::from_shape_fn(n, |i| ds.x[(rows[i], 0)]);
        let col_k = Array1::from_shape_fn(n, |i| ds.x[(rows[i], 1)]);
        let zero = Array1::zeros(n);
        let corr = tilted_correlation(&col_j, &col_k, &zero, 0.0);
        assert!(
            (corr - report.achieved_correlations[0]).abs() <= 1e-12,
            "{corr} vs {}",
            report.achieved_correlations[0]
        );
    }

    #[test]
    fn unreachable_target_reports_range() {
        let ds = seeded_dataset(30, 2, 7);
        // two independent noise columns cannot be tilted to correlation 0.999
        match marginal_shift_stress(&ds, ("x1", "x2"), 0.999, 1, 1, Mode::Plain) {
            Err(Error::TargetUnreachable { lo, hi, .. }) => {
                assert!(lo <= hi);
            }
            other => panic!("expected TargetUnreachable, got {other:?}"),
        }
    }
}

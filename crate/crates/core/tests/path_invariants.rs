//! Path-level invariants of the LARS engine over seeded datasets.

use larsdiag::diagnostics::full_model_info;
use larsdiag::ingest::Dataset;
use larsdiag::lars::{lars_path, Mode};
use larsdiag::numerics::least_squares;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn seeded_dataset(n: usize, m: usize, seed: u64, noise: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, m), |_| rng.sample(StandardNormal));
    let y = Array1::from_shape_fn(n, |i| {
        let signal: f64 = (0..m).map(|j| (m - j) as f64 * x[(i, j)]).sum();
        signal + noise * rng.sample::<f64, _>(StandardNormal)
    });
    let names = (0..m).map(|j| format!("x{}", j + 1)).collect();
    Dataset::new(names, x, y, "seeded").unwrap()
}

fn correlated_dataset(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((n, m));
    for i in 0..n {
        let shared: f64 = rng.sample(StandardNormal);
        for j in 0..m {
            x[(i, j)] = 0.7 * shared + rng.sample::<f64, _>(StandardNormal);
        }
    }
    let y = Array1::from_shape_fn(n, |i| {
        3.0 * x[(i, 0)] - 2.0 * x[(i, 1)]
            + 1.0 * x[(i, 2)]
            + 1.0 * rng.sample::<f64, _>(StandardNormal)
    });
    let names = (0..m).map(|j| format!("x{}", j + 1)).collect();
    Dataset::new(names, x, y, "correlated").unwrap()
}

#[test]
fn plain_path_reaches_least_squares_with_equicorrelation() {
    for seed in 0..25u64 {
        let n = 14 + (seed as usize % 25);
        let m = 2 + (seed as usize % 5);
        let ds = seeded_dataset(n, m, 100 + seed, 1.0);
        let path = lars_path(&ds, Mode::Plain, None).unwrap();
        let z = path.standardization.apply(&ds);
        let c0 = path.steps[0].max_abs_corr;

        // final state equals the full least-squares fit
        let last = path.steps.last().unwrap();
        assert_eq!(last.active_set.len(), m, "seed {seed}");
        let mut design = Array2::ones((n, m + 1));
        design.slice_mut(ndarray::s![.., 1..]).assign(&ds.x);
        let fit = least_squares(&design, &ds.y).unwrap();
        for j in 0..m {
            let gap = (last.coefficients_orig[j] - fit.coefficients[j + 1]).abs();
            assert!(
                gap <= 1e-8 * fit.coefficients[j + 1].abs().max(1.0),
                "seed {seed} coefficient {j}: gap {gap}"
            );
        }

        // equicorrelation at the start of every move (= each non-final state)
        for step in &path.steps[..path.steps.len() - 1] {
            let r = &ds.y - &step.mu_hat;
            let c = z.t().dot(&r);
            let big_c = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for name in &step.active_set {
                let j = path.predictor_names.iter().position(|p| p == name).unwrap();
                assert!(
                    (c[j].abs() - big_c).abs() <= 1e-8 * big_c,
                    "seed {seed} step {} predictor {name}: |c| = {}, C = {big_c}",
                    step.step_index,
                    c[j].abs()
                );
            }
        }

        // C strictly decreases and the chain 0 <= u_i <= 1 holds
        for pair in path.steps.windows(2) {
            assert!(pair[1].max_abs_corr < pair[0].max_abs_corr + 1e-10 * c0.max(1.0));
        }
        for step in &path.steps {
            for &u in step.subset_leverage.iter() {
                assert!((-1e-10..=1.0 + 1e-10).contains(&u));
            }
            let expect = step.active_set.len() as f64 + 1.0;
            assert!(
                (step.df_surrogate - expect).abs() <= 1e-8,
                "df {}",
                step.df_surrogate
            );
            // inactive coefficients are exactly zero
            for (j, name) in path.predictor_names.iter().enumerate() {
                if !step.active_set.contains(name) {
                    assert_eq!(step.coefficients_std[j], 0.0, "inactive {name} nonzero");
                }
            }
        }
    }
}

#[test]
fn subset_leverage_never_exceeds_full_leverage() {
    for seed in 0..10u64 {
        let ds = seeded_dataset(20, 4, 300 + seed, 1.5);
        let info = full_model_info(&ds).unwrap();
        let path = lars_path(&ds, Mode::Plain, None).unwrap();
        for step in &path.steps {
            for i in 0..20 {
                let u = step.subset_leverage[i];
                let h = info.hat_diagonals[i];
                assert!(
                    u <= h + 1e-10,
                    "seed {seed} step {} case {i}: u = {u} > h = {h}",
                    step.step_index
                );
            }
        }
    }
}

#[test]
fn rescaling_a_predictor_leaves_the_path_unchanged() {
    for seed in 0..8u64 {
        let n = 18 + 2 * seed as usize;
        let m = 3 + (seed as usize % 3);
        let ds = seeded_dataset(n, m, 700 + seed, 1.0);
        let base = lars_path(&ds, Mode::Plain, None).unwrap();
        let target = seed as usize % m;
        for scale in [0.001, 3.0, 1000.0] {
            let mut x = ds.x.clone();
            for i in 0..n {
                x[(i, target)] *= scale;
            }
            let scaled =
                Dataset::new(ds.predictor_names.clone(), x, ds.y.clone(), "scaled").unwrap();
            let moved = lars_path(&scaled, Mode::Plain, None).unwrap();
            assert_eq!(
                base.entry_order(),
                moved.entry_order(),
                "seed {seed} scale {scale}"
            );
            assert_eq!(base.steps.len(), moved.steps.len());
            for (a, b) in base.steps.iter().zip(&moved.steps) {
                assert_eq!(a.active_set, b.active_set);
                for i in 0..n {
                    let gap = (a.mu_hat[i] - b.mu_hat[i]).abs();
                    assert!(gap <= 1e-8 * a.mu_hat[i].abs().max(1.0), "mu gap {gap}");
                }
            }
            // original-scale coefficient of the scaled column shrinks by 1/scale
            let a = base.steps.last().unwrap().coefficients_orig[target];
            let b = moved.steps.last().unwrap().coefficients_orig[target];
            assert!((a - b * scale).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }
}

#[test]
fn lasso_drops_record_and_reenter() {
    let ds = correlated_dataset(25, 6, 13);
    let path = lars_path(&ds, Mode::Lasso, Some(30)).unwrap();
    let drop_steps: Vec<usize> = path
        .steps
        .iter()
        .filter(|s| s.dropped.is_some())
        .map(|s| s.step_index)
        .collect();
    assert!(!drop_steps.is_empty(), "seed 13 should produce a drop");
    for &idx in &drop_steps {
        let before = &path.steps[idx - 1];
        let at = &path.steps[idx];
        // one predictor leaves (plus one may have entered at the step start)
        assert_eq!(
            at.active_set.len(),
            before.active_set.len() + usize::from(at.entered.is_some()) - 1
        );
        // dropped coefficient is exactly zero
        let name = at.dropped.as_ref().unwrap();
        let j = path.predictor_names.iter().position(|p| p == name).unwrap();
        assert_eq!(at.coefficients_std[j], 0.0);
        // the step after a drop admits nothing
        if let Some(next) = path.steps.get(idx + 1) {
            assert!(
                next.entered.is_none(),
                "step {} admitted after a drop",
                idx + 1
            );
        }
    }
    // entries exceed the predictor count: something re-entered
    let entries = path.steps.iter().filter(|s| s.entered.is_some()).count();
    assert!(entries > 6, "expected a re-entry, got {entries} entries");
    // lasso still converges to the least-squares fit on full-rank data
    let last = path.steps.last().unwrap();
    let mut design = Array2::ones((25, 7));
    design.slice_mut(ndarray::s![.., 1..]).assign(&ds.x);
    let fit = least_squares(&design, &ds.y).unwrap();
    for j in 0..6 {
        let gap = (last.coefficients_orig[j] - fit.coefficients[j + 1]).abs();
        assert!(gap <= 1e-8 * fit.coefficients[j + 1].abs().max(1.0));
    }
}

#[test]
fn max_steps_truncates_the_path() {
    let ds = seeded_dataset(30, 6, 909, 1.0);
    let path = lars_path(&ds, Mode::Plain, Some(2)).unwrap();
    assert_eq!(path.steps.len(), 3); // step 0 plus two moves
    assert_eq!(path.steps.last().unwrap().active_set.len(), 2);
}

#[test]
fn default_step_budget_respects_degrees_of_freedom() {
    // n - 2 caps the step count when m is large relative to n
    let ds = seeded_dataset(9, 6, 11, 1.0);
    let path = lars_path(&ds, Mode::Plain, None).unwrap();
    assert!(path.steps.len() - 1 <= 7);
}

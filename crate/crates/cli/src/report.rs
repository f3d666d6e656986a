//! Report payload builders: core results to JSON trees and text summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use larsdiag::diagnostics::{CaseCpRecord, CovSimulation, FullModelInfo};
use larsdiag::dimension::SirResult;
use larsdiag::lars::{LarsPath, LarsStep, SelectionResult};
use larsdiag::stress::{LabeledSelection, StabilityReport, StressReport};

use crate::json::{num_list, str_list, Json};

fn opt_str(value: &Option<String>) -> Json {
    match value {
        Some(s) => Json::Str(s.clone()),
        None => Json::Null,
    }
}

/// Active-set coefficients keyed by predictor name, original scale.
fn coefficient_map(step: &LarsStep, names: &[String]) -> Json {
    let mut map = BTreeMap::new();
    for name in &step.active_set {
        let j = names
            .iter()
            .position(|n| n == name)
            .expect("active name known");
        map.insert(name.clone(), Json::Num(step.coefficients_orig[j]));
    }
    Json::Obj(map)
}

pub fn selection_json(selection: &SelectionResult) -> Json {
    let mut coefficients = BTreeMap::new();
    for (name, value) in selection.selected.iter().zip(&selection.coefficients) {
        coefficients.insert(name.clone(), Json::Num(*value));
    }
    Json::obj(vec![
        ("chosen_step", Json::Int(selection.chosen_step as i64)),
        ("coefficients", Json::Obj(coefficients)),
        ("criterion_value", Json::Num(selection.criterion_value)),
        ("intercept", Json::Num(selection.intercept)),
        ("selected", str_list(&selection.selected)),
        ("size", Json::Int(selection.selected.len() as i64)),
    ])
}

pub fn path_json(path: &LarsPath, selection: &SelectionResult) -> Json {
    let steps: Vec<Json> = path
        .steps
        .iter()
        .map(|step| {
            Json::obj(vec![
                ("active_set", str_list(&step.active_set)),
                ("coefficients", coefficient_map(step, &path.predictor_names)),
                ("cp", Json::Num(step.cp)),
                ("df_surrogate", Json::Num(step.df_surrogate)),
                ("dropped", opt_str(&step.dropped)),
                ("entered", opt_str(&step.entered)),
                ("intercept", Json::Num(step.intercept)),
                ("max_abs_corr", Json::Num(step.max_abs_corr)),
                ("step_index", Json::Int(step.step_index as i64)),
                ("step_length", Json::Num(step.step_length)),
            ])
        })
        .collect();
    Json::obj(vec![
        ("entry_order", str_list(path.entry_order())),
        ("mode", Json::Str(path.mode.as_str().to_string())),
        ("selection", selection_json(selection)),
        ("steps", Json::Arr(steps)),
        ("warnings", str_list(&path.warnings)),
    ])
}

pub fn diagnose_json(step: &LarsStep, records: &[CaseCpRecord], info: &FullModelInfo) -> Json {
    let cases: Vec<Json> = records
        .iter()
        .map(|rec| {
            Json::obj(vec![
                ("c_pi", Json::Num(rec.c_pi)),
                ("case_index", Json::Int(rec.case_index as i64)),
                ("cov_term", Json::Num(rec.cov_term)),
                ("fit_term", Json::Num(rec.fit_term)),
                ("leverage_deficit", Json::Num(rec.leverage_deficit)),
            ])
        })
        .collect();
    let sum: f64 = records.iter().map(|r| r.c_pi).sum();
    Json::obj(vec![
        ("active_set", str_list(&step.active_set)),
        ("cases", Json::Arr(cases)),
        ("cp", Json::Num(step.cp)),
        ("df_surrogate", Json::Num(step.df_surrogate)),
        ("sigma_hat_sq", Json::Num(info.sigma_hat_sq)),
        ("step_index", Json::Int(step.step_index as i64)),
        ("sum_c_pi", Json::Num(sum)),
    ])
}

pub fn sir_json(result: &SirResult) -> Json {
    let tests: Vec<Json> = result
        .dim_tests
        .iter()
        .map(|t| {
            Json::obj(vec![
                ("d", Json::Int(t.d as i64)),
                ("degrees_of_freedom", Json::Int(t.degrees_of_freedom as i64)),
                ("p_value", Json::Num(t.p_value)),
                ("statistic", Json::Num(t.statistic)),
            ])
        })
        .collect();
    let m = result.directions.nrows();
    let directions: Vec<Json> = (0..result.directions.ncols())
        .map(|j| num_list((0..m).map(|i| result.directions[(i, j)])))
        .collect();
    Json::obj(vec![
        ("dim_tests", Json::Arr(tests)),
        ("directions", Json::Arr(directions)),
        ("eigenvalues", num_list(result.eigenvalues.iter().copied())),
        ("estimated_d", Json::Int(result.estimated_d as i64)),
        ("level", Json::Num(result.level)),
        ("slice_count", Json::Int(result.slice_count as i64)),
        (
            "slice_sizes",
            Json::Arr(
                result
                    .slice_sizes
                    .iter()
                    .map(|&s| Json::Int(s as i64))
                    .collect(),
            ),
        ),
    ])
}

fn labeled_selection_json(labeled: &LabeledSelection) -> Json {
    let composition = match &labeled.composition {
        Some(c) => Json::obj(vec![
            ("interaction", Json::Int(c.interaction as i64)),
            ("main", Json::Int(c.main as i64)),
            ("quadratic", Json::Int(c.quadratic as i64)),
        ]),
        None => Json::Null,
    };
    Json::obj(vec![
        ("composition", composition),
        ("entry_order", str_list(&labeled.entry_order)),
        ("label", Json::Str(labeled.label.clone())),
        ("selection", selection_json(&labeled.selection)),
        ("warnings", str_list(&labeled.warnings)),
    ])
}

pub fn stress_json(report: &StressReport) -> Json {
    let overlap: Vec<Json> = report
        .overlap
        .iter()
        .map(|o| {
            Json::obj(vec![
                ("first", Json::Str(o.first.clone())),
                ("intersection", Json::Int(o.intersection as i64)),
                ("jaccard", Json::Num(o.jaccard)),
                ("second", Json::Str(o.second.clone())),
            ])
        })
        .collect();
    let mut echo = BTreeMap::new();
    for (key, value) in &report.config_echo {
        echo.insert(key.clone(), Json::Str(value.clone()));
    }
    Json::obj(vec![
        ("baseline", labeled_selection_json(&report.baseline)),
        ("config_echo", Json::Obj(echo)),
        ("flags", str_list(&report.flags)),
        ("notes", str_list(&report.notes)),
        ("overlap", Json::Arr(overlap)),
        (
            "perturbed",
            Json::Arr(
                report
                    .perturbed
                    .iter()
                    .map(labeled_selection_json)
                    .collect(),
            ),
        ),
    ])
}

pub fn stability_json(report: &StabilityReport) -> Json {
    let mut frequency = BTreeMap::new();
    for (name, value) in &report.selection_frequency {
        frequency.insert(name.clone(), Json::Num(*value));
    }
    Json::obj(vec![
        (
            "achieved_correlations",
            num_list(report.achieved_correlations.iter().copied()),
        ),
        ("observed_corr", Json::Num(report.observed_corr)),
        ("replicates", Json::Int(report.replicates as i64)),
        ("seed", Json::Int(report.seed as i64)),
        ("selection_frequency", Json::Obj(frequency)),
        ("target_corr", Json::Num(report.target_corr)),
        (
            "target_pair",
            str_list([report.target_pair.0.as_str(), report.target_pair.1.as_str()]),
        ),
        ("theta", Json::Num(report.theta)),
    ])
}

pub fn cov_simulation_json(sim: &CovSimulation) -> Json {
    Json::obj(vec![
        ("estimates", num_list(sim.estimates.iter().copied())),
        ("excluded", Json::Int(sim.excluded as i64)),
        ("generator", Json::Str(sim.generator.as_str().to_string())),
        ("noise_sd", Json::Num(sim.noise_sd)),
        (
            "reference_leverage",
            num_list(sim.reference_leverage.iter().copied()),
        ),
        ("replicates_used", Json::Int(sim.replicates_used as i64)),
        ("rng_algorithm", Json::Str(sim.rng_algorithm.to_string())),
        ("seed", Json::Int(sim.seed as i64)),
        ("std_errors", num_list(sim.std_errors.iter().copied())),
        ("step_count", Json::Int(sim.step_count as i64)),
    ])
}

/// Long-format CSV of the path: one row per (step, predictor), standardized
/// coefficients, the step's Cp repeated on each row.
pub fn plot_data_csv(path: &LarsPath) -> String {
    let mut out = String::from("step,predictor,coefficient,cp\n");
    for step in &path.steps {
        for (j, name) in path.predictor_names.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                step.step_index,
                name,
                crate::json::format_float(step.coefficients_std[j]),
                crate::json::format_float(step.cp),
            );
        }
    }
    out
}

// ---- text renderers ----

pub fn selection_text(selection: &SelectionResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "selected {} predictors at step {} (Cp = {:.3}):",
        selection.selected.len(),
        selection.chosen_step,
        selection.criterion_value
    );
    let _ = writeln!(out, "  intercept = {:.6}", selection.intercept);
    for (name, value) in selection.selected.iter().zip(&selection.coefficients) {
        let _ = writeln!(out, "  {name} = {value:.6}");
    }
    out
}

pub fn path_text(path: &LarsPath, selection: &SelectionResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "LARS path ({} mode), {} steps",
        path.mode.as_str(),
        path.steps.len()
    );
    for step in &path.steps {
        let event = match (&step.entered, &step.dropped) {
            (Some(e), None) => format!("+{e}"),
            (None, Some(d)) => format!("-{d}"),
            (Some(e), Some(d)) => format!("+{e} -{d}"),
            (None, None) => String::from("."),
        };
        let _ = writeln!(
            out,
            "  step {:>2} {:<12} |active| = {:<3} C = {:<12.4} Cp = {:.3}",
            step.step_index,
            event,
            step.active_set.len(),
            step.max_abs_corr,
            step.cp
        );
    }
    for warning in &path.warnings {
        let _ = writeln!(out, "  warning: {warning}");
    }
    out.push_str(&selection_text(selection));
    out
}

pub fn stress_text(report: &StressReport) -> String {
    let mut out = String::new();
    let mut describe = |label: &str, sel: &LabeledSelection| {
        let _ = writeln!(
            out,
            "{label} [{}]: {} predictors: {}",
            sel.label,
            sel.selection.selected.len(),
            sel.selection.selected.join(", ")
        );
        if let Some(c) = &sel.composition {
            let _ = writeln!(
                out,
                "  composition: {} main, {} interaction, {} quadratic",
                c.main, c.interaction, c.quadratic
            );
        }
    };
    describe("baseline", &report.baseline);
    for sel in &report.perturbed {
        describe("perturbed", sel);
    }
    for o in &report.overlap {
        let _ = writeln!(
            out,
            "overlap {} vs {}: |intersection| = {}, jaccard = {:.4}",
            o.first, o.second, o.intersection, o.jaccard
        );
    }
    for flag in &report.flags {
        let _ = writeln!(out, "flag: {flag}");
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

pub fn stability_text(report: &StabilityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "marginal shift of ({}, {}): observed corr {:.4}, target {:.4}, theta {:.4}",
        report.target_pair.0,
        report.target_pair.1,
        report.observed_corr,
        report.target_corr,
        report.theta
    );
    let mean_achieved: f64 =
        report.achieved_correlations.iter().sum::<f64>() / report.replicates as f64;
    let _ = writeln!(
        out,
        "replicates: {}, mean achieved corr {:.4}",
        report.replicates, mean_achieved
    );
    let mut ranked: Vec<_> = report.selection_frequency.clone();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (name, freq) in ranked {
        let _ = writeln!(
            out,
            "  {name}: selected in {:.1}% of replicates",
            100.0 * freq
        );
    }
    out
}

pub fn sir_text(result: &SirResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "SIR with {} slices (sizes {:?}), level {}",
        result.slice_count, result.slice_sizes, result.level
    );
    for t in &result.dim_tests {
        let _ = writeln!(
            out,
            "  d = {}: statistic = {:.3}, df = {}, p = {:.5}",
            t.d, t.statistic, t.degrees_of_freedom, t.p_value
        );
    }
    let _ = writeln!(
        out,
        "estimated structural dimension: {}",
        result.estimated_d
    );
    out
}

pub fn cov_simulation_text(sim: &CovSimulation) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "covariance simulation: {} replicates used, {} excluded, step {}, noise sd {}",
        sim.replicates_used, sim.excluded, sim.step_count, sim.noise_sd
    );
    let _ = writeln!(out, "rng: {} (seed {})", sim.rng_algorithm, sim.seed);
    let n = sim.estimates.len();
    let mut within = 0;
    for i in 0..n {
        if (sim.estimates[i] - sim.reference_leverage[i]).abs() <= 3.0 * sim.std_errors[i] {
            within += 1;
        }
    }
    let _ = writeln!(
        out,
        "estimates within 3 standard errors of the plug-in u_i: {within}/{n}"
    );
    out
}

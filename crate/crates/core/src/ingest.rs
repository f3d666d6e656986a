//! Dataset loading, standardization, and term expansion.
//!
//! CSV layout: UTF-8, comma separated, one header row, "." decimal point.
//! Expanded columns are ordered main effects, then interactions in
//! lexicographic parent-index order, then quadratics in source order; names
//! are "A:B" for interactions and "A^2" for quadratics.

use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::numerics::{self, PivotedQr};

/// Named predictors plus a response.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub predictor_names: Vec<String>,
    /// n x m predictor matrix in the caller's units.
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        predictor_names: Vec<String>,
        x: Array2<f64>,
        y: Array1<f64>,
        provenance: impl Into<String>,
    ) -> Result<Dataset> {
        if predictor_names.len() != x.ncols() {
            return Err(Error::Dimension(format!(
                "{} names for {} columns",
                predictor_names.len(),
                x.ncols()
            )));
        }
        if x.nrows() != y.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} responses",
                x.nrows(),
                y.len()
            )));
        }
        for (i, a) in predictor_names.iter().enumerate() {
            for b in predictor_names.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::NameClash(a.clone()));
                }
            }
        }
        numerics::ensure_finite_matrix("predictors", &x)?;
        numerics::ensure_finite_vector("response", y.as_slice().unwrap())?;
        Ok(Dataset {
            predictor_names,
            x,
            y,
            provenance: provenance.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.predictor_names.iter().position(|n| n == name)
    }
}

/// How a column is brought to unit scale after centering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingRule {
    /// Divide the centered column by its Euclidean length.
    UnitNorm,
    /// Divide the centered column by its sample standard deviation (n-1).
    UnitSd,
}

impl ScalingRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingRule::UnitNorm => "unit-norm",
            ScalingRule::UnitSd => "unit-sd",
        }
    }
}

/// Centering/scaling parameters recorded against a dataset.
#[derive(Debug, Clone)]
pub struct StandardizedView {
    pub column_means: Array1<f64>,
    pub column_scales: Array1<f64>,
    pub scaling_rule: ScalingRule,
    pub response_mean: f64,
}

impl StandardizedView {
    /// Materialize the standardized predictor matrix.
    pub fn apply(&self, dataset: &Dataset) -> Array2<f64> {
        let mut z = dataset.x.clone();
        for j in 0..dataset.m() {
            let mean = self.column_means[j];
            let scale = self.column_scales[j];
            for i in 0..dataset.n() {
                z[(i, j)] = (z[(i, j)] - mean) / scale;
            }
        }
        z
    }

    /// Map a standardized column back to original units.
    pub fn invert_column(&self, j: usize, column: &Array1<f64>) -> Array1<f64> {
        column * self.column_scales[j] + self.column_means[j]
    }
}

/// Record centering and scaling for every predictor column.
pub fn standardize(dataset: &Dataset, rule: ScalingRule) -> Result<StandardizedView> {
    let n = dataset.n();
    if n < 2 {
        return Err(Error::EmptyInput(
            "standardization needs at least 2 rows".into(),
        ));
    }
    let means = dataset.x.mean_axis(Axis(0)).unwrap();
    let mut scales = Array1::zeros(dataset.m());
    for j in 0..dataset.m() {
        let ss: f64 = dataset
            .x
            .column(j)
            .iter()
            .map(|v| (v - means[j]).powi(2))
            .sum();
        if ss <= 0.0 {
            return Err(Error::ConstantColumn(dataset.predictor_names[j].clone()));
        }
        scales[j] = match rule {
            ScalingRule::UnitNorm => ss.sqrt(),
            ScalingRule::UnitSd => (ss / (n as f64 - 1.0)).sqrt(),
        };
    }
    Ok(StandardizedView {
        column_means: means,
        column_scales: scales,
        scaling_rule: rule,
        response_mean: dataset.y.mean().unwrap(),
    })
}

/// Replace a dataset's predictors with their standardized values.
pub fn standardized_dataset(dataset: &Dataset, rule: ScalingRule) -> Result<Dataset> {
    let view = standardize(dataset, rule)?;
    Dataset::new(
        dataset.predictor_names.clone(),
        view.apply(dataset),
        dataset.y.clone(),
        format!("{} [standardized {}]", dataset.provenance, rule.as_str()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Main,
    Quadratic,
    Interaction,
}

impl TermKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Main => "main",
            TermKind::Quadratic => "quadratic",
            TermKind::Interaction => "interaction",
        }
    }
}

/// Bookkeeping for an expanded dataset: what each output column is made of.
#[derive(Debug, Clone)]
pub struct TermExpansion {
    pub source_names: Vec<String>,
    pub term_kinds: Vec<TermKind>,
    /// Source indices behind each output column (one parent for mains and
    /// quadratics, two distinct parents for interactions).
    pub term_parents: Vec<(usize, Option<usize>)>,
    pub exclusions: Vec<String>,
}

impl TermExpansion {
    pub fn count_of(&self, kind: TermKind, names: &[String], selected: &[String]) -> usize {
        selected
            .iter()
            .filter(|s| {
                names
                    .iter()
                    .position(|n| &n == s)
                    .is_some_and(|i| self.term_kinds[i] == kind)
            })
            .count()
    }
}

/// Load a CSV with a header row; every non-response column becomes a predictor
/// in file order.
pub fn load_csv(path: impl AsRef<Path>, response: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if headers.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no header",
            path.display()
        )));
    }
    let response_idx = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::MissingColumn(response.to_string()))?;
    let predictor_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != response_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for (rec_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Io(e.to_string()))?;
        let line = rec_idx + 2; // header is line 1
        if record.len() != headers.len() {
            return Err(Error::Dimension(format!(
                "row {line} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::BadCell {
                row: line,
                column: headers[col].clone(),
            })?;
            if !value.is_finite() {
                return Err(Error::BadCell {
                    row: line,
                    column: headers[col].clone(),
                });
            }
            if col == response_idx {
                y.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    let n = rows.len();
    let m = predictor_names.len();
    let mut x = Array2::zeros((n, m));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    Dataset::new(
        predictor_names,
        x,
        Array1::from_vec(y),
        path.display().to_string(),
    )
}

/// Append interaction and quadratic columns to a dataset.
pub fn expand_terms(
    dataset: &Dataset,
    quadratics: bool,
    interactions: bool,
    quadratic_exclusions: &[String],
) -> Result<(Dataset, TermExpansion)> {
    let m = dataset.m();
    for name in quadratic_exclusions {
        if dataset.column_index(name).is_none() {
            return Err(Error::MissingColumn(name.clone()));
        }
    }
    let mut names = dataset.predictor_names.clone();
    let mut kinds = vec![TermKind::Main; m];
    let mut parents: Vec<(usize, Option<usize>)> = (0..m).map(|j| (j, None)).collect();
    let mut columns: Vec<Array1<f64>> = Vec::new();

    if interactions {
        for i in 0..m {
            for j in i + 1..m {
                names.push(format!(
                    "{}:{}",
                    dataset.predictor_names[i], dataset.predictor_names[j]
                ));
                kinds.push(TermKind::Interaction);
                parents.push((i, Some(j)));
                columns.push(&dataset.x.column(i).to_owned() * &dataset.x.column(j));
            }
        }
    }
    if quadratics {
        for i in 0..m {
            if quadratic_exclusions
                .iter()
                .any(|e| e == &dataset.predictor_names[i])
            {
                continue;
            }
            names.push(format!("{}^2", dataset.predictor_names[i]));
            kinds.push(TermKind::Quadratic);
            parents.push((i, None));
            let col = dataset.x.column(i).to_owned();
            columns.push(&col * &col);
        }
    }

    let total = m + columns.len();
    let mut x = Array2::zeros((dataset.n(), total));
    x.slice_mut(ndarray::s![.., ..m]).assign(&dataset.x);
    for (k, col) in columns.iter().enumerate() {
        x.column_mut(m + k).assign(col);
    }
    let expanded = Dataset::new(
        names,
        x,
        dataset.y.clone(),
        format!("{} [expanded]", dataset.provenance),
    )?;
    let expansion = TermExpansion {
        source_names: dataset.predictor_names.clone(),
        term_kinds: kinds,
        term_parents: parents,
        exclusions: quadratic_exclusions.to_vec(),
    };
    Ok((expanded, expansion))
}

/// Replace every non-main column by its residual after regression on the
/// intercept plus all main effects.
pub fn orthogonalize_expansion(expanded: &Dataset, expansion: &TermExpansion) -> Result<Dataset> {
    let n = expanded.n();
    let m_main = expansion.source_names.len();
    let mut design = Array2::zeros((n, m_main + 1));
    design.column_mut(0).fill(1.0);
    design
        .slice_mut(ndarray::s![.., 1..])
        .assign(&expanded.x.slice(ndarray::s![.., ..m_main]));
    let qr = PivotedQr::new(&numerics::unit_scaled_columns(&design));
    if qr.rank() < m_main + 1 {
        return Err(Error::RankDeficient {
            what: "main-effect block (with intercept)".into(),
            tolerance: numerics::RANK_RTOL,
        });
    }
    let mut x = expanded.x.clone();
    for j in m_main..expanded.m() {
        let col = x.column(j).to_owned();
        let fitted = qr.project(&col);
        x.column_mut(j).assign(&(&col - &fitted));
    }
    Dataset::new(
        expanded.predictor_names.clone(),
        x,
        expanded.y.clone(),
        format!("{} [orthogonalized]", expanded.provenance),
    )
}

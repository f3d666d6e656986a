//! Structural-dimension estimation by sliced inverse regression.
//!
//! Cases are sorted by response and cut into near-equal contiguous slices
//! (ties never split; the first n mod H slices take one extra case; the last
//! slice absorbs the tail). The between-slice covariance of the whitened
//! predictors is eigendecomposed and each candidate dimension d is tested
//! with the statistic n * sum of the trailing eigenvalues against a
//! chi-squared reference with (m-d)(H-d-1) degrees of freedom.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::numerics::whiten;

#[derive(Debug, Clone)]
pub struct DimTest {
    pub d: usize,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone)]
pub struct SirResult {
    /// Eigenvalues of the between-slice matrix, descending, in [0, 1].
    pub eigenvalues: Array1<f64>,
    /// Candidate directions on the original predictor scale, unit columns.
    pub directions: Array2<f64>,
    pub slice_count: usize,
    pub slice_sizes: Vec<usize>,
    pub dim_tests: Vec<DimTest>,
    /// Smallest d whose test is not rejected at `level`.
    pub estimated_d: usize,
    pub level: f64,
}

pub fn sir(dataset: &Dataset, slices: usize, level: f64) -> Result<SirResult> {
    let n = dataset.n();
    let m = dataset.m();
    if slices < 2 {
        return Err(Error::BadConfig(format!(
            "slices must be >= 2, got {slices}"
        )));
    }
    if n < 2 * slices {
        return Err(Error::BadConfig(format!(
            "need n >= 2 * slices, got n = {n}, slices = {slices}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::BadConfig(format!(
            "level must be in (0, 1), got {level}"
        )));
    }
    let mut distinct: Vec<f64> = dataset.y.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if slices > distinct.len() {
        return Err(Error::BadConfig(format!(
            "{slices} slices exceed {} distinct response values",
            distinct.len()
        )));
    }

    let white = whiten(&dataset.x)?;
    let z = &white.whitened;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        dataset.y[i]
            .partial_cmp(&dataset.y[j])
            .unwrap()
            .then(i.cmp(&j))
    });
    let y_sorted: Vec<f64> = order.iter().map(|&i| dataset.y[i]).collect();

    let base = n / slices;
    let rem = n % slices;
    let mut bounds: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    for h in 0..slices {
        if start >= n {
            break;
        }
        let quota = base + usize::from(h < rem);
        let mut b = (start + quota).min(n);
        if h == slices - 1 {
            b = n;
        }
        while b < n && y_sorted[b] == y_sorted[b - 1] {
            b += 1;
        }
        bounds.push((start, b));
        start = b;
    }

    let mut between = Array2::<f64>::zeros((m, m));
    let mut slice_sizes = Vec::with_capacity(bounds.len());
    for &(a, b) in &bounds {
        let size = b - a;
        slice_sizes.push(size);
        let mut mean = Array1::<f64>::zeros(m);
        for &idx in &order[a..b] {
            for j in 0..m {
                mean[j] += z[(idx, j)];
            }
        }
        mean.mapv_inplace(|v| v / size as f64);
        let weight = size as f64 / n as f64;
        for r in 0..m {
            for s in 0..m {
                between[(r, s)] += weight * mean[r] * mean[s];
            }
        }
    }
    let slice_count = slice_sizes.len();

    let (eigenvalues, vectors) = crate::numerics::symmetric_eig(&between)?;

    // map directions back through the whitening transform, unit-normalized
    let mut directions = white.transform.dot(&vectors);
    for j in 0..m {
        let norm: f64 = directions
            .column(j)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            let lead = directions.column(j).iter().cloned().fold(0.0f64, |a, v| {
                if v.abs() > a.abs() {
                    v
                } else {
                    a
                }
            });
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            for i in 0..m {
                directions[(i, j)] *= sign / norm;
            }
        }
    }

    let mut dim_tests = Vec::new();
    let d_max = m.min(slice_count - 1);
    for d in 0..d_max {
        let tail: f64 = (d..m).map(|j| eigenvalues[j]).sum::<f64>().max(0.0);
        let statistic = n as f64 * tail;
        let degrees_of_freedom = (m - d) * (slice_count - d - 1);
        let p_value = chi_sq_upper_tail(statistic, degrees_of_freedom)?;
        dim_tests.push(DimTest {
            d,
            statistic,
            degrees_of_freedom,
            p_value,
        });
    }
    let estimated_d = dim_tests
        .iter()
        .find(|t| t.p_value >= level)
        .map(|t| t.d)
        .unwrap_or(d_max);

    Ok(SirResult {
        eigenvalues,
        directions,
        slice_count,
        slice_sizes,
        dim_tests,
        estimated_d,
        level,
    })
}

/// Upper-tail probability of a chi-squared variable: Q(df/2, x/2).
pub fn chi_sq_upper_tail(statistic: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::BadConfig("degrees of freedom must be >= 1".into()));
    }
    if !statistic.is_finite() || statistic < 0.0 {
        return Err(Error::BadConfig(format!(
            "statistic must be finite and >= 0, got {statistic}"
        )));
    }
    if statistic == 0.0 {
        return Ok(1.0);
    }
    let a = df as f64 / 2.0;
    let x = statistic / 2.0;
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x))
    } else {
        Ok(gamma_q_continued_fraction(a, x))
    }
}

/// Regularized lower incomplete gamma by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= x / (a + k);
        sum += term;
        if term.abs() < sum.abs() * 1e-16 || k > 10_000.0 {
            break;
        }
        k += 1.0;
    }
    sum * (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma by modified Lentz continued fraction.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut i = 1.0;
    loop {
        let an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 || i > 10_000.0 {
            break;
        }
        i += 1.0;
    }
    (a * x.ln() - x - ln_gamma(a)).exp() * h
}

/// Lanczos approximation of ln Gamma, g = 7.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = COEF[0];
        for (i, &coef) in COEF.iter().enumerate().skip(1) {
            acc += coef / (x + i as f64);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

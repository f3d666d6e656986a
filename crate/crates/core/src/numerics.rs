//! Dense linear-algebra kernel: least-squares solves, projection diagonals,
//! symmetric eigendecomposition, whitening.
//!
//! Everything is built on column-pivoted Householder QR and cyclic Jacobi
//! rotations. Singular values below [`RANK_RTOL`] times the largest (read off
//! the rank-revealing R diagonal) are treated as zero. Non-finite inputs are
//! rejected at entry.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};

/// Relative rank tolerance: R diagonals below this times the largest are zero.
pub const RANK_RTOL: f64 = 1e-10;

/// Relative symmetry tolerance for [`symmetric_eig`].
pub const SYM_TOL: f64 = 1e-10;

pub(crate) fn ensure_finite_matrix(what: &str, a: &Array2<f64>) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} contains NaN or infinity")))
    }
}

pub(crate) fn ensure_finite_vector(what: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} contains NaN or infinity")))
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    /// One coefficient per design column (minimum-norm when rank deficient).
    pub coefficients: Array1<f64>,
    /// Projection of the response onto the design's column space.
    pub fitted: Array1<f64>,
    /// response - fitted.
    pub residuals: Array1<f64>,
    /// Numerical rank of the design at [`RANK_RTOL`].
    pub rank: usize,
}

/// Column-pivoted Householder QR of an n x m matrix, n >= 1.
///
/// A * P = Q * R with |R[0,0]| >= |R[1,1]| >= ... ; `rank` counts diagonals
/// above `RANK_RTOL * |R[0,0]|`.
pub(crate) struct PivotedQr {
    reflectors: Vec<Array1<f64>>, // v_j, length n - j, first entry nonzero
    betas: Vec<f64>,              // H_j = I - beta_j v_j v_j'
    r: Array2<f64>,               // k x m upper trapezoid, k = min(n, m)
    perm: Vec<usize>,             // column j of A*P is column perm[j] of A
    rank: usize,
    nrows: usize,
}

impl PivotedQr {
    pub(crate) fn new(a: &Array2<f64>) -> PivotedQr {
        let (n, m) = a.dim();
        let k = n.min(m);
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut reflectors = Vec::with_capacity(k);
        let mut betas = Vec::with_capacity(k);

        for j in 0..k {
            // pivot: remaining column with the largest trailing norm
            let mut best = j;
            let mut best_norm = 0.0;
            for c in j..m {
                let norm: f64 = work.slice(s![j.., c]).iter().map(|v| v * v).sum();
                if norm > best_norm {
                    best_norm = norm;
                    best = c;
                }
            }
            if best != j {
                perm.swap(j, best);
                for i in 0..n {
                    work.swap((i, j), (i, best));
                }
            }

            // Householder vector for column j below row j
            let x0 = work[(j, j)];
            let norm = best_norm.sqrt();
            if norm == 0.0 {
                reflectors.push(Array1::zeros(n - j));
                betas.push(0.0);
                continue;
            }
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let mut v: Array1<f64> = work.slice(s![j.., j]).to_owned();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };

            work[(j, j)] = alpha;
            for i in j + 1..n {
                work[(i, j)] = 0.0;
            }
            for c in j + 1..m {
                let dot: f64 = (j..n).map(|i| v[i - j] * work[(i, c)]).sum();
                let scale = beta * dot;
                for i in j..n {
                    work[(i, c)] -= scale * v[i - j];
                }
            }
            reflectors.push(v);
            betas.push(beta);
        }

        let r = work.slice(s![..k, ..]).to_owned();
        let top = r[(0, 0)].abs();
        let mut rank = 0;
        for j in 0..k {
            if r[(j, j)].abs() > RANK_RTOL * top {
                rank = j + 1;
            } else {
                break;
            }
        }
        PivotedQr {
            reflectors,
            betas,
            r,
            perm,
            rank,
            nrows: n,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Apply Q' in place.
    fn qt_apply(&self, b: &mut Array1<f64>) {
        for (j, v) in self.reflectors.iter().enumerate() {
            let beta = self.betas[j];
            if beta == 0.0 {
                continue;
            }
            let dot: f64 = (0..v.len()).map(|i| v[i] * b[j + i]).sum();
            let scale = beta * dot;
            for i in 0..v.len() {
                b[j + i] -= scale * v[i];
            }
        }
    }

    /// Apply Q in place.
    fn q_apply(&self, b: &mut Array1<f64>) {
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            let beta = self.betas[j];
            if beta == 0.0 {
                continue;
            }
            let dot: f64 = (0..v.len()).map(|i| v[i] * b[j + i]).sum();
            let scale = beta * dot;
            for i in 0..v.len() {
                b[j + i] -= scale * v[i];
            }
        }
    }

    /// Orthogonal projection of `y` onto the column space (rank-aware).
    pub(crate) fn project(&self, y: &Array1<f64>) -> Array1<f64> {
        let mut w = y.clone();
        self.qt_apply(&mut w);
        for i in self.rank..self.nrows {
            w[i] = 0.0;
        }
        self.q_apply(&mut w);
        w
    }

    /// Diagonal of the projection matrix, via the thin Q columns.
    pub(crate) fn projection_diagonals(&self) -> Array1<f64> {
        let n = self.nrows;
        let mut h = Array1::zeros(n);
        for c in 0..self.rank {
            let mut e = Array1::zeros(n);
            e[c] = 1.0;
            self.q_apply(&mut e);
            for i in 0..n {
                h[i] += e[i] * e[i];
            }
        }
        h
    }

    /// Minimum-norm least-squares solution (handles rank deficiency).
    pub(crate) fn solve(&self, y: &Array1<f64>) -> Array1<f64> {
        let m = self.r.ncols();
        let r = self.rank;
        let mut w = y.clone();
        self.qt_apply(&mut w);
        let mut z = Array1::zeros(m);
        if r > 0 {
            if r == m {
                // back substitution on R[..r, ..r]
                for i in (0..r).rev() {
                    let mut acc = w[i];
                    for j in i + 1..r {
                        acc -= self.r[(i, j)] * z[j];
                    }
                    z[i] = acc / self.r[(i, i)];
                }
            } else {
                // minimum-norm: QR of the transposed leading r rows of R
                let rt = {
                    let block = self.r.slice(s![..r, ..]);
                    let mut t = Array2::zeros((m, r));
                    for i in 0..r {
                        for j in 0..m {
                            t[(j, i)] = block[(i, j)];
                        }
                    }
                    t
                };
                let sub = PivotedQr::new_unpivoted(&rt);
                // z = Q2 * (R2'^-1 c), forward substitution on the transpose
                let mut c = Array1::zeros(r);
                for i in 0..r {
                    let mut acc = w[i];
                    for j in 0..i {
                        acc -= sub.r[(j, i)] * c[j];
                    }
                    c[i] = acc / sub.r[(i, i)];
                }
                let mut zfull = Array1::zeros(m);
                zfull.slice_mut(s![..r]).assign(&c);
                sub.q_apply(&mut zfull);
                z = zfull;
            }
        }
        // undo the column permutation
        let mut coefficients = Array1::zeros(m);
        for j in 0..m {
            coefficients[self.perm[j]] = z[j];
        }
        coefficients
    }

    /// Plain Householder QR without pivoting (used by the minimum-norm path).
    fn new_unpivoted(a: &Array2<f64>) -> PivotedQr {
        let (n, m) = a.dim();
        let k = n.min(m);
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(k);
        let mut betas = Vec::with_capacity(k);
        for j in 0..k {
            let norm: f64 = work
                .slice(s![j.., j])
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                reflectors.push(Array1::zeros(n - j));
                betas.push(0.0);
                continue;
            }
            let x0 = work[(j, j)];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let mut v: Array1<f64> = work.slice(s![j.., j]).to_owned();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            work[(j, j)] = alpha;
            for i in j + 1..n {
                work[(i, j)] = 0.0;
            }
            for c in j + 1..m {
                let dot: f64 = (j..n).map(|i| v[i - j] * work[(i, c)]).sum();
                let scale = beta * dot;
                for i in j..n {
                    work[(i, c)] -= scale * v[i - j];
                }
            }
            reflectors.push(v);
            betas.push(beta);
        }
        let r = work.slice(s![..k, ..]).to_owned();
        let top = r[(0, 0)].abs();
        let mut rank = 0;
        for j in 0..k {
            if r[(j, j)].abs() > RANK_RTOL * top {
                rank = j + 1;
            }
        }
        PivotedQr {
            reflectors,
            betas,
            r,
            perm: (0..m).collect(),
            rank,
            nrows: n,
        }
    }
}

/// Copy with every nonzero column scaled to unit Euclidean norm. Projections
/// are invariant to per-column scaling, and the relative rank test becomes
/// scale-free (mixed-scale designs from the rounding experiment otherwise
/// hide their small columns below the tolerance).
pub(crate) fn unit_scaled_columns(a: &Array2<f64>) -> Array2<f64> {
    let (n, m) = a.dim();
    let mut scaled = a.clone();
    for j in 0..m {
        let norm: f64 = scaled.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                scaled[(i, j)] /= norm;
            }
        }
    }
    scaled
}

/// Minimum-norm least squares of `response` on `design`.
pub fn least_squares(design: &Array2<f64>, response: &Array1<f64>) -> Result<LeastSquaresFit> {
    ensure_finite_matrix("design", design)?;
    ensure_finite_vector("response", response.as_slice().unwrap())?;
    let (n, _) = design.dim();
    if n == 0 {
        return Err(Error::EmptyInput("design has no rows".into()));
    }
    if n != response.len() {
        return Err(Error::Dimension(format!(
            "design has {n} rows but response has {} entries",
            response.len()
        )));
    }
    let qr = PivotedQr::new(design);
    let coefficients = qr.solve(response);
    let fitted = qr.project(response);
    let residuals = response - &fitted;
    Ok(LeastSquaresFit {
        coefficients,
        fitted,
        residuals,
        rank: qr.rank(),
    })
}

/// Diagonal of design (design'design)^-1 design'. Requires full column rank.
pub fn projection_diagonals(design: &Array2<f64>) -> Result<Array1<f64>> {
    ensure_finite_matrix("design", design)?;
    let (n, m) = design.dim();
    if n == 0 {
        return Err(Error::EmptyInput("design has no rows".into()));
    }
    let qr = PivotedQr::new(&unit_scaled_columns(design));
    if qr.rank() < m {
        return Err(Error::RankDeficient {
            what: format!("design ({n}x{m}, numerical rank {})", qr.rank()),
            tolerance: RANK_RTOL,
        });
    }
    Ok(qr.projection_diagonals())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvector columns.
pub fn symmetric_eig(matrix: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    ensure_finite_matrix("matrix", matrix)?;
    let (n, m) = matrix.dim();
    if n != m {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {n}x{m}"
        )));
    }
    let scale = matrix.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut max_gap = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            max_gap = max_gap.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    let tol = SYM_TOL * scale;
    if max_gap > tol {
        return Err(Error::Asymmetric {
            max_gap,
            tolerance: tol,
        });
    }

    let mut a = matrix.clone();
    for i in 0..n {
        for j in 0..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v: Array2<f64> = Array2::eye(n);

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let conv = 1e-15 * frob.max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= conv {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= conv * 1e-2 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| a[(i, i)]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Column-centered data mapped to identity sample covariance.
#[derive(Debug, Clone)]
pub struct Whitened {
    pub whitened: Array2<f64>,
    /// Symmetric inverse square root of the sample covariance; a direction
    /// eta in whitened space maps back to transform * eta.
    pub transform: Array2<f64>,
    pub means: Array1<f64>,
}

/// Center columns and map to identity sample covariance via the symmetric
/// inverse square root.
pub fn whiten(data: &Array2<f64>) -> Result<Whitened> {
    ensure_finite_matrix("data", data)?;
    let (n, m) = data.dim();
    if n < 2 {
        return Err(Error::EmptyInput("whitening needs at least 2 rows".into()));
    }
    let means = data.mean_axis(ndarray::Axis(0)).unwrap();
    let mut centered = data.clone();
    for j in 0..m {
        for i in 0..n {
            centered[(i, j)] -= means[j];
        }
    }
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    for j in 0..m {
        if cov[(j, j)] <= 0.0 {
            return Err(Error::ConstantColumn(format!("column {j}")));
        }
    }
    let (eigenvalues, vectors) = symmetric_eig(&cov)?;
    let top = eigenvalues[0];
    if top <= 0.0 || eigenvalues[m - 1] <= RANK_RTOL * top {
        return Err(Error::SingularCovariance(format!(
            "smallest eigenvalue {:.3e} below {RANK_RTOL:e} x largest {:.3e}",
            eigenvalues[m - 1],
            top
        )));
    }
    // transform = V diag(1/sqrt(lambda)) V'
    let mut scaled = vectors.clone();
    for j in 0..m {
        let inv_sqrt = 1.0 / eigenvalues[j].sqrt();
        for i in 0..m {
            scaled[(i, j)] *= inv_sqrt;
        }
    }
    let transform = scaled.dot(&vectors.t());
    let whitened = centered.dot(&transform);
    Ok(Whitened {
        whitened,
        transform,
        means,
    })
}

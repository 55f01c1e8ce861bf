//! Dense kernels used by the path algorithms and the Gibbs sampler.
//!
//! Everything here works on plain slices. Matrices that need to grow one
//! column at a time (active-set Gram factors, incremental QR) are stored in
//! packed or column-per-vector layouts so that appending never reallocates
//! the existing factor.

use crate::error::{Error, Result};

/// Largest tolerated ratio between the biggest and smallest pivot of a
/// triangular factor before a subset is declared rank deficient.
pub const CONDITION_LIMIT: f64 = 1e10;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Lower Cholesky factor in packed row-major storage: row `i` occupies
/// `data[i(i+1)/2 .. i(i+1)/2 + i + 1]`.
#[derive(Debug, Clone, Default)]
pub struct PackedCholesky {
    dim: usize,
    data: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl PackedCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(dim: usize) -> Self {
        Self {
            dim: 0,
            data: Vec::with_capacity(row_start(dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let s = row_start(i);
        &self.data[s..s + i + 1]
    }

    /// Factor a dense symmetric matrix given in row-major order (only the
    /// lower triangle is read).
    pub fn factor(a: &[f64], dim: usize) -> Result<Self> {
        assert_eq!(a.len(), dim * dim);
        let mut data = vec![0.0; row_start(dim)];
        for i in 0..dim {
            let si = row_start(i);
            for j in 0..=i {
                let sj = row_start(j);
                let s = {
                    let (head, tail) = data.split_at(si);
                    let ri = &tail[..j];
                    let rj = if j == i { ri } else { &head[sj..sj + j] };
                    a[i * dim + j] - dot(ri, rj)
                };
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    data[si + i] = s.sqrt();
                } else {
                    data[si + j] = s / data[sj + j];
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Grow the factor by one row/column. `cross` holds the new column's
    /// inner products with the existing columns and `diag` its squared norm.
    /// Returns the new pivot squared; fails if it is not safely positive
    /// relative to `diag`.
    pub fn append(&mut self, cross: &[f64], diag: f64) -> Result<f64> {
        assert_eq!(cross.len(), self.dim);
        let k = self.dim;
        let mut r = cross.to_vec();
        self.forward_solve(&mut r);
        let pivot_sq = diag - norm_sq(&r);
        if !(pivot_sq > diag / (CONDITION_LIMIT * CONDITION_LIMIT)) || !pivot_sq.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: k,
                value: pivot_sq,
            });
        }
        self.data.extend_from_slice(&r);
        self.data.push(pivot_sq.sqrt());
        self.dim += 1;
        Ok(pivot_sq)
    }

    /// Solve `L x = b` in place.
    pub fn forward_solve(&self, b: &mut [f64]) {
        for i in 0..self.dim {
            let row = self.row(i);
            let s = b[i] - dot(&row[..i], &b[..i]);
            b[i] = s / row[i];
        }
    }

    /// Solve `Lᵀ x = b` in place.
    pub fn backward_solve(&self, b: &mut [f64]) {
        for i in (0..self.dim).rev() {
            let xi = b[i] / self.row(i)[i];
            b[i] = xi;
            let row = self.row(i);
            for (bj, lij) in b[..i].iter_mut().zip(&row[..i]) {
                *bj -= lij * xi;
            }
        }
    }

    /// Solve `L Lᵀ x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        self.forward_solve(b);
        self.backward_solve(b);
    }
}

/// Least-squares solution through Householder QR on the listed columns of a
/// column-major design. Returns the coefficients (in `cols` order).
pub fn householder_lstsq(columns: &[&[f64]], y: &[f64], subset: &[usize]) -> Result<Vec<f64>> {
    let n = y.len();
    let k = columns.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > n {
        return Err(Error::RankDeficient {
            subset: subset.to_vec(),
            condition: f64::INFINITY,
        });
    }
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut qty = y.to_vec();
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let (done, rest) = a.split_at_mut(j + 1);
        let col = &mut done[j];
        let alpha = norm_sq(&col[j..]).sqrt();
        if alpha == 0.0 {
            return Err(Error::RankDeficient {
                subset: subset.to_vec(),
                condition: f64::INFINITY,
            });
        }
        let beta = if col[j] > 0.0 { -alpha } else { alpha };
        col[j] -= beta;
        let vnorm_sq = norm_sq(&col[j..]);
        diag[j] = beta;
        let v = &col[j..];
        for other in rest.iter_mut() {
            let f = 2.0 * dot(v, &other[j..]) / vnorm_sq;
            axpy(-f, v, &mut other[j..]);
        }
        let f = 2.0 * dot(v, &qty[j..]) / vnorm_sq;
        axpy(-f, v, &mut qty[j..]);
    }
    let (max, min) = diag.iter().fold((0.0f64, f64::INFINITY), |(mx, mn), d| {
        (mx.max(d.abs()), mn.min(d.abs()))
    });
    let condition = max / min;
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::RankDeficient {
            subset: subset.to_vec(),
            condition,
        });
    }
    // back substitution with R (strict upper part lives in a[j][i], i < j)
    let mut beta = qty[..k].to_vec();
    for i in (0..k).rev() {
        let mut s = beta[i];
        for j in i + 1..k {
            s -= a[j][i] * beta[j];
        }
        beta[i] = s / diag[i];
    }
    Ok(beta)
}

/// Thin QR built one column at a time with classical Gram-Schmidt and a
/// second reorthogonalization pass. Keeps the current residual of `y`.
#[derive(Debug, Clone)]
pub struct IncrementalQr {
    q: Vec<Vec<f64>>,
    /// `r[j]` is column j of R (length j + 1).
    r: Vec<Vec<f64>>,
    qty: Vec<f64>,
    y: Vec<f64>,
    resid: Vec<f64>,
}

impl IncrementalQr {
    pub fn new(y: &[f64]) -> Self {
        Self {
            q: Vec::new(),
            r: Vec::new(),
            qty: Vec::new(),
            y: y.to_vec(),
            resid: y.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    pub fn rss(&self) -> f64 {
        norm_sq(&self.resid)
    }

    /// Orthogonalize `col` against the current basis. Returns the new unit
    /// vector and the R column, or the relative size of the leftover when the
    /// column is numerically dependent.
    fn orthogonalize(&self, col: &[f64]) -> std::result::Result<(Vec<f64>, Vec<f64>), f64> {
        let k = self.q.len();
        let orig = norm_sq(col).sqrt();
        let mut z = col.to_vec();
        let mut rcol = vec![0.0; k + 1];
        for _pass in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = dot(qi, &z);
                rcol[i] += c;
                axpy(-c, qi, &mut z);
            }
        }
        let zn = norm_sq(&z).sqrt();
        if orig == 0.0 || zn <= orig / CONDITION_LIMIT {
            return Err(if orig == 0.0 { 0.0 } else { zn / orig });
        }
        for v in z.iter_mut() {
            *v /= zn;
        }
        rcol[k] = zn;
        Ok((z, rcol))
    }

    /// Append a column. On numerical dependence the factor is left untouched
    /// and the leftover ratio `‖z‖/‖x‖` is returned as the error.
    pub fn push(&mut self, col: &[f64]) -> std::result::Result<(), f64> {
        let (q, rcol) = self.orthogonalize(col)?;
        let c = dot(&q, &self.y);
        // residual stays orthogonal to the whole basis: project it directly
        let cr = dot(&q, &self.resid);
        axpy(-cr, &q, &mut self.resid);
        self.qty.push(c);
        self.q.push(q);
        self.r.push(rcol);
        Ok(())
    }

    /// Coefficients of the current least-squares fit (column order).
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.q.len();
        let mut beta = self.qty.clone();
        for i in (0..k).rev() {
            let mut s = beta[i];
            for j in i + 1..k {
                s -= self.r[j][i] * beta[j];
            }
            beta[i] = s / self.r[i][i];
        }
        beta
    }

    /// Fitted values `y - residual`.
    pub fn fitted(&self) -> Vec<f64> {
        self.y.iter().zip(&self.resid).map(|(a, b)| a - b).collect()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.q
    }
}

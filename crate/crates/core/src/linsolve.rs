//! Sparse matrix storage and a restarted GMRES with Jacobi preconditioning.

use crate::error::{Result, SolverError};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists. Duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in row {
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows((0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, di) in d.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    *di = self.vals[k];
                }
            }
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .find(|&k| self.cols[k] == j)
            .map_or(0.0, |k| self.vals[k])
    }

    /// Smallest value of `|a_kk| − Σ_{i≠k} |a_ik|` over all columns, with its column.
    pub fn column_dominance_margin(&self) -> (usize, f64) {
        let mut off = vec![0.0; self.n];
        let mut diag = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.cols[k];
                if c == i {
                    diag[c] += self.vals[k].abs();
                } else {
                    off[c] += self.vals[k].abs();
                }
            }
        }
        (0..self.n)
            .map(|c| (c, diag[c] - off[c]))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Smallest value of `|a_kk| − Σ_{j≠k} |a_kj|` over all rows, with its row.
    pub fn row_dominance_margin(&self) -> (usize, f64) {
        (0..self.n)
            .map(|i| {
                let mut m = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    if self.cols[k] == i {
                        m += self.vals[k].abs();
                    } else {
                        m -= self.vals[k].abs();
                    }
                }
                (i, m)
            })
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }
}

/// Controls of the Krylov solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_iter: 20_000,
            restart: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub target: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    a.matvec(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

/// Solve `A x = b` by right-preconditioned restarted GMRES, starting from `x0`.
///
/// Converged when `‖b − A x‖₂ ≤ max(rtol·‖b‖₂, atol)`.
pub fn gmres(a: &CsrMatrix, b: &[f64], x0: &[f64], cfg: &GmresConfig) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n;
    assert_eq!(b.len(), n);
    assert_eq!(x0.len(), n);
    let dinv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let target = (cfg.rtol * norm(b)).max(cfg.atol);
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut beta = true_residual(a, b, &x, &mut r);
    let mut history = vec![beta];
    let mut iters = 0;
    let m = cfg.restart.max(1);
    let mut basis: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; n]).collect();
    let mut hess = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];

    while beta > target {
        if iters >= cfg.max_iter {
            return Err(SolverError::LinearSolver {
                iterations: iters,
                residual: beta,
                target,
                history,
            });
        }
        for (bi, ri) in basis[0].iter_mut().zip(&r) {
            *bi = ri / beta;
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            // w = A M⁻¹ v_k
            for i in 0..n {
                z[i] = dinv[i] * basis[k][i];
            }
            a.matvec(&z, &mut w);
            // modified Gram-Schmidt
            for j in 0..=k {
                let hjk: f64 = w.iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                hess[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                    *wi -= hjk * vi;
                }
            }
            let hn = norm(&w);
            hess[k + 1][k] = hn;
            if hn > 0.0 {
                for (vi, wi) in basis[k + 1].iter_mut().zip(&w) {
                    *vi = wi / hn;
                }
            }
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let den = hess[k][k].hypot(hess[k + 1][k]);
            cs[k] = hess[k][k] / den;
            sn[k] = hess[k + 1][k] / den;
            hess[k][k] = den;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iters += 1;
            k_used = k + 1;
            history.push(g[k + 1].abs());
            if g[k + 1].abs() <= target || hn == 0.0 || iters >= cfg.max_iter {
                break;
            }
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += dinv[i] * yj * basis[j][i];
            }
        }
        beta = true_residual(a, b, &x, &mut r);
    }
    Ok((
        x,
        SolveStats {
            iterations: iters,
            residual: beta,
            target,
        },
    ))
}

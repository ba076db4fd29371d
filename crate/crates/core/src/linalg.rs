//! Dense factorization kernels used by the simplex solver and the
//! adjacency enumeration: LU with partial pivoting, plus a product-form
//! eta file so a basis can be updated cheaply between refactorizations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{LpError, Result};

/// LU factors of a square matrix with partial pivoting (PA = LU).
#[derive(Clone, Debug)]
pub struct LuFactors {
    /// Combined storage: unit lower triangle below the diagonal, U on and above.
    lu: Vec<f64>,
    /// perm[i] = row of the original matrix that ended up in position i.
    perm: Vec<usize>,
    n: usize,
}

impl LuFactors {
    pub fn factor(a: ArrayView2<'_, f64>, pivot_tol: f64) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU requires a square matrix");
        let mut lu = a.to_owned().into_raw_vec_and_offset().0;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            // Partial pivoting: largest magnitude in column k at or below row k.
            let mut p = k;
            let mut max = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > max {
                    max = v;
                    p = i;
                }
            }
            if max <= pivot_tol {
                return Err(LpError::SingularBasis { col: k, pivot: max });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    let (head, tail) = lu.split_at_mut(i * n);
                    let row_k = &head[k * n + k + 1..k * n + n];
                    let row_i = &mut tail[k + 1..n];
                    for (x, &u) in row_i.iter_mut().zip(row_k) {
                        *x -= factor * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm, n })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.n;
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        self.solve_permuted_in_place(x.as_slice_mut().unwrap());
        x
    }

    /// Forward/back substitution assuming `b` is already permuted.
    fn solve_permuted_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        let lu = &self.lu;
        for i in 1..n {
            let mut s = x[i];
            let row = &lu[i * n..i * n + i];
            for (j, &l) in row.iter().enumerate() {
                s -= l * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            let row = &lu[i * n + i + 1..(i + 1) * n];
            for (off, &u) in row.iter().enumerate() {
                s -= u * x[i + 1 + off];
            }
            x[i] = s / lu[i * n + i];
        }
    }

    /// Solve `A^T y = b`.
    pub fn solve_t(&self, b: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.n;
        let lu = &self.lu;
        // U^T z = b (forward), then L^T w = z (backward), then undo permutation.
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= lu[j * n + i] * z[j];
            }
            z[i] = s / lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= lu[j * n + i] * z[j];
            }
            z[i] = s;
        }
        let mut y = Array1::zeros(n);
        for i in 0..n {
            y[self.perm[i]] = z[i];
        }
        y
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// One product-form update: the basis inverse gains factor
/// `E = I + (eta - e_r) e_r^T` on the left.
#[derive(Clone, Debug)]
struct Eta {
    r: usize,
    eta: Vec<f64>,
}

/// Factorized representation of a simplex basis: an LU of the basis at the
/// last refactorization plus an eta file for the pivots applied since.
#[derive(Clone, Debug)]
pub struct BasisFactorization {
    lu: LuFactors,
    etas: Vec<Eta>,
}

impl BasisFactorization {
    pub fn new(basis_matrix: ArrayView2<'_, f64>, pivot_tol: f64) -> Result<Self> {
        Ok(Self {
            lu: LuFactors::factor(basis_matrix, pivot_tol)?,
            etas: Vec::new(),
        })
    }

    /// `B^{-1} v` (FTRAN).
    pub fn ftran(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut x = self.lu.solve(v);
        let xs = x.as_slice_mut().unwrap();
        for e in &self.etas {
            let xr = xs[e.r];
            if xr != 0.0 {
                for (i, &g) in e.eta.iter().enumerate() {
                    if i == e.r {
                        xs[i] = g * xr;
                    } else {
                        xs[i] += g * xr;
                    }
                }
            }
        }
        x
    }

    /// `B^{-T} v` (BTRAN).
    pub fn btran(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut w = v.to_owned();
        let ws = w.as_slice_mut().unwrap();
        for e in self.etas.iter().rev() {
            let mut dot = 0.0;
            for (i, &g) in e.eta.iter().enumerate() {
                dot += g * ws[i];
            }
            ws[e.r] = dot;
        }
        self.lu.solve_t(w.view())
    }

    /// Record the pivot that replaces basis position `r`, given the entering
    /// column's basis representation `d = B^{-1} a_q`. Returns false when the
    /// pivot element is too small to update stably; the caller must refactor.
    pub fn update(&mut self, r: usize, d: ArrayView1<'_, f64>, pivot_tol: f64) -> bool {
        let dr = d[r];
        if dr.abs() <= pivot_tol {
            return false;
        }
        let mut eta = vec![0.0; d.len()];
        for (i, &di) in d.iter().enumerate() {
            eta[i] = if i == r { 1.0 / dr } else { -di / dr };
        }
        self.etas.push(Eta { r, eta });
        true
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }
}

/// Numerical row rank and a maximal independent row subset via modified
/// Gram-Schmidt. The tolerance is relative to the largest row norm.
pub fn independent_rows(a: ArrayView2<'_, f64>, rel_tol: f64) -> (usize, Vec<usize>) {
    let m = a.nrows();
    let max_norm = (0..m)
        .map(|i| a.row(i).dot(&a.row(i)).sqrt())
        .fold(0.0_f64, f64::max);
    if max_norm == 0.0 {
        return (0, Vec::new());
    }
    let tol = rel_tol * max_norm;
    let mut basis: Vec<Array1<f64>> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..m {
        let mut r = a.row(i).to_owned();
        // Two MGS passes keep the residual orthogonal enough for rank decisions.
        for _ in 0..2 {
            for q in &basis {
                let proj = r.dot(q);
                r.scaled_add(-proj, q);
            }
        }
        let norm = r.dot(&r).sqrt();
        if norm > tol {
            r.mapv_inplace(|v| v / norm);
            basis.push(r);
            kept.push(i);
        }
    }
    (kept.len(), kept)
}

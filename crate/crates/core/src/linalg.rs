//! Numerical kernels shared by the Liouville-space code: compressed sparse
//! rows, the dense matrix exponential and an adaptive Runge-Kutta stepper.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
        .pruned()
    }

    fn pruned(self) -> Self {
        if self.values.iter().all(|v| *v != ZERO) {
            return self;
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k] != ZERO {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &Mat<Complex64>) -> Self {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != ZERO {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((r, c, v));
            }
        }
        t
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => ZERO,
        }
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.nrows];
        self.matvec_into(x, &mut out);
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let t = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out.pruned()
    }

    pub fn add(&self, other: &CsrMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    /// Square submatrix on `indices` (sorted, unique).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.ncols];
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k;
        }
        let mut t = Vec::new();
        for (k, &r) in indices.iter().enumerate() {
            for (c, v) in self.row(r) {
                let p = position[c];
                if p != usize::MAX {
                    t.push((k, p, v));
                }
            }
        }
        Self::from_triplets(indices.len(), indices.len(), t)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, Complex64>> {
        let t: Vec<Triplet<usize, usize, Complex64>> = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Solver(format!("sparse assembly: {e:?}")))
    }
}

/// Sparse Kronecker product `a ⊗ b`.
pub fn kron(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
    let bt = b.triplets();
    let mut t = Vec::with_capacity(a.nnz() * b.nnz());
    for (ra, ca, va) in a.triplets() {
        for &(rb, cb, vb) in &bt {
            t.push((ra * b.nrows + rb, ca * b.ncols + cb, va * vb));
        }
    }
    CsrMatrix::from_triplets(a.nrows * b.nrows, a.ncols * b.ncols, t)
}

pub fn sparse_identity(n: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(
        n,
        n,
        (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect(),
    )
}

/// Matrix 1-norm (max column sum).
fn norm_one(m: &Mat<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential by Padé-13 scaling and squaring.
pub fn expm(a: &Mat<Complex64>) -> Mat<Complex64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;

    let n = a.nrows();
    let norm = norm_one(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = Complex64::new(0.5f64.powi(s), 0.0);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let id = Mat::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c: [f64; 4], x6: &Mat<Complex64>, x4: &Mat<Complex64>, x2: &Mat<Complex64>, x0: &Mat<Complex64>| {
        Mat::from_fn(n, n, |i, j| {
            x6[(i, j)] * c[0] + x4[(i, j)] * c[1] + x2[(i, j)] * c[2] + x0[(i, j)] * c[3]
        })
    };
    let zero = Mat::<Complex64>::zeros(n, n);
    let u_inner = &a6 * lin([B[13], B[11], B[9], 0.0], &a6, &a4, &a2, &zero);
    let u_poly = &u_inner + lin([B[7], B[5], B[3], B[1]], &a6, &a4, &a2, &id);
    let u = &a * &u_poly;
    let v_inner = &a6 * lin([B[12], B[10], B[8], 0.0], &a6, &a4, &a2, &zero);
    let v = &v_inner + lin([B[6], B[4], B[2], B[0]], &a6, &a4, &a2, &id);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Dormand-Prince 5(4) integrator for `y' = f(y)` with complex state.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    h: Option<f64>,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 10_000_000,
            h: None,
        }
    }

    /// Advances `y` from `t0` to `t1` in place.
    pub fn integrate<F>(&mut self, f: &mut F, y: &mut [Complex64], t0: f64, t1: f64) -> Result<()>
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
            ],
            [
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
            ],
            [
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        // Fifth-order weights minus fourth-order weights.
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];

        let span = t1 - t0;
        if span < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "cannot integrate backwards from {t0} to {t1}"
            )));
        }
        if span == 0.0 {
            return Ok(());
        }
        let n = y.len();
        let mut k: Vec<Vec<Complex64>> = vec![vec![ZERO; n]; 7];
        let mut stage = vec![ZERO; n];
        let mut y_new = vec![ZERO; n];
        f(y, &mut k[0]);

        let mut h = self.h.unwrap_or_else(|| {
            let ynorm = y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            let fnorm = k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
            if fnorm > 0.0 {
                0.01 * ynorm / fnorm
            } else {
                span
            }
        });
        let mut t = t0;
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Solver(format!(
                    "step limit exceeded at t = {t:.6}"
                )));
            }
            let last = t + h >= t1;
            let h_step = if last { t1 - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = ZERO;
                    for (j, a) in A[s][..s].iter().enumerate() {
                        if *a != 0.0 {
                            acc += k[j][i] * *a;
                        }
                    }
                    stage[i] = y[i] + acc * h_step;
                }
                f(&stage, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }
            // k[6] is f(y_new) by construction (first-same-as-last).
            let mut err_acc = 0.0;
            for i in 0..n {
                let mut e = ZERO;
                for (j, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += k[j][i] * *w;
                    }
                }
                let e = e * h_step;
                let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                err_acc += (e.norm() / sc).powi(2);
            }
            let err = (err_acc / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Solver(format!("non-finite state at t = {t:.6}")));
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + h_step };
                y.copy_from_slice(&y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last || h_step >= h {
                    h = h_step * fac;
                }
            } else {
                h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * span.max(t.abs()) {
                    return Err(Error::Solver(format!(
                        "step size underflow at t = {t:.6}"
                    )));
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }
}

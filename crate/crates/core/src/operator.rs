//! Dense operators on (composite, Fock-truncated) Hilbert spaces.
//!
//! All operators are dense complex matrices. Composite spaces order their
//! subsystems left to right, so slot 0 is the most significant tensor factor.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default Hermiticity tolerance, relative to the Frobenius norm.
pub const HERMITICITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tensor-product structure of a Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(subsystem_dims: Vec<usize>) -> Result<Self> {
        if subsystem_dims.is_empty() {
            return Err(Error::InvalidDimension("no subsystems".into()));
        }
        if let Some(&d) = subsystem_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(format!(
                "subsystem dimension {d} is below 2"
            )));
        }
        Ok(Self {
            dims: subsystem_dims,
        })
    }

    /// A space with a single subsystem of dimension `dim`.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

/// Square complex matrix acting on a [`HilbertSpace`].
#[derive(Clone, Debug)]
pub struct Operator {
    space: HilbertSpace,
    mat: Mat<Complex64>,
}

impl Operator {
    pub fn new(space: HilbertSpace, mat: Mat<Complex64>) -> Result<Self> {
        let d = space.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if mat.nrows() != d {
                    mat.nrows()
                } else {
                    mat.ncols()
                },
            });
        }
        Ok(Self { space, mat })
    }

    /// Operator on a single unstructured space of dimension `mat.nrows()`.
    pub fn from_matrix(mat: Mat<Complex64>) -> Result<Self> {
        let space = HilbertSpace::single(mat.nrows())?;
        Self::new(space, mat)
    }

    pub fn from_fn(space: HilbertSpace, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let d = space.total_dim();
        Self {
            space,
            mat: Mat::from_fn(d, d, f),
        }
    }

    /// Builds an operator from nested rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Self::from_matrix(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            mat: Mat::zeros(d, d),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            mat: Mat::from_fn(d, d, |i, j| if i == j { ONE } else { ZERO }),
        }
    }

    pub fn diagonal(space: &HilbertSpace, diag: &[Complex64]) -> Result<Self> {
        let d = space.total_dim();
        if diag.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: diag.len(),
            });
        }
        Ok(Self::from_fn(space.clone(), |i, j| {
            if i == j {
                diag[i]
            } else {
                ZERO
            }
        }))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Mat<Complex64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let d = self.dim();
        Self {
            space: self.space.clone(),
            mat: Mat::from_fn(d, d, |i, j| self.mat[(i, j)] * factor),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// `Tr{self * other}` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> Complex64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.mat[(i, k)] * other.mat[(k, i)];
            }
        }
        acc
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for j in 0..d {
            for i in 0..d {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    /// `‖self − self†‖_F`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for j in 0..d {
            for i in 0..d {
                acc += (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Hermitian within `tol` relative to the Frobenius norm.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.frobenius_norm()
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermitian_deviation();
        let tolerance = tol * self.frobenius_norm();
        if deviation <= tolerance {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation,
                tolerance,
            })
        }
    }

    /// Returns `(self + self†)/2`.
    pub fn hermitize(&self) -> Self {
        let d = self.dim();
        Self {
            space: self.space.clone(),
            mat: Mat::from_fn(d, d, |i, j| {
                (self.mat[(i, j)] + self.mat[(j, i)].conj()) * 0.5
            }),
        }
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        if !self.is_hermitian(HERMITICITY_TOL.max(tol)) {
            return false;
        }
        match HermitianEigen::new(&self.hermitize()) {
            Ok(eig) => eig.values.first().map_or(true, |&v| v >= -tol),
            Err(_) => false,
        }
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (self - other).max_abs()
    }

    /// Column-stacked vectorization, index `i + j*d`.
    pub fn vectorize(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                v.push(self.mat[(i, j)]);
            }
        }
        v
    }

    pub fn from_vectorized(space: &HilbertSpace, v: &[Complex64]) -> Result<Self> {
        let d = space.total_dim();
        if v.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: v.len(),
            });
        }
        Ok(Self::from_fn(space.clone(), |i, j| v[i + j * d]))
    }

    fn same_space(&self, other: &Operator) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimensions differ ({} vs {})",
            self.dim(),
            other.dim()
        );
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.same_space(rhs);
        Operator {
            space: self.space.clone(),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.same_space(rhs);
        Operator {
            space: self.space.clone(),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.same_space(rhs);
        Operator {
            space: self.space.clone(),
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Eigendecomposition `op = V diag(values) V†` of a Hermitian operator,
/// eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<Complex64>,
    space: HilbertSpace,
}

impl HermitianEigen {
    pub fn new(op: &Operator) -> Result<Self> {
        op.check_hermitian(HERMITICITY_TOL)?;
        let h = op.hermitize();
        let evd = h
            .mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Solver(format!("Hermitian eigendecomposition: {e:?}")))?;
        let s = evd.S().column_vector();
        let values = (0..op.dim()).map(|i| s[i].re).collect();
        Ok(Self {
            values,
            vectors: evd.U().to_owned(),
            space: op.space.clone(),
        })
    }

    /// Rotates `op` into the eigenbasis: `V† op V`.
    pub fn to_eigenbasis(&self, op: &Operator) -> Mat<Complex64> {
        self.vectors.adjoint() * &op.mat * &self.vectors
    }

    /// Rotates an eigenbasis matrix back: `V m V†`.
    pub fn from_eigenbasis(&self, m: &Mat<Complex64>) -> Operator {
        Operator {
            space: self.space.clone(),
            mat: &self.vectors * m * self.vectors.adjoint(),
        }
    }

    /// `V diag(f(values)) V†`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> Complex64) -> Operator {
        let d = self.values.len();
        let fv: Vec<Complex64> = self.values.iter().map(|&e| f(e)).collect();
        let scaled = Mat::from_fn(d, d, |i, j| self.vectors[(i, j)] * fv[j]);
        Operator {
            space: self.space.clone(),
            mat: &scaled * self.vectors.adjoint(),
        }
    }
}

/// Truncated ladder operators `(a, a†)` on `n` Fock levels.
pub fn make_ladder(n: usize) -> Result<(Operator, Operator)> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "Fock truncation {n} is below 2"
        )));
    }
    let space = HilbertSpace::single(n)?;
    let a = Operator::from_fn(space, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let ad = a.dagger();
    Ok((a, ad))
}

/// Embeds a single-subsystem operator into `space` at `slot`, with identities
/// on all other subsystems.
pub fn embed(op: &Operator, slot: usize, space: &HilbertSpace) -> Result<Operator> {
    let dims = space.subsystem_dims();
    if slot >= dims.len() {
        return Err(Error::InvalidDimension(format!(
            "slot {slot} out of range for {} subsystems",
            dims.len()
        )));
    }
    if op.dim() != dims[slot] {
        return Err(Error::DimensionMismatch {
            expected: dims[slot],
            found: op.dim(),
        });
    }
    let right: usize = dims[slot + 1..].iter().product();
    let local = dims[slot];
    Ok(Operator::from_fn(space.clone(), |r, c| {
        let (rl, rest_r) = (r / (local * right), r % (local * right));
        let (cl, rest_c) = (c / (local * right), c % (local * right));
        let (rs, rr) = (rest_r / right, rest_r % right);
        let (cs, cr) = (rest_c / right, rest_c % right);
        if rl == cl && rr == cr {
            op.mat[(rs, cs)]
        } else {
            ZERO
        }
    }))
}

/// Applies a real scalar function to a Hermitian operator through its
/// eigendecomposition. Non-finite function values are domain errors.
pub fn operator_function(op: &Operator, f: impl Fn(f64) -> f64) -> Result<Operator> {
    let eig = HermitianEigen::new(op)?;
    if let Some(&bad) = eig.values.iter().find(|&&e| !f(e).is_finite()) {
        return Err(Error::Domain { eigenvalue: bad });
    }
    Ok(eig.reconstruct(|e| Complex64::new(f(e), 0.0)))
}

/// Complex-valued variant of [`operator_function`].
pub fn operator_function_complex(
    op: &Operator,
    f: impl Fn(f64) -> Complex64,
) -> Result<Operator> {
    let eig = HermitianEigen::new(op)?;
    if let Some(&bad) = eig.values.iter().find(|&&e| {
        let v = f(e);
        !(v.re.is_finite() && v.im.is_finite())
    }) {
        return Err(Error::Domain { eigenvalue: bad });
    }
    Ok(eig.reconstruct(f))
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    /// Default validation tolerance for trace and positivity.
    pub const TOL: f64 = 1e-8;

    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, Self::TOL)
    }

    pub fn with_tolerance(op: Operator, tol: f64) -> Result<Self> {
        op.check_hermitian(tol.max(HERMITICITY_TOL))?;
        let tr = op.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::InvalidState(format!(
                "trace {:.12} differs from 1",
                tr
            )));
        }
        let eig = HermitianEigen::new(&op.hermitize())?;
        if let Some(&min) = eig.values.first() {
            if min < -tol {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { op })
    }

    /// Hermitizes and trace-normalizes before validating.
    pub fn normalized(op: Operator) -> Result<Self> {
        let h = op.hermitize();
        let tr = h.trace().re;
        if !(tr.abs() > f64::MIN_POSITIVE) {
            return Err(Error::InvalidState("zero trace".into()));
        }
        Self::new(h.scale_real(1.0 / tr))
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let d = space.total_dim() as f64;
        Self {
            op: Operator::identity(space).scale_real(1.0 / d),
        }
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn space(&self) -> &HilbertSpace {
        self.op.space()
    }

    /// `Tr{A ρ}`.
    pub fn expectation(&self, a: &Operator) -> Complex64 {
        a.trace_product(&self.op)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(HermitianEigen::new(&self.op.hermitize())?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum())
    }
}

/// Gibbs state `exp(−βH)/Z`, evaluated with a spectral shift.
pub fn thermal_state(h: &Operator, beta: f64) -> Result<DensityOperator> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let eig = HermitianEigen::new(h)?;
    let e0 = eig.values[0];
    let z: f64 = eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    let mut op = eig.reconstruct(|e| Complex64::new((-beta * (e - e0)).exp() / z, 0.0));
    // Exact unit trace after the reconstruction roundoff.
    let tr = op.trace().re;
    op = op.hermitize().scale_real(1.0 / tr);
    Ok(DensityOperator { op })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sigma_z() -> Operator {
        Operator::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap()
    }

    #[test]
    fn ladder_smallest_truncation() {
        let (a, ad) = make_ladder(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0));
        assert_eq!(a.get(1, 0), c(0.0));
        assert_eq!(a.get(0, 0), c(0.0));
        assert_eq!(ad.get(1, 0), c(1.0));
    }

    #[test]
    fn ladder_rejects_tiny_truncation() {
        assert!(matches!(make_ladder(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn number_operator_is_diagonal() {
        let (a, ad) = make_ladder(4).unwrap();
        let n = &ad * &a;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert!((n.get(i, j) - c(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ladder_commutator_has_truncation_defect() {
        let (a, ad) = make_ladder(4).unwrap();
        let comm = a.commutator(&ad);
        let want = [1.0, 1.0, 1.0, -3.0];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { want[i] } else { 0.0 };
                assert!((comm.get(i, j) - c(w)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn embed_identity_and_sigma_z() {
        let space = HilbertSpace::new(vec![2, 3]).unwrap();
        let id2 = Operator::identity(&HilbertSpace::single(2).unwrap());
        let e = embed(&id2, 0, &space).unwrap();
        assert_eq!(e.max_abs_diff(&Operator::identity(&space)), 0.0);

        let space = HilbertSpace::new(vec![2, 2]).unwrap();
        let z = embed(&sigma_z(), 0, &space).unwrap();
        let want = Operator::diagonal(&space, &[c(1.0), c(1.0), c(-1.0), c(-1.0)]).unwrap();
        assert_eq!(z.max_abs_diff(&want), 0.0);
    }

    #[test]
    fn embedded_disjoint_slots_commute_exactly() {
        let space = HilbertSpace::new(vec![2, 2]).unwrap();
        let (a, ad) = make_ladder(2).unwrap();
        let a1 = embed(&a, 1, &space).unwrap();
        let ad0 = embed(&ad, 0, &space).unwrap();
        assert_eq!(a1.commutator(&ad0).max_abs(), 0.0);
    }

    #[test]
    fn embed_dimension_mismatch() {
        let space = HilbertSpace::new(vec![2, 3]).unwrap();
        let (a, _) = make_ladder(2).unwrap();
        assert!(matches!(
            embed(&a, 1, &space),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn hilbert_space_rejects_trivial_factor() {
        assert!(HilbertSpace::new(vec![2, 1]).is_err());
        assert_eq!(HilbertSpace::new(vec![2, 3, 4]).unwrap().total_dim(), 24);
    }

    #[test]
    fn operator_function_basics() {
        let op = Operator::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let id = operator_function(&op, |x| x).unwrap();
        assert!(id.max_abs_diff(&op) < 1e-14);
        let sq = operator_function(&op, f64::sqrt).unwrap();
        let want = Operator::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!(sq.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn operator_function_domain_error_names_eigenvalue() {
        let op = Operator::from_real_rows(&[vec![0.0, 0.0], vec![0.0, 0.5]]).unwrap();
        match operator_function(&op, f64::ln) {
            Err(Error::Domain { eigenvalue }) => assert!(eigenvalue.abs() < 1e-15),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn operator_function_rejects_non_hermitian() {
        let (a, _) = make_ladder(3).unwrap();
        assert!(matches!(
            operator_function(&a, |x| x),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn entropy_of_thermal_qubit_matches_eigenvalues() {
        let h = Operator::from_real_rows(&[vec![0.0, 0.0], vec![0.0, 1.3]]).unwrap();
        let rho = thermal_state(&h, 0.8).unwrap();
        let s_op = operator_function(rho.as_operator(), |p| -p.ln()).unwrap();
        let s = rho.expectation(&s_op).re;
        let p1 = (-0.8f64 * 1.3).exp() / (1.0 + (-0.8f64 * 1.3).exp());
        let p0 = 1.0 - p1;
        let want = -p0 * p0.ln() - p1 * p1.ln();
        assert!((s - want).abs() < 1e-13);
        assert!((rho.von_neumann_entropy().unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn thermal_state_infinite_temperature() {
        let h = Operator::from_real_rows(&[
            vec![0.3, 0.1, 0.0],
            vec![0.1, -0.2, 0.4],
            vec![0.0, 0.4, 1.0],
        ])
        .unwrap();
        let rho = thermal_state(&h, 1e-12).unwrap();
        let mixed = DensityOperator::maximally_mixed(h.space());
        assert!(rho.as_operator().max_abs_diff(mixed.as_operator()) < 1e-9);
    }

    #[test]
    fn thermal_two_level_populations() {
        let (w, beta) = (1.7, 0.6);
        let h = Operator::from_real_rows(&[vec![0.0, 0.0], vec![0.0, w]]).unwrap();
        let rho = thermal_state(&h, beta).unwrap();
        let b = (-beta * w).exp();
        assert!((rho.as_operator().get(0, 0).re - 1.0 / (1.0 + b)).abs() < 1e-15);
        assert!((rho.as_operator().get(1, 1).re - b / (1.0 + b)).abs() < 1e-15);
        assert_eq!(rho.as_operator().trace(), c(1.0));
    }

    #[test]
    fn thermal_oscillator_occupation() {
        let (a, ad) = make_ladder(60).unwrap();
        let n = &ad * &a;
        let h = n.scale_real(2.4);
        let rho = thermal_state(&h, 0.164).unwrap();
        let occ = rho.expectation(&n).re;
        let want = 1.0 / (0.3936f64.exp() - 1.0);
        assert!((occ - want).abs() < 1e-8, "{occ} vs {want}");
        assert!((want - 2.07336).abs() < 1e-4, "{want}");
    }

    #[test]
    fn thermal_state_rejects_nonpositive_beta() {
        let h = sigma_z();
        assert!(thermal_state(&h, 0.0).is_err());
        assert!(thermal_state(&h, -1.0).is_err());
    }

    #[test]
    fn density_operator_validation() {
        let space = HilbertSpace::single(2).unwrap();
        assert!(DensityOperator::new(Operator::identity(&space)).is_err());
        let bad = Operator::diagonal(&space, &[c(1.5), c(-0.5)]).unwrap();
        assert!(matches!(
            DensityOperator::new(bad),
            Err(Error::InvalidState(_))
        ));
        assert!(DensityOperator::new(Operator::identity(&space).scale_real(0.5)).is_ok());
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let op = Operator::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let v = op.vectorize();
        assert_eq!(v, vec![c(1.0), c(3.0), c(2.0), c(4.0)]);
        let back = Operator::from_vectorized(op.space(), &v).unwrap();
        assert_eq!(back.max_abs_diff(&op), 0.0);
    }
}

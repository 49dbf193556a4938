//! Lindblad generators as superoperators on column-stacked operators.
//!
//! Superoperators are stored sparsely. Every solve and propagation first
//! restricts the generator to the smallest coordinate subspace that is
//! invariant under it and contains the relevant seed (see [`Sector`]); for
//! number-conserving Fock models this is the block of operators `|n⟩⟨m|`
//! with equal total excitation, which keeps truncated two-mode models small.

mod propagate;
mod steady;
mod two_oscillator;

pub(crate) use propagate::Flow;
pub use propagate::{
    evolve_heisenberg, evolve_state, forward_expectations, heisenberg_expectations,
    two_time_correlation, DENSE_PROPAGATION_LIMIT, PROPAGATION_RTOL,
};
pub use steady::{first_order_correction, steady_state, SteadyStateSolution, GAP_EIGEN_LIMIT};
pub use two_oscillator::{
    build_two_oscillator_model, coupling_hamiltonian, energy1_observable, fock_leakage,
    suggest_truncation, thermal_top_population, TwoOscillatorOperators,
};

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, sparse_identity, CsrMatrix};
use crate::operator::{HilbertSpace, Operator, HERMITICITY_TOL};

/// Operator-vectorization convention used by a [`Superoperator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vectorization {
    /// `vec(X)[i + j*d] = X[i, j]`, so `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
    ColumnStacking,
}

impl Vectorization {
    pub fn id(&self) -> &'static str {
        match self {
            Vectorization::ColumnStacking => "column-stacking",
        }
    }
}

/// A dissipation channel `rate · (L ρ L† − ½{L†L, ρ})`.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub operator: Operator,
    pub rate: f64,
}

/// Hamiltonian plus jump operators defining a GKLS generator.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    space: HilbertSpace,
    h0: Operator,
    jumps: Vec<JumpOperator>,
    hbar: f64,
}

impl LindbladModel {
    pub fn new(h0: Operator, jumps: Vec<JumpOperator>, hbar: f64) -> Result<Self> {
        h0.check_hermitian(HERMITICITY_TOL)?;
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        for (k, j) in jumps.iter().enumerate() {
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "jump {k} has rate {}",
                    j.rate
                )));
            }
            if j.operator.dim() != h0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: h0.dim(),
                    found: j.operator.dim(),
                });
            }
        }
        Ok(Self {
            space: h0.space().clone(),
            h0,
            jumps,
            hbar,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Same model with the Hamiltonian replaced.
    pub fn with_hamiltonian(&self, h0: Operator) -> Result<Self> {
        Self::new(h0, self.jumps.clone(), self.hbar)
    }
}

/// Linear map on vectorized operators, stored sparsely (`d² × d²`).
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    space: HilbertSpace,
    matrix: CsrMatrix,
    convention: Vectorization,
}

impl Superoperator {
    pub fn zero(space: &HilbertSpace) -> Self {
        let n = space.total_dim().pow(2);
        Self {
            space: space.clone(),
            matrix: CsrMatrix::zeros(n, n),
            convention: Vectorization::ColumnStacking,
        }
    }

    pub fn from_matrix(space: &HilbertSpace, matrix: CsrMatrix) -> Result<Self> {
        let n = space.total_dim().pow(2);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            space: space.clone(),
            matrix,
            convention: Vectorization::ColumnStacking,
        })
    }

    /// `X ↦ A X`.
    pub fn left(a: &Operator) -> Self {
        let m = kron(&sparse_identity(a.dim()), &CsrMatrix::from_dense(a.matrix()));
        Self::from_matrix(a.space(), m).unwrap()
    }

    /// `X ↦ X B`.
    pub fn right(b: &Operator) -> Self {
        let bt = CsrMatrix::from_dense(&b.matrix().transpose().to_owned());
        Self::from_matrix(b.space(), kron(&bt, &sparse_identity(b.dim()))).unwrap()
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &Operator, b: &Operator) -> Self {
        let bt = CsrMatrix::from_dense(&b.matrix().transpose().to_owned());
        let m = kron(&bt, &CsrMatrix::from_dense(a.matrix()));
        Self::from_matrix(a.space(), m).unwrap()
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn liouville_dim(&self) -> usize {
        self.dim().pow(2)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn convention(&self) -> Vectorization {
        self.convention
    }

    pub fn apply(&self, x: &Operator) -> Operator {
        assert_eq!(x.dim(), self.dim(), "operator dimension mismatch");
        let v = self.matrix.matvec(&x.vectorize());
        Operator::from_vectorized(x.space(), &v).unwrap()
    }

    /// Hilbert-Schmidt adjoint: `Tr{X† L(Y)} = Tr{(L† X)† Y}`.
    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            convention: self.convention,
        }
    }

    pub fn add(&self, other: &Superoperator) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            space: self.space.clone(),
            matrix: self.matrix.add(&other.matrix),
            convention: self.convention,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(Complex64::new(factor, 0.0)),
            convention: self.convention,
        }
    }

    /// `self + eps * other`.
    pub fn perturbed(&self, other: &Superoperator, eps: f64) -> Self {
        self.add(&other.scale(eps))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    pub fn to_dense(&self) -> faer::Mat<Complex64> {
        self.matrix.to_dense()
    }

    /// Liouville indices of the diagonal entries `|i⟩⟨i|`.
    pub fn diagonal_indices(&self) -> Vec<usize> {
        let d = self.dim();
        (0..d).map(|i| i + i * d).collect()
    }

    /// Smallest coordinate subspace invariant under this map that contains
    /// `seeds`.
    pub fn sector(&self, seeds: impl IntoIterator<Item = usize>) -> Sector {
        Sector::closure(&self.matrix, seeds)
    }
}

/// Adjoint of a superoperator.
pub fn adjoint(superop: &Superoperator) -> Superoperator {
    superop.adjoint()
}

/// GKLS generator `−(i/ħ)[H₀, ·] + Σ rate (L · L† − ½{L†L, ·})`.
pub fn build_lindblad_generator(model: &LindbladModel) -> Superoperator {
    let mut gen = build_commutator_generator_unchecked(&model.h0, model.hbar);
    for jump in model.jumps.iter().filter(|j| j.rate > 0.0) {
        let l = &jump.operator;
        let ld = l.dagger();
        let ldl = &ld * l;
        let dissipator = Superoperator::sandwich(l, &ld)
            .add(&Superoperator::left(&ldl).scale(-0.5))
            .add(&Superoperator::right(&ldl).scale(-0.5));
        gen = gen.add(&dissipator.scale(jump.rate));
    }
    gen
}

/// `X ↦ −(i/ħ)[H, X]`.
pub fn build_commutator_generator(h: &Operator, hbar: f64) -> Result<Superoperator> {
    h.check_hermitian(HERMITICITY_TOL)?;
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(build_commutator_generator_unchecked(h, hbar))
}

fn build_commutator_generator_unchecked(h: &Operator, hbar: f64) -> Superoperator {
    let comm = Superoperator::left(h).add(&Superoperator::right(h).scale(-1.0));
    Superoperator {
        space: comm.space,
        matrix: comm.matrix.scale(Complex64::new(0.0, -1.0 / hbar)),
        convention: comm.convention,
    }
}

/// Coordinate subspace of Liouville space closed under a sparse map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    indices: Vec<usize>,
    full_dim: usize,
}

impl Sector {
    pub fn full(full_dim: usize) -> Self {
        Self {
            indices: (0..full_dim).collect(),
            full_dim,
        }
    }

    /// Breadth-first closure of `seeds` along the nonzero pattern of `m`:
    /// column `j` of `m` feeds every row `i` with `m[i, j] ≠ 0`.
    pub fn closure(m: &CsrMatrix, seeds: impl IntoIterator<Item = usize>) -> Self {
        let n = m.ncols();
        let columns = m.adjoint();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(j) = queue.pop_front() {
            for (i, _) in columns.row(j) {
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        Self {
            indices: (0..n).filter(|&i| seen[i]).collect(),
            full_dim: n,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn restrict(&self, full: &[Complex64]) -> Vec<Complex64> {
        self.indices.iter().map(|&i| full[i]).collect()
    }

    pub fn embed(&self, part: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.full_dim];
        for (&i, &v) in self.indices.iter().zip(part) {
            out[i] = v;
        }
        out
    }

    pub fn restrict_matrix(&self, m: &CsrMatrix) -> CsrMatrix {
        if self.indices.len() == self.full_dim {
            m.clone()
        } else {
            m.restrict(&self.indices)
        }
    }
}

/// Nonzero positions of a vectorized operator.
pub(crate) fn support(v: &[Complex64]) -> impl Iterator<Item = usize> + '_ {
    v.iter()
        .enumerate()
        .filter(|(_, x)| **x != Complex64::new(0.0, 0.0))
        .map(|(i, _)| i)
}

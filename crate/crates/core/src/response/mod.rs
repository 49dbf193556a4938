//! Steady-state response functions.
//!
//! Every generator-based form reduces to `R(τ) = Tr{A(τ) Y}` with
//! `A(τ) = e^{L₀†τ} A` and a form-specific source operator `Y`:
//!
//! | form  | source `Y`                                 |
//! |-------|--------------------------------------------|
//! | R1    | `(L₁π₀) π₀⁻¹ π₀`                           |
//! | R2    | `−L₀ π₁`                                   |
//! | R2alt | `−L₀ (π₊ε − π₋ε)/(2ε)` from fresh solves   |
//! | R3    | `(i/ħ)[π₀, H_I]`                           |
//!
//! so several forms share a single Heisenberg propagation.

mod convolution;
mod kubo;

pub use convolution::{convolve, nonlinear_reference, PerturbationProtocol, Trajectory};
pub use kubo::{
    entropy_operator, generalized_kubo, kubo_transform_thermal, log_derivative, response_kubo_k1,
    response_kubo_k2, DEGENERACY_TOL,
};

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::liouvillian::{
    build_commutator_generator, build_lindblad_generator, heisenberg_expectations, steady_state,
    LindbladModel, Superoperator,
};
use crate::operator::{operator_function, DensityOperator, Operator};

/// Imaginary parts above this (relative to `max(1, max |R|)`) abort a curve.
pub const IMAGINARY_TOL: f64 = 1e-8;

/// Smallest steady-state eigenvalue for which `π₀⁻¹` is formed.
pub const RANK_TOL: f64 = 1e-12;

/// Default finite-difference step of the susceptibility form.
pub const DEFAULT_EPS_FD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormLabel {
    R1,
    R2,
    R2alt,
    R3,
    K1,
    K2,
    Analytic,
}

impl FormLabel {
    /// All labels in column order.
    pub const ALL: [FormLabel; 7] = [
        FormLabel::R1,
        FormLabel::R2,
        FormLabel::R2alt,
        FormLabel::R3,
        FormLabel::K1,
        FormLabel::K2,
        FormLabel::Analytic,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            FormLabel::R1 => "R1",
            FormLabel::R2 => "R2",
            FormLabel::R2alt => "R2alt",
            FormLabel::R3 => "R3",
            FormLabel::K1 => "K1",
            FormLabel::K2 => "K2",
            FormLabel::Analytic => "analytic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.id() == s)
    }
}

impl fmt::Display for FormLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Response function sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseCurve {
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
    pub label: FormLabel,
}

impl ResponseCurve {
    pub fn new(label: FormLabel, tau: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(tau.len(), values.len());
        Self { tau, values, label }
    }

    /// Checks the imaginary residue and keeps the real part.
    pub fn from_complex(label: FormLabel, tau: &[f64], values: &[Complex64]) -> Result<Self> {
        let scale = values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let bound = IMAGINARY_TOL * scale.max(1.0);
        if let Some((k, v)) = values.iter().enumerate().max_by(|a, b| a.1.im.abs().total_cmp(&b.1.im.abs())) {
            if v.im.abs() > bound {
                return Err(Error::ImaginaryResidue {
                    residue: v.im.abs(),
                    tau: tau[k],
                    scale,
                });
            }
        }
        Ok(Self::new(label, tau.to_vec(), values.iter().map(|v| v.re).collect()))
    }

    pub fn zeros(label: FormLabel, grid: &TimeGrid) -> Self {
        Self::new(label, grid.points().to_vec(), vec![0.0; grid.len()])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ResponseCurve) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `Tr{A(τ) Y}` for each `(label, Y)`, sharing one Heisenberg propagation.
pub fn response_from_sources(
    a: &Operator,
    l0: &Superoperator,
    grid: &TimeGrid,
    sources: &[(FormLabel, Operator)],
) -> Result<Vec<ResponseCurve>> {
    let probes: Vec<&Operator> = sources.iter().map(|(_, y)| y).collect();
    let raw = heisenberg_expectations(l0, a, grid, &probes)?;
    sources
        .iter()
        .zip(raw)
        .map(|((label, _), values)| ResponseCurve::from_complex(*label, grid.points(), &values))
        .collect()
}

/// `(L₁π₀) π₀⁻¹ π₀`, or a rank error when `π₀` is not invertible.
pub fn agarwal_source(l1: &Superoperator, pi0: &DensityOperator) -> Result<Operator> {
    let min = pi0.min_eigenvalue()?;
    if !(min > RANK_TOL) {
        return Err(Error::RankDeficient { min_eigenvalue: min });
    }
    let inv = operator_function(pi0.as_operator(), |p| 1.0 / p)?;
    let b1 = &l1.apply(pi0.as_operator()) * &inv;
    Ok(&b1 * pi0.as_operator())
}

pub fn entropy_source(l0: &Superoperator, pi1: &Operator) -> Operator {
    l0.apply(pi1).scale_real(-1.0)
}

pub fn commutator_source(h_i: &Operator, pi0: &DensityOperator, hbar: f64) -> Operator {
    pi0.as_operator()
        .commutator(h_i)
        .scale(Complex64::new(0.0, 1.0 / hbar))
}

/// `−L₀ ∂_ε π_ε`, the ε-derivative taken by central differences of two
/// independent steady-state solves.
pub fn susceptibility_source(
    model: &LindbladModel,
    l0: &Superoperator,
    h_i: &Operator,
    eps_fd: f64,
) -> Result<Operator> {
    if !(eps_fd > 0.0 && eps_fd.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite-difference step {eps_fd}")));
    }
    let l1 = build_commutator_generator(h_i, model.hbar())?;
    let plus = steady_state(&l0.perturbed(&l1, eps_fd))?.pi0;
    let minus = steady_state(&l0.perturbed(&l1, -eps_fd))?.pi0;
    let dpi = (plus.as_operator() - minus.as_operator()).scale_real(0.5 / eps_fd);
    Ok(l0.apply(&dpi).scale_real(-1.0))
}

/// Agarwal form `R₁(τ) = Tr{A(τ) B₁ π₀}` with `B₁ = (L₁π₀) π₀⁻¹`.
pub fn response_agarwal(
    a: &Operator,
    l0: &Superoperator,
    l1: &Superoperator,
    pi0: &DensityOperator,
    grid: &TimeGrid,
) -> Result<ResponseCurve> {
    let y = agarwal_source(l1, pi0)?;
    single(a, l0, grid, FormLabel::R1, y)
}

/// `R₂(τ) = −Tr{A(τ) L₀π₁}`.
pub fn response_entropy(
    a: &Operator,
    l0: &Superoperator,
    pi1: &Operator,
    grid: &TimeGrid,
) -> Result<ResponseCurve> {
    single(a, l0, grid, FormLabel::R2, entropy_source(l0, pi1))
}

/// `R(τ) = −d_τ ∂_ε Tr{A(τ) π_ε}|₀`, independent of `π₁`.
pub fn response_susceptibility(
    a: &Operator,
    model: &LindbladModel,
    h_i: &Operator,
    grid: &TimeGrid,
    eps_fd: f64,
) -> Result<ResponseCurve> {
    let l0 = build_lindblad_generator(model);
    let y = susceptibility_source(model, &l0, h_i, eps_fd)?;
    single(a, &l0, grid, FormLabel::R2alt, y)
}

/// `R₃(τ) = (i/ħ) Tr{π₀ [H_I, A(τ)]}`.
pub fn response_commutator(
    a: &Operator,
    h_i: &Operator,
    l0: &Superoperator,
    pi0: &DensityOperator,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<ResponseCurve> {
    single(a, l0, grid, FormLabel::R3, commutator_source(h_i, pi0, hbar))
}

fn single(
    a: &Operator,
    l0: &Superoperator,
    grid: &TimeGrid,
    label: FormLabel,
    y: Operator,
) -> Result<ResponseCurve> {
    Ok(response_from_sources(a, l0, grid, &[(label, y)])?.remove(0))
}

use faer::Mat;
use num_complex::Complex64;

use super::{FormLabel, ResponseCurve, RANK_TOL};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::operator::{operator_function, thermal_state, DensityOperator, HermitianEigen, Operator};

/// Eigenvalue pairs closer than this (relative to the largest) use the
/// removable-singularity limit of the transform kernels.
pub const DEGENERACY_TOL: f64 = 1e-12;

fn positive_spectrum(pi0: &DensityOperator) -> Result<HermitianEigen> {
    let eig = HermitianEigen::new(pi0.as_operator())?;
    let min = eig.values[0];
    if !(min > RANK_TOL) {
        return Err(Error::RankDeficient { min_eigenvalue: min });
    }
    Ok(eig)
}

/// Applies `X'_ij ↦ X'_ij k(i, j)` in the eigenbasis of `eig`.
fn transform(eig: &HermitianEigen, x: &Operator, k: impl Fn(usize, usize) -> f64) -> Operator {
    let xe = eig.to_eigenbasis(x);
    let n = xe.nrows();
    eig.from_eigenbasis(&Mat::from_fn(n, n, |i, j| xe[(i, j)] * k(i, j)))
}

/// `X̄ = ∫₀¹ π₀^λ X π₀^{−λ} dλ`.
pub fn generalized_kubo(x: &Operator, pi0: &DensityOperator) -> Result<Operator> {
    let eig = positive_spectrum(pi0)?;
    let p = &eig.values;
    let pmax = p[p.len() - 1];
    Ok(transform(&eig, x, |i, j| {
        if (p[i] - p[j]).abs() < DEGENERACY_TOL * pmax {
            1.0
        } else {
            let u = p[i].ln() - p[j].ln();
            u.exp_m1() / u
        }
    }))
}

/// `∂_ε ln π_ε|₀`, the operator `X` with `∫₀¹ π₀^λ X π₀^{1−λ} dλ = π₁`.
pub fn log_derivative(pi1: &Operator, pi0: &DensityOperator) -> Result<Operator> {
    let eig = positive_spectrum(pi0)?;
    let p = &eig.values;
    let pmax = p[p.len() - 1];
    Ok(transform(&eig, pi1, |i, j| {
        if (p[i] - p[j]).abs() < DEGENERACY_TOL * pmax {
            1.0 / p[j]
        } else {
            let u = p[i].ln() - p[j].ln();
            u / (p[j] * u.exp_m1())
        }
    }))
}

/// `S = −ln π`.
pub fn entropy_operator(pi: &DensityOperator) -> Result<Operator> {
    operator_function(pi.as_operator(), |p| if p > 0.0 { -p.ln() } else { f64::NAN })
}

/// `H̃_I = β⁻¹ ∫₀^β e^{−λH₀} H_I e^{λH₀} dλ`.
pub fn kubo_transform_thermal(h0: &Operator, h_i: &Operator, beta: f64) -> Result<Operator> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("inverse temperature {beta}")));
    }
    let eig = HermitianEigen::new(h0)?;
    let e = &eig.values;
    Ok(transform(&eig, h_i, |i, j| thermal_kernel(beta * (e[i] - e[j]))))
}

/// `(1 − e^{−y})/y`, equal to 1 at `y = 0`.
fn thermal_kernel(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        -(-y).exp_m1() / y
    }
}

/// Closed-system data in the eigenbasis of `H₀`.
struct ClosedSystem {
    energies: Vec<f64>,
    populations: Vec<f64>,
    a: Mat<Complex64>,
}

impl ClosedSystem {
    fn new(a: &Operator, h0: &Operator, beta: f64) -> Result<(Self, HermitianEigen)> {
        let gibbs = thermal_state(h0, beta)?;
        let eig = HermitianEigen::new(h0)?;
        let rho = eig.to_eigenbasis(gibbs.as_operator());
        let populations = (0..rho.nrows()).map(|i| rho[(i, i)].re).collect();
        let sys = Self {
            energies: eig.values.clone(),
            populations,
            a: eig.to_eigenbasis(a),
        };
        Ok((sys, eig))
    }

    /// `e^{i(E_m − E_n)τ/ħ}`.
    fn phase(&self, m: usize, n: usize, tau: f64, hbar: f64) -> Complex64 {
        Complex64::from_polar(1.0, (self.energies[m] - self.energies[n]) * tau / hbar)
    }
}

/// `R_K2(τ) = (i/ħ)⟨[H_I, A(τ)]⟩` for unitary dynamics in the Gibbs state.
pub fn response_kubo_k2(
    a: &Operator,
    h0: &Operator,
    h_i: &Operator,
    beta: f64,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<ResponseCurve> {
    let (sys, eig) = ClosedSystem::new(a, h0, beta)?;
    let h = eig.to_eigenbasis(h_i);
    let d = sys.energies.len();
    let i_hbar = Complex64::new(0.0, 1.0 / hbar);
    let values: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&tau| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..d {
                for n in 0..d {
                    let dp = sys.populations[m] - sys.populations[n];
                    if dp != 0.0 {
                        acc += h[(m, n)] * sys.a[(n, m)] * sys.phase(n, m, tau, hbar) * dp;
                    }
                }
            }
            i_hbar * acc
        })
        .collect();
    ResponseCurve::from_complex(FormLabel::K2, grid.points(), &values)
}

/// `R_K1(τ) = β d_τ⟨A(τ) H̃_I⟩` for the perturbation `H₀ + εH_I`, with the
/// τ-derivative taken exactly.
pub fn response_kubo_k1(
    a: &Operator,
    h0: &Operator,
    h_i: &Operator,
    beta: f64,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<ResponseCurve> {
    let (sys, eig) = ClosedSystem::new(a, h0, beta)?;
    let ht = eig.to_eigenbasis(&kubo_transform_thermal(h0, h_i, beta)?);
    let d = sys.energies.len();
    let prefactor = Complex64::new(0.0, beta / hbar);
    let values: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&tau| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..d {
                for n in 0..d {
                    let de = sys.energies[m] - sys.energies[n];
                    if de != 0.0 {
                        acc += sys.a[(m, n)] * ht[(n, m)] * sys.phase(m, n, tau, hbar) * (sys.populations[m] * de);
                    }
                }
            }
            prefactor * acc
        })
        .collect();
    ResponseCurve::from_complex(FormLabel::K1, grid.points(), &values)
}

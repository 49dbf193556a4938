use super::{JumpOperator, LindbladModel};
use crate::error::{Error, Result};
use crate::gaussian::{occupations, steady_covariance, TwoOscillatorParams};
use crate::operator::{embed, make_ladder, DensityOperator, HilbertSpace, Operator};

/// Ladder and number operators of two Fock-truncated modes.
#[derive(Clone, Debug)]
pub struct TwoOscillatorOperators {
    pub space: HilbertSpace,
    pub a1: Operator,
    pub a2: Operator,
    pub n1: Operator,
    pub n2: Operator,
}

impl TwoOscillatorOperators {
    pub fn new(truncations: (usize, usize)) -> Result<Self> {
        let (n1, n2) = truncations;
        let space = HilbertSpace::new(vec![n1, n2])?;
        let (b1, _) = make_ladder(n1)?;
        let (b2, _) = make_ladder(n2)?;
        let a1 = embed(&b1, 0, &space)?;
        let a2 = embed(&b2, 1, &space)?;
        let num1 = &a1.dagger() * &a1;
        let num2 = &a2.dagger() * &a2;
        Ok(Self { space, a1, a2, n1: num1, n2: num2 })
    }
}

/// `ħ(a₁a₂† + a₁†a₂)`.
pub fn coupling_hamiltonian(ops: &TwoOscillatorOperators, hbar: f64) -> Operator {
    let x = &ops.a1 * &ops.a2.dagger();
    (&x + &x.dagger()).scale_real(hbar)
}

/// `β₁ħω₁ a₁†a₁`.
pub fn energy1_observable(params: &TwoOscillatorParams, ops: &TwoOscillatorOperators) -> Operator {
    ops.n1.scale_real(params.beta1 * params.hbar * params.omega1)
}

/// Fock-truncated model: detuned oscillators with coupling `λ`, each damped
/// at rate `γ` by a bath of occupation `n_j`.
pub fn build_two_oscillator_model(
    params: &TwoOscillatorParams,
    truncations: (usize, usize),
) -> Result<LindbladModel> {
    params.validate()?;
    let (nb1, nb2, _) = occupations(params)?;
    let ops = TwoOscillatorOperators::new(truncations)?;
    let hbar = params.hbar;
    let h0 = &(&ops.n1.scale_real(hbar * params.omega1) + &ops.n2.scale_real(hbar * params.omega2()))
        + &coupling_hamiltonian(&ops, hbar).scale_real(params.lambda);
    let g = params.gamma;
    let jumps = vec![
        JumpOperator { operator: ops.a1.clone(), rate: g * (nb1 + 1.0) },
        JumpOperator { operator: ops.a1.dagger(), rate: g * nb1 },
        JumpOperator { operator: ops.a2.clone(), rate: g * (nb2 + 1.0) },
        JumpOperator { operator: ops.a2.dagger(), rate: g * nb2 },
    ];
    LindbladModel::new(h0, jumps, hbar)
}

/// Population of the highest retained level of each subsystem.
pub fn fock_leakage(state: &DensityOperator) -> Vec<f64> {
    let dims = state.space().subsystem_dims().to_vec();
    let op = state.as_operator();
    let mut out = vec![0.0; dims.len()];
    for i in 0..op.dim() {
        let p = op.get(i, i).re;
        let mut rest = i;
        for (k, &d) in dims.iter().enumerate().rev() {
            if rest % d == d - 1 {
                out[k] += p;
            }
            rest /= d;
        }
    }
    out
}

/// Top-level population `n̄^{N−1}/(n̄+1)^N` of a thermal mode kept to `N` levels.
pub fn thermal_top_population(nbar: f64, levels: usize) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    let r = nbar / (nbar + 1.0);
    r.powi(levels as i32 - 1) / (nbar + 1.0)
}

/// Smallest truncations whose estimated top-level population is below `tol`.
///
/// Each reduced steady state of the model is thermal with the exact mean
/// occupation of that mode.
pub fn suggest_truncation(params: &TwoOscillatorParams, tol: f64) -> Result<(usize, usize)> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("leakage tolerance {tol}")));
    }
    let cov = steady_covariance(params)?;
    let levels = |nbar: f64| {
        let mut n = 2usize;
        while thermal_top_population(nbar, n) >= tol {
            n += 1;
        }
        n
    };
    Ok((levels(cov.occupation1), levels(cov.occupation2)))
}

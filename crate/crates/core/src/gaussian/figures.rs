use super::params::TwoOscillatorParams;
use super::{classical_factor, response_closed_form, response_unitary, steady_covariance};
use crate::error::{Error, Result};

/// Convergence threshold of the refined trapezoidal rule.
pub const QUADRATURE_TOL: f64 = 1e-8;

const MIN_LEVEL: u32 = 4;
const MAX_LEVEL: u32 = 24;

/// Trapezoidal rule on `[a, b]`, halving the step until successive estimates
/// differ by less than `tol` relative to the integral scale.
pub fn integrate_refined(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let width = b - a;
    let (fa, fb) = (f(a), f(b));
    let mut fmax = fa.abs().max(fb.abs());
    let sum_ends = 0.5 * (fa + fb);
    let mut interior = 0.0;
    let mut n = 1usize;
    let mut estimate = width * sum_ends;
    for level in 1..=MAX_LEVEL {
        let h = width / (2 * n) as f64;
        let mut added = 0.0;
        for k in 0..n {
            let v = f(a + (2 * k + 1) as f64 * h);
            fmax = fmax.max(v.abs());
            added += v;
        }
        interior += added;
        n *= 2;
        let next = h * (sum_ends + interior);
        let delta = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && delta <= tol * (estimate.abs() + width * fmax) {
            break;
        }
    }
    estimate
}

/// `ε ∫₀ᵗ R(τ) dτ` on each of `times` (nondecreasing, starting at 0).
pub fn response_trajectory(r: impl Fn(f64) -> f64, eps: f64, times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    let mut prev = times.first().copied().unwrap_or(0.0);
    for &t in times {
        acc += integrate_refined(&r, prev, t, QUADRATURE_TOL);
        prev = t;
        out.push(eps * acc);
    }
    out
}

/// `∫₀^∞ R(τ) dτ` of the closed-form response.
pub fn response_integral(params: &TwoOscillatorParams) -> Result<f64> {
    if params.gamma <= 0.0 {
        return Err(Error::InvalidParameter(
            "response integral diverges without damping".into(),
        ));
    }
    response_closed_form(params, 0.0)?;
    let horizon = 50.0 / params.gamma;
    // Piecewise over oscillation periods keeps each panel smooth.
    let period = 2.0 * std::f64::consts::PI / params.z().max(params.gamma);
    let panels = (horizon / period).ceil().max(1.0) as usize;
    let h = horizon / panels as f64;
    let f = |t: f64| response_closed_form(params, t).unwrap();
    Ok((0..panels)
        .map(|k| integrate_refined(f, k as f64 * h, (k + 1) as f64 * h, QUADRATURE_TOL))
        .sum())
}

/// `⟨A⟩` at coupling `λ + ε` minus `⟨A⟩` at `λ`, from the exact steady state.
pub fn perturbed_shift(params: &TwoOscillatorParams) -> Result<f64> {
    let a = params.beta1 * params.hbar * params.omega1;
    let base = steady_covariance(params)?.occupation1;
    let pert = steady_covariance(&params.with_lambda(params.lambda + params.eps))?.occupation1;
    Ok(a * (pert - base))
}

/// Named columns of equally long numeric series.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn table(columns: &[&str], series: Vec<Vec<f64>>) -> FigureTable {
    let n = series[0].len();
    FigureTable {
        columns: columns.iter().map(|s| s.to_string()).collect(),
        rows: (0..n).map(|i| series.iter().map(|s| s[i]).collect()).collect(),
    }
}

/// Steady-state, equilibrium and undamped trajectories with the perturbed
/// stationary shift.
///
/// Columns: `t, steady_state, equilibrium, unitary, perturbed_value,
/// linear_asymptote`.
pub fn figure2(params: &TwoOscillatorParams, times: &[f64]) -> Result<FigureTable> {
    let eps = params.eps;
    let steady = response_trajectory(|t| response_closed_form(params, t).unwrap(), eps, times);
    let equilibrium = vec![0.0; times.len()];
    let z = params.z();
    // ∫₀ᵗ sin(zτ) dτ = (1 − cos zt)/z
    let amplitude = response_unitary(params, std::f64::consts::FRAC_PI_2 / z)?;
    let unitary: Vec<f64> = times
        .iter()
        .map(|t| eps * amplitude * (1.0 - (z * t).cos()) / z)
        .collect();
    let shift = perturbed_shift(params)?;
    let asymptote = eps * response_integral(params)?;
    Ok(table(
        &["t", "steady_state", "equilibrium", "unitary", "perturbed_value", "linear_asymptote"],
        vec![
            times.to_vec(),
            steady,
            equilibrium,
            unitary,
            vec![shift; times.len()],
            vec![asymptote; times.len()],
        ],
    ))
}

/// Quantum and classical trajectories.
///
/// Columns: `t, quantum, classical, ratio, perturbed_value,
/// classical_asymptote`. `ratio` is classical over quantum, with its `t → 0`
/// limit in the first row.
pub fn figure3(params: &TwoOscillatorParams, times: &[f64]) -> Result<FigureTable> {
    let eps = params.eps;
    let kappa = classical_factor(params)?;
    let quantum = response_trajectory(|t| response_closed_form(params, t).unwrap(), eps, times);
    let classical = response_trajectory(
        |t| kappa * response_closed_form(params, t).unwrap(),
        eps,
        times,
    );
    let ratio = quantum
        .iter()
        .zip(&classical)
        .map(|(q, c)| if *q == 0.0 { kappa } else { c / q })
        .collect();
    let shift = perturbed_shift(params)?;
    let classical_asymptote = kappa * eps * response_integral(params)?;
    Ok(table(
        &["t", "quantum", "classical", "ratio", "perturbed_value", "classical_asymptote"],
        vec![
            times.to_vec(),
            quantum,
            classical,
            ratio,
            vec![shift; times.len()],
            vec![classical_asymptote; times.len()],
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::response_unitary;

    #[test]
    fn refined_trapezoid_on_exponential() {
        let v = integrate_refined(|t| (-t).exp(), 0.0, 3.0, QUADRATURE_TOL);
        assert!((v - (1.0 - (-3.0f64).exp())).abs() < 1e-7);
        let traj = response_trajectory(|t| (-t).exp(), 1.0, &[0.0, 0.5, 1.0, 4.0]);
        for (t, v) in [0.0, 0.5, 1.0, 4.0].iter().zip(&traj) {
            assert!((v - (1.0 - (-t as f64).exp())).abs() < 1e-6);
        }
    }

    #[test]
    fn integral_equals_coupling_derivative() {
        // ∫₀^∞ R = d⟨A⟩/dλ, by central differences of the exact occupation
        let p = TwoOscillatorParams::fig3();
        let h = 1e-5;
        let occ = |l: f64| steady_covariance(&p.with_lambda(l)).unwrap().occupation1;
        let a = p.beta1 * p.omega1;
        let deriv = a * (occ(p.lambda + h) - occ(p.lambda - h)) / (2.0 * h);
        let integral = response_integral(&p).unwrap();
        assert!((integral - deriv).abs() < 1e-7 * deriv.abs(), "{integral} vs {deriv}");
    }

    #[test]
    fn figure2_columns() {
        let p = TwoOscillatorParams::fig2();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let fig = figure2(&p, &times).unwrap();
        assert!(fig.column("equilibrium").unwrap().iter().all(|v| *v == 0.0));
        let u = fig.column("unitary").unwrap();
        let z = p.z();
        let direct = response_trajectory(|t| response_unitary(&p, t).unwrap(), p.eps, &times);
        for (a, b) in u.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(z > 0.0);
    }

    #[test]
    fn figure3_ratio_is_constant() {
        let p = TwoOscillatorParams::fig3();
        let times: Vec<f64> = (0..300).map(|k| k as f64 * 0.04).collect();
        let fig = figure3(&p, &times).unwrap();
        let ratio = fig.column("ratio").unwrap();
        let r0 = ratio[0];
        for r in ratio {
            assert!((r - r0).abs() <= 1e-10 * r0.abs());
        }
    }
}

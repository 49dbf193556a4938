//! Exact solution of the two-oscillator model: Gaussian steady state,
//! second-moment dynamics and closed-form response functions.
//!
//! Moments are written in the basis
//! `(a₁†a₁, a₁², a₁†², a₂†a₂, a₂², a₂†², a₁a₂, a₁a₂†, a₁†a₂, a₁†a₂†)` and obey
//! `d/dt v = M v + w`. Phase-space coordinates use `x = (a + a†)/√2`,
//! `p = (a − a†)/(i√2)`, so the vacuum covariance is `½·I`.

mod figures;
mod params;

pub use figures::{
    figure2, figure3, integrate_refined, perturbed_shift, response_integral, response_trajectory,
    FigureTable, QUADRATURE_TOL,
};
pub use params::{bose, occupations, TwoOscillatorParams};

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Labels of the ten second moments, in the order used by [`MomentSystem`].
pub const MOMENT_LABELS: [&str; 10] = [
    "a1^dag a1",
    "a1^2",
    "a1^dag^2",
    "a2^dag a2",
    "a2^2",
    "a2^dag^2",
    "a1 a2",
    "a1 a2^dag",
    "a1^dag a2",
    "a1^dag a2^dag",
];

/// Stationary covariance matrix over `(x₁, p₁, x₂, p₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSolution {
    pub sigma: [[f64; 4]; 4],
    pub zeta: f64,
    pub d: f64,
    pub c: f64,
    /// `⟨a₁†a₁⟩`.
    pub occupation1: f64,
    /// `⟨a₂†a₂⟩`.
    pub occupation2: f64,
    /// `⟨a₁a₂†⟩`.
    pub coherence: Complex64,
}

#[derive(Clone, Debug)]
pub struct MomentSystem {
    pub m: Mat<Complex64>,
    pub w: Vec<Complex64>,
    pub labels: [&'static str; 10],
}

impl MomentSystem {
    /// `v* = −M⁻¹ w`.
    pub fn stationary(&self) -> Vec<Complex64> {
        let rhs = Mat::from_fn(10, 1, |i, _| -self.w[i]);
        let x = self.m.partial_piv_lu().solve(&rhs);
        (0..10).map(|i| x[(i, 0)]).collect()
    }
}

/// Heisenberg evolution `a₁†a₁(t) = f a₁†a₁ + g a₁² + … + r a₁†a₂† + s·I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjointCoefficients {
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
    pub j: Complex64,
    pub l: Complex64,
    pub m: Complex64,
    pub n: Complex64,
    pub p: Complex64,
    pub q: Complex64,
    pub r: Complex64,
    pub s: f64,
}

impl AdjointCoefficients {
    /// Operator coefficients in [`MOMENT_LABELS`] order.
    pub fn row(&self) -> [Complex64; 10] {
        [
            self.f, self.g, self.h, self.j, self.l, self.m, self.n, self.p, self.q, self.r,
        ]
    }
}

pub fn steady_covariance(params: &TwoOscillatorParams) -> Result<CovarianceSolution> {
    params.validate()?;
    let TwoOscillatorParams { gamma: g, delta: dl, lambda: l, .. } = *params;
    if g == 0.0 {
        return Err(Error::InvalidParameter(
            "gamma = 0: undamped oscillators have no steady state".into(),
        ));
    }
    let (n1, n2, _) = occupations(params)?;
    let gd = g * g + dl * dl;
    let zeta = gd / (4.0 * l * l + gd);
    let d = 2.0 * l * l * (n1 + n2 + 1.0) / gd;
    let c = l * (n1 - n2) / gd;
    let s1 = zeta * (d + n1 + 0.5);
    let s2 = zeta * (d + n2 + 0.5);
    let (xx, xp) = (-zeta * dl * c, -zeta * g * c);
    let sigma = [
        [s1, 0.0, xx, xp],
        [0.0, s1, -xp, xx],
        [xx, -xp, s2, 0.0],
        [xp, xx, 0.0, s2],
    ];
    Ok(CovarianceSolution {
        sigma,
        zeta,
        d,
        c,
        occupation1: s1 - 0.5,
        occupation2: s2 - 0.5,
        coherence: Complex64::new(-dl, g) * (zeta * c),
    })
}

pub fn moment_system(params: &TwoOscillatorParams) -> Result<MomentSystem> {
    params.validate()?;
    let (n1, n2, _) = occupations(params)?;
    let (w1, w2, g, l) = (params.omega1, params.omega2(), params.gamma, params.lambda);
    let (w12, dw) = (w1 + w2, w1 - w2);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let o = c(0.0, 0.0);
    let il = c(0.0, l);
    let rows: [[Complex64; 10]; 10] = [
        [c(-g, 0.0), o, o, o, o, o, o, il, -il, o],
        [o, c(-g, -2.0 * w1), o, o, o, o, -il * 2.0, o, o, o],
        [o, o, c(-g, 2.0 * w1), o, o, o, o, o, o, il * 2.0],
        [o, o, o, c(-g, 0.0), o, o, o, -il, il, o],
        [o, o, o, o, c(-g, -2.0 * w2), o, -il * 2.0, o, o, o],
        [o, o, o, o, o, c(-g, 2.0 * w2), o, o, o, il * 2.0],
        [o, -il, o, o, -il, o, c(-g, -w12), o, o, o],
        [il, o, o, -il, o, o, o, c(-g, -dw), o, o],
        [-il, o, o, il, o, o, o, o, c(-g, dw), o],
        [o, o, il, o, o, il, o, o, o, c(-g, w12)],
    ];
    let mut w = vec![o; 10];
    w[0] = c(n1 * g, 0.0);
    w[3] = c(n2 * g, 0.0);
    Ok(MomentSystem {
        m: Mat::from_fn(10, 10, |i, j| rows[i][j]),
        w,
        labels: MOMENT_LABELS,
    })
}

pub fn adjoint_coefficients(params: &TwoOscillatorParams, t: f64) -> Result<AdjointCoefficients> {
    params.validate()?;
    let z = params.z();
    if z == 0.0 {
        return Err(Error::InvalidParameter(
            "delta = lambda = 0: degenerate model, z = 0".into(),
        ));
    }
    let (n1, n2, _) = occupations(params)?;
    let TwoOscillatorParams { gamma: g, delta: dl, lambda: l, .. } = *params;
    let (z2, l2) = (z * z, l * l);
    let decay = (-g * t).exp();
    let (cz, sz) = ((z * t).cos(), (z * t).sin());
    let f = decay * (dl * dl + 2.0 * l2 + 2.0 * l2 * cz) / z2;
    let j = -2.0 * l2 * decay * (cz - 1.0) / z2;
    let p = Complex64::new(-dl + dl * cz, z * sz) * (l * decay / z2);
    let q = Complex64::new(-dl + dl * cz, -z * sz) * (l * decay / z2);
    let sum = n1 + n2;
    let stationary = n1 * (g * g + dl * dl) + 2.0 * l2 * sum;
    let s = decay / (z2 * z * (g * g + z2))
        * (z * (z2 * (g * t).exp() * stationary - (g * g + z2) * (dl * dl * n1 + 2.0 * l2 * sum))
            - 2.0 * g * l2 * (n1 - n2) * (g * z * cz - z2 * sz));
    let zero = Complex64::new(0.0, 0.0);
    Ok(AdjointCoefficients {
        f: f.into(),
        g: zero,
        h: zero,
        j: j.into(),
        l: zero,
        m: zero,
        n: zero,
        p,
        q,
        r: zero,
        s,
    })
}

/// Steady-state response of `β₁ħω₁a₁†a₁` to the coupling perturbation.
pub fn response_closed_form(params: &TwoOscillatorParams, tau: f64) -> Result<f64> {
    params.validate()?;
    let (_, _, dn) = occupations(params)?;
    let TwoOscillatorParams { gamma: g, delta: dl, lambda: l, .. } = *params;
    if l == 0.0 {
        return Ok(0.0);
    }
    let z = params.z();
    let z2 = z * z;
    let a = params.beta1 * params.hbar * params.omega1;
    let shape = g * (dl * dl + 4.0 * l * l * (z * tau).cos()) + (g * g + dl * dl) * z * (z * tau).sin();
    Ok((-g * tau).exp() * shape * 2.0 * l * dn * a / (z2 * (g * g + z2)))
}

/// Undamped response, keeping the bath-defined occupations.
pub fn response_unitary(params: &TwoOscillatorParams, tau: f64) -> Result<f64> {
    params.validate()?;
    let (_, _, dn) = occupations(params)?;
    let z = params.z();
    if z == 0.0 {
        return Ok(0.0);
    }
    let a = params.beta1 * params.hbar * params.omega1;
    Ok(2.0 * params.lambda * dn * a * params.delta * params.delta / (z * z * z) * (z * tau).sin())
}

/// Ratio between the classical (Boltzmann) and quantum (Bose) responses.
pub fn classical_factor(params: &TwoOscillatorParams) -> Result<f64> {
    params.validate()?;
    let (_, _, dn) = occupations(params)?;
    if dn == 0.0 {
        return Err(Error::InvalidParameter(
            "equal bath occupations: equilibrium case, classical ratio undefined".into(),
        ));
    }
    let x1 = params.beta1 * params.omega1;
    let x2 = params.beta2 * params.omega2();
    Ok((x1 - x2) / x2 / (dn * params.beta1 * params.hbar * params.omega1))
}

pub fn response_classical(params: &TwoOscillatorParams, tau: f64) -> Result<f64> {
    Ok(classical_factor(params)? * response_closed_form(params, tau)?)
}

/// Response at zero detuning.
pub fn response_delta0(params: &TwoOscillatorParams, tau: f64) -> Result<f64> {
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "zero-detuning response requested with delta = {}",
            params.delta
        )));
    }
    let (_, _, dn) = occupations(params)?;
    let TwoOscillatorParams { gamma: g, lambda: l, .. } = *params;
    let a = params.beta1 * params.hbar * params.omega1;
    let x = 2.0 * l * tau;
    Ok((-g * tau).exp() * dn * g * (2.0 * l * x.cos() + g * x.sin()) * a / (g * g + 4.0 * l * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;
    use crate::operator::{HermitianEigen, Operator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig3() -> TwoOscillatorParams {
        TwoOscillatorParams::fig3()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn uncoupled_covariance_is_thermal() {
        let p = fig3().with_lambda(0.0);
        let (n1, n2, _) = occupations(&p).unwrap();
        let cov = steady_covariance(&p).unwrap();
        assert_eq!((cov.zeta, cov.d, cov.c), (1.0, 0.0, 0.0));
        let want = [n1 + 0.5, n1 + 0.5, n2 + 0.5, n2 + 0.5];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { want[i] } else { 0.0 };
                assert!((cov.sigma[i][j] - w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn equal_occupations_remove_cross_correlations() {
        let p = TwoOscillatorParams { delta: 0.0, beta2: 0.164, ..fig3() };
        let cov = steady_covariance(&p).unwrap();
        assert_eq!(cov.c, 0.0);
        assert_eq!(cov.sigma[0][2], 0.0);
        assert_eq!(cov.sigma[1][3], 0.0);
    }

    #[test]
    fn covariance_is_symmetric_and_physical() {
        for p in [fig3(), TwoOscillatorParams::fig2()] {
            let cov = steady_covariance(&p).unwrap();
            let omega = [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]];
            let m = Operator::from_fn(crate::operator::HilbertSpace::single(4).unwrap(), |i, j| {
                assert_eq!(cov.sigma[i][j], cov.sigma[j][i]);
                Complex64::new(cov.sigma[i][j], 0.5 * omega[i][j])
            });
            let eig = HermitianEigen::new(&m).unwrap();
            assert!(eig.values[0] >= -1e-12, "{:?}", eig.values);
        }
    }

    #[test]
    fn occupation_matches_rational_form() {
        let p = fig3();
        let (n1, n2, _) = occupations(&p).unwrap();
        let cov = steady_covariance(&p).unwrap();
        let (g, dl, l) = (p.gamma, p.delta, p.lambda);
        let gd = g * g + dl * dl;
        let want = (gd * n1 + 2.0 * l * l * (n1 + n2)) / (gd + 4.0 * l * l);
        assert!((cov.occupation1 - want).abs() < 1e-13);
        assert!((cov.occupation1 - 1.8964).abs() < 1e-4);
    }

    #[test]
    fn zero_damping_has_no_steady_state() {
        assert!(steady_covariance(&fig3().with_gamma(0.0)).is_err());
    }

    #[test]
    fn moment_eigenvalues_share_decay_rate() {
        for p in [fig3(), TwoOscillatorParams::fig2(), fig3().with_lambda(0.0)] {
            let ms = moment_system(&p).unwrap();
            let eig = ms.m.eigenvalues().unwrap();
            for e in eig {
                assert!((e.re + p.gamma).abs() <= 1e-12, "{e}");
            }
        }
    }

    #[test]
    fn uncoupled_moment_matrix_is_block_diagonal() {
        let ms = moment_system(&fig3().with_lambda(0.0)).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                if i != j {
                    assert_eq!(ms.m[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn stationary_moments_match_covariance() {
        for p in [fig3(), TwoOscillatorParams::fig2()] {
            let v = moment_system(&p).unwrap().stationary();
            let cov = steady_covariance(&p).unwrap();
            assert!(close(v[0].re, cov.occupation1, 1e-12));
            assert!(close(v[3].re, cov.occupation2, 1e-12));
            assert!((v[7] - cov.coherence).norm() < 1e-12 * cov.coherence.norm().max(1.0));
            assert!((v[8] - cov.coherence.conj()).norm() < 1e-12 * cov.coherence.norm().max(1.0));
            for k in [1, 2, 4, 5, 6, 9] {
                assert!(v[k].norm() < 1e-12);
            }
        }
    }

    fn inhomogeneous_part(ms: &MomentSystem, t: f64) -> f64 {
        // Simpson quadrature of row 0 of ∫₀ᵗ e^{Mu} w du
        let n = 2000;
        let h = t / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let u = k as f64 * h;
            let e = expm(&Mat::from_fn(10, 10, |i, j| ms.m[(i, j)] * u));
            let val: Complex64 = (0..10).map(|j| e[(0, j)] * ms.w[j]).sum();
            let wgt = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += wgt * val.re;
        }
        acc * h / 3.0
    }

    #[test]
    fn coefficients_match_matrix_exponential() {
        for p in [fig3(), TwoOscillatorParams::fig2()] {
            let ms = moment_system(&p).unwrap();
            for t in [0.0, 0.37, 1.9, 4.0] {
                let e = expm(&Mat::from_fn(10, 10, |i, j| ms.m[(i, j)] * t));
                let c = adjoint_coefficients(&p, t).unwrap();
                for (k, v) in c.row().iter().enumerate() {
                    assert!((e[(0, k)] - v).norm() < 1e-10, "t {t} k {k}");
                }
            }
            let t = 1.3;
            let s = adjoint_coefficients(&p, t).unwrap().s;
            let want = inhomogeneous_part(&ms, t);
            assert!((s - want).abs() < 1e-10 * want.abs().max(1.0), "{s} vs {want}");
        }
    }

    #[test]
    fn coefficients_at_origin_and_thermal_limit() {
        let c = adjoint_coefficients(&fig3(), 0.0).unwrap();
        assert!((c.f.re - 1.0).abs() < 1e-15);
        assert!(c.j.norm() < 1e-15 && c.p.norm() < 1e-15 && c.q.norm() < 1e-15);
        assert!(c.s.abs() < 1e-13);

        let p = fig3().with_lambda(0.0);
        let (n1, _, _) = occupations(&p).unwrap();
        for t in [0.2, 1.0, 5.0] {
            let c = adjoint_coefficients(&p, t).unwrap();
            let e = (-p.gamma * t).exp();
            assert!((c.f.re - e).abs() < 1e-15);
            assert_eq!(c.j.norm() + c.p.norm() + c.q.norm(), 0.0);
            assert!((c.s - (1.0 - e) * n1).abs() < 1e-13);
        }
    }

    #[test]
    fn total_excitation_decays() {
        let p = fig3();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..20.0);
            let c = adjoint_coefficients(&p, t).unwrap();
            assert!((c.f.re + c.j.re - (-p.gamma * t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_model_is_rejected() {
        let p = TwoOscillatorParams { delta: 0.0, lambda: 0.0, ..fig3() };
        assert!(adjoint_coefficients(&p, 1.0).is_err());
    }

    #[test]
    fn closed_form_matches_moment_assembly() {
        // i β₁ħω₁ ⟨[a₁a₂† + a₁†a₂, a₁†a₁(τ)]⟩ from the coefficients and stationary moments
        for p in [fig3(), TwoOscillatorParams::fig2()] {
            let cov = steady_covariance(&p).unwrap();
            let a = p.beta1 * p.hbar * p.omega1;
            let i = Complex64::new(0.0, 1.0);
            let c = cov.coherence;
            let dn = cov.occupation1 - cov.occupation2;
            for tau in [0.0, 0.5, 2.0, 7.0] {
                let k = adjoint_coefficients(&p, tau).unwrap();
                let comm = k.f * (c - c.conj()) + k.j * (c.conj() - c) + (k.p - k.q) * dn;
                let r = (i * a * comm).re;
                let want = response_closed_form(&p, tau).unwrap();
                assert!((r - want).abs() < 1e-10, "tau {tau}: {r} vs {want}");
            }
        }
    }

    #[test]
    fn closed_form_special_values() {
        let p = TwoOscillatorParams::fig2();
        assert!((response_closed_form(&p, 0.0).unwrap() - 0.728_557_392_785).abs() < 1e-9);
        for tau in [0.0, 1.0, 3.0] {
            assert_eq!(response_closed_form(&p.with_lambda(0.0), tau).unwrap(), 0.0);
        }
        let eq = TwoOscillatorParams { delta: 0.0, beta2: p.beta1, ..p };
        assert_eq!(response_closed_form(&eq, 0.4).unwrap(), 0.0);
        let far = response_closed_form(&p, 60.0).unwrap();
        assert!(far.abs() < 1e-15);
    }

    #[test]
    fn unitary_limit() {
        let p = TwoOscillatorParams::fig2();
        assert_eq!(response_unitary(&p, 0.0).unwrap(), 0.0);
        assert_eq!(response_unitary(&TwoOscillatorParams { delta: 0.0, ..p }, 0.7).unwrap(), 0.0);
        let slow = p.with_gamma(1e-6);
        let z = p.z();
        let scale = (0..=400)
            .map(|k| response_unitary(&p, k as f64 * 4.0 * std::f64::consts::PI / z / 400.0).unwrap().abs())
            .fold(0.0, f64::max);
        for k in 0..=400 {
            let tau = k as f64 * 4.0 * std::f64::consts::PI / z / 400.0;
            let a = response_closed_form(&slow, tau).unwrap();
            let b = response_unitary(&p, tau).unwrap();
            assert!((a - b).abs() <= 1e-4 * scale, "tau {tau}");
        }
    }

    #[test]
    fn classical_is_proportional() {
        let p = fig3();
        let ratio0 = response_classical(&p, 0.3).unwrap() / response_closed_form(&p, 0.3).unwrap();
        for tau in [0.1, 1.0, 2.5, 6.0] {
            let r = response_classical(&p, tau).unwrap() / response_closed_form(&p, tau).unwrap();
            assert!((r - ratio0).abs() < 1e-12 * ratio0.abs());
        }
        let same = TwoOscillatorParams { beta2: p.beta1 * p.omega1 / p.omega2(), ..p };
        assert!(response_classical(&same, 1.0).is_err());
        let eq = TwoOscillatorParams { delta: 0.0, beta2: p.beta1, ..p };
        assert!(response_classical(&eq, 1.0).is_err());
    }

    #[test]
    fn high_temperature_agreement() {
        let base = fig3();
        let p = TwoOscillatorParams {
            beta1: 1e-3 / base.omega1,
            beta2: 2e-3 / base.omega2(),
            ..base
        };
        for tau in [0.0, 0.8, 3.0] {
            let q = response_closed_form(&p, tau).unwrap();
            let c = response_classical(&p, tau).unwrap();
            assert!((c - q).abs() <= 2e-3 * q.abs());
        }
    }

    #[test]
    fn zero_detuning_response() {
        let p = TwoOscillatorParams { delta: 0.0, ..fig3() };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let tau = rng.gen_range(0.0..15.0);
            let a = response_delta0(&p, tau).unwrap();
            let b = response_closed_form(&p, tau).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
        let (_, _, dn) = occupations(&p).unwrap();
        let a = p.beta1 * p.omega1;
        let want = 2.0 * dn * p.gamma * p.lambda * a / (p.gamma.powi(2) + 4.0 * p.lambda.powi(2));
        assert!((response_delta0(&p, 0.0).unwrap() - want).abs() < 1e-14);
        assert_eq!(response_delta0(&p.with_lambda(0.0), 2.0).unwrap(), 0.0);
        assert!(response_delta0(&fig3(), 1.0).is_err());
    }
}

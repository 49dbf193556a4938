use crate::error::{Error, Result};

/// Two detuned oscillators, each damped by its own thermal bath.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoOscillatorParams {
    pub omega1: f64,
    /// `ω₂ − ω₁`.
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub hbar: f64,
    /// Step amplitude used when a perturbation is applied.
    pub eps: f64,
}

impl TwoOscillatorParams {
    /// Parameter set of the hot-bath figure (n₂ ≈ 100).
    pub fn fig2() -> Self {
        Self {
            omega1: 2.4,
            delta: 10.1,
            gamma: 0.7,
            lambda: 5.0,
            beta1: 0.092,
            beta2: 0.0008,
            hbar: 1.0,
            eps: 0.11,
        }
    }

    /// Parameter set of the quantum/classical comparison figure.
    pub fn fig3() -> Self {
        Self {
            omega1: 2.4,
            delta: 10.1,
            gamma: 0.7,
            lambda: 2.3,
            beta1: 0.164,
            beta2: 0.416,
            hbar: 1.0,
            eps: 0.11,
        }
    }

    pub fn omega2(&self) -> f64 {
        self.omega1 + self.delta
    }

    /// `z = √(δ² + 4λ²)`.
    pub fn z(&self) -> f64 {
        (self.delta * self.delta + 4.0 * self.lambda * self.lambda).sqrt()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega1", self.omega1),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("hbar", self.hbar),
            ("eps", self.eps),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma = {} is negative", self.gamma)));
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidParameter(format!("hbar = {} must be positive", self.hbar)));
        }
        occupations(self).map(|_| ())
    }
}

/// Bose occupation `1/(e^{βħω} − 1)`.
pub fn bose(beta: f64, hbar: f64, omega: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let x = beta * hbar * omega;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bath mode needs positive beta*hbar*omega, got {x}"
        )));
    }
    Ok(1.0 / x.exp_m1())
}

/// `(n₁, n₂, Δn = n₂ − n₁)`.
pub fn occupations(params: &TwoOscillatorParams) -> Result<(f64, f64, f64)> {
    let n1 = bose(params.beta1, params.hbar, params.omega1)?;
    let n2 = bose(params.beta2, params.hbar, params.omega2())?;
    Ok((n1, n2, n2 - n1))
}

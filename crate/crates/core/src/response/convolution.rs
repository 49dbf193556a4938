use num_complex::Complex64;

use super::ResponseCurve;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::liouvillian::{
    build_commutator_generator, build_lindblad_generator, steady_state, Flow, LindbladModel,
};
use crate::operator::Operator;

/// Time dependence `ε(t)` of the perturbation strength.
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationProtocol {
    /// `ε(t) = ε Θ(t)`.
    Step { amplitude: f64 },
    /// Linear interpolation between samples, constant beyond either end.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl PerturbationProtocol {
    pub fn step(amplitude: f64) -> Self {
        PerturbationProtocol::Step { amplitude }
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "sampled protocol needs matching, nonempty times and values ({} vs {})",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "sampled protocol times must increase strictly".into(),
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sampled protocol has non-finite entries".into()));
        }
        Ok(PerturbationProtocol::Sampled { times, values })
    }

    pub fn amplitude_at(&self, t: f64) -> f64 {
        match self {
            PerturbationProtocol::Step { amplitude } => {
                if t >= 0.0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            PerturbationProtocol::Sampled { times, values } => interpolate(times, values, t),
        }
    }

    /// Largest `|ε(t)|`.
    pub fn max_amplitude(&self) -> f64 {
        match self {
            PerturbationProtocol::Step { amplitude } => amplitude.abs(),
            PerturbationProtocol::Sampled { values, .. } => {
                values.iter().map(|v| v.abs()).fold(0.0, f64::max)
            }
        }
    }
}

/// Linear interpolation on sorted nodes with constant extrapolation.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] * (1.0 - w) + ys[k] * w
}

/// `⟨A⟩_ε(t) − ⟨A⟩` sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Linear prediction `∫₀ᵗ ε(s) R(t − s) ds` by the trapezoidal rule on the
/// curve grid. `R` between grid points is linearly interpolated.
pub fn convolve(curve: &ResponseCurve, protocol: &PerturbationProtocol) -> Result<Trajectory> {
    let tau = &curve.tau;
    TimeGrid::new(tau.clone())?;
    let r = &curve.values;
    let mut values = Vec::with_capacity(tau.len());
    match protocol {
        PerturbationProtocol::Step { amplitude } => {
            let mut acc = 0.0;
            values.push(0.0);
            for k in 1..tau.len() {
                acc += 0.5 * (tau[k] - tau[k - 1]) * (r[k] + r[k - 1]);
                values.push(amplitude * acc);
            }
        }
        PerturbationProtocol::Sampled { .. } => {
            for k in 0..tau.len() {
                let t = tau[k];
                let f = |i: usize| protocol.amplitude_at(tau[i]) * interpolate(tau, r, t - tau[i]);
                let mut acc = 0.0;
                for i in 1..=k {
                    acc += 0.5 * (tau[i] - tau[i - 1]) * (f(i) + f(i - 1));
                }
                values.push(acc);
            }
        }
    }
    Ok(Trajectory { t: tau.clone(), values })
}

/// Exact propagation from `π₀` under `L₀ + ε(t)L₁`, with `ε` held at its
/// interval-midpoint value between grid points.
pub fn nonlinear_reference(
    model: &LindbladModel,
    h_i: &Operator,
    protocol: &PerturbationProtocol,
    a: &Operator,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let l0 = build_lindblad_generator(model);
    let l1 = build_commutator_generator(h_i, model.hbar())?;
    let pi0 = steady_state(&l0)?.pi0;
    let base = pi0.expectation(a).re;
    let times = grid.points();
    let d = a.dim();
    let mut state = pi0.as_operator().vectorize();
    let mut values = vec![0.0; times.len()];

    let eps: Vec<f64> = times
        .windows(2)
        .map(|w| protocol.amplitude_at(0.5 * (w[0] + w[1])))
        .collect();
    let mut start = 0;
    while start + 1 < times.len() {
        let mut end = start + 1;
        while end < eps.len() && eps[end] == eps[start] {
            end += 1;
        }
        let gen = if eps[start] == 0.0 {
            l0.clone()
        } else {
            l0.perturbed(&l1, eps[start])
        };
        let seeds = state
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
            .map(|(i, _)| i);
        let flow = Flow::new(gen.matrix(), seeds);
        let weights: Vec<Complex64> = flow
            .sector()
            .indices()
            .iter()
            .map(|&idx| a.get(idx / d, idx % d))
            .collect();
        let local = TimeGrid::new(times[start..=end].iter().map(|t| t - times[start]).collect())?;
        let mut last = Vec::new();
        flow.run(&state, &local, |k, y| {
            let v: Complex64 = weights.iter().zip(y).map(|(w, x)| w * x).sum();
            values[start + k] = v.re - base;
            if k + start == end {
                last = y.to_vec();
            }
            Ok(())
        })?;
        state = flow.sector().embed(&last);
        start = end;
    }
    values[0] = 0.0;
    Ok(Trajectory { t: times.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::JumpOperator;
    use crate::response::{response_commutator, FormLabel};
    use faer::Mat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp_curve(points: usize, t_max: f64) -> ResponseCurve {
        let grid = TimeGrid::uniform(t_max, points).unwrap();
        let values = grid.points().iter().map(|t| (-t).exp()).collect();
        ResponseCurve::new(FormLabel::Analytic, grid.points().to_vec(), values)
    }

    #[test]
    fn step_convolution_of_exponential() {
        let curve = exp_curve(2001, 5.0);
        let traj = convolve(&curve, &PerturbationProtocol::step(1.0)).unwrap();
        for (t, v) in traj.t.iter().zip(&traj.values) {
            assert!((v - (1.0 - (-t).exp())).abs() < 1e-6);
        }
        let zero = ResponseCurve::new(FormLabel::R3, curve.tau.clone(), vec![0.0; curve.tau.len()]);
        assert!(convolve(&zero, &PerturbationProtocol::step(0.3)).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sampled_step_matches_step() {
        let curve = exp_curve(401, 4.0);
        let step = convolve(&curve, &PerturbationProtocol::step(0.5)).unwrap();
        let sampled = PerturbationProtocol::sampled(vec![0.0, 10.0], vec![0.5, 0.5]).unwrap();
        let traj = convolve(&curve, &sampled).unwrap();
        assert!(traj.max_abs_diff(&step) < 1e-12);
        // ramp ε(s) = s: ∫₀ᵗ s e^{−(t−s)} ds = t − 1 + e^{−t}
        let ramp = PerturbationProtocol::sampled(vec![0.0, 10.0], vec![0.0, 10.0]).unwrap();
        let traj = convolve(&exp_curve(4001, 4.0), &ramp).unwrap();
        for (t, v) in traj.t.iter().zip(&traj.values) {
            assert!((v - (t - 1.0 + (-t).exp())).abs() < 1e-5);
        }
    }

    #[test]
    fn protocol_validation() {
        assert!(PerturbationProtocol::sampled(vec![], vec![]).is_err());
        assert!(PerturbationProtocol::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        let p = PerturbationProtocol::sampled(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(p.amplitude_at(0.25), 0.5);
        assert_eq!(p.amplitude_at(3.0), 2.0);
        assert_eq!(PerturbationProtocol::step(0.2).amplitude_at(-1.0), 0.0);
    }

    fn random_model(seed: u64) -> (LindbladModel, Operator, Operator) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = |rng: &mut ChaCha8Rng| {
            Operator::from_matrix(Mat::from_fn(3, 3, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }))
            .unwrap()
        };
        let h = op(&mut rng).hermitize();
        let jumps = (0..2)
            .map(|_| JumpOperator { operator: op(&mut rng), rate: rng.gen_range(0.3..1.0) })
            .collect();
        let a = op(&mut rng).hermitize();
        let hi = op(&mut rng).hermitize();
        (LindbladModel::new(h, jumps, 1.0).unwrap(), a, hi)
    }

    #[test]
    fn zero_amplitude_stays_stationary() {
        let (model, a, hi) = random_model(2);
        let grid = TimeGrid::uniform(5.0, 21).unwrap();
        let traj = nonlinear_reference(&model, &hi, &PerturbationProtocol::step(0.0), &a, &grid).unwrap();
        assert!(traj.values.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn linear_prediction_error_is_second_order() {
        let (model, a, hi) = random_model(4);
        let l0 = build_lindblad_generator(&model);
        let pi0 = steady_state(&l0).unwrap().pi0;
        let grid = TimeGrid::uniform(6.0, 3001).unwrap();
        let curve = response_commutator(&a, &hi, &l0, &pi0, &grid, 1.0).unwrap();
        let err = |eps: f64| {
            let p = PerturbationProtocol::step(eps);
            let lin = convolve(&curve, &p).unwrap();
            nonlinear_reference(&model, &hi, &p, &a, &grid).unwrap().max_abs_diff(&lin)
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}

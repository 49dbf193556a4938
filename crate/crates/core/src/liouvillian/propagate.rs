use faer::Mat;
use num_complex::Complex64;

use super::{support, Sector, Superoperator};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::linalg::{expm, CsrMatrix, Dopri5};
use crate::operator::{DensityOperator, Operator};

/// Sectors up to this size are propagated with a dense matrix exponential.
pub const DENSE_PROPAGATION_LIMIT: usize = 512;

/// Relative tolerance of the adaptive integrator used above the dense limit.
pub const PROPAGATION_RTOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

enum Mode {
    Dense(Mat<Complex64>),
    Sparse,
}

/// `y(t) = e^{Gt} y(0)` restricted to the invariant sector reached from the
/// initial support.
pub(crate) struct Flow {
    sector: Sector,
    gen: CsrMatrix,
    mode: Mode,
}

impl Flow {
    pub(crate) fn new(gen: &CsrMatrix, seeds: impl IntoIterator<Item = usize>) -> Self {
        Self::with_dense_limit(gen, seeds, DENSE_PROPAGATION_LIMIT)
    }

    pub(crate) fn with_dense_limit(
        gen: &CsrMatrix,
        seeds: impl IntoIterator<Item = usize>,
        dense_limit: usize,
    ) -> Self {
        let sector = Sector::closure(gen, seeds);
        let gen = sector.restrict_matrix(gen);
        let mode = if sector.len() <= dense_limit {
            Mode::Dense(gen.to_dense())
        } else {
            Mode::Sparse
        };
        Self { sector, gen, mode }
    }

    pub(crate) fn sector(&self) -> &Sector {
        &self.sector
    }

    /// Calls `visit(k, y)` with the sector coordinates of `y(t_k)`.
    pub(crate) fn run<F>(&self, start: &[Complex64], grid: &TimeGrid, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, &[Complex64]) -> Result<()>,
    {
        let mut y = self.sector.restrict(start);
        let times = grid.points();
        visit(0, &y)?;
        match &self.mode {
            Mode::Dense(g) => {
                let n = y.len();
                let mut cache: Vec<(f64, Mat<Complex64>)> = Vec::new();
                for k in 1..times.len() {
                    let h = times[k] - times[k - 1];
                    if h == 0.0 {
                        visit(k, &y)?;
                        continue;
                    }
                    let pos = cache
                        .iter()
                        .position(|(hc, _)| (hc - h).abs() <= 1e-13 * h.max(*hc));
                    let idx = match pos {
                        Some(i) => i,
                        None => {
                            let gh = Mat::from_fn(n, n, |i, j| g[(i, j)] * h);
                            cache.push((h, expm(&gh)));
                            cache.len() - 1
                        }
                    };
                    let p = &cache[idx].1;
                    let col = Mat::from_fn(n, 1, |i, _| y[i]);
                    let out = p * &col;
                    for (i, yi) in y.iter_mut().enumerate() {
                        *yi = out[(i, 0)];
                    }
                    visit(k, &y)?;
                }
            }
            Mode::Sparse => {
                let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
                let mut solver = Dopri5::new(PROPAGATION_RTOL, PROPAGATION_RTOL * 1e-3 * scale);
                let mut rhs = |x: &[Complex64], dx: &mut [Complex64]| self.gen.matvec_into(x, dx);
                for k in 1..times.len() {
                    solver.integrate(&mut rhs, &mut y, times[k - 1], times[k])?;
                    visit(k, &y)?;
                }
            }
        }
        Ok(())
    }
}

/// Weights `w` with `Σ w·vec(X) = Tr{X Y}`, restricted to a sector.
pub(crate) fn trace_weights(sector: &Sector, y: &Operator) -> Vec<Complex64> {
    let d = y.dim();
    sector
        .indices()
        .iter()
        .map(|&idx| y.get(idx / d, idx % d))
        .collect()
}

fn dot(w: &[Complex64], y: &[Complex64]) -> Complex64 {
    w.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a * b)
}

fn collect_operators(flow: &Flow, like: &Operator, grid: &TimeGrid) -> Result<Vec<Operator>> {
    let start = like.vectorize();
    let mut out = Vec::with_capacity(grid.len());
    flow.run(&start, grid, |_, y| {
        out.push(Operator::from_vectorized(like.space(), &flow.sector().embed(y))?);
        Ok(())
    })?;
    Ok(out)
}

/// `A(τ) = e^{L₀†τ} A` on each grid point.
pub fn evolve_heisenberg(l0: &Superoperator, a: &Operator, grid: &TimeGrid) -> Result<Vec<Operator>> {
    let v = a.vectorize();
    let adj = l0.adjoint();
    let flow = Flow::new(adj.matrix(), support(&v));
    let mut out = collect_operators(&flow, a, grid)?;
    out[0] = a.clone();
    Ok(out)
}

/// `ρ(t) = e^{L₀t} ρ` on each grid point.
pub fn evolve_state(l0: &Superoperator, rho: &Operator, grid: &TimeGrid) -> Result<Vec<Operator>> {
    let v = rho.vectorize();
    let flow = Flow::new(l0.matrix(), support(&v));
    let mut out = collect_operators(&flow, rho, grid)?;
    out[0] = rho.clone();
    Ok(out)
}

/// `Tr{A(τ) Y}` for each probe `Y`, indexed `[probe][grid point]`.
pub fn heisenberg_expectations(
    l0: &Superoperator,
    a: &Operator,
    grid: &TimeGrid,
    probes: &[&Operator],
) -> Result<Vec<Vec<Complex64>>> {
    let v = a.vectorize();
    let adj = l0.adjoint();
    let flow = Flow::new(adj.matrix(), support(&v));
    expectations(&flow, &v, grid, probes)
}

/// `Tr{O e^{L₀τ} X}` for each observable `O`, indexed `[observable][grid point]`.
pub fn forward_expectations(
    l0: &Superoperator,
    x: &Operator,
    grid: &TimeGrid,
    observables: &[&Operator],
) -> Result<Vec<Vec<Complex64>>> {
    let v = x.vectorize();
    let flow = Flow::new(l0.matrix(), support(&v));
    expectations(&flow, &v, grid, observables)
}

fn expectations(
    flow: &Flow,
    start: &[Complex64],
    grid: &TimeGrid,
    probes: &[&Operator],
) -> Result<Vec<Vec<Complex64>>> {
    let weights: Vec<Vec<Complex64>> = probes.iter().map(|p| trace_weights(flow.sector(), p)).collect();
    let mut out = vec![vec![ZERO; grid.len()]; probes.len()];
    flow.run(start, grid, |k, y| {
        for (w, row) in weights.iter().zip(out.iter_mut()) {
            row[k] = dot(w, y);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Stationary two-time correlation `⟨A(τ)B(0)⟩ = Tr{A e^{L₀τ}(B π₀)}`.
pub fn two_time_correlation(
    a: &Operator,
    b: &Operator,
    grid: &TimeGrid,
    pi0: &DensityOperator,
    l0: &Superoperator,
) -> Result<Vec<Complex64>> {
    let x = b * pi0.as_operator();
    let mut out = forward_expectations(l0, &x, grid, &[a])?.remove(0);
    out[0] = a.trace_product(&x);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{build_lindblad_generator, steady_state, JumpOperator, LindbladModel};
    use crate::operator::{make_ladder, thermal_state, HilbertSpace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn thermal_oscillator(n_levels: usize, omega: f64, gamma: f64, nbar: f64) -> (LindbladModel, Operator, Operator) {
        let (a, ad) = make_ladder(n_levels).unwrap();
        let num = &ad * &a;
        let model = LindbladModel::new(
            num.scale_real(omega),
            vec![
                JumpOperator { operator: a.clone(), rate: gamma * (nbar + 1.0) },
                JumpOperator { operator: ad.clone(), rate: gamma * nbar },
            ],
            1.0,
        )
        .unwrap();
        (model, a, num)
    }

    fn random_model(rng: &mut ChaCha8Rng, d: usize) -> LindbladModel {
        let op = |rng: &mut ChaCha8Rng| {
            Operator::from_matrix(Mat::from_fn(d, d, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }))
            .unwrap()
        };
        let h = op(rng).hermitize();
        let jumps = (0..2)
            .map(|_| JumpOperator { operator: op(rng), rate: rng.gen_range(0.2..1.0) })
            .collect();
        LindbladModel::new(h, jumps, 1.0).unwrap()
    }

    #[test]
    fn identity_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = random_model(&mut rng, 3);
        let l0 = build_lindblad_generator(&model);
        let id = Operator::identity(model.space());
        let grid = TimeGrid::uniform(5.0, 11).unwrap();
        for op in evolve_heisenberg(&l0, &id, &grid).unwrap() {
            assert!(op.max_abs_diff(&id) < 1e-12);
        }
    }

    #[test]
    fn thermal_oscillator_number_operator_relaxes() {
        let (gamma, nbar) = (0.7, 0.3);
        let (model, _, num) = thermal_oscillator(40, 1.1, gamma, nbar);
        let l0 = build_lindblad_generator(&model);
        let grid = TimeGrid::uniform(4.0, 9).unwrap();
        let ops = evolve_heisenberg(&l0, &num, &grid).unwrap();
        assert_eq!(ops[0].max_abs_diff(&num), 0.0);
        for (t, op) in grid.points().iter().zip(&ops) {
            let e = (-gamma * t).exp();
            for k in 0..10 {
                let want = e * k as f64 + (1.0 - e) * nbar;
                assert!((op.get(k, k).re - want).abs() < 1e-9, "t {t} k {k}");
            }
        }
    }

    #[test]
    fn dense_and_adaptive_paths_agree() {
        let (model, a, _) = thermal_oscillator(12, 1.3, 0.5, 0.4);
        let l0 = build_lindblad_generator(&model);
        let x = &a + &a.dagger();
        let grid = TimeGrid::uniform(3.0, 7).unwrap();
        let v = x.vectorize();
        let adj = l0.adjoint();
        let run = |limit| {
            let flow = Flow::with_dense_limit(adj.matrix(), support(&v), limit);
            let mut out = Vec::new();
            flow.run(&v, &grid, |_, y| {
                out.push(flow.sector().embed(y));
                Ok(())
            })
            .unwrap();
            out
        };
        let (dense, sparse) = (run(usize::MAX), run(0));
        for (p, q) in dense.iter().zip(&sparse) {
            let diff = p.iter().zip(q).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-9, "{diff}");
        }
    }

    #[test]
    fn trajectories_stay_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let model = random_model(&mut rng, 4);
        let l0 = build_lindblad_generator(&model);
        let space = model.space().clone();
        let psi: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let rho = Operator::from_fn(space, |i, j| psi[i] * psi[j].conj() / norm);
        let grid = TimeGrid::uniform(6.0, 25).unwrap();
        for r in evolve_state(&l0, &rho, &grid).unwrap() {
            assert!((r.trace().re - 1.0).abs() <= 1e-9);
            assert!(r.hermitian_deviation() <= 1e-9);
            let d = DensityOperator::with_tolerance(r.hermitize(), 1e-6).unwrap();
            assert!(d.min_eigenvalue().unwrap() >= -1e-8);
        }
    }

    #[test]
    fn steady_state_is_stationary_under_propagation() {
        let gamma = 0.6;
        let (model, _, _) = thermal_oscillator(15, 2.0, gamma, 0.2);
        let l0 = build_lindblad_generator(&model);
        let pi0 = steady_state(&l0).unwrap().pi0;
        let grid = TimeGrid::new(vec![0.0, 10.0 / gamma]).unwrap();
        let out = evolve_state(&l0, pi0.as_operator(), &grid).unwrap();
        assert!((&out[1] - pi0.as_operator()).frobenius_norm() <= 1e-8);

        let mut start = Operator::zeros(model.space());
        start = &start + &Operator::diagonal(model.space(), &{
            let mut v = vec![Complex64::new(0.0, 0.0); 15];
            v[3] = Complex64::new(1.0, 0.0);
            v
        })
        .unwrap();
        let grid = TimeGrid::new(vec![0.0, 40.0 / gamma]).unwrap();
        let out = evolve_state(&l0, &start, &grid).unwrap();
        assert!((&out[1] - pi0.as_operator()).frobenius_norm() <= 1e-8);
    }

    #[test]
    fn thermal_number_correlation() {
        let (gamma, nbar) = (0.7, 0.3);
        let (model, _, num) = thermal_oscillator(40, 1.1, gamma, nbar);
        let l0 = build_lindblad_generator(&model);
        let pi0 = thermal_state(&num.scale_real(1.1), (1.0 / nbar + 1.0).ln() / 1.1).unwrap();
        let grid = TimeGrid::uniform(5.0, 11).unwrap();
        let c = two_time_correlation(&num, &num, &grid, &pi0, &l0).unwrap();
        for (t, v) in grid.points().iter().zip(&c) {
            let want = nbar * nbar + (-gamma * t).exp() * (nbar * nbar + nbar);
            assert!((v - want).norm() < 1e-9, "t {t}: {v} vs {want}");
        }
    }

    #[test]
    fn trivial_correlations() {
        let space = HilbertSpace::single(2).unwrap();
        let sz = Operator::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let sm = Operator::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let model = LindbladModel::new(
            Operator::zeros(&space),
            vec![
                JumpOperator { operator: sm.clone(), rate: 1.0 },
                JumpOperator { operator: sm.dagger(), rate: 1.0 },
            ],
            1.0,
        )
        .unwrap();
        let l0 = build_lindblad_generator(&model);
        let pi0 = DensityOperator::maximally_mixed(&space);
        let grid = TimeGrid::uniform(2.0, 5).unwrap();
        let id = Operator::identity(&space);
        for v in two_time_correlation(&id, &id, &grid, &pi0, &l0).unwrap() {
            assert!((v - 1.0).norm() < 1e-12);
        }
        let c = two_time_correlation(&sz, &sz, &grid, &pi0, &l0).unwrap();
        assert_eq!(c[0], Complex64::new(1.0, 0.0));
    }
}

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use num_complex::Complex64;

use super::{support, Sector, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::operator::{DensityOperator, Operator};

/// Sectors up to this size also get a dense eigenvalue scan (spectral gap
/// and null-space degeneracy check).
pub const GAP_EIGEN_LIMIT: usize = 1024;

const STEADY_RESIDUAL_TOL: f64 = 1e-10;
const CORRECTION_RESIDUAL_TOL: f64 = 1e-9;
const REFINEMENT_STEPS: usize = 2;

/// Stationary state of a generator together with solver diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyStateSolution {
    pub pi0: DensityOperator,
    /// `‖L₀ π₀‖_F`.
    pub residual_norm: f64,
    /// Smallest nonzero `|Re λ|` of the generator on the solved sector;
    /// `None` when the sector is too large for a dense eigenvalue scan.
    pub spectral_gap: Option<f64>,
    pub sector_dim: usize,
}

/// `[[G, w], [wᵀ, 0]]` with `w` the trace functional, factorized once.
///
/// Nonsingular exactly when `G` has a one-dimensional kernel not orthogonal
/// to `w`; the extra unknown absorbs the component of the right-hand side
/// outside the range of `G` and vanishes for consistent systems.
struct BorderedSystem {
    sector: Sector,
    matrix: CsrMatrix,
    trace_positions: Vec<usize>,
    lu: Lu<usize, Complex64>,
}

impl BorderedSystem {
    fn new(gen: &Superoperator, sector: Sector) -> Result<Self> {
        let diag = gen.diagonal_indices();
        let g = sector.restrict_matrix(gen.matrix());
        let n = sector.len();
        let trace_positions: Vec<usize> = sector
            .indices()
            .iter()
            .enumerate()
            .filter(|(_, i)| diag.binary_search(i).is_ok())
            .map(|(k, _)| k)
            .collect();
        let one = Complex64::new(1.0, 0.0);
        let mut t = g.triplets();
        for &k in &trace_positions {
            t.push((k, n, one));
            t.push((n, k, one));
        }
        let matrix = CsrMatrix::from_triplets(n + 1, n + 1, t);
        let lu = matrix
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Singular(format!("bordered generator factorization: {e:?}")))?;
        Ok(Self {
            sector,
            matrix,
            trace_positions,
            lu,
        })
    }

    fn solve_raw(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves `G x = b`, `Σ_diag x = trace` on the sector.
    fn solve(&self, b: &[Complex64], trace: Complex64) -> Result<Vec<Complex64>> {
        let n = self.sector.len();
        let mut rhs = b.to_vec();
        rhs.push(trace);
        let mut x = self.solve_raw(&rhs);
        for _ in 0..REFINEMENT_STEPS {
            let ax = self.matrix.matvec(&x);
            let r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(a, b)| a - b).collect();
            let dx = self.solve_raw(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Singular(
                "bordered generator system produced non-finite values".into(),
            ));
        }
        debug_assert!(self.trace_positions.iter().all(|&k| k < n));
        x.truncate(n);
        Ok(x)
    }
}

/// Eigenvalue scan of the restricted generator: `(gap, near-zero count)`.
fn spectral_scan(g: &CsrMatrix) -> Result<(f64, usize, f64)> {
    let dense = g.to_dense();
    let eig = dense
        .eigenvalues()
        .map_err(|e| Error::Solver(format!("generator eigenvalues: {e:?}")))?;
    let threshold = 1e-9 * g.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut re: Vec<f64> = eig.iter().map(|l| l.re.abs()).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let zeros = re.iter().filter(|&&r| r < threshold).count();
    let gap = re.get(1).copied().unwrap_or(f64::INFINITY);
    Ok((gap, zeros, threshold))
}

/// Unique stationary state `L₀ π₀ = 0`, `Tr π₀ = 1`.
pub fn steady_state(l0: &Superoperator) -> Result<SteadyStateSolution> {
    let sector = l0.sector(l0.diagonal_indices());
    let mut spectral_gap = None;
    if sector.len() <= GAP_EIGEN_LIMIT {
        let (gap, zeros, threshold) = spectral_scan(&sector.restrict_matrix(l0.matrix()))?;
        if zeros != 1 {
            return Err(Error::AmbiguousSteadyState {
                count: zeros,
                threshold,
            });
        }
        spectral_gap = Some(gap);
    }
    let sector_dim = sector.len();
    let system = BorderedSystem::new(l0, sector)?;
    let zeros = vec![Complex64::new(0.0, 0.0); sector_dim];
    let x = system.solve(&zeros, Complex64::new(1.0, 0.0))?;

    let raw = Operator::from_vectorized(l0.space(), &system.sector.embed(&x))?;
    let h = raw.hermitize();
    let pi = h.scale_real(1.0 / h.trace().re);
    let residual_norm = l0.apply(&pi).frobenius_norm();
    let bound = STEADY_RESIDUAL_TOL * l0.frobenius_norm();
    if !(residual_norm <= bound) {
        return Err(Error::Solver(format!(
            "steady-state residual {residual_norm:.3e} exceeds {bound:.3e}"
        )));
    }
    let pi0 = DensityOperator::new(pi)?;
    Ok(SteadyStateSolution {
        pi0,
        residual_norm,
        spectral_gap,
        sector_dim,
    })
}

/// First-order stationary correction: `L₀ π₁ = −L₁ π₀`, `Tr π₁ = 0`.
pub fn first_order_correction(
    l0: &Superoperator,
    l1: &Superoperator,
    pi0: &DensityOperator,
) -> Result<Operator> {
    let space = pi0.space().clone();
    let source = l1.apply(pi0.as_operator());
    let scale = source.frobenius_norm();
    if scale == 0.0 {
        return Ok(Operator::zeros(&space));
    }
    let rhs_full: Vec<Complex64> = source.vectorize().iter().map(|v| -v).collect();
    let seeds: Vec<usize> = l0
        .diagonal_indices()
        .into_iter()
        .chain(support(&rhs_full))
        .collect();
    let sector = l0.sector(seeds);
    let singular = |detail: String| {
        let gap = if sector.len() <= GAP_EIGEN_LIMIT {
            spectral_scan(&sector.restrict_matrix(l0.matrix()))
                .map(|(g, _, _)| format!("{g:.3e}"))
                .unwrap_or_else(|_| "unavailable".into())
        } else {
            "not computed".into()
        };
        Error::Singular(format!(
            "generator not invertible on traceless operators ({detail}; spectral gap {gap})"
        ))
    };
    let system = match BorderedSystem::new(l0, sector.clone()) {
        Ok(s) => s,
        Err(e) => return Err(singular(e.to_string())),
    };
    let b = sector.restrict(&rhs_full);
    let x = match system.solve(&b, Complex64::new(0.0, 0.0)) {
        Ok(x) => x,
        Err(e) => return Err(singular(e.to_string())),
    };
    let raw = Operator::from_vectorized(&space, &sector.embed(&x))?.hermitize();
    let d = raw.dim() as f64;
    let shift = Operator::identity(&space).scale_real(raw.trace().re / d);
    let pi1 = &raw - &shift;
    let residual = (&l0.apply(&pi1) + &source).frobenius_norm();
    if !(residual <= CORRECTION_RESIDUAL_TOL * scale) {
        return Err(singular(format!(
            "relative residual {:.3e}",
            residual / scale
        )));
    }
    Ok(pi1)
}

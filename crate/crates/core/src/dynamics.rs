//! Closed and open evolution over a [`TimeGrid`], observable extraction and
//! deliberation-time selection.
//!
//! Closed runs apply one propagator `exp(−iH·dt)` per grid step. Open runs
//! integrate the Lindblad master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_k κ_k (L_k ρ L_k† − ½{L_k† L_k, ρ})
//! ```
//!
//! with classical fixed-step RK4 at the grid spacing. The generator is linear,
//! so the four RK4 stages collapse into the polynomial
//! `S = 1 + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24` of the Liouvillian superoperator;
//! `S` is built once per run and applied at every step, followed by
//! re-Hermitization of ρ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{expm, min_eigenvalue_hermitian, vec_norm, ComplexMatrix, TimeGrid, DEFAULT_TOL, I, ONE};

/// Largest tolerated per-run trace drift before integration is aborted.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// A Lindblad channel `κ·D[L]`.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    matrix: ComplexMatrix,
    rate: f64,
}

impl JumpOperator {
    pub fn new(matrix: ComplexMatrix, rate: f64) -> Result<Self> {
        matrix.dim()?;
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::NegativeRate(rate));
        }
        Ok(Self { matrix, rate })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

#[derive(Debug, Clone)]
pub enum States {
    Pure(Vec<Vec<Complex64>>),
    Mixed(Vec<ComplexMatrix>),
}

/// One state per grid point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: TimeGrid,
    states: States,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        match &self.states {
            States::Pure(v) => v[0].len(),
            States::Mixed(v) => v[0].rows(),
        }
    }

    /// Density matrix at grid index `index` (outer product for pure runs).
    pub fn density_matrix(&self, index: usize) -> ComplexMatrix {
        match &self.states {
            States::Pure(v) => ComplexMatrix::outer(&v[index], &v[index]),
            States::Mixed(v) => v[index].clone(),
        }
    }

    /// `tr(op · ρ(t_n))` for every grid point, without any projector checks.
    pub fn expectation_series(&self, op: &ComplexMatrix) -> Vec<f64> {
        match &self.states {
            States::Pure(v) => v
                .iter()
                .map(|psi| {
                    let op_psi = op.mul_vec(psi);
                    psi.iter().zip(&op_psi).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
                })
                .collect(),
            States::Mixed(v) => v.iter().map(|rho| op.trace_of_product(rho).re).collect(),
        }
    }
}

fn ensure_dim(op: &ComplexMatrix, expected: usize) -> Result<()> {
    let found = op.dim()?;
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `ψ(t_n) = exp(−iH(t_n − t_0)) ψ0`, stepping one propagator of size `dt`.
pub fn evolve_closed(h: &ComplexMatrix, psi0: &[Complex64], grid: &TimeGrid) -> Result<Trajectory> {
    h.ensure_hermitian(DEFAULT_TOL)?;
    ensure_dim(h, psi0.len())?;
    let norm = vec_norm(psi0);
    if (norm - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let step = expm(&h.scale(-I * grid.dt()))?;
    let mut states = Vec::with_capacity(grid.len());
    let mut psi = psi0.to_vec();
    states.push(psi.clone());
    for _ in 1..grid.len() {
        psi = step.mul_vec(&psi);
        states.push(psi.clone());
    }
    Ok(Trajectory { grid: *grid, states: States::Pure(states) })
}

/// Checks trace, Hermiticity and positivity of a density matrix.
pub fn validate_density_matrix(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    rho.dim()?;
    let deviation = rho.hermitian_deviation();
    if deviation > tol {
        return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {deviation:.3e})")));
    }
    let trace = rho.trace();
    if (trace - ONE).norm() > tol {
        return Err(Error::InvalidDensityMatrix(format!("trace {trace} != 1")));
    }
    let min_eig = min_eigenvalue_hermitian(rho)?;
    if min_eig < -tol {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:.3e}")));
    }
    Ok(())
}

/// Liouvillian acting on row-major `vec(ρ)`, using `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.
pub fn liouvillian(h: &ComplexMatrix, jumps: &[JumpOperator]) -> ComplexMatrix {
    let n = h.rows();
    let id = ComplexMatrix::identity(n);
    let mut gen = (&h.kron(&id) - &id.kron(&h.transpose())).scale(-I);
    for jump in jumps.iter().filter(|j| j.rate > 0.0) {
        let l = &jump.matrix;
        let ldl = &l.adjoint() * l;
        let sandwich = l.kron(&l.adjoint().transpose());
        let anti = &ldl.kron(&id) + &id.kron(&ldl.transpose());
        let dissipator = &sandwich - &anti.scale_real(0.5);
        gen = &gen + &dissipator.scale_real(jump.rate);
    }
    gen
}

/// One classical RK4 step of size `dt` for the linear generator `gen`.
fn rk4_step_matrix(gen: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let scaled = gen.scale_real(dt);
    let dim = gen.rows();
    let mut step = ComplexMatrix::identity(dim);
    let mut term = ComplexMatrix::identity(dim);
    for k in 1..=4 {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        step = &step + &term;
    }
    step
}

/// Largest `h·‖L‖₁` for one RK4 substep chosen by [`evolve_lindblad`].
pub const RK4_MAX_STEP_NORM: f64 = 0.05;

/// Substeps per grid interval that keep `h·‖L‖₁` within [`RK4_MAX_STEP_NORM`].
pub fn rk4_substeps(gen: &ComplexMatrix, dt: f64) -> usize {
    ((dt * gen.norm_one() / RK4_MAX_STEP_NORM).ceil() as usize).max(1)
}

fn matrix_power(m: &ComplexMatrix, mut exp: usize) -> ComplexMatrix {
    let mut result = ComplexMatrix::identity(m.rows());
    let mut base = m.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Fixed-step RK4 integration of the Lindblad master equation. Each grid
/// interval is split into [`rk4_substeps`] equal steps, so strong couplings
/// on a coarse grid stay accurate.
pub fn evolve_lindblad(
    h: &ComplexMatrix,
    jumps: &[JumpOperator],
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    h.ensure_hermitian(DEFAULT_TOL)?;
    let substeps = rk4_substeps(&liouvillian(h, jumps), grid.dt());
    evolve_lindblad_substeps(h, jumps, rho0, grid, substeps)
}

/// [`evolve_lindblad`] with an explicit number of RK4 steps per grid
/// interval; `1` steps exactly at the grid spacing.
pub fn evolve_lindblad_substeps(
    h: &ComplexMatrix,
    jumps: &[JumpOperator],
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<Trajectory> {
    h.ensure_hermitian(DEFAULT_TOL)?;
    let n = h.dim()?;
    ensure_dim(rho0, n)?;
    for jump in jumps {
        ensure_dim(&jump.matrix, n)?;
    }
    validate_density_matrix(rho0, DEFAULT_TOL)?;
    let substeps = substeps.max(1);

    let step = matrix_power(&rk4_step_matrix(&liouvillian(h, jumps), grid.dt() / substeps as f64), substeps);
    let mut states = Vec::with_capacity(grid.len());
    let mut rho = rho0.clone();
    states.push(rho.clone());
    for index in 1..grid.len() {
        let next = step.mul_vec(rho.as_slice());
        rho = ComplexMatrix::from_vec(n, n, next).hermitian_part();
        let drift = (rho.trace().re - 1.0).abs();
        if !(drift <= TRACE_DRIFT_LIMIT) || !(rho.max_abs() <= 1.0 + TRACE_DRIFT_LIMIT) {
            return Err(Error::TraceDrift { step: index, drift });
        }
        states.push(rho.clone());
    }
    Ok(Trajectory { grid: *grid, states: States::Mixed(states) })
}

/// `max |P² − P|`
pub fn projector_deviation(p: &ComplexMatrix) -> f64 {
    (&(p * p) - p).max_abs()
}

/// `s_n = tr(P ρ(t_n))`, clamped to `[0, 1]`.
pub fn observable_series(traj: &Trajectory, p: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_dim(p, traj.dim())?;
    let deviation = projector_deviation(p).max(p.hermitian_deviation());
    if deviation > DEFAULT_TOL {
        return Err(Error::NotProjector { deviation });
    }
    Ok(traj.expectation_series(p).into_iter().map(|s| s.clamp(0.0, 1.0)).collect())
}

/// How the deliberation time is read off an observable series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakStrategy {
    /// Earliest attainment of the maximum over the whole window.
    GlobalMax,
    /// First point after which the series strictly decreases. Once couplings
    /// grow, the window holds many near-complete revivals and the global
    /// maximum lands on an arbitrary one of them, so this is the default.
    #[default]
    FirstLocalMax,
}

const PEAK_TOL: f64 = 1e-12;

/// Smallest index whose value equals the series maximum within 1e-12.
pub fn first_peak_time(series: &[f64], grid: &TimeGrid) -> (usize, f64) {
    let index = global_max_index(series);
    (index, grid.time(index))
}

pub fn find_peak(series: &[f64], grid: &TimeGrid, strategy: PeakStrategy) -> (usize, f64) {
    let index = match strategy {
        PeakStrategy::GlobalMax => global_max_index(series),
        PeakStrategy::FirstLocalMax => first_local_max_index(series),
    };
    (index, grid.time(index))
}

fn global_max_index(series: &[f64]) -> usize {
    assert!(!series.is_empty(), "peak search needs a non-empty series");
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    series.iter().position(|&s| s >= max - PEAK_TOL).unwrap_or(0)
}

fn first_local_max_index(series: &[f64]) -> usize {
    assert!(!series.is_empty(), "peak search needs a non-empty series");
    let mut best = 0;
    for n in 1..series.len() {
        if series[n] > series[best] + PEAK_TOL {
            best = n;
        } else if series[n] < series[best] - PEAK_TOL && series[best] > series[0] + PEAK_TOL {
            return best;
        }
    }
    global_max_index(series)
}

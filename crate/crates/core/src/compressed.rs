//! Compressed-register quantum agent: the percepts share one `d`-level
//! register and every action owns a qubit.
//!
//! Register layout is percept register first, then action qubits
//! `a0 … a{n−1}`, so basis index `j·2ⁿ + bits` holds percept `j` with action
//! qubit `a_k` stored at bit `n−1−k`. The drive Hamiltonian
//!
//! ```text
//! H = Σ_j Σ_a λ_{j,a} |j⟩⟨j| ⊗ σx⁽ᵃ⁾ + Σ_i ε_i n̂_i
//! ```
//!
//! is block diagonal in the percept value, so a definite percept only ever
//! drives its own row of couplings.

use rand::RngCore;

use crate::agent::{sample_normalized, Agent, Deliberation};
use crate::classical::LearningParams;
use crate::dynamics::{evolve_closed, evolve_lindblad, observable_series, JumpOperator, Trajectory};
use crate::error::{Error, Result};
use crate::excitation::{read_actions, ActionReadout, DeliberationConfig};
use crate::numerics::{basis_vector, kron_all, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressedRegister {
    d: usize,
    n_actions: usize,
}

impl CompressedRegister {
    pub fn new(d: usize, n_actions: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::ShapeMismatch(format!("percept register needs d >= 2, got {d}")));
        }
        if n_actions < 1 {
            return Err(Error::ShapeMismatch("at least one action qubit is required".into()));
        }
        Ok(Self { d, n_actions })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn dim(&self) -> usize {
        self.d << self.n_actions
    }

    fn action_bit(&self, k: usize) -> usize {
        1 << (self.n_actions - 1 - k)
    }

    pub fn index(&self, percept: usize, action_bits: usize) -> usize {
        (percept << self.n_actions) | action_bits
    }

    /// Splits a basis index into `(percept, action bitstring)`.
    pub fn decompose(&self, index: usize) -> (usize, usize) {
        (index >> self.n_actions, index & ((1 << self.n_actions) - 1))
    }

    fn check(&self, percept: usize, action: usize) -> Result<()> {
        if percept >= self.d {
            return Err(Error::IndexOutOfRange { what: "percept", index: percept, limit: self.d });
        }
        if action >= self.n_actions {
            return Err(Error::IndexOutOfRange { what: "action", index: action, limit: self.n_actions });
        }
        Ok(())
    }

    /// Basis index of `|j⟩ ⊗ |0…1_k…0⟩`.
    pub fn encode_event(&self, percept: usize, action: usize) -> Result<usize> {
        self.check(percept, action)?;
        Ok(self.index(percept, self.action_bit(action)))
    }

    /// Operator on action qubit `a` alone, padded with identities.
    fn on_action(&self, a: usize, op: &ComplexMatrix) -> ComplexMatrix {
        let mut factors = vec![ComplexMatrix::identity(self.d)];
        factors.extend((0..self.n_actions).map(|q| if q == a { op.clone() } else { ComplexMatrix::identity(2) }));
        kron_all(&factors)
    }

    fn percept_projector(&self, j: usize) -> ComplexMatrix {
        ComplexMatrix::basis_op(self.d, j, j).kron(&ComplexMatrix::identity(1 << self.n_actions))
    }
}

/// `d × n_actions` drive couplings and on-site energies
/// `[ε_register, ε_a0, …]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveCouplings {
    lambda: Vec<Vec<f64>>,
    epsilon: Vec<f64>,
}

impl DriveCouplings {
    pub fn new(lambda: Vec<Vec<f64>>, epsilon: Vec<f64>) -> Result<Self> {
        let cols = lambda.first().map_or(0, Vec::len);
        if lambda.is_empty() || cols == 0 || lambda.iter().any(|row| row.len() != cols) {
            return Err(Error::ShapeMismatch("coupling matrix must be rectangular and non-empty".into()));
        }
        if epsilon.len() != cols + 1 {
            return Err(Error::ShapeMismatch(format!("expected {} on-site energies, got {}", cols + 1, epsilon.len())));
        }
        if let Some(bad) = lambda.iter().flatten().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWeight {
                edge: "drive".into(),
                weight: *bad,
                reason: "coupling must be finite and >= 0".into(),
            });
        }
        Ok(Self { lambda, epsilon })
    }

    /// Every entry `value`, no on-site energies.
    pub fn uniform(d: usize, n_actions: usize, value: f64) -> Result<Self> {
        Self::new(vec![vec![value; n_actions]; d], vec![0.0; n_actions + 1])
    }

    pub fn lambda(&self, percept: usize, action: usize) -> f64 {
        self.lambda[percept][action]
    }

    pub fn set_lambda(&mut self, percept: usize, action: usize, value: f64) -> Result<()> {
        if percept >= self.lambda.len() || action >= self.lambda[0].len() {
            return Err(Error::IndexOutOfRange { what: "coupling", index: percept, limit: self.lambda.len() });
        }
        self.lambda[percept][action] = value;
        Ok(())
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.lambda.len(), self.lambda[0].len())
    }

    pub fn apply_update(&mut self, percept: usize, action: usize, rewarded: bool, params: &LearningParams) {
        for (j, row) in self.lambda.iter_mut().enumerate() {
            for (a, value) in row.iter_mut().enumerate() {
                *value = params.apply(*value, rewarded && j == percept && a == action);
            }
        }
    }

    pub fn updated(&self, percept: usize, action: usize, rewarded: bool, params: &LearningParams) -> Self {
        let mut c = self.clone();
        c.apply_update(percept, action, rewarded, params);
        c
    }
}

pub fn build_hamiltonian(c: &DriveCouplings, reg: &CompressedRegister) -> Result<ComplexMatrix> {
    if c.shape() != (reg.d, reg.n_actions) {
        return Err(Error::ShapeMismatch(format!(
            "couplings are {:?}, register needs ({}, {})",
            c.shape(),
            reg.d,
            reg.n_actions
        )));
    }
    let dim = reg.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    let sigma_x = ComplexMatrix::pauli_x();
    let drives: Vec<ComplexMatrix> = (0..reg.n_actions).map(|a| reg.on_action(a, &sigma_x)).collect();
    for j in 0..reg.d {
        let proj = reg.percept_projector(j);
        for (a, drive) in drives.iter().enumerate() {
            let value = c.lambda[j][a];
            if value != 0.0 {
                h = &h + &(&proj * drive).scale_real(value);
            }
        }
    }
    // the register's number operator counts its level, n̂ = Σ_j j|j⟩⟨j|
    if c.epsilon[0] != 0.0 {
        let levels: Vec<f64> = (0..reg.d).map(|j| j as f64).collect();
        let number = ComplexMatrix::real_diagonal(&levels).kron(&ComplexMatrix::identity(1 << reg.n_actions));
        h = &h + &number.scale_real(c.epsilon[0]);
    }
    let excited = ComplexMatrix::basis_op(2, 1, 1);
    for a in 0..reg.n_actions {
        if c.epsilon[a + 1] != 0.0 {
            h = &h + &reg.on_action(a, &excited).scale_real(c.epsilon[a + 1]);
        }
    }
    Ok(h)
}

/// `|j⟩⟨j| ⊗ |1⟩⟨1|_{a_k} ⊗ Π_{l≠k} |0⟩⟨0|_{a_l}`: percept `j` answered by
/// action `k` alone.
pub fn build_projector(percept: usize, action: usize, reg: &CompressedRegister) -> Result<ComplexMatrix> {
    let idx = reg.encode_event(percept, action)?;
    Ok(ComplexMatrix::basis_op(reg.dim(), idx, idx))
}

/// Amplitude damping `σ⁻` on every action qubit at `decay`, and percept
/// register dephasing `|j⟩⟨j|` at `dephasing`.
pub fn build_jumps(reg: &CompressedRegister, decay: f64, dephasing: f64) -> Result<Vec<JumpOperator>> {
    for rate in [decay, dephasing] {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::NegativeRate(rate));
        }
    }
    let mut jumps = Vec::new();
    if decay > 0.0 {
        let lowering = ComplexMatrix::basis_op(2, 0, 1);
        for a in 0..reg.n_actions {
            jumps.push(JumpOperator::new(reg.on_action(a, &lowering), decay)?);
        }
    }
    if dephasing > 0.0 {
        for j in 0..reg.d {
            jumps.push(JumpOperator::new(reg.percept_projector(j), dephasing)?);
        }
    }
    if decay < 0.0 || dephasing < 0.0 {
        return Err(Error::NegativeRate(decay.min(dephasing)));
    }
    Ok(jumps)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompressedNoise {
    pub decay: f64,
    pub dephasing: f64,
}

/// Evolves `|j⟩ ⊗ |0…0⟩` and reads `P_{j,a}(t)` for every action.
pub fn action_readout(
    c: &DriveCouplings,
    reg: &CompressedRegister,
    noise: CompressedNoise,
    percept: usize,
    config: &DeliberationConfig,
) -> Result<ActionReadout> {
    if percept >= reg.d {
        return Err(Error::IndexOutOfRange { what: "percept", index: percept, limit: reg.d });
    }
    let h = build_hamiltonian(c, reg)?;
    let jumps = build_jumps(reg, noise.decay, noise.dephasing)?;
    let psi0 = basis_vector(reg.dim(), reg.index(percept, 0));
    let traj: Trajectory = if jumps.is_empty() {
        evolve_closed(&h, &psi0, &config.grid)?
    } else {
        evolve_lindblad(&h, &jumps, &ComplexMatrix::outer(&psi0, &psi0), &config.grid)?
    };
    let series = (0..reg.n_actions)
        .map(|a| observable_series(&traj, &build_projector(percept, a, reg)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(read_actions(series, config))
}

#[derive(Debug, Clone)]
pub struct CompressedAgent {
    couplings: DriveCouplings,
    register: CompressedRegister,
    params: LearningParams,
    noise: CompressedNoise,
    config: DeliberationConfig,
}

impl CompressedAgent {
    pub fn new(
        couplings: DriveCouplings,
        params: LearningParams,
        noise: CompressedNoise,
        config: DeliberationConfig,
    ) -> Result<Self> {
        let (d, n_actions) = couplings.shape();
        let register = CompressedRegister::new(d, n_actions)?;
        Ok(Self { couplings, register, params, noise, config })
    }

    pub fn couplings(&self) -> &DriveCouplings {
        &self.couplings
    }
}

impl Agent for CompressedAgent {
    fn n_percepts(&self) -> usize {
        self.register.d
    }

    fn n_actions(&self) -> usize {
        self.register.n_actions
    }

    fn deliberate(&mut self, percept: usize, rng: &mut dyn RngCore) -> Result<Deliberation> {
        let readout = action_readout(&self.couplings, &self.register, self.noise, percept, &self.config)?;
        let (action, probabilities) = sample_normalized(&readout.raw_probabilities, readout.t_star, rng)?;
        Ok(Deliberation { action, t_star: Some(readout.t_star), probabilities })
    }

    fn learn(&mut self, percept: usize, action: usize, rewarded: bool) {
        self.couplings.apply_update(percept, action, rewarded, &self.params);
    }
}

/// `Σ_a λ_a σx⁽ᵃ⁾ + Σ_a ε_a n̂_a` on the action qubits alone.
pub fn action_block(lambdas: &[f64], action_eps: &[f64]) -> ComplexMatrix {
    let n = lambdas.len();
    let dim = 1 << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for a in 0..n {
        let pad = |op: &ComplexMatrix| {
            let factors: Vec<ComplexMatrix> =
                (0..n).map(|q| if q == a { op.clone() } else { ComplexMatrix::identity(2) }).collect();
            kron_all(&factors)
        };
        h = &h + &pad(&ComplexMatrix::pauli_x()).scale_real(lambdas[a]);
        h = &h + &pad(&ComplexMatrix::basis_op(2, 1, 1)).scale_real(action_eps[a]);
    }
    h
}

//! Excitation-mode quantum agent: each clip is a mode that holds or lacks a
//! single excitation, and deliberation is a continuous-time quantum walk.
//!
//! The Hamiltonian
//!
//! ```text
//! H = Σ_{j,k ∈ E} λ_jk (c_k† c_j + c_k c_j†) + Σ_j ε_j c_j† c_j
//! ```
//!
//! conserves excitation number, as do the incoherent hopping jumps
//! `c_k† c_j` at rate κ_jk. Dynamics therefore run in the single-excitation
//! sector (one basis state per clip), plus an explicit vacuum state when
//! amplitude decay `c_j` is enabled. The full qubit-register construction
//! [`build_hamiltonian_fock`] is kept as an independent check of that
//! reduction.

use std::collections::BTreeMap;

use rand::RngCore;

use crate::agent::{sample_normalized, Agent, Deliberation};
use crate::classical::{LearningParams, WeightedClipGraph};
use crate::clip::{toy_clips, ClipId, ClipKind, Edge};
use crate::dynamics::{evolve_closed, evolve_lindblad, find_peak, observable_series, JumpOperator, PeakStrategy, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::{basis_vector, kron_all, ComplexMatrix, TimeGrid, ONE};

/// Largest number of modes accepted by the qubit-register construction.
pub const FOCK_MAX_CLIPS: usize = 4;

/// Index ↔ clip mapping of the single-excitation sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationBasis {
    modes: Vec<ClipId>,
    include_vacuum: bool,
}

impl ExcitationBasis {
    pub fn new(modes: Vec<ClipId>, include_vacuum: bool) -> Result<Self> {
        let mut sorted = modes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(Error::ShapeMismatch("basis modes must be distinct".into()));
        }
        Ok(Self { modes, include_vacuum })
    }

    /// One mode per clip of `spec`, in clip order.
    pub fn for_spec(spec: &CouplingSpec, include_vacuum: bool) -> Self {
        Self { modes: (0..spec.clips.len()).map(ClipId).collect(), include_vacuum }
    }

    pub fn dim(&self) -> usize {
        self.modes.len() + usize::from(self.include_vacuum)
    }

    pub fn include_vacuum(&self) -> bool {
        self.include_vacuum
    }

    pub fn index_of(&self, clip: ClipId) -> Option<usize> {
        self.modes.iter().position(|&m| m == clip)
    }

    pub fn clip_at(&self, index: usize) -> Option<ClipId> {
        self.modes.get(index).copied()
    }

    /// Vacuum sits after every clip mode.
    pub fn vacuum_index(&self) -> Option<usize> {
        self.include_vacuum.then_some(self.modes.len())
    }

    fn require(&self, clip: ClipId) -> Result<usize> {
        self.index_of(clip).ok_or_else(|| Error::UnknownClip(format!("#{}", clip.0)))
    }
}

/// Couplings, on-site energies and noise rates of the excitation model.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    clips: Vec<ClipKind>,
    lambda: BTreeMap<Edge, f64>,
    epsilon: Vec<f64>,
    kappa: BTreeMap<Edge, f64>,
    decay: f64,
}

impl CouplingSpec {
    pub fn new(clips: Vec<ClipKind>) -> Self {
        let n = clips.len();
        Self { clips, lambda: BTreeMap::new(), epsilon: vec![0.0; n], kappa: BTreeMap::new(), decay: 0.0 }
    }

    /// Complete bipartite percept–action couplings `lambda0`, hopping rate
    /// `kappa` on every edge and uniform amplitude decay.
    pub fn invasion_game(n_symbols: usize, lambda0: f64, kappa: f64, decay: f64) -> Result<Self> {
        let mut spec = Self::new(toy_clips(n_symbols, n_symbols));
        for p in 0..n_symbols {
            for a in 0..n_symbols {
                let (from, to) = (ClipId(p), ClipId(n_symbols + a));
                spec.set_lambda(from, to, lambda0)?;
                spec.set_kappa(from, to, kappa)?;
            }
        }
        spec.set_decay(decay)?;
        Ok(spec)
    }

    /// Couplings equal to the weights of a classical memory graph.
    pub fn from_graph(graph: &WeightedClipGraph) -> Result<Self> {
        let mut spec = Self::new(graph.clips().to_vec());
        for (edge, w) in graph.edges() {
            spec.set_lambda(edge.from, edge.to, w)?;
        }
        Ok(spec)
    }

    pub fn clips(&self) -> &[ClipKind] {
        &self.clips
    }

    pub fn clip_id(&self, kind: ClipKind) -> Result<ClipId> {
        self.clips.iter().position(|&k| k == kind).map(ClipId).ok_or_else(|| Error::UnknownClip(kind.to_string()))
    }

    fn check_clip(&self, id: ClipId) -> Result<()> {
        if id.0 < self.clips.len() {
            Ok(())
        } else {
            Err(Error::UnknownClip(format!("#{}", id.0)))
        }
    }

    /// Stores λ for the undirected pair; an existing reverse edge is reused.
    pub fn set_lambda(&mut self, from: ClipId, to: ClipId, value: f64) -> Result<()> {
        self.check_clip(from)?;
        self.check_clip(to)?;
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidWeight {
                edge: format!("#{}-#{}", from.0, to.0),
                weight: value,
                reason: "coupling must be finite and >= 0".into(),
            });
        }
        let reverse = Edge::new(to, from);
        let key = if self.lambda.contains_key(&reverse) { reverse } else { Edge::new(from, to) };
        self.lambda.insert(key, value);
        Ok(())
    }

    /// `λ_jk`, symmetric in its arguments; 0 when no edge exists.
    pub fn lambda(&self, a: ClipId, b: ClipId) -> f64 {
        self.lambda.get(&Edge::new(a, b)).or_else(|| self.lambda.get(&Edge::new(b, a))).copied().unwrap_or(0.0)
    }

    pub fn lambda_edges(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.lambda.iter().map(|(e, v)| (*e, *v))
    }

    pub fn set_epsilon(&mut self, clip: ClipId, value: f64) -> Result<()> {
        self.check_clip(clip)?;
        self.epsilon[clip.0] = value;
        Ok(())
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    /// Incoherent hopping rate for the directed edge `from → to`.
    pub fn set_kappa(&mut self, from: ClipId, to: ClipId, rate: f64) -> Result<()> {
        self.check_clip(from)?;
        self.check_clip(to)?;
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::NegativeRate(rate));
        }
        self.kappa.insert(Edge::new(from, to), rate);
        Ok(())
    }

    pub fn kappa(&self, from: ClipId, to: ClipId) -> f64 {
        self.kappa.get(&Edge::new(from, to)).copied().unwrap_or(0.0)
    }

    pub fn set_decay(&mut self, rate: f64) -> Result<()> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::NegativeRate(rate));
        }
        self.decay = rate;
        Ok(())
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn is_dissipative(&self) -> bool {
        self.decay > 0.0 || self.kappa.values().any(|&k| k > 0.0)
    }

    /// Damped coupling update; the traversed pair additionally gains
    /// `params.reward()` when `rewarded`.
    pub fn apply_update(&mut self, traversed: Edge, rewarded: bool, params: &LearningParams) {
        for (edge, value) in self.lambda.iter_mut() {
            let hit = *edge == traversed || *edge == Edge::new(traversed.to, traversed.from);
            *value = params.apply(*value, rewarded && hit);
        }
    }

    pub fn updated(&self, traversed: Edge, rewarded: bool, params: &LearningParams) -> Self {
        let mut spec = self.clone();
        spec.apply_update(traversed, rewarded, params);
        spec
    }
}

/// Hamiltonian restricted to the single-excitation sector (and vacuum).
pub fn build_hamiltonian_sector(spec: &CouplingSpec, basis: &ExcitationBasis) -> Result<ComplexMatrix> {
    let dim = basis.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (edge, value) in &spec.lambda {
        let j = basis.require(edge.from)?;
        let k = basis.require(edge.to)?;
        h[(j, k)] += ONE * *value;
        h[(k, j)] += ONE * *value;
    }
    for (clip, eps) in spec.epsilon.iter().enumerate() {
        if *eps != 0.0 {
            let j = basis.require(ClipId(clip))?;
            h[(j, j)] += ONE * *eps;
        }
    }
    Ok(h)
}

/// Lowering operator `c_mode` on an `n_modes`-qubit register; mode 0 is the
/// leftmost tensor factor.
pub fn mode_lowering(n_modes: usize, mode: usize) -> ComplexMatrix {
    let sigma_minus = ComplexMatrix::basis_op(2, 0, 1);
    let factors: Vec<ComplexMatrix> =
        (0..n_modes).map(|m| if m == mode { sigma_minus.clone() } else { ComplexMatrix::identity(2) }).collect();
    kron_all(&factors)
}

/// `c† c` for one mode of the register.
pub fn mode_number(n_modes: usize, mode: usize) -> ComplexMatrix {
    let c = mode_lowering(n_modes, mode);
    &c.adjoint() * &c
}

/// Register state with the listed modes excited and the rest empty,
/// `c_{m1}† ⊗ c_{m2}† ⊗ … |vac⟩`.
pub fn fock_state(n_modes: usize, excited: &[usize]) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = (0..n_modes)
        .map(|m| {
            let bit = usize::from(excited.contains(&m));
            ComplexMatrix::from_vec(2, 1, basis_vector(2, bit))
        })
        .collect();
    kron_all(&factors)
}

/// Full `2^n`-dimensional Hamiltonian with every clip realized as a qubit.
pub fn build_hamiltonian_fock(spec: &CouplingSpec) -> Result<ComplexMatrix> {
    let n = spec.clips.len();
    if n > FOCK_MAX_CLIPS {
        return Err(Error::FockDimensionCap { max: FOCK_MAX_CLIPS, requested: n });
    }
    let lowering: Vec<ComplexMatrix> = (0..n).map(|m| mode_lowering(n, m)).collect();
    let raising: Vec<ComplexMatrix> = lowering.iter().map(ComplexMatrix::adjoint).collect();
    let dim = 1 << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (edge, value) in &spec.lambda {
        let (j, k) = (edge.from.0, edge.to.0);
        let hop = &(&raising[k] * &lowering[j]) + &(&lowering[k] * &raising[j]);
        h = &h + &hop.scale_real(*value);
    }
    for (j, eps) in spec.epsilon.iter().enumerate() {
        h = &h + &(&raising[j] * &lowering[j]).scale_real(*eps);
    }
    Ok(h)
}

/// Hopping jumps `|c_k⟩⟨c_j|` for every edge with κ > 0 and, when decay is
/// on, `|vac⟩⟨c_j|` for every clip.
pub fn build_jumps(spec: &CouplingSpec, basis: &ExcitationBasis) -> Result<Vec<JumpOperator>> {
    let dim = basis.dim();
    let mut jumps = Vec::new();
    for (edge, rate) in &spec.kappa {
        if *rate > 0.0 {
            let j = basis.require(edge.from)?;
            let k = basis.require(edge.to)?;
            jumps.push(JumpOperator::new(ComplexMatrix::basis_op(dim, k, j), *rate)?);
        }
    }
    if spec.decay > 0.0 {
        let vac = basis.vacuum_index().ok_or(Error::MissingVacuum)?;
        for clip in 0..spec.clips.len() {
            let j = basis.require(ClipId(clip))?;
            jumps.push(JumpOperator::new(ComplexMatrix::basis_op(dim, vac, j), spec.decay)?);
        }
    }
    Ok(jumps)
}

/// Which observable fixes the deliberation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakObservable {
    /// One shared time from the peak of `Σ_a P_a(t)`.
    #[default]
    Summed,
    /// Each action read at the peak of its own series.
    PerAction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliberationConfig {
    pub grid: TimeGrid,
    pub strategy: PeakStrategy,
    pub observable: PeakObservable,
}

impl Default for DeliberationConfig {
    fn default() -> Self {
        Self { grid: TimeGrid::default_window(), strategy: PeakStrategy::FirstLocalMax, observable: PeakObservable::Summed }
    }
}

/// Action probability series and the resulting choice, before sampling.
#[derive(Debug, Clone)]
pub struct ActionReadout {
    pub series: Vec<Vec<f64>>,
    pub t_star: f64,
    pub raw_probabilities: Vec<f64>,
}

pub(crate) fn read_actions(series: Vec<Vec<f64>>, config: &DeliberationConfig) -> ActionReadout {
    let grid = &config.grid;
    match config.observable {
        PeakObservable::Summed => {
            let total: Vec<f64> = (0..grid.len()).map(|n| series.iter().map(|s| s[n]).sum()).collect();
            let (index, t_star) = find_peak(&total, grid, config.strategy);
            let raw_probabilities = series.iter().map(|s| s[index]).collect();
            ActionReadout { series, t_star, raw_probabilities }
        }
        PeakObservable::PerAction => {
            let peaks: Vec<(usize, f64)> = series.iter().map(|s| find_peak(s, grid, config.strategy)).collect();
            let raw_probabilities = series.iter().zip(&peaks).map(|(s, (i, _))| s[*i]).collect();
            let t_star = peaks.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            ActionReadout { series, t_star, raw_probabilities }
        }
    }
}

/// Evolves `|percept⟩` and reads every action population.
pub fn action_readout(spec: &CouplingSpec, percept: usize, config: &DeliberationConfig) -> Result<ActionReadout> {
    let basis = ExcitationBasis::for_spec(spec, spec.decay > 0.0);
    let h = build_hamiltonian_sector(spec, &basis)?;
    let jumps = build_jumps(spec, &basis)?;
    let start = basis.require(spec.clip_id(ClipKind::Percept(percept))?)?;
    let psi0 = basis_vector(basis.dim(), start);
    let traj: Trajectory = if jumps.is_empty() {
        evolve_closed(&h, &psi0, &config.grid)?
    } else {
        evolve_lindblad(&h, &jumps, &ComplexMatrix::outer(&psi0, &psi0), &config.grid)?
    };
    let n_actions = spec.clips.iter().filter(|k| k.is_action()).count();
    let series = (0..n_actions)
        .map(|a| {
            let idx = basis.require(spec.clip_id(ClipKind::Action(a))?)?;
            observable_series(&traj, &ComplexMatrix::basis_op(basis.dim(), idx, idx))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(read_actions(series, config))
}

/// Excitation-mode agent for the invasion game.
#[derive(Debug, Clone)]
pub struct ExcitationAgent {
    spec: CouplingSpec,
    params: LearningParams,
    config: DeliberationConfig,
}

impl ExcitationAgent {
    pub fn new(spec: CouplingSpec, params: LearningParams, config: DeliberationConfig) -> Self {
        Self { spec, params, config }
    }

    pub fn spec(&self) -> &CouplingSpec {
        &self.spec
    }

    fn edge(&self, percept: usize, action: usize) -> Result<Edge> {
        Ok(Edge::new(self.spec.clip_id(ClipKind::Percept(percept))?, self.spec.clip_id(ClipKind::Action(action))?))
    }
}

impl Agent for ExcitationAgent {
    fn n_percepts(&self) -> usize {
        self.spec.clips.iter().filter(|k| k.is_percept()).count()
    }

    fn n_actions(&self) -> usize {
        self.spec.clips.iter().filter(|k| k.is_action()).count()
    }

    fn deliberate(&mut self, percept: usize, rng: &mut dyn RngCore) -> Result<Deliberation> {
        let readout = action_readout(&self.spec, percept, &self.config)?;
        let (action, probabilities) = sample_normalized(&readout.raw_probabilities, readout.t_star, rng)?;
        Ok(Deliberation { action, t_star: Some(readout.t_star), probabilities })
    }

    fn learn(&mut self, percept: usize, action: usize, rewarded: bool) {
        let edge = self.edge(percept, action).expect("percept and action come from this agent");
        self.spec.apply_update(edge, rewarded, &self.params);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ZERO;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn two_clip_spec(lambda: f64) -> CouplingSpec {
        let mut spec = CouplingSpec::new(vec![ClipKind::Percept(0), ClipKind::Action(0)]);
        spec.set_lambda(ClipId(0), ClipId(1), lambda).unwrap();
        spec
    }

    #[test]
    fn sector_two_clips() {
        let spec = two_clip_spec(1.0);
        let h = build_hamiltonian_sector(&spec, &ExcitationBasis::for_spec(&spec, false)).unwrap();
        assert_eq!(h, ComplexMatrix::pauli_x());
    }

    #[test]
    fn sector_toy_graph() {
        let spec = CouplingSpec::invasion_game(2, 1.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian_sector(&spec, &ExcitationBasis::for_spec(&spec, false)).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if (r < 2) != (c < 2) { 1.0 } else { 0.0 };
                assert_eq!(h[(r, c)], ONE * expected, "({r},{c})");
            }
        }
        assert_eq!(h.hermitian_deviation(), 0.0);
    }

    #[test]
    fn sector_on_site_only() {
        let mut spec = CouplingSpec::new(vec![ClipKind::Percept(0), ClipKind::Action(0)]);
        spec.set_epsilon(ClipId(0), 1.0).unwrap();
        spec.set_epsilon(ClipId(1), 2.0).unwrap();
        let h = build_hamiltonian_sector(&spec, &ExcitationBasis::for_spec(&spec, false)).unwrap();
        assert_eq!(h, ComplexMatrix::real_diagonal(&[1.0, 2.0]));
    }

    #[test]
    fn sector_vacuum_row_is_zero() {
        let spec = two_clip_spec(2.0);
        let h = build_hamiltonian_sector(&spec, &ExcitationBasis::for_spec(&spec, true)).unwrap();
        assert_eq!(h.rows(), 3);
        assert!((0..3).all(|i| h[(2, i)] == ZERO && h[(i, 2)] == ZERO));
    }

    #[test]
    fn sector_rejects_unknown_clip() {
        let spec = CouplingSpec::invasion_game(2, 1.0, 0.0, 0.0).unwrap();
        let basis = ExcitationBasis::new(vec![ClipId(0), ClipId(2)], false).unwrap();
        assert!(matches!(build_hamiltonian_sector(&spec, &basis), Err(Error::UnknownClip(_))));
        let mut spec = CouplingSpec::new(vec![ClipKind::Percept(0)]);
        assert!(spec.set_lambda(ClipId(0), ClipId(5), 1.0).is_err());
    }

    #[test]
    fn fock_single_mode_number_operator() {
        let mut spec = CouplingSpec::new(vec![ClipKind::Percept(0)]);
        spec.set_epsilon(ClipId(0), 2.0).unwrap();
        assert_eq!(build_hamiltonian_fock(&spec).unwrap(), ComplexMatrix::real_diagonal(&[0.0, 2.0]));
    }

    #[test]
    fn fock_hopping_element() {
        let h = build_hamiltonian_fock(&two_clip_spec(1.0)).unwrap();
        // |01⟩ = index 1, |10⟩ = index 2
        assert_eq!(h[(1, 2)], ONE);
        assert_eq!(h[(2, 1)], ONE);
        assert!(h.is_hermitian(0.0));
    }

    #[test]
    fn fock_commutes_with_total_number() {
        let mut spec = CouplingSpec::invasion_game(2, 1.3, 0.0, 0.0).unwrap();
        spec.set_epsilon(ClipId(2), 0.7).unwrap();
        let h = build_hamiltonian_fock(&spec).unwrap();
        let mut number = ComplexMatrix::zeros(16, 16);
        for m in 0..4 {
            number = &number + &mode_number(4, m);
        }
        let commutator = &(&h * &number) - &(&number * &h);
        assert!(commutator.max_abs() < 1e-12);
    }

    #[test]
    fn fock_dimension_cap() {
        let spec = CouplingSpec::invasion_game(3, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(build_hamiltonian_fock(&spec), Err(Error::FockDimensionCap { max: 4, requested: 6 })));
    }

    #[test]
    fn fock_state_matches_raising_operators() {
        let vac = fock_state(3, &[]);
        let raised = &(&mode_lowering(3, 0).adjoint() * &mode_lowering(3, 2).adjoint()) * &vac;
        assert_eq!(raised, fock_state(3, &[0, 2]));
        assert_eq!(fock_state(3, &[0, 2])[(0b101, 0)], ONE);
    }

    #[test]
    fn jump_examples() {
        let spec = CouplingSpec::invasion_game(2, 1.0, 0.0, 0.0).unwrap();
        assert!(build_jumps(&spec, &ExcitationBasis::for_spec(&spec, false)).unwrap().is_empty());

        let mut spec = two_clip_spec(1.0);
        spec.set_kappa(ClipId(0), ClipId(1), 0.3).unwrap();
        let jumps = build_jumps(&spec, &ExcitationBasis::for_spec(&spec, false)).unwrap();
        assert_eq!(jumps.len(), 1);
        assert_eq!(jumps[0].rate(), 0.3);
        assert_eq!(jumps[0].matrix(), &ComplexMatrix::basis_op(2, 1, 0));

        let mut spec = two_clip_spec(1.0);
        spec.set_decay(0.1).unwrap();
        let jumps = build_jumps(&spec, &ExcitationBasis::for_spec(&spec, true)).unwrap();
        assert_eq!(jumps.len(), 2);
        for (j, jump) in jumps.iter().enumerate() {
            assert_eq!(jump.matrix(), &ComplexMatrix::basis_op(3, 2, j));
            assert_eq!(jump.rate(), 0.1);
        }
        assert!(matches!(build_jumps(&spec, &ExcitationBasis::for_spec(&spec, false)), Err(Error::MissingVacuum)));
    }

    #[test]
    fn coupling_update_examples() {
        let edge = Edge::new(ClipId(0), ClipId(1));
        let spec = two_clip_spec(1.0).updated(edge, true, &LearningParams::new(0.0, 1.0).unwrap());
        assert_eq!(spec.lambda(ClipId(0), ClipId(1)), 2.0);

        let spec = two_clip_spec(4.0).updated(edge, false, &LearningParams::new(0.25, 1.0).unwrap());
        assert_eq!(spec.lambda(ClipId(0), ClipId(1)), 3.25);

        let spec = two_clip_spec(1.0).updated(edge, false, &LearningParams::new(0.6, 1.0).unwrap());
        assert_eq!(spec.lambda(ClipId(0), ClipId(1)), 1.0);

        // reward reaches the stored edge whichever direction it is named in
        let reversed = Edge::new(ClipId(1), ClipId(0));
        let spec = two_clip_spec(1.0).updated(reversed, true, &LearningParams::new(0.0, 0.5).unwrap());
        assert_eq!(spec.lambda(ClipId(1), ClipId(0)), 1.5);
    }

    #[test]
    fn rabi_deliberation_picks_only_coupled_action() {
        let mut spec = CouplingSpec::new(toy_clips(1, 2));
        spec.set_lambda(ClipId(0), ClipId(1), 1.0).unwrap();
        let mut agent = ExcitationAgent::new(spec, LearningParams::new(0.0, 1.0).unwrap(), DeliberationConfig::default());
        let d = agent.deliberate(0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(d.action, 0);
        assert_eq!(d.probabilities, vec![1.0, 0.0]);
        let dt = TimeGrid::default_window().dt();
        assert!((d.t_star.unwrap() - PI / 2.0).abs() <= dt);
    }

    #[test]
    fn symmetric_couplings_give_equal_series() {
        let spec = CouplingSpec::invasion_game(2, 1.0, 0.0, 0.0).unwrap();
        let readout = action_readout(&spec, 0, &DeliberationConfig::default()).unwrap();
        for (a, b) in readout.series[0].iter().zip(&readout.series[1]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((readout.raw_probabilities[0] - readout.raw_probabilities[1]).abs() < 1e-12);
    }

    #[test]
    fn strong_hopping_noise_keeps_trace() {
        let spec = CouplingSpec::invasion_game(2, 1e-3, 5.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.0, 2.0 * PI, 2001).unwrap();
        let basis = ExcitationBasis::for_spec(&spec, false);
        let h = build_hamiltonian_sector(&spec, &basis).unwrap();
        let jumps = build_jumps(&spec, &basis).unwrap();
        let rho0 = ComplexMatrix::basis_op(4, 0, 0);
        let traj = evolve_lindblad(&h, &jumps, &rho0, &grid).unwrap();
        for n in 0..grid.len() {
            assert!((traj.density_matrix(n).trace().re - 1.0).abs() < 1e-8);
        }
        let config = DeliberationConfig { grid, ..Default::default() };
        let readout = action_readout(&spec, 0, &config).unwrap();
        let p = &readout.raw_probabilities;
        assert!((p[0] - p[1]).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn fully_decayed_state_fails_deliberation() {
        // a percept with no couplings decays straight to vacuum
        let mut spec = CouplingSpec::new(toy_clips(1, 1));
        spec.set_decay(1.0).unwrap();
        let mut agent = ExcitationAgent::new(spec, LearningParams::new(0.0, 1.0).unwrap(), DeliberationConfig::default());
        let err = agent.deliberate(0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, Error::DeliberationFailure { .. }));
    }
}

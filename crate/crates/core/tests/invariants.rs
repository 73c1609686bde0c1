use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use qpsim::classical::{LearningParams, WeightedClipGraph};
use qpsim::clip::{ClipId, ClipKind, Edge};
use qpsim::compressed::{self, CompressedAgent, CompressedNoise, CompressedRegister, DriveCouplings};
use qpsim::dynamics::{
    evolve_closed, evolve_lindblad, find_peak, first_peak_time, observable_series, PeakStrategy, Trajectory,
};
use qpsim::excitation::{self, CouplingSpec, DeliberationConfig, ExcitationBasis};
use qpsim::numerics::{basis_vector, inner, min_eigenvalue_hermitian, ComplexMatrix, TimeGrid};
use qpsim::Agent;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-5i32..=5, -5i32..=5), rows * cols).prop_map(move |v| {
        ComplexMatrix::from_vec(rows, cols, v.into_iter().map(|(re, im)| Complex64::new(re.into(), im.into())).collect())
    })
}

/// Random Hermitian matrix with entries bounded so that its 1-norm is at most `bound`.
fn hermitian(dim: usize, bound: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let raw = ComplexMatrix::from_vec(dim, dim, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect());
        let h = raw.hermitian_part();
        let norm = h.norm_one();
        if norm > 0.0 {
            h.scale_real(bound / norm)
        } else {
            h
        }
    })
}

fn density_at(traj: &Trajectory, index: usize) -> ComplexMatrix {
    traj.density_matrix(index)
}

proptest! {
    #[test]
    fn kron_is_associative(a in int_matrix(2, 2), b in int_matrix(2, 3), c in int_matrix(3, 1)) {
        prop_assert_eq!(a.kron(&b).kron(&c), a.kron(&b.kron(&c)));
    }

    #[test]
    fn expm_inverse(a in hermitian(4, 10.0)) {
        let product = &a.expm().unwrap() * &a.scale_real(-1.0).expm().unwrap();
        prop_assert!((&product - &ComplexMatrix::identity(4)).max_abs() < 1e-8);
    }

    #[test]
    fn expm_of_hermitian_is_unitary(h in hermitian(5, 8.0), t in 0.0f64..3.0) {
        let u = h.scale(Complex64::new(0.0, -t)).expm().unwrap();
        prop_assert!((&(&u.adjoint() * &u) - &ComplexMatrix::identity(5)).max_abs() < 1e-8);
    }

    #[test]
    fn closed_evolution_conserves_energy(h in hermitian(4, 6.0), start in 0usize..4) {
        let grid = TimeGrid::default_window();
        let traj = evolve_closed(&h, &basis_vector(4, start), &grid).unwrap();
        let energy = traj.expectation_series(&h);
        prop_assert!(energy.iter().all(|e| (e - energy[0]).abs() < 1e-7));
    }

    #[test]
    fn lindblad_state_stays_physical(h in hermitian(3, 4.0), k1 in 0.0f64..1.0, k2 in 0.0f64..1.0) {
        let jumps = vec![
            qpsim::dynamics::JumpOperator::new(ComplexMatrix::basis_op(3, 1, 0), k1).unwrap(),
            qpsim::dynamics::JumpOperator::new(ComplexMatrix::basis_op(3, 2, 1), k2).unwrap(),
        ];
        let grid = TimeGrid::default_window();
        let psi = basis_vector(3, 0);
        let traj = evolve_lindblad(&h, &jumps, &ComplexMatrix::outer(&psi, &psi), &grid).unwrap();
        for i in 0..grid.len() {
            let rho = density_at(&traj, i);
            prop_assert!((rho.trace().re - 1.0).abs() <= 1e-8);
            prop_assert!(rho.hermitian_deviation() <= 1e-9);
            prop_assert!(min_eigenvalue_hermitian(&rho).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn peak_ignores_monotone_rescaling(series in prop::collection::vec(0.0f64..1.0, 2..60), scale in 0.1f64..10.0, shift in -1.0f64..1.0) {
        let grid = TimeGrid::new(0.0, 1.0, series.len()).unwrap();
        let rescaled: Vec<f64> = series.iter().map(|x| (scale * x + shift).exp()).collect();
        prop_assert_eq!(first_peak_time(&series, &grid).0, first_peak_time(&rescaled, &grid).0);
        prop_assert_eq!(
            find_peak(&series, &grid, PeakStrategy::FirstLocalMax).0,
            find_peak(&rescaled, &grid, PeakStrategy::FirstLocalMax).0
        );
    }

    #[test]
    fn hop_probabilities_ignore_uniform_scaling(w in prop::collection::vec(1.0f64..20.0, 3), c in 1.0f64..50.0) {
        let clips = vec![ClipKind::Percept(0), ClipKind::Action(0), ClipKind::Action(1), ClipKind::Action(2)];
        let mut g = WeightedClipGraph::new(clips.clone());
        let mut scaled = WeightedClipGraph::new(clips);
        for (a, &wa) in w.iter().enumerate() {
            g.add_edge(ClipId(0), ClipId(a + 1), wa).unwrap();
            scaled.add_edge(ClipId(0), ClipId(a + 1), c * wa).unwrap();
        }
        let p = g.hop_probabilities(ClipId(0)).unwrap();
        let q = scaled.hop_probabilities(ClipId(0)).unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert_eq!(x.0, y.0);
            prop_assert!((x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_never_drop_below_one(
        damping in 0.0f64..=1.0,
        reward in 0.0f64..5.0,
        steps in prop::collection::vec((0usize..2, 0usize..2, any::<bool>()), 0..80),
    ) {
        let params = LearningParams::new(damping, reward).unwrap();
        let mut g = WeightedClipGraph::invasion_game(2, 1.0).unwrap();
        for (p, a, rewarded) in steps {
            g.apply_update(&[Edge::new(ClipId(p), ClipId(2 + a))], rewarded, &params);
        }
        prop_assert!(g.edges().all(|(_, w)| w >= 1.0));
    }

    #[test]
    fn coupling_updates_keep_symmetry(steps in prop::collection::vec((0usize..2, 0usize..2, any::<bool>()), 1..40)) {
        let params = LearningParams::new(0.05, 1.0).unwrap();
        let mut spec = CouplingSpec::invasion_game(2, 1.0, 0.0, 0.0).unwrap();
        for (p, a, rewarded) in steps {
            let (from, to) = (ClipId(p), ClipId(2 + a));
            let edge = if rewarded { Edge::new(from, to) } else { Edge::new(to, from) };
            spec.apply_update(edge, rewarded, &params);
        }
        for j in 0..4 {
            for k in 0..4 {
                prop_assert_eq!(spec.lambda(ClipId(j), ClipId(k)), spec.lambda(ClipId(k), ClipId(j)));
            }
        }
        let basis = ExcitationBasis::for_spec(&spec, false);
        let h = excitation::build_hamiltonian_sector(&spec, &basis).unwrap();
        prop_assert!(h.is_hermitian(0.0));
    }

    #[test]
    fn sector_matches_register(l in prop::collection::vec(1.0f64..3.0, 3), eps in prop::collection::vec(0.0f64..1.0, 3)) {
        let mut spec = CouplingSpec::new(vec![ClipKind::Percept(0), ClipKind::Action(0), ClipKind::Action(1)]);
        for (&(a, b), &v) in [(0, 1), (0, 2), (1, 2)].iter().zip(&l) {
            spec.set_lambda(ClipId(a), ClipId(b), v).unwrap();
        }
        for (j, &e) in eps.iter().enumerate() {
            spec.set_epsilon(ClipId(j), e).unwrap();
        }
        let grid = TimeGrid::new(0.0, 2.0 * PI, 101).unwrap();
        let basis = ExcitationBasis::for_spec(&spec, false);
        let sector = evolve_closed(&excitation::build_hamiltonian_sector(&spec, &basis).unwrap(), &basis_vector(3, 0), &grid).unwrap();
        let h = excitation::build_hamiltonian_fock(&spec).unwrap();
        let fock = evolve_closed(&h, excitation::fock_state(3, &[0]).as_slice(), &grid).unwrap();
        for k in 0..3 {
            let s = observable_series(&sector, &ComplexMatrix::basis_op(3, k, k)).unwrap();
            let f = observable_series(&fock, &excitation::mode_number(3, k)).unwrap();
            prop_assert!(s.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }

    #[test]
    fn compressed_sectors_are_isolated(
        l in prop::collection::vec(0.0f64..3.0, 4),
        eps in prop::collection::vec(0.0f64..1.0, 3),
        percept in 0usize..2,
    ) {
        let reg = CompressedRegister::new(2, 2).unwrap();
        let c = DriveCouplings::new(vec![l[..2].to_vec(), l[2..].to_vec()], eps.clone()).unwrap();
        let h = compressed::build_hamiltonian(&c, &reg).unwrap();
        let block = 4;
        for j in 0..2 {
            let expected = compressed::action_block(&c_row(&l, j), &eps[1..]);
            let reg_energy = eps[0] * j as f64;
            for r in 0..block {
                for col in 0..block {
                    let shift = if r == col { reg_energy } else { 0.0 };
                    let got = h[(j * block + r, j * block + col)];
                    prop_assert!((got - expected[(r, col)] - Complex64::new(shift, 0.0)).norm() < 1e-12);
                }
            }
        }
        let grid = TimeGrid::default_window();
        let traj = evolve_closed(&h, &basis_vector(8, reg.index(percept, 0)), &grid).unwrap();
        let mut marginal = ComplexMatrix::zeros(8, 8);
        for bits in 0..block {
            let i = reg.index(percept, bits);
            marginal[(i, i)] = Complex64::new(1.0, 0.0);
        }
        prop_assert!(traj.expectation_series(&marginal).iter().all(|m| (m - 1.0).abs() < 1e-9));
    }
}

fn c_row(l: &[f64], j: usize) -> Vec<f64> {
    l[2 * j..2 * j + 2].to_vec()
}

#[test]
fn rewards_accumulate_exactly_without_damping() {
    let params = LearningParams::new(0.0, 1.5).unwrap();
    let edge = Edge::new(ClipId(0), ClipId(2));
    let mut g = WeightedClipGraph::invasion_game(2, 1.0).unwrap();
    for n in 1..=25 {
        g.apply_update(&[edge], true, &params);
        assert_eq!(g.weight(edge), Some(1.0 + 1.5 * n as f64));
    }
}

#[test]
fn unrewarded_weights_decay_geometrically() {
    let damping = 0.2;
    let params = LearningParams::new(damping, 1.0).unwrap();
    let mut g = WeightedClipGraph::new(vec![ClipKind::Percept(0), ClipKind::Action(0)]);
    let edge = Edge::new(ClipId(0), ClipId(1));
    g.add_edge(edge.from, edge.to, 9.0).unwrap();
    let mut previous = 8.0;
    for _ in 0..30 {
        g.apply_update(&[edge], false, &params);
        let excess = g.weight(edge).unwrap() - 1.0;
        assert!(excess < previous);
        assert!((excess - previous * (1.0 - damping)).abs() < 1e-12);
        previous = excess;
    }
}

#[test]
fn stronger_coupling_raises_its_action_probability() {
    let config = DeliberationConfig::default();
    let mut last = 0.0;
    for lambda in [1.0, 1.5, 2.0, 3.0] {
        let mut spec = CouplingSpec::invasion_game(2, 1.0, 0.0, 0.0).unwrap();
        spec.set_lambda(ClipId(0), ClipId(2), lambda).unwrap();
        let r = excitation::action_readout(&spec, 0, &config).unwrap();
        let p = r.raw_probabilities[0];
        assert!(p > last, "lambda {lambda}: {p} <= {last}");
        last = p;
    }
}

#[test]
fn hopping_keeps_the_excitation() {
    let mut spec = CouplingSpec::invasion_game(2, 1.3, 0.4, 0.0).unwrap();
    spec.set_epsilon(ClipId(1), 0.3).unwrap();
    let basis = ExcitationBasis::for_spec(&spec, false);
    let h = excitation::build_hamiltonian_sector(&spec, &basis).unwrap();
    let jumps = excitation::build_jumps(&spec, &basis).unwrap();
    let psi = basis_vector(4, 0);
    let traj = evolve_lindblad(&h, &jumps, &ComplexMatrix::outer(&psi, &psi), &TimeGrid::default_window()).unwrap();
    for i in 0..traj.len() {
        assert!((traj.density_matrix(i).trace().re - 1.0).abs() < 1e-8);
    }
}

/// Series on a grid and on the same grid with half the spacing, compared at
/// the shared points.
fn halving_gap(spec: &CouplingSpec) -> f64 {
    let coarse = TimeGrid::default_window();
    let fine = coarse.refined();
    let basis = ExcitationBasis::for_spec(spec, spec.decay() > 0.0);
    let h = excitation::build_hamiltonian_sector(spec, &basis).unwrap();
    let jumps = excitation::build_jumps(spec, &basis).unwrap();
    let psi = basis_vector(basis.dim(), 0);
    let rho0 = ComplexMatrix::outer(&psi, &psi);
    let a = evolve_lindblad(&h, &jumps, &rho0, &coarse).unwrap();
    let b = evolve_lindblad(&h, &jumps, &rho0, &fine).unwrap();
    let mut gap = 0.0f64;
    for k in 0..basis.dim() {
        let p = ComplexMatrix::basis_op(basis.dim(), k, k);
        let sa = observable_series(&a, &p).unwrap();
        let sb = observable_series(&b, &p).unwrap();
        gap = sa.iter().enumerate().map(|(i, x)| (x - sb[2 * i]).abs()).fold(gap, f64::max);
    }
    gap
}

#[test]
fn halving_dt_leaves_series_unchanged() {
    for (lambda, kappa, decay) in [(1.0, 0.05, 0.0), (3.0, 0.2, 0.1), (20.0, 0.2, 0.0), (90.0, 0.05, 0.05)] {
        let mut spec = CouplingSpec::invasion_game(2, 1.0, kappa, decay).unwrap();
        spec.set_lambda(ClipId(0), ClipId(2), lambda).unwrap();
        let gap = halving_gap(&spec);
        assert!(gap <= 1e-6, "lambda {lambda}, kappa {kappa}, decay {decay}: {gap:.2e}");
    }
}

#[test]
fn projectors_are_mutually_orthogonal() {
    let reg = CompressedRegister::new(3, 2).unwrap();
    let mut all = Vec::new();
    for j in 0..3 {
        for k in 0..2 {
            all.push(compressed::build_projector(j, k, &reg).unwrap());
        }
    }
    for (x, p) in all.iter().enumerate() {
        for (y, q) in all.iter().enumerate() {
            if x != y {
                assert_eq!((p * q).max_abs(), 0.0);
            }
        }
    }
}

#[test]
fn single_coupling_peaks_at_certainty() {
    for (j, a) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut c = DriveCouplings::uniform(2, 2, 0.0).unwrap();
        c.set_lambda(j, a, 1.3).unwrap();
        let params = LearningParams::new(0.0, 1.0).unwrap();
        let mut agent =
            CompressedAgent::new(c, params, CompressedNoise::default(), DeliberationConfig::default()).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        let d = agent.deliberate(j, &mut rng).unwrap();
        assert!(d.probabilities[a] >= 1.0 - 1e-6, "{j},{a}: {:?}", d.probabilities);
    }
}

#[test]
fn closed_evolution_keeps_norm() {
    let h = ComplexMatrix::from_real_rows(&[&[0.0, 2.0, 1.0], &[2.0, 0.5, 0.0], &[1.0, 0.0, -1.0]]);
    let traj = evolve_closed(&h, &basis_vector(3, 1), &TimeGrid::default_window()).unwrap();
    if let qpsim::dynamics::States::Pure(states) = traj.states() {
        for psi in states {
            assert!((inner(psi, psi).re - 1.0).abs() < 1e-10);
        }
    } else {
        panic!("closed evolution yields pure states");
    }
}

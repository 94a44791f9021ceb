//! Fock-space oracle checks of the residual engine, the generator algebra,
//! the unitary construction and the multireference coefficients.

use downfold_core::fermion::{bit, reference_state};
use downfold_core::fock_oracle::mr::{evaluate_mr_coefficients, printed_a, printed_c, MrAmplitudes};
use downfold_core::fock_oracle::unitary::{build_unitary, restrict_pair, transformed_hermiticity, unitarity_error};
use downfold_core::fock_oracle::*;
use downfold_core::integrals::{parse_fcidump, OneBodyTensor, TwoBodyTensor};
use downfold_core::rhd::*;
use downfold_core::tensor::Tensor4;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H2: &str = include_str!("../../downfold/fixtures/h2_sto3g.fcidump");

fn random_amps(seed: u64, layout: StepLayout, mode: BlockMode, scale: f64) -> AmplitudeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = AmplitudeSet::zeros(layout, mode);
    let x: Vec<f64> = (0..a.len()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    a.set_from_slice(&x);
    a
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn free_fermion_spectrum_is_subset_sums() {
    let eps = [-0.7, 0.2, 1.1];
    let h1 = OneBodyTensor { h1: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&eps)) };
    let h = build_hamiltonian(&h1, &TwoBodyTensor::zeros(3)).unwrap();
    let mut got: Vec<f64> = h.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    let mut want: Vec<f64> = (0u64..64)
        .map(|s| (0..6).filter(|b| s >> b & 1 == 1).map(|b| eps[b / 2]).sum())
        .collect();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    assert!(max_diff(&got, &want) < 1e-12);
    assert_eq!(h.hermiticity_error(), 0.0);
}

#[test]
fn single_orbital_levels() {
    // {0, ε, ε, 2ε + u} for h1 = [ε], h2 = [u]
    let (e, u) = (-0.4, 0.9);
    let h1 = OneBodyTensor { h1: DMatrix::from_element(1, 1, e) };
    let mut t = Tensor4::zeros(1);
    t[[0, 0, 0, 0]] = u;
    let h = build_hamiltonian(&h1, &TwoBodyTensor { h2: t }).unwrap();
    let d: Vec<f64> = (0..4).map(|k| h.matrix[(k, k)]).collect();
    assert!(max_diff(&d, &[0.0, e, e, 2.0 * e + u]) < 1e-15);
}

#[test]
fn h2_fixture_ground_state_is_fci() {
    let d = parse_fcidump(H2).unwrap();
    let basis = Basis::sector(2, 2).unwrap();
    let h = build_hamiltonian_on(&basis, &d.h1, &d.h2);
    let e0 = h.matrix.clone().symmetric_eigen().eigenvalues.min() + d.core_energy;
    assert!((e0 - -1.137270174660903).abs() < 1e-9, "{e0}");
}

#[test]
fn too_large_is_rejected() {
    assert!(matches!(Basis::full(6), Err(downfold_core::Error::TooLarge { n: 6, cap: 5 })));
}

#[test]
fn engine_matches_dense_projection() {
    for seed in 0..60u64 {
        let n = 2 + (seed % 3) as usize;
        let no = 1 + (seed / 3 % (n as u64 - 1)) as usize;
        let (_, h1, h2) = random_system(seed, n, 2 * no);
        let h = downfold_core::fermion::hamiltonian_terms(&h1, &h2);
        for mode in [BlockMode::SpinAdapted, BlockMode::Independent] {
            let a = random_amps(seed + 100, StepLayout::aufbau(n, no), mode, 0.3);
            let r = projected_residual(&h, &a).to_vec();
            let o = projected_residuals(&h1, &h2, &a).unwrap().to_vec();
            assert!(max_diff(&r, &o) < 1e-10, "seed {seed}");
        }
    }
}

#[test]
fn zero_amplitudes_give_fock_singles() {
    let (_, h1, h2) = random_system(3, 4, 4);
    let a = AmplitudeSet::zeros(StepLayout::aufbau(4, 2), BlockMode::SpinAdapted);
    let r = projected_residual(&downfold_core::fermion::hamiltonian_terms(&h1, &h2), &a);
    let f = downfold_core::integrals::fock_matrix(&h1, &h2, &[0, 1]);
    assert!(max_diff(&r.t1, &[f[(3, 0)], f[(3, 1)]]) < 1e-12);
}

#[test]
fn generator_algebra() {
    for seed in 0..20u64 {
        let (_, _, _) = random_system(seed, 3, 2);
        let basis = Basis::full(3).unwrap();
        let a = random_amps(seed, StepLayout::aufbau(3, 1), BlockMode::SpinAdapted, 1.0);
        let e = build_eta(&basis, &a);
        assert_eq!((&e.matrix * &e.matrix).norm(), 0.0);
        let (p, q) = projectors(&basis, 2);
        assert_eq!((&q * &e.matrix * &p - &e.matrix).norm(), 0.0);
        let (s, si) = build_similarity(&e);
        let id = DMatrix::<f64>::identity(basis.dim(), basis.dim());
        assert_eq!((&s.matrix * &si.matrix - id).norm(), 0.0);
    }
}

#[test]
fn spectrum_check_refuses_coupled_and_accepts_trivial() {
    let (_, h1, h2) = random_system(5, 3, 2);
    let h = build_hamiltonian(&h1, &h2).unwrap();
    let a = random_amps(5, StepLayout::aufbau(3, 1), BlockMode::SpinAdapted, 0.3);
    let e = build_eta(&h.basis, &a);
    assert!(matches!(spectrum_check(&h, &e, 2, 1e-8, 1e-7), Err(downfold_core::Error::NotDecoupled(_))));
    assert!(!spectrum_compare(&h, &e, 2, 1e-8).is_subset());
    // Free fermions with η = 0 are already decoupled.
    let h0 = build_hamiltonian(&OneBodyTensor { h1: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[-1.0, 0.3, 0.8])) }, &TwoBodyTensor::zeros(3)).unwrap();
    let zero = build_eta(&h0.basis, &AmplitudeSet::zeros(StepLayout::aufbau(3, 1), BlockMode::SpinAdapted));
    assert!(spectrum_check(&h0, &zero, 2, 1e-8, 1e-12).unwrap().is_subset());
}

#[test]
fn h2_converged_step_decouples_two_electron_sector() {
    let d = parse_fcidump(H2).unwrap();
    let sol = solve_step(&d.h1, &d.h2, 1, &DownfoldConfig { solver: SolverConfig { tol: 1e-12, ..Default::default() }, ..Default::default() }).unwrap();
    let basis = Basis::sector(2, 2).unwrap();
    let h = build_hamiltonian_on(&basis, &d.h1, &d.h2);
    let e = build_eta(&basis, &sol.amps);
    assert!(bloch_residual_norm(&h, &e, 1) < 1e-10);
    let rep = spectrum_check(&h, &e, 1, 1e-8, 1e-10).unwrap();
    assert!(rep.is_subset());
    let mut worse = sol.amps.clone();
    worse.t2p.iter_mut().for_each(|x| *x += 0.01);
    assert!(bloch_residual_norm(&h, &build_eta(&basis, &worse), 1) > bloch_residual_norm(&h, &e, 1));
}

#[test]
fn unitary_single_rotation() {
    let t = 0.7;
    let mut a = AmplitudeSet::zeros(StepLayout::aufbau(2, 1), BlockMode::SpinAdapted);
    a.t1[0] = t;
    let basis = Basis::full(2).unwrap();
    let u = build_unitary(&build_eta(&basis, &a));
    let (i, n) = (1u64 << bit(0, downfold_core::fermion::Spin::Up), 1u64 << bit(1, downfold_core::fermion::Spin::Up));
    let m = restrict_pair(&u, i, n).unwrap();
    let (c, s) = (1.0 / (1.0 + t * t as f64).sqrt(), t / (1.0 + t * t).sqrt());
    assert!((m[0][0] - c).abs() < 1e-14 && (m[0][1] + s).abs() < 1e-14);
    assert!((m[1][0] - s).abs() < 1e-14 && (m[1][1] - c).abs() < 1e-14);
    let zero = build_unitary(&build_eta(&basis, &AmplitudeSet::zeros(StepLayout::aufbau(2, 1), BlockMode::SpinAdapted)));
    assert_eq!(unitarity_error(&zero), 0.0);
}

#[test]
fn unitary_is_unitary_and_preserves_hermiticity() {
    for seed in 0..10u64 {
        let (_, h1, h2) = random_system(seed, 3, 2);
        let h = build_hamiltonian(&h1, &h2).unwrap();
        let a = random_amps(seed, StepLayout::aufbau(3, 1), BlockMode::SpinAdapted, 0.2);
        let u = build_unitary(&build_eta(&h.basis, &a));
        assert!(unitarity_error(&u) < 1e-12);
        let th = transformed_hermiticity(&h, &u, 2);
        assert!(th.asymmetry < 1e-10 && (th.pq - th.qp).abs() < 1e-10);
    }
}

fn random_mr(seed: u64, n: usize, scale: f64) -> MrAmplitudes {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = MrAmplitudes::zeros(n, n - 1);
    a.t1.iter_mut().for_each(|x| *x = scale * rng.random_range(-1.0..1.0));
    a.t2 = DMatrix::from_fn(n - 1, n - 1, |_, _| scale * rng.random_range(-1.0..1.0));
    a
}

#[test]
fn mr_coefficients_at_zero_amplitudes() {
    let (_, h1, h2) = random_system(11, 3, 2);
    let z = MrAmplitudes::zeros(3, 2);
    let c = evaluate_mr_coefficients(&h1, &h2, &z).unwrap();
    for (ii, &i) in [0usize, 1].iter().enumerate() {
        assert!((c.a[ii] + h1.h1[(i, 2)]).abs() < 1e-12);
        for (ji, &j) in [0usize, 1].iter().enumerate() {
            assert!((c.c[(ii, ji)] + h2.h2[[2, 2, i, j]]).abs() < 1e-12);
        }
    }
    let zero = evaluate_mr_coefficients(&OneBodyTensor { h1: DMatrix::zeros(3, 3) }, &TwoBodyTensor::zeros(3), &random_mr(1, 3, 0.5)).unwrap();
    assert_eq!(zero.a.iter().chain(zero.c.iter()).map(|x| x.abs()).fold(0.0, f64::max), 0.0);
    assert_eq!(zero.b_same.max_abs() + zero.b_opposite.max_abs() + zero.d_up.max_abs() + zero.d_down.max_abs(), 0.0);
}

#[test]
fn mr_singles_closed_form_matches_projection() {
    for seed in 0..200u64 {
        let (_, h1, h2) = random_system(seed, 3, 2);
        let amps = random_mr(seed, 3, 0.4);
        let exact = evaluate_mr_coefficients(&h1, &h2, &amps).unwrap();
        assert!(max_diff(&exact.a, &printed_a(&h1, &amps)) < 1e-10, "seed {seed}");
    }
}

#[test]
fn mr_paired_closed_form_report() {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let (_, h1, h2) = random_system(seed, 3, 2);
        let amps = random_mr(seed, 3, 0.4);
        let exact = evaluate_mr_coefficients(&h1, &h2, &amps).unwrap();
        worst = worst.max((&exact.c - printed_c(&h1, &h2, &amps)).abs().max());
        let z = MrAmplitudes::zeros(3, 2);
        let e0 = evaluate_mr_coefficients(&h1, &h2, &z).unwrap();
        assert!((&e0.c - printed_c(&h1, &h2, &z)).abs().max() < 1e-12);
    }
    eprintln!("paired-doubles closed form vs projection: max deviation {worst:.3e}");
}

#[test]
fn printed_residual_report() {
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    for seed in 0..20u64 {
        let (_, h1, h2) = random_system(seed, 4, 4);
        let a = random_amps(seed, StepLayout::aufbau(4, 2), BlockMode::SpinAdapted, 0.2);
        let f = downfold_core::integrals::fock_matrix(&h1, &h2, &[0, 1]);
        let exact = projected_residual(&downfold_core::fermion::hamiltonian_terms(&h1, &h2), &a);
        let p = printed_residual(&h2, &f, &a);
        w1 = w1.max(max_diff(&exact.t1, &p.t1));
        w2 = w2.max(max_diff(&exact.t2m.data, &p.t2m.data)).max(max_diff(&exact.t2p, &p.t2p));
        let z = AmplitudeSet::zeros(StepLayout::aufbau(4, 2), BlockMode::SpinAdapted);
        let (pe, pz) = (projected_residual(&downfold_core::fermion::hamiltonian_terms(&h1, &h2), &z), printed_residual(&h2, &f, &z));
        assert!(max_diff(&pe.t1, &pz.t1) < 1e-12);
        let _ = reference_state(&[0, 1]);
    }
    eprintln!("closed-form residuals vs projection: singles {w1:.3e}, doubles {w2:.3e}");
}

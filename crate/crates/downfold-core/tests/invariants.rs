//! Randomized invariants of the factorizations, the residual engine and the
//! generator.

use downfold_core::fermion::hamiltonian_terms;
use downfold_core::fock_oracle::unitary::{build_unitary, unitarity_error};
use downfold_core::fock_oracle::{build_eta, projected_residuals, projectors, random_system, Basis};
use downfold_core::rhd::{projected_residual, AmplitudeSet, BlockMode, StepLayout};
use downfold_core::tensor::Tensor3;
use downfold_core::tensorfactor::{cp_als, cp_reconstruct, pivoted_cholesky, CpConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn amps(seed: u64, n: usize, no: usize, mode: BlockMode, scale: f64) -> AmplitudeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = AmplitudeSet::zeros(StepLayout::aufbau(n, no), mode);
    let x: Vec<f64> = (0..a.len()).map(|_| rng.random_range(-scale..scale)).collect();
    a.set_from_slice(&x);
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cholesky_error_is_bounded_by_delta(seed in 0u64..10_000, n in 2usize..6, k in 2i32..10) {
        let (_, _, h2) = random_system(seed, n, 2);
        let delta = 10f64.powi(-k);
        let err = pivoted_cholesky(&h2, delta).unwrap().reconstruct().h2.distance(&h2.h2);
        prop_assert!(err <= delta * (1.0 + 1e-9), "error {err:e} above {delta:e}");
    }

    #[test]
    fn cp_error_never_rises(seed in 0u64..10_000, a in 2usize..6, b in 2usize..6, c in 2usize..5, rank in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = Tensor3::from_fn(a, b, c, |_, _, _| rng.random_range(-1.0..1.0));
        let f = cp_als(&t, &CpConfig { max_sweeps: 40, seed, ..CpConfig::new(rank) }).unwrap();
        let rise = f.history.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        prop_assert!(rise <= 1e-12, "error rose by {rise:e}");
        let last = *f.history.last().unwrap();
        prop_assert!((cp_reconstruct(&f).distance(&t).powi(2) - last).abs() <= 1e-9 * (1.0 + last));
    }

    #[test]
    fn residual_engine_matches_fock_space(seed in 0u64..10_000, n in 2usize..5, independent in any::<bool>()) {
        let no = 1 + (seed as usize) % (n - 1);
        let (_, h1, h2) = random_system(seed, n, 2 * no);
        let mode = if independent { BlockMode::Independent } else { BlockMode::SpinAdapted };
        let a = amps(seed ^ 0xa5, n, no, mode, 0.3);
        let r = projected_residual(&hamiltonian_terms(&h1, &h2), &a).to_vec();
        let o = projected_residuals(&h1, &h2, &a).unwrap().to_vec();
        let d = r.iter().zip(&o).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(d < 1e-10, "engine and oracle differ by {d:e}");
    }

    #[test]
    fn generator_maps_p_to_q_and_squares_to_zero(seed in 0u64..10_000, n in 2usize..5) {
        let no = 1 + (seed as usize) % (n - 1);
        let basis = Basis::sector(n, 2 * no).unwrap();
        let e = build_eta(&basis, &amps(seed, n, no, BlockMode::SpinAdapted, 1.0));
        let (p, q) = projectors(&basis, n - 1);
        prop_assert!((&e.matrix * &e.matrix).norm() < 1e-12);
        prop_assert!((&q * &e.matrix * &p - &e.matrix).norm() < 1e-12);
        prop_assert!(unitarity_error(&build_unitary(&e)) < 1e-12);
    }
}

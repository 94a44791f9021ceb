//! Block encoders and overlap circuits against dense linear algebra, and the
//! resource formulas against direct evaluation.

use downfold_core::qres::encoder::{build_block_encoder, encoder_readout, normalize};
use downfold_core::qres::estimate::{
    compare_tabulated, encoder_entries, estimate_expression, estimate_total, expression_polynomial, log_factor,
    tabulated_rows, CostModel,
};
use downfold_core::qres::ir::GateIR;
use downfold_core::qres::layout::RegisterLayout;
use downfold_core::qres::theorems::*;
use downfold_core::rhd::factorized::FactorDims;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 100;

fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn unitary_if_small(ir: &GateIR) {
    if ir.qubits <= 10 {
        let e = ir.unitarity_error().unwrap();
        assert!(e < 1e-10, "unitarity error {e:e}");
    }
}

#[test]
fn encoder_identity_and_zero() {
    let id = DMatrix::<f64>::identity(2, 2);
    let ir = build_block_encoder(&id, 0).unwrap();
    let r = encoder_readout(&ir, 2, 2, 0).unwrap();
    assert!((r - &id).abs().max() < 1e-15);

    let ir = build_block_encoder(&DMatrix::zeros(2, 2), 0).unwrap();
    let u = ir.densify().unwrap();
    // Qubits I, J, Â, D: the data qubit is the last bit.
    for base in [0b0000, 0b0100, 0b1000, 0b1100] {
        let blk = [[u[(base, base)], u[(base, base | 1)]], [u[(base | 1, base)], u[(base | 1, base | 1)]]];
        let iy = [[0.0, 1.0], [-1.0, 0.0]];
        for (r, w) in blk.iter().zip(iy) {
            assert!((r[0] - w[0]).abs() < 1e-15 && (r[1] - w[1]).abs() < 1e-15, "{blk:?}");
        }
        let other = base | 0b10;
        assert!((u[(other, other)] - 1.0).abs() < 1e-15 && (u[(other | 1, other | 1)] - 1.0).abs() < 1e-15);
    }
}

#[test]
fn encoder_random_readout_and_unitarity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for branch in [0u8, 1] {
        let a = random(&mut rng, 4, 4);
        let ir = build_block_encoder(&a, branch).unwrap();
        let want = if branch == 0 { a.clone() } else { a.transpose() };
        assert!((encoder_readout(&ir, 4, 4, branch).unwrap() - want).abs().max() < 1e-12);
        unitary_if_small(&ir);
        // Padding branches are still rotations.
        let b = random(&mut rng, 3, 5);
        let ir = build_block_encoder(&b, branch).unwrap();
        assert!(ir.unitarity_error().unwrap() < 1e-10);
    }
}

#[test]
fn matmul_identity_values() {
    let id = DMatrix::<f64>::identity(2, 2);
    for v in [MatmulVariant::Isometry, MatmulVariant::UnitaryOnly] {
        let r = verify_matmul(&id, &id, v).unwrap();
        assert_eq!(r.shape, vec![2, 2]);
        for (k, s) in r.simulated.iter().enumerate() {
            let want = if k % 3 == 0 { 0.25 } else { 0.0 };
            assert!((s - want).abs() < 1e-15, "{v:?} entry {k}: {s}");
        }
    }
}

#[test]
fn matmul_square_matches_p_squared_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (a, b) = (random(&mut rng, 4, 4), random(&mut rng, 4, 4));
    let (an, na) = normalize(&a);
    let (bn, nb) = normalize(&b);
    let oracle = &an * &bn / 16.0;
    for v in [MatmulVariant::Isometry, MatmulVariant::UnitaryOnly] {
        let r = verify_matmul(&a, &b, v).unwrap();
        for k in 0..16 {
            assert!((r.simulated[k] - oracle[(k / 4, k % 4)]).abs() < 1e-10);
        }
        assert!((na * nb) > 0.0);
    }
}

#[test]
fn matmul_random_inputs() {
    for v in [MatmulVariant::Isometry, MatmulVariant::UnitaryOnly] {
        for seed in 0..SEEDS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, p, m) = (rng.random_range(1..=8), rng.random_range(1..=8), rng.random_range(1..=8));
            let (a, b) = (random(&mut rng, n, p), random(&mut rng, p, m));
            let r = verify_matmul(&a, &b, v).unwrap();
            assert!(r.max_error < 1e-10, "{v:?} seed {seed}: {:e}", r.max_error);
            if seed % 10 == 0 {
                unitary_if_small(&r.circuit);
            }
        }
    }
}

#[test]
fn tensor_product_values() {
    let id = DMatrix::<f64>::identity(2, 2);
    let r = verify_tensor_product(&[&id, &id]).unwrap();
    assert!((r.simulated[0] - 0.25).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random(&mut rng, 2, 4);
    let r = verify_tensor_product(&[&a, &DMatrix::zeros(2, 2)]).unwrap();
    assert!(r.simulated.iter().all(|x| x.abs() < 1e-15));
    // Already-normalized 2×2 triples read out over √64.
    let t: Vec<_> = (0..3).map(|_| normalize(&random(&mut rng, 2, 2)).0).collect();
    let r = verify_tensor_product(&[&t[0], &t[1], &t[2]]).unwrap();
    for (k, s) in r.simulated.iter().enumerate() {
        let ix: Vec<usize> = (0..6).map(|b| (k >> (5 - b)) & 1).collect();
        let want = t[0][(ix[0], ix[1])] * t[1][(ix[2], ix[3])] * t[2][(ix[4], ix[5])] / 8.0;
        assert!((s - want).abs() < 1e-10);
    }
}

#[test]
fn tensor_product_random_inputs() {
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let three = seed % 2 == 1;
        let cap = if three { 4 } else { 8 };
        let k = if three { 3 } else { 2 };
        let mats: Vec<_> = (0..k).map(|_| {
            let (r, c) = (rng.random_range(1..=cap), rng.random_range(1..=cap));
            random(&mut rng, r, c)
        }).collect();
        let refs: Vec<&DMatrix<f64>> = mats.iter().collect();
        let r = verify_tensor_product(&refs).unwrap();
        assert!(r.max_error < 1e-10, "seed {seed}: {:e}", r.max_error);
        if seed % 10 == 0 {
            unitary_if_small(&r.circuit);
        }
    }
}

#[test]
fn tensor_contraction_values() {
    let id = DMatrix::<f64>::identity(2, 2);
    let r = verify_tensor_contraction(&[&id, &id]).unwrap();
    assert!((r.simulated[0] - 0.25).abs() < 1e-15);
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    assert!(verify_tensor_contraction(&[&a, &b]).unwrap().simulated[0].abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (a, b) = (normalize(&random(&mut rng, 4, 2)).0, normalize(&random(&mut rng, 4, 2)).0);
    let oracle = a.transpose() * &b / 8.0;
    let r = verify_tensor_contraction(&[&a, &b]).unwrap();
    for k in 0..4 {
        assert!((r.simulated[k] - oracle[(k / 2, k % 2)]).abs() < 1e-10);
    }
}

#[test]
fn tensor_contraction_random_inputs() {
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = if seed % 2 == 1 { 3 } else { 2 };
        let m = rng.random_range(1..=8);
        let mats: Vec<_> = (0..k).map(|_| {
            let c = rng.random_range(1..=8);
            random(&mut rng, m, c)
        }).collect();
        let refs: Vec<&DMatrix<f64>> = mats.iter().collect();
        let r = verify_tensor_contraction(&refs).unwrap();
        assert!(r.max_error < 1e-10, "seed {seed}: {:e}", r.max_error);
        if seed % 10 == 0 {
            unitary_if_small(&r.circuit);
        }
    }
}

#[test]
fn dot_and_hadamard_random_inputs() {
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n, x) = (rng.random_range(1..=8), rng.random_range(1..=8), rng.random_range(1..=8));
        let (a, b) = (random(&mut rng, m, x), random(&mut rng, n, x));
        let r = verify_dot(&a, &b).unwrap();
        assert!(r.max_error < 1e-10, "dot seed {seed}: {:e}", r.max_error);
        let c = random(&mut rng, m, x);
        let r = verify_hadamard(&a, &c).unwrap();
        assert!(r.max_error < 1e-10, "hadamard seed {seed}: {:e}", r.max_error);
        if seed % 10 == 0 {
            unitary_if_small(&r.circuit);
        }
    }
}

#[test]
fn circuits_serialize() {
    let id = DMatrix::<f64>::identity(2, 2);
    let ir = verify_matmul(&id, &id, MatmulVariant::UnitaryOnly).unwrap().circuit;
    let s = serde_json::to_string(&ir).unwrap();
    assert!(s.contains("\"gate\":\"multiplexor\"") && s.contains("\"tensor\":\"A\""));
    let back: GateIR = serde_json::from_str(&s).unwrap();
    assert_eq!(back, ir);
}

fn dims(n_o: usize, n_v: usize, n_aux: usize, n_htf: usize, n_ttf: usize) -> FactorDims {
    FactorDims { n_o, n_v, n_aux, n_htf, n_ttf }
}

#[test]
fn expression_depth_examples() {
    let d = dims(50, 1, 1094, 2000, 1);
    let e1 = estimate_expression(1, &d, 1e-3, CostModel::Diophantine).unwrap();
    assert_eq!(e1, 1000);
    assert!((e1 as f64 / (100.0 * libm::log2(1000.0)) - 1.0).abs() < 0.01);
    let e2 = estimate_expression(2, &d, 1e-3, CostModel::Diophantine).unwrap();
    assert_eq!(e2, 2 * (2 * 1094 * 2000 + 2 * 50 * 2000 + 2 * 2000 + 50) * 10);
    assert!((e2 as f64 / 9.13e7 - 1.0).abs() < 0.01);
    for id in 1..=11 {
        let p = expression_polynomial(id, &d).unwrap();
        for m in [CostModel::Diophantine, CostModel::SolovayKitaev] {
            assert_eq!(estimate_expression(id, &d, 0.5, m).unwrap(), 2 * p);
        }
    }
}

#[test]
fn unit_dims_estimate() {
    let d = dims(1, 1, 1, 1, 1);
    let e = estimate_total(&d, 1e-3, CostModel::Diophantine).unwrap();
    assert_eq!(e.qubits, 13);
    let poly: u64 = (1..=11).map(|id| expression_polynomial(id, &d).unwrap()).sum();
    assert_eq!(e.depth, 2 * poly * log_factor(1e-3).unwrap());
}

#[test]
fn cost_models_rescale_only() {
    let d = dims(20, 60, 200, 400, 60);
    for eps in [1e-2, 1e-3, 1e-5] {
        let dio = estimate_total(&d, eps, CostModel::Diophantine).unwrap();
        let sk = estimate_total(&d, eps, CostModel::SolovayKitaev).unwrap();
        assert!(dio.depth < sk.depth && dio.t_depth < sk.t_depth);
        let l = log_factor(eps).unwrap();
        let ratio = CostModel::SolovayKitaev.rotation_factor(l) / l;
        let exact = CostModel::SolovayKitaev.rotation_factor(l) % l == 0;
        for (a, b) in dio.breakdown.iter().zip(&sk.breakdown) {
            assert_eq!(a.cnot_depth, b.cnot_depth);
            assert_eq!(b.depth * l, a.depth * CostModel::SolovayKitaev.rotation_factor(l));
            if exact {
                assert_eq!(b.depth, a.depth * ratio);
            }
            assert_eq!(a.t_depth, 3 * l * a.cnot_depth);
        }
    }
}

#[test]
fn encoder_inventory_matches_formulas() {
    // Distinct primes keep every monomial identifiable.
    let d = dims(3, 5, 7, 11, 13);
    for id in 1..=11 {
        let counted = encoder_entries(id, &d).unwrap();
        let printed = expression_polynomial(id, &d).unwrap();
        if id == 10 {
            // The circuit loads three N-index factor vectors; the formula lists two.
            assert_eq!(counted, printed + d.n_htf as u64);
        } else {
            assert_eq!(counted, printed, "expression {id}");
        }
    }
}

#[test]
fn tabulated_rows_report() {
    for row in tabulated_rows() {
        let c = compare_tabulated(&row, CostModel::Diophantine).unwrap();
        let regs: Vec<String> = c.registers.iter().filter(|r| r.qubits > 0).map(|r| format!("{}={}", r.register, r.qubits)).collect();
        eprintln!(
            "{}: qubits {} vs {} ({:+}) [{}]; depth {:.3e} vs {:.3e} (x{:.2})",
            c.name,
            c.qubits,
            c.table_qubits,
            c.qubit_delta,
            regs.join(" "),
            c.depth as f64,
            c.table_depth,
            c.depth_ratio
        );
        assert_eq!(c.expressions.len(), 11);
        assert_eq!(c.expressions.iter().map(|e| e.depth).sum::<u64>(), c.depth);
    }
    let beta = compare_tabulated(&tabulated_rows()[1], CostModel::Diophantine).unwrap();
    assert_eq!(beta.qubits, 144);
}

proptest! {
    #[test]
    fn layout_and_totals_are_sums(o in 1usize..500, v in 1usize..2000, x in 1usize..5000, h in 1usize..5000, t in 1usize..3000, k in 1u32..6) {
        let d = dims(o, v, x, h, t);
        let l = RegisterLayout::from_dims(&d);
        prop_assert_eq!(l.total(), l.registers.iter().map(|r| r.1).sum::<usize>());
        let e = estimate_total(&d, 10f64.powi(-(k as i32)), CostModel::Diophantine).unwrap();
        prop_assert_eq!(e.qubits, l.total());
        prop_assert_eq!(e.depth, e.breakdown.iter().map(|b| b.depth).sum::<u64>());
        prop_assert_eq!(e.t_depth, e.breakdown.iter().map(|b| b.t_depth).sum::<u64>());
        prop_assert_eq!(e.cnot_depth, e.breakdown.iter().map(|b| b.cnot_depth).sum::<u64>());
    }

    #[test]
    fn matmul_overlaps_hold(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, p, m) = (rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=4));
        let (a, b) = (random(&mut rng, n, p), random(&mut rng, p, m));
        prop_assert!(verify_matmul(&a, &b, MatmulVariant::UnitaryOnly).unwrap().max_error < 1e-10);
    }
}

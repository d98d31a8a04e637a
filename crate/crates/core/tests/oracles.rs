use agm_core::ansatz::init_params;
use agm_core::exact::*;
use agm_core::hamiltonian::{sample_disorder, HamiltonianSpec};
use agm_core::lattice::{build_chain, build_square};
use agm_core::spin::SpinConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Op = [[f64; 2]; 2];
const X: Op = [[0.0, 1.0], [1.0, 0.0]];
const Z: Op = [[1.0, 0.0], [0.0, -1.0]];

/// Dense `⊗` of single-site operators (identity elsewhere), bit `b` of an
/// index being site `b` with a set bit meaning spin down.
fn embed(n: usize, ops: &[(usize, Op)]) -> Vec<Vec<f64>> {
    let dim = 1 << n;
    let mut m = vec![vec![0.0; dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            let mut v = 1.0;
            for b in 0..n {
                let (bi, bj) = ((i >> b) & 1, (j >> b) & 1);
                v *= match ops.iter().find(|(s, _)| *s == b) {
                    Some((_, op)) => op[bi][bj],
                    None => (bi == bj) as u8 as f64,
                };
            }
            *out = v;
        }
    }
    m
}

// Y ⊗ Y is real: the product of the two imaginary units is -1.
fn yy(n: usize, a: usize, b: usize) -> Vec<Vec<f64>> {
    const Y_IM: Op = [[0.0, -1.0], [1.0, 0.0]];
    let mut m = embed(n, &[(a, Y_IM), (b, Y_IM)]);
    m.iter_mut().flatten().for_each(|v| *v = -*v);
    m
}

fn add(acc: &mut [Vec<f64>], m: &[Vec<f64>], c: f64) {
    for (r, s) in acc.iter_mut().zip(m) {
        for (a, b) in r.iter_mut().zip(s) {
            *a += c * b;
        }
    }
}

fn pauli_reference(h: &HamiltonianSpec) -> Vec<Vec<f64>> {
    use agm_core::hamiltonian::Variant;
    use agm_core::lattice::BondAxis;
    let n = h.n_sites();
    let mut m = vec![vec![0.0; 1 << n]; 1 << n];
    let gr = &h.graph;
    for (k, &(a, b)) in gr.nn_bonds.iter().enumerate() {
        let zz = embed(n, &[(a, Z), (b, Z)]);
        match h.variant {
            Variant::Tim => add(&mut m, &zz, -1.0),
            Variant::Xxz => {
                add(&mut m, &zz, 1.0);
                add(&mut m, &embed(n, &[(a, X), (b, X)]), -h.g);
                add(&mut m, &yy(n, a, b), -h.g);
            }
            Variant::Dtim => add(&mut m, &zz, h.couplings[k]),
            Variant::Annni => {
                let c = if gr.nn_axes[k] == BondAxis::Vertical { -1.0 } else { -(1.0 - h.alpha) };
                add(&mut m, &zz, c);
            }
        }
    }
    if h.variant == Variant::Annni {
        for &(a, b) in &gr.axis_nnn_bonds {
            add(&mut m, &embed(n, &[(a, Z), (b, Z)]), h.alpha);
        }
    }
    for s in 0..n {
        if h.variant != Variant::Xxz {
            add(&mut m, &embed(n, &[(s, X)]), -h.g);
        }
        add(&mut m, &embed(n, &[(s, Z)]), -h.z_field);
    }
    m
}

fn instances() -> Vec<HamiltonianSpec> {
    let sq = build_square(2, 3, true).unwrap();
    let j = sample_disorder(&sq, 5);
    vec![
        HamiltonianSpec::tim(build_chain(5).unwrap(), 0.7).unwrap(),
        HamiltonianSpec::tim(build_square(2, 2, false).unwrap(), 1.3).unwrap().with_z_field(0.2).unwrap(),
        HamiltonianSpec::xxz(build_chain(4).unwrap(), 0.6).unwrap(),
        HamiltonianSpec::xxz(build_square(2, 3, false).unwrap(), 1.1).unwrap().with_z_field(1e-3).unwrap(),
        HamiltonianSpec::dtim(sq.clone(), 0.9, j).unwrap(),
        HamiltonianSpec::annni(build_square(2, 4, true).unwrap(), 0.8, 1.0 / 3.0).unwrap(),
        HamiltonianSpec::annni(sq, 1.0, 0.5).unwrap(),
    ]
}

#[test]
fn sparse_rows_equal_pauli_sums_and_are_symmetric() {
    for h in instances() {
        let dense = SparseRows::build(&h).unwrap().to_dense();
        let reference = pauli_reference(&h);
        for (i, (r, q)) in dense.iter().zip(&reference).enumerate() {
            for (j, (a, b)) in r.iter().zip(q).enumerate() {
                assert!((a - b).abs() < 1e-12, "{:?} entry ({i},{j}): {a} vs {b}", h.variant);
                assert_eq!(*a, dense[j][i]);
            }
        }
    }
}

#[test]
fn offdiagonal_elements_are_nonpositive() {
    for h in instances() {
        let rows = SparseRows::build(&h).unwrap();
        for i in 0..rows.dim() {
            assert!(rows.row(i).all(|(_, v)| v <= 0.0));
        }
    }
}

#[test]
fn perron_frobenius_and_normalization() {
    for h in instances() {
        let psi = ground_state_dense(&h, 1e-12).unwrap();
        assert!(psi.amplitudes.iter().all(|&a| a >= -1e-12));
        let norm: f64 = psi.amplitudes.iter().map(|a| a * a).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(psi.residual < 1e-12);
    }
}

#[test]
fn two_spin_weights_are_flip_symmetric() {
    let h = HamiltonianSpec::tim(build_chain(2).unwrap(), 1.0).unwrap();
    let psi = ground_state_dense(&h, 1e-12).unwrap();
    assert!((psi.energy + 5f64.sqrt()).abs() < 1e-10);
    let w = WeightTable::from_state(&psi);
    assert!((w.total() - 1.0).abs() < 1e-12);
    for idx in 0..4 {
        assert!((w.weights()[idx] - w.weights()[3 - idx]).abs() < 1e-12);
    }
}

#[test]
fn free_fermions_match_dense_diagonalization() {
    for n in 1..=12 {
        for g in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let h = HamiltonianSpec::tim(build_chain(n).unwrap(), g).unwrap();
            let ed = ground_state_dense(&h, 1e-12).unwrap().energy;
            let ff = tfim_chain_energy(n, g);
            assert!((ed - ff).abs() < 1e-9, "n={n} g={g}: {ed} vs {ff}");
        }
    }
}

#[test]
fn chain_rule_reproduces_weights() {
    for h in instances().into_iter().take(5) {
        let w = WeightTable::from_state(&ground_state_dense(&h, 1e-12).unwrap());
        let n = w.n();
        let tables: Vec<_> = (0..n).map(|i| exact_conditionals(&w, i)).collect();
        for (idx, &wt) in w.weights().iter().enumerate() {
            let s = SpinConfig::from_index(idx, n);
            let prod: f64 = tables.iter().enumerate().map(|(i, t)| t.prob(idx >> (i + 1), s.get(i)).unwrap()).product();
            assert!((prod - wt).abs() < 1e-10);
        }
    }
}

#[test]
fn seven_spin_screening_reconstructs_conditionals() {
    let h = HamiltonianSpec::tim(build_chain(7).unwrap(), 1.0).unwrap();
    let w = WeightTable::from_state(&ground_state_dense(&h, 1e-12).unwrap());
    let out = screen_exact(&w, 0, 6).unwrap();
    assert!(out.gradient_norm < NEWTON_GRAD_TOL);
    let exact = exact_conditionals(&w, 0);
    for ctx in 0..w.n_contexts(0) {
        let f = out.poly.evaluate(ctx);
        let up = 1.0 / (1.0 + (-2.0 * f).exp());
        assert!((up - exact.p_up[ctx].unwrap()).abs() < 1e-6);
    }
}

#[test]
fn pairwise_model_round_trip() {
    let p = init_params(6, 0.6, 21).unwrap();
    let w = WeightTable::from_agm(&p).unwrap();
    for i in 0..6 {
        let out = screen_exact(&w, i, 5 - i).unwrap();
        assert!((out.poly.coefficient(&[]) - p.bias(i)).abs() < 1e-6);
        for j in i + 1..6 {
            assert!((out.poly.coefficient(&[j]) - p.pair(i, j)).abs() < 1e-6);
        }
        let prof = order_profile(&out.poly);
        assert!(prof.iter().filter(|o| o.order >= 2).all(|o| o.max_abs < 1e-6));
    }
    let fitted = fit_pairwise(&w).unwrap();
    for (a, b) in fitted.as_slice().iter().zip(p.as_slice()) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn near_product_state_has_no_pairwise_terms() {
    let h = HamiltonianSpec::tim(build_chain(5).unwrap(), 1e3).unwrap();
    let w = WeightTable::from_state(&ground_state_dense(&h, 1e-12).unwrap());
    for i in 0..4 {
        let out = screen_exact(&w, i, 4 - i).unwrap();
        for (set, c) in out.poly.sorted_terms() {
            if set.len() == 1 {
                assert!(c.abs() < 1e-3, "site {i} subset {set:?}: {c}");
            }
        }
    }
}

fn random_table(n: usize, seed: u64) -> WeightTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    WeightTable::new(n, raw.into_iter().map(|v| v / total).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn full_order_screening_matches_closed_form(n in 2usize..6, seed in any::<u64>()) {
        let w = random_table(n, seed);
        for i in 0..n {
            let closed = closed_form_conditional_energy(&w, i).unwrap();
            let out = screen_exact(&w, i, n - 1 - i).unwrap();
            for (ctx, f) in closed.iter().enumerate() {
                prop_assert!((out.poly.evaluate(ctx) - f).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn screening_objective_is_midpoint_convex(n in 2usize..6, order in 0usize..3, seed in any::<u64>()) {
        let w = random_table(n, seed);
        let prob = ScreeningProblem::new(&w, 0, order.min(n - 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for _ in 0..8 {
            let a: Vec<f64> = (0..prob.n_params()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..prob.n_params()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let (fa, fb, fm) = (prob.objective(&a), prob.objective(&b), prob.objective(&mid));
            prop_assert!(fm <= 0.5 * (fa + fb) + 1e-12 * (1.0 + fa.abs() + fb.abs()));
        }
    }
}

mod common;

use faraday_qns::correlations::{apply_branch, correlation, heisenberg_coupling, liouville_correlation, BranchSign, CorrelationQuery};
use faraday_qns::quantum::{DensityMatrix, Operator};
use faraday_qns::{TargetModel, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn random_signs<R: Rng>(k: usize, rng: &mut R) -> Vec<BranchSign> {
    (0..k).map(|_| if rng.random::<bool>() { BranchSign::Plus } else { BranchSign::Minus }).collect()
}

fn random_query<R: Rng>(k: usize, rng: &mut R) -> CorrelationQuery {
    CorrelationQuery::new(random_times(k, rng), random_signs(k, rng)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn superoperator_and_liouville_forms_agree(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng);
        let q = random_query(k, &mut rng);
        let a = correlation(&model, &q).unwrap();
        let b = liouville_correlation(&model, &q).unwrap();
        prop_assert!(close(a, b, 1e-10), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_in_state(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=3, w in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng);
        let other = random_density(d, &mut rng);
        let q = random_query(k, &mut rng);
        let mix = DensityMatrix::new(&(model.initial_state().op() * w) + &(other.op() * (1.0 - w))).unwrap();
        let lhs = correlation(&model.with_initial_state(mix).unwrap(), &q).unwrap();
        let rhs = w * correlation(&model, &q).unwrap()
            + (1.0 - w) * correlation(&model.with_initial_state(other).unwrap(), &q).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn multilinear_in_coupling(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=3, c in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng);
        let q = random_query(k, &mut rng);
        let scaled = model.with_coupling(model.coupling() * c).unwrap();
        let lhs = correlation(&scaled, &q).unwrap();
        let rhs = c.powi(k as i32) * correlation(&model, &q).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
        // additivity: B = B1 + B2 at K = 1
        let b2 = random_hermitian(d, &mut rng);
        let q1 = CorrelationQuery::new(vec![q.times()[0]], vec![BranchSign::Plus]).unwrap();
        let sum = correlation(&model.with_coupling(model.coupling() + &b2).unwrap(), &q1).unwrap();
        let parts = correlation(&model, &q1).unwrap() + correlation(&model.with_coupling(b2).unwrap(), &q1).unwrap();
        prop_assert!(close(sum, parts, 1e-10));
    }

    #[test]
    fn final_minus_sign_vanishes(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng);
        let mut signs = random_signs(k, &mut rng);
        *signs.last_mut().unwrap() = BranchSign::Minus;
        let q = CorrelationQuery::new(random_times(k, &mut rng), signs).unwrap();
        prop_assert!(correlation(&model, &q).unwrap().abs() < 1e-12);
        prop_assert!(liouville_correlation(&model, &q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn commuting_all_plus_is_classical_moment(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_hermitian(d, &mut rng);
        let h = &(&b * &b) + &(&b * 0.3);
        let model = TargetModel::new(h, b.clone(), random_density(d, &mut rng)).unwrap();
        let q = CorrelationQuery::new(random_times(k, &mut rng), vec![BranchSign::Plus; k]).unwrap();
        let bk = (1..k).fold(b.clone(), |acc, _| &acc * &b);
        let moment = model.initial_state().expectation(&bk).re;
        prop_assert!(close(correlation(&model, &q).unwrap(), moment, 1e-10));
    }

    #[test]
    fn plus_minus_is_commutator(seed in any::<u64>(), d in 2usize..=4, t in 0.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng);
        let q = CorrelationQuery::new(vec![0.0, t], vec![BranchSign::Minus, BranchSign::Plus]).unwrap();
        let bt = heisenberg_coupling(&model, t);
        let b0 = model.coupling();
        // (1/i)⟨[B(t), B(0)]⟩
        let direct = (model.initial_state().expectation(&bt.commutator(b0)) * C64::new(0.0, -1.0)).re;
        prop_assert!(close(correlation(&model, &q).unwrap(), direct, 1e-10));
    }

    #[test]
    fn heisenberg_side_prefactor_identity(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng);
        let times = random_times(k, &mut rng);
        let mut signs = random_signs(k, &mut rng);
        *signs.last_mut().unwrap() = BranchSign::Plus;
        let q = CorrelationQuery::new(times.clone(), signs.clone()).unwrap();
        // η₁…η_{K−1} ⟨𝔹₁^{η₁}(…𝔹_{K−1}^{η_{K−1}}(B_K))⟩
        let mut x = heisenberg_coupling(&model, times[k - 1]);
        let mut sign = 1.0;
        for j in (0..k - 1).rev() {
            x = apply_branch(&heisenberg_coupling(&model, times[j]), signs[j], &x).unwrap();
            sign *= signs[j].factor();
        }
        let nested = sign * model.initial_state().expectation(&x).re;
        prop_assert!(close(correlation(&model, &q).unwrap(), nested, 1e-10));
    }

    #[test]
    fn identity_coupling_is_time_independent(seed in any::<u64>(), d in 2usize..=4, t in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(d, &mut rng).with_coupling(Operator::identity(d)).unwrap();
        prop_assert!(heisenberg_coupling(&model, t).max_abs_diff(&Operator::identity(d)) < 1e-10);
    }
}

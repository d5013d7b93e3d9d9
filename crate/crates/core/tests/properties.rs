use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparse_al::embeddings::LabelDistribution;
use sparse_al::harness::{acquire, AcquisitionParams, Strategy as Acquisition};
use sparse_al::solvers::{debias, greedy_solve, prox_hard_threshold, GreedyConfig, IhtConfig, ProxMode};
use sparse_al::{eval_f1, SparseApproxProblem, WeightVector};

fn problem_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..5, 2usize..8).prop_flat_map(|(m, n)| {
        (
            Just(m),
            Just(n),
            prop::collection::vec(-2.0f64..2.0, m),
            prop::collection::vec(-2.0f64..2.0, m * n),
            prop::collection::vec(0.0f64..1.0, n),
        )
    })
}

fn params() -> AcquisitionParams {
    AcquisitionParams { alpha: 1.0, beta: 0.0, greedy: GreedyConfig::default(), iht: IhtConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn debias_never_increases_f1_or_grows_support(
        (_m, n, v, phi, s2) in problem_strategy(),
        mask in prop::collection::vec(any::<bool>(), 8),
        weights in prop::collection::vec(0.0f64..2.0, 8),
        beta in 0.0f64..1.0,
    ) {
        let p = SparseApproxProblem::new(v, phi, s2, 0.0, beta, 1).unwrap();
        let w: Vec<f64> = (0..n).map(|j| if mask[j] { weights[j] } else { 0.0 }).collect();
        let before = eval_f1(&p, &WeightVector::new(w.clone()).unwrap()).unwrap();
        let out = debias(&p, &w).unwrap();
        for j in 0..n {
            if w[j] == 0.0 {
                prop_assert_eq!(out[j], 0.0);
            }
        }
        // f1 of the raw, possibly negative, output
        let mut direct = 0.0;
        for i in 0..p.m() {
            let row: f64 = (0..n).map(|j| p.phi()[[i, j]] * out[j]).sum();
            direct += (p.v()[i] - row).powi(2);
        }
        direct += beta * out.iter().map(|x| (x - 1.0).powi(2)).sum::<f64>();
        prop_assert!(direct <= before + 1e-9 * (1.0 + before.abs()));
    }

    #[test]
    fn prox_output_is_feasible(
        s in prop::collection::vec(-3.0f64..3.0, 1..12),
        alpha in 0.0f64..2.0,
        b_frac in 0.0f64..1.0,
        literal in any::<bool>(),
    ) {
        let n = s.len();
        let sigma2: Vec<f64> = (0..n).map(|j| (j as f64 * 0.37).sin().abs()).collect();
        let b = 1 + ((n - 1) as f64 * b_frac) as usize;
        let mode = if literal { ProxMode::PaperLiteral } else { ProxMode::Corrected };
        let w = prox_hard_threshold(&s, &sigma2, alpha, b, mode).unwrap();
        prop_assert!(w.nnz() <= b);
        for (wj, sj) in w.as_slice().iter().zip(&s) {
            prop_assert!(*wj >= 0.0);
            prop_assert!(*wj == 0.0 || wj == sj);
        }
    }

    #[test]
    fn greedy_order_is_scale_invariant(
        (_m, n, v, phi, s2) in problem_strategy(),
        power in prop::sample::select(vec![-2i32, -1, 1, 2]),
        alpha in 0.0f64..1.0,
        beta in 0.0f64..1.0,
    ) {
        // powers of two scale every intermediate exactly
        let c = 2f64.powi(power);
        let b = n.min(3);
        let p = SparseApproxProblem::new(v.clone(), phi.clone(), s2.clone(), alpha, beta, b).unwrap();
        let scaled = SparseApproxProblem::new(
            v.iter().map(|x| c * x).collect(),
            phi.iter().map(|x| c * x).collect(),
            s2,
            alpha * c * c,
            beta * c * c,
            b,
        ).unwrap();
        let a = greedy_solve(&p, &GreedyConfig::default()).unwrap();
        let z = greedy_solve(&scaled, &GreedyConfig::default()).unwrap();
        prop_assert_eq!(&a.selected, &z.selected);
        prop_assert!((z.objective - c * c * a.objective).abs() <= 1e-12 * (1.0 + z.objective.abs()));
    }

    #[test]
    fn score_based_selection_is_permutation_equivariant(
        raw in prop::collection::vec(0.01f64..1.0, 3 * 6),
        perm_seed in any::<u64>(),
        b in 1usize..4,
    ) {
        let n = 6;
        let mut probs = ndarray::Array2::from_shape_vec((n, 3), raw).unwrap();
        for mut row in probs.rows_mut() {
            let t = row.sum();
            row.mapv_inplace(|x| x / t);
        }
        let dist = LabelDistribution::new(probs.clone()).unwrap();
        let h = dist.entropies();
        let mut sorted = h.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-9));

        let mut perm: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let permuted = LabelDistribution::new(probs.select(ndarray::Axis(0), &perm)).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = acquire(Acquisition::Entropy, &dist, None, &params(), b, &mut rng).unwrap();
        let mut c: Vec<usize> = acquire(Acquisition::Entropy, &permuted, None, &params(), b, &mut rng)
            .unwrap()
            .into_iter()
            .map(|i| perm[i])
            .collect();
        a.sort_unstable();
        c.sort_unstable();
        prop_assert_eq!(a, c);
    }
}

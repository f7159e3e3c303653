mod common;

use common::{brute_force_projection, max_abs_diff};
use isomech::isotonic::{
    coarse_isotonic_mechanism, coarse_to_permutation, isotonic_mechanism, project_descending,
    CoarseRanking, Ranking,
};
use isomech::rng::substream;
use isomech::Family;
use proptest::prelude::*;
use rand::Rng;

fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..=max_len)
}

fn scores_and_ranking(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Ranking)> {
    (1..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(-50.0f64..50.0, n),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(|(x, p)| (x, Ranking::new(p).unwrap()))
    })
}

#[test]
fn pooling_oracle_examples() {
    // the oracle itself, on the worked examples
    assert_eq!(brute_force_projection(&[2.0, 3.0, 1.0], &[0, 1, 2]), vec![2.5, 2.5, 1.0]);
    assert_eq!(brute_force_projection(&[1.0, 2.0, 3.0], &[0, 1, 2]), vec![2.0, 2.0, 2.0]);
    assert_eq!(brute_force_projection(&[1.0, 3.0], &[0, 1]), vec![2.0, 2.0]);
    let fit = project_descending(&[2.0, 3.0, 1.0]).unwrap();
    assert_eq!(fit.mu_hat, brute_force_projection(&[2.0, 3.0, 1.0], &[0, 1, 2]));
}

#[test]
fn pava_matches_oracle_on_small_instances() {
    for n in 1..=7 {
        let mut rng = substream(5, 0, n as u64, 0);
        for _ in 0..300 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
            let got = project_descending(&x).unwrap().mu_hat;
            let want = brute_force_projection(&x, &(0..n).collect::<Vec<_>>());
            assert!(max_abs_diff(&got, &want) <= 1e-9, "{x:?}");
        }
    }
}

#[test]
fn coarse_ties_do_not_change_the_fit() {
    // reversing the tie rule inside blocks gives the same adjusted scores
    let mut rng = substream(6, 0, 0, 0);
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
        let levels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let blocks = CoarseRanking::from_levels(&levels).unwrap();
        let pi = coarse_to_permutation(&blocks, &x).unwrap();
        let mut alt = Vec::new();
        for b in blocks.blocks() {
            let mut b = b.clone();
            b.sort_by(|&i, &j| x[j].total_cmp(&x[i]).then(j.cmp(&i)));
            alt.extend(b);
        }
        let alt = Ranking::new(alt).unwrap();
        let a = isotonic_mechanism(&x, &pi).unwrap().mu_hat;
        let b = isotonic_mechanism(&x, &alt).unwrap().mu_hat;
        assert!(max_abs_diff(&a, &b) <= 1e-12, "{x:?} {blocks}");
        assert_eq!(coarse_isotonic_mechanism(&x, &blocks).unwrap().mu_hat, a);
    }
}

#[test]
fn coarse_examples() {
    let c = |b: &[&[usize]]| {
        CoarseRanking::from_one_based(&b.iter().map(|v| v.to_vec()).collect::<Vec<_>>()).unwrap()
    };
    let x = [1.0, 3.0, 2.0];
    assert_eq!(coarse_to_permutation(&c(&[&[1, 2, 3]]), &x).unwrap().to_one_based(), vec![2, 3, 1]);
    assert_eq!(
        coarse_to_permutation(&c(&[&[1, 2], &[3]]), &[5.0, 5.0, 0.0]).unwrap().to_one_based(),
        vec![1, 2, 3]
    );
    assert_eq!(coarse_isotonic_mechanism(&[1.0, 3.0], &c(&[&[1], &[2]])).unwrap().mu_hat, vec![2.0, 2.0]);
    assert_eq!(coarse_isotonic_mechanism(&x, &c(&[&[1, 2, 3]])).unwrap().mu_hat, x.to_vec());
}

#[test]
fn error_dominance_under_truthful_ranking() {
    let f = Family::binomial(10).unwrap();
    let mu = [8.0, 7.5, 6.0, 5.8, 4.0, 2.0];
    let samplers: Vec<_> = mu.iter().map(|&m| f.sampler_at_mean(m).unwrap()).collect();
    let truth = Ranking::identity(mu.len());
    let mut diffs = Vec::with_capacity(10_000);
    for t in 0..10_000u64 {
        let mut rng = substream(7, 0, t, 0);
        let x: Vec<f64> = samplers.iter().map(|s| s.sample_mean(3, &mut rng)).collect();
        let hat = isotonic_mechanism(&x, &truth).unwrap().mu_hat;
        let e = |v: &[f64]| v.iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        diffs.push(e(&hat) - e(&x));
    }
    let s = isomech::stats::Summary::of(&diffs);
    assert!(s.mean <= 3.0 * s.std_error, "mean diff {} se {}", s.mean, s.std_error);
}

proptest! {
    #[test]
    fn idempotent(x in scores(30)) {
        let once = project_descending(&x).unwrap().mu_hat;
        let twice = project_descending(&once).unwrap().mu_hat;
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn non_expansive((x, pi) in scores_and_ranking(20), shift in prop::collection::vec(-20.0f64..20.0, 20)) {
        let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let fx = isotonic_mechanism(&x, &pi).unwrap().mu_hat;
        let fy = isotonic_mechanism(&y, &pi).unwrap().mu_hat;
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        prop_assert!(d(&fx, &fy) <= d(&x, &y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn sum_preserved_and_feasible((x, pi) in scores_and_ranking(40)) {
        let fit = isotonic_mechanism(&x, &pi).unwrap();
        let (a, b): (f64, f64) = (x.iter().sum(), fit.mu_hat.iter().sum());
        prop_assert!((a - b).abs() <= 1e-10 * x.iter().map(|v| v.abs()).sum::<f64>().max(1.0));
        prop_assert!(fit.constraint.is_satisfied_by(&fit.mu_hat));
        let sorted: Vec<f64> = pi.as_slice().iter().map(|&i| fit.mu_hat[i]).collect();
        prop_assert!(sorted.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn feasible_input_is_fixed(mut x in scores(30), perm in Just((0..30).collect::<Vec<usize>>()).prop_shuffle()) {
        let n = x.len();
        x.sort_by(|a, b| b.total_cmp(a));
        let idx: Vec<usize> = perm.into_iter().filter(|&i| i < n).collect();
        let mut y = vec![0.0; n];
        for (k, &i) in idx.iter().enumerate() {
            y[i] = x[k];
        }
        let pi = Ranking::new(idx).unwrap();
        prop_assert_eq!(isotonic_mechanism(&y, &pi).unwrap().mu_hat, y);
    }

    #[test]
    fn matches_oracle((x, pi) in scores_and_ranking(7)) {
        let got = isotonic_mechanism(&x, &pi).unwrap().mu_hat;
        prop_assert!(max_abs_diff(&got, &brute_force_projection(&x, pi.as_slice())) <= 1e-9);
    }

    #[test]
    fn singleton_blocks_reduce_to_ranking((x, pi) in scores_and_ranking(12)) {
        let blocks = CoarseRanking::from_ranking(&pi);
        prop_assert_eq!(
            coarse_isotonic_mechanism(&x, &blocks).unwrap().mu_hat,
            isotonic_mechanism(&x, &pi).unwrap().mu_hat
        );
    }
}

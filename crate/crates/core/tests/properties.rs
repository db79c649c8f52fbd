use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use secrank::masking::{
    mask, sample_party_randomness, sign, unmask_sign, FrequencySampler, MaskingConfig,
};
use secrank::rank::search::round_bound;
use secrank::rank::{kth_smallest, run_mirror, SearchState, Step, Target};

fn count_sign_sum(values: &[i64], twice_guess: i64) -> i64 {
    let above = values.iter().filter(|&&x| 2 * x > twice_guess).count() as i64;
    let below = values.iter().filter(|&&x| 2 * x < twice_guess).count() as i64;
    above - below
}

fn instance() -> impl Strategy<Value = (i64, u32, Vec<i64>)> {
    (-50i64..50, 2u32..=10).prop_flat_map(|(low, b)| {
        let high = low + (1i64 << b);
        (Just(low), Just(b), prop::collection::vec(low..=high, 1..40))
    })
}

/// Steps the search by hand, checking the bracket after every round.
fn walk(values: &[i64], state: SearchState) -> (i64, u32) {
    let k = state.target.rank(values.len());
    let truth = kth_smallest(values, k);
    let mut s = state;
    loop {
        assert!(
            s.alpha <= truth && truth <= s.beta,
            "target {truth} left [{}, {}]",
            s.alpha,
            s.beta
        );
        assert!(s.alpha <= s.guess.floor() && s.guess.floor() < s.beta);
        let z = count_sign_sum(values, s.guess.twice()) + s.offset();
        match s.update(z) {
            Step::Continue(next) => {
                assert!(next.alpha >= s.alpha && next.beta <= s.beta);
                // A rank-proportional first guess can sit at alpha; z > 0 then keeps the bracket.
                let pinned = s.round == 0
                    && matches!(s.target, Target::Rank(_))
                    && s.guess.floor() == s.alpha
                    && z > 0;
                assert!(next.beta - next.alpha < s.beta - s.alpha || pinned);
                assert_eq!(next.round, s.round + 1);
                s = next;
            }
            Step::Done(r) => return (r, s.round + 1),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn masked_sign_recovers_the_sign(q in -1_000_000i64..1_000_000, r in -1_000_000i64..1_000_000) {
        prop_assume!(q != 0 && r != 0);
        let half = BigInt::from(1u64 << 62);
        let y = mask(&q.into(), &r.into(), &half).unwrap();
        let sy = sign(&y).unwrap();
        let sr = sign(&r.into()).unwrap();
        prop_assert_eq!(unmask_sign(sy, sr), sign(&q.into()).unwrap());
        prop_assert_eq!(y.clone() * BigInt::from(sr), BigInt::from(q) * BigInt::from(r.abs()));
    }

    #[test]
    fn median_search_brackets_and_bounds((low, b, values) in instance()) {
        let state = SearchState::new(low, low + (1i64 << b), Target::Median, values.len(), 0).unwrap();
        let (result, rounds) = walk(&values, state.clone());
        prop_assert!(rounds <= b - 1);
        prop_assert!(rounds <= round_bound(1u64 << b));
        let mirror = run_mirror(&values, state).unwrap();
        prop_assert_eq!(mirror.result, result);
        prop_assert_eq!(mirror.rounds() as u32, rounds);
        if mirror.hit_zero {
            // Only possible for even N: the final guess splits the inputs evenly.
            prop_assert!(values.len() % 2 == 0);
            let m = *mirror.guesses.last().unwrap();
            prop_assert_eq!(count_sign_sum(&values, m), 0);
            prop_assert_eq!(result, (m + 1).div_euclid(2));
        } else {
            let truth = kth_smallest(&values, Target::Median.rank(values.len()));
            prop_assert!((result - truth).abs() <= 1);
        }
    }

    #[test]
    fn rank_search_brackets_and_bounds((low, b, values) in instance(), pick in any::<prop::sample::Index>()) {
        let k = pick.index(values.len()) + 1;
        let state = SearchState::new(low, low + (1i64 << b), Target::Rank(k), values.len(), 0).unwrap();
        let (result, rounds) = walk(&values, state.clone());
        prop_assert!(rounds <= round_bound(1u64 << b) + 1);
        let mirror = run_mirror(&values, state).unwrap();
        if mirror.hit_zero {
            // z = 0 under the 2k - N offset: exactly k inputs lie below the guess.
            let m = *mirror.guesses.last().unwrap();
            prop_assert_eq!(values.iter().filter(|&&x| 2 * x < m).count(), k);
        } else {
            prop_assert!((result - kth_smallest(&values, k)).abs() <= 1);
        }
    }

    #[test]
    fn half_rank_matches_plain_median_for_even_counts((low, b, mut values) in instance()) {
        if values.len() % 2 == 1 {
            values.pop();
        }
        prop_assume!(!values.is_empty());
        let high = low + (1i64 << b);
        let n = values.len();
        let plain = run_mirror(&values, SearchState::new(low, high, Target::Median, n, 0).unwrap()).unwrap();
        let ranked = run_mirror(&values, SearchState::new(low, high, Target::Rank(n.div_ceil(2)), n, 0).unwrap()).unwrap();
        prop_assert_eq!(plain, ranked);
    }

    #[test]
    fn early_stop_only_shortens((low, b, values) in instance(), delta in 0u64..4) {
        let high = low + (1i64 << b);
        let exact = run_mirror(&values, SearchState::new(low, high, Target::Median, values.len(), 0).unwrap()).unwrap();
        let early = run_mirror(&values, SearchState::new(low, high, Target::Median, values.len(), delta).unwrap()).unwrap();
        prop_assert!(early.rounds() <= exact.rounds());
        prop_assert_eq!(&early.z_sequence[..], &exact.z_sequence[..early.rounds()]);
    }

    #[test]
    fn speculation_follows_the_real_path((low, b, values) in instance(), depth in 0u32..3) {
        let state = SearchState::new(low, low + (1i64 << b), Target::Median, values.len(), 0).unwrap();
        let mirror = run_mirror(&values, state.clone()).unwrap();
        let guesses: Vec<i64> = state.speculative_guesses(depth).iter().map(|g| g.twice()).collect();
        for g in mirror.guesses.iter().take(depth as usize + 1) {
            prop_assert!(guesses.contains(g));
        }
        prop_assert!(guesses.len() < 1 << (depth + 1));
    }

    #[test]
    fn percentile_rank_is_in_range(p in 0.01f64..99.99, n in 1usize..20_000) {
        let Target::Rank(k) = Target::percentile(p, n).unwrap() else { unreachable!() };
        prop_assert!((1..=n).contains(&k));
        prop_assert!(k as f64 >= p * n as f64 / 100.0 - 1e-9);
    }

    #[test]
    fn party_randomness_respects_bound(seed in any::<u64>(), high in 3i64..60, bound in 2u64..1_000_000_000) {
        let cfg = MaskingConfig::with_bound(-high, high, BigInt::from(10).pow(30), FrequencySampler::default()).unwrap();
        let bound = BigInt::from(bound);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pr = sample_party_randomness(&cfg, &bound, &mut rng).unwrap();
        prop_assert!(pr.r != BigInt::from(0));
        prop_assert!(pr.r.magnitude() <= bound.magnitude());
        let product: BigInt = pr.factors.iter().map(|&f| BigInt::from(f)).product();
        prop_assert_eq!(&product, &BigInt::from(pr.r.magnitude().clone()));
        let primes = cfg.primes();
        prop_assert!(pr.factors.iter().all(|f| primes.contains(f)));
        prop_assert_eq!(pr.r.sign() == num_bigint::Sign::Minus, pr.sign_flips == 1);
    }
}

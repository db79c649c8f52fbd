//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use secrank::masking::{
    sample_party_randomness, zero_freq_probability, FrequencySampler, MaskingConfig,
};
use secrank::paillier::keygen_from_primes;
use secrank::rank::{make_power_submission, moments_protocol, run_mirror, SearchState, Target};
use secrank::sim::accuracy::{run_accuracy_experiment, AccuracySettings};
use secrank::sim::costs::{account_costs, proof_size_rows};
use secrank::sim::{
    parse_prime_pair, parse_scripts, run_scenario, DataSource, Protocol, RunReport, SimConfig,
    TargetSpec,
};
use secrank::zkp::ProofKind;
use secrank::Party;

use common::{honest, mutation_matrix, setup};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

// 1
fn accuracy_band() -> Outcome {
    let start = Instant::now();
    let points = run_accuracy_experiment(&AccuracySettings::default()).expect("accuracy sweep");
    let elapsed = start.elapsed();
    let outside: Vec<String> = points
        .iter()
        .filter(|p| !(0.25..=1.0).contains(&p.mae))
        .map(|p| format!("σ={} p{}: {:.3}", p.sigma, p.percentile, p.mae))
        .collect();
    let fast = elapsed < Duration::from_secs(120);
    let detail = format!(
        "{} of {} points outside [0.25, 1.0] {:?}; {}",
        outside.len(),
        points.len(),
        outside,
        secs(elapsed)
    );
    outcome(outside.is_empty() && fast, detail)
}

fn random_values(rng: &mut ChaCha20Rng, n: usize, low: i64, high: i64) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(low..=high)).collect()
}

// 2
fn round_bound_holds() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut worst = 0i64;
    let mut violations = 0;
    for _ in 0..10_000 {
        let b = rng.random_range(4u32..=10);
        let low = rng.random_range(-100i64..=100);
        let high = low + (1i64 << b);
        let n = rng.random_range(1usize..=60);
        let values = random_values(&mut rng, n, low, high);
        let state = SearchState::new(low, high, Target::Median, n, 0).unwrap();
        let rounds = run_mirror(&values, state).unwrap().rounds() as i64;
        worst = worst.max(rounds - (b as i64 - 1));
        if rounds > b as i64 - 1 {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("10000 instances, {violations} over b-1 (max excess {worst})"),
    )
}

/// Multisets of `size` over `[0, 16)` in lexicographic order.
fn multisets(size: usize, out: &mut Vec<Vec<i64>>, cap: usize) {
    fn rec(cur: &mut Vec<i64>, from: i64, size: usize, out: &mut Vec<Vec<i64>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in from..16 {
            cur.push(v);
            rec(cur, v, size, out, cap);
            cur.pop();
        }
    }
    rec(&mut Vec::new(), 0, size, out, cap);
}

// 3
fn oracle_closeness() -> Outcome {
    let cap = 100_000;
    let mut cases = Vec::new();
    for size in [1, 3, 5, 7] {
        multisets(size, &mut cases, cap);
    }
    let exhaustive = cases.len();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let size = [1, 3, 5, 7][rng.random_range(0..4)];
        cases.push(random_values(&mut rng, size, 0, 15));
    }
    let (mut far, mut inexact_hits, mut hits) = (0, 0, 0);
    for values in &cases {
        let mut sorted = values.clone();
        sorted.sort_unstable();
        let median = sorted[sorted.len() / 2];
        let out = run_mirror(
            values,
            SearchState::new(0, 16, Target::Median, values.len(), 0).unwrap(),
        )
        .unwrap();
        if (out.result - median).abs() > 1 {
            far += 1;
        }
        if out.hit_zero {
            hits += 1;
            if out.result != median {
                inexact_hits += 1;
            }
        }
    }
    outcome(
        far == 0 && inexact_hits == 0,
        format!(
            "{} cases ({exhaustive} enumerated): {far} off by more than 1, {inexact_hits}/{hits} inexact z=0 hits",
            cases.len()
        ),
    )
}

struct Scenario {
    cfg: SimConfig,
    values: Vec<i64>,
}

fn scenarios() -> Vec<Scenario> {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    (0..100)
        .map(|i| {
            let n = rng.random_range(1usize..=25);
            let b = rng.random_range(2u32..=6);
            let low = rng.random_range(-20i64..=20);
            let high = low + (1i64 << b);
            let values = random_values(&mut rng, n, low, high);
            let target = match rng.random_range(0..3) {
                0 => TargetSpec::Median,
                1 => TargetSpec::Rank(rng.random_range(1..=n)),
                _ => TargetSpec::Percentile(rng.random_range(1..100) as f64),
            };
            let cfg = SimConfig {
                users: n,
                workers: rng.random_range(2..=3),
                low,
                high,
                target,
                data: DataSource::Explicit(values.clone()),
                seed: 1000 + i,
                ..SimConfig::default()
            };
            Scenario { cfg, values }
        })
        .collect()
}

// 4
fn crypto_matches_mirror(scen: &[Scenario]) -> (Outcome, Vec<RunReport>) {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut reports = Vec::new();
    for (i, s) in scen.iter().enumerate() {
        let r = run_scenario(&s.cfg, &[]).expect("irank scenario");
        let target = s.cfg.target.resolve(s.values.len()).unwrap();
        let state = SearchState::new(s.cfg.low, s.cfg.high, target, s.values.len(), 0).unwrap();
        let m = run_mirror(&s.values, state).unwrap();
        if r.abort.is_some() || r.result != Some(m.result) || r.z_sequence != m.z_sequence {
            mismatches.push(i);
        }
        reports.push(r);
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && elapsed < Duration::from_secs(600);
    (
        outcome(
            pass,
            format!(
                "100 scenarios, mismatches {mismatches:?}; {}",
                secs(elapsed)
            ),
        ),
        reports,
    )
}

// 5
fn nirank_matches_irank(scen: &[Scenario], irank: &[RunReport]) -> (Outcome, Vec<RunReport>) {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut reports = Vec::new();
    for (i, (s, a)) in scen.iter().zip(irank).enumerate() {
        let cfg = SimConfig {
            protocol: Protocol::Nirank,
            ..s.cfg.clone()
        };
        let r = run_scenario(&cfg, &[]).expect("nirank scenario");
        if r.abort.is_some() || r.result != a.result || r.z_sequence != a.z_sequence {
            mismatches.push(i);
        }
        reports.push(r);
    }
    (
        outcome(
            mismatches.is_empty(),
            format!(
                "100 scenarios, mismatches {mismatches:?}; {}",
                secs(start.elapsed())
            ),
        ),
        reports,
    )
}

// 6
fn proof_suite() -> Outcome {
    let (pp, keys, mut rng) = setup(3, 6);
    let mut detail = Vec::new();
    let mut pass = true;
    for kind in ProofKind::ALL {
        let mut verified = 0;
        let mut mutations = 0;
        let mut accepted = 0;
        for i in 0..1000 {
            let inst = honest(kind, &pp, &keys, &mut rng);
            if inst.verify(&pp) {
                verified += 1;
            }
            if i % 20 == 0 {
                for (_, rejected) in mutation_matrix(&pp, &inst) {
                    mutations += 1;
                    if !rejected {
                        accepted += 1;
                    }
                }
            }
        }
        pass &= verified == 1000 && accepted == 0;
        detail.push(format!(
            "{kind} {verified}/1000 honest, {accepted}/{mutations} mutations accepted"
        ));
    }
    outcome(pass, detail.join("; "))
}

fn fixture_primes() -> (num_bigint::BigUint, num_bigint::BigUint) {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/safe_primes_1024.txt"
    ))
    .unwrap();
    parse_prime_pair(&text).unwrap()
}

// 7
fn serialization_sizes() -> Outcome {
    let (p, q) = fixture_primes();
    let (pp, _) = keygen_from_primes(&p, &q, 2, &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
    let rows = proof_size_rows(&pp);
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("{} {:.3} KB (want {:.2})", r.item, r.measured, r.expected))
        .collect();
    outcome(
        pp.bits == 2048 && rows.iter().all(|r| r.ok),
        detail.join("; "),
    )
}

fn op_rows_ok(r: &RunReport) -> bool {
    let rows = account_costs(r);
    let ops: Vec<_> = rows
        .iter()
        .filter(|row| row.item.starts_with("round "))
        .collect();
    !ops.is_empty() && ops.iter().all(|row| row.ok)
}

// 8
fn workload_counts(irank: &[RunReport], nirank: &[RunReport]) -> Outcome {
    let bad_i = irank.iter().take(20).filter(|r| !op_rows_ok(r)).count();
    let bad_n = nirank.iter().take(20).filter(|r| !op_rows_ok(r)).count();
    outcome(
        bad_i + bad_n == 0,
        format!("irank {bad_i}/20 runs off, nirank {bad_n}/20 runs off"),
    )
}

// 9
fn outbound_costs() -> Outcome {
    let start = Instant::now();
    let primes = Some(fixture_primes());
    let mut detail = Vec::new();
    let mut pass = true;
    for (protocol, data) in [
        (Protocol::Irank, vec![1, 6, 3]),
        (Protocol::Nirank, vec![1, 3]),
    ] {
        let cfg = SimConfig {
            users: data.len(),
            high: 8,
            protocol,
            data: DataSource::Explicit(data),
            primes: primes.clone(),
            seed: 9,
            ..SimConfig::default()
        };
        let r = run_scenario(&cfg, &[]).expect("2048-bit run");
        let row = account_costs(&r)
            .into_iter()
            .find(|row| row.item == "user outbound")
            .unwrap();
        pass &= row.ok && r.modulus_bits == 2048;
        detail.push(format!(
            "{protocol:?} {:.4} KB vs {:.2} KB ({} rounds)",
            row.measured, row.expected, r.rounds_used
        ));
    }
    detail.push(secs(start.elapsed()));
    outcome(pass, detail.join("; "))
}

// 10
fn masking_probability() -> Outcome {
    let analytic = zero_freq_probability(&[0.1; 5], 100);
    let small = zero_freq_probability(&[0.5; 3], 10);
    let sampler = FrequencySampler {
        zero_probability: 0.5,
        ..FrequencySampler::default()
    };
    let cfg = MaskingConfig::with_bound(1, 29, BigInt::from(10).pow(60), sampler).unwrap();
    let primes = cfg.primes();
    let bound = cfg.per_party_bound(1);
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let trials = 10_000;
    let mut hits = 0;
    for _ in 0..trials {
        let parties: Vec<_> = (0..3)
            .map(|_| sample_party_randomness(&cfg, &bound, &mut rng).unwrap())
            .collect();
        if primes
            .iter()
            .any(|p| parties.iter().all(|pr| !pr.factors.contains(p)))
        {
            hits += 1;
        }
    }
    let freq = hits as f64 / trials as f64;
    let half_width = 2.5758 * (freq * (1.0 - freq) / trials as f64).sqrt();
    let pass = primes.len() == 10
        && (analytic - 0.00099).abs() <= 1e-5
        && (small - 0.7369).abs() < 1e-4
        && (freq - 0.7369).abs() <= half_width;
    outcome(
        pass,
        format!("analytic {analytic:.6}; |X|=10 formula {small:.4}, Monte Carlo {freq:.4} ± {half_width:.4}"),
    )
}

// 11
fn identifiable_aborts(honest: &[&RunReport]) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let user_kinds = ["mtp", "mbs", "rg", "nz"];
    let mut misses = Vec::new();
    for i in 0..200 {
        let n = rng.random_range(3usize..=5);
        let nirank = rng.random_range(0..3) == 0;
        let workers = rng.random_range(2usize..=3);
        let (target, script) = if nirank {
            let j = rng.random_range(1..=workers);
            match rng.random_range(0..4) {
                0 => (
                    Party::Worker(j),
                    format!(
                        "worker.{j} = invalid_proof:{}",
                        user_kinds[rng.random_range(0..4)]
                    ),
                ),
                1 => (
                    Party::Worker(j),
                    format!("worker.{j} = forged_partial_decryption"),
                ),
                2 => (Party::Worker(j), format!("worker.{j} = invalid_proof:pd")),
                _ => {
                    let u = rng.random_range(0..n);
                    (Party::User(u), format!("user.{u} = invalid_proof:rg"))
                }
            }
        } else {
            let u = rng.random_range(0..n);
            let j = rng.random_range(1..=workers);
            match rng.random_range(0..5) {
                0 => (
                    Party::User(u),
                    format!(
                        "user.{u} = invalid_proof:{}@1",
                        user_kinds[rng.random_range(0..4)]
                    ),
                ),
                1 => (Party::User(u), format!("user.{u} = inconsistent_sign@1")),
                2 => (Party::User(u), format!("user.{u} = out_of_range_input")),
                3 => (
                    Party::Worker(j),
                    format!("worker.{j} = forged_partial_decryption"),
                ),
                _ => (Party::Worker(j), format!("worker.{j} = invalid_proof:pd")),
            }
        };
        let cfg = SimConfig {
            users: n,
            workers,
            protocol: if nirank {
                Protocol::Nirank
            } else {
                Protocol::Irank
            },
            seed: 2000 + i,
            ..SimConfig::default()
        };
        let r = run_scenario(&cfg, &parse_scripts(&script).unwrap()).expect("adversarial run");
        if r.abort.as_ref().map(|a| a.culprit) != Some(target) || r.result.is_some() {
            misses.push(format!("{script} ({:?})", cfg.protocol));
        }
    }
    let false_aborts = honest
        .iter()
        .filter(|r| r.abort.is_some() || r.result.is_none())
        .count();
    outcome(
        misses.is_empty() && false_aborts == 0,
        format!(
            "200 injections, {} misnamed {:?}; {false_aborts}/{} honest runs aborted; {}",
            misses.len(),
            misses,
            honest.len(),
            secs(start.elapsed())
        ),
    )
}

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

// 12
fn moments_exact() -> Outcome {
    let (pp, keys, mut rng) = setup(2, 12);
    let mut wrong = 0;
    let mut book_sher = 0;
    for _ in 0..100 {
        let n = rng.random_range(1usize..=12);
        let spread = rng.random_range(1i64..=200);
        let values = random_values(&mut rng, n, -spread, spread);
        let subs: Vec<_> = values
            .iter()
            .map(|&v| {
                let o = pp.encrypt_opening(&BigInt::from(v), &mut rng).unwrap();
                make_power_submission(&pp, &o, &mut rng).unwrap()
            })
            .collect();
        let report = moments_protocol(&pp, &keys, &subs, &mut rng).unwrap();

        let count = rational(n as i64);
        let mu = values.iter().map(|&v| rational(v)).sum::<BigRational>() / &count;
        let central = |k: i32| -> BigRational {
            values
                .iter()
                .map(|&v| num_traits::pow(rational(v) - &mu, k as usize))
                .sum::<BigRational>()
                / &count
        };
        let (m2, m3, m4) = (central(2), central(3), central(4));
        let (skew_sq, kurt) = if m2.is_zero() {
            (None, None)
        } else {
            (Some(&m3 * &m3 / (&m2 * &m2 * &m2)), Some(&m4 / (&m2 * &m2)))
        };
        if report.mean() != &mu
            || report.variance != m2
            || report.third_central != m3
            || report.skewness_squared != skew_sq
            || report.kurtosis != kurt
        {
            wrong += 1;
        }

        let mut sorted = values.clone();
        sorted.sort_unstable();
        let median = rational(sorted[(n - 1) / 2]);
        let d = &mu - &median;
        if &d * &d > m2 || !report.within_one_sigma(sorted[(n - 1) / 2]) {
            book_sher += 1;
        }
    }
    outcome(
        wrong == 0 && book_sher == 0,
        format!("100 datasets, {wrong} mismatched, {book_sher} outside one sigma"),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!(
            "[{}] criterion {id:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };

    report(1, "accuracy band", accuracy_band());
    report(2, "round bound", round_bound_holds());
    report(3, "oracle closeness", oracle_closeness());
    let scen = scenarios();
    let (o, irank) = crypto_matches_mirror(&scen);
    report(4, "crypto/mirror equivalence", o);
    let (o, nirank) = nirank_matches_irank(&scen, &irank);
    report(5, "irank/nirank equivalence", o);
    report(6, "proof suite", proof_suite());
    report(7, "serialization sizes", serialization_sizes());
    report(8, "workload counts", workload_counts(&irank, &nirank));
    report(9, "outbound cost formulas", outbound_costs());
    report(10, "masking probability", masking_probability());
    let honest: Vec<&RunReport> = irank.iter().chain(&nirank).collect();
    report(11, "identifiable abort", identifiable_aborts(&honest));
    report(12, "moments", moments_exact());

    let failed: Vec<u32> = results
        .iter()
        .filter(|(_, _, o)| !o.pass)
        .map(|(id, _, _)| *id)
        .collect();
    println!(
        "{} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

//! Mean absolute error of percentile searches on Gaussian data, run through the
//! plaintext mirror of the search.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::config::{DataSource, SimConfig, TargetSpec};
use super::driver::{gaussian_input, run_scenario};
use crate::error::{Error, Result};
use crate::rank::mirror::{kth_smallest, run_mirror};
use crate::rank::search::{SearchState, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySettings {
    pub users: usize,
    pub mu: f64,
    pub sigmas: Vec<f64>,
    pub percentiles: Vec<f64>,
    pub trials: usize,
    pub low: i64,
    pub high: i64,
    pub seed: u64,
}

impl Default for AccuracySettings {
    fn default() -> Self {
        AccuracySettings {
            users: 10_001,
            mu: 100.0,
            sigmas: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            percentiles: vec![25.0, 50.0, 75.0],
            trials: 200,
            low: 0,
            high: 255,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyPoint {
    pub sigma: f64,
    pub percentile: f64,
    pub trials: usize,
    pub mae: f64,
    pub max_error: i64,
    pub mean_rounds: f64,
}

/// The 50th percentile runs the plain median search; other percentiles search for
/// rank `⌈p·N/100⌉`.
pub fn search_target(p: f64, n: usize) -> Result<Target> {
    if p == 50.0 {
        Ok(Target::Median)
    } else {
        Target::percentile(p, n)
    }
}

/// One point per `(sigma, percentile)`; every trial draws fresh inputs shared by all
/// percentiles of that sigma.
pub fn run_accuracy_experiment(s: &AccuracySettings) -> Result<Vec<AccuracyPoint>> {
    sweep(s, |values, target| {
        let state = SearchState::new(s.low, s.high, target, s.users, 0)?;
        let outcome = run_mirror(values, state)?;
        Ok((
            (outcome.result - kth_smallest(values, target.rank(s.users))).abs(),
            outcome.rounds(),
        ))
    })
}

/// Same sweep with every search run as a full cryptographic scenario built on `base`
/// (protocol, workers, modulus, optimizations). Meant for small `users`.
pub fn run_accuracy_full_crypto(
    s: &AccuracySettings,
    base: &SimConfig,
) -> Result<Vec<AccuracyPoint>> {
    let mut trial = 0u64;
    sweep(s, |values, target| {
        trial += 1;
        let cfg = SimConfig {
            users: values.len(),
            low: s.low,
            high: s.high,
            target: match target {
                Target::Median => TargetSpec::Median,
                Target::Rank(k) => TargetSpec::Rank(k),
            },
            data: DataSource::Explicit(values.to_vec()),
            seed: s.seed.wrapping_add(trial),
            ..base.clone()
        };
        let report = run_scenario(&cfg, &[])?;
        match (report.abs_error, report.abort) {
            (Some(e), None) => Ok((e, report.rounds_used)),
            (_, abort) => Err(Error::Internal(format!(
                "honest run did not finish: {abort:?}"
            ))),
        }
    })
}

/// Calls `search(values, target)` for every trial and percentile and collects
/// `(abs_error, rounds)`.
fn sweep(
    s: &AccuracySettings,
    mut search: impl FnMut(&[i64], Target) -> Result<(i64, usize)>,
) -> Result<Vec<AccuracyPoint>> {
    if s.trials == 0 || s.users == 0 {
        return Err(Error::Config("accuracy runs need users and trials".into()));
    }
    let mut out = Vec::new();
    for (si, &sigma) in s.sigmas.iter().enumerate() {
        let normal = Normal::new(s.mu, sigma).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = ChaCha20Rng::seed_from_u64(s.seed);
        rng.set_stream(si as u64 + 1);
        let targets: Vec<Target> = s
            .percentiles
            .iter()
            .map(|&p| search_target(p, s.users))
            .collect::<Result<_>>()?;
        let mut abs_sum = vec![0i64; targets.len()];
        let mut max_err = vec![0i64; targets.len()];
        let mut rounds = vec![0usize; targets.len()];
        for _ in 0..s.trials {
            let values: Vec<i64> = (0..s.users)
                .map(|_| gaussian_input(normal.sample(&mut rng), s.low, s.high))
                .collect();
            for (pi, &target) in targets.iter().enumerate() {
                let (err, r) = search(&values, target)?;
                abs_sum[pi] += err;
                max_err[pi] = max_err[pi].max(err);
                rounds[pi] += r;
            }
        }
        for (pi, &p) in s.percentiles.iter().enumerate() {
            out.push(AccuracyPoint {
                sigma,
                percentile: p,
                trials: s.trials,
                mae: abs_sum[pi] as f64 / s.trials as f64,
                max_error: max_err[pi],
                mean_rounds: rounds[pi] as f64 / s.trials as f64,
            });
        }
    }
    Ok(out)
}

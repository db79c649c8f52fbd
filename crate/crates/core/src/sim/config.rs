//! Scenario configuration and its line-oriented `key = value` form.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::masking::FrequencySampler;
use crate::paillier::SUPPORTED_BITS;
use crate::rank::search::Target;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Irank,
    Nirank,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "irank" => Ok(Protocol::Irank),
            "nirank" => Ok(Protocol::Nirank),
            _ => Err(Error::Config(format!("unknown protocol {s:?}"))),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Irank => "irank",
            Protocol::Nirank => "nirank",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Rounded to integers and clamped to the range.
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    Uniform,
    /// One value per user.
    Explicit(Vec<i64>),
    /// One dataset per user; every element is registered on its own.
    Datasets(Vec<Vec<i64>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    Median,
    Percentile(f64),
    Rank(usize),
}

impl TargetSpec {
    pub fn resolve(self, entries: usize) -> Result<Target> {
        match self {
            TargetSpec::Median => Ok(Target::Median),
            TargetSpec::Percentile(p) => Target::percentile(p, entries),
            TargetSpec::Rank(k) if (1..=entries).contains(&k) => Ok(Target::Rank(k)),
            TargetSpec::Rank(k) => Err(Error::Config(format!("rank {k} outside 1..={entries}"))),
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Median => f.write_str("median"),
            TargetSpec::Percentile(p) => write!(f, "p{p}"),
            TargetSpec::Rank(k) => write!(f, "k={k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Optimizations {
    /// Stop as soon as `|z| <= delta`.
    pub early_stop: bool,
    /// Levels of the search tree evaluated ahead in each round.
    pub speculative_depth: u32,
    pub moments_init: bool,
    pub verification_split: bool,
}

impl Optimizations {
    /// Parses a comma-separated list such as `early_stop,speculate:2,moments,split`.
    pub fn parse_into(&mut self, list: &str) -> Result<()> {
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once(':') {
                Some(("speculate", d)) => {
                    self.speculative_depth = d
                        .parse()
                        .map_err(|_| Error::Config(format!("bad depth {d:?}")))?
                }
                None if item == "early_stop" => self.early_stop = true,
                None if item == "moments" => self.moments_init = true,
                None if item == "split" => self.verification_split = true,
                None if item == "none" => {}
                _ => return Err(Error::Config(format!("unknown optimization {item:?}"))),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub users: usize,
    pub workers: usize,
    pub low: i64,
    pub high: i64,
    pub bits: u64,
    pub protocol: Protocol,
    pub target: TargetSpec,
    pub delta: u64,
    pub eta: u32,
    pub opt: Optimizations,
    pub data: DataSource,
    pub seed: u64,
    pub trials: usize,
    pub sampler: FrequencySampler,
    /// Safe primes used instead of generating a key.
    pub primes: Option<(BigUint, BigUint)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            users: 5,
            workers: 2,
            low: 0,
            high: 8,
            bits: 512,
            protocol: Protocol::Irank,
            target: TargetSpec::Median,
            delta: 0,
            eta: 2,
            opt: Optimizations::default(),
            data: DataSource::Uniform,
            seed: 0,
            trials: 200,
            sampler: FrequencySampler::default(),
            primes: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
}

pub fn parse_list(v: &str) -> Result<Vec<i64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|x| parse("list", x))
        .collect()
}

pub fn parse_range(v: &str) -> Result<(i64, i64)> {
    let (lo, hi) = v
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("range {v:?} is not LO:HI")))?;
    Ok((parse("range", lo.trim())?, parse("range", hi.trim())?))
}

/// Two hex-encoded primes, one per line.
pub fn parse_prime_pair(text: &str) -> Result<(BigUint, BigUint)> {
    let mut it = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            BigUint::parse_bytes(l.as_bytes(), 16)
                .ok_or_else(|| Error::Config(format!("not a hex prime: {l:.16}...")))
        });
    match (it.next(), it.next()) {
        (Some(p), Some(q)) => Ok((p?, q?)),
        _ => Err(Error::Config("expected two primes".into())),
    }
}

/// Non-empty, non-comment lines split at the first `=`.
pub(crate) fn kv_lines(text: &str) -> impl Iterator<Item = Result<(String, String)>> + '_ {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("expected key = value, got {l:?}")))
        })
}

impl SimConfig {
    /// Applies `key = value` lines on top of `self`.
    ///
    /// Keys: `users`, `workers`, `range`, `bits`, `protocol`, `median`, `percentile`,
    /// `k`, `delta`, `eta`, `opt`, `seed`, `trials`, `data`, `dataset` (repeatable),
    /// `zero_probability`, `max_frequency`. `data` is `uniform`, `gaussian:MU:SIGMA`
    /// or a comma-separated list of inputs.
    pub fn apply_kv(mut self, text: &str) -> Result<Self> {
        let mut datasets = Vec::new();
        for line in kv_lines(text) {
            let (key, v) = line?;
            let v = v.as_str();
            match key.as_str() {
                "users" => self.users = parse(&key, v)?,
                "workers" => self.workers = parse(&key, v)?,
                "range" => (self.low, self.high) = parse_range(v)?,
                "bits" => self.bits = parse(&key, v)?,
                "protocol" => self.protocol = v.parse()?,
                "median" => self.target = TargetSpec::Median,
                "percentile" => self.target = TargetSpec::Percentile(parse(&key, v)?),
                "k" => self.target = TargetSpec::Rank(parse(&key, v)?),
                "delta" => self.delta = parse(&key, v)?,
                "eta" => self.eta = parse(&key, v)?,
                "opt" => self.opt.parse_into(v)?,
                "seed" => self.seed = parse(&key, v)?,
                "trials" => self.trials = parse(&key, v)?,
                "zero_probability" => self.sampler.zero_probability = parse(&key, v)?,
                "max_frequency" => self.sampler.max_frequency = parse(&key, v)?,
                "data" => self.data = parse_data(v)?,
                "dataset" => datasets.push(parse_list(v)?),
                _ => return Err(Error::Config(format!("unknown key {key:?}"))),
            }
        }
        if !datasets.is_empty() {
            self.users = datasets.len();
            self.data = DataSource::Datasets(datasets);
        }
        if let DataSource::Explicit(xs) = &self.data {
            self.users = xs.len();
        }
        Ok(self)
    }

    /// Number of registered values: users, or the total dataset size in Scenario-II.
    pub fn entries(&self) -> usize {
        match &self.data {
            DataSource::Datasets(ds) => ds.iter().map(Vec::len).sum(),
            _ => self.users,
        }
    }

    pub fn tolerance(&self) -> u64 {
        if self.opt.early_stop {
            self.delta
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.users == 0 {
            return bad("at least one user is required".into());
        }
        if self.workers < 2 {
            return bad("at least two workers are required".into());
        }
        if self.low >= self.high {
            return bad(format!("empty range [{}, {}]", self.low, self.high));
        }
        if self.primes.is_none() && !SUPPORTED_BITS.contains(&self.bits) {
            return bad(format!("unsupported modulus size {}", self.bits));
        }
        if self.eta < 2 || !self.eta.is_multiple_of(2) {
            return bad(format!(
                "scale factor {} must be even and at least 2",
                self.eta
            ));
        }
        if let TargetSpec::Percentile(p) = self.target {
            if !(p > 0.0 && p < 100.0) {
                return bad(format!("percentile {p} outside (0, 100)"));
            }
        }
        match &self.data {
            DataSource::Explicit(xs) if xs.len() != self.users => {
                return bad(format!("{} inputs for {} users", xs.len(), self.users))
            }
            DataSource::Datasets(ds) if ds.len() != self.users || ds.iter().any(Vec::is_empty) => {
                return bad("every user needs a non-empty dataset".into())
            }
            DataSource::Gaussian { sigma, .. } if sigma.is_nan() || *sigma < 0.0 => {
                return bad("negative sigma".into())
            }
            _ => {}
        }
        let inputs: Vec<i64> = match &self.data {
            DataSource::Explicit(xs) => xs.clone(),
            DataSource::Datasets(ds) => ds.concat(),
            _ => Vec::new(),
        };
        if let Some(x) = inputs.iter().find(|x| !(self.low..=self.high).contains(*x)) {
            return bad(format!("input {x} outside [{}, {}]", self.low, self.high));
        }
        self.target.resolve(self.entries())?;
        Ok(())
    }
}

fn parse_data(v: &str) -> Result<DataSource> {
    if v == "uniform" {
        return Ok(DataSource::Uniform);
    }
    if let Some(rest) = v.strip_prefix("gaussian:") {
        let (mu, sigma) = rest
            .split_once(':')
            .ok_or_else(|| Error::Config("gaussian:MU:SIGMA expected".into()))?;
        return Ok(DataSource::Gaussian {
            mu: parse("mu", mu)?,
            sigma: parse("sigma", sigma)?,
        });
    }
    Ok(DataSource::Explicit(parse_list(v)?))
}

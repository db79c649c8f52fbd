//! Scenario execution: every actor's messages go through the bus as encoded frames
//! and are decoded again before anyone acts on them.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::adversary::{validate_scripts, Action, AdversaryScript};
use super::bus::{Actor, ActorTraffic, Bus, MsgTag};
use super::config::{DataSource, Protocol, SimConfig};
use super::ledger::CostLedger;
use super::split::{cross_check, verification_split, SignedBatch, SigningKey};
use crate::error::{Abort, Error, Party, Result};
use crate::masking::{sign, MaskingConfig};
use crate::nirank::reshare::{public_share, ReshareMask};
use crate::nirank::{
    check_scale, combine_mul, prep_chain, ChainStep, DecShare, MulShare, PrepConfig, PrepTriple,
    ReshareOutput, TripleBank,
};
use crate::paillier::{
    keygen, keygen_from_primes, Ciphertext, Opening, PublicParams, ScaleFactor, SecretKeyShare,
};
use crate::rank::moments::{
    init_range_from_moments, make_power_submission, verify_power_submission, MomentsReport,
    PowerSubmission,
};
use crate::rank::search::{round_bound, HalfInt, SearchState, Step, Target};
use crate::rank::submission::{
    aggregate_signs, compute_enc_q, Registration, RoundContext, SignSubmission, SubmissionFault,
};
use crate::rank::{kth_smallest, median_oracle};
use crate::zkp::ProofKind;

/// Moments learned by the initialization phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentsSummary {
    pub mean: f64,
    pub sigma: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub alpha: i64,
    pub beta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub protocol: String,
    pub users: usize,
    pub entries: usize,
    pub workers: usize,
    pub range: (i64, i64),
    pub modulus_bits: u64,
    pub target: String,
    pub rank: usize,
    pub result: Option<i64>,
    pub true_value: i64,
    pub abs_error: Option<i64>,
    /// Communication rounds of the search.
    pub rounds_used: usize,
    /// Search steps taken; exceeds `rounds_used` only with speculation.
    pub search_steps: usize,
    pub z_sequence: Vec<i64>,
    /// Guesses as twice their value.
    pub guesses: Vec<i64>,
    pub abort: Option<Abort>,
    pub degraded: Vec<String>,
    pub moments: Option<MomentsSummary>,
    pub triples_prepared: usize,
    pub triples_used: usize,
    pub frames: u64,
    pub transcript_digest: String,
    pub traffic: Vec<ActorTraffic>,
    pub ledger: CostLedger,
}

impl RunReport {
    pub fn traffic_of(&self, actor: Actor) -> super::bus::Traffic {
        self.traffic
            .iter()
            .find(|t| t.actor == actor)
            .map(|t| t.traffic)
            .unwrap_or_default()
    }
}

/// Wall-clock time per phase, kept out of the report so reports stay reproducible.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub phases: Vec<(String, Duration)>,
    pub total: Duration,
}

/// Triples the non-interactive protocol consumes at most.
pub fn triple_budget(cfg: &SimConfig) -> usize {
    let width = (cfg.high - cfg.low) as u64;
    let steps = round_bound(width) as usize
        + usize::from(!matches!(cfg.target, super::config::TargetSpec::Median));
    let depth = cfg.opt.speculative_depth as usize;
    let per_round = (1usize << (depth + 1)) - 1;
    cfg.entries() * steps.div_ceil(depth + 1) * per_round
}

struct Entry {
    owner: usize,
    opening: Opening,
}

enum Checkable {
    Registration(Registration),
    Submission {
        sub: Box<SignSubmission>,
        ctx: RoundContext,
        enc_x: Ciphertext,
    },
    Powers {
        sub: Box<PowerSubmission>,
        enc_x: Ciphertext,
    },
}

impl Checkable {
    fn verify(&self, params: &PublicParams, low: i64, high: i64) -> bool {
        match self {
            Checkable::Registration(r) => r.verify(params, low, high),
            Checkable::Submission { sub, ctx, enc_x } => sub.verify(params, ctx, enc_x).is_ok(),
            Checkable::Powers { sub, enc_x } => {
                &sub.powers[0] == enc_x && verify_power_submission(params, sub)
            }
        }
    }
}

struct BatchSet {
    batches: Vec<SignedBatch>,
    items: Vec<Checkable>,
}

struct Run<'a> {
    cfg: &'a SimConfig,
    scripts: &'a [AdversaryScript],
    rng: ChaCha20Rng,
    params: PublicParams,
    keys: Vec<SecretKeyShare>,
    bus: Bus,
    ledger: CostLedger,
    entries: Vec<Entry>,
    enc_xs: Vec<Ciphertext>,
    signing: Vec<SigningKey>,
    batch_sets: Vec<BatchSet>,
    forged_used: Vec<bool>,
    bank: Option<TripleBank>,
    next_slot: usize,
    report_moments: Option<MomentsSummary>,
    degraded: Vec<String>,
    z_sequence: Vec<i64>,
    guesses: Vec<i64>,
    rounds_used: usize,
    result: Option<i64>,
    timings: Timings,
    eta: ScaleFactor,
}

/// Draws the scenario's inputs as `(owner, value)` pairs.
pub fn materialize_inputs(cfg: &SimConfig) -> Result<Vec<(usize, i64)>> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    Ok(match &cfg.data {
        DataSource::Explicit(xs) => xs.iter().copied().enumerate().collect(),
        DataSource::Datasets(ds) => ds
            .iter()
            .enumerate()
            .flat_map(|(i, d)| d.iter().map(move |&x| (i, x)))
            .collect(),
        DataSource::Uniform => (0..cfg.users)
            .map(|i| (i, rng.random_range(cfg.low..=cfg.high)))
            .collect(),
        DataSource::Gaussian { mu, sigma } => {
            let normal = Normal::new(*mu, *sigma).map_err(|e| Error::Config(e.to_string()))?;
            (0..cfg.users)
                .map(|i| {
                    (
                        i,
                        gaussian_input(normal.sample(&mut rng), cfg.low, cfg.high),
                    )
                })
                .collect()
        }
    })
}

/// Rounds half away from zero and clamps to `[low, high]`.
pub fn gaussian_input(x: f64, low: i64, high: i64) -> i64 {
    (x.round() as i64).clamp(low, high)
}

fn keys_with(
    cfg: &SimConfig,
    rng: &mut ChaCha20Rng,
) -> Result<(PublicParams, Vec<SecretKeyShare>)> {
    match &cfg.primes {
        Some((p, q)) => keygen_from_primes(p, q, cfg.workers, rng),
        None => keygen(cfg.bits, cfg.workers, rng),
    }
}

/// The key material a run with this configuration uses.
pub fn scenario_keys(cfg: &SimConfig) -> Result<(PublicParams, Vec<SecretKeyShare>)> {
    keys_with(cfg, &mut ChaCha20Rng::seed_from_u64(cfg.seed))
}

/// Offline triples for this configuration, produced without the message bus.
pub fn prepare_bank(cfg: &SimConfig, count: usize) -> Result<(PublicParams, TripleBank)> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let (params, keys) = keys_with(cfg, &mut rng)?;
    let masking = MaskingConfig::new(
        &BigInt::from(params.n.clone()),
        cfg.low,
        cfg.high,
        cfg.sampler,
    )?;
    let prep = PrepConfig::new(&params, masking)?;
    let triples = prep_chain(&params, &keys, &prep, 0, count, &mut rng)?;
    Ok((params, TripleBank::new(triples)))
}

/// Runs a scenario. Identifiable aborts are reported, not returned as errors.
pub fn run_scenario(cfg: &SimConfig, scripts: &[AdversaryScript]) -> Result<RunReport> {
    run_scenario_timed(cfg, scripts).map(|(r, _)| r)
}

pub fn run_scenario_timed(
    cfg: &SimConfig,
    scripts: &[AdversaryScript],
) -> Result<(RunReport, Timings)> {
    cfg.validate()?;
    validate_scripts(cfg, scripts)?;
    let eta = ScaleFactor::new(cfg.eta)?;
    if cfg.protocol == Protocol::Nirank {
        check_scale(eta)?;
    }
    let started = Instant::now();
    let inputs = materialize_inputs(cfg)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let t = Instant::now();
    let (params, keys) = keys_with(cfg, &mut rng)?;
    let workers: Vec<Actor> = (1..=cfg.workers).map(Actor::Worker).collect();
    let mut run = Run {
        cfg,
        scripts,
        rng,
        params,
        keys,
        bus: Bus::new(workers),
        ledger: CostLedger::default(),
        entries: Vec::new(),
        enc_xs: Vec::new(),
        signing: (1..=cfg.workers)
            .map(|j| SigningKey::derive(cfg.seed, j))
            .collect(),
        batch_sets: Vec::new(),
        forged_used: vec![false; cfg.workers + 1],
        bank: None,
        next_slot: 0,
        report_moments: None,
        degraded: Vec::new(),
        z_sequence: Vec::new(),
        guesses: Vec::new(),
        rounds_used: 0,
        result: None,
        timings: Timings::default(),
        eta,
    };
    run.timings.phases.push(("keygen".into(), t.elapsed()));
    let abort = match run.execute(&inputs) {
        Ok(()) => None,
        Err(Error::Abort(a)) => Some(a),
        Err(e) => return Err(e),
    };
    if abort.is_some() {
        run.result = None;
    }
    let values: Vec<i64> = inputs.iter().map(|(_, x)| *x).collect();
    let target = cfg.target.resolve(values.len())?;
    let rank = target.rank(values.len());
    let true_value = match target {
        Target::Median => median_oracle(&values),
        Target::Rank(k) => kth_smallest(&values, k),
    };
    let mut timings = std::mem::take(&mut run.timings);
    timings.total = started.elapsed();
    let report = RunReport {
        protocol: cfg.protocol.to_string(),
        users: cfg.users,
        entries: values.len(),
        workers: cfg.workers,
        range: (cfg.low, cfg.high),
        modulus_bits: run.params.bits,
        target: cfg.target.to_string(),
        rank,
        result: run.result,
        true_value,
        abs_error: run.result.map(|r| (r - true_value).abs()),
        rounds_used: run.rounds_used,
        search_steps: run.z_sequence.len(),
        z_sequence: run.z_sequence,
        guesses: run.guesses,
        abort,
        degraded: run.degraded,
        moments: run.report_moments,
        triples_prepared: run.bank.as_ref().map_or(0, TripleBank::len),
        triples_used: run.next_slot,
        frames: run.bus.frames(),
        transcript_digest: run.bus.digest_hex(),
        traffic: run.bus.traffic_table(),
        ledger: run.ledger,
    };
    Ok((report, timings))
}

impl Run<'_> {
    fn user_action(&self, user: usize) -> Option<Action> {
        self.scripts
            .iter()
            .find(|s| s.target == Party::User(user))
            .map(|s| s.action)
    }

    fn worker_action(&self, worker: usize) -> Option<Action> {
        self.scripts
            .iter()
            .find(|s| s.target == Party::Worker(worker))
            .map(|s| s.action)
    }

    fn skipping_workers(&self) -> Vec<usize> {
        (1..=self.cfg.workers)
            .filter(|&j| self.worker_action(j) == Some(Action::SkipVerification))
            .collect()
    }

    fn width(&self) -> u64 {
        (self.cfg.high - self.cfg.low) as u64
    }

    fn timed<T>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f(self);
        self.timings.phases.push((label.to_string(), t.elapsed()));
        out
    }

    fn execute(&mut self, inputs: &[(usize, i64)]) -> Result<()> {
        self.timed("registration", |r| r.register(inputs))?;
        if self.cfg.protocol == Protocol::Nirank {
            self.timed("preprocessing", |r| r.prepare())?;
        }
        let n = self.entries.len();
        let target = self.cfg.target.resolve(n)?;
        let mut state =
            SearchState::new(self.cfg.low, self.cfg.high, target, n, self.cfg.tolerance())?;
        if self.cfg.opt.moments_init {
            state = self.timed("moments", |r| r.moments(state))?;
        }
        self.timed("search", |r| r.search(state))?;
        if self.cfg.opt.verification_split {
            self.cross_check()?;
        }
        Ok(())
    }

    /// Verifies `items` (one per posted payload), either all by the collective or
    /// split among the workers, and aborts on the first rejected item's owner.
    fn verify_items(
        &mut self,
        round: u32,
        payloads: &[Vec<u8>],
        owners: &[usize],
        items: Vec<Checkable>,
    ) -> Result<()> {
        let (low, high) = (self.cfg.low, self.cfg.high);
        if self.cfg.opt.verification_split {
            let skipping = self.skipping_workers();
            let params = &self.params;
            let out = verification_split(
                payloads,
                self.cfg.workers,
                round,
                &self.signing,
                &skipping,
                |i| items[i].verify(params, low, high),
            );
            for b in &out.batches {
                self.bus.post(
                    MsgTag::BatchSignature,
                    Actor::Worker(b.worker),
                    round,
                    b.encode(),
                );
            }
            let rejected = out.verdicts.iter().position(|v| *v == Some(false));
            self.batch_sets.push(BatchSet {
                batches: out.batches,
                items,
            });
            if let Some(i) = rejected {
                return Err(Error::abort(
                    Party::User(owners[i]),
                    "proof rejected by its verifier",
                ));
            }
            return Ok(());
        }
        for (i, item) in items.iter().enumerate() {
            if !item.verify(&self.params, low, high) {
                return Err(Error::abort(Party::User(owners[i]), "proof rejected"));
            }
        }
        Ok(())
    }

    fn cross_check(&mut self) -> Result<()> {
        let (low, high) = (self.cfg.low, self.cfg.high);
        let mut derelict = Vec::new();
        for set in &self.batch_sets {
            let params = &self.params;
            for w in cross_check(&set.batches, &self.signing, |_, i| {
                set.items[i].verify(params, low, high)
            }) {
                if !derelict.contains(&w) {
                    derelict.push(w);
                }
            }
        }
        match derelict.first() {
            Some(&w) => Err(Error::abort(
                Party::Worker(w),
                "signed a verification batch containing an invalid proof",
            )),
            None => Ok(()),
        }
    }

    fn register(&mut self, inputs: &[(usize, i64)]) -> Result<()> {
        self.ledger.begin("registration");
        let (low, high) = (self.cfg.low, self.cfg.high);
        let mut payloads = Vec::with_capacity(inputs.len());
        let mut owners = Vec::with_capacity(inputs.len());
        let mut items = Vec::with_capacity(inputs.len());
        for (index, &(owner, value)) in inputs.iter().enumerate() {
            let action = self.user_action(owner);
            let (x, claimed) = match action {
                Some(Action::OutOfRangeInput) => (high + 1, Some(high)),
                _ => (value, None),
            };
            let (mut reg, opening) =
                Registration::create(&self.params, index, x, low, high, claimed, &mut self.rng)?;
            if self.cfg.protocol == Protocol::Nirank
                && matches!(
                    action,
                    Some(Action::InvalidProof {
                        kind: ProofKind::Rg,
                        ..
                    })
                )
            {
                reg.proof.p[1] += 1u32;
            }
            self.ledger.current().generated(ProofKind::Rg, 1);
            let payload = self.bus.post(
                MsgTag::Register,
                Actor::User(owner),
                0,
                reg.encode(&self.params)?,
            );
            let decoded = Registration::decode(&self.params, index, &payload)?;
            self.ledger.current().verified(ProofKind::Rg, 1);
            self.enc_xs.push(decoded.enc_x.clone());
            items.push(Checkable::Registration(decoded));
            payloads.push(payload);
            owners.push(owner);
            self.entries.push(Entry { owner, opening });
        }
        self.verify_items(0, &payloads, &owners, items)
    }

    fn joint_decrypt(&mut self, round: u32, c: &Ciphertext) -> Result<BigInt> {
        let j_count = self.cfg.workers;
        let mut shares = Vec::with_capacity(j_count);
        for j in 1..=j_count {
            let key = &self.keys[j - 1];
            let mut share = match self.worker_action(j) {
                Some(Action::ForgedPartialDecryption) if !self.forged_used[j] => {
                    self.forged_used[j] = true;
                    DecShare::forged(&self.params, key, c, &mut self.rng)
                }
                _ => DecShare::new(&self.params, key, c, &mut self.rng),
            };
            if matches!(
                self.worker_action(j),
                Some(Action::InvalidProof {
                    kind: ProofKind::Pd,
                    ..
                })
            ) && !self.forged_used[j]
            {
                self.forged_used[j] = true;
                share.proof.p += 1u32;
            }
            let payload = self.bus.post(
                MsgTag::PartialDecryption,
                Actor::Worker(j),
                round,
                share.encode(&self.params)?,
            );
            shares.push(DecShare::decode(&self.params, j, &payload)?);
        }
        let phase = self.ledger.current();
        phase.ops.dec += 1;
        phase.share_ops += j_count as u64;
        phase.generated(ProofKind::Pd, j_count as u64);
        phase.verified(ProofKind::Pd, j_count as u64);
        Ok(crate::nirank::combine_shares(&self.params, c, &shares)?.0)
    }

    fn shared_mul(
        &mut self,
        round: u32,
        theta: &Ciphertext,
        shares: &[ReshareOutput],
    ) -> Result<Ciphertext> {
        let mut parts = Vec::with_capacity(shares.len());
        for s in shares {
            let part = MulShare::new(&self.params, theta, s, &mut self.rng);
            let payload = self.bus.post(
                MsgTag::MulShare,
                Actor::Worker(s.party),
                round,
                part.encode(&self.params)?,
            );
            parts.push(MulShare::decode(&self.params, s.party, &payload)?);
        }
        let enc: Vec<_> = shares.iter().map(|s| &s.enc_share).collect();
        let phase = self.ledger.current();
        phase.ops.mul += 1;
        phase.share_ops += shares.len() as u64;
        phase.generated(ProofKind::Mtp, shares.len() as u64);
        phase.verified(ProofKind::Mtp, shares.len() as u64);
        combine_mul(&self.params, theta, &enc, &parts)
    }

    fn reshare(&mut self, c: &Ciphertext) -> Result<Vec<ReshareOutput>> {
        let mut masks = Vec::with_capacity(self.cfg.workers);
        let mut masked = c.clone();
        for j in 1..=self.cfg.workers {
            let mask = ReshareMask::new(&self.params, j, &mut self.rng);
            let payload = self.bus.post(
                MsgTag::ReshareMask,
                Actor::Worker(j),
                0,
                encode_ct(&self.params, &mask.enc_v)?,
            );
            let enc_v = decode_ct(&self.params, &payload)?;
            masked = self.params.add(&masked, &enc_v);
            masks.push((mask, enc_v));
        }
        let phase = self.ledger.current();
        phase.ops.enc += self.cfg.workers as u64;
        phase.ops.add += self.cfg.workers as u64;
        let value = self.joint_decrypt(0, &masked)?;
        let value = self.params.encode_signed(&value)?;
        masks
            .iter()
            .map(|(mask, enc_v)| {
                let out = mask.finish(&self.params, &value)?;
                debug_assert_eq!(
                    public_share(&self.params, mask.party, &value, enc_v)?,
                    out.enc_share
                );
                Ok(out)
            })
            .collect()
    }

    fn prepare(&mut self) -> Result<()> {
        self.ledger.begin("preprocessing");
        let masking = MaskingConfig::new(
            &BigInt::from(self.params.n.clone()),
            self.cfg.low,
            self.cfg.high,
            self.cfg.sampler,
        )?;
        let prep = PrepConfig::new(&self.params, masking)?;
        let budget = triple_budget(self.cfg);
        let mut triples = Vec::with_capacity(budget);
        for index in 0..budget as u64 {
            let mut running: Option<(Ciphertext, Ciphertext)> = None;
            for j in 1..=self.cfg.workers {
                let prev = running.as_ref().map(|(a, b)| (a, b));
                let (mut step, _) =
                    ChainStep::create(&self.params, &prep, index, j, prev, &mut self.rng)?;
                if index == 0 {
                    if let Some(Action::InvalidProof { kind, .. }) = self.worker_action(j) {
                        step.corrupt(&self.params, kind);
                    }
                }
                let payload = self.bus.post(
                    MsgTag::PrepStep,
                    Actor::Worker(j),
                    0,
                    step.encode(&self.params)?,
                );
                let step = ChainStep::decode(&self.params, j, prev.is_some(), &payload)?;
                let linked = u64::from(step.link.is_some());
                let phase = self.ledger.current();
                phase.ops.mul += 1 + linked * 2;
                for (kind, count) in [
                    (ProofKind::Rg, 2),
                    (ProofKind::Nz, 1),
                    (ProofKind::Mbs, 1),
                    (ProofKind::Mtp, 1 + 2 * linked),
                ] {
                    phase.generated(kind, count);
                    phase.verified(kind, count);
                }
                step.verify(&self.params, &prep, index, prev)?;
                let (r, s) = step.running();
                running = Some((r.clone(), s.clone()));
            }
            let (enc_r, enc_sign) = running.expect("at least two workers");
            let shares_r = self.reshare(&enc_r)?;
            let shares_sign = self.reshare(&enc_sign)?;
            triples.push(PrepTriple {
                index,
                enc_r,
                enc_sign,
                shares_r,
                shares_sign,
            });
        }
        self.bank = Some(TripleBank::new(triples));
        Ok(())
    }

    fn moments(&mut self, state: SearchState) -> Result<SearchState> {
        self.ledger.begin("moments");
        let n = self.entries.len();
        let mut payloads = Vec::with_capacity(n);
        let mut owners = Vec::with_capacity(n);
        let mut items = Vec::with_capacity(n);
        let mut subs = Vec::with_capacity(n);
        for i in 0..n {
            let sub = make_power_submission(&self.params, &self.entries[i].opening, &mut self.rng)?;
            self.ledger.current().generated(ProofKind::Mtp, 3);
            let owner = self.entries[i].owner;
            let payload = self.bus.post(
                MsgTag::Powers,
                Actor::User(owner),
                0,
                sub.encode(&self.params)?,
            );
            let decoded = PowerSubmission::decode(&self.params, &payload)?;
            self.ledger.current().verified(ProofKind::Mtp, 3);
            subs.push(decoded.clone());
            items.push(Checkable::Powers {
                sub: Box::new(decoded),
                enc_x: self.enc_xs[i].clone(),
            });
            payloads.push(payload);
            owners.push(owner);
        }
        self.verify_items(0, &payloads, &owners, items)?;
        let mut sums: [BigInt; 4] = Default::default();
        for (p, sum) in sums.iter_mut().enumerate() {
            let total = self
                .params
                .sum(subs.iter().map(|s| &s.powers[p]))
                .expect("non-empty");
            self.ledger.current().ops.add += n as u64 - 1;
            *sum = self.joint_decrypt(0, &total)?;
        }
        let report = MomentsReport::from_sums(n, sums)?;
        let (mean, sigma) = (report.mean_f64(), report.sigma_f64());
        let (alpha, beta, start) =
            init_range_from_moments(mean, sigma, self.cfg.low, self.cfg.high);
        self.report_moments = Some(MomentsSummary {
            mean,
            sigma,
            skewness: report.skewness_f64(),
            kurtosis: report.kurtosis_f64(),
            alpha,
            beta,
        });
        state.with_range(alpha, beta, start)
    }

    fn search(&mut self, mut state: SearchState) -> Result<()> {
        let all_users: Vec<Actor> = (0..self.cfg.users).map(Actor::User).collect();
        let mut round = 0u32;
        loop {
            round += 1;
            self.ledger.begin(format!("round {round}"));
            let mut guesses = if self.cfg.opt.speculative_depth > 0 {
                state.speculative_guesses(self.cfg.opt.speculative_depth)
            } else {
                vec![state.guess]
            };
            let mut seen = std::collections::BTreeSet::new();
            guesses.retain(|g| seen.insert(g.twice()));
            let mut payload = Vec::with_capacity(8 * guesses.len());
            for g in &guesses {
                payload.extend(g.twice().to_be_bytes());
            }
            self.bus
                .post_to(MsgTag::Guess, Actor::Worker(1), round, payload, &all_users);

            let active = self.active_entries(round);
            if active.is_empty() {
                self.degraded
                    .push(format!("no inputs left in round {round}"));
                self.rounds_used = round as usize;
                return Ok(());
            }
            state.users = active.len();
            if let Target::Rank(k) = state.target {
                state.target = Target::Rank(k.min(active.len()));
            }
            let zs = match self.cfg.protocol {
                Protocol::Irank => self.irank_round(round, &guesses, &active, state.offset())?,
                Protocol::Nirank => self.nirank_round(round, &guesses, &active, state.offset())?,
            };
            self.rounds_used = round as usize;
            while let Some(i) = guesses.iter().position(|g| *g == state.guess) {
                let z = zs[i];
                self.z_sequence.push(z);
                self.guesses.push(state.guess.twice());
                match state.update(z) {
                    Step::Done(v) => {
                        self.result = Some(v);
                        self.bus.post_to(
                            MsgTag::Result,
                            Actor::Worker(1),
                            round,
                            v.to_be_bytes().to_vec(),
                            &all_users,
                        );
                        return Ok(());
                    }
                    Step::Continue(next) => state = next,
                }
            }
        }
    }

    /// Entries whose owner is still responding; early quitters only drop out of the
    /// interactive protocol.
    fn active_entries(&mut self, round: u32) -> Vec<usize> {
        let quit = |owner: usize| match self.user_action(owner) {
            Some(Action::EarlyQuit { round: q }) => {
                self.cfg.protocol == Protocol::Irank && round >= q
            }
            _ => false,
        };
        let active: Vec<usize> = (0..self.entries.len())
            .filter(|&i| !quit(self.entries[i].owner))
            .collect();
        if active.len() < self.entries.len() {
            let note = format!(
                "round {round}: {} of {} inputs missing after an early quit; N adjusted to {}",
                self.entries.len() - active.len(),
                self.entries.len(),
                active.len()
            );
            self.degraded.push(note);
        }
        active
    }

    fn irank_round(
        &mut self,
        round: u32,
        guesses: &[HalfInt],
        active: &[usize],
        offset: i64,
    ) -> Result<Vec<i64>> {
        let mut payloads = Vec::new();
        let mut owners = Vec::new();
        let mut items = Vec::new();
        let mut signs: Vec<Vec<Ciphertext>> = vec![Vec::new(); guesses.len()];
        for (gi, &guess) in guesses.iter().enumerate() {
            for &e in active {
                let owner = self.entries[e].owner;
                let fault = match self.user_action(owner) {
                    Some(Action::InvalidProof { kind, round: r }) if r == round => {
                        Some(SubmissionFault::Corrupt(kind))
                    }
                    Some(Action::InconsistentSign { round: r }) if r == round => {
                        Some(SubmissionFault::FlipSign)
                    }
                    _ => None,
                };
                let ctx = RoundContext {
                    user: e,
                    round,
                    guess,
                    eta: self.eta,
                    width: self.width(),
                };
                let sub = SignSubmission::create(
                    &self.params,
                    &ctx,
                    &self.entries[e].opening,
                    fault,
                    &mut self.rng,
                )?;
                let payload = self.bus.post(
                    MsgTag::Submission,
                    Actor::User(owner),
                    round,
                    sub.encode(&self.params)?,
                );
                let decoded = SignSubmission::decode(&self.params, e, &payload)?;
                let phase = self.ledger.current();
                for kind in [ProofKind::Mbs, ProofKind::Mtp, ProofKind::Rg, ProofKind::Nz] {
                    phase.generated(kind, 1);
                    phase.verified(kind, 1);
                }
                phase.public_ops += 1;
                signs[gi].push(decoded.enc_sign.clone());
                items.push(Checkable::Submission {
                    sub: Box::new(decoded),
                    ctx,
                    enc_x: self.enc_xs[e].clone(),
                });
                payloads.push(payload);
                owners.push(owner);
            }
        }
        self.verify_items(round, &payloads, &owners, items)?;
        let mut zs = Vec::with_capacity(guesses.len());
        for s in &signs {
            zs.push(self.aggregate_and_open(round, s, offset)?);
        }
        Ok(zs)
    }

    fn aggregate_and_open(&mut self, round: u32, signs: &[Ciphertext], offset: i64) -> Result<i64> {
        let refs: Vec<&Ciphertext> = signs.iter().collect();
        let total = aggregate_signs(&self.params, &refs, offset)?;
        let phase = self.ledger.current();
        phase.ops.add += signs.len() as u64 - 1;
        phase.public_ops += u64::from(offset != 0);
        let z = self.joint_decrypt(round, &total)?;
        z.to_i64()
            .ok_or_else(|| Error::Internal("sign sum out of range".into()))
    }

    fn nirank_round(
        &mut self,
        round: u32,
        guesses: &[HalfInt],
        active: &[usize],
        offset: i64,
    ) -> Result<Vec<i64>> {
        let mut zs = Vec::with_capacity(guesses.len());
        for &guess in guesses {
            let mut signs = Vec::with_capacity(active.len());
            for &e in active {
                let enc_q = compute_enc_q(&self.params, &self.enc_xs[e], guess, self.eta)?;
                self.ledger.current().public_ops += 1;
                let slot = self.next_slot;
                self.next_slot += 1;
                let triple: PrepTriple = self
                    .bank
                    .as_mut()
                    .ok_or_else(|| Error::Internal("no triple bank".into()))?
                    .take(slot)?
                    .clone();
                let enc_y = self.shared_mul(round, &enc_q, &triple.shares_r)?;
                let y = self.joint_decrypt(round, &enc_y)?;
                let phi = sign(&y).ok_or_else(|| {
                    Error::Internal(format!("malformed triple {slot}: masked value is zero"))
                })?;
                let enc_phi = self.params.encrypt_public(&BigInt::from(phi))?;
                self.ledger.current().ops.enc += 1;
                signs.push(self.shared_mul(round, &enc_phi, &triple.shares_sign)?);
            }
            zs.push(self.aggregate_and_open(round, &signs, offset)?);
        }
        Ok(zs)
    }
}

fn encode_ct(params: &PublicParams, c: &Ciphertext) -> Result<Vec<u8>> {
    let mut w = crate::codec::Writer::new();
    w.ciphertext(params, c)?;
    Ok(w.finish())
}

fn decode_ct(params: &PublicParams, bytes: &[u8]) -> Result<Ciphertext> {
    let mut r = crate::codec::Reader::new(bytes);
    let c = r.ciphertext(params)?;
    r.finish()?;
    Ok(c)
}

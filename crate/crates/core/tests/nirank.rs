mod common;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use secrank::masking::{FrequencySampler, MaskingConfig};
use secrank::nirank::{combine_shares, prep_chain};
use secrank::nirank::{
    ddec, masked_sign, nirank_round, reconstruct, reshare, shared_mul, ChainStep, DecShare,
    PrepConfig, TripleBank,
};
use secrank::paillier::{Ciphertext, PublicParams};
use secrank::{Error, Party};

use common::setup;

fn prep_config(pp: &PublicParams, low: i64, high: i64, sampler: FrequencySampler) -> PrepConfig {
    let masking = MaskingConfig::new(&BigInt::from(pp.n.clone()), low, high, sampler).unwrap();
    PrepConfig::new(pp, masking).unwrap()
}

fn culprit(e: Error) -> Party {
    e.as_abort().expect("identifiable abort").culprit
}

#[test]
fn ddec_round_trips_and_names_forgers() {
    let (pp, keys, mut rng) = setup(3, 31);
    for v in [-7i64, 0, 123_456] {
        let c = pp.encrypt(&v.into(), &mut rng).unwrap();
        assert_eq!(ddec(&pp, &keys, &c, &mut rng).unwrap().0, BigInt::from(v));
    }
    let c = pp.encrypt(&BigInt::from(-7), &mut rng).unwrap();
    let shares: Vec<_> = keys
        .iter()
        .map(|k| {
            if k.index == 3 {
                DecShare::forged(&pp, k, &c, &mut rng)
            } else {
                DecShare::new(&pp, k, &c, &mut rng)
            }
        })
        .collect();
    assert_eq!(
        culprit(combine_shares(&pp, &c, &shares).unwrap_err()),
        Party::Worker(3)
    );
}

#[test]
fn reshare_reconstructs() {
    let (pp, keys, mut rng) = setup(3, 32);
    for v in [10i64, 0, -4] {
        let c = pp.encrypt(&v.into(), &mut rng).unwrap();
        let shares = reshare(&pp, &keys, &c, &mut rng).unwrap();
        assert_eq!(shares.len(), 3);
        assert_eq!(reconstruct(&pp, &shares), BigInt::from(v));
        let sum = pp.sum(shares.iter().map(|s| &s.enc_share)).unwrap();
        assert_eq!(ddec(&pp, &keys, &sum, &mut rng).unwrap().0, BigInt::from(v));
    }
}

#[test]
fn shared_multiplication_examples() {
    let (pp, keys, mut rng) = setup(3, 33);
    for (theta, delta) in [(6i64, 7i64), (-3, -5), (9, 1), (-2, 0)] {
        let t = pp.encrypt(&theta.into(), &mut rng).unwrap();
        let d = pp.encrypt(&delta.into(), &mut rng).unwrap();
        let shares = reshare(&pp, &keys, &d, &mut rng).unwrap();
        let prod = shared_mul(&pp, &t, &shares, &mut rng).unwrap();
        assert_eq!(
            ddec(&pp, &keys, &prod, &mut rng).unwrap().0,
            BigInt::from(theta * delta)
        );
    }
}

#[test]
fn chain_reconstructs_product_and_sign() {
    let (pp, keys, mut rng) = setup(3, 34);
    let cfg = prep_config(&pp, 0, 16, FrequencySampler::default());
    let triples = prep_chain(&pp, &keys, &cfg, 0, 3, &mut rng).unwrap();
    for t in &triples {
        let r = ddec(&pp, &keys, &t.enc_r, &mut rng).unwrap().0;
        let s = ddec(&pp, &keys, &t.enc_sign, &mut rng).unwrap().0;
        assert!(!r.is_zero());
        assert!(r.abs() <= cfg.masking.randomness_bound);
        assert_eq!(s, BigInt::from(if r.is_negative() { -1 } else { 1 }));
        assert_eq!(reconstruct(&pp, &t.shares_r), r);
        assert_eq!(reconstruct(&pp, &t.shares_sign), s);
    }
}

#[test]
fn degenerate_sampler_gives_unit_randomness() {
    let (pp, keys, mut rng) = setup(3, 35);
    let sampler = FrequencySampler {
        zero_probability: 1.0,
        ..FrequencySampler::default()
    };
    let cfg = prep_config(&pp, 0, 16, sampler);
    for t in prep_chain(&pp, &keys, &cfg, 0, 4, &mut rng).unwrap() {
        let r = ddec(&pp, &keys, &t.enc_r, &mut rng).unwrap().0;
        let s = ddec(&pp, &keys, &t.enc_sign, &mut rng).unwrap().0;
        // Every |r_j| is 1; only the sign flips are random.
        assert_eq!(r.abs(), BigInt::one());
        assert_eq!(s, r);
    }
}

fn build_chain(
    pp: &PublicParams,
    cfg: &PrepConfig,
    tamper_at: Option<usize>,
    rng: &mut rand_chacha::ChaCha20Rng,
) -> Result<(Ciphertext, Ciphertext), Error> {
    let mut running: Option<(Ciphertext, Ciphertext)> = None;
    for j in 1..=pp.workers {
        let prev = running.as_ref().map(|(a, b)| (a, b));
        let (mut step, _) = ChainStep::create(pp, cfg, 7, j, prev, rng)?;
        if tamper_at == Some(j) {
            step.link.as_mut().expect("linked step").mtp_r.p += 1u32;
        }
        let bytes = step.encode(pp)?;
        let step = ChainStep::decode(pp, j, prev.is_some(), &bytes)?;
        step.verify(pp, cfg, 7, prev)?;
        let (r, s) = step.running();
        running = Some((r.clone(), s.clone()));
    }
    Ok(running.unwrap())
}

#[test]
fn tampered_chaining_proof_names_its_worker() {
    let (pp, _keys, mut rng) = setup(3, 36);
    let cfg = prep_config(&pp, 0, 16, FrequencySampler::default());
    build_chain(&pp, &cfg, None, &mut rng).unwrap();
    assert_eq!(
        culprit(build_chain(&pp, &cfg, Some(2), &mut rng).unwrap_err()),
        Party::Worker(2)
    );
    assert_eq!(
        culprit(build_chain(&pp, &cfg, Some(3), &mut rng).unwrap_err()),
        Party::Worker(3)
    );
}

#[test]
fn masked_round_recovers_signs_and_consumes_triples_once() {
    let (pp, keys, mut rng) = setup(2, 37);
    let cfg = prep_config(&pp, 0, 8, FrequencySampler::default());
    let triples = prep_chain(&pp, &keys, &cfg, 0, 5, &mut rng).unwrap();

    // Inputs {1..5} at guess 4.5 with scale 2: q = 2x - 9.
    let enc_qs: Vec<_> = (1..=5)
        .map(|x| pp.encrypt(&BigInt::from(2 * x - 9), &mut rng).unwrap())
        .collect();
    let refs: Vec<_> = triples.iter().collect();
    let round = nirank_round(&pp, &keys, &enc_qs, &refs, 0, &mut rng).unwrap();
    assert_eq!(round.z, -3);
    for (i, c) in round.enc_signs.iter().enumerate() {
        let expect = if 2 * (i as i64 + 1) > 9 { 1 } else { -1 };
        assert_eq!(
            ddec(&pp, &keys, c, &mut rng).unwrap().0,
            BigInt::from(expect)
        );
    }

    let q = pp.encrypt(&BigInt::from(-3), &mut rng).unwrap();
    let (masked, enc_sign) = masked_sign(&pp, &keys, &q, &triples[0], &mut rng).unwrap();
    let r = reconstruct(&pp, &triples[0].shares_r);
    assert_eq!(masked, BigInt::from(-3) * &r);
    assert_eq!(
        ddec(&pp, &keys, &enc_sign, &mut rng).unwrap().0,
        BigInt::from(-1)
    );

    let mut bank = TripleBank::new(triples);
    let slot = TripleBank::slot(5, 2, 0);
    bank.take(slot).unwrap();
    assert!(matches!(bank.take(slot), Err(Error::Precondition(_))));
    assert!(matches!(bank.take(99), Err(Error::Precondition(_))));
}

#[test]
fn bank_file_round_trip() {
    let (pp, keys, mut rng) = setup(2, 38);
    let cfg = prep_config(&pp, -4, 4, FrequencySampler::default());
    let bank = TripleBank::new(prep_chain(&pp, &keys, &cfg, 0, 3, &mut rng).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("triples.bank");
    bank.save(&pp, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"SRTB");
    assert_eq!(TripleBank::load(&pp, &path).unwrap(), bank);
    assert!(TripleBank::decode(&pp, &bytes[..bytes.len() - 1]).is_err());
}

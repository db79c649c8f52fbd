//! Raw and central moments from encrypted power sums.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Party, Result};
use crate::paillier::{Ciphertext, Opening, PublicParams, SecretKeyShare};
use crate::zkp::mtp::{scale_by_known, MtpStatement, MtpWitness};
use crate::zkp::{prove_mtp, verify_mtp, MtpProof, ProofKind, SigmaProof};

/// Moments of a dataset, exact where the quantity is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentsReport {
    pub count: usize,
    /// `Σx, Σx², Σx³, Σx⁴`
    pub sums: [BigInt; 4],
    /// `μ_x, μ_x², μ_x³, μ_x⁴`
    pub raw: [BigRational; 4],
    pub variance: BigRational,
    pub third_central: BigRational,
    pub fourth_central: BigRational,
    /// `γ²`, undefined when the variance is zero.
    pub skewness_squared: Option<BigRational>,
    /// `κ`, undefined when the variance is zero.
    pub kurtosis: Option<BigRational>,
}

impl MomentsReport {
    pub fn from_sums(count: usize, sums: [BigInt; 4]) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "moments of an empty dataset".into(),
            ));
        }
        let n = BigRational::from_integer(BigInt::from(count));
        let raw: [BigRational; 4] =
            std::array::from_fn(|i| BigRational::from_integer(sums[i].clone()) / &n);
        let mu = raw[0].clone();
        let c = |k: i64| BigRational::from_integer(BigInt::from(k));
        let variance = &raw[1] - &mu * &mu;
        let third_central = &raw[2] - c(3) * &mu * &raw[1] + c(2) * &mu * &mu * &mu;
        let fourth_central = &raw[3] - c(4) * &mu * &raw[2] + c(6) * &mu * &mu * &raw[1]
            - c(3) * &mu * &mu * &mu * &mu;
        let (skewness_squared, kurtosis) = if variance.is_zero() {
            (None, None)
        } else {
            let v2 = &variance * &variance;
            (
                Some(&third_central * &third_central / (&v2 * &variance)),
                Some(&fourth_central / v2),
            )
        };
        Ok(MomentsReport {
            count,
            sums,
            raw,
            variance,
            third_central,
            fourth_central,
            skewness_squared,
            kurtosis,
        })
    }

    /// Moments computed directly from plaintext values.
    pub fn direct(values: &[i64]) -> Result<Self> {
        let sums = std::array::from_fn(|k| {
            values
                .iter()
                .map(|&x| BigInt::from(x).pow(k as u32 + 1))
                .sum()
        });
        Self::from_sums(values.len(), sums)
    }

    pub fn mean(&self) -> &BigRational {
        &self.raw[0]
    }

    pub fn mean_f64(&self) -> f64 {
        ratio_f64(&self.raw[0])
    }

    pub fn sigma_f64(&self) -> f64 {
        ratio_f64(&self.variance).sqrt()
    }

    pub fn skewness_f64(&self) -> Option<f64> {
        let sq = self.skewness_squared.as_ref()?;
        let sign = if self.third_central.is_negative() {
            -1.0
        } else {
            1.0
        };
        Some(sign * ratio_f64(sq).sqrt())
    }

    pub fn kurtosis_f64(&self) -> Option<f64> {
        self.kurtosis.as_ref().map(ratio_f64)
    }

    /// `|μ - m| ≤ σ` checked exactly.
    pub fn within_one_sigma(&self, m: i64) -> bool {
        let d = &self.raw[0] - BigRational::from_integer(BigInt::from(m));
        &d * &d <= self.variance
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Search range `[max(low, ⌊μ-σ⌋), min(high, ⌈μ+σ⌉)]` and start `⌊μ⌋`.
///
/// Returns `(alpha, beta, start)`; the range is widened to at least one unit.
pub fn init_range_from_moments(mu: f64, sigma: f64, low: i64, high: i64) -> (i64, i64, i64) {
    let alpha = ((mu - sigma).floor() as i64).clamp(low, high);
    let mut beta = ((mu + sigma).ceil() as i64).clamp(low, high);
    let mut alpha = alpha;
    if beta <= alpha {
        if beta < high {
            beta = alpha + 1;
        } else {
            alpha = beta - 1;
        }
    }
    let start = (mu.floor() as i64).clamp(alpha, beta - 1);
    (alpha, beta, start)
}

/// A user's encrypted powers `x, x², x³, x⁴` with proofs linking consecutive powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSubmission {
    pub powers: [Ciphertext; 4],
    pub proofs: [MtpProof; 3],
}

impl PowerSubmission {
    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        for c in &self.powers {
            w.ciphertext(params, c)?;
        }
        for p in &self.proofs {
            SigmaProof::Mtp(p.clone()).write_body(params, &mut w)?;
        }
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let mut powers = Vec::with_capacity(4);
        for _ in 0..4 {
            powers.push(r.ciphertext(params)?);
        }
        let mut proofs = Vec::with_capacity(3);
        for _ in 0..3 {
            match SigmaProof::read_body(params, ProofKind::Mtp, &mut r)? {
                SigmaProof::Mtp(p) => proofs.push(p),
                _ => unreachable!("kind fixed to mtp"),
            }
        }
        r.finish()?;
        Ok(PowerSubmission {
            powers: powers.try_into().expect("four powers"),
            proofs: proofs.try_into().expect("three proofs"),
        })
    }
}

pub fn make_power_submission<R: RngCore + ?Sized>(
    params: &PublicParams,
    x: &Opening,
    rng: &mut R,
) -> Result<PowerSubmission> {
    let fourth = x.value.pow(4);
    if !params.in_signed_range(&fourth) {
        return Err(Error::PlaintextRange(fourth.to_string()));
    }
    let mut powers = vec![x.ciphertext.clone()];
    let mut proofs = Vec::with_capacity(3);
    for _ in 0..3 {
        let prev = powers.last().expect("nonempty").clone();
        let (next, nu) = scale_by_known(params, &prev, &x.value, rng);
        let stmt = MtpStatement {
            x: &prev,
            y: &x.ciphertext,
            z: &next,
        };
        let wit = MtpWitness {
            y: x.value.clone(),
            gamma: x.randomness.clone(),
            nu,
        };
        proofs.push(prove_mtp(params, &stmt, &wit, rng));
        powers.push(next);
    }
    Ok(PowerSubmission {
        powers: powers.try_into().expect("four powers"),
        proofs: proofs.try_into().expect("three proofs"),
    })
}

pub fn verify_power_submission(params: &PublicParams, sub: &PowerSubmission) -> bool {
    (0..3).all(|i| {
        let stmt = MtpStatement {
            x: &sub.powers[i],
            y: &sub.powers[0],
            z: &sub.powers[i + 1],
        };
        verify_mtp(params, &stmt, &sub.proofs[i])
    })
}

/// Checks every user's power chain, adds the powers column-wise and has the workers
/// jointly decrypt the four sums.
///
/// A broken chain aborts naming `User(i)` for submission `i`.
pub fn moments_protocol<R: RngCore + ?Sized>(
    params: &PublicParams,
    keys: &[SecretKeyShare],
    subs: &[PowerSubmission],
    rng: &mut R,
) -> Result<MomentsReport> {
    if let Some(bad) = subs
        .iter()
        .position(|s| !verify_power_submission(params, s))
    {
        return Err(Error::abort(Party::User(bad), "power chain proof rejected"));
    }
    let mut sums: [BigInt; 4] = Default::default();
    for (p, sum) in sums.iter_mut().enumerate() {
        let total = params
            .sum(subs.iter().map(|s| &s.powers[p]))
            .ok_or_else(|| Error::InvalidParameter("moments of an empty dataset".into()))?;
        let parts: Vec<_> = keys
            .iter()
            .map(|k| params.partial_decrypt(k, &total, rng))
            .collect();
        *sum = params.combine(&total, &parts)?.value().clone();
    }
    MomentsReport::from_sums(subs.len(), sums)
}

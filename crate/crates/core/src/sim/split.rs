//! Splitting proof verification among workers, with signed batches and a later
//! cross-check that attributes any accepted invalid proof to the worker who signed it.
//!
//! Signatures are simulated with keyed SHA-256; the harness holds every key.

use sha2::{Digest, Sha256};

/// Worker (1-based) responsible for item `index`.
pub fn assigned_worker(index: usize, workers: usize) -> usize {
    index % workers.max(1) + 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigningKey([u8; 32]);

impl SigningKey {
    pub fn derive(seed: u64, worker: usize) -> Self {
        let mut h = Sha256::new();
        h.update(b"secrank/signing-key");
        h.update(seed.to_be_bytes());
        h.update((worker as u64).to_be_bytes());
        SigningKey(h.finalize().into())
    }

    fn mac(&self, worker: usize, round: u32, digests: &[[u8; 32]]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update((worker as u64).to_be_bytes());
        h.update(round.to_be_bytes());
        for d in digests {
            h.update(d);
        }
        h.finalize().into()
    }
}

pub fn payload_digest(payload: &[u8]) -> [u8; 32] {
    Sha256::digest(payload).into()
}

/// One worker's signed statement that it verified `items`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedBatch {
    pub worker: usize,
    pub round: u32,
    pub items: Vec<usize>,
    pub digests: Vec<[u8; 32]>,
    pub signature: [u8; 32],
}

impl SignedBatch {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 32 * (self.digests.len() + 1));
        out.extend((self.worker as u32).to_be_bytes());
        out.extend((self.digests.len() as u32).to_be_bytes());
        for d in &self.digests {
            out.extend(d);
        }
        out.extend(self.signature);
        out
    }

    pub fn signature_valid(&self, key: &SigningKey) -> bool {
        key.mac(self.worker, self.round, &self.digests) == self.signature
    }
}

pub struct SplitOutcome {
    /// Verdict per item from its assigned worker; `None` when the worker skipped it.
    pub verdicts: Vec<Option<bool>>,
    pub batches: Vec<SignedBatch>,
}

/// Each worker verifies the items assigned to it and signs the batch. Workers listed
/// in `skipping` sign without verifying.
pub fn verification_split(
    payloads: &[Vec<u8>],
    workers: usize,
    round: u32,
    keys: &[SigningKey],
    skipping: &[usize],
    mut verify: impl FnMut(usize) -> bool,
) -> SplitOutcome {
    let mut verdicts = vec![None; payloads.len()];
    let mut batches = Vec::with_capacity(workers);
    for worker in 1..=workers.max(1) {
        let items: Vec<usize> = (0..payloads.len())
            .filter(|&i| assigned_worker(i, workers) == worker)
            .collect();
        if !skipping.contains(&worker) {
            for &i in &items {
                verdicts[i] = Some(verify(i));
            }
        }
        let digests: Vec<_> = items
            .iter()
            .map(|&i| payload_digest(&payloads[i]))
            .collect();
        let signature = keys[worker - 1].mac(worker, round, &digests);
        batches.push(SignedBatch {
            worker,
            round,
            items,
            digests,
            signature,
        });
    }
    SplitOutcome { verdicts, batches }
}

/// Re-verifies every signed batch and returns the workers whose batch vouches for an
/// item that fails verification.
pub fn cross_check(
    batches: &[SignedBatch],
    keys: &[SigningKey],
    mut verify: impl FnMut(&SignedBatch, usize) -> bool,
) -> Vec<usize> {
    let mut derelict = Vec::new();
    for b in batches {
        let signed = b.signature_valid(&keys[b.worker - 1]);
        if signed && b.items.iter().any(|&i| !verify(b, i)) && !derelict.contains(&b.worker) {
            derelict.push(b.worker);
        }
    }
    derelict.sort_unstable();
    derelict
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_and_cross_check() {
        let payloads: Vec<Vec<u8>> = (0..8u8).map(|i| vec![i]).collect();
        let keys: Vec<_> = (1..=4).map(|j| SigningKey::derive(1, j)).collect();
        let bad = 5;
        let out = verification_split(&payloads, 4, 1, &keys, &[2], |i| i != bad);
        assert!(out.batches.iter().all(|b| b.items.len() == 2));
        assert_eq!(out.verdicts[bad], None);
        assert_eq!(cross_check(&out.batches, &keys, |_, i| i != bad), vec![2]);

        let single = verification_split(&payloads, 1, 1, &keys[..1], &[], |i| i != bad);
        assert_eq!(single.verdicts.iter().filter(|v| v.is_some()).count(), 8);
        assert_eq!(single.verdicts[bad], Some(false));
    }
}

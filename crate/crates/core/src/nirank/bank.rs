//! Storage and single-use bookkeeping for preprocessed triples.

use std::path::Path;

use super::prep::PrepTriple;
use super::reshare::ReshareOutput;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::paillier::PublicParams;

const MAGIC: &[u8; 4] = b"SRTB";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleBank {
    triples: Vec<PrepTriple>,
    used: Vec<bool>,
}

impl TripleBank {
    pub fn new(triples: Vec<PrepTriple>) -> Self {
        let used = vec![false; triples.len()];
        TripleBank { triples, used }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.used.iter().filter(|u| !**u).count()
    }

    /// Position of the triple consumed by `user` in `round` (both 0-based).
    pub fn slot(users: usize, user: usize, round: usize) -> usize {
        round * users + user
    }

    /// Hands out triple `slot`, refusing a second use.
    pub fn take(&mut self, slot: usize) -> Result<&PrepTriple> {
        let used = self
            .used
            .get_mut(slot)
            .ok_or_else(|| Error::Precondition(format!("triple bank exhausted at slot {slot}")))?;
        if *used {
            return Err(Error::Precondition(format!(
                "triple {slot} already consumed"
            )));
        }
        *used = true;
        Ok(&self.triples[slot])
    }

    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        w.bytes(MAGIC)
            .u8(VERSION)
            .u32(params.workers as u32)
            .u64(self.triples.len() as u64);
        for t in &self.triples {
            w.u64(t.index);
            w.ciphertext(params, &t.enc_r)?;
            w.ciphertext(params, &t.enc_sign)?;
            for s in t.shares_r.iter().chain(&t.shares_sign) {
                w.u32(s.party as u32);
                w.uint(&s.plain_share, params.base_width())?;
                w.uint(&s.randomness, params.squared_width())?;
                w.ciphertext(params, &s.enc_share)?;
            }
        }
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::Decode("not a triple bank".into()));
        }
        if r.u8()? != VERSION {
            return Err(Error::Decode("unsupported triple bank version".into()));
        }
        let workers = r.u32()? as usize;
        if workers != params.workers {
            return Err(Error::Decode(format!(
                "bank built for {workers} workers, key has {}",
                params.workers
            )));
        }
        let count = r.u64()? as usize;
        let per = 8
            + 2 * params.squared_width()
            + 2 * workers * (4 + params.base_width() + 2 * params.squared_width());
        if r.remaining()
            != count
                .checked_mul(per)
                .ok_or_else(|| Error::Decode("count overflow".into()))?
        {
            return Err(Error::Decode(
                "triple bank length does not match its header".into(),
            ));
        }
        let mut triples = Vec::with_capacity(count);
        for _ in 0..count {
            let index = r.u64()?;
            let enc_r = r.ciphertext(params)?;
            let enc_sign = r.ciphertext(params)?;
            let mut shares = Vec::with_capacity(2 * workers);
            for _ in 0..2 * workers {
                let party = r.u32()? as usize;
                let plain_share = r.uint(params.base_width())?;
                if plain_share >= params.n {
                    return Err(Error::Decode("share out of range".into()));
                }
                let randomness = r.group(params)?;
                let enc_share = r.ciphertext(params)?;
                shares.push(ReshareOutput {
                    party,
                    plain_share,
                    randomness,
                    enc_share,
                });
            }
            let shares_sign = shares.split_off(workers);
            triples.push(PrepTriple {
                index,
                enc_r,
                enc_sign,
                shares_r: shares,
                shares_sign,
            });
        }
        r.finish()?;
        Ok(TripleBank::new(triples))
    }

    pub fn save(&self, params: &PublicParams, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode(params)?)
            .map_err(|e| Error::Config(format!("writing {}: {e}", path.display())))
    }

    pub fn load(params: &PublicParams, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        Self::decode(params, &bytes)
    }
}

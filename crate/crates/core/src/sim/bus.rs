//! In-process bulletin board. Every message is framed, hashed into the run
//! transcript and counted against its sender.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Party;

/// Frame header: tag, sender role, sender id, round, payload length.
pub const HEADER_LEN: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "role", content = "id", rename_all = "snake_case")]
pub enum Actor {
    Worker(usize),
    User(usize),
}

impl From<Party> for Actor {
    fn from(p: Party) -> Self {
        match p {
            Party::User(i) => Actor::User(i),
            Party::Worker(j) => Actor::Worker(j),
        }
    }
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::User(i) => write!(f, "user.{i}"),
            Actor::Worker(j) => write!(f, "worker.{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum MsgTag {
    Register = 1,
    Guess = 2,
    Submission = 3,
    PartialDecryption = 4,
    MulShare = 5,
    ReshareMask = 6,
    PrepStep = 7,
    Powers = 8,
    BatchSignature = 9,
    Result = 10,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Traffic {
    pub bytes_out: u64,
    pub messages_out: u64,
    pub bytes_in: u64,
    pub messages_in: u64,
    /// Outbound bytes during search rounds.
    pub online_bytes_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActorTraffic {
    pub actor: Actor,
    #[serde(flatten)]
    pub traffic: Traffic,
}

#[derive(Clone)]
pub struct Bus {
    transcript: Sha256,
    frames: u64,
    traffic: BTreeMap<Actor, Traffic>,
    listeners: Vec<Actor>,
}

impl Bus {
    /// A board read by `listeners`; each posted frame counts as received by every
    /// listener other than its sender.
    pub fn new(listeners: Vec<Actor>) -> Self {
        Bus {
            transcript: Sha256::new(),
            frames: 0,
            traffic: BTreeMap::new(),
            listeners,
        }
    }

    fn header(tag: MsgTag, from: Actor, round: u32, len: usize) -> [u8; HEADER_LEN] {
        let (role, id) = match from {
            Actor::User(i) => (0u8, i),
            Actor::Worker(j) => (1u8, j),
        };
        let mut h = [0u8; HEADER_LEN];
        h[0] = tag as u8;
        h[1] = role;
        h[2..6].copy_from_slice(&(id as u32).to_be_bytes());
        h[6..10].copy_from_slice(&round.to_be_bytes());
        h[10..14].copy_from_slice(&(len as u32).to_be_bytes());
        h
    }

    /// Posts a frame read by the listeners and hands the payload back as they see it.
    pub fn post(&mut self, tag: MsgTag, from: Actor, round: u32, payload: Vec<u8>) -> Vec<u8> {
        let listeners = std::mem::take(&mut self.listeners);
        let out = self.post_to(tag, from, round, payload, &listeners);
        self.listeners = listeners;
        out
    }

    /// Posts a frame read by `receivers`.
    pub fn post_to(
        &mut self,
        tag: MsgTag,
        from: Actor,
        round: u32,
        payload: Vec<u8>,
        receivers: &[Actor],
    ) -> Vec<u8> {
        let header = Self::header(tag, from, round, payload.len());
        self.transcript.update(header);
        self.transcript.update(&payload);
        self.frames += 1;
        let size = (HEADER_LEN + payload.len()) as u64;
        let out = self.traffic.entry(from).or_default();
        out.bytes_out += size;
        out.messages_out += 1;
        if round > 0 {
            out.online_bytes_out += size;
        }
        for l in receivers {
            if *l != from {
                let t = self.traffic.entry(*l).or_default();
                t.bytes_in += size;
                t.messages_in += 1;
            }
        }
        payload
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn traffic(&self, actor: Actor) -> Traffic {
        self.traffic.get(&actor).copied().unwrap_or_default()
    }

    pub fn traffic_table(&self) -> Vec<ActorTraffic> {
        self.traffic
            .iter()
            .map(|(a, t)| ActorTraffic {
                actor: *a,
                traffic: *t,
            })
            .collect()
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.transcript.clone().finalize())
    }
}

//! Scripted misbehaviour injected into a scenario.

use std::fmt;

use serde::Serialize;

use super::config::{kv_lines, Protocol, SimConfig};
use crate::error::{Error, Party, Result};
use crate::zkp::ProofKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    /// Perturbs one proof after honest generation: a sign submission (users, in the
    /// given round), a preprocessing step (workers, in the first triple) or a
    /// partial decryption proof (workers, `pd`).
    InvalidProof {
        #[serde(serialize_with = "ser_kind")]
        kind: ProofKind,
        round: u32,
    },
    /// Claims the opposite sign in the given round.
    InconsistentSign { round: u32 },
    /// Registers `high + 1` with a range proof built for `high`.
    OutOfRangeInput,
    /// Stops responding from the given round on.
    EarlyQuit { round: u32 },
    /// Publishes a partial decryption computed with the wrong exponent.
    ForgedPartialDecryption,
    /// Signs its verification batch without checking it.
    SkipVerification,
}

fn ser_kind<S: serde::Serializer>(kind: &ProofKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

impl Action {
    /// Whether the action makes some proof or check fail.
    pub fn violates_proof(self) -> bool {
        !matches!(self, Action::EarlyQuit { .. } | Action::SkipVerification)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::InvalidProof { kind, round } => write!(f, "invalid_proof:{kind}@{round}"),
            Action::InconsistentSign { round } => write!(f, "inconsistent_sign@{round}"),
            Action::OutOfRangeInput => f.write_str("out_of_range_input"),
            Action::EarlyQuit { round } => write!(f, "early_quit:{round}"),
            Action::ForgedPartialDecryption => f.write_str("forged_partial_decryption"),
            Action::SkipVerification => f.write_str("skip_verification"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdversaryScript {
    pub target: Party,
    #[serde(flatten)]
    pub action: Action,
}

fn parse_round(s: Option<&str>) -> Result<u32> {
    match s {
        None => Ok(1),
        Some(r) => r
            .parse()
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| Error::Config(format!("bad round {r:?}"))),
    }
}

impl std::str::FromStr for Action {
    type Err = Error;

    /// `invalid_proof:KIND[@ROUND]`, `inconsistent_sign[@ROUND]`, `out_of_range_input`,
    /// `early_quit:ROUND` (or `early_quit@ROUND`), `forged_partial_decryption`,
    /// `skip_verification`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, round) = match s.split_once('@') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match head.split_once(':') {
            Some(("invalid_proof", kind)) => Ok(Action::InvalidProof {
                kind: kind.parse()?,
                round: parse_round(round)?,
            }),
            Some(("early_quit", r)) if round.is_none() => Ok(Action::EarlyQuit {
                round: parse_round(Some(r))?,
            }),
            None if head == "early_quit" && round.is_some() => Ok(Action::EarlyQuit {
                round: parse_round(round)?,
            }),
            None if head == "inconsistent_sign" => Ok(Action::InconsistentSign {
                round: parse_round(round)?,
            }),
            None if round.is_none() && head == "out_of_range_input" => Ok(Action::OutOfRangeInput),
            None if round.is_none() && head == "forged_partial_decryption" => {
                Ok(Action::ForgedPartialDecryption)
            }
            None if round.is_none() && head == "skip_verification" => Ok(Action::SkipVerification),
            _ => Err(Error::Config(format!("unknown adversary action {s:?}"))),
        }
    }
}

fn parse_party(s: &str) -> Result<Party> {
    let bad = || {
        Error::Config(format!(
            "adversary target {s:?} is not user.ID or worker.ID"
        ))
    };
    let (role, id) = s.split_once('.').ok_or_else(bad)?;
    let id: usize = id.parse().map_err(|_| bad())?;
    match role {
        "user" => Ok(Party::User(id)),
        "worker" => Ok(Party::Worker(id)),
        _ => Err(bad()),
    }
}

/// Parses lines of the form `user.3 = inconsistent_sign` or `worker.2 = invalid_proof:mtp`.
pub fn parse_scripts(text: &str) -> Result<Vec<AdversaryScript>> {
    kv_lines(text)
        .map(|line| {
            let (k, v) = line?;
            Ok(AdversaryScript {
                target: parse_party(&k)?,
                action: v.parse()?,
            })
        })
        .collect()
}

/// Rejects scripts that name unknown parties, do not apply to the protocol, or exceed
/// the corruption thresholds.
pub fn validate_scripts(cfg: &SimConfig, scripts: &[AdversaryScript]) -> Result<()> {
    let bad = |m: String| Err(Error::Config(m));
    let mut users = std::collections::BTreeSet::new();
    let mut workers = std::collections::BTreeSet::new();
    for s in scripts {
        match (s.target, s.action) {
            (Party::User(i), _) if i >= cfg.users => return bad(format!("no user {i}")),
            (Party::Worker(j), _) if j == 0 || j > cfg.workers => return bad(format!("no worker {j}")),
            (Party::User(_), Action::ForgedPartialDecryption | Action::SkipVerification) => {
                return bad(format!("{} is a worker action", s.action))
            }
            (Party::Worker(_), Action::InconsistentSign { .. } | Action::OutOfRangeInput | Action::EarlyQuit { .. }) => {
                return bad(format!("{} is a user action", s.action))
            }
            (Party::User(_), Action::InvalidProof { kind: ProofKind::Pd, .. }) => {
                return bad("users do not produce decryption proofs".into())
            }
            (Party::User(_), Action::InvalidProof { kind, .. })
                if cfg.protocol == Protocol::Nirank && kind != ProofKind::Rg =>
            {
                return bad(format!("users only prove their input range in the non-interactive protocol, not {kind}"))
            }
            (Party::User(_), Action::InconsistentSign { .. }) if cfg.protocol == Protocol::Nirank => {
                return bad("the non-interactive protocol has no sign submissions".into())
            }
            (Party::Worker(_), Action::InvalidProof { kind, .. })
                if cfg.protocol == Protocol::Irank && kind != ProofKind::Pd =>
            {
                return bad(format!("workers only prove decryptions in the interactive protocol, not {kind}"))
            }
            (Party::Worker(_), Action::SkipVerification) if !cfg.opt.verification_split => {
                return bad("skip_verification needs the split optimization".into())
            }
            _ => {}
        }
        match s.target {
            Party::User(i) => users.insert(i),
            Party::Worker(j) => workers.insert(j),
        };
    }
    if users.len() > (cfg.users - 1) / 2 {
        return bad(format!(
            "{} corrupted users exceed the honest-majority limit",
            users.len()
        ));
    }
    if workers.len() > cfg.workers - 1 {
        return bad(format!(
            "{} corrupted workers leave no honest worker",
            workers.len()
        ));
    }
    Ok(())
}

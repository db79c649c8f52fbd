//! Operation and proof counts per protocol phase.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::zkp::ProofKind;

/// Ciphertext operations in the accounting of the workload table: a shared
/// multiplication counts as one `mul`, a joint decryption as one `dec`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub enc: u64,
    pub dec: u64,
    pub mul: u64,
    pub add: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PhaseCost {
    pub label: String,
    pub ops: OpCounts,
    /// Operations with public constants (`E(η·m)`, offsets, recomputed `E(q)`).
    pub public_ops: u64,
    /// Per-worker exponentiations inside shared multiplications and decryptions.
    pub share_ops: u64,
    pub proofs_generated: BTreeMap<String, u64>,
    pub proofs_verified: BTreeMap<String, u64>,
}

impl PhaseCost {
    pub fn generated(&mut self, kind: ProofKind, count: u64) {
        *self
            .proofs_generated
            .entry(kind.name().to_string())
            .or_default() += count;
    }

    pub fn verified(&mut self, kind: ProofKind, count: u64) {
        *self
            .proofs_verified
            .entry(kind.name().to_string())
            .or_default() += count;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    pub phases: Vec<PhaseCost>,
}

impl CostLedger {
    pub fn begin(&mut self, label: impl Into<String>) {
        self.phases.push(PhaseCost {
            label: label.into(),
            ..PhaseCost::default()
        });
    }

    pub fn current(&mut self) -> &mut PhaseCost {
        if self.phases.is_empty() {
            self.begin("setup");
        }
        self.phases.last_mut().expect("non-empty")
    }

    /// Search-round phases in order.
    pub fn rounds(&self) -> impl Iterator<Item = &PhaseCost> {
        self.phases.iter().filter(|p| p.label.starts_with("round "))
    }

    pub fn phase(&self, label: &str) -> Option<&PhaseCost> {
        self.phases.iter().find(|p| p.label == label)
    }
}

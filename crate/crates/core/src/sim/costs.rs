//! Measured costs next to the closed-form expectations of the workload and
//! communication tables.
//!
//! Table sizes are quoted for a 2048-bit modulus; at other sizes the expectation
//! scales with the width of `Z_n`.

use serde::Serialize;

use super::bus::{Actor, HEADER_LEN};
use super::driver::RunReport;
use super::ledger::OpCounts;
use crate::paillier::PublicParams;
use crate::zkp::ProofKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub item: String,
    pub measured: f64,
    pub expected: f64,
    pub unit: &'static str,
    /// Allowed absolute deviation.
    pub tolerance: f64,
    pub ok: bool,
}

impl CostRow {
    fn new(
        item: impl Into<String>,
        measured: f64,
        expected: f64,
        unit: &'static str,
        tolerance: f64,
    ) -> Self {
        let ok = (measured - expected).abs() <= tolerance + 1e-9;
        CostRow {
            item: item.into(),
            measured,
            expected,
            unit,
            tolerance,
            ok,
        }
    }
}

/// Proof sizes in KB at 2048 bits.
pub fn table_proof_kb(kind: ProofKind) -> f64 {
    match kind {
        ProofKind::Mtp => 2.25,
        ProofKind::Mbs => 2.75,
        ProofKind::Rg => 5.75,
        ProofKind::Nz => 2.75,
        ProofKind::Pd => 1.25,
    }
}

/// Expected per-round workload `(enc, dec, mul, add)` for `n` inputs.
pub fn table_ops(protocol: &str, n: u64) -> OpCounts {
    if protocol == "nirank" {
        OpCounts {
            enc: n,
            dec: n + 1,
            mul: 2 * n,
            add: n - 1,
        }
    } else {
        OpCounts {
            enc: 0,
            dec: 1,
            mul: 0,
            add: n - 1,
        }
    }
}

fn kb(bytes: f64) -> f64 {
    bytes / 1024.0
}

pub fn proof_size_rows(params: &PublicParams) -> Vec<CostRow> {
    let scale = params.base_width() as f64 / 256.0;
    ProofKind::ALL
        .iter()
        .map(|&k| {
            CostRow::new(
                format!("{k} proof size"),
                kb(k.body_len(params) as f64),
                table_proof_kb(k) * scale,
                "KB",
                0.0,
            )
        })
        .collect()
}

/// Compares a finished run with the workload and communication formulas.
pub fn account_costs(report: &RunReport) -> Vec<CostRow> {
    let mut rows = Vec::new();
    let b = report.modulus_bits.div_ceil(8) as f64;
    let unit = b / 1024.0;
    let rounds = report.rounds_used as f64;
    let users = report.users;
    let header = HEADER_LEN as f64 / 1024.0;

    let per_user: f64 = (0..users)
        .map(|i| report.traffic_of(Actor::User(i)).bytes_out as f64)
        .sum::<f64>()
        / users as f64;
    let messages: f64 = (0..users)
        .map(|i| report.traffic_of(Actor::User(i)).messages_out as f64)
        .sum::<f64>()
        / users as f64;
    let entries_per_user = report.entries as f64 / users as f64;
    let (expected_user, msgs_expected) = if report.protocol == "nirank" {
        (25.0 * unit * entries_per_user, entries_per_user)
    } else {
        (
            (25.0 + 60.0 * rounds) * unit * entries_per_user,
            entries_per_user * (1.0 + rounds),
        )
    };
    rows.push(CostRow::new(
        "user outbound",
        kb(per_user),
        expected_user,
        "KB",
        header * msgs_expected.max(messages),
    ));

    if report.protocol == "nirank" && rounds > 0.0 {
        let per_worker: f64 = (1..=report.workers)
            .map(|j| report.traffic_of(Actor::Worker(j)).online_bytes_out as f64)
            .sum::<f64>()
            / report.workers as f64;
        let expected = 23.0 * unit * report.entries as f64 * rounds;
        let proof = table_proof_kb(ProofKind::Mtp) * b / 256.0;
        rows.push(CostRow::new(
            "worker online outbound",
            kb(per_worker),
            expected,
            "KB",
            proof,
        ));
    }

    let n = report.entries as u64;
    for (i, phase) in report.ledger.rounds().enumerate() {
        let want = table_ops(&report.protocol, n);
        let got = phase.ops;
        for (name, g, w) in [
            ("enc", got.enc, want.enc),
            ("dec", got.dec, want.dec),
            ("mul", got.mul, want.mul),
            ("add", got.add, want.add),
        ] {
            rows.push(CostRow::new(
                format!("round {} {name}", i + 1),
                g as f64,
                w as f64,
                "ops",
                0.0,
            ));
        }
    }
    rows
}

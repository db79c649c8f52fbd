//! Deterministic in-process simulation of both protocols with adversary injection,
//! byte and operation accounting, and the accuracy and cost experiments.

pub mod accuracy;
pub mod adversary;
pub mod bus;
pub mod config;
pub mod costs;
pub mod driver;
pub mod ledger;
pub mod split;

pub use adversary::{parse_scripts, Action, AdversaryScript};
pub use bus::{Actor, Traffic, HEADER_LEN};
pub use config::{parse_prime_pair, DataSource, Optimizations, Protocol, SimConfig, TargetSpec};
pub use driver::{
    prepare_bank, run_scenario, run_scenario_timed, scenario_keys, triple_budget, RunReport,
    Timings,
};
pub use ledger::{CostLedger, OpCounts, PhaseCost};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Party;

    fn base(protocol: Protocol) -> SimConfig {
        SimConfig {
            protocol,
            data: DataSource::Explicit(vec![1, 2, 3, 4, 5]),
            seed: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn small_runs() {
        let r = run_scenario(&base(Protocol::Irank), &[]).unwrap();
        assert_eq!(
            (r.result, r.rounds_used, r.abort.clone()),
            (Some(3), 2, None)
        );
        assert_eq!(run_scenario(&base(Protocol::Irank), &[]).unwrap(), r);

        let flip = parse_scripts("user.1 = inconsistent_sign").unwrap();
        let a = run_scenario(&base(Protocol::Irank), &flip).unwrap();
        assert_eq!(a.abort.unwrap().culprit, Party::User(1));

        let quit = parse_scripts("user.2 = early_quit:2").unwrap();
        let n = run_scenario(&base(Protocol::Nirank), &quit).unwrap();
        assert_eq!((n.result, n.abort.clone()), (Some(3), None));
        assert_eq!(n.z_sequence, r.z_sequence);
        assert!(n.degraded.is_empty());
    }
}

use secrank::sim::accuracy::{run_accuracy_experiment, AccuracySettings};
use secrank::sim::costs::account_costs;
use secrank::sim::{
    parse_scripts, run_scenario, Actor, DataSource, Protocol, SimConfig, TargetSpec,
};
use secrank::Party;

fn five() -> SimConfig {
    SimConfig {
        data: DataSource::Explicit(vec![1, 2, 3, 4, 5]),
        ..SimConfig::default()
    }
}

#[test]
fn worked_example_and_determinism() {
    let a = run_scenario(&five(), &[]).unwrap();
    assert_eq!((a.result, a.rounds_used, a.true_value), (Some(3), 2, 3));
    assert_eq!(a.z_sequence, vec![-3, 1]);
    let b = run_scenario(&five(), &[]).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let other = run_scenario(&SimConfig { seed: 1, ..five() }, &[]).unwrap();
    assert_eq!(other.result, Some(3));
    assert_ne!(other.transcript_digest, a.transcript_digest);
}

#[test]
fn byte_totals_match_frames() {
    let r = run_scenario(
        &SimConfig {
            protocol: Protocol::Nirank,
            ..five()
        },
        &[],
    )
    .unwrap();
    let out: u64 = r.traffic.iter().map(|t| t.traffic.messages_out).sum();
    assert_eq!(out, r.frames);
    let user = r.traffic_of(Actor::User(0));
    assert_eq!(user.messages_out, 1);
    assert_eq!(user.online_bytes_out, 0);
}

#[test]
fn scenario_two_matches_flattened_run() {
    let datasets = vec![vec![3, 9, 1], vec![7], vec![12, 4], vec![0, 15, 6, 6]];
    let flat: Vec<i64> = datasets.concat();
    for target in [
        TargetSpec::Median,
        TargetSpec::Rank(3),
        TargetSpec::Percentile(75.0),
    ] {
        let two = SimConfig {
            users: datasets.len(),
            high: 16,
            target,
            data: DataSource::Datasets(datasets.clone()),
            ..SimConfig::default()
        };
        let one = SimConfig {
            users: flat.len(),
            data: DataSource::Explicit(flat.clone()),
            ..two.clone()
        };
        let a = run_scenario(&two, &[]).unwrap();
        let b = run_scenario(&one, &[]).unwrap();
        assert_eq!(a.entries, b.entries);
        assert_eq!(
            (a.result, &a.z_sequence, a.true_value),
            (b.result, &b.z_sequence, b.true_value)
        );
        // User 0 speaks for the first three flattened entries.
        let owner = a.traffic_of(Actor::User(0));
        let parts: Vec<_> = (0..3).map(|i| b.traffic_of(Actor::User(i))).collect();
        assert_eq!(
            owner.messages_out,
            parts.iter().map(|t| t.messages_out).sum::<u64>()
        );
        assert_eq!(
            owner.bytes_out,
            parts.iter().map(|t| t.bytes_out).sum::<u64>()
        );
    }
}

#[test]
fn identifiable_aborts() {
    let cases = [
        ("user.3 = inconsistent_sign@1", Party::User(3)),
        ("user.1 = invalid_proof:rg@2", Party::User(1)),
        ("user.4 = out_of_range_input", Party::User(4)),
        ("worker.2 = forged_partial_decryption", Party::Worker(2)),
        ("worker.1 = invalid_proof:pd", Party::Worker(1)),
    ];
    for (script, culprit) in cases {
        let scripts = parse_scripts(script).unwrap();
        let r = run_scenario(&five(), &scripts).unwrap();
        assert_eq!(
            r.abort.as_ref().map(|a| a.culprit),
            Some(culprit),
            "{script}"
        );
        assert_eq!(r.result, None);
    }
}

#[test]
fn split_verification_names_a_derelict_worker() {
    let cfg = SimConfig {
        workers: 2,
        ..five()
    };
    let mut split = cfg.clone();
    split.opt.verification_split = true;
    let honest = run_scenario(&split, &[]).unwrap();
    assert_eq!(honest.result, Some(3));
    assert_eq!(
        honest.z_sequence,
        run_scenario(&cfg, &[]).unwrap().z_sequence
    );

    // User 1's bundle is assigned to worker 2, which signs without checking.
    let scripts =
        parse_scripts("user.1 = invalid_proof:mtp@1\nworker.2 = skip_verification").unwrap();
    let r = run_scenario(&split, &scripts).unwrap();
    assert_eq!(r.abort.map(|a| a.culprit), Some(Party::Worker(2)));

    // Without dereliction the assigned worker catches the user.
    let scripts = parse_scripts("user.1 = invalid_proof:mtp@1").unwrap();
    assert_eq!(
        run_scenario(&split, &scripts)
            .unwrap()
            .abort
            .map(|a| a.culprit),
        Some(Party::User(1))
    );
}

#[test]
fn early_quit_degrades_interactive_only() {
    let scripts = parse_scripts("user.0 = early_quit@2").unwrap();
    let ni = run_scenario(
        &SimConfig {
            protocol: Protocol::Nirank,
            ..five()
        },
        &scripts,
    )
    .unwrap();
    assert_eq!(ni.result, Some(3));
    assert!(ni.degraded.is_empty() && ni.abort.is_none());
    let i = run_scenario(&five(), &scripts).unwrap();
    assert!(i.abort.is_none());
    assert!(!i.degraded.is_empty());
}

#[test]
fn optimizations_keep_results() {
    let cfg = SimConfig {
        users: 9,
        high: 64,
        seed: 4,
        ..SimConfig::default()
    };
    let plain = run_scenario(&cfg, &[]).unwrap();
    let mut spec = cfg.clone();
    spec.opt.speculative_depth = 1;
    let s = run_scenario(&spec, &[]).unwrap();
    assert_eq!((s.result, &s.z_sequence), (plain.result, &plain.z_sequence));
    assert!(s.rounds_used < plain.rounds_used || plain.rounds_used == 1);
    let mut mom = cfg.clone();
    mom.opt.moments_init = true;
    let m = run_scenario(&mom, &[]).unwrap();
    let summary = m.moments.unwrap();
    assert!((summary.mean - plain.true_value as f64).abs() <= summary.sigma + 1e-9);
    assert!((m.result.unwrap() - m.true_value).abs() <= 1);
}

#[test]
fn irank_costs_follow_the_formulas() {
    let r = run_scenario(&five(), &[]).unwrap();
    for row in account_costs(&r) {
        assert!(row.ok, "{row:?}");
    }
}

#[test]
fn accuracy_at_a_thousand_users() {
    let s = AccuracySettings {
        users: 1001,
        sigmas: vec![20.0],
        percentiles: vec![50.0],
        ..Default::default()
    };
    let p = &run_accuracy_experiment(&s).unwrap()[0];
    assert!(p.mae <= 1.0, "{p:?}");
    let flat = AccuracySettings {
        users: 1001,
        sigmas: vec![0.0],
        percentiles: vec![50.0],
        trials: 5,
        ..Default::default()
    };
    assert_eq!(run_accuracy_experiment(&flat).unwrap()[0].max_error, 0);
}

#[test]
fn config_files_and_validation() {
    let cfg = SimConfig::default()
        .apply_kv("dataset = 1,2,3\ndataset = 4\nrange = 0:16\nprotocol = nirank\nopt = split")
        .unwrap();
    assert_eq!((cfg.users, cfg.entries()), (2, 4));
    cfg.validate().unwrap();
    let bad = [
        SimConfig {
            workers: 1,
            ..SimConfig::default()
        },
        SimConfig {
            low: 5,
            high: 5,
            ..SimConfig::default()
        },
        SimConfig {
            target: TargetSpec::Percentile(100.0),
            ..SimConfig::default()
        },
        SimConfig {
            data: DataSource::Explicit(vec![99; 5]),
            ..SimConfig::default()
        },
    ];
    for b in bad {
        assert!(run_scenario(&b, &[]).is_err());
    }
    let too_many = parse_scripts(
        "user.0 = inconsistent_sign\nuser.1 = inconsistent_sign\nuser.2 = inconsistent_sign",
    )
    .unwrap();
    assert!(run_scenario(&five(), &too_many).is_err());
}

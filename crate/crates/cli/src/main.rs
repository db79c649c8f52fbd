use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use secrank::sim::accuracy::{run_accuracy_experiment, run_accuracy_full_crypto, AccuracySettings};
use secrank::sim::config::parse_range;
use secrank::sim::costs::{account_costs, proof_size_rows, CostRow};
use secrank::sim::{
    parse_prime_pair, parse_scripts, prepare_bank, run_scenario_timed, scenario_keys,
    triple_budget, Protocol, RunReport, SimConfig, TargetSpec, Timings,
};

#[derive(Parser)]
#[command(
    name = "secrank",
    version,
    about = "Secure rank statistics over threshold Paillier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its report.
    Run(Common),
    /// Mean absolute error of percentile searches on Gaussian data.
    Accuracy(AccuracyArgs),
    /// Run a scenario and compare measured costs with the closed-form tables.
    Costs(Common),
    /// Generate preprocessed triples and write them to a bank file.
    Prep(PrepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Base `key = value` scenario file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Input range as LO:HI.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long)]
    bits: Option<u64>,
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long, conflicts_with = "k")]
    percentile: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<u64>,
    /// Comma-separated: early_stop, speculate:D, moments, split.
    #[arg(long)]
    opt: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Scenario file with one `dataset = x,y,...` line per user.
    #[arg(long)]
    scenario2: Option<PathBuf>,
    /// Adversary file with `user.I = action` / `worker.J = action` lines.
    #[arg(long)]
    adversary: Option<PathBuf>,
    /// Two hex safe primes, one per line, used instead of key generation.
    #[arg(long)]
    primes: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
}

impl Common {
    fn config(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::default();
        for path in [&self.config, &self.scenario2].into_iter().flatten() {
            let text = read(path)?;
            cfg = cfg
                .apply_kv(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        if let Some(v) = self.users {
            cfg.users = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(r) = &self.range {
            (cfg.low, cfg.high) = parse_range(r)?;
        }
        if let Some(v) = self.bits {
            cfg.bits = v;
        }
        if let Some(v) = self.protocol {
            cfg.protocol = v;
        }
        if let Some(p) = self.percentile {
            cfg.target = TargetSpec::Percentile(p);
        }
        if let Some(k) = self.k {
            cfg.target = TargetSpec::Rank(k);
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(o) = &self.opt {
            cfg.opt.parse_into(o)?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(path) = &self.primes {
            cfg.primes = Some(parse_prime_pair(&read(path)?)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn run(&self) -> Result<(SimConfig, RunReport)> {
        let cfg = self.config()?;
        let scripts = match &self.adversary {
            Some(path) => parse_scripts(&read(path)?)?,
            None => Vec::new(),
        };
        let (report, timings) = run_scenario_timed(&cfg, &scripts)?;
        print_timings(&timings);
        Ok((cfg, report))
    }
}

#[derive(Args)]
struct AccuracyArgs {
    #[arg(long, default_value_t = 10_001)]
    users: usize,
    #[arg(long, default_value_t = 100.0)]
    mu: f64,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    sigmas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "25,50,75")]
    percentiles: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value = "0:255", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run every search through the cryptographic protocol instead of the plaintext mirror.
    #[arg(long)]
    full_crypto: bool,
    #[arg(long, default_value = "irank")]
    protocol: Protocol,
    #[arg(long, default_value_t = 2)]
    workers: usize,
    #[arg(long, default_value_t = 512)]
    bits: u64,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
}

#[derive(Args)]
struct PrepArgs {
    #[command(flatten)]
    common: Common,
    /// Number of triples; defaults to what one run of the scenario consumes.
    #[arg(long)]
    count: Option<usize>,
    /// Bank file to write.
    #[arg(long, default_value = "triples.bank")]
    bank: PathBuf,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn print_timings(t: &Timings) {
    for (label, d) in &t.phases {
        eprintln!("{label:>16}  {:>10.3} ms", d.as_secs_f64() * 1e3);
    }
    eprintln!("{:>16}  {:>10.3} ms", "total", t.total.as_secs_f64() * 1e3);
}

fn emit_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn emit_csv<T: serde::Serialize>(rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn report_csv(r: &RunReport) -> Result<()> {
    let join = |xs: &[i64]| xs.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record([
        "protocol",
        "users",
        "entries",
        "workers",
        "low",
        "high",
        "bits",
        "target",
        "rank",
        "result",
        "true_value",
        "abs_error",
        "rounds",
        "z_sequence",
        "abort",
        "frames",
        "transcript",
    ])?;
    w.write_record([
        r.protocol.clone(),
        r.users.to_string(),
        r.entries.to_string(),
        r.workers.to_string(),
        r.range.0.to_string(),
        r.range.1.to_string(),
        r.modulus_bits.to_string(),
        r.target.clone(),
        r.rank.to_string(),
        opt(&r.result),
        r.true_value.to_string(),
        opt(&r.abs_error),
        r.rounds_used.to_string(),
        join(&r.z_sequence),
        opt(&r.abort),
        r.frames.to_string(),
        r.transcript_digest.clone(),
    ])?;
    w.flush()?;
    Ok(())
}

fn costs(common: &Common) -> Result<()> {
    let (cfg, report) = common.run()?;
    if let Some(a) = &report.abort {
        bail!("run aborted ({a}); costs are only tabulated for completed runs");
    }
    let (params, _) = scenario_keys(&cfg)?;
    let mut rows: Vec<CostRow> = proof_size_rows(&params);
    rows.extend(account_costs(&report));
    match common.out {
        Format::Json => emit_json(&rows),
        Format::Csv => emit_csv(&rows),
    }
}

fn accuracy(a: &AccuracyArgs) -> Result<()> {
    let (low, high) = parse_range(&a.range)?;
    let settings = AccuracySettings {
        users: a.users,
        mu: a.mu,
        sigmas: a.sigmas.clone(),
        percentiles: a.percentiles.clone(),
        trials: a.trials,
        low,
        high,
        seed: a.seed,
    };
    let start = std::time::Instant::now();
    let points = if a.full_crypto {
        let base = SimConfig {
            protocol: a.protocol,
            workers: a.workers,
            bits: a.bits,
            ..SimConfig::default()
        };
        run_accuracy_full_crypto(&settings, &base)?
    } else {
        run_accuracy_experiment(&settings)?
    };
    eprintln!("accuracy sweep took {:.3} s", start.elapsed().as_secs_f64());
    match a.out {
        Format::Json => emit_json(&points),
        Format::Csv => emit_csv(&points),
    }
}

fn prep(p: &PrepArgs) -> Result<()> {
    let cfg = p.common.config()?;
    let count = p.count.unwrap_or_else(|| triple_budget(&cfg));
    let start = std::time::Instant::now();
    let (params, bank) = prepare_bank(&cfg, count)?;
    eprintln!(
        "prepared {count} triples in {:.3} s",
        start.elapsed().as_secs_f64()
    );
    bank.save(&params, &p.bank)?;
    let summary = serde_json::json!({
        "bank": p.bank.display().to_string(),
        "triples": bank.len(),
        "workers": cfg.workers,
        "modulus_bits": params.bits,
    });
    match p.common.out {
        Format::Json => emit_json(&summary),
        Format::Csv => {
            println!("bank,triples,workers,modulus_bits");
            println!(
                "{},{},{},{}",
                p.bank.display(),
                bank.len(),
                cfg.workers,
                params.bits
            );
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(c) => {
            let (_, report) = c.run()?;
            for note in &report.degraded {
                eprintln!("degraded: {note}");
            }
            match c.out {
                Format::Json => emit_json(&report),
                Format::Csv => report_csv(&report),
            }
        }
        Command::Accuracy(a) => accuracy(a),
        Command::Costs(c) => costs(c),
        Command::Prep(p) => prep(p),
    }
}

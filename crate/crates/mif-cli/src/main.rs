//! Command-line harness: configure an instance, run algorithm-vs-adversary
//! simulations, exact minimax analyses, parameter derivations, AVOID
//! protocol sweeps, FindCommonOutputs traces, and bound-curve CSV export.
//!
//! Exit codes: 0 ok, 1 invariant violation, 2 configuration error, 3 search
//! budget exceeded.

mod config;

use std::process::ExitCode;

use mif::adversaries::{
    exhaustive_minimax_mistake, minimax_worst_error, AdversaryError, EchoAdversary, MixedAdversary,
    RandomAdversary, SearchBudget,
};
use mif::algorithms::{rt_params, DetBitmap, OracleList, RtMif, SeedBlock};
use mif::analysis::{default_ell_grid, emit_bounds_csv};
use mif::engine::{
    estimate_error_parallel, Adversary, Automaton, ChainAutomaton, EngineError, TableChain,
};
use mif::reductions::{
    avoid_from_mif, avoid_lb, fco, noisy, AvoidInstance, CanonicalMinMissing, FcoParams,
    ThresholdMatrix,
};
use mif::Instance;

use config::Config;

const USAGE: &str = "\
mif — missing-item-finding simulation and analysis harness

USAGE:
  mif <simulate|minimax|bounds|params|avoid|fco> [--config FILE] [--key value ...]

Common flags:
  --config FILE     key = value file; command-line flags win
  --seed U64        master seed (required for randomized runs)
  --out PATH        write output there instead of stdout
  --format csv      output format (csv is the only format)
  --threads N       parallel trials for `simulate` (default 1)

simulate: --n --ell --delta --algorithm det-bitmap|oracle-list|seed-block|rt|const
          --adversary echo|random|mixed [--p-echo F] --trials N
          [--t --k --s : seed-block sizing] [--value V : const output]
minimax:  --n --ell --automaton det-bitmap|const|rand2 [--value V]
          [--budget NODES] [--check-enum true]
bounds:   --n --delta [--ell-grid 2,4,8,...]
params:   --n --ell --delta
avoid:    --m --a --b --algorithm det-bitmap|oracle-list [--seed]
fco:      --n --t1 [--t2] [--eps F] --seed
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        print!("{USAGE}");
        return ExitCode::from(if args.is_empty() { 2 } else { 0 });
    }
    let command = args[0].clone();
    let cfg = match Config::parse(&args[1..]) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match command.as_str() {
        "simulate" => cmd_simulate(&cfg),
        "minimax" => cmd_minimax(&cfg),
        "bounds" => cmd_bounds(&cfg),
        "params" => cmd_params(&cfg),
        "avoid" => cmd_avoid(&cfg),
        "fco" => cmd_fco(&cfg),
        other => Err(CliError::Config(format!("unknown subcommand `{other}`"))),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Invariant(String),
    Budget(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::Budget(m) => write!(f, "budget exceeded: {m}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) | CliError::Io(_) => 1,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::BudgetExceeded { .. } | AdversaryError::StateCapExceeded { .. } => {
                CliError::Budget(e.to_string())
            }
            other => CliError::Invariant(other.to_string()),
        }
    }
}

fn emit(cfg: &Config, content: &str) -> Result<(), CliError> {
    match cfg.get("out") {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn instance(cfg: &Config) -> Result<Instance, CliError> {
    let n = cfg.require_u64("n")?;
    let ell = cfg.require_u64("ell")?;
    let delta = cfg.get_f64("delta", 0.0)?;
    Instance::new(n, ell, delta).map_err(|e| CliError::Config(e.to_string()))
}

fn make_automaton(id: &str, inst: Instance, cfg: &Config) -> Result<Box<dyn Automaton>, CliError> {
    match id {
        "det-bitmap" => Ok(Box::new(DetBitmap::new(inst))),
        "oracle-list" => Ok(Box::new(OracleList::new(inst))),
        "const" => {
            let value = cfg.get_u64("value", 1)?;
            if value < 1 || value > inst.n {
                return Err(CliError::Config(format!(
                    "--value {value} outside [1, {}]",
                    inst.n
                )));
            }
            let chain = std::sync::Arc::new(TableChain::const_output(inst.n, value));
            Ok(Box::new(ChainAutomaton::new(chain, inst.ell)))
        }
        "seed-block" => {
            let t = cfg.get_u64("t", inst.ell.div_ceil(4).max(1))?;
            let builder = match (cfg.get("k"), cfg.get("s")) {
                (None, None) => SeedBlock::with_defaults(inst, t),
                _ => {
                    let s = cfg.get_u64("s", (4 * inst.ell).next_power_of_two().min(inst.n))?;
                    let k = cfg.get_u64("k", (2 * t).min(s))?;
                    SeedBlock::new(inst, t, k, s)
                }
            };
            Ok(Box::new(
                builder.map_err(|e| CliError::Config(e.to_string()))?,
            ))
        }
        "rt" => {
            let params = rt_params(inst).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Box::new(RtMif::new(params)))
        }
        other => Err(CliError::Config(format!("unknown algorithm `{other}`"))),
    }
}

fn make_adversary(id: &str, cfg: &Config) -> Result<Box<dyn Adversary>, CliError> {
    match id {
        "echo" => Ok(Box::new(EchoAdversary::new())),
        "random" => Ok(Box::new(RandomAdversary::new())),
        "mixed" => Ok(Box::new(MixedAdversary::new(cfg.get_f64("p-echo", 0.5)?))),
        other => Err(CliError::Config(format!("unknown adversary `{other}`"))),
    }
}

fn cmd_simulate(cfg: &Config) -> Result<(), CliError> {
    cfg.check_format()?;
    let inst = instance(cfg)?;
    let algorithm = cfg.require("algorithm")?;
    let adversary = cfg.require("adversary")?;
    let trials = cfg.require_u64("trials")?;
    let seed = cfg.require_u64("seed")?;
    let threads = cfg.get_u64("threads", 1)? as usize;

    // Validate both constructions before spawning workers.
    make_automaton(&algorithm, inst, cfg)?;
    make_adversary(&adversary, cfg)?;
    let est = estimate_error_parallel(
        || make_automaton(&algorithm, inst, cfg).expect("validated above"),
        || make_adversary(&adversary, cfg).expect("validated above"),
        inst,
        trials,
        seed,
        threads,
    )?;

    let mut out = String::from("trial,verdict,step,max_bits\n");
    for r in &est.records {
        use mif::Verdict::*;
        let (verdict, step) = match r.verdict {
            Ok => ("ok", String::new()),
            Mistake(s) => ("mistake", s.to_string()),
            Abort(s) => ("abort", s.to_string()),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.trial, verdict, step, r.max_observed_bits
        ));
    }
    out.push_str(&format!(
        "# summary: trials={} mistakes={} aborts={} mistake_rate={:.6} abort_rate={:.6} combined_rate={:.6} combined_halfwidth={:.6}\n",
        est.trials,
        est.mistakes,
        est.aborts,
        est.mistake_rate,
        est.abort_rate,
        est.combined_rate(),
        est.combined_halfwidth,
    ));
    emit(cfg, &out)?;
    eprintln!(
        "{algorithm} vs {adversary} on MIF({}, {}), {} trials: mistake_rate={:.4} abort_rate={:.4}",
        inst.n, inst.ell, est.trials, est.mistake_rate, est.abort_rate
    );
    Ok(())
}

fn cmd_minimax(cfg: &Config) -> Result<(), CliError> {
    cfg.check_format()?;
    let n = cfg.require_u64("n")?;
    let ell = cfg.require_u64("ell")?;
    let inst = Instance::new(n, ell, 0.5).map_err(|e| CliError::Config(e.to_string()))?;
    let id = cfg.require("automaton")?;
    let chain = match id.as_str() {
        "det-bitmap" => TableChain::det_bitmap(n, ell),
        "const" => TableChain::const_output(n, cfg.get_u64("value", 1)?),
        "rand2" => {
            let v1 = cfg.get_u64("value", 1)?;
            let v2 = (v1 % n) + 1;
            TableChain::uniform_jump(n, &[v1, v2])
        }
        other => return Err(CliError::Config(format!("unknown automaton `{other}`"))),
    };
    let budget = SearchBudget {
        max_nodes: cfg.get_u64("budget", 20_000_000)?,
    };
    let report = minimax_worst_error(&chain, inst, budget)?;
    let mut out = String::from("mistake_prob,abort_prob,depth\n");
    out.push_str(&format!(
        "{:.12},{:.12},{}\n",
        report.mistake_prob, report.abort_prob, report.depth
    ));
    if cfg.get_bool("check-enum", false)? {
        let brute = exhaustive_minimax_mistake(&chain, inst, cfg.get_u64("max-trees", 5_000_000)?)?;
        out.push_str(&format!("# enumeration oracle: {brute:.12}\n"));
        if (brute - report.mistake_prob).abs() > 1e-12 {
            return Err(CliError::Invariant(format!(
                "minimax {} disagrees with enumeration {}",
                report.mistake_prob, brute
            )));
        }
    }
    emit(cfg, &out)?;
    Ok(())
}

fn cmd_bounds(cfg: &Config) -> Result<(), CliError> {
    cfg.check_format()?;
    let n = cfg.require_u64("n")?;
    let delta = cfg.get_f64("delta", 1.0 / (n as f64 * n as f64))?;
    let grid = match cfg.get("ell-grid") {
        Some(spec) => spec
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("bad ell-grid: {e}")))?,
        None => default_ell_grid(n),
    };
    let csv = emit_bounds_csv(n, delta, &grid).map_err(|e| CliError::Config(e.to_string()))?;
    emit(cfg, &csv)?;
    Ok(())
}

fn cmd_params(cfg: &Config) -> Result<(), CliError> {
    cfg.check_format()?;
    let inst = instance(cfg)?;
    let params = rt_params(inst).map_err(|e| CliError::Config(e.to_string()))?;
    params
        .validate()
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    emit(cfg, &params.to_text())?;
    Ok(())
}

fn cmd_avoid(cfg: &Config) -> Result<(), CliError> {
    cfg.check_format()?;
    let m = cfg.require_u64("m")?;
    let a = cfg.require_u64("a")?;
    let b = cfg.require_u64("b")?;
    let seed = cfg.get_u64("seed", 0)?;
    let avoid = AvoidInstance::new(m, a, b, 0.0).map_err(|e| CliError::Config(e.to_string()))?;
    let inst = Instance::new(m, a + b - 1, 0.0).map_err(|e| CliError::Config(e.to_string()))?;
    let algorithm = cfg.get("algorithm").unwrap_or_else(|| "det-bitmap".into());

    // Exhaustive sweep over Alice sets.
    let mut sets: Vec<Vec<u64>> = Vec::new();
    enumerate_subsets(m, a, &mut sets);
    let mut out = String::from("alice_set,message_bits,bob_set,disjoint,aborted\n");
    let mut failures = 0u64;
    let mut message_bits = 0u64;
    for (i, alice) in sets.iter().enumerate() {
        let mut automaton = make_automaton(&algorithm, inst, cfg)?;
        let run = avoid_from_mif(
            automaton.as_mut(),
            &avoid,
            alice,
            seed.wrapping_add(i as u64),
        )
        .map_err(|e| CliError::Invariant(e.to_string()))?;
        if !run.disjoint {
            failures += 1;
        }
        message_bits = run.message_bits;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            join(alice),
            run.message_bits,
            join(&run.bob_set),
            run.disjoint,
            run.aborted
        ));
    }
    let failure_rate = failures as f64 / sets.len() as f64;
    let lb = if failure_rate < 1.0 {
        avoid_lb(&AvoidInstance {
            delta: failure_rate,
            ..avoid
        })
        .map_err(|e| CliError::Config(e.to_string()))?
    } else {
        f64::NEG_INFINITY
    };
    out.push_str(&format!(
        "# summary: sets={} failures={failures} failure_rate={failure_rate:.6} message_bits={message_bits} avoid_lb={lb:.6}\n",
        sets.len()
    ));
    emit(cfg, &out)?;
    if (message_bits as f64) < lb {
        return Err(CliError::Invariant(format!(
            "message of {message_bits} bits beats the avoid bound {lb:.6}"
        )));
    }
    Ok(())
}

fn cmd_fco(cfg: &Config) -> Result<(), CliError> {
    cfg.check_format()?;
    let n = cfg.require_u64("n")?;
    let t1 = cfg.require_u64("t1")?;
    let seed = cfg.require_u64("seed")?;
    let eps = cfg.get_f64("eps", 0.0)?;
    let t = match cfg.get_u64("t2", 0)? {
        0 => vec![t1],
        t2 => vec![t1, t2],
    };
    let k = t.len();
    let s: Vec<u64> = (1..=n.min(4 * (t1 + 1))).collect();
    let prm = FcoParams::micro(n, t, s).map_err(|e| CliError::Config(e.to_string()))?;
    let ell: u64 = prm.t.iter().sum();
    let thresholds = ThresholdMatrix::new(seed);
    let run = |b: &mut dyn mif::reductions::OutputFn| fco(b, &thresholds, &[], k, &prm);
    let result = if eps > 0.0 {
        let mut b = noisy(CanonicalMinMissing::new(n, ell as usize), eps, seed);
        run(&mut b)
    } else {
        let mut b = CanonicalMinMissing::new(n, ell as usize);
        run(&mut b)
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    let mut out = String::from("k,h,q_size,p_size,exit\n");
    for row in &result.trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.k, row.h, row.q_size, row.p_size, row.exit
        ));
    }
    out.push_str(&format!(
        "# result: set=[{}] failed={} any_failure={}\n",
        join(&result.set),
        result.failed,
        result.any_failure
    ));
    emit(cfg, &out)?;
    // A failure exit is a reported outcome (the flag in the result row),
    // not a harness invariant violation.
    Ok(())
}

fn join(items: &[u64]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn enumerate_subsets(m: u64, a: u64, out: &mut Vec<Vec<u64>>) {
    fn descend(m: u64, a: u64, from: u64, buf: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if buf.len() as u64 == a {
            out.push(buf.clone());
            return;
        }
        for next in from..=(m - (a - buf.len() as u64) + 1) {
            buf.push(next);
            descend(m, a, next + 1, buf, out);
            buf.pop();
        }
    }
    descend(m, a, 1, &mut Vec::new(), out);
}

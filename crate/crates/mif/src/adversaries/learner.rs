use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::RngCore;
use rand_chacha::ChaCha12Rng;

use crate::adversaries::basic::EchoAdversary;
use crate::adversaries::hset::{compute_h, HMode, HSets};
use crate::adversaries::minimax::transition_partition;
use crate::adversaries::posterior::{posterior_update, Posterior};
use crate::adversaries::splitting::{find_splitting, SplittingPlan};
use crate::adversaries::AdversaryError;
use crate::engine::{sample_distinct, Adversary, FiniteAutomaton, Instance, Output, Transcript};

/// Tuning knobs for the learning adversary. The defaults follow the
/// phase-based construction — candidate-set width `w = 2*floor(32*z*n/ell)`,
/// `h_max = 32*z` phases of `t = floor(ell/(2*h_max))` steps each — clamped
/// so every quantity is at least 1 and the total input budget
/// `ceil(ell/2) + h_max*t <= ell` still holds at micro scale.
#[derive(Debug, Clone)]
pub struct LearnerParams {
    /// Length of the random sorted prefix; `ceil(ell/2)` by default.
    pub q: u64,
    /// Cap on the extracted sub-universe size.
    pub w: u64,
    /// Phase length.
    pub t: u64,
    /// Maximum number of phases.
    pub h_max: u64,
    pub h_mode: HMode,
    pub split_budget: u64,
    pub minimax_budget: u64,
}

impl LearnerParams {
    pub fn derive(inst: Instance, z: u64) -> Self {
        let q = inst.ell.div_ceil(2);
        let rest = inst.ell - q;
        let w = 2 * (32 * z * inst.n / inst.ell).max(1);
        let mut h_max = (32 * z).max(1).min(rest.max(1));
        let mut t = (inst.ell / (2 * h_max)).max(1);
        // Keep q + h_max * t <= ell even when the floors clamp to 1.
        if h_max * t > rest {
            h_max = (rest / t).max(1);
            t = (rest / h_max).max(1).min(rest.max(1));
        }
        LearnerParams {
            q,
            w,
            t,
            h_max,
            h_mode: HMode::exact(),
            split_budget: 2_000_000,
            minimax_budget: 2_000_000,
        }
    }
}

/// How a learning run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnerOutcome {
    /// Still in the prefix or phase loop.
    Running,
    /// No splitting adversary existed; `W` was extracted and the brute-force
    /// sub-adversary played inside it.
    ExtractedW { w_set: Vec<u64>, phase: u64 },
    /// Every candidate for the post-prefix state was ruled out.
    FailedQEmpty { phase: u64 },
    /// The phase budget ran out before extraction.
    FailedTimeout,
    /// Exact tracking was infeasible or the model was rejected.
    Rejected(String),
}

/// One row of the phase log.
#[derive(Debug, Clone)]
pub struct PhaseRecord {
    pub h: u64,
    pub q_size_before: usize,
    pub q_size_after: usize,
    /// Whether a splitting plan was run this phase (`None` marks the
    /// extraction phase).
    pub split_prob: Option<f64>,
    /// Whether the realized phase output was divisive.
    pub divisive: bool,
    pub w_size: Option<usize>,
}

enum Stage {
    Prefix,
    Phase {
        plan: Option<SplittingPlan>,
        step: u64,
        started_at: usize,
        q_before: usize,
    },
    SubGame {
        step: u64,
    },
    Done,
}

/// The adaptive learning adversary. It knows the automaton's structure (an
/// enumerable chain), sends a random sorted prefix, computes per-state safe
/// sets, and then alternates between running splitting adversaries that
/// shrink the candidate set and, once no splitting adversary exists,
/// extracting a sub-universe `W` and playing the exact minimax sub-adversary
/// restricted to it. After its budget is spent it falls back to echo.
pub struct LearningAdversary {
    chain: Arc<dyn FiniteAutomaton>,
    inst: Instance,
    params: LearnerParams,
    stage: Stage,
    prefix: Vec<u64>,
    prefix_sent: usize,
    h_sets: Option<HSets>,
    q_set: Vec<usize>,
    phase: u64,
    outcome: LearnerOutcome,
    phase_log: Vec<PhaseRecord>,
    sub_plan: HashMap<Vec<Output>, u64>,
    sub_started_at: usize,
    w_universe: Vec<u64>,
    echo: EchoAdversary,
}

impl LearningAdversary {
    pub fn new(chain: Arc<dyn FiniteAutomaton>, inst: Instance, params: LearnerParams) -> Self {
        assert_eq!(chain.universe(), inst.n);
        LearningAdversary {
            chain,
            inst,
            params,
            stage: Stage::Prefix,
            prefix: Vec::new(),
            prefix_sent: 0,
            h_sets: None,
            q_set: Vec::new(),
            phase: 0,
            outcome: LearnerOutcome::Running,
            phase_log: Vec::new(),
            sub_plan: HashMap::new(),
            sub_started_at: 0,
            w_universe: Vec::new(),
            echo: EchoAdversary::new(),
        }
    }

    pub fn outcome(&self) -> &LearnerOutcome {
        &self.outcome
    }

    pub fn phase_log(&self) -> &[PhaseRecord] {
        &self.phase_log
    }

    /// Phase log as CSV (`h,q_before,q_after,divisive,split_prob,w_size`).
    pub fn phase_log_csv(&self) -> String {
        let mut s = String::from("h,q_before,q_after,divisive,split_prob,w_size\n");
        for r in &self.phase_log {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.h,
                r.q_size_before,
                r.q_size_after,
                r.divisive,
                r.split_prob.map(|p| p.to_string()).unwrap_or_default(),
                r.w_size.map(|w| w.to_string()).unwrap_or_default(),
            );
        }
        s
    }

    fn fail(&mut self, outcome: LearnerOutcome) {
        self.outcome = outcome;
        self.stage = Stage::Done;
    }

    /// Recompute the posterior and either pick a splitting plan for the next
    /// phase or extract `W` and build the sub-adversary.
    fn open_phase(&mut self, transcript: &Transcript) {
        if self.phase >= self.params.h_max {
            self.fail(LearnerOutcome::FailedTimeout);
            return;
        }
        self.phase += 1;
        let posterior = match posterior_update(self.chain.as_ref(), transcript) {
            Ok(p) => p,
            Err(e) => {
                self.fail(LearnerOutcome::Rejected(e.to_string()));
                return;
            }
        };
        let h = self.h_sets.as_ref().expect("H computed before phases");
        let plan = find_splitting(
            self.chain.as_ref(),
            &posterior,
            h,
            &self.q_set,
            self.params.t,
            self.params.split_budget,
        );
        let q_before = self.q_set.len();
        match plan {
            Some(plan) => {
                self.stage = Stage::Phase {
                    plan: Some(plan),
                    step: 0,
                    started_at: transcript.len(),
                    q_before,
                };
            }
            None => {
                let (w_set, w_prime) = self.extract_w();
                self.phase_log.push(PhaseRecord {
                    h: self.phase,
                    q_size_before: q_before,
                    q_size_after: q_before,
                    split_prob: None,
                    divisive: false,
                    w_size: Some(w_set.len()),
                });
                self.build_sub_adversary(&posterior, &w_prime);
                self.w_universe = w_prime;
                self.outcome = LearnerOutcome::ExtractedW {
                    w_set,
                    phase: self.phase,
                };
                self.sub_started_at = transcript.len();
                self.stage = Stage::SubGame { step: 0 };
            }
        }
    }

    /// Majority-vote membership over the surviving candidates, then pad with
    /// the smallest items outside `W` up to `min(w, n)`.
    fn extract_w(&self) -> (Vec<u64>, Vec<u64>) {
        let h = self.h_sets.as_ref().expect("H computed");
        let half = self.q_set.len() as f64 / 2.0;
        let mut w_set = Vec::new();
        for item in 1..=self.inst.n {
            let members = self.q_set.iter().filter(|&&s| h.contains(s, item)).count();
            if members as f64 >= half {
                w_set.push(item);
            }
        }
        let cap = self.params.w.min(self.inst.n) as usize;
        let mut w_prime = w_set.clone();
        w_prime.truncate(cap);
        for item in 1..=self.inst.n {
            if w_prime.len() >= cap {
                break;
            }
            if !w_set.contains(&item) {
                w_prime.push(item);
            }
        }
        w_prime.sort_unstable();
        (w_set, w_prime)
    }

    /// Exact sub-adversary: maximize the probability that the automaton,
    /// started from the current posterior and aborted-on-exit from `W'`,
    /// repeats one of the sub-stream's own inputs within `t` steps. Inputs
    /// range over `W'` only; the plan is stored per output history.
    fn build_sub_adversary(&mut self, posterior: &Posterior, w_prime: &[u64]) {
        self.sub_plan.clear();
        let chain = self.chain.as_ref();
        let t = self.params.t;
        let mut nodes_left = self.params.minimax_budget;

        struct Ctx<'a> {
            chain: &'a dyn FiniteAutomaton,
            w_prime: &'a [u64],
        }

        fn search(
            ctx: &Ctx<'_>,
            weights: &[f64],
            fed: &mut Vec<u64>,
            steps_left: u64,
            path: &mut Vec<Output>,
            plan: &mut HashMap<Vec<Output>, u64>,
            nodes_left: &mut u64,
        ) -> f64 {
            if steps_left == 0 || *nodes_left == 0 {
                return 0.0;
            }
            let mut best = -1.0;
            let mut best_input = ctx.w_prime[0];
            let mut best_children = HashMap::new();
            for &input in ctx.w_prime {
                if *nodes_left == 0 {
                    break;
                }
                *nodes_left -= 1;
                let mut value = 0.0;
                let mut children = HashMap::new();
                fed.push(input);
                for (out, wts, mass) in transition_partition(ctx.chain, weights, input) {
                    match out {
                        Output::Abort => {}
                        Output::Item(v) if !ctx.w_prime.contains(&v) => {
                            // Outside W' the modified automaton aborts.
                        }
                        Output::Item(v) if fed.contains(&v) => value += mass,
                        Output::Item(_) => {
                            path.push(out);
                            value += search(
                                ctx,
                                &wts,
                                fed,
                                steps_left - 1,
                                path,
                                &mut children,
                                nodes_left,
                            );
                            path.pop();
                        }
                    }
                }
                fed.pop();
                if value > best {
                    best = value;
                    best_input = input;
                    best_children = children;
                }
            }
            plan.insert(path.clone(), best_input);
            plan.extend(best_children);
            best
        }

        let ctx = Ctx { chain, w_prime };
        let mut fed = Vec::new();
        let mut path = Vec::new();
        let mut plan = HashMap::new();
        search(
            &ctx,
            posterior.probs(),
            &mut fed,
            t,
            &mut path,
            &mut plan,
            &mut nodes_left,
        );
        self.sub_plan = plan;
    }

    /// Close out a finished (or aborted) splitting phase: filter the
    /// candidate set by the realized outputs and log divisiveness.
    fn close_phase(&mut self, transcript: &Transcript, started_at: usize, q_before: usize) {
        let h = self.h_sets.as_ref().expect("H computed");
        let phase_rounds = &transcript.rounds()[started_at..];
        let aborted = phase_rounds.iter().any(|&(_, o)| o.is_abort());
        let outputs: Vec<u64> = phase_rounds.iter().filter_map(|&(_, o)| o.item()).collect();
        let survivors: Vec<usize> = self
            .q_set
            .iter()
            .copied()
            .filter(|&s| outputs.iter().all(|&v| h.contains(s, v)))
            .collect();
        let divisive = aborted || survivors.len() as f64 <= q_before as f64 / 2.0;
        if let Stage::Phase {
            plan: Some(plan), ..
        } = &self.stage
        {
            self.phase_log.push(PhaseRecord {
                h: self.phase,
                q_size_before: q_before,
                q_size_after: survivors.len(),
                split_prob: Some(plan.success_prob),
                divisive,
                w_size: None,
            });
        }
        self.q_set = survivors;
        if self.q_set.is_empty() {
            self.fail(LearnerOutcome::FailedQEmpty { phase: self.phase });
        }
    }
}

impl Adversary for LearningAdversary {
    fn kind(&self) -> &'static str {
        "learning"
    }

    fn reset(&mut self) {
        self.stage = Stage::Prefix;
        self.prefix.clear();
        self.prefix_sent = 0;
        self.h_sets = None;
        self.q_set.clear();
        self.phase = 0;
        self.outcome = LearnerOutcome::Running;
        self.phase_log.clear();
        self.sub_plan.clear();
        self.w_universe.clear();
        self.echo = EchoAdversary::new();
    }

    fn next_input(&mut self, transcript: &Transcript, n: u64, rng: &mut ChaCha12Rng) -> u64 {
        // Phase bookkeeping first: a phase that filled its step budget (or
        // saw an abort) closes before the next input is chosen.
        loop {
            match &self.stage {
                Stage::Prefix => {
                    if self.prefix.is_empty() {
                        let mut p = sample_distinct(rng as &mut dyn RngCore, self.params.q, n);
                        p.sort_unstable();
                        self.prefix = p;
                    }
                    if self.prefix_sent < self.prefix.len() {
                        let item = self.prefix[self.prefix_sent];
                        self.prefix_sent += 1;
                        return item;
                    }
                    // Prefix done: compute H and the initial candidate set.
                    match compute_h(self.chain.as_ref(), self.params.q, self.params.h_mode) {
                        Ok(h) => {
                            let posterior = match posterior_update(self.chain.as_ref(), transcript)
                            {
                                Ok(p) => p,
                                Err(e) => {
                                    self.fail(LearnerOutcome::Rejected(e.to_string()));
                                    continue;
                                }
                            };
                            let half_w = self.params.w as f64 / 2.0;
                            self.q_set = posterior
                                .support()
                                .into_iter()
                                .filter(|&s| (h.per_state[s].len() as f64) <= half_w)
                                .collect();
                            self.h_sets = Some(h);
                            if self.q_set.is_empty() {
                                self.fail(LearnerOutcome::FailedQEmpty { phase: 0 });
                                continue;
                            }
                            self.open_phase(transcript);
                            continue;
                        }
                        Err(AdversaryError::StateCapExceeded { .. })
                        | Err(AdversaryError::Infeasible(_)) => {
                            // Heuristic fallback: sampled H sets.
                            self.params.h_mode = HMode::Sampled {
                                samples: 100_000,
                                seed: 17,
                            };
                            continue;
                        }
                        Err(e) => {
                            self.fail(LearnerOutcome::Rejected(e.to_string()));
                            continue;
                        }
                    }
                }
                Stage::Phase {
                    plan,
                    step,
                    started_at,
                    q_before,
                } => {
                    let (step, started_at, q_before) = (*step, *started_at, *q_before);
                    let phase_aborted = transcript.ended();
                    if step >= self.params.t || phase_aborted {
                        self.close_phase(transcript, started_at, q_before);
                        if matches!(self.stage, Stage::Phase { .. }) {
                            self.open_phase(transcript);
                        }
                        continue;
                    }
                    let phase_outputs: Vec<Output> = transcript.rounds()[started_at..]
                        .iter()
                        .map(|&(_, o)| o)
                        .collect();
                    let input = plan
                        .as_ref()
                        .and_then(|p| p.next_input(&phase_outputs))
                        .unwrap_or(1);
                    if let Stage::Phase { step, .. } = &mut self.stage {
                        *step += 1;
                    }
                    return input;
                }
                Stage::SubGame { step } => {
                    if *step >= self.params.t || transcript.ended() {
                        self.stage = Stage::Done;
                        continue;
                    }
                    let outputs: Vec<Output> = transcript.rounds()[self.sub_started_at..]
                        .iter()
                        .map(|&(_, o)| o)
                        .collect();
                    let input = self
                        .sub_plan
                        .get(&outputs)
                        .copied()
                        .or_else(|| self.sub_plan.get(&Vec::new()).copied())
                        .unwrap_or_else(|| *self.w_universe.first().unwrap_or(&1));
                    if let Stage::SubGame { step } = &mut self.stage {
                        *step += 1;
                    }
                    return input;
                }
                Stage::Done => {
                    return self.echo.next_input(transcript, n, rng);
                }
            }
        }
    }
}

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::adversaries::AdversaryError;
use crate::engine::{
    finite_chain_step, sample_distinct, wilson_interval, FiniteAutomaton, RandomnessMode,
};

/// How the conditional probabilities behind the safe sets are obtained.
#[derive(Debug, Clone, Copy)]
pub enum HMode {
    /// Enumerate every sorted `q`-prefix; exact, micro scale only.
    Exact { state_cap: usize, prefix_cap: u64 },
    /// Estimate from sampled prefixes with per-item Wilson screening.
    Sampled { samples: u64, seed: u64 },
}

impl HMode {
    pub fn exact() -> Self {
        HMode::Exact {
            state_cap: 1 << 16,
            prefix_cap: 5_000_000,
        }
    }
}

/// Per-state safe-output sets: `H[state]` holds the items unlikely to have
/// been part of a random sorted `q`-prefix that drove the automaton to that
/// state (conditional probability at most `q/(4n)`).
#[derive(Debug, Clone)]
pub struct HSets {
    pub q: u64,
    pub per_state: Vec<BTreeSet<u64>>,
    /// States reachable by some `q`-prefix; H is meaningful only for these.
    pub reachable: Vec<bool>,
    pub exact: bool,
}

impl HSets {
    pub fn contains(&self, state: usize, item: u64) -> bool {
        self.per_state[state].contains(&item)
    }
}

/// Computes the safe sets for a uniformly random sorted `q`-subset prefix.
pub fn compute_h(
    chain: &dyn FiniteAutomaton,
    q: u64,
    mode: HMode,
) -> Result<HSets, AdversaryError> {
    if chain.mode() == RandomnessMode::RandomOracle {
        return Err(AdversaryError::UnsupportedMode { mode: chain.mode() });
    }
    let n = chain.universe();
    assert!(q >= 1 && q <= n);
    match mode {
        HMode::Exact {
            state_cap,
            prefix_cap,
        } => {
            let states = chain.num_states();
            if states > state_cap {
                return Err(AdversaryError::StateCapExceeded {
                    states,
                    cap: state_cap,
                });
            }
            let prefixes = binomial(n, q);
            if prefixes > prefix_cap as f64 {
                return Err(AdversaryError::Infeasible(format!(
                    "C({n},{q}) = {prefixes:.3e} prefixes exceed the exact-mode cap"
                )));
            }
            Ok(compute_h_exact(chain, q))
        }
        HMode::Sampled { samples, seed } => Ok(compute_h_sampled(chain, q, samples, seed)),
    }
}

fn reach_distribution(chain: &dyn FiniteAutomaton, prefix: &[u64]) -> Vec<f64> {
    let mut probs = vec![0.0; chain.num_states()];
    for (s, p) in chain.init_dist() {
        probs[s] += p;
    }
    for &item in prefix {
        probs = finite_chain_step(chain, &probs, item);
    }
    probs
}

fn compute_h_exact(chain: &dyn FiniteAutomaton, q: u64) -> HSets {
    let n = chain.universe();
    let states = chain.num_states();
    // total[s] = sum over prefixes of P(reach s); hit[s][i] restricts to
    // prefixes containing item i+1. The uniform prefix weight cancels.
    let mut total = vec![0.0; states];
    let mut hit = vec![vec![0.0; n as usize]; states];
    for_each_sorted_subset(n, q, &mut |prefix| {
        let probs = reach_distribution(chain, prefix);
        for (s, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            total[s] += p;
            for &i in prefix {
                hit[s][(i - 1) as usize] += p;
            }
        }
    });

    let threshold = q as f64 / (4.0 * n as f64);
    let mut per_state = Vec::with_capacity(states);
    let mut reachable = Vec::with_capacity(states);
    for s in 0..states {
        reachable.push(total[s] > 0.0);
        let mut set = BTreeSet::new();
        if total[s] > 0.0 {
            for i in 1..=n {
                if hit[s][(i - 1) as usize] / total[s] <= threshold {
                    set.insert(i);
                }
            }
        }
        per_state.push(set);
    }
    HSets {
        q,
        per_state,
        reachable,
        exact: true,
    }
}

fn compute_h_sampled(chain: &dyn FiniteAutomaton, q: u64, samples: u64, seed: u64) -> HSets {
    let n = chain.universe();
    let states = chain.num_states();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut total = vec![0.0; states];
    let mut hit = vec![vec![0.0; n as usize]; states];
    for _ in 0..samples {
        let mut prefix = sample_distinct(&mut rng, q, n);
        prefix.sort_unstable();
        let probs = reach_distribution(chain, &prefix);
        for (s, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            total[s] += p;
            for &i in &prefix {
                hit[s][(i - 1) as usize] += p;
            }
        }
    }
    // Screen each item by the upper end of a Wilson interval on the
    // estimated conditional, so membership means "confidently unlikely".
    let threshold = q as f64 / (4.0 * n as f64);
    let mut per_state = Vec::with_capacity(states);
    let mut reachable = Vec::with_capacity(states);
    for s in 0..states {
        reachable.push(total[s] > 0.0);
        let mut set = BTreeSet::new();
        if total[s] > 0.0 {
            let weight = total[s].round().max(1.0) as u64;
            for i in 1..=n {
                let hits = hit[s][(i - 1) as usize].round() as u64;
                let (_, upper) = wilson_interval(hits.min(weight), weight);
                if upper <= threshold {
                    set.insert(i);
                }
            }
        }
        per_state.push(set);
    }
    HSets {
        q,
        per_state,
        reachable,
        exact: false,
    }
}

/// Visit every sorted `q`-subset of `{1..n}` as a slice, in increasing
/// lexicographic order.
pub fn for_each_sorted_subset(n: u64, q: u64, visit: &mut dyn FnMut(&[u64])) {
    let mut buf = Vec::with_capacity(q as usize);
    descend(n, q, 1, &mut buf, visit);
}

fn descend(n: u64, q: u64, from: u64, buf: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
    if buf.len() == q as usize {
        visit(buf);
        return;
    }
    let remaining = q - buf.len() as u64;
    for next in from..=(n - remaining + 1) {
        buf.push(next);
        descend(n, q, next + 1, buf, visit);
        buf.pop();
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

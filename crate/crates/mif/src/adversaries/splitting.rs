use std::collections::HashMap;

use crate::adversaries::hset::HSets;
use crate::adversaries::minimax::transition_partition;
use crate::adversaries::posterior::Posterior;
use crate::adversaries::AdversaryError;
use crate::engine::{FiniteAutomaton, Output};

/// A deterministic phase adversary of length `t`, stored as the chosen input
/// for every reachable output history within the phase. An output sequence
/// is divisive for the candidate set when at most half the candidates have
/// safe sets containing all of it (aborting counts as divisive).
#[derive(Debug, Clone)]
pub struct SplittingPlan {
    pub t: u64,
    /// Probability that the realized phase output is divisive.
    pub success_prob: f64,
    /// Whether the plan came from the exact adaptive search or the sampled
    /// non-adaptive fallback.
    pub exact: bool,
    choices: HashMap<Vec<Output>, u64>,
    /// Fixed replay for non-adaptive plans, indexed by phase position.
    sequence: Option<Vec<u64>>,
}

impl SplittingPlan {
    /// The input to play given the outputs observed so far in this phase.
    /// Non-adaptive plans replay by position; unexplored branches fall back
    /// to the root choice.
    pub fn next_input(&self, phase_outputs: &[Output]) -> Option<u64> {
        if let Some(seq) = &self.sequence {
            return seq.get(phase_outputs.len()).or(seq.last()).copied();
        }
        self.choices
            .get(phase_outputs)
            .copied()
            .or_else(|| self.choices.get(&Vec::new()).copied())
    }
}

struct SplitSearch<'a> {
    chain: &'a dyn FiniteAutomaton,
    h: &'a HSets,
    half: f64,
    nodes: u64,
    max_nodes: u64,
}

impl SplitSearch<'_> {
    /// Max over adaptive inputs of P(phase output divisive), recording the
    /// maximizing choices. `live` is the set of candidates whose safe sets
    /// still contain every output observed so far.
    fn run(
        &mut self,
        weights: &[f64],
        live: &[usize],
        steps_left: u64,
        path: &mut Vec<Output>,
        choices: &mut HashMap<Vec<Output>, u64>,
    ) -> Result<f64, AdversaryError> {
        if steps_left == 0 {
            return Ok(if (live.len() as f64) <= self.half {
                weights.iter().sum()
            } else {
                0.0
            });
        }
        let n = self.chain.universe();
        let mut best = -1.0f64;
        let mut best_input = 1;
        let mut best_children: HashMap<Vec<Output>, u64> = HashMap::new();
        for input in 1..=n {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(AdversaryError::BudgetExceeded { nodes: self.nodes });
            }
            let mut value = 0.0;
            let mut children: HashMap<Vec<Output>, u64> = HashMap::new();
            for (out, wts, mass) in transition_partition(self.chain, weights, input) {
                match out {
                    // An abort is divisive by convention.
                    Output::Abort => value += mass,
                    Output::Item(v) => {
                        let next_live: Vec<usize> = live
                            .iter()
                            .copied()
                            .filter(|&s| self.h.contains(s, v))
                            .collect();
                        path.push(out);
                        value += self.run(&wts, &next_live, steps_left - 1, path, &mut children)?;
                        path.pop();
                    }
                }
            }
            if value > best {
                best = value;
                best_input = input;
                best_children = children;
            }
        }
        choices.insert(path.clone(), best_input);
        choices.extend(best_children);
        Ok(best)
    }
}

/// Searches for a deterministic `t`-step adversary whose realized output
/// sequence is divisive for `q_set` with probability at least 1/2, starting
/// from the given posterior over current states.
///
/// The exact adaptive search runs under a node budget; if the budget is
/// exhausted, a non-adaptive fallback scores seeded candidate input
/// sequences instead (`exact: false` in the returned plan). Absence of a
/// splitting adversary is a normal answer, not an error.
pub fn find_splitting(
    chain: &dyn FiniteAutomaton,
    posterior: &Posterior,
    h: &HSets,
    q_set: &[usize],
    t: u64,
    max_nodes: u64,
) -> Option<SplittingPlan> {
    let half = q_set.len() as f64 / 2.0;
    let mut search = SplitSearch {
        chain,
        h,
        half,
        nodes: 0,
        max_nodes,
    };
    let mut choices = HashMap::new();
    let mut path = Vec::new();
    match search.run(posterior.probs(), q_set, t, &mut path, &mut choices) {
        Ok(prob) if prob >= 0.5 => Some(SplittingPlan {
            t,
            success_prob: prob,
            exact: true,
            choices,
            sequence: None,
        }),
        Ok(_) => None,
        Err(_) => find_splitting_nonadaptive(chain, posterior, h, q_set, t, max_nodes),
    }
}

/// Fallback: evaluate fixed input sequences (echo is adaptive and excluded)
/// drawn deterministically from the item range, plus simple constant
/// sequences, under the same divisiveness measure.
fn find_splitting_nonadaptive(
    chain: &dyn FiniteAutomaton,
    posterior: &Posterior,
    h: &HSets,
    q_set: &[usize],
    t: u64,
    max_nodes: u64,
) -> Option<SplittingPlan> {
    let n = chain.universe();
    let half = q_set.len() as f64 / 2.0;
    let mut nodes = 0u64;

    // P(divisive) of a fixed sequence: recursion over output branches only.
    #[allow(clippy::too_many_arguments)]
    fn eval(
        chain: &dyn FiniteAutomaton,
        h: &HSets,
        seq: &[u64],
        weights: &[f64],
        live: &[usize],
        half: f64,
        nodes: &mut u64,
        max_nodes: u64,
    ) -> Option<f64> {
        if seq.is_empty() {
            return Some(if (live.len() as f64) <= half {
                weights.iter().sum()
            } else {
                0.0
            });
        }
        *nodes += 1;
        if *nodes > max_nodes {
            return None;
        }
        let mut value = 0.0;
        for (out, wts, mass) in transition_partition(chain, weights, seq[0]) {
            match out {
                Output::Abort => value += mass,
                Output::Item(v) => {
                    let next_live: Vec<usize> =
                        live.iter().copied().filter(|&s| h.contains(s, v)).collect();
                    value += eval(
                        chain,
                        h,
                        &seq[1..],
                        &wts,
                        &next_live,
                        half,
                        nodes,
                        max_nodes,
                    )?;
                }
            }
        }
        Some(value)
    }

    // Constant sequences first (the extreme points that matter most at
    // phase length 1), then seeded pseudo-random sequences until the budget
    // runs out.
    let mut candidates: Vec<Vec<u64>> = (1..=n).map(|item| vec![item; t as usize]).collect();
    let mut sampler = 0x5eedu64;
    for _ in 0..4 * n {
        let seq: Vec<u64> = (0..t)
            .map(|i| {
                sampler = crate::engine::mix2(sampler, i);
                sampler % n + 1
            })
            .collect();
        candidates.push(seq);
    }
    for seq in candidates {
        let Some(prob) = eval(
            chain,
            h,
            &seq,
            posterior.probs(),
            q_set,
            half,
            &mut nodes,
            max_nodes,
        ) else {
            return None; // budget exhausted mid-evaluation
        };
        if prob >= 0.5 {
            return Some(SplittingPlan {
                t,
                success_prob: prob,
                exact: false,
                choices: HashMap::new(),
                sequence: Some(seq),
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::hset::{compute_h, HMode};
    use crate::adversaries::posterior::posterior_update;
    use crate::engine::{TableChain, Transcript};
    use std::collections::BTreeSet;

    fn h_with(sets: Vec<BTreeSet<u64>>) -> HSets {
        let len = sets.len();
        HSets {
            q: 1,
            per_state: sets,
            reachable: vec![true; len],
            exact: true,
        }
    }

    #[test]
    fn singleton_candidate_needs_an_output_outside_its_safe_set() {
        // |Q| = 1: divisive means the single candidate is ruled out, so a
        // splitting adversary exists iff some reachable output leaves H.
        let chain = TableChain::const_output(4, 3);
        let post = posterior_update(&chain, &Transcript::empty()).unwrap();
        // Safe set containing the constant output: no splitting possible.
        let h_in = h_with(vec![BTreeSet::from([3])]);
        assert!(find_splitting(&chain, &post, &h_in, &[0], 1, 1 << 20).is_none());
        // Safe set missing it: any input is 1-splitting.
        let h_out = h_with(vec![BTreeSet::from([1, 2])]);
        let plan = find_splitting(&chain, &post, &h_out, &[0], 1, 1 << 20).unwrap();
        assert_eq!(plan.success_prob, 1.0);
    }

    #[test]
    fn disjoint_safe_sets_split_with_one_step() {
        // Two candidate states with disjoint H sets: any single output rules
        // out at least one of them, so any 1-step adversary is splitting.
        let chain = TableChain::uniform_jump(4, &[1, 2]);
        let post = posterior_update(&chain, &Transcript::empty()).unwrap();
        let h = h_with(vec![BTreeSet::from([1]), BTreeSet::from([2])]);
        let plan = find_splitting(&chain, &post, &h, &[0, 1], 1, 1 << 20).unwrap();
        assert_eq!(plan.success_prob, 1.0);
        assert!(plan.next_input(&[]).is_some());
    }

    #[test]
    fn no_split_when_all_outputs_are_safe_everywhere() {
        // Point-mass posterior, every output inside every candidate's H: no
        // budget finds a splitting adversary.
        let chain = TableChain::const_output(4, 2);
        let post = posterior_update(&chain, &Transcript::empty()).unwrap();
        let h = h_with(vec![BTreeSet::from([2]), BTreeSet::from([2])]);
        assert!(find_splitting(&chain, &post, &h, &[0, 1], 2, 1 << 20).is_none());
    }

    #[test]
    fn exact_search_uses_computed_h_sets() {
        let chain = TableChain::det_bitmap(4, 3);
        let h = compute_h(&chain, 2, HMode::exact()).unwrap();
        let mut t = Transcript::empty();
        t.push(1, Output::Item(2));
        t.push(2, Output::Item(3));
        let post = posterior_update(&chain, &t).unwrap();
        // The true state is 0b0011; candidates = its H plus a decoy whose H
        // is disjoint; one adaptive step must split.
        let decoy = 0b1100usize;
        let plan = find_splitting(&chain, &post, &h, &[0b0011, decoy], 1, 1 << 20);
        assert!(plan.is_some());
    }
}

use std::collections::{BTreeSet, HashMap};

use crate::adversaries::AdversaryError;
use crate::engine::{finite_chain_step, FiniteAutomaton, Instance, Output};

/// Node cap for exact searches; exceeding it is an error, not a wrong answer.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub max_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxReport {
    /// Exact maximum, over all adaptive deterministic adversaries, of the
    /// probability that the run's verdict is a mistake.
    pub mistake_prob: f64,
    /// Same maximum for an abort verdict (an abort with no earlier mistake).
    pub abort_prob: f64,
    /// Depth of the searched decision tree.
    pub depth: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Objective {
    Mistake,
    Abort,
}

struct Search<'a> {
    chain: &'a dyn FiniteAutomaton,
    objective: Objective,
    nodes: u64,
    max_nodes: u64,
    depth_reached: usize,
}

/// Splits the post-transition weight vector by the output of the landing
/// state. Weights are unnormalized probabilities; their sum is the branch
/// probability.
pub(crate) fn transition_partition(
    chain: &dyn FiniteAutomaton,
    weights: &[f64],
    input: u64,
) -> Vec<(Output, Vec<f64>, f64)> {
    let stepped = finite_chain_step(chain, weights, input);
    let mut groups: HashMap<Output, (Vec<f64>, f64)> = HashMap::new();
    for (s, &w) in stepped.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let out = chain.output_of(s);
        let entry = groups
            .entry(out)
            .or_insert_with(|| (vec![0.0; chain.num_states()], 0.0));
        entry.0[s] += w;
        entry.1 += w;
    }
    let mut v: Vec<(Output, Vec<f64>, f64)> =
        groups.into_iter().map(|(o, (w, m))| (o, w, m)).collect();
    v.sort_by_key(|&(o, _, _)| o);
    v
}

impl Search<'_> {
    fn run(
        &mut self,
        weights: &[f64],
        seen: &mut BTreeSet<u64>,
        steps_left: u64,
        depth: usize,
    ) -> Result<f64, AdversaryError> {
        if steps_left == 0 {
            return Ok(0.0);
        }
        // Depth counts input decisions, not the terminal evaluation.
        self.depth_reached = self.depth_reached.max(depth);
        let n = self.chain.universe();
        let mut best = 0.0f64;
        for input in 1..=n {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(AdversaryError::BudgetExceeded { nodes: self.nodes });
            }
            let mut value = 0.0;
            let newly_seen = seen.insert(input);
            for (out, wts, mass) in transition_partition(self.chain, weights, input) {
                match out {
                    Output::Abort => {
                        if self.objective == Objective::Abort {
                            value += mass;
                        }
                    }
                    Output::Item(v) if seen.contains(&v) => {
                        if self.objective == Objective::Mistake {
                            value += mass;
                        }
                    }
                    Output::Item(_) => {
                        value += self.run(&wts, seen, steps_left - 1, depth + 1)?;
                    }
                }
            }
            if newly_seen {
                seen.remove(&input);
            }
            best = best.max(value);
        }
        Ok(best)
    }
}

/// Exact worst-case failure probabilities over all deterministic adaptive
/// adversaries, by backward induction over transcript-indexed belief states.
/// The adversary observes every output including the pre-input one, so the
/// search starts from the initial distribution partitioned by that output.
pub fn minimax_worst_error(
    chain: &dyn FiniteAutomaton,
    inst: Instance,
    budget: SearchBudget,
) -> Result<MinimaxReport, AdversaryError> {
    assert_eq!(chain.universe(), inst.n);
    let solve = |objective: Objective| -> Result<(f64, usize), AdversaryError> {
        let mut search = Search {
            chain,
            objective,
            nodes: 0,
            max_nodes: budget.max_nodes,
            depth_reached: 0,
        };
        let mut init = vec![0.0; chain.num_states()];
        for (s, p) in chain.init_dist() {
            init[s] += p;
        }
        let mut groups: HashMap<Output, Vec<f64>> = HashMap::new();
        for (s, &w) in init.iter().enumerate() {
            if w > 0.0 {
                groups
                    .entry(chain.output_of(s))
                    .or_insert_with(|| vec![0.0; init.len()])[s] += w;
            }
        }
        let mut total = 0.0;
        let mut keys: Vec<Output> = groups.keys().copied().collect();
        keys.sort();
        for out in keys {
            let wts = &groups[&out];
            match out {
                Output::Abort => {
                    if objective == Objective::Abort {
                        total += wts.iter().sum::<f64>();
                    }
                }
                Output::Item(_) => {
                    let mut seen = BTreeSet::new();
                    total += search.run(wts, &mut seen, inst.ell, 1)?;
                }
            }
        }
        Ok((total, search.depth_reached))
    };
    let (mistake_prob, depth) = solve(Objective::Mistake)?;
    let (abort_prob, _) = solve(Objective::Abort)?;
    Ok(MinimaxReport {
        mistake_prob,
        abort_prob,
        depth,
    })
}

/// Independent check of the minimax mistake value: enumerate adaptive
/// strategies as explicit decision trees over observed outputs and evaluate
/// each one by a forward sum over concrete state paths. Exponentially more
/// work than the backward induction, which is the point — it shares none of
/// its machinery.
pub fn exhaustive_minimax_mistake(
    chain: &dyn FiniteAutomaton,
    inst: Instance,
    max_trees: u64,
) -> Result<f64, AdversaryError> {
    #[derive(Clone)]
    struct Tree {
        input: u64,
        children: Vec<Tree>, // indexed by position in the non-abort alphabet
    }

    let alphabet: Vec<u64> = chain
        .output_alphabet()
        .into_iter()
        .filter_map(|o| o.item())
        .collect();
    let n = chain.universe();

    let mut count_cache: HashMap<u64, f64> = HashMap::new();
    fn count_trees(depth: u64, n: u64, branches: usize, cache: &mut HashMap<u64, f64>) -> f64 {
        if depth == 0 {
            return 1.0;
        }
        if let Some(&c) = cache.get(&depth) {
            return c;
        }
        let sub = count_trees(depth - 1, n, branches, cache);
        let c = n as f64 * sub.powi(branches as i32);
        cache.insert(depth, c);
        c
    }
    let total = count_trees(inst.ell, n, alphabet.len(), &mut count_cache);
    if total > max_trees as f64 {
        return Err(AdversaryError::Infeasible(format!(
            "{total:.3e} strategy trees exceed the cap of {max_trees}"
        )));
    }

    fn gen_trees(depth: u64, n: u64, branches: usize) -> Vec<Tree> {
        if depth == 0 {
            return vec![];
        }
        let subs = gen_trees(depth - 1, n, branches);
        let mut out = Vec::new();
        for input in 1..=n {
            if depth == 1 || subs.is_empty() {
                out.push(Tree {
                    input,
                    children: vec![],
                });
                continue;
            }
            // Cartesian product over the alphabet of child subtrees.
            let mut picks = vec![0usize; branches];
            loop {
                out.push(Tree {
                    input,
                    children: picks.iter().map(|&i| subs[i].clone()).collect(),
                });
                let mut carry = 0;
                while carry < branches {
                    picks[carry] += 1;
                    if picks[carry] < subs.len() {
                        break;
                    }
                    picks[carry] = 0;
                    carry += 1;
                }
                if carry == branches {
                    break;
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn eval(
        chain: &dyn FiniteAutomaton,
        alphabet: &[u64],
        node: &Tree,
        state: usize,
        prob: f64,
        seen: &mut BTreeSet<u64>,
    ) -> f64 {
        let input = node.input;
        let newly = seen.insert(input);
        let mut acc = 0.0;
        for (next, p) in chain.transition(state, input) {
            match chain.output_of(next) {
                Output::Abort => {}
                Output::Item(v) => {
                    if seen.contains(&v) {
                        acc += prob * p;
                    } else if let Some(pos) = alphabet.iter().position(|&a| a == v) {
                        if let Some(child) = node.children.get(pos) {
                            acc += eval(chain, alphabet, child, next, prob * p, seen);
                        }
                    }
                }
            }
        }
        if newly {
            seen.remove(&input);
        }
        acc
    }

    // The strategy may react to the pre-input output, so maximize per
    // initial-output group and add the disjoint contributions.
    let mut by_initial: HashMap<Output, Vec<(usize, f64)>> = HashMap::new();
    for (s, p) in chain.init_dist() {
        by_initial
            .entry(chain.output_of(s))
            .or_default()
            .push((s, p));
    }
    let trees = gen_trees(inst.ell, n, alphabet.len());
    let mut value = 0.0;
    for (out, states) in by_initial {
        if out.is_abort() {
            continue;
        }
        let mut best = 0.0f64;
        for tree in &trees {
            let mut group_val = 0.0;
            for &(s, p) in &states {
                let mut seen = BTreeSet::new();
                group_val += eval(chain, &alphabet, tree, s, p, &mut seen);
            }
            best = best.max(group_val);
        }
        value += best;
    }
    Ok(value)
}

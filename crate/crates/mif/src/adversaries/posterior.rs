use crate::adversaries::AdversaryError;
use crate::engine::{FiniteAutomaton, Output, RandomnessMode, Transcript};

/// Default cap on exactly tracked state spaces.
pub const DEFAULT_STATE_CAP: usize = 1 << 16;

/// A probability vector over an automaton's states, conditioned on an
/// observed transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    probs: Vec<f64>,
}

impl Posterior {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, state: usize) -> f64 {
        self.probs[state]
    }

    /// States with nonzero posterior mass.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(s, _)| s)
            .collect()
    }

    pub fn is_point_mass(&self) -> bool {
        self.support().len() == 1
    }
}

/// Exact Bayes filter over the Markov chain induced by the automaton's
/// transitions, conditioned on every observed output (including the
/// pre-input one when the transcript records it). Requires an enumerable
/// chain; random-oracle automata have none.
pub fn posterior_update(
    chain: &dyn FiniteAutomaton,
    transcript: &Transcript,
) -> Result<Posterior, AdversaryError> {
    posterior_update_capped(chain, transcript, DEFAULT_STATE_CAP)
}

pub fn posterior_update_capped(
    chain: &dyn FiniteAutomaton,
    transcript: &Transcript,
    cap: usize,
) -> Result<Posterior, AdversaryError> {
    if chain.mode() == RandomnessMode::RandomOracle {
        return Err(AdversaryError::UnsupportedMode { mode: chain.mode() });
    }
    let m = chain.num_states();
    if m > cap {
        return Err(AdversaryError::StateCapExceeded { states: m, cap });
    }

    let mut probs = vec![0.0; m];
    for (s, p) in chain.init_dist() {
        probs[s] += p;
    }
    if let Some(out) = transcript.initial_output() {
        condition(chain, &mut probs, out)?;
    }
    for &(input, output) in transcript.rounds() {
        probs = crate::engine::finite_chain_step(chain, &probs, input);
        condition(chain, &mut probs, output)?;
    }
    Ok(Posterior { probs })
}

fn condition(
    chain: &dyn FiniteAutomaton,
    probs: &mut [f64],
    observed: Output,
) -> Result<(), AdversaryError> {
    let mut total = 0.0;
    for (s, p) in probs.iter_mut().enumerate() {
        if chain.output_of(s) != observed {
            *p = 0.0;
        }
        total += *p;
    }
    if total <= 0.0 {
        return Err(AdversaryError::InconsistentTranscript);
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(())
}

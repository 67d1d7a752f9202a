use std::collections::HashSet;

use rand_chacha::ChaCha12Rng;

use crate::engine::{uniform_below, Adversary, Output, Transcript};
use rand::RngCore;

/// Feeds the automaton's current output back as the next input. Against a
/// correct algorithm this consumes one fresh output per step, which is the
/// strategy the list-based constructions are sized against.
#[derive(Debug, Default, Clone)]
pub struct EchoAdversary;

impl EchoAdversary {
    pub fn new() -> Self {
        EchoAdversary
    }
}

impl Adversary for EchoAdversary {
    fn kind(&self) -> &'static str {
        "echo"
    }
    fn next_input(&mut self, transcript: &Transcript, _n: u64, _rng: &mut ChaCha12Rng) -> u64 {
        match transcript.last_output() {
            Some(Output::Item(v)) => v,
            Some(Output::Abort) => panic!("game already ended in abort"),
            None => 1,
        }
    }
}

/// Picks the next input uniformly from the items that are neither an earlier
/// input nor the current output; falls back to uniform over `[n]` when that
/// set is empty.
#[derive(Debug, Default, Clone)]
pub struct RandomAdversary;

impl RandomAdversary {
    pub fn new() -> Self {
        RandomAdversary
    }

    pub(crate) fn draw(transcript: &Transcript, n: u64, rng: &mut ChaCha12Rng) -> u64 {
        let excluded: HashSet<u64> = {
            let mut e: HashSet<u64> = transcript.inputs().collect();
            if let Some(Output::Item(v)) = transcript.last_output() {
                e.insert(v);
            }
            e.retain(|&v| v <= n);
            e
        };
        let free = n - excluded.len() as u64;
        if free == 0 {
            return uniform_below(rng.next_u64(), n) + 1;
        }
        if free >= n / 2 {
            // Rejection sampling: uniform over the free set, expected < 2
            // draws.
            loop {
                let item = uniform_below(rng.next_u64(), n) + 1;
                if !excluded.contains(&item) {
                    return item;
                }
            }
        }
        // Dense exclusion: index into the free set directly.
        let target = uniform_below(rng.next_u64(), free);
        let mut skipped = 0;
        for item in 1..=n {
            if excluded.contains(&item) {
                continue;
            }
            if skipped == target {
                return item;
            }
            skipped += 1;
        }
        unreachable!("target < free")
    }
}

impl Adversary for RandomAdversary {
    fn kind(&self) -> &'static str {
        "random"
    }
    fn next_input(&mut self, transcript: &Transcript, n: u64, rng: &mut ChaCha12Rng) -> u64 {
        Self::draw(transcript, n, rng)
    }
}

/// Echo with probability `p_echo`, otherwise the random strategy.
#[derive(Debug, Clone)]
pub struct MixedAdversary {
    p_echo: f64,
}

impl MixedAdversary {
    pub fn new(p_echo: f64) -> Self {
        assert!((0.0..=1.0).contains(&p_echo));
        MixedAdversary { p_echo }
    }
}

impl Adversary for MixedAdversary {
    fn kind(&self) -> &'static str {
        "mixed"
    }
    fn next_input(&mut self, transcript: &Transcript, n: u64, rng: &mut ChaCha12Rng) -> u64 {
        let coin = uniform_below(rng.next_u64(), 1 << 53) as f64 / (1u64 << 53) as f64;
        if coin < self.p_echo {
            EchoAdversary.next_input(transcript, n, rng)
        } else {
            RandomAdversary::draw(transcript, n, rng)
        }
    }
}

/// Plays back a fixed stream, repeating the last item if the game runs
/// longer than the recorded stream.
#[derive(Debug, Clone)]
pub struct ReplayAdversary {
    stream: Vec<u64>,
    next: usize,
}

impl ReplayAdversary {
    pub fn new(stream: Vec<u64>) -> Self {
        assert!(!stream.is_empty());
        ReplayAdversary { stream, next: 0 }
    }
}

impl Adversary for ReplayAdversary {
    fn kind(&self) -> &'static str {
        "replay"
    }
    fn reset(&mut self) {
        self.next = 0;
    }
    fn next_input(&mut self, _transcript: &Transcript, _n: u64, _rng: &mut ChaCha12Rng) -> u64 {
        let item = self.stream[self.next.min(self.stream.len() - 1)];
        self.next += 1;
        item
    }
}

use std::fmt::Write as _;

use crate::engine::types::Output;

/// The record of one run: the automaton's initial output (a Moore machine
/// reports before reading anything) followed by `(input, output)` rounds.
/// Once an abort output appears, the transcript ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    initial_output: Option<Output>,
    rounds: Vec<(u64, Output)>,
}

impl Transcript {
    pub fn new(initial_output: Output) -> Self {
        Transcript {
            initial_output: Some(initial_output),
            rounds: Vec::new(),
        }
    }

    /// A transcript with no recorded pre-input output; used when replaying
    /// logs that omit it.
    pub fn empty() -> Self {
        Transcript {
            initial_output: None,
            rounds: Vec::new(),
        }
    }

    pub fn push(&mut self, input: u64, output: Output) {
        debug_assert!(!self.ended(), "transcript continued past an abort");
        self.rounds.push((input, output));
    }

    pub fn initial_output(&self) -> Option<Output> {
        self.initial_output
    }

    pub fn rounds(&self) -> &[(u64, Output)] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn inputs(&self) -> impl Iterator<Item = u64> + '_ {
        self.rounds.iter().map(|&(i, _)| i)
    }

    pub fn outputs(&self) -> impl Iterator<Item = Output> + '_ {
        self.rounds.iter().map(|&(_, o)| o)
    }

    /// The most recent output, counting the initial one. This is what the
    /// echo strategy feeds back.
    pub fn last_output(&self) -> Option<Output> {
        self.rounds.last().map(|&(_, o)| o).or(self.initial_output)
    }

    pub fn ended(&self) -> bool {
        matches!(self.rounds.last(), Some(&(_, Output::Abort)))
    }

    /// Line format: `step,input,output`, one round per line, with the
    /// pre-input output on step 0 (input `-`) and `ABORT` as the sentinel.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(out) = self.initial_output {
            let _ = writeln!(s, "0,-,{out}");
        }
        for (i, (input, output)) in self.rounds.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, input, output);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut t = Transcript::empty();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("line {}: expected step,input,output", lineno + 1));
            }
            let output = if parts[2] == "ABORT" {
                Output::Abort
            } else {
                Output::Item(
                    parts[2]
                        .parse()
                        .map_err(|e| format!("line {}: {e}", lineno + 1))?,
                )
            };
            if parts[0] == "0" {
                t.initial_output = Some(output);
            } else {
                let input: u64 = parts[1]
                    .parse()
                    .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                t.push(input, output);
            }
        }
        Ok(t)
    }
}

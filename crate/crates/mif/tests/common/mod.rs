//! Shared test oracles, deliberately independent of the library paths they
//! check. Each test binary compiles its own copy, so not every helper is
//! used everywhere.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mif::engine::{FiniteAutomaton, Output, RandomnessMode, Transcript};

/// Literal-definition safe sets for deterministic chains: run every sorted
/// `q`-prefix to its unique state and count memberships directly.
pub fn brute_force_h_det(chain: &dyn FiniteAutomaton, q: u64) -> Vec<BTreeSet<u64>> {
    assert_eq!(chain.mode(), RandomnessMode::Deterministic);
    let n = chain.universe();
    let states = chain.num_states();
    let init = {
        let d = chain.init_dist();
        assert_eq!(d.len(), 1);
        d[0].0
    };
    let mut totals = vec![0u64; states];
    let mut hits = vec![vec![0u64; n as usize]; states];
    let mut prefix = Vec::new();
    enumerate(n, q, 1, &mut prefix, &mut |p: &[u64]| {
        let mut s = init;
        for &item in p {
            let t = chain.transition(s, item);
            assert_eq!(t.len(), 1);
            s = t[0].0;
        }
        totals[s] += 1;
        for &item in p {
            hits[s][(item - 1) as usize] += 1;
        }
    });
    let threshold = q as f64 / (4.0 * n as f64);
    (0..states)
        .map(|s| {
            let mut set = BTreeSet::new();
            if totals[s] > 0 {
                for i in 1..=n {
                    if hits[s][(i - 1) as usize] as f64 / totals[s] as f64 <= threshold {
                        set.insert(i);
                    }
                }
            }
            set
        })
        .collect()
}

fn enumerate(n: u64, q: u64, from: u64, buf: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
    if buf.len() as u64 == q {
        f(buf);
        return;
    }
    let need = q - buf.len() as u64;
    for v in from..=(n - need + 1) {
        buf.push(v);
        enumerate(n, q, v + 1, buf, f);
        buf.pop();
    }
}

/// Quadratic reference implementation of the transcript checker.
pub fn naive_violations(t: &Transcript) -> Vec<usize> {
    let rounds = t.rounds();
    let mut bad = Vec::new();
    for (i, &(_, out)) in rounds.iter().enumerate() {
        if let Output::Item(v) = out {
            if rounds[..=i].iter().any(|&(input, _)| input == v) {
                bad.push(i + 1);
            }
        }
    }
    bad
}

/// An independent micro-scale Markov-chain model of the two-level
/// random-tape tree traversal over `[w1] x [w2]`, transcribed straight from
/// the update rules: full matches retire the current leaf (cascading into a
/// uniformly resampled second level or an abort at the root), near misses
/// mark the named listed child. Built for differential checks against the
/// production implementation, so it deliberately shares none of its code.
pub mod rt_model {
    use mif::engine::{Output, RandomnessMode, TableChain, TransitionKind};

    #[derive(Debug, Clone, PartialEq, Eq, Hash)]
    struct State {
        l1: Vec<u64>,
        m1: u32,
        l2: Vec<u64>,
        m2: u32,
    }

    pub struct MicroRt {
        pub chain: TableChain,
        pub b: [u64; 2],
        pub w: [u64; 2],
    }

    fn ordered_lists(w: u64, b: u64) -> Vec<Vec<u64>> {
        fn grow(w: u64, b: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if acc.len() as u64 == b {
                out.push(acc.clone());
                return;
            }
            for v in 1..=w {
                if !acc.contains(&v) {
                    acc.push(v);
                    grow(w, b, acc, out);
                    acc.pop();
                }
            }
        }
        let mut out = Vec::new();
        grow(w, b, &mut Vec::new(), &mut out);
        out
    }

    fn cursor(mask: u32, b: u64) -> Option<usize> {
        (0..b as usize).find(|&i| mask >> i & 1 == 0)
    }

    /// Builds the full chain over universe `n >= w1*w2`.
    pub fn build(n: u64, b: [u64; 2], w: [u64; 2]) -> MicroRt {
        assert!(b[0] <= w[0] && b[1] <= w[1] && n >= w[0] * w[1]);
        let lists1 = ordered_lists(w[0], b[0]);
        let lists2 = ordered_lists(w[1], b[1]);
        let full = |b: u64| (1u32 << b) - 1;

        // Enumerate every (list, mask) combination with a live cursor, plus
        // one absorbing abort state at index 0.
        let mut states: Vec<Option<State>> = vec![None];
        let mut index = std::collections::HashMap::new();
        for l1 in &lists1 {
            for m1 in 0..full(b[0]) {
                for l2 in &lists2 {
                    for m2 in 0..full(b[1]) {
                        let s = State {
                            l1: l1.clone(),
                            m1,
                            l2: l2.clone(),
                            m2,
                        };
                        index.insert(s.clone(), states.len());
                        states.push(Some(s));
                    }
                }
            }
        }

        let iota = |v1: u64, v2: u64| (v1 - 1) * w[1] + (v2 - 1) + 1;
        let outputs: Vec<Output> = states
            .iter()
            .map(|s| match s {
                None => Output::Abort,
                Some(s) => {
                    let c1 = cursor(s.m1, b[0]).expect("live state");
                    let c2 = cursor(s.m2, b[1]).expect("live state");
                    Output::Item(iota(s.l1[c1], s.l2[c2]))
                }
            })
            .collect();

        let mut transitions: Vec<Vec<Vec<(usize, f64)>>> = Vec::with_capacity(states.len());
        for s in &states {
            let mut rows = Vec::with_capacity(n as usize);
            for a in 1..=n {
                rows.push(step(s, a, &b, &w, &lists2, &index));
            }
            transitions.push(rows);
        }

        let init: Vec<(usize, f64)> = {
            let p = 1.0 / (lists1.len() * lists2.len()) as f64;
            lists1
                .iter()
                .flat_map(|l1| {
                    lists2.iter().map(|l2| {
                        let s = State {
                            l1: l1.clone(),
                            m1: 0,
                            l2: l2.clone(),
                            m2: 0,
                        };
                        (index[&s], p)
                    })
                })
                .collect()
        };

        MicroRt {
            chain: TableChain {
                n,
                mode: RandomnessMode::RandomTape,
                outputs,
                init,
                transitions: TransitionKind::Stochastic(transitions),
            },
            b,
            w,
        }
    }

    fn step(
        state: &Option<State>,
        a: u64,
        b: &[u64; 2],
        w: &[u64; 2],
        lists2: &[Vec<u64>],
        index: &std::collections::HashMap<State, usize>,
    ) -> Vec<(usize, f64)> {
        let abort = vec![(0usize, 1.0)];
        let s = match state {
            None => return abort, // absorbing
            Some(s) => s,
        };
        let own = vec![(index[s], 1.0)];
        if a > w[0] * w[1] {
            return own; // outside the index map
        }
        let v1 = (a - 1) / w[1] + 1;
        let v2 = (a - 1) % w[1] + 1;
        let c1 = cursor(s.m1, b[0]).expect("live");
        let c2 = cursor(s.m2, b[1]).expect("live");
        let full = |bits: u64| (1u32 << bits) - 1;

        if v1 == s.l1[c1] && v2 == s.l2[c2] {
            let m2 = s.m2 | 1 << c2;
            if m2 == full(b[1]) {
                let m1 = s.m1 | 1 << c1;
                if m1 == full(b[0]) {
                    return abort;
                }
                // Fresh second-level list, uniformly over all orderings.
                let p = 1.0 / lists2.len() as f64;
                return lists2
                    .iter()
                    .map(|l2| {
                        let t = State {
                            l1: s.l1.clone(),
                            m1,
                            l2: l2.clone(),
                            m2: 0,
                        };
                        (index[&t], p)
                    })
                    .collect();
            }
            let t = State { m2, ..s.clone() };
            return vec![(index[&t], 1.0)];
        }
        if v1 != s.l1[c1] {
            if let Some(y) = s.l1.iter().position(|&p| p == v1) {
                let t = State {
                    m1: s.m1 | 1 << y,
                    ..s.clone()
                };
                return vec![(index[&t], 1.0)];
            }
            return own;
        }
        if let Some(y) = s.l2.iter().position(|&p| p == v2) {
            let t = State {
                m2: s.m2 | 1 << y,
                ..s.clone()
            };
            return vec![(index[&t], 1.0)];
        }
        own
    }
}

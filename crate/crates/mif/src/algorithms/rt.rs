use rand::RngCore;

use crate::algorithms::params::RtParams;
use crate::engine::{
    ceil_log2, sample_distinct, Automaton, BitSink, InitCtx, Output, RandomnessMode, StepCtx,
};

/// State of one recursion level: the random positions of this node's
/// children and a mark per child (set = past or unsafe, clear = active or
/// safe). The active child is the least unmarked entry.
struct Level {
    list: Vec<u64>,
    marks: Vec<bool>,
}

impl Level {
    fn cursor(&self) -> Option<usize> {
        self.marks.iter().position(|&m| !m)
    }
}

/// The adversarially robust random-tape algorithm: a traversal over the
/// leaves of an implicit random tree of height `d`. Level `i` keeps a list
/// `L_i` of `b_i` child positions out of `w_i`, sampled without repetition
/// from the tape, plus a mark vector `x_i`. The output is the item indexed
/// by the active branch; exhausting a level resamples it with fresh tape
/// randomness and moves the parent cursor, and exhausting the root aborts.
pub struct RtMif {
    params: RtParams,
    levels: Vec<Level>,
    aborted: bool,
}

impl RtMif {
    pub fn new(params: RtParams) -> Self {
        let levels = params
            .b
            .iter()
            .map(|&b| Level {
                list: Vec::new(),
                marks: vec![true; b as usize],
            })
            .collect();
        RtMif {
            params,
            levels,
            aborted: false,
        }
    }

    pub fn params(&self) -> &RtParams {
        &self.params
    }

    fn resample_level(&mut self, i: usize, rng: &mut dyn RngCore) {
        let b = self.params.b[i];
        let w = self.params.w[i];
        self.levels[i].list = sample_distinct(rng, b, w);
        self.levels[i].marks.fill(false);
    }
}

impl Automaton for RtMif {
    fn mode(&self) -> RandomnessMode {
        RandomnessMode::RandomTape
    }
    fn universe(&self) -> u64 {
        self.params.n
    }
    fn capacity(&self) -> u64 {
        self.params.ell
    }
    fn declared_bits(&self) -> u64 {
        self.params.declared_bits()
    }
    fn init(&mut self, mut ctx: InitCtx<'_>) {
        let rng = ctx
            .rng()
            .expect("randomness contract: RtMif samples lists at init");
        self.aborted = false;
        for i in 0..self.params.d {
            self.resample_level(i, rng);
        }
    }
    fn update(&mut self, item: u64, mut ctx: StepCtx<'_>) {
        if self.aborted {
            return;
        }
        let v = match self.params.iota_inv(item) {
            Some(v) => v,
            None => return, // outside the index map: can never be an output
        };
        let cursors: Vec<usize> = self
            .levels
            .iter()
            .map(|l| l.cursor().expect("cursor exists unless aborted"))
            .collect();

        let full_match = v
            .iter()
            .zip(&self.levels)
            .zip(&cursors)
            .all(|((&vi, l), &c)| vi == l.list[c]);

        if full_match {
            // The adversary hit the current leaf: retire it, cascading
            // upward through exhausted levels.
            for i in (0..self.params.d).rev() {
                self.levels[i].marks[cursors[i]] = true;
                if self.levels[i].marks.iter().all(|&m| m) {
                    if i == 0 {
                        self.aborted = true;
                        return;
                    }
                    self.resample_level(i, ctx.tape());
                } else {
                    break;
                }
            }
        } else {
            // First mismatching level: if the input named one of the listed
            // (still hidden) children there, mark that child unsafe.
            let j = (0..self.params.d)
                .find(|&i| v[i] != self.levels[i].list[cursors[i]])
                .expect("not a full match");
            if let Some(y) = self.levels[j].list.iter().position(|&p| p == v[j]) {
                self.levels[j].marks[y] = true;
            }
        }
    }
    fn output(&self) -> Output {
        if self.aborted {
            return Output::Abort;
        }
        let v: Vec<u64> = self
            .levels
            .iter()
            .map(|l| l.list[l.cursor().expect("cursor exists unless aborted")])
            .collect();
        Output::Item(self.params.iota(&v))
    }
    fn encode_state(&self, sink: &mut BitSink) {
        for (level, &w) in self.levels.iter().zip(&self.params.w) {
            let width = ceil_log2(w);
            for &p in &level.list {
                sink.push(p - 1, width);
            }
            for &m in &level.marks {
                sink.push_bit(m);
            }
        }
        sink.push_bit(self.aborted);
    }
}

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::adversaries::binomial_f64;
use crate::engine::{mix2, mix3, uniform_below};
use crate::reductions::ReductionError;

/// A total function from full-length streams to items; either the canonical
/// output map of a pseudo-deterministic algorithm or one sampled from it.
pub trait OutputFn {
    fn n(&self) -> u64;
    /// Full stream length the function is defined on.
    fn stream_len(&self) -> usize;
    fn eval(&mut self, stream: &[u64]) -> u64;
}

/// Least item of `[n]` absent from the stream.
pub struct CanonicalMinMissing {
    n: u64,
    len: usize,
}

impl CanonicalMinMissing {
    pub fn new(n: u64, len: usize) -> Self {
        assert!(
            (len as u64) < n,
            "needs len < n so an item is always missing"
        );
        CanonicalMinMissing { n, len }
    }
}

impl OutputFn for CanonicalMinMissing {
    fn n(&self) -> u64 {
        self.n
    }
    fn stream_len(&self) -> usize {
        self.len
    }
    fn eval(&mut self, stream: &[u64]) -> u64 {
        debug_assert_eq!(stream.len(), self.len);
        let mut present = vec![false; self.len + 2];
        for &e in stream {
            if e as usize <= self.len + 1 {
                present[e as usize] = true;
            }
        }
        (1..=self.len as u64 + 1)
            .find(|&v| !present[v as usize])
            .expect("len < n")
    }
}

/// Wraps an output function with independent per-call corruption: with
/// probability `eps` the output is replaced by a uniformly random wrong
/// item. The corruption is keyed by hashing the argument, so repeated calls
/// agree and the wrapper still defines a function.
pub struct NoisyOutputFn<B: OutputFn> {
    inner: B,
    eps: f64,
    seed: u64,
}

/// Convenience constructor matching the shape of the other fixtures.
pub fn noisy<B: OutputFn>(inner: B, eps: f64, seed: u64) -> NoisyOutputFn<B> {
    assert!((0.0..=1.0).contains(&eps));
    NoisyOutputFn { inner, eps, seed }
}

impl<B: OutputFn> OutputFn for NoisyOutputFn<B> {
    fn n(&self) -> u64 {
        self.inner.n()
    }
    fn stream_len(&self) -> usize {
        self.inner.stream_len()
    }
    fn eval(&mut self, stream: &[u64]) -> u64 {
        let v = self.inner.eval(stream);
        let mut h = self.seed;
        for &e in stream {
            h = mix2(h, e);
        }
        let coin = uniform_below(mix2(h, 0xc0ffee), 1 << 53) as f64 / (1u64 << 53) as f64;
        if coin >= self.eps {
            return v;
        }
        let n = self.inner.n();
        if n <= 1 {
            return v;
        }
        let r = uniform_below(mix2(h, 0xbad), n - 1) + 1;
        if r >= v {
            r + 1
        } else {
            r
        }
    }
}

/// Random thresholds in `[1, 2)`, lazily addressed by `(level, round)`.
#[derive(Debug, Clone)]
pub struct ThresholdMatrix {
    seed: u64,
}

impl ThresholdMatrix {
    pub fn new(seed: u64) -> Self {
        ThresholdMatrix { seed }
    }

    pub fn get(&self, k: usize, h: usize) -> f64 {
        let w = mix3(self.seed, k as u64, h as u64);
        1.0 + (w >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Parameters for FindCommonOutputs: amplification copies `p`, interval
/// count `d`, interval lengths `t[0]=t_1 .. t[d-1]=t_d` (summing to the
/// stream length, with `t_1 >= ell/2`), target set sizes
/// `w_k = 2^(k-1)*(t_1+1)`, and the error ladder `eps_k`.
#[derive(Debug, Clone)]
pub struct FcoParams {
    pub n: u64,
    pub ell: u64,
    pub z: u64,
    pub delta: f64,
    pub p: u64,
    pub d: usize,
    pub t: Vec<u64>,
    pub w: Vec<u64>,
    pub eps: f64,
    pub eps_k: Vec<f64>,
    /// Sorted valid-output set `S`.
    pub s: Vec<u64>,
    /// Desk-scale guard on subset enumeration per round.
    pub max_enumeration: u64,
}

/// Derives the parameter block from the algorithm's footprint: space `z`,
/// error `delta <= 1/3`, and its valid-output count `|S|`. Rejects regimes
/// where the first interval would drop below `ell/2`.
pub fn fco_params(
    n: u64,
    ell: u64,
    z: u64,
    delta: f64,
    s: Vec<u64>,
) -> Result<FcoParams, ReductionError> {
    if z < 1 || !(0.0..=1.0 / 3.0).contains(&delta) || s.is_empty() {
        return Err(ReductionError::BadParameters {
            reason: format!("need z >= 1, 0 <= delta <= 1/3, nonempty S (z={z}, delta={delta})"),
        });
    }
    let s_count = s.len() as f64;
    let log_s = (64.0 * s_count).log2();
    let p = if delta == 0.0 {
        1
    } else {
        let log_inv = (1.0 / (2.0 * delta)).log2();
        let by_sqrt = (10.0 * ell as f64 * log_s / (3.0 * z as f64 * log_inv)).sqrt();
        let by_lin = 30.0 * log_s / log_inv;
        (by_sqrt.max(by_lin).ceil() as u64).max(1)
    };
    let zp = z * p;
    let d = 1 + (ell / (18 * zp)) as usize;
    let t_mid = (4.0 * std::f64::consts::LN_2 * (zp + 2) as f64).ceil() as u64;
    if t_mid > 9 * zp {
        return Err(ReductionError::BadParameters {
            reason: format!("interval length {t_mid} exceeds 9*z*p = {}", 9 * zp),
        });
    }
    let tail: u64 = (d as u64 - 1) * t_mid;
    if tail >= ell || ell - tail < ell.div_ceil(2) {
        return Err(ReductionError::BadParameters {
            reason: format!(
                "t_1 = {} below ell/2 = {}; z is outside the workable range",
                ell as i64 - tail as i64,
                ell as f64 / 2.0
            ),
        });
    }
    let t_1 = ell - tail;
    let mut t = vec![t_1];
    t.extend(std::iter::repeat_n(t_mid, d - 1));
    let eps = if delta == 0.0 {
        0.0
    } else {
        (2.0 * delta).powf(p as f64 / 30.0)
    };
    let mut sorted = s;
    sorted.sort_unstable();
    sorted.dedup();
    let w = w_ladder(t_1, d);
    let eps_k: Vec<f64> = (0..d)
        .map(|k| 2f64.powi(k as i32) * (t_1 + 1) as f64 * (64.0 * s_count).powi(k as i32) * eps)
        .collect();
    Ok(FcoParams {
        n,
        ell,
        z,
        delta,
        p,
        d,
        t,
        w,
        eps,
        eps_k,
        s: sorted,
        max_enumeration: 500_000,
    })
}

/// `w_k = 2^(k-1) * (t_1 + 1)`, saturating at u64::MAX for the deep levels
/// that are formula-only anyway (executing one would be rejected by the
/// `|S| >= w_k` check).
fn w_ladder(t_1: u64, d: usize) -> Vec<u64> {
    (0..d)
        .map(|k| {
            if k >= 64 {
                u64::MAX
            } else {
                (t_1 as u128 + 1)
                    .saturating_mul(1u128 << k)
                    .min(u64::MAX as u128) as u64
            }
        })
        .collect()
}

impl FcoParams {
    /// Explicit micro-scale parameters for integration tests: interval
    /// lengths are given directly and must sum to the stream length.
    pub fn micro(n: u64, t: Vec<u64>, s: Vec<u64>) -> Result<FcoParams, ReductionError> {
        if t.is_empty() || t.contains(&0) {
            return Err(ReductionError::BadParameters {
                reason: "need at least one nonzero interval".into(),
            });
        }
        let ell: u64 = t.iter().sum();
        let d = t.len();
        let t_1 = t[0];
        let mut sorted = s;
        sorted.sort_unstable();
        sorted.dedup();
        let w = w_ladder(t_1, d);
        Ok(FcoParams {
            n,
            ell,
            z: 1,
            delta: 0.0,
            p: 1,
            d,
            t: t.clone(),
            w,
            eps: 0.0,
            eps_k: vec![0.0; d],
            s: sorted,
            max_enumeration: 500_000,
        })
    }

    /// Stream positions consumed by intervals `d, d-1, ..., k+1`; the
    /// required prefix length when calling at level `k`.
    pub fn prefix_len(&self, k: usize) -> usize {
        self.t[k..].iter().sum::<u64>() as usize
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "ell = {}", self.ell);
        let _ = writeln!(out, "z = {}", self.z);
        let _ = writeln!(out, "delta = {}", self.delta);
        let _ = writeln!(out, "p = {}", self.p);
        let _ = writeln!(out, "d = {}", self.d);
        let _ = writeln!(out, "t = {:?}", self.t);
        let _ = writeln!(out, "w = {:?}", self.w);
        let _ = writeln!(out, "eps = {}", self.eps);
        let _ = writeln!(out, "s_size = {}", self.s.len());
        out
    }
}

/// One level/round record of an FCO run, for the CSV trace.
#[derive(Debug, Clone)]
pub struct FcoTraceRow {
    pub k: usize,
    pub h: usize,
    pub q_size: usize,
    pub p_size: usize,
    pub exit: &'static str,
}

#[derive(Debug, Clone)]
pub struct FcoResult {
    /// Exactly `w_k` items.
    pub set: Vec<u64>,
    /// This call returned through a failure exit.
    pub failed: bool,
    /// Any call in the recursion tree failed.
    pub any_failure: bool,
    pub trace: Vec<FcoTraceRow>,
}

/// FindCommonOutputs. At the base level it chases the output function
/// through a greedy chain padded with literal 1s; above that it gathers
/// recursive sets for sorted `t_k`-subsets of the current candidate pool,
/// keeps the items whose frequency clears a randomized threshold, and grows
/// the pool for up to four rounds. Every exit returns exactly `w_k` items.
pub fn fco(
    b: &mut dyn OutputFn,
    c: &ThresholdMatrix,
    x: &[u64],
    k: usize,
    prm: &FcoParams,
) -> Result<FcoResult, ReductionError> {
    if k < 1 || k > prm.d {
        return Err(ReductionError::BadParameters {
            reason: format!("level k={k} out of range"),
        });
    }
    if x.len() != prm.prefix_len(k) {
        return Err(ReductionError::BadParameters {
            reason: format!(
                "prefix length {} != expected {}",
                x.len(),
                prm.prefix_len(k)
            ),
        });
    }
    if (prm.s.len() as u64) < prm.w[k - 1] {
        return Err(ReductionError::BadParameters {
            reason: format!("|S| = {} below w_k = {}", prm.s.len(), prm.w[k - 1]),
        });
    }
    let mut memo: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    run_level(b, c, x, k, prm, &mut memo)
}

fn run_level(
    b: &mut dyn OutputFn,
    c: &ThresholdMatrix,
    x: &[u64],
    k: usize,
    prm: &FcoParams,
    memo: &mut HashMap<Vec<u64>, Vec<u64>>,
) -> Result<FcoResult, ReductionError> {
    let w_k = prm.w[k - 1] as usize;
    let t_k = prm.t[k - 1];
    if k == 1 {
        let t_1 = t_k as usize;
        let mut chain: Vec<u64> = Vec::with_capacity(t_1 + 1);
        let mut stream = Vec::with_capacity(b.stream_len());
        for _ in 0..=t_1 {
            stream.clear();
            stream.extend_from_slice(x);
            stream.extend_from_slice(&chain);
            stream.resize(b.stream_len(), 1);
            chain.push(b.eval(&stream));
        }
        let distinct: BTreeSet<u64> = chain.iter().copied().collect();
        if distinct.len() == t_1 + 1 {
            return Ok(FcoResult {
                set: chain,
                failed: false,
                any_failure: false,
                trace: vec![FcoTraceRow {
                    k,
                    h: 0,
                    q_size: t_1 + 1,
                    p_size: 0,
                    exit: "ok",
                }],
            });
        }
        return Ok(FcoResult {
            set: prm.s[..w_k].to_vec(),
            failed: true,
            any_failure: true,
            trace: vec![FcoTraceRow {
                k,
                h: 0,
                q_size: distinct.len(),
                p_size: 0,
                exit: "fail",
            }],
        });
    }

    let mut any_failure = false;
    let mut trace = Vec::new();
    let recurse = |y: &[u64],
                   b: &mut dyn OutputFn,
                   memo: &mut HashMap<Vec<u64>, Vec<u64>>,
                   any_failure: &mut bool,
                   trace: &mut Vec<FcoTraceRow>|
     -> Result<Vec<u64>, ReductionError> {
        if let Some(hit) = memo.get(y) {
            return Ok(hit.clone());
        }
        let mut ext = x.to_vec();
        ext.extend_from_slice(y);
        let sub = run_level(b, c, &ext, k - 1, prm, memo)?;
        *any_failure |= sub.any_failure;
        trace.extend(sub.trace);
        memo.insert(y.to_vec(), sub.set.clone());
        Ok(sub.set)
    };

    // Q_0 seeds from the literal first t_k integers.
    let y0: Vec<u64> = (1..=t_k).collect();
    let t0 = recurse(&y0, b, memo, &mut any_failure, &mut trace)?;
    let mut q: BTreeSet<u64> = t0.into_iter().collect();

    for h in 1..=4usize {
        let pool: Vec<u64> = q.iter().copied().collect();
        let subsets = binomial_f64(pool.len() as u64, t_k);
        if subsets > prm.max_enumeration as f64 {
            return Err(ReductionError::BadParameters {
                reason: format!(
                    "C({}, {t_k}) = {subsets:.3e} subsets at level {k} round {h} exceed the cap",
                    pool.len()
                ),
            });
        }
        let mut freq: HashMap<u64, u64> = HashMap::new();
        let mut err: Option<ReductionError> = None;
        for_each_subset(&pool, t_k as usize, &mut |y| {
            if err.is_some() {
                return;
            }
            match recurse(y, b, memo, &mut any_failure, &mut trace) {
                Ok(t_y) => {
                    for v in t_y {
                        *freq.entry(v).or_default() += 1;
                    }
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let theta = c.get(k, h) * prm.w[k - 2] as f64 / (16.0 * prm.s.len() as f64);
        let cutoff = theta * subsets;
        let p_h: Vec<u64> = prm
            .s
            .iter()
            .copied()
            .filter(|j| freq.get(j).copied().unwrap_or(0) as f64 >= cutoff)
            .collect();
        let p_len = p_h.len();
        q.extend(p_h);
        trace.push(FcoTraceRow {
            k,
            h,
            q_size: q.len(),
            p_size: p_len,
            exit: "round",
        });
        if q.len() >= w_k {
            let set: Vec<u64> = q.iter().copied().take(w_k).collect();
            trace.push(FcoTraceRow {
                k,
                h,
                q_size: q.len(),
                p_size: p_len,
                exit: "ok",
            });
            return Ok(FcoResult {
                set,
                failed: false,
                any_failure,
                trace,
            });
        }
    }
    trace.push(FcoTraceRow {
        k,
        h: 4,
        q_size: q.len(),
        p_size: 0,
        exit: "fail",
    });
    Ok(FcoResult {
        set: prm.s[..w_k].to_vec(),
        failed: true,
        any_failure: true,
        trace,
    })
}

/// Visit every sorted `t`-subset of the (sorted) pool.
fn for_each_subset(pool: &[u64], t: usize, visit: &mut dyn FnMut(&[u64])) {
    fn descend(pool: &[u64], t: usize, from: usize, buf: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if buf.len() == t {
            f(buf);
            return;
        }
        let need = t - buf.len();
        for i in from..=pool.len().saturating_sub(need) {
            buf.push(pool[i]);
            descend(pool, t, i + 1, buf, f);
            buf.pop();
        }
    }
    if t <= pool.len() {
        descend(pool, t, 0, &mut Vec::with_capacity(t), visit);
    }
}

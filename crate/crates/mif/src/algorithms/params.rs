use std::fmt::Write as _;

use crate::algorithms::AlgorithmError;
use crate::engine::{ceil_log2, Instance};

/// Rounding exponent for mixed powers: the least `u` in `[0, k]` with
/// `alpha^k <= ceil(alpha)^u * floor(alpha)^(k-u) <= 2 * alpha^k`.
///
/// The closed form `u = ceil(k * log(alpha/floor) / log(ceil/floor))`
/// realizes the guarantee; a neighbor scan absorbs any floating-point edge.
pub fn fract_power_round_u(alpha: f64, k: u32) -> u32 {
    assert!(alpha >= 1.0);
    if k == 0 || alpha.fract() == 0.0 {
        return 0;
    }
    let fl = alpha.floor();
    let ce = alpha.ceil();
    let raw = (k as f64 * (alpha / fl).log2() / (ce / fl).log2()).ceil();
    let guess = (raw.max(0.0) as u32).min(k);
    let ok = |u: u32| {
        let prod = ce.powi(u as i32) * fl.powi((k - u) as i32);
        let target = alpha.powi(k as i32);
        target <= prod && prod <= 2.0 * target
    };
    if ok(guess) {
        return guess;
    }
    for u in (guess.saturating_sub(1)..=(guess + 1).min(k)).chain(0..=k) {
        if ok(u) {
            return u;
        }
    }
    unreachable!("no valid rounding exponent for alpha={alpha}, k={k}")
}

/// The parameter tuple of the recursive random-tape algorithm: recursion
/// depth `d`, branching ratio `alpha`, per-level list lengths `b[i]` and
/// position ranges `w[i]`, plus the injective index map realized as a
/// mixed-radix encoding of `[w_1] x ... x [w_d]` into `[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RtParams {
    pub n: u64,
    pub ell: u64,
    pub delta: f64,
    pub d: usize,
    pub alpha: f64,
    /// `b[0] = b_1, ..., b[d-1] = b_d`.
    pub b: Vec<u64>,
    /// `w[0] = w_1 = 16*ell; w[i] = b_{i+1} * ... * b_d` for `i >= 1`.
    pub w: Vec<u64>,
}

/// Derives the full parameter tuple for an instance. Requires `ell >= 4` and
/// `ell <= n / 64`; outside that range the deterministic bitmap is the right
/// tool and this returns an error saying so.
pub fn rt_params(inst: Instance) -> Result<RtParams, AlgorithmError> {
    let Instance { n, ell, delta } = inst;
    if ell < 4 || ell > n / 64 {
        return Err(AlgorithmError::Unsupported {
            reason: format!("need 4 <= ell <= n/64 (got n={n}, ell={ell}); use DetBitmap instead"),
        });
    }

    let lg = |x: u64| (x as f64).log2();
    let ceil_log_ell = ceil_log2(ell) as u64;
    let d_cap = (2.0 * lg(n / 4) / lg(16 * ell)).floor() as u64;
    let d = ceil_log_ell.min(d_cap).max(2) as usize;

    let alpha = if ceil_log_ell < d_cap {
        2.0
    } else {
        (4.0 * ell as f64).powf(2.0 / (d as f64 - 1.0))
            / (n as f64 / 4.0).powf(2.0 / (d as f64 * (d as f64 - 1.0)))
    };

    // Middle levels 2..=d-1: u copies of ceil(alpha), then floor(alpha).
    let mids = (d - 2) as u32;
    let u = fract_power_round_u(alpha, mids);
    let mut b = Vec::with_capacity(d);
    let b1_cap = ell + 1;
    let b1 = if delta <= 0.0 {
        b1_cap
    } else {
        let extra =
            (8.0 * alpha).ceil() as u64 + (3.0 * (1.0 / delta).log2()).ceil().max(0.0) as u64;
        b1_cap.min(extra)
    };
    b.push(b1);
    for i in 0..mids {
        b.push(if i < u {
            alpha.ceil() as u64
        } else {
            alpha.floor() as u64
        });
    }
    let b_d = (ell as f64 / alpha.powi(d as i32 - 1)).ceil() as u64;
    b.push(b_d.max(1));

    let mut w = vec![0u64; d];
    w[d - 1] = b[d - 1];
    for i in (1..d - 1).rev() {
        w[i] = b[i] * w[i + 1];
    }
    w[0] = 16 * ell;

    let params = RtParams {
        n,
        ell,
        delta,
        d,
        alpha,
        b,
        w,
    };
    params.validate()?;
    Ok(params)
}

impl RtParams {
    /// The three conditions the parameter derivation promises, checked
    /// exactly: `prod(b_2..b_d)` within `[ell/alpha, 4*ell/alpha]`, and
    /// `prod(w_i) <= n`; plus monotone middle levels from the rounding rule.
    pub fn validate(&self) -> Result<(), AlgorithmError> {
        let fail = |reason: String| Err(AlgorithmError::ParameterInvariant { reason });
        if self.b.len() != self.d || self.w.len() != self.d || self.d < 2 {
            return fail(format!("shape: d={} b={:?} w={:?}", self.d, self.b, self.w));
        }
        let tail_prod: f64 = self.b[1..].iter().map(|&x| x as f64).product();
        let lo = self.ell as f64 / self.alpha;
        let hi = 4.0 * self.ell as f64 / self.alpha;
        if tail_prod < lo || tail_prod > hi {
            return fail(format!(
                "prod(b_2..b_d) = {tail_prod} outside [{lo}, {hi}] at n={}, ell={}",
                self.n, self.ell
            ));
        }
        let w_prod: f64 = self.w.iter().map(|&x| x as f64).product();
        if w_prod > self.n as f64 {
            return fail(format!("prod(w) = {w_prod} exceeds n = {}", self.n));
        }
        for win in self.b[1..self.d - 1].windows(2) {
            if win[0] < win[1] {
                return fail(format!("middle levels not non-increasing: {:?}", self.b));
            }
        }
        for (i, (&bi, &wi)) in self.b.iter().zip(&self.w).enumerate() {
            if bi < 1 || bi > wi {
                return fail(format!("level {}: b={bi} not in [1, w={wi}]", i + 1));
            }
        }
        Ok(())
    }

    /// Total items addressable by the index map; inputs above this are
    /// ignored by the algorithm.
    pub fn index_range(&self) -> u64 {
        self.w.iter().product()
    }

    /// Mixed-radix index map `[w_1] x ... x [w_d] -> [n]`; injective by
    /// construction.
    pub fn iota(&self, v: &[u64]) -> u64 {
        debug_assert_eq!(v.len(), self.d);
        let mut a = 0u64;
        for (vi, wi) in v.iter().zip(&self.w) {
            debug_assert!((1..=*wi).contains(vi));
            a = a * wi + (vi - 1);
        }
        a + 1
    }

    /// Inverse of [`RtParams::iota`]; `None` when `a` is out of range.
    pub fn iota_inv(&self, a: u64) -> Option<Vec<u64>> {
        if a < 1 || a > self.index_range() {
            return None;
        }
        let mut rem = a - 1;
        let mut v = vec![0u64; self.d];
        for i in (0..self.d).rev() {
            v[i] = rem % self.w[i] + 1;
            rem /= self.w[i];
        }
        Some(v)
    }

    /// Exact storage for all lists and mark vectors: `sum b_i *
    /// (ceil(log2 w_i) + 1)` plus one abort flag.
    pub fn declared_bits(&self) -> u64 {
        let lists: u64 = self
            .b
            .iter()
            .zip(&self.w)
            .map(|(&b, &w)| b * (ceil_log2(w) as u64 + 1))
            .sum();
        lists + 1
    }

    /// Human-readable key-value block; stable across runs for golden tests.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "ell = {}", self.ell);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "d = {}", self.d);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "b = {:?}", self.b);
        let _ = writeln!(s, "w = {:?}", self.w);
        let _ = writeln!(s, "index_range = {}", self.index_range());
        let _ = writeln!(s, "declared_bits = {}", self.declared_bits());
        s
    }
}

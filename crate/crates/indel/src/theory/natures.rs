use serde::{Deserialize, Serialize};

use crate::edit::{apply_edit_pattern, EditOp, EditPattern};
use crate::error::{Error, Result};
use crate::seq::{Alphabet, Sequence};
use crate::sim::{gen_ltrrid, gen_pre_ess, RpesParams};

pub const MAX_NATURES_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturesSecret {
    /// Mean of `-log2 P(e | x, y) / n` over the trials.
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

fn log2_op_weight(op: &EditOp, eps: f64, del: f64, a: f64) -> f64 {
    match op {
        EditOp::NoOp => (1.0 - eps - del).log2(),
        EditOp::Delete => del.log2(),
        EditOp::Insert(_) => (eps / a).log2(),
    }
}

/// `log2 P(y | x)` up to the common end-of-stream factor, summing over every
/// pattern that maps `x` to `y`.
fn log2_likelihood(x: &[u16], y: &[u16], eps: f64, del: f64, a: f64) -> f64 {
    let (n, m) = (x.len(), y.len());
    let (wi, wd, wk) = (eps / a, del, 1.0 - eps - del);
    // Scale each row to stay clear of underflow.
    let mut row = vec![0.0f64; m + 1];
    let mut log_scale = 0.0;
    row[0] = 1.0;
    for j in 1..=m {
        row[j] = row[j - 1] * wi;
    }
    for i in 1..=n {
        let mut next = vec![0.0f64; m + 1];
        next[0] = row[0] * wd;
        for j in 1..=m {
            let mut v = row[j] * wd + next[j - 1] * wi;
            if x[i - 1] == y[j - 1] {
                v += row[j - 1] * wk;
            }
            next[j] = v;
        }
        let peak = next.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            for v in &mut next {
                *v /= peak;
            }
            log_scale += peak.log2();
        }
        row = next;
    }
    row[m].log2() + log_scale
}

fn log2_pattern(e: &EditPattern, eps: f64, del: f64, a: f64) -> f64 {
    e.ops().iter().map(|op| log2_op_weight(op, eps, del, a)).sum()
}

/// Monte Carlo estimate of the per-symbol uncertainty left in the edit pattern
/// once both sequences are known.
pub fn estimate_natures_secret(n: usize, a: u32, eps: f64, del: f64, trials: usize, seed: u64) -> Result<NaturesSecret> {
    if n > MAX_NATURES_LEN {
        return Err(Error::InstanceTooLarge("posterior enumeration needs n <= 12"));
    }
    if n == 0 || trials == 0 {
        return Err(Error::DomainError("need n >= 1 and at least one trial"));
    }
    let al = Alphabet::new(a)?;
    let af = a as f64;
    let mut samples = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(t);
        let x = gen_pre_ess(n, al, s);
        let (e, y) = gen_ltrrid(&x, &RpesParams { n, a, eps, del, seed: s })?;
        debug_assert_eq!(apply_edit_pattern(&x, &e)?, y);
        let bits = if e.edits() == 0 {
            0.0
        } else {
            log2_likelihood(x.symbols(), y.symbols(), eps, del, af) - log2_pattern(&e, eps, del, af)
        };
        samples.push(bits.max(0.0) / n as f64);
    }
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    Ok(NaturesSecret { estimate: mean, stderr: (var / trials as f64).sqrt(), trials })
}

/// Posterior probability of `e` given `x` and `y = e(x)`.
pub fn posterior(x: &Sequence, e: &EditPattern, eps: f64, del: f64) -> Result<f64> {
    let y = apply_edit_pattern(x, e)?;
    let a = x.alphabet().size() as f64;
    Ok((log2_pattern(e, eps, del, a) - log2_likelihood(x.symbols(), y.symbols(), eps, del, a)).exp2())
}

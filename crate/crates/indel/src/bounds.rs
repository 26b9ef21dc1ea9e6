use std::collections::BTreeMap;
use std::f64::consts::LOG2_E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Constant of the second-order correction in the random-process lower bound.
pub const CORRECTION_COEFF: f64 = 56.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Rpes,
    Apes,
}

/// A rate bound in bits per source symbol with its explicit terms. Terms of
/// unknown constant size are not evaluated; `order` names them instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub value: f64,
    pub terms: BTreeMap<String, f64>,
    pub tau: Option<f64>,
    pub truncation_error: f64,
    /// Set when the value is negative; the bound only speaks for small rates.
    pub negative: bool,
    pub order: String,
}

impl RateBound {
    fn from_terms(terms: &[(&str, f64)], tau: Option<f64>, truncation_error: f64, order: &str) -> Self {
        let terms: BTreeMap<String, f64> = terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let value = terms.values().sum();
        RateBound { value, terms, tau, truncation_error, negative: value < 0.0, order: order.to_string() }
    }

    pub fn term(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(0.0)
    }
}

fn check_rate(p: f64, what: &'static str) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::DomainError(what))
    }
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    check_rate(p, "probability must lie in [0, 1]")?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

fn h(p: f64) -> f64 {
    binary_entropy(p).unwrap_or(f64::NAN)
}

/// Run-length constant `sum_l q^(l-1) (1-q)^2 l log2 l` with `q = 1/a`,
/// summed until the certified tail drops below `tol`.
pub fn c_constant(a: u32, tol: f64) -> Result<(f64, f64)> {
    if a < 2 {
        return Err(Error::DomainError("alphabet size must be at least 2"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::DomainError("tolerance must be positive"));
    }
    let q = 1.0 / a as f64;
    let w = (1.0 - q) * (1.0 - q);
    let term = |l: f64| w * q.powf(l - 1.0) * l * l.log2();
    let mut sum = 0.0;
    let mut l = 2.0f64;
    loop {
        let t = term(l);
        sum += t;
        // Successive ratios q (l+1)log(l+1) / (l log l) decrease in l, so the
        // tail after l is at most a geometric series in the next ratio.
        let next = term(l + 1.0);
        let r = q * ((l + 2.0) * (l + 2.0).log2()) / ((l + 1.0) * (l + 1.0).log2());
        if r < 1.0 {
            let tail = next / (1.0 - r);
            if tail <= tol {
                return Ok((sum, tail));
            }
        }
        l += 1.0;
        if l > 1e7 {
            return Err(Error::DomainError("series did not converge"));
        }
    }
}

fn c_value(a: u32) -> Result<(f64, f64)> {
    c_constant(a, DEFAULT_TOL)
}

fn check_pair(eps: f64, del: f64) -> Result<()> {
    check_rate(eps, "insertion rate must lie in [0, 1]")?;
    check_rate(del, "deletion rate must lie in [0, 1]")?;
    if eps + del >= 1.0 {
        return Err(Error::DomainError("insertion and deletion rates must sum below 1"));
    }
    Ok(())
}

pub fn rpes_lower_bound(eps: f64, del: f64, a: u32, tau: f64) -> Result<RateBound> {
    check_pair(eps, del)?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::DomainError("tau must be positive"));
    }
    let (c, trunc) = c_value(a)?;
    let m = eps.max(del);
    Ok(RateBound::from_terms(
        &[
            ("H_del", h(del)),
            ("H_ins", h(eps)),
            ("ins_log_a", eps * (a as f64).log2()),
            ("c_term", -(eps + del) * c),
            ("correction", -CORRECTION_COEFF * m.powf(2.0 - tau)),
        ],
        Some(tau),
        trunc * (eps + del),
        "o(n) in the source length",
    ))
}

fn check_apes(eps: f64, del: f64, a: u32) -> Result<()> {
    if a < 3 {
        return Err(Error::DomainError("the arbitrary-edit bound needs an alphabet of at least 3"));
    }
    check_rate(eps, "insertion rate must be non-negative")?;
    check_rate(del, "deletion rate must lie in [0, 1/2)")?;
    if 2.0 * del >= 1.0 {
        return Err(Error::DomainError("deletion rate must lie in [0, 1/2)"));
    }
    Ok(())
}

/// Counting bound for arbitrary edits, before any expansion.
pub fn apes_lower_bound(eps: f64, del: f64, a: u32) -> Result<RateBound> {
    check_apes(eps, del, a)?;
    let kept = 1.0 - del;
    Ok(RateBound::from_terms(
        &[
            ("H_del", kept * h(del / kept)),
            ("H_ins", (kept + eps) * h(eps / (kept + eps))),
            ("ins_log_a", eps * ((a - 2) as f64).log2()),
            ("c_term", 0.0),
            ("correction", 0.0),
        ],
        None,
        0.0,
        "o(n) in the source length",
    ))
}

/// First-order expansion of [`apes_lower_bound`]; second-order terms are
/// left out.
pub fn apes_lower_bound_expanded(eps: f64, del: f64, a: u32) -> Result<RateBound> {
    check_apes(eps, del, a)?;
    Ok(RateBound::from_terms(
        &[
            ("H_del", h(del)),
            ("H_ins", h(eps)),
            ("ins_log_a", eps * (a as f64).log2()),
            ("c_term", -2.0 / a as f64 * eps),
            ("correction", 0.0),
        ],
        None,
        0.0,
        "O(max(eps, del)^2)",
    ))
}

pub fn insertion_only_count_rate(eps: f64, a: u32) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::DomainError("insertion rate must be non-negative"));
    }
    if a < 2 {
        return Err(Error::DomainError("alphabet size must be at least 2"));
    }
    Ok((1.0 + eps) * h(eps / (1.0 + eps)) + eps * ((a - 1) as f64).log2())
}

pub fn deletion_only_count_rate(del: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&del) {
        return Err(Error::DomainError("deletion rate must lie in [0, 1/2)"));
    }
    Ok((1.0 - del) * h(del / (1.0 - del)))
}

pub fn achievable_upper(eps: f64, del: f64, a: u32, model: Model, tau: f64) -> Result<RateBound> {
    check_pair(eps, del)?;
    if a < 2 {
        return Err(Error::DomainError("alphabet size must be at least 2"));
    }
    let log_a = (a as f64).log2();
    let base = [("H_del", h(del)), ("H_ins", h(eps)), ("ins_log_a", eps * log_a)];
    match model {
        Model::Apes => Ok(RateBound::from_terms(
            &[base[0], base[1], base[2], ("c_term", 0.0), ("correction", LOG2_E * eps * eps)],
            None,
            0.0,
            "O(max(eps, del)^3)",
        )),
        Model::Rpes => {
            if tau.is_nan() || tau <= 0.0 {
                return Err(Error::DomainError("tau must be positive"));
            }
            let m = eps.max(del);
            Ok(RateBound::from_terms(
                &[base[0], base[1], base[2], ("c_term", 0.0), ("correction", (log_a + LOG2_E - 2.0) * m.powf(2.0 - tau))],
                Some(tau),
                0.0,
                "O(max(eps, del)^3)",
            ))
        }
    }
}

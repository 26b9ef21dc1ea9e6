use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{Sequence, Symbol};

pub const MAX_ENUM_LEN: usize = 14;
pub const MAX_ENUM_ALPHABET: u32 = 4;

// Sequences of up to 14 symbols over at most 4 letters, 2 bits each, with the
// length in the high bits.
fn pack(s: &[Symbol]) -> u64 {
    let mut v = (s.len() as u64) << 32;
    for (k, &c) in s.iter().enumerate() {
        v |= (c as u64) << (2 * k);
    }
    v
}

fn unpack(v: u64) -> Vec<Symbol> {
    let len = (v >> 32) as usize;
    (0..len).map(|k| ((v >> (2 * k)) & 3) as Symbol).collect()
}

/// All sequences reachable from `x` with exactly `max_del` deletions and
/// `max_ins` insertions. Deletions are applied first; any interleaving
/// reaches the same set.
pub fn enumerate_post_edit_set(x: &Sequence, max_ins: usize, max_del: usize) -> Result<Vec<Sequence>> {
    let a = x.alphabet();
    if a.size() > MAX_ENUM_ALPHABET {
        return Err(Error::InstanceTooLarge("enumeration needs an alphabet of at most 4"));
    }
    if x.len() + max_ins > MAX_ENUM_LEN {
        return Err(Error::InstanceTooLarge("enumeration needs |x| + max_ins <= 14"));
    }
    if max_del > x.len() {
        return Err(Error::DomainError("more deletions than source symbols"));
    }
    let mut level: HashSet<u64> = HashSet::from([pack(x.symbols())]);
    for _ in 0..max_del {
        let mut next = HashSet::with_capacity(level.len() * 4);
        for &v in &level {
            let s = unpack(v);
            for k in 0..s.len() {
                // Deleting any symbol of a run gives the same result.
                if k > 0 && s[k] == s[k - 1] {
                    continue;
                }
                let mut t = s.clone();
                t.remove(k);
                next.insert(pack(&t));
            }
        }
        level = next;
    }
    for _ in 0..max_ins {
        let mut next = HashSet::with_capacity(level.len() * 8);
        for &v in &level {
            let s = unpack(v);
            for k in 0..=s.len() {
                for c in 0..a.size() as Symbol {
                    let mut t = s.clone();
                    t.insert(k, c);
                    next.insert(pack(&t));
                }
            }
        }
        level = next;
    }
    let mut out: Vec<Vec<Symbol>> = level.into_iter().map(unpack).collect();
    out.sort_by(|p, q| p.len().cmp(&q.len()).then_with(|| p.cmp(q)));
    out.into_iter().map(|s| Sequence::new(a, s)).collect()
}

/// Size of the set `enumerate_post_edit_set` would return, without building
/// it. A sequence of length `n - max_del + max_ins` is reachable exactly when
/// its longest common subsequence with `x` has at least `n - max_del`
/// symbols, so this counts such sequences by running the LCS recurrence over
/// all targets at once, one target symbol per step. The state is the LCS row,
/// stored as its 0/1 increments, so there are at most `2^n` states.
pub fn post_edit_set_size(x: &Sequence, max_ins: usize, max_del: usize) -> Result<u64> {
    let n = x.len();
    if n > 63 {
        return Err(Error::InstanceTooLarge("counting needs |x| <= 63"));
    }
    if max_del > n {
        return Err(Error::DomainError("more deletions than source symbols"));
    }
    let m = n - max_del + max_ins;
    let a = x.alphabet().size() as Symbol;
    let xs = x.symbols();
    let mut states: HashMap<u64, u64> = HashMap::from([(0, 1)]);
    let mut row = vec![0u32; n + 1];
    let mut next_row = vec![0u32; n + 1];
    for _ in 0..m {
        let mut next: HashMap<u64, u64> = HashMap::with_capacity(states.len() * 2);
        for (&mask, &count) in &states {
            for i in 0..n {
                row[i + 1] = row[i] + ((mask >> i) & 1) as u32;
            }
            for c in 0..a {
                let mut out = 0u64;
                for i in 1..=n {
                    let diag = row[i - 1] + u32::from(xs[i - 1] == c);
                    next_row[i] = next_row[i - 1].max(row[i]).max(diag);
                    out |= u64::from(next_row[i] > next_row[i - 1]) << (i - 1);
                }
                *next.entry(out).or_default() += count;
            }
        }
        states = next;
    }
    let need = (n - max_del) as u32;
    Ok(states.into_iter().filter(|&(mask, _)| mask.count_ones() >= need).map(|(_, c)| c).sum())
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed-form post-edit-set counts for the three counting constructions:
/// a single run, a sequence with no repeated neighbours, and two alternating
/// symbols with insertions drawn from the remaining letters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionCounts {
    pub single_run_insertions: f64,
    pub distinct_deletions: f64,
    pub alternating_lower: f64,
}

pub fn construction_counts(n: usize, a: u32, max_ins: usize, max_del: usize) -> ConstructionCounts {
    let single_run_insertions =
        (0..=max_ins).map(|j| binom(n + max_ins, j) * ((a - 1) as f64).powi(j as i32)).sum();
    let kept = n.saturating_sub(max_del);
    ConstructionCounts {
        single_run_insertions,
        distinct_deletions: binom(kept, max_del),
        alternating_lower: binom(kept, max_del)
            * binom(kept + max_ins, max_ins)
            * (a.saturating_sub(2) as f64).powi(max_ins as i32),
    }
}

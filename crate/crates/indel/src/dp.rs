//! Insertion/deletion edit scripts.
//!
//! Both variants return the lexicographically smallest minimal script under
//! the op order `NoOp < Delete < Insert`. The script is built by a greedy
//! forward pass over suffix distances `D(i, j) = dist(x[i..], y[j..])`: take
//! `NoOp` on a match, else `Delete` when `D(i+1, j) = D(i, j) - 1`, else
//! `Insert`.

use serde::{Deserialize, Serialize};

use crate::edit::{check_same_alphabet, EditOp, EditPattern};
use crate::error::{Error, Result};
use crate::seq::{Sequence, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpResult {
    pub distance: usize,
    pub script: EditPattern,
    /// Final band half-width of the doubling schedule; `None` for the quadratic oracle.
    pub band_used: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DpMode {
    #[default]
    Banded,
    Full,
}

pub fn edit_distance(x: &Sequence, y: &Sequence, mode: DpMode) -> Result<DpResult> {
    match mode {
        DpMode::Banded => edit_distance_banded(x, y),
        DpMode::Full => edit_distance_full(x, y),
    }
}

/// Cell budget of the quadratic oracle (u32 per cell).
const FULL_MAX_CELLS: usize = 1 << 27;

pub fn edit_distance_full(x: &Sequence, y: &Sequence) -> Result<DpResult> {
    check_same_alphabet(x.alphabet(), y.alphabet())?;
    let (xs, ys) = (x.symbols(), y.symbols());
    let (n, m) = (xs.len(), ys.len());
    let w = m + 1;
    let cells = (n + 1).checked_mul(w).ok_or(Error::InstanceTooLarge("quadratic DP"))?;
    if cells > FULL_MAX_CELLS {
        return Err(Error::InstanceTooLarge("quadratic DP"));
    }
    let mut t = vec![0u32; cells];
    for j in 0..=m {
        t[n * w + j] = (m - j) as u32;
    }
    for i in (0..n).rev() {
        t[i * w + m] = (n - i) as u32;
        for j in (0..m).rev() {
            t[i * w + j] = if xs[i] == ys[j] {
                t[(i + 1) * w + j + 1]
            } else {
                1 + t[(i + 1) * w + j].min(t[i * w + j + 1])
            };
        }
    }
    let distance = t[0] as usize;
    let mut ops = Vec::with_capacity(n + distance);
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && xs[i] == ys[j] {
            ops.push(EditOp::NoOp);
            i += 1;
            j += 1;
        } else if i < n && t[(i + 1) * w + j] + 1 == t[i * w + j] {
            ops.push(EditOp::Delete);
            i += 1;
        } else {
            ops.push(EditOp::Insert(ys[j]));
            j += 1;
        }
    }
    Ok(DpResult { distance, script: EditPattern::new(ops), band_used: None })
}

const NONE: u32 = u32::MAX;

/// Furthest-reaching thresholds for one cost level `d`. Only diagonals
/// `k = i - j` with `k ≡ d + n + m (mod 2)` can hold suffix distance `d`, so
/// entry `t` belongs to diagonal `kstart + 2t`; cells on that diagonal with
/// `i >= vals[t]` have suffix distance `<= d`.
#[derive(Debug, Clone)]
struct Wave {
    kstart: i64,
    vals: Vec<u32>,
}

impl Wave {
    fn empty() -> Self {
        Wave { kstart: 0, vals: Vec::new() }
    }

    #[inline]
    fn get(&self, k: i64) -> u32 {
        let off = k - self.kstart;
        if off < 0 || off & 1 != 0 {
            return NONE;
        }
        self.vals.get((off >> 1) as usize).copied().unwrap_or(NONE)
    }
}

struct Waves<'a, T> {
    x: &'a [T],
    y: &'a [T],
    n: i64,
    m: i64,
    k0: i64,
}

/// No limit on `|k|`.
const UNLIMITED: i64 = i64::MAX / 4;

impl<T: Copy + Eq> Waves<'_, T> {
    /// Wave `d` from waves `d - 1` and `d - 2`, restricted to `|k| <= kabs`.
    /// The restriction `kabs = D - d` keeps every value needed by a traceback
    /// from distance `D` exact, since each entry only reads diagonals at most
    /// one step further out on the previous level.
    fn wave(&self, d: i64, w1: &Wave, w2: &Wave, kabs: i64) -> Wave {
        let mut kmin = (self.k0 - d).max(-self.m).max(-kabs);
        if (d + self.n + self.m + kmin) & 1 != 0 {
            kmin += 1;
        }
        let kmax = (self.k0 + d).min(self.n).min(kabs);
        let mut vals = Vec::with_capacity(((kmax - kmin) / 2 + 1).max(0) as usize);
        let mut k = kmin;
        while k <= kmax {
            let lo = k.max(0);
            let mut p = i64::MAX;
            if d == (k - self.k0).abs() {
                p = self.n.min(self.m + k);
            }
            let b = w1.get(k + 1);
            if b != NONE {
                p = p.min((b as i64 - 1).max(lo));
            }
            let b = w1.get(k - 1);
            if b != NONE {
                p = p.min((b as i64).max(lo));
            }
            let b = w2.get(k);
            if b != NONE {
                p = p.min(b as i64);
            }
            if p == i64::MAX {
                vals.push(NONE);
            } else {
                let (mut i, mut j) = (p as usize, (p - k) as usize);
                let lo = lo as usize;
                while i > lo && self.x[i - 1] == self.y[j - 1] {
                    i -= 1;
                    j -= 1;
                }
                vals.push(i as u32);
            }
            k += 2;
        }
        Wave { kstart: kmin, vals }
    }
}

/// Banded DP on suffix distances, computed by diagonal transition.
///
/// Wave `d` only spans diagonals within `d` of the end diagonal `|x| - |y|`,
/// so a band doubled from `max(1, ||x| - |y||)` would recompute identical
/// waves on every restart; one pass is run instead and `band_used` reports
/// the schedule width that contains the distance. Expected work is
/// `O(n + m + k^2)`. Waves are checkpointed every `sqrt(d)` levels and
/// recomputed block by block during traceback.
pub fn edit_distance_banded(x: &Sequence, y: &Sequence) -> Result<DpResult> {
    check_same_alphabet(x.alphabet(), y.alphabet())?;
    let (xs, ys) = (x.symbols(), y.symbols());
    if xs.len() as u64 >= NONE as u64 || ys.len() as u64 >= NONE as u64 {
        return Err(Error::InstanceTooLarge("sequence length"));
    }
    let (distance, script) = if x.alphabet().size() <= 256 {
        let xb: Vec<u8> = xs.iter().map(|&s| s as u8).collect();
        let yb: Vec<u8> = ys.iter().map(|&s| s as u8).collect();
        diagonal_transition(&xb, &yb, ys)
    } else {
        diagonal_transition(xs, ys, ys)
    };
    let mut band = (xs.len() as i64 - ys.len() as i64).abs().max(1);
    while band < distance {
        band *= 2;
    }
    Ok(DpResult { distance: distance as usize, script, band_used: Some(band as usize) })
}

fn diagonal_transition<T: Copy + Eq>(xs: &[T], ys: &[T], y_symbols: &[Symbol]) -> (i64, EditPattern) {
    let (n, m) = (xs.len() as i64, ys.len() as i64);
    let waves = Waves { x: xs, y: ys, n, m, k0: n - m };
    // (d, wave d - 1, wave d)
    let mut checkpoints: Vec<(i64, Wave, Wave)> = Vec::new();
    let mut next_checkpoint = 0;
    let mut w2 = Wave::empty();
    let mut w1 = Wave::empty();
    let mut d = 0;
    loop {
        let w = waves.wave(d, &w1, &w2, UNLIMITED);
        if d == next_checkpoint {
            checkpoints.push((d, w1.clone(), w.clone()));
            next_checkpoint = d + ((d as f64).sqrt().ceil() as i64).max(1);
        }
        let done = w.get(0) == 0;
        w2 = std::mem::replace(&mut w1, w);
        if done {
            break;
        }
        d += 1;
    }
    (d, traceback(&waves, y_symbols, d, &checkpoints))
}

fn traceback<T: Copy + Eq>(
    waves: &Waves<'_, T>,
    y_symbols: &[Symbol],
    distance: i64,
    checkpoints: &[(i64, Wave, Wave)],
) -> EditPattern {
    let (xs, ys) = (waves.x, waves.y);
    let (n, m) = (xs.len(), ys.len());
    let mut ops = Vec::with_capacity(n + distance as usize);
    // Waves of the loaded block, indexed by d - block_start.
    let mut block: Vec<Wave> = Vec::new();
    let mut block_start = i64::MAX;
    let load = |d: i64, block: &mut Vec<Wave>, block_start: &mut i64| {
        let c = checkpoints.partition_point(|cp| cp.0 <= d) - 1;
        let (start, prev, first) = &checkpoints[c];
        let end = checkpoints.get(c + 1).map_or(distance, |cp| cp.0).min(distance);
        block.clear();
        block.push(first.clone());
        let mut w2 = prev.clone();
        for dd in start + 1..end {
            let w = waves.wave(dd, block.last().expect("nonempty block"), &w2, distance - dd);
            w2 = block.last().expect("nonempty block").clone();
            block.push(w);
        }
        *block_start = *start;
    };
    let (mut i, mut j) = (0usize, 0usize);
    let mut r = distance;
    while i < n || j < m {
        if i < n && j < m && xs[i] == ys[j] {
            ops.push(EditOp::NoOp);
            i += 1;
            j += 1;
            continue;
        }
        let need = r - 1;
        if need < block_start || need >= block_start + block.len() as i64 {
            load(need, &mut block, &mut block_start);
        }
        let w = &block[(need - block_start) as usize];
        let k = i as i64 - j as i64;
        let b = w.get(k + 1);
        if i < n && b != NONE && (i + 1) as u32 >= b {
            ops.push(EditOp::Delete);
            i += 1;
        } else {
            ops.push(EditOp::Insert(y_symbols[j]));
            j += 1;
        }
        r -= 1;
    }
    debug_assert_eq!(r, 0);
    EditPattern::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::apply_edit_pattern;
    use crate::seq::Alphabet;
    use proptest::prelude::*;
    use EditOp::*;

    fn seq(a: u32, s: &str) -> Sequence {
        Sequence::from_digits(Alphabet::new(a).unwrap(), s).unwrap()
    }

    #[test]
    fn identical_inputs() {
        let x = seq(2, "0101");
        for r in [edit_distance_full(&x, &x).unwrap(), edit_distance_banded(&x, &x).unwrap()] {
            assert_eq!(r.distance, 0);
            assert_eq!(r.script, EditPattern::identity(4));
        }
        assert_eq!(edit_distance_banded(&x, &x).unwrap().band_used, Some(1));
    }

    #[test]
    fn two_deletions() {
        let r = edit_distance_banded(&seq(2, "00000"), &seq(2, "000")).unwrap();
        assert_eq!((r.distance, r.script.k_del(), r.script.k_ins()), (2, 2, 0));
        assert_eq!(r.script.ops(), &[NoOp, NoOp, NoOp, Delete, Delete]);
    }

    /// First minimal script in `NoOp < Delete < Insert` order, by depth-first
    /// search over all scripts of cost at most `budget`.
    fn brute_script(x: &[Symbol], y: &[Symbol], budget: usize) -> Option<Vec<EditOp>> {
        fn go(x: &[Symbol], y: &[Symbol], left: usize, out: &mut Vec<EditOp>) -> bool {
            if x.is_empty() && y.is_empty() {
                return left == 0;
            }
            if !x.is_empty() && !y.is_empty() && x[0] == y[0] {
                out.push(NoOp);
                if go(&x[1..], &y[1..], left, out) {
                    return true;
                }
                out.pop();
            }
            if left > 0 && !x.is_empty() {
                out.push(Delete);
                if go(&x[1..], y, left - 1, out) {
                    return true;
                }
                out.pop();
            }
            if left > 0 && !y.is_empty() {
                out.push(Insert(y[0]));
                if go(x, &y[1..], left - 1, out) {
                    return true;
                }
                out.pop();
            }
            false
        }
        (0..=budget).find_map(|k| {
            let mut out = Vec::new();
            go(x, y, k, &mut out).then_some(out)
        })
    }

    #[test]
    fn substitution_costs_two() {
        let (x, y) = (seq(3, "0101"), seq(3, "0121"));
        let want = brute_script(x.symbols(), y.symbols(), 2).unwrap();
        assert_eq!(want, vec![NoOp, NoOp, Delete, Insert(2), NoOp]);
        for r in [edit_distance_full(&x, &y).unwrap(), edit_distance_banded(&x, &y).unwrap()] {
            assert_eq!(r.distance, 2);
            assert_eq!(r.script.ops(), want.as_slice());
        }
    }

    #[test]
    fn alternating_with_three_deletions() {
        let x: String = "01".repeat(50);
        let mut y: Vec<char> = x.chars().collect();
        for p in [77, 40, 3] {
            y.remove(p);
        }
        let y: String = y.into_iter().collect();
        let r = edit_distance_banded(&seq(2, &x), &seq(2, &y)).unwrap();
        assert_eq!(r.distance, 3);
        assert_eq!(edit_distance_full(&seq(2, &x), &seq(2, &y)).unwrap().distance, 3);
    }

    #[test]
    fn empty_sides() {
        let e = seq(4, "");
        let x = seq(4, "0123");
        assert_eq!(edit_distance_banded(&e, &e).unwrap().distance, 0);
        assert_eq!(edit_distance_banded(&x, &e).unwrap().script.ops(), &[Delete; 4]);
        let r = edit_distance_banded(&e, &x).unwrap();
        assert_eq!(r.script.contents(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn alphabet_mismatch() {
        assert!(matches!(
            edit_distance_banded(&seq(2, "01"), &seq(3, "01")),
            Err(Error::AlphabetMismatch(2, 3))
        ));
    }

    #[test]
    fn brute_force_agrees_on_small_pairs() {
        let a = Alphabet::new(3).unwrap();
        let all = |len: usize| -> Vec<Vec<Symbol>> {
            (0..3usize.pow(len as u32))
                .map(|mut c| {
                    (0..len)
                        .map(|_| {
                            let s = (c % 3) as Symbol;
                            c /= 3;
                            s
                        })
                        .collect()
                })
                .collect()
        };
        for lx in 0..=4 {
            for ly in 0..=3 {
                for xs in all(lx) {
                    for ys in all(ly) {
                        let want = brute_script(&xs, &ys, lx + ly).unwrap();
                        let x = Sequence::new(a, xs.clone()).unwrap();
                        let y = Sequence::new(a, ys.clone()).unwrap();
                        assert_eq!(edit_distance_banded(&x, &y).unwrap().script.ops(), want.as_slice());
                    }
                }
            }
        }
    }

    fn pair(max: usize, a: u32) -> impl Strategy<Value = (Sequence, Sequence)> {
        let al = Alphabet::new(a).unwrap();
        let sym = 0..a as Symbol;
        (
            prop::collection::vec(sym.clone(), 0..max),
            prop::collection::vec(sym, 0..max),
        )
            .prop_map(move |(x, y)| (Sequence::new(al, x).unwrap(), Sequence::new(al, y).unwrap()))
    }

    proptest! {
        #[test]
        fn banded_equals_full((x, y) in pair(60, 2)) {
            let f = edit_distance_full(&x, &y).unwrap();
            let b = edit_distance_banded(&x, &y).unwrap();
            prop_assert_eq!(f.distance, b.distance);
            prop_assert_eq!(&f.script, &b.script);
            prop_assert!(b.band_used.unwrap() >= b.distance);
        }

        #[test]
        fn wide_alphabet_banded_equals_full((x, y) in pair(60, 1000)) {
            let f = edit_distance_full(&x, &y).unwrap();
            let b = edit_distance_banded(&x, &y).unwrap();
            prop_assert_eq!(f.script, b.script);
        }

        #[test]
        fn script_reaches_target((x, y) in pair(80, 4)) {
            let r = edit_distance_banded(&x, &y).unwrap();
            prop_assert_eq!(apply_edit_pattern(&x, &r.script).unwrap(), y.clone());
            prop_assert_eq!(r.script.edits(), r.distance);
            prop_assert_eq!(r.script.k_del() as i64 - r.script.k_ins() as i64, x.len() as i64 - y.len() as i64);
        }

        #[test]
        fn distance_is_symmetric((x, y) in pair(50, 3)) {
            let xy = edit_distance_banded(&x, &y).unwrap();
            let yx = edit_distance_banded(&y, &x).unwrap();
            prop_assert_eq!(xy.distance, yx.distance);
            prop_assert_eq!(xy.script.k_ins(), yx.script.k_del());
        }

        #[test]
        fn triangle_inequality((x, y) in pair(40, 2), z in prop::collection::vec(0..2 as Symbol, 0..40)) {
            let z = Sequence::new(x.alphabet(), z).unwrap();
            let d = |a: &Sequence, b: &Sequence| edit_distance_banded(a, b).unwrap().distance;
            prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
        }
    }

    #[test]
    fn long_near_identical_pair() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = Alphabet::new(4).unwrap();
        let xs: Vec<Symbol> = (0..3000).map(|_| rng.gen_range(0..4)).collect();
        let mut ys = xs.clone();
        for _ in 0..40 {
            let p = rng.gen_range(0..ys.len());
            if rng.gen_bool(0.5) {
                ys.remove(p);
            } else {
                ys.insert(p, rng.gen_range(0..4));
            }
        }
        let x = Sequence::new(a, xs).unwrap();
        let y = Sequence::new(a, ys).unwrap();
        let f = edit_distance_full(&x, &y).unwrap();
        let b = edit_distance_banded(&x, &y).unwrap();
        assert_eq!(f.script, b.script);
        assert!(b.distance <= 40);
    }
}

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::typical::{is_typical, typicalize, RunMap};
use crate::edit::{apply_edit_pattern, check_same_alphabet, EditOp, EditPattern};
use crate::error::{Error, Result};
use crate::seq::{runs_of, Alphabet, Sequence};
use crate::sim::{gen_ltrrid, gen_pre_ess, RpesParams};

/// Lengths of the consecutive source segments aligned to each run of `y_hat`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GlobalAlignment {
    pub segment_lengths: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    /// Segment of `l - 1` (one insertion) against `l + 1` (a deleted
    /// singleton merging two runs), where `l` is the run length in `y_hat`.
    Gamma1,
    /// Segment of `l + 1` (one deletion) against `l` (a run split by an
    /// insertion of another symbol).
    Gamma2,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentNode {
    /// Segment lengths fixed so far; the depth is its length.
    pub prefix: Vec<usize>,
    pub children: Vec<usize>,
    pub split: Option<SplitKind>,
    pub leaf: bool,
}

/// Every partial alignment some typical pattern can reach while producing
/// `y_hat` from `x`. Branches that die out are kept; leaves are the complete
/// alignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentTree {
    pub y_run_lengths: Vec<usize>,
    pub nodes: Vec<AlignmentNode>,
}

impl AlignmentTree {
    pub fn root(&self) -> &AlignmentNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> Vec<GlobalAlignment> {
        self.nodes
            .iter()
            .filter(|n| n.leaf)
            .map(|n| GlobalAlignment { segment_lengths: n.prefix.clone() })
            .collect()
    }

    pub fn splits(&self) -> Vec<(usize, SplitKind)> {
        self.nodes.iter().filter_map(|n| n.split.map(|k| (n.prefix.len(), k))).collect()
    }

    pub fn is_resolved(&self) -> bool {
        self.nodes.iter().filter(|n| n.leaf).count() == 1
    }
}

// Extended-run counters for the previous, current and next source run,
// plus one pending deleted symbol waiting for the next emitted run.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Flags {
    prev: u8,
    cur: u8,
    next: u8,
    pending: u8,
}

impl Flags {
    fn ok(&self) -> bool {
        self.prev <= 1 && self.cur <= 1 && self.next <= 1
    }
}

type Cell = HashMap<Flags, HashSet<Vec<usize>>>;

/// Builds the alignment tree of `y_hat` against `x` by scanning every typical
/// pattern left to right. Fails with `Unalignable` if no typical pattern maps
/// `x` onto `y_hat`.
pub fn align(x: &Sequence, y_hat: &Sequence) -> Result<AlignmentTree> {
    check_same_alphabet(x.alphabet(), y_hat.alphabet())?;
    let xs = x.symbols();
    let ys = y_hat.symbols();
    let (n, m) = (xs.len(), ys.len());
    let map = RunMap::new(xs);
    let y_runs = runs_of(ys);
    let rho = y_runs.len();
    let mut yrun = Vec::with_capacity(m);
    for (t, r) in y_runs.runs.iter().enumerate() {
        yrun.extend(std::iter::repeat_n(t, r.len));
    }
    let run_start = |i: usize| i < n && (i == 0 || map.run[i] != map.run[i - 1]);
    let run_last = |i: usize| i + 1 == n || map.run[i + 1] != map.run[i];
    let nruns = map.runs();

    let mut grid: Vec<Cell> = vec![HashMap::new(); (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    let mut prefixes: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut leaves: BTreeSet<Vec<usize>> = BTreeSet::new();
    grid[at(0, 0)].entry(Flags { prev: 0, cur: 0, next: 0, pending: 0 }).or_default().insert(vec![0; rho]);

    for i in 0..=n {
        for j in 0..=m {
            let cell = std::mem::take(&mut grid[at(i, j)]);
            for (f, segs) in cell {
                if i == n && j == m {
                    for mut s in segs {
                        if f.pending > 0 {
                            // An empty y_hat has no run to carry the deletion.
                            if let Some(last) = s.last_mut() {
                                *last += f.pending as usize;
                            }
                        }
                        leaves.insert(s);
                    }
                    continue;
                }
                let record = |prefixes: &mut BTreeSet<Vec<usize>>, s: &Vec<usize>| {
                    if j < m && j > 0 && yrun[j] != yrun[j - 1] {
                        prefixes.insert(s[..yrun[j]].to_vec());
                    }
                };
                // Insertion into gap i emitting y[j].
                if j < m {
                    let mut g = f;
                    if i < n {
                        g.cur += 1;
                    }
                    if run_start(i) && i > 0 {
                        g.prev += 1;
                    }
                    if i == n && n > 0 {
                        g.cur += 1;
                    }
                    if g.ok() {
                        let dst = grid[at(i, j + 1)].entry(g).or_default();
                        for s in &segs {
                            record(&mut prefixes, s);
                            dst.insert(s.clone());
                        }
                    }
                }
                if i == n {
                    continue;
                }
                let shift = |mut g: Flags| {
                    if i + 1 < n && run_start(i + 1) {
                        g = Flags { prev: g.cur, cur: g.next, next: 0, pending: g.pending };
                    }
                    g
                };
                // Copy x[i] to y[j].
                if j < m && xs[i] == ys[j] {
                    let g = shift(Flags { pending: 0, ..f });
                    let dst = grid[at(i + 1, j + 1)].entry(g).or_default();
                    for s in &segs {
                        record(&mut prefixes, s);
                        let mut s = s.clone();
                        s[yrun[j]] += 1 + f.pending as usize;
                        dst.insert(s);
                    }
                }
                // Delete x[i].
                let mut g = f;
                g.cur += 1;
                if run_start(i) && map.run[i] > 0 {
                    g.prev += 1;
                }
                if run_last(i) && map.run[i] + 1 < nruns {
                    g.next += 1;
                }
                if g.ok() && (run_start(i) || j > 0) {
                    let attach_back = !run_start(i);
                    if !attach_back {
                        g.pending += 1;
                    }
                    let g = shift(g);
                    let dst = grid[at(i + 1, j)].entry(g).or_default();
                    for s in &segs {
                        let mut s = s.clone();
                        if attach_back {
                            // The previous symbol of this run was copied to y[j-1].
                            s[yrun[j - 1]] += 1;
                        }
                        dst.insert(s);
                    }
                }
            }
        }
    }

    if leaves.is_empty() {
        return Err(Error::Unalignable);
    }
    Ok(build_tree(y_runs.runs.iter().map(|r| r.len).collect(), prefixes, leaves))
}

fn build_tree(y_run_lengths: Vec<usize>, prefixes: BTreeSet<Vec<usize>>, leaves: BTreeSet<Vec<usize>>) -> AlignmentTree {
    let mut all: BTreeSet<Vec<usize>> = prefixes;
    all.insert(Vec::new());
    all.extend(leaves.iter().cloned());
    let mut by_depth: Vec<Vec<Vec<usize>>> = vec![Vec::new(); y_run_lengths.len() + 1];
    for p in all {
        by_depth[p.len()].push(p);
    }
    let mut nodes = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for level in &by_depth {
        for p in level {
            index.insert(p.clone(), nodes.len());
            nodes.push(AlignmentNode { prefix: p.clone(), children: Vec::new(), split: None, leaf: leaves.contains(p) });
        }
    }
    for k in 1..nodes.len() {
        let parent = &nodes[k].prefix[..nodes[k].prefix.len() - 1];
        if let Some(&pi) = index.get(parent) {
            nodes[pi].children.push(k);
        }
    }
    for k in 0..nodes.len() {
        if nodes[k].children.len() < 2 {
            continue;
        }
        let depth = nodes[k].prefix.len();
        let l = y_run_lengths[depth];
        let vals: BTreeSet<usize> = nodes[k].children.iter().map(|&c| nodes[c].prefix[depth]).collect();
        let kind = if l >= 1 && vals.contains(&(l - 1)) && vals.contains(&(l + 1)) {
            SplitKind::Gamma1
        } else if vals.contains(&l) && vals.contains(&(l + 1)) {
            SplitKind::Gamma2
        } else {
            SplitKind::Other
        };
        nodes[k].split = Some(kind);
    }
    AlignmentTree { y_run_lengths, nodes }
}

/// The alignment induced by a typical pattern: each source symbol joins the
/// run of `y_hat` its copy lands in. A deleted symbol joins its own run's
/// survivors; a deleted singleton run joins its right neighbour (which is the
/// merged run when both neighbours share a symbol), or the last run of
/// `y_hat` when it ends the source.
pub fn alignment_of(x: &Sequence, e_hat: &EditPattern) -> Result<GlobalAlignment> {
    if !is_typical(x, e_hat)? {
        return Err(Error::DomainError("pattern is not typical"));
    }
    let y = apply_edit_pattern(x, e_hat)?;
    let xs = x.symbols();
    let ys = y.symbols();
    let map = RunMap::new(xs);
    let y_runs = runs_of(ys);
    let mut yrun = Vec::with_capacity(ys.len());
    for (t, r) in y_runs.runs.iter().enumerate() {
        yrun.extend(std::iter::repeat_n(t, r.len));
    }
    // Output run of each copied source symbol.
    let mut dest: Vec<Option<usize>> = vec![None; xs.len()];
    let (mut i, mut j) = (0, 0);
    for op in e_hat.ops() {
        match op {
            EditOp::NoOp => {
                dest[i] = Some(yrun[j]);
                i += 1;
                j += 1;
            }
            EditOp::Delete => i += 1,
            EditOp::Insert(_) => j += 1,
        }
    }
    let runs = &map.run;
    let run_members = |r: usize| (0..xs.len()).filter(move |&k| runs[k] == r);
    let mut seg = vec![0; y_runs.len()];
    for k in 0..xs.len() {
        let r = map.run[k];
        let target = match dest[k] {
            Some(t) => Some(t),
            None => run_members(r).find_map(|q| dest[q]).or_else(|| {
                if r + 1 < map.runs() {
                    run_members(r + 1).find_map(|q| dest[q])
                } else {
                    y_runs.len().checked_sub(1)
                }
            }),
        };
        match target {
            Some(t) => seg[t] += 1,
            None if ys.is_empty() => {}
            None => return Err(Error::Unalignable),
        }
    }
    Ok(GlobalAlignment { segment_lengths: seg })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityRate {
    pub n: usize,
    pub a: u32,
    pub p: f64,
    pub trials: usize,
    /// Fraction of trials whose alignment tree ends with more than one leaf.
    pub fraction: f64,
    pub stderr: f64,
}

/// Monte Carlo rate of unresolved alignments for random sources edited with
/// insertion and deletion rates both equal to `p`, then typicalized.
pub fn unresolved_fraction(n: usize, a: u32, p: f64, trials: usize, seed: u64) -> Result<AmbiguityRate> {
    if trials == 0 {
        return Err(Error::DomainError("need at least one trial"));
    }
    let al = Alphabet::new(a)?;
    let mut hits = 0usize;
    for t in 0..trials as u64 {
        let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(t);
        let x = gen_pre_ess(n, al, s);
        let (e, _) = gen_ltrrid(&x, &RpesParams { n, a, eps: p, del: p, seed: s })?;
        let tp = typicalize(&x, &e)?;
        let y_hat = apply_edit_pattern(&x, &tp.e_hat)?;
        if align(&x, &y_hat)?.nodes.iter().filter(|n| n.leaf).count() > 1 {
            hits += 1;
        }
    }
    let f = hits as f64 / trials as f64;
    Ok(AmbiguityRate { n, a, p, trials, fraction: f, stderr: (f * (1.0 - f) / trials as f64).sqrt() })
}

use serde::{Deserialize, Serialize};

use crate::edit::{apply_edit_pattern, EditOp, EditPattern};
use crate::error::{Error, Result};
use crate::seq::{run_index, Sequence, Symbol};

/// Where an edit of a pattern sits relative to the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Site {
    /// Insertion into gap `g` (before `x[g]`, or at the end when `g == n`).
    Gap(usize),
    /// Deletion of `x[i]`.
    Del(usize),
}

/// Run structure of a source, with the extended-run membership rules.
pub(crate) struct RunMap {
    pub run: Vec<usize>,
    pub starts: Vec<usize>,
    pub n: usize,
}

impl RunMap {
    pub fn new(x: &[Symbol]) -> Self {
        let run = run_index(x);
        let mut starts = Vec::new();
        for i in 0..x.len() {
            if i == 0 || run[i] != run[i - 1] {
                starts.push(i);
            }
        }
        RunMap { run, starts, n: x.len() }
    }

    pub fn runs(&self) -> usize {
        self.starts.len()
    }

    fn end(&self, r: usize) -> usize {
        self.starts.get(r + 1).copied().unwrap_or(self.n)
    }

    /// Runs whose extended run contains the edit. A run `[s, e)` counts
    /// deletions of `x[s-1..=e]` and insertions into gaps `s..=e`.
    pub fn extended_members(&self, site: Site) -> impl Iterator<Item = usize> {
        let mut out = [usize::MAX; 3];
        match site {
            Site::Gap(g) => {
                if g > 0 {
                    out[0] = self.run[g - 1];
                }
                if g < self.n && (g == 0 || self.run[g] != self.run[g - 1]) {
                    out[1] = self.run[g];
                }
            }
            Site::Del(i) => {
                let r = self.run[i];
                out[1] = r;
                if r > 0 && self.starts[r] == i {
                    out[0] = r - 1;
                }
                if r + 1 < self.runs() && self.end(r) == i + 1 {
                    out[2] = r + 1;
                }
            }
        }
        out.into_iter().filter(|&r| r != usize::MAX)
    }

    /// Run an edit belongs to: the run of a deleted symbol, or the run
    /// strictly containing an insertion gap.
    pub fn owner(&self, site: Site) -> Option<usize> {
        match site {
            Site::Del(i) => Some(self.run[i]),
            Site::Gap(g) if g > 0 && g < self.n && self.run[g] == self.run[g - 1] => Some(self.run[g]),
            Site::Gap(_) => None,
        }
    }
}

/// Sites of every op in `e`; `None` for no-ops.
pub(crate) fn sites(x_len: usize, e: &EditPattern) -> Result<Vec<Option<Site>>> {
    if e.source_len() != x_len {
        return Err(Error::PatternLengthMismatch { consumed: e.source_len(), len: x_len });
    }
    let mut i = 0;
    Ok(e.ops()
        .iter()
        .map(|op| match op {
            EditOp::Insert(_) => Some(Site::Gap(i)),
            EditOp::Delete => {
                i += 1;
                Some(Site::Del(i - 1))
            }
            EditOp::NoOp => {
                i += 1;
                None
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEditCounts {
    /// Deletions in the run plus insertions strictly inside it.
    pub within: Vec<usize>,
    /// Edits in the run extended by one neighbour symbol on each side.
    /// Insertions on a run boundary count for both runs.
    pub extended: Vec<usize>,
}

fn count_sites(map: &RunMap, sites: &[Option<Site>], active: &[bool]) -> RunEditCounts {
    let mut within = vec![0; map.runs()];
    let mut extended = vec![0; map.runs()];
    for (s, _) in sites.iter().zip(active).filter(|(_, &a)| a) {
        let Some(site) = *s else { continue };
        if let Some(r) = map.owner(site) {
            within[r] += 1;
        }
        for r in map.extended_members(site) {
            extended[r] += 1;
        }
    }
    RunEditCounts { within, extended }
}

pub fn extended_run_edit_counts(x: &Sequence, e: &EditPattern) -> Result<RunEditCounts> {
    let s = sites(x.len(), e)?;
    Ok(count_sites(&RunMap::new(x.symbols()), &s, &vec![true; s.len()]))
}

/// Whether every extended run of `x` holds at most one edit of `e`.
pub fn is_typical(x: &Sequence, e: &EditPattern) -> Result<bool> {
    Ok(extended_run_edit_counts(x, e)?.extended.iter().all(|&c| c <= 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComplementEntry {
    Blank,
    ElimInsert(Symbol),
    ElimDelete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypicalizedPattern {
    pub e_hat: EditPattern,
    /// One entry per op of the original pattern.
    pub complement: Vec<ComplementEntry>,
}

impl TypicalizedPattern {
    pub fn eliminated(&self) -> usize {
        self.complement.iter().filter(|c| **c != ComplementEntry::Blank).count()
    }
}

/// Drops edits so that every extended run keeps at most one.
///
/// First a deletion is dropped when the extended run of its own run holds
/// more than one edit, and an insertion when any extended run containing it
/// does. Deletions of boundary symbols can survive that rule while still
/// crowding a neighbouring extended run (deleting the `1` and the `2` of
/// `01020` leaves two edits around the middle `0`), so a second pass drops
/// every edit counted in an extended run that is still over the limit.
pub fn typicalize(x: &Sequence, e: &EditPattern) -> Result<TypicalizedPattern> {
    let s = sites(x.len(), e)?;
    let map = RunMap::new(x.symbols());
    let mut keep = vec![true; s.len()];
    let first = count_sites(&map, &s, &keep).extended;
    for (k, site) in keep.iter_mut().zip(&s) {
        match *site {
            Some(Site::Del(i)) => *k = first[map.run[i]] <= 1,
            Some(g @ Site::Gap(_)) => *k = map.extended_members(g).all(|r| first[r] <= 1),
            None => {}
        }
    }
    let second = count_sites(&map, &s, &keep).extended;
    for (k, site) in keep.iter_mut().zip(&s) {
        if let Some(site) = *site {
            if map.extended_members(site).any(|r| second[r] > 1) {
                *k = false;
            }
        }
    }
    let mut ops = Vec::with_capacity(e.len());
    let mut complement = Vec::with_capacity(e.len());
    for (op, &k) in e.ops().iter().zip(&keep) {
        match (op, k) {
            (_, true) | (EditOp::NoOp, _) => {
                ops.push(*op);
                complement.push(ComplementEntry::Blank);
            }
            (EditOp::Insert(c), false) => complement.push(ComplementEntry::ElimInsert(*c)),
            (EditOp::Delete, false) => {
                ops.push(EditOp::NoOp);
                complement.push(ComplementEntry::ElimDelete);
            }
        }
    }
    Ok(TypicalizedPattern { e_hat: EditPattern::new(ops), complement })
}

pub fn typicalized_posess(x: &Sequence, tp: &TypicalizedPattern) -> Result<Sequence> {
    apply_edit_pattern(x, &tp.e_hat)
}

pub fn recombine(tp: &TypicalizedPattern) -> Result<EditPattern> {
    let mut hat = tp.e_hat.ops().iter();
    let mut ops = Vec::with_capacity(tp.complement.len());
    for c in &tp.complement {
        ops.push(match c {
            ComplementEntry::Blank => *hat.next().ok_or(Error::ComplementMisaligned)?,
            ComplementEntry::ElimInsert(s) => EditOp::Insert(*s),
            ComplementEntry::ElimDelete => match hat.next() {
                Some(EditOp::NoOp) => EditOp::Delete,
                _ => return Err(Error::ComplementMisaligned),
            },
        });
    }
    if hat.next().is_some() {
        return Err(Error::ComplementMisaligned);
    }
    Ok(EditPattern::new(ops))
}

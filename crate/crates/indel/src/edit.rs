use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{Alphabet, Sequence, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditOp {
    NoOp,
    Delete,
    Insert(Symbol),
}

/// Op kind without insertion content, as carried by the op stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum OpKind {
    NoOp = 0,
    Delete = 1,
    Insert = 2,
}

impl OpKind {
    pub fn from_code(c: u8) -> Option<OpKind> {
        match c {
            0 => Some(OpKind::NoOp),
            1 => Some(OpKind::Delete),
            2 => Some(OpKind::Insert),
            _ => None,
        }
    }
}

impl EditOp {
    pub fn kind(&self) -> OpKind {
        match self {
            EditOp::NoOp => OpKind::NoOp,
            EditOp::Delete => OpKind::Delete,
            EditOp::Insert(_) => OpKind::Insert,
        }
    }

    /// Whether the op consumes a source symbol.
    pub fn consumes(&self) -> bool {
        !matches!(self, EditOp::Insert(_))
    }
}

/// Left-to-right edit script over a source sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EditPattern {
    ops: Vec<EditOp>,
    k_ins: usize,
    k_del: usize,
}

impl EditPattern {
    pub fn new(ops: Vec<EditOp>) -> Self {
        let mut k_ins = 0;
        let mut k_del = 0;
        for op in &ops {
            match op {
                EditOp::Insert(_) => k_ins += 1,
                EditOp::Delete => k_del += 1,
                EditOp::NoOp => {}
            }
        }
        EditPattern { ops, k_ins, k_del }
    }

    pub fn identity(n: usize) -> Self {
        EditPattern { ops: vec![EditOp::NoOp; n], k_ins: 0, k_del: 0 }
    }

    pub fn ops(&self) -> &[EditOp] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<EditOp> {
        self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn k_ins(&self) -> usize {
        self.k_ins
    }

    pub fn k_del(&self) -> usize {
        self.k_del
    }

    pub fn edits(&self) -> usize {
        self.k_ins + self.k_del
    }

    /// Number of source symbols the pattern consumes (`#Delete + #NoOp`).
    pub fn source_len(&self) -> usize {
        self.ops.len() - self.k_ins
    }

    pub fn output_len(&self) -> usize {
        self.ops.len() - self.k_del
    }

    pub fn kinds(&self) -> Vec<OpKind> {
        self.ops.iter().map(EditOp::kind).collect()
    }

    pub fn contents(&self) -> Vec<Symbol> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                EditOp::Insert(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// Rebuilds a pattern from an op-kind stream and the insertion contents in order.
    pub fn from_streams(kinds: &[OpKind], contents: &[Symbol]) -> Result<Self> {
        let mut it = contents.iter();
        let mut ops = Vec::with_capacity(kinds.len());
        for k in kinds {
            ops.push(match k {
                OpKind::NoOp => EditOp::NoOp,
                OpKind::Delete => EditOp::Delete,
                OpKind::Insert => EditOp::Insert(*it.next().ok_or(Error::TruncatedStream)?),
            });
        }
        if it.next().is_some() {
            return Err(Error::ModelDesync);
        }
        Ok(Self::new(ops))
    }
}

impl FromIterator<EditOp> for EditPattern {
    fn from_iter<I: IntoIterator<Item = EditOp>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

pub fn apply_edit_pattern(x: &Sequence, e: &EditPattern) -> Result<Sequence> {
    let out = apply_symbols(x.symbols(), e)?;
    for op in e.ops() {
        if let EditOp::Insert(c) = op {
            x.alphabet().check(*c)?;
        }
    }
    Ok(Sequence::from_parts_unchecked(x.alphabet(), out))
}

pub(crate) fn apply_symbols(x: &[Symbol], e: &EditPattern) -> Result<Vec<Symbol>> {
    if e.source_len() != x.len() {
        return Err(Error::PatternLengthMismatch { consumed: e.source_len(), len: x.len() });
    }
    let mut out = Vec::with_capacity(e.output_len());
    let mut i = 0;
    for op in e.ops() {
        match op {
            EditOp::NoOp => {
                out.push(x[i]);
                i += 1;
            }
            EditOp::Delete => i += 1,
            EditOp::Insert(c) => out.push(*c),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArbitraryOp {
    Insert,
    Delete,
}

/// One step of an arbitrary insertion/deletion process. Insertion places
/// `content` so that it ends up at index `cursor`; deletion removes the symbol
/// immediately left of the cursor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbitraryEdit {
    pub cursor: usize,
    pub op: ArbitraryOp,
    pub content: Option<Symbol>,
}

impl ArbitraryEdit {
    pub fn insert(cursor: usize, content: Symbol) -> Self {
        ArbitraryEdit { cursor, op: ArbitraryOp::Insert, content: Some(content) }
    }

    pub fn delete(cursor: usize) -> Self {
        ArbitraryEdit { cursor, op: ArbitraryOp::Delete, content: None }
    }

    fn validate(&self, len: usize) -> Result<()> {
        let ok = match self.op {
            ArbitraryOp::Insert => self.content.is_some() && self.cursor <= len,
            ArbitraryOp::Delete => self.content.is_none() && self.cursor >= 1 && self.cursor <= len,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::CursorOutOfRange { cursor: self.cursor, len })
        }
    }
}

/// Replays arbitrary edits in order.
pub fn replay_arbitrary(x: &Sequence, edits: &[ArbitraryEdit]) -> Result<Sequence> {
    let mut cur = x.symbols().to_vec();
    for e in edits {
        e.validate(cur.len())?;
        match e.op {
            ArbitraryOp::Insert => {
                let c = e.content.unwrap_or_default();
                x.alphabet().check(c)?;
                cur.insert(e.cursor, c);
            }
            ArbitraryOp::Delete => {
                cur.remove(e.cursor - 1);
            }
        }
    }
    Ok(Sequence::from_parts_unchecked(x.alphabet(), cur))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    /// Gap index in the post-deletion sequence (`0..=len`).
    pub gap: usize,
    pub symbol: Symbol,
}

/// Deletions-then-insertions form of an arbitrary edit process.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CanonicalEdits {
    /// Deleted source positions, ascending.
    pub deletions: Vec<usize>,
    /// Insertions against the shortened sequence, ordered by gap; insertions
    /// sharing a gap appear in output order.
    pub insertions: Vec<Insertion>,
}

impl CanonicalEdits {
    pub fn replay(&self, x: &Sequence) -> Result<Sequence> {
        let mut shortened = Vec::with_capacity(x.len());
        let mut d = self.deletions.iter().peekable();
        for (i, &s) in x.symbols().iter().enumerate() {
            if d.peek() == Some(&&i) {
                d.next();
            } else {
                shortened.push(s);
            }
        }
        if d.next().is_some() {
            return Err(Error::CursorOutOfRange { cursor: x.len(), len: x.len() });
        }
        let mut out = Vec::with_capacity(shortened.len() + self.insertions.len());
        let mut ins = self.insertions.iter().peekable();
        for g in 0..=shortened.len() {
            while let Some(i) = ins.peek() {
                if i.gap != g {
                    break;
                }
                x.alphabet().check(i.symbol)?;
                out.push(i.symbol);
                ins.next();
            }
            if g < shortened.len() {
                out.push(shortened[g]);
            }
        }
        if ins.next().is_some() {
            return Err(Error::CursorOutOfRange { cursor: shortened.len() + 1, len: shortened.len() });
        }
        Ok(Sequence::from_parts_unchecked(x.alphabet(), out))
    }

    /// Equivalent left-to-right pattern; at each gap deletions precede insertions.
    pub fn to_pattern(&self, n: usize) -> EditPattern {
        let mut ops = Vec::with_capacity(n + self.insertions.len());
        let mut d = self.deletions.iter().peekable();
        let mut ins = self.insertions.iter().peekable();
        let mut kept = 0;
        for i in 0..n {
            if d.peek() == Some(&&i) {
                d.next();
                ops.push(EditOp::Delete);
                continue;
            }
            while let Some(x) = ins.peek() {
                if x.gap != kept {
                    break;
                }
                ops.push(EditOp::Insert(x.symbol));
                ins.next();
            }
            ops.push(EditOp::NoOp);
            kept += 1;
        }
        for x in ins {
            ops.push(EditOp::Insert(x.symbol));
        }
        EditPattern::new(ops)
    }
}

#[derive(Clone, Copy)]
enum Tag {
    Orig(usize),
    Ins(Symbol),
}

/// Rewrites an arbitrary edit process as deletions on `x` followed by
/// insertions on the shortened sequence. Symbols inserted and later deleted
/// are dropped from both lists.
pub fn canonicalize_arbitrary(x: &Sequence, edits: &[ArbitraryEdit]) -> Result<CanonicalEdits> {
    let mut cur: Vec<Tag> = (0..x.len()).map(Tag::Orig).collect();
    for e in edits {
        e.validate(cur.len())?;
        match e.op {
            ArbitraryOp::Insert => {
                let c = e.content.unwrap_or_default();
                x.alphabet().check(c)?;
                cur.insert(e.cursor, Tag::Ins(c));
            }
            ArbitraryOp::Delete => {
                cur.remove(e.cursor - 1);
            }
        }
    }
    let mut alive = vec![false; x.len()];
    let mut insertions = Vec::new();
    let mut kept = 0;
    for t in &cur {
        match *t {
            Tag::Orig(i) => {
                alive[i] = true;
                kept += 1;
            }
            Tag::Ins(symbol) => insertions.push(Insertion { gap: kept, symbol }),
        }
    }
    let deletions = alive.iter().enumerate().filter(|(_, &a)| !a).map(|(i, _)| i).collect();
    Ok(CanonicalEdits { deletions, insertions })
}

pub(crate) fn check_same_alphabet(a: Alphabet, b: Alphabet) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(a.size(), b.size()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EditOp::*;

    fn seq(a: u32, s: &str) -> Sequence {
        Sequence::from_digits(Alphabet::new(a).unwrap(), s).unwrap()
    }

    #[test]
    fn two_leading_deletions() {
        let e = EditPattern::new(vec![Delete, Delete, NoOp, NoOp, NoOp]);
        assert_eq!(apply_edit_pattern(&seq(2, "00000"), &e).unwrap(), seq(2, "000"));
    }

    #[test]
    fn identity_pattern() {
        let x = seq(4, "0123321");
        assert_eq!(apply_edit_pattern(&x, &EditPattern::identity(x.len())).unwrap(), x);
    }

    #[test]
    fn scattered_deletions() {
        let e = EditPattern::new(vec![NoOp, Delete, NoOp, NoOp, Delete, NoOp, NoOp]);
        assert_eq!(apply_edit_pattern(&seq(4, "0111223"), &e).unwrap(), seq(4, "01123"));
    }

    #[test]
    fn length_mismatch() {
        let e = EditPattern::new(vec![NoOp, Insert(1)]);
        assert!(matches!(
            apply_edit_pattern(&seq(2, "00"), &e),
            Err(Error::PatternLengthMismatch { consumed: 1, len: 2 })
        ));
    }

    #[test]
    fn insertion_content_checked() {
        let e = EditPattern::new(vec![Insert(5)]);
        assert!(apply_edit_pattern(&seq(2, ""), &e).is_err());
    }

    #[test]
    fn self_cancelling_pair() {
        let x = seq(3, "0120");
        let edits = [ArbitraryEdit::insert(2, 1), ArbitraryEdit::delete(3)];
        let c = canonicalize_arbitrary(&x, &edits).unwrap();
        assert_eq!(c, CanonicalEdits::default());
    }

    #[test]
    fn empty_process() {
        let x = seq(3, "012");
        assert_eq!(canonicalize_arbitrary(&x, &[]).unwrap(), CanonicalEdits::default());
    }

    #[test]
    fn cursor_rules() {
        let x = seq(3, "012");
        assert!(matches!(
            canonicalize_arbitrary(&x, &[ArbitraryEdit::delete(0)]),
            Err(Error::CursorOutOfRange { .. })
        ));
        assert!(canonicalize_arbitrary(&x, &[ArbitraryEdit::insert(4, 0)]).is_err());
        assert!(canonicalize_arbitrary(&x, &[ArbitraryEdit::insert(3, 0)]).is_ok());
    }

    #[test]
    fn canonical_pattern_matches_replay() {
        let x = seq(3, "0120");
        let edits = [
            ArbitraryEdit::insert(0, 2),
            ArbitraryEdit::delete(3),
            ArbitraryEdit::insert(4, 1),
            ArbitraryEdit::delete(1),
        ];
        let direct = replay_arbitrary(&x, &edits).unwrap();
        let c = canonicalize_arbitrary(&x, &edits).unwrap();
        assert_eq!(c.replay(&x).unwrap(), direct);
        assert_eq!(apply_edit_pattern(&x, &c.to_pattern(x.len())).unwrap(), direct);
    }

    #[test]
    fn stream_split_round_trip() {
        let e = EditPattern::new(vec![NoOp, Insert(3), Delete, Insert(1), NoOp]);
        let back = EditPattern::from_streams(&e.kinds(), &e.contents()).unwrap();
        assert_eq!(back, e);
        assert_eq!((e.k_ins(), e.k_del(), e.source_len()), (2, 1, 3));
    }
}

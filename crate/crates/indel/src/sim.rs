//! Seeded generators for the random left-to-right and arbitrary edit models.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`; each
//! generator uses its own stream number so that one seed can drive a whole
//! corpus pair without correlating the source and the edits.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edit::{replay_arbitrary, ArbitraryEdit, EditOp, EditPattern};
use crate::error::{Error, Result};
use crate::seq::{Alphabet, Sequence, Symbol};

const STREAM_SOURCE: u64 = 0;
const STREAM_RPES: u64 = 1;
const STREAM_APES: u64 = 2;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpesParams {
    pub n: usize,
    pub a: u32,
    pub eps: f64,
    pub del: f64,
    pub seed: u64,
}

impl RpesParams {
    pub fn validate(&self) -> Result<Alphabet> {
        let ok = (0.0..1.0).contains(&self.eps) && (0.0..=1.0).contains(&self.del) && self.eps + self.del <= 1.0;
        if !ok {
            return Err(Error::DomainError("need 0 <= eps < 1, 0 <= del, eps + del <= 1"));
        }
        Alphabet::new(self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApesPolicy {
    UniformRandom,
    WorstCaseLB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApesParams {
    pub n: usize,
    pub a: u32,
    pub max_ins: usize,
    pub max_del: usize,
    pub policy: ApesPolicy,
    pub seed: u64,
}

impl ApesParams {
    /// Budgets `floor(eps * n)` and `floor(del * n)`.
    pub fn from_rates(n: usize, a: u32, eps: f64, del: f64, policy: ApesPolicy, seed: u64) -> Result<Self> {
        if !(eps >= 0.0 && del >= 0.0 && eps.is_finite() && del.is_finite()) {
            return Err(Error::DomainError("edit rates must be nonnegative"));
        }
        let max_ins = (eps * n as f64).floor() as usize;
        let max_del = (del * n as f64).floor() as usize;
        Ok(ApesParams { n, a, max_ins, max_del, policy, seed })
    }
}

pub fn gen_pre_ess(n: usize, a: Alphabet, seed: u64) -> Sequence {
    let mut r = rng(seed, STREAM_SOURCE);
    let size = a.size();
    let symbols = (0..n).map(|_| r.gen_range(0..size) as Symbol).collect();
    Sequence::new(a, symbols).expect("symbols drawn below alphabet size")
}

/// Left-to-right random insertion/deletion automaton. At every gap, including
/// the one after the last symbol, it inserts a uniform symbol with probability
/// `eps` and stays; otherwise it deletes the next symbol with probability
/// `del`, keeps it, or stops once the source is exhausted.
pub fn gen_ltrrid(x: &Sequence, p: &RpesParams) -> Result<(EditPattern, Sequence)> {
    let a = p.validate()?;
    if x.alphabet() != a {
        return Err(Error::AlphabetMismatch(x.alphabet().size(), a.size()));
    }
    if x.len() != p.n {
        return Err(Error::PatternLengthMismatch { consumed: p.n, len: x.len() });
    }
    let mut r = rng(p.seed, STREAM_RPES);
    let mut ops = Vec::with_capacity(x.len() + x.len() / 16);
    let mut out = Vec::with_capacity(x.len() + x.len() / 16);
    let mut i = 0;
    loop {
        let u: f64 = r.gen();
        if u < p.eps {
            let c = r.gen_range(0..a.size()) as Symbol;
            ops.push(EditOp::Insert(c));
            out.push(c);
        } else if i == x.len() {
            break;
        } else if u < p.eps + p.del {
            ops.push(EditOp::Delete);
            i += 1;
        } else {
            ops.push(EditOp::NoOp);
            out.push(x.symbols()[i]);
            i += 1;
        }
    }
    Ok((EditPattern::new(ops), Sequence::new(a, out).expect("symbols within alphabet")))
}

pub fn gen_apes(x: &Sequence, p: &ApesParams) -> Result<(Vec<ArbitraryEdit>, Sequence)> {
    let a = Alphabet::new(p.a)?;
    if x.alphabet() != a {
        return Err(Error::AlphabetMismatch(x.alphabet().size(), a.size()));
    }
    if x.len() != p.n {
        return Err(Error::PatternLengthMismatch { consumed: p.n, len: x.len() });
    }
    let mut r = rng(p.seed, STREAM_APES);
    let edits = match p.policy {
        ApesPolicy::UniformRandom => uniform_edits(x.len(), a, p, &mut r),
        ApesPolicy::WorstCaseLB => worst_case_edits(x, a, p, &mut r)?,
    };
    let y = replay_arbitrary(x, &edits)?;
    Ok((edits, y))
}

fn uniform_edits(n: usize, a: Alphabet, p: &ApesParams, r: &mut ChaCha8Rng) -> Vec<ArbitraryEdit> {
    let k_ins = r.gen_range(0..=p.max_ins);
    let k_del = r.gen_range(0..=p.max_del);
    let mut order: Vec<bool> = std::iter::repeat_n(true, k_ins).chain(std::iter::repeat_n(false, k_del)).collect();
    order.shuffle(r);
    let mut len = n;
    let mut edits = Vec::with_capacity(order.len());
    for is_ins in order {
        if is_ins {
            let cursor = r.gen_range(0..=len);
            edits.push(ArbitraryEdit::insert(cursor, r.gen_range(0..a.size()) as Symbol));
            len += 1;
        } else if len > 0 {
            edits.push(ArbitraryEdit::delete(r.gen_range(1..=len)));
            len -= 1;
        }
    }
    edits
}

/// `k` sorted distinct values from `0..range`.
fn sorted_subset(range: usize, k: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v = rand::seq::index::sample(r, range, k).into_vec();
    v.sort_unstable();
    v
}

/// All deletions first, at pairwise non-adjacent positions of the alternating
/// source, then insertions of symbols from `2..a` at distinct final indices.
fn worst_case_edits(x: &Sequence, a: Alphabet, p: &ApesParams, r: &mut ChaCha8Rng) -> Result<Vec<ArbitraryEdit>> {
    if a.size() < 3 {
        return Err(Error::PolicyPreconditionViolated("worst-case policy needs an alphabet of at least 3"));
    }
    if x.symbols().iter().enumerate().any(|(i, &s)| s as usize != i % 2) {
        return Err(Error::PolicyPreconditionViolated("worst-case policy needs the alternating source 0101.."));
    }
    let (n, d, e) = (x.len(), p.max_del, p.max_ins);
    if d > 0 && n + 1 < 2 * d {
        return Err(Error::PolicyPreconditionViolated("too many deletions to keep them non-adjacent"));
    }
    let mut edits = Vec::with_capacity(d + e);
    let dels: Vec<usize> = sorted_subset(n + 1 - d, d, r).into_iter().enumerate().map(|(i, q)| q + i).collect();
    for &pos in dels.iter().rev() {
        edits.push(ArbitraryEdit::delete(pos + 1));
    }
    let final_len = n - d + e;
    for f in sorted_subset(final_len, e, r) {
        edits.push(ArbitraryEdit::insert(f, r.gen_range(2..a.size()) as Symbol));
    }
    Ok(edits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    AllSame(Symbol),
    AllDistinct,
    Alternating,
}

pub fn make_construction(kind: Construction, n: usize, a: Alphabet) -> Result<Sequence> {
    let symbols = match kind {
        Construction::AllSame(s) => {
            a.check(s)?;
            vec![s; n]
        }
        Construction::AllDistinct => (0..n).map(|i| (i % a.size() as usize) as Symbol).collect(),
        Construction::Alternating => (0..n).map(|i| (i % 2) as Symbol).collect(),
    };
    Ok(Sequence::from_parts_unchecked(a, symbols))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusModel {
    Rpes,
    Apes,
}

/// Parameters and true edit counts of one corpus pair; stored in the pair
/// file and in its JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub model: CorpusModel,
    pub n: usize,
    pub a: u32,
    pub eps: f64,
    pub del: f64,
    pub seed: u64,
    pub k_ins: usize,
    pub k_del: usize,
}

/// Draws a source of length `n` and edits it under `model`. The arbitrary
/// model uses the uniform policy with budgets `floor(eps n)`, `floor(del n)`.
pub fn gen_pair(model: CorpusModel, n: usize, a: u32, eps: f64, del: f64, seed: u64) -> Result<(Sequence, Sequence, CorpusMeta)> {
    let al = Alphabet::new(a)?;
    let x = gen_pre_ess(n, al, seed);
    let (y, k_ins, k_del) = match model {
        CorpusModel::Rpes => {
            let (e, y) = gen_ltrrid(&x, &RpesParams { n, a, eps, del, seed })?;
            (y, e.k_ins(), e.k_del())
        }
        CorpusModel::Apes => {
            let p = ApesParams::from_rates(n, a, eps, del, ApesPolicy::UniformRandom, seed)?;
            let (edits, y) = gen_apes(&x, &p)?;
            let c = crate::edit::canonicalize_arbitrary(&x, &edits)?;
            (y, c.insertions.len(), c.deletions.len())
        }
    };
    Ok((x, y, CorpusMeta { model, n, a, eps, del, seed, k_ins, k_del }))
}

const CORPUS_MAGIC: &[u8; 4] = b"IDCP";
const CORPUS_VERSION: u8 = 1;

pub fn pair_to_bytes(x: &Sequence, y: &Sequence, meta: &CorpusMeta) -> Result<Vec<u8>> {
    let meta_json = serde_json::to_vec(meta)?;
    let mut out = Vec::new();
    out.extend_from_slice(CORPUS_MAGIC);
    out.push(CORPUS_VERSION);
    out.extend_from_slice(&x.alphabet().size().to_le_bytes());
    for s in [x, y] {
        out.extend_from_slice(&(s.len() as u64).to_le_bytes());
        out.extend_from_slice(&s.to_bytes());
    }
    out.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta_json);
    Ok(out)
}

pub fn pair_from_bytes(buf: &[u8]) -> Result<(Sequence, Sequence, CorpusMeta)> {
    let mut pos = 0;
    let mut take = |len: usize| -> Result<&[u8]> {
        let end = pos + len;
        let s = buf.get(pos..end).ok_or(Error::TruncatedStream)?;
        pos = end;
        Ok(s)
    };
    if take(4)? != CORPUS_MAGIC {
        return Err(Error::BadMagic);
    }
    let ver = take(1)?[0];
    if ver != CORPUS_VERSION {
        return Err(Error::VersionUnsupported(ver));
    }
    let a = Alphabet::new(u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")))?;
    let width = if a.size() <= 256 { 1 } else { 2 };
    let mut seqs = Vec::with_capacity(2);
    for _ in 0..2 {
        let len = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let bytes = usize::try_from(len).ok().and_then(|l| l.checked_mul(width)).ok_or(Error::TruncatedStream)?;
        seqs.push(Sequence::from_byte_image(a, take(bytes)?)?);
    }
    let meta_len = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
    let meta: CorpusMeta = serde_json::from_slice(take(meta_len)?)?;
    let y = seqs.pop().expect("two sequences");
    let x = seqs.pop().expect("two sequences");
    Ok((x, y, meta))
}

/// Writes `pair-<seed>.bin` and its `pair-<seed>.json` sidecar; returns the binary path.
pub fn write_pair(dir: &Path, x: &Sequence, y: &Sequence, meta: &CorpusMeta) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("pair-{}.bin", meta.seed));
    fs::write(&bin, pair_to_bytes(x, y, meta)?)?;
    fs::write(bin.with_extension("json"), serde_json::to_vec_pretty(meta)?)?;
    Ok(bin)
}

pub fn read_pair(path: &Path) -> Result<(Sequence, Sequence, CorpusMeta)> {
    pair_from_bytes(&fs::read(path)?)
}

/// Sorted list of corpus pair files in `dir`.
pub fn list_pairs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if name.starts_with("pair-") && name.ends_with(".bin") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

//! Order-0 range coding of the op stream and the insertion-content stream.
//!
//! Byte layout of both streams is described in `docs/FORMAT.md`.

use serde::{Deserialize, Serialize};

use crate::edit::OpKind;
use crate::error::{Error, Result};
use crate::seq::{fnv1a32, Alphabet, Symbol};

const TOP: u64 = 1 << 32;
const BOT: u64 = 1 << 24;
const MASK: u64 = TOP - 1;

/// Frequency ceiling for the op model; exceeding it halves every count.
pub const OPS_MAX_TOTAL: u32 = 1 << 16;
const CHECKSUM_LEN: usize = 4;

pub struct RangeEncoder {
    low: u64,
    range: u64,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder { low: 0, range: MASK, out: Vec::new() }
    }

    pub fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total && (total as u64) < BOT);
        let r = self.range / total as u64;
        self.low += r * cum as u64;
        self.range = r * freq as u64;
        if self.low >= TOP {
            self.low &= MASK;
            self.carry();
        }
        while self.range < BOT {
            self.out.push((self.low >> 24) as u8);
            self.low = (self.low << 8) & MASK;
            self.range <<= 8;
        }
    }

    fn carry(&mut self) {
        for b in self.out.iter_mut().rev() {
            if *b == 0xFF {
                *b = 0;
            } else {
                *b += 1;
                return;
            }
        }
        unreachable!("carry past the start of the stream");
    }

    /// Emits the shortest byte string whose zero-extension lies in the final interval.
    pub fn finish(mut self) -> Vec<u8> {
        let hi = self.low + self.range;
        for nbytes in 0..=4u32 {
            let unit = 1u64 << (32 - 8 * nbytes);
            let v = self.low.div_ceil(unit) * unit;
            if v < hi {
                if v >= TOP {
                    self.carry();
                }
                let v = v & MASK;
                for b in 0..nbytes {
                    self.out.push((v >> (24 - 8 * b)) as u8);
                }
                break;
            }
        }
        while self.out.last() == Some(&0) {
            self.out.pop();
        }
        self.out
    }
}

pub struct RangeDecoder<'a> {
    code: u64,
    range: u64,
    input: &'a [u8],
    pos: usize,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        let mut d = RangeDecoder { code: 0, range: MASK, input, pos: 0 };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte() as u64;
        }
        d
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.input.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// Target frequency for the next symbol; must be followed by [`Self::consume`].
    pub fn target(&self, total: u32) -> Result<u32> {
        let v = self.code / (self.range / total as u64);
        if v >= total as u64 {
            return Err(Error::ModelDesync);
        }
        Ok(v as u32)
    }

    pub fn consume(&mut self, cum: u32, freq: u32, total: u32) {
        let r = self.range / total as u64;
        self.code -= r * cum as u64;
        self.range = r * freq as u64;
        while self.range < BOT {
            self.code = ((self.code << 8) | self.next_byte() as u64) & MASK;
            self.range <<= 8;
        }
    }
}

/// Adaptive frequency table: counts start at 1, grow by 1 per coded symbol,
/// and are halved (rounding up) when the total exceeds `max_total`.
#[derive(Debug, Clone)]
pub struct AdaptiveModel {
    freq: Vec<u32>,
    tree: Vec<u32>,
    total: u32,
    max_total: u32,
}

impl AdaptiveModel {
    pub fn new(symbols: usize, max_total: u32) -> Self {
        let mut m = AdaptiveModel { freq: vec![1; symbols], tree: Vec::new(), total: 0, max_total };
        m.rebuild();
        m
    }

    fn rebuild(&mut self) {
        let n = self.freq.len();
        self.tree = vec![0; n + 1];
        for i in 0..n {
            let idx = i + 1;
            self.tree[idx] += self.freq[i];
            let parent = idx + (idx & idx.wrapping_neg());
            if parent <= n {
                self.tree[parent] += self.tree[idx];
            }
        }
        self.total = self.freq.iter().sum();
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn freq(&self, s: usize) -> u32 {
        self.freq[s]
    }

    /// Sum of frequencies of symbols below `s`.
    pub fn cum(&self, s: usize) -> u32 {
        let mut i = s;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }

    /// Symbol `s` with `cum(s) <= v < cum(s) + freq(s)`, and `cum(s)`.
    pub fn find(&self, v: u32) -> (usize, u32) {
        let n = self.freq.len();
        let mut pos = 0;
        let mut rem = v;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        (pos, v - rem)
    }

    pub fn update(&mut self, s: usize) {
        self.freq[s] += 1;
        self.total += 1;
        let mut i = s + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
        if self.total > self.max_total {
            for f in &mut self.freq {
                *f = f.div_ceil(2);
            }
            self.rebuild();
        }
    }

    pub fn encode(&mut self, enc: &mut RangeEncoder, s: usize) {
        enc.encode(self.cum(s), self.freq[s], self.total);
        self.update(s);
    }

    pub fn decode(&mut self, dec: &mut RangeDecoder<'_>) -> Result<usize> {
        let v = dec.target(self.total)?;
        let (s, cum) = self.find(v);
        dec.consume(cum, self.freq[s], self.total);
        self.update(s);
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BitStream {
    pub bytes: Vec<u8>,
    pub bit_length: u64,
}

impl BitStream {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_length = 8 * bytes.len() as u64;
        BitStream { bytes, bit_length }
    }
}

fn split_trailer(bytes: &[u8]) -> Result<(&[u8], u32)> {
    if bytes.len() < CHECKSUM_LEN {
        return Err(Error::TruncatedStream);
    }
    let (body, tail) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    Ok((body, u32::from_le_bytes(tail.try_into().expect("4-byte trailer"))))
}

fn ops_checksum(ops: &[OpKind]) -> u32 {
    fnv1a32(ops.iter().map(|&k| k as u8))
}

fn contents_checksum(symbols: &[Symbol]) -> u32 {
    fnv1a32(symbols.iter().flat_map(|s| s.to_le_bytes()))
}

pub fn encode_ops(ops: &[OpKind]) -> BitStream {
    let mut enc = RangeEncoder::new();
    let mut model = AdaptiveModel::new(3, OPS_MAX_TOTAL);
    for &k in ops {
        model.encode(&mut enc, k as usize);
    }
    let mut bytes = enc.finish();
    bytes.extend_from_slice(&ops_checksum(ops).to_le_bytes());
    BitStream::from_bytes(bytes)
}

pub fn decode_ops(bytes: &[u8], n_ops: usize) -> Result<Vec<OpKind>> {
    let (body, sum) = split_trailer(bytes)?;
    let mut dec = RangeDecoder::new(body);
    let mut model = AdaptiveModel::new(3, OPS_MAX_TOTAL);
    let mut ops = Vec::with_capacity(n_ops.min(body.len().saturating_mul(64) + 64));
    for _ in 0..n_ops {
        let s = model.decode(&mut dec)?;
        ops.push(OpKind::from_code(s as u8).ok_or(Error::ModelDesync)?);
    }
    if ops_checksum(&ops) != sum {
        return Err(Error::ModelDesync);
    }
    Ok(ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
enum ContentMode {
    Adaptive = 0,
    Uniform = 1,
}

fn contents_max_total(alphabet: Alphabet) -> u32 {
    OPS_MAX_TOTAL.max(2 * alphabet.size())
}

fn encode_contents_with(symbols: &[Symbol], alphabet: Alphabet, mode: ContentMode) -> Vec<u8> {
    let a = alphabet.size();
    let mut enc = RangeEncoder::new();
    match mode {
        ContentMode::Adaptive => {
            let mut model = AdaptiveModel::new(a as usize, contents_max_total(alphabet));
            for &s in symbols {
                model.encode(&mut enc, s as usize);
            }
        }
        ContentMode::Uniform => {
            for &s in symbols {
                enc.encode(s as u32, 1, a);
            }
        }
    }
    let mut bytes = vec![mode as u8];
    bytes.extend(enc.finish());
    bytes.extend_from_slice(&contents_checksum(symbols).to_le_bytes());
    bytes
}

/// Codes insertion contents with an adaptive model or a flat one, whichever
/// is shorter; a leading mode byte records the choice.
pub fn encode_contents(symbols: &[Symbol], alphabet: Alphabet) -> Result<BitStream> {
    for &s in symbols {
        alphabet.check(s)?;
    }
    let adaptive = encode_contents_with(symbols, alphabet, ContentMode::Adaptive);
    let uniform = encode_contents_with(symbols, alphabet, ContentMode::Uniform);
    Ok(BitStream::from_bytes(if uniform.len() <= adaptive.len() { uniform } else { adaptive }))
}

pub fn decode_contents(bytes: &[u8], count: usize, alphabet: Alphabet) -> Result<Vec<Symbol>> {
    let (&mode, rest) = bytes.split_first().ok_or(Error::TruncatedStream)?;
    let (body, sum) = split_trailer(rest)?;
    let a = alphabet.size();
    let mut dec = RangeDecoder::new(body);
    let mut out = Vec::with_capacity(count.min(body.len().saturating_mul(64) + 64));
    match mode {
        0 => {
            let mut model = AdaptiveModel::new(a as usize, contents_max_total(alphabet));
            for _ in 0..count {
                out.push(model.decode(&mut dec)? as Symbol);
            }
        }
        1 => {
            for _ in 0..count {
                let v = dec.target(a)?;
                dec.consume(v, 1, a);
                out.push(v as Symbol);
            }
        }
        _ => return Err(Error::ModelDesync),
    }
    if contents_checksum(&out) != sum {
        return Err(Error::ModelDesync);
    }
    Ok(out)
}

/// Empirical op-stream statistics, parametrized by the per-source-symbol
/// insertion and deletion rates `eps_t = k_ins / n` and `del_t = k_del / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpStats {
    pub n_ops: usize,
    pub n_ins: usize,
    pub n_del: usize,
    pub p_noop: f64,
    pub p_ins: f64,
    pub p_del: f64,
}

impl OpStats {
    pub fn from_ops(ops: &[OpKind]) -> Self {
        let n_ins = ops.iter().filter(|&&k| k == OpKind::Insert).count();
        let n_del = ops.iter().filter(|&&k| k == OpKind::Delete).count();
        Self::from_counts(ops.len(), n_ins, n_del)
    }

    pub fn from_counts(n_ops: usize, n_ins: usize, n_del: usize) -> Self {
        let (p_noop, p_ins, p_del) = if n_ops == 0 {
            (1.0, 0.0, 0.0)
        } else {
            let t = n_ops as f64;
            ((n_ops - n_ins - n_del) as f64 / t, n_ins as f64 / t, n_del as f64 / t)
        };
        OpStats { n_ops, n_ins, n_del, p_noop, p_ins, p_del }
    }

    /// Distribution implied by rates `eps_t`, `del_t` over `n` source symbols.
    pub fn from_rates(eps_t: f64, del_t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&del_t) || eps_t < 0.0 || !eps_t.is_finite() {
            return Err(Error::DomainError("rates must satisfy eps >= 0, 0 <= del <= 1"));
        }
        let z = 1.0 + eps_t;
        Ok(OpStats {
            n_ops: 0,
            n_ins: 0,
            n_del: 0,
            p_noop: (1.0 - del_t) / z,
            p_ins: eps_t / z,
            p_del: del_t / z,
        })
    }

    /// Op-stream symbols per source symbol, `1 + eps_t`.
    pub fn ops_per_source(&self) -> f64 {
        let noop_or_del = self.p_noop + self.p_del;
        if noop_or_del == 0.0 {
            f64::INFINITY
        } else {
            1.0 / noop_or_del
        }
    }

    /// Empirical op entropy per source symbol.
    pub fn per_source_entropy(&self) -> f64 {
        let h = empirical_op_entropy(self);
        if h == 0.0 {
            0.0
        } else {
            h * self.ops_per_source()
        }
    }
}

/// Ternary empirical entropy, in bits per op.
pub fn empirical_op_entropy(stats: &OpStats) -> f64 {
    [stats.p_noop, stats.p_ins, stats.p_del].iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

//! Self-delimiting update container: header, op stream, content stream, digest of Y.

use serde::{Deserialize, Serialize};

use crate::coder::{decode_contents, decode_ops, encode_contents, encode_ops, BitStream};
use crate::dp::{edit_distance, DpMode};
use crate::edit::{apply_symbols, check_same_alphabet, EditPattern};
use crate::error::{Error, Result};
use crate::seq::{Alphabet, Sequence};

pub const MAGIC: [u8; 4] = *b"IDU1";
pub const VERSION: u8 = 1;
pub const CODER_RANGE_O0: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub version: u8,
    pub coder_id: u8,
    pub alphabet: Alphabet,
    pub n: u64,
    pub m: u64,
    pub k_ins: u64,
    pub k_del: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub header: Header,
    pub op_bits: BitStream,
    pub content_bits: BitStream,
    pub y_digest: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: u64,
    /// Fixed header plus the stream length prefixes.
    pub header_bits: u64,
    pub op_bits: u64,
    pub content_bits: u64,
    pub digest_bits: u64,
    pub total_bits: u64,
    pub bits_per_source_symbol: f64,
}

pub fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

pub fn get_varint(buf: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *buf.get(*pos).ok_or(Error::TruncatedStream)?;
        *pos += 1;
        let chunk = (b & 0x7F) as u64;
        if shift == 63 && chunk > 1 {
            return Err(Error::Malformed("varint overflow"));
        }
        v |= chunk << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::Malformed("varint overflow"))
}

fn take<'a>(buf: &'a [u8], pos: &mut usize, len: u64) -> Result<&'a [u8]> {
    let len = usize::try_from(len).map_err(|_| Error::TruncatedStream)?;
    let end = pos.checked_add(len).filter(|&e| e <= buf.len()).ok_or(Error::TruncatedStream)?;
    let s = &buf[*pos..end];
    *pos = end;
    Ok(s)
}

impl Transmission {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(32 + self.op_bits.bytes.len() + self.content_bits.bytes.len());
        out.extend_from_slice(&MAGIC);
        out.push(h.version);
        out.push(h.coder_id);
        out.extend_from_slice(&((h.alphabet.size() - 1) as u16).to_le_bytes());
        for v in [h.n, h.m, h.k_ins, h.k_del] {
            put_varint(&mut out, v);
        }
        for s in [&self.op_bits, &self.content_bits] {
            put_varint(&mut out, s.bytes.len() as u64);
            out.extend_from_slice(&s.bytes);
        }
        out.extend_from_slice(&self.y_digest.to_le_bytes());
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        if buf.len() < 4 {
            return Err(if MAGIC.starts_with(buf) { Error::TruncatedStream } else { Error::BadMagic });
        }
        if buf[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let mut pos = 4;
        let fixed = take(buf, &mut pos, 4)?;
        let version = fixed[0];
        if version != VERSION {
            return Err(Error::VersionUnsupported(version));
        }
        let coder_id = fixed[1];
        if coder_id != CODER_RANGE_O0 {
            return Err(Error::Malformed("unknown coder id"));
        }
        let alphabet = Alphabet::new(u16::from_le_bytes([fixed[2], fixed[3]]) as u32 + 1)?;
        let n = get_varint(buf, &mut pos)?;
        let m = get_varint(buf, &mut pos)?;
        let k_ins = get_varint(buf, &mut pos)?;
        let k_del = get_varint(buf, &mut pos)?;
        if k_del > n || k_ins > m || n - k_del != m - k_ins {
            return Err(Error::Malformed("edit counts inconsistent with lengths"));
        }
        let len = get_varint(buf, &mut pos)?;
        let op_bits = BitStream::from_bytes(take(buf, &mut pos, len)?.to_vec());
        let len = get_varint(buf, &mut pos)?;
        let content_bits = BitStream::from_bytes(take(buf, &mut pos, len)?.to_vec());
        let digest = take(buf, &mut pos, 8)?;
        let y_digest = u64::from_le_bytes(digest.try_into().expect("8-byte digest"));
        if pos != buf.len() {
            return Err(Error::Malformed("trailing bytes after container"));
        }
        let header = Header { version, coder_id, alphabet, n, m, k_ins, k_del };
        Ok(Transmission { header, op_bits, content_bits, y_digest })
    }

    pub fn encoded_len(&self) -> usize {
        self.to_bytes().len()
    }
}

pub fn encode(x: &Sequence, y: &Sequence) -> Result<Transmission> {
    encode_with(x, y, DpMode::Banded)
}

pub fn encode_with(x: &Sequence, y: &Sequence, mode: DpMode) -> Result<Transmission> {
    let dp = edit_distance(x, y, mode)?;
    Ok(encode_pattern(x, y, &dp.script))
}

/// Packs a known script for `x -> y`; the caller guarantees it applies.
pub(crate) fn encode_pattern(x: &Sequence, y: &Sequence, script: &EditPattern) -> Transmission {
    let contents = script.contents();
    let header = Header {
        version: VERSION,
        coder_id: CODER_RANGE_O0,
        alphabet: x.alphabet(),
        n: x.len() as u64,
        m: y.len() as u64,
        k_ins: script.k_ins() as u64,
        k_del: script.k_del() as u64,
    };
    Transmission {
        header,
        op_bits: encode_ops(&script.kinds()),
        content_bits: encode_contents(&contents, x.alphabet()).expect("contents drawn from y"),
        y_digest: y.digest(),
    }
}

pub fn decode(x: &Sequence, t: &Transmission) -> Result<Sequence> {
    let h = &t.header;
    check_same_alphabet(h.alphabet, x.alphabet())?;
    if h.n != x.len() as u64 {
        return Err(Error::DigestMismatch);
    }
    let n_ops = h.n.checked_add(h.k_ins).ok_or(Error::Malformed("op count overflow"))?;
    let n_ops = usize::try_from(n_ops).map_err(|_| Error::Malformed("op count overflow"))?;
    let k_ins = usize::try_from(h.k_ins).map_err(|_| Error::Malformed("op count overflow"))?;
    let rebuild = || -> Result<Vec<_>> {
        let kinds = decode_ops(&t.op_bits.bytes, n_ops)?;
        let contents = decode_contents(&t.content_bits.bytes, k_ins, h.alphabet)?;
        let script = EditPattern::from_streams(&kinds, &contents)?;
        if script.k_del() as u64 != h.k_del {
            return Err(Error::DigestMismatch);
        }
        apply_symbols(x.symbols(), &script)
    };
    let symbols = rebuild().map_err(|e| match e {
        Error::TruncatedStream => Error::TruncatedStream,
        _ => Error::DigestMismatch,
    })?;
    let y = Sequence::new(h.alphabet, symbols).map_err(|_| Error::DigestMismatch)?;
    if y.len() as u64 != h.m || y.digest() != t.y_digest {
        return Err(Error::DigestMismatch);
    }
    Ok(y)
}

pub fn measure_rate(t: &Transmission) -> RateReport {
    let total_bits = 8 * t.encoded_len() as u64;
    let op_bits = t.op_bits.bit_length;
    let content_bits = t.content_bits.bit_length;
    let digest_bits = 64;
    let n = t.header.n;
    RateReport {
        n,
        header_bits: total_bits - op_bits - content_bits - digest_bits,
        op_bits,
        content_bits,
        digest_bits,
        total_bits,
        bits_per_source_symbol: total_bits as f64 / n.max(1) as f64,
    }
}

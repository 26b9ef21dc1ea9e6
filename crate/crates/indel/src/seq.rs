use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u16;

/// Alphabet `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub const MIN: u32 = 2;
    pub const MAX: u32 = 65536;
    pub const BYTES: Alphabet = Alphabet { size: 256 };

    pub fn new(size: u32) -> Result<Self> {
        if !(Self::MIN..=Self::MAX).contains(&size) {
            return Err(Error::InvalidAlphabet(size));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s as u32) < self.size
    }

    pub fn check(&self, s: Symbol) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange { symbol: s as u32, size: self.size })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequence {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Sequence {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        for &s in &symbols {
            alphabet.check(s)?;
        }
        Ok(Sequence { alphabet, symbols })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Sequence { alphabet, symbols: Vec::new() }
    }

    /// Parses a string of decimal digits, one symbol per character.
    pub fn from_digits(alphabet: Alphabet, s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or(Error::DomainError("non-digit symbol")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, symbols)
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Sequence { alphabet: Alphabet::BYTES, symbols: bytes.iter().map(|&b| b as Symbol).collect() }
    }

    pub(crate) fn from_parts_unchecked(alphabet: Alphabet, symbols: Vec<Symbol>) -> Self {
        debug_assert!(symbols.iter().all(|&s| alphabet.contains(s)));
        Sequence { alphabet, symbols }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Byte image of the sequence: one byte per symbol when the alphabet fits
    /// in a byte, otherwise two little-endian bytes per symbol.
    pub fn to_bytes(&self) -> Vec<u8> {
        if self.alphabet.size <= 256 {
            self.symbols.iter().map(|&s| s as u8).collect()
        } else {
            self.symbols.iter().flat_map(|s| s.to_le_bytes()).collect()
        }
    }

    /// Inverse of [`Sequence::to_bytes`].
    pub fn from_byte_image(alphabet: Alphabet, bytes: &[u8]) -> Result<Self> {
        let symbols = if alphabet.size <= 256 {
            bytes.iter().map(|&b| b as Symbol).collect()
        } else {
            if !bytes.len().is_multiple_of(2) {
                return Err(Error::TruncatedStream);
            }
            bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect()
        };
        Self::new(alphabet, symbols)
    }

    /// 64-bit FNV-1a over [`Sequence::to_bytes`].
    pub fn digest(&self) -> u64 {
        fnv1a64(&self.to_bytes())
    }
}

impl std::fmt::Display for Sequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.alphabet.size <= 10 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            write!(f, "{:?}", self.symbols)
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn fnv1a32(bytes: impl IntoIterator<Item = u8>) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in bytes {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub symbol: Symbol,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunDecomposition {
    pub runs: Vec<Run>,
}

impl RunDecomposition {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Start offset of every run, plus a final entry equal to the total length.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.runs.len() + 1);
        let mut at = 0;
        out.push(0);
        for r in &self.runs {
            at += r.len;
            out.push(at);
        }
        out
    }

    pub fn concat(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        for r in &self.runs {
            out.extend(std::iter::repeat_n(r.symbol, r.len));
        }
        out
    }
}

pub fn run_decompose(seq: &Sequence) -> RunDecomposition {
    runs_of(seq.symbols())
}

pub(crate) fn runs_of(symbols: &[Symbol]) -> RunDecomposition {
    let mut runs: Vec<Run> = Vec::new();
    for &s in symbols {
        match runs.last_mut() {
            Some(r) if r.symbol == s => r.len += 1,
            _ => runs.push(Run { symbol: s, len: 1 }),
        }
    }
    RunDecomposition { runs }
}

/// Index of the run containing each position.
pub(crate) fn run_index(symbols: &[Symbol]) -> Vec<usize> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut r = 0;
    for (i, &s) in symbols.iter().enumerate() {
        if i > 0 && symbols[i - 1] != s {
            r += 1;
        }
        out.push(r);
    }
    out
}

//! Framed one-way update protocol.
//!
//! Every frame is a 32-bit big-endian payload length, one kind byte, then the
//! payload. A push is: client Hello, server Ack (or Error), client Delta,
//! server Ack carrying the new digest (or Error).

use std::io::{self, Read, Write};

use thiserror::Error;

pub const PROTOCOL_VERSION: u8 = 1;
pub const MAX_FRAME: u32 = 1 << 30;
pub const MAX_NAME: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameKind {
    Hello = 1,
    Delta = 2,
    Ack = 3,
    Error = 4,
}

impl FrameKind {
    pub fn from_u8(b: u8) -> Option<Self> {
        Some(match b {
            1 => FrameKind::Hello,
            2 => FrameKind::Delta,
            3 => FrameKind::Ack,
            4 => FrameKind::Error,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    Version = 1,
    Digest = 2,
    Decode = 3,
    /// Target name empty, too long, or not a plain file name.
    Name = 4,
}

impl ErrorCode {
    pub fn from_u8(b: u8) -> Option<Self> {
        Some(match b {
            1 => ErrorCode::Version,
            2 => ErrorCode::Digest,
            3 => ErrorCode::Decode,
            4 => ErrorCode::Name,
            _ => return None,
        })
    }
}

#[derive(Debug, Error)]
pub enum ProtoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("frame of {0} bytes exceeds the limit")]
    TooLarge(u32),
    #[error("unknown frame kind {0}")]
    UnknownKind(u8),
    #[error("expected {expected:?} frame, got {got:?}")]
    Unexpected { expected: FrameKind, got: FrameKind },
    #[error("malformed {0} payload")]
    Payload(&'static str),
    #[error("peer refused ({code:?}): {message}")]
    Refused { code: ErrorCode, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameKind, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    pub fn error(code: ErrorCode, message: &str) -> Self {
        let mut payload = vec![code as u8];
        payload.extend_from_slice(message.as_bytes());
        Frame::new(FrameKind::Error, payload)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.push(self.kind as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Turns an Error frame into `Refused`, and any other unexpected kind
    /// into `Unexpected`.
    pub fn expect(self, kind: FrameKind) -> Result<Frame, ProtoError> {
        if self.kind == kind {
            return Ok(self);
        }
        if self.kind == FrameKind::Error {
            let (&code, msg) = self.payload.split_first().ok_or(ProtoError::Payload("error"))?;
            let code = ErrorCode::from_u8(code).ok_or(ProtoError::Payload("error"))?;
            return Err(ProtoError::Refused { code, message: String::from_utf8_lossy(msg).into_owned() });
        }
        Err(ProtoError::Unexpected { expected: kind, got: self.kind })
    }
}

pub fn write_frame(w: &mut impl Write, frame: &Frame) -> Result<(), ProtoError> {
    if frame.payload.len() as u64 > MAX_FRAME as u64 {
        return Err(ProtoError::TooLarge(u32::MAX));
    }
    w.write_all(&frame.to_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_frame(r: &mut impl Read) -> Result<Frame, ProtoError> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head)?;
    let len = u32::from_be_bytes([head[0], head[1], head[2], head[3]]);
    if len > MAX_FRAME {
        return Err(ProtoError::TooLarge(len));
    }
    let kind = FrameKind::from_u8(head[4]).ok_or(ProtoError::UnknownKind(head[4]))?;
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok(Frame { kind, payload })
}

/// Opening frame of a push: which file, and what the client believes the
/// server currently holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hello {
    pub version: u8,
    pub name: String,
    /// Byte length of the old file.
    pub n: u64,
    pub x_digest: u64,
}

impl Hello {
    pub fn to_payload(&self) -> Vec<u8> {
        let mut p = Vec::with_capacity(19 + self.name.len());
        p.push(self.version);
        p.extend_from_slice(&(self.name.len() as u16).to_be_bytes());
        p.extend_from_slice(self.name.as_bytes());
        p.extend_from_slice(&self.n.to_be_bytes());
        p.extend_from_slice(&self.x_digest.to_be_bytes());
        p
    }

    pub fn from_payload(p: &[u8]) -> Result<Self, ProtoError> {
        let bad = || ProtoError::Payload("hello");
        let (&version, rest) = p.split_first().ok_or_else(bad)?;
        if rest.len() < 2 {
            return Err(bad());
        }
        let name_len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
        let rest = &rest[2..];
        if rest.len() != name_len + 16 {
            return Err(bad());
        }
        let name = std::str::from_utf8(&rest[..name_len]).map_err(|_| bad())?.to_string();
        let n = u64::from_be_bytes(rest[name_len..name_len + 8].try_into().unwrap());
        let x_digest = u64::from_be_bytes(rest[name_len + 8..].try_into().unwrap());
        Ok(Hello { version, name, n, x_digest })
    }
}

/// Accepts plain file names only, so a push can never leave the store.
pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= MAX_NAME
        && name != "."
        && name != ".."
        && !name.starts_with('.')
        && !name.contains(['/', '\\', '\0'])
}

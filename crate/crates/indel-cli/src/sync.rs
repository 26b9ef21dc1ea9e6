use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use indel::seq::fnv1a64;
use indel::{decode, encode_with, Alphabet, DpMode, Sequence, Transmission};
use tempfile::NamedTempFile;

use crate::error::CliError;
use crate::proto::{
    read_frame, valid_name, write_frame, ErrorCode, Frame, FrameKind, Hello, ProtoError, PROTOCOL_VERSION,
};

pub const STORE_ENV: &str = "INDEL_SYNC_STORE";
const IO_TIMEOUT: Duration = Duration::from_secs(60);

/// Directory of synced files with one lock per file name.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Store { dir, locks: Mutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self, name: &str) -> Arc<Mutex<()>> {
        self.locks.lock().unwrap().entry(name.to_string()).or_default().clone()
    }

    /// Current contents, empty when the file does not exist yet.
    pub fn read(&self, name: &str) -> io::Result<Vec<u8>> {
        match fs::read(self.dir.join(name)) {
            Ok(b) => Ok(b),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    /// Replaces the file through a temp file in the same directory, so
    /// readers see either the old or the new contents.
    pub fn replace(&self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.dir.join(name)).map_err(|e| e.error)?;
        Ok(())
    }
}

pub struct Server {
    listener: TcpListener,
    store: Arc<Store>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, store: Store) -> io::Result<Self> {
        Ok(Server { listener: TcpListener::bind(addr)?, store: Arc::new(store) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves connections, each on its own thread. With `max_conns` set,
    /// returns once that many connections have been handled.
    pub fn run(&self, max_conns: Option<usize>) -> io::Result<()> {
        let mut handles = Vec::new();
        for (k, stream) in self.listener.incoming().enumerate() {
            let stream = stream?;
            let store = Arc::clone(&self.store);
            handles.push(thread::spawn(move || {
                if let Err(e) = handle(stream, &store) {
                    eprintln!("connection failed: {e}");
                }
            }));
            if max_conns.is_some_and(|m| k + 1 >= m) {
                break;
            }
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    }
}

fn refuse(stream: &mut TcpStream, code: ErrorCode, msg: &str) -> Result<(), ProtoError> {
    write_frame(stream, &Frame::error(code, msg))
}

fn handle(mut stream: TcpStream, store: &Store) -> Result<(), ProtoError> {
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    let hello = Hello::from_payload(&read_frame(&mut stream)?.expect(FrameKind::Hello)?.payload)?;
    if hello.version != PROTOCOL_VERSION {
        return refuse(&mut stream, ErrorCode::Version, &format!("server speaks version {PROTOCOL_VERSION}"));
    }
    if !valid_name(&hello.name) {
        return refuse(&mut stream, ErrorCode::Name, "not a plain file name");
    }
    let lock = store.lock(&hello.name);
    let _guard = lock.lock().unwrap();
    let stored = store.read(&hello.name)?;
    if stored.len() as u64 != hello.n || fnv1a64(&stored) != hello.x_digest {
        return refuse(&mut stream, ErrorCode::Digest, "server copy differs from the client's old file");
    }
    write_frame(&mut stream, &Frame::new(FrameKind::Ack, Vec::new()))?;

    let delta = read_frame(&mut stream)?.expect(FrameKind::Delta)?;
    let y = match Transmission::from_bytes(&delta.payload).and_then(|t| {
        let x = Sequence::from_byte_image(t.header.alphabet, &stored)?;
        decode(&x, &t)
    }) {
        Ok(y) => y,
        Err(e) => return refuse(&mut stream, ErrorCode::Decode, &e.to_string()),
    };
    let bytes = y.to_bytes();
    store.replace(&hello.name, &bytes)?;
    write_frame(&mut stream, &Frame::new(FrameKind::Ack, fnv1a64(&bytes).to_be_bytes().to_vec()))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PushReport {
    pub name: String,
    pub old_len: usize,
    pub new_len: usize,
    pub delta_bytes: usize,
    pub y_digest: u64,
}

pub fn push(
    addr: impl ToSocketAddrs,
    name: &str,
    old: &[u8],
    new: &[u8],
    alphabet: Alphabet,
    mode: DpMode,
) -> Result<PushReport, CliError> {
    let x = Sequence::from_byte_image(alphabet, old)?;
    let y = Sequence::from_byte_image(alphabet, new)?;
    let mut stream = TcpStream::connect(addr)?;
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    let hello = Hello { version: PROTOCOL_VERSION, name: name.to_string(), n: old.len() as u64, x_digest: fnv1a64(old) };
    write_frame(&mut stream, &Frame::new(FrameKind::Hello, hello.to_payload()))?;
    read_frame(&mut stream)?.expect(FrameKind::Ack)?;
    let delta = encode_with(&x, &y, mode)?.to_bytes();
    write_frame(&mut stream, &Frame::new(FrameKind::Delta, delta.clone()))?;
    let ack = read_frame(&mut stream)?.expect(FrameKind::Ack)?;
    let digest: [u8; 8] = ack.payload.as_slice().try_into().map_err(|_| ProtoError::Payload("ack"))?;
    let y_digest = u64::from_be_bytes(digest);
    if y_digest != fnv1a64(new) {
        return Err(indel::Error::DigestMismatch.into());
    }
    Ok(PushReport { name: name.to_string(), old_len: old.len(), new_len: new.len(), delta_bytes: delta.len(), y_digest })
}

//! Client for out-of-process scorers speaking `mgr-scorer/1`.
//!
//! The wire format is newline-delimited JSON. The server greets once with
//! `{"protocol":"mgr-scorer/1"}`; afterwards every request
//! `{"id","query","prefix","candidates"}` gets exactly one response
//! `{"id","scores"}` in order.

use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Scorer, ScorerError};
use crate::atomizer::AtomId;
use crate::jsonl::{self, LenientNumber};
use crate::scalar::Scalar;

pub const PROTOCOL_VERSION: &str = "mgr-scorer/1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("cannot connect to scorer {endpoint}: {source}")]
    Connect {
        endpoint: String,
        #[source]
        source: io::Error,
    },
    #[error("scorer i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("scorer did not answer within {0:?}")]
    Timeout(Duration),
    #[error("scorer closed the connection")]
    Closed,
    #[error("malformed scorer message: {0}")]
    Malformed(String),
    #[error("scorer speaks protocol {found:?}, expected {PROTOCOL_VERSION:?}")]
    VersionMismatch { found: String },
    #[error("scorer answered id {found:?}, expected {expected:?}")]
    IdMismatch { expected: String, found: String },
    #[error("scorer returned {actual} scores for {expected} candidates")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("scorer returned negative score {value} at index {index}")]
    NegativeScore { index: usize, value: f64 },
    #[error("scorer returned a non-finite score at index {index}")]
    NonFiniteScore { index: usize },
    #[error("scorer connection is unusable after an earlier failure")]
    Broken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// Spawn a process and talk over its stdin/stdout.
    Command { program: String, args: Vec<String> },
    Tcp(String),
    #[cfg(unix)]
    Unix(PathBuf),
}

impl FromStr for Endpoint {
    type Err = String;

    /// Accepts `cmd:<program> [args..]`, `tcp:<host>:<port>` and `unix:<path>`.
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("cmd:") {
            let mut parts = rest.split_whitespace().map(str::to_string);
            let program = parts.next().ok_or_else(|| "empty command endpoint".to_string())?;
            return Ok(Endpoint::Command {
                program,
                args: parts.collect(),
            });
        }
        if let Some(rest) = s.strip_prefix("tcp:") {
            if !rest.contains(':') {
                return Err(format!("tcp endpoint needs host:port, got {rest:?}"));
            }
            return Ok(Endpoint::Tcp(rest.to_string()));
        }
        #[cfg(unix)]
        if let Some(rest) = s.strip_prefix("unix:") {
            if rest.is_empty() {
                return Err("empty unix socket path".into());
            }
            return Ok(Endpoint::Unix(PathBuf::from(rest)));
        }
        Err(format!("unrecognized scorer endpoint {s:?} (expected cmd:, tcp: or unix:)"))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Command { program, args } => {
                write!(f, "cmd:{program}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
            Endpoint::Tcp(addr) => write!(f, "tcp:{addr}"),
            #[cfg(unix)]
            Endpoint::Unix(p) => write!(f, "unix:{}", p.display()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Request<'a> {
    id: String,
    #[serde(borrow)]
    query: std::borrow::Cow<'a, str>,
    prefix: Vec<AtomId>,
    candidates: Vec<AtomId>,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: String,
    scores: Vec<LenientNumber>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Greeting {
    protocol: String,
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    broken: bool,
}

impl Connection {
    fn next_line(&mut self, timeout: Duration) -> Result<String, ProtocolError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ProtocolError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(ProtocolError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(ProtocolError::Closed),
        }
    }
}

/// A scorer backed by a remote process. One request is in flight at a time;
/// concurrent callers are serialized on the connection.
pub struct ExternalScorer {
    conn: Mutex<Connection>,
    child: Option<Child>,
    timeout: Duration,
    next_id: AtomicU64,
}

impl fmt::Debug for ExternalScorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalScorer").field("timeout", &self.timeout).finish_non_exhaustive()
    }
}

impl ExternalScorer {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, ProtocolError> {
        let connect_err = |source| ProtocolError::Connect {
            endpoint: endpoint.to_string(),
            source,
        };
        match endpoint {
            Endpoint::Command { program, args } => {
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(connect_err)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                let mut scorer = Self::from_streams(Box::new(stdout), Box::new(stdin), timeout);
                scorer.child = Some(child);
                scorer.handshake()?;
                Ok(scorer)
            }
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr).map_err(connect_err)?;
                let reader = stream.try_clone().map_err(connect_err)?;
                let mut scorer = Self::from_streams(Box::new(reader), Box::new(stream), timeout);
                scorer.handshake()?;
                Ok(scorer)
            }
            #[cfg(unix)]
            Endpoint::Unix(path) => {
                let stream = std::os::unix::net::UnixStream::connect(path).map_err(connect_err)?;
                let reader = stream.try_clone().map_err(connect_err)?;
                let mut scorer = Self::from_streams(Box::new(reader), Box::new(stream), timeout);
                scorer.handshake()?;
                Ok(scorer)
            }
        }
    }

    /// Wraps already-open streams and reads the greeting.
    pub fn over_streams(
        reader: Box<dyn Read + Send>,
        writer: Box<dyn Write + Send>,
        timeout: Duration,
    ) -> Result<Self, ProtocolError> {
        let mut scorer = Self::from_streams(reader, writer, timeout);
        scorer.handshake()?;
        Ok(scorer)
    }

    fn from_streams(reader: Box<dyn Read + Send>, writer: Box<dyn Write + Send>, timeout: Duration) -> Self {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Self {
            conn: Mutex::new(Connection {
                writer,
                lines: rx,
                broken: false,
            }),
            child: None,
            timeout,
            next_id: AtomicU64::new(0),
        }
    }

    fn handshake(&mut self) -> Result<(), ProtocolError> {
        let timeout = self.timeout;
        let conn = self.conn.get_mut().unwrap_or_else(|p| p.into_inner());
        let line = loop {
            let line = conn.next_line(timeout)?;
            if !line.trim().is_empty() {
                break line;
            }
        };
        let greeting: Greeting =
            serde_json::from_str(&line).map_err(|e| ProtocolError::Malformed(format!("bad greeting {line:?}: {e}")))?;
        if greeting.protocol != PROTOCOL_VERSION {
            return Err(ProtocolError::VersionMismatch {
                found: greeting.protocol,
            });
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// One request/response round trip, returning validated raw scores.
    pub fn request(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<f64>, ProtocolError> {
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if conn.broken {
            return Err(ProtocolError::Broken);
        }
        let result = self.round_trip(&mut conn, query, prefix, candidates);
        if matches!(
            result,
            Err(ProtocolError::Io(_)
                | ProtocolError::Timeout(_)
                | ProtocolError::Closed
                | ProtocolError::Malformed(_)
                | ProtocolError::IdMismatch { .. })
        ) {
            // The stream may now be out of step with our ids.
            conn.broken = true;
        }
        result
    }

    fn round_trip(
        &self,
        conn: &mut Connection,
        query: &str,
        prefix: &[AtomId],
        candidates: &[AtomId],
    ) -> Result<Vec<f64>, ProtocolError> {
        let id = format!("r{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let req = Request {
            id: id.clone(),
            query: query.into(),
            prefix: prefix.to_vec(),
            candidates: candidates.to_vec(),
        };
        let mut line = serde_json::to_string(&req).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
        line.push('\n');
        conn.writer
            .write_all(line.as_bytes())
            .and_then(|_| conn.writer.flush())
            .map_err(|e| match e.kind() {
                io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset => ProtocolError::Closed,
                _ => ProtocolError::Io(e),
            })?;

        let reply = loop {
            let line = conn.next_line(self.timeout)?;
            if !line.trim().is_empty() {
                break line;
            }
        };
        let resp: Response =
            jsonl::parse_lenient(&reply).map_err(|e| ProtocolError::Malformed(format!("{reply:?}: {e}")))?;
        if resp.id != id {
            return Err(ProtocolError::IdMismatch {
                expected: id,
                found: resp.id,
            });
        }
        if resp.scores.len() != candidates.len() {
            return Err(ProtocolError::LengthMismatch {
                expected: candidates.len(),
                actual: resp.scores.len(),
            });
        }
        let mut scores = Vec::with_capacity(resp.scores.len());
        for (index, LenientNumber(v)) in resp.scores.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(ProtocolError::NonFiniteScore { index });
            }
            if v < 0.0 {
                return Err(ProtocolError::NegativeScore { index, value: v });
            }
            scores.push(v);
        }
        Ok(scores)
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        if let Some(mut child) = self.child.take() {
            // Closing stdin asks a well-behaved server to exit.
            let conn = self.conn.get_mut().unwrap_or_else(|p| p.into_inner());
            conn.writer = Box::new(io::sink());
            for _ in 0..20 {
                if matches!(child.try_wait(), Ok(Some(_))) {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl<T: Scalar> Scorer<T> for ExternalScorer {
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        let raw = self.request(query, prefix, candidates)?;
        raw.into_iter()
            .enumerate()
            .map(|(index, v)| {
                let t = T::from_f64_lossy(v);
                if t.is_finite() {
                    Ok(t)
                } else {
                    Err(ProtocolError::NonFiniteScore { index }.into())
                }
            })
            .collect()
    }
}

/// Reference server loop: greets, then answers each request with `scorer`
/// until the input ends. Requests the scorer rejects are answered with an
/// `error` field instead of `scores`.
pub fn serve<T: Scalar, S: Scorer<T> + ?Sized, R: BufRead, W: Write>(
    scorer: &S,
    reader: R,
    mut writer: W,
) -> io::Result<()> {
    writeln!(
        writer,
        "{}",
        serde_json::to_string(&Greeting {
            protocol: PROTOCOL_VERSION.into()
        })?
    )?;
    writer.flush()?;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                writeln!(writer, "{}", serde_json::json!({ "id": null, "error": e.to_string() }))?;
                writer.flush()?;
                continue;
            }
        };
        let reply = match scorer.score(&req.query, &req.prefix, &req.candidates) {
            Ok(scores) => {
                let scores: Vec<f64> = scores.into_iter().map(|s| s.to_f64_lossy()).collect();
                serde_json::json!({ "id": req.id, "scores": scores })
            }
            Err(e) => serde_json::json!({ "id": req.id, "error": e.to_string() }),
        };
        writeln!(writer, "{reply}")?;
        writer.flush()?;
    }
    Ok(())
}

//! Line-delimited JSON helpers shared by the file formats.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Non-blank lines of a UTF-8 file with their 1-based line numbers.
pub fn read_lines(path: &Path) -> io::Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}

/// Serialize each item as one JSON object per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("record serialization is infallible"));
        out.push('\n');
    }
    out
}

/// Write through a temporary sibling file and rename over the target.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Parse a JSON line, tolerating bare non-finite tokens (`NaN`, `Infinity`)
/// and out-of-range literals that strict JSON rejects. Only meant for records
/// whose numeric fields are read through [`LenientNumber`].
pub fn parse_lenient<T: DeserializeOwned>(line: &str) -> Result<T, serde_json::Error> {
    match serde_json::from_str(line) {
        Ok(v) => Ok(v),
        Err(strict) => serde_json::from_str(&quote_bare_tokens(line)).map_err(|_| strict),
    }
}

fn quote_bare_tokens(line: &str) -> String {
    let mut out = String::with_capacity(line.len() + 16);
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '"' {
            out.push(c);
            while let Some(s) = chars.next() {
                out.push(s);
                if s == '\\' {
                    if let Some(esc) = chars.next() {
                        out.push(esc);
                    }
                } else if s == '"' {
                    break;
                }
            }
        } else if c.is_ascii_alphanumeric() || c == '-' || c == '+' || c == '.' {
            let mut tok = String::from(c);
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '-' || n == '+' || n == '.' {
                    tok.push(n);
                    chars.next();
                } else {
                    break;
                }
            }
            if matches!(tok.as_str(), "true" | "false" | "null") {
                out.push_str(&tok);
            } else {
                out.push('"');
                out.push_str(&tok);
                out.push('"');
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// A JSON number that may also arrive as a quoted or bare token such as
/// `NaN`, `Infinity` or `1e999`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LenientNumber(pub f64);

impl<'de> Deserialize<'de> for LenientNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(LenientNumber(v)),
            Raw::Text(s) => s
                .trim()
                .parse::<f64>()
                .map(LenientNumber)
                .map_err(|_| serde::de::Error::custom(format!("not a number: {s:?}"))),
        }
    }
}

/// Serde adapter for log-probabilities: `-inf` is written as the string
/// `"-inf"` because JSON has no infinities.
pub mod log_prob {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            Err(serde::ser::Error::custom("log-probability must be finite or -inf"))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let LenientNumber(v) = LenientNumber::deserialize(d)?;
        Ok(v)
    }
}

//! Line-oriented text formats for keys and ciphertext sequences.
//!
//! Every file starts with a magic header line, followed by `key=value` lines
//! in a fixed order and, for ciphertext files, one element per line. Integers
//! are lowercase big-endian hex without leading zeros (zero is `0`), except
//! `count`, which is decimal. Lines end with a single LF, including the last.
//!
//! ```text
//! RDHET-PUBKEY v1      RDHET-PRIVKEY v1     RDHET-CTEXT v1
//! bits=<hex>           N=<hex>              kind=encrypted|marked
//! N=<hex>              lambda=<hex>         count=<decimal>
//! g=<hex>              mu=<hex>             N=<hex>
//!                                           <hex element>...
//! ```

use std::io::{self, Read, Write};

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::paillier::{Ciphertext, PaillierError, PrivateKey, PublicKey};
use crate::protocol::{CipherSeq, SeqKind};

pub const FORMAT_VERSION: u32 = 1;

const PUBKEY_MAGIC: &str = "RDHET-PUBKEY";
const PRIVKEY_MAGIC: &str = "RDHET-PRIVKEY";
const CTEXT_MAGIC: &str = "RDHET-CTEXT";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported format version {found}")]
    VersionMismatch { found: String },
    #[error("expected a {expected} file, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("count field says {declared} elements, file holds {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("file modulus does not match the key")]
    ModulusMismatch,
    #[error("element {index} is outside [1, N^2)")]
    ElementOutOfRange { index: usize },
    #[error("invalid key material: {0}")]
    InvalidKey(#[from] PaillierError),
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

fn to_hex(v: &BigUint) -> String {
    format!("{v:x}")
}

fn parse_hex(s: &str, line: usize) -> Result<BigUint> {
    let canonical = !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(parse_err(
            line,
            format!("not canonical lowercase hex: {s:?}"),
        ));
    }
    BigUint::parse_bytes(s.as_bytes(), 16).ok_or_else(|| parse_err(line, "bad hex"))
}

/// Splits input into LF-terminated lines, rejecting CR and a missing final LF.
struct Lines<'a> {
    lines: Vec<&'a str>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Result<Self> {
        if text.is_empty() {
            return Err(parse_err(1, "empty file"));
        }
        if !text.ends_with('\n') {
            return Err(parse_err(
                text.lines().count(),
                "final line is not LF-terminated",
            ));
        }
        if let Some(pos) = text.find('\r') {
            let line = text[..pos].matches('\n').count() + 1;
            return Err(parse_err(line, "carriage return in file"));
        }
        let mut lines: Vec<&str> = text.split('\n').collect();
        lines.pop();
        Ok(Lines { lines, next: 0 })
    }

    fn line_no(&self) -> usize {
        self.next + 1
    }

    fn next_line(&mut self) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.next)
            .copied()
            .ok_or_else(|| parse_err(self.line_no(), "unexpected end of file"))?;
        self.next += 1;
        Ok(line)
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line_no = self.line_no();
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| parse_err(line_no, format!("expected `{key}=`, found {line:?}")))
    }

    fn hex_field(&mut self, key: &str) -> Result<BigUint> {
        let line_no = self.line_no();
        let value = self.field(key)?;
        parse_hex(value, line_no)
    }

    fn header(&mut self, magic: &str) -> Result<()> {
        let line = self.next_line()?;
        let (found_magic, version) = line
            .split_once(' ')
            .ok_or_else(|| parse_err(1, format!("bad header {line:?}")))?;
        if !found_magic.starts_with("RDHET-") {
            return Err(parse_err(1, format!("bad header {line:?}")));
        }
        if found_magic != magic {
            return Err(FormatError::KindMismatch {
                expected: magic.to_string(),
                found: found_magic.to_string(),
            });
        }
        if version != format!("v{FORMAT_VERSION}") {
            return Err(FormatError::VersionMismatch {
                found: version.to_string(),
            });
        }
        Ok(())
    }

    fn remaining(&self) -> &[&'a str] {
        &self.lines[self.next..]
    }

    fn finish(&self) -> Result<()> {
        if self.next != self.lines.len() {
            return Err(parse_err(self.line_no(), "trailing content"));
        }
        Ok(())
    }
}

fn read_text<R: Read>(mut reader: R) -> Result<String> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if !bytes.is_ascii() {
        return Err(parse_err(1, "file is not 7-bit ASCII"));
    }
    // ASCII is valid UTF-8.
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn write_public_key<W: Write>(mut w: W, pk: &PublicKey) -> io::Result<()> {
    write!(
        w,
        "{PUBKEY_MAGIC} v{FORMAT_VERSION}\nbits={:x}\nN={}\ng={}\n",
        pk.bits(),
        to_hex(pk.n()),
        to_hex(pk.g())
    )
}

pub fn read_public_key<R: Read>(reader: R) -> Result<PublicKey> {
    let text = read_text(reader)?;
    let mut lines = Lines::new(&text)?;
    lines.header(PUBKEY_MAGIC)?;
    let bits_line = lines.line_no();
    let bits = lines.hex_field("bits")?;
    let bits = u64::try_from(bits).map_err(|_| parse_err(bits_line, "bits too large"))?;
    let n = lines.hex_field("N")?;
    let g = lines.hex_field("g")?;
    lines.finish()?;
    Ok(PublicKey::from_parts(bits, n, g)?)
}

pub fn write_private_key<W: Write>(mut w: W, sk: &PrivateKey) -> io::Result<()> {
    write!(
        w,
        "{PRIVKEY_MAGIC} v{FORMAT_VERSION}\nN={}\nlambda={}\nmu={}\n",
        to_hex(sk.n()),
        to_hex(sk.lambda()),
        to_hex(sk.mu())
    )
}

pub fn read_private_key<R: Read>(reader: R) -> Result<PrivateKey> {
    let text = read_text(reader)?;
    let mut lines = Lines::new(&text)?;
    lines.header(PRIVKEY_MAGIC)?;
    let n = lines.hex_field("N")?;
    let lambda = lines.hex_field("lambda")?;
    let mu = lines.hex_field("mu")?;
    lines.finish()?;
    Ok(PrivateKey::from_parts(n, lambda, mu)?)
}

/// A parsed ciphertext file: the sequence plus the modulus it claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherFile {
    pub n: BigUint,
    pub seq: CipherSeq,
}

pub fn write_cipherseq<W: Write>(mut w: W, seq: &CipherSeq, n: &BigUint) -> io::Result<()> {
    let mut out = format!(
        "{CTEXT_MAGIC} v{FORMAT_VERSION}\nkind={}\ncount={}\nN={}\n",
        seq.kind(),
        seq.len(),
        to_hex(n)
    );
    for c in seq.elements() {
        out.push_str(&to_hex(c.value()));
        out.push('\n');
    }
    w.write_all(out.as_bytes())
}

/// Parses a ciphertext file without any key, checking elements against the
/// modulus the file itself declares.
pub fn read_cipher_file<R: Read>(reader: R) -> Result<CipherFile> {
    let text = read_text(reader)?;
    let mut lines = Lines::new(&text)?;
    lines.header(CTEXT_MAGIC)?;

    let kind_line = lines.line_no();
    let kind = match lines.field("kind")? {
        "encrypted" => SeqKind::Encrypted,
        "marked" => SeqKind::Marked,
        other => return Err(parse_err(kind_line, format!("unknown kind {other:?}"))),
    };
    let count_line = lines.line_no();
    let count_str = lines.field("count")?;
    if count_str.is_empty()
        || !count_str.bytes().all(|b| b.is_ascii_digit())
        || (count_str.len() > 1 && count_str.starts_with('0'))
    {
        return Err(parse_err(count_line, format!("bad count {count_str:?}")));
    }
    let declared: usize = count_str
        .parse()
        .map_err(|_| parse_err(count_line, "count too large"))?;
    let n = lines.hex_field("N")?;
    if n < BigUint::from(2u32) {
        return Err(parse_err(count_line + 1, "modulus must be at least 2"));
    }
    let n_squared = &n * &n;

    let first_element_line = lines.line_no();
    let records = lines.remaining();
    if records.len() != declared {
        return Err(FormatError::CountMismatch {
            declared,
            found: records.len(),
        });
    }
    let mut elements = Vec::with_capacity(declared);
    for (index, record) in records.iter().enumerate() {
        let value = parse_hex(record, first_element_line + index)?;
        if value.is_zero() || value >= n_squared {
            return Err(FormatError::ElementOutOfRange { index });
        }
        elements.push(Ciphertext::new(value));
    }
    Ok(CipherFile {
        n,
        seq: CipherSeq::new(elements, kind),
    })
}

/// Parses a ciphertext file and checks that it was produced under modulus `n`.
pub fn read_cipherseq<R: Read>(reader: R, n: &BigUint) -> Result<CipherSeq> {
    let file = read_cipher_file(reader)?;
    if file.n != *n {
        return Err(FormatError::ModulusMismatch);
    }
    Ok(file.seq)
}

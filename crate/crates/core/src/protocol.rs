//! Reversible hiding of secret bits in Paillier-encrypted text.
//!
//! Three roles share this module:
//!
//! * the content owner turns text into bytes and encrypts each byte
//!   ([`text_to_values`], [`encrypt_text`]);
//! * the data hider, holding only the public key and the scrambling key,
//!   forces the parity of ciphertext `k` to equal scrambled secret bit `k`
//!   by re-randomizing it ([`embed`]);
//! * the receiver reads the bits back from parities with the scrambling key
//!   alone ([`extract`]), or decrypts the marked sequence with the private
//!   key alone ([`recover`]).
//!
//! Re-randomization multiplies by an encryption of zero, so every marked
//! ciphertext still decrypts to the original byte.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::RngCore;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::paillier::{self, Ciphertext, PaillierError, PrivateKey, PublicKey};

/// Re-randomizations tried on one element before embedding gives up.
pub const MAX_RERANDOMIZATIONS: usize = 128;

/// Width of the bit-count header used in framed mode.
pub const HEADER_BITS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error("modulus must exceed 255 to encrypt bytes")]
    ModulusTooSmall,
    #[error("capacity exceeded: {required} bits required, {available} available")]
    CapacityExceeded { required: usize, available: usize },
    #[error(
        "element {index} kept the wrong parity after {MAX_RERANDOMIZATIONS} re-randomizations"
    )]
    EmbeddingStuck { index: usize },
    #[error("expected a {expected} sequence, found {found}")]
    WrongKind { expected: SeqKind, found: SeqKind },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("element {index} decrypted to a value outside [0, 255]")]
    DecryptedValueOutOfRange { index: usize },
    #[error("recovered bytes are not valid UTF-8")]
    InvalidEncoding,
    #[error("embedding rate is undefined for an empty cover")]
    EmptyCover,
    #[error("secret payload is empty")]
    EmptyPayload,
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Byte values of a cover text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverText {
    bytes: Vec<u8>,
}

impl CoverText {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        CoverText { bytes }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeqKind {
    Encrypted,
    Marked,
}

impl SeqKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeqKind::Encrypted => "encrypted",
            SeqKind::Marked => "marked",
        }
    }
}

impl std::fmt::Display for SeqKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered ciphertexts of an encrypted or marked text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherSeq {
    elements: Vec<Ciphertext>,
    kind: SeqKind,
}

impl CipherSeq {
    pub fn new(elements: Vec<Ciphertext>, kind: SeqKind) -> Self {
        CipherSeq { elements, kind }
    }

    pub fn elements(&self) -> &[Ciphertext] {
        &self.elements
    }

    pub fn kind(&self) -> SeqKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Parity of every element, `true` for odd.
    pub fn parities(&self) -> Vec<bool> {
        self.elements.iter().map(Ciphertext::is_odd).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Framing {
    /// Bit count travels out of band.
    #[default]
    Raw,
    /// A 32-bit big-endian, unscrambled bit count precedes the payload.
    Framed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretPayload {
    pub bits: Vec<bool>,
    pub tau: Vec<u8>,
    pub framing: Framing,
}

impl SecretPayload {
    pub fn new(bits: Vec<bool>, tau: impl Into<Vec<u8>>, framing: Framing) -> Self {
        SecretPayload {
            bits,
            tau: tau.into(),
            framing,
        }
    }

    pub fn from_bytes(secret: &[u8], tau: impl Into<Vec<u8>>, framing: Framing) -> Self {
        Self::new(bytes_to_bits(secret), tau, framing)
    }

    /// Number of cover elements this payload occupies.
    pub fn embedded_len(&self) -> usize {
        match self.framing {
            Framing::Raw => self.bits.len(),
            Framing::Framed => HEADER_BITS + self.bits.len(),
        }
    }
}

/// Splits bytes into bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// Packs bits most significant first; a trailing partial byte is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &bit)| acc | ((bit as u8) << (7 - i)))
        })
        .collect()
}

pub fn text_to_values(text: &str) -> CoverText {
    CoverText::from_bytes(text.as_bytes().to_vec())
}

pub fn values_to_text(cover: &CoverText) -> Result<String> {
    String::from_utf8(cover.bytes.clone()).map_err(|_| ProtocolError::InvalidEncoding)
}

/// Encrypts every byte under a fresh randomizer.
///
/// Randomizers are drawn serially from `rng` before the exponentiations fan
/// out, so the output is a deterministic function of the generator state.
pub fn encrypt_text<R: RngCore + ?Sized>(
    pk: &PublicKey,
    cover: &CoverText,
    rng: &mut R,
) -> Result<CipherSeq> {
    if *pk.n() <= BigUint::from(255u32) {
        return Err(ProtocolError::ModulusTooSmall);
    }
    let randomizers = cover
        .bytes
        .iter()
        .map(|_| paillier::sample_unit(pk.n(), rng))
        .collect::<paillier::Result<Vec<_>>>()?;
    let elements = cover
        .bytes
        .par_iter()
        .zip(randomizers.par_iter())
        .map(|(&byte, r)| pk.encrypt(&BigUint::from(byte), r))
        .collect::<paillier::Result<Vec<_>>>()?;
    Ok(CipherSeq::new(elements, SeqKind::Encrypted))
}

/// SHA-256 counter-mode keystream: block `j` is `SHA-256(tau || j)` with `j`
/// as an 8-byte big-endian integer; bits are taken most significant first.
pub fn keystream(tau: &[u8], len: usize) -> Vec<bool> {
    let blocks = len.div_ceil(256);
    let mut bytes = Vec::with_capacity(blocks * 32);
    for j in 0..blocks as u64 {
        let mut hasher = Sha256::new();
        hasher.update(tau);
        hasher.update(j.to_be_bytes());
        bytes.extend_from_slice(&hasher.finalize());
    }
    let mut bits = bytes_to_bits(&bytes);
    bits.truncate(len);
    bits
}

pub fn scramble(bits: &[bool], tau: &[u8]) -> Vec<bool> {
    bits.iter()
        .zip(keystream(tau, bits.len()))
        .map(|(&b, k)| b ^ k)
        .collect()
}

/// Inverse of [`scramble`]; XOR with the same keystream is an involution.
pub fn descramble(bits: &[bool], tau: &[u8]) -> Vec<bool> {
    scramble(bits, tau)
}

/// Bits as they appear in ciphertext parities, header included.
fn embedded_bits(payload: &SecretPayload) -> Result<Vec<bool>> {
    let scrambled = scramble(&payload.bits, &payload.tau);
    match payload.framing {
        Framing::Raw => Ok(scrambled),
        Framing::Framed => {
            let count =
                u32::try_from(payload.bits.len()).map_err(|_| ProtocolError::CapacityExceeded {
                    required: payload.embedded_len(),
                    available: u32::MAX as usize,
                })?;
            let mut bits = bytes_to_bits(&count.to_be_bytes());
            bits.extend(scrambled);
            Ok(bits)
        }
    }
}

/// Counters collected while embedding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmbedStats {
    /// Cover elements that carry a bit (header included).
    pub embedded_bits: usize,
    /// Re-randomizations performed across all elements.
    pub rerandomizations: usize,
}

/// Hides `payload` in the parities of an encrypted sequence.
pub fn embed<R: RngCore + ?Sized>(
    pk: &PublicKey,
    cover_enc: &CipherSeq,
    payload: &SecretPayload,
    rng: &mut R,
) -> Result<CipherSeq> {
    embed_with_stats(pk, cover_enc, payload, rng).map(|(seq, _)| seq)
}

pub fn embed_with_stats<R: RngCore + ?Sized>(
    pk: &PublicKey,
    cover_enc: &CipherSeq,
    payload: &SecretPayload,
    rng: &mut R,
) -> Result<(CipherSeq, EmbedStats)> {
    if cover_enc.kind != SeqKind::Encrypted {
        return Err(ProtocolError::WrongKind {
            expected: SeqKind::Encrypted,
            found: cover_enc.kind,
        });
    }
    if payload.bits.is_empty() {
        return Err(ProtocolError::EmptyPayload);
    }
    let required = payload.embedded_len();
    if required > cover_enc.len() {
        return Err(ProtocolError::CapacityExceeded {
            required,
            available: cover_enc.len(),
        });
    }

    let bits = embedded_bits(payload)?;
    let mut stats = EmbedStats {
        embedded_bits: bits.len(),
        rerandomizations: 0,
    };
    let mut elements = cover_enc.elements.clone();
    for (index, (element, &bit)) in elements.iter_mut().zip(&bits).enumerate() {
        let mut attempts = 0;
        while element.is_odd() != bit {
            if attempts == MAX_RERANDOMIZATIONS {
                return Err(ProtocolError::EmbeddingStuck { index });
            }
            *element = pk.rerandomize_random(element, rng)?;
            attempts += 1;
        }
        stats.rerandomizations += attempts;
    }
    Ok((CipherSeq::new(elements, SeqKind::Marked), stats))
}

/// Reads secret bits from ciphertext parities using only `tau`.
///
/// In raw mode `bit_count` gives the payload length; in framed mode it is
/// ignored and the length comes from the header.
pub fn extract(
    marked: &CipherSeq,
    tau: &[u8],
    bit_count: usize,
    framing: Framing,
) -> Result<Vec<bool>> {
    if marked.kind != SeqKind::Marked {
        return Err(ProtocolError::WrongKind {
            expected: SeqKind::Marked,
            found: marked.kind,
        });
    }
    let parities = marked.parities();
    let raw = match framing {
        Framing::Raw => {
            if bit_count > parities.len() {
                return Err(ProtocolError::CapacityExceeded {
                    required: bit_count,
                    available: parities.len(),
                });
            }
            &parities[..bit_count]
        }
        Framing::Framed => {
            if parities.len() < HEADER_BITS {
                return Err(ProtocolError::MalformedHeader(format!(
                    "sequence has {} elements, header needs {HEADER_BITS}",
                    parities.len()
                )));
            }
            let header = bits_to_bytes(&parities[..HEADER_BITS]);
            let count = u32::from_be_bytes([header[0], header[1], header[2], header[3]]) as usize;
            let available = parities.len() - HEADER_BITS;
            if count > available {
                return Err(ProtocolError::MalformedHeader(format!(
                    "header announces {count} bits, only {available} available"
                )));
            }
            &parities[HEADER_BITS..HEADER_BITS + count]
        }
    };
    Ok(descramble(raw, tau))
}

/// Decrypts every element back to its byte value using only the private key.
pub fn recover_values(sk: &PrivateKey, seq: &CipherSeq) -> Result<CoverText> {
    let bytes = seq
        .elements
        .par_iter()
        .enumerate()
        .map(|(index, c)| {
            let m = sk.decrypt(c)?;
            m.to_u8()
                .ok_or(ProtocolError::DecryptedValueOutOfRange { index })
        })
        .collect::<Result<Vec<u8>>>()?;
    Ok(CoverText::from_bytes(bytes))
}

/// Decrypts an encrypted or marked sequence back to the original text.
pub fn recover(sk: &PrivateKey, seq: &CipherSeq) -> Result<String> {
    values_to_text(&recover_values(sk, seq)?)
}

/// Secret bits carried per cover byte.
pub fn embedding_rate(secret_bits: usize, cover_bytes: usize) -> Result<f64> {
    if cover_bytes == 0 {
        return Err(ProtocolError::EmptyCover);
    }
    Ok(secret_bits as f64 / cover_bytes as f64)
}

//! Wall-clock benchmark of the full pipeline: keygen, encrypt, embed at full
//! capacity, and recover, one report row per (key size, text).

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::paillier::{self, PaillierError};
use crate::protocol::{self, Framing, ProtocolError, SecretPayload};

/// Sentences used when the caller supplies no texts (49 and 132 bytes).
pub const DEFAULT_TEXTS: [&str; 2] = [
    "Joe waited for the train, but the train was late.",
    "I looked for Mary and Samantha at the bus station, but they arrived at the station before noon and left on the bus before I arrived.",
];

pub const DEFAULT_KEY_SIZES: [u64; 3] = [512, 1024, 2048];

pub const DEFAULT_REPETITIONS: usize = 5;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bench text is empty")]
    EmptyText,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("round trip failed at {bits} bits: {what}")]
    RoundTrip { bits: u64, what: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub key_bits: u64,
    pub text: String,
    pub size_bytes: usize,
    pub er_bpb: f64,
    pub t_keygen: Duration,
    pub t_enc: Duration,
    pub t_emb: Duration,
    pub t_dec: Duration,
    /// Mean re-randomizations per embedded bit across repetitions.
    pub rerandomizations_per_bit: f64,
}

impl BenchReport {
    pub fn total(&self) -> Duration {
        self.t_keygen + self.t_enc + self.t_emb + self.t_dec
    }
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Runs one row: `repetitions` full pipelines, reporting median timings.
///
/// Any failed round trip aborts the row.
pub fn bench_row<R: RngCore + ?Sized>(
    bits: u64,
    text: &str,
    repetitions: usize,
    rng: &mut R,
) -> Result<BenchReport, BenchError> {
    if text.is_empty() {
        return Err(BenchError::EmptyText);
    }
    if repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    let cover = protocol::text_to_values(text);
    let mut keygen = Vec::with_capacity(repetitions);
    let mut enc = Vec::with_capacity(repetitions);
    let mut emb = Vec::with_capacity(repetitions);
    let mut dec = Vec::with_capacity(repetitions);
    let mut rerandomizations = 0usize;
    let mut embedded = 0usize;

    for _ in 0..repetitions {
        let (keys, t) = timed(|| paillier::generate_keypair(bits, rng));
        let (pk, sk) = keys?;
        keygen.push(t);

        let (seq, t) = timed(|| protocol::encrypt_text(&pk, &cover, rng));
        let seq = seq?;
        enc.push(t);

        let secret: Vec<bool> = (0..cover.len()).map(|_| rng.gen()).collect();
        let tau: [u8; 16] = rng.gen();
        let payload = SecretPayload::new(secret.clone(), tau.to_vec(), Framing::Raw);
        let (marked, t) = timed(|| protocol::embed_with_stats(&pk, &seq, &payload, rng));
        let (marked, stats) = marked?;
        emb.push(t);
        rerandomizations += stats.rerandomizations;
        embedded += stats.embedded_bits;

        let (recovered, t) = timed(|| protocol::recover(&sk, &marked));
        dec.push(t);
        if recovered? != text {
            return Err(BenchError::RoundTrip {
                bits,
                what: "recovered text differs",
            });
        }
        if protocol::extract(&marked, &tau, secret.len(), Framing::Raw)? != secret {
            return Err(BenchError::RoundTrip {
                bits,
                what: "extracted secret differs",
            });
        }
    }

    Ok(BenchReport {
        key_bits: bits,
        text: text.to_string(),
        size_bytes: cover.len(),
        er_bpb: protocol::embedding_rate(cover.len(), cover.len())?,
        t_keygen: median(keygen),
        t_enc: median(enc),
        t_emb: median(emb),
        t_dec: median(dec),
        rerandomizations_per_bit: rerandomizations as f64 / embedded as f64,
    })
}

/// Runs every text at every key size, key sizes outermost per text.
pub fn run_bench<R: RngCore + ?Sized>(
    key_sizes: &[u64],
    texts: &[String],
    repetitions: usize,
    rng: &mut R,
) -> Result<Vec<BenchReport>, BenchError> {
    let mut rows = Vec::with_capacity(key_sizes.len() * texts.len());
    for text in texts {
        for &bits in key_sizes {
            rows.push(bench_row(bits, text, repetitions, rng)?);
        }
    }
    Ok(rows)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn format_csv(rows: &[BenchReport]) -> String {
    let mut out =
        String::from("key_bits,text,size_bytes,er_bpb,t_keygen,t_enc,t_emb,t_dec,rerand_per_bit\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.8},{:.8},{:.8},{:.8},{:.4}",
            r.key_bits,
            csv_field(&r.text),
            r.size_bytes,
            r.er_bpb,
            r.t_keygen.as_secs_f64(),
            r.t_enc.as_secs_f64(),
            r.t_emb.as_secs_f64(),
            r.t_dec.as_secs_f64(),
            r.rerandomizations_per_bit,
        );
    }
    out
}

const TEXT_COLUMN_WIDTH: usize = 40;

fn shorten(text: &str) -> String {
    if text.chars().count() <= TEXT_COLUMN_WIDTH {
        text.to_string()
    } else {
        let head: String = text.chars().take(TEXT_COLUMN_WIDTH - 3).collect();
        format!("{head}...")
    }
}

pub fn format_table(rows: &[BenchReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8}  {:<w$}  {:>6}  {:>8}  {:>12}  {:>12}  {:>12}  {:>12}",
        "Key size",
        "Text",
        "Size",
        "ER (bpb)",
        "KeyGen (s)",
        "Enc (s)",
        "Emb (s)",
        "Dec (s)",
        w = TEXT_COLUMN_WIDTH
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>8}  {:<w$}  {:>6}  {:>8}  {:>12.8}  {:>12.8}  {:>12.8}  {:>12.8}",
            r.key_bits,
            shorten(&r.text),
            r.size_bytes,
            r.er_bpb,
            r.t_keygen.as_secs_f64(),
            r.t_enc.as_secs_f64(),
            r.t_emb.as_secs_f64(),
            r.t_dec.as_secs_f64(),
            w = TEXT_COLUMN_WIDTH
        );
    }
    out
}

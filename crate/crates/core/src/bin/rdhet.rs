//! Command-line front end for the three parties: content owner (`keygen`,
//! `encrypt`), data hider (`embed`), and receiver (`extract`, `recover`),
//! plus the `bench` timing harness.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on protocol, crypto, or
//! I/O errors.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use rdhet::bench::{self, DEFAULT_KEY_SIZES, DEFAULT_REPETITIONS, DEFAULT_TEXTS};
use rdhet::io::{self as formats, FormatError};
use rdhet::paillier;
use rdhet::protocol::{self, Framing, SecretPayload};

#[derive(Parser)]
#[command(
    name = "rdhet",
    version,
    about = "Reversible data hiding in Paillier-encrypted text"
)]
struct Cli {
    /// Seed every random choice from one ChaCha20 stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct FramingArgs {
    /// Payload carries a 32-bit bit-count header.
    #[arg(long, conflicts_with = "raw")]
    framed: bool,
    /// Bare payload bits with no header; extraction needs --count (default).
    #[arg(long)]
    raw: bool,
}

impl FramingArgs {
    fn mode(&self) -> Framing {
        if self.framed {
            Framing::Framed
        } else {
            Framing::Raw
        }
    }
}

#[derive(clap::Args)]
#[group(required = true, multiple = false)]
struct TauArgs {
    /// Scrambling key as hex.
    #[arg(long)]
    tau: Option<String>,
    /// File whose raw bytes are the scrambling key.
    #[arg(long)]
    tau_file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Paillier keypair.
    Keygen {
        #[arg(long, default_value_t = 2048)]
        bits: u64,
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "priv")]
        private: PathBuf,
    },
    /// Encrypt a text file byte by byte (content owner).
    Encrypt {
        /// Public key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Hide secret bytes in an encrypted text (data hider).
    Embed {
        /// Public key file.
        #[arg(long)]
        key: PathBuf,
        /// Encrypted cover file.
        #[arg(long)]
        cover: PathBuf,
        /// Secret payload, read as raw bytes.
        #[arg(long)]
        secret: PathBuf,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        framing: FramingArgs,
        /// Embed only the first N bits of the secret.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Read hidden bits from a marked file using only the scrambling key.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        framing: FramingArgs,
        /// Number of hidden bits (required in raw mode).
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Decrypt an encrypted or marked file back to the original text.
    Recover {
        /// Private key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Time keygen, encryption, full-capacity embedding and decryption.
    Bench {
        /// Comma-separated key sizes.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KEY_SIZES)]
        bits: Vec<u64>,
        /// Cover text; repeatable.
        #[arg(long)]
        text: Vec<String>,
        /// File with one cover text per line.
        #[arg(long)]
        text_file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
}

/// Failures that map to exit status 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn open(path: &Path) -> anyhow::Result<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("cannot write {}", path.display()))
}

fn read_tau(args: &TauArgs) -> anyhow::Result<Vec<u8>> {
    match (&args.tau, &args.tau_file) {
        (Some(hex_tau), None) => {
            hex::decode(hex_tau).map_err(|e| usage(format!("--tau is not valid hex: {e}")))
        }
        (None, Some(path)) => {
            fs::read(path).with_context(|| format!("cannot read {}", path.display()))
        }
        _ => Err(usage("exactly one of --tau or --tau-file is required")),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut rng = match cli.seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    };

    match cli.command {
        Command::Keygen {
            bits,
            public,
            private,
        } => {
            let (pk, sk) = paillier::generate_keypair(bits, &mut rng)?;
            write_file(&public, |w| formats::write_public_key(w, &pk))?;
            write_file(&private, |w| formats::write_private_key(w, &sk))?;
        }
        Command::Encrypt { key, input, output } => {
            let pk = formats::read_public_key(open(&key)?)?;
            let text =
                fs::read(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let cover = protocol::CoverText::from_bytes(text);
            let seq = protocol::encrypt_text(&pk, &cover, &mut rng)?;
            write_file(&output, |w| formats::write_cipherseq(w, &seq, pk.n()))?;
        }
        Command::Embed {
            key,
            cover,
            secret,
            tau,
            framing,
            count,
            output,
        } => {
            let tau = read_tau(&tau)?;
            let pk = formats::read_public_key(open(&key)?)?;
            let seq = formats::read_cipherseq(open(&cover)?, pk.n())?;
            let secret =
                fs::read(&secret).with_context(|| format!("cannot read {}", secret.display()))?;
            let mut bits = protocol::bytes_to_bits(&secret);
            if let Some(count) = count {
                if count > bits.len() {
                    return Err(usage(format!(
                        "--count {count} exceeds the {} bits in the secret file",
                        bits.len()
                    )));
                }
                bits.truncate(count);
            }
            let payload = SecretPayload::new(bits, tau, framing.mode());
            let marked = protocol::embed(&pk, &seq, &payload, &mut rng)?;
            write_file(&output, |w| formats::write_cipherseq(w, &marked, pk.n()))?;
        }
        Command::Extract {
            input,
            tau,
            framing,
            count,
            output,
        } => {
            let mode = framing.mode();
            let count = match (mode, count) {
                (Framing::Raw, None) => return Err(usage("raw extraction requires --count")),
                (_, count) => count.unwrap_or(0),
            };
            let tau = read_tau(&tau)?;
            let file = formats::read_cipher_file(open(&input)?)?;
            let bits = protocol::extract(&file.seq, &tau, count, mode)?;
            let bytes = protocol::bits_to_bytes(&bits);
            write_file(&output, |w| w.write_all(&bytes))?;
        }
        Command::Recover { key, input, output } => {
            let sk = formats::read_private_key(open(&key)?)?;
            let file = formats::read_cipher_file(open(&input)?)?;
            if file.n != *sk.n() {
                return Err(FormatError::ModulusMismatch.into());
            }
            let text = protocol::recover_values(&sk, &file.seq)?;
            write_file(&output, |w| w.write_all(text.bytes()))?;
        }
        Command::Bench {
            bits,
            mut text,
            text_file,
            reps,
            format,
        } => {
            if let Some(path) = text_file {
                let contents = fs::read_to_string(&path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                text.extend(
                    contents
                        .lines()
                        .filter(|l| !l.is_empty())
                        .map(str::to_string),
                );
            }
            if text.is_empty() {
                text = DEFAULT_TEXTS.iter().map(|s| s.to_string()).collect();
            }
            if reps == 0 {
                return Err(usage("--reps must be at least 1"));
            }
            let rows = bench::run_bench(&bits, &text, reps, &mut rng)?;
            let out = match format {
                OutputFormat::Table => bench::format_table(&rows),
                OutputFormat::Csv => bench::format_csv(&rows),
            };
            print!("{out}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

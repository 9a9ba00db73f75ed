//! Reversible data hiding in Paillier-encrypted text.
//!
//! A content owner encrypts each byte of a text with Paillier. A data hider
//! holding only the public key embeds one secret bit per ciphertext by
//! re-randomizing ciphertexts until their parity matches the (scrambled) bit.
//! The receiver extracts the bits from parities with the scrambling key alone,
//! and independently recovers the exact text with the private key alone.
//!
//! ```
//! use rand::SeedableRng;
//! use rdhet::{paillier, protocol};
//!
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
//! let (pk, sk) = paillier::generate_keypair(256, &mut rng).unwrap();
//! let cover = protocol::text_to_values("hello");
//! let enc = protocol::encrypt_text(&pk, &cover, &mut rng).unwrap();
//!
//! let payload = protocol::SecretPayload::new(
//!     vec![true, false, true],
//!     b"shared key".to_vec(),
//!     protocol::Framing::Raw,
//! );
//! let marked = protocol::embed(&pk, &enc, &payload, &mut rng).unwrap();
//!
//! let bits = protocol::extract(&marked, b"shared key", 3, protocol::Framing::Raw).unwrap();
//! assert_eq!(bits, vec![true, false, true]);
//! assert_eq!(protocol::recover(&sk, &marked).unwrap(), "hello");
//! ```

pub mod bench;
pub mod io;
pub mod paillier;
pub mod prime;
pub mod protocol;

pub use paillier::{Ciphertext, PaillierError, PrivateKey, PublicKey};
pub use protocol::{CipherSeq, CoverText, Framing, ProtocolError, SecretPayload, SeqKind};

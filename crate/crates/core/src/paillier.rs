//! Paillier cryptosystem over `Z_{N^2}`.
//!
//! Encryption of `m` under `(N, g)` with randomizer `r` is
//! `g^m * r^N mod N^2`. Multiplying two ciphertexts adds their plaintexts
//! modulo `N`, and multiplying by `r^N` (an encryption of zero) changes the
//! ciphertext value without changing the plaintext.

use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

use crate::prime;

/// Smallest supported modulus size in bits.
pub const MIN_KEY_BITS: u64 = 16;

/// Rejection-sampling attempts in [`sample_unit`] before giving up.
pub const MAX_UNIT_ATTEMPTS: usize = 1024;

/// Full keypair attempts in [`generate_keypair`] before giving up.
const MAX_KEYGEN_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaillierError {
    #[error("invalid key size {0}: must be even and at least {MIN_KEY_BITS} bits")]
    InvalidBits(u64),
    #[error("prime generation failed after the retry cap")]
    PrimeGenerationFailure,
    #[error("plaintext is outside [0, N)")]
    PlaintextOutOfRange,
    #[error("randomizer is not a unit modulo N")]
    BadRandomizer,
    #[error("no unit modulo N found after {MAX_UNIT_ATTEMPTS} attempts")]
    RetryExhausted,
    #[error("L-function argument is not congruent to 1 modulo N")]
    NotCongruentOne,
    #[error("ciphertext is not a unit modulo N^2")]
    MalformedCiphertext,
    #[error("invalid key: {0}")]
    InvalidKey(&'static str),
}

pub type Result<T> = std::result::Result<T, PaillierError>;

/// A Paillier ciphertext: an element of the unit group modulo `N^2`.
///
/// The wrapper carries no key reference; validity is checked by the key
/// operations that consume it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext(BigUint);

impl Ciphertext {
    pub fn new(value: BigUint) -> Self {
        Ciphertext(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_value(self) -> BigUint {
        self.0
    }

    /// `true` when the ciphertext integer is odd.
    pub fn is_odd(&self) -> bool {
        self.0.bit(0)
    }
}

impl fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ciphertext({:x})", self.0)
    }
}

impl From<u64> for Ciphertext {
    fn from(v: u64) -> Self {
        Ciphertext(BigUint::from(v))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    bits: u64,
    n: BigUint,
    g: BigUint,
    n_squared: BigUint,
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicKey")
            .field("bits", &self.bits)
            .field("n", &format_args!("{:x}", self.n))
            .field("g", &format_args!("{:x}", self.g))
            .finish()
    }
}

impl PublicKey {
    /// Builds a public key from stored parts, checking the structural
    /// invariants that do not need the factorization.
    pub fn from_parts(bits: u64, n: BigUint, g: BigUint) -> Result<Self> {
        if n < BigUint::from(2u32) || n.is_even() {
            return Err(PaillierError::InvalidKey("N must be odd and at least 3"));
        }
        if bits != n.bits() {
            return Err(PaillierError::InvalidKey("bit size does not match N"));
        }
        let n_squared = &n * &n;
        if g.is_zero() || g >= n_squared || !g.gcd(&n_squared).is_one() {
            return Err(PaillierError::InvalidKey("g is not a unit modulo N^2"));
        }
        Ok(PublicKey {
            bits,
            n,
            g,
            n_squared,
        })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    fn uses_standard_generator(&self) -> bool {
        self.g == &self.n + 1u32
    }

    fn check_randomizer(&self, r: &BigUint) -> Result<()> {
        if r.is_zero() || *r >= self.n || !r.gcd(&self.n).is_one() {
            return Err(PaillierError::BadRandomizer);
        }
        Ok(())
    }

    /// Checks that `c` lies in `[1, N^2)` and is coprime to `N^2`.
    pub fn validate(&self, c: &Ciphertext) -> Result<()> {
        is_unit(&c.0, &self.n_squared)
            .then_some(())
            .ok_or(PaillierError::MalformedCiphertext)
    }

    /// `g^m * r^N mod N^2`.
    pub fn encrypt(&self, m: &BigUint, r: &BigUint) -> Result<Ciphertext> {
        if *m >= self.n {
            return Err(PaillierError::PlaintextOutOfRange);
        }
        self.check_randomizer(r)?;
        let g_m = if self.uses_standard_generator() {
            // (1 + N)^m = 1 + mN (mod N^2)
            (BigUint::one() + m * &self.n) % &self.n_squared
        } else {
            self.g.modpow(m, &self.n_squared)
        };
        let r_n = r.modpow(&self.n, &self.n_squared);
        Ok(Ciphertext(g_m * r_n % &self.n_squared))
    }

    /// Encrypts with a freshly sampled randomizer.
    pub fn encrypt_random<R: RngCore + ?Sized>(
        &self,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Ciphertext> {
        let r = sample_unit(&self.n, rng)?;
        self.encrypt(m, &r)
    }

    /// Ciphertext product; decrypts to the plaintext sum modulo `N`.
    pub fn add(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
        self.validate(c1)?;
        self.validate(c2)?;
        Ok(Ciphertext(&c1.0 * &c2.0 % &self.n_squared))
    }

    /// Multiplies `c` by the zero encryption `g^0 * r^N`.
    pub fn rerandomize(&self, c: &Ciphertext, r: &BigUint) -> Result<Ciphertext> {
        self.validate(c)?;
        self.check_randomizer(r)?;
        let r_n = r.modpow(&self.n, &self.n_squared);
        Ok(Ciphertext(&c.0 * r_n % &self.n_squared))
    }

    pub fn rerandomize_random<R: RngCore + ?Sized>(
        &self,
        c: &Ciphertext,
        rng: &mut R,
    ) -> Result<Ciphertext> {
        let r = sample_unit(&self.n, rng)?;
        self.rerandomize(c, &r)
    }
}

/// Decryption key: `lambda = lcm(p - 1, q - 1)` and
/// `mu = L(g^lambda mod N^2)^-1 mod N`, bound to the modulus `N`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey {
    n: BigUint,
    n_squared: BigUint,
    lambda: BigUint,
    mu: BigUint,
}

impl fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrivateKey")
            .field("n", &format_args!("{:x}", self.n))
            .finish_non_exhaustive()
    }
}

impl PrivateKey {
    pub fn from_parts(n: BigUint, lambda: BigUint, mu: BigUint) -> Result<Self> {
        if n < BigUint::from(2u32) || n.is_even() {
            return Err(PaillierError::InvalidKey("N must be odd and at least 3"));
        }
        if lambda.is_zero() {
            return Err(PaillierError::InvalidKey("lambda must be positive"));
        }
        if mu.is_zero() || mu >= n || !mu.gcd(&n).is_one() {
            return Err(PaillierError::InvalidKey("mu is not a unit modulo N"));
        }
        let n_squared = &n * &n;
        Ok(PrivateKey {
            n,
            n_squared,
            lambda,
            mu,
        })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    /// `L(c^lambda mod N^2) * mu mod N`.
    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigUint> {
        if !is_unit(&c.0, &self.n_squared) {
            return Err(PaillierError::MalformedCiphertext);
        }
        let u = c.0.modpow(&self.lambda, &self.n_squared);
        // A valid ciphertext always satisfies u = 1 (mod N).
        let l = l_function(&u, &self.n).map_err(|_| PaillierError::MalformedCiphertext)?;
        Ok(l * &self.mu % &self.n)
    }
}

fn is_unit(value: &BigUint, modulus: &BigUint) -> bool {
    !value.is_zero() && value < modulus && value.gcd(modulus).is_one()
}

/// `L(x) = (x - 1) / N`, defined only for `x = 1 (mod N)`.
pub fn l_function(x: &BigUint, n: &BigUint) -> Result<BigUint> {
    if x.is_zero() {
        return Err(PaillierError::NotCongruentOne);
    }
    let (quotient, remainder) = (x - 1u32).div_rem(n);
    if !remainder.is_zero() {
        return Err(PaillierError::NotCongruentOne);
    }
    Ok(quotient)
}

/// Uniform element of `Z_N^*` by rejection sampling over `[1, N)`.
pub fn sample_unit<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> Result<BigUint> {
    if *n < BigUint::from(2u32) {
        return Err(PaillierError::InvalidKey("modulus must be at least 2"));
    }
    let one = BigUint::one();
    for _ in 0..MAX_UNIT_ATTEMPTS {
        let r = rng.gen_biguint_range(&one, n);
        if r.gcd(n).is_one() {
            return Ok(r);
        }
    }
    Err(PaillierError::RetryExhausted)
}

fn mod_inverse(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let egcd = a.extended_gcd(&m);
    if !egcd.gcd.is_one() {
        return None;
    }
    egcd.x.mod_floor(&m).to_biguint()
}

/// Builds a keypair from two distinct primes using the generator `g = N + 1`.
pub fn keypair_from_primes(p: &BigUint, q: &BigUint) -> Result<(PublicKey, PrivateKey)> {
    let n = p * q;
    keypair_from_primes_with_generator(p, q, &n + 1u32)
}

/// Builds a keypair from two distinct primes and an explicit generator,
/// rejecting any `g` with `gcd(L(g^lambda mod N^2), N) != 1`.
///
/// Primality of `p` and `q` is the caller's responsibility.
pub fn keypair_from_primes_with_generator(
    p: &BigUint,
    q: &BigUint,
    g: BigUint,
) -> Result<(PublicKey, PrivateKey)> {
    let two = BigUint::from(2u32);
    if p == q || *p <= two || *q <= two {
        return Err(PaillierError::InvalidKey(
            "p and q must be distinct odd primes",
        ));
    }
    let n = p * q;
    let lambda = (p - 1u32).lcm(&(q - 1u32));
    let public = PublicKey::from_parts(n.bits(), n.clone(), g)?;

    let g_lambda = public.g.modpow(&lambda, &public.n_squared);
    let l = l_function(&g_lambda, &n)
        .map_err(|_| PaillierError::InvalidKey("g^lambda is not 1 modulo N"))?;
    let mu = mod_inverse(&l, &n).ok_or(PaillierError::InvalidKey(
        "L(g^lambda mod N^2) is not invertible modulo N",
    ))?;

    let private = PrivateKey::from_parts(n, lambda, mu)?;
    Ok((public, private))
}

/// Generates a keypair whose modulus has exactly `bits` bits.
pub fn generate_keypair<R: RngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey)> {
    if bits < MIN_KEY_BITS || bits & 1 == 1 {
        return Err(PaillierError::InvalidBits(bits));
    }
    let half = bits / 2;
    for _ in 0..MAX_KEYGEN_ATTEMPTS {
        let p = prime::random_prime(half, rng).ok_or(PaillierError::PrimeGenerationFailure)?;
        let q = prime::random_prime(half, rng).ok_or(PaillierError::PrimeGenerationFailure)?;
        if p == q {
            continue;
        }
        let n = &p * &q;
        let lambda = (&p - 1u32).lcm(&(&q - 1u32));
        // With g = N + 1, L(g^lambda mod N^2) = lambda mod N.
        if !lambda.gcd(&n).is_one() {
            continue;
        }
        debug_assert_eq!(n.bits(), bits);
        return keypair_from_primes(&p, &q);
    }
    Err(PaillierError::PrimeGenerationFailure)
}

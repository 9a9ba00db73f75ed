//! Probable-prime generation for Paillier moduli.
//!
//! Candidates are filtered by trial division against a small sieve and then
//! run through Miller-Rabin with randomly drawn bases.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::RngCore;

/// Miller-Rabin rounds applied to every candidate that survives trial division.
pub const MILLER_RABIN_ROUNDS: usize = 64;

/// Upper bound on candidates drawn before giving up on a single prime.
pub const MAX_PRIME_CANDIDATES: usize = 200_000;

const SIEVE_LIMIT: usize = 2048;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut composite = vec![false; SIEVE_LIMIT];
        let mut primes = Vec::new();
        for i in 2..SIEVE_LIMIT {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j < SIEVE_LIMIT {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Outcome of trial division: a definite answer, or "needs Miller-Rabin".
enum TrialDivision {
    Prime,
    Composite,
    Unknown,
}

fn trial_divide(n: &BigUint) -> TrialDivision {
    for &p in small_primes() {
        let p_big = BigUint::from(p);
        if &p_big * &p_big > *n {
            return TrialDivision::Prime;
        }
        if (n % p).is_zero() {
            return if *n == p_big {
                TrialDivision::Prime
            } else {
                TrialDivision::Composite
            };
        }
    }
    TrialDivision::Unknown
}

/// Miller-Rabin probable-prime test with `rounds` random bases.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    match trial_divide(n) {
        TrialDivision::Prime => return true,
        TrialDivision::Composite => return false,
        TrialDivision::Unknown => {}
    }

    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;

    // Bases are drawn from [2, n - 2].
    let upper = n - 1u32;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &upper);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Draws a probable prime of exactly `bits` bits whose two top bits are set.
///
/// Setting both top bits makes the product of two such primes exactly
/// `2 * bits` bits long. Returns `None` once [`MAX_PRIME_CANDIDATES`] are
/// exhausted.
pub fn random_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Option<BigUint> {
    debug_assert!(bits >= 3);
    for _ in 0..MAX_PRIME_CANDIDATES {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(bits - 2, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MILLER_RABIN_ROUNDS, rng) {
            return Some(candidate);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn is_prime_small(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !u64::is_multiple_of(n, d))
    }

    #[test]
    fn agrees_with_trial_division_below_ten_thousand() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for n in 0u64..10_000 {
            assert_eq!(
                is_probable_prime(&BigUint::from(n), 16, &mut rng),
                is_prime_small(n),
                "n = {n}"
            );
        }
    }

    #[test]
    fn rejects_carmichael_numbers() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265] {
            assert!(!is_probable_prime(&BigUint::from(n), 16, &mut rng), "{n}");
        }
    }

    #[test]
    fn accepts_known_large_prime() {
        // 2^127 - 1
        let m127 = (BigUint::one() << 127u32) - 1u32;
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        assert!(is_probable_prime(&m127, 32, &mut rng));
        assert!(!is_probable_prime(&(&m127 * &m127), 32, &mut rng));
    }

    #[test]
    fn random_prime_has_requested_shape() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for bits in [8u64, 16, 64, 256] {
            let p = random_prime(bits, &mut rng).unwrap();
            assert_eq!(p.bits(), bits);
            assert!(p.bit(bits - 2));
            if bits <= 16 {
                assert!(is_prime_small(p.to_u64_digits()[0]));
            }
        }
    }
}

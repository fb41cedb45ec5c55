//! Which primes `N` let the cyclic cone of order `N` be extended by the
//! elements `Id + g^j`.
//!
//! Over GF(2), `X^N + 1 = (X + 1) * Phi(X)` with `Phi = 1 + X + ... + X^(N-1)`.
//! `Phi` splits into `k` irreducible factors of degree `d`, where `d` is the
//! multiplicative order of 2 mod `N` and `k = (N - 1) / d`. The extension
//! fails exactly when some root `a` of `Phi` has `(a + 1)^N = 1`, i.e. when
//! `(X + 1)^N + 1` shares a factor with `Phi`. [`passes_extension`] runs that
//! single gcd; [`passes_extension_oracle`] instead checks
//! `gcd(X^N + 1, X^m + X + 1) = 1` for every `0 < m < N`.
//!
//! Fermat primes above 3 always pass and Mersenne primes always fail. Among
//! the first 500 primes, 73 is the only other failure.

use rayon::prelude::*;
use serde::Serialize;

use crate::gf2::BinPoly;

/// Largest prime accepted by the quadratic-cost oracle.
pub const ORACLE_MAX: u64 = 101;

/// Largest prime count accepted by [`scan_primes`].
pub const SCAN_MAX: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrimeError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is above the oracle limit of {ORACLE_MAX}")]
    OracleRange(u64),
    #[error("scan limit {0} is above {SCAN_MAX}")]
    ScanLimit(usize),
}

/// Deterministic trial division.
pub fn is_odd_prime(n: u64) -> bool {
    if n < 3 || n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn require_odd_prime(n: u64) -> Result<(), PrimeError> {
    if is_odd_prime(n) {
        Ok(())
    } else {
        Err(PrimeError::NotOddPrime(n))
    }
}

fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1u128 % m;
    let mut b = base as u128 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of 2 in `(Z/N)^*`.
pub fn order_of_two(prime: u64) -> Result<u64, PrimeError> {
    require_odd_prime(prime)?;
    let mut d = prime - 1;
    for q in prime_factors(prime - 1) {
        while d.is_multiple_of(q) && pow_mod(2, d / q, prime) == 1 {
            d /= q;
        }
    }
    Ok(d)
}

/// `(d, k)`: `Phi` has `k` irreducible factors, each of degree `d`.
pub fn decompose_group_ring(prime: u64) -> Result<(u64, u64), PrimeError> {
    let d = order_of_two(prime)?;
    Ok((d, (prime - 1) / d))
}

pub fn two_is_primitive_root(prime: u64) -> bool {
    order_of_two(prime).is_ok_and(|d| d == prime - 1)
}

/// Result of the fast extension test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionCheck {
    pub passes: bool,
    /// `gcd((X+1)^N + 1, Phi)` when it is nontrivial.
    pub witness: Option<BinPoly>,
}

/// Single-gcd test: `N` passes iff `gcd((X+1)^N + 1 mod Phi, Phi) = 1`.
pub fn passes_extension(prime: u64) -> Result<ExtensionCheck, PrimeError> {
    require_odd_prime(prime)?;
    let phi = BinPoly::all_ones(prime as usize);
    let x_plus_one = BinPoly::from_exponents(&[0, 1]);
    let h = x_plus_one
        .pow_mod(prime, &phi)
        .expect("Phi is nonzero")
        .add(&BinPoly::one());
    let g = h.gcd(&phi).expect("Phi is nonzero");
    Ok(if g.is_one() {
        ExtensionCheck {
            passes: true,
            witness: None,
        }
    } else {
        ExtensionCheck {
            passes: false,
            witness: Some(g),
        }
    })
}

/// Exhaustive check that `X^N + 1` and `X^m + X + 1` are coprime for every `0 < m < N`.
pub fn passes_extension_oracle(prime: u64) -> Result<bool, PrimeError> {
    require_odd_prime(prime)?;
    if prime > ORACLE_MAX {
        return Err(PrimeError::OracleRange(prime));
    }
    let n = prime as usize;
    let cyclic = BinPoly::from_exponents(&[n, 0]);
    Ok((1..n).all(|m| {
        let trinomial = BinPoly::from_exponents(&[m, 1, 0]);
        cyclic.gcd(&trinomial).expect("nonzero").is_one()
    }))
}

/// Everything known about one prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeClassification {
    #[serde(rename = "N")]
    pub prime: u64,
    pub order_of_2: u64,
    pub k: u64,
    pub two_is_primitive_root: bool,
    pub is_fermat: bool,
    pub is_mersenne: bool,
    pub passes_extension: bool,
    #[serde(serialize_with = "witness_as_string")]
    pub witness: Option<BinPoly>,
}

fn witness_as_string<S: serde::Serializer>(w: &Option<BinPoly>, s: S) -> Result<S::Ok, S::Error> {
    match w {
        Some(p) => s.serialize_some(&p.to_string()),
        None => s.serialize_none(),
    }
}

pub fn classify(prime: u64) -> Result<PrimeClassification, PrimeError> {
    let (d, k) = decompose_group_ring(prime)?;
    let check = passes_extension(prime)?;
    Ok(PrimeClassification {
        prime,
        order_of_2: d,
        k,
        two_is_primitive_root: k == 1,
        is_fermat: (prime - 1).is_power_of_two(),
        is_mersenne: (prime + 1).is_power_of_two(),
        passes_extension: check.passes,
        witness: check.witness,
    })
}

/// The first `limit` odd primes.
pub fn first_odd_primes(limit: usize) -> Vec<u64> {
    (3u64..)
        .step_by(2)
        .filter(|&n| is_odd_prime(n))
        .take(limit)
        .collect()
}

/// Classifications of the first `limit` odd primes, in increasing order.
pub fn scan_primes(limit: usize) -> Result<Vec<PrimeClassification>, PrimeError> {
    if limit > SCAN_MAX {
        return Err(PrimeError::ScanLimit(limit));
    }
    first_odd_primes(limit)
        .into_par_iter()
        .map(classify)
        .collect()
}

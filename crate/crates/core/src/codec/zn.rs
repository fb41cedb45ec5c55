//! Shift kernels for powers of the Sylvester matrix.
//!
//! A word `x` of `n = N - 1` bits is the polynomial `sum x_i X^i` modulo
//! `Phi = 1 + X + ... + X^(N-1)`, and the Sylvester matrix multiplies by `X`.
//! Multiplying by `X^k` is a rotation by `k` inside `N` bits followed by a
//! reduction that fires when the rotated value has bit `n` set; in word terms
//!
//! ```text
//! g^k x = (x << k) ^ (x >> (N - k)) ^ (bit (n - k) of x ? all_ones : 0)
//! ```
//!
//! which for `N = 17` is the familiar 16-bit `(x << k) ^ (x >> (17 - k)) ^ mask`.

use super::Word;
use crate::gf2::BitVector;

/// `g^k x` for the Sylvester generator of order `prime`, `0 <= k < prime`.
///
/// Panics if `x` is not `prime - 1` bits wide or `k >= prime`; the checked
/// form is [`super::CodeSpec::mul_gk`].
pub fn mul_gk(prime: usize, x: &Word, k: usize) -> Word {
    let n = prime - 1;
    assert_eq!(x.len(), n, "word width must be N - 1");
    assert!(k < prime, "power {k} out of range for N = {prime}");
    if k == 0 {
        return x.clone();
    }
    let mut y = x.shl(k);
    y ^= &x.shr(prime - k);
    if x.get(n - k) {
        y ^= &BitVector::ones(n);
    }
    y
}

/// `(Id + g^z)^-1` as a short Horner chain.
///
/// Because `g` has prime order `N` and `gcd(z, N) = 1`,
/// `(Id + g^z)^-1 = Id + g^(2z) + g^(4z) + ... + g^((N-1)z)`, evaluated as
/// `w + g^(2z) (w + g^(2z) (... (w + g^(2z) w)))` with `(N - 1) / 2` shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnePlusPowerInverse {
    prime: usize,
    step: usize,
    rounds: usize,
}

impl OnePlusPowerInverse {
    /// `z` is reduced mod `prime`; panics if it reduces to zero.
    pub fn new(prime: usize, z: usize) -> Self {
        let z = z % prime;
        assert!(z != 0, "Id + g^0 = 0 has no inverse");
        Self {
            prime,
            step: (2 * z) % prime,
            rounds: (prime - 1) / 2,
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        let mut acc = w.clone();
        for _ in 0..self.rounds {
            acc = mul_gk(self.prime, &acc, self.step);
            acc ^= w;
        }
        acc
    }

    /// Number of `mul_gk` calls per application.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// The exponents `e` such that the applier computes `sum g^e`, reduced mod `N`.
    pub fn exponents(&self) -> Vec<usize> {
        (0..=self.rounds)
            .map(|j| (j * self.step) % self.prime)
            .collect()
    }
}

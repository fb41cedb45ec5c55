//! Encoding and two-erasure reconstruction for cone-based RAID-6 codes.
//!
//! A stripe holds `K` data words `d_0..d_{K-1}` and two parity words
//!
//! ```text
//! P = d_0 + d_1 + ... + d_{K-1}
//! Q = c_0 d_0 + c_1 d_1 + ... + c_{K-1} d_{K-1}
//! ```
//!
//! where `c_k` is the `k`-th element of a cone. Three schemes are provided:
//!
//! | scheme        | word bits | coefficients                              | max `K`  |
//! |---------------|-----------|-------------------------------------------|----------|
//! | `zn-basic`    | `N - 1`   | `g^k`, `g` the Sylvester matrix of order N | `N`      |
//! | `zn-extended` | `N - 1`   | `g^k`, then `Id + g^j` for `j = 1..N-1`    | `2N - 1` |
//! | `rs256`       | 8         | `{02}^k` in GF(256)                        | 255      |
//!
//! Disk indices run `0..K` for data, `K` for P and `K + 1` for Q.

mod kernel;
mod rs;
mod zn;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::cone::{self, ConeError};
use crate::gf2::{self, BitMatrix, BitVector};
use crate::primes;

pub use kernel::{
    ops_per_word, rs_syndrome, zn17_syndrome, CountingOps, LaneOps, OpCounts, Swar16, Swar8,
    SyndromeKernel,
};
pub use rs::{mul2 as rs_mul2, rs_tables, RsTables};
pub use zn::{mul_gk, OnePlusPowerInverse};

/// One `n`-bit symbol: what a single disk stores for one stripe row.
pub type Word = BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ZnBasic,
    ZnExtended,
    Rs256,
}

impl Scheme {
    /// Numeric code used in shard headers.
    pub fn code(self) -> u8 {
        match self {
            Scheme::ZnBasic => 0,
            Scheme::ZnExtended => 1,
            Scheme::Rs256 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Scheme::ZnBasic),
            1 => Some(Scheme::ZnExtended),
            2 => Some(Scheme::Rs256),
            _ => None,
        }
    }

    pub fn is_zn(self) -> bool {
        !matches!(self, Scheme::Rs256)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ZnBasic => "zn-basic",
            Scheme::ZnExtended => "zn-extended",
            Scheme::Rs256 => "rs256",
        })
    }
}

impl FromStr for Scheme {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zn-basic" => Ok(Scheme::ZnBasic),
            "zn-extended" => Ok(Scheme::ZnExtended),
            "rs256" => Ok(Scheme::Rs256),
            other => Err(CodecError::UnknownScheme(other.to_string())),
        }
    }
}

/// How a data disk's coefficient acts on a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    /// `g^k`.
    Power(usize),
    /// `Id + g^j`.
    OnePlusPower(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("unknown scheme {0:?} (expected zn-basic, zn-extended or rs256)")]
    UnknownScheme(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(usize),
    #[error("word width {bits} exceeds the {max}-bit limit", max = gf2::MAX_DIM)]
    WordTooWide { bits: usize },
    #[error("{scheme} supports at most {max} data disks, requested {requested}")]
    TooManyDisks {
        scheme: Scheme,
        max: usize,
        requested: usize,
    },
    #[error("at least one data disk is required")]
    NoDataDisks,
    #[error("N = {prime} does not admit the extended cone (witness {witness})")]
    ExtensionUnsupported { prime: usize, witness: String },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("word width {found}, expected {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("{found} words supplied, expected {expected}")]
    WordCount { expected: usize, found: usize },
    #[error("power {k} out of range 0..{prime}")]
    PowerOutOfRange { k: usize, prime: usize },
    #[error("operation needs a zn scheme")]
    NotZn,
    #[error("operation needs the rs256 scheme")]
    NotRs,
    #[error("invalid erasure pattern: {0}")]
    InvalidPattern(String),
    #[error("erasure pattern {pattern:?} does not match missing slots {missing:?}")]
    PatternMismatch {
        pattern: Vec<usize>,
        missing: Vec<usize>,
    },
    #[error("disk {disk} out of range for {data_disks} data disks")]
    DiskOutOfRange { disk: usize, data_disks: usize },
}

/// The set of lost disks: one or two distinct indices in `0..K+2`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    lost: Vec<usize>,
}

impl ErasurePattern {
    pub fn new(lost: &[usize], total_disks: usize) -> Result<Self, CodecError> {
        let mut lost = lost.to_vec();
        lost.sort_unstable();
        if lost.is_empty() || lost.len() > 2 {
            return Err(CodecError::InvalidPattern(format!(
                "{} disks lost; between 1 and 2 can be recovered",
                lost.len()
            )));
        }
        if lost.windows(2).any(|w| w[0] == w[1]) {
            return Err(CodecError::InvalidPattern(format!(
                "repeated index in {lost:?}"
            )));
        }
        if let Some(&bad) = lost.iter().find(|&&i| i >= total_disks) {
            return Err(CodecError::InvalidPattern(format!(
                "index {bad} outside 0..{total_disks}"
            )));
        }
        Ok(Self { lost })
    }

    pub fn lost(&self) -> &[usize] {
        &self.lost
    }
}

/// One row of the array: `K` data words plus P and Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripe {
    pub data: Vec<Word>,
    pub p: Word,
    pub q: Word,
}

impl Stripe {
    /// All `K + 2` words in disk order.
    pub fn slots(&self) -> Vec<Option<Word>> {
        self.data
            .iter()
            .chain([&self.p, &self.q])
            .cloned()
            .map(Some)
            .collect()
    }

    pub fn word(&self, disk: usize) -> &Word {
        let k = self.data.len();
        match disk {
            d if d < k => &self.data[d],
            d if d == k => &self.p,
            _ => &self.q,
        }
    }
}

/// A concrete code instance.
///
/// Immutable apart from a memo of pair inverses used by `zn-extended`
/// reconstruction, which is filled idempotently and safe to share.
pub struct CodeSpec {
    scheme: Scheme,
    prime: Option<usize>,
    word_bits: usize,
    coefficients: Vec<BitMatrix>,
    kinds: Vec<Coefficient>,
    pair_inverses: RwLock<HashMap<(usize, usize), Arc<BitMatrix>>>,
}

impl Clone for CodeSpec {
    fn clone(&self) -> Self {
        Self {
            scheme: self.scheme,
            prime: self.prime,
            word_bits: self.word_bits,
            coefficients: self.coefficients.clone(),
            kinds: self.kinds.clone(),
            pair_inverses: RwLock::new(self.pair_inverses.read().expect("poisoned").clone()),
        }
    }
}

impl fmt::Debug for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CodeSpec")
            .field("scheme", &self.scheme)
            .field("prime", &self.prime)
            .field("word_bits", &self.word_bits)
            .field("data_disks", &self.data_disks())
            .finish()
    }
}

/// Matrix of `x -> {02} x` on bytes, bit `i` of the byte being coordinate `i`.
pub fn rs_generator_matrix() -> BitMatrix {
    BitMatrix::from_linear_map(8, |e| {
        BitVector::from_u64(8, rs::mul2(e.to_u64() as u8) as u64)
    })
    .expect("8 is a valid dimension")
}

impl CodeSpec {
    /// Builds a code. `prime` is ignored for `rs256`.
    pub fn new(scheme: Scheme, prime: usize, data_disks: usize) -> Result<Self, CodecError> {
        if data_disks == 0 {
            return Err(CodecError::NoDataDisks);
        }
        let too_many = |max: usize| CodecError::TooManyDisks {
            scheme,
            max,
            requested: data_disks,
        };
        match scheme {
            Scheme::Rs256 => {
                if data_disks > 255 {
                    return Err(too_many(255));
                }
                let cone = cone::cyclic_cone(&rs_generator_matrix(), 255)?;
                let coefficients = cone.into_elements().into_iter().take(data_disks).collect();
                Ok(Self::assemble(
                    scheme,
                    None,
                    8,
                    coefficients,
                    (0..data_disks).map(Coefficient::Power),
                ))
            }
            Scheme::ZnBasic | Scheme::ZnExtended => {
                if !primes::is_odd_prime(prime as u64) {
                    return Err(CodecError::NotOddPrime(prime));
                }
                if prime - 1 > gf2::MAX_DIM {
                    return Err(CodecError::WordTooWide { bits: prime - 1 });
                }
                let g = gf2::sylvester(prime).expect("prime >= 3");
                let cone = if scheme == Scheme::ZnBasic {
                    if data_disks > prime {
                        return Err(too_many(prime));
                    }
                    cone::cyclic_cone(&g, prime)?
                } else {
                    if data_disks > 2 * prime - 1 {
                        return Err(too_many(2 * prime - 1));
                    }
                    let check = primes::passes_extension(prime as u64).expect("checked prime");
                    if let Some(w) = check.witness {
                        return Err(CodecError::ExtensionUnsupported {
                            prime,
                            witness: w.to_string(),
                        });
                    }
                    cone::extended_cone(&g, prime)?
                };
                let coefficients = cone.into_elements().into_iter().take(data_disks).collect();
                let kinds = (0..data_disks).map(|k| {
                    if k < prime {
                        Coefficient::Power(k)
                    } else {
                        Coefficient::OnePlusPower(k + 1 - prime)
                    }
                });
                Ok(Self::assemble(
                    scheme,
                    Some(prime),
                    prime - 1,
                    coefficients,
                    kinds,
                ))
            }
        }
    }

    pub fn zn_basic(prime: usize, data_disks: usize) -> Result<Self, CodecError> {
        Self::new(Scheme::ZnBasic, prime, data_disks)
    }

    pub fn zn_extended(prime: usize, data_disks: usize) -> Result<Self, CodecError> {
        Self::new(Scheme::ZnExtended, prime, data_disks)
    }

    pub fn rs256(data_disks: usize) -> Result<Self, CodecError> {
        Self::new(Scheme::Rs256, 0, data_disks)
    }

    fn assemble(
        scheme: Scheme,
        prime: Option<usize>,
        word_bits: usize,
        coefficients: Vec<BitMatrix>,
        kinds: impl Iterator<Item = Coefficient>,
    ) -> Self {
        Self {
            scheme,
            prime,
            word_bits,
            coefficients,
            kinds: kinds.collect(),
            pair_inverses: RwLock::new(HashMap::new()),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// `N` for zn schemes.
    pub fn prime(&self) -> Option<usize> {
        self.prime
    }

    pub fn word_bits(&self) -> usize {
        self.word_bits
    }

    pub fn data_disks(&self) -> usize {
        self.kinds.len()
    }

    pub fn total_disks(&self) -> usize {
        self.kinds.len() + 2
    }

    /// Coefficient matrices `c_0..c_{K-1}`, a prefix of a verified cone.
    pub fn coefficients(&self) -> &[BitMatrix] {
        &self.coefficients
    }

    pub fn coefficient_kind(&self, disk: usize) -> Coefficient {
        self.kinds[disk]
    }

    pub fn zero_word(&self) -> Word {
        Word::zeros(self.word_bits)
    }

    fn check_word(&self, w: &Word) -> Result<(), CodecError> {
        if w.len() == self.word_bits {
            Ok(())
        } else {
            Err(CodecError::WidthMismatch {
                expected: self.word_bits,
                found: w.len(),
            })
        }
    }

    fn check_data(&self, data: &[Word]) -> Result<(), CodecError> {
        if data.len() != self.data_disks() {
            return Err(CodecError::WordCount {
                expected: self.data_disks(),
                found: data.len(),
            });
        }
        data.iter().try_for_each(|w| self.check_word(w))
    }

    /// `g^k x` for zn schemes.
    pub fn mul_gk(&self, x: &Word, k: usize) -> Result<Word, CodecError> {
        let prime = self.prime.ok_or(CodecError::NotZn)?;
        self.check_word(x)?;
        if k >= prime {
            return Err(CodecError::PowerOutOfRange { k, prime });
        }
        Ok(zn::mul_gk(prime, x, k))
    }

    /// Applier for `(Id + g^z)^-1`; `z` is reduced mod `N`.
    pub fn inv_one_plus_gz(&self, z: usize) -> Result<OnePlusPowerInverse, CodecError> {
        let prime = self.prime.ok_or(CodecError::NotZn)?;
        if z.is_multiple_of(prime) {
            return Err(CodecError::PowerOutOfRange { k: z, prime });
        }
        Ok(OnePlusPowerInverse::new(prime, z))
    }

    /// Multiplies by the generator: `g` for zn, `{02}` for rs256.
    fn times_generator(&self, w: &Word) -> Word {
        match self.prime {
            Some(prime) => zn::mul_gk(prime, w, 1),
            None => byte_word(rs::mul2(w.to_u64() as u8)),
        }
    }

    /// `c_disk * w`.
    pub fn apply_coefficient(&self, disk: usize, w: &Word) -> Word {
        match (self.prime, self.kinds[disk]) {
            (Some(prime), Coefficient::Power(k)) => zn::mul_gk(prime, w, k),
            (Some(prime), Coefficient::OnePlusPower(j)) => w ^ &zn::mul_gk(prime, w, j),
            (None, Coefficient::Power(k)) => {
                let t = rs_tables();
                byte_word(t.mul(t.pow_g(k), w.to_u64() as u8))
            }
            (None, Coefficient::OnePlusPower(_)) => unreachable!("rs256 uses plain powers"),
        }
    }

    /// `c_disk^-1 * w`.
    fn apply_coefficient_inverse(&self, disk: usize, w: &Word) -> Word {
        match (self.prime, self.kinds[disk]) {
            (Some(prime), Coefficient::Power(k)) => zn::mul_gk(prime, w, (prime - k) % prime),
            (Some(prime), Coefficient::OnePlusPower(j)) => {
                OnePlusPowerInverse::new(prime, j).apply(w)
            }
            (None, Coefficient::Power(k)) => {
                let t = rs_tables();
                byte_word(t.mul(t.pow_g(255 - k % 255), w.to_u64() as u8))
            }
            (None, Coefficient::OnePlusPower(_)) => unreachable!("rs256 uses plain powers"),
        }
    }

    /// Computes `(P, Q)`. Q is evaluated in Horner form with one
    /// multiplication by the generator per data word.
    pub fn encode(&self, data: &[Word]) -> Result<(Word, Word), CodecError> {
        self.check_data(data)?;
        Ok(self.parities(data))
    }

    fn parities(&self, data: &[Word]) -> (Word, Word) {
        let mut p = self.zero_word();
        for d in data {
            p ^= d;
        }
        (p, self.q_horner(data))
    }

    fn q_horner(&self, data: &[Word]) -> Word {
        match (self.scheme, self.prime) {
            (Scheme::ZnExtended, Some(prime)) if data.len() > prime => {
                // (Id + g^j) d = d + g^j d: fold the g^j part onto disk j and
                // add the plain part separately.
                let mut folded: Vec<Word> = data[..prime].to_vec();
                let mut plain = self.zero_word();
                for (offset, d) in data[prime..].iter().enumerate() {
                    folded[offset + 1] ^= d;
                    plain ^= d;
                }
                let mut q = self.horner(&folded);
                q ^= &plain;
                q
            }
            _ => self.horner(data),
        }
    }

    fn horner(&self, data: &[Word]) -> Word {
        let mut iter = data.iter().rev();
        let mut q = iter.next().cloned().unwrap_or_else(|| self.zero_word());
        for d in iter {
            q = self.times_generator(&q);
            q ^= d;
        }
        q
    }

    /// `sum c_k d_k` by explicit matrix-vector products. Reference path for tests.
    pub fn q_direct(&self, data: &[Word]) -> Result<Word, CodecError> {
        self.check_data(data)?;
        let mut q = self.zero_word();
        for (c, d) in self.coefficients.iter().zip(data) {
            q ^= &c.apply(d).expect("widths checked");
        }
        Ok(q)
    }

    pub fn encode_stripe(&self, data: Vec<Word>) -> Result<Stripe, CodecError> {
        let (p, q) = self.encode(&data)?;
        Ok(Stripe { data, p, q })
    }

    /// True iff both parity equations hold.
    pub fn verify_stripe(&self, stripe: &Stripe) -> bool {
        if self.check_data(&stripe.data).is_err()
            || self.check_word(&stripe.p).is_err()
            || self.check_word(&stripe.q).is_err()
        {
            return false;
        }
        let (p, q) = self.parities(&stripe.data);
        p == stripe.p && q == stripe.q
    }

    /// Small-write path: new `(P, Q)` after replacing data word `disk`.
    pub fn update_parity(
        &self,
        stripe: &Stripe,
        disk: usize,
        new_word: &Word,
    ) -> Result<(Word, Word), CodecError> {
        if disk >= self.data_disks() {
            return Err(CodecError::DiskOutOfRange {
                disk,
                data_disks: self.data_disks(),
            });
        }
        self.check_word(new_word)?;
        self.check_word(&stripe.data[disk])?;
        let delta = &stripe.data[disk] ^ new_word;
        let p = &stripe.p ^ &delta;
        let q = &stripe.q ^ &self.apply_coefficient(disk, &delta);
        Ok((p, q))
    }

    fn check_slots(
        &self,
        present: &[Option<Word>],
        pattern: &ErasurePattern,
    ) -> Result<(), CodecError> {
        if present.len() != self.total_disks() {
            return Err(CodecError::WordCount {
                expected: self.total_disks(),
                found: present.len(),
            });
        }
        let missing: Vec<usize> = (0..present.len())
            .filter(|&i| present[i].is_none())
            .collect();
        if missing != pattern.lost() {
            return Err(CodecError::PatternMismatch {
                pattern: pattern.lost().to_vec(),
                missing,
            });
        }
        present
            .iter()
            .flatten()
            .try_for_each(|w| self.check_word(w))
    }

    /// Recovers the words named by `pattern`, returned in ascending disk order.
    ///
    /// `present` has one slot per disk; exactly the lost slots must be `None`.
    pub fn reconstruct(
        &self,
        present: &[Option<Word>],
        pattern: &ErasurePattern,
    ) -> Result<Vec<Word>, CodecError> {
        self.check_slots(present, pattern)?;
        let k = self.data_disks();
        let (p_idx, q_idx) = (k, k + 1);
        let mut data: Vec<Word> = present[..k]
            .iter()
            .map(|w| w.clone().unwrap_or_else(|| self.zero_word()))
            .collect();
        let lost = pattern.lost();

        // Data words first; parities are recomputed afterwards.
        match *lost {
            [x] if x < k => {
                let p = present[p_idx].as_ref().expect("P present");
                data[x] = p ^ &self.parities(&data).0;
            }
            [x, y] if y < k => {
                let (px, qx) = self.parities(&data);
                let dp = present[p_idx].as_ref().expect("P present") ^ &px;
                let dq = present[q_idx].as_ref().expect("Q present") ^ &qx;
                let dy = self.solve_pair(x, y, &dp, &dq);
                data[x] = &dy ^ &dp;
                data[y] = dy;
            }
            [x, y] if x < k && y == p_idx => {
                let q = present[q_idx].as_ref().expect("Q present");
                let dq = q ^ &self.q_horner(&data);
                data[x] = self.apply_coefficient_inverse(x, &dq);
            }
            [x, y] if x < k && y == q_idx => {
                let p = present[p_idx].as_ref().expect("P present");
                data[x] = p ^ &self.parities(&data).0;
            }
            _ => {}
        }

        let (p, q) = self.parities(&data);
        Ok(lost
            .iter()
            .map(|&i| match i {
                i if i < k => data[i].clone(),
                i if i == p_idx => p.clone(),
                _ => q.clone(),
            })
            .collect())
    }

    /// Fills the `None` slots in place.
    pub fn repair(&self, slots: &mut [Option<Word>]) -> Result<(), CodecError> {
        let lost: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_none()).collect();
        if lost.is_empty() {
            return Ok(());
        }
        let pattern = ErasurePattern::new(&lost, self.total_disks())?;
        let words = self.reconstruct(slots, &pattern)?;
        for (i, w) in lost.into_iter().zip(words) {
            slots[i] = Some(w);
        }
        Ok(())
    }

    /// `d_y` from `dP = d_x + d_y` and `dQ = c_x d_x + c_y d_y`, `x < y`.
    fn solve_pair(&self, x: usize, y: usize, dp: &Word, dq: &Word) -> Word {
        match (self.prime, self.kinds[x], self.kinds[y]) {
            (None, _, _) => {
                let t = rs_tables();
                let (a, b) = rs_pair_factors(x, y);
                byte_word(t.mul(a, dp.to_u64() as u8) ^ t.mul(b, dq.to_u64() as u8))
            }
            (Some(prime), Coefficient::Power(a), Coefficient::Power(b)) => {
                // (g^a + g^b)^-1 = g^-a (Id + g^z)^-1 with z = b - a
                let z = (b + prime - a) % prime;
                let mut t = zn::mul_gk(prime, dq, (prime - a) % prime);
                t ^= dp;
                OnePlusPowerInverse::new(prime, z).apply(&t)
            }
            _ => {
                let inv = self.pair_inverse(x, y);
                let rhs = &self.apply_coefficient(x, dp) ^ dq;
                inv.apply(&rhs).expect("widths checked")
            }
        }
    }

    /// `(c_x + c_y)^-1`, computed once per pair.
    fn pair_inverse(&self, x: usize, y: usize) -> Arc<BitMatrix> {
        if let Some(m) = self.pair_inverses.read().expect("poisoned").get(&(x, y)) {
            return Arc::clone(m);
        }
        let sum = &self.coefficients[x] + &self.coefficients[y];
        let inv = Arc::new(sum.inverse().expect("cone sums are invertible"));
        self.pair_inverses
            .write()
            .expect("poisoned")
            .entry((x, y))
            .or_insert(inv)
            .clone()
    }

    /// The GF(256) path: `D_y = A dP + B dQ`, `D_x = D_y + dP`.
    pub fn rs_reconstruct(
        &self,
        present: &[Option<Word>],
        pattern: &ErasurePattern,
    ) -> Result<Vec<Word>, CodecError> {
        if self.scheme != Scheme::Rs256 {
            return Err(CodecError::NotRs);
        }
        self.reconstruct(present, pattern)
    }
}

/// `A = (1 + g^(y-x))^-1` and `B = (g^x + g^y)^-1`.
fn rs_pair_factors(x: usize, y: usize) -> (u8, u8) {
    let t = rs_tables();
    let a = t.gfexi[(y + 255 - x) % 255];
    let b = t.gfinv[(t.gfexp[x] ^ t.gfexp[y]) as usize];
    (a, b)
}

fn byte_word(b: u8) -> Word {
    Word::from_u64(8, b as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn words(bits: usize, values: &[u64]) -> Vec<Word> {
        values.iter().map(|&v| Word::from_u64(bits, v)).collect()
    }

    #[test]
    fn make_spec_examples() {
        let s = CodeSpec::zn_basic(17, 17).unwrap();
        assert_eq!(s.word_bits(), 16);
        assert_eq!(s.total_disks(), 19);
        assert!(matches!(
            CodeSpec::zn_extended(7, 13).unwrap_err(),
            CodecError::ExtensionUnsupported { prime: 7, .. }
        ));
        let small = CodeSpec::zn_basic(3, 2).unwrap();
        assert_eq!(small.word_bits(), 2);
        assert_eq!(small.total_disks(), 4);
    }

    #[test]
    fn make_spec_limits() {
        assert!(matches!(
            CodeSpec::zn_basic(5, 6),
            Err(CodecError::TooManyDisks { max: 5, .. })
        ));
        assert!(matches!(
            CodeSpec::zn_extended(5, 10),
            Err(CodecError::TooManyDisks { max: 9, .. })
        ));
        assert!(matches!(
            CodeSpec::rs256(256),
            Err(CodecError::TooManyDisks { max: 255, .. })
        ));
        assert_eq!(CodeSpec::rs256(0).unwrap_err(), CodecError::NoDataDisks);
        assert_eq!(
            CodeSpec::zn_basic(9, 3).unwrap_err(),
            CodecError::NotOddPrime(9)
        );
        assert!(CodeSpec::zn_extended(5, 9).is_ok());
        assert!(CodeSpec::zn_extended(5, 3).is_ok());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::ZnBasic, Scheme::ZnExtended, Scheme::Rs256] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
            assert_eq!(Scheme::from_code(s.code()), Some(s));
        }
        assert!("raid5".parse::<Scheme>().is_err());
    }

    #[test]
    fn small_code_parities() {
        // d_1 = (d11, d12) is bit 0 and bit 1 of the first word
        let spec = CodeSpec::zn_basic(3, 2).unwrap();
        let (p, q) = spec.encode(&words(2, &[0b01, 0b10])).unwrap();
        assert_eq!(p.to_u64(), 0b11);
        // pi21 = d11 + d22 = 1 + 1, pi22 = d12 + d21 + d22 = 0 + 0 + 1
        assert_eq!(q.to_u64(), 0b10);
    }

    #[test]
    fn zero_data_zero_parity() {
        for spec in [
            CodeSpec::zn_basic(5, 5).unwrap(),
            CodeSpec::rs256(4).unwrap(),
        ] {
            let data = vec![spec.zero_word(); spec.data_disks()];
            let (p, q) = spec.encode(&data).unwrap();
            assert!(p.is_zero() && q.is_zero());
        }
    }

    #[test]
    fn rs_q_examples() {
        let spec = CodeSpec::rs256(2).unwrap();
        let (_, q) = spec.encode(&words(8, &[0x80, 0])).unwrap();
        assert_eq!(q.to_u64(), 0x80);
        let (_, q) = spec.encode(&words(8, &[0, 0x80])).unwrap();
        assert_eq!(q.to_u64(), 0x1d);
    }

    #[test]
    fn encode_rejects_bad_input() {
        let spec = CodeSpec::zn_basic(5, 3).unwrap();
        assert!(matches!(
            spec.encode(&words(4, &[1, 2])),
            Err(CodecError::WordCount { .. })
        ));
        assert!(matches!(
            spec.encode(&words(5, &[1, 2, 3])),
            Err(CodecError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn horner_matches_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [
            CodeSpec::zn_basic(13, 13).unwrap(),
            CodeSpec::zn_extended(13, 25).unwrap(),
            CodeSpec::zn_extended(5, 7).unwrap(),
            CodeSpec::rs256(20).unwrap(),
        ] {
            for _ in 0..20 {
                let data: Vec<Word> = (0..spec.data_disks())
                    .map(|_| Word::random(spec.word_bits(), &mut rng))
                    .collect();
                let (_, q) = spec.encode(&data).unwrap();
                assert_eq!(q, spec.q_direct(&data).unwrap(), "{spec:?}");
            }
        }
    }

    #[test]
    fn kernel_mul_gk_checks() {
        let spec = CodeSpec::zn_basic(17, 4).unwrap();
        let x = Word::from_u64(16, 0x1234);
        assert_eq!(spec.mul_gk(&x, 0).unwrap(), x);
        assert!(matches!(
            spec.mul_gk(&x, 17),
            Err(CodecError::PowerOutOfRange { .. })
        ));
        assert_eq!(
            CodeSpec::rs256(3).unwrap().mul_gk(&x, 1).unwrap_err(),
            CodecError::NotZn
        );
        assert!(spec.inv_one_plus_gz(0).is_err());
        assert!(spec.inv_one_plus_gz(34).is_err());
    }

    #[test]
    fn erasure_pattern_validation() {
        assert!(ErasurePattern::new(&[], 5).is_err());
        assert!(ErasurePattern::new(&[1, 2, 3], 5).is_err());
        assert!(ErasurePattern::new(&[2, 2], 5).is_err());
        assert!(ErasurePattern::new(&[5], 5).is_err());
        assert_eq!(ErasurePattern::new(&[4, 1], 5).unwrap().lost(), &[1, 4]);
    }

    #[test]
    fn reconstruct_checks_pattern_against_slots() {
        let spec = CodeSpec::zn_basic(5, 3).unwrap();
        let stripe = spec.encode_stripe(words(4, &[1, 2, 3])).unwrap();
        let mut slots = stripe.slots();
        slots[0] = None;
        let wrong = ErasurePattern::new(&[1], 5).unwrap();
        assert!(matches!(
            spec.reconstruct(&slots, &wrong),
            Err(CodecError::PatternMismatch { .. })
        ));
        let right = ErasurePattern::new(&[0], 5).unwrap();
        assert_eq!(
            spec.reconstruct(&slots, &right).unwrap(),
            vec![stripe.data[0].clone()]
        );
    }

    #[test]
    fn all_pairs_recover() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for spec in [
            CodeSpec::zn_basic(3, 3).unwrap(),
            CodeSpec::zn_basic(7, 5).unwrap(),
            CodeSpec::zn_extended(5, 9).unwrap(),
            CodeSpec::zn_extended(13, 20).unwrap(),
            CodeSpec::rs256(6).unwrap(),
            CodeSpec::rs256(1).unwrap(),
        ] {
            let data: Vec<Word> = (0..spec.data_disks())
                .map(|_| Word::random(spec.word_bits(), &mut rng))
                .collect();
            let stripe = spec.encode_stripe(data).unwrap();
            let total = spec.total_disks();
            for i in 0..total {
                for j in i..total {
                    let lost: Vec<usize> = if i == j { vec![i] } else { vec![i, j] };
                    let mut slots = stripe.slots();
                    for &l in &lost {
                        slots[l] = None;
                    }
                    let pattern = ErasurePattern::new(&lost, total).unwrap();
                    let got = spec.reconstruct(&slots, &pattern).unwrap();
                    let expect: Vec<Word> = lost.iter().map(|&l| stripe.word(l).clone()).collect();
                    assert_eq!(got, expect, "{spec:?} lost {lost:?}");
                }
            }
        }
    }

    #[test]
    fn single_data_disk_rs() {
        let spec = CodeSpec::rs256(1).unwrap();
        let stripe = spec.encode_stripe(words(8, &[0xa7])).unwrap();
        assert_eq!(stripe.q, stripe.data[0]);
        let slots = vec![None, None, Some(stripe.q.clone())];
        let pattern = ErasurePattern::new(&[0, 1], 3).unwrap();
        let got = spec.rs_reconstruct(&slots, &pattern).unwrap();
        assert_eq!(got, vec![stripe.q.clone(), stripe.p.clone()]);
    }

    #[test]
    fn verify_and_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in [
            CodeSpec::zn_basic(11, 11).unwrap(),
            CodeSpec::zn_extended(17, 33).unwrap(),
            CodeSpec::rs256(10).unwrap(),
        ] {
            let bits = spec.word_bits();
            let data: Vec<Word> = (0..spec.data_disks())
                .map(|_| Word::random(bits, &mut rng))
                .collect();
            let mut stripe = spec.encode_stripe(data).unwrap();
            assert!(spec.verify_stripe(&stripe));

            for disk in [0, spec.data_disks() - 1] {
                let new = Word::random(bits, &mut rng);
                let (p, q) = spec.update_parity(&stripe, disk, &new).unwrap();
                stripe.data[disk] = new;
                assert_eq!((p.clone(), q.clone()), spec.encode(&stripe.data).unwrap());
                stripe.p = p;
                stripe.q = q;
            }
            let same = stripe.data[0].clone();
            assert_eq!(
                spec.update_parity(&stripe, 0, &same).unwrap(),
                (stripe.p.clone(), stripe.q.clone())
            );
            assert!(spec
                .update_parity(&stripe, spec.data_disks(), &same)
                .is_err());

            let mut bad = stripe.clone();
            bad.q.flip(bits - 1);
            assert!(!spec.verify_stripe(&bad));
        }
        let spec = CodeSpec::zn_basic(5, 2).unwrap();
        let zero = Stripe {
            data: vec![spec.zero_word(); 2],
            p: spec.zero_word(),
            q: spec.zero_word(),
        };
        assert!(spec.verify_stripe(&zero));
    }

    #[test]
    fn updates_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let spec = CodeSpec::zn_extended(5, 9).unwrap();
        let data: Vec<Word> = (0..9).map(|_| Word::random(4, &mut rng)).collect();
        let stripe = spec.encode_stripe(data).unwrap();
        let (a, b) = (Word::random(4, &mut rng), Word::random(4, &mut rng));

        let mut first = stripe.clone();
        let (p, q) = spec.update_parity(&first, 2, &a).unwrap();
        first.data[2] = a.clone();
        first.p = p;
        first.q = q;
        let (p, q) = spec.update_parity(&first, 7, &b).unwrap();

        let mut other = stripe.clone();
        let (p2, q2) = spec.update_parity(&other, 7, &b).unwrap();
        other.data[7] = b.clone();
        other.p = p2;
        other.q = q2;
        assert_eq!(spec.update_parity(&other, 2, &a).unwrap(), (p, q));
    }
}

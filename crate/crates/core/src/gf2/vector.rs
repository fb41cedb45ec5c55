use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use rand::Rng;
use smallvec::SmallVec;

pub(crate) const LIMB_BITS: usize = 64;

pub(crate) fn limbs_for(bits: usize) -> usize {
    bits.div_ceil(LIMB_BITS)
}

/// A fixed-length vector over GF(2).
///
/// Bit `i` holds coordinate `x_i`. Bits above `len` are always zero, so two
/// vectors of equal length compare equal exactly when their coordinates do.
/// Up to 256 bits are stored inline.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    limbs: SmallVec<[u64; 4]>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            limbs: SmallVec::from_elem(0, limbs_for(len)),
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            limbs: SmallVec::from_elem(u64::MAX, limbs_for(len)),
        };
        v.trim();
        v
    }

    /// The unit vector `e_i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector from the low `len` bits of `value`; higher bits are dropped.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if let Some(first) = v.limbs.first_mut() {
            *first = value;
        }
        v.trim();
        v
    }

    pub fn from_limbs(len: usize, limbs: &[u64]) -> Self {
        let mut v = Self::zeros(len);
        for (dst, src) in v.limbs.iter_mut().zip(limbs) {
            *dst = *src;
        }
        v.trim();
        v
    }

    /// Reads `len` bits from little-endian bytes (bit 0 is the LSB of byte 0).
    pub fn from_le_bytes(len: usize, bytes: &[u8]) -> Self {
        let mut v = Self::zeros(len);
        for (i, b) in bytes.iter().enumerate().take(len.div_ceil(8)) {
            v.limbs[i / 8] |= (*b as u64) << ((i % 8) * 8);
        }
        v.trim();
        v
    }

    /// Writes the vector as `ceil(len / 8)` little-endian bytes.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        (0..self.len.div_ceil(8))
            .map(|i| (self.limbs[i / 8] >> ((i % 8) * 8)) as u8)
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for limb in v.limbs.iter_mut() {
            *limb = rng.gen();
        }
        v.trim();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Low 64 bits as an integer.
    pub fn to_u64(&self) -> u64 {
        self.limbs.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.limbs[i / LIMB_BITS] >> (i % LIMB_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % LIMB_BITS);
        if bit {
            self.limbs[i / LIMB_BITS] |= mask;
        } else {
            self.limbs[i / LIMB_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.limbs[i / LIMB_BITS] ^= 1u64 << (i % LIMB_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.limbs
            .iter()
            .zip(&other.limbs)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Left shift by `k` (towards higher indices), truncated to `len` bits.
    pub fn shl(&self, k: usize) -> Self {
        let mut out = Self::zeros(self.len);
        if k >= self.len {
            return out;
        }
        let (limb_shift, bit_shift) = (k / LIMB_BITS, k % LIMB_BITS);
        let n = self.limbs.len();
        for i in (limb_shift..n).rev() {
            let src = i - limb_shift;
            let mut v = self.limbs[src] << bit_shift;
            if bit_shift != 0 && src > 0 {
                v |= self.limbs[src - 1] >> (LIMB_BITS - bit_shift);
            }
            out.limbs[i] = v;
        }
        out.trim();
        out
    }

    /// Logical right shift by `k` (towards lower indices).
    pub fn shr(&self, k: usize) -> Self {
        let mut out = Self::zeros(self.len);
        if k >= self.len {
            return out;
        }
        let (limb_shift, bit_shift) = (k / LIMB_BITS, k % LIMB_BITS);
        let n = self.limbs.len();
        for i in 0..n - limb_shift {
            let src = i + limb_shift;
            let mut v = self.limbs[src] >> bit_shift;
            if bit_shift != 0 && src + 1 < n {
                v |= self.limbs[src + 1] << (LIMB_BITS - bit_shift);
            }
            out.limbs[i] = v;
        }
        out
    }

    fn trim(&mut self) {
        let rem = self.len % LIMB_BITS;
        if rem != 0 {
            if let Some(last) = self.limbs.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl BitXorAssign<&BitVector> for BitVector {
    fn bitxor_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "length mismatch");
        for (a, b) in self.limbs.iter_mut().zip(&rhs.limbs) {
            *a ^= b;
        }
    }
}

impl BitXorAssign for BitVector {
    fn bitxor_assign(&mut self, rhs: BitVector) {
        *self ^= &rhs;
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl BitXor for BitVector {
    type Output = BitVector;

    fn bitxor(mut self, rhs: BitVector) -> BitVector {
        self ^= &rhs;
        self
    }
}

impl fmt::Debug for BitVector {
    /// Prints `x_0 x_1 ...` left to right.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, "]")
    }
}

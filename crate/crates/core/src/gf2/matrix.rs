use std::fmt;
use std::ops::Add;

use rand::Rng;

use super::vector::{limbs_for, BitVector, LIMB_BITS};
use super::Gf2Error;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 1024;

/// A dense square matrix over GF(2).
///
/// Row-major: entry `(i, j)` is bit `j` of row `i`. Each row occupies
/// `ceil(n / 64)` limbs and bits past column `n - 1` are kept zero, so the
/// derived `Eq` and `Hash` compare matrices by value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zero(n: usize) -> Result<Self, Gf2Error> {
        check_dim(n)?;
        let stride = limbs_for(n);
        Ok(Self {
            n,
            stride,
            data: vec![0; n * stride],
        })
    }

    pub fn identity(n: usize) -> Result<Self, Gf2Error> {
        let mut m = Self::zero(n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    /// Builds a matrix from rows of 0/1 entries.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, Gf2Error> {
        let n = rows.len();
        let mut m = Self::zero(n)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Gf2Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from row strings such as `"0101"`; character `j` is column `j`.
    pub fn from_strs(rows: &[&str]) -> Result<Self, Gf2Error> {
        let rows: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| r.bytes().map(|c| (c == b'1') as u8).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// The matrix whose column `j` is the image of `e_j` under `f`.
    pub fn from_linear_map(
        n: usize,
        f: impl Fn(&BitVector) -> BitVector,
    ) -> Result<Self, Gf2Error> {
        let mut m = Self::zero(n)?;
        for j in 0..n {
            let col = f(&BitVector::unit(n, j));
            if col.len() != n {
                return Err(Gf2Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            for i in 0..n {
                if col.get(i) {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, Gf2Error> {
        let mut m = Self::zero(n)?;
        for i in 0..n {
            let row = BitVector::random(n, rng);
            m.row_mut(i).copy_from_slice(row.limbs());
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range");
        (self.data[i * self.stride + j / LIMB_BITS] >> (j % LIMB_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range");
        let mask = 1u64 << (j % LIMB_BITS);
        let limb = &mut self.data[i * self.stride + j / LIMB_BITS];
        if bit {
            *limb |= mask;
        } else {
            *limb &= !mask;
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_vector(&self, i: usize) -> BitVector {
        BitVector::from_limbs(self.n, self.row(i))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&l| l == 0)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            self.row(i).iter().enumerate().all(|(l, &limb)| {
                let expect = if i / LIMB_BITS == l {
                    1u64 << (i % LIMB_BITS)
                } else {
                    0
                };
                limb == expect
            })
        })
    }

    /// True when every row and every column holds exactly one 1.
    pub fn is_permutation(&self) -> bool {
        let mut col_seen = BitVector::zeros(self.n);
        for i in 0..self.n {
            let ones: u32 = self.row(i).iter().map(|l| l.count_ones()).sum();
            if ones != 1 {
                return false;
            }
            let j = (0..self.n)
                .find(|&j| self.get(i, j))
                .expect("row has a one");
            if col_seen.get(j) {
                return false;
            }
            col_seen.set(j, true);
        }
        true
    }

    fn check_same(&self, other: &BitMatrix) -> Result<(), Gf2Error> {
        if self.n != other.n {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Entrywise XOR.
    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.add_assign(other);
        Ok(out)
    }

    pub(crate) fn add_assign(&mut self, other: &BitMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
    }

    /// `Id + self`.
    pub fn add_identity(&self) -> BitMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.stride + i / LIMB_BITS] ^= 1u64 << (i % LIMB_BITS);
        }
        out
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix {
            n: self.n,
            stride: self.stride,
            data: vec![0; self.data.len()],
        };
        for i in 0..self.n {
            let dst = i * self.stride;
            for (l, &limb) in self.row(i).iter().enumerate() {
                let mut bits = limb;
                while bits != 0 {
                    let j = l * LIMB_BITS + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let src = other.row(j);
                    for (d, s) in out.data[dst..dst + self.stride].iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product over GF(2).
    pub fn apply(&self, x: &BitVector) -> Result<BitVector, Gf2Error> {
        if x.len() != self.n {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.n);
        let xs = x.limbs();
        for i in 0..self.n {
            let parity = self
                .row(i)
                .iter()
                .zip(xs)
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
            if parity & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> BitMatrix {
        let mut result = Self::identity(self.n).expect("dimension already validated");
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = Self::zero(self.n).expect("dimension already validated");
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.eliminate(None)
    }

    /// Cheaper than [`BitMatrix::inverse`] when the inverse itself is not needed.
    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }

    /// Gauss-Jordan inverse, or `None` when the matrix is singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let mut work = self.clone();
        let mut inv = Self::identity(self.n).expect("dimension already validated");
        if work.eliminate(Some(&mut inv)) == self.n {
            Some(inv)
        } else {
            None
        }
    }

    /// Reduces `self` to reduced row echelon form, mirroring row operations
    /// onto `companion` when given. Returns the rank.
    fn eliminate(&mut self, mut companion: Option<&mut BitMatrix>) -> usize {
        let (n, stride) = (self.n, self.stride);
        let mut rank = 0;
        for col in 0..n {
            let (limb, mask) = (col / LIMB_BITS, 1u64 << (col % LIMB_BITS));
            let Some(pivot) = (rank..n).find(|&r| self.data[r * stride + limb] & mask != 0) else {
                continue;
            };
            if pivot != rank {
                self.swap_rows(pivot, rank);
                if let Some(c) = companion.as_deref_mut() {
                    c.swap_rows(pivot, rank);
                }
            }
            for r in 0..n {
                if r != rank && self.data[r * stride + limb] & mask != 0 {
                    self.xor_row_into(rank, r);
                    if let Some(c) = companion.as_deref_mut() {
                        c.xor_row_into(rank, r);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for l in 0..self.stride {
            self.data.swap(a * self.stride + l, b * self.stride + l);
        }
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        for l in 0..self.stride {
            let v = self.data[src * self.stride + l];
            self.data[dst * self.stride + l] ^= v;
        }
    }

    /// Smallest `k` in `1..=bound` with `self^k = Id`.
    pub fn order(&self, bound: usize) -> Result<Option<usize>, Gf2Error> {
        if !self.is_invertible() {
            return Err(Gf2Error::Singular);
        }
        let mut power = self.clone();
        for k in 1..=bound {
            if power.is_identity() {
                return Ok(Some(k));
            }
            power = power.mul_unchecked(self);
        }
        Ok(None)
    }
}

impl Add for &BitMatrix {
    type Output = BitMatrix;

    /// Panics on dimension mismatch; use [`BitMatrix::add`] for the checked form.
    fn add(self, rhs: &BitMatrix) -> BitMatrix {
        BitMatrix::add(self, rhs).expect("matrix dimensions differ")
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                write!(f, "{}", self.get(i, j) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn check_dim(n: usize) -> Result<(), Gf2Error> {
    if n == 0 || n > MAX_DIM {
        Err(Gf2Error::InvalidDimension(n))
    } else {
        Ok(())
    }
}

/// The `(N-1) x (N-1)` Sylvester matrix: ones on the subdiagonal and in the
/// last column. It is the companion matrix of `1 + X + ... + X^(N-1)`, so it
/// acts on words as multiplication by `X` modulo that polynomial.
pub fn sylvester(modulus: usize) -> Result<BitMatrix, Gf2Error> {
    if modulus < 3 {
        return Err(Gf2Error::SylvesterTooSmall(modulus));
    }
    let n = modulus - 1;
    let mut m = BitMatrix::zero(n)?;
    for i in 0..n {
        if i > 0 {
            m.set(i, i - 1, true);
        }
        m.set(i, n - 1, true);
    }
    Ok(m)
}

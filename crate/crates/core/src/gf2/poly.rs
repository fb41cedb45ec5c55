use std::fmt;

use super::Gf2Error;

/// A polynomial over GF(2). Coefficient of `X^i` is bit `i`.
///
/// Stored without trailing zero limbs, so the zero polynomial has no limbs
/// and `degree()` returns `None` for it.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinPoly {
    limbs: Vec<u64>,
}

impl BinPoly {
    pub fn zero() -> Self {
        Self { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    /// `X^k`.
    pub fn monomial(k: usize) -> Self {
        let mut limbs = vec![0; k / 64 + 1];
        limbs[k / 64] = 1 << (k % 64);
        Self { limbs }
    }

    /// Sum of `X^e` over `exponents`; repeated exponents cancel.
    pub fn from_exponents(exponents: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exponents {
            p.toggle(e);
        }
        p
    }

    /// Bit `i` of `bits` becomes the coefficient of `X^i`.
    pub fn from_bits(bits: u64) -> Self {
        let mut p = Self { limbs: vec![bits] };
        p.normalize();
        p
    }

    /// `1 + X + ... + X^(n-1)`.
    pub fn all_ones(n: usize) -> Self {
        let mut limbs = vec![u64::MAX; n.div_ceil(64)];
        if !n.is_multiple_of(64) {
            *limbs.last_mut().expect("n > 0") = (1u64 << (n % 64)) - 1;
        }
        let mut p = Self { limbs };
        p.normalize();
        p
    }

    pub fn degree(&self) -> Option<usize> {
        let top = *self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.limbs == [1]
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.limbs
            .get(i / 64)
            .is_some_and(|l| (l >> (i % 64)) & 1 == 1)
    }

    /// Exponents with nonzero coefficient, ascending.
    pub fn exponents(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (l, &limb) in self.limbs.iter().enumerate() {
            let mut bits = limb;
            while bits != 0 {
                out.push(l * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    fn toggle(&mut self, k: usize) {
        if self.limbs.len() <= k / 64 {
            self.limbs.resize(k / 64 + 1, 0);
        }
        self.limbs[k / 64] ^= 1 << (k % 64);
        self.normalize();
    }

    fn normalize(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn add(&self, other: &BinPoly) -> BinPoly {
        let (long, short) = if self.limbs.len() >= other.limbs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut limbs = long.limbs.clone();
        for (a, b) in limbs.iter_mut().zip(&short.limbs) {
            *a ^= b;
        }
        let mut p = BinPoly { limbs };
        p.normalize();
        p
    }

    pub fn mul(&self, other: &BinPoly) -> BinPoly {
        if self.is_zero() || other.is_zero() {
            return BinPoly::zero();
        }
        let mut limbs = vec![0u64; self.limbs.len() + other.limbs.len()];
        for (i, &a) in self.limbs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.limbs.iter().enumerate() {
                let prod = clmul(a, b);
                limbs[i + j] ^= prod as u64;
                limbs[i + j + 1] ^= (prod >> 64) as u64;
            }
        }
        let mut p = BinPoly { limbs };
        p.normalize();
        p
    }

    /// XORs `other * X^shift` into `self`.
    fn xor_shifted(&mut self, other: &BinPoly, shift: usize) {
        let (ls, bs) = (shift / 64, shift % 64);
        let needed = other.limbs.len() + ls + 1;
        if self.limbs.len() < needed {
            self.limbs.resize(needed, 0);
        }
        for (i, &l) in other.limbs.iter().enumerate() {
            self.limbs[i + ls] ^= l << bs;
            if bs != 0 {
                self.limbs[i + ls + 1] ^= l >> (64 - bs);
            }
        }
        self.normalize();
    }

    /// Euclidean division: `(q, r)` with `self = q * divisor + r`, `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &BinPoly) -> Result<(BinPoly, BinPoly), Gf2Error> {
        let dd = divisor.degree().ok_or(Gf2Error::ZeroPolynomial)?;
        let mut rem = self.clone();
        let mut quot = BinPoly::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            rem.xor_shifted(divisor, shift);
            quot.toggle(shift);
        }
        Ok((quot, rem))
    }

    pub fn rem(&self, modulus: &BinPoly) -> Result<BinPoly, Gf2Error> {
        let dd = modulus.degree().ok_or(Gf2Error::ZeroPolynomial)?;
        let mut rem = self.clone();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            rem.xor_shifted(modulus, rd - dd);
        }
        Ok(rem)
    }

    /// Monic greatest common divisor by Euclid's algorithm.
    pub fn gcd(&self, other: &BinPoly) -> Result<BinPoly, Gf2Error> {
        if self.is_zero() && other.is_zero() {
            return Err(Gf2Error::ZeroPolynomial);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        // every nonzero polynomial over GF(2) is already monic
        Ok(a)
    }

    /// `self^e mod modulus` by square-and-multiply.
    pub fn pow_mod(&self, e: u64, modulus: &BinPoly) -> Result<BinPoly, Gf2Error> {
        if modulus.is_zero() {
            return Err(Gf2Error::ZeroPolynomial);
        }
        let base = self.rem(modulus)?;
        let mut result = BinPoly::one().rem(modulus)?;
        if e == 0 {
            return Ok(result);
        }
        for bit in (0..64 - e.leading_zeros()).rev() {
            result = result.mul(&result).rem(modulus)?;
            if (e >> bit) & 1 == 1 {
                result = result.mul(&base).rem(modulus)?;
            }
        }
        Ok(result)
    }

    /// True when `self` divides `other`.
    pub fn divides(&self, other: &BinPoly) -> bool {
        !self.is_zero() && other.rem(self).map(|r| r.is_zero()).unwrap_or(false)
    }
}

/// Carry-less 64x64 -> 128 bit product.
fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let mut bits = a;
    let wide = b as u128;
    while bits != 0 {
        let i = bits.trailing_zeros();
        acc ^= wide << i;
        bits &= bits - 1;
    }
    acc
}

impl fmt::Display for BinPoly {
    /// Highest power first, e.g. `X^2 + X + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .exponents()
            .into_iter()
            .rev()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "X".to_string(),
                _ => format!("X^{e}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl fmt::Debug for BinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinPoly({self})")
    }
}

//! GF(256) lookup tables for the Reed-Solomon baseline.
//!
//! Field is `GF(2)[x] / (x^8 + x^4 + x^3 + x^2 + 1)` (0x11D) with generator
//! `g = {02}`. `gfinv[0]` and `gfexi[0]` are defined as 0; neither is read
//! for a valid erasure pattern.

use std::sync::OnceLock;

/// Reduction polynomial with the `x^8` term dropped.
pub const POLY_LOW: u8 = 0x1d;

/// `{02} * x`.
#[inline]
pub fn mul2(x: u8) -> u8 {
    (x << 1) ^ if x & 0x80 != 0 { POLY_LOW } else { 0 }
}

pub struct RsTables {
    /// `gfmul[a][b] = a * b`.
    pub gfmul: Box<[[u8; 256]; 256]>,
    /// `gfexp[x] = g^x`; `gfexp[255] = 1`.
    pub gfexp: [u8; 256],
    /// Discrete log base `g`; `gflog[0]` is unused.
    pub gflog: [u8; 256],
    /// `gfinv[x] = x^-1`.
    pub gfinv: [u8; 256],
    /// `gfexi[x] = (1 + g^x)^-1`.
    pub gfexi: [u8; 256],
}

impl RsTables {
    fn build() -> Self {
        let mut gfexp = [0u8; 256];
        let mut gflog = [0u8; 256];
        let mut v = 1u8;
        for (i, e) in gfexp.iter_mut().enumerate() {
            *e = v;
            if i < 255 {
                gflog[v as usize] = i as u8;
            }
            v = mul2(v);
        }

        let mut gfmul = Box::new([[0u8; 256]; 256]);
        for a in 0..256usize {
            for b in 0..256usize {
                gfmul[a][b] = slow_mul(a as u8, b as u8);
            }
        }

        let mut gfinv = [0u8; 256];
        for x in 1..256usize {
            gfinv[x] = gfexp[(255 - gflog[x] as usize) % 255];
        }
        let mut gfexi = [0u8; 256];
        for x in 0..256usize {
            gfexi[x] = gfinv[(1 ^ gfexp[x]) as usize];
        }
        Self {
            gfmul,
            gfexp,
            gflog,
            gfinv,
            gfexi,
        }
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.gfmul[a as usize][b as usize]
    }

    /// `g^e` for any exponent.
    #[inline]
    pub fn pow_g(&self, e: usize) -> u8 {
        self.gfexp[e % 255]
    }
}

/// Shift-and-add multiplication.
fn slow_mul(mut a: u8, mut b: u8) -> u8 {
    let mut acc = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a = mul2(a);
        b >>= 1;
    }
    acc
}

pub fn rs_tables() -> &'static RsTables {
    static TABLES: OnceLock<RsTables> = OnceLock::new();
    TABLES.get_or_init(RsTables::build)
}

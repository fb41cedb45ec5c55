//! Reference solver for integration tests.
//!
//! Everything here is built from plain `Vec<Vec<u8>>` bit matrices and does
//! not touch the library's matrix or codec code: coefficient matrices come
//! from their textbook definitions and lost words are recovered by Gaussian
//! elimination over the full parity-check system
//!
//! ```text
//! [ I    I   ...  I        I  0 ] [d_0 .. d_{K-1} P Q]^T = 0
//! [ c_0  c_1 ...  c_{K-1}  0  I ]
//! ```

#![allow(dead_code)]

use coneraid::codec::{CodeSpec, Scheme, Word};
use rand::Rng;

pub type Mat = Vec<Vec<u8>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(0, |acc, t| acc ^ (a[i][t] & b[t][j])))
                .collect()
        })
        .collect()
}

pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x ^ y).collect())
        .collect()
}

pub fn mat_vec(a: &Mat, x: &[u8]) -> Vec<u8> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(0, |acc, (m, v)| acc ^ (m & v)))
        .collect()
}

/// `(N-1) x (N-1)`: ones on the subdiagonal and in the last column.
pub fn sylvester(prime: usize) -> Mat {
    let n = prime - 1;
    (0..n)
        .map(|i| (0..n).map(|j| ((j + 1 == i) || j == n - 1) as u8).collect())
        .collect()
}

/// Multiplication by `{02}` in GF(256), rows as printed: `y = M x` with
/// `x_0` the least significant bit.
pub fn rs_g02() -> Mat {
    [
        [0, 0, 0, 0, 0, 0, 0, 1],
        [1, 0, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0, 1],
        [0, 0, 1, 0, 0, 0, 0, 1],
        [0, 0, 0, 1, 0, 0, 0, 1],
        [0, 0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0],
    ]
    .iter()
    .map(|r| r.to_vec())
    .collect()
}

/// `c_0 .. c_{K-1}` for a scheme.
pub fn coefficients(scheme: Scheme, prime: usize, k: usize) -> Vec<Mat> {
    let g = match scheme {
        Scheme::Rs256 => rs_g02(),
        _ => sylvester(prime),
    };
    let n = g.len();
    let mut powers = vec![identity(n)];
    while powers.len() < k.max(prime) {
        let next = mat_mul(powers.last().unwrap(), &g);
        powers.push(next);
    }
    match scheme {
        Scheme::ZnExtended => {
            let mut out: Vec<Mat> = powers[..prime].to_vec();
            out.extend(
                powers[1..prime]
                    .iter()
                    .map(|g_j| mat_add(&identity(n), g_j)),
            );
            out.truncate(k);
            out
        }
        _ => powers[..k].to_vec(),
    }
}

pub fn bits(w: &Word) -> Vec<u8> {
    (0..w.len()).map(|i| w.get(i) as u8).collect()
}

pub fn word(b: &[u8]) -> Word {
    let mut w = Word::zeros(b.len());
    for (i, &x) in b.iter().enumerate() {
        w.set(i, x == 1);
    }
    w
}

/// Solves for the `None` slots. Panics unless the solution is unique.
pub fn solve(coeffs: &[Mat], n: usize, slots: &[Option<Vec<u8>>]) -> Vec<Vec<u8>> {
    let k = coeffs.len();
    assert_eq!(slots.len(), k + 2);
    // block (eq, disk) of the parity-check matrix
    let block = |eq: usize, disk: usize| -> Mat {
        match (eq, disk) {
            (0, d) if d <= k => identity(n),
            (1, d) if d < k => coeffs[d].clone(),
            (1, d) if d == k + 1 => identity(n),
            _ => vec![vec![0; n]; n],
        }
    };
    let lost: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_none()).collect();
    let unknowns = lost.len() * n;

    // rows: [A | b] with A over the unknowns
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(2 * n);
    for eq in 0..2 {
        let blocks: Vec<Mat> = (0..k + 2).map(|d| block(eq, d)).collect();
        for r in 0..n {
            let mut row = vec![0u8; unknowns + 1];
            for (u, &d) in lost.iter().enumerate() {
                row[u * n..(u + 1) * n].copy_from_slice(&blocks[d][r]);
            }
            let mut rhs = 0u8;
            for (block, s) in blocks.iter().zip(slots) {
                if let Some(v) = s {
                    rhs ^= block[r].iter().zip(v).fold(0, |acc, (m, x)| acc ^ (m & x));
                }
            }
            row[unknowns] = rhs;
            rows.push(row);
        }
    }

    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..unknowns {
        let Some(p) = (pivot_row..rows.len()).find(|&r| rows[r][col] == 1) else {
            panic!("parity-check system is singular in column {col}");
        };
        rows.swap(pivot_row, p);
        for r in 0..rows.len() {
            if r != pivot_row && rows[r][col] == 1 {
                let src = rows[pivot_row].clone();
                rows[r].iter_mut().zip(&src).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    assert!(
        rows[pivot_row..].iter().all(|r| r[unknowns] == 0),
        "inconsistent system"
    );
    (0..lost.len())
        .map(|u| (0..n).map(|b| rows[pivots[u * n + b]][unknowns]).collect())
        .collect()
}

/// A random stripe as `K + 2` bit vectors, encoded by the oracle.
pub fn oracle_stripe<R: Rng>(coeffs: &[Mat], n: usize, rng: &mut R) -> Vec<Vec<u8>> {
    let mut data: Vec<Vec<u8>> = coeffs
        .iter()
        .map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect())
        .collect();
    let mut p = vec![0u8; n];
    let mut q = vec![0u8; n];
    for (c, d) in coeffs.iter().zip(&data) {
        p.iter_mut().zip(d).for_each(|(a, b)| *a ^= b);
        q.iter_mut().zip(mat_vec(c, d)).for_each(|(a, b)| *a ^= b);
    }
    data.push(p);
    data.push(q);
    data
}

/// The configurations exercised across schemes.
pub fn specs() -> Vec<CodeSpec> {
    vec![
        CodeSpec::zn_basic(3, 3).unwrap(),
        CodeSpec::zn_basic(5, 5).unwrap(),
        CodeSpec::zn_basic(13, 13).unwrap(),
        CodeSpec::zn_basic(17, 17).unwrap(),
        CodeSpec::zn_extended(5, 9).unwrap(),
        CodeSpec::zn_extended(13, 25).unwrap(),
        CodeSpec::rs256(4).unwrap(),
        CodeSpec::rs256(10).unwrap(),
    ]
}

/// Every loss pattern of one or two disks.
pub fn all_patterns(total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..total {
        out.push(vec![i]);
        for j in i + 1..total {
            out.push(vec![i, j]);
        }
    }
    out
}

//! Cones: sets of invertible GF(2) matrices whose pairwise sums are invertible.
//!
//! A cone `{c_0, ..., c_{K-1}}` of `n x n` matrices gives a systematic code
//! over `n`-bit words with parities `P = sum d_k` and `Q = sum c_k d_k` that
//! survives the loss of any two of the `K + 2` words. This module builds the
//! three families used by the codec and checks them:
//!
//! * [`cyclic_cone`]: `{Id, g, ..., g^(N-1)}` for a generator of order `N`.
//!   Only the generator is checked (order plus `Id + g^m` for proper divisors
//!   `m` of `N`); pairwise invertibility follows from that.
//! * [`extended_cone`]: the cyclic cone plus `Id + g^j` for `j = 1..N-1`.
//!   Whether this is a cone depends on the prime `N`, so every pair is checked.
//! * [`full_field_cone`]: every nonzero sum of distinct powers of `g`, which is
//!   the multiplicative group of a field when 2 is a primitive root mod `N`.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use crate::gf2::BitMatrix;
use crate::primes;

/// Where a cone's elements came from. Determines how elements are labelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Cyclic(usize),
    Extended(usize),
    FullField(usize),
}

impl Provenance {
    /// Human-readable name of the element at `index`, e.g. `g^3` or `Id+g^2`.
    pub fn label(&self, index: usize) -> String {
        match *self {
            Provenance::Cyclic(_) => power_label(index),
            Provenance::Extended(n) if index < n => power_label(index),
            Provenance::Extended(n) => format!("Id+{}", power_label(index + 1 - n)),
            Provenance::Explicit | Provenance::FullField(_) => format!("#{index}"),
        }
    }
}

fn power_label(k: usize) -> String {
    match k {
        0 => "Id".to_string(),
        1 => "g".to_string(),
        _ => format!("g^{k}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("empty candidate list")]
    Empty,
    #[error("element {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("element {label} is singular")]
    SingularElement {
        index: usize,
        label: String,
        matrix: BitMatrix,
    },
    #[error("elements {first_label} and {second_label} are equal")]
    DuplicateElements {
        first: usize,
        second: usize,
        first_label: String,
        second_label: String,
    },
    #[error("sum {first_label} + {second_label} is singular")]
    SingularSum {
        first: usize,
        second: usize,
        first_label: String,
        second_label: String,
        sum: BitMatrix,
    },
    #[error("generator order is {found:?}, expected {expected}")]
    OrderMismatch {
        expected: usize,
        found: Option<usize>,
    },
    #[error("Id + g^{divisor} is singular")]
    DivisorCondition { divisor: usize, matrix: BitMatrix },
    #[error("modulus {0} must be odd and at least 3")]
    InvalidModulus(usize),
    #[error("{0} is not an odd prime")]
    NotOddPrime(usize),
    #[error("2 is not a primitive root modulo {0}")]
    PrimitiveRootRequired(usize),
    #[error("full-field cone for N = {modulus} exceeds the size guard N <= {max}")]
    SizeGuard { modulus: usize, max: usize },
    #[error("expected {expected} distinct field elements, found {found}")]
    FieldSizeMismatch { expected: usize, found: usize },
}

impl ConeError {
    /// True for failures of the cone property itself, as opposed to bad input.
    pub fn is_violation(&self) -> bool {
        matches!(
            self,
            ConeError::SingularElement { .. }
                | ConeError::DuplicateElements { .. }
                | ConeError::SingularSum { .. }
                | ConeError::OrderMismatch { .. }
                | ConeError::DivisorCondition { .. }
                | ConeError::FieldSizeMismatch { .. }
        )
    }

    /// The singular matrix behind a violation, when there is one.
    pub fn witness(&self) -> Option<&BitMatrix> {
        match self {
            ConeError::SingularElement { matrix, .. }
            | ConeError::DivisorCondition { matrix, .. } => Some(matrix),
            ConeError::SingularSum { sum, .. } => Some(sum),
            _ => None,
        }
    }
}

/// A validated cone. Element order is significant: the codec assigns
/// element `k` to data disk `k`.
#[derive(Clone, PartialEq, Eq)]
pub struct Cone {
    dim: usize,
    elements: Vec<BitMatrix>,
    provenance: Provenance,
}

impl Cone {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BitMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<BitMatrix> {
        self.elements
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn label(&self, index: usize) -> String {
        self.provenance.label(index)
    }

    /// Re-runs the brute-force pairwise check on this cone's elements.
    pub fn cross_check(&self) -> Result<(), ConeError> {
        verify_labelled(&self.elements, self.provenance).map(|_| ())
    }
}

impl fmt::Debug for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cone")
            .field("dim", &self.dim)
            .field("len", &self.elements.len())
            .field("provenance", &self.provenance)
            .finish()
    }
}

/// Brute-force check of every element and every pairwise sum.
///
/// Violations name the first offending element or pair in index order.
pub fn verify_cone(candidates: &[BitMatrix]) -> Result<Cone, ConeError> {
    verify_labelled(candidates, Provenance::Explicit)
}

fn verify_labelled(candidates: &[BitMatrix], provenance: Provenance) -> Result<Cone, ConeError> {
    let dim = check_uniform(candidates)?;

    if let Some(index) = candidates.par_iter().position_first(|m| !m.is_invertible()) {
        return Err(ConeError::SingularElement {
            index,
            label: provenance.label(index),
            matrix: candidates[index].clone(),
        });
    }

    let m = candidates.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let bad = pairs.par_iter().find_first(|&&(i, j)| {
        let a = &candidates[i];
        let b = &candidates[j];
        a == b || !(a + b).is_invertible()
    });
    if let Some(&(i, j)) = bad {
        let (first_label, second_label) = (provenance.label(i), provenance.label(j));
        return Err(if candidates[i] == candidates[j] {
            ConeError::DuplicateElements {
                first: i,
                second: j,
                first_label,
                second_label,
            }
        } else {
            ConeError::SingularSum {
                first: i,
                second: j,
                first_label,
                second_label,
                sum: &candidates[i] + &candidates[j],
            }
        });
    }

    Ok(Cone {
        dim,
        elements: candidates.to_vec(),
        provenance,
    })
}

fn check_uniform(candidates: &[BitMatrix]) -> Result<usize, ConeError> {
    let dim = candidates.first().ok_or(ConeError::Empty)?.dim();
    for (index, m) in candidates.iter().enumerate() {
        if m.dim() != dim {
            return Err(ConeError::DimensionMismatch {
                index,
                expected: dim,
                found: m.dim(),
            });
        }
    }
    Ok(dim)
}

/// `[Id, g, ..., g^(count-1)]`.
fn powers(g: &BitMatrix, count: usize) -> Vec<BitMatrix> {
    let mut out = Vec::with_capacity(count);
    let mut current = BitMatrix::identity(g.dim()).expect("dimension of an existing matrix");
    for _ in 0..count {
        let next = current.mul(g).expect("same dimension");
        out.push(current);
        current = next;
    }
    out
}

/// The cyclic group generated by `g`, checked through its generator only.
///
/// Requires `g^modulus = Id`, `g^k != Id` for `0 < k < modulus`, and
/// `Id + g^m` invertible for every proper divisor `m` of `modulus`.
pub fn cyclic_cone(g: &BitMatrix, modulus: usize) -> Result<Cone, ConeError> {
    if modulus < 3 || modulus.is_multiple_of(2) {
        return Err(ConeError::InvalidModulus(modulus));
    }
    let elements = powers(g, modulus);
    let full_turn = elements[modulus - 1].mul(g).expect("same dimension");
    let early = elements[1..].iter().position(|p| p.is_identity());
    if early.is_some() || !full_turn.is_identity() {
        return Err(ConeError::OrderMismatch {
            expected: modulus,
            found: early
                .map(|k| k + 1)
                .or_else(|| g.order(modulus * 2).ok().flatten()),
        });
    }
    for divisor in (1..modulus).filter(|m| modulus.is_multiple_of(*m)) {
        let sum = elements[divisor].add_identity();
        if !sum.is_invertible() {
            return Err(ConeError::DivisorCondition {
                divisor,
                matrix: sum,
            });
        }
    }

    let cone = Cone {
        dim: g.dim(),
        elements,
        provenance: Provenance::Cyclic(modulus),
    };
    #[cfg(debug_assertions)]
    if modulus <= 33 {
        debug_assert_eq!(
            cone.cross_check(),
            Ok(()),
            "cyclic cone failed brute-force check"
        );
    }
    Ok(cone)
}

/// `{Id, g, ..., g^(N-1), Id+g, ..., Id+g^(N-1)}`, verified pair by pair.
///
/// Fails with a [`ConeError::SingularSum`] naming `g^l` and `Id+g^m` (or a
/// duplicate) when the prime does not admit the extension.
pub fn extended_cone(g: &BitMatrix, prime: usize) -> Result<Cone, ConeError> {
    if !primes::is_odd_prime(prime as u64) {
        return Err(ConeError::NotOddPrime(prime));
    }
    let cyclic = cyclic_cone(g, prime)?;
    let mut elements = cyclic.into_elements();
    let tail: Vec<BitMatrix> = elements[1..].iter().map(BitMatrix::add_identity).collect();
    elements.extend(tail);
    verify_labelled(&elements, Provenance::Extended(prime))
}

/// Largest modulus accepted by [`full_field_cone`]: the cone has `2^(N-1) - 1` elements.
pub const FULL_FIELD_MAX_MODULUS: usize = 17;

/// All sums `g^a_1 + ... + g^a_t` with `a_1 < ... < a_t < N` and
/// `1 <= t <= (N-1)/2`, deduplicated.
///
/// When 2 is a primitive root mod `N` these are exactly the nonzero elements
/// of the field generated by `g`, so there are `2^(N-1) - 1` of them. The
/// count and invertibility are checked rather than assumed. For `N = 3` the
/// set is `{Id, g, g^2}` (note `Id + g = g^2` there).
pub fn full_field_cone(g: &BitMatrix, prime: usize) -> Result<Cone, ConeError> {
    if !primes::is_odd_prime(prime as u64) {
        return Err(ConeError::NotOddPrime(prime));
    }
    if prime > FULL_FIELD_MAX_MODULUS {
        return Err(ConeError::SizeGuard {
            modulus: prime,
            max: FULL_FIELD_MAX_MODULUS,
        });
    }
    if !primes::two_is_primitive_root(prime as u64) {
        return Err(ConeError::PrimitiveRootRequired(prime));
    }
    let pw = cyclic_cone(g, prime)?.into_elements();
    let max_terms = (prime - 1) / 2;

    // Gray-code walk over subsets keeps one running sum.
    let mut seen = HashSet::new();
    let mut elements = Vec::new();
    let mut sum = BitMatrix::zero(g.dim()).expect("dimension of an existing matrix");
    for step in 1u64..(1 << prime) {
        let flip = step.trailing_zeros() as usize;
        sum.add_assign(&pw[flip]);
        let gray = step ^ (step >> 1);
        if gray.count_ones() as usize <= max_terms && seen.insert(sum.clone()) {
            elements.push(sum.clone());
        }
    }

    let expected = (1usize << (prime - 1)) - 1;
    if elements.len() != expected {
        return Err(ConeError::FieldSizeMismatch {
            expected,
            found: elements.len(),
        });
    }
    let provenance = Provenance::FullField(prime);
    if let Some(index) = elements.par_iter().position_first(|m| !m.is_invertible()) {
        return Err(ConeError::SingularElement {
            index,
            label: provenance.label(index),
            matrix: elements[index].clone(),
        });
    }
    Ok(Cone {
        dim: g.dim(),
        elements,
        provenance,
    })
}

/// Outcome of [`diagnose_necessary`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NecessaryReport {
    /// Pairs `(i, j)` with a common nonzero `x` such that `c_i x = c_j x`.
    pub shared_fixed_vectors: Vec<(usize, usize)>,
    /// Indices of permutation matrices; a cone holds at most one.
    pub permutations: Vec<usize>,
}

impl NecessaryReport {
    pub fn is_clean(&self) -> bool {
        self.shared_fixed_vectors.is_empty() && self.permutations.len() <= 1
    }
}

/// Checks the necessary conditions for a cone without building one.
///
/// `c_i x = c_j x` for some nonzero `x` exactly when `c_i + c_j` is rank
/// deficient. Any two permutation matrices fix the all-ones vector, so a
/// second permutation always shows up as a flagged pair too.
pub fn diagnose_necessary(candidates: &[BitMatrix]) -> Result<NecessaryReport, ConeError> {
    if candidates.is_empty() {
        return Ok(NecessaryReport::default());
    }
    let dim = check_uniform(candidates)?;
    let m = candidates.len();
    let shared_fixed_vectors = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| (&candidates[i] + &candidates[j]).rank() < dim)
        .collect();
    let permutations = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_permutation())
        .map(|(i, _)| i)
        .collect();
    Ok(NecessaryReport {
        shared_fixed_vectors,
        permutations,
    })
}

//! RAID-6 erasure codes built from cones of GF(2) matrices.
//!
//! - [`gf2`]: bit vectors, bit matrices and binary polynomials.
//! - [`cone`]: construction and brute-force verification of cones.
//! - [`primes`]: which primes admit the extended cone.
//! - [`codec`]: encoding, reconstruction and the word-parallel kernels.
//! - [`shard`]: striping files into shard files.
//! - [`bench`](mod@bench): throughput and reconstruction timings.
//!
//! The guide in `book/` walks through each layer; its code blocks run as
//! doctests of this crate.

pub mod bench;
pub mod codec;
pub mod cone;
pub mod gf2;
pub mod primes;
pub mod shard;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/gf2.md")]
    mod gf2 {}
    #[doc = include_str!("../../../book/src/cones.md")]
    mod cones {}
    #[doc = include_str!("../../../book/src/primes.md")]
    mod primes {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/shards.md")]
    mod shards {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
}

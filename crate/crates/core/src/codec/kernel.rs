//! Portable word-parallel syndrome kernels.
//!
//! Both kernels compute `P` and `Q` over whole buffers, treating each `u64`
//! as a bundle of lanes: eight byte lanes for `rs256`, four 16-bit lanes for
//! `N = 17`. Per data word the inner loops issue
//!
//! ```text
//! rs256:  zero  cmpgt  add  and  xor  load  xor  xor     (8 ops)
//! zn17:   zero  cmpgt  add       xor  load  xor  xor     (7 ops)
//! ```
//!
//! The `zn17` step drops the `and` because multiplying a 16-bit word by the
//! Sylvester generator XORs the full sign mask instead of a masked
//! reduction constant. [`CountingOps`] wraps a lane set and counts every
//! call, which is how [`ops_per_word`] measures the loops.

use serde::Serialize;

/// Lane-wise operations on a `u64` bundle.
pub trait LaneOps {
    const LANE_BITS: u32;

    fn zero(&mut self) -> u64;
    /// Per lane, all ones if `a > b` as signed integers, else zero.
    fn cmpgt(&mut self, a: u64, b: u64) -> u64;
    /// Per-lane wrapping add.
    fn add(&mut self, a: u64, b: u64) -> u64;
    fn and(&mut self, a: u64, b: u64) -> u64;
    fn xor(&mut self, a: u64, b: u64) -> u64;
    fn load(&mut self, src: &[u64], i: usize) -> u64;

    /// The lane value `v` repeated across the bundle.
    fn splat(v: u64) -> u64 {
        let lane = Self::lane_ones();
        let mut out = 0;
        let mut shift = 0;
        while shift < 64 {
            out |= (v & lane) << shift;
            shift += Self::LANE_BITS;
        }
        out
    }

    fn lane_ones() -> u64 {
        (1u64 << Self::LANE_BITS) - 1
    }
}

#[inline(always)]
fn high_bits(lane_bits: u32) -> u64 {
    let mut out = 0u64;
    let mut shift = lane_bits - 1;
    while shift < 64 {
        out |= 1 << shift;
        shift += lane_bits;
    }
    out
}

#[inline(always)]
fn swar_add(a: u64, b: u64, h: u64) -> u64 {
    ((a & !h).wrapping_add(b & !h)) ^ ((a ^ b) & h)
}

/// Per lane, all ones if `a > b` signed.
#[inline(always)]
fn swar_cmpgt(a: u64, b: u64, lane_bits: u32, h: u64) -> u64 {
    // bias to unsigned, then borrow out of b - a marks b < a
    let (x, y) = (b ^ h, a ^ h);
    let diff = ((x | h).wrapping_sub(y & !h)) ^ ((x ^ !y) & h);
    let borrow = ((!x & y) | (!(x ^ y) & diff)) & h;
    (borrow >> (lane_bits - 1)).wrapping_mul((1u64 << lane_bits) - 1)
}

macro_rules! swar_lanes {
    ($name:ident, $bits:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Default, Clone, Copy)]
        pub struct $name;

        impl LaneOps for $name {
            const LANE_BITS: u32 = $bits;

            #[inline(always)]
            fn zero(&mut self) -> u64 {
                0
            }
            #[inline(always)]
            fn cmpgt(&mut self, a: u64, b: u64) -> u64 {
                swar_cmpgt(a, b, $bits, high_bits($bits))
            }
            #[inline(always)]
            fn add(&mut self, a: u64, b: u64) -> u64 {
                swar_add(a, b, high_bits($bits))
            }
            #[inline(always)]
            fn and(&mut self, a: u64, b: u64) -> u64 {
                a & b
            }
            #[inline(always)]
            fn xor(&mut self, a: u64, b: u64) -> u64 {
                a ^ b
            }
            #[inline(always)]
            fn load(&mut self, src: &[u64], i: usize) -> u64 {
                src[i]
            }
        }
    };
}

swar_lanes!(Swar8, 8, "Eight byte lanes.");
swar_lanes!(Swar16, 16, "Four 16-bit lanes.");

/// Number of calls to each lane operation.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub zero: u64,
    pub cmpgt: u64,
    pub add: u64,
    pub and: u64,
    pub xor: u64,
    pub load: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.zero + self.cmpgt + self.add + self.and + self.xor + self.load
    }

    fn minus(&self, o: &Self) -> Self {
        Self {
            zero: self.zero - o.zero,
            cmpgt: self.cmpgt - o.cmpgt,
            add: self.add - o.add,
            and: self.and - o.and,
            xor: self.xor - o.xor,
            load: self.load - o.load,
        }
    }

    fn divided(&self, d: u64) -> Self {
        Self {
            zero: self.zero / d,
            cmpgt: self.cmpgt / d,
            add: self.add / d,
            and: self.and / d,
            xor: self.xor / d,
            load: self.load / d,
        }
    }
}

/// Counts every operation forwarded to `L`.
#[derive(Debug, Default, Clone)]
pub struct CountingOps<L> {
    inner: L,
    pub counts: OpCounts,
}

impl<L> CountingOps<L> {
    pub fn new(inner: L) -> Self {
        Self {
            inner,
            counts: OpCounts::default(),
        }
    }
}

impl<L: LaneOps> LaneOps for CountingOps<L> {
    const LANE_BITS: u32 = L::LANE_BITS;

    fn zero(&mut self) -> u64 {
        self.counts.zero += 1;
        self.inner.zero()
    }
    fn cmpgt(&mut self, a: u64, b: u64) -> u64 {
        self.counts.cmpgt += 1;
        self.inner.cmpgt(a, b)
    }
    fn add(&mut self, a: u64, b: u64) -> u64 {
        self.counts.add += 1;
        self.inner.add(a, b)
    }
    fn and(&mut self, a: u64, b: u64) -> u64 {
        self.counts.and += 1;
        self.inner.and(a, b)
    }
    fn xor(&mut self, a: u64, b: u64) -> u64 {
        self.counts.xor += 1;
        self.inner.xor(a, b)
    }
    fn load(&mut self, src: &[u64], i: usize) -> u64 {
        self.counts.load += 1;
        self.inner.load(src, i)
    }
}

fn check_buffers(data: &[&[u64]], p: &[u64], q: &[u64]) -> usize {
    assert!(!data.is_empty(), "at least one data buffer");
    let len = p.len();
    assert_eq!(q.len(), len, "P and Q buffers differ in length");
    assert!(
        data.iter().all(|d| d.len() == len),
        "data buffers differ in length"
    );
    len
}

#[inline(always)]
fn syndrome_block<L: LaneOps, const U: usize, const REDUCE: bool>(
    ops: &mut L,
    data: &[&[u64]],
    p: &mut [u64],
    q: &mut [u64],
    at: usize,
    poly: u64,
) {
    let top = data.len() - 1;
    let mut wq = [0u64; U];
    let mut wp = [0u64; U];
    for u in 0..U {
        wq[u] = ops.load(data[top], at + u);
        wp[u] = wq[u];
    }
    for z in (0..top).rev() {
        for u in 0..U {
            let mut y = ops.zero();
            y = ops.cmpgt(y, wq[u]);
            wq[u] = ops.add(wq[u], wq[u]);
            if REDUCE {
                y = ops.and(y, poly);
            }
            wq[u] = ops.xor(wq[u], y);
            let d = ops.load(data[z], at + u);
            wq[u] = ops.xor(wq[u], d);
            wp[u] = ops.xor(wp[u], d);
        }
    }
    p[at..at + U].copy_from_slice(&wp);
    q[at..at + U].copy_from_slice(&wq);
}

fn syndrome<L: LaneOps, const U: usize, const REDUCE: bool>(
    ops: &mut L,
    data: &[&[u64]],
    p: &mut [u64],
    q: &mut [u64],
    poly: u64,
) {
    let len = check_buffers(data, p, q);
    let body = len - len % U;
    let mut at = 0;
    while at < body {
        syndrome_block::<L, U, REDUCE>(ops, data, p, q, at, poly);
        at += U;
    }
    while at < len {
        syndrome_block::<L, 1, REDUCE>(ops, data, p, q, at, poly);
        at += 1;
    }
}

/// GF(256) `P`/`Q` over byte lanes, `U` bundles per iteration.
///
/// Byte `b` of `data[k][i]` is data word `d_k` at byte position `8 i + b`.
pub fn rs_syndrome<L: LaneOps, const U: usize>(
    ops: &mut L,
    data: &[&[u64]],
    p: &mut [u64],
    q: &mut [u64],
) {
    assert_eq!(L::LANE_BITS, 8, "rs256 needs byte lanes");
    syndrome::<L, U, true>(ops, data, p, q, L::splat(super::rs::POLY_LOW as u64));
}

/// `N = 17` `P`/`Q` over 16-bit lanes, `U` bundles per iteration.
///
/// Lane `l` of `data[k][i]` is data word `d_k` at word position `4 i + l`.
pub fn zn17_syndrome<L: LaneOps, const U: usize>(
    ops: &mut L,
    data: &[&[u64]],
    p: &mut [u64],
    q: &mut [u64],
) {
    assert_eq!(L::LANE_BITS, 16, "zn17 needs 16-bit lanes");
    syndrome::<L, U, false>(ops, data, p, q, 0);
}

/// The two benchmarked syndrome loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyndromeKernel {
    Rs256,
    Zn17,
}

impl SyndromeKernel {
    pub const ALL: [SyndromeKernel; 2] = [SyndromeKernel::Rs256, SyndromeKernel::Zn17];
    pub const UNROLLS: [usize; 4] = [1, 2, 4, 8];

    pub fn name(self) -> &'static str {
        match self {
            SyndromeKernel::Rs256 => "rs256-swar",
            SyndromeKernel::Zn17 => "zn17-swar",
        }
    }

    /// Runs the uncounted kernel. `unroll` must be one of [`Self::UNROLLS`].
    pub fn run(self, unroll: usize, data: &[&[u64]], p: &mut [u64], q: &mut [u64]) {
        macro_rules! dispatch {
            ($f:ident, $lanes:ty) => {
                match unroll {
                    1 => $f::<$lanes, 1>(&mut <$lanes>::default(), data, p, q),
                    2 => $f::<$lanes, 2>(&mut <$lanes>::default(), data, p, q),
                    4 => $f::<$lanes, 4>(&mut <$lanes>::default(), data, p, q),
                    8 => $f::<$lanes, 8>(&mut <$lanes>::default(), data, p, q),
                    other => panic!("unsupported unroll factor {other}"),
                }
            };
        }
        match self {
            SyndromeKernel::Rs256 => dispatch!(rs_syndrome, Swar8),
            SyndromeKernel::Zn17 => dispatch!(zn17_syndrome, Swar16),
        }
    }

    fn run_counted(self, data: &[&[u64]], p: &mut [u64], q: &mut [u64]) -> OpCounts {
        match self {
            SyndromeKernel::Rs256 => {
                let mut ops = CountingOps::new(Swar8);
                rs_syndrome::<_, 1>(&mut ops, data, p, q);
                ops.counts
            }
            SyndromeKernel::Zn17 => {
                let mut ops = CountingOps::new(Swar16);
                zn17_syndrome::<_, 1>(&mut ops, data, p, q);
                ops.counts
            }
        }
    }
}

/// Operations the inner loop spends per additional data word.
///
/// Runs the counted kernel with `K` and `K + 1` data buffers of `positions`
/// bundles each; the difference divided by `positions` excludes the setup
/// of the first disk.
pub fn ops_per_word(kernel: SyndromeKernel) -> OpCounts {
    const K: usize = 4;
    const POSITIONS: usize = 16;
    let buffers: Vec<Vec<u64>> = (0..=K)
        .map(|k| {
            (0..POSITIONS as u64)
                .map(|i| (i + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ k as u64)
                .collect()
        })
        .collect();
    let count = |disks: usize| {
        let data: Vec<&[u64]> = buffers[..disks].iter().map(Vec::as_slice).collect();
        let (mut p, mut q) = (vec![0; POSITIONS], vec![0; POSITIONS]);
        kernel.run_counted(&data, &mut p, &mut q)
    };
    let small = count(K);
    let large = count(K + 1);
    large.minus(&small).divided(POSITIONS as u64)
}

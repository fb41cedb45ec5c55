//! Throughput and reconstruction timings.
//!
//! Timings use the monotonic clock and keep the best of several runs. They
//! vary with the host and are informative only; the op-count rows are the
//! host-independent comparison.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::{
    ops_per_word, CodeSpec, CodecError, ErasurePattern, OpCounts, Scheme, SyndromeKernel, Word,
};

pub const DEFAULT_WORKING_SET: usize = 64 << 20;
pub const DEFAULT_DATA_DISKS: usize = 16;
pub const DEFAULT_REPEATS: usize = 5;
pub const DEFAULT_RECONSTRUCT_ROWS: usize = 4096;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kernels: Vec<SyndromeKernel>,
    pub unrolls: Vec<usize>,
    pub data_disks: usize,
    /// Total data bytes fed to each syndrome run.
    pub working_set: usize,
    pub repeats: usize,
    /// Stripes per reconstruction timing.
    pub reconstruct_rows: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kernels: SyndromeKernel::ALL.to_vec(),
            unrolls: SyndromeKernel::UNROLLS.to_vec(),
            data_disks: DEFAULT_DATA_DISKS,
            working_set: DEFAULT_WORKING_SET,
            repeats: DEFAULT_REPEATS,
            reconstruct_rows: DEFAULT_RECONSTRUCT_ROWS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailureClass {
    /// Two data disks.
    DD,
    /// One data disk and P.
    DP,
    /// Both parities.
    PQ,
}

impl FailureClass {
    pub const ALL: [FailureClass; 3] = [FailureClass::DD, FailureClass::DP, FailureClass::PQ];

    /// Lost disks for a code with `k` data disks.
    pub fn lost(self, k: usize) -> Vec<usize> {
        match self {
            FailureClass::DD if k >= 2 => vec![0, k - 1],
            FailureClass::DD => vec![0],
            FailureClass::DP => vec![0, k],
            FailureClass::PQ => vec![k, k + 1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SyndromeRow {
    pub kernel_name: &'static str,
    pub unroll_factor: usize,
    pub throughput_mb_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionRow {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub prime: Option<usize>,
    #[serde(rename = "K")]
    pub data_disks: usize,
    pub failure_class: FailureClass,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpCountRow {
    pub kernel_name: &'static str,
    pub ops_per_word: u64,
    pub breakdown: OpCounts,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub syndrome: Vec<SyndromeRow>,
    pub reconstruction: Vec<ReconstructionRow>,
    pub op_counts: Vec<OpCountRow>,
}

/// One tagged JSON object per row.
#[derive(Serialize)]
#[serde(tag = "row", rename_all = "kebab-case")]
pub enum ReportRow<'a> {
    Syndrome(&'a SyndromeRow),
    Reconstruction(&'a ReconstructionRow),
    OpCount(&'a OpCountRow),
}

impl BenchReport {
    pub fn rows(&self) -> Vec<ReportRow<'_>> {
        self.syndrome
            .iter()
            .map(ReportRow::Syndrome)
            .chain(self.reconstruction.iter().map(ReportRow::Reconstruction))
            .chain(self.op_counts.iter().map(ReportRow::OpCount))
            .collect()
    }
}

fn best_of<F: FnMut()>(repeats: usize, mut f: F) -> Duration {
    (0..repeats.max(1))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .expect("at least one run")
}

pub fn run(cfg: &BenchConfig) -> Result<BenchReport, CodecError> {
    if cfg.data_disks == 0 {
        return Err(CodecError::NoDataDisks);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.data_disks;
    let per_disk = (cfg.working_set / (8 * k)).max(8);
    let buffers: Vec<Vec<u64>> = (0..k)
        .map(|_| {
            let mut v = vec![0u64; per_disk];
            v.iter_mut().for_each(|x| *x = rng.next_u64());
            v
        })
        .collect();
    let data: Vec<&[u64]> = buffers.iter().map(Vec::as_slice).collect();
    let (mut p, mut q) = (vec![0u64; per_disk], vec![0u64; per_disk]);
    let bytes = (per_disk * 8 * k) as f64;

    let mut syndrome = Vec::new();
    for &kernel in &cfg.kernels {
        for &unroll in &cfg.unrolls {
            let t = best_of(cfg.repeats, || {
                kernel.run(unroll, black_box(&data), &mut p, &mut q);
                black_box(&q);
            });
            syndrome.push(SyndromeRow {
                kernel_name: kernel.name(),
                unroll_factor: unroll,
                throughput_mb_s: bytes / t.as_secs_f64().max(1e-9) / 1e6,
            });
        }
    }

    let mut reconstruction = Vec::new();
    for &kernel in &cfg.kernels {
        let spec = match kernel {
            SyndromeKernel::Rs256 => CodeSpec::rs256(k)?,
            SyndromeKernel::Zn17 => CodeSpec::zn_basic(17, k)?,
        };
        reconstruction.extend(time_reconstruction(&spec, cfg, &mut rng)?);
    }

    let op_counts = cfg
        .kernels
        .iter()
        .map(|&kernel| {
            let breakdown = ops_per_word(kernel);
            OpCountRow {
                kernel_name: kernel.name(),
                ops_per_word: breakdown.total(),
                breakdown,
            }
        })
        .collect();

    Ok(BenchReport {
        syndrome,
        reconstruction,
        op_counts,
    })
}

fn time_reconstruction(
    spec: &CodeSpec,
    cfg: &BenchConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ReconstructionRow>, CodecError> {
    let stripes: Vec<Vec<Option<Word>>> = (0..cfg.reconstruct_rows.max(1))
        .map(|_| {
            let data = (0..spec.data_disks())
                .map(|_| Word::random(spec.word_bits(), rng))
                .collect();
            spec.encode_stripe(data).map(|s| s.slots())
        })
        .collect::<Result<_, _>>()?;

    FailureClass::ALL
        .iter()
        .map(|&class| {
            let lost = class.lost(spec.data_disks());
            let pattern = ErasurePattern::new(&lost, spec.total_disks())?;
            let damaged: Vec<Vec<Option<Word>>> = stripes
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    lost.iter().for_each(|&i| s[i] = None);
                    s
                })
                .collect();
            // warm the pair-inverse memo outside the timed region
            spec.reconstruct(&damaged[0], &pattern)?;
            let t = best_of(cfg.repeats, || {
                for s in &damaged {
                    black_box(
                        spec.reconstruct(black_box(s), &pattern)
                            .expect("valid pattern"),
                    );
                }
            });
            Ok(ReconstructionRow {
                scheme: spec.scheme(),
                prime: spec.prime(),
                data_disks: spec.data_disks(),
                failure_class: class,
                elapsed_ns: (t.as_nanos() as u64).max(1),
            })
        })
        .collect()
}

//! Striping files across `K + 2` shard files.
//!
//! Every shard starts with a 33-byte header (little-endian integers):
//!
//! ```text
//! offset  size  field
//!      0     8  magic "CONERAID"
//!      8     2  version = 1
//!     10     1  scheme (0 zn-basic, 1 zn-extended, 2 rs256)
//!     11     2  N (0 for rs256)
//!     13     2  K
//!     15     2  shard index (0..K data, K = P, K + 1 = Q)
//!     17     4  stripe rows
//!     21     8  payload length in bytes
//!     29     4  CRC-32 of bytes 0..33 with this field zeroed
//! ```
//!
//! The body holds `stripe_rows` words per stripe, each word stored as
//! `ceil(n / 8)` little-endian bytes. The input file is read as a bit
//! stream, least significant bit of each byte first, and cut into `n`-bit
//! words disk by disk: word `r` of disk `i` in stripe `s` starts at bit
//! `((s K + i) rows + r) n`. The final stripe is zero-padded.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{CodeSpec, CodecError, ErasurePattern, Scheme, Word};

pub const MAGIC: &[u8; 8] = b"CONERAID";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 33;
pub const DEFAULT_STRIPE_ROWS: u32 = 4096;
/// Most shards a stripe can lose.
pub const MAX_MISSING: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum ShardError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("header is {0} bytes, expected {HEADER_LEN}")]
    Truncated(usize),
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u16),
    #[error("header CRC {stored:#010x} does not match computed {computed:#010x}")]
    BadCrc { stored: u32, computed: u32 },
    #[error("unknown scheme code {0}")]
    UnknownScheme(u8),
    #[error("shard index {index} outside 0..{total}")]
    IndexOutOfRange { index: u16, total: usize },
    #[error("stripe rows must be positive")]
    ZeroRows,
    #[error("shard {index}: {reason}")]
    InvalidShard { index: usize, reason: String },
    #[error("{path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("no shard files in {0}")]
    NoShards(PathBuf),
    #[error("shard {index} disagrees with shard {reference} on {field}")]
    Disagreement {
        index: usize,
        reference: usize,
        field: &'static str,
    },
    #[error("shards {missing:?} unavailable; at most {MAX_MISSING} can be rebuilt")]
    TooManyMissing { missing: Vec<usize> },
    #[error("scrub needs every shard; unavailable: {0:?}")]
    Incomplete(Vec<usize>),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ShardError + '_ {
    move |source| ShardError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub scheme: Scheme,
    /// `N`; 0 for rs256.
    pub prime: u16,
    pub data_disks: u16,
    pub shard_index: u16,
    pub stripe_rows: u32,
    /// Original file length. Stored in every shard so any two can be lost.
    pub payload_len: u64,
}

impl ShardHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..8].copy_from_slice(MAGIC);
        b[8..10].copy_from_slice(&VERSION.to_le_bytes());
        b[10] = self.scheme.code();
        b[11..13].copy_from_slice(&self.prime.to_le_bytes());
        b[13..15].copy_from_slice(&self.data_disks.to_le_bytes());
        b[15..17].copy_from_slice(&self.shard_index.to_le_bytes());
        b[17..21].copy_from_slice(&self.stripe_rows.to_le_bytes());
        b[21..29].copy_from_slice(&self.payload_len.to_le_bytes());
        let crc = crc32fast::hash(&b);
        b[29..33].copy_from_slice(&crc.to_le_bytes());
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ShardError> {
        if bytes.len() < HEADER_LEN {
            return Err(ShardError::Truncated(bytes.len()));
        }
        let b = &bytes[..HEADER_LEN];
        let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
        if &b[0..8] != MAGIC {
            return Err(ShardError::BadMagic);
        }
        let stored = u32::from_le_bytes(b[29..33].try_into().expect("4 bytes"));
        let mut zeroed = [0u8; HEADER_LEN];
        zeroed[..29].copy_from_slice(&b[..29]);
        let computed = crc32fast::hash(&zeroed);
        if stored != computed {
            return Err(ShardError::BadCrc { stored, computed });
        }
        let version = u16_at(8);
        if version != VERSION {
            return Err(ShardError::BadVersion(version));
        }
        let scheme = Scheme::from_code(b[10]).ok_or(ShardError::UnknownScheme(b[10]))?;
        let header = Self {
            scheme,
            prime: u16_at(11),
            data_disks: u16_at(13),
            shard_index: u16_at(15),
            stripe_rows: u32::from_le_bytes(b[17..21].try_into().expect("4 bytes")),
            payload_len: u64::from_le_bytes(b[21..29].try_into().expect("8 bytes")),
        };
        let total = header.data_disks as usize + 2;
        if header.shard_index as usize >= total {
            return Err(ShardError::IndexOutOfRange {
                index: header.shard_index,
                total,
            });
        }
        if header.stripe_rows == 0 {
            return Err(ShardError::ZeroRows);
        }
        Ok(header)
    }

    pub fn geometry(&self, word_bits: usize) -> Geometry {
        Geometry {
            word_bits,
            data_disks: self.data_disks as usize,
            stripe_rows: self.stripe_rows as usize,
            payload_len: self.payload_len,
        }
    }

    pub fn code_spec(&self) -> Result<CodeSpec, CodecError> {
        CodeSpec::new(self.scheme, self.prime as usize, self.data_disks as usize)
    }
}

/// How a payload maps onto stripes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub word_bits: usize,
    pub data_disks: usize,
    pub stripe_rows: usize,
    pub payload_len: u64,
}

impl Geometry {
    pub fn word_bytes(&self) -> usize {
        self.word_bits.div_ceil(8)
    }

    /// Payload bits carried by one stripe.
    pub fn stripe_bits(&self) -> u64 {
        (self.data_disks * self.stripe_rows * self.word_bits) as u64
    }

    pub fn stripes(&self) -> u64 {
        (self.payload_len * 8).div_ceil(self.stripe_bits())
    }

    /// Body bytes per stripe in one shard.
    pub fn chunk_len(&self) -> usize {
        self.stripe_rows * self.word_bytes()
    }

    /// Body bytes in one shard.
    pub fn body_len(&self) -> u64 {
        self.stripes() * self.chunk_len() as u64
    }

    fn word_bit(&self, stripe: u64, disk: usize, row: usize) -> u64 {
        ((stripe * self.data_disks as u64 + disk as u64) * self.stripe_rows as u64 + row as u64)
            * self.word_bits as u64
    }
}

/// `count <= 64` bits starting at `bit`, zero past the end.
fn bits_at(bytes: &[u8], bit: u64, count: usize) -> u64 {
    let start = (bit / 8) as usize;
    if start >= bytes.len() {
        return 0;
    }
    let mut buf = [0u8; 16];
    let end = bytes.len().min(start + 16);
    buf[..end - start].copy_from_slice(&bytes[start..end]);
    let v = (u128::from_le_bytes(buf) >> (bit % 8)) as u64;
    if count == 64 {
        v
    } else {
        v & ((1u64 << count) - 1)
    }
}

fn read_word(bytes: &[u8], bit: u64, n: usize) -> Word {
    let limbs: Vec<u64> = (0..n.div_ceil(64))
        .map(|j| bits_at(bytes, bit + 64 * j as u64, (n - 64 * j).min(64)))
        .collect();
    Word::from_limbs(n, &limbs)
}

/// ORs `w` into `out` at `bit`; bits past the end are dropped.
fn or_word(out: &mut [u8], bit: u64, w: &Word) {
    for (j, &limb) in w.limbs().iter().enumerate() {
        let at = bit + 64 * j as u64;
        let start = (at / 8) as usize;
        if start >= out.len() {
            return;
        }
        let bytes = ((limb as u128) << (at % 8)).to_le_bytes();
        for (dst, src) in out[start..].iter_mut().zip(bytes) {
            *dst |= src;
        }
    }
}

/// Word `row` of a shard's stripe chunk.
fn chunk_word(chunk: &[u8], row: usize, n: usize) -> Word {
    let wb = n.div_ceil(8);
    Word::from_le_bytes(n, &chunk[row * wb..(row + 1) * wb])
}

/// Full shard files (header plus body) for `payload`, in disk order.
pub fn encode_bytes(
    spec: &CodeSpec,
    stripe_rows: u32,
    payload: &[u8],
) -> Result<Vec<Vec<u8>>, ShardError> {
    if stripe_rows == 0 {
        return Err(ShardError::ZeroRows);
    }
    let k = spec.data_disks();
    let n = spec.word_bits();
    let geo = Geometry {
        word_bits: n,
        data_disks: k,
        stripe_rows: stripe_rows as usize,
        payload_len: payload.len() as u64,
    };
    let chunks: Vec<Vec<Vec<u8>>> = (0..geo.stripes())
        .into_par_iter()
        .map(|s| {
            let mut out = vec![Vec::with_capacity(geo.chunk_len()); k + 2];
            for r in 0..geo.stripe_rows {
                let data: Vec<Word> = (0..k)
                    .map(|i| read_word(payload, geo.word_bit(s, i, r), n))
                    .collect();
                let (p, q) = spec.encode(&data).expect("widths match the spec");
                for (i, w) in data.iter().chain([&p, &q]).enumerate() {
                    out[i].extend_from_slice(&w.to_le_bytes());
                }
            }
            out
        })
        .collect();

    let mut shards: Vec<Vec<u8>> = (0..k + 2)
        .map(|i| {
            let header = ShardHeader {
                scheme: spec.scheme(),
                prime: spec.prime().unwrap_or(0) as u16,
                data_disks: k as u16,
                shard_index: i as u16,
                stripe_rows,
                payload_len: payload.len() as u64,
            };
            let mut v = Vec::with_capacity(HEADER_LEN + geo.body_len() as usize);
            v.extend_from_slice(&header.to_bytes());
            v
        })
        .collect();
    for stripe in chunks {
        for (shard, chunk) in shards.iter_mut().zip(stripe) {
            shard.extend_from_slice(&chunk);
        }
    }
    Ok(shards)
}

/// Reassembles the payload from the data shard bodies.
pub fn decode_payload(geo: &Geometry, bodies: &[&[u8]]) -> Vec<u8> {
    let total_bits = geo.stripes() * geo.stripe_bits();
    let mut out = vec![0u8; total_bits.div_ceil(8) as usize];
    let n = geo.word_bits;
    let chunk = geo.chunk_len();
    for s in 0..geo.stripes() {
        for (i, body) in bodies.iter().enumerate().take(geo.data_disks) {
            let c = &body[s as usize * chunk..(s as usize + 1) * chunk];
            for r in 0..geo.stripe_rows {
                or_word(&mut out, geo.word_bit(s, i, r), &chunk_word(c, r, n));
            }
        }
    }
    out.truncate(geo.payload_len as usize);
    out
}

pub fn shard_file_name(index: usize) -> String {
    format!("shard-{index:03}.bin")
}

fn shard_index_from_name(name: &str) -> Option<usize> {
    name.strip_prefix("shard-")?
        .strip_suffix(".bin")?
        .parse()
        .ok()
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeSummary {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub prime: Option<usize>,
    #[serde(rename = "K")]
    pub data_disks: usize,
    pub stripe_rows: u32,
    pub payload_len: u64,
    pub stripes: u64,
    pub shards: Vec<PathBuf>,
}

/// Encodes `input` into `out_dir/shard-NNN.bin`.
pub fn encode_file(
    spec: &CodeSpec,
    stripe_rows: u32,
    input: &Path,
    out_dir: &Path,
) -> Result<EncodeSummary, ShardError> {
    let payload = fs::read(input).map_err(io_err(input))?;
    let shards = encode_bytes(spec, stripe_rows, &payload)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut paths = Vec::with_capacity(shards.len());
    for (i, bytes) in shards.iter().enumerate() {
        let path = out_dir.join(shard_file_name(i));
        fs::write(&path, bytes).map_err(io_err(&path))?;
        paths.push(path);
    }
    let geo = Geometry {
        word_bits: spec.word_bits(),
        data_disks: spec.data_disks(),
        stripe_rows: stripe_rows as usize,
        payload_len: payload.len() as u64,
    };
    Ok(EncodeSummary {
        scheme: spec.scheme(),
        prime: spec.prime(),
        data_disks: spec.data_disks(),
        stripe_rows,
        payload_len: payload.len() as u64,
        stripes: geo.stripes(),
        shards: paths,
    })
}

/// A shard directory after header validation.
#[derive(Debug)]
pub struct ShardArray {
    pub dir: PathBuf,
    /// Header of the lowest-indexed valid shard, with `shard_index` cleared.
    pub header: ShardHeader,
    /// Bodies by disk index; `None` when missing or invalid.
    pub bodies: Vec<Option<Vec<u8>>>,
    /// Why each unavailable shard was rejected.
    pub problems: Vec<(usize, String)>,
}

impl ShardArray {
    /// Reads every `shard-NNN.bin` in `dir`. Unreadable or inconsistent shards
    /// become `None` with a recorded reason; only an array with no valid shard
    /// is an error.
    pub fn load(dir: &Path) -> Result<Self, ShardError> {
        let mut found: Vec<(usize, PathBuf)> = Vec::new();
        for entry in fs::read_dir(dir).map_err(io_err(dir))? {
            let entry = entry.map_err(io_err(dir))?;
            let name = entry.file_name();
            if let Some(i) = name.to_str().and_then(shard_index_from_name) {
                found.push((i, entry.path()));
            }
        }
        found.sort();

        let mut valid: Vec<(usize, ShardHeader, Vec<u8>)> = Vec::new();
        let mut problems = Vec::new();
        for (i, path) in &found {
            let bytes = fs::read(path).map_err(io_err(path))?;
            match ShardHeader::from_bytes(&bytes) {
                Ok(h) if h.shard_index as usize != *i => {
                    problems.push((*i, format!("header names shard {}", h.shard_index)));
                }
                Ok(h) => valid.push((*i, h, bytes[HEADER_LEN..].to_vec())),
                Err(e) => problems.push((*i, e.to_string())),
            }
        }
        let Some(&(reference, first, _)) = valid.first() else {
            return Err(match problems.first() {
                Some((i, reason)) if found.len() == 1 => ShardError::InvalidShard {
                    index: *i,
                    reason: reason.clone(),
                },
                _ => ShardError::NoShards(dir.to_path_buf()),
            });
        };
        let header = ShardHeader {
            shard_index: 0,
            ..first
        };
        for (i, h, _) in &valid {
            let field = if h.scheme != header.scheme {
                Some("scheme")
            } else if h.prime != header.prime {
                Some("N")
            } else if h.data_disks != header.data_disks {
                Some("K")
            } else if h.stripe_rows != header.stripe_rows {
                Some("stripe rows")
            } else if h.payload_len != header.payload_len {
                Some("payload length")
            } else {
                None
            };
            if let Some(field) = field {
                return Err(ShardError::Disagreement {
                    index: *i,
                    reference,
                    field,
                });
            }
        }

        let total = header.data_disks as usize + 2;
        let spec_bits = header.code_spec()?.word_bits();
        let body_len = header.geometry(spec_bits).body_len();
        let mut bodies = vec![None; total];
        for (i, _, body) in valid {
            if body.len() as u64 != body_len {
                problems.push((
                    i,
                    format!("body is {} bytes, expected {body_len}", body.len()),
                ));
            } else {
                bodies[i] = Some(body);
            }
        }
        for (i, body) in bodies.iter().enumerate() {
            if body.is_none() && !problems.iter().any(|(p, _)| *p == i) {
                problems.push((i, "file not found".to_string()));
            }
        }
        problems.sort();
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            bodies,
            problems,
        })
    }

    pub fn missing(&self) -> Vec<usize> {
        (0..self.bodies.len())
            .filter(|&i| self.bodies[i].is_none())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructReport {
    pub rebuilt: Vec<usize>,
    pub reasons: Vec<(usize, String)>,
    pub stripes: u64,
    pub payload_len: u64,
    pub recovered: PathBuf,
}

/// Rebuilds missing shards in place and writes the original file to `recovered`.
///
/// `forced` lists shards to treat as lost even if present.
pub fn reconstruct_dir(
    dir: &Path,
    forced: &[usize],
    recovered: &Path,
) -> Result<ReconstructReport, ShardError> {
    let mut array = ShardArray::load(dir)?;
    let total = array.bodies.len();
    for &i in forced {
        if i >= total {
            return Err(ShardError::IndexOutOfRange {
                index: i.min(u16::MAX as usize) as u16,
                total,
            });
        }
        if array.bodies[i].take().is_some() {
            array.problems.push((i, "marked missing".to_string()));
        }
    }
    array.problems.sort();
    let missing = array.missing();
    if missing.len() > MAX_MISSING {
        return Err(ShardError::TooManyMissing { missing });
    }

    let spec = array.header.code_spec()?;
    let geo = array.header.geometry(spec.word_bits());
    if !missing.is_empty() {
        let pattern = ErasurePattern::new(&missing, total)?;
        let rebuilt = rebuild(&spec, &geo, &array.bodies, &pattern)?;
        for (i, body) in missing.iter().zip(rebuilt) {
            let header = ShardHeader {
                shard_index: *i as u16,
                ..array.header
            };
            let path = dir.join(shard_file_name(*i));
            let mut bytes = header.to_bytes().to_vec();
            bytes.extend_from_slice(&body);
            fs::write(&path, &bytes).map_err(io_err(&path))?;
            array.bodies[*i] = Some(body);
        }
    }

    let bodies: Vec<&[u8]> = array.bodies[..geo.data_disks]
        .iter()
        .map(|b| b.as_deref().expect("all data shards present"))
        .collect();
    let payload = decode_payload(&geo, &bodies);
    fs::write(recovered, &payload).map_err(io_err(recovered))?;
    Ok(ReconstructReport {
        rebuilt: missing,
        reasons: array.problems,
        stripes: geo.stripes(),
        payload_len: geo.payload_len,
        recovered: recovered.to_path_buf(),
    })
}

/// Bodies for the lost shards, in pattern order.
fn rebuild(
    spec: &CodeSpec,
    geo: &Geometry,
    bodies: &[Option<Vec<u8>>],
    pattern: &ErasurePattern,
) -> Result<Vec<Vec<u8>>, ShardError> {
    let n = geo.word_bits;
    let chunk = geo.chunk_len();
    let lost = pattern.lost();
    let per_stripe: Vec<Vec<Vec<u8>>> = (0..geo.stripes() as usize)
        .into_par_iter()
        .map(|s| -> Result<Vec<Vec<u8>>, CodecError> {
            let mut out = vec![Vec::with_capacity(chunk); lost.len()];
            for r in 0..geo.stripe_rows {
                let slots: Vec<Option<Word>> = bodies
                    .iter()
                    .map(|b| {
                        b.as_ref()
                            .map(|b| chunk_word(&b[s * chunk..(s + 1) * chunk], r, n))
                    })
                    .collect();
                for (dst, w) in out.iter_mut().zip(spec.reconstruct(&slots, pattern)?) {
                    dst.extend_from_slice(&w.to_le_bytes());
                }
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let mut result = vec![Vec::with_capacity(geo.body_len() as usize); lost.len()];
    for stripe in per_stripe {
        for (dst, c) in result.iter_mut().zip(stripe) {
            dst.extend_from_slice(&c);
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScrubReport {
    pub stripes: u64,
    /// Stripe indices where a parity equation fails.
    pub violations: Vec<u64>,
}

/// Checks both parity equations on every row of every stripe.
pub fn scrub_dir(dir: &Path) -> Result<ScrubReport, ShardError> {
    let array = ShardArray::load(dir)?;
    if let Some((index, reason)) = array.problems.first() {
        if array.problems.len() == 1 {
            return Err(ShardError::InvalidShard {
                index: *index,
                reason: reason.clone(),
            });
        }
        return Err(ShardError::Incomplete(array.missing()));
    }
    let spec = array.header.code_spec()?;
    let geo = array.header.geometry(spec.word_bits());
    let bodies: Vec<&[u8]> = array
        .bodies
        .iter()
        .map(|b| b.as_deref().expect("complete"))
        .collect();
    Ok(ScrubReport {
        stripes: geo.stripes(),
        violations: scrub_bodies(&spec, &geo, &bodies),
    })
}

pub fn scrub_bodies(spec: &CodeSpec, geo: &Geometry, bodies: &[&[u8]]) -> Vec<u64> {
    let n = geo.word_bits;
    let chunk = geo.chunk_len();
    let k = geo.data_disks;
    (0..geo.stripes())
        .into_par_iter()
        .filter(|&s| {
            let at = s as usize * chunk;
            (0..geo.stripe_rows).any(|r| {
                let word = |i: usize| chunk_word(&bodies[i][at..at + chunk], r, n);
                let stripe = crate::codec::Stripe {
                    data: (0..k).map(word).collect(),
                    p: word(k),
                    q: word(k + 1),
                };
                !spec.verify_stripe(&stripe)
            })
        })
        .collect()
}

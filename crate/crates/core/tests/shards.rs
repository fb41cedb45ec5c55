use std::fs;
use std::path::Path;

use coneraid::codec::CodeSpec;
use coneraid::shard::{self, ShardError, HEADER_LEN};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_file(dir: &Path, len: usize, seed: u64) -> (std::path::PathBuf, Vec<u8>) {
    let mut bytes = vec![0u8; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut bytes);
    let path = dir.join("input.bin");
    fs::write(&path, &bytes).unwrap();
    (path, bytes)
}

fn shard_path(dir: &Path, i: usize) -> std::path::PathBuf {
    dir.join(shard::shard_file_name(i))
}

#[test]
fn one_mib_z17_round_trip_after_two_deletions() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, bytes) = random_file(tmp.path(), 1 << 20, 1);
    let out = tmp.path().join("array");
    let spec = CodeSpec::zn_basic(17, 17).unwrap();
    let summary = shard::encode_file(&spec, shard::DEFAULT_STRIPE_ROWS, &input, &out).unwrap();
    assert_eq!(summary.shards.len(), 19);
    let originals: Vec<Vec<u8>> = (0..19)
        .map(|i| fs::read(shard_path(&out, i)).unwrap())
        .collect();

    fs::remove_file(shard_path(&out, 3)).unwrap();
    fs::remove_file(shard_path(&out, 7)).unwrap();
    let recovered = tmp.path().join("recovered.bin");
    let report = shard::reconstruct_dir(&out, &[], &recovered).unwrap();
    assert_eq!(report.rebuilt, vec![3, 7]);
    assert_eq!(fs::read(&recovered).unwrap(), bytes);
    for (i, original) in originals.iter().enumerate() {
        assert_eq!(
            &fs::read(shard_path(&out, i)).unwrap(),
            original,
            "shard {i}"
        );
    }
    assert!(shard::scrub_dir(&out).unwrap().violations.is_empty());
}

#[test]
fn parity_shards_rebuild_by_reencoding() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, bytes) = random_file(tmp.path(), 5000, 2);
    let out = tmp.path().join("array");
    let spec = CodeSpec::rs256(6).unwrap();
    shard::encode_file(&spec, 64, &input, &out).unwrap();
    let p = fs::read(shard_path(&out, 6)).unwrap();
    let q = fs::read(shard_path(&out, 7)).unwrap();
    fs::remove_file(shard_path(&out, 6)).unwrap();
    fs::remove_file(shard_path(&out, 7)).unwrap();
    let recovered = tmp.path().join("r.bin");
    shard::reconstruct_dir(&out, &[], &recovered).unwrap();
    assert_eq!(fs::read(shard_path(&out, 6)).unwrap(), p);
    assert_eq!(fs::read(shard_path(&out, 7)).unwrap(), q);
    assert_eq!(fs::read(&recovered).unwrap(), bytes);
}

#[test]
fn three_losses_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = random_file(tmp.path(), 100, 3);
    let out = tmp.path().join("array");
    shard::encode_file(&CodeSpec::zn_basic(5, 5).unwrap(), 8, &input, &out).unwrap();
    let err = shard::reconstruct_dir(&out, &[0, 2, 6], &tmp.path().join("r")).unwrap_err();
    assert!(matches!(&err, ShardError::TooManyMissing { missing } if missing == &[0, 2, 6]));
    assert!(err.to_string().contains("at most 2"));
}

#[test]
fn every_loss_pattern_across_schemes() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (CodeSpec::zn_basic(3, 3).unwrap(), 5u32, 0usize),
        (CodeSpec::zn_basic(5, 2).unwrap(), 3, 1),
        (CodeSpec::zn_basic(13, 13).unwrap(), 7, 333),
        (CodeSpec::zn_extended(5, 9).unwrap(), 2, 97),
        (CodeSpec::rs256(3).unwrap(), 10, 31),
        (CodeSpec::rs256(1).unwrap(), 4, 9),
    ];
    for (c, (spec, rows, len)) in cases.into_iter().enumerate() {
        let (input, bytes) = random_file(tmp.path(), len, 10 + c as u64);
        let out = tmp.path().join(format!("array{c}"));
        shard::encode_file(&spec, rows, &input, &out).unwrap();
        let total = spec.total_disks();
        for i in 0..total {
            for j in i..total {
                let lost: Vec<usize> = if i == j { vec![i] } else { vec![i, j] };
                let recovered = tmp.path().join("r.bin");
                shard::reconstruct_dir(&out, &lost, &recovered).unwrap();
                assert_eq!(
                    fs::read(&recovered).unwrap(),
                    bytes,
                    "case {c} lost {lost:?}"
                );
            }
        }
        assert!(shard::scrub_dir(&out).unwrap().violations.is_empty());
    }
}

#[test]
fn empty_file_gives_header_only_shards() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = random_file(tmp.path(), 0, 4);
    let out = tmp.path().join("array");
    shard::encode_file(
        &CodeSpec::rs256(4).unwrap(),
        shard::DEFAULT_STRIPE_ROWS,
        &input,
        &out,
    )
    .unwrap();
    for i in 0..6 {
        assert_eq!(fs::read(shard_path(&out, i)).unwrap().len(), HEADER_LEN);
    }
    fs::remove_file(shard_path(&out, 1)).unwrap();
    let recovered = tmp.path().join("r.bin");
    shard::reconstruct_dir(&out, &[], &recovered).unwrap();
    assert!(fs::read(&recovered).unwrap().is_empty());
    assert_eq!(shard::scrub_dir(&out).unwrap().stripes, 0);
}

#[test]
fn encoding_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = random_file(tmp.path(), 70_001, 5);
    let spec = CodeSpec::zn_extended(17, 33).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    shard::encode_file(&spec, 100, &input, &a).unwrap();
    shard::encode_file(&spec, 100, &input, &b).unwrap();
    for i in 0..35 {
        assert_eq!(
            fs::read(shard_path(&a, i)).unwrap(),
            fs::read(shard_path(&b, i)).unwrap()
        );
    }
}

#[test]
fn scrub_flags_exactly_the_damaged_stripe() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = random_file(tmp.path(), 4000, 6);
    let out = tmp.path().join("array");
    let spec = CodeSpec::zn_basic(5, 5).unwrap();
    let rows = 16u32;
    shard::encode_file(&spec, rows, &input, &out).unwrap();
    assert!(shard::scrub_dir(&out).unwrap().violations.is_empty());

    // one byte per row, so stripe s of a shard spans rows bytes
    let target = shard_path(&out, 2);
    let mut bytes = fs::read(&target).unwrap();
    let stripe = 5;
    bytes[HEADER_LEN + stripe * rows as usize + 3] ^= 0x04;
    fs::write(&target, &bytes).unwrap();
    assert_eq!(
        shard::scrub_dir(&out).unwrap().violations,
        vec![stripe as u64]
    );
}

#[test]
fn corrupt_header_is_a_shard_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, bytes) = random_file(tmp.path(), 999, 7);
    let out = tmp.path().join("array");
    shard::encode_file(&CodeSpec::zn_basic(7, 4).unwrap(), 32, &input, &out).unwrap();
    let target = shard_path(&out, 1);
    let mut raw = fs::read(&target).unwrap();
    raw[12] ^= 0xff;
    fs::write(&target, &raw).unwrap();

    let err = shard::scrub_dir(&out).unwrap_err();
    assert!(
        matches!(&err, ShardError::InvalidShard { index: 1, .. }),
        "{err}"
    );
    assert!(err.to_string().contains("CRC"));

    // reconstruct treats the shard as lost and repairs it
    let recovered = tmp.path().join("r.bin");
    let report = shard::reconstruct_dir(&out, &[], &recovered).unwrap();
    assert_eq!(report.rebuilt, vec![1]);
    assert_eq!(fs::read(&recovered).unwrap(), bytes);
    assert!(shard::scrub_dir(&out).unwrap().violations.is_empty());
}

#[test]
fn disagreeing_headers_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = random_file(tmp.path(), 300, 8);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    shard::encode_file(&CodeSpec::zn_basic(5, 5).unwrap(), 8, &input, &a).unwrap();
    shard::encode_file(&CodeSpec::zn_basic(5, 5).unwrap(), 16, &input, &b).unwrap();
    fs::copy(shard_path(&b, 4), shard_path(&a, 4)).unwrap();
    let err = shard::scrub_dir(&a).unwrap_err();
    assert!(
        matches!(
            err,
            ShardError::Disagreement {
                index: 4,
                field: "stripe rows",
                ..
            }
        ),
        "{err}"
    );
}

//! Acceptance suite. Each test checks one numbered criterion end to end and
//! prints one PASS line (visible with `--nocapture`). Tolerances are pinned
//! in the assertions.
//!
//! Tests share a lock so the timing-sensitive criteria (2 and 7) never run
//! concurrently with other load from this binary.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use pmrc::codec::{
    decode_linear, decode_mbr_specific, decode_msr_specific, encode_linear, encode_specific,
    precode_systematic_specific, repair_collect, repair_helper, repair_read_cost, BlockRole,
    BlockVector, RepairPlan, Share,
};
use pmrc::galois::Field;
use pmrc::linearize::{generator_from_pm, systematize};
use pmrc::pm::{
    build_sparse, build_vanilla, validate_construction_with, CodeMatrices, CodeParams, IndexMatrix,
    SubsetPolicy, Variant,
};
use pmrc::stripe;
use pmrc_cli::bench::{run_bench, sparsity_rows, Algorithm, BenchConfig, BenchOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn f8() -> Arc<Field> {
    Arc::new(Field::new(8).unwrap())
}

fn msr(k: usize) -> CodeParams {
    CodeParams::new(2 * k - 1, k, 2 * k - 2, Variant::Msr).unwrap()
}

fn mbr(n: usize, k: usize, d: usize) -> CodeParams {
    CodeParams::new(n, k, d, Variant::Mbr).unwrap()
}

fn random_stripe(b: usize, block_size: usize, seed: u64) -> BlockVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = (0..b)
        .map(|_| (0..block_size).map(|_| rng.gen()).collect())
        .collect();
    BlockVector::new(blocks, BlockRole::Data).unwrap()
}

fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        f(&subset);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if subset[i] < n - r + i {
                subset[i] += 1;
                for j in (i + 1)..r {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn specific_decode(cm: &CodeMatrices, l: &IndexMatrix, shares: &[Share]) -> BlockVector {
    match cm.params.variant {
        Variant::Msr => decode_msr_specific(cm, l, shares).unwrap(),
        Variant::Mbr => decode_mbr_specific(cm, l, shares).unwrap(),
    }
}

#[test]
fn criterion_1_table_sparsity() {
    let _g = serial();
    let rows = sparsity_rows(&[4, 8, 16], &f8()).unwrap();
    let expect = [
        (4usize, 50u32, 0u32, 64u32, 50u32),
        (8, 75, 0, 85, 75),
        (16, 87, 0, 93, 88),
    ];
    for (row, (k, vanilla, vanilla_sys, sparse, sparse_sys)) in rows.iter().zip(expect) {
        assert_eq!(row.k, k);
        assert_eq!(row.vanilla, vanilla, "vanilla non-systematic k={k}");
        assert_eq!(
            row.vanilla_systematic, vanilla_sys,
            "vanilla systematic k={k}"
        );
        assert_eq!(row.sparse, sparse, "sparse non-systematic k={k}");
        // Rounding convention for this entry is unstated; +-1 point.
        assert!(
            row.sparse_systematic.abs_diff(sparse_sys) <= 1,
            "sparse systematic k={k}: {} vs {sparse_sys}",
            row.sparse_systematic
        );
    }
    println!(
        "PASS criterion 1: sparsity table reproduced at k=4,8,16 (exact, +-1 on sparse systematic)"
    );
}

#[test]
fn criterion_2_validation_sweep() {
    let _g = serial();
    let policy = SubsetPolicy::Sample {
        count: 400,
        seed: 2025,
    };

    let field = f8();
    let t0 = Instant::now();
    for k in 2..=39 {
        let cm = build_sparse(msr(k), &field).unwrap();
        let report = validate_construction_with(&cm, policy).unwrap();
        assert!(report.overall, "w=8 k={k}: {:?}", report.checks);
    }
    let w8 = t0.elapsed();
    assert!(
        w8.as_secs_f64() <= 6.0,
        "w=8 sweep took {w8:?} (budget 6 s)"
    );

    let field = Arc::new(Field::new(16).unwrap());
    let t0 = Instant::now();
    for k in 2..=64 {
        let cm = build_sparse(msr(k), &field).unwrap();
        let report = validate_construction_with(&cm, policy).unwrap();
        assert!(report.overall, "w=16 k={k}: {:?}", report.checks);
    }
    let w16 = t0.elapsed();
    assert!(
        w16.as_secs_f64() <= 190.0,
        "w=16 sweep took {w16:?} (budget 190 s)"
    );

    println!(
        "PASS criterion 2: sparse construction valid for k=2..39 (w=8, {:.2} s) and k=2..64 (w=16, {:.2} s)",
        w8.as_secs_f64(),
        w16.as_secs_f64()
    );
}

#[test]
fn criterion_3_oracle_equivalence() {
    let _g = serial();
    let f = f8();

    // Exhaustive at k = 2, 3, 4 over every construction and variant.
    for k in [2usize, 3, 4] {
        let codes = [
            build_vanilla(msr(k), &f).unwrap(),
            build_sparse(msr(k), &f).unwrap(),
            build_vanilla(mbr(2 * k - 1, k, 2 * k - 2), &f).unwrap(),
        ];
        for cm in codes {
            let p = cm.params;
            let l = cm.index_matrix();
            let gm = generator_from_pm(&cm, &l).unwrap();
            let x = random_stripe(p.b, 8, 1000 + k as u64);

            let specific = encode_specific(&cm, &l, &x).unwrap();
            let linear = encode_linear(&gm, &x).unwrap();
            assert_eq!(specific, linear, "encode k={k} {:?}", cm.construction);

            for_each_subset(p.n, p.k, |subset| {
                let chosen: Vec<Share> = subset.iter().map(|&i| specific[i].clone()).collect();
                assert_eq!(specific_decode(&cm, &l, &chosen).blocks, x.blocks);
                assert_eq!(decode_linear(&gm, &chosen, None).unwrap().blocks, x.blocks);
            });
            for mask in 0u32..(1 << p.n) {
                let avail: Vec<Share> = (0..p.n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| specific[i].clone())
                    .collect();
                if avail.len() >= p.k {
                    assert_eq!(decode_linear(&gm, &avail, None).unwrap().blocks, x.blocks);
                } else {
                    assert!(decode_linear(&gm, &avail, None).is_err());
                }
            }
        }
    }

    // 100 random trials at k = 8 for each code family.
    let codes = [
        build_vanilla(msr(8), &f).unwrap(),
        build_sparse(msr(8), &f).unwrap(),
        build_vanilla(mbr(15, 8, 10), &f).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for cm in codes {
        let p = cm.params;
        let l = cm.index_matrix();
        let gm = generator_from_pm(&cm, &l).unwrap();
        for trial in 0..100 {
            let x = random_stripe(p.b, 8, 2000 + trial);
            let shares = encode_specific(&cm, &l, &x).unwrap();
            assert_eq!(encode_linear(&gm, &x).unwrap(), shares);
            let mut nodes: Vec<usize> = (0..p.n).collect();
            for i in (1..p.n).rev() {
                nodes.swap(i, rng.gen_range(0..=i));
            }
            let chosen: Vec<Share> = nodes[..p.k].iter().map(|&i| shares[i].clone()).collect();
            assert_eq!(specific_decode(&cm, &l, &chosen).blocks, x.blocks);
            assert_eq!(decode_linear(&gm, &chosen, None).unwrap().blocks, x.blocks);
        }
    }

    println!("PASS criterion 3: specific and linearized paths bit-exact (exhaustive k=2..4, 100 random trials at k=8)");
}

#[test]
fn criterion_4_repair_exactness() {
    let _g = serial();
    let f = f8();

    let mut small = Vec::new();
    for k in [2usize, 3, 4] {
        small.push(build_vanilla(msr(k), &f).unwrap());
        small.push(build_sparse(msr(k), &f).unwrap());
        small.push(build_vanilla(mbr(2 * k - 1, k, 2 * k - 2), &f).unwrap());
    }
    // Extra instances with n > d + 1 so helper subsets are non-trivial.
    small.push(build_vanilla(CodeParams::new(6, 3, 4, Variant::Msr).unwrap(), &f).unwrap());
    small.push(build_vanilla(mbr(7, 3, 4), &f).unwrap());

    for cm in small {
        let p = cm.params;
        let l = cm.index_matrix();
        let x = random_stripe(p.b, 8, 3000 + p.n as u64 + p.d as u64);
        let shares = encode_specific(&cm, &l, &x).unwrap();
        for failed in 1..=p.n {
            let others: Vec<usize> = (1..=p.n).filter(|&i| i != failed).collect();
            for_each_subset(others.len(), p.d, |subset| {
                let helpers: Vec<usize> = subset.iter().map(|&i| others[i]).collect();
                let plan = RepairPlan::new(&cm, failed, Some(&helpers)).unwrap();
                let symbols: Vec<_> = helpers
                    .iter()
                    .map(|&h| repair_helper(&shares[h - 1], &plan).unwrap())
                    .collect();
                let rebuilt = repair_collect(&cm, &plan, &symbols).unwrap();
                assert_eq!(
                    rebuilt.blocks,
                    shares[failed - 1].blocks,
                    "failed={failed} helpers={helpers:?} {p:?}"
                );
            });
        }
    }

    // 100 random trials at k = 8 (MSR standard family and an MBR with
    // d < n - 1 so the helper set varies).
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for cm in [
        build_sparse(msr(8), &f).unwrap(),
        build_vanilla(msr(8), &f).unwrap(),
        build_vanilla(mbr(15, 8, 10), &f).unwrap(),
    ] {
        let p = cm.params;
        let l = cm.index_matrix();
        for trial in 0..100 {
            let x = random_stripe(p.b, 8, 4000 + trial);
            let shares = encode_specific(&cm, &l, &x).unwrap();
            let failed = rng.gen_range(1..=p.n);
            let mut others: Vec<usize> = (1..=p.n).filter(|&i| i != failed).collect();
            for i in (1..others.len()).rev() {
                others.swap(i, rng.gen_range(0..=i));
            }
            let helpers: Vec<usize> = others[..p.d].to_vec();
            let plan = RepairPlan::new(&cm, failed, Some(&helpers)).unwrap();
            let symbols: Vec<_> = helpers
                .iter()
                .map(|&h| repair_helper(&shares[h - 1], &plan).unwrap())
                .collect();
            let rebuilt = repair_collect(&cm, &plan, &symbols).unwrap();
            assert_eq!(rebuilt.blocks, shares[failed - 1].blocks);
        }
    }

    println!("PASS criterion 4: repaired shares bit-identical for every failure and helper subset (k=2..4, 100 random trials at k=8)");
}

#[test]
fn criterion_5_repair_read_accounting() {
    let _g = serial();
    let f = f8();

    let cm = build_sparse(msr(8), &f).unwrap();
    let alpha = cm.params.alpha;
    let l = cm.index_matrix();
    let x = random_stripe(cm.params.b, 8, 5000);
    let shares = encode_specific(&cm, &l, &x).unwrap();
    for failed in 1..=cm.params.n {
        let plan = RepairPlan::new(&cm, failed, None).unwrap();
        let expect = if failed <= alpha { 1 } else { alpha };
        assert_eq!(plan.reads_per_helper, expect, "failed={failed}");
        // The helper actually reads that many blocks.
        let sym = repair_helper(&shares[plan.helpers[0] - 1], &plan).unwrap();
        assert_eq!(sym.blocks_read, expect);
    }

    for (k, percent) in [(8usize, 43u32), (4, 33)] {
        let cm = build_sparse(msr(k), &f).unwrap();
        let cost = repair_read_cost(&cm, 1).unwrap();
        assert_eq!(
            (cost.reduction_paper * 100.0).round() as u32,
            percent,
            "k={k}"
        );
    }

    println!("PASS criterion 5: sparse repair reads 1 block (failed <= alpha) / alpha otherwise; headline reductions 43% (k=8) and 33% (k=4)");
}

#[test]
fn criterion_6_systematic_contract() {
    let _g = serial();
    let f = f8();

    for k in [3usize, 4, 8] {
        for cm in [
            build_vanilla(msr(k), &f).unwrap(),
            build_sparse(msr(k), &f).unwrap(),
        ] {
            let p = cm.params;
            let l = cm.index_matrix();
            let x = random_stripe(p.b, 16, 6000 + k as u64);

            let gm = systematize(&generator_from_pm(&cm, &l).unwrap()).unwrap();
            let via_generator = encode_linear(&gm, &x).unwrap();
            let z = precode_systematic_specific(&cm, &l, &x).unwrap();
            let via_precode = encode_specific(&cm, &l, &z).unwrap();
            assert_eq!(via_generator, via_precode, "paths diverge k={k}");

            let mut prefix = Vec::new();
            for share in &via_generator[..p.k] {
                prefix.extend(share.blocks.iter().cloned());
            }
            assert_eq!(prefix, x.blocks, "systematic prefix k={k}");
        }
    }

    // MBR is natively systematic: the first k shares carry X verbatim at
    // the positions L names.
    let cm = build_vanilla(mbr(15, 8, 10), &f).unwrap();
    let l = cm.index_matrix();
    let x = random_stripe(cm.params.b, 16, 6100);
    let shares = encode_specific(&cm, &l, &x).unwrap();
    let mut seen = vec![false; cm.params.b];
    for (i, share) in shares.iter().take(cm.params.k).enumerate() {
        for j in 0..cm.params.d {
            if let Some(idx) = l.block_at(i, j) {
                assert_eq!(share.blocks[j], x.blocks[idx]);
                seen[idx] = true;
            }
        }
    }
    assert!(seen.iter().all(|&s| s), "first k MBR nodes cover all of X");

    println!("PASS criterion 6: systematic prefix equals data; G*Gtilde^-1 and decode-then-encode agree bit-exactly; MBR native");
}

#[test]
fn criterion_7_sparse_systematic_speedup() {
    let _g = serial();
    let f = f8();
    let sparse = build_sparse(msr(8), &f).unwrap();
    let vanilla = build_vanilla(msr(8), &f).unwrap();
    let runs = 12;

    let fast = run_bench(
        &sparse,
        &sparse.index_matrix(),
        &BenchConfig {
            op: BenchOp::Encode,
            algorithm: Algorithm::Linear,
            systematic: true,
            block_size: 16384,
            runs,
            seed: 7,
        },
    )
    .unwrap();
    let slow = run_bench(
        &vanilla,
        &vanilla.index_matrix(),
        &BenchConfig {
            op: BenchOp::Encode,
            algorithm: Algorithm::Specific,
            systematic: true,
            block_size: 16384,
            runs,
            seed: 7,
        },
    )
    .unwrap();

    let ratio = fast.throughput_mbs / slow.throughput_mbs;
    assert!(
        ratio >= 2.0,
        "sparse linear {:.0} MB/s vs vanilla specific {:.0} MB/s (ratio {ratio:.2}, need >= 2)",
        fast.throughput_mbs,
        slow.throughput_mbs
    );
    println!(
        "PASS criterion 7: systematic encode at k=8/16 KB: sparse linear {:.0} MB/s >= 2x vanilla specific {:.0} MB/s (ratio {ratio:.1})",
        fast.throughput_mbs, slow.throughput_mbs
    );
}

#[test]
fn criterion_8_end_to_end_files() {
    let _g = serial();
    let f = f8();
    let block_size = 64usize;
    let codes = [
        (build_sparse(msr(3), &f).unwrap(), true),
        (build_vanilla(mbr(5, 3, 4), &f).unwrap(), false),
    ];
    for (cm, systematic) in codes {
        let p = cm.params;
        let stripe_bytes = p.b * block_size;
        let sizes = [0usize, 1, stripe_bytes - 1, stripe_bytes, stripe_bytes + 1];
        for (si, &size) in sizes.iter().enumerate() {
            let dir = tempfile::tempdir().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + si as u64);
            let data: Vec<u8> = (0..size).map(|_| rng.gen()).collect();
            let input = dir.path().join("input.bin");
            std::fs::write(&input, &data).unwrap();
            let shards =
                stripe::split_and_encode(&input, dir.path(), &cm, block_size, systematic).unwrap();
            assert_eq!(shards.len(), p.n);

            // Every way of deleting exactly n-k shards must still restore.
            for_each_subset(p.n, p.n - p.k, |deleted| {
                let survivors: Vec<_> = (0..p.n)
                    .filter(|i| !deleted.contains(i))
                    .map(|i| shards[i].clone())
                    .collect();
                let out = dir.path().join("restored.bin");
                stripe::reassemble(&survivors, &out).unwrap();
                assert_eq!(
                    std::fs::read(&out).unwrap(),
                    data,
                    "size={size} deleted={deleted:?} {:?}",
                    p.variant
                );
            });
        }
    }
    println!("PASS criterion 8: encode -> any n-k deletions -> reassemble byte-identical (padding edges 0, 1, stripe-1, stripe, stripe+1)");
}

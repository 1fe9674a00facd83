//! Cross-algorithm round-trip coverage: the specific Psi*M path and the
//! linearized G*X path must agree bit-exactly on encode, decode, and repair,
//! for every construction and variant, exhaustively at small parameters.

use std::sync::Arc;

use pmrc::codec::{
    decode_linear, decode_mbr_specific, decode_msr_specific, encode_linear, encode_specific,
    encode_specific_nodes, precode_systematic_specific, repair_collect, repair_helper, BlockRole,
    BlockVector, RepairPlan, Share,
};
use pmrc::galois::Field;
use pmrc::linearize::{generator_from_pm, systematize};
use pmrc::pm::{
    build_sparse, build_vanilla, validate_construction, CodeMatrices, CodeParams, IndexMatrix,
    Variant,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(w: u32) -> Arc<Field> {
    Arc::new(Field::new(w).unwrap())
}

fn msr(n: usize, k: usize) -> CodeParams {
    CodeParams::new(n, k, 2 * k - 2, Variant::Msr).unwrap()
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

/// Small instances covering both variants and constructions, including
/// codes with n > d + 1 so helper/DC subsets are non-trivial. The sparse
/// construction only exists on the n = 2k-1 family: with n >= d + 2 its
/// all-Cauchy d-row subsets obey a fixed column relation and are singular,
/// which `sparse_needs_n_equal_d_plus_one` pins down.
fn small_codes() -> Vec<(CodeMatrices, IndexMatrix)> {
    let f = field(8);
    let mut out = Vec::new();
    for k in [2usize, 3, 4] {
        out.push(build_vanilla(msr(2 * k - 1, k), &f).unwrap());
        out.push(build_sparse(msr(2 * k - 1, k), &f).unwrap());
        out.push(build_vanilla(mbr(2 * k - 1, k, 2 * k - 2), &f).unwrap());
    }
    out.push(build_vanilla(msr(6, 3), &f).unwrap());
    out.push(build_vanilla(mbr(5, 3, 3), &f).unwrap());
    out.push(build_vanilla(mbr(7, 3, 4), &f).unwrap());
    out.into_iter()
        .map(|cm| {
            let l = cm.index_matrix();
            (cm, l)
        })
        .collect()
}

#[test]
fn sparse_needs_n_equal_d_plus_one() {
    let f = field(8);
    let cm = build_sparse(msr(6, 3), &f).unwrap();
    let report = validate_construction(&cm).unwrap();
    assert!(!report.overall);
    let check = report
        .checks
        .iter()
        .find(|c| c.name == "psi_any_d_rows_independent")
        .unwrap();
    // The all-Cauchy subset is the failing one.
    assert_eq!(check.witness.as_deref(), Some(&[3usize, 4, 5, 6][..]));
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
fn small_codes_pass_validation() {
    for (cm, _) in small_codes() {
        let report = validate_construction(&cm).unwrap();
        assert!(
            report.overall,
            "{:?} {:?} n={} k={} failed: {:?}",
            cm.construction, cm.params.variant, cm.params.n, cm.params.k, report.checks
        );
    }
}

#[test]
fn specific_and_linear_agree_on_every_k_subset() {
    for (cm, l) in small_codes() {
        let p = cm.params;
        let gm = generator_from_pm(&cm, &l).unwrap();
        let x = random_stripe(p.b, 16, 101 + p.n as u64);

        let specific_shares = encode_specific(&cm, &l, &x).unwrap();
        let linear_shares = encode_linear(&gm, &x).unwrap();
        assert_eq!(specific_shares, linear_shares, "encode mismatch {p:?}");

        for_each_subset(p.n, p.k, |subset| {
            let chosen: Vec<Share> = subset.iter().map(|&i| specific_shares[i].clone()).collect();
            let via_specific = specific_decode(&cm, &l, &chosen);
            let via_linear = decode_linear(&gm, &chosen, None).unwrap();
            assert_eq!(via_specific.blocks, x.blocks, "specific {subset:?} {p:?}");
            assert_eq!(via_linear.blocks, x.blocks, "linear {subset:?} {p:?}");
        });
    }
}

#[test]
fn generator_matrix_product_matches_specific_encode() {
    // Third route: plain matrix algebra G * X on single-symbol blocks must
    // reproduce the specific encoder symbol for symbol.
    use pmrc::gfmatrix::Matrix;
    for (cm, l) in small_codes() {
        let p = cm.params;
        let gm = generator_from_pm(&cm, &l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(150 + p.b as u64);
        let elems: Vec<u16> = (0..p.b).map(|_| rng.gen_range(0..=255)).collect();
        let xm = Matrix::new(cm.field.clone(), p.b, 1, elems.clone()).unwrap();
        let y = gm.g.mul(&xm).unwrap();

        let x = BlockVector::new(
            elems.iter().map(|&v| vec![v as u8]).collect(),
            BlockRole::Data,
        )
        .unwrap();
        let shares = encode_specific(&cm, &l, &x).unwrap();
        for i in 0..p.n {
            for j in 0..p.alpha {
                assert_eq!(
                    shares[i].blocks[j][0] as u16,
                    y[(i * p.alpha + j, 0)],
                    "node {} symbol {j} {p:?}",
                    i + 1
                );
            }
        }
    }
}

#[test]
fn linear_decode_handles_every_erasure_pattern() {
    for (cm, l) in small_codes() {
        let p = cm.params;
        let gm = generator_from_pm(&cm, &l).unwrap();
        let x = random_stripe(p.b, 8, 202 + p.n as u64);
        let shares = encode_specific(&cm, &l, &x).unwrap();
        for mask in 0u32..(1 << p.n) {
            let avail: Vec<Share> = (0..p.n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| shares[i].clone())
                .collect();
            let result = decode_linear(&gm, &avail, None);
            if avail.len() >= p.k {
                assert_eq!(result.unwrap().blocks, x.blocks, "mask {mask:#b} {p:?}");
            } else {
                assert!(result.is_err(), "mask {mask:#b} should be unrecoverable");
            }
        }
    }
}

#[test]
fn decoding_is_independent_of_encoding_method() {
    for (cm, l) in small_codes() {
        let p = cm.params;
        let gm = generator_from_pm(&cm, &l).unwrap();
        let x = random_stripe(p.b, 16, 303);

        // Linear-encoded stripes decode with the specific algorithm.
        let linear_shares = encode_linear(&gm, &x).unwrap();
        let picked: Vec<Share> = linear_shares[p.n - p.k..].to_vec();
        assert_eq!(specific_decode(&cm, &l, &picked).blocks, x.blocks);

        // Specific-encoded stripes decode with the linear algorithm.
        let specific_shares = encode_specific(&cm, &l, &x).unwrap();
        let picked: Vec<Share> = specific_shares[..p.k].to_vec();
        assert_eq!(decode_linear(&gm, &picked, None).unwrap().blocks, x.blocks);
    }
}

#[test]
fn systematic_paths_agree_bit_exactly() {
    let f = field(8);
    for k in [2usize, 3, 4] {
        for cm in [
            build_vanilla(msr(2 * k - 1, k), &f).unwrap(),
            build_sparse(msr(2 * k - 1, k), &f).unwrap(),
        ] {
            let l = cm.index_matrix();
            let p = cm.params;
            let x = random_stripe(p.b, 16, 404 + k as u64);

            let gm = systematize(&generator_from_pm(&cm, &l).unwrap()).unwrap();
            let via_linear = encode_linear(&gm, &x).unwrap();

            let z = precode_systematic_specific(&cm, &l, &x).unwrap();
            let via_specific = encode_specific(&cm, &l, &z).unwrap();

            assert_eq!(via_linear, via_specific, "k={k} {:?}", cm.construction);

            // Systematic prefix: first B symbols are the data.
            let mut prefix = Vec::new();
            for share in &via_linear[..p.k] {
                prefix.extend(share.blocks.iter().cloned());
            }
            assert_eq!(prefix, x.blocks);

            // Specific decode of a systematic stripe returns Z; re-encoding
            // the prefix gives back X.
            let survivors: Vec<Share> = via_specific[p.n - p.k..].to_vec();
            let z_back = specific_decode(&cm, &l, &survivors);
            assert_eq!(z_back.blocks, z.blocks);
            let nodes: Vec<usize> = (1..=p.k).collect();
            let reenc = encode_specific_nodes(&cm, &l, &z_back, &nodes).unwrap();
            let mut x_back = Vec::new();
            for share in &reenc {
                x_back.extend(share.blocks.iter().cloned());
            }
            assert_eq!(x_back, x.blocks);
        }
    }
}

#[test]
fn repair_exact_for_every_failure_and_helper_subset() {
    for (cm, l) in small_codes() {
        let p = cm.params;
        let x = random_stripe(p.b, 16, 505 + p.d as u64);
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
                let got = repair_collect(&cm, &plan, &symbols).unwrap();
                assert_eq!(
                    got.blocks,
                    shares[failed - 1].blocks,
                    "failed={failed} helpers={helpers:?} {p:?}"
                );
            });
        }
    }
}

#[test]
fn repair_works_on_systematic_stripes() {
    let f = field(8);
    let cm = build_sparse(msr(7, 4), &f).unwrap();
    let l = cm.index_matrix();
    let gm = systematize(&generator_from_pm(&cm, &l).unwrap()).unwrap();
    let x = random_stripe(cm.params.b, 16, 606);
    let shares = encode_linear(&gm, &x).unwrap();
    for failed in 1..=cm.params.n {
        let plan = RepairPlan::new(&cm, failed, None).unwrap();
        let symbols: Vec<_> = plan
            .helpers
            .iter()
            .map(|&h| repair_helper(&shares[h - 1], &plan).unwrap())
            .collect();
        let got = repair_collect(&cm, &plan, &symbols).unwrap();
        assert_eq!(got.blocks, shares[failed - 1].blocks, "failed={failed}");
    }
}

#[test]
fn w16_round_trip_and_repair() {
    let f = field(16);
    for cm in [
        build_sparse(msr(5, 3), &f).unwrap(),
        build_vanilla(mbr(5, 3, 4), &f).unwrap(),
    ] {
        let l = cm.index_matrix();
        let p = cm.params;
        let x = random_stripe(p.b, 32, 707);
        let shares = encode_specific(&cm, &l, &x).unwrap();
        let gm = generator_from_pm(&cm, &l).unwrap();
        assert_eq!(encode_linear(&gm, &x).unwrap(), shares);

        let picked: Vec<Share> = shares[p.n - p.k..].to_vec();
        assert_eq!(specific_decode(&cm, &l, &picked).blocks, x.blocks);

        let plan = RepairPlan::new(&cm, 1, None).unwrap();
        let symbols: Vec<_> = plan
            .helpers
            .iter()
            .map(|&h| repair_helper(&shares[h - 1], &plan).unwrap())
            .collect();
        assert_eq!(
            repair_collect(&cm, &plan, &symbols).unwrap().blocks,
            shares[0].blocks
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_data_round_trips(
        seed in any::<u64>(),
        blocks in 1usize..5,
        k in 2usize..5,
        sparse in any::<bool>(),
    ) {
        let f = field(8);
        let params = msr(2 * k - 1, k);
        let cm = if sparse {
            build_sparse(params, &f).unwrap()
        } else {
            build_vanilla(params, &f).unwrap()
        };
        let l = cm.index_matrix();
        let x = random_stripe(cm.params.b, blocks * f.symbol_bytes(), seed);
        let shares = encode_specific(&cm, &l, &x).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xDEAD);
        let mut nodes: Vec<usize> = (0..cm.params.n).collect();
        for i in (1..nodes.len()).rev() {
            nodes.swap(i, rng.gen_range(0..=i));
        }
        let chosen: Vec<Share> = nodes[..k].iter().map(|&i| shares[i].clone()).collect();
        let decoded = decode_msr_specific(&cm, &l, &chosen).unwrap();
        prop_assert_eq!(decoded.blocks, x.blocks);
    }
}

//! MBR-specific decoding. With R = Psi_DC * M, Psi_DC = [Phi_DC | Delta_DC]
//! and M = [[S, T], [T^t, 0]], the right block of R is Phi_DC * T and the
//! left is Phi_DC * S + Delta_DC * T^t, so T and then S fall out of two
//! solves against Phi_DC.

use std::sync::Arc;

use crate::galois::Field;
use crate::gfmatrix::Matrix;
use crate::pm::{CodeMatrices, CodeParams, IndexMatrix, Variant};
use crate::{Error, Result};

use super::{arrange_shares, share_block_size, BlockRole, BlockVector, Share};

/// Decode plan for one set of k data-collector nodes; the Phi_DC inversion
/// is done once and reused across stripes.
pub struct MbrDecoder {
    field: Arc<Field>,
    params: CodeParams,
    l: IndexMatrix,
    dc_nodes: Vec<usize>,
    phi_dc_inv: Matrix,
    delta_dc: Matrix,
}

impl MbrDecoder {
    pub fn new(cm: &CodeMatrices, l: &IndexMatrix, dc_nodes: &[usize]) -> Result<MbrDecoder> {
        let p = cm.params;
        if p.variant != Variant::Mbr {
            return Err(Error::WrongVariant {
                expected: Variant::Mbr,
            });
        }
        if dc_nodes.len() != p.k {
            return Err(Error::BlockCount {
                have: dc_nodes.len(),
                need: p.k,
            });
        }
        let mut seen = vec![false; p.n + 1];
        for &node in dc_nodes {
            if node == 0 || node > p.n {
                return Err(Error::RowOutOfRange {
                    index: node,
                    rows: p.n,
                });
            }
            if seen[node] {
                return Err(Error::ConstructionInvalid(format!(
                    "duplicate data-collector node {node}"
                )));
            }
            seen[node] = true;
        }
        let dc0: Vec<usize> = dc_nodes.iter().map(|&n| n - 1).collect();
        let psi_dc = cm.psi.select_rows(&dc0)?;
        let phi_dc = psi_dc.column_range(0, p.k);
        let delta_dc = psi_dc.column_range(p.k, p.d);
        let phi_dc_inv = phi_dc.invert().map_err(|e| match e {
            Error::Singular { .. } => {
                Error::ConstructionInvalid("Phi_DC singular; construction invalid".into())
            }
            other => other,
        })?;
        Ok(MbrDecoder {
            field: cm.field.clone(),
            params: p,
            l: l.clone(),
            dc_nodes: dc_nodes.to_vec(),
            phi_dc_inv,
            delta_dc,
        })
    }

    pub fn dc_nodes(&self) -> &[usize] {
        &self.dc_nodes
    }

    pub fn decode(&self, shares: &[Share]) -> Result<BlockVector> {
        let picked = arrange_shares(shares, &self.dc_nodes)?;
        let block_size = share_block_size(&picked, self.params.alpha)?;
        if !block_size.is_multiple_of(self.field.symbol_bytes()) {
            return Err(Error::BadBlockSize {
                size: block_size,
                reason: "not symbol-aligned".into(),
            });
        }
        let f = &self.field;
        let (k, d, b) = (self.params.k, self.params.d, self.params.b);
        let t_cols = d - k;

        // T = Phi_DC^-1 * R_right.
        let mut t = vec![vec![vec![0u8; block_size]; t_cols]; k];
        for (r, trow) in t.iter_mut().enumerate() {
            for (c, dst) in trow.iter_mut().enumerate() {
                for (m, share) in picked.iter().enumerate() {
                    f.region_madd(dst, &share.blocks[k + c], self.phi_dc_inv[(r, m)])?;
                }
            }
        }

        // U = R_left + Delta_DC * T^t, then S = Phi_DC^-1 * U.
        let mut u = Vec::with_capacity(k * k);
        for (r, share) in picked.iter().enumerate() {
            for (c, trow) in t.iter().enumerate() {
                let mut cell = share.blocks[c].clone();
                for (m, tblock) in trow.iter().enumerate() {
                    f.region_madd(&mut cell, tblock, self.delta_dc[(r, m)])?;
                }
                u.push(cell);
            }
        }
        let mut s = vec![vec![vec![0u8; block_size]; k]; k];
        for (r, srow) in s.iter_mut().enumerate() {
            for (c, dst) in srow.iter_mut().enumerate() {
                for m in 0..k {
                    f.region_madd(dst, &u[m * k + c], self.phi_dc_inv[(r, m)])?;
                }
            }
        }

        // Read X out through L: M = [[S, T], [T^t, 0]].
        let mut blocks: Vec<Option<Vec<u8>>> = vec![None; b];
        for lrow in 0..d {
            for col in 0..d {
                if let Some(idx) = self.l.block_at(lrow, col) {
                    if blocks[idx].is_none() {
                        let block = match (lrow < k, col < k) {
                            (true, true) => &s[lrow][col],
                            (true, false) => &t[lrow][col - k],
                            (false, true) => &t[col][lrow - k],
                            (false, false) => unreachable!("zero block carries no indices"),
                        };
                        blocks[idx] = Some(block.clone());
                    }
                }
            }
        }
        let blocks: Vec<Vec<u8>> = blocks
            .into_iter()
            .enumerate()
            .map(|(i, blk)| {
                blk.ok_or_else(|| {
                    Error::ConstructionInvalid(format!("index matrix never maps block {}", i + 1))
                })
            })
            .collect::<Result<_>>()?;
        BlockVector::new(blocks, BlockRole::Data)
    }
}

/// One-shot MBR decode from exactly k shares.
pub fn decode_mbr_specific(
    cm: &CodeMatrices,
    l: &IndexMatrix,
    shares: &[Share],
) -> Result<BlockVector> {
    let nodes: Vec<usize> = shares.iter().map(|s| s.node_index).collect();
    MbrDecoder::new(cm, l, &nodes)?.decode(shares)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_specific;
    use crate::pm::build_vanilla;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f8() -> Arc<Field> {
        Arc::new(Field::new(8).unwrap())
    }

    fn mbr(n: usize, k: usize, d: usize) -> CodeMatrices {
        build_vanilla(CodeParams::new(n, k, d, Variant::Mbr).unwrap(), &f8()).unwrap()
    }

    fn random_stripe(b: usize, block_size: usize, seed: u64) -> BlockVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = (0..b)
            .map(|_| (0..block_size).map(|_| rng.gen()).collect())
            .collect();
        BlockVector::new(blocks, BlockRole::Data).unwrap()
    }

    #[test]
    fn roundtrip_every_k_subset() {
        for cm in [mbr(5, 3, 4), mbr(5, 3, 3), mbr(6, 2, 3)] {
            let l = cm.index_matrix();
            let x = random_stripe(cm.params.b, 16, 31);
            let shares = encode_specific(&cm, &l, &x).unwrap();
            let n = cm.params.n;
            let k = cm.params.k;
            let mut subset: Vec<usize> = (0..k).collect();
            loop {
                let chosen: Vec<Share> = subset.iter().map(|&i| shares[i].clone()).collect();
                let got = decode_mbr_specific(&cm, &l, &chosen).unwrap();
                assert_eq!(got.blocks, x.blocks, "subset {subset:?}");
                // next combination
                let mut i = k;
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    if subset[i] < n - k + i {
                        subset[i] += 1;
                        for j in (i + 1)..k {
                            subset[j] = subset[j - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
    }

    #[test]
    fn systematic_nodes_hold_data_verbatim() {
        let cm = mbr(5, 3, 4);
        let l = cm.index_matrix();
        let x = random_stripe(cm.params.b, 8, 32);
        let shares = encode_specific(&cm, &l, &x).unwrap();
        // Node i <= k stores row i of M: the blocks L names in that row.
        for (i, share) in shares.iter().take(cm.params.k).enumerate() {
            for j in 0..cm.params.d {
                if let Some(idx) = l.block_at(i, j) {
                    assert_eq!(share.blocks[j], x.blocks[idx]);
                }
            }
        }
        let got = decode_mbr_specific(&cm, &l, &shares[..3]).unwrap();
        assert_eq!(got.blocks, x.blocks);
    }

    #[test]
    fn zero_shares_decode_to_zero() {
        let cm = mbr(5, 3, 4);
        let l = cm.index_matrix();
        let shares: Vec<Share> = (1..=3)
            .map(|node| Share {
                node_index: node,
                blocks: vec![vec![0u8; 8]; cm.params.alpha],
                stripe_id: 0,
            })
            .collect();
        let got = decode_mbr_specific(&cm, &l, &shares).unwrap();
        assert!(got.blocks.iter().all(|b| b.iter().all(|&v| v == 0)));
    }
}

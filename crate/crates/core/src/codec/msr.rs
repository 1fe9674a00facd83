//! MSR-specific decoding via the symmetric-matrix structure of M, and the
//! precoding step that makes specific encoding systematic.
//!
//! With DC shares C = Psi_DC * M and A = C * Phi_DC^t, the structure
//! M = [[S1],[S2]] gives A = P + Lambda_DC * Q where P = Phi S1 Phi^t and
//! Q = Phi S2 Phi^t are symmetric. Off-diagonal entries then separate as
//! Q_ij = (A_ij - A_ji) / (lambda_i - lambda_j) and P_ij = A_ij -
//! lambda_i * Q_ij, each column yields S2 phi_i^t (resp. S1 phi_i^t) through
//! an alpha x alpha solve, and S1/S2 assemble from any alpha such columns.

use std::sync::Arc;

use crate::galois::{Elem, Field};
use crate::gfmatrix::Matrix;
use crate::pm::{CodeMatrices, CodeParams, IndexMatrix, Variant};
use crate::{Error, Result};

use super::{arrange_shares, check_stripe_shape, share_block_size, BlockRole, BlockVector, Share};

/// Decode plan for one set of k data-collector nodes. All matrix inversions
/// happen here; `decode` runs region arithmetic only.
pub struct MsrDecoder {
    field: Arc<Field>,
    params: CodeParams,
    l: IndexMatrix,
    dc_nodes: Vec<usize>,
    lambda_dc: Vec<Elem>,
    phi_dc: Matrix,
    /// inv(lambda_i + lambda_j) for i != j, k x k row-major.
    offdiag_inv: Vec<Elem>,
    /// Per DC position i: inverse of Phi_DC with row i removed.
    solve_inv: Vec<Matrix>,
    /// Inverse of Phi_R^t for R = the first alpha DC rows.
    assemble_inv: Matrix,
}

impl MsrDecoder {
    pub fn new(cm: &CodeMatrices, l: &IndexMatrix, dc_nodes: &[usize]) -> Result<MsrDecoder> {
        let p = cm.params;
        if p.variant != Variant::Msr {
            return Err(Error::WrongVariant {
                expected: Variant::Msr,
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
        let lambda = cm
            .lambda
            .as_ref()
            .ok_or_else(|| Error::ConstructionInvalid("MSR code lacks Lambda".into()))?;
        let lambda_dc: Vec<Elem> = dc_nodes.iter().map(|&n| lambda[n - 1]).collect();

        let k = p.k;
        let mut offdiag_inv = vec![0 as Elem; k * k];
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let diff = lambda_dc[i] ^ lambda_dc[j];
                if diff == 0 {
                    return Err(Error::ConstructionInvalid(format!(
                        "lambda collision between nodes {} and {}",
                        dc_nodes[i], dc_nodes[j]
                    )));
                }
                offdiag_inv[i * k + j] = cm.field.inv(diff)?;
            }
        }

        let phi = cm.phi();
        let dc0: Vec<usize> = dc_nodes.iter().map(|&n| n - 1).collect();
        let phi_dc = phi.select_rows(&dc0)?;

        let invalid = |what: &str, e: Error| match e {
            Error::Singular { .. } => {
                Error::ConstructionInvalid(format!("{what} is singular; construction invalid"))
            }
            other => other,
        };

        let mut solve_inv = Vec::with_capacity(k);
        for i in 0..k {
            let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
            let sub = phi_dc.select_rows(&others)?;
            solve_inv.push(
                sub.invert()
                    .map_err(|e| invalid(&format!("Phi_DC without row {i}"), e))?,
            );
        }
        let first_alpha: Vec<usize> = (0..p.alpha).collect();
        let assemble_inv = phi_dc
            .select_rows(&first_alpha)?
            .transpose()
            .invert()
            .map_err(|e| invalid("Phi_R^t", e))?;

        Ok(MsrDecoder {
            field: cm.field.clone(),
            params: p,
            l: l.clone(),
            dc_nodes: dc_nodes.to_vec(),
            lambda_dc,
            phi_dc,
            offdiag_inv,
            solve_inv,
            assemble_inv,
        })
    }

    pub fn dc_nodes(&self) -> &[usize] {
        &self.dc_nodes
    }

    /// Decodes from exactly the planned k shares (any order).
    pub fn decode(&self, shares: &[Share]) -> Result<BlockVector> {
        let picked = arrange_shares(shares, &self.dc_nodes)?;
        let block_size = share_block_size(&picked, self.params.alpha)?;
        if !block_size.is_multiple_of(self.field.symbol_bytes()) {
            return Err(Error::BadBlockSize {
                size: block_size,
                reason: "not symbol-aligned".into(),
            });
        }
        let rows: Vec<&[Vec<u8>]> = picked.iter().map(|s| s.blocks.as_slice()).collect();
        self.decode_rows(&rows, block_size)
    }

    /// Decodes stripes produced by a systematic encoder: recovers the
    /// precoded data, then re-encodes the systematic prefix to read X
    /// (nodes 1..k hold X verbatim, so their shares are exactly the
    /// answer when they all survive).
    pub fn decode_systematic(&self, cm: &CodeMatrices, shares: &[Share]) -> Result<BlockVector> {
        let z = self.decode(shares)?;
        let nodes: Vec<usize> = (1..=self.params.k).collect();
        let prefix = super::encode_specific_nodes(cm, &self.l, &z, &nodes)?;
        let blocks: Vec<Vec<u8>> = prefix.into_iter().flat_map(|s| s.blocks).collect();
        BlockVector::new(blocks, BlockRole::Data)
    }

    /// Core path shared with the precoder: `c[i]` is the alpha-block row of
    /// DC node i.
    fn decode_rows(&self, c: &[&[Vec<u8>]], block_size: usize) -> Result<BlockVector> {
        let f = &self.field;
        let (k, alpha, d, b) = (
            self.params.k,
            self.params.alpha,
            self.params.d,
            self.params.b,
        );

        // A = C * Phi_DC^t, a k x k grid of blocks.
        let mut a = vec![vec![0u8; block_size]; k * k];
        for i in 0..k {
            for j in 0..k {
                let dst = &mut a[i * k + j];
                for (src, &coeff) in c[i].iter().zip(self.phi_dc.row(j)) {
                    f.region_madd(dst, src, coeff)?;
                }
            }
        }

        // Off-diagonal P and Q, stored as upper triangles (both symmetric).
        let tri = |i: usize, j: usize| -> usize {
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            lo * k + hi
        };
        let mut q = vec![Vec::new(); k * k];
        let mut pmat = vec![Vec::new(); k * k];
        for i in 0..k {
            for j in (i + 1)..k {
                let inv_l = self.offdiag_inv[i * k + j];
                let mut qij = vec![0u8; block_size];
                f.region_madd(&mut qij, &a[i * k + j], inv_l)?;
                f.region_madd(&mut qij, &a[j * k + i], inv_l)?;
                let mut pij = a[i * k + j].clone();
                f.region_madd(&mut pij, &qij, self.lambda_dc[i])?;
                q[tri(i, j)] = qij;
                pmat[tri(i, j)] = pij;
            }
        }

        // Column i of Q (rows j != i) solves to S2 phi_i^t; same for P/S1.
        let mut s1_cols = Vec::with_capacity(k);
        let mut s2_cols = Vec::with_capacity(k);
        for i in 0..k {
            let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
            let inv = &self.solve_inv[i];
            let mut col1 = vec![vec![0u8; block_size]; alpha];
            let mut col2 = vec![vec![0u8; block_size]; alpha];
            for (r, c1) in col1.iter_mut().enumerate() {
                for (m, &j) in others.iter().enumerate() {
                    f.region_madd(c1, &pmat[tri(j, i)], inv[(r, m)])?;
                }
            }
            for (r, c2) in col2.iter_mut().enumerate() {
                for (m, &j) in others.iter().enumerate() {
                    f.region_madd(c2, &q[tri(j, i)], inv[(r, m)])?;
                }
            }
            s1_cols.push(col1);
            s2_cols.push(col2);
        }

        // S = W * (Phi_R^t)^-1 with W's columns taken from the first alpha
        // DC positions.
        let assemble = |cols: &[Vec<Vec<u8>>]| -> Result<Vec<Vec<Vec<u8>>>> {
            let mut s = vec![vec![vec![0u8; block_size]; alpha]; alpha];
            for (r, srow) in s.iter_mut().enumerate() {
                for (cc, dst) in srow.iter_mut().enumerate() {
                    for (m, col) in cols.iter().take(alpha).enumerate() {
                        f.region_madd(dst, &col[r], self.assemble_inv[(m, cc)])?;
                    }
                }
            }
            Ok(s)
        };
        let s1 = assemble(&s1_cols)?;
        let s2 = assemble(&s2_cols)?;

        // Read X out through L: M rows 0..alpha are S1, the rest S2.
        let mut blocks: Vec<Option<Vec<u8>>> = vec![None; b];
        for lrow in 0..d {
            for col in 0..alpha {
                if let Some(idx) = self.l.block_at(lrow, col) {
                    if blocks[idx].is_none() {
                        let block = if lrow < alpha {
                            &s1[lrow][col]
                        } else {
                            &s2[lrow - alpha][col]
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

/// Precoder for systematic specific encoding: Z = decode(X read as the
/// shares of nodes 1..k), so that encoding Z places X verbatim on those
/// nodes.
pub struct MsrPrecoder {
    dec: MsrDecoder,
}

impl MsrPrecoder {
    pub fn new(cm: &CodeMatrices, l: &IndexMatrix) -> Result<MsrPrecoder> {
        let dc: Vec<usize> = (1..=cm.params.k).collect();
        let dec = MsrDecoder::new(cm, l, &dc).map_err(|e| match e {
            Error::ConstructionInvalid(msg) => Error::ConstructionInvalid(format!(
                "systematic precode infeasible over nodes 1..k: {msg}"
            )),
            other => other,
        })?;
        Ok(MsrPrecoder { dec })
    }

    pub fn precode(&self, x: &BlockVector) -> Result<BlockVector> {
        check_stripe_shape(x, self.dec.params.b, &self.dec.field)?;
        let alpha = self.dec.params.alpha;
        let rows: Vec<&[Vec<u8>]> = (0..self.dec.params.k)
            .map(|i| &x.blocks[i * alpha..(i + 1) * alpha])
            .collect();
        let mut z = self.dec.decode_rows(&rows, x.block_size)?;
        z.role = BlockRole::Precoded;
        Ok(z)
    }
}

/// One-shot MSR decode from exactly k shares.
pub fn decode_msr_specific(
    cm: &CodeMatrices,
    l: &IndexMatrix,
    shares: &[Share],
) -> Result<BlockVector> {
    let nodes: Vec<usize> = shares.iter().map(|s| s.node_index).collect();
    MsrDecoder::new(cm, l, &nodes)?.decode(shares)
}

/// One-shot precode; see [`MsrPrecoder`].
pub fn precode_systematic_specific(
    cm: &CodeMatrices,
    l: &IndexMatrix,
    x: &BlockVector,
) -> Result<BlockVector> {
    MsrPrecoder::new(cm, l)?.precode(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_specific;
    use crate::galois::Field;
    use crate::gfmatrix::Matrix;
    use crate::linearize::generator_from_pm;
    use crate::pm::{build_sparse, build_vanilla, CodeParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f8() -> Arc<Field> {
        Arc::new(Field::new(8).unwrap())
    }

    fn msr(k: usize) -> CodeParams {
        CodeParams::new(2 * k - 1, k, 2 * k - 2, Variant::Msr).unwrap()
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
        let f = f8();
        for cm in [
            build_vanilla(msr(3), &f).unwrap(),
            build_sparse(msr(3), &f).unwrap(),
        ] {
            let l = cm.index_matrix();
            let x = random_stripe(cm.params.b, 16, 5);
            let shares = encode_specific(&cm, &l, &x).unwrap();
            let n = cm.params.n;
            for a in 0..n {
                for b2 in (a + 1)..n {
                    for c in (b2 + 1)..n {
                        let subset = vec![shares[a].clone(), shares[b2].clone(), shares[c].clone()];
                        let got = decode_msr_specific(&cm, &l, &subset).unwrap();
                        assert_eq!(got.blocks, x.blocks, "nodes {a},{b2},{c}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_shares_decode_to_zero() {
        let f = f8();
        let cm = build_sparse(msr(4), &f).unwrap();
        let l = cm.index_matrix();
        let shares: Vec<Share> = (1..=4)
            .map(|node| Share {
                node_index: node,
                blocks: vec![vec![0u8; 8]; cm.params.alpha],
                stripe_id: 0,
            })
            .collect();
        let got = decode_msr_specific(&cm, &l, &shares).unwrap();
        assert!(got.blocks.iter().all(|b| b.iter().all(|&v| v == 0)));
    }

    #[test]
    fn duplicate_dc_node_rejected() {
        let f = f8();
        let cm = build_sparse(msr(3), &f).unwrap();
        let l = cm.index_matrix();
        assert!(matches!(
            MsrDecoder::new(&cm, &l, &[1, 1, 2]),
            Err(Error::ConstructionInvalid(_))
        ));
    }

    #[test]
    fn precode_places_data_on_first_k_nodes() {
        let f = f8();
        for cm in [
            build_vanilla(msr(3), &f).unwrap(),
            build_sparse(msr(4), &f).unwrap(),
        ] {
            let l = cm.index_matrix();
            let p = cm.params;
            let x = random_stripe(p.b, 16, 6);
            let z = precode_systematic_specific(&cm, &l, &x).unwrap();
            assert_eq!(z.role, BlockRole::Precoded);
            let shares = encode_specific(&cm, &l, &z).unwrap();
            for (i, share) in shares.iter().take(p.k).enumerate() {
                for j in 0..p.alpha {
                    assert_eq!(share.blocks[j], x.blocks[i * p.alpha + j]);
                }
            }
        }
    }

    #[test]
    fn systematic_decode_reads_back_the_prefix() {
        let f = f8();
        let cm = build_sparse(msr(4), &f).unwrap();
        let l = cm.index_matrix();
        let p = cm.params;
        let x = random_stripe(p.b, 16, 12);
        let z = precode_systematic_specific(&cm, &l, &x).unwrap();
        let shares = encode_specific(&cm, &l, &z).unwrap();

        // From the systematic nodes themselves, the decoded data equals the
        // concatenation of their blocks.
        let dc: Vec<usize> = (1..=p.k).collect();
        let dec = MsrDecoder::new(&cm, &l, &dc).unwrap();
        let got = dec.decode_systematic(&cm, &shares[..p.k]).unwrap();
        let mut prefix = Vec::new();
        for share in &shares[..p.k] {
            prefix.extend(share.blocks.iter().cloned());
        }
        assert_eq!(got.blocks, prefix);
        assert_eq!(got.blocks, x.blocks);

        // And from a survivor set that lost systematic nodes.
        let survivors: Vec<usize> = (p.n - p.k + 1..=p.n).collect();
        let dec = MsrDecoder::new(&cm, &l, &survivors).unwrap();
        let got = dec.decode_systematic(&cm, &shares[p.n - p.k..]).unwrap();
        assert_eq!(got.blocks, x.blocks);
    }

    #[test]
    fn precode_matches_linear_algebra_oracle() {
        // Z must equal Gtilde^-1 * X; check with single-symbol blocks so the
        // matrix product is directly comparable.
        let f = f8();
        let cm = build_sparse(msr(3), &f).unwrap();
        let l = cm.index_matrix();
        let p = cm.params;
        let gm = generator_from_pm(&cm, &l).unwrap();
        let top: Vec<usize> = (0..p.b).collect();
        let gtilde_inv = gm.g.select_rows(&top).unwrap().invert().unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<u16> = (0..p.b).map(|_| rng.gen_range(0..=255)).collect();
        let xm = Matrix::new(f.clone(), p.b, 1, xs.clone()).unwrap();
        let zm = gtilde_inv.mul(&xm).unwrap();

        let x =
            BlockVector::new(xs.iter().map(|&v| vec![v as u8]).collect(), BlockRole::Data).unwrap();
        let z = precode_systematic_specific(&cm, &l, &x).unwrap();
        for i in 0..p.b {
            assert_eq!(z.blocks[i][0] as u16, zm[(i, 0)]);
        }

        let zeros = BlockVector::zeros(p.b, 4, BlockRole::Data);
        let z0 = precode_systematic_specific(&cm, &l, &zeros).unwrap();
        assert!(z0.blocks.iter().all(|b| b.iter().all(|&v| v == 0)));
    }
}

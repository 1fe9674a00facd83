//! Indicative Reed-Solomon baseline: a systematic n x k generator derived
//! from a Vandermonde matrix, with one block per node. Included for
//! throughput ratio context in the benchmarks; it is not a reproduction of
//! any particular RS library.

use std::sync::Arc;

use pmrc::galois::Field;
use pmrc::gfmatrix::Matrix;
use pmrc::{Error, Result};

pub struct RsCode {
    pub n: usize,
    pub k: usize,
    field: Arc<Field>,
    /// n x k systematic generator (identity on top).
    g: Matrix,
}

impl RsCode {
    pub fn new(n: usize, k: usize, field: &Arc<Field>) -> Result<RsCode> {
        if k < 1 || n <= k {
            return Err(Error::InvalidParams(format!(
                "RS needs n > k >= 1, got n={n} k={k}"
            )));
        }
        if n as u32 > field.order() {
            return Err(Error::InvalidParams(format!(
                "field GF(2^{}) too small for n={n}",
                field.width()
            )));
        }
        let mut v = Matrix::zeros(field.clone(), n, k);
        for i in 0..n {
            for j in 0..k {
                v[(i, j)] = field.exp_g((i * j) as u64);
            }
        }
        let top: Vec<usize> = (0..k).collect();
        let g = v.mul(&v.select_rows(&top)?.invert()?)?;
        Ok(RsCode {
            n,
            k,
            field: field.clone(),
            g,
        })
    }

    /// Encodes k data blocks into n blocks (the first k verbatim).
    pub fn encode(&self, data: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
        if data.len() != self.k {
            return Err(Error::BlockCount {
                have: data.len(),
                need: self.k,
            });
        }
        let block_size = data[0].len();
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut block = vec![0u8; block_size];
            for (j, src) in data.iter().enumerate() {
                let coeff = self.g[(i, j)];
                if coeff == 0 {
                    continue;
                }
                self.field.region_madd(&mut block, src, coeff)?;
            }
            out.push(block);
        }
        Ok(out)
    }

    /// Row-selection + inversion for a survivor set (1-based nodes),
    /// systematic nodes first.
    pub fn decoder(&self, survivors: &[usize]) -> Result<RsDecoder> {
        let mut nodes: Vec<usize> = survivors.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() < self.k {
            return Err(Error::Unrecoverable {
                have: nodes.len(),
                need: self.k,
            });
        }
        let chosen: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|&x| x <= self.k)
            .chain(nodes.iter().copied().filter(|&x| x > self.k))
            .take(self.k)
            .collect();
        let rows: Vec<usize> = chosen.iter().map(|&x| x - 1).collect();
        let all_systematic = chosen.iter().all(|&x| x <= self.k);
        let inverse = if all_systematic {
            None
        } else {
            Some(self.g.select_rows(&rows)?.invert()?)
        };
        Ok(RsDecoder {
            field: self.field.clone(),
            nodes: chosen,
            inverse,
        })
    }

    /// Precomputed coefficients to rebuild one lost block from k survivors.
    pub fn repair_plan(&self, failed: usize, survivors: &[usize]) -> Result<RsRepair> {
        let dec = self.decoder(survivors)?;
        let row = self.g.select_rows(&[failed - 1])?;
        let coeffs = match &dec.inverse {
            None => row, // survivors are systematic in node order
            Some(inv) => row.mul(inv)?,
        };
        Ok(RsRepair {
            field: self.field.clone(),
            nodes: dec.nodes,
            coeffs,
        })
    }
}

pub struct RsDecoder {
    field: Arc<Field>,
    /// The k source nodes, in selection order.
    pub nodes: Vec<usize>,
    inverse: Option<Matrix>,
}

impl RsDecoder {
    /// `blocks[i]` must be the block of `self.nodes[i]`.
    pub fn decode(&self, blocks: &[&[u8]]) -> Result<Vec<Vec<u8>>> {
        let k = self.nodes.len();
        if blocks.len() != k {
            return Err(Error::BlockCount {
                have: blocks.len(),
                need: k,
            });
        }
        match &self.inverse {
            None => Ok(blocks.iter().map(|b| b.to_vec()).collect()),
            Some(inv) => {
                let mut out = Vec::with_capacity(k);
                for w in 0..k {
                    let mut block = vec![0u8; blocks[0].len()];
                    for (j, src) in blocks.iter().enumerate() {
                        let coeff = inv[(w, j)];
                        if coeff == 0 {
                            continue;
                        }
                        self.field.region_madd(&mut block, src, coeff)?;
                    }
                    out.push(block);
                }
                Ok(out)
            }
        }
    }
}

pub struct RsRepair {
    field: Arc<Field>,
    pub nodes: Vec<usize>,
    /// 1 x k combined coefficients.
    coeffs: Matrix,
}

impl RsRepair {
    pub fn rebuild(&self, blocks: &[&[u8]]) -> Result<Vec<u8>> {
        if blocks.len() != self.nodes.len() {
            return Err(Error::BlockCount {
                have: blocks.len(),
                need: self.nodes.len(),
            });
        }
        let mut out = vec![0u8; blocks[0].len()];
        for (j, src) in blocks.iter().enumerate() {
            let coeff = self.coeffs[(0, j)];
            if coeff == 0 {
                continue;
            }
            self.field.region_madd(&mut out, src, coeff)?;
        }
        Ok(out)
    }
}

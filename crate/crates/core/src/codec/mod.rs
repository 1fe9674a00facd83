//! Data-path operations: specific (Psi*M) and linear (G*X) encoding,
//! systematic precoding, lazy linear decoding, the MSR/MBR specific
//! decoders, and single-node repair with read-cost accounting.
//!
//! Matrix inversions happen in the constructors of the *Decoder / *Context
//! types so they can be reused across stripes; the per-stripe calls perform
//! region arithmetic only.

mod linear;
mod mbr;
mod msr;
mod repair;

pub use linear::{decode_linear, LinearDecoder};
pub use mbr::{decode_mbr_specific, MbrDecoder};
pub use msr::{decode_msr_specific, precode_systematic_specific, MsrDecoder, MsrPrecoder};
pub use repair::{
    repair_collect, repair_helper, repair_read_cost, RepairContext, RepairPlan, RepairReadCost,
    RepairSymbol,
};

use crate::galois::Field;
use crate::linearize::GeneratorMatrix;
use crate::pm::{CodeMatrices, IndexMatrix};
use crate::{Error, Result};

/// What a block vector holds: original data X, precoded data Z, or encoded
/// symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRole {
    Data,
    Precoded,
    Encoded,
}

/// An ordered list of equal-length byte blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockVector {
    pub blocks: Vec<Vec<u8>>,
    pub block_size: usize,
    pub role: BlockRole,
}

impl BlockVector {
    pub fn new(blocks: Vec<Vec<u8>>, role: BlockRole) -> Result<BlockVector> {
        let block_size = blocks
            .first()
            .map(|b| b.len())
            .ok_or(Error::BlockCount { have: 0, need: 1 })?;
        if let Some(bad) = blocks.iter().find(|b| b.len() != block_size) {
            return Err(Error::BadBlockSize {
                size: bad.len(),
                reason: format!("blocks must all be {block_size} bytes"),
            });
        }
        Ok(BlockVector {
            blocks,
            block_size,
            role,
        })
    }

    pub fn zeros(count: usize, block_size: usize, role: BlockRole) -> BlockVector {
        BlockVector {
            blocks: vec![vec![0u8; block_size]; count],
            block_size,
            role,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// The alpha blocks a node stores for one stripe. Node indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    pub node_index: usize,
    pub blocks: Vec<Vec<u8>>,
    pub stripe_id: u64,
}

/// The d x alpha message matrix M: cell (i,j) references data block
/// L[i][j], structural zeros reference nothing.
pub struct MessageMatrix<'a> {
    rows: usize,
    cols: usize,
    cells: Vec<Option<&'a [u8]>>,
}

impl<'a> MessageMatrix<'a> {
    pub fn build(l: &IndexMatrix, x: &'a BlockVector) -> Result<MessageMatrix<'a>> {
        let mut cells = Vec::with_capacity(l.rows() * l.cols());
        for r in 0..l.rows() {
            for c in 0..l.cols() {
                match l.block_at(r, c) {
                    None => cells.push(None),
                    Some(idx) => {
                        let block = x.blocks.get(idx).ok_or(Error::BlockCount {
                            have: x.len(),
                            need: idx + 1,
                        })?;
                        cells.push(Some(block.as_slice()));
                    }
                }
            }
        }
        Ok(MessageMatrix {
            rows: l.rows(),
            cols: l.cols(),
            cells,
        })
    }

    pub fn cell(&self, r: usize, c: usize) -> Option<&'a [u8]> {
        debug_assert!(r < self.rows && c < self.cols);
        self.cells[r * self.cols + c]
    }
}

fn check_stripe_shape(x: &BlockVector, b: usize, field: &Field) -> Result<()> {
    if x.len() != b {
        return Err(Error::BlockCount {
            have: x.len(),
            need: b,
        });
    }
    if x.block_size == 0 || !x.block_size.is_multiple_of(field.symbol_bytes()) {
        return Err(Error::BadBlockSize {
            size: x.block_size,
            reason: format!(
                "must be a positive multiple of the {}-byte symbol",
                field.symbol_bytes()
            ),
        });
    }
    Ok(())
}

/// C = Psi * M: share i holds row i of C. Multiplications by zero Psi
/// entries and structural-zero cells are skipped.
pub fn encode_specific(cm: &CodeMatrices, l: &IndexMatrix, x: &BlockVector) -> Result<Vec<Share>> {
    let nodes: Vec<usize> = (1..=cm.params.n).collect();
    encode_specific_nodes(cm, l, x, &nodes)
}

/// Specific encoding restricted to the given 1-based nodes, e.g. just the
/// systematic prefix when the rest is already on disk.
pub fn encode_specific_nodes(
    cm: &CodeMatrices,
    l: &IndexMatrix,
    x: &BlockVector,
    nodes: &[usize],
) -> Result<Vec<Share>> {
    let p = cm.params;
    check_stripe_shape(x, p.b, &cm.field)?;
    let m = MessageMatrix::build(l, x)?;
    let mut shares = Vec::with_capacity(nodes.len());
    for &node in nodes {
        if node == 0 || node > p.n {
            return Err(Error::RowOutOfRange {
                index: node,
                rows: p.n,
            });
        }
        let i = node - 1;
        let mut blocks = Vec::with_capacity(p.alpha);
        for j in 0..p.alpha {
            let mut out = vec![0u8; x.block_size];
            for lrow in 0..p.d {
                let coeff = cm.psi[(i, lrow)];
                if coeff == 0 {
                    continue;
                }
                if let Some(src) = m.cell(lrow, j) {
                    cm.field.region_madd(&mut out, src, coeff)?;
                }
            }
            blocks.push(out);
        }
        shares.push(Share {
            node_index: node,
            blocks,
            stripe_id: 0,
        });
    }
    Ok(shares)
}

/// Y = G * X, skipping zero generator entries, reshaped into n shares of
/// alpha blocks each.
pub fn encode_linear(gm: &GeneratorMatrix, x: &BlockVector) -> Result<Vec<Share>> {
    let p = gm.params;
    let field = gm.g.field().clone();
    check_stripe_shape(x, p.b, &field)?;
    let mut shares = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let mut blocks = Vec::with_capacity(p.alpha);
        for j in 0..p.alpha {
            let mut out = vec![0u8; x.block_size];
            for (col, &coeff) in gm.g.row(i * p.alpha + j).iter().enumerate() {
                if coeff == 0 {
                    continue;
                }
                field.region_madd(&mut out, &x.blocks[col], coeff)?;
            }
            blocks.push(out);
        }
        shares.push(Share {
            node_index: i + 1,
            blocks,
            stripe_id: 0,
        });
    }
    Ok(shares)
}

/// Orders `shares` to match `nodes` (1-based), requiring an exact set match.
fn arrange_shares<'a>(shares: &'a [Share], nodes: &[usize]) -> Result<Vec<&'a Share>> {
    if shares.len() != nodes.len() {
        return Err(Error::BlockCount {
            have: shares.len(),
            need: nodes.len(),
        });
    }
    let mut picked = Vec::with_capacity(nodes.len());
    for &node in nodes {
        let mut found = None;
        for s in shares {
            if s.node_index == node {
                if found.is_some() {
                    return Err(Error::ConstructionInvalid(format!(
                        "duplicate share for node {node}"
                    )));
                }
                found = Some(s);
            }
        }
        picked.push(
            found.ok_or_else(|| {
                Error::ConstructionInvalid(format!("missing share for node {node}"))
            })?,
        );
    }
    Ok(picked)
}

/// Uniform block size across shares, with per-share block-count checks.
fn share_block_size(shares: &[&Share], alpha: usize) -> Result<usize> {
    let mut size = None;
    for s in shares {
        if s.blocks.len() != alpha {
            return Err(Error::BlockCount {
                have: s.blocks.len(),
                need: alpha,
            });
        }
        for b in &s.blocks {
            match size {
                None => size = Some(b.len()),
                Some(sz) if sz != b.len() => {
                    return Err(Error::BadBlockSize {
                        size: b.len(),
                        reason: format!("share blocks must all be {sz} bytes"),
                    })
                }
                _ => {}
            }
        }
    }
    size.ok_or(Error::BlockCount { have: 0, need: 1 })
}

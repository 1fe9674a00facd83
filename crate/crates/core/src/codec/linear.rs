//! Generic lazy decoding through the generator matrix: pick B independent
//! rows from the surviving symbols (data-verbatim rows first), invert once,
//! then compute only the requested blocks.

use crate::galois::Elem;
use crate::gfmatrix::Matrix;
use crate::linearize::GeneratorMatrix;
use crate::{Error, Result};

use super::{share_block_size, BlockRole, BlockVector, Share};

/// Row-selection plus inversion for one erasure pattern. Build once per
/// (pattern, code) and reuse across stripes.
pub struct LinearDecoder {
    params: crate::pm::CodeParams,
    field: std::sync::Arc<crate::galois::Field>,
    /// Selected source symbols as (1-based node, symbol-within-share).
    rows: Vec<(usize, usize)>,
    /// None when the selected rows are verbatim-data rows; decoding is then
    /// a pure copy.
    inverse: Option<Matrix>,
    /// For the copy path: block w comes from `rows[identity_source[w]]`.
    identity_source: Vec<usize>,
}

impl LinearDecoder {
    /// Greedy selection over the symbols of `available` nodes: rows that
    /// carry a data block verbatim first, then parity rows in node order,
    /// dropping rows dependent on those already taken.
    pub fn new(gm: &GeneratorMatrix, available: &[usize]) -> Result<LinearDecoder> {
        let p = gm.params;
        let field = gm.g.field().clone();
        let mut nodes: Vec<usize> = available.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.first().is_some_and(|&n| n == 0) || nodes.last().is_some_and(|&n| n > p.n) {
            return Err(Error::RowOutOfRange {
                index: *nodes.last().unwrap(),
                rows: p.n,
            });
        }

        let is_unit = |row: &[Elem]| {
            let mut nz = row.iter().filter(|&&v| v != 0);
            matches!((nz.next(), nz.next()), (Some(&1), None))
        };

        let mut candidates: Vec<(usize, usize, usize)> = Vec::new(); // (node, sym, g-row)
        for &node in &nodes {
            for sym in 0..p.alpha {
                candidates.push((node, sym, (node - 1) * p.alpha + sym));
            }
        }
        // Verbatim-data rows first, each group in (node, sym) order.
        candidates.sort_by_key(|&(node, sym, row)| (!is_unit(gm.g.row(row)), node, sym));

        let b = p.b;
        let mut rows = Vec::with_capacity(b);
        let mut selected_rows: Vec<usize> = Vec::with_capacity(b);
        // Reduced echelon rows with their pivot columns, for the greedy
        // independence check.
        let mut pivots: Vec<(usize, Vec<Elem>)> = Vec::with_capacity(b);
        for (node, sym, grow) in candidates {
            if rows.len() == b {
                break;
            }
            let mut cand = gm.g.row(grow).to_vec();
            for (pc, prow) in &pivots {
                let factor = cand[*pc];
                if factor == 0 {
                    continue;
                }
                for (cv, pv) in cand.iter_mut().zip(prow.iter()) {
                    *cv ^= field.mul(factor, *pv);
                }
            }
            let Some(pivot_col) = cand.iter().position(|&v| v != 0) else {
                continue; // dependent on rows already taken
            };
            let scale = field.inv(cand[pivot_col])?;
            for v in &mut cand {
                *v = field.mul(*v, scale);
            }
            pivots.push((pivot_col, cand));
            rows.push((node, sym));
            selected_rows.push(grow);
        }
        if rows.len() < b {
            return Err(Error::Unrecoverable {
                have: rows.len(),
                need: b,
            });
        }

        // Copy path: every selected row is a unit row, so the submatrix is a
        // permutation and no arithmetic is needed.
        let mut identity_source = vec![usize::MAX; b];
        let mut all_units = true;
        for (pos, &grow) in selected_rows.iter().enumerate() {
            let row = gm.g.row(grow);
            if !is_unit(row) {
                all_units = false;
                break;
            }
            let col = row.iter().position(|&v| v != 0).unwrap();
            identity_source[col] = pos;
        }
        let inverse = if all_units {
            None
        } else {
            let sub = gm.g.select_rows(&selected_rows)?;
            Some(sub.invert().map_err(|e| match e {
                // The greedy check guarantees independence; a singular
                // submatrix here would be a logic error.
                Error::Singular { column } => Error::ConstructionInvalid(format!(
                    "selected rows unexpectedly singular at column {column}"
                )),
                other => other,
            })?)
        };

        Ok(LinearDecoder {
            params: p,
            field,
            rows,
            inverse,
            identity_source,
        })
    }

    /// Nodes whose shares `decode` needs.
    pub fn required_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.rows.iter().map(|&(n, _)| n).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    pub fn is_copy_only(&self) -> bool {
        self.inverse.is_none()
    }

    /// Decodes the requested blocks (0-based indices), in request order.
    pub fn decode_blocks(&self, shares: &[Share], wanted: &[usize]) -> Result<Vec<Vec<u8>>> {
        let p = self.params;
        let mut by_node: Vec<Option<&Share>> = vec![None; p.n + 1];
        for s in shares {
            if s.node_index == 0 || s.node_index > p.n {
                return Err(Error::RowOutOfRange {
                    index: s.node_index,
                    rows: p.n,
                });
            }
            by_node[s.node_index] = Some(s);
        }
        let mut sources: Vec<&Share> = Vec::with_capacity(self.rows.len());
        for &(node, _) in &self.rows {
            sources.push(by_node[node].ok_or_else(|| {
                Error::ConstructionInvalid(format!("missing share for node {node}"))
            })?);
        }
        let block_size = share_block_size(&sources, p.alpha)?;

        let symbol = |pos: usize| -> &[u8] {
            let (node, sym) = self.rows[pos];
            &by_node[node].unwrap().blocks[sym]
        };

        if let Some(&bad) = wanted.iter().find(|&&w| w >= p.b) {
            return Err(Error::RowOutOfRange {
                index: bad,
                rows: p.b,
            });
        }

        let mut out = Vec::with_capacity(wanted.len());
        match &self.inverse {
            None => {
                for &w in wanted {
                    out.push(symbol(self.identity_source[w]).to_vec());
                }
            }
            Some(inv) => {
                for &w in wanted {
                    let mut block = vec![0u8; block_size];
                    for (j, &coeff) in inv.row(w).iter().enumerate() {
                        if coeff == 0 {
                            continue;
                        }
                        self.field.region_madd(&mut block, symbol(j), coeff)?;
                    }
                    out.push(block);
                }
            }
        }
        Ok(out)
    }

    pub fn decode_all(&self, shares: &[Share]) -> Result<BlockVector> {
        let wanted: Vec<usize> = (0..self.params.b).collect();
        let blocks = self.decode_blocks(shares, &wanted)?;
        BlockVector::new(blocks, BlockRole::Data)
    }
}

/// One-shot decode from whatever shares are at hand. `wanted = None` decodes
/// everything.
pub fn decode_linear(
    gm: &GeneratorMatrix,
    shares: &[Share],
    wanted: Option<&[usize]>,
) -> Result<BlockVector> {
    let nodes: Vec<usize> = shares.iter().map(|s| s.node_index).collect();
    let dec = LinearDecoder::new(gm, &nodes)?;
    match wanted {
        None => dec.decode_all(shares),
        Some(w) => {
            let blocks = dec.decode_blocks(shares, w)?;
            BlockVector::new(blocks, BlockRole::Data)
        }
    }
}

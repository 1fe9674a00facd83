//! Single-node repair: helpers each contribute one block (the dot product
//! of their share with the repair vector mu), the collector solves the
//! helper submatrix once and rebuilds the lost share exactly.
//!
//! mu is the failed node's Phi row for MSR and its Psi row for MBR. Helpers
//! skip blocks multiplied by zero coefficients, which is where the sparse
//! construction saves disk reads.

use std::sync::Arc;

use crate::galois::{Elem, Field};
use crate::gfmatrix::Matrix;
use crate::pm::{CodeMatrices, CodeParams, Variant};
use crate::{Error, Result};

use super::Share;

/// Who repairs what: the failed node, the d helpers, and the coefficient
/// vector helpers apply to their blocks.
#[derive(Debug, Clone)]
pub struct RepairPlan {
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub mu: Vec<Elem>,
    /// Blocks each helper reads: the number of nonzero mu entries.
    pub reads_per_helper: usize,
    field: Arc<Field>,
}

impl RepairPlan {
    /// Plans repair of `failed` (1-based). With `helpers = None` the d
    /// lowest-indexed surviving nodes are used.
    pub fn new(cm: &CodeMatrices, failed: usize, helpers: Option<&[usize]>) -> Result<RepairPlan> {
        let p = cm.params;
        if failed == 0 || failed > p.n {
            return Err(Error::RowOutOfRange {
                index: failed,
                rows: p.n,
            });
        }
        let helpers: Vec<usize> = match helpers {
            Some(h) => {
                if h.len() != p.d {
                    return Err(Error::BadRepairPlan(format!(
                        "{} helpers given, repair degree is {}",
                        h.len(),
                        p.d
                    )));
                }
                let mut seen = vec![false; p.n + 1];
                for &node in h {
                    if node == 0 || node > p.n {
                        return Err(Error::RowOutOfRange {
                            index: node,
                            rows: p.n,
                        });
                    }
                    if node == failed {
                        return Err(Error::BadRepairPlan(format!(
                            "failed node {node} cannot help repair itself"
                        )));
                    }
                    if seen[node] {
                        return Err(Error::BadRepairPlan(format!("duplicate helper {node}")));
                    }
                    seen[node] = true;
                }
                h.to_vec()
            }
            None => (1..=p.n).filter(|&node| node != failed).take(p.d).collect(),
        };
        let mu = repair_vector(cm, failed);
        let reads_per_helper = mu.iter().filter(|&&c| c != 0).count();
        Ok(RepairPlan {
            failed,
            helpers,
            mu,
            reads_per_helper,
            field: cm.field.clone(),
        })
    }
}

fn repair_vector(cm: &CodeMatrices, failed: usize) -> Vec<Elem> {
    match cm.params.variant {
        Variant::Msr => cm.phi().row(failed - 1).to_vec(),
        Variant::Mbr => cm.psi.row(failed - 1).to_vec(),
    }
}

/// One helper's contribution plus how many of its blocks it had to read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairSymbol {
    pub node_index: usize,
    pub block: Vec<u8>,
    pub blocks_read: usize,
}

/// Computes a helper's repair symbol: the dot product of its blocks with
/// mu, touching only blocks with nonzero coefficients.
pub fn repair_helper(share: &Share, plan: &RepairPlan) -> Result<RepairSymbol> {
    if !plan.helpers.contains(&share.node_index) {
        return Err(Error::BadRepairPlan(format!(
            "node {} is not a helper in this plan",
            share.node_index
        )));
    }
    if share.blocks.len() != plan.mu.len() {
        return Err(Error::BlockCount {
            have: share.blocks.len(),
            need: plan.mu.len(),
        });
    }
    let block_size = share.blocks.first().map(|b| b.len()).unwrap_or(0);
    let mut block = vec![0u8; block_size];
    let mut blocks_read = 0;
    for (src, &coeff) in share.blocks.iter().zip(plan.mu.iter()) {
        if coeff == 0 {
            continue;
        }
        blocks_read += 1;
        plan.field.region_madd(&mut block, src, coeff)?;
    }
    debug_assert_eq!(blocks_read, plan.reads_per_helper);
    Ok(RepairSymbol {
        node_index: share.node_index,
        block,
        blocks_read,
    })
}

/// Collector state for one (failure, helper-set) pattern: the d x d helper
/// submatrix inverse, reusable across stripes.
pub struct RepairContext {
    plan: RepairPlan,
    params: CodeParams,
    field: Arc<Field>,
    psi_helpers_inv: Matrix,
    lambda_failed: Option<Elem>,
}

impl RepairContext {
    pub fn new(cm: &CodeMatrices, plan: RepairPlan) -> Result<RepairContext> {
        let rows: Vec<usize> = plan.helpers.iter().map(|&h| h - 1).collect();
        let psi_helpers = cm.psi.select_rows(&rows)?;
        let psi_helpers_inv = psi_helpers.invert().map_err(|e| match e {
            Error::Singular { .. } => Error::ConstructionInvalid(format!(
                "helper submatrix for nodes {:?} is singular",
                plan.helpers
            )),
            other => other,
        })?;
        let lambda_failed = match cm.params.variant {
            Variant::Msr => Some(
                cm.lambda_of(plan.failed)
                    .ok_or_else(|| Error::ConstructionInvalid("MSR code lacks Lambda".into()))?,
            ),
            Variant::Mbr => None,
        };
        Ok(RepairContext {
            plan,
            params: cm.params,
            field: cm.field.clone(),
            psi_helpers_inv,
            lambda_failed,
        })
    }

    pub fn plan(&self) -> &RepairPlan {
        &self.plan
    }

    /// Rebuilds the failed node's share from the d helper symbols. Solves
    /// Psi_helpers * z = symbols; for MSR the regenerated blocks are
    /// z[0..alpha] + lambda_f * z[alpha..d], for MBR z itself (M symmetric).
    pub fn collect(&self, symbols: &[RepairSymbol]) -> Result<Share> {
        let p = self.params;
        if symbols.len() != p.d {
            return Err(Error::BlockCount {
                have: symbols.len(),
                need: p.d,
            });
        }
        let mut ordered: Vec<&RepairSymbol> = Vec::with_capacity(p.d);
        for &node in &self.plan.helpers {
            let sym = symbols
                .iter()
                .find(|s| s.node_index == node)
                .ok_or_else(|| {
                    Error::BadRepairPlan(format!("missing repair symbol from node {node}"))
                })?;
            ordered.push(sym);
        }
        let block_size = ordered[0].block.len();
        if ordered.iter().any(|s| s.block.len() != block_size) {
            return Err(Error::BadBlockSize {
                size: block_size,
                reason: "repair symbols differ in length".into(),
            });
        }

        let f = &self.field;
        let mut z = vec![vec![0u8; block_size]; p.d];
        for (i, zi) in z.iter_mut().enumerate() {
            for (j, sym) in ordered.iter().enumerate() {
                f.region_madd(zi, &sym.block, self.psi_helpers_inv[(i, j)])?;
            }
        }

        let blocks = match p.variant {
            Variant::Msr => {
                let lam = self.lambda_failed.expect("set for MSR in new()");
                let (front, back) = z.split_at_mut(p.alpha);
                for (dst, src) in front.iter_mut().zip(back.iter()) {
                    f.region_madd(dst, src, lam)?;
                }
                z.truncate(p.alpha);
                z
            }
            Variant::Mbr => z,
        };
        Ok(Share {
            node_index: self.plan.failed,
            blocks,
            stripe_id: 0,
        })
    }
}

/// One-shot collection; see [`RepairContext`].
pub fn repair_collect(
    cm: &CodeMatrices,
    plan: &RepairPlan,
    symbols: &[RepairSymbol],
) -> Result<Share> {
    RepairContext::new(cm, plan.clone())?.collect(symbols)
}

/// Read-cost accounting for one failure, plus fleet-wide average reductions
/// computed from per-failure counts: `reduction_paper` divides the summed
/// per-failure savings by d, `reduction_fleet` by n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairReadCost {
    pub failed: usize,
    pub reads_per_helper: usize,
    /// Blocks each helper stores (alpha).
    pub helper_blocks: usize,
    pub reduction_paper: f64,
    pub reduction_fleet: f64,
}

pub fn repair_read_cost(cm: &CodeMatrices, failed: usize) -> Result<RepairReadCost> {
    let p = cm.params;
    if failed == 0 || failed > p.n {
        return Err(Error::RowOutOfRange {
            index: failed,
            rows: p.n,
        });
    }
    let nnz = |node: usize| repair_vector(cm, node).iter().filter(|&&c| c != 0).count();
    let alpha = p.alpha as f64;
    let total_saving: f64 = (1..=p.n)
        .map(|node| (alpha - nnz(node) as f64) / alpha)
        .sum();
    Ok(RepairReadCost {
        failed,
        reads_per_helper: nnz(failed),
        helper_blocks: p.alpha,
        reduction_paper: total_saving / p.d as f64,
        reduction_fleet: total_saving / p.n as f64,
    })
}

//! Turning a product-matrix code (Psi, L) into an equivalent linear code
//! with an explicit generator matrix, plus the systematic transform
//! G' = G * Gtilde^-1 and sparsity measurement.

use crate::gfmatrix::Matrix;
use crate::pm::{CodeMatrices, CodeParams, IndexMatrix};
use crate::{Error, Result};

/// An n*alpha x B generator matrix. Encoded symbol alpha(i-1)+j of node i is
/// the dot product of row alpha(i-1)+j with the data vector.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub g: Matrix,
    pub systematic: bool,
    pub params: CodeParams,
}

impl GeneratorMatrix {
    /// Row index holding symbol `sym` (0-based) of 1-based node `node`.
    pub fn row_of(&self, node: usize, sym: usize) -> usize {
        (node - 1) * self.params.alpha + sym
    }
}

/// Scatters Psi through L: G[alpha(i-1)+j, l'] = Psi[i, l] where l' = L[l, j],
/// all other entries zero. Structural-zero cells of L contribute nothing.
pub fn generator_from_pm(cm: &CodeMatrices, l: &IndexMatrix) -> Result<GeneratorMatrix> {
    let p = cm.params;
    if cm.psi.rows() != p.n || cm.psi.cols() != p.d {
        return Err(Error::Dimension(format!(
            "Psi is {}x{}, expected {}x{}",
            cm.psi.rows(),
            cm.psi.cols(),
            p.n,
            p.d
        )));
    }
    if l.rows() != p.d || l.cols() != p.alpha {
        return Err(Error::Dimension(format!(
            "index matrix is {}x{}, expected {}x{}",
            l.rows(),
            l.cols(),
            p.d,
            p.alpha
        )));
    }
    let mut g = Matrix::zeros(cm.field.clone(), p.n * p.alpha, p.b);
    for i in 0..p.n {
        for j in 0..p.alpha {
            let row = i * p.alpha + j;
            for lrow in 0..p.d {
                if let Some(block) = l.block_at(lrow, j) {
                    g[(row, block)] = cm.psi[(i, lrow)];
                }
            }
        }
    }
    Ok(GeneratorMatrix {
        g,
        systematic: false,
        params: p,
    })
}

/// G' = G * Gtilde^-1 where Gtilde is the top B rows. The result has the
/// identity on top, so the first B encoded symbols equal the data.
pub fn systematize(gm: &GeneratorMatrix) -> Result<GeneratorMatrix> {
    if gm.systematic {
        return Ok(gm.clone());
    }
    let b = gm.params.b;
    let top: Vec<usize> = (0..b).collect();
    let gtilde = gm.g.select_rows(&top)?;
    let inv = gtilde.invert().map_err(|e| match e {
        Error::Singular { column } => Error::ConstructionInvalid(format!(
            "top {b} rows of G are singular (pivot column {column}); no systematic form"
        )),
        other => other,
    })?;
    let g = gm.g.mul(&inv)?;
    Ok(GeneratorMatrix {
        g,
        systematic: true,
        params: gm.params,
    })
}

/// Zero counts behind a sparsity figure. The percentage is reported
/// truncated toward zero; the exact counts stay available for tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sparsity {
    pub zeros: usize,
    pub entries: usize,
}

impl Sparsity {
    pub fn percent_truncated(&self) -> u32 {
        (self.zeros * 100).checked_div(self.entries).unwrap_or(0) as u32
    }

    pub fn fraction(&self) -> f64 {
        if self.entries == 0 {
            0.0
        } else {
            self.zeros as f64 / self.entries as f64
        }
    }
}

/// Fraction of zeros in the generator: over all of G when non-systematic,
/// over the parity part G'' (rows B..n*alpha) when systematic.
pub fn sparsity(gm: &GeneratorMatrix) -> Sparsity {
    let start_row = if gm.systematic { gm.params.b } else { 0 };
    let rows = gm.g.rows();
    let cols = gm.g.cols();
    let mut zeros = 0;
    for r in start_row..rows {
        zeros += gm.g.row(r).iter().filter(|&&v| v == 0).count();
    }
    Sparsity {
        zeros,
        entries: (rows - start_row) * cols,
    }
}

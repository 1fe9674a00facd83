//! Product-matrix code definitions: parameters, the message-matrix index
//! layout L, the Vandermonde ("vanilla") and identity+Cauchy ("sparse")
//! encoding matrices, and computational validation of the construction
//! constraints.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::galois::{Elem, Field};
use crate::gfmatrix::Matrix;
use crate::{Error, Result};

/// Subset families larger than this are not enumerated exhaustively.
pub const EXHAUSTIVE_SUBSET_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Msr,
    Mbr,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Msr => "msr",
            Variant::Mbr => "mbr",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "msr" | "MSR" => Ok(Variant::Msr),
            "mbr" | "MBR" => Ok(Variant::Mbr),
            _ => Err(Error::Parse(format!("unknown variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Vanilla,
    Sparse,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Vanilla => "vanilla",
            Construction::Sparse => "sparse",
        }
    }

    pub fn parse(s: &str) -> Result<Construction> {
        match s {
            "vanilla" => Ok(Construction::Vanilla),
            "sparse" => Ok(Construction::Sparse),
            _ => Err(Error::Parse(format!("unknown construction {s:?}"))),
        }
    }
}

/// Code parameters with the derived per-node block count `alpha` and
/// per-stripe data block count `b`.
///
/// MSR: d = 2k-2, alpha = k-1, b = k*alpha. MBR: k <= d < n, alpha = d,
/// b = k(2d-k+1)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub variant: Variant,
    pub alpha: usize,
    pub b: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d: usize, variant: Variant) -> Result<CodeParams> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("k={k} must be at least 2")));
        }
        if d < k {
            return Err(Error::InvalidParams(format!(
                "d={d} must be at least k={k}"
            )));
        }
        if n <= d {
            return Err(Error::InvalidParams(format!("n={n} must exceed d={d}")));
        }
        let (alpha, b) = match variant {
            Variant::Msr => {
                if d != 2 * k - 2 {
                    return Err(Error::InvalidParams(format!(
                        "MSR requires d = 2k-2 = {} (got d={d}; shortening unsupported)",
                        2 * k - 2
                    )));
                }
                let alpha = d - k + 1;
                (alpha, k * alpha)
            }
            Variant::Mbr => {
                // k(2d-k+1) is always even.
                (d, k * (2 * d - k + 1) / 2)
            }
        };
        Ok(CodeParams {
            n,
            k,
            d,
            variant,
            alpha,
            b,
        })
    }

    /// Width of the Phi block of Psi: alpha for MSR, k for MBR.
    pub fn phi_cols(&self) -> usize {
        match self.variant {
            Variant::Msr => self.alpha,
            Variant::Mbr => self.k,
        }
    }
}

/// The d x alpha index grid L mapping message-matrix cells to data blocks.
/// Entries are 1-based block numbers; 0 is the structural-zero sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl IndexMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    /// 0-based data-block index at a cell, or None for a structural zero.
    pub fn block_at(&self, r: usize, c: usize) -> Option<usize> {
        match self.get(r, c) {
            0 => None,
            v => Some(v as usize - 1),
        }
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// MSR layout: two stacked alpha x alpha symmetric blocks. The first
    /// holds 1..alpha(alpha+1)/2 (upper triangle filled row-major, then
    /// mirrored), the second the next alpha(alpha+1)/2 values.
    pub fn msr(params: &CodeParams) -> Result<IndexMatrix> {
        if params.variant != Variant::Msr {
            return Err(Error::WrongVariant {
                expected: Variant::Msr,
            });
        }
        let alpha = params.alpha;
        let mut entries = vec![0u32; 2 * alpha * alpha];
        let mut next = 1u32;
        for block in 0..2 {
            let base = block * alpha * alpha;
            for r in 0..alpha {
                for c in r..alpha {
                    entries[base + r * alpha + c] = next;
                    entries[base + c * alpha + r] = next;
                    next += 1;
                }
            }
        }
        Ok(IndexMatrix {
            rows: 2 * alpha,
            cols: alpha,
            entries,
        })
    }

    /// MBR layout: d x d grid [[S, T], [T^t, 0]] with S a k x k symmetric
    /// block holding 1..k(k+1)/2 and T holding the remaining values
    /// row-major.
    pub fn mbr(params: &CodeParams) -> Result<IndexMatrix> {
        if params.variant != Variant::Mbr {
            return Err(Error::WrongVariant {
                expected: Variant::Mbr,
            });
        }
        let (k, d) = (params.k, params.d);
        let mut entries = vec![0u32; d * d];
        let mut next = 1u32;
        for r in 0..k {
            for c in r..k {
                entries[r * d + c] = next;
                entries[c * d + r] = next;
                next += 1;
            }
        }
        for r in 0..k {
            for c in k..d {
                entries[r * d + c] = next;
                entries[c * d + r] = next;
                next += 1;
            }
        }
        Ok(IndexMatrix {
            rows: d,
            cols: d,
            entries,
        })
    }

    pub fn for_params(params: &CodeParams) -> IndexMatrix {
        match params.variant {
            Variant::Msr => IndexMatrix::msr(params).expect("params carry the MSR variant"),
            Variant::Mbr => IndexMatrix::mbr(params).expect("params carry the MBR variant"),
        }
    }

    /// Checks the layout invariants the decoders rely on: per-variant
    /// symmetry structure, sentinel placement, and full coverage of 1..B.
    pub fn validate(&self, params: &CodeParams) -> Result<()> {
        let (d, alpha, b, k) = (params.d, params.alpha, params.b, params.k);
        if self.rows != d || self.cols != alpha {
            return Err(Error::Parse(format!(
                "index matrix is {}x{}, expected {d}x{alpha}",
                self.rows, self.cols
            )));
        }
        let mut seen = vec![false; b + 1];
        for &v in &self.entries {
            if v as usize > b {
                return Err(Error::Parse(format!("index value {v} exceeds B={b}")));
            }
            if v > 0 {
                seen[v as usize] = true;
            }
        }
        if let Some(missing) = (1..=b).find(|&v| !seen[v]) {
            return Err(Error::Parse(format!(
                "index matrix never maps block {missing}"
            )));
        }
        match params.variant {
            Variant::Msr => {
                for r in 0..d {
                    for c in 0..alpha {
                        if self.get(r, c) == 0 {
                            return Err(Error::Parse(
                                "MSR index matrix must not contain the zero sentinel".into(),
                            ));
                        }
                        // Each stacked alpha x alpha block must be symmetric.
                        let mirrored = (r / alpha) * alpha + c;
                        if self.get(r, c) != self.get(mirrored, r % alpha) {
                            return Err(Error::Parse(format!(
                                "MSR index block not symmetric at ({r},{c})"
                            )));
                        }
                    }
                    let mut row_seen = std::collections::HashSet::new();
                    if !self.row(r).iter().all(|&v| row_seen.insert(v)) {
                        return Err(Error::Parse(format!("duplicate value in index row {r}")));
                    }
                }
                for c in 0..alpha {
                    let mut col_seen = std::collections::HashSet::new();
                    if !(0..d).all(|r| col_seen.insert(self.get(r, c))) {
                        return Err(Error::Parse(format!("duplicate value in index column {c}")));
                    }
                }
            }
            Variant::Mbr => {
                for r in 0..d {
                    for c in 0..d {
                        if self.get(r, c) != self.get(c, r) {
                            return Err(Error::Parse(format!(
                                "MBR index matrix not symmetric at ({r},{c})"
                            )));
                        }
                        let in_zero_block = r >= k && c >= k;
                        if in_zero_block != (self.get(r, c) == 0) {
                            return Err(Error::Parse(format!(
                                "MBR sentinel misplaced at ({r},{c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A concrete code: Psi plus its structural components.
#[derive(Debug, Clone)]
pub struct CodeMatrices {
    pub params: CodeParams,
    pub construction: Construction,
    pub field: Arc<Field>,
    /// n x d encoding matrix.
    pub psi: Matrix,
    /// Diagonal of the n x n Lambda matrix (MSR only).
    pub lambda: Option<Vec<Elem>>,
}

impl CodeMatrices {
    /// The Phi block: first alpha columns of Psi for MSR, first k for MBR.
    pub fn phi(&self) -> Matrix {
        self.psi.column_range(0, self.params.phi_cols())
    }

    pub fn index_matrix(&self) -> IndexMatrix {
        IndexMatrix::for_params(&self.params)
    }

    /// Lambda entry for a 1-based node index (MSR only).
    pub fn lambda_of(&self, node: usize) -> Option<Elem> {
        self.lambda.as_ref().map(|l| l[node - 1])
    }
}

/// The seminal construction. MSR: Psi is the n x d Vandermonde matrix
/// Psi[i][j] = g^{(i-1)(j-1)}, which factors as [Phi | Lambda*Phi] with
/// Lambda_i = g^{(i-1)alpha}. MBR: the natively systematic form with
/// [I_k | 0] on top and Cauchy rows below.
pub fn build_vanilla(params: CodeParams, field: &Arc<Field>) -> Result<CodeMatrices> {
    if params.n as u32 > field.order() {
        return Err(Error::InvalidParams(format!(
            "field GF(2^{}) too small for n={} distinct evaluation points",
            field.width(),
            params.n
        )));
    }
    let (n, d, alpha) = (params.n, params.d, params.alpha);
    match params.variant {
        Variant::Msr => {
            let mut psi = Matrix::zeros(field.clone(), n, d);
            for i in 0..n {
                for j in 0..d {
                    psi[(i, j)] = field.exp_g((i * j) as u64);
                }
            }
            let lambda: Vec<Elem> = (0..n).map(|i| field.exp_g((i * alpha) as u64)).collect();
            Ok(CodeMatrices {
                params,
                construction: Construction::Vanilla,
                field: field.clone(),
                psi,
                lambda: Some(lambda),
            })
        }
        Variant::Mbr => {
            let k = params.k;
            let mut psi = Matrix::zeros(field.clone(), n, d);
            for i in 0..k {
                psi[(i, i)] = 1;
            }
            for i in k..n {
                // 1-based node i+1: x = g^{d + i + 1}, y_j = g^{j-1}.
                let x = field.exp_g((d + i + 1) as u64);
                for j in 0..d {
                    let y = field.exp_g(j as u64);
                    if x == y {
                        return Err(Error::DegeneratePoints(format!(
                            "Cauchy points collide for node {} column {}",
                            i + 1,
                            j + 1
                        )));
                    }
                    psi[(i, j)] = field.inv(x ^ y)?;
                }
            }
            Ok(CodeMatrices {
                params,
                construction: Construction::Vanilla,
                field: field.clone(),
                psi,
                lambda: None,
            })
        }
    }
}

/// The sparse MSR construction: Phi is I_alpha stacked on a Cauchy matrix
/// Phi[i][j] = (g^{i+alpha} - g^{j-1})^{-1} for i > alpha, and
/// Lambda_i = (g^{i+alpha} - 1) / (g^{i+alpha} - g^alpha).
pub fn build_sparse(params: CodeParams, field: &Arc<Field>) -> Result<CodeMatrices> {
    if params.variant != Variant::Msr {
        return Err(Error::WrongVariant {
            expected: Variant::Msr,
        });
    }
    let max_k = match field.width() {
        8 => 39,
        _ => 64,
    };
    if params.k > max_k {
        return Err(Error::KOutOfRange {
            k: params.k,
            w: field.width(),
            max: max_k,
        });
    }
    let (n, d, alpha) = (params.n, params.d, params.alpha);
    let mut phi = Matrix::zeros(field.clone(), n, alpha);
    for i in 0..alpha {
        phi[(i, i)] = 1;
    }
    for i in alpha..n {
        let x = field.exp_g((i + 1 + alpha) as u64);
        for j in 0..alpha {
            let y = field.exp_g(j as u64);
            if x == y {
                return Err(Error::DegeneratePoints(format!(
                    "Cauchy points collide for node {} column {}",
                    i + 1,
                    j + 1
                )));
            }
            phi[(i, j)] = field.inv(x ^ y)?;
        }
    }
    let mut lambda = Vec::with_capacity(n);
    for i in 1..=n {
        let x = field.exp_g((i + alpha) as u64);
        let num = x ^ 1;
        let den = x ^ field.exp_g(alpha as u64);
        if den == 0 {
            return Err(Error::DegeneratePoints(format!(
                "Lambda denominator vanishes for node {i}"
            )));
        }
        lambda.push(field.mul(num, field.inv(den)?));
    }
    let mut psi = Matrix::zeros(field.clone(), n, d);
    for i in 0..n {
        for j in 0..alpha {
            psi[(i, j)] = phi[(i, j)];
            psi[(i, alpha + j)] = field.mul(lambda[i], phi[(i, j)]);
        }
    }
    Ok(CodeMatrices {
        params,
        construction: Construction::Sparse,
        field: field.clone(),
        psi,
        lambda: Some(lambda),
    })
}

pub fn build(
    params: CodeParams,
    construction: Construction,
    field: &Arc<Field>,
) -> Result<CodeMatrices> {
    match construction {
        Construction::Vanilla => build_vanilla(params, field),
        Construction::Sparse => build_sparse(params, field),
    }
}

/// How to cover subset families too large to enumerate.
#[derive(Debug, Clone, Copy)]
pub enum SubsetPolicy {
    /// Enumerate every subset; errors if a family exceeds
    /// [`EXHAUSTIVE_SUBSET_LIMIT`].
    Exhaustive,
    /// Enumerate exhaustively when feasible, otherwise check `count`
    /// pseudo-random subsets drawn from the given seed.
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// 1-based node indices of a failing row set, when a check fails.
    pub witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub overall: bool,
}

impl ValidationReport {
    fn from_checks(checks: Vec<CheckResult>) -> ValidationReport {
        let overall = checks.iter().all(|c| c.passed);
        ValidationReport { checks, overall }
    }
}

/// Validates the construction constraints: the structural decomposition of
/// Psi, independence of every d-row subset of Psi and every Phi-width subset
/// of Phi, and (MSR) distinctness of the Lambda values.
pub fn validate_construction(cm: &CodeMatrices) -> Result<ValidationReport> {
    validate_construction_with(cm, SubsetPolicy::Exhaustive)
}

pub fn validate_construction_with(
    cm: &CodeMatrices,
    policy: SubsetPolicy,
) -> Result<ValidationReport> {
    let params = &cm.params;
    let mut checks = Vec::new();

    checks.push(check_structure(cm));

    let phi = cm.phi();
    checks.push(check_subsets(
        "psi_any_d_rows_independent",
        &cm.psi,
        params.d,
        policy,
    )?);
    checks.push(check_subsets(
        "phi_row_subsets_independent",
        &phi,
        params.phi_cols(),
        policy,
    )?);

    if let Some(lambda) = &cm.lambda {
        checks.push(check_lambda_distinct(lambda));
    }

    Ok(ValidationReport::from_checks(checks))
}

fn check_structure(cm: &CodeMatrices) -> CheckResult {
    let params = &cm.params;
    let witness: Option<Vec<usize>> = match params.variant {
        Variant::Msr => {
            let alpha = params.alpha;
            let lambda = cm.lambda.as_deref().unwrap_or(&[]);
            (0..params.n)
                .find(|&i| {
                    lambda.len() != params.n
                        || (0..alpha).any(|j| {
                            cm.psi[(i, alpha + j)] != cm.field.mul(lambda[i], cm.psi[(i, j)])
                        })
                })
                .map(|i| vec![i + 1])
        }
        Variant::Mbr => (0..params.k)
            .find(|&i| (0..params.d).any(|j| cm.psi[(i, j)] != u16::from(i == j)))
            .map(|i| vec![i + 1]),
    };
    CheckResult {
        name: "psi_structure",
        passed: witness.is_none(),
        witness,
    }
}

fn check_lambda_distinct(lambda: &[Elem]) -> CheckResult {
    for i in 0..lambda.len() {
        for j in (i + 1)..lambda.len() {
            if lambda[i] == lambda[j] {
                return CheckResult {
                    name: "lambda_distinct",
                    passed: false,
                    witness: Some(vec![i + 1, j + 1]),
                };
            }
        }
    }
    CheckResult {
        name: "lambda_distinct",
        passed: true,
        witness: None,
    }
}

fn check_subsets(
    name: &'static str,
    m: &Matrix,
    size: usize,
    policy: SubsetPolicy,
) -> Result<CheckResult> {
    let n = m.rows();
    let total = binomial(n, size);
    let mut scratch = vec![0 as Elem; size * m.cols()];
    let mut witness = None;

    if total <= EXHAUSTIVE_SUBSET_LIMIT {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            if !rows_full_rank(m, &subset, &mut scratch) {
                witness = Some(subset.iter().map(|&i| i + 1).collect());
                break;
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    } else {
        let SubsetPolicy::Sample { count, seed } = policy else {
            return Err(Error::TooManySubsets { count: total });
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let mut subset = rand::seq::index::sample(&mut rng, n, size).into_vec();
            subset.sort_unstable();
            if !rows_full_rank(m, &subset, &mut scratch) {
                witness = Some(subset.iter().map(|&i| i + 1).collect());
                break;
            }
        }
    }

    Ok(CheckResult {
        name,
        passed: witness.is_none(),
        witness,
    })
}

/// Whether the selected rows (a square subset: len == m.cols()) are linearly
/// independent. Uses caller-provided scratch to avoid per-subset allocation.
fn rows_full_rank(m: &Matrix, rows: &[usize], scratch: &mut [Elem]) -> bool {
    let size = rows.len();
    let cols = m.cols();
    debug_assert_eq!(size, cols);
    let f = m.field();
    for (dst, &r) in scratch.chunks_exact_mut(cols).zip(rows.iter()) {
        dst.copy_from_slice(m.row(r));
    }
    for col in 0..size {
        let Some(pivot) = (col..size).find(|&r| scratch[r * cols + col] != 0) else {
            return false;
        };
        if pivot != col {
            for c in 0..cols {
                scratch.swap(pivot * cols + c, col * cols + c);
            }
        }
        let inv = f.inv(scratch[col * cols + col]).expect("nonzero pivot");
        for r in (col + 1)..size {
            let factor = f.mul(scratch[r * cols + col], inv);
            if factor == 0 {
                continue;
            }
            for c in col..cols {
                let sub = f.mul(factor, scratch[col * cols + c]);
                scratch[r * cols + c] ^= sub;
            }
        }
    }
    true
}

/// Lexicographic successor of a k-combination of 0..n. Returns false when
/// the last combination has been visited.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let r = subset.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if subset[i] < n - r + i {
            subset[i] += 1;
            for j in (i + 1)..r {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = match acc.checked_mul((n - r + i) as u128) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Serializes a code definition: `variant construction w n k d` on the first
/// line, then Psi in canonical matrix text, then L as d lines of alpha
/// decimal values.
pub fn code_definition_to_text(cm: &CodeMatrices, l: &IndexMatrix) -> String {
    let p = &cm.params;
    let mut out = format!(
        "{} {} {} {} {} {}\n",
        p.variant.as_str(),
        cm.construction.as_str(),
        cm.field.width(),
        p.n,
        p.k,
        p.d
    );
    out.push_str(&cm.psi.to_text());
    for r in 0..l.rows() {
        let line = l
            .row(r)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parses a code definition, deriving Lambda from Psi for MSR codes and
/// checking that L satisfies the layout invariants.
pub fn code_definition_from_text(text: &str) -> Result<(CodeMatrices, IndexMatrix)> {
    let header = text
        .lines()
        .next()
        .ok_or_else(|| Error::Parse("empty code definition".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 {
        return Err(Error::Parse(format!(
            "code header must be `variant construction w n k d`, got {header:?}"
        )));
    }
    let variant = Variant::parse(parts[0])?;
    let construction = Construction::parse(parts[1])?;
    let w: u32 = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("bad width {:?}", parts[2])))?;
    let n: usize = parts[3]
        .parse()
        .map_err(|_| Error::Parse(format!("bad n {:?}", parts[3])))?;
    let k: usize = parts[4]
        .parse()
        .map_err(|_| Error::Parse(format!("bad k {:?}", parts[4])))?;
    let d: usize = parts[5]
        .parse()
        .map_err(|_| Error::Parse(format!("bad d {:?}", parts[5])))?;
    let params = CodeParams::new(n, k, d, variant)?;

    let rest = text.get(header.len() + 1..).unwrap_or("");
    let (psi, rest) = Matrix::from_text_prefix(rest)?;
    if psi.field().width() != w {
        return Err(Error::Parse(format!(
            "matrix width {} disagrees with code width {w}",
            psi.field().width()
        )));
    }
    if psi.rows() != n || psi.cols() != d {
        return Err(Error::Parse(format!(
            "Psi is {}x{}, expected {n}x{d}",
            psi.rows(),
            psi.cols()
        )));
    }

    let mut entries = Vec::with_capacity(d * params.alpha);
    let mut lines = rest.lines();
    for r in 0..d {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("index matrix truncated at row {r}")))?;
        for tok in line.split_whitespace() {
            let v: u32 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad index value {tok:?}")))?;
            entries.push(v);
        }
        if entries.len() != (r + 1) * params.alpha {
            return Err(Error::Parse(format!(
                "index row {r} has {} values, expected {}",
                entries.len() - r * params.alpha,
                params.alpha
            )));
        }
    }
    let l = IndexMatrix {
        rows: d,
        cols: params.alpha,
        entries,
    };
    l.validate(&params)?;

    let field = psi.field().clone();
    let lambda = match variant {
        Variant::Mbr => None,
        Variant::Msr => Some(derive_lambda(&psi, params.alpha, &field)?),
    };
    Ok((
        CodeMatrices {
            params,
            construction,
            field,
            psi,
            lambda,
        },
        l,
    ))
}

/// Recovers the Lambda diagonal from Psi = [Phi | Lambda*Phi], verifying the
/// factorization holds on every entry.
fn derive_lambda(psi: &Matrix, alpha: usize, field: &Arc<Field>) -> Result<Vec<Elem>> {
    let mut lambda = Vec::with_capacity(psi.rows());
    for i in 0..psi.rows() {
        let j = (0..alpha)
            .find(|&j| psi[(i, j)] != 0)
            .ok_or_else(|| Error::ConstructionInvalid(format!("Phi row {} is all zero", i + 1)))?;
        let li = field.mul(psi[(i, alpha + j)], field.inv(psi[(i, j)])?);
        for jj in 0..alpha {
            if psi[(i, alpha + jj)] != field.mul(li, psi[(i, jj)]) {
                return Err(Error::ConstructionInvalid(format!(
                    "Psi row {} does not factor as [Phi | Lambda*Phi]",
                    i + 1
                )));
            }
        }
        lambda.push(li);
    }
    Ok(lambda)
}

//! Dense matrices over GF(2^w): multiplication, Gauss-Jordan inversion, row
//! selection, rank, and the canonical text serialization used by the CLI.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use crate::galois::{Elem, Field};
use crate::{stats, Error, Result};

/// Row-major matrix of field elements. Immutable in normal use; operations
/// return new matrices.
#[derive(Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
    field: Arc<Field>,
}

impl Matrix {
    pub fn new(field: Arc<Field>, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| v as u32 > field.order()) {
            return Err(Error::Dimension(format!(
                "element {bad} out of range for w={}",
                field.width()
            )));
        }
        Ok(Matrix {
            rows,
            cols,
            data,
            field,
        })
    }

    pub fn zeros(field: Arc<Field>, rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    pub fn identity(field: Arc<Field>, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if !self.field.same_field(&other.field) {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0 {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src.iter()) {
                    *d ^= f.mul(a, b);
                }
            }
        }
        Ok(out)
    }

    /// Gauss-Jordan inverse. Pivoting takes the first nonzero entry in the
    /// column (finite fields need no magnitude ordering), so the result is
    /// deterministic. O(n^3) field operations.
    pub fn invert(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "cannot invert {}x{} matrix",
                self.rows, self.cols
            )));
        }
        stats::record_inversion();
        let n = self.rows;
        let f = self.field.clone();
        let mut a = self.clone();
        let mut inv = Matrix::identity(f.clone(), n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[(r, col)] != 0)
                .ok_or(Error::Singular { column: col })?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let scale = f.inv(a[(col, col)])?;
            a.scale_row(col, scale);
            inv.scale_row(col, scale);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == 0 {
                    continue;
                }
                a.subtract_scaled_row(r, col, factor);
                inv.subtract_scaled_row(r, col, factor);
            }
        }
        Ok(inv)
    }

    /// Selects rows by index, in the given order. Duplicates are rejected.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Matrix> {
        let mut seen = vec![false; self.rows];
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            if r >= self.rows {
                return Err(Error::RowOutOfRange {
                    index: r,
                    rows: self.rows,
                });
            }
            if seen[r] {
                return Err(Error::DuplicateRow { index: r });
            }
            seen[r] = true;
            data.extend_from_slice(self.row(r));
        }
        Matrix::new(self.field.clone(), rows.len(), self.cols, data)
    }

    /// Contiguous column slice `[start, end)` as a new matrix.
    pub fn column_range(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.cols);
        let mut data = Vec::with_capacity(self.rows * (end - start));
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[start..end]);
        }
        Matrix {
            rows: self.rows,
            cols: end - start,
            data,
            field: self.field.clone(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    /// Row rank via elimination.
    pub fn rank(&self) -> usize {
        let f = &self.field;
        let mut work = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..rows).find(|&r| work[r * cols + col] != 0) else {
                continue;
            };
            if pivot != rank {
                for c in 0..cols {
                    work.swap(pivot * cols + c, rank * cols + c);
                }
            }
            let inv = f.inv(work[rank * cols + col]).expect("nonzero pivot");
            for r in (rank + 1)..rows {
                let factor = f.mul(work[r * cols + col], inv);
                if factor == 0 {
                    continue;
                }
                for c in col..cols {
                    let sub = f.mul(factor, work[rank * cols + c]);
                    work[r * cols + c] ^= sub;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, factor: Elem) {
        if factor == 1 {
            return;
        }
        let f = self.field.clone();
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = f.mul(*v, factor);
        }
    }

    /// row[dst] -= factor * row[src] (same as += in characteristic 2).
    fn subtract_scaled_row(&mut self, dst: usize, src: usize, factor: Elem) {
        let f = self.field.clone();
        let cols = self.cols;
        for c in 0..cols {
            let sub = f.mul(factor, self.data[src * cols + c]);
            self.data[dst * cols + c] ^= sub;
        }
    }

    /// Canonical text form: first line `w rows cols`, then one line per row
    /// of space-separated decimal values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.field.width(), self.rows, self.cols);
        for r in 0..self.rows {
            let line = self
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

    /// Parses the canonical text form, constructing the field named in the
    /// header. The remainder of the input after the matrix is returned so
    /// larger documents can embed matrices.
    pub fn from_text_prefix(text: &str) -> Result<(Matrix, &str)> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "matrix header must be `w rows cols`, got {header:?}"
            )));
        }
        let w: u32 = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad width {:?}", parts[0])))?;
        let rows: usize = parts[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad row count {:?}", parts[1])))?;
        let cols: usize = parts[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad column count {:?}", parts[2])))?;
        let field = Arc::new(Field::new(w)?);
        let mut data = Vec::with_capacity(rows * cols);
        let mut consumed = header.len() + 1;
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("matrix truncated at row {r}")))?;
            consumed += line.len() + 1;
            for tok in line.split_whitespace() {
                let v: u32 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element {tok:?} in row {r}")))?;
                if v > field.order() {
                    return Err(Error::Parse(format!("element {v} out of range for w={w}")));
                }
                data.push(v as Elem);
            }
            if data.len() != (r + 1) * cols {
                return Err(Error::Parse(format!(
                    "row {r} has {} elements, expected {cols}",
                    data.len() - r * cols
                )));
            }
        }
        let rest = if consumed >= text.len() {
            ""
        } else {
            &text[consumed..]
        };
        Ok((Matrix::new(field, rows, cols, data)?, rest))
    }

    pub fn from_text(text: &str) -> Result<Matrix> {
        let (m, _) = Matrix::from_text_prefix(text)?;
        Ok(m)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Elem;
    fn index(&self, (r, c): (usize, usize)) -> &Elem {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Elem {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
            && self.field.same_field(&other.field)
    }
}

impl Eq for Matrix {}

// Keep Debug short: shape only, the data can be huge.
impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Matrix({}x{} over GF(2^{}))",
            self.rows,
            self.cols,
            self.field.width()
        )
    }
}

use std::fmt;

use rayon::prelude::*;

use super::diff::diff;
use super::expr::{Expr, Symbol};

/// Dense row-major matrix of expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
}

impl ExprMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Self {
        assert_eq!(rows * cols, entries.len(), "entry count does not match shape");
        ExprMatrix { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix::new(rows, cols, vec![Expr::zero(); rows * cols])
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Expr>>) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            entries.extend(r);
        }
        ExprMatrix::new(n, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Expr] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Stack `other` below `self`. A narrower operand is padded with zero
    /// columns on the right.
    pub fn vstack(&self, other: &ExprMatrix) -> ExprMatrix {
        let cols = self.cols.max(other.cols);
        let mut entries = Vec::with_capacity((self.rows + other.rows) * cols);
        for m in [self, other] {
            for r in 0..m.rows {
                entries.extend_from_slice(m.row(r));
                entries.extend(std::iter::repeat_n(Expr::zero(), cols - m.cols));
            }
        }
        ExprMatrix::new(self.rows + other.rows, cols, entries)
    }

    /// Copy with column `col` removed.
    pub fn without_column(&self, col: usize) -> ExprMatrix {
        assert!(col < self.cols);
        let mut entries = Vec::with_capacity(self.rows * (self.cols - 1));
        for r in 0..self.rows {
            let row = self.row(r);
            entries.extend_from_slice(&row[..col]);
            entries.extend_from_slice(&row[col + 1..]);
        }
        ExprMatrix::new(self.rows, self.cols - 1, entries)
    }

    /// True when no entry contains exp, ln or a non-integer power.
    pub fn is_rational(&self) -> bool {
        self.entries.iter().all(Expr::is_rational)
    }
}

impl fmt::Display for ExprMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            f.write_str("[")?;
            for (c, e) in self.row(r).iter().enumerate() {
                if c > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

/// Entry `(i, j)` is `d v[i] / d syms[j]`.
pub fn jacobian(v: &[Expr], syms: &[Symbol]) -> ExprMatrix {
    let rows: Vec<Vec<Expr>> = v
        .par_iter()
        .map(|e| syms.iter().map(|s| diff(e, s)).collect())
        .collect();
    ExprMatrix::from_rows(syms.len(), rows)
}

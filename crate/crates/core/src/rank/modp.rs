use crate::sym::ModP;

/// Reduced row echelon form over Z/pZ, grown one row at a time.
#[derive(Debug, Clone)]
pub struct Rref {
    field: ModP,
    cols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Rref {
    pub fn new(field: ModP, cols: usize) -> Self {
        Rref {
            field,
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Append zero columns on the right.
    pub fn grow_cols(&mut self, cols: usize) {
        assert!(cols >= self.cols);
        for r in &mut self.rows {
            r.resize(cols, 0);
        }
        self.cols = cols;
    }

    /// Add a row; returns true when it was independent of the rows so far.
    pub fn push(&mut self, mut row: Vec<u64>) -> bool {
        assert_eq!(row.len(), self.cols);
        let f = self.field;
        for (r, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = row[pc];
            if c != 0 {
                for (x, &y) in row.iter_mut().zip(r) {
                    if y != 0 {
                        *x = f.sub_mod(*x, f.mul_mod(c, y));
                    }
                }
            }
        }
        let Some(pc) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(row[pc]).expect("nonzero pivot");
        for x in row.iter_mut() {
            *x = f.mul_mod(*x, inv);
        }
        for r in &mut self.rows {
            let c = r[pc];
            if c != 0 {
                for (x, &y) in r.iter_mut().zip(&row) {
                    if y != 0 {
                        *x = f.sub_mod(*x, f.mul_mod(c, y));
                    }
                }
            }
        }
        self.rows.push(row);
        self.pivots.push(pc);
        true
    }

    /// True when the unit vector `e_col` lies in the row space, which is
    /// exactly when deleting column `col` lowers the rank.
    pub fn unit_in_row_space(&self, col: usize) -> bool {
        match self.pivots.iter().position(|&p| p == col) {
            Some(t) => self.rows[t].iter().enumerate().all(|(c, &x)| c == col || x == 0),
            None => false,
        }
    }
}

/// Rank of a dense matrix over Z/pZ.
pub fn rank_mod(rows: &[Vec<u64>], cols: usize, field: ModP) -> usize {
    let mut r = Rref::new(field, cols);
    for row in rows {
        r.push(row.clone());
    }
    r.rank()
}

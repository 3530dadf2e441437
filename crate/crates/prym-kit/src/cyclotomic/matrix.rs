//! Exact matrices over a cyclotomic field.
//!
//! All entries of a [`CycMatrix`] share one conductor; binary operations embed
//! both operands into the least common multiple up front, so results are
//! independent of evaluation order.

use serde::{Deserialize, Serialize};

use super::num::{CycError, CycNum};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycMatrix {
    n_rows: usize,
    n_cols: usize,
    conductor: u64,
    entries: Vec<CycNum>,
}

fn lcm(a: u64, b: u64) -> u64 {
    use num::Integer;
    a / a.gcd(&b) * b
}

impl CycMatrix {
    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> CycNum) -> Self {
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        let mut conductor = 1;
        for r in 0..n_rows {
            for c in 0..n_cols {
                let e = f(r, c);
                conductor = lcm(conductor, e.conductor());
                entries.push(e);
            }
        }
        let entries = entries.into_iter().map(|e| e.embed(conductor)).collect();
        CycMatrix {
            n_rows,
            n_cols,
            conductor,
            entries,
        }
    }

    pub fn from_rows(rows: Vec<Vec<CycNum>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map(Vec::len).unwrap_or(0);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self::from_fn(n_rows, n_cols, |r, c| rows[r][c].clone())
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| CycNum::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_fn(n_rows, n_cols, |_, _| CycNum::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                CycNum::one()
            } else {
                CycNum::zero()
            }
        })
    }

    pub fn diagonal(diag: &[CycNum]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| {
            if r == c {
                diag[r].clone()
            } else {
                CycNum::zero()
            }
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn at(&self, r: usize, c: usize) -> &CycNum {
        &self.entries[r * self.n_cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: CycNum) {
        let m = lcm(self.conductor, v.conductor());
        if m != self.conductor {
            *self = self.embed(m);
        }
        self.entries[r * self.n_cols + c] = v.embed(self.conductor);
    }

    pub fn embed(&self, conductor: u64) -> CycMatrix {
        CycMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            conductor,
            entries: self.entries.iter().map(|e| e.embed(conductor)).collect(),
        }
    }

    fn common(&self, other: &CycMatrix) -> (CycMatrix, CycMatrix) {
        let m = lcm(self.conductor, other.conductor);
        (self.embed(m), other.embed(m))
    }

    pub fn add(&self, other: &CycMatrix) -> CycMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let (a, b) = self.common(other);
        CycMatrix::from_fn(a.n_rows, a.n_cols, |r, c| a.at(r, c).add(b.at(r, c)))
    }

    pub fn sub(&self, other: &CycMatrix) -> CycMatrix {
        self.add(&other.scalar_mul(&CycNum::from_int(-1)))
    }

    pub fn scalar_mul(&self, s: &CycNum) -> CycMatrix {
        CycMatrix::from_fn(self.n_rows, self.n_cols, |r, c| self.at(r, c).mul(s))
    }

    pub fn mul(&self, other: &CycMatrix) -> CycMatrix {
        assert_eq!(
            self.n_cols, other.n_rows,
            "matrix product shape mismatch: {}x{} * {}x{}",
            self.n_rows, self.n_cols, other.n_rows, other.n_cols
        );
        let (a, b) = self.common(other);
        CycMatrix::from_fn(a.n_rows, b.n_cols, |r, c| {
            let mut acc = CycNum::zero().embed(a.conductor);
            for k in 0..a.n_cols {
                if !a.at(r, k).is_zero() && !b.at(k, c).is_zero() {
                    acc = acc.add(&a.at(r, k).mul(b.at(k, c)));
                }
            }
            acc
        })
    }

    pub fn transpose(&self) -> CycMatrix {
        CycMatrix::from_fn(self.n_cols, self.n_rows, |r, c| self.at(c, r).clone())
    }

    pub fn pow(&self, e: u64) -> CycMatrix {
        assert!(self.is_square());
        let mut acc = CycMatrix::identity(self.n_rows).embed(self.conductor);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Gauss-Jordan inverse; `Err(Singular)` when the determinant vanishes.
    pub fn inverse(&self) -> Result<CycMatrix, CycError> {
        if !self.is_square() {
            return Err(CycError::ShapeMismatch(format!(
                "inverse of {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        let n = self.n_rows;
        let mut a = self.clone();
        let mut inv = CycMatrix::identity(n).embed(self.conductor);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.at(r, col).is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return Err(CycError::Singular),
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a.at(col, col).clone();
            let pinv = p.inv()?;
            a.scale_row(col, &pinv);
            inv.scale_row(col, &pinv);
            for r in 0..n {
                if r != col && !a.at(r, col).is_zero() {
                    let factor = a.at(r, col).clone();
                    a.row_sub_scaled(r, col, &factor);
                    inv.row_sub_scaled(r, col, &factor);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> CycNum {
        assert!(self.is_square());
        let n = self.n_rows;
        let mut a = self.clone();
        let mut det = CycNum::one().embed(self.conductor);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.at(r, col).is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return CycNum::zero(),
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                det = det.neg();
            }
            let p = a.at(col, col).clone();
            det = det.mul(&p);
            let pinv = p.inv().expect("pivot nonzero");
            for r in col + 1..n {
                if !a.at(r, col).is_zero() {
                    let factor = a.at(r, col).mul(&pinv);
                    a.row_sub_scaled(r, col, &factor);
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        for c in 0..self.n_cols {
            self.entries.swap(r1 * self.n_cols + c, r2 * self.n_cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &CycNum) {
        for c in 0..self.n_cols {
            let idx = r * self.n_cols + c;
            self.entries[idx] = self.entries[idx].mul(s).embed(self.conductor);
        }
    }

    /// row_r -= s * row_src
    fn row_sub_scaled(&mut self, r: usize, src: usize, s: &CycNum) {
        for c in 0..self.n_cols {
            let v = self.entries[src * self.n_cols + c].mul(s);
            let idx = r * self.n_cols + c;
            self.entries[idx] = self.entries[idx].sub(&v).embed(self.conductor);
        }
    }

    /// Conjugation Int_A(B) = A B A^{-1}.
    pub fn int_conj(&self, b: &CycMatrix) -> Result<CycMatrix, CycError> {
        Ok(self.mul(b).mul(&self.inverse()?))
    }

    /// Multiplicative commutator A B A^{-1} B^{-1}.
    pub fn commutator(&self, b: &CycMatrix) -> Result<CycMatrix, CycError> {
        Ok(self.mul(b).mul(&self.inverse()?).mul(&b.inverse()?))
    }

    pub fn is_scalar(&self) -> bool {
        self.as_scalar().is_some()
    }

    /// Some(c) when self == c·I.
    pub fn as_scalar(&self) -> Option<CycNum> {
        if !self.is_square() || self.n_rows == 0 {
            return None;
        }
        let c = self.at(0, 0).clone();
        for r in 0..self.n_rows {
            for k in 0..self.n_cols {
                let expect = if r == k { c.clone() } else { CycNum::zero() };
                if self.at(r, k) != &expect {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.n_rows)
                .all(|r| (0..self.n_cols).all(|c| r == c || self.at(r, c).is_zero()))
    }

    pub fn diagonal_entries(&self) -> Vec<CycNum> {
        (0..self.n_rows.min(self.n_cols))
            .map(|k| self.at(k, k).clone())
            .collect()
    }

    /// Extract the submatrix with the given row/column index sets.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CycMatrix {
        CycMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            self.at(rows[r], cols[c]).clone()
        })
    }

    pub fn set_submatrix(&mut self, rows: &[usize], cols: &[usize], block: &CycMatrix) {
        assert_eq!(block.n_rows, rows.len());
        assert_eq!(block.n_cols, cols.len());
        for (br, &r) in rows.iter().enumerate() {
            for (bc, &c) in cols.iter().enumerate() {
                self.set(r, c, block.at(br, bc).clone());
            }
        }
    }

    /// Reduced row echelon form; returns the reduced matrix and pivot columns.
    pub fn rref(&self) -> (CycMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.n_cols {
            if row >= a.n_rows {
                break;
            }
            let pivot = (row..a.n_rows).find(|&r| !a.at(r, col).is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => continue,
            };
            if pivot != row {
                a.swap_rows(pivot, row);
            }
            let pinv = a.at(row, col).inv().expect("pivot nonzero");
            a.scale_row(row, &pinv);
            for r in 0..a.n_rows {
                if r != row && !a.at(r, col).is_zero() {
                    let factor = a.at(r, col).clone();
                    a.row_sub_scaled(r, row, &factor);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    /// Basis of the right kernel, as columns of the returned matrix.
    pub fn kernel_basis(&self) -> Vec<Vec<CycNum>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.n_cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fcol in &free {
            let mut v = vec![CycNum::zero(); self.n_cols];
            v[fcol] = CycNum::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = r.at(prow, fcol).neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// The standard symplectic form J = (0, I_n; -I_n, 0) of size 2n.
    pub fn j_std(two_n: usize) -> CycMatrix {
        assert!(two_n % 2 == 0);
        let n = two_n / 2;
        CycMatrix::from_fn(two_n, two_n, |r, c| {
            if r < n && c == r + n {
                CycNum::one()
            } else if r >= n && c == r - n {
                CycNum::from_int(-1)
            } else {
                CycNum::zero()
            }
        })
    }

    /// True iff MᵀJM = J for the standard form J.
    pub fn is_symplectic(&self) -> Result<bool, CycError> {
        Ok(self.symplectic_defect()? == Some(CycNum::one()))
    }

    /// When MᵀJM = cJ, returns Some(c); None if MᵀJM is not proportional to J.
    pub fn symplectic_defect(&self) -> Result<Option<CycNum>, CycError> {
        if !self.is_square() {
            return Err(CycError::ShapeMismatch("symplectic test".into()));
        }
        if self.n_rows % 2 != 0 {
            return Err(CycError::OddDimension(self.n_rows));
        }
        let j = CycMatrix::j_std(self.n_rows);
        let m = self.transpose().mul(&j).mul(self);
        // recover c from the (0, n) slot, then verify proportionality
        let n = self.n_rows / 2;
        let c = m.at(0, n).clone();
        if c.is_zero() {
            return Ok(None);
        }
        if m == j.scalar_mul(&c) {
            Ok(Some(c))
        } else {
            Ok(None)
        }
    }

    /// Canonical hash key; callers must supply a conductor that all compared
    /// matrices embed into.
    pub fn canonical_key(&self, conductor: u64) -> String {
        let mut s = format!("{}x{};", self.n_rows, self.n_cols);
        for e in &self.entries {
            s.push_str(&e.canonical_key(conductor));
            s.push('|');
        }
        s
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(CycNum::is_zero)
    }
}

impl PartialEq for CycMatrix {
    fn eq(&self, other: &Self) -> bool {
        if (self.n_rows, self.n_cols) != (other.n_rows, other.n_cols) {
            return false;
        }
        let (a, b) = self.common(other);
        a.entries == b.entries
    }
}

impl Eq for CycMatrix {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_identity() {
        let i = CycNum::i();
        let a = CycMatrix::from_rows(vec![
            vec![CycNum::one(), i.neg()],
            vec![CycNum::one(), i.clone()],
        ]);
        let ainv = a.inverse().unwrap();
        assert_eq!(a.mul(&ainv), CycMatrix::identity(2));
        assert_eq!(ainv.mul(&a), CycMatrix::identity(2));
    }

    #[test]
    fn int_conj_is_action() {
        let a = CycMatrix::from_int_rows(&[&[1, 2], &[0, 1]]);
        let b = CycMatrix::from_int_rows(&[&[0, 1], &[-1, 0]]);
        let back = a
            .int_conj(&a.inverse().unwrap().int_conj(&b).unwrap())
            .unwrap();
        assert_eq!(back, b);
        let id = CycMatrix::identity(2);
        assert_eq!(id.int_conj(&b).unwrap(), b);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = CycMatrix::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(a.inverse().unwrap_err(), CycError::Singular);
        assert!(a.det().is_zero());
    }

    #[test]
    fn symplectic_checks() {
        let j = CycMatrix::j_std(2);
        assert!(j.is_symplectic().unwrap());
        let d = CycMatrix::diagonal(&[CycNum::from_int(2), CycNum::from_ratio(1, 2)]);
        assert!(d.is_symplectic().unwrap());
        let bad = CycMatrix::diagonal(&[CycNum::from_int(2), CycNum::from_int(3)]);
        assert_eq!(
            bad.symplectic_defect().unwrap(),
            Some(CycNum::from_int(6))
        );
        assert!(!bad.is_symplectic().unwrap());
        let odd = CycMatrix::identity(3);
        assert!(odd.is_symplectic().is_err());
    }

    #[test]
    fn kernel_of_projection() {
        let a = CycMatrix::from_int_rows(&[&[1, 0, -1], &[0, 1, -1]]);
        let k = a.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![CycNum::one(), CycNum::one(), CycNum::one()]);
    }

    #[test]
    fn det_multiplicative() {
        let a = CycMatrix::from_int_rows(&[&[2, 1], &[1, 1]]);
        let b = CycMatrix::from_rows(vec![
            vec![CycNum::i(), CycNum::zero()],
            vec![CycNum::one(), CycNum::i().neg()],
        ]);
        assert_eq!(a.mul(&b).det(), a.det().mul(&b.det()));
    }
}

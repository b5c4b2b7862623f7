//! Exact and certified linear algebra over [`Scalar`].

mod poly;
mod sparse;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::scalar::{Scalar, ScalarError};

pub use poly::{charpoly, isolate_real_roots, Poly, RootInterval};
pub use sparse::SparseEchelon;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix has interval entries; exact arithmetic required")]
    InexactEntries,
    #[error("matrix is singular")]
    Singular,
    #[error("determinant could not be certified nonzero")]
    UncertifiableDeterminant,
    #[error("value is not an eigenvalue")]
    NotAnEigenvalue,
    #[error("eigenspace has dimension {0}")]
    EigenspaceNotOneDimensional(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Dense row-major matrix of scalars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(Scalar::is_exact)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != o.rows {
            return Err(LinalgError::ShapeMismatch(format!("{}x{} * {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let mut out = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + &(a * b);
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::ShapeMismatch(format!("{} columns, vector of {}", self.cols, v.len())));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(Scalar::zero(), |acc, (a, b)| if a.is_zero() || b.is_zero() { acc } else { acc + a * b })
            })
            .collect())
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|a| a * s).collect() }
    }

    pub fn pow(&self, k: u32) -> Result<Matrix, LinalgError> {
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Rational entries, if every entry is rational.
    pub fn rational_entries(&self) -> Option<Vec<BigRational>> {
        self.entries.iter().map(|e| e.as_rational().cloned()).collect()
    }

    /// Serializes entries in row-major order using the scalar JSON encoding.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.entries.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", r.join(", "))?;
        }
        Ok(())
    }
}

/// Row echelon form by fraction-free (Bareiss) elimination. Returns the
/// reduced matrix, pivot columns, and the sign of the row permutation.
fn bareiss(m: &Matrix) -> (Matrix, Vec<usize>, bool) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut prev = Scalar::one();
    let mut r = 0;
    let mut swapped = false;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a.get(i, c).is_certainly_nonzero()) else { continue };
        if p != r {
            for j in 0..cols {
                a.entries.swap(p * cols + j, r * cols + j);
            }
            swapped = !swapped;
        }
        let piv = a.get(r, c).clone();
        let prev_inv = prev.inv().expect("previous pivot is nonzero");
        for i in r + 1..rows {
            let aic = a.get(i, c).clone();
            for j in c + 1..cols {
                let v = &(&(&piv * a.get(i, j)) - &(&aic * a.get(r, j))) * &prev_inv;
                a.set(i, j, v);
            }
            a.set(i, c, Scalar::zero());
        }
        // entries of row r left of the pivot in later columns stay as-is
        pivots.push(c);
        prev = piv;
        r += 1;
    }
    (a, pivots, swapped)
}

/// Rank of an exact matrix.
pub fn rank(m: &Matrix) -> Result<usize, LinalgError> {
    if !m.is_exact() {
        return Err(LinalgError::InexactEntries);
    }
    Ok(bareiss(m).1.len())
}

/// Basis of the right nullspace in reduced echelon normal form: vector `k`
/// has a 1 in the `k`-th free column and zeros in the other free columns.
pub fn nullspace(m: &Matrix) -> Result<Vec<Vec<Scalar>>, LinalgError> {
    if !m.is_exact() {
        return Err(LinalgError::InexactEntries);
    }
    let (a, pivots, _) = bareiss(m);
    let cols = m.cols;
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut x = vec![Scalar::zero(); cols];
        x[f] = Scalar::one();
        for (r, &pc) in pivots.iter().enumerate().rev() {
            let mut s = Scalar::zero();
            for j in pc + 1..cols {
                let aj = a.get(r, j);
                if !aj.is_zero() && !x[j].is_zero() {
                    s += aj * &x[j];
                }
            }
            x[pc] = -(s.checked_div(a.get(r, pc))?);
        }
        basis.push(x);
    }
    Ok(basis)
}

/// Solves `m x = rhs` for square `m`.
pub fn solve_linear(m: &Matrix, rhs: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
    let n = m.rows;
    if m.cols != n || rhs.len() != n {
        return Err(LinalgError::ShapeMismatch("square system expected".into()));
    }
    let mut aug = Matrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, n, rhs[i].clone());
    }
    let (a, pivots, _) = bareiss(&aug);
    if pivots.len() < n || pivots[..n].iter().enumerate().any(|(i, &c)| c != i) {
        return Err(if m.is_exact() { LinalgError::Singular } else { LinalgError::UncertifiableDeterminant });
    }
    let mut x = vec![Scalar::zero(); n];
    for r in (0..n).rev() {
        let mut s = a.get(r, n).clone();
        for j in r + 1..n {
            s -= a.get(r, j) * &x[j];
        }
        x[r] = s.checked_div(a.get(r, r))?;
    }
    Ok(x)
}

/// Inverse of a square matrix.
pub fn inverse(m: &Matrix) -> Result<Matrix, LinalgError> {
    let n = m.rows;
    if m.cols != n {
        return Err(LinalgError::ShapeMismatch("square matrix expected".into()));
    }
    let mut aug = Matrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, n + i, Scalar::one());
    }
    let (a, pivots, _) = bareiss(&aug);
    if pivots.len() < n || pivots[..n].iter().enumerate().any(|(i, &c)| c != i) {
        return Err(if m.is_exact() { LinalgError::Singular } else { LinalgError::UncertifiableDeterminant });
    }
    let inv_diag: Vec<Scalar> = (0..n).map(|r| a.get(r, r).inv()).collect::<Result<_, _>>()?;
    let mut out = Matrix::zeros(n, n);
    for c in 0..n {
        for r in (0..n).rev() {
            let mut s = a.get(r, n + c).clone();
            for j in r + 1..n {
                let arj = a.get(r, j);
                if !arj.is_zero() {
                    s -= arj * out.get(j, c);
                }
            }
            out.set(r, c, &s * &inv_diag[r]);
        }
    }
    Ok(out)
}

/// Determinant by Bareiss elimination.
pub fn determinant(m: &Matrix) -> Result<Scalar, LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::ShapeMismatch("square matrix expected".into()));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Scalar::one());
    }
    let (a, pivots, swapped) = bareiss(m);
    if pivots.len() < n {
        return if m.is_exact() { Ok(Scalar::zero()) } else { Err(LinalgError::UncertifiableDeterminant) };
    }
    let d = a.get(n - 1, n - 1).clone();
    Ok(if swapped { -d } else { d })
}

/// Lower bound on the rank from interval elimination at `bits` precision:
/// a pivot is accepted only when its enclosure excludes zero.
pub fn interval_rank(m: &Matrix, bits: u32) -> usize {
    let mut e = SparseEchelon::new(m.cols);
    for i in 0..m.rows {
        let row: Vec<(usize, Scalar)> = m
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (j, Scalar::Interval(v.to_interval(bits))))
            .collect();
        e.insert(row);
    }
    e.rank()
}

/// Eigenvector of `m` for the exact eigenvalue `lambda`, normalized to 1 at `index`.
pub fn certified_eigenvector(m: &Matrix, lambda: &Scalar, index: usize) -> Result<Vec<Scalar>, LinalgError> {
    if !lambda.is_exact() {
        return eigenvector_by_adjugate(m, lambda, index);
    }
    let basis = eigenspace(m, lambda)?;
    match basis.len() {
        0 => Err(LinalgError::NotAnEigenvalue),
        1 => {
            let v = &basis[0];
            let s = v[index].inv().map_err(|_| LinalgError::NotAnEigenvalue)?;
            Ok(v.iter().map(|x| x * &s).collect())
        }
        d => Err(LinalgError::EigenspaceNotOneDimensional(d)),
    }
}

/// Basis of the eigenspace of `m` at an exact eigenvalue (possibly empty).
pub fn eigenspace(m: &Matrix, lambda: &Scalar) -> Result<Vec<Vec<Scalar>>, LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::ShapeMismatch("square matrix expected".into()));
    }
    let shifted = m.sub(&Matrix::identity(m.rows).scale(lambda));
    nullspace(&shifted)
}

/// Column `index` of `adj(lambda I - m)` for a rational matrix, scaled to 1 at
/// `index`. For a simple eigenvalue this column spans the eigenspace; the
/// cofactors are exact polynomials evaluated at `lambda`, so interval inputs
/// give certified enclosures.
pub fn eigenvector_by_adjugate(m: &Matrix, lambda: &Scalar, index: usize) -> Result<Vec<Scalar>, LinalgError> {
    let n = m.rows;
    let q = m.rational_entries().ok_or(LinalgError::InexactEntries)?;
    let cof: Vec<Poly> = (0..n).map(|i| cofactor_poly(&q, n, index, i)).collect();
    let vals: Vec<Scalar> = cof.iter().map(|p| p.eval(lambda)).collect();
    let s = vals[index].inv()?;
    Ok(vals.iter().map(|v| v * &s).collect())
}

/// The `(j, i)` cofactor of `x I - m` (that is, entry `(i, j)` of the adjugate)
/// as a polynomial in `x`, by interpolation at integer points.
fn cofactor_poly(q: &[BigRational], n: usize, j: usize, i: usize) -> Poly {
    let deg = n.saturating_sub(1);
    let pts: Vec<BigRational> = (0..=deg).map(|k| BigRational::from_integer(BigInt::from(k as i64))).collect();
    let vals: Vec<BigRational> = pts
        .iter()
        .map(|x| {
            let rows: Vec<Vec<Scalar>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| {
                            let mut v = -q[r * n + c].clone();
                            if r == c {
                                v += x;
                            }
                            Scalar::Rational(v)
                        })
                        .collect()
                })
                .collect();
            let d = if rows.is_empty() { Scalar::one() } else { determinant(&Matrix::from_rows(rows)).expect("exact") };
            let d = d.as_rational().cloned().expect("rational determinant");
            if (i + j) % 2 == 1 {
                -d
            } else {
                d
            }
        })
        .collect();
    Poly::interpolate(&pts, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_trivial_nullspace() {
        assert!(nullspace(&Matrix::identity(2)).unwrap().is_empty());
    }

    #[test]
    fn nullspace_of_row() {
        let m = Matrix::from_ints(&[vec![1, -1]]);
        assert_eq!(nullspace(&m).unwrap(), vec![vec![Scalar::one(), Scalar::one()]]);
    }

    #[test]
    fn nullspace_vectors_are_killed() {
        let m = Matrix::from_ints(&[vec![1, 2, 3, 4], vec![2, 4, 6, 8], vec![0, 1, 1, 0]]);
        let ns = nullspace(&m).unwrap();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).unwrap().iter().all(Scalar::is_zero));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_ints(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(3));
        assert_eq!(inverse(&Matrix::from_ints(&[vec![1, 2], vec![2, 4]])), Err(LinalgError::Singular));
    }

    #[test]
    fn solve_diagonal() {
        let m = Matrix::from_ints(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(solve_linear(&m, &[Scalar::int(2), Scalar::int(3)]).unwrap(), vec![Scalar::one(), Scalar::one()]);
        let s = Matrix::from_ints(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(solve_linear(&s, &[Scalar::one(), Scalar::one()]), Err(LinalgError::Singular));
    }

    #[test]
    fn determinant_with_swap() {
        let m = Matrix::from_ints(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(determinant(&m).unwrap(), Scalar::int(-1));
        let m = Matrix::from_ints(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        assert_eq!(determinant(&m).unwrap(), Scalar::int(18));
    }

    #[test]
    fn swap_eigenvectors() {
        let m = Matrix::from_ints(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(certified_eigenvector(&m, &Scalar::one(), 0).unwrap(), vec![Scalar::one(), Scalar::one()]);
        assert_eq!(certified_eigenvector(&m, &Scalar::int(-1), 0).unwrap(), vec![Scalar::one(), Scalar::int(-1)]);
        assert_eq!(certified_eigenvector(&m, &Scalar::int(2), 0), Err(LinalgError::NotAnEigenvalue));
        let z = Matrix::zeros(2, 2);
        assert_eq!(certified_eigenvector(&z, &Scalar::zero(), 0), Err(LinalgError::EigenspaceNotOneDimensional(2)));
    }

    #[test]
    fn adjugate_eigenvector_matches_exact() {
        let m = Matrix::from_ints(&[vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]]);
        let r2 = Scalar::int(2).exact_sqrt_or_adjoin(3).unwrap();
        let a = eigenvector_by_adjugate(&m, &r2, 0).unwrap();
        let b = certified_eigenvector(&m, &r2, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(b[1], r2);
    }

    #[test]
    fn interval_rank_matches() {
        let m = Matrix::from_ints(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(interval_rank(&m, 128), rank(&m).unwrap());
    }
}

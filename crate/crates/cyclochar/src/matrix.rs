//! Dense matrices over [`Scalar`], plus the few numerical routines
//! (Hermitian eigenvalues, numerical rank, operator square roots) the
//! operator-theoretic modules need.

use crate::scalar::{sum_scalars, Scalar};
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Scalar>, // row-major
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_c64(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        Self::from_fn(rows, cols, |i, j| Scalar::float(f(i, j)))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a.mul(&other[(k, j)]);
                    out[(i, j)] = out[(i, j)].add(&p);
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: usize) -> Mat {
        assert!(self.is_square());
        let mut acc = Mat::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn trace(&self) -> Scalar {
        assert!(self.is_square());
        sum_scalars((0..self.rows).map(|i| self[(i, i)].clone()).collect())
    }

    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn commutator(&self, other: &Mat) -> Mat {
        self.mul(other).sub(&other.mul(self))
    }

    /// Graded commutator self·other − (−1)^deg other·self.
    pub fn graded_commutator(&self, other: &Mat, deg_other: usize) -> Mat {
        if deg_other % 2 == 0 {
            self.commutator(other)
        } else {
            self.mul(other).add(&other.mul(self))
        }
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_c64())
    }

    pub fn from_na(m: &DMatrix<Complex64>) -> Mat {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| Scalar::float(m[(i, j)]))
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(Scalar::abs).fold(0.0, f64::max)
    }

    pub fn max_dist(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.dist(b))
            .fold(0.0, f64::max)
    }

    /// Spectral (operator 2-) norm.
    pub fn norm2(&self) -> f64 {
        let sv = self.to_c64().singular_values();
        sv.iter().fold(0.0f64, |a, b| a.max(*b))
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let m = self.to_c64();
        let eig = m.symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|v| *v).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Numerical rank against an absolute singular-value cutoff.
    pub fn numerical_rank(&self, cutoff: f64) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let sv = self.to_c64().singular_values();
        sv.iter().filter(|&&s| s > cutoff).count()
    }

    /// Positive-semidefinite square root of a Hermitian PSD matrix (negative
    /// eigenvalues within `clip` of zero are clipped).
    pub fn psd_sqrt(&self, clip: f64) -> Mat {
        let m = self.to_c64();
        let eig = m.symmetric_eigen();
        let n = self.rows;
        let mut d = DMatrix::<Complex64>::zeros(n, n);
        for (i, ev) in eig.eigenvalues.iter().enumerate() {
            assert!(
                *ev > -clip,
                "psd_sqrt: matrix has a substantially negative eigenvalue {ev}"
            );
            d[(i, i)] = Complex::new(ev.max(0.0).sqrt(), 0.0);
        }
        let q = eig.eigenvectors;
        let out = &q * d * q.adjoint();
        Mat::from_na(&out)
    }

    /// Select a rectangular block by row/column index sets.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Kronecker product (amplification by matrix factors).
    pub fn kron(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self[(i, j)].is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] =
                            self[(i, j)].mul(&other[(k, l)]);
                    }
                }
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_matrix_product() {
        let a = Mat::from_fn(2, 2, |i, j| Scalar::int((i * 2 + j) as i64));
        let b = a.mul(&a);
        // [[0,1],[2,3]]^2 = [[2,3],[6,11]]
        assert!(b[(0, 0)].eq_within(&Scalar::int(2), 0.0));
        assert!(b[(1, 1)].eq_within(&Scalar::int(11), 0.0));
        assert!(a.pow(2).max_dist(&b) == 0.0);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_x() {
        let m = Mat::from_fn(2, 2, |i, j| if i != j { Scalar::one() } else { Scalar::zero() });
        let ev = m.hermitian_eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                Scalar::real(1.0 + i as f64)
            } else {
                Scalar::real(0.3)
            }
        });
        let m = m.mul(&m); // PSD
        let s = m.psd_sqrt(1e-10);
        assert!(s.mul(&s).max_dist(&m) < 1e-10);
    }

    #[test]
    fn rank_counts_singular_values() {
        let mut m = Mat::zeros(3, 3);
        m[(0, 0)] = Scalar::one();
        m[(1, 1)] = Scalar::real(2.0);
        assert_eq!(m.numerical_rank(1e-9), 2);
    }
}

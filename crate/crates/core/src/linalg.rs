//! Dense complex matrices and the Hermitian factorizations used by the
//! capacity and estimation kernels.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        Ok(Self { rows, cols: columns.len(), data: columns.concat() })
    }

    pub fn from_column_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[Complex<T>] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.scale(s)).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for j in 0..o.cols {
            for k in 0..self.cols {
                let b = o[(k, j)];
                if b.is_zero() {
                    continue;
                }
                let a = self.column(k);
                let dst = out.column_mut(j);
                for (d, &x) in dst.iter_mut().zip(a) {
                    *d = *d + x * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::Dimension("shape mismatch in subtraction".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a - *b).collect(),
        })
    }

    pub fn cast<U: Scalar>(&self) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[c * self.rows + r]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[c * self.rows + r]
    }
}

impl CMatrix<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex<f64>> {
        nalgebra::DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<Complex<f64>>) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), data: m.as_slice().to_vec() }
    }
}

/// `Σ conj(a_i) b_i`.
#[inline]
pub fn dotc<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Scalar>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Hermitian Gram matrix `HᴴH` (cols × cols), row-major packed.
pub fn gram_columns<T: Scalar>(h: &CMatrix<T>) -> Vec<Complex<T>> {
    let k = h.cols();
    let mut g = vec![Complex::zero(); k * k];
    for i in 0..k {
        for j in i..k {
            let v = dotc(h.column(i), h.column(j));
            g[i * k + j] = v;
            g[j * k + i] = v.conj();
        }
    }
    g
}

/// Hermitian Gram matrix `HHᴴ` (rows × rows), row-major packed.
pub fn gram_rows<T: Scalar>(h: &CMatrix<T>) -> Vec<Complex<T>> {
    let n = h.rows();
    let mut g = vec![Complex::zero(); n * n];
    for c in 0..h.cols() {
        let col = h.column(c);
        for i in 0..n {
            let a = col[i];
            if a.is_zero() {
                continue;
            }
            for j in i..n {
                g[i * n + j] = g[i * n + j] + a * col[j].conj();
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i].conj();
        }
    }
    g
}

/// In-place lower Cholesky factor of a Hermitian positive-definite matrix
/// (row-major, `n × n`). Returns `None` if a pivot is not positive.
pub fn cholesky_in_place<T: Scalar>(a: &mut [Complex<T>], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d = d - a[j * n + k].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let ljj = d.sqrt();
        a[j * n + j] = Complex::new(ljj, T::zero());
        let inv = T::one() / ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s.scale(inv);
        }
    }
    Some(())
}

/// Natural log-determinant of a Hermitian positive-definite matrix, via Cholesky.
pub fn ln_det_hpd<T: Scalar>(mut a: Vec<Complex<T>>, n: usize) -> Option<T> {
    cholesky_in_place(&mut a, n)?;
    let half = (0..n).fold(T::zero(), |acc, i| acc + a[i * n + i].re.ln());
    Some(half + half)
}

/// `log₂ det(I + ρ H Hᴴ)`, factorizing whichever Gram side is smaller.
pub fn log2det_identity_plus<T: Scalar>(h: &CMatrix<T>, rho: T) -> T {
    if h.rows() == 0 || h.cols() == 0 {
        return T::zero();
    }
    let (mut g, n) = if h.cols() <= h.rows() { (gram_columns(h), h.cols()) } else { (gram_rows(h), h.rows()) };
    for z in g.iter_mut() {
        *z = z.scale(rho);
    }
    for i in 0..n {
        g[i * n + i] = g[i * n + i] + T::one();
    }
    let ln = ln_det_hpd(g, n).expect("I + ρG is positive definite for ρ ≥ 0");
    ln / T::LN_2()
}

/// Solves `A x = b` for Hermitian positive-definite `A` given its lower
/// Cholesky factor `l` (row-major).
pub fn cholesky_solve<T: Scalar>(l: &[Complex<T>], n: usize, b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i].conj() * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    y
}

/// Inverse of a Hermitian positive-definite matrix (row-major).
pub fn hpd_inverse<T: Scalar>(a: &[Complex<T>], n: usize) -> Option<Vec<Complex<T>>> {
    let mut l = a.to_vec();
    cholesky_in_place(&mut l, n)?;
    let mut inv = vec![Complex::zero(); n * n];
    let mut e = vec![Complex::zero(); n];
    for c in 0..n {
        e.iter_mut().for_each(|z| *z = Complex::zero());
        e[c] = Complex::one();
        let x = cholesky_solve(&l, n, &e);
        for r in 0..n {
            inv[r * n + c] = x[r];
        }
    }
    Some(inv)
}

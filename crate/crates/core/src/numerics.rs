//! Dense complex matrix kernels for small (≤ ~20×20) problems.
//!
//! Everything here is a pure function on immutable inputs. The decompositions
//! are cyclic Jacobi methods: one-sided for the SVD, two-sided for Hermitian
//! eigenproblems. Matrices carrying the real marker are routed through an
//! all-`f64` path, which matters for the larger coordinate systems assembled
//! by the isotropy analysis.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Relative rank tolerance used when callers do not supply one.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Residual norm below which `orthonormalize` drops a vector.
pub const ORTHO_DROP_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("non-finite entry produced by {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Dense row-major complex matrix.
///
/// `real` marks matrices whose entries are known to be real; products and sums
/// of real matrices stay real.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    real: bool,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}{}", self.rows, self.cols, if self.real { " (real)" } else { "" })?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    if self.real {
                        format!("{:9.5}", z.re)
                    } else {
                        format!("{:8.4}{:+8.4}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols], real: true }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// The matrix unit with a single one at `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        m.data[i * n + j] = C64::new(1.0, 0.0);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        let real = data.iter().all(|z| z.im == 0.0);
        Matrix { rows, cols, data, real }
    }

    pub fn from_real_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Matrix::from_fn(rows, cols, |i, j| C64::new(f(i, j), 0.0))
    }

    /// Builds from row-major complex entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NumericsError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let real = data.iter().all(|z| z.im == 0.0);
        Ok(Matrix { rows, cols, data, real })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Matrix::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Column vector.
    pub fn column(entries: &[C64]) -> Self {
        Matrix::from_fn(entries.len(), 1, |i, _| entries[i])
    }

    pub fn real_column(entries: &[f64]) -> Self {
        Matrix::from_real_fn(entries.len(), 1, |i, _| entries[i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        if value.im != 0.0 {
            self.real = false;
        }
        self.data[i * self.cols + j] = value;
    }

    /// Real parts in row-major order.
    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    /// Re-derives the real marker from the entries.
    pub fn refresh_real_marker(mut self) -> Self {
        self.real = self.data.iter().all(|z| z.im == 0.0);
        self
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
            real: self.real,
        }
    }

    pub fn scale_c(&self, s: C64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
            real: self.real && s.im == 0.0,
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Matrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
        self.real &= other.real;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj()).with_marker(self.real)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)]).with_marker(self.real)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
            real: self.real,
        }
    }

    fn with_marker(mut self, real: bool) -> Self {
        self.real = real || self.real;
        self
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix product, checked.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(NumericsError::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Matrix) -> Matrix {
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = Matrix::zeros(n, m);
        out.real = self.real && other.real;
        if out.real {
            for i in 0..n {
                for l in 0..k {
                    let a = self.data[i * k + l].re;
                    if a == 0.0 {
                        continue;
                    }
                    let row = &other.data[l * m..(l + 1) * m];
                    let dst = &mut out.data[i * m..(i + 1) * m];
                    for (d, b) in dst.iter_mut().zip(row) {
                        d.re += a * b.re;
                    }
                }
            }
        } else {
            for i in 0..n {
                for l in 0..k {
                    let a = self.data[i * k + l];
                    if a.re == 0.0 && a.im == 0.0 {
                        continue;
                    }
                    let row = &other.data[l * m..(l + 1) * m];
                    let dst = &mut out.data[i * m..(i + 1) * m];
                    for (d, b) in dst.iter_mut().zip(row) {
                        *d += a * b;
                    }
                }
            }
        }
        out
    }

    /// `XY - YX`, checked.
    pub fn commutator(&self, other: &Matrix) -> Result<Matrix> {
        if !self.is_square() || (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(NumericsError::Dimension(format!(
                "commutator of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(&self.mul_unchecked(other) - &other.mul_unchecked(self))
    }

    /// Copy of column `j` as a column vector.
    pub fn col(&self, j: usize) -> Matrix {
        Matrix::from_fn(self.rows, 1, |i, _| self[(i, j)]).with_marker(self.real)
    }

    /// Frobenius inner product `Re <self, other>`.
    pub fn real_dot(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }

    /// Square block `[r0, r0 + n) x [c0, c0 + n)` copied out.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)]).with_marker(self.real)
    }

    /// Embeds `self` into an `n x n` zero matrix at offset `(off, off)`.
    pub fn padded(&self, n: usize, off: usize) -> Matrix {
        let mut out = Matrix::zeros(n, n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[(off + i) * n + off + j] = self[(i, j)];
            }
        }
        out.real = self.real;
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
            real: self.real && rhs.real,
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
            real: self.real && rhs.real,
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Matrix> for Matrix {
    fn sub_assign(&mut self, rhs: &Matrix) {
        self.axpy(-1.0, rhs);
    }
}

fn require_square(a: &Matrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(NumericsError::Dimension(format!("{what} needs a square matrix, got {}x{}", a.rows, a.cols)))
    }
}

fn require_finite(a: Matrix, what: &'static str) -> Result<Matrix> {
    if a.is_finite() {
        Ok(a)
    } else {
        Err(NumericsError::NonFinite(what))
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The input is scaled so that its 1-norm is at most 1/4; the series is summed
/// until the next term is below 1e-18 of the partial sum.
pub fn mat_exp(a: &Matrix) -> Result<Matrix> {
    require_square(a, "mat_exp")?;
    let n = a.rows;
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(NumericsError::NonFinite("mat_exp"));
    }
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        squarings += 1;
        scale *= 0.5;
    }
    let b = a.scale(scale);
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=40 {
        term = (&term * &b).scale(1.0 / k as f64);
        sum += &term;
        if term.max_abs() <= 1e-18 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    require_finite(sum, "mat_exp")
}

/// Eigendecomposition `A = V diag(values) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: Matrix,
}

/// Two-sided cyclic Jacobi on a Hermitian matrix. Only the Hermitian part of
/// the input is used.
pub fn hermitian_eigen(a: &Matrix) -> Result<HermitianEigen> {
    require_square(a, "hermitian_eigen")?;
    let n = a.rows;
    let (values, vectors) = if a.real {
        let mut m: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                0.5 * (a[(i, j)].re + a[(j, i)].re)
            })
            .collect();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        jacobi_symmetric_real(n, &mut m, &mut v);
        let vals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
        (vals, Matrix::from_real(n, n, &v)?)
    } else {
        let mut m: Vec<C64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                (a[(i, j)] + a[(j, i)].conj()) * 0.5
            })
            .collect();
        let mut v = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            v[i * n + i] = C64::new(1.0, 0.0);
        }
        jacobi_hermitian_complex(n, &mut m, &mut v);
        let vals: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
        (vals, Matrix::from_vec(n, n, v)?)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = Matrix::from_fn(n, n, |i, j| vectors[(i, order[j])]).with_marker(vectors.real);
    if sorted_values.iter().any(|x| !x.is_finite()) || !sorted_vectors.is_finite() {
        return Err(NumericsError::NonFinite("hermitian_eigen"));
    }
    Ok(HermitianEigen { values: sorted_values, vectors: sorted_vectors })
}

/// Symmetric 2x2 Schur rotation: returns `(c, s)` with `[[c, s], [-s, c]]`
/// diagonalizing `[[app, apq], [apq, aqq]]`.
fn sym_schur2(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

fn off_norm_real(n: usize, m: &[f64]) -> (f64, f64) {
    let mut off = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = m[i * n + j] * m[i * n + j];
            total += x;
            if i != j {
                off += x;
            }
        }
    }
    (off.sqrt(), total.sqrt())
}

fn jacobi_symmetric_real(n: usize, m: &mut [f64], v: &mut [f64]) {
    for _ in 0..JACOBI_MAX_SWEEPS {
        let (off, total) = off_norm_real(n, m);
        if off <= 1e-15 * total || total == 0.0 {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 || apq.abs() <= 1e-18 * total {
                    continue;
                }
                let (c, s) = sym_schur2(m[p * n + p], m[q * n + q], apq);
                // columns
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                // rows
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
}

fn jacobi_hermitian_complex(n: usize, m: &mut [C64], v: &mut [C64]) {
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = m[i * n + j].norm_sqr();
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        let (off, total) = (off.sqrt(), total.sqrt());
        if off <= 1e-15 * total || total == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m[p * n + q];
                let gabs = g.norm();
                if gabs <= 1e-300 || gabs <= 1e-18 * total {
                    continue;
                }
                // U = diag(1, phase) * [[c, s], [-s, c]] with phase = conj(g)/|g|
                let phase = g.conj() / gabs;
                let (c, s) = sym_schur2(m[p * n + p].re, m[q * n + q].re, gabs);
                let u00 = C64::new(c, 0.0);
                let u01 = C64::new(s, 0.0);
                let u10 = -phase * s;
                let u11 = phase * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp * u00 + akq * u10;
                    m[k * n + q] = akp * u01 + akq * u11;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = u00.conj() * apk + u10.conj() * aqk;
                    m[q * n + k] = u01.conj() * apk + u11.conj() * aqk;
                }
                m[p * n + q] = C64::new(0.0, 0.0);
                m[q * n + p] = C64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * u00 + vkq * u10;
                    v[k * n + q] = vkp * u01 + vkq * u11;
                }
            }
        }
    }
}

/// Thin SVD from one-sided Jacobi: `A V = U diag(sigma)`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Descending.
    pub sigma: Vec<f64>,
    /// `rows x cols`; columns belonging to zero singular values are zero.
    pub u: Matrix,
    /// `cols x cols` unitary.
    pub v: Matrix,
}

/// One-sided cyclic Jacobi SVD.
pub fn svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows, a.cols);
    if a.real {
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)].re).collect()).collect();
        let mut vcols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        one_sided_real(&mut cols, &mut vcols);
        let sig: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
        let sigma: Vec<f64> = order.iter().map(|&j| sig[j]).collect();
        let u = Matrix::from_real_fn(m, n, |i, k| {
            let j = order[k];
            if sig[j] > 0.0 {
                cols[j][i] / sig[j]
            } else {
                0.0
            }
        });
        let v = Matrix::from_real_fn(n, n, |i, k| vcols[order[k]][i]);
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(NumericsError::NonFinite("svd"));
        }
        return Ok(Svd { sigma, u, v });
    }
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut vcols: Vec<Vec<C64>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { one } else { zero }).collect()).collect();
    one_sided_complex(&mut cols, &mut vcols);
    let sig: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| sig[j]).collect();
    let u = Matrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if sig[j] > 0.0 {
            cols[j][i] / sig[j]
        } else {
            zero
        }
    });
    let v = Matrix::from_fn(n, n, |i, k| vcols[order[k]][i]);
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::NonFinite("svd"));
    }
    Ok(Svd { sigma, u, v })
}

fn one_sided_real(cols: &mut [Vec<f64>], vcols: &mut [Vec<f64>]) {
    let n = cols.len();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s) = sym_schur2(alpha, beta, gamma);
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
                let (left, right) = vcols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            return;
        }
    }
}

fn one_sided_complex(cols: &mut [Vec<C64>], vcols: &mut [Vec<C64>]) {
    let n = cols.len();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let gabs = gamma.norm();
                if alpha == 0.0 || beta == 0.0 || gabs <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / gabs;
                let (c, s) = sym_schur2(alpha, beta, gabs);
                let u00 = C64::new(c, 0.0);
                let u01 = C64::new(s, 0.0);
                let u10 = -phase * s;
                let u11 = phase * c;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = a * u00 + b * u10;
                    *y = a * u01 + b * u11;
                }
                let (left, right) = vcols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = a * u00 + b * u10;
                    *y = a * u01 + b * u11;
                }
            }
        }
        if !rotated {
            return;
        }
    }
}

/// Numerical rank with singular values above `tol * sigma_max`.
pub fn rank(a: &Matrix, tol: f64) -> Result<usize> {
    let s = svd(a)?;
    let top = s.sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.sigma.iter().filter(|&&x| x > tol * top).count())
}

/// Orthonormal basis (as column vectors) of `{v : |Mv| <= tol |M|}`.
pub fn nullspace(a: &Matrix, tol: f64) -> Result<Vec<Matrix>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumericsError::Dimension("nullspace tolerance must be positive".into()));
    }
    let s = svd(a)?;
    let top = s.sigma.first().copied().unwrap_or(0.0);
    Ok((0..a.cols)
        .filter(|&j| top == 0.0 || s.sigma[j] <= tol * top)
        .map(|j| s.v.col(j))
        .collect())
}

/// Gram–Schmidt with one re-orthogonalization pass under a caller-supplied
/// real inner product. Vectors whose residual falls to `ORTHO_DROP_TOL` of
/// their original norm (or below) are dropped.
pub fn orthonormalize(vectors: &[Matrix], inner: impl Fn(&Matrix, &Matrix) -> f64) -> Vec<Matrix> {
    let mut out: Vec<Matrix> = Vec::new();
    for v in vectors {
        let original = inner(v, v).max(0.0).sqrt();
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = inner(b, &w);
                w.axpy(-c, b);
            }
        }
        let norm = inner(&w, &w).max(0.0).sqrt();
        if norm <= ORTHO_DROP_TOL * original.max(1.0) {
            continue;
        }
        out.push(w.scale(1.0 / norm));
    }
    out
}

/// LU factorization with partial pivoting; returns the factors packed in one
/// matrix plus the permutation sign, or `Singular`.
fn lu(a: &Matrix) -> Result<(Vec<C64>, Vec<usize>, f64)> {
    let n = a.rows;
    let mut m = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, m[i * n + k].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= 1e-14 * scale {
            return Err(NumericsError::Singular);
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let d = m[k * n + k];
        for i in (k + 1)..n {
            let f = m[i * n + k] / d;
            m[i * n + k] = f;
            for j in (k + 1)..n {
                let t = m[k * n + j];
                m[i * n + j] -= f * t;
            }
        }
    }
    Ok((m, perm, sign))
}

pub fn determinant(a: &Matrix) -> Result<C64> {
    require_square(a, "determinant")?;
    match lu(a) {
        Ok((m, _, sign)) => {
            let n = a.rows;
            Ok((0..n).map(|i| m[i * n + i]).product::<C64>() * sign)
        }
        Err(NumericsError::Singular) => Ok(C64::new(0.0, 0.0)),
        Err(e) => Err(e),
    }
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    require_square(a, "inverse")?;
    let n = a.rows;
    let (m, perm, _) = lu(a)?;
    let mut inv = Matrix::zeros(n, n);
    inv.real = false;
    for col in 0..n {
        // solve L U x = P e_col
        let mut x: Vec<C64> = (0..n).map(|i| if perm[i] == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect();
        for i in 0..n {
            for k in 0..i {
                let t = m[i * n + k] * x[k];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = m[i * n + k] * x[k];
                x[i] -= t;
            }
            x[i] /= m[i * n + i];
        }
        for (i, xi) in x.iter().enumerate() {
            inv.data[i * n + col] = *xi;
        }
    }
    let inv = inv.refresh_real_marker();
    require_finite(inv, "inverse")
}

//! Matrix Lie algebras: the trace form, brackets, adjoint action, subspaces
//! and the reductive split `g = h + q`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{self, mat_exp, orthonormalize, Matrix, C64};

/// Relative tolerance for subspace membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn check_shape(x: &Matrix, y: &Matrix) -> Result<()> {
    if !x.is_square() || x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::Shape(format!(
            "{}x{} against {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(())
}

/// `XY - YX`.
pub fn bracket(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    check_shape(x, y)?;
    Ok(x.commutator(y)?)
}

/// The invariant form `-Re tr(XY)`.
pub fn inner(x: &Matrix, y: &Matrix) -> Result<f64> {
    check_shape(x, y)?;
    Ok(form(x, y))
}

pub(crate) fn form(x: &Matrix, y: &Matrix) -> f64 {
    let n = x.rows();
    let (xd, yd) = (x.data(), y.data());
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = xd[i * n + j];
            let b = yd[j * n + i];
            acc += a.re * b.re - a.im * b.im;
        }
    }
    -acc
}

pub(crate) fn comm(x: &Matrix, y: &Matrix) -> Matrix {
    &(x * y) - &(y * x)
}

/// `g X g^{-1}` for an invertible `g`.
pub fn adjoint(g: &Matrix, x: &Matrix) -> Result<Matrix> {
    check_shape(g, x)?;
    let inv = numerics::inverse(g)?;
    Ok(&(g * x) * &inv)
}

/// `g X g*`, the adjoint action of a unitary `g`.
pub fn adjoint_unitary(g: &Matrix, x: &Matrix) -> Matrix {
    &(g * x) * &g.adjoint()
}

/// Orthonormal (under the trace form) family of matrices of a common size.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient_size: usize,
    basis: Vec<Matrix>,
}

impl Subspace {
    pub fn zero(ambient_size: usize) -> Self {
        Subspace { ambient_size, basis: Vec::new() }
    }

    /// Orthonormalizes the spanning set; linearly dependent members are dropped.
    pub fn from_spanning(ambient_size: usize, mats: &[Matrix]) -> Result<Self> {
        for m in mats {
            if m.rows() != ambient_size || m.cols() != ambient_size {
                return Err(Error::Shape(format!(
                    "{}x{} matrix in a space of {ambient_size}x{ambient_size} matrices",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Subspace { ambient_size, basis: orthonormalize(mats, form) })
    }

    pub fn ambient_size(&self) -> usize {
        self.ambient_size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn coords(&self, x: &Matrix) -> Vec<f64> {
        self.basis.iter().map(|b| form(b, x)).collect()
    }

    pub fn combine(&self, coeffs: &[f64]) -> Matrix {
        let mut out = Matrix::zeros(self.ambient_size, self.ambient_size);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            if c != 0.0 {
                out.axpy(c, b);
            }
        }
        out
    }

    pub fn project(&self, x: &Matrix) -> Matrix {
        self.combine(&self.coords(x))
    }

    /// `|x - Px| / |x|` in the Frobenius norm; zero for `x = 0`.
    pub fn relative_residual(&self, x: &Matrix) -> f64 {
        let norm = x.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        x.distance(&self.project(x)) / norm
    }

    pub fn contains(&self, x: &Matrix) -> bool {
        self.relative_residual(x) < MEMBERSHIP_TOL
    }

    /// Largest relative residual of `other`'s basis off this subspace.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        other.basis.iter().map(|b| self.relative_residual(b)).fold(0.0, f64::max)
    }

    /// Orthogonal complement of `self` inside `ambient`.
    pub fn complement_in(&self, ambient: &Subspace) -> Subspace {
        let candidates: Vec<Matrix> = ambient.basis.iter().map(|b| b - &self.project(b)).collect();
        let mut all = self.basis.clone();
        all.extend(candidates);
        let ortho = orthonormalize(&all, form);
        Subspace { ambient_size: self.ambient_size, basis: ortho[self.dim()..].to_vec() }
    }

    /// Direct sum with `other` (re-orthonormalized).
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace { ambient_size: self.ambient_size, basis: orthonormalize(&all, form) }
    }

    /// Maps every basis element through `f` and spans the result.
    pub fn map(&self, f: impl Fn(&Matrix) -> Matrix) -> Result<Subspace> {
        let mats: Vec<Matrix> = self.basis.iter().map(f).collect();
        Subspace::from_spanning(self.ambient_size, &mats)
    }
}

/// Compact real form given by an orthonormal basis of ambient matrices.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    name: String,
    space: Subspace,
}

impl LieAlgebraBasis {
    pub fn new(name: impl Into<String>, ambient_size: usize, spanning: &[Matrix]) -> Result<Self> {
        Ok(LieAlgebraBasis { name: name.into(), space: Subspace::from_spanning(ambient_size, spanning)? })
    }

    pub fn from_subspace(name: impl Into<String>, space: Subspace) -> Self {
        LieAlgebraBasis { name: name.into(), space }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn ambient_size(&self) -> usize {
        self.space.ambient_size()
    }

    pub fn basis(&self) -> &[Matrix] {
        self.space.basis()
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// True when every basis matrix has real entries.
    pub fn is_real(&self) -> bool {
        self.basis().iter().all(Matrix::is_real)
    }

    /// Largest distance of `[E_a, E_b]` from the span, over the orthonormal
    /// basis.
    pub fn closure_residual(&self) -> f64 {
        let b = self.basis();
        let mut worst: f64 = 0.0;
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                let c = comm(&b[i], &b[j]);
                worst = worst.max(c.distance(&self.space.project(&c)));
            }
        }
        worst
    }

    /// Largest `|E + E*|` over the basis.
    pub fn skew_residual(&self) -> f64 {
        self.basis().iter().map(|e| (e + &e.adjoint()).frobenius_norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Gram matrix of the trace form.
    pub fn gram_min_eigenvalue(&self) -> Result<f64> {
        let b = self.basis();
        if b.is_empty() {
            return Ok(1.0);
        }
        let gram = Matrix::from_real_fn(b.len(), b.len(), |i, j| form(&b[i], &b[j]));
        Ok(numerics::hermitian_eigen(&gram)?.values[0])
    }
}

/// Unit-norm Gaussian combination of the basis.
pub fn random_element<R: Rng + ?Sized>(space: &Subspace, rng: &mut R) -> Matrix {
    if space.dim() == 0 {
        return Matrix::zeros(space.ambient_size(), space.ambient_size());
    }
    let coeffs: Vec<f64> = (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let scaled: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
    space.combine(&scaled)
}

/// `q`, the trace-form complement of `h` in `g`.
pub fn reductive_split(g: &LieAlgebraBasis, h: &LieAlgebraBasis) -> Result<Subspace> {
    if g.ambient_size() != h.ambient_size() {
        return Err(Error::Shape(format!(
            "{} acts on {} dimensions, {} on {}",
            g.name(),
            g.ambient_size(),
            h.name(),
            h.ambient_size()
        )));
    }
    let residual = g.space().containment_residual(h.space());
    if residual >= MEMBERSHIP_TOL {
        return Err(Error::Containment { what: h.name().to_string(), within: g.name().to_string(), residual });
    }
    Ok(h.space().complement_in(g.space()))
}

/// Stacks the real and imaginary parts of a matrix into one column slice.
pub(crate) fn realify_into(m: &Matrix, out: &mut Vec<f64>) {
    out.extend(m.data().iter().map(|z| z.re));
    if !m.is_real() {
        out.extend(m.data().iter().map(|z| z.im));
    } else {
        out.extend(std::iter::repeat_n(0.0, m.data().len()));
    }
}

/// `{X in k : [X, A] = 0 for all A in a}`.
pub fn centralizer(a: &Subspace, k: &LieAlgebraBasis) -> Result<Subspace> {
    if a.ambient_size() != k.ambient_size() {
        return Err(Error::Shape("centralizer: ambient sizes differ".into()));
    }
    if a.dim() == 0 || k.dim() == 0 {
        return Ok(k.space().clone());
    }
    let n = k.ambient_size();
    let rows = a.dim() * 2 * n * n;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k.dim());
    for kb in k.basis() {
        let mut col = Vec::with_capacity(rows);
        for ab in a.basis() {
            realify_into(&comm(kb, ab), &mut col);
        }
        columns.push(col);
    }
    let system = Matrix::from_real_fn(rows, k.dim(), |i, j| columns[j][i]);
    let null = numerics::nullspace(&system, numerics::DEFAULT_RANK_TOL)?;
    let mats: Vec<Matrix> = null.iter().map(|v| k.space().combine(&v.real_parts())).collect();
    Subspace::from_spanning(n, &mats)
}

/// Tests `Ad(exp h)(a) = p` as sets: at random base points `(k, A)` with
/// `k = exp(xi)`, `xi` in the span of `h_basis`, `A` in `a`, the differential of
/// `(k, A) -> Ad(k)A` must have rank `dim p` (SVD tolerance 1e-8).
pub fn ad_span_test<R: Rng + ?Sized>(
    h_basis: &[Matrix],
    a: &Subspace,
    p: &Subspace,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    if samples < p.dim() {
        return Err(Error::InvalidInput(format!("ad_span_test needs at least {} samples", p.dim())));
    }
    if p.dim() == 0 {
        return Ok(true);
    }
    if a.dim() == 0 {
        return Ok(false);
    }
    let n = p.ambient_size();
    let h_space = Subspace::from_spanning(n, h_basis)?;
    for _ in 0..samples {
        let xi = random_element(&h_space, rng).scale(2.0);
        let k = mat_exp(&xi)?;
        let base = adjoint_unitary(&k, &random_element(a, rng));
        let mut vectors: Vec<Vec<f64>> = a.basis().iter().map(|ab| p.coords(&adjoint_unitary(&k, ab))).collect();
        vectors.extend(h_basis.iter().map(|e| p.coords(&comm(e, &base))));
        let m = Matrix::from_real_fn(p.dim(), vectors.len(), |i, j| vectors[j][i]);
        if numerics::rank(&m, 1e-8)? == p.dim() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Largest `|[X, A]|` over the bases of two subspaces.
pub fn max_bracket_norm(x: &Subspace, y: &Subspace) -> f64 {
    let mut worst: f64 = 0.0;
    for a in x.basis() {
        for b in y.basis() {
            worst = worst.max(comm(a, b).frobenius_norm());
        }
    }
    worst
}

/// Largest norm of the `h`-component of `[E_h, E_q]` over basis pairs.
pub fn q_invariance_residual(h: &Subspace, q: &Subspace) -> f64 {
    let mut worst: f64 = 0.0;
    for a in h.basis() {
        for b in q.basis() {
            worst = worst.max(h.project(&comm(a, b)).frobenius_norm());
        }
    }
    worst
}

/// The matrix `E_{i,j}` scaled by a complex factor.
pub(crate) fn e(n: usize, i: usize, j: usize, z: C64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m.set(i, j, z);
    m
}

/// Standard spanning set of `su(n)`.
pub fn su(n: usize) -> Result<LieAlgebraBasis> {
    let one = C64::new(1.0, 0.0);
    let i_ = C64::new(0.0, 1.0);
    let mut mats = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            mats.push(&e(n, p, q, one) - &e(n, q, p, one));
            mats.push(&e(n, p, q, i_) + &e(n, q, p, i_));
        }
    }
    for p in 0..n.saturating_sub(1) {
        mats.push(&e(n, p, p, i_) - &e(n, p + 1, p + 1, i_));
    }
    LieAlgebraBasis::new(format!("su({n})"), n, &mats)
}

/// Standard spanning set of `so(n)`.
pub fn so(n: usize) -> Result<LieAlgebraBasis> {
    let one = C64::new(1.0, 0.0);
    let mut mats = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            mats.push(&e(n, p, q, one) - &e(n, q, p, one));
        }
    }
    LieAlgebraBasis::new(format!("so({n})"), n, &mats)
}

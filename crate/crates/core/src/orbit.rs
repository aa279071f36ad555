//! Local solvers on adjoint orbits `g -> Ad(g)Y`, with `g` moved by left
//! exponentials of a fixed generator family.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::lie::{comm, form, Subspace};
use crate::numerics::{svd, Matrix};

const PINV_RCOND: f64 = 1e-10;
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-6;
const MAX_STEP_NORM: f64 = 2.0;

/// Residual `P_V(Ad(g)Y + offset)` in orthonormal coordinates of `V`.
pub(crate) struct OrbitTarget<'a> {
    pub generators: &'a [Matrix],
    pub space: &'a Subspace,
    pub y: &'a Matrix,
    pub offset: Option<&'a Matrix>,
}

pub(crate) struct Outcome {
    pub element: GroupElement,
    /// Euclidean norm of the residual coordinates.
    #[cfg_attr(not(test), allow(dead_code))]
    pub residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl OrbitTarget<'_> {
    fn evaluate(&self, g: &GroupElement) -> (Matrix, Vec<f64>) {
        let w = g.act(self.y);
        let r = match self.offset {
            Some(off) => self.space.coords(&(&w + off)),
            None => self.space.coords(&w),
        };
        (w, r)
    }

    fn combine(&self, coeffs: &[f64], scale: f64) -> Matrix {
        let n = self.y.rows();
        let mut xi = Matrix::zeros(n, n);
        for (e, &c) in self.generators.iter().zip(coeffs) {
            if c != 0.0 {
                xi.axpy(c * scale, e);
            }
        }
        xi
    }

    /// Gauss–Newton with a truncated pseudo-inverse and Armijo backtracking.
    pub fn gauss_newton(&self, start: GroupElement, max_iter: usize, stop: f64) -> Result<Outcome> {
        let mut g = start;
        let (mut w, mut r) = self.evaluate(&g);
        let mut rn = norm(&r);
        let mut iterations = 0;
        let m = self.space.dim();
        let k = self.generators.len();
        while iterations < max_iter && rn > stop && k > 0 && m > 0 {
            iterations += 1;
            let columns: Vec<Vec<f64>> = self.generators.iter().map(|e| self.space.coords(&comm(e, &w))).collect();
            let jac = Matrix::from_real_fn(m, k, |i, j| columns[j][i]);
            let dec = svd(&jac)?;
            let top = dec.sigma.first().copied().unwrap_or(0.0);
            if top == 0.0 {
                break;
            }
            let mut d = vec![0.0; k];
            for (idx, &s) in dec.sigma.iter().enumerate() {
                if s <= PINV_RCOND * top {
                    break;
                }
                let ur: f64 = (0..m).map(|i| dec.u[(i, idx)].re * r[i]).sum();
                let coef = -ur / s;
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj += coef * dec.v[(j, idx)].re;
                }
            }
            let dn = norm(&d);
            if dn == 0.0 {
                break;
            }
            let cap = if dn > MAX_STEP_NORM { MAX_STEP_NORM / dn } else { 1.0 };
            let mut step = 1.0;
            let mut accepted = false;
            while step >= MIN_STEP {
                let candidate = g.left_exp(&self.combine(&d, step * cap))?;
                let (cw, cr) = self.evaluate(&candidate);
                let cn = norm(&cr);
                if cn < rn * (1.0 - ARMIJO_C * step) {
                    g = candidate;
                    w = cw;
                    r = cr;
                    rn = cn;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok(Outcome { element: g, residual: rn, iterations })
    }
}

/// Random restart point `exp(sum c_a E_a)` with `c_a ~ N(0, 2^2)`.
pub(crate) fn random_start<R: Rng + ?Sized>(generators: &[Matrix], n: usize, rng: &mut R) -> Result<GroupElement> {
    if generators.is_empty() {
        return Ok(GroupElement::identity(n));
    }
    let normal = Normal::new(0.0, 2.0).expect("valid normal");
    let mut xi = Matrix::zeros(n, n);
    for e in generators {
        xi.axpy(normal.sample(rng), e);
    }
    GroupElement::exp(&xi)
}

pub(crate) struct CartanOutcome {
    /// `Ad(element) Y` lies in `a`.
    pub element: GroupElement,
    pub w: Matrix,
    /// `|Ad(element^{-1}) W - Y| / |Y|`.
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) struct CartanProblem<'a> {
    pub generators: &'a [Matrix],
    pub p: &'a Subspace,
    pub a: &'a Subspace,
    /// Orthogonal complement of `a` in `p`.
    pub p_perp: &'a Subspace,
    /// Regular element of `a`.
    pub regular: &'a Matrix,
}

impl CartanProblem<'_> {
    /// Riemannian ascent of `<Ad(g)Y, R>` followed by a Gauss–Newton polish
    /// that removes the `p ⊖ a` component.
    fn ascend(&self, y: &Matrix, start: GroupElement, max_iter: usize) -> Result<(GroupElement, usize)> {
        let scale = y.frobenius_norm() * self.regular.frobenius_norm();
        let mut g = start;
        let mut w = g.act(y);
        let mut f = form(&w, self.regular);
        let mut step = 1.0 / scale.max(f64::MIN_POSITIVE);
        let n = y.rows();
        let mut iterations = 0;
        while iterations < max_iter {
            let grad_mat = comm(&w, self.regular);
            let grad: Vec<f64> = self.generators.iter().map(|e| form(e, &grad_mat)).collect();
            let gn2: f64 = grad.iter().map(|x| x * x).sum();
            if gn2.sqrt() <= 1e-6 * scale {
                break;
            }
            iterations += 1;
            let mut dir = Matrix::zeros(n, n);
            for (e, &c) in self.generators.iter().zip(&grad) {
                dir.axpy(c, e);
            }
            step = (step * 2.0).min(MAX_STEP_NORM / gn2.sqrt());
            let mut accepted = false;
            while step * gn2.sqrt() > 1e-14 {
                let candidate = g.left_exp(&dir.scale(step))?;
                let cw = candidate.act(y);
                let cf = form(&cw, self.regular);
                if cf >= f + ARMIJO_C * step * gn2 {
                    g = candidate;
                    w = cw;
                    f = cf;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok((g, iterations))
    }

    pub fn solve<R: Rng + ?Sized>(
        &self,
        y: &Matrix,
        restarts: usize,
        max_iter: usize,
        tol: f64,
        rng: &mut R,
    ) -> Result<CartanOutcome> {
        if self.p.relative_residual(y) >= 1e-9 {
            return Err(Error::InvalidInput("Cartan conjugation needs an element of p".into()));
        }
        let n = y.rows();
        let ynorm = y.frobenius_norm();
        if ynorm == 0.0 {
            return Ok(CartanOutcome {
                element: GroupElement::identity(n),
                w: y.clone(),
                residual: 0.0,
                iterations: 0,
            });
        }
        let target = OrbitTarget { generators: self.generators, space: self.p_perp, y, offset: None };
        let mut best: Option<CartanOutcome> = None;
        let mut total_iterations = 0;
        for restart in 0..restarts.max(1) {
            let start = if restart == 0 {
                GroupElement::identity(n)
            } else {
                random_start(self.generators, n, rng)?
            };
            let (g, ascent_iters) = self.ascend(y, start, max_iter)?;
            let polish = target.gauss_newton(g, 100, 1e-14 * ynorm)?;
            total_iterations += ascent_iters + polish.iterations;
            let w = self.a.project(&polish.element.act(y));
            let back = polish.element.inverse().act(&w);
            let residual = back.distance(y) / ynorm;
            let better = best.as_ref().is_none_or(|b| residual < b.residual);
            if better {
                best = Some(CartanOutcome {
                    element: polish.element,
                    w,
                    residual,
                    iterations: total_iterations,
                });
            }
            if residual < tol {
                break;
            }
        }
        let mut out = best.expect("at least one restart");
        out.iterations = total_iterations;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{random_element, su, LieAlgebraBasis};
    use crate::numerics::C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonalizes_hermitian_by_conjugation() {
        // su(3) acting on itself; a = diagonal torus; the Cartan reduction is
        // unitary diagonalization.
        let g = su(3).unwrap();
        let i = C64::new(0.0, 1.0);
        let diag = |v: [f64; 3]| Matrix::from_fn(3, 3, |r, c| if r == c { i * v[r] } else { C64::new(0.0, 0.0) });
        let a = Subspace::from_spanning(3, &[diag([1.0, -1.0, 0.0]), diag([0.0, 1.0, -1.0])]).unwrap();
        let p_perp = a.complement_in(g.space());
        let regular = diag([1.0, 0.2, -1.2]);
        let problem = CartanProblem { generators: g.basis(), p: g.space(), a: &a, p_perp: &p_perp, regular: &regular };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let y = random_element(g.space(), &mut rng);
            let out = problem.solve(&y, 5, 500, 1e-9, &mut rng).unwrap();
            assert!(out.residual < 1e-9, "residual {}", out.residual);
            assert!(a.relative_residual(&out.w) < 1e-12);
            assert!((out.w.frobenius_norm() - y.frobenius_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn gauss_newton_reverses_on_so3() {
        // SO(3) acting on so(3) has -1 in every orbit.
        let g = crate::lie::so(3).unwrap();
        let h = LieAlgebraBasis::new("so(3)", 3, g.basis()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_element(g.space(), &mut rng);
        let target = OrbitTarget { generators: h.basis(), space: g.space(), y: &x, offset: Some(&x) };
        let mut best = f64::INFINITY;
        for r in 0..5 {
            let start = if r == 0 { GroupElement::identity(3) } else { random_start(h.basis(), 3, &mut rng).unwrap() };
            let out = target.gauss_newton(start, 200, 1e-14).unwrap();
            best = best.min(out.residual);
            if best < 1e-10 {
                break;
            }
        }
        assert!(best < 1e-10);
    }
}

//! Hermitian symmetric structure of `G/K`: the complex-structure generator
//! `Z^J`, its component `Z'` centralizing `a`, tube-type detection, Cartan
//! conjugation and the factorization `K = K_s S'`.

use rand::Rng;

use crate::catalog::{realify, HermitianData, KsModel, SphericalPair};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::lie::{ad_span_test, centralizer, comm, form, LieAlgebraBasis, Subspace};
use crate::numerics::{determinant, Matrix, C64};
use crate::orbit::CartanProblem;
use crate::rng::{stream_rng, Stream};

/// Cartan conjugation succeeds below this relative residual.
pub const CARTAN_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HermitianStructure {
    pub k: LieAlgebraBasis,
    pub k_s: LieAlgebraBasis,
    pub z_k: Subspace,
    pub p: Subspace,
    pub a: Subspace,
    pub zj: Matrix,
    pub zprime: Matrix,
    pub regular: Matrix,
    pub ks_model: KsModel,
    p_perp: Subspace,
}

fn data(pair: &SphericalPair) -> Result<&HermitianData> {
    pair.hermitian
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} carries no hermitian structure", pair.id)))
}

/// Sign convention: the first diagonal entry with nonzero imaginary part is
/// made positive; failing that, the first nonzero subdiagonal entry.
fn normalize_sign(z: Matrix) -> Matrix {
    let n = z.rows();
    for i in 0..n {
        let im = z[(i, i)].im;
        if im.abs() > 1e-12 {
            return if im > 0.0 { z } else { z.scale(-1.0) };
        }
    }
    for i in 1..n {
        let re = z[(i, i - 1)].re;
        if re.abs() > 1e-12 {
            return if re > 0.0 { z } else { z.scale(-1.0) };
        }
    }
    z
}

/// Generator of the centre of `k`, scaled so that `ad(Z^J)^2 = -Id` on `p`.
pub fn complex_structure_generator(pair: &SphericalPair) -> Result<Matrix> {
    let herm = data(pair)?;
    zj_from(&herm.k, &herm.p)
}

fn zj_from(k: &LieAlgebraBasis, p: &Subspace) -> Result<Matrix> {
    let centre = centralizer(k.space(), k)?;
    if centre.dim() != 1 {
        return Err(Error::Structure(format!("centre of {} has dimension {}", k.name(), centre.dim())));
    }
    let z0 = &centre.basis()[0];
    let images: Vec<Matrix> = p.basis().iter().map(|x| comm(z0, &comm(z0, x))).collect();
    let c2 = -images.iter().zip(p.basis()).map(|(t, x)| form(x, t)).sum::<f64>() / p.dim().max(1) as f64;
    if c2.is_nan() || c2 <= 0.0 {
        return Err(Error::Structure("ad of the centre vanishes on p".into()));
    }
    for (t, x) in images.iter().zip(p.basis()) {
        if (t + &x.scale(c2)).frobenius_norm() > 1e-9 * c2 {
            return Err(Error::Structure("ad of the centre has eigenvalues of unequal modulus on p".into()));
        }
    }
    Ok(normalize_sign(z0.scale(1.0 / c2.sqrt())))
}

/// Orthogonal projection of `Z^J` onto the centralizer of `a` in `k`.
pub fn z_prime(pair: &SphericalPair) -> Result<Matrix> {
    Ok(HermitianStructure::new(pair)?.zprime)
}

impl HermitianStructure {
    pub fn new(pair: &SphericalPair) -> Result<Self> {
        let herm = data(pair)?;
        let zj = zj_from(&herm.k, &herm.p)?;
        let zprime = centralizer(&herm.a, &herm.k)?.project(&zj);
        Ok(HermitianStructure {
            k: herm.k.clone(),
            k_s: herm.k_s.clone(),
            z_k: herm.z_k.clone(),
            p: herm.p.clone(),
            a: herm.a.clone(),
            zj,
            zprime,
            regular: herm.regular.clone(),
            ks_model: herm.ks_model,
            p_perp: herm.a.complement_in(&herm.p),
        })
    }

    /// `Z' != 0`, i.e. not of tube type.
    pub fn is_nontube(&self) -> bool {
        self.zprime.frobenius_norm() > 1e-6 * self.zj.frobenius_norm()
    }

    /// Distance of a group matrix from `K_s`: block structure plus unit
    /// determinants (resp. commuting with the complex structure plus unit
    /// complex determinant).
    pub fn ks_membership_residual(&self, g: &Matrix) -> Result<f64> {
        match self.ks_model {
            KsModel::Blocks { n, m } => {
                let size = n + m;
                let mut off: f64 = 0.0;
                for r in 0..size {
                    for c in 0..size {
                        if (r < n) != (c < n) {
                            off = off.max(g[(r, c)].norm());
                        }
                    }
                }
                let d1 = (determinant(&g.block(0, 0, n, n))? - C64::new(1.0, 0.0)).norm();
                let d2 = (determinant(&g.block(n, n, m, m))? - C64::new(1.0, 0.0)).norm();
                Ok(off.max(d1).max(d2))
            }
            KsModel::Realified { n } => {
                let j = realify(&Matrix::identity(n).scale_c(C64::new(0.0, 1.0)));
                let commute = comm(g, &j).frobenius_norm();
                let complex = Matrix::from_fn(n, n, |r, c| C64::new(g[(2 * r, 2 * c)].re, g[(2 * r + 1, 2 * c)].re));
                let det = (determinant(&complex)? - C64::new(1.0, 0.0)).norm();
                Ok(commute.max(det))
            }
        }
    }
}

/// Outcome of a Cartan conjugation `Y = Ad(k) W`, `W` in `a`.
#[derive(Clone, Debug)]
pub struct CartanResult {
    pub k: GroupElement,
    pub w: Matrix,
    pub residual: f64,
    pub iterations: usize,
    pub success: bool,
}

/// Finds `k` in `K` (or `K_s` when `use_ks_only`) and `W` in `a` with
/// `Ad(k) W = Y`.
pub fn conjugate_to_cartan<R: Rng + ?Sized>(
    structure: &HermitianStructure,
    y: &Matrix,
    use_ks_only: bool,
    restarts: usize,
    max_iterations: usize,
    rng: &mut R,
) -> Result<CartanResult> {
    if structure.p.relative_residual(y) >= 1e-9 {
        return Err(Error::InvalidInput("Cartan conjugation needs an element of p".into()));
    }
    let generators = if use_ks_only { structure.k_s.basis() } else { structure.k.basis() };
    let problem = CartanProblem {
        generators,
        p: &structure.p,
        a: &structure.a,
        p_perp: &structure.p_perp,
        regular: &structure.regular,
    };
    let out = problem.solve(y, restarts, max_iterations, CARTAN_TOL, rng)?;
    Ok(CartanResult {
        k: out.element.inverse(),
        w: out.w,
        residual: out.residual,
        iterations: out.iterations,
        success: out.residual < CARTAN_TOL,
    })
}

/// Splits `k = k_s * exp(t Z')` with `k_s` in `K_s`.
///
/// Each factor of `k` decomposes as `xi_s + c Z^J` with `xi_s` in `k_s`; the
/// central parts collect into `exp(C Z^J)`, and `C Z^J - t Z'` lies in `k_s`
/// exactly when `t = C |Z^J|^2 / |Z'|^2`.
pub fn project_to_ks(structure: &HermitianStructure, k: &GroupElement) -> Result<(GroupElement, GroupElement)> {
    if !structure.is_nontube() {
        return Err(Error::Structure("Z' vanishes (tube type); K = K_s S' is unavailable".into()));
    }
    let zj2 = form(&structure.zj, &structure.zj);
    let zp2 = form(&structure.zprime, &structure.zprime);
    let mut factors = Vec::with_capacity(k.factors().len() + 1);
    let mut total = 0.0;
    for xi in k.factors() {
        if structure.k.space().relative_residual(xi) >= 1e-9 {
            return Err(Error::InvalidInput("factor outside k".into()));
        }
        let c = form(xi, &structure.zj) / zj2;
        total += c;
        let mut rest = xi.clone();
        rest.axpy(-c, &structure.zj);
        factors.push(rest);
    }
    let n = k.size();
    let t = total * zj2 / zp2;
    if total != 0.0 {
        let mut eta = structure.zj.scale(total);
        eta.axpy(-t, &structure.zprime);
        factors.push(eta);
    }
    let ks = GroupElement::from_factors(n, factors)?;
    let s = if t != 0.0 { GroupElement::exp(&structure.zprime.scale(t))? } else { GroupElement::identity(n) };
    let err = ks.matrix().matmul(s.matrix())?.distance(k.matrix());
    if err > 1e-8 {
        return Err(Error::Structure(format!("K = K_s S' reconstruction failed ({err:.3e})")));
    }
    Ok((ks, s))
}

/// `Z' != 0`, cross-checked against the orbit test `Ad(K_s)(a) = p`.
pub fn tube_type_check(pair: &SphericalPair) -> Result<bool> {
    let structure = HermitianStructure::new(pair)?;
    let nontube = structure.is_nontube();
    let mut rng = stream_rng(0, 0, Stream::Invariants);
    let spans = ad_span_test(structure.k_s.basis(), &structure.a, &structure.p, structure.p.dim().max(1), &mut rng)?;
    if spans != nontube {
        return Err(Error::Structure(format!(
            "{}: Z' criterion says {} but the orbit test says {}",
            pair.id,
            if nontube { "nontube" } else { "tube" },
            if spans { "Ad(K_s)a = p" } else { "Ad(K_s)a != p" }
        )));
    }
    Ok(nontube)
}

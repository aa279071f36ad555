//! Reversal certificates: elements `h` in `H` with `Ad(h) dθ(X) = -X`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{Family3Data, SphericalPair};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::harness::VerifyConfig;
use crate::hermitian::{conjugate_to_cartan, project_to_ks, HermitianStructure};
use crate::lie::Subspace;
use crate::numerics::{Matrix, C64};
use crate::orbit::{random_start, CartanProblem, OrbitTarget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "symmetric")]
    Symmetric,
    #[serde(rename = "constructive-II")]
    ConstructiveII,
    #[serde(rename = "constructive-III")]
    ConstructiveIII,
    #[serde(rename = "optimizer")]
    Optimizer,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Symmetric => "symmetric",
            Method::ConstructiveII => "constructive-II",
            Method::ConstructiveIII => "constructive-III",
            Method::Optimizer => "optimizer",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReversalCertificate {
    pub h: GroupElement,
    pub residual: f64,
    pub method: Method,
    /// Constructive method that stalled before `method` took over.
    pub fallback_from: Option<Method>,
    pub restarts_used: usize,
    pub iterations: usize,
    pub success: bool,
}

impl ReversalCertificate {
    /// `"constructive-III>optimizer"` for a fallback, else the method tag.
    pub fn method_tag(&self) -> String {
        match self.fallback_from {
            Some(from) => format!("{}>{}", from.tag(), self.method.tag()),
            None => self.method.tag().to_string(),
        }
    }

    fn direct(pair: &SphericalPair, h: GroupElement, x: &Matrix, method: Method, tol: f64) -> Result<Self> {
        let residual = residual(pair, h.matrix(), x)?;
        Ok(ReversalCertificate {
            h,
            residual,
            method,
            fallback_from: None,
            restarts_used: 0,
            iterations: 0,
            success: residual < tol,
        })
    }
}

/// `|Ad(h) dθ(X) + X| / |X|` for unitary `h`.
pub fn residual(pair: &SphericalPair, h: &Matrix, x: &Matrix) -> Result<f64> {
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::InvalidInput("residual of the zero vector".into()));
    }
    let moved = crate::lie::adjoint_unitary(h, &pair.theta(x));
    Ok((&moved + x).frobenius_norm() / norm)
}

/// `θ(g)` on a group element.
pub fn theta_group(pair: &SphericalPair, g: &GroupElement) -> GroupElement {
    g.map(|xi| pair.theta(xi), |m| pair.theta(m))
}

/// `g θ(g)^{-1}`.
fn twisted(pair: &SphericalPair, g: &GroupElement) -> GroupElement {
    g.mul(&theta_group(pair, g).inverse())
}

/// The identity reverses every `X` when `dθ = -Id` on `q`.
pub fn reverse_symmetric(pair: &SphericalPair, x: &Matrix) -> Result<ReversalCertificate> {
    if !pair.is_symmetric() {
        return Err(Error::InvalidInput(format!("{}: dθ is not -Id on q", pair.id)));
    }
    ReversalCertificate::direct(pair, GroupElement::identity(pair.ambient_size()), x, Method::Symmetric, 1e-12)
}

/// Multi-restart Gauss–Newton on `H` for `Ad(h) dθ(X) + X = 0`.
///
/// Restart 0 starts at the identity, later restarts at `exp` of random
/// coordinates. Success iff the best residual is below `config.tol`; the best
/// certificate is returned either way.
pub fn reverse_generic<R: Rng + ?Sized>(
    pair: &SphericalPair,
    x: &Matrix,
    config: &VerifyConfig,
    rng: &mut R,
) -> Result<ReversalCertificate> {
    let xnorm = x.frobenius_norm();
    if xnorm == 0.0 {
        return Err(Error::InvalidInput("cannot reverse the zero vector".into()));
    }
    let y = pair.theta(x);
    let n = pair.ambient_size();
    let target = OrbitTarget { generators: pair.h.basis(), space: &pair.q, y: &y, offset: Some(x) };
    let mut best: Option<ReversalCertificate> = None;
    let mut iterations = 0;
    for restart in 0..config.restarts.max(1) {
        let start = if restart == 0 { GroupElement::identity(n) } else { random_start(pair.h.basis(), n, rng)? };
        let out = target.gauss_newton(start, config.max_iterations, 1e-14 * xnorm)?;
        iterations += out.iterations;
        let res = residual(pair, out.element.matrix(), x)?;
        if best.as_ref().is_none_or(|b| res < b.residual) {
            best = Some(ReversalCertificate {
                h: out.element,
                residual: res,
                method: Method::Optimizer,
                fallback_from: None,
                restarts_used: restart,
                iterations: 0,
                success: res < config.tol,
            });
        }
        if res < config.tol {
            break;
        }
    }
    let mut cert = best.expect("at least one restart");
    cert.iterations = iterations;
    Ok(cert)
}

fn fall_back<R: Rng + ?Sized>(
    pair: &SphericalPair,
    x: &Matrix,
    config: &VerifyConfig,
    rng: &mut R,
    from: Method,
    spent: usize,
) -> Result<ReversalCertificate> {
    let mut cert = reverse_generic(pair, x, config, rng)?;
    cert.fallback_from = Some(from);
    cert.iterations += spent;
    Ok(cert)
}

/// Family II: write `X = Z + Y`, conjugate `Y = Ad(h) W` with `h` in `K_s`
/// and `W` in `a`, and return `h θ(h)^{-1}`.
pub fn reverse_hermitian<R: Rng + ?Sized>(
    pair: &SphericalPair,
    structure: &HermitianStructure,
    x: &Matrix,
    config: &VerifyConfig,
    rng: &mut R,
) -> Result<ReversalCertificate> {
    let y = structure.p.project(x);
    let cartan = conjugate_to_cartan(structure, &y, false, config.restarts, config.max_iterations, rng)?;
    let spent = cartan.iterations;
    if !cartan.success {
        return fall_back(pair, x, config, rng, Method::ConstructiveII, spent);
    }
    let h = match project_to_ks(structure, &cartan.k) {
        Ok((ks, _)) => ks,
        Err(_) => return fall_back(pair, x, config, rng, Method::ConstructiveII, spent),
    };
    let mut cert = ReversalCertificate::direct(pair, twisted(pair, &h), x, Method::ConstructiveII, config.tol)?;
    cert.iterations = spent;
    if !cert.success {
        return fall_back(pair, x, config, rng, Method::ConstructiveII, spent);
    }
    Ok(cert)
}

/// Generators of the normalizer of `b` in `Sp(n)`, embedded in
/// `(2n+1) x (2n+1)` matrices.
#[derive(Clone, Debug)]
pub struct NormalizerGenerators {
    /// `i(E_jj - E_{n+j,n+j})`, the diagonal torus of `sp(n)`.
    pub torus: Vec<Matrix>,
    /// `L_j = diag(F_{j,j+1}, F_{j,j+1}, 1)` for `j = 1..n-1`.
    pub l: Vec<GroupElement>,
    /// `L~_j`, the quarter turn in the quaternionic line `j`, `j = 1..n`.
    pub l_tilde: Vec<GroupElement>,
}

pub fn normalizer_generators(n: usize) -> Result<NormalizerGenerators> {
    if n == 0 {
        return Err(Error::InvalidInput("normalizer generators need n >= 1".into()));
    }
    let size = 2 * n + 1;
    let i = C64::new(0.0, 1.0);
    let torus = (0..n)
        .map(|j| {
            let mut t = Matrix::zeros(size, size);
            t.set(j, j, i);
            t.set(n + j, n + j, -i);
            t
        })
        .collect();
    let mut l = Vec::new();
    for j in 0..n.saturating_sub(1) {
        // exp(i pi P) = I - 2P swaps e_j and e_{j+1} when P projects onto
        // (e_j - e_{j+1}) / sqrt 2.
        let mut xi = Matrix::zeros(size, size);
        for (r, c, s) in [(j, j, 0.5), (j, j + 1, -0.5), (j + 1, j, -0.5), (j + 1, j + 1, 0.5)] {
            xi.set(r, c, i * (PI * s));
            xi.set(n + r, n + c, -i * (PI * s));
        }
        l.push(GroupElement::exp(&xi)?);
    }
    let mut l_tilde = Vec::new();
    for j in 0..n {
        let mut xi = Matrix::zeros(size, size);
        xi.set(j, n + j, C64::new(PI / 2.0, 0.0));
        xi.set(n + j, j, C64::new(-PI / 2.0, 0.0));
        l_tilde.push(GroupElement::exp(&xi)?);
    }
    Ok(NormalizerGenerators { torus, l, l_tilde })
}

/// `a_j`: the real span of `E_{j,N} - E_{N,j}` and `i(E_{j,N} + E_{N,j})`,
/// `N = 2n+1`, `j` zero-based.
pub fn a_line(n: usize, j: usize) -> Result<Subspace> {
    let size = 2 * n + 1;
    let last = 2 * n;
    let mut re = Matrix::zeros(size, size);
    re.set(j, last, C64::new(1.0, 0.0));
    re.set(last, j, C64::new(-1.0, 0.0));
    let mut im = Matrix::zeros(size, size);
    im.set(j, last, C64::new(0.0, 1.0));
    im.set(last, j, C64::new(0.0, 1.0));
    Subspace::from_spanning(size, &[re, im])
}

/// Logarithm of `[[alpha, beta], [-conj(beta), conj(alpha)]]` in `su(2)`.
fn su2_log(alpha: C64, beta: C64) -> [C64; 4] {
    let (a0, a3, a2, a1) = (alpha.re, alpha.im, beta.re, beta.im);
    let s = (a1 * a1 + a2 * a2 + a3 * a3).sqrt();
    if s == 0.0 {
        return if a0 > 0.0 {
            [C64::new(0.0, 0.0); 4]
        } else {
            [C64::new(0.0, PI), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -PI)]
        };
    }
    let f = s.atan2(a0) / s;
    [C64::new(0.0, a3 * f), C64::new(a2 * f, a1 * f), C64::new(-a2 * f, a1 * f), C64::new(0.0, -a3 * f)]
}

/// Stage two: an element of `N(b)` moving `W'` in `p` into `a`, or `None`
/// when `W'` has weight in more than one quaternionic line.
fn normalizer_move(n: usize, w: &Matrix, gens: &NormalizerGenerators) -> Result<Option<GroupElement>> {
    let size = 2 * n + 1;
    let last = 2 * n;
    let scale = w.frobenius_norm();
    if scale == 0.0 {
        return Ok(Some(GroupElement::identity(size)));
    }
    let mut xi = Matrix::zeros(size, size);
    let mut occupied = Vec::new();
    for j in 0..n {
        let x = w[(j, last)];
        let y = w[(n + j, last)];
        let rho = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if rho <= 1e-10 * scale {
            continue;
        }
        occupied.push(j);
        let sigma = if x.im >= 0.0 { 1.0 } else { -1.0 };
        let alpha = C64::new(0.0, sigma) * x.conj() / rho;
        let beta = C64::new(0.0, sigma) * y.conj() / rho;
        let log = su2_log(alpha, beta);
        xi.set(j, j, log[0]);
        xi.set(j, n + j, log[1]);
        xi.set(n + j, j, log[2]);
        xi.set(n + j, n + j, log[3]);
    }
    if occupied.len() > 1 {
        return Ok(None);
    }
    let mut l = if xi.max_abs() == 0.0 { GroupElement::identity(size) } else { GroupElement::exp(&xi)? };
    if let Some(&j0) = occupied.first() {
        for j in (0..j0).rev() {
            l = gens.l[j].mul(&l);
        }
    }
    Ok(Some(l))
}

fn family3(pair: &SphericalPair) -> Result<(&Family3Data, &crate::catalog::HermitianData)> {
    let herm = pair
        .hermitian
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a family III pair", pair.id)))?;
    let f3 = herm.family3.as_ref().ok_or_else(|| Error::InvalidInput(format!("{} is not a family III pair", pair.id)))?;
    Ok((f3, herm))
}

/// Family III: conjugate the `su(2n)/sp(n)` part into `b` by `h` in `Sp(n)`,
/// move the `p` part into `a` by `l` in `N(b)`, and return `c θ(c)^{-1}` with
/// `c = h l^{-1}`.
pub fn reverse_family3<R: Rng + ?Sized>(
    pair: &SphericalPair,
    x: &Matrix,
    config: &VerifyConfig,
    rng: &mut R,
) -> Result<ReversalCertificate> {
    let (f3, herm) = family3(pair)?;
    let n = f3.n;
    let v = f3.q_prime.project(x);
    let w = herm.p.project(x);
    let b_perp = f3.b.complement_in(&f3.q_prime);
    let problem = CartanProblem {
        generators: f3.sp.basis(),
        p: &f3.q_prime,
        a: &f3.b,
        p_perp: &b_perp,
        regular: &f3.regular_b,
    };
    let stage1 = problem.solve(&v, config.restarts, config.max_iterations, 1e-10, rng)?;
    let spent = stage1.iterations;
    if stage1.residual >= 1e-10 {
        return fall_back(pair, x, config, rng, Method::ConstructiveIII, spent);
    }
    // stage1.element maps V into b, so h = element^{-1}.
    let w_prime = stage1.element.act(&w);
    let gens = normalizer_generators(n)?;
    let l = match normalizer_move(n, &w_prime, &gens)? {
        Some(l) => l,
        None => return fall_back(pair, x, config, rng, Method::ConstructiveIII, spent),
    };
    let c = stage1.element.inverse().mul(&l.inverse());
    let mut cert = ReversalCertificate::direct(pair, twisted(pair, &c), x, Method::ConstructiveIII, config.tol)?;
    cert.iterations = spent;
    if !cert.success {
        return fall_back(pair, x, config, rng, Method::ConstructiveIII, spent);
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_pair, Params};
    use crate::harness::sample_tangent;
    use crate::rng::{stream_rng, Stream};

    fn with_n(id: &str, n: usize) -> SphericalPair {
        let mut p = Params::new();
        p.insert("n".into(), n);
        build_pair(id, &p).unwrap()
    }

    #[test]
    fn residual_examples() {
        let grass = build_pair("I-grassmann", &Params::new()).unwrap();
        let x = sample_tangent(&grass, 0, 1).unwrap();
        assert!(residual(&grass, &Matrix::identity(3), &x).unwrap() < 1e-15);
        let iv = build_pair("IV-g2-a2", &Params::new()).unwrap();
        let x = sample_tangent(&iv, 0, 1).unwrap();
        assert!((residual(&iv, &Matrix::identity(7), &x).unwrap() - 2.0).abs() < 1e-12);
        assert!(residual(&iv, &Matrix::identity(7), &Matrix::zeros(7, 7)).is_err());
    }

    #[test]
    fn symmetric_reverser_needs_symmetric_involution() {
        let grass = build_pair("I-grassmann", &Params::new()).unwrap();
        let x = sample_tangent(&grass, 3, 9).unwrap();
        let cert = reverse_symmetric(&grass, &x).unwrap();
        assert!(cert.success && cert.residual < 1e-12);
        let so8 = build_pair("I-so8-su2sp2", &Params::new()).unwrap();
        assert!(reverse_symmetric(&so8, &sample_tangent(&so8, 0, 1).unwrap()).is_err());
    }

    #[test]
    fn generic_succeeds_immediately_on_symmetric_pair() {
        let grass = build_pair("I-grassmann", &Params::new()).unwrap();
        let x = sample_tangent(&grass, 5, 2).unwrap();
        let cert = reverse_generic(&grass, &x, &VerifyConfig::default(), &mut stream_rng(2, 5, Stream::Restarts)).unwrap();
        assert!(cert.success);
        assert_eq!(cert.iterations, 0);
        assert_eq!(cert.restarts_used, 0);
    }

    #[test]
    fn normalizer_generators_match_block_forms() {
        for n in 1..4 {
            let gens = normalizer_generators(n).unwrap();
            let size = 2 * n + 1;
            for (j, lj) in gens.l.iter().enumerate() {
                let expected = Matrix::from_real_fn(size, size, |r, c| {
                    let swap = |k: usize| if k % n == j && k < 2 * n { k + 1 } else if k % n == j + 1 && k < 2 * n { k - 1 } else { k };
                    if swap(c) == r {
                        1.0
                    } else {
                        0.0
                    }
                });
                assert!(lj.matrix().distance(&expected) < 1e-12, "L_{j}");
            }
            for (j, lt) in gens.l_tilde.iter().enumerate() {
                let expected = Matrix::from_real_fn(size, size, |r, c| {
                    if (r == c && r != j && r != n + j) || (r == j && c == n + j) {
                        1.0
                    } else if r == n + j && c == j {
                        -1.0
                    } else {
                        0.0
                    }
                });
                assert!(lt.matrix().distance(&expected) < 1e-12, "L~_{j}");
            }
        }
    }

    #[test]
    fn su2_log_inverts_exp() {
        for (alpha, beta) in [
            (C64::new(0.3, 0.4), C64::new(-0.5, std::f64::consts::FRAC_1_SQRT_2)),
            (C64::new(-1.0, 0.0), C64::new(0.0, 0.0)),
            (C64::new(-0.999, 0.0), C64::new(0.0, (1.0f64 - 0.999 * 0.999).sqrt())),
        ] {
            let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
            let (alpha, beta) = (alpha / norm, beta / norm);
            let log = su2_log(alpha, beta);
            let m = crate::numerics::mat_exp(&Matrix::from_vec(2, 2, log.to_vec()).unwrap()).unwrap();
            let g = Matrix::from_vec(2, 2, vec![alpha, beta, -beta.conj(), alpha.conj()]).unwrap();
            assert!(m.distance(&g) < 1e-12);
        }
    }

    #[test]
    fn family3_trivial_on_cartan_data() {
        let pair = with_n("III-su-sp", 2);
        let herm = pair.hermitian.as_ref().unwrap();
        let f3 = herm.family3.as_ref().unwrap();
        let mut x = f3.b.basis()[0].scale(0.6);
        x.axpy(0.5, &herm.z_k.basis()[0]);
        x.axpy(-0.62, &herm.a.basis()[0]);
        let cert = reverse_family3(&pair, &x, &VerifyConfig::default(), &mut stream_rng(0, 0, Stream::Restarts)).unwrap();
        assert_eq!(cert.method, Method::ConstructiveIII);
        assert!(cert.residual < 1e-12);
        assert!(cert.h.matrix().distance(&Matrix::identity(5)) < 1e-12);
    }

    #[test]
    fn family3_constructive_for_n1() {
        let pair = with_n("III-su-sp", 1);
        let config = VerifyConfig::default();
        for i in 0..20 {
            let x = sample_tangent(&pair, i, 42).unwrap();
            let cert = reverse_family3(&pair, &x, &config, &mut stream_rng(42, i, Stream::Restarts)).unwrap();
            assert_eq!(cert.method, Method::ConstructiveIII, "sample {i}");
            assert!(cert.residual < 1e-8);
            assert!(cert.h.membership_residual(pair.h.space()).unwrap() < 1e-7);
            let again = residual(&pair, cert.h.matrix(), &x).unwrap();
            assert!((again - cert.residual).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_reverser_on_su21() {
        let mut p = Params::new();
        p.insert("n".into(), 2);
        p.insert("m".into(), 1);
        let pair = build_pair("II-su", &p).unwrap();
        let structure = HermitianStructure::new(&pair).unwrap();
        let config = VerifyConfig::default();
        for i in 0..20 {
            let x = sample_tangent(&pair, i, 7).unwrap();
            let cert = reverse_hermitian(&pair, &structure, &x, &config, &mut stream_rng(7, i, Stream::Restarts)).unwrap();
            assert_eq!(cert.method_tag(), "constructive-II");
            assert!(cert.residual < 1e-8);
            assert!(cert.h.membership_residual(pair.h.space()).unwrap() < 1e-7);
            assert!(cert.h.unitarity_residual() < 1e-9);
        }
        // pure centre and pure Cartan inputs are reversed by the identity
        for x in [structure.z_k.basis()[0].clone(), structure.a.basis()[0].clone()] {
            let cert = reverse_hermitian(&pair, &structure, &x, &config, &mut stream_rng(7, 99, Stream::Restarts)).unwrap();
            assert!(cert.residual < 1e-12);
        }
    }
}

//! Sampling, dispatch to reversers, invariant suites and reports.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{involution_square_residual, minus_identity_residual, Family, Params, SphericalPair};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::hermitian::{tube_type_check, HermitianStructure};
use crate::lie::{self, max_bracket_norm, q_invariance_residual, random_element};
use crate::numerics::{self, hermitian_eigen, Matrix};
use crate::reversal::{
    normalizer_generators, reverse_family3, reverse_generic, reverse_hermitian, reverse_symmetric, ReversalCertificate,
};
use crate::rng::{stream_rng, Stream};

/// Largest isotypic block the commutant solver accepts.
const MAX_COMMUTANT_BLOCK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub samples: usize,
    pub tol: f64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { samples: 100, tol: 1e-8, restarts: 20, max_iterations: 500, seed: 42 }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidInput("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub method: String,
    pub residual: f64,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub successes: usize,
    pub total: usize,
    pub max_residual: f64,
    pub fallbacks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl InvariantCheck {
    fn below(name: &str, value: f64, tol: f64) -> Self {
        InvariantCheck { name: name.to_string(), pass: value < tol, value, detail: None }
    }

    fn failed(name: &str, err: &Error) -> Self {
        InvariantCheck { name: name.to_string(), pass: false, value: f64::MAX, detail: Some(err.to_string()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub pair: String,
    pub family: Family,
    pub params: Params,
    pub involution: String,
    pub seed: u64,
    pub config: VerifyConfig,
    pub samples: Vec<SampleRecord>,
    pub aggregate: Aggregate,
    pub invariants: Vec<InvariantCheck>,
}

impl VerificationReport {
    pub fn all_succeeded(&self) -> bool {
        self.aggregate.successes == self.aggregate.total
    }

    pub fn invariants_pass(&self) -> bool {
        self.invariants.iter().all(|c| c.pass)
    }
}

/// Unit-norm Gaussian combination of the `q` basis, determined by
/// `(seed, index)`.
pub fn sample_tangent(pair: &SphericalPair, index: u64, seed: u64) -> Result<Matrix> {
    if pair.q.dim() == 0 {
        return Err(Error::InvalidInput(format!("{}: q is zero", pair.id)));
    }
    let mut rng = stream_rng(seed, index, Stream::Tangent);
    Ok(random_element(&pair.q, &mut rng))
}

enum Reverser {
    Symmetric,
    Hermitian(Box<HermitianStructure>),
    Family3,
    Generic,
}

fn choose_reverser(pair: &SphericalPair) -> Reverser {
    match pair.family {
        Family::I if pair.is_symmetric() => Reverser::Symmetric,
        Family::II => match HermitianStructure::new(pair) {
            Ok(s) if s.is_nontube() => Reverser::Hermitian(Box::new(s)),
            _ => Reverser::Generic,
        },
        Family::III if pair.hermitian.as_ref().is_some_and(|h| h.family3.is_some()) => Reverser::Family3,
        _ => Reverser::Generic,
    }
}

fn reverse_one(pair: &SphericalPair, reverser: &Reverser, x: &Matrix, config: &VerifyConfig, index: u64) -> Result<ReversalCertificate> {
    let mut rng = stream_rng(config.seed, index, Stream::Restarts);
    match reverser {
        Reverser::Symmetric => reverse_symmetric(pair, x),
        Reverser::Hermitian(s) => reverse_hermitian(pair, s, x, config, &mut rng),
        Reverser::Family3 => reverse_family3(pair, x, config, &mut rng),
        Reverser::Generic => reverse_generic(pair, x, config, &mut rng),
    }
}

/// Runs every sample through the family's reverser and attaches the invariant
/// suite. Failures are recorded, not returned.
pub fn verify_pair(pair: &SphericalPair, config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let reverser = choose_reverser(pair);
    let samples: Vec<SampleRecord> = (0..config.samples as u64)
        .into_par_iter()
        .map(|index| {
            let outcome = sample_tangent(pair, index, config.seed)
                .and_then(|x| reverse_one(pair, &reverser, &x, config, index));
            match outcome {
                Ok(cert) => SampleRecord {
                    index,
                    method: cert.method_tag(),
                    residual: cert.residual,
                    success: cert.residual < config.tol,
                },
                Err(err) => SampleRecord { index, method: format!("error: {err}"), residual: f64::MAX, success: false },
            }
        })
        .collect();
    let aggregate = Aggregate {
        successes: samples.iter().filter(|s| s.success).count(),
        total: samples.len(),
        max_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
        fallbacks: samples.iter().filter(|s| s.method.contains('>')).count(),
    };
    Ok(VerificationReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        pair: pair.id.clone(),
        family: pair.family,
        params: pair.params.clone(),
        involution: pair.involution.kind().to_string(),
        seed: config.seed,
        config: *config,
        samples,
        aggregate,
        invariants: invariant_suite(pair),
    })
}

/// Sorted block dimensions of the expected isotropy decomposition, where
/// known.
fn expected_decomposition(id: &str) -> Option<Vec<usize>> {
    match id {
        "V-so10-so2spin7" => Some(vec![7, 16]),
        "V-so9-spin7" => Some(vec![7, 8]),
        "V-so8-g2" => Some(vec![7, 7]),
        _ => None,
    }
}

/// Named structural checks for a pair.
pub fn invariant_suite(pair: &SphericalPair) -> Vec<InvariantCheck> {
    let mut out = vec![
        InvariantCheck::below("g_closure", pair.g.closure_residual(), 1e-10),
        InvariantCheck::below("h_closure", pair.h.closure_residual(), 1e-10),
        InvariantCheck::below("g_skew", pair.g.skew_residual(), 1e-12),
        InvariantCheck::below("h_in_g", pair.g.space().containment_residual(pair.h.space()), 1e-10),
        InvariantCheck {
            name: "q_dim".into(),
            pass: pair.q.dim() == pair.expected_q_dim,
            value: pair.q.dim() as f64,
            detail: Some(format!("expected {}", pair.expected_q_dim)),
        },
        InvariantCheck::below("q_invariance", q_invariance_residual(pair.h.space(), &pair.q), 1e-10),
        InvariantCheck::below("q_group_invariance", group_invariance(pair), 1e-8),
    ];
    if matches!(pair.family, Family::I | Family::II | Family::III) {
        out.push(InvariantCheck::below("theta_square", involution_square_residual(pair), 1e-12));
        let preserves = pair.h.basis().iter().map(|x| pair.h.space().relative_residual(&pair.theta(x))).fold(0.0, f64::max);
        out.push(InvariantCheck::below("theta_preserves_h", preserves, 1e-12));
        if pair.family == Family::I && pair.is_symmetric() {
            out.push(InvariantCheck::below("theta_minus_id_q", minus_identity_residual(pair, &pair.q), 1e-12));
        }
    }
    if let Some(herm) = &pair.hermitian {
        out.push(InvariantCheck::below("theta_minus_id_a", minus_identity_residual(pair, &herm.a), 1e-12));
        out.push(InvariantCheck::below("theta_minus_id_zk", minus_identity_residual(pair, &herm.z_k), 1e-12));
        let ks = herm.k_s.basis().iter().map(|x| herm.k_s.space().relative_residual(&pair.theta(x))).fold(0.0, f64::max);
        out.push(InvariantCheck::below("theta_preserves_ks", ks, 1e-12));
        out.push(InvariantCheck::below("a_abelian", max_bracket_norm(&herm.a, &herm.a), 1e-12));
    }
    match pair.family {
        Family::II => out.push(match tube_type_check(pair) {
            Ok(nontube) => InvariantCheck {
                name: "tube_type".into(),
                pass: nontube,
                value: if nontube { 1.0 } else { 0.0 },
                detail: Some(if nontube { "nontube" } else { "tube" }.into()),
            },
            Err(err) => InvariantCheck::failed("tube_type", &err),
        }),
        Family::III => out.push(match normalizer_residual(pair) {
            Ok(v) => InvariantCheck::below("normalizer_generators", v, 1e-10),
            Err(err) => InvariantCheck::failed("normalizer_generators", &err),
        }),
        Family::IV => {
            let rank = orbit_rank(pair);
            out.push(InvariantCheck {
                name: "orbit_rank".into(),
                pass: rank + 1 == pair.q.dim(),
                value: rank as f64,
                detail: Some(format!("expected {}", pair.q.dim().saturating_sub(1))),
            });
        }
        Family::V => out.push(match isotropy_decomposition(pair) {
            Ok(dims) => {
                let total: usize = dims.iter().sum();
                let pass = total == pair.q.dim() && expected_decomposition(&pair.id).is_none_or(|e| e == dims);
                InvariantCheck {
                    name: "isotropy_decomposition".into(),
                    pass,
                    value: dims.len() as f64,
                    detail: Some(format!("{dims:?}")),
                }
            }
            Err(err) => InvariantCheck::failed("isotropy_decomposition", &err),
        }),
        _ => {}
    }
    out
}

/// Largest `h`-component of `Ad(h) X` over a few random `h` in `H`, `X` in
/// `q`.
fn group_invariance(pair: &SphericalPair) -> f64 {
    let mut rng = stream_rng(0, 0, Stream::Invariants);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let xi = random_element(pair.h.space(), &mut rng).scale(2.0);
        let h = match GroupElement::exp(&xi) {
            Ok(h) => h,
            Err(_) => return f64::MAX,
        };
        let x = random_element(&pair.q, &mut rng);
        worst = worst.max(pair.h.space().project(&h.act(&x)).frobenius_norm());
    }
    worst
}

/// Rank of `{[E_a, v]}` at a random unit `v` in `q`.
fn orbit_rank(pair: &SphericalPair) -> usize {
    let mut rng = stream_rng(0, 1, Stream::Invariants);
    let v = random_element(&pair.q, &mut rng);
    let cols: Vec<Vec<f64>> = pair.h.basis().iter().map(|e| pair.q.coords(&lie::comm(e, &v))).collect();
    let m = Matrix::from_real_fn(pair.q.dim(), cols.len(), |i, j| cols[j][i]);
    numerics::rank(&m, 1e-8).unwrap_or(0)
}

/// Largest violation of `L in Sp(n)` and `Ad(L) b = b` over the normalizer
/// generators.
fn normalizer_residual(pair: &SphericalPair) -> Result<f64> {
    let f3 = pair
        .hermitian
        .as_ref()
        .and_then(|h| h.family3.as_ref())
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a family III pair", pair.id)))?;
    let gens = normalizer_generators(f3.n)?;
    let mut worst: f64 = 0.0;
    for g in gens.l.iter().chain(&gens.l_tilde) {
        worst = worst.max(g.membership_residual(f3.sp.space())?);
        for b in f3.b.basis() {
            worst = worst.max(f3.b.relative_residual(&g.act(b)));
        }
    }
    for t in &gens.torus {
        worst = worst.max(f3.sp.space().relative_residual(t));
    }
    Ok(worst)
}

type Dense = Vec<f64>;

fn dense_mul(a: &[f64], b: &[f64], k: usize) -> Dense {
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for l in 0..k {
            let a_il = a[i * k + l];
            if a_il == 0.0 {
                continue;
            }
            for j in 0..k {
                out[i * k + j] += a_il * b[l * k + j];
            }
        }
    }
    out
}

fn dense_comm(a: &[f64], b: &[f64], k: usize) -> Dense {
    let ab = dense_mul(a, b, k);
    let ba = dense_mul(b, a, k);
    ab.iter().zip(&ba).map(|(x, y)| x - y).collect()
}

/// Eigenvalue clusters of a real symmetric matrix as orthonormal column sets.
fn eigen_clusters(m: &[f64], k: usize, rel_tol: f64) -> Result<Vec<Vec<Dense>>> {
    let eig = hermitian_eigen(&Matrix::from_real_fn(k, k, |i, j| m[i * k + j]))?;
    let scale = eig.values.iter().fold(1e-300_f64, |a, v| a.max(v.abs()));
    let mut clusters: Vec<Vec<Dense>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (j, &value) in eig.values.iter().enumerate() {
        let col: Dense = (0..k).map(|i| eig.vectors[(i, j)].re).collect();
        if clusters.is_empty() || value - last > rel_tol * scale {
            clusters.push(vec![col]);
        } else {
            clusters.last_mut().expect("nonempty").push(col);
        }
        last = value;
    }
    Ok(clusters)
}

/// Restricts `rho` (a `k x k` operator) to the span of orthonormal columns.
fn restrict(rho: &[f64], k: usize, basis: &[Dense]) -> Dense {
    let d = basis.len();
    let mut out = vec![0.0; d * d];
    for (c, v) in basis.iter().enumerate() {
        let mut image = vec![0.0; k];
        for i in 0..k {
            image[i] = (0..k).map(|l| rho[i * k + l] * v[l]).sum();
        }
        for (r, u) in basis.iter().enumerate() {
            out[r * d + c] = u.iter().zip(&image).map(|(a, b)| a * b).sum();
        }
    }
    out
}

/// Orthonormal basis of symmetric `d x d` matrices.
fn symmetric_basis(d: usize) -> Vec<Dense> {
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i..d {
            let mut m = vec![0.0; d * d];
            if i == j {
                m[i * d + i] = 1.0;
            } else {
                m[i * d + j] = s;
                m[j * d + i] = s;
            }
            out.push(m);
        }
    }
    out
}

/// Splits a block of `q` (given by orthonormal columns) by a random symmetric
/// element of the commutant of the restricted isotropy operators.
fn split_block<R: Rng + ?Sized>(rhos: &[Dense], k: usize, block: &[Dense], rng: &mut R) -> Result<Vec<usize>> {
    let d = block.len();
    if d == 1 {
        return Ok(vec![1]);
    }
    if d > MAX_COMMUTANT_BLOCK {
        return Err(Error::InvalidInput(format!(
            "isotypic block of dimension {d} exceeds the commutant limit {MAX_COMMUTANT_BLOCK}"
        )));
    }
    let restricted: Vec<Dense> = rhos.iter().map(|r| restrict(r, k, block)).collect();
    let sym = symmetric_basis(d);
    // C in the commutant iff sum_a [r_a, [r_a, C]] = 0 (each term is
    // negative semidefinite in the trace form).
    let images: Vec<Dense> = sym
        .iter()
        .map(|c| {
            let mut acc = vec![0.0; d * d];
            for r in &restricted {
                let inner = dense_comm(r, c, d);
                for (a, v) in acc.iter_mut().zip(dense_comm(r, &inner, d)) {
                    *a -= v;
                }
            }
            acc
        })
        .collect();
    let s = sym.len();
    let gram = Matrix::from_real_fn(s, s, |i, j| sym[i].iter().zip(&images[j]).map(|(a, b)| a * b).sum());
    let eig = hermitian_eigen(&gram)?;
    let top = eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut element = vec![0.0; d * d];
    for (j, &value) in eig.values.iter().enumerate() {
        if value.abs() <= 1e-10 * top.max(1e-300) {
            let coeff: f64 = rng.sample(StandardNormal);
            for (i, basis) in sym.iter().enumerate() {
                let w = coeff * eig.vectors[(i, j)].re;
                for (e, b) in element.iter_mut().zip(basis) {
                    *e += w * b;
                }
            }
        }
    }
    Ok(eigen_clusters(&element, d, 1e-6)?.iter().map(Vec::len).collect())
}

/// Dimensions of the `H`-invariant blocks of `q`, sorted.
///
/// `q` is first split by the Casimir `sum_a rho_a^2`, then each eigenspace by
/// a random symmetric element of the commutant of `{rho_a}`.
pub fn isotropy_decomposition(pair: &SphericalPair) -> Result<Vec<usize>> {
    let k = pair.q.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    let rhos: Vec<Dense> = pair
        .h
        .basis()
        .iter()
        .map(|e| {
            let mut rho = vec![0.0; k * k];
            for (j, b) in pair.q.basis().iter().enumerate() {
                for (i, c) in pair.q.coords(&lie::comm(e, b)).into_iter().enumerate() {
                    rho[i * k + j] = c;
                }
            }
            rho
        })
        .collect();
    let mut casimir = vec![0.0; k * k];
    for r in &rhos {
        for (c, v) in casimir.iter_mut().zip(dense_mul(r, r, k)) {
            *c += v;
        }
    }
    let mut rng = stream_rng(0, 2, Stream::Invariants);
    let mut dims = Vec::new();
    for block in eigen_clusters(&casimir, k, 1e-8)? {
        dims.extend(split_block(&rhos, k, &block, &mut rng)?);
    }
    dims.sort_unstable();
    Ok(dims)
}

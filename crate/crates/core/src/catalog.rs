//! The catalog of compact spherical pairs and their matrix models.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, e, reductive_split, su, LieAlgebraBasis, Subspace, MEMBERSHIP_TOL};
use crate::numerics::{self, Matrix, C64};
use crate::octonion::{g2_basis, spin7_in_so8, su3_in_g2, Octonion};

/// Largest ambient matrix size the catalog will build.
pub const MAX_AMBIENT: usize = 20;

pub type Params = BTreeMap<String, usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    I,
    II,
    III,
    IV,
    V,
    VI,
    #[serde(rename = "control")]
    Control,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
            Family::IV => "IV",
            Family::V => "V",
            Family::VI => "VI",
            Family::Control => "control",
        };
        f.pad(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Verifiable,
    Excluded,
    NegativeControl,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Status::Verifiable => "verifiable",
            Status::Excluded => "excluded: no desk-scale model",
            Status::NegativeControl => "negative-control",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub family: Family,
    pub g: &'static str,
    pub h: &'static str,
    pub constraint: &'static str,
    pub defaults: Vec<(&'static str, usize)>,
    pub status: Status,
}

pub const PAIR_IDS: [&str; 16] = [
    "I-grassmann",
    "I-so8-su2sp2",
    "II-su",
    "II-so2n-sun",
    "III-su-sp",
    "III-su-spu1",
    "IV-so8-spin7",
    "IV-so7-g2",
    "IV-g2-a2",
    "V-so10-so2spin7",
    "V-so9-spin7",
    "V-so8-g2",
    "VI-so2n1-un",
    "VI-spn-spn1u1",
    "E6-D5",
    "negative-control-su3-torus",
];

pub fn list_pairs() -> Vec<CatalogEntry> {
    use Family::*;
    let entry = |id, family, g, h, constraint, defaults: &[(&'static str, usize)], status| CatalogEntry {
        id,
        family,
        g,
        h,
        constraint,
        defaults: defaults.to_vec(),
        status,
    };
    vec![
        entry("I-grassmann", I, "SU(n+m)", "S(U(n)xU(m))", "n>=1, m>=1", &[("n", 2), ("m", 1)], Status::Verifiable),
        entry("I-so8-su2sp2", I, "SO(8)", "SU(2)xSp(2)", "none", &[], Status::Verifiable),
        entry("II-su", II, "SU(n+m)", "SU(n)xSU(m)", "n>m>=1", &[("n", 2), ("m", 1)], Status::Verifiable),
        entry("II-so2n-sun", II, "SO(2n)", "SU(n)", "n>=3, n odd", &[("n", 3)], Status::Verifiable),
        entry("III-su-sp", III, "SU(2n+1)", "Sp(n)", "n>=1", &[("n", 1)], Status::Verifiable),
        entry("III-su-spu1", III, "SU(2n+1)", "Sp(n)xU(1)", "n>=1", &[("n", 1)], Status::Verifiable),
        entry("IV-so8-spin7", IV, "SO(8)", "Spin(7)", "none", &[], Status::Verifiable),
        entry("IV-so7-g2", IV, "SO(7)", "G2", "none", &[], Status::Verifiable),
        entry("IV-g2-a2", IV, "G2", "A2", "none", &[], Status::Verifiable),
        entry("V-so10-so2spin7", V, "SO(10)", "SO(2)xSpin(7)", "none", &[], Status::Verifiable),
        entry("V-so9-spin7", V, "SO(9)", "Spin(7)", "none", &[], Status::Verifiable),
        entry("V-so8-g2", V, "SO(8)", "G2", "none", &[], Status::Verifiable),
        entry("VI-so2n1-un", VI, "SO(2n+1)", "U(n)", "n>=2", &[("n", 2)], Status::Verifiable),
        entry("VI-spn-spn1u1", VI, "Sp(n)", "Sp(n-1)xU(1)", "n>=1", &[("n", 1)], Status::Verifiable),
        entry("E6-D5", V, "E6", "SO(2)xSpin(10)", "none", &[], Status::Excluded),
        entry("negative-control-su3-torus", Control, "SU(3)", "T^2", "none", &[], Status::NegativeControl),
    ]
}

pub fn catalog_entry(id: &str) -> Result<CatalogEntry> {
    list_pairs().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownPair(id.to_string()))
}

/// Defines `dθ` on matrices (and `θ` on group matrices).
#[derive(Clone, Debug)]
pub enum InvolutionDescriptor {
    Identity,
    EntrywiseConjugation,
    /// `X -> S X S^{-1}` with `S^2 = ±I`.
    ConjugateBy { s: Matrix, s_inv: Matrix },
}

impl InvolutionDescriptor {
    pub fn conjugate_by(s: Matrix) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::Involution("conjugator must be square".into()));
        }
        let sq = &s * &s;
        let n = s.rows();
        let id = Matrix::identity(n);
        if sq.distance(&id) > 1e-12 && sq.distance(&id.scale(-1.0)) > 1e-12 {
            return Err(Error::Involution("conjugator must square to ±I".into()));
        }
        let s_inv = numerics::inverse(&s)?;
        Ok(InvolutionDescriptor::ConjugateBy { s, s_inv })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InvolutionDescriptor::Identity => "identity",
            InvolutionDescriptor::EntrywiseConjugation => "entrywise-conjugation",
            InvolutionDescriptor::ConjugateBy { .. } => "conjugation-by-matrix",
        }
    }

    pub fn conjugator(&self) -> Option<&Matrix> {
        match self {
            InvolutionDescriptor::ConjugateBy { s, .. } => Some(s),
            _ => None,
        }
    }

    /// `dθ(X)`; the same formula applies to group matrices.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        match self {
            InvolutionDescriptor::Identity => x.clone(),
            InvolutionDescriptor::EntrywiseConjugation => x.conj(),
            InvolutionDescriptor::ConjugateBy { s, s_inv } => &(s * x) * s_inv,
        }
    }
}

/// Which block structure certifies membership in `K_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsModel {
    /// `S(U(n)) x S(U(m))` blocks on the diagonal.
    Blocks { n: usize, m: usize },
    /// Realified `SU(n)` inside `SO(2n)`.
    Realified { n: usize },
}

#[derive(Clone, Debug)]
pub struct Family3Data {
    pub n: usize,
    /// `sp(n)` embedded in the upper-left `2n x 2n` block.
    pub sp: LieAlgebraBasis,
    /// Complement of `sp(n)` in `su(2n)`.
    pub q_prime: Subspace,
    pub b: Subspace,
    pub regular_b: Matrix,
}

#[derive(Clone, Debug)]
pub struct HermitianData {
    pub k: LieAlgebraBasis,
    pub k_s: LieAlgebraBasis,
    pub z_k: Subspace,
    pub p: Subspace,
    pub a: Subspace,
    /// A regular element of `a`.
    pub regular: Matrix,
    pub ks_model: KsModel,
    pub family3: Option<Family3Data>,
}

#[derive(Clone, Debug)]
pub struct SphericalPair {
    pub id: String,
    pub family: Family,
    pub params: Params,
    pub g: LieAlgebraBasis,
    pub h: LieAlgebraBasis,
    pub q: Subspace,
    pub involution: InvolutionDescriptor,
    pub expected_q_dim: usize,
    pub hermitian: Option<HermitianData>,
}

impl SphericalPair {
    /// Assembles a pair from its parts, deriving `q`. Only containment of `h`
    /// in `g` is enforced.
    pub fn assemble(
        id: impl Into<String>,
        family: Family,
        params: Params,
        g: LieAlgebraBasis,
        h: LieAlgebraBasis,
        involution: InvolutionDescriptor,
        expected_q_dim: usize,
    ) -> Result<Self> {
        let q = reductive_split(&g, &h)?;
        Ok(SphericalPair { id: id.into(), family, params, g, h, q, involution, expected_q_dim, hermitian: None })
    }

    /// Replaces the involution (used to build obstruction experiments).
    pub fn with_involution(mut self, involution: InvolutionDescriptor) -> Self {
        self.involution = involution;
        self
    }

    pub fn ambient_size(&self) -> usize {
        self.g.ambient_size()
    }

    /// `dθ(X)` with no membership check.
    pub fn theta(&self, x: &Matrix) -> Matrix {
        self.involution.apply(x)
    }

    /// Whether `dθ = -Id` on `q` within `1e-12`.
    pub fn is_symmetric(&self) -> bool {
        self.q.basis().iter().all(|x| (&self.theta(x) + x).frobenius_norm() < 1e-12)
    }
}

/// `dθ(X)`, rejecting inputs outside `g` and results that leave `g`.
pub fn d_theta(pair: &SphericalPair, x: &Matrix) -> Result<Matrix> {
    if x.rows() != pair.ambient_size() || x.cols() != pair.ambient_size() {
        return Err(Error::Shape(format!("{}x{} input for a pair of size {}", x.rows(), x.cols(), pair.ambient_size())));
    }
    let before = pair.g.space().relative_residual(x);
    if before >= MEMBERSHIP_TOL {
        return Err(Error::InvalidInput(format!("input lies outside {} (residual {before:.3e})", pair.g.name())));
    }
    let y = pair.theta(x);
    let after = pair.g.space().relative_residual(&y);
    if after >= MEMBERSHIP_TOL {
        return Err(Error::Involution(format!("dθ maps {} out of itself (residual {after:.3e})", pair.g.name())));
    }
    Ok(y)
}

fn constraint(id: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Constraint { id: id.to_string(), message: message.to_string() })
    }
}

/// Resolves the parameters of `id`, filling defaults and rejecting unknown
/// names.
pub fn resolve_params(id: &str, overrides: &Params) -> Result<Params> {
    let entry = catalog_entry(id)?;
    let mut params: Params = entry.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(Error::Constraint { id: id.to_string(), message: format!("takes no parameter `{k}`") });
        }
        params.insert(k.clone(), *v);
    }
    Ok(params)
}

fn ambient_cap(id: &str, size: usize) -> Result<()> {
    constraint(id, size <= MAX_AMBIENT, &format!("ambient size {size} exceeds the desk-scale limit {MAX_AMBIENT}"))
}

pub fn build_pair(id: &str, overrides: &Params) -> Result<SphericalPair> {
    let entry = catalog_entry(id)?;
    if entry.status == Status::Excluded {
        return Err(Error::Excluded(id.to_string()));
    }
    let params = resolve_params(id, overrides)?;
    let n = params.get("n").copied().unwrap_or(0);
    let m = params.get("m").copied().unwrap_or(0);
    let pair = match id {
        "I-grassmann" => {
            constraint(id, n >= 1 && m >= 1, "n>=1, m>=1")?;
            ambient_cap(id, n + m)?;
            grassmann(n, m, params)?
        }
        "I-so8-su2sp2" => so8_su2sp2(params)?,
        "II-su" => {
            constraint(id, n > m && m >= 1, "n>m>=1")?;
            ambient_cap(id, n + m)?;
            hermitian_su(id, n, m, params)?
        }
        "II-so2n-sun" => {
            constraint(id, n >= 3 && n % 2 == 1, "n>=3, n odd")?;
            ambient_cap(id, 2 * n)?;
            hermitian_so(n, params)?
        }
        "III-su-sp" | "III-su-spu1" => {
            constraint(id, n >= 1, "n>=1")?;
            ambient_cap(id, 2 * n + 1)?;
            family_three(id, n, id == "III-su-spu1", params)?
        }
        "IV-so8-spin7" => {
            SphericalPair::assemble(id, Family::IV, params, lie::so(8)?, spin7_in_so8(), InvolutionDescriptor::Identity, 7)?
        }
        "IV-so7-g2" => {
            SphericalPair::assemble(id, Family::IV, params, lie::so(7)?, g2_basis(), InvolutionDescriptor::Identity, 7)?
        }
        "IV-g2-a2" => SphericalPair::assemble(
            id,
            Family::IV,
            params,
            g2_basis(),
            su3_in_g2(&Octonion::unit(1))?,
            InvolutionDescriptor::Identity,
            6,
        )?,
        "V-so10-so2spin7" => {
            let mut mats: Vec<Matrix> = spin7_in_so8().basis().iter().map(|x| x.padded(10, 0)).collect();
            mats.push(so2_block(10, 8));
            let h = LieAlgebraBasis::new("so(2)+spin(7)", 10, &mats)?;
            let mu = Matrix::from_real_fn(10, 10, |i, j| if i != j { 0.0 } else if i == 9 { -1.0 } else { 1.0 });
            SphericalPair::assemble(id, Family::V, params, lie::so(10)?, h, InvolutionDescriptor::conjugate_by(mu)?, 23)?
        }
        "V-so9-spin7" => {
            let mats: Vec<Matrix> = spin7_in_so8().basis().iter().map(|x| x.padded(9, 0)).collect();
            let h = LieAlgebraBasis::new("spin(7)", 9, &mats)?;
            SphericalPair::assemble(id, Family::V, params, lie::so(9)?, h, InvolutionDescriptor::Identity, 15)?
        }
        "V-so8-g2" => {
            let mats: Vec<Matrix> = g2_basis().basis().iter().map(|x| x.padded(8, 1)).collect();
            let h = LieAlgebraBasis::new("g2", 8, &mats)?;
            SphericalPair::assemble(id, Family::V, params, lie::so(8)?, h, InvolutionDescriptor::Identity, 14)?
        }
        "VI-so2n1-un" => {
            constraint(id, n >= 2, "n>=2")?;
            ambient_cap(id, 2 * n + 1)?;
            let mats: Vec<Matrix> = realified_un(n, false).iter().map(|x| x.padded(2 * n + 1, 0)).collect();
            let h = LieAlgebraBasis::new(format!("u({n})"), 2 * n + 1, &mats)?;
            SphericalPair::assemble(id, Family::VI, params, lie::so(2 * n + 1)?, h, InvolutionDescriptor::Identity, n * n + n)?
        }
        "VI-spn-spn1u1" => {
            constraint(id, n >= 1, "n>=1")?;
            ambient_cap(id, 2 * n)?;
            sp_spu1(n, params)?
        }
        "negative-control-su3-torus" => {
            let i = C64::new(0.0, 1.0);
            let h = LieAlgebraBasis::new(
                "t2",
                3,
                &[&e(3, 0, 0, i) - &e(3, 1, 1, i), &e(3, 1, 1, i) - &e(3, 2, 2, i)],
            )?;
            SphericalPair::assemble(id, Family::Control, params, su(3)?, h, InvolutionDescriptor::Identity, 6)?
        }
        _ => return Err(Error::UnknownPair(id.to_string())),
    };
    validate(&pair)?;
    Ok(pair)
}

/// Tube-type-capable control: the `SU(n+m)/S(U(n)xU(m))` hermitian model
/// with only `n >= m >= 1` enforced (`n = m` is tube type).
pub fn build_hermitian_control(n: usize, m: usize) -> Result<SphericalPair> {
    constraint("II-su", n >= m && m >= 1, "n>=m>=1")?;
    ambient_cap("II-su", n + m)?;
    let mut params = Params::new();
    params.insert("n".into(), n);
    params.insert("m".into(), m);
    let pair = hermitian_su("II-su", n, m, params)?;
    validate(&pair)?;
    Ok(pair)
}

fn validate(pair: &SphericalPair) -> Result<()> {
    if pair.q.dim() != pair.expected_q_dim {
        return Err(Error::Structure(format!(
            "{}: dim q = {} but the table predicts {}",
            pair.id,
            pair.q.dim(),
            pair.expected_q_dim
        )));
    }
    for (label, space) in [("g", pair.g.space()), ("h", pair.h.space())] {
        let worst = space.basis().iter().map(|x| space.relative_residual(&pair.theta(x))).fold(0.0, f64::max);
        if worst >= MEMBERSHIP_TOL {
            return Err(Error::Involution(format!("{}: dθ does not preserve {label} (residual {worst:.3e})", pair.id)));
        }
    }
    if let Some(herm) = &pair.hermitian {
        let checks = [
            ("dθ² = Id on g", involution_square_residual(pair)),
            ("dθ = -Id on a", minus_identity_residual(pair, &herm.a)),
            ("dθ = -Id on z_k", minus_identity_residual(pair, &herm.z_k)),
            (
                "dθ(k_s) = k_s",
                herm.k_s.basis().iter().map(|x| herm.k_s.space().relative_residual(&pair.theta(x))).fold(0.0, f64::max),
            ),
        ];
        for (name, value) in checks {
            if value >= 1e-12 {
                return Err(Error::Involution(format!("{}: {name} fails (residual {value:.3e})", pair.id)));
            }
        }
    }
    Ok(())
}

pub fn involution_square_residual(pair: &SphericalPair) -> f64 {
    pair.g.basis().iter().map(|x| pair.theta(&pair.theta(x)).distance(x)).fold(0.0, f64::max)
}

pub fn minus_identity_residual(pair: &SphericalPair, space: &Subspace) -> f64 {
    space.basis().iter().map(|x| (&pair.theta(x) + x).frobenius_norm()).fold(0.0, f64::max)
}

fn so2_block(n: usize, off: usize) -> Matrix {
    Matrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).expect("2x2").padded(n, off)
}

/// `a + ib -> [[a, -b], [b, a]]` entrywise.
pub fn realify(m: &Matrix) -> Matrix {
    let n = m.rows();
    Matrix::from_real_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r / 2, c / 2)];
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Realified complex conjugation on `C^n = R^{2n}`.
pub fn realified_conjugation(n: usize) -> Matrix {
    Matrix::from_real_fn(2 * n, 2 * n, |r, c| if r != c { 0.0 } else if r % 2 == 0 { 1.0 } else { -1.0 })
}

/// Spanning set of `u(n)` (or `su(n)` when `special`) realified into `so(2n)`.
pub fn realified_un(n: usize, special: bool) -> Vec<Matrix> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut mats = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            mats.push(&e(n, p, q, one) - &e(n, q, p, one));
            mats.push(&e(n, p, q, i) + &e(n, q, p, i));
        }
    }
    if special {
        for p in 0..n.saturating_sub(1) {
            mats.push(&e(n, p, p, i) - &e(n, p + 1, p + 1, i));
        }
    } else {
        for p in 0..n {
            mats.push(e(n, p, p, i));
        }
    }
    mats.iter().map(realify).collect()
}

/// `[[A, B], [-conj(B), conj(A)]]` in a `size x size` matrix, with the `2n`
/// quaternionic coordinates at positions `coords`.
fn sp_element(size: usize, coords: &[usize], a: &Matrix, b: &Matrix) -> Matrix {
    let n = coords.len() / 2;
    let mut out = Matrix::zeros(size, size);
    for r in 0..n {
        for c in 0..n {
            out.set(coords[r], coords[c], a[(r, c)]);
            out.set(coords[r], coords[n + c], b[(r, c)]);
            out.set(coords[n + r], coords[c], -b[(r, c)].conj());
            out.set(coords[n + r], coords[n + c], a[(r, c)].conj());
        }
    }
    out.refresh_real_marker()
}

/// Spanning set of `sp(n)` acting on the given `2n` coordinates.
pub fn sp_spanning(size: usize, coords: &[usize]) -> Vec<Matrix> {
    let n = coords.len() / 2;
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let zero = Matrix::zeros(n, n);
    let mut mats = Vec::new();
    for p in 0..n {
        for q in p..n {
            if p < q {
                mats.push(sp_element(size, coords, &(&e(n, p, q, one) - &e(n, q, p, one)), &zero));
                mats.push(sp_element(size, coords, &(&e(n, p, q, i) + &e(n, q, p, i)), &zero));
                mats.push(sp_element(size, coords, &zero, &(&e(n, p, q, one) + &e(n, q, p, one))));
                mats.push(sp_element(size, coords, &zero, &(&e(n, p, q, i) + &e(n, q, p, i))));
            } else {
                mats.push(sp_element(size, coords, &e(n, p, p, i), &zero));
                mats.push(sp_element(size, coords, &zero, &e(n, p, p, one)));
                mats.push(sp_element(size, coords, &zero, &e(n, p, p, i)));
            }
        }
    }
    mats
}

fn quat_left(q: [f64; 4]) -> Matrix {
    let [a, b, c, d] = q;
    Matrix::from_real(4, 4, &[a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a]).expect("4x4")
}

fn quat_right(q: [f64; 4]) -> Matrix {
    let [a, b, c, d] = q;
    Matrix::from_real(4, 4, &[a, -b, -c, -d, b, a, d, -c, c, -d, a, b, d, c, -b, a]).expect("4x4")
}

fn quat_unit(i: usize) -> [f64; 4] {
    let mut q = [0.0; 4];
    q[i] = 1.0;
    q
}

fn place(dst: &mut Matrix, block: &Matrix, r0: usize, c0: usize) {
    for r in 0..block.rows() {
        for c in 0..block.cols() {
            dst.set(r0 + r, c0 + c, block[(r, c)]);
        }
    }
}

fn grassmann(n: usize, m: usize, params: Params) -> Result<SphericalPair> {
    let size = n + m;
    let g = su(size)?;
    let s = Matrix::from_real_fn(size, size, |i, j| if i != j { 0.0 } else if i < n { 1.0 } else { -1.0 });
    let mats: Vec<Matrix> = g.basis().iter().map(|x| (x + &(&(&s * x) * &s)).scale(0.5)).collect();
    let h = LieAlgebraBasis::new(format!("s(u({n})+u({m}))"), size, &mats)?;
    SphericalPair::assemble("I-grassmann", Family::I, params, g, h, InvolutionDescriptor::conjugate_by(s)?, 2 * n * m)
}

/// `sp(2) + sp(1)` acting on `H^2 = R^8`: quaternionic matrices on the left,
/// scalars on the right.
fn so8_su2sp2(params: Params) -> Result<SphericalPair> {
    let mut mats = Vec::new();
    for u in 1..4 {
        let mut z = Matrix::zeros(8, 8);
        place(&mut z, &quat_right(quat_unit(u)), 0, 0);
        place(&mut z, &quat_right(quat_unit(u)), 4, 4);
        mats.push(z);
    }
    for blk in 0..2 {
        for u in 1..4 {
            let mut z = Matrix::zeros(8, 8);
            place(&mut z, &quat_left(quat_unit(u)), 4 * blk, 4 * blk);
            mats.push(z);
        }
    }
    for u in 0..4 {
        let l = quat_left(quat_unit(u));
        let mut z = Matrix::zeros(8, 8);
        place(&mut z, &l, 0, 4);
        place(&mut z, &l.transpose().scale(-1.0), 4, 0);
        mats.push(z);
    }
    let h = LieAlgebraBasis::new("sp(1)+sp(2)", 8, &mats)?;
    SphericalPair::assemble("I-so8-su2sp2", Family::I, params, lie::so(8)?, h, InvolutionDescriptor::Identity, 15)
}

/// Pads into the (n, m) block structure, assuming `x` is `k x k`.
fn block_diag(size: usize, blocks: &[(&Matrix, usize)]) -> Matrix {
    let mut out = Matrix::zeros(size, size);
    for (b, off) in blocks {
        place(&mut out, b, *off, *off);
    }
    out
}

fn hermitian_su(id: &str, n: usize, m: usize, params: Params) -> Result<SphericalPair> {
    let size = n + m;
    let g = su(size)?;
    let mut ks_mats: Vec<Matrix> = su(n)?.basis().iter().map(|x| block_diag(size, &[(x, 0)])).collect();
    ks_mats.extend(su(m)?.basis().iter().map(|x| block_diag(size, &[(x, n)])));
    let k_s = LieAlgebraBasis::new(format!("su({n})+su({m})"), size, &ks_mats)?;
    let zk_gen = Matrix::from_fn(size, size, |r, c| {
        if r != c {
            C64::new(0.0, 0.0)
        } else if r < n {
            C64::new(0.0, m as f64)
        } else {
            C64::new(0.0, -(n as f64))
        }
    });
    let z_k = Subspace::from_spanning(size, &[zk_gen])?;
    let k = LieAlgebraBasis::from_subspace(format!("s(u({n})+u({m}))"), k_s.space().sum(&z_k));
    let p = k.space().complement_in(g.space());
    let i = C64::new(0.0, 1.0);
    let a_mats: Vec<Matrix> = (0..m).map(|j| &e(size, j, n + j, i) + &e(size, n + j, j, i)).collect();
    let a = Subspace::from_spanning(size, &a_mats)?;
    let regular = regular_combination(&a_mats);
    let mut pair =
        SphericalPair::assemble(id, Family::II, params, g, k_s.clone(), InvolutionDescriptor::EntrywiseConjugation, 2 * n * m + 1)?;
    pair.hermitian = Some(HermitianData {
        k,
        k_s,
        z_k,
        p,
        a,
        regular,
        ks_model: KsModel::Blocks { n, m },
        family3: None,
    });
    Ok(pair)
}

/// `sum_j (1 + 0.73 j) A_j`: distinct positive weights, regular for the
/// restricted root systems that occur here.
fn regular_combination(mats: &[Matrix]) -> Matrix {
    let size = mats.first().map_or(0, Matrix::rows);
    let mut out = Matrix::zeros(size, size);
    for (j, x) in mats.iter().enumerate() {
        out.axpy(1.0 + 0.73 * j as f64, x);
    }
    out
}

fn hermitian_so(n: usize, params: Params) -> Result<SphericalPair> {
    let size = 2 * n;
    let g = lie::so(size)?;
    let k_s = LieAlgebraBasis::new(format!("su({n})"), size, &realified_un(n, true))?;
    let k = LieAlgebraBasis::new(format!("u({n})"), size, &realified_un(n, false))?;
    let z_k = k_s.space().complement_in(k.space());
    let p = k.space().complement_in(g.space());
    let conj = realified_conjugation(n);
    let i = C64::new(0.0, 1.0);
    let a_mats: Vec<Matrix> = (0..n / 2)
        .map(|j| &realify(&(&e(n, 2 * j, 2 * j + 1, i) - &e(n, 2 * j + 1, 2 * j, i))) * &conj)
        .collect();
    let a = Subspace::from_spanning(size, &a_mats)?;
    let regular = regular_combination(&a_mats);
    let mut pair = SphericalPair::assemble(
        "II-so2n-sun",
        Family::II,
        params,
        g,
        k_s.clone(),
        InvolutionDescriptor::conjugate_by(conj)?,
        n * n - n + 1,
    )?;
    pair.hermitian = Some(HermitianData { k, k_s, z_k, p, a, regular, ks_model: KsModel::Realified { n }, family3: None });
    Ok(pair)
}

fn family_three(id: &str, n: usize, with_u1: bool, params: Params) -> Result<SphericalPair> {
    let size = 2 * n + 1;
    let g = su(size)?;
    let coords: Vec<usize> = (0..2 * n).collect();
    let sp = LieAlgebraBasis::new(format!("sp({n})"), size, &sp_spanning(size, &coords))?;
    let k_s_mats: Vec<Matrix> = su(2 * n)?.basis().iter().map(|x| x.padded(size, 0)).collect();
    let k_s = LieAlgebraBasis::new(format!("su({})", 2 * n), size, &k_s_mats)?;
    let i = C64::new(0.0, 1.0);
    let zk_gen = Matrix::from_fn(size, size, |r, c| {
        if r != c {
            C64::new(0.0, 0.0)
        } else if r < 2 * n {
            i
        } else {
            C64::new(0.0, -2.0 * n as f64)
        }
    });
    let z_k = Subspace::from_spanning(size, std::slice::from_ref(&zk_gen))?;
    let k = LieAlgebraBasis::from_subspace(format!("s(u({})+u(1))", 2 * n), k_s.space().sum(&z_k));
    let p = k.space().complement_in(g.space());
    let a_mat = &e(size, 0, 2 * n, i) + &e(size, 2 * n, 0, i);
    let a = Subspace::from_spanning(size, std::slice::from_ref(&a_mat))?;
    let q_prime = sp.space().complement_in(k_s.space());
    let b_mats: Vec<Matrix> = (0..n.saturating_sub(1))
        .map(|j| {
            let mut x = Matrix::zeros(size, size);
            x.set(j, j, i);
            x.set(j + 1, j + 1, -i);
            x.set(n + j, n + j, i);
            x.set(n + j + 1, n + j + 1, -i);
            x
        })
        .collect();
    let b = Subspace::from_spanning(size, &b_mats)?;
    let regular_b = {
        let mean = (n as f64 - 1.0) / 2.0;
        Matrix::from_fn(size, size, |r, c| {
            if r != c || r == 2 * n {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, (r % n) as f64 - mean)
            }
        })
    };
    let (h, expected) = if with_u1 {
        let h = LieAlgebraBasis::from_subspace(format!("sp({n})+u(1)"), sp.space().sum(&z_k));
        (h, 2 * n * n + 3 * n - 1)
    } else {
        (sp.clone(), 2 * n * n + 3 * n)
    };
    let mut pair = SphericalPair::assemble(id, Family::III, params, g, h, InvolutionDescriptor::EntrywiseConjugation, expected)?;
    pair.hermitian = Some(HermitianData {
        k,
        k_s,
        z_k,
        p,
        a,
        regular: a_mat,
        ks_model: KsModel::Blocks { n: 2 * n, m: 1 },
        family3: Some(Family3Data { n, sp, q_prime, b, regular_b }),
    });
    Ok(pair)
}

fn sp_spu1(n: usize, params: Params) -> Result<SphericalPair> {
    let size = 2 * n;
    let coords: Vec<usize> = (0..size).collect();
    let g = LieAlgebraBasis::new(format!("sp({n})"), size, &sp_spanning(size, &coords))?;
    let i = C64::new(0.0, 1.0);
    let mut mats = vec![&e(size, 0, 0, i) - &e(size, n, n, i)];
    if n > 1 {
        let sub: Vec<usize> = (1..n).chain(n + 1..2 * n).collect();
        mats.extend(sp_spanning(size, &sub));
    }
    let h = LieAlgebraBasis::new(format!("sp({})+u(1)", n - 1), size, &mats)?;
    SphericalPair::assemble("VI-spn-spn1u1", Family::VI, params, g, h, InvolutionDescriptor::Identity, 4 * n - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, usize)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn catalog_lists_table_rows() {
        let rows = list_pairs();
        let find = |id: &str| rows.iter().find(|r| r.id == id).unwrap().clone();
        assert_eq!(find("III-su-sp").constraint, "n>=1");
        assert_eq!(find("VI-so2n1-un").constraint, "n>=2");
        assert_eq!(find("VI-spn-spn1u1").constraint, "n>=1");
        assert_eq!(find("E6-D5").status, Status::Excluded);
        assert_eq!(find("negative-control-su3-torus").status, Status::NegativeControl);
        assert_eq!(rows.len(), PAIR_IDS.len());
    }

    #[test]
    fn unknown_and_excluded_ids() {
        assert!(matches!(build_pair("nope", &Params::new()), Err(Error::UnknownPair(_))));
        assert!(matches!(build_pair("E6-D5", &Params::new()), Err(Error::Excluded(_))));
        assert!(matches!(build_pair("IV-so8-spin7", &params(&[("n", 2)])), Err(Error::Constraint { .. })));
    }

    #[test]
    fn constraints_are_enforced() {
        assert!(build_pair("II-su", &params(&[("n", 1), ("m", 1)])).is_err());
        assert!(build_pair("II-so2n-sun", &params(&[("n", 4)])).is_err());
        assert!(build_pair("VI-so2n1-un", &params(&[("n", 1)])).is_err());
        assert!(build_pair("III-su-sp", &params(&[("n", 0)])).is_err());
        assert!(build_pair("III-su-sp", &params(&[("n", 10)])).is_err());
    }

    #[test]
    fn family_three_dimensions() {
        let pair = build_pair("III-su-sp", &params(&[("n", 2)])).unwrap();
        assert_eq!((pair.g.dim(), pair.h.dim(), pair.q.dim()), (24, 10, 14));
        let herm = pair.hermitian.as_ref().unwrap();
        let f3 = herm.family3.as_ref().unwrap();
        assert_eq!(f3.q_prime.dim(), 5);
        assert_eq!(f3.b.dim(), 1);
        assert_eq!(herm.p.dim(), 8);
        let a = &herm.a.basis()[0];
        assert!((&d_theta(&pair, a).unwrap() + a).frobenius_norm() < 1e-15);
    }

    #[test]
    fn sp_matches_symplectic_condition() {
        // X^T Ω + Ω X = 0 with Ω = [[0, I], [-I, 0]], skew-Hermitian, traceless.
        for n in 1..4 {
            let coords: Vec<usize> = (0..2 * n).collect();
            let sp = LieAlgebraBasis::new("sp", 2 * n, &sp_spanning(2 * n, &coords)).unwrap();
            assert_eq!(sp.dim(), 2 * n * n + n);
            let omega = Matrix::from_real_fn(2 * n, 2 * n, |r, c| {
                if c == r + n {
                    1.0
                } else if r == c + n {
                    -1.0
                } else {
                    0.0
                }
            });
            for x in sp.basis() {
                assert!((&(&x.transpose() * &omega) + &(&omega * x)).frobenius_norm() < 1e-14);
            }
            assert!(sp.skew_residual() < 1e-15);
            assert!(sp.closure_residual() < 1e-12);
        }
    }

    #[test]
    fn realification_is_a_homomorphism() {
        let g = su(3).unwrap();
        let x = &g.basis()[1];
        let y = &g.basis()[4];
        let lhs = realify(&lie::comm(x, y));
        let rhs = lie::comm(&realify(x), &realify(y));
        assert!(lhs.distance(&rhs) < 1e-14);
        let c = realified_conjugation(3);
        assert!((&(&c * &realify(x)) * &c).distance(&realify(&x.conj())) < 1e-14);
    }

    #[test]
    fn involution_descriptor_examples() {
        let pair = build_pair("IV-so7-g2", &Params::new()).unwrap();
        let x = &pair.q.basis()[0];
        assert!(d_theta(&pair, x).unwrap().distance(x) == 0.0);
        let pair = build_pair("II-su", &Params::new()).unwrap();
        for x in pair.g.basis() {
            let y = d_theta(&pair, &d_theta(&pair, x).unwrap()).unwrap();
            assert!(y.distance(x) < 1e-15);
        }
        assert!(d_theta(&pair, &Matrix::identity(3)).is_err());
        assert!(InvolutionDescriptor::conjugate_by(Matrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn so10_pair_splits_as_expected() {
        let pair = build_pair("V-so10-so2spin7", &Params::new()).unwrap();
        assert_eq!((pair.h.dim(), pair.q.dim()), (22, 23));
    }

    #[test]
    fn hermitian_control_allows_tube_type() {
        assert!(build_hermitian_control(1, 1).is_ok());
        assert!(build_hermitian_control(2, 2).is_ok());
        assert!(build_hermitian_control(1, 2).is_err());
    }
}

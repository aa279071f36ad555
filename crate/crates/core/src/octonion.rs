//! Octonions and the exceptional algebras built from them.
//!
//! Multiplication uses the cyclic Fano convention `e_i e_{i+1} = e_{i+3}`
//! (indices 1..7, taken mod 7), i.e. the seven oriented lines
//! (1,2,4) (2,3,5) (3,4,6) (4,5,7) (5,6,1) (6,7,2) (7,1,3).

use std::ops::Mul;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lie::{comm, LieAlgebraBasis, Subspace};
use crate::numerics::{self, Matrix};

pub const FANO_LINES: [(usize, usize, usize); 7] =
    [(1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)];

/// Coefficients over `{1, e_1, ..., e_7}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Octonion(pub [f64; 8]);

/// `table[i][j] = (sign, k)` with `e_i e_j = sign * e_k`.
#[allow(clippy::needless_range_loop)]
fn table() -> &'static [[(f64, usize); 8]; 8] {
    static TABLE: OnceLock<[[(f64, usize); 8]; 8]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[(0.0, 0); 8]; 8];
        for i in 0..8 {
            t[0][i] = (1.0, i);
            t[i][0] = (1.0, i);
        }
        for i in 1..8 {
            t[i][i] = (-1.0, 0);
        }
        for &(a, b, c) in &FANO_LINES {
            for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                t[x][y] = (1.0, z);
                t[y][x] = (-1.0, z);
            }
        }
        t
    })
}

impl Octonion {
    pub fn unit(i: usize) -> Self {
        let mut c = [0.0; 8];
        c[i] = 1.0;
        Octonion(c)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn real(&self) -> f64 {
        self.0[0]
    }
}

#[allow(clippy::needless_range_loop)]
pub fn oct_mul(x: &Octonion, y: &Octonion) -> Octonion {
    let t = table();
    let mut out = [0.0; 8];
    for i in 0..8 {
        if x.0[i] == 0.0 {
            continue;
        }
        for j in 0..8 {
            let (s, k) = t[i][j];
            out[k] += s * x.0[i] * y.0[j];
        }
    }
    Octonion(out)
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        oct_mul(&self, &rhs)
    }
}

/// Matrices of `x -> e_i x` for `i = 1..7`.
pub fn left_mult_operators() -> Vec<Matrix> {
    (1..8)
        .map(|i| {
            let ei = Octonion::unit(i);
            Matrix::from_real_fn(8, 8, |r, c| oct_mul(&ei, &Octonion::unit(c)).0[r])
        })
        .collect()
}

/// Span of `{L_i L_j : i < j}` inside `so(8)`.
pub fn spin7_in_so8() -> LieAlgebraBasis {
    static CELL: OnceLock<LieAlgebraBasis> = OnceLock::new();
    CELL.get_or_init(|| {
        let l = left_mult_operators();
        let mut mats = Vec::new();
        for i in 0..7 {
            for j in (i + 1)..7 {
                mats.push(&l[i] * &l[j]);
            }
        }
        LieAlgebraBasis::new("spin(7)", 8, &mats).expect("8x8 products")
    })
    .clone()
}

/// The derivation system `D(e_i e_j) - D(e_i) e_j - e_i D(e_j) = 0`
/// restricted to imaginary components: 343 equations in the 49 entries of a
/// real 7x7 `D` acting on `Im O`.
pub fn derivation_system() -> Matrix {
    let t = table();
    // D acts on Im O; extend by D(1) = 0. Unknown index u = 7*r + c means D[r][c].
    let mut rows = Vec::with_capacity(343 * 49);
    for i in 1..8 {
        for j in 1..8 {
            let (sij, kij) = t[i][j];
            for out in 1..8 {
                let mut row = vec![0.0; 49];
                // D(e_i e_j) = sij * D(e_kij); component `out` is D[out-1][kij-1].
                if kij != 0 {
                    row[7 * (out - 1) + (kij - 1)] += sij;
                }
                // D(e_i) e_j = sum_r D[r][i] e_r e_j
                for r in 1..8 {
                    let (s, k) = t[r][j];
                    if k == out {
                        row[7 * (r - 1) + (i - 1)] -= s;
                    }
                }
                // e_i D(e_j) = sum_r D[r][j] e_i e_r
                for r in 1..8 {
                    let (s, k) = t[i][r];
                    if k == out {
                        row[7 * (r - 1) + (j - 1)] -= s;
                    }
                }
                rows.extend(row);
            }
        }
    }
    Matrix::from_real(343, 49, &rows).expect("343x49 system")
}

/// `g2` as derivations of `O`, acting on `Im O = R^7`.
pub fn g2_basis() -> LieAlgebraBasis {
    static CELL: OnceLock<LieAlgebraBasis> = OnceLock::new();
    CELL.get_or_init(|| {
        let null = numerics::nullspace(&derivation_system(), numerics::DEFAULT_RANK_TOL).expect("svd of a finite system");
        let mats: Vec<Matrix> = null
            .iter()
            .map(|v| Matrix::from_real_fn(7, 7, |r, c| v[(7 * r + c, 0)].re))
            .collect();
        LieAlgebraBasis::new("g2", 7, &mats).expect("7x7 derivations")
    })
    .clone()
}

/// `{D in g2 : D(e) = 0}` for a unit imaginary octonion `e`.
pub fn su3_in_g2(e: &Octonion) -> Result<LieAlgebraBasis> {
    if e.real().abs() > 1e-12 {
        return Err(Error::InvalidInput("stabilizer needs an imaginary octonion".into()));
    }
    if (e.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("stabilizer needs a unit octonion, norm is {}", e.norm())));
    }
    let g2 = g2_basis();
    let v = Matrix::real_column(&e.0[1..]);
    let images: Vec<Matrix> = g2.basis().iter().map(|d| d * &v).collect();
    let system = Matrix::from_fn(7, g2.dim(), |r, c| images[c][(r, 0)]);
    let null = numerics::nullspace(&system, numerics::DEFAULT_RANK_TOL)?;
    let mats: Vec<Matrix> = null.iter().map(|c| g2.space().combine(&c.real_parts())).collect();
    LieAlgebraBasis::new("su(3)", 7, &mats)
}

/// `D(xy) - D(x)y - xD(y)` for `D` acting on `Im O`.
pub fn leibniz_residual(d: &Matrix, x: &Octonion, y: &Octonion) -> f64 {
    let apply = |o: &Octonion| {
        let v = Matrix::real_column(&o.0[1..]);
        let dv = d * &v;
        let mut c = [0.0; 8];
        for i in 0..7 {
            c[i + 1] = dv[(i, 0)].re;
        }
        Octonion(c)
    };
    let lhs = apply(&oct_mul(x, y));
    let r1 = oct_mul(&apply(x), y);
    let r2 = oct_mul(x, &apply(y));
    (0..8).map(|k| (lhs.0[k] - r1.0[k] - r2.0[k]).powi(2)).sum::<f64>().sqrt()
}

/// Dimension of the space reached by iterated commutators of the given
/// generators, starting from their span.
pub fn bracket_closure_dim(generators: &[Matrix]) -> Result<usize> {
    let n = generators.first().map_or(0, Matrix::rows);
    let mut space = Subspace::from_spanning(n, generators)?;
    loop {
        let mut new = space.basis().to_vec();
        for a in space.basis() {
            for b in space.basis() {
                new.push(comm(a, b));
            }
        }
        let next = Subspace::from_spanning(n, &new)?;
        if next.dim() == space.dim() {
            return Ok(space.dim());
        }
        space = next;
    }
}

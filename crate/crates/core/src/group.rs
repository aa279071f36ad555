//! Group elements carried as a product of exponentials.

use crate::error::Result;
use crate::lie::{adjoint_unitary, Subspace};
use crate::numerics::{mat_exp, Matrix};

/// A unitary matrix together with Lie-algebra factors `xi_1, ..., xi_r` such
/// that `matrix = exp(xi_1) ... exp(xi_r)`.
#[derive(Clone, Debug)]
pub struct GroupElement {
    matrix: Matrix,
    factors: Vec<Matrix>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement { matrix: Matrix::identity(n), factors: Vec::new() }
    }

    pub fn exp(xi: &Matrix) -> Result<Self> {
        Ok(GroupElement { matrix: mat_exp(xi)?, factors: vec![xi.clone()] })
    }

    pub fn from_factors(n: usize, factors: Vec<Matrix>) -> Result<Self> {
        let mut matrix = Matrix::identity(n);
        for f in &factors {
            matrix = &matrix * &mat_exp(f)?;
        }
        Ok(GroupElement { matrix, factors })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        GroupElement { matrix: &self.matrix * &other.matrix, factors }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.matrix.adjoint(),
            factors: self.factors.iter().rev().map(|f| f.scale(-1.0)).collect(),
        }
    }

    /// `exp(xi) * self`.
    pub fn left_exp(&self, xi: &Matrix) -> Result<GroupElement> {
        let mut factors = Vec::with_capacity(self.factors.len() + 1);
        factors.push(xi.clone());
        factors.extend(self.factors.iter().cloned());
        Ok(GroupElement { matrix: &mat_exp(xi)? * &self.matrix, factors })
    }

    /// Applies an automorphism given on the algebra (`on_factor`) and on the
    /// group (`on_matrix`).
    pub fn map(&self, on_factor: impl Fn(&Matrix) -> Matrix, on_matrix: impl Fn(&Matrix) -> Matrix) -> GroupElement {
        GroupElement { matrix: on_matrix(&self.matrix), factors: self.factors.iter().map(on_factor).collect() }
    }

    /// `g X g*`.
    pub fn act(&self, x: &Matrix) -> Matrix {
        adjoint_unitary(&self.matrix, x)
    }

    /// `|g g* - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.matrix * &self.matrix.adjoint()).distance(&Matrix::identity(self.size()))
    }

    /// Distance between the stored matrix and the product of the factor
    /// exponentials.
    pub fn reconstruction_residual(&self) -> Result<f64> {
        let rebuilt = GroupElement::from_factors(self.size(), self.factors.clone())?;
        Ok(rebuilt.matrix.distance(&self.matrix))
    }

    /// Largest relative residual of a factor off `h`, combined with the
    /// reconstruction error.
    pub fn membership_residual(&self, h: &Subspace) -> Result<f64> {
        let factors = self.factors.iter().map(|f| h.relative_residual(f)).fold(0.0, f64::max);
        Ok(factors.max(self.reconstruction_residual()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{random_element, su};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn products_and_inverses_track_factors() {
        let g = su(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = GroupElement::exp(&random_element(g.space(), &mut rng).scale(2.0)).unwrap();
        let b = GroupElement::exp(&random_element(g.space(), &mut rng).scale(2.0)).unwrap();
        let ab = a.mul(&b).left_exp(&random_element(g.space(), &mut rng)).unwrap();
        assert_eq!(ab.factors().len(), 3);
        assert!(ab.reconstruction_residual().unwrap() < 1e-12);
        let id = ab.mul(&ab.inverse());
        assert!(id.matrix().distance(&Matrix::identity(3)) < 1e-12);
        assert!(id.membership_residual(g.space()).unwrap() < 1e-12);
        assert!(ab.unitarity_residual() < 1e-12);
    }

    #[test]
    fn membership_flags_foreign_factor() {
        let g = su(2).unwrap();
        let t = Subspace::from_spanning(2, &[g.basis()[2].clone()]).unwrap();
        let x = GroupElement::exp(&g.basis()[0]).unwrap();
        assert!(x.membership_residual(&t).unwrap() > 0.5);
    }
}

//! Degree-tagged matrices and cochains.

use std::fmt;

use nalgebra::{DMatrix, DVector, Scalar};

use crate::error::{Error, Result};

/// A cochain space: the degree k together with the number of k-simplices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub degree: usize,
    pub dim: usize,
}

impl Space {
    pub fn new(degree: usize, dim: usize) -> Self {
        Self { degree, dim }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C^{}[{}]", self.degree, self.dim)
    }
}

/// Matrix of a linear map between cochain spaces. Rows index the codomain,
/// columns the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator<T: Scalar = f64> {
    domain: Space,
    codomain: Space,
    matrix: DMatrix<T>,
}

impl<T: Scalar> LinearOperator<T> {
    /// Panics if the matrix shape disagrees with the tags.
    pub fn new(domain: Space, codomain: Space, matrix: DMatrix<T>) -> Self {
        assert_eq!(
            (matrix.nrows(), matrix.ncols()),
            (codomain.dim, domain.dim),
            "matrix shape does not match {domain} -> {codomain}"
        );
        Self {
            domain,
            codomain,
            matrix,
        }
    }

    pub fn domain(&self) -> Space {
        self.domain
    }

    pub fn codomain(&self) -> Space {
        self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// The transposed matrix with the tags swapped.
    pub fn transpose(&self) -> Self {
        Self {
            domain: self.codomain,
            codomain: self.domain,
            matrix: self.matrix.transpose(),
        }
    }
}

macro_rules! impl_compose {
    ($($t:ty),*) => {$(
        impl LinearOperator<$t> {
            /// `self ∘ rhs`; the codomain of `rhs` must be the domain of `self`.
            pub fn compose(&self, rhs: &Self) -> Result<Self> {
                if rhs.codomain != self.domain {
                    return Err(Error::ShapeMismatch(format!(
                        "{} -> {} after {} -> {}",
                        self.domain, self.codomain, rhs.domain, rhs.codomain
                    )));
                }
                Ok(Self {
                    domain: rhs.domain,
                    codomain: self.codomain,
                    matrix: &self.matrix * &rhs.matrix,
                })
            }
        }
    )*};
}

impl_compose!(i64, f64);

impl LinearOperator<i64> {
    pub fn to_real(&self) -> LinearOperator<f64> {
        LinearOperator {
            domain: self.domain,
            codomain: self.codomain,
            matrix: self.matrix.map(|x| x as f64),
        }
    }
}

impl LinearOperator<f64> {
    pub fn identity(space: Space) -> Self {
        Self::new(space, space, DMatrix::identity(space.dim, space.dim))
    }

    pub fn diagonal(space: Space, diag: &[f64]) -> Self {
        Self::new(
            space,
            space,
            DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        )
    }

    pub fn apply(&self, f: &Cochain) -> Result<Cochain> {
        if f.degree != self.domain.degree || f.values.len() != self.domain.dim {
            return Err(Error::DegreeMismatch {
                expected: self.domain.degree,
                found: f.degree,
            });
        }
        Ok(Cochain::new(self.codomain.degree, &self.matrix * &f.values))
    }
}

/// Values of a discrete k-form, one per k-simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub values: DVector<f64>,
}

impl Cochain {
    pub fn new(degree: usize, values: DVector<f64>) -> Self {
        Self { degree, values }
    }

    pub fn zeros(space: Space) -> Self {
        Self::new(space.degree, DVector::zeros(space.dim))
    }

    pub fn from_slice(degree: usize, values: &[f64]) -> Self {
        Self::new(degree, DVector::from_column_slice(values))
    }
}

/// `fᵀ M g`.
pub fn inner_product(f: &Cochain, g: &Cochain, mass: &LinearOperator) -> Result<f64> {
    let k = mass.domain().degree;
    for c in [f, g] {
        if c.degree != k || c.values.len() != mass.domain().dim {
            return Err(Error::DegreeMismatch {
                expected: k,
                found: c.degree,
            });
        }
    }
    Ok(f.values.dot(&(mass.matrix() * &g.values)))
}

/// Pointwise components of a double form in coordinate coframes: rows index
/// the x-slot, columns the y-slot. 1×1 for degrees 0 and 2, 2×2 for 1-forms
/// on a surface.
#[derive(Clone, Debug, PartialEq)]
pub struct FormComponentMatrix {
    pub degree: (usize, usize),
    pub values: DMatrix<f64>,
}

impl FormComponentMatrix {
    pub fn scalar(degree: usize, value: f64) -> Self {
        Self {
            degree: (degree, degree),
            values: DMatrix::from_element(1, 1, value),
        }
    }

    pub fn one_form(values: [[f64; 2]; 2]) -> Self {
        Self {
            degree: (1, 1),
            values: DMatrix::from_fn(2, 2, |i, j| values[i][j]),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Frobenius norm of the component matrix.
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// Components with the roles of x and y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            degree: (self.degree.1, self.degree.0),
            values: self.values.transpose(),
        }
    }

    /// Row-major component values.
    pub fn components(&self) -> Vec<f64> {
        let (r, c) = self.values.shape();
        (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| self.values[(i, j)]).collect()
    }
}

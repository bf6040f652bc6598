//! Spectral solution of the discrete heat equation `(L_k + ∂_t) u = 0`.
//!
//! The generalized problem `(M_k L_k) φ = λ M_k φ` is reduced to a standard
//! symmetric one by the diagonal scaling `M^{-1/2}`, solved densely, and the
//! eigenvectors are scaled back so that `Φᵀ M Φ = I`. Every kernel is then a
//! spectral function `Φ diag(f(λ)) Φᵀ`; as an operator on cochains it acts as
//! `K M`.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::operator::{Cochain, LinearOperator};

/// Relative factor for the harmonic threshold, scaled by `λ_max + 1`.
pub const ZERO_TOL_FACTOR: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectralData {
    degree: usize,
    eigenvalues: Vec<f64>,
    /// Columns are `M`-orthonormal eigenvectors, in the order of `eigenvalues`.
    eigenvectors: DMatrix<f64>,
    mass: DVector<f64>,
    zero_tol: f64,
}

/// Solves `L φ = λ φ` with `L` self-adjoint in the inner product of the
/// positive diagonal `M`.
pub fn eigendecompose(l: &LinearOperator, m: &LinearOperator) -> Result<SpectralData> {
    if l.domain() != l.codomain() || m.domain() != l.domain() || m.codomain() != l.domain() {
        return Err(Error::ShapeMismatch(format!(
            "L: {} -> {}, M: {} -> {}",
            l.domain(),
            l.codomain(),
            m.domain(),
            m.codomain()
        )));
    }
    let mm = m.matrix();
    let n = mm.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && mm[(i, j)] != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "mass",
                    msg: format!("mass matrix is not diagonal at ({i}, {j})"),
                });
            }
        }
    }
    let mass = mm.diagonal();
    let stiffness = DMatrix::from_diagonal(&mass) * l.matrix();
    SpectralData::from_stiffness(l.domain().degree, &stiffness, mass)
}

impl SpectralData {
    /// Decomposition of `L_k` from an assembled [`Dec`].
    pub fn from_dec(dec: &Dec, k: usize) -> Result<Self> {
        if k > dec.dim() {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                lo: 0,
                hi: dec.dim(),
            });
        }
        Self::from_stiffness(k, &dec.stiffness(k), dec.mass_diag(k).clone())
    }

    /// Solves `S φ = λ M φ` for symmetric `S = M L` and positive diagonal `M`.
    pub fn from_stiffness(degree: usize, stiffness: &DMatrix<f64>, mass: DVector<f64>) -> Result<Self> {
        let n = mass.len();
        if stiffness.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "stiffness {:?} vs mass of length {n}",
                stiffness.shape()
            )));
        }
        if let Some((index, &value)) = mass.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::NonPositiveMass { index, value });
        }
        let inv_sqrt = mass.map(|x| 1.0 / x.sqrt());
        let mut a = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (stiffness[(i, j)] + stiffness[(j, i)]) * inv_sqrt[i] * inv_sqrt[j]
        });
        // Exact symmetry keeps the eigensolver deterministic.
        for i in 0..n {
            for j in 0..i {
                a[(i, j)] = a[(j, i)];
            }
        }
        let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).component_mul(&inv_sqrt);
            let peak = col.amax();
            if let Some(lead) = col.iter().position(|x| x.abs() >= peak * (1.0 - 1e-9)) {
                if col[lead] < 0.0 {
                    col.neg_mut();
                }
            }
            eigenvectors.set_column(dst, &col);
        }

        let lmax = eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
        let zero_tol = ZERO_TOL_FACTOR * (lmax + 1.0);
        if let Some(&low) = eigenvalues.first() {
            if low < -zero_tol {
                return Err(Error::NegativeEigenvalue(low));
            }
        }
        Ok(Self {
            degree,
            eigenvalues,
            eigenvectors,
            mass,
            zero_tol,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn is_harmonic(&self, i: usize) -> bool {
        self.eigenvalues[i].abs() <= self.zero_tol
    }

    /// Dimension of the harmonic space.
    pub fn harmonic_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_harmonic(i)).count()
    }

    /// Eigenvalues above the harmonic threshold, ascending.
    pub fn nonzero_eigenvalues(&self) -> Vec<f64> {
        (0..self.len())
            .filter(|&i| !self.is_harmonic(i))
            .map(|i| self.eigenvalues[i])
            .collect()
    }

    /// `max |ΦᵀMΦ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let phi = &self.eigenvectors;
        let gram = phi.transpose() * DMatrix::from_diagonal(&self.mass) * phi;
        (gram - DMatrix::identity(self.len(), self.len())).amax()
    }

    /// Largest columnwise `‖Sφ − λMφ‖ / (|λ| + 1)` for the stiffness `S = M L`.
    pub fn residual(&self, stiffness: &DMatrix<f64>) -> f64 {
        let phi = &self.eigenvectors;
        let sphi = stiffness * phi;
        (0..self.len())
            .map(|i| {
                let lam = self.eigenvalues[i];
                let r = sphi.column(i) - phi.column(i).component_mul(&self.mass) * lam;
                r.norm() / (lam.abs() + 1.0)
            })
            .fold(0.0, f64::max)
    }

    /// `Φ diag(w) Φᵀ`, where `w_i = weight(λ_i)` and harmonic modes get
    /// `weight(0)` passed with the flag set.
    pub fn spectral_matrix(&self, weight: impl Fn(f64, bool) -> f64) -> DMatrix<f64> {
        let n = self.len();
        let mut scaled = self.eigenvectors.clone();
        for i in 0..n {
            let harmonic = self.is_harmonic(i);
            let lam = if harmonic { 0.0 } else { self.eigenvalues[i] };
            let w = weight(lam, harmonic);
            scaled.column_mut(i).scale_mut(w);
        }
        let mut k = scaled * self.eigenvectors.transpose();
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (k[(i, j)] + k[(j, i)]);
                k[(i, j)] = avg;
                k[(j, i)] = avg;
            }
        }
        k
    }
}

/// What a [`KernelMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "t", rename_all = "lowercase")]
pub enum KernelTime {
    /// `K_k(·, ·, t)`.
    At(f64),
    /// `∫_t^∞ (K_k − C) dτ`.
    Tail(f64),
    /// The large-time limit `C`.
    Harmonic,
}

impl fmt::Display for KernelTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelTime::At(t) => write!(f, "t={t}"),
            KernelTime::Tail(t) => write!(f, "tail from t={t}"),
            KernelTime::Harmonic => write!(f, "harmonic"),
        }
    }
}

/// Discrete double form: rows index the x-slot, columns the y-slot.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub degree: usize,
    pub time: KernelTime,
    pub entries: DMatrix<f64>,
}

impl KernelMatrix {
    /// Trace of the operator `K M`.
    pub fn operator_trace(&self, mass: &DVector<f64>) -> f64 {
        self.entries.diagonal().dot(mass)
    }

    /// The operator `K M` acting on cochains.
    pub fn operator(&self, mass: &DVector<f64>) -> DMatrix<f64> {
        let mut out = self.entries.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.scale_mut(mass[j]);
        }
        out
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime {
            expect: "finite and >= 0",
            got: t,
        });
    }
    Ok(())
}

/// `Σ e^{−λ_i t} φ_i φ_iᵀ`.
pub fn heat_kernel_matrix(s: &SpectralData, t: f64) -> Result<KernelMatrix> {
    check_time(t)?;
    Ok(KernelMatrix {
        degree: s.degree,
        time: KernelTime::At(t),
        entries: s.spectral_matrix(|lam, _| (-lam * t).exp()),
    })
}

/// `Σ_{λ_i > 0} e^{−λ_i t} / λ_i · φ_i φ_iᵀ`, the integral of the
/// non-harmonic part of the kernel over `[t, ∞)`.
pub fn tail_integral_kernel(s: &SpectralData, t: f64) -> Result<KernelMatrix> {
    check_time(t)?;
    Ok(KernelMatrix {
        degree: s.degree,
        time: KernelTime::Tail(t),
        entries: s.spectral_matrix(|lam, harmonic| {
            if harmonic {
                0.0
            } else {
                (-lam * t).exp() / lam
            }
        }),
    })
}

/// `Σ_{harmonic} φ_i φ_iᵀ`.
pub fn harmonic_projector(s: &SpectralData) -> KernelMatrix {
    KernelMatrix {
        degree: s.degree,
        time: KernelTime::Harmonic,
        entries: s.spectral_matrix(|_, harmonic| if harmonic { 1.0 } else { 0.0 }),
    }
}

/// `u(t) = K(t) M f`.
pub fn evolve(s: &SpectralData, f: &Cochain, t: f64) -> Result<Cochain> {
    check_time(t)?;
    if f.degree != s.degree || f.values.len() != s.len() {
        return Err(Error::DegreeMismatch {
            expected: s.degree,
            found: f.degree,
        });
    }
    // Φ e^{−Λt} Φᵀ M f without forming the kernel.
    let phi = &s.eigenvectors;
    let mut coeff = phi.transpose() * f.values.component_mul(&s.mass);
    for i in 0..s.len() {
        let lam = if s.is_harmonic(i) { 0.0 } else { s.eigenvalues[i] };
        coeff[i] *= (-lam * t).exp();
    }
    Ok(Cochain::new(s.degree, phi * coeff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::{hodge_laplacian, mass_matrix, MassScheme};
    use crate::mesh;
    use approx::assert_relative_eq;

    fn k3(k: usize) -> SpectralData {
        let c = mesh::filled_triangle();
        let l = hodge_laplacian(&c, k, MassScheme::Identity).unwrap();
        let m = mass_matrix(&c, k, MassScheme::Identity).unwrap();
        eigendecompose(&l, &m).unwrap()
    }

    #[test]
    fn filled_triangle_eigenvalues() {
        // Brute force: det(L_0 − λI) = −λ(λ − 3)² for the K_3 graph Laplacian.
        let s0 = k3(0);
        for (got, want) in s0.eigenvalues().iter().zip([0.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s1 = k3(1);
        for got in s1.eigenvalues() {
            assert!((got - 3.0).abs() < 1e-12);
        }
        assert_eq!(s0.harmonic_count(), 1);
        assert_eq!(s1.harmonic_count(), 0);
    }

    #[test]
    fn zero_operator_is_all_harmonic() {
        let space = crate::Space::new(0, 4);
        let l = LinearOperator::new(space, space, DMatrix::zeros(4, 4));
        let m = LinearOperator::diagonal(space, &[1.0, 2.0, 0.5, 4.0]);
        let s = eigendecompose(&l, &m).unwrap();
        assert!(s.eigenvalues().iter().all(|&x| x == 0.0));
        assert_eq!(s.harmonic_count(), 4);
        assert!(s.orthonormality_error() < 1e-14);
        let tail = tail_integral_kernel(&s, 0.3).unwrap();
        assert!(tail.entries.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_bad_mass() {
        let space = crate::Space::new(0, 2);
        let l = LinearOperator::identity(space);
        let m = LinearOperator::diagonal(space, &[1.0, 0.0]);
        assert!(matches!(eigendecompose(&l, &m), Err(Error::NonPositiveMass { index: 1, .. })));
        let full = LinearOperator::new(space, space, DMatrix::from_element(2, 2, 1.0));
        assert!(eigendecompose(&l, &full).is_err());
    }

    #[test]
    fn heat_kernel_small_cases() {
        let s = k3(0);
        let k0 = heat_kernel_matrix(&s, 0.0).unwrap();
        let id = k0.operator(s.mass());
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-10);
        let late = heat_kernel_matrix(&s, 1e6).unwrap();
        assert!(late.entries.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-12));
        for t in [0.05, 0.4, 2.0] {
            let tr = heat_kernel_matrix(&s, t).unwrap().operator_trace(s.mass());
            assert_relative_eq!(tr, 1.0 + 2.0 * (-3.0 * t).exp(), max_relative = 1e-12);
            let tail = tail_integral_kernel(&s, t).unwrap().operator_trace(s.mass());
            assert_relative_eq!(tail, 2.0 / 3.0 * (-3.0 * t).exp(), max_relative = 1e-12);
        }
        assert!(heat_kernel_matrix(&s, -1.0).is_err());
        assert!(tail_integral_kernel(&s, f64::NAN).is_err());
    }

    #[test]
    fn single_mode_tail_weight() {
        let space = crate::Space::new(0, 1);
        let l = LinearOperator::diagonal(space, &[2.0]);
        let s = eigendecompose(&l, &LinearOperator::identity(space)).unwrap();
        let tail = tail_integral_kernel(&s, 0.0).unwrap();
        assert!((tail.entries[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn harmonic_projectors() {
        let c0 = harmonic_projector(&k3(0));
        assert!(c0.entries.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-12));
        let c1 = harmonic_projector(&k3(1));
        assert!(c1.entries.amax() < 1e-15);
    }

    #[test]
    fn evolve_actions() {
        let c = mesh::icosphere(1).unwrap();
        let dec = Dec::new(&c, MassScheme::BarycentricLumped).unwrap();
        let s = SpectralData::from_dec(&dec, 0).unwrap();
        let f = Cochain::new(0, DVector::from_fn(s.len(), |i, _| (i as f64 * 0.37).sin()));
        assert!((evolve(&s, &f, 0.0).unwrap().values - &f.values).amax() < 1e-12);
        let h = Cochain::new(0, s.eigenvectors().column(0).into_owned());
        assert!((evolve(&s, &h, 3.0).unwrap().values - &h.values).amax() < 1e-12);
        let i = 5;
        let phi = Cochain::new(0, s.eigenvectors().column(i).into_owned());
        let out = evolve(&s, &phi, 0.2).unwrap();
        let want = &phi.values * (-s.eigenvalues()[i] * 0.2).exp();
        assert!((out.values - want).amax() < 1e-12);
        let k = heat_kernel_matrix(&s, 0.2).unwrap();
        let via = k.operator(s.mass()) * &f.values;
        assert!((via - evolve(&s, &f, 0.2).unwrap().values).amax() < 1e-12);
        assert!(evolve(&s, &Cochain::from_slice(1, &[1.0]), 0.1).is_err());
    }
}

//! Discrete exterior calculus on a [`SimplicialComplex`].
//!
//! `d_k` is the transpose of the boundary operator. Each degree carries a
//! positive diagonal mass matrix `M_k` standing in for the Hodge inner
//! product `⟨μ, ν⟩ = ∫ μ ∧ *ν`, and the codifferential is the `M`-adjoint
//! of `d`:
//!
//! ```text
//! δ_k = M_{k-1}^{-1} d_{k-1}ᵀ M_k
//! L_k = δ_{k+1} d_k + d_{k-1} δ_k
//! ```
//!
//! With this choice `M_k L_k` is symmetric and `d_k L_k = L_{k+1} d_k`
//! holds exactly in exact arithmetic, for any positive masses.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::{self, SimplicialComplex};
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassScheme {
    Identity,
    /// Diagonal Hodge star built from the barycentric dual: vertex weight is
    /// a third of the incident triangle area, edge weight is dual length
    /// over primal length, face weight is one over the area.
    BarycentricLumped,
}

impl MassScheme {
    pub const ALL: [MassScheme; 2] = [MassScheme::Identity, MassScheme::BarycentricLumped];

    pub fn name(self) -> &'static str {
        match self {
            MassScheme::Identity => "identity",
            MassScheme::BarycentricLumped => "barycentric-lumped",
        }
    }
}

impl fmt::Display for MassScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MassScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(MassScheme::Identity),
            "barycentric-lumped" | "barycentric" => Ok(MassScheme::BarycentricLumped),
            _ => Err(Error::InvalidParameter {
                name: "scheme",
                msg: format!("unknown mass scheme {s:?}; expected identity or barycentric-lumped"),
            }),
        }
    }
}

fn check_degree(k: usize, lo: usize, hi: usize) -> Result<()> {
    if k < lo || k > hi {
        return Err(Error::DegreeOutOfRange { degree: k, lo, hi });
    }
    Ok(())
}

/// Exterior derivative `d_k : C^k → C^{k+1}`, with exact integer entries.
pub fn coboundary(c: &SimplicialComplex, k: usize) -> Result<LinearOperator<i64>> {
    if c.dim() == 0 {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            lo: 0,
            hi: 0,
        });
    }
    check_degree(k, 0, c.dim() - 1)?;
    Ok(c.boundary_matrix(k + 1)?.transpose())
}

/// Diagonal of `M_k`.
pub fn mass_diagonal(c: &SimplicialComplex, k: usize, scheme: MassScheme) -> Result<Vec<f64>> {
    check_degree(k, 0, c.dim())?;
    let n = c.count(k);
    let w = match scheme {
        MassScheme::Identity => vec![1.0; n],
        MassScheme::BarycentricLumped => barycentric(c, k)?,
    };
    if let Some((index, &value)) = w.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveMass { index, value });
    }
    Ok(w)
}

fn barycentric(c: &SimplicialComplex, k: usize) -> Result<Vec<f64>> {
    let top = c.dim();
    if top > 2 {
        return Err(Error::UnsupportedScheme {
            scheme: MassScheme::BarycentricLumped.name(),
            dim: top,
        });
    }
    if top == 0 {
        return Ok(vec![1.0; c.count(0)]);
    }
    let top_vol: Vec<f64> = (0..c.count(top)).map(|i| c.volume(top, i)).collect();
    if let Some(index) = top_vol.iter().position(|&v| v <= 0.0) {
        return Err(Error::DegenerateSimplex { degree: top, index });
    }
    if k == top {
        return Ok(top_vol.iter().map(|v| 1.0 / v).collect());
    }
    if k == 0 {
        // Barycentric dual cell of a vertex: 1/(top+1) of each incident top simplex.
        let mut w = vec![0.0; c.count(0)];
        for (s, vol) in c.simplices(top).iter().zip(&top_vol) {
            for &v in s {
                w[v] += vol / (top + 1) as f64;
            }
        }
        return Ok(w);
    }
    // k == 1, top == 2: dual edge runs through the barycenters of the
    // incident triangles and the edge midpoint.
    let cofaces = c.cofaces(1);
    let mut w = Vec::with_capacity(c.count(1));
    for (e, tris) in cofaces.iter().enumerate() {
        let len = c.volume(1, e);
        if len <= 0.0 {
            return Err(Error::DegenerateSimplex { degree: 1, index: e });
        }
        let mid = c.barycenter(1, e);
        let dual: f64 = tris
            .iter()
            .map(|&t| complex::norm(complex::sub(c.barycenter(2, t), mid)))
            .sum();
        w.push(dual / len);
    }
    Ok(w)
}

pub fn mass_matrix(c: &SimplicialComplex, k: usize, scheme: MassScheme) -> Result<LinearOperator> {
    Ok(LinearOperator::diagonal(c.space(k), &mass_diagonal(c, k, scheme)?))
}

/// `δ_k : C^k → C^{k-1}`.
pub fn codifferential(c: &SimplicialComplex, k: usize, scheme: MassScheme) -> Result<LinearOperator> {
    check_degree(k, 1, c.dim())?;
    Ok(Dec::new(c, scheme)?.codifferential(k))
}

pub fn hodge_laplacian(c: &SimplicialComplex, k: usize, scheme: MassScheme) -> Result<LinearOperator> {
    check_degree(k, 0, c.dim())?;
    Ok(Dec::new(c, scheme)?.laplacian(k))
}

/// All DEC operators of one complex under one mass scheme, assembled once.
#[derive(Clone, Debug)]
pub struct Dec {
    dim: usize,
    scheme: MassScheme,
    spaces: Vec<Space>,
    /// `d[k]` maps degree k to k+1.
    d: Vec<DMatrix<f64>>,
    mass: Vec<DVector<f64>>,
}

impl Dec {
    pub fn new(c: &SimplicialComplex, scheme: MassScheme) -> Result<Self> {
        let dim = c.dim();
        let d = (0..dim)
            .map(|k| coboundary(c, k).map(|op| op.to_real().into_matrix()))
            .collect::<Result<Vec<_>>>()?;
        let mass = (0..=dim)
            .map(|k| mass_diagonal(c, k, scheme).map(DVector::from_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            scheme,
            spaces: (0..=dim).map(|k| c.space(k)).collect(),
            d,
            mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> MassScheme {
        self.scheme
    }

    pub fn space(&self, k: usize) -> Space {
        self.spaces[k]
    }

    /// `d_k` as a real matrix. Panics unless `k < dim`.
    pub fn d(&self, k: usize) -> &DMatrix<f64> {
        &self.d[k]
    }

    pub fn mass_diag(&self, k: usize) -> &DVector<f64> {
        &self.mass[k]
    }

    pub fn mass(&self, k: usize) -> LinearOperator {
        LinearOperator::diagonal(self.spaces[k], self.mass[k].as_slice())
    }

    /// Matrix of `δ_k = M_{k-1}^{-1} d_{k-1}ᵀ M_k`. Panics unless `1 <= k <= dim`.
    pub fn delta(&self, k: usize) -> DMatrix<f64> {
        let mut m = self.d[k - 1].transpose();
        let (lo, hi) = (&self.mass[k - 1], &self.mass[k]);
        for (j, mut col) in m.column_iter_mut().enumerate() {
            for (i, x) in col.iter_mut().enumerate() {
                *x *= hi[j] / lo[i];
            }
        }
        m
    }

    pub fn codifferential(&self, k: usize) -> LinearOperator {
        LinearOperator::new(self.spaces[k], self.spaces[k - 1], self.delta(k))
    }

    /// Matrix of `L_k`.
    pub fn laplacian_matrix(&self, k: usize) -> DMatrix<f64> {
        let n = self.spaces[k].dim;
        let mut l = DMatrix::zeros(n, n);
        if k < self.dim {
            l += self.delta(k + 1) * &self.d[k];
        }
        if k > 0 {
            l += &self.d[k - 1] * self.delta(k);
        }
        l
    }

    pub fn laplacian(&self, k: usize) -> LinearOperator {
        LinearOperator::new(self.spaces[k], self.spaces[k], self.laplacian_matrix(k))
    }

    /// `M_k L_k`, assembled in its symmetric form
    /// `d_kᵀ M_{k+1} d_k + M_k d_{k-1} M_{k-1}^{-1} d_{k-1}ᵀ M_k`.
    pub fn stiffness(&self, k: usize) -> DMatrix<f64> {
        let n = self.spaces[k].dim;
        let mut s = DMatrix::zeros(n, n);
        if k < self.dim {
            let d = &self.d[k];
            let md = DMatrix::from_diagonal(&self.mass[k + 1]) * d;
            s += d.transpose() * md;
        }
        if k > 0 {
            let d = &self.d[k - 1];
            let mk = DMatrix::from_diagonal(&self.mass[k]);
            let inv = DMatrix::from_diagonal(&self.mass[k - 1].map(|x| 1.0 / x));
            let md = &mk * d;
            s += &md * inv * md.transpose();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh;
    use crate::operator::{inner_product, Cochain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / (a.norm().max(b.norm()) + f64::EPSILON)
    }

    fn corpus() -> Vec<SimplicialComplex> {
        vec![
            mesh::filled_triangle(),
            mesh::tetra_sphere(),
            mesh::icosphere(1).unwrap(),
            mesh::grid_torus(5).unwrap(),
        ]
    }

    #[test]
    fn d_squared_is_exactly_zero() {
        for c in corpus().into_iter().chain([mesh::solid_tetrahedron()]) {
            for k in 0..c.dim().saturating_sub(1) {
                let d0 = coboundary(&c, k).unwrap();
                let d1 = coboundary(&c, k + 1).unwrap();
                assert!(d1.compose(&d0).unwrap().matrix().iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn single_edge_finite_difference() {
        let c = mesh::single_edge();
        let d = coboundary(&c, 0).unwrap().to_real();
        let out = d.apply(&Cochain::from_slice(0, &[2.5, 7.0])).unwrap();
        assert_eq!(out.values[0], 4.5);
        assert!(coboundary(&c, 1).is_err());
    }

    #[test]
    fn identity_single_edge_codifferential_is_transpose() {
        let c = mesh::single_edge();
        let delta = codifferential(&c, 1, MassScheme::Identity).unwrap();
        let dt = coboundary(&c, 0).unwrap().to_real().transpose();
        assert_eq!(delta.matrix(), dt.matrix());
        assert_eq!(delta.domain(), dt.domain());
    }

    #[test]
    fn tetra_d1_rank() {
        // rank d_1 = rank ∂_2 = F − b_2 = 4 − 1.
        let c = mesh::tetra_sphere();
        let d1 = coboundary(&c, 1).unwrap().to_real();
        assert_eq!(d1.matrix().rank(1e-9), 3);
    }

    #[test]
    fn mass_identity_and_unit_triangle() {
        let c = mesh::filled_triangle();
        for k in 0..=2 {
            let m = mass_matrix(&c, k, MassScheme::Identity).unwrap();
            assert_eq!(m.matrix(), &DMatrix::identity(c.count(k), c.count(k)));
        }
        let m2 = mass_matrix(&c, 2, MassScheme::BarycentricLumped).unwrap();
        assert!((m2.matrix()[(0, 0)] - 1.0).abs() < 1e-15);
        let m0 = mass_diagonal(&c, 0, MassScheme::BarycentricLumped).unwrap();
        assert!((m0.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let c = SimplicialComplex::from_top_simplices(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            &[vec![0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            mass_matrix(&c, 2, MassScheme::BarycentricLumped),
            Err(Error::DegenerateSimplex { degree: 2, index: 0 })
        ));
        assert!(mass_matrix(&c, 2, MassScheme::Identity).is_ok());
    }

    #[test]
    fn barycentric_unsupported_in_3d() {
        let c = mesh::solid_tetrahedron();
        assert!(matches!(
            mass_matrix(&c, 0, MassScheme::BarycentricLumped),
            Err(Error::UnsupportedScheme { .. })
        ));
    }

    #[test]
    fn total_area_from_vertex_masses() {
        // Sum of vertex weights is the total area: ⟨1, 1⟩ = area.
        let c = mesh::grid_torus(6).unwrap();
        let m0 = mass_matrix(&c, 0, MassScheme::BarycentricLumped).unwrap();
        let area: f64 = (0..c.count(2)).map(|i| c.volume(2, i)).sum();
        let one = Cochain::new(0, DVector::from_element(c.count(0), 1.0));
        assert!((inner_product(&one, &one, &m0).unwrap() - area).abs() < 1e-12 * area);
    }

    #[test]
    fn adjointness_on_random_cochains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in corpus() {
            for scheme in MassScheme::ALL {
                let dec = Dec::new(&c, scheme).unwrap();
                for k in 1..=c.dim() {
                    let f = DVector::from_fn(c.count(k - 1), |_, _| rng.gen_range(-1.0..1.0));
                    let g = DVector::from_fn(c.count(k), |_, _| rng.gen_range(-1.0..1.0));
                    let df = dec.d(k - 1) * &f;
                    let lhs = df.dot(&dec.mass_diag(k).component_mul(&g));
                    let rhs = f.dot(&dec.mass_diag(k - 1).component_mul(&(dec.delta(k) * &g)));
                    let scale = lhs.abs().max(rhs.abs()).max(1.0);
                    assert!((lhs - rhs).abs() < 1e-12 * scale, "{c} {scheme} k={k}");
                }
            }
        }
    }

    #[test]
    fn delta_squared_and_intertwining() {
        for c in corpus() {
            for scheme in MassScheme::ALL {
                let dec = Dec::new(&c, scheme).unwrap();
                for k in 1..c.dim() {
                    let dd = dec.delta(k) * dec.delta(k + 1);
                    let scale = dec.delta(k).norm() * dec.delta(k + 1).norm();
                    assert!(dd.norm() <= 1e-12 * scale);
                }
                for k in 0..c.dim() {
                    let lhs = dec.d(k) * dec.laplacian_matrix(k);
                    let rhs = dec.laplacian_matrix(k + 1) * dec.d(k);
                    assert!(rel(&lhs, &rhs) < 1e-12, "{c} {scheme} k={k}");
                }
            }
        }
    }

    #[test]
    fn laplacian_self_adjoint_in_mass_inner_product() {
        for c in corpus() {
            for scheme in MassScheme::ALL {
                let dec = Dec::new(&c, scheme).unwrap();
                for k in 0..=c.dim() {
                    let ml = DMatrix::from_diagonal(dec.mass_diag(k)) * dec.laplacian_matrix(k);
                    assert!(rel(&ml, &ml.transpose()) < 1e-13);
                    assert!(rel(&ml, &dec.stiffness(k)) < 1e-13);
                }
            }
        }
    }

    #[test]
    fn filled_triangle_laplacian_spectra() {
        // Brute-force 3×3 characteristic polynomials: L_0 = graph Laplacian of K_3,
        // L_1 = d_0 d_0ᵀ + d_1ᵀ d_1 = 3 I.
        let c = mesh::filled_triangle();
        let l0 = hodge_laplacian(&c, 0, MassScheme::Identity).unwrap();
        let expect0 = DMatrix::from_row_slice(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.]);
        assert_eq!(l0.matrix(), &expect0);
        let l1 = hodge_laplacian(&c, 1, MassScheme::Identity).unwrap();
        assert_eq!(l1.matrix(), &(DMatrix::identity(3, 3) * 3.0));
        assert!(hodge_laplacian(&c, 3, MassScheme::Identity).is_err());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("identity".parse::<MassScheme>().unwrap(), MassScheme::Identity);
        assert_eq!(
            "barycentric-lumped".parse::<MassScheme>().unwrap(),
            MassScheme::BarycentricLumped
        );
        assert!("voronoi".parse::<MassScheme>().is_err());
    }
}

//! Shared fixtures for the benchmarks.

use hodgeheat::{mesh, Dec, MassScheme, SpectralData};

/// Barycentric-lumped operator on a builtin mesh.
pub fn fixture_dec(name: &str) -> Dec {
    let c = mesh::builtin(name).expect("builtin mesh");
    Dec::new(&c, MassScheme::BarycentricLumped).expect("valid mesh")
}

pub fn fixture_spectrum(name: &str, k: usize) -> SpectralData {
    SpectralData::from_dec(&fixture_dec(name), k).expect("eigendecomposition")
}

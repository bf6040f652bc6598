//! Heat kernels of degrees 0, 1, 2 on the unit flat torus `R²/Z²` as
//! truncated Fourier series.
//!
//! Modes are `e^{2πi(mu + nv)}` with `ξ = 2π(m, n)` and eigenvalue `|ξ|²`,
//! summed over `|m|, |n| ≤ trunc`. One-form components are taken in the
//! global coframe `{du, dv}`; the Hodge star acts on coefficient vectors by
//! the rotation `R = [[0, -1], [1, 0]]` (`*du = dv`, `*dv = -du`).

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde_json::json;

use crate::error::{Error, Result};
use crate::operator::FormComponentMatrix;
use crate::report::{relative, VerificationReport};

/// Target bound on the neglected part of every series.
pub const SERIES_TOL: f64 = 1e-12;

/// Truncation that satisfies [`SERIES_TOL`] for all `t ≥ 0.005`.
pub const DEFAULT_TRUNC: usize = 12;

const NAME: &str = "flat-torus";

/// A point of the unit torus, coordinates reduced to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    pub u: f64,
    pub v: f64,
}

impl TorusPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self {
            u: reduce(u),
            v: reduce(v),
        }
    }

    fn diff(self, other: TorusPoint) -> Vector2<f64> {
        Vector2::new(self.u - other.u, self.v - other.v)
    }
}

fn reduce(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Smallest truncation whose first neglected factor `e^{-4π²(trunc+1)²t}`
/// is below `eps`: `ceil(sqrt(-ln eps / (4π² t)))`.
pub fn required_trunc(t: f64, eps: f64) -> usize {
    ((-eps.ln()).max(0.0) / (4.0 * PI * PI * t)).sqrt().ceil() as usize
}

fn check(t: f64, trunc: usize) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime {
            expect: "positive",
            got: t,
        });
    }
    let needed = required_trunc(t, SERIES_TOL);
    if trunc < needed {
        return Err(Error::TruncationTooSmall {
            given: trunc,
            needed,
            t,
            tol: SERIES_TOL,
        });
    }
    Ok(())
}

/// Calls `f(ξ, λ, phase)` for every retained mode, where `phase = ξ·(x - y)`.
fn for_modes(delta: Vector2<f64>, trunc: usize, mut f: impl FnMut(Vector2<f64>, f64, f64)) {
    let n = trunc as i64;
    for m in -n..=n {
        for k in -n..=n {
            let xi = Vector2::new(2.0 * PI * m as f64, 2.0 * PI * k as f64);
            f(xi, xi.norm_squared(), xi.dot(&delta));
        }
    }
}

/// Scalar heat kernel `Σ e^{-|ξ|²t} cos(ξ·(x - y))`.
pub fn torus_k0(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<f64> {
    check(t, trunc)?;
    let mut s = 0.0;
    for_modes(x.diff(y), trunc, |_, lam, ph| s += (-lam * t).exp() * ph.cos());
    Ok(s)
}

/// One-dimensional theta series `Σ_m e^{-4π²m²t} cos(2πm x)`.
pub fn theta(x: f64, t: f64, trunc: usize) -> f64 {
    let mut s = 1.0;
    for m in 1..=trunc {
        let w = 2.0 * PI * m as f64;
        s += 2.0 * (-w * w * t).exp() * (w * x).cos();
    }
    s
}

/// Kernel on 2-forms, coefficient of `du∧dv ⊗ du∧dv`, as the product of
/// two theta series (the 2-form eigenforms are `φ du∧dv`).
pub fn torus_k2(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<FormComponentMatrix> {
    check(t, trunc)?;
    let d = x.diff(y);
    Ok(FormComponentMatrix::scalar(2, theta(d.x, t, trunc) * theta(d.y, t, trunc)))
}

/// Kernel on 1-forms from the eigenform expansion: every mode `φ_ξ` times
/// either coframe element `e_c` is an eigenform with eigenvalue `|ξ|²`.
pub fn torus_k1(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<FormComponentMatrix> {
    check(t, trunc)?;
    let mut k = Matrix2::zeros();
    for c in 0..2 {
        let e = Vector2::ith(c, 1.0);
        for_modes(x.diff(y), trunc, |_, lam, ph| {
            k += e * e.transpose() * ((-lam * t).exp() * ph.cos());
        });
    }
    Ok(form(k))
}

/// `d_x d_y ∫_t^∞ K_0 dτ`, summed termwise with coefficient `e^{-λt}/λ`.
pub fn torus_tail_dxdy(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<Matrix2<f64>> {
    check(t, trunc)?;
    let mut a = Matrix2::zeros();
    for_modes(x.diff(y), trunc, |xi, lam, ph| {
        if lam > 0.0 {
            // ∂_{x_i} ∂_{y_j} cos(ξ·(x - y)) = ξ_i ξ_j cos(ξ·(x - y))
            a += xi * xi.transpose() * ((-lam * t).exp() / lam * ph.cos());
        }
    });
    Ok(a)
}

/// Coefficient action of the star on one slot.
pub fn star() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// `C_1 + (I + *_x *_y) d_x d_y ∫_t^∞ K_0`, with `C_1 = du⊗du + dv⊗dv`.
pub fn torus_corollary6_rhs(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<FormComponentMatrix> {
    let a = torus_tail_dxdy(x, y, t, trunc)?;
    let r = star();
    Ok(form(Matrix2::identity() + a + r * a * r.transpose()))
}

pub fn torus_corollary6_check(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<VerificationReport> {
    let lhs = torus_k1(x, y, t, trunc)?;
    let abs = (&lhs.values - torus_corollary6_rhs(x, y, t, trunc)?.values).norm();
    Ok(
        VerificationReport::gated("corollary6", NAME, vec![t], vec![abs], vec![relative(abs, lhs.norm())], 1e-10)
            .with_degree(1)
            .with_details(json!({"x": [x.u, x.v], "y": [y.u, y.v], "trunc": trunc})),
    )
}

/// Gradient of `K_0` in the x-slot.
pub fn torus_dx_k0(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<Vector2<f64>> {
    check(t, trunc)?;
    let mut g = Vector2::zeros();
    for_modes(x.diff(y), trunc, |xi, lam, ph| g -= xi * ((-lam * t).exp() * ph.sin()));
    Ok(g)
}

/// Gradient of `K_0` in the y-slot.
pub fn torus_dy_k0(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<Vector2<f64>> {
    check(t, trunc)?;
    let mut g = Vector2::zeros();
    for_modes(x.diff(y), trunc, |xi, lam, ph| g += xi * ((-lam * t).exp() * ph.sin()));
    Ok(g)
}

/// Codifferential `-div` of the 1-form kernel in the y-slot, differentiating
/// the eigenform expansion termwise. Component `i` is the x-slot index.
pub fn torus_delta_y_k1(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<Vector2<f64>> {
    check(t, trunc)?;
    let mut out = Vector2::zeros();
    for c in 0..2 {
        let e = Vector2::ith(c, 1.0);
        for_modes(x.diff(y), trunc, |xi, lam, ph| {
            // ∂_{y_j} cos(ξ·(x - y)) = ξ_j sin(ξ·(x - y))
            out -= e * (e.dot(&xi) * (-lam * t).exp() * ph.sin());
        });
    }
    Ok(out)
}

/// Codifferential of the 1-form kernel in the x-slot.
pub fn torus_delta_x_k1(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<Vector2<f64>> {
    check(t, trunc)?;
    let mut out = Vector2::zeros();
    for c in 0..2 {
        let e = Vector2::ith(c, 1.0);
        for_modes(x.diff(y), trunc, |xi, lam, ph| {
            out += e * (e.dot(&xi) * (-lam * t).exp() * ph.sin());
        });
    }
    Ok(out)
}

/// `∫ K_0(x, z, t1) K_0(z, y, t2) dz` by the trapezoid rule on an `N×N`
/// grid with `N = 2 trunc + 2`, exact for the truncated series.
pub fn torus_convolve_k0(x: TorusPoint, y: TorusPoint, t1: f64, t2: f64, trunc: usize) -> Result<f64> {
    check(t1, trunc)?;
    check(t2, trunc)?;
    let n = 2 * trunc + 2;
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            let z = TorusPoint::new(a as f64 / n as f64, b as f64 / n as f64);
            s += torus_k0(x, z, t1, trunc)? * torus_k0(z, y, t2, trunc)?;
        }
    }
    Ok(s / (n * n) as f64)
}

/// `Δ_x K_0 = -Σ |ξ|² e^{-|ξ|²t} cos(ξ·(x - y))` (Laplacian with the
/// analyst's sign, so `∂_t K_0 = Δ_x K_0`).
pub fn torus_laplacian_k0(x: TorusPoint, y: TorusPoint, t: f64, trunc: usize) -> Result<f64> {
    check(t, trunc)?;
    let mut s = 0.0;
    for_modes(x.diff(y), trunc, |_, lam, ph| s -= lam * (-lam * t).exp() * ph.cos());
    Ok(s)
}

/// Fourth-order centered difference of `K_0` in time with step `h < t/2`.
pub fn torus_dt_k0(x: TorusPoint, y: TorusPoint, t: f64, h: f64, trunc: usize) -> Result<f64> {
    if !(h > 0.0) || 2.0 * h >= t {
        return Err(Error::InvalidParameter {
            name: "fd-step",
            msg: format!("time step {h} must lie in (0, t/2) at t = {t}"),
        });
    }
    let k = |s: f64| torus_k0(x, y, s, trunc);
    Ok((8.0 * (k(t + h)? - k(t - h)?) - (k(t + 2.0 * h)? - k(t - 2.0 * h)?)) / (12.0 * h))
}

fn form(m: Matrix2<f64>) -> FormComponentMatrix {
    FormComponentMatrix {
        degree: (1, 1),
        values: DMatrix::from_column_slice(2, 2, m.as_slice()),
    }
}

type Pair = (TorusPoint, TorusPoint);

/// Per-time maxima of an (abs, rel) residual over all point pairs.
fn per_time(
    pairs: &[Pair],
    times: &[f64],
    f: impl Fn(TorusPoint, TorusPoint, f64) -> Result<(f64, f64)>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut abs, mut rel) = (Vec::new(), Vec::new());
    for &t in times {
        let (mut a, mut r) = (0.0f64, 0.0f64);
        for &(x, y) in pairs {
            let (ai, ri) = f(x, y, t)?;
            a = a.max(ai);
            r = r.max(ri);
        }
        abs.push(a);
        rel.push(r);
    }
    Ok((abs, rel))
}

/// Tolerances of the torus suite.
#[derive(Clone, Copy, Debug)]
pub struct TorusTolerances {
    pub duality: f64,
    pub corollary6: f64,
    pub lemma1: f64,
    pub semigroup: f64,
    pub symmetry: f64,
    pub heat_equation: f64,
}

impl Default for TorusTolerances {
    fn default() -> Self {
        Self {
            duality: 1e-12,
            corollary6: 1e-10,
            lemma1: 1e-10,
            semigroup: 1e-10,
            symmetry: 1e-12,
            heat_equation: 1e-6,
        }
    }
}

/// Step in time for the heat-equation check.
pub const HEAT_FD_STEP: f64 = 1e-4;

/// Every torus check over the given point pairs and times.
pub fn torus_suite(pairs: &[Pair], times: &[f64], trunc: usize, tol: TorusTolerances) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let gated = |check: &str, (abs, rel): (Vec<f64>, Vec<f64>), tol: f64, k: usize| {
        VerificationReport::gated(check, NAME, times.to_vec(), abs, rel, tol)
            .with_degree(k)
            .with_details(json!({"pairs": pairs.len(), "trunc": trunc}))
    };

    let duality = per_time(pairs, times, |x, y, t| {
        let k0 = torus_k0(x, y, t, trunc)?;
        let a = (torus_k2(x, y, t, trunc)?.get(0, 0) - k0).abs();
        Ok((a, relative(a, k0.abs())))
    })?;
    out.push(gated("duality", duality, tol.duality, 2));

    let cor6 = per_time(pairs, times, |x, y, t| {
        let r = torus_corollary6_check(x, y, t, trunc)?;
        Ok((r.abs_residuals[0], r.rel_residuals[0]))
    })?;
    out.push(gated("corollary6", cor6, tol.corollary6, 1));

    let lemma1 = per_time(pairs, times, |x, y, t| {
        let l1 = torus_dx_k0(x, y, t, trunc)?;
        let a1 = (l1 - torus_delta_y_k1(x, y, t, trunc)?).norm();
        let l2 = torus_dy_k0(x, y, t, trunc)?;
        let a2 = (l2 - torus_delta_x_k1(x, y, t, trunc)?).norm();
        // Scale by the kernel itself: the gradients vanish at symmetric points.
        let scale = l1.norm().max(l2.norm()).max(torus_k0(x, y, t, trunc)?.abs());
        Ok((a1.max(a2), relative(a1.max(a2), scale)))
    })?;
    out.push(gated("lemma1", lemma1, tol.lemma1, 0));

    let symmetry = per_time(pairs, times, |x, y, t| {
        let k = torus_k1(x, y, t, trunc)?;
        let a = (&k.values - torus_k1(y, x, t, trunc)?.swapped().values).norm();
        Ok((a, relative(a, k.norm())))
    })?;
    out.push(gated("symmetry", symmetry, tol.symmetry, 1));

    let heat = per_time(pairs, times, |x, y, t| {
        let dt = torus_dt_k0(x, y, t, HEAT_FD_STEP.min(0.25 * t), trunc)?;
        let lap = torus_laplacian_k0(x, y, t, trunc)?;
        let a = (dt - lap).abs();
        // Relative to the size of the time derivative at this t, not to its
        // value at the point, which can cross zero.
        Ok((a, relative(a, lap.abs().max(1.0 / t))))
    })?;
    out.push(gated("heat-equation", heat, tol.heat_equation, 0));

    // Semigroup on a few pairs: t = t1 + t2 with t1 = t2 = t/2.
    let few = &pairs[..pairs.len().min(4)];
    let semigroup = per_time(few, times, |x, y, t| {
        let direct = torus_k0(x, y, t, trunc)?;
        let a = (torus_convolve_k0(x, y, 0.5 * t, 0.5 * t, trunc)? - direct).abs();
        Ok((a, relative(a, direct.abs())))
    })?;
    out.push(gated("semigroup", semigroup, tol.semigroup, 0));
    Ok(out)
}

/// CSV rows `u_x,v_x,u_y,v_y,t,k0,k1_uu,k1_uv,k1_vu,k1_vv,k2`.
pub fn torus_csv(pairs: &[Pair], times: &[f64], trunc: usize) -> Result<String> {
    let mut s = String::from("u_x,v_x,u_y,v_y,t,k0,k1_uu,k1_uv,k1_vu,k1_vv,k2\n");
    for &(x, y) in pairs {
        for &t in times {
            let mut row = vec![x.u, x.v, y.u, y.v, t, torus_k0(x, y, t, trunc)?];
            row.extend(torus_k1(x, y, t, trunc)?.components());
            row.push(torus_k2(x, y, t, trunc)?.get(0, 0));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(s, "{}", cells.join(",")).expect("write to string");
        }
    }
    Ok(s)
}

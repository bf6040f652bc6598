//! Values from `oracles/h2_oracle.py` (50-digit mpmath).

use hodgeheat::h2::{self, conical_p, h2_k0, h2_tail, mckean_oracle_k0, mckean_oracle_tail, QUAD_TOL};

const CONICAL: [(f64, f64, f64); 16] = [
    (0.0, 0.5, 0.98459519569583315511),
    (0.0, 1.0, 0.94086215924934981862),
    (0.0, 2.0, 0.79565169560597401944),
    (0.0, 4.0, 0.46409929404960529806),
    (0.5, 0.5, 0.96931017027693840345),
    (0.5, 1.0, 0.88353789884822377391),
    (0.5, 2.0, 0.61505537497101817529),
    (0.5, 4.0, 0.13377113130233963205),
    (1.0, 0.5, 0.92416755581703942435),
    (1.0, 1.0, 0.72207522827937457342),
    (1.0, 2.0, 0.19728188012250963282),
    (1.0, 4.0, -0.15274739023778229534),
    (3.0, 0.5, 0.50511628092874819361),
    (3.0, 1.0, -0.23564866084019966825),
    (3.0, 2.0, 0.1071082191748499922),
    (3.0, 4.0, 0.015538435945294410131),
];

const K0: [(f64, f64, f64); 12] = [
    (0.0, 0.1, 0.76976954687689998666),
    (0.0, 0.5, 0.13505600024041982128),
    (0.0, 1.0, 0.057535755205721974619),
    (0.5, 0.1, 0.40365459509409944162),
    (0.5, 0.5, 0.11681622394841220136),
    (0.5, 1.0, 0.052997770872884702392),
    (1.0, 0.1, 0.058315118726885611029),
    (1.0, 0.5, 0.075726752643569165169),
    (1.0, 1.0, 0.04149118395782221757),
    (2.0, 0.1, 0.000025992377363947753202),
    (2.0, 0.5, 0.013668272010699108823),
    (2.0, 1.0, 0.015914115768910425873),
];

#[test]
fn conical_matches_reference() {
    for (rho, r, want) in CONICAL {
        let got = conical_p(rho, r).unwrap();
        assert!((got - want).abs() < 1e-12, "P at rho={rho}, r={r}: {got} vs {want}");
    }
}

#[test]
fn spectral_kernel_matches_reference() {
    for (r, t, want) in K0 {
        let s = h2_k0(r, t, QUAD_TOL).unwrap();
        assert!(s.value > 0.0);
        assert!(s.err_est <= QUAD_TOL);
        let rel = (s.value - want).abs() / want;
        assert!(rel < 1e-7, "K0({r}, {t}) = {} vs {want} (rel {rel:e})", s.value);
    }
}

#[test]
fn oracle_matches_reference() {
    for (r, t, want) in K0 {
        let s = mckean_oracle_k0(r, t, QUAD_TOL).unwrap();
        let rel = (s.value - want).abs() / want;
        assert!(rel < 1e-9, "oracle K0({r}, {t}) = {} vs {want}", s.value);
    }
}

#[test]
fn tail_against_oracle_time_integral() {
    for (r, t) in [(1.0, 0.5), (0.5, 2.0), (1.0, 20.0)] {
        let a = h2_tail(r, t, QUAD_TOL).unwrap().value;
        let b = mckean_oracle_tail(r, t, 1e-10).unwrap();
        assert!((a - b).abs() < 1e-7 * b, "tail({r}, {t}): {a} vs {b}");
    }
    // Slow decay on the noncompact plane: t^{-3/2} e^{-t/4}, not exponential in λ₁ > 0 alone.
    let late = h2_tail(1.0, 20.0, QUAD_TOL).unwrap().value;
    assert!(late > 1e-6 && late < 1e-4, "{late}");
}

#[test]
fn tail_derivative_is_minus_kernel() {
    let h = h2::FD_STEP_T;
    let d = (h2_tail(1.0, 0.5 + h, 1e-11).unwrap().value - h2_tail(1.0, 0.5 - h, 1e-11).unwrap().value) / (2.0 * h);
    let k = h2_k0(1.0, 0.5, 1e-11).unwrap().value;
    assert!((d + k).abs() < 1e-5 * k, "{d} vs {k}");
}

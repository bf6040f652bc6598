"""High-precision reference values for the hyperbolic-plane tests.

Regenerate with `python3 h2_oracle.py`; the printed constants are pasted into
`h2_reference.rs`. Uses mpmath at 50 digits, independent of the Rust code paths.
"""
import mpmath as mp

mp.mp.dps = 50


def conical_hyp(rho, r):
    # Legendre function of the first kind via the hypergeometric series.
    return mp.re(mp.legenp(mp.mpf(-0.5) + 1j * rho, 0, mp.cosh(r)))


def conical_mehler(rho, r):
    # Mehler-Dirichlet integral, endpoint singularity left to tanh-sinh.
    if r == 0:
        return mp.mpf(1)
    f = lambda s: mp.cos(rho * s) / mp.sqrt(mp.cosh(r) - mp.cosh(s))
    return mp.sqrt(2) / mp.pi * mp.quad(f, [0, r])


def mckean(r, t):
    r = mp.mpf(r)
    t = mp.mpf(t)
    pre = mp.sqrt(2) * mp.exp(-t / 4) / (4 * mp.pi * t) ** mp.mpf(1.5)
    if r == 0:
        # cosh s - 1 = 2 sinh^2(s/2); the ratio tends to sqrt(2) at s = 0.
        f = lambda s: (mp.sqrt(2) if s == 0 else s / (mp.sqrt(2) * mp.sinh(s / 2))) * mp.exp(-s * s / (4 * t))
    else:
        f = lambda s: s * mp.exp(-s * s / (4 * t)) / mp.sqrt(mp.cosh(s) - mp.cosh(r))
    return pre * mp.quad(f, [r, r + 1, r + 5, mp.inf])


if __name__ == "__main__":
    print("// conical: (rho, r, value)")
    for rho in [0, 0.5, 1, 3]:
        for r in [0.5, 1, 2, 4]:
            a = conical_hyp(mp.mpf(rho), mp.mpf(r))
            b = conical_mehler(mp.mpf(rho), mp.mpf(r))
            assert abs(a - b) < mp.mpf(10) ** -25, (rho, r, a, b)
            print(f"    ({float(rho)!r}, {float(r)!r}, {mp.nstr(a, 20)}),")
    print("// k0: (r, t, value)")
    for r in [0, 0.5, 1, 2]:
        for t in [0.1, 0.5, 1]:
            print(f"    ({float(r)!r}, {float(t)!r}, {mp.nstr(mckean(r, t), 20)}),")

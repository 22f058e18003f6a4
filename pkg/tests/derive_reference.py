"""Regenerate the frozen reference values in ``reference_values.py``.

Independent of the package: exact per-layer solutions are chained in 40-digit arithmetic
(mpmath) and roots of ``u(H)`` are bracketed on a fine scan, then refined with the
Anderson-Bjorck bracketing solver. Run ``python3 tests/derive_reference.py > tests/reference_values.py``.
"""

import mpmath as mp

mp.mp.dps = 40


def shoot(L, H, interfaces, speeds, form, k, lam):
    """``u(H)`` for ``u(0) = 0, u'(0) = 1`` and the normalized-at-bottom flux."""
    kappa = (k * mp.pi / L) ** 2
    bounds = [mp.mpf(0)] + [mp.mpf(h) for h in interfaces] + [mp.mpf(H)]
    u, p = mp.mpf(0), mp.mpf(speeds[0] if form == "B" else 1)  # p = w u'
    for i, c in enumerate(speeds):
        c = mp.mpf(c)
        w = c if form == "B" else mp.mpf(1)
        q = (lam - c * kappa) / c
        d = bounds[i + 1] - bounds[i]
        du = p / w
        if q > 0:
            s = mp.sqrt(q)
            u, du = u * mp.cos(s * d) + du * mp.sin(s * d) / s, -u * s * mp.sin(s * d) + du * mp.cos(s * d)
        elif q < 0:
            s = mp.sqrt(-q)
            u, du = u * mp.cosh(s * d) + du * mp.sinh(s * d) / s, u * s * mp.sinh(s * d) + du * mp.cosh(s * d)
        else:
            u = u + du * d
        p = w * du
    return u


def roots(medium, k, lo, hi, samples=4000):
    f = lambda x: shoot(*medium, k, x)
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    xs = [lo + (hi - lo) * j / samples for j in range(1, samples)]
    vals = [f(x) for x in xs]
    out = []
    for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
        if fa == 0:
            out.append(a)
        elif fa * fb < 0:
            out.append(mp.findroot(f, (a, b), solver="anderson"))
    return out


def kappa(k, L=1):
    return (k * mp.pi / L) ** 2


def mode_mass_ratio(medium, k, lam, a, b):
    """``int_a^b u^2 / int_0^H u^2`` by adaptive quadrature split at the interfaces."""
    L, H, hs, cs, form = medium

    def u(x):
        return shoot(L, x, [h for h in hs if h < x], cs[:len([h for h in hs if h < x]) + 1], form, k, lam) \
            if x > 0 else mp.mpf(0)

    pts = sorted({mp.mpf(0), *map(mp.mpf, hs), mp.mpf(H)})
    total = sum(mp.quad(lambda x: u(x) ** 2, [p, q]) for p, q in zip(pts, pts[1:]))
    cut = sorted({mp.mpf(a), mp.mpf(b), *[mp.mpf(h) for h in hs if a < h < b]})
    part = sum(mp.quad(lambda x: u(x) ** 2, [p, q]) for p, q in zip(cut, cut[1:]))
    return part / total


def show(name, vals):
    print(f"{name} = (")
    for v in vals:
        print(f"    {mp.nstr(v, 17)},")
    print(")")


if __name__ == "__main__":
    one_a = (1, 1, [0.5], [1, 2], "A")
    one_b = (1, 1, [0.5], [1, 2], "B")
    two_b = (1, 1, [mp.mpf(1) / 3, mp.mpf(2) / 3], [1, 2, 4], "B")
    print('"""Frozen reference values from derive_reference.py (40-digit exact-layer shooting)."""')
    print()
    show("ONE_JUMP_A_K10_GUIDED", roots(one_a, 10, kappa(10), 2 * kappa(10)))
    show("ONE_JUMP_B_K10_GUIDED", roots(one_b, 10, kappa(10), 2 * kappa(10)))
    show("ONE_JUMP_A_K3_FIRST_NONGUIDED", roots(one_a, 3, 2 * kappa(3), 2 * kappa(3) + 400, 2000)[:5])
    show("TWO_JUMP_B_K10_GUIDED", roots(two_b, 10, kappa(10), 4 * kappa(10), 8000))
    show("TWO_JUMP_B_K10_ZONE0", roots(two_b, 10, kappa(10), 2 * kappa(10), 8000))
    four = (1, 1, [0.25, 0.5, 0.75], [1, 1.5, 2.2, 3], "B")
    show("FOUR_LAYER_B_K2_ABOVE_BARRIER", roots(four, 2, 3 * kappa(2), 3 * kappa(2) + 600, 3000)[:6])
    lam1 = roots(one_a, 10, kappa(10), 2 * kappa(10))[0]
    show("ONE_JUMP_A_K10_L1_RATIO_07_09", [mode_mass_ratio(one_a, 10, lam1, 0.7, 0.9)])
    show("ONE_JUMP_A_K10_L1_RATIO_01_03", [mode_mass_ratio(one_a, 10, lam1, 0.1, 0.3)])

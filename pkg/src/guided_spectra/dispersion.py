"""Eigenvalues of the reduced transverse operator for layered media.

For horizontal index ``k`` the transverse problem is ``(w u')' + w (lam/c - kappa) u = 0``
per layer, ``u(0) = u(H) = 0``, with ``kappa = (k pi / L)^2`` and flux weight ``w``
(``c`` for FORM_B, ``1`` for FORM_A). In layer ``i`` the mode oscillates with
wavenumber ``xi_i = sqrt(lam/c_i - kappa)`` or decays with rate
``xi'_i = sqrt(kappa - lam/c_i)``.

Guided roots of the one- and two-jump media come from the explicit transmission
relations below. Completeness is guaranteed by :func:`count_below`, a zero count
of the shooting solution, which equals the number of eigenvalues under ``lam``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleProximity, ScanResolutionExceeded, WrongZone
from .medium import LayeredMedium

OSCILLATORY = "OSC"
EVANESCENT = "EVA"
NON_GUIDED = "NON_GUIDED"
GUIDED = "GUIDED"
_ROMAN = ("0", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X")

DEFAULT_TOL = 1e-13


def tanh_over(y):
    """tanh(y)/y, finite at y = 0."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-4
    safe = np.where(small, 1.0, y)
    return np.where(small, 1.0 - y * y / 3.0, np.tanh(safe) / safe)


def sin_over(y):
    """sin(y)/y, finite at y = 0."""
    return np.sinc(np.asarray(y, dtype=float) / math.pi)


def signed_wavenumber_sq(medium: LayeredMedium, k, lam):
    """``q_i = lam/c_i - kappa`` evaluated as ``(lam - c_i kappa)/c_i``.

    The difference form is exact near each barrier line ``lam = c_i kappa``.
    """
    c = np.asarray(medium.speeds)
    kappa = medium.kappa(k)
    lam = np.asarray(lam, dtype=float)
    return (lam[..., None] - c * kappa) / c


@dataclass(frozen=True)
class TransverseQuantities:
    k: int
    lam: float
    kappa: float
    q: tuple
    xi: tuple
    regime: tuple

    def osc(self, i):
        """Oscillation wavenumber of layer ``i`` (nan if evanescent)."""
        return self.xi[i] if self.regime[i] == OSCILLATORY else float("nan")

    def eva(self, i):
        """Decay rate of layer ``i`` (nan if oscillatory)."""
        return self.xi[i] if self.regime[i] == EVANESCENT else float("nan")

    @property
    def xi0(self):
        return self.osc(0)

    @property
    def xi1(self):
        return self.osc(1) if len(self.xi) > 1 else float("nan")

    @property
    def xi1p(self):
        return self.eva(1) if len(self.xi) > 1 else float("nan")

    @property
    def xi2p(self):
        return self.eva(2) if len(self.xi) > 2 else float("nan")


def transverse_quantities(medium: LayeredMedium, k, lam) -> TransverseQuantities:
    """Per-layer wavenumbers; a zero wavenumber is tagged oscillatory."""
    q = signed_wavenumber_sq(medium, k, float(lam))
    xi = np.sqrt(np.abs(q))
    regime = tuple(OSCILLATORY if qi >= 0 else EVANESCENT for qi in q)
    return TransverseQuantities(int(k), float(lam), medium.kappa(k), tuple(map(float, q)),
                                tuple(map(float, xi)), regime)


def zone_of(medium: LayeredMedium, k, lam) -> str:
    """GUIDED / NON_GUIDED for one jump; GUIDED_0, GUIDED_I, ... by topmost oscillating layer."""
    q = signed_wavenumber_sq(medium, k, float(lam))
    top = int(np.max(np.nonzero(q > 0)[0])) if np.any(q > 0) else -1
    if top == medium.n_jumps:
        return NON_GUIDED
    if medium.n_jumps == 1:
        return GUIDED
    return "GUIDED_" + _ROMAN[max(top, 0)]


# ---------------------------------------------------------------------------
# shooting and counting


def _shoot(medium: LayeredMedium, k, lam, stop=None):
    """Shoot ``u(0)=0, w u'(0)=1`` upward.

    Returns ``(zeros, u, p)`` where ``zeros`` counts zeros of ``u`` in ``(0, x_end)``
    and ``(u, p)`` is the state at ``x_end`` rescaled by a positive factor.
    ``stop`` limits the shot to layers ``0..stop``.
    """
    q = signed_wavenumber_sq(medium, k, float(lam))
    w = medium.weights
    d = medium.thickness
    last = medium.n_jumps if stop is None else stop
    u, p = 0.0, 1.0
    zeros = 0
    for i in range(last + 1):
        end = i == medium.n_jumps
        if q[i] > 0:
            xi = math.sqrt(q[i])
            wx = w[i] * xi
            phi0 = math.atan2(u, p / wx)
            amp = 1.0
            if phi0 < 0.0 or phi0 >= math.pi:
                phi0 = phi0 + math.pi if phi0 < 0.0 else phi0 - math.pi
                amp = -1.0
            total = (phi0 + xi * d[i]) / math.pi
            m = math.floor(total)
            zeros += (math.ceil(total) - 1) if end else m
            # rebuild the end state from the phase so its sign agrees with the count
            sgn = -amp if m % 2 else amp
            frac = (total - m) * math.pi
            u, p = sgn * math.sin(frac), sgn * wx * math.cos(frac)
        elif q[i] < 0:
            z = math.sqrt(-q[i])
            wz = w[i] * z
            t = math.tanh(z * d[i])
            r = None
            if p != 0.0:
                r = -u * wz / p
                if 0.0 < r < t or (r == t and not end):
                    zeros += 1
            u, p = (0.0 if r == t else u + p * t / wz), p + u * wz * t
        else:
            if p != 0.0:
                s = -u * w[i] / p
                if 0.0 < s < d[i] or (s == d[i] and not end):
                    zeros += 1
            u = 0.0 if (p != 0.0 and s == d[i]) else u + p * d[i] / w[i]
        nrm = math.hypot(u, p)
        u, p = u / nrm, p / nrm
    return zeros, u, p


def count_below(medium: LayeredMedium, k, lam) -> int:
    """Number of eigenvalues strictly below ``lam`` (Sturm oscillation count)."""
    return _shoot(medium, k, lam)[0]


def shooting_residual(medium: LayeredMedium, k, lam) -> float:
    """Boundary value ``u(H)`` of the normalized shooting solution; zero at eigenvalues."""
    return _shoot(medium, k, lam)[1]


def bisect(f, lo, hi, rtol=DEFAULT_TOL, flo=None, fhi=None, polish=True, max_iter=400):
    """Bisection on a sign change, then one secant step kept only if it stays inside."""
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * max(abs(lo), abs(hi)) or mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    if polish and fhi != flo:
        x = lo - flo * (hi - lo) / (fhi - flo)
        if lo < x < hi:
            return x
    return 0.5 * (lo + hi)


def _isolate(medium, k, index, lo, hi, n_lo):
    """Shrink ``[lo, hi]`` until it holds eigenvalue number ``index`` (1-based) alone."""
    while True:
        mid = 0.5 * (lo + hi)
        n_mid = count_below(medium, k, mid)
        if n_mid >= index:
            if n_mid == index and n_lo == index - 1:
                return lo, mid
            hi = mid
        else:
            lo, n_lo = mid, n_mid
        if hi - lo <= 4e-16 * hi:
            return lo, hi


def eigenvalue_by_index(medium: LayeredMedium, k, index, lo, hi, tol=DEFAULT_TOL):
    """Eigenvalue number ``index`` inside ``(lo, hi)`` by count isolation then residual bisection."""
    n_lo = count_below(medium, k, lo)
    a, b = _isolate(medium, k, index, lo, hi, n_lo)
    fa, fb = shooting_residual(medium, k, a), shooting_residual(medium, k, b)
    if fa == 0.0 or fb == 0.0 or (fa > 0) != (fb > 0):
        return bisect(lambda x: shooting_residual(medium, k, x), a, b, tol, fa, fb)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# one jump


def _require_jumps(medium, n):
    if medium.n_jumps != n:
        raise WrongZone(f"this relation needs a {n}-jump medium, got {medium.n_jumps} jumps")


def regular_residual_1jump(medium: LayeredMedium, k, lam):
    """Pole-free one-jump relation: the tan form multiplied by ``cos(xi_0 h_0)``.

    ``sin(xi0 h0)/(w0 xi0) + cos(xi0 h0) tanh(xi1' d)/(w1 xi1')`` with ``d = H - h0``.
    It has the same zeros as the tan form and stays finite at its poles.
    """
    q = signed_wavenumber_sq(medium, k, lam)
    h0 = medium.interfaces[0]
    d = medium.H - h0
    w = medium.weights
    x0 = np.sqrt(np.maximum(q[..., 0], 0.0))
    z1 = np.sqrt(np.maximum(-q[..., 1], 0.0))
    y = x0 * h0
    return h0 * sin_over(y) / w[0] + np.cos(y) * d * tanh_over(z1 * d) / w[1]


def dispersion_residual_1jump(medium: LayeredMedium, k, lam, pole_guard=1e-12) -> float:
    """``tanh(xi1' (H-h0))/(w1 xi1') + tan(xi0 h0)/(w0 xi0)``; zero exactly at guided eigenvalues."""
    _require_jumps(medium, 1)
    kappa = medium.kappa(k)
    c0, c1 = medium.speeds
    if not (c0 * kappa < lam <= c1 * kappa):
        raise WrongZone(f"lam={lam} outside the guided window ({c0 * kappa}, {c1 * kappa}]")
    tq = transverse_quantities(medium, k, lam)
    h0 = medium.interfaces[0]
    y = tq.xi[0] * h0
    if abs(math.cos(y)) < pole_guard:
        raise PoleProximity(f"cos(xi0 h0) = {math.cos(y):.3e} at lam={lam}; re-bracket")
    w = medium.weights
    d = medium.H - h0
    return float(d * tanh_over(tq.xi[1] * d) / w[1] + math.tan(y) / (w[0] * tq.xi[0]))


@dataclass(frozen=True)
class BranchBracket:
    """Interval of the ``ell``-th descending tan branch: ``xi0 h0`` in ((2l-1) pi/2, l pi)."""

    ell: int
    kappa: float
    h0: float
    c0: float = 1.0

    @property
    def lower(self) -> float:
        return self.c0 * (self.kappa + ((2 * self.ell - 1) * math.pi / (2 * self.h0)) ** 2)

    @property
    def upper(self) -> float:
        return self.c0 * (self.kappa + (self.ell * math.pi / self.h0) ** 2)

    def mu(self, lam):
        """Shifted variable measured from the lower end."""
        return lam - self.lower

    @property
    def mu_upper(self) -> float:
        return self.upper - self.lower


def branch_bracket(medium: LayeredMedium, k, ell) -> BranchBracket:
    return BranchBracket(int(ell), medium.kappa(k), medium.interfaces[0], medium.speeds[0])


@dataclass
class SpectrumSlice:
    """Sorted eigenvalues of one horizontal index with zone tags."""

    k: int
    kappa: float
    lam: np.ndarray
    ell: np.ndarray
    zone: tuple
    Lk: int

    def __len__(self):
        return len(self.lam)

    @property
    def guided(self) -> np.ndarray:
        return self.lam[[z != NON_GUIDED for z in self.zone]] if len(self) else self.lam

    def extend(self, other: "SpectrumSlice") -> "SpectrumSlice":
        lam = np.concatenate([self.lam, other.lam])
        order = np.argsort(lam, kind="stable")
        zone = tuple(np.array(self.zone + other.zone, dtype=object)[order]) if len(lam) else ()
        return SpectrumSlice(self.k, self.kappa, lam[order],
                             np.concatenate([self.ell, other.ell])[order].astype(int), zone,
                             self.Lk + other.Lk)


def _empty(k, kappa):
    return SpectrumSlice(int(k), kappa, np.zeros(0), np.zeros(0, dtype=int), (), 0)


def guided_eigenvalues_1jump(medium: LayeredMedium, k, tol=DEFAULT_TOL) -> SpectrumSlice:
    """Guided eigenvalues, one per branch bracket that shows a sign change."""
    _require_jumps(medium, 1)
    kappa = medium.kappa(k)
    barrier = medium.speeds[1] * kappa

    def f(x):
        return float(regular_residual_1jump(medium, k, x))

    roots = []
    ell = 1
    while True:
        br = branch_bracket(medium, k, ell)
        lo = br.lower
        if lo >= barrier:
            break
        hi = min(br.upper, barrier)
        flo, fhi = f(lo), f(hi)
        if flo != 0.0 and fhi != 0.0 and (flo > 0) != (fhi > 0):
            roots.append(bisect(f, lo, hi, tol, flo, fhi))
        ell += 1
    lam = np.array(roots)
    return SpectrumSlice(int(k), kappa, lam, np.arange(1, len(lam) + 1), (GUIDED,) * len(lam), len(lam))


# ---------------------------------------------------------------------------
# two jumps


def regular_residual_zone0(medium: LayeredMedium, k, lam):
    """Pole-free zone-(0) relation (layers 1 and 2 evanescent).

    Multiplies ``-tan(xi0 h0)/(w0 xi0) = N/D`` through by ``cos(xi0 h0) D``.
    """
    q = signed_wavenumber_sq(medium, k, lam)
    h0, h1 = medium.interfaces
    d1, d2 = h1 - h0, medium.H - h1
    w = medium.weights
    x0 = np.sqrt(np.maximum(q[..., 0], 0.0))
    z1 = np.sqrt(np.maximum(-q[..., 1], 0.0))
    z2 = np.sqrt(np.maximum(-q[..., 2], 0.0))
    a1 = d1 * tanh_over(z1 * d1) / w[1]  # tanh(z1 d1)/(w1 z1)
    a2 = d2 * tanh_over(z2 * d2) / w[2]
    num = a1 + a2
    den = 1.0 + w[1] * z1 * np.tanh(z1 * d1) * a2
    y = x0 * h0
    return h0 * sin_over(y) / w[0] * den + np.cos(y) * num


def dispersion_residual_zone0(medium: LayeredMedium, k, lam, pole_guard=1e-12) -> float:
    """Zone-(0) relation in tan form: ``tan(xi0 h0)/(w0 xi0) + N/D``."""
    _require_jumps(medium, 2)
    tq = transverse_quantities(medium, k, lam)
    if tq.regime[1] != EVANESCENT:
        raise WrongZone(f"lam={lam} is not in zone (0)")
    y = tq.xi[0] * medium.interfaces[0]
    if abs(math.cos(y)) < pole_guard:
        raise PoleProximity(f"cos(xi0 h0) = {math.cos(y):.3e}")
    reg = float(regular_residual_zone0(medium, k, lam))
    h0, h1 = medium.interfaces
    z1, z2 = tq.xi[1], tq.xi[2]
    w = medium.weights
    den = 1.0 + w[1] * z1 * math.tanh(z1 * (h1 - h0)) * (medium.H - h1) * float(tanh_over(z2 * (medium.H - h1))) / w[2]
    return reg / (math.cos(y) * den)


def regular_residual_zoneI(medium: LayeredMedium, k, lam):
    """Pole-free zone-(I) relation (layer 1 oscillating, layer 2 evanescent).

    Uses the rearrangement ``T2 [r s0 s1 - c0 c1] = s0 c1/(w0 xi0) + c0 s1/(w1 xi1)``,
    i.e. the tan form multiplied by ``cos(xi0 h0) cos(xi1 d1)`` times its denominator,
    where ``T2 = tanh(xi2' d2)/(w2 xi2')`` and ``r = w1 xi1/(w0 xi0)``.
    """
    q = signed_wavenumber_sq(medium, k, lam)
    h0, h1 = medium.interfaces
    d1, d2 = h1 - h0, medium.H - h1
    w = medium.weights
    x0 = np.sqrt(np.maximum(q[..., 0], 0.0))
    x1 = np.sqrt(np.maximum(q[..., 1], 0.0))
    z2 = np.sqrt(np.maximum(-q[..., 2], 0.0))
    s0, c0 = np.sin(x0 * h0), np.cos(x0 * h0)
    s1, c1 = np.sin(x1 * d1), np.cos(x1 * d1)
    t2 = d2 * tanh_over(z2 * d2) / w[2]
    r = w[1] * x1 / (w[0] * x0)
    return t2 * (r * s0 * s1 - c0 * c1) - (s0 * c1 / (w[0] * x0) + c0 * d1 * sin_over(x1 * d1) / w[1])


def dispersion_residual_zoneI(medium: LayeredMedium, k, lam, pole_guard=1e-12) -> float:
    """Zone-(I) relation in tan form: ``T2 - (t0/(w0 xi0) + t1/(w1 xi1)) / (r t0 t1 - 1)``."""
    _require_jumps(medium, 2)
    tq = transverse_quantities(medium, k, lam)
    if tq.regime[1] != OSCILLATORY or tq.regime[2] != EVANESCENT:
        raise WrongZone(f"lam={lam} is not in zone (I)")
    h0, h1 = medium.interfaces
    d1, d2 = h1 - h0, medium.H - h1
    w = medium.weights
    x0, x1, z2 = tq.xi[0], tq.xi[1], tq.xi[2]
    if min(abs(math.cos(x0 * h0)), abs(math.cos(x1 * d1))) < pole_guard:
        raise PoleProximity("tan pole in zone (I) relation")
    t0, t1 = math.tan(x0 * h0), math.tan(x1 * d1)
    lhs = d2 * float(tanh_over(z2 * d2)) / w[2]
    rhs = (t0 / (w[0] * x0) + t1 / (w[1] * x1)) / (w[1] * x1 / (w[0] * x0) * t0 * t1 - 1.0)
    return lhs - rhs


def _poles(c, kappa, length, lo, hi):
    """Values of lam in (lo, hi) where ``sqrt(lam/c - kappa) * length`` hits an odd multiple of pi/2."""
    out = []
    m = 1
    while True:
        lam = c * (kappa + ((2 * m - 1) * math.pi / (2 * length)) ** 2)
        if lam >= hi:
            break
        if lam > lo:
            out.append(lam)
        m += 1
    return out


def _scan_roots(f, lo, hi, poles, expected, tol, min_samples=64, max_samples=2 ** 14):
    """Roots of ``f`` in (lo, hi), scanning each pole-to-pole cell densely."""
    edges = [lo] + sorted(set(poles)) + [hi]
    samples = min_samples
    while True:
        roots = []
        for a, b in zip(edges[:-1], edges[1:]):
            x = np.linspace(a, b, samples + 1)[1:-1] if a == lo or b == hi else np.linspace(a, b, samples + 1)
            if a == lo:
                x = np.concatenate([[a + (b - a) * 1e-12], x])
            if b == hi:
                x = np.concatenate([x, [b - (b - a) * 1e-12]])
            fx = np.asarray(f(x), dtype=float)
            for j in range(len(x) - 1):
                if fx[j] == 0.0:
                    roots.append(float(x[j]))
                elif (fx[j] > 0) != (fx[j + 1] > 0) and fx[j + 1] != 0.0:
                    roots.append(bisect(lambda v: float(f(v)), float(x[j]), float(x[j + 1]), tol,
                                        float(fx[j]), float(fx[j + 1])))
        roots = sorted(set(roots))
        if len(roots) == expected:
            return roots
        samples *= 2
        if samples > max_samples:
            raise ScanResolutionExceeded(
                f"found {len(roots)} roots, oscillation count says {expected} in ({lo}, {hi})")


def guided_eigenvalues_2jump(medium: LayeredMedium, k, tol=DEFAULT_TOL) -> SpectrumSlice:
    """Zone-(0) and zone-(I) eigenvalues from their explicit relations."""
    _require_jumps(medium, 2)
    kappa = medium.kappa(k)
    c0, c1, c2 = medium.speeds
    h0, h1 = medium.interfaces
    b0, b1, b2 = c0 * kappa, c1 * kappa, c2 * kappa
    n1 = count_below(medium, k, b1)
    n2 = count_below(medium, k, b2)
    z0 = _scan_roots(lambda x: regular_residual_zone0(medium, k, x), b0, b1,
                     _poles(c0, kappa, h0, b0, b1), n1, tol)
    poles = _poles(c0, kappa, h0, b1, b2) + _poles(c1, kappa, h1 - h0, b1, b2)
    zI = _scan_roots(lambda x: regular_residual_zoneI(medium, k, x), b1, b2, poles, n2 - n1, tol)
    lam = np.array(z0 + zI)
    zone = ("GUIDED_0",) * len(z0) + ("GUIDED_I",) * len(zI)
    return SpectrumSlice(int(k), kappa, lam, np.arange(1, len(lam) + 1), zone, len(lam))


# ---------------------------------------------------------------------------
# any number of jumps


def guided_eigenvalues(medium: LayeredMedium, k, tol=DEFAULT_TOL) -> SpectrumSlice:
    """Guided eigenvalues (below ``c_N kappa``) for any layering."""
    kappa = medium.kappa(k)
    if medium.n_jumps == 0:
        return _empty(k, kappa)
    if medium.n_jumps == 1:
        return guided_eigenvalues_1jump(medium, k, tol)
    if medium.n_jumps == 2:
        return guided_eigenvalues_2jump(medium, k, tol)
    lo, hi = medium.c_min * kappa, medium.c_max * kappa
    n = count_below(medium, k, hi)
    lam = np.array([eigenvalue_by_index(medium, k, i, lo, hi, tol) for i in range(1, n + 1)])
    zone = tuple(zone_of(medium, k, x) for x in lam)
    return SpectrumSlice(int(k), kappa, lam, np.arange(1, n + 1), zone, n)


def nonguided_eigenvalues(medium: LayeredMedium, k, lam_max, tol=DEFAULT_TOL, lam_min=None) -> SpectrumSlice:
    """All eigenvalues in ``(max(c_N kappa, lam_min), lam_max]``."""
    kappa = medium.kappa(k)
    lo = medium.c_max * kappa if lam_min is None else max(lam_min, medium.c_max * kappa)
    if lam_max <= lo:
        return _empty(k, kappa)
    n_lo = count_below(medium, k, lo)
    n_hi = count_below(medium, k, lam_max)
    if shooting_residual(medium, k, lam_max) == 0.0:
        n_hi += 1
    idx = np.arange(n_lo + 1, n_hi + 1)
    lam = np.array([eigenvalue_by_index(medium, k, int(i), lo, lam_max, tol) for i in idx])
    return SpectrumSlice(int(k), kappa, lam, idx.astype(int), (NON_GUIDED,) * len(lam), 0)


def spectrum(medium: LayeredMedium, k, lam_max=None, tol=DEFAULT_TOL) -> SpectrumSlice:
    """Guided eigenvalues plus non-guided ones up to ``lam_max``."""
    s = guided_eigenvalues(medium, k, tol)
    if lam_max is not None:
        s = s.extend(nonguided_eigenvalues(medium, k, lam_max, tol))
    return s

"""Eigenfunctions of the reduced operator, piece by piece.

Oscillating layers store ``(a, b)`` with ``u = a sin(xi x) + b cos(xi x)`` in the absolute
coordinate ``x``. Decaying layers store their two end values ``(U0, U1)`` and evaluate
``u = U0 g(d - s) + U1 g(s)`` with ``g(s) = sinh(z s)/sinh(z d)``, ``s = x - x_lo``; ``g`` is
computed from decaying exponentials so no intermediate overflows. The lowest layer is
anchored at ``a_0 = 1``, ``b_0 = 0``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import (NON_GUIDED, TransverseQuantities, regular_residual_1jump,
                         regular_residual_zone0, regular_residual_zoneI, signed_wavenumber_sq,
                         tanh_over, transverse_quantities, zone_of)
from .errors import NotARoot, OutOfDomain, WrongZone
from .medium import LayeredMedium, layer_of

OSC = "OSC"
EVA = "EVA"

ROOT_TOL = 1e-7


def _sinhc(y):
    """sinh(y)/y, finite at 0."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-4
    safe = np.where(small, 1.0, y)
    return np.where(small, 1.0 + y * y / 6.0, np.sinh(safe) / safe)


def sinh_ratio(z, d, s):
    """``sinh(z s)/sinh(z d)`` for ``0 <= s <= d``, overflow-free, ``s/d`` at ``z = 0``."""
    s = np.asarray(s, dtype=float)
    y = z * d
    if y > 1.0:
        return np.exp(-z * (d - s)) * -np.expm1(-2.0 * z * s) / -np.expm1(-2.0 * y)
    return (s / d) * _sinhc(z * s) / _sinhc(y)


def cosh_over_sinh(z, d, s):
    """``z cosh(z s)/sinh(z d)``, the derivative of :func:`sinh_ratio` in ``s``."""
    s = np.asarray(s, dtype=float)
    y = z * d
    if y > 1.0:
        return z * np.exp(-z * (d - s)) * (1.0 + np.exp(-2.0 * z * s)) / -np.expm1(-2.0 * y)
    return np.cosh(z * s) / (d * _sinhc(y))


def _z_coth(z, d):
    """``z coth(z d)``, equal to ``1/d`` at ``z = 0``."""
    return 1.0 / (d * float(tanh_over(z * d)))


def _z_csch(z, d):
    """``z / sinh(z d)``."""
    y = z * d
    if y > 1.0:
        return 2.0 * z * math.exp(-y) / -math.expm1(-2.0 * y)
    return 1.0 / (d * float(_sinhc(y)))


@dataclass(frozen=True)
class LayerCoefficients:
    """Per-layer data: ``kind[i]`` is OSC or EVA, ``pair[i]`` is ``(a, b)`` or ``(U0, U1)``."""

    kind: tuple
    pair: tuple
    wavenumber: tuple  # xi for OSC, decay rate for EVA

    def amplitude_phase(self, i):
        """``(r, beta)`` with ``a sin + b cos = r cos(xi x - beta)``."""
        if self.kind[i] != OSC:
            raise WrongZone(f"layer {i} is not oscillating")
        a, b = self.pair[i]
        return math.hypot(a, b), math.atan2(a, b)


@dataclass(frozen=True)
class Eigenmode:
    medium: LayeredMedium
    k: int
    ell: int
    lam: float
    tq: TransverseQuantities
    coeffs: LayerCoefficients
    family: str
    zone: str
    meta: dict = field(default_factory=dict)

    # -- evaluation -------------------------------------------------------

    def _layer_eval(self, i, x, deriv=False):
        lo, hi = self.medium.bounds[i], self.medium.bounds[i + 1]
        xi = self.coeffs.wavenumber[i]
        p, q = self.coeffs.pair[i]
        if self.coeffs.kind[i] == OSC:
            if deriv:
                return xi * (p * np.cos(xi * x) - q * np.sin(xi * x))
            return p * np.sin(xi * x) + q * np.cos(xi * x)
        d = hi - lo
        s = np.clip(x - lo, 0.0, d)
        if deriv:
            return -p * cosh_over_sinh(xi, d, d - s) + q * cosh_over_sinh(xi, d, s)
        return p * sinh_ratio(xi, d, d - s) + q * sinh_ratio(xi, d, s)

    def evaluate(self, x2):
        """``u(x2)``; vectorized."""
        x = np.atleast_1d(np.asarray(x2, dtype=float))
        if np.any((x < 0) | (x > self.medium.H)):
            raise OutOfDomain(f"x2 outside [0, {self.medium.H}]")
        idx = np.searchsorted(np.array(self.medium.interfaces), x, side="left")
        out = np.empty_like(x)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self._layer_eval(int(i), x[m])
        return out if np.ndim(x2) else float(out[0])

    def evaluate_full(self, x1, x2):
        """``sin(k pi x1 / L) u(x2)`` (unnormalized)."""
        x1 = np.asarray(x1, dtype=float)
        if np.any((x1 < 0) | (x1 > self.medium.L)):
            raise OutOfDomain(f"x1 outside [0, {self.medium.L}]")
        return np.sin(self.k * math.pi * x1 / self.medium.L) * self.evaluate(x2)

    def one_sided(self, i, x):
        """``(u, w u')`` at ``x`` computed from layer ``i``'s formula."""
        return (float(self._layer_eval(i, x)),
                float(self.medium.weights[i] * self._layer_eval(i, x, deriv=True)))

    def interface_mismatch(self):
        """Largest relative jump of ``u`` and of the flux over all interfaces."""
        worst = 0.0
        for i, h in enumerate(self.medium.interfaces):
            u0, p0 = self.one_sided(i, h)
            u1, p1 = self.one_sided(i + 1, h)
            worst = max(worst, abs(u0 - u1) / max(abs(u0), abs(u1), 1e-300) if (u0 or u1) else 0.0,
                        abs(p0 - p1) / max(abs(p0), abs(p1), 1e-300) if (p0 or p1) else 0.0)
        return worst

    def max_abs(self, samples=2049):
        x = np.linspace(0.0, self.medium.H, samples)
        return float(np.max(np.abs(self.evaluate(x))))

    @property
    def layer_values(self):
        """``u`` at ``[0, h_0, ..., H]``."""
        return self.evaluate(self.medium.bounds)

    def evanescent_pair(self, i):
        """``(A, B)`` with ``u = A e^{-z (x - lo)} + B e^{-z (hi - x)}`` on decaying layer ``i``."""
        if self.coeffs.kind[i] != EVA:
            raise WrongZone(f"layer {i} is not decaying")
        z = self.coeffs.wavenumber[i]
        d = self.medium.thickness[i]
        U0, U1 = self.coeffs.pair[i]
        E = math.exp(-z * d)
        den = -math.expm1(-2 * z * d)
        return (U0 - E * U1) / den, (U1 - E * U0) / den


# ---------------------------------------------------------------------------
# construction


def _osc_from_state(xi, w, x, u, p):
    """``(a, b)`` of the oscillating layer through ``(u, p)`` at ``x``."""
    th = xi * x
    P = p / (w * xi)
    s, c = math.sin(th), math.cos(th)
    return u * s + P * c, u * c - P * s


def _osc_state(xi, w, a, b, x):
    th = xi * x
    s, c = math.sin(th), math.cos(th)
    return a * s + b * c, w * xi * (a * c - b * s)


def _assemble(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL):
    q = signed_wavenumber_sq(medium, k, lam)
    w = medium.weights
    bnd = medium.bounds
    d = medium.thickness
    n = medium.n_jumps
    osc = [bool(qi > 0) for qi in q]
    if not osc[0]:
        raise WrongZone(f"lam={lam} is below c_0 kappa; no eigenvalue there")
    top = max(i for i in range(n + 1) if osc[i])
    if any(not o for o in osc[: top + 1]):
        raise WrongZone("oscillating layers must be contiguous from the bottom")
    kind = [OSC if osc[i] else EVA for i in range(n + 1)]
    rate = [math.sqrt(abs(qi)) for qi in q]
    pairs = [None] * (n + 1)

    # bottom shot: u(0)=0, w0 u'(0) = w0 xi0 so a0 = 1, b0 = 0
    u, p = 0.0, w[0] * rate[0]
    for i in range(top + 1):
        a, b = (1.0, 0.0) if i == 0 else _osc_from_state(rate[i], w[i], bnd[i], u, p)
        pairs[i] = (a, b)
        u, p = _osc_state(rate[i], w[i], a, b, bnd[i + 1])

    if top == n:
        scale = max(abs(u), abs(p) / (w[n] * rate[n]), 1e-300)
        amp = max(math.hypot(*pairs[i]) for i in range(n + 1))
        mis = abs(u) / amp
    else:
        # top-down admittance Y = p/u at the bottom of each decaying layer, ratio U1/U0
        ratio = [0.0] * (n + 1)
        Y = None
        for i in range(n, top, -1):
            z, di = rate[i], d[i]
            if Y is None:
                r = 0.0
            else:
                # U0/U1 = cosh(z d) (1 - Y tanh(z d)/(w z)), written with sech for large z d
                t = di * float(tanh_over(z * di)) / w[i]
                sech = 1.0 / math.cosh(z * di) if z * di < 700 else 0.0
                r = sech / (1.0 - Y * t)
            ratio[i] = r
            Y = w[i] * (r * _z_csch(z, di) - _z_coth(z, di))
        scale = max(abs(p), abs(Y * u), 1e-300)
        mis = abs(p - Y * u) / scale
        U0 = u
        for i in range(top + 1, n + 1):
            U1 = ratio[i] * U0
            pairs[i] = (U0, U1)
            U0 = U1
    if mis > tol:
        raise NotARoot(f"lam={lam} leaves a matching defect {mis:.2e} (> {tol})")
    tq = transverse_quantities(medium, k, lam)
    zone = zone_of(medium, k, lam)
    family = NON_GUIDED if zone == NON_GUIDED else "GUIDED"
    return Eigenmode(medium, int(k), int(ell), float(lam), tq,
                     LayerCoefficients(tuple(kind), tuple(pairs), tuple(rate)), family, zone,
                     {"matching_defect": mis})


def build_mode(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL) -> Eigenmode:
    """Eigenfunction for any layering and zone (transfer from the bottom, admittance from the top)."""
    return _assemble(medium, k, lam, ell, tol)


def _check_residual(value, scale, lam, tol):
    if abs(value) > tol * scale:
        raise NotARoot(f"lam={lam}: dispersion residual {value:.3e} exceeds {tol:.1e} x scale {scale:.3e}")


def build_guided_1jump(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL) -> Eigenmode:
    """One-jump guided mode: ``sin(xi0 x)`` below ``h0``, a decaying tail above."""
    if medium.n_jumps != 1:
        raise WrongZone("one-jump constructor needs a one-jump medium")
    kappa = medium.kappa(k)
    if not (medium.speeds[0] * kappa < lam < medium.speeds[1] * kappa):
        raise WrongZone(f"lam={lam} is not a guided value")
    h0 = medium.interfaces[0]
    w = medium.weights
    _check_residual(float(regular_residual_1jump(medium, k, lam)), h0 / w[0] + (medium.H - h0) / w[1], lam, tol)
    return _assemble(medium, k, lam, ell, tol=math.inf)


def tail_1jump_forms(mode: Eigenmode, x):
    """The tail above ``h0`` in its two closed forms.

    ``sin(xi0 h0) sinh(z (H-x))/sinh(z (H-h0))`` and
    ``-(w0 xi0/(w1 z)) cos(xi0 h0) sinh(z (H-x))/cosh(z (H-h0))``; they agree exactly on a root.
    """
    m = mode.medium
    h0, H = m.interfaces[0], m.H
    x0, z = mode.tq.xi[0], mode.tq.xi[1]
    w = m.weights
    x = np.asarray(x, dtype=float)
    first = math.sin(x0 * h0) * np.sinh(z * (H - x)) / math.sinh(z * (H - h0))
    second = -(w[0] * x0 / (w[1] * z)) * math.cos(x0 * h0) * np.sinh(z * (H - x)) / math.cosh(z * (H - h0))
    return first, second


def build_zone0_2jump(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL) -> Eigenmode:
    """Two-jump mode with layers 1 and 2 both decaying."""
    if medium.n_jumps != 2:
        raise WrongZone("two-jump constructor needs a two-jump medium")
    if zone_of(medium, k, lam) != "GUIDED_0":
        raise WrongZone(f"lam={lam} is not in zone (0)")
    h0, h1 = medium.interfaces
    w = medium.weights
    scale = h0 / w[0] + (h1 - h0) / w[1] + (medium.H - h1) / w[2]
    _check_residual(float(regular_residual_zone0(medium, k, lam)), scale, lam, tol)
    return _assemble(medium, k, lam, ell, tol=math.inf)


def zone0_closed_form(mode: Eigenmode, x):
    """Direct cosh/tanh/sinh formulas of the zone-(0) mode (overflows for large decay)."""
    m = mode.medium
    h0, h1 = m.interfaces
    H = m.H
    w = m.weights
    x0, z1, z2 = mode.tq.xi
    s0, c0 = math.sin(x0 * h0), math.cos(x0 * h0)
    r = w[0] * x0 / (w[1] * z1)
    x = np.asarray(x, dtype=float)
    u0 = np.sin(x0 * x)
    u1 = np.cosh(z1 * (x - h0)) * (s0 + r * c0 * np.tanh(z1 * (x - h0)))
    top = math.cosh(z1 * (h1 - h0)) / math.sinh(z2 * (H - h1)) * (s0 + r * c0 * math.tanh(z1 * (h1 - h0)))
    u2 = top * np.sinh(z2 * (H - x))
    return np.where(x <= h0, u0, np.where(x <= h1, u1, u2))


def zone0_envelopes(mode: Eigenmode, x):
    """Pointwise upper/lower envelopes of ``|u|`` on layers 1 and 2 of a zone-(0) mode.

    Returns ``(upper, lower)`` arrays; lower is the larger of the two available lower bounds
    on layer 1. Points outside (h0, H) get ``(inf, 0)``.
    """
    m = mode.medium
    h0, h1 = m.interfaces
    H = m.H
    c0, c1, c2 = m.speeds
    w = m.weights
    x0, z1, z2 = mode.tq.xi
    cs = abs(math.cos(x0 * h0))
    x = np.asarray(x, dtype=float)
    up = np.full_like(x, np.inf)
    lo = np.zeros_like(x)
    m1 = (x > h0) & (x < h1)
    e1 = np.exp(-z1 * (x[m1] - h0))
    r1 = w[0] * x0 / (w[1] * z1)
    r2 = w[0] * x0 / (w[2] * z2)
    up[m1] = 4 * cs * r1 * e1
    lo_a = cs / 8 * r2 * math.tanh(z2 * (H - h1)) * e1
    lo_b = cs / (4 * (1 + math.sqrt(c1 * (c1 - c0) / (c2 * (c2 - c0))))) * r2 * e1 * -np.expm1(-2 * z1 * (h1 - x[m1]))
    lo[m1] = np.maximum(lo_a, lo_b)
    m2 = (x > h1) & (x < H)
    prof = sinh_ratio(z2, H - h1, H - x[m2]) * math.tanh(z2 * (H - h1))  # sinh(z2(H-x))/cosh(z2(H-h1))
    base = cs * r2 * math.exp(-z1 * (h1 - h0)) * prof
    up[m2] = 2 * base
    lo[m2] = 0.5 * base
    return up, lo


def build_zoneI_2jump(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL) -> Eigenmode:
    """Two-jump mode with layer 1 oscillating and layer 2 decaying."""
    if medium.n_jumps != 2:
        raise WrongZone("two-jump constructor needs a two-jump medium")
    if zone_of(medium, k, lam) != "GUIDED_I":
        raise WrongZone(f"lam={lam} is not in zone (I)")
    h0, h1 = medium.interfaces
    w = medium.weights
    tq = transverse_quantities(medium, k, lam)
    scale = (medium.H - h1) / w[2] * (1 + w[1] * tq.xi[1] / (w[0] * tq.xi[0])) + 1 / (w[0] * tq.xi[0]) + (h1 - h0) / w[1]
    _check_residual(float(regular_residual_zoneI(medium, k, lam)), scale, lam, tol)
    return _assemble(medium, k, lam, ell, tol=math.inf)


def zoneI_identities(mode: Eigenmode) -> dict:
    """Closed-form coefficient identities for a zone-(I) mode (``a_0 = 1``).

    Returns the middle-layer coefficients from the lower interface formulas, ``a1^2 + b1^2``
    three ways, and ``a2^2`` from the mode and from the ratio ``Num/Den``.
    """
    m = mode.medium
    h0, h1 = m.interfaces
    H = m.H
    w = m.weights
    x0, x1, z2 = mode.tq.xi
    s00, c00 = math.sin(x0 * h0), math.cos(x0 * h0)
    s10, c10 = math.sin(x1 * h0), math.cos(x1 * h0)
    a1 = (w[1] * x1 * s00 * s10 + w[0] * x0 * c00 * c10) / (w[1] * x1)
    b1 = -(w[0] * x0 * c00 * s10 - w[1] * x1 * s00 * c10) / (w[1] * x1)
    num = s00 ** 2 + (w[0] * x0 / (w[1] * x1)) ** 2 * c00 ** 2
    d2 = H - h1
    den = math.sinh(z2 * d2) ** 2 + (w[2] * z2 / (w[1] * x1)) ** 2 * math.cosh(z2 * d2) ** 2
    uh1 = mode.coeffs.pair[2][0]
    a2 = uh1 / math.sinh(z2 * d2)
    a1m, b1m = mode.coeffs.pair[1]
    return {"a1": a1, "b1": b1, "a1_mode": a1m, "b1_mode": b1m,
            "norm_lower": a1 * a1 + b1 * b1, "norm_mode": a1m * a1m + b1m * b1m, "num": num,
            "norm_upper": a2 * a2 * den, "a2_sq": a2 * a2, "a2_sq_formula": num / den, "den": den}


def build_nonguided_transfer(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL) -> Eigenmode:
    """Mode above ``c_N kappa``: coefficients carried up by the interface transfer matrices."""
    kappa = medium.kappa(k)
    if lam <= medium.c_max * kappa:
        raise WrongZone(f"lam={lam} is not above the barrier {medium.c_max * kappa}")
    tm = transfer_matrices(medium, k, lam)
    pairs = [np.array([1.0, 0.0])]
    for Bi in tm.forward:
        pairs.append(Bi @ pairs[-1])
    n = medium.n_jumps
    xi = tm.xi
    aN, bN = pairs[-1]
    uH = aN * math.sin(xi[n] * medium.H) + bN * math.cos(xi[n] * medium.H)
    amp = max(float(np.hypot(*p)) for p in pairs)
    if abs(uH) > tol * amp:
        raise NotARoot(f"lam={lam}: |u(H)| = {abs(uH):.2e} relative to the coefficient size {amp:.2e}")
    tq = transverse_quantities(medium, k, lam)
    coeffs = LayerCoefficients(tuple([OSC] * (n + 1)), tuple(tuple(map(float, p)) for p in pairs), tuple(xi))
    alpha = math.hypot(aN, bN)
    return Eigenmode(medium, int(k), int(ell), float(lam), tq, coeffs, NON_GUIDED, NON_GUIDED,
                     {"boundary_residual": abs(uH) / amp, "top_amplitude": alpha})


# ---------------------------------------------------------------------------
# transfer matrices


def _U(theta):
    s, c = math.sin(theta), math.cos(theta)
    return np.array([[s, c], [c, -s]])


_J = np.diag([1.0, -1.0])


@dataclass
class TransferMatrices:
    """Interface matrices for an all-oscillating eigenvalue.

    ``S[i]`` and ``T[i]`` map layer ``i`` and layer ``i+1`` coefficients to ``(u, w u')`` at
    ``h_i``; ``forward[i] = T[i]^-1 S[i]`` carries ``(a_i, b_i)`` to ``(a_{i+1}, b_{i+1})``.
    ``B_up[i]`` (``B_{i+1,i}``) and ``B_down[i]`` (``B_{i,i+1}``) are the factors whose norms
    control coefficient growth.
    """

    xi: tuple
    ratio: tuple  # w_{i+1} xi_{i+1} / (w_i xi_i)
    S: list
    T: list
    forward: list
    B_up: list
    B_down: list

    def norms(self):
        """``(||B_{i+1,i}||, ||B_{i,i+1}||)`` by SVD."""
        return ([float(np.linalg.norm(B, 2)) for B in self.B_up],
                [float(np.linalg.norm(B, 2)) for B in self.B_down])

    def predicted_norms(self):
        return ([max(1.0, r) for r in self.ratio], [max(1.0, 1.0 / r) for r in self.ratio])


def transfer_matrices(medium: LayeredMedium, k, lam) -> TransferMatrices:
    q = signed_wavenumber_sq(medium, k, lam)
    if np.any(q <= 0):
        raise WrongZone(f"lam={lam} does not make every layer oscillate")
    xi = tuple(float(v) for v in np.sqrt(q))
    w = medium.weights
    S, T, F, Bu, Bd, R = [], [], [], [], [], []
    for i, h in enumerate(medium.interfaces):
        wx0, wx1 = w[i] * xi[i], w[i + 1] * xi[i + 1]
        Si = np.diag([1.0, wx0]) @ _U(xi[i] * h)
        Ti = np.diag([1.0, wx1]) @ _U(xi[i + 1] * h)
        r = wx1 / wx0
        S.append(Si)
        T.append(Ti)
        # T^-1 S = U(xi_{i+1} h) diag(1, 1/r) U(xi_i h); U is its own inverse
        F.append(_U(xi[i + 1] * h) @ np.diag([1.0, 1.0 / r]) @ _U(xi[i] * h))
        Bu.append(_J @ _U(xi[i] * h) @ np.diag([1.0, r]))
        Bd.append(_J @ _U(xi[i + 1] * h) @ np.diag([1.0, 1.0 / r]))
        R.append(r)
    return TransferMatrices(xi, tuple(R), S, T, F, Bu, Bd)


def ratio_bounds(medium: LayeredMedium, eps):
    """Upper bounds of ``w_j xi_j / (w_{j+1} xi_{j+1})`` over ``lam > (c_N + eps) kappa``.

    For ``j <= N-2`` the supremum sits at ``lam = c_N kappa``; for ``j = N-1`` at
    ``lam = (c_N + eps) kappa``.
    """
    c = np.asarray(medium.speeds)
    w = medium.weights
    n = medium.n_jumps
    cN = c[-1]
    out = []
    for j in range(n):
        top = cN + eps if j == n - 1 else cN
        sq = (w[j] / w[j + 1]) ** 2 * (c[j + 1] / c[j]) * (top - c[j]) / (top - c[j + 1])
        out.append(math.sqrt(sq))
    return out


def coefficient_bound(medium: LayeredMedium, eps) -> float:
    """``M_eps``: product of ``max(1, bound_j)``, so ``||(a_i, b_i)|| <= M_eps |a_0|`` for every layer."""
    return float(np.prod([max(1.0, b) for b in ratio_bounds(medium, eps)])) if medium.n_jumps else 1.0


def build_guided(medium: LayeredMedium, k, lam, ell=0, tol=ROOT_TOL) -> Eigenmode:
    """Dispatch to the constructor matching the medium and the zone of ``lam``."""
    zone = zone_of(medium, k, lam)
    if zone == NON_GUIDED:
        return build_nonguided_transfer(medium, k, lam, ell, tol)
    if medium.n_jumps == 1:
        return build_guided_1jump(medium, k, lam, ell, tol)
    if medium.n_jumps == 2 and zone == "GUIDED_0":
        return build_zone0_2jump(medium, k, lam, ell, tol)
    if medium.n_jumps == 2 and zone == "GUIDED_I":
        return build_zoneI_2jump(medium, k, lam, ell, tol)
    return build_mode(medium, k, lam, ell, tol)


def sample_profile(mode: Eigenmode, n=2048):
    """Interface-aligned sample grid: ``(x, u, layer, regime)``."""
    m = mode.medium
    counts = np.maximum(1, np.rint(n * m.thickness / m.H)).astype(int)
    xs = [np.linspace(m.bounds[i], m.bounds[i + 1], c + 1)[:-1] for i, c in enumerate(counts)]
    x = np.concatenate(xs + [[m.H]])
    u = mode.evaluate(x)
    layer = np.array([layer_of(m, v)[0] for v in x])
    regime = [mode.coeffs.kind[i] for i in layer]
    return x, u, layer, regime

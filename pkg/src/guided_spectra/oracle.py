"""Independent ground truth for the reduced transverse operator.

* A second-order finite-difference (lumped P1) discretization on a grid that has a
  node on every interface, for layered, smooth and "profile below / constant above"
  media in both operator forms.
* The Liouville variable ``s = int_0^x dt / c(t)`` and a Pruefer phase integrator
  for smooth divergence-form media, where ``u_ss + Q u = 0`` with ``Q = (lam - kappa c) c``.
* The interface-value identity for media that are constant above the first interface.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .errors import ConvergenceFail, OutOfDomain, QNonpositive, WrongZone
from .medium import FORM_A, FORM_B, LayeredMedium, SmoothMedium, validate_smooth

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class TailMedium:
    """Arbitrary positive profile ``gamma0`` on (0, h0), constant ``c1`` on (h0, H)."""

    L: float
    H: float
    h0: float
    c1: float
    gamma0: Callable
    form: str = FORM_A

    def kappa(self, k) -> float:
        return (k * math.pi / self.L) ** 2

    @classmethod
    def from_layered(cls, medium: LayeredMedium) -> "TailMedium":
        c0 = medium.speeds[0]
        return cls(medium.L, medium.H, medium.interfaces[0], medium.speeds[1],
                   lambda x: c0 + 0.0 * np.asarray(x, dtype=float), medium.form)


def layer_cells(medium, n: int) -> np.ndarray:
    """Cells per piece so that the whole grid has about ``n`` cells and every break is a node."""
    if isinstance(medium, LayeredMedium):
        d = medium.thickness
    elif isinstance(medium, TailMedium):
        d = np.array([medium.h0, medium.H - medium.h0])
    else:
        return np.array([int(n)])
    return np.maximum(1, np.rint(n * d / d.sum())).astype(int)


def _grid(medium, n, refine=1):
    """Nodes and per-cell speeds (cell midpoints for smooth pieces)."""
    cells = layer_cells(medium, n) * refine
    if isinstance(medium, LayeredMedium):
        b = medium.bounds
        xs = [np.linspace(b[i], b[i + 1], m + 1)[:-1] for i, m in enumerate(cells)]
        x = np.concatenate(xs + [[medium.H]])
        cc = np.concatenate([np.full(m, c) for m, c in zip(cells, medium.speeds)])
        return x, cc
    if isinstance(medium, TailMedium):
        lo = np.linspace(0.0, medium.h0, cells[0] + 1)
        hi = np.linspace(medium.h0, medium.H, cells[1] + 1)
        x = np.concatenate([lo, hi[1:]])
        mid = 0.5 * (lo[1:] + lo[:-1])
        cc = np.concatenate([np.asarray(medium.gamma0(mid), dtype=float), np.full(cells[1], medium.c1)])
        return x, cc
    x = np.linspace(0.0, medium.H, cells[0] + 1)
    return x, np.asarray(medium.c(0.5 * (x[1:] + x[:-1])), dtype=float)


@dataclass
class DiscreteOperator:
    """Symmetric tridiagonal ``M^-1/2 K M^-1/2`` with diagonal mass ``M`` on interior nodes."""

    x: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    mass: np.ndarray
    form: str

    @property
    def size(self) -> int:
        return len(self.diag)


def discretize(medium, k, n: int, refine: int = 1) -> DiscreteOperator:
    """Lumped P1 discretization of ``-(w u')' + w kappa u = lam m u`` on an interface-aligned grid.

    FORM_B: flux and shift weight ``c``, mass weight 1. FORM_A: flux and shift weight 1,
    mass weight ``1/c``. Interior nodes only (Dirichlet at both ends).
    """
    if n < 2:
        raise OutOfDomain("grid needs at least two cells")
    x, cc = _grid(medium, n, refine)
    h = np.diff(x)
    kappa = medium.kappa(k)
    form = getattr(medium, "form", FORM_B)
    if form == FORM_B:
        flux, shift, dens = cc / h, cc * h, h
    else:
        flux, shift, dens = 1.0 / h, h, h / cc
    K_diag = flux[:-1] + flux[1:] + 0.5 * kappa * (shift[:-1] + shift[1:])
    K_off = -flux[1:-1]
    M = 0.5 * (dens[:-1] + dens[1:])
    r = 1.0 / np.sqrt(M)
    return DiscreteOperator(x, K_diag * r * r, K_off * r[:-1] * r[1:], M, form)


def sturm_count(op: DiscreteOperator, lam) -> np.ndarray:
    """Number of eigenvalues of ``op`` strictly below each ``lam`` (LDL^T inertia)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    e2 = op.off ** 2
    tiny = np.finfo(float).tiny
    q = op.diag[0] - lam
    count = (q < 0).astype(int)
    for i in range(1, op.size):
        q = np.where(q == 0.0, tiny, q)
        q = op.diag[i] - lam - e2[i - 1] / q
        count += q < 0
    return count


@dataclass
class FDResult:
    lam: np.ndarray
    index: np.ndarray  # 1-based
    x: np.ndarray
    vectors: np.ndarray = None  # columns sampled on x, zero at both ends


def fd_eigensolve(medium, k, n=4096, count=None, lam_range=None, vectors=False, refine=1) -> FDResult:
    """Lowest ``count`` eigenpairs, or all eigenpairs with ``lam`` in ``lam_range = (lo, hi]``."""
    op = discretize(medium, k, n, refine)
    if count is not None:
        sel = dict(select="i", select_range=(0, int(count) - 1))
        first = 0
    elif lam_range is not None:
        lo, hi = lam_range
        sel = dict(select="v", select_range=(lo, hi))
        first = int(sturm_count(op, lo)[0])
    else:
        raise OutOfDomain("give count or lam_range")
    if vectors:
        lam, y = eigh_tridiagonal(op.diag, op.off, **sel)
        u = y / np.sqrt(op.mass)[:, None]
        # fix the sign so that the mode starts upward
        u *= np.where(u[0] < 0, -1.0, 1.0)
        pad = np.zeros((1, u.shape[1]))
        u = np.vstack([pad, u, pad])
    else:
        lam = eigvalsh_tridiagonal(op.diag, op.off, **sel)
        u = None
    return FDResult(lam, np.arange(first + 1, first + 1 + len(lam)), op.x, u)


@dataclass
class RichardsonResult:
    lam: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    index: np.ndarray

    @property
    def disagreement(self) -> float:
        if len(self.lam) == 0:
            return 0.0
        return float(np.max(np.abs(self.fine - self.coarse) / np.abs(self.fine)))


def fd_richardson(medium, k, n=4096, count=None, lam_range=None, tol=1e-2) -> RichardsonResult:
    """Pair grids with ``n`` and ``2n`` cells and extrapolate ``(4 lam_2n - lam_n)/3`` index by index."""
    fine = fd_eigensolve(medium, k, n, count, lam_range, refine=2)
    if len(fine.lam) == 0:
        e = np.zeros(0)
        return RichardsonResult(e, e, e, np.zeros(0, dtype=int))
    idx = fine.index
    coarse = fd_eigensolve(medium, k, n, count=int(idx[-1])).lam[idx - 1]
    out = RichardsonResult((4.0 * fine.lam - coarse) / 3.0, coarse, fine.lam, idx)
    if out.disagreement > tol:
        raise ConvergenceFail(f"grids n={n} and {2 * n} disagree by {out.disagreement:.2e} (> {tol})")
    return out


def fd_count_below(medium, k, lam, n=4096) -> int:
    return int(sturm_count(discretize(medium, k, n), lam)[0])


# ---------------------------------------------------------------------------
# interface-value identity


def _gauss_nodes(x):
    """Composite 5-point Gauss nodes and weights on the cells of ``x``."""
    a, b = x[:-1, None], x[1:, None]
    pts = 0.5 * (a + b) + 0.5 * (b - a) * _GL_X
    wts = 0.5 * (b - a) * _GL_W
    return pts.ravel(), wts.ravel()


def interface_value_formula(medium: TailMedium, k, lam, x, u) -> float:
    """``u(h0)`` predicted from ``u`` on (0, h0) for a FORM_A medium constant above ``h0``.

    ``(lam/z) sinh(z (H-h0))/sinh(z H) * int_0^h0 sinh(z s) (c1-gamma0)/(gamma0 c1) u(s) ds``
    with ``z = sqrt(kappa - lam/c1)``; written with decaying exponentials so large ``z H``
    does not overflow, and finite as ``z -> 0``.
    """
    kappa = medium.kappa(k)
    c1, h0, H = medium.c1, medium.h0, medium.H
    if lam >= c1 * kappa:
        raise WrongZone(f"lam={lam} is not below the barrier {c1 * kappa}")
    z = math.sqrt((c1 * kappa - lam) / c1)
    below = x <= h0 + 1e-14 * H
    pts, wts = _gauss_nodes(x[below])
    up = np.interp(pts, x, u)
    g = np.asarray(medium.gamma0(pts), dtype=float)
    if z * H < 1e-6:
        kernel = pts * (H - h0) / H
    else:
        # sinh(z s) sinh(z (H-h0)) / (z sinh(z H)), each sinh scaled by its growth
        e = np.exp
        kernel = (e(z * (pts - h0)) * -np.expm1(-2 * z * pts) * -np.expm1(-2 * z * (H - h0))
                  / (-np.expm1(-2 * z * H) * 2 * z))
    return float(lam * np.sum(wts * kernel * (c1 - g) / (g * c1) * up))


def greens_interface_check(medium, k, lam, x, u) -> float:
    """Relative residual ``|u(h0) - formula| / |u(h0)|`` for a sampled eigenvector."""
    if isinstance(medium, LayeredMedium):
        if medium.form != FORM_A:
            raise WrongZone("the interface identity is stated for FORM_A")
        medium = TailMedium.from_layered(medium)
    uh = float(np.interp(medium.h0, x, u))
    return abs(uh - interface_value_formula(medium, k, lam, x, u)) / abs(uh)


# ---------------------------------------------------------------------------
# Liouville variable and Pruefer phase


class LiouvilleMap:
    """``s = g(x) = int_0^x dt / c(t)`` with its inverse, for a strictly increasing profile."""

    def __init__(self, medium: SmoothMedium, table: int = 1024):
        validate_smooth(medium)
        self.medium = medium
        self._X = np.linspace(0.0, medium.H, table + 1)
        pts, wts = _gauss_nodes(self._X)
        inc = (wts / medium.c(pts)).reshape(table, -1).sum(axis=1)
        self._S = np.concatenate([[0.0], np.cumsum(inc)])

    @property
    def s_max(self) -> float:
        """Image of the top boundary, ``g(H)``."""
        return float(self._S[-1])

    def g(self, x):
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(self._X, x, side="right") - 1, 0, len(self._X) - 2)
        a = self._X[j]
        mid, half = 0.5 * (a + x), 0.5 * (x - a)
        t = mid[..., None] + half[..., None] * _GL_X
        part = half * np.sum(_GL_W / self.medium.c(t), axis=-1)
        return self._S[j] + part

    def g_inv(self, s, newton=4):
        s = np.asarray(s, dtype=float)
        x = np.interp(s, self._S, self._X)
        for _ in range(newton):
            x = np.clip(x - (self.g(x) - s) * self.medium.c(x), 0.0, self.medium.H)
        return x

    def cbar(self, s):
        return self.medium.c(self.g_inv(s))

    def Q(self, s, lam, k):
        c = self.cbar(s)
        return (lam - self.medium.kappa(k) * c) * c


@dataclass
class PrueferResult:
    s: np.ndarray
    phi: np.ndarray  # shape (len(lam), len(s))
    logR: np.ndarray
    lam: np.ndarray
    Q: np.ndarray

    @property
    def indicator(self) -> np.ndarray:
        """``cos(phi(s_M))``; zero exactly at eigenvalues."""
        return np.cos(self.phi[:, -1])

    @property
    def count_below(self) -> np.ndarray:
        return np.floor((0.5 * math.pi - self.phi[:, -1]) / math.pi).astype(int)

    def profile(self) -> np.ndarray:
        """``F = R Q^-1/4 cos(phi)``; solves ``F'' + Q F = 0`` with ``F(0) = 0``."""
        return np.exp(self.logR) * self.Q ** -0.25 * np.cos(self.phi)


class PrueferIntegrator:
    """Fixed-step RK4 for the phase/amplitude pair, vectorized over ``lam``."""

    def __init__(self, lmap: LiouvilleMap, k, steps=4096):
        self.lmap = lmap
        self.k = k
        self.steps = int(steps)
        m = self.steps
        self.s = np.linspace(0.0, lmap.s_max, m + 1)
        s_all = np.linspace(0.0, lmap.s_max, 2 * m + 1)
        x = lmap.g_inv(s_all)
        med = lmap.medium
        self._c = med.c(x)
        self._dc = med.dc(x) * self._c  # d cbar / ds

    def _coeffs(self, lam):
        kappa = self.lmap.medium.kappa(self.k)
        lam = np.asarray(lam, dtype=float)[:, None]
        Q = (lam - kappa * self._c) * self._c
        if np.any(Q <= 0):
            raise QNonpositive(f"Q <= 0 for lam={float(lam.min())}; need lam > c_H kappa")
        dQ = self._dc * (lam - 2.0 * kappa * self._c)
        return np.sqrt(Q), 0.25 * dQ / Q, Q

    def integrate(self, lam, keep=False) -> PrueferResult:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        sq, a, Q = self._coeffs(lam)
        hs = self.s[1] - self.s[0]
        phi = np.full(len(lam), 0.5 * math.pi)
        logR = np.zeros(len(lam))
        if keep:
            P = np.empty((len(lam), self.steps + 1))
            Rl = np.empty_like(P)
            P[:, 0], Rl[:, 0] = phi, logR

        def f(j, p):
            return -sq[:, j] - a[:, j] * np.sin(2 * p)

        for i in range(self.steps):
            j = 2 * i
            k1 = f(j, phi)
            k2 = f(j + 1, phi + 0.5 * hs * k1)
            k3 = f(j + 1, phi + 0.5 * hs * k2)
            k4 = f(j + 2, phi + hs * k3)
            r1 = a[:, j] * np.cos(2 * phi)
            r2 = a[:, j + 1] * np.cos(2 * (phi + 0.5 * hs * k1))
            r3 = a[:, j + 1] * np.cos(2 * (phi + 0.5 * hs * k2))
            r4 = a[:, j + 2] * np.cos(2 * (phi + hs * k3))
            phi = phi + hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            logR = logR + hs / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4)
            if keep:
                P[:, i + 1], Rl[:, i + 1] = phi, logR
        if not keep:
            P, Rl = phi[:, None], logR[:, None]
            return PrueferResult(self.s[-1:], P, Rl, lam, Q[:, -1:])
        return PrueferResult(self.s, P, Rl, lam, Q[:, ::2])


def pruefer_integrate(medium: SmoothMedium, k, lam, steps=4096, tol=1e-10, max_steps=2 ** 16) -> PrueferResult:
    """Integrate with step halving until the end phase changes by less than ``tol``."""
    lmap = LiouvilleMap(medium)
    prev = None
    while True:
        res = PrueferIntegrator(lmap, k, steps).integrate(lam, keep=True)
        if prev is not None and np.max(np.abs(res.phi[:, -1] - prev)) < tol:
            return res
        if steps >= max_steps:
            raise ConvergenceFail(f"Pruefer phase not converged at {steps} steps")
        prev = res.phi[:, -1]
        steps *= 2


def pruefer_eigenvalues(medium: SmoothMedium, k, count, eps=0.05, steps=4096, tol=1e-13, phase_tol=1e-11,
                        max_iter=80):
    """The first ``count`` eigenvalues above ``(c_H + eps) kappa``, with their global indices.

    Eigenvalue number ``l`` solves ``phi(s_M; lam) = pi/2 - l pi``. The phase at the window start
    fixes the first index; each root is bracketed from the WKB guess ``int sqrt(Q) ds = l pi``
    and refined by Illinois regula falsi (all roots advance together).
    """
    lmap = LiouvilleMap(medium)
    integ = PrueferIntegrator(lmap, k, steps)
    kappa = medium.kappa(k)
    start = (medium.c_max + eps) * kappa
    first = int(integ.integrate([start]).count_below[0]) + 1
    idx = np.arange(first, first + int(count))
    target = 0.5 * math.pi - idx * math.pi

    def end_phase(lam):
        return integ.integrate(lam).phi[:, 0]

    # the end phase decreases in lam: f > 0 below the root, f < 0 above
    lo = np.full(len(idx), start)
    f_lo = end_phase(lo) - target
    cmean = float(np.mean(lmap.cbar(integ.s)))
    wkb = start + cmean * ((idx - first + 1) * math.pi / lmap.s_max / cmean) ** 2
    hi = np.maximum(wkb * 1.5, start * 1.01)
    f_hi = end_phase(hi) - target
    while np.any(f_hi > 0):
        hi = np.where(f_hi > 0, hi * 2.0, hi)
        f_hi = end_phase(hi) - target
    x = np.clip(wkb, lo, hi)
    side = np.zeros(len(idx), dtype=int)
    for _ in range(max_iter):
        fx = end_phase(x) - target
        upper = fx < 0
        # Illinois: halve the stale endpoint's value when the same side moves twice
        f_lo = np.where(upper & (side == 1), 0.5 * f_lo, f_lo)
        f_hi = np.where(~upper & (side == -1), 0.5 * f_hi, f_hi)
        hi, f_hi = np.where(upper, x, hi), np.where(upper, fx, f_hi)
        lo, f_lo = np.where(upper, lo, x), np.where(upper, f_lo, fx)
        side = np.where(upper, 1, -1)
        if np.all((hi - lo <= tol * hi) | (np.abs(fx) < phase_tol)):
            break
        x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))
    return x, idx


def smooth_mass_ratios(lmap: LiouvilleMap, res: PrueferResult, a, b) -> np.ndarray:
    """``int_a^b u^2 dx / int_0^H u^2 dx`` for every row of a Pruefer profile.

    In the Liouville variable ``dx = cbar ds``; the cumulative integral uses Simpson's rule and is
    interpolated linearly at ``g(a)`` and ``g(b)``.
    """
    F = res.profile()
    s = res.s
    dens = F ** 2 * lmap.cbar(s)
    cum = cumulative_simpson(dens, x=s, axis=-1, initial=0.0)
    sa, sb = float(lmap.g(a)), float(lmap.g(b))
    part = np.array([np.interp(sb, s, row) - np.interp(sa, s, row) for row in cum])
    return part / cum[:, -1]


def smooth_mass_ratio(lmap: LiouvilleMap, res: PrueferResult, a, b, row=0) -> float:
    """Single-row form of :func:`smooth_mass_ratios`."""
    return float(smooth_mass_ratios(lmap, res, a, b)[row])

"""L2 mass of modes over horizontal strips, by exact antiderivatives."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OutOfDomain, WrongZone
from .medium import StripRegion
from .modes import EVA, Eigenmode


def _sinc(y):
    return float(np.sinc(y / math.pi))


def _shc(y):
    """sinh(y)/y."""
    return 1.0 + y * y / 6.0 if abs(y) < 1e-4 else math.sinh(y) / y


def _cubic_remainder(y):
    """``(sinh(y) - y)/y^3``, series near zero."""
    if abs(y) < 0.5:
        y2 = y * y
        return 1 / 6 + y2 * (1 / 120 + y2 * (1 / 5040 + y2 * (1 / 362880 + y2 / 39916800)))
    return (math.sinh(y) - y) / y ** 3


def osc_piece(a, b, xi, x1, x2):
    """``int_{x1}^{x2} (a sin(xi x) + b cos(xi x))^2 dx``."""
    D, S = x2 - x1, x1 + x2
    sd = D * _sinc(xi * D)
    return 0.5 * (a * a + b * b) * D + 0.5 * (b * b - a * a) * math.cos(xi * S) * sd + a * b * math.sin(xi * S) * sd


def eva_piece(U0, U1, z, d, s1, s2):
    """``int_{s1}^{s2} (U0 g(d-s) + U1 g(s))^2 ds`` with ``g(s) = sinh(z s)/sinh(z d)``."""
    if s2 <= s1:
        return 0.0
    y = z * d
    if y > 1.0:
        E = math.exp(-y)
        den = -math.expm1(-2.0 * y)
        A = (U0 - E * U1) / den
        B = (U1 - E * U0) / den
        g = -math.expm1(-2.0 * z * (s2 - s1)) / (2.0 * z)
        return (A * A * math.exp(-2.0 * z * s1) * g + B * B * math.exp(-2.0 * z * (d - s2)) * g
                + 2.0 * A * B * E * (s2 - s1))
    norm = (d * _shc(y)) ** 2

    def sq(s):  # int_0^s sinh^2(z t) dt / z^2
        return 2.0 * s ** 3 * _cubic_remainder(2.0 * z * s)

    low = (sq(s2) - sq(s1)) / norm
    high = (sq(d - s1) - sq(d - s2)) / norm
    v1, v2 = 2.0 * s1 - d, 2.0 * s2 - d
    cross = ((s2 - s1) * 0.25 * d * d * _shc(0.5 * y) ** 2
             - 0.25 * (v2 ** 3 * _cubic_remainder(z * v2) - v1 ** 3 * _cubic_remainder(z * v1))) / norm
    return U0 * U0 * high + U1 * U1 * low + 2.0 * U0 * U1 * cross


def layer_masses(mode: Eigenmode, a=0.0, b=None):
    """Mass of ``u`` on ``(a, b)`` split per layer (zeros for layers outside)."""
    m = mode.medium
    b = m.H if b is None else b
    if not (0.0 <= a <= b <= m.H):
        raise OutOfDomain(f"(a, b) = ({a}, {b}) not inside [0, {m.H}]")
    bnd = m.bounds
    out = []
    for i in range(m.n_jumps + 1):
        lo, hi = max(a, bnd[i]), min(b, bnd[i + 1])
        if hi <= lo:
            out.append(0.0)
            continue
        p, q = mode.coeffs.pair[i]
        z = mode.coeffs.wavenumber[i]
        if mode.coeffs.kind[i] == EVA:
            out.append(eva_piece(p, q, z, bnd[i + 1] - bnd[i], lo - bnd[i], hi - bnd[i]))
        else:
            out.append(osc_piece(p, q, z, lo, hi))
    return out


def vertical_mass(mode: Eigenmode, a, b) -> float:
    """``int_a^b u(x2)^2 dx2``."""
    if not a < b:
        raise OutOfDomain(f"need a < b, got ({a}, {b})")
    return float(sum(layer_masses(mode, a, b)))


def horizontal_factor(k, alpha, beta, L=1.0) -> float:
    """Fraction of ``int_0^L sin^2(k pi x/L)`` carried by ``(alpha, beta)``."""
    w = (beta - alpha) / L
    return w * (1.0 - _sinc(k * math.pi * w) * math.cos(k * math.pi * (alpha + beta) / L))


def spectral_distance(medium, k, lam, layer=1):
    """``(rho, rho_tilde)``: distance from ``(kappa, lam)`` to the line ``lam = c kappa`` and its rescaling.

    ``rho = (c kappa - lam)/sqrt(1 + c^2)``, ``rho_tilde = sqrt(sqrt(1 + c^2)/c * rho)``, which
    is the decay rate of layer ``layer``.
    """
    c = medium.speeds[layer]
    kappa = medium.kappa(k)
    if lam > c * kappa:
        raise WrongZone(f"lam={lam} lies above the line lam = {c} kappa")
    rho = (c * kappa - lam) / math.sqrt(1.0 + c * c)
    return rho, math.sqrt(math.sqrt(1.0 + c * c) / c * rho)


def frontier_distance(medium, k, lam) -> float:
    """Distance from ``(kappa, lam)`` to the line ``lam = c_0 kappa``; equals ``xi_0^2/sqrt(2)`` when ``c_0 = 1``."""
    c = medium.speeds[0]
    return (lam - c * medium.kappa(k)) / math.sqrt(1.0 + c * c)


@dataclass
class MassReport:
    k: int
    ell: int
    lam: float
    region: dict
    layer_masses: list
    vertical: float
    total: float
    horizontal: float
    ratio: float
    rho: float
    rho_tilde: float

    def to_dict(self):
        return asdict(self)


def mass_ratio(mode: Eigenmode, region: StripRegion) -> MassReport:
    """``R_omega`` for ``omega = (alpha, beta) x (a, b)``."""
    m = mode.medium
    total_parts = layer_masses(mode)
    total = float(sum(total_parts))
    vert = vertical_mass(mode, region.a, region.b)
    C = horizontal_factor(mode.k, region.alpha, region.beta, m.L)
    if m.n_jumps and mode.lam <= m.speeds[1] * m.kappa(mode.k):
        rho, rt = spectral_distance(m, mode.k, mode.lam)
    else:
        rho, rt = float("nan"), float("nan")
    return MassReport(mode.k, mode.ell, mode.lam, asdict(region), [float(v) for v in total_parts],
                      vert, total, C, C * vert / total, rho, rt)


def relative_masses(mode: Eigenmode):
    """Per-layer share of the total mass."""
    parts = np.array(layer_masses(mode))
    return parts / parts.sum()


"""Layered and smooth media on the rectangle (0, L) x (0, H)."""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import MediumError, NonMonotoneProfile, OutOfDomain

FORM_A = "A"  # -c * Laplacian: u and u' continuous
FORM_B = "B"  # -div(c grad): u and c u' continuous


@dataclass(frozen=True)
class LayeredMedium:
    """Horizontally stratified medium with piecewise-constant speed.

    Layer ``i`` occupies ``(h_{i-1}, h_i)`` with ``h_{-1} = 0`` and ``h_N = H``.
    """

    L: float
    H: float
    interfaces: tuple
    speeds: tuple
    form: str = FORM_A

    def __post_init__(self):
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "H", float(self.H))
        object.__setattr__(self, "interfaces", tuple(float(h) for h in self.interfaces))
        object.__setattr__(self, "speeds", tuple(float(c) for c in self.speeds))
        object.__setattr__(self, "form", str(self.form).upper())

    @property
    def n_jumps(self) -> int:
        return len(self.interfaces)

    @property
    def bounds(self) -> np.ndarray:
        """Layer boundaries ``[0, h_0, ..., h_{N-1}, H]``."""
        return np.array((0.0,) + self.interfaces + (self.H,))

    @property
    def thickness(self) -> np.ndarray:
        return np.diff(self.bounds)

    @property
    def c_min(self) -> float:
        return self.speeds[0]

    @property
    def c_max(self) -> float:
        return self.speeds[-1]

    @property
    def weights(self) -> np.ndarray:
        """Flux weights in the transmission condition: c for FORM_B, 1 for FORM_A."""
        if self.form == FORM_B:
            return np.array(self.speeds)
        return np.ones(len(self.speeds))

    def kappa(self, k) -> float:
        return (k * math.pi / self.L) ** 2

    def speed_at(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.array(self.interfaces), x, side="left")
        return np.array(self.speeds)[idx]

    def to_dict(self) -> dict:
        return {"L": self.L, "H": self.H, "interfaces": list(self.interfaces),
                "speeds": list(self.speeds), "form": self.form}

    @classmethod
    def from_dict(cls, doc: dict) -> "LayeredMedium":
        missing = {"L", "H", "interfaces", "speeds"} - set(doc)
        if missing:
            raise MediumError(f"medium document lacks fields {sorted(missing)}", "EMPTY_GEOMETRY")
        return validate(cls(doc["L"], doc["H"], doc["interfaces"], doc["speeds"],
                            doc.get("form", FORM_A)))

    @classmethod
    def from_json(cls, path) -> "LayeredMedium":
        return cls.from_dict(json.loads(Path(path).read_text()))


def validate(medium: LayeredMedium) -> LayeredMedium:
    """Return ``medium`` unchanged if geometry and speeds satisfy the layering hypotheses."""
    if not (medium.L > 0 and medium.H > 0) or not all(map(math.isfinite, (medium.L, medium.H))):
        raise MediumError("L and H must be finite and positive", "EMPTY_GEOMETRY")
    if medium.form not in (FORM_A, FORM_B):
        raise MediumError(f"unknown operator form {medium.form!r}", "EMPTY_GEOMETRY")
    h = medium.interfaces
    if len(medium.speeds) != len(h) + 1:
        raise MediumError(f"{len(h)} interfaces need {len(h) + 1} speeds, got {len(medium.speeds)}",
                          "EMPTY_GEOMETRY")
    if any(not (0.0 < hi < medium.H) for hi in h) or any(a >= b for a, b in zip(h, h[1:])):
        raise MediumError("interfaces must satisfy 0 < h_0 < ... < h_{N-1} < H (layering hypothesis)",
                          "BAD_INTERFACE_ORDER")
    c = medium.speeds
    if any(ci <= 0 or not math.isfinite(ci) for ci in c):
        raise MediumError("speeds must be finite and positive", "NON_MONOTONE_SPEEDS")
    if any(a >= b for a, b in zip(c, c[1:])):
        raise MediumError("speeds must increase strictly upward: c_0 < c_1 < ... < c_N",
                          "NON_MONOTONE_SPEEDS")
    return medium


def layer_of(medium: LayeredMedium, x2: float):
    """Layer index containing ``x2`` and whether ``x2`` sits on an interface.

    Interfaces belong to the layer below them.
    """
    if not (0.0 <= x2 <= medium.H):
        raise OutOfDomain(f"x2={x2} outside [0, {medium.H}]")
    i = int(np.searchsorted(np.array(medium.interfaces), x2, side="left"))
    on_interface = i < medium.n_jumps and x2 == medium.interfaces[i]
    return i, on_interface


def default_medium(form=FORM_A) -> LayeredMedium:
    """One jump at mid-height, c = (1, 2), unit square."""
    return LayeredMedium(1.0, 1.0, (0.5,), (1.0, 2.0), form)


@dataclass(frozen=True)
class SmoothMedium:
    """Increasing C^1 speed profile ``c(x2)`` (divergence form)."""

    H: float
    L: float
    c: Callable
    dc: Callable
    name: str = "custom"
    form: str = field(default=FORM_B)

    def kappa(self, k) -> float:
        return (k * math.pi / self.L) ** 2

    @property
    def c_min(self) -> float:
        return float(self.c(0.0))

    @property
    def c_max(self) -> float:
        return float(self.c(self.H))


def validate_smooth(medium: SmoothMedium, samples: int = 2049) -> SmoothMedium:
    x = np.linspace(0.0, medium.H, samples)
    cx = np.asarray(medium.c(x), dtype=float)
    dcx = np.asarray(medium.dc(x), dtype=float)
    if not (np.all(np.isfinite(cx)) and np.all(np.isfinite(dcx))):
        raise NonMonotoneProfile("profile or derivative not finite on [0, H]")
    # a constant profile is admitted as the calibration case
    if np.any(cx <= 0) or np.any(np.diff(cx) < 0):
        raise NonMonotoneProfile("profile must be positive and non-decreasing")
    return medium


def linear_profile(slope=1.0, c0=1.0, H=1.0, L=1.0) -> SmoothMedium:
    """c(x) = c0 + slope * x."""
    return SmoothMedium(H, L, lambda x: c0 + slope * np.asarray(x, dtype=float),
                        lambda x: slope + 0.0 * np.asarray(x, dtype=float), name=f"linear:{c0}+{slope}x")


BUILTIN_PROFILES = {"linear": linear_profile}


@dataclass(frozen=True)
class StripRegion:
    """omega = (alpha, beta) x (a, b)."""

    alpha: float
    beta: float
    a: float
    b: float

    @property
    def width(self) -> float:
        return self.beta - self.alpha

    @property
    def volume(self) -> float:
        return (self.beta - self.alpha) * (self.b - self.a)

    @classmethod
    def parse(cls, text: str) -> "StripRegion":
        """Parse ``"alpha,beta,a,b"``."""
        parts = [float(t) for t in text.split(",")]
        if len(parts) != 4:
            raise OutOfDomain(f"region needs four numbers alpha,beta,a,b; got {text!r}")
        return cls(*parts)


def validate_region(region: StripRegion, L: float, H: float) -> StripRegion:
    if not (0.0 <= region.alpha < region.beta <= L):
        raise OutOfDomain(f"horizontal interval ({region.alpha}, {region.beta}) not inside (0, {L})")
    if not (0.0 <= region.a < region.b <= H):
        raise OutOfDomain(f"vertical interval ({region.a}, {region.b}) not inside (0, {H})")
    return region

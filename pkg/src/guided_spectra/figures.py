"""Figure data (CSV rows with a fixed column schema) and their PNG renderings.

Schemas
-------
eigen-scatter : series, k, kappa, lam, ell, zone
    ``series`` is ``eigen`` for eigenvalues and ``line:c=<speed>`` for the lines ``lam = c kappa``
    sampled on the same k values (the slowest line is the frontier, the fastest the barrier).
dispersion-curve : k, lam, residual, sign
    Pole-free one-jump residual sampled on ``(c0 kappa, c1 kappa)``; sign changes per k equal
    the number of guided values.
mode-profile : x, u, layer, regime
"""

import csv
import io
import math
from pathlib import Path

import numpy as np

from .dispersion import regular_residual_1jump, spectrum

EIGEN_COLUMNS = ("series", "k", "kappa", "lam", "ell", "zone")
DISPERSION_COLUMNS = ("k", "lam", "residual", "sign")
PROFILE_COLUMNS = ("x", "u", "layer", "regime")


def fmt(v):
    """Locale-free, round-trippable text for one CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    if isinstance(v, (list, tuple, dict)):
        return str(v)
    return str(v)


def csv_text(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, rows, columns=None):
    """Write rows (dicts) with a header; ``columns`` defaults to the keys of the first row in order."""
    if columns is None:
        columns = []
        for r in rows:
            columns += [c for c in r if c not in columns]
    Path(path).write_text(csv_text(rows, columns), encoding="utf-8")
    return columns


def eigen_scatter_rows(medium, k_values, lam_max=None):
    """Eigenvalues in ``(k, kappa, lam)`` plus the lines ``lam = c_i kappa``."""
    rows = []
    ks = list(k_values)
    for k in ks:
        top = lam_max if lam_max is not None else 1.2 * medium.c_max * medium.kappa(max(ks))
        s = spectrum(medium, k, top)
        for lam, ell, zone in zip(s.lam, s.ell, s.zone):
            rows.append({"series": "eigen", "k": k, "kappa": s.kappa, "lam": float(lam), "ell": int(ell),
                         "zone": zone})
    for c in medium.speeds:
        for k in ks:
            kappa = medium.kappa(k)
            rows.append({"series": f"line:c={c:g}", "k": k, "kappa": kappa, "lam": c * kappa, "ell": None,
                         "zone": None})
    return rows


def dispersion_curve_rows(medium, k_values, per_bracket=32):
    rows = []
    h0 = medium.interfaces[0]
    for k in k_values:
        kappa = medium.kappa(k)
        lo, hi = medium.speeds[0] * kappa, medium.speeds[1] * kappa
        # about one bracket per pi/h0 of xi0
        n_br = math.sqrt((hi - lo) / medium.speeds[0]) * h0 / math.pi + 1
        n = int(per_bracket * math.ceil(n_br)) + 1
        lam = np.linspace(lo, hi, n + 2)[1:-1]
        res = regular_residual_1jump(medium, k, lam)
        for l, r in zip(lam, res):
            rows.append({"k": k, "lam": float(l), "residual": float(r), "sign": int(np.sign(r))})
    return rows


def sign_changes(rows, k):
    s = [r["sign"] for r in rows if r["k"] == k and r["sign"] != 0]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


# ---------------------------------------------------------------------------
# rendering


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    fig.savefig(path, dpi=110, metadata={"Software": None})
    _pyplot().close(fig)


def render_eigen_scatter(rows, path, title=""):
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
    eig = [r for r in rows if r["series"] == "eigen"]
    lines = sorted({r["series"] for r in rows if r["series"] != "eigen"})
    zones = sorted({r["zone"] for r in eig})
    for ax, xkey in zip(axes, ("k", "kappa")):
        for z in zones:
            pts = [(r[xkey], r["lam"]) for r in eig if r["zone"] == z]
            if pts:
                x, y = zip(*pts)
                ax.scatter(x, y, s=6, label=z)
        for name in lines:
            pts = sorted((r[xkey], r["lam"]) for r in rows if r["series"] == name)
            x, y = zip(*pts)
            ax.plot(x, y, lw=1, label=name.split(":", 1)[1])
        ax.set_xlabel("k" if xkey == "k" else "kappa = (k pi/L)^2")
        ax.set_ylabel("lambda")
    axes[1].legend(fontsize=7, loc="upper left")
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def render_dispersion(rows, path, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    for k in sorted({r["k"] for r in rows}):
        pts = [(r["lam"], r["residual"]) for r in rows if r["k"] == k]
        x, y = zip(*pts)
        ax.plot(x, y, lw=0.8, label=f"k={k}")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("lambda")
    ax.set_ylabel("regular residual")
    if len({r["k"] for r in rows}) <= 10:
        ax.legend(fontsize=7)
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def render_profile(x, u, interfaces, path, title="", strip=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, u, lw=1)
    for h in interfaces:
        ax.axvline(h, color="grey", ls="--", lw=0.8)
    if strip is not None:
        ax.axvspan(strip[0], strip[1], color="orange", alpha=0.25)
    ax.set_xlabel("x2")
    ax.set_ylabel("u")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def render_report(rows, path, ykey, title="", logy=False):
    """Per-k value of ``ykey`` from a verification report."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    pts = [(r["k"], r[ykey]) for r in rows if isinstance(r.get(ykey), (int, float)) and math.isfinite(r[ykey])]
    if pts:
        x, y = zip(*pts)
        ax.plot(x, y, ".", ms=3)
    if logy and pts and min(y) > 0:
        ax.set_yscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel(ykey)
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def render_eigenvalues(lam, path, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, len(lam) + 1), lam, ".", ms=3)
    ax.set_xlabel("index")
    ax.set_ylabel("lambda")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)

"""Command-line entry point: ``guided-spectra <command> [options]``.

Exit codes: 0 success, 1 input error, 2 a verified law did not pass.
"""

import argparse
import gzip
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import figures
from .asymptotics import DEFAULTS, bracket_case, barrier_phase, classify_case, default_medium_for, run_law
from .dispersion import count_below, eigenvalue_by_index, guided_eigenvalues, spectrum
from .errors import SpectraError
from .mass import mass_ratio
from .medium import (BUILTIN_PROFILES, FORM_A, LayeredMedium, StripRegion, default_medium,
                     validate_region)
from .modes import build_guided, sample_profile
from .oracle import fd_eigensolve

log = logging.getLogger("guided_spectra")

EXIT_OK, EXIT_INPUT, EXIT_LAW = 0, 1, 2
COMMANDS = ("spectrum", "mode", "mass", "verify", "classify", "oracle", "figure")
FIGURE_KINDS = ("eigen-scatter", "dispersion-curve", "two-jump")


@dataclass
class RunConfig:
    command: str
    medium: dict = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str = "out"


class InputError(Exception):
    pass


def parse_range(text):
    """``"a..b"`` or ``"a"`` -> inclusive integer range ``(a, b)``."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise InputError(f"k range must look like 3..20 or 7, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise InputError(f"k range {text!r} is empty or starts below 1")
    return lo, hi


def parse_pair(text):
    try:
        a, b = (float(t) for t in str(text).split(","))
    except ValueError:
        raise InputError(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def load_config(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise InputError(f"config file {path} does not exist")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}") from None


def medium_from_doc(doc):
    if doc is None:
        return None
    if "profile" in doc:
        return smooth_from_doc(doc)
    return LayeredMedium.from_dict(doc)


def layered(cfg, default=None):
    m = medium_from_doc(cfg.medium)
    if m is None:
        return default if default is not None else default_medium(FORM_A)
    if not isinstance(m, LayeredMedium):
        raise InputError(f"{cfg.command} needs a layered medium, got a smooth profile")
    return m


def smooth_from_doc(doc):
    name = doc["profile"]
    if name not in BUILTIN_PROFILES:
        raise InputError(f"unknown profile {name!r}; builtin: {', '.join(BUILTIN_PROFILES)}")
    kw = {k: v for k, v in doc.items() if k != "profile"}
    return BUILTIN_PROFILES[name](**kw)


def profile_argument(text):
    """``--profile`` value: a builtin profile name or a JSON file (layered or smooth)."""
    if text in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[text]()
    if text == "default":
        return default_medium(FORM_A)
    p = Path(text)
    if not p.exists():
        raise InputError(f"--profile {text!r} is neither a builtin ({', '.join(BUILTIN_PROFILES)}) nor a file")
    return medium_from_doc(json.loads(p.read_text(encoding="utf-8")))


def dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not serializable: {type(o)}")


def eigenvalue_at(medium, k, index):
    """Eigenvalue number ``index`` (1-based, counted from the bottom of the spectrum)."""
    lo = medium.c_min * medium.kappa(k)
    hi = 2.0 * medium.c_max * medium.kappa(k) + 1.0
    while count_below(medium, k, hi) < index:
        hi *= 2.0
    return eigenvalue_by_index(medium, k, index, lo, hi)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig, out: Path):
    medium = layered(cfg)
    k0, k1 = parse_range(cfg.params.get("k") or "1..20")
    lam_max = cfg.params.get("lam_max")
    rows, summary = [], []
    for k in range(k0, k1 + 1):
        s = spectrum(medium, k, float(lam_max) if lam_max is not None else None)
        for lam, ell, zone in zip(s.lam, s.ell, s.zone):
            rows.append({"k": k, "kappa": s.kappa, "ell": int(ell), "lam": float(lam), "zone": zone})
        summary.append({"k": k, "Lk": s.Lk, "count": len(s)})
    figures.write_csv(out / "spectrum.csv", rows, ("k", "kappa", "ell", "lam", "zone"))
    dump_json(out / "spectrum.json", {"medium": medium.to_dict(), "per_k": summary,
                                      "total_guided": sum(r["Lk"] for r in summary)})
    scatter = [dict(r, series="eigen") for r in rows] + [
        {"series": f"line:c={c:g}", "k": k, "kappa": medium.kappa(k), "lam": c * medium.kappa(k)}
        for c in medium.speeds for k in range(k0, k1 + 1)]
    figures.render_eigen_scatter(scatter, out / "spectrum.png", "spectrum")
    return EXIT_OK


def _mode(cfg):
    medium = layered(cfg)
    k = int(cfg.params.get("k") or 10)
    ell = int(cfg.params.get("ell") or 1)
    lam = eigenvalue_at(medium, k, ell)
    return medium, build_guided(medium, k, lam, ell)


def cmd_mode(cfg: RunConfig, out: Path):
    medium, mode = _mode(cfg)
    x, u, layer, regime = sample_profile(mode, int(cfg.params.get("samples") or 2048))
    scale = np.max(np.abs(u))
    rows = [{"x": float(a), "u": float(b / scale), "layer": int(c), "regime": d} for a, b, c, d in zip(x, u, layer, regime)]
    figures.write_csv(out / "mode.csv", rows, figures.PROFILE_COLUMNS)
    dump_json(out / "mode.json", {"k": mode.k, "ell": mode.ell, "lam": mode.lam, "zone": mode.zone,
                                  "family": mode.family, "kinds": list(mode.coeffs.kind),
                                  "pairs": [list(p) for p in mode.coeffs.pair],
                                  "wavenumbers": list(mode.coeffs.wavenumber),
                                  "interface_mismatch": mode.interface_mismatch(), "medium": medium.to_dict()})
    figures.render_profile(x, u / scale, medium.interfaces, out / "mode.png",
                           f"k={mode.k}, index {mode.ell}, {mode.zone}")
    return EXIT_OK


def cmd_mass(cfg: RunConfig, out: Path):
    medium, mode = _mode(cfg)
    p = cfg.params
    region = StripRegion(float(p.get("alpha") or 0.0), float(p.get("beta") or medium.L),
                         float(p.get("a") if p.get("a") is not None else 0.7),
                         float(p.get("b") if p.get("b") is not None else 0.9))
    validate_region(region, medium.L, medium.H)
    rep = mass_ratio(mode, region)
    dump_json(out / "mass.json", rep.to_dict())
    x, u, *_ = sample_profile(mode)
    figures.render_profile(x, u / np.max(np.abs(u)), medium.interfaces, out / "mass.png",
                           f"R = {rep.ratio:.3e}", strip=(region.a, region.b))
    return EXIT_OK


def _region_param(p):
    r = p.get("region")
    if r is None:
        return None
    vals = [float(t) for t in r.split(",")] if isinstance(r, str) else [float(t) for t in r]
    if len(vals) != 4:
        raise InputError(f"--region needs alpha,beta,a,b; got {r!r}")
    return StripRegion(*vals)


def cmd_verify(cfg: RunConfig, out: Path):
    p = cfg.params
    law = str(p.get("law") or "").upper()
    if law not in DEFAULTS:
        raise InputError(f"unknown law id {law!r}; known: {', '.join(DEFAULTS)}")
    medium = medium_from_doc(cfg.medium) or default_medium_for(law)
    region = _region_param(p)
    if region is not None:
        validate_region(region, medium.L, medium.H)
    extra = {}
    for key in ("reference", "case", "alpha_minus", "alpha_plus", "n_modes", "samples"):
        if p.get(key) is not None:
            extra[key] = p[key]
    if "shifts" in p and p["shifts"] is not None:
        extra["shifts"] = [float(t) for t in str(p["shifts"]).split(",")]
    k_range = parse_range(p["k"]) if p.get("k") else None
    eps = float(p["eps"]) if p.get("eps") is not None else None
    if eps is not None and eps <= 0:
        raise InputError(f"--eps must be positive, got {eps}")
    ell = int(p["ell"]) if p.get("ell") is not None else None
    rep = run_law(law, medium, k_range, ell, region, eps, threads=cfg.threads, seed=cfg.seed, **extra)
    stem = f"verify_{law}"
    figures.write_csv(out / f"{stem}.csv", rep.rows)
    summary = rep.summary()
    summary["seed"] = cfg.seed
    dump_json(out / f"{stem}.json", summary)
    ykey = next((key for key in ("ratio", "rate_ratio", "gap_ratio", "ratio_measured", "norm_err")
                 if rep.rows and key in rep.rows[0]), None)
    if ykey is None and rep.rows:
        ykey = next((key for key, v in rep.rows[0].items() if key.startswith("a=")), None)
    figures.render_report(rep.rows, out / f"{stem}.png", ykey or "ratio", law, logy=ykey == "ratio_measured")
    for f in rep.failures[:20]:
        log.warning("%s failed at k=%s: %s measured %s, required %s", f["law"], f["k"], f["quantity"],
                    f["measured"], f["required"])
    if rep.status != "OK":
        log.warning("%s: %s", law, rep.status)
    print(f"{law}: {'PASS' if rep.passed else 'FAIL'} ({rep.status}, {len(rep.failures)} failures)")
    return EXIT_OK if rep.passed else EXIT_LAW


def cmd_classify(cfg: RunConfig, out: Path):
    p = cfg.params
    k0, k1 = parse_range(p.get("k") or "1..40")
    media = []
    n_random = int(p.get("random") or 0)
    if n_random:
        rng = np.random.default_rng(cfg.seed)
        for _ in range(n_random):
            num, den = int(rng.integers(1, 10)), int(rng.integers(1, 10))
            media.append((f"{2 * num}/{den}", LayeredMedium(1.0, 1.0, (0.5,), (1.0, 1.0 + (2 * num / den) ** 2), FORM_A)))
    else:
        m = layered(cfg)
        media.append(("", m))
    rows = []
    for tag, m in media:
        for k in range(k0, k1 + 1):
            t = barrier_phase(m, k)
            Lk = count_below(m, k, m.speeds[1] * m.kappa(k))
            a, b = classify_case(m, k), bracket_case(m, k, Lk)
            rows.append({"root": tag, "c1": m.speeds[1], "k": k, "phase_frac": t - math.floor(t), "Lk": Lk,
                         "case": a, "case_brackets": b, "agree": a == b})
    figures.write_csv(out / "classify.csv", rows, ("root", "c1", "k", "phase_frac", "Lk", "case", "case_brackets", "agree"))
    counts = {c: sum(1 for r in rows if r["case"] == c) for c in ("CASE1", "CASE2", "CASE3")}
    bad = [r for r in rows if not r["agree"]]
    dump_json(out / "classify.json", {"counts": counts, "disagreements": len(bad), "seed": cfg.seed,
                                      "rows": len(rows)})
    figures.render_report([dict(r, case_num=int(r["case"][-1])) for r in rows], out / "classify.png",
                          "case_num", "case by k")
    for r in bad[:20]:
        log.warning("CLASSIFY disagreement at k=%s c1=%s: formula %s, brackets %s", r["k"], r["c1"], r["case"],
                    r["case_brackets"])
    return EXIT_OK if not bad else EXIT_LAW


def cmd_oracle(cfg: RunConfig, out: Path):
    p = cfg.params
    medium = profile_argument(p["profile"]) if p.get("profile") else layered(cfg)
    k = int(p.get("k") or 1)
    n = int(p.get("n") or 4096)
    if n < 64:
        raise InputError("--n must be at least 64")
    lam_range = parse_pair(p["range"]) if p.get("range") else None
    count = int(p.get("count") or 20) if lam_range is None else None
    vectors = bool(p.get("vectors"))
    res = fd_eigensolve(medium, k, n, count=count, lam_range=lam_range, vectors=vectors)
    rows = [{"index": int(i), "lam": float(l)} for i, l in zip(res.index, res.lam)]
    figures.write_csv(out / "oracle.csv", rows, ("index", "lam"))
    if vectors and res.vectors is not None:
        cols = ["x"] + [f"v{int(i)}" for i in res.index]
        data = np.column_stack([res.x, res.vectors]) if len(res.lam) else res.x[:, None]
        text = figures.csv_text([dict(zip(cols, row)) for row in data.tolist()], cols)
        with gzip.GzipFile(out / "oracle_vectors.csv.gz", "wb", mtime=0) as fh:
            fh.write(text.encode("utf-8"))
    figures.render_eigenvalues(res.lam, out / "oracle.png", f"k={k}, n={n}")
    return EXIT_OK


def cmd_figure(cfg: RunConfig, out: Path):
    p = cfg.params
    kind = p.get("kind")
    if kind not in FIGURE_KINDS:
        raise InputError(f"unknown figure kind {kind!r}; known: {', '.join(FIGURE_KINDS)}")
    k0, k1 = parse_range(p.get("k") or "1..8")
    ks = range(k0, k1 + 1)
    stem = kind.replace("-", "_")
    if kind == "dispersion-curve":
        medium = layered(cfg)
        if medium.n_jumps != 1:
            raise InputError("dispersion-curve needs a one-jump medium")
        rows = figures.dispersion_curve_rows(medium, ks)
        figures.write_csv(out / f"{stem}.csv", rows, figures.DISPERSION_COLUMNS)
        dump_json(out / f"{stem}.json", {"kind": kind, "sign_changes": {str(k): figures.sign_changes(rows, k) for k in ks},
                                         "Lk": {str(k): guided_eigenvalues(medium, k).Lk for k in ks}})
        figures.render_dispersion(rows, out / f"{stem}.png", kind)
        return EXIT_OK
    if kind == "two-jump":
        medium = layered(cfg, default_medium_for("THM33"))
    else:
        medium = layered(cfg)
    lam_max = float(p["lam_max"]) if p.get("lam_max") is not None else None
    rows = figures.eigen_scatter_rows(medium, ks, lam_max)
    figures.write_csv(out / f"{stem}.csv", rows, figures.EIGEN_COLUMNS)
    dump_json(out / f"{stem}.json", {"kind": kind, "medium": medium.to_dict(),
                                     "eigenvalues": sum(1 for r in rows if r["series"] == "eigen")})
    figures.render_eigen_scatter(rows, out / f"{stem}.png", kind)
    return EXIT_OK


HANDLERS = {"spectrum": cmd_spectrum, "mode": cmd_mode, "mass": cmd_mass, "verify": cmd_verify,
            "classify": cmd_classify, "oracle": cmd_oracle, "figure": cmd_figure}


def run(cfg: RunConfig) -> int:
    if cfg.command not in HANDLERS:
        raise InputError(f"unknown command {cfg.command!r}")
    if cfg.threads < 1:
        raise InputError("--threads must be at least 1")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return HANDLERS[cfg.command](cfg, out)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with a 'medium' document and default 'params'")
    common.add_argument("--out", default=None, help="output directory (default: out)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for k sweeps")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized sampling")

    ap = argparse.ArgumentParser(prog="guided-spectra", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues per k with zone tags")
    sp.add_argument("--k", help="k range, e.g. 1..20")
    sp.add_argument("--lam-max", dest="lam_max", type=float, help="also list values above the barrier up to this")

    for name, helptext in (("mode", "one eigenfunction profile"), ("mass", "strip mass ratio of one mode")):
        mp = sub.add_parser(name, parents=[common], help=helptext)
        mp.add_argument("--k", type=int)
        mp.add_argument("--ell", type=int, help="1-based index from the bottom of the spectrum")
        if name == "mode":
            mp.add_argument("--samples", type=int)
        else:
            for flag in ("a", "b", "alpha", "beta"):
                mp.add_argument(f"--{flag}", type=float)

    vp = sub.add_parser("verify", parents=[common], help="check one asymptotic law over a k sweep")
    vp.add_argument("law", help=", ".join(DEFAULTS))
    vp.add_argument("--k", help="k range, e.g. 10..60")
    vp.add_argument("--ell", type=int)
    vp.add_argument("--region", help="alpha,beta,a,b")
    vp.add_argument("--eps", type=float)
    vp.add_argument("--reference", choices=("nominal", "derived"), help="limit used by LEM26")
    vp.add_argument("--case", type=int, choices=(1, 2, 3), help="regime for THM34")
    vp.add_argument("--shifts", help="comma-separated lower ends of translated strips (THM14, CORB6)")
    vp.add_argument("--n-modes", dest="n_modes", type=int)
    vp.add_argument("--samples", type=int, help="random samples for LEMB1")
    vp.add_argument("--alpha-minus", dest="alpha_minus", type=float)
    vp.add_argument("--alpha-plus", dest="alpha_plus", type=float)

    cp = sub.add_parser("classify", parents=[common], help="case of the barrier among the branch brackets")
    cp.add_argument("--k")
    cp.add_argument("--random", type=int, help="classify this many random media with rational sqrt(c1-1)")

    op = sub.add_parser("oracle", parents=[common], help="finite-difference eigenvalues")
    op.add_argument("--profile", help="builtin profile name, 'default', or a JSON medium file")
    op.add_argument("--k", type=int)
    op.add_argument("--n", type=int)
    op.add_argument("--range", help="lam_lo,lam_hi")
    op.add_argument("--count", type=int)
    op.add_argument("--vectors", action="store_true", default=None, help="also write gzipped eigenvectors")

    fp = sub.add_parser("figure", parents=[common], help="figure data and rendering")
    fp.add_argument("kind", choices=FIGURE_KINDS)
    fp.add_argument("--k")
    fp.add_argument("--lam-max", dest="lam_max", type=float)
    return ap


def config_from_args(args) -> RunConfig:
    doc = load_config(args.config)
    params = dict(doc.get("params", {}))
    for key, val in vars(args).items():
        if key in ("command", "config", "out", "threads", "seed"):
            continue
        if val is not None:
            params[key] = val
    pick = lambda name, default: getattr(args, name) if getattr(args, name) is not None else doc.get(name, default)
    return RunConfig(args.command, doc.get("medium"), params, int(pick("seed", 0)), int(pick("threads", 1)),
                     str(pick("out", "out")))


def _setup_logging():
    level = os.environ.get("GUIDED_SPECTRA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except (InputError, SpectraError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())

"""Run configurations, artifact writing and the command implementations behind the CLI."""

from __future__ import annotations

import copy
import itertools
import json
import math
import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .errors import BracketInvalid, ConfigError
from .mild_solver import (SolutionHistory, SystemConfig, TimeMesh,
                          fit_decay_rate, picard_refine, step_mild_system,
                          write_outputs)
from .regime_analyzer import ParamPoint, blowup_proof_exponents, classify, derive_exponents
from .spectral_grid import PROFILES, BoxGeometry, GridFunction

# -- strict JSON ------------------------------------------------------------------

SIMULATE_DEFAULTS = {
    "gamma1": None, "gamma2": None, "p": None, "q": None,
    "f_form": "signed_power", "g_form": "signed_power",
    "sign_f": 1, "sign_g": 1,
    "geometry": None,
    "data": None,
    "data_scale": 1.0,
    "mesh": None,
    "norms": {"s1": "auto", "s2": "auto"},
    "blowup_cap": 1e6,
    "picard_sweeps": 0,
    "snapshots": [],
    "seed": 0,
    "out_dir": None,
    "sequential_mode": True,
}
GEOMETRY_KEYS = {"dim", "L", "n"}
MESH_KEYS = {"T", "n", "grading"}
NORM_KEYS = {"s1", "s2"}
DATA_KEYS = {"u0", "u1", "v0", "v1"}
PROFILE_KEYS = {
    "gaussian": {"amplitude", "width", "center"},
    "bump": {"amplitude", "radius"},
    "single_mode": {"k", "amplitude", "axis"},
    "zero": set(),
}


def load_json(path):
    """Parse a JSON file, turning syntax errors into ConfigError with a line number."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(repr, extra))}")


def _require(obj, keys, where):
    missing = [k for k in keys if obj.get(k) is None]
    if missing:
        raise ConfigError(f"{where}: missing key(s) {', '.join(map(repr, missing))}")


def resolve_simulate(raw):
    """Validate a simulate config and fill in defaults; returns a new dict."""
    _reject_unknown(raw, SIMULATE_DEFAULTS, "config")
    cfg = copy.deepcopy(SIMULATE_DEFAULTS)
    cfg.update(copy.deepcopy(raw))
    _require(cfg, ("gamma1", "gamma2", "p", "q", "geometry", "data", "mesh"), "config")
    _reject_unknown(cfg["geometry"], GEOMETRY_KEYS, "config.geometry")
    _require(cfg["geometry"], GEOMETRY_KEYS, "config.geometry")
    _reject_unknown(cfg["mesh"], MESH_KEYS, "config.mesh")
    _require(cfg["mesh"], ("T", "n"), "config.mesh")
    if cfg["mesh"].get("grading") is None:
        cfg["mesh"]["grading"] = 2.0 / min(cfg["gamma1"], cfg["gamma2"])
    norms = {"s1": "auto", "s2": "auto"}
    _reject_unknown(cfg["norms"], NORM_KEYS, "config.norms")
    norms.update(cfg["norms"])
    cfg["norms"] = norms
    _reject_unknown(cfg["data"], DATA_KEYS, "config.data")
    for name in sorted(DATA_KEYS):
        spec = cfg["data"].get(name, {"profile": "zero"})
        where = f"config.data.{name}"
        if not isinstance(spec, dict) or "profile" not in spec:
            raise ConfigError(f"{where}: expected an object with a 'profile' key")
        prof = spec["profile"]
        if prof not in PROFILE_KEYS:
            raise ConfigError(f"{where}.profile: unknown profile {prof!r}, expected one of {sorted(PROFILE_KEYS)}")
        _reject_unknown(spec, PROFILE_KEYS[prof] | {"profile"}, where)
        cfg["data"][name] = spec
    if cfg["norms"]["s1"] == "auto" or cfg["norms"]["s2"] == "auto":
        s1, s2 = auto_norms(cfg)
        if cfg["norms"]["s1"] == "auto":
            cfg["norms"]["s1"] = s1
        if cfg["norms"]["s2"] == "auto":
            cfg["norms"]["s2"] = s2
    return cfg


def auto_norms(cfg):
    """Integrability indices from the derived exponents when they exist, else 2."""
    try:
        pt = ParamPoint(cfg["gamma1"], cfg["gamma2"], cfg["p"], cfg["q"], cfg["geometry"]["dim"])
        rep = classify(pt)
        if rep.derived is not None:
            s1, s2 = rep.derived.s1, rep.derived.s2
            return (s2, s1) if rep.swapped else (s1, s2)
    except Exception:  # noqa: BLE001 - any failure just means no derived indices
        pass
    return 2.0, 2.0


def build_profile(geometry, spec):
    spec = dict(spec)
    prof = spec.pop("profile")
    if prof == "zero":
        return GridFunction(geometry, np.zeros(geometry.shape))
    return PROFILES[prof](geometry, **spec)


def build_system(cfg) -> tuple[SystemConfig, TimeMesh]:
    g = cfg["geometry"]
    try:
        geometry = BoxGeometry(int(g["dim"]), float(g["L"]), int(g["n"]))
        data = {k: build_profile(geometry, cfg["data"][k]) for k in sorted(DATA_KEYS)}
        system = SystemConfig(
            cfg["gamma1"], cfg["gamma2"], cfg["p"], cfg["q"], geometry,
            data["u0"], data["u1"], data["v0"], data["v1"],
            f_form=cfg["f_form"], g_form=cfg["g_form"],
            sign_f=cfg["sign_f"], sign_g=cfg["sign_g"],
            data_scale=cfg["data_scale"], s1=cfg["norms"]["s1"], s2=cfg["norms"]["s2"],
            blowup_cap=cfg["blowup_cap"])
        m = cfg["mesh"]
        mesh = TimeMesh(float(m["T"]), int(m["n"]), float(m["grading"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from None
    return system, mesh


# -- artifacts ------------------------------------------------------------------------

def manifest(command, config):
    return {
        "command": command,
        "config": config,
        "version": __version__,
        "backend": kernels.BACKEND,
    }


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    raise TypeError(f"cannot serialise {type(o).__name__}")


def finite_json(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: finite_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [finite_json(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


@contextmanager
def sequential(enabled):
    """Force single-threaded kernels and FFTs while active."""
    if not enabled:
        yield
        return
    old = os.environ.get("FRACWAVE_THREADS")
    os.environ["FRACWAVE_THREADS"] = "1"
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("FRACWAVE_THREADS", None)
        else:
            os.environ["FRACWAVE_THREADS"] = old


def _svg_settings():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fracwave"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def plot_history(history: SolutionHistory, path):
    plt = _svg_settings()
    fig, ax = plt.subplots(figsize=(6, 4))
    t = history.times
    sel = t > 0
    for name in ("norm_u_s1", "norm_v_s2", "norm_u_inf", "norm_v_inf"):
        ax.loglog(1 + t[sel], history.column(name)[sel], label=name)
    ax.set_xlabel("1 + t")
    ax.set_ylabel("norm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_phase(rows, path):
    plt = _svg_settings()
    colors = {"GlobalSmallData": "tab:blue", "BlowUp": "tab:red",
              "Indeterminate": "tab:gray", "BothConditionsFail": "tab:olive"}
    fig, ax = plt.subplots(figsize=(6, 4))
    for cls, c in colors.items():
        pts = [(r["p"], r["q"]) for r in rows if r["classification"] == cls]
        if pts:
            x, y = zip(*pts)
            ax.scatter(x, y, s=12, c=c, label=cls)
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# -- commands ---------------------------------------------------------------------------

def run_simulation(cfg, out_dir=None, plot=True):
    """Run a resolved simulate config; writes artifacts when out_dir is given."""
    system, mesh = build_system(cfg)
    with sequential(cfg["sequential_mode"]):
        if cfg["picard_sweeps"]:
            hist = picard_refine(system, mesh, cfg["picard_sweeps"], snapshots=cfg["snapshots"])
        else:
            hist = step_mild_system(system, mesh, snapshots=cfg["snapshots"])
    extra = {"slopes": decay_slopes(hist)}
    if out_dir is not None:
        out = Path(out_dir)
        summary = write_outputs(hist, out, extra)
        write_json(out / "manifest.json", manifest("simulate", cfg))
        for i, (u, v) in sorted(hist.snapshots.items()):
            from .spectral_grid import save_grid

            save_grid(GridFunction(system.geometry, u), out / f"u_{i:06d}.grid")
            save_grid(GridFunction(system.geometry, v), out / f"v_{i:06d}.grid")
        if plot and hist.times.size > 1:
            plot_history(hist, out / "norms.svg")
        (out / "report.txt").write_text(simulation_report(cfg, hist))
    return hist


def decay_slopes(hist):
    """Slopes over the last decade of the run, when there is one."""
    t = hist.times
    if hist.termination.kind != "completed" or t[-1] <= 0:
        return {}
    window = (t[-1] / 10, t[-1])
    out = {}
    for name in ("norm_u_s1", "norm_v_s2", "norm_u_inf", "norm_v_inf"):
        try:
            slope, r2 = fit_decay_rate(hist, window, name)
        except Exception:  # noqa: BLE001 - too few nodes or zero norms
            continue
        out[name] = {"window": list(window), "slope": slope, "r2": r2}
    return out


def simulation_report(cfg, hist):
    term = hist.termination
    lines = [
        f"simulate: gamma1={cfg['gamma1']} gamma2={cfg['gamma2']} p={cfg['p']} q={cfg['q']} "
        f"N={cfg['geometry']['dim']} data_scale={cfg['data_scale']}",
        f"mesh: T={cfg['mesh']['T']} n={cfg['mesh']['n']} grading={cfg['mesh']['grading']:.6g}",
        f"termination: {term.kind}" + (f" at t_est={term.t_est:.6g}" if term.t_est is not None else "")
        + (f" ({term.reason})" if term.reason else ""),
        f"recorded nodes: {hist.times.size}",
    ]
    return "\n".join(lines) + "\n"


def outcome(cfg, scale):
    c = copy.deepcopy(cfg)
    c["data_scale"] = scale
    return run_simulation(c, out_dir=None, plot=False)


def find_threshold(cfg, lo, hi, rtol=0.05, max_runs=30):
    """Bisect data_scale between a completing and a blowing-up run.

    Returns a dict describing the empirical boundary.  This is a property of
    the discretised run (mesh, box, horizon), not a proven smallness constant.
    """
    if not (0 <= lo < hi):
        raise BracketInvalid(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
    h_lo, h_hi = outcome(cfg, lo), outcome(cfg, hi)
    k_lo, k_hi = h_lo.termination.kind, h_hi.termination.kind
    if k_lo != "completed" or k_hi != "blew_up":
        note = ""
        if k_lo == k_hi == "blew_up":
            pt = ParamPoint(cfg["gamma1"], cfg["gamma2"], cfg["p"], cfg["q"], cfg["geometry"]["dim"])
            if classify(pt).classification == "BlowUp":
                note = "; the exponents lie in the blow-up region, so no global endpoint is expected"
        raise BracketInvalid(f"endpoints give {k_lo} at {lo} and {k_hi} at {hi}; "
                             f"need completed below and blew_up above{note}")
    runs = 2
    while hi - lo > rtol * hi and runs < max_runs:
        mid = 0.5 * (lo + hi)
        h = outcome(cfg, mid)
        runs += 1
        if h.termination.kind == "completed":
            lo, h_lo = mid, h
        else:
            hi, h_hi = mid, h
    return {
        "threshold": 0.5 * (lo + hi),
        "lo": lo,
        "hi": hi,
        "runs": runs,
        "label": "empirical boundary of the discretised run, not a proven smallness constant",
        "lo_summary": h_lo.summary(),
        "hi_summary": h_hi.summary(),
    }


def derive_report(point, delta="auto", eta=None):
    from .regime_analyzer import bootstrap_indices

    ex = derive_exponents(point, delta)
    ex.bootstrap = bootstrap_indices(point, ex, eta)
    return ex.to_dict()


SWEEP_KEYS = ("gamma1", "gamma2", "p", "q", "N")


def sweep_rows(spec):
    """Classification table over the Cartesian product of the grid spec."""
    _reject_unknown(spec, set(SWEEP_KEYS), "grid")
    _require(spec, SWEEP_KEYS, "grid")
    axes = []
    for k in SWEEP_KEYS:
        v = spec[k]
        if isinstance(v, dict):
            _reject_unknown(v, {"start", "stop", "num"}, f"grid.{k}")
            _require(v, ("start", "stop", "num"), f"grid.{k}")
            v = np.linspace(v["start"], v["stop"], int(v["num"])).tolist()
        elif not isinstance(v, list):
            v = [v]
        axes.append(v)
    rows = []
    for combo in itertools.product(*axes):
        g1, g2, p, q, N = combo
        try:
            pt = ParamPoint(float(g1), float(g2), float(p), float(q), int(N))
        except Exception as exc:  # noqa: BLE001
            rows.append({"gamma1": g1, "gamma2": g2, "p": p, "q": q, "N": N,
                         "classification": "Invalid", "note": str(exc)})
            continue
        rep = classify(pt)
        row = {"gamma1": pt.gamma1, "gamma2": pt.gamma2, "p": pt.p, "q": pt.q, "N": pt.N,
               "classification": rep.classification}
        if pt.p > 1 and pt.q > 1:
            bx = blowup_proof_exponents(pt)
            row.update({"delta1_lam1": bx["gamma1/2"][0], "delta2_lam1": bx["gamma1/2"][1],
                        "delta1_lam2": bx["gamma2/2"][0], "delta2_lam2": bx["gamma2/2"][1]})
        rows.append(row)
    return rows


SWEEP_COLUMNS = ("gamma1", "gamma2", "p", "q", "N", "classification",
                 "delta1_lam1", "delta2_lam1", "delta1_lam2", "delta2_lam2")


def rows_to_csv(rows):
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def validate_kernels(alpha, N, geometry=None, seed=0):
    """Smoothing fits for every family on a fixed index list plus kernel diagnostics."""
    from .estimate_validator import (admissible, boundedness_constants,
                                     default_geometry, kernel_mass,
                                     random_probe, validate_pointwise_kernel,
                                     validate_smoothing)

    geometry = geometry or default_geometry(N)
    pairs = [(2.0, 2.0), (2.0, math.inf), (1.25, 8.0), (1.1, 20.0), (1.5, 6.0), (1.25, 10.0)]
    fits, skipped = [], []
    for fam in ("E1", "E2", "Ealpha"):
        for p1, p2 in pairs:
            ok, reason = admissible(fam, alpha, p1, p2, N)
            if not ok:
                skipped.append({"family": fam, "p1": p1, "p2": _inf(p2), "reason": reason})
                continue
            for name, probe in (("gaussian", None), ("random", random_probe(seed))):
                f = validate_smoothing(alpha, p1, p2, fam, probe=probe, geometry=geometry)
                d = f.to_dict()
                d["probe"] = name
                fits.append(d)
    kg = geometry
    t_kernel = np.geomspace((8 * kg.dx) ** (2 / alpha), (kg.L / 16) ** (2 / alpha), 8)
    kernel = validate_pointwise_kernel(alpha, kg, t_kernel).to_dict()
    bounded = {}
    for fam in ("E1", "E2", "Ealpha"):
        for p in (1.0, 2.0, math.inf):
            _, c = boundedness_constants(alpha, fam, p, geometry if N == 1 else None)
            bounded[f"{fam}/{_inf(p)}"] = {"constants": c.tolist(), "spread": float(c.max() / c.min()),
                                           "passes": bool(c.max() / c.min() <= 2.0)}
    masses = kernel_mass(alpha, kg, t_kernel)
    return {
        "alpha": alpha, "N": N,
        "geometry": {"dim": geometry.dim, "L": geometry.L, "n": geometry.n},
        "fits": fits, "skipped": skipped,
        "pointwise": kernel,
        "boundedness": bounded,
        "kernel_mass": {"times": t_kernel.tolist(), "mass": masses.tolist()},
        "passes": all(f["passes"] for f in fits) and all(b["passes"] for b in bounded.values()),
    }


def _inf(p):
    return "inf" if p == math.inf else p

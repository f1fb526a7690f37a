"""Command-line entry point.

Exit status: 0 on success, 2 when a run completes but a validation check
fails, 1 on any error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import runner
from .errors import FracwaveError

EXIT_FINDING = 2


class Finding(Exception):
    """A run finished but its checks did not pass."""


def _emit(obj, out=None):
    text = json.dumps(runner.finite_json(obj), indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _point(gamma1, gamma2, p, q, N):
    from .regime_analyzer import ParamPoint

    return ParamPoint(gamma1, gamma2, p, q, N)


def _delta(value):
    return "auto" if value in (None, "auto") else float(value)


def _prepare(out_dir):
    if out_dir is None:
        return None
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


point_options = [
    click.option("--gamma1", type=float, required=True),
    click.option("--gamma2", type=float, required=True),
    click.option("--p", "p", type=float, required=True),
    click.option("--q", "q", type=float, required=True),
    click.option("--N", "N", type=int, required=True),
]


def with_point(f):
    for opt in reversed(point_options):
        f = opt(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Coupled time-fractional wave systems: regimes, simulations and estimate checks."""


@cli.command()
@with_point
@click.option("--delta", default="auto", show_default=True, help="'auto' or a value inside the admissible window.")
@click.option("--json", "as_json", is_flag=True, help="Print the full report as JSON.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
def classify(gamma1, gamma2, p, q, N, delta, as_json, out_dir):
    """Classify a parameter point."""
    from .regime_analyzer import classify as run

    rep = run(_point(gamma1, gamma2, p, q, N), _delta(delta))
    d = rep.to_dict()
    out = _prepare(out_dir)
    if out:
        runner.write_json(out / "manifest.json", runner.manifest("classify", {
            "gamma1": gamma1, "gamma2": gamma2, "p": p, "q": q, "N": N, "delta": delta}))
        _emit(d, out / "report.json")
        (out / "report.txt").write_text(f"{rep.classification}\n")
    if as_json:
        _emit(d)
    else:
        click.echo(rep.classification)
        for ineq in rep.ledger:
            mark = "ok " if ineq.satisfied else "no "
            click.echo(f"  {mark}{ineq.name}: {ineq.lhs:.12g} {ineq.relation} {ineq.rhs:.12g}")
    if rep.flags.get("inconsistent"):
        raise Finding("both criteria hold at this point; review by hand")


@cli.command()
@with_point
@click.option("--delta", default="auto", show_default=True)
@click.option("--eta", type=float, default=None, help="Bootstrap increment, default (1 - delta)/N.")
def derive(gamma1, gamma2, p, q, N, delta, eta):
    """Derived exponents and the bootstrap index sequence."""
    d = runner.derive_report(_point(gamma1, gamma2, p, q, N), _delta(delta), eta)
    _emit(d)
    if any(abs(v) > 1e-12 for v in d["identities"].values()) or not all(
            i["satisfied"] for i in d["inequalities"]):
        raise Finding("an exponent identity or window inequality failed")


@cli.command()
@click.option("--grid", "grid", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--svg", type=click.Path(dir_okay=False), default=None)
def sweep(grid, out, svg):
    """Phase table over a parameter grid."""
    rows = runner.sweep_rows(runner.load_json(grid))
    Path(out).write_text(runner.rows_to_csv(rows))
    if svg:
        runner.plot_phase(rows, svg)
    bad = [r for r in rows if r["classification"] == "BlowUp"
           and not min(r["delta1_lam1"], r["delta2_lam1"], r["delta1_lam2"], r["delta2_lam2"]) < 0]
    click.echo(f"{len(rows)} points written to {out}")
    if bad:
        raise Finding(f"{len(bad)} blow-up points with non-negative proof exponents")


@cli.command()
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Overrides out_dir in the config; default is the current directory.")
def simulate(config, out_dir):
    """Run the coupled system from a JSON config."""
    cfg = runner.resolve_simulate(runner.load_json(config))
    out = out_dir or cfg.get("out_dir") or "."
    cfg["out_dir"] = str(out)
    hist = runner.run_simulation(cfg, out)
    t = hist.termination
    click.echo(f"{t.kind}" + (f" t_est={t.t_est!r}" if t.t_est is not None else ""))


@cli.command("find-threshold")
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--lo", type=float, required=True)
@click.option("--hi", type=float, required=True)
@click.option("--rtol", type=float, default=0.05, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
def find_threshold(config, lo, hi, rtol, out_dir):
    """Bisect data_scale between a completing and a blowing-up run."""
    cfg = runner.resolve_simulate(runner.load_json(config))
    res = runner.find_threshold(cfg, lo, hi, rtol)
    out = _prepare(out_dir)
    if out:
        runner.write_json(out / "manifest.json", runner.manifest("find-threshold", {
            "config": cfg, "lo": lo, "hi": hi, "rtol": rtol}))
        _emit(res, out / "threshold.json")
        (out / "report.txt").write_text(f"empirical threshold {res['threshold']!r} in [{res['lo']!r}, {res['hi']!r}]\n")
    _emit(res)


@cli.command("validate-kernels")
@click.option("--alpha", type=float, required=True)
@click.option("--N", "N", type=click.IntRange(1, 3), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def validate_kernels(alpha, N, seed, out):
    """Smoothing-rate fits and kernel bounds for the three multiplier families."""
    rep = runner.validate_kernels(alpha, N, seed=seed)
    _emit(rep, out)
    if out:
        click.echo(f"{len(rep['fits'])} fits, passes={rep['passes']}")
    if not rep["passes"]:
        raise Finding("a smoothing fit or boundedness check is outside tolerance")


@cli.command("ml-eval")
@click.option("--alpha", type=float, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--z", type=float, required=True)
@click.option("--digits", type=click.IntRange(1, 17), default=None)
def ml_eval(alpha, beta, z, digits):
    """Evaluate the Mittag-Leffler function E_{alpha,beta}(z)."""
    from .mittag_leffler import MLParams, ml_eval as run

    v = run(MLParams(alpha, beta, z))
    click.echo(repr(v) if digits is None else f"{v:.{digits}g}")


@cli.command("fit-decay")
@click.option("--history", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--window", type=(float, float), required=True)
@click.option("--which", type=click.Choice(["norm_u_s1", "norm_v_s2", "norm_u_inf", "norm_v_inf",
                                            "norm_u_1", "norm_v_1"]), default="norm_u_s1", show_default=True)
@click.option("--predicted", type=float, default=None, help="Predicted decay exponent sigma > 0.")
@click.option("--slack", type=float, default=0.25, show_default=True)
def fit_decay(history, window, which, predicted, slack):
    """Fit a power-law decay rate to a recorded norm history."""
    from .mild_solver import SolutionHistory, fit_decay_rate

    hist = SolutionHistory.from_csv(Path(history).read_text())
    slope, r2 = fit_decay_rate(hist, window, which)
    res = {"which": which, "window": list(window), "slope": slope, "r2": r2}
    if predicted is not None:
        res["predicted"] = -predicted
        res["passes"] = slope <= -(1 - slack) * predicted
    _emit(res)
    if predicted is not None and not res["passes"]:
        raise Finding("fitted decay is slower than the predicted rate allows")


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="fracwave", standalone_mode=False)
    except Finding as exc:
        click.echo(f"finding: {exc}", err=True)
        sys.exit(EXIT_FINDING)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except FracwaveError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    sys.exit(0)


if __name__ == "__main__":
    main()

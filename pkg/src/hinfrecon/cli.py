"""Configuration-driven command line frontend.

Subcommands: `design` (synthesize the reconstruction filter), `norm`
(certify a filter and tabulate the fast-grid convergence), `compare`
(benchmark pipelines over a signal corpus), `baseline` (Gram filter,
realizability classification and inverse of a kernel pair).

Exit codes: 0 success, 1 input error, 2 non-convergence,
3 mathematical infeasibility (for example a non-invertible Gram filter).
All floating-point output carries 17 significant digits so files round-trip
exactly; given the same config and seed, re-runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .design import design_fir, evaluate_J
from .lifting import DesignProblem, build_generalized_plant
from .pipelines import PipelineSpec, compare
from .sampling import (
    GramNotInvertibleError,
    Kernel,
    analyze_roots,
    gram_filter,
    invert_gram,
)
from .statespace import FirFilter, SignalGrid
from .tfparse import ParseError, parse_tf, realize

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CONVERGENCE = 2
EXIT_INFEASIBLE = 3

_NORM_TABLE_FACTORS = (2, 4, 8, 16)


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        self.code = code
        super().__init__(message)


def _fmt(x):
    """17 significant digits: enough for exact float round-trips."""
    return format(float(x), ".17g")


def _json_dumps(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{k}": {_json_dumps(v, indent + 1)}'
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ", ".join(_json_dumps(v, indent) for v in obj)
        return "[" + items + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"config parse error in {path}: {exc}")


def _get(cfg, section, key, default=None, required=False):
    sec = cfg.get(section)
    if sec is None:
        if required:
            raise CliError(f"missing config section [{section}]")
        return default
    if key not in sec:
        if required:
            raise CliError(f"missing config key {section}.{key}")
        return default
    return sec[key]


def _realize_named(cfg, key):
    text = _get(cfg, "problem", key, required=True)
    try:
        return realize(parse_tf(str(text)))
    except ParseError as exc:
        raise CliError(f"problem.{key}: {exc}")
    except ValueError as exc:
        raise CliError(f"problem.{key}: {exc}")


def _build_problem(cfg):
    F = _realize_named(cfg, "F")
    H1 = _realize_named(cfg, "H1")
    H2 = _realize_named(cfg, "H2")
    h = _get(cfg, "problem", "h", required=True)
    N = _get(cfg, "problem", "N", required=True)
    delay = _get(cfg, "problem", "delay_steps", default=0)
    try:
        return DesignProblem(F=F, H1=H1, H2=H2, h=float(h), N=int(N),
                             delay_steps=int(delay))
    except ValueError as exc:
        raise CliError(f"problem: {exc}")


def _out_dir(cfg, args):
    path = args.out_dir or _get(cfg, "output", "dir", default="out")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_kernel(name, scale, key):
    name = str(name).strip()
    if name == "sinc":
        return Kernel.sinc(scale)
    if name == "impulse":
        return Kernel.impulse(scale)
    if name.startswith("bspline:"):
        try:
            order = int(name.split(":", 1)[1])
            return Kernel.bspline(order, scale)
        except ValueError as exc:
            raise CliError(f"{key}: {exc}")
    raise CliError(
        f"{key}: unknown kernel {name!r} (expected sinc | bspline:q | impulse)"
    )


def _read_signal_csv(path):
    try:
        rows = Path(path).read_text().strip().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read signal file {path}: {exc}")
    if not rows or rows[0].strip().lower() != "t,value":
        raise CliError(f"{path}: expected header 't,value'")
    t = []
    v = []
    for i, line in enumerate(rows[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise CliError(f"{path}:{i}: expected two columns")
        try:
            t.append(float(parts[0]))
            v.append(float(parts[1]))
        except ValueError:
            raise CliError(f"{path}:{i}: non-numeric entry")
    if len(t) < 2:
        raise CliError(f"{path}: need at least two samples")
    t = np.array(t)
    steps = np.diff(t)
    step = float(np.mean(steps))
    if step <= 0 or np.max(np.abs(steps - step)) > 1e-9 * max(abs(step), 1.0):
        raise CliError(f"{path}: time grid is not uniform to 1e-9 relative")
    return SignalGrid(step=step, values=np.array(v), start_time=float(t[0]))


def _write_signal_csv(path, grid):
    lines = ["t,value"]
    times = grid.times()
    vals = grid.scalar()
    for ti, vi in zip(times, vals):
        lines.append(f"{_fmt(ti)},{_fmt(vi)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _load_filter(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read filter file {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON at position {exc.pos}: "
                       f"{exc.msg}")
    try:
        return FirFilter(np.array(data["taps"], dtype=float),
                         float(data["period"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: invalid filter file: {exc!r}")


def cmd_design(cfg, args):
    problem = _build_problem(cfg)
    out = _out_dir(cfg, args)
    num_taps = int(_get(cfg, "synthesis", "num_taps",
                        default=4 * problem.N))
    tol = float(_get(cfg, "synthesis", "tol", default=1e-4))

    plant = build_generalized_plant(problem)
    try:
        report = design_fir(plant, num_taps, tol=tol)
    except ValueError as exc:
        raise CliError(f"synthesis: {exc}")

    payload = {
        "period": float(report.filter.period),
        "taps": [float(a) for a in report.filter.taps],
        "achieved_norm": report.achieved_norm,
        "lower_bound": report.lower_bound,
        "converged": report.converged,
        "tool_version": f"hinfrecon {__version__}",
    }
    (out / "filter.json").write_text(_json_dumps(payload) + "\n")

    lines = ["iteration,grid_value,certified_value"]
    for it, lower, cert in report.history:
        lines.append(f"{it},{_fmt(lower)},{_fmt(cert)}")
    (out / "design_log.csv").write_text("\n".join(lines) + "\n")

    print(f"achieved_norm = {_fmt(report.achieved_norm)}")
    print(f"lower_bound   = {_fmt(report.lower_bound)}")
    print(f"converged     = {report.converged} "
          f"({report.iterations} iterations)")
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def cmd_norm(cfg, args):
    problem = _build_problem(cfg)
    out = _out_dir(cfg, args)
    filter_path = args.filter or (out / "filter.json")
    fir = _load_filter(filter_path)
    if not np.isclose(fir.period, problem.h, rtol=1e-9, atol=0.0):
        raise CliError(
            f"filter period {fir.period!r} does not match problem.h "
            f"{problem.h!r}"
        )

    res = evaluate_J(problem, fir)
    print(f"J = {_fmt(res.value)} (certified, peak theta "
          f"{_fmt(res.peak_theta)})")

    lines = ["N,norm"]
    print("fast-grid convergence:")
    for N in _NORM_TABLE_FACTORS:
        if (problem.delay_steps * N) % problem.N != 0:
            raise CliError(
                f"delay_steps {problem.delay_steps} does not scale to the "
                f"N={N} grid (needs delay_steps*N divisible by {problem.N})"
            )
        scaled = DesignProblem(
            F=problem.F, H1=problem.H1, H2=problem.H2, h=problem.h, N=N,
            delay_steps=(problem.delay_steps * N) // problem.N,
        )
        value = evaluate_J(scaled, fir).value
        lines.append(f"{N},{_fmt(value)}")
        print(f"  N={N:<3d} norm={_fmt(value)}")
    (out / "norms.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_compare(cfg, args):
    problem = _build_problem(cfg)
    out = _out_dir(cfg, args)
    sim = cfg.get("simulate", {})
    M = int(sim.get("sim_rate_multiplier", problem.N))
    corpus_paths = sim.get("corpus")
    if not corpus_paths:
        raise CliError("missing config key simulate.corpus")
    corpus = [_read_signal_csv(p) for p in corpus_paths]

    filter_path = args.filter or sim.get("filter") or (out / "filter.json")
    fir = _load_filter(filter_path)

    truncation = int(sim.get("sinc_truncation", 128))
    phi1 = _parse_kernel(sim.get("phi1", "impulse"), problem.h,
                         "simulate.phi1")
    phi2 = _parse_kernel(sim.get("phi2", "bspline:3"), problem.h,
                         "simulate.phi2")
    tail = int(sim.get("tail_length", 64))

    specs = [
        PipelineSpec.designed(problem, fir, sim_rate_multiplier=M),
        PipelineSpec.sinc(problem, truncation, sim_rate_multiplier=M),
        PipelineSpec.spline(problem, phi1, phi2, tail_length=tail,
                            sim_rate_multiplier=M),
    ]
    try:
        rows = compare(problem, specs, corpus)
    except GramNotInvertibleError as exc:
        raise CliError(f"spline baseline: {exc}", EXIT_INFEASIBLE)
    except ValueError as exc:
        raise CliError(f"compare: {exc}")

    lines = ["pipeline,signal,l2_ratio,status"]
    for row in rows:
        for path, ratio, undef in zip(corpus_paths, row.ratios,
                                      row.undefined):
            if undef:
                lines.append(f"{row.name},{path},,undefined")
            else:
                lines.append(f"{row.name},{path},{_fmt(ratio)},ok")
    lines.append("pipeline,summary_worst,summary_mean,status")
    for row in rows:
        if row.worst_ratio is None:
            lines.append(f"{row.name},,,undefined")
        else:
            lines.append(
                f"{row.name},{_fmt(row.worst_ratio)},"
                f"{_fmt(row.mean_ratio)},ok"
            )
        print(f"{row.name}: worst="
              f"{'n/a' if row.worst_ratio is None else _fmt(row.worst_ratio)}"
              f" mean="
              f"{'n/a' if row.mean_ratio is None else _fmt(row.mean_ratio)}")
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_baseline(cfg, args):
    problem = _build_problem(cfg)
    out = _out_dir(cfg, args)
    sim = cfg.get("simulate", {})
    phi1 = _parse_kernel(sim.get("phi1", "impulse"), problem.h,
                         "simulate.phi1")
    phi2 = _parse_kernel(sim.get("phi2", "bspline:3"), problem.h,
                         "simulate.phi2")
    tail = int(sim.get("tail_length", 64))

    try:
        a12 = gram_filter(phi1, phi2)
    except ValueError as exc:
        raise CliError(f"baseline kernels: {exc}")

    lines = ["n,c"]
    for n in a12.indices():
        lines.append(f"{n},{_fmt(a12[n])}")
    (out / "gram.csv").write_text("\n".join(lines) + "\n")

    report = analyze_roots(a12)
    payload = {
        "phi1": phi1.label(),
        "phi2": phi2.label(),
        "roots": [[float(r.real), float(r.imag)] for r in report.roots],
        "inside_count": report.inside_count,
        "outside_count": report.outside_count,
        "on_circle_count": report.on_circle_count,
        "invertible": report.invertible,
        "causal_stable": report.causal_stable,
        "noncausal_stable": report.noncausal_stable,
    }
    (out / "realizability.json").write_text(_json_dumps(payload) + "\n")
    print(f"gram support: n in [{a12.n_min}, {a12.n_max}]")
    print(f"roots: {report.inside_count} inside, {report.outside_count} "
          f"outside, {report.on_circle_count} on the unit circle")
    print(f"causal_stable = {report.causal_stable}")

    try:
        inverse, _ = invert_gram(a12, tail_length=tail)
    except GramNotInvertibleError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE)

    lines = ["n,k"]
    for n in inverse.indices():
        lines.append(f"{n},{_fmt(inverse[n])}")
    (out / "inverse.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hinfrecon",
        description="Worst-case optimal reconstruction filter design",
    )
    parser.add_argument("--version", action="version",
                        version=f"hinfrecon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("design", "synthesize the optimal FIR reconstruction filter"),
        ("norm", "certify a filter's worst-case gain and its convergence"),
        ("compare", "benchmark pipelines over a signal corpus"),
        ("baseline", "Gram filter analysis of a kernel pair"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML job config")
        p.add_argument("--out-dir", default=None,
                       help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, default=None,
                       help="override [synthesis] seed")
        if name in ("norm", "compare"):
            p.add_argument("--filter", default=None,
                           help="filter.json path (default: out dir)")
    return parser


_COMMANDS = {
    "design": cmd_design,
    "norm": cmd_norm,
    "compare": cmd_compare,
    "baseline": cmd_baseline,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

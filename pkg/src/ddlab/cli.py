"""Command-line front end: ``ddlab <task> [-c config.ini] [--set section.key=value]``.

Exit status is 0 on success, 1 for invalid configuration or arguments and
2 for numerical failure (Picard divergence, non-finite states).
"""
from __future__ import annotations

import argparse
import csv
import filecmp
import math
import os
import sys
import tempfile
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analysis, data, expansion, kernels, nonlinear, semigroups, verify
from .config import TASKS, ConfigError, RunConfig
from .grid import Field, SpectralGrid, lp_norm, make_grid
from .report import rows_to_columns, write_csv

__all__ = ["main", "run", "build_data"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class TaskError(ValueError):
    """Task-level validation failure."""


def _grid(cfg: RunConfig) -> SpectralGrid:
    return make_grid(cfg.get("grid", "n"), cfg.get("grid", "L"))


def build_data(cfg: RunConfig, grid: SpectralGrid, nonlinear_run: bool = False) -> Field:
    """Initial data from the ``[data]`` section.

    ``smallness`` rescales the data to that ``W^{2,1}`` size; it is applied
    for nonlinear runs (where 0 means the default 0.1) and for linear runs
    only when positive.
    """
    d = cfg["data"]
    fam = d["family"]
    if fam == "gaussian":
        f = data.gaussian(grid, 0.0, d["width"], d["mass"])
    elif fam == "shifted-gaussian":
        f = data.gaussian(grid, d["center"], d["width"], d["mass"])
    elif fam == "skew":
        f = data.skew_gaussian(grid, d["center"], d["width"], d["skew"], d["mass"])
    elif fam == "kernel-K":
        f = d["mass"] * kernels.bessel_kernel(cfg.get("model", "m"), 1, grid)
    else:
        try:
            arr = np.loadtxt(d["path"], delimiter=",", comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise TaskError(f"cannot load data file {d['path']!r}: {exc}") from None
        vals = arr[:, -1]
        if vals.size != grid.n:
            raise TaskError(f"data file has {vals.size} values, grid has {grid.n}")
        f = Field(grid, d["mass"] * vals)
    small = d["smallness"]
    if nonlinear_run and small == 0:
        small = 0.1
    if small > 0:
        f = data.scale_to_smallness(f, small)
    return f


def _comment(cfg: RunConfig) -> str:
    g, m = cfg["grid"], cfg["model"]
    return (f"ddlab config_sha256={cfg.sha256} grid=n:{g['n']},L:{format(g['L'], '.17g')} "
            f"model=kind:{m['kind']},m:{format(m['m'], '.17g')},q:{format(m['q'], '.17g')},"
            f"variant:{m['variant']},dispersion_sign:{m['dispersion_sign']}")


def _tname(t: float) -> str:
    return format(float(t), ".17g")


class _Out:
    def __init__(self, cfg: RunConfig, outdir: str):
        self.cfg = cfg
        self.dir = outdir
        self.comment = _comment(cfg)
        self.written: List[str] = []

    def write(self, name: str, rows, columns=None) -> str:
        rows = list(rows)
        columns = columns or rows_to_columns(rows)
        path = write_csv(os.path.join(self.dir, name), columns, rows, self.comment)
        self.written.append(path)
        return path


def _positive_times(cfg: RunConfig) -> List[float]:
    ts = [t for t in cfg.get("time", "times") if t > 0]
    if not ts:
        raise TaskError("time.times needs at least one positive time")
    return ts


# --- tasks ---------------------------------------------------------------

def task_kernel(cfg: RunConfig, out: _Out) -> None:
    grid = _grid(cfg)
    m, j = cfg.get("model", "m"), cfg.get("task", "j")
    ts = _positive_times(cfg)
    cols: Dict[str, np.ndarray] = {"x": grid.x}
    norms = []
    for t in ts:
        f = kernels.derivative_kernel(kernels.KernelSpec(m, t, alpha=j), grid)
        cols[f"d{j}G_t={_tname(t)}"] = f.values
        num = lp_norm(f, 2)
        exact = kernels.kernel_l2_closed_form(m, j, t)
        norms.append(dict(t=t, j=j, grid_l2=num, closed_form_l2=exact, rel_err=abs(num - exact) / exact))
    if m > 1:
        cols["K_m"] = kernels.bessel_kernel(m, 1, grid).values
    names = list(cols)
    out.write("kernel.csv", ({k: cols[k][i] for k in names} for i in range(grid.n)), names)
    out.write("kernel_norms.csv", norms)


def _phase(cfg: RunConfig, kind: Optional[str] = None) -> semigroups.PhaseFunction:
    mdl = cfg["model"]
    return semigroups.PhaseFunction(kind or mdl["kind"], mdl["m"], mdl["dispersion_sign"])


def task_solve_linear(cfg: RunConfig, out: _Out) -> None:
    grid = _grid(cfg)
    v0 = build_data(cfg, grid)
    times = sorted(set([0.0] + list(cfg.get("time", "times"))))
    traj = semigroups.semigroup_trajectory(_phase(cfg), times, v0)
    rows = [dict(t=t, l2=n[0], linf=n[1], dx_l2=n[2], mass=float(np.sum(v) * grid.dx))
            for t, n, v in zip(traj.times, traj.norms, traj.values)]
    out.write("solve_linear_norms.csv", rows)
    if cfg.get("output", "fields"):
        _write_fields(out, "solve_linear_fields.csv", grid, traj)


def _write_fields(out: _Out, name: str, grid: SpectralGrid, traj: semigroups.Trajectory) -> None:
    names = ["x"] + [f"v_t={_tname(t)}" for t in traj.times]
    rows = ({"x": grid.x[i], **{names[k + 1]: traj.values[k, i] for k in range(len(traj))}}
            for i in range(grid.n))
    out.write(name, rows, names)


def _problem(cfg: RunConfig, extra_times: Sequence[float] = ()) -> nonlinear.NonlinearProblem:
    grid = _grid(cfg)
    mdl, tm = cfg["model"], cfg["time"]
    T = tm["T"]
    ts = sorted(set([0.0, T] + [t for t in list(tm["times"]) + list(extra_times) if 0 < t <= T]))
    return nonlinear.NonlinearProblem(mdl["m"], mdl["q"], mdl["variant"], build_data(cfg, grid, True),
                                      T, tm["dt"], sample_times=tuple(ts),
                                      dispersion_sign=mdl["dispersion_sign"])


def task_solve_nonlinear(cfg: RunConfig, out: _Out) -> None:
    prob = _problem(cfg)
    method = cfg.get("task", "method")
    trajs = {}
    if method in ("direct", "both"):
        trajs["direct"] = nonlinear.direct_solve(prob)
    if method in ("picard", "both"):
        trajs["picard"] = nonlinear.picard_solve(prob)
        pic = trajs["picard"].aux
        ratios = [float("nan")] + list(pic["contraction_ratios"])
        out.write("picard_iterations.csv",
                  [dict(iteration=i + 1, increment=inc, ratio=r, weighted_norm=w)
                   for i, (inc, r, w) in enumerate(zip(pic["increments"], ratios, pic["weighted_norms"][1:]))])
    rows = []
    for i, t in enumerate(prob.sample_times):
        row = {"t": t}
        for name, tr in trajs.items():
            row[f"{name}_l2"], row[f"{name}_linf"], row[f"{name}_dx_l2"] = tr.norms[i]
        if len(trajs) == 2:
            d = trajs["direct"].values[i] - trajs["picard"].values[i]
            row["diff_l2"] = float(np.sqrt(np.sum(d**2) * prob.v0.grid.dx))
        rows.append(row)
    out.write("solve_nonlinear_norms.csv", rows)
    if cfg.get("output", "fields"):
        for name, tr in trajs.items():
            _write_fields(out, f"solve_nonlinear_fields_{name}.csv", prob.v0.grid, tr)


def _expand_pieces(cfg: RunConfig, v0: Field, t: float):
    th, m, N = cfg.get("task", "theorem"), cfg.get("model", "m"), cfg.get("task", "N")
    s = cfg.get("model", "dispersion_sign")
    if th == "heat":
        return "heat", N, expansion.heat_expansion(v0, N, m, t, return_terms=True)
    if th == "bbm-int":
        return "bbm", N, expansion.linear_expansion_integer_m(v0, N, m, t, dispersion_sign=s, return_terms=True)
    if th == "bbm-frac":
        return "bbm", 1, expansion.linear_expansion_fractional_m(v0, m, t, dispersion_sign=s, return_terms=True)
    if th == "kdv":
        return "kdv", N, expansion.kdv_expansion(v0, N, m, t, return_terms=True)
    return "bbm", N, expansion.preliminary_expansion_with_K(v0, N, m, t, dispersion_sign=s, return_terms=True)


def task_expand(cfg: RunConfig, out: _Out) -> None:
    grid = _grid(cfg)
    v0 = build_data(cfg, grid)
    m, p = cfg.get("model", "m"), cfg.get("task", "p")
    rows, first_terms = [], None
    for t in _positive_times(cfg):
        kind, order, (partial, terms) = _expand_pieces(cfg, v0, t)
        exact = semigroups.apply_semigroup(_phase(cfg, kind), t, v0)
        res = expansion.residual_norm(exact, partial, p)
        scale = t ** ((1.0 / m) * (1.0 - 1.0 / p) + order / m)
        rows.append(dict(t=t, residual=res, scaled_residual=res * scale))
        if first_terms is None:
            first_terms = (t, terms)
    out.write("expand_residuals.csv", rows)
    t0, terms = first_terms
    out.write("expand_terms.csv", [
        dict(t=t0, r=tm.spec.r, j=tm.spec.j, alpha=tm.spec.alpha, bessel_power=tm.spec.bessel_power,
             weight=str(tm.weight), time_power=tm.time_power, moment=tm.moment, coefficient=tm.coefficient)
        for tm in terms])
    if float(m).is_integer() and int(m) % 2 == 0 and not any(tm.spec.bessel_power for tm in terms):
        table = expansion.collapse_even_m(terms)
        out.write("expand_terms_collapsed.csv", [
            dict(derivative_order=k, alpha=a, time_power=tp, weight=str(w))
            for k, row in table.items() for (a, tp), w in sorted(row.items())],
            ["derivative_order", "alpha", "time_power", "weight"])


def task_second_term(cfg: RunConfig, out: _Out) -> None:
    case = cfg.get("task", "case")
    prob = _problem(cfg)
    p = cfg.get("task", "p")
    traj = nonlinear.direct_solve(prob)
    lin = semigroups.semigroup_trajectory(prob.phase, traj.times, prob.v0)
    grid = prob.v0.grid
    rows = []
    for i, t in enumerate(traj.times):
        if t <= 0:
            continue
        P = nonlinear.second_term_profile(prob, case, t, trajectory=traj)
        d = traj.values[i] - lin.values[i]
        scale = t ** ((1.0 - 1.0 / p) / prob.m + 1.0 / prob.m)
        rows.append(dict(t=t, scaled_without=lp_norm(Field(grid, d), p) * scale,
                         scaled_with=lp_norm(Field(grid, d + P.values), p) * scale))
    out.write("second_term.csv", rows)
    if case == "supercritical":
        c = nonlinear.supercritical_coefficient(traj, prob.q, prob.variant)
        out.write("second_term_coefficient.csv", [dict(
            coefficient=c.value, quadrature=c.quadrature, tail=c.tail, tail_exponent=c.tail_exponent, T=c.T)])


def _read_columns(path: str) -> Dict[str, List[str]]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise TaskError(f"cannot read {path!r}: {exc.strerror}") from None
    reader = csv.DictReader(lines)
    cols: Dict[str, List[str]] = {k: [] for k in (reader.fieldnames or [])}
    for row in reader:
        for k, v in row.items():
            cols[k].append(v)
    return cols


def task_fit(cfg: RunConfig, out: _Out) -> None:
    tk = cfg["task"]
    if not tk["input"]:
        raise TaskError("task.input must name a CSV file")
    cols = _read_columns(tk["input"])
    for c in (tk["x_column"], tk["y_column"]):
        if c not in cols:
            raise TaskError(f"column {c!r} not found in {tk['input']}")
    x = np.array(cols[tk["x_column"]], dtype=float)
    y = np.array(cols[tk["y_column"]], dtype=float)
    window = tuple(tk["window"]) or None
    fit = analysis.fit_power_law(x, y, window)
    out.write("fit.csv", [dict(column=tk["y_column"], exponent=fit.exponent, prefactor=fit.prefactor,
                               fit_residual=fit.fit_residual, t_min=fit.window[0], t_max=fit.window[1],
                               n_samples=fit.n_samples)])


def task_check_ineq(cfg: RunConfig, out: _Out) -> None:
    a, b = cfg.get("task", "a"), cfg.get("task", "b")
    rep = analysis.check_convolution_inequality(a, b, cfg.get("time", "times"))
    out.write("check_ineq.csv", [dict(lemma=rep.lemma, t=t, lhs=l, rhs_shape=r, ratio=q)
                                 for t, l, r, q in zip(rep.times, rep.lhs, rep.rhs_shape, rep.ratios)])
    out.write("check_ineq_summary.csv", [dict(lemma=rep.lemma, a=a, b=b, finite=rep.finite,
                                              bounded=rep.bounded, monotone=rep.monotone,
                                              tail_slope=rep.tail_slope)])


def _selection(text: str) -> List[int]:
    if text.strip() == "all":
        return list(range(1, 15))
    out = []
    for part in text.replace(",", " ").split():
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if any(k < 1 or k > 14 for k in out):
        raise TaskError("task.criteria numbers must lie in 1..14")
    return sorted(set(out))


def _run_criteria(numbers, seed, out: _Out, echo) -> list:
    results = []
    for k in numbers:
        res = verify.run_criterion(k, seed)
        out.write(os.path.join("verify", f"criterion_{k:02d}.csv"), res.rows)
        echo(res.line())
        results.append(res)
    return results


def task_verify_all(cfg: RunConfig, out: _Out, echo=print) -> None:
    try:
        numbers = _selection(cfg.get("task", "criteria"))
    except ValueError as exc:
        raise TaskError(str(exc)) from None
    seed = cfg.get("task", "seed")
    base = [k for k in numbers if k != 14]
    results = _run_criteria(base, seed, out, echo)
    summary = [dict(criterion=r.number, title=r.title, status=r.status, note=r.note) for r in results]
    if 14 in numbers:
        with tempfile.TemporaryDirectory() as tmp:
            again = _Out(cfg, tmp)
            _run_criteria(base, seed, again, lambda _line: None)
            names = [os.path.relpath(p, out.dir) for p in out.written]
            same = all(filecmp.cmp(os.path.join(out.dir, n), os.path.join(tmp, n), shallow=False)
                       for n in names)
        line = verify.CriterionResult(14, "repeat run gives byte-identical CSVs", same,
                                      note=f"{len(names)} files compared")
        echo(line.line())
        summary.append(dict(criterion=14, title=line.title, status=line.status, note=line.note))
    out.write("verify_summary.csv", summary, ["criterion", "title", "status", "note"])


TASK_FUNCS = {
    "kernel": task_kernel,
    "solve-linear": task_solve_linear,
    "solve-nonlinear": task_solve_nonlinear,
    "expand": task_expand,
    "second-term": task_second_term,
    "fit": task_fit,
    "check-ineq": task_check_ineq,
    "verify-all": task_verify_all,
}


def run(cfg: RunConfig, output_dir: Optional[str] = None) -> List[str]:
    """Execute ``cfg``'s task and return the paths written."""
    out = _Out(cfg, output_dir or cfg.output_dir())
    TASK_FUNCS[cfg.get("task", "name")](cfg, out)
    return out.written


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddlab", description=__doc__.splitlines()[0])
    ap.add_argument("task", choices=TASKS + ("run",),
                    help="task to execute; 'run' takes the task from the config file")
    ap.add_argument("-c", "--config", help="INI config file")
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override a config value (repeatable)")
    ap.add_argument("-o", "--output-dir", help="output directory (wins over config and environment)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        overrides = list(args.set)
        if args.task != "run":
            overrides.append(f"task.name={args.task}")
        if args.config:
            cfg = RunConfig.from_file(args.config, overrides)
        else:
            cfg = RunConfig.from_string("", overrides)
        paths = run(cfg, args.output_dir)
    except (ConfigError, TaskError) as exc:
        print(f"ddlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (nonlinear.PicardDivergence, nonlinear.BlowUpError, FloatingPointError) as exc:
        print(f"ddlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"ddlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


def main_entry() -> None:  # pragma: no cover - console-script shim
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 on success or a passing check, 1 when a check fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import click

from . import core, simulator, strategies, strings
from .core import ErrorState, Priors

SIG_DIGITS = 10


def fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def _round(obj: Any) -> Any:
    """Round every float in a JSON-able structure to SIG_DIGITS significant digits."""
    if isinstance(obj, float):
        if math.isfinite(obj):
            return float(fmt(obj))
        return None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _emit_json(command: str, params: dict, results: Any, passed: bool, out: str | None) -> None:
    doc = {"command": command, "params": _round(params), "results": _round(results), "pass": passed}
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _emit_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    _emit(buf.getvalue(), out)


def _state(alpha: float, beta: float) -> ErrorState:
    try:
        state = ErrorState(alpha, beta)
        core.require_regime(state)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    return state


def _priors(p0: float) -> Priors:
    try:
        return Priors.from_h0(p0)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _call(fn: Callable, *args, **kwargs):
    """Library ValueErrors are configuration errors from the CLI's point of view."""
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _parse_any_strategy(text: str) -> core.Strategy:
    """Flat rules ("AOA") or comma-separated pairs ("AO,OA")."""
    try:
        if "," in text:
            return strings.flatten(strings.parse_paired(text))
        return core.parse_strategy(text)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def level_rows(initial: ErrorState, strategy: core.Strategy, priors: Priors) -> list[list]:
    return [
        [k, s.alpha, s.beta, core.total_error(s, priors)]
        for k, s in enumerate(core.trajectory(initial, strategy))
    ]


LEVEL_HEADER = ("level", "alpha", "beta", "total_error")


def _state_options(f):
    f = click.option("--prior-h0", "prior_h0", type=float, default=0.5, show_default=True,
                     help="Prior probability of H0.")(f)
    f = click.option("--beta", type=float, required=True, help="Sensor Type II error.")(f)
    f = click.option("--alpha", type=float, required=True, help="Sensor Type I error.")(f)
    return f


def _output_options(default_format: str):
    def deco(f):
        f = click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default=default_format,
                         show_default=True)(f)
        f = click.option("--out", type=click.Path(dir_okay=False), default=None,
                         help="Write to this file instead of stdout.")(f)
        return f

    return deco


@click.group()
def main():
    """Fusion strategies for balanced binary relay trees."""


@main.command()
@_state_options
@click.option("--strategy", "strategy_text", default="", help='Rules per level, e.g. "AOA" or "AO,OA".')
@_output_options("csv")
def evolve(alpha, beta, prior_h0, strategy_text, out, fmt_):
    """Error probabilities level by level under a given strategy."""
    initial = _state(alpha, beta)
    priors = _priors(prior_h0)
    strategy = _parse_any_strategy(strategy_text)
    rows = level_rows(initial, strategy, priors)
    if fmt_ == "csv":
        _emit_csv(LEVEL_HEADER, rows, out)
    else:
        params = {"alpha": alpha, "beta": beta, "prior_h0": prior_h0,
                  "strategy": core.format_strategy(strategy)}
        _emit_json("evolve", params, [dict(zip(LEVEL_HEADER, r)) for r in rows], True, out)


def _valued_result(initial, vs: strategies.ValuedStrategy, priors) -> dict:
    return {
        "strategy": core.format_strategy(vs.strategy),
        "value": vs.value,
        "final_alpha": vs.final_state.alpha,
        "final_beta": vs.final_state.beta,
        "final_total_error": core.total_error(vs.final_state, priors),
        "levels": [dict(zip(LEVEL_HEADER, r)) for r in level_rows(initial, vs.strategy, priors)],
    }


def _solver_command(name: str, solve: Callable):
    @_state_options
    @click.option("--height", type=int, required=True, help="Tree height h.")
    @_output_options("json")
    def cmd(alpha, beta, prior_h0, height, out, fmt_):
        initial = _state(alpha, beta)
        priors = _priors(prior_h0)
        vs = _call(solve, initial, height, priors)
        if fmt_ == "csv":
            _emit_csv(LEVEL_HEADER, level_rows(initial, vs.strategy, priors), out)
        else:
            params = {"alpha": alpha, "beta": beta, "prior_h0": prior_h0, "height": height}
            _emit_json(name, params, _valued_result(initial, vs, priors), True, out)

    cmd.__name__ = name
    return cmd


main.command(name="greedy", help="Greedy (ULRT) strategy.")(
    _solver_command("greedy", strategies.greedy_strategy))
main.command(name="optimal", help="h-optimal strategy from Bellman's equations.")(
    _solver_command("optimal", strategies.optimal_strategy))


@main.command()
@_state_options
@click.option("--height", type=int, required=True)
@_output_options("json")
def compare(alpha, beta, prior_h0, height, out, fmt_):
    """Greedy versus optimal strategy, with both error curves."""
    initial = _state(alpha, beta)
    priors = _priors(prior_h0)
    g = _call(strategies.greedy_strategy, initial, height, priors)
    o = _call(strategies.optimal_strategy, initial, height, priors)
    ratio = g.value / o.value if o.value != 0 else 1.0
    if fmt_ == "csv":
        gr = level_rows(initial, g.strategy, priors)
        orows = level_rows(initial, o.strategy, priors)
        rows = [[a[0], a[3], b[3]] for a, b in zip(gr, orows)]
        _emit_csv(("level", "greedy_total_error", "optimal_total_error"), rows, out)
        return
    params = {"alpha": alpha, "beta": beta, "prior_h0": prior_h0, "height": height}
    results = {
        "greedy": _valued_result(initial, g, priors),
        "optimal": _valued_result(initial, o, priors),
        "ratio": ratio,
    }
    _emit_json("compare", params, results, True, out)


def _grid(step: float) -> list[ErrorState]:
    n = int(round(1.0 / step))
    pts = []
    for i in range(1, n):
        for j in range(1, n):
            a, b = round(i * step, 12), round(j * step, 12)
            if a + b < 1.0 - step / 2:
                pts.append(ErrorState(a, b))
    return pts


CHECKERS = {
    "monotone": strings.check_monotone,
    "dimret": strings.check_diminishing_returns,
    "lemma1": strings.check_lemma1,
    "bound": strings.check_greedy_bound,
}


@main.command()
@click.argument("which", type=click.Choice(list(CHECKERS)))
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--grid", "grid_step", type=float, default=None,
              help="Check every grid state with this spacing instead of one state.")
@click.option("--synthetic", type=click.Choice(sorted(strings.SYNTHETIC)), default=None,
              help="Check a built-in synthetic string function instead of u.")
@click.option("--depth", type=int, default=4, show_default=True)
@click.option("--K", "K", type=int, default=3, show_default=True, help="Greedy length for 'bound'.")
@click.option("--exhaustive", is_flag=True, help="'bound': check condition ii over all greedy/optimal pairs.")
@click.option("--prior-h0", "prior_h0", type=float, default=0.5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def check(which, alpha, beta, grid_step, synthetic, depth, K, exhaustive, prior_h0, out):
    """String-submodularity checks on the paired-rule reduction u."""
    priors = _priors(prior_h0)
    targets: list[tuple[dict, strings.StringFunction, Sequence]] = []
    if synthetic is not None:
        targets.append(({"synthetic": synthetic}, strings.SYNTHETIC[synthetic], ("x", "y")))
    elif grid_step is not None:
        if not 0 < grid_step < 0.5:
            raise click.UsageError("--grid spacing must lie in (0, 0.5)")
        for s in _grid(grid_step):
            targets.append(({"alpha": s.alpha, "beta": s.beta}, strings.reduction_function(s, priors), strings.PAIRS))
    elif alpha is not None and beta is not None:
        s = _state(alpha, beta)
        targets.append(({"alpha": alpha, "beta": beta}, strings.reduction_function(s, priors), strings.PAIRS))
    else:
        raise click.UsageError("give --alpha and --beta, --grid, or --synthetic")

    checker = CHECKERS[which]
    results = []
    for where, f, alphabet in targets:
        if which == "bound":
            report = _call(checker, f, alphabet, K, exhaustive=exhaustive)
        else:
            report = checker(f, alphabet, depth)
        results.append({"at": where, **report.to_dict()})
    passed = all(r["passed"] for r in results)
    params = {"which": which, "alpha": alpha, "beta": beta, "grid": grid_step, "synthetic": synthetic,
              "depth": depth, "K": K, "exhaustive": exhaustive, "prior_h0": prior_h0}
    _emit_json("check", params, results, passed, out)
    if not passed:
        first = next(r for r in results if not r["passed"])
        witness = first["violations"][0] if first["violations"] else first["details"]
        click.echo(f"check {which} failed at {first['at']}: {witness}", err=True)
        sys.exit(1)


@main.command()
@click.option("--alpha", type=float, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--strategy", "strategy_text", default="")
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def simulate(alpha, beta, strategy_text, trials, seed, workers, out):
    """Monte Carlo estimate of the root error probabilities."""
    initial = _state(alpha, beta)
    strategy = _parse_any_strategy(strategy_text)
    config = _call(simulator.SimConfig, initial, strategy, trials, seed, workers)
    report = simulator.simulate(config)
    results = report.to_dict()
    results.update({"alpha_ok": report.alpha_ok, "beta_ok": report.beta_ok, "agreement": report.total_ok})
    params = {"alpha": alpha, "beta": beta, "strategy": core.format_strategy(strategy),
              "trials": trials, "seed": seed, "workers": workers}
    _emit_json("simulate", params, results, report.total_ok, out)


@main.command()
@_state_options
@click.option("--max-height", "max_h", type=int, default=30, show_default=True)
@_output_options("json")
def decay(alpha, beta, prior_h0, max_h, out, fmt_):
    """Total error along the greedy strategy and the log-ratio statistic."""
    initial = _state(alpha, beta)
    priors = _priors(prior_h0)
    profile = _call(simulator.decay_profile, initial, max_h, priors)
    if initial.alpha > 0 and initial.beta > 0:
        logs = simulator.log_decay_profile(initial, max_h, priors)
    else:
        logs = [(h, math.log(v) if v > 0 else -math.inf) for h, v in profile]
    rows = [[h, v, lv] for (h, v), (_, lv) in zip(profile, logs)]
    if fmt_ == "csv":
        _emit_csv(("level", "total_error", "log_total_error"), rows, out)
        return
    ratios = simulator.decay_ratios(logs)
    params = {"alpha": alpha, "beta": beta, "prior_h0": prior_h0, "max_height": max_h}
    results = {
        "levels": [dict(zip(("level", "total_error", "log_total_error"), r)) for r in rows],
        "ratios": [{"level": h, "ratio": r} for h, r in ratios.items()],
    }
    _emit_json("decay", params, results, True, out)


if __name__ == "__main__":
    main()

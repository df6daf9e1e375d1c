"""Command-line front end: ``python -m scenario_risk {measures,axioms,basel,scenarios}``.

Results go to stdout or ``--output``; errors are written to stderr as JSON
and mapped to exit codes (2 usage, 3 cap exceeded, 4 data, 5 alignment).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

import numpy as np

from . import __version__
from .basel import PortfolioPanel, imcc, rolling_series
from .choquet import (
    DistortionSpec,
    SetFunction,
    check_componentwise,
    check_standard,
    check_submodular,
    comonotonic_additivity_probe,
    distorted_set_function,
    submodular_criterion,
)
from .config import RunConfig, load_basel_config, load_run_config
from .errors import InvalidInputError, ScenarioRiskError
from .fixtures import FIXTURES, density_ratio_atomization, two_s_minus_t
from .logging_config import setup_logging
from .market_data import (
    base_scenario,
    economic_scenario_series,
    economic_scenarios,
    load_csv,
    load_panel_dir,
    log_linear_detrend,
    negative_returns,
)
from .measure_core import canonical, es, mixture, var
from .scenario_measures import ScenarioDistributions, aes, imes, mes, mvar, rmes, vector_measure
from .serialization import (
    bundle_from_dict,
    bundle_to_dict,
    is_bundle,
    read_json,
    write_json,
    write_table_csv,
)
from .tracking import log_run

logger = logging.getLogger(__name__)

MEASURES = ("var", "es", "mes", "mvar", "aes", "imes", "rmes")
CHAIN = ("aes", "mes", "imes", "rmes")
CHAIN_TOL = 1e-9
PSI_FAMILIES = ("mvar_type", "imes_type", "minvar_type", "aes_type", "two_s_minus_t")
PROBE_MEASURES = {"mes": mes, "mvar": mvar, "aes": aes, "imes": imes, "rmes": rmes}


def _measure_list(text):
    names = [n.strip() for n in text.split(",") if n.strip()]
    if names == ["all"]:
        return list(MEASURES)
    unknown = [n for n in names if n not in MEASURES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown measure(s) {unknown}; choose from {', '.join(MEASURES)}")
    return names


def _even_window(text):
    w = int(text)
    if w < 4 or w % 2:
        raise argparse.ArgumentTypeError(f"w={w} must be an even number >= 4")
    return w


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_global(parser, suppress):
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    parser.add_argument("--config", default=default(None), help="TOML or JSON run configuration")
    parser.add_argument("--seed", type=int, default=default(None), help="seed for randomized probes")
    parser.add_argument("--output", default=default(None), help="output file (default stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default=default(None))
    parser.add_argument("--log-level", default=default("WARNING"))
    parser.add_argument("--log-file", default=default(None))
    parser.add_argument("--track", action="store_true", default=default(False), help="log the run to MLflow")
    parser.add_argument("--n-jobs", type=int, default=default(None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenario-risk", description="Scenario-based risk measures")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measures", help="evaluate VaR/ES and the scenario-based family")
    _add_global(m, suppress=True)
    m.add_argument("--input", help="scenario laws or a table/scenario bundle (JSON)")
    m.add_argument("--fixture", choices=sorted(FIXTURES))
    m.add_argument("--variable")
    m.add_argument("--p", type=float)
    m.add_argument("--which", type=_measure_list, default=list(MEASURES))
    m.add_argument("--weights", type=_floats, help="AES scenario weights")
    m.add_argument("--base-weights", type=_floats, help="mixture weights defining the base measure")

    a = sub.add_parser("axioms", help="check distortion and set-function axioms")
    _add_global(a, suppress=True)
    a.add_argument("--family", choices=PSI_FAMILIES)
    a.add_argument("--psi", help="distortion JSON")
    a.add_argument("--n", type=int)
    a.add_argument("--p", type=float, default=0.9)
    a.add_argument("--a", type=_floats, help="aes_type weights")
    a.add_argument("--input", help="table/scenario bundle JSON")
    a.add_argument("--fixture", choices=["density-ratio", *sorted(FIXTURES)])
    a.add_argument("--cells-per-half", type=int, default=2)
    a.add_argument("--set-function", help="JSON list of 2**m set-function values indexed by bitmask")
    a.add_argument("--measure", choices=sorted(PROBE_MEASURES), help="measure for the comonotonic probe")
    a.add_argument("--grid-k", type=int)
    a.add_argument("--trials", type=int)

    b = sub.add_parser("basel", help="run the market-risk capital pipeline")
    _add_global(b, suppress=True)
    b.add_argument("--data", required=True, help="directory with one price CSV per factor")
    b.add_argument("--basel-config", help="basel section as TOML/JSON (overrides --config)")
    b.add_argument("--as-of")
    b.add_argument("--start")
    b.add_argument("--end")

    s = sub.add_parser("scenarios", help="build economic scenarios from market data")
    _add_global(s, suppress=True)
    s.add_argument("--target", required=True, help="target price CSV")
    s.add_argument("--vix", required=True, help="volatility index CSV")
    s.add_argument("--index", required=True, help="equity index CSV to detrend")
    s.add_argument("--w", type=_even_window)
    s.add_argument("--t0", help="build one scenario bundle for this day")
    s.add_argument("--start", help="first day of a rolling measure series")
    s.add_argument("--end", help="last day of a rolling measure series")
    s.add_argument("--p", type=float)
    s.add_argument("--variable", default="X")
    s.add_argument("--assignment", help="write the day-to-regime assignment CSV here")
    return parser


def _header(command, cfg: RunConfig):
    return {"command": command, "version": __version__, "seed": cfg.seed}


def _base_law(sd, table, variable, base, base_weights):
    if base_weights is not None:
        return mixture(sd.dists, base_weights)
    if table is not None:
        weights = base if base is not None else np.full(table.outcome_count, 1.0 / table.outcome_count)
        column = table.variable(variable)
        return canonical(column[weights > 0], weights[weights > 0])
    return mixture(sd.dists)


def cmd_measures(args, cfg: RunConfig):
    table, base, p = None, None, args.p
    if args.fixture:
        fx = FIXTURES[args.fixture]()
        table, scenarios, variable, base = fx.table, fx.scenarios, args.variable or fx.variable, fx.base
        p = fx.p if p is None else p
        sd = ScenarioDistributions.from_table(table, scenarios, variable)
    elif args.input:
        data = read_json(args.input)
        if is_bundle(data):
            table, scenarios, variable, base = bundle_from_dict(data)
            variable = args.variable or variable
            sd = ScenarioDistributions.from_table(table, scenarios, variable)
        else:
            variable = args.variable
            sd = ScenarioDistributions.from_dict(data)
    else:
        raise InvalidInputError("measures needs --input or --fixture")
    p = cfg.scenarios.p if p is None else p
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p={p} must lie in (0, 1)")

    base_law = _base_law(sd, table, variable, base, args.base_weights)
    compute = {
        "var": lambda: ("var_P", var(base_law, p)),
        "es": lambda: ("es_P", es(base_law, p)),
        "mes": lambda: ("mes", mes(sd, p)),
        "mvar": lambda: ("mvar", mvar(sd, p)),
        "aes": lambda: ("aes", aes(sd, p, args.weights)),
        "imes": lambda: ("imes", imes(sd, p)),
        "rmes": lambda: ("rmes", rmes(sd, p)),
    }
    payload = {**_header("measures", cfg), "p": p, "scenarios": sd.names}
    if variable:
        payload["variable"] = variable
    values = dict(compute[name]() for name in args.which)
    payload.update(values)
    if all(name in args.which for name in CHAIN):
        chain = [values[name] for name in CHAIN]
        payload["chain_ok"] = all(lo <= hi + CHAIN_TOL for lo, hi in zip(chain, chain[1:]))
    log_run("measures", {"p": p, "which": ",".join(args.which), "seed": cfg.seed}, values, cfg.tracking)
    return payload


def _psi(args, n):
    if args.psi:
        return DistortionSpec.from_dict(read_json(args.psi))
    if args.family is None:
        return None
    if args.family == "two_s_minus_t":
        return two_s_minus_t()
    if args.family == "mvar_type":
        return DistortionSpec.mvar_type(n, args.p)
    if args.family == "imes_type":
        return DistortionSpec.imes_type(n, args.p)
    if args.family == "minvar_type":
        return DistortionSpec.minvar_type(n)
    weights = args.a if args.a is not None else [1.0 / n] * n
    return DistortionSpec.aes_type(args.p, weights)


def cmd_axioms(args, cfg: RunConfig):
    axiom_cfg = cfg.axioms
    table, scenarios, variable = None, None, None
    if args.fixture == "density-ratio":
        scenarios = density_ratio_atomization(args.cells_per_half)
    elif args.fixture:
        fx = FIXTURES[args.fixture]()
        table, scenarios, variable = fx.table, fx.scenarios, fx.variable
    elif args.input:
        table, scenarios, variable, _ = bundle_from_dict(read_json(args.input))

    n = args.n or (scenarios.size if scenarios is not None else 2)
    psi = _psi(args, n)
    payload = _header("axioms", cfg)
    counterexamples = {}

    def record(key, verdict):
        payload[key] = verdict.holds
        if not verdict.holds:
            counterexamples[key] = verdict.to_dict()

    if psi is not None:
        report = check_componentwise(psi, grid_k=args.grid_k or axiom_cfg.grid_k)
        payload["psi_family"] = psi.family
        record("psi_increasing", report.increasing)
        record("psi_concave", report.concave)
        record("psi_submodular", report.submodular)
        record("psi_two_point", report.two_point)

    set_function = None
    if args.set_function:
        set_function = SetFunction.from_table(read_json(args.set_function))
    elif psi is not None and scenarios is not None:
        set_function = distorted_set_function(psi, scenarios)
    if set_function is not None:
        payload["mutually_singular"] = scenarios.mutually_singular if scenarios is not None else None
        record("set_function_increasing", check_standard(set_function, cap=axiom_cfg.monotone_cap))
        record("set_function_submodular", check_submodular(set_function, cap=axiom_cfg.submodular_cap,
                                                           n_jobs=args.n_jobs or 1))
        if psi is not None and scenarios is not None and not args.set_function:
            payload["submodular_criterion"] = submodular_criterion(scenarios)

    if args.measure:
        if table is None:
            raise InvalidInputError("the comonotonic probe needs --input or a table fixture")
        measure = vector_measure(PROBE_MEASURES[args.measure], scenarios, p=args.p)
        payload["measure"] = args.measure
        record("comonotonic_additive", comonotonic_additivity_probe(
            measure, table, trials=args.trials or axiom_cfg.trials, seed=cfg.seed))

    if psi is None and set_function is None and not args.measure:
        raise InvalidInputError("axioms needs --family, --psi, --set-function or --measure")
    payload["counterexamples"] = counterexamples
    return payload


def cmd_basel(args, cfg: RunConfig):
    basel_cfg = load_basel_config(args.basel_config) if args.basel_config else cfg.basel
    if args.n_jobs:
        basel_cfg = basel_cfg.model_copy(update={"n_jobs": args.n_jobs})
    prices = load_panel_dir(args.data, cfg.scenarios.date_column, cfg.scenarios.value_column)
    panel = PortfolioPanel.from_prices(prices, basel_cfg.units)
    basel_cfg.validate_for(panel.factors)
    if args.as_of:
        result = imcc(panel, basel_cfg, args.as_of).to_dict()
        payload = {**_header("basel", cfg), **result}
        log_run("basel", {"as_of": args.as_of, "p": basel_cfg.p, "lambda": basel_cfg.lambda_},
                {"imcc": result["imcc"], **{k: v for k, v in result["components"].items()
                                            if isinstance(v, (int, float))}}, cfg.tracking)
        return payload
    if not (args.start and args.end):
        raise InvalidInputError("basel needs --as-of or both --start and --end")
    frame = rolling_series(panel, basel_cfg, args.start, args.end)
    log_run("basel-rolling", {"start": args.start, "end": args.end}, {"rows": len(frame)}, cfg.tracking)
    return frame


def cmd_scenarios(args, cfg: RunConfig):
    sc = cfg.scenarios
    w = args.w or sc.w
    target = load_csv(args.target, sc.date_column, sc.value_column)
    vix = load_csv(args.vix, sc.date_column, sc.value_column)
    index = load_csv(args.index, sc.date_column, sc.value_column)
    returns, residuals = negative_returns(target), log_linear_detrend(index)
    if not args.t0:
        if not (args.start and args.end):
            raise InvalidInputError("scenarios needs --t0 or both --start and --end")
        p = sc.p if args.p is None else args.p
        frame = economic_scenario_series(returns, vix.series, residuals, args.start, args.end, w, p,
                                         n_jobs=args.n_jobs or 1)
        log_run("scenarios-rolling", {"start": args.start, "end": args.end, "w": w, "p": p},
                {"rows": len(frame)}, cfg.tracking)
        return frame
    table, scenarios, assignment = economic_scenarios(
        returns, vix.series, residuals, args.t0, w, variable=args.variable)
    if args.assignment:
        write_table_csv(assignment.to_frame(), args.assignment)
    return {**_header("scenarios", cfg),
            **bundle_to_dict(table, scenarios, args.variable, base=base_scenario(w),
                             t0=args.t0, w=w, assignment=assignment.to_dict())}


COMMANDS = {"measures": cmd_measures, "axioms": cmd_axioms, "basel": cmd_basel, "scenarios": cmd_scenarios}


def _emit(result, args):
    if hasattr(result, "to_csv"):
        if args.format == "json":
            write_json({"rows": json.loads(result.to_json(orient="records", date_format="iso"))}, args.output)
        else:
            write_table_csv(result, args.output)
        return
    if args.format == "csv":
        raise InvalidInputError(f"--format csv needs a tabular result; {args.command} produced a JSON document")
    write_json(result, args.output)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        cfg = load_run_config(args.config)
        updates = {}
        if args.seed is not None:
            updates["seed"] = args.seed
        if args.track:
            updates["tracking"] = cfg.tracking.model_copy(update={"enabled": True})
        cfg = cfg.model_copy(update=updates)
        result = COMMANDS[args.command](args, cfg)
        _emit(result, args)
        return 0
    except ScenarioRiskError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), default=str) + "\n")
        return exc.exit_code
    except Exception as exc:
        logger.exception("unexpected failure")
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 1}) + "\n")
        return 1

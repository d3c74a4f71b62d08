"""
PDBS Detection Lab
Command-line entry point

Usage:
    python -m pdbs sample  --n 40 --kr 4 --kl 3 --p 0.9 --q 0.1 --out g.edges
    python -m pdbs detect  --in g.edges --kr 4 --kl 3 --p 0.9 --q 0.1 --method scan
    python -m pdbs risk    --n 400 --kr 120 --kl 120 --p 0.24 --q 0.12 --method count --trials 200
    python -m pdbs oracle  --n 5 --kr 2 --kl 1 --p 0.9 --q 0.2
    python -m pdbs lowdeg  --n 6 --kr 2 --kl 2 --p 0.6 --q 0.3 --degree 4 --curve
    python -m pdbs phase   --family balanced --beta 0:1:0.05 --alpha 0:2:0.1 --format csv
    python -m pdbs sweep   --n 60 --kr 4,6 --kl 4 --p 0.6,0.8 --q 0.1 --method count,degree --trials 100

Precedence: flags > --config <file.json> > environment / .env > built-in defaults.
Exit codes: 0 ok, 2 usage or parameter error, 3 budget exceeded, 4 parse error, 1 anything else.
"""

import argparse
import itertools
from dataclasses import asdict
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import orjson

from pdbs.config import settings
from pdbs.errors import BudgetExceeded, GraphParseError, ParameterError, PDBSError
from pdbs.engine.detectors import DetectionOptions, check_feasible, run_test
from pdbs.engine.low_degree import ldlr_curve, ldlr_norm_sq
from pdbs.engine.measures import thm1_impossible, thm2_sufficient
from pdbs.engine.oracle import bayes_risk_exact, risk_lower_bound, second_moment_bruteforce, second_moment_exact
from pdbs.graph.edgelist import read_graph, serialize
from pdbs.graph.samplers import sample_er, sample_planted, sample_planted_union
from pdbs.models.canonical import (
    SEED_MAX,
    DetectionMethod,
    ModelParams,
    OutputFormat,
    PhaseFamily,
    Seed,
)
from pdbs.models.run_config import RunConfig
from pdbs.reports.writers import (
    dumps_json,
    phase_csv,
    phase_records,
    risk_csv,
    risk_record,
    sweep_csv,
    sweep_records,
    write_bytes,
)
from pdbs.workers.phase import grid_values, phase_grid
from pdbs.workers.risk import RiskEstimator
from pdbs.workers.sweep import SweepRunner

logger = logging.getLogger("pdbs")

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_PARSE = 4

EXIT_CODES = {
    ParameterError: EXIT_USAGE,
    BudgetExceeded: EXIT_BUDGET,
    GraphParseError: EXIT_PARSE,
}

METHOD_ALIASES = {
    "scan": DetectionMethod.SCAN_EXACT,
    "scan-exact": DetectionMethod.SCAN_EXACT,
    "scan-greedy": DetectionMethod.SCAN_GREEDY,
    "greedy": DetectionMethod.SCAN_GREEDY,
    "count": DetectionMethod.COUNT,
    "degree": DetectionMethod.DEGREE,
    "lrt": DetectionMethod.LRT,
}

RESERVED_CONFIG_KEYS = {"handler", "command", "config"}


# ---------- Argument helpers ----------


def parse_method(text: str) -> DetectionMethod:
    key = text.strip()
    if key.lower() in METHOD_ALIASES:
        return METHOD_ALIASES[key.lower()]
    try:
        return DetectionMethod(key)
    except ValueError:
        choices = ", ".join(sorted(METHOD_ALIASES))
        raise ParameterError(f"unknown method '{text}' (choose from {choices})")


def parse_methods(text: str) -> List[DetectionMethod]:
    return [parse_method(part) for part in str(text).split(",") if part.strip()]


def _int_list(text: Any) -> List[int]:
    try:
        return [int(x) for x in str(text).split(",")]
    except ValueError:
        raise ParameterError(f"expected comma-separated integers, got '{text}'")


def _float_list(text: Any) -> List[float]:
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError:
        raise ParameterError(f"expected comma-separated numbers, got '{text}'")


def resolve_seed(value: Any) -> int:
    if isinstance(value, str) and value.strip().lower() == "random":
        return int(np.random.SeedSequence().entropy % (SEED_MAX + 1))
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ParameterError(f"seed must be an integer or 'random', got '{value}'")
    if not 0 <= seed <= SEED_MAX:
        raise ParameterError(f"seed must lie in [0, 2^64), got {seed}")
    return seed


def _model_params(args: argparse.Namespace, n: Optional[int] = None) -> ModelParams:
    return ModelParams.create(
        n=args.n if n is None else n,
        k_r=args.k_r,
        k_l=args.k_l,
        p=args.p,
        q=args.q,
    )


def _options(args: argparse.Namespace, seed: int) -> DetectionOptions:
    return DetectionOptions(
        scan_cap=args.scan_cap,
        enum_cap=args.enum_cap,
        restarts=args.restarts,
        threads=args.threads,
        seed=Seed(root=seed),
    )


def _run_config(
    args: argparse.Namespace,
    seed: int,
    params: Optional[Dict[str, Any]] = None,
    methods: Sequence[DetectionMethod] = (),
    **options: Any,
) -> RunConfig:
    return RunConfig(
        command=args.command,
        seed=seed,
        format=args.format,
        scan_cap=args.scan_cap,
        enum_cap=args.enum_cap,
        pair_cap=args.pair_cap,
        ldlr_budget=args.ldlr_budget,
        restarts=args.restarts,
        confidence=args.confidence,
        params=params,
        methods=[m.value for m in methods],
        options=options,
    )


def _emit_table(args: argparse.Namespace, config: RunConfig, table: bytes, document: Dict[str, Any]) -> None:
    """CSV goes to --out with the config in a sidecar; JSON carries the config inline."""
    if OutputFormat(args.format) == OutputFormat.CSV:
        write_bytes(table, args.out)
        if args.out is not None:
            write_bytes(dumps_json(config), Path(f"{args.out}.config.json"))
        else:
            logger.info(f"Resolved config: {config.model_dump_json()}")
        return
    write_bytes(dumps_json({"config": config, **document}), args.out)


# ---------- Subcommands ----------


def cmd_sample(args: argparse.Namespace) -> None:
    seed = resolve_seed(args.seed)
    planted = None
    if args.null:
        if args.n is None or args.q is None:
            raise ParameterError("--null sampling needs --n and --q")
        graph = sample_er(args.n, args.q, Seed(root=seed))
        params = {"n": args.n, "q": args.q}
    else:
        model = _model_params(args)
        sampler = sample_planted_union if args.union else sample_planted
        graph, planted = sampler(model, Seed(root=seed))
        params = model.model_dump()

    config = _run_config(args, seed, params, null=args.null, union=args.union)
    write_bytes(serialize(graph).encode("utf-8"), args.out)
    if args.out is not None:
        write_bytes(dumps_json({"config": config, "planted": planted, "edge_count": graph.edge_count}), Path(f"{args.out}.json"))
    elif planted is not None:
        logger.info(f"Planted sets: R={planted.right} L={planted.left}")


def cmd_detect(args: argparse.Namespace) -> None:
    seed = resolve_seed(args.seed)
    method = parse_method(args.method)
    options = _options(args, seed)

    graph = None
    planted = None
    if args.input is not None:
        graph = read_graph(args.input)
        params = _model_params(args, n=args.n or graph.n)
        if graph.n != params.n:
            raise ParameterError(f"--n {params.n} does not match the {graph.n}-vertex input graph")
    else:
        params = _model_params(args)

    check_feasible(params, method, options)
    if graph is None:
        graph, planted = sample_planted(params, Seed(root=seed))

    outcome = run_test(graph, params, method, options)
    config = _run_config(args, seed, params.model_dump(), [method], input=str(args.input) if args.input else None)
    write_bytes(dumps_json({"config": config, "outcome": outcome, "planted": planted}), args.out)


def cmd_risk(args: argparse.Namespace) -> None:
    seed = resolve_seed(args.seed)
    methods = parse_methods(args.method)
    params = _model_params(args)
    options = _options(args, seed)
    for method in methods:
        check_feasible(params, method, options)

    estimator = RiskEstimator(options, args.confidence)
    estimates = [estimator.estimate(m, params, args.trials, Seed(root=seed)) for m in methods]
    records = [risk_record(params.model_dump(), est, m.value) for m, est in zip(methods, estimates)]
    config = _run_config(args, seed, params.model_dump(), methods, trials=args.trials)
    _emit_table(args, config, risk_csv(records), {"rows": records, "estimates": estimates})


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def cmd_oracle(args: argparse.Namespace) -> None:
    """Second-moment bounds and exact risks. m2 is null once it overflows a float; log_m2 is always exact."""
    seed = resolve_seed(args.seed)
    params = _model_params(args)
    m2 = second_moment_exact(params)
    document: Dict[str, Any] = {
        "m2": _finite(m2.value),
        "log_m2": m2.log_value,
        "lower_bound": risk_lower_bound(m2),
        "thm1": asdict(thm1_impossible(params)),
        "thm2": _sufficiency_dict(params),
    }
    if args.bruteforce:
        brute = second_moment_bruteforce(params, cap=args.pair_cap, threads=args.threads)
        document["m2_bruteforce"] = _finite(brute.value)
        document["log_m2_bruteforce"] = brute.log_value
    if not args.skip_bayes:
        exact = bayes_risk_exact(params, cap=args.enum_cap, threads=args.threads)
        document["tv"] = exact.tv
        document["bayes_risk"] = exact.bayes_risk

    config = _run_config(args, seed, params.model_dump(), bruteforce=args.bruteforce, skip_bayes=args.skip_bayes)
    write_bytes(dumps_json({"config": config, **document}), args.out)


def _sufficiency_dict(params: ModelParams) -> Dict[str, Any]:
    report = thm2_sufficient(params)
    return {
        "tests": sorted(t.value for t in report.tests),
        "chi2": report.chi2,
        "bounds": {t.value: b for t, b in report.bounds.items()},
        "warnings": report.warnings,
    }


def cmd_lowdeg(args: argparse.Namespace) -> None:
    seed = resolve_seed(args.seed)
    params = _model_params(args)
    degree = params.planted_edge_count if args.degree is None else args.degree
    kwargs = dict(budget=args.ldlr_budget, lam=args.lam, prune=args.prune, threads=args.threads)
    config = _run_config(args, seed, params.model_dump(), degree=degree, curve=args.curve, lam=args.lam, prune=args.prune)

    if args.curve:
        reports = ldlr_curve(params, degree, **kwargs)
        document = {"D": degree, "curve": reports, "norm_sq": reports[-1].norm_sq}
    else:
        report = ldlr_norm_sq(params, degree, **kwargs)
        document = {
            "D": degree,
            "norm_sq": report.norm_sq,
            "increments": report.increments,
            "terms_enumerated": report.terms_enumerated,
        }
    write_bytes(dumps_json({"config": config, **document}), args.out)


def cmd_phase(args: argparse.Namespace) -> None:
    seed = resolve_seed(args.seed)
    family = PhaseFamily(args.family)
    cells = phase_grid(grid_values(args.beta), grid_values(args.alpha), family, args.tol)
    config = _run_config(args, seed, None, family=family.value, beta=args.beta, alpha=args.alpha, tol=args.tol)
    _emit_table(args, config, phase_csv(cells), {"cells": phase_records(cells)})


def cmd_sweep(args: argparse.Namespace) -> None:
    seed = resolve_seed(args.seed)
    methods = parse_methods(args.method)
    axes = {
        "n": _int_list(args.n),
        "k_r": _int_list(args.k_r),
        "k_l": _int_list(args.k_l),
        "p": _float_list(args.p),
        "q": _float_list(args.q),
    }
    grid = []
    for n, k_r, k_l, p, q in itertools.product(*axes.values()):
        try:
            grid.append(ModelParams.create(n=n, k_r=k_r, k_l=k_l, p=p, q=q))
        except ParameterError as e:
            logger.warning(f"sweep: skipping invalid cell ({n}, {k_r}, {k_l}, {p}, {q}): {e}")

    runner = SweepRunner(_options(args, seed), args.confidence)
    rows = runner.run(grid, methods, args.trials, Seed(root=seed))
    config = _run_config(args, seed, axes, methods, trials=args.trials, timings=args.timings)
    _emit_table(args, config, sweep_csv(rows, args.timings), {"rows": sweep_records(rows, args.timings)})


# ---------- Parser ----------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=settings.default_seed, help="Root seed (integer) or 'random'")
    common.add_argument("--threads", type=int, default=settings.threads)
    common.add_argument("--out", type=Path, default=None, help="Output path (default: stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    common.add_argument("--config", type=Path, default=None, help="JSON file of flag defaults")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")
    common.add_argument("--scan-cap", dest="scan_cap", type=int, default=settings.scan_cap)
    common.add_argument("--enum-cap", dest="enum_cap", type=int, default=settings.enum_cap)
    common.add_argument("--pair-cap", dest="pair_cap", type=int, default=settings.pair_cap)
    common.add_argument("--ldlr-budget", dest="ldlr_budget", type=int, default=settings.ldlr_budget)
    common.add_argument("--restarts", type=int, default=settings.greedy_restarts)
    common.add_argument("--confidence", type=float, default=settings.confidence_level)
    common.add_argument("--timings", action="store_true", help="Include wall times in sweep output")
    return common


def _model_parser(list_valued: bool = False) -> argparse.ArgumentParser:
    model = argparse.ArgumentParser(add_help=False)
    int_type = str if list_valued else int
    float_type = str if list_valued else float
    model.add_argument("--n", type=int_type, default=None)
    model.add_argument("--kr", dest="k_r", type=int_type, default=None)
    model.add_argument("--kl", dest="k_l", type=int_type, default=None)
    model.add_argument("--p", type=float_type, default=None)
    model.add_argument("--q", type=float_type, default=None)
    return model


def build_parser(config_defaults: Optional[Dict[str, Any]] = None) -> argparse.ArgumentParser:
    common = _common_parser()
    model = _model_parser()
    model_lists = _model_parser(list_valued=True)

    parser = argparse.ArgumentParser(prog="pdbs", description="Planted dense bipartite subgraph detection lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common, model], help="Sample a graph and write it as an edge list")
    p.add_argument("--null", action="store_true", help="Sample G(n,q) instead of the planted model")
    p.add_argument("--union", action="store_true", help="Use the G(n,q) ∪ K^{p'} construction")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("detect", parents=[common, model], help="Run one test on a provided or sampled graph")
    p.add_argument("--in", dest="input", type=Path, default=None, help="Edge-list file")
    p.add_argument("--method", default="scan")
    p.set_defaults(handler=cmd_detect)

    p = sub.add_parser("risk", parents=[common, model], help="Monte Carlo risk of one or more tests")
    p.add_argument("--method", default="count", help="Comma-separated methods")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(handler=cmd_risk)

    p = sub.add_parser("oracle", parents=[common, model], help="Exact second moment, Bayes risk and lower bound")
    p.add_argument("--bruteforce", action="store_true", help="Also enumerate placement pairs")
    p.add_argument("--skip-bayes", dest="skip_bayes", action="store_true")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("lowdeg", parents=[common, model], help="Low-degree likelihood ratio norm")
    p.add_argument("--degree", type=int, default=None, help="Degree cap D (default kR*kL)")
    p.add_argument("--curve", action="store_true", help="Report every D from 0 to --degree")
    p.add_argument("--lam", type=float, default=None, help="Override chi2(p||q)")
    p.add_argument("--no-prune", dest="prune", action="store_false")
    p.set_defaults(handler=cmd_lowdeg)

    p = sub.add_parser("phase", parents=[common], help="Label a (beta, alpha) grid")
    p.add_argument("--family", choices=[f.value for f in PhaseFamily], default=PhaseFamily.BALANCED.value)
    p.add_argument("--beta", default="0:0.95:0.05", help="start:stop:step, stop inclusive")
    p.add_argument("--alpha", default="0:2:0.1")
    p.add_argument("--tol", type=float, default=settings.boundary_tol)
    p.set_defaults(handler=cmd_phase)

    p = sub.add_parser("sweep", parents=[common, model_lists], help="Risk estimates over a parameter grid")
    p.add_argument("--method", default="count,degree", help="Comma-separated methods")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(handler=cmd_sweep)

    if config_defaults:
        for subparser in sub.choices.values():
            subparser.set_defaults(**config_defaults)
    return parser


def load_config_file(argv: Sequence[str]) -> Dict[str, Any]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return {}
    try:
        data = orjson.loads(known.config.read_bytes())
    except OSError as e:
        raise ParameterError(f"cannot read config file {known.config}: {e}")
    except orjson.JSONDecodeError as e:
        raise ParameterError(f"config file {known.config} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ParameterError(f"config file {known.config} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items() if k not in RESERVED_CONFIG_KEYS}


def configure_logging(args: argparse.Namespace) -> None:
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S", stream=sys.stderr, force=True)


def _report(code: str, message: Any) -> None:
    print(f"{code}: {message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config_defaults = load_config_file(argv)
    except ParameterError as e:
        _report(e.code, e)
        return EXIT_USAGE

    parser = build_parser(config_defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code in (0, None):
            return EXIT_OK
        _report("E_USAGE", "invalid command line")
        return EXIT_USAGE

    configure_logging(args)
    try:
        args.handler(args)
    except PDBSError as e:
        _report(e.code, e)
        for cls, code in EXIT_CODES.items():
            if isinstance(e, cls):
                return code
        return EXIT_FAILURE
    except OSError as e:
        _report("E_IO", e)
        return EXIT_FAILURE
    except Exception as e:
        logger.exception(f"Unhandled error in '{args.command}'")
        _report("E_INTERNAL", e)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

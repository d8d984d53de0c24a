"""Command-line front end: norms, estimates, oracles, check suites and experiments.

Every run writes one report document {"version", "config", "results",
"wall_ms", "status"}. Exit codes: 0 when everything passed, 1 on a failed
check or an inverted bracket, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

from . import __version__
from .documents import DocumentError, parse_family_document, parse_operator_document, render_csv, render_json, write_atomic
from .estimators import (
    BudgetExceeded,
    GridConfig,
    SearchConfig,
    brute_force_oracle,
    dp_via_adjoint,
    lower_bound_search,
    pi_q_oracle,
    pietsch_upper_bound,
)
from .operators import HomogeneousPolynomial, LinearOperator, polarize
from .seqnorms import FunctionalFamily, VectorFamily, cohen_seq_norm, strong_lp_norm, weak_lp_norm
from .spaces import Exponent, conjugate_exponent
from .suites import DEFAULT_TRIALS, SUITES, CheckSettings, gamma_collapse_experiment, run_suite

__all__ = ["run", "main", "RunConfig", "UsageError"]

SEED_ENV = "COHEN_NORMS_SEED"
SUBCOMMANDS = {
    "norm": ("strong", "weak", "cohen"),
    "estimate": ("dp", "coh", "mcoh", "poly"),
    "oracle": ("pi", "adjoint-dp", "brute"),
    "suite": tuple(SUITES) + ("all",),
    "experiment": ("gamma",),
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    target: str
    op: str | None = None
    family: str | None = None
    p: float | None = None
    pstar: float | None = None
    flavor: str | None = None
    m: int | None = None
    restarts: int | None = None
    iters: int | None = None
    grid: int | None = None
    seed: int = 0
    trials: int | None = None
    pairs: str | None = None
    format: str = "json"

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command", "target"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cohen-norms", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command, targets in SUBCOMMANDS.items():
        sp = sub.add_parser(command)
        sp.add_argument("target", choices=targets)
        sp.add_argument("--op", help="operator document (JSON)")
        sp.add_argument("--family", help="family document (JSON)")
        sp.add_argument("--p", type=str, help="summing exponent, a number or 'inf'")
        sp.add_argument("--pstar", type=str, help="conjugate exponent")
        sp.add_argument("--flavor", help="norm flavor for the grid oracle")
        sp.add_argument("--m", type=int, help="family length")
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--iters", type=int)
        sp.add_argument("--grid", type=int, help="grid size (points per grid, or oracle resolution)")
        sp.add_argument("--seed", type=str, help=f"master seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--trials", type=int, help="instances per check (suites)")
        sp.add_argument("--pairs", help="(r,q) pairs for the gamma experiment, e.g. '1,2;1.2,3'")
        sp.add_argument("--out", help="report path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"))
        sp.add_argument("--config", help="JSON file of defaults for the flags above")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for suites")
        sp.add_argument("--timing", action="store_true", help="record wall time in the report")
    return parser


def _exponent(text, name) -> float:
    try:
        return float(Exponent(text))
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"--{name}: {e}") from None


def _seed(value) -> int:
    try:
        seed = int(str(value), 0)
    except ValueError:
        raise UsageError(f"--seed must be an integer, got {value!r}") from None
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    return seed


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    file_values: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as e:
            raise UsageError(f"cannot read config {args.config}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"{args.config}: line {e.lineno}, column {e.colno}: {e.msg}") from None
        if not isinstance(file_values, dict):
            raise UsageError(f"{args.config}: top level must be an object")
        unknown = set(file_values) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {sorted(unknown)}")

    def pick(name):
        flag = getattr(args, name, None)
        return flag if flag is not None else file_values.get(name)

    cfg = RunConfig(command=args.command, target=args.target)
    for name in ("op", "family", "flavor", "pairs", "format"):
        value = pick(name)
        if value is not None:
            setattr(cfg, name, value)
    for name in ("m", "restarts", "iters", "grid", "trials"):
        value = pick(name)
        if value is not None:
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise UsageError(f"--{name} must be a positive integer, got {value!r}")
            setattr(cfg, name, value)
    # checks run many small instances, so suites default to lighter searches
    light = cfg.command in ("suite", "experiment")
    defaults = CheckSettings() if light else None
    if cfg.restarts is None:
        cfg.restarts = defaults.search.restarts if light else 8
    if cfg.iters is None:
        cfg.iters = defaults.search.iters if light else 30
    if cfg.grid is None:
        cfg.grid = defaults.grids.phi_grid if light else 64
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"--format must be json or csv, got {cfg.format!r}")
    seed = pick("seed")
    if seed is None:
        seed = os.environ.get(SEED_ENV, 0)
    cfg.seed = _seed(seed)

    p, pstar = pick("p"), pick("pstar")
    if p is not None:
        cfg.p = _exponent(p, "p")
    if pstar is not None:
        cfg.pstar = _exponent(pstar, "pstar")
    if cfg.p is not None and cfg.pstar is not None:
        if not math.isclose(float(conjugate_exponent(cfg.p)), cfg.pstar, rel_tol=1e-12):
            raise UsageError(f"--p {cfg.p} and --pstar {cfg.pstar} are not conjugate")
    elif cfg.pstar is not None:
        cfg.p = float(conjugate_exponent(cfg.pstar))
    elif cfg.p is not None:
        cfg.pstar = float(conjugate_exponent(cfg.p))
    return cfg


def _load_operator(cfg: RunConfig, warnings: list):
    if not cfg.op:
        raise UsageError(f"{cfg.command} {cfg.target} needs --op")
    text = _read(cfg.op)
    try:
        parsed = parse_operator_document(text)
    except DocumentError as e:
        raise UsageError(f"{cfg.op}: {e}") from None
    warnings.extend(parsed.warnings)
    return parsed.operator


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except UnicodeDecodeError as e:
        raise UsageError(f"{path}: not UTF-8 text ({e.reason})") from None


def _need_p(cfg: RunConfig) -> float:
    if cfg.p is None:
        raise UsageError(f"{cfg.command} {cfg.target} needs --p or --pstar")
    return cfg.p


def _search(cfg: RunConfig) -> SearchConfig:
    return SearchConfig(m=cfg.m, restarts=cfg.restarts, iters=cfg.iters, seed=cfg.seed)


def _grids(cfg: RunConfig) -> GridConfig:
    return GridConfig(phi_grid=cfg.grid, psi_grid=cfg.grid, seed=cfg.seed)


def _bracket_row(name, lower, upper, **extra) -> dict:
    inverted = lower is not None and upper is not None and lower > upper * (1 + 1e-9) + 1e-12
    return {"name": name, "lower": lower, "upper": upper, "inverted": inverted, **extra}


def cmd_norm(cfg: RunConfig, warnings) -> list[dict]:
    if not cfg.family:
        raise UsageError("norm needs --family")
    try:
        fam = parse_family_document(_read(cfg.family))
    except DocumentError as e:
        raise UsageError(f"{cfg.family}: {e}") from None
    p = _need_p(cfg)
    if cfg.target == "weak":
        funcs = fam.as_functionals() if isinstance(fam, VectorFamily) else fam
        return [{"name": "norm/weak", "value": weak_lp_norm(funcs, p, seed=cfg.seed)}]
    if isinstance(fam, FunctionalFamily):
        raise UsageError(f"norm {cfg.target} needs a vector family")
    if cfg.target == "strong":
        return [{"name": "norm/strong", "value": strong_lp_norm(fam, p)}]
    value = cohen_seq_norm(fam, p, restarts=cfg.restarts, iters=cfg.iters, seed=cfg.seed)
    return [{"name": "norm/cohen", "lower": value}]


def _upper(op, p, cfg: RunConfig) -> float:
    kind = "poly" if isinstance(op, HomogeneousPolynomial) else "dp" if op.degree == 1 else "coh"
    up = pietsch_upper_bound(op, kind, p, _grids(cfg)).upper
    if kind == "dp" and 1 < p < math.inf:
        up = min(up, dp_via_adjoint(op, p, _grids(cfg), _search(cfg)).upper)
    return up


def cmd_estimate(cfg: RunConfig, warnings) -> list[dict]:
    op = _load_operator(cfg, warnings)
    p = _need_p(cfg)
    flavor = cfg.target
    is_poly = isinstance(op, HomogeneousPolynomial)
    if flavor == "poly" and not is_poly:
        raise UsageError("estimate poly needs a polynomial document")
    if flavor in ("dp", "coh") and is_poly:
        raise UsageError(f"estimate {flavor} needs a linear or multilinear document")
    if flavor == "dp" and op.degree != 1:
        raise UsageError("estimate dp needs a linear operator")
    search_flavor = "dp" if flavor == "coh" and op.degree == 1 else flavor
    lower = lower_bound_search(op, search_flavor, p, _search(cfg)).lower
    if flavor == "mcoh":
        # the Cohen bound majorises the multiple norm (of the polar, for polynomials)
        upper = _upper(polarize(op) if is_poly else op, p, cfg)
    else:
        upper = _upper(op, p, cfg)
    return [_bracket_row(f"estimate/{flavor}", lower, upper)]


def cmd_oracle(cfg: RunConfig, warnings) -> list[dict]:
    op = _load_operator(cfg, warnings)
    p = _need_p(cfg)
    if cfg.target in ("pi", "adjoint-dp"):
        if not isinstance(op, LinearOperator):
            raise UsageError(f"oracle {cfg.target} needs a linear operator")
        if not 1 < p < math.inf:
            raise UsageError(f"oracle {cfg.target} needs 1 < p < inf")
        fn = pi_q_oracle if cfg.target == "pi" else dp_via_adjoint
        b = fn(op, p, _grids(cfg), _search(cfg))
        return [_bracket_row(f"oracle/{cfg.target}", b.lower, b.upper)]
    if cfg.flavor is not None:
        flavor = cfg.flavor
    else:
        flavor = "poly" if isinstance(op, HomogeneousPolynomial) else "dp" if op.degree == 1 else "coh"
    value = brute_force_oracle(op, flavor, p, resolution=cfg.grid, m=cfg.m or 2)
    return [{"name": f"oracle/brute/{flavor}", "value": value}]


def _settings(cfg: RunConfig) -> CheckSettings:
    base = CheckSettings()
    search = SearchConfig(
        restarts=cfg.restarts, iters=cfg.iters, inner_restarts=base.search.inner_restarts
    )
    grids = GridConfig(phi_grid=cfg.grid, psi_grid=cfg.grid, rounds=base.grids.rounds, ascent_iters=base.grids.ascent_iters)
    return CheckSettings(search=search, grids=grids)


def _check_rows(results) -> list[dict]:
    return [r.to_dict() for r in results]


def cmd_suite(cfg: RunConfig, warnings, workers: int) -> list[dict]:
    names = list(SUITES) if cfg.target == "all" else [cfg.target]
    settings = _settings(cfg)
    rows = []
    for name in names:
        trials = cfg.trials or DEFAULT_TRIALS[name]
        rows.extend(_check_rows(run_suite(name, trials, cfg.seed, workers, settings)))
    return sorted(rows, key=lambda r: r["name"])


def _pairs(cfg: RunConfig, p: float) -> list[tuple[float, float]]:
    if cfg.pairs is None:
        pstar = float(conjugate_exponent(p))
        qs = [p, p + 1, p + 2] if math.isfinite(p) else [math.inf]
        return [(1.0 / (1.0 / q + 1.0 / pstar), q) for q in qs]
    out = []
    for chunk in cfg.pairs.split(";"):
        try:
            r, q = (float(Exponent(x)) for x in chunk.split(","))
        except ValueError:
            raise UsageError(f"--pairs: cannot read {chunk!r}; expected 'r,q;r,q'") from None
        out.append((r, q))
    return out


def cmd_experiment(cfg: RunConfig, warnings) -> list[dict]:
    op = _load_operator(cfg, warnings)
    if not isinstance(op, LinearOperator):
        raise UsageError("experiment gamma needs a linear operator")
    if cfg.pstar is None:
        raise UsageError("experiment gamma needs --pstar (or --p)")
    p = float(conjugate_exponent(cfg.pstar))
    pairs = _pairs(cfg, p)
    res, table = gamma_collapse_experiment(op, cfg.pstar, pairs, _settings(cfg), cfg.seed)
    row = res.to_dict()
    row["table"] = table
    row["dp_bracket"] = [res.details["dp_lower"], res.details["dp_upper"]]
    return [row]


def _status(rows: list[dict]) -> str:
    bad = any(r.get("passed") is False or r.get("inverted") is True for r in rows)
    return "fail" if bad else "pass"


def run(argv=None) -> int:
    """Entry point; returns the exit code instead of exiting."""
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        if args.workers < 1:
            raise UsageError("--workers must be a positive integer")
        warnings: list[str] = []
        if cfg.command == "norm":
            rows = cmd_norm(cfg, warnings)
        elif cfg.command == "estimate":
            rows = cmd_estimate(cfg, warnings)
        elif cfg.command == "oracle":
            rows = cmd_oracle(cfg, warnings)
        elif cfg.command == "suite":
            rows = cmd_suite(cfg, warnings, args.workers)
        else:
            rows = cmd_experiment(cfg, warnings)
    except UsageError as e:
        print(f"cohen-norms: error: {e}", file=sys.stderr)
        return 2
    except (BudgetExceeded, ValueError) as e:
        print(f"cohen-norms: error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)

    for w in warnings:
        print(f"cohen-norms: warning: {w}", file=sys.stderr)
    status = _status(rows)
    report = {
        "version": __version__,
        "config": cfg.echo(),
        "results": rows,
        "wall_ms": round((time.perf_counter() - start) * 1000.0, 3) if args.timing else None,
        "status": status,
    }
    if warnings:
        report["warnings"] = warnings
    text = render_json(report) if cfg.format == "json" else render_csv(rows)
    if args.out:
        try:
            write_atomic(args.out, text)
        except OSError as e:
            print(f"cohen-norms: error: cannot write {args.out}: {e.strerror}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0 if status == "pass" else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

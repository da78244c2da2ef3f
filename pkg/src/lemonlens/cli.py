"""Command-line entry point: ``lemonlens <subcommand> [options]``.

Exit codes: 0 success, 1 reproduction failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from . import pricing, reproduce, welfare
from .dist import check_regular, check_weak_regularity, from_spec
from .errors import ConfigError, LemonLensError, NumericalError
from .info import (
    InfoStructure,
    disclosure_equilibria,
    expected_welfare,
    garble_chain,
    persuasion_check,
    posterior_means,
)
from .scenario import MarketScenario, PosteriorMeanDistribution

SCHEMA_ID = "lemonlens/v1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def load_schema(name: str) -> dict:
    return json.loads(resources.files("lemonlens.schemas").joinpath(name).read_text())


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def dump_json(obj: dict) -> str:
    jsonschema.validate(obj, load_schema("report.schema.json"))
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def read_config(path: str) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(load_schema("config.schema.json"))
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{path}: field '{where}': {err.message}")
        raise ConfigError("\n".join(lines))
    return cfg


def scenario_from_config(cfg: dict[str, Any]) -> MarketScenario:
    prior = None
    if "prior" in cfg:
        prior = PosteriorMeanDistribution.from_pairs(tuple(a) for a in cfg["prior"])
    return MarketScenario(
        float(cfg["q_lo"]), float(cfg["q_hi"]), float(cfg["cost"]), from_spec(cfg["dist"]), prior
    )


def apply_tolerances(cfg: dict[str, Any], args) -> None:
    tol = cfg.get("tolerances", {})
    if "root" in tol:
        pricing.ROOT_TOL = tol["root"]
    if "quad" in tol:
        welfare.QUAD_TOL = tol["quad"]
    if getattr(args, "tol", None) is not None:
        welfare.QUAD_TOL = args.tol


def emit(args, files: dict[str, str], primary: str) -> None:
    """Write every output under ``--out`` or print the primary one."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    else:
        sys.stdout.write(files[primary])


def _grid(cfg, args, key, default):
    if getattr(args, "grid", None) is not None:
        return args.grid
    return cfg.get("grid", {}).get(key, default)


def cmd_analyze(args) -> int:
    cfg = read_config(args.config)
    apply_tolerances(cfg, args)
    s = scenario_from_config(cfg)
    weak, _ = check_weak_regularity(s.dist, 1000)
    if not weak:
        raise NumericalError("distribution violates weak regularity; posted price not unique")
    kres = welfare.compute_k(s.dist, cfg.get("grid", {}).get("k_resolution", 100_000))
    rep = welfare.check_conditions(s, _grid(cfg, args, "conditions", 1000))
    report = {
        "schema": SCHEMA_ID,
        "kind": "analyze",
        **kres.to_json(),
        **rep.to_json(),
        "sufficient": welfare.sufficient_check(s, kres),
        "weak_regularity": weak,
        "regular_advisory": check_regular(s.dist),
        "scenario": {"dist": s.dist.to_spec(), "q_lo": s.q_lo, "q_hi": s.q_hi, "cost": s.cost},
    }
    sched = pricing.price_schedule(s, cfg.get("grid", {}).get("schedule", 100))
    files = {"report.json": dump_json(report), "schedule.csv": pricing.schedule_to_csv(sched)}
    emit(args, files, "schedule.csv" if args.format == "csv" else "report.json")
    return EXIT_OK


def _direction(values: list[float], tol: float = 1e-9) -> str:
    # rows run from most informative (step 0) to least; report the trend toward the spread
    diffs = [a - b for a, b in zip(values, values[1:])]
    if all(abs(d) <= tol for d in diffs):
        return "constant"
    if all(d >= -tol for d in diffs):
        return "increasing"
    if all(d <= tol for d in diffs):
        return "decreasing"
    return "mixed"


def cmd_compare(args) -> int:
    cfg = read_config(args.config)
    apply_tolerances(cfg, args)
    s = scenario_from_config(cfg)
    if s.prior is None:
        raise ConfigError(f"{args.config}: field 'prior' is required for compare")
    steps = args.steps if args.steps is not None else cfg.get("steps", len(s.prior) - 1)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    chain = garble_chain(s.prior, steps, seed)
    rows = [expected_welfare(s, mu) for mu in chain]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "e_rev", "e_cs", "e_ts", "e_price"])
    for i, r in enumerate(rows):
        w.writerow([i, fmt(r.e_rev), fmt(r.e_cs), fmt(r.e_ts), fmt(r.e_price)])
    verdicts = {
        key: _direction([getattr(r, key) for r in rows]) for key in ("e_rev", "e_cs", "e_ts", "e_price")
    }
    summary = {
        "schema": SCHEMA_ID,
        "kind": "compare",
        "steps": steps,
        "seed": seed,
        "verdicts": verdicts,
        "rows": [{"step": i, "atoms": [list(a) for a in mu.atoms]} for i, mu in enumerate(chain)],
    }
    files = {"chain.csv": buf.getvalue(), "compare.json": dump_json(summary)}
    emit(args, files, "compare.json" if args.format == "json" else "chain.csv")
    return EXIT_OK


def cmd_k(args) -> int:
    cfg = read_config(args.config)
    d = from_spec(cfg["dist"])
    res = args.grid or cfg.get("grid", {}).get("k_resolution", 100_000)
    out = {"schema": SCHEMA_ID, "kind": "k", "dist": d.to_spec(), **welfare.compute_k(d, res).to_json()}
    emit(args, {"k.json": dump_json(out)}, "k.json")
    return EXIT_OK


def cmd_persuasion(args) -> int:
    cfg = read_config(args.config)
    apply_tolerances(cfg, args)
    s = scenario_from_config(cfg)
    if s.prior is None:
        raise ConfigError(f"{args.config}: field 'prior' is required for persuasion")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    res = persuasion_check(s, s.prior, cfg.get("contractions", 200), seed)
    out = {
        "schema": SCHEMA_ID,
        "kind": "persuasion",
        "optimal_is_full": res.optimal_is_full,
        "max_gap": res.max_gap,
        "samples": res.samples,
        "identical": res.identical,
    }
    emit(args, {"persuasion.json": dump_json(out)}, "persuasion.json")
    return EXIT_OK


def cmd_disclosure(args) -> int:
    cfg = read_config(args.config)
    apply_tolerances(cfg, args)
    s = scenario_from_config(cfg)
    if "info" not in cfg:
        raise ConfigError(f"{args.config}: field 'info' is required for disclosure")
    info = InfoStructure.from_json(cfg["info"])
    eqs = disclosure_equilibria(s, info)
    target = posterior_means(info)
    out = {
        "schema": SCHEMA_ID,
        "kind": "disclosure",
        "unraveling": bool(eqs) and all(e.induced.close_to(target) for e in eqs),
        "equilibria": [
            {
                "strategy": e.strategy,
                "posterior_means": e.posterior_means,
                "off_path_belief": e.off_path_belief,
                "induced": [list(a) for a in e.induced.atoms],
            }
            for e in eqs
        ],
    }
    emit(args, {"disclosure.json": dump_json(out)}, "disclosure.json")
    return EXIT_OK


def _sweep_cell(job):
    a, b, q_lo, q_hi, c, grid = job
    from .dist import Beta

    s = MarketScenario(q_lo, q_hi, c, Beta(a, b))
    rep = welfare.check_conditions(s, grid)
    return [fmt(a), fmt(b), fmt(q_lo), fmt(q_hi), fmt(c), rep.buyer_holds, rep.total_holds]


def cmd_sweep(args) -> int:
    """Explore the total-payoff condition across Beta(a, b) families.

    An exploration table only; no claim is asserted.
    """
    params = [0.5, 1.0, 2.0, 3.0, 5.0, 8.0]
    shapes = [(1.5, 2.0), (2.0, 4.0), (5.0, 20.0), (1.1, 50.0)]
    grid = args.grid or 200
    jobs = [(a, b, lo, hi, 1.0, grid) for a in params for b in params for lo, hi in shapes]
    threads = int(os.environ.get("LEMONLENS_THREADS", "1"))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "beta", "q_lo", "q_hi", "cost", "buyer_holds", "total_holds"])
    w.writerows(rows)
    emit(args, {"sweep.csv": buf.getvalue()}, "sweep.csv")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    try:
        rows = reproduce.run(args.only, args.grid or 100_000)
    except KeyError:
        print(f"unknown --only filter {args.only!r}; choose from {', '.join(reproduce.GROUPS)}",
              file=sys.stderr)
        return EXIT_CONFIG
    width = max(len(r.name) for r in rows)
    print(f"{'check':<{width}}  {'expected':>12}  {'computed':>12}  {'tolerance':>10}  result")
    for r in rows:
        print(f"{r.name:<{width}}  {r.expected:>12}  {r.computed:>12}  {r.tolerance:>10}  "
              f"{'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lemonlens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--grid", type=int, metavar="N")
        p.add_argument("--tol", type=float, metavar="X")
        p.add_argument("--format", choices=["json", "csv"])
        return p

    common(sub.add_parser("analyze", help="conditions, k and price schedule")).set_defaults(fn=cmd_analyze)
    p = common(sub.add_parser("compare", help="welfare along a garbling chain"))
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_compare)
    common(sub.add_parser("k", help="k threshold of the type distribution")).set_defaults(fn=cmd_k)
    p = common(sub.add_parser("persuasion", help="sampled check that full disclosure is optimal"))
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_persuasion)
    common(sub.add_parser("disclosure", help="enumerate disclosure-game equilibria")).set_defaults(
        fn=cmd_disclosure
    )
    common(sub.add_parser("sweep", help="Beta-family sweep of the welfare conditions"), config=False
           ).set_defaults(fn=cmd_sweep)
    p = common(sub.add_parser("reproduce", help="re-run the published worked examples"), config=False)
    p.add_argument("--only", metavar="NAME")
    p.set_defaults(fn=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, LemonLensError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

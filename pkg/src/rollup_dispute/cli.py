"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, economics, verify
from .config import AnalysisOptions, config_to_dict, load_config
from .errors import ConfigInvalid, DegenerateStats
from .ledger import format_tokens
from .sim import ScenarioConfig, TrialResult, aggregate, predictions, run_monte_carlo, run_trials, verify_against_analytic

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
OUT_DIR_ENV = "ROLLUP_DISPUTE_OUT"
CSV_COLUMNS = ("trial", "scenario", "proposer_net", "winner_id", "entrants", "auction_price", "fund_delta")
SWEEP_PARAMS = ("n", "alpha", "mu", "c")


class IOFailure(Exception):
    pass


def analyze(config: ScenarioConfig, analysis: AnalysisOptions) -> dict[str, Any]:
    p = config.params
    reward = economics.reward_pot(p)
    rows = []
    for n in analysis.n_grid:
        e_max, e_second = economics.expected_order_stats(n, p.mu)
        rows.append({
            "n": n,
            "expected_max": e_max,
            "expected_second": e_second,
            "expected_surplus": economics.expected_surplus(n, p.mu),
            "participation_beneficial": economics.participation_beneficial(p.mu, p.c, n),
            "participation_threshold_mu": p.c * (n + 1),
            "expected_second_bid": economics.expected_second_bid(reward, p.mu, n),
            "net_loss": economics.proposer_expected_net_loss(p.alpha, p.proposer_deposit, p.mu, n),
        })
    return {
        "reward_pot": reward,
        "scenario1_cost": economics.scenario1_cost(p.alpha, p.proposer_deposit),
        "k0": analysis.k0,
        "marginal_entry_beneficial": economics.marginal_entry_beneficial(p.mu, p.c, analysis.k0),
        "entrants": economics.equilibrium_entrants(p.mu, p.c, analysis.k0),
        "grid": rows,
    }


def _price_cell(r: TrialResult) -> str:
    return "" if r.auction_price is None else format_tokens(r.auction_price)


def trials_csv(results: Sequence[TrialResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerow([
            r.trial,
            r.scenario,
            format_tokens(r.proposer_net),
            "" if r.winner_id is None else r.winner_id,
            r.entrants,
            _price_cell(r),
            format_tokens(r.fund_delta),
        ])
    return buf.getvalue()


def trials_json(results: Sequence[TrialResult]) -> str:
    rows = [
        {
            "trial": r.trial,
            "scenario": r.scenario,
            "proposer_net": format_tokens(r.proposer_net),
            "winner_id": r.winner_id,
            "entrants": r.entrants,
            "auction_price": _price_cell(r) or None,
            "fund_delta": format_tokens(r.fund_delta),
        }
        for r in results
    ]
    return json.dumps(rows, sort_keys=True, indent=1) + "\n"


def manifest(config: ScenarioConfig, results: Sequence[TrialResult]) -> dict[str, Any]:
    stats = aggregate(config, results)
    metrics, verdicts = {}, {}
    for name, s in stats.metrics.items():
        metrics[name] = dataclasses.asdict(s)
        if s.prediction is not None:
            try:
                v = verify_against_analytic(s, atol=1e-9)
                verdicts[name] = {"passed": v.passed, "z": v.z}
            except DegenerateStats:
                verdicts[name] = {"passed": False, "z": None}
    return {
        "tool": "rollup-dispute",
        "version": __version__,
        "master_seed": config.master_seed,
        "config": config_to_dict(config),
        "trials": stats.trials,
        "metrics": metrics,
        "verdicts": verdicts,
    }


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from None


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_DIR_ENV) or ".")


def cmd_analyze(args: argparse.Namespace) -> int:
    config, analysis = load_config(args.config)
    text = _dumps(analyze(config, analysis))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config, _ = load_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        config = dataclasses.replace(config, **overrides)
    results = run_trials(config, workers=args.workers)
    out = _out_dir(args.out)
    if args.format == "csv":
        _write(out / "trials.csv", trials_csv(results))
    else:
        _write(out / "trials.json", trials_json(results))
    man = manifest(config, results)
    _write(out / "manifest.json", _dumps(man))
    for name, s in sorted(man["metrics"].items()):
        print(f"{name}: mean={s['mean']:.9g} se={s['stderr']:.3g}")
    return EXIT_OK


def sweep_values(param: str, start: float, stop: float, steps: int) -> list[float]:
    if steps < 1:
        raise ConfigInvalid("--steps: must be >= 1")
    values = [start] if steps == 1 else list(np.linspace(start, stop, steps))
    if param == "n":
        return [int(round(v)) for v in values]
    return [float(v) for v in values]


def _with_param(config: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    if param == "n":
        return dataclasses.replace(config, n_validators=int(value))
    field = {"alpha": "reward_fraction", "mu": "valuation_dispersion", "c": "participation_cost"}[param]
    try:
        params = dataclasses.replace(config.params, **{field: value})
    except ValueError as exc:
        raise ConfigInvalid(f"--param {param}={value}: {exc}") from None
    return dataclasses.replace(config, params=params)


def cmd_sweep(args: argparse.Namespace) -> int:
    config, _ = load_config(args.config)
    if args.trials is not None:
        config = dataclasses.replace(config, trials=args.trials)
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("param", "value", "analytic_loss", "simulated_loss", "stderr", "z"))
    for value in sweep_values(args.param, args.start, args.stop, args.steps):
        cfg = _with_param(config, args.param, value)
        stats = run_monte_carlo(cfg, workers=args.workers)["proposer_loss"]
        analytic = predictions(cfg).get("proposer_loss")
        z = "" if stats.z is None else f"{stats.z:.4f}"
        w.writerow((args.param, value, "" if analytic is None else f"{analytic:.9f}", f"{stats.mean:.9f}", f"{stats.stderr:.3g}", z))
    if args.out:
        _write(Path(args.out), buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for suite in suites:
        for check in verify.run_suite(suite, args.seed, args.trials):
            print(check.line())
            ok &= check.passed
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rollup-dispute", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="closed-form report for a config")
    a.add_argument("config")
    a.add_argument("--out", help="write the JSON report here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run Monte Carlo trials and write CSV/JSON plus a manifest")
    s.add_argument("config")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="analytic vs simulated proposer loss over one parameter")
    w.add_argument("config")
    w.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    w.add_argument("--from", dest="start", type=float, required=True)
    w.add_argument("--to", dest="stop", type=float, required=True)
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--trials", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--out")
    w.add_argument("--workers", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=(*verify.SUITES, "all"), required=True)
    v.add_argument("--seed", type=int, default=20240601)
    v.add_argument("--trials", type=int, help="override the suite's trial count")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

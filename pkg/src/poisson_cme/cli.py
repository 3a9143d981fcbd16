"""Command-line entry point: ``poisson-cme {figures,conjugacy,stability,oracle}``.

Exit codes: 0 success (or bound holds), 1 bound violated / oracle mismatch,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .conjugacy import corollary_check, estimator_of_prior
from .core import DiscretePrior, DomainError, GammaProductPrior, PoissonChannel
from .dark_current import ScalarDcModel, figure_csv, figure_data
from .gaussian import GaussianModel, check_theorem4
from .montecarlo import ConfigurationError, MonteCarloConfig
from .oracles import SUITES, run_suites
from .stability import CharGrid, check_theorem2, default_char_grid, moment_matched_gamma

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
DEFAULT_PER_AXIS = 41


class UsageError(Exception):
    pass


def _common_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out-dir", type=Path, default=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="poisson-cme", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figures", parents=[common], help="conditional-mean series with dark current")
    fig.add_argument("--alpha", type=float, required=True)
    fig.add_argument("--a", type=float, required=True)
    fig.add_argument("--lambda", dest="lambdas", type=float, action="append", required=True)
    fig.add_argument("--kmax", type=int, required=True)

    conj = sub.add_parser("conjugacy", parents=[common], help="gamma prior <-> linear estimator")
    conj.add_argument("input", type=Path)

    stab = sub.add_parser("stability", parents=[common], help="near-linearity vs near-conjugacy check")
    stab.add_argument("config", type=Path)
    stab.add_argument("--samples", type=int, default=None)

    orc = sub.add_parser("oracle", parents=[common], help="randomized identity cross-checks")
    orc.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    orc.add_argument("--trials", type=int, default=200)
    return parser


def _write(out_dir: Path | None, name: str, text: str) -> Path | None:
    if out_dir is None:
        return None
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def cmd_figures(args) -> int:
    if args.kmax < 0:
        raise UsageError("--kmax: kmax must be >= 0")
    out_dir = getattr(args, "out_dir", Path("."))
    for lam in args.lambdas:
        try:
            model = ScalarDcModel(args.alpha, args.a, lam)
        except DomainError as exc:
            flag = {"alpha": "--alpha", "a": "--a", "lambda": "--lambda"}[str(exc).split()[0]]
            raise UsageError(f"{flag}: {exc}") from exc
        rows = figure_data(model, args.kmax)
        path = _write(out_dir, f"fig_lambda_{lam:g}.csv", figure_csv(rows))
        print(f"{path}: {len(rows)} rows")
    return EXIT_OK


def _gamma_from(obj, path: str) -> GammaProductPrior:
    cfg.check_keys(obj, path, {"shape", "rate"}, {"family"})
    shape = cfg.vector(obj["shape"], f"{path}.shape")
    rate = cfg.vector(obj["rate"], f"{path}.rate")
    if len(shape) != len(rate):
        raise cfg.ConfigError(path, "shape and rate lengths differ")
    try:
        return GammaProductPrior.from_arrays(shape, rate)
    except (DomainError, ValueError) as exc:
        raise cfg.ConfigError(path, str(exc)) from exc


def _discrete_from(obj, path: str, signed: bool = False) -> DiscretePrior:
    cfg.check_keys(obj, path, {"family", "atoms", "weights"})
    raw = obj["atoms"]
    if isinstance(raw, list) and raw and not isinstance(raw[0], list):
        atoms = [[v] for v in cfg.vector(raw, f"{path}.atoms")]
    else:
        atoms = cfg.matrix(raw, f"{path}.atoms")
    weights = cfg.vector(obj["weights"], f"{path}.weights")
    if len(weights) != len(atoms):
        raise cfg.ConfigError(f"{path}.weights", "need one weight per atom")
    try:
        return DiscretePrior(np.array(atoms), np.array(weights), signed=signed)
    except (DomainError, ValueError) as exc:
        raise cfg.ConfigError(path, str(exc)) from exc


def _dump(obj, compact: bool = False) -> str:
    if compact:
        return json.dumps(obj, separators=(",", ":")) + "\n"
    return json.dumps(obj, indent=2) + "\n"


def run_conjugacy(data: dict) -> dict:
    cfg.check_version(data)
    mode = cfg.choice(data.get("mode"), "$.mode", {"forward", "check"})
    if mode == "forward":
        cfg.check_keys(data, "$", {"version", "mode", "prior"})
        est = estimator_of_prior(_gamma_from(data["prior"], "$.prior"))
        return {"H": est.h_matrix.tolist(), "c": est.offset.tolist()}
    if "H" in data:
        cfg.check_keys(data, "$", {"version", "mode", "H", "c"})
        h = cfg.matrix(data["H"], "$.H")
        c = cfg.vector(data["c"], "$.c")
        # an estimator of U itself is the channel A = I, lambda = 0
        channel = PoissonChannel(np.eye(len(h)), np.zeros(len(h)))
        c_matrix, b = h, c
    else:
        cfg.check_keys(data, "$", {"version", "mode", "A", "lambda", "C", "b"})
        a = cfg.matrix(data["A"], "$.A")
        lam = cfg.vector(data["lambda"], "$.lambda")
        c_matrix = cfg.matrix(data["C"], "$.C")
        b = cfg.vector(data["b"], "$.b")
        try:
            channel = PoissonChannel(np.array(a), np.array(lam))
        except (DomainError, ValueError) as exc:
            raise cfg.ConfigError("$.A", str(exc)) from exc
    try:
        return corollary_check(channel, c_matrix, b).to_dict()
    except DomainError as exc:
        raise cfg.ConfigError("$", str(exc)) from exc


def cmd_conjugacy(args) -> int:
    report = run_conjugacy(cfg.load_json(args.input))
    text = _dump(report, compact="H" in report)
    sys.stdout.write(text)
    _write(getattr(args, "out_dir", None), "conjugacy.json", text)
    return EXIT_OK


def _grid_from(obj, n: int, path: str) -> CharGrid:
    if obj is None:
        return default_char_grid(n, DEFAULT_PER_AXIS)
    cfg.check_keys(obj, path, set(), {"per_axis", "lo", "hi", "points"})
    try:
        if "points" in obj:
            return CharGrid(np.array(cfg.matrix(obj["points"], f"{path}.points")))
        return default_char_grid(
            n,
            cfg.integer(obj.get("per_axis", DEFAULT_PER_AXIS), f"{path}.per_axis", 2),
            cfg.number(obj.get("lo", 1e-2), f"{path}.lo"),
            cfg.number(obj.get("hi", 1e2), f"{path}.hi"),
        )
    except DomainError as exc:
        raise cfg.ConfigError(path, str(exc)) from exc


def run_stability(data: dict, seed: int | None = None, samples: int | None = None, workers: int = 1):
    """Build and evaluate the check described by a stability config; returns the report."""
    cfg.check_version(data)
    model = cfg.choice(data.get("model"), "$.model", {"poisson", "gaussian"})
    keys = {"version", "model", "prior", "seed", "samples"}
    optional = {"target", "grid"} | ({"A"} if model == "gaussian" else set())
    cfg.check_keys(data, "$", keys, optional)
    seed = cfg.integer(data["seed"], "$.seed", 0) if seed is None else seed
    samples = cfg.integer(data["samples"], "$.samples", 1) if samples is None else samples
    try:
        mc = MonteCarloConfig(seed=seed, samples=samples, workers=workers)
        mc.require_oracle_budget()
    except ConfigurationError as exc:
        raise cfg.ConfigError("$.samples", str(exc)) from exc

    prior_obj = data["prior"]
    if not isinstance(prior_obj, dict):
        raise cfg.ConfigError("$.prior", "expected an object")
    families = {"gamma", "discrete"} if model == "poisson" else {"gaussian", "discrete"}
    family = cfg.choice(prior_obj.get("family"), "$.prior.family", families)

    if model == "poisson":
        prior = (
            _gamma_from(prior_obj, "$.prior")
            if family == "gamma"
            else _discrete_from(prior_obj, "$.prior")
        )
        target_obj = data.get("target", "moment-matched")
        if target_obj == "moment-matched":
            try:
                target = moment_matched_gamma(prior)
            except DomainError as exc:
                raise cfg.ConfigError("$.target", str(exc)) from exc
        else:
            target = _gamma_from(target_obj, "$.target")
        grid = _grid_from(data.get("grid"), prior.dim, "$.grid")
        try:
            return check_theorem2(prior, target, grid, mc)
        except DomainError as exc:
            raise cfg.ConfigError("$", str(exc)) from exc

    if data.get("target", "moment-matched") != "moment-matched":
        raise cfg.ConfigError("$.target", "the gaussian model only supports 'moment-matched'")
    if "A" not in data:
        raise cfg.ConfigError("$.A", "required field missing")
    a = np.array(cfg.matrix(data["A"], "$.A"))
    try:
        if family == "gaussian":
            cfg.check_keys(prior_obj, "$.prior", {"family", "mu", "K"})
            gm = GaussianModel(
                cfg.vector(prior_obj["mu"], "$.prior.mu"), cfg.matrix(prior_obj["K"], "$.prior.K"), a
            )
            prior = None
        else:
            prior = _discrete_from(prior_obj, "$.prior", signed=True)
            gm = GaussianModel.moment_matched(prior, a)
        grid = _grid_from(data.get("grid"), gm.k, "$.grid")
        return check_theorem4(gm, prior, grid, mc)
    except DomainError as exc:
        raise cfg.ConfigError("$", str(exc)) from exc


def cmd_stability(args) -> int:
    report = run_stability(
        cfg.load_json(args.config),
        seed=getattr(args, "seed", None),
        samples=args.samples,
        workers=getattr(args, "workers", 1),
    )
    text = report.to_json(indent=2) + "\n"
    path = _write(getattr(args, "out_dir", None), "stability_report.json", text)
    summary = {k: v for k, v in json.loads(text).items() if k not in ("per_point", "input_bound")}
    sys.stdout.write(_dump(summary))
    if path is not None:
        print(f"report written to {path}")
    return EXIT_OK if report.holds else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials: trials must be >= 1")
    results = run_suites(args.suite, args.trials, getattr(args, "seed", 1))
    lines = "".join(r.line() + "\n" for r in results)
    sys.stdout.write(lines)
    _write(getattr(args, "out_dir", None), "oracle.txt", lines)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


COMMANDS = {
    "figures": cmd_figures,
    "conjugacy": cmd_conjugacy,
    "stability": cmd_stability,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers: workers must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except cfg.ConfigError as exc:
        print(f"poisson-cme {args.command}: config error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Batch command line: ``nestedteam {validate,solve,oracle,compare,simulate,battery}``.

Exit codes: 0 success or match, 1 invalid model, 2 I/O error, 3 resource
bound exceeded, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .dp import DEFAULT_MAX_BELIEFS, Solver, parse_policy
from .errors import ResourceBoundError, TeamModelError, ValidationError
from .model import fmt_rational, load_model
from .oracle import DEFAULT_MAX_PROFILES, Dims, brute_force_optimal, run_battery, simulate
from .prescriptions import DEFAULT_MAX_PRESCRIPTIONS

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_BOUND, EXIT_MISMATCH = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    subcommand: str
    model: str | None = None
    out: str | None = None
    policy: str | None = None
    seed: int = 0
    samples: int = 100_000
    max_beliefs: int = DEFAULT_MAX_BELIEFS
    max_prescriptions: int = DEFAULT_MAX_PRESCRIPTIONS
    max_profiles: int = DEFAULT_MAX_PROFILES
    format: str = "text"
    dims: str = "2,2,2,2,2,2,2,2,1"
    count: int = 50

    def __post_init__(self):
        for name in ("max_beliefs", "max_prescriptions", "max_profiles", "samples", "count"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")


class _Exit(Exception):
    def __init__(self, code, message=""):
        self.code = code
        self.message = message


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None


def _load(cfg: RunConfig):
    if not cfg.model:
        raise _Exit(EXIT_IO, "--model is required")
    try:
        return load_model(_read(cfg.model))
    except ValidationError as exc:
        raise _Exit(EXIT_INVALID, "\n".join(f"invalid: {v}" for v in exc.violations)) from None
    except TeamModelError as exc:
        raise _Exit(EXIT_INVALID, f"invalid: {exc}") from None


def _emit(cfg: RunConfig, record: dict, text: str):
    if cfg.format == "json":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def cmd_validate(cfg: RunConfig) -> int:
    try:
        _load(cfg)
    except _Exit as exc:
        if exc.code != EXIT_INVALID:
            raise
        _emit(cfg, {"valid": False, "violations": exc.message.splitlines()}, exc.message)
        return EXIT_INVALID
    _emit(cfg, {"valid": True, "violations": []}, "valid")
    return EXIT_OK


def _solver(cfg, m):
    return Solver(m, max_beliefs=cfg.max_beliefs, max_prescriptions=cfg.max_prescriptions)


def cmd_solve(cfg: RunConfig) -> int:
    m = _load(cfg)
    policy = _solver(cfg, m).solve()
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(policy.serialize(m))
        except OSError as exc:
            raise _Exit(EXIT_IO, f"cannot write {cfg.out}: {exc.strerror or exc}") from None
    cost = fmt_rational(policy.optimal_cost)
    _emit(cfg, {"optimal_cost": cost, "beliefs": len(policy.decisions)}, f"optimal-cost {cost}")
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    m = _load(cfg)
    value, _ = brute_force_optimal(m, cfg.max_profiles)
    _emit(cfg, {"oracle_value": fmt_rational(value)}, f"oracle-value {fmt_rational(value)}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    m = _load(cfg)
    oracle_value, _ = brute_force_optimal(m, cfg.max_profiles)
    dp_value = _solver(cfg, m).solve().optimal_cost
    match = oracle_value == dp_value
    record = {"oracle_value": fmt_rational(oracle_value), "dp_value": fmt_rational(dp_value),
              "match": "yes" if match else "no"}
    if match:
        text = f"MATCH {fmt_rational(dp_value)}"
    else:
        text = f"MISMATCH oracle {fmt_rational(oracle_value)} dp {fmt_rational(dp_value)}"
    _emit(cfg, record, text)
    return EXIT_OK if match else EXIT_MISMATCH


def cmd_simulate(cfg: RunConfig) -> int:
    m = _load(cfg)
    if cfg.policy:
        try:
            policy = parse_policy(_read(cfg.policy), m)
        except ValueError as exc:
            raise _Exit(EXIT_INVALID, f"invalid policy: {exc}") from None
    else:
        policy = _solver(cfg, m).solve()
    r = simulate(m, policy, cfg.samples, cfg.seed)
    record = {"mean": r.mean, "std": r.std, "stderr": r.stderr, "samples": r.n, "seed": cfg.seed,
              "exact": fmt_rational(policy.optimal_cost)}
    text = (f"mean {r.mean:.6f}\nstd {r.std:.6f}\nstderr {r.stderr:.6f}\nsamples {r.n}\n"
            f"exact {fmt_rational(policy.optimal_cost)}")
    _emit(cfg, record, text)
    return EXIT_OK


def _parse_dims(text: str) -> Dims:
    try:
        values = [int(v) for v in text.split(",")]
        d = Dims(*values)
    except (ValueError, TypeError):
        raise _Exit(EXIT_INVALID, f"bad --dims {text!r}: expected up to 9 comma-separated integers") from None
    if min(d[:-1]) < 1 or d.horizon < 0:
        raise _Exit(EXIT_INVALID, f"bad --dims {text!r}: sizes must be >= 1 and horizon >= 0")
    return d


def cmd_battery(cfg: RunConfig) -> int:
    dims = _parse_dims(cfg.dims)
    rows = run_battery(dims, cfg.count, cfg.seed or 1, cfg.max_profiles,
                       max_beliefs=cfg.max_beliefs, max_prescriptions=cfg.max_prescriptions)
    for row in rows:
        _emit(cfg, row.as_dict(), row.line())
    return EXIT_OK if all(r.match for r in rows) else EXIT_MISMATCH


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "battery": cmd_battery,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nestedteam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model")
        p.add_argument("--out")
        p.add_argument("--policy", help="policy file written by `solve` (simulate only)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--max-beliefs", type=int, default=DEFAULT_MAX_BELIEFS)
        p.add_argument("--max-prescriptions", type=int, default=DEFAULT_MAX_PRESCRIPTIONS)
        p.add_argument("--max-profiles", type=int, default=DEFAULT_MAX_PROFILES)
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--dims", default="2,2,2,2,2,2,2,2,1",
                       help="states,actions1,actions2,obs1,obs2,w,v1,v2,horizon (battery only)")
        p.add_argument("--count", type=int, default=50)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**vars(args))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except _Exit as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except ResourceBoundError as exc:
        print(f"resource bound exceeded: {exc}", file=sys.stderr)
        return EXIT_BOUND


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .copula import CopulaSpec, copula_cdf
from .errors import ConfigError, RacsimError
from .generator import Generator
from .radial import GalambosRadial, RadialMeasure, measure_from_spec
from .sampler import simulate
from .simplex import law_from_spec
from .validate import SUITES, loop_count_benchmark, run_suite

SEED_ENV = "RACSIM_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _load_json_arg(text: str, key: str):
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {key} file: {exc}", key=key) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--{key} is not valid JSON: {exc}", key=key) from exc


def _resolve_measure(args) -> tuple[dict, RadialMeasure, int]:
    spec = _load_json_arg(args.measure, "measure")
    measure = measure_from_spec(spec, args.dim)
    dim = args.dim
    if dim is None and isinstance(measure, GalambosRadial):
        dim = measure.dim
    if dim is None:
        raise ConfigError("dimension missing: pass --dim", key="dim")
    if dim < 2:
        raise ConfigError("--dim must be >= 2", key="dim")
    return spec, measure, dim


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer", key="seed") from exc
    return int(np.random.SeedSequence().entropy)


def _fmt(x: float) -> str:
    # shortest round-trip representation, at most 17 significant digits
    return repr(float(x))


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_sample(args) -> int:
    spec, measure, dim = _resolve_measure(args)
    law = law_from_spec(_load_json_arg(args.simplex, "simplex") if args.simplex else None, dim)
    if args.n < 1:
        raise ConfigError("--n must be >= 1", key="n")
    if not args.raw and measure.is_finite:
        raise ConfigError(
            "copula mode needs a measure with infinite total mass; use --raw", key="measure"
        )
    seed = _resolve_seed(args)
    config = {
        "command": args.command,
        "measure": spec,
        "dim": dim,
        "simplex": law.to_spec(),
        "n": args.n,
        "seed": seed,
        "raw": bool(args.raw),
    }
    res = simulate(measure, dim, law, args.n, seed, args.threads, copula=not args.raw)
    fh, close = _open_out(args.out)
    try:
        fh.write("# " + json.dumps(config, sort_keys=True) + "\n")
        if args.command == "scatter":
            names = [f"y{i + 1}" for i in range(dim)] + [f"u{i + 1}" for i in range(dim)]
            values = np.hstack((res.y, res.u))
        else:
            prefix = "y" if args.raw else "u"
            names = [f"{prefix}{i + 1}" for i in range(dim)]
            values = res.y if args.raw else res.u
        fh.write(",".join(names + ["loops"]) + "\n")
        for row, loops in zip(values, res.loops):
            fh.write(",".join(_fmt(v) for v in row) + f",{int(loops)}\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_cdf(args) -> int:
    _, measure, dim = _resolve_measure(args)
    try:
        u = [float(v) for v in args.u.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --u: {exc}", key="u") from exc
    if len(u) != dim:
        raise ConfigError(f"--u has {len(u)} coordinates, expected {dim}", key="u")
    if not all(0.0 <= v <= 1.0 for v in u):
        raise ConfigError("--u coordinates must lie in [0, 1]", key="u")
    if measure.is_finite:
        raise ConfigError("the copula needs a measure with infinite total mass", key="measure")
    value = copula_cdf(CopulaSpec(Generator(measure, dim)), u)
    print(f"{value:.12g}")
    return 0


def cmd_validate(args) -> int:
    report = run_suite(args.suite, corrupt=args.corrupt_inverse, K=args.K)
    fh, close = _open_out(args.out)
    try:
        fh.write(report.to_jsonl() + "\n")
    finally:
        if close:
            fh.close()
    return 0 if report.passed else 1


def cmd_bench(args) -> int:
    spec, measure, dim = _resolve_measure(args)
    law = law_from_spec(_load_json_arg(args.simplex, "simplex") if args.simplex else None, dim)
    if args.n < 1000:
        raise ConfigError("--n must be >= 1000 for a benchmark", key="n")
    seed = _resolve_seed(args)
    bench = loop_count_benchmark(measure, dim, law, args.n, seed)
    out = {
        "measure": spec,
        "dim": dim,
        "n": args.n,
        "seed": seed,
        "mean_loops": bench.mean,
        "ci99": list(bench.ci),
        "reference": bench.reference,
        "wall_time_per_sample": bench.wall_time / args.n,
    }
    print(json.dumps(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="racsim", description="Exact sampling of reciprocal Archimedean copulas.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def measure_args(p):
        p.add_argument("--measure", required=True, help="measure JSON or @file")
        p.add_argument("--dim", type=int, default=None)

    for name, helptext in (
        ("sample", "draw samples to CSV"),
        ("scatter", "draw samples with both raw and copula columns"),
    ):
        p = sub.add_parser(name, help=helptext)
        measure_args(p)
        p.add_argument("--simplex", default=None, help="simplex law JSON")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--raw", action="store_true", help="write Y instead of U = F(Y)")
        p.add_argument("--threads", type=int, default=1)
        p.set_defaults(func=cmd_sample)

    p = sub.add_parser("cdf", help="evaluate the copula at one point")
    measure_args(p)
    p.add_argument("--u", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("validate", help="run a validation suite")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--K", type=int, default=10_000, help="oracle truncation level")
    p.add_argument("--out", default=None)
    p.add_argument("--corrupt-inverse", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="loop-count benchmark")
    measure_args(p)
    p.add_argument("--simplex", default=None)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"racsim: configuration error{key}: {exc}", file=sys.stderr)
        return 2
    except (RacsimError, ArithmeticError, MemoryError) as exc:
        print(f"racsim: error: {exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()

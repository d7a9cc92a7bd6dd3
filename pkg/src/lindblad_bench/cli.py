"""Command-line entry point: ``lindblad-bench <subcommand>``.

Exit codes: 0 success, 1 validation failure, 2 input/config error, 3 partial
benchmark failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import os
import subprocess
import sys
from typing import Sequence

import numpy as np

from . import profiles
from .expm import ExpmError
from .lindblad import ModelError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2
EXIT_PARTIAL = 3

DEFAULT_SEED = 12345

log = logging.getLogger("lindblad_bench")


def _int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or any(d < 1 for d in out):
        raise argparse.ArgumentTypeError(f"dimensions must be positive integers, got {text!r}")
    return out


def _variant_list(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in ("aos", "soa", "simd")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown variant(s): {', '.join(bad)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json", "text"), default=None,
                        help="output format (default depends on the subcommand)")
    common.add_argument("--output", "-o", default=None, help="write output here instead of stdout")
    common.add_argument("--machine-profile", default=None,
                        help="machine profile file (default: bundled i9-13980HX)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--profile", choices=tuple(profiles.PROFILES), default=None,
                        help="kernel optimisation profile (default: $%s or %s)"
                        % (profiles.PROFILE_ENV, profiles.DEFAULT_PROFILE))

    parser = argparse.ArgumentParser(prog="lindblad-bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roofline", parents=[common], help="analytic roofline table")
    p.add_argument("--dims", type=_int_list, default=[3, 9, 27])

    p = sub.add_parser("bench", parents=[common], help="time the propagation kernels")
    p.add_argument("--dims", type=_int_list, default=[3, 9, 27])
    p.add_argument("--variants", type=_variant_list, default=["aos", "soa", "simd"])
    p.add_argument("--reps", type=int, default=50_000)
    p.add_argument("--warmup", type=int, default=10)

    p = sub.add_parser("grape", parents=[common], help="piecewise-constant pulse chain timings")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--segments", type=int, default=100)
    p.add_argument("--steps-per-segment", type=int, default=10)
    p.add_argument("--dt", type=float, default=None, help="segment step (default: ||L0 dt||_1 = 0.01)")
    p.add_argument("--model", default=None, help="model file or bundled name (default: random model)")
    p.add_argument("--variant", choices=("aos", "soa", "simd"), default="soa")

    p = sub.add_parser("verify", parents=[common], help="evolve a model and check physical invariants")
    p.add_argument("--model", default="transmon")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--dt", type=float, default=None, help="time step (default: ||L dt||_1 = 0.01)")
    p.add_argument("--variant", choices=("aos", "soa", "simd"), default="soa")
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("dump", parents=[common], help="print a model's Lindbladian or propagator")
    p.add_argument("--model", default="transmon")
    p.add_argument("--what", choices=("lindbladian", "propagator"), default="lindbladian")
    p.add_argument("--dt", type=float, default=None, help="propagator step (default: ||L dt||_1 = 0.01)")
    return parser


@contextlib.contextmanager
def _open_output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_rows(rows: list[dict], fields: Sequence[str], fmt: str, out, comment: str | None = None):
    if fmt == "json":
        doc = {"results": rows} if comment is None else {"comment": comment, "results": rows}
        json.dump(doc, out, indent=2)
        out.write("\n")
        return
    if comment:
        out.write(f"# {comment}\n")
    writer = csv.DictWriter(out, fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def cmd_roofline(args) -> int:
    from .roofline import characterize, classify, load_machine_profile, place, ridge_point

    machine = load_machine_profile(args.machine_profile)
    fmt = args.format or "csv"
    ridge_dram = ridge_point(machine)
    rows = []
    for d in args.dims:
        k = place(characterize(d), machine)
        c = classify(k, machine)
        rows.append({
            "d": d,
            "d2": d * d,
            "flops": k.flops,
            "bytes": k.bytes,
            "ai": k.ai if fmt == "json" else f"{k.ai:.4f}",
            "placement": str(k.placement),
            "ridge_dram": ridge_dram if fmt == "json" else f"{ridge_dram:.4g}",
            "bound": str(c.bound),
        })
    fields = ("d", "d2", "flops", "bytes", "ai", "placement", "ridge_dram", "bound")
    with _open_output(args.output) as out:
        _emit_rows(rows, fields, fmt, out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench
    from .roofline import load_machine_profile

    machine = load_machine_profile(args.machine_profile)
    if args.reps < 1 or args.warmup < 0:
        raise ValueError("--reps must be >= 1 and --warmup >= 0")
    results = bench.run_matrix(args.dims, args.variants, args.reps, args.warmup, args.seed)
    with _open_output(args.output) as out:
        if (args.format or "csv") == "json":
            json.dump(bench.results_json(results, machine.name), out, indent=2)
            out.write("\n")
        else:
            bench.write_csv(results, out, machine.name)
    for r in results:
        if not r.ok:
            print(f"cell d={r.config.dim} {r.config.variant.value} failed: {r.error}", file=sys.stderr)
    return EXIT_OK if all(r.ok for r in results) else EXIT_PARTIAL


def _load(model: str):
    from .lindblad import load_model

    return load_model(model)


def cmd_grape(args) -> int:
    from .lindblad import auto_step, build_lindbladian, random_model
    from .propagate import grape_chain

    rng = np.random.default_rng(args.seed)
    if args.model is not None:
        model = _load(args.model)
        if model.control is None:
            raise ModelError("model file has no 'control' operator to drive")
    else:
        if args.dim < 1:
            raise ValueError("--dim must be >= 1")
        model = random_model(args.dim, rng)
    if args.segments < 1 or args.steps_per_segment < 0:
        raise ValueError("--segments must be >= 1 and --steps-per-segment >= 0")
    dt = args.dt if args.dt is not None else auto_step(build_lindbladian(model))
    amplitudes = rng.uniform(-1.0, 1.0, args.segments)
    _, t = grape_chain(model.hamiltonian, model.control, amplitudes, args.steps_per_segment, dt,
                       model.collapse_ops, layout=args.variant)
    row = {"d": model.dim, "segments": t.segments, "build_ms": t.build_ms,
           "chain_ms": t.chain_ms, "points_per_s": t.points_per_s}
    with _open_output(args.output) as out:
        _emit_rows([row], tuple(row), args.format or "csv", out)
    return EXIT_OK


def initial_state(d: int) -> np.ndarray:
    """|1><1| (first excited level) for d >= 2, else |0><0|."""
    from .linalg import aligned_zeros

    rho = aligned_zeros((d, d))
    k = 1 if d >= 2 else 0
    rho[k, k] = 1.0
    return rho


def cmd_verify(args) -> int:
    from . import kernels
    from .expm import expm
    from .lindblad import auto_step, build_lindbladian
    from .propagate import evolve
    from .validate import check_state

    model = _load(args.model)
    if args.steps < 0:
        raise ValueError("--steps must be >= 0")
    lind = build_lindbladian(model)
    dt = args.dt if args.dt is not None else auto_step(lind)
    prop = expm(lind.matrix, dt)
    rho = evolve(prop, initial_state(model.dim), args.steps, args.variant, tol=args.tol)
    report = check_state(rho, args.tol)
    doc = {"model": args.model, "dim": model.dim, "steps": args.steps, "dt": dt,
           "variant": args.variant, "profile": kernels.PROFILE.name, **report.to_dict()}
    with _open_output(args.output) as out:
        fmt = args.format or "json"
        if fmt == "json":
            json.dump(doc, out, indent=2)
            out.write("\n")
        else:
            _emit_rows([doc], tuple(doc), "csv", out)
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_dump(args) -> int:
    from .expm import expm
    from .linalg import dumps_matrix
    from .lindblad import auto_step, build_lindbladian

    model = _load(args.model)
    lind = build_lindbladian(model)
    if args.what == "lindbladian":
        mat = lind.matrix
    else:
        dt = args.dt if args.dt is not None else auto_step(lind)
        mat = expm(lind.matrix, dt).matrix_aos
    with _open_output(args.output) as out:
        fmt = args.format or "text"
        if fmt == "json":
            doc = {"rows": mat.shape[0], "cols": mat.shape[1],
                   "data": [[z.real, z.imag] for z in mat.ravel()]}
            json.dump(doc, out)
            out.write("\n")
        elif fmt == "text":
            out.write(dumps_matrix(mat))
        else:
            raise ValueError("dump supports --format text or json")
    return EXIT_OK


COMMANDS = {
    "roofline": cmd_roofline,
    "bench": cmd_bench,
    "grape": cmd_grape,
    "verify": cmd_verify,
    "dump": cmd_dump,
}


def _relaunch(profile: str, argv: Sequence[str]) -> int:
    env = profiles.profile_env(profile)
    cmd = [sys.executable, "-m", "lindblad_bench", *argv]
    return subprocess.run(cmd, env=env).returncode


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")

    if args.profile is not None:
        loaded = sys.modules.get(f"{__package__}.kernels")
        if loaded is not None:
            if loaded.PROFILE.name != args.profile:
                return _relaunch(args.profile, argv)
        elif "numba" in sys.modules:
            if os.environ.get(profiles.PROFILE_ENV, profiles.DEFAULT_PROFILE) != args.profile:
                return _relaunch(args.profile, argv)
        else:
            os.environ[profiles.PROFILE_ENV] = args.profile

    try:
        return COMMANDS[args.command](args)
    except (ModelError, ExpmError, ValueError, OSError) as exc:
        print(f"lindblad-bench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

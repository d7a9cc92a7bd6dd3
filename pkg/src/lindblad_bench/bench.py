"""Timing harness for the propagation kernels.

Each cell times ``reps`` consecutive steps as one block on the monotonic
clock, after ``warmup`` untimed steps, and reports the mean time per step.
GFLOP/s and GB/s are derived from the analytic flop and byte counts, so with
``ns`` per step they are simply ``flops / ns`` and ``bytes / ns``.
"""
from __future__ import annotations

import csv
import datetime as _dt
import logging
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import kernels, linalg
from .expm import Propagator
from .propagate import StateChain, Variant, VariantUnavailable, available_variants, warm_up
from .roofline import characterize

log = logging.getLogger(__name__)

CSV_FIELDS = ("profile", "dim", "variant", "reps", "warmup", "ns_per_step",
              "gflops", "gbs", "checksum_re", "checksum_im")

# the timed block must be at least this many timer ticks long
MIN_TICKS = 10


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    dim: int
    variant: Variant
    reps: int = 50_000
    warmup: int = 10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")


@dataclass(frozen=True)
class BenchResult:
    config: BenchConfig
    ns_per_step: float
    gflops: float
    gbs: float
    checksum: complex
    profile: str
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @classmethod
    def from_timing(cls, config: BenchConfig, ns_per_step: float, checksum: complex = 0j,
                    profile: str | None = None) -> "BenchResult":
        gflops, gbs = derive_metrics(config.dim, ns_per_step)
        return cls(config, ns_per_step, gflops, gbs, complex(checksum),
                   profile or kernels.PROFILE.name)

    @classmethod
    def failed(cls, config: BenchConfig, error: str, profile: str | None = None) -> "BenchResult":
        nan = math.nan
        return cls(config, nan, nan, nan, complex(nan, nan), profile or kernels.PROFILE.name, error)

    def row(self) -> dict:
        c = self.config
        return {
            "profile": self.profile,
            "dim": c.dim,
            "variant": c.variant.value,
            "reps": c.reps,
            "warmup": c.warmup,
            "ns_per_step": self.ns_per_step,
            "gflops": self.gflops,
            "gbs": self.gbs,
            "checksum_re": self.checksum.real,
            "checksum_im": self.checksum.imag,
        }


def derive_metrics(dim: int, ns_per_step: float) -> tuple[float, float]:
    """(GFLOP/s, GB/s) for one step of the d^2 x d^2 matvec taking ``ns_per_step`` ns."""
    k = characterize(dim)
    return k.flops / ns_per_step, k.bytes / ns_per_step


def benchmark_inputs(dim: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random unitary propagator and unit-norm state of size d^2.

    A unitary keeps the state norm fixed over any number of steps, so the
    timed loop never overflows or drifts into subnormal numbers.
    """
    n = dim * dim
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    v = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    v /= np.linalg.norm(v)
    return linalg.as_aligned(q), linalg.as_aligned(v)


def run_bench(config: BenchConfig) -> BenchResult:
    if config.variant not in available_variants():
        raise VariantUnavailable(f"variant {config.variant.value!r} is not available on this machine")
    p, v = benchmark_inputs(config.dim, config.seed)
    prop = Propagator(math.nan, p, linalg.to_soa(p))
    warm_up(config.variant)
    chain = StateChain(config.variant, v)
    chain.run(prop, config.warmup)
    t0 = time.perf_counter_ns()
    chain.run(prop, config.reps)
    elapsed = time.perf_counter_ns() - t0
    resolution_ns = time.get_clock_info("perf_counter").resolution * 1e9
    if elapsed < MIN_TICKS * resolution_ns:
        raise BenchError(
            f"timed block of {elapsed} ns is under {MIN_TICKS} ticks of a {resolution_ns:g} ns timer; "
            "increase reps"
        )
    checksum = complex(chain.state().sum())
    return BenchResult.from_timing(config, elapsed / config.reps, checksum)


def run_matrix(dims: Sequence[int], variants: Sequence[Variant | str], reps: int = 50_000,
               warmup: int = 10, seed: int = 0) -> list[BenchResult]:
    """One cell per (dim, variant), dim-major; failed cells are kept and marked."""
    results = []
    for dim in dims:
        for variant in variants:
            config = BenchConfig(dim, Variant(variant), reps, warmup, seed)
            try:
                results.append(run_bench(config))
            except (BenchError, VariantUnavailable) as exc:
                log.warning("cell d=%d %s failed: %s", dim, config.variant.value, exc)
                results.append(BenchResult.failed(config, str(exc)))
    return results


@dataclass(frozen=True)
class Ranked:
    variant: Variant
    gbs: float
    ratio: float  # gbs relative to the slowest variant at this dim


def compare(results: Iterable[BenchResult]) -> dict[int, list[Ranked]]:
    """Per-dim ranking by GB/s, fastest first; ties keep variant order."""
    order = {v: i for i, v in enumerate(Variant)}
    by_dim: dict[int, list[BenchResult]] = {}
    for r in results:
        if r.ok:
            by_dim.setdefault(r.config.dim, []).append(r)
    out = {}
    for dim, rs in by_dim.items():
        slowest = min(r.gbs for r in rs)
        rs = sorted(rs, key=lambda r: (-r.gbs, order[r.config.variant]))
        out[dim] = [Ranked(r.config.variant, r.gbs, r.gbs / slowest) for r in rs]
    return out


def header_comment(machine: str, profile: str | None = None) -> str:
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return f"# generated={stamp} machine={machine} profile={profile or kernels.PROFILE.name}"


def write_csv(results: Iterable[BenchResult], out: TextIO, machine: str) -> None:
    out.write(header_comment(machine) + "\n")
    writer = csv.DictWriter(out, CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.row().items()})


def results_json(results: Iterable[BenchResult], machine: str) -> dict:
    rows = []
    for r in results:
        rows.append({k: (None if isinstance(v, float) and math.isnan(v) else v)
                     for k, v in r.row().items()})
    return {"comment": header_comment(machine)[2:], "results": rows}

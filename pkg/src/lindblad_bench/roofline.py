"""Roofline model of the propagation matvec.

Per step the kernel does ``8 d^4`` flops (one complex multiply-add per
propagator entry) and moves ``(d^4 + 2 d^2) * 16`` bytes: the propagator plus
the input and output state vectors, each element a complex128.  Only
compulsory traffic is counted.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "Level",
    "Bound",
    "KernelCharacter",
    "MachineProfile",
    "Classification",
    "I9_13980HX",
    "characterize",
    "place",
    "ridge_point",
    "classify",
    "load_machine_profile",
    "parse_machine_profile",
]

COMPLEX_BYTES = 16


class Level(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    DRAM = "DRAM"

    def __str__(self) -> str:
        return self.value


class Bound(str, enum.Enum):
    MEMORY = "memory_bound"
    COMPUTE = "compute_bound"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class KernelCharacter:
    dim: int
    flops: int
    bytes: int
    placement: Level | None = None

    @property
    def ai(self) -> float:
        return self.flops / self.bytes

    @property
    def working_set_bytes(self) -> int:
        return self.bytes


@dataclass(frozen=True)
class MachineProfile:
    peak_gflops: float
    bandwidth: dict[Level, float]  # GB/s
    capacity: dict[Level, int]     # bytes, caches only
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        bw = {Level(k): float(v) for k, v in self.bandwidth.items()}
        cap = {Level(k): int(v) for k, v in self.capacity.items()}
        if set(bw) != set(Level):
            raise ValueError(f"bandwidth needed for every level {[str(l) for l in Level]}")
        if set(cap) != {Level.L1, Level.L2, Level.L3}:
            raise ValueError("capacity needed for L1, L2 and L3")
        if not self.peak_gflops > 0:
            raise ValueError(f"peak_gflops must be positive, got {self.peak_gflops}")
        if not (0 < cap[Level.L1] < cap[Level.L2] < cap[Level.L3]):
            raise ValueError("cache capacities must be positive and strictly increasing L1 < L2 < L3")
        if not (bw[Level.L1] > bw[Level.L2] > bw[Level.L3] > bw[Level.DRAM] > 0):
            raise ValueError("bandwidths must be positive and strictly decreasing L1 > L2 > L3 > DRAM")
        object.__setattr__(self, "bandwidth", bw)
        object.__setattr__(self, "capacity", cap)

    def scaled(self, factor: float) -> "MachineProfile":
        """Same machine with peak and every bandwidth multiplied by ``factor``."""
        return replace(
            self,
            peak_gflops=self.peak_gflops * factor,
            bandwidth={k: v * factor for k, v in self.bandwidth.items()},
        )


# Intel i9-13980HX: cache sizes and the 128 GFLOP/s / 80 GB/s DRAM ridge inputs.
# Per-cache bandwidths are placeholders, all under 256 GB/s so every
# level's ridge stays above the 0.5 FLOP/byte ceiling of this kernel.
I9_13980HX = MachineProfile(
    peak_gflops=128.0,
    bandwidth={Level.L1: 200.0, Level.L2: 150.0, Level.L3: 100.0, Level.DRAM: 80.0},
    capacity={Level.L1: 48 * 1024, Level.L2: 2 * 1024**2, Level.L3: 36 * 1024**2},
    name="i9-13980HX",
)


def characterize(d: int) -> KernelCharacter:
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    n = d * d
    return KernelCharacter(d, 8 * n * n, (n * n + 2 * n) * COMPLEX_BYTES)


def place(k: KernelCharacter, m: MachineProfile) -> KernelCharacter:
    """Smallest cache level that holds the working set (equal size fits), else DRAM."""
    for level in (Level.L1, Level.L2, Level.L3):
        if k.working_set_bytes <= m.capacity[level]:
            return replace(k, placement=level)
    return replace(k, placement=Level.DRAM)


def ridge_point(m: MachineProfile, level: Level | str = Level.DRAM) -> float:
    return m.peak_gflops / m.bandwidth[Level(level)]


@dataclass(frozen=True)
class Classification:
    bound: Bound
    attainable_gflops: float
    ridge: float


def classify(k: KernelCharacter, m: MachineProfile) -> Classification:
    if k.placement is None:
        k = place(k, m)
    ridge = ridge_point(m, k.placement)
    bound = Bound.MEMORY if k.ai < ridge else Bound.COMPUTE
    attainable = min(m.peak_gflops, k.ai * m.bandwidth[k.placement])
    return Classification(bound, attainable, ridge)


# -- machine profile files ----------------------------------------------------

_KEYS = {
    "peak_gflops": None,
    "bw_l1": Level.L1, "bw_l2": Level.L2, "bw_l3": Level.L3, "bw_dram": Level.DRAM,
    "cap_l1": Level.L1, "cap_l2": Level.L2, "cap_l3": Level.L3,
}


def parse_machine_profile(text: str, name: str = "custom") -> MachineProfile:
    """Parse ``key = value`` lines; bandwidths in GB/s, capacities in bytes."""
    values: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "name":
            name = value
            continue
        if key not in _KEYS:
            raise ValueError(f"unknown machine-profile key {key!r}")
        values[key] = value
    missing = sorted(set(_KEYS) - set(values))
    if missing:
        raise ValueError(f"machine profile is missing {', '.join(missing)}")
    try:
        peak = float(values["peak_gflops"])
        bw = {_KEYS[k]: float(values[k]) for k in _KEYS if k.startswith("bw_")}
        cap = {_KEYS[k]: int(float(values[k])) for k in _KEYS if k.startswith("cap_")}
    except ValueError as exc:
        raise ValueError(f"bad number in machine profile: {exc}") from None
    return MachineProfile(peak, bw, cap, name=name)


def load_machine_profile(path: str | Path | None) -> MachineProfile:
    if path is None:
        return I9_13980HX
    p = Path(path)
    return parse_machine_profile(p.read_text(), name=p.stem)

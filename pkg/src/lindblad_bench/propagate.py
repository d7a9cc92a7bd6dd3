"""Propagation kernels, trajectory evolution and the piecewise-constant pulse chain."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels, linalg
from .expm import Propagator, expm
from .linalg import MatrixSoA, aligned_empty, from_soa, to_soa, unvec, vec
from .lindblad import LindbladModel, build_lindbladian
from .validate import check_state

__all__ = [
    "Variant",
    "VariantUnavailable",
    "InvalidStateError",
    "ChainTimings",
    "available_variants",
    "step_aos",
    "step_soa",
    "step_simd",
    "warm_up",
    "evolve",
    "grape_chain",
]


class Variant(str, enum.Enum):
    AOS = "aos"
    SOA = "soa"
    SIMD = "simd"

    def __str__(self) -> str:
        return self.value


class VariantUnavailable(RuntimeError):
    pass


class InvalidStateError(ValueError):
    pass


def available_variants() -> list[Variant]:
    out = [Variant.AOS, Variant.SOA]
    if kernels.simd_supported():
        out.append(Variant.SIMD)
    return out


def _require(variant: Variant) -> None:
    if variant is Variant.SIMD and not kernels.simd_supported():
        raise VariantUnavailable("simd kernel needs a CPU with 256-bit SIMD (AVX2 + FMA)")


def _check_shapes(p_shape, v_shape) -> None:
    if len(p_shape) != 2 or p_shape[0] != p_shape[1] or v_shape != (p_shape[1],):
        raise ValueError(f"cannot apply {p_shape} matrix to vector of shape {v_shape}")


def _aos_out(v, out) -> np.ndarray:
    v = np.asarray(v)
    if out is None:
        return aligned_empty(v.shape)
    if out.shape != v.shape or out.dtype != np.complex128:
        raise ValueError(f"output buffer has shape {out.shape}/{out.dtype}, expected {v.shape}/complex128")
    if np.shares_memory(out, v):
        raise ValueError("output buffer must not alias the input vector")
    return out


def step_aos(p, v, out=None) -> np.ndarray:
    """One propagation step on interleaved complex data."""
    out = _aos_out(v, out)
    p = linalg.as_aligned(p)
    v = linalg.as_aligned(v)
    _check_shapes(p.shape, v.shape)
    kernels.aos_step_into(p, v, out)
    return out


def step_soa(p: MatrixSoA, v: MatrixSoA, out: MatrixSoA | None = None) -> MatrixSoA:
    """One propagation step on split real/imaginary planes."""
    _check_shapes(p.shape, v.shape)
    if out is None:
        out = MatrixSoA.empty(v.shape)
    elif out.shape != v.shape:
        raise ValueError(f"output buffer has shape {out.shape}, expected {v.shape}")
    elif np.shares_memory(out.re, v.re) or np.shares_memory(out.im, v.im):
        raise ValueError("output buffer must not alias the input vector")
    kernels.soa_step_into(p.re, p.im, v.re, v.im, out.re, out.im)
    return out


def step_simd(p, v, out=None) -> np.ndarray:
    """Same contract as :func:`step_aos`, using the explicit lane-shuffle kernel."""
    _require(Variant.SIMD)
    out = _aos_out(v, out)
    p = linalg.as_aligned(p)
    v = linalg.as_aligned(v)
    _check_shapes(p.shape, v.shape)
    kernels.simd_step_into(p.view(np.float64), v.view(np.float64), out.view(np.float64))
    return out


class StateChain:
    """Two state buffers in one layout plus the loop that ping-pongs between them."""

    def __init__(self, variant: Variant, v0: np.ndarray):
        _require(variant)
        self.variant = variant
        if variant is Variant.SOA:
            self.a = to_soa(v0)
            self.b = MatrixSoA.empty(v0.shape)
        else:
            self.a = aligned_empty(v0.shape)
            self.a[...] = v0
            self.b = aligned_empty(v0.shape)

    def run(self, prop: Propagator, nsteps: int) -> None:
        """Advance ``nsteps`` steps; afterwards ``self.a`` holds the state."""
        if nsteps <= 0:
            return
        if self.variant is Variant.SOA:
            p = prop.matrix_soa
            which = kernels.run_soa(p.re, p.im, self.a.re, self.a.im, self.b.re, self.b.im, nsteps)
        elif self.variant is Variant.AOS:
            which = kernels.run_aos(prop.matrix_aos, self.a, self.b, nsteps)
        else:
            which = kernels.run_simd(prop.matrix_aos.view(np.float64), self.a.view(np.float64),
                                     self.b.view(np.float64), nsteps)
        if which:
            self.a, self.b = self.b, self.a

    def state(self) -> np.ndarray:
        return from_soa(self.a) if self.variant is Variant.SOA else self.a.copy()


def warm_up(variant: Variant | str) -> None:
    """Compile a variant's step loop so later calls time only the kernel."""
    variant = Variant(variant)
    one = linalg.identity(1)
    chain = StateChain(variant, one.reshape(1))
    chain.run(Propagator(0.0, one, to_soa(one)), 1)


def evolve(prop: Propagator, rho0, n_steps: int, layout: Variant | str = Variant.SOA,
           tol: float = 1e-8) -> np.ndarray:
    """rho after ``n_steps`` applications of ``prop``, via double-buffered kernel steps."""
    layout = Variant(layout)
    rho0 = linalg.as_aligned(rho0)
    d = prop.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 has shape {rho0.shape}, expected {(d, d)}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    report = check_state(rho0, tol)
    if not report.passed:
        raise InvalidStateError(f"initial state is not a valid density matrix: {report}")
    chain = StateChain(layout, vec(rho0))
    chain.run(prop, n_steps)
    return unvec(chain.state())


@dataclass(frozen=True)
class ChainTimings:
    build_ms: float
    chain_ms: float
    segments: int
    steps_per_segment: int

    @property
    def points_per_s(self) -> float:
        return 1000.0 / (self.build_ms + self.chain_ms)

    @property
    def build_fraction(self) -> float:
        return self.build_ms / (self.build_ms + self.chain_ms)

    def to_dict(self) -> dict:
        return {
            "build_ms": self.build_ms,
            "chain_ms": self.chain_ms,
            "segments": self.segments,
            "steps_per_segment": self.steps_per_segment,
            "points_per_s": self.points_per_s,
        }


def grape_chain(h0, hc, amplitudes: Sequence[float], steps_per_segment: int, dt: float,
                model_dissipators: Sequence[np.ndarray] = (), rho0=None,
                layout: Variant | str = Variant.SOA) -> tuple[np.ndarray, ChainTimings]:
    """Piecewise-constant pulse: one propagator build per segment, then a chain of steps.

    Segment ``j`` evolves under ``h0 + amplitudes[j] * hc``.  Propagator builds
    (generator assembly + expm + layout conversion) are timed into
    ``build_ms``; kernel steps into ``chain_ms``.  ``rho0`` defaults to the
    ground state.
    """
    layout = Variant(layout)
    amplitudes = [float(x) for x in amplitudes]
    if not amplitudes:
        raise ValueError("amplitudes must be non-empty")
    if steps_per_segment < 0:
        raise ValueError(f"steps_per_segment must be non-negative, got {steps_per_segment}")
    h0 = linalg.as_aligned(h0)
    hc = linalg.as_aligned(hc)
    if h0.shape != hc.shape:
        raise ValueError(f"h0 {h0.shape} and hc {hc.shape} differ in shape")
    d = h0.shape[0]
    dissipators = tuple(model_dissipators)
    if rho0 is None:
        rho0 = linalg.aligned_zeros((d, d))
        rho0[0, 0] = 1.0
    rho0 = linalg.as_aligned(rho0)
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 has shape {rho0.shape}, expected {(d, d)}")

    warm_up(layout)
    chain = StateChain(layout, vec(rho0))
    build_ns = 0
    chain_ns = 0
    clock = time.perf_counter_ns
    for amp in amplitudes:
        t0 = clock()
        model = LindbladModel(h0 + amp * hc, dissipators)
        prop = expm(build_lindbladian(model).matrix, dt)
        t1 = clock()
        chain.run(prop, steps_per_segment)
        t2 = clock()
        build_ns += t1 - t0
        chain_ns += t2 - t1
    timings = ChainTimings(build_ns / 1e6, chain_ns / 1e6, len(amplitudes), steps_per_segment)
    return unvec(chain.state()), timings

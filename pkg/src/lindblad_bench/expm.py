"""Matrix exponential by the [13/13] Pade approximant with scaling and squaring."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import MatrixSoA, identity, matmul, one_norm

__all__ = ["ExpmError", "Propagator", "expm", "pade13_eval", "THETA_13", "MAX_SQUARINGS"]

THETA_13 = 5.371920351148152
MAX_SQUARINGS = 64

# numerator coefficients b_0 .. b_13 of the degree-13 diagonal Pade approximant
PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)


class ExpmError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Propagator:
    """exp(L * step) kept in both layouts; the SoA planes are a conversion of the AoS matrix."""

    step: float
    matrix_aos: np.ndarray
    matrix_soa: MatrixSoA

    @property
    def size(self) -> int:
        return self.matrix_aos.shape[0]

    @property
    def dim(self) -> int:
        """Density-matrix dimension d for a d^2 x d^2 propagator."""
        d = math.isqrt(self.size)
        if d * d != self.size:
            raise ValueError(f"{self.size}x{self.size} propagator does not act on a density matrix")
        return d


def pade13_eval(m) -> np.ndarray:
    """r13(m) = q13(m)^-1 p13(m), using the even/odd power split (6 products + 1 solve)."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"pade13_eval needs a square matrix, got shape {m.shape}")
    b = PADE13
    eye = identity(m.shape[0])
    m2 = matmul(m, m)
    m4 = matmul(m2, m2)
    m6 = matmul(m2, m4)
    u = matmul(m6, b[13] * m6 + b[11] * m4 + b[9] * m2)
    u += b[7] * m6 + b[5] * m4 + b[3] * m2 + b[1] * eye
    u = matmul(m, u)
    v = matmul(m6, b[12] * m6 + b[10] * m4 + b[8] * m2)
    v += b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * eye
    try:
        r = np.linalg.solve(v - u, v + u)
    except np.linalg.LinAlgError as exc:
        raise ExpmError(f"Pade denominator is singular: {exc}") from None
    return linalg.as_aligned(r)


def expm(a, dt: float = 1.0) -> Propagator:
    """Propagator exp(a * dt) in both memory layouts."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    if not math.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt!r}")
    if not np.all(np.isfinite(a)):
        raise ExpmError("input matrix has non-finite entries")
    m = a * dt
    norm = one_norm(m)
    if norm == 0:
        eye = identity(m.shape[0])
        return Propagator(float(dt), eye, linalg.to_soa(eye))
    s = max(0, math.ceil(math.log2(norm / THETA_13))) if norm > 0 else 0
    if s > MAX_SQUARINGS:
        raise ExpmError(f"||a*dt||_1 = {norm:.3g} needs {s} squarings (cap {MAX_SQUARINGS})")
    r = pade13_eval(m / 2.0**s if s else m)
    for _ in range(s):
        r = matmul(r, r)
    if not np.all(np.isfinite(r)):
        raise ExpmError("matrix exponential overflowed")
    return Propagator(float(dt), r, linalg.to_soa(r))

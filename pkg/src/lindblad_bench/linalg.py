"""Dense complex matrices in interleaved (AoS) and split-plane (SoA) layouts.

The interleaved layout is simply a C-contiguous ``complex128`` ndarray; numpy
already stores each element as a ``(re, im)`` pair.  The split layout is a
:class:`MatrixSoA` holding two ``float64`` planes.  Every buffer produced here
starts on a 64-byte boundary.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

ALIGNMENT = 64

__all__ = [
    "ALIGNMENT",
    "MatrixSoA",
    "VectorSoA",
    "aligned_empty",
    "aligned_zeros",
    "as_aligned",
    "is_aligned",
    "identity",
    "kron",
    "matmul",
    "dagger",
    "conj",
    "one_norm",
    "to_soa",
    "from_soa",
    "vec",
    "unvec",
    "rel_err",
    "dumps_matrix",
    "loads_matrix",
    "read_matrix",
]


def aligned_empty(shape, dtype=np.complex128, align: int = ALIGNMENT) -> np.ndarray:
    """Uninitialised C-contiguous array whose data pointer is ``align``-byte aligned."""
    dtype = np.dtype(dtype)
    shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
    nbytes = max(1, math.prod(shape)) * dtype.itemsize
    raw = np.empty(nbytes + align, dtype=np.uint8)
    offset = (-raw.ctypes.data) % align
    return raw[offset:offset + nbytes].view(dtype)[:math.prod(shape)].reshape(shape)


def aligned_zeros(shape, dtype=np.complex128, align: int = ALIGNMENT) -> np.ndarray:
    out = aligned_empty(shape, dtype, align)
    out[...] = 0
    return out


def is_aligned(a: np.ndarray, align: int = ALIGNMENT) -> bool:
    return a.ctypes.data % align == 0


def as_aligned(a, dtype=np.complex128) -> np.ndarray:
    """Return ``a`` as an aligned C-contiguous array, copying only when needed."""
    a = np.asarray(a)
    if (a.dtype == dtype and a.flags.c_contiguous and is_aligned(a)):
        return a
    out = aligned_empty(a.shape, dtype)
    out[...] = a
    return out


def identity(n: int) -> np.ndarray:
    out = aligned_zeros((n, n))
    out[np.diag_indices(n)] = 1.0
    return out


@dataclass(frozen=True)
class MatrixSoA:
    """Split-plane complex array: real and imaginary parts in separate buffers."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise ValueError(f"plane shapes differ: {self.re.shape} vs {self.im.shape}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.re.shape

    @property
    def rows(self) -> int:
        return self.re.shape[0]

    @property
    def cols(self) -> int:
        return self.re.shape[1] if self.re.ndim == 2 else 1

    @classmethod
    def empty(cls, shape) -> "MatrixSoA":
        return cls(aligned_empty(shape, np.float64), aligned_empty(shape, np.float64))

    @classmethod
    def zeros(cls, shape) -> "MatrixSoA":
        return cls(aligned_zeros(shape, np.float64), aligned_zeros(shape, np.float64))


# vectors are the same type with one dimension
VectorSoA = MatrixSoA


def _check_2d(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``out[i*p + k, j*q + l] = a[i, j] * b[k, l]``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    _check_2d(a)
    _check_2d(b)
    m, n = a.shape
    p, q = b.shape
    out = aligned_empty((m * p, n * q))
    np.multiply(a[:, None, :, None], b[None, :, None, :], out=out.reshape(m, p, n, q))
    return out


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    _check_2d(a)
    _check_2d(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch for matmul: {a.shape} @ {b.shape}")
    out = aligned_empty((a.shape[0], b.shape[1]))
    np.matmul(a, b, out=out)
    return out


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    a = np.asarray(a, dtype=np.complex128)
    _check_2d(a)
    return as_aligned(np.conj(a.T))


def conj(a) -> np.ndarray:
    """Element-wise complex conjugate."""
    a = np.asarray(a, dtype=np.complex128)
    out = aligned_empty(a.shape)
    np.conjugate(a, out=out)
    return out


def one_norm(a) -> float:
    """Maximum absolute column sum."""
    a = np.asarray(a, dtype=np.complex128)
    _check_2d(a)
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=0).max())


def to_soa(a) -> MatrixSoA:
    a = np.asarray(a, dtype=np.complex128)
    out = MatrixSoA.empty(a.shape)
    out.re[...] = a.real
    out.im[...] = a.imag
    return out


def from_soa(s: MatrixSoA) -> np.ndarray:
    out = aligned_empty(s.shape)
    out.real = s.re
    out.imag = s.im
    return out


def vec(rho) -> np.ndarray:
    """Row-major vectorisation: element ``[i, j]`` lands in slot ``i*d + j``.

    For an aligned contiguous input this is a view of the same buffer.
    """
    rho = as_aligned(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"vec needs a square matrix, got shape {rho.shape}")
    return rho.reshape(-1)


def unvec(v) -> np.ndarray:
    v = as_aligned(v)
    n = v.size
    d = math.isqrt(n)
    if v.ndim != 1 or d * d != n:
        raise ValueError(f"unvec needs a 1-D vector of square length, got shape {v.shape}")
    return v.reshape(d, d)


def rel_err(a, ref) -> float:
    """max|a - ref| / max|ref|, falling back to the absolute error for ref == 0."""
    a = np.asarray(a)
    ref = np.asarray(ref)
    diff = float(np.max(np.abs(a - ref))) if ref.size else 0.0
    scale = float(np.max(np.abs(ref))) if ref.size else 0.0
    return diff / scale if scale > 0 else diff


# -- interchange text format -------------------------------------------------

HEADER = "complex-matrix"


def dumps_matrix(a) -> str:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    _check_2d(a)
    buf = io.StringIO()
    buf.write(f"{HEADER} {a.shape[0]} {a.shape[1]}\n")
    for z in a.ravel():
        buf.write(f"{z.real:.17g} {z.imag:.17g}\n")
    return buf.getvalue()


def parse_header(line: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 3 or parts[0] != HEADER:
        raise ValueError(f"expected '{HEADER} <rows> <cols>', got {line.strip()!r}")
    try:
        rows, cols = int(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"bad matrix dimensions in {line.strip()!r}") from None
    if rows < 0 or cols < 0:
        raise ValueError(f"negative matrix dimensions in {line.strip()!r}")
    return rows, cols


def read_matrix(header: str, lines: Iterator[str]) -> np.ndarray:
    """Read the body of a matrix whose header line has already been consumed."""
    rows, cols = parse_header(header)
    out = aligned_empty((rows, cols))
    flat = out.reshape(-1)
    for k in range(rows * cols):
        try:
            line = next(lines)
        except StopIteration:
            raise ValueError(f"matrix truncated after {k} of {rows * cols} entries") from None
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected '<re> <im>', got {line.strip()!r}")
        flat[k] = complex(float(parts[0]), float(parts[1]))
    return out


def loads_matrix(text: str | Iterable[str]) -> np.ndarray:
    lines = iter(text.splitlines() if isinstance(text, str) else text)
    lines = (ln for ln in lines if ln.strip())
    try:
        header = next(lines)
    except StopIteration:
        raise ValueError("empty matrix text") from None
    out = read_matrix(header, lines)
    if next(lines, None) is not None:
        raise ValueError("trailing data after matrix")
    return out

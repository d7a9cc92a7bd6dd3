"""Physical-invariant checks on density matrices and generators."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .linalg import MatrixSoA, from_soa, unvec, vec

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class ValidationReport:
    trace_error: float
    hermiticity_error: float
    min_diagonal: float
    # largest |Im rho_ii|; part of the literal diagonal check
    diagonal_imag: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def check_state(rho, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Trace, Hermiticity and diagonal-positivity check of a density matrix.

    Positivity is checked on the diagonal only, not as full positive
    semidefiniteness.
    """
    if isinstance(rho, MatrixSoA):
        rho = from_soa(rho)
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    diag = np.diagonal(rho)
    trace_error = float(abs(diag.sum() - 1.0))
    herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    min_diag = float(diag.real.min()) if diag.size else 0.0
    diag_imag = float(np.max(np.abs(diag.imag))) if diag.size else 0.0
    passed = (trace_error <= tol and herm <= tol and min_diag >= -tol and diag_imag <= tol)
    return ValidationReport(trace_error, herm, min_diag, diag_imag, tol, passed)


def random_density_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank state: G G^dag normalised to unit trace."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def check_generator(lindbladian, trials: int = 10, tol: float = 1e-10, seed: int = 0) -> bool:
    """True if the generator maps random states to traceless matrices.

    Accepts a :class:`~.lindblad.Lindbladian` or a bare d^2 x d^2 matrix.
    """
    mat = np.asarray(getattr(lindbladian, "matrix", lindbladian), dtype=np.complex128)
    d = int(round(np.sqrt(mat.shape[0])))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        rho = random_density_matrix(d, rng)
        drho = unvec(mat @ vec(rho))
        if abs(np.trace(drho)) > tol:
            return False
    return True

"""Lindblad models and the vectorised superoperator.

Rates live inside the collapse operators (``L_k = sqrt(gamma_k) * op``).  The
superoperator acts on row-major ``vec(rho)``, so ``vec(A rho B) = (A (x) B^T) vec(rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import linalg
from .linalg import dagger, identity, kron, matmul

__all__ = [
    "ModelError",
    "LindbladModel",
    "Lindbladian",
    "build_lindbladian",
    "apply_rhs",
    "lowering_operator",
    "transmon_model",
    "amplitude_damping_model",
    "load_model",
    "parse_model",
    "bundled_models",
    "random_hermitian",
    "random_model",
    "auto_step",
]

HERMITIAN_RTOL = 1e-12


class ModelError(ValueError):
    """Raised for malformed or unphysical model input."""


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: np.ndarray
    collapse_ops: tuple[np.ndarray, ...] = ()
    # optional drive operator, only used by the GRAPE chain
    control: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        h = linalg.as_aligned(self.hamiltonian)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ModelError(f"hamiltonian must be square, got shape {h.shape}")
        d = h.shape[0]
        scale = float(np.max(np.abs(h))) if h.size else 0.0
        if hermiticity_error(h) > HERMITIAN_RTOL * scale:
            raise ModelError("hamiltonian is not Hermitian")
        ops = tuple(linalg.as_aligned(op) for op in self.collapse_ops)
        for k, op in enumerate(ops):
            if op.shape != (d, d):
                raise ModelError(f"collapse operator {k} has shape {op.shape}, expected {(d, d)}")
        ctrl = self.control
        if ctrl is not None:
            ctrl = linalg.as_aligned(ctrl)
            if ctrl.shape != (d, d):
                raise ModelError(f"control operator has shape {ctrl.shape}, expected {(d, d)}")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "collapse_ops", ops)
        object.__setattr__(self, "control", ctrl)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def with_hamiltonian(self, h: np.ndarray) -> "LindbladModel":
        return LindbladModel(h, self.collapse_ops, self.control)


@dataclass(frozen=True)
class Lindbladian:
    dim: int
    matrix: np.ndarray


def build_lindbladian(model: LindbladModel) -> Lindbladian:
    """Assemble the d^2 x d^2 generator from Kronecker products."""
    d = model.dim
    eye = identity(d)
    h = model.hamiltonian
    out = -1j * (kron(h, eye) - kron(eye, h.T))
    for op in model.collapse_ops:
        ldl = matmul(dagger(op), op)
        out += kron(op, op.conj())
        out -= 0.5 * kron(ldl, eye)
        out -= 0.5 * kron(eye, ldl.T)
    return Lindbladian(d, linalg.as_aligned(out))


def apply_rhs(model: LindbladModel, rho) -> np.ndarray:
    """Evaluate the master-equation right-hand side directly, without Kronecker products."""
    rho = np.asarray(rho, dtype=np.complex128)
    d = model.dim
    if rho.shape != (d, d):
        raise ValueError(f"rho has shape {rho.shape}, expected {(d, d)}")
    h = model.hamiltonian
    out = -1j * (matmul(h, rho) - matmul(rho, h))
    for op in model.collapse_ops:
        opd = dagger(op)
        ldl = matmul(opd, op)
        out += matmul(matmul(op, rho), opd)
        out -= 0.5 * (matmul(ldl, rho) + matmul(rho, ldl))
    return linalg.as_aligned(out)


def lowering_operator(d: int) -> np.ndarray:
    """Truncated annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    a = linalg.aligned_zeros((d, d))
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def transmon_model(t1: float, tphi: float, anharmonicity: float, drive_amp: float) -> LindbladModel:
    """Three-level transmon with amplitude decay and number-operator dephasing.

    Pass ``tphi=math.inf`` to switch dephasing off.  The returned model's
    ``control`` is the bare drive quadrature ``(a + a^dag)/2``.
    """
    if not t1 > 0 or not tphi > 0:
        raise ModelError(f"t1 and tphi must be positive, got t1={t1!r}, tphi={tphi!r}")
    a = lowering_operator(3)
    ad = dagger(a)
    quad = 0.5 * (a + ad)
    h = drive_amp * quad + 0.5 * anharmonicity * matmul(matmul(ad, ad), matmul(a, a))
    ops = [math.sqrt(1.0 / t1) * a]
    if math.isfinite(tphi):
        ops.append(math.sqrt(1.0 / (2.0 * tphi)) * matmul(ad, a))
    return LindbladModel(h, tuple(ops), control=quad)


def amplitude_damping_model(gamma: float, hamiltonian=None) -> LindbladModel:
    """Qubit decaying from |1> to |0> at rate ``gamma``."""
    if gamma < 0:
        raise ModelError(f"gamma must be non-negative, got {gamma!r}")
    h = np.zeros((2, 2), complex) if hamiltonian is None else hamiltonian
    return LindbladModel(h, (math.sqrt(gamma) * lowering_operator(2),))


# -- model files -------------------------------------------------------------

TRANSMON_DEFAULTS = {
    "t1": 50e-6,
    "tphi": 30e-6,
    "anharmonicity": -2 * math.pi * 250e6,
    "drive_amp": 2 * math.pi * 20e6,
}


def parse_model(text: str) -> LindbladModel:
    """Parse the flat ``key = value`` model format.

    Matrices are written inline: the value is a ``complex-matrix <r> <c>``
    header and the following ``r*c`` lines hold ``<re> <im>`` pairs.
    """
    lines = iter([ln.split("#", 1)[0].strip() for ln in text.splitlines()])
    lines = (ln for ln in lines if ln)
    scalars: dict[str, str] = {}
    hamiltonian = None
    control = None
    collapse: list[np.ndarray] = []
    for line in lines:
        if "=" not in line:
            raise ModelError(f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("hamiltonian", "collapse", "control"):
            try:
                mat = linalg.read_matrix(value, lines)
            except ValueError as exc:
                raise ModelError(f"{key}: {exc}") from None
            if key == "hamiltonian":
                hamiltonian = mat
            elif key == "control":
                control = mat
            else:
                collapse.append(mat)
        elif key in ("dim", "preset", *TRANSMON_DEFAULTS):
            scalars[key] = value
        else:
            raise ModelError(f"unknown key {key!r}")

    preset = scalars.pop("preset", None)
    if preset is not None:
        if preset != "transmon":
            raise ModelError(f"unknown preset {preset!r}")
        if hamiltonian is not None or collapse:
            raise ModelError("preset models cannot also list operators")
        params = dict(TRANSMON_DEFAULTS)
        for key in TRANSMON_DEFAULTS:
            if key in scalars:
                try:
                    params[key] = float(scalars[key])
                except ValueError:
                    raise ModelError(f"{key} must be a number, got {scalars[key]!r}") from None
        if "dim" in scalars and scalars["dim"] != "3":
            raise ModelError("the transmon preset has dim = 3")
        model = transmon_model(**params)
        if control is not None:
            model = LindbladModel(model.hamiltonian, model.collapse_ops, control)
        return model

    if set(scalars) - {"dim"}:
        raise ModelError("transmon parameters given without 'preset = transmon'")
    if hamiltonian is None:
        raise ModelError("model has no hamiltonian")
    model = LindbladModel(hamiltonian, tuple(collapse), control)
    if "dim" in scalars:
        try:
            dim = int(scalars["dim"])
        except ValueError:
            raise ModelError(f"dim must be an integer, got {scalars['dim']!r}") from None
        if dim != model.dim:
            raise ModelError(f"dim = {dim} but hamiltonian is {model.dim}x{model.dim}")
    return model


def bundled_models() -> list[str]:
    root = resources.files(__package__) / "models"
    return sorted(p.name[:-len(".model")] for p in root.iterdir() if p.name.endswith(".model"))


def load_model(path_or_name: str | Path) -> LindbladModel:
    """Load a model file, or a bundled model by name (e.g. ``"transmon"``)."""
    p = Path(path_or_name)
    if p.is_file():
        return parse_model(p.read_text())
    name = str(path_or_name)
    if name in bundled_models():
        return parse_model((resources.files(__package__) / "models" / f"{name}.model").read_text())
    raise ModelError(f"no such model file or bundled model: {name!r}")


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return linalg.as_aligned(scale * 0.5 * (g + g.conj().T))


def random_model(d: int, rng: np.random.Generator, n_ops: int = 2, rate: float = 0.1) -> LindbladModel:
    """Seeded synthetic model: random Hermitian H, ``n_ops`` random collapse operators.

    ``control`` is a further random Hermitian matrix so the model can drive a
    pulse chain.
    """
    h = random_hermitian(d, rng)
    ops = tuple(
        math.sqrt(rate) * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / d
        for _ in range(n_ops)
    )
    return LindbladModel(h, ops, control=random_hermitian(d, rng))


def auto_step(lindbladian: Lindbladian, target: float = 0.01) -> float:
    """Step size dt with ||L dt||_1 == target (1.0 for a zero generator)."""
    norm = linalg.one_norm(lindbladian.matrix)
    return target / norm if norm > 0 else 1.0

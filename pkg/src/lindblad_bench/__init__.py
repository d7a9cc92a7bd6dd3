"""Lindblad master-equation propagation kernels with a roofline/benchmark harness.

The compiled kernels (:mod:`.kernels`, :mod:`.propagate`, :mod:`.bench`) are
not imported here, so the optimisation profile can still be chosen through
``LINDBLAD_BENCH_PROFILE`` after importing the package.
"""
from .expm import ExpmError, Propagator, expm, pade13_eval
from .lindblad import (
    Lindbladian,
    LindbladModel,
    ModelError,
    apply_rhs,
    build_lindbladian,
    load_model,
    transmon_model,
)
from .roofline import (
    I9_13980HX,
    KernelCharacter,
    MachineProfile,
    characterize,
    classify,
    place,
    ridge_point,
)
from .validate import ValidationReport, check_generator, check_state

__version__ = "0.1.0"

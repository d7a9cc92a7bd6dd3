"""Named optimisation profiles for the compiled kernels.

The kernels are compiled by numba/LLVM, so a profile is a set of numba code
generation settings plus the per-function ``fastmath`` switch:

============  ========  ==============  ===========  ========
profile       opt       vectorisers     target CPU   fastmath
============  ========  ==============  ===========  ========
baseline      2         loop+SLP off    generic      no
opt           3         on              generic      no
native        3         on              host         no
native-fast   3         on              host         yes
============  ========  ==============  ===========  ========

numba reads these settings once per process, so the profile is chosen with the
``LINDBLAD_BENCH_PROFILE`` environment variable before :mod:`.kernels` is
imported.  The CLI re-launches itself when ``--profile`` asks for a different
one.
"""
from __future__ import annotations

import os
import sys
import warnings
from dataclasses import dataclass, field

PROFILE_ENV = "LINDBLAD_BENCH_PROFILE"
DEFAULT_PROFILE = "native"


@dataclass(frozen=True)
class BuildProfile:
    name: str
    numba_env: dict[str, str]
    fastmath: bool
    # extra LLVM command-line options, applied once through llvmlite
    llvm_options: tuple[str, ...] = field(default=())

    @property
    def strict_fp(self) -> bool:
        return not self.fastmath


_VEC_ON = {"NUMBA_LOOP_VECTORIZE": "1", "NUMBA_SLP_VECTORIZE": "1"}

PROFILES: dict[str, BuildProfile] = {
    p.name: p
    for p in (
        BuildProfile(
            "baseline",
            {"NUMBA_OPT": "2", "NUMBA_LOOP_VECTORIZE": "0", "NUMBA_SLP_VECTORIZE": "0",
             "NUMBA_CPU_NAME": "generic"},
            fastmath=False,
        ),
        BuildProfile("opt", {"NUMBA_OPT": "3", **_VEC_ON, "NUMBA_CPU_NAME": "generic"}, fastmath=False),
        BuildProfile("native", {"NUMBA_OPT": "3", **_VEC_ON}, fastmath=False),
        BuildProfile("native-fast", {"NUMBA_OPT": "3", **_VEC_ON}, fastmath=True),
    )
}


def get_profile(name: str) -> BuildProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {', '.join(PROFILES)}") from None


def requested_profile() -> BuildProfile:
    return get_profile(os.environ.get(PROFILE_ENV, DEFAULT_PROFILE))


def profile_env(name: str, base: dict[str, str] | None = None) -> dict[str, str]:
    """Environment for a child process that should run under profile ``name``."""
    env = dict(os.environ if base is None else base)
    env[PROFILE_ENV] = get_profile(name).name
    for key in ("NUMBA_OPT", "NUMBA_LOOP_VECTORIZE", "NUMBA_SLP_VECTORIZE", "NUMBA_CPU_NAME"):
        env.pop(key, None)
    return env


def apply(profile: BuildProfile) -> None:
    """Export the profile's numba settings; must run before numba is imported."""
    if "numba" in sys.modules:
        warnings.warn(
            f"numba was imported before profile {profile.name!r} was applied; "
            "code generation settings may not match the profile",
            RuntimeWarning,
            stacklevel=2,
        )
    if "NUMBA_CPU_NAME" not in profile.numba_env:
        os.environ.pop("NUMBA_CPU_NAME", None)
    os.environ.update(profile.numba_env)
    if profile.llvm_options:
        import llvmlite.binding as llvm

        for opt in profile.llvm_options:
            llvm.set_option("lindblad_bench", opt)

"""Compiled matvec kernels and their double-buffered step loops.

Importing this module fixes the optimisation profile for the process (see
:mod:`.profiles`).  Kernels write into caller-provided output buffers and
never allocate.
"""
from __future__ import annotations

from . import profiles

PROFILE = profiles.requested_profile()
profiles.apply(PROFILE)

import llvmlite.binding as _llvm  # noqa: E402
from numba import njit  # noqa: E402

FASTMATH = PROFILE.fastmath


def simd_supported() -> bool:
    feats = _llvm.get_host_cpu_features()
    return bool(feats.get("avx2", False) and feats.get("fma", False))


@njit(fastmath=FASTMATH)
def aos_step_into(p, v, out):
    n = p.shape[0]
    for i in range(n):
        acc = 0j
        for j in range(n):
            acc += p[i, j] * v[j]
        out[i] = acc


@njit(fastmath=FASTMATH)
def soa_step_into(p_re, p_im, v_re, v_im, out_re, out_im):
    n = p_re.shape[0]
    for i in range(n):
        sr = 0.0
        si = 0.0
        for j in range(n):
            sr += p_re[i, j] * v_re[j] - p_im[i, j] * v_im[j]
            si += p_re[i, j] * v_im[j] + p_im[i, j] * v_re[j]
        out_re[i] = sr
        out_im[i] = si


@njit(fastmath=FASTMATH)
def simd_step_into(pf, vf, outf):
    """Interleaved-data kernel written as explicit 4-lane register operations.

    ``pf`` is the ``(n, 2n)`` float64 view of the complex matrix, ``vf`` and
    ``outf`` the ``2n`` float64 views of the vectors.  Each iteration handles
    two complex elements as one 256-bit lane group ``[re0, im0, re1, im1]``:
    duplicate the imaginary parts of v, multiply, swap adjacent lanes, then a
    fused multiply with alternating subtract/add against the duplicated real
    parts.
    """
    n = vf.shape[0] // 2
    pairs = n // 2
    for i in range(n):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        for jj in range(pairs):
            k = 4 * jj
            p0 = pf[i, k]
            p1 = pf[i, k + 1]
            p2 = pf[i, k + 2]
            p3 = pf[i, k + 3]
            # permute: [vr0, vr0, vr1, vr1] and [vi0, vi0, vi1, vi1]
            vr0 = vf[k]
            vi0 = vf[k + 1]
            vr1 = vf[k + 2]
            vi1 = vf[k + 3]
            # multiply by duplicated imaginary parts, then swap within pairs
            t0 = p1 * vi0
            t1 = p0 * vi0
            t2 = p3 * vi1
            t3 = p2 * vi1
            # alternating subtract/add on even/odd lanes
            a0 += p0 * vr0 - t0
            a1 += p1 * vr0 + t1
            a2 += p2 * vr1 - t2
            a3 += p3 * vr1 + t3
        re = a0 + a2
        im = a1 + a3
        if n % 2 == 1:
            k = 2 * (n - 1)
            re += pf[i, k] * vf[k] - pf[i, k + 1] * vf[k + 1]
            im += pf[i, k] * vf[k + 1] + pf[i, k + 1] * vf[k]
        outf[2 * i] = re
        outf[2 * i + 1] = im


# The loops below return which buffer holds the final state: 0 -> a, 1 -> b.

@njit(fastmath=FASTMATH)
def run_aos(p, a, b, nsteps):
    for s in range(nsteps):
        if s & 1:
            aos_step_into(p, b, a)
        else:
            aos_step_into(p, a, b)
    return nsteps & 1


@njit(fastmath=FASTMATH)
def run_soa(p_re, p_im, a_re, a_im, b_re, b_im, nsteps):
    for s in range(nsteps):
        if s & 1:
            soa_step_into(p_re, p_im, b_re, b_im, a_re, a_im)
        else:
            soa_step_into(p_re, p_im, a_re, a_im, b_re, b_im)
    return nsteps & 1


@njit(fastmath=FASTMATH)
def run_simd(pf, af, bf, nsteps):
    for s in range(nsteps):
        if s & 1:
            simd_step_into(pf, bf, af)
        else:
            simd_step_into(pf, af, bf)
    return nsteps & 1

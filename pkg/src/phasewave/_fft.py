"""FFT entry points with a process-wide worker budget.

scipy's pocketfft parallelizes batched transforms by handing whole 1-D
lines to workers, so each line is computed by exactly one worker and the
result is bit-identical for any worker count.  Everything in the package
goes through these wrappers; nothing calls scipy.fft directly.
"""
from __future__ import annotations

import os

import scipy.fft as _sf

from .errors import ParameterError

_workers = 1


def set_workers(n: int) -> None:
    """Cap the FFT worker pool. Must be >= 1."""
    global _workers
    n = int(n)
    if n < 1:
        raise ParameterError(f"worker count must be >= 1, got {n}")
    _workers = n


def get_workers() -> int:
    return _workers


def fft(a, axis=-1):
    return _sf.fft(a, axis=axis, workers=_workers)


def ifft(a, axis=-1):
    return _sf.ifft(a, axis=axis, workers=_workers)


def fft2(a):
    return _sf.fft2(a, workers=_workers)


def ifft2(a):
    return _sf.ifft2(a, workers=_workers)


def _init_from_env() -> None:
    raw = os.environ.get("PHASEWAVE_THREADS", "")
    if not raw:
        return
    try:
        n = int(raw)
    except ValueError:
        return
    if n >= 1:
        set_workers(n)


_init_from_env()

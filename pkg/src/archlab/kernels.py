"""Hot-kernel backend selection.

The numerical convolution of the built-in families is the inner loop of
every figure-sized grid, so it exists twice: a Cython extension
(``archlab._ckernels``) and a pure-Python twin (``archlab._pykernels``)
with the identical algorithm.  The compiled backend is preferred at import
time; set ``ARCHLAB_PURE_PYTHON=1`` to force the fallback (used by the
parity tests and the benchmark).
"""

from __future__ import annotations

import os

from .distributions import (Exponential, ProcessingTimeDistribution, Uniform,
                            Weibull)

if os.environ.get("ARCHLAB_PURE_PYTHON", "0") not in ("", "0"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND
WEIBULL: int = 1
EXPONENTIAL: int = 2
UNIFORM: int = 3

conv_cdf = _impl.conv_cdf


def family_code(dist: ProcessingTimeDistribution) -> tuple[int, float, float] | None:
    """Map a built-in distribution to (code, p1, p2), or None if custom."""
    if isinstance(dist, Weibull):
        return WEIBULL, dist.k, dist.u
    if isinstance(dist, Exponential):
        return EXPONENTIAL, dist.u, 0.0
    if isinstance(dist, Uniform):
        return UNIFORM, dist.v, 0.0
    return None

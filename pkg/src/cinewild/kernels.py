"""Backend selection for the batched rollout kernel.

The compiled extension is used when importable, unless the environment
variable ``CINEWILD_PURE_PYTHON`` is set to a non-empty value other than
``0``. ``CINEWILD_THREADS`` sets how many threads share a batch; results do
not depend on it because every sample is evaluated independently and
written to its own slot.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _want_pure() -> bool:
    return os.environ.get("CINEWILD_PURE_PYTHON", "") not in ("", "0")


def backend_name() -> str:
    return "python" if (_ckernels is None or _want_pure()) else "cython"


def compiled_available() -> bool:
    return _ckernels is not None


def thread_count() -> int:
    raw = os.environ.get("CINEWILD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring invalid CINEWILD_THREADS=%r", raw)
        return 1


_pool: ThreadPoolExecutor | None = None
_pool_size = 0


def _get_pool(n: int) -> ThreadPoolExecutor:
    global _pool, _pool_size
    if _pool is None or _pool_size != n:
        if _pool is not None:
            _pool.shutdown(wait=True)
        _pool = ThreadPoolExecutor(max_workers=n, thread_name_prefix="cinewild")
        _pool_size = n
    return _pool


def batch_rollout(U, x0, tgt_p, tgt_R, kp, params, *, want_stages=False, backend=None):
    """Evaluate ``U`` of shape (S, N, 7); returns costs (S,) and optionally stages (S, N, 5)."""
    U = np.ascontiguousarray(U, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float)
    tgt_p = np.ascontiguousarray(tgt_p, dtype=float)
    tgt_R = np.ascontiguousarray(tgt_R, dtype=float)
    kp = np.ascontiguousarray(kp, dtype=float)
    params = np.ascontiguousarray(params, dtype=float)
    S, N, _ = U.shape
    out = np.empty(S)
    stages = np.empty((S, N, 5)) if want_stages else None

    name = backend or backend_name()
    if name == "python":
        _pykernels.batch_rollout(U, x0, tgt_p, tgt_R, kp, params, out, stages)
    else:
        if _ckernels is None:
            raise RuntimeError("compiled kernel requested but not built")
        n = min(thread_count(), S)
        if n <= 1:
            _ckernels.batch_rollout(U, x0, tgt_p, tgt_R, kp, params, out, stages, 0, S)
        else:
            bounds = np.linspace(0, S, n + 1).astype(int)
            futs = [
                _get_pool(n).submit(
                    _ckernels.batch_rollout, U, x0, tgt_p, tgt_R, kp, params, out, stages,
                    int(lo), int(hi),
                )
                for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            for fu in futs:
                fu.result()
    if want_stages:
        return out, stages
    return out

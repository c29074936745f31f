"""Sliding covariance-ratio detector.

For adjacent disjoint windows ``Z_old = Z[:, s:s+k]`` and
``Z_new = Z[:, s+k:s+2k]`` the statistic is ``tr(R_old^-1 R_new)`` with
``R = Z Z^H``. A signal arriving from a new direction inside ``Z_new`` shows up
as a contrast peak.

Each statistic is reported at the last sample of its ``Z_new`` window, i.e. at
the time the decision becomes available.
"""
from dataclasses import dataclass

import numpy as np

from . import numerics
from ._backend import kernels
from .errors import NotPositiveDefinite, ShapeMismatch, WindowTooLarge
from .numerics import EXACT


@dataclass(frozen=True)
class DetectionTrace:
    """Statistic per evaluation index.

    ``index_map[s]`` is the stream position of the last ``Z_new`` sample for
    window start ``s`` (``s + 2k - 1``). For an edited stream this is a
    position in the edited stream; map it through the kept-index table to get
    original time.
    """

    stat: np.ndarray
    index_map: np.ndarray
    window_k: int

    def __len__(self):
        return len(self.stat)


@dataclass(frozen=True)
class PartitionPair:
    z_old: np.ndarray
    z_new: np.ndarray

    def __post_init__(self):
        old = numerics.as_complex_matrix(self.z_old, "z_old")
        new = numerics.as_complex_matrix(self.z_new, "z_new")
        if old.shape[0] != new.shape[0]:
            raise ShapeMismatch(f"antenna count differs: {old.shape[0]} vs {new.shape[0]}")
        if old.shape[1] < old.shape[0]:
            raise ShapeMismatch(
                f"z_old needs at least M={old.shape[0]} columns, got {old.shape[1]}"
            )
        if new.shape[1] < 1:
            raise ShapeMismatch("z_new has no columns")
        object.__setattr__(self, "z_old", old)
        object.__setattr__(self, "z_new", new)


def glrt_statistic(pair, opts=EXACT):
    """``Re tr(hpd_inverse(gram(z_old)) gram(z_new))`` for one partition pair."""
    r_old_inv = numerics.hpd_inverse(numerics.gram(pair.z_old), opts)
    value = numerics.trace(r_old_inv @ numerics.gram(pair.z_new))
    # trace of (HPD)^-1 times PSD is real; anything else is a numerical fault
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise ArithmeticError(f"statistic has imaginary part {value.imag:g}")
    return value.real


def sliding_trace(z, k, opts=EXACT):
    """Evaluate the statistic at every one-sample shift; length ``L - 2k + 1``."""
    z = np.ascontiguousarray(numerics.as_complex_matrix(z, "Z"))
    m, length = z.shape
    if k < m:
        raise ShapeMismatch(f"window k={k} is smaller than the antenna count M={m}")
    if length < 2 * k:
        raise WindowTooLarge(f"need at least 2k={2 * k} samples, stream has {length}")
    stats, fail = kernels().sliding_trace(z, int(k), float(opts.loading_epsilon), bool(opts.relative))
    if fail >= 0:
        raise NotPositiveDefinite(f"old-window covariance at start {fail} is not positive definite")
    n = length - 2 * k + 1
    return DetectionTrace(
        stat=np.asarray(stats, dtype=np.float64),
        index_map=np.arange(n) + 2 * k - 1,
        window_k=int(k),
    )


def threshold_decisions(trace, gamma):
    return trace.stat >= gamma

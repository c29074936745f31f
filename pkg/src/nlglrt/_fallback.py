"""Pure-numpy versions of the compiled kernels in ``_core.pyx``.

Same signatures and status conventions, so ``_backend`` can swap them freely.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def gram(a):
    a = np.asarray(a, dtype=np.complex128)
    out = a @ a.conj().T
    out = 0.5 * (out + out.conj().T)
    np.fill_diagonal(out, out.diagonal().real)
    return out


def _loading(r, eps, relative):
    if not relative:
        return eps
    return eps * np.real(np.diagonal(r, axis1=-2, axis2=-1)).mean(axis=-1)


def hpd_inverse(r, eps, relative):
    r = np.array(r, dtype=np.complex128)
    m = r.shape[0]
    r = r + _loading(r, eps, relative) * np.eye(m)
    try:
        low = np.linalg.cholesky(r)
    except np.linalg.LinAlgError:
        return np.full((m, m), np.nan + 0j), 1
    linv = np.linalg.solve(low, np.eye(m))
    out = linv.conj().T @ linv
    out = 0.5 * (out + out.conj().T)
    np.fill_diagonal(out, out.diagonal().real)
    return out, 0


def sliding_trace(z, k, eps, relative):
    z = np.asarray(z, dtype=np.complex128)
    m, length = z.shape
    n = length - 2 * k + 1
    if n <= 0:
        return np.zeros(0), -1
    # windows[s] is z[:, s:s+k]; Gram matrices by direct summation (no cumsum drift).
    windows = np.moveaxis(sliding_window_view(z, k, axis=1), 1, 0)
    old = windows[:n]
    new = windows[k:k + n]
    r_old = np.einsum("smt,snt->smn", old, old.conj())
    load = _loading(r_old, eps, relative)
    r_old = r_old + np.asarray(load)[..., None, None] * np.eye(m)
    try:
        low = np.linalg.cholesky(r_old)
    except np.linalg.LinAlgError:
        for s in range(n):
            try:
                np.linalg.cholesky(r_old[s])
            except np.linalg.LinAlgError:
                return np.zeros(n), s
        raise
    y = np.linalg.solve(low, new)
    stats = np.einsum("smt,smt->s", y, y.conj()).real
    return np.ascontiguousarray(stats), -1

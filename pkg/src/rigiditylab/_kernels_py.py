"""Pure numpy versions of the compiled kernels, used when the extension is absent."""
import itertools

import numpy as np

CHUNK = 4096


def update_best_inner(probes, points, best):
    probes = np.ascontiguousarray(probes, dtype=float)
    points = np.ascontiguousarray(points, dtype=float)
    if probes.shape[1:] != (4,) or points.shape[1:] != (4,):
        raise ValueError("expected unit quaternions as rows of length 4")
    if best.shape[0] != probes.shape[0]:
        raise ValueError("best has the wrong length")
    if points.shape[0] == 0:
        return
    for start in range(0, probes.shape[0], CHUNK):
        block = probes[start:start + CHUNK] @ points.T
        np.maximum(best[start:start + CHUNK], block.max(axis=1), out=best[start:start + CHUNK])


def _half_weights(m, L):
    """Integer vectors in [-L, L]^m whose first nonzero coordinate is positive."""
    rng = np.arange(-L, L + 1)
    grid = np.array(list(itertools.product(rng, repeat=m)), dtype=np.int64).reshape(-1, m)
    nz = grid != 0
    has = nz.any(axis=1)
    first = np.where(has, grid[np.arange(len(grid)), nz.argmax(axis=1)], 0)
    return grid[first > 0]


def torus_min_gap(theta, L, max_alpha, excl_tol):
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[0]
    mins = np.full(max_alpha + 1, np.inf)
    arg = np.zeros((max_alpha + 1, m), dtype=np.int64)
    if m == 0 or L < 1:
        return mins, arg, 0, 0
    w = _half_weights(m, int(L))
    x = w @ theta
    frac = x - np.round(x)
    excl = np.abs(frac) <= excl_tol
    keep = w[~excl]
    g = 2.0 * np.abs(np.sin(np.pi * frac[~excl]))
    nrm = np.sqrt((keep.astype(float) ** 2).sum(axis=1))
    for a in range(max_alpha + 1):
        if keep.shape[0] == 0:
            break
        vals = g * nrm**a
        i = int(np.argmin(vals))
        mins[a] = vals[i]
        arg[a] = keep[i]
    return mins, arg, int(w.shape[0]), int(excl.sum())

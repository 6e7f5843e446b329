"""
The two-step cochain complex C^0 -> C^1 -> C^2 of a presentation with
coefficients in a unitary module, its cohomology, and the orthogonal
splitting operators built from the SVD.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fpgroup import Presentation, fox_prefixes
from .unirep import UnitaryRep, check_rep, eval_word, op_norm

DEFAULT_RANK_TOL = 1e-8
# Operators here are assembled from unitaries with O(1) entries, so singular
# values below this absolute floor are roundoff (e.g. I - rho(g) for rho(g) = I
# up to a basis change) even when they are the largest ones.
ZERO_FLOOR = 1e-12


class RankWarning(UserWarning):
    """A singular value sits within a factor 10 of the rank threshold."""


def build_d0(pres: Presentation, rho: UnitaryRep) -> np.ndarray:
    """Stacked blocks I - rho(g_j), shape (k d, d)."""
    if rho.k != pres.k:
        raise ValueError("generator count mismatch")
    eye = np.eye(rho.dim, dtype=complex)
    if pres.k == 0:
        return np.zeros((0, rho.dim), dtype=complex)
    return np.vstack([eye - m for m in rho.generator_matrices])


def build_d1(pres: Presentation, rho: UnitaryRep) -> np.ndarray:
    """Fox-calculus matrix, shape (r d, k d).

    Block (i, m) sums sign * rho(prefix) over the Fox terms of relator i that
    hit generator m.
    """
    if rho.k != pres.k:
        raise ValueError("generator count mismatch")
    d = rho.dim
    out = np.zeros((pres.r * d, pres.k * d), dtype=complex)
    for i, w in enumerate(pres.relators):
        for term in fox_prefixes(w):
            m = term.generator_index
            out[i * d:(i + 1) * d, m * d:(m + 1) * d] += term.sign * eval_word(rho, term.prefix)
    return out


def relator_factorization(pres: Presentation, rho: UnitaryRep, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Write the i-th row block of d1 as S @ dhat.

    dhat is block diagonal with one averaging operator per generator and S
    sums the k coordinates.
    """
    d, k = rho.dim, pres.k
    dhat = np.zeros((k * d, k * d), dtype=complex)
    for term in fox_prefixes(pres.relators[i]):
        m = term.generator_index
        dhat[m * d:(m + 1) * d, m * d:(m + 1) * d] += term.sign * eval_word(rho, term.prefix)
    summ = np.hstack([np.eye(d, dtype=complex)] * k) if k else np.zeros((d, 0))
    return summ, dhat


@dataclass
class CochainComplex:
    d0: np.ndarray
    d1: np.ndarray
    module_dim: int
    presentation: Presentation

    @classmethod
    def build(cls, pres: Presentation, rho: UnitaryRep, check_tol: float | None = 1e-8) -> "CochainComplex":
        if check_tol is not None:
            rep_check = check_rep(pres, rho, check_tol)
            if not rep_check.passed:
                raise ValueError(
                    f"not a unitary representation of the presentation "
                    f"(unitarity {rep_check.max_unitarity:.3g}, relators {rep_check.max_relator:.3g})"
                )
        return cls(build_d0(pres, rho), build_d1(pres, rho), rho.dim, pres)

    def complex_defect(self) -> float:
        """||d1 d0|| relative to 1 + ||d1|| ||d0||."""
        if self.d1.size == 0 or self.d0.size == 0:
            return 0.0
        return op_norm(self.d1 @ self.d0) / (1 + op_norm(self.d1) * op_norm(self.d0))


def _svd(a: np.ndarray):
    if a.size == 0:
        return (np.zeros((a.shape[0], 0)), np.zeros(0), np.zeros((0, a.shape[1])))
    return np.linalg.svd(a, full_matrices=False)


def _threshold(s: np.ndarray, rank_tol: float) -> float | None:
    """rank_tol * sigma_max, or None when the matrix is numerically zero."""
    if s.size == 0 or s[0] <= ZERO_FLOOR:
        return None
    return max(rank_tol * s[0], ZERO_FLOOR)


def numerical_rank(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL, warn: list | None = None) -> int:
    s = _svd(a)[1]
    thresh = _threshold(s, rank_tol)
    if thresh is None:
        return 0
    near = s[(s > thresh / 10) & (s < thresh * 10)]
    if near.size:
        msg = f"singular values {near.tolist()} within a factor 10 of rank threshold {thresh:.3g}"
        if warn is not None:
            warn.append(msg)
        else:
            warnings.warn(msg, RankWarning, stacklevel=2)
    return int(np.count_nonzero(s > thresh))


def sigma_min_nonzero(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Smallest singular value above rank_tol * sigma_max; inf for a (numerically) zero matrix."""
    s = _svd(np.asarray(a))[1]
    thresh = _threshold(s, rank_tol)
    if thresh is None:
        return float("inf")
    kept = s[s > thresh]
    return float(kept[-1])


def pinv(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Pseudoinverse from a thin SVD, dropping singular values below rank_tol * sigma_max.

    Equals the inverse of ``a`` restricted to (ker a)^perp, precomposed with
    the orthogonal projection onto im a.
    """
    u, s, vh = _svd(a)
    out = np.zeros((a.shape[1], a.shape[0]), dtype=np.result_type(a, float))
    thresh = _threshold(s, rank_tol)
    if thresh is None:
        return out
    keep = s > thresh
    return (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T


def range_projector(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    u, s, _ = _svd(a)
    thresh = _threshold(s, rank_tol)
    if thresh is None:
        return np.zeros((a.shape[0], a.shape[0]), dtype=complex)
    uk = u[:, s > thresh]
    return uk @ uk.conj().T


@dataclass
class CohomologyReport:
    h0: int
    h1: int
    rank_d0: int
    rank_d1: int
    rank_tol: float
    dim_c0: int
    dim_c1: int
    dim_c2: int
    warnings: list

    def to_json(self) -> dict:
        return {
            "h0": self.h0,
            "h1": self.h1,
            "rank_d0": self.rank_d0,
            "rank_d1": self.rank_d1,
            "dims": [self.dim_c0, self.dim_c1, self.dim_c2],
            "rank_tol": self.rank_tol,
        }


def cohomology_dims(cx: CochainComplex, rank_tol: float = DEFAULT_RANK_TOL) -> CohomologyReport:
    msgs: list = []
    r0 = numerical_rank(cx.d0, rank_tol, msgs)
    r1 = numerical_rank(cx.d1, rank_tol, msgs)
    c0, c1, c2 = cx.d0.shape[1], cx.d0.shape[0], cx.d1.shape[0]
    if cx.d1.shape[1] != c1:
        raise ValueError("d0 and d1 shapes do not compose")
    for m in msgs:
        warnings.warn(m, RankWarning, stacklevel=2)
    return CohomologyReport(c0 - r0, c1 - r1 - r0, r0, r1, rank_tol, c0, c1, c2, msgs)


@dataclass
class SplitOperators:
    D1: np.ndarray
    D2: np.ndarray
    residual: float
    harmonic: np.ndarray

    def to_json(self, include_matrices: bool = False) -> dict:
        out = {"residual": self.residual, "harmonic_rank": int(round(np.trace(self.harmonic).real))}
        if include_matrices:
            out["D1"] = matrix_to_json(self.D1)
            out["D2"] = matrix_to_json(self.D2)
        return out


def harmonic_projector(cx: CochainComplex, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projection onto ker d1 intersected with (im d0)^perp."""
    n = cx.d0.shape[0]
    p_im = range_projector(cx.d0, rank_tol)
    p_row = range_projector(cx.d1.conj().T, rank_tol) if cx.d1.size else np.zeros((n, n))
    return np.eye(n) - p_im - p_row


def build_splitting(cx: CochainComplex, rank_tol: float = DEFAULT_RANK_TOL) -> SplitOperators:
    d1_op = pinv(cx.d0, rank_tol)
    d2_op = pinv(cx.d1, rank_tol)
    n = cx.d0.shape[0]
    ident = cx.d0 @ d1_op + d2_op @ cx.d1
    residual = op_norm(ident - np.eye(n))
    return SplitOperators(d1_op, d2_op, residual, harmonic_projector(cx, rank_tol))


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows) -> np.ndarray:
    rows = list(rows)
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    out = []
    for row in rows:
        vals = []
        for z in row:
            if isinstance(z, (int, float)):
                vals.append(complex(z))
            else:
                re, im = z
                vals.append(complex(re, im))
        out.append(vals)
    return np.array(out, dtype=complex)

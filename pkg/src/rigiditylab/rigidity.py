"""
Local rigidity at finite dimension: actions of a presentation in U(d),
the conjugacy/relator maps, a Newton iteration for the conjugacy equation
driven by the splitting of the adjoint complex, first-order obstruction
classes and centralizer deformations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import sympy

from .cochain import (
    DEFAULT_RANK_TOL,
    CochainComplex,
    SplitOperators,
    build_splitting,
    cohomology_dims,
)
from .fpgroup import Presentation
from .tame import loglog_slope
from .unirep import UnitaryRep, adjoint_rep, eval_word, op_norm, random_unitary

LOG_CUTOFF = 0.1
SLOPE_FLOOR = 1e-13


class NumericalFailure(RuntimeError):
    """Raised when the local chart (principal logarithm) is left."""


def expm(x: np.ndarray) -> np.ndarray:
    return la.expm(x)


def skew_part(x: np.ndarray) -> np.ndarray:
    return (x - x.conj().T) / 2


def random_skew(d: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Skew-hermitian matrix with operator norm ``norm``."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    x = skew_part(z)
    n = op_norm(x)
    return x * (norm / n) if n > 0 else x


def unitary_log(w: np.ndarray, cutoff: float = LOG_CUTOFF) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    Refuses when an eigenvalue has argument within ``cutoff`` of pi.
    """
    t, z = la.schur(np.asarray(w, dtype=complex), output="complex")
    lam = np.diag(t)
    ang = np.angle(lam)
    if np.any(np.abs(ang) > math.pi - cutoff):
        raise NumericalFailure(
            f"eigenvalue at angle {float(np.max(np.abs(ang))):.4f}; perturbation too large for the principal logarithm"
        )
    off = np.triu(t, 1)
    if np.abs(off).max(initial=0.0) > 1e-8 * max(1.0, np.abs(lam).max()):
        return la.logm(w)
    return (z * (1j * ang + np.log(np.abs(lam)))) @ z.conj().T


# exponential-map lemmas


def ordered_exp_basis(d: int) -> list[np.ndarray]:
    """Orthonormal basis of u(d) (skew-hermitian d x d) for Re tr(a^H b)."""
    basis = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1j
        basis.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k], e[k, j] = 1, -1
            basis.append(e / math.sqrt(2))
            e = np.zeros((d, d), dtype=complex)
            e[j, k], e[k, j] = 1j, 1j
            basis.append(e / math.sqrt(2))
    return basis


def ordered_exp(x: np.ndarray, basis: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Product of exp(x_a B_a) over a fixed ordered basis.

    Agrees with expm to first order but is not conjugation equivariant.
    """
    d = x.shape[0]
    basis = ordered_exp_basis(d) if basis is None else basis
    out = np.eye(d, dtype=complex)
    for b in basis:
        c = float(np.real(np.vdot(b, x)))
        if c:
            out = out @ expm(c * b)
    return out


@dataclass
class ExpLemmaReport:
    t: list
    product: list
    difference_quotient: list
    equivariance: list
    twisted_equivariance: list
    slopes: dict

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "residuals": {
                "product": self.product,
                "difference_quotient": self.difference_quotient,
                "equivariance": self.equivariance,
                "twisted_equivariance": self.twisted_equivariance,
            },
            "slopes": self.slopes,
            "max_equivariance_residual": max(self.equivariance),
        }


def _slope(t, res):
    t, res = np.asarray(t), np.asarray(res)
    keep = res > SLOPE_FLOOR
    if keep.sum() < 2:
        return None
    return loglog_slope(t[keep], res[keep])


def exp_lemma_probe(x: np.ndarray, y: np.ndarray, t_grid: Sequence[float] | None = None, phi: np.ndarray | None = None, seed: int = 0) -> ExpLemmaReport:
    """Residuals and log-log slopes of the exponential-map identities.

    product:      ||e^{tX} e^{tY} - e^{t(X+Y)}||           (order t^2)
    diff. quot.:  ||(e^{tX} - I)/t - X||                    (order t)
    equivariance: ||phi e^{tX} phi^-1 - e^{t phi X phi^-1}||  (zero for any phi)
    twisted:      same with the ordered-basis exponential   (order t^2)
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    d = x.shape[0]
    t_grid = list(np.logspace(-1, -4, 7) if t_grid is None else t_grid)
    if any(t <= 0 for t in t_grid):
        raise ValueError("t grid must be positive")
    if phi is None:
        phi = random_unitary(d, np.random.default_rng(seed))
    phi_inv = np.linalg.inv(phi)
    basis = ordered_exp_basis(d)
    eye = np.eye(d)
    px = phi @ x @ phi_inv
    prod, dq, eq, tw = [], [], [], []
    for t in t_grid:
        prod.append(op_norm(expm(t * x) @ expm(t * y) - expm(t * (x + y))))
        dq.append(op_norm((expm(t * x) - eye) / t - x))
        eq.append(op_norm(phi @ expm(t * x) @ phi_inv - expm(t * px)))
        tw.append(op_norm(phi @ ordered_exp(t * x, basis) @ phi_inv - ordered_exp(t * px, basis)))
    slopes = {
        "product": _slope(t_grid, prod),
        "difference_quotient": _slope(t_grid, dq),
        "twisted_equivariance": _slope(t_grid, tw),
    }
    return ExpLemmaReport([float(t) for t in t_grid], prod, dq, eq, tw, slopes)


# actions


@dataclass(frozen=True)
class ActionTuple:
    mats: tuple

    def __post_init__(self):
        object.__setattr__(self, "mats", tuple(np.asarray(m, dtype=complex) for m in self.mats))

    @property
    def dim(self) -> int:
        return self.mats[0].shape[0]

    @property
    def k(self) -> int:
        return len(self.mats)

    def as_rep(self) -> UnitaryRep:
        return UnitaryRep(self.mats)

    def conjugate(self, u: np.ndarray) -> "ActionTuple":
        ui = np.linalg.inv(u)
        return ActionTuple(tuple(u @ m @ ui for m in self.mats))

    @classmethod
    def from_rep(cls, rho: UnitaryRep) -> "ActionTuple":
        return cls(rho.generator_matrices)


def relator_residual(pres: Presentation, act: ActionTuple) -> float:
    """max over relators of ||w_i(T) - I||"""
    if act.k != pres.k:
        raise ValueError("generator count mismatch")
    rho = UnitaryRep(act.mats, unitarity_tol=float("inf"))
    eye = np.eye(act.dim)
    return max((op_norm(eval_word(rho, w) - eye) for w in pres.relators), default=0.0)


def commutant_basis(mats: Sequence[np.ndarray], tol: float = 1e-10) -> list[np.ndarray]:
    """Skew-hermitian basis of the matrices commuting with every element of ``mats``."""
    d = mats[0].shape[0]
    eye = np.eye(d)
    # row-major vec: vec(gX - Xg) = (g (x) I - I (x) g^T) vec(X)
    stacked = np.vstack([np.kron(m, eye) - np.kron(eye, m.T) for m in mats])
    _, s, vh = np.linalg.svd(stacked)
    null = vh[np.concatenate([s, np.zeros(vh.shape[0] - s.size)]) <= tol * max(1.0, s.max(initial=0.0))]
    # the commutant is *-closed, so the skew parts of X and iX span it
    cands = []
    for row in null.conj():
        x = row.reshape(d, d)
        cands += [skew_part(x), skew_part(1j * x)]
    if not cands:
        return []
    flat = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in cands])
    u, s, vh = np.linalg.svd(flat, full_matrices=False)
    rank = int(np.count_nonzero(s > 1e-8 * s[0])) if s.size and s[0] > 0 else 0
    out = []
    for v in vh[:rank]:
        m = (v[: d * d] + 1j * v[d * d:]).reshape(d, d)
        out.append(skew_part(m))
    return out


def integer_homomorphism(pres: Presentation) -> list[int]:
    """A nonzero phi in Z^k vanishing on every relator's exponent sums."""
    k = pres.k
    if pres.r == 0:
        return [1] + [0] * (k - 1)
    null = sympy.Matrix(pres.abelianization_matrix()).nullspace()
    if not null:
        raise ValueError("the abelianization is finite; no homomorphism to Z")
    vec = null[0]
    den = sympy.ilcm(*[sympy.fraction(x)[1] for x in vec])
    ints = [int(x * den) for x in vec]
    g = math.gcd(*ints)
    return [x // g for x in ints]


@dataclass
class DeformationFamily:
    base: ActionTuple
    direction: np.ndarray
    weights: list

    def at(self, t: float) -> ActionTuple:
        return ActionTuple(tuple(expm(t * w * self.direction) @ m for w, m in zip(self.weights, self.base.mats)))


def deformation_family(pres: Presentation, pi: ActionTuple, z0: np.ndarray, phi: Sequence[int], tol: float = 1e-12) -> DeformationFamily:
    """pi_t(g_i) = Exp(t phi(g_i) Z0) pi(g_i) for Z0 in the centralizer and phi: Gamma -> Z."""
    z0 = np.asarray(z0, dtype=complex)
    phi = [int(p) for p in phi]
    if len(phi) != pi.k or pi.k != pres.k:
        raise ValueError("need one integer weight per generator")
    if op_norm(z0 + z0.conj().T) > tol * max(1.0, op_norm(z0)):
        raise ValueError("direction must be skew-hermitian")
    for i, m in enumerate(pi.mats):
        c = op_norm(z0 @ m - m @ z0)
        if c > tol * max(1.0, op_norm(z0)):
            raise ValueError(f"direction does not commute with generator {i + 1} (defect {c:.3g})")
    for i, row in enumerate(pres.abelianization_matrix()):
        s = sum(a * b for a, b in zip(row, phi))
        if s != 0:
            raise ValueError(f"weights do not kill relator {i + 1} in the abelianization (sum {s})")
    return DeformationFamily(pi, z0, phi)


def perturb_action(pi: ActionTuple, mode: str = "planted", magnitude: float = 1e-2, seed: int = 0, pres: Presentation | None = None):
    """Test-case generator.

    planted:     exp(X) pi exp(-X), ||X||_2 = magnitude; returns (action, exp(X))
    raw:         exp(X_i) pi(g_i) with independent X_i; returns (action, None)
    centralizer: a deformation-family sample at t = magnitude; returns (action, family)
    """
    rng = np.random.default_rng(seed)
    d = pi.dim
    if magnitude < 0:
        raise ValueError("magnitude must be nonnegative")
    if mode == "planted":
        u = expm(random_skew(d, rng, magnitude)) if magnitude else np.eye(d, dtype=complex)
        return pi.conjugate(u), u
    if mode == "raw":
        mats = tuple(expm(random_skew(d, rng, magnitude)) @ m if magnitude else m for m in pi.mats)
        return ActionTuple(mats), None
    if mode == "centralizer":
        if pres is None:
            raise ValueError("centralizer mode needs the presentation")
        basis = commutant_basis(pi.mats)
        coeffs = rng.standard_normal(len(basis))
        z0 = sum(c * b for c, b in zip(coeffs, basis))
        z0 = z0 / op_norm(z0)
        fam = deformation_family(pres, pi, z0, integer_homomorphism(pres))
        return fam.at(magnitude), fam
    raise ValueError(f"unknown perturbation mode {mode!r}")


# Newton iteration on the conjugacy equation


@dataclass
class AdjointSplitting:
    complex: CochainComplex
    split: SplitOperators
    h1: int
    dim: int

    @classmethod
    def build(cls, pres: Presentation, pi: ActionTuple, rank_tol: float = DEFAULT_RANK_TOL) -> "AdjointSplitting":
        cx = CochainComplex.build(pres, adjoint_rep(pi.as_rep()))
        return cls(cx, build_splitting(cx, rank_tol), cohomology_dims(cx, rank_tol).h1, pi.dim)


def residual_cochain(pi: ActionTuple, cur: ActionTuple, cutoff: float = LOG_CUTOFF) -> np.ndarray:
    """Concatenated row-major vec(log(cur_i pi_i^-1))."""
    return np.concatenate([unitary_log(c @ m.conj().T, cutoff).ravel() for c, m in zip(cur.mats, pi.mats)])


def _max_block_norm(c: np.ndarray, k: int) -> float:
    return float(max(np.linalg.norm(b) for b in np.split(c, k)))


@dataclass
class ConjugacyResult:
    conjugator: np.ndarray
    history: list
    converged: bool
    obstruction: float
    iterations: int
    adjoint_h1: int
    target_relator_residual: float
    projected: bool
    conjugacy_residual: float
    warnings: list = field(default_factory=list)

    def quadratic_ratios(self, floor: float = SLOPE_FLOOR) -> list:
        """log r_{n+1} / log r_n over consecutive residuals, dropping pairs whose
        later residual is at the rounding floor."""
        h = self.history
        out = []
        for a, b in zip(h, h[1:]):
            if 0 < a < 1 and b > floor:
                out.append(math.log(b) / math.log(a))
        return out

    def to_json(self, include_conjugator: bool = False) -> dict:
        from .cochain import matrix_to_json

        out = {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_history": self.history,
            "final_residual": self.history[-1] if self.history else None,
            "conjugacy_residual": self.conjugacy_residual,
            "obstruction_norm": self.obstruction,
            "adjoint_h1": self.adjoint_h1,
            "target_relator_residual": self.target_relator_residual,
            "projected_equation_only": self.projected,
            "quadratic_ratios": self.quadratic_ratios(),
        }
        if include_conjugator:
            out["conjugator"] = matrix_to_json(self.conjugator)
        return out


def weil_newton(
    pres: Presentation,
    pi: ActionTuple,
    target: ActionTuple,
    max_iter: int = 20,
    tol: float = 1e-10,
    rank_tol: float = DEFAULT_RANK_TOL,
    cutoff: float = LOG_CUTOFF,
    adjoint: AdjointSplitting | None = None,
) -> ConjugacyResult:
    """Find u with u pi(g_i) u^-1 = target(g_i).

    The splitting of the adjoint complex is built once at pi.  Each step
    solves d0 v = c for the log-residual cochain c, and conjugates the
    current target back by exp(v), so pi and its splitting never move.
    Stops on residual <= tol, on stagnation (residual not halved), or after
    max_iter steps.
    """
    if pi.k != pres.k or target.k != pres.k or target.dim != pi.dim:
        raise ValueError("actions do not match the presentation")
    adj = adjoint or AdjointSplitting.build(pres, pi, rank_tol)
    d, k = pi.dim, pi.k
    msgs = []
    target_res = relator_residual(pres, target)
    projected = target_res > tol
    if projected:
        msgs.append(f"target is not an action (relator residual {target_res:.3g}); solving the projected equation")
    if adj.h1:
        msgs.append(f"adjoint H^1 has dimension {adj.h1}; first-order obstructions possible")
    u = np.eye(d, dtype=complex)
    cur = target
    history: list[float] = []
    converged = False
    c = residual_cochain(pi, cur, cutoff)
    steps = 0
    while True:
        r = _max_block_norm(c, k)
        history.append(r)
        if r <= tol:
            converged = True
            break
        if steps >= max_iter:
            break
        if len(history) >= 2 and r > 0.5 * history[-2]:
            msgs.append("residual stagnated")
            break
        v = skew_part((adj.split.D1 @ c).reshape(d, d))
        e = expm(v)
        u = u @ e
        cur = cur.conjugate(e.conj().T)
        steps += 1
        c = residual_cochain(pi, cur, cutoff)
    obstruction = float(np.linalg.norm(adj.split.harmonic @ c))
    conj_res = max(op_norm(a - b) for a, b in zip(pi.conjugate(u).mats, target.mats))
    return ConjugacyResult(u, history, converged, obstruction, steps, adj.h1, target_res, projected, conj_res, msgs)


def obstruction_class(pres: Presentation, pi: ActionTuple, target: ActionTuple, rank_tol: float = DEFAULT_RANK_TOL, cutoff: float = LOG_CUTOFF, adjoint: AdjointSplitting | None = None) -> tuple[np.ndarray, float]:
    """Harmonic part of the log-residual cochain of ``target`` relative to ``pi``."""
    adj = adjoint or AdjointSplitting.build(pres, pi, rank_tol)
    c = residual_cochain(pi, target, cutoff)
    h = adj.split.harmonic @ c
    return h, float(np.linalg.norm(h))

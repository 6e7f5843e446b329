"""
Unitary representations given by generator matrices, and graded families of
them tagged with Laplacian (Casimir) eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg as la

from .fpgroup import Letter, Presentation

TRIVIAL_TOL = 1e-10


def op_norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class UnitaryRep:
    """Images of the generators of a group in U(d)."""

    generator_matrices: tuple
    dim: int = field(default=-1)
    unitarity_tol: float = 1e-10

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=complex) for m in self.generator_matrices)
        dim = self.dim
        if mats:
            shapes = {m.shape for m in mats}
            if len(shapes) != 1:
                raise ValueError(f"generator matrices have different shapes {sorted(shapes)}")
            (shape,) = shapes
            if len(shape) != 2 or shape[0] != shape[1]:
                raise ValueError(f"generator matrices must be square, got {shape}")
            if dim >= 0 and dim != shape[0]:
                raise ValueError(f"declared dim {dim} but matrices are {shape}")
            dim = shape[0]
        elif dim < 0:
            raise ValueError("dimension needed when there are no generators")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "generator_matrices", mats)
        object.__setattr__(self, "dim", dim)

    @property
    def k(self) -> int:
        return len(self.generator_matrices)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.generator_matrices[i]

    def is_trivial(self, tol: float = TRIVIAL_TOL) -> bool:
        eye = np.eye(self.dim)
        return all(op_norm(m - eye) <= tol for m in self.generator_matrices)


def eval_word(rho: UnitaryRep, w: Sequence[int]) -> np.ndarray:
    """rho(w) as a matrix; inverse letters use the conjugate transpose."""
    out = np.eye(rho.dim, dtype=complex)
    for x in w:
        letter = Letter.from_int(x)
        if letter.generator_index >= rho.k:
            raise ValueError(f"letter {x} refers to a missing generator")
        m = rho[letter.generator_index]
        out = out @ (m if letter.sign > 0 else m.conj().T)
    return out


@dataclass
class RepCheck:
    unitarity: list
    relators: list
    tol: float

    @property
    def max_unitarity(self) -> float:
        return max(self.unitarity, default=0.0)

    @property
    def max_relator(self) -> float:
        return max(self.relators, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_unitarity <= self.tol and self.max_relator <= self.tol

    def to_json(self) -> dict:
        return {
            "unitarity_residuals": self.unitarity,
            "relator_residuals": self.relators,
            "max_unitarity": self.max_unitarity,
            "max_relator": self.max_relator,
            "tol": self.tol,
            "passed": self.passed,
        }


def check_rep(pres: Presentation, rho: UnitaryRep, tol: float = 1e-10) -> RepCheck:
    if rho.k != pres.k:
        raise ValueError(f"representation has {rho.k} generators, presentation has {pres.k}")
    eye = np.eye(rho.dim)
    unit = [op_norm(m.conj().T @ m - eye) for m in rho.generator_matrices]
    rels = [op_norm(eval_word(rho, w) - eye) for w in pres.relators]
    return RepCheck(unit, rels, tol)


# SU(2) irreducibles


def _spin(j) -> Fraction:
    s = Fraction(j).limit_denominator(2)
    if s < 0 or abs(float(s) - float(j)) > 1e-12:
        raise ValueError(f"spin must be a nonnegative half-integer, got {j}")
    return s


def angular_momentum(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Jx, Jy, Jz) on the spin-j module, basis ordered m = j, j-1, ..., -j."""
    j = _spin(j)
    n = int(2 * j) + 1
    jf = float(j)
    m = jf - np.arange(n)
    jz = np.diag(m).astype(complex)
    jp = np.zeros((n, n), dtype=complex)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
    for col in range(1, n):
        mm = m[col]
        jp[col - 1, col] = np.sqrt(jf * (jf + 1) - mm * (mm + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


def su2_irrep(j, rotations: Sequence[tuple], axis_tol: float = 1e-12) -> tuple[UnitaryRep, float]:
    """Spin-j irreducible with one generator per (axis, angle) rotation.

    Each generator is exp(-i angle (n . J)).  Returns the representation and
    the Casimir eigenvalue j(j+1).
    """
    j = _spin(j)
    jx, jy, jz = angular_momentum(j)
    mats = []
    for axis, angle in rotations:
        axis = np.asarray(axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1) > axis_tol:
            raise ValueError(f"rotation axis must be a unit 3-vector, got {axis}")
        gen = axis[0] * jx + axis[1] * jy + axis[2] * jz
        mats.append(la.expm(-1j * float(angle) * gen))
    n = int(2 * j) + 1
    return UnitaryRep(tuple(mats), dim=n), float(j * (j + 1))


def torus_weight_rep(theta: Sequence[float], weight: Sequence[int]) -> UnitaryRep:
    """One generator acting on C by exp(2 pi i <theta, l>)."""
    theta = np.asarray(theta, dtype=float)
    weight = np.asarray(weight, dtype=np.int64)
    if theta.shape != weight.shape:
        raise ValueError("angle and weight vectors must have the same length")
    phase = float(np.dot(theta, weight))
    phase -= np.round(phase)
    return UnitaryRep((np.array([[np.exp(2j * np.pi * phase)]]),), dim=1)


def direct_sum(reps: Sequence[UnitaryRep]) -> UnitaryRep:
    if not reps:
        return UnitaryRep((), dim=0)
    ks = {r.k for r in reps}
    if len(ks) != 1:
        raise ValueError(f"summands have different generator counts {sorted(ks)}")
    (k,) = ks
    mats = tuple(la.block_diag(*[r[i] for r in reps]) for i in range(k))
    return UnitaryRep(mats, dim=sum(r.dim for r in reps))


def adjoint_rep(rho: UnitaryRep) -> UnitaryRep:
    """X -> g X g^-1 on row-major vectorized d x d matrices."""
    return UnitaryRep(tuple(np.kron(m, m.conj()) for m in rho.generator_matrices), dim=rho.dim**2)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


@dataclass
class Component:
    rep: UnitaryRep
    eigenvalue: float
    trivial: bool
    label: str = ""


class GradedModule:
    """Finite truncation of a Laplacian-graded family of unitary modules."""

    def __init__(self, components: Sequence[tuple], trivial_tol: float = TRIVIAL_TOL):
        comps = []
        for item in components:
            rep, lam = item[0], float(item[1])
            label = item[2] if len(item) > 2 else ""
            if lam < 0:
                raise ValueError("eigenvalues must be nonnegative")
            comps.append(Component(rep, lam, rep.is_trivial(trivial_tol), label))
        lams = [c.eigenvalue for c in comps]
        if any(b < a for a, b in zip(lams, lams[1:])):
            raise ValueError("eigenvalues must be nondecreasing")
        ks = {c.rep.k for c in comps}
        if len(ks) > 1:
            raise ValueError("all components must act through the same generators")
        self.components = comps

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def dims(self) -> list[int]:
        return [c.rep.dim for c in self.components]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([c.eigenvalue for c in self.components])

    @classmethod
    def su2_family(cls, rotations, max_spin, include_trivial: bool = True) -> "GradedModule":
        spins = [Fraction(n, 2) for n in range(0 if include_trivial else 1, int(2 * Fraction(max_spin)) + 1)]
        comps = []
        for j in spins:
            rep, lam = su2_irrep(j, rotations)
            comps.append((rep, lam, f"j={j}"))
        return cls(comps)

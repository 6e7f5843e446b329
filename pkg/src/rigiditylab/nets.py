"""
Covering radii of finite subsets of SU(2) = S^3 and the growth of word-ball
epsilon-nets.

Elements of SU(2) are handled as unit quaternions; the distance is
arccos(<p, q>) in [0, pi], the bi-invariant geodesic metric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .fpgroup import Letter, alphabet
from .unirep import su2_irrep

# super-Fibonacci constants: phi = sqrt(2), psi is the real root of x^4 = x + 4
_PHI = math.sqrt(2.0)
_PSI = 1.533751168755204288118041

DEFAULT_PROBES = 200_000
DEDUP_TOL = 1e-9


def su2_to_quaternion(u: np.ndarray) -> np.ndarray:
    """[[a, b], [-conj b, conj a]] -> (Re a, Im a, Re b, Im b)

    Euclidean inner products of the images equal Re tr(u^H v) / 2.
    """
    u = np.asarray(u)
    a, b = u[..., 0, 0], u[..., 0, 1]
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def quaternion_to_su2(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    a = q[..., 0] + 1j * q[..., 1]
    b = q[..., 2] + 1j * q[..., 3]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -b.conj()
    out[..., 1, 1] = a.conj()
    return out


def su2_distance(p, q) -> float:
    return float(np.arccos(np.clip(np.dot(p, q), -1.0, 1.0)))


def super_fibonacci(n: int) -> np.ndarray:
    """Deterministic low-discrepancy unit quaternions (n x 4)."""
    s = np.arange(n) + 0.5
    r = np.sqrt(s / n)
    big_r = np.sqrt(1.0 - s / n)
    alpha = 2 * np.pi * s / _PHI
    beta = 2 * np.pi * s / _PSI
    return np.stack([r * np.sin(alpha), r * np.cos(alpha), big_r * np.sin(beta), big_r * np.cos(beta)], axis=1)


def random_quaternions(n: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def chordal_to_angle(c):
    return 2 * np.arcsin(np.clip(np.asarray(c) / 2, 0, 1))


@dataclass
class ProbeGrid:
    points: np.ndarray
    mesh: float  # estimated covering radius of the probe set itself
    seed: int

    @classmethod
    def build(cls, size: int = DEFAULT_PROBES, seed: int = 0, check_size: int = 20_000) -> "ProbeGrid":
        pts = super_fibonacci(size)
        rng = np.random.default_rng(seed)
        dist, _ = cKDTree(pts).query(random_quaternions(check_size, rng))
        return cls(pts, float(chordal_to_angle(dist.max())), seed)


@dataclass
class NetReport:
    radius: int | None
    ball_size: int
    epsilon: float
    bias: float
    probe_size: int

    def to_json(self) -> dict:
        return {
            "n": self.radius,
            "ball": self.ball_size,
            "eps": self.epsilon,
            "probe_bias": self.bias,
            "probe_size": self.probe_size,
        }


class CoveringRadius:
    """Running covering-radius estimate as points are added."""

    def __init__(self, grid: ProbeGrid):
        self.grid = grid
        self.best = np.full(grid.points.shape[0], -np.inf)
        self.count = 0

    def add(self, quats: np.ndarray):
        quats = np.ascontiguousarray(quats, dtype=float).reshape(-1, 4)
        if quats.shape[0]:
            kernels.update_best_inner(self.grid.points, quats, self.best)
            self.count += quats.shape[0]

    @property
    def epsilon(self) -> float:
        if self.count == 0:
            raise ValueError("no points added")
        return float(np.arccos(np.clip(self.best.min(), -1.0, 1.0)))


def covering_radius(points: Sequence, grid: ProbeGrid | None = None, probe_size: int = DEFAULT_PROBES, seed: int = 0) -> NetReport:
    """max over probes of the distance to the nearest input point.

    ``points`` may be unit quaternions (n x 4) or SU(2) matrices (n x 2 x 2).
    The true covering radius lies in [eps, eps + bias].
    """
    arr = np.asarray(points)
    if arr.size == 0:
        raise ValueError("need at least one point")
    quats = su2_to_quaternion(arr) if arr.shape[-2:] == (2, 2) else arr.reshape(-1, 4)
    grid = grid or ProbeGrid.build(probe_size, seed)
    cov = CoveringRadius(grid)
    cov.add(quats)
    return NetReport(None, quats.shape[0], cov.epsilon, grid.mesh, grid.points.shape[0])


def dedup_quaternions(quats: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Keep the first of every cluster of points within chordal distance tol."""
    if quats.shape[0] < 2:
        return quats
    pairs = cKDTree(quats).query_pairs(tol, output_type="ndarray")
    if pairs.size == 0:
        return quats
    drop = np.zeros(quats.shape[0], dtype=bool)
    # pairs come as (i < j); dropping j keeps the earliest representative
    drop[pairs[:, 1]] = True
    keep_first = ~drop
    return quats[keep_first]


def ball_quaternions(generators: Sequence[np.ndarray], n: int) -> list[np.ndarray]:
    """Quaternions of B(n) \\ B(n-1) for n = 0..n, built layer by layer.

    Each new word extends a word of the previous layer by one letter, so a
    layer costs one 2x2 product per word.
    """
    k = len(generators)
    mats = {}
    for x in alphabet(k):
        g = generators[Letter.from_int(x).generator_index]
        mats[x] = g if x > 0 else g.conj().T
    layers = [np.eye(2, dtype=complex)[None]]
    words = [[()]]
    letters = alphabet(k)
    for _ in range(n):
        prev_w, prev_m = words[-1], layers[-1]
        new_w, new_m = [], []
        for w, m in zip(prev_w, prev_m):
            last = w[-1] if w else 0
            for x in letters:
                if x != -last:
                    new_w.append(w + (x,))
                    new_m.append(m @ mats[x])
        words.append(new_w)
        layers.append(np.array(new_m) if new_m else np.zeros((0, 2, 2), dtype=complex))
    return [su2_to_quaternion(layer) for layer in layers]


@dataclass
class NetGrowth:
    reports: list
    constant: float | None
    fit_points: int
    probe_mesh: float
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "reports": [r.to_json() for r in self.reports],
            "fit": {"C": self.constant, "model": "n = C (log(1/eps))^4", "n_points": self.fit_points},
            "probe_mesh": self.probe_mesh,
        }


def net_growth_experiment(
    generators: Sequence[np.ndarray],
    n_max: int,
    probe_size: int = DEFAULT_PROBES,
    seed: int = 0,
    dedup_tol: float = DEDUP_TOL,
) -> NetGrowth:
    """Covering radius of the word balls B(n), n = 0..n_max, in SU(2).

    Elements closer than ``dedup_tol`` are merged across the whole ball.
    C in n = C (log(1/eps))^4 is fit by least squares through the origin over
    radii with eps < 1.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if any(g.shape != (2, 2) for g in gens):
        raise ValueError("generators must be 2x2 SU(2) matrices")
    grid = ProbeGrid.build(probe_size, seed)
    cov = CoveringRadius(grid)
    layers = ball_quaternions(gens, n_max)
    seen = np.zeros((0, 4))
    reports = []
    for n, layer in enumerate(layers):
        if layer.shape[0]:
            merged = dedup_quaternions(np.vstack([seen, layer]), dedup_tol)
            fresh = merged[seen.shape[0]:]
            seen = merged
            cov.add(fresh)
        reports.append(NetReport(n, seen.shape[0], cov.epsilon, grid.mesh, grid.points.shape[0]))
    xs = np.array([math.log(1 / r.epsilon) ** 4 for r in reports if 0 < r.epsilon < 1])
    ns = np.array([r.radius for r in reports if 0 < r.epsilon < 1], dtype=float)
    const = float(np.dot(xs, ns) / np.dot(xs, xs)) if xs.size else None
    return NetGrowth(reports, const, int(xs.size), grid.mesh)


def rotation_generators(rotations: Sequence[tuple]) -> list[np.ndarray]:
    """Spin-1/2 images of (axis, angle) rotations."""
    rep, _ = su2_irrep(0.5, rotations)
    return list(rep.generator_matrices)

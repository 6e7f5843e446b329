"""
Sobolev gradings on finite truncations of graded modules, tame-constant fits
of the form sigma >= eps * lambda^-alpha, empirical tame-degree probes, and
the exponential band decomposition into Sigma(B)-style sequences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .unirep import GradedModule

MAX_ALPHA = 16


@dataclass
class GradedVector:
    """Coefficient vectors aligned with the components of a GradedModule."""

    parts: list

    def __post_init__(self):
        self.parts = [np.asarray(p, dtype=complex).ravel() for p in self.parts]

    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(p) for p in self.parts])

    def check(self, module: GradedModule, block: int = 1):
        if len(self.parts) != len(module):
            raise ValueError(f"{len(self.parts)} parts for {len(module)} components")
        for p, d in zip(self.parts, module.dims):
            if p.size != block * d:
                raise ValueError(f"part of size {p.size} for component of dim {d} (block {block})")

    @classmethod
    def random(cls, module: GradedModule, rng: np.random.Generator, block: int = 1) -> "GradedVector":
        return cls([rng.standard_normal(block * d) + 1j * rng.standard_normal(block * d) for d in module.dims])


def sobolev_norm(module: GradedModule, v: GradedVector, k: float) -> float:
    """sqrt(sum_j (1 + lambda_j)^k ||v_j||^2)"""
    if len(v.parts) != len(module):
        raise ValueError("vector is not aligned with the module")
    w = (1 + module.eigenvalues) ** k
    return float(np.sqrt(np.sum(w * v.norms() ** 2)))


@dataclass
class TameFit:
    epsilon: float
    alpha: int
    points: list
    slope: float
    alpha_regression: int
    envelope: dict = field(default_factory=dict)

    def holds(self, rtol: float = 1e-12) -> bool:
        return all(s >= self.epsilon * max(lam, 1.0) ** (-self.alpha) * (1 - rtol) for lam, s in self.points)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "loglog_slope": self.slope,
            "alpha_regression": self.alpha_regression,
            "envelope": {str(a): e for a, e in sorted(self.envelope.items())},
            "n_points": len(self.points),
        }


def _clean_points(points, only_nontrivial: bool):
    out = []
    for p in points:
        lam, sig = float(p[0]), float(p[1])
        trivial = bool(p[2]) if len(p) > 2 else False
        if only_nontrivial and trivial:
            continue
        if not math.isfinite(sig):
            continue
        if sig <= 0:
            raise ValueError(f"nonpositive sigma {sig} at lambda {lam}")
        out.append((lam, sig))
    if not out:
        raise ValueError("no usable points to fit")
    return out


def loglog_slope(x, y) -> float:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if np.ptp(lx) == 0:
        return 0.0
    return float(np.polyfit(lx, ly, 1)[0])


def fit_tame_constants(points: Sequence, only_nontrivial: bool = True) -> TameFit:
    """Fit sigma_j >= eps * max(lambda_j, 1)^-alpha.

    The least-squares slope of log sigma against log max(lambda, 1), negated
    and rounded up, caps alpha.  Below that cap the smallest alpha reaching
    the best envelope eps(alpha) = min_j sigma_j max(lambda_j, 1)^alpha wins.
    """
    pts = _clean_points(points, only_nontrivial)
    lam = np.array([max(p[0], 1.0) for p in pts])
    sig = np.array([p[1] for p in pts])
    slope = loglog_slope(lam, sig)
    cap = int(min(max(math.ceil(-slope - 1e-9), 0), MAX_ALPHA))
    env = {a: float(np.min(sig * lam**a)) for a in range(MAX_ALPHA + 1)}
    best = env[cap]
    alpha = next(a for a in range(cap + 1) if env[a] >= best * (1 - 1e-12))
    return TameFit(env[alpha], alpha, pts, slope, cap, env)


def fit_log_envelope(points: Sequence, power: float = 4.0, only_nontrivial: bool = True) -> dict:
    """eps0 = min_j sigma_j (log(1 + lambda_j))^power, with the fitted log-exponent."""
    pts = [(lam, s) for lam, s in _clean_points(points, only_nontrivial) if lam > 0]
    if not pts:
        raise ValueError("no points with positive eigenvalue")
    logs = np.array([math.log1p(lam) for lam, _ in pts])
    sig = np.array([s for _, s in pts])
    return {
        "eps0": float(np.min(sig * logs**power)),
        "power": power,
        "fitted_log_exponent": -loglog_slope(logs, sig) if np.ptp(logs) > 0 else 0.0,
    }


@dataclass
class TameProbe:
    degree: int | None
    constants: dict
    slopes: dict
    window: tuple

    @property
    def tame(self) -> bool:
        return self.degree is not None

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "tame_in_window": self.tame,
            "constants": {str(k): c for k, c in sorted(self.constants.items())},
            "growth_slopes": {str(r): s for r, s in sorted(self.slopes.items())},
            "window": list(self.window),
        }


def tame_degree_probe(
    op: Callable[[GradedVector], GradedVector],
    module: GradedModule,
    samples: int = 4,
    k_range: Sequence[int] = (0, 1, 2, 3),
    r_max: int = 8,
    seed: int = 0,
    in_block: int = 1,
    out_block: int = 1,
    slope_tol: float = 0.25,
) -> TameProbe:
    """Smallest degree r with ||L v||_k <= C_k ||v||_{k+r} on the truncation.

    Every finite truncation is bounded, so boundedness is judged by growth:
    per-component maximal ratios are regressed against 1 + lambda over the
    upper half of the spectrum, and r is accepted once that log-log slope is
    at most ``slope_tol`` (an integer step in r moves the slope by 1/2).
    The reported C_k are the observed maxima over all samples.
    """
    rng = np.random.default_rng(seed)
    n = len(module)
    if n == 0:
        raise ValueError("empty module")
    lam = module.eigenvalues
    zeros = [np.zeros(in_block * d, dtype=complex) for d in module.dims]
    probes = []
    for j, d in enumerate(module.dims):
        for _ in range(samples):
            parts = list(zeros)
            parts[j] = rng.standard_normal(in_block * d) + 1j * rng.standard_normal(in_block * d)
            probes.append((j, GradedVector(parts)))
    for _ in range(samples):
        probes.append((-1, GradedVector.random(module, rng, in_block)))

    images = []
    for j, v in probes:
        w = op(v)
        if len(w.parts) != n:
            raise ValueError("operator must map the module family to itself")
        images.append((j, v.norms() ** 2, w.norms() ** 2))

    def ratios(k, r):
        out = []
        for j, vn, wn in images:
            num = np.sum((1 + lam) ** k * wn)
            den = np.sum((1 + lam) ** (k + r) * vn)
            out.append((j, math.sqrt(num / den) if den > 0 else 0.0))
        return out

    upper = lam >= np.median(lam)
    slopes = {}
    for r in range(r_max + 1):
        per = np.zeros(n)
        for j, q in ratios(k_range[0], r):
            if j >= 0:
                per[j] = max(per[j], q)
        mask = upper & (per > 0)
        x = 1 + lam[mask]
        slope = loglog_slope(x, per[mask]) if mask.sum() >= 2 and np.ptp(x) > 0 else 0.0
        slopes[r] = slope
        if slope <= slope_tol:
            consts = {k: max(q for _, q in ratios(k, r)) for k in k_range}
            return TameProbe(r, consts, slopes, (0, r_max))
    return TameProbe(None, {}, slopes, (0, r_max))


def block_operator(blocks: Sequence[np.ndarray]) -> Callable[[GradedVector], GradedVector]:
    """Graded operator acting on component j by the matrix blocks[j]."""

    def apply(v: GradedVector) -> GradedVector:
        return GradedVector([b @ p for b, p in zip(blocks, v.parts)])

    return apply


def multiplier_operator(module: GradedModule, fn: Callable[[float], float]) -> Callable[[GradedVector], GradedVector]:
    lam = module.eigenvalues

    def apply(v: GradedVector) -> GradedVector:
        return GradedVector([fn(l) * p for l, p in zip(lam, v.parts)])

    return apply


# Sigma(B) bands


@dataclass
class BandDecomposition:
    bands: dict  # band index -> list of component indices

    def band_of(self) -> dict:
        return {j: k for k, js in self.bands.items() for j in js}


def band_index(lam: float) -> int:
    """k with exp(k) <= 1 + lambda < exp(k + 1)."""
    x = 1.0 + float(lam)
    k = int(math.floor(math.log(x)))
    if math.exp(k + 1) <= x:
        k += 1
    elif math.exp(k) > x:
        k -= 1
    return k


def band_decompose(module: GradedModule) -> BandDecomposition:
    bands: dict = {}
    for j, comp in enumerate(module.components):
        bands.setdefault(band_index(comp.eigenvalue), []).append(j)
    return BandDecomposition(dict(sorted(bands.items())))


def split_into_bands(module: GradedModule, v: GradedVector) -> dict:
    """band index -> {component index: coefficient vector}"""
    dec = band_decompose(module)
    return {k: {j: v.parts[j] for j in js} for k, js in dec.bands.items()}


def reconstruct(bands: dict, n_components: int | None = None) -> GradedVector:
    items = {j: p for comp in bands.values() for j, p in comp.items()}
    n = n_components if n_components is not None else (max(items) + 1 if items else 0)
    missing = [j for j in range(n) if j not in items]
    if missing:
        raise ValueError(f"components {missing} absent from every band")
    return GradedVector([items[j] for j in range(n)])


def band_norms(bands: dict) -> dict:
    return {k: float(np.sqrt(sum(np.linalg.norm(p) ** 2 for p in comp.values()))) for k, comp in bands.items()}


def sigma_seminorm(norms, n: int) -> float:
    """sum_k e^{n k} ||f_k||; ``norms`` is a list indexed by band or a dict."""
    items = norms.items() if isinstance(norms, dict) else enumerate(norms)
    return float(sum(math.exp(n * k) * f for k, f in items))

"""
Spectral-gap estimates for generating sets acting unitarily, the spin sweep
over SU(2) irreducibles, averaging-operator certificates, diophantine torus
scans and the two-condition vanishing check on graded modules.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .cochain import CochainComplex, cohomology_dims, sigma_min_nonzero
from .fpgroup import Presentation
from .tame import fit_log_envelope, fit_tame_constants
from .unirep import GradedModule, UnitaryRep, eval_word, random_unitary, su2_irrep

FIXED_TOL = 1e-10


class TrivialModuleError(ValueError):
    pass


@dataclass
class GapEntry:
    eigenvalue: float
    delta_lo: float
    delta_hi: float
    witness: int
    fixed_dim: int = 0
    label: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "lambda": self.eigenvalue,
            "delta_lo": self.delta_lo,
            "delta_hi": self.delta_hi,
            "witness": self.witness,
            "fixed_dim": self.fixed_dim,
        }


def gap_quadratic_form(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Q = sum_g (I - g)^H (I - g)"""
    d = mats[0].shape[0]
    q = np.zeros((d, d), dtype=complex)
    for m in mats:
        a = np.eye(d) - m
        q += a.conj().T @ a
    return (q + q.conj().T) / 2


def generator_gap_bounds(rho: UnitaryRep, generators: Sequence[int] | None = None, fixed_tol: float = FIXED_TOL, eigenvalue: float = 0.0, label: str = "") -> GapEntry:
    """Bounds on min over unit v (orthogonal to common fixed vectors) of max_g ||v - rho(g) v||.

    With lam = smallest nonzero eigenvalue of Q, max_g >= mean_g gives
    sqrt(lam / |S|) from below, and the lam-eigenvector gives sqrt(lam) from
    above; unitarity caps the upper bound at 2.
    """
    idx = list(range(rho.k)) if generators is None else list(generators)
    if not idx or rho.dim == 0:
        raise TrivialModuleError("no generators or zero-dimensional module")
    mats = [rho[i] for i in idx]
    # singular values of the stacked I - g are the square roots of Q's
    # eigenvalues, but with absolute rather than squared accuracy
    stacked = np.vstack([np.eye(rho.dim) - m for m in mats])
    _, s, vh = np.linalg.svd(stacked, full_matrices=False)
    nonfixed = s > fixed_tol
    if not nonfixed.any():
        raise TrivialModuleError("every generator acts trivially")
    i = int(np.flatnonzero(nonfixed)[-1])
    sig = float(s[i])
    v = vh[i].conj()
    witness = idx[int(np.argmax([np.linalg.norm(v - m @ v) for m in mats]))]
    lo = sig / math.sqrt(len(mats))
    hi = min(sig, 2.0)
    return GapEntry(eigenvalue, lo, hi, witness, int((~nonfixed).sum()), label)


@dataclass
class SweepReport:
    entries: list
    eps0: float | None
    log_fit: dict
    tame_fit: dict | None
    failures: list

    def to_json(self) -> dict:
        return {
            "entries": [e.to_json() for e in self.entries],
            "eps0": self.eps0,
            "log_envelope": self.log_fit,
            "tame_fit": self.tame_fit,
            "gap_failures": self.failures,
        }

    def rows(self):
        for e in self.entries:
            yield (e.label.removeprefix("j="), e.eigenvalue, e.delta_lo, e.delta_hi)


def spin_list(max_spin) -> list[Fraction]:
    top = Fraction(max_spin).limit_denominator(2)
    return [Fraction(n, 2) for n in range(1, int(2 * top) + 1)]


def _spin_gap(j, rotations):
    rep, lam = su2_irrep(j, rotations)
    if rep.is_trivial():
        return None
    try:
        return generator_gap_bounds(rep, eigenvalue=lam, label=f"j={j}")
    except TrivialModuleError:
        return None


def dolgopyat_sweep(rotations: Sequence[tuple], max_spin, gap_tol: float = 1e-12, power: float = 4.0, threads: int = 1) -> SweepReport:
    """Gap bounds on the spin-j irreducibles, j = 1/2, 1, ..., max_spin.

    eps0 = min_j delta_lo_j (log(1 + lambda_j))^power over the sweep.
    """
    if len(rotations) < 2:
        raise ValueError("need at least two rotations")
    spins = spin_list(max_spin)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda j: _spin_gap(j, rotations), spins))
    else:
        results = [_spin_gap(j, rotations) for j in spins]
    entries, failures = [], []
    for j, e in zip(spins, results):
        if e is None:
            continue
        entries.append(e)
        if e.delta_lo <= gap_tol:
            failures.append(str(j))
    if not entries:
        return SweepReport([], None, {}, None, failures)
    pts = [(e.eigenvalue, e.delta_lo) for e in entries if e.delta_lo > gap_tol]
    log_fit = fit_log_envelope(pts, power) if pts else {}
    tame = fit_tame_constants(pts).to_json() if pts else None
    eps0 = log_fit.get("eps0")
    return SweepReport(entries, eps0, log_fit, tame, failures)


# averaging operators A = sum_j rho(g_j)


@dataclass
class AveragingCertificate:
    words: list
    eta: float
    sigma_brute: float
    passed: bool
    pair_gaps: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else "inf"

        return {
            "words": [list(w) for w in self.words],
            "eta": num(self.eta),
            "sigma_min_brute": num(self.sigma_brute),
            "pass": self.passed,
            "pair_gaps": {f"{i},{j}": num(g) for (i, j), g in sorted(self.pair_gaps.items())},
        }


def nonfixed_gap(u: np.ndarray, fixed_tol: float = FIXED_TOL) -> float:
    """Smallest ||v - u v|| over unit v orthogonal to the fixed space of u (inf if u = I)."""
    s = np.linalg.svd(np.eye(u.shape[0]) - u, compute_uv=False)
    s = s[s > fixed_tol]
    return float(s.min()) if s.size else float("inf")


def averaging_lower_bound(rho: UnitaryRep, words: Sequence, fixed_tol: float = FIXED_TOL, rank_tol: float = 1e-10) -> AveragingCertificate:
    """Compare the pairwise-gap bound eta with the true sigma_min of A on (ker A)^perp.

    eta is the minimum over ordered pairs i != j of the gap of
    rho(g_i^-1 g_j) off its fixed space.  A single word, or pairs that all
    act trivially, leave eta at 1.
    """
    if not words:
        raise ValueError("need at least one word")
    mats = [eval_word(rho, w) for w in words]
    a = sum(mats)
    pair_gaps = {}
    for i, mi in enumerate(mats):
        for j, mj in enumerate(mats):
            if i != j:
                pair_gaps[(i, j)] = nonfixed_gap(mi.conj().T @ mj, fixed_tol)
    finite = [g for g in pair_gaps.values() if math.isfinite(g)]
    eta = min(finite) if finite else 1.0
    sigma = sigma_min_nonzero(a, rank_tol)
    passed = sigma >= eta - 1e-8
    return AveragingCertificate([tuple(w) for w in words], eta, sigma, passed, pair_gaps)


def random_averaging_instance(rng: np.random.Generator, max_dim: int = 6, max_words: int = 4, max_gens: int = 3, max_len: int = 4):
    """A random unitary rep with a random list of reduced words."""
    d = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, max_gens + 1))
    rho = UnitaryRep(tuple(random_unitary(d, rng) for _ in range(k)))
    m = int(rng.integers(1, max_words + 1))
    words = []
    for _ in range(m):
        n = int(rng.integers(0, max_len + 1))
        w = []
        while len(w) < n:
            x = int(rng.integers(1, k + 1)) * (1 if rng.random() < 0.5 else -1)
            if not w or w[-1] != -x:
                w.append(x)
        words.append(tuple(w))
    return rho, words


@dataclass
class AveragingTrial:
    index: int
    rep: UnitaryRep
    certificate: AveragingCertificate


def averaging_trials(instances: int, seed: int = 0, max_dim: int = 6, max_words: int = 4) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(instances):
        rho, words = random_averaging_instance(rng, max_dim, max_words)
        out.append(AveragingTrial(i, rho, averaging_lower_bound(rho, words)))
    return out


# diophantine torus scans


@dataclass
class DiophantineReport:
    theta: list
    weight_bound: int
    profile: dict  # alpha -> (value, minimizing weight)
    scanned: int
    excluded: int
    alpha: int

    @property
    def value(self) -> float:
        return self.profile[self.alpha][0]

    def to_json(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else None

        return {
            "theta": self.theta,
            "weight_bound": self.weight_bound,
            "alpha": self.alpha,
            "eps": num(self.value),
            "argmin": self.profile[self.alpha][1],
            "profile": {str(a): {"eps": num(v), "argmin": w} for a, (v, w) in sorted(self.profile.items())},
            "scanned": self.scanned,
            "excluded_invariant": self.excluded,
            "all_invariant": self.scanned == self.excluded,
        }


def torus_gap_scan(theta: Sequence[float], weight_bound: int, alpha: int = 0, excl_tol: float = 1e-12, max_alpha: int = 4) -> DiophantineReport:
    """min over 0 < |l|_inf <= L of 2|sin(pi <theta, l>)| |l|_2^alpha.

    2|sin(pi x)| is |exp(2 pi i x) - 1| evaluated without cancellation.
    Weights with <theta, l> within excl_tol of an integer act trivially and
    are skipped.
    """
    if weight_bound < 1:
        raise ValueError("weight bound must be at least 1")
    top = max(max_alpha, alpha)
    th = np.ascontiguousarray(theta, dtype=float)
    mins, arg, scanned, excl = kernels.torus_min_gap(th, int(weight_bound), int(top), float(excl_tol))
    profile = {a: (float(mins[a]), [int(x) for x in arg[a]] if math.isfinite(mins[a]) else None) for a in range(top + 1)}
    return DiophantineReport(th.tolist(), int(weight_bound), profile, int(scanned), int(excl), int(alpha))


def angle_of(z: complex) -> float:
    """theta in [0, 1) with exp(2 pi i theta) = z / |z|."""
    return (math.atan2(z.imag, z.real) / (2 * math.pi)) % 1.0


# vanishing criterion on a graded module


@dataclass
class VanishingReport:
    h1: list
    gaps: list
    fit: dict | None
    condition1: bool
    condition2: bool

    def to_json(self) -> dict:
        return {
            "h1_per_component": self.h1,
            "gaps": [g.to_json() for g in self.gaps],
            "tame_fit": self.fit,
            "condition1": self.condition1,
            "condition2": self.condition2,
        }


def check_vanishing_criterion(pres: Presentation, module: GradedModule, rank_tol: float = 1e-8, gap_tol: float = 1e-12) -> VanishingReport:
    """Per-component H^1 = 0, and a power-law gap on the non-trivial components."""
    h1s, gaps = [], []
    for comp in module:
        cx = CochainComplex.build(pres, comp.rep)
        h1s.append(cohomology_dims(cx, rank_tol).h1)
        if not comp.trivial:
            gaps.append(generator_gap_bounds(comp.rep, eigenvalue=comp.eigenvalue, label=comp.label))
    pts = [(g.eigenvalue, g.delta_lo) for g in gaps if g.delta_lo > gap_tol]
    fit = fit_tame_constants(pts).to_json() if pts else None
    cond2 = len(pts) == len(gaps)
    return VanishingReport(h1s, gaps, fit, all(h == 0 for h in h1s), cond2)

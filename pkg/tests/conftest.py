import numpy as np
import pytest

from rigiditylab.fpgroup import Presentation, free_reduce
from rigiditylab.unirep import UnitaryRep, random_unitary

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _RESULTS[n] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, status = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _perm_matrix(p):
    m = np.zeros((len(p), len(p)))
    m[p, np.arange(len(p))] = 1.0
    return m


def _perm_word(perms, w):
    n = len(perms[0])
    out = np.arange(n)
    for x in w:
        p = perms[abs(x) - 1]
        if x < 0:
            p = np.argsort(p)
        out = out[p]
    return out


def random_presented_rep(rng, max_dim=8, max_gens=4, max_rels=4, max_len=8):
    """A random presentation with a unitary representation of it.

    Generators act through random permutations of a few points (so short
    relators exist), doubled by a sign twist and conjugated by a random
    unitary.  Relators are rejection-sampled words that act trivially.
    """
    npts = int(rng.integers(2, min(4, max_dim // 2) + 1))
    k = int(rng.integers(1, max_gens + 1))
    perms = [rng.permutation(npts) for _ in range(k)]
    rels = []
    want = int(rng.integers(0, max_rels + 1))
    tries = 0
    while len(rels) < want and tries < 20000:
        tries += 1
        n = int(rng.integers(1, max_len + 1))
        w = free_reduce(int(rng.integers(1, k + 1)) * int(rng.choice([-1, 1])) for _ in range(n))
        if w and np.array_equal(_perm_word(perms, w), np.arange(npts)):
            rels.append(w)
    pres = Presentation(k, tuple(rels))
    use_twist = 2 * npts <= max_dim and rng.random() < 0.5
    mats = []
    signs = rng.choice([-1.0, 1.0], size=k)
    for p, s in zip(perms, signs):
        m = _perm_matrix(p).astype(complex)
        if use_twist:
            m = np.block([[m, np.zeros_like(m)], [np.zeros_like(m), s * m]])
        mats.append(m)
    if use_twist:
        # the sign twist must also kill the relators
        for w in rels:
            if np.prod([signs[abs(x) - 1] for x in w]) < 0:
                mats = [m[:npts, :npts] for m in mats]
                break
    d = mats[0].shape[0]
    u = random_unitary(d, rng)
    return pres, UnitaryRep(tuple(u @ m @ u.conj().T for m in mats))


def random_cyclic_rep(n, d, rng):
    """Unitary rep of Z/n: a random n-th-root spectrum in a random basis."""
    u = random_unitary(d, rng)
    roots = np.exp(2j * np.pi * rng.integers(0, n, size=d) / n)
    return UnitaryRep(((u * roots) @ u.conj().T,))


def random_nontrivial_rep(rng, max_dim=6, max_gens=3):
    while True:
        d = int(rng.integers(1, max_dim + 1))
        k = int(rng.integers(1, max_gens + 1))
        rep = UnitaryRep(tuple(random_unitary(d, rng) for _ in range(k)))
        if not rep.is_trivial():
            return rep

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rigiditylab.fpgroup import cyclic_group, free_group, word_mul
from rigiditylab.unirep import (
    GradedModule,
    UnitaryRep,
    adjoint_rep,
    angular_momentum,
    check_rep,
    direct_sum,
    eval_word,
    random_unitary,
    su2_irrep,
    torus_weight_rep,
)

Z = [0, 0, 1]
X = [1, 0, 0]


def test_eval_word_examples():
    rho = UnitaryRep((np.diag([1j, -1j]),))
    assert np.array_equal(eval_word(rho, ()), np.eye(2))
    assert np.allclose(eval_word(rho, (1, -1)), np.eye(2), atol=1e-14)
    assert np.allclose(eval_word(rho, (1, 1)), -np.eye(2))
    with pytest.raises(ValueError):
        eval_word(rho, (2,))


@settings(max_examples=50, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8),
    st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8),
)
def test_eval_word_is_homomorphism(seed, u, v):
    rng = np.random.default_rng(seed)
    rho = UnitaryRep(tuple(random_unitary(3, rng) for _ in range(2)))
    lhs = eval_word(rho, word_mul(u, v))
    rhs = eval_word(rho, u) @ eval_word(rho, v)
    assert np.linalg.norm(lhs - rhs, 2) <= 3e-13 * max(1, len(u) + len(v))


def test_check_rep():
    z2 = cyclic_group(2)
    good = check_rep(z2, UnitaryRep((np.array([[-1.0]]),)))
    assert good.passed and good.max_relator == 0 and good.max_unitarity == 0
    bad = check_rep(z2, UnitaryRep((np.array([[1j]]),)))
    assert not bad.passed and bad.relators[0] == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    assert check_rep(free_group(2), UnitaryRep((random_unitary(3, rng), random_unitary(3, rng)))).passed
    with pytest.raises(ValueError):
        check_rep(free_group(2), UnitaryRep((np.eye(2),)))


def test_rep_validation():
    with pytest.raises(ValueError):
        UnitaryRep((np.eye(2), np.eye(3)))
    with pytest.raises(ValueError):
        UnitaryRep((np.ones((2, 3)),))
    with pytest.raises(ValueError):
        UnitaryRep(())


class TestSU2:
    def test_spin_half_about_z(self):
        th = 0.7
        rep, lam = su2_irrep(0.5, [(Z, th)])
        assert np.allclose(rep[0], np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]), atol=1e-14)
        assert lam == 0.75

    def test_spin_zero(self):
        rep, lam = su2_irrep(0, [(X, 1.3)])
        assert rep.dim == 1 and np.allclose(rep[0], 1) and lam == 0

    @pytest.mark.parametrize("j", [0.5, 1, 1.5, 2, 5, 10.5])
    def test_casimir_and_commutators(self, j):
        jx, jy, jz = angular_momentum(j)
        n = int(2 * j) + 1
        assert np.allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(n), atol=1e-10)
        assert np.allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-10)
        assert np.allclose(jy @ jz - jz @ jy, 1j * jx, atol=1e-10)

    @pytest.mark.parametrize("j", [1, 3.5, 20])
    def test_unitary(self, j):
        rep, lam = su2_irrep(j, [(Z, 1.0), (X, 1.0)])
        assert rep.dim == int(2 * j) + 1
        assert lam == pytest.approx(j * (j + 1))
        for m in rep.generator_matrices:
            assert np.linalg.norm(m.conj().T @ m - np.eye(rep.dim), 2) <= 1e-12

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            su2_irrep(0.5, [([1, 1, 0], 1.0)])
        with pytest.raises(ValueError):
            su2_irrep(0.3, [(Z, 1.0)])


class TestTorus:
    def test_examples(self):
        assert np.allclose(torus_weight_rep([0.25], [2])[0], -1)
        assert np.allclose(torus_weight_rep([0.3, 0.1], [0, 0])[0], 1)
        assert np.allclose(torus_weight_rep([1 / 3, 1 / 6], [1, 2])[0], np.exp(2j * np.pi * 2 / 3))
        with pytest.raises(ValueError):
            torus_weight_rep([0.1], [1, 2])

    def test_character_property(self):
        rng = np.random.default_rng(3)
        th = rng.random(3)
        for _ in range(20):
            a, b = rng.integers(-50, 50, 3), rng.integers(-50, 50, 3)
            lhs = torus_weight_rep(th, a + b)[0]
            rhs = torus_weight_rep(th, a)[0] @ torus_weight_rep(th, b)[0]
            assert abs(lhs[0, 0] - rhs[0, 0]) < 1e-12


def test_direct_sum():
    s = direct_sum([UnitaryRep((np.array([[1.0]]),)), UnitaryRep((np.array([[-1.0]]),))])
    assert np.array_equal(s[0], np.diag([1.0, -1.0]))
    assert direct_sum([]).dim == 0
    a, _ = su2_irrep(0.5, [(Z, 1.0)])
    b, _ = su2_irrep(1, [(Z, 1.0)])
    ab = direct_sum([a, b])
    assert ab.dim == 5 and check_rep(free_group(1), ab, 1e-12).passed
    with pytest.raises(ValueError):
        direct_sum([a, UnitaryRep((np.eye(1), np.eye(1)))])


def test_adjoint_rep_acts_by_conjugation():
    rng = np.random.default_rng(1)
    g = random_unitary(3, rng)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    ad = adjoint_rep(UnitaryRep((g,)))
    assert np.allclose(ad[0] @ x.ravel(), (g @ x @ g.conj().T).ravel())


def test_graded_module():
    mod = GradedModule.su2_family([(Z, 1.0), (X, 1.0)], 2)
    assert mod.dims == [1, 2, 3, 4, 5]
    assert np.allclose(mod.eigenvalues, [0, 0.75, 2, 3.75, 6])
    assert [c.trivial for c in mod] == [True, False, False, False, False]
    one = UnitaryRep((np.eye(1),))
    with pytest.raises(ValueError):
        GradedModule([(one, 2.0), (one, 1.0)])
    with pytest.raises(ValueError):
        GradedModule([(one, -1.0)])

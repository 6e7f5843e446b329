import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_presented_rep
from oracles import oracle_h1, qr_rank
from rigiditylab.cochain import (
    CochainComplex,
    RankWarning,
    build_d0,
    build_d1,
    build_splitting,
    cohomology_dims,
    matrix_from_json,
    matrix_to_json,
    numerical_rank,
    pinv,
    relator_factorization,
    sigma_min_nonzero,
)
from rigiditylab.fpgroup import Presentation, cyclic_group, free_abelian_rank2, free_group, trivial_group
from rigiditylab.unirep import UnitaryRep, direct_sum, op_norm, random_unitary


def rot(t):
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


def one(x):
    return UnitaryRep((np.array([[x]], dtype=complex),))


SIGN = one(-1.0)


class TestBuild:
    def test_d0_examples(self):
        assert np.allclose(build_d0(cyclic_group(2), SIGN), [[2]])
        triv = UnitaryRep((np.eye(3), np.eye(3)))
        assert not build_d0(free_abelian_rank2(), triv).any()
        s = np.linalg.svd(build_d0(free_group(1), UnitaryRep((rot(np.pi / 2),))), compute_uv=False)
        assert np.allclose(s, [np.sqrt(2), np.sqrt(2)])

    def test_d1_examples(self):
        assert np.allclose(build_d1(cyclic_group(2), SIGN), [[0]])
        assert np.allclose(build_d1(free_abelian_rank2(), UnitaryRep((np.eye(1), np.eye(1)))), [[0, 0]])
        assert build_d1(free_group(2), UnitaryRep((np.eye(2), np.eye(2)))).shape == (0, 4)

    def test_shapes(self):
        rng = np.random.default_rng(0)
        pres, rho = random_presented_rep(rng)
        cx = CochainComplex.build(pres, rho)
        d, k, r = rho.dim, pres.k, pres.r
        assert cx.d0.shape == (k * d, d) and cx.d1.shape == (r * d, k * d)

    def test_rejects_non_representation(self):
        with pytest.raises(ValueError):
            CochainComplex.build(cyclic_group(2), one(1j))

    def test_relator_factorization(self):
        rng = np.random.default_rng(5)
        pres, rho = random_presented_rep(rng, max_rels=3)
        d1 = build_d1(pres, rho)
        d = rho.dim
        for i in range(pres.r):
            s, dhat = relator_factorization(pres, rho, i)
            assert np.allclose(s @ dhat, d1[i * d:(i + 1) * d])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_complex_property(seed):
    pres, rho = random_presented_rep(np.random.default_rng(seed))
    cx = CochainComplex.build(pres, rho)
    assert cx.complex_defect() <= 1e-10
    k = pres.k
    assert op_norm(cx.d0) <= 2 * np.sqrt(k) + 1e-12
    assert op_norm(cx.d1) <= sum(len(w) for w in pres.relators) + 1e-12


class TestCohomology:
    def test_known_values(self):
        triv1 = UnitaryRep((np.eye(1), np.eye(1)))
        z2 = cohomology_dims(CochainComplex.build(cyclic_group(2), SIGN))
        assert (z2.h0, z2.h1) == (0, 0)
        zz = cohomology_dims(CochainComplex.build(free_abelian_rank2(), triv1))
        assert (zz.h0, zz.h1) == (1, 2)
        f2 = cohomology_dims(CochainComplex.build(free_group(2), triv1))
        assert f2.h1 == 2

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_qr_oracle(self, seed):
        pres, rho = random_presented_rep(np.random.default_rng(seed))
        rep = cohomology_dims(CochainComplex.build(pres, rho))
        assert rep.h1 == oracle_h1(pres, rho)
        assert rep.h0 == rho.dim - qr_rank(build_d0(pres, rho))

    def test_additive_over_direct_sums(self):
        rng = np.random.default_rng(2)
        pres, rho = random_presented_rep(rng, max_dim=4)
        # a second rep of the same presentation: the trivial one
        triv = UnitaryRep(tuple(np.eye(2) for _ in range(pres.k)))
        both = direct_sum([rho, triv])
        a = cohomology_dims(CochainComplex.build(pres, rho))
        b = cohomology_dims(CochainComplex.build(pres, triv))
        c = cohomology_dims(CochainComplex.build(pres, both))
        assert (c.h0, c.h1) == (a.h0 + b.h0, a.h1 + b.h1)

    def test_near_threshold_warning(self):
        a = np.diag([1.0, 5e-8])
        msgs = []
        assert numerical_rank(a, 1e-8, msgs) == 2
        assert msgs
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            pres = free_group(1)
            rho = UnitaryRep((np.diag([-1.0, np.exp(1e-7j)]),))
            cohomology_dims(CochainComplex.build(pres, rho))
        assert any(issubclass(w.category, RankWarning) for w in caught)

    def test_roundoff_identity_is_zero(self):
        # rho(g) = I in a random basis: d0 is pure roundoff and must have rank 0
        rng = np.random.default_rng(3)
        u = random_unitary(3, rng)
        rho = UnitaryRep(((u @ u.conj().T),))
        rep = cohomology_dims(CochainComplex.build(Presentation(1, ((-1,),)), rho))
        assert (rep.h0, rep.h1) == (3, 0)
        assert sigma_min_nonzero(build_d0(free_group(1), rho)) == np.inf


class TestSigma:
    def test_examples(self):
        assert sigma_min_nonzero(np.diag([0.0, 3.0, 4.0])) == pytest.approx(3.0)
        assert sigma_min_nonzero(np.zeros((2, 2))) == np.inf
        assert sigma_min_nonzero(np.eye(2) - rot(2 * np.pi / 3)) == pytest.approx(np.sqrt(3))

    def test_pinv_matches_numpy(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 5))
        assert np.allclose(pinv(a), np.linalg.pinv(a, rcond=1e-8), atol=1e-10)


class TestSplitting:
    def test_sign_rep(self):
        sp = build_splitting(CochainComplex.build(cyclic_group(2), SIGN))
        assert np.allclose(sp.D1, [[0.5]])
        assert np.allclose(sp.D2, 0)
        assert sp.residual <= 1e-15

    def test_zz_trivial(self):
        sp = build_splitting(CochainComplex.build(free_abelian_rank2(), UnitaryRep((np.eye(1), np.eye(1)))))
        assert sp.residual == pytest.approx(1.0, abs=1e-12)

    def test_trivial_group(self):
        cx = CochainComplex.build(trivial_group(), UnitaryRep((np.eye(1),)))
        sp = build_splitting(cx)
        assert not cx.d0.any()
        assert np.allclose(cx.d1, 1) and np.allclose(sp.D2, 1)
        assert sp.residual <= 1e-15

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_hodge_identity(self, seed):
        pres, rho = random_presented_rep(np.random.default_rng(seed))
        cx = CochainComplex.build(pres, rho)
        sp = build_splitting(cx)
        n = cx.d0.shape[0]
        assert op_norm(cx.d0 @ sp.D1 + sp.D2 @ cx.d1 + sp.harmonic - np.eye(n)) <= 1e-9
        assert abs(sp.residual - op_norm(sp.harmonic)) <= 1e-9


def test_matrix_json_round_trip():
    a = np.array([[1 + 2j, -0.5], [0, 3j]])
    assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)
    assert matrix_to_json(a)[0][0] == [1.0, 2.0]

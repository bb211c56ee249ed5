import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairbundles.core import (
    GroupElement,
    Mat2,
    PairAB,
    SymMat2,
    ValidationError,
    apply_action,
    apply_psi1,
    apply_psi2,
    cosquare,
    det_invariant,
    group_compose,
    group_identity,
    group_inverse,
    max_norm,
    pair_distance,
)


def rand_complex_matrix(rng, scale=1.0):
    return scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))


def rand_group_element(rng, max_cond=1e3, scale=1.0, unit_det=False):
    while True:
        P = rand_complex_matrix(rng, scale)
        if abs(np.linalg.det(P)) > 1e-8 and np.linalg.cond(P) <= max_cond:
            break
    if unit_det:
        P = P / math.sqrt(abs(np.linalg.det(P)))
    c = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return GroupElement(c, Mat2(P))


class TestConstructors:
    def test_mat2_rejects_nan(self):
        with pytest.raises(ValidationError):
            Mat2([[np.nan, 0], [0, 0]])

    def test_mat2_rejects_wrong_shape(self):
        with pytest.raises(ValidationError):
            Mat2(np.zeros((3, 3)))

    def test_mat2_immutable(self):
        m = Mat2.identity()
        with pytest.raises(ValueError):
            m.array[0, 0] = 5.0

    def test_symmat2_from_array_averages_offdiag(self):
        B = SymMat2.from_array([[1.0, 2.0 + 1e-12j], [2.0, 3.0]])
        assert B.b == pytest.approx(2.0 + 0.5e-12j)

    def test_symmat2_rejects_inf(self):
        with pytest.raises(ValidationError):
            SymMat2(np.inf, 0, 0)

    def test_group_element_unit_circle(self):
        with pytest.raises(ValidationError):
            GroupElement(2.0, Mat2.identity())
        GroupElement(np.exp(0.3j), Mat2.identity())  # fine

    def test_group_element_singular_P(self):
        with pytest.raises(ValidationError):
            GroupElement(1.0, Mat2(np.zeros((2, 2))))


class TestActionExamples:
    # identity acts trivially
    def test_identity_action(self):
        x = PairAB(Mat2.identity(), SymMat2.zero())
        y = apply_action(group_identity(), x)
        assert pair_distance(x, y) == 0.0

    # (1, diag(s, 1/s)) on (1(+)0, 0_2) -> (s^2 (+) 0, 0_2)
    def test_diag_scaling(self):
        s = 1.7
        g = GroupElement(1.0, Mat2(np.diag([s, 1 / s])))
        x = PairAB(Mat2(np.diag([1.0, 0.0])), SymMat2.zero())
        y = apply_action(g, x)
        assert np.allclose(y.A.array, np.diag([s * s, 0.0]))
        assert max_norm(y.B) == 0.0

    # (1, [[1,1],[0,1]]) on (I_2, 0(+)1) -> ([[1,1],[1,2]], 0(+)1)
    def test_shear(self):
        g = GroupElement(1.0, Mat2([[1, 1], [0, 1]]))
        x = PairAB(Mat2.identity(), SymMat2(0.0, 0.0, 1.0))
        y = apply_action(g, x)
        assert np.allclose(y.A.array, [[1, 1], [1, 2]])
        assert np.allclose(y.B.array, [[0, 0], [0, 1]])

    # (-1, I_2) on 1(+)-1
    def test_psi1_scalar(self):
        g = GroupElement(-1.0, Mat2.identity())
        A = apply_psi1(g, Mat2(np.diag([1.0, -1.0])))
        assert np.allclose(A.array, np.diag([-1.0, 1.0]))

    # the 1(+)0 -> [[0,1],[tau,0]] degeneration step
    def test_psi1_tau_family(self):
        tau, s = 0.5, 0.25
        P = Mat2((1 / math.sqrt(1 + tau)) * np.array([[1, 0], [1, s]]))
        A = Mat2([[0.0, 1.0], [tau, 0.0]])
        out = apply_psi1(GroupElement(1.0, P), A)
        expect = [[1.0, s / (1 + tau)], [s * tau / (1 + tau), 0.0]]
        assert np.allclose(out.array, expect)

    def test_psi2_swap(self):
        P = Mat2([[0, 1], [1, 0]])
        B = apply_psi2(P, SymMat2.diag(2.0, 5.0))
        assert (B.a, B.b, B.d) == (5.0, 0.0, 2.0)

    def test_psi2_scaling(self):
        t = 3.0
        B = apply_psi2(Mat2(np.diag([1.0, t])), SymMat2.identity())
        assert (B.a, B.b, B.d) == (1.0, 0.0, t * t)

    def test_psi2_singular_P(self):
        with pytest.raises(ValidationError):
            apply_psi2(Mat2([[1, 0], [0, 0]]), SymMat2.identity())


class TestNorms:
    def test_max_norm_zero(self):
        assert max_norm(Mat2.zero()) == 0.0

    def test_max_norm_entries(self):
        assert max_norm(Mat2([[3, -4j], [0, 1]])) == 4.0

    def test_submultiplicative(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            X = rand_complex_matrix(rng, 3.0)
            Y = rand_complex_matrix(rng, 3.0)
            assert max_norm(X @ Y) <= 2 * max_norm(X) * max_norm(Y) + 1e-12

    def test_pair_distance_examples(self):
        x = PairAB(Mat2.identity(), SymMat2.zero())
        assert pair_distance(x, x) == 0.0
        eps = 1e-3
        y = PairAB(Mat2.identity(), SymMat2.diag(eps, eps))
        assert pair_distance(x, y) == pytest.approx(eps)
        z0 = PairAB(Mat2.zero(), SymMat2.zero())
        z1 = PairAB(Mat2([[0, 1], [0, 0]]), SymMat2.zero())
        assert pair_distance(z0, z1) == 1.0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_pair_distance_triangle(self, seed):
        rng = np.random.default_rng(seed)
        pts = [
            PairAB(Mat2(rand_complex_matrix(rng)),
                   SymMat2.from_array((lambda m: m + m.T)(rand_complex_matrix(rng))))
            for _ in range(3)
        ]
        x, y, z = pts
        assert pair_distance(x, z) <= pair_distance(x, y) + pair_distance(y, z) + 1e-12


class TestCosquare:
    def test_identity(self):
        assert np.allclose(cosquare(Mat2.identity()).array, np.eye(2))

    def test_tau_form(self):
        tau = 0.3
        C = cosquare(Mat2([[0, 1], [tau, 0]]))
        assert np.allclose(C.array, np.diag([tau, 1 / tau]))

    def test_jordan_block(self):
        C = cosquare(Mat2([[0, 1], [1, 1j]]))
        assert np.allclose(C.array, [[1, 2j], [0, 1]])

    def test_singular_rejected(self):
        with pytest.raises(ValidationError):
            cosquare(Mat2([[1, 0], [0, 0]]))

    def test_similarity_covariance(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            A = rand_complex_matrix(rng)
            P = rand_complex_matrix(rng)
            if abs(np.linalg.det(A)) < 1e-3 or np.linalg.cond(P) > 50:
                continue
            lhs = cosquare(Mat2(P.conj().T @ A @ P)).array
            rhs = np.linalg.solve(P, cosquare(Mat2(A)).array @ P)
            assert np.allclose(lhs, rhs, atol=1e-8 * max(1, max_norm(rhs)))

    def test_scalar_covariance(self):
        rng = np.random.default_rng(12)
        A = rand_complex_matrix(rng)
        c = np.exp(0.4j)
        assert np.allclose(cosquare(Mat2(c * A)).array, c**2 * cosquare(Mat2(A)).array)


class TestDetInvariant:
    def test_identity_zero(self):
        assert det_invariant(PairAB(Mat2.identity(), SymMat2.zero())) == pytest.approx(1.0)

    def test_zero_identity(self):
        assert det_invariant(PairAB(Mat2.zero(), SymMat2.identity())) == pytest.approx(1.0)

    def test_orbit_constancy_unit_det(self):
        # the raw determinant scales by |det P|^4; it is constant exactly
        # along the |det P| = 1 subgroup, and its sign along the full group
        rng = np.random.default_rng(21)
        for _ in range(300):
            A = rand_complex_matrix(rng)
            B = rand_complex_matrix(rng)
            x = PairAB(Mat2(A), SymMat2.from_array(B + B.T))
            v0 = det_invariant(x)
            g = rand_group_element(rng, unit_det=True)
            v1 = det_invariant(apply_action(g, x))
            assert v1 == pytest.approx(v0, rel=1e-8, abs=1e-8)

    def test_sign_constancy_full_group(self):
        rng = np.random.default_rng(22)
        for _ in range(300):
            A = rand_complex_matrix(rng)
            B = rand_complex_matrix(rng)
            x = PairAB(Mat2(A), SymMat2.from_array(B + B.T))
            v0 = det_invariant(x)
            g = rand_group_element(rng)
            v1 = det_invariant(apply_action(g, x))
            scale = abs(np.linalg.det(g.P.array)) ** 4
            assert v1 == pytest.approx(v0 * scale, rel=1e-7, abs=1e-9)
            if abs(v0) > 1e-9:
                assert np.sign(v1) == np.sign(v0)


class TestGroup:
    def test_compose_identity(self):
        rng = np.random.default_rng(31)
        g = rand_group_element(rng)
        h = group_compose(group_identity(), g)
        assert np.allclose(h.P.array, g.P.array) and h.c == pytest.approx(g.c)

    def test_inverse_diag(self):
        g = GroupElement(1.0, Mat2(np.diag([2.0, 1.0])))
        gi = group_inverse(g)
        assert np.allclose(gi.P.array, np.diag([0.5, 1.0]))

    def test_composition_law(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            g = rand_group_element(rng, scale=2.0)
            h = rand_group_element(rng, scale=2.0)
            A = rand_complex_matrix(rng, 0.5)
            B = rand_complex_matrix(rng, 0.5)
            x = PairAB(Mat2(A), SymMat2.from_array(B + B.T))
            lhs = apply_action(g, apply_action(h, x))
            rhs = apply_action(group_compose(h, g), x)
            assert pair_distance(lhs, rhs) <= 1e-10 * max(
                1.0, max_norm(lhs.A), max_norm(lhs.B)
            )

    def test_inverse_law(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            g = rand_group_element(rng)
            gid = group_compose(g, group_inverse(g))
            assert np.allclose(gid.P.array, np.eye(2), atol=1e-9)
            assert abs(gid.c - 1.0) < 1e-9


class TestJson:
    def test_roundtrip_pair(self):
        x = PairAB(Mat2([[1 + 2j, 3], [0, -1j]]), SymMat2(0.5, 1j, -2.0))
        doc = json.loads(json.dumps(x.to_json()))
        y = PairAB.from_json(doc)
        assert pair_distance(x, y) == 0.0

    def test_roundtrip_group(self):
        g = GroupElement(np.exp(0.123456789012345j), Mat2([[1, 2], [3, 4 + 1j]]))
        doc = json.loads(json.dumps(g.to_json()))
        h = GroupElement.from_json(doc)
        assert np.allclose(g.P.array, h.P.array) and abs(g.c - h.c) < 1e-15

    def test_seventeen_digit_roundtrip(self):
        v = 0.1234567890123456789
        m = Mat2([[v, 0], [0, 0]])
        m2 = Mat2.from_json(json.loads(json.dumps(m.to_json())))
        assert m2.array[0, 0] == m.array[0, 0]

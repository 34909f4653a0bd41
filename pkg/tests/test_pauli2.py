import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recip.pauli2 import (
    SIGMA2,
    AntiunitaryOp,
    AxisAngleUnitary,
    PauliForm,
    axis_angle_from_matrix,
    axis_angle_from_rotation,
    canonical_axis,
    compose,
    conj,
    dagger,
    decompose,
    det,
    exp2,
    mul,
    rotate3,
    rotation_matrix,
    rotation_of,
    transpose_pauli,
    unitary_matrix,
)

from oracles import S0, S1, S2, S3, matrix, random_matrix, random_unitary, taylor_expm

finite = st.floats(-10, 10, allow_nan=False)
cplx = st.builds(complex, finite, finite)
pauli_forms = st.builds(lambda a, b, c, d: PauliForm(a, (b, c, d)), cplx, cplx, cplx, cplx)
unit_axes = (
    st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    .filter(lambda t: np.linalg.norm(t) > 1e-3)
    .map(lambda t: np.array(t) / np.linalg.norm(t))
)
angles = st.floats(-20, 20, allow_nan=False)


def close(p, q, tol=1e-12):
    scale = max(p.norm(), q.norm(), 1.0)
    return (p - q).norm() <= tol * scale


class TestDecomposeCompose:
    def test_sigma1(self):
        p = decompose(S1)
        assert p.v0 == 0 and np.array_equal(p.v, [1, 0, 0])

    def test_identity(self):
        p = decompose(np.eye(2))
        assert p.v0 == 1 and np.array_equal(p.v, [0, 0, 0])

    def test_explicit_layout(self):
        v0, v1, v2, v3 = 0.3 + 1j, -2 + 0.5j, 1.5j, 0.25
        M = np.array([[v0 + v3, v1 - 1j * v2], [v1 + 1j * v2, v0 - v3]])
        p = decompose(M)
        assert p.v0 == pytest.approx(v0)
        np.testing.assert_allclose(p.v, [v1, v2, v3], atol=1e-15)

    def test_sigma2_layout(self):
        np.testing.assert_array_equal(compose(PauliForm(0, (0, 1, 0))), [[0, -1j], [1j, 0]])

    def test_unit(self):
        np.testing.assert_array_equal(compose(PauliForm.scalar(1)), np.eye(2))

    def test_round_trip_random(self, rng):
        for _ in range(100):
            M = random_matrix(rng)
            np.testing.assert_allclose(compose(decompose(M)), M, atol=1e-15)

    def test_trace_formulas(self, rng):
        M = random_matrix(rng)
        p = decompose(M)
        assert p.v0 == pytest.approx(0.5 * np.trace(M))
        np.testing.assert_allclose(p.v, [0.5 * np.trace(s @ M) for s in (S1, S2, S3)], atol=1e-15)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            decompose(np.eye(3))


class TestTranspose:
    def test_sigma2_flips(self):
        q = transpose_pauli(PauliForm(0, (0, 1, 0)))
        np.testing.assert_array_equal(q.v, [0, -1, 0])

    def test_self_transpose_unchanged(self):
        p = PauliForm(1 + 1j, (2, 0, 3j))
        assert transpose_pauli(p).allclose(p, 0)

    def test_matches_matrix_transpose(self, rng):
        for _ in range(50):
            M = random_matrix(rng)
            np.testing.assert_allclose(compose(transpose_pauli(decompose(M))), M.T, atol=1e-15)

    @given(pauli_forms)
    def test_involution(self, p):
        assert transpose_pauli(transpose_pauli(p)).allclose(p, 0)

    def test_dagger_and_conj(self, rng):
        M = random_matrix(rng)
        np.testing.assert_allclose(compose(dagger(decompose(M))), M.conj().T, atol=1e-15)
        np.testing.assert_allclose(compose(conj(decompose(M))), M.conj(), atol=1e-15)


class TestMul:
    def test_sigma1_sigma2(self):
        p = mul(PauliForm(0, (1, 0, 0)), PauliForm(0, (0, 1, 0)))
        assert p.allclose(PauliForm(0, (0, 0, 1j)))

    def test_identity_left(self, rng):
        p = decompose(random_matrix(rng))
        assert mul(PauliForm.scalar(1), p).allclose(p, 1e-15)

    def test_random_vs_matrix_product(self, rng):
        for _ in range(100):
            A, B = random_matrix(rng), random_matrix(rng)
            np.testing.assert_allclose(compose(decompose(A) @ decompose(B)), A @ B, atol=1e-12)

    @given(pauli_forms, pauli_forms)
    def test_property_vs_matrix_product(self, p, q):
        direct = decompose(compose(p) @ compose(q))
        got = mul(p, q)
        scale = abs(direct.v0) + np.max(np.abs(direct.v)) + 1e-300
        assert abs(got.v0 - direct.v0) <= 1e-12 * max(scale, 1.0)
        assert np.all(np.abs(got.v - direct.v) <= 1e-12 * max(scale, 1.0))

    def test_det(self, rng):
        M = random_matrix(rng)
        assert det(decompose(M)) == pytest.approx(np.linalg.det(M))


class TestExp2:
    def test_zero(self):
        assert exp2(PauliForm.scalar(0)).allclose(PauliForm.scalar(1), 0)

    def test_scalar_phase(self):
        a = 0.7
        assert exp2(PauliForm.scalar(1j * a)).allclose(PauliForm.scalar(np.exp(1j * a)), 1e-15)

    def test_diagonal(self):
        m1, m2 = 0.3 - 1.2j, -2.0 + 0.4j
        M = decompose(np.diag([m1, m2]))
        np.testing.assert_allclose(compose(exp2(M)), np.diag([np.exp(m1), np.exp(m2)]), atol=1e-12)
        np.testing.assert_allclose(compose(exp2(M)), taylor_expm(np.diag([m1, m2])), atol=1e-12)

    def test_nilpotent_uses_series(self):
        # det N = 0 exactly: e^N = 1 + N
        N = decompose(np.array([[0, 2.5], [0, 0]]))
        np.testing.assert_allclose(compose(exp2(N)), [[1, 2.5], [0, 1]], atol=1e-15)

    def test_near_switch_is_continuous(self):
        for z in (0.99e-4, 1.01e-4):
            M = PauliForm(0.1, (z, 0, 0))
            np.testing.assert_allclose(compose(exp2(M)), taylor_expm(compose(M)), rtol=1e-14, atol=1e-15)

    @given(pauli_forms)
    def test_property_vs_taylor(self, p):
        M = compose(p)
        norm = np.linalg.norm(M, 2)
        if norm > 10:
            M = M * (10 / norm)
        ref = taylor_expm(M)
        got = compose(exp2(decompose(M)))
        assert np.linalg.norm(got - ref) <= 1e-10 * max(1.0, np.linalg.norm(ref))


class TestAxisAngle:
    def test_identity(self):
        assert unitary_matrix(AxisAngleUnitary(0, 0, (0.6, 0.8, 0))).allclose(PauliForm.scalar(1), 1e-15)

    def test_minus_i_sigma3(self):
        np.testing.assert_allclose(AxisAngleUnitary(0, math.pi, (0, 0, 1)).matrix, -1j * S3, atol=1e-15)

    def test_minus_i_sigma2(self):
        np.testing.assert_allclose(AxisAngleUnitary(0, math.pi, (0, 1, 0)).matrix, -1j * S2, atol=1e-15)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError):
            AxisAngleUnitary(0, 1, (1, 1, 0))

    @given(angles, angles, unit_axes)
    def test_unitary_and_normalized(self, delta, phi, n):
        u = AxisAngleUnitary(delta, phi, n)
        U = u.matrix
        np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-12)
        assert 0 <= u.phi < 2 * math.pi and 0 <= u.delta < 2 * math.pi
        assert abs(np.linalg.norm(u.n) - 1) <= 1e-12

    @given(angles, angles, unit_axes)
    def test_angle_normalization_keeps_matrix(self, delta, phi, n):
        ref = np.exp(1j * delta) * (math.cos(phi / 2) * S0 - 1j * math.sin(phi / 2) * matrix(0, n))
        np.testing.assert_allclose(AxisAngleUnitary(delta, phi, n).matrix, ref, atol=1e-12)

    def test_from_matrix_round_trip(self, rng):
        for _ in range(50):
            U = random_unitary(rng)
            u = axis_angle_from_matrix(U)
            np.testing.assert_allclose(u.matrix, U, atol=1e-12)
            nz = u.n[np.abs(u.n) > 0]
            assert nz.size == 0 or nz[0] > 0

    def test_from_matrix_minus_identity(self):
        u = axis_angle_from_matrix(-np.eye(2))
        np.testing.assert_allclose(u.matrix, -np.eye(2), atol=1e-15)

    def test_from_matrix_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            axis_angle_from_matrix(np.array([[1, 1], [0, 1]]))

    def test_from_rotation_round_trip(self, rng):
        for _ in range(30):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            phi = rng.uniform(0, 2 * math.pi)
            u = axis_angle_from_rotation(rotation_matrix(n, phi))
            assert u.delta == 0
            np.testing.assert_allclose(u.rotation.matrix, rotation_matrix(n, phi), atol=1e-12)


class TestRotations:
    def test_rotation_of_zero_angle(self):
        r = rotation_of(AxisAngleUnitary(0, 0, (0, 0, 1)))
        np.testing.assert_allclose(r.matrix, np.eye(3), atol=1e-15)

    def test_half_turn_z(self):
        r = rotation_of(AxisAngleUnitary(0, math.pi, (0, 0, 1)))
        np.testing.assert_allclose(r.apply((1, 0, 0)), (-1, 0, 0), atol=1e-15)

    def test_rotate3_axis_fixed(self):
        n = np.array([1, 2, 2]) / 3
        np.testing.assert_allclose(rotate3(n, 1.3, 2 * n), 2 * n, atol=1e-15)

    def test_rotate3_quarter_turn(self):
        np.testing.assert_allclose(rotate3((0, 0, 1), math.pi / 2, (1, 0, 0)), (0, 1, 0), atol=1e-15)

    def test_rotate3_rejects_non_unit(self):
        with pytest.raises(ValueError):
            rotate3((0, 0, 1.01), 1.0, (1, 0, 0))

    @given(unit_axes, angles, angles, st.tuples(finite, finite, finite))
    def test_group_law(self, n, a, b, x):
        np.testing.assert_allclose(rotate3(n, a, rotate3(n, b, x)), rotate3(n, a + b, x), atol=1e-11)

    @given(angles, angles, unit_axes, finite, st.tuples(finite, finite, finite))
    def test_conjugation_is_rotation(self, delta, phi, n, x0, x):
        u = AxisAngleUnitary(delta, phi, n)
        U = u.matrix
        lhs = U @ matrix(x0, x) @ np.linalg.inv(U)
        rhs = matrix(x0, rotate3(u.n, u.phi, x))
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_rotation_matrix_matches_rotate3(self, rng):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        x = rng.normal(size=3)
        np.testing.assert_allclose(rotation_matrix(n, 0.8) @ x, rotate3(n, 0.8, x), atol=1e-14)


class TestAntiunitary:
    def test_conjugation_apply(self):
        K = AntiunitaryOp.conjugation()
        np.testing.assert_allclose(K.apply([1, 1j]), [1, -1j])

    def test_antilinear(self, rng):
        K = AntiunitaryOp(axis_angle_from_matrix(random_unitary(rng)))
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        c = 0.3 + 0.8j
        np.testing.assert_allclose(K.apply(c * psi), np.conj(c) * K.apply(psi), atol=1e-14)

    def test_adjoint_actions_vs_matrices(self, rng):
        U = random_unitary(rng)
        K = AntiunitaryOp(axis_angle_from_matrix(U))
        U = K.matrix
        V = random_matrix(rng)
        # K V K^-1 psi = U (V (U^-1 psi)*)*  = U V* U^-1 psi
        np.testing.assert_allclose(compose(K.adjoint_action(decompose(V))), U @ V.conj() @ U.conj().T, atol=1e-12)
        np.testing.assert_allclose(compose(K.inverse_adjoint_action(decompose(V))), (U.conj().T @ V @ U).conj(), atol=1e-12)
        np.testing.assert_allclose(K.squared(), U @ U.conj(), atol=1e-15)

    def test_time_reversal_squares_to_minus_one(self):
        K = AntiunitaryOp(AxisAngleUnitary(0, math.pi, (0, 1, 0)))
        np.testing.assert_allclose(K.squared(), -np.eye(2), atol=1e-15)
        np.testing.assert_allclose(K.matrix, -1j * SIGMA2, atol=1e-15)


def test_canonical_axis():
    np.testing.assert_array_equal(canonical_axis((0, -1, 2)), (0, 1, -2))
    np.testing.assert_array_equal(canonical_axis((1e-17, -1, 0)), (0, 1, 0))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import (
    entrywise_anticommutator,
    entrywise_commutator,
    entrywise_dagger,
    entrywise_product,
    random_matrix,
    taylor_exp,
)

from floqdiss.errors import DimensionError, InvalidOperatorError
from floqdiss.operators import (
    IDENTITY,
    NAMED_OPERATORS,
    PROJ_E,
    PSI_PLUS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    anticommutator,
    as_matrix,
    check_density_matrix,
    check_hermitian,
    commutator,
    dagger,
    is_normal,
    ket_to_density,
    matrix_exponential,
    pauli_assemble,
    pauli_coefficients,
    spectral_norm,
)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
complex_2x2 = st.builds(
    lambda re, im: re + 1j * im,
    arrays(np.float64, (2, 2), elements=finite),
    arrays(np.float64, (2, 2), elements=finite),
)


class TestCommutators:
    def test_self_commutator_vanishes(self, rng):
        a = random_matrix(rng)
        assert np.array_equal(commutator(a, a), np.zeros((2, 2)))

    def test_pauli_commutator(self):
        assert np.allclose(commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z, atol=1e-15)

    def test_random_matches_entrywise(self, rng):
        for _ in range(20):
            a, b = random_matrix(rng), random_matrix(rng)
            assert np.allclose(commutator(a, b), entrywise_commutator(a, b), atol=1e-13)
            assert np.allclose(anticommutator(a, b), entrywise_anticommutator(a, b), atol=1e-13)

    def test_anticommutator_identities(self):
        assert np.allclose(anticommutator(SIGMA_MINUS, SIGMA_PLUS), IDENTITY)
        assert np.allclose(anticommutator(SIGMA_Z, SIGMA_Z), 2 * IDENTITY)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            commutator(np.eye(2), np.eye(3))
        with pytest.raises(DimensionError):
            anticommutator(np.eye(3), np.eye(2))

    @given(complex_2x2, complex_2x2)
    def test_antisymmetric_and_traceless(self, a, b):
        c = commutator(a, b)
        assert np.allclose(c, -commutator(b, a), atol=1e-12)
        assert abs(np.trace(c)) <= 1e-12 * max(1.0, np.abs(a).max() * np.abs(b).max())


class TestDagger:
    def test_sigma_plus(self):
        assert np.array_equal(dagger(SIGMA_PLUS), SIGMA_MINUS)

    def test_hermitian_fixed(self):
        h = pauli_assemble(0.3, 1.0, -2.0, 0.5)
        assert np.allclose(dagger(h), h)

    def test_product_rule(self, rng):
        a, b = random_matrix(rng), random_matrix(rng)
        assert np.allclose(dagger(a @ b), entrywise_product(entrywise_dagger(b), entrywise_dagger(a)), atol=1e-13)

    @given(complex_2x2, st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_involution_and_antilinear(self, a, c):
        assert np.array_equal(dagger(dagger(a)), a)
        assert np.allclose(dagger(c * a), np.conj(c) * dagger(a), atol=1e-12)


class TestExponential:
    def test_zero(self):
        assert np.allclose(matrix_exponential(np.zeros((2, 2))), IDENTITY, atol=0)

    def test_diagonal(self):
        theta = 0.731
        expected = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
        assert np.allclose(matrix_exponential(1j * theta * SIGMA_Z), expected, atol=1e-15)

    def test_unitary_against_series(self, rng):
        for _ in range(10):
            h = random_matrix(rng)
            a = 0.5 * (h - h.conj().T) * 3
            u = matrix_exponential(a)
            ref = taylor_exp(a)
            assert np.abs(u - ref).max() <= 1e-12 * np.abs(ref).max()
            assert np.abs(u @ u.conj().T - IDENTITY).max() <= 1e-12

    def test_non_normal_against_series(self, rng):
        a = np.array([[0.3, 4.0], [0.0, -1.1]], dtype=complex)
        assert not is_normal(a)
        ref = taylor_exp(a)
        assert np.abs(matrix_exponential(a) - ref).max() <= 1e-12 * np.abs(ref).max()

    def test_norm_twenty(self, rng):
        h = random_matrix(rng)
        a = h / np.linalg.norm(h, 2) * 20
        ref = taylor_exp(a, terms=40)
        assert np.abs(matrix_exponential(a) - ref).max() <= 1e-12 * np.abs(ref).max()

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidOperatorError):
            matrix_exponential(np.array([[np.nan, 0], [0, 0]]))

    @given(complex_2x2)
    def test_antihermitian_is_unitary(self, a):
        x = a - a.conj().T
        u = matrix_exponential(x)
        assert np.abs(u @ u.conj().T - IDENTITY).max() <= 1e-12


class TestNormsAndPauli:
    def test_norms(self):
        assert spectral_norm(SIGMA_X) == pytest.approx(1.0, abs=1e-15)
        assert spectral_norm(2.5 * SIGMA_PLUS) == pytest.approx(2.5, abs=1e-15)
        assert spectral_norm(7 * SIGMA_Z) == pytest.approx(7.0, abs=1e-14)

    def test_assemble(self):
        w0 = 3.1
        assert np.array_equal(pauli_assemble(0, 0, 0, w0), w0 * SIGMA_Z)
        assert np.allclose(pauli_assemble(0.5, 0.5, 0, 0), PSI_PLUS)

    def test_round_trip_trace_projection(self, rng):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        m = pauli_assemble(*c)
        basis = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)
        oracle = [np.trace(b @ m) / 2 for b in basis]
        assert np.allclose(pauli_coefficients(m), oracle, atol=1e-14)
        assert np.allclose(oracle, c, atol=1e-14)

    def test_named_operators(self):
        assert set(NAMED_OPERATORS) >= {"sigma_x", "sigma_plus", "proj_e", "psi_plus"}
        assert np.allclose(ket_to_density([1, 1] / np.sqrt(2)), PSI_PLUS)


class TestValidation:
    def test_accepts_preset_initial_states(self):
        check_density_matrix(PSI_PLUS)
        check_density_matrix(PROJ_E)

    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidOperatorError):
            check_density_matrix(0.9 * PROJ_E)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidOperatorError):
            check_density_matrix(np.diag([1.1, -0.1]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidOperatorError):
            check_hermitian(SIGMA_PLUS)

    def test_as_matrix_shape(self):
        with pytest.raises(DimensionError):
            as_matrix(np.ones((2, 3)))

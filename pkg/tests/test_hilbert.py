import itertools
import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from susyphase.errors import ConfigurationError, DimensionError, DomainError, NumericError
from susyphase.hilbert import (AngleGrid, ModeSpec, Operator, StateVector, angle_quadrature,
                               anticommutator, commutator, expm_action, make_basis, matrix_exponential,
                               operator_from_json, operator_to_json, state_from_json, state_to_json)


def random_operator(rng, basis, scale=1.0):
    d = basis.dim
    return Operator(basis, scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))))


class TestBasis:
    @pytest.mark.parametrize("modes, doubled, dim", [
        ([ModeSpec.bosonic(0)], False, 1),
        ([ModeSpec.bosonic(5)], False, 6),
        ([ModeSpec.bosonic(3), ModeSpec.fermionic()], True, 64),
    ])
    def test_dimensions(self, modes, doubled, dim):
        assert make_basis(modes, doubled).dim == dim

    def test_empty_mode_list(self):
        with pytest.raises(ConfigurationError):
            make_basis([])

    def test_negative_cutoff(self):
        with pytest.raises(ConfigurationError):
            ModeSpec.bosonic(-1)

    def test_duplicate_labels(self):
        with pytest.raises(ConfigurationError):
            make_basis([ModeSpec.bosonic(2, "a"), ModeSpec.fermionic("a")])

    def test_tilde_modes_follow_originals(self):
        b = make_basis([ModeSpec.bosonic(2, "b"), ModeSpec.fermionic("f")], doubled=True)
        assert b.labels == ["b", "f", "b~", "f~"]
        assert b.factor_dim == 6

    def test_row_major_order(self):
        b = make_basis([ModeSpec.bosonic(2, "b"), ModeSpec.fermionic("f")])
        assert [b.occupation_of(i) for i in range(b.dim)] == list(itertools.product(range(3), range(2)))

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.booleans(), st.data())
    @settings(max_examples=50, deadline=None)
    def test_index_bijection(self, cutoffs, doubled, data):
        modes = [ModeSpec.bosonic(c, f"m{i}") for i, c in enumerate(cutoffs)]
        b = make_basis(modes, doubled)
        occ = tuple(data.draw(st.integers(0, d - 1)) for d in b.dims)
        assert b.occupation_of(b.index_of(occ)) == occ
        idx = data.draw(st.integers(0, b.dim - 1))
        assert b.index_of(b.occupation_of(idx)) == idx

    def test_out_of_range_occupation(self):
        b = make_basis([ModeSpec.bosonic(2)])
        with pytest.raises(DomainError):
            b.index_of((3,))


class TestOperatorAlgebra:
    def test_adjoint_involution(self, rng):
        b = make_basis([ModeSpec.bosonic(3)])
        a = random_operator(rng, b)
        np.testing.assert_array_equal(a.adjoint().adjoint().matrix, a.matrix)

    def test_adjoint_antilinear(self, rng):
        b = make_basis([ModeSpec.bosonic(3)])
        a = random_operator(rng, b)
        c = 0.3 - 1.7j
        np.testing.assert_allclose((c * a).adjoint().matrix, np.conj(c) * a.adjoint().matrix, rtol=1e-15, atol=1e-15)

    def test_trace_cyclicity(self, rng):
        b = make_basis([ModeSpec.bosonic(3), ModeSpec.fermionic()])
        assert b.dim == 8
        b16 = make_basis([ModeSpec.bosonic(7), ModeSpec.fermionic()])
        for _ in range(20):
            a, c = random_operator(rng, b16), random_operator(rng, b16)
            lhs, rhs = (a @ c).trace(), (c @ a).trace()
            assert abs(lhs - rhs) <= 1e-12 * a.norm("fro") * c.norm("fro")

    def test_commutator_and_anticommutator(self, rng):
        b = make_basis([ModeSpec.bosonic(2)])
        a, c = random_operator(rng, b), random_operator(rng, b)
        np.testing.assert_allclose(commutator(a, c).matrix, a.matrix @ c.matrix - c.matrix @ a.matrix)
        np.testing.assert_allclose(anticommutator(a, c).matrix, a.matrix @ c.matrix + c.matrix @ a.matrix)

    def test_basis_mismatch(self, rng):
        a = random_operator(rng, make_basis([ModeSpec.bosonic(2)]))
        c = random_operator(rng, make_basis([ModeSpec.bosonic(2, "c")]))
        with pytest.raises(DimensionError):
            commutator(a, c)

    def test_operators_are_immutable(self, rng):
        a = random_operator(rng, make_basis([ModeSpec.bosonic(2)]))
        with pytest.raises(ValueError):
            a.matrix[0, 0] = 1


def _taylor_oracle(a, terms=60):
    out = np.eye(a.shape[0], dtype=complex)
    term = out.copy()
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


class TestMatrixExponential:
    def test_zero(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        out = matrix_exponential(np.diag([1j * np.pi, 0]))
        np.testing.assert_allclose(out, np.diag([-1, 1]), atol=1e-15)

    @pytest.mark.parametrize("phi", [0.0, 0.3, 1.1, 2.9])
    def test_two_by_two_rotation(self, phi):
        lower = np.array([[0, 0], [1, 0]])
        out = matrix_exponential(-phi * (lower - lower.T))
        want = np.array([[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]])
        np.testing.assert_allclose(out, want, atol=1e-15)

    @pytest.mark.parametrize("scale", [1e-3, 0.1, 0.5, 2.0])
    def test_against_taylor_series(self, rng, scale):
        a = scale * (rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))) / 6
        np.testing.assert_allclose(matrix_exponential(a), _taylor_oracle(a), rtol=1e-13, atol=1e-14)

    @pytest.mark.parametrize("norm", [0.01, 1.0, 5.0, 20.0])
    def test_against_scipy(self, rng, norm):
        a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        a *= norm / np.linalg.norm(a, 2)
        want = scipy.linalg.expm(a)
        got = matrix_exponential(a)
        assert np.linalg.norm(got - want) <= 1e-12 * np.linalg.norm(want)

    def test_inverse_pair(self, rng):
        for _ in range(10):
            a = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
            a *= 5 * rng.uniform() / np.linalg.norm(a, 2)
            prod = matrix_exponential(a) @ matrix_exponential(-a)
            assert np.linalg.norm(prod - np.eye(10)) <= 1e-10

    def test_defining_ode(self, rng):
        # d/dt exp(tA) = A exp(tA), central difference at t = 1
        a = rng.normal(size=(5, 5)) / 3
        h = 1e-5
        deriv = (matrix_exponential((1 + h) * a) - matrix_exponential((1 - h) * a)) / (2 * h)
        np.testing.assert_allclose(deriv, a @ matrix_exponential(a), rtol=1e-8, atol=1e-9)

    def test_non_finite(self):
        with pytest.raises(NumericError):
            matrix_exponential(np.array([[np.nan, 0], [0, 1]]))

    def test_operator_in_operator_out(self, rng):
        b = make_basis([ModeSpec.bosonic(3)])
        a = random_operator(rng, b, 0.2)
        out = matrix_exponential(a)
        assert isinstance(out, Operator) and out.basis == b

    @pytest.mark.parametrize("norm", [0.5, 8.0, 40.0])
    def test_action_matches_dense(self, rng, norm):
        a = rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15))
        a = 1j * (a + a.conj().T)
        a *= norm / np.linalg.norm(a, 2)
        v = rng.normal(size=15) + 0j
        np.testing.assert_allclose(expm_action(a, v), scipy.linalg.expm(a) @ v, rtol=1e-11, atol=1e-12)


class TestAngleQuadrature:
    def test_orthogonal_harmonic(self):
        assert abs(angle_quadrature(lambda t: np.exp(3j * t), AngleGrid(8))) < 1e-14

    @pytest.mark.parametrize("m", [1, 2, 7, 64])
    def test_constant(self, m):
        assert abs(angle_quadrature(lambda t: 1.0, AngleGrid(m)) - 2 * np.pi) < 1e-13

    @given(st.integers(1, 40), st.integers(0, 39), st.integers(0, 39))
    @settings(max_examples=200, deadline=None)
    def test_exactness(self, m, n, k):
        if abs(n - k) >= m:
            return
        val = angle_quadrature(lambda t: np.exp(1j * (n - k) * t), AngleGrid(m))
        want = 2 * np.pi if n == k else 0.0
        assert abs(val - want) <= 1e-12 * 2 * np.pi

    def test_aliasing_beyond_grid(self):
        # degree M aliases onto the constant mode
        assert abs(angle_quadrature(lambda t: np.exp(5j * t), AngleGrid(5)) - 2 * np.pi) < 1e-12

    def test_sampled_values(self):
        g = AngleGrid(16)
        assert abs(angle_quadrature(np.cos(g.nodes) ** 2, g) - np.pi) < 1e-13

    def test_empty_grid(self):
        with pytest.raises(ConfigurationError):
            AngleGrid(0)


class TestSerialization:
    def test_operator_round_trip(self, rng):
        b = make_basis([ModeSpec.bosonic(2), ModeSpec.fermionic()], doubled=True)
        a = random_operator(rng, b)
        back = operator_from_json(operator_to_json(a))
        assert back.basis == b
        np.testing.assert_array_equal(back.matrix, a.matrix)

    def test_complex_pairs_row_major(self):
        b = make_basis([ModeSpec.fermionic()])
        a = Operator(b, np.array([[1, 2j], [3 + 4j, 0]]))
        payload = json.loads(operator_to_json(a))
        assert payload["matrix"][0][1] == [0.0, 2.0]
        assert payload["matrix"][1][0] == [3.0, 4.0]

    def test_state_round_trip(self, rng):
        b = make_basis([ModeSpec.bosonic(4)])
        psi = StateVector(b, rng.normal(size=5) + 1j * rng.normal(size=5))
        back = state_from_json(state_to_json(psi))
        np.testing.assert_array_equal(back.amplitudes, psi.amplitudes)


def test_embed_product_matches_embedded_products(rng):
    from susyphase.hilbert import embed, embed_product
    b = make_basis([ModeSpec.bosonic(2, "b"), ModeSpec.fermionic("f")], doubled=True)
    x = rng.normal(size=(3, 3)) + 0j
    y = rng.normal(size=(2, 2)) + 0j
    got = embed_product(b, {"b~": x, "f": y})
    np.testing.assert_allclose(got.matrix, (embed(b, "b~", x) @ embed(b, "f", y)).matrix, atol=1e-14)
    with pytest.raises(ConfigurationError):
        embed_product(b, {"q": y})

import numpy as np
import pytest

from caplab import qmath
from conftest import random_density

I2 = np.eye(2, dtype=complex)
I3 = np.eye(3, dtype=complex)


class TestTensor:
    def test_identity_factors(self):
        np.testing.assert_array_equal(qmath.tensor(I2, I3), np.eye(6))

    def test_basis_projectors(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.diag([0.0, 1.0]).astype(complex)
        np.testing.assert_array_equal(qmath.tensor(a, b), np.diag([0, 1, 0, 0]))

    def test_matches_index_formula(self, rng):
        # Entrywise products: 1e-13 slack because numpy's vectorized complex
        # multiply may round differently (FMA) than the scalar path.
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        t = qmath.tensor(a, b)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        assert abs(t[i * 2 + k, j * 2 + l] - a[i, j] * b[k, l]) < 1e-13

    def test_associative(self, rng):
        mats = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                for _ in range(3)]
        left = qmath.tensor(qmath.tensor(mats[0], mats[1]), mats[2])
        right = qmath.tensor(mats[0], qmath.tensor(mats[1], mats[2]))
        np.testing.assert_allclose(left, right, atol=1e-13)


class TestPartialTrace:
    def test_product_state_factorizes(self, rng):
        rho = random_density(2, rng)
        sigma = random_density(3, rng)
        reduced = qmath.partial_trace(qmath.tensor(rho, sigma), (2, 3), [0])
        np.testing.assert_allclose(reduced, rho, atol=1e-12)

    def test_bell_state_marginals(self):
        psi = qmath.max_entangled_state(2)
        proj = np.outer(psi, psi.conj())
        for keep in ([0], [1]):
            np.testing.assert_allclose(
                qmath.partial_trace(proj, (2, 2), keep), I2 / 2, atol=1e-12
            )

    def test_matches_naive_index_sum(self, rng):
        # Three parties with dims (2, 2, 3); trace out the middle one.
        dims = (2, 2, 3)
        rho = random_density(12, rng)
        got = qmath.partial_trace(rho, dims, keep=[0, 2])
        expected = np.zeros((6, 6), dtype=complex)
        for a in range(2):
            for c in range(3):
                for a2 in range(2):
                    for c2 in range(3):
                        for b in range(2):
                            row = (a * 2 + b) * 3 + c
                            col = (a2 * 2 + b) * 3 + c2
                            expected[a * 3 + c, a2 * 3 + c2] += rho[row, col]
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_trace_preserved(self, rng):
        rho = random_density(12, rng)
        reduced = qmath.partial_trace(rho, (2, 2, 3), [1])
        assert reduced.trace().real == pytest.approx(1.0, abs=1e-12)

    def test_composes_with_tensor(self, rng):
        rho = random_density(3, rng)
        sigma = random_density(2, rng)
        got = qmath.partial_trace(qmath.tensor(rho, sigma), (3, 2), [0])
        np.testing.assert_allclose(got, rho * sigma.trace(), atol=1e-10)

    def test_rejects_bad_dims(self, rng):
        with pytest.raises(ValueError):
            qmath.partial_trace(random_density(4, rng), (2, 3), [0])
        with pytest.raises(ValueError):
            qmath.partial_trace(random_density(4, rng), (2, 2), [])


class TestEntropy:
    def test_pure_state_is_zero(self, rng):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        assert qmath.von_neumann_entropy(np.outer(psi, psi.conj())) == 0.0

    def test_maximally_mixed(self):
        assert qmath.von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)

    def test_hand_evaluated_spectrum(self):
        rho = np.diag([0.5, 0.25, 0.25]).astype(complex)
        assert qmath.von_neumann_entropy(rho) == pytest.approx(1.5, abs=1e-12)

    def test_rejects_invalid_states(self):
        with pytest.raises(ValueError):
            qmath.von_neumann_entropy(np.diag([0.7, 0.7]))  # trace 1.4
        with pytest.raises(ValueError):
            qmath.von_neumann_entropy(np.array([[0.5, 0.5], [0.0, 0.5]]))
        with pytest.raises(ValueError):
            qmath.von_neumann_entropy(np.diag([1.5, -0.5]))

    def test_unitary_invariance(self, rng):
        rho = random_density(4, rng)
        s = qmath.von_neumann_entropy(rho)
        for _ in range(10):
            u = qmath.haar_unitary(4, rng)
            assert qmath.von_neumann_entropy(u @ rho @ u.conj().T) == pytest.approx(
                s, abs=1e-9
            )

    def test_additive_on_products(self, rng):
        for _ in range(10):
            rho = random_density(2, rng)
            sigma = random_density(3, rng)
            total = qmath.von_neumann_entropy(qmath.tensor(rho, sigma))
            parts = qmath.von_neumann_entropy(rho) + qmath.von_neumann_entropy(sigma)
            assert total == pytest.approx(parts, abs=1e-9)

    def test_marginal_entropy_agrees_with_analytic(self, rng):
        rho = random_density(2, rng)
        sigma = random_density(3, rng)
        joint = qmath.tensor(rho, sigma)
        reduced = qmath.partial_trace(joint, (2, 3), [1])
        assert qmath.von_neumann_entropy(reduced) == pytest.approx(
            qmath.von_neumann_entropy(sigma), abs=1e-10
        )


class TestMaxEntangled:
    def test_d1_is_basis_vector(self):
        np.testing.assert_array_equal(qmath.max_entangled_state(1), [1.0])

    def test_bell_amplitudes(self):
        np.testing.assert_allclose(
            qmath.max_entangled_state(2),
            np.array([1, 0, 0, 1]) / np.sqrt(2),
            atol=1e-15,
        )

    def test_marginals_maximally_mixed(self):
        for d in (2, 3, 5):
            psi = qmath.max_entangled_state(d)
            proj = np.outer(psi, psi.conj())
            for keep in ([0], [1]):
                marg = qmath.partial_trace(proj, (d, d), keep)
                np.testing.assert_allclose(marg, np.eye(d) / d, atol=1e-12)

    def test_d3_marginal_entropy(self):
        psi = qmath.max_entangled_state(3)
        proj = np.outer(psi, psi.conj())
        marg = qmath.partial_trace(proj, (3, 3), [0])
        assert qmath.von_neumann_entropy(marg) == pytest.approx(np.log2(3), abs=1e-12)

    def test_rejects_zero_dimension(self):
        with pytest.raises(ValueError):
            qmath.max_entangled_state(0)

    def test_unit_norm(self):
        for d in (1, 2, 3, 7):
            qmath.validate_pure_state(qmath.max_entangled_state(d))
        with pytest.raises(ValueError):
            qmath.validate_pure_state(np.array([1.0, 1.0]))


class TestHaarSampling:
    def test_dimension_one_is_phase(self, rng):
        u = qmath.haar_unitary(1, rng)
        assert abs(abs(u[0, 0]) - 1.0) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_unitarity(self, n, rng):
        u = qmath.haar_unitary(n, rng)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(n), atol=1e-10)

    def test_first_moment_n2(self):
        # Haar moment: E |U[0,0]|^2 = 1/n.
        rng = np.random.default_rng(12345)
        samples = np.array(
            [abs(qmath.haar_unitary(2, rng)[0, 0]) ** 2 for _ in range(10_000)]
        )
        se = samples.std(ddof=1) / np.sqrt(samples.size)
        assert abs(samples.mean() - 0.5) < 3 * se

    def test_basis_first_moment_n4(self):
        rng = np.random.default_rng(54321)
        samples = np.array(
            [abs(qmath.random_basis(4, rng)[0, 0]) ** 2 for _ in range(10_000)]
        )
        se = samples.std(ddof=1) / np.sqrt(samples.size)
        assert abs(samples.mean() - 0.25) < 3 * se

    def test_basis_columns_orthonormal(self, rng):
        b = qmath.random_basis(5, rng)
        gram = b.conj().T @ b
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-10)

    def test_seeded_reproducibility(self):
        a = qmath.haar_unitary(4, np.random.default_rng(99))
        b = qmath.haar_unitary(4, np.random.default_rng(99))
        np.testing.assert_array_equal(a, b)
        a = qmath.random_basis(4, np.random.default_rng(99))
        b = qmath.random_basis(4, np.random.default_rng(99))
        np.testing.assert_array_equal(a, b)


def test_derive_seed_is_stable():
    assert qmath.derive_seed(7, 0) == qmath.derive_seed(7, 0)
    assert qmath.derive_seed(7, 0) != qmath.derive_seed(7, 1)
    assert qmath.derive_seed(7, 1, 2) != qmath.derive_seed(7, 2, 1)

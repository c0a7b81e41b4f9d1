import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cutchoose.errors import ContractViolationError, DimensionCapError, NotPsdError
from cutchoose.linalg import (
    DensityOperator,
    PureState,
    fidelity,
    fidelity_psd,
    hermitian_eig,
    kron,
    psd_sqrt,
    pure_trace_distance,
    trace_norm,
)
from cutchoose.sampling import random_density, random_psd, random_pure_state, random_unitary
from cutchoose.states import phase_gate, plus_state

I2 = np.eye(2)


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return PureState(v / np.linalg.norm(v))


class TestKron:
    def test_identities(self):
        np.testing.assert_allclose(kron(I2, I2), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(
            kron(phase_gate(np.pi), I2), np.diag([1, 1, -1, -1]), atol=1e-15
        )

    def test_basis_projectors(self):
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        expected = np.zeros((4, 4))
        expected[1, 1] = 1.0
        np.testing.assert_allclose(kron(p0, p1), expected)

    def test_dimension_cap(self):
        big = np.eye(128)
        with pytest.raises(DimensionCapError):
            kron(big, np.eye(64))


class TestHermitianEig:
    def test_identity(self):
        w, _ = hermitian_eig(I2)
        np.testing.assert_allclose(w, [1.0, 1.0])

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            hermitian_eig(np.diag([1.0, 1.0j]))

    def test_pauli_x(self):
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        w, v = hermitian_eig(x)
        np.testing.assert_allclose(w, [-1.0, 1.0])
        minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
        plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert abs(np.vdot(v[:, 0], minus)) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.vdot(v[:, 1], plus)) == pytest.approx(1.0, abs=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        h = random_psd(8, rng)
        w1, v1 = hermitian_eig(h)
        w2, v2 = hermitian_eig(h.copy())
        assert np.array_equal(w1, w2)
        assert np.array_equal(v1, v2)

    @settings(deadline=None, max_examples=50)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5, 8, 16]))
    def test_reconstruction_and_orthonormality(self, seed, dim):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        h = (g + g.conj().T) / 2
        w, v = hermitian_eig(h)
        np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-10)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(dim), atol=1e-10)
        assert np.all(np.diff(w) >= 0)


class TestPsdSqrt:
    def test_diagonal(self):
        np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)

    def test_identity(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(4)), np.eye(4), atol=1e-12)

    def test_projector_is_own_root(self):
        p = plus_state(1).projector()
        np.testing.assert_allclose(psd_sqrt(p), p, atol=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(NotPsdError):
            psd_sqrt(np.diag([1.0, -1e-3]))

    def test_clamps_noise_eigenvalues(self):
        s = psd_sqrt(np.diag([1.0, -5e-9]))
        np.testing.assert_allclose(s, np.diag([1.0, 0.0]), atol=1e-12)

    def test_squares_back_1000_draws(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            dim = int(rng.integers(2, 17))
            p = random_psd(dim, rng)
            s = psd_sqrt(p)
            assert np.linalg.norm(s @ s - p) <= 1e-9


class TestFidelity:
    def test_self(self):
        rho = random_density(4, np.random.default_rng(0))
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity(ket(1, 0).density(), ket(0, 1).density()) == pytest.approx(0.0, abs=1e-12)

    def test_half_overlap(self):
        assert fidelity(ket(1, 0).density(), plus_state(1).density()) == pytest.approx(0.5, abs=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(ContractViolationError):
            fidelity(random_density(2, np.random.default_rng(0)),
                     random_density(4, np.random.default_rng(0)))

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 2**32 - 1))
    def test_symmetric_and_bounded(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 9))
        rho, sigma = random_density(dim, rng), random_density(dim, rng)
        f1, f2 = fidelity(rho, sigma), fidelity(sigma, rho)
        assert abs(f1 - f2) <= 1e-9
        assert 0.0 <= f1 <= 1.0

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 2**32 - 1))
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 9))
        rho, sigma = random_density(dim, rng), random_density(dim, rng)
        u = random_unitary(dim, rng)
        rotated = fidelity(
            DensityOperator(u @ rho.matrix @ u.conj().T),
            DensityOperator(u @ sigma.matrix @ u.conj().T),
        )
        assert abs(rotated - fidelity(rho, sigma)) <= 1e-9


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(I2) == pytest.approx(2.0, abs=1e-12)

    def test_orthogonal_difference(self):
        d = ket(1, 0).projector() - ket(0, 1).projector()
        assert trace_norm(d) == pytest.approx(2.0, abs=1e-12)

    def test_rotated_plus_difference(self):
        # cross-check the eigenvalue route against 2 sqrt(1 - |<u|v>|^2)
        alpha = np.pi / 2
        plus = plus_state(1)
        rotated = PureState(phase_gate(alpha) @ plus.amplitudes)
        via_eigs = trace_norm(plus.projector() - rotated.projector())
        closed = 2.0 * np.sqrt(1.0 - abs(plus.inner(rotated)) ** 2)
        assert via_eigs == pytest.approx(closed, abs=1e-12)
        assert via_eigs == pytest.approx(2.0 * abs(np.sin(np.pi / 4)), abs=1e-12)

    def test_tensor_with_density_operator(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            dim = int(rng.integers(2, 5))
            a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            nu = random_density(int(rng.integers(2, 5)), rng)
            assert trace_norm(np.kron(a, nu.matrix)) == pytest.approx(
                trace_norm(a), abs=1e-9
            )


class TestPureTraceDistance:
    def test_equal(self):
        assert pure_trace_distance(ket(1, 0), ket(1, 0)) == 0.0

    def test_orthogonal(self):
        assert pure_trace_distance(ket(1, 0), ket(0, 1)) == pytest.approx(1.0, abs=1e-12)

    def test_half_turn(self):
        plus = plus_state(1)
        rotated = PureState(phase_gate(np.pi) @ plus.amplitudes)
        assert abs(plus.inner(rotated)) == pytest.approx(0.0, abs=1e-12)
        assert pure_trace_distance(plus, rotated) == pytest.approx(1.0, abs=1e-12)

    @settings(deadline=None, max_examples=60)
    @given(st.integers(0, 2**32 - 1))
    def test_overlap_identity_and_trace_norm(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.choice([2, 4, 8]))
        u, v = random_pure_state(dim, rng), random_pure_state(dim, rng)
        t = pure_trace_distance(u, v)
        assert abs(t**2 + abs(u.inner(v)) ** 2 - 1.0) <= 1e-9
        assert abs(t - 0.5 * trace_norm(u.projector() - v.projector())) <= 1e-9


class TestOrthogonalBlocks:
    def _quadruple(self, rng):
        d1, d2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        blocks = []
        for offset, size in ((0, d1), (d1, d2)):
            for _ in range(2):
                m = np.zeros((d1 + d2, d1 + d2), dtype=complex)
                m[offset:offset + size, offset:offset + size] = random_psd(size, rng)
                blocks.append(m)
        return blocks

    def test_trace_norm_additivity(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            p1, q1, p2, q2 = self._quadruple(rng)
            lhs = trace_norm(p1 + p2 - q1 - q2)
            rhs = trace_norm(p1 - q1) + trace_norm(p2 - q2)
            assert abs(lhs - rhs) <= 1e-9

    def test_fidelity_additivity(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            p1, q1, p2, q2 = self._quadruple(rng)
            lhs = fidelity_psd(p1 + p2, q1 + q2)
            rhs = (np.sqrt(fidelity_psd(p1, q1)) + np.sqrt(fidelity_psd(p2, q2))) ** 2
            assert abs(lhs - rhs) <= 1e-9


class TestCarriers:
    def test_pure_state_rejects_bad_norm(self):
        with pytest.raises(ContractViolationError):
            PureState(np.array([1.0, 1.0]))

    def test_density_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_density_rejects_bad_trace(self):
        with pytest.raises(ContractViolationError):
            DensityOperator(np.eye(2))

    def test_density_rejects_negative(self):
        with pytest.raises(NotPsdError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_purity(self):
        assert plus_state(2).density().is_pure()
        mixed = DensityOperator(np.eye(2) / 2)
        assert not mixed.is_pure()

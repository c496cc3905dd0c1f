"""Interaction-coordinate extraction, factorization, and minimum times."""

import numpy as np
import pytest

from belltime.cartan import (
    CHAMBER_TOL,
    CartanCoordinates,
    cartan_coordinates,
    interaction_core,
    kak_factorize,
    minimum_time_bell,
    minimum_time_unitary,
    nearest_local_product,
)
from belltime.linalg import expm_hermitian, ket, pauli_string, singlet_state

G_HZ = 217.4

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


def random_unitary(rng, dim=4):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_local(rng):
    return np.kron(random_unitary(rng, 2), random_unitary(rng, 2))


def phase_aligned_deviation(candidate, reference):
    z = np.trace(candidate.conj().T @ reference)
    assert abs(z) > 1e-9, "candidate and reference are nearly orthogonal"
    return np.max(np.abs(candidate * (z / abs(z)) - reference))


def in_chamber(a):
    ax, ay, az = a
    if not (np.pi / 4.0 + CHAMBER_TOL >= ax >= ay - CHAMBER_TOL >= abs(az) - 2 * CHAMBER_TOL):
        return False
    if ax > np.pi / 4.0 - 1e-7 and az < -CHAMBER_TOL:
        return False
    return True


class TestKnownCoordinates:
    def test_identity_has_zero_coordinates(self):
        a = cartan_coordinates(np.eye(4, dtype=np.complex128)).as_array()
        assert np.max(np.abs(a)) < 1e-12

    def test_local_unitaries_have_zero_coordinates(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = cartan_coordinates(random_local(rng)).as_array()
            assert np.max(np.abs(a)) < 1e-9

    def test_pure_zz_quarter_turn(self):
        u = expm_hermitian(pauli_string("Z", "Z"), np.pi / 4.0)
        a = cartan_coordinates(u).as_array()
        assert np.allclose(a, [np.pi / 4.0, 0.0, 0.0], atol=1e-9)

    def test_cnot_coordinates(self):
        a = cartan_coordinates(CNOT).as_array()
        assert np.allclose(a, [np.pi / 4.0, 0.0, 0.0], atol=1e-9)

    def test_reversed_zz_angle_is_canonicalized(self):
        u = expm_hermitian(pauli_string("Z", "Z"), -np.pi / 4.0)
        a = cartan_coordinates(u).as_array()
        assert np.allclose(a, [np.pi / 4.0, 0.0, 0.0], atol=1e-9)

    def test_swap_coordinates(self):
        a = cartan_coordinates(SWAP).as_array()
        assert np.allclose(a, [np.pi / 4.0] * 3, atol=1e-9)

    def test_iswap_coordinates(self):
        iswap = np.array(
            [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]],
            dtype=np.complex128,
        )
        a = cartan_coordinates(iswap).as_array()
        assert np.allclose(a, [np.pi / 4.0, np.pi / 4.0, 0.0], atol=1e-9)

    def test_interior_core_round_trip(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            ax = rng.uniform(0.05, np.pi / 4.0 - 0.05)
            ay = rng.uniform(0.02, ax - 0.02)
            az = rng.uniform(-(ay - 0.02), ay - 0.02)
            got = cartan_coordinates(interaction_core([ax, ay, az])).as_array()
            assert np.allclose(got, [ax, ay, az], atol=1e-9)

    def test_boundary_sign_tie_prefers_nonnegative_az(self):
        got = cartan_coordinates(interaction_core([np.pi / 4.0, 0.11, -0.07]))
        assert np.allclose(got.as_array(), [np.pi / 4.0, 0.11, 0.07], atol=1e-9)


class TestFactorization:
    def test_random_round_trips(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            u = random_unitary(rng)
            f = kak_factorize(u)
            recon = f.left_local @ interaction_core(f.coordinates) @ f.right_local
            assert phase_aligned_deviation(recon, u) <= 1e-8
            assert in_chamber(f.coordinates.as_array())

    def test_local_factors_are_tensor_products(self):
        rng = np.random.default_rng(37)
        for _ in range(25):
            f = kak_factorize(random_unitary(rng))
            for factor in (f.left_local, f.right_local):
                assert np.allclose(factor.conj().T @ factor, np.eye(4), atol=1e-9)
                _, _, residual = nearest_local_product(factor)
                assert residual <= 1e-8

    def test_coordinates_invariant_under_local_dressing(self):
        rng = np.random.default_rng(41)
        base = random_unitary(rng)
        reference = cartan_coordinates(base).as_array()
        for _ in range(50):
            dressed = random_local(rng) @ base @ random_local(rng)
            a = cartan_coordinates(dressed).as_array()
            assert np.allclose(a, reference, atol=1e-9)

    def test_coordinates_are_idempotent(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            a = cartan_coordinates(random_unitary(rng))
            again = cartan_coordinates(interaction_core(a)).as_array()
            assert np.allclose(again, a.as_array(), atol=1e-9)

    def test_global_phase_is_irrelevant(self):
        rng = np.random.default_rng(47)
        u = random_unitary(rng)
        a = cartan_coordinates(u).as_array()
        b = cartan_coordinates(np.exp(0.9j) * u).as_array()
        assert np.allclose(a, b, atol=1e-9)

    def test_rejects_non_unitary_and_bad_shape(self):
        with pytest.raises(ValueError):
            kak_factorize(np.eye(4) * 1.5)
        with pytest.raises(ValueError):
            kak_factorize(np.eye(3, dtype=np.complex128))


class TestNearestLocalProduct:
    def test_recovers_exact_product(self):
        rng = np.random.default_rng(53)
        a = random_unitary(rng, 2)
        b = random_unitary(rng, 2)
        ra, rb, residual = nearest_local_product(np.kron(a, b))
        assert residual < 1e-12
        assert np.allclose(np.kron(ra, rb), np.kron(a, b), atol=1e-12)

    def test_entangling_gate_is_far_from_local(self):
        _, _, residual = nearest_local_product(CNOT)
        assert residual > 0.1


class TestMinimumTimes:
    def test_bell_time_value(self):
        assert minimum_time_bell(G_HZ) == pytest.approx(2.2999080036798529e-3, abs=1e-12)

    def test_bell_time_scales_inversely_with_coupling(self):
        assert minimum_time_bell(2 * G_HZ) == pytest.approx(minimum_time_bell(G_HZ) / 2)

    def test_cnot_matches_bell_time(self):
        assert minimum_time_unitary(CNOT, G_HZ) == pytest.approx(
            minimum_time_bell(G_HZ), rel=1e-9
        )

    def test_swap_needs_three_units(self):
        assert minimum_time_unitary(SWAP, G_HZ) == pytest.approx(
            3.0 / (2.0 * G_HZ), rel=1e-9
        )
        assert minimum_time_unitary(SWAP, G_HZ) == pytest.approx(6.8997e-3, abs=1e-6)

    def test_identity_needs_no_time(self):
        assert minimum_time_unitary(np.eye(4, dtype=np.complex128), G_HZ) < 1e-12

    def test_rejects_nonpositive_coupling(self):
        with pytest.raises(ValueError):
            minimum_time_bell(0.0)
        with pytest.raises(ValueError):
            minimum_time_unitary(CNOT, -1.0)

    def test_drift_quarter_turn_reaches_singlet_with_local_rotation(self):
        # Evolve |++> under the bare coupling for exactly 1/(2 g) seconds,
        # then solve for the single-spin rotation that lands on the target.
        # Existence of that rotation is what makes 1/(2 g) attainable.
        drift = (np.pi / 2.0) * G_HZ * pauli_string("Z", "Z")
        u = expm_hermitian(drift, minimum_time_bell(G_HZ))
        plus = (ket("00") + ket("01") + ket("10") + ket("11")) / 2.0
        psi = u @ plus
        m_psi = psi.reshape(2, 2)
        m_target = singlet_state().reshape(2, 2)
        a = m_target @ np.linalg.inv(m_psi)
        assert np.allclose(a.conj().T @ a, np.eye(2) * 0.5 * np.trace(a.conj().T @ a).real, atol=1e-9)
        a = a / np.sqrt(0.5 * np.trace(a.conj().T @ a).real)
        reached = np.kron(a, np.eye(2)) @ psi
        fidelity = abs(np.vdot(singlet_state(), reached)) ** 2
        assert fidelity >= 1.0 - 1e-9

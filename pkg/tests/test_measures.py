"""Circle measures: Fourier coefficients, Poisson integrals, positivity."""

import numpy as np
import pytest

import woldlab as wl
from woldlab.measures import require_positive, weights_commute

from conftest import scalar_atoms


def test_fourier_lebesgue_only_constant_mode():
    mu = wl.CircleMeasure.lebesgue(1)
    assert wl.fourier_coefficient(mu, 0)[0, 0] == pytest.approx(1.0)
    assert wl.fourier_coefficient(mu, 1)[0, 0] == pytest.approx(0.0)
    assert wl.fourier_coefficient(mu, -3)[0, 0] == pytest.approx(0.0)


def test_fourier_atom_at_zero_is_constant():
    mu = scalar_atoms((0.0, 0.7))
    for n in (-5, -1, 0, 2, 9):
        assert wl.fourier_coefficient(mu, n)[0, 0] == pytest.approx(0.7)


def test_fourier_atom_at_pi_alternates():
    mu = scalar_atoms((np.pi, 1.0))
    for n in range(-4, 5):
        assert wl.fourier_coefficient(mu, n)[0, 0] == pytest.approx((-1.0) ** n)


def test_fourier_hermitian_symmetry(rng):
    mu = wl.random_atomic_measure(2, 3, seed=11, density_scale=0.4)
    tab = wl.fourier_table(mu, 8)
    for n in range(9):
        np.testing.assert_allclose(tab[-n], tab[n].conj().T, atol=1e-14)


def test_poisson_lebesgue_is_one(rng):
    mu = wl.CircleMeasure.lebesgue(1)
    for _ in range(5):
        z = 0.9 * (rng.standard_normal() + 1j * rng.standard_normal()) / 2
        assert wl.poisson_integral(mu, z)[0, 0] == pytest.approx(1.0)


def test_poisson_point_mass_values():
    mu = scalar_atoms((0.0, 1.0))
    assert wl.poisson_integral(mu, 0.0)[0, 0] == pytest.approx(1.0)
    # (1 - 1/4) / (1/2)^2
    assert wl.poisson_integral(mu, 0.5)[0, 0] == pytest.approx(3.0)


def test_poisson_rejects_boundary():
    mu = wl.CircleMeasure.lebesgue(1)
    with pytest.raises(ValueError):
        wl.poisson_integral(mu, 1.0)
    with pytest.raises(ValueError):
        wl.poisson_integral(mu, 1.2 + 0.1j)


def test_poisson_positive_for_positive_measure(rng):
    mu = wl.random_atomic_measure(2, 3, seed=5, density_scale=0.2)
    for _ in range(100):
        w = rng.standard_normal(2)
        z = (w[0] + 1j * w[1]) / (1.0 + abs(w[0]) + abs(w[1]))
        lam = np.linalg.eigvalsh(wl.poisson_integral(mu, z))
        assert lam.min() >= -1e-12


def test_is_positive_examples():
    ok, worst = wl.is_positive(scalar_atoms((0.0, 1.0)))
    assert ok and worst >= -1e-14

    bad = wl.CircleMeasure(dim=2, atoms=((0.0, np.diag([1.0, -1.0])),))
    ok, worst = wl.is_positive(bad)
    assert not ok
    assert worst == pytest.approx(-1.0)

    zero = wl.CircleMeasure.zero(2)
    assert wl.is_positive(zero).ok


def test_require_positive_raises():
    bad = wl.CircleMeasure(dim=1, atoms=((0.0, np.array([[-0.5]])),))
    with pytest.raises(wl.AssumptionError):
        require_positive(bad)


def test_small_negative_eigenvalues_are_clamped():
    mu = wl.CircleMeasure(dim=1, atoms=((0.0, np.array([[-1e-12]])),))
    assert mu.atoms[0][1][0, 0] == 0.0


def test_atoms_must_be_separated():
    with pytest.raises(ValueError):
        wl.CircleMeasure(dim=1, atoms=((0.5, np.eye(1)), (0.5 + 1e-14, np.eye(1))))


def test_conjugate_identity_and_phase():
    mu = scalar_atoms((0.3, 0.9), (2.0, 0.4))
    same = wl.conjugate(mu, np.eye(1))
    for n in range(-4, 5):
        np.testing.assert_allclose(wl.fourier_coefficient(same, n),
                                   wl.fourier_coefficient(mu, n), atol=1e-14)
    phased = wl.conjugate(mu, np.array([[np.exp(1j * 0.7)]]))
    for n in range(-4, 5):
        np.testing.assert_allclose(wl.fourier_coefficient(phased, n),
                                   wl.fourier_coefficient(mu, n), atol=1e-14)


def test_conjugate_permutation_swaps_entries():
    W = np.array([[1.0, 0.2 + 0.1j], [0.2 - 0.1j, 2.0]])
    mu = wl.CircleMeasure(dim=2, atoms=((1.1, W),))
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    swapped = wl.conjugate(mu, P)
    expected = P.conj().T @ W @ P
    np.testing.assert_allclose(swapped.atoms[0][1], expected, atol=1e-14)
    np.testing.assert_allclose(wl.fourier_coefficient(swapped, 3),
                               np.exp(-3j * 1.1) * expected, atol=1e-14)


def test_conjugation_covariance(rng):
    mu = wl.random_atomic_measure(2, 2, seed=3, density_scale=0.5)
    U = wl.random_unitary(2, 17)
    conj = wl.conjugate(mu, U)
    for n in range(-6, 7):
        np.testing.assert_allclose(
            wl.fourier_coefficient(conj, n),
            U.conj().T @ wl.fourier_coefficient(mu, n) @ U,
            atol=1e-12,
        )


def test_conjugate_rejects_non_unitary():
    mu = scalar_atoms((0.0, 1.0))
    with pytest.raises(ValueError):
        wl.conjugate(mu, np.array([[2.0]]))


def test_restrict_to_atoms():
    mu = scalar_atoms((0.3, 0.9), (2.0, 0.4), (5.0, 1.1))
    sub = mu.restrict_to_atoms([0, 2])
    assert len(sub.atoms) == 2
    assert sub.total_mass[0, 0] == pytest.approx(2.0)
    assert wl.CircleMeasure.lebesgue(1).restrict_to_atoms([]).is_zero()


def test_json_round_trip():
    mu = wl.random_atomic_measure(2, 2, seed=9, density_scale=0.3)
    back = wl.CircleMeasure.from_json_dict(mu.to_json_dict())
    assert back.dim == mu.dim
    for n in range(-5, 6):
        np.testing.assert_allclose(wl.fourier_coefficient(back, n),
                                   wl.fourier_coefficient(mu, n), atol=1e-14)
    assert back.digest() == mu.digest()


def test_weights_commute_detects_noncommuting():
    mu1, mu2 = wl.random_measure_pair(2, 2, seed=21)
    assert weights_commute(mu1, mu2)
    other = wl.random_atomic_measure(2, 2, seed=99)  # its own eigenbasis
    assert not weights_commute(mu1, other)

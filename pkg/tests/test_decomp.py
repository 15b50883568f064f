"""Wold decompositions, measure extraction, norm identities, the model map."""

import numpy as np
import pytest

import woldlab as wl
from woldlab.operators import joint_core, restrict_operator
from woldlab.space import EuclideanSpace

from conftest import random_core_vector, scalar_atoms

THREE_ATOMS = ((0.5, 0.8), (2.0, 1.3), (4.4, 0.35))


# -- stable range -------------------------------------------------------------


def test_stable_range_unitary_is_full():
    U = wl.unitary_operator(wl.random_unitary(6, 2))
    assert wl.stable_range(U).dim == 6


def test_stable_range_truncated_shift_is_trivial():
    T = wl.build_shift_1v(scalar_atoms(*THREE_ATOMS), 10)
    assert wl.stable_range(T).dim == 0


def test_stable_range_of_scrambled_direct_sum():
    mu = scalar_atoms((1.2, 0.9))
    for k in (1, 3):
        inst = wl.make_single_wold_instance(k, mu, 8, seed=5, scramble_seed=11)
        assert wl.stable_range(inst.operators[0]).dim == k


# -- single Wold ---------------------------------------------------------------


def test_wold_single_unitary_input():
    U = wl.unitary_operator(wl.random_unitary(5, 7))
    res = wl.wold_single(U)
    assert res.H1.dim == 0 and res.H0.dim == 5
    assert res.extracted.is_zero()


def test_wold_single_model_shift_is_analytic():
    mu = scalar_atoms((0.7, 1.0))
    T = wl.build_shift_1v(mu, 12)
    res = wl.wold_single(T)
    assert res.H0.dim == 0
    assert res.H1.dim == 13


def test_wold_single_recovers_scrambled_blocks():
    mu = scalar_atoms(*THREE_ATOMS)
    inst = wl.make_single_wold_instance(3, mu, 16, seed=1, scramble_seed=23)
    res = wl.wold_single(inst.operators[0])
    assert (res.H0.dim, res.H1.dim) == inst.truth["dims"]
    assert res.H0.distance(inst.truth["H0"]) < 1e-8
    assert res.H1.distance(inst.truth["H1"]) < 1e-8


def test_wold_single_rejects_jordan_block():
    sp = EuclideanSpace(2)
    J = wl.OperatorModel(sp, sp, np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(wl.AssumptionError):
        wl.wold_single(J)


def test_stable_range_max_iter_exhausted():
    T = wl.build_shift_1v(scalar_atoms((0.7, 1.0)), 8)
    with pytest.raises(wl.ConvergenceError):
        wl.stable_range(T, max_iter=2)


# -- defect-space isometry and extraction ---------------------------------------


def test_tilde_single_atom_is_unimodular_scalar():
    theta0, w = 1.3, 0.9
    T = wl.build_shift_1v(scalar_atoms((theta0, w)), 16)
    Tt = wl.tilde_isometry(T)
    assert Tt.matrix.shape == (1, 1)
    val = Tt.matrix[0, 0]
    assert abs(abs(val) - 1.0) < 1e-10
    # round-trip angle convention: the eigenvalue angle is the atom angle
    assert np.angle(val) == pytest.approx(theta0, abs=1e-8)


def test_tilde_isometry_trivial_for_isometry():
    T = wl.build_shift_1v(wl.CircleMeasure.zero(1), 8)
    Tt = wl.tilde_isometry(T)
    assert Tt.matrix.shape == (0, 0)


def test_tilde_eigenvalues_match_atom_angles():
    angles = [0.5, 2.0, 4.4]
    T = wl.build_shift_1v(scalar_atoms(*THREE_ATOMS), 32)
    Tt = wl.tilde_isometry(T)
    got = np.sort(np.mod(np.angle(np.linalg.eigvals(Tt.matrix)), 2 * np.pi))
    np.testing.assert_allclose(got, np.sort(angles), atol=1e-6)


def test_extract_single_atom_round_trip():
    theta0, w = 1.3, 0.9
    T = wl.build_shift_1v(scalar_atoms((theta0, w)), 32)
    mu = wl.extract_measure(T)
    assert len(mu.atoms) == 1
    angle, W = mu.atoms[0]
    assert angle == pytest.approx(theta0, abs=1e-6)
    assert W[0, 0] == pytest.approx(w, abs=1e-6)


def test_extract_isometry_gives_zero_measure():
    T = wl.build_shift_1v(wl.CircleMeasure.zero(1), 8)
    assert wl.extract_measure(T).is_zero()


def test_extract_rejects_non_analytic():
    U = wl.unitary_operator(wl.random_unitary(4, 3))
    with pytest.raises(wl.AssumptionError):
        wl.extract_measure(U)


def test_extract_matrix_measure_round_trip():
    mu = wl.random_atomic_measure(2, 2, seed=14)
    T = wl.build_shift_1v(mu, 20)
    got = wl.extract_measure(T)
    cmp = wl.measures_equal_up_to_unitary(mu, got, K=8)
    assert cmp.equal is True


def test_extract_lebesgue_fourier_table():
    # classical Dirichlet shift: mu_hat(n) -> delta_{n,0}
    T = wl.build_shift_1v(wl.CircleMeasure.lebesgue(1), 24)
    got = wl.extract_measure(T)
    for n in range(-4, 5):
        target = 1.0 if n == 0 else 0.0
        assert wl.fourier_coefficient(got, n)[0, 0] == pytest.approx(target, abs=1e-8)


def test_round_trip_up_to_unitary_random(rng):
    for seed in (3, 4, 5):
        mu = wl.random_atomic_measure(1, 3, seed=seed)
        T = wl.build_shift_1v(mu, 32)
        got = wl.extract_measure(T)
        cmp = wl.measures_equal_up_to_unitary(mu, got, K=8)
        assert cmp.equal is True, cmp.detail


# -- norm identities -------------------------------------------------------------


def test_norm_identity_constant_vector():
    T = wl.build_shift_1v(scalar_atoms(*THREE_ATOMS), 10)
    x = np.zeros(11, dtype=complex)
    x[0] = 1.0
    assert wl.check_norm_identity(T, x) < 1e-14


def test_norm_identity_random_core_vectors(rng):
    T = wl.build_shift_1v(scalar_atoms(*THREE_ATOMS), 16)
    for _ in range(10):
        x = random_core_vector(T, rng, margin=4)
        assert wl.check_norm_identity(T, x) < 1e-9 * (1 + T.dom.norm(x) ** 2)


def test_norm_identity_rejects_unitary():
    U = wl.unitary_operator(wl.random_unitary(4, 8))
    with pytest.raises(wl.AssumptionError):
        wl.check_norm_identity(U, np.ones(4, dtype=complex))


def test_two_variable_identity_constant():
    mu1, mu2 = wl.random_measure_pair(1, 2, seed=6)
    T1, T2 = wl.build_pair_2v(mu1, mu2, 6, 6)
    x = np.zeros(T1.dom.dim_total, dtype=complex)
    x[0] = 1.0
    assert wl.check_two_variable_identity(T1, T2, x) < 1e-14


def test_two_variable_identity_random(rng):
    mu1, mu2 = wl.random_measure_pair(1, 2, seed=16)
    T1, T2 = wl.build_pair_2v(mu1, mu2, 8, 8)
    core = joint_core(T1, T2, 4)
    for _ in range(10):
        c = rng.standard_normal(core.dim) + 1j * rng.standard_normal(core.dim)
        x = core.basis @ c
        assert wl.check_two_variable_identity(T1, T2, x) < 1e-8 * (1 + T1.dom.norm(x) ** 2)


def test_two_variable_identity_shifted_kernel_vector():
    mu1, mu2 = wl.random_measure_pair(1, 1, seed=26)
    T1, T2 = wl.build_pair_2v(mu1, mu2, 8, 8)
    _, E1 = wl.wandering_projection(T1)
    _, E2 = wl.wandering_projection(T2)
    E = wl.subspace_intersect(E1, E2)
    a = E.basis[:, 0]
    x = T1.matrix @ (T2.matrix @ a)
    assert wl.check_two_variable_identity(T1, T2, x) < 1e-9


# -- model map V ------------------------------------------------------------------


def _analytic_pair(caps=10, seed=9):
    mu1 = scalar_atoms((0.9, 0.8))
    mu2 = scalar_atoms((4.0, 1.1))
    return wl.build_pair_2v(mu1, mu2, caps, caps)


def test_build_V_sends_orbit_vectors_to_monomials():
    T1, T2 = _analytic_pair()
    quad = wl.wold_pair(T1, T2)
    target = wl.build_space(quad.measures["eta1"], quad.measures["eta2"], *T1.dom.caps)
    V = wl.build_V(T1, T2, target)
    _, E1 = wl.wandering_projection(T1)
    _, E2 = wl.wandering_projection(T2)
    E = wl.subspace_intersect(E1, E2)
    a = E.basis[:, 0]
    for m, n in [(0, 0), (2, 1), (3, 3)]:
        x = np.linalg.matrix_power(T1.matrix, m) @ np.linalg.matrix_power(T2.matrix, n) @ a
        vx = V.matrix @ x
        image = wl.PolyVector.from_flat(target.caps, target.dim, vx)
        mask = np.zeros_like(image.coeffs, dtype=bool)
        mask[m, n, :] = True
        assert np.max(np.abs(image.coeffs[~mask])) < 1e-9
        assert abs(abs(image.coeffs[m, n, 0]) - 1.0) < 1e-9


def test_build_V_isometry_and_intertwining():
    T1, T2 = _analytic_pair(caps=16)
    quad = wl.wold_pair(T1, T2)
    target = wl.build_space(quad.measures["eta1"], quad.measures["eta2"], *T1.dom.caps)
    V = wl.build_V(T1, T2, target)
    assert V.info["isometry"] < 1e-8
    assert V.info["intertwine_1"] < 1e-8
    assert V.info["intertwine_2"] < 1e-8


def test_build_V_dirichlet_component_cross_check(rng):
    # the three derivative components of ||Vx||^2 match the corresponding
    # defect double sums
    T1, T2 = _analytic_pair(caps=8)
    quad = wl.wold_pair(T1, T2)
    target = wl.build_space(quad.measures["eta1"], quad.measures["eta2"], *T1.dom.caps)
    V = wl.build_V(T1, T2, target)
    G = T1.dom.gram
    F1 = T1.matrix.conj().T @ G @ T1.matrix - G
    F2 = T2.matrix.conj().T @ G @ T2.matrix - G
    T12 = T1.matrix @ T2.matrix
    T21 = T2.matrix @ T1.matrix
    F12 = T21.conj().T @ G @ T12 - T1.matrix.conj().T @ G @ T1.matrix \
        - T2.matrix.conj().T @ G @ T2.matrix + G
    L1 = wl.left_inverse(T1).matrix
    L2 = wl.left_inverse(T2).matrix
    P1 = np.eye(G.shape[0]) - T1.matrix @ L1
    P2 = np.eye(G.shape[0]) - T2.matrix @ L2
    core = joint_core(T1, T2, 4)
    for _ in range(5):
        c = rng.standard_normal(core.dim) + 1j * rng.standard_normal(core.dim)
        x = core.basis @ c
        sums = {"d1": 0.0, "d2": 0.0, "d3": 0.0}
        ym = x.copy()
        for m in range(T1.dom.dim_total + 1):
            if np.linalg.norm(ym) < 1e-300:
                break
            y = ym.copy()
            for n in range(T2.dom.dim_total + 1):
                if np.linalg.norm(y) < 1e-300:
                    break
                if m >= 1:
                    v = P2 @ y
                    sums["d1"] += float((v.conj() @ (F1 @ v)).real)
                if n >= 1:
                    v = P1 @ y
                    sums["d2"] += float((v.conj() @ (F2 @ v)).real)
                if m >= 1 and n >= 1:
                    sums["d3"] += float((y.conj() @ (F12 @ y)).real)
                y = L2 @ y
            ym = L1 @ ym
        vx = wl.PolyVector.from_flat(target.caps, target.dim, V.matrix @ x)
        parts = wl.dirichlet_components(target, vx)
        scale = 1 + T1.dom.norm(x) ** 2
        for name in ("d1", "d2", "d3"):
            assert abs(parts[name] - sums[name]) < 1e-8 * scale


# -- pair decomposition -------------------------------------------------------------


def test_wold_pair_both_unitary():
    U1, U2 = wl.commuting_unitary_pair(6, seed=41)
    quad = wl.wold_pair(U1, U2)
    assert quad.block_dims() == (6, 0, 0, 0)


def test_wold_pair_pure_analytic_pair():
    T1, T2 = _analytic_pair(caps=8)
    quad = wl.wold_pair(T1, T2)
    assert quad.block_dims() == (0, 0, 0, T1.dom.dim_total)


def four_block_fixture(scramble_seed=42):
    nu1 = scalar_atoms((1.0, 0.7))
    nu2 = scalar_atoms((2.5, 1.2), (0.4, 0.5))
    eta1 = scalar_atoms((0.8, 0.6))
    eta2 = scalar_atoms((3.1, 0.9))
    return wl.make_four_block_instance(3, nu1, 8, nu2, 7, eta1, eta2, (5, 4),
                                       seed=1, scramble_seed=scramble_seed)


def test_wold_pair_four_block_recovery():
    inst = four_block_fixture()
    quad = wl.wold_pair(*inst.operators)
    assert quad.block_dims() == inst.truth["dims"]
    for name in ("H00", "H10", "H01", "H11"):
        assert getattr(quad, name).distance(inst.truth["blocks"][name]) < 1e-6
    for name in ("nu1", "nu2", "eta1", "eta2"):
        cmp = wl.measures_equal_up_to_unitary(inst.truth["measures"][name],
                                              quad.measures[name], K=8)
        assert cmp.equal is True, (name, cmp.detail)


def test_quadruple_json_with_verdicts():
    inst = four_block_fixture()
    quad = wl.wold_pair(*inst.operators)
    out = quad.to_json_dict(reference_measures=inst.truth["measures"])
    assert out["block_dims"] == list(inst.truth["dims"])
    assert all(out["verdicts"][k]["equal"] for k in ("nu1", "nu2", "eta1", "eta2"))
    assert "atoms" in out["measures"]["nu1"]


def test_wold_pair_rejects_non_commuting():
    S1 = wl.build_shift_1v(scalar_atoms((0.3, 0.8)), 6)
    S2 = wl.build_shift_1v(scalar_atoms((0.3, 0.8)), 6)
    # the shift does not doubly commute with itself
    with pytest.raises(wl.AssumptionError):
        wl.wold_pair(S1, S1)
    del S2


def test_wold_pair_blocks_invariant_under_scramble():
    # recovered projectors transport exactly under a change of basis
    inst_a = four_block_fixture(scramble_seed=42)
    inst_b = four_block_fixture(scramble_seed=1042)
    qa = wl.wold_pair(*inst_a.operators)
    qb = wl.wold_pair(*inst_b.operators)
    for name in ("H00", "H10", "H01", "H11"):
        da = getattr(qa, name).distance(inst_a.truth["blocks"][name])
        db = getattr(qb, name).distance(inst_b.truth["blocks"][name])
        assert max(da, db) < 1e-6


def test_wold_pair_idempotent_on_blocks():
    inst = four_block_fixture()
    quad = wl.wold_pair(*inst.operators)
    # restriction to H10: T1 shift-like, T2 unitary -> only H10 survives
    R1 = quad.restrictions[("H10", "T1")]
    R2 = quad.restrictions[("H10", "T2")]
    sub = wl.wold_pair(R1, R2, extract=False)
    assert sub.block_dims() == (0, quad.H10.dim, 0, 0)
    # restriction to H11 is jointly analytic
    R1 = quad.restrictions[("H11", "T1")]
    R2 = quad.restrictions[("H11", "T2")]
    sub = wl.wold_pair(R1, R2, extract=False)
    assert sub.block_dims() == (0, 0, 0, quad.H11.dim)


# -- Slocinski ---------------------------------------------------------------------


def test_slocinski_unitary_pair_is_uu():
    U1, U2 = wl.commuting_unitary_pair(5, seed=3)
    quad = wl.slocinski(U1, U2)
    assert quad.block_dims() == (5, 0, 0, 0)


def test_slocinski_hardy_pair_is_ss():
    z = wl.CircleMeasure.zero(1)
    V1, V2 = wl.build_pair_2v(z, z, 6, 6)
    quad = wl.slocinski(V1, V2)
    assert quad.block_dims() == (0, 0, 0, 49)
    for mu in quad.measures.values():
        assert mu.is_zero(tol=1e-8)


def test_slocinski_unitary_times_shift():
    # (unitary) x (unilateral shift): only the us-block survives
    z = wl.CircleMeasure.zero(1)
    s = wl.build_shift_1v(z, 8)
    lam = wl.OperatorModel(s.dom, s.dom, np.exp(0.9j) * np.eye(9), core_fn=s.core_fn)
    (V1, V2), _ = wl.scramble((lam, s), 17)
    quad = wl.slocinski(V1, V2)
    assert quad.block_dims() == (0, 0, 9, 0)


def test_slocinski_rejects_non_isometry():
    T = wl.build_shift_1v(scalar_atoms((0.5, 1.0)), 8)  # 2-isometry, not isometry
    with pytest.raises(wl.AssumptionError):
        wl.slocinski(T, wl.OperatorModel(T.dom, T.dom, np.eye(9)))


# -- measure comparison ---------------------------------------------------------------


def test_measures_equal_identity():
    mu = wl.random_atomic_measure(2, 2, seed=19, density_scale=0.2)
    cmp = wl.measures_equal_up_to_unitary(mu, mu, K=6)
    assert cmp.equal is True
    np.testing.assert_allclose(cmp.unitary, np.eye(2), atol=1e-8)


def test_measures_equal_recovers_conjugation():
    mu = wl.random_atomic_measure(2, 2, seed=29)
    U0 = wl.random_unitary(2, 77)
    nu = wl.conjugate(mu, U0)
    cmp = wl.measures_equal_up_to_unitary(mu, nu, K=6)
    assert cmp.equal is True
    for n in range(-6, 7):
        np.testing.assert_allclose(
            cmp.unitary.conj().T @ wl.fourier_coefficient(mu, n) @ cmp.unitary,
            wl.fourier_coefficient(nu, n), atol=1e-8)


def test_measures_differ_in_angles():
    a = scalar_atoms((0.5, 1.0))
    b = scalar_atoms((0.6, 1.0))
    cmp = wl.measures_equal_up_to_unitary(a, b, K=4)
    assert cmp.equal is False


def test_measures_scalar_vs_dim_mismatch():
    a = scalar_atoms((0.5, 1.0))
    b = wl.random_atomic_measure(2, 1, seed=1)
    with pytest.raises(ValueError):
        wl.measures_equal_up_to_unitary(a, b)


def test_measures_degenerate_spectrum_inconclusive():
    # equal measures whose zeroth coefficient has a repeated eigenvalue:
    # never a false verdict, report inconclusive instead
    W = np.eye(2)
    a = wl.CircleMeasure(dim=2, atoms=((0.5, W), (2.5, np.diag([0.3, 0.3]))))
    b = wl.conjugate(a, wl.random_unitary(2, 5))
    cmp = wl.measures_equal_up_to_unitary(a, b, K=4)
    assert cmp.equal is not False

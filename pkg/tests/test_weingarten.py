"""Gram/Weingarten matrix tests: inverse identities, sum rules, bond kernels."""

import numpy as np
import pytest

from rmpslab import permutations as pg
from rmpslab import weingarten as wg


def test_gram_small_values():
    g = wg.gram_matrix(2, 3.0)
    assert np.allclose(g, [[9.0, 3.0], [3.0, 9.0]])
    g4 = wg.gram_matrix(4, 3.0)
    assert np.allclose(np.diag(g4), 3.0**4)
    assert np.allclose(g4, g4.T)


def test_weingarten_hand_value_m2_q2():
    w = wg.weingarten_matrix(2, 2.0)
    assert np.allclose(w, [[1 / 3, -1 / 6], [-1 / 6, 1 / 3]], atol=1e-14)


@pytest.mark.parametrize("m", [2, 4])
@pytest.mark.parametrize("q_mult", [1.0, 2.0])
def test_inverse_identity(m, q_mult):
    q = q_mult * m
    g = wg.gram_matrix(m, q)
    w = wg.weingarten_matrix(m, q)
    assert np.abs(w @ g - np.eye(g.shape[0])).max() < 1e-12


@pytest.mark.parametrize("m", [2, 3, 4])
def test_pseudoinverse_identities(m):
    for q in (1.0, 2.0, float(m), 2.0 * m):
        g = wg.gram_matrix(m, q)
        w = wg.weingarten_matrix(m, q)
        scale = np.abs(g).max()
        assert np.abs(g @ w @ g - g).max() < 1e-10 * scale
        assert np.abs(w @ g @ w - w).max() < 1e-10 * np.abs(w).max()


@pytest.mark.parametrize("m", [2, 3, 4])
def test_gram_positive_definite_integer_q(m):
    for q in (m, m + 1, 2 * m):
        vals = np.linalg.eigvalsh(wg.gram_matrix(m, float(q)))
        assert np.all(vals > 0)


def test_sum_constant():
    assert wg.weingarten_sum_constant(2, 2.0) == pytest.approx(1 / 6, rel=1e-14)
    assert wg.weingarten_sum_constant(2, 2.0, wg.gaussian(0.25)) == pytest.approx(1 / 16)
    # consistency with explicit row sums
    for m in (2, 3, 4):
        for q in (float(m), 5.0):
            w = wg.weingarten_matrix(m, q)
            rs = w.sum(axis=1)
            c = wg.weingarten_sum_constant(m, q)
            assert np.abs(rs - c).max() < 1e-10 * abs(c)


def test_row_sum_rule_m4_q5():
    w = wg.weingarten_matrix(4, 5.0)
    target = 1.0 / (5 * 6 * 7 * 8)
    assert np.abs(w.sum(axis=1) - target).max() < 1e-12 * target


def test_interaction_large_chi_ferromagnetic():
    t = wg.interaction_matrix(4, 1e6, 2, wg.HAAR)
    dm = 2.0**-4
    assert np.abs(t - dm * np.eye(24)).max() / dm < 1e-5


def test_interaction_gaussian_adjacency_coefficient():
    # chi d^m T equals 1 exactly on distance-1 pairs for the gaussian kind
    for chi in (10.0, 1000.0):
        t = wg.interaction_matrix(4, chi, 2, wg.gaussian())
        mask = pg.distance_matrix(4) == 1
        vals = (chi * 2.0**4) * t[mask]
        assert np.abs(vals - 1.0).max() < 1e-12


def richardson_coefficient(beta, d, m, pair_index):
    chis = [1e2, 1e3, 1e4]
    vals = []
    for chi in chis:
        t = wg.interaction_matrix(m, chi, d, wg.HAAR)
        vals.append(d**m * t[0, pair_index] * chi**beta)
    h = np.array([1.0 / c for c in chis])
    coef = np.linalg.solve(np.vander(h, 3, increasing=True), vals)
    return coef[0]


def test_unitary_dressing_spot_check():
    # composite-wall coefficient ((d-1)/d)^beta on commuting-transposition pairs
    idx = pg.group_index(4)
    c1 = richardson_coefficient(1, 2, 4, idx[(1, 0, 2, 3)])
    c2 = richardson_coefficient(2, 2, 4, idx[(1, 0, 3, 2)])
    assert abs(c1 - 0.5) < 1e-3
    assert abs(c2 - 0.25) < 1e-3


def test_interaction_row_expansion_bounded():
    # sum_pi T[sigma, pi] chi^dist stays bounded as chi grows
    dm = pg.distance_matrix(4).astype(float)
    prev = None
    for chi in (1e2, 1e3, 1e4):
        t = wg.interaction_matrix(4, chi, 2, wg.HAAR)
        row = np.sum(np.abs(t[0]) * chi**dm[0])
        if prev is not None:
            assert row < 1.5 * prev + 1.0
        prev = row


@pytest.mark.parametrize("m,q", [(2, 2.0), (4, 2.0), (4, 8.0), (5, 3.0), (6, 7.0)])
def test_class_vectors_match_dense(m, q):
    wc = wg.weingarten_class_vector(m, q)
    wd = wg.weingarten_matrix(m, q)
    dense = wg.densify_class_kernel(m, wc)
    assert np.abs(dense - wd).max() < 1e-9 * np.abs(wd).max()


def test_class_vector_row_sum_m8():
    _, sizes, _ = pg.conjugacy_classes(8)
    wc = wg.weingarten_class_vector(8, 16.0)
    target = wg.weingarten_sum_constant(8, 16.0)
    assert abs(float(np.dot(sizes, wc)) - target) < 1e-10 * target


def test_interaction_class_vector_matches_dense():
    for kind in (wg.HAAR, wg.gaussian()):
        t = wg.interaction_matrix(4, 3.0, 2, kind)
        tc = wg.densify_class_kernel(4, wg.interaction_class_vector(4, 3.0, 2, kind))
        assert np.abs(t - tc).max() < 1e-9 * np.abs(t).max()


def test_ensemble_kind_validation():
    with pytest.raises(ValueError):
        wg.EnsembleKind("unitary")
    with pytest.raises(ValueError):
        wg.gaussian(-1.0)
    assert wg.HAAR.is_haar
    assert not wg.gaussian().is_haar


def test_dense_size_cap():
    from rmpslab.errors import SizeLimitError

    with pytest.raises(SizeLimitError):
        wg.gram_matrix(8, 2.0)

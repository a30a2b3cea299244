import math

import numpy as np
import pytest

from subspectral.kernels import Kernel
from subspectral.subspace import (
    SupportEstimate,
    empirical_reconstruction_error,
    fit_kpca,
    gram_tail_sums,
    hausdorff_on_grid,
    point_subspace_dist,
    project_coords,
    residual_profile,
    support_contains,
)

ABEL = Kernel("abel_l1", 1.0)
LINEAR = Kernel("linear")


# ---------------------------------------------------------------------------
# fit_kpca


def test_fit_duplicate_pair_is_rank_one():
    model = fit_kpca([[0.4], [0.4]], ABEL, 1)
    assert np.allclose(model.spectrum.eigenvalues, [2.0, 0.0], atol=1e-14)
    assert model.kept() == 1


def test_fit_singleton():
    model = fit_kpca([[0.2]], ABEL, 1)
    assert model.spectrum.eigenvalues[0] == pytest.approx(1.0, abs=1e-15)


def test_fit_two_points_eigenvalues_hand_derived():
    # Gram [[1, c], [c, 1]] has eigenvalues 1 +- c
    c = math.exp(-1.0)
    model = fit_kpca([[0.0], [1.0]], ABEL, 2)
    assert np.allclose(model.spectrum.eigenvalues, [1.0 + c, 1.0 - c],
                       atol=1e-14)


def test_fit_rejects_bad_truncation():
    with pytest.raises(ValueError):
        fit_kpca([[0.0], [1.0]], ABEL, 0)
    with pytest.raises(ValueError):
        fit_kpca([[0.0], [1.0]], ABEL, 3)


def test_with_truncation_shares_decomposition():
    model = fit_kpca(np.linspace(0, 1, 9)[:, None], ABEL, 9)
    small = model.with_truncation(3)
    assert small.spectrum is model.spectrum
    assert small.k == 3
    with pytest.raises(ValueError):
        model.with_truncation(10)


# ---------------------------------------------------------------------------
# project_coords


def test_project_coords_singleton_training_point():
    model = fit_kpca([[0.2]], ABEL, 1)
    assert project_coords(model, [0.2]) == pytest.approx([1.0], abs=1e-12)


def test_project_coords_duplicate_pair_hand_value():
    # sigma_1 = 2, v_1 = (1,1)/sqrt 2, t_z = (1,1):
    # coord = 2^(-1/2) (1/sqrt 2 + 1/sqrt 2) = 1
    model = fit_kpca([[0.4], [0.4]], ABEL, 1)
    assert project_coords(model, [0.4]) == pytest.approx([1.0], abs=1e-12)


def test_project_coords_orthogonal_point_is_zero():
    model = fit_kpca([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], LINEAR, 2)
    coords = project_coords(model, [0.0, 0.0, 1.0])
    assert np.array_equal(coords, np.zeros(2))


def test_project_coords_batch_matches_single(rng):
    pts = rng.uniform(0, 1, size=(12, 1))
    model = fit_kpca(pts, ABEL, 5)
    queries = rng.uniform(0, 1, size=(4, 1))
    batch = project_coords(model, queries)
    for i, q in enumerate(queries):
        assert np.allclose(batch[i], project_coords(model, q), atol=1e-14)


def test_project_coords_full_rank_training_norm(rng):
    # full-rank model: training-point coordinates capture all of K(z, z)
    pts = rng.uniform(0, 1, size=(10, 1))
    model = fit_kpca(pts, ABEL, 10)
    for z in pts[:3]:
        coords = project_coords(model, z)
        assert np.sum(coords**2) == pytest.approx(1.0, abs=1e-9)


def test_project_coords_dimension_mismatch():
    model = fit_kpca([[0.0], [1.0]], ABEL, 2)
    with pytest.raises(ValueError):
        project_coords(model, [0.0, 1.0])


# ---------------------------------------------------------------------------
# point_subspace_dist


def test_point_dist_training_point_full_rank(rng):
    pts = rng.uniform(0, 1, size=(8, 1))
    model = fit_kpca(pts, ABEL, 8)
    d = point_subspace_dist(model, pts[2])
    assert d <= 1e-6


def test_point_dist_orthogonal_point_is_one():
    model = fit_kpca([[1.0, 0.0]], LINEAR, 1)
    assert point_subspace_dist(model, [0.0, 1.0]) == 1.0


def test_point_dist_duplicate_pair_hand_value():
    # pinv of [[1,1],[1,1]] at k=1 is all-entries 1/4; with t_z = (c, c)
    # the captured energy is c^2, so dist = sqrt(1 - c^2)
    model = fit_kpca([[0.7], [0.7]], ABEL, 1)
    c = math.exp(-0.4)
    assert point_subspace_dist(model, [0.3]) == pytest.approx(
        math.sqrt(1.0 - c * c), abs=1e-12)


def test_point_dist_nestedness(rng):
    pts = rng.uniform(0, 1, size=(20, 1))
    model = fit_kpca(pts, ABEL, 20)
    queries = rng.uniform(0, 1, size=(10, 1))
    prev = None
    for k in (1, 3, 7, 15, 20):
        d = point_subspace_dist(model.with_truncation(k), queries)
        if prev is not None:
            assert np.all(d <= prev + 1e-12)
        prev = d


def test_point_dist_consistent_with_coords(rng):
    # both routes compute the residual norm: pinv quadratic form vs
    # coordinate capture
    pts = rng.uniform(0, 1, size=(15, 1))
    for k in (2, 6, 15):
        model = fit_kpca(pts, ABEL, k)
        queries = rng.uniform(0, 1, size=(6, 1))
        d = point_subspace_dist(model, queries)
        coords = project_coords(model, queries)
        alt = np.sqrt(np.maximum(1.0 - np.sum(coords**2, axis=1), 0.0))
        assert np.allclose(d, alt, atol=1e-10)


def test_residual_profile_matches_point_dist(rng):
    pts = rng.uniform(0, 1, size=(14, 1))
    model = fit_kpca(pts, ABEL, 14)
    queries = rng.uniform(0, 1, size=(5, 1))
    ks = [1, 4, 9, 14]
    prof = residual_profile(model, queries, ks)
    for j, k in enumerate(ks):
        d = point_subspace_dist(model.with_truncation(k), queries)
        assert np.allclose(prof[:, j], d, atol=1e-10)


def test_pythagoras_full_rank_training_points(rng):
    pts = rng.uniform(0, 1, size=(9, 1))
    model = fit_kpca(pts, ABEL, 9)
    coords = project_coords(model, pts)
    dists = point_subspace_dist(model, pts)
    assert np.allclose(np.sum(coords**2, axis=1) + dists**2, 1.0, atol=1e-9)


# ---------------------------------------------------------------------------
# empirical_reconstruction_error


def test_empirical_recon_zero_at_full_rank(rng):
    pts = rng.uniform(0, 1, size=(11, 1))
    model = fit_kpca(pts, ABEL, 11)
    assert empirical_reconstruction_error(model) == 0.0


def test_empirical_recon_orthonormal_features():
    # linear kernel on the standard basis: Gram = I, tail sum at k=1 is 1/2
    model = fit_kpca([[1.0, 0.0], [0.0, 1.0]], LINEAR, 1)
    assert empirical_reconstruction_error(model) == pytest.approx(0.5,
                                                                  abs=1e-15)


def test_empirical_recon_duplicate_pair_rank_one():
    model = fit_kpca([[0.4], [0.4]], ABEL, 1)
    assert empirical_reconstruction_error(model) == pytest.approx(0.0,
                                                                  abs=1e-14)


def test_empirical_recon_exactly_non_increasing(rng):
    pts = rng.uniform(0, 1, size=(40, 1))
    model = fit_kpca(pts, ABEL, 40)
    errs = [empirical_reconstruction_error(model, k) for k in range(41)]
    assert all(a >= b for a, b in zip(errs, errs[1:]))
    tails = gram_tail_sums(model)
    assert errs[0] == tails[0]
    assert errs[40] == 0.0


# ---------------------------------------------------------------------------
# support sets


def test_support_contains_training_point_tau_zero_exact_case():
    model = fit_kpca([[0.2]], ABEL, 1)
    est = SupportEstimate(model, 0.0)
    assert support_contains(est, [0.2]) is True


def test_support_contains_training_points_full_rank(rng):
    pts = rng.uniform(0, 1, size=(10, 1))
    model = fit_kpca(pts, ABEL, 10)
    est = SupportEstimate(model, 1e-6)
    assert np.all(support_contains(est, pts))


def test_support_contains_orthogonal_point_rejected():
    model = fit_kpca([[1.0, 0.0]], LINEAR, 1)
    est = SupportEstimate(model, 0.1)
    assert support_contains(est, [0.0, 1.0]) is False


def test_support_contains_boundary_inclusive():
    # orthogonal direction with exactly representable distance 0.5
    model = fit_kpca([[1.0, 0.0]], LINEAR, 1)
    z = [0.0, 0.5]
    assert point_subspace_dist(model, z) == 0.5
    assert support_contains(SupportEstimate(model, 0.5), z) is True
    assert support_contains(SupportEstimate(model, 0.4999), z) is False


def test_support_monotone_in_tau_and_k(rng):
    pts = rng.uniform(0, 1, size=(25, 1))
    grid = np.linspace(0, 1, 101)[:, None]
    model = fit_kpca(pts, ABEL, 25)
    members = {}
    for k in (2, 10, 25):
        for tau in (0.05, 0.2, 0.5):
            est = SupportEstimate(model.with_truncation(k), tau)
            members[(k, tau)] = support_contains(est, grid)
    for k in (2, 10, 25):
        assert np.all(members[(k, 0.05)] <= members[(k, 0.2)])
        assert np.all(members[(k, 0.2)] <= members[(k, 0.5)])
    for tau in (0.05, 0.2, 0.5):
        assert np.all(members[(2, tau)] <= members[(10, tau)])
        assert np.all(members[(10, tau)] <= members[(25, tau)])


def test_support_estimate_rejects_negative_tau():
    model = fit_kpca([[0.0]], ABEL, 1)
    with pytest.raises(ValueError):
        SupportEstimate(model, -0.1)


# ---------------------------------------------------------------------------
# hausdorff_on_grid


def test_hausdorff_identical_sets():
    assert hausdorff_on_grid([[0.0], [1.0]], [[0.0], [1.0]]) == 0.0


def test_hausdorff_singletons():
    assert hausdorff_on_grid([[0.0]], [[1.0]]) == 1.0


def test_hausdorff_grid_vs_midpoint_brute_force():
    a = np.arange(0.0, 1.0 + 1e-12, 0.01)[:, None]
    b = np.array([[0.5]])
    # brute-force oracle over both directions
    d_ab = max(min(abs(x - y) for y in b[:, 0]) for x in a[:, 0])
    d_ba = max(min(abs(x - y) for x in a[:, 0]) for y in b[:, 0])
    expected = max(d_ab, d_ba)
    assert expected == pytest.approx(0.5, abs=1e-12)
    assert hausdorff_on_grid(a, b) == pytest.approx(expected, abs=1e-12)


def test_hausdorff_asymmetric_sets_brute_force(rng):
    a = rng.uniform(0, 1, size=(17, 2))
    b = rng.uniform(0, 1, size=(9, 2))
    dists = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    expected = max(dists.min(axis=1).max(), dists.min(axis=0).max())
    assert hausdorff_on_grid(a, b) == pytest.approx(expected, rel=1e-12)


def test_hausdorff_rejects_empty_and_mismatched():
    with pytest.raises(ValueError):
        hausdorff_on_grid(np.zeros((0, 1)), [[0.0]])
    with pytest.raises(ValueError):
        hausdorff_on_grid([[0.0]], np.zeros((0, 1)))
    with pytest.raises(ValueError):
        hausdorff_on_grid([[0.0]], [[0.0, 1.0]])

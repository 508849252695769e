import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_dtw, brute_smdtw, monotone_paths
from smdtw.dtwcore import (WeightParams, align, distance_matrix, dtw, format_path,
                           point_distance, sigmoid_params, smdtw, substitute_zero_distances,
                           weight)
from smdtw.features import FeatureMatrix, FeatureSet
from smdtw.segmentation import Segmentation
from smdtw.stability import RelevanceProfile


def test_path_count_is_delannoy():
    assert sum(1 for _ in monotone_paths(3, 3)) == 13
    assert sum(1 for _ in monotone_paths(1, 5)) == 1


def test_point_distance():
    assert point_distance([0, 0], [3, 4]) == 5.0
    with pytest.raises(ValueError):
        point_distance([0], [1, 2])


seqs = st.lists(st.lists(st.integers(-3, 3).map(float), min_size=2, max_size=2),
                min_size=1, max_size=5)


@given(seqs, seqs)
@settings(max_examples=200, deadline=None)
def test_dtw_equals_enumeration(q, r):
    assert dtw(np.array(q), np.array(r)).distance == brute_dtw(q, r)


@given(seqs, seqs)
@settings(max_examples=100, deadline=None)
def test_dtw_path_is_monotone_and_sums_to_distance(q, r):
    res = dtw(np.array(q), np.array(r), keep=True)
    p = res.path.pairs
    assert tuple(p[0]) == (0, 0) and tuple(p[-1]) == (len(r) - 1, len(q) - 1)
    steps = np.diff(p, axis=0)
    assert ((steps >= 0) & (steps <= 1)).all() and (steps.sum(axis=1) >= 1).all()
    assert sum(res.cost_matrix[k, j] for k, j in p) == pytest.approx(res.distance, abs=1e-12)


def test_dtw_symmetry_and_identity():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(7, 3)), rng.normal(size=(5, 3))
    assert dtw(a, b).distance == pytest.approx(dtw(b, a).distance, abs=1e-12)
    assert dtw(a, a).distance == 0.0


def test_tie_break_prefers_diagonal_then_up():
    res = align(np.zeros((3, 3)))
    assert res.path.pairs.tolist() == [[0, 0], [1, 1], [2, 2]]
    res = align(np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0]]))
    assert res.path.pairs.tolist() == [[0, 0], [1, 0], [2, 1]]
    assert format_path(res.path) == "0 0\n1 0\n2 1\n"


def test_distance_matrix_orientation():
    d = distance_matrix(np.array([[0.0], [1.0]]), np.array([[0.0], [2.0], [5.0]]))
    assert d.shape == (3, 2)
    assert d[2, 0] == 5.0


def test_feature_set_mismatch():
    a = FeatureMatrix(np.zeros((3, 2)), FeatureSet.F12)
    b = FeatureMatrix(np.zeros((3, 2)), FeatureSet.F13)
    with pytest.raises(ValueError, match="feature-set"):
        dtw(a, b)


def test_schedule_endpoints():
    p = WeightParams()
    assert sigmoid_params(0, 5, p) == (9.0, -2.0)
    assert sigmoid_params(1, 5, p) == (6.0, 1.5)
    assert sigmoid_params(5, 5, p) == (4.0, 2.0)
    assert sigmoid_params(3, 5, p) == (5.0, 1.75)
    assert sigmoid_params(1, 1, p, allow_single=True) == (4.0, 2.0)
    with pytest.raises(ValueError):
        sigmoid_params(1, 1, p)
    with pytest.raises(ValueError):
        sigmoid_params(6, 5, p)


def test_weight_direction():
    # unstable strokes: close points are penalised more than distant ones
    assert weight(0.0, 0, 5) > weight(12.0, 0, 5)
    # stable strokes: distant points are penalised more
    assert weight(1.0, 5, 5) < weight(8.0, 5, 5)
    assert weight(4.0, 5, 5) == 1.5


def test_zero_substitution():
    d = np.array([[0.0, 0.0], [2.0, 0.5]])
    out = substitute_zero_distances(d, np.array([0, 3]))
    np.testing.assert_array_equal(out, [[0.5, 0.0], [2.0, 0.5]])
    np.testing.assert_array_equal(substitute_zero_distances(np.zeros((2, 2)), [0, 0]), 0.0)


@st.composite
def sm_instances(draw):
    m = draw(st.integers(1, 5))
    n = draw(st.integers(2, 5))
    dim = draw(st.integers(1, 2))
    vals = st.integers(-2, 2).map(float)
    r = [[draw(vals) for _ in range(dim)] for _ in range(m)]
    q = [[draw(vals) for _ in range(dim)] for _ in range(n)]
    inner = draw(st.sets(st.integers(1, n - 2), max_size=max(0, n - 2))) if n > 2 else set()
    bounds = (0, *sorted(inner), n - 1)
    n_refs = draw(st.integers(2, 6))
    counts = [draw(st.integers(0, n_refs)) for _ in range(len(bounds) - 1)]
    return q, r, bounds, counts, n_refs


@given(sm_instances())
@settings(max_examples=200, deadline=None)
def test_smdtw_equals_enumeration(inst):
    q, r, bounds, counts, n_refs = inst
    seg = Segmentation(bounds)
    rel = RelevanceProfile(np.array(counts), n_refs)
    got = smdtw(np.array(q), np.array(r), rel, seg).distance
    assert got == brute_smdtw(q, r, rel.point_relevance(seg), n_refs)


def test_unit_weight_hook_reproduces_dtw():
    rng = np.random.default_rng(4)
    q, r = rng.normal(size=(9, 3)), rng.normal(size=(7, 3))
    seg = Segmentation((0, 4, 8))
    rel = RelevanceProfile(np.array([0, 2]), 3)
    one = lambda d, b, c: np.ones_like(d)  # noqa: E731
    assert smdtw(q, r, rel, seg, weight_fn=one).distance == dtw(q, r).distance


def test_smdtw_input_checks():
    q, r = np.zeros((5, 1)), np.zeros((4, 1))
    with pytest.raises(ValueError):
        smdtw(q, r, RelevanceProfile(np.array([1]), 2), Segmentation((0, 2, 4)))
    with pytest.raises(ValueError):
        smdtw(q, r, RelevanceProfile(np.array([1]), 2), Segmentation((0, 5)))


def test_keep_exposes_weights():
    q = np.array([[0.0], [1.0], [2.0]])
    res = smdtw(q, q, RelevanceProfile(np.array([2]), 2), Segmentation((0, 2)), keep=True)
    assert res.weights.shape == (3, 3)
    assert ((res.weights > 1) & (res.weights < 2)).all()
    assert res.distance == 0.0
    assert math.isfinite(res.cost_matrix.sum())

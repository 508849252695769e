import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from smdtw.features import FEATURE_SETS, FeatureSet, build_features, derivative, zscore
from smdtw.sigmodel import synth_signature

ARITY = {"F1": 8, "F2": 6, "F3": 6, "F4": 6, "F5": 6, "F6": 4, "F7": 4, "F8": 4,
         "F9": 4, "F10": 4, "F11": 4, "F12": 2, "F13": 2, "F14": 2, "F15": 2}


def test_table_selection():
    assert FeatureSet.F5.columns == ("vx", "vy", "ax", "ay", "p", "vp")
    assert FeatureSet.F12.columns == ("x", "y")
    assert {fs.value: len(cols) for fs, cols in FEATURE_SETS.items()} == ARITY


@pytest.mark.parametrize("fs", list(FeatureSet))
def test_shapes(fs, template):
    fm = build_features(template, fs)
    assert fm.rows.shape == (len(template), ARITY[fs.value])
    assert fm.point_count == len(template)


def test_parse_names():
    assert FeatureSet.parse("f3") is FeatureSet.F3
    with pytest.raises(ValueError, match="F1..F15"):
        FeatureSet.parse("F16")


def test_derivative_exact_on_quadratic():
    t = np.array([0.0, 1.0, 3.0, 4.0, 7.0])
    v = 2.0 * t + 1.0
    np.testing.assert_allclose(derivative(v, t), 2.0)
    with pytest.raises(ValueError):
        derivative([1.0], [0.0])
    with pytest.raises(ValueError):
        derivative([1.0, 2.0], [0.0, 1.0, 2.0])


@given(arrays(float, st.tuples(st.integers(2, 40), st.integers(1, 5)),
              elements=st.floats(-1e3, 1e3)))
@settings(max_examples=150, deadline=None)
def test_zscore_moments(a):
    z = zscore(a)
    for j in range(a.shape[1]):
        if np.ptp(a[:, j]) == 0:
            assert (z[:, j] == 0).all()
        elif a[:, j].std() > 1e-6 * max(1.0, np.abs(a[:, j]).max()):
            assert abs(z[:, j].mean()) < 1e-8
            assert abs(z[:, j].std() - 1.0) < 1e-8


def test_constant_pressure_column_is_zero():
    sig = synth_signature(2, 4, 0.0)
    flat = sig.replace_samples(p=np.full(len(sig), 400.0))
    fm = build_features(flat, "F13")
    assert (fm.rows == 0).all()


@given(st.floats(0.2, 5.0), st.floats(-300, 300), st.floats(-300, 300))
@settings(max_examples=30, deadline=None)
def test_position_features_invariant_to_scale_and_shift(k, dx, dy):
    sig = synth_signature(5, 5, 0.1)
    moved = sig.replace_samples(x=k * sig.x + dx, y=k * sig.y + dy)
    for fs in ("F1", "F5", "F12"):
        np.testing.assert_allclose(build_features(moved, fs).rows,
                                   build_features(sig, fs).rows, atol=1e-7)


def test_matrix_is_immutable(template):
    fm = build_features(template, "F5")
    with pytest.raises(ValueError):
        fm.rows[0, 0] = 0.0

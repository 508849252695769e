import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_eer
from smdtw.config import Config
from smdtw.evalharness import (ExperimentSpec, ProtocolError, ScorePool, TABLE_COLUMNS,
                               det_csv, det_points, eer, improvement, report_table,
                               run_experiment, run_experiments)
from smdtw.sigmodel import synth_corpus


scores = st.lists(st.integers(0, 30).map(float), min_size=1, max_size=25)


@given(scores, scores)
@settings(max_examples=300, deadline=None)
def test_eer_matches_brute_force(g, i):
    assert eer((g, i)) == pytest.approx(brute_eer(g, i), abs=1e-12)


def test_eer_edge_cases():
    assert eer(([0.0, 1.0], [5.0, 6.0])) == 0.0
    assert eer(([5.0, 6.0], [0.0, 1.0])) == 1.0
    assert eer(([1.0], [1.0])) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        eer(([], [1.0]))


def test_eer_hand_worked():
    # thresholds 1..4: (FAR, FRR) = (0, 2/3) (1/2, 2/3) (1/2, 1/3) (1, 0)
    g, i = [1.0, 3.0, 4.0], [2.0, 4.0]
    assert eer((g, i)) == pytest.approx(0.5)
    assert eer(ScorePool.from_scores(g, i)) == pytest.approx(0.5)


def test_det_points_monotone():
    rng = np.random.default_rng(2)
    pool = (rng.normal(0, 1, 50), rng.normal(1, 1, 60))
    pts = det_points(pool, with_thresholds=True)
    t, far, frr = map(np.array, zip(*pts))
    assert (np.diff(t) > 0).all()
    assert (np.diff(far) >= 0).all() and (np.diff(frr) <= 0).all()
    assert far[-1] == 1.0 and frr[-1] == 0.0
    assert det_csv(pool).splitlines()[0] == "threshold,far,frr"


def test_improvement():
    assert improvement(0.1, 0.05) == pytest.approx(50.0)
    assert improvement(0.0, 0.0) is None


def test_report_table_layout():
    res = {"F5": {("dtw", "s2", "sf"): 0.10, ("smdtw", "s2", "sf"): 0.05},
           "F1": {("dtw", "s1", "rf"): 0.0, ("smdtw", "s1", "rf"): 0.0}}
    lines = report_table(res).splitlines()
    header = lines[0].split("\t")
    assert header[1:] == TABLE_COLUMNS
    assert [ln.split("\t")[0] for ln in lines[1:]] == ["F1", "F5"]
    f1 = dict(zip(header, lines[1].split("\t")))
    f5 = dict(zip(header, lines[2].split("\t")))
    assert f5["s2:DTW-SF"] == "10.00" and f5["s2:SM-SF"] == "5.00"
    assert f5["s2:dSF"] == "50.00%" and f5["s2:dRF"] == "-"
    assert f1["s1:dRF"] == "n/a"


@pytest.fixture(scope="module")
def corpus():
    return synth_corpus(4, 7, 3, n_strokes=5)


def test_protocol_counts(corpus):
    sf = run_experiment(corpus, ExperimentSpec("sf", 5, Config(method="dtw")))
    assert len(sf.genuine) == 4 * 2 and len(sf.impostor) == 4 * 3
    rf = run_experiment(corpus, ExperimentSpec("rf", 5, Config(method="dtw")))
    assert len(rf.impostor) == 4 * 3
    assert {r.label for r in rf.impostor} == {"genuine"}
    assert all(r.specimen.split("/")[0] != r.writer for r in rf.impostor)
    assert all(r.specimen.endswith("g000") for r in rf.impostor)


def test_protocol_errors(corpus):
    no_forg = [s for s in corpus if s.label == "genuine"]
    with pytest.raises(ProtocolError, match="skilled_forgery"):
        run_experiment(no_forg, ExperimentSpec("sf", 5))
    with pytest.raises(ProtocolError, match="w000"):
        run_experiment(corpus, ExperimentSpec("rf", 8))
    with pytest.raises(ValueError):
        ExperimentSpec("xx", 5)


def test_parallel_matches_serial(corpus):
    spec = ExperimentSpec("sf", 5)
    a = run_experiments(corpus, spec, workers=1)
    b = run_experiments(corpus, spec, workers=2)
    assert a.keys() == b.keys()
    for key in a:
        assert a[key].to_csv() == b[key].to_csv()

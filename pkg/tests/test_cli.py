import shutil

import pytest

from smdtw.cli import main
from smdtw.sigmodel import synth_corpus, write_signature


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    for s in synth_corpus(3, 7, 3, n_strokes=5):
        write_signature(s, root / f"{s.writer_id}_{s.specimen_id}.txt")
    return root


@pytest.fixture(scope="module")
def refset_path(dataset, tmp_path_factory):
    refs = tmp_path_factory.mktemp("refs")
    for k in range(5):
        shutil.copy(dataset / f"w000_g{k:03d}.txt", refs)
    out = refs / "rs.json"
    assert main(["enroll", str(refs), "--out", str(out)]) == 0
    return out


def test_enroll_errors(dataset, tmp_path):
    one = tmp_path / "one"
    one.mkdir()
    shutil.copy(dataset / "w000_g000.txt", one)
    assert main(["enroll", str(one), "--out", str(tmp_path / "x.json")]) == 2
    mixed = tmp_path / "mixed"
    mixed.mkdir()
    for name in ("w000_g000", "w000_g001", "w000_g002", "w001_g000", "w001_g001"):
        shutil.copy(dataset / f"{name}.txt", mixed)
    assert main(["enroll", str(mixed), "--out", str(tmp_path / "x.json")]) == 2
    assert not (tmp_path / "x.json").exists()


def test_verify(refset_path, dataset, tmp_path, capsys):
    assert main(["verify", str(refset_path), str(dataset / "w000_g000.txt")]) == 0
    row = capsys.readouterr().out.strip()
    assert row.startswith("w000,g000,smdtw,s2,") and row.endswith(",accept")
    assert main(["verify", str(refset_path), str(dataset / "w000_f000.txt")]) == 1
    assert capsys.readouterr().out.strip().endswith(",reject")
    bad = tmp_path / "garbage.txt"
    bad.write_text("not a signature\n")
    assert main(["verify", str(refset_path), str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["verify", str(refset_path), str(tmp_path / "missing.txt")]) == 2


def test_verify_flags(refset_path, dataset, capsys):
    args = ["verify", str(refset_path), str(dataset / "w000_g006.txt"), "--method", "dtw",
            "--normalization", "s1", "--threshold", "100"]
    assert main(args) == 0
    assert ",dtw,s1," in capsys.readouterr().out


def test_evaluate(dataset, tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["evaluate", str(dataset), "--out", str(out_a), "--protocol", "rf",
                 "--method", "dtw"]) == 0
    assert "EER" in capsys.readouterr().out
    assert main(["evaluate", str(dataset), "--out", str(out_b), "--protocol", "rf",
                 "--method", "smdtw"]) == 0
    ta, tb = (p.joinpath("table.tsv").read_text() for p in (out_a, out_b))
    assert ta != tb
    scores = (out_a / "scores_F5_dtw_s2_rf.csv").read_text().splitlines()
    assert "# method = dtw" in scores and "# protocol = rf" in scores
    assert (out_a / "det_F5_dtw_s2_rf.csv").exists()
    assert not any(p.name.endswith(".tmp") for p in out_a.iterdir())


def test_evaluate_sf_needs_forgeries(dataset, tmp_path):
    gen = tmp_path / "gen"
    gen.mkdir()
    for p in dataset.glob("*_g*.txt"):
        shutil.copy(p, gen)
    assert main(["evaluate", str(gen), "--out", str(tmp_path / "o"), "--protocol", "sf"]) == 2


def test_config_file(dataset, refset_path, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("normalization = s1\n")
    assert main(["verify", str(refset_path), str(dataset / "w000_g000.txt"),
                 "--config", str(cfg)]) == 0
    assert ",smdtw,s1," in capsys.readouterr().out
    cfg.write_text("bogus = 1\n")
    assert main(["verify", str(refset_path), str(dataset / "w000_g000.txt"),
                 "--config", str(cfg)]) == 2


def test_debug(dataset, refset_path, capsys):
    sig = str(dataset / "w000_g006.txt")
    assert main(["debug", sig]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# boundaries\n0\n")
    assert main(["debug", sig, "--refset", str(refset_path)]) == 0
    out = capsys.readouterr().out
    assert "relevance 5 5 5 5 5" in out
    assert main(["debug", sig, "--refset", str(refset_path), "--matrices"]) == 0
    out = capsys.readouterr().out
    for section in ("# dtw cost", "# smdtw weights", "# smdtw cost", "# smdtw path"):
        assert section in out


def test_synth(tmp_path):
    assert main(["synth", str(tmp_path), "--writers", "2", "--genuine", "3",
                 "--forgeries", "1"]) == 0
    assert len(list(tmp_path.glob("*.txt"))) == 8

import pytest

from smdtw.config import Config, ConfigError, load_config, parse_config


def test_defaults():
    c = Config()
    assert (c.feature_set, c.method, c.normalization, c.n_references) == ("F5", "smdtw", "s2", 5)
    assert (c.th_lcs, c.th_len, c.th_gs) == (75.0, 3, 90.0)
    wp = c.weight_params
    assert (wp.b0, wp.b_min, wp.b_max, wp.c0, wp.c_min, wp.c_max) == (9, 4, 6, -2, 1.5, 2)


def test_parse_and_override(tmp_path):
    text = "# comment\nfeature_set = f12\nth_gs = 85   # trailing\nmethod=dtw\n"
    c = parse_config(text)
    assert (c.feature_set, c.th_gs, c.method) == ("F12", 85.0, "dtw")
    assert c.updated(method="smdtw", th_gs=None).method == "smdtw"
    path = tmp_path / "c.cfg"
    path.write_text(text)
    assert load_config(path) == c


@pytest.mark.parametrize("text, fragment", [
    ("th_lsc = 70\n", "unknown"),
    ("th_gs = 80\nth_gs = 81\n", "duplicate"),
    ("th_gs\n", "key = value"),
    ("th_len = three\n", "bad value"),
    ("method = edr\n", "method"),
    ("feature_set = F99\n", "F1..F15"),
    ("n_references = 1\n", "n_references"),
])
def test_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_header_lines():
    lines = Config().header_lines()
    assert "# feature_set = F5" in lines and "# threshold = 0.0" in lines
    assert parse_config("\n".join(ln[2:] for ln in lines)) == Config()

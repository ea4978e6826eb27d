import math

import pytest

from chanstat.config import (ConfigError, load_config, parse_dist, parse_list, parse_number)


def test_defaults():
    conf = load_config()
    assert conf.seed == 0
    assert conf.channel().size == 16
    assert conf["estimate"]["snr_grid"] == [-10, -5, 0, 5, 10, 15, 20, 25, 30]
    assert conf["cluster"]["k_grid"] == [4, 8, 16, 32]
    assert conf["verify-theorem"]["tol"] == 0.05
    assert conf.prior().theta_r.params == (-math.pi / 2, math.pi / 2)
    sc = conf.velocity()
    assert sc.cfg.m_sn == 16 and sc.n_paths == 50


@pytest.mark.parametrize("text, value", [("pi", math.pi), ("-pi/2", -math.pi / 2),
                                         ("2*pi", 2 * math.pi), ("1e-3", 1e-3), (" 4 ", 4.0)])
def test_parse_number(text, value):
    assert parse_number(text) == pytest.approx(value)


def test_parse_list_and_dist():
    assert parse_list("0:0.5:1") == [0.0, 0.5, 1.0]
    assert parse_list("3, 1,2") == [3.0, 1.0, 2.0]
    assert parse_dist("uniform(-pi/2, pi/2)") == ("uniform", (-math.pi / 2, math.pi / 2))
    assert parse_dist("equal") == ("equal", ())
    with pytest.raises(ConfigError):
        parse_list("0:0:1")
    with pytest.raises(ConfigError):
        parse_number("abc")


def test_file_and_overrides(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[run]\nseed = 5\n\n[channel]\nm_r = 4  # antennas\n\n"
                    "[prior]\nn_paths = 2\ndoppler = normal(0, 10)\n")
    conf = load_config(path, {"channel": {"m_r": "8"}})
    assert conf.seed == 5
    assert conf.channel().m_r == 8
    assert conf.prior().doppler.params == (0.0, 10.0)
    assert conf["prior"]["n_paths"] == 2


@pytest.mark.parametrize("text, msg", [
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[run]\nsede = 1\n", "unknown key"),
    ("[run]\nseed = -1\n", "unsigned"),
    ("[channel]\nm_r = many\n", "m_r"),
    ("not an ini file", "section headers"),
])
def test_rejects_bad_config(tmp_path, text, msg):
    path = tmp_path / "c.ini"
    path.write_text(text)
    with pytest.raises(ConfigError, match=msg):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "none.ini")

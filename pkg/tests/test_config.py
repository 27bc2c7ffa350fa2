import pytest

from subml.config import load_config, parse_mimo, parse_snr_range, read_config_text
from subml.errors import ConfigError


@pytest.mark.parametrize("text,expected", [
    ("0:14:2", (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)),
    ("1:2:0.5", (1.0, 1.5, 2.0)),
    ("3:3:1", (3.0,)),
    ("0:1:0.1", tuple(round(0.1 * i, 10) for i in range(11))),
])
def test_snr_range(text, expected):
    assert parse_snr_range(text) == expected


@pytest.mark.parametrize("bad", ["0:14", "0:14:0", "5:0:1", "a:b:c"])
def test_snr_range_rejects(bad):
    with pytest.raises(ValueError):
        parse_snr_range(bad)


@pytest.mark.parametrize("text,dims", [("2x2", (2, 2)), (" 4X1 ", (4, 1)), ("1x3", (1, 3))])
def test_mimo(text, dims):
    assert parse_mimo(text) == dims


@pytest.mark.parametrize("bad", ["2", "2x", "0x2", "axb"])
def test_mimo_rejects(bad):
    with pytest.raises(ValueError):
        parse_mimo(bad)


class TestReadConfig:
    def test_full_example(self):
        text = """
[link]
modulation = qam16
mimo = 2x2            ; Nt x Nr
target = pmin-factor:2.0

[sweep]
snr_db_range = 0:14:2
trials = 100000
seed = 1

[output]
out = c.csv
"""
        cfg = read_config_text(text)
        lines = cfg.pop("__lines__")
        assert cfg["mimo"] == "2x2"
        assert cfg["trials"] == "100000"
        assert lines["seed"] == 10

    @pytest.mark.parametrize("text,line,field", [
        ("[link]\nmodulation = qam16\n[bogus]\nx = 1\n", 3, None),
        ("[sweep]\ntrials = 1\ncolour = red\n", 3, "sweep.colour"),
        ("modulation = qam16\n", 1, None),
        ("[sweep]\ntrials = 1\ntrials = 2\n", 3, "trials"),
        ("[sweep]\nsnr_db = 1\nsnr_db_range = 0:2:1\n", 2, "sweep.snr_db"),
    ])
    def test_errors_name_line_and_field(self, text, line, field):
        with pytest.raises(ConfigError) as info:
            read_config_text(text)
        assert info.value.line == line
        assert info.value.field == field
        assert f"line {line}" in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.ini"))

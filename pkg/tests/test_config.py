import re

import pytest

from pefetsim.arrays import ArrayConfig
from pefetsim.config import default_text, load_config, parse_config
from pefetsim.errors import ConfigError


def test_defaults_match_dataclasses():
    rc = load_config()
    for a in ("HD", "TALL", "WIDE", "CC"):
        assert rc.array(a) == ArrayConfig(arch=a)


def test_missing_section_named():
    text = default_text().replace("[fet]", "[fetx]")
    with pytest.raises(ConfigError, match="fetx"):
        parse_config(text)
    lines = [l for l in default_text().splitlines()]
    start = lines.index("[fet]")
    end = next(i for i in range(start + 1, len(lines)) if lines[i].startswith("["))
    with pytest.raises(ConfigError, match=r"\[fet\]"):
        parse_config("\n".join(lines[:start] + lines[end:]))


def test_unknown_key_has_line_number():
    text = default_text().replace("[sweep]", "[sweep]\nbogus = 1")
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.lineno == text.splitlines().index("bogus = 1") + 1


def test_bad_value():
    text = default_text().replace("[array]", "[array]\nn_w = lots", 1)
    with pytest.raises(ConfigError, match="n_w"):
        parse_config(text)


def test_overrides_apply(tmp_path):
    text = re.sub(r"(?m)^kappa = .*$", "kappa = 0.07", default_text())
    p = tmp_path / "run.ini"
    p.write_text(text)
    rc = load_config(p)
    assert rc.kappa == 0.07
    assert rc.array("HD").kappa == pytest.approx(0.07)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")

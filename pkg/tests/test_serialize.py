import json
import math

from hypothesis import given
from hypothesis import strategies as st

from ordlab.serialize import config_hash, csv_text, dumps, fmt_real, json_safe, write_manifest


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_reals_round_trip(x):
    assert float(fmt_real(x)) == x


def test_fixed_format():
    assert fmt_real(0.1) == "0.10000000000000001"
    assert fmt_real(2 / 3) == "0.66666666666666663"
    assert fmt_real(3) == "3" and fmt_real(True) == "1" and fmt_real(None) == ""


def test_neg_inf_in_csv():
    text = csv_text(["n", "log_p"], [[1, -0.5], [2, -math.inf]], ["log_p"])
    assert text.splitlines() == ["n,log_p,log_p_neginf", "1,-0.5,0", "2,,1"]


def test_neg_inf_in_json():
    obj = json.loads(dumps({"f": -math.inf, "g": [1.5, math.nan]}))
    assert obj == {"f": "-inf", "g": [1.5, None]}
    assert "NaN" not in dumps({"x": math.nan})


def test_config_hash_is_order_free():
    assert config_hash({"a": 1, "b": [1.0, 2.0]}) == config_hash({"b": [1.0, 2.0], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert json_safe((1, 2)) == [1, 2]


def test_manifest_fields(tmp_path):
    m = write_manifest(tmp_path, {"k": 1}, 42, ["ordlab", "selftest"])
    data = json.loads((tmp_path / "manifest.json").read_text())
    assert set(data) == {"command_line", "config_hash", "seed", "tool_version", "timestamp"}
    assert data["seed"] == 42 and data["command_line"] == "ordlab selftest"
    assert data["tool_version"] == "0.1.0" and m.config_hash == config_hash({"k": 1})

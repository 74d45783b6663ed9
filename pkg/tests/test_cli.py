import io
import json

import numpy as np
import pytest
from pytest import approx

from dejong import model_io
from dejong.cli import SCHEMA, run
from dejong.errors import ModelError
from dejong.generators import homogeneous_sum, random_vector_instance


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


COIN = {"support": [-1, 1], "probs": [0.5, 0.5]}
X1X2 = {"coordinates": [COIN, COIN], "components": [{"subset": [1, 2], "values": [1, -1, -1, 1]}]}


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.fixture
def x1x2(tmp_path):
    return write(tmp_path / "x1x2.json", X1X2)


def test_shadows_command():
    code, text = call("shadows", "--d", "2")
    assert code == 0
    assert "C_2 = 19" in text and "kappa_2 = 23" in text


def test_bound_command(x1x2, tmp_path):
    out = tmp_path / "r.json"
    code, text = call("bound", "--model", x1x2, "--mode", "cd-rho", "--cd", "13", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == SCHEMA and doc["command"] == "bound"
    assert doc["result"]["total"] == approx(9.554, abs=1e-3)
    assert doc["result"]["kappa"] == 17
    code, text = call("bound", "--model", x1x2, "--out", str(out))
    assert json.loads(out.read_text())["result"]["kappa"] == 23
    code, text = call("bound", "--model", x1x2, "--mode", "exact")
    assert code == 0 and "bound = 1.333333" in text


def test_product_check_command():
    code, text = call("product-check", "--seed", "7", "--trials", "50")
    assert code == 0 and text.startswith("50/50 matches")


def test_randomized_commands_need_seed(x1x2):
    assert call("product-check")[0] == 2
    assert call("simulate", "--model", x1x2)[0] == 2
    assert call("report", "--model", x1x2)[0] == 2


def test_usage_and_model_errors(tmp_path, x1x2):
    assert call()[0] == 2
    assert call("nonsense")[0] == 2
    assert call("bound")[0] == 2
    assert call("bound", "--model", str(tmp_path / "missing.json"))[0] == 2
    bad = write(tmp_path / "bad.json", {"coordinates": [{"support": [0, 1], "probs": [0.5, 0.6]}]})
    assert call("decompose", "--model", bad)[0] == 2
    mixed = write(tmp_path / "mixed.json", {
        "coordinates": [COIN, COIN],
        "components": [{"subset": [1, 2], "values": [1, -1, -1, 1]}, {"subset": [1], "values": [-1, 1]}]})
    assert call("bound", "--model", mixed)[0] == 2
    assert call("simulate", "--model", x1x2, "--seed", "1", "--threads", "0")[0] == 2


def test_budget_and_capability_errors(x1x2):
    assert call("moments", "--model", x1x2, "--budget", "2")[0] == 3
    assert call("shadows", "--d", "6")[0] == 3


def test_check_command(tmp_path, x1x2):
    code, text = call("check", "--model", x1x2)
    assert code == 0 and "verdict = PASS" in text
    mixed = write(tmp_path / "mixed.json", {
        "coordinates": [COIN, COIN],
        "components": [{"subset": [1, 2], "values": [1, -1, -1, 1]}, {"subset": [1], "values": [-1, 1]}]})
    code, text = call("check", "--model", mixed, "--d", "2")
    assert code == 1 and "verdict = FAIL" in text


def test_moments_and_decompose(x1x2, tmp_path):
    out = tmp_path / "m.json"
    assert call("moments", "--model", x1x2, "--out", str(out))[0] == 0
    res = json.loads(out.read_text())["result"]
    assert res["fourth_moment"] == approx(1) and res["tau"] == approx(1) and res["rho2"] == approx(1)
    assert call("decompose", "--model", x1x2, "--out", str(out))[0] == 0
    res = json.loads(out.read_text())["result"]
    assert res["components"][0]["subset"] == [1, 2] and res["variance"] == approx(1)


def test_simulate_command(x1x2, tmp_path):
    out = tmp_path / "s.json"
    code, text = call("simulate", "--model", x1x2, "--seed", "3", "--samples", "20000", "--out", str(out))
    assert code == 0 and "verdict = PASS" in text
    res = json.loads(out.read_text())["result"]
    assert res["samples"] == 20000 and res["wasserstein"] < res["bound"]


def test_generator_model(tmp_path):
    path = write(tmp_path / "g.json", {"generator": {"kind": "homogeneous", "params": {"n": 6, "d": 2}}})
    code, text = call("bound", "--model", path)
    assert code == 0 and "kappa_2 = 23" in text
    path = write(tmp_path / "s.json", {"generator": {"kind": "symmetric",
                                                     "params": {"n": 4, "d": 2, "kernel": [1, -1, -1, 1]}}})
    assert call("moments", "--model", path)[0] == 0
    path = write(tmp_path / "u.json", {"generator": {"kind": "mystery", "params": {"n": 4}}})
    assert call("moments", "--model", path)[0] == 2


def test_bound_multi_command(tmp_path):
    rng = np.random.default_rng(2)
    v = random_vector_instance(rng, (1, 2), 4)
    path = tmp_path / "v.json"
    model_io.save_model(model_io.spec_from_vector(v), path)
    out = tmp_path / "o.json"
    code, _ = call("bound-multi", "--model", str(path), "--out", str(out))
    assert code == 0
    res = json.loads(out.read_text())["result"]
    assert res["A"] >= 0 and res["orders"] == [1, 2]


def test_report_is_deterministic(x1x2, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert call("report", "--model", x1x2, "--seed", "5", "--samples", "5000", "--out", str(a))[0] == 0
    assert call("report", "--model", x1x2, "--seed", "5", "--samples", "5000", "--threads", "2", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert set(doc["result"]) >= {"decompose", "check", "moments", "bound", "product-check", "simulate", "shadows"}


def test_model_round_trip(tmp_path):
    u = homogeneous_sum(3, 2, {(1, 2): 0.6, (2, 3): 0.8})
    spec = model_io.spec_from_statistic(u)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    model_io.save_model(spec, p1)
    loaded = model_io.load_model(p1)
    model_io.save_model(loaded, p2)
    again = model_io.load_model(p2)
    assert loaded == again == spec
    assert p1.read_text() == p2.read_text()
    w = model_io.statistic(again)
    for J, k in u.components.items():
        assert np.array_equal(w.components[J].values, k.values)


def test_vector_round_trip(tmp_path):
    v = random_vector_instance(np.random.default_rng(3), (1, 2), 3)
    spec = model_io.spec_from_vector(v)
    path = tmp_path / "v.json"
    model_io.save_model(spec, path)
    assert model_io.load_model(path) == spec


def test_parse_errors():
    with pytest.raises(ModelError):
        model_io.parse_model([])
    with pytest.raises(ModelError):
        model_io.parse_model({"coordinates": [COIN], "components": [{"subset": [1]}]})
    with pytest.raises(ModelError):
        model_io.parse_model({"coordinates": [COIN], "order": -1})
    with pytest.raises(ModelError):
        model_io.parse_model({"coordinates": []})

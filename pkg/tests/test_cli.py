import json

import numpy as np
import pytest

from dilation_forge.cli import main
from dilation_forge.generators import parrott_tuple, random_tuple, scalar_triple
from dilation_forge.io import dump_json, load_tuple, tuple_from_dict, tuple_to_dict
from dilation_forge.tuples import TupleSpec


@pytest.fixture
def triple_file(tmp_path):
    path = tmp_path / "triple.json"
    dump_json(tuple_to_dict(scalar_triple()), str(path))
    return str(path)


def test_roundtrip_exact():
    spec = random_tuple("u-commuting", 3, 4, seed=9)
    doc = json.loads(json.dumps(tuple_to_dict(spec)))
    back = tuple_from_dict(doc)
    for a, b in zip(spec.blocks, back.blocks):
        assert np.array_equal(a[0], b[0])
    assert np.array_equal(spec.phases, back.phases)


def test_roundtrip_algebra(tmp_path):
    spec = random_tuple("covariant", 3, 4, seed=2, k=2,
                        automorphisms=[[1, 0], [0, 1], [1, 0]])
    path = tmp_path / "cov.json"
    dump_json(tuple_to_dict(spec), str(path))
    back = load_tuple(str(path))
    assert back.algebra.k == 2
    assert back.algebra.automorphisms == spec.algebra.automorphisms
    assert np.array_equal(back.op(1), spec.op(1))


def test_classify_exit_codes(tmp_path, triple_file, capsys):
    assert main(["classify", "-i", triple_file]) == 0
    parrott = tmp_path / "parrott.json"
    dump_json(tuple_to_dict(parrott_tuple()), str(parrott))
    assert main(["classify", "-i", str(parrott)]) == 2
    out = capsys.readouterr().out
    assert "szego" in out  # names the failing PSD condition
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text('{"n": 3, "dimH":')
    assert main(["classify", "-i", str(corrupt)]) == 1
    assert main(["classify", "-i", str(tmp_path / "missing.json")]) == 1


def test_dilate_and_verify(tmp_path, triple_file):
    model_path = tmp_path / "model.json"
    assert main(["dilate", "-i", triple_file, "--degree", "4",
                 "-o", str(model_path)]) == 0
    doc = json.loads(model_path.read_text())
    assert doc["dims"]["cells"] == 15  # C(2+4, 2) Fock cells
    assert main(["verify", "--model", str(model_path)]) == 0
    assert main(["verify", "-i", triple_file, "--degree", "3"]) == 0


def test_dilate_rejections(tmp_path):
    parrott = tmp_path / "parrott.json"
    dump_json(tuple_to_dict(parrott_tuple()), str(parrott))
    assert main(["dilate", "-i", str(parrott)]) == 2
    d2 = TupleSpec(n=2, dimH=2, d=2,
                   blocks=[[np.zeros((2, 2))] * 2, [np.zeros((2, 2))] * 2])
    d2_path = tmp_path / "d2.json"
    dump_json(tuple_to_dict(d2), str(d2_path))
    assert main(["dilate", "-i", str(d2_path)]) == 2


def test_verify_mutated_model_fails(tmp_path, triple_file):
    model_path = tmp_path / "model.json"
    assert main(["dilate", "-i", triple_file, "--degree", "3", "-o", str(model_path)]) == 0
    doc = json.loads(model_path.read_text())
    doc["isometries"][0][0][0] = [0.9, 0.1]
    model_path.write_text(json.dumps(doc))
    assert main(["verify", "--model", str(model_path)]) == 2


def test_random_styles_classify_and_are_deterministic(tmp_path):
    for style in ("jointly-nilpotent", "scaled-commuting", "u-commuting", "covariant"):
        out1 = tmp_path / f"{style}-1.json"
        out2 = tmp_path / f"{style}-2.json"
        args = ["random", "--style", style, "--n", "3", "--dimH", "4", "--seed", "7"]
        assert main(args + ["-o", str(out1)]) == 0
        assert main(args + ["-o", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert main(["classify", "-i", str(out1)]) == 0


def test_demo_prints_identities(capsys):
    assert main(["demo", "--degree", "3"]) == 0
    out = capsys.readouterr().out
    for name in ("lemma_U1", "eq_ABn", "eq_Cn", "pi_isometry", "factor_tau12",
                 "dilation1_tau1", "dilation2_taun", "moment_match"):
        assert name in out
    assert "overall: pass" in out


def test_verify_requires_source(capsys):
    assert main(["verify"]) == 1


def test_json_format_output(triple_file, capsys):
    assert main(["classify", "-i", triple_file, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "class_report" and doc["in_T1n"] is True

from __future__ import annotations

import json

import pytest

from vfchain import io
from vfchain.cli import main
from vfchain.flowcat import FlowCategory, MorphismDescriptor
from vfchain.coeff import GammaMonoid
from vfchain.morse import find_matching, fixture
from vfchain.stratmodel import StratPoset, cube_face_model, two_halves_refinement


def run(capsys, *argv):
    code = main([*argv, "--format", "structured"])
    out = json.loads(capsys.readouterr().out)
    assert out["exit_code"] == code
    return code, out


@pytest.fixture
def files(tmp_path):
    paths = {}

    def write(name, data):
        p = tmp_path / name
        p.write_text(data if isinstance(data, str) else json.dumps(data))
        paths[name] = str(p)
        return str(p)

    write("square.json", cube_face_model(2).to_json())
    bad = StratPoset({"m": 0, "a": 1, "b": 1, "c": 1, "t": 2},
                     [("m", "a"), ("m", "b"), ("m", "c"), ("a", "t"), ("b", "t"), ("c", "t")])
    write("link.json", bad.to_json())
    write("garbage.json", "{not json")
    write("shape.json", {"elements": 3})
    write("refine.json", two_halves_refinement().to_json())
    K = fixture("t2")
    write("m1.json", find_matching(K, 1).to_json())
    write("m2.json", find_matching(K, 2).to_json())
    write("klein_m.json", find_matching(fixture("klein"), 0).to_json())
    triv = GammaMonoid(())
    D = MorphismDescriptor
    corrupt = FlowCategory(triv, {"a": 0, "b": 1, "c": 2},
                           {("a", "b", ()): D(0, 1), ("b", "c", ()): D(0, 1), ("a", "c", ()): D(1)})
    write("corrupt.json", corrupt.to_json())
    return paths


# -- validate-model -------------------------------------------------------


def test_square_model_passes(capsys, files):
    code, out = run(capsys, "validate-model", files["square.json"])
    assert code == 0 and out["ok"] and out["kind"] == "model"


def test_broken_link_located(capsys, files):
    code, out = run(capsys, "validate-model", files["link.json"])
    assert code == 1
    links = [v for v in out["violations"] if v.get("check") == "link"]
    assert links[0]["pair"] == ["'m'", "'t'"]


@pytest.mark.parametrize("name", ["garbage.json", "shape.json", "missing.json"])
def test_malformed_model(capsys, files, name):
    path = files.get(name, "/nonexistent/" + name)
    code, out = run(capsys, "validate-model", path)
    assert code == 2 and "input_error" in out


def test_refinement_file(capsys, files):
    code, out = run(capsys, "validate-model", files["refine.json"])
    assert code == 0 and out["kind"] == "refinement"


def test_stratum_complex(capsys, files):
    code, out = run(capsys, "stratum-complex", files["square.json"], "--field", "z")
    assert code == 0
    assert out["betti"] == {"0": 1} and out["generators"] == {"-2": 1, "-1": 4, "0": 4}
    code, out = run(capsys, "stratum-complex", files["link.json"])
    assert code == 1


# -- floer ----------------------------------------------------------------


def test_floer_torus(capsys):
    code, out = run(capsys, "floer", "t2", "--seed", "3")
    assert code == 0 and out["oracle_match"]
    assert out["betti"] == {"0": 1, "1": 2, "2": 1}
    assert out["d_squared_residual_terms"] == 0


def test_floer_rp2_over_q(capsys):
    code, out = run(capsys, "floer", "rp2", "--field", "q")
    assert code == 0 and out["betti"] == {"0": 1}


def test_floer_rp2_over_f2(capsys):
    code, out = run(capsys, "floer", "rp2", "--field", "f2")
    assert code == 0 and out["betti"] == {"0": 1, "1": 1, "2": 1}


def test_floer_with_matching_file(capsys, files):
    code, out = run(capsys, "floer", "t2", "--matching", files["m1.json"], "--grading", "dim",
                    "--cutoff", "5")
    assert code == 0


def test_floer_corrupted_counts(capsys, files):
    code, out = run(capsys, "floer", "--category", files["corrupt.json"])
    assert code == 1
    assert out["d_squared_residual_terms"] == 1
    assert out["residuals"][0]["source"] == "a" and out["residuals"][0]["target"] == "c"


def test_floer_many_instances_parallel(capsys):
    serial = main(["floer", "klein", "--instances", "3", "--format", "structured"])
    a = capsys.readouterr().out
    parallel = main(["floer", "klein", "--instances", "3", "--jobs", "2", "--format", "structured"])
    b = capsys.readouterr().out
    assert serial == parallel == 0 and a == b


@pytest.mark.parametrize("argv", [["floer", "t2", "--field", "z"], ["floer", "t2", "--field", "x7"],
                                  ["floer", "t2", "--cutoff", "-1"], ["floer"],
                                  ["floer", "/nonexistent/complex.txt"]])
def test_floer_input_errors(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 2


# -- continuation ---------------------------------------------------------


def test_identical_matchings(capsys, files):
    code, out = run(capsys, "continuation", "t2", files["m1.json"], files["m1.json"])
    assert code == 0 and out["ok"]
    assert out["betti"][0] == out["betti"][1] == {"0": 1, "1": 2, "2": 1}


def test_distinct_matchings_sphere(capsys):
    code, out = run(capsys, "continuation", "s2", "--seed", "4")
    assert code == 0 and out["betti"][0] == {"0": 1, "2": 1}


def test_distinct_matching_files(capsys, files):
    code, out = run(capsys, "continuation", "t2", files["m1.json"], files["m2.json"], "--cutoff", "7/2")
    assert code == 0 and out["cutoff"] == "7/2"


def test_mismatched_complexes(capsys, files):
    code, out = run(capsys, "continuation", "s2", files["klein_m.json"], files["klein_m.json"])
    assert code == 2


def test_continuation_needs_finite_cutoff(capsys):
    code, _ = run(capsys, "continuation", "s2", "--cutoff", "inf")
    assert code == 2


# -- others ---------------------------------------------------------------


def test_multimodule(capsys):
    code, out = run(capsys, "multimodule", "t2", "--field", "f2")
    assert code == 0
    assert out["product_ranks"]["1,1"] == [1, 1]


@pytest.mark.parametrize("argv, betti", [
    (["cubical-check", "square"], {"0": 1}),
    (["cubical-check", "circle", "--tensor", "circle"], {"-2": 1, "-1": 2, "0": 1}),
    (["cubical-check", "symmetric-square", "--field", "f2"], {"-2": 1, "0": 1}),
    (["cubical-check", "interval", "--tensor", "circle"], {"-1": 1, "0": 1})])
def test_cubical_check(capsys, argv, betti):
    code, out = run(capsys, *argv)
    assert code == 0 and out["betti"] == betti
    if "--tensor" in argv:
        assert out["eilenberg_zilber"] == {"associativity": True, "commutativity": True,
                                           "leibniz": True}


def test_cubical_bad_file(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"generators": [["v", 0], ["e", 1]], "faces": [["e", 0, 0, "v", []]]}))
    code, out = run(capsys, "cubical-check", str(p))
    assert code == 1
    code, out = run(capsys, "cubical-check", "nothing-here")
    assert code == 2


def test_homology_over_z(capsys):
    code, out = run(capsys, "homology", "rp2", "--field", "z")
    assert code == 0 and out["torsion"] == {"1": [2]} and out["f_vector"] == [6, 15, 10]


def test_unknown_command(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_text_format(capsys):
    assert main(["homology", "s1"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first == "homology: PASS"


def test_reports_are_byte_stable(capsys, files):
    outs = []
    for _ in range(2):
        main(["continuation", "t2", files["m1.json"], files["m2.json"], "--format", "structured"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_dumps_is_sorted():
    assert io.dumps({"b": 1, "a": [1, 2]}).index('"a"') < io.dumps({"b": 1, "a": 1}).index('"b"')

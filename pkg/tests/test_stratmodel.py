from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_model_valid, reduced_betti
from vfchain.stratmodel import (
    PartitionedModel,
    Refinement,
    StratPoset,
    boolean_model,
    classify_elements,
    codim2_interval_sizes,
    cube_face_model,
    identity_refinement,
    interval_model,
    mutate_model,
    order_complex,
    point_model,
    polygon_model,
    product_many,
    product_model,
    random_model,
    reduced_homology,
    simplex_face_model,
    two_halves_model,
    two_halves_refinement,
    validate_model,
    validate_partitioned,
    validate_refinement,
)


def isomorphic(P: StratPoset, Q: StratPoset) -> bool:
    import networkx as nx
    gp, gq = nx.DiGraph(P.relations()), nx.DiGraph(Q.relations())
    gp.add_nodes_from(P.elements)
    gq.add_nodes_from(Q.elements)
    nx.set_node_attributes(gp, P.codim, "c")
    nx.set_node_attributes(gq, Q.codim, "c")
    return nx.is_isomorphic(gp, gq, node_match=lambda a, b: a["c"] == b["c"])


# -- order complexes ------------------------------------------------------


def test_order_complex_two_points():
    P = StratPoset({"a": 0, "b": 0})
    assert sorted(order_complex(P)) == [("a",), ("b",)]
    assert reduced_homology(order_complex(P)).is_sphere(0)


def test_order_complex_chain_of_three():
    P = StratPoset({"a": 0, "b": 1, "c": 2}, [("a", "b"), ("b", "c")])
    simplices = order_complex(P)
    assert len(simplices) == 7
    assert ("a", "b", "c") in simplices
    assert reduced_homology(simplices).is_acyclic()


def test_cube_interval_is_hexagon():
    P = cube_face_model(3)
    inside = P.open_interval("***", "000")
    cx = order_complex(P, inside)
    assert len(inside) == 6
    assert sum(1 for s in cx if len(s) == 2) == 6
    h = reduced_homology(cx)
    assert h.is_sphere(1)
    # unreduced Betti (1, 1) from the oracle
    b = reduced_betti(cx)
    assert (b[0] + 1, b[1]) == (1, 1)


# -- validate_model -------------------------------------------------------


def test_square_face_poset_valid():
    assert validate_model(boolean_model(2)).ok
    assert validate_model(cube_face_model(2)).ok


def test_three_codim_one_under_codim_two_rejected():
    P = StratPoset({"m": 0, "a": 1, "b": 1, "c": 1, "t": 2},
                   [("m", "a"), ("m", "b"), ("m", "c"), ("a", "t"), ("b", "t"), ("c", "t")])
    rep = validate_model(P)
    assert not rep.ok
    links = [v for v in rep.data["violations"] if v.get("check") == "link"]
    assert links and links[0]["pair"] == ["'m'", "'t'"]


def test_four_cube_valid():
    P = cube_face_model(4)
    assert len(P) == 81
    assert validate_model(P).ok


@pytest.mark.parametrize("n", range(0, 5))
def test_simplex_and_cube_models(n):
    assert validate_model(simplex_face_model(n)).ok
    assert validate_model(cube_face_model(n)).ok
    assert validate_model(boolean_model(n)).ok


def test_polygons():
    for k in (2, 3, 5, 6):
        assert validate_model(polygon_model(k)).ok


def test_unique_minimum_required():
    assert not validate_model(StratPoset({"a": 0, "b": 0})).ok


def test_codim_gap_one_needs_empty_interval():
    P = StratPoset({"a": 0, "b": 1, "c": 1}, [("a", "b"), ("b", "c")])
    assert not validate_model(P).ok


def test_reflexive_and_cyclic_relations_rejected():
    with pytest.raises(ValueError):
        StratPoset({"a": 0}, [("a", "a")])
    with pytest.raises(ValueError):
        StratPoset({"a": 0, "b": 1}, [("a", "b"), ("b", "a")])


# -- partitioned models ---------------------------------------------------


def test_point_partitioned():
    P = point_model()
    assert validate_partitioned(P).ok
    assert classify_elements(P) == {"pt": "interior"}


def test_two_halves():
    M = two_halves_model()
    rep = validate_partitioned(M)
    assert rep.ok
    kinds = classify_elements(M)
    assert kinds["mid"] == "interior"
    assert kinds["e0"] == kinds["e1"] == "boundary"


def test_three_halves_rejected():
    P = StratPoset({"h0": 0, "h1": 0, "h2": 0, "mid": 1},
                   [("h0", "mid"), ("h1", "mid"), ("h2", "mid")])
    assert not validate_partitioned(P).ok


def test_declared_kinds_compared():
    M = PartitionedModel(two_halves_model(), {"mid": "boundary"})
    rep = validate_partitioned(M)
    assert not rep.ok
    assert any(v.get("check") == "classification" for v in rep.data["violations"])


def test_interval_has_boundary():
    assert validate_partitioned(interval_model()).ok
    assert not validate_partitioned(interval_model(), without_boundary=True).ok


# -- products -------------------------------------------------------------


def test_product_with_point():
    assert isomorphic(product_model(interval_model(), point_model()), interval_model())


def test_interval_squared_is_square():
    assert isomorphic(product_model(interval_model(), interval_model()), cube_face_model(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_product_of_valid_models_valid(seed):
    rng = random.Random(seed)
    a = rng.randint(0, 4)
    P, Q = random_model(rng, a), random_model(rng, 4 - a)
    assert validate_model(P).ok and validate_model(Q).ok
    R = product_model(P, Q)
    assert R.max_codim() <= 4
    assert validate_model(R).ok


def test_product_many_flat_labels():
    R = product_many([interval_model(), point_model(), interval_model()])
    assert ("top", "pt", "e0") in R


# -- codim-2 intervals ----------------------------------------------------


@pytest.mark.parametrize("P", [cube_face_model(3), simplex_face_model(3), boolean_model(3),
                               polygon_model(5), product_model(polygon_model(3), interval_model())],
                         ids=["cube3", "simplex3", "corner3", "pentagon", "prism"])
def test_codim_two_intervals_have_two_elements(P):
    sizes = codim2_interval_sizes(P)
    assert sizes and set(sizes.values()) == {2}


# -- refinements ----------------------------------------------------------


def test_identity_refinement():
    assert validate_refinement(identity_refinement(cube_face_model(2))).ok


def test_two_halves_refinement():
    rep = validate_refinement(two_halves_refinement())
    assert rep.ok, rep.messages


def test_collapse_with_codim_mismatch():
    P = point_model(1)
    Q = cube_face_model(2)
    rep = validate_refinement(Refinement(Q, P, {e: "pt" for e in Q.elements}))
    assert not rep.ok
    assert any(v.get("condition") == 1 for v in rep.data["violations"])


# -- mutations against the brute-force oracle -----------------------------


@pytest.mark.parametrize("seed", range(40))
def test_mutations_agree_with_brute_force(seed):
    rng = random.Random(seed)
    P = [cube_face_model(2), simplex_face_model(2), polygon_model(4), boolean_model(3),
         cube_face_model(3)][seed % 5]
    Q, _ = mutate_model(P, rng)
    assert validate_model(Q).ok == brute_model_valid(Q.codim, Q.covers())


def test_valid_models_agree_with_brute_force():
    for P in (cube_face_model(3), simplex_face_model(3), polygon_model(5)):
        assert brute_model_valid(P.codim, P.covers())


def test_json_round_trip():
    P = cube_face_model(2)
    assert StratPoset.from_json(P.to_json()) == P

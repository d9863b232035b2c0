from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfchain.coeff import QQ, ZZ, BaseField, GammaMonoid
from vfchain.floer import (
    MissingCountError,
    build_cf,
    cf_homology,
    check_d_squared,
    differential_matrix,
    moduli_stratum_data,
    stratum_count_table,
)
from vfchain.flowcat import FlowCategory, MorphismDescriptor
from vfchain.morse import find_matching, fixture, flow_category_from_morse, simplicial_homology
from vfchain.stratcx import build_stratum_complex, eval_counts
from vfchain.homalg import cc_validate

TRIV = GammaMonoid(())
D = MorphismDescriptor
F2 = BaseField.prime(2)


def nonzero(b):
    return {k: v for k, v in b.items() if v}


def test_no_vdim_zero_descriptors():
    X = FlowCategory(TRIV, {"a": 0, "b": 2}, {("a", "b", ()): D(1)})
    C = build_cf(X)
    assert not C.entries


def test_single_chain_matrix():
    X = FlowCategory(TRIV, {"a": 0, "b": 1}, {("a", "b", ()): D(0, 1)})
    m = differential_matrix(build_cf(X))
    assert [[x.terms.get((), 0) for x in row] for row in m] == [[0, 1], [0, 0]]
    assert cf_homology(build_cf(X)).total() == 0


def test_missing_count():
    X = FlowCategory(TRIV, {"a": 0, "b": 1}, {("a", "b", ()): D(0)})
    with pytest.raises(MissingCountError):
        build_cf(X)


def test_circle_differential_vanishes():
    K = fixture("s1")
    M = find_matching(K, 0)
    assert len(M.critical) == 2
    X = flow_category_from_morse(K, M)
    C = build_cf(X)
    assert all(x.is_zero() for x in C.entries.values())
    assert nonzero(cf_homology(C).betti) == {0: 1, 1: 1}


def test_d_squared_failure_located():
    X = FlowCategory(TRIV, {"a": 0, "b": 1, "c": 2},
                     {("a", "b", ()): D(0, 1), ("b", "c", ()): D(0, 1), ("a", "c", ()): D(1)})
    rep = check_d_squared(build_cf(X))
    assert not rep.ok
    v = rep.data["violations"][0]
    assert (v["source"], v["target"], v["residual"]) == ("a", "c", "1")
    assert rep.data["residual_terms"] == 1


def test_zero_differential_passes():
    X = FlowCategory(TRIV, {"a": 0, "b": 0, "c": 3})
    C = build_cf(X)
    assert check_d_squared(C).ok
    assert cf_homology(C).betti == {0: 2, 3: 1}


@pytest.mark.parametrize("field", [QQ, F2], ids=["q", "f2"])
@pytest.mark.parametrize("name", ["s1", "s2", "t2", "rp2", "klein"])
def test_oracle_equivalence(name, field):
    K = fixture(name)
    for seed in range(3):
        M = find_matching(K, seed, extra_critical=0.1 * seed)
        C = build_cf(flow_category_from_morse(K, M, field))
        assert check_d_squared(C).ok
        assert nonzero(cf_homology(C).betti) == nonzero(simplicial_homology(K, field).betti)


def test_torus_betti():
    K = fixture("t2")
    C = build_cf(flow_category_from_morse(K, find_matching(K, 4)))
    assert cf_homology(C).ranks([0, 1, 2]) == (1, 2, 1)
    assert simplicial_homology(K, ZZ).ranks([0, 1, 2]) == (1, 2, 1)


def test_novikov_grading_homology():
    K = fixture("klein")
    M = find_matching(K, 2, extra_critical=0.2)
    C = build_cf(flow_category_from_morse(K, M, QQ, grading="dim", cutoff=10))
    assert check_d_squared(C).ok
    H = cf_homology(C)
    assert nonzero(H.betti) == nonzero(simplicial_homology(K, QQ).betti)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, -1, 5]))
def test_rescaling_counts(seed, u):
    rng = random.Random(seed)
    K = fixture(rng.choice(["s2", "t2", "rp2"]))
    X = flow_category_from_morse(K, find_matching(K, seed, extra_critical=0.3))
    scaled = FlowCategory(X.monoid, X.objects,
                          {k: D(m.vdim, None if m.count is None else m.count * u, m.nonempty)
                           for k, m in X.morphisms.items()}, X.e_max, X.field)
    C, Cu = build_cf(X), build_cf(scaled)
    for st_, x in C.entries.items():
        assert Cu.entries[st_] == x.scale(u)
    assert check_d_squared(Cu).ok


def test_moduli_boundary_counts_vanish():
    """On one-dimensional moduli the boundary counts cancel."""
    K = fixture("t2")
    M = find_matching(K, 1, extra_critical=0.4)
    X = flow_category_from_morse(K, M)
    seen = 0
    for (p, q, g), m in X.morphisms.items():
        if m.vdim != 1:
            continue
        S = moduli_stratum_data(X, p, q, g)
        assert cc_validate(build_stratum_complex(S)).ok
        F = eval_counts(S, stratum_count_table(X, S))
        assert F.report.ok, F.report.messages
        seen += 1
    assert seen


@pytest.mark.parametrize("name", ["rp2", "klein", "t2", "s2"])
def test_integral_torsion_matches_oracle(name):
    K = fixture(name)
    C = build_cf(flow_category_from_morse(K, find_matching(K, 1, extra_critical=0.2), ZZ))
    H = cf_homology(C)
    oracle = simplicial_homology(K, ZZ)
    assert nonzero(H.betti) == nonzero(oracle.betti)
    # cohomological torsion sits one degree above homological torsion
    assert H.torsion == {k + 1: t for k, t in oracle.torsion.items()}


def test_integer_novikov_homology_refused():
    K = fixture("s2")
    C = build_cf(flow_category_from_morse(K, find_matching(K, 0), ZZ, grading="dim"))
    with pytest.raises(ValueError):
        cf_homology(C)

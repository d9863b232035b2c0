from __future__ import annotations

import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from vfchain.bimod import (
    BimoduleCube,
    CubeDataError,
    FlowMorphism,
    bimodule_map,
    certify_invariance,
    compose_bimodules,
    composite_map,
    cube_complex,
    cubes_equal,
    degenerate,
    derive_nonempty,
    face_inclusion,
    face_map,
    identity_continuation,
    koszul_of_permutation,
    permute,
    restrict,
    scale,
    verify_chain_map,
    zero_bimodule,
)
from vfchain.coeff import QQ, GammaMonoid
from vfchain.flowcat import FlowCategory, MorphismDescriptor
from vfchain.homalg import (
    cc_validate,
    compose,
    differential_map,
    homology,
    maps_agree_below,
)
from vfchain.morse import continuation_from_matchings, find_matching, fixture

TRIV = GammaMonoid(())
D = MorphismDescriptor


def two_point():
    return FlowCategory(TRIV, {"a": 0, "b": 1}, {("a", "b", ()): D(0, 1)})


def pair(name, s1, s2, grading="trivial", extra=0.3):
    K = fixture(name)
    return continuation_from_matchings(K, find_matching(K, s1, extra), find_matching(K, s2, extra),
                                       grading=grading)


def matrix(phi, rows, cols):
    return sympy.Matrix([[phi.entries[(r, c)].terms.get((), 0) if (r, c) in phi.entries else 0
                          for c in cols] for r in rows])


# -- the interval chains --------------------------------------------------


@pytest.mark.parametrize("n", range(4))
def test_cube_complex(n):
    C = cube_complex(n, QQ)
    assert len(C) == 3 ** n
    assert cc_validate(C).ok
    H = homology(C)
    assert {k: v for k, v in H.betti.items() if v} == {0: 1}
    if n:
        assert C.degree("*" * n) == -n


def test_koszul_signs():
    assert koszul_of_permutation([1, 1], [1, 0]) == -1
    assert koszul_of_permutation([1, 0], [1, 0]) == 1
    assert koszul_of_permutation([1, 1, 1], [1, 2, 0]) == 1


# -- induced maps ---------------------------------------------------------


def test_identity_continuation_is_identity():
    X = two_point()
    phi = bimodule_map(identity_continuation(X))
    assert matrix(phi, [("", "a"), ("", "b")], ["a", "b"]) == sympy.eye(2)
    assert verify_chain_map(identity_continuation(X)).ok


def test_zero_counts_zero_map():
    X = two_point()
    assert not bimodule_map(zero_bimodule(X, X)).entries
    B = BimoduleCube.from_counts(0, X, X, {"": {("a", "a", ()): 0}})
    assert not bimodule_map(B).entries


def test_circle_homotopy_cube():
    F = pair("s1", 0, 3)
    for H in (F.h1, F.h2):
        assert verify_chain_map(H).ok
        # phi_1 - phi_0 = d phi_* + phi_* d on CF of the source
        top = face_map(H, "*")
        d = differential_map(top.source)
        lhs = face_map(H, "1") - face_map(H, "0")
        rhs = compose(d, top) + compose(top, d)
        assert maps_agree_below(lhs, rhs, 10).ok


def test_face_map_degree():
    F = pair("t2", 1, 2)
    assert face_map(F.h1, "*").degree == -1
    assert face_map(F.f, "").degree == 0


def test_missing_input_count_rejected():
    X = two_point()
    with pytest.raises(CubeDataError):
        BimoduleCube.from_counts(0, X, X, {"": {("a", "b", ()): 1}})
    with pytest.raises(CubeDataError):
        BimoduleCube(1, X, X, {"2": {}})


# -- chain-map verification -----------------------------------------------


def test_degenerate_cube_is_chain_map():
    X = two_point()
    B = degenerate(identity_continuation(X), 0)
    assert B.n == 1 and verify_chain_map(B).ok
    assert cubes_equal(restrict(B, "0"), identity_continuation(X)).ok


@pytest.mark.parametrize("name", ["s1", "s2", "t2", "rp2", "klein"])
def test_fixture_cubes_are_chain_maps(name):
    for s in range(3):
        F = pair(name, s, s + 5)
        for M in (F.f, F.g, F.h1, F.h2):
            rep = verify_chain_map(M)
            assert rep.ok, rep.messages[:3]


def test_corrupted_count_located():
    F = pair("t2", 0, 1)
    counts = {face: dict(F.h1.counts(face)) for face in ("0", "1", "*")}
    assert counts["*"]
    key = sorted(counts["*"], key=repr)[0]
    counts["*"][key] += 1
    bad = BimoduleCube.from_counts(1, F.X1, F.X1, {f: {(ps[0], qq, m): c for (ps, qq, m), c in t.items()}
                                                   for f, t in counts.items()})
    rep = verify_chain_map(bad)
    assert not rep.ok
    assert all(v["face"] in ("*", "0", "1") for v in rep.data["violations"])
    cert = certify_invariance(F.f, F.g, bad, F.h2, 10)
    assert not cert.ok and any("H1" in m for m in cert.report.messages)


# -- composition ----------------------------------------------------------


def test_identity_composition():
    F = pair("t2", 0, 2)
    left = compose_bimodules(identity_continuation(F.X1), F.f)
    right = compose_bimodules(F.f, identity_continuation(F.X2))
    assert cubes_equal(left, F.f).ok and cubes_equal(right, F.f).ok


def test_zero_composition():
    F = pair("s2", 0, 1)
    Z = compose_bimodules(zero_bimodule(F.X1, F.X1), F.f)
    assert not Z.entries


@pytest.mark.parametrize("name", ["s1", "s2", "t2", "rp2", "klein"])
def test_composition_is_matrix_product(name):
    F = pair(name, 1, 4)
    gf = compose_bimodules(F.f, F.g)
    c1, c2 = list(F.X1.objects), list(F.X2.objects)
    A = matrix(bimodule_map(F.f), [("", p) for p in c1], c2)
    B = matrix(bimodule_map(F.g), [("", p) for p in c2], c1)
    assert matrix(bimodule_map(gf), [("", p) for p in c1], c1) == A * B
    assert maps_agree_below(bimodule_map(gf, 10), composite_map(F.f, F.g, 0, 10), 10).ok


@pytest.mark.parametrize("name", ["s1", "t2", "klein"])
def test_composition_of_one_cubes(name):
    F = pair(name, 2, 3)
    for inner, outer in ((F.h1, F.f), (F.f, F.h2), (F.h1, compose_bimodules(F.f, F.g))):
        comp = compose_bimodules(inner, outer)
        assert verify_chain_map(comp, 10).ok
        assert maps_agree_below(bimodule_map(comp, 10), composite_map(inner, outer, 0, 10), 10).ok


def test_mismatched_middle():
    F = pair("t2", 0, 1)
    with pytest.raises(CubeDataError):
        compose_bimodules(F.f, F.f)


def test_flow_morphism_associative():
    F = pair("s2", 0, 2)
    a = FlowMorphism((F.h1,)).then(FlowMorphism((F.f,))).then(FlowMorphism((F.h2,)))
    b = FlowMorphism((F.h1,)).then(FlowMorphism((F.f,)).then(FlowMorphism((F.h2,))))
    assert a.coordinate_sets() == b.coordinate_sets() == [(0,), (), (1,)]
    assert cubes_equal(a.evaluate(), b.evaluate()).ok
    assert verify_chain_map(a.evaluate()).ok


# -- restriction, permutation ---------------------------------------------


def test_restriction_commutes_with_map():
    F = pair("t2", 1, 3)
    H = compose_bimodules(F.h1, degenerate(F.h1, 0))
    assert H.n == 3
    for face in ("0**", "*1*", "**0", "01*"):
        R = restrict(H, face)
        inc = face_inclusion(H.n, face, H.field)
        big = bimodule_map(H)
        small = bimodule_map(R)
        for lab in small.source.labels:
            rho, p = lab
            full = next(t for (s, t) in inc.entries if s == rho)
            assert small.apply({lab: H.field(1)}) == big.apply({(full, p): H.field(1)})


def test_permute_twice_is_identity():
    F = pair("s1", 0, 1)
    H = compose_bimodules(F.h1, degenerate(F.h1, 0))
    P = permute(permute(H, [2, 0, 1]), [1, 2, 0])
    assert cubes_equal(P, H).ok
    assert verify_chain_map(permute(H, [1, 0, 2])).ok


def test_scaling_keeps_chain_map():
    F = pair("t2", 0, 1)
    assert verify_chain_map(scale(F.h1, 3)).ok


def test_derive_nonempty_is_idempotent():
    F = pair("t2", 0, 1, grading="dim")
    M = derive_nonempty(F.f)
    assert cubes_equal(derive_nonempty(M), M).ok
    assert sum(len(t) for t in M.entries.values()) >= sum(len(t) for t in F.f.entries.values())


# -- invariance -----------------------------------------------------------


def test_identity_invariance():
    X = two_point()
    I = identity_continuation(X)
    H = degenerate(I, 0)
    cert = certify_invariance(I, I, H, H, 10)
    assert cert.ok, cert.report.messages


@pytest.mark.parametrize("name", ["t2", "klein"])
def test_torus_invariance(name):
    F = pair(name, 0, 7)
    cert = certify_invariance(F.f, F.g, F.h1, F.h2, 10)
    assert cert.ok, cert.report.messages[:3]
    assert cert.betti[0] == cert.betti[1]


def test_dim_graded_invariance():
    F = pair("rp2", 2, 9, grading="dim")
    cert = certify_invariance(F.f, F.g, F.h1, F.h2, 10)
    assert cert.ok, cert.report.messages[:3]


def test_endpoint_mismatch():
    F = pair("s2", 0, 1)
    # a 0-cube where a homotopy 1-cube belongs
    wrong = certify_invariance(F.f, F.g, F.f, F.h2, 10)
    assert not wrong.ok
    # swapped homotopies: face '0' no longer matches the composite
    H = degenerate(identity_continuation(F.X1), 0)
    swapped = certify_invariance(F.f, F.g, H, F.h2, 10)
    assert not swapped.ok
    assert any("H1 face 0" in m for m in swapped.report.messages)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_maps_have_nonnegative_valuation(seed):
    rng = random.Random(seed)
    F = pair(rng.choice(["s2", "t2"]), rng.randint(0, 99), rng.randint(0, 99), grading="dim")
    for M in (F.f, F.g):
        if M.is_monotone():
            for x in bimodule_map(M, 10).entries.values():
                assert all(F.X1.monoid.action(mu) >= 0 for mu in x.support())

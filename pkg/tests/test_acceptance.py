"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

from __future__ import annotations

import itertools
import random
import time

import sympy

from oracles import brute_model_valid
from vfchain.bimod import (
    bimodule_map,
    certify_invariance,
    compose_bimodules,
    composite_map,
    face_map,
    identity_continuation,
)
from vfchain.coeff import QQ, ZZ, BaseField
from vfchain.cubical import (
    RepresentableCube,
    check_eilenberg_zilber,
    circle,
    interval,
    point,
    symmetric_square,
)
from vfchain.floer import build_cf, cf_homology, check_d_squared
from vfchain.flowcat import broken_strata
from vfchain.homalg import (
    ChainMap,
    all_cycles_basis,
    cc_validate,
    certify_homotopy_equivalence,
    check_chain_map,
    compose,
    cone,
    differential_map,
    direct_sum,
    homology,
    identity_map,
    lift_through_quasi_iso,
    maps_agree_below,
    random_complex,
    split_action_zero,
    verify_equivalence,
)
from vfchain.morse import (
    continuation_from_matchings,
    find_matching,
    fixture,
    flow_category_from_morse,
    random_complex as random_simplicial,
    simplicial_homology,
)
from vfchain.stratcx import StratumData, build_stratum_complex, stratum_tensor_compare, with_solved_signs
from vfchain.stratmodel import (
    BASIC_MODELS,
    boolean_model,
    codim2_interval_sizes,
    cube_face_model,
    interval_model,
    mutate_model,
    point_model,
    polygon_model,
    product_model,
    random_model,
    simplex_face_model,
    validate_model,
)

F2 = BaseField.prime(2)
FIXTURES = ["s1", "s2", "t2", "rp2", "klein"]
CUTOFF = 10


def nonzero(b):
    return {k: v for k, v in b.items() if v}


def test_01_d_squared_random_morse(criterion):
    with criterion(1, "d^2 = 0 on random Morse instances") as note:
        rng = random.Random(20240601)
        worst, cells = 0.0, 0
        for i in range(200):
            K = random_simplicial(rng, max_cells=200, max_vertices=10)
            assert len(K.cells) <= 200
            field = (QQ, F2)[i % 2]
            grading = ("trivial", "dim")[(i // 2) % 2]
            t0 = time.perf_counter()
            M = find_matching(K, rng.randrange(10**6), extra_critical=rng.choice([0, 0.1, 0.3]))
            X = flow_category_from_morse(K, M, field, grading=grading)
            rep = check_d_squared(build_cf(X))
            elapsed = time.perf_counter() - t0
            assert rep.ok and not rep.data.get("residuals"), rep.messages[:3]
            assert elapsed < 10, f"instance {i} took {elapsed:.1f}s"
            worst = max(worst, elapsed)
            cells = max(cells, len(K.cells))
        note.update(instances=200, max_cells=cells, worst_s=f"{worst:.2f}")


def test_02_oracle_equivalence(criterion):
    with criterion(2, "Floer homology equals simplicial homology") as note:
        t0 = time.perf_counter()
        checks = 0
        for name in FIXTURES:
            K = fixture(name)
            for seed in range(3):
                M = find_matching(K, seed, extra_critical=0.15 * seed)
                for field in (QQ, F2):
                    C = build_cf(flow_category_from_morse(K, M, field))
                    assert check_d_squared(C).ok
                    assert nonzero(cf_homology(C).betti) == nonzero(simplicial_homology(K, field).betti)
                    checks += 1
                # over Z: cohomological torsion in degree k+1 is homological torsion in degree k
                H = cf_homology(build_cf(flow_category_from_morse(K, M, ZZ)))
                oracle = simplicial_homology(K, ZZ)
                assert nonzero(H.betti) == nonzero(oracle.betti), name
                assert H.torsion == {k + 1: t for k, t in oracle.torsion.items()}, name
                checks += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 60
        note.update(checks=checks, seconds=f"{elapsed:.1f}")


def test_03_stratum_monoidality(criterion):
    with criterion(3, "stratum complex is monoidal") as note:
        rng = random.Random(7)
        for _ in range(50):
            a = rng.randint(0, 4)
            P, Q = random_model(rng, a), random_model(rng, 4 - a)
            assert P.max_codim() + Q.max_codim() <= 4
            rep = stratum_tensor_compare(with_solved_signs(P, P.max_codim()),
                                         with_solved_signs(Q, Q.max_codim()))
            assert rep.ok, rep.messages[:3]
        note.update(pairs=50)


def _fixture_models():
    models = {"point": point_model(), "interval": interval_model()}
    for n in range(5):
        models[f"cube{n}"] = cube_face_model(n)
        models[f"simplex{n}"] = simplex_face_model(n)
        models[f"corner{n}"] = boolean_model(n)
    for k in range(2, 7):
        models[f"polygon{k}"] = polygon_model(k)
    for name, (make, _) in BASIC_MODELS.items():
        models[f"basic_{name}"] = make()
    for (n1, m1), (n2, m2) in itertools.combinations_with_replacement(sorted(BASIC_MODELS.items()), 2):
        if m1[1] + m2[1] <= 4:
            models[f"{n1}x{n2}"] = product_model(m1[0](), m2[0]())
    for name in FIXTURES:
        K = fixture(name)
        X = flow_category_from_morse(K, find_matching(K, 1, extra_critical=0.3))
        for (p, q, g) in X.morphisms:
            models[f"{name}:{p}->{q}"] = broken_strata(X, p, q, g)
    return models


def test_04_two_factorizations(criterion):
    with criterion(4, "codim-2 intervals have exactly two elements") as note:
        intervals = 0
        models = _fixture_models()
        for name, P in models.items():
            assert validate_model(P).ok, name
            sizes = codim2_interval_sizes(P)
            assert set(sizes.values()) <= {2}, name
            intervals += len(sizes)
            C = build_stratum_complex(with_solved_signs(P, P.max_codim()))
            assert cc_validate(C).ok, name
        note.update(models=len(models), intervals=intervals)


def test_05_sphere_link_validation(criterion):
    with criterion(5, "sphere-link validation") as note:
        t0 = time.perf_counter()
        for n in range(5):
            assert validate_model(cube_face_model(n)).ok
            assert validate_model(simplex_face_model(n)).ok
        rng = random.Random(5)
        bases = [cube_face_model(n) for n in (2, 3, 4)] + [simplex_face_model(n) for n in (2, 3, 4)]
        rejected, accepted = 0, 0
        for i in range(100):
            Q, _ = mutate_model(bases[i % len(bases)], rng)
            if validate_model(Q).ok:
                assert brute_model_valid(Q.codim, Q.covers())
                accepted += 1
            else:
                rejected += 1
        elapsed = time.perf_counter() - t0
        assert rejected >= 99 and elapsed < 60
        note.update(rejected=rejected, accepted_verified=accepted, seconds=f"{elapsed:.1f}")


def test_06_eilenberg_zilber(criterion):
    with criterion(6, "Eilenberg-Zilber identities") as note:
        sets = [point(), interval(), RepresentableCube(2), RepresentableCube(3), circle(),
                symmetric_square()]
        triples = 0
        for field in (QQ, F2):
            for A, B, C in itertools.product(sets, repeat=3):
                ez = check_eilenberg_zilber(A, B, C, field, max_dim=3)
                assert ez.leibniz.ok, ez.leibniz.messages[:3]
                assert ez.associativity.ok, ez.associativity.messages[:3]
                assert ez.commutativity.ok, ez.commutativity.messages[:3]
                triples += 1
        note.update(triples=triples)


def _continuation_fixtures():
    for name in FIXTURES:
        K = fixture(name)
        for grading in ("trivial", "dim"):
            for s1, s2 in ((0, 1), (2, 5)):
                M1 = find_matching(K, s1, extra_critical=0.2)
                M2 = find_matching(K, s2, extra_critical=0.2)
                yield name, continuation_from_matchings(K, M1, M2, grading=grading)


def test_07_functoriality(criterion):
    with criterion(7, "composition is functorial") as note:
        pairs = 0
        for _, F in _continuation_fixtures():
            gf = compose_bimodules(F.f, F.g)
            fg = compose_bimodules(F.g, F.f)
            for inner, outer in ((F.f, F.g), (F.g, F.f), (F.h1, F.f), (F.f, F.h2), (F.g, F.h1),
                                 (F.h2, F.g), (F.h1, gf), (F.h2, fg), (gf, F.f)):
                comp = compose_bimodules(inner, outer)
                rep = maps_agree_below(bimodule_map(comp, CUTOFF),
                                       composite_map(inner, outer, 0, CUTOFF), CUTOFF)
                assert rep.ok, rep.messages[:3]
                pairs += 1
        note.update(composable_pairs=pairs, cutoff=CUTOFF)


def test_08_invariance(criterion):
    with criterion(8, "certified invariance") as note:
        rng = random.Random(8)
        certified = 0
        for name in FIXTURES:
            K = fixture(name)
            oracle = nonzero(simplicial_homology(K, QQ).betti)
            for _ in range(20):
                M1 = find_matching(K, rng.randrange(10**6), rng.choice([0, 0.2, 0.4]))
                M2 = find_matching(K, rng.randrange(10**6), rng.choice([0, 0.2, 0.4]))
                grading = rng.choice(["trivial", "dim"])
                F = continuation_from_matchings(K, M1, M2, grading=grading)
                cert = certify_invariance(F.f, F.g, F.h1, F.h2, CUTOFF)
                assert cert.ok, (name, cert.report.messages[:3])
                assert cert.betti[0] == cert.betti[1] == oracle
                certified += 1
        note.update(certified=certified, per_fixture=20)


def test_09_normalization(criterion):
    with criterion(9, "identity continuation normalizes") as note:
        checked = 0
        for name in FIXTURES:
            K = fixture(name)
            for grading in ("trivial", "dim"):
                X = flow_category_from_morse(K, find_matching(K, 3, extra_critical=0.2), grading=grading)
                u = face_map(identity_continuation(X), "", CUTOFF)
                C = u.source
                u0, _ = split_action_zero(u)
                assert {k: v for k, v in u0.items() if v} == {(a, a): 1 for a in C.labels}
                eq = certify_homotopy_equivalence(u, CUTOFF)
                assert verify_equivalence(eq).ok
                assert maps_agree_below(compose(eq.g, u), identity_map(C), CUTOFF).ok
                checked += 1
                if grading == "dim":
                    # a unipotent perturbation by positive action is still invertible
                    rng = random.Random(checked)
                    T = C.ring.monomial((1,))
                    k = ChainMap(C, C, {(a, b): T * rng.randint(-2, 2) for a in C.labels
                                        for b in C.in_degree(C.degree(a) - 1)}, -1)
                    d = differential_map(C)
                    v = u + compose(d, k) + compose(k, d)
                    assert check_chain_map(v).ok
                    eq = certify_homotopy_equivalence(v, CUTOFF)
                    assert verify_equivalence(eq).ok
                    checked += 1
        note.update(cases=checked, cutoff=CUTOFF)


def _smith_ranks(C):
    """Ranks and invariant factors of each differential block via sympy."""
    out = {}
    for k in C.degrees():
        m, cols, rows = C.block(k)
        if not cols or not rows:
            continue
        M = sympy.Matrix([[int(x) for x in r] for r in m])
        snf = sympy.matrices.normalforms.smith_normal_form(M, domain=sympy.ZZ)
        diag = [abs(snf[i, i]) for i in range(min(snf.shape)) if snf[i, i]]
        out[k] = diag
    return out


def test_10_koszul_acyclicity(criterion):
    with criterion(10, "Koszul acyclicity") as note:
        for n in range(1, 5):
            C = build_stratum_complex(with_solved_signs(boolean_model(n), n), ZZ)
            H = homology(C)
            assert H.total() == 0 and not H.torsion
            snf = _smith_ranks(C)
            assert all(x == 1 for diag in snf.values() for x in diag)
            ranks = {k: len(v) for k, v in snf.items()}
            for k in C.degrees():
                assert len(C.in_degree(k)) == ranks.get(k, 0) + ranks.get(k - 1, 0)
        for n in range(5):
            H = homology(build_stratum_complex(StratumData(point_model(), n), ZZ))
            assert H.betti == {-n: 1} and not H.torsion
        note.update(max_n=4)


def _split_quasi_iso(rng):
    """F (+) cone(id_A) -> F, projection plus a null-homotopic correction."""
    F = random_complex(rng, QQ, {k: rng.randint(1, 4) for k in range(3)})
    A = random_complex(rng, QQ, {k: rng.randint(0, 3) for k in range(3)})
    Z = cone(identity_map(A))
    G = direct_sum(F, Z)
    K = {((1, z), l): rng.randint(-2, 2) for z in Z.labels
         for l in F.in_degree(Z.degree(z) - 1) if rng.random() < 0.4}
    Km = ChainMap(G, F, K, -1)
    corr = compose(differential_map(F), Km) + compose(Km, differential_map(G))
    pi = ChainMap(G, F, {((0, l), l): 1 for l in F.labels}) + corr
    return G, F, pi


def test_11_lift_through_quasi_iso(criterion):
    with criterion(11, "lifting through quasi-isomorphisms") as note:
        rng = random.Random(11)
        lifts = 0
        for _ in range(100):
            G, F, pi = _split_quasi_iso(rng)
            assert len(G) <= 30 and check_chain_map(pi).ok
            for k in F.degrees():
                basis = all_cycles_basis(F, k)
                if not basis:
                    continue
                c = {}
                for z in basis:
                    coeff = rng.randint(-3, 3)
                    for l, x in z.items():
                        c[l] = c.get(l, 0) + coeff * x
                c = {l: x for l, x in c.items() if x}
                g, h = lift_through_quasi_iso(pi, c)
                assert G.d(g) == {}
                lhs = pi.apply(g)
                for l, x in c.items():
                    lhs[l] = lhs.get(l, 0) - x
                dh = F.d(h)
                assert {l: x for l, x in lhs.items() if x} == {l: x for l, x in dh.items() if x}
                lifts += 1
        note.update(quasi_isos=100, lifts=lifts)

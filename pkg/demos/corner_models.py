"""Stratified corner models and their stratum complexes."""

from __future__ import annotations

import random

from vfchain.coeff import ZZ
from vfchain.homalg import homology
from vfchain.stratcx import build_stratum_complex, stratum_tensor_compare, with_solved_signs
from vfchain.stratmodel import (
    boolean_model,
    codim2_interval_sizes,
    cube_face_model,
    mutate_model,
    polygon_model,
    validate_model,
)
# The face poset of the square: one open 2-cell, four edges, four corners.
Q = cube_face_model(2)
print("square model valid:", validate_model(Q).ok)
print("codim-2 intervals:", sorted(set(codim2_interval_sizes(Q).values())), "elements each")

# Signs on codimension-one covers are solved so that every diamond anticommutes.
for n in range(1, 5):
    C = build_stratum_complex(with_solved_signs(boolean_model(n), n), ZZ)
    H = homology(C)
    print(f"corner model n={n}: {len(C)} generators, total homology {H.total()}")

# Closed cubes look like a point.
C = build_stratum_complex(with_solved_signs(cube_face_model(3), 3), ZZ)
print("closed 3-cube:", {k: v for k, v in homology(C).betti.items() if v})

# Products of models go to tensor products of complexes.
S, T = with_solved_signs(polygon_model(5), 2), with_solved_signs(boolean_model(2), 2)
print("pentagon x corner monoidal:", stratum_tensor_compare(S, T).ok)

# Breaking one relation almost always breaks a link.
rng = random.Random(0)
bad, how = mutate_model(cube_face_model(3), rng)
rep = validate_model(bad)
print("mutation", how[0], "->", "valid" if rep.ok else rep.messages[0])

"""Two Morse functions, one homotopy type.

Continuation bimodules between the flow categories of two matchings give
chain maps both ways; homotopy 1-cubes show they are inverse up to an
identity-shaped unit, which is then inverted to a fixed energy.
"""

from __future__ import annotations

from vfchain.bimod import bimodule_map, certify_invariance, compose_bimodules, composite_map
from vfchain.homalg import maps_agree_below
from vfchain.morse import continuation_from_matchings, find_matching, fixture

E = 10
K = fixture("klein")
M1, M2 = find_matching(K, 0), find_matching(K, 5, extra_critical=0.3)
F = continuation_from_matchings(K, M1, M2, grading="dim")
print("critical cells:", len(M1.critical), "and", len(M2.critical))

# Composing bimodules and then taking the chain map agrees with composing maps.
gf = compose_bimodules(F.f, F.g)
print("functorial:", maps_agree_below(bimodule_map(gf, E), composite_map(F.f, F.g, 0, E), E).ok)

cert = certify_invariance(F.f, F.g, F.h1, F.h2, E)
print("certified:", cert.ok)
print("Betti numbers:", cert.betti[0], cert.betti[1])

"""Cup products as a two-input multimodule."""

from __future__ import annotations

from vfchain.bimod import verify_chain_map
from vfchain.coeff import BaseField
from vfchain.morse import cup_product_multimodule, find_matching, fixture
from vfchain.trees import validate_multicategory

F2 = BaseField.prime(2)
K = fixture("t2")
cube, (X1, X2, X3) = cup_product_multimodule(K, *(find_matching(K, s) for s in range(3)), field=F2)
print("inputs:", len(X1.objects), "and", len(X2.objects), "critical cells; output", len(X3.objects))
print("chain map:", verify_chain_map(cube).ok)
print("multicategory axioms:", validate_multicategory([cube]).ok)
print("nonzero structure constants:", len(cube.counts("")))

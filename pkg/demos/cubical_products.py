"""Symmetric cubical sets, the Day tensor and the shuffle map."""

from __future__ import annotations

from vfchain.coeff import QQ, BaseField
from vfchain.cubical import (
    check_eilenberg_zilber,
    circle,
    cub_chains,
    cub_tensor,
    cub_validate,
    interval,
    shuffle_product,
    symmetric_square,
)
from vfchain.homalg import homology


def betti(C):
    return {k: v for k, v in homology(C).betti.items() if v}


S1 = circle()
T = cub_tensor(S1, S1)
print("circle (x) circle valid:", cub_validate(T, max_dim=2).ok)
print("its homology:", betti(cub_chains(T)))

# Over F2 the fixed square of the symmetric square survives the quotient.
for name, field in (("Q", QQ), ("F2", BaseField.prime(2))):
    C = cub_chains(symmetric_square(), field)
    print(f"symmetric square over {name}: {len(C)} classes, homology {betti(C)}")

I = interval()
top = ("*", (0,))
print("shuffle of two interval tops:", shuffle_product({top: 1}, {top: 1}, cub_tensor(I, I)))

ez = check_eilenberg_zilber(I, S1, I, QQ)
print("Leibniz / associativity / commutativity:", ez.leibniz.ok, ez.associativity.ok,
      ez.commutativity.ok)

"""
Orders a grammar can build
==========================

Separable permutations are exactly the orders a combinatory grammar
without intercalation can derive from a chain of heads.
"""

import itertools

from seqcat import baxter
from seqcat.categories import BACK, FWD
from seqcat.rules import CROSSED, INTERCALATE, RuleDescriptor, preset
from seqcat.terms import show

print("separable orders by length:", [baxter.count_separable(n) for n in range(1, 8)])

for p in [(3, 1, 2, 4), (2, 4, 1, 3), (3, 1, 4, 2)]:
    try:
        tree = baxter.separation_tree(p)
    except baxter.NotSeparable:
        tree = "not separable"
    print(baxter.format_permutation(p), tree)

# encode every order of four values and try to derive the head
invariant = preset("invariant")
agree = sum(bool(baxter.derives_root(p, invariant)) == baxter.is_separable(p)
            for p in itertools.permutations(range(1, 5)))
print()
print(f"derivable iff separable on {agree} of 24 orders")

# with crossed intercalation the grammar also builds 24135, which
# contains a forbidden pattern
p = (2, 4, 1, 3, 5)
print()
for v, (cat, lf) in zip(p, baxter.encode_permutation(p, "split")):
    print(f"  {v}: {cat} : {show(lf)}")
crossed = invariant.with_rules(RuleDescriptor(INTERCALATE, "back", CROSSED, BACK))
print("  without intercalation:", bool(baxter.derives_root(p, invariant, "split")))
print("  with crossed intercalation:", bool(baxter.derives_root(p, crossed, "split")))
print("  separable:", baxter.is_separable(p))

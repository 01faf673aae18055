"""
Plans as derivations: picking up a block
========================================

A sentence is derived like any other category string; the resulting
state reading is then run against a blocks world.
"""

from seqcat import cli
from seqcat.categories import is_atomic
from seqcat.deriver import derive, load_lexicon_file, render
from seqcat.rules import preset
from seqcat.strips import PlanError, execute, parse_world

lexicon = load_lexicon_file(cli.data_path("blocks.lex"))
world = parse_world(cli.data_path("blocks.world").read_text())
print("world before:")
print(world)

# John picks up the top block: the derivation threads the agent and the
# block into the operator's pre, add and delete lists
(d,) = [d for d in derive("John B2 pick-up".split(), lexicon, preset("planning"))
        if is_atomic(d.item.category)]
print()
print(render(d))

after = execute(d.item, world)
print()
print("world after:")
print(after)

# the lower block is not clear, so the same action on it fails and the
# world is left as it was
(d,) = [d for d in derive("John B1 pick-up".split(), lexicon, preset("planning"))
        if is_atomic(d.item.category)]
try:
    execute(d.item, world)
except PlanError as exc:
    print()
    print("John B1 pick-up:", exc)

"""
Processes: flights, dancers, trees and beliefs
==============================================

Every run is deterministic in its seed. Exhaustive exploration returns a
tree of states up to a depth bound.
"""

from collections import Counter
from dataclasses import dataclass, replace

from seqcat import cli
from seqcat.picalc import (RecordingWorld, check_async, classify_stance, explore,
                           load_process_file, maximal_traces, run_random, show_process)
from seqcat.terms import binder_prefix, show, spine


def load(name):
    return load_process_file(cli.data_path(name))


# the flight: the ticket provider learns a, the boarder learns x from a,
# and x's scope widens to take the boarder in
flight = load("flight.pi")
print(show_process(flight))
(trace,) = maximal_traces(explore(flight, depth=5))
for label, node in trace:
    print("  =>", label)
    print("    ", show_process(node.process))

# dancing and scurrying make the same moves in different shapes
for name in ("dance.pi", "scurry.pi"):
    moves = Counter()
    tr = run_random(load(name), seed=0, world=RecordingWorld())
    moves.update(spine(binder_prefix(t)[1])[0].name for t in tr.final_world.log)
    print()
    print(name, dict(moves), f"{len(tr.steps)} steps")


# felling a tree: the world decides when the tree falls
@dataclass(frozen=True)
class ChopWorld:
    falls_after: int
    chops: int = 0
    stored: int = 0

    def holds(self, test):
        return spine(test)[0].name == "up" and self.chops < self.falls_after

    def enact(self, term, conds):
        head = spine(term)[0].name
        if head == "chop":
            return replace(self, chops=self.chops + 1)
        if head == "store":
            return replace(self, stored=self.stored + 1)
        return self

    def key(self):
        return (self.chops, self.stored)


for name in ("treefell.pi", "treefell-staged.pi"):
    tr = run_random(load(name), seed=0, max_steps=100, world=ChopWorld(4),
                    until=lambda p, w: w.stored > 0)
    print()
    print(name)
    for label in tr.labels():
        print("  ", label)

# beliefs about beliefs: only the subject can answer, and which answer it
# gives here is left to the scheduler seed
answers = Counter()
for seed in range(10):
    tr = run_random(load("sally-ann-b.pi"), seed=seed, world=RecordingWorld())
    answers.update(show(t) for t in tr.final_world.log if spine(t)[0].name == "answer")
print()
print("answers over ten seeds:", dict(answers))

print()
for name in ("async.pi", "sync.pi"):
    print(name, "asynchronous:", check_async(load(name)))
for name in ("stance-a.pi", "stance-b.pi", "stance-c.pi", "stance-d.pi"):
    print(name, classify_stance(load(name)))

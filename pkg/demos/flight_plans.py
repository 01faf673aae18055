"""
Composing plans: buying a ticket and taking a flight
=====================================================

Three ways of putting the same two actions together, plus a subject that
is lifted over a whole plan.
"""

from seqcat import cli
from seqcat.deriver import derive, load_lexicon_file, render
from seqcat.rules import preset


def show(lexname, sentence, rule):
    """Print one derivation per reading, preferring one that uses ``rule``."""
    lexicon = load_lexicon_file(cli.data_path(lexname))
    print(f"== {sentence}  ({lexname})")
    readings = {}
    for d in derive(sentence.split(), lexicon, preset("planning"), all_derivations=True):
        uses = any(n.rule == rule for n in d.nodes())
        best = readings.get(d.item.key())
        if best is None or (uses and not best[0]):
            readings[d.item.key()] = (uses, d)
    for _, d in readings.values():
        print(render(d))
        print()


# composition: the ticket buyer is still open, so the result wants a T
show("flight-compose.lex", "John fly buy ticket", ">B")

# substitution: one argument feeds both actions, so John buys and flies
show("flight-substitute.lex", "John fly buy ticket", "<Sx")

# intercalation: Harry's purchase slots into John's flight
show("flight-intercalate.lex", "John fly Harry buy ticket", "<L")

# subcomposition: the plane and the flyer are fixed and the plan is
# abstracted over whatever action comes next
show("flight-compose.lex", "plane John fly", ">D")

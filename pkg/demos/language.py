"""
The same machinery in language mode
===================================

Language mode switches off type raising and the predicate-abstracting
rules. Offline constants (``name.0``) mark terminal processes.
"""

from seqcat import cli
from seqcat.deriver import derive, load_lexicon_file
from seqcat.rules import preset
from seqcat.terms import show

SENTENCES = [
    ("english.lex", "Mary persuaded John to study"),
    ("english.lex", "Mary promised John to study"),
    ("english.lex", "Mary expected John to study"),
    ("english.lex", "Mary wanted John to study"),
    ("parasitic.lex", "filed without reading"),
    ("intercalation.lex", "Mary to buy"),
    ("intercalation.lex", "persuaded Mary to buy"),
    ("intercalation.lex", "folded the-rug over"),
    ("turkish.lex", "Adam-in ben-i ev-i etkiledi"),
    ("mandarin.lex", "Zhangsan sheng qi"),
]

for lexname, sentence in SENTENCES:
    lexicon = load_lexicon_file(cli.data_path(lexname))
    print(sentence)
    for d in derive(sentence.split(), lexicon, preset("language")):
        print(f"    {d.item.category} : {show(d.item.lf)}")

# the four control verbs share one surface derivation and differ only in
# who does the studying and who is affected

"""Hand-annotated QA-SRL records for golden tests.

Each question is (text, slots, tense, judgments); a judgment is a list of
(start, end) spans or None for "invalid". Slots use "_" for empty.
"""
from __future__ import annotations

from lsoie.qasrl import AnswerJudgment, QuestionLabel, SentenceRecord, Span, VerbEntry

WHO_PRESENT = ("who", "_", "_", "presentSingular3rd", "something", "_", "_")


def question(text, slots, tense, judgments, sources=("turk-qasrl2.0-0",)):
    js = []
    for i, spans in enumerate(judgments):
        if spans is None:
            js.append(AnswerJudgment(f"turk-{i}", False))
        else:
            js.append(AnswerJudgment(f"turk-{i}", True, frozenset(Span(s, e) for s, e in spans)))
    return QuestionLabel(text, tuple("" if s == "_" else s for s in slots), tense, tuple(js), tuple(sources))


def record(sid, text, verbs):
    tokens = tuple(text.split())
    entries = tuple(VerbEntry(idx, tuple(q if isinstance(q, QuestionLabel) else question(*q) for q in qs))
                    for idx, qs in sorted(verbs.items()))
    return SentenceRecord(sid, tokens, entries)


def unanimous(*spans):
    return [list(spans)] * 3


def provide_questions(where, who, what):
    return [
        ("Where does someone provide something?", ("where", "does", "someone", "stem", "something", "_", "_"),
         "present", where),
        ("Who provides something?", WHO_PRESENT, "present", who),
        ("What is being provided?", ("what", "is", "_", "being pastParticiple", "_", "_", "_"), "present", what),
    ]


def elected_questions(who, what, when):
    return [
        ("Who was elected?", ("who", "was", "_", "pastParticiple", "_", "_", "_"), "past", who),
        ("What was someone elected?", ("what", "was", "someone", "pastParticiple", "_", "_", "_"), "past", what),
        ("When was someone elected?", ("when", "was", "someone", "pastParticiple", "_", "_", "_"), "past", when),
    ]


PHYSICIANS = record(
    "Wiki1k:wikipedia:physicians:0:0", "In Asian countries , physicians provide drugs .",
    {5: provide_questions(
        where=[[(0, 3)], [(0, 3)], [(1, 3)]],
        who=unanimous((4, 5)),
        what=unanimous((6, 7)),
    )},
)

BATS = record(
    "TQA:bats:0:0", "Bats are the only mammals that can truly fly .",
    {8: [
        ("What can fly?", ("what", "can", "_", "stem", "_", "_", "_"), "modal", unanimous((0, 1))),
        ("How can something fly?", ("how", "can", "something", "stem", "_", "_", "_"), "modal",
         [[(7, 8)], [(7, 8)], None]),
    ]},
)

GREECE = record(
    "Wikinews:greece:0:0", "Greece moved up three to be ranked tenth .",
    {
        1: [
            ("What moved up?", ("what", "_", "_", "past", "_", "up", "_"), "past", unanimous((0, 1))),
            ("How much did something move up?", ("how much", "did", "something", "stem", "_", "up", "_"), "past",
             unanimous((3, 4))),
        ],
        6: [
            ("What was ranked something?", ("what", "was", "_", "pastParticiple", "something", "_", "_"), "past",
             unanimous((0, 1))),
            ("What was something ranked?", ("what", "was", "something", "pastParticiple", "_", "_", "_"), "past",
             unanimous((7, 8))),
        ],
    },
)

MAO = record(
    "Wiki1k:wikipedia:mao:0:0", "A popular student , in 1915 Mao was elected secretary of the Students Society .",
    {8: elected_questions(
        who=[[(6, 7)], [(6, 7)], [(0, 3), (6, 7)]],
        what=[[(9, 14)], [(9, 14)], [(9, 10)]],
        when=unanimous((4, 6)),
    )},
)

AMENDMENT = record(
    "Wikinews:amendment:0:0", "The proposed amendment already passed both houses in 2011 .",
    {4: [
        ("What passed something?", ("what", "_", "_", "past", "something", "_", "_"), "past",
         [[(0, 3)], [(1, 3)], [(0, 3)]]),
        ("What did something pass?", ("what", "did", "something", "stem", "_", "_", "_"), "past",
         unanimous((5, 7))),
        ("When did something pass something?", ("when", "did", "something", "stem", "something", "_", "_"), "past",
         unanimous((7, 9))),
    ]},
)

POLYGYNOUS = record(
    "TQA:polygynous:0:0", "In polygynous species , males try to monopolize and mate with multiple females .",
    {7: [
        ("Who monopolizes something?", WHO_PRESENT, "present", unanimous((4, 5))),
        ("What does someone monopolize?", ("what", "does", "someone", "stem", "_", "_", "_"), "present",
         [[(11, 13)], [(12, 13)], [(11, 13)]]),
        ("Where does someone monopolize something?", ("where", "does", "someone", "stem", "something", "_", "_"),
         "present", [[(0, 3)], [(0, 3)], None]),
    ]},
)

ANIMALS = record(
    "TQA:xerocoles:0:0", "Animals adapted to live in the desert are called xerocoles .",
    {
        1: [
            ("What adapted to do something?", ("what", "_", "_", "past", "_", "to", "do something"), "past",
             unanimous((0, 1))),
            ("What did something adapt to do?", ("what", "did", "something", "stem", "_", "to", "do"), "past",
             [[(2, 7)], [(2, 4)], [(2, 7)]]),
        ],
        8: [
            ("What is called something?", ("what", "is", "_", "pastParticiple", "something", "_", "_"), "present",
             unanimous((0, 7))),
            ("What is something called?", ("what", "is", "something", "pastParticiple", "_", "_", "_"), "present",
             unanimous((9, 10))),
        ],
    },
)

# supporting sentences: the typical argument order for the question forms above
SUPPORT = [
    record("Wiki1k:wikipedia:clinics:0:0", "Local clinics provide vaccines in rural areas .",
           {2: provide_questions(unanimous((4, 7)), unanimous((0, 2)), unanimous((3, 4)))}),
    record("Wiki1k:wikipedia:charities:0:0", "Charities provide food in refugee camps .",
           {1: provide_questions(unanimous((3, 6)), unanimous((0, 1)), unanimous((2, 3)))}),
    record("Wikinews:obama:0:0", "Obama was elected president in 2008 .",
           {2: elected_questions(unanimous((0, 1)), unanimous((3, 4)), unanimous((4, 6)))}),
    record("Wikinews:merkel:0:0", "Merkel was elected chancellor in 2005 .",
           {2: elected_questions(unanimous((0, 1)), unanimous((3, 4)), unanimous((4, 6)))}),
]

EXAMPLES = [
    (BATS, ("Bats", "fly", [])),
    (GREECE, ("Greece", "ranked", ["tenth"])),
    (MAO, ("Mao", "elected", ["secretary of the Students Society", "in 1915"])),
    (AMENDMENT, ("The proposed amendment", "passed", ["both houses", "in 2011"])),
    (POLYGYNOUS, ("males", "monopolize", ["multiple females"])),
    (ANIMALS, ("Animals", "adapted", ["to live in the desert"])),
]

CORPUS = [PHYSICIANS] + [r for r, _ in EXAMPLES] + SUPPORT

# hand parse of the physicians sentence (CoNLL-U, 1-based heads)
PHYSICIANS_CONLLU = """# sent_id = Wiki1k:wikipedia:physicians:0:0
# text = In Asian countries , physicians provide drugs .
1\tIn\tin\tADP\tIN\t_\t3\tcase\t_\t_
2\tAsian\tAsian\tADJ\tJJ\t_\t3\tamod\t_\t_
3\tcountries\tcountry\tNOUN\tNNS\t_\t6\tobl\t_\t_
4\t,\t,\tPUNCT\t,\t_\t6\tpunct\t_\t_
5\tphysicians\tphysician\tNOUN\tNNS\t_\t6\tnsubj\t_\t_
6\tprovide\tprovide\tVERB\tVBP\t_\t0\troot\t_\t_
7\tdrugs\tdrug\tNOUN\tNNS\t_\t6\tobj\t_\t_
8\t.\t.\tPUNCT\t.\t_\t6\tpunct\t_\t_

"""


def tuple_text(record, extraction):
    """(a0, p, a1, ...) as strings."""
    args = [record.span_text(a) for a in extraction.arguments if a is not None]
    return (args[0], extraction.predicate_text, *args[1:])

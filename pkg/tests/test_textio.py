import random
import string
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dialogplan import (
    Advisory,
    DialogSpec,
    Objective,
    Query,
    Slot,
    SourceError,
    compile_dialog,
    detect_kind,
    parse_dialog_spec,
    parse_problem,
    serialize_dialog_spec,
    serialize_problem,
    water_spec,
)
from dialogplan.model import Problem, State, VariableDef

from conftest import random_instances, two_op_problem

TWO_OP_TEXT = """\
problem two_op
var x { 0 1 }
init x=0
horizon 3
objective netbenefit
op a { pre: x=0 ; eff: x=1 ; cost: 1 ; utility: 3 }
op b { pre: x=1 ; eff: x=0 ; cost: 1 ; utility: 1 }
"""


# ---------------------------------------------------------------------------
# Round trips.
# ---------------------------------------------------------------------------

def test_two_op_round_trip_is_byte_exact():
    pr = parse_problem(TWO_OP_TEXT)
    assert serialize_problem(pr) == TWO_OP_TEXT
    assert pr == two_op_problem()


def test_problem_round_trip_all_objectives():
    for objective in (
        Objective.net_benefit(),
        Objective.discounted("9/10"),
        Objective.min_cost(None),
        Objective.min_cost(two_op_problem().operators[0].eff),
    ):
        pr = two_op_problem(objective)
        assert parse_problem(serialize_problem(pr)) == pr


def test_zero_variable_problem_round_trips():
    pr = Problem("empty", (), (), State.of({}), 2, Objective.net_benefit())
    text = serialize_problem(pr)
    assert "init" not in text
    assert parse_problem(text) == pr


def test_generated_instances_round_trip():
    for pr in random_instances(80, rng_seed=11):
        assert parse_problem(serialize_problem(pr)) == pr


def test_dialog_round_trip():
    for ds in (water_spec(), water_spec(discount=Fraction(9, 10)), water_spec(max_turns=7)):
        assert parse_dialog_spec(serialize_dialog_spec(ds)) == ds


def test_dialog_round_trip_escapes_quotes_and_backslashes():
    ds = DialogSpec(
        "escapes",
        slots=(Slot("s", 'say "hi" \\ twice', ("y", "n"), "y"),),
        queries=(Query("q", ("s",), 1, 0),),
        advisories=(Advisory("a", ("q",), 'done: "{s}" \\ ok', 0, 2),),
        max_turns=3,
    )
    assert parse_dialog_spec(serialize_dialog_spec(ds)) == ds


_texty = st.text(
    alphabet=string.ascii_letters + string.digits + ' .,!?"\\{}_-',
    min_size=1,
    max_size=24,
).filter(lambda t: t.strip() and "{" not in t and "}" not in t)


@settings(max_examples=60, deadline=None)
@given(
    prompts=st.lists(_texty, min_size=1, max_size=3),
    answers=st.lists(
        st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True),
        min_size=2, max_size=4, unique=True,
    ),
    turns=st.integers(1, 9),
)
def test_dialog_round_trip_property(prompts, answers, turns):
    slots = tuple(
        Slot(f"s{i}", p, tuple(answers), answers[0], i)
        for i, p in enumerate(prompts)
    )
    queries = (Query("q0", tuple(s.name for s in slots), 1, 2),)
    advisories = (Advisory("a0", ("q0",), "value {" + slots[0].name + "} noted", 0, 3),)
    ds = DialogSpec("prop", slots, queries, advisories, max_turns=turns)
    assert parse_dialog_spec(serialize_dialog_spec(ds)) == ds


def test_serializer_refuses_unwritable_values():
    pr = Problem(
        "bad", (VariableDef("x", ("a b", "c")),), (),
        State.of({"x": "c"}), 1, Objective.net_benefit(),
    )
    with pytest.raises(Exception):
        serialize_problem(pr)


# ---------------------------------------------------------------------------
# Positioned rejections.
# ---------------------------------------------------------------------------

REJECTS = [
    # (text, line, column, kind)
    ("problem p\nvar x { 0 1 }\ninit x=0\nhorizon 0\nobjective netbenefit\n",
     4, 9, "semantic"),
    ("problem p\nvar x { 0 1 }\nvar x { 0 1 }\ninit x=0\nhorizon 1\nobjective netbenefit\n",
     3, 5, "semantic"),
    ("problem p\nvar x { }\ninit x=0\nhorizon 1\nobjective netbenefit\n",
     2, 5, "semantic"),
    ("problem p\nvar x { 0 0 }\ninit x=0\nhorizon 1\nobjective netbenefit\n",
     2, 11, "semantic"),
    ("problem p\nvar x { 0 1 }\ninit y=0\nhorizon 1\nobjective netbenefit\n",
     3, 6, "semantic"),
    ("problem p\nvar x { 0 1 }\ninit x=7\nhorizon 1\nobjective netbenefit\n",
     3, 8, "semantic"),
    ("problem p\nvar x { 0 1 }\ninit x=0 x=1\nhorizon 1\nobjective netbenefit\n",
     3, 10, "semantic"),
    # init missing a variable
    ("problem p\nvar x { 0 1 }\nvar y { 0 1 }\ninit x=0\nhorizon 1\nobjective netbenefit\n",
     3, 5, "semantic"),
    ("var x { 0 1 }\ninit x=0\nhorizon 1\nobjective netbenefit\n",
     1, 1, "semantic"),  # no problem header
    ("problem p\nvar x { 0 1 }\ninit x=0\nobjective netbenefit\n",
     1, 1, "semantic"),  # no horizon
    ("problem p\nvar x { 0 1 }\ninit x=0\nhorizon 1\n",
     1, 1, "semantic"),  # no objective
    ("problem p\nhorizon 1\nobjective discounted 0\n",
     3, 22, "semantic"),
    ("problem p\nhorizon 1\nobjective discounted 3/2\n",
     3, 22, "semantic"),
    ("problem p\nhorizon 1\nobjective discounted 1/0\n",
     3, 24, "syntax"),  # zero denominator, flagged at the denominator token
    ("problem p\nvar x { 0 1 }\ninit x=0\nhorizon 1\nobjective netbenefit\n"
     "op a { eff: x=1 ; pre: x=0 ; cost: 1 ; utility: 0 }\n",
     6, 8, "syntax"),  # sections out of order
    ("problem p\nvar x { 0 1 }\ninit x=0\nhorizon 1\nobjective netbenefit\n"
     "op a { pre: x=0 ; eff: x=1 ; cost: 1 ; utility: 0 }\n"
     "op a { pre: x=0 ; eff: x=1 ; cost: 1 ; utility: 0 }\n",
     7, 4, "semantic"),
    ("problem p\nfrobnicate 3\n", 2, 1, "syntax"),
    ("problem p\nhorizon 1 1\n", 2, 11, "syntax"),
    ("problem p\nhorizon 12x\n", 2, 9, "lex"),
    ("problem p\nhorizon @\n", 2, 9, "lex"),
    # dialog grammar
    ("dialog d\nturns 0\n", 2, 7, "semantic"),
    ("dialog d\nturns 1\ndiscount 2\n", 3, 10, "semantic"),
    ('dialog d\nturns 1\nslot s { prompt: "p ; answers: a b ; default: a ; ask_cost: 0 }\n',
     3, 18, "lex"),  # unterminated string
    ('dialog d\nturns 1\nslot s { prompt: "p\\q" ; answers: a b ; default: a ; ask_cost: 0 }\n',
     3, 20, "lex"),  # bad escape
    ('dialog d\nturns 1\nslot s { prompt: "p" ; answers: a unknown ; default: a ; ask_cost: 0 }\n',
     3, 35, "semantic"),
    ('dialog d\nturns 1\nslot s { prompt: "p" ; answers: a a ; default: a ; ask_cost: 0 }\n',
     3, 35, "semantic"),
    ('dialog d\nturns 1\nslot s { prompt: "p" ; answers: a b ; default: c ; ask_cost: 0 }\n',
     3, 48, "semantic"),
    ('dialog d\nturns 1\nquery q { requires: s ; cost: 0 ; utility: 0 }\n',
     3, 21, "semantic"),  # unknown slot
    ('dialog d\nturns 1\nslot s { prompt: "p" ; answers: a b ; default: a ; ask_cost: 0 }\n'
     'advisory v { requires: q ; message: "m" ; cost: 0 ; utility: 0 }\n',
     4, 24, "semantic"),  # unknown query
    ('dialog d\nturns 1\nslot s { prompt: "p" ; answers: a b ; default: a ; ask_cost: 0 }\n'
     'advisory v { requires: - ; message: "hi {oops}" ; cost: 0 ; utility: 0 }\n',
     4, 37, "semantic"),  # unresolved placeholder
]


@pytest.mark.parametrize("text,line,column,kind", REJECTS)
def test_rejections_carry_exact_positions(text, line, column, kind):
    with pytest.raises(SourceError) as e:
        if detect_kind(text) == "dialog":
            parse_dialog_spec(text)
        else:
            parse_problem(text)
    err = e.value
    assert (err.line, err.column, err.kind) == (line, column, kind), str(err)
    assert str(err).startswith(f"{line}:{column}: {kind} error:")


def test_comments_and_blank_lines_are_ignored():
    text = (
        "# header comment\n\nproblem p   # trailing\n\nvar x { 0 1 }\n"
        "init x=0\nhorizon 2\nobjective netbenefit\n"
    )
    pr = parse_problem(text)
    assert pr.name == "p" and pr.k == 2


def test_crlf_input_accepted():
    pr = parse_problem(TWO_OP_TEXT.replace("\n", "\r\n"))
    assert pr == two_op_problem()


def test_detect_kind():
    assert detect_kind(TWO_OP_TEXT) == "problem"
    assert detect_kind("# c\n\ndialog d\n") == "dialog"
    assert detect_kind("nonsense here\n") is None
    assert detect_kind("") is None


# ---------------------------------------------------------------------------
# Fuzz: the parsers must either succeed or raise one positioned SourceError.
# ---------------------------------------------------------------------------

def _fuzz_inputs(n: int, seed: int = 99):
    rng = random.Random(seed)
    bases = [TWO_OP_TEXT, serialize_dialog_spec(water_spec(discount=Fraction(9, 10)))]
    alphabet = string.printable
    for i in range(n):
        if i % 3 == 0:
            yield "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 200)))
        else:
            text = list(rng.choice(bases))
            for _ in range(rng.randint(1, 6)):
                kind = rng.randrange(3)
                pos = rng.randrange(max(1, len(text)))
                if kind == 0 and text:
                    del text[pos]
                elif kind == 1:
                    text.insert(pos, rng.choice(alphabet))
                elif text:
                    text[pos] = rng.choice(alphabet)
            yield "".join(text)


def _parse_any(text: str) -> None:
    if detect_kind(text) == "dialog":
        parse_dialog_spec(text)
    else:
        parse_problem(text)


def fuzz_parsers(n: int, seed: int = 99) -> int:
    """Run n fuzz inputs; return how many were rejected. Any exception other
    than a positioned SourceError fails the calling test."""
    rejected = 0
    for text in _fuzz_inputs(n, seed):
        try:
            _parse_any(text)
        except SourceError as err:
            rejected += 1
            assert err.line >= 1 and err.column >= 1
            assert err.kind in ("lex", "syntax", "semantic")
        # anything else propagates and fails the test
    return rejected


def test_fuzz_ten_thousand_inputs_no_crashes():
    rejected = fuzz_parsers(10_000)
    assert rejected > 5000  # sanity: the corpus is mostly invalid


def test_round_trip_fixed_point():
    # serializing a parsed canonical text is the identity
    for pr in random_instances(20, rng_seed=5):
        text = serialize_problem(pr)
        assert serialize_problem(parse_problem(text)) == text
    ds_text = serialize_dialog_spec(water_spec())
    assert serialize_dialog_spec(parse_dialog_spec(ds_text)) == ds_text


def test_compile_parsed_dialog_matches_compiled_original():
    ds = water_spec(discount=Fraction(9, 10))
    again = parse_dialog_spec(serialize_dialog_spec(ds))
    assert compile_dialog(again) == compile_dialog(ds)

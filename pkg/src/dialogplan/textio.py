"""Text formats for problems (`.plan.txt`) and dialog specs (`.dlg.txt`).

Both formats are line-oriented with `#` comments, UTF-8, LF or CRLF in, LF
out. Every declaration fits on one line and braces close on the line that
opened them, which keeps positions obvious and files diffable.

Problem grammar:

    problem <name>
    var <name> { <value> ... }
    init <var>=<value> ...
    horizon <k>
    objective netbenefit | discounted <gamma> | mincost [goal <var>=<value> ...]
    op <name> { pre: <var>=<value>, ... ; eff: ... ; cost: <rat> ; utility: <rat> }

Dialog grammar:

    dialog <name>
    turns <n>
    discount <gamma>
    slot <name> { prompt: "..." ; answers: <a> ... ; default: <a> ; ask_cost: <rat> }
    query <name> { requires: <slot> ... ; cost: <rat> ; utility: <rat> }
    advisory <name> { requires: <query> ... | - ; message: "..." ; cost: <rat> ; utility: <rat> }

Identifiers are `[A-Za-z_][A-Za-z0-9_-]*`; domain values may also be bare
integers. Rationals are `<int>` or `<int>/<int>` with a positive denominator
and no sign, so negative costs are unwritable. Strings are double-quoted
with exactly two escapes, `\\"` and `\\\\`; they cannot contain newlines.
Empty pre/eff (and an advisory's empty requires) are written `-`.

Rejection is total and precise: any bad input raises exactly one
SourceError carrying a 1-based line and column and a kind of lex, syntax,
or semantic. Parsers never return partial results.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dialog import (
    UNKNOWN,
    Advisory,
    DialogSpec,
    NAME_RE,
    Query,
    Slot,
)
from .model import (
    Objective,
    ObjectiveKind,
    Operator,
    PartialState,
    PlanningError,
    Problem,
    State,
    ValidationError,
    VariableDef,
    format_rational,
)

__all__ = [
    "SourceError",
    "parse_problem",
    "serialize_problem",
    "parse_dialog_spec",
    "serialize_dialog_spec",
    "detect_kind",
    "PROBLEM_SUFFIX",
    "DIALOG_SUFFIX",
]

PROBLEM_SUFFIX = ".plan.txt"
DIALOG_SUFFIX = ".dlg.txt"

_INT_RE = re.compile(r"[0-9]+\Z")


class SourceError(PlanningError):
    """A rejected input: position (1-based), message, and error kind."""

    def __init__(self, line: int, column: int, message: str, kind: str):
        assert kind in ("lex", "syntax", "semantic")
        super().__init__(f"{line}:{column}: {kind} error: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.kind = kind


# ---------------------------------------------------------------------------
# Tokenizer.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | int | string | punct
    text: str  # for strings: the decoded value
    line: int
    col: int


_PUNCT = set("{}=;:,/-")
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789-")
_DIGITS = set("0123456789")


def _tokenize(text: str) -> list[list[_Tok]]:
    """Token rows, one per input line. Comment-only and blank rows are empty."""
    rows: list[list[_Tok]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw.endswith("\r"):
            raw = raw[:-1]
        row: list[_Tok] = []
        i = 0
        n = len(raw)
        while i < n:
            ch = raw[i]
            col = i + 1
            if ch in (" ", "\t"):
                i += 1
                continue
            if ch == "#":
                break
            if ch == '"':
                value = []
                j = i + 1
                while True:
                    if j >= n:
                        raise SourceError(lineno, col, "unterminated string", "lex")
                    c = raw[j]
                    if c == '"':
                        j += 1
                        break
                    if c == "\\":
                        if j + 1 >= n or raw[j + 1] not in ('"', "\\"):
                            raise SourceError(
                                lineno, j + 1,
                                "unknown escape (only \\\" and \\\\ exist)", "lex",
                            )
                        value.append(raw[j + 1])
                        j += 2
                    elif ord(c) < 0x20:
                        raise SourceError(
                            lineno, j + 1, "control character in string", "lex"
                        )
                    else:
                        value.append(c)
                        j += 1
                row.append(_Tok("string", "".join(value), lineno, col))
                i = j
                continue
            if ch in _DIGITS:
                j = i
                while j < n and raw[j] in _DIGITS:
                    j += 1
                if j < n and raw[j] in _IDENT_START:
                    raise SourceError(lineno, col, f"malformed number '{raw[i:j + 1]}'", "lex")
                row.append(_Tok("int", raw[i:j], lineno, col))
                i = j
                continue
            if ch in _IDENT_START:
                j = i + 1
                while j < n and raw[j] in _IDENT_CONT:
                    j += 1
                row.append(_Tok("ident", raw[i:j], lineno, col))
                i = j
                continue
            if ch in _PUNCT:
                row.append(_Tok("punct", ch, lineno, col))
                i += 1
                continue
            raise SourceError(lineno, col, f"unexpected character {ch!r}", "lex")
        rows.append(row)
    return rows


class _Cursor:
    """One line's tokens with expect/accept helpers and precise positions."""

    def __init__(self, row: list[_Tok], lineno: int, line_len: int):
        self.row = row
        self.i = 0
        self.lineno = lineno
        self.eol_col = line_len + 1

    def peek(self) -> Optional[_Tok]:
        return self.row[self.i] if self.i < len(self.row) else None

    def pos(self) -> tuple[int, int]:
        t = self.peek()
        if t is None:
            return self.lineno, self.eol_col
        return t.line, t.col

    def fail(self, message: str, kind: str = "syntax"):
        line, col = self.pos()
        raise SourceError(line, col, message, kind)

    def take(self, what: str) -> _Tok:
        t = self.peek()
        if t is None:
            self.fail(f"expected {what} before end of line")
        self.i += 1
        return t

    def ident(self, what: str = "an identifier") -> _Tok:
        t = self.take(what)
        if t.kind != "ident":
            raise SourceError(t.line, t.col, f"expected {what}", "syntax")
        return t

    def keyword(self, word: str) -> _Tok:
        t = self.take(f"'{word}'")
        if t.kind != "ident" or t.text != word:
            raise SourceError(t.line, t.col, f"expected '{word}'", "syntax")
        return t

    def punct(self, ch: str) -> _Tok:
        t = self.take(f"'{ch}'")
        if t.kind != "punct" or t.text != ch:
            raise SourceError(t.line, t.col, f"expected '{ch}'", "syntax")
        return t

    def accept_punct(self, ch: str) -> bool:
        t = self.peek()
        if t is not None and t.kind == "punct" and t.text == ch:
            self.i += 1
            return True
        return False

    def value(self, what: str = "a value") -> _Tok:
        t = self.take(what)
        if t.kind not in ("ident", "int"):
            raise SourceError(t.line, t.col, f"expected {what}", "syntax")
        return t

    def int_tok(self, what: str = "an integer") -> _Tok:
        t = self.take(what)
        if t.kind != "int":
            raise SourceError(t.line, t.col, f"expected {what}", "syntax")
        return t

    def string(self, what: str = "a quoted string") -> _Tok:
        t = self.take(what)
        if t.kind != "string":
            raise SourceError(t.line, t.col, f"expected {what}", "syntax")
        return t

    def rational(self, what: str = "a rational") -> tuple[Fraction, _Tok]:
        t = self.int_tok(what)
        num = int(t.text)
        if self.accept_punct("/"):
            d = self.int_tok("a denominator")
            den = int(d.text)
            if den == 0:
                raise SourceError(d.line, d.col, "denominator must be positive", "syntax")
            return Fraction(num, den), t
        return Fraction(num), t

    def end(self):
        t = self.peek()
        if t is not None:
            raise SourceError(t.line, t.col, f"unexpected trailing '{t.text}'", "syntax")


def _cursors(text: str):
    rows = _tokenize(text)
    lines = text.split("\n")
    for lineno, row in enumerate(rows, start=1):
        if row:
            yield _Cursor(row, lineno, len(lines[lineno - 1]))


def _semantic(tok: _Tok, message: str) -> SourceError:
    return SourceError(tok.line, tok.col, message, "semantic")


# ---------------------------------------------------------------------------
# Problem format.
# ---------------------------------------------------------------------------

def _parse_assignments(cur: _Cursor) -> list[tuple[_Tok, _Tok]]:
    """`-` for none, else comma-separated <var>=<value> pairs."""
    if cur.accept_punct("-"):
        return []
    pairs = []
    while True:
        var = cur.ident("a variable name")
        cur.punct("=")
        val = cur.value()
        pairs.append((var, val))
        if not cur.accept_punct(","):
            return pairs


def parse_problem(text: str) -> Problem:
    """Parse and fully validate a problem file.

    Raises SourceError with a 1-based position on any flaw: lex for bad
    characters, syntax for malformed declarations, semantic for violated
    model rules (duplicate names, unknown variables, out-of-domain values,
    a missing or non-positive horizon, gamma outside (0, 1]).
    """
    name_tok: Optional[_Tok] = None
    var_decls: list[tuple[_Tok, list[_Tok]]] = []
    init_pairs: list[tuple[_Tok, _Tok]] = []
    saw_init = False
    horizon: Optional[tuple[int, _Tok]] = None
    objective: Optional[tuple] = None  # ("netbenefit",) | ("discounted", Fraction, tok) | ("mincost", pairs)

    ops: list[dict] = []

    for cur in _cursors(text):
        head = cur.ident("a declaration keyword")
        if head.text == "problem":
            tok = cur.ident("a problem name")
            cur.end()
            if name_tok is not None:
                raise _semantic(tok, "duplicate problem declaration")
            name_tok = tok
        elif head.text == "var":
            vname = cur.ident("a variable name")
            cur.punct("{")
            values = []
            while not cur.accept_punct("}"):
                values.append(cur.value("a domain value or '}'"))
            cur.end()
            var_decls.append((vname, values))
        elif head.text == "init":
            saw_init = True
            while cur.peek() is not None:
                var = cur.ident("a variable name")
                cur.punct("=")
                val = cur.value()
                init_pairs.append((var, val))
        elif head.text == "horizon":
            tok = cur.int_tok("a horizon")
            cur.end()
            if horizon is not None:
                raise _semantic(tok, "duplicate horizon declaration")
            if int(tok.text) < 1:
                raise _semantic(tok, "horizon must be positive")
            horizon = (int(tok.text), tok)
        elif head.text == "objective":
            kind = cur.ident("an objective kind")
            if objective is not None:
                raise _semantic(kind, "duplicate objective declaration")
            if kind.text == "netbenefit":
                cur.end()
                objective = ("netbenefit",)
            elif kind.text == "discounted":
                gamma, gtok = cur.rational("a discount factor")
                cur.end()
                if not (0 < gamma <= 1):
                    raise _semantic(gtok, "discount factor must lie in (0, 1]")
                objective = ("discounted", gamma)
            elif kind.text == "mincost":
                goal_pairs: list[tuple[_Tok, _Tok]] = []
                if cur.peek() is not None:
                    cur.keyword("goal")
                    while cur.peek() is not None:
                        var = cur.ident("a variable name")
                        cur.punct("=")
                        val = cur.value()
                        goal_pairs.append((var, val))
                    if not goal_pairs:
                        cur.fail("expected at least one goal binding")
                objective = ("mincost", goal_pairs)
            else:
                raise SourceError(
                    kind.line, kind.col,
                    "expected netbenefit, discounted, or mincost", "syntax",
                )
        elif head.text == "op":
            oname = cur.ident("an operator name")
            cur.punct("{")
            cur.keyword("pre")
            cur.punct(":")
            pre = _parse_assignments(cur)
            cur.punct(";")
            cur.keyword("eff")
            cur.punct(":")
            eff = _parse_assignments(cur)
            cur.punct(";")
            cur.keyword("cost")
            cur.punct(":")
            cost, _ = cur.rational("a cost")
            cur.punct(";")
            cur.keyword("utility")
            cur.punct(":")
            utility, _ = cur.rational("a utility")
            cur.punct("}")
            cur.end()
            ops.append({"name": oname, "pre": pre, "eff": eff, "cost": cost, "utility": utility})
        else:
            raise SourceError(
                head.line, head.col,
                f"unknown declaration '{head.text}' (expected problem, var,"
                " init, horizon, objective, or op)",
                "syntax",
            )

    if name_tok is None:
        raise SourceError(1, 1, "missing problem declaration", "semantic")
    if horizon is None:
        raise SourceError(1, 1, "missing horizon declaration", "semantic")
    if objective is None:
        raise SourceError(1, 1, "missing objective declaration", "semantic")
    if not saw_init and var_decls:
        raise SourceError(1, 1, "missing init declaration", "semantic")

    domains: dict[str, list[str]] = {}
    for vname, values in var_decls:
        if vname.text in domains:
            raise _semantic(vname, f"duplicate variable '{vname.text}'")
        if not values:
            raise _semantic(vname, f"variable '{vname.text}' has an empty domain")
        seen: set[str] = set()
        for v in values:
            if v.text in seen:
                raise _semantic(v, f"duplicate domain value '{v.text}'")
            seen.add(v.text)
        domains[vname.text] = [v.text for v in values]

    def checked_pairs(pairs: list[tuple[_Tok, _Tok]], what: str) -> dict[str, str]:
        out: dict[str, str] = {}
        for var, val in pairs:
            if var.text not in domains:
                raise _semantic(var, f"{what} references undeclared variable '{var.text}'")
            if val.text not in domains[var.text]:
                raise _semantic(
                    val,
                    f"value '{val.text}' is outside the domain of '{var.text}'",
                )
            if var.text in out:
                raise _semantic(var, f"{what} binds '{var.text}' twice")
            out[var.text] = val.text
        return out

    init = checked_pairs(init_pairs, "init")
    for vname, _ in var_decls:
        if vname.text not in init:
            raise _semantic(vname, f"init does not bind variable '{vname.text}'")

    operators = []
    op_names: set[str] = set()
    for o in ops:
        tok = o["name"]
        if tok.text in op_names:
            raise _semantic(tok, f"duplicate operator '{tok.text}'")
        op_names.add(tok.text)
        pre = checked_pairs(o["pre"], f"operator '{tok.text}' pre")
        eff = checked_pairs(o["eff"], f"operator '{tok.text}' eff")
        operators.append(
            Operator(tok.text, PartialState.of(pre), PartialState.of(eff), o["cost"], o["utility"])
        )

    if objective[0] == "netbenefit":
        obj = Objective.net_benefit()
    elif objective[0] == "discounted":
        obj = Objective.discounted(objective[1])
    else:
        goal = checked_pairs(objective[1], "goal")
        obj = Objective.min_cost(PartialState.of(goal) if goal else None)

    try:
        return Problem(
            name=name_tok.text,
            variables=tuple(VariableDef(n, tuple(vals)) for n, vals in domains.items()),
            operators=tuple(operators),
            s0=State.of(init),
            k=horizon[0],
            objective=obj,
        )
    except ValidationError as exc:
        raise SourceError(1, 1, str(exc), "semantic") from exc


def _serializable_value(value: str) -> str:
    if NAME_RE.match(value) or _INT_RE.match(value):
        return value
    raise ValidationError(f"value {value!r} is not writable in the text format")


def _serializable_name(name: str, what: str) -> str:
    if NAME_RE.match(name):
        return name
    raise ValidationError(f"{what} {name!r} is not writable in the text format")


def _assignments(p: PartialState) -> str:
    if not p.bindings:
        return "-"
    return ", ".join(
        f"{_serializable_name(var, 'variable')}={_serializable_value(val)}"
        for var, val in p.bindings
    )


def serialize_problem(pr: Problem) -> str:
    """Canonical text: problem, vars, init, horizon, objective, then ops in
    name order. Parsing the output reproduces the problem exactly."""
    lines = [f"problem {_serializable_name(pr.name, 'problem name')}"]
    for v in pr.variables:
        values = " ".join(_serializable_value(x) for x in v.domain)
        lines.append(f"var {_serializable_name(v.name, 'variable')} {{ {values} }}")
    if pr.variables:
        init = " ".join(
            f"{v.name}={_serializable_value(pr.s0.value(v.name))}" for v in pr.variables
        )
        lines.append(f"init {init}")
    lines.append(f"horizon {pr.k}")
    obj = pr.objective
    if obj.kind is ObjectiveKind.NET_BENEFIT:
        lines.append("objective netbenefit")
    elif obj.kind is ObjectiveKind.DISCOUNTED:
        lines.append(f"objective discounted {format_rational(obj.gamma)}")
    elif obj.goal is None:
        lines.append("objective mincost")
    else:
        goal = " ".join(
            f"{var}={_serializable_value(val)}" for var, val in obj.goal.bindings
        )
        lines.append(f"objective mincost goal {goal}")
    for op in pr.operators:
        lines.append(
            f"op {_serializable_name(op.name, 'operator')} {{"
            f" pre: {_assignments(op.pre)} ;"
            f" eff: {_assignments(op.eff)} ;"
            f" cost: {format_rational(op.cost)} ;"
            f" utility: {format_rational(op.utility)} }}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Dialog-spec format.
# ---------------------------------------------------------------------------

def parse_dialog_spec(text: str) -> DialogSpec:
    """Parse and fully validate a dialog-spec file.

    Same error discipline as parse_problem; semantic errors name the
    offending identifier (unknown slots in a query, unknown queries in an
    advisory, duplicate names, reserved or repeated answers, a default
    outside the answers, non-positive turns, discount outside (0, 1]).
    """
    name_tok: Optional[_Tok] = None
    turns: Optional[tuple[int, _Tok]] = None
    discount: Optional[tuple[Fraction, _Tok]] = None
    slots: list[tuple[_Tok, Slot]] = []
    queries: list[tuple[_Tok, list[_Tok], Fraction, Fraction]] = []
    advisories: list[tuple[_Tok, list[_Tok], _Tok, Fraction, Fraction]] = []

    for cur in _cursors(text):
        head = cur.ident("a declaration keyword")
        if head.text == "dialog":
            tok = cur.ident("a dialog name")
            cur.end()
            if name_tok is not None:
                raise _semantic(tok, "duplicate dialog declaration")
            name_tok = tok
        elif head.text == "turns":
            tok = cur.int_tok("a turn count")
            cur.end()
            if turns is not None:
                raise _semantic(tok, "duplicate turns declaration")
            if int(tok.text) < 1:
                raise _semantic(tok, "turns must be positive")
            turns = (int(tok.text), tok)
        elif head.text == "discount":
            value, tok = cur.rational("a discount factor")
            cur.end()
            if discount is not None:
                raise _semantic(tok, "duplicate discount declaration")
            if not (0 < value <= 1):
                raise _semantic(tok, "discount factor must lie in (0, 1]")
            discount = (value, tok)
        elif head.text == "slot":
            sname = cur.ident("a slot name")
            cur.punct("{")
            cur.keyword("prompt")
            cur.punct(":")
            prompt = cur.string("a prompt string")
            cur.punct(";")
            cur.keyword("answers")
            cur.punct(":")
            answers: list[_Tok] = []
            while not cur.accept_punct(";"):
                answers.append(cur.ident("an answer or ';'"))
            if not answers:
                cur.fail("expected at least one answer")
            cur.keyword("default")
            cur.punct(":")
            default = cur.ident("a default answer")
            cur.punct(";")
            cur.keyword("ask_cost")
            cur.punct(":")
            ask_cost, _ = cur.rational("a cost")
            cur.punct("}")
            cur.end()
            seen: set[str] = set()
            for a in answers:
                if a.text == UNKNOWN:
                    raise _semantic(a, f"'{UNKNOWN}' is reserved and cannot be an answer")
                if a.text in seen:
                    raise _semantic(a, f"duplicate answer '{a.text}'")
                seen.add(a.text)
            if default.text not in seen:
                raise _semantic(
                    default, f"default '{default.text}' is not among the answers"
                )
            try:
                slot = Slot(
                    name=sname.text,
                    prompt=prompt.text,
                    answers=tuple(a.text for a in answers),
                    default_answer=default.text,
                    ask_cost=ask_cost,
                )
            except ValidationError as exc:
                raise _semantic(sname, str(exc)) from None
            slots.append((sname, slot))
        elif head.text == "query":
            qname = cur.ident("a query name")
            cur.punct("{")
            cur.keyword("requires")
            cur.punct(":")
            requires: list[_Tok] = []
            while not cur.accept_punct(";"):
                requires.append(cur.ident("a slot name or ';'"))
            if not requires:
                cur.fail("expected at least one required slot")
            cur.keyword("cost")
            cur.punct(":")
            cost, _ = cur.rational("a cost")
            cur.punct(";")
            cur.keyword("utility")
            cur.punct(":")
            utility, _ = cur.rational("a utility")
            cur.punct("}")
            cur.end()
            queries.append((qname, requires, cost, utility))
        elif head.text == "advisory":
            aname = cur.ident("an advisory name")
            cur.punct("{")
            cur.keyword("requires")
            cur.punct(":")
            req: list[_Tok] = []
            if cur.accept_punct("-"):
                cur.punct(";")
            else:
                while not cur.accept_punct(";"):
                    req.append(cur.ident("a query name or ';'"))
            cur.keyword("message")
            cur.punct(":")
            message = cur.string("a message string")
            cur.punct(";")
            cur.keyword("cost")
            cur.punct(":")
            cost, _ = cur.rational("a cost")
            cur.punct(";")
            cur.keyword("utility")
            cur.punct(":")
            utility, _ = cur.rational("a utility")
            cur.punct("}")
            cur.end()
            advisories.append((aname, req, message, cost, utility))
        else:
            raise SourceError(
                head.line, head.col,
                f"unknown declaration '{head.text}' (expected dialog, turns,"
                " discount, slot, query, or advisory)",
                "syntax",
            )

    if name_tok is None:
        raise SourceError(1, 1, "missing dialog declaration", "semantic")
    if turns is None:
        raise SourceError(1, 1, "missing turns declaration", "semantic")

    names: set[str] = set()
    for tok in (
        [t for t, _ in slots]
        + [t for t, *_ in queries]
        + [t for t, *_ in advisories]
    ):
        if tok.text in names:
            raise _semantic(tok, f"duplicate name '{tok.text}'")
        names.add(tok.text)

    slot_names = {s.name for _, s in slots}
    built_queries = []
    for qname, requires, cost, utility in queries:
        for r in requires:
            if r.text not in slot_names:
                raise _semantic(
                    r, f"query '{qname.text}' requires undeclared slot '{r.text}'"
                )
        try:
            built_queries.append(
                Query(
                    name=qname.text,
                    requires=tuple(r.text for r in requires),
                    run_cost=cost,
                    utility=utility,
                )
            )
        except ValidationError as exc:
            raise _semantic(qname, str(exc)) from None
    query_names = {q.name for q in built_queries}
    built_advisories = []
    for aname, req, message, cost, utility in advisories:
        for r in req:
            if r.text not in query_names:
                raise _semantic(
                    r, f"advisory '{aname.text}' requires undeclared query '{r.text}'"
                )
        try:
            adv = Advisory(
                name=aname.text,
                requires_queries=tuple(r.text for r in req),
                message_template=message.text,
                cost=cost,
                utility=utility,
            )
        except ValidationError as exc:
            raise _semantic(aname, str(exc)) from None
        for ph in adv.placeholders:
            if ph not in slot_names:
                raise _semantic(
                    message,
                    f"advisory '{aname.text}' references undeclared slot"
                    f" '{ph}' in its message",
                )
        built_advisories.append(adv)

    try:
        return DialogSpec(
            name=name_tok.text,
            slots=tuple(s for _, s in slots),
            queries=tuple(built_queries),
            advisories=tuple(built_advisories),
            max_turns=turns[0],
            discount=discount[0] if discount else None,
        )
    except ValidationError as exc:
        raise SourceError(1, 1, str(exc), "semantic") from exc


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_dialog_spec(ds: DialogSpec) -> str:
    """Canonical text: dialog, turns, discount when present, then slots,
    queries, advisories in declaration order."""
    lines = [f"dialog {ds.name}", f"turns {ds.max_turns}"]
    if ds.discount is not None:
        lines.append(f"discount {format_rational(ds.discount)}")
    for s in ds.slots:
        lines.append(
            f"slot {s.name} {{"
            f" prompt: {_quote(s.prompt)} ;"
            f" answers: {' '.join(s.answers)} ;"
            f" default: {s.default_answer} ;"
            f" ask_cost: {format_rational(s.ask_cost)} }}"
        )
    for q in ds.queries:
        lines.append(
            f"query {q.name} {{"
            f" requires: {' '.join(q.requires)} ;"
            f" cost: {format_rational(q.run_cost)} ;"
            f" utility: {format_rational(q.utility)} }}"
        )
    for a in ds.advisories:
        requires = " ".join(a.requires_queries) if a.requires_queries else "-"
        lines.append(
            f"advisory {a.name} {{"
            f" requires: {requires} ;"
            f" message: {_quote(a.message_template)} ;"
            f" cost: {format_rational(a.cost)} ;"
            f" utility: {format_rational(a.utility)} }}"
        )
    return "\n".join(lines) + "\n"


def detect_kind(text: str) -> Optional[str]:
    """'problem' or 'dialog' from the first declaration keyword, else None."""
    for raw in text.split("\n"):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            word = stripped.split()[0]
            return word if word in ("problem", "dialog") else None
    return None

"""Line-oriented DSL parser for cohort queries.

Parsing is total: bad input never raises. Each `;`-separated line is parsed
independently so one malformed line does not hide diagnostics on the others.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

from ..squaremodel.model import EventKind
from .ast import (
    Biospecimen,
    CohortQuery,
    Comparison,
    ComparisonOp,
    Constraint,
    ConstraintLine,
    DateRange,
    Demographic,
    DemographicField,
    Event,
    IntRange,
    Modifiers,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalOrder,
    TemporalPair,
    TemporalRelation,
)

KIND_WORDS = {
    "DX": EventKind.DIAGNOSIS,
    "PROC": EventKind.PROCEDURE,
    "LAB": EventKind.LAB,
    "DRUG": EventKind.MED_ORDER,
    "CLASS": EventKind.MED_ORDER,
    "DOC": EventKind.DOCUMENT,
    "ENC": EventKind.ENCOUNTER,
    "ADMIT": EventKind.ADMISSION,
    "FLOW": EventKind.FLOWSHEET,
}

PARAM_KEYS = ("code", "system", "keyword", "doctype", "dept", "provider", "ingredient", "class")

_WORD_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.+/-")

_SYMBOLS = {";": "SEMI", ",": "COMMA", "(": "LPAREN", ")": "RPAREN",
            "[": "LBRACKET", "]": "RBRACKET", "*": "STAR"}


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int
    column: int
    expected: str | None = None

    def render(self) -> str:
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{self.line}:{self.column}: {self.message}{hint}"


@dataclass(frozen=True)
class Token:
    type: str  # WORD STRING SEMI COMMA LPAREN RPAREN LBRACKET RBRACKET EQ LT LE GE GT RANGE STAR EOF
    value: str
    line: int
    column: int


@dataclass
class ParseResult:
    query: CohortQuery | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.query is not None and not self.diagnostics


class _LineError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.render())


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch in _SYMBOLS:
            tokens.append(Token(_SYMBOLS[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "=":
            tokens.append(Token("EQ", "=", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "<":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token("LE", "<=", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(Token("LT", "<", start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == ">":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token("GE", ">=", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(Token("GT", ">", start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == '"':
            value_chars = []
            j = i + 1
            closed = False
            while j < n:
                c = text[j]
                if c == "\\" and j + 1 < n and text[j + 1] in ('"', "\\"):
                    value_chars.append(text[j + 1])
                    j += 2
                    continue
                if c == '"':
                    closed = True
                    j += 1
                    break
                if c == "\n":
                    break
                value_chars.append(c)
                j += 1
            if not closed:
                diagnostics.append(Diagnostic("unterminated string", start_line, start_col, 'closing "'))
                col += j - i
                i = j
                continue
            tokens.append(Token("STRING", "".join(value_chars), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _WORD_CHARS:
            j = i
            while j < n and text[j] in _WORD_CHARS:
                if text[j] == "." and j + 1 < n and text[j + 1] == ".":
                    break  # '..' is the range operator, never part of a word
                j += 1
            word = text[i:j]
            if j < n and text[j] == "." and j + 1 < n and text[j + 1] == ".":
                tokens.append(Token("WORD", word, start_line, start_col))
                tokens.append(Token("RANGE", "..", start_line, start_col + (j - i)))
                col += (j - i) + 2
                i = j + 2
                continue
            tokens.append(Token("WORD", word, start_line, start_col))
            col += j - i
            i = j
            continue
        diagnostics.append(Diagnostic(f"unexpected character {ch!r}", start_line, start_col))
        i += 1
        col += 1
    tokens.append(Token("EOF", "", line, col))
    return tokens, diagnostics


class _LineParser:
    """Recursive-descent parser over one line's tokens."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def fail(self, message: str, expected: str | None = None, tok: Token | None = None):
        tok = tok or self.peek()
        raise _LineError(Diagnostic(message, tok.line, tok.column, expected))

    def expect(self, type_: str, expected: str) -> Token:
        tok = self.peek()
        if tok.type != type_:
            self.fail(f"unexpected {describe(tok)}", expected)
        return self.advance()

    def keyword(self) -> str | None:
        tok = self.peek()
        return tok.value.upper() if tok.type == "WORD" else None

    # ---- productions -------------------------------------------------

    def parse_line(self) -> ConstraintLine:
        kw = self.keyword()
        if kw not in ("INCLUDE", "EXCLUDE"):
            self.fail(f"unexpected {describe(self.peek())}", "INCLUDE or EXCLUDE")
        self.advance()
        polarity = Polarity.INCLUDE if kw == "INCLUDE" else Polarity.EXCLUDE
        constraint = self.parse_constraint()
        modifiers = self.parse_modifiers()
        tok = self.peek()
        if tok.type != "EOF":
            self.fail(f"unexpected {describe(tok)} after constraint line", "AGE, DATE, MIN, or ';'")
        return ConstraintLine(polarity=polarity, constraint=constraint, modifiers=modifiers)

    def parse_constraint(self) -> Constraint:
        kw = self.keyword()
        if kw == "DEMOG":
            self.advance()
            return self.parse_demog()
        if kw in KIND_WORDS:
            return self.parse_event()
        if kw == "PAIR":
            self.advance()
            return self.parse_pair()
        if kw == "MRNLIST":
            self.advance()
            return self.parse_mrnlist()
        if kw == "COHORT":
            self.advance()
            tok = self.expect("WORD", "cohort id")
            return SavedCohortRef(cohort_id=tok.value)
        if kw == "BIOSPECIMEN":
            self.advance()
            tok = self.expect("WORD", "true or false")
            if tok.value.lower() not in ("true", "false"):
                self.fail(f"bad biospecimen flag {tok.value!r}", "true or false", tok)
            return Biospecimen(available=tok.value.lower() == "true")
        self.fail(
            f"unexpected {describe(self.peek())}",
            "DEMOG, DX, PROC, LAB, DRUG, CLASS, DOC, ENC, ADMIT, FLOW, PAIR, MRNLIST, COHORT, or BIOSPECIMEN",
        )

    def parse_demog(self) -> Demographic:
        tok = self.expect("WORD", "demographic field")
        try:
            fld = DemographicField(tok.value.lower())
        except ValueError:
            self.fail(f"unknown demographic field {tok.value!r}",
                      "current_age, gender, race, ethnicity, language, or vital_status", tok)
        self.expect("EQ", "'='")
        if fld is DemographicField.CURRENT_AGE:
            rng = self.parse_int_range("age")
            return Demographic(field=fld, age_range=rng)
        value = self.parse_value()
        return Demographic(field=fld, value=value)

    def parse_event(self) -> Event:
        kind_tok = self.advance()
        kind = KIND_WORDS[kind_tok.value.upper()]
        codes: list[str] = []
        doc_types: list[str] = []
        fields: dict = {}
        comparison: Comparison | None = None
        while True:
            tok = self.peek()
            if tok.type in ("LT", "LE", "EQ", "GE", "GT"):
                if comparison is not None:
                    self.fail("duplicate comparison", None, tok)
                op = ComparisonOp(tok.value)
                self.advance()
                num_tok = self.expect("WORD", "number")
                try:
                    value = float(num_tok.value)
                except ValueError:
                    self.fail(f"bad number {num_tok.value!r}", "decimal number", num_tok)
                comparison = Comparison(op=op, value=value)
                continue
            if tok.type == "WORD" and self._at_param():
                key_tok = self.advance()
                key = key_tok.value.lower()
                self.expect("EQ", "'='")
                value = self.parse_value()
                if key == "code":
                    codes.append(value)
                elif key == "doctype":
                    doc_types.append(value)
                elif key == "system":
                    self._set_once(fields, "code_system", value, key_tok)
                elif key == "keyword":
                    self._set_once(fields, "text_keyword", value, key_tok)
                elif key == "dept":
                    self._set_once(fields, "department", value, key_tok)
                elif key == "provider":
                    self._set_once(fields, "provider", value, key_tok)
                elif key == "ingredient":
                    self._set_once(fields, "drug_ingredient", value, key_tok)
                elif key == "class":
                    self._set_once(fields, "drug_class", value, key_tok)
                else:
                    self.fail(f"unknown parameter {key_tok.value!r}", ", ".join(PARAM_KEYS), key_tok)
                continue
            break
        return Event(
            kind=kind,
            codes=tuple(codes) or None,
            doc_types=tuple(doc_types) or None,
            lab_comparison=comparison,
            **fields,
        )

    def _set_once(self, fields: dict, name: str, value: str, tok: Token) -> None:
        if name in fields:
            self.fail(f"duplicate parameter {tok.value!r}", None, tok)
        fields[name] = value

    def _at_param(self) -> bool:
        tok = self.peek()
        if tok.type != "WORD":
            return False
        if tok.value.upper() in ("AGE", "DATE", "MIN"):
            return False
        return self.tokens[self.pos + 1].type == "EQ"

    def parse_pair(self) -> TemporalPair:
        self.expect("LPAREN", "'('")
        first = self._pair_operand()
        self.expect("COMMA", "','")
        second = self._pair_operand()
        self.expect("COMMA", "','")
        relation = self.parse_relation()
        self.expect("RPAREN", "')'")
        return TemporalPair(first=first, second=second, relation=relation)

    def _pair_operand(self) -> Event:
        kw = self.keyword()
        if kw not in KIND_WORDS:
            self.fail(
                f"unexpected {describe(self.peek())} in PAIR",
                "an event constraint (DX, PROC, LAB, DRUG, CLASS, DOC, ENC, ADMIT, FLOW)",
            )
        return self.parse_event()

    def parse_relation(self) -> TemporalRelation:
        kw = self.keyword()
        if kw == "SAMEDAY":
            self.advance()
            return TemporalRelation(order=TemporalOrder.SAME_DAY, gap_days=None)
        if kw in ("BEFORE", "AFTER"):
            self.advance()
            gap = self.parse_int_range("gap days")
            order = TemporalOrder.FIRST_BEFORE_SECOND if kw == "BEFORE" else TemporalOrder.SECOND_BEFORE_FIRST
            return TemporalRelation(order=order, gap_days=gap)
        self.fail(f"unexpected {describe(self.peek())}", "BEFORE, AFTER, or SAMEDAY")

    def parse_mrnlist(self) -> PatientList:
        self.expect("LBRACKET", "'['")
        mrns = [self.parse_value()]
        while self.peek().type == "COMMA":
            self.advance()
            mrns.append(self.parse_value())
        self.expect("RBRACKET", "']'")
        return PatientList(mrns=tuple(mrns))

    def parse_modifiers(self) -> Modifiers:
        age_range: IntRange | None = None
        date_range: DateRange | None = None
        min_occurrences = 1
        seen: set[str] = set()
        while True:
            kw = self.keyword()
            if kw not in ("AGE", "DATE", "MIN"):
                return Modifiers(age_range=age_range, date_range=date_range, min_occurrences=min_occurrences)
            tok = self.advance()
            if kw in seen:
                self.fail(f"duplicate modifier {kw}", None, tok)
            seen.add(kw)
            if kw == "AGE":
                age_range = self.parse_int_range("age")
            elif kw == "DATE":
                date_range = self.parse_date_range()
            else:
                num_tok = self.expect("WORD", "positive integer")
                min_occurrences = self.parse_int(num_tok, "occurrence count")
                if min_occurrences < 1:
                    self.fail("MIN must be at least 1", None, num_tok)

    def parse_int(self, tok: Token, what: str) -> int:
        try:
            return int(tok.value)
        except ValueError:
            self.fail(f"bad {what} {tok.value!r}", "integer", tok)

    def parse_int_range(self, what: str) -> IntRange:
        lo_tok = self.expect("WORD", f"{what} range like 1..5 or 1..*")
        lo = self.parse_int(lo_tok, what)
        if lo < 0:
            self.fail(f"{what} must be >= 0", None, lo_tok)
        if self.peek().type != "RANGE":
            return IntRange(min=lo, max=lo)
        self.advance()
        tok = self.peek()
        if tok.type == "STAR":
            self.advance()
            return IntRange(min=lo, max=None)
        hi_tok = self.expect("WORD", "integer or '*'")
        hi = self.parse_int(hi_tok, what)
        if hi < lo:
            self.fail(f"{what} range min exceeds max", None, hi_tok)
        return IntRange(min=lo, max=hi)

    def parse_date_range(self) -> DateRange:
        start_tok = self.expect("WORD", "date range like 2010-01-01..2020-12-31")
        start = self.parse_date(start_tok)
        self.expect("RANGE", "'..'")
        end_tok = self.expect("WORD", "ISO date")
        end = self.parse_date(end_tok)
        if end < start:
            self.fail("date range start exceeds end", None, end_tok)
        return DateRange(start=start, end=end)

    def parse_date(self, tok: Token) -> date:
        try:
            return date.fromisoformat(tok.value)
        except ValueError:
            self.fail(f"bad date {tok.value!r}", "ISO date YYYY-MM-DD", tok)

    def parse_value(self) -> str:
        tok = self.peek()
        if tok.type in ("WORD", "STRING"):
            self.advance()
            return tok.value
        self.fail(f"unexpected {describe(tok)}", "a value")


def describe(tok: Token) -> str:
    if tok.type == "EOF":
        return "end of line"
    if tok.type == "WORD":
        return f"word {tok.value!r}"
    if tok.type == "STRING":
        return f"string {tok.value!r}"
    return f"{tok.value!r}"


def _split_on_semicolons(tokens: list[Token]) -> list[list[Token]]:
    groups: list[list[Token]] = []
    current: list[Token] = []
    eof = tokens[-1]
    for tok in tokens[:-1]:
        if tok.type == "SEMI":
            groups.append(current)
            current = []
        else:
            current.append(tok)
    groups.append(current)
    # each group gets its own EOF marker positioned at the separator
    return [g + [Token("EOF", "", g[-1].line if g else eof.line, (g[-1].column + len(g[-1].value)) if g else eof.column)] for g in groups]


def parse_dsl(text: str) -> ParseResult:
    """Parse DSL text into a query, or collect diagnostics. Never raises."""
    tokens, diagnostics = tokenize(text)
    groups = [g for g in _split_on_semicolons(tokens) if len(g) > 1]
    if not groups:
        diagnostics.append(Diagnostic("query must contain at least one line", 1, 1))
        return ParseResult(query=None, diagnostics=diagnostics)

    lines: list[ConstraintLine] = []
    for group in groups:
        parser = _LineParser(group)
        try:
            lines.append(parser.parse_line())
        except _LineError as err:
            diagnostics.append(err.diagnostic)

    if diagnostics:
        return ParseResult(query=None, diagnostics=diagnostics)
    return ParseResult(query=CohortQuery(lines=tuple(lines)), diagnostics=[])

"""Text format for temporal probabilistic programs and queries.

Program grammar (``%`` comments run to end of line)::

    program   := calendar clause*
    calendar  := "calendar" INT ".." INT "."
    clause    := head ( ":-" body )? "."
    head      := tatom ":" annot
    body      := bform ":" annot ( "and" bform ":" annot )*
    tatom     := IDENT ( "(" term ("," term)* ")" )? "@" (TVAR | INT)
    bform     := tatom ( ("and"|"or") tatom )*          -- homogeneous
    annot     := "<" constr "," weights "," weights ">"
    constr    := leaf | constr ("and"|"or") constr | "not" constr | "(" constr ")"
    leaf      := TVAR OP iexpr | TVAR ":" iexpr "~" iexpr
    OP        := "<=" | "<" | "=" | "!=" | ">" | ">="
    weights   := "#" | "uniform" | "[" NUM ("," NUM)* "]"

Identifiers starting with an upper-case letter are object variables, except
those starting with ``Y`` which are temporal variables; lower-case identifiers
are constants.  ``and`` binds atoms inside a formula before the ``:`` and
separates body conjuncts after an annotation.  NUM is an integer, a decimal
with at most nine fractional digits, or an exact ratio ``n/d``.  An optional
``constants a, b.`` statement declares constants beyond the occurring ones.

Query files hold a single statement::

    "?" "entail" bform ":" annot "."
    "?" "tighten" gform "."      -- atom times all "@t" (one shared t) or all "@*"
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .diagnostics import Diagnostic, DiagnosticKind, SourceSpan, error
from .intervals import format_rational
from .model import (
    BasicFormula,
    Calendar,
    CAnd,
    Cmp,
    CNot,
    Connective,
    COr,
    ObjVar,
    PTProgram,
    TAtom,
    TBin,
    TConst,
    TimeRange,
    TPAnnotation,
    TPClause,
    TRef,
    TVar,
    WeightFunction,
    WeightKind,
    companion_vars,
    constraint_principal,
    occurring_constants,
)

# --- lexer ----------------------------------------------------------------------

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"%[^\n]*"),
    ("DEC", r"\d+\.\d+"),
    ("DOTDOT", r"\.\."),
    ("INT", r"\d+"),
    ("IMPL", r":-"),
    ("LE", r"<="),
    ("GE", r">="),
    ("NE", r"!="),
    ("IDENT", r"[a-z][A-Za-z0-9_]*"),
    ("VAR", r"[A-Z][A-Za-z0-9_]*"),
    ("DOT", r"\."),
    ("COMMA", r","),
    ("COLON", r":"),
    ("TILDE", r"~"),
    ("AT", r"@"),
    ("LT", r"<"),
    ("GT", r">"),
    ("EQ", r"="),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("LBRACK", r"\["),
    ("RBRACK", r"\]"),
    ("HASH", r"#"),
    ("STAR", r"\*"),
    ("PLUS", r"\+"),
    ("MINUS", r"-"),
    ("SLASH", r"/"),
    ("QMARK", r"\?"),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    span: SourceSpan


def _lex(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def locate(pos: int) -> tuple[int, int]:
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, pos - line_starts[lo] + 1

    pos = 0
    while pos < len(text):
        m = _MASTER.match(text, pos)
        if m is None:
            line, col = locate(pos)
            diags.append(
                error(
                    DiagnosticKind.SYNTAX,
                    f"unexpected character {text[pos]!r}",
                    SourceSpan(line, col, pos, pos + 1),
                )
            )
            pos += 1
            continue
        kind = m.lastgroup
        if kind not in ("WS", "COMMENT"):
            line, col = locate(m.start())
            tokens.append(Token(kind, m.group(), SourceSpan(line, col, m.start(), m.end())))
        pos = m.end()
    eol_line, eol_col = locate(len(text)) if text else (1, 1)
    tokens.append(Token("EOF", "", SourceSpan(eol_line, eol_col, len(text), len(text))))
    return tokens, diags


# --- parse results ---------------------------------------------------------------


@dataclass
class ParseResult:
    program: PTProgram | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.program is not None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if not d.is_error]


class QueryKind(Enum):
    ENTAIL = "entail"
    TIGHTEN = "tighten"


@dataclass(frozen=True)
class Query:
    kind: QueryKind
    formula: BasicFormula
    annot: TPAnnotation | None = None  # entailment target
    at: int | None = None  # tighten time point; None means every calendar point
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class QueryResult:
    query: Query | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.query is not None


class _Unexpected(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, type_: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == type_ and (text is None or tok.text == text)

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.type != "EOF":
            self.i += 1
        return tok

    def accept(self, type_: str, text: str | None = None) -> Token | None:
        if self.at(type_, text):
            return self.advance()
        return None

    def expect(self, type_: str, what: str) -> Token:
        if self.at(type_):
            return self.advance()
        tok = self.peek()
        shown = tok.text or "end of input"
        raise _Unexpected(f"expected {what}, found {shown!r}", tok.span)

    def sync_to_dot(self):
        """Error recovery: skip past the next clause terminator."""
        while not self.at("EOF"):
            if self.advance().type == "DOT":
                return


class _ProgramParser:
    def __init__(self, text: str):
        self.tokens, self.diags = _lex(text)
        self.cur = _Cursor(self.tokens)

    # -- small pieces --

    def parse_number(self) -> Fraction:
        tok = self.cur.peek()
        if tok.type == "INT":
            self.cur.advance()
            if self.cur.accept("SLASH"):
                den = self.cur.expect("INT", "a denominator")
                if int(den.text) == 0:
                    raise _Unexpected("zero denominator", den.span)
                return Fraction(int(tok.text), int(den.text))
            return Fraction(int(tok.text))
        if tok.type == "DEC":
            self.cur.advance()
            frac_digits = len(tok.text.split(".", 1)[1])
            if frac_digits > 9:
                self.diags.append(
                    error(
                        DiagnosticKind.SYNTAX,
                        f"decimal literal {tok.text} has more than 9 fractional digits",
                        tok.span,
                    )
                )
            whole, frac = tok.text.split(".", 1)
            return Fraction(int(whole)) + Fraction(int(frac), 10 ** len(frac))
        raise _Unexpected("expected a number", tok.span)

    def parse_prob(self) -> Fraction:
        start = self.cur.peek()
        value = self.parse_number()
        if not (0 <= value <= 1):
            self.diags.append(
                error(
                    DiagnosticKind.VALUE_RANGE,
                    f"probability {format_rational(value)} outside [0,1]",
                    start.span,
                )
            )
            value = max(Fraction(0), min(Fraction(1), value))
        return value

    def parse_weights(self) -> WeightFunction:
        if tok := self.cur.accept("HASH"):
            return WeightFunction(WeightKind.SHARP, (), tok.span)
        if tok := self.cur.accept("IDENT", "uniform"):
            return WeightFunction(WeightKind.UNIFORM, (), tok.span)
        start = self.cur.expect("LBRACK", "a weight function ('#', 'uniform' or '[...]')")
        values = [self.parse_prob()]
        while self.cur.accept("COMMA"):
            values.append(self.parse_prob())
        end = self.cur.expect("RBRACK", "']'")
        span = SourceSpan(start.span.line, start.span.column, start.span.start, end.span.end)
        return WeightFunction(WeightKind.LIST, tuple(values), span)

    def parse_tvar(self) -> tuple[TVar, Token]:
        tok = self.cur.expect("VAR", "a temporal variable")
        if not tok.text.startswith("Y"):
            raise _Unexpected(
                f"{tok.text} is an object variable; temporal variables start with Y", tok.span
            )
        return TVar(tok.text), tok

    def parse_ifactor(self):
        if self.cur.accept("MINUS"):
            inner = self.parse_ifactor()
            if isinstance(inner, TConst):
                return TConst(-inner.value)
            return TBin("-", TConst(0), inner)
        if self.cur.accept("LPAREN"):
            e = self.parse_iexpr()
            self.cur.expect("RPAREN", "')'")
            return e
        if tok := self.cur.accept("INT"):
            return TConst(int(tok.text))
        var, _ = self.parse_tvar()
        return TRef(var)

    def parse_iterm(self, first=None):
        left = first if first is not None else self.parse_ifactor()
        while self.cur.accept("STAR"):
            left = TBin("*", left, self.parse_ifactor())
        return left

    def parse_iexpr(self, first=None):
        left = self.parse_iterm(first)
        while True:
            if self.cur.accept("PLUS"):
                left = TBin("+", left, self.parse_iterm())
            elif self.cur.at("MINUS"):
                self.cur.advance()
                left = TBin("-", left, self.parse_iterm())
            else:
                return left

    _CMP = {"LE": "<=", "LT": "<", "EQ": "=", "NE": "!=", "GT": ">", "GE": ">="}

    def parse_leaf(self):
        var, vtok = self.parse_tvar()
        if self.cur.at("IMPL"):
            # "Y:-2" lexes as ':-'; re-read it as ':' plus a negated factor.
            self.cur.advance()
            inner = self.parse_ifactor()
            first = TConst(-inner.value) if isinstance(inner, TConst) else TBin("-", TConst(0), inner)
            lo = self.parse_iexpr(first=first)
            self.cur.expect("TILDE", "'~'")
            hi = self.parse_iexpr()
            return TimeRange(var, lo, hi, vtok.span)
        if self.cur.accept("COLON"):
            lo = self.parse_iexpr()
            self.cur.expect("TILDE", "'~'")
            hi = self.parse_iexpr()
            return TimeRange(var, lo, hi, vtok.span)
        tok = self.cur.peek()
        if tok.type in self._CMP:
            self.cur.advance()
            rhs = self.parse_iexpr()
            return Cmp(var, self._CMP[tok.type], rhs, vtok.span)
        raise _Unexpected("expected a comparison operator or ':'", tok.span)

    def parse_cunary(self):
        if self.cur.accept("IDENT", "not"):
            return CNot(self.parse_cunary())
        if self.cur.accept("LPAREN"):
            c = self.parse_constr()
            self.cur.expect("RPAREN", "')'")
            return c
        return self.parse_leaf()

    def parse_cand(self):
        left = self.parse_cunary()
        while self.cur.accept("IDENT", "and"):
            left = CAnd(left, self.parse_cunary())
        return left

    def parse_constr(self):
        left = self.parse_cand()
        while self.cur.accept("IDENT", "or"):
            left = COr(left, self.parse_cand())
        return left

    def parse_annot(self) -> TPAnnotation:
        start = self.cur.expect("LT", "'<' starting an annotation")
        constraint = self.parse_constr()
        try:
            principal = constraint_principal(constraint)
        except ValueError as exc:
            raise _Unexpected(str(exc), start.span) from None
        if principal.name in companion_vars(constraint):
            raise _Unexpected(
                f"principal variable {principal.name} may not occur inside a temporal term",
                start.span,
            )
        self.cur.expect("COMMA", "','")
        lower = self.parse_weights()
        self.cur.expect("COMMA", "','")
        upper = self.parse_weights()
        end = self.cur.expect("GT", "'>' closing the annotation")
        span = SourceSpan(start.span.line, start.span.column, start.span.start, end.span.end)
        return TPAnnotation(constraint, lower, upper, span)

    def parse_term(self):
        tok = self.cur.peek()
        if tok.type == "IDENT":
            self.cur.advance()
            return tok.text
        if tok.type == "VAR":
            if tok.text.startswith("Y"):
                raise _Unexpected(
                    f"temporal variable {tok.text} cannot appear in an object position", tok.span
                )
            self.cur.advance()
            return ObjVar(tok.text)
        raise _Unexpected("expected a constant or object variable", tok.span)

    def parse_tatom(self, allow_star: bool = False) -> tuple[TAtom, str | None]:
        """Returns the atom plus a time marker: None for symbolic, 'int', or '*'."""
        name = self.cur.expect("IDENT", "a predicate name")
        args: list = []
        if self.cur.accept("LPAREN"):
            args.append(self.parse_term())
            while self.cur.accept("COMMA"):
                args.append(self.parse_term())
            self.cur.expect("RPAREN", "')'")
        self.cur.expect("AT", "'@'")
        tok = self.cur.peek()
        marker: str | None = None
        if tok.type == "VAR" and tok.text.startswith("Y"):
            self.cur.advance()
            time = TVar(tok.text)
        elif tok.type == "INT":
            self.cur.advance()
            time = int(tok.text)
            marker = "int"
        elif allow_star and tok.type == "STAR":
            self.cur.advance()
            time = TVar("Y")
            marker = "*"
        else:
            raise _Unexpected("expected a temporal variable or time point after '@'", tok.span)
        span = SourceSpan(name.span.line, name.span.column, name.span.start, tok.span.end)
        return TAtom(name.text, tuple(args), time, span), marker

    def parse_bform(self, allow_star: bool = False) -> tuple[BasicFormula, list[str | None]]:
        first_tok = self.cur.peek()
        atom, marker = self.parse_tatom(allow_star)
        atoms = [atom]
        markers = [marker]
        connective = None
        while True:
            word = self.cur.peek()
            if word.type == "IDENT" and word.text in ("and", "or"):
                self.cur.advance()
                if connective is None:
                    connective = word.text
                elif connective != word.text:
                    self.diags.append(
                        error(
                            DiagnosticKind.SYNTAX,
                            "a compound formula must use a single connective",
                            word.span,
                        )
                    )
                atom, marker = self.parse_tatom(allow_star)
                atoms.append(atom)
                markers.append(marker)
            else:
                break
        conn = Connective.AND if connective in (None, "and") else Connective.OR
        span = SourceSpan(
            first_tok.span.line, first_tok.span.column, first_tok.span.start, atoms[-1].span.end
        )
        formula = BasicFormula.of(conn, atoms, span)
        try:
            formula.temporal_var
        except ValueError as exc:
            raise _Unexpected(str(exc), span) from None
        return formula, markers

    def check_annotation_binding(self, formula: BasicFormula, annot: TPAnnotation):
        tvar = formula.temporal_var
        principal = constraint_principal(annot.constraint)
        if tvar is not None and tvar != principal:
            raise _Unexpected(
                f"formula uses temporal variable {tvar.name} but the annotation binds "
                f"{principal.name}",
                annot.span or formula.span,
            )

    def parse_clause(self) -> TPClause:
        head_tok = self.cur.peek()
        head, _ = self.parse_tatom()
        self.cur.expect("COLON", "':' before the head annotation")
        head_annot = self.parse_annot()
        self.check_annotation_binding(BasicFormula.single(head), head_annot)
        body: list[tuple[BasicFormula, TPAnnotation]] = []
        if self.cur.accept("IMPL"):
            while True:
                formula, _ = self.parse_bform()
                self.cur.expect("COLON", "':' before a body annotation")
                annot = self.parse_annot()
                self.check_annotation_binding(formula, annot)
                body.append((formula, annot))
                if not self.cur.accept("IDENT", "and"):
                    break
        end = self.cur.expect("DOT", "'.' ending the clause")
        span = SourceSpan(head_tok.span.line, head_tok.span.column, head_tok.span.start, end.span.end)
        return TPClause(head, head_annot, tuple(body), span)

    def parse_calendar(self) -> Calendar | None:
        if not self.cur.at("IDENT", "calendar"):
            tok = self.cur.peek()
            self.diags.append(
                error(
                    DiagnosticKind.SYNTAX,
                    "a program must start with 'calendar <first>..<last>.'",
                    tok.span,
                )
            )
            return None
        self.cur.advance()
        try:
            first = self.cur.expect("INT", "the first calendar point")
            self.cur.expect("DOTDOT", "'..'")
            last = self.cur.expect("INT", "the last calendar point")
            self.cur.expect("DOT", "'.'")
        except _Unexpected as exc:
            self.diags.append(error(DiagnosticKind.SYNTAX, exc.message, exc.span))
            self.cur.sync_to_dot()
            return None
        if int(last.text) < int(first.text):
            self.diags.append(
                error(DiagnosticKind.SYNTAX, "calendar range is empty", last.span)
            )
            return None
        return Calendar.from_range(int(first.text), int(last.text), f"{first.text}..{last.text}")

    def parse_program(self) -> ParseResult:
        calendar = self.parse_calendar()
        clauses: list[TPClause] = []
        declared: set[str] = set()
        while not self.cur.at("EOF"):
            if self.cur.at("IDENT", "constants"):
                self.cur.advance()
                try:
                    tok = self.cur.expect("IDENT", "a constant name")
                    declared.add(tok.text)
                    while self.cur.accept("COMMA"):
                        declared.add(self.cur.expect("IDENT", "a constant name").text)
                    self.cur.expect("DOT", "'.'")
                except _Unexpected as exc:
                    self.diags.append(error(DiagnosticKind.SYNTAX, exc.message, exc.span))
                    self.cur.sync_to_dot()
                continue
            try:
                clauses.append(self.parse_clause())
            except _Unexpected as exc:
                self.diags.append(error(DiagnosticKind.SYNTAX, exc.message, exc.span))
                self.cur.sync_to_dot()
        if calendar is None:
            return ParseResult(None, self.diags)
        program = PTProgram(calendar, tuple(clauses), frozenset(declared))
        self.diags.extend(program.validate())
        if any(d.is_error for d in self.diags):
            return ParseResult(None, self.diags)
        return ParseResult(program, self.diags)

    def parse_query(self) -> QueryResult:
        try:
            self.cur.expect("QMARK", "'?' starting a query")
            kw = self.cur.expect("IDENT", "'entail' or 'tighten'")
            if kw.text == "entail":
                formula, _ = self.parse_bform()
                self.cur.expect("COLON", "':' before the target annotation")
                annot = self.parse_annot()
                self.check_annotation_binding(formula, annot)
                self.cur.expect("DOT", "'.'")
                self.cur.expect("EOF", "end of input")
                self._require_object_ground(formula)
                return QueryResult(
                    Query(QueryKind.ENTAIL, formula, annot=annot, span=formula.span), self.diags
                )
            if kw.text == "tighten":
                formula, markers = self.parse_bform(allow_star=True)
                self.cur.expect("DOT", "'.'")
                self.cur.expect("EOF", "end of input")
                self._require_object_ground(formula)
                if all(m == "*" for m in markers):
                    at = None
                elif all(m == "int" for m in markers):
                    times = {a.time for a in formula.atoms}
                    if len(times) != 1:
                        raise _Unexpected(
                            "tighten atoms must share a single time point (or all use '*')",
                            formula.span,
                        )
                    at = next(iter(times))
                    formula = BasicFormula(
                        formula.connective,
                        tuple(
                            TAtom(a.predicate, a.args, TVar("Y"), a.span) for a in formula.atoms
                        ),
                        formula.span,
                    )
                else:
                    raise _Unexpected(
                        "tighten atoms must all carry '@<time>' or all carry '@*'", formula.span
                    )
                return QueryResult(
                    Query(QueryKind.TIGHTEN, formula, at=at, span=formula.span), self.diags
                )
            raise _Unexpected(f"unknown query form {kw.text!r}", kw.span)
        except _Unexpected as exc:
            self.diags.append(error(DiagnosticKind.SYNTAX, exc.message, exc.span))
            return QueryResult(None, self.diags)

    def _require_object_ground(self, formula: BasicFormula):
        for a in formula.atoms:
            if a.object_vars:
                raise _Unexpected(
                    f"queries require ground object terms, found variable(s) "
                    f"{', '.join(sorted(a.object_vars))}",
                    a.span,
                )


def parse_program(text: str) -> ParseResult:
    return _ProgramParser(text).parse_program()


def parse_query(text: str) -> QueryResult:
    return _ProgramParser(text).parse_query()


# --- evolution skeletons ----------------------------------------------------------
#
# Skeleton files carry timeless, annotation-free clauses; conjuncts are comma
# separated since there is no annotation to delimit them:
#
#     skeleton := calendar sclause*
#     sclause  := satom ( ":-" sformula ("," sformula)* )? "."
#     sformula := satom ( ("and"|"or") satom )*
#     satom    := IDENT ( "(" IDENT ("," IDENT)* ")" )?


@dataclass(frozen=True)
class SkeletonAtom:
    predicate: str
    args: tuple[str, ...]

    def __str__(self):
        inner = f"({','.join(self.args)})" if self.args else ""
        return f"{self.predicate}{inner}"


@dataclass(frozen=True)
class SkeletonFormula:
    connective: Connective
    atoms: tuple[SkeletonAtom, ...]

    def __str__(self):
        if self.connective is Connective.SINGLE:
            return str(self.atoms[0])
        return f" {self.connective.value} ".join(str(a) for a in self.atoms)


@dataclass(frozen=True)
class SkeletonClause:
    head: SkeletonAtom
    body: tuple[SkeletonFormula, ...] = ()


@dataclass(frozen=True)
class PSkeleton:
    """A probabilistic program shape: clauses without annotations or times."""

    calendar: Calendar
    clauses: tuple[SkeletonClause, ...]

    def formula_slots(self) -> list[tuple[str, SkeletonFormula]]:
        """Positional formula identifiers: c<i>.head and c<i>.b<j>."""
        slots: list[tuple[str, SkeletonFormula]] = []
        for i, cl in enumerate(self.clauses):
            slots.append((f"c{i}.head", SkeletonFormula(Connective.SINGLE, (cl.head,))))
            for j, f in enumerate(cl.body):
                slots.append((f"c{i}.b{j}", f))
        return slots


class _SkeletonParser(_ProgramParser):
    def parse_satom(self) -> SkeletonAtom:
        name = self.cur.expect("IDENT", "a predicate name")
        args: list[str] = []
        if self.cur.accept("LPAREN"):
            args.append(self.cur.expect("IDENT", "a constant").text)
            while self.cur.accept("COMMA"):
                args.append(self.cur.expect("IDENT", "a constant").text)
            self.cur.expect("RPAREN", "')'")
        return SkeletonAtom(name.text, tuple(args))

    def parse_sformula(self) -> SkeletonFormula:
        atoms = [self.parse_satom()]
        connective = None
        while True:
            word = self.cur.peek()
            if word.type == "IDENT" and word.text in ("and", "or"):
                self.cur.advance()
                if connective is None:
                    connective = word.text
                elif connective != word.text:
                    self.diags.append(
                        error(
                            DiagnosticKind.SYNTAX,
                            "a compound formula must use a single connective",
                            word.span,
                        )
                    )
                atoms.append(self.parse_satom())
            else:
                break
        conn = Connective.AND if connective in (None, "and") else Connective.OR
        if len(atoms) == 1:
            conn = Connective.SINGLE
        return SkeletonFormula(conn, tuple(atoms))

    def parse_skeleton(self) -> tuple[PSkeleton | None, list[Diagnostic]]:
        calendar = self.parse_calendar()
        clauses: list[SkeletonClause] = []
        while not self.cur.at("EOF"):
            try:
                head = self.parse_satom()
                body: list[SkeletonFormula] = []
                if self.cur.accept("IMPL"):
                    body.append(self.parse_sformula())
                    while self.cur.accept("COMMA"):
                        body.append(self.parse_sformula())
                self.cur.expect("DOT", "'.' ending the clause")
                clauses.append(SkeletonClause(head, tuple(body)))
            except _Unexpected as exc:
                self.diags.append(error(DiagnosticKind.SYNTAX, exc.message, exc.span))
                self.cur.sync_to_dot()
        if calendar is None or any(d.is_error for d in self.diags):
            return None, self.diags
        return PSkeleton(calendar, tuple(clauses)), self.diags


def parse_skeleton(text: str) -> tuple[PSkeleton | None, list[Diagnostic]]:
    return _SkeletonParser(text).parse_skeleton()


# --- rendering --------------------------------------------------------------------


def _render_formula(f: BasicFormula) -> str:
    return str(f)


def _render_annot(a: TPAnnotation) -> str:
    return f"<{a.constraint}, {a.lower}, {a.upper}>"


def render_program(p: PTProgram) -> str:
    """Emit program text that reparses to a structurally equal program."""
    if not p.calendar.is_contiguous:
        raise ValueError("only contiguous calendars have a textual form")
    lines = [f"calendar {p.calendar.first}..{p.calendar.last}."]
    extra = sorted(p.constants - occurring_constants(p.clauses))
    if extra:
        lines.append(f"constants {', '.join(extra)}.")
    for cl in p.clauses:
        head = f"{cl.head} : {_render_annot(cl.head_annot)}"
        if cl.body:
            conjuncts = " and ".join(
                f"{_render_formula(f)} : {_render_annot(ann)}" for f, ann in cl.body
            )
            lines.append(f"{head} :- {conjuncts}.")
        else:
            lines.append(f"{head}.")
    return "\n".join(lines) + "\n"

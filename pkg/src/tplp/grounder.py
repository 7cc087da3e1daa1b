"""Grounding over the Herbrand universe and temporal unfolding.

Grounding substitutes object variables by constants and independent temporal
variables by calendar points, leaving each annotation's principal variable
symbolic.  Unfolding then expands every clause into one interval-annotated
clause per solution point of its head constraint.  Unfolding tolerates object
variables (the expansion is purely temporal), so schematic programs can be
unfolded for display; the possible-world machinery requires ground clauses and
a base.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import AtomNotInBase, BaseTooLarge, NonNormalConstraint, UniverseEmpty
from .intervals import ProbInterval
from .model import (
    BasicFormula,
    Calendar,
    Cmp,
    PTProgram,
    TAtom,
    TConst,
    TPAnnotation,
    TPClause,
    TVar,
    WeightFunction,
    is_normal,
    solve_constraint,
    substitute_constraint,
    substitute_objects,
    substitute_time,
)
from .model import ObjVar  # noqa: F401  (re-exported for grounding call sites)

from enum import Enum


class GroundingMode(Enum):
    FULL = "full"
    RELEVANT = "relevant"


@dataclass(frozen=True)
class PClause:
    """Interval-annotated clause produced by unfolding."""

    head: TAtom
    head_iv: ProbInterval
    body: tuple[tuple[BasicFormula, ProbInterval], ...] = ()

    @property
    def is_ground(self) -> bool:
        return self.head.is_ground and all(f.is_ground for f, _ in self.body)

    def __str__(self):
        head = f"{self.head}:{self.head_iv}"
        if not self.body:
            return head
        return head + " <- " + " and ".join(f"{f}:{iv}" for f, iv in self.body)


class HerbrandBase:
    """Ordered, duplicate-free list of ground atoms; index = world bit position."""

    def __init__(self, atoms: Iterable[TAtom]):
        seen: dict[TAtom, None] = {}
        for a in atoms:
            if not a.is_ground:
                raise ValueError(f"non-ground atom {a} cannot enter a Herbrand base")
            seen.setdefault(a.drop_span(), None)
        self.atoms: tuple[TAtom, ...] = tuple(sorted(seen, key=TAtom.key))
        self._index = {a: i for i, a in enumerate(self.atoms)}
        self._hash = hash(self.atoms)

    def index_of(self, atom: TAtom) -> int:
        try:
            return self._index[atom]
        except KeyError:
            raise AtomNotInBase(f"atom {atom} is not in the Herbrand base") from None

    def __contains__(self, atom: TAtom) -> bool:
        return atom in self._index

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, HerbrandBase) and self.atoms == other.atoms

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"HerbrandBase({len(self.atoms)} atoms)"


@dataclass(frozen=True)
class PProgram:
    """Unfolded program; base is present only when every clause is ground."""

    clauses: tuple[PClause, ...]
    base: HerbrandBase | None = None

    @property
    def is_ground(self) -> bool:
        return all(cl.is_ground for cl in self.clauses)


def herbrand_base(source, max_atoms: int | None = None) -> HerbrandBase:
    """All atoms occurring in the clauses, canonically ordered."""
    clauses = source.clauses if isinstance(source, PProgram) else tuple(source)
    atoms: list[TAtom] = []
    for cl in clauses:
        atoms.append(cl.head)
        for f, _ in cl.body:
            atoms.extend(f.atoms)
    base = HerbrandBase(atoms)
    if max_atoms is not None and len(base) > max_atoms:
        raise BaseTooLarge(len(base), max_atoms)
    return base


# --- grounding -------------------------------------------------------------------


def _substitute_clause(cl: TPClause, obj_env: dict[str, str], t_env: dict[str, int]) -> TPClause:
    head = TAtom(
        cl.head.predicate,
        tuple(obj_env.get(a.name, a) if isinstance(a, ObjVar) else a for a in cl.head.args),
        cl.head.time,
        cl.head.span,
    )
    head_annot = TPAnnotation(
        substitute_constraint(cl.head_annot.constraint, t_env),
        cl.head_annot.lower,
        cl.head_annot.upper,
        cl.head_annot.span,
    )
    body = tuple(
        (
            substitute_objects(f, obj_env),
            TPAnnotation(
                substitute_constraint(ann.constraint, t_env), ann.lower, ann.upper, ann.span
            ),
        )
        for f, ann in cl.body
    )
    return TPClause(head, head_annot, body, cl.span)


def _atom_signature(atom: TAtom, obj_env: dict[str, str]) -> tuple:
    args = tuple(obj_env.get(a.name, a.name) if isinstance(a, ObjVar) else a for a in atom.args)
    return (atom.predicate, args)


def _object_substitutions(cl: TPClause, constants: tuple[str, ...]):
    names = sorted(cl.object_vars)
    if not names:
        yield {}
        return
    if not constants:
        raise UniverseEmpty(
            f"clause with object variables {', '.join(names)} but the program has no constants"
        )
    for combo in itertools.product(constants, repeat=len(names)):
        yield dict(zip(names, combo))


def _producible_signatures(p: PTProgram, constants: tuple[str, ...]) -> set[tuple]:
    """Least fixpoint of derivable (predicate, object-args) signatures.

    Time positions are ignored.  Clauses without object variables seed their
    head signature unconditionally; facts seed every instance of theirs.
    """
    sigs: set[tuple] = set()
    for cl in p.clauses:
        if not cl.object_vars:
            sigs.add(_atom_signature(cl.head, {}))
        elif cl.is_fact:
            for env in _object_substitutions(cl, constants):
                sigs.add(_atom_signature(cl.head, env))
    rules = [cl for cl in p.clauses if cl.object_vars and cl.body]
    changed = True
    while changed:
        changed = False
        for cl in rules:
            for env in _object_substitutions(cl, constants):
                head_sig = _atom_signature(cl.head, env)
                if head_sig in sigs:
                    continue
                if all(
                    _atom_signature(a, env) in sigs
                    for f, _ in cl.body
                    for a in f.atoms
                ):
                    sigs.add(head_sig)
                    changed = True
    return sigs


def ground_program(p: PTProgram, mode: GroundingMode = GroundingMode.FULL) -> PTProgram:
    """Instantiate object variables over the constants and independent temporal
    variables over the calendar.

    RELEVANT keeps only instances of object-variable clauses whose body
    signatures are derivable from some head or fact; ground clauses pass
    through untouched under both modes.
    """
    constants = tuple(sorted(p.constants))
    producible = _producible_signatures(p, constants) if mode is GroundingMode.RELEVANT else None
    out: list[TPClause] = []
    for cl in p.clauses:
        tvars = sorted(cl.companion_tvars)
        for obj_env in _object_substitutions(cl, constants):
            if (
                producible is not None
                and cl.object_vars
                and cl.body
                and not all(
                    _atom_signature(a, obj_env) in producible
                    for f, _ in cl.body
                    for a in f.atoms
                )
            ):
                continue
            if tvars:
                for combo in itertools.product(p.calendar.points, repeat=len(tvars)):
                    out.append(_substitute_clause(cl, obj_env, dict(zip(tvars, combo))))
            else:
                out.append(_substitute_clause(cl, obj_env, {}))
    return PTProgram(p.calendar, tuple(out), p.constants)


def ground_temporal_variables(p: PTProgram) -> PTProgram:
    """Ground only the independent temporal variables, leaving object terms alone."""
    out: list[TPClause] = []
    for cl in p.clauses:
        tvars = sorted(cl.companion_tvars)
        if not tvars:
            out.append(cl)
            continue
        for combo in itertools.product(p.calendar.points, repeat=len(tvars)):
            out.append(_substitute_clause(cl, {}, dict(zip(tvars, combo))))
    return PTProgram(p.calendar, tuple(out), p.constants)


# --- unfolding -------------------------------------------------------------------


def unfold(p: PTProgram, warn: Callable[[str], None] | None = None) -> PProgram:
    """Expand each clause into one interval-annotated clause per head solution point.

    The head interval at t is [lower(t), upper(t)]; the body collects every
    (conjunct, solution point) pair of its own annotation.  Clause order is
    source order, then time order.  A clause whose head constraint has an
    empty solution set contributes nothing (reported through ``warn``).
    """
    cal = p.calendar
    clauses: list[PClause] = []
    for cl in p.clauses:
        if not is_normal(cl.head_annot.constraint) or any(
            not is_normal(ann.constraint) for _, ann in cl.body
        ):
            raise NonNormalConstraint(
                f"clause at {cl.span or '?'} still has independent temporal variables; "
                f"ground them first"
            )
        sol0 = solve_constraint(cl.head_annot.constraint, cal)
        if not sol0:
            if warn is not None:
                warn(f"clause head {cl.head} has an empty solution set; no clauses emitted")
            continue
        body_pairs: list[tuple[BasicFormula, ProbInterval]] = []
        for f, ann in cl.body:
            for tj in solve_constraint(ann.constraint, cal):
                body_pairs.append((substitute_time(f, tj), ann.interval_at(cal, tj)))
        for ti in sol0:
            head = (
                TAtom(cl.head.predicate, cl.head.args, ti, cl.head.span)
                if isinstance(cl.head.time, TVar)
                else cl.head
            )
            clauses.append(PClause(head, cl.head_annot.interval_at(cal, ti), tuple(body_pairs)))
    pp = PProgram(tuple(clauses))
    if pp.is_ground:
        pp = PProgram(pp.clauses, herbrand_base(pp.clauses))
    return pp


def pprogram_to_ptprogram(pp: PProgram, cal: Calendar) -> PTProgram:
    """Re-express an unfolded program in clause syntax with Y=t annotations."""

    def annot(time: int, iv: ProbInterval) -> TPAnnotation:
        return TPAnnotation(
            Cmp(TVar("Y"), "=", TConst(time)),
            WeightFunction.list_of([iv.lo]),
            WeightFunction.list_of([iv.hi]),
        )

    clauses = []
    for cl in pp.clauses:
        head_time = cl.head.time
        if not isinstance(head_time, int):
            raise ValueError(f"unfolded head {cl.head} should be time-ground")
        body = tuple((f, annot(_formula_time(f, cal), iv)) for f, iv in cl.body)
        clauses.append(TPClause(cl.head, annot(head_time, cl.head_iv), body))
    return PTProgram(cal, tuple(clauses))


def _formula_time(f: BasicFormula, cal: Calendar) -> int:
    # A ground formula means the same thing under any singleton constraint, so
    # mixed atom times fall back to the first calendar point.
    times = {a.time for a in f.atoms if isinstance(a.time, int)}
    if len(times) == 1:
        return next(iter(times))
    return cal.first

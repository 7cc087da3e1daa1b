"""Possible worlds, world distributions, and satisfaction checking.

A world is a bitset over a Herbrand base; a distribution maps worlds to exact
rational masses summing to one.  Satisfaction of an unfolded program is the
interval check per clause; the clause-syntax checker evaluates the same
semantics through each annotation's solution set, which gives the test suite
two independent routes to the same verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .grounder import PProgram
from .model import BasicFormula, Connective, PTProgram, TAtom, solve_constraint, substitute_time

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class World:
    """Truth assignment over a base: bit i set means atom i is true."""

    mask: int
    base: object = field(repr=False)  # HerbrandBase or CompressedBase

    def __post_init__(self):
        if self.mask < 0 or self.mask >> len(self.base):
            raise ValueError(f"mask {self.mask:#x} outside the {len(self.base)}-atom base")

    @classmethod
    def from_atoms(cls, base, atoms: Iterable) -> "World":
        mask = 0
        for a in atoms:
            mask |= 1 << base.index_of(a)
        return cls(mask, base)

    @classmethod
    def empty(cls, base) -> "World":
        return cls(0, base)

    def truth(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def atoms(self) -> tuple:
        return tuple(a for i, a in enumerate(self.base.atoms) if self.mask >> i & 1)

    def __str__(self):
        return "{" + ", ".join(str(a) for a in self.atoms()) + "}"


def _formula_bits(f: BasicFormula, base) -> tuple[Connective, int]:
    bits = 0
    for a in f.atoms:
        bits |= 1 << base.index_of(a)
    return f.connective, bits


def _mask_satisfies(mask: int, connective: Connective, bits: int) -> bool:
    if connective is Connective.OR:
        return mask & bits != 0
    return mask & bits == bits


def world_satisfies(w: World, f: BasicFormula) -> bool:
    """Classical truth of a ground formula in one world."""
    connective, bits = _formula_bits(f, w.base)
    return _mask_satisfies(w.mask, connective, bits)


class WorldDistribution:
    """Sparse map from worlds to non-negative rational masses.

    Masses must sum to exactly one unless ``require_normalized`` is False
    (partial evolution profiles produce subnormalized densities).
    """

    def __init__(
        self,
        base,
        masses: Mapping,
        *,
        require_normalized: bool = True,
    ):
        self.base = base
        packed: dict[int, Fraction] = {}
        for key, value in masses.items():
            mask = key.mask if isinstance(key, World) else int(key)
            value = Fraction(value)
            if value < 0:
                raise ValueError(f"negative mass {value}")
            if value == 0:
                continue
            if mask < 0 or mask >> len(base):
                raise ValueError(f"world {mask:#x} outside the {len(base)}-atom base")
            packed[mask] = packed.get(mask, ZERO) + value
        self._masses = packed
        self.total = sum(packed.values(), ZERO)
        if require_normalized and self.total != 1:
            raise ValueError(f"world masses sum to {self.total}, not 1")

    @classmethod
    def point(cls, base, world: World | int = 0) -> "WorldDistribution":
        mask = world.mask if isinstance(world, World) else int(world)
        return cls(base, {mask: ONE})

    @classmethod
    def uniform(cls, base) -> "WorldDistribution":
        count = 1 << len(base)
        return cls(base, {m: Fraction(1, count) for m in range(count)})

    @property
    def is_normalized(self) -> bool:
        return self.total == 1

    def mass(self, world: World | int) -> Fraction:
        mask = world.mask if isinstance(world, World) else int(world)
        return self._masses.get(mask, ZERO)

    def items(self):
        for mask in sorted(self._masses):
            yield World(mask, self.base), self._masses[mask]

    def support_size(self) -> int:
        return len(self._masses)

    def __eq__(self, other):
        return (
            isinstance(other, WorldDistribution)
            and self.base == other.base
            and self._masses == other._masses
        )

    def __repr__(self):
        inner = ", ".join(f"{World(m, self.base)}: {v}" for m, v in sorted(self._masses.items()))
        return f"WorldDistribution({inner})"


def mass_of_atoms(ki: WorldDistribution, connective: Connective, atoms) -> Fraction:
    """Mass of the worlds where the atoms hold under the given connective."""
    bits = 0
    for a in atoms:
        bits |= 1 << ki.base.index_of(a)
    return sum(
        (v for m, v in ki._masses.items() if _mask_satisfies(m, connective, bits)), ZERO
    )


def formula_mass(ki: WorldDistribution, f: BasicFormula) -> Fraction:
    """Total mass of the worlds satisfying f."""
    return mass_of_atoms(ki, f.connective, f.atoms)


def atom_mass(ki: WorldDistribution, atom: TAtom) -> Fraction:
    return formula_mass(ki, BasicFormula.single(atom))


def ki_satisfies(pp: PProgram, ki: WorldDistribution) -> bool:
    """Interval satisfaction of an unfolded program: every clause holds with its
    head mass inside the head interval or some body conjunct mass outside its
    interval (exact comparisons)."""
    for cl in pp.clauses:
        head_ok = cl.head_iv.contains(atom_mass(ki, cl.head))
        if head_ok:
            continue
        body_violated = any(not iv.contains(formula_mass(ki, f)) for f, iv in cl.body)
        if not body_violated:
            return False
    return True


def ki_satisfies_tp(p: PTProgram, ki: WorldDistribution) -> bool:
    """Clause-syntax satisfaction: an annotated formula holds when the formula's
    mass lies inside [lower(t), upper(t)] at every solution point t of its
    constraint.  The program must be ground in object terms."""

    def annotated_holds(formula: BasicFormula, annot) -> bool:
        for t in solve_constraint(annot.constraint, p.calendar):
            iv = annot.interval_at(p.calendar, t)
            if not iv.contains(formula_mass(ki, substitute_time(formula, t))):
                return False
        return True

    for cl in p.clauses:
        head_ok = annotated_holds(BasicFormula.single(cl.head), cl.head_annot)
        if head_ok:
            continue
        body_ok = all(annotated_holds(f, ann) for f, ann in cl.body)
        if body_ok:
            return False
    return True


def is_model(pp_or_p, ki: WorldDistribution) -> bool:
    if isinstance(pp_or_p, PProgram):
        return ki_satisfies(pp_or_p, ki)
    return ki_satisfies_tp(pp_or_p, ki)

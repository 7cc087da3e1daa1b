"""Interval-PSAT solving over possible worlds.

A clause is satisfied when its head mass lies inside the head interval or some
body conjunct's mass falls strictly outside its interval.  The solver branches
over that disjunction per clause (HEAD_IN first, then per-conjunct low/high
violations) and decides each complete choice with exact linear programs.
Strict violations become closed rows shifted by epsilon; a program that is
infeasible with the shift but feasible at the boundary is reported as
UNKNOWN_EPS rather than silently classified.

Two reductions keep the LPs small without changing their answers:

* atoms are split into connected components of the constraint formulas, since
  masses in different components are realized independently (product measure);
* inside a component, worlds with the same satisfaction signature across all
  formulas are collapsed into one LP column carrying their count.

Witnesses are reassembled exactly: consistency witnesses couple the component
marginals segment-by-segment along the unit interval, and entropy witnesses
spread class masses uniformly over their worlds, which is the entropy-optimal
completion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import BaseTooLarge, InconsistentProgram, NonConvergence
from .grounder import HerbrandBase, PProgram
from .intervals import ONE, ZERO, ProbInterval
from .model import BasicFormula, Calendar, Connective, solve_constraint, substitute_time
from .parser import Query
from .simplex import INFEASIBLE, LPMode, solve_lp
from .worlds import WorldDistribution


class Verdict(Enum):
    CONSISTENT = "CONSISTENT"
    INCONSISTENT = "INCONSISTENT"
    UNKNOWN_EPS = "UNKNOWN_EPS"


class ChoiceKind(Enum):
    HEAD_IN = "HEAD_IN"
    BODY_LOW = "BODY_LOW"
    BODY_HIGH = "BODY_HIGH"


@dataclass(frozen=True)
class BranchChoice:
    kind: ChoiceKind
    conjunct: int | None = None

    def __str__(self):
        if self.kind is ChoiceKind.HEAD_IN:
            return "HEAD_IN"
        return f"{self.kind.value}({self.conjunct})"


@dataclass(frozen=True)
class SolveOptions:
    epsilon: Fraction = Fraction(1, 10**6)
    max_world_atoms: int = 16
    lp_mode: LPMode = LPMode.EXACT
    maxent_improvement: float = 1e-8
    maxent_max_iter: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_world_atoms < 1:
            raise ValueError("max_world_atoms must be at least 1")


@dataclass
class ConsistencyResult:
    verdict: Verdict
    witness: WorldDistribution | None
    branch_count: int
    epsilon: Fraction


@dataclass
class TightenResult:
    interval: ProbInterval
    branch_count: int
    boundary_sensitive: bool
    epsilon: Fraction


@dataclass
class TimeVerdict:
    time: int
    bounds: ProbInterval
    target: ProbInterval
    holds: bool


@dataclass
class EntailmentResult:
    entailed: bool
    vacuous: bool
    per_time: list[TimeVerdict] = field(default_factory=list)
    branch_count: int = 0
    epsilon: Fraction = ZERO


@dataclass
class MaxEntResult:
    distribution: WorldDistribution
    entropy: float
    branch_count: int


# --- world-space factorization ----------------------------------------------------


class _Component:
    """One connected block of atoms; worlds are local bitstrings over them."""

    def __init__(self, cid: int, atom_indices: tuple[int, ...]):
        self.cid = cid
        self.atoms = atom_indices  # global base indices, ascending
        self.k = len(atom_indices)
        self.space = 1 << self.k  # number of local worlds
        self.full = (1 << self.space) - 1  # bigint set of all local worlds
        self._atom_masks = [self._pattern(p) for p in range(self.k)]
        self.classes: list[tuple[int, int, int]] = []  # (members, count, rep world)

    def _pattern(self, p: int) -> int:
        half = 1 << p
        block = ((1 << half) - 1) << half
        length = half << 1
        while length < self.space:
            block |= block << length
            length <<= 1
        return block

    def formula_mask(self, connective: Connective, local_positions: list[int]) -> int:
        masks = [self._atom_masks[p] for p in local_positions]
        out = masks[0]
        for m in masks[1:]:
            out = (out | m) if connective is Connective.OR else (out & m)
        return out

    def split_classes(self, masks: list[int]):
        classes = [self.full]
        for m in masks:
            nxt = []
            for c in classes:
                inside = c & m
                outside = c ^ inside
                if inside:
                    nxt.append(inside)
                if outside:
                    nxt.append(outside)
            classes = nxt
        self.classes = [
            (c, c.bit_count(), (c & -c).bit_length() - 1) for c in classes
        ]

    def coefficients(self, mask: int) -> tuple[Fraction, ...]:
        return tuple(ONE if (mask >> rep) & 1 else ZERO for _, _, rep in self.classes)

    def global_mask(self, local_world: int) -> int:
        out = 0
        for p in range(self.k):
            if (local_world >> p) & 1:
                out |= 1 << self.atoms[p]
        return out

    def class_index_at(self, cumulative: list[Fraction], point: Fraction) -> int:
        # cumulative[i] = mass of classes[0..i-1]; point in [cumulative[i], cumulative[i+1])
        lo, hi = 0, len(cumulative) - 2
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if cumulative[mid] <= point:
                lo = mid
            else:
                hi = mid - 1
        return lo


@dataclass(frozen=True)
class _Row:
    fid: int
    sense: str  # "<=" or ">="
    rhs: Fraction


class _Engine:
    """Shared state for one solving session over a ground unfolded program."""

    def __init__(self, pp: PProgram, opts: SolveOptions, extra_formulas=()):
        if not pp.is_ground:
            raise ValueError("the solver needs a ground program; ground it first")
        atoms = list(pp.base.atoms) if pp.base is not None else []
        for f in extra_formulas:
            atoms.extend(f.atoms)
        for cl in pp.clauses:
            atoms.append(cl.head)
            for f, _ in cl.body:
                atoms.extend(f.atoms)
        self.base = HerbrandBase(atoms)
        if len(self.base) > opts.max_world_atoms:
            raise BaseTooLarge(len(self.base), opts.max_world_atoms)
        self.opts = opts
        self.pp = pp

        # Canonical formula registry: (connective, atom index set) -> fid.
        self._formula_ids: dict[tuple, int] = {}
        self._formula_atoms: list[tuple[Connective, frozenset[int]]] = []

        def register(f: BasicFormula) -> int:
            idxs = frozenset(self.base.index_of(a) for a in f.atoms)
            conn = f.connective if len(idxs) > 1 else Connective.SINGLE
            key = (conn, idxs)
            fid = self._formula_ids.get(key)
            if fid is None:
                fid = len(self._formula_atoms)
                self._formula_ids[key] = fid
                self._formula_atoms.append(key)
            return fid

        self.clauses: list[tuple[int, ProbInterval, list[tuple[int, ProbInterval]]]] = []
        for cl in pp.clauses:
            head_fid = register(BasicFormula.single(cl.head))
            body = [(register(f), iv) for f, iv in cl.body]
            self.clauses.append((head_fid, cl.head_iv, body))
        self.extra_fids = [register(f) for f in extra_formulas]

        # Connected components over atoms, via the registered formulas.
        n = len(self.base)
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for _, idxs in self._formula_atoms:
            it = iter(sorted(idxs))
            first = find(next(it))
            for other in it:
                r = find(other)
                if r != first:
                    parent[r] = first
        groups: dict[int, list[int]] = {}
        for a in range(n):
            groups.setdefault(find(a), []).append(a)
        self.components = [
            _Component(cid, tuple(sorted(members)))
            for cid, members in enumerate(groups[root] for root in sorted(groups))
        ]
        atom_comp = {}
        for comp in self.components:
            for local, a in enumerate(comp.atoms):
                atom_comp[a] = (comp.cid, local)

        # Per-formula component and local world mask; then signature classes.
        self._fid_comp: list[int] = []
        self._fid_mask: list[int] = []
        comp_masks: dict[int, list[int]] = {comp.cid: [] for comp in self.components}
        for conn, idxs in self._formula_atoms:
            cids = {atom_comp[a][0] for a in idxs}
            assert len(cids) == 1
            cid = next(iter(cids))
            comp = self.components[cid]
            mask = comp.formula_mask(conn, [atom_comp[a][1] for a in sorted(idxs)])
            self._fid_comp.append(cid)
            self._fid_mask.append(mask)
            if mask not in comp_masks[cid]:
                comp_masks[cid].append(mask)
        for comp in self.components:
            comp.split_classes(comp_masks[comp.cid])

        self._fid_coeffs = [
            self.components[self._fid_comp[fid]].coefficients(self._fid_mask[fid])
            for fid in range(len(self._formula_atoms))
        ]
        self._feasible_cache: dict = {}
        self._optimum_cache: dict = {}
        self._maxent_cache: dict = {}
        self.last_branch_count = 0

    # -- branch enumeration --

    def _choice_rows(self, clause, choice: BranchChoice, eps: Fraction) -> list[_Row] | None:
        """LP rows for one clause choice, or None when impossible outright."""
        head_fid, head_iv, body = clause
        rows: list[_Row] = []
        if choice.kind is ChoiceKind.HEAD_IN:
            if head_iv.lo > head_iv.hi:
                return None
            if head_iv.lo > 0:
                rows.append(_Row(head_fid, ">=", head_iv.lo))
            if head_iv.hi < 1:
                rows.append(_Row(head_fid, "<=", head_iv.hi))
            return rows
        fid, iv = body[choice.conjunct]
        if choice.kind is ChoiceKind.BODY_LOW:
            bound = iv.lo - eps
            if bound < 0:
                return None
            return [_Row(fid, "<=", bound)]
        bound = iv.hi + eps
        if bound > 1:
            return None
        return [_Row(fid, ">=", bound)]

    def _clause_choices(self, clause) -> list[BranchChoice]:
        _, _, body = clause
        out = [BranchChoice(ChoiceKind.HEAD_IN)]
        for k in range(len(body)):
            out.append(BranchChoice(ChoiceKind.BODY_LOW, k))
            out.append(BranchChoice(ChoiceKind.BODY_HIGH, k))
        return out

    def _branches(self, eps: Fraction):
        """Yield (choices, rows-per-component) for every box-consistent leaf.

        Boxes track the running interval each formula mass is pinned to; an
        empty box prunes the subtree, which subsumes fact-vs-body-violation
        conflicts without an LP call.
        """
        clauses = self.clauses
        boxes: dict[int, tuple[Fraction, Fraction]] = {}
        chosen_rows: list[list[_Row]] = []
        choices: list[BranchChoice] = []

        def rec(ci: int):
            if ci == len(clauses):
                by_comp: dict[int, set[_Row]] = {}
                for rows in chosen_rows:
                    for row in rows:
                        by_comp.setdefault(self._fid_comp[row.fid], set()).add(row)
                yield tuple(choices), {
                    cid: frozenset(rows) for cid, rows in by_comp.items()
                }
                return
            for choice in self._clause_choices(clauses[ci]):
                rows = self._choice_rows(clauses[ci], choice, eps)
                if rows is None:
                    continue
                touched: list[tuple[int, tuple[Fraction, Fraction]]] = []
                ok = True
                for row in rows:
                    key = row.fid
                    lo, hi = boxes.get(key, (ZERO, ONE))
                    if row.sense == ">=":
                        lo = max(lo, row.rhs)
                    else:
                        hi = min(hi, row.rhs)
                    if lo > hi:
                        ok = False
                        break
                    touched.append((key, boxes.get(key, (ZERO, ONE))))
                    boxes[key] = (lo, hi)
                if ok:
                    chosen_rows.append(rows)
                    choices.append(choice)
                    yield from rec(ci + 1)
                    choices.pop()
                    chosen_rows.pop()
                for key, old in reversed(touched):
                    boxes[key] = old

        yield from rec(0)

    # -- per-component LPs --

    def _lp_rows(self, comp: _Component, rows: frozenset[_Row]):
        out = [([ONE] * len(comp.classes), "=", ONE)]
        for row in sorted(rows, key=lambda r: (r.fid, r.sense, r.rhs)):
            out.append((list(self._fid_coeffs[row.fid]), row.sense, row.rhs))
        return out

    def _feasible(self, cid: int, rows: frozenset[_Row]):
        """Feasible class masses for one component, or None."""
        key = (cid, rows)
        if key in self._feasible_cache:
            return self._feasible_cache[key]
        comp = self.components[cid]
        result = solve_lp(
            len(comp.classes), self._lp_rows(comp, rows), mode=self.opts.lp_mode
        )
        x = None if result.status == INFEASIBLE else result.x
        self._feasible_cache[key] = x
        return x

    def _branch_solution(self, rows_by_comp) -> dict[int, list] | None:
        solution: dict[int, list] = {}
        for cid, rows in sorted(rows_by_comp.items()):
            x = self._feasible(cid, rows)
            if x is None:
                return None
            solution[cid] = x
        return solution

    def _optimum(self, cid: int, rows: frozenset[_Row], fid: int, maximize: bool):
        key = (cid, rows, fid, maximize)
        if key in self._optimum_cache:
            return self._optimum_cache[key]
        comp = self.components[cid]
        result = solve_lp(
            len(comp.classes),
            self._lp_rows(comp, rows),
            objective=list(self._fid_coeffs[fid]),
            maximize=maximize,
            mode=self.opts.lp_mode,
        )
        value = None if result.status == INFEASIBLE else result.value
        self._optimum_cache[key] = value
        return value

    # -- public-facing passes --

    def first_feasible(self, eps: Fraction):
        count = 0
        for choices, rows_by_comp in self._branches(eps):
            count += 1
            solution = self._branch_solution(rows_by_comp)
            if solution is not None:
                self.last_branch_count = count
                return choices, rows_by_comp, solution
        self.last_branch_count = count
        return None

    def optimize_formulas(self, fids, eps: Fraction):
        """Min/max mass per formula over every feasible branch; None if no branch."""
        bounds: dict[int, tuple[Fraction, Fraction] | None] = {fid: None for fid in fids}
        count = 0
        any_feasible = False
        for _, rows_by_comp in self._branches(eps):
            count += 1
            if self._branch_solution(rows_by_comp) is None:
                continue
            any_feasible = True
            for fid in fids:
                cid = self._fid_comp[fid]
                rows = rows_by_comp.get(cid, frozenset())
                lo = self._optimum(cid, rows, fid, maximize=False)
                hi = self._optimum(cid, rows, fid, maximize=True)
                cur = bounds[fid]
                if cur is None:
                    bounds[fid] = (lo, hi)
                else:
                    bounds[fid] = (min(cur[0], lo), max(cur[1], hi))
        self.last_branch_count = count
        return (bounds if any_feasible else None), count

    def feasible_rowsets(self, eps: Fraction):
        """Distinct feasible branch row systems, in first-seen order."""
        seen = []
        keys = set()
        count = 0
        for _, rows_by_comp in self._branches(eps):
            count += 1
            if self._branch_solution(rows_by_comp) is None:
                continue
            key = frozenset((cid, rows) for cid, rows in rows_by_comp.items())
            if key not in keys:
                keys.add(key)
                seen.append(rows_by_comp)
        self.last_branch_count = count
        return seen

    # -- witnesses --

    def couple(self, comp_solutions: dict[int, list]) -> WorldDistribution:
        """Assemble one joint distribution with the given component marginals.

        Components are coupled along the unit interval (shared quantiles), so
        the support stays near the sum of the component supports instead of
        their product.  Formula masses only depend on per-component marginals,
        hence satisfaction is unaffected by the coupling choice.
        """
        cumulatives: list[tuple[_Component, list[Fraction]]] = []
        points: set[Fraction] = {ZERO, ONE}
        for comp in self.components:
            x = comp_solutions.get(comp.cid)
            if x is None:
                zero_cls = next(i for i, (_, _, rep) in enumerate(comp.classes) if rep == 0)
                x = [ONE if i == zero_cls else ZERO for i in range(len(comp.classes))]
            cum = [ZERO]
            for v in x:
                cum.append(cum[-1] + Fraction(v))
            # Float-mode solutions may be off by rounding; rescale exactly.
            if cum[-1] != 1:
                if cum[-1] == 0:
                    raise ValueError("component solution sums to zero")
                cum = [c / cum[-1] for c in cum]
            cumulatives.append((comp, cum))
            points.update(cum)
        masses: dict[int, Fraction] = {}
        ordered = sorted(points)
        for lo, hi in zip(ordered, ordered[1:]):
            length = hi - lo
            if length == 0:
                continue
            gmask = 0
            for comp, cum in cumulatives:
                idx = comp.class_index_at(cum, lo)
                gmask |= comp.global_mask(comp.classes[idx][2])
            masses[gmask] = masses.get(gmask, ZERO) + length
        return WorldDistribution(self.base, masses)

    def spread_product(self, comp_qs: dict[int, list[Fraction]]) -> WorldDistribution:
        """Product over components with class masses spread uniformly inside
        each class (the entropy-maximal completion of the marginals)."""
        masses: dict[int, Fraction] = {0: ONE}
        for comp in self.components:
            q = comp_qs[comp.cid]
            expanded: list[tuple[int, Fraction]] = []
            for (members, size, _), qc in zip(comp.classes, q):
                if qc == 0:
                    continue
                share = Fraction(qc) / size
                left = members
                while left:
                    low = left & -left
                    expanded.append((comp.global_mask(low.bit_length() - 1), share))
                    left ^= low
            nxt: dict[int, Fraction] = {}
            for gmask, p in masses.items():
                for amask, share in expanded:
                    key = gmask | amask
                    nxt[key] = nxt.get(key, ZERO) + p * share
            masses = nxt
        return WorldDistribution(self.base, masses)

    # -- entropy maximization --

    def maxent_component(self, cid: int, rows: frozenset[_Row]):
        """Frank-Wolfe ascent of sum q*ln(n/q) over one component polytope.

        Directions come from exact LPs, steps from a float ternary line search
        rationalized back onto the segment, so iterates stay exactly feasible.
        """
        key = (cid, rows)
        if key in self._maxent_cache:
            return self._maxent_cache[key]
        comp = self.components[cid]
        counts = [size for _, size, _ in comp.classes]
        log_counts = [math.log(c) for c in counts]

        def entropy(q) -> float:
            total = 0.0
            for qc, ln_n in zip(q, log_counts):
                fq = float(qc)
                if fq > 0:
                    total += fq * (ln_n - math.log(fq))
            return total

        if not rows:
            total = comp.space
            q = [Fraction(c, total) for c in counts]
            result = (q, comp.k * math.log(2))
            self._maxent_cache[key] = result
            return result

        q = self._feasible(cid, rows)
        if q is None:
            raise InconsistentProgram("entropy maximization over an infeasible branch")
        q = [Fraction(v) for v in q]
        lp_rows = self._lp_rows(comp, rows)
        current = entropy(q)
        for _ in range(self.opts.maxent_max_iter):
            grad = [
                ln_n - math.log(max(float(qc), 1e-300)) - 1.0
                for qc, ln_n in zip(q, log_counts)
            ]
            objective = [Fraction(g).limit_denominator(10**9) for g in grad]
            lp = solve_lp(
                len(comp.classes), lp_rows, objective=objective, maximize=True,
                mode=self.opts.lp_mode,
            )
            if lp.status == INFEASIBLE:
                raise InconsistentProgram("entropy maximization lost feasibility")
            s = [Fraction(v) for v in lp.x]
            direction = [sv - qv for sv, qv in zip(s, q)]
            qf = [float(v) for v in q]
            df = [float(v) for v in direction]

            def on_segment(gamma: float) -> float:
                return entropy([a + gamma * b for a, b in zip(qf, df)])

            lo, hi = 0.0, 1.0
            for _ in range(80):
                m1 = lo + (hi - lo) / 3
                m2 = hi - (hi - lo) / 3
                if on_segment(m1) < on_segment(m2):
                    lo = m1
                else:
                    hi = m2
            gamma = Fraction((lo + hi) / 2).limit_denominator(10**12)
            gamma = min(max(gamma, ZERO), ONE)
            candidate = [qv + gamma * dv for qv, dv in zip(q, direction)]
            gain = entropy(candidate) - current
            if gain > 0:
                q = candidate
                current += gain
            if gain < self.opts.maxent_improvement:
                break
        else:
            raise NonConvergence(
                f"entropy maximization hit the {self.opts.maxent_max_iter}-sweep cap"
            )
        result = (q, current)
        self._maxent_cache[key] = result
        return result


# --- public operations --------------------------------------------------------------


def check_consistency(pp: PProgram, opts: SolveOptions = SolveOptions()) -> ConsistencyResult:
    """Search the clause branches for a feasible world distribution."""
    engine = _Engine(pp, opts)
    found = engine.first_feasible(opts.epsilon)
    count = engine.last_branch_count
    if found is not None:
        _, _, solution = found
        witness = engine.couple(solution)
        return ConsistencyResult(Verdict.CONSISTENT, witness, count, opts.epsilon)
    if engine.first_feasible(ZERO) is not None:
        return ConsistencyResult(Verdict.UNKNOWN_EPS, None, count, opts.epsilon)
    return ConsistencyResult(Verdict.INCONSISTENT, None, count, opts.epsilon)


def tighten(
    pp: PProgram, f: BasicFormula, opts: SolveOptions = SolveOptions()
) -> TightenResult:
    """Tightest probability interval for f across all models (epsilon-closed)."""
    engine = _Engine(pp, opts, extra_formulas=[f])
    fid = engine.extra_fids[0]
    bounds, count = engine.optimize_formulas([fid], opts.epsilon)
    if bounds is None:
        raise InconsistentProgram("tighten requires a consistent program")
    lo, hi = bounds[fid]
    probe, _ = engine.optimize_formulas([fid], opts.epsilon / 2)
    sensitive = probe is None or probe[fid] != (lo, hi)
    return TightenResult(ProbInterval(lo, hi), count, sensitive, opts.epsilon)


def entails(
    pp: PProgram,
    query: Query,
    calendar: Calendar,
    opts: SolveOptions = SolveOptions(),
) -> EntailmentResult:
    """Check that every model keeps the query formula inside its target interval
    at every solution point of the query constraint."""
    if query.annot is None:
        raise ValueError("entailment needs an annotated query")
    sol = solve_constraint(query.annot.constraint, calendar)
    if not sol:
        engine = _Engine(pp, opts)
        if engine.first_feasible(opts.epsilon) is None:
            raise InconsistentProgram("entailment is undefined for an inconsistent program")
        return EntailmentResult(
            True, True, [], engine.last_branch_count, opts.epsilon
        )
    instances = [substitute_time(query.formula, t) for t in sol]
    engine = _Engine(pp, opts, extra_formulas=instances)
    bounds, count = engine.optimize_formulas(list(engine.extra_fids), opts.epsilon)
    if bounds is None:
        raise InconsistentProgram("entailment is undefined for an inconsistent program")
    per_time: list[TimeVerdict] = []
    for t, fid in zip(sol, engine.extra_fids):
        lo, hi = bounds[fid]
        target = query.annot.interval_at(calendar, t)
        per_time.append(
            TimeVerdict(t, ProbInterval(lo, hi), target, target.contains_interval(ProbInterval(lo, hi)))
        )
    return EntailmentResult(all(v.holds for v in per_time), False, per_time, count, opts.epsilon)


def strong_witness(pp: PProgram, opts: SolveOptions = SolveOptions()) -> WorldDistribution | None:
    """A model keeping every annotated formula inside its interval, or None.

    This is stricter than consistency: no clause is allowed to escape through
    a body violation.  Useful where a construction presumes per-formula
    satisfaction rather than per-clause satisfaction.
    """
    engine = _Engine(pp, opts)
    rows: list[_Row] = []
    for head_fid, head_iv, body in engine.clauses:
        for fid, iv in [(head_fid, head_iv)] + body:
            if iv.lo > iv.hi:
                return None
            if iv.lo > 0:
                rows.append(_Row(fid, ">=", iv.lo))
            if iv.hi < 1:
                rows.append(_Row(fid, "<=", iv.hi))
    by_comp: dict[int, set[_Row]] = {}
    for row in rows:
        by_comp.setdefault(engine._fid_comp[row.fid], set()).add(row)
    solution = engine._branch_solution({cid: frozenset(rs) for cid, rs in by_comp.items()})
    if solution is None:
        return None
    return engine.couple(solution)


def max_entropy_model(pp: PProgram, opts: SolveOptions = SolveOptions()) -> MaxEntResult:
    """The model with the greatest entropy among all feasible branches."""
    engine = _Engine(pp, opts)
    rowsets = engine.feasible_rowsets(opts.epsilon)
    count = engine.last_branch_count
    if not rowsets:
        raise InconsistentProgram("no feasible branch to maximize entropy over")
    best_qs: dict[int, list[Fraction]] | None = None
    best_h = -1.0
    for rows_by_comp in rowsets:
        total = 0.0
        qs: dict[int, list[Fraction]] = {}
        for comp in engine.components:
            rows = rows_by_comp.get(comp.cid, frozenset())
            q, h = engine.maxent_component(comp.cid, rows)
            qs[comp.cid] = q
            total += h
        if total > best_h:
            best_h = total
            best_qs = qs
    distribution = engine.spread_product(best_qs)
    return MaxEntResult(distribution, best_h, count)

import math
import random
from fractions import Fraction as F

import pytest

from conftest import load_program, load_unfolded
from generators import rand_pprogram, small_base
from oracles import grid_distributions
from tplp.errors import BaseTooLarge, InconsistentProgram, NonConvergence
from tplp.grounder import GroundingMode, HerbrandBase, PClause, PProgram, ground_program, unfold
from tplp.intervals import ProbInterval
from tplp.model import BasicFormula, TAtom
from tplp.parser import parse_program, parse_query
from tplp.psat import (
    SolveOptions,
    Verdict,
    check_consistency,
    entails,
    max_entropy_model,
    tighten,
)
from tplp.simplex import LPMode
from tplp.worlds import WorldDistribution, atom_mass, ki_satisfies


def single(pred, t=1, args=()):
    return BasicFormula.single(TAtom(pred, args, t))


class TestCheckConsistency:
    def test_p0_consistent_with_exact_witness(self):
        pp = load_unfolded("p0.tpl")
        res = check_consistency(pp)
        assert res.verdict is Verdict.CONSISTENT
        assert ki_satisfies(pp, res.witness)

    def test_p1_inconsistent(self):
        pp = load_unfolded("p1.tpl")
        assert check_consistency(pp).verdict is Verdict.INCONSISTENT

    def test_empty_program_consistent(self):
        pp = PProgram((), HerbrandBase([]))
        res = check_consistency(pp)
        assert res.verdict is Verdict.CONSISTENT
        assert res.witness.total == 1

    def test_boundary_case_reported_unknown(self):
        pp = load_unfolded("boundary.tpl")
        assert check_consistency(pp).verdict is Verdict.UNKNOWN_EPS

    def test_boundary_becomes_consistent_with_tiny_epsilon(self):
        # shrinking epsilon does not help here: the conflict is pinned exactly
        pp = load_unfolded("boundary.tpl")
        res = check_consistency(pp, SolveOptions(epsilon=F(1, 10**9)))
        assert res.verdict is Verdict.UNKNOWN_EPS

    def test_base_cap(self):
        pp = load_unfolded("shipping.tpl")
        with pytest.raises(BaseTooLarge):
            check_consistency(pp, SolveOptions(max_world_atoms=8))

    def test_witness_deterministic(self):
        pp = load_unfolded("p0.tpl")
        w1 = check_consistency(pp).witness
        w2 = check_consistency(pp).witness
        assert list(w1.items()) == list(w2.items())

    def test_shipping_consistent_at_15_atoms(self):
        pp = load_unfolded("shipping.tpl")
        res = check_consistency(pp)
        assert res.verdict is Verdict.CONSISTENT
        assert ki_satisfies(pp, res.witness)

    def test_random_witnesses_are_exact_models(self):
        rng = random.Random(407)
        consistent_seen = 0
        for _ in range(60):
            pp = rand_pprogram(rng, small_base(rng.randint(2, 4)), n_clauses=rng.randint(1, 3))
            res = check_consistency(pp)
            if res.verdict is Verdict.CONSISTENT:
                assert ki_satisfies(pp, res.witness)
                consistent_seen += 1
        assert consistent_seen >= 20


class TestGridOracle:
    """One-sided soundness: whenever a grid distribution is a model, the
    solver must report CONSISTENT."""

    def _random_small_pprogram(self, rng, n_atoms):
        base = small_base(n_atoms)
        return rand_pprogram(rng, base, n_clauses=rng.randint(1, 3))

    def test_two_atom_exhaustive(self):
        rng = random.Random(401)
        exercised = 0
        for _ in range(30):
            pp = self._random_small_pprogram(rng, 2)
            grid_model = None
            for masses in grid_distributions(4, 20):
                ki = WorldDistribution(pp.base, dict(enumerate(masses)))
                if ki_satisfies(pp, ki):
                    grid_model = ki
                    break
            if grid_model is None:
                continue
            assert check_consistency(pp).verdict is Verdict.CONSISTENT
            exercised += 1
        assert exercised >= 10

    def test_three_atom_sampled(self):
        rng = random.Random(402)
        exercised = 0
        for _ in range(8):
            pp = self._random_small_pprogram(rng, 3)
            grid_model = None
            for _ in range(4000):
                cuts = sorted(rng.randint(0, 20) for _ in range(7))
                masses = [F(b - a, 20) for a, b in zip([0] + cuts, cuts + [20])]
                ki = WorldDistribution(pp.base, dict(enumerate(masses)))
                if ki_satisfies(pp, ki):
                    grid_model = ki
                    break
            if grid_model is None:
                continue
            assert check_consistency(pp).verdict is Verdict.CONSISTENT
            exercised += 1
        assert exercised >= 3


class TestAgainstBruteForce:
    """Differential check: the factored engine vs the explicit-world oracle."""

    def test_random_programs_agree(self):
        from oracles import BruteForce

        rng = random.Random(408)
        consistent_cases = 0
        for _ in range(40):
            base = small_base(rng.randint(2, 4))
            pp = rand_pprogram(rng, base, n_clauses=rng.randint(1, 3))
            target = single(base.atoms[0].predicate, base.atoms[0].time)
            oracle = BruteForce(pp, extra_formulas=[target])
            engine_verdict = check_consistency(pp).verdict
            assert (engine_verdict is Verdict.CONSISTENT) == oracle.consistent()
            if engine_verdict is not Verdict.CONSISTENT:
                continue
            consistent_cases += 1
            bounds = tighten(pp, target).interval
            lo, hi = oracle.tighten(target)
            assert abs(float(bounds.lo) - lo) <= 1e-6
            assert abs(float(bounds.hi) - hi) <= 1e-6
        assert consistent_cases >= 10


class TestTighten:
    def test_p0_body_branch_infeasible(self):
        pp = load_unfolded("p0.tpl")
        res = tighten(pp, single("b"))
        assert (res.interval.lo, res.interval.hi) == (F(2, 5), F(3, 5))

    def test_single_fact_returns_interval_verbatim(self):
        pp = load_unfolded("mx.tpl")
        res = tighten(pp, single("a"))
        assert (res.interval.lo, res.interval.hi) == (F(1, 5), F(4, 5))

    def test_fact_atom_exact_for_random_programs(self):
        rng = random.Random(403)
        for _ in range(40):
            lo, hi = sorted([F(rng.randint(0, 20), 20), F(rng.randint(0, 20), 20)])
            atom = TAtom("a", (), 1)
            pp = PProgram(
                (PClause(atom, ProbInterval(lo, hi)),), HerbrandBase([atom])
            )
            res = tighten(pp, single("a"))
            assert (res.interval.lo, res.interval.hi) == (lo, hi)

    def test_inconsistent_program_raises(self):
        pp = load_unfolded("p1.tpl")
        with pytest.raises(InconsistentProgram):
            tighten(pp, single("a"))

    def test_monotone_under_added_clauses(self):
        rng = random.Random(404)
        trials = 0
        while trials < 30:
            base = small_base(3)
            pp = rand_pprogram(rng, base, n_clauses=2)
            extra = rand_pprogram(rng, base, n_clauses=1).clauses
            stronger = PProgram(pp.clauses + extra, base)
            target = single(base.atoms[0].predicate, base.atoms[0].time)
            try:
                wide = tighten(pp, target)
                narrow = tighten(stronger, target)
            except InconsistentProgram:
                continue
            assert wide.interval.lo <= narrow.interval.lo
            assert narrow.interval.hi <= wide.interval.hi
            trials += 1

    def test_unconstrained_atom_is_full_interval(self):
        pp = load_unfolded("p0.tpl")
        res = tighten(pp, single("zz", 2))
        assert (res.interval.lo, res.interval.hi) == (F(0), F(1))

    def test_tighten_stays_in_unit_interval(self):
        rng = random.Random(405)
        for _ in range(20):
            pp = rand_pprogram(rng, small_base(3), n_clauses=2)
            try:
                res = tighten(pp, single("a"))
            except InconsistentProgram:
                continue
            assert 0 <= res.interval.lo <= res.interval.hi <= 1


class TestEntails:
    def _shipping(self):
        p = load_program("shipping.tpl")
        return p, unfold(ground_program(p, GroundingMode.RELEVANT))

    def test_exact_interval_entailed(self):
        p, pp = self._shipping()
        q = parse_query("?entail arrived(letter,paris)@Y : <Y=3, [0.3], [0.4]>.").query
        res = entails(pp, q, p.calendar)
        assert res.entailed and not res.vacuous
        assert len(res.per_time) == 1
        assert (res.per_time[0].bounds.lo, res.per_time[0].bounds.hi) == (F(3, 10), F(2, 5))

    def test_tighter_target_not_entailed(self):
        p, pp = self._shipping()
        q = parse_query("?entail arrived(letter,paris)@Y : <Y=3, [0.35], [0.4]>.").query
        assert not entails(pp, q, p.calendar).entailed

    def test_empty_solution_set_vacuous(self):
        p = load_program("p0.tpl")
        pp = load_unfolded("p0.tpl")
        q = parse_query("?entail a@Y : <Y>9, uniform, uniform>.").query
        res = entails(pp, q, p.calendar)
        assert res.entailed and res.vacuous

    def test_inconsistent_program_raises_even_for_vacuous(self):
        p = load_program("p1.tpl")
        pp = load_unfolded("p1.tpl")
        q = parse_query("?entail a@Y : <Y>9, uniform, uniform>.").query
        with pytest.raises(InconsistentProgram):
            entails(pp, q, p.calendar)

    def test_antitone_in_program_strength(self):
        p = load_program("p0.tpl")
        pp = load_unfolded("p0.tpl")
        stronger_text = (
            "calendar 1..2.\n"
            "a@Y : <Y=1, [0.5], [0.7]>.\n"
            "b@Y : <Y=1, [0.4], [0.6]> :- a@Y1 : <Y1=1, [0.5], [0.7]>.\n"
            "b@Y : <Y=1, [0.45], [0.8]>.\n"
        )
        sp = parse_program(stronger_text).program
        spp = unfold(sp)
        queries = [
            "?entail b@Y : <Y=1, [0.4], [0.6]>.",
            "?entail a@Y : <Y=1, [0.5], [0.7]>.",
            "?entail a@Y and b@Y : <Y=1, [0], [0.7]>.",
        ]
        for text in queries:
            q = parse_query(text).query
            if entails(pp, q, p.calendar).entailed:
                assert entails(spp, q, sp.calendar).entailed


class TestMaxEnt:
    def test_wide_fact_maximum_at_half(self):
        pp = load_unfolded("mx.tpl")
        res = max_entropy_model(pp)
        pr = atom_mass(res.distribution, TAtom("a", (), 1))
        assert abs(float(pr) - 0.5) < 1e-4
        assert abs(res.entropy - math.log(2)) < 1e-4
        assert ki_satisfies(pp, res.distribution)

    def test_point_fact_forced(self):
        text = "calendar 1..1. a@Y : <Y=1, [0.9], [0.9]>.\n"
        pp = unfold(parse_program(text).program)
        res = max_entropy_model(pp)
        pr = atom_mass(res.distribution, TAtom("a", (), 1))
        assert pr == F(9, 10)
        expected = -(0.9 * math.log(0.9) + 0.1 * math.log(0.1))
        assert abs(res.entropy - expected) < 1e-9

    def test_empty_program_over_one_atom_is_uniform(self):
        base = HerbrandBase([TAtom("a", (), 1)])
        pp = PProgram((), base)
        res = max_entropy_model(pp)
        assert res.distribution.mass(0) == F(1, 2)
        assert res.distribution.mass(1) == F(1, 2)
        assert abs(res.entropy - math.log(2)) < 1e-12

    def test_dominates_rejection_samples(self):
        pp = load_unfolded("mx.tpl")
        res = max_entropy_model(pp)
        rng = random.Random(406)
        accepted = 0
        while accepted < 100:
            p = F(rng.randint(0, 2**12), 2**12)
            ki = WorldDistribution(pp.base, {0: 1 - p, 1: p})
            if not ki_satisfies(pp, ki):
                continue
            accepted += 1
            h = 0.0
            for _, mass in ki.items():
                h -= float(mass) * math.log(float(mass))
            assert res.entropy + 1e-9 >= h

    def test_inconsistent_raises(self):
        pp = load_unfolded("p1.tpl")
        with pytest.raises(InconsistentProgram):
            max_entropy_model(pp)

    def test_iteration_cap_raises(self):
        pp = load_unfolded("mx.tpl")
        with pytest.raises(NonConvergence):
            max_entropy_model(pp, SolveOptions(maxent_max_iter=0))

    def test_entropy_pushes_to_nearest_boundary(self):
        # binary entropy is increasing below one half, so [0, 0.2] lands at 0.2
        text = "calendar 1..1.\na@Y : <Y=1, [0], [0.2]>.\n"
        pp = unfold(parse_program(text).program)
        res = max_entropy_model(pp)
        pr = atom_mass(res.distribution, TAtom("a", (), 1))
        assert abs(float(pr) - 0.2) < 1e-6


class TestFloatMode:
    def test_verdicts_match_exact_on_fixtures(self):
        for name, expected in (
            ("p0.tpl", Verdict.CONSISTENT),
            ("p1.tpl", Verdict.INCONSISTENT),
            ("mx.tpl", Verdict.CONSISTENT),
        ):
            pp = load_unfolded(name)
            res = check_consistency(pp, SolveOptions(lp_mode=LPMode.FLOAT))
            assert res.verdict is expected

    def test_tighten_matches_exact_within_tolerance(self):
        pp = load_unfolded("shipping.tpl")
        f = BasicFormula.single(TAtom("arrived", ("letter", "paris"), 3))
        exact = tighten(pp, f)
        approx = tighten(pp, f, SolveOptions(lp_mode=LPMode.FLOAT))
        assert abs(float(exact.interval.lo) - float(approx.interval.lo)) < 1e-6
        assert abs(float(exact.interval.hi) - float(approx.interval.hi)) < 1e-6


class TestSolveOptions:
    def test_epsilon_positive(self):
        with pytest.raises(ValueError):
            SolveOptions(epsilon=0)

    def test_cap_positive(self):
        with pytest.raises(ValueError):
            SolveOptions(max_world_atoms=0)

import random
from fractions import Fraction as F

import pytest

from conftest import load_program, load_unfolded
from generators import rand_distribution, rand_tp_program
from tplp.errors import BaseTooLarge, NonNormalConstraint, UniverseEmpty
from tplp.grounder import (
    GroundingMode,
    HerbrandBase,
    ground_program,
    ground_temporal_variables,
    herbrand_base,
    pprogram_to_ptprogram,
    unfold,
)
from tplp.model import (
    BasicFormula,
    Calendar,
    Cmp,
    ObjVar,
    PTProgram,
    TAtom,
    TConst,
    TPAnnotation,
    TPClause,
    TRef,
    TVar,
    WeightFunction,
    solve_constraint,
)
from tplp.parser import parse_program, render_program
from tplp.worlds import ki_satisfies, ki_satisfies_tp


def _clauses_for(p, predicate):
    return [cl for cl in p.clauses if cl.head.predicate == predicate]


class TestGroundProgram:
    def test_relevant_keeps_fact_supported_pairs(self):
        p = load_program("shipping.tpl")
        g = ground_program(p, GroundingMode.RELEVANT)
        arrived = [cl for cl in g.clauses if cl.head.predicate == "arrived"]
        pairs = {cl.head.args for cl in arrived}
        assert pairs == {("shoes", "rome"), ("letter", "paris")}
        # the express rule fires only for the letter
        express = [cl for cl in arrived if len(cl.body) == 2]
        assert {cl.head.args for cl in express} == {("letter", "paris")}
        assert len(g.clauses) == 8

    def test_full_expands_over_all_constants(self):
        p = load_program("shipping.tpl")
        g = ground_program(p, GroundingMode.FULL)
        express = [
            cl
            for cl in g.clauses
            if cl.head.predicate == "arrived" and len(cl.body) == 2
        ]
        # Place is pinned to paris, Item ranges over all four constants
        assert {cl.head.args for cl in express} == {
            (c, "paris") for c in ("letter", "paris", "rome", "shoes")
        }
        plain = [
            cl
            for cl in g.clauses
            if cl.head.predicate == "arrived" and len(cl.body) == 1
        ]
        assert len(plain) == 2 * 16

    def test_variable_free_program_is_identity(self):
        text = "calendar 1..2.\na@Y : <Y=1, [0.5], [0.6]>.\nb@1 : <Y=2, [0.1], [0.2]> :- a@Y1 : <Y1=1, #, #>.\n"
        p = parse_program(text).program
        for mode in GroundingMode:
            assert ground_program(p, mode).clauses == p.clauses

    def test_universe_empty(self):
        cal = Calendar.from_range(1, 2)
        clause = TPClause(
            TAtom("p", (ObjVar("X"),), TVar("Y")),
            TPAnnotation(Cmp(TVar("Y"), "=", TConst(1)), WeightFunction.sharp(), WeightFunction.sharp()),
        )
        program = PTProgram(cal, (clause,))
        with pytest.raises(UniverseEmpty):
            ground_program(program, GroundingMode.FULL)

    def test_declared_constants_feed_the_universe(self):
        text = "calendar 1..1. constants k. p(X)@Y : <Y=1, #, #>.\n"
        p = parse_program(text).program
        g = ground_program(p, GroundingMode.FULL)
        assert g.clauses[0].head.args == ("k",)

    def test_independent_temporal_variables_grounded(self):
        text = (
            "calendar 1..3.\n"
            "a@Y : <Y=1, #, #> :- b@Y1 : <Y1 = Y2, uniform, uniform>.\n"
        )
        p = parse_program(text).program
        g = ground_temporal_variables(p)
        assert len(g.clauses) == 3
        bounds = sorted(
            solve_constraint(cl.body[0][1].constraint, p.calendar)[0] for cl in g.clauses
        )
        assert bounds == [1, 2, 3]


class TestUnfold:
    def test_shipping_first_rule(self):
        p = load_program("shipping.tpl")
        pp = unfold(ground_temporal_variables(p))
        first_three = pp.clauses[:3]
        ivs = [(cl.head_iv.lo, cl.head_iv.hi) for cl in first_three]
        assert ivs == [
            (F(1, 4), F(2, 5)),
            (F(3, 20), F(6, 25)),
            (F(1, 10), F(4, 25)),
        ]
        times = [cl.head.time for cl in first_three]
        assert times == [3, 4, 5]
        for cl in first_three:
            assert len(cl.body) == 1
            f, iv = cl.body[0]
            assert f.atoms[0].predicate == "sent"
            assert f.atoms[0].time == 1
            assert (iv.lo, iv.hi) == (F(9, 10), F(1))
            # object variables survive temporal unfolding
            assert f.atoms[0].args == (ObjVar("Item"), ObjVar("Place"))

    def test_fact_unfolds_to_point_interval(self):
        p = parse_program("calendar 1..8. sent(shoes,rome)@Y : <Y=1, #, #>.").program
        pp = unfold(p)
        assert len(pp.clauses) == 1
        cl = pp.clauses[0]
        assert cl.body == ()
        assert (cl.head_iv.lo, cl.head_iv.hi) == (F(1), F(1))
        assert cl.head.time == 1

    def test_body_expands_inside_every_head_instance(self):
        text = (
            "calendar 1..4.\n"
            "a@Y : <Y:1~2, [0.5,0.5], [1,1]> :- b@Y1 : <Y1:1~2, [0.3,0.3], [0.9,0.9]>.\n"
        )
        pp = unfold(parse_program(text).program)
        assert len(pp.clauses) == 2
        for cl in pp.clauses:
            assert len(cl.body) == 2
            assert [f.atoms[0].time for f, _ in cl.body] == [1, 2]

    def test_empty_head_solution_warns_and_drops(self):
        text = "calendar 1..2.\na@Y : <Y=1, #, #>.\n"
        p = parse_program(text).program
        vacuous = TPClause(
            TAtom("b", (), TVar("Y")),
            TPAnnotation(Cmp(TVar("Y"), ">", TConst(9)), WeightFunction.uniform(), WeightFunction.uniform()),
        )
        warnings = []
        pp = unfold(PTProgram(p.calendar, p.clauses + (vacuous,)), warn=warnings.append)
        assert len(pp.clauses) == 1
        assert warnings and "empty solution set" in warnings[0]

    def test_count_law(self):
        rng = random.Random(301)
        for _ in range(60):
            cal = Calendar.from_range(1, rng.randint(1, 6))
            p = rand_tp_program(rng, cal, n_clauses=rng.randint(1, 4))
            pp = unfold(p)
            expected_clauses = sum(
                len(solve_constraint(cl.head_annot.constraint, cal)) for cl in p.clauses
            )
            assert len(pp.clauses) == expected_clauses
            index = 0
            for cl in p.clauses:
                n_heads = len(solve_constraint(cl.head_annot.constraint, cal))
                body_size = sum(
                    len(solve_constraint(ann.constraint, cal)) for _, ann in cl.body
                )
                for _ in range(n_heads):
                    assert len(pp.clauses[index].body) == body_size
                    index += 1

    def test_non_normal_rejected(self):
        clause = TPClause(
            TAtom("a", (), TVar("Y")),
            TPAnnotation(
                Cmp(TVar("Y"), "<=", TRef(TVar("Y1"))),
                WeightFunction.uniform(),
                WeightFunction.uniform(),
            ),
        )
        program = PTProgram(Calendar.from_range(1, 3), (clause,))
        with pytest.raises(NonNormalConstraint):
            unfold(program)

    def test_unfolded_renders_and_reparses(self):
        p = load_program("shipping.tpl")
        pp = unfold(ground_temporal_variables(p))
        text = render_program(pprogram_to_ptprogram(pp, p.calendar))
        assert parse_program(text).ok


class TestHerbrandBase:
    def test_p0_base(self):
        pp = load_unfolded("p0.tpl")
        assert [str(a) for a in pp.base] == ["a@1", "b@1"]

    def test_empty_program_base(self):
        assert len(herbrand_base([])) == 0

    def test_shipping_relevant_base_is_15(self):
        pp = load_unfolded("shipping.tpl")
        assert len(pp.base) == 15

    def test_cap_enforced(self):
        pp = load_unfolded("shipping.tpl")
        with pytest.raises(BaseTooLarge):
            herbrand_base(pp, max_atoms=10)

    def test_deterministic_order_and_dedup(self):
        a1 = TAtom("b", (), 2)
        a2 = TAtom("a", ("x",), 1)
        base = HerbrandBase([a1, a2, a1])
        assert [str(a) for a in base] == ["a(x)@1", "b@2"]
        assert base.index_of(a1) == 1

    def test_rejects_non_ground(self):
        with pytest.raises(ValueError):
            HerbrandBase([TAtom("a", (ObjVar("X"),), 1)])


class TestModelPreservation:
    def test_clause_form_agrees_with_unfolding(self):
        rng = random.Random(302)
        agreements = 0
        for _ in range(80):
            cal = Calendar.from_range(1, rng.randint(1, 3))
            p = rand_tp_program(rng, cal, n_clauses=rng.randint(1, 3))
            pp = unfold(p)
            if pp.base is None or len(pp.base) == 0 or len(pp.base) > 10:
                continue
            ki = rand_distribution(rng, pp.base)
            assert ki_satisfies_tp(p, ki) == ki_satisfies(pp, ki)
            agreements += 1
        assert agreements >= 40


class TestRelevantSoundness:
    def _random_datalog_program(self, rng):
        """Fact-supported rules over two constants, small enough for FULL."""
        cal = Calendar.from_range(1, 2)
        constants = ["k1", "k2"]
        sharp = lambda: TPAnnotation(
            Cmp(TVar("Y"), "=", TConst(1)),
            WeightFunction.list_of([F(rng.randint(0, 10), 10)]),
            WeightFunction.list_of([F(1)]),
        )
        clauses = []
        facts = [("p", rng.choice(constants)), ("q", rng.choice(constants))]
        for pred, const in facts:
            clauses.append(TPClause(TAtom(pred, (const,), TVar("Y")), sharp()))
        for _ in range(rng.randint(1, 2)):
            head = TAtom("r", (ObjVar("X"),), TVar("Y"))
            body_pred = rng.choice(["p", "q"])
            body = (
                (
                    BasicFormula.single(TAtom(body_pred, (ObjVar("X"),), TVar("Y1"))),
                    TPAnnotation(
                        Cmp(TVar("Y1"), "=", TConst(1)),
                        WeightFunction.list_of([F(rng.randint(1, 9), 10)]),
                        WeightFunction.list_of([F(1)]),
                    ),
                ),
            )
            clauses.append(TPClause(head, sharp(), body))
        return PTProgram(cal, tuple(clauses))

    def test_relevant_instances_subset_of_full(self):
        rng = random.Random(303)
        for _ in range(40):
            p = self._random_datalog_program(rng)
            full = ground_program(p, GroundingMode.FULL)
            relevant = ground_program(p, GroundingMode.RELEVANT)
            assert set(relevant.clauses) <= set(full.clauses)

    def test_verdicts_agree_on_fact_supported_programs(self):
        from tplp.psat import check_consistency

        rng = random.Random(304)
        for _ in range(25):
            p = self._random_datalog_program(rng)
            full = unfold(ground_program(p, GroundingMode.FULL))
            relevant = unfold(ground_program(p, GroundingMode.RELEVANT))
            v_full = check_consistency(full).verdict
            v_rel = check_consistency(relevant).verdict
            assert v_full == v_rel

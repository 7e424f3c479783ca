import pytest

from priorule.lang import Goal, Negative, Positive, TellEq
from priorule.oracle import (
    BudgetExceeded,
    ExecState,
    LAState,
    canonical_exec_state,
    initial_state,
    la_applicable,
    la_reachable_finals,
    la_run,
    la_state_from_goal,
    la_step,
    store_atoms,
    wp_applicable,
    wp_reachable_finals,
    wp_run,
    wp_step,
)
from priorule.parser import parse_chrrp, parse_la
from priorule.terms import Compound, Int, Var, atom


def catom(functor, *args):
    return Compound(functor, tuple(args))


DIJKSTRA_LA = """
d1 @ 1   : source(V) => dist(V,0).
d2 @ 1   : dist(V,D1), dist(V,D2), D2 < D1 => del(dist(V,D1)).
d3 @ D+2 : dist(V,D), e(V,C,U) => dist(U,D+C).
"""

LEQ_CHR = """
1 :: idempotence  @ leq(X,Y) \\ leq(X,Y) <=> true.
2 :: reflexivity  @ leq(X,X) <=> true.
2 :: antisymmetry @ leq(X,Y), leq(Y,X) <=> X = Y.
3 :: transitivity @ leq(X,Y), leq(Y,Z) ==> leq(X,Z).
"""

AND_CHR = """
1 :: a1 @ and(0,Y,Z) <=> Z = 0.
1 :: a2 @ and(X,0,Z) <=> Z = 0.
1 :: a3 @ and(X,1,Z) <=> X = Z.
1 :: a4 @ and(1,Y,Z) <=> Y = Z.
1 :: a5 @ and(X,X,Z) <=> X = Z.
1 :: a6 @ and(X,Y,1) <=> X = 1, Y = 1.
"""

MERGESORT_CHR = """
1 :: ms1 @ arrow(X,A) \\ arrow(X,B) <=> A < B | arrow(A,B).
2 :: ms2 @ merge(N,A), merge(N,B) <=> A < B | merge(2*N+1,A), arrow(A,B).
3 :: ms3 @ number(X) <=> merge(0,X).
"""


def la_goal(*atoms_):
    return Goal(tuple(atoms_))


class TestLAApplicable:
    def setup_method(self):
        self.program, _ = parse_la(DIJKSTRA_LA)

    def test_source_only_d1(self):
        state = la_state_from_goal(la_goal(catom("source", atom("a")),
                                           catom("e", atom("a"), Int(3), atom("b"))))
        insts = la_applicable(state, self.program)
        assert len(insts) == 1
        assert insts[0].rule_name == "d1" and insts[0].priority_value == 1

    def test_empty_program(self):
        state = la_state_from_goal(la_goal(catom("a")))
        from priorule.lang import LAProgram
        assert la_applicable(state, LAProgram(())) == []

    def test_present_conclusion_suppressed(self):
        # d3's conclusion already asserted: instance must be excluded
        state = LAState(frozenset({
            catom("dist", atom("a"), Int(0)),
            catom("e", atom("a"), Int(3), atom("b")),
            catom("dist", atom("b"), Int(3)),
        }))
        insts = la_applicable(state, self.program)
        assert all(i.rule_name != "d3" for i in insts)

    def test_deleted_antecedent_excluded(self):
        state = LAState(
            positive=frozenset({catom("dist", atom("a"), Int(0)),
                                catom("e", atom("a"), Int(3), atom("b"))}),
            negative=frozenset({catom("dist", atom("a"), Int(0))}))
        insts = la_applicable(state, self.program)
        assert insts == []


class TestLARun:
    def setup_method(self):
        self.program, _ = parse_la(DIJKSTRA_LA)

    def test_source_step(self):
        state = la_state_from_goal(la_goal(catom("source", atom("a"))))
        nxt = la_step(state, self.program)
        assert catom("dist", atom("a"), Int(0)) in nxt.positive

    def test_final_state_none(self):
        state = la_state_from_goal(la_goal(catom("e", atom("a"), Int(1), atom("b"))))
        assert la_step(state, self.program) is None

    def test_three_node_line(self):
        goal = la_goal(catom("source", atom("a")),
                       catom("e", atom("a"), Int(1), atom("b")),
                       catom("e", atom("b"), Int(1), atom("c")))
        final = la_run(goal, self.program)
        live = {a for a in final.positive if a not in final.negative
                and a.functor == "dist"}
        assert live == {catom("dist", atom("a"), Int(0)),
                        catom("dist", atom("b"), Int(1)),
                        catom("dist", atom("c"), Int(2))}

    def test_shortcut_edge_deleted(self):
        goal = la_goal(catom("source", atom("a")),
                       catom("e", atom("a"), Int(1), atom("b")),
                       catom("e", atom("b"), Int(1), atom("c")),
                       catom("e", atom("a"), Int(5), atom("c")))
        final = la_run(goal, self.program)
        assert catom("dist", atom("c"), Int(5)) in final.positive
        assert catom("dist", atom("c"), Int(5)) in final.negative
        assert final.holds_positive(catom("dist", atom("c"), Int(2)))

    def test_empty_goal(self):
        final = la_run(la_goal(), self.program)
        assert final == LAState()

    def test_monotone_growth(self):
        goal = la_goal(catom("source", atom("a")),
                       catom("e", atom("a"), Int(2), atom("b")))
        state = la_state_from_goal(goal)
        while True:
            nxt = la_step(state, self.program)
            if nxt is None:
                break
            assert state.positive <= nxt.positive
            assert state.negative <= nxt.negative
            state = nxt

    def test_budget(self):
        program, _ = parse_la("loop @ 1 : a(X) => a(f(X)).")
        with pytest.raises(BudgetExceeded) as err:
            la_run(la_goal(catom("a", atom("z"))), program, budget=50)
        assert err.value.partial_state is not None

    def test_tie_break_both_reachable(self):
        # two priority-1 instances; each successor reachable under some policy
        program, _ = parse_la("r1 @ 1 : s(X) => p(X).\nr2 @ 1 : s(X) => q(X).")
        state = la_state_from_goal(la_goal(catom("s", atom("a"))))
        first = la_step(state, program)
        assert catom("p", atom("a")) in first.positive
        pick_last = lambda cands: cands[-1]
        second = la_step(state, program, tie_break=pick_last)
        assert catom("q", atom("a")) in second.positive


class TestWpSemantics:
    def test_introduce(self):
        program, _ = parse_chrrp(LEQ_CHR)
        state = initial_state(Goal((catom("leq", atom("a"), atom("b")),)))
        nxt = wp_step(state, program)
        assert nxt.store[1] == catom("leq", atom("a"), atom("b"))
        assert nxt.next_id == 2

    def test_antisymmetry_beats_transitivity(self):
        program, _ = parse_chrrp(LEQ_CHR)
        state = ExecState([], store={1: catom("leq", Var("X"), Var("Y")),
                                     2: catom("leq", Var("Y"), Var("X"))})
        insts = wp_applicable(state, program)
        assert insts[0].rule_name == "antisymmetry"
        assert insts[0].priority_value == 2
        nxt = wp_step(state, program)
        while nxt is not None:
            state = nxt
            nxt = wp_step(state, program)
        assert state.builtins.same_class("X", "Y")

    def test_propagation_history(self):
        program, _ = parse_chrrp("1 :: t @ p(X) ==> q(X).")
        state = ExecState([], store={1: catom("p", atom("a"))})
        nxt = wp_step(state, program)  # Apply t
        nxt = wp_step(nxt, program)    # Introduce q(a)
        assert ("t", (1,)) in nxt.history
        # no re-fire: state is final
        assert wp_step(nxt, program) is None

    def test_and_program_entails(self):
        program, _ = parse_chrrp(AND_CHR)
        final = wp_run(Goal((catom("and", Int(0), Var("Y"), Var("Z")),)), program)
        assert final.store == {}
        assert final.builtins.walk(Var("Z")) == Int(0)

    def test_empty_goal_final(self):
        program, _ = parse_chrrp(AND_CHR)
        final = wp_run(Goal(()), program)
        assert final.store == {} and not final.failed

    def test_merge_sort_sorted(self):
        program, _ = parse_chrrp(MERGESORT_CHR)
        values = [4, 1, 3, 2]
        goal = Goal(tuple(catom("number", Int(v)) for v in values))
        final = wp_run(goal, program)
        arrows = {(c.args[0].value, c.args[1].value)
                  for c in store_atoms(final) if c.functor == "arrow"}
        expect = sorted(values)
        assert arrows == {(a, b) for a, b in zip(expect, expect[1:])}
        merges = [c for c in store_atoms(final) if c.functor == "merge"]
        assert len(merges) == 1 and merges[0].args[0] == Int(3)

    def test_priority_soundness_invariant(self):
        program, _ = parse_chrrp(LEQ_CHR)
        goal = Goal((catom("leq", Var("A"), Var("B")),
                     catom("leq", Var("B"), Var("C")),
                     catom("leq", Var("C"), Var("A"))))
        state = initial_state(goal)
        while True:
            if not state.goal and not state.failed:
                insts = wp_applicable(state, program)
                if insts:
                    best = insts[0].priority_value
                    assert all(i.priority_value >= best for i in insts)
            nxt = wp_step(state, program)
            if nxt is None:
                break
            state = nxt

    def test_no_duplicate_propagation_fires(self):
        program, _ = parse_chrrp(LEQ_CHR)
        goal = Goal((catom("leq", atom("a"), atom("b")),
                     catom("leq", atom("b"), atom("c")),
                     catom("leq", atom("c"), atom("d"))))
        trace = []
        wp_run(goal, program, trace=trace)
        fired = [(ev[1], ev[3]) for ev in trace if ev[0] == "APPLY"]
        assert len(fired) == len(set(fired))


class TestReachableFinals:
    def test_confluent_leq_singleton(self):
        program, _ = parse_chrrp(LEQ_CHR)
        goal = Goal((catom("leq", Var("X"), Var("Y")),
                     catom("leq", Var("Y"), Var("X")),
                     catom("leq", Var("X"), Var("X"))))
        finals = wp_reachable_finals(goal, program)
        assert len(finals) == 1
        (final,) = finals
        store_canon, _, failed = final
        assert store_canon == () and not failed

    def test_empty_goal(self):
        program, _ = parse_chrrp(LEQ_CHR)
        finals = wp_reachable_finals(Goal(()), program)
        assert len(finals) == 1

    def test_la_dijkstra_singleton_projection(self):
        program, _ = parse_la(DIJKSTRA_LA)
        goal = la_goal(catom("source", atom("a")),
                       catom("e", atom("a"), Int(1), atom("b")),
                       catom("e", atom("a"), Int(3), atom("b")))
        finals = la_reachable_finals(goal, program)
        projections = {frozenset(a for a in f.positive if a not in f.negative
                                 and a.functor == "dist")
                       for f in finals}
        assert len(projections) == 1

    def test_wp_subset_of_unrestricted(self):
        # every priority-respecting Apply is valid without the priority clause
        program, _ = parse_chrrp(LEQ_CHR)
        goal = Goal((catom("leq", atom("a"), atom("b")),
                     catom("leq", atom("b"), atom("a"))))
        state = initial_state(goal)
        while True:
            if not state.goal and not state.failed:
                restricted = wp_applicable(state, program)
                if restricted:
                    unrestricted = {(i.rule_name, i.all_ids)
                                    for i in wp_applicable(state, program,
                                                           respect_history=False)}
                    assert (restricted[0].rule_name, restricted[0].all_ids) in unrestricted
            nxt = wp_step(state, program)
            if nxt is None:
                break
            state = nxt


class TestCanonical:
    def test_identifier_invariance(self):
        a = ExecState([], store={1: catom("p", atom("x")), 2: catom("q", atom("y"))})
        b = ExecState([], store={7: catom("q", atom("y")), 9: catom("p", atom("x"))})
        assert canonical_exec_state(a) == canonical_exec_state(b)

    def test_variable_renaming_invariance(self):
        a = ExecState([], store={1: catom("p", Var("X"), Var("Y"))})
        b = ExecState([], store={1: catom("p", Var("U"), Var("W"))})
        assert canonical_exec_state(a) == canonical_exec_state(b)

    def test_goal_vars_tracked(self):
        a = ExecState([])
        a.builtins.tell_eq(Var("X"), Int(1))
        b = ExecState([])
        b.builtins.tell_eq(Var("X"), Int(2))
        assert canonical_exec_state(a, ["X"]) != canonical_exec_state(b, ["X"])

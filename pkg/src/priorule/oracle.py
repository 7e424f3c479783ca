"""Naive reference interpreters for both rule languages.

These are deliberately brute-force: every step re-enumerates all fireable
rule instances over the whole database/store. They serve as the oracles the
optimized engine and the translators are validated against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .lang import (
    ChrProgram,
    ChrRule,
    Compare,
    Goal,
    LAProgram,
    LARule,
    Negative,
    Positive,
    TellEq,
)
from .terms import (
    DISENTAILED,
    ENTAILED,
    UNKNOWN,
    BuiltinStore,
    Comparison,
    Compound,
    Int,
    Substitution,
    Term,
    Var,
    eval_arith,
    is_ground,
    match,
    match_entailed,
    normalize_arith,
    rename_apart,
    rename_term,
    term_key,
    term_vars,
)

DEFAULT_BUDGET = 10 ** 6


class BudgetExceeded(Exception):
    def __init__(self, message, partial_state=None):
        super().__init__(message)
        self.partial_state = partial_state


class DerivationFailed(Exception):
    """The built-in store became inconsistent."""


Trace = Optional[List[Tuple]]


def _emit(trace: Trace, event: Tuple):
    if trace is not None:
        trace.append(event)


# ---------------------------------------------------------------------------
# Bottom-up (LA) semantics


@dataclass(frozen=True)
class LAState:
    positive: FrozenSet[Compound] = frozenset()
    negative: FrozenSet[Compound] = frozenset()

    def holds_positive(self, a: Compound) -> bool:
        return a in self.positive and a not in self.negative

    def add(self, conclusions: Iterable) -> "LAState":
        pos = set(self.positive)
        neg = set(self.negative)
        for item in conclusions:
            if isinstance(item, Negative):
                neg.add(item.atom)
            else:
                pos.add(item.atom)
        return LAState(frozenset(pos), frozenset(neg))


@dataclass(frozen=True)
class RuleInstance:
    rule_index: int
    rule_name: str
    priority_value: int
    matched: Tuple[Compound, ...]
    conclusion: Tuple
    sort_key: Tuple = field(compare=False, default=())


def la_state_from_goal(goal: Goal) -> LAState:
    pos, neg = set(), set()
    for item in goal.items:
        if isinstance(item, TellEq):
            raise ValueError("tell constraints are not valid database items")
        if not is_ground(item):
            raise ValueError("database items must be ground: %r" % (item,))
        item = normalize_arith(item)
        if item.functor == "del" and len(item.args) == 1:
            neg.add(item.args[0])
        else:
            pos.add(item)
    return LAState(frozenset(pos), frozenset(neg))


def _ground_comparison(comp: Comparison, theta: Substitution) -> bool:
    probe = BuiltinStore()
    inst = Comparison(comp.op, theta.apply(comp.lhs), theta.apply(comp.rhs))
    return probe.entails(inst) == ENTAILED


def _instantiate_conclusion(rule: LARule, theta: Substitution):
    out = []
    for item in rule.conclusion:
        atom = normalize_arith(theta.apply(item.atom))
        out.append(Negative(atom) if isinstance(item, Negative) else Positive(atom))
    return out


def la_applicable(state: LAState, program: LAProgram) -> List[RuleInstance]:
    """All fireable instances (ignoring the priority-minimality clause),
    sorted by (priority, rule index, matched atoms)."""
    instances: List[RuleInstance] = []
    usable = [a for a in state.positive if a not in state.negative]
    by_pred: Dict[Tuple[str, int], List[Compound]] = {}
    for a in usable:
        by_pred.setdefault((a.functor, len(a.args)), []).append(a)
    neg_by_pred: Dict[Tuple[str, int], List[Compound]] = {}
    for a in state.negative:
        neg_by_pred.setdefault((a.functor, len(a.args)), []).append(a)

    for idx, rule in enumerate(program.rules):
        for theta, matched in _la_matches(rule, by_pred, neg_by_pred):
            conclusion = _instantiate_conclusion(rule, theta)
            if _conclusion_implied(conclusion, state):
                continue
            prio = eval_arith(theta.apply(rule.priority))
            key = (prio, idx, tuple(term_key(m) for m in matched))
            instances.append(RuleInstance(idx, rule.name, prio, tuple(matched),
                                          tuple(conclusion), key))
    instances.sort(key=lambda inst: inst.sort_key)
    return instances


def _conclusion_implied(conclusion, state: LAState) -> bool:
    for item in conclusion:
        if isinstance(item, Negative):
            if item.atom not in state.negative:
                return False
        else:
            if item.atom not in state.positive:
                return False
    return True


def _la_matches(rule: LARule, by_pred, neg_by_pred):
    def extend(i: int, theta: Substitution, matched: List[Compound]):
        if i == len(rule.antecedents):
            yield theta, list(matched)
            return
        ant = rule.antecedents[i]
        if isinstance(ant, Compare):
            if _ground_comparison(ant.comparison, theta):
                yield from extend(i + 1, theta, matched)
            return
        pool = by_pred if isinstance(ant, Positive) else neg_by_pred
        key = (ant.atom.functor, len(ant.atom.args))
        for cand in pool.get(key, ()):
            theta2 = match(ant.atom, cand, theta)
            if theta2 is None:
                continue
            matched.append(cand)
            yield from extend(i + 1, theta2, matched)
            matched.pop()

    yield from extend(0, Substitution(), [])


def la_step(state: LAState, program: LAProgram,
            tie_break: Callable[[List[RuleInstance]], RuleInstance] = None,
            trace: Trace = None) -> Optional[LAState]:
    """Fire one highest-priority instance; None when the state is final."""
    instances = la_applicable(state, program)
    if not instances:
        return None
    best_prio = instances[0].priority_value
    candidates = [i for i in instances if i.priority_value == best_prio]
    chosen = tie_break(candidates) if tie_break else candidates[0]
    _emit(trace, ("APPLY", chosen.rule_name, chosen.priority_value, chosen.matched))
    return state.add(chosen.conclusion)


def la_run(goal: Union[Goal, LAState], program: LAProgram,
           budget: int = DEFAULT_BUDGET, tie_break=None, trace: Trace = None) -> LAState:
    state = goal if isinstance(goal, LAState) else la_state_from_goal(goal)
    for _ in range(budget):
        nxt = la_step(state, program, tie_break, trace)
        if nxt is None:
            return state
        state = nxt
    raise BudgetExceeded("no fixpoint within %d steps" % budget, state)


def la_reachable_finals(goal: Union[Goal, LAState], program: LAProgram,
                        bound: int = 20000) -> Set[LAState]:
    """All final states reachable under any tie-breaking policy."""
    start = goal if isinstance(goal, LAState) else la_state_from_goal(goal)
    seen = {start}
    frontier = [start]
    finals: Set[LAState] = set()
    while frontier:
        state = frontier.pop()
        instances = la_applicable(state, program)
        if not instances:
            finals.add(state)
            continue
        best = instances[0].priority_value
        for inst in instances:
            if inst.priority_value != best:
                break
            nxt = state.add(inst.conclusion)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
                if len(seen) > bound:
                    raise BudgetExceeded("state bound exceeded", state)
    return finals


# ---------------------------------------------------------------------------
# Priority store-rewriting (omega_p) semantics


class ExecState:
    """The execution tuple: pending goal, identified store, builtin store,
    propagation history and next free identifier."""

    def __init__(self, goal_items: Sequence, store=None, builtins=None,
                 history=None, next_id: int = 1):
        self.goal: List = list(goal_items)
        self.store: Dict[int, Compound] = dict(store or {})
        self.builtins: BuiltinStore = builtins if builtins is not None else BuiltinStore()
        self.history: Set[Tuple[str, Tuple[int, ...]]] = set(history or ())
        self.next_id = next_id

    @property
    def failed(self) -> bool:
        return self.builtins.failed

    def copy(self) -> "ExecState":
        return ExecState(list(self.goal), dict(self.store), self.builtins.copy(),
                         set(self.history), self.next_id)

    def signature(self):
        walked = tuple(sorted((i, term_key(self.builtins.walk(c)))
                              for i, c in self.store.items()))
        goal_sig = tuple(
            term_key(self.builtins.walk(i)) if isinstance(i, Compound)
            else ("tell", term_key(i.lhs), term_key(i.rhs))
            for i in self.goal)
        return (goal_sig, walked, frozenset(self.history), self.next_id, self.failed)

    def __repr__(self):
        return "<ExecState store=%d goal=%d next=%d%s>" % (
            len(self.store), len(self.goal), self.next_id,
            " FAILED" if self.failed else "")


@dataclass(frozen=True)
class WpInstance:
    rule_index: int
    rule_name: str
    priority_value: int
    kept_ids: Tuple[int, ...]
    removed_ids: Tuple[int, ...]
    body: Tuple
    sort_key: Tuple = field(compare=False, default=())

    @property
    def all_ids(self):
        return self.kept_ids + self.removed_ids


def _rename_rule(rule: ChrRule, salt: str) -> ChrRule:
    names: List[str] = []
    for h in rule.heads:
        term_vars(h, names)
    for g in rule.guard:
        term_vars(g.lhs, names)
        term_vars(g.rhs, names)
    for b in rule.body:
        if isinstance(b, TellEq):
            term_vars(b.lhs, names)
            term_vars(b.rhs, names)
        else:
            term_vars(b, names)
    term_vars(rule.priority, names)
    mapping = rename_apart(names)
    ren = lambda t: rename_term(t, mapping)
    return ChrRule(
        ren(rule.priority), rule.name,
        tuple(ren(h) for h in rule.kept),
        tuple(ren(h) for h in rule.removed),
        tuple(Comparison(g.op, ren(g.lhs), ren(g.rhs)) for g in rule.guard),
        tuple(TellEq(ren(b.lhs), ren(b.rhs)) if isinstance(b, TellEq) else ren(b)
              for b in rule.body),
    )


def wp_applicable(state: ExecState, program: ChrProgram,
                  respect_history: bool = True) -> List[WpInstance]:
    """All Apply candidates (ignoring priority minimality), sorted by
    (priority, rule index, matched identifiers)."""
    instances: List[WpInstance] = []
    by_pred: Dict[Tuple[str, int], List[int]] = {}
    for cid, c in state.store.items():
        by_pred.setdefault((c.functor, len(c.args)), []).append(cid)
    for key in by_pred:
        by_pred[key].sort()

    for idx, rule in enumerate(program.rules):
        fresh = _rename_rule(rule, str(idx))
        heads = list(fresh.kept) + list(fresh.removed)
        n_kept = len(fresh.kept)

        def extend(i: int, theta: Substitution, ids: List[int]):
            if i == len(heads):
                for g in fresh.guard:
                    inst = Comparison(g.op, theta.apply(g.lhs), theta.apply(g.rhs))
                    if state.builtins.entails(inst) != ENTAILED:
                        return
                try:
                    prio = eval_arith(theta.apply(fresh.priority),
                                      state.builtins.resolver())
                except Exception:
                    return
                tup = (rule.name, tuple(ids))
                if respect_history and tup in state.history:
                    return
                body = tuple(
                    TellEq(theta.apply(b.lhs), theta.apply(b.rhs))
                    if isinstance(b, TellEq) else theta.apply(b)
                    for b in fresh.body)
                key = (prio, idx, tuple(ids))
                instances.append(WpInstance(idx, rule.name, prio,
                                            tuple(ids[:n_kept]), tuple(ids[n_kept:]),
                                            body, key))
                return
            pat = heads[i]
            for cid in by_pred.get((pat.functor, len(pat.args)), ()):
                if cid in ids:
                    continue
                status, theta2 = match_entailed(pat, state.store[cid],
                                                state.builtins, theta)
                if status != ENTAILED:
                    continue
                ids.append(cid)
                extend(i + 1, theta2, ids)
                ids.pop()

        extend(0, Substitution(), [])
    instances.sort(key=lambda inst: inst.sort_key)
    return instances


def wp_apply(state: ExecState, inst: WpInstance) -> ExecState:
    nxt = state.copy()
    for cid in inst.removed_ids:
        del nxt.store[cid]
    nxt.history.add((inst.rule_name, inst.all_ids))
    nxt.goal = list(inst.body) + nxt.goal
    return nxt


def wp_step(state: ExecState, program: ChrProgram, tie_break=None,
            trace: Trace = None) -> Optional[ExecState]:
    """One transition: Solve or Introduce while the goal is non-empty, a
    highest-priority Apply otherwise. None when final."""
    if state.failed:
        return None
    if state.goal:
        item = state.goal[0]
        nxt = state.copy()
        nxt.goal.pop(0)
        if isinstance(item, TellEq):
            nxt.builtins.tell_eq(item.lhs, item.rhs)
            _emit(trace, ("SOLVE", item))
        else:
            intro = normalize_arith(item, nxt.builtins.resolver())
            nxt.store[nxt.next_id] = intro
            _emit(trace, ("INTRODUCE", intro, nxt.next_id))
            nxt.next_id += 1
        return nxt
    instances = wp_applicable(state, program)
    if not instances:
        return None
    best = instances[0].priority_value
    candidates = [i for i in instances if i.priority_value == best]
    chosen = tie_break(candidates) if tie_break else candidates[0]
    _emit(trace, ("APPLY", chosen.rule_name, chosen.priority_value, chosen.all_ids))
    return wp_apply(state, chosen)


def initial_state(goal: Goal) -> ExecState:
    return ExecState(list(goal.items))


def wp_run(goal: Union[Goal, ExecState], program: ChrProgram,
           budget: int = DEFAULT_BUDGET, tie_break=None, trace: Trace = None) -> ExecState:
    state = goal if isinstance(goal, ExecState) else initial_state(goal)
    for _ in range(budget):
        nxt = wp_step(state, program, tie_break, trace)
        if nxt is None:
            return state
        state = nxt
    raise BudgetExceeded("no final state within %d transitions" % budget, state)


def _drain_goal(state: ExecState) -> ExecState:
    while state.goal and not state.failed:
        item = state.goal.pop(0)
        if isinstance(item, TellEq):
            state.builtins.tell_eq(item.lhs, item.rhs)
        else:
            state.store[state.next_id] = normalize_arith(item, state.builtins.resolver())
            state.next_id += 1
    return state


def wp_reachable_finals(goal: Union[Goal, ExecState], program: ChrProgram,
                        bound: int = 20000):
    """All canonical final states reachable under any Apply tie-breaking.
    Goal items are processed left to right (goal order is confluent modulo
    canonicalization)."""
    start = (goal if isinstance(goal, ExecState) else initial_state(goal)).copy()
    start = _drain_goal(start)
    seen = {start.signature()}
    frontier = [start]
    finals = set()
    explored = 0
    while frontier:
        state = frontier.pop()
        explored += 1
        if explored > bound:
            raise BudgetExceeded("state bound exceeded", state)
        if state.failed:
            finals.add(canonical_exec_state(state))
            continue
        instances = wp_applicable(state, program)
        if not instances:
            finals.add(canonical_exec_state(state))
            continue
        best = instances[0].priority_value
        for inst in instances:
            if inst.priority_value != best:
                break
            nxt = _drain_goal(wp_apply(state, inst))
            sig = nxt.signature()
            if sig not in seen:
                seen.add(sig)
                frontier.append(nxt)
    return finals


# ---------------------------------------------------------------------------
# Canonical forms


def canonical_exec_state(state: ExecState, goal_var_names: Sequence[str] = ()):
    """Hashable canonical form: walked store multiset with canonically
    numbered variables, plus the walked image of the given goal variables.
    Identifiers, history and pending-goal bookkeeping are dropped."""
    walked = [state.builtins.walk(c) for c in state.store.values()]
    binds = [(name, state.builtins.walk(Var(name))) for name in goal_var_names]

    mapping: Dict[str, int] = {}

    def keyed(term: Term):
        if isinstance(term, Var):
            return (0, mapping.get(term.name, -1))
        return term_key(term) if not isinstance(term, Compound) else (
            2, term.functor, len(term.args), tuple(keyed(a) for a in term.args))

    def scan(term: Term):
        if isinstance(term, Var):
            if term.name not in mapping:
                mapping[term.name] = len(mapping)
        elif isinstance(term, Compound):
            for a in term.args:
                scan(a)

    for _ in range(3):
        mapping.clear()
        for _, t in binds:
            scan(t)
        for t in sorted(walked, key=keyed):
            scan(t)

    def rename(term: Term) -> Term:
        if isinstance(term, Var):
            return Var("_c%d" % mapping[term.name])
        if isinstance(term, Compound) and term.args:
            return Compound(term.functor, tuple(rename(a) for a in term.args))
        return term

    store_canon = tuple(sorted((rename(t) for t in walked), key=term_key))
    bind_canon = tuple((name, rename(t)) for name, t in binds)
    return (store_canon, bind_canon, state.failed)


def store_atoms(state: ExecState) -> List[Compound]:
    return [state.builtins.walk(c) for c in state.store.values()]

"""Rule ASTs for the two languages plus the intermediate join-order form.

Covers: prioritized bottom-up rules over a growing assertion database
("LA" rules, `name @ prio : antecedents => conclusion.`) and prioritized
multi-headed store-rewriting rules ("CHR" rules with `::` priorities).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .terms import (
    Comparison,
    Compound,
    Int,
    Substitution,
    Term,
    Var,
    fresh_var,
    is_ground,
    term_vars,
)


class ScopeError(Exception):
    """A rule violates a variable-scoping requirement."""


# ---------------------------------------------------------------------------
# LA side


@dataclass(frozen=True)
class Positive:
    atom: Compound


@dataclass(frozen=True)
class Negative:
    """A del(...) antecedent or conclusion item."""
    atom: Compound


@dataclass(frozen=True)
class Compare:
    comparison: Comparison


Antecedent = Union[Positive, Negative, Compare]
Conclusion = Union[Positive, Negative]


@dataclass(frozen=True)
class LARule:
    name: str
    priority: Term
    antecedents: Tuple[Antecedent, ...]
    conclusion: Tuple[Conclusion, ...]

    def user_antecedents(self) -> List[Union[Positive, Negative]]:
        return [a for a in self.antecedents if not isinstance(a, Compare)]

    def comparisons(self) -> List[Comparison]:
        return [a.comparison for a in self.antecedents if isinstance(a, Compare)]

    def is_dynamic(self) -> bool:
        return bool(term_vars(self.priority))


@dataclass(frozen=True)
class LAProgram:
    rules: Tuple[LARule, ...]

    def predicates(self) -> List[Tuple[str, int]]:
        seen: List[Tuple[str, int]] = []
        for rule in self.rules:
            for item in list(rule.antecedents) + list(rule.conclusion):
                if isinstance(item, (Positive, Negative)):
                    key = (item.atom.functor, len(item.atom.args))
                    if key not in seen:
                        seen.append(key)
        return seen


# ---------------------------------------------------------------------------
# CHR side


@dataclass(frozen=True)
class TellEq:
    lhs: Term
    rhs: Term


BodyItem = Union[Compound, TellEq]


@dataclass(frozen=True)
class ChrRule:
    priority: Term
    name: str
    kept: Tuple[Compound, ...]
    removed: Tuple[Compound, ...]
    guard: Tuple[Comparison, ...]
    body: Tuple[BodyItem, ...]

    @property
    def heads(self) -> Tuple[Compound, ...]:
        return self.kept + self.removed

    def kind(self) -> str:
        if not self.removed:
            return "propagation"
        if not self.kept:
            return "simplification"
        return "simpagation"

    def is_dynamic(self) -> bool:
        return bool(term_vars(self.priority))


@dataclass(frozen=True)
class ChrProgram:
    rules: Tuple[ChrRule, ...]

    def predicates(self) -> List[Tuple[str, int]]:
        seen: List[Tuple[str, int]] = []
        for rule in self.rules:
            for a in rule.heads:
                key = (a.functor, len(a.args))
                if key not in seen:
                    seen.append(key)
            for b in rule.body:
                if isinstance(b, Compound):
                    key = (b.functor, len(b.args))
                    if key not in seen:
                        seen.append(key)
        return seen


@dataclass(frozen=True)
class Goal:
    """Ordered multiset of initiating items: user atoms, del(...) atoms for
    the LA language, and tell equalities for the CHR language."""
    items: Tuple[Union[Compound, TellEq], ...] = ()

    def is_ground(self) -> bool:
        return all(isinstance(i, Compound) and is_ground(i) for i in self.items)


# ---------------------------------------------------------------------------
# Intermediate form: signed heads with hoisted guard conjuncts


@dataclass(frozen=True)
class IntermediateItem:
    sign: str  # '+' kept, '-' removed
    head: Compound
    post_guard: Tuple[Comparison, ...] = ()


@dataclass(frozen=True)
class IntermediateRule:
    priority: Term
    name: str
    items: Tuple[IntermediateItem, ...]
    body: Tuple[BodyItem, ...]

    def is_dynamic(self) -> bool:
        return bool(term_vars(self.priority))


# ---------------------------------------------------------------------------
# Scope validation


def check_la_rule(rule: LARule) -> None:
    bound: Set[str] = set()
    if not rule.antecedents:
        raise ScopeError("rule %s has no antecedents" % rule.name)
    for i, ant in enumerate(rule.antecedents):
        if isinstance(ant, Compare):
            used = set(term_vars(ant.comparison.lhs)) | set(term_vars(ant.comparison.rhs))
            missing = used - bound
            if missing:
                raise ScopeError(
                    "rule %s: comparison %r uses variables %s not bound by earlier "
                    "antecedents" % (rule.name, ant.comparison, sorted(missing)))
        else:
            bound.update(term_vars(ant.atom))
    for item in rule.conclusion:
        missing = set(term_vars(item.atom)) - bound
        if missing:
            raise ScopeError("rule %s: conclusion uses unbound variables %s"
                             % (rule.name, sorted(missing)))
    prio_missing = set(term_vars(rule.priority)) - bound
    if prio_missing:
        raise ScopeError("rule %s: priority uses variables %s not bound by any "
                         "antecedent" % (rule.name, sorted(prio_missing)))


def check_chr_rule(rule: ChrRule) -> None:
    if not rule.heads:
        raise ScopeError("rule %s has no heads" % rule.name)
    head_vars: Set[str] = set()
    for h in rule.heads:
        head_vars.update(term_vars(h))
    prio_missing = set(term_vars(rule.priority)) - head_vars
    if prio_missing:
        raise ScopeError("rule %s: dynamic priority variables %s do not appear in "
                         "the heads" % (rule.name, sorted(prio_missing)))
    for g in rule.guard:
        missing = (set(term_vars(g.lhs)) | set(term_vars(g.rhs))) - head_vars
        if missing:
            raise ScopeError("rule %s: guard %r uses non-head variables %s"
                             % (rule.name, g, sorted(missing)))


# ---------------------------------------------------------------------------
# Priority normalization: move all priority variables into the first antecedent


def priority_vars_in_first(rule: LARule) -> bool:
    pvars = set(term_vars(rule.priority))
    if not pvars:
        return True
    first = rule.antecedents[0]
    if isinstance(first, Compare):
        return False
    return pvars <= set(term_vars(first.atom))


def normalize_la_priority(rule: LARule) -> List[LARule]:
    """Rewrite a rule whose priority variables span several antecedents into
    the two-rule form with a fresh priority-carrier predicate.

    The carrier stores the evaluated priority; the rewritten rule matches it
    through a fresh variable and pins it with an equality comparison, so the
    rewritten priority depends only on the (new) first antecedent.
    """
    check_la_rule(rule)
    if priority_vars_in_first(rule):
        return [rule]
    pvars = set(term_vars(rule.priority))
    bound: Set[str] = set()
    prefix_len = 0
    for i, ant in enumerate(rule.antecedents):
        if not isinstance(ant, Compare):
            bound.update(term_vars(ant.atom))
        prefix_len = i + 1
        if pvars <= bound:
            break
    carrier = "priority_%s" % rule.name
    pvar = fresh_var("P")
    gen = LARule(
        name="%s__pri" % rule.name,
        priority=Int(1),
        antecedents=rule.antecedents[:prefix_len],
        conclusion=(Positive(Compound(carrier, (rule.priority,))),),
    )
    rewritten = LARule(
        name=rule.name,
        priority=pvar,
        antecedents=(Positive(Compound(carrier, (pvar,))),) + rule.antecedents
        + (Compare(Comparison("=", pvar, rule.priority)),),
        conclusion=rule.conclusion,
    )
    return [gen, rewritten]


def normalize_la_program(program: LAProgram) -> LAProgram:
    rules: List[LARule] = []
    for rule in program.rules:
        rules.extend(normalize_la_priority(rule))
    return LAProgram(tuple(rules))


# ---------------------------------------------------------------------------
# CHR -> intermediate form


def to_intermediate(rule: ChrRule, join_order: Optional[Sequence[int]] = None) -> IntermediateRule:
    """Convert to signed-head form. The default join order keeps textual head
    order (kept heads then removed heads); guard conjuncts are hoisted to the
    earliest position where all their variables are bound.

    Dynamic-priority rules need a first head binding every priority variable;
    the default order rotates such a head to the front when necessary.
    """
    check_chr_rule(rule)
    signed = [("+", h) for h in rule.kept] + [("-", h) for h in rule.removed]
    n = len(signed)
    if join_order is not None:
        order = list(join_order)
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError("join_order must be a permutation of 1..%d, got %r"
                             % (n, join_order))
        signed = [signed[i - 1] for i in order]
    pvars = set(term_vars(rule.priority))
    if pvars:
        first_vars = set(term_vars(signed[0][1]))
        if not pvars <= first_vars:
            if join_order is not None:
                raise ScopeError(
                    "rule %s: join order must start with a head binding the "
                    "dynamic priority variables" % rule.name)
            pivot = next((i for i, (_, h) in enumerate(signed)
                          if pvars <= set(term_vars(h))), None)
            if pivot is None:
                raise ScopeError(
                    "rule %s: no single head binds all dynamic priority "
                    "variables; normalize the priority first" % rule.name)
            signed.insert(0, signed.pop(pivot))
    remaining = list(rule.guard)
    items: List[IntermediateItem] = []
    bound: Set[str] = set()
    for i, (sign, head) in enumerate(signed):
        bound.update(term_vars(head))
        here: List[Comparison] = []
        rest: List[Comparison] = []
        for g in remaining:
            gvars = set(term_vars(g.lhs)) | set(term_vars(g.rhs))
            if gvars <= bound:
                here.append(g)
            else:
                rest.append(g)
        remaining = rest
        if i == len(signed) - 1 and remaining:
            # unbindable guard variables were rejected by check_chr_rule
            here.extend(remaining)
            remaining = []
        items.append(IntermediateItem(sign, head, tuple(here)))
    return IntermediateRule(rule.priority, rule.name, tuple(items), rule.body)


def from_intermediate(rule: IntermediateRule) -> ChrRule:
    """Recover a plain rule (losing the join order and guard placement)."""
    kept = tuple(i.head for i in rule.items if i.sign == "+")
    removed = tuple(i.head for i in rule.items if i.sign == "-")
    guard = tuple(itertools.chain.from_iterable(i.post_guard for i in rule.items))
    return ChrRule(rule.priority, rule.name, kept, removed, guard, rule.body)

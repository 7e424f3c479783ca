"""Pretty-printers; parse(pretty_print(p)) is AST-equal to p."""

from __future__ import annotations

from typing import Union

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
from .terms import Comparison, Compound, Int, Term, Var, list_items

_PRECEDENCE = {"+": 1, "-": 1, "*": 2}


def format_term(term: Term, parent_prec: int = 0) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Int):
        return str(term.value)
    items = list_items(term)
    if items is not None:
        return "[%s]" % ", ".join(format_term(i) for i in items)
    if term.functor in _PRECEDENCE and len(term.args) == 2:
        prec = _PRECEDENCE[term.functor]
        lhs = format_term(term.args[0], prec - 1)
        rhs = format_term(term.args[1], prec)
        text = "%s%s%s" % (lhs, term.functor, rhs)
        return "(%s)" % text if prec <= parent_prec else text
    if not term.args:
        return term.functor
    return "%s(%s)" % (term.functor, ",".join(format_term(a) for a in term.args))


def format_comparison(comp: Comparison) -> str:
    return "%s %s %s" % (format_term(comp.lhs), comp.op, format_term(comp.rhs))


def format_la_rule(rule: LARule) -> str:
    parts = []
    for ant in rule.antecedents:
        if isinstance(ant, Positive):
            parts.append(format_term(ant.atom))
        elif isinstance(ant, Negative):
            parts.append("del(%s)" % format_term(ant.atom))
        else:
            parts.append(format_comparison(ant.comparison))
    concl = []
    for item in rule.conclusion:
        if isinstance(item, Negative):
            concl.append("del(%s)" % format_term(item.atom))
        else:
            concl.append(format_term(item.atom))
    return "%s @ %s : %s => %s." % (
        rule.name, format_term(rule.priority), ", ".join(parts), ", ".join(concl))


def format_chr_rule(rule: ChrRule) -> str:
    kept = ", ".join(format_term(h) for h in rule.kept)
    removed = ", ".join(format_term(h) for h in rule.removed)
    if rule.kind() == "simpagation":
        heads = "%s \\ %s" % (kept, removed)
        arrow = "<=>"
    elif rule.kind() == "simplification":
        heads = removed
        arrow = "<=>"
    else:
        heads = kept
        arrow = "==>"
    body_items = []
    for item in rule.body:
        if isinstance(item, TellEq):
            body_items.append("%s = %s" % (format_term(item.lhs), format_term(item.rhs)))
        else:
            body_items.append(format_term(item))
    body = ", ".join(body_items) if body_items else "true"
    guard = ""
    if rule.guard:
        guard = "%s | " % ", ".join(format_comparison(g) for g in rule.guard)
    return "%s :: %s @ %s %s %s%s." % (
        format_term(rule.priority), rule.name, heads, arrow, guard, body)


def format_goal(goal: Goal) -> str:
    if not goal.items:
        return ""
    parts = []
    for item in goal.items:
        if isinstance(item, TellEq):
            parts.append("%s = %s" % (format_term(item.lhs), format_term(item.rhs)))
        else:
            parts.append(format_term(item))
    return "goal %s." % ", ".join(parts)


def pretty_print_la(program: LAProgram, goal: Goal = Goal()) -> str:
    lines = [format_la_rule(r) for r in program.rules]
    goal_line = format_goal(goal)
    if goal_line:
        lines.append(goal_line)
    return "\n".join(lines) + ("\n" if lines else "")


def pretty_print_chrrp(program: ChrProgram, goal: Goal = Goal()) -> str:
    lines = [format_chr_rule(r) for r in program.rules]
    goal_line = format_goal(goal)
    if goal_line:
        lines.append(goal_line)
    return "\n".join(lines) + ("\n" if lines else "")

"""Herbrand terms, substitutions, unification and the built-in equality store.

Terms are immutable. Variables are identified by name; rule instantiation
renames variables apart, so name equality is identity equality everywhere
in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

ARITH_OPS = ("+", "-", "*")
COMPARE_OPS = ("<", "=<", "=", "\\=")


class EvalError(Exception):
    """Arithmetic evaluation failed (unbound variable or non-numeric term)."""


class IntOverflowError(EvalError):
    """Result does not fit in a signed 64-bit integer."""


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...] = ()

    def __repr__(self):
        if not self.args:
            return self.functor
        return "%s(%s)" % (self.functor, ",".join(map(repr, self.args)))


Term = Union[Var, Int, Compound]

NIL = Compound("[]")


def atom(name: str) -> Compound:
    return Compound(name)


def mklist(items: Sequence[Term]) -> Term:
    """Build a cons-list term; printed back as [a,b,...]."""
    out: Term = NIL
    for item in reversed(items):
        out = Compound("[|]", (item, out))
    return out


def list_items(term: Term) -> Optional[List[Term]]:
    """Return the elements of a proper cons-list, or None."""
    items = []
    while isinstance(term, Compound) and term.functor == "[|]" and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    if term == NIL:
        return items
    return None


def is_arith_op(term: Term) -> bool:
    return isinstance(term, Compound) and term.functor in ARITH_OPS and len(term.args) == 2


def term_vars(term: Term, acc: Optional[List[str]] = None) -> List[str]:
    """Variable names in first-occurrence depth-first order."""
    if acc is None:
        acc = []
    if isinstance(term, Var):
        if term.name not in acc:
            acc.append(term.name)
    elif isinstance(term, Compound):
        for a in term.args:
            term_vars(a, acc)
    return acc


def is_ground(term: Term) -> bool:
    if isinstance(term, Var):
        return False
    if isinstance(term, Compound):
        return all(is_ground(a) for a in term.args)
    return True


def term_key(term: Term):
    """Total order key; variables sort by name within their own band."""
    if isinstance(term, Var):
        return (0, term.name)
    if isinstance(term, Int):
        return (1, term.value)
    return (2, term.functor, len(term.args), tuple(term_key(a) for a in term.args))


def rename_term(term: Term, mapping: Dict[str, Var]) -> Term:
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    if isinstance(term, Compound) and term.args:
        return Compound(term.functor, tuple(rename_term(a, mapping) for a in term.args))
    return term


class Substitution:
    """Idempotent variable binding map."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: Optional[Dict[str, Term]] = None):
        self.bindings = dict(bindings) if bindings else {}

    def __repr__(self):
        inner = ", ".join("%s->%r" % kv for kv in sorted(self.bindings.items()))
        return "{%s}" % inner

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.bindings == other.bindings

    def lookup(self, name: str) -> Optional[Term]:
        return self.bindings.get(name)

    def apply(self, term: Term) -> Term:
        if isinstance(term, Var):
            bound = self.bindings.get(term.name)
            if bound is None:
                return term
            return self.apply(bound) if isinstance(bound, Var) else self._apply_deep(bound)
        if isinstance(term, Compound) and term.args:
            return Compound(term.functor, tuple(self.apply(a) for a in term.args))
        return term

    def _apply_deep(self, term: Term) -> Term:
        return self.apply(term)

    def bind(self, name: str, term: Term) -> "Substitution":
        """Extend with name -> term, re-normalizing to keep idempotence."""
        term = self.apply(term)
        if isinstance(term, Var) and term.name == name:
            return self
        out = {name: term}
        target = Substitution(out)
        for k, v in self.bindings.items():
            out.setdefault(k, target.apply(v))
        return Substitution(out)

    def domain(self) -> Set[str]:
        return set(self.bindings)


def unify_terms(a: Term, b: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Syntactic unification with occurs check; returns the extended
    substitution or None."""
    s = subst if subst is not None else Substitution()
    a = s.apply(a)
    b = s.apply(b)
    if isinstance(a, Var):
        if isinstance(b, Var) and b.name == a.name:
            return s
        if a.name in term_vars(b):
            return None
        return s.bind(a.name, b)
    if isinstance(b, Var):
        if b.name in term_vars(a):
            return None
        return s.bind(b.name, a)
    if isinstance(a, Int) and isinstance(b, Int):
        return s if a.value == b.value else None
    if isinstance(a, Compound) and isinstance(b, Compound):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            s = unify_terms(x, y, s)
            if s is None:
                return None
        return s
    return None


def mgu_of_set(terms: Sequence[Term]) -> Optional[Substitution]:
    """Most general unifier of a non-empty list of terms."""
    if not terms:
        raise ValueError("mgu_of_set: empty list")
    s = Substitution()
    first = terms[0]
    for other in terms[1:]:
        s = unify_terms(first, other, s)
        if s is None:
            return None
    return s


def match(pattern: Term, ground: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """One-sided matching: bind pattern variables so the pattern equals the
    ground term. The subject must be ground."""
    s = subst if subst is not None else Substitution()
    stack = [(pattern, ground)]
    while stack:
        p, g = stack.pop()
        if isinstance(p, Var):
            bound = s.lookup(p.name)
            if bound is None:
                s = s.bind(p.name, g)
            elif s.apply(bound) != g:
                return None
            continue
        if isinstance(p, Int):
            if not (isinstance(g, Int) and g.value == p.value):
                return None
            continue
        if not (isinstance(g, Compound) and g.functor == p.functor and len(g.args) == len(p.args)):
            return None
        stack.extend(zip(p.args, g.args))
    return s


def checked_int(value: int) -> int:
    if value < INT_MIN or value > INT_MAX:
        raise IntOverflowError("integer out of 64-bit range: %d" % value)
    return value


def eval_arith(term: Term, resolve=None) -> int:
    """Evaluate an integer arithmetic expression. `resolve` maps a Var to a
    term (or None); unbound variables raise EvalError."""
    if isinstance(term, Var):
        if resolve is not None:
            bound = resolve(term)
            if bound is not None and bound != term:
                return eval_arith(bound, resolve)
        raise EvalError("unbound variable in arithmetic: %s" % term.name)
    if isinstance(term, Int):
        return term.value
    if is_arith_op(term):
        lhs = eval_arith(term.args[0], resolve)
        rhs = eval_arith(term.args[1], resolve)
        if term.functor == "+":
            return checked_int(lhs + rhs)
        if term.functor == "-":
            return checked_int(lhs - rhs)
        return checked_int(lhs * rhs)
    raise EvalError("not an arithmetic expression: %r" % (term,))


def normalize_arith(term: Term, resolve=None) -> Term:
    """Replace every ground arithmetic subexpression by its integer value.
    Used when asserting conclusions and body constraints."""
    if isinstance(term, Var):
        if resolve is not None:
            bound = resolve(term)
            if bound is not None and bound != term:
                return normalize_arith(bound, resolve)
        return term
    if isinstance(term, Compound) and term.args:
        if is_arith_op(term):
            try:
                return Int(eval_arith(term, resolve))
            except IntOverflowError:
                raise
            except EvalError:
                pass
        return Compound(term.functor, tuple(normalize_arith(a, resolve) for a in term.args))
    return term


ENTAILED = "entailed"
DISENTAILED = "disentailed"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Comparison:
    op: str  # one of < =< = \=
    lhs: Term
    rhs: Term

    def __repr__(self):
        return "%r %s %r" % (self.lhs, self.op, self.rhs)

    def negated(self) -> "Comparison":
        flip = {"<": "=<", "=<": "<", "=": "\\=", "\\=": "="}
        if self.op in ("<", "=<"):
            # not (a < b)  <=>  b =< a
            return Comparison(flip[self.op], self.rhs, self.lhs)
        return Comparison(flip[self.op], self.lhs, self.rhs)


class ConstraintId:
    """Unique identifier of a stored constraint; dies exactly once."""

    __slots__ = ("id", "alive")
    _counter = 0

    def __init__(self, ident: Optional[int] = None):
        if ident is None:
            ConstraintId._counter += 1
            ident = ConstraintId._counter
        self.id = ident
        self.alive = True

    def kill(self):
        if not self.alive:
            raise ValueError("constraint #%d deleted twice" % self.id)
        self.alive = False

    def __repr__(self):
        return "#%d%s" % (self.id, "" if self.alive else "(dead)")


class BuiltinStore:
    """Herbrand equality store: union-find over variables, each class with an
    optional non-variable representative term.

    Single writer; `copy()` gives an independent snapshot for search.
    """

    def __init__(self):
        self.parent: Dict[str, str] = {}
        self.rank: Dict[str, int] = {}
        self.members: Dict[str, List[str]] = {}
        self.binding: Dict[str, Term] = {}
        self.failed = False

    def copy(self) -> "BuiltinStore":
        out = BuiltinStore()
        out.parent = dict(self.parent)
        out.rank = dict(self.rank)
        out.members = {k: list(v) for k, v in self.members.items()}
        out.binding = dict(self.binding)
        out.failed = self.failed
        return out

    def _ensure(self, name: str) -> str:
        if name not in self.parent:
            self.parent[name] = name
            self.rank[name] = 0
            self.members[name] = [name]
        return name

    def find(self, name: str) -> str:
        self._ensure(name)
        root = name
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[name] != root:
            self.parent[name], name = root, self.parent[name]
        return root

    def class_members(self, name: str) -> List[str]:
        return list(self.members[self.find(name)])

    def same_class(self, a: str, b: str) -> bool:
        return self.find(a) == self.find(b)

    def walk(self, term: Term) -> Term:
        """Resolve variables to their current representative form."""
        if isinstance(term, Var):
            root = self.find(term.name)
            bound = self.binding.get(root)
            if bound is None:
                return Var(root)
            return self.walk(bound)
        if isinstance(term, Compound) and term.args:
            return Compound(term.functor, tuple(self.walk(a) for a in term.args))
        return term

    def _occurs(self, root: str, term: Term) -> bool:
        term = self.walk(term)
        if isinstance(term, Var):
            return self.find(term.name) == root
        if isinstance(term, Compound):
            return any(self._occurs(root, a) for a in term.args)
        return False

    def _union(self, a: str, b: str, affected: Set[str]) -> str:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        affected.update(self.members[ra])
        affected.update(self.members[rb])
        self.members[ra].extend(self.members.pop(rb))
        bound = self.binding.pop(rb, None)
        if bound is not None:
            prior = self.binding.get(ra)
            if prior is None:
                self.binding[ra] = bound
            else:
                self._unify(prior, bound, affected)
        return ra

    def _bind(self, root: str, term: Term, affected: Set[str]):
        if self._occurs(root, term):
            self.failed = True
            return
        self.binding[root] = term
        affected.update(self.members[root])

    def _unify(self, a: Term, b: Term, affected: Set[str]):
        if self.failed:
            return
        a = self.walk(a)
        b = self.walk(b)
        if isinstance(a, Var) and isinstance(b, Var):
            self._union(a.name, b.name, affected)
            return
        if isinstance(a, Var):
            self._bind(self.find(a.name), b, affected)
            return
        if isinstance(b, Var):
            self._bind(self.find(b.name), a, affected)
            return
        if isinstance(a, Int) and isinstance(b, Int):
            if a.value != b.value:
                self.failed = True
            return
        if isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                self.failed = True
                return
            for x, y in zip(a.args, b.args):
                self._unify(x, y, affected)
                if self.failed:
                    return
            return
        self.failed = True

    def tell_eq(self, a: Term, b: Term) -> Tuple[bool, Set[str]]:
        """Add the equality a = b. Returns (consistent, affected variables)."""
        if self.failed:
            return False, set()
        affected: Set[str] = set()
        self._unify(a, b, affected)
        if self.failed:
            return False, affected
        return True, affected

    def resolver(self):
        return lambda v: self.walk(v)

    def entails(self, comp: Comparison) -> str:
        """Three-valued comparison check: entailed, disentailed or unknown."""
        if self.failed:
            # a failed store trivially entails everything; execution aborts
            # before this matters, but keep ask monotone.
            return ENTAILED
        lhs = self.walk(comp.lhs)
        rhs = self.walk(comp.rhs)
        try:
            lv = eval_arith(lhs)
            rv = eval_arith(rhs)
            holds = {
                "<": lv < rv,
                "=<": lv <= rv,
                "=": lv == rv,
                "\\=": lv != rv,
            }[comp.op]
            return ENTAILED if holds else DISENTAILED
        except EvalError:
            pass
        if comp.op in ("<", "=<"):
            if lhs == rhs:
                return ENTAILED if comp.op == "=<" else DISENTAILED
            return UNKNOWN
        identical = lhs == rhs
        unifiable = unify_terms(lhs, rhs) is not None
        if comp.op == "=":
            if identical:
                return ENTAILED
            return UNKNOWN if unifiable else DISENTAILED
        if identical:
            return DISENTAILED
        return ENTAILED if not unifiable else UNKNOWN


def unify(a: Term, b: Term, store: Optional[BuiltinStore] = None) -> Optional[BuiltinStore]:
    """Unify two terms against a store snapshot. Returns the extended store
    or None on clash / occurs-check failure. The input store is not mutated."""
    base = store.copy() if store is not None else BuiltinStore()
    ok, _ = base.tell_eq(a, b)
    return base if ok else None


def match_entailed(pattern: Term, subject: Term, store: BuiltinStore,
                   subst: Optional[Substitution] = None):
    """Match a rule head pattern against a (possibly non-ground) constraint
    argument tuple modulo the equality store.

    Returns (status, substitution) where status is ENTAILED (match holds),
    DISENTAILED (can never hold) or UNKNOWN (insufficiently instantiated).
    Pattern variables bind to subject subterms; subject variables are never
    instantiated.
    """
    s = subst if subst is not None else Substitution()
    subject = store.walk(subject)
    if isinstance(pattern, Var):
        bound = s.lookup(pattern.name)
        if bound is None:
            return ENTAILED, s.bind(pattern.name, subject)
        # repeated pattern variable: both images are subject-side terms and
        # must be equal modulo the store
        return store.entails(Comparison("=", s.apply(bound), subject)), s
    if isinstance(subject, Var):
        # would need to instantiate the store variable
        return UNKNOWN, s
    if isinstance(pattern, Int):
        if isinstance(subject, Int) and subject.value == pattern.value:
            return ENTAILED, s
        if is_arith_op(subject):
            return UNKNOWN, s
        return DISENTAILED, s
    if not isinstance(subject, Compound) or subject.functor != pattern.functor \
            or len(subject.args) != len(pattern.args):
        return DISENTAILED, s
    status = ENTAILED
    for p, g in zip(pattern.args, subject.args):
        sub_status, s = match_entailed(p, g, store, s)
        if sub_status == DISENTAILED:
            return DISENTAILED, s
        if sub_status == UNKNOWN:
            status = UNKNOWN
    return status, s


_fresh_counter = [0]


def fresh_var(base: str = "_G") -> Var:
    """Fresh variable with a lexically valid name (safe to pretty-print)."""
    _fresh_counter[0] += 1
    return Var("%s__%d" % (base.split("__")[0], _fresh_counter[0]))


def rename_apart(names: Sequence[str]) -> Dict[str, Var]:
    """Fresh renaming for the given variable names."""
    return {n: fresh_var(n) for n in names}

"""Recursive-descent parsers for the `.la` and `.chrrp` concrete syntaxes.

Grammar reference: docs/grammar.md. Rules end with `.`; `%` starts a line
comment; a `goal` directive introduces the initial goal/database.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from .lang import (
    Antecedent,
    ChrProgram,
    ChrRule,
    Compare,
    Conclusion,
    Goal,
    LAProgram,
    LARule,
    Negative,
    Positive,
    ScopeError,
    TellEq,
    check_chr_rule,
    check_la_rule,
)
from .terms import Comparison, Compound, Int, Term, Var, fresh_var, mklist

SYMBOLS = [
    "<=>", "==>", "=>", "=<", "\\=", "::", "(", ")", "[", "]",
    ",", ".", "@", ":", "\\", "|", "+", "-", "*", "<", "=",
]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: Optional[str] = None):
        self.line = line
        self.col = col
        self.expected = expected
        detail = "%s at line %d, column %d" % (message, line, col)
        if expected:
            detail += " (expected %s)" % expected
        super().__init__(detail)


@dataclass
class Token:
    kind: str  # int, var, name, sym, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (ch == "_" or ch.isupper()) else "name"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError("unexpected character %r" % ch, line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


COMPARE_SYMS = ("<", "=<", "=", "\\=")


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, expected: Optional[str] = None):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col, expected)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            self.error("unexpected %r" % (tok.text or "end of input"),
                       expected=text or kind)
        return self.next()

    def at_sym(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == text

    def eat_sym(self, text: str) -> bool:
        if self.at_sym(text):
            self.next()
            return True
        return False

    # -- terms ------------------------------------------------------------

    def parse_term(self) -> Term:
        """Arithmetic expression grammar: sums over products over primaries."""
        term = self.parse_product()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.parse_product()
            term = Compound(op, (term, rhs))
        return term

    def parse_product(self) -> Term:
        term = self.parse_primary()
        while self.at_sym("*"):
            self.next()
            rhs = self.parse_primary()
            term = Compound("*", (term, rhs))
        return term

    def parse_primary(self) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Int(int(tok.text))
        if tok.kind == "sym" and tok.text == "-" and self.peek(1).kind == "int":
            self.next()
            return Int(-int(self.next().text))
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            term = self.parse_term()
            self.expect("sym", ")")
            return term
        if tok.kind == "sym" and tok.text == "[":
            return self.parse_list()
        if tok.kind == "var":
            self.next()
            if tok.text == "_":
                return fresh_var("_A")
            return Var(tok.text)
        if tok.kind == "name":
            self.next()
            if self.eat_sym("("):
                args = [self.parse_term()]
                while self.eat_sym(","):
                    args.append(self.parse_term())
                self.expect("sym", ")")
                return Compound(tok.text, tuple(args))
            return Compound(tok.text)
        self.error("unexpected %r" % (tok.text or "end of input"), expected="a term")

    def parse_list(self) -> Term:
        self.expect("sym", "[")
        items: List[Term] = []
        if not self.at_sym("]"):
            items.append(self.parse_term())
            while self.eat_sym(","):
                items.append(self.parse_term())
        self.expect("sym", "]")
        return mklist(items)

    def parse_atom(self) -> Compound:
        tok = self.peek()
        term = self.parse_primary()
        if not isinstance(term, Compound) or term.functor in ("[|]", "[]"):
            raise ParseError("expected a user-defined atom", tok.line, tok.col)
        return term

    def maybe_comparison(self, lhs: Term) -> Optional[Comparison]:
        tok = self.peek()
        if tok.kind == "sym" and tok.text in COMPARE_SYMS:
            self.next()
            rhs = self.parse_term()
            return Comparison(tok.text, lhs, rhs)
        return None

    # -- goals -------------------------------------------------------------

    def parse_goal_items(self, allow_tell: bool) -> List[Union[Compound, TellEq]]:
        items: List[Union[Compound, TellEq]] = []
        while True:
            tok = self.peek()
            term = self.parse_term()
            comp = self.maybe_comparison(term)
            if comp is not None:
                if not allow_tell or comp.op != "=":
                    raise ParseError("comparisons are not allowed in this goal",
                                     tok.line, tok.col)
                items.append(TellEq(comp.lhs, comp.rhs))
            elif isinstance(term, Compound):
                items.append(term)
            else:
                raise ParseError("goal items must be atoms", tok.line, tok.col)
            if not self.eat_sym(","):
                break
        self.expect("sym", ".")
        return items


def _wrap_scope_error(exc: ScopeError, tok: Token):
    raise ParseError(str(exc), tok.line, tok.col) from exc


# ---------------------------------------------------------------------------


class _LAParser(_Parser):
    def parse_program(self) -> Tuple[LAProgram, Goal]:
        rules: List[LARule] = []
        goal_items: List[Compound] = []
        while self.peek().kind != "eof":
            if self.peek().kind == "name" and self.peek().text == "goal":
                self.next()
                goal_items.extend(self.parse_goal_items(allow_tell=False))
            else:
                rules.append(self.parse_rule())
        return LAProgram(tuple(rules)), Goal(tuple(goal_items))

    def parse_rule(self) -> LARule:
        start = self.peek()
        name_tok = self.expect("name")
        self.expect("sym", "@")
        priority = self.parse_term()
        self.expect("sym", ":")
        antecedents = [self.parse_antecedent()]
        while self.eat_sym(","):
            antecedents.append(self.parse_antecedent())
        self.expect("sym", "=>")
        conclusion = [self.parse_conclusion_item()]
        while self.eat_sym(","):
            conclusion.append(self.parse_conclusion_item())
        self.expect("sym", ".")
        rule = LARule(name_tok.text, priority, tuple(antecedents), tuple(conclusion))
        try:
            check_la_rule(rule)
        except ScopeError as exc:
            _wrap_scope_error(exc, start)
        return rule

    def parse_antecedent(self) -> Antecedent:
        tok = self.peek()
        if tok.kind == "name" and tok.text == "del" and self.peek(1).kind == "sym" \
                and self.peek(1).text == "(":
            self.next()
            self.next()
            inner = self.parse_atom()
            self.expect("sym", ")")
            return Negative(inner)
        term = self.parse_term()
        comp = self.maybe_comparison(term)
        if comp is not None:
            return Compare(comp)
        if isinstance(term, Compound) and term.functor not in ("[|]", "[]"):
            return Positive(term)
        raise ParseError("expected an atom or comparison", tok.line, tok.col)

    def parse_conclusion_item(self) -> Conclusion:
        tok = self.peek()
        if tok.kind == "name" and tok.text == "del" and self.peek(1).kind == "sym" \
                and self.peek(1).text == "(":
            self.next()
            self.next()
            inner = self.parse_atom()
            self.expect("sym", ")")
            return Negative(inner)
        term = self.parse_term()
        if isinstance(term, Compound) and term.functor not in ("[|]", "[]"):
            if term.functor == "true" and not term.args:
                raise ParseError("conclusions must assert at least one atom",
                                 tok.line, tok.col)
            return Positive(term)
        raise ParseError("expected a conclusion atom", tok.line, tok.col)


class _ChrParser(_Parser):
    def parse_program(self) -> Tuple[ChrProgram, Goal]:
        rules: List[ChrRule] = []
        goal_items: List[Union[Compound, TellEq]] = []
        while self.peek().kind != "eof":
            if self.peek().kind == "name" and self.peek().text == "goal":
                self.next()
                goal_items.extend(self.parse_goal_items(allow_tell=True))
            else:
                rules.append(self.parse_rule())
        return ChrProgram(tuple(rules)), Goal(tuple(goal_items))

    def parse_rule(self) -> ChrRule:
        start = self.peek()
        priority = self.parse_term()
        self.expect("sym", "::")
        name_tok = self.expect("name")
        self.expect("sym", "@")
        first = [self.parse_atom()]
        while self.eat_sym(","):
            first.append(self.parse_atom())
        second: List[Compound] = []
        simpagation = False
        if self.eat_sym("\\"):
            simpagation = True
            second.append(self.parse_atom())
            while self.eat_sym(","):
                second.append(self.parse_atom())
        op_tok = self.peek()
        if self.eat_sym("<=>"):
            arrow = "<=>"
        elif self.eat_sym("==>"):
            arrow = "==>"
        else:
            self.error("unexpected %r" % op_tok.text, expected="<=> or ==>")
        if arrow == "==>" and simpagation:
            raise ParseError("propagation rules cannot remove heads",
                             op_tok.line, op_tok.col)
        guard, body = self.parse_guard_and_body()
        if simpagation:
            kept, removed = tuple(first), tuple(second)
        elif arrow == "<=>":
            kept, removed = (), tuple(first)
        else:
            kept, removed = tuple(first), ()
        rule = ChrRule(priority, name_tok.text, kept, removed, tuple(guard), tuple(body))
        try:
            check_chr_rule(rule)
        except ScopeError as exc:
            _wrap_scope_error(exc, start)
        return rule

    def parse_guard_and_body(self):
        items, comparisons_only = self.parse_conjunction()
        if self.eat_sym("|"):
            if not comparisons_only:
                self.error("guards may only contain comparisons")
            guard = [i for i in items if isinstance(i, Comparison)]
            body, _ = self.parse_conjunction()
            self.expect("sym", ".")
            return guard, self.to_body(body)
        self.expect("sym", ".")
        return [], self.to_body(items)

    def parse_conjunction(self):
        items: List[Union[Compound, Comparison]] = []
        comparisons_only = True
        while True:
            term = self.parse_term()
            comp = self.maybe_comparison(term)
            if comp is not None:
                items.append(comp)
            else:
                if not isinstance(term, Compound):
                    self.error("expected an atom or comparison")
                items.append(term)
                comparisons_only = False
            if not self.eat_sym(","):
                break
        return items, comparisons_only

    def to_body(self, items) -> List[Union[Compound, TellEq]]:
        body: List[Union[Compound, TellEq]] = []
        for item in items:
            if isinstance(item, Comparison):
                if item.op != "=":
                    self.error("only = tell constraints are allowed in bodies")
                body.append(TellEq(item.lhs, item.rhs))
            elif item.functor == "true" and not item.args:
                continue
            else:
                body.append(item)
        return body


def parse_la(text: str) -> Tuple[LAProgram, Goal]:
    return _LAParser(text).parse_program()


def parse_chrrp(text: str) -> Tuple[ChrProgram, Goal]:
    return _ChrParser(text).parse_program()

"""AST, concrete syntax, depth, and reference semantics for counting temporal logic.

The logic has symbol predicates Q(s), Boolean connectives, comparisons of
counting terms, and optional extensions: the previous-position operator Y,
positional MOD predicates, unmasked/strict counting operators, and the
conditional term (phi ? t1 : t2).

Positions are 1-based. A word satisfies a formula if it holds at the final
position. The empty word is rejected as an error, not evaluated.
"""

from dataclasses import dataclass
from fractions import Fraction


class FormulaError(Exception):
    pass


class ParseError(FormulaError):
    pass


# --- Alphabet ---

class Alphabet:
    """Ordered list of distinct single-character symbols. BOS is never a member."""

    def __init__(self, symbols):
        symbols = list(symbols)
        if not symbols:
            raise FormulaError("alphabet must be non-empty")
        if len(set(symbols)) != len(symbols):
            raise FormulaError("alphabet has duplicate symbols")
        for s in symbols:
            if len(s) != 1 or s.isspace():
                raise FormulaError(f"alphabet symbols must be single non-space characters: {s!r}")
        if "^" in symbols:
            raise FormulaError("BOS marker '^' may not be an alphabet symbol")
        self.symbols = symbols

    def __contains__(self, s):
        return s in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __repr__(self):
        return f"Alphabet({''.join(self.symbols)!r})"


AB = Alphabet("ab")
ABE = Alphabet("abe")
PARens = Alphabet("()")


# --- AST ---

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Sym(Formula):
    sym: str


@dataclass(frozen=True)
class BoolConst(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    phi: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


COMPARE_OPS = ("<", "<=", ">", ">=", "=", "!=")


@dataclass(frozen=True)
class Compare(Formula):
    lhs: Term
    op: str
    rhs: Term

    def __post_init__(self):
        if self.op not in COMPARE_OPS:
            raise FormulaError(f"bad comparison operator {self.op!r}")


@dataclass(frozen=True)
class Prev(Formula):
    phi: Formula


@dataclass(frozen=True)
class Mod(Formula):
    m: int
    r: int

    def __post_init__(self):
        if self.m < 1 or not (0 <= self.r < self.m):
            raise FormulaError(f"MOD requires m >= 1 and 0 <= r < m, got ({self.m},{self.r})")


@dataclass(frozen=True)
class CountLeft(Term):
    phi: Formula


@dataclass(frozen=True)
class CountRight(Term):
    phi: Formula


@dataclass(frozen=True)
class CountAll(Term):
    phi: Formula


@dataclass(frozen=True)
class CountLeftStrict(Term):
    phi: Formula


@dataclass(frozen=True)
class CountRightStrict(Term):
    phi: Formula


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg(Term):
    term: Term


@dataclass(frozen=True)
class IntConst(Term):
    value: int


@dataclass(frozen=True)
class Ite(Term):
    cond: Formula
    then: Term
    els: Term


TRUE = BoolConst(True)
FALSE = BoolConst(False)


def big_and(phis):
    """Balanced conjunction of a list of formulas (TRUE for the empty list)."""
    return _balanced(list(phis), And, TRUE)


def big_or(phis):
    return _balanced(list(phis), Or, FALSE)


def big_sum(terms):
    # Left-associated, matching what the parser produces, so printing round-trips.
    terms = list(terms)
    if not terms:
        return IntConst(0)
    acc = terms[0]
    for t in terms[1:]:
        acc = Sum(acc, t)
    return acc


def _balanced(items, node, empty):
    # Balanced trees keep recursion depth logarithmic for large generated formulas.
    if not items:
        return empty
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return node(_balanced(items[:mid], node, empty), _balanced(items[mid:], node, empty))


def scale_term(coeff, t):
    """coeff * t as repeated sums (the AST carries no multiplication node)."""
    if coeff == 0:
        return IntConst(0)
    if isinstance(t, IntConst):
        return IntConst(coeff * t.value)
    body = big_sum([t] * abs(coeff))
    return Neg(body) if coeff < 0 else body


# --- Depth ---

def depth(node):
    """Maximum nesting of counting operators; sugar scores as its desugared form."""
    if isinstance(node, (Sym, BoolConst, Mod)):
        return 0
    if isinstance(node, (Not, Prev)):
        return depth(node.phi)
    if isinstance(node, (And, Or)):
        return max(depth(node.left), depth(node.right))
    if isinstance(node, Compare):
        return max(depth(node.lhs), depth(node.rhs))
    if isinstance(node, (CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict)):
        return depth(node.phi) + 1
    if isinstance(node, Sum):
        return max(depth(node.left), depth(node.right))
    if isinstance(node, Neg):
        return depth(node.term)
    if isinstance(node, IntConst):
        return 0
    if isinstance(node, Ite):
        return max(depth(node.cond), depth(node.then), depth(node.els))
    raise FormulaError(f"unknown node {node!r}")


# --- Feature analysis ---

def features(node):
    """Set of syntax features used: count_right, count_all, strict, ite, prev, mod."""
    out = set()
    _features(node, out)
    return frozenset(out)


def _features(node, out):
    if isinstance(node, (Sym, BoolConst, IntConst)):
        return
    if isinstance(node, Mod):
        out.add("mod")
        return
    if isinstance(node, Prev):
        out.add("prev")
        _features(node.phi, out)
    elif isinstance(node, Not):
        _features(node.phi, out)
    elif isinstance(node, (And, Or, Sum)):
        _features(node.left, out)
        _features(node.right, out)
    elif isinstance(node, Compare):
        _features(node.lhs, out)
        _features(node.rhs, out)
    elif isinstance(node, Neg):
        _features(node.term, out)
    elif isinstance(node, CountLeft):
        _features(node.phi, out)
    elif isinstance(node, CountRight):
        out.add("count_right")
        _features(node.phi, out)
    elif isinstance(node, CountAll):
        out.add("count_all")
        _features(node.phi, out)
    elif isinstance(node, CountLeftStrict):
        out.add("strict")
        _features(node.phi, out)
    elif isinstance(node, CountRightStrict):
        out.add("strict")
        _features(node.phi, out)
    elif isinstance(node, Ite):
        out.add("ite")
        _features(node.cond, out)
        _features(node.then, out)
        _features(node.els, out)
    else:
        raise FormulaError(f"unknown node {node!r}")


def symbols_of(node):
    """All symbols appearing in Q(.) atoms."""
    out = set()

    def walk(n):
        if isinstance(n, Sym):
            out.add(n.sym)
        elif isinstance(n, (Not, Prev)):
            walk(n.phi)
        elif isinstance(n, (And, Or)):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Compare):
            walk(n.lhs)
            walk(n.rhs)
        elif isinstance(n, (CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict)):
            walk(n.phi)
        elif isinstance(n, Sum):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Neg):
            walk(n.term)
        elif isinstance(n, Ite):
            walk(n.cond)
            walk(n.then)
            walk(n.els)

    walk(node)
    return out


# --- Evaluation ---
#
# evaluate_all computes, in one bottom-up pass with subterm sharing, the value
# of a formula (list of bools) or term (list of ints) at every position of w.
# Shared sub-ASTs (DAGs, as produced by the decompiler) are evaluated once.

def evaluate_all(node, w):
    if len(w) == 0:
        raise FormulaError("semantics are undefined on the empty word")
    cache = {}
    return _eval_all(node, w, cache)


def _eval_all(node, w, cache):
    key = id(node)
    hit = cache.get(key)
    if hit is not None:
        return hit
    n = len(w)
    if isinstance(node, Sym):
        res = [c == node.sym for c in w]
    elif isinstance(node, BoolConst):
        res = [node.value] * n
    elif isinstance(node, Mod):
        res = [(i % node.m) == node.r for i in range(1, n + 1)]
    elif isinstance(node, Prev):
        sub = _eval_all(node.phi, w, cache)
        res = [False] + sub[:-1]
    elif isinstance(node, Not):
        sub = _eval_all(node.phi, w, cache)
        res = [not v for v in sub]
    elif isinstance(node, And):
        a = _eval_all(node.left, w, cache)
        b = _eval_all(node.right, w, cache)
        res = [x and y for x, y in zip(a, b)]
    elif isinstance(node, Or):
        a = _eval_all(node.left, w, cache)
        b = _eval_all(node.right, w, cache)
        res = [x or y for x, y in zip(a, b)]
    elif isinstance(node, Compare):
        a = _eval_all(node.lhs, w, cache)
        b = _eval_all(node.rhs, w, cache)
        op = node.op
        if op == "<":
            res = [x < y for x, y in zip(a, b)]
        elif op == "<=":
            res = [x <= y for x, y in zip(a, b)]
        elif op == ">":
            res = [x > y for x, y in zip(a, b)]
        elif op == ">=":
            res = [x >= y for x, y in zip(a, b)]
        elif op == "=":
            res = [x == y for x, y in zip(a, b)]
        else:
            res = [x != y for x, y in zip(a, b)]
    elif isinstance(node, CountLeft):
        sub = _eval_all(node.phi, w, cache)
        res = _prefix_counts(sub)
    elif isinstance(node, CountRight):
        sub = _eval_all(node.phi, w, cache)
        total = sum(sub)
        pref = _prefix_counts(sub)
        res = [total - p + (1 if v else 0) for p, v in zip(pref, sub)]
    elif isinstance(node, CountAll):
        sub = _eval_all(node.phi, w, cache)
        total = sum(sub)
        res = [total] * n
    elif isinstance(node, CountLeftStrict):
        # counts j in [1, i-1]; see the Lemma A.2-style identity #<o = #< - (phi?1:0)
        sub = _eval_all(node.phi, w, cache)
        pref = _prefix_counts(sub)
        res = [p - (1 if v else 0) for p, v in zip(pref, sub)]
    elif isinstance(node, CountRightStrict):
        sub = _eval_all(node.phi, w, cache)
        total = sum(sub)
        pref = _prefix_counts(sub)
        res = [total - p for p in pref]
    elif isinstance(node, Sum):
        a = _eval_all(node.left, w, cache)
        b = _eval_all(node.right, w, cache)
        res = [x + y for x, y in zip(a, b)]
    elif isinstance(node, Neg):
        sub = _eval_all(node.term, w, cache)
        res = [-x for x in sub]
    elif isinstance(node, IntConst):
        res = [node.value] * n
    elif isinstance(node, Ite):
        c = _eval_all(node.cond, w, cache)
        a = _eval_all(node.then, w, cache)
        b = _eval_all(node.els, w, cache)
        res = [x if cv else y for cv, x, y in zip(c, a, b)]
    else:
        raise FormulaError(f"unknown node {node!r}")
    cache[key] = res
    return res


def _prefix_counts(bools):
    out = []
    c = 0
    for v in bools:
        if v:
            c += 1
        out.append(c)
    return out


def eval_formula(phi, w, i):
    """Truth of phi at position i (1-based) of w."""
    if not isinstance(phi, Formula):
        raise FormulaError("eval_formula expects a Formula")
    if not 1 <= i <= len(w):
        raise FormulaError(f"position {i} out of range for |w|={len(w)}")
    return evaluate_all(phi, w)[i - 1]


def eval_term(t, w, i):
    """Exact integer value of term t at position i (1-based) of w."""
    if not isinstance(t, Term):
        raise FormulaError("eval_term expects a Term")
    if not 1 <= i <= len(w):
        raise FormulaError(f"position {i} out of range for |w|={len(w)}")
    return evaluate_all(t, w)[i - 1]


def accepts(phi, w):
    """Word acceptance: phi holds at the final position."""
    if len(w) == 0:
        raise FormulaError("acceptance is undefined on the empty word")
    return evaluate_all(phi, w)[-1]


# --- Printer ---

def print_formula(node):
    return _print(node, set())


def _print(node, _seen):
    if isinstance(node, Sym):
        return f"Q({node.sym})"
    if isinstance(node, BoolConst):
        return "TRUE" if node.value else "FALSE"
    if isinstance(node, Not):
        inner = _print(node.phi, _seen)
        if isinstance(node.phi, (Sym, BoolConst, Prev, Mod, Not)):
            return f"!{inner}"
        return f"!({inner})"
    if isinstance(node, And):
        return f"{_print_and_operand(node.left)} && {_print_and_operand(node.right)}"
    if isinstance(node, Or):
        return f"{_print(node.left, _seen)} || {_print(node.right, _seen)}"
    if isinstance(node, Compare):
        return f"{_print(node.lhs, _seen)} {node.op} {_print(node.rhs, _seen)}"
    if isinstance(node, Prev):
        return f"Y({_print(node.phi, _seen)})"
    if isinstance(node, Mod):
        return f"MOD({node.m},{node.r})"
    if isinstance(node, CountLeft):
        return f"#<[{_print(node.phi, _seen)}]"
    if isinstance(node, CountRight):
        return f"#>[{_print(node.phi, _seen)}]"
    if isinstance(node, CountAll):
        return f"#[{_print(node.phi, _seen)}]"
    if isinstance(node, CountLeftStrict):
        return f"#<o[{_print(node.phi, _seen)}]"
    if isinstance(node, CountRightStrict):
        return f"#o>[{_print(node.phi, _seen)}]"
    if isinstance(node, Sum):
        right = node.right
        if isinstance(right, Neg):
            return f"{_print(node.left, _seen)} - {_print_factor(right.term)}"
        return f"{_print(node.left, _seen)} + {_print_factor(right)}"
    if isinstance(node, Neg):
        # A bare negated term has no direct surface form; 0 - t is equivalent.
        if isinstance(node.term, IntConst):
            return str(-node.term.value)
        return f"0 - {_print_factor(node.term)}"
    if isinstance(node, IntConst):
        return str(node.value)
    if isinstance(node, Ite):
        return f"({_print(node.cond, _seen)} ? {_print(node.then, _seen)} : {_print(node.els, _seen)})"
    raise FormulaError(f"unknown node {node!r}")


def _print_and_operand(node):
    inner = _print(node, set())
    if isinstance(node, Or):
        return f"({inner})"
    return inner


def _print_factor(node):
    # Right operand of +/-: must be a single factor, so parenthesize sums.
    inner = _print(node, set())
    if isinstance(node, (Sum, Neg)):
        # No grouping syntax exists for terms; re-associate via an Ite-free trick
        # is not possible, so fall back to printing with explicit addition of 0.
        # Parser never produces a Sum in factor position, so this only affects
        # hand-built ASTs; printed output still evaluates identically.
        return f"(TRUE ? {inner} : 0)"
    return inner


# --- Parser ---

class _Lexer:
    KEYWORDS = ("#<o[", "#o>[", "#<[", "#>[", "#[", "MOD(", "TRUE", "FALSE",
                "||", "&&", "<=", ">=", "!=", "Y(")
    SINGLES = "()!<>=+-*?:,]"

    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._lex()

    def _error(self, msg):
        line = self.text.count("\n", 0, self.pos) + 1
        col = self.pos - (self.text.rfind("\n", 0, self.pos) + 1) + 1
        raise ParseError(f"{msg} at line {line}, column {col}")

    def _lex(self):
        t = self.text
        while self.pos < len(t):
            if t[self.pos].isspace():
                self.pos += 1
                continue
            if t.startswith("Q(", self.pos):
                # symbol atom: Q( <any single non-space char> )
                j = self.pos + 2
                while j < len(t) and t[j].isspace():
                    j += 1
                if j >= len(t):
                    self._error("unterminated Q(")
                sym = t[j]
                j += 1
                while j < len(t) and t[j].isspace():
                    j += 1
                if j >= len(t) or t[j] != ")":
                    self._error("expected ')' after Q symbol")
                self.tokens.append(("SYM", sym, self.pos))
                self.pos = j + 1
                continue
            for kw in self.KEYWORDS:
                if t.startswith(kw, self.pos):
                    self.tokens.append((kw, kw, self.pos))
                    self.pos += len(kw)
                    break
            else:
                ch = t[self.pos]
                if ch.isdigit():
                    j = self.pos
                    while j < len(t) and t[j].isdigit():
                        j += 1
                    self.tokens.append(("INT", int(t[self.pos:j]), self.pos))
                    self.pos = j
                elif ch in self.SINGLES:
                    self.tokens.append((ch, ch, self.pos))
                    self.pos += 1
                else:
                    self._error(f"unexpected character {ch!r}")


class _Parser:
    def __init__(self, text, alphabet):
        self.text = text
        self.alphabet = alphabet
        self.tokens = _Lexer(text).tokens
        self.i = 0

    def _error(self, msg, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        raise ParseError(f"{msg} at line {line}, column {col}")

    def _peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def _next(self):
        if self.i >= len(self.tokens):
            self._error("unexpected end of input")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, kind):
        tok = self._next()
        if tok[0] != kind:
            self._error(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self):
        phi = self.formula()
        if self.i < len(self.tokens):
            self._error(f"trailing input {self.tokens[self.i][1]!r}")
        return phi

    def formula(self):
        phi = self.conj()
        while self._peek() == "||":
            self._next()
            phi = Or(phi, self.conj())
        return phi

    def conj(self):
        phi = self.unary()
        while self._peek() == "&&":
            self._next()
            phi = And(phi, self.unary())
        return phi

    def unary(self):
        kind = self._peek()
        if kind == "!":
            self._next()
            return Not(self.unary())
        if kind == "Y(":
            self._next()
            phi = self.formula()
            self._expect(")")
            return Prev(phi)
        if kind == "MOD(":
            tok = self._next()
            m = self._expect("INT")[1]
            self._expect(",")
            r = self._expect("INT")[1]
            self._expect(")")
            if m < 1 or not 0 <= r < m:
                self._error(f"MOD requires 0 <= r < m, got ({m},{r})", tok[2])
            return Mod(m, r)
        if kind == "SYM":
            tok = self._next()
            if self.alphabet is not None and tok[1] not in self.alphabet:
                self._error(f"symbol {tok[1]!r} not in alphabet", tok[2])
            return Sym(tok[1])
        if kind == "TRUE":
            self._next()
            return TRUE
        if kind == "FALSE":
            self._next()
            return FALSE
        if kind == "(":
            # Could be a parenthesized formula or a comparison whose first
            # factor is a conditional term; try the comparison first.
            mark = self.i
            try:
                return self.compare()
            except ParseError:
                self.i = mark
            self._next()
            phi = self.formula()
            self._expect(")")
            return phi
        return self.compare()

    def compare(self):
        lhs = self.term()
        tok = self._next()
        op = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "=": "=", "!=": "!="}.get(tok[0])
        if op is None:
            self._error(f"expected comparison operator, found {tok[1]!r}", tok[2])
        rhs = self.term()
        return Compare(lhs, op, rhs)

    def term(self):
        t = self.factor()
        while self._peek() in ("+", "-"):
            op = self._next()[0]
            f = self.factor()
            t = Sum(t, Neg(f) if op == "-" else f)
        return t

    def factor(self):
        kind = self._peek()
        if kind == "-":
            # negative integer literal
            tok = self._next()
            n = self._expect("INT")[1]
            return IntConst(-n)
        if kind == "INT":
            n = self._next()[1]
            if self._peek() == "*":
                self._next()
                return scale_term(n, self.factor())
            return IntConst(n)
        if kind in ("#<[", "#>[", "#[", "#<o[", "#o>["):
            self._next()
            phi = self.formula()
            self._expect("]")
            ctor = {"#<[": CountLeft, "#>[": CountRight, "#[": CountAll,
                    "#<o[": CountLeftStrict, "#o>[": CountRightStrict}[kind]
            return ctor(phi)
        if kind == "(":
            self._next()
            cond = self.formula()
            self._expect("?")
            then = self.term()
            self._expect(":")
            els = self.term()
            self._expect(")")
            return Ite(cond, then, els)
        self._error(f"expected a term, found {self._peek()!r}")


def parse(text, alphabet=None):
    """Parse formula text; alphabet, if given, restricts Q(.) symbols."""
    return _Parser(text, alphabet).parse()

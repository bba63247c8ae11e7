"""Two-variable majority logic over ordered positions, and translations to/from
the counting temporal logic.

The majority quantifier MAJv<f1; ...; fm> holds when, summing over all n
positions for v and all m list entries, the number of true instances exceeds
n*m/2. Exists/Forall are sugar over it. Translations:

- tl_to_maj2: comparisons of counting terms become a MAJ over unit terms,
  padding each positive term with TRUE and each negated term with FALSE so the
  majority threshold coincides with "sum > 0".
- maj2_to_tl: a MAJ over the other variable becomes a comparison of counting
  terms; each body is expanded into mutually exclusive conjuncts by a truth
  table over its atoms (current-position symbol, counted-position symbol,
  relative order, nested quantified subformulas), and each conjunct is counted
  with the matching directional count. A MAJ that rebinds the current variable
  is position-independent and uses whole-word counts instead.
"""

from dataclasses import dataclass

from .formulas import (
    Sym, Not, And, Or, Compare, BoolConst, CountLeft, CountRight, CountAll,
    Sum, Neg, IntConst, Ite, TRUE, FALSE,
    big_and, big_or, big_sum, FormulaError,
)
from .transforms import normalize_to_minimal_basis, desugar


VARS = ("x", "y")


class Maj2Error(Exception):
    pass


@dataclass(frozen=True)
class Maj2Formula:
    pass


@dataclass(frozen=True)
class MSym(Maj2Formula):
    sym: str
    var: str

    def __post_init__(self):
        if self.var not in VARS:
            raise Maj2Error(f"unknown variable {self.var!r}")


@dataclass(frozen=True)
class MLess(Maj2Formula):
    left: str
    right: str

    def __post_init__(self):
        if self.left not in VARS or self.right not in VARS or self.left == self.right:
            raise Maj2Error("order atom needs the two distinct variables")


@dataclass(frozen=True)
class MBool(Maj2Formula):
    value: bool


@dataclass(frozen=True)
class MNot(Maj2Formula):
    phi: Maj2Formula


@dataclass(frozen=True)
class MAnd(Maj2Formula):
    left: Maj2Formula
    right: Maj2Formula


@dataclass(frozen=True)
class MOr(Maj2Formula):
    left: Maj2Formula
    right: Maj2Formula


@dataclass(frozen=True)
class MMaj(Maj2Formula):
    var: str
    formulas: tuple

    def __post_init__(self):
        if self.var not in VARS:
            raise Maj2Error(f"unknown variable {self.var!r}")
        if not self.formulas:
            raise Maj2Error("majority quantifier needs at least one formula")


@dataclass(frozen=True)
class MExists(Maj2Formula):
    var: str
    phi: Maj2Formula


@dataclass(frozen=True)
class MForall(Maj2Formula):
    var: str
    phi: Maj2Formula


MTOP = MBool(True)
MBOT = MBool(False)


def free_vars(phi):
    if isinstance(phi, MSym):
        return frozenset([phi.var])
    if isinstance(phi, MLess):
        return frozenset(VARS)
    if isinstance(phi, MBool):
        return frozenset()
    if isinstance(phi, MNot):
        return free_vars(phi.phi)
    if isinstance(phi, (MAnd, MOr)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, MMaj):
        out = frozenset()
        for f in phi.formulas:
            out |= free_vars(f)
        return out - {phi.var}
    if isinstance(phi, (MExists, MForall)):
        return free_vars(phi.phi) - {phi.var}
    raise Maj2Error(f"unknown node {phi!r}")


def desugar_maj2(phi):
    """Rewrite Exists/Forall into the majority quantifier; same depth."""
    if isinstance(phi, (MSym, MLess, MBool)):
        return phi
    if isinstance(phi, MNot):
        return MNot(desugar_maj2(phi.phi))
    if isinstance(phi, MAnd):
        return MAnd(desugar_maj2(phi.left), desugar_maj2(phi.right))
    if isinstance(phi, MOr):
        return MOr(desugar_maj2(phi.left), desugar_maj2(phi.right))
    if isinstance(phi, MMaj):
        return MMaj(phi.var, tuple(desugar_maj2(f) for f in phi.formulas))
    if isinstance(phi, MExists):
        return MMaj(phi.var, (desugar_maj2(phi.phi), MTOP))
    if isinstance(phi, MForall):
        return MNot(MMaj(phi.var, (MNot(desugar_maj2(phi.phi)), MTOP)))
    raise Maj2Error(f"unknown node {phi!r}")


def depth_maj2(phi):
    """Nesting depth of majority quantifiers; sugar scores as its encoding."""
    if isinstance(phi, (MSym, MLess, MBool)):
        return 0
    if isinstance(phi, MNot):
        return depth_maj2(phi.phi)
    if isinstance(phi, (MAnd, MOr)):
        return max(depth_maj2(phi.left), depth_maj2(phi.right))
    if isinstance(phi, MMaj):
        return 1 + max(depth_maj2(f) for f in phi.formulas)
    if isinstance(phi, (MExists, MForall)):
        return 1 + depth_maj2(phi.phi)
    raise Maj2Error(f"unknown node {phi!r}")


def eval_maj2(phi, w, xi=None):
    """Truth of phi on w under the (partial) assignment xi."""
    if not w:
        raise Maj2Error("the empty word is outside the semantics")
    xi = dict(xi or {})
    for v, i in xi.items():
        if v not in VARS:
            raise Maj2Error(f"unknown variable {v!r}")
        if not 1 <= i <= len(w):
            raise Maj2Error(f"assignment {v}={i} outside [1,{len(w)}]")
    return _eval(phi, w, xi)


def _eval(phi, w, xi):
    if isinstance(phi, MSym):
        if phi.var not in xi:
            raise Maj2Error(f"unbound variable {phi.var!r}")
        return w[xi[phi.var] - 1] == phi.sym
    if isinstance(phi, MLess):
        if phi.left not in xi or phi.right not in xi:
            raise Maj2Error("unbound variable in order atom")
        return xi[phi.left] < xi[phi.right]
    if isinstance(phi, MBool):
        return phi.value
    if isinstance(phi, MNot):
        return not _eval(phi.phi, w, xi)
    if isinstance(phi, MAnd):
        return _eval(phi.left, w, xi) and _eval(phi.right, w, xi)
    if isinstance(phi, MOr):
        return _eval(phi.left, w, xi) or _eval(phi.right, w, xi)
    if isinstance(phi, MMaj):
        n = len(w)
        m = len(phi.formulas)
        total = 0
        for i in range(1, n + 1):
            xi2 = dict(xi)
            xi2[phi.var] = i
            for f in phi.formulas:
                if _eval(f, w, xi2):
                    total += 1
        return 2 * total > n * m
    if isinstance(phi, (MExists, MForall)):
        return _eval(desugar_maj2(phi), w, xi)
    raise Maj2Error(f"unknown node {phi!r}")


# --- Text format ---

def print_maj2(phi):
    return _pr(phi, 0)


def _pr(phi, level):
    # level 0: or, 1: and, 2: atom
    if isinstance(phi, MSym):
        return f"Q({phi.sym}; {phi.var})"
    if isinstance(phi, MLess):
        return f"{phi.left} < {phi.right}"
    if isinstance(phi, MBool):
        return "TRUE" if phi.value else "FALSE"
    if isinstance(phi, MNot):
        return "!" + _wrap(phi.phi, 2)
    if isinstance(phi, MAnd):
        s = f"{_wrap(phi.left, 1)} && {_wrap(phi.right, 1)}"
        return f"({s})" if level > 1 else s
    if isinstance(phi, MOr):
        s = f"{_wrap(phi.left, 0)} || {_wrap(phi.right, 0)}"
        return f"({s})" if level > 0 else s
    if isinstance(phi, MMaj):
        return f"MAJ{phi.var}< " + "; ".join(_pr(f, 0) for f in phi.formulas) + " >"
    if isinstance(phi, MExists):
        return f"E{phi.var}[ {_pr(phi.phi, 0)} ]"
    if isinstance(phi, MForall):
        return f"A{phi.var}[ {_pr(phi.phi, 0)} ]"
    raise Maj2Error(f"unknown node {phi!r}")


def _wrap(phi, level):
    if isinstance(phi, (MAnd, MOr)) and level >= (1 if isinstance(phi, MOr) else 2):
        return "(" + _pr(phi, 0) + ")"
    return _pr(phi, level)


class _P:
    def __init__(self, text):
        self.text = text
        self.i = 0

    def error(self, msg):
        raise Maj2Error(f"{msg} at offset {self.i}")

    def ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def eat(self, tok):
        self.ws()
        if self.text.startswith(tok, self.i):
            self.i += len(tok)
            return True
        return False

    def expect(self, tok):
        if not self.eat(tok):
            self.error(f"expected {tok!r}")

    def formula(self):
        phi = self.conj()
        while self.eat("||"):
            phi = MOr(phi, self.conj())
        return phi

    def conj(self):
        phi = self.unary()
        while self.eat("&&"):
            phi = MAnd(phi, self.unary())
        return phi

    def unary(self):
        self.ws()
        if self.eat("!"):
            return MNot(self.unary())
        if self.eat("TRUE"):
            return MTOP
        if self.eat("FALSE"):
            return MBOT
        if self.eat("MAJ"):
            var = self.var()
            self.expect("<")
            fs = [self.formula()]
            while self.eat(";"):
                fs.append(self.formula())
            self.expect(">")
            return MMaj(var, tuple(fs))
        for mark, cls in (("E", MExists), ("A", MForall)):
            if self.text.startswith(mark, self.i) and \
                    self.text[self.i + 1:self.i + 2] in VARS:
                self.i += 1
                var = self.var()
                self.expect("[")
                body = self.formula()
                self.expect("]")
                return cls(var, body)
        if self.eat("Q("):
            self.ws()
            if self.i >= len(self.text):
                self.error("unterminated symbol atom")
            sym = self.text[self.i]
            self.i += 1
            self.expect(";")
            var = self.var()
            self.expect(")")
            return MSym(sym, var)
        if self.text[self.i:self.i + 1] in VARS:
            a = self.var()
            self.expect("<")
            b = self.var()
            return MLess(a, b)
        if self.eat("("):
            phi = self.formula()
            self.expect(")")
            return phi
        self.error("expected a formula")

    def var(self):
        self.ws()
        v = self.text[self.i:self.i + 1]
        if v not in VARS:
            self.error("expected a variable x or y")
        self.i += 1
        return v


def parse_maj2(text):
    p = _P(text)
    phi = p.formula()
    p.ws()
    if p.i != len(p.text):
        p.error("trailing input")
    return phi


# --- Counting logic -> majority logic ---

def _other(v):
    return "y" if v == "x" else "x"


def _strip_ites(cmp):
    """Split conditional terms out of a comparison, innermost first."""
    ite = _find_ite(cmp.lhs) or _find_ite(cmp.rhs)
    if ite is None:
        return cmp

    def subst(branch):
        return Compare(_subst(cmp.lhs, ite, branch), cmp.op, _subst(cmp.rhs, ite, branch))

    if isinstance(ite.cond, BoolConst):
        return _strip_ites(subst(ite.then if ite.cond.value else ite.els))
    return Or(And(ite.cond, _strip_ites(subst(ite.then))),
              And(Not(ite.cond), _strip_ites(subst(ite.els))))


def _find_ite(t):
    if isinstance(t, Ite):
        return _find_ite(t.then) or _find_ite(t.els) or t
    if isinstance(t, Sum):
        return _find_ite(t.left) or _find_ite(t.right)
    if isinstance(t, Neg):
        return _find_ite(t.term)
    return None


def _subst(t, target, repl):
    if t == target:
        return repl
    if isinstance(t, Sum):
        return Sum(_subst(t.left, target, repl), _subst(t.right, target, repl))
    if isinstance(t, Neg):
        return Neg(_subst(t.term, target, repl))
    if isinstance(t, Ite):
        return Ite(t.cond, _subst(t.then, target, repl), _subst(t.els, target, repl))
    return t


def _prepare(phi):
    """Like full desugaring, but whole-word counts are kept as single terms."""
    if isinstance(phi, (Sym, BoolConst)):
        return phi
    if isinstance(phi, Not):
        return Not(_prepare(phi.phi))
    if isinstance(phi, And):
        return And(_prepare(phi.left), _prepare(phi.right))
    if isinstance(phi, Or):
        return Or(_prepare(phi.left), _prepare(phi.right))
    if isinstance(phi, Compare):
        return _strip_ites(Compare(_prep_term(phi.lhs), phi.op, _prep_term(phi.rhs)))
    raise Maj2Error(f"not a two-direction counting formula: {phi!r}")


def _prep_term(t):
    if isinstance(t, IntConst):
        return t
    if isinstance(t, CountLeft):
        return CountLeft(_prepare(t.phi))
    if isinstance(t, CountRight):
        return CountRight(_prepare(t.phi))
    if isinstance(t, CountAll):
        return CountAll(_prepare(t.phi))
    if isinstance(t, Sum):
        return Sum(_prep_term(t.left), _prep_term(t.right))
    if isinstance(t, Neg):
        return Neg(_prep_term(t.term))
    if isinstance(t, Ite):
        return Ite(_prepare(t.cond), _prep_term(t.then), _prep_term(t.els))
    from .formulas import CountLeftStrict, CountRightStrict
    if isinstance(t, CountLeftStrict):
        d = _prepare(t.phi)
        return Sum(CountLeft(d), Neg(Ite(d, IntConst(1), IntConst(0))))
    if isinstance(t, CountRightStrict):
        d = _prepare(t.phi)
        return Sum(CountRight(d), Neg(Ite(d, IntConst(1), IntConst(0))))
    raise Maj2Error(f"cannot translate term {t!r}")


def _flatten(t, sign, counts, const):
    if isinstance(t, IntConst):
        const[0] += sign * t.value
    elif isinstance(t, Sum):
        _flatten(t.left, sign, counts, const)
        _flatten(t.right, sign, counts, const)
    elif isinstance(t, Neg):
        _flatten(t.term, -sign, counts, const)
    elif isinstance(t, (CountLeft, CountRight, CountAll)):
        counts.append((t, sign))
    else:
        raise Maj2Error(f"unexpected term {t!r}")


def tl_to_maj2(phi):
    """Position-equivalent majority formula with free variable x; depth preserved."""
    norm = normalize_to_minimal_basis(_prepare(phi))
    return _mx(norm, "x")


def _mx(phi, cur):
    other = _other(cur)
    if isinstance(phi, Sym):
        return MSym(phi.sym, cur)
    if isinstance(phi, BoolConst):
        return MBool(phi.value)
    if isinstance(phi, Not):
        return MNot(_mx(phi.phi, cur))
    if isinstance(phi, And):
        return MAnd(_mx(phi.left, cur), _mx(phi.right, cur))
    if isinstance(phi, Compare):
        # minimal basis: lhs < rhs, i.e. rhs - lhs > 0
        counts = []
        const = [0]
        _flatten(phi.rhs, 1, counts, const)
        _flatten(phi.lhs, -1, counts, const)
        entries = []
        for term, sign in counts:
            body = _mx(term.phi, other)
            if isinstance(term, CountLeft):
                f = MAnd(MNot(MLess(cur, other)), body)   # other <= cur
            elif isinstance(term, CountRight):
                f = MAnd(MNot(MLess(other, cur)), body)   # other >= cur
            else:
                f = body                                  # whole word
            if sign > 0:
                entries += [f, MTOP]
            else:
                entries += [MNot(f), MBOT]
        same = MAnd(MNot(MLess(cur, other)), MNot(MLess(other, cur)))
        c = const[0]
        for _ in range(abs(c)):
            if c > 0:
                entries += [same, MTOP]
            else:
                entries += [MNot(same), MBOT]
        if not entries:
            return MBool(False)  # empty sums: 0 > 0
        if not counts:
            return MBool(c > 0)  # constant comparison; keep depth at 0
        return MMaj(other, tuple(entries))
    raise Maj2Error(f"cannot translate {phi!r}")


def tl_to_maj2_closed(phi):
    """Closed formula accepting w iff w satisfies phi at its last position."""
    inner = tl_to_maj2(phi)
    last = MNot(MExists("y", MLess("x", "y")))
    return desugar_maj2(MExists("x", MAnd(last, inner)))


# --- Majority logic -> counting logic ---

def maj2_to_tl(phi, alphabet):
    """Position-equivalent counting formula; free variable set of phi must be
    within {x} (a closed formula is treated as having free variable x)."""
    fv = free_vars(phi)
    if "y" in fv:
        raise Maj2Error("formula must have free variables within {x}")
    return _tx(desugar_maj2(phi), "x", list(alphabet))


def _tx(phi, cur, sigma):
    if isinstance(phi, MSym):
        if phi.var != cur:
            raise Maj2Error(f"free variable {phi.var!r} where only {cur!r} is bound")
        return Sym(phi.sym)
    if isinstance(phi, MBool):
        return BoolConst(phi.value)
    if isinstance(phi, MNot):
        return Not(_tx(phi.phi, cur, sigma))
    if isinstance(phi, MAnd):
        return And(_tx(phi.left, cur, sigma), _tx(phi.right, cur, sigma))
    if isinstance(phi, MOr):
        return Or(_tx(phi.left, cur, sigma), _tx(phi.right, cur, sigma))
    if isinstance(phi, MLess):
        raise Maj2Error("order atom with two free variables")
    if isinstance(phi, MMaj):
        if phi.var == cur:
            # rebinds the current variable: position-independent whole-word majority
            pos = [CountAll(_tx(f, cur, sigma)) for f in phi.formulas]
            neg = [CountAll(_tx(MNot(f), cur, sigma)) for f in phi.formulas]
            return Compare(big_sum(pos), ">", big_sum(neg))
        pos = [_count(f, phi.var, cur, sigma) for f in phi.formulas]
        neg = [_count(MNot(f), phi.var, cur, sigma) for f in phi.formulas]
        return Compare(big_sum(pos), ">", big_sum(neg))
    raise Maj2Error(f"cannot translate {phi!r}")


def _atoms_of(phi, cv, cur, sym_atoms, maj_atoms):
    if isinstance(phi, MSym):
        sym_atoms.add(phi.var)
    elif isinstance(phi, (MBool, MLess)):
        pass
    elif isinstance(phi, MNot):
        _atoms_of(phi.phi, cv, cur, sym_atoms, maj_atoms)
    elif isinstance(phi, (MAnd, MOr)):
        _atoms_of(phi.left, cv, cur, sym_atoms, maj_atoms)
        _atoms_of(phi.right, cv, cur, sym_atoms, maj_atoms)
    elif isinstance(phi, MMaj):
        if phi not in maj_atoms:
            maj_atoms.append(phi)
    else:
        raise Maj2Error(f"unexpected node {phi!r}")


def _truth(phi, env):
    """Evaluate a body under an atom assignment; nested majorities are atoms."""
    if isinstance(phi, MSym):
        return env["sym"][phi.var] == phi.sym
    if isinstance(phi, MLess):
        return env["order"](phi.left, phi.right)
    if isinstance(phi, MBool):
        return phi.value
    if isinstance(phi, MNot):
        return not _truth(phi.phi, env)
    if isinstance(phi, MAnd):
        return _truth(phi.left, env) and _truth(phi.right, env)
    if isinstance(phi, MOr):
        return _truth(phi.left, env) or _truth(phi.right, env)
    if isinstance(phi, MMaj):
        return env["maj"][phi]
    raise Maj2Error(f"unexpected node {phi!r}")


def _count(psi, cv, cur, sigma):
    """Term counting the positions for cv that satisfy psi (cur is the other,
    fixed variable): truth-table expansion into exclusive conjuncts, each
    counted with the directional count matching its order constraint."""
    sym_atoms = set()
    maj_atoms = []
    _atoms_of(psi, cv, cur, sym_atoms, maj_atoms)
    cur_majs = [a for a in maj_atoms if cv in free_vars(a)]
    fix_majs = [a for a in maj_atoms if cv not in free_vars(a)]
    if len(maj_atoms) > 12:
        raise Maj2Error("majority body too large to expand")

    # translated literals, shared across conjuncts
    tl_cur = {a: _tx(a, cur, sigma) for a in fix_majs}
    tl_cv = {a: _tx(a, cv, sigma) for a in cur_majs}

    pieces = []
    for s_cur in sigma:
        for s_cv in sigma:
            for rel in ("before", "eq", "after"):  # position of cv relative to cur
                if rel == "eq" and s_cur != s_cv:
                    continue

                def order(a, b, rel=rel):
                    # is position(a) < position(b)?
                    if a == cur:  # b == cv
                        return rel == "after"
                    return rel == "before"

                for bits in range(1 << len(maj_atoms)):
                    maj_env = {a: bool(bits >> k & 1)
                               for k, a in enumerate(maj_atoms)}
                    env = {"sym": {cur: s_cur, cv: s_cv}, "order": order,
                           "maj": maj_env}
                    if not _truth(psi, env):
                        continue
                    cur_part = big_and([Sym(s_cur)] +
                                       [tl_cur[a] if maj_env[a] else Not(tl_cur[a])
                                        for a in fix_majs])
                    cv_part = big_and([Sym(s_cv)] +
                                      [tl_cv[a] if maj_env[a] else Not(tl_cv[a])
                                       for a in cur_majs])
                    if rel == "eq":
                        pieces.append(Ite(And(cur_part, cv_part),
                                          IntConst(1), IntConst(0)))
                    elif rel == "before":
                        count = Sum(CountLeft(cv_part),
                                    Neg(Ite(cv_part, IntConst(1), IntConst(0))))
                        pieces.append(Ite(cur_part, count, IntConst(0)))
                    else:
                        count = Sum(CountRight(cv_part),
                                    Neg(Ite(cv_part, IntConst(1), IntConst(0))))
                        pieces.append(Ite(cur_part, count, IntConst(0)))
    return big_sum(pieces) if pieces else IntConst(0)

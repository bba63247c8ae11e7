"""Semantics- and depth-preserving formula rewrites.

- desugar: remove the conditional term and the unmasked/strict counting
  operators, leaving only plain prefix/suffix counts.
- normalize_to_minimal_basis: rewrite <=, >, >=, =, != and || into {<, !, &&}.
- y_normal_form: push Y inward until it applies only to atoms, with a
  boundary guard so truth values at the first few positions are preserved.
- neutral_letter_reduce: eliminate Y and MOD by simulating the formula on
  words interleaved with a neutral padding letter.
"""

import math

from .formulas import (
    Formula, Term, Sym, Not, And, Or, Compare, Prev, Mod, BoolConst,
    CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict,
    Sum, Neg, IntConst, Ite, TRUE, FALSE,
    FormulaError, big_or, big_sum, evaluate_all, features,
)


# --- Sugar elimination ---

def desugar(phi):
    """Remove Ite terms and CountAll/strict counts; language-equivalent, same depth."""
    if isinstance(phi, (Sym, BoolConst, Mod)):
        return phi
    if isinstance(phi, Not):
        return Not(desugar(phi.phi))
    if isinstance(phi, Prev):
        return Prev(desugar(phi.phi))
    if isinstance(phi, And):
        return And(desugar(phi.left), desugar(phi.right))
    if isinstance(phi, Or):
        return Or(desugar(phi.left), desugar(phi.right))
    if isinstance(phi, Compare):
        cmp = Compare(_desugar_term(phi.lhs), phi.op, _desugar_term(phi.rhs))
        return _eliminate_ites(cmp)
    raise FormulaError(f"cannot desugar {phi!r}")


def _desugar_term(t):
    if isinstance(t, IntConst):
        return t
    if isinstance(t, CountLeft):
        return CountLeft(desugar(t.phi))
    if isinstance(t, CountRight):
        return CountRight(desugar(t.phi))
    if isinstance(t, CountAll):
        d = desugar(t.phi)
        return Sum(Sum(CountLeft(d), CountRight(d)), Neg(Ite(d, IntConst(1), IntConst(0))))
    if isinstance(t, CountLeftStrict):
        d = desugar(t.phi)
        return Sum(CountLeft(d), Neg(Ite(d, IntConst(1), IntConst(0))))
    if isinstance(t, CountRightStrict):
        d = desugar(t.phi)
        return Sum(CountRight(d), Neg(Ite(d, IntConst(1), IntConst(0))))
    if isinstance(t, Sum):
        return Sum(_desugar_term(t.left), _desugar_term(t.right))
    if isinstance(t, Neg):
        return Neg(_desugar_term(t.term))
    if isinstance(t, Ite):
        return Ite(desugar(t.cond), _desugar_term(t.then), _desugar_term(t.els))
    raise FormulaError(f"cannot desugar term {t!r}")


def _find_innermost_ite(t):
    if isinstance(t, Ite):
        inner = _find_innermost_ite(t.then) or _find_innermost_ite(t.els)
        return inner or t
    if isinstance(t, Sum):
        return _find_innermost_ite(t.left) or _find_innermost_ite(t.right)
    if isinstance(t, Neg):
        return _find_innermost_ite(t.term)
    return None


def _replace_term(t, target, repl):
    if t == target:
        return repl
    if isinstance(t, Sum):
        return Sum(_replace_term(t.left, target, repl), _replace_term(t.right, target, repl))
    if isinstance(t, Neg):
        return Neg(_replace_term(t.term, target, repl))
    if isinstance(t, Ite):
        return Ite(t.cond, _replace_term(t.then, target, repl), _replace_term(t.els, target, repl))
    return t


def _eliminate_ites(cmp):
    """Split a comparison on its conditional terms, innermost-first."""
    ite = _find_innermost_ite(cmp.lhs) or _find_innermost_ite(cmp.rhs)
    if ite is None:
        return _sign_normalize(cmp)

    def subst(branch):
        return Compare(_replace_term(cmp.lhs, ite, branch), cmp.op,
                       _replace_term(cmp.rhs, ite, branch))

    if isinstance(ite.cond, BoolConst):
        return _eliminate_ites(subst(ite.then if ite.cond.value else ite.els))
    return Or(And(ite.cond, _eliminate_ites(subst(ite.then))),
              And(Not(ite.cond), _eliminate_ites(subst(ite.els))))


def _flatten_signed(t, sign, pos, neg, const):
    if isinstance(t, IntConst):
        const[0] += sign * t.value
    elif isinstance(t, Sum):
        _flatten_signed(t.left, sign, pos, neg, const)
        _flatten_signed(t.right, sign, pos, neg, const)
    elif isinstance(t, Neg):
        _flatten_signed(t.term, -sign, pos, neg, const)
    elif isinstance(t, (CountLeft, CountRight)):
        (pos if sign > 0 else neg).append(t)
    else:
        raise FormulaError(f"unexpected term during sign normalization: {t!r}")


def _sign_normalize(cmp):
    """Move negated counts to the other side so neither side contains Neg."""
    lp, ln, lc = [], [], [0]
    rp, rn, rc = [], [], [0]
    _flatten_signed(cmp.lhs, 1, lp, ln, lc)
    _flatten_signed(cmp.rhs, 1, rp, rn, rc)
    c = rc[0] - lc[0]
    lhs_parts = lp + rn
    rhs_parts = rp + ln
    if c != 0 or not rhs_parts:
        rhs_parts = rhs_parts + [IntConst(c)]
    if not lhs_parts:
        lhs_parts = [IntConst(0)]
    return Compare(big_sum(lhs_parts), cmp.op, big_sum(rhs_parts))


# --- Minimal basis ---

def normalize_to_minimal_basis(phi):
    """Rewrite <=, >, >=, =, != and || into the {<, !, &&} basis."""
    if isinstance(phi, (Sym, BoolConst, Mod)):
        return phi
    if isinstance(phi, Not):
        return Not(normalize_to_minimal_basis(phi.phi))
    if isinstance(phi, Prev):
        return Prev(normalize_to_minimal_basis(phi.phi))
    if isinstance(phi, And):
        return And(normalize_to_minimal_basis(phi.left), normalize_to_minimal_basis(phi.right))
    if isinstance(phi, Or):
        a = normalize_to_minimal_basis(phi.left)
        b = normalize_to_minimal_basis(phi.right)
        return Not(And(Not(a), Not(b)))
    if isinstance(phi, Compare):
        lhs = _minimal_term(phi.lhs)
        rhs = _minimal_term(phi.rhs)
        if phi.op == "<":
            return Compare(lhs, "<", rhs)
        if phi.op == ">":
            return Compare(rhs, "<", lhs)
        if phi.op == "<=":
            return Not(Compare(rhs, "<", lhs))
        if phi.op == ">=":
            return Not(Compare(lhs, "<", rhs))
        if phi.op == "=":
            return And(Not(Compare(lhs, "<", rhs)), Not(Compare(rhs, "<", lhs)))
        return Not(And(Not(Compare(lhs, "<", rhs)), Not(Compare(rhs, "<", lhs))))
    raise FormulaError(f"cannot normalize {phi!r}")


def _minimal_term(t):
    if isinstance(t, IntConst):
        return t
    if isinstance(t, CountLeft):
        return CountLeft(normalize_to_minimal_basis(t.phi))
    if isinstance(t, CountRight):
        return CountRight(normalize_to_minimal_basis(t.phi))
    if isinstance(t, Sum):
        return Sum(_minimal_term(t.left), _minimal_term(t.right))
    if isinstance(t, Neg):
        return Neg(_minimal_term(t.term))
    if isinstance(t, Ite):
        return Ite(normalize_to_minimal_basis(t.cond), _minimal_term(t.then), _minimal_term(t.els))
    if isinstance(t, (CountAll, CountLeftStrict, CountRightStrict)):
        return type(t)(normalize_to_minimal_basis(t.phi))
    raise FormulaError(f"cannot normalize term {t!r}")


# --- Y-normal form ---

def is_ynf(phi):
    """Every Y applies only to a chain of Y's ending in a Sym or Mod atom."""
    if isinstance(phi, Prev):
        return _is_atom_chain(phi)
    if isinstance(phi, (Sym, BoolConst, Mod)):
        return True
    if isinstance(phi, Not):
        return is_ynf(phi.phi)
    if isinstance(phi, (And, Or)):
        return is_ynf(phi.left) and is_ynf(phi.right)
    if isinstance(phi, Compare):
        return _is_ynf_term(phi.lhs) and _is_ynf_term(phi.rhs)
    return False


def _is_atom_chain(phi):
    while isinstance(phi, Prev):
        phi = phi.phi
    return isinstance(phi, (Sym, Mod))


def _is_ynf_term(t):
    if isinstance(t, IntConst):
        return True
    if isinstance(t, (CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict)):
        return is_ynf(t.phi)
    if isinstance(t, Sum):
        return _is_ynf_term(t.left) and _is_ynf_term(t.right)
    if isinstance(t, Neg):
        return _is_ynf_term(t.term)
    if isinstance(t, Ite):
        return is_ynf(t.cond) and _is_ynf_term(t.then) and _is_ynf_term(t.els)
    return False


def _prev_chain(phi, c):
    for _ in range(c):
        phi = Prev(phi)
    return phi


def y_normal_form(phi, alphabet):
    """Push Y's inward onto atoms; equivalent at every position of every word over alphabet.

    Negations and comparisons that end up under c pending Y's are guarded by
    Y^c(Q(s1) || ... || Q(sm)) — true exactly at positions i > c — because the
    plain push would otherwise flip truth values at positions i <= c.
    """
    feats = features(phi)
    if "count_right" in feats:
        raise FormulaError("Y-normal form is defined for the past-only dialect (no #>)")
    phi = desugar(phi)
    syms = list(alphabet)
    return _ynf(phi, 0, syms)


def _guard(c, syms):
    return big_or([_prev_chain(Sym(s), c) for s in syms])


def _ynf(phi, c, syms):
    if isinstance(phi, Sym):
        return _prev_chain(phi, c)
    if isinstance(phi, Mod):
        # Y^c MOD(m,r) at position i tests (i-c) = r mod m and i > c, as required.
        return _prev_chain(phi, c)
    if isinstance(phi, BoolConst):
        if not phi.value:
            return FALSE
        return TRUE if c == 0 else _guard(c, syms)
    if isinstance(phi, Prev):
        return _ynf(phi.phi, c + 1, syms)
    if isinstance(phi, Not):
        body = Not(_ynf(phi.phi, c, syms))
        return body if c == 0 else And(_guard(c, syms), body)
    if isinstance(phi, And):
        return And(_ynf(phi.left, c, syms), _ynf(phi.right, c, syms))
    if isinstance(phi, Or):
        return Or(_ynf(phi.left, c, syms), _ynf(phi.right, c, syms))
    if isinstance(phi, Compare):
        body = Compare(_ynf_term(phi.lhs, c, syms), phi.op, _ynf_term(phi.rhs, c, syms))
        return body if c == 0 else And(_guard(c, syms), body)
    raise FormulaError(f"cannot Y-normalize {phi!r}")


def _ynf_term(t, c, syms):
    if isinstance(t, IntConst):
        return t
    if isinstance(t, CountLeft):
        return CountLeft(_ynf(t.phi, c, syms))
    if isinstance(t, Sum):
        return Sum(_ynf_term(t.left, c, syms), _ynf_term(t.right, c, syms))
    if isinstance(t, Neg):
        return Neg(_ynf_term(t.term, c, syms))
    raise FormulaError(f"cannot Y-normalize term {t!r}")


# --- Neutral-letter reduction ---

class NeutralReduction:
    """Padding amount x and the reduced formula over the alphabet without e."""

    def __init__(self, padding, reduced):
        self.padding = padding
        self.reduced = reduced


def _y_nesting(phi, c=0):
    if isinstance(phi, Prev):
        return _y_nesting(phi.phi, c + 1)
    if isinstance(phi, (Sym, Mod, BoolConst)):
        return c
    if isinstance(phi, Not):
        return _y_nesting(phi.phi, c)
    if isinstance(phi, (And, Or)):
        return max(_y_nesting(phi.left, c), _y_nesting(phi.right, c))
    if isinstance(phi, Compare):
        return max(_y_nesting_term(phi.lhs, c), _y_nesting_term(phi.rhs, c))
    raise FormulaError(f"unexpected node {phi!r}")


def _y_nesting_term(t, c):
    if isinstance(t, IntConst):
        return c
    if isinstance(t, (CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict)):
        return _y_nesting(t.phi, c)
    if isinstance(t, Sum):
        return max(_y_nesting_term(t.left, c), _y_nesting_term(t.right, c))
    if isinstance(t, Neg):
        return _y_nesting_term(t.term, c)
    if isinstance(t, Ite):
        return max(_y_nesting(t.cond, c), _y_nesting_term(t.then, c), _y_nesting_term(t.els, c))
    raise FormulaError(f"unexpected term {t!r}")


def _moduli(phi):
    out = set()

    def walk(n):
        if isinstance(n, Mod):
            out.add(n.m)
        elif isinstance(n, (Not, Prev)):
            walk(n.phi)
        elif isinstance(n, (And, Or)):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Compare):
            walk_t(n.lhs)
            walk_t(n.rhs)

    def walk_t(t):
        if isinstance(t, (CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict)):
            walk(t.phi)
        elif isinstance(t, Sum):
            walk_t(t.left)
            walk_t(t.right)
        elif isinstance(t, Neg):
            walk_t(t.term)
        elif isinstance(t, Ite):
            walk(t.cond)
            walk_t(t.then)
            walk_t(t.els)

    walk(phi)
    return out


def pad_word(w, e, x):
    """The padded word f(w) the reduction simulates."""
    return e * x + (e * (x - 1)).join(list(w)) + e * (x - 1) if w else e * x


def neutral_letter_reduce(phi, e, alphabet):
    """Lemma-style reduction: returns (x, phi') with f(w) |= phi  iff  w |= phi'.

    phi is over alphabet (which contains e) and may use Y and MOD; phi' is
    over alphabet minus e and uses neither.
    """
    if e not in alphabet:
        raise FormulaError(f"neutral letter {e!r} not in alphabet")
    sigma = [s for s in alphabet if s != e]
    if not sigma:
        raise FormulaError("alphabet must contain at least one non-neutral symbol")
    feats = features(phi)
    if "count_right" in feats:
        raise FormulaError("neutral-letter reduction is defined for the past-only dialect")
    ynf = y_normal_form(phi, alphabet)
    mods = _moduli(ynf)
    m_lcm = math.lcm(*mods) if mods else 1
    ynest = _y_nesting(ynf)
    x = m_lcm * (ynest + 1)
    eword = e * x
    reduced = _reduce(ynf, x, x, e, eword)
    reduced = desugar(reduced)
    return NeutralReduction(x, reduced)


def _split_prev(phi):
    c = 0
    while isinstance(phi, Prev):
        c += 1
        phi = phi.phi
    return c, phi


def _reduce(phi, y, x, e, eword):
    """T_y: truth of phi at padded position x*i+y, expressed at plain position i."""
    if isinstance(phi, (Sym, Mod, Prev)):
        c, atom = _split_prev(phi)
        if isinstance(atom, Sym):
            if atom.sym == e:
                return FALSE if y - c == 1 else TRUE
            return atom if y - c == 1 else FALSE
        # Mod: padded position x*i + y - c is congruent to y - c mod m (m divides x).
        return TRUE if (y - c) % atom.m == atom.r else FALSE
    if isinstance(phi, BoolConst):
        return phi
    if isinstance(phi, Not):
        return Not(_reduce(phi.phi, y, x, e, eword))
    if isinstance(phi, And):
        return And(_reduce(phi.left, y, x, e, eword), _reduce(phi.right, y, x, e, eword))
    if isinstance(phi, Or):
        return Or(_reduce(phi.left, y, x, e, eword), _reduce(phi.right, y, x, e, eword))
    if isinstance(phi, Compare):
        return Compare(_reduce_term(phi.lhs, y, x, e, eword), phi.op,
                       _reduce_term(phi.rhs, y, x, e, eword))
    raise FormulaError(f"cannot reduce {phi!r}")


def _reduce_term(t, y, x, e, eword):
    if isinstance(t, IntConst):
        return t
    if isinstance(t, Sum):
        return Sum(_reduce_term(t.left, y, x, e, eword), _reduce_term(t.right, y, x, e, eword))
    if isinstance(t, Neg):
        return Neg(_reduce_term(t.term, y, x, e, eword))
    if isinstance(t, CountLeft):
        # Three parts: the initial e^x block (a constant, evaluated directly),
        # offsets over all completed blocks, and offsets up to y in the block of i.
        body = t.phi
        const = sum(1 for v in evaluate_all(body, eword) if v)
        parts = [IntConst(const)]
        for yp in range(1, x + 1):
            parts.append(CountLeftStrict(_reduce(body, yp, x, e, eword)))
        for yp in range(1, y + 1):
            parts.append(Ite(_reduce(body, yp, x, e, eword), IntConst(1), IntConst(0)))
        return big_sum(parts)
    raise FormulaError(f"cannot reduce term {t!r}")

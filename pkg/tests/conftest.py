"""Shared helpers: independent brute-force evaluators and word enumeration."""

import itertools

from craspkit import formulas as F


def words_upto(alphabet, max_len, min_len=1):
    """All words over `alphabet` with min_len <= |w| <= max_len."""
    for n in range(min_len, max_len + 1):
        for tup in itertools.product(alphabet, repeat=n):
            yield "".join(tup)


def naive_eval(node, w, i):
    """Structural-recursion evaluator with literal counting loops.

    Written independently of the library's memoized prefix-count evaluator so
    the two can serve as oracles for each other.
    """
    if isinstance(node, F.Sym):
        return w[i - 1] == node.sym
    if isinstance(node, F.BoolConst):
        return node.value
    if isinstance(node, F.Not):
        return not naive_eval(node.phi, w, i)
    if isinstance(node, F.And):
        return naive_eval(node.left, w, i) and naive_eval(node.right, w, i)
    if isinstance(node, F.Or):
        return naive_eval(node.left, w, i) or naive_eval(node.right, w, i)
    if isinstance(node, F.Compare):
        a, b = naive_term(node.lhs, w, i), naive_term(node.rhs, w, i)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
                "=": a == b, "!=": a != b}[node.op]
    if isinstance(node, F.Prev):
        return i > 1 and naive_eval(node.phi, w, i - 1)
    if isinstance(node, F.Mod):
        return i % node.m == node.r
    raise TypeError(node)


def naive_term(t, w, i):
    n = len(w)
    if isinstance(t, F.CountLeft):
        return sum(1 for j in range(1, i + 1) if naive_eval(t.phi, w, j))
    if isinstance(t, F.CountRight):
        return sum(1 for j in range(i, n + 1) if naive_eval(t.phi, w, j))
    if isinstance(t, F.CountAll):
        return sum(1 for j in range(1, n + 1) if naive_eval(t.phi, w, j))
    if isinstance(t, F.CountLeftStrict):
        return sum(1 for j in range(1, i) if naive_eval(t.phi, w, j))
    if isinstance(t, F.CountRightStrict):
        return sum(1 for j in range(i + 1, n + 1) if naive_eval(t.phi, w, j))
    if isinstance(t, F.Sum):
        return naive_term(t.left, w, i) + naive_term(t.right, w, i)
    if isinstance(t, F.Neg):
        return -naive_term(t.term, w, i)
    if isinstance(t, F.IntConst):
        return t.value
    if isinstance(t, F.Ite):
        branch = t.then if naive_eval(t.cond, w, i) else t.els
        return naive_term(branch, w, i)
    raise TypeError(t)


def naive_accepts(phi, w):
    return naive_eval(phi, w, len(w))


def position_equivalent(phi, psi, alphabet, max_len):
    """True if phi and psi agree at every position of every word up to max_len."""
    for w in words_upto(alphabet, max_len):
        if F.evaluate_all(phi, w) != F.evaluate_all(psi, w):
            return False
    return True

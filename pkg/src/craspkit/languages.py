"""Block languages L_k, their DFA oracles and defining formulas, and datasets.

L_k is the language of k alternating nonempty blocks a+b+a+... starting with a.
A_k / B_k are the subsequence languages of the alternating patterns of length k
starting with a / b; L_k equals A_k minus B_k, which yields a depth-k formula.
"""

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .formulas import (
    Alphabet, Sym, And, Not, Compare, CountLeft, CountRight, IntConst,
    FormulaError, accepts, parse,
)

AB = Alphabet("ab")
ABE = Alphabet("abe")


class DFA:
    """Explicit deterministic automaton; the auditable membership oracle."""

    def __init__(self, n_states, start, accepting, delta, alphabet):
        self.n_states = n_states
        self.start = start
        self.accepting = frozenset(accepting)
        self.delta = delta  # dict (state, symbol) -> state
        self.alphabet = alphabet

    def run(self, w):
        """States after each prefix (excluding the empty prefix)."""
        q = self.start
        out = []
        for ch in w:
            if ch not in self.alphabet:
                raise FormulaError(f"symbol {ch!r} not in alphabet")
            q = self.delta[(q, ch)]
            out.append(q)
        return out

    def member(self, w):
        q = self.start
        for ch in w:
            if ch not in self.alphabet:
                raise FormulaError(f"symbol {ch!r} not in alphabet")
            q = self.delta[(q, ch)]
        return q in self.accepting


def _alternating(k, first):
    other = "b" if first == "a" else "a"
    return "".join(first if i % 2 == 0 else other for i in range(k))


def altplus_dfa(k, alphabet=AB):
    """Block-counting DFA for L_k (with e self-loops when e is in the alphabet).

    State j in [1,k]: inside block j; state 0: start; state k+1: dead.
    """
    if k < 1:
        raise FormulaError("k must be >= 1")
    dead = k + 1
    delta = {}
    pattern = _alternating(k, "a")
    for sym in alphabet:
        delta[(0, sym)] = 1 if sym == "a" else (0 if sym == "e" else dead)
        delta[(dead, sym)] = dead
    for j in range(1, k + 1):
        cur = pattern[j - 1]
        for sym in alphabet:
            if sym == "e":
                delta[(j, sym)] = j
            elif sym == cur:
                delta[(j, sym)] = j
            else:
                delta[(j, sym)] = j + 1 if j < k else dead
    return DFA(k + 2, 0, {k}, delta, alphabet)


def subsequence_dfa(pattern, alphabet):
    """DFA for Sigma* p1 Sigma* p2 ... pk Sigma* (pattern occurs as a subsequence)."""
    k = len(pattern)
    delta = {}
    for j in range(k + 1):
        for sym in alphabet:
            if j < k and sym == pattern[j]:
                delta[(j, sym)] = j + 1
            else:
                delta[(j, sym)] = j
    return DFA(k + 1, 0, {k}, delta, alphabet)


class BlockLanguage:
    """Membership oracle for the L_k family and relatives, DFA-backed."""

    VARIANTS = ("altplus", "A", "B", "altplus2", "etilde")

    def __init__(self, variant, k, alphabet=None):
        if variant not in self.VARIANTS:
            raise FormulaError(f"unknown variant {variant!r}")
        if k < 1:
            raise FormulaError("k must be >= 1")
        self.variant = variant
        self.k = k
        if alphabet is None:
            alphabet = ABE if variant == "etilde" else AB
        self.alphabet = alphabet
        if variant == "altplus":
            self.dfa = altplus_dfa(k, alphabet)
        elif variant == "altplus2":
            self.dfa = altplus_dfa(2 * k - 1, alphabet)
        elif variant == "etilde":
            self.dfa = altplus_dfa(k, alphabet)
        elif variant == "A":
            self.dfa = subsequence_dfa(_alternating(k, "a"), alphabet)
        else:
            self.dfa = subsequence_dfa(_alternating(k, "b"), alphabet)

    def member(self, w):
        return self.dfa.member(w)


def member(lang, w):
    return lang.member(w)


def dyck_member(w):
    """Counter-based oracle for balanced parentheses."""
    depth = 0
    for ch in w:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
        else:
            raise FormulaError(f"symbol {ch!r} not a parenthesis")
    return depth == 0


# --- Formula constructions ---

def jexpr_formula(symbols):
    """Depth-k formula for the J-expression Sigma* s1 Sigma* ... sk Sigma*."""
    symbols = list(symbols)
    if not symbols:
        raise FormulaError("J-expression needs at least one symbol")
    for prev, cur in zip(symbols, symbols[1:]):
        if prev == cur:
            # with equal neighbors the nested count reuses one position for
            # both occurrences, so the construction only covers patterns with
            # distinct consecutive symbols
            raise FormulaError("consecutive pattern symbols must differ")
    phi = Compare(CountLeft(Sym(symbols[0])), ">=", IntConst(1))
    for s in symbols[1:]:
        phi = Compare(CountLeft(And(phi, Sym(s))), ">=", IntConst(1))
    return phi


def jexpr_formula_bidirectional(symbols):
    """Depth-(k+1) two-direction formula for a J-expression of odd length 2k+1."""
    symbols = list(symbols)
    if len(symbols) % 2 == 0:
        raise FormulaError("bidirectional construction needs odd pattern length")
    if len(symbols) == 1:
        return Compare(CountLeft(Sym(symbols[0])), ">=", IntConst(1))
    mid = len(symbols) // 2
    left, pivot, right = symbols[:mid], symbols[mid], symbols[mid + 1:]

    phi_l = Compare(CountLeft(Sym(left[0])), ">=", IntConst(1))
    for s in left[1:]:
        phi_l = Compare(CountLeft(And(phi_l, Sym(s))), ">=", IntConst(1))

    phi_r = Compare(CountRight(Sym(right[-1])), ">=", IntConst(1))
    for s in reversed(right[:-1]):
        phi_r = Compare(CountRight(And(Sym(s), phi_r)), ">=", IntConst(1))

    body = And(And(phi_l, Sym(pivot)), phi_r)
    return Compare(CountLeft(body), ">=", IntConst(1))


def altplus_formula(k, alphabet=AB):
    """Depth-k formula for L_k (insertion-closed, so it also defines the e-variant)."""
    if k < 1:
        raise FormulaError("k must be >= 1")
    in_a = jexpr_formula(_alternating(k, "a"))
    in_b = jexpr_formula(_alternating(k, "b"))
    return And(in_a, Not(in_b))


def dyck_formula():
    """Balance and matching conditions on parenthesis strings; depth 2."""
    return parse("#<[Q(()] = #<[Q())] && #<[ #<[Q(()] < #<[Q())] ] = 0")


def prediction_formula(k):
    """Holds at the end of a prefix of an L_k word iff that prefix is in L_k.

    A prefix of an L_k word is itself in L_k exactly when the length-(k-2)
    alternating pattern starting with b occurs as a subsequence and the prefix
    ends with the final block's letter (a for odd k, b for even k).
    """
    if k < 3:
        raise FormulaError("prediction formula requires k >= 3")
    detector = jexpr_formula(_alternating(k - 2, "b"))
    last = Sym("a") if k % 2 == 1 else Sym("b")
    return And(detector, last)


# --- Dataset generation ---

@dataclass
class DatasetRecord:
    k: int
    source: str  # '^' + word
    target: str  # '0'/'1' labels, aligned with source

    def to_json_dict(self):
        return {"k": self.k, "source": self.source, "target": self.target}


BOS = "^"


def sample_word(k, n, rng):
    """Uniform length-n member of L_k: a uniform (k-1)-subset of gaps as switches."""
    switches = sorted(rng.sample(range(1, n), k - 1))
    w = []
    block = 0
    prev_cut = 0
    for cut in switches + [n]:
        w.append(("a" if block % 2 == 0 else "b") * (cut - prev_cut))
        prev_cut = cut
        block += 1
    return "".join(w)


def sample_dataset(k, length_lo, length_hi, count, seed):
    """Next-token-prediction records: label 1 where the prefix is already in L_k."""
    if length_lo > length_hi:
        raise FormulaError("empty length bin")
    if length_lo < k:
        raise FormulaError(f"lengths below k={k} cannot hold {k} nonempty blocks")
    if count < 1:
        raise FormulaError("count must be >= 1")
    rng = random.Random(seed)
    dfa = altplus_dfa(k)
    out = []
    for _ in range(count):
        n = rng.randint(length_lo, length_hi)
        w = sample_word(k, n, rng)
        states = dfa.run(w)
        target = "0" + "".join("1" if q in dfa.accepting else "0" for q in states)
        out.append(DatasetRecord(k=k, source=BOS + w, target=target))
    return out


# --- Equivalence harness ---

@dataclass
class EquivReport:
    equivalent: bool
    counterexample: str | None
    expected: bool | None
    actual: bool | None
    checked_exhaustive: int
    checked_random: int

    def to_json_dict(self):
        return {
            "equivalent": self.equivalent,
            "counterexample": self.counterexample,
            "expected": self.expected,
            "actual": self.actual,
            "checked_exhaustive": self.checked_exhaustive,
            "checked_random": self.checked_random,
        }


def _worker_count():
    env = os.environ.get("CRASPKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def check_equiv(acceptor_a, acceptor_b, alphabet, max_exhaustive_len=8,
                random_samples=0, max_random_len=50, seed=0):
    """Exhaustive + sampled language-agreement check of two acceptors (callables)."""
    syms = list(alphabet)

    def exhaustive_words():
        stack = [""]
        for n in range(1, max_exhaustive_len + 1):
            idx = [0] * n
            while True:
                yield "".join(syms[i] for i in idx)
                j = n - 1
                while j >= 0 and idx[j] == len(syms) - 1:
                    idx[j] = 0
                    j -= 1
                if j < 0:
                    break
                idx[j] += 1

    checked_ex = 0
    checked_rand = 0

    def check_batch(batch):
        for w in batch:
            va = acceptor_a(w)
            vb = acceptor_b(w)
            if va != vb:
                return (w, va, vb)
        return None

    threads = _worker_count()

    def run_stream(word_iter):
        if threads <= 1:
            n = 0
            for w in word_iter:
                n += 1
                va = acceptor_a(w)
                vb = acceptor_b(w)
                if va != vb:
                    return n, (w, va, vb)
            return n, None
        words = list(word_iter)
        chunk = max(1, len(words) // (threads * 4) or 1)
        batches = [words[i:i + chunk] for i in range(0, len(words), chunk)]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(check_batch, batches))
        n = 0
        for i, res in enumerate(results):
            if res is not None:
                # count words up to and including the counterexample
                n = sum(len(b) for b in batches[:i]) + batches[i].index(res[0]) + 1
                return n, res
        return len(words), None

    checked_ex, bad = run_stream(exhaustive_words())
    if bad is None and random_samples > 0:
        rng = random.Random(seed)

        def random_words():
            for _ in range(random_samples):
                n = rng.randint(1, max_random_len)
                yield "".join(rng.choice(syms) for _ in range(n))

        checked_rand, bad = run_stream(random_words())

    if bad is None:
        return EquivReport(True, None, None, None, checked_ex, checked_rand)
    w, va, vb = bad
    return EquivReport(False, w, va, vb, checked_ex, checked_rand)


def formula_acceptor(phi):
    return lambda w: accepts(phi, w)

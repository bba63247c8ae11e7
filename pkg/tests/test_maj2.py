"""Two-variable majority logic: semantics, grammar, and translations."""

import pytest

from craspkit.formulas import Alphabet, parse, depth, evaluate_all, accepts
from craspkit.maj2 import (
    Maj2Error, MSym, MLess, MBool, MNot, MAnd, MOr, MMaj, MExists, MForall,
    MTOP, MBOT, free_vars, desugar_maj2, depth_maj2, eval_maj2, print_maj2,
    parse_maj2, tl_to_maj2, tl_to_maj2_closed, maj2_to_tl,
)

from conftest import words_upto

AB = Alphabet("ab")


def brute_eval(phi, w, xi):
    """Independent evaluator: the majority clause literally enumerates all
    (position, formula-index) pairs."""
    if isinstance(phi, MSym):
        return w[xi[phi.var] - 1] == phi.sym
    if isinstance(phi, MLess):
        return xi[phi.left] < xi[phi.right]
    if isinstance(phi, MBool):
        return phi.value
    if isinstance(phi, MNot):
        return not brute_eval(phi.phi, w, xi)
    if isinstance(phi, MAnd):
        return brute_eval(phi.left, w, xi) and brute_eval(phi.right, w, xi)
    if isinstance(phi, MOr):
        return brute_eval(phi.left, w, xi) or brute_eval(phi.right, w, xi)
    if isinstance(phi, MMaj):
        count = 0
        pairs = 0
        for pos in range(1, len(w) + 1):
            for sub in phi.formulas:
                pairs += 1
                sub_xi = dict(xi)
                sub_xi[phi.var] = pos
                if brute_eval(sub, w, sub_xi):
                    count += 1
        return 2 * count > pairs
    if isinstance(phi, MExists):
        return any(brute_eval(phi.phi, w, {**xi, phi.var: pos})
                   for pos in range(1, len(w) + 1))
    if isinstance(phi, MForall):
        return all(brute_eval(phi.phi, w, {**xi, phi.var: pos})
                   for pos in range(1, len(w) + 1))
    raise TypeError(phi)


def test_majority_semantics_spec_examples():
    maj_a = MMaj("x", (MSym("a", "x"),))
    assert eval_maj2(maj_a, "aab")
    assert not eval_maj2(maj_a, "abb")
    exists_a = desugar_maj2(MExists("x", MSym("a", "x")))
    assert not eval_maj2(exists_a, "b")
    assert eval_maj2(exists_a, "ba")


def test_eval_matches_brute_force_oracle():
    formulas = [
        MMaj("x", (MSym("a", "x"),)),
        MMaj("x", (MSym("a", "x"), MTOP)),
        MMaj("x", (MMaj("y", (MLess("x", "y"),)),)),
        MAnd(MNot(MMaj("x", (MSym("b", "x"),))), MMaj("x", (MTOP,))),
        desugar_maj2(MExists("x", MAnd(MSym("a", "x"),
                                       MNot(MExists("y", MLess("x", "y")))))),
        desugar_maj2(MForall("x", MOr(MSym("a", "x"), MSym("b", "x")))),
        MMaj("y", (MLess("y", "x"), MSym("b", "y"))),  # free x
    ]
    for phi in formulas:
        fv = free_vars(phi)
        for w in words_upto("ab", 5):
            if fv:
                for pos in range(1, len(w) + 1):
                    xi = {v: pos for v in fv}
                    assert eval_maj2(phi, w, xi) == brute_eval(phi, w, xi), (phi, w)
            else:
                assert eval_maj2(phi, w) == brute_eval(phi, w, {}), (phi, w)


def test_eval_errors():
    with pytest.raises(Maj2Error):
        eval_maj2(MMaj("x", (MSym("a", "x"),)), "")
    with pytest.raises(Maj2Error):
        eval_maj2(MSym("a", "x"), "ab")  # unbound free variable
    with pytest.raises(Maj2Error):
        eval_maj2(MSym("a", "x"), "ab", {"x": 5})  # out of range


def test_depth_examples():
    assert depth_maj2(MSym("a", "x")) == 0
    assert depth_maj2(MMaj("x", (MSym("a", "x"),))) == 1
    assert depth_maj2(MMaj("x", (MMaj("y", (MLess("x", "y"),)),))) == 2
    # quantifier sugar scores as its majority encoding
    assert depth_maj2(MExists("x", MSym("a", "x"))) == 1
    assert depth_maj2(MForall("x", MMaj("y", (MLess("x", "y"),)))) == 2


def test_quantifier_desugar_preserves_semantics():
    sugared = [
        MExists("x", MSym("a", "x")),
        MForall("x", MOr(MSym("a", "x"), MSym("b", "x"))),
        MExists("x", MNot(MExists("y", MLess("x", "y")))),
    ]
    for phi in sugared:
        core = desugar_maj2(phi)
        assert depth_maj2(core) == depth_maj2(phi)
        for w in words_upto("ab", 5):
            assert eval_maj2(core, w) == brute_eval(phi, w, {}), (phi, w)


def test_print_parse_round_trip():
    formulas = [
        MMaj("x", (MSym("a", "x"), MTOP, MBOT)),
        MAnd(MNot(MLess("x", "y")), MOr(MSym("a", "x"), MSym("b", "y"))),
        MExists("x", MForall("y", MOr(MNot(MLess("y", "x")), MSym("a", "y")))),
        MMaj("x", (MMaj("y", (MAnd(MLess("x", "y"), MSym("b", "y")),)),)),
    ]
    for phi in formulas:
        assert parse_maj2(print_maj2(phi)) == phi, print_maj2(phi)


def test_parse_errors():
    for bad in ["", "MAJx< >", "Q(a; z)", "x < x", "Ex[", "Q(a;x) &&"]:
        with pytest.raises(Maj2Error):
            parse_maj2(bad)


TL_CORPUS = [
    "Q(a)",
    "1 < 1",
    "#<[Q(a)] >= 1",
    "#<[Q(a)] = #<[Q(b)]",
    "2 * #<[Q(a)] > #<[Q(b)] + 1",
    "#>[Q(b)] >= 2",
    "#[Q(a)] > 0",
    "#<[#<[Q(a)] >= 1 && Q(b)] >= 1",
    "#<[#<[#<[Q(a)] >= 1] >= 1] >= 1",
    "#<[#<[Q(a)] = #<[Q(b)]] >= 2",
]


def test_tl_to_maj2_position_equivalence_and_depth():
    for src in TL_CORPUS:
        phi = parse(src)
        m = tl_to_maj2(phi)
        assert depth_maj2(m) <= depth(phi), src
        for w in words_upto("ab", 6):
            vals = evaluate_all(phi, w)
            for i in range(1, len(w) + 1):
                xi = {"x": i} if free_vars(m) else None
                assert eval_maj2(m, w, xi) == vals[i - 1], (src, w, i)


def test_whole_word_count_translation_is_closed():
    m = tl_to_maj2(parse("#[Q(a)] > 0"))
    assert free_vars(m) == frozenset()


def test_constant_comparison_folds():
    m = tl_to_maj2(parse("1 < 1"))
    assert depth_maj2(m) == 0
    for w in words_upto("ab", 3):
        assert not eval_maj2(m, w, {"x": 1} if free_vars(m) else None)


def test_round_trip_position_equivalence():
    for src in TL_CORPUS:
        phi = parse(src)
        m = tl_to_maj2(phi)
        back = maj2_to_tl(m, AB)
        assert depth(back) <= depth_maj2(m) or depth_maj2(m) == 0, src
        for w in words_upto("ab", 6):
            va, vb = evaluate_all(phi, w), evaluate_all(back, w)
            assert va == vb, (src, w)


def test_maj2_to_tl_native_formulas():
    natives = [
        MMaj("x", (MSym("a", "x"),)),
        MMaj("x", (MTOP,)),
        MMaj("y", (MAnd(MLess("y", "x"), MSym("a", "y")), MTOP)),
        MMaj("y", (MMaj("x", (MLess("x", "y"),)),)),
        desugar_maj2(MExists("y", MAnd(MLess("x", "y"), MSym("b", "y")))),
    ]
    for m in natives:
        tl = maj2_to_tl(m, AB)
        assert depth(tl) <= depth_maj2(m), m
        for w in words_upto("ab", 5):
            vals = evaluate_all(tl, w)
            for i in range(1, len(w) + 1):
                xi = {"x": i} if "x" in free_vars(m) else None
                assert eval_maj2(m, w, xi) == vals[i - 1], (m, w, i)


def test_maj2_to_tl_rejects_free_y():
    with pytest.raises(Maj2Error):
        maj2_to_tl(MSym("a", "y"), AB)


def test_closed_wrapper_end_acceptance():
    for src in TL_CORPUS:
        phi = parse(src)
        closed = tl_to_maj2_closed(phi)
        assert free_vars(closed) == frozenset(), src
        dp = depth(phi)
        assert depth_maj2(closed) <= max(dp + 1, 2), src
        if dp >= 1:
            assert depth_maj2(closed) == dp + 1, src
        for w in words_upto("ab", 5):
            assert eval_maj2(closed, w) == accepts(phi, w), (src, w)

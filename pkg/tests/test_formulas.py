"""Formula AST, parser, printer, depth, and evaluation."""

import pytest
from hypothesis import given, settings, strategies as st

from craspkit.formulas import (
    Alphabet, FormulaError, ParseError, Sym, Not, And, Compare, CountLeft,
    IntConst, TRUE, parse, print_formula, depth, features, symbols_of,
    eval_formula, eval_term, accepts, evaluate_all, big_and, big_or, big_sum,
    scale_term,
)
from craspkit.languages import dyck_formula

from conftest import naive_eval, naive_term, words_upto

T, B = True, False

DYCK_ROWS = ["Q(()", "Q())", "#<[Q(()]", "#<[Q())]",
             "#<[Q(()] = #<[Q())]", "#<[Q(()] < #<[Q())]",
             "#<[#<[Q(()] < #<[Q())]]", "#<[#<[Q(()] < #<[Q())]] = 0",
             "#<[#<[Q(()] < #<[Q())]] = 0 && #<[Q(()] = #<[Q())]"]

# expected trace cells: one table per string, one row per subformula above,
# one column per position
DYCK_TRACES = {
    "(())()": [
        [T, T, B, B, T, B],
        [B, B, T, T, B, T],
        [1, 2, 2, 2, 3, 3],
        [0, 0, 1, 2, 2, 3],
        [B, B, B, T, B, T],
        [B, B, B, B, B, B],
        [0, 0, 0, 0, 0, 0],
        [T, T, T, T, T, T],
        [B, B, B, T, B, T],
    ],
    "())()(": [
        [T, B, B, T, B, T],
        [B, T, T, B, T, B],
        [1, 1, 1, 2, 2, 3],
        [0, 1, 2, 2, 3, 3],
        [B, T, B, T, B, T],
        [B, B, T, B, T, B],
        [0, 0, 1, 1, 2, 2],
        [T, T, B, B, B, B],
        [B, T, B, B, B, B],
    ],
}


def _parse_row(src):
    """Parse either a formula row or a bare count-term row of the trace table."""
    try:
        return parse(src)
    except ParseError:
        return parse(f"{src} = 0").lhs


def test_dyck_trace_tables_cell_for_cell():
    for w, table in DYCK_TRACES.items():
        for row_src, expected_row in zip(DYCK_ROWS, table):
            node = _parse_row(row_src)
            for i, expected in enumerate(expected_row, start=1):
                if isinstance(expected, bool):
                    got = eval_formula(node, w, i)
                else:
                    got = eval_term(node, w, i)
                assert got == expected, (w, row_src, i)


def test_dyck_membership_verdicts():
    phi = dyck_formula()
    assert accepts(phi, "(())()")
    assert not accepts(phi, "())()(")


def test_depth_examples():
    assert depth(parse("Q(a) && 1 <= 1 + 1")) == 0
    assert depth(parse("Q(a) && #<[Q(a)] < #<[Q(b)]")) == 1
    assert depth(parse("#<[Q(a)] <= #<[Q(b)] + #<[Q(c)] + 1")) == 1
    assert depth(dyck_formula()) == 2


def test_depth_of_sugar_matches_desugared():
    # strict counts, whole-word counts, and Ite score at their encodings
    assert depth(parse("#<o[Q(a)] >= 1")) == 1
    assert depth(parse("#[Q(a)] >= 1")) == 1
    assert depth(parse("(Q(a) ? #<[Q(b)] : 0) >= 1")) == 1
    assert depth(parse("#<[#o>[Q(a)] >= 1] >= 1")) == 2


def test_parse_print_round_trip_on_samples():
    sources = [
        "Q(a)", "TRUE", "FALSE", "!Q(a)", "Q(a) && Q(b) || !Q(c)",
        "#<[Q(a)] = #<[Q(b)]", "#<[#<[Q(a)] < #<[Q(b)]] = 0",
        "2 * #<[Q(a)] + 1 != #>[Q(b)]", "#[Q(a)] > 0",
        "(Q(a) ? 1 : 0) + #<o[Q(b)] >= #o>[Q(a)]",
        "Y(Q(a))", "MOD(3, 1) && Y(Y(Q(b)))",
        "0 - #<[Q(a)] + 3 < 0",
    ]
    for src in sources:
        phi = parse(src)
        again = parse(print_formula(phi))
        assert again == phi, src


def test_printer_parenthesizes_precedence():
    phi = parse("(Q(a) || Q(b)) && Q(c)")
    assert parse(print_formula(phi)) == phi
    assert accepts(phi, "c") is False
    phi2 = parse("!(Q(a) && Q(b))")
    assert parse(print_formula(phi2)) == phi2


def test_parse_errors():
    for bad in ["", "Q(", "#<[Q(a)", "1 +", "Q(a) &&", "#<[Q(a) ? 1 : 0]",
                "MOD(0, 0)", "Q(ab)"]:
        with pytest.raises(ParseError):
            parse(bad)


def test_alphabet_rejects_bos_and_duplicates():
    with pytest.raises(FormulaError):
        Alphabet("a^")
    with pytest.raises(FormulaError):
        Alphabet("aa")


def test_empty_word_rejected():
    with pytest.raises(FormulaError):
        accepts(parse("Q(a)"), "")
    with pytest.raises(FormulaError):
        evaluate_all(parse("Q(a)"), "")


def test_position_out_of_range_rejected():
    with pytest.raises(FormulaError):
        eval_formula(parse("Q(a)"), "ab", 0)
    with pytest.raises(FormulaError):
        eval_formula(parse("Q(a)"), "ab", 3)


def test_symbols_and_features():
    phi = parse("#>[Q(a)] >= 1 && #o>[Q(b)] < 2 && Y(MOD(2, 0))")
    assert symbols_of(phi) == {"a", "b"}
    fs = features(phi)
    assert {"count_right", "strict", "prev", "mod"} <= fs
    assert features(parse("#<[Q(a)] >= 1")) == frozenset()


def test_helpers_fold_correctly():
    assert big_and([]) == TRUE
    assert print_formula(big_or([Sym("a"), Sym("b")])) == "Q(a) || Q(b)"
    t = big_sum([IntConst(1), IntConst(2)])
    assert naive_term(t, "a", 1) == 3
    assert naive_term(scale_term(3, CountLeft(Sym("a"))), "aba", 3) == 6
    assert naive_term(scale_term(-2, IntConst(3)), "a", 1) == -6
    assert naive_term(scale_term(0, CountLeft(Sym("a"))), "a", 1) == 0


FORMULA_CORPUS = [
    "Q(a)",
    "#<[Q(a)] >= 2",
    "#<[Q(a)] = #<[Q(b)] && !Q(b)",
    "#<[#<[Q(a)] < #<[Q(b)]] = 0",
    "#>[Q(b)] + #<o[Q(a)] > #o>[Q(b)]",
    "#[Q(a)] != 2 * #<[Q(b)]",
    "(Q(a) ? #<[Q(b)] : 1 + #<[Q(a)]) <= 2",
    "Y(Q(a) && Y(Q(b)))",
    "MOD(2, 1) || #<[MOD(3, 0)] >= 1",
    "0 - #<[Q(a)] + #<[Q(b)] < 1",
]


def test_evaluator_matches_naive_oracle_exhaustively():
    for src in FORMULA_CORPUS:
        phi = parse(src)
        for w in words_upto("ab", 5):
            vals = evaluate_all(phi, w)
            for i in range(1, len(w) + 1):
                assert vals[i - 1] == naive_eval(phi, w, i), (src, w, i)
                assert eval_formula(phi, w, i) == vals[i - 1]


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="ab", min_size=1, max_size=30),
       st.integers(0, 9), st.integers(0, 1000))
def test_evaluator_matches_naive_oracle_random(w, idx, pos):
    phi = parse(FORMULA_CORPUS[idx])
    i = pos % len(w) + 1
    assert eval_formula(phi, w, i) == naive_eval(phi, w, i)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="ab", min_size=1, max_size=12))
def test_count_left_prefix_monotone(w):
    phi = parse("Q(a)")
    t = CountLeft(phi)
    prev = 0
    for i in range(1, len(w) + 1):
        cur = eval_term(t, w, i)
        assert cur in (prev, prev + 1)
        prev = cur
    assert prev == w.count("a")

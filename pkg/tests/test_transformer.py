"""Exact transformer forward pass, positional encodings, and model I/O."""

from fractions import Fraction

import mpmath
import pytest

from craspkit.fixedpoint import Precision, Fixed, exp_round, round_to
from craspkit.transformer import (
    BOS, ModelError, Affine, ReLU, Table, LocalMap, AngleSpec, Sinusoidal,
    RoPE, ALiBi, alibi_window, Layer, Transformer, forward, accepts,
    to_json_dict, from_json_dict, save_model, load_model,
)

P124 = Precision(12, 4)


def ident(d):
    shift = 1 << 4  # matches s = 4 everywhere in this file
    return LocalMap([Affine([[shift if i == j else 0 for j in range(d)]
                             for i in range(d)], [0] * d)])


def zero_map(d):
    return LocalMap([Affine([[0] * d for _ in range(d)], [0] * d)])


def prefix_mean_model(prec=P124):
    """d=2: coordinate 0 flags 'a'; attention output 0 is the prefix mean."""
    d = 2
    layer = Layer(wq=zero_map(d), wk=zero_map(d), wv=ident(d), f=ident(d))
    # residual doubles coordinate 0, so read attention out via h - e and w_out
    emb = {BOS: (0, 0), "a": (1 << prec.s, 0), "b": (0, 0)}
    w_out = ident(d)
    return Transformer("ab", prec, d, emb, [layer], w_out)


def expected_prefix_mean_significand(w, i, prec):
    """Oracle: round(sum_j round(e^0 * v_j) * 2^s / sum_j round(e^0))."""
    one = exp_round(Fraction(0), prec).m
    num = sum((1 << prec.s) if ch == "a" else 0 for ch in w[:i])
    den = one * i
    return (num << prec.s) // den


def test_prefix_mean_exact_per_position():
    T = prefix_mean_model()
    w = BOS + "abaab"
    score, acts = forward(T, w, trace=True)
    for i in range(1, len(w) + 1):
        c0 = acts.c[0][i - 1][0].m
        assert c0 == expected_prefix_mean_significand(w, i, P124), i


def test_forward_rejects_bad_words():
    T = prefix_mean_model()
    with pytest.raises(ModelError):
        forward(T, "ab")          # missing BOS
    with pytest.raises(ModelError):
        forward(T, "^a^b")        # BOS not at start only
    with pytest.raises(ModelError):
        forward(T, "^ax")         # symbol outside alphabet


def test_causal_masking_prefix_consistency():
    # per-position activations depend only on the prefix
    T = prefix_mean_model()
    long_w = BOS + "ababbaab"
    _, long_acts = forward(T, long_w, trace=True)
    for cut in range(2, len(long_w) + 1):
        _, short_acts = forward(T, long_w[:cut], trace=True)
        assert short_acts.h[-1] == long_acts.h[-1][:cut]


def test_fast_and_slow_paths_agree():
    # the same constant-query layer written so the zero stage is second forces
    # the O(n^2) path; outputs must match the streaming path exactly
    prec = P124
    d = 2
    slow_wq = LocalMap([ident(d).stages[0], Affine([[0] * d] * d, [0] * d)])
    fast = prefix_mean_model()
    slow = Transformer("ab", prec, d, dict(fast.embedding),
                       [Layer(wq=slow_wq, wk=zero_map(d), wv=ident(d),
                              f=ident(d))], ident(d))
    for w in ["^a", "^ab", "^" + "ab" * 20, "^bbbaab"]:
        sf, af = forward(fast, w, trace=True)
        ss, as_ = forward(slow, w, trace=True)
        assert sf == ss and af.h[-1] == as_.h[-1], w


def test_no_dilution_at_one_million():
    # the exact-sum attention keeps the prefix mean exact at position 10^6
    T = prefix_mean_model()
    n = 10 ** 6
    w = BOS + "a" * (n - 1)
    score, _ = forward(T, w)
    # mean of (n-1) ones and one zero: floor(((n-1)/n) * 16) / 16 = 15/16,
    # then the residual adds the symbol embedding 0 at the last position...
    one = 1 << P124.s
    expected_c = ((n - 1) * one << P124.s) // (exp_round(Fraction(0), P124).m * n)
    expected_h = min(expected_c + one, P124.max_m)  # residual add at an 'a'
    assert score.m == expected_h


def test_table_stage_and_missing_entry():
    prec = Precision(4, 1)
    t = Table([((0, 0), (1, 0)), ((2, 0), (0, 2))])
    assert t.apply((2, 0), prec) == (0, 2)
    with pytest.raises(ModelError):
        t.apply((1, 1), prec)


def test_affine_floor_and_saturation():
    prec = Precision(6, 2)
    aff = Affine([[1], [-1]], [0, 0])
    # value = m/16 floored to the 1/4 grid
    assert aff.apply((5,), prec) == (1, -2)
    big = Affine([[100]], [0])
    assert big.apply((31,), prec) == (prec.max_m,)


def test_json_round_trip():
    T = prefix_mean_model()
    data = to_json_dict(T)
    T2 = from_json_dict(data)
    for w in ["^", "^ab", "^aabba"]:
        assert forward(T, w)[0] == forward(T2, w)[0]


def test_save_load_model(tmp_path):
    T = prefix_mean_model()
    path = tmp_path / "m.json"
    save_model(T, str(path))
    T2 = load_model(str(path))
    assert forward(T2, "^aab")[0] == forward(T, "^aab")[0]


def test_model_validation_errors():
    with pytest.raises(ModelError):
        Transformer("ab", P124, 2, {"a": (0, 0), "b": (0, 0)}, [], ident(2))
    with pytest.raises(ModelError):
        Transformer("ab", P124, 2, {BOS: (0,), "a": (0,), "b": (0,)}, [],
                    ident(2))
    with pytest.raises(ModelError):
        from_json_dict({"precision": {"p": 12}})


def test_sinusoidal_embedding_addend_matches_tables():
    prec = Precision(12, 6)
    pe = Sinusoidal(AngleSpec([(12, 1)]))
    with mpmath.workdps(60):
        for i in (1, 2, 5, 13):
            add = pe.embedding_addend(i, 2, prec)
            angle = 2 * mpmath.pi * ((i - 1) % 12) / 12
            def floor_grid(v):
                scaled = v * (1 << prec.s)
                nearest = mpmath.nint(scaled)
                if abs(scaled - nearest) < mpmath.mpf("1e-30"):
                    return int(nearest)
                return int(mpmath.floor(scaled))
            assert add[0] == -floor_grid(mpmath.sin(angle))
            assert add[1] == floor_grid(mpmath.cos(angle))


def test_rope_rotation_preserves_zero_and_identity_angle():
    prec = Precision(12, 4)
    pe = RoPE(AngleSpec([(1, 0)]))  # angle 0: rotation is scaling by cos0=1
    xs = (3, -2)
    out = pe.rotate(xs, 5, prec)
    shift = 1 << prec.s
    assert out[0] == Fraction(3 * shift) and out[1] == Fraction(-2 * shift)


def test_rope_model_scores_depend_on_distance():
    prec = Precision(12, 4)
    d = 2
    one = 1 << prec.s
    emb = {BOS: (one, 0), "a": (one, 0), "b": (one, 0)}
    layer = Layer(wq=ident(d), wk=ident(d), wv=ident(d), f=ident(d))
    T = Transformer("ab", prec, d, emb, [layer], ident(d),
                    pe=RoPE(AngleSpec([(8, 1)])))
    _, acts = forward(T, "^aaaa", trace=True)
    row = acts.scores[0][3]
    assert len(set(x.m for x in row)) > 1  # same tokens, different offsets


def test_alibi_shifts_scores_linearly():
    prec = Precision(12, 4)
    d = 1
    emb = {BOS: (0,), "a": (0,)}
    layer = Layer(wq=zero_map(d), wk=zero_map(d), wv=ident(d), f=ident(d))
    a_m = 1 << prec.s  # slope 1
    T = Transformer("a", prec, d, emb, [layer], ident(d), pe=ALiBi(a_m))
    _, acts = forward(T, "^aaa", trace=True)
    row = acts.scores[0][2]
    assert [x.value for x in row] == [-2, -1, 0]


def test_alibi_window_bound_is_tight_enough():
    prec = Precision(8, 4)
    a = Fixed(1 << prec.s, prec)  # slope 1
    delta = alibi_window(a, prec)
    # beyond the window every score rounds below the exp cutoff
    for x_m in range(prec.min_m, prec.max_m + 1):
        val = Fraction(x_m, 1 << prec.s) - delta
        assert exp_round(val, prec).m == 0
    # the bound is not vacuous: at delta - 2 some score still survives
    assert exp_round(prec.max_value - (delta - 2), prec).m > 0

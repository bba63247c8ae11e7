"""Exact compilation of past-counting formulas to transformers, and back.

compile_formula builds a fixed-precision transformer that accepts exactly the
language of the formula: one coordinate per subformula, uniform attention for
the prefix counts, and ReLU gadgets for comparisons and Boolean connectives.

decompile recovers an equivalent formula from a small model by expressing each
bit of each activation coordinate as a formula: attention sums become prefix
counts of per-bit indicator formulas, and the final rounded division is
reconstructed with a restoring long-division chain at the term level.
"""

from fractions import Fraction

from .formulas import (
    Alphabet, Sym, Not, And, Or, Compare, BoolConst, CountLeft,
    Sum, Neg, IntConst, Ite, TRUE, FALSE,
    big_or, big_sum, scale_term, depth, features, symbols_of,
    eval_formula, FormulaError,
)
from .transforms import desugar, normalize_to_minimal_basis
from .fixedpoint import Precision, exp_round, expmul_round, round_to
from .transformer import (
    Transformer, Layer, LocalMap, Affine, ReLU, Table, forward, ModelError, BOS,
)


class CompileError(Exception):
    pass


# --- Formula -> transformer ---

def _subformulas(phi, acc):
    """All formula-position nodes, including count bodies, deduplicated."""
    if phi in acc:
        return
    if isinstance(phi, (Sym, BoolConst)):
        acc[phi] = True
        return
    if isinstance(phi, Not):
        _subformulas(phi.phi, acc)
    elif isinstance(phi, And):
        _subformulas(phi.left, acc)
        _subformulas(phi.right, acc)
    elif isinstance(phi, Compare):
        for t in (phi.lhs, phi.rhs):
            _term_bodies(t, acc)
    else:
        raise CompileError(f"unexpected node after normalization: {phi!r}")
    acc[phi] = True


def _term_bodies(t, acc):
    if isinstance(t, IntConst):
        return
    if isinstance(t, CountLeft):
        _subformulas(t.phi, acc)
    elif isinstance(t, Sum):
        _term_bodies(t.left, acc)
        _term_bodies(t.right, acc)
    elif isinstance(t, Neg):
        _term_bodies(t.term, acc)
    else:
        raise CompileError(f"unexpected term after normalization: {t!r}")


def _linear_form(cmp):
    """Coefficients of lhs - rhs: ({count body: coeff}, constant)."""
    coeffs = {}
    const = [0]

    def walk(t, sign):
        if isinstance(t, IntConst):
            const[0] += sign * t.value
        elif isinstance(t, CountLeft):
            coeffs[t.phi] = coeffs.get(t.phi, 0) + sign
        elif isinstance(t, Sum):
            walk(t.left, sign)
            walk(t.right, sign)
        elif isinstance(t, Neg):
            walk(t.term, -sign)
        else:
            raise CompileError(f"unexpected term {t!r}")

    walk(cmp.lhs, 1)
    walk(cmp.rhs, -1)
    return {k: v for k, v in coeffs.items() if v != 0}, const[0]


class _LayerBuilder:
    """Accumulates affine/ReLU stage pairs over a fixed coordinate layout."""

    def __init__(self, d, scale):
        self.d = d
        self.scale = scale
        self.stages = []

    def stage(self, rows, relu=True):
        """rows: {coord: ({coord: entry_m}, bias_m)}; other coords pass through."""
        matrix = []
        bias = []
        for c in range(self.d):
            if c in rows:
                row_spec, b = rows[c]
                row = [0] * self.d
                for cc, a in row_spec.items():
                    row[cc] += a
                matrix.append(row)
                bias.append(b)
            else:
                row = [0] * self.d
                row[c] = self.scale
                matrix.append(row)
                bias.append(0)
        self.stages.append(Affine(matrix, bias))
        if relu:
            self.stages.append(ReLU())

    def build(self):
        return LocalMap(self.stages)


def compile_formula(phi, precision, alphabet=None):
    """Exact transformer for phi: accepts ^w iff w satisfies phi (w nonempty)."""
    prec = precision
    if prec.s < 1 or prec.p <= prec.s + 1:
        raise CompileError("compilation needs s >= 1 and p > s + 1")
    S = 1 << prec.s
    if (1 << (2 * prec.s)) > prec.max_m:
        raise CompileError("comparison gadget needs 2^(2s) representable: increase p")

    feats = features(phi)
    for bad, msg in (("count_right", "future counts"), ("count_all", "unmasked counts"),
                     ("prev", "the Y operator"), ("mod", "MOD predicates")):
        if bad in feats:
            raise CompileError(f"cannot compile formulas with {msg}")

    if alphabet is None:
        syms = sorted(symbols_of(phi))
        if not syms:
            syms = ["a"]
        alphabet = Alphabet("".join(syms))
    else:
        missing = symbols_of(phi) - set(alphabet)
        if missing:
            raise CompileError(f"formula symbols {sorted(missing)} not in alphabet")

    norm = normalize_to_minimal_basis(desugar(phi))
    nodes = {}
    _subformulas(norm, nodes)

    # coordinate layout: bos, one per symbol, one per non-atomic subformula
    coords = {"bos": 0}
    for i, sym in enumerate(alphabet):
        coords[("sym", sym)] = 1 + i
    complex_nodes = [n for n in nodes if not isinstance(n, (Sym, BoolConst))]
    complex_nodes.sort(key=lambda n: (depth(n), str(n)))
    for n in complex_nodes:
        coords[("node", n)] = len(coords)
    d = len(coords)

    def coord_of(n):
        if isinstance(n, Sym):
            return coords[("sym", n.sym)]
        return coords[("node", n)]

    # reading a formula value as an affine contribution: ({coord: entry}, bias)
    def read(n, weight):
        if isinstance(n, BoolConst):
            if not n.value:
                return {}, 0
            return {0: -weight * S}, weight * S  # 1 - bos
        return {coord_of(n): weight * S}, 0

    embedding = {BOS: [0] * d}
    embedding[BOS][0] = S
    depth0 = [n for n in complex_nodes if depth(n) == 0]
    for sym in alphabet:
        vec = [0] * d
        vec[coords[("sym", sym)]] = S
        for n in depth0:
            if eval_formula(n, sym, 1):
                vec[coord_of(n)] = S
        embedding[sym] = vec

    total_depth = depth(norm)
    zero_map = LocalMap([Affine([[0] * d for _ in range(d)], [0] * d)])
    layers = []
    done = set(depth0)

    for level in range(1, total_depth + 1):
        comparisons = [n for n in complex_nodes
                       if isinstance(n, Compare) and depth(n) == level]
        booleans = [n for n in complex_nodes
                    if isinstance(n, (Not, And)) and depth(n) == level]

        # value map: one nonzero row per comparison at this level
        v_matrix = [[0] * d for _ in range(d)]
        v_bias = [0] * d
        for cmp in comparisons:
            coeffs, const = _linear_form(cmp)
            budget = sum(abs(c) for c in coeffs.values())
            if budget > prec.max_value or abs(const) > prec.max_value:
                raise CompileError(
                    f"comparison coefficients exceed the representable range "
                    f"(need magnitude {max(budget, abs(const))}, have {prec.max_value})")
            c_idx = coord_of(cmp)
            for body, lam in coeffs.items():
                row, b = read(body, lam)
                for cc, a in row.items():
                    v_matrix[c_idx][cc] += a
                v_bias[c_idx] += b
            v_matrix[c_idx][0] += const * S  # constant enters once, at BOS

        fb = _LayerBuilder(d, S)
        if comparisons:
            u = 1 << (2 * prec.s)
            fb.stage({coord_of(c): ({coord_of(c): -u}, 0) for c in comparisons})
            fb.stage({coord_of(c): ({coord_of(c): -S}, S) for c in comparisons})
            fb.stage({coord_of(c): ({coord_of(c): -S, 0: -S}, S) for c in comparisons})
        done.update(comparisons)

        pending = list(booleans)
        while pending:
            ready = []
            for n in pending:
                kids = [n.phi] if isinstance(n, Not) else [n.left, n.right]
                if all(isinstance(k, (Sym, BoolConst)) or k in done for k in kids):
                    ready.append(n)
            if not ready:
                raise CompileError("internal error: no progress on Boolean nodes")
            rows = {}
            for n in ready:
                if isinstance(n, Not):
                    row, b = read(n.phi, -1)
                    row[0] = row.get(0, 0) - S
                    rows[coord_of(n)] = (row, b + S)
                else:
                    row_l, b_l = read(n.left, 1)
                    row_r, b_r = read(n.right, 1)
                    for cc, a in row_r.items():
                        row_l[cc] = row_l.get(cc, 0) + a
                    rows[coord_of(n)] = (row_l, b_l + b_r - S)
            fb.stage(rows)
            done.update(ready)
            pending = [n for n in pending if n not in ready]

        layers.append(Layer(wq=zero_map, wk=zero_map,
                            wv=LocalMap([Affine(v_matrix, v_bias)]), f=fb.build()))

    out_row, out_bias = read(norm, 2)
    w_row = [0] * d
    for cc, a in out_row.items():
        w_row[cc] += a
    w_out = LocalMap([Affine([w_row], [out_bias - S])])
    return Transformer(list(alphabet), prec, d, embedding, layers, w_out)


# --- Boolean helpers with constant folding ---

def _fnot(x):
    if isinstance(x, BoolConst):
        return FALSE if x.value else TRUE
    return Not(x)


def _fand(a, b):
    if isinstance(a, BoolConst):
        return b if a.value else FALSE
    if isinstance(b, BoolConst):
        return a if b.value else FALSE
    return And(a, b)


def _for(a, b):
    if isinstance(a, BoolConst):
        return TRUE if a.value else b
    if isinstance(b, BoolConst):
        return TRUE if b.value else a
    return Or(a, b)


def _bool_ite(c, a, b):
    if isinstance(c, BoolConst):
        return a if c.value else b
    return _for(_fand(c, a), _fand(_fnot(c), b))


def synth_function_formula(inputs, rows):
    """DNF for a Boolean function given as {input bit tuple: bool}.

    inputs are the formulas for each input bit; unlisted combinations are
    treated as unreachable (false).
    """
    clauses = []
    for assignment, value in rows.items():
        if not value:
            continue
        lits = [f if bit else _fnot(f)
                for f, bit in zip(inputs, assignment)]
        clauses.append(big_and_formulas(lits))
    return big_or(clauses) if clauses else FALSE


def big_and_formulas(lits):
    out = TRUE
    for l in lits:
        out = _fand(out, l)
    return out


# --- Transformer -> formula ---

_MAX_ROWS = 4096


def _two_complement_bits(m, p):
    u = m % (1 << p)
    return tuple((u >> b) & 1 for b in range(p))


def _bits_const(m, p):
    return [TRUE if b else FALSE for b in _two_complement_bits(m, p)]


class _DepAnalysis:
    """Which input coordinates can influence each output coordinate of a LocalMap."""

    def __init__(self, local_map, d):
        deps = [frozenset([c]) for c in range(d)]
        for st in local_map.stages:
            if isinstance(st, Affine):
                new = []
                for row in st.matrix:
                    acc = set()
                    for j, a in enumerate(row):
                        if a != 0 and j < len(deps):
                            acc |= deps[j]
                    new.append(frozenset(acc))
                deps = new
            elif isinstance(st, ReLU):
                pass
            elif isinstance(st, Table):
                full = frozenset().union(*deps) if deps else frozenset()
                deps = [full for _ in deps]
        self.deps = deps

    def of(self, out_coords):
        acc = set()
        for c in out_coords:
            acc |= self.deps[c]
        return sorted(acc)


def _product(val_sets):
    combos = [()]
    for vs in val_sets:
        combos = [c + (v,) for c in combos for v in vs]
        if len(combos) > _MAX_ROWS:
            raise CompileError("model too large to decompile (state space)")
    return combos


class _CoordBank:
    """Per-coordinate value indicators and bit formulas at one layer."""

    def __init__(self, d, prec):
        self.d = d
        self.prec = prec
        self.val_sets = [None] * d   # sorted list of reachable significands
        self.indicators = [None] * d  # {m: formula}, shared objects

    def bit_formula(self, c, b):
        """Formula for bit b (1..p) of coordinate c, from the value indicators."""
        return big_or([f for m, f in self.indicators[c].items()
                       if (m >> (b - 1)) & 1])

    def joint_indicator(self, dep_coords, assignment, cache):
        key = (tuple(dep_coords), assignment)
        if key not in cache:
            cache[key] = big_and_formulas(
                [self.indicators[c][m] for c, m in zip(dep_coords, assignment)])
        return cache[key]


def _division_bits(n_term, d_term, shift, prec):
    """Bit formulas of the saturating floor of 2^shift * N / D, assuming D >= 1."""
    p = prec.p
    shifted_n = scale_term(1 << shift, n_term)
    sign = Compare(n_term, "<", IntConst(0))
    sat_hi = Compare(shifted_n, ">=", scale_term(1 << (p - 1), d_term))
    sat_lo = Compare(shifted_n, "<", scale_term(-(1 << (p - 1)), d_term))
    t = Sum(shifted_n, Ite(sign, scale_term(1 << p, d_term), IntConst(0)))
    chain = [None] * p
    for b in range(p, 0, -1):
        step = scale_term(1 << (b - 1), d_term)
        bit_b = Compare(t, ">=", step)
        chain[b - 1] = bit_b
        t = Sum(t, Neg(Ite(bit_b, step, IntConst(0))))
    hi_bits = _bits_const(prec.max_m, p)
    lo_bits = _bits_const(prec.min_m, p)
    return [_bool_ite(sat_hi, hi_bits[b], _bool_ite(sat_lo, lo_bits[b], chain[b]))
            for b in range(p)]


def _sum_term(bit_formulas, bos_m, prec):
    """Term for the scaled prefix sum: bos constant + sum over positions of m."""
    parts = [IntConst(bos_m)] if bos_m != 0 else []
    for b in range(1, prec.p):
        f = bit_formulas[b - 1]
        if f != FALSE:
            parts.append(scale_term(1 << (b - 1), CountLeft(f)))
    f = bit_formulas[prec.p - 1]
    if f != FALSE:
        parts.append(scale_term(-(1 << (prec.p - 1)), CountLeft(f)))
    return big_sum(parts) if parts else IntConst(0)


def decompile(model):
    """Formula phi with: model accepts ^w  iff  w satisfies phi (nonempty w)."""
    prec = model.precision
    if model.pe is not None:
        raise CompileError("decompilation supports models without positional encoding")
    if prec.p > 4:
        raise CompileError("decompilation supports p <= 4")
    if model.d > 4:
        raise CompileError("decompilation supports width <= 4")
    d = model.d

    # BOS column: constant down the whole stack, read off a run on '^' alone
    _, bos_acts = forward(model, BOS, trace=True)
    bos_h = [[x.m for x in lvl[0]] for lvl in bos_acts.h]

    bank = _CoordBank(d, prec)
    for c in range(d):
        by_val = {}
        for sym in model.alphabet:
            by_val.setdefault(model.embedding[sym][c], []).append(Sym(sym))
        bank.val_sets[c] = sorted(by_val)
        bank.indicators[c] = {m: big_or(fs) for m, fs in by_val.items()}

    all_m = list(range(prec.min_m, prec.max_m + 1))
    position_count = Sum(CountLeft(TRUE), IntConst(1))  # masked positions incl. BOS

    for li, layer in enumerate(model.layers):
        dep_q = _DepAnalysis(layer.wq, d)
        dep_k = _DepAnalysis(layer.wk, d)
        dep_v = _DepAnalysis(layer.wv, d)
        ind_cache = {}

        def apply_on(lm, dep_coords, assignment):
            vec = [0] * d
            for c, m in zip(dep_coords, assignment):
                vec[c] = m
            return lm.apply(tuple(vec), prec)

        # queries: distinct wq outputs with their indicator formulas
        q_deps = dep_q.of(range(d))
        q_map = {}
        for combo in _product([bank.val_sets[c] for c in q_deps]):
            qv = apply_on(layer.wq, q_deps, combo)
            q_map.setdefault(qv, []).append(
                bank.joint_indicator(q_deps, combo, ind_cache))
        queries = {qv: big_or(fs) for qv, fs in q_map.items()}

        bos_k = layer.wk.apply(tuple(bos_h[li]), prec)
        bos_v = layer.wv.apply(tuple(bos_h[li]), prec)

        def score_of(qv, kv):
            dot = Fraction(sum(a * b for a, b in zip(qv, kv)), 1 << (2 * prec.s))
            return round_to(dot, prec).value

        # per-coordinate value bits of v(h), used by the zero-weight fallback
        v_bits = []
        v_zero = []
        for c in range(d):
            deps = dep_v.of([c])
            table = {}
            for combo in _product([bank.val_sets[cc] for cc in deps]):
                table[combo] = apply_on(layer.wv, deps, combo)[c]
            zero = all(m == 0 for m in table.values()) and bos_v[c] == 0
            v_zero.append(zero)
            if zero:
                v_bits.append(None)
                continue
            bits = []
            for b in range(1, prec.p + 1):
                rows = {combo: ((m >> (b - 1)) & 1) == 1 for combo, m in table.items()}
                bits.append(big_or([bank.joint_indicator(deps, combo, ind_cache)
                                    for combo, v in rows.items() if v]))
            v_bits.append(bits)

        # attention output bits per coordinate
        c_bits = [None] * d
        for c in range(d):
            if v_zero[c]:
                continue
            avg_term = _sum_term(v_bits[c], bos_v[c], prec)
            avg = _division_bits(avg_term, position_count, 0, prec)
            per_query = []
            for qv, q_ind in queries.items():
                kv_deps = dep_k.of([i for i in range(d) if qv[i] != 0])
                deps = sorted(set(kv_deps) | set(dep_v.of([c])))
                num_table = {}
                den_table = {}
                for combo in _product([bank.val_sets[cc] for cc in deps]):
                    kv = apply_on(layer.wk, deps, combo)
                    vv = apply_on(layer.wv, deps, combo)[c]
                    sc = score_of(qv, kv)
                    den_table[combo] = exp_round(sc, prec).m
                    num_table[combo] = expmul_round(sc, Fraction(vv, 1 << prec.s), prec).m
                num_bits = [big_or([bank.joint_indicator(deps, combo, ind_cache)
                                    for combo, m in num_table.items()
                                    if (m >> (b - 1)) & 1])
                            for b in range(1, prec.p + 1)]
                den_bits = [big_or([bank.joint_indicator(deps, combo, ind_cache)
                                    for combo, m in den_table.items()
                                    if (m >> (b - 1)) & 1])
                            for b in range(1, prec.p + 1)]
                sc_bos = score_of(qv, bos_k)
                num_bos = expmul_round(sc_bos, Fraction(bos_v[c], 1 << prec.s), prec).m
                den_bos = exp_round(sc_bos, prec).m
                n_term = _sum_term(num_bits, num_bos, prec)
                d_term = _sum_term(den_bits, den_bos, prec)
                div = _division_bits(n_term, d_term, prec.s, prec)
                d_zero = Compare(d_term, "=", IntConst(0))
                bits = [_bool_ite(d_zero, avg[b], div[b]) for b in range(prec.p)]
                per_query.append((q_ind, bits))
            if len(queries) == 1:
                c_bits[c] = per_query[0][1]
            else:
                c_bits[c] = [big_or([_fand(q_ind, bits[b]) for q_ind, bits in per_query])
                             for b in range(prec.p)]

        # residual add with saturation, per coordinate
        next_bank = _CoordBank(d, prec)
        z_indicators = [None] * d
        for c in range(d):
            if v_zero[c]:
                z_indicators[c] = dict(bank.indicators[c])
                continue
            h_ind = bank.indicators[c]
            cb = c_bits[c]
            c_ind = {}
            for m in all_m:
                want = _two_complement_bits(m, prec.p)
                c_ind[m] = big_and_formulas(
                    [cb[b] if want[b] else _fnot(cb[b]) for b in range(prec.p)])
            z_ind = {}
            for hm, hf in h_ind.items():
                for cm in all_m:
                    zm = min(max(cm + hm, prec.min_m), prec.max_m)
                    f = _fand(c_ind[cm], hf)
                    z_ind[zm] = _for(z_ind[zm], f) if zm in z_ind else f
            z_indicators[c] = z_ind

        # f, per output coordinate over its input dependencies
        dep_f = _DepAnalysis(layer.f, d)
        bos_h_next = bos_h[li + 1]
        for c in range(d):
            deps = dep_f.of([c])
            table = {}
            for combo in _product([sorted(z_indicators[cc]) for cc in deps]):
                table[combo] = apply_on(layer.f, deps, combo)[c]
            by_val = {}
            for combo, m in table.items():
                f = big_and_formulas([z_indicators[cc][mm]
                                      for cc, mm in zip(deps, combo)])
                by_val[m] = _for(by_val[m], f) if m in by_val else f
            next_bank.val_sets[c] = sorted(by_val)
            next_bank.indicators[c] = by_val
        bank = next_bank

    out_deps = _DepAnalysis(model.w_out, d).of([0])
    clauses = []
    for combo in _product([bank.val_sets[c] for c in out_deps]):
        vec = [0] * d
        for c, m in zip(out_deps, combo):
            vec[c] = m
        if model.w_out.apply(tuple(vec), prec)[0] > 0:
            clauses.append(big_and_formulas(
                [bank.indicators[c][m] for c, m in zip(out_deps, combo)]))
    return big_or(clauses) if clauses else FALSE

"""Future-masked fixed-precision transformer: exact forward pass and model I/O.

Attention uses exact sums: per masked position the weight is round(exp(score))
and the weighted value is round(exp(score) * v); the two running sums are kept
exact and divided with a single final round. If all weights round to zero the
attention output falls back to the plain average of the masked values.

Activations are handled internally as tuples of integer significands; all
arithmetic is integer/rational, rounded only where the model definition rounds.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

from .fixedpoint import (
    Precision, Fixed, FixedError, ZeroDenominator,
    round_to, exp_round, expmul_round,
)
from . import trig

BOS = "^"


class ModelError(Exception):
    pass


def _sat(m, prec):
    return min(max(m, prec.min_m), prec.max_m)


# --- Local maps ---

class Affine:
    def __init__(self, matrix, bias):
        # matrix: rows of integer significands, bias: integer significands
        self.matrix = [list(map(int, row)) for row in matrix]
        self.bias = list(map(int, bias))
        if len(self.matrix) != len(self.bias):
            raise ModelError("affine matrix/bias size mismatch")

    def apply(self, xs, prec):
        shift = 1 << prec.s
        out = []
        for row, b in zip(self.matrix, self.bias):
            if len(row) != len(xs):
                raise ModelError("affine input width mismatch")
            acc = sum(a * x for a, x in zip(row, xs)) + b * shift
            # value = acc * 2^-2s; floor to the 2^-s grid
            out.append(_sat(acc // shift, prec))
        return tuple(out)

    def to_json(self):
        return {"stage": "affine", "m": self.matrix, "b": self.bias}


class ReLU:
    def apply(self, xs, prec):
        return tuple(max(x, 0) for x in xs)

    def to_json(self):
        return {"stage": "relu"}


class Table:
    def __init__(self, entries):
        # entries: list of (input tuple of significands, output tuple)
        self.entries = {tuple(map(int, i)): tuple(map(int, o)) for i, o in entries}

    def apply(self, xs, prec):
        try:
            return self.entries[tuple(xs)]
        except KeyError:
            raise ModelError(f"table has no entry for input {xs}") from None

    def to_json(self):
        return {"stage": "table",
                "entries": [[list(i), list(o)] for i, o in sorted(self.entries.items())]}


class LocalMap:
    """A chain of affine / ReLU / table stages; the representable F^d -> F^d maps."""

    def __init__(self, stages):
        self.stages = list(stages)
        self._memo = {}

    def apply(self, xs, prec):
        xs = tuple(xs)
        hit = self._memo.get(xs)
        if hit is not None:
            return hit
        out = xs
        for st in self.stages:
            out = st.apply(out, prec)
        self._memo[xs] = out
        return out

    def to_json(self):
        return [st.to_json() for st in self.stages]

    @staticmethod
    def from_json(data):
        stages = []
        for st in data:
            kind = st["stage"]
            if kind == "affine":
                stages.append(Affine(st["m"], st["b"]))
            elif kind == "relu":
                stages.append(ReLU())
            elif kind == "table":
                stages.append(Table(st["entries"]))
            else:
                raise ModelError(f"unknown stage {kind!r}")
        return LocalMap(stages)

    def is_constant_zero_of_input(self):
        """True if the first stage ignores its input (zero affine matrix)."""
        if not self.stages or not isinstance(self.stages[0], Affine):
            return False
        return all(all(a == 0 for a in row) for row in self.stages[0].matrix)


# --- Positional encodings ---

@dataclass
class AngleSpec:
    """Rational angles theta_c = 2 pi r_c / m_c with precomputed rounded tables."""
    pairs: list  # list of (m_c, r_c)

    def tables(self, prec):
        out = []
        for m_c, r_c in self.pairs:
            tab = []
            for t in range(m_c):
                q = Fraction(r_c * t, m_c)
                tab.append((trig.sin_round(q, prec).m, trig.cos_round(q, prec).m))
            out.append(tab)
        return out


class Sinusoidal:
    kind = "sinusoidal"

    def __init__(self, angles):
        self.angles = angles
        self._tabs = None

    def embedding_addend(self, i, d, prec):
        """Rounded R(theta)^(i-1) applied to (sin 0, cos 0, ...) = (0,1,0,1,...)."""
        if self._tabs is None:
            self._tabs = self.angles.tables(prec)
        add = [0] * d
        for c, ((m_c, _r), tab) in enumerate(zip(self.angles.pairs, self._tabs)):
            if 2 * c + 1 >= d:
                raise ModelError("width too small for angle pairs")
            sin_m, cos_m = tab[((i - 1) * self.angles.pairs[c][1]) % m_c]
            add[2 * c] = -sin_m
            add[2 * c + 1] = cos_m
        return add


class RoPE:
    kind = "rope"

    def __init__(self, angles):
        self.angles = angles
        self._tabs = None

    def rotate(self, xs, i, prec):
        if self._tabs is None:
            self._tabs = self.angles.tables(prec)
        out = list(xs)
        for c, ((m_c, r_c), tab) in enumerate(zip(self.angles.pairs, self._tabs)):
            if 2 * c + 1 >= len(xs):
                raise ModelError("width too small for angle pairs")
            sin_m, cos_m = tab[(i * r_c) % m_c]
            x1, x2 = xs[2 * c], xs[2 * c + 1]
            # exact products on the 2^-2s grid; the score round happens later
            out[2 * c] = Fraction(cos_m * x1 - sin_m * x2, 1)
            out[2 * c + 1] = Fraction(sin_m * x1 + cos_m * x2, 1)
        return out


class ALiBi:
    kind = "alibi"

    def __init__(self, a_m):
        self.a_m = int(a_m)  # slope significand; bias is -a*(i-j)


def alibi_window(a, prec):
    """Delta such that exp_round(x - a*delta') = 0 for all x in F, delta' >= Delta."""
    # need x - a*Delta <= ln(2^-(s+1)); upper rational bound of ln 2
    ln2_hi = Fraction(693147180559945310, 10 ** 18)
    need = prec.max_value + (prec.s + 1) * ln2_hi
    a_val = Fraction(a.m, 1 << prec.s) if isinstance(a, Fixed) else Fraction(a)
    if a_val <= 0:
        raise ModelError("ALiBi window needs a > 0")
    d = need / a_val
    return int(d) + 1


# --- Transformer ---

@dataclass
class Layer:
    wq: LocalMap
    wk: LocalMap
    wv: LocalMap
    f: LocalMap


class Transformer:
    def __init__(self, alphabet, precision, d, embedding, layers, w_out, pe=None):
        self.alphabet = list(alphabet)  # excludes BOS
        self.precision = precision
        self.d = d
        self.embedding = {k: tuple(map(int, v)) for k, v in embedding.items()}
        self.layers = layers
        self.w_out = w_out
        self.pe = pe
        if BOS not in self.embedding:
            raise ModelError("embedding must cover BOS '^'")
        for sym in self.alphabet:
            if sym not in self.embedding:
                raise ModelError(f"embedding missing symbol {sym!r}")
        for vec in self.embedding.values():
            if len(vec) != d:
                raise ModelError("embedding width mismatch")
            for m in vec:
                if not precision.min_m <= m <= precision.max_m:
                    raise ModelError("embedding parameter outside F")

    @property
    def depth(self):
        return len(self.layers)


@dataclass
class Activations:
    """Per-layer activation record; entries are tuples of Fixed per position."""
    h: list          # h[l][i] for l in 0..depth
    q: list          # q[l][i] for l in 1..depth (index l-1)
    k: list
    v: list
    c: list
    scores: list     # scores[l-1][i][j] (only when traced)


def _score(T, layer, q_i, k_j, i, j, prec, memo):
    key = (q_i, k_j, i, j) if isinstance(T.pe, (RoPE, ALiBi)) else (q_i, k_j)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(T.pe, RoPE):
        qr = T.pe.rotate(q_i, i, prec)
        kr = T.pe.rotate(k_j, j, prec)
        dot = sum(a * b for a, b in zip(qr, kr)) * Fraction(1, 1 << (2 * prec.s))
        s_m = round_to(dot, prec).m
    else:
        dot = sum(a * b for a, b in zip(q_i, k_j))  # on the 2^-2s grid
        val = Fraction(dot, 1 << (2 * prec.s))
        if isinstance(T.pe, ALiBi):
            val = val - Fraction(T.pe.a_m, 1 << prec.s) * (i - j)
        s_m = round_to(val, prec).m
    memo[key] = s_m
    return s_m


def forward(T, w, trace=False):
    """Exact forward pass on w (which must start with BOS); returns (score, acts)."""
    prec = T.precision
    if not w or w[0] != BOS:
        raise ModelError("input must start with the BOS marker '^'")
    if BOS in w[1:]:
        raise ModelError("BOS may only appear at the start")
    for ch in w[1:]:
        if ch not in T.alphabet:
            raise ModelError(f"symbol {ch!r} not in model alphabet")
    n = len(w)
    s = prec.s

    h = []
    for i in range(1, n + 1):
        base = T.embedding[w[i - 1]]
        if isinstance(T.pe, Sinusoidal):
            add = T.pe.embedding_addend(i, T.d, prec)
            base = tuple(_sat(a + b, prec) for a, b in zip(base, add))
        h.append(base)

    acts_h = [h] if trace else None
    acts = Activations([h], [], [], [], [], []) if trace else None
    exp_memo = {}
    num_memo = {}

    for layer in T.layers:
        q = [layer.wq.apply(x, prec) for x in h]
        k = [layer.wk.apply(x, prec) for x in h]
        v = [layer.wv.apply(x, prec) for x in h]
        score_memo = {}
        c_rows = []
        score_rows = [] if trace else None

        uniform = (layer.wq.is_constant_zero_of_input()
                   and not isinstance(T.pe, (RoPE, ALiBi)))
        if uniform:
            # query constant: per-position weights depend only on j; stream sums
            num_sum = [0] * T.d
            den_sum = 0
            v_sum = [0] * T.d
            for i in range(1, n + 1):
                s_m = _score(T, layer, q[i - 1], k[i - 1], i, i, prec, score_memo)
                e_m = exp_memo.get(s_m)
                if e_m is None:
                    e_m = exp_round(Fixed(s_m, prec)).m
                    exp_memo[s_m] = e_m
                den_sum += e_m
                vj = v[i - 1]
                for c0 in range(T.d):
                    nkey = (s_m, vj[c0])
                    nm = num_memo.get(nkey)
                    if nm is None:
                        nm = expmul_round(Fraction(s_m, 1 << s), Fraction(vj[c0], 1 << s), prec).m
                        num_memo[nkey] = nm
                    num_sum[c0] += nm
                    v_sum[c0] += vj[c0]
                c_rows.append(_attn_out(num_sum, den_sum, v_sum, i, prec))
                if trace:
                    score_rows.append(None)
        else:
            for i in range(1, n + 1):
                num_sum = [0] * T.d
                den_sum = 0
                v_sum = [0] * T.d
                row = [] if trace else None
                for j in range(1, i + 1):
                    s_m = _score(T, layer, q[i - 1], k[j - 1], i, j, prec, score_memo)
                    if trace:
                        row.append(Fixed(s_m, prec))
                    e_m = exp_memo.get(s_m)
                    if e_m is None:
                        e_m = exp_round(Fixed(s_m, prec)).m
                        exp_memo[s_m] = e_m
                    den_sum += e_m
                    vj = v[j - 1]
                    for c0 in range(T.d):
                        nkey = (s_m, vj[c0])
                        nm = num_memo.get(nkey)
                        if nm is None:
                            nm = expmul_round(Fraction(s_m, 1 << s), Fraction(vj[c0], 1 << s), prec).m
                            num_memo[nkey] = nm
                        num_sum[c0] += nm
                        v_sum[c0] += vj[c0]
                c_rows.append(_attn_out(num_sum, den_sum, v_sum, i, prec))
                if trace:
                    score_rows.append(row)

        new_h = []
        for i in range(n):
            summed = tuple(_sat(a + b, prec) for a, b in zip(c_rows[i], h[i]))
            new_h.append(layer.f.apply(summed, prec))
        if trace:
            acts.q.append([tuple(Fixed(m, prec) for m in x) for x in q])
            acts.k.append([tuple(Fixed(m, prec) for m in x) for x in k])
            acts.v.append([tuple(Fixed(m, prec) for m in x) for x in v])
            acts.c.append([tuple(Fixed(m, prec) for m in x) for x in c_rows])
            acts.scores.append(score_rows)
            acts.h.append(new_h)
        h = new_h

    out = T.w_out.apply(h[-1], prec)
    if len(out) < 1:
        raise ModelError("output map produced no value")
    score = Fixed(out[0], prec)
    if trace:
        acts.h = [[tuple(Fixed(m, prec) for m in x) for x in lvl] for lvl in acts.h]
    return score, acts


def _attn_out(num_sum, den_sum, v_sum, i, prec):
    if den_sum == 0:
        # average-of-values convention
        return tuple(_sat(_floordiv(vs, i), prec) for vs in v_sum)
    return tuple(_sat(_floordiv(nm << prec.s, den_sum), prec) for nm in num_sum)


def _floordiv(a, b):
    return a // b


def accepts(T, w):
    score, _ = forward(T, w)
    return score.m > 0


# --- Serialization ---

def to_json_dict(T):
    pe = None
    if isinstance(T.pe, Sinusoidal):
        pe = {"kind": "sinusoidal", "params": {"pairs": [list(p) for p in T.pe.angles.pairs]}}
    elif isinstance(T.pe, RoPE):
        pe = {"kind": "rope", "params": {"pairs": [list(p) for p in T.pe.angles.pairs]}}
    elif isinstance(T.pe, ALiBi):
        pe = {"kind": "alibi", "params": {"a": T.pe.a_m}}
    return {
        "precision": {"p": T.precision.p, "s": T.precision.s},
        "alphabet": T.alphabet,
        "bos": BOS,
        "d": T.d,
        "embedding": {sym: list(vec) for sym, vec in T.embedding.items()},
        "layers": [{"wq": l.wq.to_json(), "wk": l.wk.to_json(),
                    "wv": l.wv.to_json(), "f": l.f.to_json()} for l in T.layers],
        "w_out": T.w_out.to_json(),
        "pe": pe,
    }


def from_json_dict(data):
    try:
        prec = Precision(data["precision"]["p"], data["precision"]["s"])
        pe = None
        if data.get("pe"):
            kind = data["pe"]["kind"]
            if kind == "sinusoidal":
                pe = Sinusoidal(AngleSpec([tuple(p) for p in data["pe"]["params"]["pairs"]]))
            elif kind == "rope":
                pe = RoPE(AngleSpec([tuple(p) for p in data["pe"]["params"]["pairs"]]))
            elif kind == "alibi":
                pe = ALiBi(data["pe"]["params"]["a"])
            else:
                raise ModelError(f"unknown pe kind {kind!r}")
        layers = [Layer(LocalMap.from_json(l["wq"]), LocalMap.from_json(l["wk"]),
                        LocalMap.from_json(l["wv"]), LocalMap.from_json(l["f"]))
                  for l in data["layers"]]
        return Transformer(data["alphabet"], prec, data["d"], data["embedding"],
                           layers, LocalMap.from_json(data["w_out"]), pe)
    except (KeyError, TypeError, FixedError) as exc:
        raise ModelError(f"bad model file: {exc}") from exc


def save_model(T, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(T), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return from_json_dict(json.load(fh))

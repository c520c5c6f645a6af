"""Word model of the negative half of the quantized enveloping algebra.

Each weight space is presented as the span of all words in the generators
f_i of that weight, modulo the radical of the Kashiwara bilinear form; a
fixed set of pivot words gives coordinates.  The form is computed by the
adjunction (f_i x, y) = (x, ir_i(y)) with the twisted-derivation expansion of
ir_i on words, so the q-Serre ideal is killed automatically (certified at
runtime by the q-Serre pairing checks).

Pivot selection runs at q = 1, where the form specializes to the classical
contravariant form: positive semidefinite with the same generic rank, so a
greedy principal-minor scan in lexicographic word order is valid and cheap.
"""

from __future__ import annotations

import threading

from .rootdata import RootDatum, height, weight_dim, weight_sub
from .scalars import (ONE, RF_ONE, RF_ZERO, ZERO, LaurentInt, RatFunc,
                      q_factorial)

Word = tuple


class HeightCapExceeded(RuntimeError):
    """An operation needed a weight above the algebra's configured height cap."""


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


class HalfElement:
    """Homogeneous element of the negative half, as pivot-word coordinates."""

    __slots__ = ("weight", "coords")

    def __init__(self, weight, coords):
        self.weight = weight
        self.coords = {w: c for w, c in coords.items() if not c.is_zero}

    @property
    def is_zero(self) -> bool:
        return not self.coords

    def __add__(self, other: "HalfElement") -> "HalfElement":
        if self.weight != other.weight and not (self.is_zero or other.is_zero):
            raise PreconditionError("sum of elements of different weights")
        out = dict(self.coords)
        for w, c in other.coords.items():
            s = out.get(w, RF_ZERO) + c
            if s.is_zero:
                out.pop(w, None)
            else:
                out[w] = s
        return HalfElement(other.weight if self.is_zero else self.weight, out)

    def __sub__(self, other: "HalfElement") -> "HalfElement":
        return self + other.negate()

    def negate(self) -> "HalfElement":
        return HalfElement(self.weight, {w: -c for w, c in self.coords.items()})

    def scale(self, c: RatFunc) -> "HalfElement":
        if c.is_zero:
            return HalfElement(self.weight, {})
        return HalfElement(self.weight, {w: x * c for w, x in self.coords.items()})

    def scale_laurent(self, p: LaurentInt) -> "HalfElement":
        if p.is_zero:
            return HalfElement(self.weight, {})
        return HalfElement(self.weight, {w: x.scale_laurent(p) for w, x in self.coords.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, HalfElement)
                and self.coords == other.coords
                and (self.weight == other.weight or not self.coords))

    def __hash__(self) -> int:
        return hash((self.weight, frozenset(self.coords.items())))

    def coord_key(self):
        return frozenset(self.coords.items())

    def bar(self) -> "HalfElement":
        """Bar involution: words are bar-fixed, so it acts on coefficients."""
        return HalfElement(self.weight, {w: c.bar() for w, c in self.coords.items()})

    def __repr__(self) -> str:
        if not self.coords:
            return "0"
        parts = [f"({c})*[{''.join(map(str, w))}]" for w, c in sorted(self.coords.items())]
        return " + ".join(parts)


class WeightSpace:
    """Pivot data of one weight space: the word basis of the quotient."""

    __slots__ = ("weight", "dim", "pivots", "pivot_index", "pivot_gram",
                 "adjugate", "det", "resolve_cache", "word_count")

    def __init__(self, weight, pivots, pivot_gram, adjugate, det, word_count):
        self.weight = weight
        self.dim = len(pivots)
        self.pivots = pivots
        self.pivot_index = {w: k for k, w in enumerate(pivots)}
        self.pivot_gram = pivot_gram
        self.adjugate = adjugate
        self.det = det
        self.word_count = word_count
        self.resolve_cache = {w: {w: RF_ONE} for w in pivots}


def words_of_weight(weight):
    """All words with letter multiset equal to the weight, lexicographically."""
    rank = len(weight)

    def rec(counts, prefix):
        if all(c == 0 for c in counts):
            yield tuple(prefix)
            return
        for i in range(rank):
            if counts[i]:
                counts[i] -= 1
                prefix.append(i)
                yield from rec(counts, prefix)
                prefix.pop()
                counts[i] += 1

    yield from rec(list(weight), [])


def word_count(weight) -> int:
    from math import factorial
    n = factorial(sum(weight))
    for k in weight:
        n //= factorial(k)
    return n


class Algebra:
    """The negative half attached to a root datum, with all per-weight caches.

    The caches behave as memo tables: construction happens once per weight
    under a re-entrant lock, reads afterwards are lock-free.  Elements are
    immutable, so values may be shared freely.
    """

    def __init__(self, datum: RootDatum, max_height: int = 64):
        self.datum = datum
        self.max_height = max_height
        self._spaces: dict = {}
        self._pair_memo: dict = {}
        self._divmono_cache: dict = {}
        self._lock = threading.RLock()

    # -- the bilinear form on words ------------------------------------

    def pair_words(self, w: Word, v: Word) -> LaurentInt:
        """(w, v) for two words of equal weight, via the ir-adjunction recursion."""
        if len(w) != len(v):
            return ZERO
        key = (w, v) if w <= v else (v, w)
        memo = self._pair_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        if not w:
            memo[key] = ONE
            return ONE
        i = w[0]
        rest = w[1:]
        pairing = self.datum.pairing
        acc = ZERO
        shift = 0  # (wt of the prefix of v before position k, alpha_i), accumulated
        for k, letter in enumerate(v):
            if letter == i:
                term = self.pair_words(rest, v[:k] + v[k + 1:])
                if not term.is_zero:
                    acc = acc + term.shifted(shift)
            shift -= pairing(letter, i)
        memo[key] = acc
        return acc

    # -- weight spaces ----------------------------------------------------

    def weight_space(self, weight) -> WeightSpace:
        ws = self._spaces.get(weight)
        if ws is not None:
            return ws
        with self._lock:
            ws = self._spaces.get(weight)
            if ws is not None:
                return ws
            if height(weight) > self.max_height:
                raise HeightCapExceeded(
                    f"weight {weight} of height {height(weight)} exceeds the cap "
                    f"{self.max_height}")
            ws = self._build_space(weight)
            self._spaces[weight] = ws
            return ws

    def _build_space(self, weight) -> WeightSpace:
        # Greedy scan in lexicographic word order with an exact Schur-complement
        # test.  The form is almost orthonormal on the canonical basis, hence
        # positive definite over the ordered field Q(q) with q -> 0+, so a
        # vanishing Schur complement certifies dependence modulo the radical.
        dim = weight_dim(self.datum, weight)
        pivots: list = []
        ginv: list = []  # RatFunc inverse of the Gram block on pivots
        det = RF_ONE
        for w in words_of_weight(weight):
            if len(pivots) == dim:
                break
            col = [self.pair_words(w, p) for p in pivots]
            n = len(pivots)
            u = []
            for r in range(n):
                acc = RF_ZERO
                for k in range(n):
                    if not col[k].is_zero and not ginv[r][k].is_zero:
                        acc = acc + ginv[r][k].scale_laurent(col[k])
                u.append(acc)
            beta = RatFunc.from_laurent(self.pair_words(w, w))
            for ck, uk in zip(col, u):
                if not ck.is_zero and not uk.is_zero:
                    beta = beta - uk.scale_laurent(ck)
            if beta.is_zero:
                continue
            inv_beta = RF_ONE / beta
            new = [[ginv[r][k] + u[r] * u[k] * inv_beta for k in range(n)]
                   + [-(u[r] * inv_beta)] for r in range(n)]
            new.append([-(u[k] * inv_beta) for k in range(n)] + [inv_beta])
            pivots.append(w)
            ginv = new
            det = det * beta
        if len(pivots) != dim:
            raise ArithmeticError(
                f"pivot scan found {len(pivots)} independent words at {weight}, expected {dim}")
        gram = [[self.pair_words(p, r) for r in pivots] for p in pivots]
        det_l = det.as_laurent() if dim else ONE
        adj = [[(ginv[r][k] * det).as_laurent() for k in range(dim)] for r in range(dim)]
        return WeightSpace(weight, tuple(pivots), gram, adj, det_l, word_count(weight))

    def resolve(self, word: Word) -> dict:
        """Coordinates of a word on the pivot basis of its weight space."""
        weight = self._word_weight(word)
        ws = self.weight_space(weight)
        hit = ws.resolve_cache.get(word)
        if hit is not None:
            return hit
        col = [self.pair_words(word, p) for p in ws.pivots]
        out = {}
        for r, p in enumerate(ws.pivots):
            acc = ZERO
            for k in range(ws.dim):
                a = ws.adjugate[r][k]
                if not a.is_zero and not col[k].is_zero:
                    acc = acc + a * col[k]
            if not acc.is_zero:
                out[p] = RatFunc(acc, ws.det)
        ws.resolve_cache[word] = out
        return out

    def _word_weight(self, word: Word):
        out = [0] * self.datum.rank
        for i in word:
            out[i] += 1
        return tuple(out)

    # -- element constructors ------------------------------------------------

    def zero(self, weight=None) -> HalfElement:
        return HalfElement(weight or self.datum.zero_weight(), {})

    def one(self) -> HalfElement:
        return HalfElement(self.datum.zero_weight(), {(): RF_ONE})

    def generator(self, i: int) -> HalfElement:
        w = (i,)
        return HalfElement(self._word_weight(w), {w: RF_ONE})

    def element_from_words(self, weight, word_coeffs: dict) -> HalfElement:
        out: dict = {}
        for word, c in word_coeffs.items():
            if c.is_zero:
                continue
            for p, z in self.resolve(word).items():
                s = out.get(p, RF_ZERO) + c * z
                if s.is_zero:
                    out.pop(p, None)
                else:
                    out[p] = s
        return HalfElement(weight, out)

    # -- algebra operations ------------------------------------------------

    def multiply(self, x: HalfElement, y: HalfElement) -> HalfElement:
        if x.is_zero or y.is_zero:
            return self.zero()
        weight = tuple(a + b for a, b in zip(x.weight, y.weight))
        raw: dict = {}
        for p, cx in x.coords.items():
            for r, cy in y.coords.items():
                w = p + r
                c = cx * cy
                s = raw.get(w, RF_ZERO) + c
                if s.is_zero:
                    raw.pop(w, None)
                else:
                    raw[w] = s
        return self.element_from_words(weight, raw)

    def pair(self, x: HalfElement, y: HalfElement) -> RatFunc:
        """The Kashiwara form; zero on unequal weights by convention."""
        if x.is_zero or y.is_zero or x.weight != y.weight:
            return RF_ZERO
        ws = self.weight_space(x.weight)
        idx = ws.pivot_index
        acc = RF_ZERO
        for p, cx in x.coords.items():
            row = ws.pivot_gram[idx[p]]
            t = RF_ZERO
            for r, cy in y.coords.items():
                g = row[idx[r]]
                if not g.is_zero:
                    t = t + cy.scale_laurent(g)
            if not t.is_zero:
                acc = acc + cx * t
        return acc

    def ir(self, x: HalfElement, i: int) -> HalfElement:
        """The left twisted derivation, adjoint to multiplication by f_i on the left."""
        return self._deriv(x, i, left=True)

    def ri(self, x: HalfElement, i: int) -> HalfElement:
        """The right twisted derivation, adjoint to right multiplication by f_i."""
        return self._deriv(x, i, left=False)

    def _deriv(self, x: HalfElement, i: int, left: bool) -> HalfElement:
        if x.is_zero or x.weight[i] == 0:
            return self.zero()
        target = weight_sub(x.weight, tuple(1 if j == i else 0 for j in range(self.datum.rank)))
        pairing = self.datum.pairing
        raw: dict = {}
        for word, c in x.coords.items():
            positions = range(len(word)) if left else range(len(word) - 1, -1, -1)
            shift = 0
            for k in positions:
                letter = word[k]
                if letter == i:
                    sub = word[:k] + word[k + 1:]
                    cc = c.scale_laurent(LaurentInt.monomial(1, shift)) if shift else c
                    s = raw.get(sub, RF_ZERO) + cc
                    if s.is_zero:
                        raw.pop(sub, None)
                    else:
                        raw[sub] = s
                shift -= pairing(letter, i)
        return self.element_from_words(target, raw)

    def star(self, x: HalfElement) -> HalfElement:
        """Word reversal, the algebra anti-involution fixing the generators."""
        raw = {tuple(reversed(w)): c for w, c in x.coords.items()}
        return self.element_from_words(x.weight, raw)

    def bar(self, x: HalfElement) -> HalfElement:
        return x.bar()

    # -- divided powers -------------------------------------------------------

    def q_index(self, i: int) -> int:
        return self.datum.d[i]

    def divided_power(self, i: int, c: int) -> HalfElement:
        """f_i^{(c)} = f_i^c / [c]_i!."""
        if c < 0:
            raise PreconditionError("negative divided power")
        if c == 0:
            return self.one()
        word = (i,) * c
        coeff = RatFunc(ONE, q_factorial(c, self.datum.d[i]))
        return HalfElement(self._word_weight(word), {word: coeff})

    def prefix_divided(self, x: HalfElement, i: int, c: int) -> HalfElement:
        """f_i^{(c)} * x without going through the generic product."""
        if c == 0:
            return x
        if x.is_zero:
            return self.zero()
        weight = tuple(n + (c if j == i else 0) for j, n in enumerate(x.weight))
        fact = RatFunc(ONE, q_factorial(c, self.datum.d[i]))
        head = (i,) * c
        raw = {head + w: coeff * fact for w, coeff in x.coords.items()}
        return self.element_from_words(weight, raw)

    def suffix_divided(self, x: HalfElement, i: int, c: int) -> HalfElement:
        """x * f_i^{(c)}."""
        if c == 0:
            return x
        if x.is_zero:
            return self.zero()
        weight = tuple(n + (c if j == i else 0) for j, n in enumerate(x.weight))
        fact = RatFunc(ONE, q_factorial(c, self.datum.d[i]))
        tail = (i,) * c
        raw = {w + tail: coeff * fact for w, coeff in x.coords.items()}
        return self.element_from_words(weight, raw)

    def divided_monomial(self, spec) -> HalfElement:
        """Ordered product of divided powers f_{i_1}^{(a_1)} f_{i_2}^{(a_2)} ..."""
        out = self.one()
        for i, a in reversed(list(spec)):
            out = self.prefix_divided(out, i, a)
        return out

    # -- Kashiwara operators ---------------------------------------------------

    def kashiwara_decompose(self, x: HalfElement, i: int) -> list:
        """Write x = sum_c f_i^{(c)} x_c with x_c in ker(ir_i); list of (c, x_c).

        Peels from the top f_i-degree down, using ir_i(f_i^{(c)}) =
        q_i^{-(c-1)} f_i^{(c-1)} to normalize each layer.
        """
        d_i = self.datum.d[i]
        parts = []
        cur = x
        prev_n = None
        while not cur.is_zero:
            chain = [cur]
            while True:
                nxt = self.ir(chain[-1], i)
                if nxt.is_zero:
                    break
                chain.append(nxt)
            n = len(chain) - 1
            if prev_n is not None and n >= prev_n:
                raise ArithmeticError("Kashiwara peeling failed to make progress")
            prev_n = n
            if n == 0:
                parts.append((0, cur))
                break
            top = chain[n].scale_laurent(LaurentInt.monomial(1, d_i * n * (n - 1) // 2))
            if not self.ir(top, i).is_zero:
                raise ArithmeticError("peeled component not in the derivation kernel")
            parts.append((n, top))
            cur = cur - self.prefix_divided(top, i, n)
        parts.sort(key=lambda t: t[0])
        return parts

    def kashiwara_e(self, x: HalfElement, i: int) -> HalfElement:
        out = self.zero()
        for c, xc in self.kashiwara_decompose(x, i):
            if c >= 1:
                out = out + self.prefix_divided(xc, i, c - 1)
        return out

    def kashiwara_f(self, x: HalfElement, i: int) -> HalfElement:
        out = self.zero()
        for c, xc in self.kashiwara_decompose(x, i):
            out = out + self.prefix_divided(xc, i, c + 1)
        return out

    # -- integral forms -----------------------------------------------------------

    def divided_monomials_at(self, weight) -> list:
        """All products of divided powers of the given weight (adjacent indices distinct)."""
        cached = self._divmono_cache.get(weight)
        if cached is not None:
            return cached
        rank = self.datum.rank
        specs = []

        def rec(remaining, last, prefix):
            if all(x == 0 for x in remaining):
                specs.append(tuple(prefix))
                return
            for i in range(rank):
                if i != last and remaining[i]:
                    for a in range(remaining[i], 0, -1):
                        rem = list(remaining)
                        rem[i] -= a
                        rec(rem, i, prefix + [(i, a)])

        rec(list(weight), None, [])
        out = [self.divided_monomial(s) for s in specs]
        self._divmono_cache[weight] = out
        return out

    def dual_integral_diagnosis(self, x: HalfElement):
        """None if x is in the dual integral form; otherwise 'rational' when the
        only failures are non-integer rational constants, else 'laurent'."""
        verdict = None
        for m in self.divided_monomials_at(x.weight):
            v = self.pair(x, m)
            if v.den == ONE:
                continue
            if v.den.degree() == 0 and v.den.valuation() == 0:
                verdict = verdict or "rational"
            else:
                return "laurent"
        return verdict

    def in_dual_integral_form(self, x: HalfElement) -> bool:
        """True iff x pairs into Z[q^{+-1}] against every divided monomial of its weight."""
        return self.dual_integral_diagnosis(x) is None

    # -- q-Serre certificate --------------------------------------------------------

    def serre_word_coeffs(self, i: int, j: int) -> dict:
        """Raw word coefficients of sum_k (-1)^k f_i^{(1-a_ij-k)} f_j f_i^{(k)}."""
        if i == j:
            raise PreconditionError("q-Serre element needs two distinct indices")
        n = 1 - self.datum.gcm[i][j]
        d_i = self.datum.d[i]
        out = {}
        for k in range(n + 1):
            word = (i,) * (n - k) + (j,) + (i,) * k
            denom = q_factorial(n - k, d_i) * q_factorial(k, d_i)
            coeff = RatFunc(ONE if k % 2 == 0 else ONE.scale(-1), denom)
            out[word] = coeff
        return out

    def serre_pairs_to_zero(self, i: int, j: int) -> bool:
        """Certify that the q-Serre element lies in the radical of the form."""
        coeffs = self.serre_word_coeffs(i, j)
        weight = self._word_weight(next(iter(coeffs)))
        for w in words_of_weight(weight):
            acc = RF_ZERO
            for word, c in coeffs.items():
                g = self.pair_words(word, w)
                if not g.is_zero:
                    acc = acc + c.scale_laurent(g)
            if not acc.is_zero:
                return False
        return True

    # -- serialization -----------------------------------------------------------

    def word_string(self, word: Word) -> str:
        labels = self.datum.labels
        if all(len(s) == 1 for s in labels):
            return "".join(labels[i] for i in word)
        return ",".join(labels[i] for i in word)

    def element_to_json(self, x: HalfElement) -> dict:
        return {"weight": list(x.weight),
                "coords": {self.word_string(w): c.to_json()
                           for w, c in sorted(x.coords.items())}}

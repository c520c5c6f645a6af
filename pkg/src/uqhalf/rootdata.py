"""Symmetrizable Cartan data, reduced words, and root combinatorics.

Weights of the negative half are elements of -Q_+ and are stored by their
nonnegative coordinate tuples on the simple roots; all coroot pairings against
such weights are taken literally with that sign convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class RootDatumError(ValueError):
    """Invalid generalized Cartan matrix or symmetrizer data."""


class NonReducedWordError(ValueError):
    """A word in the index set failed the reducedness check."""

    def __init__(self, position: int, message: str | None = None):
        self.position = position
        super().__init__(message or f"non-reduced word at position {position}")


Weight = tuple  # nonnegative coordinates n with actual weight -sum(n_i alpha_i)


def height(weight: Weight) -> int:
    return sum(weight)


def weight_add(a: Weight, b: Weight) -> Weight:
    return tuple(x + y for x, y in zip(a, b))


def weight_sub(a: Weight, b: Weight) -> Weight:
    out = tuple(x - y for x, y in zip(a, b))
    if any(x < 0 for x in out):
        raise ValueError(f"weight difference {a} - {b} leaves Q_-")
    return out


@dataclass(frozen=True)
class RootDatum:
    """A symmetrizable generalized Cartan matrix with chosen symmetrizers."""

    gcm: tuple
    d: tuple
    labels: tuple
    name: str = ""

    @property
    def rank(self) -> int:
        return len(self.gcm)

    def pairing(self, i: int, j: int) -> int:
        """(alpha_i, alpha_j) = d_i * a_ij."""
        return self.d[i] * self.gcm[i][j]

    def coroot_on_vector(self, i: int, vec) -> int:
        """<h_i, sum_j v_j alpha_j>."""
        return sum(self.gcm[i][j] * v for j, v in enumerate(vec))

    def reflect(self, i: int, vec) -> tuple:
        """s_i acting on alpha-coordinates of a root-lattice vector."""
        c = self.coroot_on_vector(i, vec)
        out = list(vec)
        out[i] -= c
        return tuple(out)

    def coroot_on_weight(self, i: int, weight: Weight) -> int:
        """<h_i, wt> for wt = -sum n_j alpha_j stored by its coordinates n."""
        return -sum(self.gcm[i][j] * n for j, n in enumerate(weight))

    def form_on_weight(self, i: int, weight: Weight) -> int:
        """(wt, alpha_i) for wt in Q_- stored by its positive coordinates."""
        return -sum(self.pairing(j, i) * n for j, n in enumerate(weight))

    def zero_weight(self) -> Weight:
        return (0,) * self.rank

    def label_of(self, i: int) -> str:
        return self.labels[i]

    def index_of_label(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise RootDatumError(f"unknown index label {label!r}") from None

    def __str__(self) -> str:
        return self.name or f"GCM{self.gcm}"


def build_root_datum(gcm, d=None, labels=None, name: str = "") -> RootDatum:
    """Validate a GCM with symmetrizers and return the datum.

    Raises RootDatumError naming the first offending entry.
    """
    n = len(gcm)
    rows = []
    for i, row in enumerate(gcm):
        if len(row) != n:
            raise RootDatumError(f"row {i} has length {len(row)}, expected {n}")
        rows.append(tuple(int(x) for x in row))
    gcm = tuple(rows)
    for i in range(n):
        if gcm[i][i] != 2:
            raise RootDatumError(f"a[{i}][{i}] = {gcm[i][i]}, diagonal entries must be 2")
        for j in range(n):
            if i != j:
                if gcm[i][j] > 0:
                    raise RootDatumError(f"a[{i}][{j}] = {gcm[i][j]} must be <= 0")
                if (gcm[i][j] == 0) != (gcm[j][i] == 0):
                    raise RootDatumError(f"a[{i}][{j}] and a[{j}][{i}] must vanish together")
    if d is None:
        d = _find_symmetrizers(gcm)
    d = tuple(int(x) for x in d)
    if len(d) != n or any(x <= 0 for x in d):
        raise RootDatumError("symmetrizers must be positive integers, one per index")
    for i in range(n):
        for j in range(n):
            if d[i] * gcm[i][j] != d[j] * gcm[j][i]:
                raise RootDatumError(
                    f"not symmetrizable at ({i},{j}): d[{i}]*a[{i}][{j}] = {d[i]*gcm[i][j]} "
                    f"!= d[{j}]*a[{j}][{i}] = {d[j]*gcm[j][i]}")
    if labels is None:
        labels = tuple(str(i + 1) for i in range(n))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise RootDatumError("labels must be distinct, one per index")
    return RootDatum(gcm=gcm, d=d, labels=labels, name=name)


def _find_symmetrizers(gcm) -> tuple:
    """Minimal positive symmetrizers, found by propagating ratios across edges."""
    n = len(gcm)
    ratio = [None] * n  # d_i as Fraction relative to component root
    for start in range(n):
        if ratio[start] is not None:
            continue
        ratio[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i != j and gcm[i][j] != 0:
                    want = ratio[i] * Fraction(gcm[i][j], gcm[j][i])
                    if ratio[j] is None:
                        ratio[j] = want
                        stack.append(j)
                    elif ratio[j] != want:
                        raise RootDatumError(f"not symmetrizable around indices {i},{j}")
    lcm_den = 1
    for r in ratio:
        lcm_den = lcm_den * r.denominator // gcd(lcm_den, r.denominator)
    d = [int(r * lcm_den) for r in ratio]
    g = 0
    for x in d:
        g = gcd(g, x)
    return tuple(x // g for x in d)


_NAMED = {
    "A1": ([[2]], [1], ["1"]),
    "A2": ([[2, -1], [-1, 2]], [1, 1], ["1", "2"]),
    "B2": ([[2, -1], [-2, 2]], [2, 1], ["1", "2"]),
    "G2": ([[2, -1], [-3, 2]], [3, 1], ["1", "2"]),
    "A3": ([[2, -1, 0], [-1, 2, -1], [0, -1, 2]], [1, 1, 1], ["1", "2", "3"]),
    "A1(1)": ([[2, -2], [-2, 2]], [1, 1], ["0", "1"]),
}

_ALIASES = {
    "A1^(1)": "A1(1)", "A1~": "A1(1)", "A1AFF": "A1(1)", "AFFINE_A1": "A1(1)",
}


def named_root_datum(name: str) -> RootDatum:
    key = name.strip().upper().replace(" ", "")
    key = _ALIASES.get(key, key)
    if key not in _NAMED:
        raise RootDatumError(f"unknown type name {name!r}; known: {sorted(_NAMED)}")
    gcm, d, labels = _NAMED[key]
    return build_root_datum(gcm, d, labels, name=key)


def load_gcm_config(path) -> RootDatum:
    """Read a datum from a JSON file {"gcm": [[...]], "d": [...], "labels": [...]}."""
    with open(path) as fh:
        data = json.load(fh)
    if "gcm" not in data:
        raise RootDatumError(f"config {path} missing 'gcm'")
    return build_root_datum(data["gcm"], data.get("d"), data.get("labels"),
                            name=data.get("name", ""))


# -- reduced words ------------------------------------------------------------


@dataclass(frozen=True)
class ReducedWord:
    """A reduced word with its sequence of roots beta_k = s_{i_1}...s_{i_{k-1}}(alpha_{i_k})."""

    datum: RootDatum
    letters: tuple
    roots: tuple

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return ",".join(self.datum.labels[i] for i in self.letters)


def word_roots(datum: RootDatum, letters) -> ReducedWord:
    """Compute the roots along a word, rejecting non-reduced words.

    The word is reduced iff every beta_k is positive, which with the
    successive-reflection construction is equivalent to all beta_k being
    distinct positive vectors; failure is reported at the first bad position.
    """
    letters = tuple(int(i) for i in letters)
    if not letters:
        raise NonReducedWordError(0, "empty word")
    for pos, i in enumerate(letters):
        if not 0 <= i < datum.rank:
            raise RootDatumError(f"letter {i} at position {pos + 1} outside the index set")
    roots = []
    seen = set()
    for k, i in enumerate(letters):
        beta = tuple(1 if j == i else 0 for j in range(datum.rank))
        for m in range(k - 1, -1, -1):
            beta = datum.reflect(letters[m], beta)
        if any(x < 0 for x in beta) or beta in seen:
            raise NonReducedWordError(k + 1)
        seen.add(beta)
        roots.append(beta)
    return ReducedWord(datum=datum, letters=letters, roots=tuple(roots))


def is_reduced(datum: RootDatum, letters) -> bool:
    try:
        word_roots(datum, letters)
        return True
    except NonReducedWordError:
        return False


def xi(c, word: ReducedWord) -> Weight:
    """The weight -sum_k c_k beta_k, returned by its positive coordinates."""
    if len(c) != len(word.letters):
        raise ValueError(f"tuple length {len(c)} != word length {len(word.letters)}")
    out = [0] * word.datum.rank
    for ck, beta in zip(c, word.roots):
        if ck < 0:
            raise ValueError("exponent tuples are nonnegative")
        for j, b in enumerate(beta):
            out[j] += ck * b
    return tuple(out)


def lex_compare(c1, c2) -> int:
    """Left lexicographic comparison; -1, 0, or +1."""
    if len(c1) != len(c2):
        raise ValueError("length mismatch in lexicographic comparison")
    for a, b in zip(c1, c2):
        if a != b:
            return -1 if a < b else 1
    return 0


def exponent_tuples(word: ReducedWord, weight: Weight):
    """All c >= 0 with xi(c, word) == weight, in descending lexicographic order."""
    betas = word.roots
    rank = len(weight)
    out = []

    def rec(k, remaining, prefix):
        if k == len(betas):
            if all(x == 0 for x in remaining):
                out.append(tuple(prefix))
            return
        beta = betas[k]
        top = min((remaining[j] // beta[j]) for j in range(rank) if beta[j])
        for ck in range(top, -1, -1):
            rec(k + 1, tuple(remaining[j] - ck * beta[j] for j in range(rank)),
                prefix + [ck])

    rec(0, weight, [])
    return out


# -- root multiplicities and weight-space dimensions -------------------------

_mult_cache: dict = {}
_dim_cache: dict = {}


def root_multiplicities(datum: RootDatum, max_height: int) -> dict:
    """Multiplicities of positive roots up to the given height (Peterson recurrence)."""
    cached = _mult_cache.get(datum)
    if cached and cached[0] >= max_height:
        return {v: m for v, m in cached[1].items() if height(v) <= max_height}
    rank = datum.rank
    c: dict = {}
    mult: dict = {}
    vecs_by_height = [[] for _ in range(max_height + 1)]
    for vec in _box_vectors(rank, max_height):
        h = sum(vec)
        if 1 <= h <= max_height:
            vecs_by_height[h].append(vec)

    def form(u, v):
        return sum(datum.pairing(i, j) * u[i] * v[j]
                   for i in range(rank) for j in range(rank)
                   if u[i] and v[j])

    for h in range(1, max_height + 1):
        for lam in vecs_by_height[h]:
            if h == 1:
                mult[lam] = 1
                c[lam] = Fraction(1)
                continue
            denom = form(lam, lam) - sum(2 * datum.d[i] * lam[i] for i in range(rank))
            rhs = Fraction(0)
            for mu in _proper_subvectors(lam):
                nu = tuple(a - b for a, b in zip(lam, mu))
                cmu = c.get(mu)
                cnu = c.get(nu)
                if cmu and cnu:
                    rhs += form(mu, nu) * cmu * cnu
            corr = Fraction(0)
            for k in range(2, h + 1):
                if all(x % k == 0 for x in lam):
                    sub = tuple(x // k for x in lam)
                    corr += Fraction(mult.get(sub, 0), k)
            if denom == 0:
                # (lam, lam - 2 rho) = 0 forces lam off the root system
                # (roots have negative pairing there unless simple), so the
                # recurrence degenerates to 0 = 0 and mult(lam) = 0.
                if rhs != 0:
                    raise RootDatumError(f"Peterson recurrence degenerate at {lam}")
                c[lam] = corr
                continue
            c_lam = rhs / denom
            m = c_lam - corr
            if m.denominator != 1 or m < 0:
                raise RootDatumError(f"non-integral root multiplicity {m} at {lam}")
            if m:
                mult[lam] = int(m)
            c[lam] = c_lam
    _mult_cache[datum] = (max_height, mult)
    return dict(mult)


def _box_vectors(rank: int, max_height: int):
    """All nonzero vectors in Z_{>=0}^rank of height <= max_height, by height."""
    def rec(i, left, prefix):
        if i == rank - 1:
            for x in range(left + 1):
                yield tuple(prefix + [x])
            return
        for x in range(left + 1):
            yield from rec(i + 1, left - x, prefix + [x])
    for vec in rec(0, max_height, []):
        if any(vec):
            yield vec


def _proper_subvectors(lam):
    """Nonzero mu with 0 < mu < lam coordinatewise-compatible (mu != lam)."""
    rank = len(lam)

    def rec(i, prefix, is_zero, is_full):
        if i == rank:
            if not is_zero and not is_full:
                yield tuple(prefix)
            return
        for x in range(lam[i] + 1):
            yield from rec(i + 1, prefix + [x], is_zero and x == 0,
                           is_full and x == lam[i])
    yield from rec(0, [], True, True)


def weight_dim(datum: RootDatum, weight: Weight) -> int:
    """dim of the weight space of the negative half at -sum n_i alpha_i.

    Kostant partition count: partitions of the weight into positive roots
    counted with multiplicity.
    """
    key = (datum, weight)
    if key in _dim_cache:
        return _dim_cache[key]
    h = height(weight)
    if h == 0:
        return 1
    mult = root_multiplicities(datum, h)
    roots = sorted((v, m) for v, m in mult.items() if all(a <= b for a, b in zip(v, weight)))
    table = {datum.zero_weight(): 1}
    box = list(_box_vectors(datum.rank, h))
    box = [v for v in box if all(a <= b for a, b in zip(v, weight))]
    box.sort(key=lambda v: (sum(v), v))
    for vec, m in roots:
        for _ in range(m):
            for target in box:
                if all(a <= b for a, b in zip(vec, target)):
                    prev = tuple(a - b for a, b in zip(target, vec))
                    if prev in table:
                        table[target] = table.get(target, 0) + table[prev]
    out = table.get(weight, 0)
    _dim_cache[key] = out
    return out


def weights_up_to_height(datum: RootDatum, max_height: int):
    """All weights (coordinate tuples) of height 1..max_height, sorted by (height, coords)."""
    out = [v for v in _box_vectors(datum.rank, max_height)]
    out.sort(key=lambda v: (sum(v), v))
    return out


# -- finite-type helpers ------------------------------------------------------

_ROOTSYS_BOUND = 400


def positive_roots_if_finite(datum: RootDatum):
    """The positive roots if the root system is finite, else None.

    Closure of the simple roots under the simple reflections, with a size
    cutoff that the built-in finite types stay far below.
    """
    roots = {tuple(1 if j == i else 0 for j in range(datum.rank)) for i in range(datum.rank)}
    frontier = set(roots)
    while frontier:
        new = set()
        for beta in frontier:
            for i in range(datum.rank):
                img = datum.reflect(i, beta)
                if all(x >= 0 for x in img) and img not in roots:
                    new.add(img)
        roots |= new
        frontier = new
        if len(roots) > _ROOTSYS_BOUND:
            return None
    return sorted(roots, key=lambda v: (sum(v), v))


def is_finite_type(datum: RootDatum) -> bool:
    return positive_roots_if_finite(datum) is not None


def longest_word(datum: RootDatum) -> tuple:
    """The lexicographically first reduced word of the longest element (finite type)."""
    roots = positive_roots_if_finite(datum)
    if roots is None:
        raise RootDatumError(f"{datum} is not of finite type; no longest element")
    word: list = []
    target = len(roots)
    while len(word) < target:
        for i in range(datum.rank):
            if is_reduced(datum, word + [i]):
                word.append(i)
                break
        else:
            raise RootDatumError("failed to extend to the longest element")
    return tuple(word)


def longest_element_words(datum: RootDatum):
    """All reduced words of the longest element, in lexicographic order."""
    roots = positive_roots_if_finite(datum)
    if roots is None:
        raise RootDatumError(f"{datum} is not of finite type")
    target = len(roots)
    out = []

    def rec(prefix):
        if len(prefix) == target:
            out.append(tuple(prefix))
            return
        for i in range(datum.rank):
            if is_reduced(datum, prefix + [i]):
                prefix.append(i)
                rec(prefix)
                prefix.pop()

    rec([])
    return out

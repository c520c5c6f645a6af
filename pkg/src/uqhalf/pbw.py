"""PBW bases along reduced words, Lusztig data, and the factorization maps.

Root vectors are produced by the braid action on dual-canonical coordinates,
dual PBW monomials divide by their computed self-pairings, and crystal labels
are residues in the canonical tables.

The factorization bookkeeping (Lusztig data, cofinite vertex sets, the tau
maps and the nabla labels) is computed weight by weight from the expansions
of dual-PBW-times-cofinite products in the dual canonical basis: the unique
unit constant term in such an expansion names the product's vertex.  This
stays inside the swept weights, unlike the literal Saito-reflection chains,
which climb to reflected weights; the chain forms are kept alongside and the
two are cross-checked on small instances in the test suite.
"""

from __future__ import annotations

from .canbasis import BasisCache, CrystalVertex, TableError
from .halfalg import HalfElement, PreconditionError
from .rootdata import (ReducedWord, exponent_tuples, height, lex_compare,
                       weight_sub, word_roots, xi)
from .scalars import RF_ONE, RF_ZERO, RatFunc, zero_regularity


class PbwContext:
    """PBW data for one reduced word and sign: root vectors, norms, labels."""

    def __init__(self, cache: BasisCache, letters, epsilon: int = 1):
        if epsilon not in (1, -1):
            raise PreconditionError("epsilon must be +1 or -1")
        self.cache = cache
        self.alg = cache.alg
        self.datum = cache.datum
        self.word = word_roots(cache.datum, letters)
        self.epsilon = epsilon
        self._root_vectors: dict = {}
        self._monomials: dict = {}
        self._norms: dict = {}
        self._labels: dict = {}
        self._factorization: dict = {}

    @property
    def length(self) -> int:
        return len(self.word.letters)

    # -- root vectors -------------------------------------------------------

    def root_vector(self, k: int, power: int = 1) -> HalfElement:
        """f_eps(beta_k)^{(power)} = braid chain applied to a divided power.

        The chain starts at the deepest stage where the partial root
        s_{i_t}...s_{i_{k-1}}(alpha_{i_k}) is simple: there the operator chain
        fixes a Chevalley divided power exactly, so those steps are skipped.
        The minus-sign vectors are the star conjugates of the plus-sign ones.
        """
        if not 1 <= k <= self.length:
            raise PreconditionError(f"root index {k} outside 1..{self.length}")
        key = (k, power)
        hit = self._root_vectors.get(key)
        if hit is not None:
            return hit
        letters = self.word.letters
        rank = self.datum.rank
        gammas = [None] * (k + 1)  # gammas[t] = s_{i_t}...s_{i_{k-1}}(alpha_{i_k})
        gammas[k] = tuple(1 if j == letters[k - 1] else 0 for j in range(rank))
        for t in range(k - 1, 0, -1):
            gammas[t] = self.datum.reflect(letters[t - 1], gammas[t + 1])
        start = k
        for t in range(1, k + 1):
            if sum(gammas[t]) == 1:
                start = t
                break
        x = self.alg.divided_power(gammas[start].index(1), power)
        for j in range(start - 2, -1, -1):
            x = self.cache.braid_apply(x, letters[j], "plus")
        if self.epsilon == -1:
            x = self.alg.star(x)
        expected = tuple(power * c for c in self.word.roots[k - 1])
        if x.weight != expected and not x.is_zero:
            raise TableError(f"root vector {k} landed at {x.weight}, expected {expected}")
        self._root_vectors[key] = x
        return x

    # -- monomials -----------------------------------------------------------

    def pbw_monomial(self, c) -> HalfElement:
        """Ordered product of divided root-vector powers (reversed for eps = -1)."""
        c = tuple(c)
        if len(c) != self.length:
            raise PreconditionError("exponent tuple length mismatch")
        hit = self._monomials.get(c)
        if hit is not None:
            return hit
        out = self.alg.one()
        ks = range(1, self.length + 1) if self.epsilon == 1 else range(self.length, 0, -1)
        for k in ks:
            if c[k - 1]:
                out = self.alg.multiply(out, self.root_vector(k, c[k - 1]))
        self._monomials[c] = out
        return out

    def norm(self, c) -> RatFunc:
        c = tuple(c)
        hit = self._norms.get(c)
        if hit is None:
            m = self.pbw_monomial(c)
            hit = self.alg.pair(m, m)
            self._norms[c] = hit
        return hit

    def dual_pbw_monomial(self, c) -> HalfElement:
        return self.pbw_monomial(c).scale(RF_ONE / self.norm(c))

    # -- crystal labels ----------------------------------------------------------

    def pbw_crystal_label(self, c) -> CrystalVertex:
        """The crystal vertex of a PBW monomial: its residue in the canonical table."""
        c = tuple(c)
        hit = self._labels.get(c)
        if hit is not None:
            return hit
        weight = xi(c, self.word)
        table = self.cache.table(weight)
        ws = self.alg.weight_space(weight)
        res = table.residue(self.pbw_monomial(c), ws.pivots)
        if res is None:
            raise TableError(f"PBW monomial {c} not in the crystal lattice")
        support = [b for b, v in enumerate(res) if v]
        if len(support) != 1 or res[support[0]] != 1:
            raise TableError(f"PBW monomial {c} has residue {res}, not a single vertex")
        vertex = table.vertices[support[0]]
        self._labels[c] = vertex
        return vertex

    # -- factorization labels per weight --------------------------------------------

    def factorization(self, weight) -> dict:
        """Labels at one weight: vertex index -> (c, cofinite vertex) and the
        cofinite list; everything the tau maps and Lusztig data need.

        Recursive by height: products of a dual PBW monomial with a cofinite
        dual-canonical element expand with a single unit constant coefficient,
        sitting exactly at the vertex with that Lusztig datum and cofinite part.
        """
        hit = self._factorization.get(weight)
        if hit is not None:
            return hit
        table = self.cache.table(weight)
        labels: dict = {}
        rank = self.datum.rank
        for sub in _subweights(weight):
            if not any(sub):
                continue
            for c in exponent_tuples(self.word, sub):
                mu = weight_sub(weight, sub)
                mono = self.dual_pbw_monomial(c)
                for b2 in self.factorization(mu)["cofinite"] if any(mu) else [0]:
                    up2 = self.cache.table(mu).up[b2]
                    if self.epsilon == 1:
                        prod = self.alg.multiply(mono, up2)
                    else:
                        prod = self.alg.multiply(up2, mono)
                    coeffs = self.cache.expand_up(prod)
                    lead = None
                    for b, t in coeffs.items():
                        lt = t.as_laurent()
                        if not lt.in_q_zq():
                            if lead is not None:
                                raise TableError(
                                    f"two leading terms in labeling product at {weight}")
                            if lt != RF_ONE.num:
                                raise TableError(
                                    f"leading coefficient {t} != 1 in labeling at {weight}")
                            lead = b
                    if lead is None:
                        raise TableError(f"no leading term in labeling product at {weight}")
                    if lead in labels:
                        raise TableError(f"vertex {lead} at {weight} labeled twice")
                    labels[lead] = (c, (mu, b2))
        cofinite = [b for b in range(table.dim) if b not in labels]
        i1 = self.word.letters[0]
        for b in cofinite:
            v = table.vertices[b]
            ok = v.eps[i1] == 0 if self.epsilon == 1 else v.eps_star[i1] == 0
            if not ok:
                raise TableError(
                    f"cofinite vertex {v} fails the first-letter kernel condition")
        out = {"labels": labels, "cofinite": cofinite}
        self._factorization[weight] = out
        return out

    # -- Lusztig data and the tau maps -------------------------------------------------

    def lusztig_datum(self, b: CrystalVertex):
        """The length-l exponent tuple L_eps(b, word), from the labeling."""
        fac = self.factorization(b.weight)
        hit = fac["labels"].get(b.index)
        return hit[0] if hit else (0,) * self.length

    def lusztig_datum_chain(self, b: CrystalVertex):
        """L_eps by its definition: epsilon readings along hatted Saito reflections.

        Climbs to reflected weights; use on small instances only.
        """
        out = []
        for i in self.word.letters:
            if self.epsilon == 1:
                out.append(b.eps[i])
                b = self.cache.saito(b, i, "sigma_hat_star")
            else:
                out.append(b.eps_star[i])
                b = self.cache.saito(b, i, "sigma_hat")
        return tuple(out)

    def cofinite_vertices(self, weight) -> list:
        """Vertices at the weight with zero Lusztig datum (basis of the cofinite part)."""
        table = self.cache.table(weight)
        return [table.vertices[b] for b in self.factorization(weight)["cofinite"]]

    def in_cofinite(self, b: CrystalVertex) -> bool:
        return b.index in self.factorization(b.weight)["cofinite"]

    def cofinite_chain_check(self, b: CrystalVertex) -> bool:
        """Iterated inverse-braid/kernel membership along the word (climbs)."""
        x = self.cache.table(b.weight).up[b.index]
        for i in self.word.letters:
            if self.epsilon == 1:
                if not self.alg.ir(x, i).is_zero:
                    return False
                x = self.cache.braid_apply(x, i, "minus")
            else:
                if not self.alg.ri(x, i).is_zero:
                    return False
                x = self.cache.braid_apply(x, i, "plus")
        return True

    def tau_le(self, b: CrystalVertex) -> CrystalVertex:
        return self.pbw_crystal_label(self.lusztig_datum(b))

    def tau_gt(self, b: CrystalVertex) -> CrystalVertex:
        fac = self.factorization(b.weight)
        hit = fac["labels"].get(b.index)
        if hit is None:
            return b
        mu, b2 = hit[1]
        return self.cache.table(mu).vertices[b2]

    def tau_gt_chain(self, b: CrystalVertex) -> CrystalVertex:
        """sigma_{i_1}..sigma_{i_l} sigma-hat*_{i_l}..sigma-hat*_{i_1} (b), climbing."""
        letters = self.word.letters
        first, second = ("sigma_hat_star", "sigma") if self.epsilon == 1 \
            else ("sigma_hat", "sigma_star")
        for i in letters:
            b = self.cache.saito(b, i, first)
        for i in reversed(letters):
            b = self.cache.saito(b, i, second)
        return b

    def omega(self, b: CrystalVertex):
        return self.tau_le(b), self.tau_gt(b)

    def nabla(self, b: CrystalVertex, c) -> CrystalVertex:
        """The vertex with Lusztig datum c and cofinite part b (b cofinite)."""
        c = tuple(c)
        if not self.in_cofinite(b):
            raise PreconditionError("nabla needs a cofinite vertex")
        target = tuple(x + y for x, y in zip(xi(c, self.word), b.weight))
        fac = self.factorization(target)
        if not any(c):
            return self.cache.table(target).vertices[b.index] if target == b.weight else None
        for idx, (cc, (mu, b2)) in fac["labels"].items():
            if cc == c and (mu, b2) == (b.weight, b.index):
                return self.cache.table(target).vertices[idx]
        raise TableError(f"no vertex with label ({c}, {b})")

    def nabla_chain(self, b: CrystalVertex, c) -> CrystalVertex:
        """The defining operator chain for nabla (climbs to reflected weights)."""
        letters = self.word.letters
        if self.epsilon == 1:
            for i in reversed(letters):
                b = self.cache.saito(b, i, "sigma_star")
            for k in range(self.length - 1, -1, -1):
                b = self.cache.saito(b, letters[k], "sigma")
                b = self.cache.crystal_string(b, letters[k], "f", c[k])
        else:
            for i in reversed(letters):
                b = self.cache.saito(b, i, "sigma")
            for k in range(self.length - 1, -1, -1):
                b = self.cache.saito(b, letters[k], "sigma_star")
                b = self.cache.crystal_string(b, letters[k], "f_star", c[k])
        return b

    # -- transition to the dual canonical basis ----------------------------------------

    def transition_matrix(self, weight):
        """Rows: dual PBW monomials at the weight in descending lexicographic
        order; columns: their crystal labels.  Returns (cs, matrix, failures);
        triangularity violations are reported, not raised."""
        cs = exponent_tuples(self.word, weight)
        if not cs:
            return [], [], []
        label_of = {c: self.pbw_crystal_label(c).index for c in cs}
        if len(set(label_of.values())) != len(cs):
            raise TableError(f"PBW labels not distinct at {weight}")
        col_of = {label_of[c]: j for j, c in enumerate(cs)}
        failures = []
        matrix = []
        for r, c in enumerate(cs):
            coeffs = self.cache.expand_up(self.dual_pbw_monomial(c))
            row = [RF_ZERO] * len(cs)
            for b, t in coeffs.items():
                j = col_of.get(b)
                if j is None:
                    failures.append((c, b, str(t), "support outside PBW labels"))
                    continue
                row[j] = t
                if j == r:
                    if not t.is_one:
                        failures.append((c, b, str(t), "diagonal coefficient not 1"))
                elif j < r:
                    failures.append((c, cs[j], str(t), "support above the diagonal"))
                else:
                    lt = t.as_laurent() if t.is_laurent() else None
                    if lt is None or not lt.in_q_zq():
                        failures.append((c, cs[j], str(t), "off-diagonal not in qZ[q]"))
            matrix.append(row)
        return cs, matrix, failures


def _subweights(weight):
    """All coordinatewise subweights of the weight (including 0 and itself)."""
    rank = len(weight)

    def rec(i, prefix):
        if i == rank:
            yield tuple(prefix)
            return
        for x in range(weight[i] + 1):
            yield from rec(i + 1, prefix + [x])

    yield from rec(0, [])


# -- the pbw_solve strategy for canonical tables --------------------------------------


def canonical_table_pbw(cache: BasisCache, weight):
    """Canonical table at one weight from a longest-word PBW basis.

    Bar-invariance is solved on the PBW monomials through the classical
    triangular correction; crystal data then comes from Kashiwara raisings
    into the already-built lower tables.  Finite type only.
    """
    from .rootdata import longest_word
    from .scalars import symmetrize_residual

    alg = cache.alg
    datum = cache.datum
    ws = alg.weight_space(weight)
    if height(weight) == 0:
        return cache.table(weight)
    ctx = PbwContext(cache, longest_word(datum), 1)
    cs = exponent_tuples(ctx.word, weight)
    if len(cs) != ws.dim:
        raise TableError(f"PBW count {len(cs)} != dim {ws.dim} at {weight}")
    monos = [ctx.pbw_monomial(c) for c in cs]
    from ._linalg import rf_solve
    amat = [[monos[k].coords.get(p, RF_ZERO) for k in range(ws.dim)] for p in ws.pivots]
    bar_cols = [[monos[k].coords.get(p, RF_ZERO).bar() for p in ws.pivots]
                for k in range(ws.dim)]
    bmat_cols = rf_solve(amat, bar_cols)  # bar(F_j) = sum_e B[e][j] F_e
    n = ws.dim
    bmat = [[bmat_cols[j][e] for j in range(n)] for e in range(n)]
    for e in range(n):
        if not bmat[e][e].is_one:
            raise TableError(f"bar matrix diagonal not 1 at {weight}")
        for j in range(e):
            if not bmat[e][j].is_zero:
                raise TableError(f"bar matrix not triangular at {weight}: ({e},{j})")
    kappa = [[RF_ZERO] * n for _ in range(n)]
    for j in range(n):
        kappa[j][j] = RF_ONE
        for e in range(j - 1, -1, -1):
            r = bmat[e][j]
            for i in range(e + 1, j):
                if not bmat[e][i].is_zero and not kappa[i][j].is_zero:
                    r = r + bmat[e][i] * kappa[i][j].bar()
            rl = r.as_laurent()
            if rl.bar() != -rl:
                raise TableError(f"bar solve residual not antisymmetric at {weight}")
            kappa[e][j] = RatFunc.from_laurent(rl.positive_part())
            if symmetrize_residual(kappa[e][j].num) != RF_ZERO.num:
                raise TableError("bar solve produced a coefficient outside qZ[q]")
    low = []
    for j in range(n):
        g = alg.zero(weight)
        for e in range(n):
            if not kappa[e][j].is_zero:
                g = g + monos[e].scale(kappa[e][j])
        if g.bar() != g:
            raise TableError(f"pbw_solve column {j} not bar invariant at {weight}")
        low.append(g)

    # crystal data from Kashiwara raisings into lower tables
    rank = datum.rank
    e_vecs = [tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)]
    eps = []
    parents = []
    for g in low:
        row = []
        par = []
        for i in range(rank):
            if weight[i] == 0:
                row.append(0)
                par.append(None)
                continue
            pw = weight_sub(weight, e_vecs[i])
            ptab = cache.table(pw)
            y = alg.kashiwara_e(g, i)
            res = ptab.residue(y, alg.weight_space(pw).pivots) if not y.is_zero \
                else tuple([0] * ptab.dim)
            if res is None:
                raise TableError("raising image left the lattice in pbw_solve")
            support = [b for b, v in enumerate(res) if v]
            if not support:
                row.append(0)
                par.append(None)
            elif len(support) == 1 and res[support[0]] == 1:
                row.append(1 + ptab.vertices[support[0]].eps[i])
                par.append(support[0])
            else:
                raise TableError(f"raising residue {res} not a vertex in pbw_solve")
        eps.append(tuple(row))
        parents.append(par)
    strings = []
    for b in range(n):
        i = next(j for j in range(rank) if eps[b][j] > 0)
        c = eps[b][i]
        idx = parents[b][i]
        for k in range(1, c):
            t = cache.table(weight_sub(weight, tuple(k * x for x in e_vecs[i])))
            idx = t.etab[i][idx]
        anc = cache.table(weight_sub(weight, tuple(c * x for x in e_vecs[i]))).vertices[idx]
        strings.append((i, c) + anc.string)
    perm = sorted(range(n), key=lambda b: strings[b])
    low = [low[old] for old in perm]
    eps = [eps[old] for old in perm]
    strings = [strings[old] for old in perm]
    return cache.finalize_table(weight, ws, low, eps, strings,
                                {i: {} for i in range(rank)})

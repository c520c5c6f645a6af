"""Exact scalar arithmetic: integer Laurent polynomials in q and their fractions.

Coefficients of the integral form live in Z[q, q^-1]; generic coefficients in
Q(q) are stored as reduced fractions of integer Laurent polynomials.  The bar
involution is q -> q^-1, and regularity at q = 0 is what singles out the
crystal-lattice subring.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd


class LaurentInt:
    """Integer Laurent polynomial in q, stored sparsely as {exponent: coefficient}.

    Instances are immutable by convention: no method mutates ``coeffs`` after
    construction, so values are safe to share, hash, and use as dict keys.
    """

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs=None):
        if coeffs:
            self.coeffs = {e: c for e, c in coeffs.items() if c}
        else:
            self.coeffs = {}
        self._hash = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(n: int) -> "LaurentInt":
        return LaurentInt({0: n}) if n else ZERO

    @staticmethod
    def monomial(coeff: int, exp: int) -> "LaurentInt":
        return LaurentInt({exp: coeff}) if coeff else ZERO

    # -- basic queries ------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, exp: int) -> int:
        return self.coeffs.get(exp, 0)

    def valuation(self) -> int:
        """Smallest exponent with nonzero coefficient (raises on zero)."""
        if not self.coeffs:
            raise ValueError("valuation of the zero polynomial")
        return min(self.coeffs)

    def degree(self) -> int:
        if not self.coeffs:
            raise ValueError("degree of the zero polynomial")
        return max(self.coeffs)

    def content(self) -> int:
        """Positive gcd of the coefficients (0 for the zero polynomial)."""
        g = 0
        for c in self.coeffs.values():
            g = int_gcd(g, c)
        return g

    def leading_coeff(self) -> int:
        return self.coeffs[self.degree()]

    def eval_at_one(self) -> int:
        return sum(self.coeffs.values())

    def eval_fraction(self, x: Fraction) -> Fraction:
        return sum((c * x**e for e, c in self.coeffs.items()), Fraction(0))

    def is_bar_symmetric(self) -> bool:
        return all(self.coeffs.get(-e, 0) == c for e, c in self.coeffs.items())

    def in_q_zq(self) -> bool:
        """True iff the polynomial lies in qZ[q] (all exponents >= 1)."""
        return all(e >= 1 for e in self.coeffs)

    def is_polynomial(self) -> bool:
        return all(e >= 0 for e in self.coeffs)

    def is_unit(self) -> bool:
        """True iff +-q^k for some k."""
        return len(self.coeffs) == 1 and abs(next(iter(self.coeffs.values()))) == 1

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "LaurentInt") -> "LaurentInt":
        if not self.coeffs:
            return other
        if not other.coeffs:
            return self
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            elif e in out:
                del out[e]
        r = LaurentInt.__new__(LaurentInt)
        r.coeffs = out
        r._hash = None
        return r

    def __neg__(self) -> "LaurentInt":
        r = LaurentInt.__new__(LaurentInt)
        r.coeffs = {e: -c for e, c in self.coeffs.items()}
        r._hash = None
        return r

    def __sub__(self, other: "LaurentInt") -> "LaurentInt":
        return self + (-other)

    def __mul__(self, other: "LaurentInt") -> "LaurentInt":
        if not self.coeffs or not other.coeffs:
            return ZERO
        a, b = self.coeffs, other.coeffs
        if len(a) > len(b):
            a, b = b, a
        out: dict[int, int] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = e1 + e2
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                elif e in out:
                    del out[e]
        r = LaurentInt.__new__(LaurentInt)
        r.coeffs = out
        r._hash = None
        return r

    def scale(self, n: int) -> "LaurentInt":
        if n == 0:
            return ZERO
        r = LaurentInt.__new__(LaurentInt)
        r.coeffs = {e: n * c for e, c in self.coeffs.items()}
        r._hash = None
        return r

    def shifted(self, k: int) -> "LaurentInt":
        """Multiply by q^k."""
        if k == 0:
            return self
        r = LaurentInt.__new__(LaurentInt)
        r.coeffs = {e + k: c for e, c in self.coeffs.items()}
        r._hash = None
        return r

    def __pow__(self, n: int) -> "LaurentInt":
        if n < 0:
            raise ValueError("negative power of a Laurent polynomial")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def bar(self) -> "LaurentInt":
        """q -> q^-1."""
        r = LaurentInt.__new__(LaurentInt)
        r.coeffs = {-e: c for e, c in self.coeffs.items()}
        r._hash = None
        return r

    def positive_part(self) -> "LaurentInt":
        """Sum of the terms with strictly positive exponent."""
        return LaurentInt({e: c for e, c in self.coeffs.items() if e > 0})

    # -- comparisons / hashing -----------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentInt) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.coeffs.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    # -- I/O ------------------------------------------------------------

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if e == 0:
                term = str(abs(c))
            else:
                qpow = "q" if e == 1 else f"q^{e}"
                term = qpow if abs(c) == 1 else f"{abs(c)}*{qpow}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(f"+ {term}" if c > 0 else f"- {term}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LaurentInt({self})"

    def to_json(self) -> dict:
        return {str(e): c for e, c in sorted(self.coeffs.items())}

    @staticmethod
    def from_json(data: dict) -> "LaurentInt":
        return LaurentInt({int(e): int(c) for e, c in data.items()})


ZERO = LaurentInt()
ONE = LaurentInt({0: 1})
Q = LaurentInt({1: 1})


def q_int(n: int, d: int = 1) -> LaurentInt:
    """The balanced q-integer [n] in q_i = q^d: q_i^{n-1} + q_i^{n-3} + ... + q_i^{1-n}."""
    if n < 0:
        return -q_int(-n, d)
    return LaurentInt({d * (n - 1 - 2 * k): 1 for k in range(n)})


def q_factorial(n: int, d: int = 1) -> LaurentInt:
    out = ONE
    for k in range(2, n + 1):
        out = out * q_int(k, d)
    return out


# -- division helpers in Z[q^{+-1}] -------------------------------------

def _dense_int(p: LaurentInt) -> tuple[int, list[int]]:
    """(valuation, integer coefficient list from valuation upward)."""
    v, d = p.valuation(), p.degree()
    return v, [p.coeffs.get(e, 0) for e in range(v, d + 1)]


def divexact(a: LaurentInt, b: LaurentInt) -> LaurentInt:
    """Exact division a / b in Z[q^{+-1}]; raises if not exact or not integral.

    Integer long division from the top: when the division is exact every
    partial quotient is an integer, so a non-dividing step means inexactness.
    """
    if b.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if a.is_zero:
        return ZERO
    if len(b.coeffs) == 1:
        vb = b.valuation()
        cb = b.coeffs[vb]
        out = {}
        for e, c in a.coeffs.items():
            if c % cb:
                raise ArithmeticError("non-integral Laurent quotient")
            out[e - vb] = c // cb
        return LaurentInt(out)
    va, ca = _dense_int(a)
    vb, cb = _dense_int(b)
    n, m = len(ca), len(cb)
    if n < m:
        raise ArithmeticError("inexact Laurent division")
    quot = [0] * (n - m + 1)
    rem = list(ca)
    lead = cb[-1]
    for k in range(n - m, -1, -1):
        top = rem[k + m - 1]
        if top % lead:
            raise ArithmeticError("inexact Laurent division")
        c = top // lead
        quot[k] = c
        if c:
            for j in range(m):
                rem[k + j] -= c * cb[j]
    if any(rem):
        raise ArithmeticError("inexact Laurent division")
    return LaurentInt({va - vb + k: c for k, c in enumerate(quot) if c})


def gcd_laurent(a: LaurentInt, b: LaurentInt) -> LaurentInt:
    """Gcd in Z[q^{+-1}], normalized: valuation 0, content 1, positive constant term.

    Gcd of the integer contents times the primitive polynomial gcd.  A cheap
    exact coprimality filter runs first: a nonconstant common divisor would
    divide the integer values at q = 2 and q = 3, so unit gcds there certify
    coprime primitive parts and skip the pseudo-remainder sequence.
    """
    if a.is_zero:
        return _normalize_assoc(b)
    if b.is_zero:
        return _normalize_assoc(a)
    cg = int_gcd(a.content(), b.content())
    if len(a.coeffs) == 1 or len(b.coeffs) == 1:
        return LaurentInt.const(cg)
    if a == b or a == -b:
        return _normalize_assoc(a)
    fa = _primitive(_dense_int(a)[1])
    fb = _primitive(_dense_int(b)[1])
    if _coprime_mod_p(fa, fb):
        return LaurentInt.const(cg)
    if len(fb) > len(fa):
        fa, fb = fb, fa
    while True:
        r = _pseudo_mod(fa, fb)
        if not r:
            g = fb
            break
        fa, fb = fb, _primitive(r)
        if len(fb) == 1:
            g = [1]
            break
    prim = LaurentInt({e: c for e, c in enumerate(g) if c})
    return _normalize_assoc(prim.scale(cg))


_FILTER_PRIME = 2147483647  # Mersenne prime; degree of gcd can only drop mod p


def _coprime_mod_p(fa: list[int], fb: list[int]) -> bool:
    """True only if the polynomials are provably coprime: their gcd over F_p is
    constant and neither leading coefficient vanishes mod p."""
    p = _FILTER_PRIME
    if fa[-1] % p == 0 or fb[-1] % p == 0:
        return False
    ra = [c % p for c in fa]
    rb = [c % p for c in fb]
    while True:
        while rb and not rb[-1]:
            rb.pop()
        if not rb:
            return False
        if len(rb) == 1:
            return True
        inv = pow(rb[-1], p - 2, p)
        m = len(rb)
        while len(ra) >= m:
            if ra[-1]:
                c = ra[-1] * inv % p
                off = len(ra) - m
                for j in range(m - 1):
                    ra[off + j] = (ra[off + j] - c * rb[j]) % p
            ra.pop()
        ra, rb = rb, ra


def _primitive(coeffs: list[int]) -> list[int]:
    """Strip trailing/leading zeros and divide by the content (sign kept on lead)."""
    lo = 0
    while lo < len(coeffs) and not coeffs[lo]:
        lo += 1
    hi = len(coeffs)
    while hi > lo and not coeffs[hi - 1]:
        hi -= 1
    coeffs = coeffs[lo:hi]
    g = 0
    for c in coeffs:
        g = int_gcd(g, c)
    return [c // g for c in coeffs] if g > 1 else list(coeffs)


def _pseudo_mod(fa: list[int], fb: list[int]) -> list[int]:
    """Pseudo-remainder of fa by fb over Z (fb nonzero, len(fb) >= 2)."""
    r = list(fa)
    m = len(fb)
    lead = fb[-1]
    while len(r) >= m:
        if not r[-1]:
            r.pop()
            continue
        top = r[-1]
        g = int_gcd(top, lead)
        mul_r, mul_b = lead // g, top // g
        for j in range(len(r)):
            r[j] *= mul_r
        off = len(r) - m
        for j in range(m):
            r[off + j] -= mul_b * fb[j]
        r.pop()
    while r and not r[-1]:
        r.pop()
    return r


def _normalize_assoc(p: LaurentInt) -> LaurentInt:
    """Normalize up to units: valuation 0, content 1, positive constant term."""
    if p.is_zero:
        return ZERO
    p = p.shifted(-p.valuation())
    c = p.content()
    if c != 1:
        p = LaurentInt({e: v // c for e, v in p.coeffs.items()})
    if p.coeffs[0] < 0:
        p = -p
    return p


class RatFunc:
    """Element of Q(q) as a reduced fraction num/den of integer Laurent polynomials.

    Normal form: gcd(num, den) is a unit, den has valuation 0 and positive
    constant term, and the integer contents of num and den are coprime.  Zero
    is stored as 0/1.  (A denominator with integer content > 1 only appears
    when the value genuinely has a non-integer rational factor, e.g. 1/2.)
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: LaurentInt, den: LaurentInt = ONE, _reduced: bool = False):
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "RatFunc":
        return RatFunc(LaurentInt.const(n), ONE, _reduced=True)

    @staticmethod
    def from_laurent(p: LaurentInt) -> "RatFunc":
        return RatFunc(p, ONE, _reduced=True)

    @staticmethod
    def from_fraction(x: Fraction) -> "RatFunc":
        return RatFunc(LaurentInt.const(x.numerator), LaurentInt.const(x.denominator))

    # -- queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_one(self) -> bool:
        return self.num == ONE and self.den == ONE

    def is_laurent(self) -> bool:
        return self.den == ONE

    def as_laurent(self) -> LaurentInt:
        if self.den != ONE:
            raise ArithmeticError(f"not a Laurent polynomial: {self}")
        return self.num

    def valuation(self) -> int:
        """Order of vanishing at q = 0 (den has valuation 0 by normal form)."""
        if self.num.is_zero:
            raise ValueError("valuation of zero")
        return self.num.valuation()

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.num.is_zero:
            return other
        if other.num.is_zero:
            return self
        if self.den == ONE and other.den == ONE:
            return RatFunc(self.num + other.num, ONE, _reduced=True)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        r = RatFunc.__new__(RatFunc)
        r.num = -self.num
        r.den = self.den
        r._hash = None
        return r

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if self.num.is_zero or other.num.is_zero:
            return RF_ZERO
        if self.den == ONE and other.den == ONE:
            return RatFunc(self.num * other.num, ONE, _reduced=True)
        # cross-cancellation keeps the product reduced without a final gcd
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if d2 != ONE:
            g = gcd_laurent(n1, d2)
            if g != ONE:
                n1, d2 = divexact(n1, g), divexact(d2, g)
        if d1 != ONE:
            g = gcd_laurent(n2, d1)
            if g != ONE:
                n2, d1 = divexact(n2, g), divexact(d1, g)
        num, den = _unit_normalize(n1 * n2, d1 * d2)
        return RatFunc(num, den, _reduced=True)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if other.num.is_zero:
            raise ZeroDivisionError("division by zero rational function")
        if self.num.is_zero:
            return RF_ZERO
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        g = gcd_laurent(n1, n2)
        if g != ONE:
            n1, n2 = divexact(n1, g), divexact(n2, g)
        if d1 != ONE and d2 != ONE:
            g = gcd_laurent(d2, d1)
            if g != ONE:
                d2, d1 = divexact(d2, g), divexact(d1, g)
        num, den = _unit_normalize(n1 * d2, d1 * n2)
        return RatFunc(num, den, _reduced=True)

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return (RF_ONE / self)**(-n)
        if n == 0:
            return RF_ONE
        # powers of a reduced fraction stay reduced
        return RatFunc(self.num**n, self.den**n, _reduced=True)

    def scale_laurent(self, p: LaurentInt) -> "RatFunc":
        if p.is_zero or self.num.is_zero:
            return RF_ZERO
        if self.den == ONE:
            return RatFunc(self.num * p, ONE, _reduced=True)
        den = self.den
        g = gcd_laurent(p, den)
        if g != ONE:
            p, den = divexact(p, g), divexact(den, g)
        num, den = _unit_normalize(self.num * p, den)
        return RatFunc(num, den, _reduced=True)

    def bar(self) -> "RatFunc":
        """q -> q^-1 on numerator and denominator, renormalized."""
        num, den = _unit_normalize(self.num.bar(), self.den.bar())
        return RatFunc(num, den, _reduced=True)

    # -- comparisons --------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, RatFunc)
                and self.num == other.num and self.den == other.den)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self) -> bool:
        return not self.num.is_zero

    # -- I/O ------------------------------------------------------------------

    def __str__(self) -> str:
        if self.den == ONE:
            return str(self.num)
        num = str(self.num)
        if len(self.num.coeffs) > 1:
            num = f"({num})"
        return f"{num}/({self.den})"

    def __repr__(self) -> str:
        return f"RatFunc({self})"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @staticmethod
    def from_json(data: dict) -> "RatFunc":
        return RatFunc(LaurentInt.from_json(data["num"]), LaurentInt.from_json(data["den"]))


def _reduce(num: LaurentInt, den: LaurentInt) -> tuple[LaurentInt, LaurentInt]:
    if num.is_zero:
        return ZERO, ONE
    if den == ONE:
        return num, ONE
    g = gcd_laurent(num, den)
    if g != ONE:
        num = divexact(num, g)
        den = divexact(den, g)
    return _unit_normalize(num, den)


def _unit_normalize(num: LaurentInt, den: LaurentInt) -> tuple[LaurentInt, LaurentInt]:
    """Fix the unit ambiguity of an already-reduced fraction: den gets
    valuation 0, coprime integer content, and a positive constant term."""
    v = den.valuation()
    if v:
        den = den.shifted(-v)
        num = num.shifted(-v)
    cg = int_gcd(num.content(), den.content())
    if cg > 1:
        num = LaurentInt({e: c // cg for e, c in num.coeffs.items()})
        den = LaurentInt({e: c // cg for e, c in den.coeffs.items()})
    if den.coeffs[0] < 0:
        num, den = -num, -den
    return num, den


RF_ZERO = RatFunc.from_int(0)
RF_ONE = RatFunc.from_int(1)
RF_Q = RatFunc.from_laurent(Q)


# -- the four spec-level operations ------------------------------------------


def arith(a: RatFunc, b: RatFunc, kind: str) -> RatFunc:
    """Field arithmetic on rational functions; kind in {add, sub, mul, div}."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def bar(a: RatFunc) -> RatFunc:
    return a.bar()


def zero_regularity(a: RatFunc) -> tuple[bool, Fraction | None]:
    """Whether a is regular at q = 0, and its value there when it is.

    The denominator has valuation 0 in normal form, so a is regular iff the
    numerator has no negative exponents; the value is the ratio of constant
    terms.
    """
    if a.num.is_zero:
        return True, Fraction(0)
    v = a.num.valuation()
    if v < 0:
        return False, None
    if v > 0:
        return True, Fraction(0)
    return True, Fraction(a.num.coeffs[0], a.den.coeffs[0])


def symmetrize_residual(p: LaurentInt) -> LaurentInt:
    """The unique bar-symmetric s with p - s in qZ[q].

    Explicitly s = a_0 + sum_{k>0} a_{-k} (q^k + q^-k), reading coefficients
    a_j of p at the nonpositive exponents j.
    """
    out: dict[int, int] = {}
    for e, c in p.coeffs.items():
        if e == 0:
            out[0] = out.get(0, 0) + c
        elif e < 0:
            out[e] = out.get(e, 0) + c
            out[-e] = out.get(-e, 0) + c
    return LaurentInt(out)


def symmetrize_residual_ratfunc(t: RatFunc) -> LaurentInt:
    """symmetrize_residual on a RatFunc that must be a Laurent polynomial."""
    return symmetrize_residual(t.as_laurent())

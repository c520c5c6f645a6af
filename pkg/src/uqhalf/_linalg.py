"""Small dense exact linear algebra over Q, Z[q^{+-1}], and Q(q).

Everything here works on lists of lists; dimensions stay in the dozens, so
plain Gauss elimination with exact arithmetic is fine.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import RF_ONE, RF_ZERO, LaurentInt, RatFunc


def rf_from(entry) -> RatFunc:
    if isinstance(entry, RatFunc):
        return entry
    if isinstance(entry, LaurentInt):
        return RatFunc.from_laurent(entry)
    return RatFunc.from_int(entry)


def rf_matrix(rows) -> list:
    return [[rf_from(x) for x in row] for row in rows]


def rf_solve(a_rows, b_cols) -> list:
    """Solve A X = B exactly over Q(q); B given and returned column-wise.

    Raises ArithmeticError on a singular matrix.
    """
    n = len(a_rows)
    m = len(b_cols)
    aug = [[rf_from(a_rows[i][j]) for j in range(n)]
           + [rf_from(b_cols[k][i]) for k in range(m)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero), None)
        if piv is None:
            raise ArithmeticError("singular matrix in rf_solve")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv = RF_ONE / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [[aug[i][n + k] for i in range(n)] for k in range(m)]


def rf_inverse_det(a_rows) -> tuple:
    """Inverse and determinant of a square matrix over Q(q)."""
    n = len(a_rows)
    aug = [[rf_from(a_rows[i][j]) for j in range(n)]
           + [RF_ONE if j == i else RF_ZERO for j in range(n)] for i in range(n)]
    det = RF_ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero), None)
        if piv is None:
            raise ArithmeticError("singular matrix in rf_inverse_det")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
            det = -det
        det = det * aug[col][col]
        inv = RF_ONE / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug], det


def laurent_adjugate_det(a_rows) -> tuple:
    """(adjugate, det) of a square Z[q^{+-1}] matrix, both with Laurent entries."""
    inv, det = rf_inverse_det(a_rows)
    det_l = det.as_laurent()
    adj = [[(x * det).as_laurent() for x in row] for row in inv]
    return adj, det_l


def rf_det(a_rows) -> RatFunc:
    n = len(a_rows)
    if n == 0:
        return RF_ONE
    rows = [[rf_from(x) for x in row] for row in a_rows]
    det = RF_ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if not rows[r][col].is_zero), None)
        if piv is None:
            return RF_ZERO
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        det = det * rows[col][col]
        inv = RF_ONE / rows[col][col]
        for r in range(col + 1, n):
            if not rows[r][col].is_zero:
                f = rows[r][col] * inv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return det


def rf_rank(rows) -> int:
    """Rank of a rectangular matrix over Q(q)."""
    rows = [[rf_from(x) for x in row] for row in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    row_at = 0
    for col in range(ncols):
        piv = next((r for r in range(row_at, len(rows)) if not rows[r][col].is_zero), None)
        if piv is None:
            continue
        rows[row_at], rows[piv] = rows[piv], rows[row_at]
        inv = RF_ONE / rows[row_at][col]
        rows[row_at] = [x * inv for x in rows[row_at]]
        for r in range(len(rows)):
            if r != row_at and not rows[r][col].is_zero:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[row_at])]
        rank += 1
        row_at += 1
        if row_at == len(rows):
            break
    return rank


def rf_nullspace(rows) -> list:
    """Basis of the right nullspace of a rectangular matrix over Q(q)."""
    if not rows:
        return []
    ncols = len(rows[0])
    rows = [[rf_from(x) for x in row] for row in rows]
    pivots = []
    row_at = 0
    for col in range(ncols):
        piv = next((r for r in range(row_at, len(rows)) if not rows[r][col].is_zero), None)
        if piv is None:
            continue
        rows[row_at], rows[piv] = rows[piv], rows[row_at]
        inv = RF_ONE / rows[row_at][col]
        rows[row_at] = [x * inv for x in rows[row_at]]
        for r in range(len(rows)):
            if r != row_at and not rows[r][col].is_zero:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[row_at])]
        pivots.append(col)
        row_at += 1
        if row_at == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [RF_ZERO] * ncols
        vec[fc] = RF_ONE
        for r, pc in enumerate(pivots):
            vec[pc] = -rows[r][fc]
        basis.append(vec)
    return basis


# -- rational (Fraction) helpers ----------------------------------------------


def frac_solve(a_rows, b) -> list:
    """Solve a square Fraction system A x = b."""
    n = len(a_rows)
    aug = [[Fraction(a_rows[i][j]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise ArithmeticError("singular rational system")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def frac_inverse(a_rows) -> list:
    n = len(a_rows)
    aug = [[Fraction(a_rows[i][j]) for j in range(n)]
           + [Fraction(1 if j == i else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise ArithmeticError("singular rational matrix")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]

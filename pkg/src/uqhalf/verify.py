"""Theorem-level verification sweeps, report generation, and the CLI.

Each check sweeps all weights up to a height bound, never aborts early on a
failure, and records a concrete witness for anything that does not hold.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from ._linalg import rf_det
from .canbasis import BasisCache, TableError
from .halfalg import Algebra, HeightCapExceeded, PreconditionError
from .pbw import PbwContext, _subweights
from .rootdata import (NonReducedWordError, RootDatum, RootDatumError,
                       exponent_tuples, height, lex_compare, load_gcm_config,
                       named_root_datum, weight_sub, weights_up_to_height)
from .scalars import RF_ZERO


class UsageError(ValueError):
    """Bad command-line or argument data; maps to exit code 2."""


@dataclass
class WeightRecord:
    weight: tuple
    dim: int
    passed: bool
    witness: dict | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class VerifyReport:
    theorem: str
    type_name: str
    word: tuple
    epsilon: int
    records: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, record: WeightRecord):
        self.records.append(record)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "type": self.type_name,
            "word": list(self.word),
            "epsilon": self.epsilon,
            "weights": [{"weight": list(r.weight), "dim": r.dim, "pass": r.passed,
                         "witness": r.witness, **({"detail": r.detail} if r.detail else {})}
                        for r in self.records],
            "pass": self.passed,
            "elapsed_seconds": round(self.elapsed, 3),
        }

    def to_csv(self) -> str:
        lines = ["theorem;weight;dim;pass;witness;matrix"]
        for r in self.records:
            mat = r.detail.get("matrix")
            flat = " | ".join(",".join(row) for row in mat) if mat else ""
            wit = json.dumps(r.witness) if r.witness else ""
            lines.append(f"{self.theorem};{'+'.join(map(str, r.weight))};{r.dim};"
                         f"{'pass' if r.passed else 'FAIL'};{wit};{flat}")
        return "\n".join(lines) + "\n"


def _vertex_ref(v) -> dict:
    return {"weight": list(v.weight), "index": v.index}


def _sorted_weights(datum, max_height):
    return [datum.zero_weight()] + weights_up_to_height(datum, max_height)


# -- factorization of the half along a Weyl group element ------------------------------


def check_factorization(cache: BasisCache, letters, epsilon: int, max_height: int,
                        order: str = "theorem") -> VerifyReport:
    """Products of finite-part and cofinite-part dual canonical elements give a
    basis over Z[q^{+-1}] at every weight: square matrix, unit determinant, and
    (in the theorem order) unitriangularity along the Lusztig-datum order.
    """
    t0 = time.time()
    ctx = cache.pbw_context(letters, epsilon)
    datum = cache.datum
    name = f"factorization[{order}]"
    report = VerifyReport(name, str(datum), tuple(letters), epsilon)
    for weight in _sorted_weights(datum, max_height):
        table = cache.table(weight)
        record = WeightRecord(weight=weight, dim=table.dim, passed=True)
        rows = []
        for sub in _subweights(weight):
            mu = weight_sub(weight, sub)
            for c in exponent_tuples(ctx.word, sub):
                for b2 in ctx.factorization(mu)["cofinite"]:
                    rows.append((c, mu, b2))
        rows.sort(key=lambda t: t[0], reverse=True)
        if len(rows) != table.dim:
            record.passed = False
            record.witness = {"reason": "pair count mismatch",
                              "pairs": len(rows), "dim": table.dim}
            report.add(record)
            continue
        matrix = []
        labels = ctx.factorization(weight)["labels"]
        row_info = []
        for c, mu, b2 in rows:
            finite = cache.table(xi_weight(ctx, c)).up[ctx.pbw_crystal_label(c).index] \
                if any(c) else cache.alg.one()
            cof = cache.table(mu).up[b2]
            if (epsilon == 1) == (order == "theorem"):
                prod = cache.alg.multiply(finite, cof)
            else:
                prod = cache.alg.multiply(cof, finite)
            coeffs = cache.expand_up(prod)
            row = [coeffs.get(b, RF_ZERO) for b in range(table.dim)]
            matrix.append(row)
            row_info.append((c, mu, b2))
        bad = _non_laurent_entry(matrix)
        if bad is not None:
            record.passed = False
            record.witness = {"reason": "product left the dual integral form",
                              "row": bad[0], "vertex": bad[1], "coefficient": bad[2]}
            report.add(record)
            continue
        det = rf_det(matrix) if matrix else None
        det_ok = det is None or (det.is_laurent() and det.num.is_unit())
        if not det_ok:
            record.passed = False
            record.witness = {"reason": "determinant not a unit", "det": str(det)}
        record.detail["det"] = str(det) if det is not None else "1"
        if order == "theorem" and record.passed:
            fail = _triangular_against_labels(ctx, table, labels, row_info, matrix)
            if fail is not None:
                record.passed = False
                record.witness = fail
        record.detail["matrix"] = [[str(x) for x in row] for row in matrix]
        report.add(record)
    report.elapsed = time.time() - t0
    return report


def xi_weight(ctx: PbwContext, c):
    from .rootdata import xi
    return xi(c, ctx.word)


def _non_laurent_entry(matrix):
    for r, row in enumerate(matrix):
        for b, t in enumerate(row):
            if not t.is_zero and not t.is_laurent():
                return r, b, str(t)
    return None


def _triangular_against_labels(ctx, table, labels, row_info, matrix):
    """Each row must be unit at its own vertex with a lex-smaller qZ[q] tail."""
    datum_of = {}
    for b in range(table.dim):
        hit = labels.get(b)
        datum_of[b] = hit[0] if hit else (0,) * ctx.length
    for (c, mu, b2), row in zip(row_info, matrix):
        target = None
        for b in range(table.dim):
            if datum_of[b] == c:
                hit = labels.get(b)
                cof = hit[1] if hit else (table.weight, b)
                if cof == (mu, b2) or (not any(c) and b == b2 and mu == table.weight):
                    target = b
                    break
        if target is None:
            return {"reason": "no vertex with this factorization label",
                    "datum": list(c), "cofinite": [list(mu), b2]}
        if not row[target].is_one:
            return {"reason": "leading coefficient not 1", "datum": list(c),
                    "vertex": target, "coefficient": str(row[target])}
        for b in range(table.dim):
            t = row[b]
            if b == target or t.is_zero:
                continue
            if not t.num.in_q_zq() or not t.is_laurent():
                return {"reason": "tail coefficient not in qZ[q]", "datum": list(c),
                        "vertex": b, "coefficient": str(t)}
            if lex_compare(datum_of[b], c) >= 0:
                return {"reason": "tail vertex not lexicographically smaller",
                        "datum": list(c), "tail_datum": list(datum_of[b])}
    return None


# -- multiplicity-free products through the tau maps ---------------------------------


def check_multiplicity_free(cache: BasisCache, letters, epsilon: int,
                            max_height: int) -> VerifyReport:
    """G^up(tau_le b) * G^up(tau_gt b) = G^up(b) + lexicographically smaller
    qZ[q] tail, for every vertex within the height bound."""
    t0 = time.time()
    ctx = cache.pbw_context(letters, epsilon)
    datum = cache.datum
    report = VerifyReport("multiplicity_free", str(datum), tuple(letters), epsilon)
    for weight in _sorted_weights(datum, max_height):
        table = cache.table(weight)
        record = WeightRecord(weight=weight, dim=table.dim, passed=True)
        for b in range(table.dim):
            v = table.vertices[b]
            le = ctx.tau_le(v)
            gt = ctx.tau_gt(v)
            x = cache.table(le.weight).up[le.index]
            y = cache.table(gt.weight).up[gt.index]
            prod = cache.alg.multiply(x, y) if epsilon == 1 else cache.alg.multiply(y, x)
            coeffs = cache.expand_up(prod)
            own = coeffs.pop(b, RF_ZERO)
            fail = None
            if not own.is_one:
                fail = {"vertex": _vertex_ref(v), "reason": "coefficient of b not 1",
                        "coefficient": str(own)}
            else:
                lb = ctx.lusztig_datum(v)
                for b1, t in coeffs.items():
                    if t.is_zero:
                        continue
                    if not t.is_laurent() or not t.num.in_q_zq():
                        fail = {"vertex": _vertex_ref(v), "tail": b1,
                                "reason": "tail not in qZ[q]", "coefficient": str(t)}
                        break
                    if lex_compare(ctx.lusztig_datum(table.vertices[b1]), lb) >= 0:
                        fail = {"vertex": _vertex_ref(v), "tail": b1,
                                "reason": "tail datum not smaller"}
                        break
            if fail is not None:
                record.passed = False
                record.witness = fail
                break
        report.add(record)
    report.elapsed = time.time() - t0
    return report


# -- truncated products inside one PBW family ------------------------------------------


def check_truncated_products(ctx: PbwContext, p: int, max_height: int) -> VerifyReport:
    """Splitting an exponent tuple at position p multiplies with leading
    coefficient 1 and a lexicographically smaller qZ[q] tail of PBW labels."""
    t0 = time.time()
    if not 0 <= p < ctx.length:
        raise UsageError(f"--p must be in 0..{ctx.length - 1} for truncated products")
    cache = ctx.cache
    datum = ctx.datum
    report = VerifyReport(f"truncated_products[p={p}]", str(datum),
                          ctx.word.letters, ctx.epsilon)
    zero = datum.zero_weight()
    for weight in _sorted_weights(datum, max_height):
        table = cache.table(weight)
        record = WeightRecord(weight=weight, dim=table.dim, passed=True)
        for c in exponent_tuples(ctx.word, weight):
            c_le = c[:p] + (0,) * (ctx.length - p)
            c_gt = (0,) * p + c[p:]
            b_le = ctx.pbw_crystal_label(c_le)
            b_gt = ctx.pbw_crystal_label(c_gt)
            target = ctx.pbw_crystal_label(c)
            x = cache.table(b_le.weight).up[b_le.index]
            y = cache.table(b_gt.weight).up[b_gt.index]
            prod = cache.alg.multiply(x, y)
            coeffs = cache.expand_up(prod)
            own = coeffs.pop(target.index, RF_ZERO) if target.weight == weight else RF_ZERO
            fail = None
            if not own.is_one:
                fail = {"datum": list(c), "reason": "leading coefficient not 1",
                        "coefficient": str(own)}
            else:
                fac = ctx.factorization(weight)
                for b1, t in coeffs.items():
                    if t.is_zero:
                        continue
                    hit = fac["labels"].get(b1)
                    if hit is None or any(hit[1][0]):
                        fail = {"datum": list(c), "tail": b1,
                                "reason": "tail vertex not a PBW label"}
                        break
                    if not t.is_laurent() or not t.num.in_q_zq():
                        fail = {"datum": list(c), "tail": b1,
                                "reason": "tail not in qZ[q]", "coefficient": str(t)}
                        break
                    if lex_compare(hit[0], c) >= 0:
                        fail = {"datum": list(c), "tail_datum": list(hit[0]),
                                "reason": "tail datum not smaller"}
                        break
            if fail is not None:
                record.passed = False
                record.witness = fail
                break
        report.add(record)
    report.elapsed = time.time() - t0
    return report


# -- triple intersections ----------------------------------------------------------------


def check_triple_intersection(cache: BasisCache, letters, p: int,
                              max_height: int) -> VerifyReport:
    """Left PBW part of the suffix word, middle double-kernel part, right PBW
    part of the reversed prefix with the opposite sign: products form a basis."""
    t0 = time.time()
    letters = tuple(letters)
    if not 0 <= p <= len(letters):
        raise UsageError(f"--p must be in 0..{len(letters)} for triple intersection")
    datum = cache.datum
    report = VerifyReport(f"triple_intersection[p={p}]", str(datum), letters, 1)
    suffix = letters[p:]
    prefix_rev = tuple(reversed(letters[:p]))
    ctx_left = cache.pbw_context(suffix, 1) if suffix else None
    ctx_right = cache.pbw_context(prefix_rev, -1) if prefix_rev else None
    for weight in _sorted_weights(datum, max_height):
        table = cache.table(weight)
        record = WeightRecord(weight=weight, dim=table.dim, passed=True)
        rows = []
        for s_left in _subweights(weight):
            left_cs = exponent_tuples(ctx_left.word, s_left) if ctx_left \
                else ([()] if not any(s_left) else [])
            if not left_cs:
                continue
            rest = weight_sub(weight, s_left)
            for s_right in _subweights(rest):
                right_cs = exponent_tuples(ctx_right.word, s_right) if ctx_right \
                    else ([()] if not any(s_right) else [])
                if not right_cs:
                    continue
                mu = weight_sub(rest, s_right)
                mid = _middle_vertices(cache, ctx_left, ctx_right, mu)
                for cl in left_cs:
                    for m in mid:
                        for cr in right_cs:
                            rows.append((cl, mu, m, cr))
        if len(rows) != table.dim:
            record.passed = False
            record.witness = {"reason": "triple count mismatch",
                              "rows": len(rows), "dim": table.dim}
            report.add(record)
            continue
        matrix = []
        for cl, mu, m, cr in rows:
            x = cache.alg.one()
            if ctx_left and any(cl):
                bl = ctx_left.pbw_crystal_label(cl)
                x = cache.table(bl.weight).up[bl.index]
            x = cache.alg.multiply(x, cache.table(mu).up[m])
            if ctx_right and any(cr):
                br = ctx_right.pbw_crystal_label(cr)
                x = cache.alg.multiply(x, cache.table(br.weight).up[br.index])
            coeffs = cache.expand_up(x)
            matrix.append([coeffs.get(b, RF_ZERO) for b in range(table.dim)])
        bad = _non_laurent_entry(matrix)
        if bad is not None:
            record.passed = False
            record.witness = {"reason": "product left the dual integral form",
                              "row": bad[0], "vertex": bad[1], "coefficient": bad[2]}
            report.add(record)
            continue
        det = rf_det(matrix) if matrix else None
        if det is not None and not (det.is_laurent() and det.num.is_unit()):
            record.passed = False
            record.witness = {"reason": "determinant not a unit", "det": str(det)}
        record.detail["det"] = str(det) if det is not None else "1"
        report.add(record)
    report.elapsed = time.time() - t0
    return report


def _middle_vertices(cache, ctx_left, ctx_right, weight):
    table = cache.table(weight)
    out = set(range(table.dim))
    if ctx_left:
        out &= set(ctx_left.factorization(weight)["cofinite"])
    if ctx_right:
        out &= set(ctx_right.factorization(weight)["cofinite"])
    return sorted(out)


# -- CLI -------------------------------------------------------------------------------


def _datum_from_args(args) -> RootDatum:
    if args.gcm:
        return load_gcm_config(args.gcm)
    if args.type:
        return named_root_datum(args.type)
    raise UsageError("one of --type or --gcm is required")


def _word_from_args(datum, text) -> tuple:
    if not text:
        raise UsageError("--word is required for this command")
    try:
        return tuple(datum.index_of_label(part.strip()) for part in text.split(","))
    except RootDatumError as exc:
        raise UsageError(f"--word: {exc}") from exc


def _epsilon_from_args(text) -> int:
    if text in ("+1", "1"):
        return 1
    if text == "-1":
        return -1
    raise UsageError(f"--epsilon must be +1 or -1, got {text!r}")


def _emit(data, args):
    if args.format == "json":
        text = json.dumps(data, indent=2) + "\n"
    else:
        text = data["csv"] if isinstance(data, dict) and "csv" in data else _flat_csv(data)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flat_csv(data) -> str:
    lines = []

    def walk(prefix, node):
        if isinstance(node, dict):
            for k, v in node.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(node, list):
            lines.append(f"{prefix};{','.join(map(str, node))}")
        else:
            lines.append(f"{prefix};{node}")

    walk("", data)
    return "\n".join(lines) + "\n"


def _cmd_basis(args) -> int:
    datum = _datum_from_args(args)
    cache = BasisCache(Algebra(datum))
    weights = [tuple(int(x) for x in args.weight.split(","))] if args.weight \
        else _sorted_weights(datum, args.max_height)
    out = {"type": str(datum), "weights": []}
    for weight in weights:
        table = cache.table(weight)
        alg = cache.alg
        out["weights"].append({
            "weight": list(weight),
            "dim": table.dim,
            "vertices": [{"index": v.index, "eps": list(v.eps),
                          "eps_star": list(v.eps_star), "string": list(v.string)}
                         for v in table.vertices],
            "low": [alg.element_to_json(x) for x in table.low],
            "up": [alg.element_to_json(x) for x in table.up],
        })
    _emit(out, args)
    return 0


def _cmd_crystal(args) -> int:
    datum = _datum_from_args(args)
    cache = BasisCache(Algebra(datum))
    out = {"type": str(datum), "weights": []}
    for weight in _sorted_weights(datum, args.max_height):
        table = cache.table(weight)
        out["weights"].append({
            "weight": list(weight),
            "vertices": [{"index": v.index, "eps": list(v.eps),
                          "eps_star": list(v.eps_star)} for v in table.vertices],
            "lowering": {datum.labels[i]: {str(k): v for k, v in table.ftab[i].items()}
                         for i in range(datum.rank)},
            "star": list(table.star_perm),
        })
    _emit(out, args)
    return 0


def _cmd_pbw(args) -> int:
    datum = _datum_from_args(args)
    cache = BasisCache(Algebra(datum))
    word = _word_from_args(datum, args.word)
    epsilon = _epsilon_from_args(args.epsilon)
    try:
        ctx = cache.pbw_context(word, epsilon)
    except NonReducedWordError as exc:
        raise UsageError(f"--word: {exc}") from exc
    if args.weight:
        weights = [tuple(int(x) for x in args.weight.split(","))]
    else:
        weights = _sorted_weights(datum, args.max_height)
    out = {"type": str(datum), "word": [datum.labels[i] for i in word],
           "epsilon": epsilon, "weights": []}
    alg = cache.alg
    for weight in weights:
        cs, matrix, failures = ctx.transition_matrix(weight)
        out["weights"].append({
            "weight": list(weight),
            "tuples": [list(c) for c in cs],
            "monomials": [alg.element_to_json(ctx.pbw_monomial(c)) for c in cs],
            "norms": [str(ctx.norm(c)) for c in cs],
            "labels": [ctx.pbw_crystal_label(c).index for c in cs],
            "transition": [[str(x) for x in row] for row in matrix],
            "triangularity_failures": [list(map(str, f)) for f in failures],
        })
    _emit(out, args)
    return 0


def _cmd_verify(args) -> int:
    datum = _datum_from_args(args)
    cache = BasisCache(Algebra(datum))
    word = _word_from_args(datum, args.word)
    epsilon = _epsilon_from_args(args.epsilon)
    try:
        reports = run_checks(cache, word, epsilon, args.max_height, args.check, args.p)
    except NonReducedWordError as exc:
        raise UsageError(f"--word: {exc}") from exc
    payload = {"reports": [r.to_json() for r in reports],
               "pass": all(r.passed for r in reports)}
    if args.format == "csv":
        payload = {"csv": "".join(r.to_csv() for r in reports)}
        _emit(payload, args)
    else:
        _emit(payload, args)
    return 0 if all(r.passed for r in reports) else 1


def run_checks(cache, word, epsilon, max_height, which, p) -> list:
    reports = []
    if which in ("factorization", "all"):
        reports.append(check_factorization(cache, word, epsilon, max_height, "theorem"))
        reports.append(check_factorization(cache, word, epsilon, max_height, "corollary"))
    if which in ("multiplicity", "all"):
        reports.append(check_multiplicity_free(cache, word, epsilon, max_height))
    if which in ("truncated", "all"):
        ctx = cache.pbw_context(word, epsilon)
        reports.append(check_truncated_products(ctx, p if p is not None else 0, max_height))
    if which in ("triple", "all"):
        reports.append(check_triple_intersection(
            cache, word, p if p is not None else 0, max_height))
    if not reports:
        raise UsageError(f"unknown check {which!r}")
    return reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqhalf",
        description="Canonical bases, PBW bases, and factorization checks for "
                    "the negative half of a quantized enveloping algebra.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--type", help="named Cartan type (A1, A2, B2, G2, A3, A1(1))")
        p.add_argument("--gcm", help="path to a JSON GCM config")
        p.add_argument("--max-height", type=int, default=6, dest="max_height")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p_basis = sub.add_parser("basis", help="emit canonical/dual canonical tables")
    common(p_basis)
    p_basis.add_argument("--weight", help="single weight as comma coordinates")

    p_crystal = sub.add_parser("crystal", help="emit crystal vertex data and arrows")
    common(p_crystal)

    p_pbw = sub.add_parser("pbw", help="emit PBW monomials, labels, and transitions")
    common(p_pbw)
    p_pbw.add_argument("--word", help="reduced word, comma separated labels")
    p_pbw.add_argument("--epsilon", default="+1")
    p_pbw.add_argument("--weight", help="single weight as comma coordinates")

    p_verify = sub.add_parser("verify", help="run theorem verification sweeps")
    common(p_verify)
    p_verify.add_argument("--word", help="reduced word, comma separated labels")
    p_verify.add_argument("--epsilon", default="+1")
    p_verify.add_argument("--check", default="all",
                          choices=["factorization", "multiplicity", "truncated",
                                   "triple", "all"])
    p_verify.add_argument("--p", type=int, default=None,
                          help="split position for truncated/triple checks")
    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {"basis": _cmd_basis, "crystal": _cmd_crystal,
                "pbw": _cmd_pbw, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except (UsageError, RootDatumError, NonReducedWordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TableError, PreconditionError, HeightCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()

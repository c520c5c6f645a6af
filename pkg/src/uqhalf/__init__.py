"""Exact kernel for the negative half of a quantized enveloping algebra.

Canonical and dual canonical bases, crystal operators, PBW bases along
reduced words with the braid action, and verification sweeps for the
tensor-product factorization and multiplicity-free multiplication theorems.
"""

from .canbasis import BasisCache, BasisTable, CrystalVertex, TableError
from .halfalg import (Algebra, HalfElement, HeightCapExceeded,
                      PreconditionError)
from .pbw import PbwContext, canonical_table_pbw
from .rootdata import (NonReducedWordError, ReducedWord, RootDatum,
                       RootDatumError, build_root_datum, lex_compare,
                       load_gcm_config, longest_element_words, longest_word,
                       named_root_datum, weight_dim, word_roots, xi)
from .scalars import (LaurentInt, RatFunc, arith, bar, q_factorial, q_int,
                      symmetrize_residual, zero_regularity)
from .verify import (VerifyReport, check_factorization,
                     check_multiplicity_free, check_triple_intersection,
                     check_truncated_products, run_checks, run_cli)

__version__ = "0.1.0"

__all__ = [
    "Algebra", "BasisCache", "BasisTable", "CrystalVertex", "HalfElement",
    "HeightCapExceeded", "LaurentInt", "NonReducedWordError", "PbwContext",
    "PreconditionError", "RatFunc", "ReducedWord", "RootDatum",
    "RootDatumError", "TableError", "VerifyReport", "arith", "bar",
    "build_root_datum", "canonical_table_pbw", "check_factorization",
    "check_multiplicity_free", "check_triple_intersection",
    "check_truncated_products", "lex_compare", "load_gcm_config",
    "longest_element_words", "longest_word", "named_root_datum",
    "q_factorial", "q_int", "run_checks", "run_cli", "symmetrize_residual",
    "weight_dim", "word_roots", "xi", "zero_regularity",
]

"""Limited-memory influence diagrams solved by single policy updating.

Three interchangeable junction-tree architectures (``"ss"``, ``"hugin"``,
``"lp"``) count every scalar operation they perform; :mod:`limid.oracle`
provides brute-force references for small diagrams.
"""
from limid.compile import compile_limid, reduce
from limid.model import (
    Limid, LimidError, Policy, Strategy, load_limid, parse_limid, serialize_limid,
    uniform_policy, validate,
)
from limid.spu import SolveResult, solve, solve_soluble, spu_general
from limid.tables import OpCounter, Table

__all__ = [
    "Limid", "LimidError", "OpCounter", "Policy", "SolveResult", "Strategy", "Table",
    "compile_limid", "load_limid", "parse_limid", "reduce", "serialize_limid", "solve",
    "solve_soluble", "spu_general", "uniform_policy", "validate",
]
__version__ = "0.1.0"

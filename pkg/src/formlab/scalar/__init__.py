"""Symbolic scalar kernel: expressions, parsing, calculus and zero testing."""
from .expr import (BUILTINS, MINUS_ONE, ONE, ZERO, Builtin, Expr, Opaque, Power,
                   Product, RationalConst, Sum, Symbol, as_expr, const, cos, exp,
                   from_monomials, is_constant, ln, monomials, normalize, opaque,
                   sin, sym, symbols)
from .parser import parse_expr, parse_raw, tokenize
from .printer import to_text
from .calculus import (ZeroVerdict, antiderivative, as_polynomial, combine_verdicts,
                       differentiate, evaluate_numeric, expand_log, is_zero, lambdify,
                       substitute)

__all__ = [
    "BUILTINS", "MINUS_ONE", "ONE", "ZERO", "Builtin", "Expr", "Opaque", "Power",
    "Product", "RationalConst", "Sum", "Symbol", "ZeroVerdict", "antiderivative",
    "as_expr", "as_polynomial", "combine_verdicts", "const", "cos", "differentiate",
    "evaluate_numeric", "exp", "expand_log", "from_monomials", "is_constant", "is_zero",
    "lambdify", "ln", "monomials", "normalize", "opaque", "parse_expr", "parse_raw",
    "sin", "substitute", "sym", "symbols", "to_text", "tokenize",
]

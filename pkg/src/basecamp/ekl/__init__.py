"""Tensor kernel language frontend.

Parses `.ekl` sources into a text-backed AST, type-checks them into a
TypedProgram (shapes, free/reduce index sets, element types), and pretty
prints canonically. The grammar is documented in docs/ekl-grammar.ebnf.
"""

from .ast import (
    Access, Assign, BinOp, Compare, ConstDecl, Construct, IndexDecl, Num,
    Program, Ref, ScalarDecl, Select, TensorDecl, pretty_print,
)
from .lexer import EklSyntaxError
from .parser import parse_kernel
from .analyze import EklTypeError, Symbol, TypedProgram, TypedStmt, analyze

__all__ = [
    "Access", "Assign", "BinOp", "Compare", "ConstDecl", "Construct",
    "IndexDecl", "Num", "Program", "Ref", "ScalarDecl", "Select",
    "TensorDecl", "pretty_print", "EklSyntaxError", "parse_kernel",
    "EklTypeError", "Symbol", "TypedProgram", "TypedStmt", "analyze",
]

"""Recursive-descent parser for the kernel language.

Produces the text-backed AST in ast.py. Precedence: '*' binds tighter
than '+'/'-', both left-associative; comparisons appear only inside
select(cond, a, b). A '[...]' in expression position is an in-place
construction; on the left of '=' it is the statement's index list.
"""

from __future__ import annotations

from typing import Union

from .ast import (
    Access, Assign, BinOp, Compare, ConstDecl, Construct, Expr, IndexDecl,
    Num, Program, Ref, ScalarDecl, Select, TensorDecl,
)
from .lexer import EklSyntaxError, Token, tokenize

_DECL_KEYWORDS = ("const", "index", "tensor", "scalar", "parallel")
_CMP_OPS = ("<=", "<", ">=", ">", "=", "==", "!=")


def _describe(t: Token) -> str:
    if t.kind == "eof":
        return "end of input"
    if t.kind == "newline":
        return "end of line"
    return f"'{t.text}'"


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, *kinds: str) -> Token:
        t = self.peek()
        if t.kind not in kinds:
            raise EklSyntaxError(f"unexpected {_describe(t)}", t.span,
                                 frozenset(kinds))
        return self.next()

    def skip_newlines(self) -> None:
        while self.peek().kind == "newline":
            self.next()

    # -- declarations ------------------------------------------------------

    def parse_extent(self) -> Union[int, str]:
        t = self.expect("intlit", "name")
        return int(t.text) if t.kind == "intlit" else t.text

    def parse_elem_type(self) -> str:
        t = self.expect("int", "f64", "fixed", "float")
        if t.kind in ("int", "f64"):
            return t.kind
        # fixed:<i>:<f> or float:<e>:<m>
        self.expect(":")
        a = self.expect("intlit")
        self.expect(":")
        b = self.expect("intlit")
        return f"{t.kind}:{a.text}:{b.text}"

    def parse_declaration(self):
        t = self.next()
        if t.kind == "const":
            name = self.expect("name")
            self.expect("=")
            val = self.expect("intlit")
            self.expect(";")
            return ConstDecl(name.text, int(val.text), span=t.span)
        parallel = False
        if t.kind == "parallel":
            parallel = True
            t2 = self.expect("index")
            t = t2
        if t.kind == "index":
            name = self.expect("name")
            self.expect(":")
            extent = self.parse_extent()
            self.expect(";")
            return IndexDecl(name.text, extent, parallel, span=t.span)
        if t.kind == "tensor":
            name = self.expect("name")
            self.expect(":")
            self.expect("[")
            dims = [self.parse_extent()]
            while self.peek().kind == ",":
                self.next()
                dims.append(self.parse_extent())
            self.expect("]")
            elem = None
            if self.peek().kind == "of":
                self.next()
                elem = self.parse_elem_type()
            self.expect(";")
            return TensorDecl(name.text, tuple(dims), elem, span=t.span)
        if t.kind == "scalar":
            name = self.expect("name")
            elem = None
            if self.peek().kind == ":":
                self.next()
                elem = self.parse_elem_type()
            self.expect(";")
            return ScalarDecl(name.text, elem, span=t.span)
        raise EklSyntaxError(f"unexpected '{t.text}'", t.span,
                             frozenset(_DECL_KEYWORDS))

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.next()
            right = self.parse_term()
            left = BinOp(op.kind, left, right, span=op.span)
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while self.peek().kind == "*":
            op = self.next()
            right = self.parse_factor()
            left = BinOp("*", left, right, span=op.span)
        return left

    def parse_factor(self) -> Expr:
        t = self.peek()
        if t.kind == "intlit":
            self.next()
            return Num(int(t.text), span=t.span)
        if t.kind == "floatlit":
            self.next()
            return Num(float(t.text), span=t.span)
        if t.kind == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if t.kind == "[":
            self.next()
            elems = [self.parse_expr()]
            while self.peek().kind == ",":
                self.next()
                elems.append(self.parse_expr())
            self.expect("]")
            return Construct(tuple(elems), span=t.span)
        if t.kind == "select":
            self.next()
            self.expect("(")
            cond = self.parse_condition()
            self.expect(",")
            then = self.parse_expr()
            self.expect(",")
            other = self.parse_expr()
            self.expect(")")
            return Select(cond, then, other, span=t.span)
        if t.kind == "name":
            self.next()
            if self.peek().kind == "[":
                self.next()
                subs = [self.parse_expr()]
                while self.peek().kind == ",":
                    self.next()
                    subs.append(self.parse_expr())
                self.expect("]")
                return Access(t.text, tuple(subs), span=t.span)
            return Ref(t.text, span=t.span)
        raise EklSyntaxError(
            f"unexpected {_describe(t)}", t.span,
            frozenset({"name", "number", "(", "[", "select"}))

    def parse_condition(self) -> Compare:
        left = self.parse_expr()
        t = self.expect(*_CMP_OPS)
        op = "=" if t.kind == "==" else t.kind
        right = self.parse_expr()
        return Compare(op, left, right, span=t.span)

    # -- statements --------------------------------------------------------

    def parse_statement(self) -> Assign:
        name = self.expect("name")
        indices = None
        if self.peek().kind == "[":
            self.next()
            ids = [self.expect("name").text]
            while self.peek().kind == ",":
                self.next()
                ids.append(self.expect("name").text)
            self.expect("]")
            indices = tuple(ids)
        self.expect("=")
        rhs = self.parse_expr()
        self.expect("newline", "eof")
        return Assign(name.text, indices, rhs, span=name.span)

    def parse_program(self) -> Program:
        decls = []
        stmts = []
        self.skip_newlines()
        while self.peek().kind in _DECL_KEYWORDS:
            decls.append(self.parse_declaration())
            self.skip_newlines()
        while self.peek().kind != "eof":
            stmts.append(self.parse_statement())
            self.skip_newlines()
        return Program(tuple(decls), tuple(stmts))


def parse_kernel(source: str) -> Program:
    """Parse kernel source text into an AST; raises EklSyntaxError."""
    return _Parser(tokenize(source)).parse_program()

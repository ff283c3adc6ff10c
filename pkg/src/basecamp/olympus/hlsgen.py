"""C text generation for a compiled kernel.

The output is plain C99 built for inspection and for differential
testing against the reference interpreter: inputs and outputs arrive
as flat row-major double arrays, intermediates are static arrays, and
every loop nest mirrors the statement's free-then-reduce index order
exactly.  Values stored to a low-precision tensor pass through a
rounding helper whose arithmetic matches the interpreter's store-time
quantization bit for bit (nearbyint under the default rounding mode is
round-half-to-even).  The text is a pure function of (IR, config):
emitting twice yields identical bytes.
"""

from __future__ import annotations

from ..numerics import NumericFormat
from ..tensorir.ir import (
    BinExpr,
    ConstExpr,
    IxGather,
    IxRef,
    IxShift,
    KernelIR,
    ReadExpr,
    SelectExpr,
    Statement,
    TensorDef,
)
from .planner_types import KernelConfig

_CMP = {"<=": "<=", "<": "<", ">=": ">=", ">": ">", "=": "==", "!=": "!="}


def _helper_name(fmt: NumericFormat) -> str:
    if fmt.kind == "fixed":
        return f"q_fix_{fmt.int_bits}_{fmt.frac_bits}"
    return f"q_flt_{fmt.exp_bits}_{fmt.mantissa_bits}"


def _fixed_helper(fmt: NumericFormat) -> str:
    scale = float(1 << fmt.frac_bits)
    hi = float((1 << (fmt.bit_width - 1)) - 1)
    lo = float(-(1 << (fmt.bit_width - 1)))
    name = _helper_name(fmt)
    return (
        f"static double {name}(double x) {{\n"
        f"    double s = nearbyint(x * {scale!r});\n"
        f"    if (s > {hi!r}) s = {hi!r};\n"
        f"    if (s < {lo!r}) s = {lo!r};\n"
        f"    return s / {scale!r};\n"
        f"}}\n")


def _minifloat_helper(fmt: NumericFormat) -> str:
    e, m = fmt.exp_bits, fmt.mantissa_bits
    bias = (1 << (e - 1)) - 1
    min_exp = 1 - bias
    max_exp = (1 << e) - 2 - bias
    max_val = (2.0 - 2.0 ** (-m)) * 2.0 ** max_exp
    name = _helper_name(fmt)
    return (
        f"static double {name}(double x) {{\n"
        f"    if (isnan(x)) return x;\n"
        f"    double a = fabs(x);\n"
        f"    int e2 = 0;\n"
        f"    frexp(a, &e2);\n"
        f"    int expo = e2 - 1;\n"
        f"    if (expo < {min_exp}) expo = {min_exp};\n"
        f"    if (expo > {max_exp}) expo = {max_exp};\n"
        f"    double step = ldexp(1.0, expo - {m});\n"
        f"    double q = nearbyint(a / step) * step;\n"
        f"    if (q > {max_val!r}) q = {max_val!r};\n"
        f"    return copysign(q, x);\n"
        f"}}\n")


def _flat_index(td: TensorDef, subs: list[str]) -> str:
    if not subs:
        return "0"
    acc = subs[0]
    for dim, s in zip(td.shape[1:], subs[1:]):
        acc = f"({acc}) * {dim} + {s}"
    return acc


class _Emitter:
    def __init__(self, ir: KernelIR):
        self.ir = ir

    def sub(self, s) -> str:
        if isinstance(s, IxRef):
            return s.index
        if isinstance(s, IxShift):
            return f"{s.index} + {s.offset}"
        assert isinstance(s, IxGather)
        return f"(int)({self.read(s.read)})"

    def read(self, e: ReadExpr) -> str:
        td = self.ir.tensors[e.tensor]
        subs = [self.sub(s) for s in e.subs]
        return f"{e.tensor}[{_flat_index(td, subs)}]"

    def expr(self, e) -> str:
        if isinstance(e, ConstExpr):
            return repr(float(e.value))
        if isinstance(e, ReadExpr):
            return self.read(e)
        if isinstance(e, BinExpr):
            return f"({self.expr(e.left)} {e.op} {self.expr(e.right)})"
        assert isinstance(e, SelectExpr)
        cond = f"{self.expr(e.lhs)} {_CMP[e.cmp]} {self.expr(e.rhs)}"
        return f"(({cond}) ? ({self.expr(e.then)}) : ({self.expr(e.other)}))"

    def store_wrap(self, td: TensorDef, value: str) -> str:
        if td.integer or td.fmt is None or td.fmt.kind == "ieee-double":
            return value
        return f"{_helper_name(td.fmt)}({value})"

    def statement(self, st: Statement, indent: str) -> list[str]:
        td = self.ir.tensors[st.output]
        lines: list[str] = []
        free = list(st.free)
        if st.elements is not None:
            free = free[:-1]  # the trailing slot axis is unrolled below
        pad = indent
        for name, extent in free:
            lines.append(
                f"{pad}for (int {name} = 0; {name} < {extent}; ++{name}) {{")
            pad += "    "
        out_subs = [n for n, _ in free]
        if st.elements is not None:
            for k, el in enumerate(st.elements):
                idx = _flat_index(td, out_subs + [str(k)])
                val = self.store_wrap(td, self.expr(el))
                lines.append(f"{pad}{st.output}[{idx}] = {val};")
        elif st.reduce:
            lines.append(f"{pad}double acc = 0.0;")
            rpad = pad
            for name, extent in st.reduce:
                lines.append(
                    f"{rpad}for (int {name} = 0; {name} < {extent}; "
                    f"++{name}) {{")
                rpad += "    "
            lines.append(f"{rpad}acc += {self.expr(st.expr)};")
            for _ in st.reduce:
                rpad = rpad[:-4]
                lines.append(f"{rpad}}}")
            idx = _flat_index(td, out_subs)
            lines.append(
                f"{pad}{st.output}[{idx}] = {self.store_wrap(td, 'acc')};")
        else:
            idx = _flat_index(td, out_subs)
            val = self.store_wrap(td, self.expr(st.expr))
            lines.append(f"{pad}{st.output}[{idx}] = {val};")
        for _ in free:
            pad = pad[:-4]
            lines.append(f"{pad}}}")
        return lines


def emit_hls_c(ir: KernelIR, cfg: KernelConfig) -> str:
    em = _Emitter(ir)
    inputs = [t for t in ir.tensors.values() if t.role == "input"]
    outputs = [t for t in ir.tensors.values() if t.role == "output"]
    inner = [t for t in ir.tensors.values()
             if t.role not in ("input", "output")]

    fmts: dict[str, NumericFormat] = {}
    for t in ir.tensors.values():
        if t.fmt is not None and t.fmt.kind != "ieee-double" and not t.integer:
            fmts[_helper_name(t.fmt)] = t.fmt

    lines: list[str] = []
    lines.append(f"/* kernel: {ir.name} */")
    lines.append("/* generated text; edits will be overwritten */")
    lines.append(f"/* #pragma olympus replicate R={cfg.replication} */")
    lines.append(f"/* #pragma olympus pack P={cfg.packing} */")
    lines.append("/* #pragma olympus double_buffer "
                 + ("on" if cfg.double_buffered else "off") + " */")
    lines.append(f"/* #pragma olympus tile {cfg.tile_elements} */")
    lines.append("")
    lines.append("#include <math.h>")
    lines.append("")
    for name in sorted(fmts):
        helper = (_fixed_helper(fmts[name]) if fmts[name].kind == "fixed"
                  else _minifloat_helper(fmts[name]))
        lines.extend(helper.rstrip().splitlines())
        lines.append("")
    for t in inner:
        lines.append(f"static double {t.name}[{max(1, t.size)}];")
    if inner:
        lines.append("")

    params = [f"const double *{t.name}" for t in inputs]
    params += [f"double *{t.name}" for t in outputs]
    lines.append(f"void {ir.name}({', '.join(params)}) {{")
    for i, st in enumerate(ir.statements):
        if i:
            lines.append("")
        head = ", ".join(n for n, _ in st.free) or "scalar"
        lines.append(f"    /* {st.output}[{head}] */")
        lines.extend(em.statement(st, "    "))
    lines.append("}")
    return "\n".join(lines) + "\n"

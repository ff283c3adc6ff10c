"""Frontend tests: lexing, parsing, canonical printing, analysis."""

import random

import pytest

from basecamp.ekl import (
    EklSyntaxError, EklTypeError, analyze, parse_kernel, pretty_print,
)
from basecamp.ekl.fixture import FIXTURE_SOURCE
from basecamp.numerics import F64, parse_format

from gen import gen_kernel

HEADER = """\
const N = 4;
parallel index i : N;
index r : N;
tensor a : [N];
tensor b : [N, N];
tensor m : [N] of int;
scalar s;
"""


def _analyze(body: str, **kw):
    return analyze(parse_kernel(HEADER + body), **kw)


# -- parse / print round trips ---------------------------------------------


def test_fixture_parses_and_round_trips():
    p1 = parse_kernel(FIXTURE_SOURCE)
    text = pretty_print(p1)
    p2 = parse_kernel(text)
    assert p1 == p2
    # canonical form is a fixed point of another print/parse cycle
    assert pretty_print(p2) == text


def test_generated_kernels_round_trip():
    rng = random.Random(11)
    for _ in range(25):
        src, _ = gen_kernel(rng)
        p1 = parse_kernel(src)
        assert parse_kernel(pretty_print(p1)) == p1


def test_right_assoc_parens_survive():
    src = HEADER + "out[i] = a[i] - (a[i] - s)\n"
    p = parse_kernel(src)
    assert "- (" in pretty_print(p)
    assert parse_kernel(pretty_print(p)) == p


def test_comments_and_blank_lines_ignored():
    src = HEADER + "\n# trailing comment\nout[i] = a[i] * s  # speed\n\n"
    assert analyze(parse_kernel(src)).statements[0].output == "out"


# -- syntax errors ---------------------------------------------------------


def test_lexer_rejects_stray_character():
    with pytest.raises(EklSyntaxError):
        parse_kernel(HEADER + "out[i] = a[i] @ s\n")


def test_parser_rejects_missing_semicolon():
    with pytest.raises(EklSyntaxError):
        parse_kernel("const N = 4\nparallel index i : N;\n")


def test_parser_rejects_unclosed_bracket():
    with pytest.raises(EklSyntaxError):
        parse_kernel(HEADER + "out[i] = a[i\n")


def test_parser_rejects_statement_before_decls_end():
    with pytest.raises(EklSyntaxError):
        parse_kernel("out[i] = ;\n")


# -- analysis: shapes, roles, free/reduce ----------------------------------


def test_fixture_analysis_shapes():
    tp = analyze(parse_kernel(FIXTURE_SOURCE))
    by_name = {st.output: st for st in tp.statements}
    final = by_name["tau_abs"]
    assert final.free == (("x", 16), ("g", 16))
    assert final.reduce == (("t", 2), ("p", 2), ("e", 2))
    assert final.shape == (16, 16)
    assert not final.integer
    assert by_name["i_T"].shape == (2,)
    assert by_name["i_T"].integer
    assert by_name["i_eta"].construct_len == 2
    assert [s.name for s in tp.outputs()] == ["tau_abs"]


def test_fixture_formats_follow_declarations():
    fmt = parse_format("fixed:8:8")
    tp = analyze(parse_kernel(FIXTURE_SOURCE), default_format=fmt)
    sym = tp.symbols
    assert sym["p_lev"].fmt == fmt          # bare tensor takes the default
    assert sym["k_major"].fmt == F64        # spelled f64 stays pinned
    assert sym["strato"].fmt == F64
    assert sym["j_T"].integer and sym["j_T"].fmt is None
    assert sym["tau_abs"].fmt == fmt        # fresh intermediate, default


def test_omitted_index_list_uses_declaration_order():
    tp = _analyze("out = b[i, i]\n")
    assert tp.statements[0].free == (("i", 4),)
    tp = analyze(parse_kernel(
        "const N = 3;\nparallel index j : N;\nparallel index i : N;\n"
        "tensor b : [N, N];\nout = b[i, j]\n"))
    # j was declared first, so it leads even though i appears first
    assert tp.statements[0].free == (("j", 3), ("i", 3))


def test_omitted_index_list_requires_parallel():
    with pytest.raises(EklTypeError, match="non-parallel"):
        _analyze("out = a[r]\n")


def test_explicit_free_list_orders_iteration():
    tp = _analyze("out[i] = b[i, r]\n")
    st = tp.statements[0]
    assert st.free == (("i", 4),)
    assert st.reduce == (("r", 4),)


def test_parallel_index_can_still_reduce():
    # free list omits i explicitly, so i reduces even though parallel
    tp = analyze(parse_kernel(
        "const N = 4;\nparallel index i : N;\nindex r : N;\n"
        "tensor b : [N, N];\nout[r] = b[r, i]\n"))
    assert tp.statements[0].reduce == (("i", 4),)


def test_declared_tensor_claimed_as_output():
    tp = _analyze("tensor out : [N] of fixed:4:4;\nout[i] = a[i] * s\n")
    sym = tp.symbols["out"]
    assert sym.role == "output"
    assert sym.fmt == parse_format("fixed:4:4")


def test_scalar_statement_has_empty_shape():
    tp = _analyze("t0[i] = a[i] * s\nanswer = s * s\nout[i] = t0[i] * answer\n")
    assert tp.statements[1].shape == ()
    assert tp.statements[1].free == ()
    assert [s.name for s in tp.outputs()] == ["out"]


def test_gather_needs_integer_tensor():
    with pytest.raises(EklTypeError, match="non-integer"):
        _analyze("out[i] = a[a[i]]\n")


def test_subscript_shift_bounds_checked():
    with pytest.raises(EklTypeError, match="past dim"):
        _analyze("out[i] = a[i + 1]\n")
    ok = analyze(parse_kernel(
        "const N = 4;\nconst M = 5;\nparallel index i : N;\n"
        "tensor a : [M];\nout[i] = a[i + 1]\n"))
    assert ok.statements[0].shape == (4,)


def test_subscript_negative_shift_rejected():
    with pytest.raises(EklTypeError, match="negative"):
        _analyze("out[i] = a[i - 1]\n")


def test_subscript_constant_only_rejected():
    with pytest.raises(EklTypeError, match="no index"):
        _analyze("out[i] = b[i, 0]\n")


def test_subscript_two_indices_rejected():
    with pytest.raises(EklTypeError, match="more than one index"):
        _analyze("out[i] = a[i + r]\n")


def test_rank_mismatch():
    with pytest.raises(EklTypeError, match="rank"):
        _analyze("out[i] = a[i, i]\n")


def test_extent_mismatch():
    with pytest.raises(EklTypeError, match="extent"):
        analyze(parse_kernel(
            "const N = 4;\nconst M = 5;\nparallel index i : N;\n"
            "index k : M;\ntensor a : [N];\nout[i] = a[k]\n"))


def test_duplicate_declaration():
    with pytest.raises(EklTypeError, match="duplicate"):
        _analyze("tensor a : [N];\nout[i] = a[i]\n")


def test_reserved_prefix_rejected():
    with pytest.raises(EklTypeError, match="reserved"):
        _analyze("__x[i] = a[i]\n")


def test_undeclared_name():
    with pytest.raises(EklTypeError, match="undeclared"):
        _analyze("out[i] = zz[i]\n")


def test_index_used_as_value():
    with pytest.raises(EklTypeError, match="used as a value"):
        _analyze("out[i] = a[i] * i\n")


def test_tensor_used_without_subscripts():
    with pytest.raises(EklTypeError, match="without subscripts"):
        _analyze("out[i] = a[i] * b\n")


def test_construct_only_at_statement_level():
    with pytest.raises(EklTypeError, match="entire statement"):
        _analyze("out[i] = a[i] + [s, s]\n")


def test_construct_index_list_must_match():
    with pytest.raises(EklTypeError, match="missing i"):
        _analyze("out[r] = [a[i], s]\n")
    with pytest.raises(EklTypeError, match="unused i"):
        _analyze("out[i] = [s, s]\n")


def test_construct_with_omitted_index_list():
    tp = _analyze("out = [a[i], s]\n")
    assert tp.statements[0].shape == (4, 2)


def test_construct_shape_appends_axis():
    tp = _analyze("out[i] = [a[i], a[i] + s]\n")
    assert tp.statements[0].shape == (4, 2)
    assert tp.statements[0].construct_len == 2


def test_float_into_int_tensor_rejected():
    with pytest.raises(EklTypeError, match="int tensor"):
        _analyze("tensor out2 : [N] of int;\nout2[i] = a[i]\n")


def test_declared_shape_must_match_statement():
    with pytest.raises(EklTypeError, match="shape"):
        _analyze("tensor out : [N, N];\nout[i] = a[i]\n")


def test_rewrite_of_assigned_name_rejected():
    with pytest.raises(EklTypeError, match="duplicate"):
        _analyze("t0[i] = a[i]\nt0[i] = a[i] * s\n")


def test_lhs_index_must_be_declared():
    with pytest.raises(EklTypeError, match="not a declared index"):
        _analyze("out[z] = a[i]\n")


def test_lhs_index_repeat_rejected():
    with pytest.raises(EklTypeError, match="repeated"):
        _analyze("out[i, i] = b[i, i]\n")


def test_empty_kernel_rejected():
    with pytest.raises(EklTypeError, match="no statements"):
        analyze(parse_kernel("const N = 4;\n"))


def test_bad_element_format_reported_at_declaration():
    # shape-valid spelling, out-of-range parameters: caught at analysis
    with pytest.raises(EklTypeError, match="exp_bits"):
        _analyze("tensor z : [N] of float:1:2;\nout[i] = z[i]\n")
    with pytest.raises(EklSyntaxError):
        parse_kernel(HEADER + "tensor z : [N] of fixed:9;\nout[i] = z[i]\n")


def test_extent_constant_required():
    with pytest.raises(EklTypeError, match="not a declared extent"):
        analyze(parse_kernel(
            "parallel index i : Q;\ntensor a : [Q];\nout[i] = a[i]\n"))

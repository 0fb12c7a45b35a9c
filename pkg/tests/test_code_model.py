import pytest

from perfpatch.code_model import call_graph, normalize_body, pair_methods, parse_parts, parse_source, strip_comments
from perfpatch.code_model.syntax import parse_fragment
from perfpatch.errors import PerfPatchError

SRC = """using System;
using System.Linq;

namespace N
{
    public class A
    {
        private int _n = 3;
        public int Size { get; set; }

        public int F(int x) { return G(x) + 1; }
        public int G(int y) => y * _n;
        public int G(int y, int z) { return y + z; }
        public static void H(params int[] xs) { }
        public A(int n) { _n = n; }
    }
}
"""


def test_parse_source_structure():
    unit = parse_source(SRC)
    assert unit.using_statements == ["using System;", "using System.Linq;"]
    (cls,) = unit.classes
    assert [m.signature for m in cls.methods] == [
        "int F(int)", "int G(int)", "int G(int,int)", "void H(params int[])", ".ctor A(int)",
    ]
    assert [a.names for a in cls.attributes] == [("_n",), ("Size",)]


def test_call_graph_respects_arity():
    unit = call_graph(parse_source(SRC))
    f = unit.find_method("int F(int)")[1]
    assert f.callees == {"int G(int)"}
    assert unit.find_method("int G(int)")[1].callers == {"int F(int)"}


def test_pairing_drops_unchanged_methods():
    before = parse_source(SRC)
    after = parse_source(SRC.replace("y * _n", "_n * y").replace("return G(x) + 1;", "// same\n return G(x) + 1;"))
    pairs = pair_methods(before, after)
    assert [p.signature for p in pairs] == ["int G(int)"]


def test_normalize_strips_comments_and_space():
    assert strip_comments('a /* b */ c // d\n"// kept"') .split() == ["a", "c", '"//', 'kept"']
    assert normalize_body("{\n  return   1; // x\n}") == normalize_body("{ return 1; }")


def test_parse_parts_splits_usings_and_members():
    parts = parse_parts("using System.Text;\n\nprivate int _x;\n\npublic int F() { return _x; }")
    assert parts.ok


def test_fragment_statements_fall_back_to_raw():
    frag = parse_fragment("int a = 0; return a;")
    assert frag.ok and not frag.wrapped


def test_keyword_identifier_is_not_ok():
    assert not parse_fragment("class C { return x; }").ok


def test_unparseable_source_raises():
    with pytest.raises(PerfPatchError):
        parse_source("}}}} ((( garbage")

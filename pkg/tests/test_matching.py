import random

import pytest

from perfpatch.code_model.abstraction import abstract_variables
from perfpatch.errors import AbstractionParseError
from perfpatch.metrics.matching import abstracted_match, canonical, is_abstracted, is_verbatim, verbatim_match

from corpus import TEMPLATES, fill, mutate, renaming_pair


def test_canonical_ignores_comments_and_layout():
    a = "int x = 1; // one\nreturn x;"
    b = "int x = 1;\n\n   /* note */ return   x;"
    assert is_verbatim(a, b)


def test_abstraction_numbers_by_encounter():
    assert abstract_variables("void F(int b) { int a = b + a; }") == "void F(int VAR_0) { int VAR_1 = VAR_0 + VAR_1; }"


def test_abstraction_keeps_members_and_types():
    out = abstract_variables("int Count(List<int> xs) { return xs.Count + _size; }")
    assert "List<int>" in out and ".Count" in out and "_size" in out
    assert "xs" not in out


def test_abstraction_rejects_garbage():
    with pytest.raises(AbstractionParseError):
        abstract_variables("int int int (((")


def test_renamed_variables_match_abstracted_not_verbatim():
    rng = random.Random(0)
    a, _ = fill(TEMPLATES[0], rng)
    b, _ = fill(TEMPLATES[0], rng)
    assert not is_verbatim(a, b)
    assert is_abstracted(a, b)


def test_renaming_invariance_randomized():
    rng = random.Random(11)
    for _ in range(200):
        a, b = renaming_pair(rng)
        other = mutate(rng.choice(TEMPLATES).format(a="p", b="q", c="r"), rng)
        assert is_abstracted(a, other) == is_abstracted(b, other)


def test_verbatim_implies_abstracted_even_for_unparsable():
    assert is_abstracted("{{{ oops", "{{{ oops")


def test_list_variants():
    assert verbatim_match(["x", "return 1;"], "return 1;")
    assert abstracted_match(["int a = 0; return a;"], "int b = 0; return b;")
    assert not abstracted_match([], "return 1;")


def test_canonical_idempotent():
    s = "int a = 1; /* c */\n return a;"
    assert canonical(canonical(s)) == canonical(s)

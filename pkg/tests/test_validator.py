import sys

import pytest

from perfpatch.errors import CommandNotFound, ConfigError, SpliceFailure, StageTimeout
from perfpatch.fixtures.minirepo import SOURCE_PATH
from perfpatch.suggest.engine import Suggestion
from perfpatch.validator import (
    ErrorCategory,
    Stage,
    ToolchainConfig,
    ValidationVerdict,
    apply_patch,
    categorize_compile_error,
    check_syntax,
    first_error_code,
    fixture_toolchain,
    read_verdicts,
    run_stage,
    select_methods,
    summarize,
    validate,
    validate_many,
    write_verdicts,
)

FILE = """using System;

public class C
{
    private int _n;

    public int F()
    {
        return 1;
    }

    public int G() => 2;
}
"""


@pytest.mark.parametrize("code,cat", [
    ("CS1061", ErrorCategory.UNDEFINED_IDENTIFIER),
    ("CS0103", ErrorCategory.UNDEFINED_IDENTIFIER),
    ("CS0246", ErrorCategory.UNDEFINED_IDENTIFIER),
    ("CS1503", ErrorCategory.INCORRECT_ARGUMENTS),
    ("CS1501", ErrorCategory.INCORRECT_ARGUMENTS),
    ("CS0234", ErrorCategory.INCORRECT_USING),
    ("CS0266", ErrorCategory.TYPE_MISMATCH),
    ("CS9999", ErrorCategory.OTHER),
    (None, ErrorCategory.OTHER),
])
def test_categories(code, cat):
    assert categorize_compile_error(code) is cat


def test_first_error_code_prefers_errors_over_warnings():
    out = "a.cs(1,1): warning CS0168: unused\na.cs(2,2): error CS1061: nope\n"
    assert first_error_code(out) == "CS1061"
    assert first_error_code("nothing here") is None


@pytest.mark.parametrize("patch,ok", [
    ("public int F() { return 2; }", True),
    ("using System.Linq;\n\nprivate int _m;\n\npublic int F() { return _m; }", True),
    ("public int F() { return 2 }", False),
    ("", False),
    ("private int _m;", False),
    ("return 2;", False),
])
def test_check_syntax(patch, ok):
    assert check_syntax(patch)[0] is ok


def test_apply_patch_replaces_focal_and_adds_parts():
    patch = "using System.Text;\n\nprivate int _m = 4;\n\npublic int F()\n{\n    return _m;\n}\n\npublic int H() { return 5; }"
    out = apply_patch(FILE, patch, "int F()")
    assert "return 1;" not in out
    assert out.index("using System;") < out.index("using System.Text;") < out.index("public class C")
    assert out.index("private int _n;") < out.index("private int _m = 4;") < out.index("public int F()")
    assert "public int H() { return 5; }" in out and "public int G() => 2;" in out
    assert check_syntax(patch)[0]


def test_apply_patch_replaces_existing_attribute_and_keeps_present_usings():
    out = apply_patch(FILE, "using System;\n\nprivate int _n = 9;\n\npublic int F() { return _n; }", "int F()")
    assert out.count("using System;") == 1
    assert out.count("_n") == 2 and "private int _n = 9;" in out


def test_apply_patch_missing_focal():
    with pytest.raises(SpliceFailure):
        apply_patch(FILE, "public int Z() { return 0; }", "int Z()")


def test_toolchain_ini(tmp_path):
    p = tmp_path / "tc.ini"
    p.write_text("[toolchain]\ncompile_command = make -C {tree}\nunit_test_command = make -C {tree} test\n"
                 "compile_timeout = 5\n", encoding="utf-8")
    tc = ToolchainConfig.from_file(p)
    assert tc.compile_timeout == 5.0 and tc.bench_command == ""
    p.write_text("[toolchain]\ncompile_command = make\nunit_test_command = x {tree}\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ToolchainConfig.from_file(p)
    p.write_text("[toolchain]\ncompile_command = a {tree}\nunit_test_command = b {tree}\nbogus = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ToolchainConfig.from_file(p)


def test_run_stage_errors(tmp_path):
    with pytest.raises(CommandNotFound):
        run_stage(tmp_path, "definitely-not-a-command-xyz {tree}", 5)
    with pytest.raises(StageTimeout):
        run_stage(tmp_path, "{python} -c 'import time; time.sleep(5)' {tree}", 0.5)
    res = run_stage(tmp_path, "{python} -c 'import sys; print(sys.argv[1]); sys.exit(3)' {tree}", 5)
    assert res.exit_status == 3 and str(tmp_path) in res.output


def _sugg(text, sig, rank=1):
    return Suggestion(text, -0.1, "t", rank, "ex", sig, SOURCE_PATH)


def test_validate_stages(minirepo):
    tc = fixture_toolchain()
    cases = [
        (_sugg("public bool IsEmpty()\n{\n    return _words.Count == 0;\n}", "bool IsEmpty()", 1), Stage.PASSED_UNIT_TESTS, None),
        (_sugg("public bool IsEmpty()\n{\n    return _words.Count == 0\n}", "bool IsEmpty()", 2), Stage.SYNTAX_ERROR, None),
        (_sugg("public bool IsEmpty()\n{\n    return _words.Size == 0;\n}", "bool IsEmpty()", 3), Stage.COMPILATION_ERROR, "CS1061"),
        (_sugg("public bool IsEmpty()\n{\n    return _words.Count > 0;\n}", "bool IsEmpty()", 4), Stage.FAILED_UNIT_TESTS, None),
    ]
    verdicts = validate_many([c[0] for c in cases], minirepo, tc, workers=2)
    for v, (s, stage, code) in zip(verdicts, cases):
        assert v.suggestion_id == s.suggestion_id
        assert v.stage_reached is stage, v.logs
        assert v.first_error_code == code
    assert "<tree>" in verdicts[2].logs or "src/TextUtils.cs" in verdicts[2].logs
    # the source repository is untouched
    assert "!_words.Any()" in (minirepo / SOURCE_PATH).read_text(encoding="utf-8")


def test_splice_failure_is_compile_other(minirepo):
    v = validate(_sugg("public bool Missing() { return true; }", "bool Missing()"), minirepo, fixture_toolchain())
    assert v.stage_reached is Stage.COMPILATION_ERROR and v.error_category is ErrorCategory.OTHER


def test_missing_tool_is_recorded(minirepo):
    tc = ToolchainConfig("no-such-compiler-xyz {tree}", "true {tree}")
    v = validate(_sugg("public bool IsEmpty() { return false; }", "bool IsEmpty()"), minirepo, tc)
    assert v.stage_reached is Stage.COMPILATION_ERROR and "not found" in v.logs


def test_verdict_invariant_and_roundtrip(tmp_path):
    with pytest.raises(ValueError):
        ValidationVerdict("s", Stage.SYNTAX_ERROR, ErrorCategory.OTHER)
    with pytest.raises(ValueError):
        ValidationVerdict("s", Stage.COMPILATION_ERROR)
    vs = [ValidationVerdict("a", "CompilationError", "TypeMismatch", "CS0266"), ValidationVerdict("b", "PassedUnitTests")]
    write_verdicts(vs, tmp_path / "v.jsonl")
    assert read_verdicts(tmp_path / "v.jsonl") == vs
    s = summarize(vs)
    assert s.total == 2 and s.category_counts["TypeMismatch"] == 1 and s.error_codes == {"CS0266": 1}


def test_select_methods(tmp_path):
    p = tmp_path / "cov.json"
    p.write_text('{"methods": [{"file": "a.cs", "signature": "void F()", "line_coverage": 0.9, "on_benchmark_path": true},'
                 '{"file": "a.cs", "signature": "void G()", "line_coverage": 0.5, "on_benchmark_path": true},'
                 '{"file": "a.cs", "signature": "void H()", "line_coverage": 1.0, "on_benchmark_path": false}]}',
                 encoding="utf-8")
    assert [m["signature"] for m in select_methods(p)] == ["void F()"]


def test_python_is_current_interpreter(tmp_path):
    res = run_stage(tmp_path, "{python} -c 'import sys; print(sys.executable)' {tree}", 5)
    assert res.output.strip() == sys.executable

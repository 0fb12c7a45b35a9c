import pytest

from perfpatch.bench_stats import judge, parse_summary_text
from perfpatch.minisharp.__main__ import main
from perfpatch.minisharp.bench import run_benchmarks, summary_text
from perfpatch.minisharp.checker import check_project
from perfpatch.minisharp.project import load_project

LIB = """using System;
using System.Collections.Generic;
using System.Linq;
using System.Text;

namespace Lib
{
    public class Calc
    {
        private readonly List<int> _xs = new List<int>();
        public int Size => _xs.Count;

        public void Add(int x) { _xs.Add(x); }
        public int Sum() { return _xs.Sum(); }
        public static int Div(int a, int b) => a / b;
        %s
    }
}
"""


def project(tmp_path, extra_member="", tests=None, bench=None):
    (tmp_path / "src").mkdir(exist_ok=True)
    (tmp_path / "src" / "Calc.cs").write_text(LIB % extra_member, encoding="utf-8")
    if tests:
        (tmp_path / "tests").mkdir(exist_ok=True)
        (tmp_path / "tests" / "T.cs").write_text(tests, encoding="utf-8")
    if bench:
        (tmp_path / "bench").mkdir(exist_ok=True)
        (tmp_path / "bench" / "B.cs").write_text(bench, encoding="utf-8")
    return tmp_path


def codes(tmp_path, member):
    return [d.code for d in check_project(load_project(project(tmp_path, member)))]


def test_clean_project_builds(tmp_path):
    assert codes(tmp_path, "public string Show() { var sb = new StringBuilder(); sb.Append(Size); return sb.ToString(); }") == []


@pytest.mark.parametrize("member,code", [
    ("public int Bad() { return _xs.Length; }", "CS1061"),
    ("public int Bad() { return missing + 1; }", "CS0103"),
    ("public Widget Bad() { return null; }", "CS0246"),
    ("public int Bad() { int n = 3L; return n; }", "CS0266"),
    ("public int Bad() { int n = \"x\"; return n; }", "CS0029"),
    ("public int Bad() { return Div(\"a\", 1); }", "CS1503"),
    ("public int Bad() { return Div(1); }", "CS1501"),
])
def test_checker_codes(tmp_path, member, code):
    assert codes(tmp_path, member)[:1] == [code]


def test_bad_using_is_cs0234(tmp_path):
    p = project(tmp_path)
    src = p / "src" / "Calc.cs"
    src.write_text("using System.Linq.Nope;\n" + src.read_text(), encoding="utf-8")
    assert [d.code for d in check_project(load_project(p))] == ["CS0234"]


TESTS = """using System;
using System.Collections.Generic;
using System.Linq;
using System.Text;
using NUnit.Framework;
using Lib;

[TestFixture]
public class CalcTests
{
    private Calc _c;

    [SetUp]
    public void Init() { _c = new Calc(); _c.Add(3); _c.Add(4); }

    [Test]
    public void Arithmetic()
    {
        Assert.AreEqual(7, _c.Sum());
        Assert.AreEqual(2, Calc.Div(7, 3));
        Assert.AreEqual(-2, Calc.Div(-7, 3));
        Assert.AreEqual(1.75, 7 / 4.0);
    }

    [Test]
    public void Collections()
    {
        var d = new Dictionary<string, int> { ["a"] = 1 };
        d["b"] = d.TryGetValue("a", out int v) ? v + 1 : 0;
        Assert.AreEqual(2, d["b"]);
        var xs = new List<int> { 5, 1, 4 };
        Assert.AreEqual("1,4,5", string.Join(",", xs.OrderBy(x => x)));
        Assert.IsTrue(xs.Any(x => x > 4));
        Assert.AreEqual(4, xs.Where(x => x % 2 == 0).First());
    }

    [Test]
    public void Strings()
    {
        var sb = new StringBuilder();
        for (int i = 0; i < 3; i++) sb.Append(i);
        Assert.AreEqual("012", sb.ToString());
        Assert.AreEqual("x=3", $"x={_c.Size - 1 + 1 - 0 + 1}");
        Assert.AreEqual(new[] { "a", "b" }, "a,b".Split(','));
    }

    [Test]
    public void Exceptions()
    {
        Assert.Throws<DivideByZeroException>(() => Calc.Div(1, 0));
        string caught = "";
        try { throw new InvalidOperationException("boom"); }
        catch (InvalidOperationException e) { caught = e.Message; }
        Assert.AreEqual("boom", caught);
    }

    [TestCase(1, "odd")]
    [TestCase(2, "even")]
    public void Switch(int n, string want)
    {
        string got = (n % 2) switch { 0 => "even", _ => "odd" };
        Assert.AreEqual(want, got);
    }
}
"""


def test_interpreter_semantics(tmp_path, capsys):
    p = project(tmp_path, tests=TESTS)
    rc = main(["test", str(p)])
    out = capsys.readouterr().out
    assert rc == 0, out
    assert "Total: 6, Passed: 6, Failed: 0" in out


def test_failing_and_runaway_tests(tmp_path, capsys):
    tests = TESTS.replace("Assert.AreEqual(7, _c.Sum());", "Assert.AreEqual(8, _c.Sum());")
    tests = tests.replace("for (int i = 0; i < 3; i++) sb.Append(i);", "for (int i = 0; i < 3; i--) sb.Append(i);")
    p = project(tmp_path, tests=tests)
    assert main(["test", str(p)]) == 1
    out = capsys.readouterr().out
    assert "FAIL CalcTests.Arithmetic" in out and "FAIL CalcTests.Strings" in out
    assert "Passed: 4, Failed: 2" in out


def test_build_failure_stops_tests(tmp_path, capsys):
    p = project(tmp_path, "public int Bad() { return nope; }", tests=TESTS)
    assert main(["test", str(p)]) == 1
    out = capsys.readouterr().out
    assert "error CS0103" in out and "Build FAILED." in out and "Total:" not in out


BENCH = """using BenchmarkDotNet.Attributes;
using Lib;

[MemoryDiagnoser]
public class B
{
    private Calc _c;

    [GlobalSetup]
    public void Setup() { _c = new Calc(); for (int i = 0; i < 50; i++) _c.Add(i); }

    [Benchmark]
    public int Sum() => _c.Sum();
}
"""


def test_bench_is_deterministic_and_sensitive(tmp_path):
    p = project(tmp_path, bench=BENCH)
    a = summary_text(run_benchmarks(load_project(p)))
    b = summary_text(run_benchmarks(load_project(p)))
    assert a == b
    assert judge(parse_summary_text(a), parse_summary_text(b)).improved is False
    slow = BENCH.replace("=> _c.Sum();", "{ int s = 0; for (int k = 0; k < 10; k++) s = _c.Sum(); return s; }")
    (p / "bench" / "B.cs").write_text(slow, encoding="utf-8")
    c = summary_text(run_benchmarks(load_project(p)))
    (row_fast,), (row_slow,) = parse_summary_text(a), parse_summary_text(c)
    assert row_slow.mean > 5 * row_fast.mean
    assert judge([row_slow], [row_fast]).improved


def test_bench_cli_writes_file(tmp_path, capsys):
    p = project(tmp_path, bench=BENCH)
    out = tmp_path / "summary.csv"
    assert main(["bench", str(p), "--out", str(out), "--iterations", "5"]) == 0
    (row,) = parse_summary_text(out.read_text(encoding="utf-8"))
    assert row.benchmark_name == "Sum" and row.n == 5

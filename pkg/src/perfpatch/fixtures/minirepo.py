"""A small seeded C# repository with one planted performance commit.

The history is fixed (authors, dates, messages), so commit ids are stable
across machines for a given git version.
"""
from __future__ import annotations

import os
import subprocess
from pathlib import Path

PERF_MESSAGE = "Improve performance of IsEmpty: avoid enumerating the whole list"
SOURCE_PATH = "src/TextUtils.cs"
TEST_PATH = "tests/TextUtilsTests.cs"
BENCH_PATH = "bench/TextBench.cs"

_HEADER = """\
using System;
using System.Collections.Generic;
using System.Linq;

namespace MiniText
{
    public class TextUtils
    {
        private readonly List<string> _words;

        public TextUtils(IEnumerable<string> words)
        {
            _words = words.ToList();
        }

        public int WordCount => _words.Count;
"""

_IS_EMPTY_SLOW = """
        public bool IsEmpty()
        {
            return _words.Count() == 0;
        }
"""

_IS_EMPTY_FAST = """
        public bool IsEmpty()
        {
            return !_words.Any();
        }
"""

_BODY = """
        public bool HasNoLongWords(int minLength)
        {
            return _words.Where(w => w.Length >= minLength).Count() == 0;
        }

        public string FindLong(int minLength)
        {
            return _words.Where(w => w.Length >= minLength).FirstOrDefault();
        }

        public static int CountUpper(string text)
        {
            int count = 0;
            foreach (char c in text.ToCharArray())
            {
                if (char.IsUpper(c))
                {
                    count++;
                }
            }
            return count;
        }

        public int CountSeparators()
        {
            int total = 0;
            foreach (string word in _words)
            {
                char[] separators = { ',', ';' };
                total += word.Split(separators).Length - 1;
            }
            return total;
        }

        public string Join(string separator)
        {
            string result = "";
            foreach (string word in _words)
            {
                result += word + separator;
            }
            return result;
        }
"""

_LONGEST = """
        public string Longest()
        {
            string best = "";
            foreach (string word in _words)
            {
                if (word.Length > best.Length)
                {
                    best = word;
                }
            }
            return best;
        }
"""

_FOOTER = """    }
}
"""

TESTS = """\
using NUnit.Framework;

namespace MiniText.Tests
{
    [TestFixture]
    public class TextUtilsTests
    {
        private static TextUtils Sample()
        {
            return new TextUtils(new[] { "alpha", "Beta", "a,b;c", "GAMMA" });
        }

        [Test]
        public void IsEmptyReportsContent()
        {
            Assert.IsFalse(Sample().IsEmpty());
            Assert.IsTrue(new TextUtils(new string[0]).IsEmpty());
        }

        [Test]
        public void WordCountMatchesInput()
        {
            Assert.AreEqual(4, Sample().WordCount);
        }

        [Test]
        public void HasNoLongWordsUsesThreshold()
        {
            Assert.IsTrue(Sample().HasNoLongWords(6));
            Assert.IsFalse(Sample().HasNoLongWords(5));
        }

        [Test]
        public void FindLongReturnsFirstMatch()
        {
            Assert.AreEqual("alpha", Sample().FindLong(5));
            Assert.IsNull(Sample().FindLong(9));
        }

        [Test]
        public void CountUpperCountsCapitals()
        {
            Assert.AreEqual(6, TextUtils.CountUpper("Beta GAMMA"));
        }

        [Test]
        public void CountSeparatorsCountsCommasAndSemicolons()
        {
            Assert.AreEqual(2, Sample().CountSeparators());
        }

        [Test]
        public void JoinAppendsSeparatorAfterEachWord()
        {
            Assert.AreEqual("alpha|Beta|a,b;c|GAMMA|", Sample().Join("|"));
        }

        [Test]
        public void LongestPrefersEarliest()
        {
            Assert.AreEqual("alpha", Sample().Longest());
        }
    }
}
"""

BENCH = """\
using System.Collections.Generic;
using BenchmarkDotNet.Attributes;

namespace MiniText.Bench
{
    [MemoryDiagnoser]
    public class TextBench
    {
        private TextUtils _utils;

        [GlobalSetup]
        public void Setup()
        {
            var words = new List<string>();
            for (int i = 0; i < 200; i++)
            {
                words.Add(i % 7 == 0 ? "Word" + i + ",x;y" : "Word" + i);
            }
            _utils = new TextUtils(words);
        }

        [Benchmark]
        public bool IsEmpty() => _utils.IsEmpty();

        [Benchmark]
        public bool HasNoLongWords() => _utils.HasNoLongWords(12);

        [Benchmark]
        public string FindLong() => _utils.FindLong(9);

        [Benchmark]
        public int CountUpper() => TextUtils.CountUpper("Benchmark Input With Several Upper Case Letters");

        [Benchmark]
        public int CountSeparators() => _utils.CountSeparators();

        [Benchmark]
        public string Join() => _utils.Join(",");

        [Benchmark]
        public string Longest() => _utils.Longest();
    }
}
"""


def text_utils(fast_is_empty: bool, with_longest: bool) -> str:
    return (
        _HEADER
        + (_IS_EMPTY_FAST if fast_is_empty else _IS_EMPTY_SLOW)
        + _BODY
        + (_LONGEST if with_longest else "")
        + _FOOTER
    )


# (message, files written in this commit)
HISTORY: tuple[tuple[str, dict[str, str]], ...] = (
    (
        "Add text utilities",
        {
            SOURCE_PATH: text_utils(False, False),
            "README.md": "# MiniText\n\nSmall string helpers.\n",
        },
    ),
    ("Add Longest helper with tests and benchmarks", {
        SOURCE_PATH: text_utils(False, True), TEST_PATH: TESTS, BENCH_PATH: BENCH,
    }),
    (PERF_MESSAGE, {SOURCE_PATH: text_utils(True, True)}),
    ("Document the helpers", {"README.md": "# MiniText\n\nSmall string helpers with tests and benchmarks.\n"}),
)


def _git(repo: Path, *args: str, env: dict[str, str]) -> None:
    subprocess.run(["git", *args], cwd=repo, env=env, check=True, capture_output=True)


def create_minirepo(dest: str | Path, branch: str = "main") -> Path:
    """Write the repository at ``dest`` (which must not exist or be empty)."""
    repo = Path(dest)
    repo.mkdir(parents=True, exist_ok=True)
    if any(repo.iterdir()):
        raise FileExistsError(f"{repo} is not empty")
    env = {
        **os.environ,
        "GIT_AUTHOR_NAME": "Mini Dev",
        "GIT_AUTHOR_EMAIL": "dev@example.invalid",
        "GIT_COMMITTER_NAME": "Mini Dev",
        "GIT_COMMITTER_EMAIL": "dev@example.invalid",
        "GIT_CONFIG_NOSYSTEM": "1",
        "HOME": str(repo),
    }
    _git(repo, "init", "-q", "-b", branch, env=env)
    _git(repo, "config", "core.autocrlf", "false", env=env)
    for i, (message, files) in enumerate(HISTORY):
        for rel, text in files.items():
            p = repo / rel
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8", newline="\n")
        stamp = f"2024-01-0{i + 1}T12:00:00+00:00"
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = stamp
        _git(repo, "add", "-A", env=env)
        _git(repo, "commit", "-q", "-m", message, env=env)
    (repo / ".gitconfig").unlink(missing_ok=True)
    return repo

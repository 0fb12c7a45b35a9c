"""``python -m perfpatch.minisharp build|test|bench TREE``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checker import check_project
from .project import load_project


def _build(tree: Path, stream=None) -> int:
    stream = stream or sys.stdout
    diags = check_project(load_project(tree))
    for d in diags:
        print(d, file=stream)
    print("Build FAILED." if diags else "Build succeeded.", file=stream)
    return 1 if diags else 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="python -m perfpatch.minisharp")
    ap.add_argument("command", choices=("build", "test", "bench"))
    ap.add_argument("tree", type=Path)
    ap.add_argument("--out", type=Path, help="write the bench summary here instead of stdout")
    ap.add_argument("--iterations", type=int, default=20)
    args = ap.parse_args(argv)
    sys.setrecursionlimit(20000)
    if args.command == "build":
        return _build(args.tree)
    if _build(args.tree, sys.stderr if args.command == "bench" else sys.stdout):
        return 1
    project = load_project(args.tree)
    if args.command == "test":
        from .interp import run_tests

        passed, failed = run_tests(project, sys.stdout)
        print(f"Total: {passed + failed}, Passed: {passed}, Failed: {failed}")
        return 1 if failed or not passed else 0
    from .bench import run_benchmarks, summary_text

    try:
        text = summary_text(run_benchmarks(project, args.iterations))
    except Exception as exc:  # the harness reports any runtime failure as a failed run
        print(f"benchmark failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

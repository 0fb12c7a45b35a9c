#!/usr/bin/env python3
"""Create the seeded mini repository, run every stage on it, print the report.

    python scripts/run_minirepo_demo.py [DEST]

DEST defaults to a fresh temporary directory. Running twice on the same
DEST reuses the work directory, so the second run skips every stage.
"""
import argparse
import logging
import sys
import tempfile
from pathlib import Path

from perfpatch.config import PipelineConfig, write_config
from perfpatch.fixtures.minirepo import create_minirepo
from perfpatch.pipeline import run_pipeline


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dest", nargs="?", type=Path)
    ap.add_argument("--force", action="store_true", help="rerun stages even when nothing changed")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    dest = args.dest or Path(tempfile.mkdtemp(prefix="perfpatch-demo-"))
    repo = dest / "repo"
    if not repo.exists():
        create_minirepo(repo)
    cfg = PipelineConfig(repos=(f"mini={repo}",), work_dir=str(dest / "work"), suggest_split="all")
    write_config(cfg, dest / "perfpatch.ini")

    res = run_pipeline(cfg, force=args.force)
    for o in res.outcomes:
        print(f"{o.stage:9s} {'ran' if o.ran else 'skipped':8s} {o.detail}")
    print()
    print((res.work_dir / "report.txt").read_text(encoding="utf-8"))
    print(f"config: {dest / 'perfpatch.ini'}\nartifacts: {res.work_dir}")
    return res.exit_status


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Write a pipeline config file with every field set to its default.

    python scripts/make_config.py perfpatch.ini --repo mini=path/to/repo
"""
import argparse
from dataclasses import replace

from perfpatch.config import PipelineConfig, write_config

ap = argparse.ArgumentParser(description="write a default perfpatch config")
ap.add_argument("path")
ap.add_argument("--repo", action="append", default=[], help="'path' or 'name=path'; repeatable")
ap.add_argument("--work-dir", default="perfpatch-work")
args = ap.parse_args()

cfg = replace(PipelineConfig(), repos=tuple(args.repo), work_dir=args.work_dir)
write_config(cfg, args.path)
print(f"wrote {args.path}")

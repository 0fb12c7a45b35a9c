"""Deterministic micro-benchmark runner for the C# subset.

Time is modelled from interpreter ticks, so two runs of the same source give
the same numbers. A small seeded jitter (1%) keeps the samples from being
degenerate for the statistics downstream.
"""
from __future__ import annotations

import random
import statistics
import zlib
from dataclasses import dataclass

from . import runtime as R
from .interp import Interp, RtClass, _with_attr
from .project import Project

NS_PER_TICK = 1.5
JITTER = 0.01
HEADER = "Method;Mean;StdDev;Iterations;Q1;Q3;Allocated"


@dataclass(frozen=True)
class BenchRow:
    name: str
    samples_ns: tuple[float, ...]
    allocated: int

    def line(self) -> str:
        s = self.samples_ns
        q1, _, q3 = statistics.quantiles(s, n=4, method="inclusive")
        return ";".join([
            self.name,
            f"{statistics.fmean(s):.3f} ns",
            f"{statistics.stdev(s):.3f} ns",
            str(len(s)),
            f"{q1:.3f} ns",
            f"{q3:.3f} ns",
            f"{self.allocated} B",
        ])


def _bench_classes(interp: Interp) -> list[RtClass]:
    return [c for c in sorted(interp.classes.values(), key=lambda c: c.full_name) if _with_attr(c, "Benchmark")]


def run_benchmarks(project: Project, iterations: int = 20, step_limit: int = 50_000_000) -> list[BenchRow]:
    interp = Interp(project)
    M = R.METER
    classes = _bench_classes(interp)
    names: dict[str, int] = {}
    for c in classes:
        for m in _with_attr(c, "Benchmark"):
            names[m.name] = names.get(m.name, 0) + 1
    rows = []
    for cls in classes:
        M.ticks, M.bytes, M.limit = 0, 0, step_limit
        try:
            obj = cls.instantiate(())
            for setup in _with_attr(cls, "GlobalSetup"):
                setup.invoke(obj, ())
            methods = sorted(_with_attr(cls, "Benchmark"), key=lambda m: m.decl.node.start_byte)
            for m in methods:
                label = m.name if names[m.name] == 1 else f"{cls.name}.{m.name}"
                target = None if m.is_static else obj
                m.invoke(target, ())  # warmup
                rng = random.Random(zlib.crc32(label.encode()))
                samples, allocs = [], []
                for _ in range(iterations):
                    t0, b0 = M.ticks, M.bytes
                    M.limit = M.ticks + step_limit
                    m.invoke(target, ())
                    samples.append((M.ticks - t0) * NS_PER_TICK * (1.0 + JITTER * rng.gauss(0.0, 1.0)))
                    allocs.append(M.bytes - b0)
                rows.append(BenchRow(label, tuple(samples), round(statistics.fmean(allocs))))
        finally:
            M.limit = 1 << 62
    return rows


def summary_text(rows: list[BenchRow]) -> str:
    return "\n".join([HEADER, *(r.line() for r in rows)]) + "\n"

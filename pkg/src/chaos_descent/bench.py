"""Micro-benchmarks of the hot kernels across available backends.

Times the three array kernels (basis matrix construction, synthesis at the
quadrature nodes, and weighted projection) for each backend that imports,
at a couple of representative sizes. Results are medians over repeats, in
nanoseconds, shaped for the command line table writer.
"""

import time
from dataclasses import dataclass

import numpy as np

from .basis import make_basis
from .kernels import available_backends, backend_module

BENCH_COLUMNS = ("backend", "kernel", "family", "nodes", "level",
                 "median_ns", "repeats")


@dataclass(frozen=True)
class BenchResult:
    backend: str
    kernel: str
    family: str
    nodes: int
    level: int
    median_ns: int
    repeats: int

    def row(self):
        return (self.backend, self.kernel, self.family, str(self.nodes),
                str(self.level), str(self.median_ns), str(self.repeats))


def _time_call(fn, repeats):
    samples = []
    fn()  # warm up caches and JITted import paths
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return int(np.median(samples))


def run_benchmarks(families=("trigonometric",), nodes=4096,
                   levels=(64, 256), q=2, repeats=5):
    """Benchmark every importable backend; returns a list of BenchResult."""
    results = []
    for family in families:
        spec = make_basis(family, nodes)
        code = spec.family_code
        for name in available_backends():
            mod = backend_module(name)
            for m in levels:
                rng = np.random.default_rng(0)
                coeffs = rng.standard_normal((m + 1, q))
                values = rng.standard_normal((nodes, q))
                cases = (
                    ("basis_matrix",
                     lambda: mod.basis_matrix(code, spec.nodes, m)),
                    ("synthesize_values",
                     lambda: mod.synthesize_values(code, spec.nodes, coeffs)),
                    ("accumulate_projection",
                     lambda: mod.accumulate_projection(
                         code, spec.nodes, values, spec.weights, m)),
                )
                for kernel, fn in cases:
                    results.append(BenchResult(
                        backend=name, kernel=kernel, family=family,
                        nodes=nodes, level=m,
                        median_ns=_time_call(fn, repeats), repeats=repeats))
    return results


def speedup_summary(results):
    """Compiled-over-numpy speedup per kernel/size, when both backends ran."""
    ratios = {}
    by_key = {}
    for r in results:
        by_key[(r.backend, r.kernel, r.family, r.nodes, r.level)] = r
    for (backend, kernel, family, nodes, level), r in by_key.items():
        if backend != "numpy":
            continue
        other = by_key.get(("compiled", kernel, family, nodes, level))
        if other is not None and other.median_ns > 0:
            key = f"{kernel}/{family}/n{nodes}/m{level}"
            ratios[key] = r.median_ns / other.median_ns
    return ratios

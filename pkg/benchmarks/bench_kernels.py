#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Builds a synthetic knowledge base, then times raw kernel calls (walk
stepping, Bernoulli mask selection) and the end-to-end corpus pipeline
under each backend. Outputs are asserted identical along the way, so the
numbers compare like for like.

Usage: python benchmarks/bench_kernels.py [--triples 100000] [--docs 20000]
"""

import argparse
import tempfile
import time
from pathlib import Path

from factforge import SynthConfig, load_kb
from factforge import _kernels_py
from factforge.pipeline import run_synthesis
from factforge.rng import Stream, derive_seed
from factforge.synth import STRATEGY_KNOWLEDGE_WALK

try:
    from factforge import _speedups
except ImportError:
    _speedups = None


def build_kb(n_triples: int):
    stream = Stream(123)
    n_entities = max(4, n_triples // 5)
    triples = set()
    while len(triples) < n_triples:
        s = stream.next_below(n_entities)
        r = stream.next_below(20)
        t = stream.next_below(n_entities)
        triples.add((s, r, t))
    lines = [f"e{s}\trel{r}\te{t}" for s, r, t in sorted(triples)]
    return load_kb(lines)


def time_walks(kernel, kb, n_walks: int, k: int) -> tuple[float, int]:
    starts = [e for e in range(kb.num_entities) if kb.out_degree(e) > 0]
    # Precompute inputs so the timing isolates the kernel itself.
    tasks = []
    for i in range(n_walks):
        seed = derive_seed(7, "bench", i)
        tasks.append((starts[Stream(seed).next_below(len(starts))], seed))
    offsets, targets = kb.offsets, kb.edge_targets
    checksum = 0
    started = time.perf_counter()
    for start, seed in tasks:
        edges, state = kernel(offsets, targets, start, k, seed)
        checksum ^= state ^ len(edges)
    elapsed = time.perf_counter() - started
    return elapsed, checksum


def time_bernoulli(kernel, n_calls: int, width: int, p: float) -> tuple[float, int]:
    checksum = 0
    started = time.perf_counter()
    for i in range(n_calls):
        picks, state = kernel(width, p, derive_seed(11, "mask", i))
        checksum ^= state ^ len(picks)
    elapsed = time.perf_counter() - started
    return elapsed, checksum


def time_pipeline(kb, n_docs: int, backend_name: str) -> tuple[float, str]:
    import importlib

    import factforge.kernels as kernels_mod

    impl = _speedups if backend_name == "c" else _kernels_py
    kernels_mod.walk_steps = impl.walk_steps
    kernels_mod.bernoulli_select = impl.bernoulli_select
    kernels_mod.BACKEND = backend_name
    cfg = SynthConfig(n=n_docs, k=5, mask_prob=0.15, seed=31)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "bench.jsonl"
        started = time.perf_counter()
        run_synthesis(kb, cfg, STRATEGY_KNOWLEDGE_WALK, out, workers=1)
        elapsed = time.perf_counter() - started
        import hashlib

        digest = hashlib.sha256(out.read_bytes()).hexdigest()[:16]
    importlib.reload(kernels_mod)
    return elapsed, digest


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--triples", type=int, default=100_000)
    parser.add_argument("--docs", type=int, default=20_000)
    parser.add_argument("--walks", type=int, default=50_000)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled kernels not built; run 'pip install -e .' first")
        return 1

    print(f"building KB with {args.triples} triples ...")
    kb = build_kb(args.triples)
    print(f"  |E| = {kb.num_entities}, triples = {kb.num_triples}")

    rows = []
    py_t, py_sum = time_walks(_kernels_py.walk_steps, kb, args.walks, 5)
    c_t, c_sum = time_walks(_speedups.walk_steps, kb, args.walks, 5)
    assert py_sum == c_sum, "backends diverged on walk outputs"
    rows.append((f"walk_steps x{args.walks} (k=5)", py_t, c_t))

    py_t, py_sum = time_bernoulli(_kernels_py.bernoulli_select, 20_000, 64, 0.15)
    c_t, c_sum = time_bernoulli(_speedups.bernoulli_select, 20_000, 64, 0.15)
    assert py_sum == c_sum, "backends diverged on mask selection"
    rows.append(("bernoulli_select x20000 (64 units)", py_t, c_t))

    py_t, py_digest = time_pipeline(kb, args.docs, "py")
    c_t, c_digest = time_pipeline(kb, args.docs, "c")
    assert py_digest == c_digest, "backends diverged on corpus bytes"
    rows.append((f"pipeline: {args.docs} walk docs", py_t, c_t))

    width = max(len(r[0]) for r in rows)
    print(f"\n{'benchmark'.ljust(width)}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, py_t, c_t in rows:
        print(f"{name.ljust(width)}  {py_t:>9.3f}s  {c_t:>9.3f}s  {py_t / c_t:>7.1f}x")
    print("\ncorpus digests identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

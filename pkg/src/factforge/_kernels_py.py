"""Pure-Python kernels: the fallback when the compiled extension is absent.

These must consume the random stream draw-for-draw identically to
``_speedups.pyx`` — any divergence breaks the backend-independence of
corpus bytes, which test_kernels checks exhaustively.
"""

from __future__ import annotations

from .rng import Stream


def walk_steps(offsets, targets, start: int, k: int, state: int):
    """Walk up to ``k`` uniform out-edge hops from ``start``.

    Returns (chosen edge indices, new stream state). Stops early at an
    entity with no out-edges.
    """
    st = Stream(state)
    cur = int(start)
    edges: list[int] = []
    for _ in range(k):
        lo = int(offsets[cur])
        deg = int(offsets[cur + 1]) - lo
        if deg == 0:
            break
        j = lo + st.next_below(deg)
        edges.append(j)
        cur = int(targets[j])
    return edges, st.state


def bernoulli_select(n: int, p: float, state: int):
    """Select each index in [0, n) independently with probability ``p``.

    Returns (selected indices in ascending order, new stream state).
    """
    st = Stream(state)
    selected: list[int] = []
    for i in range(n):
        if st.next_float() < p:
            selected.append(i)
    return selected, st.state

"""Progressive edge-growth construction of a parity-check matrix for a degree distribution."""
from __future__ import annotations

import numpy as np

from .._validation import check_rng
from ..exceptions import InfeasibleDistribution
from .distribution import DegreeDistribution, design_rate
from .matrix import ParityCheckMatrix

#: Largest edge-count mismatch that may be absorbed outside the check-degree support.
BALANCE_TOLERANCE = 2


def _largest_remainder(total: int, fractions: dict[int, float]) -> dict[int, int]:
    degrees = sorted(fractions)
    raw = np.array([total * fractions[d] for d in degrees])
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return dict(zip(degrees, counts.tolist()))


def degree_sequences(d: DegreeDistribution, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-node degrees ``(variable_degrees, check_degrees)`` with equal edge totals.

    Node counts come from largest-remainder rounding of the node-perspective
    fractions. Any edge mismatch is first removed by moving check nodes between
    adjacent degrees of ``rho``'s support, then up to :data:`BALANCE_TOLERANCE`
    edges are absorbed by nudging single checks by one. A larger leftover
    raises :class:`InfeasibleDistribution`.
    """
    rate = design_rate(d)
    m = int(round(n * (1.0 - rate)))
    if n < 2 or m < 2:
        raise InfeasibleDistribution(f"n={n} gives m={m} checks; need at least 2")
    var_counts = _largest_remainder(n, d.variable_node_fractions())
    chk_counts = _largest_remainder(m, d.check_node_fractions())
    edges = sum(deg * c for deg, c in var_counts.items())

    support = sorted(chk_counts)
    delta = edges - sum(deg * c for deg, c in chk_counts.items())
    while delta != 0:
        # move one check between consecutive support degrees, toward zero mismatch
        moved = False
        pairs = list(zip(support, support[1:]))
        if delta < 0:
            pairs = [(hi, lo) for lo, hi in reversed(pairs)]
        for src, dst in pairs:
            step = dst - src
            if chk_counts[src] > 0 and abs(delta - step) < abs(delta):
                chk_counts[src] -= 1
                chk_counts[dst] += 1
                delta -= step
                moved = True
                break
        if not moved:
            break
    if abs(delta) > BALANCE_TOLERANCE:
        raise InfeasibleDistribution(
            f"variable side has {edges} edges, check side is off by {delta} after balancing"
        )

    var_deg = np.repeat(list(var_counts), list(var_counts.values())).astype(np.int64)
    chk_deg = np.repeat(list(chk_counts), list(chk_counts.values())).astype(np.int64)
    # absorb the small leftover on the last checks
    sign = int(np.sign(delta))
    for i in range(abs(delta)):
        chk_deg[-1 - i] += sign
    if chk_deg.min() < 1 or chk_deg.max() > n or var_deg.max() > m:
        raise InfeasibleDistribution("degree sequence does not fit the graph dimensions")
    return np.sort(var_deg), chk_deg


def construct_peg(d: DegreeDistribution, n: int, seed=None) -> ParityCheckMatrix:
    """Build an ``m x n`` matrix by progressive edge growth.

    Variable nodes are processed in order of increasing degree. The first edge
    of a node goes to the check with the lowest current degree among those with
    spare capacity; every later edge goes to such a check outside the node's
    current BFS neighbourhood, or in its farthest layer if all checks are
    reachable. Ties are broken by ``seed``. No duplicate edges are ever placed,
    so girth is at least 4, and the BFS rule avoids short cycles where it can.
    """
    if n < 8:
        raise ValueError("construct_peg needs n >= 8")
    rng = check_rng(seed)
    var_deg, chk_target = degree_sequences(d, n)
    m = len(chk_target)
    chk_target = chk_target[rng.permutation(m)]

    chk_cur = np.zeros(m, dtype=np.int64)
    var_adj: list[list[int]] = [[] for _ in range(n)]
    chk_adj: list[list[int]] = [[] for _ in range(m)]

    for v in range(n):
        for k in range(var_deg[v]):
            spare = chk_cur < chk_target
            if k == 0:
                cand = np.flatnonzero(spare)
            else:
                cand = _peg_candidates(v, var_adj, chk_adj, spare, m)
            if cand.size == 0:
                # capacity exhausted next to v; fall back to any non-adjacent check
                allowed = np.ones(m, dtype=bool)
                allowed[var_adj[v]] = False
                cand = np.flatnonzero(allowed)
            low = cand[chk_cur[cand] == chk_cur[cand].min()]
            c = int(low[rng.integers(low.size)]) if low.size > 1 else int(low[0])
            var_adj[v].append(c)
            chk_adj[c].append(v)
            chk_cur[c] += 1

    entries = [(c, v) for v in range(n) for c in var_adj[v]]
    return ParityCheckMatrix(m, n, entries, design_rate=design_rate(d))


def _peg_candidates(v, var_adj, chk_adj, spare, m) -> np.ndarray:
    """Spare checks outside the deepest BFS neighbourhood of ``v`` that is not yet everything."""
    seen = np.zeros(m, dtype=bool)
    frontier = list(var_adj[v])
    seen[frontier] = True
    if not (spare & ~seen).any():
        return np.empty(0, dtype=np.int64)
    seen_vars = {v}
    while True:
        layer = []
        for c in frontier:
            for u in chk_adj[c]:
                if u in seen_vars:
                    continue
                seen_vars.add(u)
                for c2 in var_adj[u]:
                    if not seen[c2]:
                        seen[c2] = True
                        layer.append(c2)
        if not layer:
            return np.flatnonzero(spare & ~seen)
        if not (spare & ~seen).any():
            # this layer closed the gap: its spare checks are the farthest ones
            layer = np.asarray(layer, dtype=np.int64)
            return layer[spare[layer]]
        frontier = layer

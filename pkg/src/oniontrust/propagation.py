"""Trust propagation: best multiplicative path trust within a hop budget.

A path's trust distance is the product of its link trust values, and an
entity's trust score from a source is the best trust distance over acyclic
paths of bounded length. Because every factor sits in [0, 1], dropping a
cycle from a walk never hurts the product, so a Dijkstra-style search over
(node, hops) states finds the same optimum as exhaustive path enumeration.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import CyclicPathError, DisconnectedPathError, DomainError
from .graph import FriendLink, SocialGraph

#: Hop budget used throughout unless a caller says otherwise.
DEFAULT_MAX_HOPS = 2


@dataclass(frozen=True)
class TrustScore:
    """Best path trust to one target: the score, its hop count, a witness.

    hops is the smallest path length among maximal-product paths. The
    witness path (entity ids, source first) is kept only on request.
    """

    value: float
    hops: int
    path: Optional[Tuple[int, ...]] = None


@dataclass
class TrustScoreTable:
    """All trust scores out of one source; targets absent when unreachable."""

    source: int
    scores: Dict[int, TrustScore]

    def get(self, target: int) -> Optional[TrustScore]:
        return self.scores.get(target)

    def value(self, target: int) -> float:
        """Score of a target, 0.0 when the target is outside the table."""
        score = self.scores.get(target)
        return score.value if score is not None else 0.0

    def targets(self) -> list:
        return sorted(self.scores)


def trust_distance(links: Sequence[FriendLink]) -> float:
    """Product of trust values along a connected acyclic link sequence.

    The empty sequence multiplies out to 1.0.
    """
    seen = set()
    product = 1.0
    previous = None
    for link in links:
        if previous is not None and link.source != previous.target:
            raise DisconnectedPathError(
                "link %d->%d does not continue from %d"
                % (link.source, link.target, previous.target)
            )
        if link.trust_value is None:
            raise DomainError(
                "link %d->%d network %d has no trust value"
                % (link.source, link.target, link.network)
            )
        seen.add(link.source)
        if link.target in seen:
            raise CyclicPathError("path revisits entity %d" % link.target)
        product *= link.trust_value
        previous = link
    if previous is not None:
        seen.add(previous.target)
    return product


def _search(
    adjacency: Dict[int, Dict[int, float]],
    source: int,
    max_hops: int,
    keep_paths: bool,
) -> Dict[int, TrustScore]:
    """Max-product Dijkstra over (node, hops) states.

    Heap keys are (-product, hops, path) so pops come out product-descending,
    then fewest hops, then lexicographically smallest path; the first pop per
    node is its final score. Walks that would re-enter the source are skipped,
    and any walk that first reaches a node is beaten (or tied and out-hopped)
    by its cycle-free reduction, so recorded witnesses are acyclic.

    Witness choice among equally strong paths is deterministic: the search
    extends only the strongest prefix per (node, hops) state, breaking exact
    prefix ties lexicographically. That picks the lexicographically smallest
    optimal path except when a zero-trust link downstream collapses two
    different prefix products into the same final score.
    """
    scores: Dict[int, TrustScore] = {}
    settled = set()
    heap = [(-1.0, 0, (source,))]
    last = 1.0
    while heap:
        neg, hops, seq = heapq.heappop(heap)
        product = -neg
        assert product <= last, "heap popped an increasing product"
        last = product
        node = seq[-1]
        if (node, hops) in settled:
            continue
        settled.add((node, hops))
        if node != source and node not in scores:
            scores[node] = TrustScore(
                product, hops, seq if keep_paths else None
            )
        if hops == max_hops:
            continue
        for nbr, tv in adjacency[node].items():
            if nbr == source or (nbr, hops + 1) in settled:
                continue
            heapq.heappush(heap, (-(product * tv), hops + 1, seq + (nbr,)))
    return scores


def propagate(
    graph: SocialGraph,
    source: int,
    max_hops: int = DEFAULT_MAX_HOPS,
    keep_paths: bool = True,
) -> TrustScoreTable:
    """Trust scores from one source over merged links, within max_hops."""
    graph._require_entity(source)
    if max_hops < 1:
        raise DomainError("max_hops must be >= 1")
    adjacency = graph.merged_adjacency()
    return TrustScoreTable(source, _search(adjacency, source, max_hops, keep_paths))


def propagate_all(
    graph: SocialGraph,
    max_hops: int = DEFAULT_MAX_HOPS,
    keep_paths: bool = False,
) -> Dict[int, TrustScoreTable]:
    """Trust score tables for every source.

    Without witness paths this runs as (max, *) matrix products over the
    merged trust matrix, which is much faster than n searches and provably
    agrees with them (tested); with witness paths it falls back to the
    per-source search.
    """
    if max_hops < 1:
        raise DomainError("max_hops must be >= 1")
    ids = graph.entity_ids()
    adjacency = graph.merged_adjacency()
    if keep_paths:
        return {
            i: TrustScoreTable(i, _search(adjacency, i, max_hops, True))
            for i in ids
        }

    index = {eid: k for k, eid in enumerate(ids)}
    n = len(ids)
    tv = np.zeros((n, n))
    linked = np.zeros((n, n), dtype=bool)
    for src, row in adjacency.items():
        si = index[src]
        for tgt, val in row.items():
            tv[si, index[tgt]] = val
            linked[si, index[tgt]] = True

    best = tv.copy()
    hops = np.where(linked, 1, 0)
    reached = linked.copy()
    linked_f = linked.astype(np.float32)
    # Row chunks keep the (chunk, n, n) product tensor at a sane size.
    chunk = max(1, 4_000_000 // max(1, n * n))
    for r in range(2, max_hops + 1):
        extended = np.empty_like(best)
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            extended[lo:hi] = (best[lo:hi, :, None] * tv[None, :, :]).max(axis=1)
        extended = np.maximum(extended, tv)
        now_reached = (reached.astype(np.float32) @ linked_f) > 0.0
        new_nodes = now_reached & ~reached
        improved = extended > best
        hops[new_nodes | improved] = r
        best = np.maximum(best, extended)
        reached |= now_reached

    tables: Dict[int, TrustScoreTable] = {}
    for src in ids:
        si = index[src]
        scores = {}
        for ti in np.nonzero(reached[si])[0]:
            tgt = ids[int(ti)]
            if tgt == src:
                continue
            scores[tgt] = TrustScore(float(best[si, ti]), int(hops[si, ti]))
        tables[src] = TrustScoreTable(src, scores)
    return tables

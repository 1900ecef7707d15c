"""Energy dissemination through HELLO timing and energy-aware route selection.

Each node periodically broadcasts a HELLO beacon whose send delay within the
period encodes its residual battery energy on a quantised slot scale; a
receiver inverts the delay and refreshes its per-neighbour energy table.
Route selection then combines hop count with the disseminated energies: the
cost of hopping onto a relay ``v`` is ``1 + beta * (1 - E_v)``, the final hop
onto the destination costs 1, and relays whose record is stale, absent or at
most the exhaustion threshold are not used at all.  Ties between equal-cost
paths break on the lexicographically smallest node-id sequence, which makes
selection fully deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .activity import OnOffParams
from .battery import BatteryState


@dataclass(frozen=True)
class HelloCodec:
    """Residual-energy <-> HELLO-delay quantiser.

    Residual energy in ``[0, e_full]`` maps onto ``slots`` evenly spaced send
    delays in ``[d_min, d_max]``, high energy giving a late beacon (direct
    proportion; flipping the bounds yields the inverse convention, a config
    change rather than a code change).
    """

    d_min: float
    d_max: float
    slots: int
    e_full: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.d_min < self.d_max:
            raise ValueError(f"need 0 <= d_min < d_max, got [{self.d_min!r}, {self.d_max!r}]")
        if self.slots < 2:
            raise ValueError(f"slots must be >= 2, got {self.slots!r}")
        if not 0.0 < self.e_full <= 1.0:
            raise ValueError(f"e_full must lie in (0, 1], got {self.e_full!r}")


def encode_slot(codec: HelloCodec, residual: float) -> int:
    """Nearest quantisation slot for a residual energy; saturates at the ends."""
    if not 0.0 <= residual <= 1.0:
        raise ValueError(f"residual must lie in [0, 1], got {residual!r}")
    slot = int(residual / codec.e_full * (codec.slots - 1) + 0.5)
    return min(slot, codec.slots - 1)


def encode_delay(codec: HelloCodec, residual: float) -> float:
    """HELLO send delay proportional to residual energy (slot-quantised)."""
    slot = encode_slot(codec, residual)
    return codec.d_min + (codec.d_max - codec.d_min) * slot / (codec.slots - 1)


def decode_energy(codec: HelloCodec, delay: float) -> float:
    """Invert a HELLO delay to the nearest representable residual energy."""
    if not codec.d_min <= delay <= codec.d_max:
        raise ValueError(f"delay must lie in [{codec.d_min}, {codec.d_max}], got {delay!r}")
    slot = int((delay - codec.d_min) / (codec.d_max - codec.d_min) * (codec.slots - 1) + 0.5)
    slot = min(slot, codec.slots - 1)
    return codec.e_full * slot / (codec.slots - 1)


def collision_probability(codec: HelloCodec, n_nodes: int) -> float:
    """Probability that >= 2 of ``n_nodes`` independent uniform energies share a slot.

    Birthday bound over ``slots`` equally likely cells: ``1 - L!/((L-n)! L^n)``;
    exactly 1 once ``n_nodes`` exceeds the slot count.  Computed in exact
    rational arithmetic and rounded once.
    """
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be >= 2, got {n_nodes!r}")
    L = codec.slots
    if n_nodes > L:
        return 1.0
    return float(1 - Fraction(math.perm(L, n_nodes), L**n_nodes))


@dataclass(frozen=True)
class TableEntry:
    energy: float
    timestamp: float


@dataclass(frozen=True)
class EnergyTable:
    """Per-neighbour residual-energy records, newest record per neighbour."""

    records: Mapping[str, TableEntry] = field(default_factory=dict)

    def fresh(self, now: float | None = None, staleness: float | None = None) -> dict[str, float]:
        """Neighbour -> energy for records no older than the staleness horizon.

        With ``now``/``staleness`` omitted every record counts as fresh.
        """
        if now is None or staleness is None:
            return {nid: entry.energy for nid, entry in self.records.items()}
        return {
            nid: entry.energy
            for nid, entry in self.records.items()
            if now - entry.timestamp <= staleness
        }


def update_energy_table(
    table: EnergyTable,
    neighbor: str,
    delay: float,
    now: float,
    codec: HelloCodec,
) -> EnergyTable:
    """Insert or replace the neighbour's record with the decoded energy at ``now``."""
    records = dict(table.records)
    records[neighbor] = TableEntry(decode_energy(codec, delay), now)
    return EnergyTable(records)


@dataclass(frozen=True)
class NodeRecord:
    node_id: str
    battery: BatteryState
    activity: OnOffParams


@dataclass(frozen=True, eq=False)
class NetworkGraph:
    """Alive nodes and the undirected links between them."""

    nodes: dict[str, NodeRecord]
    links: frozenset[frozenset[str]]

    def __post_init__(self) -> None:
        for link in self.links:
            if len(link) != 2:
                raise ValueError(f"link must join two distinct nodes, got {set(link)!r}")
            missing = link - self.nodes.keys()
            if missing:
                raise ValueError(f"link references unknown node(s) {sorted(missing)!r}")

    def neighbors(self, node_id: str) -> list[str]:
        """Adjacent node ids in sorted order."""
        if node_id not in self.nodes:
            raise ValueError(f"unknown node {node_id!r}")
        return sorted(other for link in self.links for other in link if node_id in link and other != node_id)

    def drop_node(self, node_id: str) -> "NetworkGraph":
        """Graph with the node and all its links removed (e.g. on battery death)."""
        if node_id not in self.nodes:
            raise ValueError(f"unknown node {node_id!r}")
        nodes = {nid: rec for nid, rec in self.nodes.items() if nid != node_id}
        links = frozenset(link for link in self.links if node_id not in link)
        return NetworkGraph(nodes, links)


@dataclass(frozen=True)
class RouteResult:
    path: tuple[str, ...]
    cost: float


def select_route(
    graph: NetworkGraph,
    tables: Mapping[str, EnergyTable],
    src: str,
    dst: str,
    beta: float,
    exhaust_threshold: float,
    *,
    now: float | None = None,
    staleness: float | None = None,
) -> RouteResult | None:
    """Least-cost path from ``src`` to ``dst`` under the energy-aware metric.

    The cost of an edge ``u -> v`` is ``1 + beta*(1 - E_v)`` when ``v`` is a
    relay, where ``E_v`` is u's fresh table record for v, and exactly 1 when
    ``v`` is the destination (a destination needs no relay vetting).  Relays
    with stale or absent records, or with recorded energy at most
    ``exhaust_threshold``, are skipped.  Equal-cost ties resolve to the
    lexicographically smallest node-id sequence.  Returns ``None`` when no
    admissible path exists.
    """
    for name, nid in (("src", src), ("dst", dst)):
        if nid not in graph.nodes:
            raise ValueError(f"{name} {nid!r} is not in the graph")
    if src == dst:
        raise ValueError("src and dst must differ")
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")

    known = {nid: tables[nid].fresh(now, staleness) if nid in tables else {} for nid in graph.nodes}
    adjacency = {nid: graph.neighbors(nid) for nid in graph.nodes}
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    visited: set[str] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in visited:
            continue
        visited.add(node)
        if node == dst:
            return RouteResult(path, cost)
        for nxt in adjacency[node]:
            if nxt in visited:
                continue
            if nxt == dst:
                edge = 1.0
            else:
                energy = known[node].get(nxt)
                if energy is None or energy <= exhaust_threshold:
                    continue
                edge = 1.0 + beta * (1.0 - energy)
            heapq.heappush(heap, (cost + edge, path + (nxt,)))
    return None

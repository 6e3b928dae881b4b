"""Data model for evolving weighted graphs.

An event is an ordered run of snapshots over a shared node registry. Raw
edge lists (arbitrary non-negative integer ids, positive raw weights such
as measured throughput) are turned into an :class:`EventSequence` by
:func:`normalize_weights`, which assigns dense ids in first-appearance
order and rescales weights into ``[WEIGHT_EPS, 1 - WEIGHT_EPS]`` so they
are comparable with sigmoid outputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyEventError,
    MalformedGraphError,
    OutOfRangeError,
    WindowUnderflowError,
)

Array = np.ndarray

# Margin keeping normalized weights away from the saturated ends of the
# sigmoid; raw_min maps to WEIGHT_EPS, raw_max to 1 - WEIGHT_EPS.
WEIGHT_EPS = 0.05

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class SnapshotGraph:
    """One undirected weighted snapshot. Immutable after construction.

    ``nodes`` are sorted global ids; ``edges`` hold each undirected pair
    once as ``(u, v, w)`` with ``u < v`` and ``0 < w <= 1``. Dense matrix
    positions follow the sorted node order.
    """

    index: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    features: Array | None = None

    def __post_init__(self):
        if self.index < 0:
            raise MalformedGraphError(f"negative snapshot index {self.index}")
        if list(self.nodes) != sorted(set(self.nodes)):
            raise MalformedGraphError("snapshot nodes must be sorted and unique")
        if any(u < 0 for u in self.nodes):
            raise MalformedGraphError("negative node id")
        node_set = set(self.nodes)
        seen: set[tuple[int, int]] = set()
        for u, v, w in self.edges:
            if u >= v:
                raise MalformedGraphError(f"edge ({u}, {v}) must satisfy u < v")
            if u not in node_set or v not in node_set:
                raise MalformedGraphError(f"edge ({u}, {v}) references a missing node")
            if (u, v) in seen:
                raise MalformedGraphError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            if not np.isfinite(w):
                raise MalformedGraphError(f"non-finite weight on edge ({u}, {v})")
            if not 0.0 < w <= 1.0:
                raise MalformedGraphError(f"weight {w} on edge ({u}, {v}) outside (0, 1]")
        if self.features is not None:
            f = np.asarray(self.features, dtype=np.float64)
            if f.ndim != 2 or f.shape[0] != len(self.nodes):
                raise MalformedGraphError(f"feature matrix shape {f.shape} does not "
                                          f"match {len(self.nodes)} nodes")
            if not np.all(np.isfinite(f)):
                raise MalformedGraphError("non-finite feature entries")
            object.__setattr__(self, "features", f)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def position(self) -> dict[int, int]:
        """Global node id -> row index in this snapshot's matrices."""
        return {u: i for i, u in enumerate(self.nodes)}

    def adjacency(self) -> Array:
        """Dense symmetric weight matrix with a zero diagonal."""
        pos = self.position()
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for u, v, w in self.edges:
            i, j = pos[u], pos[v]
            a[i, j] = w
            a[j, i] = w
        return a

    def edge_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, _ in self.edges)


@dataclass(frozen=True)
class WeightScale:
    """Affine map taking raw weights in [raw_min, raw_max] to [eps, 1-eps]."""

    raw_min: float
    raw_max: float
    eps: float = WEIGHT_EPS

    def apply(self, w: float) -> float:
        if self.raw_max == self.raw_min:
            # Degenerate raw range: every weight collapses to the midpoint.
            return 0.5
        lo, hi = self.eps, 1.0 - self.eps
        t = (w - self.raw_min) / (self.raw_max - self.raw_min)
        # Convex combination hits both endpoints exactly; the clamp guards
        # against interior rounding drifting past them by one ulp.
        return min(max(lo * (1.0 - t) + hi * t, lo), hi)


@dataclass(frozen=True)
class RawEvent:
    """Pre-normalization event: per-snapshot edge lists with raw ids/weights."""

    name: str
    snapshots: tuple[tuple[Edge, ...], ...]

    def node_count(self, k: int) -> int:
        ids = {u for u, _, _ in self.snapshots[k]} | {v for _, v, _ in self.snapshots[k]}
        return len(ids)


@dataclass(frozen=True)
class EventSequence:
    """Normalized event: snapshots over dense ids plus the id registry."""

    name: str
    snapshots: tuple[SnapshotGraph, ...]
    registry: dict[int, int] = field(repr=False)
    weight_scale: WeightScale = WeightScale(0.0, 1.0)

    def __post_init__(self):
        for k, g in enumerate(self.snapshots):
            if g.index != k:
                raise MalformedGraphError(f"snapshot at position {k} carries index {g.index}")
        dense = sorted(self.registry.values())
        if dense != list(range(len(dense))):
            raise MalformedGraphError("registry ids must be dense 0..n_global-1")
        known = set(self.registry.values())
        for g in self.snapshots:
            for u in g.nodes:
                if u not in known:
                    raise MalformedGraphError(f"node {u} missing from the registry")
            for _, _, w in g.edges:
                if not WEIGHT_EPS <= w <= 1.0 - WEIGHT_EPS:
                    raise MalformedGraphError(
                        f"normalized weight {w} outside [{WEIGHT_EPS}, {1.0 - WEIGHT_EPS}]")

    @property
    def n_global(self) -> int:
        return len(self.registry)

    def __len__(self) -> int:
        return len(self.snapshots)


@dataclass(frozen=True)
class LinkSet:
    """A set of weighted undirected links, kept in sorted order."""

    links: tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.links)

    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, _ in self.links)


def normalize_weights(raw: RawEvent) -> EventSequence:
    """Build a normalized :class:`EventSequence` from raw edge lists.

    Dense ids are assigned in first-appearance order, scanning snapshots
    in sequence and, within an edge, the first endpoint before the second.
    Weights are affinely mapped from the raw range observed across the
    whole event into ``[WEIGHT_EPS, 1 - WEIGHT_EPS]``; a degenerate raw
    range (all weights equal) maps everything to 0.5.
    """
    weights = [w for snap in raw.snapshots for _, _, w in snap]
    if not weights:
        raise EmptyEventError(f"event {raw.name!r} has no edges")
    for w in weights:
        if not np.isfinite(w):
            raise MalformedGraphError("non-finite raw weight")
    scale = WeightScale(float(min(weights)), float(max(weights)))

    registry: dict[int, int] = {}

    def dense(raw_id: int) -> int:
        if raw_id < 0:
            raise MalformedGraphError(f"negative node id {raw_id}")
        if raw_id not in registry:
            registry[raw_id] = len(registry)
        return registry[raw_id]

    snapshots = []
    for k, snap in enumerate(raw.snapshots):
        mapped = []
        for u, v, w in snap:
            if u == v:
                raise MalformedGraphError(f"self-loop on node {u} in snapshot {k}")
            du, dv = dense(u), dense(v)
            lo, hi = (du, dv) if du < dv else (dv, du)
            mapped.append((lo, hi, scale.apply(w)))
        nodes = tuple(sorted({i for e in mapped for i in e[:2]}))
        snapshots.append(SnapshotGraph(index=k, nodes=nodes, edges=tuple(sorted(mapped))))
    return EventSequence(name=raw.name, snapshots=tuple(snapshots),
                         registry=registry, weight_scale=scale)


def normalize_adjacency(g: SnapshotGraph) -> Array:
    """Symmetrically normalized adjacency with self-loops.

    Returns ``D^(-1/2) (A + I) D^(-1/2)`` where ``D`` holds the row sums
    of ``A + I``. The result is exactly symmetric and every entry lies in
    ``[0, 1]``; an isolated node gets a 1 on the diagonal.
    """
    if g.n < 1:
        raise MalformedGraphError("cannot normalize an empty snapshot")
    a_tilde = g.adjacency() + np.eye(g.n)
    if not np.all(np.isfinite(a_tilde)):
        raise MalformedGraphError("non-finite adjacency entries")
    inv_root = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    # outer() keeps the scaling factor exactly symmetric, so the product
    # is bitwise symmetric as well.
    return a_tilde * np.outer(inv_root, inv_root)


def build_window(event: EventSequence, k: int, length: int) -> list[SnapshotGraph]:
    """Snapshots ``k - length .. k`` inclusive (``length + 1`` of them)."""
    if length < 0:
        raise WindowUnderflowError(f"negative window length {length}")
    if k >= len(event):
        raise OutOfRangeError(f"snapshot {k} out of range for {len(event)} snapshots")
    if k - length < 0:
        raise WindowUnderflowError(f"window of length {length} ending at {k} "
                                   f"reaches before snapshot 0")
    return list(event.snapshots[k - length:k + 1])


def unobserved_links(event: EventSequence, k: int, length: int) -> LinkSet:
    """Links of snapshot ``k + 1`` absent from every window snapshot.

    These carry their snapshot-``k + 1`` weights and are the prediction
    targets: the window ``k - length .. k`` is what a model may train on.
    """
    if k + 1 >= len(event):
        raise OutOfRangeError(f"snapshot {k + 1} out of range for {len(event)} snapshots")
    window = build_window(event, k, length)
    seen: set[tuple[int, int]] = set()
    for g in window:
        seen.update(g.edge_pairs())
    links = tuple(e for e in event.snapshots[k + 1].edges if (e[0], e[1]) not in seen)
    return LinkSet(links=links)

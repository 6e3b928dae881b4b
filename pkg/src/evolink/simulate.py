"""Synthetic viewer-mesh events with office clustering.

Viewers sit in offices and join a live event over time following one of
three arrival patterns. Each present viewer keeps up to ``degree_cap``
connections, building them gradually (``growth_rate`` new links per
snapshot), prefers same-office peers, and occasionally swaps its weakest
link for a stronger candidate. Pair capacities (raw weights) are drawn
once per pair: same-office pairs from the high-throughput distribution,
cross-office pairs from the low one. Everything is deterministic under
the config seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .graphs import EventSequence, RawEvent

Array = np.ndarray

ARRIVALS = ("front_loaded", "burst", "gradual")

# Floor keeping truncated normal draws strictly positive.
MIN_RAW_WEIGHT = 1e-6


@dataclass(frozen=True)
class SimConfig:
    """Generator knobs; defaults describe a small four-office event."""

    offices: int = 4
    viewers: int = 80
    snapshots: int = 8
    arrival: str = "front_loaded"
    intra_bw: tuple[float, float] = (100.0, 10.0)
    inter_bw: tuple[float, float] = (10.0, 2.0)
    degree_cap: int = 16
    growth_rate: int = 2
    rewire_prob: float = 0.15
    departure_prob: float = 0.0
    same_office_bias: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.offices < 1:
            raise ConfigError(f"offices must be >= 1, got {self.offices}")
        if self.viewers < self.offices:
            raise ConfigError(f"need at least one viewer per office, got "
                              f"{self.viewers} viewers for {self.offices} offices")
        if self.snapshots < 2:
            raise ConfigError(f"snapshots must be >= 2, got {self.snapshots}")
        if self.arrival not in ARRIVALS:
            raise ConfigError(f"arrival must be one of {ARRIVALS}, got {self.arrival!r}")
        for name, (loc, spread) in (("intra_bw", self.intra_bw), ("inter_bw", self.inter_bw)):
            if loc <= 0 or spread < 0:
                raise ConfigError(f"{name} needs a positive mean and non-negative "
                                  f"spread, got {(loc, spread)}")
        if self.degree_cap < 1:
            raise ConfigError(f"degree_cap must be >= 1, got {self.degree_cap}")
        if self.growth_rate < 1:
            raise ConfigError(f"growth_rate must be >= 1, got {self.growth_rate}")
        if not 0.0 <= self.rewire_prob <= 1.0:
            raise ConfigError(f"rewire_prob must be in [0, 1], got {self.rewire_prob}")
        if not 0.0 <= self.departure_prob <= 1.0:
            raise ConfigError(f"departure_prob must be in [0, 1], got {self.departure_prob}")
        if not 0.0 <= self.same_office_bias <= 1.0:
            raise ConfigError(f"same_office_bias must be in [0, 1], got "
                              f"{self.same_office_bias}")


def _spread(total: int, slots: int) -> list[int]:
    """Split ``total`` over ``slots`` as evenly as possible, remainder first."""
    if slots <= 0:
        return []
    base, extra = divmod(total, slots)
    return [base + (1 if i < extra else 0) for i in range(slots)]


def arrival_counts(cfg: SimConfig) -> list[int]:
    """How many viewers join at each snapshot. Integer-exact contracts:

    - front_loaded: at least 60% join at snapshot 0;
    - burst: at least 40% join during snapshots 1-2;
    - gradual: joins spread evenly across all snapshots.
    """
    v, k = cfg.viewers, cfg.snapshots
    if cfg.arrival == "front_loaded":
        first = -((-3 * v) // 5)  # ceil(0.6 v)
        return [first] + _spread(v - first, k - 1)
    if cfg.arrival == "burst":
        first = (v + 2) // 5  # round(0.2 v)
        burst_slots = min(2, k - 1)
        burst_total = min(-((-2 * v) // 5), v - first)  # ceil(0.4 v)
        counts = [first] + _spread(burst_total, burst_slots)
        rest = v - first - burst_total
        tail_slots = k - 1 - burst_slots
        if tail_slots > 0:
            counts += _spread(rest, tail_slots)
        else:
            counts[-1] += rest
        return counts
    return _spread(v, k)


def simulate_event(cfg: SimConfig) -> RawEvent:
    """Generate one event; weights are raw (caller normalizes)."""
    rng = np.random.default_rng(cfg.seed)
    v = cfg.viewers

    # Balanced office assignment over a shuffled viewer order, so every
    # office is populated whenever viewers >= offices.
    office = np.empty(v, dtype=np.intp)
    office[rng.permutation(v)] = np.arange(v) % cfg.offices

    counts = arrival_counts(cfg)
    joins_at = np.empty(v, dtype=np.intp)
    order = rng.permutation(v)
    start = 0
    for k, c in enumerate(counts):
        joins_at[order[start:start + c]] = k
        start += c

    pair_weight: dict[tuple[int, int], float] = {}

    def weight_of(u: int, w: int) -> float:
        key = (u, w) if u < w else (w, u)
        if key not in pair_weight:
            loc, spread = cfg.intra_bw if office[u] == office[w] else cfg.inter_bw
            pair_weight[key] = max(float(rng.normal(loc, spread)), MIN_RAW_WEIGHT)
        return pair_weight[key]

    adj: dict[int, dict[int, float]] = {u: {} for u in range(v)}
    present: set[int] = set()

    def pick_partner(u: int, pool_filter) -> int | None:
        """Choose a partner for u with the same-office preference."""
        same, other = [], []
        for w in sorted(present):
            if w == u or w in adj[u] or not pool_filter(w):
                continue
            (same if office[w] == office[u] else other).append(w)
        if same and (not other or rng.random() < cfg.same_office_bias):
            pool = same
        elif other:
            pool = other
        else:
            return None
        return pool[rng.integers(0, len(pool))]

    snapshots: list[tuple[tuple[int, int, float], ...]] = []
    for k in range(cfg.snapshots):
        present.update(np.flatnonzero(joins_at == k).tolist())

        if cfg.departure_prob > 0.0 and k > 0:
            leaving = [u for u in sorted(present)
                       if joins_at[u] < k and rng.random() < cfg.departure_prob]
            for u in leaving:
                for w in list(adj[u]):
                    del adj[w][u]
                adj[u].clear()
                present.discard(u)

        # Rewiring: swap the weakest link for a strictly stronger candidate.
        if cfg.rewire_prob > 0.0:
            for u in sorted(present):
                if not adj[u] or rng.random() >= cfg.rewire_prob:
                    continue
                weakest, w_min = min(adj[u].items(), key=lambda kv: (kv[1], kv[0]))
                cand = pick_partner(u, lambda w: len(adj[w]) < cfg.degree_cap)
                if cand is not None and weight_of(u, cand) > w_min:
                    del adj[u][weakest]
                    del adj[weakest][u]
                    wt = weight_of(u, cand)
                    adj[u][cand] = wt
                    adj[cand][u] = wt

        # Growth: each viewer initiates at most growth_rate new links per
        # snapshot, staying within the degree cap, so the mesh densifies
        # over the whole event instead of saturating at arrival. A
        # completely unconnected viewer may ignore partners' caps so that
        # no present viewer stays isolated (when at least two are present).
        for u in sorted(present):
            budget = cfg.growth_rate
            while budget > 0 and len(adj[u]) < cfg.degree_cap:
                cand = pick_partner(u, lambda w: len(adj[w]) < cfg.degree_cap)
                if cand is None and not adj[u]:
                    cand = pick_partner(u, lambda w: True)
                if cand is None:
                    break
                wt = weight_of(u, cand)
                adj[u][cand] = wt
                adj[cand][u] = wt
                budget -= 1

        edges = sorted((u, w, adj[u][w]) for u in present for w in adj[u] if u < w)
        snapshots.append(tuple(edges))

    pattern = cfg.arrival.replace("_", "-")
    name = f"sim-{pattern}-o{cfg.offices}-v{v}-s{cfg.seed}"
    return RawEvent(name=name, snapshots=tuple(snapshots))


def describe_event(event) -> list[tuple[int, int, int]]:
    """Per-snapshot (index, node count, edge count) for raw or normalized events."""
    rows: list[tuple[int, int, int]] = []
    if isinstance(event, RawEvent):
        for k, edges in enumerate(event.snapshots):
            rows.append((k, event.node_count(k), len(edges)))
    elif isinstance(event, EventSequence):
        for g in event.snapshots:
            rows.append((g.index, g.n, len(g.edges)))
    else:
        raise ConfigError(f"cannot describe a {type(event).__name__}")
    return rows

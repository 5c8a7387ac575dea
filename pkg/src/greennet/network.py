"""Problem data for the energy-saving backbone model.

A backbone is modeled as a hierarchy: routers hold line cards, cards hold
communication ports, and directed links connect ports pairwise. Every link
operates in one of K energy states, each state trading power draw against
throughput. Demands are unsplittable traffic volumes between routers.

The incidence structure is stored as dense 0/1 matrices. Orientation follows
the subscript order of the symbols they encode: ``port_card[c, p]`` is 1 when
port ``p`` sits on card ``c``, ``link_out[e, p]`` is 1 when link ``e`` leaves
port ``p``, and so on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "Demand",
    "NetworkInstance",
    "EdgePair",
    "EdgePairing",
    "validate_instance",
    "derive_edge_pairs",
    "router_links",
    "port_maps",
]


@dataclass(frozen=True)
class Demand:
    """Unsplittable traffic requirement from one router to another."""

    source: int
    target: int
    volume: float


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """Immutable problem data for one backbone.

    Construction normalizes every field to a read-only numpy array and checks
    that the shapes are mutually consistent. Semantic well-formedness (each
    port on exactly one card, no self-loop links, ...) is checked separately
    by :func:`validate_instance`; malformed data is representable on purpose
    so that loaders can report problems instead of crashing.
    """

    port_card: np.ndarray       # C x P, 1 when the port belongs to the card
    card_router: np.ndarray     # R x C, 1 when the card belongs to the router
    link_out: np.ndarray        # E x P, 1 when the link leaves the port
    link_in: np.ndarray         # E x P, 1 when the link enters the port
    state_power: np.ndarray     # E x K, power draw per link state [W]
    state_capacity: np.ndarray  # E x K, throughput per link state
    card_power: np.ndarray      # C, fixed power of an active card [W]
    router_power: np.ndarray    # R, fixed power of an active router [W]
    demands: tuple[Demand, ...] = ()

    def __post_init__(self):
        ints = {
            "port_card": self.port_card,
            "card_router": self.card_router,
            "link_out": self.link_out,
            "link_in": self.link_in,
        }
        for name, raw in ints.items():
            arr = np.array(raw, dtype=np.int8, ndmin=2)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        floats = {
            "state_power": np.array(self.state_power, dtype=np.float64, ndmin=2),
            "state_capacity": np.array(self.state_capacity, dtype=np.float64, ndmin=2),
            "card_power": np.atleast_1d(np.array(self.card_power, dtype=np.float64)),
            "router_power": np.atleast_1d(np.array(self.router_power, dtype=np.float64)),
        }
        for name, arr in floats.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "demands", tuple(self.demands))
        self._check_shapes()

    def _check_shapes(self):
        c, p = self.port_card.shape
        r = self.card_router.shape[0]
        e = self.link_out.shape[0]
        k = self.state_power.shape[1]
        if self.card_router.shape != (r, c):
            raise ValueError(
                f"card_router shape {self.card_router.shape} does not match {c} cards"
            )
        if self.link_out.shape != (e, p) or self.link_in.shape != (e, p):
            raise ValueError("link_out and link_in must both be E x P")
        if self.state_power.shape != (e, k) or self.state_capacity.shape != (e, k):
            raise ValueError("state_power and state_capacity must both be E x K")
        if self.card_power.shape != (c,):
            raise ValueError(f"card_power must have length {c}")
        if self.router_power.shape != (r,):
            raise ValueError(f"router_power must have length {r}")

    @property
    def num_routers(self) -> int:
        return self.card_router.shape[0]

    @property
    def num_cards(self) -> int:
        return self.port_card.shape[0]

    @property
    def num_ports(self) -> int:
        return self.port_card.shape[1]

    @property
    def num_links(self) -> int:
        return self.link_out.shape[0]

    @property
    def num_states(self) -> int:
        return self.state_power.shape[1]

    @property
    def num_demands(self) -> int:
        return len(self.demands)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkInstance):
            return NotImplemented
        return (
            np.array_equal(self.port_card, other.port_card)
            and np.array_equal(self.card_router, other.card_router)
            and np.array_equal(self.link_out, other.link_out)
            and np.array_equal(self.link_in, other.link_in)
            and np.array_equal(self.state_power, other.state_power)
            and np.array_equal(self.state_capacity, other.state_capacity)
            and np.array_equal(self.card_power, other.card_power)
            and np.array_equal(self.router_power, other.router_power)
            and self.demands == other.demands
        )


@dataclass(frozen=True)
class EdgePair:
    """Two opposite directed links that share the same pair of ports.

    ``forward`` leaves ``port_a`` and enters ``port_b``; ``backward`` runs the
    other way. Together they form one bidirectional edge.
    """

    forward: int
    backward: int
    port_a: int
    port_b: int


@dataclass(frozen=True)
class EdgePairing:
    """Result of pairing up a topology's directed links."""

    pairs: tuple[EdgePair, ...]
    unpaired: tuple[int, ...]

    def partner(self, link: int) -> int | None:
        """Opposite link of ``link``, or None when it has no reverse."""
        for pr in self.pairs:
            if pr.forward == link:
                return pr.backward
            if pr.backward == link:
                return pr.forward
        return None


def _sole_index(row: np.ndarray) -> int:
    """Index of the single 1 in a 0/1 vector, or -1 when not unique."""
    hits = np.flatnonzero(row)
    return int(hits[0]) if hits.size == 1 else -1


def port_maps(inst: NetworkInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ownership lookups (port -> card, card -> router, port -> router).

    Entries are -1 wherever ownership is missing or ambiguous, so the maps
    stay usable on malformed instances.
    """
    port_card = np.array(
        [_sole_index(self_col) for self_col in inst.port_card.T], dtype=np.int64
    )
    card_router = np.array(
        [_sole_index(col) for col in inst.card_router.T], dtype=np.int64
    )
    port_router = np.where(
        port_card >= 0, np.append(card_router, -1)[port_card], -1
    )
    return port_card, card_router, port_router


def validate_instance(inst: NetworkInstance) -> list[str]:
    """Check every structural invariant; return one message per violation.

    An empty list means the instance is well-formed. Malformedness is data,
    not an error: callers decide whether to refuse the instance.
    """
    msgs: list[str] = []

    for p in range(inst.num_ports):
        owners = int(inst.port_card[:, p].sum())
        if owners == 0:
            msgs.append(f"port {p} belongs to no card")
        elif owners > 1:
            msgs.append(f"port {p} belongs to {owners} cards")
    for c in range(inst.num_cards):
        owners = int(inst.card_router[:, c].sum())
        if owners == 0:
            msgs.append(f"card {c} belongs to no router")
        elif owners > 1:
            msgs.append(f"card {c} belongs to {owners} routers")

    for e in range(inst.num_links):
        n_out = int(inst.link_out[e].sum())
        n_in = int(inst.link_in[e].sum())
        if n_out != 1:
            msgs.append(f"link {e} outgoing from {n_out} ports")
        if n_in != 1:
            msgs.append(f"link {e} incoming to {n_in} ports")

    for p in range(inst.num_ports):
        n_out = int(inst.link_out[:, p].sum())
        n_in = int(inst.link_in[:, p].sum())
        if n_out > 1:
            msgs.append(f"port {p} has {n_out} outgoing links")
        if n_in > 1:
            msgs.append(f"port {p} has {n_in} incoming links")

    _, _, port_router = port_maps(inst)
    for e in range(inst.num_links):
        p_out = _sole_index(inst.link_out[e])
        p_in = _sole_index(inst.link_in[e])
        if p_out < 0 or p_in < 0:
            continue  # already reported above
        if p_out == p_in:
            msgs.append(f"link {e} leaves and enters the same port {p_out}")
        elif (
            port_router[p_out] >= 0
            and port_router[p_out] == port_router[p_in]
        ):
            msgs.append(f"link {e} is a self-loop on router {port_router[p_out]}")

    for name, arr in (
        ("state_power", inst.state_power),
        ("state_capacity", inst.state_capacity),
        ("card_power", inst.card_power),
        ("router_power", inst.router_power),
    ):
        if arr.size and not np.all(np.isfinite(arr)):
            msgs.append(f"{name} contains non-finite values")
        if arr.size and np.any(arr < 0):
            msgs.append(f"{name} contains negative values")

    for d, dem in enumerate(inst.demands):
        if not (0 <= dem.source < inst.num_routers):
            msgs.append(f"demand {d} source router {dem.source} out of range")
        if not (0 <= dem.target < inst.num_routers):
            msgs.append(f"demand {d} target router {dem.target} out of range")
        if dem.source == dem.target:
            msgs.append(f"demand {d} has identical source and target {dem.source}")
        if not (dem.volume > 0 and np.isfinite(dem.volume)):
            msgs.append(f"demand {d} volume {dem.volume} is not positive and finite")

    return msgs


def derive_edge_pairs(inst: NetworkInstance) -> EdgePairing:
    """Match directed links into bidirectional edges.

    Links e1 and e2 pair up when e1 runs port_a -> port_b and e2 runs
    port_b -> port_a. Links without a reverse partner are listed separately,
    they are allowed but get pinned off by the state symmetry constraints.
    """
    pairs: list[EdgePair] = []
    taken = np.zeros(inst.num_links, dtype=bool)
    for e1 in range(inst.num_links):
        if taken[e1]:
            continue
        pa = _sole_index(inst.link_out[e1])
        pb = _sole_index(inst.link_in[e1])
        if pa < 0 or pb < 0:
            continue
        for e2 in range(e1 + 1, inst.num_links):
            if taken[e2]:
                continue
            if inst.link_out[e2, pb] == 1 and inst.link_in[e2, pa] == 1:
                pairs.append(EdgePair(forward=e1, backward=e2, port_a=pa, port_b=pb))
                taken[e1] = taken[e2] = True
                break
    unpaired = tuple(int(e) for e in np.flatnonzero(~taken))
    return EdgePairing(pairs=tuple(pairs), unpaired=unpaired)


def router_links(inst: NetworkInstance, r: int) -> tuple[set[int], set[int]]:
    """Links leaving and entering router ``r``.

    Computed through the incidence chain router -> cards -> ports -> links,
    the same contraction the flow balance constraints perform.
    """
    if not (0 <= r < inst.num_routers):
        raise IndexError(f"router index {r} out of range 0..{inst.num_routers - 1}")
    ports = inst.card_router[r] @ inst.port_card  # 1 at ports owned via any card
    out = np.flatnonzero(inst.link_out @ ports)
    inc = np.flatnonzero(inst.link_in @ ports)
    return set(int(e) for e in out), set(int(e) for e in inc)

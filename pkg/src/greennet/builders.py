"""MILP builders for the two formulations of the energy-saving problem.

Both builders translate a NetworkInstance into a generic MilpModel over the
same variable layout, so their solutions are directly comparable:

* ``build_corrected`` balances flow at routers (the switching happens inside
  the router, ports are just labeled attachment points) and couples the two
  directions of every edge into a common energy state through per-port
  symmetry equalities.

* ``build_legacy`` reproduces the defective variant this package exists to
  contrast against: flow is balanced at individual ports, with the demand
  endpoints coerced onto single designated ports, and nothing ties the two
  directions of an edge together. It is kept faulty on purpose; the compare
  harness demonstrates the consequences.

Constraint names encode family and indices ("conserve[d=0,r=2]") so that
validation reports and LP exports are self-describing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .milp import SENSE_EQ, SENSE_LE, LinearConstraint, MilpModel
from .network import NetworkInstance, port_maps, validate_instance

KIND_CORRECTED = "corrected"
KIND_LEGACY = "legacy"

FAMILIES_CORRECTED = (
    "card_out",        # routed links leaving a card switch the card on
    "card_in",         # routed links entering a card switch the card on
    "router_card",     # an active card switches its router on
    "one_state",       # a link is in at most one energy state
    "conserve",        # per-router flow balance per demand
    "capacity",        # routed volume fits the active state's throughput
    "state_symmetry",  # per port: outgoing and incoming state indicators agree
)
FAMILIES_LEGACY = (
    "card_out",
    "card_in",
    "router_card",
    "one_state",
    "port_conserve",   # per-port flow balance per demand (the defect)
    "capacity",
)

__all__ = [
    "KIND_CORRECTED",
    "KIND_LEGACY",
    "FAMILIES_CORRECTED",
    "FAMILIES_LEGACY",
    "VariableIndex",
    "build_corrected",
    "build_legacy",
    "build_model",
    "objective_value",
]


@dataclass(frozen=True)
class VariableIndex:
    """Fixed variable layout shared by both builders.

    Order: all card indicators, all router indicators, all link-state
    indicators (link-major), all routing indicators (link-major).
    """

    num_cards: int
    num_routers: int
    num_links: int
    num_states: int
    num_demands: int

    @classmethod
    def for_instance(cls, inst: NetworkInstance) -> "VariableIndex":
        return cls(
            num_cards=inst.num_cards,
            num_routers=inst.num_routers,
            num_links=inst.num_links,
            num_states=inst.num_states,
            num_demands=inst.num_demands,
        )

    @property
    def num_variables(self) -> int:
        return (
            self.num_cards
            + self.num_routers
            + self.num_links * self.num_states
            + self.num_links * self.num_demands
        )

    def card_on(self, c: int) -> int:
        return c

    def router_on(self, r: int) -> int:
        return self.num_cards + r

    def link_state(self, e: int, k: int) -> int:
        return self.num_cards + self.num_routers + e * self.num_states + k

    def route(self, e: int, d: int) -> int:
        return (
            self.num_cards
            + self.num_routers
            + self.num_links * self.num_states
            + e * self.num_demands
            + d
        )


def _require_valid(inst: NetworkInstance) -> None:
    msgs = validate_instance(inst)
    if msgs:
        shown = "; ".join(msgs[:4])
        more = f" (+{len(msgs) - 4} more)" if len(msgs) > 4 else ""
        raise ValueError(f"malformed instance: {shown}{more}")


def _add_variables(model: MilpModel, idx: VariableIndex) -> None:
    for c in range(idx.num_cards):
        model.add_binary(f"card_on_{c}")
    for r in range(idx.num_routers):
        model.add_binary(f"router_on_{r}")
    for e in range(idx.num_links):
        for k in range(idx.num_states):
            model.add_binary(f"link_state_e{e}_k{k}")
    for e in range(idx.num_links):
        for d in range(idx.num_demands):
            model.add_binary(f"route_e{e}_d{d}")


def _set_objective(model: MilpModel, inst: NetworkInstance, idx: VariableIndex) -> None:
    terms: list[tuple[int, float]] = []
    for e in range(idx.num_links):
        for k in range(idx.num_states):
            terms.append((idx.link_state(e, k), float(inst.state_power[e, k])))
    for c in range(idx.num_cards):
        terms.append((idx.card_on(c), float(inst.card_power[c])))
    for r in range(idx.num_routers):
        terms.append((idx.router_on(r), float(inst.router_power[r])))
    model.set_objective(terms)


def _add_common(model: MilpModel, inst: NetworkInstance, idx: VariableIndex) -> None:
    """Families shared by both formulations."""
    # links leaving / entering ports of a card force the card on, per demand
    card_out_links = [
        np.flatnonzero(inst.link_out @ inst.port_card[c]) for c in range(idx.num_cards)
    ]
    card_in_links = [
        np.flatnonzero(inst.link_in @ inst.port_card[c]) for c in range(idx.num_cards)
    ]
    for d in range(idx.num_demands):
        for c in range(idx.num_cards):
            terms = [(idx.route(int(e), d), 1.0) for e in card_out_links[c]]
            terms.append((idx.card_on(c), -1.0))
            model.add_constraint(
                LinearConstraint(f"card_out[d={d},c={c}]", tuple(terms), SENSE_LE, 0.0)
            )
    for d in range(idx.num_demands):
        for c in range(idx.num_cards):
            terms = [(idx.route(int(e), d), 1.0) for e in card_in_links[c]]
            terms.append((idx.card_on(c), -1.0))
            model.add_constraint(
                LinearConstraint(f"card_in[d={d},c={c}]", tuple(terms), SENSE_LE, 0.0)
            )

    # an active card activates its router; rows only where ownership holds,
    # the remaining rows reduce to 0 <= router_on and are vacuous
    for r in range(idx.num_routers):
        for c in np.flatnonzero(inst.card_router[r]):
            model.add_constraint(
                LinearConstraint(
                    f"router_card[r={r},c={int(c)}]",
                    ((idx.card_on(int(c)), 1.0), (idx.router_on(r), -1.0)),
                    SENSE_LE,
                    0.0,
                )
            )

    for e in range(idx.num_links):
        terms = tuple((idx.link_state(e, k), 1.0) for k in range(idx.num_states))
        model.add_constraint(
            LinearConstraint(f"one_state[e={e}]", terms, SENSE_LE, 1.0)
        )


def _add_capacity(model: MilpModel, inst: NetworkInstance, idx: VariableIndex) -> None:
    for e in range(idx.num_links):
        terms = [
            (idx.route(e, d), float(dem.volume)) for d, dem in enumerate(inst.demands)
        ]
        terms += [
            (idx.link_state(e, k), -float(inst.state_capacity[e, k]))
            for k in range(idx.num_states)
        ]
        model.add_constraint(
            LinearConstraint(f"capacity[e={e}]", tuple(terms), SENSE_LE, 0.0)
        )


def build_corrected(inst: NetworkInstance) -> tuple[MilpModel, VariableIndex]:
    """Corrected formulation: router-level balance plus state symmetry."""
    _require_valid(inst)
    idx = VariableIndex.for_instance(inst)
    model = MilpModel()
    model.metadata["kind"] = KIND_CORRECTED
    _add_variables(model, idx)
    _set_objective(model, inst, idx)
    _add_common(model, inst, idx)

    # flow balance at every router: +1 leaving the source, -1 entering the
    # target, 0 elsewhere, contracted through router -> card -> port -> link
    router_out = [
        np.flatnonzero(inst.link_out @ (inst.card_router[r] @ inst.port_card))
        for r in range(idx.num_routers)
    ]
    router_in = [
        np.flatnonzero(inst.link_in @ (inst.card_router[r] @ inst.port_card))
        for r in range(idx.num_routers)
    ]
    for d, dem in enumerate(inst.demands):
        for r in range(idx.num_routers):
            terms = [(idx.route(int(e), d), 1.0) for e in router_out[r]]
            terms += [(idx.route(int(e), d), -1.0) for e in router_in[r]]
            rhs = 1.0 if r == dem.source else -1.0 if r == dem.target else 0.0
            model.add_constraint(
                LinearConstraint(f"conserve[d={d},r={r}]", tuple(terms), SENSE_EQ, rhs)
            )

    _add_capacity(model, inst, idx)

    # per port and state: the state indicator of the link leaving the port
    # equals that of the link entering it; ports with traffic in only one
    # direction pin that link's state to zero
    for p in range(inst.num_ports):
        out_links = np.flatnonzero(inst.link_out[:, p])
        in_links = np.flatnonzero(inst.link_in[:, p])
        for k in range(idx.num_states):
            terms = [(idx.link_state(int(e), k), 1.0) for e in out_links]
            terms += [(idx.link_state(int(e), k), -1.0) for e in in_links]
            model.add_constraint(
                LinearConstraint(
                    f"state_symmetry[p={p},k={k}]", tuple(terms), SENSE_EQ, 0.0
                )
            )

    model.freeze()
    return model, idx


def build_legacy(inst: NetworkInstance) -> tuple[MilpModel, VariableIndex]:
    """Legacy formulation with per-port flow balance and no state coupling.

    The original equations index the balance by port while the demand
    endpoints are routers, leaving the port choice undefined. To make the
    defect reproducible the lowest-indexed port owned by the source (target)
    router is designated; the choice is recorded in the model metadata.
    """
    _require_valid(inst)
    idx = VariableIndex.for_instance(inst)
    model = MilpModel()
    model.metadata["kind"] = KIND_LEGACY
    _add_variables(model, idx)
    _set_objective(model, inst, idx)
    _add_common(model, inst, idx)

    _, _, port_router = port_maps(inst)
    designated: list[tuple[int, int]] = []
    for d, dem in enumerate(inst.demands):
        src_ports = np.flatnonzero(port_router == dem.source)
        tgt_ports = np.flatnonzero(port_router == dem.target)
        if src_ports.size == 0:
            raise ValueError(f"demand {d}: source router {dem.source} has no ports")
        if tgt_ports.size == 0:
            raise ValueError(f"demand {d}: target router {dem.target} has no ports")
        designated.append((int(src_ports[0]), int(tgt_ports[0])))
    model.metadata["designated_ports"] = ";".join(
        f"d{d}:src=p{s},tgt=p{t}" for d, (s, t) in enumerate(designated)
    )

    for d in range(idx.num_demands):
        src_p, tgt_p = designated[d]
        for p in range(inst.num_ports):
            out_links = np.flatnonzero(inst.link_out[:, p])
            in_links = np.flatnonzero(inst.link_in[:, p])
            terms = [(idx.route(int(e), d), 1.0) for e in out_links]
            terms += [(idx.route(int(e), d), -1.0) for e in in_links]
            rhs = 1.0 if p == src_p else -1.0 if p == tgt_p else 0.0
            model.add_constraint(
                LinearConstraint(
                    f"port_conserve[d={d},p={p}]", tuple(terms), SENSE_EQ, rhs
                )
            )

    _add_capacity(model, inst, idx)
    model.freeze()
    return model, idx


def build_model(inst: NetworkInstance, kind: str) -> tuple[MilpModel, VariableIndex]:
    if kind == KIND_CORRECTED:
        return build_corrected(inst)
    if kind == KIND_LEGACY:
        return build_legacy(inst)
    raise ValueError(f"unknown model kind {kind!r}")


def objective_value(inst: NetworkInstance, sol) -> float:
    """Total power of a solution: state power plus card and router overhead.

    Computed directly from the instance data, independent of any built model,
    and unconditional: infeasible solutions still have a well-defined value.
    """
    y = np.asarray(sol.link_state, dtype=np.float64)
    x = np.asarray(sol.card_on, dtype=np.float64)
    z = np.asarray(sol.router_on, dtype=np.float64)
    if y.shape != inst.state_power.shape:
        raise ValueError(f"link_state shape {y.shape} does not match instance")
    if x.shape != (inst.num_cards,) or z.shape != (inst.num_routers,):
        raise ValueError("solution dimensions do not match instance")
    return float(
        (inst.state_power * y).sum()
        + inst.card_power @ x
        + inst.router_power @ z
    )

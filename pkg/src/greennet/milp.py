"""Minimal mixed-integer linear program container.

Semantics-free: variables, linear constraints, a minimization objective and
exact evaluation of assignments. Both network model builders target this
container, and the validator uses :meth:`MilpModel.evaluate` as ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

BINARY = "binary"
CONTINUOUS = "continuous"
SENSE_LE = "<="
SENSE_EQ = "="
SENSE_GE = ">="
_SENSES = (SENSE_LE, SENSE_EQ, SENSE_GE)

# Absolute feasibility tolerance for constraint checks and objective
# comparisons. All data is desk scale, so relative tolerances buy nothing.
FEASIBILITY_TOL = 1e-6

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "SENSE_LE",
    "SENSE_EQ",
    "SENSE_GE",
    "FEASIBILITY_TOL",
    "Variable",
    "LinearConstraint",
    "EvalResult",
    "MilpModel",
]


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = BINARY
    lower: float = 0.0
    upper: float = 1.0


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


@dataclass
class EvalResult:
    objective: float
    violations: list[tuple[int, float]]  # (constraint index, signed slack)

    @property
    def feasible(self) -> bool:
        return not self.violations


class MilpModel:
    """Mutable while being built, then frozen and safely shareable."""

    def __init__(self):
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective: list[tuple[int, float]] = []
        self.direction = "minimize"
        self.metadata: dict[str, str] = {}
        self._frozen = False

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def _writable(self):
        if self._frozen:
            raise ValueError("model is frozen")

    def freeze(self):
        self._frozen = True

    def add_variable(self, var: Variable) -> int:
        self._writable()
        if math.isnan(var.lower) or math.isnan(var.upper):
            raise ValueError(f"variable {var.name}: NaN bound")
        if var.kind == BINARY:
            if (var.lower, var.upper) != (0.0, 1.0):
                raise ValueError(f"variable {var.name}: binary bounds must be [0, 1]")
        elif var.kind == CONTINUOUS:
            if var.lower > var.upper:
                raise ValueError(
                    f"variable {var.name}: lower {var.lower} exceeds upper {var.upper}"
                )
        else:
            raise ValueError(f"variable {var.name}: unknown kind {var.kind!r}")
        self.variables.append(var)
        return len(self.variables) - 1

    def add_binary(self, name: str) -> int:
        return self.add_variable(Variable(name, BINARY, 0.0, 1.0))

    def add_constraint(self, con: LinearConstraint) -> int:
        self._writable()
        if con.sense not in _SENSES:
            raise ValueError(f"constraint {con.name}: unknown sense {con.sense!r}")
        if not math.isfinite(con.rhs):
            raise ValueError(f"constraint {con.name}: non-finite rhs")
        seen = set()
        for vid, coef in con.terms:
            if not (0 <= vid < len(self.variables)):
                raise ValueError(f"constraint {con.name}: variable id {vid} out of range")
            if vid in seen:
                raise ValueError(f"constraint {con.name}: duplicate variable id {vid}")
            seen.add(vid)
            if not math.isfinite(coef):
                raise ValueError(f"constraint {con.name}: non-finite coefficient")
        self.constraints.append(con)
        return len(self.constraints) - 1

    def set_objective(self, terms: Iterable[tuple[int, float]]):
        self._writable()
        terms = list(terms)
        seen = set()
        for vid, coef in terms:
            if not (0 <= vid < len(self.variables)):
                raise ValueError(f"objective variable id {vid} out of range")
            if vid in seen:
                raise ValueError(f"objective has duplicate variable id {vid}")
            seen.add(vid)
            if not math.isfinite(coef):
                raise ValueError("objective has non-finite coefficient")
        self.objective = terms

    def evaluate(self, assignment, tol: float = FEASIBILITY_TOL) -> EvalResult:
        """Objective value plus every constraint violated beyond ``tol``.

        The slack is reported signed as lhs - rhs, so a violated <= row has
        positive slack and a violated >= row negative slack.
        """
        x = np.asarray(assignment, dtype=np.float64)
        if x.shape != (len(self.variables),):
            raise ValueError(
                f"assignment length {x.shape} does not match {len(self.variables)} variables"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("assignment contains non-finite values")
        objective = float(sum(coef * x[vid] for vid, coef in self.objective))
        violations: list[tuple[int, float]] = []
        for idx, con in enumerate(self.constraints):
            lhs = float(sum(coef * x[vid] for vid, coef in con.terms))
            slack = lhs - con.rhs
            if con.sense == SENSE_LE:
                bad = slack > tol
            elif con.sense == SENSE_GE:
                bad = slack < -tol
            else:
                bad = abs(slack) > tol
            if bad:
                violations.append((idx, slack))
        return EvalResult(objective=objective, violations=violations)

    def to_arrays(self):
        """Dense export (c, A, senses, b, lo, hi, is_binary) for solvers."""
        n = len(self.variables)
        m = len(self.constraints)
        c = np.zeros(n)
        for vid, coef in self.objective:
            c[vid] = coef
        a = np.zeros((m, n))
        b = np.zeros(m)
        senses = np.zeros(m, dtype=np.int8)  # 0 <=, 1 =, 2 >=
        for i, con in enumerate(self.constraints):
            for vid, coef in con.terms:
                a[i, vid] = coef
            b[i] = con.rhs
            senses[i] = _SENSES.index(con.sense)
        lo = np.array([v.lower for v in self.variables])
        hi = np.array([v.upper for v in self.variables])
        is_binary = np.array([v.kind == BINARY for v in self.variables])
        return c, a, senses, b, lo, hi, is_binary

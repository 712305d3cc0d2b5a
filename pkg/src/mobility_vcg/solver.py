"""Exact welfare maximization for one subclass.

The objective is sum over assigned travelers of ``v - fare - cost_share``,
where ``v`` depends on the final load of the chosen service. Valuations
only fall as loads rise, which makes the branch-and-bound bound below
admissible.

Ties are broken towards the lexicographically smallest flattened
assignment vector. Per traveler that order is: unassigned, then the last
service column, ..., then the first column. Depth-first search visits
children in exactly that order, so the first optimum found is the
canonical one and anything found later with the same value can be pruned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from decimal import Decimal
from typing import Mapping, Optional

import numpy as np

from . import dynamics
from .fixedpoint import ZERO, from_micro, to_micro
from .model import (Assignment, CityNetwork, MobilityService, StructuralError, Subclass,
                    Traveler, TravelRequirements, link_groups, validate_assignment)

ORACLE_BUDGET = 24


class ConstraintError(ValueError):
    """Assignment breaks a row, capacity or link constraint."""


class BudgetError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class WelfareInstance:
    subclass: Subclass
    travelers: Mapping[str, Traveler]
    services: Mapping[str, MobilityService]
    network: CityNetwork
    excluded: Optional[str] = None

    def __post_init__(self):
        if not self.subclass.services:
            raise StructuralError(f"subclass {self.subclass.id} has no feasible services attached")
        for t in self.subclass.members:
            if t not in self.travelers:
                raise StructuralError(f"unknown traveler {t}")
        for s in self.subclass.services:
            if s not in self.services:
                raise StructuralError(f"unknown service {s}")
        if self.excluded is not None and self.excluded not in self.subclass.members:
            raise StructuralError(f"excluded traveler {self.excluded} is not in subclass {self.subclass.id}")

    @property
    def members(self) -> tuple:
        return self.subclass.members

    @property
    def columns(self) -> tuple:
        return self.subclass.services

    def exclude(self, traveler: Optional[str]) -> "WelfareInstance":
        return replace(self, excluded=traveler)

    def with_report(self, traveler: str, req: TravelRequirements) -> "WelfareInstance":
        """Copy in which ``traveler`` reports ``req`` instead."""
        travelers = dict(self.travelers)
        travelers[traveler] = replace(travelers[traveler], req=req)
        return replace(self, travelers=travelers)

    def empty_assignment(self) -> Assignment:
        return Assignment.empty(self.subclass.id, self.members, self.columns)


@dataclass(frozen=True)
class SolveResult:
    assignment: Assignment
    welfare: Decimal
    nodes: int
    optimal: bool = True
    excluded: Optional[str] = None


def welfare(a: Assignment, instance: WelfareInstance) -> Decimal:
    """Sum of valuations minus minimum payments minus operating costs."""
    verdict = validate_assignment(a, instance.subclass, instance.services, instance.network)
    if not verdict:
        raise ConstraintError("; ".join(v.detail for v in verdict.violations))
    rep = dynamics.evaluate(a, instance.travelers, instance.services)
    total = sum((rep.valuations[t] - rep.min_payments[t] for t in a.travelers), ZERO)
    return total - sum(rep.costs.values(), ZERO)


def _net_table(instance: WelfareInstance) -> list:
    """net[r][c][L]: traveler r's contribution on column c when it carries L riders."""
    table = []
    for tid in instance.members:
        req = instance.travelers[tid].req
        row = []
        for sid in instance.columns:
            s = instance.services[sid]
            vals = [0]
            for load in range(1, s.capacity + 1):
                t = dynamics.experienced_travel_time(s, load)
                v = dynamics.valuation(req, s, t)
                vals.append(to_micro(v - s.fare - s.cost_share))
            row.append(vals)
        table.append(row)
    return table


def _link_limits(instance: WelfareInstance) -> list:
    """(column indices, integer rider cap) per used (type, link) pair."""
    col = {s: c for c, s in enumerate(instance.columns)}
    out = []
    for (_, e), group in link_groups(instance.columns, instance.services).items():
        cap = instance.network.link(e).capacity
        out.append((tuple(col[s] for s in group), int(cap // 1)))
    return out


def _result(instance: WelfareInstance, choices: list, value: int, nodes: int) -> SolveResult:
    cols = instance.columns
    a = Assignment.from_choices(instance.subclass.id, instance.members, cols,
                                [None if c is None else cols[c] for c in choices])
    return SolveResult(a, from_micro(value), nodes, True, instance.excluded)


def _solve(instance: WelfareInstance) -> SolveResult:
    n, m = len(instance.members), len(instance.columns)
    net = _net_table(instance)
    caps = [instance.services[s].capacity for s in instance.columns]
    limits = _link_limits(instance)
    col_limits = [[k for k, (cs, _) in enumerate(limits) if c in cs] for c in range(m)]
    limit_load = [0] * len(limits)
    loads = [0] * m
    members = [[] for _ in range(m)]
    choice = [None] * n
    forced_out = instance.members.index(instance.excluded) if instance.excluded is not None else -1

    best_value = None
    best_choice = None
    nodes = 0

    def open_col(c):
        if loads[c] >= caps[c]:
            return False
        return all(limit_load[k] < limits[k][1] for k in col_limits[c])

    def partial_value():
        return sum(net[r][c][loads[c]] for c in range(m) for r in members[c])

    def optimistic(depth):
        total = 0
        for r in range(depth, n):
            if r == forced_out:
                continue
            best = 0
            for c in range(m):
                if open_col(c):
                    best = max(best, net[r][c][loads[c] + 1])
            total += best
        return total

    def dfs(depth):
        nonlocal best_value, best_choice, nodes
        nodes += 1
        if depth == n:
            value = partial_value()
            if best_value is None or value > best_value:
                best_value, best_choice = value, list(choice)
            return
        if best_value is not None and partial_value() + optimistic(depth) <= best_value:
            return
        choice[depth] = None
        dfs(depth + 1)
        if depth == forced_out:
            return
        for c in reversed(range(m)):
            if not open_col(c):
                continue
            loads[c] += 1
            members[c].append(depth)
            for k in col_limits[c]:
                limit_load[k] += 1
            choice[depth] = c
            dfs(depth + 1)
            choice[depth] = None
            for k in col_limits[c]:
                limit_load[k] -= 1
            members[c].pop()
            loads[c] -= 1

    dfs(0)
    return _result(instance, best_choice, best_value, nodes)


def solve_welfare_max(instance: WelfareInstance) -> SolveResult:
    if instance.excluded is not None:
        raise StructuralError("welfare maximization takes no excluded traveler; use solve_exclusion")
    return _solve(instance)


def solve_exclusion(instance: WelfareInstance, excluded: Optional[str] = None) -> SolveResult:
    """Same objective with the excluded traveler's row pinned to zero."""
    if excluded is not None:
        instance = instance.exclude(excluded)
    if instance.excluded is None:
        raise StructuralError("solve_exclusion needs an excluded traveler")
    return _solve(instance)


def brute_force_oracle(instance: WelfareInstance) -> SolveResult:
    """Enumerate every traveler -> (service or none) map and keep the best.

    Candidates are generated in tie-break order, so ``argmax`` (first
    maximum) picks the same optimum as the search.
    """
    members, cols = instance.members, instance.columns
    n, m = len(members), len(cols)
    if n * m > ORACLE_BUDGET:
        raise BudgetError(f"{n} travelers x {m} services exceeds the enumeration budget {ORACLE_BUDGET}")
    if n == 0:
        return SolveResult(instance.empty_assignment(), ZERO, 1, True, instance.excluded)

    # rank 0 = unassigned, rank k = column m - k
    ranks = np.array(list(itertools.product(range(m + 1), repeat=n)), dtype=np.int64)
    if instance.excluded is not None:
        ranks = ranks[ranks[:, members.index(instance.excluded)] == 0]
    colidx = np.where(ranks > 0, m - ranks, -1)
    loads = np.stack([(colidx == c).sum(axis=1) for c in range(m)], axis=1)

    feasible = np.ones(len(ranks), dtype=bool)
    for c, sid in enumerate(cols):
        feasible &= loads[:, c] <= instance.services[sid].capacity
    for (_, e), group in link_groups(cols, instance.services).items():
        total = sum(loads[:, cols.index(s)] for s in group)
        feasible &= total <= instance.network.link(e).capacity

    # per-rider contribution by (traveler, column, load); loads above capacity are infeasible anyway
    contrib = np.zeros((n, m, n + 1), dtype=np.int64)
    for r, tid in enumerate(members):
        req = instance.travelers[tid].req
        for c, sid in enumerate(cols):
            s = instance.services[sid]
            for load in range(1, min(n, s.capacity) + 1):
                theta = s.base_time + s.delay * (load - 1)
                v = dynamics.valuation(req, s, theta)
                contrib[r, c, load] = to_micro(v) - to_micro(s.fare) - to_micro(s.cost_share)

    rows = np.arange(len(ranks))
    value = np.zeros(len(ranks), dtype=np.int64)
    for r in range(n):
        c = colidx[:, r]
        safe = np.where(c >= 0, c, 0)
        got = contrib[r, safe, loads[rows, safe]]
        value += np.where(c >= 0, got, 0)

    value = np.where(feasible, value, np.iinfo(np.int64).min)
    best = int(np.argmax(value))
    choices = [None if x < 0 else int(x) for x in colidx[best]]
    return _result(instance, choices, int(value[best]), len(ranks))

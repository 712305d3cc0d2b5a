"""Welfare-maximizing assignment plus externality payments for one subclass.

One welfare solve fixes the assignment; one exclusion solve per traveler
prices the externality that traveler imposes on everyone else.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Optional

from . import dynamics
from .fixedpoint import ZERO
from .model import Assignment, StructuralError, Subclass
from .solver import WelfareInstance, solve_exclusion, solve_welfare_max

THREADS_ENV = "MOBILITY_VCG_THREADS"


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        threads = int(raw) if raw else 1
    return max(1, int(threads))


@dataclass(frozen=True)
class TravelerOutcome:
    id: str
    service: Optional[str]
    time: Decimal
    valuation: Decimal
    min_payment: Decimal
    payment: Decimal
    utility: Decimal
    excluded_welfare: Optional[Decimal]  # None for outside-option travelers
    outside: bool = False


@dataclass(frozen=True)
class MarketOutcome:
    subclass: str
    assignment: Assignment
    travelers: tuple
    welfare: Decimal
    revenue: Decimal
    service_costs: dict

    def traveler(self, tid: str) -> TravelerOutcome:
        for t in self.travelers:
            if t.id == tid:
                return t
        raise KeyError(tid)

    @property
    def total_cost(self) -> Decimal:
        return sum(self.service_costs.values(), ZERO)

    @property
    def total_min_payment(self) -> Decimal:
        return sum((t.min_payment for t in self.travelers if t.service is not None), ZERO)


def compute_payment(welfare_max: Decimal, valuation_at_opt: Decimal,
                    excluded_welfare: Decimal) -> Decimal:
    """Externality charge: welfare without the traveler minus others' welfare with them."""
    return excluded_welfare - (welfare_max - valuation_at_opt)


def outside_option(traveler) -> tuple:
    """(payment, utility) for a traveler who rejects the recommendation."""
    vbar = traveler.req.vbar
    return vbar, ZERO


def _without(instance: WelfareInstance, gone: set) -> WelfareInstance:
    sub = instance.subclass
    kept = tuple(t for t in sub.members if t not in gone)
    return WelfareInstance(Subclass(sub.id, sub.pair, kept, sub.services),
                           instance.travelers, instance.services, instance.network)


def run_market(instance: WelfareInstance, rejecting: Iterable[str] = (),
               threads: Optional[int] = None) -> MarketOutcome:
    """Assignment, payments and utilities for one subclass.

    Travelers in ``rejecting`` take their outside option: they leave the
    market before it is solved and pay their maximum willingness-to-pay.
    """
    if instance.excluded is not None:
        raise StructuralError("run_market takes the full instance, not an exclusion instance")
    gone = set(rejecting)
    unknown = gone - set(instance.members)
    if unknown:
        raise StructuralError(f"rejecting travelers not in subclass: {sorted(unknown)}")
    full_members = instance.members
    if gone:
        instance = _without(instance, gone)

    best = solve_welfare_max(instance)
    workers = thread_count(threads)
    if workers == 1 or len(instance.members) < 2:
        excl = {t: solve_exclusion(instance, t) for t in instance.members}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            excl = dict(zip(instance.members,
                            pool.map(lambda t: solve_exclusion(instance, t), instance.members)))

    a = best.assignment
    rep = dynamics.evaluate(a, instance.travelers, instance.services)
    rows = []
    for tid in full_members:
        if tid in gone:
            p, u = outside_option(instance.travelers[tid])
            rows.append(TravelerOutcome(tid, None, ZERO, instance.travelers[tid].req.vbar,
                                        ZERO, p, u, None, outside=True))
            continue
        v = rep.valuations[tid]
        w3 = excl[tid].welfare
        p = compute_payment(best.welfare, v, w3)
        rows.append(TravelerOutcome(tid, a.choice(tid), rep.times[tid], v, rep.min_payments[tid],
                                    p, dynamics.utility(v, p), w3))
    revenue = sum((r.payment for r in rows if not r.outside), ZERO)
    return MarketOutcome(instance.subclass.id, a, tuple(rows), best.welfare, revenue,
                         dict(rep.costs))


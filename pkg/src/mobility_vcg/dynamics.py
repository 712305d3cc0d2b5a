"""Travel times, inconvenience, valuations, costs and minimum payments.

Experienced time follows an affine congestion model: the first rider gets
the base time and every extra occupant adds ``delay`` minutes. Unassigned
travelers have valuation 0, minimum payment 0 and add no cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Mapping, Optional

from .fixedpoint import ZERO, round_q
from .model import Assignment, CapacityError, MobilityService, Traveler, TravelRequirements


def experienced_travel_time(service: MobilityService, load: int) -> Decimal:
    if load < 0:
        raise ValueError(f"negative load {load}")
    if load > service.capacity:
        raise CapacityError(f"service {service.id}: load {load} exceeds capacity {service.capacity}")
    return service.base_time + service.delay * max(0, load - 1)


def inconvenience(req: TravelRequirements, theta_tilde: Decimal) -> Decimal:
    """Monetary cost of the gap between experienced and preferred time.

    Clamped to ``[0, vbar]`` so the valuation stays within ``[0, vbar]``.
    """
    raw = round_q(req.alpha * (theta_tilde - req.theta))
    return min(max(raw, ZERO), req.vbar)


def valuation(req: TravelRequirements, assigned: Optional[MobilityService],
              theta_tilde: Decimal = ZERO) -> Decimal:
    if assigned is None:
        return ZERO
    return req.vbar - inconvenience(req, theta_tilde)


def utility(v: Decimal, p: Decimal) -> Decimal:
    return v - p


def operating_cost(service: MobilityService, a: Assignment) -> Decimal:
    return service.cost_share * a.load(service.id)


def min_payment(traveler: Traveler | str, a: Assignment,
                services: Mapping[str, MobilityService]) -> Decimal:
    tid = traveler if isinstance(traveler, str) else traveler.id
    sid = a.choice(tid)
    return ZERO if sid is None else services[sid].fare


@dataclass(frozen=True)
class DynamicsReport:
    times: dict       # traveler -> experienced minutes (0 if unassigned)
    inconvenience: dict
    valuations: dict
    costs: dict       # service -> operating cost
    min_payments: dict


def evaluate(a: Assignment, travelers: Mapping[str, Traveler],
             services: Mapping[str, MobilityService]) -> DynamicsReport:
    """All per-traveler and per-service quantities for one assignment."""
    loads = a.loads()
    times, phis, vals, sigmas = {}, {}, {}, {}
    for tid in a.travelers:
        sid = a.choice(tid)
        req = travelers[tid].req
        if sid is None:
            times[tid] = phis[tid] = vals[tid] = sigmas[tid] = ZERO
            continue
        s = services[sid]
        t = experienced_travel_time(s, loads[sid])
        times[tid] = t
        phis[tid] = inconvenience(req, t)
        vals[tid] = req.vbar - phis[tid]
        sigmas[tid] = s.fare
    costs = {sid: operating_cost(services[sid], a) for sid in a.services}
    return DynamicsReport(times, phis, vals, costs, sigmas)

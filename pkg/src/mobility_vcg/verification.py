"""Executable checks of the market's incentive and budget properties.

Every check returns a ``PropertyReport``. A failing report carries a
witness dict holding enough to replay the violation on its own
(see ``replay_ic``). All comparisons are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Optional, Sequence

from . import dynamics
from .fixedpoint import ZERO, fmt, round_q
from .mechanism import MarketOutcome, compute_payment, run_market
from .model import TravelRequirements, ValidationError
from .solver import WelfareInstance, solve_exclusion, solve_welfare_max


@dataclass(frozen=True)
class PropertyReport:
    name: str
    instance: str
    passed: bool
    witness: Optional[dict] = None
    checked: int = 0
    notes: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def _fail(name, instance, checked, witness, notes=None):
    return PropertyReport(name, instance, False, witness, checked, notes or {})


def check_ir(outcome: MarketOutcome) -> PropertyReport:
    for t in outcome.travelers:
        if t.utility < 0:
            return _fail("ir", outcome.subclass, len(outcome.travelers),
                         {"traveler": t.id, "utility": fmt(t.utility)})
    return PropertyReport("ir", outcome.subclass, True, None, len(outcome.travelers))


def check_utility_identity(outcome: MarketOutcome) -> PropertyReport:
    """Each participant's utility equals welfare minus welfare without them."""
    n = 0
    for t in outcome.travelers:
        if t.outside:
            continue
        n += 1
        if t.utility != outcome.welfare - t.excluded_welfare:
            return _fail("utility-identity", outcome.subclass, n,
                         {"traveler": t.id, "utility": fmt(t.utility),
                          "welfare": fmt(outcome.welfare),
                          "excluded_welfare": fmt(t.excluded_welfare)})
    return PropertyReport("utility-identity", outcome.subclass, True, None, n)


def check_sustainability(outcome: MarketOutcome) -> PropertyReport:
    n = 0
    for t in outcome.travelers:
        if t.outside:
            continue
        n += 1
        if t.payment < t.min_payment:
            return _fail("sustainability", outcome.subclass, n,
                         {"traveler": t.id, "payment": fmt(t.payment),
                          "min_payment": fmt(t.min_payment)})
    if outcome.revenue < outcome.total_min_payment:
        return _fail("sustainability", outcome.subclass, n,
                     {"revenue": fmt(outcome.revenue),
                      "min_payments": fmt(outcome.total_min_payment)})
    return PropertyReport("sustainability", outcome.subclass, True, None, n,
                          {"revenue": fmt(outcome.revenue),
                           "operating_cost": fmt(outcome.total_cost)})


def _spread(lo: Decimal, hi: Decimal, n: int) -> list:
    if n == 1:
        return [round_q((lo + hi) / 2)]
    return [round_q(lo + (hi - lo) * k / (n - 1)) for k in range(n)]


def default_grid(req: TravelRequirements, points: int = 5) -> list:
    """Misreports spanning under- and over-reporting on every dimension."""
    alphas = _spread(Decimal("0.1"), Decimal("0.9"), points)
    thetas = _spread(ZERO, 2 * req.theta, points)
    vbars = _spread(ZERO, 2 * req.vbar, points)
    return [TravelRequirements(a, t, v) for a in alphas for t in thetas for v in vbars]


def misreport_utility(instance: WelfareInstance, traveler: str,
                      report: TravelRequirements) -> tuple:
    """Traveler's true utility when the market runs on ``report``.

    Returns (utility, assigned service). The valuation is taken under the
    true requirements at the assignment the misreport induces; the payment
    is what the mechanism charges given the misreport.
    """
    lied = instance.with_report(traveler, report)
    best = solve_welfare_max(lied)
    excluded = solve_exclusion(lied, traveler)
    a = best.assignment
    reported_v = dynamics.evaluate(a, lied.travelers, lied.services).valuations[traveler]
    true_v = dynamics.evaluate(a, instance.travelers, instance.services).valuations[traveler]
    payment = compute_payment(best.welfare, reported_v, excluded.welfare)
    return true_v - payment, a.choice(traveler)


def _req_dict(req: TravelRequirements) -> dict:
    return {"alpha": fmt(req.alpha), "theta": fmt(req.theta), "vbar": fmt(req.vbar)}


def check_ic(instance: WelfareInstance, traveler: str,
             grid: Optional[Sequence[TravelRequirements]] = None,
             points: int = 5) -> PropertyReport:
    """Falsification search: no misreport on the grid may beat the truth."""
    truth = instance.travelers[traveler].req
    if grid is None:
        grid = default_grid(truth, points)
    for g in grid:
        if not isinstance(g, TravelRequirements):
            raise ValidationError(f"grid point {g!r} is not a TravelRequirements")
    honest = run_market(instance, threads=1).traveler(traveler).utility
    worst_gap = None
    for k, g in enumerate(grid):
        u, service = misreport_utility(instance, traveler, g)
        gap = u - honest
        worst_gap = gap if worst_gap is None else max(worst_gap, gap)
        if u > honest:
            return _fail("ic", instance.subclass.id, k + 1,
                         {"traveler": traveler, "misreport": _req_dict(g),
                          "truthful_utility": fmt(honest), "misreport_utility": fmt(u),
                          "service": service})
    return PropertyReport("ic", instance.subclass.id, True, None, len(grid),
                          {"traveler": traveler, "truthful_utility": fmt(honest),
                           "max_gain": fmt(worst_gap if worst_gap is not None else ZERO)})


def replay_ic(instance: WelfareInstance, witness: dict) -> tuple:
    """Recompute (truthful, misreport) utilities for an IC witness."""
    tid = witness["traveler"]
    report = TravelRequirements(**witness["misreport"])
    honest = run_market(instance, threads=1).traveler(tid).utility
    return honest, misreport_utility(instance, tid, report)[0]


def check_exclusion_lemmas(instance: WelfareInstance) -> PropertyReport:
    """Exclusion effects on times, valuations and operating cost.

    For each traveler, the welfare optimum is compared against the same
    assignment with that traveler's row zeroed. Removing a rider can only
    shorten everybody else's trip, so all three relations must hold.
    The re-optimized exclusion assignment may reshuffle riders and is only
    reported as a diagnostic (``notes``), not judged.
    """
    sid = instance.subclass.id
    best = solve_welfare_max(instance).assignment
    base = dynamics.evaluate(best, instance.travelers, instance.services)
    base_cost = sum(base.costs.values(), ZERO)
    reshuffled = []
    checked = 0
    for ell in instance.members:
        dropped = best.without(ell)
        rep = dynamics.evaluate(dropped, instance.travelers, instance.services)
        others = [t for t in instance.members if t != ell]
        checked += 1
        for t in others:
            if best.choice(t) is not None and rep.times[t] > base.times[t]:
                return _fail("lemmas", sid, checked,
                             {"excluded": ell, "relation": "time", "traveler": t,
                              "before": fmt(base.times[t]), "after": fmt(rep.times[t])})
        lhs = sum((base.valuations[t] for t in others), ZERO)
        rhs = sum(rep.valuations.values(), ZERO)
        if lhs > rhs:
            return _fail("lemmas", sid, checked,
                         {"excluded": ell, "relation": "valuation",
                          "with": fmt(lhs), "without": fmt(rhs)})
        cost = sum(rep.costs.values(), ZERO)
        if cost > base_cost:
            return _fail("lemmas", sid, checked,
                         {"excluded": ell, "relation": "cost",
                          "with": fmt(base_cost), "without": fmt(cost)})
        opt = dynamics.evaluate(solve_exclusion(instance, ell).assignment,
                                instance.travelers, instance.services)
        if sum(opt.costs.values(), ZERO) > base_cost or \
                sum(opt.valuations.values(), ZERO) < lhs:
            reshuffled.append(ell)
    return PropertyReport("lemmas", sid, True, None, checked,
                          {"reoptimized_exceptions": reshuffled})


def check_valuation_floor(instance: WelfareInstance) -> PropertyReport:
    best = solve_welfare_max(instance).assignment
    rep = dynamics.evaluate(best, instance.travelers, instance.services)
    n = 0
    for t in instance.members:
        if best.choice(t) is None:
            continue
        n += 1
        if rep.valuations[t] < rep.min_payments[t]:
            return _fail("valuation-floor", instance.subclass.id, n,
                         {"traveler": t, "valuation": fmt(rep.valuations[t]),
                          "min_payment": fmt(rep.min_payments[t])})
    return PropertyReport("valuation-floor", instance.subclass.id, True, None, n)


PROPERTIES = ("ic", "ir", "sust", "lemmas", "floor")


def verify_instance(instance: WelfareInstance, properties: Iterable[str] = PROPERTIES,
                    points: int = 5) -> list:
    """Run the selected checks on one subclass, in a fixed order."""
    wanted = set(properties)
    unknown = wanted - set(PROPERTIES)
    if unknown:
        raise ValueError(f"unknown properties: {sorted(unknown)}")
    out = []
    outcome = run_market(instance, threads=1) if wanted & {"ir", "sust"} else None
    if "ir" in wanted:
        out.append(check_ir(outcome))
        out.append(check_utility_identity(outcome))
    if "sust" in wanted:
        out.append(check_sustainability(outcome))
    if "lemmas" in wanted:
        out.append(check_exclusion_lemmas(instance))
    if "floor" in wanted:
        out.append(check_valuation_floor(instance))
    if "ic" in wanted:
        out.extend(check_ic(instance, t, points=points) for t in instance.members)
    return out

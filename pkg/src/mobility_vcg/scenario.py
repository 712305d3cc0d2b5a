"""Scenario files, random scenario generation and outcome reports.

Scenario file (JSON)::

    {"network":   {"zones": [...], "links": [{"id", "u", "v", "capacity"}]},
     "services":  [{"id", "type", "link", "pair": [o, d], "epsilon", "t0_min",
                    "delta_min_per_rider", "cseat", "fare"}],
     "travelers": [{"id", "origin", "dest", "alpha", "theta_min", "vbar",
                    "rejects"?}],
     "meta":      {"name", "description", "seed"?}}

Money and time values are decimal strings with at most six fractional
digits.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional, Sequence

from . import dynamics
from .fixedpoint import ZERO, D, PrecisionError, fmt
from .mechanism import MarketOutcome, TravelerOutcome
from .model import (Assignment, CityNetwork, Link, MobilityService, Traveler,
                    TravelRequirements, ValidationError, check_services, feasible_services,
                    partition_travelers)
from .solver import WelfareInstance

OUTCOME_FORMAT = "mobility-vcg/outcome"
NORMALIZATION_RATIO = 100


class ParseError(ValueError):
    """Malformed scenario or outcome document; message carries the location."""


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    network: CityNetwork
    services: tuple
    travelers: tuple
    seed: Optional[int] = None
    name: str = ""
    description: str = ""
    rejecting: frozenset = frozenset()
    warnings: tuple = field(default=(), compare=False)

    @property
    def service_map(self) -> dict:
        return {s.id: s for s in self.services}

    @property
    def traveler_map(self) -> dict:
        return {t.id: t for t in self.travelers}

    def subclasses(self) -> list:
        return partition_travelers(self.travelers, self.network, self.services)

    def instances(self) -> list:
        svc, trav = self.service_map, self.traveler_map
        return [WelfareInstance(sub, trav, svc, self.network) for sub in self.subclasses()]


# -- parsing ---------------------------------------------------------------

def _get(obj, key, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in obj:
        raise ParseError(f"{where}: missing field '{key}'")
    return obj[key]


def _num(obj, key, where) -> Decimal:
    raw = _get(obj, key, where)
    if isinstance(raw, bool) or not isinstance(raw, (str, int, Decimal)):
        raise ParseError(f"{where}.{key}: expected a decimal string, got {raw!r}")
    try:
        return D(raw)
    except PrecisionError as exc:
        raise ParseError(f"{where}.{key}: {exc}") from None
    except (TypeError, ValueError):
        raise ParseError(f"{where}.{key}: not a decimal number: {raw!r}") from None


def _int(obj, key, where) -> int:
    raw = _get(obj, key, where)
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise ParseError(f"{where}.{key}: expected an integer, got {raw!r}")
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"{where}.{key}: expected an integer, got {raw!r}") from None


def _str(obj, key, where) -> str:
    raw = _get(obj, key, where)
    if not isinstance(raw, str):
        raise ParseError(f"{where}.{key}: expected a string, got {raw!r}")
    return raw


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and fully validate a scenario; raises ``ValidationError`` listing all problems."""
    problems = []
    net = _get(doc, "network", "$")
    zones = _get(net, "zones", "network")
    if not isinstance(zones, list) or not all(isinstance(z, str) for z in zones):
        raise ParseError("network.zones: expected a list of strings")
    links = []
    for k, raw in enumerate(_get(net, "links", "network")):
        where = f"network.links[{k}]"
        try:
            links.append(Link(_str(raw, "id", where), _str(raw, "u", where), _str(raw, "v", where),
                              _num(raw, "capacity", where)))
        except ValidationError as exc:
            problems.extend(exc.problems)
    if problems:
        raise ValidationError(problems)
    network = CityNetwork(frozenset(zones), tuple(links))

    services = []
    for k, raw in enumerate(_get(doc, "services", "$")):
        where = f"services[{k}]"
        pair = _get(raw, "pair", where)
        if not isinstance(pair, list) or len(pair) != 2 or not all(isinstance(z, str) for z in pair):
            raise ParseError(f"{where}.pair: expected [origin, destination]")
        try:
            services.append(MobilityService(
                _str(raw, "id", where), _int(raw, "type", where), _str(raw, "link", where),
                tuple(pair), _int(raw, "epsilon", where), _num(raw, "t0_min", where),
                _num(raw, "delta_min_per_rider", where), _num(raw, "cseat", where),
                _num(raw, "fare", where)))
        except ValidationError as exc:
            problems.extend(exc.problems)
    problems.extend(check_services(network, services))

    travelers, rejecting = [], set()
    seen = set()
    for k, raw in enumerate(_get(doc, "travelers", "$")):
        where = f"travelers[{k}]"
        tid = _str(raw, "id", where)
        try:
            req = TravelRequirements(_num(raw, "alpha", where), _num(raw, "theta_min", where),
                                     _num(raw, "vbar", where))
            t = Traveler(tid, _str(raw, "origin", where), _str(raw, "dest", where), req)
        except ValidationError as exc:
            problems.extend(f"traveler {tid}: {p}" for p in exc.problems)
            continue
        if tid in seen:
            problems.append(f"duplicate traveler id {tid}")
        seen.add(tid)
        for z in (t.origin, t.dest):
            if z not in network.zones:
                problems.append(f"traveler {tid}: unknown zone {z}")
        if raw.get("rejects", False):
            rejecting.add(tid)
        travelers.append(t)
    if problems:
        raise ValidationError(problems)

    for sub in partition_travelers(travelers, network):
        try:
            feasible_services(sub, services)
        except ValidationError as exc:
            problems.extend(exc.problems)
    if problems:
        raise ValidationError(problems)

    meta = doc.get("meta", {}) or {}
    seed = meta.get("seed")
    sc = Scenario(network, tuple(sorted(services, key=lambda s: s.id)),
                  tuple(sorted(travelers, key=lambda t: t.id)),
                  None if seed is None else int(seed), str(meta.get("name", "")),
                  str(meta.get("description", "")), frozenset(rejecting))
    return Scenario(sc.network, sc.services, sc.travelers, sc.seed, sc.name, sc.description,
                    sc.rejecting, tuple(scenario_warnings(sc)))


def scenario_warnings(sc: Scenario) -> list:
    """Soft checks: capacity adequacy and rough normalization of money terms."""
    out = []
    svc = sc.service_map
    total_cap = sum(s.capacity for s in sc.services)
    if total_cap != len(sc.travelers):
        out.append(f"aggregate usage capacity {total_cap} != traveler count {len(sc.travelers)}")
    max_phi, max_sigma, max_cost = ZERO, ZERO, ZERO
    for sub in sc.subclasses():
        cap = sum(svc[s].capacity for s in sub.services)
        if cap < len(sub.members):
            out.append(f"subclass {sub.id}: capacity {cap} < {len(sub.members)} travelers")
        for tid in sub.members:
            req = sc.traveler_map[tid].req
            for s in sub.services:
                full = dynamics.experienced_travel_time(svc[s], svc[s].capacity)
                max_phi = max(max_phi, dynamics.inconvenience(req, full))
        for s in sub.services:
            max_sigma = max(max_sigma, svc[s].fare)
            max_cost = max(max_cost, svc[s].cost_share * svc[s].capacity)
    scales = [x for x in (max_phi, max_sigma, max_cost) if x > 0]
    if scales and max(scales) > NORMALIZATION_RATIO * min(scales):
        out.append(f"inconvenience/fare/cost scales differ by more than {NORMALIZATION_RATIO}x "
                   f"(max {fmt(max_phi)}, {fmt(max_sigma)}, {fmt(max_cost)})")
    return out


def scenario_to_dict(sc: Scenario) -> dict:
    meta = {"name": sc.name, "description": sc.description}
    if sc.seed is not None:
        meta["seed"] = sc.seed
    travelers = []
    for t in sc.travelers:
        rec = {"id": t.id, "origin": t.origin, "dest": t.dest, "alpha": fmt(t.req.alpha),
               "theta_min": fmt(t.req.theta), "vbar": fmt(t.req.vbar)}
        if t.id in sc.rejecting:
            rec["rejects"] = True
        travelers.append(rec)
    return {
        "network": {"zones": sorted(sc.network.zones),
                    "links": [{"id": l.id, "u": l.u, "v": l.v, "capacity": fmt(l.capacity)}
                              for l in sc.network.links]},
        "services": [{"id": s.id, "type": s.type, "link": s.link, "pair": list(s.pair),
                      "epsilon": s.capacity, "t0_min": fmt(s.base_time),
                      "delta_min_per_rider": fmt(s.delay), "cseat": fmt(s.cost_share),
                      "fare": fmt(s.fare)} for s in sc.services],
        "travelers": travelers,
        "meta": meta,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_json(text: str, source: str = "<string>") -> dict:
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(parse_json(path.read_text(), str(path)))


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(scenario_to_dict(sc)))


# -- generation ------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorRanges:
    alpha: tuple = ("0.05", "0.95")
    base_time: tuple = ("5", "45")
    delay: tuple = ("0", "4")
    cost_share: tuple = ("0", "4")
    fare: tuple = ("0", "8")
    capacity: tuple = (1, 4)
    theta_factor: tuple = ("0.6", "1.2")   # preferred time relative to fastest base time
    vbar_scale: tuple = ("0", "3")         # max willingness relative to mean fare + cost + 5
    zero_delay_share: float = 0.25


def _uniform(rng: random.Random, lo, hi, places: int = 2) -> Decimal:
    lo, hi = Decimal(lo), Decimal(hi)
    step = Decimal(1).scaleb(-places)
    ticks = int((hi - lo) / step)
    return D(lo + step * rng.randint(0, ticks))


def generate_scenario(seed: int, zones: int, services: int, travelers: int,
                      ranges: GeneratorRanges = GeneratorRanges()) -> Scenario:
    """Random valid scenario, deterministic in ``seed``.

    Services are spread over as many origin-destination pairs as allow two
    options each; travelers are drawn onto those pairs only.
    """
    if zones < 2:
        raise GenerationError("need at least 2 zones")
    if services < 2:
        raise GenerationError("need at least 2 services so every traveler has two options")
    if travelers < 0:
        raise GenerationError("traveler count must be >= 0")
    rng = random.Random(seed)
    names = [f"Z{z}" for z in range(1, zones + 1)]
    all_pairs = [(o, d) for o in names for d in names if o != d]
    rng.shuffle(all_pairs)
    pairs = sorted(all_pairs[:max(1, min(services // 2, len(all_pairs)))])

    per_pair = {p: 2 for p in pairs}
    for _ in range(services - 2 * len(pairs)):
        per_pair[rng.choice(pairs)] += 1

    link_of, links, svc = {}, [], []
    n = 0
    for p in pairs:
        for _ in range(per_pair[p]):
            n += 1
            h = rng.randint(1, 3)
            key = (h, frozenset(p))
            if key not in link_of:
                link_of[key] = f"e{len(links) + 1:02d}"
                cap = rng.randint(1, 2 * ranges.capacity[1] + 2)
                links.append(Link(link_of[key], p[0], p[1], D(cap)))
            delay = ZERO if rng.random() < ranges.zero_delay_share else _uniform(rng, *ranges.delay)
            svc.append(MobilityService(
                f"s{n:02d}", h, link_of[key], p, rng.randint(*ranges.capacity),
                _uniform(rng, *ranges.base_time), delay, _uniform(rng, *ranges.cost_share),
                _uniform(rng, *ranges.fare)))

    trav = []
    for i in range(1, travelers + 1):
        p = rng.choice(pairs)
        options = [s for s in svc if s.pair == p]
        fastest = min(s.base_time for s in options)
        mean_price = sum((s.fare + s.cost_share for s in options), ZERO) / len(options)
        theta = D(round(fastest * _uniform(rng, *ranges.theta_factor), 2))
        vbar = D(round((mean_price + 5) * _uniform(rng, *ranges.vbar_scale), 2))
        alpha = _uniform(rng, *ranges.alpha, places=3)
        trav.append(Traveler(f"t{i:02d}", p[0], p[1], TravelRequirements(alpha, theta, vbar)))

    doc = scenario_to_dict(Scenario(CityNetwork(frozenset(names), tuple(links)), tuple(svc),
                                    tuple(trav), seed, f"generated-{seed}",
                                    f"{zones} zones, {services} services, {travelers} travelers"))
    return scenario_from_dict(doc)


# -- outcomes and reports --------------------------------------------------

def _opt(x: Optional[Decimal]):
    return None if x is None else fmt(x)


def outcome_to_dict(o: MarketOutcome) -> dict:
    a = o.assignment
    return {
        "subclass": o.subclass,
        "assignment": {"travelers": list(a.travelers), "services": list(a.services),
                       "rows": [list(r) for r in a.rows]},
        "travelers": [{"id": t.id, "service": t.service, "time": fmt(t.time),
                       "valuation": fmt(t.valuation), "min_payment": fmt(t.min_payment),
                       "payment": fmt(t.payment), "utility": fmt(t.utility),
                       "excluded_welfare": _opt(t.excluded_welfare), "outside": t.outside}
                      for t in o.travelers],
        "welfare": fmt(o.welfare),
        "revenue": fmt(o.revenue),
        "service_costs": {k: fmt(v) for k, v in sorted(o.service_costs.items())},
    }


def outcome_from_dict(doc: dict) -> MarketOutcome:
    a = doc["assignment"]
    rows = []
    for k, t in enumerate(doc["travelers"]):
        w3 = t["excluded_welfare"]
        rows.append(TravelerOutcome(t["id"], t["service"], D(t["time"]), D(t["valuation"]),
                                    D(t["min_payment"]), D(t["payment"]), D(t["utility"]),
                                    None if w3 is None else D(w3), bool(t["outside"])))
    return MarketOutcome(doc["subclass"],
                         Assignment(doc["subclass"], tuple(a["travelers"]), tuple(a["services"]),
                                    tuple(tuple(r) for r in a["rows"])),
                         tuple(rows), D(doc["welfare"]), D(doc["revenue"]),
                         {k: D(v) for k, v in doc["service_costs"].items()})


def outcomes_document(outcomes: Sequence[MarketOutcome], name: str = "") -> dict:
    return {"format": OUTCOME_FORMAT, "version": 1, "scenario": name,
            "outcomes": [outcome_to_dict(o) for o in outcomes],
            "welfare": fmt(sum((o.welfare for o in outcomes), ZERO)),
            "revenue": fmt(sum((o.revenue for o in outcomes), ZERO))}


def read_outcome_file(path) -> tuple:
    """(scenario name, outcomes) from a machine outcome file."""
    path = Path(path)
    doc = parse_json(path.read_text(), str(path))
    if not isinstance(doc, dict) or doc.get("format") != OUTCOME_FORMAT:
        raise ParseError(f"{path}: not an outcome file")
    try:
        return str(doc.get("scenario", "")), [outcome_from_dict(o) for o in doc["outcomes"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed outcome: {exc}") from None


def load_outcomes(path) -> list:
    return read_outcome_file(path)[1]


def _human(o: MarketOutcome) -> str:
    head = ("traveler", "service", "time", "valuation", "payment", "utility", "min_payment")
    body = [(t.id, t.service or ("outside" if t.outside else "-"), fmt(t.time),
             fmt(t.valuation), fmt(t.payment), fmt(t.utility), fmt(t.min_payment))
            for t in o.travelers]
    widths = [max(len(r[c]) for r in [head, *body]) for c in range(len(head))]
    line = lambda r: "  ".join(x.rjust(w) if c >= 2 else x.ljust(w)
                               for c, (x, w) in enumerate(zip(r, widths))).rstrip()
    out = [f"subclass {o.subclass}  ({len(o.travelers)} travelers)", line(head)]
    out += [line(r) for r in body]
    if any(t.outside for t in o.travelers):
        out.append("(outside-option payments are made off-market and excluded from revenue)")
    out.append(f"welfare {fmt(o.welfare)}  revenue {fmt(o.revenue)}  "
               f"min payments {fmt(o.total_min_payment)}  operating cost {fmt(o.total_cost)}")
    return "\n".join(out)


def emit_report(outcome, format: str = "human", name: str = "") -> str:
    """Render one outcome or a list of them as text or as the JSON outcome document."""
    outcomes = [outcome] if isinstance(outcome, MarketOutcome) else list(outcome)
    if format == "machine":
        return dumps(outcomes_document(outcomes, name))
    if format != "human":
        raise ValueError(f"unknown report format {format!r}")
    parts = [_human(o) for o in outcomes]
    total_w = sum((o.welfare for o in outcomes), ZERO)
    total_r = sum((o.revenue for o in outcomes), ZERO)
    parts.append(f"total welfare {fmt(total_w)}  total revenue {fmt(total_r)}")
    return "\n\n".join(parts) + "\n"

"""Network, services, travelers, subclasses and assignments.

All types are frozen dataclasses; index sets are kept in sorted-id order so
that every downstream solve breaks ties the same way.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping, Optional, Sequence

from .fixedpoint import D


class ValidationError(ValueError):
    """Input violates a model invariant. ``problems`` lists every violation."""

    def __init__(self, problems: Sequence[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class StructuralError(ValueError):
    """Index sets or dimensions do not line up."""


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    id: str
    u: str
    v: str
    capacity: Decimal

    def __post_init__(self):
        object.__setattr__(self, "capacity", D(self.capacity))
        if self.capacity < 0:
            raise ValidationError(f"link {self.id}: capacity must be >= 0")

    @property
    def endpoints(self) -> frozenset:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class CityNetwork:
    """Undirected multigraph of zones; parallel links are allowed."""

    zones: frozenset
    links: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "zones", frozenset(self.zones))
        links = tuple(sorted(self.links, key=lambda l: l.id))
        object.__setattr__(self, "links", links)
        problems = []
        seen = set()
        for link in links:
            if link.id in seen:
                problems.append(f"duplicate link id {link.id}")
            seen.add(link.id)
            for z in (link.u, link.v):
                if z not in self.zones:
                    problems.append(f"link {link.id}: unknown zone {z}")
        if problems:
            raise ValidationError(problems)

    def link(self, link_id: str) -> Link:
        for l in self.links:
            if l.id == link_id:
                return l
        raise ValidationError(f"unknown link {link_id}")


@dataclass(frozen=True)
class MobilityService:
    id: str
    type: int
    link: str
    pair: tuple
    capacity: int
    base_time: Decimal
    delay: Decimal
    cost_share: Decimal
    fare: Decimal

    def __post_init__(self):
        for name in ("base_time", "delay", "cost_share", "fare"):
            object.__setattr__(self, name, D(getattr(self, name)))
        object.__setattr__(self, "pair", tuple(self.pair))
        problems = []
        if isinstance(self.capacity, bool) or not isinstance(self.capacity, int):
            problems.append(f"service {self.id}: capacity must be an integer")
        elif self.capacity < 1:
            problems.append(f"service {self.id}: capacity must be >= 1")
        for name in ("base_time", "delay", "cost_share", "fare"):
            if getattr(self, name) < 0:
                problems.append(f"service {self.id}: {name} must be >= 0")
        if len(self.pair) != 2 or self.pair[0] == self.pair[1]:
            problems.append(f"service {self.id}: pair must join two distinct zones")
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class TravelRequirements:
    """Private report: value of time, preferred time, max willingness-to-pay."""

    alpha: Decimal
    theta: Decimal
    vbar: Decimal

    def __post_init__(self):
        for name in ("alpha", "theta", "vbar"):
            object.__setattr__(self, name, D(getattr(self, name)))
        problems = []
        if not 0 < self.alpha < 1:
            problems.append(f"alpha={self.alpha} outside (0, 1)")
        if self.theta < 0:
            problems.append(f"theta={self.theta} must be >= 0")
        if self.vbar < 0:
            problems.append(f"vbar={self.vbar} must be >= 0")
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class Traveler:
    id: str
    origin: str
    dest: str
    req: TravelRequirements

    def __post_init__(self):
        if self.origin == self.dest:
            raise ValidationError(f"traveler {self.id}: origin equals destination")

    @property
    def pair(self) -> tuple:
        return (self.origin, self.dest)


@dataclass(frozen=True)
class Subclass:
    id: str
    pair: tuple
    members: tuple
    services: tuple = ()


def subclass_id(pair: tuple) -> str:
    return f"{pair[0]}->{pair[1]}"


def partition_travelers(travelers: Iterable[Traveler],
                        network: Optional[CityNetwork] = None,
                        services: Optional[Sequence[MobilityService]] = None) -> list:
    """Group travelers by origin-destination pair, sorted by pair.

    If ``services`` is given, each subclass also gets its feasible services
    (which raises when a pair has fewer than two options).
    """
    groups = defaultdict(list)
    problems = []
    for t in travelers:
        if network is not None:
            for z in (t.origin, t.dest):
                if z not in network.zones:
                    problems.append(f"traveler {t.id}: unknown zone {z}")
        groups[t.pair].append(t.id)
    if problems:
        raise ValidationError(problems)
    out = []
    for pair in sorted(groups):
        sub = Subclass(subclass_id(pair), pair, tuple(sorted(groups[pair])))
        if services is not None:
            sub = Subclass(sub.id, pair, sub.members, tuple(feasible_services(sub, services)))
        out.append(sub)
    return out


def feasible_services(subclass: Subclass, services: Sequence[MobilityService]) -> list:
    ids = sorted(s.id for s in services if s.pair == tuple(subclass.pair))
    if len(ids) < 2:
        raise ValidationError(
            f"subclass {subclass.id}: {len(ids)} feasible service(s); "
            "every traveler needs at least two travel options")
    return ids


@dataclass(frozen=True)
class Assignment:
    """Binary traveler x service matrix for one subclass.

    ``rows[r][c]`` is a_ij for traveler ``travelers[r]`` and service
    ``services[c]``.
    """

    subclass: str
    travelers: tuple
    services: tuple
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != len(self.travelers) or any(len(r) != len(self.services) for r in rows):
            raise StructuralError(
                f"assignment shape does not match {len(self.travelers)} travelers "
                f"x {len(self.services)} services")
        if any(x not in (0, 1) for r in rows for x in r):
            raise StructuralError("assignment entries must be 0 or 1")

    @classmethod
    def empty(cls, subclass: str, travelers: Sequence[str], services: Sequence[str]) -> "Assignment":
        return cls(subclass, tuple(travelers), tuple(services),
                   tuple((0,) * len(services) for _ in travelers))

    @classmethod
    def from_choices(cls, subclass: str, travelers: Sequence[str], services: Sequence[str],
                     choices: Mapping[str, Optional[str]] | Sequence[Optional[str]]) -> "Assignment":
        """Build from traveler -> service id (or ``None``)."""
        if isinstance(choices, Mapping):
            choices = [choices.get(t) for t in travelers]
        col = {s: c for c, s in enumerate(services)}
        rows = []
        for ch in choices:
            row = [0] * len(services)
            if ch is not None:
                if ch not in col:
                    raise StructuralError(f"unknown service {ch}")
                row[col[ch]] = 1
            rows.append(tuple(row))
        return cls(subclass, tuple(travelers), tuple(services), tuple(rows))

    def choice(self, traveler: str) -> Optional[str]:
        """Assigned service of ``traveler``; the first one if the row is invalid."""
        row = self.rows[self.travelers.index(traveler)]
        for c, x in enumerate(row):
            if x:
                return self.services[c]
        return None

    def choices(self) -> dict:
        return {t: self.choice(t) for t in self.travelers}

    def load(self, service: str) -> int:
        c = self.services.index(service)
        return sum(r[c] for r in self.rows)

    def loads(self) -> dict:
        return {s: sum(r[c] for r in self.rows) for c, s in enumerate(self.services)}

    def without(self, traveler: str) -> "Assignment":
        """Same assignment with ``traveler``'s row zeroed."""
        r = self.travelers.index(traveler)
        rows = list(self.rows)
        rows[r] = (0,) * len(self.services)
        return Assignment(self.subclass, self.travelers, self.services, tuple(rows))

    def flat(self) -> tuple:
        return tuple(x for r in self.rows for x in r)


@dataclass(frozen=True)
class Violation:
    family: str  # "row" | "capacity" | "link"
    where: tuple
    detail: str


@dataclass(frozen=True)
class Verdict:
    valid: bool
    violations: tuple = field(default_factory=tuple)

    def __bool__(self):
        return self.valid

    @property
    def families(self) -> set:
        return {v.family for v in self.violations}


def link_groups(service_ids: Sequence[str], services: Mapping[str, MobilityService]) -> dict:
    """(type, link) -> feasible service ids routed there.

    Only pairs actually used by some feasible service get a constraint.
    """
    groups = defaultdict(list)
    for sid in service_ids:
        s = services[sid]
        groups[(s.type, s.link)].append(sid)
    return {k: tuple(v) for k, v in sorted(groups.items())}


def validate_assignment(a: Assignment, subclass: Subclass,
                        services: Sequence[MobilityService] | Mapping[str, MobilityService],
                        network: CityNetwork) -> Verdict:
    svc = services if isinstance(services, Mapping) else {s.id: s for s in services}
    if tuple(a.travelers) != tuple(subclass.members):
        raise StructuralError(f"assignment travelers do not match subclass {subclass.id}")
    if subclass.services and tuple(a.services) != tuple(subclass.services):
        raise StructuralError(f"assignment services do not match subclass {subclass.id}")
    for sid in a.services:
        if sid not in svc:
            raise StructuralError(f"unknown service {sid}")
    out = []
    for t, row in zip(a.travelers, a.rows):
        if sum(row) > 1:
            out.append(Violation("row", (t,), f"traveler {t} assigned {sum(row)} services"))
    loads = a.loads()
    for sid in a.services:
        if loads[sid] > svc[sid].capacity:
            out.append(Violation("capacity", (sid,),
                                 f"service {sid} carries {loads[sid]} > {svc[sid].capacity}"))
    for (h, e), group in link_groups(a.services, svc).items():
        total = sum(loads[s] for s in group)
        if total > network.link(e).capacity:
            out.append(Violation("link", (h, e),
                                 f"type {h} on link {e} carries {total} > {network.link(e).capacity}"))
    return Verdict(not out, tuple(out))


def check_services(network: CityNetwork, services: Sequence[MobilityService]) -> list:
    """Structural problems between services and the network (empty if sound)."""
    problems = []
    seen = set()
    route = {}
    for s in services:
        if s.id in seen:
            problems.append(f"duplicate service id {s.id}")
        seen.add(s.id)
        for z in s.pair:
            if z not in network.zones:
                problems.append(f"service {s.id}: unknown zone {z}")
        try:
            link = network.link(s.link)
        except ValidationError:
            problems.append(f"service {s.id}: unknown link {s.link}")
            continue
        if link.endpoints != frozenset(s.pair):
            problems.append(f"service {s.id}: link {s.link} does not join {s.pair[0]} and {s.pair[1]}")
        key = (s.type, frozenset(s.pair))
        if route.setdefault(key, s.link) != s.link:
            problems.append(
                f"service {s.id}: type {s.type} services on {s.pair[0]}-{s.pair[1]} "
                f"must share one link ({route[key]})")
    return problems

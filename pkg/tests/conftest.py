from decimal import Decimal

import pytest
from hypothesis import strategies as st

from mobility_vcg.model import (CityNetwork, Link, MobilityService, Subclass, Traveler,
                                TravelRequirements)
from mobility_vcg.solver import WelfareInstance


def svc(sid, *, type=1, link=None, pair=("A", "B"), cap=1, t0="10", delay="0",
        cseat="0", fare="0"):
    return MobilityService(sid, type, link or f"e{type}", pair, cap, Decimal(t0),
                           Decimal(delay), Decimal(cseat), Decimal(fare))


def trav(tid, alpha="0.5", theta="10", vbar="20", pair=("A", "B")):
    return Traveler(tid, pair[0], pair[1],
                    TravelRequirements(Decimal(alpha), Decimal(theta), Decimal(vbar)))


def instance(services, travelers, link_caps=None):
    """One-subclass instance on zones A, B; one link per service type unless given."""
    link_caps = dict(link_caps or {})
    for s in services:
        link_caps.setdefault(s.link, "100")
    net = CityNetwork(frozenset({"A", "B", "C"}),
                      tuple(Link(e, "A", "B", Decimal(c)) for e, c in link_caps.items()))
    sub = Subclass("A->B", ("A", "B"), tuple(sorted(t.id for t in travelers)),
                   tuple(sorted(s.id for s in services)))
    return WelfareInstance(sub, {t.id: t for t in travelers}, {s.id: s for s in services}, net)


@pytest.fixture
def two_by_two():
    """Hand-enumerated reference market (see test_solver for the 9 candidates)."""
    services = [svc("a", type=1, cap=1, t0="10", cseat="1", fare="2"),
                svc("b", type=2, cap=2, t0="20", delay="2", cseat="0.5", fare="1")]
    travelers = [trav("t1", "0.5", "10", "20"), trav("t2", "0.2", "15", "10")]
    return instance(services, travelers)


def money(lo, hi, places=2):
    scale = 10**places
    return st.integers(lo * scale, hi * scale).map(lambda k: Decimal(k).scaleb(-places))


@st.composite
def instances(draw, max_travelers=5, max_services=4):
    m = draw(st.integers(2, max_services))
    n = draw(st.integers(0, max_travelers))
    types = [draw(st.integers(1, 2)) for _ in range(m)]
    services = [svc(f"s{j}", type=h, cap=draw(st.integers(1, 3)), t0=draw(money(0, 40)),
                    delay=draw(st.one_of(st.just(Decimal(0)), money(0, 5))),
                    cseat=draw(money(0, 4)), fare=draw(money(0, 8)))
                for j, h in enumerate(types)]
    travelers = [trav(f"t{i}", draw(st.integers(1, 999).map(lambda k: Decimal(k).scaleb(-3))),
                      draw(money(0, 40)), draw(money(0, 40)))
                 for i in range(n)]
    caps = {f"e{h}": str(draw(st.integers(0, 6))) for h in set(types)}
    return instance(services, travelers, caps)

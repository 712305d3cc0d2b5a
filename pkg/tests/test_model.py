from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from conftest import instance, svc, trav
from mobility_vcg.model import (Assignment, CityNetwork, Link, StructuralError, Subclass,
                                TravelRequirements, ValidationError, check_services,
                                feasible_services, partition_travelers, validate_assignment)


def test_network_rejects_unknown_endpoint():
    with pytest.raises(ValidationError):
        CityNetwork(frozenset({"A"}), (Link("e", "A", "B", Decimal(1)),))


def test_network_allows_parallel_links():
    net = CityNetwork(frozenset({"A", "B"}), (Link("e1", "A", "B", Decimal(1)),
                                              Link("e2", "B", "A", Decimal(0))))
    assert [l.id for l in net.links] == ["e1", "e2"]


def test_negative_link_capacity():
    with pytest.raises(ValidationError):
        Link("e", "A", "B", Decimal(-1))


@pytest.mark.parametrize("alpha", ["0", "1", "1.5"])
def test_alpha_open_interval(alpha):
    with pytest.raises(ValidationError):
        TravelRequirements(Decimal(alpha), Decimal(1), Decimal(1))


def test_service_capacity_positive():
    with pytest.raises(ValidationError):
        svc("s", cap=0)


def test_traveler_needs_distinct_zones():
    with pytest.raises(ValidationError):
        trav("t", pair=("A", "A"))


def test_partition_single_pair():
    subs = partition_travelers([trav("t1"), trav("t2"), trav("t3")])
    assert len(subs) == 1 and subs[0].members == ("t1", "t2", "t3")


def test_partition_two_pairs():
    subs = partition_travelers([trav("t1"), trav("t2"), trav("t3", pair=("B", "C"))])
    assert [len(s.members) for s in subs] == [2, 1]
    assert [s.pair for s in subs] == [("A", "B"), ("B", "C")]


def test_partition_empty():
    assert partition_travelers([]) == []


def test_partition_unknown_zone_names_traveler():
    net = CityNetwork(frozenset({"A", "B"}))
    with pytest.raises(ValidationError, match="t9"):
        partition_travelers([trav("t9", pair=("A", "Q"))], net)


pairs = st.sampled_from([("A", "B"), ("B", "A"), ("A", "C"), ("C", "B")])


@given(st.lists(pairs, max_size=30))
def test_partition_is_a_partition(ps):
    ts = [trav(f"t{i:02d}", pair=p) for i, p in enumerate(ps)]
    subs = partition_travelers(ts)
    members = [m for s in subs for m in s.members]
    assert sorted(members) == sorted(t.id for t in ts)
    assert len(members) == len(set(members))
    assert len({s.pair for s in subs}) == len(subs)
    assert [s.pair for s in subs] == sorted(s.pair for s in subs)


def test_feasible_services_filters_by_pair():
    sub = Subclass("A->B", ("A", "B"), ())
    services = [svc("j1"), svc("j2"), svc("j3", pair=("B", "C"))]
    assert feasible_services(sub, services) == ["j1", "j2"]


def test_feasible_services_needs_two_options():
    sub = Subclass("A->B", ("A", "B"), ())
    with pytest.raises(ValidationError, match="two travel options"):
        feasible_services(sub, [svc("j1")])


def test_feasible_services_parallel_links():
    sub = Subclass("A->B", ("A", "B"), ())
    assert feasible_services(sub, [svc("j1", type=1), svc("j2", type=2)]) == ["j1", "j2"]


def test_services_of_one_type_share_a_link():
    net = CityNetwork(frozenset({"A", "B"}), (Link("e1", "A", "B", Decimal(5)),
                                              Link("e2", "A", "B", Decimal(5))))
    problems = check_services(net, [svc("j1", type=1, link="e1"), svc("j2", type=1, link="e2")])
    assert any("share one link" in p for p in problems)


def test_service_link_must_join_pair():
    net = CityNetwork(frozenset({"A", "B", "C"}), (Link("e1", "A", "C", Decimal(5)),))
    assert check_services(net, [svc("j1", link="e1")])


# -- assignment validity ---------------------------------------------------

@pytest.fixture
def market():
    return instance([svc("j1", type=1, cap=1), svc("j2", type=2, cap=3)],
                    [trav("t1"), trav("t2"), trav("t3")], {"e2": "2"})


def check(inst, rows):
    a = Assignment(inst.subclass.id, inst.members, inst.columns, rows)
    return validate_assignment(a, inst.subclass, inst.services, inst.network)


def test_all_zeros_valid(market):
    assert check(market, [(0, 0)] * 3).valid


def test_two_services_flags_row(market):
    v = check(market, [(1, 1), (0, 0), (0, 0)])
    assert not v and v.families == {"row"}


def test_capacity_violation(market):
    v = check(market, [(1, 0), (1, 0), (0, 0)])
    assert v.families == {"capacity"}


def test_link_violation(market):
    v = check(market, [(0, 1), (0, 1), (0, 1)])
    assert v.families == {"link"}
    assert v.violations[0].where == (2, "e2")


def test_dimension_mismatch(market):
    with pytest.raises(StructuralError):
        Assignment("A->B", market.members, market.columns, [(0, 0)])
    a = Assignment("A->B", ("x",), market.columns, [(0, 0)])
    with pytest.raises(StructuralError):
        validate_assignment(a, market.subclass, market.services, market.network)


def expected_families(inst, rows):
    """Recount the three constraint families directly from the matrix."""
    fam = set()
    if any(sum(r) > 1 for r in rows):
        fam.add("row")
    load = {s: sum(r[c] for r in rows) for c, s in enumerate(inst.columns)}
    if any(load[s] > inst.services[s].capacity for s in inst.columns):
        fam.add("capacity")
    per_link = {}
    for s in inst.columns:
        key = (inst.services[s].type, inst.services[s].link)
        per_link[key] = per_link.get(key, 0) + load[s]
    if any(n > inst.network.link(e).capacity for (_, e), n in per_link.items()):
        fam.add("link")
    return fam


@given(st.data())
def test_single_flip_flags_exactly_its_family(data):
    from conftest import instances
    inst = data.draw(instances(max_travelers=4))
    if not inst.members:
        return
    m = len(inst.columns)
    choice = [data.draw(st.integers(-1, m - 1)) for _ in inst.members]
    rows = [[int(c == k) for k in range(m)] for c in choice]
    if expected_families(inst, rows):
        rows = [[0] * m for _ in inst.members]
    assert check(inst, rows).valid
    r = data.draw(st.integers(0, len(rows) - 1))
    zeros = [c for c in range(m) if rows[r][c] == 0]
    c = data.draw(st.sampled_from(zeros))
    rows[r][c] = 1
    assert check(inst, rows).families == expected_families(inst, rows)


def test_choices_round_trip(market):
    a = Assignment.from_choices("A->B", market.members, market.columns,
                                {"t1": "j2", "t3": "j1"})
    assert a.choices() == {"t1": "j2", "t2": None, "t3": "j1"}
    assert a.loads() == {"j1": 1, "j2": 1}
    assert a.without("t1").choice("t1") is None

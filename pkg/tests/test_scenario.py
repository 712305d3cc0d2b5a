import json
import random
from decimal import Decimal as Dec
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from mobility_vcg.mechanism import run_market
from mobility_vcg.model import ValidationError
from mobility_vcg.scenario import (GenerationError, ParseError, emit_report, generate_scenario,
                                   load_outcomes, load_scenario, outcome_from_dict,
                                   outcome_to_dict, save_scenario, scenario_from_dict,
                                   scenario_to_dict)

DATA = Path(__file__).parent / "data"


def test_minimal_file():
    sc = load_scenario(DATA / "minimal.json")
    subs = sc.subclasses()
    assert len(subs) == 1 and subs[0].services == ("cav1", "train")
    assert sc.service_map["train"].delay == Dec("0.5")


def test_capacity_warnings():
    sc = load_scenario(DATA / "minimal.json")
    assert any("aggregate usage capacity 4 != traveler count 1" in w for w in sc.warnings)


def doc():
    return json.loads((DATA / "minimal.json").read_text())


def test_unknown_zone_names_traveler_and_zone():
    d = doc()
    d["travelers"][0]["dest"] = "Mars"
    with pytest.raises(ValidationError, match="ana.*Mars"):
        scenario_from_dict(d)


def test_all_problems_reported_at_once():
    d = doc()
    d["travelers"][0]["alpha"] = "1.5"
    d["services"][0]["epsilon"] = 0
    with pytest.raises(ValidationError) as exc:
        scenario_from_dict(d)
    assert len(exc.value.problems) == 2


def test_single_option_rejected():
    d = doc()
    d["services"].pop()
    with pytest.raises(ValidationError, match="two travel options"):
        scenario_from_dict(d)


def test_missing_field_location():
    d = doc()
    del d["services"][1]["fare"]
    with pytest.raises(ParseError, match=r"services\[1\]: missing field 'fare'"):
        scenario_from_dict(d)


def test_too_many_digits_rejected():
    d = doc()
    d["travelers"][0]["vbar"] = "18.0000001"
    with pytest.raises(ParseError, match=r"travelers\[0\]\.vbar"):
        scenario_from_dict(d)


def test_json_syntax_error_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "network": ,\n}')
    with pytest.raises(ParseError, match=r"bad.json:2:"):
        load_scenario(p)


def test_round_trip(tmp_path):
    for name in ("minimal.json", "city.json"):
        sc = load_scenario(DATA / name)
        save_scenario(sc, tmp_path / name)
        again = load_scenario(tmp_path / name)
        assert again == sc
        assert scenario_to_dict(again) == scenario_to_dict(sc)


def test_rejecting_flag_survives():
    sc = load_scenario(DATA / "city.json")
    assert sc.rejecting == {"p04"}


def test_generator_deterministic():
    assert generate_scenario(7, 3, 6, 10) == generate_scenario(7, 3, 6, 10)
    assert generate_scenario(7, 3, 6, 10) != generate_scenario(8, 3, 6, 10)


def test_generator_minimal_structure():
    sc = generate_scenario(0, 2, 2, 3)
    subs = sc.subclasses()
    assert len(subs) == 1 and len(subs[0].services) == 2 and len(subs[0].members) == 3


@pytest.mark.parametrize("sizes", [(1, 2, 3), (2, 1, 3), (2, 2, -1)])
def test_generator_rejects_impossible_sizes(sizes):
    with pytest.raises(GenerationError):
        generate_scenario(0, *sizes)


def test_generator_soundness():
    rng = random.Random(2024)
    for seed in range(1000):
        sc = generate_scenario(seed, rng.randint(2, 5), rng.randint(2, 8), rng.randint(0, 12))
        assert scenario_from_dict(scenario_to_dict(sc)) == sc


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_machine_report_is_lossless(seed):
    sc = generate_scenario(seed, 3, 5, 6)
    for inst in sc.instances():
        out = run_market(inst)
        assert outcome_from_dict(outcome_to_dict(out)) == out


def test_machine_report_file_round_trip(tmp_path):
    sc = load_scenario(DATA / "city.json")
    outs = [run_market(i, rejecting=[t for t in i.members if t in sc.rejecting])
            for i in sc.instances()]
    p = tmp_path / "out.json"
    p.write_text(emit_report(outs, "machine", sc.name))
    assert load_outcomes(p) == outs


def test_empty_market_report():
    from conftest import instance, svc
    out = run_market(instance([svc("a"), svc("b", type=2)], []))
    text = emit_report(out)
    assert "(0 travelers)" in text and "welfare 0.000000" in text


def test_human_payment_column_sums_to_revenue():
    sc = load_scenario(DATA / "city.json")
    for inst in sc.instances():
        out = run_market(inst, rejecting=[t for t in inst.members if t in sc.rejecting])
        lines = emit_report(out).splitlines()
        head = lines[1].split()
        col = head.index("payment")
        rows = [l.split() for l in lines[2:2 + len(out.travelers)]]
        assert sum(Dec(r[col]) for r in rows if r[1] != "outside") == out.revenue


def test_unknown_outcome_file(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{}")
    with pytest.raises(ParseError):
        load_outcomes(p)

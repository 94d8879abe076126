"""Ingestion: imputation, bundles, incomes, markets, consideration sets."""

import numpy as np
import pytest

from stablehh.errors import (
    EmptyMarketError,
    InconsistentRegionError,
    InvalidInputError,
    ModelMismatchError,
)
from stablehh.ingest import (
    HouseholdRow,
    IngestConfig,
    age_difference_window,
    build_bundle,
    compute_child_support,
    compute_incomes,
    consideration_sets_from_window,
    impute_children_expenditure,
    ingest_markets,
    load_agents_csv,
    load_households_csv,
    partition_markets,
)
from stablehh.market import Agent, ChildSupportSchedule, Couple, validate_market

from conftest import couple_market


# -- children's expenditure imputation (equivalence-scale table) -----------


@pytest.mark.parametrize(
    "status,n,expected",
    [
        ("couple", 1, 170.0),
        ("couple", 2, 280.0),
        ("couple", 3, 370.0),
        ("couple", 5, 370.0),
        ("single", 1, 230.0),
        ("single", 2, 370.0),
        ("single", 3, 470.0),
        ("single", 4, 470.0),
        ("couple", 0, 0.0),
    ],
)
def test_impute_table(status, n, expected):
    assert impute_children_expenditure(status, n, 1000.0) == pytest.approx(expected)


def test_impute_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        impute_children_expenditure("couple", 2, -1.0)
    with pytest.raises(InvalidInputError):
        impute_children_expenditure("couple", -1, 100.0)
    with pytest.raises(InvalidInputError):
        impute_children_expenditure("widowed", 1, 100.0)


def test_impute_homogeneous_degree_one():
    rng = np.random.default_rng(5)
    for _ in range(50):
        status = "couple" if rng.random() < 0.5 else "single"
        n = int(rng.integers(0, 5))
        total = float(rng.uniform(0, 5000))
        alpha = float(rng.uniform(0.1, 10))
        base = impute_children_expenditure(status, n, total)
        scaled = impute_children_expenditure(status, n, alpha * total)
        assert scaled == pytest.approx(alpha * base, rel=1e-12, abs=1e-12)


# -- bundle construction ----------------------------------------------------


def _agents_pair(hours_m=40.0, hours_w=40.0):
    return {
        "m1": Agent("m1", "male", 10.0, hours_m, 40.0, "A", 2, "w1"),
        "w1": Agent("w1", "female", 8.0, hours_w, 38.0, "A", 2, "m1"),
    }


def test_build_bundle_couple_with_children():
    row = HouseholdRow("h1", ("m1", "w1"), 2000.0, big_decision_share=0.5)
    bundle = build_bundle(row, _agents_pair())
    assert bundle.child_total_C == pytest.approx(560.0)
    assert bundle.q_priv == pytest.approx(720.0)
    assert bundle.Q_pub == pytest.approx(720.0)
    assert bundle.child_daily_k == pytest.approx(280.0)
    assert bundle.child_big_K == pytest.approx(280.0)
    assert bundle.leisure_m == pytest.approx(72.0)  # 112 - 40


def test_build_bundle_zero_expenditure():
    row = HouseholdRow("h1", ("m1", "w1"), 0.0)
    bundle = build_bundle(row, _agents_pair())
    assert bundle.q_priv == 0.0 and bundle.Q_pub == 0.0 and bundle.child_total_C == 0.0


def test_build_bundle_rejects_overfull_hours():
    agents = {
        "m1": Agent("m1", "male", 10.0, 120.0, 40.0, "A", 0, "w1"),
        "w1": Agent("w1", "female", 8.0, 40.0, 38.0, "A", 0, "m1"),
    }
    with pytest.raises(InvalidInputError):
        build_bundle(HouseholdRow("h1", ("m1", "w1"), 1000.0), agents)


# -- incomes ----------------------------------------------------------------


def test_potential_labor_income_is_112_times_wage():
    agent = Agent("m1", "male", 10.0, 40.0, 40.0, "A", 0, None)
    assert agent.labor_income == pytest.approx(1120.0)


def test_household_nonlabor_from_full_spending():
    # wages (10, 8); full spending 2500 -> nonlabor 2500 - 1120 - 896 = 484
    agents = _agents_pair(hours_m=40.0, hours_w=32.0)
    leisure_value = 10.0 * 72.0 + 8.0 * 80.0
    market_spending = 2500.0 - leisure_value
    row = HouseholdRow("h1", ("m1", "w1"), market_spending)
    bundle = build_bundle(row, agents)
    grid = compute_incomes(agents, {"h1": bundle})
    assert grid.nonlabor_household["h1"] == pytest.approx(484.0)


def test_single_option_income_adds_own_nonlabor():
    market = couple_market()
    from conftest import add_single_female

    # wage 10, 40 hours: leisure value 720; market spending 450 puts the
    # implied own non-labor income at exactly 50, so the single's exit
    # income is 1120 + 50 = 1170
    market = add_single_female(market, sid="sf1", wage=10.0, hours=40.0, q_priv=300.0, Q_pub=150.0)
    hid = market.household_of("sf1")
    assert market.grid.nonlabor_household[hid] == pytest.approx(50.0)
    assert market.option_income_pinned(None, "sf1") == pytest.approx(1170.0)


# -- child support ------------------------------------------------------------


def test_child_support_examples():
    schedule = ChildSupportSchedule()
    father = Agent("m1", "male", 100.0, 40.0, 40.0, "A", 2, "w1")
    assert compute_child_support(father, schedule) == pytest.approx(0.33 * 11200.0)
    childless = Agent("m2", "male", 77.0, 40.0, 40.0, "A", 0, "w2")
    assert compute_child_support(childless, schedule) == 0.0
    one_child = Agent("m3", "male", 50.0, 40.0, 40.0, "A", 1, "w3")
    assert compute_child_support(one_child, schedule) == pytest.approx(1400.0)


def test_child_support_model_guard():
    schedule = ChildSupportSchedule()
    father = Agent("m1", "male", 100.0, 40.0, 40.0, "A", 2, "w1")
    with pytest.raises(ModelMismatchError):
        compute_child_support(father, schedule, model="jc")
    mother = Agent("w1", "female", 100.0, 40.0, 40.0, "A", 2, "m1")
    with pytest.raises(ModelMismatchError):
        compute_child_support(mother, schedule)


# -- market partition ---------------------------------------------------------


def _agent(aid, gender, region, spouse=None, age=40.0):
    return Agent(aid, gender, 10.0, 40.0, age, region, 0, spouse)


def test_partition_single_region():
    agents = [_agent("a1", "male", "A"), _agent("a2", "female", "A")]
    assert list(partition_markets(agents)) == ["A"]


def test_partition_two_regions():
    agents = [
        _agent("a1", "male", "A", "a2"),
        _agent("a2", "female", "A", "a1"),
        _agent("a3", "male", "A"),
        _agent("a4", "female", "A"),
        _agent("b1", "male", "B", "b2"),
        _agent("b2", "female", "B", "b1"),
    ]
    groups = partition_markets(agents)
    assert {r: len(v) for r, v in groups.items()} == {"A": 4, "B": 2}


def test_partition_rejects_straddling_couple():
    agents = [_agent("a1", "male", "A", "b1"), _agent("b1", "female", "B", "a1")]
    with pytest.raises(InconsistentRegionError):
        partition_markets(agents)


# -- consideration sets --------------------------------------------------------


def test_degenerate_window_single_couple():
    agents = {
        "m1": _agent("m1", "male", "A", "w1", age=40.0),
        "w1": _agent("w1", "female", "A", "m1", age=38.0),
    }
    couples = [Couple("m1", "w1", "h1", 0)]
    assert age_difference_window(agents, couples) == (2.0, 2.0)


def test_window_percentiles_match_numpy():
    diffs = [-2.0, 0.0, 1.0, 3.0, 10.0]
    agents = {}
    couples = []
    for i, diff in enumerate(diffs, start=1):
        m, w = f"m{i}", f"w{i}"
        agents[m] = _agent(m, "male", "A", w, age=40.0 + diff)
        agents[w] = _agent(w, "female", "A", m, age=40.0)
        couples.append(Couple(m, w, f"h{i}", 0))
    window = age_difference_window(agents, couples)
    expected = np.percentile(np.array(diffs), [1, 99])
    assert window == pytest.approx(tuple(expected))
    # frozen values from the percentile oracle (linear interpolation)
    assert window == pytest.approx((-1.92, 9.72))


def test_window_boundary_is_inclusive():
    agents = {
        "m1": _agent("m1", "male", "A", "w1", age=40.0),
        "w1": _agent("w1", "female", "A", "m1", age=38.0),
        "sf": _agent("sf", "female", "A", age=30.0),
    }
    couples = [Couple("m1", "w1", "h1", 0)]
    sets = consideration_sets_from_window(agents, couples, (-2.0, 10.0))
    assert "sf" in sets.sets["m1"]  # diff exactly 10
    assert "m1" in sets.sets["sf"]


def test_sets_are_gender_consistent():
    from stablehh.oracle import generate_stable_market
    from stablehh.stability import JointCustody

    market, _ = generate_stable_market(seed=3, n_couples=5, n_singles=4, model=JointCustody())
    sets = market.consideration.sets
    for agent_id, others in sets.items():
        for other in others:
            assert agent_id in sets[other]


def test_empty_market_rejected():
    with pytest.raises(EmptyMarketError):
        age_difference_window({}, [])


# -- CSV loading and end-to-end ingest ----------------------------------------


AGENTS_CSV = """id,gender,wage,work_hours,age,region,n_children,spouse_id
m1,male,10,40,40,A,2,w1
w1,female,8,32,38,A,2,m1
sf1,female,9,30,39,A,0,
"""

HOUSEHOLDS_CSV = """household_id,member_ids,total_expenditure,assignable_private_m,assignable_private_w,big_decision_share
h1,m1;w1,2000,100,80,0.5
h2,sf1,600,,,
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_ingest_end_to_end(tmp_path):
    agents_path = _write(tmp_path, "agents.csv", AGENTS_CSV)
    households_path = _write(tmp_path, "households.csv", HOUSEHOLDS_CSV)
    markets = ingest_markets(agents_path, households_path)
    assert len(markets) == 1
    market = markets[0]
    assert validate_market(market) == []
    assert market.couples[0].household_id == "h1"
    bundle = market.bundles["h1"]
    assert bundle.child_total_C == pytest.approx(560.0)
    assert bundle.q_priv_assign_m == pytest.approx(100.0)
    # full-income identity holds exactly by construction
    assert market.household_full_income("h1") == pytest.approx(
        bundle.q_priv + bundle.Q_pub + bundle.children_spending + 10.0 * 72.0 + 8.0 * 80.0
    )
    # single female considered by the married male (degenerate window of 1 couple)
    assert market.consideration.window == (2.0, 2.0)


def test_agents_csv_header_enforced(tmp_path):
    path = _write(tmp_path, "agents.csv", "id,gender\n")
    with pytest.raises(InvalidInputError):
        load_agents_csv(path)


def test_households_csv_optional_columns(tmp_path):
    text = "household_id,member_ids,total_expenditure\nh1,a1,100\n"
    path = _write(tmp_path, "households.csv", text)
    (row,) = load_households_csv(path)
    assert row.assignable_private_m is None and row.big_decision_share is None


def test_trim_filter_drops_extremes(tmp_path):
    lines = ["id,gender,wage,work_hours,age,region,n_children,spouse_id"]
    hh = ["household_id,member_ids,total_expenditure"]
    for i in range(1, 21):
        wage = 10.0 if i > 1 else 1000.0  # one extreme-wage couple
        lines.append(f"m{i},male,{wage},40,40,A,0,w{i}")
        lines.append(f"w{i},female,8,32,38,A,0,m{i}")
        hh.append(f"h{i},m{i};w{i},1000")
    agents_path = _write(tmp_path, "agents.csv", "\n".join(lines) + "\n")
    households_path = _write(tmp_path, "households.csv", "\n".join(hh) + "\n")
    full = ingest_markets(agents_path, households_path)
    trimmed = ingest_markets(
        agents_path, households_path, IngestConfig(trim_outliers=True, trim_band=(0.05, 0.95))
    )
    assert len(full[0].couples) == 20
    assert len(trimmed[0].couples) < 20

"""Shared fixtures: compact constructors for hand-built markets."""

from __future__ import annotations

from dataclasses import replace

import pytest

# acceptance criteria verdicts, printed in the terminal summary
_ACCEPTANCE_RESULTS: list[tuple[int, str, bool]] = []


def record_acceptance(number: int, name: str, passed: bool) -> None:
    _ACCEPTANCE_RESULTS.append((number, name, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, name, passed in sorted(_ACCEPTANCE_RESULTS):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number} ({name}): {verdict}")

from stablehh.market import (
    Agent,
    ConsiderationSets,
    Couple,
    HouseholdBundle,
    MarriageMarket,
    PriceIncomeGrid,
    TIME_ENDOWMENT,
    option_key,
)


def couple_market(
    *,
    wage_m=10.0,
    hours_m=40.0,
    wage_w=8.0,
    hours_w=32.0,
    n_children=0,
    q_priv=400.0,
    Q_pub=300.0,
    k=0.0,
    K=0.0,
    assign_m=None,
    assign_w=None,
    y_m=None,
    y_w=None,
    extra_explicit=None,
    region="t",
    age_m=40.0,
    age_w=38.0,
    rho=1.0,
) -> MarriageMarket:
    """One-couple market with explicit exit incomes and a derived identity."""
    m = Agent("m1", "male", wage_m, hours_m, age_m, region, n_children, "w1")
    w = Agent("w1", "female", wage_w, hours_w, age_w, region, n_children, "m1")
    bundle = HouseholdBundle(
        household_id="h1",
        member_ids=("m1", "w1"),
        leisure_m=TIME_ENDOWMENT - hours_m,
        leisure_w=TIME_ENDOWMENT - hours_w,
        q_priv=q_priv,
        Q_pub=Q_pub,
        child_daily_k=k,
        child_big_K=K,
        child_total_C=k + K,
        q_priv_assign_m=assign_m,
        q_priv_assign_w=assign_w,
    )
    spending = (
        wage_m * (TIME_ENDOWMENT - hours_m)
        + wage_w * (TIME_ENDOWMENT - hours_w)
        + q_priv
        + Q_pub
        + k
        + K
    )
    nonlabor = spending - TIME_ENDOWMENT * (wage_m + wage_w)
    explicit = dict(extra_explicit or {})
    if y_m is not None:
        explicit[option_key("m1", None)] = y_m
    if y_w is not None:
        explicit[option_key(None, "w1")] = y_w
    grid = PriceIncomeGrid(
        nonlabor_household={"h1": nonlabor},
        rho={"h1": rho},
        explicit_income=explicit,
    )
    consideration = ConsiderationSets(window=(age_m - age_w, age_m - age_w), sets={"m1": (), "w1": ()})
    return MarriageMarket(
        region=region,
        agents={"m1": m, "w1": w},
        couples=(Couple("m1", "w1", "h1", n_children),),
        bundles={"h1": bundle},
        grid=grid,
        consideration=consideration,
    )


def add_single_female(
    market: MarriageMarket,
    *,
    sid="sf1",
    wage=9.0,
    hours=30.0,
    age=39.0,
    n_children=0,
    q_priv=100.0,
    Q_pub=80.0,
    children=0.0,
    nonlabor=50.0,
    considered_by=("m1",),
    pair_income=None,
) -> MarriageMarket:
    """Attach one single female, optionally considered by existing males."""
    hid = f"h_{sid}"
    agent = Agent(sid, "female", wage, hours, age, market.region, n_children, None)
    bundle = HouseholdBundle(
        household_id=hid,
        member_ids=(sid,),
        leisure_m=None,
        leisure_w=TIME_ENDOWMENT - hours,
        q_priv=q_priv,
        Q_pub=Q_pub,
        child_daily_k=children / 2.0,
        child_big_K=children / 2.0,
        child_total_C=children,
    )
    # keep the full-income identity: nonlabor is implied by spending
    spending = wage * (TIME_ENDOWMENT - hours) + q_priv + Q_pub + children
    implied_nonlabor = spending - TIME_ENDOWMENT * wage
    agents = dict(market.agents)
    agents[sid] = agent
    bundles = dict(market.bundles)
    bundles[hid] = bundle
    nonlabor_map = dict(market.grid.nonlabor_household)
    nonlabor_map[hid] = implied_nonlabor
    explicit = dict(market.grid.explicit_income)
    sets = {a: tuple(v) for a, v in market.consideration.sets.items()}
    sets[sid] = tuple(considered_by)
    for male in considered_by:
        sets[male] = tuple(sorted(set(sets.get(male, ())) | {sid}))
        if pair_income is not None:
            explicit[option_key(male, sid)] = pair_income
    grid = replace(market.grid, nonlabor_household=nonlabor_map, explicit_income=explicit)
    consideration = ConsiderationSets(window=market.consideration.window, sets=sets)
    return MarriageMarket(
        region=market.region,
        agents=agents,
        couples=market.couples,
        bundles=bundles,
        grid=grid,
        consideration=consideration,
    )


@pytest.fixture
def oracle_pair():
    from stablehh.oracle import generate_stable_market
    from stablehh.stability import JointCustody

    return generate_stable_market(seed=11, n_couples=3, n_singles=2, model=JointCustody())

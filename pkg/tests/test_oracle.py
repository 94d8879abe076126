"""Synthetic market generator, perturbations, and the grid verifier."""

import pytest

from stablehh.errors import InvalidInputError, UnsupportedError
from stablehh.lp import check_feasibility
from stablehh.market import ZERO_SCHEDULE, market_to_dict, option_key
from stablehh.oracle import (
    brute_force_rationalizable,
    generate_stable_market,
    perturb_incomes,
)
from stablehh.stability import (
    JointCustody,
    SoleCustody,
    build_system,
    solve_stability_indices,
)

from conftest import couple_market


def test_generation_is_deterministic():
    a_market, a_truth = generate_stable_market(seed=42, n_couples=4, n_singles=3, model=JointCustody())
    b_market, b_truth = generate_stable_market(seed=42, n_couples=4, n_singles=3, model=JointCustody())
    assert market_to_dict(a_market) == market_to_dict(b_market)
    assert a_truth == b_truth
    c_market, _ = generate_stable_market(seed=43, n_couples=4, n_singles=3, model=JointCustody())
    assert market_to_dict(a_market) != market_to_dict(c_market)


@pytest.mark.parametrize("model", [JointCustody(), SoleCustody()])
def test_generated_markets_are_stable(model):
    market, _ = generate_stable_market(seed=8, n_couples=4, n_singles=2, model=model)
    report = solve_stability_indices(market, model)
    assert all(o.s == pytest.approx(1.0, abs=1e-9) for o in report.options)


@pytest.mark.parametrize("model", [JointCustody(), SoleCustody()])
def test_hidden_truth_is_strictly_feasible(model):
    market, truth = generate_stable_market(seed=15, n_couples=3, n_singles=2, model=model)
    system = build_system(market, model, with_indices=False)
    candidate = {}
    for hid, data in truth["couples"].items():
        candidate[f"q_m[{hid}]"] = data["q_m"]
        candidate[f"q_w[{hid}]"] = data["q_w"]
        if isinstance(model, JointCustody):
            candidate[f"rho_m[{hid}]"] = data["rho_m"]
            candidate[f"rho_w[{hid}]"] = data["rho_w"]
    for key, data in truth["pairs"].items():
        name = f"P_m[{key}]"
        if system.builder.has_variable(name):
            candidate[name] = data["P_m"]
            candidate[f"P_w[{key}]"] = data["P_w"]
    residual = check_feasibility(system.program, candidate)
    assert residual <= 0.0  # strict interior margins


def test_one_couple_market_has_only_ir_rows():
    market, _ = generate_stable_market(seed=2, n_couples=1, n_singles=0, model=JointCustody())
    report = solve_stability_indices(market, JointCustody())
    assert len(report.options) == 2


def test_perturb_factor_one_is_identity():
    market, _ = generate_stable_market(seed=4, n_couples=2, n_singles=0, model=JointCustody())
    same = perturb_incomes(market, ("m001", None), 1.0)
    assert market_to_dict(same) == market_to_dict(market)


def test_perturb_unknown_option_rejected():
    market, _ = generate_stable_market(seed=4, n_couples=1, n_singles=0, model=JointCustody())
    with pytest.raises(InvalidInputError):
        perturb_incomes(market, ("bogus", None), 1.5)
    with pytest.raises(InvalidInputError):
        perturb_incomes(market, (None, None), 1.5)
    with pytest.raises(InvalidInputError):
        perturb_incomes(market, ("m001", None), -2.0)


def test_independent_rows_scale_independently():
    # no shared unknowns between the two exit rows: q_priv = 0 and K = 0 make
    # both IR right-hand sides constant, so the indices decouple exactly
    market = couple_market(q_priv=0.0, Q_pub=300.0, k=50.0, K=0.0, n_children=1)
    rhs_m = 10.0 * 72.0 + 300.0 + 50.0
    rhs_w = 8.0 * 80.0 + 300.0 + 50.0
    market = couple_market(
        q_priv=0.0, Q_pub=300.0, k=50.0, K=0.0, n_children=1, y_m=rhs_m, y_w=rhs_w
    )
    market = perturb_incomes(market, ("m1", None), 1.25)
    market = perturb_incomes(market, (None, "w1"), 2.0)
    report = solve_stability_indices(market, JointCustody())
    assert report.index_of(option_key("m1", None)) == pytest.approx(1 / 1.25, abs=1e-9)
    assert report.index_of(option_key(None, "w1")) == pytest.approx(1 / 2.0, abs=1e-9)


# -- grid verifier ---------------------------------------------------------------


def test_brute_force_accepts_oracle_market():
    market, _ = generate_stable_market(seed=6, n_couples=1, n_singles=0, model=JointCustody())
    assert brute_force_rationalizable(market, JointCustody(), grid_steps=21)


def test_brute_force_rejects_unaffordable_income():
    market, _ = generate_stable_market(seed=6, n_couples=1, n_singles=0, model=JointCustody())
    blown = perturb_incomes(market, ("m001", None), 50.0)
    assert not brute_force_rationalizable(blown, JointCustody(), grid_steps=21)
    report = solve_stability_indices(blown, JointCustody())
    assert report.index_of(option_key("m001", None)) < 1.0


def test_brute_force_trivial_zero_market():
    market = couple_market(y_m=0.0, y_w=0.0)
    assert brute_force_rationalizable(market, JointCustody(), grid_steps=3)


def test_brute_force_guards():
    market, _ = generate_stable_market(seed=1, n_couples=3, n_singles=0, model=JointCustody())
    with pytest.raises(UnsupportedError):
        brute_force_rationalizable(market, JointCustody())
    small, _ = generate_stable_market(seed=1, n_couples=1, n_singles=0, model=JointCustody())
    with pytest.raises(UnsupportedError):
        brute_force_rationalizable(small, JointCustody(), grid_steps=50)


@pytest.mark.parametrize("model", [JointCustody(), SoleCustody()])
def test_brute_force_agreement_smoke(model):
    # one-sided contract: grid-feasible implies LP-feasible
    for seed in range(12):
        market, _ = generate_stable_market(seed=seed, n_couples=2, n_singles=1, model=model)
        if seed % 2:
            couple = market.couples[seed % len(market.couples)]
            market = perturb_incomes(market, (couple.m_id, None), 1.0 + 0.4 * (seed % 3))
        grid_ok = brute_force_rationalizable(market, model, grid_steps=7)
        report = solve_stability_indices(market, model)
        lp_ok = all(o.s >= 1.0 - 1e-9 for o in report.options)
        assert not (grid_ok and not lp_ok), f"seed {seed}: grid feasible but LP violated"


def test_brute_force_grids_nonlabor_splits_on_derived_incomes():
    # wage-derived incomes: rationalizable only once the husband's
    # non-labor share drops to the band floor (see the stability tests)
    rescuable = couple_market(
        wage_m=10.0, hours_m=112.0, wage_w=30.0, hours_w=40.0,
        q_priv=1720.0, Q_pub=800.0, assign_w=1310.0,
    )
    assert brute_force_rationalizable(rescuable, JointCustody(), grid_steps=21)
    hopeless = couple_market(
        wage_m=10.0, hours_m=112.0, wage_w=30.0, hours_w=40.0,
        q_priv=1720.0, Q_pub=800.0, assign_w=1450.0,
    )
    assert not brute_force_rationalizable(hopeless, JointCustody(), grid_steps=21)
    report = solve_stability_indices(hopeless, JointCustody(), "endogenous")
    assert any(o.s < 1.0 - 1e-9 for o in report.options)


def test_spc_zero_schedule_matches_jc_when_big_is_zero():
    market, _ = generate_stable_market(
        seed=33, n_couples=2, n_singles=1, model=JointCustody(), big_decision_share=0.0
    )
    market = perturb_incomes(market, ("m001", None), 1.6)
    jc = solve_stability_indices(market, JointCustody())
    spc = solve_stability_indices(market, SoleCustody(), schedule=ZERO_SCHEDULE)
    assert jc.sum_indices == pytest.approx(spc.sum_indices, abs=1e-9)

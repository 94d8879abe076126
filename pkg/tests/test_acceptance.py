"""Acceptance suite: one test per exit criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass/fail
lines.  Tolerances are pinned here, not configured elsewhere.
"""

import time

import pytest

from stablehh.identification import bound_private_share, bound_sharing_rule, compute_bounds
from stablehh.ingest import consideration_sets_from_window, impute_children_expenditure
from stablehh.market import (
    Agent,
    ChildSupportSchedule,
    TIME_ENDOWMENT,
    ZERO_SCHEDULE,
    option_key,
    with_consideration,
)
from stablehh.oracle import brute_force_rationalizable, generate_stable_market, perturb_incomes
from stablehh.stability import (
    JointCustody,
    SoleCustody,
    exit_options,
    solve_stability_indices,
)
from stablehh.cli import main

from conftest import couple_market


def _criterion(number, name, body):
    from conftest import record_acceptance

    try:
        body()
    except BaseException:
        record_acceptance(number, name, False)
        print(f"ACCEPTANCE {number} ({name}): FAIL")
        raise
    record_acceptance(number, name, True)
    print(f"ACCEPTANCE {number} ({name}): PASS")


def test_01_oracle_stability_50_seeds():
    def body():
        start = time.monotonic()
        for seed in range(50):
            n_couples = 1 + (seed * 7) % 30
            n_singles = (seed * 3) % 11
            model = JointCustody() if seed % 2 == 0 else SoleCustody()
            market, _ = generate_stable_market(seed, n_couples, n_singles, model)
            report = solve_stability_indices(market, model)
            for opt in report.options:
                assert abs(opt.s - 1.0) <= 1e-6, f"seed {seed} option {opt.key}: s={opt.s}"
        elapsed = time.monotonic() - start
        assert elapsed < 60.0, f"took {elapsed:.1f}s"

    _criterion(1, "oracle stability, 50 seeds, both models", body)


def test_02_analytic_perturbation():
    def body():
        # male's best affordable exit value: leisure 720 + q 400 + Q 300
        # + k 60 + K 40 = 1520; the wife's row stays slack at income 900
        rhs_max = 1520.0
        for margin in (1.0, 0.8):
            headroom = 1.0 / margin
            base = couple_market(
                q_priv=400.0, Q_pub=300.0, k=60.0, K=40.0, n_children=1,
                y_m=margin * rhs_max, y_w=900.0,
            )
            for factor in (1.1, 1.25, 2.0):
                market = perturb_incomes(base, ("m1", None), factor)
                report = solve_stability_indices(market, JointCustody())
                expected = min(1.0, headroom / factor)
                got = report.index_of(option_key("m1", None))
                assert abs(got - expected) <= 1e-6, f"margin {margin} factor {factor}: {got} vs {expected}"
                assert abs(report.index_of(option_key(None, "w1")) - 1.0) <= 1e-6

    _criterion(2, "analytic perturbation, factors 1.1/1.25/2.0", body)


def test_03_brute_force_agreement_200_instances():
    def body():
        disagreements = 0
        checked = 0
        for seed in range(200):
            n_couples = 1 + seed % 2
            n_singles = seed % 3
            model = JointCustody() if seed % 2 == 0 else SoleCustody()
            market, _ = generate_stable_market(seed, n_couples, n_singles, model)
            if seed % 3 == 1:
                couple = market.couples[seed % len(market.couples)]
                factor = 1.0 + 0.5 * ((seed % 4) + 1) / 2.0
                market = perturb_incomes(market, (couple.m_id, None), factor)
            if seed % 5 == 2:
                couple = market.couples[0]
                market = perturb_incomes(market, (None, couple.w_id), 1.7)
            grid_feasible = brute_force_rationalizable(market, model, grid_steps=7)
            report = solve_stability_indices(market, model)
            lp_feasible = all(o.s >= 1.0 - 1e-9 for o in report.options)
            checked += 1
            if grid_feasible and not lp_feasible:
                disagreements += 1
        assert checked == 200
        assert disagreements == 0, f"{disagreements} grid-feasible/LP-infeasible cases"

    _criterion(3, "grid verifier vs LP, 200 tiny instances", body)


def test_04_custody_degeneracy_20_seeds():
    def body():
        for seed in range(20):
            market, _ = generate_stable_market(
                seed, n_couples=2 + seed % 3, n_singles=seed % 3,
                model=JointCustody(), big_decision_share=0.0,
            )
            couple = market.couples[seed % len(market.couples)]
            market = perturb_incomes(market, (couple.m_id, None), 1.0 + (seed % 5) / 4.0)
            jc = solve_stability_indices(market, JointCustody())
            spc = solve_stability_indices(market, SoleCustody(), schedule=ZERO_SCHEDULE)
            assert abs(jc.sum_indices - spc.sum_indices) <= 1e-6, f"seed {seed}"

    _criterion(4, "joint custody at zero big-decision equals sole custody at zero transfers", body)


def test_05_nestedness_and_truth_containment():
    def body():
        for seed in range(10):
            model = JointCustody() if seed % 2 == 0 else SoleCustody()
            market, truth = generate_stable_market(seed, n_couples=2 + seed % 3, n_singles=seed % 3, model=model)
            report = solve_stability_indices(market, model)
            bounds = compute_bounds(market, model, report)
            for cb in bounds.couples:
                t = truth["couples"][cb.household_id]
                assert cb.qw_share.lower >= cb.naive_qw.lower - 1e-12
                assert cb.qw_share.upper <= cb.naive_qw.upper + 1e-12
                assert cb.sharing_rule.lower >= cb.naive_sharing.lower - 1e-12
                assert cb.sharing_rule.upper <= cb.naive_sharing.upper + 1e-12
                assert cb.qw_share.lower <= t["qw_share"] <= cb.qw_share.upper
                assert cb.sharing_rule.lower <= t["sharing_rule"] <= cb.sharing_rule.upper

    _criterion(5, "stable bounds nest in naive bounds and contain the truth", body)


def test_06_ingest_fidelity():
    def body():
        for n, pct in ((1, 0.17), (2, 0.28), (3, 0.37)):
            assert impute_children_expenditure("couple", n, 1000.0) == 1000.0 * pct
        for n, pct in ((1, 0.23), (2, 0.37), (3, 0.47)):
            assert impute_children_expenditure("single", n, 1000.0) == 1000.0 * pct
        agent = Agent("a", "male", 13.75, 41.5, 40.0, "r", 0, None)
        assert agent.labor_income == 112.0 * 13.75
        assert agent.leisure == 112.0 - 41.5
        assert TIME_ENDOWMENT == 112.0

    _criterion(6, "child-cost table, potential income, and leisure identities", body)


def test_07_child_support_tiers():
    def body():
        schedule = ChildSupportSchedule()
        wage = 37.0
        base = 112.0 * wage
        expected = {1: 0.25, 2: 0.33, 3: 0.50, 4: 0.50}
        for n, fraction in expected.items():
            assert schedule.transfer(wage, n) == fraction * base
        assert schedule.transfer(wage, 0) == 0.0

    _criterion(7, "statutory child-support tiers", body)


def test_08_monotonicity_under_enlargement():
    def body():
        import numpy as np

        rng = np.random.default_rng(77)
        model = JointCustody()
        stable, _ = generate_stable_market(
            3, n_couples=4, n_singles=3, model=model, percentile_band=(0.3, 0.7)
        )
        perturbed = perturb_incomes(stable, (stable.couples[0].m_id, None), 1.5)
        perturbed = perturb_incomes(perturbed, (None, stable.couples[1].w_id), 1.3)

        agents = dict(stable.agents)
        couples = list(stable.couples)
        lo, hi = stable.consideration.window
        prev_options = None
        prev_sum = None
        prev_bounds = None
        for step in range(20):
            lo -= float(rng.uniform(0.0, 1.5))
            hi += float(rng.uniform(0.0, 1.5))
            sets = consideration_sets_from_window(agents, couples, (lo, hi))
            market_p = with_consideration(perturbed, sets)
            market_s = with_consideration(stable, sets)

            options = {o.key for o in exit_options(market_p)}
            report = solve_stability_indices(market_p, model)
            if prev_options is not None:
                assert options >= prev_options
                restricted = sum(o.s for o in report.options if o.key in prev_options)
                assert restricted <= prev_sum + 1e-9, f"step {step}"
            prev_options = options
            prev_sum = report.sum_indices

            qw = bound_private_share(market_s, model)
            sharing = bound_sharing_rule(market_s, model)
            if prev_bounds is not None:
                for hid in qw:
                    old_qw, old_sh = prev_bounds[0][hid], prev_bounds[1][hid]
                    assert qw[hid].lower >= old_qw.lower - 1e-9
                    assert qw[hid].upper <= old_qw.upper + 1e-9
                    assert sharing[hid].lower >= old_sh.lower - 1e-9
                    assert sharing[hid].upper <= old_sh.upper + 1e-9
            prev_bounds = (qw, sharing)

    _criterion(8, "enlarging consideration sets never loosens indices or bounds", body)


def test_09_pipeline_determinism(tmp_path):
    def body():
        outputs = {}
        for run in ("first", "second"):
            base = tmp_path / run
            base.mkdir()
            market = str(base / "market.json")
            truth = str(base / "truth.json")
            stab = str(base / "stab.json")
            stab_csv = str(base / "stab.csv")
            bounds = str(base / "bounds.csv")
            plot = str(base / "plot.csv")
            summary = str(base / "summary.txt")
            assert main(["synth", "--seed", "31", "--couples", "6", "--singles", "4",
                         "--model", "jc", "--out", market, "--truth", truth]) == 0
            assert main(["stability", "--market", market, "--model", "jc",
                         "--out", stab, "--csv", stab_csv]) == 0
            assert main(["bounds", "--market", market, "--report", stab, "--model", "jc",
                         "--out", bounds, "--emit-plot-data", plot]) == 0
            assert main(["report", "--stability", stab, "--bounds", bounds, "--out", summary]) == 0
            outputs[run] = [
                open(p, "rb").read() for p in (market, truth, stab, stab_csv, bounds, plot, summary)
            ]
        assert outputs["first"] == outputs["second"]

    _criterion(9, "full pipeline byte-identical across reruns", body)

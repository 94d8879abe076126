"""Synthetic markets with known allocations, perturbations, and a grid verifier.

:func:`generate_stable_market` draws a market together with a hidden
allocation (private splits, Lindahl prices, non-labor shares) and then
sets every exit option's income strictly below the option's affordable
value at that allocation.  The resulting dataset is rationalizable by
construction, with interior margins, so solvers and the grid verifier
agree without tolerance games.

:func:`brute_force_rationalizable` checks rationalizability on tiny
instances by direct enumeration, sharing no code with the LP path.
Pair-level personalized public prices enter exactly one row each, so
their best value is an endpoint and they are resolved per row instead
of gridded; couple-level unknowns run over uniform grids.  A grid hit
is an exact feasible point, so grid-feasible implies LP-feasible; the
converse can fail only at grid resolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import replace

import numpy as np

from .errors import InvalidInputError, UnsupportedError
from .ingest import age_difference_window, consideration_sets_from_window
from .market import (
    FEMALE,
    MALE,
    TIME_ENDOWMENT,
    Agent,
    ChildSupportSchedule,
    Couple,
    HouseholdBundle,
    MarriageMarket,
    PriceIncomeGrid,
    option_key,
    scaled_explicit_income,
)
from .stability import (
    DEFAULT_SCHEDULE,
    ExitOption,
    JointCustody,
    ModelKind,
    SoleCustody,
    exit_options,
)

_BRUTE_GRID_LIMIT = 2_000_000


def _draw_children(rng: np.random.Generator, single: bool) -> int:
    if single:
        return int(rng.choice([0, 1, 2], p=[0.7, 0.2, 0.1]))
    return int(rng.choice([0, 1, 2, 3], p=[0.4, 0.25, 0.25, 0.1]))


def _couple_budget(rng, wage_m, hours_m, wage_w, hours_w, n_children, big_share):
    """Split household spending so the full-income identity holds exactly."""
    nonlabor = float(rng.uniform(50.0, 400.0))
    market_spending = wage_m * hours_m + wage_w * hours_w + nonlabor
    child_frac = float(rng.uniform(0.10, 0.30)) if n_children else 0.0
    children = child_frac * market_spending
    rest = market_spending - children
    q_frac = float(rng.uniform(0.3, 0.7))
    q_priv = q_frac * rest
    Q_pub = rest - q_priv
    big = big_share * children
    return nonlabor, q_priv, Q_pub, children - big, big, children


def generate_stable_market(
    seed: int,
    n_couples: int,
    n_singles: int,
    model: ModelKind,
    *,
    margin_range: tuple[float, float] = (0.8, 0.99),
    big_decision_share: float | None = None,
    with_assignable: bool | None = None,
    schedule: ChildSupportSchedule | None = None,
    region: str = "synthetic",
    percentile_band: tuple[float, float] = (0.01, 0.99),
) -> tuple[MarriageMarket, dict]:
    """Draw a market that is exactly rationalizable, plus its sealed truth.

    Exit-option incomes are explicit: for every cross pair and every
    stay-single option of a married individual, the income is a margin
    factor (drawn in ``margin_range``) times the option's row value at
    the hidden allocation, net of any statutory transfer.  All cross
    pairs get incomes, not only currently considered ones, so widening
    consideration windows later stays well defined.
    """
    if n_couples < 1:
        raise InvalidInputError("need at least one couple")
    schedule = schedule or DEFAULT_SCHEDULE
    rng = np.random.default_rng(seed)
    if with_assignable is None:
        with_assignable = isinstance(model, JointCustody)

    agents: dict[str, Agent] = {}
    couples: list[Couple] = []
    bundles: dict[str, HouseholdBundle] = {}
    nonlabor: dict[str, float] = {}
    rho_map: dict[str, float] = {}
    truth_couples: dict[str, dict] = {}

    for i in range(1, n_couples + 1):
        m_id, w_id, hid = f"m{i:03d}", f"w{i:03d}", f"hc{i:03d}"
        for attempt in range(200):
            wage_m = float(rng.uniform(8.0, 45.0))
            wage_w = float(rng.uniform(8.0, 45.0))
            hours_m = float(rng.uniform(15.0, 60.0))
            hours_w = float(rng.uniform(15.0, 60.0))
            n_children = _draw_children(rng, single=False)
            big_share = big_decision_share if big_decision_share is not None else float(rng.uniform(0.3, 0.7))
            ynl, q_priv, Q_pub, k, K, C = _couple_budget(
                rng, wage_m, hours_m, wage_w, hours_w, n_children, big_share
            )
            q_w_true = float(rng.uniform(0.25, 0.75)) * q_priv
            if isinstance(model, SoleCustody):
                # keep the statutory transfer well below the wife's bundle value,
                # else no nonnegative exit income can rationalize her rows
                transfer = schedule.transfer(wage_m, n_children)
                wife_floor = wage_w * (TIME_ENDOWMENT - hours_w) + q_w_true + 0.1 * Q_pub + C
                if transfer > 0.9 * wife_floor:
                    continue
            break
        else:
            n_children = 0
            ynl, q_priv, Q_pub, k, K, C = _couple_budget(rng, wage_m, hours_m, wage_w, hours_w, 0, 0.5)
            q_w_true = float(rng.uniform(0.25, 0.75)) * q_priv

        age_m = float(rng.uniform(28.0, 60.0))
        age_w = float(min(max(age_m - rng.normal(2.0, 4.0), 25.0), 65.0))
        agents[m_id] = Agent(m_id, MALE, wage_m, hours_m, age_m, region, n_children, w_id)
        agents[w_id] = Agent(w_id, FEMALE, wage_w, hours_w, age_w, region, n_children, m_id)
        couples.append(Couple(m_id, w_id, hid, n_children))
        rho_map[hid] = 1.0
        nonlabor[hid] = ynl

        q_m_true = q_priv - q_w_true
        assign_m = float(rng.uniform(0.0, 0.8)) * q_m_true if with_assignable else None
        assign_w = float(rng.uniform(0.0, 0.8)) * q_w_true if with_assignable else None
        bundles[hid] = HouseholdBundle(
            household_id=hid,
            member_ids=(m_id, w_id),
            leisure_m=TIME_ENDOWMENT - hours_m,
            leisure_w=TIME_ENDOWMENT - hours_w,
            q_priv=q_priv,
            Q_pub=Q_pub,
            child_daily_k=k,
            child_big_K=K,
            child_total_C=C,
            q_priv_assign_m=assign_m,
            q_priv_assign_w=assign_w,
        )
        ynl_share = float(rng.uniform(0.42, 0.58))
        truth_couples[hid] = {
            "m_id": m_id,
            "w_id": w_id,
            "q_m": q_m_true,
            "q_w": q_w_true,
            "rho_m": float(rng.uniform(0.1, 0.9)) * rho_map[hid],
            "ynl_m": ynl_share * ynl,
            "ynl_w": (1.0 - ynl_share) * ynl,
            "kappa_w": float(rng.uniform(0.1, 0.9)),
            "P_w_own": float(rng.uniform(0.1, 0.9)),
        }
        truth_couples[hid]["rho_w"] = rho_map[hid] - truth_couples[hid]["rho_m"]

    for i in range(1, n_singles + 1):
        is_male = i % 2 == 1
        sid = f"sm{i:03d}" if is_male else f"sw{i:03d}"
        hid = f"hs{i:03d}"
        wage = float(rng.uniform(8.0, 45.0))
        hours = float(rng.uniform(15.0, 60.0))
        age = float(rng.uniform(26.0, 64.0))
        n_children = _draw_children(rng, single=True)
        if is_male and isinstance(model, SoleCustody):
            n_children = 0  # custodians are female under sole custody
        ynl = float(rng.uniform(20.0, 200.0))
        spending = wage * hours + ynl
        child_frac = float(rng.uniform(0.10, 0.30)) if n_children else 0.0
        children = child_frac * spending
        rest = spending - children
        q_frac = float(rng.uniform(0.3, 0.7))
        agents[sid] = Agent(sid, MALE if is_male else FEMALE, wage, hours, age, region, n_children, None)
        bundles[hid] = HouseholdBundle(
            household_id=hid,
            member_ids=(sid,),
            leisure_m=TIME_ENDOWMENT - hours if is_male else None,
            leisure_w=None if is_male else TIME_ENDOWMENT - hours,
            q_priv=q_frac * rest,
            Q_pub=(1 - q_frac) * rest,
            child_daily_k=children / 2.0,
            child_big_K=children / 2.0,
            child_total_C=children,
        )
        nonlabor[hid] = ynl

    agents = {a: agents[a] for a in sorted(agents)}
    couple_of = {}
    for couple in couples:
        couple_of[couple.m_id] = couple
        couple_of[couple.w_id] = couple

    # hidden personalized public prices for every cross pair
    married = set(couple_of)
    males = sorted(a for a, ag in agents.items() if ag.gender == MALE)
    females = sorted(a for a, ag in agents.items() if ag.gender == FEMALE)
    pair_truth: dict[str, dict] = {}
    option_list: list[ExitOption] = []
    for couple in couples:
        option_list.append(ExitOption(couple.m_id, None))
        option_list.append(ExitOption(None, couple.w_id))
    for m_id in males:
        for w_id in females:
            couple = couple_of.get(m_id)
            if couple is not None and couple.w_id == w_id:
                continue
            if m_id not in married and w_id not in married:
                continue
            key = option_key(m_id, w_id)
            share = float(rng.uniform(0.1, 0.9))
            pair_truth[key] = {"P_m": share, "P_w": 1.0 - share}
            option_list.append(ExitOption(m_id, w_id))

    def member_value(agent_id: str, side: str, pair_key: str | None) -> float:
        agent = agents[agent_id]
        value = agent.wage * agent.leisure
        couple = couple_of.get(agent_id)
        if couple is None:
            bundle = bundles[next(h for h, b in bundles.items() if agent_id in b.member_ids)]
            value += bundle.q_priv + bundle.children_spending
            public = bundle.Q_pub
        else:
            hid = couple.household_id
            bundle = bundles[hid]
            truth = truth_couples[hid]
            value += truth["q_m"] if side == "m" else truth["q_w"]
            if isinstance(model, JointCustody):
                rho = rho_map[hid]
                lindahl = truth["rho_m"] if side == "m" else truth["rho_w"]
                value += bundle.child_daily_k + (lindahl / rho) * bundle.child_big_K
            else:
                value += bundle.child_total_C
            public = bundle.Q_pub
        if pair_key is None:
            value += public
        else:
            share = pair_truth[pair_key]["P_m"] if side == "m" else pair_truth[pair_key]["P_w"]
            value += share * public
        return value

    explicit_income: dict[str, float] = {}
    option_truth: dict[str, dict] = {}
    for opt in option_list:
        key = opt.key
        pair_key = key if opt.is_pair else None
        rhs = 0.0
        for agent_id, side in ((opt.m, "m"), (opt.w, "w")):
            if agent_id is None:
                continue
            rhs += member_value(agent_id, side, pair_key)
        transfer = 0.0
        if isinstance(model, SoleCustody) and opt.w is not None:
            couple_w = couple_of.get(opt.w)
            if couple_w is not None:
                transfer = schedule.transfer(agents[couple_w.m_id].wage, couple_w.n_children)
        margin = float(rng.uniform(*margin_range))
        income = margin * (rhs - transfer)
        if income < 0:
            income = 0.0
        explicit_income[key] = income
        option_truth[key] = {"margin": margin, "rhs": rhs, "transfer": transfer, "income": income}

    grid = PriceIncomeGrid(
        nonlabor_household=nonlabor,
        rho=rho_map,
        explicit_income=explicit_income,
    )
    window = age_difference_window(agents, couples, percentile_band)
    consideration = consideration_sets_from_window(agents, couples, window)
    market = MarriageMarket(
        region=region,
        agents=agents,
        couples=tuple(couples),
        bundles=bundles,
        grid=grid,
        consideration=consideration,
    )

    for hid, data in truth_couples.items():
        bundle = bundles[hid]
        couple = next(c for c in couples if c.household_id == hid)
        y_couple = (
            agents[couple.m_id].labor_income + agents[couple.w_id].labor_income + nonlabor[hid]
        )
        wife = agents[couple.w_id]
        if isinstance(model, JointCustody):
            child_w = data["kappa_w"] * bundle.child_daily_k + (data["rho_w"] / rho_map[hid]) * bundle.child_big_K
        else:
            child_w = data["kappa_w"] * bundle.child_total_C
        numerator = wife.wage * wife.leisure + data["q_w"] + data["P_w_own"] * bundle.Q_pub + child_w
        data["qw_share"] = data["q_w"] / bundle.q_priv if bundle.q_priv > 0 else 0.0
        data["sharing_rule"] = numerator / y_couple

    truth = {
        "seed": seed,
        "model": model.name,
        "couples": truth_couples,
        "pairs": pair_truth,
        "options": option_truth,
    }
    return market, truth


def perturb_incomes(market: MarriageMarket, option: tuple[str | None, str | None], factor: float) -> MarriageMarket:
    """Multiply one exit option's income by ``factor``.

    A factor above one pushes the option past its rationalizable level;
    the option's stability index then drops below one accordingly.
    """
    if factor <= 0 or not math.isfinite(factor):
        raise InvalidInputError(f"factor must be positive and finite, got {factor}")
    m_id, w_id = option
    if m_id is None and w_id is None:
        raise InvalidInputError("option must name at least one agent")
    for agent_id in (m_id, w_id):
        if agent_id is not None and agent_id not in market.agents:
            raise InvalidInputError(f"unknown agent {agent_id!r} in option")
    key = option_key(m_id, w_id)
    if key in market.grid.explicit_income:
        return scaled_explicit_income(market, key, factor)
    # wage-derived income: materialize it (shares pinned) and scale
    pinned = market.option_income_pinned(m_id, w_id)
    explicit = dict(market.grid.explicit_income)
    explicit[key] = pinned * factor
    return replace(market, grid=replace(market.grid, explicit_income=explicit))


# ---------------------------------------------------------------------------
# Grid verifier
# ---------------------------------------------------------------------------


def brute_force_rationalizable(
    market: MarriageMarket,
    model: ModelKind,
    grid_steps: int = 11,
    *,
    schedule: ChildSupportSchedule | None = None,
    tol: float = 1e-9,
) -> bool:
    """Exhaustively test rationalizability (indices all one) on tiny markets.

    Couple-level unknowns (private split, Lindahl split, non-labor
    split) run over uniform grids; the adding-up partner of each is
    substituted out exactly.  Personalized pair prices appear in a
    single row each and are resolved at their best endpoint, which is
    exact.  Returns True iff some grid point satisfies every row.
    """
    schedule = schedule or DEFAULT_SCHEDULE
    n_singles = len(market.single_ids)
    if len(market.couples) > 2 or n_singles > 2:
        raise UnsupportedError("grid verification supports at most 2 couples and 2 singles")
    if not 2 <= grid_steps <= 21:
        raise UnsupportedError("grid_steps must lie in [2, 21]")

    couples = sorted(market.couples, key=lambda c: c.household_id)
    couple_of = {}
    for couple in couples:
        couple_of[couple.m_id] = couple
        couple_of[couple.w_id] = couple
    grid = market.grid
    options = exit_options(market)

    # decide which non-labor splits matter
    ynl_used = set()
    for opt in options:
        if opt.key in grid.explicit_income:
            continue
        for agent_id in (opt.m, opt.w):
            couple = couple_of.get(agent_id) if agent_id else None
            if couple is not None:
                ynl_used.add(couple.household_id)

    axes: list[np.ndarray] = []
    dim_index: dict[tuple[str, str], int] = {}

    def add_dim(kind: str, hid: str, lo: float, hi: float) -> None:
        dim_index[(kind, hid)] = len(axes)
        if hi - lo <= 0:
            axes.append(np.array([lo]))
        else:
            axes.append(np.linspace(lo, hi, grid_steps))

    for couple in couples:
        hid = couple.household_id
        bundle = market.bundles[hid]
        assign_m = bundle.q_priv_assign_m or 0.0
        assign_w = bundle.q_priv_assign_w or 0.0
        add_dim("q_m", hid, assign_m, bundle.q_priv - assign_w)
        if isinstance(model, JointCustody) and (bundle.child_big_K or 0.0) > 0:
            add_dim("rho_m", hid, 0.0, grid.rho_of(hid))
        if hid in ynl_used:
            total = grid.nonlabor_household[hid]
            lo_f, hi_f = grid.nonlabor_band
            add_dim("ynl_m", hid, min(lo_f * total, hi_f * total), max(lo_f * total, hi_f * total))

    # rows as (const, {dim: coeff}) with violation = const + sum coeff*value <= tol
    rows: list[tuple[float, dict[int, float]]] = []
    for opt in options:
        key = opt.key
        scale = grid.scale_of(key)
        const = 0.0
        coeffs: dict[int, float] = {}

        def bump(kind: str, hid: str, coeff: float) -> None:
            idx = dim_index.get((kind, hid))
            if idx is None:
                return
            coeffs[idx] = coeffs.get(idx, 0.0) + coeff

        # income side
        if key in grid.explicit_income:
            const += scale * grid.explicit_income[key]
        else:
            for agent_id in (opt.m, opt.w):
                if agent_id is None:
                    continue
                agent = market.agents[agent_id]
                const += scale * agent.labor_income
                couple = couple_of.get(agent_id)
                if couple is None:
                    const += scale * market.single_nonlabor(agent_id)
                elif couple.household_id in ynl_used:
                    hid = couple.household_id
                    if agent.gender == MALE:
                        bump("ynl_m", hid, scale)
                    else:
                        const += scale * grid.nonlabor_household[hid]
                        bump("ynl_m", hid, -scale)
                else:
                    const += scale * 0.5 * grid.nonlabor_household[couple.household_id]

        # affordable value of both members' current bundles
        pair_publics: list[float] = []
        for agent_id, side in ((opt.m, "m"), (opt.w, "w")):
            if agent_id is None:
                continue
            agent = market.agents[agent_id]
            couple = couple_of.get(agent_id)
            const -= agent.wage * agent.leisure
            if couple is None:
                bundle = market.bundle_of(agent_id)
                const -= bundle.q_priv + bundle.children_spending
                public = bundle.Q_pub
            else:
                hid = couple.household_id
                bundle = market.bundles[hid]
                if side == "m":
                    bump("q_m", hid, -1.0)
                else:
                    const -= bundle.q_priv
                    bump("q_m", hid, 1.0)
                if isinstance(model, JointCustody):
                    const -= bundle.child_daily_k or 0.0
                    K = bundle.child_big_K or 0.0
                    if K > 0:
                        rho = grid.rho_of(hid)
                        if side == "m":
                            bump("rho_m", hid, -K / rho)
                        else:
                            const -= K
                            bump("rho_m", hid, K / rho)
                else:
                    const -= bundle.child_total_C or 0.0
                public = bundle.Q_pub
            if opt.is_pair:
                pair_publics.append(public)
            else:
                const -= public
        if opt.is_pair:
            # the pair's personalized price puts all weight on the larger side
            const -= max(pair_publics) if pair_publics else 0.0

        if isinstance(model, SoleCustody):
            if opt.w is not None:
                couple_w = couple_of.get(opt.w)
                if couple_w is not None:
                    const += schedule.transfer(market.agents[couple_w.m_id].wage, couple_w.n_children)
            if model.binding and opt.m is not None:
                couple_m = couple_of.get(opt.m)
                if couple_m is not None:
                    const -= schedule.transfer(market.agents[couple_m.m_id].wage, couple_m.n_children)

        rows.append((const, coeffs))

    if not rows:
        return True

    sizes = [len(ax) for ax in axes]
    if not axes:
        return all(const <= tol * max(1.0, abs(const)) for const, _ in rows)

    # split axes into an outer loop and a broadcast inner block
    inner_start = 0
    while int(np.prod(sizes[inner_start:])) > _BRUTE_GRID_LIMIT:
        inner_start += 1
    inner_axes = axes[inner_start:]
    inner_shape = tuple(len(ax) for ax in inner_axes)

    def inner_array(dim: int) -> np.ndarray:
        pos = dim - inner_start
        shape = [1] * len(inner_axes)
        shape[pos] = len(inner_axes[pos])
        return inner_axes[pos].reshape(shape)

    outer_ranges = [range(len(ax)) for ax in axes[:inner_start]]
    for combo in itertools.product(*outer_ranges):
        feasible = np.ones(inner_shape if inner_shape else (1,), dtype=bool)
        for const, coeffs in rows:
            value = np.full(feasible.shape, const)
            for dim, coeff in coeffs.items():
                if dim < inner_start:
                    value = value + coeff * axes[dim][combo[dim]]
                else:
                    value = value + coeff * inner_array(dim)
            feasible &= value <= tol * max(1.0, abs(const))
            if not feasible.any():
                break
        if feasible.any():
            return True
    return False

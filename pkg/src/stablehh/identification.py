"""Set identification of intrahousehold allocation on adjusted markets.

Two objects are bounded per couple: the female's share of the
household's private Hicksian consumption, and her sharing rule, the
fraction of household full income attributable to her.  Bounds come
from minimizing and maximizing the target over allocations satisfying
the stability rows at index one, which requires the market's incomes to
have been adjusted first (or to be rationalizable as observed).

Naive bounds use assignability alone: the lower sharing bound gives the
female her leisure and her assignable private consumption; the upper
additionally assigns her every nonassignable expenditure.  Stability can
only shrink those intervals, never widen them.

The sharing-rule numerator values her leisure at her wage, adds her
private split, her personalized valuation of the household public good,
and a children's component: a free attribution ``kappa`` for
noncooperative child spending plus her Lindahl valuation of cooperative
child spending under joint custody, or ``kappa`` times total child
spending under sole custody.  The free attribution can only widen
bounds, which keeps the definition conservative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import AdjustmentError, SolverFailureError
from . import lp
from .market import ChildSupportSchedule, MarriageMarket
from .stability import (
    BuiltSystem,
    JointCustody,
    ModelKind,
    StabilityReport,
    adjust_incomes,
    build_system,
)


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class CoupleBounds:
    household_id: str
    m_id: str
    w_id: str
    qw_share: Interval
    sharing_rule: Interval
    naive_qw: Interval
    naive_sharing: Interval


@dataclass(frozen=True)
class BoundsReport:
    region: str
    model: str
    binding: bool
    couples: tuple[CoupleBounds, ...]


def _clamp01(value: float) -> float:
    return min(max(value, 0.0), 1.0)


def naive_bounds(market: MarriageMarket) -> dict[str, tuple[Interval, Interval]]:
    """Assignability-only intervals per couple: (qw_share, sharing_rule).

    Without assignable private data the private-share interval is the
    whole unit interval.  Denominators are household full income.
    """
    out: dict[str, tuple[Interval, Interval]] = {}
    for couple in market.couples:
        bundle = market.bundles[couple.household_id]
        assign_m = bundle.q_priv_assign_m or 0.0
        assign_w = bundle.q_priv_assign_w or 0.0
        if bundle.q_priv > 0:
            qw = Interval(_clamp01(assign_w / bundle.q_priv), _clamp01(1.0 - assign_m / bundle.q_priv))
        else:
            qw = Interval(0.0, 1.0)
        wife = market.agents[couple.w_id]
        income = market.household_full_income(couple.household_id)
        her_leisure = wife.wage * wife.leisure
        nonassignable = bundle.q_priv - assign_m - assign_w + bundle.Q_pub + bundle.children_spending
        lower = her_leisure + assign_w
        upper = lower + nonassignable
        sharing = Interval(_clamp01(lower / income), _clamp01(upper / income))
        out[couple.household_id] = (qw, sharing)
    return out


def _solve_direction(system: BuiltSystem, objective, direction: str, backend: str, tol_feas) -> lp.Solution:
    program = system.builder.build(objective=objective, direction=direction)
    solution = lp.solve(program, backend=backend, tol_feas=tol_feas)
    if solution.status == "infeasible":
        raise AdjustmentError("stability system infeasible at index one; adjust incomes first")
    if solution.status != "optimal":
        raise SolverFailureError(f"bounds solve ended with status {solution.status}")
    return solution


def bound_private_share(
    market: MarriageMarket,
    model: ModelKind,
    *,
    pin_splits: bool = False,
    schedule: ChildSupportSchedule | None = None,
    backend: str = "auto",
    tol_feas: float | None = None,
) -> dict[str, Interval]:
    """Min/max of the female private split over the feasible region.

    ``pin_splits`` fixes non-labor shares at 50/50; by default they stay
    free inside the band.
    """
    system = build_system(
        market,
        model,
        with_indices=False,
        split_mode="fixed5050" if pin_splits else "endogenous",
        schedule=schedule,
    )
    out: dict[str, Interval] = {}
    for couple in market.couples:
        hid = couple.household_id
        q_priv = market.bundles[hid].q_priv
        if q_priv <= 0:
            out[hid] = Interval(0.0, 1.0)
            continue
        objective = [(1.0, system.variables.q_w[hid])]
        low = _solve_direction(system, objective, "min", backend, tol_feas).objective_value
        high = _solve_direction(system, objective, "max", backend, tol_feas).objective_value
        out[hid] = Interval(_clamp01(low / q_priv), _clamp01(high / q_priv))
    return out


def bound_sharing_rule(
    market: MarriageMarket,
    model: ModelKind,
    *,
    pin_splits: bool = False,
    schedule: ChildSupportSchedule | None = None,
    backend: str = "auto",
    tol_feas: float | None = None,
) -> dict[str, Interval]:
    """Min/max of the female sharing rule over the feasible region."""
    system = build_system(
        market,
        model,
        with_indices=False,
        split_mode="fixed5050" if pin_splits else "endogenous",
        schedule=schedule,
        include_sharing_variables=True,
    )
    out: dict[str, Interval] = {}
    for couple in market.couples:
        hid = couple.household_id
        bundle = market.bundles[hid]
        wife = market.agents[couple.w_id]
        income = market.household_full_income(hid)
        const = wife.wage * wife.leisure
        objective: list[tuple[float, str]] = [(1.0, system.variables.q_w[hid])]
        if bundle.Q_pub > 0:
            objective.append((bundle.Q_pub, system.variables.own_P_w[hid]))
        if isinstance(model, JointCustody):
            if (bundle.child_daily_k or 0.0) > 0:
                objective.append((bundle.child_daily_k, system.variables.kappa[hid]))
            if (bundle.child_big_K or 0.0) > 0:
                rho = market.grid.rho_of(hid)
                objective.append((bundle.child_big_K / rho, system.variables.rho_w[hid]))
        else:
            if (bundle.child_total_C or 0.0) > 0:
                objective.append((bundle.child_total_C, system.variables.kappa[hid]))
        low = _solve_direction(system, objective, "min", backend, tol_feas).objective_value
        high = _solve_direction(system, objective, "max", backend, tol_feas).objective_value
        out[hid] = Interval(_clamp01((const + low) / income), _clamp01((const + high) / income))
    return out


def compute_bounds(
    market: MarriageMarket,
    model: ModelKind,
    report: StabilityReport | None = None,
    *,
    pin_splits: bool = False,
    schedule: ChildSupportSchedule | None = None,
    backend: str = "auto",
    tol_feas: float | None = None,
) -> BoundsReport:
    """Naive bounds on the raw market, stable bounds on the adjusted one."""
    naive = naive_bounds(market)
    adjusted = adjust_incomes(market, report, schedule=schedule) if report is not None else market
    qw = bound_private_share(
        adjusted, model, pin_splits=pin_splits, schedule=schedule, backend=backend, tol_feas=tol_feas
    )
    sharing = bound_sharing_rule(
        adjusted, model, pin_splits=pin_splits, schedule=schedule, backend=backend, tol_feas=tol_feas
    )
    couples = []
    for couple in market.couples:
        hid = couple.household_id
        naive_qw, naive_sharing = naive[hid]
        couples.append(
            CoupleBounds(
                household_id=hid,
                m_id=couple.m_id,
                w_id=couple.w_id,
                qw_share=qw[hid],
                sharing_rule=sharing[hid],
                naive_qw=naive_qw,
                naive_sharing=naive_sharing,
            )
        )
    return BoundsReport(region=market.region, model=model.name, binding=model.binding, couples=tuple(couples))


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def bounds_csv(reports: Iterable[BoundsReport]) -> str:
    lines = ["couple_id,target,lower,upper,naive_lower,naive_upper"]
    for report in reports:
        for couple in report.couples:
            for target, stable, naive in (
                ("qw_share", couple.qw_share, couple.naive_qw),
                ("sharing_rule", couple.sharing_rule, couple.naive_sharing),
            ):
                lines.append(
                    f"{couple.household_id},{target},"
                    f"{stable.lower!r},{stable.upper!r},{naive.lower!r},{naive.upper!r}"
                )
    return "\n".join(lines) + "\n"


def plot_data_csv(reports: Iterable[BoundsReport], markets: Mapping[str, MarriageMarket]) -> str:
    """Wage-ratio scatter data: log female/male wage against sharing bounds."""
    lines = ["wage_ratio,lower,upper"]
    for report in reports:
        market = markets[report.region]
        for couple in report.couples:
            husband = market.agents[couple.m_id]
            wife = market.agents[couple.w_id]
            if husband.wage <= 0 or wife.wage <= 0:
                continue
            ratio = math.log(wife.wage / husband.wage)
            lines.append(f"{ratio!r},{couple.sharing_rule.lower!r},{couple.sharing_rule.upper!r}")
    return "\n".join(lines) + "\n"


def bounds_report_to_dict(report: BoundsReport) -> dict:
    return {
        "region": report.region,
        "model": report.model,
        "binding": report.binding,
        "couples": [
            {
                "household_id": c.household_id,
                "m_id": c.m_id,
                "w_id": c.w_id,
                "qw_share": [c.qw_share.lower, c.qw_share.upper],
                "sharing_rule": [c.sharing_rule.lower, c.sharing_rule.upper],
                "naive_qw": [c.naive_qw.lower, c.naive_qw.upper],
                "naive_sharing": [c.naive_sharing.lower, c.naive_sharing.upper],
            }
            for c in report.couples
        ],
    }


def dump_bounds_reports(reports: Iterable[BoundsReport]) -> str:
    doc = {"schema_version": 1, "reports": [bounds_report_to_dict(r) for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_bounds_reports(text: str) -> list[BoundsReport]:
    doc = json.loads(text)
    reports = []
    for entry in doc["reports"]:
        couples = tuple(
            CoupleBounds(
                household_id=str(c["household_id"]),
                m_id=str(c["m_id"]),
                w_id=str(c["w_id"]),
                qw_share=Interval(*c["qw_share"]),
                sharing_rule=Interval(*c["sharing_rule"]),
                naive_qw=Interval(*c["naive_qw"]),
                naive_sharing=Interval(*c["naive_sharing"]),
            )
            for c in entry["couples"]
        )
        reports.append(
            BoundsReport(
                region=str(entry["region"]),
                model=str(entry["model"]),
                binding=bool(entry["binding"]),
                couples=couples,
            )
        )
    return reports

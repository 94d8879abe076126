"""Stability constraint systems, index solving, and income adjustment.

A marriage market is stable when every married individual can afford
their current consumption only inside the marriage (individual
rationality) and no cross-couple pair could jointly afford both current
bundles at the pair's prices and income (no blocking pairs).  Those
conditions are linear in the unknown within-couple allocations, so each
market becomes one linear program.

Two custody models change how children's spending enters the rows:

* joint custody: daily child spending enters at market price and the
  big-decision part at an unknown per-parent Lindahl price, the two
  parent prices adding up to the couple's market price;
* sole custody: the (female) custodian produces all children's
  spending; exits of married women carry the statutory minimum transfer
  from the current husband on the income side.  A "binding transfers"
  variant additionally credits married men's exits with the transfer
  they owe.

Stability indices scale each exit option's income by ``s in [0, 1]``;
maximizing the sum of indices measures how much post-divorce income
must be forgone to rationalize the data.  Income adjustment rescales
exit incomes by the solved indices so downstream identification runs on
a feasible system.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import (
    AdjustmentError,
    InvalidInputError,
    ModelError,
    ModelMismatchError,
    SolverFailureError,
)
from . import lp
from .market import (
    MALE,
    ChildSupportSchedule,
    Couple,
    MarriageMarket,
    option_key,
    with_income_scale,
)

_TINY_INCOME = 1e-9


@dataclass(frozen=True)
class JointCustody:
    """Both parents keep the children; no transfers."""

    name: str = field(default="jc", init=False)
    binding: bool = field(default=False, init=False)


@dataclass(frozen=True)
class SoleCustody:
    """Female custodian; statutory minimum transfers from the father."""

    binding: bool = False
    name: str = field(default="spc", init=False)


ModelKind = JointCustody | SoleCustody

DEFAULT_SCHEDULE = ChildSupportSchedule()


def model_from_string(name: str, binding: bool = False) -> ModelKind:
    if name == "jc":
        if binding:
            raise InvalidInputError("the binding-transfers variant only exists under sole custody")
        return JointCustody()
    if name == "spc":
        return SoleCustody(binding=binding)
    raise InvalidInputError(f"unknown model {name!r}")


@dataclass(frozen=True)
class ExitOption:
    """One exit option: staying single (one id None) or a cross pair."""

    m: str | None
    w: str | None

    @property
    def key(self) -> str:
        return option_key(self.m, self.w)

    @property
    def is_pair(self) -> bool:
        return self.m is not None and self.w is not None


def exit_options(market: MarriageMarket) -> list[ExitOption]:
    """All constrained exit options of a market, in deterministic order.

    Every married individual gets a stay-single option; every mutually
    considered cross-gender pair with at least one married member (and
    excluding the match itself) gets a blocking-pair option.
    """
    if market.consideration is None:
        raise InvalidInputError("market has no consideration sets; build them first")
    matched = {(c.m_id, c.w_id) for c in market.couples}
    options: list[ExitOption] = []
    for couple in sorted(market.couples, key=lambda c: c.m_id):
        options.append(ExitOption(couple.m_id, None))
    for couple in sorted(market.couples, key=lambda c: c.w_id):
        options.append(ExitOption(None, couple.w_id))
    married = {c.m_id for c in market.couples} | {c.w_id for c in market.couples}
    for m_id in sorted(market.males()):
        for w_id in sorted(market.females()):
            if (m_id, w_id) in matched:
                continue
            if m_id not in married and w_id not in married:
                continue
            if market.consideration.considers(m_id, w_id):
                options.append(ExitOption(m_id, w_id))
    return options


@dataclass(frozen=True)
class AllocationVariables:
    """Names of the unknown allocation variables inside a built system."""

    q_m: Mapping[str, str]
    q_w: Mapping[str, str]
    rho_m: Mapping[str, str]
    rho_w: Mapping[str, str]
    ynl_m: Mapping[str, str]
    ynl_w: Mapping[str, str]
    pair_P_m: Mapping[str, str]
    pair_P_w: Mapping[str, str]
    s: Mapping[str, str]
    loss: Mapping[str, str]
    kappa: Mapping[str, str]
    own_P_m: Mapping[str, str]
    own_P_w: Mapping[str, str]


@dataclass(frozen=True)
class BuiltSystem:
    """A generated constraint system plus its bookkeeping."""

    program: lp.LinearProgram
    builder: lp.LPBuilder
    variables: AllocationVariables
    options: tuple[ExitOption, ...]
    pinned_income: Mapping[str, float]  # scaled, non-labor shares pinned 50/50
    model: ModelKind
    split_mode: str


def _child_terms_jc(market: MarriageMarket, couple: Couple, rho_var: str):
    bundle = market.bundles[couple.household_id]
    if bundle.child_daily_k is None or bundle.child_big_K is None:
        raise ModelMismatchError(
            f"household {couple.household_id} lacks the daily/big-decision children split required under joint custody"
        )
    rho = market.grid.rho_of(couple.household_id)
    const = bundle.child_daily_k
    terms = []
    if bundle.child_big_K > 0:
        terms.append((bundle.child_big_K / rho, rho_var))
    return const, terms


def _child_const_spc(market: MarriageMarket, couple: Couple) -> float:
    bundle = market.bundles[couple.household_id]
    if bundle.child_total_C is None:
        raise ModelMismatchError(
            f"household {couple.household_id} lacks total children spending required under sole custody"
        )
    return bundle.child_total_C


def _member_part(
    market: MarriageMarket,
    model: ModelKind,
    agent_id: str,
    side: str,
    alloc: AllocationVariables,
    pair_key: str | None,
):
    """RHS contribution of one option member: (constant, negated variable terms).

    ``pair_key`` is None for stay-single options, where the public good
    is valued at the market price; pair options value each member's
    current public consumption at the pair's personalized price.
    """
    agent = market.agents[agent_id]
    couple = market.couple_of(agent_id)
    const = agent.wage * agent.leisure
    terms: list[tuple[float, str]] = []
    if couple is None:
        bundle = market.bundle_of(agent_id)
        const += bundle.q_priv + bundle.children_spending
        public = bundle.Q_pub
    else:
        hid = couple.household_id
        bundle = market.bundles[hid]
        terms.append((-1.0, alloc.q_m[hid] if side == "m" else alloc.q_w[hid]))
        if isinstance(model, JointCustody):
            child_const, child_terms = _child_terms_jc(
                market, couple, alloc.rho_m[hid] if side == "m" else alloc.rho_w[hid]
            )
            const += child_const
            terms.extend((-coeff, var) for coeff, var in child_terms)
        else:
            const += _child_const_spc(market, couple)
        public = bundle.Q_pub
    if pair_key is None:
        # stay-single option: public consumption at the market price
        const += public
    elif public > 0:
        var = alloc.pair_P_m[pair_key] if side == "m" else alloc.pair_P_w[pair_key]
        terms.append((-public, var))
    return const, terms


def build_system(
    market: MarriageMarket,
    model: ModelKind,
    *,
    with_indices: bool = True,
    split_mode: str = "fixed5050",
    schedule: ChildSupportSchedule | None = None,
    include_sharing_variables: bool = False,
) -> BuiltSystem:
    """Emit the full constraint system of one market.

    ``with_indices=False`` pins every index at one (the exact
    rationalizability rows, used for bounds).  ``split_mode`` is
    ``"fixed5050"`` (non-labor shares pinned) or ``"endogenous"``
    (shares free inside the band; indices then use the additive-loss
    form to keep rows linear).
    """
    if split_mode not in ("fixed5050", "endogenous"):
        raise InvalidInputError(f"unknown split mode {split_mode!r}")
    schedule = schedule or DEFAULT_SCHEDULE
    options = exit_options(market)
    builder = lp.LPBuilder()
    grid = market.grid
    P = grid.public_price
    ynl_free = split_mode == "endogenous"
    loss_mode = with_indices and ynl_free

    # which couples' non-labor splits actually enter an income side
    couples_by_agent = {}
    for couple in market.couples:
        couples_by_agent[couple.m_id] = couple
        couples_by_agent[couple.w_id] = couple
    ynl_used: set[str] = set()
    if ynl_free:
        for opt in options:
            if opt.key in grid.explicit_income:
                continue
            for agent_id in (opt.m, opt.w):
                couple = couples_by_agent.get(agent_id) if agent_id else None
                if couple is not None:
                    ynl_used.add(couple.household_id)

    q_m: dict[str, str] = {}
    q_w: dict[str, str] = {}
    rho_m: dict[str, str] = {}
    rho_w: dict[str, str] = {}
    ynl_m: dict[str, str] = {}
    ynl_w: dict[str, str] = {}
    kappa: dict[str, str] = {}
    own_P_m: dict[str, str] = {}
    own_P_w: dict[str, str] = {}

    for couple in market.couples:
        hid = couple.household_id
        bundle = market.bundles[hid]
        assign_m = bundle.q_priv_assign_m or 0.0
        assign_w = bundle.q_priv_assign_w or 0.0
        q_m[hid] = builder.add_variable(f"q_m[{hid}]", assign_m, bundle.q_priv - assign_w)
        q_w[hid] = builder.add_variable(f"q_w[{hid}]", assign_w, bundle.q_priv - assign_m)
        builder.add_constraint(f"eq_q[{hid}]", [(1.0, q_m[hid]), (1.0, q_w[hid])], "=", bundle.q_priv)
        if isinstance(model, JointCustody):
            rho = grid.rho_of(hid)
            rho_m[hid] = builder.add_variable(f"rho_m[{hid}]", 0.0, rho)
            rho_w[hid] = builder.add_variable(f"rho_w[{hid}]", 0.0, rho)
            builder.add_constraint(f"eq_rho[{hid}]", [(1.0, rho_m[hid]), (1.0, rho_w[hid])], "=", rho)
        if hid in ynl_used:
            total = grid.nonlabor_household[hid]
            lo_frac, hi_frac = grid.nonlabor_band
            lo = min(lo_frac * total, hi_frac * total)
            hi = max(lo_frac * total, hi_frac * total)
            ynl_m[hid] = builder.add_variable(f"ynl_m[{hid}]", lo, hi)
            ynl_w[hid] = builder.add_variable(f"ynl_w[{hid}]", lo, hi)
            builder.add_constraint(f"eq_ynl[{hid}]", [(1.0, ynl_m[hid]), (1.0, ynl_w[hid])], "=", total)
        if include_sharing_variables:
            kappa[hid] = builder.add_variable(f"kappa[{hid}]", 0.0, 1.0)
            own_P_m[hid] = builder.add_variable(f"Pown_m[{hid}]", 0.0, P)
            own_P_w[hid] = builder.add_variable(f"Pown_w[{hid}]", 0.0, P)
            builder.add_constraint(f"eq_Pown[{hid}]", [(1.0, own_P_m[hid]), (1.0, own_P_w[hid])], "=", P)

    pair_P_m: dict[str, str] = {}
    pair_P_w: dict[str, str] = {}
    s_vars: dict[str, str] = {}
    loss_vars: dict[str, str] = {}
    for opt in options:
        if opt.is_pair:
            pair_P_m[opt.key] = builder.add_variable(f"P_m[{opt.key}]", 0.0, P)
            pair_P_w[opt.key] = builder.add_variable(f"P_w[{opt.key}]", 0.0, P)
            builder.add_constraint(f"eq_P[{opt.key}]", [(1.0, pair_P_m[opt.key]), (1.0, pair_P_w[opt.key])], "=", P)
        if with_indices:
            if loss_mode:
                loss_vars[opt.key] = builder.add_variable(f"L[{opt.key}]", 0.0, math.inf)
            else:
                s_vars[opt.key] = builder.add_variable(f"s[{opt.key}]", 0.0, 1.0)

    alloc = AllocationVariables(
        q_m=q_m,
        q_w=q_w,
        rho_m=rho_m,
        rho_w=rho_w,
        ynl_m=ynl_m,
        ynl_w=ynl_w,
        pair_P_m=pair_P_m,
        pair_P_w=pair_P_w,
        s=s_vars,
        loss=loss_vars,
        kappa=kappa,
        own_P_m=own_P_m,
        own_P_w=own_P_w,
    )

    pinned: dict[str, float] = {}
    for opt in options:
        key = opt.key
        scale = grid.scale_of(key)
        pinned[key] = scale * market.option_income_pinned(opt.m, opt.w)

        terms: list[tuple[float, str]] = []
        rhs = 0.0
        pair_key = key if opt.is_pair else None
        for agent_id, side in ((opt.m, "m"), (opt.w, "w")):
            if agent_id is None:
                continue
            const, member_terms = _member_part(market, model, agent_id, side, alloc, pair_key)
            rhs += const
            terms.extend(member_terms)

        if isinstance(model, SoleCustody):
            if opt.w is not None:
                couple_w = couples_by_agent.get(opt.w)
                if couple_w is not None:
                    husband = market.agents[couple_w.m_id]
                    rhs -= schedule.transfer(husband.wage, couple_w.n_children)
            if model.binding and opt.m is not None:
                couple_m = couples_by_agent.get(opt.m)
                if couple_m is not None:
                    male = market.agents[couple_m.m_id]
                    rhs += schedule.transfer(male.wage, couple_m.n_children)

        # income side
        explicit = key in grid.explicit_income
        income_vars: list[tuple[float, str]] = []
        income_const = 0.0
        if explicit:
            income_const = grid.explicit_income[key]
        else:
            for agent_id in (opt.m, opt.w):
                if agent_id is None:
                    continue
                agent = market.agents[agent_id]
                income_const += agent.labor_income
                couple = couples_by_agent.get(agent_id)
                if couple is None:
                    income_const += market.single_nonlabor(agent_id)
                elif couple.household_id in ynl_used:
                    var = ynl_m[couple.household_id] if agent.gender == MALE else ynl_w[couple.household_id]
                    income_vars.append((scale, var))
                else:
                    income_const += 0.5 * grid.nonlabor_household[couple.household_id]

        if with_indices and not loss_mode:
            terms.append((pinned[key], s_vars[key]))
        else:
            terms.extend(income_vars)
            rhs -= scale * income_const
            if loss_mode:
                terms.append((-1.0, loss_vars[key]))
        builder.add_constraint(f"opt[{key}]", terms, "<=", rhs)

    program = builder.build()
    return BuiltSystem(
        program=program,
        builder=builder,
        variables=alloc,
        options=tuple(options),
        pinned_income=pinned,
        model=model,
        split_mode=split_mode,
    )


def build_jc_constraints(
    market: MarriageMarket,
    *,
    with_indices: bool = True,
    split_mode: str = "fixed5050",
) -> BuiltSystem:
    """Joint-custody constraint system (adding-up, IR, and NBP rows)."""
    return build_system(market, JointCustody(), with_indices=with_indices, split_mode=split_mode)


def build_spc_constraints(
    market: MarriageMarket,
    *,
    schedule: ChildSupportSchedule | None = None,
    with_indices: bool = True,
    split_mode: str = "fixed5050",
    binding: bool = False,
) -> BuiltSystem:
    """Sole-custody constraint system with statutory minimum transfers."""
    return build_system(
        market,
        SoleCustody(binding=binding),
        with_indices=with_indices,
        split_mode=split_mode,
        schedule=schedule,
    )


# ---------------------------------------------------------------------------
# Index solving and reporting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptionIndex:
    m: str | None
    w: str | None
    s: float
    income: float  # scaled income the index applies to (shares pinned 50/50)

    @property
    def key(self) -> str:
        return option_key(self.m, self.w)


@dataclass(frozen=True)
class CoupleSummary:
    household_id: str
    m_id: str
    w_id: str
    average_index: float
    minimum_index: float


@dataclass(frozen=True)
class StabilityReport:
    """Per-exit-option indices and per-couple summaries for one market.

    Per-option indices at the optimum need not be unique; the
    model-level statistic is ``sum_indices``.
    """

    region: str
    model: str
    binding: bool
    split_mode: str
    options: tuple[OptionIndex, ...]
    couples: tuple[CoupleSummary, ...]
    sum_indices: float
    objective_value: float
    solution: Mapping[str, float]

    def index_of(self, key: str) -> float:
        for opt in self.options:
            if opt.key == key:
                return opt.s
        raise KeyError(key)


def summarize(
    report: StabilityReport,
    couples: Iterable[tuple[str, str, str]] | None = None,
) -> tuple[CoupleSummary, ...]:
    """Per-couple average and minimum over the couple's own exit options."""
    if couples is None:
        couples = [(c.household_id, c.m_id, c.w_id) for c in report.couples]
    summaries = []
    for household_id, m_id, w_id in couples:
        values = [opt.s for opt in report.options if opt.m == m_id or opt.w == w_id]
        if not values:
            continue
        summaries.append(
            CoupleSummary(
                household_id=household_id,
                m_id=m_id,
                w_id=w_id,
                average_index=sum(values) / len(values),
                minimum_index=min(values),
            )
        )
    return tuple(summaries)


def solve_stability_indices(
    market: MarriageMarket,
    model: ModelKind,
    split_mode: str = "fixed5050",
    *,
    schedule: ChildSupportSchedule | None = None,
    backend: str = "auto",
    tol_feas: float | None = None,
) -> StabilityReport:
    """Solve for the stability index of every exit option.

    With pinned non-labor splits this maximizes the sum of indices
    directly.  With endogenous splits the bilinear index-times-income
    term is replaced by income minus a nonnegative loss, the normalized
    losses are minimized, and indices are recovered as one minus the
    realized relative loss.
    """
    system = build_system(market, model, with_indices=True, split_mode=split_mode, schedule=schedule)
    loss_mode = split_mode == "endogenous"
    if loss_mode:
        objective = [
            (1.0 / max(system.pinned_income[opt.key], _TINY_INCOME), system.variables.loss[opt.key])
            for opt in system.options
        ]
        program = system.builder.build(objective=objective, direction="min")
    else:
        objective = [(1.0, system.variables.s[opt.key]) for opt in system.options]
        program = system.builder.build(objective=objective, direction="max")

    solution = lp.solve(program, backend=backend, tol_feas=tol_feas)
    if solution.status == "infeasible":
        raise ModelError(
            "stability system infeasible even with indices at zero; unscaled transfer "
            "floors exceed some household's bundle value"
        )
    if solution.status != "optimal":
        raise SolverFailureError(f"stability solve ended with status {solution.status}")

    option_indices = []
    for opt in system.options:
        key = opt.key
        if loss_mode:
            income = _income_at(system, market, opt, solution.values)
            loss = solution.values[system.variables.loss[key]]
            s = 1.0 if income <= _TINY_INCOME else 1.0 - loss / income
        else:
            income = system.pinned_income[key]
            s = solution.values[system.variables.s[key]]
            if income <= _TINY_INCOME:
                s = 1.0
        s = min(max(s, 0.0), 1.0)
        option_indices.append(OptionIndex(m=opt.m, w=opt.w, s=s, income=income))

    report = StabilityReport(
        region=market.region,
        model=model.name,
        binding=model.binding,
        split_mode=split_mode,
        options=tuple(option_indices),
        couples=(),
        sum_indices=float(sum(o.s for o in option_indices)),
        objective_value=float(solution.objective_value),
        solution=dict(sorted(solution.values.items())),
    )
    couples = [(c.household_id, c.m_id, c.w_id) for c in market.couples]
    return replace(report, couples=summarize(report, couples))


def _income_at(
    system: BuiltSystem,
    market: MarriageMarket,
    opt: ExitOption,
    values: Mapping[str, float],
) -> float:
    """Scaled exit-option income evaluated at solved non-labor shares."""
    key = opt.key
    grid = market.grid
    scale = grid.scale_of(key)
    if key in grid.explicit_income:
        return scale * grid.explicit_income[key]
    total = 0.0
    for agent_id in (opt.m, opt.w):
        if agent_id is None:
            continue
        agent = market.agents[agent_id]
        total += agent.labor_income
        couple = market.couple_of(agent_id)
        if couple is None:
            total += market.single_nonlabor(agent_id)
        else:
            hid = couple.household_id
            var = system.variables.ynl_m.get(hid) if agent.gender == MALE else system.variables.ynl_w.get(hid)
            if var is not None and var in values:
                total += values[var]
            else:
                total += 0.5 * grid.nonlabor_household[hid]
    return scale * total


def adjust_incomes(
    market: MarriageMarket,
    report: StabilityReport,
    *,
    schedule: ChildSupportSchedule | None = None,
    tol_feas: float | None = None,
) -> MarriageMarket:
    """Rescale exit-option incomes by the solved indices.

    Matched couples' own incomes are untouched.  The adjusted market is
    re-checked: the stage-one allocation must satisfy every row at
    index one, within the feasibility tolerance.
    """
    if tol_feas is None:
        tol_feas = lp.feasibility_tolerance()
    scales = dict(market.grid.income_scale)
    for opt in report.options:
        key = opt.key
        scales[key] = scales.get(key, 1.0) * min(max(opt.s, 0.0), 1.0)
    adjusted = with_income_scale(market, scales)

    model = model_from_string(report.model, report.binding)
    system = build_system(
        adjusted,
        model,
        with_indices=False,
        split_mode=report.split_mode,
        schedule=schedule,
    )
    candidate = {}
    for variable in system.program.variables:
        if variable.name not in report.solution:
            raise AdjustmentError(f"stage-one solution lacks a value for {variable.name!r}")
        candidate[variable.name] = report.solution[variable.name]
    residual = lp.check_feasibility(system.program, candidate, scaled=True)
    if residual > tol_feas * 10:
        raise AdjustmentError(f"adjusted system violates feasibility by {residual:.3e}")
    return adjusted


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------


def report_to_dict(report: StabilityReport) -> dict:
    return {
        "region": report.region,
        "model": report.model,
        "binding": report.binding,
        "split_mode": report.split_mode,
        "sum_indices": report.sum_indices,
        "objective_value": report.objective_value,
        "options": [
            {"m": o.m, "w": o.w, "s": o.s, "income": o.income} for o in report.options
        ],
        "couples": [
            {
                "household_id": c.household_id,
                "m_id": c.m_id,
                "w_id": c.w_id,
                "average_index": c.average_index,
                "minimum_index": c.minimum_index,
            }
            for c in report.couples
        ],
        "solution": dict(report.solution),
        "note": "per-option indices may be non-unique; sum_indices is the model-level statistic",
    }


def report_from_dict(doc: dict) -> StabilityReport:
    return StabilityReport(
        region=str(doc["region"]),
        model=str(doc["model"]),
        binding=bool(doc["binding"]),
        split_mode=str(doc["split_mode"]),
        options=tuple(
            OptionIndex(m=o["m"], w=o["w"], s=float(o["s"]), income=float(o["income"])) for o in doc["options"]
        ),
        couples=tuple(
            CoupleSummary(
                household_id=str(c["household_id"]),
                m_id=str(c["m_id"]),
                w_id=str(c["w_id"]),
                average_index=float(c["average_index"]),
                minimum_index=float(c["minimum_index"]),
            )
            for c in doc["couples"]
        ),
        sum_indices=float(doc["sum_indices"]),
        objective_value=float(doc["objective_value"]),
        solution={str(k): float(v) for k, v in doc["solution"].items()},
    )


def dump_reports(reports: Iterable[StabilityReport]) -> str:
    doc = {"schema_version": 1, "reports": [report_to_dict(r) for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_reports(text: str) -> list[StabilityReport]:
    doc = json.loads(text)
    return [report_from_dict(r) for r in doc["reports"]]


def reports_csv(reports: Iterable[StabilityReport]) -> str:
    lines = ["market,m,w,s,income"]
    for report in reports:
        for opt in report.options:
            m = opt.m or ""
            w = opt.w or ""
            lines.append(f"{report.region},{m},{w},{opt.s!r},{opt.income!r}")
    return "\n".join(lines) + "\n"

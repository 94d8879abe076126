"""Survey ingestion: CSV parsing, imputation, incomes, markets, consideration sets.

Input files:

``agents.csv``
    header ``id,gender,wage,work_hours,age,region,n_children,spouse_id``
    (``spouse_id`` empty for singles).

``households.csv``
    header ``household_id,member_ids,total_expenditure,assignable_private_m,
    assignable_private_w,big_decision_share``; ``member_ids`` joins agent
    ids with ``;``.  The three trailing columns are optional and may be
    omitted or left empty.  ``total_expenditure`` is weekly market
    spending excluding leisure.

A JSON config file may set ``model`` (``jc``/``spc``),
``big_decision_share``, ``nonlabor_band``, ``percentile_band``,
``trim_outliers`` and ``trim_band``.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyMarketError,
    InconsistentRegionError,
    InvalidInputError,
    ModelMismatchError,
)
from .market import (
    FEMALE,
    MALE,
    TIME_ENDOWMENT,
    Agent,
    ChildSupportSchedule,
    ConsiderationSets,
    Couple,
    HouseholdBundle,
    MarriageMarket,
    PriceIncomeGrid,
)

AGENTS_HEADER = ["id", "gender", "wage", "work_hours", "age", "region", "n_children", "spouse_id"]
logger = logging.getLogger(__name__)

HOUSEHOLDS_HEADER = [
    "household_id",
    "member_ids",
    "total_expenditure",
    "assignable_private_m",
    "assignable_private_w",
    "big_decision_share",
]
_HOUSEHOLDS_REQUIRED = HOUSEHOLDS_HEADER[:3]

#: Cost of children as a share of total spending, by children count,
#: from the OECD-modified adult equivalence scale.  The last entry
#: applies to that count and above.
CHILD_COST_COUPLE = {1: 0.17, 2: 0.28, 3: 0.37}
CHILD_COST_SINGLE = {1: 0.23, 2: 0.37, 3: 0.47}


@dataclass(frozen=True)
class IngestConfig:
    model: str = "jc"
    big_decision_share: float = 0.5
    nonlabor_band: tuple[float, float] = (0.4, 0.6)
    percentile_band: tuple[float, float] = (0.01, 0.99)
    trim_outliers: bool = False
    trim_band: tuple[float, float] = (0.01, 0.99)


def load_config(path: str) -> IngestConfig:
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    known = {"model", "big_decision_share", "nonlabor_band", "percentile_band", "trim_outliers", "trim_band"}
    unknown = set(raw) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    cfg = IngestConfig(
        model=raw.get("model", "jc"),
        big_decision_share=float(raw.get("big_decision_share", 0.5)),
        nonlabor_band=tuple(raw.get("nonlabor_band", (0.4, 0.6))),  # type: ignore[arg-type]
        percentile_band=tuple(raw.get("percentile_band", (0.01, 0.99))),  # type: ignore[arg-type]
        trim_outliers=bool(raw.get("trim_outliers", False)),
        trim_band=tuple(raw.get("trim_band", (0.01, 0.99))),  # type: ignore[arg-type]
    )
    if cfg.model not in ("jc", "spc"):
        raise InvalidInputError(f"config model must be jc or spc, got {cfg.model!r}")
    return cfg


@dataclass(frozen=True)
class HouseholdRow:
    household_id: str
    member_ids: tuple[str, ...]
    total_expenditure: float
    assignable_private_m: float | None = None
    assignable_private_w: float | None = None
    big_decision_share: float | None = None


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------


def load_agents_csv(path: str) -> list[Agent]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != AGENTS_HEADER:
            raise InvalidInputError(f"agents.csv header must be {','.join(AGENTS_HEADER)}")
        agents = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell for cell in row):
                continue
            if len(row) != len(AGENTS_HEADER):
                raise InvalidInputError(f"agents.csv line {line_no}: expected {len(AGENTS_HEADER)} fields")
            try:
                agents.append(
                    Agent(
                        id=row[0],
                        gender=row[1],
                        wage=float(row[2]),
                        work_hours=float(row[3]),
                        age=float(row[4]),
                        region=row[5],
                        n_children=int(row[6]),
                        spouse_id=row[7] or None,
                    )
                )
            except ValueError as exc:
                raise InvalidInputError(f"agents.csv line {line_no}: {exc}") from exc
    return agents


def load_households_csv(path: str) -> list[HouseholdRow]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[: len(_HOUSEHOLDS_REQUIRED)] != _HOUSEHOLDS_REQUIRED:
            raise InvalidInputError(f"households.csv must start with columns {','.join(_HOUSEHOLDS_REQUIRED)}")
        extra = header[len(_HOUSEHOLDS_REQUIRED) :]
        if extra != HOUSEHOLDS_HEADER[3 : 3 + len(extra)]:
            raise InvalidInputError("optional households.csv columns must follow the canonical order")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell for cell in row):
                continue
            if len(row) != len(header):
                raise InvalidInputError(f"households.csv line {line_no}: expected {len(header)} fields")
            record = dict(zip(header, row))

            def optional(name: str) -> float | None:
                value = record.get(name, "")
                return float(value) if value != "" else None

            try:
                rows.append(
                    HouseholdRow(
                        household_id=record["household_id"],
                        member_ids=tuple(record["member_ids"].split(";")),
                        total_expenditure=float(record["total_expenditure"]),
                        assignable_private_m=optional("assignable_private_m"),
                        assignable_private_w=optional("assignable_private_w"),
                        big_decision_share=optional("big_decision_share"),
                    )
                )
            except ValueError as exc:
                raise InvalidInputError(f"households.csv line {line_no}: {exc}") from exc
    return rows


# ---------------------------------------------------------------------------
# Core construction steps
# ---------------------------------------------------------------------------


def impute_children_expenditure(status: str, n_children: int, total_expenditure: float) -> float:
    """Children's spending as an equivalence-scale share of total spending."""
    if total_expenditure < 0:
        raise InvalidInputError(f"total expenditure must be nonnegative, got {total_expenditure}")
    if n_children < 0:
        raise InvalidInputError(f"children count must be nonnegative, got {n_children}")
    if status not in ("couple", "single"):
        raise InvalidInputError(f"status must be couple or single, got {status!r}")
    if n_children == 0:
        return 0.0
    table = CHILD_COST_COUPLE if status == "couple" else CHILD_COST_SINGLE
    return table[min(n_children, 3)] * total_expenditure


def build_bundle(
    row: HouseholdRow,
    agents_by_id: dict[str, Agent],
    big_decision_share: float = 0.5,
) -> HouseholdBundle:
    """Observed bundle from one household row.

    Children's spending is imputed, the adult remainder splits evenly
    into private and public Hicksian aggregates, leisure is the time
    endowment net of work hours, and the children split uses
    ``big_decision_share`` (the row's own value wins when present).
    """
    members = [agents_by_id.get(mid) for mid in row.member_ids]
    if any(member is None for member in members):
        raise InvalidInputError(f"household {row.household_id}: unknown member id")
    if len(members) not in (1, 2):
        raise InvalidInputError(f"household {row.household_id}: expected 1 or 2 members")
    for member in members:
        if member.work_hours > TIME_ENDOWMENT:
            raise InvalidInputError(f"agent {member.id}: work hours exceed the weekly time endowment")

    status = "couple" if len(members) == 2 else "single"
    n_children = max(member.n_children for member in members)
    children = impute_children_expenditure(status, n_children, row.total_expenditure)
    adult = row.total_expenditure - children
    share = row.big_decision_share if row.big_decision_share is not None else big_decision_share
    if not 0.0 <= share <= 1.0:
        raise InvalidInputError(f"household {row.household_id}: big_decision_share outside [0, 1]")
    big = share * children

    leisure_m = leisure_w = None
    for member in members:
        if member.gender == MALE:
            leisure_m = member.leisure
        else:
            leisure_w = member.leisure
    return HouseholdBundle(
        household_id=row.household_id,
        member_ids=tuple(row.member_ids),
        leisure_m=leisure_m,
        leisure_w=leisure_w,
        q_priv=adult / 2.0,
        Q_pub=adult / 2.0,
        child_daily_k=children - big,
        child_big_K=big,
        child_total_C=children,
        q_priv_assign_m=row.assignable_private_m,
        q_priv_assign_w=row.assignable_private_w,
    )


def compute_incomes(
    agents: dict[str, Agent],
    bundles: dict[str, HouseholdBundle],
    nonlabor_band: tuple[float, float] = (0.4, 0.6),
) -> PriceIncomeGrid:
    """Household non-labor income as full spending minus potential labor income.

    Full spending values leisure at the member's wage.  Negative
    non-labor income is retained; clamping would bias counterfactual
    incomes.
    """
    nonlabor = {}
    rho = {}
    for hid, bundle in bundles.items():
        labor = 0.0
        leisure_value = 0.0
        for mid in bundle.member_ids:
            agent = agents[mid]
            labor += agent.labor_income
            leisure_value += agent.wage * agent.leisure
        full_spending = bundle.q_priv + bundle.Q_pub + bundle.children_spending + leisure_value
        nonlabor[hid] = full_spending - labor
        if nonlabor[hid] < 0:
            logger.info("household %s: negative non-labor income %.2f retained", hid, nonlabor[hid])
        if len(bundle.member_ids) == 2:
            rho[hid] = 1.0
    return PriceIncomeGrid(nonlabor_household=nonlabor, rho=rho, nonlabor_band=nonlabor_band)


def compute_child_support(agent: Agent, schedule: ChildSupportSchedule, model: str = "spc") -> float:
    """Minimum transfer the (male) non-custodian owes, by statutory tiers."""
    if model != "spc":
        raise ModelMismatchError("child-support transfers only apply under sole custody")
    if agent.gender != MALE:
        raise ModelMismatchError("non-custodians are male under the sole-custody assumptions")
    return schedule.transfer(agent.wage, agent.n_children)


def partition_markets(agents: list[Agent]) -> dict[str, list[Agent]]:
    """Group agents by region; spouses may not straddle regions."""
    by_id = {a.id: a for a in agents}
    for agent in agents:
        if agent.spouse_id is not None:
            spouse = by_id.get(agent.spouse_id)
            if spouse is not None and spouse.region != agent.region:
                raise InconsistentRegionError(
                    f"spouses {agent.id}/{spouse.id} live in regions {agent.region!r}/{spouse.region!r}"
                )
    regions: dict[str, list[Agent]] = {}
    for agent in agents:
        regions.setdefault(agent.region, []).append(agent)
    return {region: regions[region] for region in sorted(regions)}


def age_difference_window(
    agents: dict[str, Agent],
    couples: list[Couple],
    percentile_band: tuple[float, float] = (0.01, 0.99),
) -> tuple[float, float]:
    """Empirical percentile window of matched couples' age differences."""
    if not couples:
        raise EmptyMarketError("cannot build consideration sets without matched couples")
    diffs = [agents[c.m_id].age - agents[c.w_id].age for c in couples]
    lo, hi = np.percentile(np.asarray(diffs, dtype=float), [100 * percentile_band[0], 100 * percentile_band[1]])
    return float(lo), float(hi)


def consideration_sets_from_window(
    agents: dict[str, Agent],
    couples: list[Couple],
    window: tuple[float, float],
) -> ConsiderationSets:
    """Cross-gender sets containing everyone inside the closed age window."""
    lo, hi = window
    spouse_of = {c.m_id: c.w_id for c in couples}
    spouse_of.update({c.w_id: c.m_id for c in couples})
    males = sorted(a for a, ag in agents.items() if ag.gender == MALE)
    females = sorted(a for a, ag in agents.items() if ag.gender == FEMALE)
    sets: dict[str, list[str]] = {a: [] for a in agents}
    for m_id in males:
        for w_id in females:
            if spouse_of.get(m_id) == w_id:
                continue
            diff = agents[m_id].age - agents[w_id].age
            if lo <= diff <= hi:
                sets[m_id].append(w_id)
                sets[w_id].append(m_id)
    return ConsiderationSets(window=(lo, hi), sets={a: tuple(sorted(v)) for a, v in sets.items()})


def build_consideration_sets(
    market: MarriageMarket,
    percentile_band: tuple[float, float] = (0.01, 0.99),
) -> ConsiderationSets:
    window = age_difference_window(dict(market.agents), list(market.couples), percentile_band)
    return consideration_sets_from_window(dict(market.agents), list(market.couples), window)


# ---------------------------------------------------------------------------
# End-to-end assembly
# ---------------------------------------------------------------------------


def _trim_outliers(
    agents: list[Agent],
    rows: list[HouseholdRow],
    band: tuple[float, float],
) -> tuple[list[Agent], list[HouseholdRow]]:
    """Drop households whose wages or non-labor income sit outside ``band``."""
    by_id = {a.id: a for a in agents}
    wages = np.array([a.wage for a in agents], dtype=float)
    w_lo, w_hi = np.percentile(wages, [100 * band[0], 100 * band[1]])
    nonlabor = []
    for row in rows:
        labor_hours_value = sum(by_id[m].wage * by_id[m].work_hours for m in row.member_ids)
        nonlabor.append(row.total_expenditure - labor_hours_value)
    nl = np.array(nonlabor, dtype=float)
    n_lo, n_hi = np.percentile(nl, [100 * band[0], 100 * band[1]])
    keep_rows = []
    dropped_members: set[str] = set()
    for row, value in zip(rows, nl):
        member_wages = [by_id[m].wage for m in row.member_ids]
        if any(w < w_lo or w > w_hi for w in member_wages) or value < n_lo or value > n_hi:
            dropped_members.update(row.member_ids)
        else:
            keep_rows.append(row)
    keep_agents = [a for a in agents if a.id not in dropped_members]
    return keep_agents, keep_rows


def ingest_markets(
    agents_path: str,
    households_path: str,
    config: IngestConfig | None = None,
) -> list[MarriageMarket]:
    """Parse the two CSVs and assemble one market per region."""
    config = config or IngestConfig()
    agents = load_agents_csv(agents_path)
    rows = load_households_csv(households_path)
    if config.trim_outliers and rows:
        agents, rows = _trim_outliers(agents, rows, config.trim_band)
    by_id = {a.id: a for a in agents}
    if len(by_id) != len(agents):
        raise InvalidInputError("duplicate agent ids")

    rows_by_member: dict[str, HouseholdRow] = {}
    for row in rows:
        for member in row.member_ids:
            if member not in by_id:
                raise InvalidInputError(f"household {row.household_id}: unknown member {member!r}")
            rows_by_member[member] = row

    markets = []
    for region, region_agents in partition_markets(agents).items():
        region_ids = {a.id for a in region_agents}
        region_rows = {}
        for agent in region_agents:
            row = rows_by_member.get(agent.id)
            if row is None:
                raise InvalidInputError(f"agent {agent.id} appears in no household")
            region_rows[row.household_id] = row

        couples = []
        seen = set()
        for agent in region_agents:
            if agent.gender != MALE or agent.spouse_id is None:
                continue
            spouse = by_id.get(agent.spouse_id)
            if spouse is None or spouse.id not in region_ids:
                raise InvalidInputError(f"agent {agent.id}: spouse {agent.spouse_id!r} missing from market")
            row = rows_by_member[agent.id]
            couples.append(
                Couple(
                    m_id=agent.id,
                    w_id=spouse.id,
                    household_id=row.household_id,
                    n_children=max(agent.n_children, spouse.n_children),
                )
            )
            seen.add(row.household_id)
        couples.sort(key=lambda c: c.m_id)

        bundles = {
            hid: build_bundle(row, by_id, config.big_decision_share) for hid, row in sorted(region_rows.items())
        }
        agents_map = {a.id: a for a in sorted(region_agents, key=lambda a: a.id)}
        grid = compute_incomes(agents_map, bundles, config.nonlabor_band)
        market = MarriageMarket(
            region=region,
            agents=agents_map,
            couples=tuple(couples),
            bundles=bundles,
            grid=grid,
        )
        consideration = build_consideration_sets(market, config.percentile_band)
        markets.append(
            MarriageMarket(
                region=region,
                agents=agents_map,
                couples=tuple(couples),
                bundles=bundles,
                grid=grid,
                consideration=consideration,
            )
        )
    return markets

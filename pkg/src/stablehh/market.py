"""Domain model for marriage markets with children.

Agents, matched couples, observed household bundles, the price/income
data attached to every counterfactual pair, and per-agent consideration
sets.  All quantities are weekly: currency/week and hours/week.  Leisure
is an assignable private good priced at the individual's wage; the
remaining private and public consumption are Hicksian aggregates with
unit prices; children's spending splits into a daily part (unit price)
and a big-decision part (price ``rho``, one per matched couple).

Everything here is immutable after construction.  Data problems are
reported by :func:`validate_market` as a list of violations rather than
raised, so callers can decide how strict to be.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import InvalidInputError

SCHEMA_VERSION = 1

#: Weekly time endowment net of sleep and personal care (168 - 56 hours).
TIME_ENDOWMENT = 112.0

#: Hours an individual can work per week, by sample rule.
WORK_HOURS_RANGE = (10.0, TIME_ENDOWMENT)

#: Adult age range covered by the sample rules.
AGE_RANGE = (25.0, 65.0)

MALE = "male"
FEMALE = "female"

#: Option key component standing in for the stay-single option.
NOBODY = "_"

OptionKey = tuple[str | None, str | None]


def option_key(m_id: str | None, w_id: str | None) -> str:
    """Stable string key for an exit option (``None`` means staying single)."""
    return f"{m_id or NOBODY}|{w_id or NOBODY}"


def parse_option_key(key: str) -> OptionKey:
    m_part, w_part = key.split("|")
    return (m_part if m_part != NOBODY else None, w_part if w_part != NOBODY else None)


@dataclass(frozen=True)
class Agent:
    """One adult individual."""

    id: str
    gender: str
    wage: float
    work_hours: float
    age: float
    region: str
    n_children: int
    spouse_id: str | None = None

    @property
    def leisure(self) -> float:
        return TIME_ENDOWMENT - self.work_hours

    @property
    def labor_income(self) -> float:
        """Potential weekly labor income at full time use."""
        return TIME_ENDOWMENT * self.wage

    @property
    def is_married(self) -> bool:
        return self.spouse_id is not None


@dataclass(frozen=True)
class Couple:
    """A matched pair together with its household and children count."""

    m_id: str
    w_id: str
    household_id: str
    n_children: int


@dataclass(frozen=True)
class HouseholdBundle:
    """Observed weekly consumption of one household (couple or single).

    ``child_daily_k`` and ``child_big_K`` are spending amounts whose sum
    equals ``child_total_C`` whenever both splits are known.  Assignable
    private consumption is optional survey information; when present it
    bounds the unknown within-couple private split.
    """

    household_id: str
    member_ids: tuple[str, ...]
    leisure_m: float | None
    leisure_w: float | None
    q_priv: float
    Q_pub: float
    child_daily_k: float | None
    child_big_K: float | None
    child_total_C: float | None
    q_priv_assign_m: float | None = None
    q_priv_assign_w: float | None = None

    @property
    def children_spending(self) -> float:
        if self.child_total_C is not None:
            return self.child_total_C
        return (self.child_daily_k or 0.0) + (self.child_big_K or 0.0)


@dataclass(frozen=True)
class ChildSupportSchedule:
    """Statutory minimum transfers from the non-custodial parent.

    ``tiers`` maps a children count to the fraction of the payer's
    potential labor income owed; the top tier applies to that count and
    above.  The default mirrors a 25% / 33% / 50% tiered rule.
    """

    tiers: tuple[tuple[int, float], ...] = ((1, 0.25), (2, 0.33), (3, 0.50))

    def rate(self, n_children: int) -> float:
        if n_children <= 0:
            return 0.0
        applicable = 0.0
        for count, fraction in self.tiers:
            if n_children >= count:
                applicable = fraction
        return applicable

    def transfer(self, wage: float, n_children: int) -> float:
        """Minimum weekly transfer given the payer's wage."""
        return self.rate(n_children) * TIME_ENDOWMENT * wage


ZERO_SCHEDULE = ChildSupportSchedule(tiers=((1, 0.0),))


@dataclass(frozen=True)
class PriceIncomeGrid:
    """Prices and incomes for every pair an agent might form.

    Private prices are the two wages plus a unit Hicksian price; the
    public price is one; ``rho`` holds the big-decision children price
    per matched couple.  Exit-option incomes either derive from wages
    plus non-labor income shares, or are pinned explicitly (synthetic
    markets).  ``income_scale`` multiplies exit-option incomes; income
    adjustment composes scales into this map.
    """

    nonlabor_household: Mapping[str, float]
    rho: Mapping[str, float] = field(default_factory=dict)
    public_price: float = 1.0
    explicit_income: Mapping[str, float] = field(default_factory=dict)
    income_scale: Mapping[str, float] = field(default_factory=dict)
    nonlabor_band: tuple[float, float] = (0.4, 0.6)

    def rho_of(self, household_id: str) -> float:
        return self.rho.get(household_id, 1.0)

    def scale_of(self, key: str) -> float:
        return self.income_scale.get(key, 1.0)


@dataclass(frozen=True)
class ConsiderationSets:
    """Admissible outside-option partners per agent.

    The stay-single option is always implicitly included.  ``window`` is
    the admissible male-minus-female age difference; ``sets`` lists the
    opposite-gender agents inside the window, excluding the own spouse.
    """

    window: tuple[float, float]
    sets: Mapping[str, tuple[str, ...]]

    def considers(self, agent_id: str, other_id: str) -> bool:
        return other_id in self.sets.get(agent_id, ())


@dataclass(frozen=True)
class Violation:
    """One validation finding; violations are data, not exceptions."""

    kind: str
    subject: tuple[str, ...]
    message: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.kind}{self.subject}: {self.message}"


@dataclass(frozen=True)
class MarriageMarket:
    """One marriage market: the unit over which stability is evaluated."""

    region: str
    agents: Mapping[str, Agent]
    couples: tuple[Couple, ...]
    bundles: Mapping[str, HouseholdBundle]
    grid: PriceIncomeGrid
    consideration: ConsiderationSets | None = None

    # -- topology helpers -------------------------------------------------

    def agent(self, agent_id: str) -> Agent:
        return self.agents[agent_id]

    def couple_of(self, agent_id: str) -> Couple | None:
        for couple in self.couples:
            if agent_id in (couple.m_id, couple.w_id):
                return couple
        return None

    @property
    def single_ids(self) -> tuple[str, ...]:
        married = {c.m_id for c in self.couples} | {c.w_id for c in self.couples}
        return tuple(a for a in self.agents if a not in married)

    def household_of(self, agent_id: str) -> str:
        couple = self.couple_of(agent_id)
        if couple is not None:
            return couple.household_id
        for hid, bundle in self.bundles.items():
            if agent_id in bundle.member_ids:
                return hid
        raise InvalidInputError(f"agent {agent_id} has no household")

    def bundle_of(self, agent_id: str) -> HouseholdBundle:
        return self.bundles[self.household_of(agent_id)]

    def males(self) -> tuple[str, ...]:
        return tuple(a for a, ag in self.agents.items() if ag.gender == MALE)

    def females(self) -> tuple[str, ...]:
        return tuple(a for a, ag in self.agents.items() if ag.gender == FEMALE)

    # -- income helpers ----------------------------------------------------

    def household_full_income(self, household_id: str) -> float:
        """Potential labor income of the members plus household non-labor income."""
        bundle = self.bundles[household_id]
        labor = sum(self.agents[a].labor_income for a in bundle.member_ids)
        return labor + self.grid.nonlabor_household[household_id]

    def single_nonlabor(self, agent_id: str) -> float:
        return self.grid.nonlabor_household[self.household_of(agent_id)]

    def option_income_pinned(self, m_id: str | None, w_id: str | None) -> float:
        """Exit-option income with married members' non-labor shares pinned 50/50.

        Explicit incomes, when present for the option, win.  The returned
        value excludes the adjustment scale; see
        :meth:`PriceIncomeGrid.scale_of`.
        """
        key = option_key(m_id, w_id)
        if key in self.grid.explicit_income:
            return self.grid.explicit_income[key]
        total = 0.0
        for agent_id in (m_id, w_id):
            if agent_id is None:
                continue
            agent = self.agents[agent_id]
            total += agent.labor_income
            couple = self.couple_of(agent_id)
            if couple is None:
                total += self.single_nonlabor(agent_id)
            else:
                total += 0.5 * self.grid.nonlabor_household[couple.household_id]
        return total


def full_spending(market: MarriageMarket, household_id: str) -> float:
    """Wage-valued leisure plus all market spending of a household."""
    bundle = market.bundles[household_id]
    total = bundle.q_priv + bundle.Q_pub + bundle.children_spending
    for agent_id in bundle.member_ids:
        agent = market.agents[agent_id]
        total += agent.wage * agent.leisure
    return total


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_IDENTITY_TOL = 1e-6


def validate_market(market: MarriageMarket) -> list[Violation]:
    """Check matching symmetry, sample rules, bundle identities, and sets.

    Returns an empty list iff the market is internally consistent.
    """
    problems: list[Violation] = []

    def bad(kind: str, subject: tuple[str, ...], message: str) -> None:
        problems.append(Violation(kind, subject, message))

    # agent-level sample rules
    for agent_id, agent in market.agents.items():
        if not agent_id or any(ch in agent_id for ch in "|;,"):
            bad("BadAgentId", (agent_id,), "ids may not be empty or contain '|', ';', or ','")
        if agent.gender not in (MALE, FEMALE):
            bad("UnknownGender", (agent_id,), f"gender {agent.gender!r}")
        if agent.wage < 0:
            bad("NegativeWage", (agent_id,), f"wage {agent.wage}")
        lo, hi = WORK_HOURS_RANGE
        if not lo <= agent.work_hours <= hi:
            bad("WorkHoursOutOfRange", (agent_id,), f"work_hours {agent.work_hours}")
        lo, hi = AGE_RANGE
        if not lo <= agent.age <= hi:
            bad("AgeOutOfRange", (agent_id,), f"age {agent.age}")
        if agent.n_children < 0:
            bad("NegativeChildren", (agent_id,), f"n_children {agent.n_children}")
        if agent.region != market.region:
            bad("InconsistentRegion", (agent_id,), f"region {agent.region!r} in market {market.region!r}")

    # matching symmetry: spouse links must be a cross-gender bijection
    for couple in market.couples:
        m = market.agents.get(couple.m_id)
        w = market.agents.get(couple.w_id)
        if m is None or w is None:
            bad("UnknownAgent", (couple.m_id, couple.w_id), "couple references unknown agent")
            continue
        if m.gender != MALE or w.gender != FEMALE:
            bad("MatchingAsymmetry", (couple.m_id, couple.w_id), "couple genders are not male/female")
        if m.spouse_id != couple.w_id or w.spouse_id != couple.m_id:
            bad(
                "MatchingAsymmetry",
                (couple.m_id, couple.w_id),
                f"spouse links {m.spouse_id!r}/{w.spouse_id!r} do not close",
            )
        if m.n_children != w.n_children:
            bad("ChildCountMismatch", (couple.m_id, couple.w_id), "spouses report different children counts")
        if couple.household_id not in market.bundles:
            bad("MissingBundle", (couple.household_id,), "couple household has no bundle")
    for agent_id in market.single_ids:
        agent = market.agents[agent_id]
        if agent.spouse_id is not None:
            bad("MatchingAsymmetry", (agent_id,), "agent outside couples yet carries a spouse link")

    # bundle invariants
    for hid, bundle in market.bundles.items():
        for name, value in (
            ("q_priv", bundle.q_priv),
            ("Q_pub", bundle.Q_pub),
            ("child_daily_k", bundle.child_daily_k),
            ("child_big_K", bundle.child_big_K),
            ("child_total_C", bundle.child_total_C),
            ("leisure_m", bundle.leisure_m),
            ("leisure_w", bundle.leisure_w),
            ("q_priv_assign_m", bundle.q_priv_assign_m),
            ("q_priv_assign_w", bundle.q_priv_assign_w),
        ):
            if value is not None and value < 0:
                bad("NegativeQuantity", (hid, name), f"{name} = {value}")
        if bundle.child_daily_k is not None and bundle.child_big_K is not None and bundle.child_total_C is not None:
            split_sum = bundle.child_daily_k + bundle.child_big_K
            if abs(split_sum - bundle.child_total_C) > _IDENTITY_TOL * max(1.0, bundle.child_total_C):
                bad(
                    "ChildSplitMismatch",
                    (hid,),
                    f"k + K = {split_sum} but C = {bundle.child_total_C}",
                )
        assign = (bundle.q_priv_assign_m or 0.0) + (bundle.q_priv_assign_w or 0.0)
        if assign > bundle.q_priv + _IDENTITY_TOL * max(1.0, bundle.q_priv):
            bad("AssignableExceedsPrivate", (hid,), f"assignable {assign} exceeds q_priv {bundle.q_priv}")
        # leisure recorded in the bundle must match the members' work hours
        for agent_id in bundle.member_ids:
            agent = market.agents.get(agent_id)
            if agent is None:
                bad("UnknownAgent", (hid, agent_id), "bundle references unknown agent")
                continue
            recorded = bundle.leisure_m if agent.gender == MALE else bundle.leisure_w
            if recorded is None or abs(recorded - agent.leisure) > 1e-9:
                bad("LeisureMismatch", (hid, agent_id), f"recorded {recorded} vs {agent.leisure}")
        # full-income accounting: full spending equals labor potential + non-labor
        try:
            income = market.household_full_income(hid)
            spending = full_spending(market, hid)
        except KeyError:
            bad("MissingIncome", (hid,), "household lacks a non-labor income entry")
        else:
            if abs(income - spending) > _IDENTITY_TOL * max(1.0, abs(income)):
                bad("FullIncomeMismatch", (hid,), f"full income {income} vs full spending {spending}")

    # consideration sets
    if market.consideration is not None:
        sets = market.consideration.sets
        for agent_id, others in sets.items():
            agent = market.agents.get(agent_id)
            if agent is None:
                bad("UnknownAgent", (agent_id,), "consideration set for unknown agent")
                continue
            if agent.spouse_id is not None and agent.spouse_id in others:
                bad("SpouseInConsiderationSet", (agent_id,), "own spouse listed as blocking-pair option")
            for other_id in others:
                other = market.agents.get(other_id)
                if other is None:
                    bad("UnknownAgent", (agent_id, other_id), "consideration set references unknown agent")
                elif other.gender == agent.gender:
                    bad("SameGenderConsideration", (agent_id, other_id), "consideration set is not cross-gender")
                elif agent_id not in sets.get(other_id, ()):
                    bad("AsymmetricConsiderationSet", (agent_id, other_id), "consideration is not mutual")

    return problems


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _agent_to_dict(agent: Agent) -> dict:
    return {
        "id": agent.id,
        "gender": agent.gender,
        "wage": agent.wage,
        "work_hours": agent.work_hours,
        "age": agent.age,
        "region": agent.region,
        "n_children": agent.n_children,
        "spouse_id": agent.spouse_id or "",
    }


def _agent_from_dict(data: dict) -> Agent:
    return Agent(
        id=str(data["id"]),
        gender=str(data["gender"]),
        wage=float(data["wage"]),
        work_hours=float(data["work_hours"]),
        age=float(data["age"]),
        region=str(data["region"]),
        n_children=int(data["n_children"]),
        spouse_id=(str(data["spouse_id"]) or None) if data.get("spouse_id") else None,
    )


def _bundle_to_dict(bundle: HouseholdBundle) -> dict:
    return {
        "household_id": bundle.household_id,
        "member_ids": ";".join(bundle.member_ids),
        "leisure_m": bundle.leisure_m,
        "leisure_w": bundle.leisure_w,
        "q_priv": bundle.q_priv,
        "Q_pub": bundle.Q_pub,
        "child_daily_k": bundle.child_daily_k,
        "child_big_K": bundle.child_big_K,
        "child_total_C": bundle.child_total_C,
        "q_priv_assign_m": bundle.q_priv_assign_m,
        "q_priv_assign_w": bundle.q_priv_assign_w,
    }


def _bundle_from_dict(data: dict) -> HouseholdBundle:
    def opt(name: str) -> float | None:
        value = data.get(name)
        return None if value is None or value == "" else float(value)

    return HouseholdBundle(
        household_id=str(data["household_id"]),
        member_ids=tuple(str(data["member_ids"]).split(";")),
        leisure_m=opt("leisure_m"),
        leisure_w=opt("leisure_w"),
        q_priv=float(data["q_priv"]),
        Q_pub=float(data["Q_pub"]),
        child_daily_k=opt("child_daily_k"),
        child_big_K=opt("child_big_K"),
        child_total_C=opt("child_total_C"),
        q_priv_assign_m=opt("q_priv_assign_m"),
        q_priv_assign_w=opt("q_priv_assign_w"),
    )


def market_to_dict(market: MarriageMarket) -> dict:
    doc = {
        "region": market.region,
        "agents": [_agent_to_dict(market.agents[a]) for a in sorted(market.agents)],
        "couples": [
            {
                "m_id": c.m_id,
                "w_id": c.w_id,
                "household_id": c.household_id,
                "n_children": c.n_children,
            }
            for c in market.couples
        ],
        "households": [_bundle_to_dict(market.bundles[h]) for h in sorted(market.bundles)],
        "incomes": {
            "nonlabor_household": {h: market.grid.nonlabor_household[h] for h in sorted(market.grid.nonlabor_household)},
            "rho": {h: market.grid.rho[h] for h in sorted(market.grid.rho)},
            "public_price": market.grid.public_price,
            "explicit_income": {k: market.grid.explicit_income[k] for k in sorted(market.grid.explicit_income)},
            "income_scale": {k: market.grid.income_scale[k] for k in sorted(market.grid.income_scale)},
            "nonlabor_band": list(market.grid.nonlabor_band),
        },
    }
    if market.consideration is not None:
        doc["consideration"] = {
            "window": list(market.consideration.window),
            "sets": {a: list(market.consideration.sets[a]) for a in sorted(market.consideration.sets)},
        }
    return doc


def market_from_dict(doc: dict) -> MarriageMarket:
    agents = {a["id"]: _agent_from_dict(a) for a in doc["agents"]}
    couples = tuple(
        Couple(
            m_id=str(c["m_id"]),
            w_id=str(c["w_id"]),
            household_id=str(c["household_id"]),
            n_children=int(c["n_children"]),
        )
        for c in doc["couples"]
    )
    bundles = {b["household_id"]: _bundle_from_dict(b) for b in doc["households"]}
    incomes = doc["incomes"]
    grid = PriceIncomeGrid(
        nonlabor_household={str(k): float(v) for k, v in incomes["nonlabor_household"].items()},
        rho={str(k): float(v) for k, v in incomes.get("rho", {}).items()},
        public_price=float(incomes.get("public_price", 1.0)),
        explicit_income={str(k): float(v) for k, v in incomes.get("explicit_income", {}).items()},
        income_scale={str(k): float(v) for k, v in incomes.get("income_scale", {}).items()},
        nonlabor_band=tuple(incomes.get("nonlabor_band", (0.4, 0.6))),  # type: ignore[arg-type]
    )
    consideration = None
    if "consideration" in doc:
        consideration = ConsiderationSets(
            window=tuple(doc["consideration"]["window"]),  # type: ignore[arg-type]
            sets={str(k): tuple(str(x) for x in v) for k, v in doc["consideration"]["sets"].items()},
        )
    return MarriageMarket(
        region=str(doc["region"]),
        agents=agents,
        couples=couples,
        bundles=bundles,
        grid=grid,
        consideration=consideration,
    )


def dump_markets(markets: Iterable[MarriageMarket]) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "markets": [market_to_dict(m) for m in markets],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_markets(text: str) -> list[MarriageMarket]:
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported market schema version {version!r}")
    return [market_from_dict(m) for m in doc["markets"]]


def save_markets(path: str, markets: Iterable[MarriageMarket]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_markets(markets))


def read_markets(path: str) -> list[MarriageMarket]:
    with open(path, "r", encoding="utf-8") as handle:
        return load_markets(handle.read())


def with_income_scale(market: MarriageMarket, scale: Mapping[str, float]) -> MarriageMarket:
    """Return a copy of the market whose exit-option incomes carry ``scale``."""
    grid = replace(market.grid, income_scale=dict(scale))
    return replace(market, grid=grid)


def with_consideration(market: MarriageMarket, consideration: ConsiderationSets) -> MarriageMarket:
    return replace(market, consideration=consideration)


def scaled_explicit_income(market: MarriageMarket, key: str, factor: float) -> MarriageMarket:
    """Return a copy with one explicit exit-option income multiplied by ``factor``."""
    if factor <= 0 or not math.isfinite(factor):
        raise InvalidInputError(f"income factor must be positive and finite, got {factor}")
    explicit = dict(market.grid.explicit_income)
    if key not in explicit:
        raise InvalidInputError(f"unknown exit option {key!r}")
    explicit[key] = explicit[key] * factor
    return replace(market, grid=replace(market.grid, explicit_income=explicit))

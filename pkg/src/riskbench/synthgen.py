"""Deterministic, seeded generator of labeled synthetic gambling datasets.

Players carry a latent risk level in [0, 1]. The latent value drives both the
self-report score used for labels and a set of behavioral markers (loss
chasing, deposit frequency, declined deposits, stake escalation) whose
strength is scaled by ``signal_strength``; at 0 the markers carry no signal
and every detector should collapse to chance. This two-stage design gives the
whole pipeline a known ground truth to validate against.

Determinism contract: output is a pure function of the config. Every player
draws from an independent substream keyed by (seed, player index), so growing
``n_players`` from N to N+1 leaves the first N players' events untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Optional

import numpy as np

from . import GENERATOR_VERSION
from .canonical import DATA_DICTIONARY, EventKind, EventRecord, TransactionStatus, Vertical
from .registry import DatasetCard
from .util import canonical_json, sha256_bytes

ENGAGEMENT_TIERS = ("NEW", "CASUAL", "REGULAR")
LABEL_SOURCES = ("PGSI", "VSE")

PGSI_MAX = 27  # instrument ceiling; domain knowledge, not configurable
PGSI_NOISE_SPAN = 8.0  # +-4 points of uniform label noise around the latent line

MAX_PLAYERS = 10**6

# Engagement tiers: (eligible-day rule handled in code, active-day prob,
# mean sessions per active day).
TIER_ACTIVE_DAY_P = {"NEW": 0.9, "CASUAL": 0.3, "REGULAR": 0.8}
TIER_SESSIONS_PER_ACTIVE_DAY = {"NEW": 1.0, "CASUAL": 1.2, "REGULAR": 4.2}
NEW_TIER_WINDOW_DAYS = 7
REGULAR_WEEK_COVERAGE = 0.6  # guaranteed fraction of horizon weeks with activity
REGULAR_EXTRA_WEEK_P = 0.5

MEAN_BETS_PER_SESSION = 6.0
STAKE_LOG_MEAN = math.log(1500.0)  # cents
STAKE_LOG_SIGMA = 0.8
STAKE_MIN, STAKE_MAX = 100, 200_000
BET_SECONDS_RANGE = (40.0, 140.0)

# Risk-modulated markers: parameter = base + gain * latent * signal_strength.
CHASE_P_BASE, CHASE_P_GAIN, CHASE_P_CAP = 0.10, 0.55, 0.90
DECLINE_P_BASE, DECLINE_P_GAIN, DECLINE_P_CAP = 0.05, 0.45, 0.90
DEPOSIT_RATE_BASE, DEPOSIT_RATE_GAIN = 0.6, 1.0  # per active day
WITHIN_SESSION_CHASE_MULT = 1.35
CROSS_SESSION_CHASE_MULT = 1.6
CHASE_STAKE_CAP_MULT = 10.0

WITHDRAWAL_RATE = 0.05  # per active day
WITHDRAWAL_DECLINE_P = 0.03
DEPOSIT_LOG_MEAN, DEPOSIT_LOG_SIGMA = math.log(5000.0), 0.7
WITHDRAWAL_LOG_MEAN, WITHDRAWAL_LOG_SIGMA = math.log(8000.0), 0.9
AMOUNT_MIN, AMOUNT_MAX = 100, 10**7

PAYMENT_METHODS = ["card", "paypal", "bank", "voucher"]
PAYMENT_METHOD_P = [0.55, 0.20, 0.20, 0.05]

# Per-vertical win probability; payout multiplier is rtp / win_p.
VERTICAL_WIN_P = {"LOTTERY": 0.08, "CASINO": 0.475, "SPORTS": 0.5}
VERTICAL_PRODUCTS = {
    "LOTTERY": ["draw", "instant"],
    "CASINO": ["slots", "blackjack", "roulette", "live_dealer"],
    "SPORTS": ["fixed_odds", "parlay", "prop"],
}

DEFAULT_ECONOMICS = {"LOTTERY": 0.65, "CASINO": 0.95, "SPORTS": 0.93}


class InfeasibleConfig(Exception):
    """The requested configuration cannot produce a valid dataset."""


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + 1e-9))


@dataclass(frozen=True)
class CardMeta:
    """Card fields the generator cannot derive from behavior: identity,
    authorship, and the task list the dataset is published with."""

    name: str = ""
    description: str = ""
    creator: str = "riskbench synthetic generator"
    citation: str = ""
    version: str = "v1"
    date: str = ""  # card timestamp (UTC date); derived from base_date if empty
    tasks: tuple = ()  # ((task_id, goal), ...)

    @classmethod
    def from_dict(cls, doc: dict) -> "CardMeta":
        return cls(
            name=doc.get("name", ""),
            description=doc.get("description", ""),
            creator=doc.get("creator", "riskbench synthetic generator"),
            citation=doc.get("citation", ""),
            version=doc.get("version", "v1"),
            date=doc.get("date", ""),
            tasks=tuple((str(t), str(g)) for t, g in doc.get("tasks", [])),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "creator": self.creator,
            "citation": self.citation,
            "version": self.version,
            "date": self.date,
            "tasks": [list(t) for t in self.tasks],
        }


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int
    n_players: int
    time_horizon_days: int
    engagement_mix: dict
    vertical_mix: dict
    cohorts: tuple  # ((tag, proportion), ...)
    prevalence: float
    signal_strength: float
    economics: dict = field(default_factory=lambda: dict(DEFAULT_ECONOMICS))
    label_source: str = "PGSI"
    pgsi_threshold: int = 5
    base_date: str = "2025-01-01"
    card_meta: CardMeta = field(default_factory=CardMeta)

    def validate(self) -> None:
        if not (0 <= self.seed < 2**64):
            raise InfeasibleConfig("seed must be a 64-bit unsigned integer")
        if not (1 <= self.n_players <= MAX_PLAYERS):
            raise InfeasibleConfig(f"n_players must be in 1..{MAX_PLAYERS}")
        if self.time_horizon_days < 1:
            raise InfeasibleConfig("time_horizon_days must be >= 1")
        for name, mix, keys in (
            ("engagement_mix", self.engagement_mix, ENGAGEMENT_TIERS),
            ("vertical_mix", self.vertical_mix, tuple(v.value for v in Vertical)),
        ):
            if set(mix) - set(keys):
                raise InfeasibleConfig(f"{name} has unknown keys {sorted(set(mix) - set(keys))}")
            if any(p < 0 for p in mix.values()):
                raise InfeasibleConfig(f"{name} has negative proportions")
            if abs(sum(mix.values()) - 1.0) > 1e-9:
                raise InfeasibleConfig(f"{name} must sum to 1")
        if not self.cohorts:
            raise InfeasibleConfig("at least one cohort is required")
        if any(p < 0 for _, p in self.cohorts):
            raise InfeasibleConfig("cohorts have negative proportions")
        if abs(sum(p for _, p in self.cohorts) - 1.0) > 1e-9:
            raise InfeasibleConfig("cohort proportions must sum to 1")
        if not (0.0 <= self.prevalence <= 1.0):
            raise InfeasibleConfig("prevalence must be in [0, 1]")
        if self.prevalence > 0 and round_half_up(self.prevalence * self.n_players) < 1:
            raise InfeasibleConfig("prevalence * n_players must be >= 1 when prevalence > 0")
        if self.signal_strength < 0:
            raise InfeasibleConfig("signal_strength must be >= 0")
        for v in Vertical:
            rtp = self.economics.get(v.value)
            if rtp is None or not (0 < rtp <= 1):
                raise InfeasibleConfig(f"economics[{v.value}] must be a return-to-player in (0, 1]")
        if self.label_source not in LABEL_SOURCES:
            raise InfeasibleConfig(f"label_source must be one of {LABEL_SOURCES}")
        if not (1 <= self.pgsi_threshold <= PGSI_MAX):
            raise InfeasibleConfig(f"pgsi_threshold must be in 1..{PGSI_MAX}")
        try:
            _base_datetime(self.base_date)
        except ValueError:
            raise InfeasibleConfig("base_date must be YYYY-MM-DD")

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticConfig":
        return cls(
            seed=int(doc["seed"]),
            n_players=int(doc["n_players"]),
            time_horizon_days=int(doc["time_horizon_days"]),
            engagement_mix={str(k): float(v) for k, v in doc["engagement_mix"].items()},
            vertical_mix={str(k): float(v) for k, v in doc["vertical_mix"].items()},
            cohorts=tuple((str(t), float(p)) for t, p in doc["cohorts"]),
            prevalence=float(doc["prevalence"]),
            signal_strength=float(doc["signal_strength"]),
            economics={str(k): float(v) for k, v in doc.get("economics", DEFAULT_ECONOMICS).items()},
            label_source=doc.get("label_source", "PGSI"),
            pgsi_threshold=int(doc.get("pgsi_threshold", 5)),
            base_date=doc.get("base_date", "2025-01-01"),
            card_meta=CardMeta.from_dict(doc.get("card_meta", {})),
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_players": self.n_players,
            "time_horizon_days": self.time_horizon_days,
            "engagement_mix": dict(self.engagement_mix),
            "vertical_mix": dict(self.vertical_mix),
            "cohorts": [list(c) for c in self.cohorts],
            "prevalence": self.prevalence,
            "signal_strength": self.signal_strength,
            "economics": dict(self.economics),
            "label_source": self.label_source,
            "pgsi_threshold": self.pgsi_threshold,
            "base_date": self.base_date,
            "card_meta": self.card_meta.to_dict(),
        }

    def content_hash(self) -> str:
        return sha256_bytes(canonical_json(self.to_dict()).encode("utf-8"))


@dataclass(frozen=True)
class PlayerLabel:
    player_id: str
    pgsi_score: Optional[int]
    vse_flag: Optional[int]
    risk_flag: int
    label_source: str
    cohort: str


@dataclass(frozen=True)
class PlayerProfile:
    player_id: str
    engagement: str
    vertical: str
    cohort: str


@dataclass
class GenerationResult:
    events: list  # list[EventRecord], sorted by (player_id, start_time)
    labels: list  # list[PlayerLabel], sorted by player_id
    card: DatasetCard
    manifest: dict


def _base_datetime(date_str: str) -> datetime:
    return datetime.strptime(date_str, "%Y-%m-%d").replace(tzinfo=timezone.utc)


def marker_params(latent: float, signal_strength: float) -> dict:
    """Behavioral marker parameters for one player. Pure: at signal 0 the
    latent value has no effect, which is what makes the null benchmark null."""
    lift = latent * signal_strength
    return {
        "chase_p": min(CHASE_P_CAP, CHASE_P_BASE + CHASE_P_GAIN * lift),
        "decline_p": min(DECLINE_P_CAP, DECLINE_P_BASE + DECLINE_P_GAIN * lift),
        "deposit_rate": DEPOSIT_RATE_BASE * (1.0 + DEPOSIT_RATE_GAIN * lift),
    }


def pgsi_from_latent(latent: float, noise_draw: float) -> int:
    """Screening score 0..27 from latent risk; noise_draw is a uniform [0,1)
    variate and 0.5 means zero noise."""
    if not (0.0 <= latent <= 1.0):
        raise ValueError("latent must be in [0, 1]")
    raw = PGSI_MAX * latent + PGSI_NOISE_SPAN * (noise_draw - 0.5)
    return int(min(PGSI_MAX, max(0, round_half_up(raw))))


def player_rng(seed: int, player_index: int) -> np.random.Generator:
    """Independent substream for one player; the (seed, index) key is the
    whole determinism story."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, player_index)))


def _choice(rng: np.random.Generator, items: list, probs: list) -> str:
    u = rng.random()
    acc = 0.0
    for item, p in zip(items, probs):
        acc += p
        if u < acc:
            return item
    return items[-1]


def _active_days(rng: np.random.Generator, tier: str, horizon_days: int) -> list:
    """Days (0-based offsets) on which the player gambles, per tier rules."""
    if tier == "NEW":
        eligible = range(min(NEW_TIER_WINDOW_DAYS, horizon_days))
        p = TIER_ACTIVE_DAY_P["NEW"]
        days = [d for d in eligible if rng.random() < p]
        return days
    if tier == "CASUAL":
        p = TIER_ACTIVE_DAY_P["CASUAL"]
        return [d for d in range(horizon_days) if rng.random() < p]
    # REGULAR: at least REGULAR_WEEK_COVERAGE of horizon weeks see activity.
    # Forced weeks always end up with >=1 active day; combined with the
    # at-least-one-session rule for REGULAR days this makes the coverage
    # guarantee structural rather than probabilistic.
    n_weeks = (horizon_days + 6) // 7
    forced_count = math.ceil(REGULAR_WEEK_COVERAGE * n_weeks)
    order = rng.permutation(n_weeks)
    forced = set(int(w) for w in order[:forced_count])
    active_weeks = set(forced)
    for w in order[forced_count:]:
        if rng.random() < REGULAR_EXTRA_WEEK_P:
            active_weeks.add(int(w))
    p = TIER_ACTIVE_DAY_P["REGULAR"]
    days = []
    for week in sorted(active_weeks):
        week_days = [d for d in range(week * 7, min((week + 1) * 7, horizon_days))]
        chosen = [d for d in week_days if rng.random() < p]
        if not chosen and week_days and week in forced:
            chosen = [int(rng.integers(week_days[0], week_days[-1] + 1))]
        days.extend(chosen)
    return days


def _session(rng, player, day_second, base_stake, session_mult, params, vertical, rtp, cohort, base_dt):
    win_p = VERTICAL_WIN_P[vertical]
    payout_mult = rtp / win_p
    n_bets = 1 + int(rng.poisson(MEAN_BETS_PER_SESSION - 1.0))
    wins = rng.random(n_bets) < win_p
    chase_draws = rng.random(n_bets)
    jitters = np.exp(rng.normal(0.0, 0.3, size=n_bets))

    stake = base_stake * session_mult
    cap = base_stake * CHASE_STAKE_CAP_MULT
    total_staked = 0
    net = 0
    escalated = False
    for b in range(n_bets):
        bet_stake = int(max(STAKE_MIN, min(cap, stake * jitters[b])))
        total_staked += bet_stake
        if wins[b]:
            net += int(round(bet_stake * payout_mult)) - bet_stake
        else:
            net -= bet_stake
            if chase_draws[b] < params["chase_p"]:
                new_stake = min(cap, stake * WITHIN_SESSION_CHASE_MULT)
                escalated = escalated or new_stake > stake
                stake = new_stake
    start = base_dt + timedelta(seconds=day_second)
    duration = int(n_bets * rng.uniform(*BET_SECONDS_RANGE))
    record = EventRecord(
        player_id=player,
        event_kind=EventKind.SESSION,
        start_time=start,
        end_time=start + timedelta(seconds=duration),
        bet_count=n_bets,
        total_staked=total_staked,
        net_outcome=net,
        product=_choice(rng, VERTICAL_PRODUCTS[vertical], [1 / len(VERTICAL_PRODUCTS[vertical])] * len(VERTICAL_PRODUCTS[vertical])),
        vertical=Vertical(vertical),
        cohort=cohort,
    )
    return record, net, escalated


def simulate_player_events(
    latent: float,
    profile: PlayerProfile,
    horizon_days: int,
    rng: np.random.Generator,
    signal_strength: float = 0.0,
    economics: Optional[dict] = None,
    base_date: str = "2025-01-01",
) -> list:
    """Simulate one player's sessions and payment events over the horizon.

    Draw order is fixed, so identical inputs give identical event lists.
    Always returns at least one event inside the horizon.
    """
    economics = economics or DEFAULT_ECONOMICS
    params = marker_params(latent, signal_strength)
    base_dt = _base_datetime(base_date)
    rtp = economics[profile.vertical]

    base_stake = int(np.clip(np.exp(rng.normal(STAKE_LOG_MEAN, STAKE_LOG_SIGMA)), STAKE_MIN, STAKE_MAX))
    days = _active_days(rng, profile.engagement, horizon_days)

    events: list = []
    last_net = 0
    chase_next = False
    for day in days:
        rate = TIER_SESSIONS_PER_ACTIVE_DAY[profile.engagement]
        if profile.engagement == "REGULAR":
            # An active REGULAR day always holds a session, which upgrades the
            # week-coverage guarantee from near-certain to certain.
            n_sessions = 1 + int(rng.poisson(rate - 1.0))
        else:
            n_sessions = int(rng.poisson(rate))
        session_seconds = sorted(int(s) for s in rng.integers(0, 86_400, size=n_sessions))
        for sec in session_seconds:
            session_mult = CROSS_SESSION_CHASE_MULT if chase_next else 1.0
            record, net, _ = _session(
                rng, profile.player_id, day * 86_400 + sec, base_stake, session_mult,
                params, profile.vertical, rtp, profile.cohort, base_dt,
            )
            events.append(record)
            last_net = net
            chase_next = last_net < 0 and rng.random() < params["chase_p"]

        n_deposits = int(rng.poisson(params["deposit_rate"]))
        for sec in sorted(int(s) for s in rng.integers(0, 86_400, size=n_deposits)):
            amount = int(np.clip(np.exp(rng.normal(DEPOSIT_LOG_MEAN, DEPOSIT_LOG_SIGMA)), AMOUNT_MIN, AMOUNT_MAX))
            declined = rng.random() < params["decline_p"]
            events.append(EventRecord(
                player_id=profile.player_id,
                event_kind=EventKind.DEPOSIT,
                start_time=base_dt + timedelta(seconds=day * 86_400 + sec),
                transaction_amount=amount,
                transaction_method=_choice(rng, PAYMENT_METHODS, PAYMENT_METHOD_P),
                transaction_status=TransactionStatus.DECLINED if declined else TransactionStatus.APPROVED,
                cohort=profile.cohort,
            ))

        n_withdrawals = int(rng.poisson(WITHDRAWAL_RATE))
        for sec in sorted(int(s) for s in rng.integers(0, 86_400, size=n_withdrawals)):
            amount = int(np.clip(np.exp(rng.normal(WITHDRAWAL_LOG_MEAN, WITHDRAWAL_LOG_SIGMA)), AMOUNT_MIN, AMOUNT_MAX))
            declined = rng.random() < WITHDRAWAL_DECLINE_P
            events.append(EventRecord(
                player_id=profile.player_id,
                event_kind=EventKind.WITHDRAWAL,
                start_time=base_dt + timedelta(seconds=day * 86_400 + sec),
                transaction_amount=amount,
                transaction_method=_choice(rng, PAYMENT_METHODS, PAYMENT_METHOD_P),
                transaction_status=TransactionStatus.DECLINED if declined else TransactionStatus.APPROVED,
                cohort=profile.cohort,
            ))

    if not events:
        # Tier windows plus Poisson draws can leave a player silent; the
        # dataset contract requires at least one event per player.
        if profile.engagement == "NEW":
            day = int(rng.integers(0, min(NEW_TIER_WINDOW_DAYS, horizon_days)))
        else:
            day = int(rng.integers(0, horizon_days))
        sec = int(rng.integers(0, 86_400))
        record, _, _ = _session(
            rng, profile.player_id, day * 86_400 + sec, base_stake, 1.0,
            params, profile.vertical, rtp, profile.cohort, base_dt,
        )
        events.append(record)

    events.sort(key=lambda e: (e.start_time, e.event_kind.value))
    return events


def _describe_mix(mix: dict, names: tuple) -> str:
    present = [(k, p) for k in names for p in [mix.get(k, 0.0)] if p > 0]
    if len(present) == 1:
        return present[0][0].capitalize()
    parts = ", ".join(f"{k} {p:.0%}" for k, p in present)
    return f"Mixed ({parts})"


def _draft_card(config: SyntheticConfig, n_events: int, flagged: int) -> DatasetCard:
    meta = config.card_meta
    name = meta.name or f"synthetic-{config.content_hash()[:8]}"
    horizon = config.time_horizon_days
    end_date = (_base_datetime(config.base_date) + timedelta(days=horizon)).strftime("%Y-%m-%d")
    if config.label_source == "PGSI":
        rule = f"pgsi_score >= {config.pgsi_threshold}"
        definition = (
            f"Binary flag (0 or 1) marking at-risk status at the end of the horizon, "
            f"defined by a screening score of {config.pgsi_threshold}+."
        )
    else:
        rule = "vse_flag = 1"
        definition = "Binary flag (0 or 1): the player voluntarily self-excluded within the horizon."
    description = meta.description or (
        f"Synthetic dataset of {n_events} event rows from {config.n_players} unique players "
        f"over {horizon} days; {flagged} players carry the at-risk flag."
    )
    citation = meta.citation or f"{meta.creator} ({end_date[:4]}). {name}. urn:riskbench:{name}:{meta.version}"
    return DatasetCard(
        dataset_name=name,
        description=description,
        dimensions={
            "time_horizon": {"text": f"{horizon} days", "days": horizon},
            "engagement_level": _describe_mix(config.engagement_mix, ENGAGEMENT_TIERS),
            "vertical": _describe_mix(config.vertical_mix, tuple(v.value for v in Vertical)),
        },
        benchmark_tasks=[{"task_id": t, "goal": g} for t, g in meta.tasks],
        target_variable={"name": "risk_flag", "definition": definition, "threshold_rule": rule},
        size=n_events,
        data_fields=[{"name": k, "description": v} for k, v in DATA_DICTIONARY.items()],
        data_dictionary_ref="builtin:data-dictionary-v1",
        creator=meta.creator,
        citation=citation,
        version=meta.version,
        timestamp=meta.date or end_date,
    )


def generate(config: SyntheticConfig) -> GenerationResult:
    """Produce (events, labels, card draft, provenance manifest) for a config.

    Exactly round-half-up(prevalence * n_players) players get risk_flag = 1:
    the top-k by latent risk, with their screening score clamped to the
    labeled side of the threshold so the label rule reproduces the flags.
    """
    config.validate()
    id_width = max(6, len(str(config.n_players - 1)))

    latents = np.empty(config.n_players)
    profiles: list = []
    pgsi_draws = np.empty(config.n_players)
    events: list = []

    tier_names = list(ENGAGEMENT_TIERS)
    tier_probs = [config.engagement_mix.get(t, 0.0) for t in tier_names]
    vertical_names = [v.value for v in Vertical]
    vertical_probs = [config.vertical_mix.get(v, 0.0) for v in vertical_names]
    cohort_names = [c for c, _ in config.cohorts]
    cohort_probs = [p for _, p in config.cohorts]

    for i in range(config.n_players):
        rng = player_rng(config.seed, i)
        latent = rng.random()
        pgsi_draw = rng.random()
        profile = PlayerProfile(
            player_id=f"p{i:0{id_width}d}",
            engagement=_choice(rng, tier_names, tier_probs),
            vertical=_choice(rng, vertical_names, vertical_probs),
            cohort=_choice(rng, cohort_names, cohort_probs),
        )
        latents[i] = latent
        pgsi_draws[i] = pgsi_draw
        profiles.append(profile)
        events.extend(simulate_player_events(
            latent, profile, config.time_horizon_days, rng,
            signal_strength=config.signal_strength,
            economics=config.economics,
            base_date=config.base_date,
        ))

    k = round_half_up(config.prevalence * config.n_players)
    order = sorted(range(config.n_players), key=lambda i: (-latents[i], i))
    flagged = set(order[:k])

    labels: list = []
    for i, profile in enumerate(profiles):
        risk = 1 if i in flagged else 0
        if config.label_source == "PGSI":
            raw_score = pgsi_from_latent(float(latents[i]), float(pgsi_draws[i]))
            score = max(raw_score, config.pgsi_threshold) if risk else min(raw_score, config.pgsi_threshold - 1)
            labels.append(PlayerLabel(profile.player_id, score, None, risk, "PGSI", profile.cohort))
        else:
            labels.append(PlayerLabel(profile.player_id, None, risk, risk, "VSE", profile.cohort))

    events.sort(key=lambda e: (e.player_id, e.start_time, e.event_kind.value))
    labels.sort(key=lambda l: l.player_id)

    n_sessions = sum(1 for e in events if e.event_kind is EventKind.SESSION)
    n_deposits = sum(1 for e in events if e.event_kind is EventKind.DEPOSIT)
    card = _draft_card(config, len(events), k)
    manifest = {
        "generator_version": GENERATOR_VERSION,
        "config": config.to_dict(),
        "config_sha256": config.content_hash(),
        "allocation": "exact prevalence: top-k players by latent risk, k = round-half-up(prevalence * n_players); "
                      "screening scores clamped to the flagged side of the threshold",
        "distributions": {
            "latent": "uniform[0, 1) per player",
            "tier_active_day_p": TIER_ACTIVE_DAY_P,
            "tier_sessions_per_active_day": TIER_SESSIONS_PER_ACTIVE_DAY,
            "new_tier_window_days": NEW_TIER_WINDOW_DAYS,
            "regular_week_coverage": REGULAR_WEEK_COVERAGE,
            "mean_bets_per_session": MEAN_BETS_PER_SESSION,
            "stake_lognormal": {"mu": STAKE_LOG_MEAN, "sigma": STAKE_LOG_SIGMA, "min": STAKE_MIN, "max": STAKE_MAX},
            "chase": {"base": CHASE_P_BASE, "gain": CHASE_P_GAIN, "cap": CHASE_P_CAP,
                      "within_mult": WITHIN_SESSION_CHASE_MULT, "cross_mult": CROSS_SESSION_CHASE_MULT},
            "declined_deposit": {"base": DECLINE_P_BASE, "gain": DECLINE_P_GAIN, "cap": DECLINE_P_CAP},
            "deposit_rate": {"base": DEPOSIT_RATE_BASE, "gain": DEPOSIT_RATE_GAIN},
            "withdrawal_rate": WITHDRAWAL_RATE,
            "vertical_win_p": VERTICAL_WIN_P,
            "economics_rtp": dict(config.economics),
            "pgsi_noise_span": PGSI_NOISE_SPAN,
        },
        "counts": {
            "players": config.n_players,
            "events": len(events),
            "sessions": n_sessions,
            "deposits": n_deposits,
            "withdrawals": len(events) - n_sessions - n_deposits,
            "flagged": k,
        },
    }
    return GenerationResult(events=events, labels=labels, card=card, manifest=manifest)


LABEL_COLUMNS = ["player_id", "pgsi_score", "vse_flag", "risk_flag", "label_source", "cohort"]


def serialize_labels(labels: list) -> bytes:
    import csv
    import io

    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LABEL_COLUMNS)
    for lab in labels:
        writer.writerow([
            lab.player_id,
            "" if lab.pgsi_score is None else lab.pgsi_score,
            "" if lab.vse_flag is None else lab.vse_flag,
            lab.risk_flag,
            lab.label_source,
            lab.cohort,
        ])
    return buf.getvalue().encode("utf-8")


def write_dataset(result: GenerationResult, out_dir) -> dict:
    """Write events.csv, labels.csv, card.json, manifest.json into out_dir."""
    from pathlib import Path

    from .canonical import serialize_events
    from .util import dump_json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "events": out / "events.csv",
        "labels": out / "labels.csv",
        "card": out / "card.json",
        "manifest": out / "manifest.json",
    }
    paths["events"].write_bytes(serialize_events(result.events))
    paths["labels"].write_bytes(serialize_labels(result.labels))
    paths["card"].write_text(dump_json(result.card.to_dict()), "utf-8")
    paths["manifest"].write_text(dump_json(result.manifest), "utf-8")
    return paths


def parse_labels(data: bytes) -> list:
    import csv
    import io

    reader = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    header = next(reader, None)
    if header != LABEL_COLUMNS:
        raise ValueError(f"labels header must be {','.join(LABEL_COLUMNS)}")
    labels = []
    for row in reader:
        if not row:
            continue
        pid, pgsi, vse, risk, source, cohort = row
        labels.append(PlayerLabel(
            player_id=pid,
            pgsi_score=None if pgsi == "" else int(pgsi),
            vse_flag=None if vse == "" else int(vse),
            risk_flag=int(risk),
            label_source=source,
            cohort=cohort,
        ))
    return labels

"""Comparing manual and automated infarct quantification.

Records carry per-stack scar volume (ml), scar percentage and microvascular
obstruction percentage.  Three options turn a network's records into one
percentage per metric, and :func:`tally` counts, over the resulting
tables, how often each network reaches the highest percentage.
"""
from __future__ import annotations

import csv
import enum
import math
from collections import defaultdict
from dataclasses import dataclass

METRICS = ("scar_ml", "scar_pct", "mo_pct")
MANUAL = "manual"
CSV_HEADER = ("stack_id", "method", "scar_ml", "scar_pct", "mo_pct")
TIE_TOLERANCE = 1e-9


class PredicateMode(enum.Enum):
    VALUE_BELOW = "value-below"
    ABS_DIFF_BELOW = "abs-diff-below"


@dataclass(frozen=True)
class QuantRecord:
    stack_id: str
    method: str
    scar_ml: float
    scar_pct: float
    mo_pct: float

    def __post_init__(self):
        for name in METRICS:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{self.stack_id}/{self.method}: {name} is not finite")
            object.__setattr__(self, name, value)
        if self.scar_ml < 0:
            raise ValueError(f"{self.stack_id}/{self.method}: negative scar_ml")
        for name in ("scar_pct", "mo_pct"):
            if not 0 <= getattr(self, name) <= 100:
                raise ValueError(f"{self.stack_id}/{self.method}: {name} outside [0, 100]")


@dataclass(frozen=True)
class OptionThresholds:
    scar_ml: float = 25.0
    scar_pct: float = 15.0
    mo_pct: float = 0.35
    mode: PredicateMode = PredicateMode.VALUE_BELOW

    def __post_init__(self):
        if min(self.scar_ml, self.scar_pct, self.mo_pct) <= 0:
            raise ValueError("thresholds must be positive")
        object.__setattr__(self, "mode", PredicateMode(self.mode))

    def tau(self, metric: str) -> float:
        return getattr(self, metric)


@dataclass
class OptionReport:
    """One table: ``values[metric][network]`` is a percentage (NaN = undefined)."""

    name: str
    values: dict[str, dict[str, float]]
    header: dict | None = None

    @property
    def networks(self) -> list[str]:
        return list(next(iter(self.values.values())))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "header": self.header or {},
            "values": {
                m: {n: (None if math.isnan(v) else v) for n, v in row.items()}
                for m, row in self.values.items()
            },
        }


@dataclass
class TallyReport:
    wins: dict[str, int]
    slots: list[tuple[str, str, list[str]]]  # (table, metric, winners)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    def fraction(self, network: str) -> float:
        return self.wins[network] / self.n_slots

    def to_dict(self) -> dict:
        return {
            "slots": [
                {"table": t, "metric": m, "winners": w} for t, m, w in self.slots
            ],
            "wins": dict(self.wins),
            "fraction": {n: self.fraction(n) for n in self.wins},
            "percent": {n: 100 * self.fraction(n) for n in self.wins},
        }


def _paired(manual, auto) -> list[tuple[QuantRecord, QuantRecord]]:
    by_id = {r.stack_id: r for r in manual}
    auto_ids = {r.stack_id for r in auto}
    if len(by_id) != len(manual) or len(auto_ids) != len(auto):
        raise ValueError("duplicate stack_id within one method")
    if set(by_id) != auto_ids:
        missing = sorted(set(by_id) ^ auto_ids)
        raise ValueError(f"stack ids differ between methods: {missing}")
    if not by_id:
        raise ValueError("no stacks to compare")
    return [(by_id[r.stack_id], r) for r in sorted(auto, key=lambda r: r.stack_id)]


def option1(manual, auto, thresholds: OptionThresholds = OptionThresholds()) -> dict[str, float]:
    """Percentage of stacks whose automated value passes the per-metric threshold.

    ``VALUE_BELOW`` counts ``auto < tau``; ``ABS_DIFF_BELOW`` counts
    ``|auto - manual| < tau``.
    """
    pairs = _paired(manual, auto)
    out = {}
    for metric in METRICS:
        tau = thresholds.tau(metric)
        if thresholds.mode is PredicateMode.VALUE_BELOW:
            hits = sum(getattr(a, metric) < tau for _, a in pairs)
        else:
            hits = sum(abs(getattr(a, metric) - getattr(m, metric)) < tau for m, a in pairs)
        out[metric] = 100.0 * hits / len(pairs)
    return out


def option2(manual, auto) -> dict[str, float]:
    """``100 * sum(auto) / sum(manual)`` per metric; NaN if the manual sum is 0."""
    pairs = _paired(manual, auto)
    out = {}
    for metric in METRICS:
        m_sum = sum(getattr(m, metric) for m, _ in pairs)
        a_sum = sum(getattr(a, metric) for _, a in pairs)
        out[metric] = 100.0 * a_sum / m_sum if m_sum > 0 else math.nan
    return out


def option3(manual, auto) -> dict[str, float]:
    """``100 * (1 - sum|auto - manual| / sum(manual))`` clamped to [0, 100]."""
    pairs = _paired(manual, auto)
    out = {}
    for metric in METRICS:
        m_sum = sum(getattr(m, metric) for m, _ in pairs)
        d_sum = sum(abs(getattr(a, metric) - getattr(m, metric)) for m, a in pairs)
        if m_sum > 0:
            out[metric] = min(100.0, max(0.0, 100.0 * (1.0 - d_sum / m_sum)))
        else:
            out[metric] = math.nan
    return out


def build_tables(records, thresholds: OptionThresholds = OptionThresholds()) -> list[OptionReport]:
    """Run all three options for every non-manual method in ``records``."""
    groups = group_by_method(records)
    manual = groups.pop(MANUAL)
    if not groups:
        raise ValueError("records contain no automated method")
    tables = []
    for name, fn in (
        ("option1", lambda a: option1(manual, a, thresholds)),
        ("option2", lambda a: option2(manual, a)),
        ("option3", lambda a: option3(manual, a)),
    ):
        per_net = {net: fn(recs) for net, recs in groups.items()}
        values = {m: {net: per_net[net][m] for net in groups} for m in METRICS}
        header = {"mode": thresholds.mode.value,
                  "thresholds": [thresholds.tau(m) for m in METRICS]} if name == "option1" else None
        tables.append(OptionReport(name, values, header))
    return tables


def tally(tables, networks=None) -> TallyReport:
    """Credit every network reaching the maximum of each (table, metric) slot.

    Ties (within ``TIE_TOLERANCE``) credit all tied networks.  Undefined
    (NaN) entries never win; a slot with no defined entry is an error.
    """
    tables = list(tables)
    if networks is None:
        networks = tables[0].networks
    networks = list(networks)
    if len(networks) < 2:
        raise ValueError("tally needs at least two networks")
    wins = {n: 0 for n in networks}
    slots = []
    for table in tables:
        for metric in METRICS:
            try:
                row = {n: float(table.values[metric][n]) for n in networks}
            except KeyError as exc:
                raise ValueError(f"{table.name}: missing entry {exc}") from None
            defined = {n: v for n, v in row.items() if not math.isnan(v)}
            if not defined:
                raise ValueError(f"{table.name}/{metric}: no defined percentages")
            best = max(defined.values())
            winners = [n for n, v in defined.items() if best - v <= TIE_TOLERANCE]
            for n in winners:
                wins[n] += 1
            slots.append((table.name, metric, winners))
    return TallyReport(wins, slots)


def group_by_method(records) -> dict[str, list[QuantRecord]]:
    groups = defaultdict(list)
    for r in records:
        groups[r.method].append(r)
    if MANUAL not in groups:
        raise KeyError(f"no records with method {MANUAL!r}")
    return dict(groups)


def read_records(path) -> list[QuantRecord]:
    """Read the ``stack_id,method,scar_ml,scar_pct,mo_pct`` CSV."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: header must be {','.join(CSV_HEADER)}")
        return [
            QuantRecord(row["stack_id"], row["method"], row["scar_ml"], row["scar_pct"], row["mo_pct"])
            for row in reader
        ]


def write_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.stack_id, r.method, r.scar_ml, r.scar_pct, r.mo_pct])

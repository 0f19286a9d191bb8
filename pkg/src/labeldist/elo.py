"""Elo ratings over pairwise segmentation preferences.

Images play "matches" decided by human clicks. Ratings start at zero and move
by K * (score - expected) with the standard 400-scale logistic expectation,
so every update is zero-sum and the rating order reflects accumulated
preference. Updates are order-sensitive: replay choices chronologically when
an order is known, or expand a bare choice matrix row-major (optionally with
a seeded shuffle).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .study import DistanceTable

__all__ = [
    "ChoiceMatrix",
    "EloRatings",
    "LogEntry",
    "apply_result",
    "build_choice_matrix",
    "elo_distance_matrix",
    "expected_score",
    "parse_choice_log",
    "replay_order",
    "run_tournament",
]

LOG_CSV_HEADER = "timestamp,scene,winner,loser"


@dataclass(frozen=True)
class ChoiceMatrix:
    """Win counts: wins[a][b] is how often image a was preferred over b."""

    ids: tuple[str, ...]
    wins: np.ndarray

    def __post_init__(self):
        n = len(self.ids)
        if self.wins.shape != (n, n):
            raise ValueError(f"wins must be {n}x{n}, got {self.wins.shape}")
        if (self.wins < 0).any():
            raise ValueError("win counts must be non-negative")
        if np.diagonal(self.wins).any():
            raise ValueError("diagonal of a choice matrix must be zero")

    def count(self, winner: str, loser: str) -> int:
        return int(self.wins[self.ids.index(winner), self.ids.index(loser)])

    def to_csv(self) -> str:
        lines = ["id," + ",".join(self.ids)]
        for name, row in zip(self.ids, self.wins):
            lines.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ChoiceMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("id,"):
            raise ValueError("choice matrix CSV must start with an 'id,...' header row")
        ids = tuple(lines[0].split(",")[1:])
        if len(lines) != len(ids) + 1:
            raise ValueError(f"expected {len(ids)} data rows, got {len(lines) - 1}")
        wins = np.zeros((len(ids), len(ids)), dtype=np.int64)
        for r, line in enumerate(lines[1:]):
            cells = line.split(",")
            if cells[0] != ids[r]:
                raise ValueError(f"row id {cells[0]!r} does not match header id {ids[r]!r}")
            if len(cells) != len(ids) + 1:
                raise ValueError(f"row {cells[0]!r} has {len(cells) - 1} values, expected {len(ids)}")
            wins[r] = [int(c) for c in cells[1:]]
        return cls(ids=ids, wins=wins)


def build_choice_matrix(ids: list[str], choices: list[tuple[str, str]]) -> ChoiceMatrix:
    """Accumulate (winner, loser) records into a choice matrix."""
    index = {name: k for k, name in enumerate(ids)}
    wins = np.zeros((len(ids), len(ids)), dtype=np.int64)
    for winner, loser in choices:
        if winner == loser:
            raise ValueError(f"self-match for {winner!r}")
        wins[index[winner], index[loser]] += 1
    return ChoiceMatrix(ids=tuple(ids), wins=wins)


@dataclass(frozen=True)
class EloRatings:
    ratings: dict[str, float]
    k_factor: float = 32.0
    initial: float = 0.0

    @classmethod
    def fresh(cls, ids, k_factor: float = 32.0, initial: float = 0.0) -> "EloRatings":
        return cls(ratings={name: float(initial) for name in ids}, k_factor=k_factor, initial=initial)

    def ranking(self) -> list[str]:
        """Ids from best to worst; ties broken by id for stability."""
        return sorted(self.ratings, key=lambda name: (-self.ratings[name], name))


def expected_score(ra: float, rb: float) -> float:
    """Probability that a rating-ra player beats a rating-rb player."""
    return 1.0 / (1.0 + 10.0 ** ((rb - ra) / 400.0))


def apply_result(ratings: EloRatings, winner: str, loser: str) -> EloRatings:
    """One match outcome; returns a new snapshot, zero-sum by construction."""
    if winner not in ratings.ratings:
        raise KeyError(f"unknown id {winner!r}")
    if loser not in ratings.ratings:
        raise KeyError(f"unknown id {loser!r}")
    if winner == loser:
        raise ValueError(f"self-match for {winner!r}")
    updated = dict(ratings.ratings)
    k = ratings.k_factor
    e_winner = expected_score(updated[winner], updated[loser])
    e_loser = expected_score(updated[loser], updated[winner])
    updated[winner] += k * (1.0 - e_winner)
    updated[loser] += k * (0.0 - e_loser)
    return EloRatings(ratings=updated, k_factor=k, initial=ratings.initial)


def run_tournament(
    choices: ChoiceMatrix,
    order: list[tuple[str, str]],
    k_factor: float = 32.0,
    initial: float = 0.0,
) -> EloRatings:
    """Fold a replay sequence of (winner, loser) results into ratings.

    The sequence must contain exactly the matches recorded in the choice
    matrix (Elo is order-sensitive, so the caller owns the order).
    """
    expected = Counter()
    for a, ra in zip(choices.ids, choices.wins):
        for b, count in zip(choices.ids, ra):
            if count:
                expected[(a, b)] = int(count)
    if Counter(order) != expected:
        raise ValueError("replay sequence does not match the choice matrix totals")
    ratings = EloRatings.fresh(choices.ids, k_factor=k_factor, initial=initial)
    for winner, loser in order:
        ratings = apply_result(ratings, winner, loser)
    return ratings


def replay_order(choices: ChoiceMatrix, shuffle_seed: int | None = None) -> list[tuple[str, str]]:
    """Row-major expansion of a choice matrix, optionally seeded-shuffled."""
    order = []
    for a, row in zip(choices.ids, choices.wins):
        for b, count in zip(choices.ids, row):
            order.extend([(a, b)] * int(count))
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        order = [order[k] for k in rng.permutation(len(order))]
    return order


def elo_distance_matrix(ratings: EloRatings, ids: list[str] | None = None) -> DistanceTable:
    """Absolute rating differences as a (symmetric, zero-diagonal) table."""
    names = tuple(ids) if ids is not None else tuple(ratings.ratings)
    if len(names) < 2:
        raise ValueError("need at least 2 ids")
    values = np.array([ratings.ratings[name] for name in names])
    entries = np.abs(values[:, None] - values[None, :])
    entries.flags.writeable = False
    return DistanceTable(
        ids=names,
        entries=entries,
        metric_name="elo",
        direction_note="symmetric |rating difference|",
    )


# ---------------------------------------------------------------------------
# chronological log wire format


@dataclass(frozen=True)
class LogEntry:
    timestamp: str
    scene: str
    winner: str
    loser: str


def format_log_entry(entry: LogEntry) -> str:
    return f"{entry.timestamp},{entry.scene},{entry.winner},{entry.loser}"


def parse_choice_log(text: str) -> list[LogEntry]:
    """Parse a `timestamp,scene,winner,loser` log; line order is the replay order."""
    entries = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0] == LOG_CSV_HEADER:
        lines = lines[1:]
    for line in lines:
        cells = line.split(",")
        if len(cells) != 4:
            raise ValueError(f"bad log line {line!r}: expected 4 comma-separated fields")
        entries.append(LogEntry(*cells))
    return entries

"""Roll-call vote ingestion (voteview CSV schema) and a synthetic fixture.

Input files carry one vote per row with columns congress, icpsr, rollnumber,
cast_code (extra columns are ignored; header order is free). Cast codes
follow the public codebook convention: 1-3 count as yea (+1), 4-6 as nay
(-1), and everything else as abstention/absence (0).

`make_senate_fixture` writes a small party-block dataset in the same schema:
each synthetic senator has a fixed ideology point, each roll call a random
cutpoint, and votes follow the cutpoint with a little noise plus occasional
abstentions. It exists so the senate harness can run hermetically; it makes
no claim of political realism.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

YEA_CODES = frozenset({1, 2, 3})
NAY_CODES = frozenset({4, 5, 6})

REQUIRED_COLUMNS = ("congress", "icpsr", "rollnumber", "cast_code")

DEFAULT_FIXTURE_ROLLCALLS = {103: 724, 104: 919, 105: 612}


@dataclass
class SenateDataset:
    """One congress: senators x roll calls with entries in {+1, -1, 0}."""

    congress: int
    senator_ids: np.ndarray
    votes: np.ndarray

    def __post_init__(self):
        self.senator_ids = np.asarray(self.senator_ids, dtype=int)
        self.votes = np.asarray(self.votes, dtype=float)
        if self.votes.shape[0] != self.senator_ids.size:
            raise ValueError("one row of votes per senator id required")
        if not np.isin(self.votes, (-1.0, 0.0, 1.0)).all():
            raise ValueError("vote entries must be +1, -1, or 0")

    @property
    def n_senators(self) -> int:
        return self.senator_ids.size

    @property
    def n_rollcalls(self) -> int:
        return self.votes.shape[1]

    def rows_for(self, member_ids) -> np.ndarray:
        """Row indices of the given member ids (error if any are absent)."""
        member_ids = np.asarray(member_ids, dtype=int)
        lookup = {int(m): i for i, m in enumerate(self.senator_ids)}
        missing = [int(m) for m in member_ids if int(m) not in lookup]
        if missing:
            raise ValueError(f"members {missing} not in congress {self.congress}")
        return np.array([lookup[int(m)] for m in member_ids], dtype=int)


def _code_to_vote(code: int) -> float:
    if code in YEA_CODES:
        return 1.0
    if code in NAY_CODES:
        return -1.0
    return 0.0


def load_voteview(path: str | Path) -> list[SenateDataset]:
    """Parse a voteview-schema CSV into one dataset per congress (sorted).

    Unrecorded (senator, roll call) pairs become 0. Malformed rows raise
    ValueError naming the offending line.
    """
    path = Path(path)
    by_congress: dict[int, dict[tuple[int, int], float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        names = [h.strip().lower() for h in header]
        try:
            cols = [names.index(c) for c in REQUIRED_COLUMNS]
        except ValueError:
            missing = [c for c in REQUIRED_COLUMNS if c not in names]
            raise ValueError(f"{path}: missing columns {missing}") from None

        for line_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                congress, icpsr, rollnumber, cast = (int(row[c]) for c in cols)
            except (ValueError, IndexError):
                raise ValueError(f"{path}: malformed row {line_num}: {row!r}") from None
            by_congress.setdefault(congress, {})[(icpsr, rollnumber)] = \
                _code_to_vote(cast)

    datasets = []
    for congress in sorted(by_congress):
        cells = by_congress[congress]
        senators = sorted({icpsr for icpsr, _ in cells})
        rolls = sorted({roll for _, roll in cells})
        srow = {m: i for i, m in enumerate(senators)}
        rcol = {r: j for j, r in enumerate(rolls)}
        votes = np.zeros((len(senators), len(rolls)))
        for (icpsr, roll), value in cells.items():
            votes[srow[icpsr], rcol[roll]] = value
        datasets.append(SenateDataset(congress, np.array(senators), votes))
    return datasets


def make_senate_fixture(path: str | Path,
                        rollcalls: dict[int, int] | None = None,
                        n_senators: int = 100, seed: int = 0,
                        abstain_rate: float = 0.02) -> Path:
    """Write a synthetic two-party voteview CSV and return its path."""
    if rollcalls is None:
        rollcalls = DEFAULT_FIXTURE_ROLLCALLS
    rng = np.random.default_rng(seed)
    half = n_senators // 2
    ideology = np.empty(n_senators)
    ideology[:half] = rng.uniform(0.05, 0.45, half)
    ideology[half:] = rng.uniform(0.55, 0.95, n_senators - half)
    member_ids = np.arange(1, n_senators + 1)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REQUIRED_COLUMNS)
        for congress in sorted(rollcalls):
            for roll in range(1, rollcalls[congress] + 1):
                cutpoint = rng.uniform(0.2, 0.8)
                wobble = rng.normal(0.0, 0.05, n_senators)
                yea = (ideology + wobble) < cutpoint
                abstain = rng.random(n_senators) < abstain_rate
                for m, member in enumerate(member_ids):
                    if abstain[m]:
                        code = 9
                    elif yea[m]:
                        code = 1
                    else:
                        code = 6
                    writer.writerow([congress, member, roll, code])
    return path

"""Likelihood tables and their on-disk interchange format.

A table stores natural-log likelihoods ``ln p(sequence | structure)`` for one
conformational ensemble of one state (folded ``F`` or unfolded ``U``). The
main CSV has the fixed header::

    ensemble_id,state,structure_id,sequence,log_likelihood

Two optional companion files share the table's basename:

``<name>.positions.csv``
    Per-position log-probability vectors, header
    ``structure_id,position,<letter>,...`` with one column per alphabet
    letter. Every row must be a normalized distribution in log space.

``<name>.weights.csv``
    Per-structure log-weights, header ``structure_id,log_weight``. Used when
    structures are enumerated exhaustively rather than sampled, in which case
    ensemble averages weight each structure by its Boltzmann probability
    instead of uniformly.

Floats are written with 13 significant digits. A file written by these tools
rewrites byte-identically after a reload; an in-memory value quantizes once
(below 1e-12 relative) on its first write and is stable from then on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.special import logsumexp

from .alphabet import Alphabet
from .errors import TableError
from .variants import Sequence

TABLE_HEADER = ("ensemble_id", "state", "structure_id", "sequence", "log_likelihood")
WEIGHTS_HEADER = ("structure_id", "log_weight")
STATES = ("F", "U")

FLOAT_FMT = "{:.12e}"
POSITION_NORMALIZATION_TOL = 1e-6


def format_float(value: float) -> str:
    """Canonical decimal text for interchange files (13 significant digits)."""
    return FLOAT_FMT.format(value)


def positions_path(path: Path) -> Path:
    return path.with_name(path.stem + ".positions.csv") if path.suffix == ".csv" else path.with_name(path.name + ".positions.csv")


def weights_path(path: Path) -> Path:
    return path.with_name(path.stem + ".weights.csv") if path.suffix == ".csv" else path.with_name(path.name + ".weights.csv")


@dataclass(frozen=True, eq=False)
class LikelihoodTable:
    """In-memory likelihood table for one ensemble.

    ``entries`` maps ``(structure_id, sequence_letters)`` to a log-likelihood.
    ``per_position`` maps ``(structure_id, position)`` to a log-probability
    vector over ``position_alphabet`` (positions are 1-based).
    """

    ensemble_id: str
    state: str
    entries: Mapping[tuple[str, str], float]
    per_position: Mapping[tuple[str, int], np.ndarray] = field(default_factory=dict)
    position_alphabet: Alphabet | None = None

    def __post_init__(self) -> None:
        if self.state not in STATES:
            raise TableError(f"state must be one of {STATES}, got {self.state!r}")
        if not self.ensemble_id:
            raise TableError("ensemble_id must be non-empty")
        if not self.entries and not self.per_position:
            raise TableError("table has no entries and no per-position data")
        for (sid, seq), value in self.entries.items():
            if not sid:
                raise TableError("structure_id must be non-empty")
            if not math.isfinite(value):
                raise TableError(f"non-finite log-likelihood for ({sid!r}, {seq!r})")
        if self.per_position and self.position_alphabet is None:
            raise TableError("per-position data requires a position alphabet")

    @property
    def structure_ids(self) -> tuple[str, ...]:
        ids = {sid for sid, _ in self.entries}
        ids.update(sid for sid, _ in self.per_position)
        return tuple(sorted(ids))

    @property
    def n_entries(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def has_entry(self, structure_id: str, sequence: Sequence | str) -> bool:
        return (structure_id, str(sequence)) in self.entries

    def log_likelihood(self, structure_id: str, sequence: Sequence | str) -> float:
        key = (structure_id, str(sequence))
        try:
            return self.entries[key]
        except KeyError:
            raise TableError(
                f"table {self.ensemble_id!r} has no entry for structure {structure_id!r}, "
                f"sequence {str(sequence)!r}"
            ) from None

    def has_positions(self, structure_id: str) -> bool:
        return any(sid == structure_id for sid, _ in self.per_position)

    def position_log_prob(self, structure_id: str, position: int, letter: str) -> float:
        key = (structure_id, position)
        if key not in self.per_position:
            raise TableError(
                f"table {self.ensemble_id!r} has no per-position data for structure "
                f"{structure_id!r} position {position}"
            )
        assert self.position_alphabet is not None
        return float(self.per_position[key][self.position_alphabet.index(letter)])

    def positions_for(self, structure_id: str) -> tuple[int, ...]:
        return tuple(sorted(pos for sid, pos in self.per_position if sid == structure_id))

    def sequence_log_likelihood_from_positions(self, structure_id: str, sequence: Sequence | str) -> float:
        """Sum of per-position log-probabilities over a whole sequence.

        Requires positions 1..len(sequence) to exactly cover the structure's
        per-position rows; a partial or longer row set is a length mismatch.
        """
        letters = str(sequence)
        available = self.positions_for(structure_id)
        if not available:
            raise TableError(
                f"table {self.ensemble_id!r} has no per-position data for structure {structure_id!r}"
            )
        expected = tuple(range(1, len(letters) + 1))
        if available != expected:
            raise TableError(
                f"sequence length {len(letters)} does not match per-position rows "
                f"{available[0]}..{available[-1]} ({len(available)} rows) for structure {structure_id!r}"
            )
        return float(sum(self.position_log_prob(structure_id, i + 1, c) for i, c in enumerate(letters)))


def _read_rows(path: Path, expected_header: tuple[str, ...], label: str) -> list[tuple[int, list[str]]]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise TableError(f"cannot read {label} file {path}: {exc}") from None
    reader = csv.reader(text.splitlines())
    rows = [(lineno, row) for lineno, row in enumerate(reader, start=1) if row]
    if not rows:
        raise TableError(f"{label} file {path} is empty")
    header_line, header = rows[0]
    if tuple(header) != expected_header:
        raise TableError(
            f"{label} file {path} line {header_line}: header {header!r} does not match "
            f"{list(expected_header)!r}"
        )
    return rows[1:]


def _parse_float(text: str, path: Path, lineno: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise TableError(f"{path} line {lineno}: {column} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise TableError(f"{path} line {lineno}: {column} {text!r} is not finite")
    return value


def load_likelihood_table(
    path: str | Path,
    *,
    position_normalization_tol: float = POSITION_NORMALIZATION_TOL,
) -> LikelihoodTable:
    """Load a likelihood table and any companion per-position file.

    Rejects wrong headers, non-numeric or non-finite values, duplicate
    ``(structure_id, sequence)`` rows, mixed states, mixed ensemble ids, and
    per-position rows whose letter distribution is off normalization by more
    than ``position_normalization_tol`` in log space.
    """
    path = Path(path)
    rows = _read_rows(path, TABLE_HEADER, "likelihood table")
    entries: dict[tuple[str, str], float] = {}
    ensemble_id: str | None = None
    state: str | None = None
    for lineno, row in rows:
        if len(row) != len(TABLE_HEADER):
            raise TableError(f"{path} line {lineno}: expected {len(TABLE_HEADER)} fields, got {len(row)}")
        eid, st, sid, seq, ll_text = (f.strip() for f in row)
        if not eid or not sid or not seq:
            raise TableError(f"{path} line {lineno}: empty ensemble_id, structure_id, or sequence")
        if st not in STATES:
            raise TableError(f"{path} line {lineno}: state {st!r} must be one of {list(STATES)}")
        if ensemble_id is None:
            ensemble_id, state = eid, st
        else:
            if eid != ensemble_id:
                raise TableError(
                    f"{path} line {lineno}: mixed ensemble ids {ensemble_id!r} and {eid!r} in one file"
                )
            if st != state:
                raise TableError(
                    f"{path} line {lineno}: mixed state labels {state!r} and {st!r} in one file"
                )
        key = (sid, seq)
        if key in entries:
            raise TableError(f"{path} line {lineno}: duplicate entry for structure {sid!r}, sequence {seq!r}")
        entries[key] = _parse_float(ll_text, path, lineno, "log_likelihood")
    if ensemble_id is None or state is None:
        raise TableError(f"{path} has a header but no data rows")

    per_position: dict[tuple[str, int], np.ndarray] = {}
    position_alphabet: Alphabet | None = None
    companion = positions_path(path)
    if companion.exists():
        per_position, position_alphabet = _load_positions(companion, position_normalization_tol)
    return LikelihoodTable(ensemble_id, state, entries, per_position, position_alphabet)


def _load_positions(path: Path, tol: float) -> tuple[dict[tuple[str, int], np.ndarray], Alphabet]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise TableError(f"cannot read per-position file {path}: {exc}") from None
    reader = csv.reader(text.splitlines())
    rows = [(lineno, row) for lineno, row in enumerate(reader, start=1) if row]
    if not rows:
        raise TableError(f"per-position file {path} is empty")
    header_line, header = rows[0]
    if len(header) < 3 or header[0] != "structure_id" or header[1] != "position":
        raise TableError(
            f"{path} line {header_line}: header must start with structure_id,position "
            "followed by one column per letter"
        )
    try:
        alphabet = Alphabet(tuple(h.strip() for h in header[2:]))
    except Exception as exc:
        raise TableError(f"{path} line {header_line}: bad letter columns: {exc}") from None
    data: dict[tuple[str, int], np.ndarray] = {}
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise TableError(f"{path} line {lineno}: expected {len(header)} fields, got {len(row)}")
        sid = row[0].strip()
        if not sid:
            raise TableError(f"{path} line {lineno}: empty structure_id")
        try:
            position = int(row[1])
        except ValueError:
            raise TableError(f"{path} line {lineno}: position {row[1]!r} is not an integer") from None
        if position < 1:
            raise TableError(f"{path} line {lineno}: position must be >= 1, got {position}")
        key = (sid, position)
        if key in data:
            raise TableError(f"{path} line {lineno}: duplicate row for structure {sid!r} position {position}")
        vec = np.array(
            [_parse_float(f, path, lineno, f"log-probability ({alphabet.letters[i]})") for i, f in enumerate(row[2:])]
        )
        total = float(logsumexp(vec))
        if abs(total) > tol:
            raise TableError(
                f"{path} line {lineno}: letter distribution is not normalized "
                f"(logsumexp = {total:.3e}, tolerance {tol:.1e})"
            )
        data[key] = vec
    return data, alphabet


def save_likelihood_table(table: LikelihoodTable, path: str | Path) -> Path:
    """Write a table (and companions when present) in canonical sorted form."""
    path = Path(path)
    lines = [",".join(TABLE_HEADER)]
    for (sid, seq) in sorted(table.entries):
        value = table.entries[(sid, seq)]
        lines.append(f"{table.ensemble_id},{table.state},{sid},{seq},{format_float(value)}")
    path.write_text("\n".join(lines) + "\n")
    if table.per_position:
        assert table.position_alphabet is not None
        plines = [",".join(("structure_id", "position") + table.position_alphabet.letters)]
        for (sid, position) in sorted(table.per_position):
            vec = table.per_position[(sid, position)]
            plines.append(f"{sid},{position}," + ",".join(format_float(float(v)) for v in vec))
        positions_path(path).write_text("\n".join(plines) + "\n")
    return path


def load_log_weights(path: str | Path) -> dict[str, float]:
    """Load a per-structure log-weight sidecar."""
    path = Path(path)
    rows = _read_rows(path, WEIGHTS_HEADER, "log-weight")
    weights: dict[str, float] = {}
    for lineno, row in rows:
        if len(row) != 2:
            raise TableError(f"{path} line {lineno}: expected 2 fields, got {len(row)}")
        sid = row[0].strip()
        if not sid:
            raise TableError(f"{path} line {lineno}: empty structure_id")
        if sid in weights:
            raise TableError(f"{path} line {lineno}: duplicate structure_id {sid!r}")
        try:
            value = float(row[1])
        except ValueError:
            raise TableError(f"{path} line {lineno}: log_weight {row[1]!r} is not a number") from None
        if math.isnan(value) or value == math.inf:
            raise TableError(f"{path} line {lineno}: log_weight {row[1]!r} is not a valid log-weight")
        weights[sid] = value
    return weights


def save_log_weights(weights: Mapping[str, float], path: str | Path) -> Path:
    path = Path(path)
    lines = [",".join(WEIGHTS_HEADER)]
    for sid in sorted(weights):
        lines.append(f"{sid},{format_float(weights[sid])}")
    path.write_text("\n".join(lines) + "\n")
    return path

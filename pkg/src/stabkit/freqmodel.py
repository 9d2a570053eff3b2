"""Sequence models used for unfolded-state and baseline terms.

Two families implement the same small protocol (``log_ratio(wt, mt)``):

:class:`FrequencyModel`
    Per-letter probabilities, either position-independent or per-position.
    Built from counts with additive smoothing, from explicit probabilities,
    or uniform.

:class:`CandidateMarginal`
    An explicit normalized distribution over a finite set of candidate
    sequences, e.g. amino-acid marginals restricted to a mutation family.

Log-ratios are differences of log-probabilities, so for frequency models the
ratio only involves positions where the two sequences disagree.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, runtime_checkable

import numpy as np
from scipy.special import logsumexp

from .alphabet import CANONICAL, Alphabet
from .errors import ModelError
from .tables import format_float
from .variants import Mutation, Sequence

NORMALIZATION_TOL = 1e-9

COUNTS_HEADER = ("amino_acid", "count")
MARGINAL_HEADER = ("sequence", "log_prob")


@runtime_checkable
class SequenceRatioModel(Protocol):
    """Anything that can score ln p(mt)/p(wt) for two equal-length sequences."""

    def log_ratio(self, wild_type: Sequence, mutant: Sequence) -> float: ...


@dataclass(frozen=True, eq=False)
class FrequencyModel:
    """Letter probabilities in log space.

    ``log_probs`` has shape (A,) for a position-independent model or (L, A)
    for a per-position model, with A the alphabet size. Every row must be a
    normalized distribution with full support.
    """

    alphabet: Alphabet
    log_probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.log_probs, dtype=float)
        object.__setattr__(self, "log_probs", arr)
        if arr.ndim not in (1, 2):
            raise ModelError(f"log_probs must be 1- or 2-dimensional, got shape {arr.shape}")
        if arr.shape[-1] != len(self.alphabet):
            raise ModelError(
                f"log_probs last dimension {arr.shape[-1]} does not match alphabet size {len(self.alphabet)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ModelError("model assigns zero probability to some letter; all letters need support")
        rows = arr[None, :] if arr.ndim == 1 else arr
        totals = logsumexp(rows, axis=1)
        worst = float(np.max(np.abs(totals)))
        if worst > NORMALIZATION_TOL:
            raise ModelError(f"letter distribution off normalization by {worst:.3e} in log space")

    @property
    def per_position(self) -> bool:
        return self.log_probs.ndim == 2

    @property
    def n_positions(self) -> int | None:
        return self.log_probs.shape[0] if self.per_position else None

    @classmethod
    def uniform(cls, alphabet: Alphabet = CANONICAL) -> "FrequencyModel":
        return cls(alphabet, np.full(len(alphabet), -math.log(len(alphabet))))

    @classmethod
    def from_counts(
        cls,
        counts: Mapping[str, float],
        alphabet: Alphabet = CANONICAL,
        pseudo_count: float = 0.5,
    ) -> "FrequencyModel":
        """Additively smoothed frequencies: p = (n + pc) / (N + A * pc)."""
        if pseudo_count < 0:
            raise ModelError(f"pseudo_count must be >= 0, got {pseudo_count}")
        unknown = sorted(set(counts) - set(alphabet.letters))
        if unknown:
            raise ModelError(f"counts contain letters {unknown} outside the alphabet")
        raw = np.array([float(counts.get(letter, 0.0)) for letter in alphabet.letters])
        if np.any(raw < 0):
            raise ModelError("counts must be non-negative")
        smoothed = raw + pseudo_count
        total = smoothed.sum()
        if total <= 0 or np.any(smoothed <= 0):
            raise ModelError(
                "zero count with zero pseudo-count leaves letters without support; "
                "use a positive pseudo_count"
            )
        return cls(alphabet, np.log(smoothed) - math.log(total))

    @classmethod
    def from_probs(cls, probs: Mapping[str, float], alphabet: Alphabet = CANONICAL) -> "FrequencyModel":
        vec = np.array([float(probs.get(letter, 0.0)) for letter in alphabet.letters])
        if np.any(vec <= 0):
            raise ModelError("probabilities must be positive for every letter")
        return cls(alphabet, np.log(vec))

    def log_prob(self, letter: str, position: int | None = None) -> float:
        """ln p(letter), or ln p(letter at 1-based position) for per-position models."""
        col = self.alphabet.index(letter)
        if not self.per_position:
            return float(self.log_probs[col])
        if position is None:
            raise ModelError("per-position model requires a position")
        if not 1 <= position <= self.log_probs.shape[0]:
            raise ModelError(
                f"position {position} out of range for model over {self.log_probs.shape[0]} positions"
            )
        return float(self.log_probs[position - 1, col])

    def sequence_log_prob(self, sequence: Sequence) -> float:
        if self.per_position and len(sequence) != self.log_probs.shape[0]:
            raise ModelError(
                f"sequence length {len(sequence)} does not match model over "
                f"{self.log_probs.shape[0]} positions"
            )
        position = (lambda i: i + 1) if self.per_position else (lambda i: None)
        return float(sum(self.log_prob(c, position(i)) for i, c in enumerate(sequence.letters)))

    def log_ratio(self, wild_type: Sequence, mutant: Sequence) -> float:
        """ln p(mutant)/p(wild_type); only differing positions contribute."""
        total = 0.0
        for pos in wild_type.differing_positions(mutant):
            arg = pos if self.per_position else None
            total += self.log_prob(mutant.letter_at(pos), arg) - self.log_prob(wild_type.letter_at(pos), arg)
        return total

    def mutation_log_ratio(self, mutations: tuple[Mutation, ...] | list[Mutation]) -> float:
        """Same ratio expressed on a mutation list instead of two sequences."""
        positions = [m.position for m in mutations]
        if len(set(positions)) != len(positions):
            raise ModelError("duplicate mutation positions")
        total = 0.0
        for m in mutations:
            arg = m.position if self.per_position else None
            total += self.log_prob(m.mt, arg) - self.log_prob(m.wt, arg)
        return total


def load_amino_acid_counts(path: str | Path, alphabet: Alphabet = CANONICAL) -> dict[str, float]:
    """Read an ``amino_acid,count`` CSV covering exactly the alphabet's letters.

    Lines starting with ``#`` are comments (used for provenance notes).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read counts file {path}: {exc}") from None
    rows = [
        (i, row)
        for i, row in enumerate(csv.reader(text.splitlines()), start=1)
        if row and not row[0].lstrip().startswith("#")
    ]
    if not rows or tuple(f.strip() for f in rows[0][1]) != COUNTS_HEADER:
        raise ModelError(f"counts file {path} must start with header {','.join(COUNTS_HEADER)}")
    counts: dict[str, float] = {}
    for lineno, row in rows[1:]:
        if len(row) != 2:
            raise ModelError(f"{path} line {lineno}: expected 2 fields, got {len(row)}")
        letter = row[0].strip()
        if letter not in alphabet:
            raise ModelError(f"{path} line {lineno}: letter {letter!r} not in alphabet")
        if letter in counts:
            raise ModelError(f"{path} line {lineno}: duplicate letter {letter!r}")
        try:
            value = float(row[1])
        except ValueError:
            raise ModelError(f"{path} line {lineno}: count {row[1]!r} is not a number") from None
        if not math.isfinite(value) or value < 0:
            raise ModelError(f"{path} line {lineno}: count must be finite and non-negative")
        counts[letter] = value
    missing = sorted(set(alphabet.letters) - set(counts))
    if missing:
        raise ModelError(f"counts file {path} is missing letters {missing}")
    return counts


@dataclass(frozen=True, eq=False)
class CandidateMarginal:
    """A normalized distribution over a finite candidate sequence set."""

    log_probs: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.log_probs:
            raise ModelError("candidate marginal must cover at least one sequence")
        values = np.array(list(self.log_probs.values()), dtype=float)
        if np.any(np.isnan(values)) or np.any(values == np.inf):
            raise ModelError("candidate marginal has non-finite log-probabilities")
        if np.all(values == -np.inf):
            raise ModelError("candidate marginal has no support")
        total = float(logsumexp(values))
        if abs(total) > NORMALIZATION_TOL:
            raise ModelError(f"candidate marginal off normalization by {total:.3e} in log space")

    @classmethod
    def uniform(cls, sequences: list[str] | tuple[str, ...]) -> "CandidateMarginal":
        seqs = list(dict.fromkeys(str(s) for s in sequences))
        if not seqs:
            raise ModelError("candidate marginal must cover at least one sequence")
        lp = -math.log(len(seqs))
        return cls({s: lp for s in seqs})

    @classmethod
    def from_probs(cls, probs: Mapping[str, float]) -> "CandidateMarginal":
        out: dict[str, float] = {}
        for seq, p in probs.items():
            if p < 0:
                raise ModelError(f"negative probability for {seq!r}")
            out[str(seq)] = math.log(p) if p > 0 else -math.inf
        return cls(out)

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(sorted(self.log_probs))

    def log_prob(self, sequence: Sequence | str) -> float:
        key = str(sequence)
        try:
            return float(self.log_probs[key])
        except KeyError:
            raise ModelError(f"sequence {key!r} is not in the candidate set") from None

    def log_ratio(self, wild_type: Sequence, mutant: Sequence) -> float:
        num = self.log_prob(mutant)
        den = self.log_prob(wild_type)
        if den == -math.inf:
            raise ModelError(f"wild-type sequence {str(wild_type)!r} has zero marginal probability")
        return num - den


def save_candidate_marginal(marginal: CandidateMarginal, path: str | Path) -> Path:
    path = Path(path)
    lines = [",".join(MARGINAL_HEADER)]
    for seq in marginal.support:
        lines.append(f"{seq},{format_float(marginal.log_probs[seq])}")
    path.write_text("\n".join(lines) + "\n")
    return path


def load_candidate_marginal(path: str | Path) -> CandidateMarginal:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read marginal file {path}: {exc}") from None
    rows = [(i, row) for i, row in enumerate(csv.reader(text.splitlines()), start=1) if row]
    if not rows or tuple(f.strip() for f in rows[0][1]) != MARGINAL_HEADER:
        raise ModelError(f"marginal file {path} must start with header {','.join(MARGINAL_HEADER)}")
    log_probs: dict[str, float] = {}
    for lineno, row in rows[1:]:
        if len(row) != 2:
            raise ModelError(f"{path} line {lineno}: expected 2 fields, got {len(row)}")
        seq = row[0].strip()
        if not seq:
            raise ModelError(f"{path} line {lineno}: empty sequence")
        if seq in log_probs:
            raise ModelError(f"{path} line {lineno}: duplicate sequence {seq!r}")
        try:
            log_probs[seq] = float(row[1])
        except ValueError:
            raise ModelError(f"{path} line {lineno}: log_prob {row[1]!r} is not a number") from None
    return CandidateMarginal(log_probs)

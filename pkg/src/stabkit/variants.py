"""Sequences, point mutations, and variant notation.

Notation is the usual ``<wt><position><mt>`` form with 1-based positions,
e.g. ``A23G`` means position 23 changes from A to G. Multi-mutant variants
are semicolon-separated lists (``L5V;A23G``). A variant with an empty
mutation list denotes the wild type itself.

Parsing failures are reported with distinct messages so callers can tell
a syntax problem from an out-of-range position from a wild-type letter
that disagrees with the reference sequence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .alphabet import CANONICAL, Alphabet, AminoAcid
from .errors import VariantError

_MUTATION_RE = re.compile(r"^([A-Za-z])([0-9]+)([A-Za-z])$")


@dataclass(frozen=True)
class Sequence:
    """An immutable residue string tied to the alphabet it was validated against."""

    letters: str
    alphabet: Alphabet = CANONICAL

    def __post_init__(self) -> None:
        if not self.letters:
            raise VariantError("sequence must be non-empty")
        for letter in self.letters:
            if letter not in self.alphabet:
                raise VariantError(
                    f"sequence letter {letter!r} is not in alphabet {''.join(self.alphabet.letters)}"
                )

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def letter_at(self, position: int) -> str:
        """Residue at a 1-based position."""
        if not 1 <= position <= len(self.letters):
            raise VariantError(
                f"position {position} out of range for sequence of length {len(self.letters)}"
            )
        return self.letters[position - 1]

    @property
    def residues(self) -> tuple[AminoAcid, ...]:
        return tuple(AminoAcid(c, self.alphabet) for c in self.letters)

    def differing_positions(self, other: "Sequence") -> tuple[int, ...]:
        """1-based positions where this sequence and ``other`` disagree."""
        if len(other) != len(self):
            raise VariantError(
                f"cannot compare sequences of different lengths ({len(self)} vs {len(other)})"
            )
        return tuple(i + 1 for i, (a, b) in enumerate(zip(self.letters, other.letters)) if a != b)


@dataclass(frozen=True, order=True)
class Mutation:
    """A single substitution at a 1-based position."""

    position: int
    wt: str
    mt: str

    def __post_init__(self) -> None:
        if self.position < 1:
            raise VariantError(f"mutation position must be >= 1, got {self.position}")
        for name, letter in (("wild-type", self.wt), ("mutant", self.mt)):
            if len(letter) != 1:
                raise VariantError(f"{name} letter must be a single character, got {letter!r}")
        if self.wt == self.mt:
            raise VariantError(
                f"mutation {self.wt}{self.position}{self.mt} is a no-op: wild-type and mutant letters are equal"
            )

    def notation(self) -> str:
        return f"{self.wt}{self.position}{self.mt}"

    def __str__(self) -> str:
        return self.notation()

    def inverse(self) -> "Mutation":
        return Mutation(self.position, self.mt, self.wt)


def parse_variant(text: str, wild_type: Sequence) -> Mutation:
    """Parse one substitution from notation and check it against ``wild_type``.

    Raises VariantError with a distinct message for each failure mode:
    malformed notation, letters outside the alphabet, no-op substitution,
    position out of range, and wild-type letter mismatch.
    """
    match = _MUTATION_RE.match(text.strip())
    if match is None:
        raise VariantError(f"malformed variant notation {text!r}; expected e.g. A23G")
    wt, pos_text, mt = match.group(1), match.group(2), match.group(3)
    for letter in (wt, mt):
        if letter not in wild_type.alphabet:
            raise VariantError(
                f"variant {text!r} uses letter {letter!r} outside alphabet "
                f"{''.join(wild_type.alphabet.letters)}"
            )
    position = int(pos_text)
    mutation = Mutation(position, wt, mt)
    if position > len(wild_type):
        raise VariantError(
            f"variant {text!r}: position {position} out of range for sequence of length {len(wild_type)}"
        )
    actual = wild_type.letter_at(position)
    if actual != wt:
        raise VariantError(
            f"variant {text!r}: wild-type letter mismatch, sequence has {actual!r} at position {position}"
        )
    return mutation


def parse_variant_list(text: str, wild_type: Sequence) -> tuple[Mutation, ...]:
    """Parse a semicolon-separated mutation list; empty text means wild type."""
    stripped = text.strip()
    if not stripped:
        return ()
    return tuple(parse_variant(part, wild_type) for part in stripped.split(";"))


def apply_mutations(wild_type: Sequence, mutations: Iterable[Mutation]) -> Sequence:
    """Apply substitutions to a wild-type sequence.

    Each mutation's wild-type letter must match the sequence and no two
    mutations may target the same position. An empty collection returns the
    wild type unchanged.
    """
    muts = tuple(mutations)
    positions = [m.position for m in muts]
    if len(set(positions)) != len(positions):
        dupes = sorted({p for p in positions if positions.count(p) > 1})
        raise VariantError(f"duplicate mutation positions {dupes}")
    letters = list(wild_type.letters)
    for m in muts:
        if m.position > len(letters):
            raise VariantError(
                f"mutation {m}: position {m.position} out of range for sequence of length {len(letters)}"
            )
        if m.mt not in wild_type.alphabet:
            raise VariantError(
                f"mutation {m}: mutant letter {m.mt!r} outside alphabet "
                f"{''.join(wild_type.alphabet.letters)}"
            )
        if letters[m.position - 1] != m.wt:
            raise VariantError(
                f"mutation {m}: wild-type letter mismatch, sequence has "
                f"{letters[m.position - 1]!r} at position {m.position}"
            )
        letters[m.position - 1] = m.mt
    return Sequence("".join(letters), wild_type.alphabet)


@dataclass(frozen=True)
class VariantSpec:
    """A wild-type sequence plus a set of substitutions, kept sorted by position."""

    wild_type: Sequence
    mutations: tuple[Mutation, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.mutations, key=lambda m: m.position))
        object.__setattr__(self, "mutations", ordered)
        # apply_mutations performs the full validity check (bounds, wt match, dupes)
        self.mutant_sequence()

    @classmethod
    def parse(cls, wild_type: Sequence, text: str) -> "VariantSpec":
        return cls(wild_type, parse_variant_list(text, wild_type))

    def mutant_sequence(self) -> Sequence:
        return apply_mutations(self.wild_type, self.mutations)

    def notation(self) -> str:
        return ";".join(m.notation() for m in self.mutations)

    @property
    def n_mutations(self) -> int:
        return len(self.mutations)

    def is_wild_type(self) -> bool:
        return not self.mutations

    def __str__(self) -> str:
        return self.notation() if self.mutations else "<wild type>"

"""Residue alphabets.

Sequences in this package are plain strings of one-letter codes validated
against an :class:`Alphabet`. Two alphabets are built in: the 20 canonical
amino acids and the two-letter H/P alphabet used by the lattice model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import VariantError


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of single-character residue codes."""

    letters: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.letters:
            raise VariantError("alphabet must contain at least one letter")
        for letter in self.letters:
            if len(letter) != 1 or not letter.isupper():
                raise VariantError(f"alphabet letter {letter!r} is not a single uppercase character")
        if len(set(self.letters)) != len(self.letters):
            raise VariantError("alphabet letters must be distinct")

    def __contains__(self, letter: object) -> bool:
        return letter in self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def index(self, letter: str) -> int:
        """Position of ``letter`` in this alphabet, or VariantError."""
        try:
            return self.letters.index(letter)
        except ValueError:
            raise VariantError(f"letter {letter!r} is not in alphabet {''.join(self.letters)}") from None


CANONICAL = Alphabet(tuple("ACDEFGHIKLMNPQRSTVWY"))
HP = Alphabet(("H", "P"))

_NAMED = {"canonical": CANONICAL, "hp": HP}


def named_alphabet(name: str) -> Alphabet:
    """Look up a built-in alphabet by its configuration name."""
    try:
        return _NAMED[name]
    except KeyError:
        raise VariantError(f"unknown alphabet name {name!r}; expected one of {sorted(_NAMED)}") from None


@dataclass(frozen=True)
class AminoAcid:
    """A single validated residue.

    Mostly useful at boundaries where a bare string would let typos through;
    internal code passes one-letter strings around once validated.
    """

    code: str
    alphabet: Alphabet = CANONICAL

    def __post_init__(self) -> None:
        if self.code not in self.alphabet:
            raise VariantError(
                f"letter {self.code!r} is not in alphabet {''.join(self.alphabet.letters)}"
            )

    def __str__(self) -> str:
        return self.code

"""Unfolded-state treatments.

Three ways to produce the unfolded term of a stability estimate:

1. Disordered-region amino-acid frequencies (:class:`IdpFrequencyModel`),
   a position-independent background model.
2. A short fragment scored in place of the full chain
   (:func:`unfolded_log_ratio_fragment`), default one flanking residue per
   side so a window of length 3.
3. An ingested Monte-Carlo ensemble of unfolded fragment conformations
   (:func:`unfolded_log_ratio_mc`), averaged with the log-mean-ratio.

All three return 0 for the identity variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .alphabet import CANONICAL, Alphabet
from .errors import ModelError, TableError, VariantError
from .estimators import EnsembleScore, EvalMode, DEFAULT_MODE, ensemble_score
from .freqmodel import FrequencyModel, load_amino_acid_counts
from .tables import LikelihoodTable
from .variants import Mutation, Sequence

DEFAULT_FRAGMENT_FLANK = 1
DEFAULT_PSEUDO_COUNT = 0.5

_BUNDLED_COUNTS = "idp_counts.csv"


@dataclass(frozen=True, eq=False)
class IdpFrequencyModel:
    """Position-independent frequencies from disordered regions, with provenance."""

    model: FrequencyModel
    provenance: str

    def __post_init__(self) -> None:
        if self.model.per_position:
            raise ModelError("IDP model must be position-independent")
        if not self.provenance:
            raise ModelError("IDP model requires a provenance string")

    @property
    def alphabet(self) -> Alphabet:
        return self.model.alphabet

    def log_prob(self, letter: str) -> float:
        return self.model.log_prob(letter)

    def log_ratio(self, wild_type: Sequence, mutant: Sequence) -> float:
        return self.model.log_ratio(wild_type, mutant)

    def mutation_log_ratio(self, mutations) -> float:
        return self.model.mutation_log_ratio(mutations)


def idp_model_from_counts(
    counts: Mapping[str, float],
    pseudo_count: float = DEFAULT_PSEUDO_COUNT,
    alphabet: Alphabet = CANONICAL,
    provenance: str = "user-supplied counts",
) -> IdpFrequencyModel:
    """Smoothed frequency model from disordered-region residue counts.

    p(letter) = (count + pseudo_count) / (total + A * pseudo_count) with A
    the alphabet size. Zero counts are fine as long as the pseudo-count is
    positive; all-zero counts with a zero pseudo-count are rejected.
    """
    return IdpFrequencyModel(FrequencyModel.from_counts(counts, alphabet, pseudo_count), provenance)


def load_idp_counts(path: str | Path) -> dict[str, float]:
    return load_amino_acid_counts(path, CANONICAL)


def default_idp_model(pseudo_count: float = DEFAULT_PSEUDO_COUNT) -> IdpFrequencyModel:
    """The bundled disordered-region frequency model.

    The shipped counts approximate published disordered-region composition;
    the file's comment header states the provenance. Supply your own counts
    file for production analyses.
    """
    ref = resources.files("stabkit").joinpath("data", _BUNDLED_COUNTS)
    with resources.as_file(ref) as path:
        counts = load_idp_counts(path)
        provenance = _read_provenance(path)
    return idp_model_from_counts(counts, pseudo_count, CANONICAL, provenance)


def _read_provenance(path: Path) -> str:
    lines = [
        line.lstrip("# ").strip()
        for line in path.read_text().splitlines()
        if line.startswith("#")
    ]
    return " ".join(lines) if lines else f"counts file {path.name}"


def unfolded_log_ratio_idp(model: IdpFrequencyModel, mutations: Iterable[Mutation]) -> float:
    """Sum of per-site frequency log-ratios over the mutated sites."""
    return model.mutation_log_ratio(tuple(mutations))


@dataclass(frozen=True)
class FragmentSpec:
    """A window around one position: [center - flank, center + flank], clamped."""

    center: int
    flank: int = DEFAULT_FRAGMENT_FLANK

    def __post_init__(self) -> None:
        if self.center < 1:
            raise VariantError(f"fragment center must be >= 1, got {self.center}")
        if self.flank < 0:
            raise VariantError(f"fragment flank must be >= 0, got {self.flank}")

    def window(self, sequence_length: int) -> tuple[int, int, bool]:
        """1-based inclusive window bounds and whether clamping occurred."""
        if self.center > sequence_length:
            raise VariantError(
                f"fragment center {self.center} out of range for sequence of length {sequence_length}"
            )
        lo = self.center - self.flank
        hi = self.center + self.flank
        clamped = lo < 1 or hi > sequence_length
        return max(lo, 1), min(hi, sequence_length), clamped

    def window_letters(self, sequence: Sequence) -> str:
        lo, hi, _ = self.window(len(sequence))
        return sequence.letters[lo - 1 : hi]


def fragment_structure_id(protein_id: str, center: int) -> str:
    return f"{protein_id}_frag_{center}"


def unfolded_log_ratio_fragment(
    fragment_table: LikelihoodTable,
    spec: FragmentSpec,
    wild_type: Sequence,
    mutant: Sequence,
    structure_id: str,
) -> float:
    """Window log-likelihood difference on a fragment structure.

    The window is cut from both sequences around ``spec.center``; the
    mutated site must fall inside it (sites outside would make the two
    windows identical while the sequences differ, which is a caller error).
    """
    if len(wild_type) != len(mutant):
        raise TableError(
            f"wild-type and mutant lengths differ ({len(wild_type)} vs {len(mutant)})"
        )
    lo, hi, _ = spec.window(len(wild_type))
    differing = wild_type.differing_positions(mutant)
    outside = [p for p in differing if not lo <= p <= hi]
    if outside:
        raise TableError(
            f"mutated positions {outside} fall outside fragment window [{lo}, {hi}]"
        )
    wt_window = spec.window_letters(wild_type)
    mt_window = spec.window_letters(mutant)
    if wt_window == mt_window:
        return 0.0
    return fragment_table.log_likelihood(structure_id, mt_window) - fragment_table.log_likelihood(
        structure_id, wt_window
    )


def unfolded_log_ratio_mc(
    mc_table: LikelihoodTable,
    wild_type: Sequence,
    mutant: Sequence,
    mode: EvalMode = DEFAULT_MODE,
    log_weights: dict[str, float] | None = None,
) -> EnsembleScore:
    """Log-mean-ratio over an ingested unfolded-conformation ensemble."""
    if mc_table.state != "U":
        raise TableError(
            f"MC unfolded table must be state 'U', got {mc_table.state!r} "
            f"(ensemble {mc_table.ensemble_id!r})"
        )
    return ensemble_score(mc_table, wild_type, mutant, mode, log_weights)

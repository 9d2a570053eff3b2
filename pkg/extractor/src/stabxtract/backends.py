"""Scoring backends behind one small protocol.

A backend maps a structure to per-position log-probability vectors over the
twenty amino acids; whole-sequence log-likelihoods are their sum, exact for
conditionally independent models. Backends needing checkpoint downloads are
resolved lazily and fail with diagnostics instead of degrading silently.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Protocol

from .errors import ModelError
from .structures import Structure, contact_counts

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
_LETTER_INDEX = {letter: i for i, letter in enumerate(ALPHABET)}

KYTE_DOOLITTLE = {
    "A": 1.8, "R": -4.5, "N": -3.5, "D": -3.5, "C": 2.5,
    "Q": -3.5, "E": -3.5, "G": -0.4, "H": -3.2, "I": 4.5,
    "L": 3.8, "K": -3.9, "M": 1.9, "F": 2.8, "P": -1.6,
    "S": -0.8, "T": -0.7, "W": -0.9, "Y": -1.3, "V": 4.2,
}


class ScoringBackend(Protocol):
    model_id: str
    version: str

    @property
    def parameter_digest(self) -> str: ...

    def position_log_probs(self, structure: Structure) -> tuple[tuple[float, ...], ...]: ...


def _log_softmax(logits: list[float]) -> tuple[float, ...]:
    shift = max(logits)
    log_norm = shift + math.log(sum(math.exp(v - shift) for v in logits))
    return tuple(v - log_norm for v in logits)


def sum_log_likelihood(log_probs: tuple[tuple[float, ...], ...], sequence: str) -> float:
    """Whole-sequence log-likelihood of a conditionally independent model."""
    return sum(row[_LETTER_INDEX[letter]] for row, letter in zip(log_probs, sequence))


@dataclass(frozen=True)
class ContactHydropathyModel:
    """Deterministic stand-in: buried positions prefer hydrophobic residues.

    Exists so jobs run end to end, reproducibly, with no checkpoint
    downloads. Scores carry no biophysical calibration; the one property it
    honestly has is preferring sequences whose hydropathy profile matches
    the structure's burial profile, which is what the shuffle control
    checks. Per-position logits are hydropathy times mean-centred contact
    count, so a structure with uniform burial scores every sequence of a
    composition identically.
    """

    scale: float = 0.25

    model_id = "contact-hydropathy-v1"
    version = "1"

    @property
    def parameter_digest(self) -> str:
        payload = json.dumps(
            {"scale": self.scale, "hydropathy": KYTE_DOOLITTLE}, sort_keys=True
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def position_log_probs(self, structure: Structure) -> tuple[tuple[float, ...], ...]:
        counts = contact_counts(structure)
        mean = sum(counts) / len(counts)
        rows = []
        for count in counts:
            burial = count - mean
            rows.append(
                _log_softmax([self.scale * burial * KYTE_DOOLITTLE[a] for a in ALPHABET])
            )
        return tuple(rows)


def _build_contact_model(checkpoint: str | None) -> ScoringBackend:
    if checkpoint is not None:
        raise ModelError(
            f"model {ContactHydropathyModel.model_id!r} takes no checkpoint suffix"
        )
    return ContactHydropathyModel()


def _load_esm_if(checkpoint: str | None) -> ScoringBackend:
    # recognized id, resolved lazily; in an environment without the package
    # or its checkpoint files this is a diagnostic, not a silent fallback
    try:
        import esm  # noqa: F401
        import torch  # noqa: F401
    except ImportError as exc:
        raise ModelError(
            "backend 'esm_if' needs the fair-esm package and its pretrained "
            f"checkpoint files ({exc}); install them, or run "
            f"{ContactHydropathyModel.model_id!r} for a checkpoint-free extraction"
        ) from None
    raise ModelError(
        "backend 'esm_if' is a named integration point in this build; register "
        "a ScoringBackend wired to your checkpoint "
        f"({checkpoint or 'none given'}) to use it"
    )


BACKEND_FACTORIES: dict[str, Callable[[str | None], ScoringBackend]] = {
    ContactHydropathyModel.model_id: _build_contact_model,
    "esm_if": _load_esm_if,
}


def resolve_backend(model_id: str) -> ScoringBackend:
    """Backend for a model id, with an optional ':<checkpoint>' suffix."""
    base, _, checkpoint = model_id.partition(":")
    factory = BACKEND_FACTORIES.get(base)
    if factory is None:
        raise ModelError(
            f"unknown model id {model_id!r}; known ids: {sorted(BACKEND_FACTORIES)}"
        )
    return factory(checkpoint or None)

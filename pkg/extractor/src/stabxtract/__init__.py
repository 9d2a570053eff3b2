"""Drive sequence-scoring models over structures to fill likelihood tables."""

__version__ = "0.1.0"

from .backends import ContactHydropathyModel, ScoringBackend, resolve_backend
from .errors import (
    ChainMismatchError,
    ExtractError,
    JobError,
    ModelError,
    StructureError,
)
from .extract import (
    ExtractionResult,
    extract_fragment_likelihoods,
    extract_likelihoods,
)
from .jobs import ExtractionJob, FragmentSpec, load_job
from .structures import Structure, parse_pdb

__all__ = [
    "ChainMismatchError",
    "ContactHydropathyModel",
    "ExtractError",
    "ExtractionJob",
    "ExtractionResult",
    "FragmentSpec",
    "JobError",
    "ModelError",
    "ScoringBackend",
    "Structure",
    "StructureError",
    "__version__",
    "extract_fragment_likelihoods",
    "extract_likelihoods",
    "load_job",
    "parse_pdb",
    "resolve_backend",
]

"""Extraction jobs: a published JSON schema plus the checks a schema cannot say.

A job names one model, one protein, one state, the structures to score, and
the sequences to score on them (wild type first). Relative paths resolve
against the job file's directory. The schema ships with the package as
``schema.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

import jsonschema

from .backends import ALPHABET
from .errors import JobError

SCHEMA = json.loads(files("stabxtract").joinpath("schema.json").read_text())
MODES = ("whole_sequence", "mutated_sites_only")


@dataclass(frozen=True)
class FragmentSpec:
    """One short window, centred on a residue, clamped at the termini."""

    center: int
    flank: int = 1


@dataclass(frozen=True)
class ExtractionJob:
    model: str
    protein_id: str
    state: str
    mode: str
    sequences: tuple[str, ...]
    output: Path
    ensemble_id: str
    structure_files: tuple[Path, ...] | None = None
    ensemble_dir: Path | None = None
    stride: int = 1
    fragments: tuple[FragmentSpec, ...] = field(default=())

    @property
    def wild_type(self) -> str:
        return self.sequences[0]


def load_job(path: str | Path) -> ExtractionJob:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise JobError(f"cannot read job file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise JobError(f"job file {path} is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "top level"
        raise JobError(f"job file {path}: {exc.message} (at {where})") from None

    sequences = tuple(raw["sequences"])
    length = len(sequences[0])
    for i, sequence in enumerate(sequences):
        bad = sorted(set(sequence) - set(ALPHABET))
        if bad:
            raise JobError(f"sequence {i} has letters outside the amino-acid alphabet: {bad}")
        if len(sequence) != length:
            raise JobError(f"sequence {i} has length {len(sequence)}; the wild type has {length}")
    if len(set(sequences)) != len(sequences):
        raise JobError("sequences must be distinct")

    base = path.parent
    structures = raw["structures"]
    if "files" in structures:
        structure_files: tuple[Path, ...] | None = tuple(base / f for f in structures["files"])
        ensemble_dir = None
        stride = 1
    else:
        structure_files = None
        ensemble_dir = base / structures["ensemble_dir"]
        stride = int(structures.get("stride", 1))

    fragments = tuple(
        FragmentSpec(int(f["center"]), int(f.get("flank", 1))) for f in raw.get("fragments", ())
    )
    mode = raw.get("mode", "whole_sequence")
    if fragments:
        if raw["state"] != "U":
            raise JobError("fragment jobs emit unfolded-state tables; set state to 'U'")
        if mode != "whole_sequence":
            raise JobError("fragment jobs score whole windows; per-site mode does not apply")
        centers = [f.center for f in fragments]
        if len(set(centers)) != len(centers):
            raise JobError("fragment centers must be distinct")
        for fragment in fragments:
            if fragment.center > length:
                raise JobError(
                    f"fragment center {fragment.center} outside chain of length {length}"
                )

    return ExtractionJob(
        model=raw["model"],
        protein_id=raw["protein_id"],
        state=raw["state"],
        mode=mode,
        sequences=sequences,
        output=base / raw["output"],
        ensemble_id=raw.get("ensemble_id", f"{raw['protein_id']}_{raw['state']}"),
        structure_files=structure_files,
        ensemble_dir=ensemble_dir,
        stride=stride,
        fragments=fragments,
    )

"""Turn jobs into interchange files plus a manifest.

Rows are sorted by key before writing, so neither input order nor internal
batching can reach the output bytes; manifests carry versions, parameter
digests, and checksums but no timestamps. Rerunning a job reproduces every
emitted file byte for byte.
"""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass
from importlib.metadata import version as library_version
from pathlib import Path

from . import __version__
from .backends import ALPHABET, ScoringBackend, resolve_backend, sum_log_likelihood
from .errors import ChainMismatchError, JobError, StructureError
from .jobs import ExtractionJob
from .structures import Structure, load_structures, sha256_of

# 13 significant digits: the interchange contract for float text
FLOAT_FMT = "{:.12e}"
TABLE_HEADER = ("ensemble_id", "state", "structure_id", "sequence", "log_likelihood")
MANIFEST_FORMAT = "stabxtract-manifest"
MANIFEST_VERSION = 1


def format_float(value: float) -> str:
    return FLOAT_FMT.format(value)


@dataclass(frozen=True)
class ExtractionResult:
    table: Path
    positions: Path | None
    manifest: Path
    n_rows: int


def positions_path(path: Path) -> Path:
    return path.with_name(path.stem + ".positions.csv")


def manifest_path(path: Path) -> Path:
    return path.with_name(path.stem + ".manifest.json")


def _write_csv(path: Path, header: tuple[str, ...], rows: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join([",".join(header), *rows]) + "\n")


def _structures_for(job: ExtractionJob) -> tuple[Structure, ...]:
    structures = load_structures(job.structure_files, job.ensemble_dir, job.stride)
    names = [s.name for s in structures]
    collisions = sorted({name for name in names if names.count(name) > 1})
    if collisions:
        raise StructureError(f"structure names collide: {collisions}")
    length = len(job.wild_type)
    for structure in structures:
        if structure.chain_length != length:
            raise ChainMismatchError(
                f"structure {structure.name} has {structure.chain_length} residues; "
                f"job sequences have {length}"
            )
    return structures


def _write_manifest(
    job: ExtractionJob,
    backend: ScoringBackend,
    structures: tuple[Structure, ...],
    n_rows: int,
    positions: Path | None,
    fragments: list[dict] | None,
) -> Path:
    payload = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "model": {
            "id": job.model,
            "backend_version": backend.version,
            "parameter_digest": backend.parameter_digest,
        },
        "job": {
            "protein_id": job.protein_id,
            "state": job.state,
            "mode": job.mode,
            "ensemble_id": job.ensemble_id,
            "n_sequences": len(job.sequences),
            "wild_type": job.wild_type,
            "stride": job.stride if job.ensemble_dir is not None else None,
        },
        "structures": sorted(
            ({"name": s.name, "sha256": sha256_of(s.path)} for s in structures),
            key=lambda entry: entry["name"],
        ),
        "output": {
            "table": job.output.name,
            "rows": n_rows,
            "sha256": sha256_of(job.output),
            "positions": positions.name if positions is not None else None,
            "positions_sha256": sha256_of(positions) if positions is not None else None,
        },
        "fragments": fragments,
        "libraries": {
            "python": platform.python_version(),
            "jsonschema": library_version("jsonschema"),
            "stabxtract": __version__,
        },
    }
    path = manifest_path(job.output)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def extract_likelihoods(job: ExtractionJob) -> ExtractionResult:
    """Score every job sequence on every structure and write one table.

    Structure ids are ``<protein_id>_<file stem>``. In mutated-sites-only
    mode the per-position vectors also go to the ``.positions.csv``
    companion, one normalized row per structure and position.
    """
    if job.fragments:
        raise JobError("job carries fragments; use extract_fragment_likelihoods")
    backend = resolve_backend(job.model)
    structures = _structures_for(job)
    entries: dict[tuple[str, str], float] = {}
    position_rows: dict[tuple[str, int], tuple[float, ...]] = {}
    for structure in structures:
        sid = f"{job.protein_id}_{structure.name}"
        log_probs = backend.position_log_probs(structure)
        for sequence in job.sequences:
            entries[(sid, sequence)] = sum_log_likelihood(log_probs, sequence)
        if job.mode == "mutated_sites_only":
            for position, row in enumerate(log_probs, start=1):
                position_rows[(sid, position)] = row
    table_rows = [
        f"{job.ensemble_id},{job.state},{sid},{sequence},{format_float(value)}"
        for (sid, sequence), value in sorted(entries.items())
    ]
    _write_csv(job.output, TABLE_HEADER, table_rows)
    positions = None
    if position_rows:
        positions = positions_path(job.output)
        rows = [
            f"{sid},{position}," + ",".join(format_float(v) for v in vector)
            for (sid, position), vector in sorted(position_rows.items())
        ]
        _write_csv(positions, ("structure_id", "position") + tuple(ALPHABET), rows)
    manifest = _write_manifest(job, backend, structures, len(table_rows), positions, None)
    return ExtractionResult(job.output, positions, manifest, len(table_rows))


def extract_fragment_likelihoods(job: ExtractionJob) -> ExtractionResult:
    """Score short windows around each fragment center and write one U table.

    Rows are keyed ``<protein_id>_frag_<center>`` with the window substring
    as the sequence; identical windows of different variants collapse to one
    row. Windows clamp at the termini and the manifest flags every clamp.
    """
    if not job.fragments:
        raise JobError("job has no fragments; use extract_likelihoods")
    backend = resolve_backend(job.model)
    structures = _structures_for(job)
    if len(structures) != 1:
        raise JobError(f"fragment jobs take exactly one structure, got {len(structures)}")
    structure = structures[0]
    log_probs = backend.position_log_probs(structure)
    length = structure.chain_length
    entries: dict[tuple[str, str], float] = {}
    windows = []
    for fragment in sorted(job.fragments, key=lambda f: f.center):
        lo = max(1, fragment.center - fragment.flank)
        hi = min(length, fragment.center + fragment.flank)
        windows.append(
            {
                "center": fragment.center,
                "flank": fragment.flank,
                "window": [lo, hi],
                "clamped": lo != fragment.center - fragment.flank
                or hi != fragment.center + fragment.flank,
            }
        )
        sid = f"{job.protein_id}_frag_{fragment.center}"
        for sequence in job.sequences:
            window_letters = sequence[lo - 1 : hi]
            entries[(sid, window_letters)] = sum_log_likelihood(
                log_probs[lo - 1 : hi], window_letters
            )
    table_rows = [
        f"{job.ensemble_id},{job.state},{sid},{window_letters},{format_float(value)}"
        for (sid, window_letters), value in sorted(entries.items())
    ]
    _write_csv(job.output, TABLE_HEADER, table_rows)
    manifest = _write_manifest(job, backend, structures, len(table_rows), None, windows)
    return ExtractionResult(job.output, None, manifest, len(table_rows))

"""Experimental stability datasets.

The on-disk format is a CSV with header::

    protein_id,wild_type_sequence,mutations,target,censored

``mutations`` is a semicolon-joined variant notation list (empty means the
wild type itself), ``target`` the measured value, ``censored`` 0 or 1 for
records that are bounds rather than measurements (for example variants too
destabilized to quantify, capped at a limit value).

Targets are stored in folding orientation: larger = more destabilizing.
Files whose values use the unfolding convention are negated on load via
``sign_convention="unfolding"``.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .alphabet import CANONICAL, Alphabet
from .errors import DatasetError
from .tables import format_float
from .variants import Sequence, VariantSpec

DATASET_HEADER = ("protein_id", "wild_type_sequence", "mutations", "target", "censored")
SIGN_CONVENTIONS = ("folding", "unfolding")
DEFAULT_MIN_VARIANTS = 20


@dataclass(frozen=True)
class DatasetRecord:
    """One measured variant."""

    protein_id: str
    variant: VariantSpec
    target: float
    censored: bool = False

    def __post_init__(self) -> None:
        if not self.protein_id:
            raise DatasetError("protein_id must be non-empty")
        if not math.isfinite(self.target):
            raise DatasetError(f"target for {self.protein_id}/{self.variant} is not finite")

    @property
    def key(self) -> tuple[str, str]:
        return (self.protein_id, self.variant.notation())


@dataclass(frozen=True, eq=False)
class ExperimentalDataset:
    """An ordered collection of records plus the reporting threshold."""

    records: tuple[DatasetRecord, ...]
    min_variants_per_protein: int = DEFAULT_MIN_VARIANTS

    def __post_init__(self) -> None:
        if self.min_variants_per_protein < 1:
            raise DatasetError("min_variants_per_protein must be >= 1")
        seen: dict[tuple[str, str], int] = {}
        wild_types: dict[str, str] = {}
        for i, record in enumerate(self.records):
            if record.key in seen:
                raise DatasetError(f"duplicate record for {record.key[0]}/{record.key[1] or '<wild type>'}")
            seen[record.key] = i
            wt = record.variant.wild_type.letters
            prior = wild_types.setdefault(record.protein_id, wt)
            if prior != wt:
                raise DatasetError(
                    f"protein {record.protein_id!r} has inconsistent wild-type sequences"
                )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def protein_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.protein_id for r in self.records}))

    def wild_type(self, protein_id: str) -> Sequence:
        for record in self.records:
            if record.protein_id == protein_id:
                return record.variant.wild_type
        raise DatasetError(f"unknown protein_id {protein_id!r}")

    def for_protein(self, protein_id: str) -> tuple[DatasetRecord, ...]:
        if protein_id not in {r.protein_id for r in self.records}:
            raise DatasetError(f"unknown protein_id {protein_id!r}")
        return tuple(r for r in self.records if r.protein_id == protein_id)

    def n_censored(self) -> int:
        return sum(1 for r in self.records if r.censored)

    def filtered(
        self,
        *,
        include_censored: bool = True,
        single_substitutions_only: bool = False,
    ) -> "ExperimentalDataset":
        records = tuple(
            r
            for r in self.records
            if (include_censored or not r.censored)
            and (not single_substitutions_only or r.variant.n_mutations == 1)
        )
        if not records:
            raise DatasetError("filtering removed every record")
        return ExperimentalDataset(records, self.min_variants_per_protein)

    def reportable_proteins(self) -> tuple[str, ...]:
        """Proteins meeting the minimum record count for per-protein rows."""
        counts = Counter(r.protein_id for r in self.records)
        return tuple(sorted(p for p, n in counts.items() if n >= self.min_variants_per_protein))

    def as_multiset(self) -> Counter:
        """Order-independent content view: equal datasets have equal multisets."""
        return Counter((r.protein_id, r.variant.notation(), r.target, r.censored) for r in self.records)


def load_experimental_dataset(
    path: str | Path,
    sign_convention: str = "folding",
    min_variants_per_protein: int = DEFAULT_MIN_VARIANTS,
    *,
    single_substitutions_only: bool = False,
    alphabet: Alphabet = CANONICAL,
) -> ExperimentalDataset:
    """Load and validate a dataset CSV.

    ``sign_convention="unfolding"`` negates targets so that stored values
    are always in folding orientation. ``single_substitutions_only`` drops
    multi-mutant records at load, mirroring the usual curation step.
    """
    if sign_convention not in SIGN_CONVENTIONS:
        raise DatasetError(
            f"sign_convention must be one of {SIGN_CONVENTIONS}, got {sign_convention!r}"
        )
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset file {path}: {exc}") from None
    rows = [(i, row) for i, row in enumerate(csv.reader(text.splitlines()), start=1) if row]
    if not rows:
        raise DatasetError(f"dataset file {path} is empty")
    header_line, header = rows[0]
    if tuple(f.strip() for f in header) != DATASET_HEADER:
        raise DatasetError(
            f"{path} line {header_line}: header {header!r} does not match {list(DATASET_HEADER)!r}"
        )
    records: list[DatasetRecord] = []
    wild_types: dict[str, Sequence] = {}
    for lineno, row in rows[1:]:
        if len(row) != len(DATASET_HEADER):
            raise DatasetError(f"{path} line {lineno}: expected {len(DATASET_HEADER)} fields, got {len(row)}")
        protein_id, wt_text, mutations_text, target_text, censored_text = (f.strip() for f in row)
        if not protein_id:
            raise DatasetError(f"{path} line {lineno}: empty protein_id")
        try:
            wild_type = wild_types.get(protein_id) or Sequence(wt_text, alphabet)
        except Exception as exc:
            raise DatasetError(f"{path} line {lineno}: bad wild-type sequence: {exc}") from None
        if protein_id in wild_types and wild_types[protein_id].letters != wt_text:
            raise DatasetError(
                f"{path} line {lineno}: protein {protein_id!r} has inconsistent wild-type sequences"
            )
        wild_types.setdefault(protein_id, wild_type)
        try:
            variant = VariantSpec.parse(wild_type, mutations_text)
        except Exception as exc:
            raise DatasetError(f"{path} line {lineno}: {exc}") from None
        try:
            target = float(target_text)
        except ValueError:
            raise DatasetError(f"{path} line {lineno}: target {target_text!r} is not a number") from None
        if not math.isfinite(target):
            raise DatasetError(f"{path} line {lineno}: target {target_text!r} is not finite")
        if censored_text not in ("0", "1"):
            raise DatasetError(f"{path} line {lineno}: censored must be 0 or 1, got {censored_text!r}")
        if sign_convention == "unfolding":
            target = -target
        if single_substitutions_only and variant.n_mutations != 1:
            continue
        records.append(DatasetRecord(protein_id, variant, target, censored_text == "1"))
    # a header with no data rows is a valid empty dataset
    return ExperimentalDataset(tuple(records), min_variants_per_protein)


def save_experimental_dataset(dataset: ExperimentalDataset, path: str | Path) -> Path:
    """Write records in canonical sorted order, folding orientation."""
    path = Path(path)
    lines = [",".join(DATASET_HEADER)]
    for record in sorted(dataset.records, key=lambda r: r.key):
        lines.append(
            f"{record.protein_id},{record.variant.wild_type.letters},"
            f"{record.variant.notation()},{format_float(record.target)},{int(record.censored)}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path

"""Structure inputs: CA traces from PDB files, single files or ensembles.

Only the first chain of the first model is read, one CA per residue,
alternate location A when present. That is all the scoring backends need;
anything richer belongs to the models themselves.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import StructureError

THREE_TO_ONE = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C",
    "GLN": "Q", "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I",
    "LEU": "L", "LYS": "K", "MET": "M", "PHE": "F", "PRO": "P",
    "SER": "S", "THR": "T", "TRP": "W", "TYR": "Y", "VAL": "V",
}

CONTACT_CUTOFF = 8.0
CONTACT_MIN_SEPARATION = 3


@dataclass(frozen=True)
class Structure:
    """One chain's CA trace with the name it is referred to by."""

    name: str
    path: Path
    residues: str
    coords: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if len(self.residues) != len(self.coords):
            raise StructureError(
                f"{self.path}: {len(self.residues)} residues but {len(self.coords)} coordinates"
            )

    @property
    def chain_length(self) -> int:
        return len(self.residues)


def parse_pdb(path: str | Path) -> Structure:
    """CA trace of the first chain, first model.

    Fixed-column records only; alternate locations other than blank or A
    are skipped, as are later chains and later models.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StructureError(f"cannot read structure {path}: {exc}") from None
    residues: list[str] = []
    coords: list[tuple[float, float, float]] = []
    chain: str | None = None
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[:6].strip()
        if record == "ENDMDL":
            break
        if record != "ATOM":
            continue
        if line[12:16].strip() != "CA":
            continue
        if line[16] not in (" ", "A", ""):
            continue
        if chain is None:
            chain = line[21]
        elif line[21] != chain:
            continue
        residue_key = (line[22:26].strip(), line[26:27])
        if residue_key in seen:
            continue
        seen.add(residue_key)
        resname = line[17:20].strip()
        letter = THREE_TO_ONE.get(resname)
        if letter is None:
            raise StructureError(f"{path} line {lineno}: unknown residue name {resname!r}")
        try:
            point = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError:
            raise StructureError(f"{path} line {lineno}: malformed coordinates") from None
        residues.append(letter)
        coords.append(point)
    if not residues:
        raise StructureError(f"{path}: no CA atoms found")
    return Structure(path.stem, path, "".join(residues), tuple(coords))


def load_structures(files: tuple[Path, ...] | None, ensemble_dir: Path | None, stride: int) -> tuple[Structure, ...]:
    """Parse the listed files, or every stride-th PDB of a directory in name order."""
    if ensemble_dir is not None:
        if not ensemble_dir.is_dir():
            raise StructureError(f"ensemble directory {ensemble_dir} does not exist")
        paths = sorted(ensemble_dir.glob("*.pdb"))[::stride]
        if not paths:
            raise StructureError(f"ensemble directory {ensemble_dir} has no PDB files at stride {stride}")
    else:
        assert files is not None
        paths = list(files)
    return tuple(parse_pdb(p) for p in paths)


def contact_counts(structure: Structure) -> tuple[int, ...]:
    """Per-residue CA contact count: pairs within 8 A at sequence separation >= 3.

    Quadratic scan; chains here are short enough that nothing cleverer pays.
    """
    counts = [0] * structure.chain_length
    for i in range(structure.chain_length):
        for j in range(i + CONTACT_MIN_SEPARATION, structure.chain_length):
            if math.dist(structure.coords[i], structure.coords[j]) <= CONTACT_CUTOFF:
                counts[i] += 1
                counts[j] += 1
    return tuple(counts)


def sha256_of(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

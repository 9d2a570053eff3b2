"""Shared builders: synthetic CA traces on a 3.8 A grid and the PDB
serialization the parser reads back exactly."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from stabxtract.structures import THREE_TO_ONE, Structure, contact_counts

ONE_TO_THREE = {one: three for three, one in THREE_TO_ONE.items()}


def snake_coords(rows, cols, spacing=3.8):
    """Serpentine path over a rows x cols grid, one point per residue."""
    points = []
    for r in range(rows):
        cells = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
        for c in cells:
            points.append((c * spacing, r * spacing, 0.0))
    return tuple(points)


def adapted_native(coords):
    """Sequence matched to burial: hydrophobic letters on the more contacted
    half of the chain, polar letters on the rest. The cycling keeps the
    composition varied so shuffles genuinely rearrange it."""
    probe = Structure("probe", Path("probe"), "A" * len(coords), tuple(coords))
    counts = contact_counts(probe)
    order = sorted(range(len(counts)), key=lambda i: (counts[i], i))
    buried = set(order[len(order) // 2 :])
    hydrophobic, polar = "IVLFM", "KEDSQ"
    letters = []
    n_h = n_p = 0
    for i in range(len(counts)):
        if i in buried:
            letters.append(hydrophobic[n_h % len(hydrophobic)])
            n_h += 1
        else:
            letters.append(polar[n_p % len(polar)])
            n_p += 1
    return "".join(letters)


def pdb_text(coords, residues, chain="A"):
    lines = []
    for serial, ((x, y, z), one) in enumerate(zip(coords, residues), start=1):
        three = ONE_TO_THREE[one]
        lines.append(
            f"ATOM  {serial:5d}  CA  {three} {chain}{serial:4d}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"


def write_pdb(path, coords, residues, chain="A"):
    path.write_text(pdb_text(coords, residues, chain=chain))
    return path


def write_job(path, **fields):
    path.write_text(json.dumps(fields))
    return path


@pytest.fixture
def fold(tmp_path):
    """20-residue 4x5 grid snake with its burial-adapted sequence."""
    coords = snake_coords(4, 5)
    native = adapted_native(coords)
    pdb = write_pdb(tmp_path / "fold.pdb", coords, native)
    return pdb, native

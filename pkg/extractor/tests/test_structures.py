"""PDB parsing and contact geometry against the hand-worked grid case."""

import hashlib
from pathlib import Path

import pytest

from conftest import pdb_text, snake_coords, write_pdb
from oracles import (
    SNAKE_CONTACT_COUNTS,
    SNAKE_CONTACT_PAIRS,
    SNAKE_COORDS,
    contact_pairs_by_hand,
)
from stabxtract.errors import StructureError
from stabxtract.structures import (
    CONTACT_CUTOFF,
    CONTACT_MIN_SEPARATION,
    Structure,
    contact_counts,
    load_structures,
    parse_pdb,
    sha256_of,
)


def test_round_trip_through_the_fixed_column_format(tmp_path):
    residues = "KIVEDS"
    path = write_pdb(tmp_path / "s.pdb", SNAKE_COORDS, residues)
    structure = parse_pdb(path)
    assert structure.name == "s"
    assert structure.residues == residues
    assert structure.chain_length == 6
    assert structure.coords == SNAKE_COORDS


def test_snake_contacts_match_the_hand_worked_pairs(tmp_path):
    path = write_pdb(tmp_path / "s.pdb", SNAKE_COORDS, "KIVEDS")
    structure = parse_pdb(path)
    assert contact_counts(structure) == SNAKE_CONTACT_COUNTS
    by_hand = contact_pairs_by_hand(SNAKE_COORDS, CONTACT_CUTOFF, CONTACT_MIN_SEPARATION)
    assert tuple(by_hand) == SNAKE_CONTACT_PAIRS


def test_contact_counts_agree_with_the_quadratic_scan_on_a_larger_fold(tmp_path):
    coords = snake_coords(5, 6)
    structure = parse_pdb(write_pdb(tmp_path / "s.pdb", coords, "A" * 30))
    pairs = contact_pairs_by_hand(coords, CONTACT_CUTOFF, CONTACT_MIN_SEPARATION)
    expected = [0] * 30
    for i, j in pairs:
        expected[i] += 1
        expected[j] += 1
    assert contact_counts(structure) == tuple(expected)


def test_non_ca_atoms_are_ignored(tmp_path):
    lines = [
        "ATOM      1  N   ALA A   1       0.000   0.000   0.000  1.00  0.00           N",
        "ATOM      2  CA  ALA A   1       0.000   0.000   0.000  1.00  0.00           C",
        "ATOM      3  CB  ALA A   1       1.000   0.000   0.000  1.00  0.00           C",
        "ATOM      4  CA  GLY A   2       3.800   0.000   0.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    structure = parse_pdb(tmp_path / "s.pdb")
    assert structure.residues == "AG"


def test_only_the_first_chain_is_read(tmp_path):
    lines = [
        "ATOM      1  CA  ALA A   1       0.000   0.000   0.000  1.00  0.00           C",
        "ATOM      2  CA  GLY B   1       9.000   9.000   9.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    assert parse_pdb(tmp_path / "s.pdb").residues == "A"


def test_only_the_first_model_is_read(tmp_path):
    lines = [
        "ATOM      1  CA  ALA A   1       0.000   0.000   0.000  1.00  0.00           C",
        "ENDMDL",
        "ATOM      2  CA  GLY A   2       3.800   0.000   0.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    assert parse_pdb(tmp_path / "s.pdb").residues == "A"


def test_alternate_locations_keep_only_the_a_record(tmp_path):
    lines = [
        "ATOM      1  CA AALA A   1       0.000   0.000   0.000  0.50  0.00           C",
        "ATOM      2  CA BALA A   1       5.000   0.000   0.000  0.50  0.00           C",
        "ATOM      3  CA  GLY A   2       3.800   0.000   0.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    structure = parse_pdb(tmp_path / "s.pdb")
    assert structure.residues == "AG"
    assert structure.coords[0] == (0.0, 0.0, 0.0)


def test_duplicate_residue_records_keep_the_first(tmp_path):
    lines = [
        "ATOM      1  CA  ALA A   1       0.000   0.000   0.000  1.00  0.00           C",
        "ATOM      2  CA  ALA A   1       5.000   0.000   0.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    structure = parse_pdb(tmp_path / "s.pdb")
    assert structure.chain_length == 1
    assert structure.coords[0] == (0.0, 0.0, 0.0)


def test_unknown_residue_name_is_fatal(tmp_path):
    lines = [
        "ATOM      1  CA  XYZ A   1       0.000   0.000   0.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    with pytest.raises(StructureError, match="unknown residue name 'XYZ'"):
        parse_pdb(tmp_path / "s.pdb")


def test_malformed_coordinates_are_fatal(tmp_path):
    lines = [
        "ATOM      1  CA  ALA A   1       0.000   xx.yy   0.000  1.00  0.00           C",
        "END",
    ]
    (tmp_path / "s.pdb").write_text("\n".join(lines) + "\n")
    with pytest.raises(StructureError, match="malformed coordinates"):
        parse_pdb(tmp_path / "s.pdb")


def test_file_without_ca_atoms_is_fatal(tmp_path):
    (tmp_path / "s.pdb").write_text("REMARK nothing here\nEND\n")
    with pytest.raises(StructureError, match="no CA atoms"):
        parse_pdb(tmp_path / "s.pdb")


def test_missing_file_is_fatal(tmp_path):
    with pytest.raises(StructureError, match="cannot read"):
        parse_pdb(tmp_path / "absent.pdb")


def test_ensemble_directory_loads_sorted_by_name(tmp_path):
    coords = SNAKE_COORDS
    for name in ("frame_02", "frame_10", "frame_01"):
        write_pdb(tmp_path / f"{name}.pdb", coords, "KIVEDS")
    structures = load_structures(None, tmp_path, 1)
    assert [s.name for s in structures] == ["frame_01", "frame_02", "frame_10"]


def test_stride_keeps_every_kth_frame(tmp_path):
    for k in range(6):
        write_pdb(tmp_path / f"frame_{k}.pdb", SNAKE_COORDS, "KIVEDS")
    structures = load_structures(None, tmp_path, 3)
    assert [s.name for s in structures] == ["frame_0", "frame_3"]


def test_empty_ensemble_directory_is_fatal(tmp_path):
    with pytest.raises(StructureError, match="no PDB files at stride 1"):
        load_structures(None, tmp_path, 1)


def test_missing_ensemble_directory_is_fatal(tmp_path):
    with pytest.raises(StructureError, match="does not exist"):
        load_structures(None, tmp_path / "absent", 1)


def test_explicit_file_list_preserves_the_given_order(tmp_path):
    b = write_pdb(tmp_path / "b.pdb", SNAKE_COORDS, "KIVEDS")
    a = write_pdb(tmp_path / "a.pdb", SNAKE_COORDS, "KIVEDS")
    structures = load_structures([b, a], None, 1)
    assert [s.name for s in structures] == ["b", "a"]


def test_checksum_matches_a_direct_digest(tmp_path):
    path = tmp_path / "s.pdb"
    path.write_text(pdb_text(SNAKE_COORDS, "KIVEDS"))
    assert sha256_of(path) == hashlib.sha256(path.read_bytes()).hexdigest()


def test_structure_rejects_mismatched_lengths():
    with pytest.raises(StructureError, match="3 residues but 2 coordinates"):
        Structure("s", Path("s"), "AGK", ((0.0, 0.0, 0.0), (3.8, 0.0, 0.0)))

"""End-to-end extraction: table contents, determinism, manifests, fragments."""

import hashlib
import json

import pytest

from conftest import snake_coords, write_job, write_pdb
from oracles import shuffle_composition
from stabxtract.backends import ContactHydropathyModel, sum_log_likelihood
from stabxtract.errors import ChainMismatchError, JobError, StructureError
from stabxtract.extract import (
    extract_fragment_likelihoods,
    extract_likelihoods,
)
from stabxtract.jobs import load_job
from stabxtract.structures import parse_pdb


def fold_job(tmp_path, fold, **overrides):
    pdb, native = fold
    mutant = native[:3] + ("I" if native[3] != "I" else "V") + native[4:]
    fields = {
        "model": "contact-hydropathy-v1",
        "protein_id": "probe",
        "state": "F",
        "structures": {"files": [pdb.name]},
        "sequences": [native, mutant],
        "output": "out/table.csv",
        **overrides,
    }
    return load_job(write_job(tmp_path / "job.json", **fields))


def test_one_structure_two_sequences_gives_two_scored_rows(tmp_path, fold):
    job = fold_job(tmp_path, fold)
    result = extract_likelihoods(job)
    assert result.n_rows == 2
    lines = result.table.read_text().splitlines()
    assert lines[0] == "ensemble_id,state,structure_id,sequence,log_likelihood"
    assert len(lines) == 3
    log_probs = ContactHydropathyModel().position_log_probs(parse_pdb(fold[0]))
    for line, sequence in zip(lines[1:], sorted(job.sequences)):
        ensemble, state, sid, seq, value = line.split(",")
        assert (ensemble, state, sid, seq) == ("probe_F", "F", "probe_fold", sequence)
        assert float(value) == pytest.approx(sum_log_likelihood(log_probs, sequence), abs=1e-11)


def test_every_sequence_is_scored_on_every_structure(tmp_path, fold):
    pdb, native = fold
    other = write_pdb(tmp_path / "alt.pdb", snake_coords(2, 10), native)
    job = fold_job(tmp_path, fold, structures={"files": [pdb.name, other.name]})
    result = extract_likelihoods(job)
    assert result.n_rows == 4
    sids = {line.split(",")[2] for line in result.table.read_text().splitlines()[1:]}
    assert sids == {"probe_fold", "probe_alt"}


def test_rerunning_a_job_reproduces_every_file_byte_for_byte(tmp_path, fold):
    job = fold_job(tmp_path, fold, mode="mutated_sites_only")
    first = extract_likelihoods(job)
    table, positions, manifest = (
        first.table.read_bytes(),
        first.positions.read_bytes(),
        first.manifest.read_bytes(),
    )
    second = extract_likelihoods(job)
    assert second.table.read_bytes() == table
    assert second.positions.read_bytes() == positions
    assert second.manifest.read_bytes() == manifest


def test_sequence_order_in_the_job_cannot_reach_the_output_bytes(tmp_path, fold):
    job = fold_job(tmp_path, fold)
    reversed_job = fold_job(tmp_path, fold, sequences=list(reversed(job.sequences)))
    assert extract_likelihoods(job).table.read_bytes() == extract_likelihoods(
        reversed_job
    ).table.read_bytes()


def test_whole_sequence_mode_writes_no_positions_companion(tmp_path, fold):
    result = extract_likelihoods(fold_job(tmp_path, fold))
    assert result.positions is None
    assert not (result.table.parent / "table.positions.csv").exists()


def test_per_site_mode_writes_normalized_position_vectors(tmp_path, fold):
    pdb, native = fold
    result = extract_likelihoods(fold_job(tmp_path, fold, mode="mutated_sites_only"))
    lines = result.positions.read_text().splitlines()
    header = lines[0].split(",")
    assert header[:2] == ["structure_id", "position"]
    assert "".join(header[2:]) == "ACDEFGHIKLMNPQRSTVWY"
    assert len(lines) == 1 + len(native)
    expected = ContactHydropathyModel().position_log_probs(parse_pdb(pdb))
    for position, line in enumerate(lines[1:], start=1):
        fields = line.split(",")
        assert fields[0] == "probe_fold"
        assert int(fields[1]) == position
        values = [float(v) for v in fields[2:]]
        assert max(
            abs(a - b) for a, b in zip(values, expected[position - 1])
        ) == pytest.approx(0.0, abs=1e-11)


def test_chain_length_mismatch_names_the_structure_and_both_lengths(tmp_path, fold):
    pdb, native = fold
    short = write_pdb(tmp_path / "short.pdb", snake_coords(2, 3), "KIVEDS")
    job = fold_job(tmp_path, fold, structures={"files": [short.name]})
    with pytest.raises(ChainMismatchError, match=r"short has 6 residues; job sequences have 20"):
        extract_likelihoods(job)


def test_colliding_structure_names_are_fatal(tmp_path, fold):
    pdb, native = fold
    nested = tmp_path / "other"
    nested.mkdir()
    twin = write_pdb(nested / "fold.pdb", snake_coords(4, 5), native)
    job = fold_job(tmp_path, fold, structures={"files": [pdb.name, f"other/{twin.name}"]})
    with pytest.raises(StructureError, match=r"names collide: \['fold'\]"):
        extract_likelihoods(job)


def test_plain_extraction_refuses_a_fragment_job(tmp_path, fold):
    job = fold_job(tmp_path, fold, state="U", fragments=[{"center": 3}])
    with pytest.raises(JobError, match="use extract_fragment_likelihoods"):
        extract_likelihoods(job)


def test_fragment_extraction_refuses_a_plain_job(tmp_path, fold):
    with pytest.raises(JobError, match="use extract_likelihoods"):
        extract_fragment_likelihoods(fold_job(tmp_path, fold))


def test_fragment_jobs_take_exactly_one_structure(tmp_path, fold):
    pdb, native = fold
    other = write_pdb(tmp_path / "alt.pdb", snake_coords(2, 10), native)
    job = fold_job(
        tmp_path,
        fold,
        state="U",
        structures={"files": [pdb.name, other.name]},
        fragments=[{"center": 3}],
    )
    with pytest.raises(JobError, match="exactly one structure, got 2"):
        extract_fragment_likelihoods(job)


def test_fragment_windows_score_the_window_letters(tmp_path, fold):
    pdb, native = fold
    mutant = native[:9] + ("K" if native[9] != "K" else "E") + native[10:]
    job = fold_job(
        tmp_path,
        fold,
        state="U",
        sequences=[native, mutant],
        fragments=[{"center": 10, "flank": 1}],
    )
    result = extract_fragment_likelihoods(job)
    assert result.n_rows == 2
    log_probs = ContactHydropathyModel().position_log_probs(parse_pdb(pdb))
    for line in result.table.read_text().splitlines()[1:]:
        ensemble, state, sid, window, value = line.split(",")
        assert (ensemble, state, sid) == ("probe_U", "U", "probe_frag_10")
        assert window in (native[8:11], mutant[8:11])
        assert float(value) == pytest.approx(
            sum_log_likelihood(log_probs[8:11], window), abs=1e-11
        )


def test_windows_clamp_at_the_termini_and_the_manifest_flags_it(tmp_path, fold):
    job = fold_job(
        tmp_path,
        fold,
        state="U",
        fragments=[{"center": 1, "flank": 1}, {"center": 10, "flank": 1}, {"center": 20, "flank": 2}],
    )
    result = extract_fragment_likelihoods(job)
    manifest = json.loads(result.manifest.read_text())
    assert manifest["fragments"] == [
        {"center": 1, "clamped": True, "flank": 1, "window": [1, 2]},
        {"center": 10, "clamped": False, "flank": 1, "window": [9, 11]},
        {"center": 20, "clamped": True, "flank": 2, "window": [18, 20]},
    ]


def test_variants_sharing_a_window_collapse_to_one_row(tmp_path, fold):
    pdb, native = fold
    mutant = native[:9] + ("K" if native[9] != "K" else "E") + native[10:]
    job = fold_job(
        tmp_path,
        fold,
        state="U",
        sequences=[native, mutant],
        fragments=[{"center": 10, "flank": 1}, {"center": 3, "flank": 1}],
    )
    result = extract_fragment_likelihoods(job)
    # both sequences agree on the window at 3, differ on the window at 10
    sids = [line.split(",")[2] for line in result.table.read_text().splitlines()[1:]]
    assert sids == ["probe_frag_10", "probe_frag_10", "probe_frag_3"]


def test_burial_adapted_native_outscores_its_shuffles_through_the_pipeline(tmp_path, fold):
    # shuffle control: same composition in scrambled order must lose on the
    # structure the original sequence was adapted to
    pdb, native = fold
    shuffles = [shuffle_composition(native, seed) for seed in range(10)]
    job = fold_job(tmp_path, fold, sequences=[native, *shuffles])
    result = extract_likelihoods(job)
    scores = {}
    for line in result.table.read_text().splitlines()[1:]:
        _, _, _, sequence, value = line.split(",")
        scores[sequence] = float(value)
    wins = sum(scores[native] > scores[s] for s in shuffles)
    assert wins >= 9


def test_manifest_records_model_inputs_and_output_checksums(tmp_path, fold):
    pdb, native = fold
    job = fold_job(tmp_path, fold, mode="mutated_sites_only")
    result = extract_likelihoods(job)
    manifest = json.loads(result.manifest.read_text())
    assert manifest["format"] == "stabxtract-manifest"
    assert manifest["version"] == 1
    assert manifest["model"]["id"] == "contact-hydropathy-v1"
    assert manifest["model"]["parameter_digest"] == ContactHydropathyModel().parameter_digest
    assert manifest["job"]["wild_type"] == native
    assert manifest["job"]["n_sequences"] == 2
    assert manifest["job"]["stride"] is None
    assert manifest["structures"] == [
        {"name": "fold", "sha256": hashlib.sha256(pdb.read_bytes()).hexdigest()}
    ]
    assert manifest["output"]["table"] == "table.csv"
    assert manifest["output"]["rows"] == 2
    assert manifest["output"]["sha256"] == hashlib.sha256(result.table.read_bytes()).hexdigest()
    assert manifest["output"]["positions"] == "table.positions.csv"
    assert (
        manifest["output"]["positions_sha256"]
        == hashlib.sha256(result.positions.read_bytes()).hexdigest()
    )
    assert manifest["fragments"] is None
    assert "timestamp" not in result.manifest.read_text()


def test_ensemble_jobs_record_their_stride(tmp_path, fold):
    pdb, native = fold
    frames = tmp_path / "frames"
    frames.mkdir()
    for k in range(4):
        write_pdb(frames / f"frame_{k}.pdb", snake_coords(4, 5), native)
    job = fold_job(tmp_path, fold, structures={"ensemble_dir": "frames", "stride": 2})
    result = extract_likelihoods(job)
    manifest = json.loads(result.manifest.read_text())
    assert manifest["job"]["stride"] == 2
    assert [s["name"] for s in manifest["structures"]] == ["frame_0", "frame_2"]
    assert result.n_rows == 4

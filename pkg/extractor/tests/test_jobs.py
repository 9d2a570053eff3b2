"""Job loading: schema enforcement plus the semantic checks behind it."""

import json

import pytest

from conftest import write_job
from stabxtract.errors import JobError
from stabxtract.jobs import FragmentSpec, load_job

BASE = {
    "model": "contact-hydropathy-v1",
    "protein_id": "villin",
    "state": "F",
    "structures": {"files": ["fold.pdb"]},
    "sequences": ["KIVEDS", "KIVEDD"],
    "output": "out/table.csv",
}


def job_file(tmp_path, **overrides):
    fields = {**BASE, **overrides}
    for key in [k for k, v in fields.items() if v is None]:
        del fields[key]
    return write_job(tmp_path / "job.json", **fields)


def test_minimal_job_loads_with_defaults(tmp_path):
    job = load_job(job_file(tmp_path))
    assert job.model == "contact-hydropathy-v1"
    assert job.protein_id == "villin"
    assert job.state == "F"
    assert job.mode == "whole_sequence"
    assert job.wild_type == "KIVEDS"
    assert job.ensemble_id == "villin_F"
    assert job.stride == 1
    assert job.fragments == ()


def test_paths_resolve_against_the_job_file_directory(tmp_path):
    nested = tmp_path / "jobs"
    nested.mkdir()
    job = load_job(write_job(nested / "job.json", **BASE))
    assert job.structure_files == (nested / "fold.pdb",)
    assert job.output == nested / "out" / "table.csv"


def test_missing_file_is_a_job_error(tmp_path):
    with pytest.raises(JobError, match="cannot read job file"):
        load_job(tmp_path / "absent.json")


def test_invalid_json_is_a_job_error(tmp_path):
    path = tmp_path / "job.json"
    path.write_text("{not json")
    with pytest.raises(JobError, match="not valid JSON"):
        load_job(path)


def test_missing_required_field_names_the_field(tmp_path):
    fields = dict(BASE)
    del fields["model"]
    with pytest.raises(JobError, match="model"):
        load_job(write_job(tmp_path / "job.json", **fields))


def test_unknown_field_is_rejected(tmp_path):
    with pytest.raises(JobError, match="surprise"):
        load_job(job_file(tmp_path, surprise=1))


def test_bad_state_is_rejected_by_the_schema(tmp_path):
    with pytest.raises(JobError, match="state"):
        load_job(job_file(tmp_path, state="folded"))


def test_bad_protein_id_is_rejected_by_the_schema(tmp_path):
    with pytest.raises(JobError, match="protein_id"):
        load_job(job_file(tmp_path, protein_id="a b"))


def test_structures_need_files_or_an_ensemble_dir(tmp_path):
    with pytest.raises(JobError, match="structures"):
        load_job(job_file(tmp_path, structures={}))


def test_files_and_ensemble_dir_are_mutually_exclusive(tmp_path):
    with pytest.raises(JobError, match="structures"):
        load_job(job_file(tmp_path, structures={"files": ["a.pdb"], "ensemble_dir": "frames"}))


def test_ensemble_dir_with_stride_loads(tmp_path):
    job = load_job(job_file(tmp_path, structures={"ensemble_dir": "frames", "stride": 4}))
    assert job.ensemble_dir == tmp_path / "frames"
    assert job.structure_files is None
    assert job.stride == 4


def test_zero_stride_is_rejected_by_the_schema(tmp_path):
    with pytest.raises(JobError, match="stride"):
        load_job(job_file(tmp_path, structures={"ensemble_dir": "frames", "stride": 0}))


def test_empty_sequence_list_is_rejected(tmp_path):
    with pytest.raises(JobError, match="sequences"):
        load_job(job_file(tmp_path, sequences=[]))


def test_letters_outside_the_alphabet_are_rejected(tmp_path):
    with pytest.raises(JobError, match=r"sequence 1.*\['X'\]"):
        load_job(job_file(tmp_path, sequences=["KIVEDS", "KIVEDX"]))


def test_length_mismatch_against_the_wild_type_is_rejected(tmp_path):
    with pytest.raises(JobError, match="sequence 1 has length 5; the wild type has 6"):
        load_job(job_file(tmp_path, sequences=["KIVEDS", "KIVED"]))


def test_duplicate_sequences_are_rejected(tmp_path):
    with pytest.raises(JobError, match="distinct"):
        load_job(job_file(tmp_path, sequences=["KIVEDS", "KIVEDS"]))


def test_explicit_ensemble_id_overrides_the_default(tmp_path):
    job = load_job(job_file(tmp_path, ensemble_id="md_run_7"))
    assert job.ensemble_id == "md_run_7"


def test_mutated_sites_mode_is_accepted(tmp_path):
    assert load_job(job_file(tmp_path, mode="mutated_sites_only")).mode == "mutated_sites_only"


def test_unknown_mode_is_rejected_by_the_schema(tmp_path):
    with pytest.raises(JobError, match="mode"):
        load_job(job_file(tmp_path, mode="sitewise"))


def test_fragment_specs_load_with_default_flank(tmp_path):
    job = load_job(
        job_file(
            tmp_path,
            state="U",
            fragments=[{"center": 3}, {"center": 5, "flank": 2}],
        )
    )
    assert job.fragments == (FragmentSpec(3, 1), FragmentSpec(5, 2))


def test_fragments_require_the_unfolded_state(tmp_path):
    with pytest.raises(JobError, match="set state to 'U'"):
        load_job(job_file(tmp_path, fragments=[{"center": 3}]))


def test_fragments_reject_per_site_mode(tmp_path):
    with pytest.raises(JobError, match="per-site mode does not apply"):
        load_job(
            job_file(tmp_path, state="U", mode="mutated_sites_only", fragments=[{"center": 3}])
        )


def test_duplicate_fragment_centers_are_rejected(tmp_path):
    with pytest.raises(JobError, match="centers must be distinct"):
        load_job(job_file(tmp_path, state="U", fragments=[{"center": 3}, {"center": 3, "flank": 2}]))


def test_fragment_center_beyond_the_chain_is_rejected(tmp_path):
    with pytest.raises(JobError, match="center 7 outside chain of length 6"):
        load_job(job_file(tmp_path, state="U", fragments=[{"center": 7}]))


def test_fragment_center_zero_is_rejected_by_the_schema(tmp_path):
    with pytest.raises(JobError, match="center"):
        load_job(job_file(tmp_path, state="U", fragments=[{"center": 0}]))


def test_schema_violation_reports_the_json_path(tmp_path):
    path = tmp_path / "job.json"
    fields = dict(BASE)
    fields["sequences"] = ["KIVEDS", 7]
    path.write_text(json.dumps(fields))
    with pytest.raises(JobError, match="sequences/1"):
        load_job(path)

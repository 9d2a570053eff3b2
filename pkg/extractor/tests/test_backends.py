"""Backend resolution and the contact-hydropathy scorer."""

import math
from pathlib import Path

import pytest

from conftest import adapted_native, snake_coords, write_pdb
from oracles import SNAKE_COORDS, log_softmax_by_hand, shuffle_composition
from stabxtract.backends import (
    ALPHABET,
    KYTE_DOOLITTLE,
    ContactHydropathyModel,
    resolve_backend,
    sum_log_likelihood,
)
from stabxtract.errors import ModelError
from stabxtract.structures import Structure, contact_counts, parse_pdb


def straight_chain(n):
    coords = tuple((i * 3.8, 0.0, 0.0) for i in range(n))
    return Structure("line", Path("line"), "A" * n, coords)


def test_known_id_resolves_to_the_contact_model():
    backend = resolve_backend("contact-hydropathy-v1")
    assert isinstance(backend, ContactHydropathyModel)
    assert backend.model_id == "contact-hydropathy-v1"


def test_unknown_id_fails_listing_the_known_ones():
    with pytest.raises(ModelError, match="unknown model id 'nonesuch'") as err:
        resolve_backend("nonesuch")
    assert "contact-hydropathy-v1" in str(err.value)
    assert "esm_if" in str(err.value)


def test_contact_model_rejects_a_checkpoint_suffix():
    with pytest.raises(ModelError, match="takes no checkpoint suffix"):
        resolve_backend("contact-hydropathy-v1:weights.pt")


def test_esm_backend_fails_with_install_or_registration_diagnostics():
    with pytest.raises(ModelError, match="fair-esm|integration point"):
        resolve_backend("esm_if:esm_if1_gvp4_t16_142M_UR50")


def test_every_position_row_is_a_normalized_distribution(tmp_path):
    structure = parse_pdb(write_pdb(tmp_path / "s.pdb", SNAKE_COORDS, "KIVEDS"))
    rows = ContactHydropathyModel().position_log_probs(structure)
    assert len(rows) == structure.chain_length
    for row in rows:
        assert len(row) == len(ALPHABET)
        assert abs(math.log(sum(math.exp(v) for v in row))) <= 1e-12


def test_position_rows_match_the_hand_softmax(tmp_path):
    structure = parse_pdb(write_pdb(tmp_path / "s.pdb", SNAKE_COORDS, "KIVEDS"))
    model = ContactHydropathyModel()
    counts = contact_counts(structure)
    mean = sum(counts) / len(counts)
    rows = model.position_log_probs(structure)
    for count, row in zip(counts, rows):
        logits = [model.scale * (count - mean) * KYTE_DOOLITTLE[a] for a in ALPHABET]
        by_hand = log_softmax_by_hand(logits)
        assert max(abs(a - b) for a, b in zip(row, by_hand)) <= 1e-12


def test_uniform_burial_means_uniform_letter_distributions():
    # a straight chain has no contacts at all, so burial carries no signal
    rows = ContactHydropathyModel().position_log_probs(straight_chain(8))
    uniform = -math.log(len(ALPHABET))
    assert all(abs(v - uniform) <= 1e-12 for row in rows for v in row)


def test_buried_positions_prefer_hydrophobic_letters(tmp_path):
    coords = snake_coords(4, 5)
    structure = parse_pdb(write_pdb(tmp_path / "s.pdb", coords, "A" * 20))
    counts = contact_counts(structure)
    mean = sum(counts) / len(counts)
    rows = ContactHydropathyModel().position_log_probs(structure)
    buried = max(range(20), key=counts.__getitem__)
    exposed = min(range(20), key=counts.__getitem__)
    assert counts[buried] > mean > counts[exposed]
    i_ile, i_lys = ALPHABET.index("I"), ALPHABET.index("K")
    assert rows[buried][i_ile] > rows[buried][i_lys]
    assert rows[exposed][i_lys] > rows[exposed][i_ile]


def test_whole_sequence_score_is_the_per_position_sum(tmp_path):
    structure = parse_pdb(write_pdb(tmp_path / "s.pdb", SNAKE_COORDS, "KIVEDS"))
    rows = ContactHydropathyModel().position_log_probs(structure)
    total = sum_log_likelihood(rows, "KIVEDS")
    by_hand = sum(rows[i][ALPHABET.index(c)] for i, c in enumerate("KIVEDS"))
    assert total == by_hand


def test_burial_adapted_sequence_beats_its_shuffles(fold):
    # the control a structure-aware score must pass: same composition,
    # scrambled order, scored on the structure the original belongs to
    pdb, native = fold
    rows = ContactHydropathyModel().position_log_probs(parse_pdb(pdb))
    native_score = sum_log_likelihood(rows, native)
    wins = sum(
        native_score > sum_log_likelihood(rows, shuffle_composition(native, seed))
        for seed in range(10)
    )
    assert wins >= 9


def test_parameter_digest_is_stable_and_tracks_parameters():
    assert ContactHydropathyModel().parameter_digest == ContactHydropathyModel().parameter_digest
    assert ContactHydropathyModel().parameter_digest != ContactHydropathyModel(scale=0.5).parameter_digest


def test_native_sequence_helpers_agree_with_the_scorer(fold):
    # conftest builds the native from the same burial signal the model
    # scores with, so the native must outscore any single polar flip at the
    # most buried site
    pdb, native = fold
    structure = parse_pdb(pdb)
    counts = contact_counts(structure)
    buried = max(range(structure.chain_length), key=counts.__getitem__)
    assert native[buried] in "IVLFM"
    rows = ContactHydropathyModel().position_log_probs(structure)
    flipped = native[:buried] + "K" + native[buried + 1 :]
    assert sum_log_likelihood(rows, native) > sum_log_likelihood(rows, flipped)


def test_adapted_native_is_deterministic():
    assert adapted_native(snake_coords(4, 5)) == adapted_native(snake_coords(4, 5))

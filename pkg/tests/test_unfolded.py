import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import LN_3

from stabkit.alphabet import CANONICAL, HP
from stabkit.errors import ModelError, TableError, VariantError
from stabkit.freqmodel import FrequencyModel
from stabkit.tables import LikelihoodTable
from stabkit.unfolded import (
    FragmentSpec,
    IdpFrequencyModel,
    default_idp_model,
    fragment_structure_id,
    idp_model_from_counts,
    unfolded_log_ratio_fragment,
    unfolded_log_ratio_idp,
    unfolded_log_ratio_mc,
)
from stabkit.variants import Mutation, Sequence


def canonical_probs(**overrides):
    rest = (1.0 - sum(overrides.values())) / (20 - len(overrides))
    return {letter: overrides.get(letter, rest) for letter in CANONICAL}


class TestIdpModel:
    def test_equal_counts_give_uniform(self):
        model = idp_model_from_counts({letter: 5 for letter in CANONICAL})
        for letter in CANONICAL:
            assert model.log_prob(letter) == pytest.approx(-math.log(20), rel=1e-14)

    def test_two_letter_normalization(self):
        model = idp_model_from_counts({"H": 3, "P": 1}, pseudo_count=0.0, alphabet=HP)
        assert model.log_prob("H") == pytest.approx(math.log(0.75), rel=1e-14)
        assert model.log_prob("P") == pytest.approx(math.log(0.25), rel=1e-14)

    def test_zero_counts_smooth_to_uniform(self):
        model = idp_model_from_counts({letter: 0 for letter in CANONICAL}, pseudo_count=0.5)
        assert model.log_prob("W") == pytest.approx(-math.log(20), rel=1e-14)

    def test_all_zero_counts_with_zero_pseudo_count_fail(self):
        with pytest.raises(ModelError, match="support"):
            idp_model_from_counts({letter: 0 for letter in CANONICAL}, pseudo_count=0.0)

    def test_per_position_models_are_rejected(self):
        per_pos = FrequencyModel(HP, np.log([[0.5, 0.5], [0.5, 0.5]]))
        with pytest.raises(ModelError, match="position-independent"):
            IdpFrequencyModel(per_pos, "test")

    def test_provenance_is_required(self):
        with pytest.raises(ModelError, match="provenance"):
            IdpFrequencyModel(FrequencyModel.uniform(), "")

    def test_normalization_invariant(self):
        model = idp_model_from_counts({"A": 10, "G": 2, "W": 1}, pseudo_count=0.5)
        total = math.fsum(math.exp(model.log_prob(letter)) for letter in CANONICAL)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestIdpLogRatio:
    def test_uniform_model_scores_zero(self):
        model = idp_model_from_counts({letter: 1 for letter in CANONICAL}, pseudo_count=0.0)
        assert unfolded_log_ratio_idp(model, [Mutation(3, "A", "W")]) == 0.0

    def test_empty_mutation_set_scores_zero(self):
        model = idp_model_from_counts({"A": 2, "G": 1}, pseudo_count=0.5)
        assert unfolded_log_ratio_idp(model, []) == 0.0

    def test_hand_computed_ratio(self):
        probs = canonical_probs(A=0.08, G=0.06)
        model = IdpFrequencyModel(FrequencyModel.from_probs(probs), "hand-built")
        got = unfolded_log_ratio_idp(model, [Mutation(1, "A", "G")])
        assert got == pytest.approx(math.log(0.75), abs=1e-12)

    @given(st.floats(0.02, 0.4), st.floats(0.02, 0.4))
    def test_antisymmetry_under_swap(self, p_a, p_g):
        model = IdpFrequencyModel(
            FrequencyModel.from_probs(canonical_probs(A=p_a, G=p_g)), "hand-built"
        )
        wt, mt = Sequence("AGA"), Sequence("GGA")
        assert model.log_ratio(wt, mt) == -model.log_ratio(mt, wt)


class TestDefaultIdpModel:
    def test_loads_and_normalizes(self):
        model = default_idp_model()
        total = math.fsum(math.exp(model.log_prob(letter)) for letter in CANONICAL)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_carries_provenance(self):
        model = default_idp_model()
        assert model.provenance
        assert model.provenance != "user-supplied counts"

    def test_is_not_uniform(self):
        model = default_idp_model()
        values = {model.log_prob(letter) for letter in CANONICAL}
        assert len(values) > 1


class TestFragmentSpec:
    def test_interior_window(self):
        lo, hi, clamped = FragmentSpec(5, flank=1).window(10)
        assert (lo, hi) == (4, 6)
        assert not clamped

    def test_terminal_clamping_is_recorded(self):
        lo, hi, clamped = FragmentSpec(1, flank=1).window(10)
        assert (lo, hi) == (1, 2)
        assert clamped
        lo, hi, clamped = FragmentSpec(10, flank=2).window(10)
        assert (lo, hi) == (8, 10)
        assert clamped

    def test_flank_zero_is_a_single_site(self):
        lo, hi, clamped = FragmentSpec(4, flank=0).window(10)
        assert (lo, hi) == (4, 4)
        assert not clamped

    def test_window_letters(self):
        seq = Sequence("ACDEFG")
        assert FragmentSpec(3, flank=1).window_letters(seq) == "CDE"
        assert FragmentSpec(1, flank=1).window_letters(seq) == "AC"

    def test_validation(self):
        with pytest.raises(VariantError, match="center"):
            FragmentSpec(0)
        with pytest.raises(VariantError, match="flank"):
            FragmentSpec(3, flank=-1)
        with pytest.raises(VariantError, match="out of range"):
            FragmentSpec(11).window(10)

    def test_structure_id_convention(self):
        assert fragment_structure_id("1abc", 7) == "1abc_frag_7"


class TestFragmentLogRatio:
    @staticmethod
    def table(entries):
        return LikelihoodTable("frag", "U", entries)

    def test_identity_variant_scores_zero(self):
        table = self.table({("p_frag_2", "ACD"): -4.0})
        wt = Sequence("ACDE")
        got = unfolded_log_ratio_fragment(table, FragmentSpec(2), wt, wt, "p_frag_2")
        assert got == 0.0

    def test_direct_subtraction(self):
        table = self.table({("p_frag_2", "ACD"): -4.0, ("p_frag_2", "AWD"): -5.0})
        wt = Sequence("ACDE")
        mt = Sequence("AWDE")
        got = unfolded_log_ratio_fragment(table, FragmentSpec(2), wt, mt, "p_frag_2")
        assert got == -1.0

    def test_flank_zero_single_residue(self):
        table = self.table({("p_frag_2", "C"): -1.5, ("p_frag_2", "W"): -2.0})
        wt = Sequence("ACDE")
        mt = Sequence("AWDE")
        got = unfolded_log_ratio_fragment(table, FragmentSpec(2, flank=0), wt, mt, "p_frag_2")
        assert got == -0.5

    def test_clamped_terminal_window(self):
        table = self.table({("p_frag_1", "AC"): -2.0, ("p_frag_1", "WC"): -3.5})
        wt = Sequence("ACDE")
        mt = Sequence("WCDE")
        got = unfolded_log_ratio_fragment(table, FragmentSpec(1), wt, mt, "p_frag_1")
        assert got == -1.5

    def test_mutation_outside_window_is_rejected(self):
        table = self.table({("p_frag_2", "ACD"): -4.0})
        wt = Sequence("ACDE")
        mt = Sequence("ACDW")
        with pytest.raises(TableError, match="outside fragment window"):
            unfolded_log_ratio_fragment(table, FragmentSpec(2), wt, mt, "p_frag_2")

    def test_missing_window_entry_is_reported(self):
        table = self.table({("p_frag_2", "ACD"): -4.0})
        wt = Sequence("ACDE")
        mt = Sequence("AWDE")
        with pytest.raises(TableError, match="no entry"):
            unfolded_log_ratio_fragment(table, FragmentSpec(2), wt, mt, "p_frag_2")

    def test_length_mismatch_is_rejected(self):
        table = self.table({("p_frag_2", "ACD"): -4.0})
        with pytest.raises(TableError, match="lengths differ"):
            unfolded_log_ratio_fragment(
                table, FragmentSpec(2), Sequence("ACDE"), Sequence("ACD"), "p_frag_2"
            )


class TestMcLogRatio:
    @staticmethod
    def table(entries, state="U"):
        return LikelihoodTable("mc", state, entries)

    def test_single_member_passes_through(self):
        table = self.table({("m1", "AC"): -3.0, ("m1", "WC"): -4.25})
        score = unfolded_log_ratio_mc(table, Sequence("AC"), Sequence("WC"))
        assert score.log_mean_ratio == pytest.approx(-1.25, abs=1e-15)
        assert score.n_samples == 1

    def test_identity_variant_scores_zero(self):
        table = self.table({("m1", "AC"): -3.0})
        score = unfolded_log_ratio_mc(table, Sequence("AC"), Sequence("AC"))
        assert score.log_mean_ratio == 0.0

    def test_two_members_average_as_ratios(self):
        table = self.table(
            {
                ("m1", "A"): -1.0,
                ("m1", "G"): -1.0 + math.log(2),
                ("m2", "A"): -1.0,
                ("m2", "G"): -1.0 + math.log(4),
            }
        )
        score = unfolded_log_ratio_mc(table, Sequence("A"), Sequence("G"))
        assert score.log_mean_ratio == pytest.approx(LN_3, abs=1e-14)

    def test_folded_table_is_rejected(self):
        table = self.table({("m1", "AC"): -3.0}, state="F")
        with pytest.raises(TableError, match="state 'U'"):
            unfolded_log_ratio_mc(table, Sequence("AC"), Sequence("WC"))

"""Stability estimators built on likelihood ratios.

Central quantity: for a sample x from a state ensemble, the per-sample
log-ratio is ln p(a'|x) - ln p(a|x) for mutant a' against wild type a. The
ensemble average is the log of the arithmetic mean of the ratios,

    log_mean_ratio = logsumexp(ratios) - ln n,

never the mean of the log-ratios; the difference between the two is the
Jensen gap and is carried along as a diagnostic. All estimates are oriented
so that larger values mean more destabilizing.

The estimator family:

- ``ddg_full``: unfolded log-mean-ratio minus folded log-mean-ratio. The
  marginal sequence probabilities cancel between the two terms, so no
  background-model correction appears.
- ``ddg_folded_only``: negative folded term; optionally corrected by a
  background sequence model. With a single structure and no correction this
  is the standard log-odds score.
- ``ddg_hybrid``: background-model unfolded term minus folded ensemble term.
- ``ddg_sequence_only``: both terms from background models.

``stability_from_pF`` and ``rank_transform`` convert between folding
probabilities, per-state pseudo free-energy changes, and stability scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence as SequenceOf

import numpy as np
from scipy.special import logsumexp

from .errors import EvaluationError, TableError
from .freqmodel import SequenceRatioModel
from .tables import LikelihoodTable
from .variants import Sequence

EvalMode = Literal["whole_sequence", "mutated_sites_only"]
DEFAULT_MODE: EvalMode = "whole_sequence"

_MODES = ("whole_sequence", "mutated_sites_only")


def _check_mode(mode: str) -> None:
    if mode not in _MODES:
        raise EvaluationError(f"unknown evaluation mode {mode!r}; expected one of {_MODES}")


def per_sample_log_ratio(
    table: LikelihoodTable,
    structure_id: str,
    wild_type: Sequence,
    mutant: Sequence,
    mode: EvalMode = DEFAULT_MODE,
) -> float:
    """ln p(mutant | structure) - ln p(wild_type | structure) for one sample.

    In whole-sequence mode the stored entries are used, falling back to
    summed per-position values when a whole-sequence entry is absent. In
    mutated-sites-only mode, per-position differences at the differing sites
    are summed; for a conditionally independent per-position model the two
    modes agree exactly.
    """
    _check_mode(mode)
    if len(wild_type) != len(mutant):
        raise TableError(
            f"wild-type and mutant lengths differ ({len(wild_type)} vs {len(mutant)})"
        )
    if str(wild_type) == str(mutant):
        return 0.0
    if mode == "mutated_sites_only":
        total = 0.0
        for pos in wild_type.differing_positions(mutant):
            total += table.position_log_prob(structure_id, pos, mutant.letter_at(pos))
            total -= table.position_log_prob(structure_id, pos, wild_type.letter_at(pos))
        return total
    if table.has_entry(structure_id, mutant) and table.has_entry(structure_id, wild_type):
        return table.log_likelihood(structure_id, mutant) - table.log_likelihood(structure_id, wild_type)
    if table.has_positions(structure_id):
        return table.sequence_log_likelihood_from_positions(
            structure_id, mutant
        ) - table.sequence_log_likelihood_from_positions(structure_id, wild_type)
    missing = mutant if not table.has_entry(structure_id, mutant) else wild_type
    raise TableError(
        f"table {table.ensemble_id!r} has no entry for structure {structure_id!r}, "
        f"sequence {str(missing)!r}, and no per-position fallback"
    )


@dataclass(frozen=True, eq=False)
class EnsembleScore:
    """Log-mean-ratio over one state's ensemble, with its ingredients."""

    state: str
    per_sample_log_ratios: tuple[float, ...]
    log_mean_ratio: float
    log_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.per_sample_log_ratios:
            raise EvaluationError("ensemble score needs at least one sample")
        if self.log_weights is not None and len(self.log_weights) != len(self.per_sample_log_ratios):
            raise EvaluationError("log_weights length does not match samples")

    @property
    def n_samples(self) -> int:
        return len(self.per_sample_log_ratios)

    @property
    def mean_log_ratio(self) -> float:
        """Mean of the log-ratios (diagnostics; differs from log_mean_ratio by the Jensen gap)."""
        deltas = np.asarray(self.per_sample_log_ratios)
        if self.log_weights is None:
            return float(np.mean(deltas))
        w = np.exp(np.asarray(self.log_weights) - logsumexp(np.asarray(self.log_weights)))
        return float(np.dot(w, deltas))

    @property
    def jensen_gap(self) -> float:
        return self.log_mean_ratio - self.mean_log_ratio


def log_mean_ratio(
    log_ratios: SequenceOf[float],
    state: str = "F",
    log_weights: SequenceOf[float] | None = None,
) -> EnsembleScore:
    """Log of the (weighted) arithmetic mean of ratios given in log space.

    Unweighted, this is logsumexp(log_ratios) - ln n. With log-weights it is
    logsumexp(log_ratios + log_weights) - logsumexp(log_weights), which
    reduces to the unweighted form for constant weights. Stable for ratios
    spanning hundreds of nats.
    """
    deltas = np.asarray(list(log_ratios), dtype=float)
    if deltas.size == 0:
        raise EvaluationError("log_mean_ratio of an empty list")
    if not np.all(np.isfinite(deltas)):
        raise EvaluationError("log_mean_ratio requires finite log-ratios")
    if log_weights is None:
        value = float(logsumexp(deltas) - math.log(deltas.size))
        return EnsembleScore(state, tuple(float(d) for d in deltas), value)
    lw = np.asarray(list(log_weights), dtype=float)
    if lw.shape != deltas.shape:
        raise EvaluationError("log_weights length does not match log_ratios")
    if np.any(np.isnan(lw)) or np.any(lw == np.inf):
        raise EvaluationError("log_weights must be finite or -inf")
    total = logsumexp(lw)
    if total == -np.inf:
        raise EvaluationError("log_weights have zero total mass")
    value = float(logsumexp(deltas + lw) - total)
    return EnsembleScore(state, tuple(float(d) for d in deltas), value, tuple(float(w) for w in lw))


def ensemble_score(
    table: LikelihoodTable,
    wild_type: Sequence,
    mutant: Sequence,
    mode: EvalMode = DEFAULT_MODE,
    log_weights: dict[str, float] | None = None,
) -> EnsembleScore:
    """Log-mean-ratio over every structure in a table.

    Structures enter in sorted id order. When ``log_weights`` is given it
    must cover every structure id; weights are Boltzmann-type log masses
    used for exhaustively enumerated ensembles.
    """
    sids = table.structure_ids
    deltas = [per_sample_log_ratio(table, sid, wild_type, mutant, mode) for sid in sids]
    if log_weights is None:
        return log_mean_ratio(deltas, table.state)
    missing = [sid for sid in sids if sid not in log_weights]
    if missing:
        raise TableError(f"log_weights missing structure ids {missing[:5]}")
    return log_mean_ratio(deltas, table.state, [log_weights[sid] for sid in sids])


def pseudo_dG(
    ensemble: LikelihoodTable,
    wild_type: Sequence,
    mutant: Sequence,
    seq_model: SequenceRatioModel,
    mode: EvalMode = DEFAULT_MODE,
    log_weights: dict[str, float] | None = None,
) -> float:
    """Pseudo free-energy change of one state under mutation.

    Returns the log-ratio of the state's occupancy between mutant and wild
    type: the ensemble log-mean-ratio plus the correction ln p(a)/p(a')
    from the background sequence model. For a uniform model the correction
    is exactly zero.
    """
    score = ensemble_score(ensemble, wild_type, mutant, mode, log_weights)
    correction = -seq_model.log_ratio(wild_type, mutant)
    return score.log_mean_ratio + correction


@dataclass(frozen=True, eq=False)
class EstimatorResult:
    """A stability estimate with the sub-terms it was combined from.

    ``value`` always equals the documented combination of ``components``:
    unfolded_term - folded_term + correction_term, with absent terms zero.
    Diagnostics carry mean-of-log-ratio variants for the Jensen gap.
    """

    strategy: str
    value: float
    components: dict[str, float] = field(default_factory=dict)
    mode: EvalMode = DEFAULT_MODE
    diagnostics: dict[str, float] = field(default_factory=dict)

    def combination(self) -> float:
        return (
            self.components.get("unfolded_term", 0.0)
            - self.components.get("folded_term", 0.0)
            + self.components.get("correction_term", 0.0)
        )


def _result(strategy, mode, *, unfolded=None, folded=None, correction=None, diagnostics=None):
    components: dict[str, float] = {}
    if unfolded is not None:
        components["unfolded_term"] = unfolded
    if folded is not None:
        components["folded_term"] = folded
    if correction is not None:
        components["correction_term"] = correction
    value = components.get("unfolded_term", 0.0) - components.get("folded_term", 0.0) + components.get(
        "correction_term", 0.0
    )
    return EstimatorResult(strategy, value, components, mode, diagnostics or {})


def _check_state(table: LikelihoodTable, expected: str, role: str) -> None:
    if table.state != expected:
        raise TableError(
            f"{role} table must be state {expected!r}, got {table.state!r} "
            f"(ensemble {table.ensemble_id!r})"
        )


def ddg_full(
    folded: LikelihoodTable,
    unfolded: LikelihoodTable,
    wild_type: Sequence,
    mutant: Sequence,
    mode: EvalMode = DEFAULT_MODE,
    folded_log_weights: dict[str, float] | None = None,
    unfolded_log_weights: dict[str, float] | None = None,
    strategy: str = "full",
) -> EstimatorResult:
    """Two-ensemble estimate: unfolded log-mean-ratio minus folded.

    No background-model correction appears; it cancels between the terms.
    """
    _check_state(folded, "F", "folded")
    _check_state(unfolded, "U", "unfolded")
    f = ensemble_score(folded, wild_type, mutant, mode, folded_log_weights)
    u = ensemble_score(unfolded, wild_type, mutant, mode, unfolded_log_weights)
    return _result(
        strategy,
        mode,
        unfolded=u.log_mean_ratio,
        folded=f.log_mean_ratio,
        diagnostics={
            "folded_mean_log_ratio": f.mean_log_ratio,
            "unfolded_mean_log_ratio": u.mean_log_ratio,
            "folded_n_samples": float(f.n_samples),
            "unfolded_n_samples": float(u.n_samples),
        },
    )


def ddg_folded_only(
    folded: LikelihoodTable,
    wild_type: Sequence,
    mutant: Sequence,
    seq_model: SequenceRatioModel | None = None,
    apply_correction: bool = False,
    mode: EvalMode = DEFAULT_MODE,
    folded_log_weights: dict[str, float] | None = None,
    strategy: str = "folded_only",
) -> EstimatorResult:
    """Folded-term-only estimate, the standard log-odds practice.

    Without correction the value is the negative folded log-mean-ratio;
    with ``apply_correction`` a background model adds ln p(a')/p(a),
    compensating for the marginal preference the folded term carries.
    """
    _check_state(folded, "F", "folded")
    if apply_correction and seq_model is None:
        raise EvaluationError("apply_correction requires a sequence model")
    f = ensemble_score(folded, wild_type, mutant, mode, folded_log_weights)
    correction = seq_model.log_ratio(wild_type, mutant) if apply_correction else None
    return _result(
        strategy,
        mode,
        folded=f.log_mean_ratio,
        correction=correction,
        diagnostics={
            "folded_mean_log_ratio": f.mean_log_ratio,
            "folded_n_samples": float(f.n_samples),
        },
    )


def ddg_hybrid(
    folded: LikelihoodTable,
    unfolded_seq_model: SequenceRatioModel,
    wild_type: Sequence,
    mutant: Sequence,
    mode: EvalMode = DEFAULT_MODE,
    folded_log_weights: dict[str, float] | None = None,
    strategy: str = "hybrid",
) -> EstimatorResult:
    """Sequence-model unfolded term combined with an ensemble folded term."""
    _check_state(folded, "F", "folded")
    f = ensemble_score(folded, wild_type, mutant, mode, folded_log_weights)
    u = unfolded_seq_model.log_ratio(wild_type, mutant)
    return _result(
        strategy,
        mode,
        unfolded=u,
        folded=f.log_mean_ratio,
        diagnostics={
            "folded_mean_log_ratio": f.mean_log_ratio,
            "folded_n_samples": float(f.n_samples),
        },
    )


def ddg_sequence_only(
    folded_model: SequenceRatioModel,
    unfolded_model: SequenceRatioModel,
    wild_type: Sequence,
    mutant: Sequence,
    strategy: str = "sequence_only",
) -> EstimatorResult:
    """Estimate from two background models alone, no structures involved."""
    u = unfolded_model.log_ratio(wild_type, mutant)
    f = folded_model.log_ratio(wild_type, mutant)
    return _result(strategy, DEFAULT_MODE, unfolded=u, folded=f)


def stability_from_pF(p_folded: float) -> float:
    """Stability ln(1/p - 1) from a folding probability in (0, 1).

    Negative for p above one half (folding favored). Written as
    log1p(-p) - log(p) so the 1-p difference is exact on [0.5, 1).
    """
    if not 0.0 < p_folded < 1.0:
        raise EvaluationError(f"p_folded must lie in (0, 1), got {p_folded}")
    return math.log1p(-p_folded) - math.log(p_folded)


def rank_transform(y: float, p_folded_wt: float) -> float:
    """Map a negated folded pseudo free-energy change to the variant's stability.

    Given y = -(folded pseudo change) for mutation a -> a' and the wild
    type's folding probability p, returns ln(exp(y)/p - 1), the variant's
    own stability. Strictly increasing in y, so ranking by y is ranking by
    predicted stability loss. Requires exp(y) > p.
    """
    if not 0.0 < p_folded_wt < 1.0:
        raise EvaluationError(f"p_folded_wt must lie in (0, 1), got {p_folded_wt}")
    # exp(y)/p - 1 computed as expm1(y - ln p) to keep precision near zero
    arg = y - math.log(p_folded_wt)
    if arg <= 0:
        raise EvaluationError(
            f"rank_transform undefined: exp(y) = {math.exp(y):.6g} does not exceed "
            f"p_folded_wt = {p_folded_wt:.6g}"
        )
    return math.log(math.expm1(arg))

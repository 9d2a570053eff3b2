"""Dataset-level evaluation: metrics, bootstrap, and the strategy matrix.

Correlation metrics are implemented directly so the tie-handling and
resampling rules are visible: Pearson as centered dot products with the
denominator under a single square root (identical inputs then give exactly
1.0), Spearman as Pearson over average-rank vectors, and bootstrap SEM as
the sample standard deviation of the Pearson coefficient over seeded
resamples with replacement, redrawing degenerate resamples.

Randomness: every bootstrap cell derives its generator from the run seed
and the cell label (strategy, scope, censoring policy) via SHA-256, so
results do not depend on evaluation order and any cell can be reproduced
in isolation.

The strategy matrix maps fixed strategy identifiers to estimator calls,
scores every dataset record, and reports pooled, per-protein, and
mean-of-protein correlations. Strategies lacking configured inputs are
reported as skipped with a reason, never silently dropped.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence as SequenceOf

import numpy as np

from .alphabet import named_alphabet
from .datasets import (
    DEFAULT_MIN_VARIANTS,
    DatasetRecord,
    ExperimentalDataset,
    load_experimental_dataset,
)
from .errors import ConfigError, DataError, EvaluationError, StabkitError
from .estimators import (
    DEFAULT_MODE,
    EstimatorResult,
    ddg_folded_only,
    ddg_full,
    ddg_hybrid,
    ddg_sequence_only,
    ensemble_score,
    log_mean_ratio,
)
from .freqmodel import FrequencyModel, load_amino_acid_counts
from .tables import (
    POSITION_NORMALIZATION_TOL,
    LikelihoodTable,
    format_float,
    load_likelihood_table,
    load_log_weights,
    weights_path,
)
from .unfolded import (
    DEFAULT_FRAGMENT_FLANK,
    FragmentSpec,
    IdpFrequencyModel,
    default_idp_model,
    fragment_structure_id,
    idp_model_from_counts,
    load_idp_counts,
    unfolded_log_ratio_fragment,
)
from .variants import Sequence

ORIENTATION = "larger_is_more_destabilizing"
REPORT_FORMAT = "stabkit-evaluation-report"
REPORT_VERSION = 1

STRATEGIES = (
    "folded_single",
    "folded_single_pa",
    "folded_multi",
    "folded_multi_pa",
    "full_f_single_u_multi",
    "full_f_multi_u_multi",
    "hybrid_idp_f_single",
    "hybrid_idp_f_multi",
    "hybrid_fragment_f_single",
    "hybrid_fragment_f_multi",
    "sequence_only",
)

TABLE_KEYS = ("folded_single", "folded_multi", "unfolded_mc", "fragment")
MODEL_KEYS = ("pa_counts", "idp_counts", "seq_folded_counts", "seq_unfolded_counts")
CENSORED_POLICIES = ("include", "exclude", "both")
DEFAULT_MC_FLANK = 5
DEFAULT_BOOTSTRAP_RESAMPLES = 100

SCORES_HEADER = ("strategy", "protein_id", "variant", "score")


# ---------------------------------------------------------------------------
# metrics


def _paired_arrays(xs: SequenceOf[float], ys: SequenceOf[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(list(xs), dtype=float)
    y = np.asarray(list(ys), dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise EvaluationError(f"paired vectors required, got shapes {x.shape} and {y.shape}")
    if x.size < 2:
        raise EvaluationError(f"need at least 2 paired points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise EvaluationError("correlation inputs must be finite")
    return x, y


def pearson(xs: SequenceOf[float], ys: SequenceOf[float]) -> float:
    """Sample product-moment correlation in [-1, 1]."""
    x, y = _paired_arrays(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise EvaluationError("zero variance in correlation input")
    # single sqrt keeps r at exactly +-1.0 for perfectly correlated input
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def average_ranks(values: SequenceOf[float]) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their positions."""
    arr = np.asarray(list(values), dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: SequenceOf[float], ys: SequenceOf[float]) -> float:
    """Pearson correlation of average-rank vectors."""
    x, y = _paired_arrays(xs, ys)
    return pearson(average_ranks(x), average_ranks(y))


def derive_rng(seed: int, *labels: str) -> np.random.Generator:
    """Cell-local generator: run seed combined with a hashed label path.

    Fixing the derivation lets cells run in any order, or in parallel,
    without changing results.
    """
    digest = hashlib.sha256("\x1f".join(labels).encode()).digest()
    key = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, key]))


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    sem: float
    n_redraws: int


def bootstrap_sem(
    scores: SequenceOf[float],
    targets: SequenceOf[float],
    n_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int | None = 0,
    rng: np.random.Generator | None = None,
) -> BootstrapResult:
    """Pearson point estimate with its bootstrap standard error.

    Resamples variants with replacement; a resample with zero variance on
    either side cannot be correlated and is redrawn (count reported).
    """
    x, y = _paired_arrays(scores, targets)
    if n_resamples < 2:
        raise EvaluationError(f"need at least 2 bootstrap resamples, got {n_resamples}")
    point = pearson(x, y)
    if rng is None:
        rng = np.random.default_rng(seed)
    n = x.size
    values = np.empty(n_resamples, dtype=float)
    redraws = 0
    max_attempts = 1000 * n_resamples
    attempts = 0
    b = 0
    while b < n_resamples:
        attempts += 1
        if attempts > max_attempts:
            raise EvaluationError(
                "bootstrap could not find enough non-degenerate resamples "
                f"({redraws} redraws); the data are effectively constant"
            )
        idx = rng.integers(0, n, size=n)
        try:
            values[b] = pearson(x[idx], y[idx])
        except EvaluationError:
            redraws += 1
            continue
        b += 1
    sem = float(np.std(values, ddof=1))
    return BootstrapResult(point, sem, redraws)


def fisher_sem_approximation(r: float, n: int) -> float:
    """Analytic large-sample SEM of a correlation, (1 - r^2) / sqrt(n - 3)."""
    if n <= 3:
        raise EvaluationError(f"Fisher approximation needs n > 3, got {n}")
    return (1.0 - r * r) / math.sqrt(n - 3)


# ---------------------------------------------------------------------------
# run configuration


def _expect_keys(obj: dict, allowed: tuple[str, ...], context: str) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {context} keys {unknown}; allowed keys are {sorted(allowed)}")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything one evaluation run needs, resolved and validated."""

    dataset_path: Path
    strategies: tuple[str, ...]
    tables: dict[str, Path] = field(default_factory=dict)
    models: dict[str, str] = field(default_factory=dict)
    sign_convention: str = "folding"
    single_substitutions_only: bool = False
    min_variants_per_protein: int = DEFAULT_MIN_VARIANTS
    alphabet_name: str = "canonical"
    evaluation_mode: str = DEFAULT_MODE
    fragment_flank: int = DEFAULT_FRAGMENT_FLANK
    mc_flank: int = DEFAULT_MC_FLANK
    pseudo_count: float = 0.5
    censored_policy: str = "both"
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES
    seed: int = 0
    position_normalization_tol: float = POSITION_NORMALIZATION_TOL

    def __post_init__(self) -> None:
        if not self.strategies:
            raise ConfigError("config lists no strategies")
        if len(set(self.strategies)) != len(self.strategies):
            dupes = sorted({s for s in self.strategies if self.strategies.count(s) > 1})
            raise ConfigError(f"duplicate strategy ids in config: {dupes}")
        unknown = sorted(set(self.strategies) - set(STRATEGIES))
        if unknown:
            raise ConfigError(f"unknown strategy ids {unknown}; known ids: {list(STRATEGIES)}")
        if self.censored_policy not in CENSORED_POLICIES:
            raise ConfigError(
                f"censored_policy must be one of {CENSORED_POLICIES}, got {self.censored_policy!r}"
            )
        if self.evaluation_mode not in ("whole_sequence", "mutated_sites_only"):
            raise ConfigError(f"unknown evaluation mode {self.evaluation_mode!r}")
        _expect_keys(dict(self.tables), TABLE_KEYS, "table")
        _expect_keys(dict(self.models), MODEL_KEYS, "model")

    @classmethod
    def from_json(cls, path: str | Path, seed_override: int | None = None) -> "RunConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        return cls.from_dict(raw, path.parent, seed_override)

    @classmethod
    def from_dict(
        cls, raw: dict, base: Path | None = None, seed_override: int | None = None
    ) -> "RunConfig":
        """Build a config from parsed JSON, resolving paths against ``base``."""
        base = base or Path(".")
        _expect_keys(
            raw,
            ("dataset", "tables", "models", "strategies", "evaluation", "bootstrap", "seed"),
            "config",
        )
        dataset = raw.get("dataset")
        if not isinstance(dataset, dict) or "path" not in dataset:
            raise ConfigError("config needs a dataset object with a path")
        _expect_keys(
            dataset,
            (
                "path",
                "sign_convention",
                "single_substitutions_only",
                "min_variants_per_protein",
                "alphabet",
            ),
            "dataset",
        )
        strategies = raw.get("strategies")
        if not isinstance(strategies, list) or not all(isinstance(s, str) for s in strategies):
            raise ConfigError("config strategies must be a list of strategy id strings")
        tables_raw = raw.get("tables", {})
        if not isinstance(tables_raw, dict):
            raise ConfigError("config tables must be an object")
        models_raw = raw.get("models", {})
        if not isinstance(models_raw, dict):
            raise ConfigError("config models must be an object")
        evaluation = raw.get("evaluation", {})
        if not isinstance(evaluation, dict):
            raise ConfigError("config evaluation must be an object")
        _expect_keys(
            evaluation,
            ("mode", "fragment_flank", "mc_flank", "censored_policy", "position_normalization_tol"),
            "evaluation",
        )
        bootstrap = raw.get("bootstrap", {})
        if not isinstance(bootstrap, dict):
            raise ConfigError("config bootstrap must be an object")
        _expect_keys(bootstrap, ("n_resamples",), "bootstrap")
        pseudo_count = models_raw.get("pseudo_count", 0.5)
        model_refs = {k: str(v) for k, v in models_raw.items() if k != "pseudo_count"}
        seed = raw.get("seed", 0)
        if seed_override is not None:
            seed = seed_override
        try:
            return cls(
                dataset_path=base / str(dataset["path"]),
                strategies=tuple(strategies),
                tables={k: base / str(v) for k, v in tables_raw.items()},
                models={k: v if v == "builtin" else str(base / v) for k, v in model_refs.items()},
                sign_convention=str(dataset.get("sign_convention", "folding")),
                single_substitutions_only=bool(dataset.get("single_substitutions_only", False)),
                min_variants_per_protein=int(
                    dataset.get("min_variants_per_protein", DEFAULT_MIN_VARIANTS)
                ),
                alphabet_name=str(dataset.get("alphabet", "canonical")),
                evaluation_mode=str(evaluation.get("mode", DEFAULT_MODE)),
                fragment_flank=int(evaluation.get("fragment_flank", DEFAULT_FRAGMENT_FLANK)),
                mc_flank=int(evaluation.get("mc_flank", DEFAULT_MC_FLANK)),
                pseudo_count=float(pseudo_count),
                censored_policy=str(evaluation.get("censored_policy", "both")),
                bootstrap_resamples=int(bootstrap.get("n_resamples", DEFAULT_BOOTSTRAP_RESAMPLES)),
                seed=int(seed),
                position_normalization_tol=float(
                    evaluation.get("position_normalization_tol", POSITION_NORMALIZATION_TOL)
                ),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config field value: {exc}") from None

    def snapshot(self) -> dict:
        """JSON-safe copy of the resolved configuration for the report."""
        return {
            "dataset": {
                "path": str(self.dataset_path),
                "sign_convention": self.sign_convention,
                "single_substitutions_only": self.single_substitutions_only,
                "min_variants_per_protein": self.min_variants_per_protein,
                "alphabet": self.alphabet_name,
            },
            "tables": {k: str(v) for k, v in sorted(self.tables.items())},
            "models": {k: str(v) for k, v in sorted(self.models.items())},
            "strategies": list(self.strategies),
            "evaluation": {
                "mode": self.evaluation_mode,
                "fragment_flank": self.fragment_flank,
                "mc_flank": self.mc_flank,
                "censored_policy": self.censored_policy,
                "position_normalization_tol": self.position_normalization_tol,
            },
            "bootstrap": {"n_resamples": self.bootstrap_resamples},
            "pseudo_count": self.pseudo_count,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# strategy scoring


_STRATEGY_TABLE_NEEDS = {
    "folded_single": ("folded_single",),
    "folded_single_pa": ("folded_single",),
    "folded_multi": ("folded_multi",),
    "folded_multi_pa": ("folded_multi",),
    "full_f_single_u_multi": ("folded_single", "unfolded_mc"),
    "full_f_multi_u_multi": ("folded_multi", "unfolded_mc"),
    "hybrid_idp_f_single": ("folded_single",),
    "hybrid_idp_f_multi": ("folded_multi",),
    "hybrid_fragment_f_single": ("folded_single", "fragment"),
    "hybrid_fragment_f_multi": ("folded_multi", "fragment"),
    "sequence_only": (),
}

_STRATEGY_MODEL_NEEDS = {
    "folded_single_pa": ("pa_counts",),
    "folded_multi_pa": ("pa_counts",),
    "hybrid_idp_f_single": ("idp_counts",),
    "hybrid_idp_f_multi": ("idp_counts",),
    "sequence_only": ("seq_folded_counts", "seq_unfolded_counts"),
}


@dataclass(eq=False)
class _Inputs:
    """Loaded tables, sidecar weights, and models for one run."""

    dataset: ExperimentalDataset
    tables: dict[str, LikelihoodTable]
    weights: dict[str, dict[str, float] | None]
    models: dict[str, object]
    mode: str
    fragment_flank: int
    mc_flank: int
    single_protein: bool


def _load_inputs(config: RunConfig) -> _Inputs:
    dataset = load_experimental_dataset(
        config.dataset_path,
        config.sign_convention,
        config.min_variants_per_protein,
        single_substitutions_only=config.single_substitutions_only,
        alphabet=named_alphabet(config.alphabet_name),
    )
    tables: dict[str, LikelihoodTable] = {}
    weights: dict[str, dict[str, float] | None] = {}
    for key, path in config.tables.items():
        tables[key] = load_likelihood_table(
            path, position_normalization_tol=config.position_normalization_tol
        )
        sidecar = weights_path(Path(path))
        weights[key] = load_log_weights(sidecar) if sidecar.exists() else None
    models: dict[str, object] = {}
    alphabet = named_alphabet(config.alphabet_name)
    for key in MODEL_KEYS:
        ref = config.models.get(key)
        if ref is None:
            continue
        if key == "idp_counts":
            if ref == "builtin":
                models[key] = default_idp_model(config.pseudo_count)
            else:
                models[key] = idp_model_from_counts(
                    load_idp_counts(ref), config.pseudo_count, provenance=f"counts file {ref}"
                )
        else:
            counts = load_amino_acid_counts(ref, alphabet)
            models[key] = FrequencyModel.from_counts(counts, alphabet, config.pseudo_count)
    return _Inputs(
        dataset=dataset,
        tables=tables,
        weights=weights,
        models=models,
        mode=config.evaluation_mode,
        fragment_flank=config.fragment_flank,
        mc_flank=config.mc_flank,
        single_protein=len(dataset.protein_ids) == 1,
    )


def restrict_table(table: LikelihoodTable, protein_id: str) -> LikelihoodTable | None:
    """Sub-table of structures belonging to one protein (id or `id_` prefix)."""
    prefix = protein_id + "_"
    keep = {sid for sid in table.structure_ids if sid == protein_id or sid.startswith(prefix)}
    if not keep:
        return None
    entries = {k: v for k, v in table.entries.items() if k[0] in keep}
    per_position = {k: v for k, v in table.per_position.items() if k[0] in keep}
    if not entries and not per_position:
        return None
    return LikelihoodTable(
        table.ensemble_id, table.state, entries, per_position, table.position_alphabet
    )


class _ProteinTables:
    """Per-protein view of the loaded tables.

    Multi-protein runs restrict each table to the protein's structures by
    the `<protein_id>_` prefix convention; a single-protein dataset uses
    tables as-is, so oracle-emitted ids need no renaming.
    """

    def __init__(self, inputs: _Inputs, protein_id: str):
        self._inputs = inputs
        self.protein_id = protein_id
        self._cache: dict[str, tuple[LikelihoodTable, dict[str, float] | None] | None] = {}

    def get(self, key: str) -> tuple[LikelihoodTable, dict[str, float] | None]:
        if key not in self._cache:
            table = self._inputs.tables[key]
            weights = self._inputs.weights[key]
            if self._inputs.single_protein:
                self._cache[key] = (table, weights)
            else:
                sub = restrict_table(table, self.protein_id)
                if sub is None:
                    self._cache[key] = None
                else:
                    if weights is not None:
                        weights = {
                            sid: weights[sid] for sid in sub.structure_ids if sid in weights
                        }
                    self._cache[key] = (sub, weights)
        value = self._cache[key]
        if value is None:
            raise DataError(
                f"table {key!r} has no structures for protein {self.protein_id!r} "
                f"(expected ids starting with {self.protein_id + '_'!r})"
            )
        return value


def _single_mutant(wild_type: Sequence, mutation) -> Sequence:
    letters = wild_type.letters
    letters = letters[: mutation.position - 1] + mutation.mt + letters[mutation.position :]
    return Sequence(letters, wild_type.alphabet)


def _mc_unfolded_term(
    inputs: _Inputs, tables: _ProteinTables, record: DatasetRecord
) -> tuple[float, float]:
    """(unfolded term, mean-of-logs diagnostic) from the MC ensemble table.

    Whole-sequence MC tables are detected by the wild type being present as
    an entry and averaged directly. Windowed tables use the
    `<protein>_mc_<center>_<k>` id convention; each mutation contributes the
    log-mean-ratio over its own window's members, summed across mutations.
    """
    table, weights = tables.get("unfolded_mc")
    wt = record.variant.wild_type
    mt = record.variant.mutant_sequence()
    if any(table.has_entry(sid, wt) for sid in table.structure_ids):
        score = ensemble_score(table, wt, mt, inputs.mode, weights)
        return score.log_mean_ratio, score.mean_log_ratio
    term = 0.0
    mean_term = 0.0
    for mutation in record.variant.mutations:
        prefix = f"{record.protein_id}_mc_{mutation.position}_"
        sids = [sid for sid in table.structure_ids if sid.startswith(prefix)]
        if not sids:
            raise DataError(
                f"MC table has no members for protein {record.protein_id!r} "
                f"position {mutation.position} (ids {prefix}<k>)"
            )
        spec = FragmentSpec(mutation.position, inputs.mc_flank)
        wt_window = spec.window_letters(wt)
        mt_window = spec.window_letters(_single_mutant(wt, mutation))
        deltas = [
            table.log_likelihood(sid, mt_window) - table.log_likelihood(sid, wt_window)
            for sid in sids
        ]
        score = log_mean_ratio(deltas, "U")
        term += score.log_mean_ratio
        mean_term += score.mean_log_ratio
    return term, mean_term


def _fragment_unfolded_term(inputs: _Inputs, tables: _ProteinTables, record: DatasetRecord) -> float:
    table, _ = tables.get("fragment")
    wt = record.variant.wild_type
    total = 0.0
    for mutation in record.variant.mutations:
        spec = FragmentSpec(mutation.position, inputs.fragment_flank)
        sid = fragment_structure_id(record.protein_id, mutation.position)
        total += unfolded_log_ratio_fragment(table, spec, wt, _single_mutant(wt, mutation), sid)
    return total


def score_record(strategy: str, inputs: _Inputs, record: DatasetRecord) -> EstimatorResult:
    """One strategy's estimate for one dataset record."""
    tables = _ProteinTables(inputs, record.protein_id)
    wt = record.variant.wild_type
    mt = record.variant.mutant_sequence()
    mode = inputs.mode
    if strategy in ("folded_single", "folded_multi"):
        table, w = tables.get(_STRATEGY_TABLE_NEEDS[strategy][0])
        return ddg_folded_only(table, wt, mt, mode=mode, folded_log_weights=w, strategy=strategy)
    if strategy in ("folded_single_pa", "folded_multi_pa"):
        table, w = tables.get(_STRATEGY_TABLE_NEEDS[strategy][0])
        return ddg_folded_only(
            table,
            wt,
            mt,
            seq_model=inputs.models["pa_counts"],
            apply_correction=True,
            mode=mode,
            folded_log_weights=w,
            strategy=strategy,
        )
    if strategy in ("full_f_single_u_multi", "full_f_multi_u_multi"):
        folded, fw = tables.get(_STRATEGY_TABLE_NEEDS[strategy][0])
        mc_table, uw = tables.get("unfolded_mc")
        if any(mc_table.has_entry(sid, wt) for sid in mc_table.structure_ids):
            return ddg_full(
                folded,
                mc_table,
                wt,
                mt,
                mode=mode,
                folded_log_weights=fw,
                unfolded_log_weights=uw,
                strategy=strategy,
            )
        u_term, u_mean = _mc_unfolded_term(inputs, tables, record)
        f_score = ensemble_score(folded, wt, mt, mode, fw)
        return EstimatorResult(
            strategy,
            u_term - f_score.log_mean_ratio,
            {"unfolded_term": u_term, "folded_term": f_score.log_mean_ratio},
            mode,
            {
                "folded_mean_log_ratio": f_score.mean_log_ratio,
                "unfolded_mean_log_ratio": u_mean,
            },
        )
    if strategy in ("hybrid_idp_f_single", "hybrid_idp_f_multi"):
        table, w = tables.get(_STRATEGY_TABLE_NEEDS[strategy][0])
        model: IdpFrequencyModel = inputs.models["idp_counts"]  # type: ignore[assignment]
        return ddg_hybrid(table, model, wt, mt, mode=mode, folded_log_weights=w, strategy=strategy)
    if strategy in ("hybrid_fragment_f_single", "hybrid_fragment_f_multi"):
        table, w = tables.get(_STRATEGY_TABLE_NEEDS[strategy][0])
        u_term = _fragment_unfolded_term(inputs, tables, record)
        f_score = ensemble_score(table, wt, mt, mode, w)
        return EstimatorResult(
            strategy,
            u_term - f_score.log_mean_ratio,
            {"unfolded_term": u_term, "folded_term": f_score.log_mean_ratio},
            mode,
            {"folded_mean_log_ratio": f_score.mean_log_ratio},
        )
    if strategy == "sequence_only":
        return ddg_sequence_only(
            inputs.models["seq_folded_counts"],  # type: ignore[arg-type]
            inputs.models["seq_unfolded_counts"],  # type: ignore[arg-type]
            wt,
            mt,
            strategy=strategy,
        )
    raise ConfigError(f"unknown strategy id {strategy!r}")


@dataclass(frozen=True, eq=False)
class StrategyRun:
    """All per-variant scores one strategy produced for one dataset."""

    strategy: str
    scores: tuple[tuple[DatasetRecord, float], ...]
    dataset_path: str
    config: dict

    def __post_init__(self) -> None:
        for record, score in self.scores:
            if math.isnan(score):
                raise EvaluationError(
                    f"strategy {self.strategy!r} produced NaN for "
                    f"{record.protein_id}/{record.variant.notation() or '<wild type>'}"
                )

    def aligned_with(self, records: SequenceOf[DatasetRecord]) -> bool:
        return [r.key for r, _ in self.scores] == [r.key for r in records]


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class ReportRow:
    strategy: str
    scope: str
    censored_policy: str
    n_variants: int
    pearson: float
    spearman: float
    sem: float
    bootstrap_redraws: int

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "scope": self.scope,
            "censored_policy": self.censored_policy,
            "n_variants": self.n_variants,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "sem": self.sem,
            "bootstrap_redraws": self.bootstrap_redraws,
        }


@dataclass(frozen=True)
class SkippedEntry:
    strategy: str
    scope: str
    censored_policy: str
    reason: str

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "scope": self.scope,
            "censored_policy": self.censored_policy,
            "reason": self.reason,
        }


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Full evaluation output: computed rows, skipped cells, and provenance."""

    config: dict
    dataset_summary: dict
    bootstrap: dict
    rows: tuple[ReportRow, ...]
    skipped: tuple[SkippedEntry, ...]
    orientation: str = ORIENTATION

    def __post_init__(self) -> None:
        for row in self.rows:
            if not (-1.0 <= row.pearson <= 1.0 and -1.0 <= row.spearman <= 1.0):
                raise EvaluationError(f"correlation out of range in row {row}")
            if row.sem < 0:
                raise EvaluationError(f"negative SEM in row {row}")

    def row(
        self, strategy: str, scope: str = "pooled", censored_policy: str = "include"
    ) -> ReportRow:
        for r in self.rows:
            if (r.strategy, r.scope, r.censored_policy) == (strategy, scope, censored_policy):
                return r
        raise EvaluationError(f"no report row for ({strategy!r}, {scope!r}, {censored_policy!r})")

    def to_json_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "orientation": self.orientation,
            "bootstrap": self.bootstrap,
            "dataset": self.dataset_summary,
            "config": self.config,
            "rows": [r.to_dict() for r in self.rows],
            "skipped": [s.to_dict() for s in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_dict(cls, raw: dict) -> "EvaluationReport":
        if raw.get("format") != REPORT_FORMAT:
            raise DataError(f"not an evaluation report (format {raw.get('format')!r})")
        if raw.get("version") != REPORT_VERSION:
            raise DataError(f"unsupported report version {raw.get('version')!r}")
        return cls(
            config=raw.get("config", {}),
            dataset_summary=raw.get("dataset", {}),
            bootstrap=raw.get("bootstrap", {}),
            rows=tuple(ReportRow(**r) for r in raw.get("rows", [])),
            skipped=tuple(SkippedEntry(**s) for s in raw.get("skipped", [])),
            orientation=raw.get("orientation", ORIENTATION),
        )

    @classmethod
    def load(cls, path: str | Path) -> "EvaluationReport":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise DataError(f"cannot read report {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"report {path} is not valid JSON: {exc}") from None
        return cls.from_json_dict(raw)

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    def write_csv(self, path: str | Path) -> Path:
        """Human-readable table: one line per computed or skipped cell."""
        path = Path(path)
        lines = [
            "strategy,scope,censored_policy,n_variants,pearson,spearman,sem,"
            "bootstrap_redraws,status,reason"
        ]
        for r in self.rows:
            lines.append(
                f"{r.strategy},{r.scope},{r.censored_policy},{r.n_variants},"
                f"{r.pearson:.6f},{r.spearman:.6f},{r.sem:.6f},{r.bootstrap_redraws},ok,"
            )
        for s in self.skipped:
            reason = s.reason.replace(",", ";")
            lines.append(f"{s.strategy},{s.scope},{s.censored_policy},,,,,,skipped,{reason}")
        path.write_text("\n".join(lines) + "\n")
        return path

    def write_long_csv(self, path: str | Path) -> Path:
        """Plot-ready long format: one (cell, metric, value) per line."""
        path = Path(path)
        lines = ["strategy,scope,censored_policy,metric,value"]
        for r in self.rows:
            prefix = f"{r.strategy},{r.scope},{r.censored_policy}"
            lines.append(f"{prefix},pearson,{format_float(r.pearson)}")
            lines.append(f"{prefix},spearman,{format_float(r.spearman)}")
            lines.append(f"{prefix},sem,{format_float(r.sem)}")
            lines.append(f"{prefix},n_variants,{r.n_variants}")
        path.write_text("\n".join(lines) + "\n")
        return path


# ---------------------------------------------------------------------------
# the matrix


def _policies(config: RunConfig, dataset: ExperimentalDataset) -> tuple[str, ...]:
    if config.censored_policy == "both":
        return ("include", "exclude") if dataset.n_censored() > 0 else ("include",)
    return (config.censored_policy,)


def compute_strategy_runs(
    config: RunConfig, inputs: _Inputs | None = None
) -> tuple[dict[str, StrategyRun], tuple[SkippedEntry, ...], _Inputs]:
    """Score every configured strategy over the full dataset.

    Strategies with missing inputs become skipped entries; scoring failures
    on individual records are data errors and abort the run.
    """
    if inputs is None:
        inputs = _load_inputs(config)
    runs: dict[str, StrategyRun] = {}
    skipped: list[SkippedEntry] = []
    snapshot = config.snapshot()
    for strategy in config.strategies:
        missing_tables = [k for k in _STRATEGY_TABLE_NEEDS[strategy] if k not in inputs.tables]
        missing_models = [
            k for k in _STRATEGY_MODEL_NEEDS.get(strategy, ()) if k not in inputs.models
        ]
        if missing_tables or missing_models:
            missing = ", ".join(
                [f"tables.{k}" for k in missing_tables] + [f"models.{k}" for k in missing_models]
            )
            skipped.append(
                SkippedEntry(strategy, "all", "all", f"missing configured inputs: {missing}")
            )
            continue
        scores: list[tuple[DatasetRecord, float]] = []
        for record in inputs.dataset:
            try:
                result = score_record(strategy, inputs, record)
            except StabkitError as exc:
                raise DataError(
                    f"strategy {strategy!r} failed on {record.protein_id}/"
                    f"{record.variant.notation() or '<wild type>'}: {exc}"
                ) from exc
            scores.append((record, result.value))
        runs[strategy] = StrategyRun(strategy, tuple(scores), str(config.dataset_path), snapshot)
    return runs, tuple(skipped), inputs


def _correlate_cell(
    run: StrategyRun,
    records: SequenceOf[DatasetRecord],
    scope: str,
    policy: str,
    config: RunConfig,
) -> ReportRow | SkippedEntry:
    wanted = {r.key for r in records}
    pairs = [(rec, s) for rec, s in run.scores if rec.key in wanted]
    if len(pairs) < 2:
        return SkippedEntry(
            run.strategy, scope, policy, f"only {len(pairs)} records after filtering"
        )
    xs = [s for _, s in pairs]
    ys = [rec.target for rec, _ in pairs]
    rng = derive_rng(config.seed, "bootstrap", run.strategy, scope, policy)
    try:
        boot = bootstrap_sem(xs, ys, config.bootstrap_resamples, rng=rng)
        rho = spearman(xs, ys)
    except EvaluationError as exc:
        return SkippedEntry(run.strategy, scope, policy, str(exc))
    return ReportRow(
        run.strategy, scope, policy, len(pairs), boot.point, rho, boot.sem, boot.n_redraws
    )


def _mean_of_protein_rows(strategy: str, policy: str, protein_rows: list[ReportRow]) -> ReportRow:
    # SEM of a mean of independent per-protein estimates
    k = len(protein_rows)
    return ReportRow(
        strategy,
        "protein_mean",
        policy,
        sum(r.n_variants for r in protein_rows),
        sum(r.pearson for r in protein_rows) / k,
        sum(r.spearman for r in protein_rows) / k,
        math.sqrt(sum(r.sem**2 for r in protein_rows)) / k,
        sum(r.bootstrap_redraws for r in protein_rows),
    )


def _report_from_runs(
    runs: dict[str, StrategyRun],
    dataset: ExperimentalDataset,
    config: RunConfig,
    pre_skipped: tuple[SkippedEntry, ...],
) -> EvaluationReport:
    rows: list[ReportRow] = []
    skipped: list[SkippedEntry] = list(pre_skipped)
    for strategy in config.strategies:
        if strategy not in runs:
            continue
        run = runs[strategy]
        for policy in _policies(config, dataset):
            try:
                subset = dataset.filtered(include_censored=(policy == "include"))
            except DataError as exc:
                skipped.append(SkippedEntry(strategy, "all", policy, str(exc)))
                continue
            cell = _correlate_cell(run, subset.records, "pooled", policy, config)
            rows.append(cell) if isinstance(cell, ReportRow) else skipped.append(cell)
            protein_rows: list[ReportRow] = []
            for protein_id in subset.reportable_proteins():
                pcell = _correlate_cell(
                    run, subset.for_protein(protein_id), f"protein:{protein_id}", policy, config
                )
                if isinstance(pcell, ReportRow):
                    protein_rows.append(pcell)
                    rows.append(pcell)
                else:
                    skipped.append(pcell)
            if protein_rows:
                rows.append(_mean_of_protein_rows(strategy, policy, protein_rows))
    return EvaluationReport(
        config=config.snapshot(),
        dataset_summary={
            "path": str(config.dataset_path),
            "n_records": len(dataset),
            "n_censored": dataset.n_censored(),
            "proteins": list(dataset.protein_ids),
            "min_variants_per_protein": dataset.min_variants_per_protein,
        },
        bootstrap={"n_resamples": config.bootstrap_resamples, "seed": config.seed},
        rows=tuple(rows),
        skipped=tuple(skipped),
    )


def run_strategy_matrix(config: RunConfig) -> EvaluationReport:
    """Evaluate every strategy x scope x censoring-policy cell."""
    runs, skipped, inputs = compute_strategy_runs(config)
    return _report_from_runs(runs, inputs.dataset, config, skipped)


# ---------------------------------------------------------------------------
# scores files (interchange between the score and evaluate commands)


def write_scores_csv(runs: dict[str, StrategyRun], path: str | Path) -> Path:
    path = Path(path)
    lines = [",".join(SCORES_HEADER)]
    for strategy in sorted(runs):
        for record, score in sorted(runs[strategy].scores, key=lambda p: p[0].key):
            lines.append(
                f"{strategy},{record.protein_id},{record.variant.notation()},{format_float(score)}"
            )
    path.write_text("\n".join(lines) + "\n")
    return path


def load_scores_csv(path: str | Path) -> dict[tuple[str, str, str], float]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read scores file {path}: {exc}") from None
    rows = [(i, row) for i, row in enumerate(csv.reader(text.splitlines()), start=1) if row]
    if not rows or tuple(f.strip() for f in rows[0][1]) != SCORES_HEADER:
        raise DataError(f"scores file {path} must start with header {','.join(SCORES_HEADER)}")
    scores: dict[tuple[str, str, str], float] = {}
    for lineno, row in rows[1:]:
        if len(row) != len(SCORES_HEADER):
            raise DataError(
                f"{path} line {lineno}: expected {len(SCORES_HEADER)} fields, got {len(row)}"
            )
        strategy, protein_id, variant, score_text = (f.strip() for f in row)
        key = (strategy, protein_id, variant)
        if key in scores:
            raise DataError(f"{path} line {lineno}: duplicate score for {key}")
        try:
            value = float(score_text)
        except ValueError:
            raise DataError(f"{path} line {lineno}: score {score_text!r} is not a number") from None
        if math.isnan(value):
            raise DataError(f"{path} line {lineno}: NaN score")
        scores[key] = value
    return scores


def matrix_from_scores(
    config: RunConfig, scores: dict[tuple[str, str, str], float]
) -> EvaluationReport:
    """Evaluate correlations from precomputed per-variant scores.

    Every (strategy, record) pair of the configured dataset must appear in
    the scores mapping; extra entries in the file are ignored.
    """
    dataset = load_experimental_dataset(
        config.dataset_path,
        config.sign_convention,
        config.min_variants_per_protein,
        single_substitutions_only=config.single_substitutions_only,
        alphabet=named_alphabet(config.alphabet_name),
    )
    runs: dict[str, StrategyRun] = {}
    snapshot = config.snapshot()
    for strategy in config.strategies:
        pairs: list[tuple[DatasetRecord, float]] = []
        missing: list[str] = []
        for record in dataset:
            key = (strategy, record.protein_id, record.variant.notation())
            if key in scores:
                pairs.append((record, scores[key]))
            else:
                missing.append(f"{record.protein_id}/{record.variant.notation() or '<wild type>'}")
        if missing:
            raise DataError(
                f"scores file lacks {len(missing)} records for strategy {strategy!r} "
                f"(first missing: {missing[0]})"
            )
        runs[strategy] = StrategyRun(strategy, tuple(pairs), str(config.dataset_path), snapshot)
    return _report_from_runs(runs, dataset, config, ())


def merge_reports(reports: dict[str, EvaluationReport]) -> str:
    """Comparison CSV across runs, keyed by strategy (pooled/include cells)."""
    if not reports:
        raise DataError("no reports to merge")
    labels = sorted(reports)
    strategies: list[str] = []
    for label in labels:
        for row in reports[label].rows:
            if row.scope == "pooled" and row.strategy not in strategies:
                strategies.append(row.strategy)
    lines = ["strategy," + ",".join(f"{label}_pearson,{label}_sem" for label in labels)]
    for strategy in strategies:
        cells = []
        for label in labels:
            row = next(
                (
                    r
                    for r in reports[label].rows
                    if r.strategy == strategy
                    and r.scope == "pooled"
                    and r.censored_policy == "include"
                ),
                None,
            )
            cells.append(f"{row.pearson:.6f},{row.sem:.6f}" if row else ",")
        lines.append(f"{strategy}," + ",".join(cells))
    return "\n".join(lines) + "\n"

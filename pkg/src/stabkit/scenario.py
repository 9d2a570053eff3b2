"""Oracle scenarios: configured lattice systems with self-verification.

A scenario file describes one lattice system (chain length, temperature,
interaction matrix, classifier), a candidate family, and a sampling plan.
Running it emits interchange files (likelihood tables, weight sidecars,
candidate marginal, a dataset with exact stability targets, and for
exhaustive plans a ready-to-run evaluation config) and verifies a set of
exact identities the system must satisfy. Any failed identity is reported
with its worst deviation; the command line maps that to its own exit code
so pipelines can distinguish broken inputs from broken physics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .datasets import DatasetRecord, ExperimentalDataset, save_experimental_dataset
from .errors import ConfigError, LatticeError, OracleCheckError
from .estimators import ddg_full, ensemble_score, rank_transform
from .freqmodel import CandidateMarginal
from .lattice import (
    DEFAULT_KAPPA,
    InteractionMatrix,
    LatticeSystem,
    SamplingPlan,
    SequenceFamily,
    emit_oracle_tables,
    exact_ddg,
    exact_stability,
    folded_proposal_bias,
    log_partition_functions,
    occupancy_folded,
    posterior_log_matrix,
)
from .variants import Sequence, VariantSpec

SCENARIO_FORMAT = "stabkit-oracle-report"
SCENARIO_VERSION = 1

CHECKS = (
    "conservation",
    "posterior_normalization",
    "antisymmetry",
    "exhaustive_identity",
    "rank_transform",
    "proposal_bias",
    "beta_zero",
)

CONSERVATION_TOL = 1e-12
POSTERIOR_TOL = 1e-12
ANTISYMMETRY_TOL = 1e-12
IDENTITY_TOL = 1e-9
RANK_TOL = 1e-9
BIAS_TOL = 1e-12
BETA_ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OracleScenario:
    """Validated description of one oracle run."""

    label: str
    chain_length: int
    beta: float
    wild_type: str
    classifier_kind: str = "soft"
    kappa: float = DEFAULT_KAPPA
    threshold: float | None = None
    interaction_pairs: dict[str, float] | None = None
    prior: dict[str, float] | None = None
    plan: SamplingPlan = SamplingPlan()
    seed: int = 0
    checks: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.label:
            raise ConfigError("scenario needs a non-empty label")
        if self.wild_type != "random":
            if len(self.wild_type) != self.chain_length:
                raise ConfigError(
                    f"wild type length {len(self.wild_type)} does not match "
                    f"chain_length {self.chain_length}"
                )
        unknown = sorted(set(self.checks) - set(CHECKS))
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; known checks: {list(CHECKS)}")
        if not self.plan.exhaustive:
            bad = sorted(set(self.checks) & {"exhaustive_identity", "rank_transform"})
            if bad:
                raise ConfigError(f"checks {bad} require an exhaustive sampling plan")
        if "beta_zero" in self.checks and self.beta != 0.0:
            raise ConfigError("the beta_zero check requires beta = 0")

    @classmethod
    def from_json(cls, path: str | Path, seed_override: int | None = None) -> "OracleScenario":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"scenario {path} must be a JSON object")
        return cls.from_dict(raw, seed_override)

    @classmethod
    def from_dict(cls, raw: dict, seed_override: int | None = None) -> "OracleScenario":
        allowed = (
            "label",
            "chain_length",
            "beta",
            "wild_type",
            "classifier",
            "interaction",
            "prior",
            "plan",
            "seed",
            "checks",
        )
        unknown = sorted(set(raw) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown scenario keys {unknown}; allowed keys are {list(allowed)}")
        for required in ("label", "chain_length", "wild_type"):
            if required not in raw:
                raise ConfigError(f"scenario is missing required key {required!r}")
        classifier = raw.get("classifier", {})
        if not isinstance(classifier, dict):
            raise ConfigError("scenario classifier must be an object")
        bad = sorted(set(classifier) - {"kind", "kappa", "threshold"})
        if bad:
            raise ConfigError(f"unknown classifier keys {bad}")
        plan_raw = raw.get("plan", {})
        if not isinstance(plan_raw, dict):
            raise ConfigError("scenario plan must be an object")
        bad = sorted(set(plan_raw) - {"exhaustive", "n_folded", "n_unfolded"})
        if bad:
            raise ConfigError(f"unknown plan keys {bad}")
        seed = int(raw.get("seed", 0))
        if seed_override is not None:
            seed = seed_override
        interaction = raw.get("interaction")
        if interaction is not None and not isinstance(interaction, dict):
            raise ConfigError("scenario interaction must be an object of pair energies")
        prior = raw.get("prior", "uniform")
        if prior == "uniform":
            prior = None
        elif not isinstance(prior, dict):
            raise ConfigError('scenario prior must be "uniform" or an object of probabilities')
        checks = raw.get("checks", list(CHECKS))
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            raise ConfigError("scenario checks must be a list of check names")
        try:
            plan = SamplingPlan(
                exhaustive=bool(plan_raw.get("exhaustive", True)),
                n_folded=int(plan_raw.get("n_folded", 0)),
                n_unfolded=int(plan_raw.get("n_unfolded", 0)),
                seed=seed,
            )
        except LatticeError as exc:
            raise ConfigError(str(exc)) from None
        threshold = classifier.get("threshold")
        scenario = cls(
            label=str(raw["label"]),
            chain_length=int(raw["chain_length"]),
            beta=float(raw.get("beta", 1.0)),
            wild_type=str(raw["wild_type"]),
            classifier_kind=str(classifier.get("kind", "soft")),
            kappa=float(classifier.get("kappa", DEFAULT_KAPPA)),
            threshold=None if threshold is None else float(threshold),
            interaction_pairs=None if interaction is None else {str(k): float(v) for k, v in interaction.items()},
            prior=None if prior is None else {str(k): float(v) for k, v in prior.items()},
            plan=plan,
            seed=seed,
            checks=_select_checks(tuple(checks), plan, float(raw.get("beta", 1.0)), explicit="checks" in raw),
        )
        return scenario

    def snapshot(self) -> dict:
        return {
            "label": self.label,
            "chain_length": self.chain_length,
            "beta": self.beta,
            "wild_type": self.wild_type,
            "classifier": {
                "kind": self.classifier_kind,
                "kappa": self.kappa,
                "threshold": self.threshold,
            },
            "interaction": self.interaction_pairs,
            "prior": "uniform" if self.prior is None else self.prior,
            "plan": {
                "exhaustive": self.plan.exhaustive,
                "n_folded": self.plan.n_folded,
                "n_unfolded": self.plan.n_unfolded,
            },
            "seed": self.seed,
            "checks": list(self.checks),
        }


def _select_checks(
    requested: tuple[str, ...], plan: SamplingPlan, beta: float, explicit: bool
) -> tuple[str, ...]:
    """Default check list trimmed to what the scenario can satisfy.

    Explicitly requested checks are kept as-is so impossible requests fail
    validation instead of being silently dropped.
    """
    if explicit:
        return requested
    selected = list(requested)
    if not plan.exhaustive:
        selected = [c for c in selected if c not in ("exhaustive_identity", "rank_transform")]
    if beta != 0.0:
        selected = [c for c in selected if c != "beta_zero"]
    return tuple(selected)


def build_system(scenario: OracleScenario) -> tuple[LatticeSystem, SequenceFamily]:
    """Instantiate the lattice system and candidate family for a scenario."""
    interaction = (
        InteractionMatrix.from_pairs(scenario.interaction_pairs)
        if scenario.interaction_pairs
        else None
    )
    try:
        system = LatticeSystem.build(
            scenario.chain_length,
            scenario.beta,
            scenario.classifier_kind,
            scenario.kappa,
            scenario.threshold,
            interaction,
        )
    except LatticeError as exc:
        raise ConfigError(str(exc)) from None
    if scenario.wild_type == "random":
        rng = np.random.default_rng(np.random.SeedSequence([scenario.seed, 0x77697464]))
        letters = "".join(rng.choice(list(system.alphabet.letters), scenario.chain_length))
        wild_type = Sequence(letters, system.alphabet)
    else:
        wild_type = Sequence(scenario.wild_type, system.alphabet)
    prior = None
    if scenario.prior is not None:
        prior = CandidateMarginal.from_probs(scenario.prior)
    family = SequenceFamily.single_mutants(wild_type, prior)
    return system, family


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _check_conservation(system: LatticeSystem, family: SequenceFamily) -> CheckResult:
    worst = 0.0
    for cand in family.candidates:
        r = log_partition_functions(system, cand)
        total = float(np.logaddexp(r.log_Z_folded, r.log_Z_unfolded))
        worst = max(worst, abs(math.expm1(total - r.log_Z)))
    return CheckResult(
        "conservation",
        worst <= CONSERVATION_TOL,
        worst,
        CONSERVATION_TOL,
        f"Z_F + Z_U vs Z over {family.n_candidates} candidates (relative)",
    )


def _check_posterior_normalization(system: LatticeSystem, family: SequenceFamily) -> CheckResult:
    matrix = posterior_log_matrix(system, family)
    totals = logsumexp(matrix, axis=1)
    worst = float(np.max(np.abs(np.expm1(totals))))
    return CheckResult(
        "posterior_normalization",
        worst <= POSTERIOR_TOL,
        worst,
        POSTERIOR_TOL,
        f"row sums over {matrix.shape[0]} conformations",
    )


def _check_antisymmetry(system: LatticeSystem, family: SequenceFamily) -> CheckResult:
    wt = family.wild_type
    worst = 0.0
    for mt in family.mutants():
        worst = max(worst, abs(exact_ddg(system, wt, mt) + exact_ddg(system, mt, wt)))
    return CheckResult(
        "antisymmetry",
        worst <= ANTISYMMETRY_TOL,
        worst,
        ANTISYMMETRY_TOL,
        "exact_ddg(wt, mt) + exact_ddg(mt, wt) over all mutants",
    )


def _check_exhaustive_identity(
    system: LatticeSystem, family: SequenceFamily, tables
) -> CheckResult:
    wt = family.wild_type
    worst = 0.0
    for mt in family.mutants():
        est = ddg_full(
            tables.folded,
            tables.unfolded,
            wt,
            mt,
            folded_log_weights=tables.folded_log_weights,
            unfolded_log_weights=tables.unfolded_log_weights,
        )
        worst = max(worst, abs(est.value - exact_ddg(system, wt, mt)))
    return CheckResult(
        "exhaustive_identity",
        worst <= IDENTITY_TOL,
        worst,
        IDENTITY_TOL,
        "ddg_full on exhaustively weighted tables vs exact_ddg",
    )


def _check_rank_transform(system: LatticeSystem, family: SequenceFamily, tables) -> CheckResult:
    wt = family.wild_type
    p_wt = occupancy_folded(system, wt)
    worst = 0.0
    for mt in family.mutants():
        folded = ensemble_score(
            tables.folded, wt, mt, log_weights=tables.folded_log_weights
        ).log_mean_ratio
        pseudo = folded - tables.marginal.log_ratio(wt, mt)
        recovered = rank_transform(-pseudo, p_wt)
        worst = max(worst, abs(recovered - exact_stability(system, mt)))
    return CheckResult(
        "rank_transform",
        worst <= RANK_TOL,
        worst,
        RANK_TOL,
        "rank_transform of the negated folded pseudo change vs exact stability",
    )


def _check_proposal_bias(system: LatticeSystem, family: SequenceFamily) -> CheckResult:
    worst = -math.inf
    for cand in family.candidates:
        bias = folded_proposal_bias(system, family.wild_type, cand, "F")
        worst = max(worst, bias.biased - bias.bound)
    return CheckResult(
        "proposal_bias",
        worst <= BIAS_TOL,
        worst,
        BIAS_TOL,
        "biased - exact/p(F|wt) over all candidates (must be <= 0)",
    )


def _check_beta_zero(system: LatticeSystem, family: SequenceFamily) -> CheckResult:
    wt = family.wild_type
    worst = 0.0
    for mt in family.mutants():
        worst = max(worst, abs(exact_ddg(system, wt, mt)))
    return CheckResult(
        "beta_zero",
        worst <= BETA_ZERO_TOL,
        worst,
        BETA_ZERO_TOL,
        "exact_ddg at beta = 0 (occupancies are sequence-independent)",
    )


@dataclass(frozen=True, eq=False)
class ScenarioOutcome:
    """Everything one oracle run produced."""

    scenario: OracleScenario
    system: LatticeSystem
    family: SequenceFamily
    checks: tuple[CheckResult, ...]
    emitted: dict[str, str]
    report_path: Path | None

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def report_dict(self) -> dict:
        return {
            "format": SCENARIO_FORMAT,
            "version": SCENARIO_VERSION,
            "scenario": self.scenario.snapshot(),
            "n_conformations": self.system.n_conformations,
            "max_contacts": self.system.max_contacts,
            "wild_type": self.family.wild_type.letters,
            "p_folded_wild_type": occupancy_folded(self.system, self.family.wild_type),
            "emitted": dict(sorted(self.emitted.items())),
            "checks": [c.to_dict() for c in self.checks],
            "all_passed": self.all_passed,
        }


def run_scenario(scenario: OracleScenario, out_dir: str | Path) -> ScenarioOutcome:
    """Emit a scenario's files and run its verification checks.

    The emitted set always includes the two likelihood tables, the
    candidate marginal, and a dataset whose targets are exact stability
    changes; exhaustive plans add weight sidecars and an evaluation config
    wired to the emitted files. Check failures do not raise here; the
    outcome reports them and ``require_passed`` escalates.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    system, family = build_system(scenario)
    tables, files = emit_oracle_tables(system, family, scenario.plan, out_dir, scenario.label)
    emitted = {
        "folded_table": files.folded.name,
        "unfolded_table": files.unfolded.name,
        "marginal": files.marginal.name,
    }
    if files.folded_weights is not None:
        emitted["folded_weights"] = files.folded_weights.name
    if files.unfolded_weights is not None:
        emitted["unfolded_weights"] = files.unfolded_weights.name

    wt = family.wild_type
    records = []
    for mt in family.mutants():
        mutations = family.mutation_of(mt)
        variant = VariantSpec(wt, mutations)
        records.append(DatasetRecord(scenario.label, variant, exact_ddg(system, wt, mt), False))
    dataset = ExperimentalDataset(tuple(records), min_variants_per_protein=2)
    dataset_path = out_dir / f"{scenario.label}_dataset.csv"
    save_experimental_dataset(dataset, dataset_path)
    emitted["dataset"] = dataset_path.name

    if scenario.plan.exhaustive:
        config_path = out_dir / f"{scenario.label}_eval_config.json"
        config_path.write_text(
            json.dumps(
                {
                    "dataset": {
                        "path": dataset_path.name,
                        "min_variants_per_protein": 2,
                    },
                    "tables": {
                        "folded_multi": files.folded.name,
                        "unfolded_mc": files.unfolded.name,
                    },
                    "strategies": ["folded_multi", "full_f_multi_u_multi"],
                    "evaluation": {"mode": "whole_sequence"},
                    "seed": scenario.seed,
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
        emitted["eval_config"] = config_path.name

    runners = {
        "conservation": lambda: _check_conservation(system, family),
        "posterior_normalization": lambda: _check_posterior_normalization(system, family),
        "antisymmetry": lambda: _check_antisymmetry(system, family),
        "exhaustive_identity": lambda: _check_exhaustive_identity(system, family, tables),
        "rank_transform": lambda: _check_rank_transform(system, family, tables),
        "proposal_bias": lambda: _check_proposal_bias(system, family),
        "beta_zero": lambda: _check_beta_zero(system, family),
    }
    checks = tuple(runners[name]() for name in scenario.checks)

    outcome = ScenarioOutcome(scenario, system, family, checks, emitted, None)
    report_path = out_dir / f"{scenario.label}_oracle_report.json"
    report_path.write_text(json.dumps(outcome.report_dict(), indent=2, sort_keys=True) + "\n")
    return ScenarioOutcome(scenario, system, family, checks, emitted, report_path)


def require_passed(outcome: ScenarioOutcome) -> None:
    """Raise the acceptance-grade error when any scenario check failed."""
    failures = outcome.failures()
    if failures:
        summary = "; ".join(
            f"{c.name} (worst {c.worst:.3e} > {c.tolerance:.1e})" for c in failures
        )
        raise OracleCheckError(f"oracle checks failed: {summary}")

"""Exact 2-D lattice model used as a brute-force oracle.

Chains of length L live on the square lattice as self-avoiding walks,
enumerated completely with the 8-fold dihedral symmetry quotiented out (first
step fixed east, first turn fixed left). Contact energies act between
residues that are lattice neighbors but at least 3 apart along the chain;
the default interaction gives H-H contacts energy -1 and everything else 0.

A state classifier assigns each conformation a folding probability from its
contact count (soft logistic by default, hard threshold as a variant), which
partitions the Boltzmann ensemble into folded and unfolded sub-ensembles.
Everything downstream - partition functions, occupancies, stability changes,
posteriors over a candidate sequence family, conditional sampling - is
computed by direct summation in log space, so estimator implementations can
be checked against exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Mapping, Protocol, runtime_checkable

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from .alphabet import HP, Alphabet
from .errors import LatticeError
from .freqmodel import CandidateMarginal, save_candidate_marginal
from .tables import (
    LikelihoodTable,
    save_likelihood_table,
    save_log_weights,
    weights_path,
)
from .variants import Mutation, Sequence

MIN_CHAIN_LENGTH = 4
MAX_CHAIN_LENGTH = 12

DEFAULT_KAPPA = 4.0

_LEFT = {(1, 0): (0, 1), (0, 1): (-1, 0), (-1, 0): (0, -1), (0, -1): (1, 0)}
_RIGHT = {v: k for k, v in _LEFT.items()}

Point = tuple[int, int]


@dataclass(frozen=True)
class Conformation:
    """One self-avoiding walk, identified by its move string.

    Moves are relative turns over {L, R, S} (left, right, straight), one per
    step after the first; the first step is the implied move east. Contacts
    are chain-index pairs (i, j), j >= i + 3, whose lattice points are
    nearest neighbors.
    """

    moves: str
    points: tuple[Point, ...]
    contacts: tuple[tuple[int, int], ...]

    @property
    def n_contacts(self) -> int:
        return len(self.contacts)

    @property
    def length(self) -> int:
        return len(self.points)

    def __str__(self) -> str:
        return self.moves or "<dimer>"


def _contacts_of(points: tuple[Point, ...]) -> tuple[tuple[int, int], ...]:
    found = []
    for i in range(len(points)):
        xi, yi = points[i]
        for j in range(i + 3, len(points)):
            xj, yj = points[j]
            if abs(xi - xj) + abs(yi - yj) == 1:
                found.append((i, j))
    return tuple(found)


def conformation_from_moves(moves: str) -> Conformation:
    """Rebuild a conformation from its move string (inverse of serialization)."""
    pos = (0, 0)
    heading = (1, 0)
    points = [pos, (1, 0)]
    pos = (1, 0)
    occupied = {(0, 0), (1, 0)}
    for move in moves:
        if move == "L":
            heading = _LEFT[heading]
        elif move == "R":
            heading = _RIGHT[heading]
        elif move != "S":
            raise LatticeError(f"invalid move {move!r}; expected L, R, or S")
        pos = (pos[0] + heading[0], pos[1] + heading[1])
        if pos in occupied:
            raise LatticeError(f"move string {moves!r} is not self-avoiding")
        occupied.add(pos)
        points.append(pos)
    return Conformation(moves, tuple(points), _contacts_of(tuple(points)))


@lru_cache(maxsize=None)
def enumerate_conformations(chain_length: int) -> tuple[Conformation, ...]:
    """All symmetry-reduced self-avoiding walks of a given length.

    First step east; the first turn, if any, is forced left, leaving one
    representative per dihedral orbit (the straight walk represents its own
    smaller orbit). Deterministic lexicographic order in L < R < S.
    """
    if not MIN_CHAIN_LENGTH <= chain_length <= MAX_CHAIN_LENGTH:
        raise LatticeError(
            f"chain length must lie in [{MIN_CHAIN_LENGTH}, {MAX_CHAIN_LENGTH}], got {chain_length}"
        )
    results: list[Conformation] = []

    def extend(moves: str, points: list[Point], heading: Point, occupied: set[Point], turned: bool) -> None:
        if len(points) == chain_length:
            pts = tuple(points)
            results.append(Conformation(moves, pts, _contacts_of(pts)))
            return
        options = "LRS" if turned else "LS"
        for move in options:
            if move == "L":
                new_heading = _LEFT[heading]
            elif move == "R":
                new_heading = _RIGHT[heading]
            else:
                new_heading = heading
            nxt = (points[-1][0] + new_heading[0], points[-1][1] + new_heading[1])
            if nxt in occupied:
                continue
            occupied.add(nxt)
            points.append(nxt)
            extend(moves + move, points, new_heading, occupied, turned or move != "S")
            points.pop()
            occupied.remove(nxt)

    extend("", [(0, 0), (1, 0)], (1, 0), {(0, 0), (1, 0)}, False)
    return tuple(sorted(results, key=lambda c: c.moves))


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Symmetric contact energies over a residue alphabet."""

    alphabet: Alphabet
    energies: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.energies, dtype=float)
        object.__setattr__(self, "energies", arr)
        n = len(self.alphabet)
        if arr.shape != (n, n):
            raise LatticeError(f"interaction matrix shape {arr.shape} does not match alphabet size {n}")
        if not np.all(np.isfinite(arr)):
            raise LatticeError("interaction energies must be finite")
        if not np.array_equal(arr, arr.T):
            raise LatticeError("interaction matrix must be symmetric")

    @classmethod
    def hp_default(cls) -> "InteractionMatrix":
        energies = np.zeros((2, 2))
        h = HP.index("H")
        energies[h, h] = -1.0
        return cls(HP, energies)

    @classmethod
    def from_pairs(cls, pairs: Mapping[str, float], alphabet: Alphabet = HP) -> "InteractionMatrix":
        """Build from pair keys like {"HH": -1.0}; unlisted pairs are 0."""
        energies = np.zeros((len(alphabet), len(alphabet)))
        for key, value in pairs.items():
            if len(key) != 2:
                raise LatticeError(f"pair key {key!r} must have exactly two letters")
            i, j = alphabet.index(key[0]), alphabet.index(key[1])
            energies[i, j] = value
            energies[j, i] = value
        return cls(alphabet, energies)

    def pair_energy(self, a: str, b: str) -> float:
        return float(self.energies[self.alphabet.index(a), self.alphabet.index(b)])


def energy(conformation: Conformation, sequence: Sequence, interaction: InteractionMatrix) -> float:
    """Contact energy of a sequence threaded onto a conformation."""
    if len(sequence) != conformation.length:
        raise LatticeError(
            f"sequence length {len(sequence)} does not match chain length {conformation.length}"
        )
    idx = [interaction.alphabet.index(c) for c in sequence.letters]
    total = 0.0
    for i, j in conformation.contacts:
        total += float(interaction.energies[idx[i], idx[j]])
    return total


@runtime_checkable
class StateClassifier(Protocol):
    """Soft assignment of conformations to the folded state.

    Built-in classifiers depend on the conformation only; the sequence
    argument exists so custom classifiers can probe sequence dependence.
    """

    def p_folded(self, conformation: Conformation, sequence: Sequence | None = None) -> float: ...

    def log_p_folded(self, conformation: Conformation, sequence: Sequence | None = None) -> float: ...

    def log_p_unfolded(self, conformation: Conformation, sequence: Sequence | None = None) -> float: ...


@dataclass(frozen=True)
class SoftContactClassifier:
    """Logistic folding probability in the contact count."""

    threshold: float
    kappa: float = DEFAULT_KAPPA

    def _z(self, conformation: Conformation) -> float:
        return self.kappa * (conformation.n_contacts - self.threshold)

    def p_folded(self, conformation: Conformation, sequence: Sequence | None = None) -> float:
        return float(expit(self._z(conformation)))

    def log_p_folded(self, conformation: Conformation, sequence: Sequence | None = None) -> float:
        return float(log_expit(self._z(conformation)))

    def log_p_unfolded(self, conformation: Conformation, sequence: Sequence | None = None) -> float:
        return float(log_expit(-self._z(conformation)))


@dataclass(frozen=True)
class HardContactClassifier:
    """Indicator folding assignment: folded iff contacts >= threshold."""

    threshold: float

    def p_folded(self, conformation: Conformation, sequence: Sequence | None = None) -> float:
        return 1.0 if conformation.n_contacts >= self.threshold else 0.0

    def log_p_folded(self, conformation: Conformation, sequence: Sequence | None = None) -> float:
        return 0.0 if conformation.n_contacts >= self.threshold else -math.inf

    def log_p_unfolded(self, conformation: Conformation, sequence: Sequence | None = None) -> float:
        return -math.inf if conformation.n_contacts >= self.threshold else 0.0


CLASSIFIER_KINDS = ("soft", "hard")


def make_classifier(kind: str, threshold: float, kappa: float = DEFAULT_KAPPA) -> StateClassifier:
    if kind == "soft":
        return SoftContactClassifier(threshold, kappa)
    if kind == "hard":
        return HardContactClassifier(threshold)
    raise LatticeError(f"unknown classifier kind {kind!r}; expected one of {CLASSIFIER_KINDS}")


@dataclass(frozen=True, eq=False)
class LatticeSystem:
    """A chain length, its enumerated conformations, energies, and classifier."""

    chain_length: int
    conformations: tuple[Conformation, ...]
    interaction: InteractionMatrix
    beta: float
    classifier: StateClassifier

    def __post_init__(self) -> None:
        if not math.isfinite(self.beta) or self.beta < 0:
            raise LatticeError(f"beta must be finite and >= 0, got {self.beta}")
        if not self.conformations:
            raise LatticeError("system has no conformations")
        for conf in self.conformations:
            if conf.length != self.chain_length:
                raise LatticeError(
                    f"conformation {conf.moves!r} has length {conf.length}, expected {self.chain_length}"
                )

    @classmethod
    def build(
        cls,
        chain_length: int,
        beta: float = 1.0,
        classifier: str | StateClassifier = "soft",
        kappa: float = DEFAULT_KAPPA,
        threshold: float | None = None,
        interaction: InteractionMatrix | None = None,
    ) -> "LatticeSystem":
        """Assemble a system; the default threshold is half the maximum contact count."""
        conformations = enumerate_conformations(chain_length)
        if interaction is None:
            interaction = InteractionMatrix.hp_default()
        if isinstance(classifier, str):
            if threshold is None:
                threshold = max(c.n_contacts for c in conformations) / 2.0
            classifier = make_classifier(classifier, threshold, kappa)
        return cls(chain_length, conformations, interaction, beta, classifier)

    @property
    def alphabet(self) -> Alphabet:
        return self.interaction.alphabet

    @property
    def n_conformations(self) -> int:
        return len(self.conformations)

    @property
    def max_contacts(self) -> int:
        return max(c.n_contacts for c in self.conformations)

    @cached_property
    def contact_counts(self) -> np.ndarray:
        return np.array([c.n_contacts for c in self.conformations], dtype=float)

    @cached_property
    def log_p_folded(self) -> np.ndarray:
        return np.array([self.classifier.log_p_folded(c) for c in self.conformations])

    @cached_property
    def log_p_unfolded(self) -> np.ndarray:
        return np.array([self.classifier.log_p_unfolded(c) for c in self.conformations])

    def log_p_state(self, state: str) -> np.ndarray:
        if state == "F":
            return self.log_p_folded
        if state == "U":
            return self.log_p_unfolded
        raise LatticeError(f"state must be 'F' or 'U', got {state!r}")

    def check_sequence(self, sequence: Sequence) -> None:
        if len(sequence) != self.chain_length:
            raise LatticeError(
                f"sequence length {len(sequence)} does not match chain length {self.chain_length}"
            )
        for letter in sequence.letters:
            if letter not in self.alphabet:
                raise LatticeError(f"sequence letter {letter!r} not in lattice alphabet")

    def energy_vector(self, sequence: Sequence) -> np.ndarray:
        self.check_sequence(sequence)
        return np.array([energy(c, sequence, self.interaction) for c in self.conformations])

    def boltzmann_log_weights(self, sequence: Sequence) -> np.ndarray:
        return -self.beta * self.energy_vector(sequence)


@dataclass(frozen=True)
class PartitionResult:
    """Per-state and total log partition functions for one sequence."""

    log_Z_folded: float
    log_Z_unfolded: float
    log_Z: float


def log_partition_functions(system: LatticeSystem, sequence: Sequence) -> PartitionResult:
    lw = system.boltzmann_log_weights(sequence)
    log_zf = float(logsumexp(lw + system.log_p_folded))
    log_zu = float(logsumexp(lw + system.log_p_unfolded))
    log_z = float(logsumexp(lw))
    return PartitionResult(log_zf, log_zu, log_z)


def partition_functions(system: LatticeSystem, sequence: Sequence) -> tuple[float, float]:
    """(Z_folded, Z_unfolded) in linear scale; a zero-mass state gives 0.0.

    Exactly-rounded linear summation, so count identities (all Boltzmann
    weights 1 at beta = 0) survive in the returned floats. Log-scale work
    should go through log_partition_functions instead.
    """
    lw = system.boltzmann_log_weights(sequence)
    with np.errstate(over="ignore"):
        folded_terms = np.exp(lw + system.log_p_folded)
        unfolded_terms = np.exp(lw + system.log_p_unfolded)
    return math.fsum(folded_terms), math.fsum(unfolded_terms)


def occupancy_folded(system: LatticeSystem, sequence: Sequence) -> float:
    """Exact p(F | sequence, beta) in [0, 1]."""
    r = log_partition_functions(system, sequence)
    if r.log_Z_folded == -math.inf:
        return 0.0
    if r.log_Z_unfolded == -math.inf:
        return 1.0
    return float(expit(r.log_Z_folded - r.log_Z_unfolded))


def exact_stability(system: LatticeSystem, sequence: Sequence) -> float:
    """ln(Z_unfolded / Z_folded): the sequence's folding free energy in kT units."""
    r = log_partition_functions(system, sequence)
    if r.log_Z_folded == -math.inf or r.log_Z_unfolded == -math.inf:
        raise LatticeError(
            "classifier assigns zero mass to a state; stability is undefined "
            f"(log Z_F = {r.log_Z_folded}, log Z_U = {r.log_Z_unfolded})"
        )
    return r.log_Z_unfolded - r.log_Z_folded


def exact_ddg(system: LatticeSystem, wild_type: Sequence, mutant: Sequence) -> float:
    """Exact stability change of a mutation, antisymmetric under swap."""
    return exact_stability(system, mutant) - exact_stability(system, wild_type)


@dataclass(frozen=True, eq=False)
class SequenceFamily:
    """The candidate sequences a posterior is computed over, with their prior."""

    wild_type: Sequence
    candidates: tuple[Sequence, ...]
    prior: CandidateMarginal

    def __post_init__(self) -> None:
        if not self.candidates:
            raise LatticeError("sequence family needs at least one candidate")
        length = len(self.wild_type)
        for cand in self.candidates:
            if len(cand) != length:
                raise LatticeError("all family candidates must share the wild-type length")
        letters = [c.letters for c in self.candidates]
        if len(set(letters)) != len(letters):
            raise LatticeError("family candidates must be distinct")
        if self.wild_type.letters not in letters:
            raise LatticeError("wild type must be a member of its own family")
        if set(self.prior.log_probs) != set(letters):
            raise LatticeError("prior support must equal the candidate set")

    @classmethod
    def single_mutants(
        cls,
        wild_type: Sequence,
        prior: CandidateMarginal | None = None,
    ) -> "SequenceFamily":
        """Wild type plus every single mutant, uniform prior by default."""
        candidates = [wild_type]
        for position in range(1, len(wild_type) + 1):
            current = wild_type.letter_at(position)
            for letter in wild_type.alphabet:
                if letter != current:
                    candidates.append(
                        Sequence(
                            wild_type.letters[: position - 1] + letter + wild_type.letters[position:],
                            wild_type.alphabet,
                        )
                    )
        if prior is None:
            prior = CandidateMarginal.uniform([c.letters for c in candidates])
        return cls(wild_type, tuple(candidates), prior)

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    def index(self, sequence: Sequence | str) -> int:
        letters = str(sequence)
        for i, cand in enumerate(self.candidates):
            if cand.letters == letters:
                return i
        raise LatticeError(f"sequence {letters!r} is not in the family")

    def mutants(self) -> tuple[Sequence, ...]:
        return tuple(c for c in self.candidates if c.letters != self.wild_type.letters)

    def mutation_of(self, candidate: Sequence) -> tuple[Mutation, ...]:
        positions = self.wild_type.differing_positions(candidate)
        return tuple(
            Mutation(p, self.wild_type.letter_at(p), candidate.letter_at(p)) for p in positions
        )


def posterior_log_matrix(system: LatticeSystem, family: SequenceFamily) -> np.ndarray:
    """ln p(candidate | conformation) for every conformation (rows) and candidate.

    Bayes inversion of the exact Boltzmann likelihood: the unnormalized
    column for candidate a is -beta * E_a(x) - ln Z_a + ln prior(a); rows
    are then normalized over the candidate set.
    """
    columns = []
    for cand in family.candidates:
        lw = system.boltzmann_log_weights(cand)
        log_z = float(logsumexp(lw))
        columns.append(lw - log_z + family.prior.log_prob(cand))
    matrix = np.stack(columns, axis=1)
    norm = logsumexp(matrix, axis=1, keepdims=True)
    return matrix - norm


def exact_posterior(
    system: LatticeSystem, conformation: Conformation, family: SequenceFamily
) -> dict[str, float]:
    """Posterior over candidates for one conformation, in linear probabilities."""
    try:
        row_index = system.conformations.index(conformation)
    except ValueError:
        raise LatticeError(f"conformation {conformation.moves!r} is not part of the system") from None
    matrix = posterior_log_matrix(system, family)
    row = matrix[row_index]
    return {cand.letters: float(np.exp(row[i])) for i, cand in enumerate(family.candidates)}


def conditional_log_probs(system: LatticeSystem, sequence: Sequence, state: str) -> np.ndarray:
    """Normalized ln p(conformation | state, sequence, beta) over all conformations."""
    lw = system.boltzmann_log_weights(sequence) + system.log_p_state(state)
    total = logsumexp(lw)
    if total == -math.inf:
        raise LatticeError(f"state {state!r} has zero mass for sequence {sequence.letters!r}")
    return lw - total


def sample_conditional(
    system: LatticeSystem,
    sequence: Sequence,
    state: str,
    n: int,
    seed: int | np.random.Generator = 0,
) -> tuple[Conformation, ...]:
    """n independent draws from the state-conditional Boltzmann distribution."""
    if n < 0:
        raise LatticeError(f"sample count must be >= 0, got {n}")
    if n == 0:
        return ()
    probs = np.exp(conditional_log_probs(system, sequence, state))
    probs = probs / probs.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    indices = rng.choice(len(system.conformations), size=n, p=probs)
    return tuple(system.conformations[int(i)] for i in indices)


@dataclass(frozen=True)
class SamplingPlan:
    """How oracle tables are populated: exhaustive weighting or sampled draws."""

    exhaustive: bool = True
    n_folded: int = 0
    n_unfolded: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.exhaustive and (self.n_folded < 1 or self.n_unfolded < 1):
            raise LatticeError("sampled plan needs n_folded >= 1 and n_unfolded >= 1")


@dataclass(frozen=True, eq=False)
class OracleTables:
    """In-memory oracle emission: per-state tables, weights, and the marginal."""

    folded: LikelihoodTable
    unfolded: LikelihoodTable
    folded_log_weights: dict[str, float] | None
    unfolded_log_weights: dict[str, float] | None
    marginal: CandidateMarginal


def build_oracle_tables(
    system: LatticeSystem,
    family: SequenceFamily,
    plan: SamplingPlan,
    ensemble_prefix: str = "oracle",
) -> OracleTables:
    """Likelihood tables whose entries are exact posteriors ln p(a | x).

    Exhaustive plans enumerate every conformation once per state and attach
    the exact conditional probabilities p(x | state, wild type) as
    log-weights; sampled plans draw conformations from those conditionals
    and weight samples equally. Structure ids are move strings (exhaustive)
    or draw-indexed move strings (sampled).
    """
    matrix = posterior_log_matrix(system, family)
    candidates = family.candidates

    def entries_for(indices: list[int], sids: list[str]) -> dict[tuple[str, str], float]:
        out: dict[tuple[str, str], float] = {}
        for sid, idx in zip(sids, indices):
            for c, cand in enumerate(candidates):
                out[(sid, cand.letters)] = float(matrix[idx, c])
        return out

    if plan.exhaustive:
        indices = list(range(system.n_conformations))
        sids = [c.moves for c in system.conformations]
        folded_entries = entries_for(indices, sids)
        unfolded_entries = dict(folded_entries)
        lw_f = conditional_log_probs(system, family.wild_type, "F")
        lw_u = conditional_log_probs(system, family.wild_type, "U")
        weights_f = {sid: float(lw_f[i]) for sid, i in zip(sids, indices)}
        weights_u = {sid: float(lw_u[i]) for sid, i in zip(sids, indices)}
    else:
        rng = np.random.default_rng(plan.seed)
        draws_f = sample_conditional(system, family.wild_type, "F", plan.n_folded, rng)
        draws_u = sample_conditional(system, family.wild_type, "U", plan.n_unfolded, rng)
        conf_index = {c.moves: i for i, c in enumerate(system.conformations)}
        sids_f = [f"s{k:04d}_{c.moves}" for k, c in enumerate(draws_f)]
        sids_u = [f"s{k:04d}_{c.moves}" for k, c in enumerate(draws_u)]
        folded_entries = entries_for([conf_index[c.moves] for c in draws_f], sids_f)
        unfolded_entries = entries_for([conf_index[c.moves] for c in draws_u], sids_u)
        weights_f = weights_u = None

    folded = LikelihoodTable(f"{ensemble_prefix}_F", "F", folded_entries)
    unfolded = LikelihoodTable(f"{ensemble_prefix}_U", "U", unfolded_entries)
    return OracleTables(folded, unfolded, weights_f, weights_u, family.prior)


@dataclass(frozen=True)
class OracleFiles:
    folded: Path
    unfolded: Path
    folded_weights: Path | None
    unfolded_weights: Path | None
    marginal: Path


def emit_oracle_tables(
    system: LatticeSystem,
    family: SequenceFamily,
    plan: SamplingPlan,
    out_dir: str | Path,
    prefix: str = "oracle",
) -> tuple[OracleTables, OracleFiles]:
    """Write oracle tables (plus weight sidecars and the candidate marginal).

    Byte-deterministic for a fixed plan: rows are sorted and floats use the
    canonical 13-significant-digit format.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = build_oracle_tables(system, family, plan, prefix)
    folded_path = out_dir / f"{prefix}_folded.csv"
    unfolded_path = out_dir / f"{prefix}_unfolded.csv"
    save_likelihood_table(tables.folded, folded_path)
    save_likelihood_table(tables.unfolded, unfolded_path)
    fw_path = uw_path = None
    if tables.folded_log_weights is not None:
        fw_path = weights_path(folded_path)
        save_log_weights(tables.folded_log_weights, fw_path)
    if tables.unfolded_log_weights is not None:
        uw_path = weights_path(unfolded_path)
        save_log_weights(tables.unfolded_log_weights, uw_path)
    marginal_path = out_dir / f"{prefix}_marginal.csv"
    save_candidate_marginal(tables.marginal, marginal_path)
    return tables, OracleFiles(folded_path, unfolded_path, fw_path, uw_path, marginal_path)


@dataclass(frozen=True)
class ProposalBias:
    """The flawed folded-proposal estimate of a state probability vs the truth."""

    biased: float
    exact: float
    p_folded_wt: float

    @property
    def bound(self) -> float:
        """The inequality's right-hand side, exact / p(F | wild type)."""
        return self.exact / self.p_folded_wt


def folded_proposal_bias(
    system: LatticeSystem, wild_type: Sequence, mutant: Sequence, state: str = "F"
) -> ProposalBias:
    """Estimate p(state | mutant) using folded-proposal importance sampling.

    The correct route integrates the importance ratio against the full
    Boltzmann distribution of the wild type; the flawed route integrates it
    against the folded-conditional distribution as if those samples were
    unconditional. The flawed estimate is bounded by exact / p(F | wt):
    conditioning on the folded state can only inflate the weight of
    folded-compatible conformations.
    """
    lw_wt = system.boltzmann_log_weights(wild_type)
    lw_mt = system.boltzmann_log_weights(mutant)
    log_z_wt = float(logsumexp(lw_wt))
    log_z_mt = float(logsumexp(lw_mt))
    # log importance ratio ln p(x|mt) - ln p(x|wt), exactly zero when mt == wt
    log_r = (lw_mt - log_z_mt) - (lw_wt - log_z_wt)
    log_p_state = system.log_p_state(state)
    log_den = logsumexp(lw_wt + system.log_p_folded)
    if log_den == -math.inf:
        raise LatticeError("folded state has zero mass for the wild type")
    log_num = logsumexp(lw_wt + system.log_p_folded + log_r + log_p_state)
    biased = float(np.exp(log_num - log_den))

    r_mt = log_partition_functions(system, mutant)
    log_z_state = r_mt.log_Z_folded if state == "F" else r_mt.log_Z_unfolded
    exact = 0.0 if log_z_state == -math.inf else float(np.exp(log_z_state - r_mt.log_Z))

    r_wt = log_partition_functions(system, wild_type)
    p_folded_wt = float(np.exp(r_wt.log_Z_folded - r_wt.log_Z))
    return ProposalBias(biased, exact, p_folded_wt)

"""Random valid-by-construction instances, violation-inducing mutations, and shrinking.

The generator builds finite spaces that satisfy the partial point-dependent
axiom family by construction: symmetric off-diagonal distances, diagonal
entries strictly below each row's off-diagonal minimum, and control values
set to the minimal admissible matrix inflated by a random factor.  The
axiom checker is then used as an oracle both ways: every generated space
must pass, and every mutation that undercuts the minimal control value
must be caught.  All randomness flows through numpy's default generator
(PCG64) from explicit seeds, so campaigns replay bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .axioms import A1, A2, A3, A4, Violation, check_axioms, minimal_theta
from .errors import MutationImpossibleError
from .spaces import AxiomProfile, FiniteSpace

_AXIOM_ARITY = {A1: 2, A2: 2, A3: 2, A4: 3}


@dataclass(frozen=True)
class FuzzConfig:
    trials: int
    seed: int
    n_min: int = 2
    n_max: int = 8
    profile: AxiomProfile = field(default_factory=AxiomProfile.pebm)
    mutation_factor: float = 0.9

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"need at least one trial, got {self.trials}")
        if self.n_min < 2 or self.n_max < self.n_min:
            raise ValueError(f"point-count range must satisfy 2 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]")
        if not 0.0 < self.mutation_factor < 1.0:
            raise ValueError(f"mutation factor must lie in (0, 1), got {self.mutation_factor}")


def gen_space(n: int, seed: int) -> FiniteSpace:
    """A random n-point space that is valid by construction for the partial family.

    Construction order (all draws from ``numpy.random.default_rng(seed)``):
    symmetric off-diagonal entries uniform on [0.1, 10]; each diagonal
    entry a uniform [0, 0.9] fraction of its row's off-diagonal minimum,
    which enforces small self-distance strictly and rules out spurious
    three-way equalities; control matrix = minimal admissible control
    inflated by one uniform [1, 3] factor.
    """
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    rng = np.random.default_rng(seed)
    P = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    P[iu] = rng.uniform(0.1, 10.0, size=len(iu[0]))
    P = P + P.T
    off = P + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
    row_min = off.min(axis=1)
    np.fill_diagonal(P, rng.uniform(0.0, 0.9, size=n) * row_min)
    theta = minimal_theta(P) * rng.uniform(1.0, 3.0)
    labels = tuple(range(n))
    return FiniteSpace(labels, P, np.maximum(theta, 1.0), AxiomProfile.pebm())


def mutate_theta(space: FiniteSpace, factor: float) -> FiniteSpace:
    """Lower one control entry past its minimal admissible value.

    Picks the triple with the smallest strictly positive triangle margin
    among those whose control entry sits strictly above the unit floor
    once minimized, then replaces that entry with max(1, factor * minimal
    value).  Dropping below the minimal value guarantees a triangle
    violation at that entry's binding triple.  When every entry's minimal
    value is already at the unit floor (every 2-point space, for example)
    no such mutation exists and :class:`MutationImpossibleError` is raised.
    """
    if not 0.0 < factor < 1.0:
        raise ValueError(f"mutation factor must lie in (0, 1), got {factor}")
    if space.Theta is None:
        raise MutationImpossibleError("space carries no control matrix")
    P = space.P
    diag = np.diag(P)
    theta_star = minimal_theta(P)
    T = space.Theta
    margins = T[:, None, :] * (P[:, :, None] + P[None, :, :]) - diag[None, :, None] - P[:, None, :]
    reducible = np.broadcast_to((theta_star > 1.0)[:, None, :], margins.shape)
    candidates = reducible & (margins > 0)
    if not np.any(candidates):
        raise MutationImpossibleError(
            "no strictly positive triangle margin with a control entry above its unit floor"
        )
    flat = np.where(candidates, margins, np.inf).reshape(-1)
    i, j, k = np.unravel_index(int(np.argmin(flat)), margins.shape)
    mutated = np.array(T)
    mutated[i, k] = max(1.0, factor * theta_star[i, k])
    return FiniteSpace(space.labels, P, mutated, space.declared_kind)


def shrink_space(space: FiniteSpace, violation: Violation, profile: AxiomProfile) -> tuple[FiniteSpace, Violation]:
    """Remove points while the violated axiom persists.

    Greedy: repeatedly drop the first point whose removal keeps at least
    one violation of the same axiom id, never going below the axiom's
    point arity.  Returns the smaller space and the first surviving
    violation of that axiom (in witness order).
    """
    arity = _AXIOM_ARITY[violation.axiom]
    current, current_violation = space, violation
    shrunk = True
    while shrunk and current.n > arity:
        shrunk = False
        for drop in range(current.n):
            keep = [i for i in range(current.n) if i != drop]
            candidate = FiniteSpace(
                tuple(current.labels[i] for i in keep),
                current.P[np.ix_(keep, keep)],
                None if current.Theta is None else current.Theta[np.ix_(keep, keep)],
                current.declared_kind,
            )
            report = check_axioms(candidate, profile)
            survivors = [v for v in report.violations if v.axiom == current_violation.axiom]
            if survivors:
                current, current_violation = candidate, survivors[0]
                shrunk = True
                break
    return current, current_violation


@dataclass(frozen=True)
class CounterexampleReport:
    """A violating space plus the violation it reproduces on re-check."""

    space: FiniteSpace
    violation: Violation
    shrunk: bool
    generation_seed: int

    def to_json_dict(self) -> dict:
        return {
            "space": self.space.to_json_dict(),
            "violation": self.violation.to_json_dict(),
            "shrunk": self.shrunk,
            "generation_seed": self.generation_seed,
        }


@dataclass
class CampaignResult:
    config: FuzzConfig
    generated_pass: int = 0
    generated_fail: int = 0
    mutations_caught: int = 0
    mutations_missed: int = 0
    mutations_impossible: int = 0
    counterexamples: list[CounterexampleReport] = field(default_factory=list)
    anomalies: list[str] = field(default_factory=list)

    @property
    def mutations_possible(self) -> int:
        return self.mutations_caught + self.mutations_missed

    @property
    def consistent(self) -> bool:
        """True when generator and checker never disagreed."""
        return self.generated_fail == 0 and self.mutations_missed == 0

    def to_json_dict(self) -> dict:
        return {
            "trials": self.config.trials,
            "seed": self.config.seed,
            "n_range": [self.config.n_min, self.config.n_max],
            "mutation_factor": self.config.mutation_factor,
            "generated_pass": self.generated_pass,
            "generated_fail": self.generated_fail,
            "mutations_possible": self.mutations_possible,
            "mutations_caught": self.mutations_caught,
            "mutations_missed": self.mutations_missed,
            "mutations_impossible": self.mutations_impossible,
            "counterexamples": len(self.counterexamples),
            "anomalies": list(self.anomalies),
            "consistent": self.consistent,
        }


def trial_parameters(config: FuzzConfig, trial: int) -> tuple[int, int]:
    """(n, generation seed) for one trial, derived only from (seed, trial).

    Trials are independent of each other, so they could run in any order
    or concurrently and produce the same campaign.
    """
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, trial]))
    n = int(rng.integers(config.n_min, config.n_max, endpoint=True))
    gen_seed = int(rng.integers(0, 2**63))
    return n, gen_seed


def fuzz_campaign(config: FuzzConfig) -> CampaignResult:
    """Generator/checker round-trip over many seeded trials.

    Every generated space must pass the configured profile (a failure is a
    bug in generator or checker and is shrunk and recorded); every
    possible mutation must be caught.  Caught mutations are shrunk and
    recorded too, giving a replayable counterexample corpus.
    """
    result = CampaignResult(config=config)
    for trial in range(config.trials):
        n, gen_seed = trial_parameters(config, trial)
        space = gen_space(n, gen_seed)
        report = check_axioms(space, config.profile)
        if report.passed:
            result.generated_pass += 1
        else:
            result.generated_fail += 1
            small, viol = shrink_space(space, report.violations[0], config.profile)
            result.counterexamples.append(CounterexampleReport(small, viol, True, gen_seed))
            result.anomalies.append(
                f"trial {trial}: generated space (n={n}, seed={gen_seed}) failed {report.violations[0].axiom}"
            )
            continue
        try:
            mutated = mutate_theta(space, config.mutation_factor)
        except MutationImpossibleError:
            result.mutations_impossible += 1
            continue
        mreport = check_axioms(mutated, config.profile)
        if mreport.passed:
            result.mutations_missed += 1
            result.anomalies.append(f"trial {trial}: mutation on (n={n}, seed={gen_seed}) went undetected")
        else:
            result.mutations_caught += 1
            small, viol = shrink_space(mutated, mreport.violations[0], config.profile)
            result.counterexamples.append(CounterexampleReport(small, viol, True, gen_seed))
    return result

"""Exhaustive axiom verification over finite spaces, with violation witnesses.

Four axiom clauses are checked, identified by stable ids:

* ``A1_indistancy``: the indistancy biconditional.  For zero-self-distance
  profiles this is "distance zero exactly on the diagonal"; for partial
  profiles the diagonal direction is the (vacuous) three-way equality and
  the off-diagonal direction forbids a spurious three-way equality
  p(x,x) = p(x,y) = p(y,y) at x != y.
* ``A2_small_self``: p(x,x) <= p(x,y) (partial profiles only).
* ``A3_symmetry``: p(x,y) = p(y,x).
* ``A4_triangle``: p(x,z) <= theta(x,z)[p(x,y) + p(y,z)] - p(y,y), the
  -p(y,y) term present only for partial profiles.  Witness triples are
  ordered (x, y, z) with y the intermediate point, and every ordered
  triple is checked, degenerate ones included.

Raw finite spaces are compared exactly: any negative inequality margin or
nonzero equality discrepancy is a violation.  Sampled grids of analytic
spaces use an absolute tolerance of 1e-12 for both equality discrepancies
and inequality margins, because closed forms that satisfy an axiom with
equality (max(x,z) = 1 * [max(x,y) + max(y,z)] - y at y <= min, say)
evaluate one ulp apart along different arithmetic routes.  Margins are
always reported exactly as computed.  Checks are evaluated as whole numpy
tensors, and violations are reported sorted lexicographically by witness,
so output is deterministic regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InfeasibleThetaError
from .spaces import AnalyticSpace, AxiomProfile, FiniteSpace, induced_ebm, sample_grid

A1 = "A1_indistancy"
A2 = "A2_small_self"
A3 = "A3_symmetry"
A4 = "A4_triangle"

GRID_EQ_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    """One failed axiom check, independently re-checkable at its witness.

    For the inequality axioms (A2, A4) ``margin = rhs - lhs`` and is
    negative.  For the equality axioms (A1 forward, A3) ``margin`` is the
    absolute discrepancy between the two sides and exceeds the tolerance.
    The one exception is the backward direction of A1 (a spurious
    three-way equality between distinct points), where ``margin`` is the
    equality spread, which is at most the tolerance by construction.
    """

    axiom: str
    witness: tuple[int, ...]
    lhs: float
    rhs: float
    margin: float

    def to_json_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "witness": list(self.witness),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Violation":
        return cls(d["axiom"], tuple(d["witness"]), float(d["lhs"]), float(d["rhs"]), float(d["margin"]))


@dataclass(frozen=True)
class CheckDetail:
    """One evaluated check (passing or not); collected only on request."""

    axiom: str
    witness: tuple[int, ...]
    lhs: float
    rhs: float
    margin: float


@dataclass
class AxiomReport:
    """Outcome of checking one profile over one finite space."""

    profile: AxiomProfile
    verdict: str
    checks_run: int
    violations: tuple[Violation, ...]
    worst_margin: float
    grid_relative: bool = False
    eq_tol: float = 0.0
    checks_by_axiom: dict = field(default_factory=dict)
    details: tuple[CheckDetail, ...] | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        d = {
            "profile": self.profile.tag,
            "verdict": self.verdict,
            "checks_run": self.checks_run,
            "violations": [v.to_json_dict() for v in self.violations],
            "grid_relative": self.grid_relative,
            "worst_margin": self.worst_margin,
            "checks_by_axiom": dict(self.checks_by_axiom),
        }
        if self.profile.s is not None:
            d["s"] = self.profile.s
        return d


def _theta_matrix(space: FiniteSpace, profile: AxiomProfile) -> np.ndarray:
    if profile.uses_theta_matrix:
        if space.Theta is None:
            raise ConfigurationError(
                f"profile {profile.label()} needs a control matrix but the space has none"
            )
        return space.Theta
    return np.full(space.P.shape, profile.constant_theta, dtype=float)


def check_axioms(
    space: FiniteSpace,
    profile: AxiomProfile,
    *,
    eq_tol: float = 0.0,
    collect_detail: bool = False,
    grid_relative: bool = False,
) -> AxiomReport:
    """Evaluate every axiom clause of ``profile`` over all tuples of ``space``.

    Pair clauses run over all n^2 ordered pairs, the triangle clause over
    all n^3 ordered triples.  Constant-coefficient profiles ignore any
    stored control matrix and use their own constant.
    """
    n = space.n
    if n < 1:
        raise ValueError("cannot check an empty space")
    P = space.P
    diag = np.diag(P).copy()
    T = _theta_matrix(space, profile)
    partial = profile.is_partial

    violations: list[Violation] = []
    details: list[CheckDetail] = [] if collect_detail else None
    slacks: list[float] = []
    counts: dict[str, int] = {}

    def note(axiom, witness, lhs, rhs, margin, slack, violated):
        slacks.append(slack)
        if violated:
            violations.append(Violation(axiom, witness, float(lhs), float(rhs), float(margin)))
        if details is not None:
            details.append(CheckDetail(axiom, witness, float(lhs), float(rhs), float(margin)))

    # A1: diagonal direction.
    counts[A1] = n * n
    for i in range(n):
        if partial:
            # x = y makes the three-way equality trivially true; recorded for the count.
            note(A1, (i,), diag[i], diag[i], 0.0, 0.0, False)
        else:
            disc = abs(diag[i])
            note(A1, (i,), diag[i], 0.0, disc, eq_tol - disc, disc > eq_tol)
    # A1: off-diagonal direction, all ordered pairs x != y.
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if partial:
                spread = max(abs(diag[i] - P[i, j]), abs(P[i, j] - diag[j]))
                note(A1, (i, j), diag[i], P[i, j], spread, spread - eq_tol, spread <= eq_tol)
            else:
                d = P[i, j]
                note(A1, (i, j), d, 0.0, d, d - eq_tol, d <= eq_tol)

    if partial:
        counts[A2] = n * n
        m2 = P - diag[:, None]
        for i, j in np.argwhere(m2 < -eq_tol):
            violations.append(Violation(A2, (int(i), int(j)), float(diag[i]), float(P[i, j]), float(m2[i, j])))
        slacks.append(float(m2.min()) + eq_tol)
        if details is not None:
            for i in range(n):
                for j in range(n):
                    details.append(CheckDetail(A2, (i, j), float(diag[i]), float(P[i, j]), float(m2[i, j])))

    counts[A3] = n * n
    asym = np.abs(P - P.T)
    for i, j in np.argwhere(asym > eq_tol):
        violations.append(
            Violation(A3, (int(i), int(j)), float(P[i, j]), float(P[j, i]), float(asym[i, j]))
        )
    slacks.append(float(eq_tol - asym.max()))
    if details is not None:
        for i in range(n):
            for j in range(n):
                details.append(CheckDetail(A3, (i, j), float(P[i, j]), float(P[j, i]), float(asym[i, j])))

    # A4 over all ordered triples (x, y, z); rhs matches _a4_sides term by term.
    counts[A4] = n * n * n
    rhs = T[:, None, :] * (P[:, :, None] + P[None, :, :])
    if partial:
        rhs = rhs - diag[None, :, None]
    lhs = np.broadcast_to(P[:, None, :], rhs.shape)
    m4 = rhs - lhs
    for i, j, k in np.argwhere(m4 < -eq_tol):
        violations.append(
            Violation(A4, (int(i), int(j), int(k)), float(lhs[i, j, k]), float(rhs[i, j, k]), float(m4[i, j, k]))
        )
    slacks.append(float(m4.min()) + eq_tol)
    if details is not None:
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    details.append(
                        CheckDetail(A4, (i, j, k), float(lhs[i, j, k]), float(rhs[i, j, k]), float(m4[i, j, k]))
                    )

    violations.sort(key=lambda v: (v.witness, v.axiom))
    return AxiomReport(
        profile=profile,
        verdict="fail" if violations else "pass",
        checks_run=sum(counts.values()),
        violations=tuple(violations),
        worst_margin=float(min(slacks)),
        grid_relative=grid_relative,
        eq_tol=eq_tol,
        checks_by_axiom=counts,
        details=tuple(details) if details is not None else None,
    )


def check_axioms_sampled(space: AnalyticSpace, n: int, profile: AxiomProfile) -> AxiomReport:
    """Check a uniform n-point discretization of an analytic space.

    The verdict is grid-relative: a pass is evidence, not proof, while any
    violation is a genuine counterexample in the underlying space.
    """
    return check_axioms(sample_grid(space, n), profile, eq_tol=GRID_EQ_TOL, grid_relative=True)


def _a4_sides(space: FiniteSpace, profile: AxiomProfile, i: int, j: int, k: int) -> tuple[float, float]:
    T = _theta_matrix(space, profile)
    lhs = float(space.P[i, k])
    rhs = float(T[i, k]) * (float(space.P[i, j]) + float(space.P[j, k]))
    if profile.is_partial:
        rhs -= float(space.P[j, j])
    return lhs, rhs


def recheck_violation(space: FiniteSpace, profile: AxiomProfile, violation: Violation) -> tuple[float, float]:
    """Recompute the two sides of a violation's axiom at its witness.

    Uses scalar arithmetic in the same operation order as the tensor
    checker, so results agree bit-exactly with the reported values.
    """
    w = violation.witness
    P = space.P
    if violation.axiom == A4:
        return _a4_sides(space, profile, *w)
    if violation.axiom == A3:
        return float(P[w[0], w[1]]), float(P[w[1], w[0]])
    if violation.axiom == A2:
        return float(P[w[0], w[0]]), float(P[w[0], w[1]])
    if violation.axiom == A1:
        if len(w) == 1:
            return float(P[w[0], w[0]]), 0.0
        return (float(P[w[0], w[0]]), float(P[w[0], w[1]])) if profile.is_partial else (float(P[w[0], w[1]]), 0.0)
    raise ValueError(f"unknown axiom id {violation.axiom!r}")


def minimal_theta(P) -> np.ndarray:
    """The pointwise-smallest control matrix giving ``P`` the triangle axiom.

    Entry (i, k) is max(1, max over j of (P(i,k) + P(j,j)) / (P(i,j) + P(j,k))),
    with each ratio nudged up by one part in 1e15: the bare quotient rounds
    below feasibility half the time, and the nudge keeps the returned
    matrix passing the checker's exact comparisons while staying minimal
    for every practical purpose (lowering a strict entry by any real
    amount recreates a violation).  A zero denominator with zero numerator
    contributes nothing; a zero denominator with positive numerator means
    no finite control value can work and raises
    :class:`InfeasibleThetaError` naming the triple.

    Requires P nonnegative and symmetric with every diagonal entry at most
    its row minimum (the small-self-distance axiom).
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"P must be square, got shape {P.shape}")
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise ValueError("P must be finite and nonnegative")
    if not np.array_equal(P, P.T):
        raise ValueError("P must be symmetric")
    diag = np.diag(P)
    if np.any(P < diag[:, None]):
        i, j = map(int, np.argwhere(P < diag[:, None])[0])
        raise ValueError(f"P({i},{i}) > P({i},{j}) violates the small-self-distance precondition")

    num = P[:, None, :] + diag[None, :, None]
    den = P[:, :, None] + P[None, :, :]
    zero_den = den == 0
    bad = zero_den & (num > 0)
    if np.any(bad):
        i, j, k = map(int, np.argwhere(bad)[0])
        raise InfeasibleThetaError((i, j, k))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(zero_den, -np.inf, num / np.where(zero_den, 1.0, den))
    raw = ratios.max(axis=1)
    # a ratio of exactly 1.0 implies numerator <= denominator, so the unit
    # floor is feasible there; only strict excesses need the nudge
    return np.where(raw > 1.0, raw * (1.0 + 1e-15), 1.0)


@dataclass(frozen=True)
class ImplicationResult:
    name: str
    applicable: bool
    passed: bool | None
    detail: str

    def to_json_dict(self) -> dict:
        return {"name": self.name, "applicable": self.applicable, "passed": self.passed, "detail": self.detail}


@dataclass
class ReductionReport:
    """Outcome of testing the profile implication lattice on one space."""

    declared_profile: AxiomProfile
    base: AxiomReport
    implications: tuple[ImplicationResult, ...]

    @property
    def passed(self) -> bool:
        return self.base.passed and all(r.passed for r in self.implications if r.applicable)

    def to_json_dict(self) -> dict:
        return {
            "declared_profile": self.declared_profile.label(),
            "base_verdict": self.base.verdict,
            "implications": [r.to_json_dict() for r in self.implications],
        }


def _zero_family(space: FiniteSpace) -> AxiomProfile:
    if space.Theta is not None:
        return AxiomProfile.ebm()
    s = space.declared_kind.s
    return AxiomProfile.b_metric(s) if s is not None else AxiomProfile.metric()


def _partial_family(space: FiniteSpace) -> AxiomProfile:
    if space.Theta is not None:
        return AxiomProfile.pebm()
    s = space.declared_kind.s
    return AxiomProfile.pbm(s) if s is not None else AxiomProfile.partial_metric()


def verify_reductions(space: FiniteSpace) -> ReductionReport:
    """Test the implications between axiom families on one concrete space.

    Implications whose hypotheses do not hold here are reported as not
    applicable rather than failing: a space with nonzero self-distance
    simply has nothing to say about the zero-self-distance families.
    """
    eq_tol = GRID_EQ_TOL if isinstance(space.labels[0], float) else 0.0
    base = check_axioms(space, space.declared_kind, eq_tol=eq_tol)
    results = []

    zero_diag = bool(np.all(np.diag(space.P) == 0))
    if not base.passed:
        skip = "declared profile does not hold; implications not applicable"
        for name in ("zero_self_distance_to_zero_family", "constant_control_to_constant_family", "zero_family_viewed_as_partial"):
            results.append(ImplicationResult(name, False, None, skip))
        return ReductionReport(space.declared_kind, base, tuple(results))

    # Zero diagonal: the space, viewed through its induced companion, should
    # satisfy the corresponding zero-self-distance family.
    if zero_diag:
        target = _zero_family(space)
        rep = check_axioms(induced_ebm(space), target, eq_tol=eq_tol)
        results.append(
            ImplicationResult(
                "zero_self_distance_to_zero_family",
                True,
                rep.passed,
                f"checked {target.label()}: {rep.verdict} ({rep.checks_run} checks)",
            )
        )
    else:
        i = int(np.argwhere(np.diag(space.P) != 0)[0][0])
        results.append(
            ImplicationResult(
                "zero_self_distance_to_zero_family",
                False,
                None,
                f"not applicable: nonzero self-distance at index {i}",
            )
        )

    # Constant control values: the space should satisfy the constant-s family.
    if space.declared_kind.uses_theta_matrix and space.Theta is not None:
        const = float(space.Theta.flat[0]) if np.all(space.Theta == space.Theta.flat[0]) else None
    else:
        const = space.declared_kind.constant_theta
    if const is not None:
        target = AxiomProfile.pbm(const) if space.declared_kind.is_partial else AxiomProfile.b_metric(const)
        rep = check_axioms(space, target, eq_tol=eq_tol)
        results.append(
            ImplicationResult(
                "constant_control_to_constant_family",
                True,
                rep.passed,
                f"checked {target.label()}: {rep.verdict} ({rep.checks_run} checks)",
            )
        )
    else:
        results.append(
            ImplicationResult(
                "constant_control_to_constant_family", False, None, "not applicable: control values are not constant"
            )
        )

    # A zero-self-distance space is also a partial-family space verbatim.
    if not space.declared_kind.is_partial and zero_diag:
        target = _partial_family(space)
        rep = check_axioms(space, target, eq_tol=eq_tol)
        results.append(
            ImplicationResult(
                "zero_family_viewed_as_partial",
                True,
                rep.passed,
                f"checked {target.label()}: {rep.verdict} ({rep.checks_run} checks)",
            )
        )
    else:
        reason = "declared profile is already partial" if space.declared_kind.is_partial else "nonzero self-distance"
        results.append(ImplicationResult("zero_family_viewed_as_partial", False, None, f"not applicable: {reason}"))

    return ReductionReport(space.declared_kind, base, tuple(results))

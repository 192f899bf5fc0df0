"""Picard iteration with contraction precondition checks and certified error bounds.

Three contraction families are supported, each with its own admissible
constant range and its own step bound along the iteration:

* ``banach``:          p(Tx, Ty) <= k p(x, y),                     k in [0, 1);
                       step bound k^n p(x0, x1).
* ``kannan``:          p(Tx, Ty) <= k [p(x, Tx) + p(y, Ty)],       k in [0, 1/2);
                       step bound (k/(1-k))^n p(x0, x1).
* ``modified_kannan``: p(Tx, Ty) <= k [p(x, Ty) + p(y, Ty)],       k in [0, 1/2);
                       step bound k^n p(x0, x1) + k sum_{t=1}^n k^(n-t) p(x_t, x_t).

Bounds are evaluated from realized trace data (step and self distances as
recorded, forward orientation); on a symmetric space this is exactly the
oriented quantity the theory bounds.  Verification reports say which mode
produced them: exhaustive pair enumeration on finite spaces, grid samples
on analytic ones, so a pass on a grid is evidence rather than proof.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .spaces import AnalyticSpace, FiniteSpace, Space, p_values, theta_values
from .sequences import SelfMap, orbit

BANACH = "banach"
KANNAN = "kannan"
MODIFIED_KANNAN = "modified_kannan"
FAMILIES = (BANACH, KANNAN, MODIFIED_KANNAN)

TRACE_CSV_HEADER = "n,x,step_dist,self_dist,bound,n_self"


@dataclass(frozen=True)
class ContractionSpec:
    """A contraction family together with its constant k."""

    family: str
    k: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "k", float(self.k))
        limit = 1.0 if self.family == BANACH else 0.5
        if not 0.0 <= self.k < limit:
            raise ValueError(f"family {self.family!r} requires k in [0, {limit}), got {self.k}")

    @property
    def theta_limit(self) -> float:
        """The strict upper bound 1/k the control values must stay under."""
        return float("inf") if self.k == 0 else 1.0 / self.k


@dataclass
class IterationTrace:
    """Per-step record of a Picard orbit.

    Row n carries x_n, step_dist(n) = p(x_n, x_{n+1}), self_dist(n) =
    p(x_n, x_n), the active family's theoretical bound for that step (nan
    when no family was supplied), and n_self(n) = n * self_dist(n).  The
    successor of the last row is kept in ``next_point`` so pair distances
    p(x_n, x_m) with m up to len(trace) can be recomputed.
    """

    x: tuple
    step_dist: tuple[float, ...]
    self_dist: tuple[float, ...]
    bound: tuple[float, ...]
    n_self: tuple[float, ...]
    next_point: object = None
    family: str | None = None
    k: float | None = None

    def __len__(self):
        return len(self.x)

    def all_points(self) -> tuple:
        """x_0 .. x_rows, including the successor of the last row when known."""
        return self.x + ((self.next_point,) if self.next_point is not None else ())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(TRACE_CSV_HEADER + "\n")
        for n in range(len(self)):
            buf.write(
                f"{n},{self.x[n]!r},{self.step_dist[n]!r},{self.self_dist[n]!r},"
                f"{self.bound[n]!r},{self.n_self[n]!r}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "IterationTrace":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != TRACE_CSV_HEADER:
            raise ValueError(f"trace CSV must start with header {TRACE_CSV_HEADER!r}")
        xs, steps, selfs, bounds, nselfs = [], [], [], [], []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 6:
                raise ValueError(f"malformed trace row: {ln!r}")
            xs.append(float(parts[1]))
            steps.append(float(parts[2]))
            selfs.append(float(parts[3]))
            bounds.append(float(parts[4]))
            nselfs.append(float(parts[5]))
        return cls(tuple(xs), tuple(steps), tuple(selfs), tuple(bounds), tuple(nselfs))


@dataclass(frozen=True)
class PreconditionResult:
    name: str
    verified: bool
    detail: str

    def to_json_dict(self) -> dict:
        return {"name": self.name, "verified": self.verified, "detail": self.detail}


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Machine-checked record of a candidate fixed point.

    Issued only when both the residual p(Tu, u) and the self-distance
    p(u, u) are within tolerance at the final iterate.
    """

    fixed_point: object
    residual: float
    self_distance: float
    iterations: int
    preconditions: tuple[PreconditionResult, ...] = ()
    unique_within_starts: bool | None = None

    def with_preconditions(self, preconditions, unique_within_starts=None) -> "ConvergenceCertificate":
        return replace(
            self,
            preconditions=tuple(preconditions),
            unique_within_starts=unique_within_starts
            if unique_within_starts is not None
            else self.unique_within_starts,
        )

    def to_json_dict(self) -> dict:
        return {
            "fixed_point": self.fixed_point,
            "residual": self.residual,
            "self_distance": self.self_distance,
            "iterations": self.iterations,
            "preconditions": [p.to_json_dict() for p in self.preconditions],
            "unique_within_starts": self.unique_within_starts,
        }


@dataclass
class PicardResult:
    """Outcome of a Picard run: the trace always, a certificate only on convergence."""

    trace: IterationTrace
    converged: bool
    final_step_dist: float
    certificate: ConvergenceCertificate | None = None


def _p(space: Space, a, b) -> float:
    if isinstance(space, FiniteSpace):
        return float(space.P[int(a), int(b)])
    return space.p_expr(float(a), float(b), **space.params)


def _theta(space: Space, a, b) -> float:
    if isinstance(space, FiniteSpace):
        return space.theta(int(a), int(b))
    return space.theta_expr(float(a), float(b), **space.params)


def _step_bound(spec: ContractionSpec | None, n: int, p01: float, self_dists) -> float:
    if spec is None:
        return float("nan")
    k = spec.k
    if spec.family == BANACH:
        return k**n * p01
    if spec.family == KANNAN:
        return (k / (1.0 - k)) ** n * p01
    acc = 0.0
    for t in range(1, n + 1):
        acc += k ** (n - t) * self_dists[t]
    return k**n * p01 + k * acc


def build_trace(space: Space, map: SelfMap, x0, rows: int, spec: ContractionSpec | None = None) -> IterationTrace:
    """A fixed-length trace of ``rows`` complete steps from x0 (no stopping rule)."""
    if rows < 1:
        raise ValueError(f"need at least one row, got {rows}")
    pts = orbit(map, x0, rows).terms
    xs, steps, selfs, bounds, nselfs = [], [], [], [], []
    for n in range(rows):
        xs.append(pts[n])
        steps.append(_p(space, pts[n], pts[n + 1]))
        selfs.append(_p(space, pts[n], pts[n]))
        bounds.append(_step_bound(spec, n, steps[0], selfs))
        nselfs.append(n * selfs[n])
    return IterationTrace(
        tuple(xs), tuple(steps), tuple(selfs), tuple(bounds), tuple(nselfs),
        next_point=pts[rows], family=spec.family if spec else None, k=spec.k if spec else None,
    )


def picard_solve(
    space: Space,
    map: SelfMap,
    x0,
    tol: float = 1e-9,
    max_iter: int = 10000,
    spec: ContractionSpec | None = None,
) -> PicardResult:
    """Iterate x_{n+1} = T x_n until p(x_n, x_{n+1}) <= tol or max_iter rows.

    On success the final row's point is the certified candidate u, so the
    certificate's residual p(Tu, u) is exactly that row's step distance.
    On a space satisfying the small-self-distance axiom the step condition
    already forces p(u, u) <= tol; certification nevertheless requires
    both explicitly, so a certificate is never issued with an
    out-of-tolerance self-distance even on an invalid space.  A start that
    is already fixed certifies at iteration 0.  On exhaustion the trace
    and final step distance are still returned.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    if map.kind == "analytic":
        x0 = float(x0)
    else:
        x0 = int(x0)
    xs, steps, selfs, bounds, nselfs = [], [], [], [], []
    x = x0
    converged_at = None
    for n in range(max_iter):
        nxt = map.apply(x)
        xs.append(x)
        steps.append(_p(space, x, nxt))
        selfs.append(_p(space, x, x))
        bounds.append(_step_bound(spec, n, steps[0], selfs))
        nselfs.append(n * selfs[n])
        if steps[n] <= tol and selfs[n] <= tol:
            converged_at = n
            x = nxt
            break
        x = nxt
    trace = IterationTrace(
        tuple(xs), tuple(steps), tuple(selfs), tuple(bounds), tuple(nselfs),
        next_point=x, family=spec.family if spec else None, k=spec.k if spec else None,
    )
    if converged_at is None:
        return PicardResult(trace, False, steps[-1])
    u = xs[converged_at]
    cert = ConvergenceCertificate(
        fixed_point=u,
        residual=steps[converged_at],
        self_distance=selfs[converged_at],
        iterations=converged_at,
    )
    return PicardResult(trace, True, steps[converged_at], cert)


@dataclass
class ContractionReport:
    """Worst observed contraction ratio over a pair sample."""

    family: str
    k: float
    passed: bool
    worst_ratio: float
    pairs_checked: int
    mode: str
    witness: tuple | None = None
    hard_violations: int = 0

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "k": self.k,
            "passed": self.passed,
            "worst_ratio": self.worst_ratio,
            "pairs_checked": self.pairs_checked,
            "mode": self.mode,
            "witness": list(self.witness) if self.witness is not None else None,
            "hard_violations": self.hard_violations,
        }


def all_pairs(space: FiniteSpace):
    """All ordered index pairs of a finite space."""
    idx = np.arange(space.n)
    X, Y = np.meshgrid(idx, idx, indexing="ij")
    return list(zip(X.ravel().tolist(), Y.ravel().tolist()))


def grid_pairs(space: AnalyticSpace, n: int):
    """All ordered pairs of an n-point uniform grid over the domain."""
    pts = space.grid(n)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    return list(zip(X.ravel().tolist(), Y.ravel().tolist()))


def verify_contraction(space: Space, map: SelfMap, spec: ContractionSpec, sample) -> ContractionReport:
    """Evaluate the family inequality at every sample pair.

    ``worst_ratio`` is the largest lhs / bracket over the sample, i.e. the
    smallest constant the sample would admit.  Pairs with a zero bracket
    pass only when the left side is zero too; otherwise they are hard
    violations that no constant can fix.
    """
    pairs = list(sample)
    if not pairs:
        raise ValueError("pair sample is empty")
    xs = np.asarray([p[0] for p in pairs])
    ys = np.asarray([p[1] for p in pairs])
    Tx = map.apply_array(xs)
    Ty = map.apply_array(ys)
    lhs = p_values(space, Tx, Ty)
    if spec.family == BANACH:
        bracket = p_values(space, xs, ys)
    elif spec.family == KANNAN:
        bracket = p_values(space, xs, Tx) + p_values(space, ys, Ty)
    else:
        bracket = p_values(space, xs, Ty) + p_values(space, ys, Ty)

    zero = bracket == 0
    hard = zero & (lhs > 0)
    ok = np.where(zero, ~hard, lhs <= spec.k * bracket)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(zero, -np.inf, lhs / np.where(zero, 1.0, bracket))
    worst = float(ratios.max()) if np.any(~zero) else 0.0
    if np.any(hard):
        worst = float("inf")

    witness = None
    if not bool(np.all(ok)):
        bad = int(np.argwhere(hard)[0][0]) if np.any(hard) else int(np.nanargmax(ratios))
        witness = (pairs[bad][0], pairs[bad][1])
    return ContractionReport(
        family=spec.family,
        k=spec.k,
        passed=bool(np.all(ok)),
        worst_ratio=worst,
        pairs_checked=len(pairs),
        mode="exhaustive" if isinstance(space, FiniteSpace) else "grid",
        witness=witness,
        hard_violations=int(hard.sum()),
    )


@dataclass
class ThetaConditionReport:
    """Observed control supremum against the strict 1/k limit."""

    family: str
    k: float
    passed: bool
    observed_sup: float
    limit: float
    margin: float
    horizon: int
    mode: str

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "k": self.k,
            "passed": self.passed,
            "observed_sup": self.observed_sup,
            "limit": self.limit,
            "margin": self.margin,
            "horizon": self.horizon,
            "mode": self.mode,
        }


def verify_theta_condition(
    space: Space,
    map: SelfMap,
    spec: ContractionSpec,
    x0,
    horizon: int = 50,
    sample=None,
) -> ThetaConditionReport:
    """Check the control-value condition the k constant must beat.

    Banach: the tail behavior of theta(x_n, x_m) along the orbit is
    approximated by the max over all pairs from the tail half of the first
    ``horizon`` iterates (a documented finite surrogate for the double
    limit).  Kannan families: sup of theta(Tx, x) over the sample points
    (all points of a finite space; a uniform grid for analytic spaces).
    The comparison against 1/k is strict.
    """
    if horizon < 2:
        raise ValueError(f"horizon must be at least 2, got {horizon}")
    if spec.family == BANACH:
        pts = np.asarray(orbit(map, x0, horizon).terms)
        tail = pts[horizon // 2:]
        X, Y = np.meshgrid(tail, tail, indexing="ij")
        sup = float(theta_values(space, X.ravel(), Y.ravel()).max())
        mode = "orbit_tail"
    else:
        if sample is None:
            if isinstance(space, FiniteSpace):
                sample = np.arange(space.n)
            else:
                sample = space.grid(41)
        pts = np.asarray(sample)
        sup = float(theta_values(space, map.apply_array(pts), pts).max())
        mode = "exhaustive" if isinstance(space, FiniteSpace) else "grid"
    limit = spec.theta_limit
    return ThetaConditionReport(
        family=spec.family,
        k=spec.k,
        passed=sup < limit,
        observed_sup=sup,
        limit=limit,
        margin=limit - sup,
        horizon=horizon,
        mode=mode,
    )


@dataclass(frozen=True)
class BanachTailBound:
    """Product-series bound on p(x_n, x_m) along a realized orbit.

    ``value`` is p(x0, x1) * sum_{i=n}^{m-1} (prod_{j=n}^{i} theta(x_j, x_m)) k^i.
    ``partial_sums`` exposes S_t = sum_{j=1}^{t} k^j prod_{i=1}^{j} theta(x_i, x_m)
    for t = 0..m-1, the running series whose convergence the ratio
    argument rests on.
    """

    value: float
    terms: tuple[float, ...]
    partial_sums: tuple[float, ...]


def banach_tail_bound(trace: IterationTrace, space: Space, k: float, n: int, m: int) -> BanachTailBound:
    """Evaluate the geometric-with-control tail bound between trace rows n < m."""
    if not 0.0 <= k < 1.0:
        raise ValueError(f"k must be in [0, 1), got {k}")
    pts = trace.all_points()
    if not 0 <= n < m <= len(pts) - 1:
        raise ValueError(f"need 0 <= n < m <= {len(pts) - 1}, got n={n}, m={m}")
    p01 = trace.step_dist[0]
    xm = pts[m]
    terms = []
    prod = 1.0
    for i in range(n, m):
        prod *= _theta(space, pts[i], xm)
        terms.append(prod * k**i)
    value = p01 * sum(terms)
    partial_sums = [0.0]
    prod = 1.0
    acc = 0.0
    for j in range(1, m):
        prod *= _theta(space, pts[j], xm)
        acc += k**j * prod
        partial_sums.append(acc)
    return BanachTailBound(value=float(value), terms=tuple(terms), partial_sums=tuple(partial_sums))


def kannan_step_bound(k: float, n: int, p01: float) -> float:
    """(k/(1-k))^n * p01, the step-distance decay bound of the Kannan family."""
    if not 0.0 <= k < 0.5:
        raise ValueError(f"k must be in [0, 1/2), got {k}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if p01 < 0:
        raise ValueError(f"p01 must be nonnegative, got {p01}")
    return (k / (1.0 - k)) ** n * p01


@dataclass(frozen=True)
class ModKannanBounds:
    """Window and step bounds of the modified Kannan family, from trace data.

    window_bound dominates p(x_{n+m}, x_n); step_bound dominates
    p(x_{n+1}, x_n).  Both are evaluated from the recorded step and self
    distances.
    """

    window_bound: float
    step_bound: float


def modkannan_bounds(trace: IterationTrace, k: float, n: int, m: int) -> ModKannanBounds:
    """Evaluate both modified-Kannan bounds at trace row n with window length m."""
    if not 0.0 <= k < 0.5:
        raise ValueError(f"k must be in [0, 1/2), got {k}")
    if n < 1:
        raise ValueError(f"window bound needs the step into row n, so n >= 1 (got {n})")
    if n >= len(trace):
        raise ValueError(f"row n={n} outside trace of {len(trace)} rows")
    if m < 0:
        raise ValueError(f"window length m must be nonnegative, got {m}")
    window = k**m * trace.self_dist[n] + (1.0 - k ** (m + 1)) / (1.0 - k) * trace.step_dist[n - 1]
    acc = 0.0
    for t in range(1, n + 1):
        acc += k ** (n - t) * trace.self_dist[t]
    step = k**n * trace.step_dist[0] + k * acc
    return ModKannanBounds(window_bound=float(window), step_bound=float(step))


@dataclass
class UniquenessReport:
    """Multi-start agreement of Picard limits, compared in the induced distance."""

    passed: bool
    fixed_points: tuple
    max_pairwise_distance: float
    failures: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "fixed_points": list(self.fixed_points),
            "max_pairwise_distance": self.max_pairwise_distance,
            "failures": [list(f) for f in self.failures],
        }


def uniqueness_probe(
    space: Space, map: SelfMap, starts, tol: float = 1e-9, max_iter: int = 10000
) -> UniquenessReport:
    """Run Picard from every start and compare the limits pairwise.

    Comparison uses the induced zero-diagonal distance (0 when the points
    coincide, p otherwise): a small p(u, w) alone does not mean u = w when
    self-distances are positive.  Any non-converging start fails the probe.
    """
    starts = list(starts)
    if not starts:
        raise ValueError("need at least one start")
    fixed, failures = [], []
    for s in starts:
        res = picard_solve(space, map, s, tol=tol, max_iter=max_iter)
        if res.converged:
            fixed.append(res.certificate.fixed_point)
        else:
            failures.append((s, f"no convergence within {max_iter} iterations (final step {res.final_step_dist:g})"))
    worst = 0.0
    for i in range(len(fixed)):
        for j in range(i + 1, len(fixed)):
            if fixed[i] != fixed[j]:
                worst = max(worst, _p(space, fixed[i], fixed[j]))
    return UniquenessReport(
        passed=not failures and worst <= tol,
        fixed_points=tuple(fixed),
        max_pairwise_distance=worst,
        failures=tuple(failures),
    )

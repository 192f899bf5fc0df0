"""Space representations: matrix-backed finite spaces and closed-form analytic spaces.

A finite space stores an n x n distance matrix ``P`` and an optional n x n
control matrix ``Theta``; points are identified by index and labels are
display metadata only.  An analytic space stores a distance form and a
control form over a closed interval and is discretized on demand with
:func:`sample_grid`.  Both kinds are immutable after construction, so
values can be shared freely across concurrent readers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .grammar import Expr

PROFILE_TAGS = ("metric", "b_metric", "ebm", "partial_metric", "pbm", "pebm")
_PARTIAL_TAGS = frozenset({"partial_metric", "pbm", "pebm"})
_THETA_TAGS = frozenset({"ebm", "pebm"})
_S_TAGS = frozenset({"b_metric", "pbm"})


@dataclass(frozen=True)
class AxiomProfile:
    """Which axiom family a space claims to satisfy.

    ``b_metric`` and ``pbm`` carry the constant relaxation coefficient
    ``s >= 1``; ``ebm`` and ``pebm`` take point-dependent relaxation from a
    control matrix or control form instead.  A declared profile is a claim,
    not a guarantee; only the axiom checker certifies it.
    """

    tag: str
    s: float | None = None

    def __post_init__(self):
        if self.tag not in PROFILE_TAGS:
            raise ValueError(f"unknown profile tag {self.tag!r}; expected one of {PROFILE_TAGS}")
        if self.tag in _S_TAGS:
            if self.s is None:
                raise ValueError(f"profile {self.tag!r} requires its coefficient s")
            object.__setattr__(self, "s", float(self.s))
            if not np.isfinite(self.s) or self.s < 1.0:
                raise ValueError(f"coefficient s must be a finite real >= 1, got {self.s}")
        elif self.s is not None:
            raise ValueError(f"profile {self.tag!r} does not take a coefficient")

    @classmethod
    def metric(cls):
        return cls("metric")

    @classmethod
    def b_metric(cls, s: float):
        return cls("b_metric", s)

    @classmethod
    def ebm(cls):
        return cls("ebm")

    @classmethod
    def partial_metric(cls):
        return cls("partial_metric")

    @classmethod
    def pbm(cls, s: float):
        return cls("pbm", s)

    @classmethod
    def pebm(cls):
        return cls("pebm")

    @property
    def is_partial(self) -> bool:
        """True when self-distance may be nonzero and A4 carries the -p(y,y) term."""
        return self.tag in _PARTIAL_TAGS

    @property
    def uses_theta_matrix(self) -> bool:
        """True when the triangle relaxation is point-dependent."""
        return self.tag in _THETA_TAGS

    @property
    def constant_theta(self) -> float | None:
        """The constant relaxation value, or None for point-dependent profiles."""
        if self.uses_theta_matrix:
            return None
        return self.s if self.s is not None else 1.0

    def label(self) -> str:
        return self.tag if self.s is None else f"{self.tag}(s={self.s:g})"


class FiniteSpace:
    """n labeled points with a distance matrix and an optional control matrix.

    Construction enforces only the codomain constraints (distances finite
    and >= 0, control values finite and >= 1, shapes consistent); whether
    the axioms of ``declared_kind`` actually hold is the axiom checker's
    business.
    """

    __slots__ = ("labels", "P", "Theta", "declared_kind")

    def __init__(self, labels, P, Theta=None, declared_kind: AxiomProfile | None = None):
        labels = tuple(labels)
        P = np.array(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"P must be a square matrix, got shape {P.shape}")
        if P.shape[0] != len(labels):
            raise ValueError(f"{len(labels)} labels for a {P.shape[0]}x{P.shape[1]} distance matrix")
        if not np.all(np.isfinite(P)):
            raise ValueError("distance matrix entries must be finite")
        if np.any(P < 0):
            i, j = map(int, np.argwhere(P < 0)[0])
            raise ValueError(f"distance matrix entry ({i},{j}) is negative: {P[i, j]}")
        if Theta is not None:
            Theta = np.array(Theta, dtype=float)
            if Theta.shape != P.shape:
                raise ValueError(f"control matrix shape {Theta.shape} does not match {P.shape}")
            if not np.all(np.isfinite(Theta)):
                raise ValueError("control matrix entries must be finite")
            if np.any(Theta < 1.0):
                i, j = map(int, np.argwhere(Theta < 1.0)[0])
                raise ValueError(f"control matrix entry ({i},{j}) is below 1: {Theta[i, j]}")
            Theta.setflags(write=False)
        P.setflags(write=False)
        self.labels = labels
        self.P = P
        self.Theta = Theta
        self.declared_kind = declared_kind if declared_kind is not None else AxiomProfile.pebm()

    @property
    def n(self) -> int:
        return len(self.labels)

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise DomainError(f"point index {i} outside 0..{self.n - 1}")
        return i

    def index_of(self, label) -> int:
        for i, lab in enumerate(self.labels):
            if lab == label:
                return i
        raise DomainError(f"point {label!r} is not in the space (labels: {list(self.labels)})")

    def p(self, i: int, j: int) -> float:
        """Distance by point index."""
        return float(self.P[self._check_index(i), self._check_index(j)])

    def theta(self, i: int, j: int) -> float:
        """Control value by point index.

        Falls back to the declared profile's constant when no control matrix
        is stored; point-dependent profiles without a matrix are an error.
        """
        i, j = self._check_index(i), self._check_index(j)
        if self.Theta is not None:
            return float(self.Theta[i, j])
        const = self.declared_kind.constant_theta
        if const is None:
            raise ConfigurationError(
                f"space declared {self.declared_kind.label()} carries no control matrix"
            )
        return const

    def eval_p(self, x, y) -> float:
        """Distance between two points given by label."""
        return float(self.P[self.index_of(x), self.index_of(y)])

    def eval_theta(self, x, y) -> float:
        return self.theta(self.index_of(x), self.index_of(y))

    def with_profile(self, profile: AxiomProfile) -> "FiniteSpace":
        return FiniteSpace(self.labels, self.P, self.Theta, profile)

    def to_json_dict(self) -> dict:
        d = {
            "kind": "finite",
            "profile": self.declared_kind.tag,
            "labels": list(self.labels),
            "P": self.P.tolist(),
        }
        if self.declared_kind.s is not None:
            d["s"] = self.declared_kind.s
        if self.Theta is not None:
            d["Theta"] = self.Theta.tolist()
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "FiniteSpace":
        if d.get("kind") != "finite":
            raise ValueError(f"not a finite space document (kind={d.get('kind')!r})")
        profile = AxiomProfile(d.get("profile", "pebm"), d.get("s"))
        return cls(d["labels"], d["P"], d.get("Theta"), profile)

    def __repr__(self):
        return f"FiniteSpace(n={self.n}, declared={self.declared_kind.label()})"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSpace)
            and self.labels == other.labels
            and np.array_equal(self.P, other.P)
            and (
                (self.Theta is None and other.Theta is None)
                or (self.Theta is not None and other.Theta is not None and np.array_equal(self.Theta, other.Theta))
            )
            and self.declared_kind == other.declared_kind
        )


class AnalyticSpace:
    """Closed-form distance and control functions over a closed interval.

    Both forms are validated at construction on a coarse sample grid:
    the distance form must be finite and nonnegative, the control form
    finite and >= 1, over all sampled pairs.  Violations are construction
    errors; axiom failures (symmetry, triangle, ...) are checker findings.
    """

    __slots__ = ("domain", "p_expr", "theta_expr", "params")

    _VALIDATION_POINTS = 17

    def __init__(self, domain, p_form, theta_form, params: dict | None = None):
        a, b = (float(domain[0]), float(domain[1]))
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise ValueError(f"domain must be a finite interval [a, b] with a < b, got [{a}, {b}]")
        self.domain = (a, b)
        self.p_expr = p_form if isinstance(p_form, Expr) else Expr(p_form)
        self.theta_expr = theta_form if isinstance(theta_form, Expr) else Expr(theta_form)
        self.params = {k: float(v) for k, v in (params or {}).items()}
        for expr, what in ((self.p_expr, "distance"), (self.theta_expr, "control")):
            unbound = expr.parameters() - self.params.keys()
            if unbound:
                raise ValueError(f"{what} form {expr.source!r} has unbound parameters {sorted(unbound)}")
        pts = self.grid(self._VALIDATION_POINTS)
        X, Y = np.meshgrid(pts, pts, indexing="ij")
        pv = self.p_expr(X, Y, **self.params)
        if not np.all(np.isfinite(pv)) or np.any(pv < 0):
            i, j = map(int, np.argwhere(~np.isfinite(pv) | (pv < 0))[0])
            raise ValueError(
                f"distance form {self.p_expr.source!r} is invalid at ({pts[i]!r}, {pts[j]!r}): {pv[i, j]}"
            )
        tv = self.theta_expr(X, Y, **self.params)
        if not np.all(np.isfinite(tv)) or np.any(tv < 1.0):
            i, j = map(int, np.argwhere(~np.isfinite(tv) | (tv < 1.0))[0])
            raise ValueError(
                f"control form {self.theta_expr.source!r} is below 1 at ({pts[i]!r}, {pts[j]!r}): {tv[i, j]}"
            )

    def _check_point(self, v, name: str) -> float:
        v = float(v)
        a, b = self.domain
        if not a <= v <= b:
            raise DomainError(f"{name}={v!r} outside the domain [{a}, {b}]")
        return v

    def eval_p(self, x, y) -> float:
        x = self._check_point(x, "x")
        y = self._check_point(y, "y")
        return self.p_expr(x, y, **self.params)

    def eval_theta(self, x, y) -> float:
        x = self._check_point(x, "x")
        y = self._check_point(y, "y")
        return self.theta_expr(x, y, **self.params)

    def grid(self, n: int) -> np.ndarray:
        """n uniformly spaced points covering the domain, endpoints included."""
        if n < 2:
            raise ValueError(f"grid size must be at least 2, got {n}")
        return np.linspace(self.domain[0], self.domain[1], int(n))

    def to_json_dict(self) -> dict:
        return {
            "kind": "analytic",
            "domain": [self.domain[0], self.domain[1]],
            "p_form": self.p_expr.source,
            "theta_form": self.theta_expr.source,
            "params": dict(self.params),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "AnalyticSpace":
        if d.get("kind") != "analytic":
            raise ValueError(f"not an analytic space document (kind={d.get('kind')!r})")
        return cls(d["domain"], d["p_form"], d["theta_form"], d.get("params"))

    def __repr__(self):
        a, b = self.domain
        return f"AnalyticSpace([{a:g}, {b:g}], p={self.p_expr.source!r}, theta={self.theta_expr.source!r})"


Space = FiniteSpace | AnalyticSpace


def eval_p(space: Space, x, y) -> float:
    """Distance between two points of a space.

    Finite spaces resolve points by label; analytic spaces take reals in
    the domain.  Out-of-domain points raise :class:`DomainError` naming the
    offending coordinate.
    """
    return space.eval_p(x, y)


def eval_theta(space: Space, x, y) -> float:
    """Control value between two points of a space (always >= 1)."""
    return space.eval_theta(x, y)


def induced_ebm(space: FiniteSpace) -> FiniteSpace:
    """The zero-self-distance companion of a finite space.

    Keeps labels and control values, zeroes the diagonal, and copies all
    off-diagonal distances; the result is declared ``ebm``.
    """
    D = np.array(space.P, dtype=float)
    np.fill_diagonal(D, 0.0)
    return FiniteSpace(space.labels, D, space.Theta, AxiomProfile.ebm())


def sample_grid(space: AnalyticSpace, n: int) -> FiniteSpace:
    """Discretize an analytic space on n uniform points (endpoints included).

    Deterministic: the same space and n always produce bit-identical
    matrices.  The result is declared ``pebm``; certify it with the checker.
    """
    pts = space.grid(n)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    P = space.p_expr(X, Y, **space.params)
    Theta = space.theta_expr(X, Y, **space.params)
    return FiniteSpace(tuple(float(v) for v in pts), P, Theta, AxiomProfile.pebm())


def is_finite_space(space: Space) -> bool:
    return isinstance(space, FiniteSpace)


def p_values(space: Space, xs, ys) -> np.ndarray:
    """Vectorized distance evaluation; xs/ys are index arrays or real arrays.

    Internal fast path: no per-point domain checks are performed.
    """
    if isinstance(space, FiniteSpace):
        return space.P[np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)]
    return np.asarray(space.p_expr(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), **space.params))


def theta_values(space: Space, xs, ys) -> np.ndarray:
    """Vectorized control evaluation; see :func:`p_values`."""
    if isinstance(space, FiniteSpace):
        if space.Theta is not None:
            return space.Theta[np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)]
        const = space.declared_kind.constant_theta
        if const is None:
            raise ConfigurationError(f"space declared {space.declared_kind.label()} carries no control matrix")
        return np.full(np.asarray(xs).shape, const, dtype=float)
    return np.asarray(
        space.theta_expr(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), **space.params)
    )


def pairwise_p(space: Space, pts) -> np.ndarray:
    """Matrix of distances over all ordered pairs of the given points."""
    pts = np.asarray(pts)
    if isinstance(space, FiniteSpace):
        idx = pts.astype(int)
        return space.P[np.ix_(idx, idx)]
    X, Y = np.meshgrid(pts.astype(float), pts.astype(float), indexing="ij")
    return np.asarray(space.p_expr(X, Y, **space.params))


def space_from_json_dict(d: dict) -> Space:
    kind = d.get("kind")
    if kind == "finite":
        return FiniteSpace.from_json_dict(d)
    if kind == "analytic":
        return AnalyticSpace.from_json_dict(d)
    raise ValueError(f"unknown space kind {kind!r}; expected 'finite' or 'analytic'")


def loads_space(text: str) -> Space:
    return space_from_json_dict(json.loads(text))


def dumps_space(space: Space) -> str:
    return json.dumps(space.to_json_dict())

"""Numerical convergence and Cauchy diagnostics for sequences, plus orbits of self-maps.

All verdicts here are windowed numerical judgments over the available
terms, never proofs about the infinite tail; every verdict carries the
tail value it was computed from so callers can apply their own tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grammar import Expr
from .spaces import AnalyticSpace, FiniteSpace, Space, pairwise_p


@dataclass(frozen=True)
class PointSequence:
    """An ordered list of points: indices in a finite space or reals in a domain."""

    terms: tuple
    generator: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def to_json_list(self) -> list:
        return list(self.terms)


class SelfMap:
    """A self-map of a space: an index table (finite) or a closed form in x (analytic)."""

    __slots__ = ("kind", "table", "expr", "params", "domain", "description")

    def __init__(self, *, table=None, expr=None, params=None, domain=None, description=None):
        self.description = description
        self.params = {k: float(v) for k, v in (params or {}).items()}
        if (table is None) == (expr is None):
            raise ValueError("provide exactly one of table= or expr=")
        if table is not None:
            self.kind = "finite"
            self.table = tuple(int(t) for t in table)
            self.expr = None
            self.domain = None
            n = len(self.table)
            for i, t in enumerate(self.table):
                if not 0 <= t < n:
                    raise ValueError(f"table maps index {i} to {t}, outside 0..{n - 1}")
        else:
            if domain is None:
                raise ValueError("analytic maps need the domain they act on")
            self.kind = "analytic"
            self.table = None
            self.expr = expr if isinstance(expr, Expr) else Expr(expr, variables=("x",))
            unbound = self.expr.parameters() - self.params.keys()
            if unbound:
                raise ValueError(f"map {self.expr.source!r} has unbound parameters {sorted(unbound)}")
            self.domain = (float(domain[0]), float(domain[1]))
            a, b = self.domain
            samples = np.linspace(a, b, 33)
            images = self.expr(samples, **self.params)
            if np.any(images < a) or np.any(images > b) or not np.all(np.isfinite(images)):
                i = int(np.argwhere((images < a) | (images > b) | ~np.isfinite(images))[0][0])
                raise ValueError(
                    f"map {self.expr.source!r} leaves [{a}, {b}] at sample x={samples[i]!r} -> {images[i]!r}"
                )

    @classmethod
    def from_table(cls, table, description=None) -> "SelfMap":
        return cls(table=table, description=description)

    @classmethod
    def from_expression(cls, source, domain, params=None, description=None) -> "SelfMap":
        return cls(expr=source, params=params, domain=domain, description=description)

    def apply(self, x):
        if self.kind == "finite":
            x = int(x)
            if not 0 <= x < len(self.table):
                raise DomainError(f"index {x} outside 0..{len(self.table) - 1}")
            return self.table[x]
        return self.expr(float(x), **self.params)

    def apply_array(self, xs: np.ndarray) -> np.ndarray:
        if self.kind == "finite":
            return np.asarray(self.table, dtype=int)[np.asarray(xs, dtype=int)]
        return self.expr(np.asarray(xs, dtype=float), **self.params)

    def __repr__(self):
        body = f"table={self.table}" if self.kind == "finite" else f"expr={self.expr.source!r}"
        return f"SelfMap({body})"


def orbit(map: SelfMap, x0, n: int) -> PointSequence:
    """The iterate sequence [x0, Tx0, ..., T^n x0] of length n + 1.

    Analytic maps are checked at every step; leaving the domain raises a
    :class:`DomainError` naming the step where it happened.
    """
    if n < 0:
        raise ValueError(f"orbit length must be nonnegative, got {n}")
    if map.kind == "analytic":
        a, b = map.domain
        x0 = float(x0)
        if not a <= x0 <= b:
            raise DomainError(f"start x0={x0!r} outside the domain [{a}, {b}]")
    else:
        x0 = int(x0)
        if not 0 <= x0 < len(map.table):
            raise DomainError(f"start index {x0} outside 0..{len(map.table) - 1}")
    terms = [x0]
    x = x0
    for step in range(1, n + 1):
        x = map.apply(x)
        if map.kind == "analytic":
            a, b = map.domain
            if not a <= x <= b:
                raise DomainError(f"orbit left the domain [{a}, {b}] at step {step}: x={x!r}")
        terms.append(x)
    label = map.description or (map.expr.source if map.kind == "analytic" else "table")
    return PointSequence(tuple(terms), generator=f"orbit of {label} from {x0!r}")


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Windowed judgment of p(x_n, x) -> p(x, x)."""

    converged: bool
    final_discrepancy: float
    limit_self_distance: float
    tail_monotone: bool

    def to_json_dict(self) -> dict:
        return {
            "converged": self.converged,
            "final_discrepancy": self.final_discrepancy,
            "limit_self_distance": self.limit_self_distance,
            "tail_monotone": self.tail_monotone,
        }


def _p_to_point(space: Space, terms, x) -> np.ndarray:
    arr = np.asarray(terms)
    if isinstance(space, FiniteSpace):
        return space.P[arr.astype(int), int(x)]
    xs = np.full(arr.shape, float(x))
    return np.asarray(space.p_expr(arr.astype(float), xs, **space.params))


def converges_to(space: Space, seq: PointSequence, x, tol: float) -> ConvergenceVerdict:
    """Judge convergence of a sequence to a candidate limit.

    Passes when the final discrepancy |p(x_N, x) - p(x, x)| is within tol
    and the discrepancy is non-increasing over the final quarter of the
    terms (guards against calling an oscillation converged).  Under
    partial distances limits need not be unique, so a pass is a statement
    about this candidate only.
    """
    if len(seq) == 0:
        raise ValueError("sequence is empty")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    self_dist = space.P[int(x), int(x)] if isinstance(space, FiniteSpace) else space.eval_p(x, x)
    disc = np.abs(_p_to_point(space, seq.terms, x) - self_dist)
    tail = disc[-max(2, len(disc) // 4):] if len(disc) > 1 else disc
    monotone = bool(np.all(np.diff(tail) <= 0))
    final = float(disc[-1])
    return ConvergenceVerdict(final <= tol and monotone, final, float(self_dist), monotone)


def _tail_matrix(space: Space, seq: PointSequence, window: int) -> np.ndarray:
    if window < 2:
        raise ValueError(f"window must be at least 2, got {window}")
    if window > len(seq):
        raise ValueError(f"window {window} exceeds sequence length {len(seq)}")
    return pairwise_p(space, np.asarray(seq.terms)[-window:])


def zero_cauchy_tail(space: Space, seq: PointSequence, window: int) -> float:
    """Max distance over all ordered pairs (self-pairs included) of the last window terms.

    A sequence is judged 0-Cauchy at tolerance tol when this value is at
    most tol; self-pairs matter because a positive self-distance plateau
    is exactly what separates Cauchy from 0-Cauchy.
    """
    return float(_tail_matrix(space, seq, window).max())


def cauchy_tail(space: Space, seq: PointSequence, window: int) -> tuple[float, float]:
    """(mean, max - min spread) of pair distances over the last window terms.

    The sequence is judged Cauchy at tolerance tol when the spread is at
    most tol: the pairwise values are settling to one finite limit, which
    need not be zero.
    """
    m = _tail_matrix(space, seq, window)
    return float(m.mean()), float(m.max() - m.min())

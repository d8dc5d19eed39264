"""Exact-rational DoF region machinery.

All arithmetic here is over integers and :class:`fractions.Fraction`. Vertex
enumeration solves every 4-subset of the constraint system by adjugate and
determinant, both integer; numpy is used only to vectorise integer products.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .numerics import AntennaConfig

VARIABLES = ("d11", "d12", "d21", "d22")


@dataclass(frozen=True, order=True)
class DofTuple:
    """Per-message degrees of freedom ``(d11, d12, d21, d22)``."""

    d11: Fraction
    d12: Fraction
    d21: Fraction
    d22: Fraction

    def __post_init__(self):
        for name in VARIABLES:
            value = Fraction(getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def of(cls, values: Iterable) -> "DofTuple":
        values = tuple(values)
        if len(values) != 4:
            raise ValueError("a DoF tuple has exactly four entries")
        return cls(*values)

    def __iter__(self):
        return iter((self.d11, self.d12, self.d21, self.d22))

    def __getitem__(self, k: int) -> Fraction:
        return tuple(self)[k]

    @property
    def total(self) -> Fraction:
        return sum(self, Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self)

    def as_ints(self) -> tuple[int, int, int, int]:
        if not self.is_integral():
            raise ValueError(f"{self} is not integral")
        return tuple(int(v) for v in self)

    def __str__(self):
        return "(" + ", ".join(str(v) for v in self) + ")"


@dataclass(frozen=True)
class DofPolytope:
    """System ``c . d <= b`` over the four DoF variables, with ``d >= 0`` implicit."""

    inequalities: tuple[tuple[tuple[int, int, int, int], int], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        rows = []
        for coeffs, bound in self.inequalities:
            coeffs = tuple(int(c) for c in coeffs)
            if len(coeffs) != 4:
                raise ValueError("each inequality needs four coefficients")
            rows.append((coeffs, int(bound)))
        object.__setattr__(self, "inequalities", tuple(rows))
        if self.labels and len(self.labels) != len(rows):
            raise ValueError("labels must match inequalities")

    @property
    def coefficient_rows(self) -> tuple[tuple[int, int, int, int], ...]:
        return tuple(c for c, _ in self.inequalities)

    @property
    def bounds(self) -> tuple[int, ...]:
        return tuple(b for _, b in self.inequalities)

    def constraint_count(self) -> int:
        """Inequalities plus the four nonnegativity facets."""
        return len(self.inequalities) + 4

    def scaled(self, kappa: int) -> "DofPolytope":
        return DofPolytope(
            tuple((c, kappa * b) for c, b in self.inequalities), self.labels
        )


@dataclass(frozen=True)
class RegionVertex:
    point: DofTuple
    # indices into inequalities; len(inequalities) + k is the facet d_k >= 0
    active: frozenset[int]


def _pos(x: int) -> int:
    return max(x, 0)


def outerbound_polytope(config: AntennaConfig) -> DofPolytope:
    m1, m2, n1, n2 = config.as_tuple()
    rows = (
        ((1, 1, 1, 0), max(n1, m1)),
        ((1, 1, 0, 1), max(n1, m2)),
        ((1, 0, 1, 1), max(n2, m1)),
        ((0, 1, 1, 1), max(n2, m2)),
        ((1, 1, 0, 0), n1),
        ((0, 0, 1, 1), n2),
        ((1, 0, 1, 0), m1),
        ((0, 1, 0, 1), m2),
    )
    labels = (
        "d11+d12+d21 <= max(N1,M1)",
        "d11+d12+d22 <= max(N1,M2)",
        "d11+d21+d22 <= max(N2,M1)",
        "d12+d21+d22 <= max(N2,M2)",
        "d11+d12 <= N1",
        "d21+d22 <= N2",
        "d11+d21 <= M1",
        "d12+d22 <= M2",
    )
    return DofPolytope(rows, labels)


def contains(poly: DofPolytope, d: DofTuple | Sequence) -> bool:
    values = tuple(Fraction(v) for v in d)
    if any(v < 0 for v in values):
        return False
    return all(
        sum(c * v for c, v in zip(coeffs, values)) <= bound
        for coeffs, bound in poly.inequalities
    )


def _det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for col in range(n):
        if m[0][col] == 0:
            continue
        minor = [row[:col] + row[col + 1:] for row in m[1:]]
        total += (-1) ** col * m[0][col] * _det(minor)
    return total


def _adjugate(m: list[list[int]]) -> list[list[int]]:
    n = len(m)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            adj[j][i] = (-1) ** (i + j) * _det(minor)
    return adj


@lru_cache(maxsize=64)
def _basis_table(rows: tuple[tuple[int, ...], ...]):
    """Nonsingular 4-subsets of ``rows`` with integer determinant and adjugate.

    Depends only on the coefficient matrix, so it is shared by every bound
    vector (every antenna configuration) with the same structure.
    """
    subsets, dets, adjs = [], [], []
    for subset in itertools.combinations(range(len(rows)), 4):
        mat = [list(rows[k]) for k in subset]
        det = _det(mat)
        if det == 0:
            continue
        adj = _adjugate(mat)
        if det < 0:
            det, adj = -det, [[-x for x in r] for r in adj]
        subsets.append(subset)
        dets.append(det)
        adjs.append(adj)
    return (
        np.array(subsets, dtype=np.int64).reshape(-1, 4),
        np.array(dets, dtype=np.int64),
        np.array(adjs, dtype=np.int64).reshape(-1, 4, 4),
    )


def _full_system(poly: DofPolytope):
    rows = list(poly.coefficient_rows)
    bounds = list(poly.bounds)
    for k in range(4):
        unit = [0, 0, 0, 0]
        unit[k] = -1
        rows.append(tuple(unit))
        bounds.append(0)
    return tuple(rows), bounds


def enumerate_vertices(poly: DofPolytope) -> list[RegionVertex]:
    """All extreme points, exact, deduplicated, sorted lexicographically.

    Each point carries the full set of constraints tight at it.
    """
    rows, bounds = _full_system(poly)
    subsets, dets, adjs = _basis_table(rows)
    if len(subsets) == 0:
        return []
    a = np.array(rows, dtype=np.int64)
    b = np.array(bounds, dtype=np.int64)
    # x = numer / det with det > 0
    numer = np.einsum("sij,sj->si", adjs, b[subsets])
    lhs = a @ numer.T                      # constraints x subsets, scaled by det
    rhs = b[:, None] * dets[None, :]
    feasible = np.all(lhs <= rhs, axis=0)
    seen: dict[tuple[Fraction, ...], frozenset[int]] = {}
    for s in np.flatnonzero(feasible):
        det = int(dets[s])
        point = tuple(Fraction(int(v), det) for v in numer[s])
        if point in seen:
            continue
        tight = frozenset(int(k) for k in np.flatnonzero(lhs[:, s] == rhs[:, s]))
        seen[point] = tight
    return [RegionVertex(DofTuple(*p), act) for p, act in sorted(seen.items())]


class UnboundedError(ValueError):
    pass


def max_weighted_sum(
    poly: DofPolytope, weights: Sequence = (1, 1, 1, 1)
) -> tuple[Fraction, RegionVertex]:
    """Exact LP optimum by vertex enumeration; ties go to the smallest vertex."""
    weights = tuple(Fraction(w) for w in weights)
    _check_bounded(poly)
    vertices = enumerate_vertices(poly)
    if not vertices:
        raise UnboundedError("polytope has no vertex")
    best_value, best = None, None
    for v in vertices:  # sorted ascending, so strict > keeps the smallest maximiser
        value = sum(w * x for w, x in zip(weights, v.point))
        if best_value is None or value > best_value:
            best_value, best = value, v
    return best_value, best


def _check_bounded(poly: DofPolytope) -> None:
    # with nonnegative coefficients, boundedness means every variable is capped
    covered = [False] * 4
    for coeffs, _ in poly.inequalities:
        if any(c < 0 for c in coeffs):
            return
        for k, c in enumerate(coeffs):
            covered[k] = covered[k] or c > 0
    if not all(covered):
        raise UnboundedError("some DoF variable is not bounded above")


def eta_out_closed_form(config: AntennaConfig) -> Fraction:
    m1, m2, n1, n2 = config.as_tuple()
    terms = (
        Fraction(m1 + m2),
        Fraction(n1 + n2),
        Fraction(max(m1, n1) + max(m1, n2) + m2, 2),
        Fraction(max(m2, n1) + max(m2, n2) + m1, 2),
        Fraction(max(m1, n1) + max(m2, n1) + n2, 2),
        Fraction(max(m1, n2) + max(m2, n2) + n1, 2),
        Fraction(max(m1, n1) + max(m1, n2) + max(m2, n1) + max(m2, n2), 3),
    )
    return min(terms)


def eta_mbi(config: AntennaConfig) -> int:
    m1, m2, n1, n2 = config.as_tuple()
    return min(m1 + m2, n1 + n2, max(m1, n1, m2, n2))


def _integer_points(poly: DofPolytope, caps: Sequence[int]) -> np.ndarray:
    grids = np.meshgrid(*(np.arange(c + 1) for c in caps), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    a = np.array(poly.coefficient_rows, dtype=np.int64)
    b = np.array(poly.bounds, dtype=np.int64)
    ok = np.all(pts @ a.T <= b, axis=1)
    return pts[ok]


def integer_innerbound_max(config: AntennaConfig) -> tuple[int, DofTuple]:
    """Largest integer sum-DoF in the outer region, by exhaustive enumeration.

    Among maximisers the lexicographically largest tuple is returned, which
    puts the extra streams on ``d11`` as in the ``(m+k, m, m, m)`` assignment.
    """
    m1, m2, n1, n2 = config.as_tuple()
    caps = (min(n1, m1), min(n1, m2), min(n2, m1), min(n2, m2))
    pts = _integer_points(outerbound_polytope(config), caps)
    sums = pts.sum(axis=1)
    best = int(sums.max())
    winners = pts[sums == best]
    top = max(tuple(int(x) for x in row) for row in winners)
    return best, DofTuple(*top)


def check_zfx_bound(config: AntennaConfig) -> bool:
    return eta_out_closed_form(config) <= Fraction(4, 3) * eta_mbi(config)


def normalize_scale(vertex: RegionVertex | DofTuple) -> tuple[int, DofTuple]:
    """Smallest ``kappa`` making ``kappa * point`` integral."""
    point = vertex.point if isinstance(vertex, RegionVertex) else vertex
    kappa = math.lcm(*(v.denominator for v in point))
    return kappa, DofTuple(*(v * kappa for v in point))


def mmk_assignment(m: int) -> DofTuple:
    """Integer assignment ``(q+k, q, q, q)`` with ``m = 3q + k``."""
    q, k = divmod(m, 3)
    return DofTuple(q + k, q, q, q)


def cognitive_polytope(m: int) -> tuple[DofPolytope, Fraction]:
    """Converse system for one cognitive receiver with ``m`` antennas everywhere.

    Three triple-sum bounds, each equal to ``m``; returns the system and its
    exact sum-DoF maximum.
    """
    if m < 1:
        raise ValueError("antenna count must be positive")
    poly = DofPolytope(
        (
            ((0, 1, 1, 1), m),
            ((1, 1, 0, 1), m),
            ((1, 1, 1, 0), m),
        ),
        ("d12+d21+d22 <= M", "d11+d12+d22 <= M", "d11+d12+d21 <= M"),
    )
    value, _ = max_weighted_sum(poly)
    return poly, value


def grid_configs(lo: int, hi: int) -> Iterable[AntennaConfig]:
    for counts in itertools.product(range(lo, hi + 1), repeat=4):
        yield AntennaConfig(*counts)

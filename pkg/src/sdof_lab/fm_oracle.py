"""Independent oracle for Fourier-Motzkin projections.

The projection of a bounded polytope equals the convex hull of its projected
vertices.  This module enumerates the lifted polytope's vertices exactly
(rational Gaussian elimination over all constraint subsets), hulls their
(d1, d2) shadows, and compares membership against the eliminator's projected
region on a dense rational grid.  It shares no code with the eliminator.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .regions import (
    BoundedTermSystem,
    RegionPolytope,
    contains,
    make_inequality,
    projection_region,
)

Point = tuple[Fraction, Fraction]


def _solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]):
    """Unique solution of a square rational system, or None if singular."""
    n = len(matrix)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def _system_rows(system: BoundedTermSystem) -> tuple[tuple[str, ...], list]:
    order = ("d1", "d2") + tuple(system.variables)
    rows: list[tuple[list[Fraction], Fraction]] = []
    for ineq in system.all_rows():
        rows.append(([ineq.coef(v) for v in order], ineq.rhs))
    for axis in range(2):
        vec = [Fraction(0)] * len(order)
        vec[axis] = Fraction(-1)
        rows.append((vec, Fraction(0)))
    return order, rows


def lifted_vertices(system: BoundedTermSystem) -> list[tuple[Fraction, ...]]:
    """All vertices of the lifted feasible polytope, exactly."""
    order, rows = _system_rows(system)
    dim = len(order)
    verts: set[tuple[Fraction, ...]] = set()
    for subset in combinations(range(len(rows)), dim):
        matrix = [rows[i][0] for i in subset]
        rhs = [rows[i][1] for i in subset]
        sol = _solve_exact([r[:] for r in matrix], rhs)
        if sol is None:
            continue
        if all(sum(c * x for c, x in zip(vec, sol)) <= b for vec, b in rows):
            verts.add(tuple(sol))
    return sorted(verts)


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Monotone-chain hull, counterclockwise, exact."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _on_segment(a: Point, b: Point, p: Point) -> bool:
    if _cross(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def in_hull(hull: Sequence[Point], p: Point) -> bool:
    if not hull:
        return False
    if len(hull) == 1:
        return p == hull[0]
    if len(hull) == 2:
        return _on_segment(hull[0], hull[1], p)
    for a, b in zip(hull, hull[1:] + [hull[0]]):
        if _cross(a, b, p) < 0:
            return False
    return True


def shadow_hull(system: BoundedTermSystem) -> list[Point]:
    return convex_hull([(v[0], v[1]) for v in lifted_vertices(system)])


def grid_agreement(system: BoundedTermSystem,
                   step: Fraction = Fraction(1, 64)) -> tuple[bool, str]:
    """Compare eliminator and hull membership over a dense rational grid.

    The grid covers the hull's bounding box plus a margin, so it samples both
    feasible points (which must satisfy the projection) and boundary-exterior
    points (which must violate it).
    """
    hull = shadow_hull(system)
    if not hull:
        return False, "lifted polytope is empty"
    region: RegionPolytope = projection_region(system)
    margin = Fraction(1, 8)
    x_hi = max(p[0] for p in hull) + margin
    y_hi = max(p[1] for p in hull) + margin

    x = Fraction(0)
    while x <= x_hi:
        y = Fraction(0)
        while y <= y_hi:
            point = (x, y)
            want = in_hull(hull, point)
            got = contains(region, point)
            if want != got:
                return False, f"disagreement at {point}: hull {want}, fm {got}"
            y += step
        x += step
    return True, ""


def oracle_catalog() -> dict[str, BoundedTermSystem]:
    """Bounded-term systems exercised against the hull oracle."""
    from .regions import converse_alternation_system

    slack_pair = BoundedTermSystem(
        variables=("a",),
        upper={"a": Fraction(1)},
        inequalities=(
            make_inequality({"d1": 1, "a": -1}, 0),
            make_inequality({"d1": 1, "d2": 1, "a": -2}, 0),
        ),
    )
    wedge = BoundedTermSystem(
        variables=("y",),
        upper={"y": None},
        inequalities=(
            make_inequality({"d1": 1, "y": 1}, 2),
            make_inequality({"d1": 1, "y": -1}, 0),
            make_inequality({"d2": 1}, 1),
        ),
    )
    converse_lite = BoundedTermSystem(
        variables=("a", "b", "c", "e"),
        upper={"a": Fraction(1), "b": Fraction(1, 2), "c": Fraction(1, 2),
               "e": Fraction(1, 2)},
        inequalities=(
            make_inequality({"d1": 1, "a": -1, "b": Fraction(1, 2)}, 0),
            make_inequality(
                {"d1": 1, "d2": 1, "b": -1, "c": Fraction(-3, 2), "e": -1}, 0),
        ),
    )
    return {
        "slack_pair": slack_pair,
        "wedge": wedge,
        "converse_lite": converse_lite,
        "converse": converse_alternation_system(),
    }

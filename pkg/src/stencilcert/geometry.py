"""Points, multi-indices and the stencil radii used throughout the package.

Points are plain float arrays of shape ``(d,)``; node sets are ``(N, d)``
arrays.  Multi-indices are tuples of non-negative ints.  The graded
lexicographic order produced by :func:`enumerate_multi_indices` fixes the
layout of every Vandermonde matrix and moment vector in the package.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Sequence

import numpy as np

MultiIndex = tuple[int, ...]


def enumerate_multi_indices(d: int, max_total_degree: int) -> list[MultiIndex]:
    """All multi-indices of length `d` with total degree at most `max_total_degree`.

    Ordered by total degree, and within one degree so that ``(1, 0)`` comes
    before ``(0, 1)`` (the first coordinate varies slowest downwards).

    >>> enumerate_multi_indices(2, 1)
    [(0, 0), (1, 0), (0, 1)]
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    out: list[MultiIndex] = []
    for degree in range(max_total_degree + 1):
        out.extend(_indices_of_degree(d, degree))
    return out


def _indices_of_degree(d: int, degree: int) -> list[MultiIndex]:
    if d == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in _indices_of_degree(d - 1, degree - first):
            out.append((first,) + rest)
    return out


def indices_of_degree(d: int, degree: int) -> list[MultiIndex]:
    """Multi-indices with ``|alpha| == degree``, in the same order as above."""
    if degree < 0:
        return []
    return _indices_of_degree(d, degree)


def multi_index_count(d: int, max_total_degree: int) -> int:
    return comb(d + max_total_degree, d) if max_total_degree >= 0 else 0


def factorial_of(alpha: Sequence[int]) -> int:
    out = 1
    for a in alpha:
        for i in range(2, a + 1):
            out *= i
    return out


def multinomial(alpha: Sequence[int]) -> int:
    """``|alpha|! / alpha!``."""
    return factorial_of([sum(alpha)]) // factorial_of(alpha)


def as_point(x, d: int | None = None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError(f"a point must be a flat vector, got shape {p.shape}")
    if d is not None and p.shape[0] != d:
        raise ValueError(f"expected a point in R^{d}, got R^{p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


@dataclass(frozen=True)
class PointSet:
    """A stencil: the evaluation point `center` and the nodes around it.

    Parameters
    ----------
    center : array_like, shape (d,)
    nodes : array_like, shape (N, d) or (N,) when d == 1
    """

    center: np.ndarray
    nodes: np.ndarray
    duplicates: tuple[tuple[int, int], ...] = field(init=False, repr=False)

    def __post_init__(self):
        center = as_point(self.center)
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes.reshape(-1, 1) if center.shape[0] == 1 else nodes.reshape(1, -1)
        if nodes.ndim != 2 or nodes.shape[0] < 1:
            raise ValueError("need at least one node")
        if nodes.shape[1] != center.shape[0]:
            raise ValueError("nodes and center must share the same dimension")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("node coordinates must be finite")
        center.setflags(write=False)
        nodes = nodes.copy()
        nodes.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "nodes", nodes)
        dup = tuple(
            (i, j)
            for i, j in itertools.combinations(range(nodes.shape[0]), 2)
            if np.array_equal(nodes[i], nodes[j])
        )
        object.__setattr__(self, "duplicates", dup)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def offsets(self) -> np.ndarray:
        """Node positions relative to the center, ``x_j - z``."""
        return self.nodes - self.center


def stencil_radius(ps: PointSet) -> float:
    """``max_j ||z - x_j||``."""
    return float(np.max(np.linalg.norm(ps.offsets(), axis=1)))


def segment_union_diameter(ps: PointSet) -> float:
    """Diameter of the union of the segments ``[z, x_j]``.

    Distance is convex, so the maximum is attained at segment endpoints.
    """
    pts = np.vstack([ps.center[None, :], ps.nodes])
    diffs = pts[:, None, :] - pts[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=-1)))


def scale_point_set(ps: PointSet, h: float) -> PointSet:
    """Dilate the nodes about the center by the factor `h`."""
    if not h > 0:
        raise ValueError("scale factor must be positive")
    return PointSet(ps.center, ps.center + h * (ps.nodes - ps.center))


def read_points_csv(path: str | Path, d: int | None = None) -> np.ndarray:
    """Read one node per row, `d` comma-separated decimal fields."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            fields = [f.strip() for f in row if f.strip() != ""]
            if not fields:
                continue
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no points found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: rows have differing numbers of fields")
    arr = np.array(rows, dtype=float)
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"{path}: expected {d} fields per row, got {arr.shape[1]}")
    return arr

"""Quadrature domains and functions sampled on them.

Midpoint rule on uniform cells, in one or two dimensions, over boxes and
balls.  Midpoints never sit on cell seams, so integrands with an
integrable singularity placed on a seam (the usual setup: |x|^(-beta)
at the origin of a symmetric grid) are always evaluated at regular
points.  Ball grids keep the cells of the bounding box whose centers lie
strictly inside the ball; cell weight is the full cell volume.

For singular integrands whose antiderivative is known, a sampled
function can instead store exact per-cell averages, which preserves the
integral of the data to rounding even when point values badly
undercount the mass near the singularity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError

DEFAULT_CELLS_1D = 4096
DEFAULT_CELLS_2D = 256
DEFAULT_BALL_CELLS_1D = 2048


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class QuadDomain:
    """A fixed quadrature rule: points, weights, and the region measure."""

    dim: int
    shape: str | None
    points: np.ndarray  # (N, dim)
    weights: np.ndarray  # (N,)
    measure: float
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", _freeze(np.atleast_2d(self.points)))
        object.__setattr__(self, "weights", _freeze(self.weights))
        if self.points.shape[0] != self.weights.shape[0]:
            raise DomainError("points and weights must have matching length")
        if self.points.shape[1] != self.dim:
            raise DomainError("points have wrong dimension")
        if np.any(self.weights <= 0):
            raise DomainError("weights must be positive")

    # -- constructors ----------------------------------------------------

    @classmethod
    def box(cls, lo, hi, cells=None):
        """Axis-aligned box with a uniform midpoint grid.

        ``cells`` is the per-axis cell count (int applies to every axis).
        """
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size not in (1, 2):
            raise DomainError("box needs matching lo/hi of dimension 1 or 2")
        if np.any(hi <= lo):
            raise DomainError("box needs hi > lo on every axis")
        n = lo.size
        if cells is None:
            cells = DEFAULT_CELLS_1D if n == 1 else DEFAULT_CELLS_2D
        cells = np.broadcast_to(np.asarray(cells, dtype=int), (n,)).copy()
        if np.any(cells < 1):
            raise DomainError("need at least one cell per axis")
        axes = [
            lo[k] + (np.arange(cells[k]) + 0.5) * (hi[k] - lo[k]) / cells[k]
            for k in range(n)
        ]
        h = (hi - lo) / cells
        if n == 1:
            pts = axes[0][:, None]
        else:
            X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
            pts = np.column_stack([X.ravel(), Y.ravel()])
        w = np.full(pts.shape[0], float(np.prod(h)))
        return cls(
            dim=n,
            shape="box",
            points=pts,
            weights=w,
            measure=float(np.prod(hi - lo)),
            params={"lo": lo.tolist(), "hi": hi.tolist(), "cells": cells.tolist()},
        )

    @classmethod
    def ball(cls, center, radius, cells=None):
        """Ball of given radius: in 1-D an interval grid, in 2-D the
        bounding-box cells whose centers lie strictly inside."""
        center = np.atleast_1d(np.asarray(center, dtype=float))
        radius = float(radius)
        if radius <= 0:
            raise DomainError("radius must be positive")
        n = center.size
        if n == 1:
            cells = DEFAULT_BALL_CELLS_1D if cells is None else int(cells)
            dom = cls.box(center - radius, center + radius, cells)
            return cls(
                dim=1,
                shape="ball",
                points=dom.points,
                weights=dom.weights,
                measure=dom.measure,
                params={"center": center.tolist(), "radius": radius, "cells": cells},
            )
        if n != 2:
            raise DomainError("only dimensions 1 and 2 are supported")
        k = DEFAULT_CELLS_2D if cells is None else int(cells)
        h = 2.0 * radius / k
        ax = center[0] - radius + (np.arange(k) + 0.5) * h
        ay = center[1] - radius + (np.arange(k) + 0.5) * h
        X, Y = np.meshgrid(ax, ay, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        inside = np.einsum("ij,ij->i", pts - center, pts - center) < radius**2
        pts = pts[inside]
        w = np.full(pts.shape[0], h * h)
        return cls(
            dim=2,
            shape="ball",
            points=pts,
            weights=w,
            measure=float(w.sum()),
            params={
                "center": center.tolist(),
                "radius": radius,
                "cells": k,
                "analytic_measure": float(np.pi * radius**2),
            },
        )

    @classmethod
    def from_points(cls, points, weights, shape=None):
        """Wrap an arbitrary weighted point cloud (no geometry attached)."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.asarray(weights, dtype=float)
        return cls(
            dim=points.shape[1],
            shape=shape,
            points=points,
            weights=weights,
            measure=float(weights.sum()),
        )

    def refine(self, factor=2):
        """Same region, ``factor`` times as many cells per axis."""
        if self.shape == "box":
            return QuadDomain.box(
                np.asarray(self.params["lo"]),
                np.asarray(self.params["hi"]),
                np.asarray(self.params["cells"]) * factor,
            )
        if self.shape == "ball":
            return QuadDomain.ball(
                np.asarray(self.params["center"]),
                self.params["radius"],
                int(self.params["cells"]) * factor,
            )
        raise DomainError("only box and ball domains can be refined")

    # -- cell geometry (1-D) ---------------------------------------------

    def cell_edges(self):
        """Left/right edges of every 1-D cell (needed for cell averages)."""
        if self.dim != 1 or self.shape not in ("box", "ball"):
            raise DomainError("cell edges are defined for 1-D box/ball grids only")
        x = self.points[:, 0]
        h = self.weights
        return x - h / 2.0, x + h / 2.0

    # -- integration -----------------------------------------------------

    def _check_finite(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise DomainError("integrand has wrong shape for this domain")
        bad = ~np.isfinite(values)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NumericError(
                f"non-finite integrand value {values[i]} at point index {i}, "
                f"coords {self.points[i].tolist()}",
                point_index=i,
                point=self.points[i].tolist(),
            )
        return values

    def integrate(self, values):
        """Midpoint-rule integral of point values over the whole region."""
        return float(np.dot(self.weights, self._check_finite(values)))

    def region_integrate(self, mask, values):
        """Integral restricted to a strict-inequality mask.

        The mask is boolean per quadrature point; callers build it with
        strict comparisons so tie points are excluded by construction.
        """
        mask = np.asarray(mask)
        if mask.dtype != bool or mask.shape != self.weights.shape:
            raise DomainError("mask must be boolean per quadrature point")
        values = self._check_finite(values)
        return float(np.dot(self.weights[mask], values[mask]))

    def average(self, values):
        return self.integrate(values) / self.measure


@dataclass(frozen=True)
class SampledFunction:
    """Function values bound to a quadrature domain.

    ``provenance`` records how the values arose ("closed_form:<name>",
    "cell_average:<name>", "table", ...).  Values must be finite
    everywhere; a non-finite sample names its quadrature point.
    """

    domain: QuadDomain
    values: np.ndarray
    provenance: str = "table"

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        self.domain._check_finite(self.values)

    @classmethod
    def from_callable(cls, domain, fn, name="anonymous", cell_average=None):
        """Sample a closed form on the grid.

        With ``cell_average`` given (1-D only), values are exact means
        over each cell instead of midpoint values; use this for
        integrable singularities, where midpoint sampling loses the mass
        concentrated next to the singular point.
        """
        if cell_average is not None:
            lo, hi = domain.cell_edges()
            vals = np.asarray(cell_average(lo, hi), dtype=float)
            return cls(domain, vals, provenance=f"cell_average:{name}")
        x = domain.points[:, 0] if domain.dim == 1 else domain.points
        vals = np.asarray(fn(x), dtype=float)
        return cls(domain, vals, provenance=f"closed_form:{name}")

    @classmethod
    def from_csv(cls, domain, path, atol=1e-9):
        """Load values from CSV columns (coordinates..., value).

        Rows must match the domain's points in order; this is a data
        exchange format, not a resampling tool.
        """
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            for row in reader:
                rows.append([float(v) for v in row])
        del header
        data = np.asarray(rows, dtype=float)
        if data.shape[0] != domain.points.shape[0] or data.shape[1] != domain.dim + 1:
            raise DomainError(
                f"CSV shape {data.shape} does not match domain "
                f"({domain.points.shape[0]} points, dim {domain.dim})"
            )
        if not np.allclose(data[:, : domain.dim], domain.points, atol=atol, rtol=0):
            raise DomainError("CSV coordinates do not match the domain's points")
        return cls(domain, data[:, -1], provenance="table")

    def with_values(self, values, provenance=None):
        return SampledFunction(
            self.domain, values, provenance or self.provenance
        )

    def integral(self):
        return self.domain.integrate(self.values)

"""Piecewise-constant set valued fields on the unit cube and their norms.

A field assigns one symmetric convex body to every cell of a dyadic grid.
Integrals are Minkowski sums weighted by cell volume, the p-norms reduce
to scalar sums through a per-cell seminorm, and distribution tables keep
exact rational tail measures so weak-type quantities and layer cake sums
do not pick up quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bodies import (
    ConvexBody, fold_minkowski, hausdorff, magnitude, minkowski_sum, origin_body, scale,
)
from .grids import DyadicDomain
from .matrices import MatrixField, SpdMatrix
from .seminorms import EuclideanNorm, GeometricMeanDoubleDual, MatrixNorm, Seminorm


class SetField:
    """One symmetric convex body per grid cell."""

    __slots__ = ("domain", "cells")

    def __init__(self, domain: DyadicDomain, cells):
        cells = tuple(cells)
        if len(cells) != domain.num_cells:
            raise ValueError(f"field needs {domain.num_cells} cells, got {len(cells)}")
        dims = {c.dim for c in cells}
        if len(dims) != 1:
            raise ValueError("all cells of a field must share one ambient dimension")
        self.domain = domain
        self.cells = cells

    @property
    def dim(self) -> int:
        return self.cells[0].dim

    def __len__(self):
        return len(self.cells)

    def to_dict(self) -> dict:
        return {
            "n": self.domain.n,
            "grid_level": self.domain.level,
            "cells": {str(i): c.to_dict() for i, c in enumerate(self.cells)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SetField":
        domain = DyadicDomain(int(data.get("n", 1)), int(data["grid_level"]))
        cells = [ConvexBody.from_dict(data["cells"][str(i)]) for i in range(domain.num_cells)]
        return cls(domain, cells)


def scale_field(field: SetField, factor: float) -> SetField:
    return SetField(field.domain, [scale(factor, c) for c in field.cells])


def add_fields(a: SetField, b: SetField) -> SetField:
    if a.domain != b.domain:
        raise ValueError("field domains differ")
    return SetField(a.domain, [minkowski_sum(x, y) for x, y in zip(a.cells, b.cells)])


def aumann_integral(field: SetField, cells=None) -> ConvexBody:
    """Set valued integral over the whole domain, or over a subset of cells.

    Cells all carry the same volume, so the integral is the Minkowski sum
    of the selected cell bodies scaled once by that volume.  `cells` is an
    iterable of flat cell indices; None means every cell.
    """
    if cells is None:
        picked = field.cells
    else:
        picked = [field.cells[i] for i in cells]
        if not picked:
            return origin_body(field.dim)
    return scale(field.domain.cell_volume, fold_minkowski(picked, field.dim))


def magnitude_bound_check(field: SetField, cells=None) -> tuple[float, float]:
    """(|integral of F|, integral of |F|); the first never exceeds the second."""
    lhs = magnitude(aumann_integral(field, cells))
    vol = field.domain.cell_volume
    idx = range(len(field.cells)) if cells is None else list(cells)
    rhs = math.fsum(magnitude(field.cells[i]) * vol for i in idx)
    return lhs, rhs


class NormField:
    """A per-cell norm on the same grid as a set field.

    Cells may share one constant norm or carry a matrix-induced norm from
    an SPD matrix field; the double-dual interpolated variant pairs two
    matrix fields with a weight t.
    """

    __slots__ = ("domain", "norms", "kind", "payload")

    def __init__(self, domain: DyadicDomain, norms, kind: str, payload: dict):
        norms = tuple(norms)
        if len(norms) != domain.num_cells:
            raise ValueError(f"norm field needs {domain.num_cells} cells, got {len(norms)}")
        self.domain = domain
        self.norms = norms
        self.kind = kind
        self.payload = payload

    @classmethod
    def euclidean(cls, domain: DyadicDomain, dim: int) -> "NormField":
        rho = EuclideanNorm(dim)
        return cls(domain, [rho] * domain.num_cells, "euclidean", {"dim": dim})

    @classmethod
    def from_matrix_field(cls, mf: MatrixField) -> "NormField":
        norms = [MatrixNorm(c.arr) for c in mf.cells]
        return cls(mf.domain, norms, "matrix", {"field": mf})

    @classmethod
    def gm_double_dual(cls, mf0: MatrixField, mf1: MatrixField, t: float,
                       *, directions=None) -> "NormField":
        if mf0.domain != mf1.domain:
            raise ValueError("matrix field domains differ")
        norms = [
            GeometricMeanDoubleDual(MatrixNorm(a.arr), MatrixNorm(b.arr), t,
                                    directions=directions)
            for a, b in zip(mf0.cells, mf1.cells)
        ]
        return cls(mf0.domain, norms, "gm_double_dual",
                   {"field0": mf0, "field1": mf1, "t": float(t)})

    @property
    def dim(self) -> int:
        return self.norms[0].dim

    def to_dict(self) -> dict:
        body: dict = {"kind": self.kind, "n": self.domain.n, "grid_level": self.domain.level}
        if self.kind == "euclidean":
            body["dim"] = self.payload["dim"]
        elif self.kind == "matrix":
            body["field"] = self.payload["field"].to_dict()
        elif self.kind == "gm_double_dual":
            body["field0"] = self.payload["field0"].to_dict()
            body["field1"] = self.payload["field1"].to_dict()
            body["t"] = self.payload["t"]
        else:
            raise ValueError(f"cannot serialize norm field kind {self.kind!r}")
        return body

    @classmethod
    def from_dict(cls, data: dict) -> "NormField":
        kind = data["kind"]
        if kind == "euclidean":
            domain = DyadicDomain(int(data["n"]), int(data["grid_level"]))
            return cls.euclidean(domain, int(data["dim"]))
        if kind == "matrix":
            return cls.from_matrix_field(MatrixField.from_dict(data["field"]))
        if kind == "gm_double_dual":
            return cls.gm_double_dual(
                MatrixField.from_dict(data["field0"]),
                MatrixField.from_dict(data["field1"]),
                float(data["t"]),
            )
        raise ValueError(f"unknown norm field kind {kind!r}")


def _cell_values(field: SetField, rho) -> list[float]:
    """Scalar size of every cell body under rho.

    rho may be None (Euclidean), one Seminorm for all cells, or a
    NormField aligned with the set field's grid.
    """
    if rho is None:
        return [magnitude(c) for c in field.cells]
    if isinstance(rho, NormField):
        if rho.domain != field.domain:
            raise ValueError("norm field grid does not match the set field")
        return [r.of_body(c) for r, c in zip(rho.norms, field.cells)]
    if isinstance(rho, Seminorm):
        return [rho.of_body(c) for c in field.cells]
    raise TypeError(f"expected a Seminorm or NormField, got {type(rho).__name__}")


def lp_norm(field: SetField, p: float, rho=None) -> float:
    """L^p norm of the scalar field x -> rho_x(F(x)); p = inf gives the sup."""
    values = _cell_values(field, rho)
    if p == math.inf:
        return max(values)
    p = float(p)
    if not p > 0.0:
        raise ValueError(f"p must be positive or inf, got {p}")
    vol = field.domain.cell_volume
    return math.fsum(v ** p * vol for v in values) ** (1.0 / p)


@dataclass(frozen=True)
class DistributionTable:
    """Exact distribution data of a nonnegative simple function.

    thresholds are the distinct positive values in increasing order and
    tails[i] is the measure of the super-level set at thresholds[i],
    kept as an exact rational count of equal cells times cell volume.
    """

    thresholds: tuple
    tails: tuple
    total_measure: Fraction

    def tail_measure(self, lam: float) -> Fraction:
        """Measure of the set where the function is >= lam (lam > 0)."""
        if lam <= 0.0:
            return self.total_measure
        for value, tail in zip(self.thresholds, self.tails):
            if value >= lam:
                return tail
        return Fraction(0)

    def weak_norm(self, p: float) -> float:
        """sup over lam of lam * measure(>= lam)^(1/p)."""
        p = float(p)
        if not p > 0.0:
            raise ValueError(f"p must be positive, got {p}")
        best = 0.0
        for value, tail in zip(self.thresholds, self.tails):
            best = max(best, value * float(tail) ** (1.0 / p))
        return best

    def layer_cake(self, p: float) -> float:
        """Integral of the p-th power via the telescoping layer sum."""
        p = float(p)
        if not p > 0.0:
            raise ValueError(f"p must be positive, got {p}")
        prev = 0.0
        terms = []
        for value, tail in zip(self.thresholds, self.tails):
            terms.append(float(tail) * (value ** p - prev))
            prev = value ** p
        return math.fsum(terms)


def distribution(field: SetField, rho=None) -> DistributionTable:
    """Distribution table of the scalar field x -> rho_x(F(x))."""
    values = _cell_values(field, rho)
    vol = field.domain.cell_volume_exact
    distinct = sorted({v for v in values if v > 0.0})
    tails = []
    for lam in distinct:
        count = sum(1 for v in values if v >= lam)
        tails.append(count * vol)
    return DistributionTable(
        thresholds=tuple(distinct),
        tails=tuple(tails),
        total_measure=len(values) * vol,
    )


def weak_norm(field: SetField, p: float, rho=None) -> float:
    return distribution(field, rho).weak_norm(p)


def dp_distance(a: SetField, b: SetField, p: float, norm=None) -> float:
    """L^p average of the per-cell Hausdorff distance between two fields.

    norm may be None, one MatrixNorm for every cell, or a matrix-kind
    NormField aligned with the grid.
    """
    if a.domain != b.domain:
        raise ValueError("field domains differ")
    if isinstance(norm, NormField):
        if norm.domain != a.domain:
            raise ValueError("norm field grid does not match the set fields")
        cell_norms = norm.norms
    else:
        cell_norms = [norm] * len(a.cells)
    gaps = [hausdorff(x, y, norm=nm) for x, y, nm in zip(a.cells, b.cells, cell_norms)]
    if p == math.inf:
        return max(gaps)
    p = float(p)
    if not p > 0.0:
        raise ValueError(f"p must be positive or inf, got {p}")
    vol = a.domain.cell_volume
    return math.fsum(g ** p * vol for g in gaps) ** (1.0 / p)


def random_simple_field(rng: np.random.Generator, domain: DyadicDomain, dim: int,
                        *, generators_per_cell: int = 3, magnitude_scale=None) -> SetField:
    """Random field with Gaussian generator directions.

    All randomness is drawn up front in one call so the construction is
    independent of evaluation order.  magnitude_scale, when given, is a
    per-cell array of nonnegative factors applied after the draw.
    """
    raw = rng.standard_normal((domain.num_cells, generators_per_cell, dim))
    if magnitude_scale is not None:
        factors = np.asarray(magnitude_scale, dtype=float).reshape(domain.num_cells, 1, 1)
        if (factors < 0.0).any():
            raise ValueError("magnitude scales must be nonnegative")
        raw = raw * factors
    return SetField(domain, [ConvexBody(dim, g) for g in raw])

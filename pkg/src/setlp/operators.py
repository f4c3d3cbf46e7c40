"""Fractional averaging and maximal operators over dyadic cube families.

The fractional average of a set field over a cube Q is the set integral
over Q clipped to the domain, scaled by clip_vol(Q)^(alpha - 1); alpha=0
gives the plain averaging operator.  The maximal field at a cell is the
convex hull of the union of those averages over all admissible cubes of
one (possibly translated) dyadic grid, from the unit cube down to the
data resolution.  For a translated grid a cube is admissible for a cell
only when it contains the whole cell; cells cut by every cube boundary
of that grid get the degenerate body {0} there.

Interpolation bookkeeping lives in ExponentConfig: a pair of endpoint
exponents, a mixing weight, and the explicit strong-type constant

    2 * (q/|q - q0| + q/|q - q1|)^(1/q) * c0^(1-t) * c1^t,

where an infinite endpoint contributes nothing to the sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product

import numpy as np

from .bodies import ConvexBody, conv_union, fold_minkowski, origin_body, scale, support_batch
from .fields import SetField, add_fields
from .grids import (
    DyadicCube,
    DyadicDomain,
    cube_containing_point,
    cubes_covering_domain,
    dyadic_cube_family,
    grid_translations,
    parent_cube,
)
from .seminorms import direction_grid

_RECIP_TOL = 1e-12


def _recip(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


@dataclass(frozen=True)
class ExponentConfig:
    """Endpoint exponents, mixing weight, and the interpolated pair.

    The interpolated exponents satisfy 1/p = (1-t)/p0 + t/p1 and
    1/q = (1-t)/q0 + t/q1.  Supplying p or q explicitly is allowed as a
    cross-check; a mismatch beyond 1e-12 in the reciprocal is an error.
    """

    p0: float
    q0: float
    p1: float
    q1: float
    t: float
    c0: float = 1.0
    c1: float = 1.0
    p: float = dc_field(default=None)
    q: float = dc_field(default=None)

    def __post_init__(self):
        for name in ("p0", "p1"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 1.0):
                raise ValueError(f"{name} must be finite and >= 1, got {v}")
        for name in ("q0", "q1"):
            v = getattr(self, name)
            if not (v >= 1.0):
                raise ValueError(f"{name} must be >= 1 (inf allowed), got {v}")
        if self.q0 == self.q1:
            raise ValueError("endpoint target exponents must differ")
        if not 0.0 < self.t < 1.0:
            raise ValueError(f"mixing weight t must lie strictly in (0, 1), got {self.t}")
        if not (self.c0 > 0.0 and self.c1 > 0.0):
            raise ValueError("endpoint constants must be positive")
        rp = (1.0 - self.t) * _recip(self.p0) + self.t * _recip(self.p1)
        rq = (1.0 - self.t) * _recip(self.q0) + self.t * _recip(self.q1)
        p = math.inf if rp == 0.0 else 1.0 / rp
        q = math.inf if rq == 0.0 else 1.0 / rq
        if self.p is not None and abs(_recip(self.p) - rp) > _RECIP_TOL:
            raise ValueError(f"supplied p={self.p} is not the interpolated exponent {p}")
        if self.q is not None and abs(_recip(self.q) - rq) > _RECIP_TOL:
            raise ValueError(f"supplied q={self.q} is not the interpolated exponent {q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def for_fractional_maximal(cls, alpha: float, t: float) -> "ExponentConfig":
        """Endpoints of the order-alpha maximal operator, both constants 1."""
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie strictly in (0, 1), got {alpha}")
        return cls(p0=1.0 / alpha, q0=math.inf, p1=1.0, q1=1.0 / (1.0 - alpha), t=t)

    @property
    def alpha(self) -> float:
        """1/p - 1/q, constant along the fractional-maximal segment."""
        return _recip(self.p) - _recip(self.q)

    @property
    def interpolation_constant(self) -> float:
        """Explicit strong-type constant for the interpolated pair."""
        q = self.q
        if math.isinf(q):
            raise ValueError("interpolated q is infinite; the explicit constant needs q < inf")
        term0 = 0.0 if math.isinf(self.q0) else q / abs(q - self.q0)
        term1 = 0.0 if math.isinf(self.q1) else q / abs(q - self.q1)
        mixed = self.c0 ** (1.0 - self.t) * self.c1 ** self.t
        return 2.0 * (term0 + term1) ** (1.0 / q) * mixed

    def to_dict(self) -> dict:
        def enc(x):
            return "inf" if math.isinf(x) else x

        return {
            "p0": enc(self.p0), "q0": enc(self.q0),
            "p1": enc(self.p1), "q1": enc(self.q1),
            "t": self.t, "c0": self.c0, "c1": self.c1,
            "p": enc(self.p), "q": enc(self.q),
        }


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return alpha


def _cell_overlaps(domain: DyadicDomain, cube: DyadicCube):
    """(cell index, exact overlap volume) pairs for cells meeting a cube."""
    lo, hi = cube.box()
    scale_ = domain.cells_per_axis
    axes = []
    for a, b in zip(lo, hi):
        cells = []
        c_lo = max(0, math.floor(a * scale_))
        c_hi = min(scale_ - 1, math.ceil(b * scale_) - 1)
        for c in range(c_lo, c_hi + 1):
            seg = min(b, Fraction(c + 1, scale_)) - max(a, Fraction(c, scale_))
            if seg > 0:
                cells.append((c, seg))
        axes.append(cells)
    for combo in product(*axes):
        coords = tuple(c for c, _ in combo)
        weight = Fraction(1)
        for _, seg in combo:
            weight *= seg
        yield domain.cell_index(coords), weight


def aligned_cells(domain: DyadicDomain, cube: DyadicCube) -> list[int]:
    """Indices of the cells covered by an untranslated grid cube."""
    if any(t != 0 for t in cube.tau):
        raise ValueError("aligned cell lookup needs an untranslated cube")
    if cube.level > domain.level:
        raise ValueError(
            f"cube at level {cube.level} is finer than the data grid (level {domain.level})"
        )
    reps = 1 << (domain.level - cube.level)
    ranges = [range(m * reps, (m + 1) * reps) for m in cube.coords]
    return [domain.cell_index(coords) for coords in product(*ranges)]


def _cube_integral(field: SetField, cube: DyadicCube) -> ConvexBody:
    """Set integral of the field over one cube, boundary cells clipped."""
    parts = [
        scale(float(w), field.cells[idx])
        for idx, w in _cell_overlaps(field.domain, cube)
    ]
    return fold_minkowski(parts, field.dim)


def frac_average(field: SetField, cube: DyadicCube, alpha: float) -> ConvexBody:
    """Order-alpha fractional average of the field over one grid cube.

    alpha = 0 is the plain average.  A translated cube reaching past the
    domain is normalized by its clipped volume.
    """
    domain = field.domain
    if cube.n != domain.n:
        raise ValueError(f"cube dimension {cube.n} does not match the domain ({domain.n})")
    if cube.level > domain.level:
        raise ValueError(
            f"cube at level {cube.level} is finer than the data grid (level {domain.level})"
        )
    alpha = _check_alpha(alpha)
    vol = cube.clip_volume()
    if vol == 0:
        raise ValueError("cube does not meet the field domain")
    return scale(float(vol) ** (alpha - 1.0), _cube_integral(field, cube))


def _zero_tau(n: int) -> tuple:
    return tuple([Fraction(0)] * n)


def _normalize_tau(n: int, tau) -> tuple:
    if tau is None:
        return _zero_tau(n)
    tau = tuple(Fraction(t) for t in tau)
    if len(tau) != n:
        raise ValueError(f"translation needs {n} components, got {len(tau)}")
    allowed = {Fraction(0), Fraction(1, 3), Fraction(-1, 3)}
    if any(t not in allowed for t in tau):
        raise ValueError("translation components must be 0, 1/3 or -1/3")
    return tau


def cube_integral_tree(field: SetField, tau=None) -> tuple[list[dict], list[dict]]:
    """Per-level cube maps and exact set integrals for one grid.

    Returns (levels, integrals): levels[j] maps cube coords to the cube,
    integrals[j] maps the same coords to the set integral over the cube
    clipped to the domain.  Level k is read straight off the cells and
    coarser levels are Minkowski sums of their children.
    """
    domain = field.domain
    k, n, dim = domain.level, domain.n, field.dim
    tau = _normalize_tau(n, tau)
    aligned = all(t == 0 for t in tau)
    levels = [{c.coords: c for c in cubes_covering_domain(n, tau, j)} for j in range(k + 1)]

    integrals: list[dict] = [dict() for _ in range(k + 1)]
    if aligned:
        vol = domain.cell_volume
        for coords in levels[k]:
            integrals[k][coords] = scale(vol, field.cells[domain.cell_index(coords)])
    else:
        for coords, cube in levels[k].items():
            integrals[k][coords] = _cube_integral(field, cube)
    for j in range(k - 1, -1, -1):
        children: dict = {}
        for coords, cube in levels[j + 1].items():
            children.setdefault(parent_cube(cube).coords, []).append(integrals[j + 1][coords])
        for coords in levels[j]:
            parts = children.get(coords)
            integrals[j][coords] = (
                fold_minkowski(parts, dim) if parts else origin_body(dim)
            )
    return levels, integrals


def _maximal_for_grid(field: SetField, alpha: float, tau, tree=None) -> SetField:
    """Maximal field over the admissible cubes of one translated grid."""
    domain = field.domain
    k, n, dim = domain.level, domain.n, field.dim
    aligned = all(t == 0 for t in tau)
    levels, integrals = tree if tree is not None else cube_integral_tree(field, tau)

    # union of fractional averages along each ancestor chain, root down
    accum: list[dict] = [dict() for _ in range(k + 1)]
    for j in range(k + 1):
        for coords, cube in levels[j].items():
            factor = float(cube.clip_volume()) ** (alpha - 1.0)
            avg = scale(factor, integrals[j][coords])
            if j == 0:
                accum[0][coords] = avg
            else:
                accum[j][coords] = conv_union(accum[j - 1][parent_cube(cube).coords], avg)

    out = []
    if aligned:
        for idx in range(domain.num_cells):
            out.append(accum[k][domain.cell_coords(idx)])
        return SetField(domain, out)
    for idx in range(domain.num_cells):
        lo, hi = domain.cell_box(idx)
        center = domain.cell_center(idx)
        body = origin_body(dim)
        # deepest cube of this grid containing the whole cell, if any
        for j in range(k, -1, -1):
            cube = cube_containing_point(center, n, tau, j)
            if cube.contains_box(lo, hi):
                body = accum[j][cube.coords]
                break
        out.append(body)
    return SetField(domain, out)


def dyadic_frac_maximal(field: SetField, alpha: float, tau=None, *,
                        tree=None) -> SetField:
    """Fractional maximal field over one dyadic grid (default untranslated).

    tree, if given, must be the (levels, integrals) pair from
    cube_integral_tree for the same field and grid; callers that already
    hold the tree skip its reconstruction.
    """
    alpha = _check_alpha(alpha)
    tau = _normalize_tau(field.domain.n, tau)
    return _maximal_for_grid(field, alpha, tau, tree)


def full_maximal_envelope(field: SetField, alpha: float) -> SetField:
    """Cellwise convex union of the maximal fields of all translated grids."""
    merged = None
    for tau in grid_translations(field.domain.n):
        part = dyadic_frac_maximal(field, alpha, tau)
        if merged is None:
            merged = list(part.cells)
        else:
            merged = [conv_union(a, b) for a, b in zip(merged, part.cells)]
    return SetField(field.domain, merged)


def _halve(a: np.ndarray, axis: int) -> np.ndarray:
    shape = list(a.shape)
    shape[axis] //= 2
    shape.insert(axis + 1, 2)
    return a.reshape(shape).sum(axis=axis + 1)


def scalar_frac_maximal(values, domain: DyadicDomain, alpha: float, tau=None) -> np.ndarray:
    """Fractional maximal of a scalar cell array, row-major cell order.

    Independent of the set valued path: the untranslated grid runs on
    plain block sums and running maxima over numpy arrays; a translated
    grid walks each cell's containing cubes directly.
    """
    alpha = _check_alpha(alpha)
    k, n = domain.level, domain.n
    tau = _normalize_tau(n, tau)
    v = np.asarray(values, dtype=float)
    if v.shape != (domain.num_cells,):
        raise ValueError(f"expected {domain.num_cells} cell values, got shape {v.shape}")
    if (v < 0.0).any():
        raise ValueError("scalar maximal expects nonnegative cell values")
    if any(t != 0 for t in tau):
        return _scalar_maximal_translated(v, domain, alpha, tau)
    grid = v.reshape([domain.cells_per_axis] * n)
    sums = grid * domain.cell_volume
    best = np.zeros_like(grid)
    for j in range(k, -1, -1):
        vol = 2.0 ** (-j * n)
        avg = sums * vol ** (alpha - 1.0)
        reps = 1 << (k - j)
        wide = avg
        for axis in range(n):
            wide = np.repeat(wide, reps, axis=axis)
        np.maximum(best, wide, out=best)
        if j > 0:
            for axis in range(n):
                sums = _halve(sums, axis)
    return best.ravel()


def _scalar_maximal_translated(v: np.ndarray, domain: DyadicDomain,
                               alpha: float, tau) -> np.ndarray:
    k, n = domain.level, domain.n
    out = np.zeros(domain.num_cells)
    for idx in range(domain.num_cells):
        lo, hi = domain.cell_box(idx)
        center = domain.cell_center(idx)
        best = 0.0
        for j in range(k + 1):
            cube = cube_containing_point(center, n, tau, j)
            if not cube.contains_box(lo, hi):
                continue
            integral = math.fsum(float(w) * v[i] for i, w in _cell_overlaps(domain, cube))
            best = max(best, float(cube.clip_volume()) ** (alpha - 1.0) * integral)
        out[idx] = best
    return out


@dataclass(frozen=True)
class SublinearityReport:
    """Measured gaps for subadditivity of the maximal operator.

    containment_excess: largest support-function excess of M(A+B) over
    MA + MB across cells and probe directions (nonpositive up to
    arithmetic noise).  averaging_gap: largest absolute support gap in
    the exact additivity of the fractional average across the cube
    family.
    """

    containment_excess: float
    averaging_gap: float

    def passed(self, tol: float = 1e-9) -> bool:
        return self.containment_excess <= tol and self.averaging_gap <= tol


def sublinearity_check(a: SetField, b: SetField, alpha: float, *,
                       tau=None, num_directions: int = 64) -> SublinearityReport:
    """Check M(A+B) inside MA + MB and exact additivity of averages."""
    alpha = _check_alpha(alpha)
    if a.domain != b.domain:
        raise ValueError("field domains differ")
    ab = add_fields(a, b)
    ma = dyadic_frac_maximal(a, alpha, tau)
    mb = dyadic_frac_maximal(b, alpha, tau)
    mab = dyadic_frac_maximal(ab, alpha, tau)
    U = direction_grid(a.dim, num_directions)
    worst = -math.inf
    for x, y, z in zip(ma.cells, mb.cells, mab.cells):
        excess = support_batch(z, U) - support_batch(x, U) - support_batch(y, U)
        worst = max(worst, float(excess.max()))

    gap = 0.0
    tau_t = _normalize_tau(a.domain.n, tau)
    for cube in dyadic_cube_family(a.domain, tau_t):
        lhs = frac_average(ab, cube, alpha)
        rhs_a = frac_average(a, cube, alpha)
        rhs_b = frac_average(b, cube, alpha)
        diff = support_batch(lhs, U) - support_batch(rhs_a, U) - support_batch(rhs_b, U)
        gap = max(gap, float(np.abs(diff).max()))
    return SublinearityReport(containment_excess=worst, averaging_gap=gap)

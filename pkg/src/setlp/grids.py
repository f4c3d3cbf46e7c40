"""Dyadic domains and translated dyadic grids with exact rational geometry.

The domain is the half-open unit cube [0,1)^n (n = 1 or 2) split into
2^(n*k) congruent cells at resolution level k.  Besides the standard
dyadic grid, the operators use the translated grids

    D^tau = { 2^(-j) * ([0,1)^n + m + (-1)^j * tau) : j >= 0, m integer },

with per-axis translations tau in {0, +1/3, -1/3}.  The sign alternation
(-1)^j is what makes each translated family nested across scales, and the
1/3 shifts make the three families together see every cube "with room to
spare".  All cube coordinates are Fractions so tiling and nesting checks
are exact, with zero tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, floor

import numpy as np

THIRD_SHIFTS = (Fraction(0), Fraction(1, 3), Fraction(-1, 3))


def grid_translations(n: int) -> list[tuple[Fraction, ...]]:
    """All 3^n translation vectors with components in {0, +1/3, -1/3}."""
    return [tuple(t) for t in product(THIRD_SHIFTS, repeat=n)]


@dataclass(frozen=True)
class DyadicDomain:
    """The unit cube [0,1)^n partitioned into 2^(n*level) dyadic cells.

    Cells are indexed row-major: for n = 2 the cell with axis coordinates
    (i0, i1) has flat index i0 * 2^level + i1.
    """

    n: int
    level: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"domain dimension must be 1 or 2, got {self.n}")
        if not (0 <= self.level <= 16):
            raise ValueError(f"grid level out of range: {self.level}")

    @property
    def cells_per_axis(self) -> int:
        return 1 << self.level

    @property
    def num_cells(self) -> int:
        return 1 << (self.n * self.level)

    @property
    def cell_volume(self) -> float:
        # exact in binary floating point
        return 2.0 ** (-self.n * self.level)

    @property
    def cell_volume_exact(self) -> Fraction:
        return Fraction(1, 1 << (self.n * self.level))

    def cell_coords(self, index: int) -> tuple[int, ...]:
        if not (0 <= index < self.num_cells):
            raise ValueError(f"cell index {index} out of range")
        if self.n == 1:
            return (index,)
        return divmod(index, self.cells_per_axis)

    def cell_index(self, coords: tuple[int, ...]) -> int:
        if len(coords) != self.n:
            raise ValueError("coordinate arity does not match domain dimension")
        for c in coords:
            if not (0 <= c < self.cells_per_axis):
                raise ValueError(f"cell coordinate {coords} out of range")
        if self.n == 1:
            return coords[0]
        return coords[0] * self.cells_per_axis + coords[1]

    def cell_box(self, index: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        """Half-open box [lo, hi) of a cell, as exact Fractions."""
        side = Fraction(1, self.cells_per_axis)
        coords = self.cell_coords(index)
        lo = tuple(c * side for c in coords)
        hi = tuple((c + 1) * side for c in coords)
        return lo, hi

    def cell_center(self, index: int) -> tuple[Fraction, ...]:
        lo, hi = self.cell_box(index)
        return tuple((a + b) / 2 for a, b in zip(lo, hi))

    def cell_centers(self) -> np.ndarray:
        """Float cell centers, shape (num_cells, n), row-major order."""
        side = 1.0 / self.cells_per_axis
        axis = (np.arange(self.cells_per_axis) + 0.5) * side
        if self.n == 1:
            return axis[:, None]
        g0, g1 = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([g0.ravel(), g1.ravel()])


@dataclass(frozen=True)
class DyadicCube:
    """One cube of a (possibly translated) dyadic grid.

    The cube at ``level`` j has side 2^(-j) and lower corner
    (m_a + (-1)^j * tau_a) * 2^(-j) on axis a.
    """

    n: int
    tau: tuple[Fraction, ...]
    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.tau) != self.n or len(self.coords) != self.n:
            raise ValueError("cube arity mismatch")
        if self.level < 0:
            raise ValueError("cube level must be nonnegative")

    @property
    def side(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def sign(self) -> int:
        return -1 if self.level % 2 else 1

    def box(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        s = self.side
        lo = tuple((m + self.sign * t) * s for m, t in zip(self.coords, self.tau))
        hi = tuple(a + s for a in lo)
        return lo, hi

    def contains_point(self, point: tuple[Fraction, ...]) -> bool:
        lo, hi = self.box()
        return all(a <= p < b for p, a, b in zip(point, lo, hi))

    def contains_box(self, lo: tuple[Fraction, ...], hi: tuple[Fraction, ...]) -> bool:
        clo, chi = self.box()
        return all(a <= x and y <= b for x, y, a, b in zip(lo, hi, clo, chi))

    def clip_volume(self) -> Fraction:
        """Exact volume of the intersection with the unit cube."""
        lo, hi = self.box()
        vol = Fraction(1)
        for a, b in zip(lo, hi):
            seg = min(b, Fraction(1)) - max(a, Fraction(0))
            if seg <= 0:
                return Fraction(0)
            vol *= seg
        return vol

    def key(self) -> str:
        tau = ",".join(str(t) for t in self.tau)
        coords = ",".join(str(m) for m in self.coords)
        return f"j={self.level};tau=({tau});m=({coords})"


def cube_containing_point(
    point: tuple[Fraction, ...], n: int, tau: tuple[Fraction, ...], level: int
) -> DyadicCube:
    """The unique grid cube at ``level`` containing an exact point."""
    sign = -1 if level % 2 else 1
    scale = 1 << level
    coords = tuple(floor(p * scale - sign * t) for p, t in zip(point, tau))
    return DyadicCube(n, tau, level, coords)


def parent_cube(cube: DyadicCube) -> DyadicCube:
    """The unique next-coarser cube of the same grid containing ``cube``."""
    if cube.level == 0:
        raise ValueError("level-0 cube has no parent in scope")
    lo, hi = cube.box()
    center = tuple((a + b) / 2 for a, b in zip(lo, hi))
    parent = cube_containing_point(center, cube.n, cube.tau, cube.level - 1)
    if not parent.contains_box(lo, hi):
        # unreachable for 0 / +-1/3 translations; guards arithmetic bugs
        raise AssertionError("translated grid lost nesting")
    return parent


def cubes_covering_domain(n: int, tau: tuple[Fraction, ...], level: int) -> list[DyadicCube]:
    """All grid cubes at ``level`` whose interior meets [0,1)^n."""
    sign = -1 if level % 2 else 1
    scale = 1 << level
    ranges = []
    for t in tau:
        off = sign * t
        # need m + off < 2^j (left edge inside) and m + off + 1 > 0 (right edge inside)
        m_lo = floor(-off - 1) + 1
        m_hi = ceil(scale - off) - 1
        ranges.append(range(m_lo, m_hi + 1))
    return [DyadicCube(n, tau, level, m) for m in product(*ranges)]


def dyadic_cube_family(domain: DyadicDomain, tau: tuple[Fraction, ...] | None = None
                       ) -> list[DyadicCube]:
    """All cubes of one translated grid meeting the domain, levels 0..k."""
    if tau is None:
        tau = tuple([Fraction(0)] * domain.n)
    out: list[DyadicCube] = []
    for level in range(domain.level + 1):
        out.extend(cubes_covering_domain(domain.n, tau, level))
    return out


def _scaled_corners(n: int, tau: tuple[Fraction, ...], level: int) -> np.ndarray:
    """Lower corners of the covering cubes times 3*2^level (all integers,
    since tau has denominator 1 or 3); one row per cube."""
    sign = -1 if level % 2 else 1
    k3 = np.array([int(3 * t) for t in tau], dtype=np.int64)
    ranges = []
    for t in tau:
        off = sign * t
        m_lo = floor(-off - 1) + 1
        m_hi = ceil((1 << level) - off) - 1
        ranges.append(np.arange(m_lo, m_hi + 1, dtype=np.int64))
    grids = np.meshgrid(*ranges, indexing="ij")
    M = np.stack([g.ravel() for g in grids], axis=1)
    return 3 * M + sign * k3


def verify_tiling(n: int, tau: tuple[Fraction, ...], level: int) -> bool:
    """Exact check that the grid's clipped cubes partition the unit cube.

    Cubes of one grid at one level are integer lattice translates of each
    other, so distinct coordinates imply disjointness; the partition then
    reduces to the identity sum(clipped volumes) == 1, evaluated in integer
    arithmetic after scaling every endpoint by 3*2^level.
    """
    corners = _scaled_corners(n, tau, level)
    scale = 3 << level
    seg = np.minimum(corners + 3, scale) - np.maximum(corners, 0)
    seg = np.maximum(seg, 0)
    total = int(np.prod(seg, axis=1, dtype=np.int64).sum(dtype=np.int64))
    if total != scale ** n:
        return False
    # stride cross-check: the rational API must agree with the integer path
    cubes = cubes_covering_domain(n, tau, level)
    vols = np.prod(seg, axis=1, dtype=np.int64)
    for i in range(0, len(cubes), 31):
        if cubes[i].clip_volume() != Fraction(int(vols[i]), scale ** n):
            return False
    return len({c.coords for c in cubes}) == len(cubes)


def verify_nesting(n: int, tau: tuple[Fraction, ...], level: int) -> bool:
    """Exact check that each cube at 1..level sits inside one parent cube.

    In units of 1/(3*2^j) a cube occupies [a, a+3) per axis and parents
    occupy width-6 blocks anchored at 2*(3m + sign*3tau); nesting is the
    statement that a minus the parent anchor offset is 0 or 3 mod 6.
    """
    k3 = np.array([int(3 * t) for t in tau], dtype=np.int64)
    for j in range(1, level + 1):
        corners = _scaled_corners(n, tau, j)
        parent_sign = -1 if (j - 1) % 2 else 1
        rem = (corners - 2 * parent_sign * k3) % 6
        if not bool(np.all((rem == 0) | (rem == 3))):
            return False
        # stride cross-check through the cube objects themselves
        cubes = cubes_covering_domain(n, tau, j)
        for cube in cubes[::31]:
            lo, hi = cube.box()
            if not parent_cube(cube).contains_box(lo, hi):
                return False
    return True

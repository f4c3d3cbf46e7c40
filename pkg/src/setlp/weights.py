"""Matrix weight characteristics, averaged norms, and reverse factorization.

The matrix characteristic of an SPD field W over a cube family is

    sup_Q ( avg_x ( avg_y ||W(x) W(y)^-1||_op^p' )^(p/p') )^(1/p),

with the p=1 variant  sup_Q max_x avg_y ||W(x)^-1 W(y)||_op.  Scalar
one-dimensional fields reduce to the classical weight constants (the
p-th root of the classical A_p product for the same cubes), which the
module also computes directly as an independent oracle.

Reverse factorization combines two SPD fields cellwise through the
weighted geometric mean of their squares; the induced norm is expected
to carry the interpolated exponent 1/p = (1-t)/p0 + t/p1.  A variant
convention replacing the second term by 1/p1 is kept behind a flag for
comparison and is rejected when it produces an exponent below 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import NormField, SetField, lp_norm, random_simple_field
from .grids import DyadicCube, DyadicDomain, dyadic_cube_family
from .matrices import MatrixField, SpdMatrix, geometric_mean, operator_norms
from .operators import _cell_overlaps, aligned_cells, frac_average
from .seminorms import DegenerateSeminormError, DualNorm, Seminorm, direction_grid


@dataclass(frozen=True)
class ApReport:
    """Characteristic of one weight field over one cube family."""

    p: float
    constant: float
    per_cube: tuple
    grid_level: int
    family: str
    fixture: str | None = None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "constant": self.constant,
            "grid_level": self.grid_level,
            "family": self.family,
            "fixture": self.fixture,
            "per_cube": [[key, value] for key, value in self.per_cube],
        }

    def csv_row(self) -> str:
        return f"{self.fixture or ''},{self.p!r},{self.grid_level},{self.constant!r}"


def _pairwise_opnorms(left: np.ndarray, right: np.ndarray, chunk: int) -> np.ndarray:
    """P[x, y] = operator norm of left[x] @ right[y], chunked over x."""
    count, d = left.shape[0], left.shape[-1]
    P = np.empty((count, count))
    for start in range(0, count, chunk):
        block = np.einsum("xij,yjk->xyik", left[start:start + chunk], right)
        P[start:start + chunk] = operator_norms(block.reshape(-1, d, d)).reshape(
            block.shape[0], count)
    return P


def _family(domain: DyadicDomain, cubes) -> list[DyadicCube]:
    return dyadic_cube_family(domain) if cubes is None else list(cubes)


def ap_matrix_constant(W: MatrixField, p: float, cubes=None, *,
                       fixture: str | None = None, chunk: int = 128) -> ApReport:
    """Matrix weight characteristic for p > 1 over an aligned cube family."""
    p = float(p)
    if not (math.isfinite(p) and p > 1.0):
        raise ValueError(f"p must be finite and > 1, got {p}")
    pprime = p / (p - 1.0)
    domain = W.domain
    cubes = _family(domain, cubes)
    stack = W.stack()
    inverse = np.linalg.inv(stack)
    powers = _pairwise_opnorms(stack, inverse, chunk) ** pprime
    per = []
    for cube in cubes:
        idx = aligned_cells(domain, cube)
        block = powers[np.ix_(idx, idx)]
        inner = block.mean(axis=1) ** (p / pprime)
        per.append((cube.key(), float(inner.mean() ** (1.0 / p))))
    constant = max(v for _, v in per)
    return ApReport(p=p, constant=constant, per_cube=tuple(per),
                    grid_level=domain.level,
                    family=f"aligned dyadic cubes, {len(cubes)} total",
                    fixture=fixture)


def a1_matrix_constant(W: MatrixField, cubes=None, *,
                       fixture: str | None = None, chunk: int = 128) -> ApReport:
    """p = 1 matrix weight characteristic: per-cube max of row averages."""
    domain = W.domain
    cubes = _family(domain, cubes)
    stack = W.stack()
    inverse = np.linalg.inv(stack)
    norms = _pairwise_opnorms(inverse, stack, chunk)
    per = []
    for cube in cubes:
        idx = aligned_cells(domain, cube)
        block = norms[np.ix_(idx, idx)]
        per.append((cube.key(), float(block.mean(axis=1).max())))
    constant = max(v for _, v in per)
    return ApReport(p=1.0, constant=constant, per_cube=tuple(per),
                    grid_level=domain.level,
                    family=f"aligned dyadic cubes, {len(cubes)} total",
                    fixture=fixture)


class AveragedNorm(Seminorm):
    """Weighted p-power mean of finitely many norms (p = inf takes a max).

    A power mean of norms with p >= 1 obeys the triangle inequality, so
    the generic grid dual applies to it directly.
    """

    is_norm = True

    def __init__(self, members, weights, p: float):
        members = tuple(members)
        if not members:
            raise ValueError("averaged norm needs at least one member")
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(members),) or (weights <= 0.0).any():
            raise ValueError("weights must be positive, one per member")
        total = weights.sum()
        if not np.isclose(total, 1.0, rtol=0.0, atol=1e-12):
            weights = weights / total
        if p != math.inf and not p >= 1.0:
            raise ValueError(f"power mean exponent must be >= 1 or inf, got {p}")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ValueError("member norms must share one dimension")
        self.members = members
        self.weights = weights
        self.p = float(p)
        self.dim = members[0].dim

    def values(self, V):
        V = np.asarray(V, dtype=float)
        single = V.ndim == 1
        if single:
            V = V[None, :]
        stack = np.stack([m.values(V) for m in self.members])
        if self.p == math.inf:
            out = stack.max(axis=0)
        else:
            out = ((self.weights[:, None] * stack ** self.p).sum(axis=0)) ** (1.0 / self.p)
        return out[0] if single else out

    def __repr__(self):
        return f"AveragedNorm(dim={self.dim}, members={len(self.members)}, p={self.p})"


def averaged_norm_for_cube(rho: NormField, p: float, cube: DyadicCube) -> AveragedNorm:
    """Power mean of the per-cell norms over one cube, overlap-weighted."""
    members, weights = [], []
    for idx, w in _cell_overlaps(rho.domain, cube):
        members.append(rho.norms[idx])
        weights.append(float(w))
    if not members:
        raise ValueError("cube does not meet the norm field domain")
    return AveragedNorm(members, weights, p)


def rho_average(rho: NormField, p: float, cube: DyadicCube, v) -> float:
    """Cube average of x -> rho_x(v)^p, to the 1/p power."""
    return float(averaged_norm_for_cube(rho, p, cube).value(v))


@dataclass(frozen=True)
class ApNormReport:
    """Measured norm-function characteristic against a pass threshold."""

    p: float
    constant: float
    threshold: float
    passed: bool
    per_cube: tuple
    grid_level: int

    def to_dict(self) -> dict:
        return {
            "p": self.p, "constant": self.constant, "threshold": self.threshold,
            "passed": self.passed, "grid_level": self.grid_level,
            "per_cube": [[key, value] for key, value in self.per_cube],
        }


def ap_norm_check(rho: NormField, p: float, cubes=None, *,
                  directions: int | None = None,
                  threshold: float | None = None) -> ApNormReport:
    """Measure sup over cubes and directions of the dual-average ratio.

    For each cube the p'-power mean of the cellwise dual norms is
    compared against the dual of the p-power mean of the norms, the
    latter through the generic direction-grid dual.  The measured
    supremum is a finiteness certificate, not a sharp constant; the
    threshold (default 10 * dim) only decides the verdict flag.
    """
    p = float(p)
    if not (math.isfinite(p) and p >= 1.0):
        raise ValueError(f"p must be finite and >= 1, got {p}")
    pprime = math.inf if p == 1.0 else p / (p - 1.0)
    dim = rho.dim
    if threshold is None:
        threshold = 10.0 * dim
    cubes = _family(rho.domain, cubes)
    V = direction_grid(dim, directions)
    duals = [nm.dual() for nm in rho.norms]
    per = []
    for cube in cubes:
        avg = averaged_norm_for_cube(rho, p, cube)
        weights = avg.weights
        dual_members = [duals[idx] for idx, _ in _cell_overlaps(rho.domain, cube)]
        dual_avg = AveragedNorm(dual_members, weights, pprime)
        try:
            denom = DualNorm(avg, directions=directions).values(V)
        except DegenerateSeminormError as exc:
            raise DegenerateSeminormError(
                f"averaged norm on cube {cube.key()} is degenerate") from exc
        ratio = dual_avg.values(V) / denom
        per.append((cube.key(), float(ratio.max())))
    constant = max(v for _, v in per)
    return ApNormReport(p=p, constant=constant, threshold=float(threshold),
                        passed=constant <= threshold, per_cube=tuple(per),
                        grid_level=rho.domain.level)


def interpolated_exponent(p0: float, p1: float, t: float,
                          convention: str = "riesz_thorin") -> float:
    """Exponent produced by mixing p0 and p1 with weight t.

    "riesz_thorin": 1/p = (1-t)/p0 + t/p1.  "printed": 1/p = (1-t)/p0
    + 1/p1, kept for comparison; it can fall below 1 and is then
    rejected.
    """
    for name, v in (("p0", p0), ("p1", p1)):
        if not (math.isfinite(v) and v >= 1.0):
            raise ValueError(f"{name} must be finite and >= 1, got {v}")
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie strictly in (0, 1), got {t}")
    if convention == "riesz_thorin":
        r = (1.0 - t) / p0 + t / p1
    elif convention == "printed":
        r = (1.0 - t) / p0 + 1.0 / p1
    else:
        raise ValueError(f"unknown exponent convention {convention!r}")
    p = 1.0 / r
    if p < 1.0 - 1e-12:
        raise ValueError(
            f"convention {convention!r} gives exponent {p:.6g} below 1 "
            f"for p0={p0}, p1={p1}, t={t}"
        )
    return max(p, 1.0)


def reverse_factorization(W0: MatrixField, W1: MatrixField, t: float,
                          p0: float, p1: float, *,
                          convention: str = "riesz_thorin") -> MatrixField:
    """Cellwise square root of the weighted geometric mean of squares.

    p0 and p1 are the exponent classes of the inputs; they fix the
    target exponent via interpolated_exponent but do not enter the
    matrix construction.  Cells with bitwise-equal inputs are passed
    through unchanged (the mean of a matrix with itself is itself), so
    identical fixtures keep identical characteristics.
    """
    if W0.domain != W1.domain:
        raise ValueError("weight fields live on different grids")
    if W0.dim != W1.dim:
        raise ValueError("weight fields have different matrix dimensions")
    interpolated_exponent(p0, p1, t, convention)
    cells = []
    for a, b in zip(W0.cells, W1.cells):
        if np.array_equal(a.arr, b.arr):
            cells.append(a)
        else:
            cells.append(geometric_mean(a.power(2.0), b.power(2.0), t).power(0.5))
    return MatrixField(W0.domain, cells)


FIXTURE_CONDITION_CAP = 1e6


def _profile(centers: np.ndarray, amplitude: float, frequency: float,
             phase: float) -> np.ndarray:
    """Smooth bounded profile on the domain, averaged over axes."""
    n = centers.shape[1]
    acc = np.zeros(len(centers))
    for axis in range(n):
        acc += np.sin(2.0 * math.pi * frequency * centers[:, axis] + phase + axis)
    return amplitude * acc / n


def fixture_weights(kind: str, params: dict | None, grid: DyadicDomain) -> MatrixField:
    """Deterministic SPD weight fields for the verification suites.

    Every kind evaluates a fixed function of position at the cell
    centers, so refining the grid refines the same underlying weight;
    the random kind draws its function coefficients from the seed once,
    independent of the grid level.
    """
    params = dict(params or {})
    centers = grid.cell_centers()
    if kind == "identity":
        d = int(params.pop("dim", 2))
        cells = [SpdMatrix(np.eye(d))] * grid.num_cells
    elif kind == "constant":
        entries = params.pop("matrix", None)
        if entries is None:
            raise ValueError("constant fixture needs a 'matrix' parameter")
        cell = SpdMatrix(np.asarray(entries, dtype=float))
        cells = [cell] * grid.num_cells
    elif kind == "scalar_two_valued":
        low = float(params.pop("low", 1.0))
        high = float(params.pop("high", 4.0))
        if low <= 0.0 or high <= 0.0:
            raise ValueError("two-valued fixture needs positive values")
        cells = [SpdMatrix([[low if x[0] < 0.5 else high]]) for x in centers]
    elif kind == "scalar_profile":
        amplitude = float(params.pop("amplitude", 0.8))
        frequency = float(params.pop("frequency", 1.0))
        phase = float(params.pop("phase", 0.0))
        values = np.exp(_profile(centers, amplitude, frequency, phase))
        cells = [SpdMatrix([[v]]) for v in values]
    elif kind == "rotated_diag":
        theta0 = float(params.pop("theta0", 0.3))
        theta1 = float(params.pop("theta1", 2.0))
        spread = float(params.pop("spread", 1.0))
        frequency = float(params.pop("frequency", 1.0))
        angles = theta0 + theta1 * centers[:, 0]
        if centers.shape[1] > 1:
            angles = angles + 0.7 * theta1 * centers[:, 1]
        logs = _profile(centers, spread, frequency, 0.25)
        cells = []
        for ang, lg in zip(angles, logs):
            c, s = math.cos(ang), math.sin(ang)
            R = np.array([[c, -s], [s, c]])
            cells.append(SpdMatrix(R @ np.diag([math.exp(lg), math.exp(-lg)]) @ R.T))
    elif kind == "random_spd":
        seed = int(params.pop("seed", 0))
        d = int(params.pop("dim", 2))
        spread = float(params.pop("spread", 0.7))
        waves = int(params.pop("waves", 3))
        if d not in (1, 2):
            raise ValueError("random fixture fields support dim 1 or 2")
        rng = np.random.default_rng([982451653, seed])
        coeff = rng.normal(0.0, spread / waves, (3, waves, 2))
        n = centers.shape[1]

        def series(row, shift):
            acc = np.zeros(len(centers))
            for j in range(waves):
                for axis in range(n):
                    arg = 2.0 * math.pi * (j + 1) * centers[:, axis] + shift * (axis + 1)
                    acc += coeff[row, j, 0] * np.cos(arg) + coeff[row, j, 1] * np.sin(arg)
            return acc

        logs = series(0, 0.0)
        cells = []
        if d == 1:
            cells = [SpdMatrix([[math.exp(v)]]) for v in logs]
        else:
            angles = series(1, 0.5) * math.pi
            logs2 = series(2, 1.0)
            for ang, l1, l2 in zip(angles, logs, logs2):
                c, s = math.cos(ang), math.sin(ang)
                R = np.array([[c, -s], [s, c]])
                cells.append(SpdMatrix(R @ np.diag([math.exp(l1), math.exp(l2)]) @ R.T))
    else:
        raise ValueError(f"unknown fixture kind {kind!r}")
    if params:
        raise ValueError(f"unused fixture parameters: {sorted(params)}")
    worst = max(c.eigenvalues[-1] / c.eigenvalues[0] for c in cells)
    if worst > FIXTURE_CONDITION_CAP:
        raise ValueError(
            f"fixture condition {worst:.3e} exceeds the cap {FIXTURE_CONDITION_CAP:.0e}"
        )
    return MatrixField(grid, cells)


def classical_ap_constant(weight_values, domain: DyadicDomain, p: float,
                          cubes=None) -> float:
    """Classical scalar weight constant over the same cube family.

    sup_Q (avg w) * (avg w^(1/(1-p)))^(p-1), computed directly from the
    cell values as an oracle for the one-dimensional matrix reduction.
    """
    p = float(p)
    if not (math.isfinite(p) and p > 1.0):
        raise ValueError(f"p must be finite and > 1, got {p}")
    w = np.asarray(weight_values, dtype=float)
    if (w <= 0.0).any():
        raise ValueError("weights must be positive")
    best = 0.0
    for cube in _family(domain, cubes):
        idx = aligned_cells(domain, cube)
        part = w[idx]
        best = max(best, part.mean() * (part ** (1.0 / (1.0 - p))).mean() ** (p - 1.0))
    return best


def classical_a1_constant(weight_values, domain: DyadicDomain, cubes=None) -> float:
    """Classical scalar constant at p = 1: sup_Q (avg w) / (min w)."""
    w = np.asarray(weight_values, dtype=float)
    if (w <= 0.0).any():
        raise ValueError("weights must be positive")
    best = 0.0
    for cube in _family(domain, cubes):
        idx = aligned_cells(domain, cube)
        part = w[idx]
        best = max(best, part.mean() / part.min())
    return best


@dataclass(frozen=True)
class AveragingBoundScan:
    """Measured averaging-operator ratios over random trial fields."""

    p: float
    ratios: tuple
    max_ratio: float

    def to_dict(self) -> dict:
        return {"p": self.p, "max_ratio": self.max_ratio, "ratios": list(self.ratios)}


def operator_bound_scan(rho: NormField, p: float, *, trials: int = 50,
                        seed: int = 0, cubes=None,
                        generators_per_cell: int = 3) -> AveragingBoundScan:
    """Per-trial sup over cubes of the weighted averaging-operator ratio.

    For each random field F and cube Q this measures the norm of the
    cube average (supported on Q) against the norm of F, both in the
    rho-weighted p-space.  Finiteness of the sup is the operational
    content of the averaging characterization.
    """
    p = float(p)
    if not (math.isfinite(p) and p >= 1.0):
        raise ValueError(f"p must be finite and >= 1, got {p}")
    domain = rho.domain
    cubes = _family(domain, cubes)
    cube_cells = [aligned_cells(domain, cube) for cube in cubes]
    vol = domain.cell_volume
    ratios = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        field = random_simple_field(rng, domain, rho.dim,
                                    generators_per_cell=generators_per_cell)
        base = lp_norm(field, p, rho)
        if base == 0.0:
            ratios.append(0.0)
            continue
        worst = 0.0
        for cube, idx in zip(cubes, cube_cells):
            avg = frac_average(field, cube, 0.0)
            vals = [rho.norms[i].of_body(avg) for i in idx]
            out = math.fsum(v ** p * vol for v in vals) ** (1.0 / p)
            worst = max(worst, out / base)
        ratios.append(float(worst))
    return AveragingBoundScan(p=p, ratios=tuple(ratios), max_ratio=max(ratios))

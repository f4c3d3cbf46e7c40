import math
from fractions import Fraction

import numpy as np
import pytest

from setlp.bodies import ConvexBody, magnitude, origin_body, support_batch
from setlp.fields import SetField, random_simple_field
from setlp.grids import DyadicCube, DyadicDomain, cubes_covering_domain
from setlp.operators import (
    ExponentConfig,
    aligned_cells,
    cube_integral_tree,
    dyadic_frac_maximal,
    frac_average,
    full_maximal_envelope,
    scalar_frac_maximal,
    sublinearity_check,
)
from setlp.seminorms import direction_grid

THIRD = Fraction(1, 3)
DIRS2 = direction_grid(2, 64)


def interval_field(domain, radii):
    return SetField(domain, [ConvexBody(1, [[r]]) for r in radii])


def root_cube(n):
    return DyadicCube(n, tuple([Fraction(0)] * n), 0, tuple([0] * n))


def test_average_of_constant_field_is_the_constant():
    domain = DyadicDomain(1, 3)
    F = interval_field(domain, [0.7] * 8)
    avg = frac_average(F, root_cube(1), 0.0)
    assert magnitude(avg) == pytest.approx(0.7, rel=1e-14)


def test_fractional_average_scales_with_volume():
    # alpha > 0 multiplies the plain average by |Q|^alpha
    domain = DyadicDomain(1, 3)
    F = interval_field(domain, [1.0] * 8)
    cube = DyadicCube(1, (Fraction(0),), 2, (1,))
    for alpha in (0.0, 0.25, 0.5):
        avg = frac_average(F, cube, alpha)
        assert magnitude(avg) == pytest.approx(0.25 ** alpha, rel=1e-13)


def test_average_validation():
    domain = DyadicDomain(1, 2)
    F = interval_field(domain, [1.0] * 4)
    deep = DyadicCube(1, (Fraction(0),), 5, (0,))
    with pytest.raises(ValueError, match="finer than the data grid"):
        frac_average(F, deep, 0.0)
    with pytest.raises(ValueError):
        frac_average(F, root_cube(1), 1.0)
    with pytest.raises(ValueError):
        frac_average(F, root_cube(2), 0.0)


def test_aligned_cells_cover_cube():
    domain = DyadicDomain(2, 3)
    cube = DyadicCube(2, (Fraction(0), Fraction(0)), 1, (1, 0))
    cells = aligned_cells(domain, cube)
    assert len(cells) == 16
    for idx in cells:
        lo, hi = domain.cell_box(idx)
        assert cube.contains_box(lo, hi)


def test_integral_tree_matches_direct_averages():
    rng = np.random.default_rng(23)
    domain = DyadicDomain(1, 4)
    F = random_simple_field(rng, domain, 2)
    levels, integrals = cube_integral_tree(F)
    for j, cubes in enumerate(levels):
        for coords, cube in cubes.items():
            direct = frac_average(F, cube, 0.0)
            from_tree = integrals[j][coords]
            vol = float(cube.clip_volume())
            want = support_batch(direct, DIRS2) * vol
            assert np.abs(support_batch(from_tree, DIRS2) - want).max() < 1e-10


def test_maximal_dominates_own_cell_average():
    rng = np.random.default_rng(24)
    for n in (1, 2):
        domain = DyadicDomain(n, 3)
        F = random_simple_field(rng, domain, 2)
        alpha = 0.25
        MF = dyadic_frac_maximal(F, alpha)
        for idx in range(domain.num_cells):
            lo, hi = domain.cell_box(idx)
            cell_cube = DyadicCube(n, tuple([Fraction(0)] * n), domain.level,
                                   domain.cell_coords(idx))
            avg = frac_average(F, cell_cube, alpha)
            gap = support_batch(MF.cells[idx], DIRS2) - support_batch(avg, DIRS2)
            assert gap.min() > -1e-10


def test_spike_maximal_hand_oracle():
    # one hot cell; along the ancestor chain the average decays by the
    # volume factor 2^(j-k) scaled by 2^(-j(alpha-1)) at each level j
    domain = DyadicDomain(1, 3)
    radii = [0.0] * 8
    radii[0] = 1.0
    F = interval_field(domain, radii)
    alpha = 0.5
    MF = dyadic_frac_maximal(F, alpha)
    k = 3
    for idx in range(8):
        # smallest dyadic cube containing cell idx and cell 0 has level
        # j = k - ceil(log2(idx+1)) unless idx = 0
        j = k if idx == 0 else k - (idx).bit_length()
        side = 2.0 ** (-j)
        want = side ** (alpha - 1.0) * (2.0 ** -k) * 1.0
        assert magnitude(MF.cells[idx]) == pytest.approx(want, rel=1e-12)


def test_set_pipeline_matches_scalar_oracle():
    rng = np.random.default_rng(25)
    for n in (1, 2):
        domain = DyadicDomain(n, 3)
        radii = rng.uniform(0.0, 2.0, domain.num_cells)
        F = interval_field(domain, radii)
        for alpha in (0.0, 0.3):
            MF = dyadic_frac_maximal(F, alpha)
            smax = scalar_frac_maximal(radii, domain, alpha)
            got = np.array([magnitude(c) for c in MF.cells])
            assert np.abs(got - smax).max() < 1e-12


def test_translated_grid_scalar_oracle():
    rng = np.random.default_rng(26)
    domain = DyadicDomain(1, 3)
    radii = rng.uniform(0.1, 1.0, 8)
    F = interval_field(domain, radii)
    tau = (THIRD,)
    MF = dyadic_frac_maximal(F, 0.25, tau)
    smax = scalar_frac_maximal(radii, domain, 0.25, tau)
    got = np.array([magnitude(c) for c in MF.cells])
    assert np.abs(got - smax).max() < 1e-12


def test_translated_average_uses_clipped_volume():
    # the boundary cube of a shifted grid is normalized by its clipped
    # volume, so a constant field still averages to the constant at alpha 0
    domain = DyadicDomain(1, 2)
    F = interval_field(domain, [1.0] * 4)
    cube = cubes_covering_domain(1, (THIRD,), 1)[0]
    assert cube.clip_volume() < Fraction(1, 2)
    avg = frac_average(F, cube, 0.0)
    assert magnitude(avg) == pytest.approx(1.0, rel=1e-13)


def test_envelope_dominates_every_grid():
    rng = np.random.default_rng(27)
    domain = DyadicDomain(1, 3)
    F = random_simple_field(rng, domain, 2)
    env = full_maximal_envelope(F, 0.25)
    for tau in ((Fraction(0),), (THIRD,), (-THIRD,)):
        MF = dyadic_frac_maximal(F, 0.25, tau)
        for e, m in zip(env.cells, MF.cells):
            gap = support_batch(e, DIRS2) - support_batch(m, DIRS2)
            assert gap.min() > -1e-10


def test_cells_touching_one_third_see_only_origin():
    # no cube of the +1/3 grid fully contains a cell whose closure meets
    # x = 1/3, at any level, so the translated maximal there is {0}
    domain = DyadicDomain(1, 3)
    F = interval_field(domain, [1.0] * 8)
    MF = dyadic_frac_maximal(F, 0.0, (THIRD,))
    straddler = 2  # cell [1/4, 3/8) contains 1/3
    assert magnitude(MF.cells[straddler]) == 0.0
    assert magnitude(MF.cells[0]) > 0.0


def test_sublinearity_check_on_random_pair():
    rng = np.random.default_rng(28)
    domain = DyadicDomain(1, 3)
    A = random_simple_field(rng, domain, 2)
    B = random_simple_field(rng, domain, 2)
    rep = sublinearity_check(A, B, 0.5)
    assert rep.passed()
    assert rep.containment_excess < 1e-9
    assert rep.averaging_gap < 1e-9


def test_exponent_config_midpoint_constant():
    cfg = ExponentConfig.for_fractional_maximal(0.5, 0.5)
    assert cfg.p == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert cfg.q == pytest.approx(4.0, rel=1e-14)
    # 2 * (q / |q - q1|)^(1/q) with the infinite-endpoint term dropping out
    assert cfg.interpolation_constant == pytest.approx(2.0 * 2.0 ** 0.25, rel=1e-12)


def test_exponent_config_validation():
    with pytest.raises(ValueError):
        ExponentConfig(p0=2.0, q0=2.0, p1=1.0, q1=2.0, t=0.5)  # q0 == q1
    with pytest.raises(ValueError):
        ExponentConfig(p0=2.0, q0=4.0, p1=1.0, q1=2.0, t=1.0)  # t at endpoint
    with pytest.raises(ValueError):
        ExponentConfig(p0=2.0, q0=4.0, p1=1.0, q1=2.0, t=0.5, p=3.0)  # wrong p
    cfg = ExponentConfig(p0=2.0, q0=math.inf, p1=1.0, q1=2.0, t=0.5)
    assert cfg.to_dict()["q0"] == "inf"
    assert 0.0 < cfg.alpha < 1.0


def test_scalar_maximal_rejects_bad_input():
    domain = DyadicDomain(1, 2)
    with pytest.raises(ValueError):
        scalar_frac_maximal(np.array([1.0, -0.5, 0.2, 0.3]), domain, 0.0)
    with pytest.raises(ValueError):
        scalar_frac_maximal(np.ones(3), domain, 0.0)

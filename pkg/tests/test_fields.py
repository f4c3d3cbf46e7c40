import math
from fractions import Fraction

import numpy as np
import pytest

from setlp.bodies import ConvexBody, magnitude, support_batch
from setlp.fields import (
    NormField,
    SetField,
    aumann_integral,
    distribution,
    dp_distance,
    lp_norm,
    magnitude_bound_check,
    random_simple_field,
    weak_norm,
)
from setlp.grids import DyadicDomain
from setlp.matrices import MatrixField, random_spd_matrix
from setlp.seminorms import direction_grid


def interval_field(domain, radii):
    return SetField(domain, [ConvexBody(1, [[r]]) for r in radii])


def test_field_validates_cell_count():
    domain = DyadicDomain(1, 2)
    with pytest.raises(ValueError):
        SetField(domain, [ConvexBody(1, [[1.0]])] * 3)


def test_integral_of_constant_interval_field():
    domain = DyadicDomain(1, 3)
    F = interval_field(domain, [0.5] * domain.num_cells)
    total = aumann_integral(F)
    assert magnitude(total) == pytest.approx(0.5, abs=1e-15)
    half = aumann_integral(F, range(4))  # half the cells, half the mass
    assert magnitude(half) == pytest.approx(0.25, abs=1e-15)


def test_integral_magnitude_bound():
    rng = np.random.default_rng(14)
    for n in (1, 2):
        domain = DyadicDomain(n, 3)
        for d in (1, 2):
            F = random_simple_field(rng, domain, d)
            lhs, rhs = magnitude_bound_check(F)
            assert lhs <= rhs + 1e-9


def test_lp_norm_of_constant_field():
    domain = DyadicDomain(2, 2)
    F = SetField(domain, [ConvexBody(2, [[0.6, 0.8]])] * domain.num_cells)
    for p in (1.0, 2.0, 4.0):
        assert lp_norm(F, p) == pytest.approx(1.0, rel=1e-14)
    assert lp_norm(F, math.inf) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        lp_norm(F, 0.0)


def test_lp_monotone_in_p_on_probability_space():
    rng = np.random.default_rng(15)
    F = random_simple_field(rng, DyadicDomain(1, 4), 2)
    vals = [lp_norm(F, p) for p in (1.0, 2.0, 4.0, math.inf)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_layer_cake_identity():
    rng = np.random.default_rng(16)
    F = random_simple_field(rng, DyadicDomain(1, 4), 2)
    table = distribution(F)
    for p in (1.0, 2.0, 4.0):
        want = lp_norm(F, p) ** p
        assert table.layer_cake(p) == pytest.approx(want, rel=1e-12)


def test_weak_norm_below_strong():
    rng = np.random.default_rng(17)
    for _ in range(5):
        F = random_simple_field(rng, DyadicDomain(1, 4), 2)
        for p in (1.0, 2.0, 3.0):
            assert weak_norm(F, p) <= lp_norm(F, p) + 1e-12


def test_distribution_tail_measures():
    domain = DyadicDomain(1, 2)
    F = interval_field(domain, [1.0, 2.0, 3.0, 4.0])
    table = distribution(F)
    # closed tails: measure of {value >= lam}, the jump-point limits that
    # realize the weak-norm supremum
    assert table.tail_measure(0.5) == 1
    assert table.tail_measure(2.0) == Fraction(3, 4)
    assert table.tail_measure(2.5) == Fraction(1, 2)
    assert table.tail_measure(4.5) == 0
    assert weak_norm(F, 1.0) == pytest.approx(max(1.0, 2 * 0.75, 3 * 0.5, 4 * 0.25))


def test_dp_distance_metric_properties():
    rng = np.random.default_rng(18)
    domain = DyadicDomain(1, 3)
    A = random_simple_field(rng, domain, 2)
    B = random_simple_field(rng, domain, 2)
    C = random_simple_field(rng, domain, 2)
    for p in (1.0, 2.0):
        ab, bc, ac = (dp_distance(x, y, p) for x, y in ((A, B), (B, C), (A, C)))
        assert ac <= ab + bc + 1e-10
        assert dp_distance(A, A, p) == 0.0


def test_random_field_deterministic():
    domain = DyadicDomain(1, 3)
    F = random_simple_field(np.random.default_rng(9), domain, 2)
    G = random_simple_field(np.random.default_rng(9), domain, 2)
    U = direction_grid(2, 32)
    for a, b in zip(F.cells, G.cells):
        assert np.array_equal(support_batch(a, U), support_batch(b, U))


def test_norm_field_roundtrips():
    domain = DyadicDomain(1, 2)
    rng = np.random.default_rng(10)
    eu = NormField.euclidean(domain, 2)
    assert NormField.from_dict(eu.to_dict()).kind == "euclidean"
    mf = MatrixField(domain, [random_spd_matrix(rng, 2) for _ in range(domain.num_cells)])
    nf = NormField.from_matrix_field(mf)
    back = NormField.from_dict(nf.to_dict())
    V = rng.standard_normal((20, 2))
    for a, b in zip(nf.norms, back.norms):
        assert np.array_equal(a.values(V), b.values(V))


def test_weighted_lp_norm_uses_cell_norms():
    domain = DyadicDomain(1, 1)
    rng = np.random.default_rng(11)
    mf = MatrixField(domain, [random_spd_matrix(rng, 2) for _ in range(2)])
    rho = NormField.from_matrix_field(mf)
    F = SetField(domain, [ConvexBody(2, [[1.0, 0.0]]), ConvexBody(2, [[0.0, 1.0]])])
    vals = [np.linalg.norm(mf.cells[i].arr @ F.cells[i].generators[0]) for i in range(2)]
    want = math.sqrt(0.5 * vals[0] ** 2 + 0.5 * vals[1] ** 2)
    assert lp_norm(F, 2.0, rho) == pytest.approx(want, rel=1e-12)

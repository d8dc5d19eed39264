import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimox.numerics import AntennaConfig
from mimox.region import (
    DofPolytope,
    DofTuple,
    UnboundedError,
    check_zfx_bound,
    cognitive_polytope,
    contains,
    enumerate_vertices,
    eta_mbi,
    eta_out_closed_form,
    integer_innerbound_max,
    max_weighted_sum,
    mmk_assignment,
    normalize_scale,
    outerbound_polytope,
)

# Frozen with independent oracles: a floating-point LP solver (HiGHS) for the
# sum-DoF maximum and a stdlib brute-force search for the integer maximum.
FROZEN = {
    (1, 1, 1, 1): (Q(4, 3), 1),
    (1, 1, 2, 2): (Q(2), 2),
    (4, 8, 6, 10): (Q(11), 11),
    (3, 3, 3, 3): (Q(4), 4),
    (2, 2, 2, 2): (Q(8, 3), 2),
    (4, 4, 4, 4): (Q(16, 3), 5),
    (5, 5, 5, 5): (Q(20, 3), 6),
    (1, 2, 3, 4): (Q(3), 3),
    (2, 3, 1, 4): (Q(13, 3), 4),
    (7, 2, 5, 3): (Q(22, 3), 7),
    (8, 8, 1, 1): (Q(2), 2),
    (2, 5, 5, 2): (Q(17, 3), 5),
    (6, 1, 1, 6): (Q(19, 3), 6),
    (3, 4, 5, 6): (Q(7), 7),
    (5, 3, 3, 5): (Q(6), 6),
    (1, 8, 8, 1): (Q(25, 3), 8),
}

configs = st.tuples(*(st.integers(1, 8),) * 4).map(lambda t: AntennaConfig(*t))


def test_outerbound_rows():
    poly = outerbound_polytope(AntennaConfig(3, 3, 3, 3))
    assert len(poly.inequalities) == 8 and poly.constraint_count() == 12
    assert poly.bounds == (3,) * 8
    poly = outerbound_polytope(AntennaConfig(1, 1, 2, 2))
    assert poly.bounds[:4] == (2, 2, 2, 2)
    assert poly.bounds[4:] == (2, 2, 1, 1)
    poly = outerbound_polytope(AntennaConfig(4, 8, 6, 10))
    assert dict(zip(poly.coefficient_rows, poly.bounds))[(1, 1, 0, 1)] == 8


def test_contains():
    poly = outerbound_polytope(AntennaConfig(3, 3, 3, 3))
    assert contains(poly, DofTuple(1, 1, 1, 1))
    assert not contains(poly, DofTuple(2, 1, 1, 1))
    assert contains(poly, (0, 0, 0, 0))


@pytest.mark.parametrize("counts,expected", sorted(FROZEN.items()))
def test_frozen_sum_dof(counts, expected):
    lp_value, int_value = expected
    cfg = AntennaConfig(*counts)
    assert eta_out_closed_form(cfg) == lp_value
    assert max_weighted_sum(outerbound_polytope(cfg))[0] == lp_value
    assert integer_innerbound_max(cfg)[0] == int_value


def test_four_thirds_vertex_single_antenna():
    value, vertex = max_weighted_sum(outerbound_polytope(AntennaConfig(1, 1, 1, 1)))
    assert value == Q(4, 3)
    assert vertex.point == DofTuple(Q(1, 3), Q(1, 3), Q(1, 3), Q(1, 3))
    assert len(vertex.active) >= 4


def test_vertices_contain_known_points():
    one = [v.point for v in enumerate_vertices(outerbound_polytope(AntennaConfig(1, 1, 1, 1)))]
    assert DofTuple(Q(1, 3), Q(1, 3), Q(1, 3), Q(1, 3)) in one
    three = [v.point for v in enumerate_vertices(outerbound_polytope(AntennaConfig(3, 3, 3, 3)))]
    assert DofTuple(1, 1, 1, 1) in three


@settings(max_examples=40, deadline=None)
@given(configs)
def test_vertices_are_feasible_and_include_origin(cfg):
    poly = outerbound_polytope(cfg)
    verts = enumerate_vertices(poly)
    assert DofTuple(0, 0, 0, 0) in [v.point for v in verts]
    assert len({v.point for v in verts}) == len(verts)
    for v in verts:
        assert contains(poly, v.point)
        assert len(v.active) >= 4


def test_eta_mbi_examples():
    assert eta_mbi(AntennaConfig(3, 3, 3, 3)) == 3
    assert eta_mbi(AntennaConfig(1, 1, 2, 2)) == 2
    assert eta_mbi(AntennaConfig(4, 8, 6, 10)) == 10


def test_integer_examples():
    assert integer_innerbound_max(AntennaConfig(3, 3, 3, 3)) == (4, DofTuple(1, 1, 1, 1))
    value, arg = integer_innerbound_max(AntennaConfig(4, 4, 4, 4))
    assert value == 5 and arg == DofTuple(2, 1, 1, 1)
    assert integer_innerbound_max(AntennaConfig(1, 1, 1, 1))[0] == 1


@pytest.mark.parametrize("counts", [(3, 3, 3, 3), (4, 8, 6, 10), (1, 1, 2, 2)])
def test_zfx_examples(counts):
    assert check_zfx_bound(AntennaConfig(*counts))


@settings(max_examples=80, deadline=None)
@given(configs)
def test_sandwich_and_zfx(cfg):
    eta = eta_out_closed_form(cfg)
    best, arg = integer_innerbound_max(cfg)
    assert best <= eta
    if eta.denominator == 1:
        assert best == eta
    assert contains(outerbound_polytope(cfg), arg)
    assert check_zfx_bound(cfg)


@settings(max_examples=40, deadline=None)
@given(configs, st.integers(1, 4))
def test_scaling_multiplies_bounds(cfg, kappa):
    base = outerbound_polytope(cfg)
    big = outerbound_polytope(cfg.scaled(kappa))
    assert big.bounds == tuple(kappa * b for b in base.bounds)
    assert big.coefficient_rows == base.coefficient_rows


def test_normalize_scale_examples():
    assert normalize_scale(DofTuple(Q(1, 3), Q(1, 3), Q(1, 3), Q(1, 3))) == (3, DofTuple(1, 1, 1, 1))
    assert normalize_scale(DofTuple(1, 1, 1, 1)) == (1, DofTuple(1, 1, 1, 1))
    assert normalize_scale(DofTuple(Q(3, 2), 0, 0, 0)) == (2, DofTuple(3, 0, 0, 0))


@pytest.mark.parametrize("m", range(1, 13))
def test_mmk_assignment(m):
    d = mmk_assignment(m)
    assert d.total == (4 * m) // 3
    assert contains(outerbound_polytope(AntennaConfig.equal(m)), d)


@pytest.mark.parametrize("m,value", [(1, Q(3, 2)), (2, Q(3)), (4, Q(6))])
def test_cognitive_polytope(m, value):
    poly, best = cognitive_polytope(m)
    assert len(poly.inequalities) == 3
    assert best == value


def test_weighted_sum_and_unbounded():
    poly = outerbound_polytope(AntennaConfig(2, 2, 2, 2))
    value, vertex = max_weighted_sum(poly, (1, 0, 0, 0))
    assert value == 2 and vertex.point[0] == 2
    with pytest.raises(UnboundedError):
        max_weighted_sum(DofPolytope((((1, 1, 0, 0), 1),)))


def test_rational_rejections():
    with pytest.raises(ValueError):
        DofTuple(-1, 0, 0, 0)


def test_live_lp_cross_check():
    optimize = pytest.importorskip("scipy.optimize")
    rng = random.Random(7)
    for _ in range(150):
        cfg = AntennaConfig(*(rng.randint(1, 8) for _ in range(4)))
        poly = outerbound_polytope(cfg)
        res = optimize.linprog([-1.0] * 4, A_ub=[list(c) for c in poly.coefficient_rows], b_ub=list(poly.bounds),
                               bounds=[(0, None)] * 4, method="highs")
        assert res.status == 0
        assert -res.fun == pytest.approx(float(eta_out_closed_form(cfg)), abs=1e-9)

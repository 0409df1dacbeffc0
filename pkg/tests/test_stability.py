from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from dtwall.lattice import ClassVector, LatticeConfig, Window
from dtwall.stability import (Chamber, ChargePath, GaussRational as G, Order, PathError, XiCharge,
                              chamber_classify, charge_eval, check_support, find_walls,
                              is_general, phase_cmp, phase_gap, s_eps_v, support_constant_sq)

F = Fraction
ONE = (F(1),)


def xi(z0, z1, omega=ONE):
    return XiCharge(G(*z0), omega, G(*z1))


def arg(z):
    with mpmath.workdps(40):
        return mpmath.atan2(mpmath.mpf(z.im.numerator) / z.im.denominator,
                            mpmath.mpf(z.re.numerator) / z.re.denominator)


small = st.fractions(min_value=-6, max_value=6, max_denominator=5)
upper = st.tuples(small, small).filter(lambda p: p[1] > 0 or (p[1] == 0 and p[0] < 0)).map(
    lambda p: G(*p))
quadrant = st.tuples(st.fractions(min_value=-6, max_value=F(-1, 5), max_denominator=5),
                     st.fractions(min_value=F(1, 5), max_value=6, max_denominator=5))


def test_phase_examples():
    assert phase_cmp(G(0, 1), G(-1, 0)) == Order.LESS
    assert phase_cmp(G(0, 1), G(0, 5)) == Order.EQUAL
    assert phase_cmp(G(-1, 2), G(-1, 1)) == Order.LESS
    with pytest.raises(ValueError):
        phase_cmp(G(0, 0), G(0, 1))
    with pytest.raises(ValueError):
        phase_cmp(G(1, -1), G(0, 1))
    with pytest.raises(ValueError):
        phase_cmp(G(1, 0), G(0, 1))


@settings(max_examples=300)
@given(upper, upper)
def test_phase_agrees_with_atan2(a, b):
    expected = (arg(a) > arg(b)) - (arg(a) < arg(b))
    assert phase_cmp(a, b) == Order(expected)


@given(upper, upper, upper)
def test_phase_is_total_preorder(a, b, c):
    assert phase_cmp(a, b) == -phase_cmp(b, a)
    if phase_cmp(a, b) <= 0 and phase_cmp(b, c) <= 0:
        assert phase_cmp(a, c) <= 0
    if phase_cmp(a, b) == 0 and phase_cmp(b, c) == 0:
        assert phase_cmp(a, c) == 0


def test_charge_examples():
    Z = xi((-1, 2), (-1, 1), (F(2),))
    assert charge_eval(Z, ClassVector(-3, (0,), 0)) == G(-3, 6)
    assert charge_eval(Z, ClassVector(0, (3,), 0)) == G(0, -6)
    assert charge_eval(Z, ClassVector(0, (0,), 1)) == G(-1, 1)
    assert charge_eval(Z, ClassVector(-4, (2,), 1)) == G(-1, 1)
    with pytest.raises(ValueError):
        charge_eval(Z, ClassVector(0, (0,), 0))


@given(st.tuples(quadrant, quadrant), st.integers(-3, 5), st.integers(0, 3), st.integers(0, 1))
def test_cone_classes_land_in_half_plane(zs, n, b, r):
    assume(r == 1 or (n >= 0 and (n or b)))
    z = charge_eval(xi(zs[0], zs[1]), ClassVector.from_nb(n, (b,), r))
    assert not z.is_zero() and z.in_half_plane()


def test_charge_validation():
    with pytest.raises(ValueError):
        xi((1, 1), (-1, 1))
    with pytest.raises(ValueError):
        xi((-1, 1), (-1, 1), (F(0),))


def test_chambers():
    assert chamber_classify(xi((-1, 2), (-1, 1))) == Chamber.DT
    assert chamber_classify(xi((-1, 1), (-1, 2))) == Chamber.PT
    assert chamber_classify(xi((-2, 2), (-1, 1))) == Chamber.WALL
    assert is_general(xi((-1, 2), (-1, 1)))
    assert is_general(xi((-1, 1), (-1, 2)))
    assert not is_general(xi((-2, 2), (-1, 1)))


@given(quadrant, quadrant)
def test_wall_iff_not_general(a, b):
    Z = xi(a, b)
    assert (chamber_classify(Z) == Chamber.WALL) == (not is_general(Z))
    if chamber_classify(Z) == Chamber.DT:
        assert arg(Z.z0) < arg(Z.z1)


W0 = [ClassVector(-n, (0,), 0) for n in range(1, 4)]


def test_single_crossing_sign():
    # z0 from arg 0.6 pi to 0.9 pi through z1 at 0.75 pi
    p = ChargePath([xi((-1, 3), (-1, 1)), xi((-3, 1), (-1, 1))])
    walls = find_walls(p, W0)
    assert len(walls) == 1
    c = walls[0]
    assert c.epsilon == -1
    assert c.time.t_value == F(1, 2)
    assert c.classes == tuple(sorted(W0))
    back = find_walls(p.reversed(), W0)
    assert [b.epsilon for b in back] == [1]


def test_no_crossing_inside_chamber():
    p = ChargePath([xi((-1, 3), (-1, 1)), xi((-1, 2), (-1, 1))])
    assert find_walls(p, W0) == []
    assert find_walls(ChargePath([xi((-1, 3), (-1, 1)), xi((-3, 1), (-1, 1))]), []) == []


def test_path_errors():
    with pytest.raises(PathError):
        find_walls(ChargePath([xi((-1, 1), (-1, 1)), xi((-1, 3), (-1, 1))]), W0)
    # on a wall along the whole first segment
    with pytest.raises(PathError):
        find_walls(ChargePath([xi((-1, 3), (-1, 1)), xi((-1, 1), (-2, 2)), xi((-2, 2), (-1, 1)),
                               xi((-3, 1), (-1, 1))]), W0)
    # tangent touch: z0 sweeps up to the ray of z1 and back
    with pytest.raises(PathError):
        find_walls(ChargePath([xi((-1, 3), (-1, 1)), xi((-2, 2), (-1, 1)), xi((-1, 3), (-1, 1))]),
                   W0)
    with pytest.raises(ValueError):
        find_walls(ChargePath([xi((-1, 3), (-1, 1)), xi((-3, 1), (-1, 1))]),
                   [ClassVector(0, (0,), 1)])


def test_irrational_crossing():
    # cross(z0(u), z1) with z1 moving too gives a quadratic with irrational root
    p = ChargePath([xi((-1, 3), (-1, 1)), xi((-3, 1), (-1, 2))])
    walls = find_walls(p, W0)
    assert len(walls) == 1
    c = walls[0].time
    lo, hi = c.t_bracket
    assert lo < hi
    A, B, C = p.wall_poly(0)
    t = c.approx()
    assert abs(A * t * t + B * t + C) < 1e-20
    sgn = lambda u: (A * u * u + B * u + C > 0) - (A * u * u + B * u + C < 0)
    assert sgn(lo) * sgn(hi) < 0


def sampled_changes(path, steps=400):
    """Grid oracle: intervals where the chamber flips, with the new chamber."""
    out, prev = [], chamber_classify(path.at(0))
    for k in range(1, steps + 1):
        t = F(k, steps)
        cur = chamber_classify(path.at(t))
        if cur == Chamber.WALL:
            continue
        if cur != prev:
            out.append((F(k - 1, steps), t, cur))
        prev = cur
    return out


paths = st.lists(st.tuples(quadrant, quadrant), min_size=2, max_size=4)


@settings(max_examples=80, deadline=None)
@given(paths)
def test_find_walls_matches_grid_oracle(frames):
    path = ChargePath([xi(a, b) for a, b in frames])
    try:
        walls = find_walls(path, W0)
    except PathError:
        assume(False)
    changes = sampled_changes(path)
    # crossings closer than the grid spacing are invisible to the oracle
    times = [float(w.time.approx()) for w in walls]
    assume(all(b - a > F(1, 200) for a, b in zip(times, times[1:])))
    assert len(changes) == len(walls)
    for (lo, hi, cur), w in zip(changes, walls):
        assert lo <= float(w.time.approx()) <= hi
        assert w.epsilon == (1 if cur == Chamber.DT else -1)
    back = find_walls(path.reversed(), W0)
    assert [b.epsilon for b in back] == [-w.epsilon for w in reversed(walls)]


def test_s_eps_v_away_from_walls():
    Z = xi((-1, 3), (-1, 1))
    w = Window(3, (0,), LatticeConfig(1))
    v = ClassVector(-1, (0,), 1)
    assert s_eps_v(Z, v, F(1, 100), w) == {v}
    with pytest.raises(ValueError):
        s_eps_v(Z, v, F(1, 5), w)
    with pytest.raises(ValueError):
        s_eps_v(Z, v, F(1, 100), None)


def brute_s_eps(Z, v, eps, window):
    """Every rank 0/1 raw vector in a box, kept when both pieces are window classes in the interval."""
    with mpmath.workdps(40):
        psi = arg(charge_eval(Z, v)) / mpmath.pi
        out = set()
        for s in range(-8, 9):
            for b in range(-3, 4):
                for r in (0, 1):
                    w = ClassVector(s, (b,), r)
                    rest = v - w
                    if w.is_zero() or rest.r not in (0, 1):
                        continue
                    ok = True
                    for piece in (w, rest):
                        if piece.is_zero():
                            continue
                        if not window.class_in_window(piece):
                            ok = False
                            break
                        z = charge_eval(Z, piece)
                        if not z.in_half_plane():
                            ok = False
                            break
                        if abs(arg(z) / mpmath.pi - psi) >= mpmath.mpf(eps.numerator) / eps.denominator:
                            ok = False
                            break
                    if ok:
                        out.add(w)
        return out


@pytest.mark.parametrize("z0", [(-2, 2), (-201, 200), (-199, 200)])
def test_s_eps_v_near_wall(z0):
    Z = xi(z0, (-1, 1))
    w = Window(3, (0,), LatticeConfig(1))
    v = ClassVector(-2, (0,), 1)
    got = s_eps_v(Z, v, F(1, 50), w)
    assert got == brute_s_eps(Z, v, F(1, 50), w)
    expected = {ClassVector(-1, (0,), 0), ClassVector(-1, (0,), 1), ClassVector(-2, (0,), 0),
                ClassVector(-2, (0,), 1), ClassVector(0, (0,), 1)}
    assert got == expected


def test_s_eps_v_shrinks():
    Z = xi((-201, 200), (-1, 1))
    w = Window(3, (0,), LatticeConfig(1))
    v = ClassVector(-2, (0,), 1)
    sets = [s_eps_v(Z, v, F(1, d), w) for d in (50, 500, 5000)]
    assert sets[0] >= sets[1] >= sets[2]
    assert sets[2] == {v}
    gap = phase_gap(Z, v, [ClassVector(-1, (0,), 0)])
    assert gap is not None and s_eps_v(Z, v, gap / 2, w) == {v}


@given(quadrant, quadrant, st.fractions(min_value=F(1, 4), max_value=4, max_denominator=4))
def test_support_property(a, b, om):
    Z = xi(a, b, (om, om + 1))
    cls = [ClassVector(-n, (0, 0), 0) for n in range(1, 6)]
    cls += [ClassVector(0, (-x, -y), 0) for x in range(3) for y in range(3) if x or y]
    cls += [ClassVector(-n, (-x, 0), r) for n in range(-3, 4) for x in range(3) for r in (1, 2)]
    assert check_support(Z, cls) == []
    # the bound is attained on some stratum, so C cannot shrink
    c2 = support_constant_sq(Z)
    tight = [1 / Z.z0.norm_sq(), 1 / Z.z1.norm_sq(), 1 / om ** 2]
    assert c2 == max(tight)

"""Weak central charges of the xi-family and their wall structure.

Phases are never turned into floats for decisions.  Two values ``a, b`` in
``H = {im > 0} or {negative reals}`` satisfy ``arg a < arg b`` exactly when
``cross(a, b) = re(a) im(b) - im(a) re(b) > 0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

import mpmath

from .lattice import ClassVector, Window, curves_below, filtration_level

__all__ = [
    "GaussRational", "Order", "XiCharge", "Chamber", "ChargePath", "CrossingTime",
    "WallCrossing", "PathError", "charge_eval", "phase_cmp", "chamber_classify",
    "is_general", "find_walls", "s_eps_v", "support_constant_sq", "check_support",
    "phase_gap", "phase_float",
]


class PathError(ValueError):
    """The path is not good: an endpoint sits on a wall, or a wall is touched but not crossed."""


@dataclass(frozen=True)
class GaussRational:
    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def __add__(self, o):
        return GaussRational(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return GaussRational(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def scale(self, k) -> "GaussRational":
        k = Fraction(k)
        return GaussRational(k * self.re, k * self.im)

    def __rmul__(self, k):
        return self.scale(k)

    def norm_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def in_half_plane(self) -> bool:
        """Membership of ``H = {r exp(i pi phi) : r > 0, 0 < phi <= 1}``."""
        return self.im > 0 or (self.im == 0 and self.re < 0)

    def in_second_quadrant(self) -> bool:
        return self.re < 0 and self.im > 0

    def to_json(self):
        return [[self.re.numerator, self.re.denominator], [self.im.numerator, self.im.denominator]]

    @classmethod
    def from_json(cls, data) -> "GaussRational":
        (a, b), (c, d) = data
        return cls(Fraction(a, b), Fraction(c, d))

    def __str__(self):
        return f"({self.re}, {self.im})"


def cross(a: GaussRational, b: GaussRational) -> Fraction:
    return a.re * b.im - a.im * b.re


class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def phase_cmp(a: GaussRational, b: GaussRational) -> Order:
    """Compare ``arg a`` with ``arg b`` for values in ``H``."""
    for z in (a, b):
        if z.is_zero():
            raise ValueError("phase of zero is undefined")
        if not z.in_half_plane():
            raise ValueError(f"{z} has argument outside (0, pi]")
    c = cross(a, b)
    if c > 0:
        return Order.LESS
    if c < 0:
        return Order.GREATER
    return Order.EQUAL


@dataclass(frozen=True)
class XiCharge:
    """``xi = (-z0, -i omega, z1)`` with ``z0, z1`` in the open second quadrant and ``omega > 0``."""

    z0: GaussRational
    omega: tuple
    z1: GaussRational

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(Fraction(w) for w in self.omega))
        if not self.z0.in_second_quadrant() or not self.z1.in_second_quadrant():
            raise ValueError("z0 and z1 must lie in the open second quadrant")
        if any(w <= 0 for w in self.omega):
            raise ValueError("omega must be strictly positive")

    def to_json(self):
        return {"z0": self.z0.to_json(), "z1": self.z1.to_json(),
                "omega": [[w.numerator, w.denominator] for w in self.omega]}

    @classmethod
    def from_json(cls, d) -> "XiCharge":
        return cls(GaussRational.from_json(d["z0"]),
                   tuple(Fraction(a, b) for a, b in d["omega"]),
                   GaussRational.from_json(d["z1"]))


def charge_eval(Z: XiCharge, v: ClassVector) -> GaussRational:
    """``Z(v)``: only the top graded piece of ``v`` contributes."""
    level = filtration_level(v)
    if level == 0:
        return Z.z0.scale(-v.s)
    if level == 1:
        if len(v.beta) != len(Z.omega):
            raise ValueError("curve class and omega have different ranks")
        q = sum((w * b for w, b in zip(Z.omega, v.beta)), Fraction(0))
        return GaussRational(0, -q)
    return Z.z1.scale(v.r)


def phase_float(z: GaussRational, dps: int = 50) -> mpmath.mpf:
    """``arg z / pi`` to ``dps`` digits; for reporting only."""
    with mpmath.workdps(dps):
        return mpmath.atan2(mpmath.mpf(z.im.numerator) / z.im.denominator,
                            mpmath.mpf(z.re.numerator) / z.re.denominator) / mpmath.pi


class Chamber(enum.Enum):
    DT = "DT"
    PT = "PT"
    WALL = "wall"


def chamber_classify(Z: XiCharge) -> Chamber:
    c = cross(Z.z0, Z.z1)
    if c > 0:
        return Chamber.DT
    if c < 0:
        return Chamber.PT
    return Chamber.WALL


def is_general(Z: XiCharge) -> bool:
    """No class of ``Gamma_0`` has charge on the ray of ``Z(O_X)``."""
    return cross(Z.z0, Z.z1) != 0


# paths and walls


def _lerp(a: GaussRational, b: GaussRational, u: Fraction) -> GaussRational:
    return GaussRational(a.re + u * (b.re - a.re), a.im + u * (b.im - a.im))


class ChargePath:
    """Piecewise-linear path through keyframes placed at ``t = i / (K - 1)``."""

    def __init__(self, keyframes: Sequence[XiCharge]):
        if len(keyframes) < 2:
            raise ValueError("a path needs at least two keyframes")
        ranks = {len(k.omega) for k in keyframes}
        if len(ranks) != 1:
            raise ValueError("keyframes disagree on the rank of omega")
        # the constraints are convex, so valid keyframes give a valid path
        self.keyframes = tuple(keyframes)

    @property
    def segments(self) -> int:
        return len(self.keyframes) - 1

    def segment_at(self, i: int, u) -> XiCharge:
        a, b = self.keyframes[i], self.keyframes[i + 1]
        u = Fraction(u)
        return XiCharge(_lerp(a.z0, b.z0, u),
                        tuple(x + u * (y - x) for x, y in zip(a.omega, b.omega)),
                        _lerp(a.z1, b.z1, u))

    def at(self, t) -> XiCharge:
        t = Fraction(t)
        if not 0 <= t <= 1:
            raise ValueError("path parameter must lie in [0, 1]")
        s = t * self.segments
        i = min(int(s), self.segments - 1)
        return self.segment_at(i, s - i)

    def reversed(self) -> "ChargePath":
        return ChargePath(self.keyframes[::-1])

    def wall_poly(self, i: int) -> tuple[Fraction, Fraction, Fraction]:
        """Coefficients ``(A, B, C)`` of ``cross(z0(u), z1(u)) = A u^2 + B u + C`` on segment ``i``."""
        a, b = self.keyframes[i], self.keyframes[i + 1]
        d0, d1 = b.z0 - a.z0, b.z1 - a.z1
        return (cross(d0, d1), cross(a.z0, d1) + cross(d0, a.z1), cross(a.z0, a.z1))

    def to_json(self):
        return [k.to_json() for k in self.keyframes]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _rational_sqrt(d: Fraction) -> Fraction | None:
    if d < 0:
        return None
    p, q = d.numerator, d.denominator
    rp, rq = isqrt(p), isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


@dataclass(frozen=True)
class CrossingTime:
    """A root of the wall polynomial on one segment.

    ``value`` is set for rational roots.  Otherwise the root is
    ``(-B + branch * sqrt(B^2 - 4AC)) / (2A)`` and ``bracket`` isolates it.
    """

    segment: int
    segments: int
    poly: tuple
    value: Fraction | None
    branch: int
    bracket: tuple

    @property
    def t_bracket(self) -> tuple[Fraction, Fraction]:
        lo, hi = self.bracket
        return ((self.segment + lo) / self.segments, (self.segment + hi) / self.segments)

    @property
    def t_value(self) -> Fraction | None:
        return None if self.value is None else (self.segment + self.value) / self.segments

    def approx(self, dps: int = 30) -> mpmath.mpf:
        with mpmath.workdps(dps):
            if self.value is not None:
                u = mpmath.mpf(self.value.numerator) / self.value.denominator
            else:
                A, B, C = (mpmath.mpf(x.numerator) / x.denominator for x in self.poly)
                u = (-B + self.branch * mpmath.sqrt(B * B - 4 * A * C)) / (2 * A)
            return (self.segment + u) / self.segments

    def sort_key(self):
        lo, _ = self.t_bracket
        return (self.segment, lo)

    def to_json(self):
        out = {"segment": self.segment,
               "poly": [[c.numerator, c.denominator] for c in self.poly]}
        if self.value is not None:
            t = self.t_value
            out["t"] = [t.numerator, t.denominator]
        else:
            lo, hi = self.t_bracket
            out["branch"] = self.branch
            out["t_bracket"] = [[lo.numerator, lo.denominator], [hi.numerator, hi.denominator]]
        return out


@dataclass(frozen=True)
class WallCrossing:
    time: CrossingTime
    classes: tuple
    epsilon: int

    def to_json(self):
        return {"time": self.time.to_json(), "epsilon": self.epsilon,
                "classes": [v.to_list() for v in self.classes]}


def _poly_eval(p, u):
    A, B, C = p
    return (A * u + B) * u + C


def _isolate(p, lo: Fraction, hi: Fraction, bits: int = 48) -> tuple[Fraction, Fraction]:
    slo = _sign(_poly_eval(p, lo))
    for _ in range(bits):
        mid = (lo + hi) / 2
        sm = _sign(_poly_eval(p, mid))
        if sm == 0:
            return mid, mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _segment_roots(p, i: int, segments: int) -> list[tuple[CrossingTime, int]]:
    """Simple roots in the open interval ``(0, 1)`` with the sign of the polynomial after them."""
    A, B, C = p
    out = []
    if A == 0:
        if B == 0:
            if C == 0:
                raise PathError(f"segment {i} lies on a wall")
            return []
        u = -C / B
        if 0 < u < 1:
            out.append((CrossingTime(i, segments, p, u, 0, (u, u)), _sign(B)))
        return out
    D = B * B - 4 * A * C
    if D < 0:
        return []
    if D == 0:
        u = -B / (2 * A)
        if 0 < u < 1:
            raise PathError(f"segment {i} touches a wall tangentially at u = {u}")
        return []
    r = _rational_sqrt(D)
    for branch in (-1, 1):
        if r is not None:
            u = (-B + branch * r) / (2 * A)
            if 0 < u < 1:
                out.append((CrossingTime(i, segments, p, u, branch, (u, u)), branch))
            continue
        # exact location test: is the irrational root strictly inside (0, 1)?
        approx = (-mpmath.mpf(B.numerator) / B.denominator
                  + branch * mpmath.sqrt(mpmath.mpf(D.numerator) / D.denominator)) \
            / (2 * mpmath.mpf(A.numerator) / A.denominator)
        if not (-0.5 < approx < 1.5):
            continue
        # bracket the root by its branch: sign(2Au + B) = branch on its side of the vertex
        vertex = -B / (2 * A)
        lo, hi = (Fraction(0), vertex) if branch * _sign(A) < 0 else (vertex, Fraction(1))
        lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
        if lo >= hi:
            continue
        s_lo, s_hi = _sign(_poly_eval(p, lo)), _sign(_poly_eval(p, hi))
        if s_lo == 0 or s_hi == 0 or s_lo == s_hi:
            continue
        bracket = _isolate(p, lo, hi)
        out.append((CrossingTime(i, segments, p, None, branch, bracket), branch))
    return out


def _one_sided(p, at_end: bool) -> int:
    """Sign of the polynomial just inside the segment at ``u = 0+`` or ``u = 1-``."""
    A, B, C = p
    if not at_end:
        coeffs = (C, B, A)
    else:
        coeffs = (A + B + C, -(2 * A + B), A)
    for c in coeffs:
        if c:
            return _sign(c)
    return 0


def find_walls(path: ChargePath, classes: Iterable[ClassVector]) -> list[WallCrossing]:
    """Crossings of the DT/PT wall along ``path`` with their signs.

    ``epsilon = +1`` when, after the crossing, ``arg Z(v) < arg Z(O_X)`` for the
    wall classes ``v`` (the DT side), ``-1`` when the order is reversed.
    """
    classes = list(classes)
    for v in classes:
        if filtration_level(v) != 0:
            raise ValueError(f"{v} is not a class of Gamma_0")
    wall = tuple(sorted(v for v in classes if v.s < 0))
    if not wall:
        return []
    K = path.segments
    if not is_general(path.keyframes[0]) or not is_general(path.keyframes[-1]):
        raise PathError("path endpoints must be general")
    events: list[tuple[CrossingTime, int]] = []
    for i in range(K):
        p = path.wall_poly(i)
        events.extend(_segment_roots(p, i, K))
        if i + 1 < K and _poly_eval(p, Fraction(1)) == 0:
            before = _one_sided(p, at_end=True)
            after = _one_sided(path.wall_poly(i + 1), at_end=False)
            if before == 0 or after == 0:
                raise PathError(f"a segment next to keyframe {i + 1} lies on a wall")
            if before == after:
                raise PathError(f"path touches a wall at keyframe {i + 1} without crossing")
            events.append((CrossingTime(i + 1, K, path.wall_poly(i + 1), Fraction(0), 0,
                                        (Fraction(0), Fraction(0))), after))
    events.sort(key=lambda e: e[0].sort_key())
    return [WallCrossing(ct, wall, eps) for ct, eps in events]


# the finite sets S_{eps, v}


_DPS = 60


def _phase_mp(z: GaussRational):
    return mpmath.atan2(mpmath.mpf(z.im.numerator) / z.im.denominator,
                        mpmath.mpf(z.re.numerator) / z.re.denominator) / mpmath.pi


def _certified_lt(a, b, what: str) -> bool:
    """``a < b`` for mp values, refusing to decide within the working precision."""
    gap = b - a
    if abs(gap) < mpmath.mpf(10) ** (-(_DPS - 10)):
        raise ValueError(f"cannot certify phase comparison ({what}); choose another eps")
    return gap > 0


def _in_interval(Z: XiCharge, w: ClassVector, centre, eps, ref: GaussRational) -> bool:
    z = charge_eval(Z, w)
    if not z.in_half_plane():
        return False
    if phase_cmp(z, ref) == Order.EQUAL:
        return True
    d = abs(_phase_mp(z) - centre)
    return _certified_lt(d, eps, f"class {w}")


def _candidates(v: ClassVector, window: Window) -> list[ClassVector]:
    out = []
    for beta in curves_below(window.beta_cut):
        if v.r == 1:
            for n in range(window.config.m(beta), window.k_cut):
                out.append(ClassVector.from_nb(n, beta, 1))
        for n in range(0, window.t_cut):
            if n or any(beta):
                out.append(ClassVector.from_nb(n, beta, 0))
    return out


def _realizable(w: ClassVector, window: Window) -> bool:
    if w.is_zero():
        return True
    return window.class_in_window(w)


def s_eps_v(Z: XiCharge, v: ClassVector, eps, window: Window | None) -> set[ClassVector]:
    """Nonzero ``v'`` such that ``v'`` and ``v - v'`` both have phase within ``eps`` of ``phase(v)``.

    ``v`` itself is a member (its complement is zero).  Only cone classes of
    the window are considered.
    """
    if window is None:
        raise ValueError("s_eps_v needs a window")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not (v.r == 1 or (v.r == 0 and not any(v.beta))):
        raise ValueError("v must have rank one or lie in Gamma_0")
    ref = charge_eval(Z, v)
    if not ref.in_half_plane():
        raise ValueError("v has no phase in (0, 1]")
    with mpmath.workdps(_DPS):
        psi = _phase_mp(ref)
        e = mpmath.mpf(eps.numerator) / eps.denominator
        if not (_certified_lt(mpmath.mpf(1) / 2, psi - 2 * e, "lower eps bound")
                and _certified_lt(psi + 2 * e, mpmath.mpf(1), "upper eps bound")):
            raise ValueError("eps too large: (psi - 2 eps, psi + 2 eps) must lie in (1/2, 1)")
        out = set()
        for w in _candidates(v, window):
            rest = v - w
            if not _realizable(rest, window) or rest.r not in (0, 1):
                continue
            if not _in_interval(Z, w, psi, e, ref):
                continue
            if not rest.is_zero() and not _in_interval(Z, rest, psi, e, ref):
                continue
            out.add(w)
    return out


def phase_gap(Z: XiCharge, v: ClassVector, classes: Iterable[ClassVector]) -> Fraction | None:
    """A rational lower bound for the smallest nonzero phase distance from ``v`` to ``classes``."""
    ref = charge_eval(Z, v)
    best = None
    with mpmath.workdps(_DPS):
        psi = _phase_mp(ref)
        for w in classes:
            z = charge_eval(Z, w)
            if not z.in_half_plane() or phase_cmp(z, ref) == Order.EQUAL:
                continue
            d = abs(_phase_mp(z) - psi)
            best = d if best is None else min(best, d)
        if best is None:
            return None
        # round down to a safe rational
        return Fraction(int(mpmath.floor(best * 10 ** 12)) - 1, 10 ** 12)


# support property


def support_constant_sq(Z: XiCharge) -> Fraction:
    """``C^2`` with ``||v|| <= C |Z(v)|`` for cone classes, stratum by stratum.

    Strata: ``|s| / |s z0| = 1/|z0|``, ``|beta|_2 / (omega . beta) <= 1/min(omega)``
    and ``|r| / |r z1| = 1/|z1|``.
    """
    cands = [1 / Z.z0.norm_sq(), 1 / Z.z1.norm_sq()]
    if Z.omega:
        cands.append(1 / min(Z.omega) ** 2)
    return max(cands)


def graded_norm_sq(v: ClassVector) -> int:
    """Squared Euclidean norm of the top graded piece of ``v``."""
    level = filtration_level(v)
    if level == 0:
        return v.s * v.s
    if level == 1:
        return sum(b * b for b in v.beta)
    return v.r * v.r


def check_support(Z: XiCharge, classes: Iterable[ClassVector]) -> list[ClassVector]:
    """Classes violating ``||v||^2 <= C^2 |Z(v)|^2``; empty when the property holds."""
    c2 = support_constant_sq(Z)
    bad = []
    for v in classes:
        if filtration_level(v) == 1 and not (all(b >= 0 for b in v.beta)
                                             or all(b <= 0 for b in v.beta)):
            raise ValueError(f"{v} is not a cone class")
        if graded_norm_sq(v) > c2 * charge_eval(Z, v).norm_sq():
            bad.append(v)
    return bad

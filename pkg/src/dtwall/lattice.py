"""The lattice ``Gamma = Z + N_1(X) + Z`` with its hook filtration.

A class is stored in raw coordinates ``(s, l, r) = (ch_3, ch_2, ch_0)``.  An
object counted with curve class ``beta`` and holomorphic Euler characteristic
``n`` has class ``(-n, -beta, r)``; :meth:`ClassVector.from_nb` builds it and
:attr:`ClassVector.n` / :attr:`ClassVector.curve` read it back.

``N_1(X)`` is modelled as ``Z^k`` with effective cone ``N^k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Sequence

Curve = tuple  # tuple[int, ...]


class ConfigError(ValueError):
    """Raised for inconsistent lattice or window configuration."""


def _as_curve(beta: Sequence[int], k: int | None = None) -> Curve:
    out = tuple(int(b) for b in beta)
    if k is not None and len(out) != k:
        raise ConfigError(f"curve class {out} does not have rank {k}")
    return out


def is_effective(beta: Sequence[int]) -> bool:
    """``beta >= 0``: effective or zero."""
    return all(b >= 0 for b in beta)


def curve_le(a: Sequence[int], b: Sequence[int]) -> bool:
    """Partial order ``a <= b`` iff ``b - a`` is effective or zero."""
    return all(x <= y for x, y in zip(a, b))


def curves_below(cut: Sequence[int]) -> Iterator[Curve]:
    """All effective classes ``beta <= cut`` in lexicographic order."""
    return product(*(range(c + 1) for c in cut))


@dataclass(frozen=True)
class LatticeConfig:
    """Rank of ``N_1(X)``, Euler characteristic of the 3-fold and the bound ``m``.

    ``m`` is given either as a finite table ``{beta: m(beta)}`` or by the affine
    rule ``m(beta) = floor(-m_slope * sum(beta))``.  A table wins when both are
    present.  ``m(0) = 0`` always, and ``m(beta) <= 0`` is enforced so that
    ``T`` sits inside ``S``.
    """

    curve_rank: int = 0
    chi_X: int = 0
    m_table: Mapping[Curve, int] | None = field(default=None, compare=False)
    m_slope: Fraction = Fraction(0)

    def __post_init__(self):
        if self.curve_rank < 0:
            raise ConfigError("curve_rank must be nonnegative")
        object.__setattr__(self, "m_slope", Fraction(self.m_slope))
        if self.m_slope < 0:
            raise ConfigError("m_slope must be nonnegative")
        if self.m_table is not None:
            table = {}
            for beta, m in self.m_table.items():
                beta = _as_curve(beta, self.curve_rank)
                if not is_effective(beta):
                    raise ConfigError(f"m given on non-effective class {beta}")
                if int(m) > 0:
                    raise ConfigError(f"m({beta}) = {m} > 0 breaks T inside S")
                table[beta] = int(m)
            zero = (0,) * self.curve_rank
            if table.get(zero, 0) != 0:
                raise ConfigError("m(0) must be 0")
            table[zero] = 0
            object.__setattr__(self, "m_table", table)

    def m(self, beta: Sequence[int]) -> int:
        beta = _as_curve(beta, self.curve_rank)
        if not is_effective(beta):
            raise ConfigError(f"m is only defined on effective classes, got {beta}")
        if not any(beta):
            return 0
        if self.m_table is not None:
            try:
                return self.m_table[beta]
            except KeyError:
                raise ConfigError(f"m({beta}) is not configured") from None
        return math.floor(-self.m_slope * sum(beta))

    @property
    def zero_curve(self) -> Curve:
        return (0,) * self.curve_rank


@dataclass(frozen=True, order=True)
class ClassVector:
    """An element ``(s, beta, r)`` of ``Gamma`` in raw coordinates."""

    s: int
    beta: Curve
    r: int

    def __post_init__(self):
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "beta", _as_curve(self.beta))
        object.__setattr__(self, "r", int(self.r))

    @classmethod
    def from_nb(cls, n: int, beta: Sequence[int], r: int) -> "ClassVector":
        return cls(-n, tuple(-b for b in beta), r)

    @property
    def n(self) -> int:
        return -self.s

    @property
    def curve(self) -> Curve:
        return tuple(-b for b in self.beta)

    @property
    def nb(self) -> tuple[int, Curve]:
        return (self.n, self.curve)

    def is_zero(self) -> bool:
        return self.s == 0 and self.r == 0 and not any(self.beta)

    @classmethod
    def _make(cls, s: int, beta: Curve, r: int) -> "ClassVector":
        # trusted fast path for arithmetic on already-normalized fields
        out = object.__new__(cls)
        object.__setattr__(out, "s", s)
        object.__setattr__(out, "beta", beta)
        object.__setattr__(out, "r", r)
        return out

    def __add__(self, other: "ClassVector") -> "ClassVector":
        if len(self.beta) != len(other.beta):
            raise ValueError("curve classes of different rank")
        return ClassVector._make(self.s + other.s,
                                 tuple(a + b for a, b in zip(self.beta, other.beta)),
                                 self.r + other.r)

    def __sub__(self, other: "ClassVector") -> "ClassVector":
        if len(self.beta) != len(other.beta):
            raise ValueError("curve classes of different rank")
        return ClassVector._make(self.s - other.s,
                                 tuple(a - b for a, b in zip(self.beta, other.beta)),
                                 self.r - other.r)

    def __neg__(self) -> "ClassVector":
        return ClassVector._make(-self.s, tuple(-b for b in self.beta), -self.r)

    def __rmul__(self, k: int) -> "ClassVector":
        k = int(k)
        return ClassVector._make(k * self.s, tuple(k * b for b in self.beta), k * self.r)

    def __str__(self):
        return f"({self.s}, {list(self.beta)}, {self.r})"

    def to_list(self) -> list:
        return [self.s, list(self.beta), self.r]


def class_sum(vs: Sequence[ClassVector]) -> ClassVector:
    total = vs[0]
    for v in vs[1:]:
        total = total + v
    return total


def structure_sheaf(curve_rank: int) -> ClassVector:
    """Class ``(0, 0, 1)`` of ``O_X``."""
    return ClassVector(0, (0,) * curve_rank, 1)


def euler_pairing(v: ClassVector, w: ClassVector) -> int:
    """``chi(v, w) = r s' - r' s``; antisymmetric and blind to curve classes."""
    return v.r * w.s - w.r * v.s


def filtration_level(v: ClassVector) -> int:
    """Index ``m`` with ``v`` in ``Gamma_m`` minus ``Gamma_{m-1}`` for the hook filtration."""
    if v.r != 0:
        return 2
    if any(v.beta):
        return 1
    if v.s != 0:
        return 0
    raise ValueError("the zero class has no filtration level")


def in_gamma0(v: ClassVector) -> bool:
    return v.r == 0 and not any(v.beta)


def in_S(config: LatticeConfig, n: int, beta: Sequence[int]) -> bool:
    """Membership of ``(n, beta)`` in ``S = {beta >= 0, n >= m(beta)}``."""
    beta = _as_curve(beta, config.curve_rank)
    return is_effective(beta) and n >= config.m(beta)


def in_T(config: LatticeConfig, n: int, beta: Sequence[int]) -> bool:
    """Membership of ``(n, beta)`` in ``T = {beta >= 0, n >= 0}``."""
    beta = _as_curve(beta, config.curve_rank)
    return is_effective(beta) and n >= 0


@dataclass(frozen=True)
class Window:
    """Box window ``lambda = (k_cut, beta_cut)``.

    The retained S-indices are ``{beta <= beta_cut, m(beta) <= n < k_cut}``, the
    finite complement of ``S_lambda``.  T-series are kept up to
    ``n < t_cut = k_cut - min m(beta)`` so that products ``S * T`` are exact on
    the retained S-indices.
    """

    k_cut: int
    beta_cut: Curve
    config: LatticeConfig = field(compare=True)

    def __post_init__(self):
        object.__setattr__(self, "beta_cut", _as_curve(self.beta_cut, self.config.curve_rank))
        if not is_effective(self.beta_cut):
            raise ConfigError("beta_cut must be effective")
        for beta in curves_below(self.beta_cut):
            self.config.m(beta)  # every m(beta) in the box must be defined

    def __hash__(self):
        return hash((self.k_cut, self.beta_cut, self.config.curve_rank,
                     self.config.m_slope, tuple(sorted((self.config.m_table or {}).items()))))

    @property
    def m_min(self) -> int:
        return min(self.config.m(b) for b in curves_below(self.beta_cut))

    @property
    def t_cut(self) -> int:
        return self.k_cut - self.m_min

    def floor(self, beta: Curve, mode: str) -> int:
        return self.config.m(beta) if mode == "S" else 0

    def ceiling(self, mode: str) -> int:
        return self.k_cut if mode == "S" else self.t_cut

    def retains(self, n: int, beta: Sequence[int], mode: str = "S") -> bool:
        beta = _as_curve(beta, self.config.curve_rank)
        if not is_effective(beta) or not curve_le(beta, self.beta_cut):
            return False
        return self.floor(beta, mode) <= n < self.ceiling(mode)

    def indices(self, mode: str = "S") -> list[tuple[int, Curve]]:
        """Retained index set, sorted by ``(n, beta)``."""
        out = [(n, beta)
               for beta in curves_below(self.beta_cut)
               for n in range(self.floor(beta, mode), self.ceiling(mode))]
        return sorted(out)

    def contains(self, other: "Window") -> bool:
        """True when every index retained by ``other`` is retained here."""
        if other.config.curve_rank != self.config.curve_rank:
            return False
        return all(self.retains(n, b, mode)
                   for mode in ("S", "T") for n, b in other.indices(mode))

    def class_in_window(self, v: ClassVector) -> bool:
        """Rank-one classes use the S-indices, rank-zero ones the T-indices."""
        if v.r == 1:
            return self.retains(v.n, v.curve, "S")
        if v.r == 0:
            return self.retains(v.n, v.curve, "T")
        return False


def _rank0_parts(window: Window, bound_n: int, beta_cap: Curve) -> list[ClassVector]:
    out = []
    for beta in curves_below(beta_cap):
        for n in range(0, bound_n + 1):
            if (n or any(beta)) and window.retains(n, beta, "T"):
                out.append(ClassVector.from_nb(n, beta, 0))
    return out


def decompose(v: ClassVector, parts: int, window: Window | None) -> list[tuple[ClassVector, ...]]:
    """Ordered decompositions ``v = v_1 + ... + v_l`` into effective parts.

    Parts have rank 0 (index in ``T``, nonzero) or rank 1 (index in ``S``), and
    at most one part has rank one.  Every part lies in ``window``.
    """
    if window is None:
        raise ValueError("decompose needs a window; the enumeration is unbounded otherwise")
    if parts < 1:
        raise ValueError("parts must be at least 1")
    if v.r not in (0, 1):
        raise ValueError(f"only rank 0 or 1 targets are supported, got r = {v.r}")
    if not window.class_in_window(v) or v.is_zero():
        raise ValueError(f"target {v} is not a nonzero class of the window")

    n_total, beta_total = v.n, v.curve
    slack = -min(0, window.m_min) if v.r == 1 else 0
    rank0 = _rank0_parts(window, n_total + slack, beta_total)
    rank1 = []
    if v.r == 1:
        for beta in curves_below(beta_total):
            for n in range(window.config.m(beta), n_total + 1):
                if window.retains(n, beta, "S"):
                    rank1.append(ClassVector.from_nb(n, beta, 1))

    def valid_last(w: ClassVector) -> bool:
        if w.r == 1:
            return in_S(window.config, w.n, w.curve) and window.retains(w.n, w.curve, "S")
        if w.r == 0:
            return (not w.is_zero()) and is_effective(w.curve) and w.n >= 0 \
                and window.retains(w.n, w.curve, "T")
        return False

    out: list[tuple[ClassVector, ...]] = []
    m_min = window.m_min

    def feasible(rest: ClassVector, k: int) -> bool:
        # k rank-zero parts have degree >= k; a rank-one part has degree >= m_min
        deg = rest.n + sum(rest.curve)
        if rest.r == 1:
            return deg >= m_min + k - 1
        return rest.r == 0 and deg >= k

    def rec(rest: ClassVector, k: int, acc: list[ClassVector]):
        if not feasible(rest, k):
            return
        if k == 1:
            if valid_last(rest):
                out.append(tuple(acc) + (rest,))
            return
        pool = rank0 + (rank1 if rest.r == 1 else [])
        for part in pool:
            remaining = rest - part
            if remaining.r < 0 or not is_effective(remaining.curve):
                continue
            acc.append(part)
            rec(remaining, k - 1, acc)
            acc.pop()

    rec(v, parts, [])
    return out


def all_decompositions(v: ClassVector, window: Window, max_parts: int | None = None
                       ) -> Iterator[tuple[ClassVector, ...]]:
    """Decompositions with any number of parts, up to ``max_parts``."""
    l = 1
    while max_parts is None or l <= max_parts:
        found = decompose(v, l, window)
        if not found:
            # size n + |beta| of a rank-zero part is at least 1, so none for larger l either
            if v.r == 0 or l > v.n - window.m_min + sum(v.curve) + 1:
                return
        yield from found
        l += 1

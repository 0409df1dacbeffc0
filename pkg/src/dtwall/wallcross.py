"""Joyce's transformation coefficients and the DT/PT wall-crossing pipeline.

The invariants ``J^v`` are input tables.  For rank-one ``v = (-n, -beta, 1)``
they play the role of ``DT_{n, beta}``, for ``v = (-n, -beta, 0)`` of
``N_{n, beta}``.  In the Behrend-weighted (``"behrend"``) convention a table
holds ``J_vir`` and the invariants are ``DT = -J_vir`` and ``N = -J_vir``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .lattice import (ClassVector, Window, class_sum, euler_pairing,
                      filtration_level, in_gamma0)
from .series import MonoidSeries, SeriesError, divide, exp_series, macmahon
from .stability import (ChargePath, GaussRational, Order, XiCharge, charge_eval, cross,
                        find_walls, phase_cmp)

__all__ = [
    "PhaseOracle", "ChargeOracle", "GermOracle", "TableOracle", "XiGerm", "LinearGerm",
    "WallGerm", "InvariantTable", "OrientedTree", "BudgetError",
    "nondecr_surjections", "surjection_identity_check", "binomial_collapse",
    "s_coeff", "u_coeff", "limit_coeffs", "uex_closed_form", "s_limit_closed_form",
    "trees", "tree_weight", "kirchhoff_tree_weight", "edge_weight", "transform",
    "dt_closed_form", "nhat_invariance_check", "wall_product", "path_transport",
    "nhat_closed_form", "dtpt_check", "MODES",
]

MODES = ("euler", "behrend")


class BudgetError(ValueError):
    """A requested enumeration is larger than its configured budget."""


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def structure_class(v: ClassVector) -> ClassVector:
    return ClassVector(0, (0,) * len(v.beta), 1)


# phase oracles


class PhaseOracle:
    """A total preorder on phases of nonzero classes."""

    def compare(self, a: ClassVector, b: ClassVector) -> Order:
        raise NotImplementedError

    def le(self, a, b) -> bool:
        return self.compare(a, b) != Order.GREATER

    def eq(self, a, b) -> bool:
        return self.compare(a, b) == Order.EQUAL


class ChargeOracle(PhaseOracle):
    """Exact phases of a fixed charge ``v -> Z(v)``."""

    def __init__(self, charge: "XiCharge | Callable[[ClassVector], GaussRational]"):
        if isinstance(charge, XiCharge):
            Z = charge
            self._fn = lambda v: charge_eval(Z, v)
        else:
            self._fn = charge
        self._cache: dict = {}

    def value(self, v: ClassVector) -> GaussRational:
        if v not in self._cache:
            self._cache[v] = self._fn(v)
        return self._cache[v]

    def compare(self, a, b) -> Order:
        return phase_cmp(self.value(a), self.value(b))


class XiGerm:
    """Charges ``Z_t`` of the xi-family moving linearly: ``z0 + t dz0``, ``omega + t domega``, ``z1 + t dz1``."""

    def __init__(self, base: XiCharge, dz0: GaussRational = GaussRational(0, 0),
                 dz1: GaussRational = GaussRational(0, 0), domega: Sequence = ()):
        self.base, self.dz0, self.dz1 = base, dz0, dz1
        self.domega = tuple(Fraction(x) for x in domega) or (Fraction(0),) * len(base.omega)

    def value(self, v: ClassVector) -> tuple[GaussRational, GaussRational]:
        level = filtration_level(v)
        if level == 0:
            return self.base.z0.scale(-v.s), self.dz0.scale(-v.s)
        if level == 1:
            q = sum((w * b for w, b in zip(self.base.omega, v.beta)), Fraction(0))
            dq = sum((w * b for w, b in zip(self.domega, v.beta)), Fraction(0))
            return GaussRational(0, -q), GaussRational(0, -dq)
        return self.base.z1.scale(v.r), self.dz1.scale(v.r)

    def in_gamma0(self, v: ClassVector) -> bool:
        return in_gamma0(v)


class LinearGerm:
    """A two-step filtration with ``Gamma_0`` all rank-zero classes.

    ``Z_t(s, l, 0) = -s (a + t da) - sum_j l_j (c_j + t dc_j)`` and
    ``Z_t(s, l, r) = r (z1 + t dz1)`` for ``r != 0``.  Unlike the xi-family this
    lets curve classes sit on a wall next to ``O_X``.
    """

    def __init__(self, a: GaussRational, c: Sequence[GaussRational], z1: GaussRational,
                 da: GaussRational = GaussRational(0, 0), dc: Sequence[GaussRational] = (),
                 dz1: GaussRational = GaussRational(0, 0)):
        self.a, self.c, self.z1 = a, tuple(c), z1
        self.da, self.dz1 = da, dz1
        self.dc = tuple(dc) or (GaussRational(0, 0),) * len(self.c)

    def value(self, v: ClassVector) -> tuple[GaussRational, GaussRational]:
        if v.r != 0:
            return self.z1.scale(v.r), self.dz1.scale(v.r)
        if v.is_zero():
            raise ValueError("the zero class has no charge")
        z = self.a.scale(-v.s)
        dz = self.da.scale(-v.s)
        for l, c, dc in zip(v.beta, self.c, self.dc):
            z = z - c.scale(l)
            dz = dz - dc.scale(l)
        return z, dz

    def in_gamma0(self, v: ClassVector) -> bool:
        return v.r == 0


class GermOracle(PhaseOracle):
    """Phase order of ``Z_t`` for ``t`` on one side of ``0`` (``side = +1`` or ``-1``), or at ``t = 0``."""

    def __init__(self, family, side: int):
        if side not in (-1, 0, 1):
            raise ValueError("side must be -1, 0 or +1")
        self.family, self.side = family, side
        self._cache: dict = {}
        self._cmp: dict = {}

    def _val(self, v):
        if v not in self._cache:
            z, dz = self.family.value(v)
            if z.is_zero() or not z.in_half_plane():
                raise ValueError(f"class {v} has no phase at the base point")
            self._cache[v] = (z, dz)
        return self._cache[v]

    def compare(self, a, b) -> Order:
        key = (a, b)
        hit = self._cmp.get(key)
        if hit is None:
            hit = self._cmp[key] = self._compare(a, b)
        return hit

    def _compare(self, a, b) -> Order:
        (a0, a1), (b0, b1) = self._val(a), self._val(b)
        coeffs = (cross(a0, b0), cross(a0, b1) + cross(a1, b0), cross(a1, b1))
        for k, c in enumerate(coeffs):
            if self.side == 0 and k > 0:
                break
            if c:
                s = c * (self.side ** k)
                return Order.LESS if s > 0 else Order.GREATER
        return Order.EQUAL


class TableOracle(PhaseOracle):
    """Phases given explicitly as rationals (any class the caller may query must be listed)."""

    def __init__(self, phases: Mapping[ClassVector, object]):
        self.phases = {k: Fraction(v) for k, v in phases.items()}

    def compare(self, a, b) -> Order:
        try:
            pa, pb = self.phases[a], self.phases[b]
        except KeyError as exc:
            raise ValueError(f"oracle cannot rank class {exc.args[0]}") from None
        return Order((pa > pb) - (pa < pb))


@dataclass
class WallGerm:
    """One-sided orders ``sigma_+`` and ``sigma_-`` at a wall.

    ``W`` is the set of ``Gamma_0`` classes whose charge is a positive multiple
    of ``Z(O_X)`` at ``t = 0``; each must satisfy ``arg Z_t(v) > arg Z_t(O_X)``
    for small ``t > 0`` and the reverse for small ``t < 0``.
    """

    family: object
    curve_rank: int

    def __post_init__(self):
        self.plus = GermOracle(self.family, +1)
        self.minus = GermOracle(self.family, -1)
        self.base = GermOracle(self.family, 0)
        self.ox = ClassVector(0, (0,) * self.curve_rank, 1)

    def in_W(self, v: ClassVector) -> bool:
        return self.family.in_gamma0(v) and self.base.eq(v, self.ox)

    def validate(self, classes: Iterable[ClassVector]) -> None:
        for v in classes:
            if self.in_W(v):
                if self.plus.compare(v, self.ox) != Order.GREATER \
                        or self.minus.compare(v, self.ox) != Order.LESS:
                    raise ValueError(f"wall class {v} does not cross O_X in the required direction")
        for v in classes:
            for w in classes:
                if self.in_W(v) and self.in_W(w):
                    o = self.base.compare(v, w)
                    if self.plus.compare(v, w) != o or self.minus.compare(v, w) != o:
                        raise ValueError("wall classes change relative order off the wall")


# the invariant tables


@dataclass
class InvariantTable:
    mode: str
    entries: dict

    def __post_init__(self):
        _check_mode(self.mode)
        clean = {}
        for v, a in self.entries.items():
            if v.r not in (0, 1):
                raise ValueError(f"invariants are only kept for rank 0 or 1, got {v}")
            a = Fraction(a)
            if a:
                clean[v] = a
        self.entries = clean

    def __getitem__(self, v: ClassVector) -> Fraction:
        return self.entries.get(v, Fraction(0))

    def support(self) -> list[ClassVector]:
        return sorted(self.entries)

    def to_json(self):
        return {"mode": self.mode,
                "entries": [[v.s, *v.beta, v.r, a.numerator, a.denominator]
                            for v, a in sorted(self.entries.items())]}

    @classmethod
    def from_json(cls, d, curve_rank: int) -> "InvariantTable":
        entries = {}
        for row in d["entries"]:
            if len(row) != curve_rank + 4:
                raise ValueError(f"entry {row} does not have curve rank {curve_rank}")
            s, *beta, r, num, den = row
            entries[ClassVector(s, tuple(beta), r)] = Fraction(num, den)
        return cls(d["mode"], entries)


# combinatorics


def nondecr_surjections(l: int, lp: int) -> list[tuple[int, ...]]:
    """Nondecreasing surjections ``{0..l-1} -> {0..lp-1}`` as value tuples."""
    if not 1 <= lp <= l:
        return []
    out = []
    for cuts in combinations(range(1, l), lp - 1):
        vals, b = [], 0
        cut_set = set(cuts)
        for i in range(l):
            if i in cut_set:
                b += 1
            vals.append(b)
        out.append(tuple(vals))
    return out


def _blocks(psi: Sequence[int]) -> list[list[int]]:
    out: list[list[int]] = []
    for i, b in enumerate(psi):
        if b == len(out):
            out.append([])
        out[b].append(i)
    return out


def surjection_identity_check(l: int) -> Fraction:
    """``sum_psi (-1)^(l - l') prod_b 1/|psi^-1(b)|!`` over nondecreasing surjections."""
    if l < 1:
        raise ValueError("l must be at least 1")
    total = Fraction(0)
    for lp in range(1, l + 1):
        for psi in nondecr_surjections(l, lp):
            term = Fraction((-1) ** (l - lp))
            for blk in _blocks(psi):
                term /= factorial(len(blk))
            total += term
    return total


def binomial_collapse(l: int) -> Fraction:
    """``sum_{e=1}^{l} 1 / (2^(l-1) (e-1)! (l-e)!)``."""
    return sum((Fraction(1, 2 ** (l - 1) * factorial(e - 1) * factorial(l - e))
                for e in range(1, l + 1)), Fraction(0))


def s_coeff(vs: Sequence[ClassVector], tau: PhaseOracle, tau_prime: PhaseOracle) -> int:
    l = len(vs)
    if l == 0:
        raise ValueError("empty class list")
    r = 0
    for i in range(l - 1):
        left, right = class_sum(vs[:i + 1]), class_sum(vs[i + 1:])
        up = tau.le(vs[i], vs[i + 1])
        split = tau_prime.compare(left, right) == Order.GREATER
        if up and split:
            r += 1
        elif not up and not split:
            pass
        else:
            return 0
    return -1 if r % 2 else 1


def u_coeff(vs: Sequence[ClassVector], tau: PhaseOracle, tau_prime: PhaseOracle) -> Fraction:
    """Brute-force double sum over nondecreasing surjections ``psi``, ``xi``.

    The outer weight is ``(-1)^(l'' - 1) / l''``; it makes the single-part
    coefficient equal to ``1``.
    """
    l = len(vs)
    total = Fraction(0)
    for lp in range(1, l + 1):
        for psi in nondecr_surjections(l, lp):
            blocks = _blocks(psi)
            if any(not tau.eq(vs[blk[0]], vs[j]) for blk in blocks for j in blk[1:]):
                continue
            w = [class_sum([vs[j] for j in blk]) for blk in blocks]
            weight = Fraction(1)
            for blk in blocks:
                weight /= factorial(len(blk))
            for lpp in range(1, lp + 1):
                for xi in nondecr_surjections(lp, lpp):
                    groups = _blocks(xi)
                    sums = [class_sum([w[i] for i in g]) for g in groups]
                    if any(not tau_prime.eq(sums[0], s) for s in sums[1:]):
                        continue
                    prod = 1
                    for g in groups:
                        prod *= s_coeff([w[i] for i in g], tau, tau_prime)
                        if not prod:
                            break
                    if prod:
                        total += prod * weight * Fraction((-1) ** (lpp - 1), lpp)
    return total


def limit_coeffs(vs: Sequence[ClassVector], wall: WallGerm) -> tuple[int, Fraction]:
    """``S`` and ``U`` with ``tau = sigma_+`` and ``tau' = sigma_-``."""
    wall.validate(vs)
    return s_coeff(vs, wall.plus, wall.minus), u_coeff(vs, wall.plus, wall.minus)


def s_limit_closed_form(vs: Sequence[ClassVector], wall: WallGerm) -> int | None:
    """Predicted limit ``S`` for the two shapes with a closed form, else ``None``."""
    l = len(vs)
    if all(wall.in_W(v) for v in vs):
        return 1 if l == 1 else 0
    ranks = [v.r for v in vs]
    if ranks.count(1) == 1 and all(wall.family.in_gamma0(v) for v in vs if v.r == 0):
        e = ranks.index(1) + 1
        if all(wall.in_W(v) for v in vs if v.r == 0) and e in (1, 2):
            return (-1) ** (l - e)
        return 0
    return None


def uex_closed_form(vs: Sequence[ClassVector], wall: WallGerm) -> Fraction | None:
    """Predicted limit ``U``, or ``None`` outside the two shapes.

    With every class in ``W`` all phases agree on both sides, each ``S`` of
    two or more classes vanishes and ``U`` is ``[x^l] log(exp(x))``.
    """
    l = len(vs)
    if all(wall.in_W(v) for v in vs):
        return Fraction(1 if l == 1 else 0)
    ranks = [v.r for v in vs]
    if ranks.count(1) == 1 and all(wall.family.in_gamma0(v) for v in vs if v.r == 0):
        e = ranks.index(1) + 1
        if all(wall.in_W(v) for v in vs if v.r == 0):
            return Fraction((-1) ** (l - e), factorial(e - 1) * factorial(l - e))
        return Fraction(0)
    return None


# trees


@dataclass(frozen=True)
class OrientedTree:
    vertex_count: int
    edges: tuple  # pairs (i, j), i < j, zero-based

    def __post_init__(self):
        if len(self.edges) != max(self.vertex_count - 1, 0):
            raise ValueError("a tree on l vertices has l - 1 edges")
        parent = list(range(self.vertex_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.edges:
            if not 0 <= i < j < self.vertex_count:
                raise ValueError(f"edge {(i, j)} is not oriented low to high")
            ri, rj = find(i), find(j)
            if ri == rj:
                raise ValueError("edges contain a cycle")
            parent[ri] = rj


MAX_TREE_VERTICES = 8


def _prufer_decode(seq: Sequence[int], l: int) -> tuple:
    degree = [1] * l
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(l) if degree[i] == 1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [i for i in range(l) if degree[i] == 1]
    edges.append((u, w))
    return tuple(sorted(edges))


@lru_cache(maxsize=None)
def _tree_edge_array(l: int) -> np.ndarray:
    """Edge indices into the row-major ``l x l`` weight matrix, one row per tree.

    Every Pruefer sequence is decoded at once, column by column.
    """
    if l == 1:
        return np.zeros((1, 0), dtype=np.int64)
    if l == 2:
        return np.array([[1]], dtype=np.int64)
    seqs = np.indices([l] * (l - 2)).reshape(l - 2, -1).T
    count = seqs.shape[0]
    rows = np.arange(count)
    degree = np.ones((count, l), dtype=np.int64)
    for k in range(l - 2):
        np.add.at(degree, (rows, seqs[:, k]), 1)
    edges = np.empty((count, l - 1), dtype=np.int64)
    for k in range(l - 2):
        leaf = np.argmax(degree == 1, axis=1)
        x = seqs[:, k]
        edges[:, k] = np.minimum(leaf, x) * l + np.maximum(leaf, x)
        degree[rows, leaf] -= 1
        degree[rows, x] -= 1
    last = np.nonzero(degree == 1)[1].reshape(count, 2)
    edges[:, l - 2] = last[:, 0] * l + last[:, 1]
    return edges


def trees(l: int) -> list[OrientedTree]:
    """All labelled trees on ``l`` vertices, edges oriented from lower to higher label."""
    if l < 1:
        raise ValueError("l must be positive")
    if l > MAX_TREE_VERTICES:
        raise BudgetError(f"tree enumeration is limited to l <= {MAX_TREE_VERTICES}")
    arr = _tree_edge_array(l)
    return [OrientedTree(l, tuple(sorted((int(e) // l, int(e) % l) for e in row))) for row in arr]


def edge_weight(v: ClassVector, w: ClassVector, mode: str) -> int:
    chi = euler_pairing(v, w)
    if mode == "behrend":
        return -chi if chi % 2 else chi
    return chi


def _weight_matrix(vs: Sequence[ClassVector], mode: str) -> list[list[int]]:
    l = len(vs)
    m = [[0] * l for _ in range(l)]
    for i in range(l):
        for j in range(i + 1, l):
            m[i][j] = edge_weight(vs[i], vs[j], mode)
    return m


def _connected(m: list[list[int]]) -> bool:
    """Whether the nonzero entries of the upper-triangular ``m`` connect all vertices."""
    l = len(m)
    seen, stack = {0}, [0]
    while stack:
        x = stack.pop()
        for y in range(l):
            if y not in seen and (m[min(x, y)][max(x, y)] if x != y else 0):
                seen.add(y)
                stack.append(y)
    return len(seen) == l


def tree_weight(vs: Sequence[ClassVector], mode: str = "euler") -> int:
    """``sum_G prod_{i -> j in G} w(v_i, v_j)`` by enumerating every tree."""
    l = len(vs)
    if l > MAX_TREE_VERTICES:
        raise BudgetError(f"tree enumeration is limited to l <= {MAX_TREE_VERTICES}")
    if l == 1:
        return 1
    m = _weight_matrix(vs, mode)
    if not _connected(m):
        return 0
    flat = np.array([x for row in m for x in row], dtype=np.int64)
    edges = _tree_edge_array(l)
    big = max(int(np.abs(flat).max()), 1)
    if big ** (l - 1) * len(edges) < 2 ** 62:
        return int(flat[edges].prod(axis=1).sum())
    total = 0
    for row in edges:
        p = 1
        for e in row:
            p *= int(flat[e])
        total += p
    return total


def _det(mat: list[list[int]]) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    a = [row[:] for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def kirchhoff_tree_weight(vs: Sequence[ClassVector], mode: str = "euler") -> int:
    """Same sum as :func:`tree_weight` from a cofactor of the weighted Laplacian."""
    l = len(vs)
    m = _weight_matrix(vs, mode)
    lap = [[0] * l for _ in range(l)]
    for i in range(l):
        for j in range(i + 1, l):
            w = m[i][j]
            lap[i][j] -= w
            lap[j][i] -= w
            lap[i][i] += w
            lap[j][j] += w
    return _det([row[1:] for row in lap[1:]])


# the transformation


def _ordered_sums(v: ClassVector, pool: Sequence[ClassVector],
                  feasible: Callable[[ClassVector], bool]) -> list[tuple]:
    """Ordered tuples from ``pool`` summing to ``v``; ``feasible`` must cut off every infinite branch."""
    out: list[tuple] = []

    def rec(rest: ClassVector, acc: list):
        if rest.is_zero():
            out.append(tuple(acc))
            return
        if not feasible(rest):
            return
        for w in pool:
            acc.append(w)
            rec(rest - w, acc)
            acc.pop()

    rec(v, [])
    return out


def transform(J: InvariantTable, v: ClassVector, tau: PhaseOracle, tau_prime: PhaseOracle,
              window: Window | None, *, mode: str | None = None, sigma: PhaseOracle | None = None,
              domain: Iterable[ClassVector] | None = None, tree_sum: str = "auto",
              max_l: int = 12, max_terms: int = 2_000_000,
              max_trees: int = 8 ** 6) -> Fraction:
    """``J^v(tau')`` from the table ``J = J(tau)``.

    The sum runs over ordered decompositions ``v = v_1 + ... + v_l`` into
    window classes with nonzero ``J``.  ``sigma`` restricts the parts to the
    phase of ``v`` at a base point (the limit of small ``eps``), and ``domain``
    to an explicit finite set.  ``tree_sum`` is ``"enumerate"``,
    ``"kirchhoff"`` or ``"auto"`` (enumerate up to eight vertices).
    """
    if window is None:
        raise ValueError("transform needs a window")
    mode = J.mode if mode is None else mode
    _check_mode(mode)
    if mode != J.mode:
        raise ValueError(f"table has mode {J.mode!r} but formula {mode!r} was requested")
    if tree_sum not in ("enumerate", "kirchhoff", "auto"):
        raise ValueError(f"unknown tree_sum {tree_sum!r}")
    if v.r not in (0, 1) or not window.class_in_window(v):
        raise ValueError(f"target {v} is not a rank 0/1 class of the window")
    allowed = set(domain) if domain is not None else None
    pool = []
    for w in J.support():
        if not window.class_in_window(w):
            continue
        if allowed is not None and w not in allowed:
            continue
        if sigma is not None and not sigma.eq(w, v):
            continue
        if w.r > v.r:
            continue
        pool.append(w)

    m_min = window.m_min

    def feasible(rest: ClassVector) -> bool:
        # rank-zero parts have degree n + |beta| >= 1 and a rank-one part has degree >= m_min
        if rest.r not in (0, 1) or any(b > 0 for b in rest.beta):
            return False
        if rest.r == 0:
            return rest.s <= 0
        return rest.n + sum(rest.curve) >= m_min

    decomps = _ordered_sums(v, pool, feasible)
    if len(decomps) > max_terms:
        raise BudgetError(f"{len(decomps)} decompositions exceed the budget {max_terms}")
    total = Fraction(0)
    for vs in decomps:
        if sum(w.r for w in vs) > 1:
            raise ValueError("a decomposition has two rank-one parts")
        l = len(vs)
        if l > max_l:
            raise BudgetError(f"decomposition length {l} exceeds max_l = {max_l}")
        n_trees = l ** (l - 2) if l >= 2 else 1
        if tree_sum == "enumerate" and n_trees > max_trees:
            raise BudgetError(f"{n_trees} trees on {l} vertices exceed max_trees = {max_trees}")
        use_enum = tree_sum == "enumerate" or (
            tree_sum == "auto" and l <= MAX_TREE_VERTICES and n_trees <= max_trees)
        tw = tree_weight(vs, mode) if use_enum else kirchhoff_tree_weight(vs, mode)
        if not tw:
            continue
        u = u_coeff(vs, tau, tau_prime)
        if not u:
            continue
        term = u * tw / 2 ** (l - 1)
        for w in vs:
            term *= J[w]
        total += term
    return total


def _degree_weight(n: int, mode: str) -> int:
    """``n`` in Euler mode, ``(-1)^(n-1) n`` in Behrend mode (kept integral for ``n = 0``)."""
    if mode == "euler" or n % 2:
        return n
    return -n


def _nb_sequences(target: tuple, parts: Sequence[tuple], n_floor: int) -> list[tuple]:
    out = []

    def rec(rest, acc):
        out.append((tuple(acc), rest))
        for p in parts:
            n, b = rest[0] - p[0], tuple(x - y for x, y in zip(rest[1], p[1]))
            if any(x < 0 for x in b) or n < n_floor:
                continue
            acc.append(p)
            rec((n, b), acc)
            acc.pop()

    rec(target, [])
    return out


def dt_closed_form(n_hat: Mapping[tuple, object], dt_plus: Mapping[tuple, object],
                   n: int, beta: Sequence[int], mode: str = "euler",
                   n_floor: int | None = None) -> Fraction:
    """``DT_{n, beta}(sigma_-) = sum 1/(l-1)! prod_i w(n_i) N_{n_i, beta_i} DT_{n_l, beta_l}(sigma_+)``.

    ``n_hat`` is keyed by the ``(n, beta)`` of the wall classes, ``dt_plus`` by
    ``(n, beta)``.  The weight ``w(n_i)`` is ``n_i`` or ``(-1)^(n_i - 1) n_i``.
    Remainders with ``n`` below ``n_floor`` (default: the least ``n`` in
    ``dt_plus``) are not explored.
    """
    _check_mode(mode)
    parts = [k for k, a in n_hat.items() if Fraction(a)]
    for k in parts:
        if k[0] < 0 or any(b < 0 for b in k[1]) or k[0] + sum(k[1]) <= 0:
            raise ValueError(f"wall class {k} must be a nonzero class of T")
    if n_floor is None:
        n_floor = min((k[0] for k in dt_plus), default=0)
    total = Fraction(0)
    for seq, rest in _nb_sequences((n, tuple(beta)), parts, n_floor):
        d = Fraction(dt_plus.get(rest, 0))
        if not d:
            continue
        term = d / factorial(len(seq))
        for ni, bi in seq:
            w = _degree_weight(ni, mode)
            term *= w * Fraction(n_hat[(ni, bi)])
        total += term
    return total


def nhat_invariance_check(J: InvariantTable, points: Sequence[PhaseOracle],
                          window: Window, classes: Iterable[ClassVector] | None = None) -> bool:
    """Every pair of points leaves a table supported on rank-zero classes unchanged."""
    if any(w.r != 0 for w in J.support()):
        raise ValueError("table must be supported on rank-zero classes")
    targets = list(classes) if classes is not None else J.support()
    for tau in points:
        for tau_p in points:
            for v in targets:
                if transform(J, v, tau, tau_p, window) != J[v]:
                    return False
    return True


# generating series


def wall_exponent(N_table: Mapping[tuple, object], wall_classes: Iterable[ClassVector],
                  mode: str, window: Window,
                  in_gamma0_fn: Callable[[ClassVector], bool] = in_gamma0) -> MonoidSeries:
    _check_mode(mode)
    coeffs: dict = {}
    for v in wall_classes:
        if not in_gamma0_fn(v):
            raise ValueError(f"wall class {v} is not in Gamma_0")
        n, beta = v.nb
        if n < 0 or any(b < 0 for b in beta) or (n == 0 and not any(beta)):
            raise ValueError(f"wall class {v} is not a nonzero class of T")
        if not window.retains(n, beta, "T"):
            continue
        nn = Fraction(N_table.get((n, beta), 0))
        w = _degree_weight(n, mode)
        coeffs[(n, beta)] = coeffs.get((n, beta), 0) + w * nn
    return MonoidSeries(window, coeffs, "T")


def wall_product(N_table: Mapping[tuple, object], wall_classes: Iterable[ClassVector],
                 mode: str, window: Window, exponent: int = 1,
                 in_gamma0_fn: Callable[[ClassVector], bool] = in_gamma0) -> MonoidSeries:
    """``prod_{v in W} exp(w(n) N_{n, beta} x^n y^beta)^exponent`` as a T-series."""
    return exp_series(wall_exponent(N_table, wall_classes, mode, window, in_gamma0_fn)
                      .scale(exponent))


def gamma0_window_classes(window: Window) -> list[ClassVector]:
    zero = window.config.zero_curve
    return [ClassVector.from_nb(n, zero, 0) for n in range(1, window.t_cut)]


def path_transport(series: MonoidSeries, path: ChargePath, N_table: Mapping[tuple, object],
                   mode: str, window: Window, series0: MonoidSeries | None = None):
    """Carry ``DT(sigma)`` (and optionally ``DT_0(sigma)``) along a good path.

    Each crossing multiplies by the wall factor raised to its sign.  Returns
    ``(result, result0, crossings)``.
    """
    if series.window != window:
        raise SeriesError("series and window disagree")
    crossings = find_walls(path, gamma0_window_classes(window))
    out, out0 = series, series0
    for c in crossings:
        factor = wall_product(N_table, c.classes, mode, window, exponent=c.epsilon)
        out = out * factor
        if out0 is not None:
            out0 = out0 * factor
    return out, out0, crossings


def nhat_closed_form(n: int, chi: int, mode: str = "euler") -> Fraction:
    """``sum_{r | n} chi / r^2``, negated in the Behrend convention."""
    _check_mode(mode)
    if n < 1:
        raise ValueError("n must be positive")
    val = sum((Fraction(chi, r * r) for r in range(1, n + 1) if n % r == 0), Fraction(0))
    return val if mode == "euler" else -val


def default_n_table(chi: int, mode: str, window: Window) -> dict:
    zero = window.config.zero_curve
    return {(n, zero): nhat_closed_form(n, chi, mode) for n in range(1, window.t_cut)}


def dtpt_check(pt: MonoidSeries, chi: int, mode: str = "euler",
               n_table: Mapping[tuple, object] | None = None,
               path: ChargePath | None = None) -> dict:
    """Build ``DT`` and ``DT_0`` from ``PT`` across the wall and compare ``DT / DT_0`` with ``PT``.

    Without a path the single wall factor is applied once; with a path the
    series is transported along it (which must end in the DT chamber).
    """
    _check_mode(mode)
    w = pt.window
    if pt.mode != "S":
        raise SeriesError("the PT series must be an S-series")
    zero = w.config.zero_curve
    pt0 = {k: a for k, a in pt.items() if k[1] == zero}
    if pt0 != {(0, zero): 1}:
        raise ValueError("the beta = 0 part of PT must be exactly 1")
    n_table = dict(default_n_table(chi, mode, w) if n_table is None else n_table)
    one = MonoidSeries.one(w)
    if path is None:
        factor = wall_product(n_table, gamma0_window_classes(w), mode, w)
        dt, dt0, crossings = pt * factor, one * factor, []
    else:
        dt, dt0, crossings = path_transport(pt, path, n_table, mode, w, one)
    reduced = divide(dt, dt0)
    mismatch = None
    for idx in w.indices("S"):
        if reduced[idx] != pt[idx]:
            mismatch = {"index": [idx[0], list(idx[1])], "reduced": str(reduced[idx]),
                        "pt": str(pt[idx])}
            break
    sign = 1 if mode == "euler" else -1
    macm = macmahon(sign, chi, w)
    degree_zero_ok = dt0 == macm if n_table == default_n_table(chi, mode, w) else None
    return {
        "ok": mismatch is None and degree_zero_ok is not False,
        "mode": mode,
        "chi": chi,
        "first_mismatch": mismatch,
        "degree_zero_matches_macmahon": degree_zero_ok,
        "crossings": [c.to_json() for c in crossings],
        "dt": dt,
        "dt0": dt0,
        "reduced": reduced,
    }

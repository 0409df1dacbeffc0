"""Representations of small acyclic quivers over a prime field.

This is a finite-length abelian category in which subobjects can be listed
outright, so stability and Harder-Narasimhan filtrations can be checked by
exhaustion.  Subquotients are handled as intervals ``[A, B]`` of subreps of a
fixed ambient representation; their classes are dimension vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Sequence

from .stability import GaussRational, Order, phase_cmp

__all__ = [
    "Quiver", "QuiverRep", "WeakStabilityFn", "Subrep", "SubrepLattice", "BoundError",
    "subspaces", "all_subreps", "charge_of", "is_semistable", "hn_filtration",
    "all_hn_filtrations", "hom_dimension", "hom_brute_force", "all_reps",
]

Vector = tuple
Matrix = tuple  # tuple of rows


class BoundError(ValueError):
    """Enumeration would exceed the configured dimension bound."""


@dataclass(frozen=True)
class Quiver:
    vertex_count: int
    arrows: tuple

    def __post_init__(self):
        arrows = tuple((int(s), int(t)) for s, t in self.arrows)
        for s, t in arrows:
            if not (0 <= s < t < self.vertex_count):
                raise ValueError(f"arrow {s}->{t} must satisfy 0 <= source < target < N")
        object.__setattr__(self, "arrows", arrows)


def _mat_vec(m: Matrix, v: Vector, p: int) -> Vector:
    return tuple(sum(a * b for a, b in zip(row, v)) % p for row in m)


def _mat_mul(a: Matrix, b: Matrix, p: int, inner: int, cols: int) -> Matrix:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(inner)) % p for j in range(cols))
                 for i in range(len(a)))


@dataclass(frozen=True)
class QuiverRep:
    quiver: Quiver
    dims: tuple
    maps: tuple  # one (dims[t] x dims[s]) matrix per arrow
    p: int = 2

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != self.quiver.vertex_count or any(d < 0 for d in dims):
            raise ValueError("dimension vector does not match the quiver")
        maps = tuple(tuple(tuple(int(x) % self.p for x in row) for row in m) for m in self.maps)
        if len(maps) != len(self.quiver.arrows):
            raise ValueError("one matrix per arrow is required")
        for (s, t), m in zip(self.quiver.arrows, maps):
            if len(m) != dims[t] or any(len(row) != dims[s] for row in m):
                raise ValueError(f"matrix for arrow {s}->{t} has the wrong shape")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "maps", maps)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @classmethod
    def simple(cls, quiver: Quiver, j: int, p: int = 2) -> "QuiverRep":
        dims = tuple(1 if i == j else 0 for i in range(quiver.vertex_count))
        maps = tuple(tuple(() for _ in range(dims[t])) for s, t in quiver.arrows)
        return cls(quiver, dims, maps, p)

    @classmethod
    def from_flat(cls, quiver: Quiver, dims, flat_maps, p: int = 2) -> "QuiverRep":
        """Matrices given as row-major flat integer lists."""
        maps = []
        for (s, t), flat in zip(quiver.arrows, flat_maps):
            rows, cols = dims[t], dims[s]
            if len(flat) != rows * cols:
                raise ValueError(f"arrow {s}->{t}: expected {rows * cols} entries")
            maps.append(tuple(tuple(flat[i * cols:(i + 1) * cols]) for i in range(rows)))
        return cls(quiver, tuple(dims), tuple(maps), p)

    def direct_sum(self, other: "QuiverRep") -> "QuiverRep":
        dims = tuple(a + b for a, b in zip(self.dims, other.dims))
        maps = []
        for (s, t), m1, m2 in zip(self.quiver.arrows, self.maps, other.maps):
            rows = [tuple(r) + (0,) * other.dims[s] for r in m1]
            rows += [(0,) * self.dims[s] + tuple(r) for r in m2]
            maps.append(tuple(rows))
        return QuiverRep(self.quiver, dims, tuple(maps), self.p)


@dataclass(frozen=True)
class WeakStabilityFn:
    """Per-vertex directions ``u_j`` in ``H`` and per-vertex filtration levels.

    The charge of a dimension vector only sees the vertices of the top level
    that occurs in it.  Levels default to ``j`` at vertex ``j``.
    """

    directions: tuple
    levels: tuple | None = None

    def __post_init__(self):
        for u in self.directions:
            if not u.in_half_plane():
                raise ValueError(f"direction {u} must lie in the upper half plane or on the negative reals")
        if self.levels is None:
            object.__setattr__(self, "levels", tuple(range(len(self.directions))))
        elif len(self.levels) != len(self.directions):
            raise ValueError("one level per vertex is required")

    def charge(self, dims: Sequence[int]) -> GaussRational:
        present = [self.levels[j] for j, d in enumerate(dims) if d]
        if not present:
            raise ValueError("the zero object has no charge")
        top = max(present)
        z = GaussRational(0, 0)
        for j, d in enumerate(dims):
            if d and self.levels[j] == top:
                z = z + self.directions[j].scale(d)
        return z

    def compare(self, a: Sequence[int], b: Sequence[int]) -> Order:
        return phase_cmp(self.charge(a), self.charge(b))


def charge_of(M: "QuiverRep | Sequence[int]", Z: WeakStabilityFn) -> GaussRational:
    dims = M.dims if isinstance(M, QuiverRep) else tuple(M)
    return Z.charge(dims)


# linear algebra over F_p


def _rref(rows: list[list[int]], p: int) -> list[list[int]]:
    rows = [list(r) for r in rows]
    out, col = [], 0
    ncols = len(rows[0]) if rows else 0
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][col], p - 2, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        r += 1
    out = [row for row in rows[:r]]
    return out


def rank_mod_p(rows: list[list[int]], p: int) -> int:
    if not rows:
        return 0
    return len(_rref(rows, p))


def _span(basis: Sequence[Vector], d: int, p: int) -> frozenset:
    vecs = set()
    for coeffs in product(range(p), repeat=len(basis)):
        vecs.add(tuple(sum(c * b[i] for c, b in zip(coeffs, basis)) % p for i in range(d)))
    if not basis:
        vecs.add((0,) * d)
    return frozenset(vecs)


def subspaces(d: int, p: int) -> list[frozenset]:
    """Every subspace of ``F_p^d`` as the frozenset of its vectors, from reduced echelon forms."""
    out = []
    for k in range(d + 1):
        for pivots in combinations(range(d), k):
            free = [(i, c) for i, pc in enumerate(pivots) for c in range(pc + 1, d)
                    if c not in pivots]
            for vals in product(range(p), repeat=len(free)):
                rows = [[0] * d for _ in range(k)]
                for i, pc in enumerate(pivots):
                    rows[i][pc] = 1
                for (i, c), x in zip(free, vals):
                    rows[i][c] = x
                out.append(_span([tuple(r) for r in rows], d, p))
    return out


@dataclass(frozen=True)
class Subrep:
    """A subrepresentation, stored as one subspace (set of vectors) per vertex."""

    spaces: tuple
    dims: tuple

    def __le__(self, other: "Subrep") -> bool:
        return all(a <= b for a, b in zip(self.spaces, other.spaces))

    def __lt__(self, other: "Subrep") -> bool:
        return self <= other and self != other


def _log_size(n: int, p: int) -> int:
    k = 0
    while n > 1:
        n //= p
        k += 1
    return k


def all_subreps(M: QuiverRep, bound: int = 6) -> list[Subrep]:
    """All subrepresentations of ``M``, sorted by total dimension then dimension vector."""
    if M.total_dim > bound:
        raise BoundError(f"total dimension {M.total_dim} exceeds the bound {bound}")
    per_vertex = [subspaces(d, M.p) for d in M.dims]
    out = []
    for choice in product(*per_vertex):
        ok = True
        for (s, t), m in zip(M.quiver.arrows, M.maps):
            if any(_mat_vec(m, v, M.p) not in choice[t] for v in choice[s]):
                ok = False
                break
        if ok:
            dims = tuple(_log_size(len(U), M.p) for U in choice)
            out.append(Subrep(tuple(choice), dims))
    out.sort(key=lambda S: (sum(S.dims), S.dims, tuple(sorted(map(sorted, S.spaces)))))
    return out


def _minus(a: Sequence[int], b: Sequence[int]) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


class SubrepLattice:
    """The subrep lattice of ``M`` with interval (subquotient) stability tests."""

    def __init__(self, M: QuiverRep, Z: WeakStabilityFn, bound: int = 6):
        self.M, self.Z = M, Z
        self.subs = all_subreps(M, bound)
        self.index = {S: i for i, S in enumerate(self.subs)}
        n = len(self.subs)
        self.below = [[j for j in range(n) if self.subs[j] < self.subs[i]] for i in range(n)]
        self.bottom = 0
        self.top = n - 1
        self._ss: dict = {}

    def dims(self, a: int, b: int) -> tuple:
        return _minus(self.subs[b].dims, self.subs[a].dims)

    def between(self, a: int, b: int) -> list[int]:
        """Indices ``c`` with ``a < c < b``."""
        return [c for c in self.below[b] if self.subs[a] < self.subs[c]]

    def semistable(self, a: int, b: int) -> bool:
        """Is the subquotient ``subs[b] / subs[a]`` semistable?  Compares every sub against its quotient."""
        key = (a, b)
        if key not in self._ss:
            ok = a != b
            if ok:
                for c in self.between(a, b):
                    if self.Z.compare(self.dims(a, c), self.dims(c, b)) == Order.GREATER:
                        ok = False
                        break
            self._ss[key] = ok
        return self._ss[key]

    def greedy_hn(self, a: int | None = None) -> list[int]:
        """Chain ``a = E_0 < E_1 < ... < E_k = top`` from repeated extraction of the first factor.

        Among semistable subobjects of the current quotient, take those of
        maximal phase, then the one of largest total dimension, then the
        lexicographically largest dimension vector.
        """
        a = self.bottom if a is None else a
        chain = [a]
        while chain[-1] != self.top:
            cur = chain[-1]
            cands = [c for c in self.below[self.top] + [self.top]
                     if self.subs[cur] < self.subs[c] and self.semistable(cur, c)]
            best = None
            for c in cands:
                if best is None:
                    best = c
                    continue
                order = self.Z.compare(self.dims(cur, c), self.dims(cur, best))
                if order == Order.GREATER:
                    best = c
                elif order == Order.EQUAL:
                    kc, kb = self.dims(cur, c), self.dims(cur, best)
                    if (sum(kc), kc) > (sum(kb), kb):
                        best = c
            chain.append(best)
        return chain

    def all_hn(self, limit: int = 100000) -> list[list[int]]:
        """Every chain whose factors are semistable with strictly decreasing phases."""
        out: list[list[int]] = []

        def rec(chain):
            if len(out) > limit:
                raise BoundError("too many filtrations")
            cur = chain[-1]
            if cur == self.top:
                out.append(list(chain))
                return
            for c in self.below[self.top] + [self.top]:
                if not (self.subs[cur] < self.subs[c]) or not self.semistable(cur, c):
                    continue
                if len(chain) >= 2:
                    prev = self.dims(chain[-2], cur)
                    if self.Z.compare(prev, self.dims(cur, c)) != Order.GREATER:
                        continue
                chain.append(c)
                rec(chain)
                chain.pop()

        rec([self.bottom])
        return out

    def factors(self, chain: Sequence[int]) -> list[tuple]:
        return [self.dims(a, b) for a, b in zip(chain, chain[1:])]


def is_semistable(M: QuiverRep, Z: WeakStabilityFn, bound: int = 6) -> bool:
    if M.total_dim == 0:
        raise ValueError("the zero object is not semistable by convention")
    L = SubrepLattice(M, Z, bound)
    return L.semistable(L.bottom, L.top)


def hn_filtration(M: QuiverRep, Z: WeakStabilityFn, bound: int = 6) -> list[tuple]:
    """Dimension vectors of the HN factors of ``M``, in order of decreasing phase."""
    if M.total_dim == 0:
        return []
    L = SubrepLattice(M, Z, bound)
    return L.factors(L.greedy_hn())


def all_hn_filtrations(M: QuiverRep, Z: WeakStabilityFn, bound: int = 6) -> list[list[tuple]]:
    if M.total_dim == 0:
        return [[]]
    L = SubrepLattice(M, Z, bound)
    return [L.factors(c) for c in L.all_hn()]


# morphisms


def _hom_equations(A: QuiverRep, B: QuiverRep) -> tuple[list[list[int]], int]:
    """Linear equations on the entries of ``(f_j : A_j -> B_j)`` for ``f_t A_a = B_a f_s``."""
    offs, n = [], 0
    for j in range(A.quiver.vertex_count):
        offs.append(n)
        n += B.dims[j] * A.dims[j]
    p = A.p
    eqs = []
    for (s, t), ma, mb in zip(A.quiver.arrows, A.maps, B.maps):
        # entry (i, k) of f_t A_a - B_a f_s, with i < dim B_t and k < dim A_s
        for i in range(B.dims[t]):
            for k in range(A.dims[s]):
                row = [0] * n
                for m in range(A.dims[t]):
                    row[offs[t] + i * A.dims[t] + m] += ma[m][k]
                for m in range(B.dims[s]):
                    row[offs[s] + m * A.dims[s] + k] -= mb[i][m]
                eqs.append([x % p for x in row])
    return eqs, n


def hom_dimension(A: QuiverRep, B: QuiverRep) -> int:
    """``dim Hom(A, B)`` over ``F_p`` by Gaussian elimination."""
    if A.quiver != B.quiver or A.p != B.p:
        raise ValueError("representations of different quivers or fields")
    eqs, n = _hom_equations(A, B)
    return n - rank_mod_p(eqs, A.p) if eqs else n


def hom_brute_force(A: QuiverRep, B: QuiverRep, limit: int = 1 << 16) -> int:
    """Number of morphisms ``A -> B``, by trying every family of matrices."""
    p = A.p
    shapes = [(B.dims[j], A.dims[j]) for j in range(A.quiver.vertex_count)]
    n = sum(r * c for r, c in shapes)
    if p ** n > limit:
        raise BoundError("too many candidate morphisms")
    count = 0
    for flat in product(range(p), repeat=n):
        fs, pos = [], 0
        for r, c in shapes:
            fs.append(tuple(tuple(flat[pos + i * c:pos + (i + 1) * c]) for i in range(r)))
            pos += r * c
        ok = True
        for (s, t), ma, mb in zip(A.quiver.arrows, A.maps, B.maps):
            lhs = _mat_mul(fs[t], ma, p, A.dims[t], A.dims[s])
            rhs = _mat_mul(mb, fs[s], p, B.dims[s], A.dims[s])
            if lhs != rhs:
                ok = False
                break
        count += ok
    return count


def all_reps(quiver: Quiver, max_total: int, p: int = 2, min_total: int = 1) -> Iterator[QuiverRep]:
    """Every representation with ``min_total <= total dimension <= max_total``."""
    N = quiver.vertex_count
    for dims in product(range(max_total + 1), repeat=N):
        if not (min_total <= sum(dims) <= max_total):
            continue
        sizes = [dims[t] * dims[s] for s, t in quiver.arrows]
        for flat in product(range(p), repeat=sum(sizes)):
            chunks, pos = [], 0
            for k in sizes:
                chunks.append(flat[pos:pos + k])
                pos += k
            yield QuiverRep.from_flat(quiver, dims, chunks, p)

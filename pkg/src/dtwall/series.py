"""Truncated series in the completed monoid algebras ``C[[S]]`` and ``C[[T]]``.

A :class:`MonoidSeries` stores finitely many exact rational coefficients
``a_{n, beta}`` of ``x^n y^beta`` inside the retained index set of a
:class:`~dtwall.lattice.Window`.  ``T``-series form a ring; ``S``-series are
only a module over it, so ``S * S`` is refused.

Exponential, logarithm and inversion use the degree derivation
``D(x^n y^beta) = (n + |beta|) x^n y^beta``, which is positive on every
nonconstant ``T``-index.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .lattice import ClassVector, Curve, LatticeConfig, Window

__all__ = [
    "MonoidSeries", "Window", "SeriesError", "exp_series", "log_series", "inverse",
    "divide", "power", "infinite_product", "macmahon", "beta_zero_part",
    "epsilon_from_delta", "delta_from_epsilon", "window_from_json",
]

Index = tuple  # (n, beta)


class SeriesError(ValueError):
    """Illegal series operation: window mismatch, support violation, bad constant term."""


def _deg(idx: Index) -> int:
    return idx[0] + sum(idx[1])


def _add_idx(a: Index, b: Index) -> Index:
    return (a[0] + b[0], tuple(x + y for x, y in zip(a[1], b[1])))


def _sub_idx(a: Index, b: Index) -> Index:
    return (a[0] - b[0], tuple(x - y for x, y in zip(a[1], b[1])))


class MonoidSeries:
    """Finite truncation of an element of ``C[[S]]`` (mode ``"S"``) or ``C[[T]]`` (mode ``"T"``)."""

    __slots__ = ("window", "mode", "_c")

    def __init__(self, window: Window, coeffs: Mapping[Index, object] | None = None,
                 mode: str = "T"):
        if mode not in ("S", "T"):
            raise SeriesError(f"unknown support mode {mode!r}")
        self.window = window
        self.mode = mode
        c = {}
        for (n, beta), a in (coeffs or {}).items():
            idx = (int(n), tuple(int(b) for b in beta))
            if not window.retains(*idx, mode):
                raise SeriesError(f"index {idx} is not retained by the {mode}-window")
            a = Fraction(a)
            if a:
                c[idx] = a
        self._c = c

    @classmethod
    def _raw(cls, window: Window, c: dict, mode: str) -> "MonoidSeries":
        out = cls.__new__(cls)
        out.window, out.mode, out._c = window, mode, c
        return out

    # construction

    @classmethod
    def zero(cls, window: Window, mode: str = "T") -> "MonoidSeries":
        return cls._raw(window, {}, mode)

    @classmethod
    def one(cls, window: Window, mode: str = "T") -> "MonoidSeries":
        return cls.monomial(window, 0, window.config.zero_curve, 1, mode)

    @classmethod
    def monomial(cls, window: Window, n: int, beta: Sequence[int], coeff=1,
                 mode: str = "T") -> "MonoidSeries":
        beta = tuple(beta)
        if not window.retains(n, beta, mode):
            return cls.zero(window, mode)
        return cls(window, {(n, beta): coeff}, mode)

    @classmethod
    def from_function(cls, window: Window, fn: Callable[[int, Curve], object],
                      mode: str = "T") -> "MonoidSeries":
        return cls(window, {idx: fn(*idx) for idx in window.indices(mode)}, mode)

    # access

    def __getitem__(self, idx: Index) -> Fraction:
        n, beta = idx
        return self._c.get((n, tuple(beta)), Fraction(0))

    def items(self):
        return sorted(self._c.items())

    def support(self) -> list[Index]:
        return sorted(self._c)

    @property
    def constant(self) -> Fraction:
        return self[(0, self.window.config.zero_curve)]

    def __len__(self):
        return len(self._c)

    def __eq__(self, other):
        if not isinstance(other, MonoidSeries):
            return NotImplemented
        return self.window == other.window and self.mode == other.mode and self._c == other._c

    def __hash__(self):
        return hash((self.mode, tuple(sorted(self._c.items()))))

    def __repr__(self):
        terms = " + ".join(f"{a}*x^{n}y^{list(b)}" for (n, b), a in self.items()) or "0"
        return f"MonoidSeries[{self.mode}]({terms})"

    # arithmetic

    def _check_window(self, other: "MonoidSeries"):
        if self.window != other.window:
            raise SeriesError("series live on different windows")

    def __add__(self, other: "MonoidSeries") -> "MonoidSeries":
        self._check_window(other)
        mode = "S" if "S" in (self.mode, other.mode) else "T"
        c = {}
        for src in (self, other):
            for idx, a in src._c.items():
                if self.window.retains(*idx, mode):
                    c[idx] = c.get(idx, 0) + a
        return MonoidSeries._raw(self.window, {k: v for k, v in c.items() if v}, mode)

    def __neg__(self) -> "MonoidSeries":
        return MonoidSeries._raw(self.window, {k: -v for k, v in self._c.items()}, self.mode)

    def __sub__(self, other: "MonoidSeries") -> "MonoidSeries":
        return self + (-other)

    def scale(self, a) -> "MonoidSeries":
        a = Fraction(a)
        if not a:
            return MonoidSeries.zero(self.window, self.mode)
        return MonoidSeries._raw(self.window, {k: a * v for k, v in self._c.items()}, self.mode)

    def __mul__(self, other) -> "MonoidSeries":
        if not isinstance(other, MonoidSeries):
            return self.scale(other)
        self._check_window(other)
        if self.mode == "S" and other.mode == "S":
            raise SeriesError("C[[S]] is only a C[[T]]-module; S * S is undefined")
        mode = "S" if "S" in (self.mode, other.mode) else "T"
        w = self.window
        c: dict = {}
        for i1, a1 in self._c.items():
            for i2, a2 in other._c.items():
                idx = _add_idx(i1, i2)
                if w.retains(*idx, mode):
                    c[idx] = c.get(idx, 0) + a1 * a2
        return MonoidSeries._raw(w, {k: v for k, v in c.items() if v}, mode)

    __rmul__ = __mul__

    def as_mode(self, mode: str) -> "MonoidSeries":
        """Re-tag a T-series as an S-series (dropping indices beyond ``k_cut``) or back."""
        if mode == self.mode:
            return self
        if mode == "T" and any(n < 0 for n, _ in self._c):
            raise SeriesError("series has indices outside T")
        c = {k: v for k, v in self._c.items() if self.window.retains(*k, mode)}
        if mode == "T" and len(c) != len(self._c):
            raise SeriesError("series has indices outside the T-window")
        return MonoidSeries._raw(self.window, c, mode)

    def project(self, smaller: Window) -> "MonoidSeries":
        """The projection onto a nested window, dropping the discarded coefficients."""
        if not self.window.contains(smaller):
            raise SeriesError("target window is not nested in the source window")
        c = {k: v for k, v in self._c.items() if smaller.retains(*k, self.mode)}
        return MonoidSeries._raw(smaller, c, self.mode)

    def substitute_sign(self, sign: int) -> "MonoidSeries":
        """``f(sign * x, y)``."""
        if sign not in (1, -1):
            raise SeriesError("sign must be +1 or -1")
        return MonoidSeries._raw(self.window,
                                 {(n, b): a * sign ** n for (n, b), a in self._c.items()},
                                 self.mode)

    # serialization

    def to_json(self) -> dict:
        w = self.window
        return {
            "window": window_to_json(w),
            "mode": self.mode,
            "coeffs": [[n, list(b), a.numerator, a.denominator] for (n, b), a in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MonoidSeries":
        w = window_from_json(data["window"])
        coeffs = {(n, tuple(b)): Fraction(num, den) for n, b, num, den in data["coeffs"]}
        return cls(w, coeffs, data.get("mode", "T"))

    def to_tsv(self) -> str:
        k = self.window.config.curve_rank
        head = ["n"] + [f"beta{j}" for j in range(k)] + ["coeff"]
        lines = ["\t".join(head)]
        for (n, b), a in self.items():
            lines.append("\t".join([str(n), *map(str, b), str(a)]))
        return "\n".join(lines) + "\n"


def window_to_json(w: Window) -> dict:
    cfg = w.config
    out = {"k_cut": w.k_cut, "beta_cut": list(w.beta_cut), "curve_rank": cfg.curve_rank,
           "chi_X": cfg.chi_X}
    if cfg.m_table is not None:
        out["m_table"] = [[list(b), m] for b, m in sorted(cfg.m_table.items())]
    else:
        out["m_slope"] = [cfg.m_slope.numerator, cfg.m_slope.denominator]
    return out


def window_from_json(d: Mapping) -> Window:
    table = None
    if "m_table" in d:
        table = {tuple(b): m for b, m in d["m_table"]}
    slope = Fraction(*d["m_slope"]) if "m_slope" in d else Fraction(0)
    cfg = LatticeConfig(d.get("curve_rank", len(d["beta_cut"])), d.get("chi_X", 0), table, slope)
    return Window(d["k_cut"], tuple(d["beta_cut"]), cfg)


# transcendental operations on T-series


def _require_T(f: MonoidSeries, what: str):
    if f.mode != "T":
        raise SeriesError(f"{what} is only defined on C[[T]]")


def _by_degree(w: Window) -> list[Index]:
    return sorted(w.indices("T"), key=lambda i: (_deg(i), i))


def exp_series(f: MonoidSeries) -> MonoidSeries:
    """``exp(f)`` for a T-series with vanishing constant term."""
    _require_T(f, "exp")
    if f.constant:
        raise SeriesError("exp needs a vanishing constant term")
    w = f.window
    terms = [(idx, _deg(idx) * a) for idx, a in f._c.items()]
    g: dict = {}
    for alpha in _by_degree(w):
        d = _deg(alpha)
        if d == 0:
            g[alpha] = Fraction(1)
            continue
        acc = Fraction(0)
        for gam, da in terms:
            rest = _sub_idx(alpha, gam)
            if rest in g:
                acc += da * g[rest]
        if acc:
            g[alpha] = acc / d
    return MonoidSeries._raw(w, g, "T")


def log_series(g: MonoidSeries) -> MonoidSeries:
    """``log(g)`` for a T-series with constant term 1."""
    _require_T(g, "log")
    if g.constant != 1:
        raise SeriesError("log needs constant term 1")
    w = g.window
    zero = (0, w.config.zero_curve)
    f: dict = {}
    for alpha in _by_degree(w):
        d = _deg(alpha)
        if d == 0:
            continue
        acc = d * g[alpha]
        for gam, fg in f.items():
            rest = _sub_idx(alpha, gam)
            if rest != zero and rest in g._c:
                acc -= _deg(gam) * fg * g._c[rest]
        if acc:
            f[alpha] = acc / d
    return MonoidSeries._raw(w, f, "T")


def inverse(g: MonoidSeries) -> MonoidSeries:
    """Multiplicative inverse of a T-series with nonzero constant term."""
    _require_T(g, "inverse")
    g0 = g.constant
    if not g0:
        raise SeriesError("inverse needs a nonzero constant term")
    w = g.window
    zero = (0, w.config.zero_curve)
    rest_terms = [(i, a) for i, a in g._c.items() if i != zero]
    h: dict = {}
    for alpha in _by_degree(w):
        if alpha == zero:
            h[alpha] = 1 / g0
            continue
        acc = Fraction(0)
        for gam, a in rest_terms:
            prev = _sub_idx(alpha, gam)
            if prev in h:
                acc += a * h[prev]
        if acc:
            h[alpha] = -acc / g0
    return MonoidSeries._raw(w, h, "T")


def divide(f: MonoidSeries, g: MonoidSeries) -> MonoidSeries:
    """``f / g`` with ``g`` a unit of ``C[[T]]``; ``f`` may be an S- or T-series."""
    f._check_window(g)
    _require_T(g, "the divisor")
    if not g.constant:
        raise SeriesError("division by a series with vanishing constant term")
    return f * inverse(g)


def power(f: MonoidSeries, k: int) -> MonoidSeries:
    """Integer power of a T-series; negative exponents go through :func:`inverse`."""
    _require_T(f, "power")
    if k < 0:
        return power(inverse(f), -k)
    out = MonoidSeries.one(f.window)
    base = f
    while k:
        if k & 1:
            out = out * base
        k >>= 1
        if k:
            base = base * base
    return out


def infinite_product(factors: Iterable[MonoidSeries], window: Window | None = None) -> MonoidSeries:
    """Product of T-series with constant term 1.

    Any family that is finite after truncation to the window is accepted; an
    empty family gives ``1`` (the window must then be passed explicitly).
    """
    out = None
    for fac in factors:
        _require_T(fac, "a product factor")
        if fac.constant != 1:
            raise SeriesError("every factor needs constant term 1")
        out = fac if out is None else out * fac
    if out is None:
        if window is None:
            raise SeriesError("empty product needs a window")
        return MonoidSeries.one(window)
    return out


def macmahon(sign: int, chi: int, window: Window, mode: str = "T") -> MonoidSeries:
    """``M(sign * x)^chi`` with ``M(x) = prod_k (1 - x^k)^(-k)``, on the ``beta = 0`` axis."""
    zero = window.config.zero_curve
    top = window.ceiling("T")

    def geometric(k: int) -> MonoidSeries:
        return MonoidSeries(window, {(j * k, zero): 1 for j in range(0, (top - 1) // k + 1)})

    factors = (power(geometric(k), k) for k in range(1, top))
    m = infinite_product(factors, window)
    return power(m, chi).substitute_sign(sign).as_mode(mode)


def beta_zero_part(f: MonoidSeries) -> MonoidSeries:
    """The ``beta = 0`` part of an S-series as a T-series.

    Refused when the T-window reaches beyond ``k_cut``, since those
    coefficients are not known to the S-series.
    """
    w = f.window
    if f.mode == "S" and w.t_cut > w.k_cut:
        raise SeriesError("the T-window is larger than the S-window; beta = 0 part incomplete")
    zero = w.config.zero_curve
    return MonoidSeries._raw(w, {k: v for k, v in f._c.items() if k[1] == zero}, "T")


# epsilon from delta along one ray


def _primitive(v: ClassVector) -> tuple[ClassVector, int]:
    from math import gcd
    g = 0
    for x in (v.s, *v.beta, v.r):
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero class has no ray")
    return ClassVector(v.s // g, tuple(b // g for b in v.beta), v.r // g), g


def _compositions(k: int) -> Iterable[tuple[int, ...]]:
    """Ordered compositions of ``k`` into positive parts."""
    for mask in range(1 << (k - 1)):
        parts, last = [], 0
        for i in range(k - 1):
            if mask >> i & 1:
                parts.append(i + 1 - last)
                last = i + 1
        parts.append(k - last)
        yield tuple(parts)


def epsilon_from_delta(delta: Mapping[ClassVector, object], v: ClassVector) -> Fraction:
    """``eps^v = sum_l (-1)^(l-1)/l sum_{v_1+...+v_l = v} delta^{v_1}...delta^{v_l}``.

    All classes live on the ray of the primitive vector ``w`` through ``v``, so
    decompositions are compositions of the multiplicity.  The product is the
    commutative shadow (plain multiplication of scalars).
    """
    w, k = _primitive(v)
    for u in delta:
        uw, _ = _primitive(u)
        if uw != w:
            raise ValueError(f"class {u} is not on the ray of {v}")
    vals = {j: Fraction(delta.get(j * w, 0)) for j in range(1, k + 1)}
    total = Fraction(0)
    for comp in _compositions(k):
        term = Fraction((-1) ** (len(comp) - 1), len(comp))
        for part in comp:
            term *= vals[part]
            if not term:
                break
        total += term
    return total


def delta_from_epsilon(eps: Mapping[ClassVector, object], v: ClassVector) -> Fraction:
    """Inverse of :func:`epsilon_from_delta`: ``delta^v = sum 1/l! eps^{v_1}...eps^{v_l}``."""
    w, k = _primitive(v)
    for u in eps:
        uw, _ = _primitive(u)
        if uw != w:
            raise ValueError(f"class {u} is not on the ray of {v}")
    vals = {j: Fraction(eps.get(j * w, 0)) for j in range(1, k + 1)}
    total = Fraction(0)
    fact = [1]
    for i in range(1, k + 1):
        fact.append(fact[-1] * i)
    for comp in _compositions(k):
        term = Fraction(1, fact[len(comp)])
        for part in comp:
            term *= vals[part]
            if not term:
                break
        total += term
    return total

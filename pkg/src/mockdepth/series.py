"""Truncated bivariate Laurent series in (zeta, q) with exact rational coefficients.

A :class:`QSeries` stores one coefficient per power of ``q`` from ``min_order``
up to ``qmax`` (inclusive).  Each coefficient is a finite Laurent polynomial in
the formal variable ``zeta``, held as a plain ``dict`` mapping the zeta-exponent
to a nonzero rational.  Rationals are ``int`` when integral and
:class:`fractions.Fraction` otherwise.

``qmax`` is the precision: every coefficient at an exponent ``<= qmax`` is
exact, nothing above it is known.  Operations that cannot keep the full
precision (multiplication by a factor of negative q-valuation) lower ``qmax``
instead of returning a wrong top coefficient.  Builders that need a given
precision therefore work with a little headroom and :meth:`QSeries.truncate`
at the end, which raises if the headroom was not enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from numbers import Rational as _RationalABC
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

Rational = Union[int, Fraction]
ZetaLaurent = Dict[int, Rational]

__all__ = [
    "Rational",
    "ZetaLaurent",
    "SeriesUsageError",
    "UnsupportedSeriesError",
    "QSeries",
    "TruncationPolicy",
    "Comparison",
    "as_rational",
    "add",
    "mul",
    "one_plus_monomial_inv",
    "poch",
    "poch_inv",
    "qbinom",
    "window_compare",
]


class SeriesUsageError(ValueError):
    """Raised on misuse: mismatched truncation orders, bad arguments."""


class UnsupportedSeriesError(ValueError):
    """Raised when a result would not have Laurent-polynomial coefficients."""


def as_rational(c) -> Rational:
    if isinstance(c, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, _RationalABC):
        return as_rational(Fraction(c.numerator, c.denominator))
    if isinstance(c, str):
        return as_rational(Fraction(c))
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def _clean(d: Mapping[int, Rational]) -> ZetaLaurent:
    out = {}
    for e, c in d.items():
        if c:
            if type(c) is Fraction and c.denominator == 1:
                c = c.numerator
            out[e] = c
    return out


def _fmt_rat(c: Rational) -> str:
    return str(c)


class QSeries:
    """Truncated Laurent series in q whose coefficients are Laurent polynomials in zeta."""

    __slots__ = ("_min", "_c", "_qmax")

    def __init__(self, min_order: int, coeffs: Sequence[Mapping[int, Rational]], qmax: int):
        coeffs = [_clean(d) for d in coeffs[: max(qmax - min_order + 1, 0)]]
        self._set(min_order, coeffs, qmax)

    def _set(self, min_order, coeffs, qmax):
        lo = 0
        while lo < len(coeffs) and not coeffs[lo]:
            lo += 1
        if lo == len(coeffs):
            self._min = qmax + 1
            self._c = ()
        else:
            self._min = min_order + lo
            need = qmax - self._min + 1
            cs = list(coeffs[lo : lo + max(need, 0)])
            while cs and not cs[-1]:
                cs.pop()
            if not cs:
                self._min = qmax + 1
            self._c = tuple(cs)
        self._qmax = qmax

    @classmethod
    def _raw(cls, min_order: int, coeffs: list, qmax: int) -> "QSeries":
        # coeffs already cleaned
        s = cls.__new__(cls)
        s._set(min_order, coeffs, qmax)
        return s

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, qmax: int) -> "QSeries":
        return cls._raw(qmax + 1, [], qmax)

    @classmethod
    def one(cls, qmax: int) -> "QSeries":
        return cls.monomial(1, 0, 0, qmax)

    @classmethod
    def monomial(cls, c, ez: int, eq: int, qmax: int) -> "QSeries":
        c = as_rational(c)
        if not c or eq > qmax:
            return cls.zero(qmax)
        return cls._raw(eq, [{ez: c}], qmax)

    @classmethod
    def from_terms(cls, terms: Mapping[Tuple[int, int], object], qmax: int) -> "QSeries":
        """Build from ``{(q_exp, zeta_exp): coefficient}``; terms above qmax are dropped."""
        keep = {k: as_rational(v) for k, v in terms.items() if k[0] <= qmax}
        if not keep:
            return cls.zero(qmax)
        lo = min(b for b, _ in keep)
        cs = [dict() for _ in range(qmax - lo + 1)]
        for (b, a), c in keep.items():
            cs[b - lo][a] = cs[b - lo].get(a, 0) + c
        return cls(lo, cs, qmax)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence, qmax: int, min_order: int = 0) -> "QSeries":
        """Build a zeta-free series from a list of rationals starting at ``q^min_order``."""
        return cls(min_order, [{0: as_rational(c)} for c in coeffs], qmax)

    # ---- accessors -----------------------------------------------------

    @property
    def min_order(self) -> int:
        return self._min

    @property
    def qmax(self) -> int:
        return self._qmax

    @property
    def coeffs(self) -> Tuple[ZetaLaurent, ...]:
        """One coefficient per exponent from ``min_order`` to ``qmax`` (copies)."""
        pad = self._qmax - self._min + 1 - len(self._c)
        return tuple(dict(d) for d in self._c) + tuple({} for _ in range(pad))

    def is_zero(self) -> bool:
        return not self._c

    def coefficient(self, b: int) -> ZetaLaurent:
        """Copy of the zeta-Laurent coefficient of ``q^b``."""
        if b > self._qmax:
            raise SeriesUsageError(f"q^{b} lies above the truncation order {self._qmax}")
        i = b - self._min
        if 0 <= i < len(self._c):
            return dict(self._c[i])
        return {}

    def __getitem__(self, key) -> Rational:
        if isinstance(key, tuple):
            b, a = key
        else:
            b, a = key, 0
        return self.coefficient(b).get(a, 0)

    def terms(self) -> Iterator[Tuple[int, int, Rational]]:
        """Yield ``(q_exp, zeta_exp, coefficient)`` in lexicographic order."""
        for i, d in enumerate(self._c):
            for a in sorted(d):
                yield self._min + i, a, d[a]

    def zeta_free(self) -> bool:
        return all(not d or set(d) == {0} for d in self._c)

    def zeta_range(self) -> Tuple[int, int]:
        exps = [a for d in self._c for a in d]
        if not exps:
            return (0, 0)
        return (min(exps), max(exps))

    def to_list(self) -> list:
        """Zeta-free coefficients from ``q^0`` to ``q^qmax`` (raises on negative order or zeta)."""
        if not self.zeta_free():
            raise SeriesUsageError("series has zeta-dependence")
        if self._min < 0:
            raise SeriesUsageError("series has negative q-order")
        return [self[b] for b in range(self._qmax + 1)]

    # ---- structural operations ----------------------------------------

    def truncate(self, qmax: int) -> "QSeries":
        if qmax > self._qmax:
            raise SeriesUsageError(
                f"cannot raise precision from q^{self._qmax} to q^{qmax}"
            )
        if qmax == self._qmax:
            return self
        return QSeries._raw(self._min, list(self._c[: max(qmax - self._min + 1, 0)]), qmax)

    def truncate_zeta(self, cap: int) -> "QSeries":
        """Drop every monomial whose zeta-exponent has absolute value above ``cap``."""
        cs = [{a: c for a, c in d.items() if -cap <= a <= cap} for d in self._c]
        return QSeries._raw(self._min, cs, self._qmax)

    def shift(self, ez: int = 0, eq: int = 0) -> "QSeries":
        """Multiply by ``zeta^ez * q^eq``.  A negative ``eq`` lowers the precision by ``|eq|``."""
        cs = [{a + ez: c for a, c in d.items()} for d in self._c] if ez else list(self._c)
        if self.is_zero():
            return QSeries.zero(self._qmax + min(eq, 0))
        return QSeries._raw(self._min + eq, cs, self._qmax + min(eq, 0))

    def scale(self, c) -> "QSeries":
        c = as_rational(c)
        if not c:
            return QSeries.zero(self._qmax)
        cs = [_clean({a: v * c for a, v in d.items()}) for d in self._c]
        return QSeries._raw(self._min, cs, self._qmax)

    def map_zeta(self, fn) -> "QSeries":
        """Apply ``fn(zeta_exp, coeff) -> coeff`` to each monomial."""
        cs = [_clean({a: fn(a, v) for a, v in d.items()}) for d in self._c]
        return QSeries._raw(self._min, cs, self._qmax)

    # ---- arithmetic ----------------------------------------------------

    def _check(self, other: "QSeries"):
        if not isinstance(other, QSeries):
            raise TypeError(f"expected QSeries, got {type(other).__name__}")
        if other._qmax != self._qmax:
            raise SeriesUsageError(
                f"truncation orders differ: q^{self._qmax} vs q^{other._qmax}"
            )

    def __add__(self, other):
        if not isinstance(other, QSeries):
            return self + QSeries.monomial(other, 0, 0, self._qmax)
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lo = min(self._min, other._min)
        n = self._qmax - lo + 1
        cs = [dict() for _ in range(n)]
        for src in (self, other):
            off = src._min - lo
            for i, d in enumerate(src._c):
                acc = cs[off + i]
                for a, c in d.items():
                    acc[a] = acc.get(a, 0) + c
        return QSeries._raw(lo, [_clean(d) for d in cs], self._qmax)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            return self + (-as_rational(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        self._check(other)
        return _convolve(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self._qmax == other._qmax and self._min == other._min and self._c == other._c

    def __hash__(self):
        return hash((self._qmax, self._min, tuple(tuple(sorted(d.items())) for d in self._c)))

    def mul_binomial(self, c, ez: int, eq: int) -> "QSeries":
        """Multiply by ``1 + c*zeta^ez*q^eq`` in linear time."""
        c = as_rational(c)
        if not c:
            return self
        moved = self.shift(ez, eq).scale(c)
        return self.truncate(moved.qmax) + moved

    def div_binomial(self, c, ez: int, eq: int) -> "QSeries":
        """Divide by ``1 + c*zeta^ez*q^eq`` by linear recurrence.

        ``eq >= 1`` expands geometrically, ``eq <= -1`` factors out the dominant
        monomial first, ``eq == ez == 0`` is a rational scale.  ``eq == 0`` with
        ``ez != 0`` has no Laurent-polynomial coefficients and is rejected.
        """
        c = as_rational(c)
        if not c:
            return self
        if eq == 0:
            if ez != 0:
                raise UnsupportedSeriesError(
                    "1/(1 + c*zeta^k) with k != 0 has no expansion with polynomial coefficients"
                )
            if c == -1:
                raise ZeroDivisionError("1/(1 + c) with c = -1")
            return self.scale(Fraction(1) / (1 + c))
        if eq < 0:
            inv = Fraction(1) / c
            return self.shift(-ez, -eq).scale(inv).div_binomial(inv, -ez, -eq)
        if self.is_zero():
            return self
        n = self._qmax - self._min + 1
        out = [dict(d) for d in self._c] + [{} for _ in range(n - len(self._c))]
        for i in range(eq, n):
            prev = out[i - eq]
            if not prev:
                continue
            acc = out[i]
            for a, v in prev.items():
                k = a + ez
                acc[k] = acc.get(k, 0) - c * v
            out[i] = _clean(acc)
        return QSeries._raw(self._min, out, self._qmax)

    # ---- display -------------------------------------------------------

    def __repr__(self):
        parts = []
        for b, a, c in self.terms():
            mono = []
            if a:
                mono.append("zeta" if a == 1 else f"zeta^{a}")
            if b:
                mono.append("q" if b == 1 else f"q^{b}")
            if not mono:
                parts.append(_fmt_rat(c))
            elif c == 1:
                parts.append("*".join(mono))
            elif c == -1:
                parts.append("-" + "*".join(mono))
            else:
                parts.append(f"{_fmt_rat(c)}*" + "*".join(mono))
        body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        return f"{body} + O(q^{self._qmax + 1})"


def _convolve(x: QSeries, y: QSeries) -> QSeries:
    # precision of a product of two truncated Laurent series
    qmax = min(x._qmax + min(y._min, 0), y._qmax + min(x._min, 0))
    if x.is_zero() or y.is_zero():
        return QSeries.zero(qmax)
    lo = x._min + y._min
    n = qmax - lo + 1
    if n <= 0:
        return QSeries.zero(qmax)
    xs, ys = x._c, y._c
    if x.zeta_free() and y.zeta_free():
        xv = [d.get(0, 0) for d in xs]
        yv = [d.get(0, 0) for d in ys]
        flat = [0] * n
        for i, ci in enumerate(xv):
            if not ci or i >= n:
                continue
            for j in range(min(len(yv), n - i)):
                cj = yv[j]
                if cj:
                    flat[i + j] += ci * cj
        return QSeries._raw(lo, [_clean({0: v}) for v in flat], qmax)
    out = [dict() for _ in range(n)]
    for i, di in enumerate(xs):
        if not di or i >= n:
            continue
        items_i = list(di.items())
        for j in range(min(len(ys), n - i)):
            dj = ys[j]
            if not dj:
                continue
            acc = out[i + j]
            for a, ca in items_i:
                for b, cb in dj.items():
                    k = a + b
                    acc[k] = acc.get(k, 0) + ca * cb
    return QSeries._raw(lo, [_clean(d) for d in out], qmax)


def add(x: QSeries, y: QSeries) -> QSeries:
    return x + y


def mul(x: QSeries, y: QSeries) -> QSeries:
    return x * y


def one_plus_monomial_inv(c, ez: int, eq: int, qmax: int) -> QSeries:
    """Expansion of ``1/(1 + c*zeta^ez*q^eq)`` to precision ``qmax``."""
    return QSeries.one(qmax).div_binomial(c, ez, eq)


def _neg_budget(eq: int, step: int, n: int) -> int:
    # total negative q-valuation over the factors (1 - x q^{eq + step*j}), j < n
    return sum(max(0, -(eq + step * j)) for j in range(n))


def poch(c, ez: int, eq: int, step: int, n: int, qmax: int) -> QSeries:
    """Finite q-Pochhammer ``(x; q^step)_n`` with ``x = c*zeta^ez*q^eq``."""
    if n < 0:
        raise SeriesUsageError("Pochhammer length must be nonnegative")
    if step < 1:
        raise SeriesUsageError("step must be a positive integer")
    c = as_rational(c)
    work = qmax + _neg_budget(eq, step, n)
    s = QSeries.one(work)
    for j in range(n):
        s = s.mul_binomial(-c, ez, eq + step * j)
    return s.truncate(qmax)


def poch_inv(c, ez: int, eq: int, step: int, n: int, qmax: int) -> QSeries:
    """``1/(x; q^step)_n``; each factor must satisfy the preconditions of :func:`one_plus_monomial_inv`."""
    if n < 0:
        raise SeriesUsageError("Pochhammer length must be nonnegative")
    if step < 1:
        raise SeriesUsageError("step must be a positive integer")
    c = as_rational(c)
    s = QSeries.one(qmax)
    for j in range(n):
        s = s.div_binomial(-c, ez, eq + step * j)
    return s


@lru_cache(maxsize=4096)
def qbinom(m: int, n: int, step: int, qmax: int) -> QSeries:
    """Gaussian binomial ``[m choose n]`` in base ``q^step``."""
    if not 0 <= n <= m:
        raise SeriesUsageError(f"q-binomial needs 0 <= n <= m, got m={m}, n={n}")
    # (q;q)_m / ((q;q)_{m-n} (q;q)_n); dividing factor by factor is the same
    # as multiplying by the two poch_inv series, without the full convolutions
    s = poch(1, 0, step, step, m, qmax)
    for k in (m - n, n):
        for j in range(k):
            s = s.div_binomial(-1, 0, step * (j + 1))
    degree = step * n * (m - n)
    if s.min_order < 0:
        raise AssertionError("q-binomial has negative order")
    for b, a, c in s.terms():
        if a != 0 or not isinstance(c, int) or c < 0 or b > degree:
            raise AssertionError(f"q-binomial residue at q^{b}: {c}")
    return s


@dataclass(frozen=True)
class TruncationPolicy:
    """Comparison window ``|zeta-exp| <= zeta_cap``, ``-q_floor <= q-exp <= q_cap``."""

    zeta_cap: int = 12
    q_cap: int = 40
    q_floor: int = 2
    stability_margin: int = 5

    def __post_init__(self):
        for name in ("zeta_cap", "q_cap", "q_floor", "stability_margin"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise SeriesUsageError(f"{name} must be a nonnegative integer, got {v!r}")

    @property
    def A(self) -> int:
        return self.zeta_cap

    @property
    def B(self) -> int:
        return self.q_cap

    @property
    def G(self) -> int:
        return self.q_floor

    # Summation bounds for the double sums; all monotone in A and B.
    def nmax(self, qmax: Optional[int] = None) -> int:
        b = self.q_cap if qmax is None else qmax
        return isqrt(max(b, 0) // 2) + 1

    def jmax(self, qmax: Optional[int] = None) -> int:
        b = self.q_cap if qmax is None else qmax
        return isqrt(max(b, 0)) + 1

    def mmax(self, qmax: Optional[int] = None) -> int:
        return self.zeta_cap + self.jmax(qmax) + 2


@dataclass(frozen=True)
class Comparison:
    equal: bool
    # (q_exp, zeta_exp, lhs_coeff, rhs_coeff) of the first disagreement
    mismatch: Optional[Tuple[int, int, Rational, Rational]] = None

    def __bool__(self):
        return self.equal


def window_compare(x: QSeries, y: QSeries, policy: TruncationPolicy) -> Comparison:
    """Compare every monomial ``zeta^a q^b`` with ``|a| <= A`` and ``-G <= b <= B``."""
    B, A, G = policy.q_cap, policy.zeta_cap, policy.q_floor
    for s in (x, y):
        if s.qmax < B:
            raise SeriesUsageError(f"series known only to q^{s.qmax}, window needs q^{B}")
    for b in range(-G, B + 1):
        dx, dy = x.coefficient(b), y.coefficient(b)
        if dx == dy:
            continue
        for a in sorted(set(dx) | set(dy)):
            if -A <= a <= A:
                cx, cy = dx.get(a, 0), dy.get(a, 0)
                if cx != cy:
                    return Comparison(False, (b, a, cx, cy))
    return Comparison(True)

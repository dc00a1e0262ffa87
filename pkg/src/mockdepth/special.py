"""Named q-series as exact :class:`~mockdepth.series.QSeries` objects.

Parameters of hypergeometric-type series are :class:`Monomial` values
``c * zeta^ez * q^eq``.  Every builder takes the base ``q^step`` explicitly,
so ``step=2`` gives the series in ``q^2`` used throughout the depth-two
constructions.

Single sums are walked term by term with a ratio update (each update is a
product or quotient by a binomial ``1 + c zeta^a q^b``, which costs linear
time).  Summation stops from an explicit lower bound on the term valuation,
never from inspecting coefficients.  When the ratio carries no q-growth
(a bare power of zeta) the caller passes the index cap.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

from .series import (
    QSeries,
    Rational,
    SeriesUsageError,
    TruncationPolicy,
    as_rational,
    poch,
    poch_inv,
    qbinom,
)

__all__ = [
    "Monomial",
    "ZERO",
    "ONE",
    "ZETA",
    "Q",
    "SeriesId",
    "mock_nu",
    "mock_phi",
    "mock_rho",
    "phi_1_1",
    "phi_2_1",
    "fine_F",
    "fine_44_rhs",
    "fine_63_rhs",
    "fine_123_lhs",
    "r_univ",
    "u_univ",
    "ds",
    "ds1",
    "ds2",
    "ds3",
    "ds_summand",
    "ds_bounds",
    "f_cleared",
    "srivastava_rhs",
    "loos_m10",
    "loos_m17",
    "CATALOG",
    "build_series",
]

# hard cap on any single summation index
_INDEX_LIMIT = 100_000


@dataclass(frozen=True)
class Monomial:
    """``c * zeta^ez * q^eq`` with exact rational ``c``."""

    c: Rational = 1
    ez: int = 0
    eq: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c", as_rational(self.c))

    def is_zero(self) -> bool:
        return self.c == 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not isinstance(other, Monomial):
            return Monomial(self.c * as_rational(other), self.ez, self.eq)
        return Monomial(self.c * other.c, self.ez + other.ez, self.eq + other.eq)

    __rmul__ = __mul__

    def __neg__(self) -> "Monomial":
        return Monomial(-self.c, self.ez, self.eq)

    def inverse(self) -> "Monomial":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero monomial")
        return Monomial(Fraction(1) / self.c, -self.ez, -self.eq)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return self * other.inverse()

    def __pow__(self, n: int) -> "Monomial":
        if n < 0:
            return self.inverse() ** (-n)
        return Monomial(self.c**n, self.ez * n, self.eq * n)

    def q_shift(self, k: int) -> "Monomial":
        return Monomial(self.c, self.ez, self.eq + k)

    def series(self, qmax: int) -> QSeries:
        return QSeries.monomial(self.c, self.ez, self.eq, qmax)

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        if self.ez:
            parts.append("zeta" if self.ez == 1 else f"zeta^{self.ez}")
        if self.eq:
            parts.append("q" if self.eq == 1 else f"q^{self.eq}")
        if not parts:
            return str(self.c)
        body = "*".join(parts)
        if self.c == 1:
            return body
        if self.c == -1:
            return "-" + body
        return f"{self.c}*{body}"

    _TOKEN = re.compile(r"\s*(zeta|q)\s*(?:\^\s*\(?\s*([+-]?\d+)\s*\)?)?\s*")

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        """Parse strings such as ``"-q^2"``, ``"zeta"``, ``"1/2*zeta*q^-1"``, ``"0"``."""
        s = text.strip().replace(" ", "")
        if not s:
            raise SeriesUsageError("empty monomial")
        sign = 1
        while s[:1] in "+-" and s:
            if s[0] == "-":
                sign = -sign
            s = s[1:]
        c: Rational = 1
        ez = eq = 0
        for part in s.split("*"):
            if not part:
                raise SeriesUsageError(f"cannot parse monomial {text!r}")
            m = re.fullmatch(r"(zeta|z|q)(?:\^\(?([+-]?\d+)\)?)?", part)
            if m:
                e = int(m.group(2)) if m.group(2) else 1
                if m.group(1) == "q":
                    eq += e
                else:
                    ez += e
                continue
            try:
                c = c * as_rational(Fraction(part))
            except (ValueError, ZeroDivisionError):
                raise SeriesUsageError(f"cannot parse monomial {text!r}") from None
        return cls(sign * c, ez, eq)


ZERO = Monomial(0)
ONE = Monomial(1)
ZETA = Monomial(1, 1, 0)
Q = Monomial(1, 0, 1)


def _neg_budget(eq: int, step: int, n: int) -> int:
    # sum over j < n of max(0, -(eq + step*j))
    k = min(n, max(0, (-eq + step - 1) // step))
    return -(k * eq + step * k * (k - 1) // 2)


def _poch_val_lb(x: Monomial, step: int, n: int) -> int:
    # lower bound on the q-valuation of (x; q^step)_n
    if x.is_zero():
        return 0
    return -_neg_budget(x.eq, step, n)


def _times_poch(s: QSeries, x: Monomial, step: int, n: int, start: int = 0) -> QSeries:
    """``s * prod_{j=start}^{start+n-1} (1 - x q^{step j})``."""
    if x.is_zero():
        return s
    for j in range(start, start + n):
        s = s.mul_binomial(-x.c, x.ez, x.eq + step * j)
    return s


def _over_poch(s: QSeries, x: Monomial, step: int, n: int, start: int = 0) -> QSeries:
    """``s / prod_{j=start}^{start+n-1} (1 - x q^{step j})``."""
    if x.is_zero():
        return s
    for j in range(start, start + n):
        s = s.div_binomial(-x.c, x.ez, x.eq + step * j)
    return s


def _times_monomial(s: QSeries, x: Monomial, extra_eq: int = 0) -> QSeries:
    # one combined shift, so that a positive extra_eq absorbs a negative x.eq
    return s.shift(x.ez, x.eq + extra_eq).scale(x.c)


def _check_step(step: int):
    if step not in (1, 2) and not (isinstance(step, int) and step >= 1):
        raise SeriesUsageError(f"step must be a positive integer, got {step!r}")


def _walk(
    qmax: int,
    headroom: int,
    first: Callable[[int], QSeries],
    advance: Callable[[QSeries, int], QSeries],
    val_lb: Callable[[int], int],
    nmax: Optional[int] = None,
    start: int = 0,
    stats: Optional[dict] = None,
) -> QSeries:
    """Sum ``t_start + t_{start+1} + ...`` where ``t_n = advance(t_{n-1}, n)``.

    Stops at ``nmax`` when given, otherwise once ``val_lb(n) > qmax`` and the
    bound is no longer decreasing (every bound used here is convex in n).
    """
    work = qmax + headroom
    total = QSeries.zero(qmax)
    t = first(work)
    n = start
    count = 0
    while True:
        if nmax is not None and n > nmax:
            break
        if nmax is None:
            lb = val_lb(n)
            if lb > qmax and val_lb(n + 1) >= lb:
                break
        if n - start > _INDEX_LIMIT:
            raise SeriesUsageError("summation bound exceeded; supply an index cap")
        total = total + t.truncate(qmax)
        count += 1
        n += 1
        t = advance(t, n)
    if stats is not None:
        stats["terms"] = stats.get("terms", 0) + count
    return total


def _require_growth(val_lb: Callable[[int], int], nmax: Optional[int], what: str):
    if nmax is not None:
        return
    # the bounds are convex: growth at a large index means eventual termination
    probe = 4 * _INDEX_LIMIT
    if val_lb(probe + 1) - val_lb(probe) <= 0:
        raise SeriesUsageError(f"{what}: terms have no q-growth; an index cap is required")


# ---------------------------------------------------------------------------
# order-three mock theta functions


def mock_nu(qmax: int, stats: Optional[dict] = None) -> QSeries:
    """nu(q) = sum q^{n(n+1)} / (-q; q^2)_{n+1}."""
    return _walk(
        qmax,
        0,
        lambda w: QSeries.one(w).div_binomial(1, 0, 1),
        lambda t, n: t.shift(0, 2 * n).div_binomial(1, 0, 2 * n + 1),
        lambda n: n * (n + 1),
        stats=stats,
    )


def mock_phi(qmax: int, stats: Optional[dict] = None) -> QSeries:
    """phi(q) = sum q^{n^2} / (-q^2; q^2)_n."""
    return _walk(
        qmax,
        0,
        QSeries.one,
        lambda t, n: t.shift(0, 2 * n - 1).div_binomial(1, 0, 2 * n),
        lambda n: n * n,
        stats=stats,
    )


def mock_rho(qmax: int, stats: Optional[dict] = None) -> QSeries:
    """rho(q) = sum q^{n^2} / (q; q^2)_n."""
    return _walk(
        qmax,
        0,
        QSeries.one,
        lambda t, n: t.shift(0, 2 * n - 1).div_binomial(-1, 0, 2 * n - 1),
        lambda n: n * n,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# basic hypergeometric series


def phi_1_1(
    lam: Monomial, mu: Monomial, step: int, z: Monomial, qmax: int, stats: Optional[dict] = None
) -> QSeries:
    """1phi1(lam; mu; q^step; z) = sum (lam)_n / ((mu)_n (q^s;q^s)_n) z^n (-1)^n q^{s n(n-1)/2}."""
    _check_step(step)
    s = step
    if z.is_zero():
        return QSeries.one(qmax)

    def lb(n):
        return s * n * (n - 1) // 2 + n * z.eq + _poch_val_lb(lam, s, n)

    _require_growth(lb, None, "1phi1")
    nstop = _last_index(lb, qmax)
    headroom = _neg_budget(lam.eq, s, nstop + 1) + (nstop + 1) * max(0, -z.eq)

    def advance(t, n):
        t = _times_poch(t, lam, s, 1, n - 1)
        t = _over_poch(t, mu, s, 1, n - 1)
        t = t.div_binomial(-1, 0, s * n)
        return _times_monomial(t, -z, s * (n - 1))

    return _walk(qmax, headroom, QSeries.one, advance, lb, stats=stats)


def phi_2_1(
    lam: Monomial,
    mu: Monomial,
    step: int,
    z: Monomial,
    qmax: int,
    mmax: Optional[int] = None,
    lam2: Monomial = ZERO,
    stats: Optional[dict] = None,
) -> QSeries:
    """2phi1(lam, lam2; mu; q^step; z) = sum (lam)_n (lam2)_n / ((mu)_n (q^s;q^s)_n) z^n.

    ``lam2`` defaults to the zero parameter, for which ``(0; q)_n = 1``.  When
    ``z`` has no positive q-power the sum is capped at ``n <= mmax``.
    """
    _check_step(step)
    s = step
    if z.is_zero():
        return QSeries.one(qmax)

    def lb(n):
        return n * z.eq + _poch_val_lb(lam, s, n) + _poch_val_lb(lam2, s, n)

    _require_growth(lb, mmax, "2phi1")
    nstop = mmax if mmax is not None else _last_index(lb, qmax)
    headroom = (
        _neg_budget(lam.eq, s, nstop + 1)
        + _neg_budget(lam2.eq, s, nstop + 1)
        + (nstop + 1) * max(0, -z.eq)
    )

    def advance(t, n):
        t = _times_poch(t, lam, s, 1, n - 1)
        t = _times_poch(t, lam2, s, 1, n - 1)
        t = _over_poch(t, mu, s, 1, n - 1)
        t = t.div_binomial(-1, 0, s * n)
        return _times_monomial(t, z)

    return _walk(qmax, headroom, QSeries.one, advance, lb, nmax=mmax, stats=stats)


def _last_index(lb: Callable[[int], int], qmax: int) -> int:
    n = 0
    while not (lb(n) > qmax and lb(n + 1) >= lb(n)):
        n += 1
        if n > _INDEX_LIMIT:
            raise SeriesUsageError("summation bound exceeded")
    return n


def fine_F(
    a: Monomial,
    b: Monomial,
    t: Monomial,
    step: int,
    qmax: int,
    nmax: Optional[int] = None,
    stats: Optional[dict] = None,
) -> QSeries:
    """Fine's F(a, b; t; q^s) = sum (a q^s; q^s)_n / (b q^s; q^s)_n t^n."""
    _check_step(step)
    s = step
    if t.is_zero():
        return QSeries.one(qmax)
    aq = a.q_shift(s)
    bq = b.q_shift(s)

    def lb(n):
        return n * t.eq + _poch_val_lb(aq, s, n)

    _require_growth(lb, nmax, "Fine's F")
    nstop = nmax if nmax is not None else _last_index(lb, qmax)
    headroom = _neg_budget(aq.eq, s, nstop + 1) + (nstop + 1) * max(0, -t.eq)

    def advance(u, n):
        u = _times_poch(u, aq, s, 1, n - 1)
        u = _over_poch(u, bq, s, 1, n - 1)
        return _times_monomial(u, t)

    return _walk(qmax, headroom, QSeries.one, advance, lb, nmax=nmax, stats=stats)


def _geom_inv(x: Monomial, qmax: int) -> QSeries:
    """``1/(1 - x)``."""
    return QSeries.one(qmax).div_binomial(-x.c, x.ez, x.eq)


def fine_44_rhs(
    a: Monomial,
    b: Monomial,
    t: Monomial,
    step: int,
    qmax: int,
    nmax: Optional[int] = None,
    stats: Optional[dict] = None,
) -> QSeries:
    """b/(b - a t) + (b - a) t / ((1 - b q^s)(b - a t)) * F(a, b q^s; t; q^s)."""
    if b.is_zero():
        raise SeriesUsageError("b must be nonzero")
    s = step
    r = (a * t / b) if not a.is_zero() else ZERO
    work = qmax + max(0, -t.eq) + max(0, -b.eq - s) + 2
    first = _geom_inv(r, work) if not r.is_zero() else QSeries.one(work)
    inner = fine_F(a, b.q_shift(s), t, s, work, None if nmax is None else max(nmax - 1, 0), stats)
    if not a.is_zero():
        inner = inner.mul_binomial(-(a / b).c, (a / b).ez, (a / b).eq)
        inner = inner.div_binomial(-r.c, r.ez, r.eq)
    inner = inner.div_binomial(-b.c, b.ez, b.eq + s)
    inner = _times_monomial(inner, t)
    return first.truncate(qmax) + inner.truncate(qmax)


def fine_63_rhs(
    a: Monomial,
    b: Monomial,
    t: Monomial,
    step: int,
    qmax: int,
    nmax: Optional[int] = None,
    stats: Optional[dict] = None,
) -> QSeries:
    """(1 - b)/(1 - t) * F(a t / b, t; b; q^s)."""
    if b.is_zero():
        raise SeriesUsageError("b must be nonzero")
    work = qmax + max(0, -b.eq) + 1
    inner = fine_F(a * t / b if not a.is_zero() else ZERO, t, b, step, work, nmax, stats)
    inner = inner.mul_binomial(-b.c, b.ez, b.eq)
    inner = inner.div_binomial(-t.c, t.ez, t.eq)
    return inner.truncate(qmax)


def fine_123_lhs(
    b: Monomial, t: Monomial, step: int, qmax: int, nmax: Optional[int] = None, stats: Optional[dict] = None
) -> QSeries:
    """(1 - t) F(0, b; t; q^s); its partner is ``r_univ(b, t, step)``."""
    work = qmax + max(0, -t.eq)
    return fine_F(ZERO, b, t, step, work, nmax, stats).mul_binomial(-t.c, t.ez, t.eq).truncate(qmax)


# ---------------------------------------------------------------------------
# universal mock theta function and Choi's companion


def r_univ(
    alpha: Monomial, beta: Monomial, step: int, qmax: int, stats: Optional[dict] = None
) -> QSeries:
    """R(alpha, beta; q^s) = sum (alpha beta)^n q^{s n^2} / ((alpha q^s;q^s)_n (beta q^s;q^s)_n)."""
    _check_step(step)
    s = step
    ab = alpha * beta

    def lb(n):
        return s * n * n + n * ab.eq if not ab.is_zero() or n == 0 else qmax + 1 + n

    headroom = 0
    if ab.eq < 0:
        headroom = (_last_index(lb, qmax) + 1) * (-ab.eq)

    def advance(t, n):
        t = _over_poch(t, alpha.q_shift(s), s, 1, n - 1)
        t = _over_poch(t, beta.q_shift(s), s, 1, n - 1)
        return _times_monomial(t, ab, s * (2 * n - 1))

    return _walk(qmax, headroom, QSeries.one, advance, lb, stats=stats)


def u_univ(
    alpha: Monomial, beta: Monomial, step: int, qmax: int, stats: Optional[dict] = None
) -> QSeries:
    """U(alpha, beta; q^s) = sum_{n>=1} (1/alpha; q^s)_n (1/beta; q^s)_n q^{s n}."""
    _check_step(step)
    if alpha.is_zero() or beta.is_zero():
        raise SeriesUsageError("U needs nonzero alpha and beta")
    s = step
    ai, bi = alpha.inverse(), beta.inverse()

    def lb(n):
        return s * n + _poch_val_lb(ai, s, n) + _poch_val_lb(bi, s, n)

    _require_growth(lb, None, "U")
    nstop = _last_index(lb, qmax)
    headroom = _neg_budget(ai.eq, s, nstop + 1) + _neg_budget(bi.eq, s, nstop + 1)

    def first(w):
        t = QSeries.one(w)
        t = _times_poch(t, ai, s, 1)
        t = _times_poch(t, bi, s, 1)
        return t.shift(0, s)

    def advance(t, n):
        t = _times_poch(t, ai, s, 1, n - 1)
        t = _times_poch(t, bi, s, 1, n - 1)
        return t.shift(0, s)

    return _walk(qmax, headroom, first, advance, lb, start=1, stats=stats)


# ---------------------------------------------------------------------------
# double sums of the depth-two representations


@dataclass(frozen=True)
class _DSShape:
    # (-1)^n q^{qa n^2 + qb n} zeta^{n+m} [m+n, m]_{q^2} (-q^{2n+delta}/zeta; q^2)_m * inner
    #   / ((1 + sc q^{2n + d0}) (x; q^2)_{m+2n}), all times a global prefactor
    qa: int
    qb: int
    delta: int
    inner: Tuple[Tuple[int, int], ...]  # binomials (c, eq) multiplied into each summand
    sc: int
    d0: int
    x: Monomial
    prefactor: Tuple[Tuple[int, int], ...]  # prefactor as a Laurent polynomial {eq: c}


_DS = {
    1: _DSShape(2, 0, 0, (), 1, -1, Monomial(-1, 0, 1), ((0, 1), (-1, 1))),
    2: _DSShape(2, 1, 1, (), 1, 0, Monomial(-1, 0, 2), ((0, 2),)),
    3: _DSShape(2, 1, 1, ((-1, -1),), -1, -1, Monomial(1, 0, 1), ((0, 1),)),
}


def ds_prefactor(j: int, qmax: int) -> QSeries:
    """Global factor in front of the j-th double sum: 1 + q^-1, 2, 1."""
    return QSeries.from_terms({(eq, 0): c for eq, c in _DS[j].prefactor}, qmax)


def ds_bounds(j: int, qmax: int, policy: TruncationPolicy, extra: int = 0) -> Tuple[int, int]:
    """``(nmax, mmax)`` for the j-th double sum at working precision ``qmax``.

    The q-valuation of summand (m, n) restricted to the part with i factors
    taken from the zeta^-1 Pochhammer is at least
    ``qa n^2 + qb n + i(2n + delta) + i(i - 1) - 2``; the window in zeta needs
    ``m <= A + i + 1``.  The policy's closed-form bounds are used as floors.
    """
    sh = _DS[j]

    def lb(n, i):
        return sh.qa * n * n + sh.qb * n + i * (2 * n + sh.delta) + i * (i - 1) - 2

    n_r = 0
    while lb(n_r + 1, 0) <= qmax:
        n_r += 1
    i_r = 0
    while lb(0, i_r + 1) <= qmax:
        i_r += 1
    nmax = max(n_r, policy.nmax(qmax)) + extra
    jmax = max(i_r, policy.jmax(qmax))
    mmax = policy.zeta_cap + jmax + 2 + extra
    return nmax, mmax


def ds_summand(j: int, m: int, n: int, qmax: int) -> QSeries:
    """Summand (m, n) of the j-th double sum, computed directly from its factors."""
    sh = _DS[j]
    headroom = 2
    w = qmax + headroom
    t = QSeries.monomial((-1) ** n, n + m, sh.qa * n * n + sh.qb * n, w)
    t = t * qbinom(m + n, m, 2, w).truncate(t.qmax)
    t = t * poch(-1, -1, 2 * n + sh.delta, 2, m, w).truncate(t.qmax)
    for c, eq in sh.inner:
        t = t * QSeries.from_terms({(0, 0): 1, (eq, 0): c}, w).truncate(t.qmax)
    t = t * QSeries.one(w).div_binomial(sh.sc, 0, 2 * n + sh.d0).truncate(t.qmax)
    t = t * poch_inv(sh.x.c, sh.x.ez, sh.x.eq, 2, m + 2 * n, w).truncate(t.qmax)
    return t.truncate(qmax)


def ds(
    j: int,
    qmax: int,
    policy: Optional[TruncationPolicy] = None,
    extra: int = 0,
    stats: Optional[dict] = None,
) -> QSeries:
    """The j-th double sum (global factor included), truncated at q^qmax.

    Terms are advanced along m with the ratio
    ``zeta (1 - q^{2(m+n+1)})/(1 - q^{2(m+1)}) (1 + q^{2n+delta+2m}/zeta) / (1 - x q^{2(m+2n)})``.
    """
    if j not in _DS:
        raise SeriesUsageError(f"double sum index must be 1, 2 or 3, got {j}")
    policy = policy or TruncationPolicy()
    sh = _DS[j]
    work = qmax + 1 + len(sh.inner)  # prefactor q^-1 and inner (1 - q^-1) each cost one
    nmax, mmax = ds_bounds(j, work, policy, extra)
    total = QSeries.zero(qmax + 1)
    count = 0
    for n in range(nmax + 1):
        t = QSeries.monomial((-1) ** n, n, sh.qa * n * n + sh.qb * n, work)
        for c, eq in sh.inner:
            t = t.mul_binomial(c, 0, eq)
        t = t.div_binomial(sh.sc, 0, 2 * n + sh.d0)
        t = _over_poch(t, sh.x, 2, 2 * n)
        for m in range(mmax + 1):
            if m:
                t = t.shift(1, 0)
                t = t.mul_binomial(-1, 0, 2 * (m + n)).div_binomial(-1, 0, 2 * m)
                t = t.mul_binomial(1, -1, 2 * n + sh.delta + 2 * (m - 1))
                t = t.div_binomial(-sh.x.c, sh.x.ez, sh.x.eq + 2 * (m - 1 + 2 * n))
            total = total + t.truncate(qmax + 1)
            count += 1
    if stats is not None:
        stats["terms"] = stats.get("terms", 0) + count
    pre = ds_prefactor(j, qmax + 1)
    return (total * pre).truncate(qmax)


def ds1(qmax: int, policy: Optional[TruncationPolicy] = None, extra: int = 0, stats=None) -> QSeries:
    return ds(1, qmax, policy, extra, stats)


def ds2(qmax: int, policy: Optional[TruncationPolicy] = None, extra: int = 0, stats=None) -> QSeries:
    return ds(2, qmax, policy, extra, stats)


def ds3(qmax: int, policy: Optional[TruncationPolicy] = None, extra: int = 0, stats=None) -> QSeries:
    return ds(3, qmax, policy, extra, stats)


# mock theta factor, beta in R(zeta, beta; q^2), and the binomial 1 + c q^e in the denominator
_F_FORMS = {
    1: (lambda w: mock_nu(w) + 1, Monomial(-1, 0, 1), (1, 1)),
    2: (mock_phi, Monomial(-1, 0, 2), (1, 2)),
    3: (mock_rho, Monomial(1, 0, 1), (-1, 1)),
}


def f_cleared(j: int, qmax: int, policy: Optional[TruncationPolicy] = None, stats=None) -> QSeries:
    """``(1 - zeta) f_j`` = mock_j(q) * [(1 - zeta) + zeta R(zeta, beta_j; q^2) / (1 + c q^e)]."""
    if j not in _F_FORMS:
        raise SeriesUsageError(f"f-form index must be 1, 2 or 3, got {j}")
    mock, beta, (c, e) = _F_FORMS[j]
    r = r_univ(ZETA, beta, 2, qmax, stats=stats).div_binomial(c, 0, e).shift(1, 0)
    bracket = QSeries.from_terms({(0, 0): 1, (0, 1): -1}, qmax) + r
    return mock(qmax) * bracket


def srivastava_rhs(
    lam: Monomial,
    mu: Monomial,
    z: Monomial,
    step: int,
    qmax: int,
    policy: Optional[TruncationPolicy] = None,
    extra: int = 0,
    stats: Optional[dict] = None,
) -> QSeries:
    """Double-sum side of the product formula for 1phi1(lam; mu; q; -z) 2phi1(lam, 0; mu; q; zeta).

    sum_{m,n} q^{s n(n-1)} (lam)_{m+n} (-q^{sn} z/zeta)_m (mu/lam)_n / ((mu)_{m+2n} (mu)_n)
              * zeta^m/(q^s;q^s)_m * (-lam z zeta)^n/(q^s;q^s)_n
    """
    _check_step(step)
    if lam.is_zero():
        raise SeriesUsageError("mu/lam is not a monomial when lam = 0")
    for name, p in (("lam", lam), ("mu", mu), ("z", z)):
        if p.ez:
            raise SeriesUsageError(f"{name} must not involve zeta")
    policy = policy or TruncationPolicy()
    s = step
    ml = mu / lam
    lamz = -(lam * z)

    # valuation bookkeeping for the summation bounds
    lam_floor = sum(min(0, lam.eq + s * k) for k in range(max(0, -lam.eq // s) + 2))

    def lb_n(n):
        return s * n * (n - 1) + n * lamz.eq + _poch_val_lb(ml, s, n) + lam_floor

    def lb_i(n, i):
        return lb_n(n) + i * (s * n + z.eq) + s * i * (i - 1) // 2

    headroom = -min(0, lam_floor) + -_poch_val_lb(ml, s, 64) + 2
    work = qmax + headroom
    nmax = 0
    while any(lb_n(k) <= work for k in range(nmax + 1, nmax + 4)):
        nmax += 1
    nmax = max(nmax, policy.nmax(work)) + extra
    imax = 0
    if not z.is_zero():
        for n in range(nmax + 1):
            i = 0
            while lb_i(n, i + 1) <= work and i < _INDEX_LIMIT:
                i += 1
            imax = max(imax, i)
    mmax = policy.zeta_cap + max(imax, policy.jmax(work)) + 2 + extra

    total = QSeries.zero(qmax)
    count = 0
    for n in range(nmax + 1):
        t = QSeries.monomial(1, 0, s * n * (n - 1), work)
        t = _times_poch(t, lam, s, n)
        t = _times_poch(t, ml, s, n)
        t = _over_poch(t, mu, s, 2 * n)
        t = _over_poch(t, mu, s, n)
        t = _over_poch(t, Monomial(1, 0, s), s, n)
        t = _times_monomial(t, (lamz * ZETA) ** n)
        for m in range(mmax + 1):
            if m:
                t = _times_poch(t, lam, s, 1, m - 1 + n)
                if not z.is_zero():
                    t = t.mul_binomial(z.c, z.ez - 1, z.eq + s * n + s * (m - 1))
                t = _over_poch(t, mu, s, 1, m - 1 + 2 * n)
                t = t.div_binomial(-1, 0, s * m)
                t = t.shift(1, 0)
            if t.qmax < qmax:
                raise SeriesUsageError("insufficient headroom in the product-formula sum")
            total = total + t.truncate(qmax)
            count += 1
    if stats is not None:
        stats["terms"] = stats.get("terms", 0) + count
    return total


# ---------------------------------------------------------------------------
# double sums that collapse to single mock theta functions


def _loos(qmax: int, sign: int, stats: Optional[dict] = None) -> QSeries:
    # sum_{n>=1} sum_{1<=j<=n} (-1)^j (-1;q)_{2n} q^{j^2 + sign*j + n}
    #   / ((q^2;q^2)_{n-j} (q^2;q^2)_{j-1} (1 - q^{4j-2}))
    total = QSeries.zero(qmax)
    if qmax < 1:
        return total
    jmax = 1
    while (jmax + 1) ** 2 + sign * (jmax + 1) + (jmax + 1) <= qmax:
        jmax += 1
    nmax = qmax  # j = 1 contributes q^{1 + sign + n}
    inv_q2 = [QSeries.one(qmax)]
    for k in range(1, nmax + 1):
        inv_q2.append(inv_q2[-1].div_binomial(-1, 0, 2 * k))
    pm = [QSeries.one(qmax)]
    for k in range(1, nmax + 1):
        # (-1; q)_{2k} from (-1; q)_{2k-2}
        pm.append(pm[-1].mul_binomial(1, 0, 2 * k - 2).mul_binomial(1, 0, 2 * k - 1))
    count = 0
    for j in range(1, jmax + 1):
        base = j * j + sign * j
        if base + j > qmax:
            break
        inner = QSeries.zero(qmax)
        for n in range(j, nmax + 1):
            if base + n > qmax:
                break
            inner = inner + (pm[n] * inv_q2[n - j]).shift(0, n)
            count += 1
        cj = inv_q2[j - 1].div_binomial(-1, 0, 4 * j - 2).scale((-1) ** j).shift(0, base)
        total = total + cj * inner
    if stats is not None:
        stats["terms"] = stats.get("terms", 0) + count
    return total


def loos_m10(qmax: int, stats: Optional[dict] = None) -> QSeries:
    return _loos(qmax, 1, stats)


def loos_m17(qmax: int, stats: Optional[dict] = None) -> QSeries:
    return _loos(qmax, -1, stats)


# ---------------------------------------------------------------------------
# catalogue


@dataclass(frozen=True)
class SeriesId:
    """A named series together with its Monomial parameters."""

    name: str
    params: Tuple[Tuple[str, object], ...] = field(default=())

    def param(self, key, default=None):
        return dict(self.params).get(key, default)


def _m(sid: SeriesId, key: str, default: str) -> Monomial:
    v = sid.param(key, default)
    return v if isinstance(v, Monomial) else Monomial.parse(str(v))


def _i(sid: SeriesId, key: str, default) -> Optional[int]:
    v = sid.param(key, default)
    return None if v is None else int(v)


# name -> (builder(sid, qmax, policy), parameter defaults, short description)
CATALOG: Dict[str, Tuple[Callable, Dict[str, object], str]] = {
    "nu": (lambda sid, q, p: mock_nu(q), {}, "nu(q) = sum q^{n(n+1)}/(-q;q^2)_{n+1}"),
    "phi": (lambda sid, q, p: mock_phi(q), {}, "phi(q) = sum q^{n^2}/(-q^2;q^2)_n"),
    "rho": (lambda sid, q, p: mock_rho(q), {}, "rho(q) = sum q^{n^2}/(q;q^2)_n"),
    "r_univ": (
        lambda sid, q, p: r_univ(_m(sid, "alpha", "zeta"), _m(sid, "beta", "-q"), _i(sid, "step", 2), q),
        {"alpha": "zeta", "beta": "-q", "step": 2},
        "R(alpha, beta; q^step)",
    ),
    "u_univ": (
        lambda sid, q, p: u_univ(_m(sid, "alpha", "zeta"), _m(sid, "beta", "-q"), _i(sid, "step", 2), q),
        {"alpha": "zeta", "beta": "-q", "step": 2},
        "U(alpha, beta; q^step)",
    ),
    "phi11": (
        lambda sid, q, p: phi_1_1(
            _m(sid, "lam", "q^2"), _m(sid, "mu", "-q"), _i(sid, "step", 2), _m(sid, "z", "-1"), q
        ),
        {"lam": "q^2", "mu": "-q", "step": 2, "z": "-1"},
        "1phi1(lam; mu; q^step; z)",
    ),
    "phi21": (
        lambda sid, q, p: phi_2_1(
            _m(sid, "lam", "q^2"),
            _m(sid, "mu", "-q"),
            _i(sid, "step", 2),
            _m(sid, "z", "zeta"),
            q,
            _i(sid, "nmax", p.zeta_cap + 1),
        ),
        {"lam": "q^2", "mu": "-q", "step": 2, "z": "zeta", "nmax": None},
        "2phi1(lam, 0; mu; q^step; z)",
    ),
    "fine_f": (
        lambda sid, q, p: fine_F(
            _m(sid, "a", "0"),
            _m(sid, "b", "-q^-1"),
            _m(sid, "t", "zeta"),
            _i(sid, "step", 2),
            q,
            _i(sid, "nmax", p.zeta_cap + 1),
        ),
        {"a": "0", "b": "-q^-1", "t": "zeta", "step": 2, "nmax": None},
        "F(a, b; t; q^step)",
    ),
    "ds1": (lambda sid, q, p: ds1(q, p), {}, "double sum for f_1 (with 1 + q^-1)"),
    "ds2": (lambda sid, q, p: ds2(q, p), {}, "double sum for f_2 (with factor 2)"),
    "ds3": (lambda sid, q, p: ds3(q, p), {}, "double sum for f_3"),
    "f1_cleared": (lambda sid, q, p: f_cleared(1, q, p), {}, "(1 - zeta) f_1"),
    "f2_cleared": (lambda sid, q, p: f_cleared(2, q, p), {}, "(1 - zeta) f_2"),
    "f3_cleared": (lambda sid, q, p: f_cleared(3, q, p), {}, "(1 - zeta) f_3"),
    "srivastava_rhs": (
        lambda sid, q, p: srivastava_rhs(
            _m(sid, "lam", "q^2"), _m(sid, "mu", "-q"), _m(sid, "z", "1"), _i(sid, "step", 2), q, p
        ),
        {"lam": "q^2", "mu": "-q", "z": "1", "step": 2},
        "double-sum side of the 1phi1 * 2phi1 product formula",
    ),
    "loos_m10": (lambda sid, q, p: loos_m10(q), {}, "double sum with q^{j^2+j+n}"),
    "loos_m17": (lambda sid, q, p: loos_m17(q), {}, "double sum with q^{j^2-j+n}"),
}


def build_series(sid: SeriesId, qmax: int, policy: Optional[TruncationPolicy] = None) -> QSeries:
    if sid.name not in CATALOG:
        raise SeriesUsageError(
            f"unknown series {sid.name!r}; known: {', '.join(sorted(CATALOG))}"
        )
    builder, defaults, _ = CATALOG[sid.name]
    unknown = set(dict(sid.params)) - set(defaults)
    if unknown:
        raise SeriesUsageError(f"unknown parameter(s) for {sid.name}: {', '.join(sorted(unknown))}")
    return builder(sid, qmax, policy or TruncationPolicy())

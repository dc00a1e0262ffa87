"""Complex evaluation of the nonholomorphic completion apparatus.

Everything here runs in a private :class:`mpmath.MPContext`, so no global
precision state is touched.  A public evaluation is done twice: once at the
working precision with the automatically chosen truncation, and once at
twice the precision with every summation index doubled.  The two values
must agree to ``target_tol`` (scaled by ``max(1, |value|)``), otherwise
:class:`ConvergenceError` is raised.  Results come back as Python
``complex`` (``float`` for :func:`E_fn`).

Conventions: ``q = e^{2 pi i tau}``, ``zeta = e^{2 pi i z}``; fractional
powers of ``q`` are exponentials of linear forms in ``tau``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import mpmath

from .series import QSeries

Number = Union[int, float, complex]

__all__ = [
    "NumericPolicy",
    "NumericError",
    "PoleError",
    "ConvergenceError",
    "Evaluation",
    "evaluate",
    "E_fn",
    "R_nh",
    "mu_fn",
    "M_choi",
    "r_univ_num",
    "u_univ_num",
    "C_completion",
    "C_zwegers",
    "completion_nu",
    "completion_phi",
    "completion_rho",
    "f_hat",
    "f_hat_parts",
    "completion_args",
    "mock_nu_num",
    "mock_phi_num",
    "mock_rho_num",
    "loos_m10_num",
    "loos_m17_num",
    "ds_num",
    "f_num",
    "f_cleared_num",
    "eval_qseries",
    "tail_estimate",
    "lattice_distance",
    "ramanujan_residual",
    "DEFAULT_GRID",
    "GridPoint",
    "load_grid",
    "residual_report",
]


class NumericError(ValueError):
    pass


class PoleError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


@dataclass(frozen=True)
class NumericPolicy:
    target_tol: float = 1e-12
    precision: int = 50  # decimal digits
    max_terms: int = 10_000
    min_im: float = 0.05
    pole_eps: float = 1e-8
    # numeric double sums need |zeta| <= 1 - zeta_margin
    zeta_margin: float = 0.3
    # multiplier on every automatically chosen summation index
    index_scale: int = 1
    double_run: bool = True

    def __post_init__(self):
        if not self.target_tol > 0:
            raise NumericError("target_tol must be positive")
        if self.precision < 30:
            raise NumericError("precision must be at least 30 digits")
        if self.max_terms < 1 or self.index_scale < 1:
            raise NumericError("max_terms and index_scale must be positive")


@dataclass
class Evaluation:
    value: complex
    # |value(p, N) - value(2p, 2N)|, None when the check run was skipped
    delta: Optional[float]
    terms: int
    precision: int

    def to_json(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "abs_change_on_doubling": self.delta,
            "terms": self.terms,
            "precision": self.precision,
        }


class _Eval:
    """One evaluation run: an mpmath context plus truncation bookkeeping."""

    def __init__(self, policy: NumericPolicy):
        self.policy = policy
        self.ctx = ctx = mpmath.MPContext()
        ctx.dps = policy.precision
        self.eps = ctx.mpf(policy.target_tol) / 1000
        self.scale = policy.index_scale
        self.terms = 0
        self.pi = ctx.pi
        self.two_pi_i = 2 * ctx.pi * ctx.j

    # -- helpers -----------------------------------------------------------

    def c(self, x) -> "mpmath.mpc":
        return self.ctx.mpc(x)

    def e(self, x):
        """``e^{2 pi i x}``."""
        return self.ctx.exp(self.two_pi_i * x)

    def _count(self, n: int = 1):
        self.terms += n
        if self.terms > self.policy.max_terms * 20:
            raise ConvergenceError("term budget exhausted")

    def check_q(self, q):
        if abs(q) >= 1:
            raise NumericError(f"|q| must be < 1, got {float(abs(q))}")

    def check_tau(self, tau):
        if self.ctx.im(tau) < self.policy.min_im:
            raise NumericError(f"Im(tau) must be at least {self.policy.min_im}, got {float(self.ctx.im(tau))}")

    def check_factor(self, f, what: str):
        if abs(f) < self.policy.pole_eps:
            raise PoleError(f"{what} vanishes to within {self.policy.pole_eps}")

    def series(self, start: int, term: Callable[[int], object], ratio_limit: float = 0.9):
        """Sum ``term(n)`` for ``n >= start`` with a geometric tail bound.

        Stops at the first n where the observed ratio ``r = |t_n / t_{n-1}|``
        is below ``ratio_limit`` and ``|t_n| r / (1 - r)`` is below eps; the
        stopping index is then multiplied by ``index_scale``.
        """
        ctx = self.ctx
        total = ctx.mpc(0)
        prev = None
        n = start
        stop = None
        while True:
            t = term(n)
            total += t
            self._count()
            a = abs(t)
            if stop is None:
                if prev is not None and prev > 0:
                    r = a / prev
                    if r < ratio_limit and a * r / (1 - r) <= self.eps * max(1, abs(total)):
                        stop = start + (n - start + 1) * self.scale
                elif prev is not None and prev == 0 and a == 0:
                    stop = start + (n - start + 1) * self.scale
            if stop is not None and n >= stop:
                return total
            if n - start > self.policy.max_terms:
                raise ConvergenceError(f"no convergence within {self.policy.max_terms} terms")
            prev = a
            n += 1

    def qpoch_inf(self, x, q):
        """``(x; q)_inf``."""
        ctx = self.ctx
        aq = abs(q)
        p = ctx.mpc(1)
        k = 0
        xk = x
        stop = None
        while True:
            p *= 1 - xk
            self._count()
            if stop is None and abs(xk) * aq / (1 - aq) <= self.eps:
                stop = (k + 1) * self.scale
            k += 1
            if stop is not None and k >= stop:
                return p
            if k > self.policy.max_terms:
                raise ConvergenceError("infinite product did not converge")
            xk *= q

    def qpoch(self, x, q, n: int):
        p = self.ctx.mpc(1)
        for k in range(n):
            p *= 1 - x * q ** k
        return p

    # -- E and R -----------------------------------------------------------

    def E(self, z):
        ctx = self.ctx
        return ctx.erf(ctx.sqrt(ctx.pi) * ctx.mpf(z))

    def R(self, u, tau):
        ctx = self.ctx
        u, tau = self.c(u), self.c(tau)
        self.check_tau(tau)
        y = ctx.im(tau)
        a = ctx.im(u) / y
        s2y = ctx.sqrt(2 * y)
        # |term| <= exp(-pi y ((n + a)^2 + a^2)) once |n + a| exceeds the span
        # between 0 and -a, so |n + a| <= T leaves a tail far below eps
        T = ctx.sqrt((-ctx.log(self.eps) + 2) / (ctx.pi * y)) + 1
        lo = int(ctx.floor(min(0, -a) - T * self.scale)) - 1
        hi = int(ctx.ceil(max(0, -a) + T * self.scale)) + 1
        if hi - lo > self.policy.max_terms:
            raise ConvergenceError(f"R(u; tau) needs {hi - lo} terms")
        sqpi = ctx.sqrt(ctx.pi)
        total = ctx.mpc(0)
        for k in range(lo, hi):
            n = k + ctx.mpf(1) / 2
            x = (n + a) * s2y
            # sgn(n) - E(x), written through erfc to avoid cancellation
            w = ctx.erfc(sqpi * x) if k >= 0 else -ctx.erfc(-sqpi * x)
            sign = -1 if k % 2 else 1  # (-1)^(n - 1/2)
            total += sign * w * ctx.exp(-ctx.pi * ctx.j * n * n * tau - 2 * ctx.pi * ctx.j * n * u)
        self._count(hi - lo)
        return total

    # -- mu, M -------------------------------------------------------------

    def check_lattice(self, u, tau, name: str):
        d = lattice_distance(complex(u), complex(tau))
        if d < self.policy.pole_eps:
            raise PoleError(f"{name} lies on the lattice Z tau + Z (distance {d:.3g})")

    def mu(self, u, v, tau):
        ctx = self.ctx
        u, v, tau = self.c(u), self.c(v), self.c(tau)
        self.check_tau(tau)
        self.check_lattice(u, tau, "u")
        self.check_lattice(v, tau, "v")
        q = self.e(tau)
        a = self.e(u)
        b = self.e(v)

        def term(n):
            d = 1 - a * q ** n
            self.check_factor(d, f"1 - e^(2 pi i u) q^{n}")
            return (-1) ** n * self.e(tau * n * (n + 1) / 2) * b ** n / d

        s = self.series(0, term) + self.series(1, lambda k: term(-k))
        q8 = self.e(tau / 8)
        den = -ctx.j * q8 * ctx.exp(-ctx.pi * ctx.j * v)
        den *= self.qpoch_inf(q, q) * self.qpoch_inf(b, q) * self.qpoch_inf(q / b, q)
        self.check_factor(den, "theta denominator")
        return ctx.exp(ctx.pi * ctx.j * u) / den * s

    def choi_prefactor(self, u, v, tau):
        """``q^{1/8} (1 - e^{2 pi i u}) e^{pi i (v - u)} (e^{2 pi i (tau - u)}; q)_inf (e^{-2 pi i v}; q)_inf``."""
        ctx = self.ctx
        u, v, tau = self.c(u), self.c(v), self.c(tau)
        q = self.e(tau)
        return (
            self.e(tau / 8)
            * (1 - self.e(u))
            * ctx.exp(ctx.pi * ctx.j * (v - u))
            * self.qpoch_inf(self.e(tau - u), q)
            * self.qpoch_inf(self.e(-v), q)
        )

    def M(self, u, v, tau):
        return self.ctx.j * self.choi_prefactor(u, v, tau) * self.mu(u, v, tau)

    # -- universal series --------------------------------------------------

    def r_univ(self, alpha, beta, q):
        alpha, beta, q = self.c(alpha), self.c(beta), self.c(q)
        self.check_q(q)
        state = {"t": self.ctx.mpc(1)}

        def term(n):
            if n:
                da = 1 - alpha * q ** n
                db = 1 - beta * q ** n
                self.check_factor(da, f"1 - alpha q^{n}")
                self.check_factor(db, f"1 - beta q^{n}")
                state["t"] *= alpha * beta * q ** (2 * n - 1) / (da * db)
            return state["t"]

        return self.series(0, term)

    def u_univ(self, alpha, beta, q):
        alpha, beta, q = self.c(alpha), self.c(beta), self.c(q)
        self.check_q(q)
        if alpha == 0 or beta == 0:
            raise NumericError("alpha and beta must be nonzero")
        ia, ib = 1 / alpha, 1 / beta
        state = {"t": self.ctx.mpc(1)}

        def term(n):
            state["t"] *= (1 - ia * q ** (n - 1)) * (1 - ib * q ** (n - 1)) * q
            return state["t"]

        return self.series(1, term, ratio_limit=max(0.9, float(abs(q)) ** 0.5))

    # -- completions -------------------------------------------------------

    def C_zwegers(self, u, v, tau):
        return -self.choi_prefactor(u, v, tau) / 2 * self.R(self.c(u) - self.c(v), tau)

    def C(self, u, v, tau):
        return self.C_zwegers(u, v, tau) + self.u_univ(self.e(u), self.e(v), self.e(tau))

    def completion(self, j: int, tau):
        ctx = self.ctx
        tau = self.c(tau)
        self.check_tau(tau)
        if j == 1:
            return -self.e(-tau / 2) * self.R(2 * tau, 12 * tau)
        if j == 2:
            return -ctx.exp(ctx.pi * ctx.j / 8) * self.e(-tau / 8) * self.R(-tau, 3 * tau + ctx.mpf(1) / 2)
        if j == 3:
            return -self.e(-3 * tau / 4) / 2 * self.R(tau, 6 * tau)
        raise NumericError(f"completion index must be 1, 2 or 3, got {j}")

    def f_hat_parts(self, j: int, z, tau) -> Dict[str, object]:
        z, tau = self.c(z), self.c(tau)
        self.check_tau(tau)
        zeta = self.e(z)
        q = self.e(tau)
        self.check_factor(1 - zeta, "1 - zeta")
        g = {1: 1 + q, 2: 1 + q * q, 3: 1 - q}[j]
        self.check_factor(g, "geometric factor")
        u, v, base = completion_args(j, z, tau, self.ctx)
        self.check_lattice(u, base, "z")
        w = zeta / ((1 - zeta) * g)
        return {"c": self.completion(j, tau), "w": w, "C": self.C(u, v, base)}

    def f_hat(self, j: int, z, tau):
        p = self.f_hat_parts(j, z, tau)
        c, wc = p["c"], p["w"] * p["C"]
        return -1 + c + wc + c * wc

    # -- q-series twins ----------------------------------------------------

    def _ratio_series(self, q, first, ratio):
        q = self.c(q)
        self.check_q(q)
        state = {"t": None}

        def term(n):
            if n == 0:
                state["t"] = first(q)
            else:
                state["t"] *= ratio(q, n)
            return state["t"]

        return self.series(0, term)

    def mock(self, j: int, q):
        if j == 1:
            return self._ratio_series(q, lambda q: 1 / (1 + q), lambda q, n: q ** (2 * n) / (1 + q ** (2 * n + 1)))
        if j == 2:
            return self._ratio_series(q, lambda q: self.ctx.mpc(1), lambda q, n: q ** (2 * n - 1) / (1 + q ** (2 * n)))
        if j == 3:
            return self._ratio_series(q, lambda q: self.ctx.mpc(1), lambda q, n: q ** (2 * n - 1) / (1 - q ** (2 * n - 1)))
        raise NumericError(f"mock theta index must be 1, 2 or 3, got {j}")

    def loos(self, q, sign: int):
        q = self.c(q)
        self.check_q(q)

        def row(n):
            # sum over 1 <= j <= n; the modulus sum drives the stopping rule
            pm = self.qpoch(self.ctx.mpc(-1), q, 2 * n)
            s = 0
            for j in range(1, n + 1):
                s += (
                    (-1) ** j * pm * q ** (j * j + sign * j + n)
                    / (self.qpoch(q * q, q * q, n - j) * self.qpoch(q * q, q * q, j - 1) * (1 - q ** (4 * j - 2)))
                )
            return s

        return self.series(1, row)

    def ds(self, j: int, zeta, q):
        ctx = self.ctx
        zeta, q = self.c(zeta), self.c(q)
        self.check_q(q)
        if abs(zeta) > 1 - self.policy.zeta_margin:
            raise NumericError(
                f"numeric double sums need |zeta| <= {1 - self.policy.zeta_margin}, got {float(abs(zeta))}"
            )
        if zeta == 0:
            raise PoleError("zeta = 0 is a pole of the summand")
        q2 = q * q
        if j == 1:
            pre, e0, d, x = 1 + 1 / q, 0, 0, -q
        elif j == 2:
            pre, e0, d, x = ctx.mpc(2), 1, 1, -q2
        elif j == 3:
            pre, e0, d, x = ctx.mpc(1), 1, 1, q
        else:
            raise NumericError(f"double sum index must be 1, 2 or 3, got {j}")

        def qbin(m, n):
            return self.qpoch(q2, q2, m + n) / (self.qpoch(q2, q2, m) * self.qpoch(q2, q2, n))

        def row(n):
            if j == 1:
                den0 = 1 + q ** (2 * n - 1)
            elif j == 2:
                den0 = 1 + q ** (2 * n)
            else:
                den0 = (1 - q ** (2 * n - 1)) / (1 - 1 / q)
            self.check_factor(den0, "row denominator")
            head = (-1) ** n * q ** (2 * n * n + e0 * n) / den0

            def col(m):
                return (
                    head
                    * zeta ** (n + m)
                    * qbin(m, n)
                    * self.qpoch(-(q ** (2 * n + d)) / zeta, q2, m)
                    / self.qpoch(x, q2, m + 2 * n)
                )

            return self.series(0, col)

        return pre * self.series(0, row)

    def f(self, j: int, zeta, q):
        zeta, q = self.c(zeta), self.c(q)
        self.check_factor(1 - zeta, "1 - zeta")
        beta, g = {1: (-q, 1 + q), 2: (-q * q, 1 + q * q), 3: (q, 1 - q)}[j]
        mock = self.mock(j, q) + (1 if j == 1 else 0)
        return mock * (1 + zeta / ((1 - zeta) * g) * self.r_univ(zeta, beta, q * q))


def completion_args(j: int, z, tau, ctx=None):
    """``(u, v, tau_base)`` for the completion attached to R(zeta, beta_j; q^2).

    ``u = z`` and ``tau_base = 2 tau``; ``v`` solves ``e^{2 pi i v} = beta_j``:
    ``tau + 1/2`` for ``-q``, ``2 tau + 1/2`` for ``-q^2`` and ``tau`` for ``q``.
    """
    half = ctx.mpf(1) / 2 if ctx is not None else 0.5
    v = {1: tau + half, 2: 2 * tau + half, 3: tau}
    if j not in v:
        raise NumericError(f"completion index must be 1, 2 or 3, got {j}")
    return z, v[j], 2 * tau


def lattice_distance(u: complex, tau: complex) -> float:
    """Distance from ``u`` to the nearest point of ``Z tau + Z``."""
    u, tau = complex(u), complex(tau)
    m0 = u.imag / tau.imag
    best = math.inf
    for m in (math.floor(m0), math.ceil(m0)):
        w = u - m * tau
        for n in (math.floor(w.real), math.ceil(w.real)):
            best = min(best, abs(w - n))
    return best


# ---------------------------------------------------------------------------
# public entry points


def evaluate(fn: Callable[["_Eval"], object], policy: Optional[NumericPolicy] = None) -> Evaluation:
    """Run ``fn`` at precision p, then at 2p with doubled indices, and compare."""
    policy = policy or NumericPolicy()
    ev = _Eval(policy)
    val = complex(fn(ev))
    delta = None
    if policy.double_run:
        ev2 = _Eval(replace(policy, precision=2 * policy.precision, index_scale=2 * policy.index_scale))
        val2 = complex(fn(ev2))
        delta = abs(val - val2)
        if delta > policy.target_tol * max(1.0, abs(val)):
            raise ConvergenceError(
                f"value changed by {delta:.3g} under doubled precision and truncation"
            )
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise ConvergenceError("non-finite value")
    return Evaluation(val, delta, ev.terms, policy.precision)


def _value(fn, policy) -> complex:
    return evaluate(fn, policy).value


def E_fn(z: float, policy: Optional[NumericPolicy] = None) -> float:
    """``E(z) = 2 int_0^z exp(-pi t^2) dt = erf(sqrt(pi) z)``."""
    if isinstance(z, complex) or not math.isfinite(z):
        raise NumericError("E is evaluated at finite real arguments")
    return _value(lambda ev: ev.E(z), policy).real


def R_nh(u: Number, tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.R(u, tau), policy)


def mu_fn(u: Number, v: Number, tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.mu(u, v, tau), policy)


def M_choi(u: Number, v: Number, tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.M(u, v, tau), policy)


def r_univ_num(alpha: Number, beta: Number, q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.r_univ(alpha, beta, q), policy)


def u_univ_num(alpha: Number, beta: Number, q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """Choi's series; pass ``q^2`` as ``q`` for the base-``q^2`` version."""
    return _value(lambda ev: ev.u_univ(alpha, beta, q), policy)


def C_completion(u: Number, v: Number, tau_base: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.C(u, v, tau_base), policy)


def C_zwegers(u: Number, v: Number, tau_base: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """The nonholomorphic part of :func:`C_completion` (the R(u - v) term)."""
    return _value(lambda ev: ev.C_zwegers(u, v, tau_base), policy)


def completion_nu(tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """``-q^{-1/2} R(2 tau; 12 tau)``."""
    return _value(lambda ev: ev.completion(1, tau), policy)


def completion_phi(tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """``-e^{pi i/8} q^{-1/8} R(-tau; 3 tau + 1/2)``."""
    return _value(lambda ev: ev.completion(2, tau), policy)


def completion_rho(tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """``-(1/2) q^{-3/4} R(tau; 6 tau)``."""
    return _value(lambda ev: ev.completion(3, tau), policy)


def f_hat(j: int, z: Number, tau: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """``-1 + c + w C + c w C`` with ``c`` the mock theta completion,
    ``w = zeta / ((1 - zeta) g_j)`` and ``C`` the completion of R(zeta, beta_j; q^2)."""
    return _value(lambda ev: ev.f_hat(j, z, tau), policy)


def f_hat_parts(j: int, z: Number, tau: Number, policy: Optional[NumericPolicy] = None) -> Dict[str, complex]:
    """The pieces ``c``, ``w`` and ``C`` that :func:`f_hat` combines."""
    policy = replace(policy or NumericPolicy(), double_run=False)
    ev = _Eval(policy)
    return {k: complex(x) for k, x in ev.f_hat_parts(j, z, tau).items()}


def mock_nu_num(q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.mock(1, q), policy)


def mock_phi_num(q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.mock(2, q), policy)


def mock_rho_num(q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.mock(3, q), policy)


def loos_m10_num(q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.loos(q, 1), policy)


def loos_m17_num(q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: ev.loos(q, -1), policy)


def ds_num(j: int, zeta: Number, q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """The j-th double sum summed directly at ``|zeta| <= 1 - zeta_margin``."""
    return _value(lambda ev: ev.ds(j, zeta, q), policy)


def f_num(j: int, zeta: Number, q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    """``f_j`` from its R-form, at numeric ``zeta != 1``."""
    return _value(lambda ev: ev.f(j, zeta, q), policy)


def f_cleared_num(j: int, zeta: Number, q: Number, policy: Optional[NumericPolicy] = None) -> complex:
    return _value(lambda ev: (1 - ev.c(zeta)) * ev.f(j, zeta, q), policy)


def ramanujan_residual(u: Number, v: Number, tau: Number, policy: Optional[NumericPolicy] = None) -> float:
    """``|M(u, v, tau) - R(e(u), e(v); q) - U(e(u), e(v); q)|``."""

    def fn(ev):
        a, b, q = ev.e(ev.c(u)), ev.e(ev.c(v)), ev.e(ev.c(tau))
        return ev.M(u, v, tau) - ev.r_univ(a, b, q) - ev.u_univ(a, b, q)

    return abs(evaluate(fn, policy).value)


# ---------------------------------------------------------------------------
# symbolic windows at numeric points


def _rat(ctx, c):
    if isinstance(c, Fraction):
        return ctx.mpf(c.numerator) / c.denominator
    return ctx.mpf(c)


def eval_qseries(series: QSeries, zeta: Number, q: Number, precision: int = 50) -> complex:
    """Horner evaluation of the known window of ``series`` at numeric (zeta, q)."""
    ctx = mpmath.MPContext()
    ctx.dps = precision
    zeta, q = ctx.mpc(zeta), ctx.mpc(q)
    coeffs = series.coeffs
    lo = series.min_order

    def at_zeta(d):
        s = ctx.mpc(0)
        for a, c in d.items():
            if a < 0 and zeta == 0:
                raise PoleError("negative zeta power evaluated at zeta = 0")
            s += _rat(ctx, c) * zeta ** a
        return s

    if q == 0:
        for b in range(lo, 0):
            if series.coefficient(b):
                raise PoleError("negative q power evaluated at q = 0")
        return complex(at_zeta(series.coefficient(0)) if series.qmax >= 0 else 0)
    acc = ctx.mpc(0)
    for d in reversed(coeffs):
        acc = acc * q + at_zeta(d)
    return complex(acc * q ** lo)


def tail_estimate(series: QSeries, q: Number) -> float:
    """``|q|^(qmax + 1)``, the size of the first unknown power of q."""
    return abs(complex(q)) ** (series.qmax + 1)


# ---------------------------------------------------------------------------
# sample grids


@dataclass(frozen=True)
class GridPoint:
    tau_re: float
    tau_im: float
    u_re: float
    u_im: float
    v_re: float
    v_im: float

    @property
    def tau(self) -> complex:
        return complex(self.tau_re, self.tau_im)

    @property
    def u(self) -> complex:
        return complex(self.u_re, self.u_im)

    @property
    def v(self) -> complex:
        return complex(self.v_re, self.v_im)


# Im(tau) spread over [0.5, 2]; u and v at least 0.05 from Z tau + Z
DEFAULT_GRID: Tuple[GridPoint, ...] = (
    GridPoint(0.0, 1.0, 0.3, 0.2, 0.1, 0.4),
    GridPoint(0.1, 0.8, 0.25, 0.3, -0.15, 0.35),
    GridPoint(0.0, 0.5, 0.2, 0.1, 0.35, 0.15),
    GridPoint(-0.3, 0.6, 0.4, 0.25, -0.2, 0.1),
    GridPoint(0.25, 0.75, -0.3, 0.4, 0.15, 0.2),
    GridPoint(0.5, 1.2, 0.1, 0.5, 0.45, 0.3),
    GridPoint(-0.45, 1.5, 0.35, 0.7, -0.25, 0.6),
    GridPoint(0.2, 1.8, -0.15, 0.9, 0.3, 0.45),
    GridPoint(-0.1, 2.0, 0.45, 1.1, 0.2, 0.8),
    GridPoint(0.35, 1.0, 0.15, 0.65, -0.4, 0.25),
)


def load_grid(source: Union[str, dict]) -> Tuple[List[GridPoint], Optional[float]]:
    """Parse ``{"points": [{tau_re, tau_im, u_re, u_im, v_re, v_im}], "tol": x}``."""
    data = json.loads(source) if isinstance(source, str) else source
    try:
        pts = [GridPoint(**{k: float(p[k]) for k in GridPoint.__dataclass_fields__}) for p in data["points"]]
    except (KeyError, TypeError) as exc:
        raise NumericError(f"malformed grid: {exc}") from None
    tol = data.get("tol")
    return pts, None if tol is None else float(tol)


def residual_report(
    points: Sequence[GridPoint], tol: float = 1e-9, policy: Optional[NumericPolicy] = None
) -> List[dict]:
    """Ramanujan residual at every grid point."""
    rows = []
    for p in points:
        row = asdict(p)
        try:
            r = ramanujan_residual(p.u, p.v, p.tau, policy)
            row.update(residual=r, status="PASS" if r < tol else "FAIL")
        except NumericError as exc:
            row.update(residual=None, status="ERROR", message=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows

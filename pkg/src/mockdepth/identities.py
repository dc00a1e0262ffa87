"""Registry of q-series identities and exact window verification.

Each :class:`IdentityRecord` pairs two builders.  A builder maps
``(qmax, policy, extra)`` to a :class:`QSeries`; ``extra`` widens every
summation bound it controls, which is what :func:`stability_check` uses.
Records with a clearing factor multiply both sides by ``1 - zeta`` unless a
side is already built in cleared form.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from .series import (
    QSeries,
    Rational,
    SeriesUsageError,
    TruncationPolicy,
    window_compare,
)
from .special import (
    ZERO,
    ZETA,
    Monomial,
    ds,
    f_cleared,
    fine_44_rhs,
    fine_63_rhs,
    fine_123_lhs,
    fine_F,
    mock_nu,
    mock_phi,
    mock_rho,
    phi_1_1,
    phi_2_1,
    r_univ,
    srivastava_rhs,
)

SCHEMA_VERSION = "1"
CLEARING = "(1 - zeta)"

Builder = Callable[[int, TruncationPolicy, int, Optional[dict]], QSeries]


@dataclass(frozen=True)
class Side:
    label: str
    build: Builder
    # already multiplied by the clearing factor
    precleared: bool = False


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    lhs: Side
    rhs: Side
    citation: str
    clearing: Optional[str] = None
    default_policy: TruncationPolicy = field(default_factory=TruncationPolicy)

    def side(self, which: str, qmax: int, policy: TruncationPolicy, extra: int = 0, stats=None) -> QSeries:
        s = self.lhs if which == "lhs" else self.rhs
        out = s.build(qmax, policy, extra, stats)
        if self.clearing and not s.precleared:
            out = out.mul_binomial(-1, 1, 0)
        return out


@dataclass
class VerifyReport:
    id: str
    status: str
    policy: TruncationPolicy
    first_mismatch: Optional[Tuple[int, int, Rational, Rational]] = None
    term_counts: Dict[str, int] = field(default_factory=dict)
    citation: str = ""
    clearing: Optional[str] = None
    wall_time: float = 0.0
    message: Optional[str] = None

    def to_json(self, timing: bool = True) -> dict:
        fm = None
        if self.first_mismatch is not None:
            b, a, x, y = self.first_mismatch
            fm = {"q": b, "zeta": a, "lhs": rat_str(x), "rhs": rat_str(y)}
        out = {
            "schema": SCHEMA_VERSION,
            "id": self.id,
            "status": self.status,
            "policy": {"A": self.policy.zeta_cap, "B": self.policy.q_cap, "G": self.policy.q_floor},
            "first_mismatch": fm,
            "term_counts": dict(self.term_counts),
            "citation": self.citation,
            "clearing": self.clearing,
        }
        if self.message is not None:
            out["message"] = self.message
        if timing:
            out["wall_time"] = round(self.wall_time, 6)
        return out


@dataclass
class StabilityReport:
    id: str
    margin: int
    status: str
    # first differing monomial between the base run and the widened run, per side
    lhs_change: Optional[Tuple[int, int, Rational, Rational]] = None
    rhs_change: Optional[Tuple[int, int, Rational, Rational]] = None
    message: Optional[str] = None

    def to_json(self) -> dict:
        def enc(m):
            if m is None:
                return None
            return {"q": m[0], "zeta": m[1], "base": rat_str(m[2]), "widened": rat_str(m[3])}

        out = {
            "schema": SCHEMA_VERSION,
            "id": self.id,
            "margin": self.margin,
            "status": self.status,
            "lhs_change": enc(self.lhs_change),
            "rhs_change": enc(self.rhs_change),
        }
        if self.message is not None:
            out["message"] = self.message
        return out


def rat_str(c) -> str:
    """Exact ``num/den`` serialization (integers keep ``/1``)."""
    if isinstance(c, int):
        return f"{c}/1"
    return f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# builders

M = Monomial.parse
Q2 = M("q^2")

_MOCKS = {1: mock_nu, 2: mock_phi, 3: mock_rho}
# (mu, beta) of each f-form, geometric factor 1/(1 + c q^e)
_SHIFTED = {1: ("-q", (1, 1)), 2: ("-q^2", (1, 2)), 3: ("q", (-1, 1))}
# (lam, mu, z) in the product formula
_PRODUCT = {1: ("q^2", "-q", "1"), 2: ("q^2", "-q^2", "q"), 3: ("q^2", "q", "q")}


def _zeta_terms(policy: TruncationPolicy, extra: int) -> int:
    # zeta^n terms needed for |zeta-exp| <= A after clearing by (1 - zeta)
    return policy.zeta_cap + 2 + extra


def _one_plus_nu(qmax, policy, extra, stats):
    return mock_nu(qmax, stats) + QSeries.one(qmax)


def _mock(j):
    if j == 1:
        return _one_plus_nu
    return lambda qmax, policy, extra, stats: _MOCKS[j](qmax, stats)


def _phi11_form(j):
    mu, z = {1: ("-q", "-1"), 2: ("-q^2", "-q"), 3: ("q", "-q")}[j]
    return lambda qmax, policy, extra, stats: phi_1_1(Q2, M(mu), 2, M(z), qmax, stats)


def _phi21(j):
    mu = _SHIFTED[j][0]
    return lambda qmax, policy, extra, stats: phi_2_1(
        Q2, M(mu), 2, ZETA, qmax, mmax=_zeta_terms(policy, extra), stats=stats
    )


def _shifted_rhs(j):
    beta, (c, e) = _SHIFTED[j]

    def build(qmax, policy, extra, stats):
        r = r_univ(ZETA, M(beta), 2, qmax, stats).div_binomial(c, 0, e).shift(1, 0)
        return QSeries.from_terms({(0, 0): 1, (0, 1): -1}, qmax) + r

    return build


def _f_cleared(j):
    return lambda qmax, policy, extra, stats: f_cleared(j, qmax, policy, stats)


def _ds(j):
    return lambda qmax, policy, extra, stats: ds(j, qmax, policy, extra, stats)


def _product_lhs(j):
    lam, mu, z = (M(x) for x in _PRODUCT[j])

    def build(qmax, policy, extra, stats):
        a = phi_1_1(lam, mu, 2, -z, qmax, stats)
        b = phi_2_1(lam, mu, 2, ZETA, qmax, mmax=_zeta_terms(policy, extra), stats=stats)
        return a * b

    return build


def _product_rhs(j):
    lam, mu, z = (M(x) for x in _PRODUCT[j])
    return lambda qmax, policy, extra, stats: srivastava_rhs(lam, mu, z, 2, qmax, policy, extra, stats)


def _fine_first(qmax, policy, extra, stats):
    return fine_F(ZERO, M("-q^-1"), ZETA, 2, qmax, nmax=_zeta_terms(policy, extra), stats=stats)


def _fine_first_rhs(qmax, policy, extra, stats):
    return fine_44_rhs(ZERO, M("-q^-1"), ZETA, 2, qmax, nmax=_zeta_terms(policy, extra), stats=stats)


def _fine_swap_lhs(qmax, policy, extra, stats):
    # t = -q carries q-growth, so no index cap is needed
    return fine_F(ZERO, ZETA, M("-q"), 2, qmax, stats=stats)


def _fine_swap_rhs(qmax, policy, extra, stats):
    return fine_63_rhs(ZERO, ZETA, M("-q"), 2, qmax, nmax=_zeta_terms(policy, extra), stats=stats)


def _fine_r_lhs(qmax, policy, extra, stats):
    return fine_123_lhs(ZETA, M("-q"), 2, qmax, stats=stats)


def _fine_r_rhs(qmax, policy, extra, stats):
    return r_univ(ZETA, M("-q"), 2, qmax, stats)


_MOCK_NAMES = {1: "1 + nu(q)", 2: "phi(q)", 3: "rho(q)"}
_BETA_NAMES = {1: "-q", 2: "-q^2", 3: "q"}
_GEOM_NAMES = {1: "1 + q", 2: "1 + q^2", 3: "1 - q"}


def _build_registry() -> Tuple[IdentityRecord, ...]:
    recs: List[IdentityRecord] = []
    phi11_args = {1: "(q^2; -q; q^2; -1)", 2: "(q^2; -q^2; q^2; -q)", 3: "(q^2; q; q^2; -q)"}
    for j in (1, 2, 3):
        recs.append(
            IdentityRecord(
                id=f"ID-A{j}",
                lhs=Side(_MOCK_NAMES[j], _mock(j)),
                rhs=Side("1phi1" + phi11_args[j], _phi11_form(j)),
                citation=f"{_MOCK_NAMES[j]} as a 1phi1 series in base q^2",
            )
        )
    for j in (1, 2, 3):
        beta = _BETA_NAMES[j]
        recs.append(
            IdentityRecord(
                id=f"ID-B{j}",
                lhs=Side(f"2phi1(q^2, 0; {beta}; q^2; zeta)", _phi21(j)),
                rhs=Side(
                    f"1 + zeta R(zeta, {beta}; q^2) / ((1 - zeta)({_GEOM_NAMES[j]}))",
                    _shifted_rhs(j),
                    precleared=True,
                ),
                citation=f"2phi1 with zero numerator slot rewritten through R(zeta, {beta}; q^2)",
                clearing=CLEARING,
            )
        )
    for j in (1, 2, 3):
        recs.append(
            IdentityRecord(
                id=f"ID-C{j}",
                lhs=Side(f"f_{j}(z, tau)", _f_cleared(j), precleared=True),
                rhs=Side(f"double-sum representation of f_{j}", _ds(j)),
                citation=f"double-sum q-series representation of f_{j}",
                clearing=CLEARING,
            )
        )
    for j in (1, 2, 3):
        lam, mu, z = _PRODUCT[j]
        recs.append(
            IdentityRecord(
                id=f"ID-D{j}",
                lhs=Side(f"1phi1({lam}; {mu}; q^2; -{z}) * 2phi1({lam}, 0; {mu}; q^2; zeta)", _product_lhs(j)),
                rhs=Side(f"product-formula double sum at (lam, mu, z) = ({lam}, {mu}, {z})", _product_rhs(j)),
                citation=f"Srivastava's product formula at (lam, mu, z) = ({lam}, {mu}, {z}), base q^2",
            )
        )
    recs.append(
        IdentityRecord(
            id="ID-E1",
            lhs=Side("F(0, -q^-1; zeta; q^2)", _fine_first),
            rhs=Side("1 + zeta/(1 + q) F(0, -q; zeta; q^2)", _fine_first_rhs),
            citation="Fine's first-order recursion F(a,b;t) in terms of F(a,bq;t), at a = 0, b = -q^-1, t = zeta",
        )
    )
    recs.append(
        IdentityRecord(
            id="ID-E2",
            lhs=Side("F(0, zeta; -q; q^2)", _fine_swap_lhs),
            rhs=Side("(1 - zeta)/(1 + q) F(0, -q; zeta; q^2)", _fine_swap_rhs),
            citation="Fine's b <-> t exchange F(a,b;t) = (1-b)/(1-t) F(at/b, t; b), at a = 0, b = zeta, t = -q",
        )
    )
    recs.append(
        IdentityRecord(
            id="ID-E3",
            lhs=Side("(1 + q) F(0, zeta; -q; q^2)", _fine_r_lhs),
            rhs=Side("R(zeta, -q; q^2)", _fine_r_rhs),
            citation="Fine's identity (1-t) F(0,b;t) = R(b, t), at b = zeta, t = -q",
        )
    )
    return tuple(recs)


_REGISTRY = _build_registry()
_BY_ID = {r.id: r for r in _REGISTRY}


def registry() -> Tuple[IdentityRecord, ...]:
    return _REGISTRY


def lookup(identity_id: str) -> IdentityRecord:
    try:
        return _BY_ID[identity_id]
    except KeyError:
        raise SeriesUsageError(
            f"unknown identity {identity_id!r}; known: {', '.join(sorted(_BY_ID))}"
        ) from None


# ---------------------------------------------------------------------------
# verification


def _check_policy(policy: TruncationPolicy):
    if policy.q_cap < 4:
        raise SeriesUsageError(f"q_cap must be at least 4, got {policy.q_cap}")


def build_sides(
    rec: IdentityRecord, policy: TruncationPolicy, extra: int = 0, counts: Optional[dict] = None
) -> Tuple[QSeries, QSeries]:
    """Both sides at ``qmax = B`` with the clearing factor applied."""
    counts = {} if counts is None else counts
    ls: dict = {}
    rs: dict = {}
    lhs = rec.side("lhs", policy.q_cap, policy, extra, ls)
    rhs = rec.side("rhs", policy.q_cap, policy, extra, rs)
    counts["lhs"] = ls.get("terms", 0)
    counts["rhs"] = rs.get("terms", 0)
    return lhs, rhs


def verify(
    identity_id: str,
    policy: Optional[TruncationPolicy] = None,
    extra: int = 0,
    perturb: Optional[Tuple[int, int, Rational]] = None,
) -> VerifyReport:
    """Window-compare both sides of a registered identity.

    ``perturb = (q_exp, zeta_exp, c)`` adds ``c zeta^zeta_exp q^q_exp`` to the
    (cleared) right-hand side before comparing; it exists for fault injection.
    """
    return verify_record(lookup(identity_id), policy, extra, perturb)


def verify_record(
    rec: IdentityRecord,
    policy: Optional[TruncationPolicy] = None,
    extra: int = 0,
    perturb: Optional[Tuple[int, int, Rational]] = None,
) -> VerifyReport:
    policy = policy or rec.default_policy
    _check_policy(policy)
    counts: Dict[str, int] = {}
    t0 = time.perf_counter()
    try:
        lhs, rhs = build_sides(rec, policy, extra, counts)
        if perturb is not None:
            b, a, c = perturb
            rhs = rhs + QSeries.monomial(c, a, b, rhs.qmax)
        cmp = window_compare(lhs, rhs, policy)
    except (ArithmeticError, ValueError, RecursionError) as exc:
        return VerifyReport(
            rec.id, "ERROR", policy, None, counts, rec.citation, rec.clearing,
            time.perf_counter() - t0, f"{type(exc).__name__}: {exc}",
        )
    status = "PASS" if cmp.equal else "FAIL"
    return VerifyReport(
        rec.id, status, policy, cmp.mismatch, counts, rec.citation, rec.clearing, time.perf_counter() - t0
    )


def _verify_worker(args):
    identity_id, policy = args
    return verify(identity_id, policy)


def verify_all(policy: Optional[TruncationPolicy] = None, jobs: int = 1) -> List[VerifyReport]:
    """Verify every record; reports come back ordered by id."""
    policy = policy or TruncationPolicy()
    _check_policy(policy)
    ids = sorted(_BY_ID)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_verify_worker, [(i, policy) for i in ids]))
    else:
        reports = [verify(i, policy) for i in ids]
    return sorted(reports, key=lambda r: r.id)


def stability_check(identity_id: str, policy: Optional[TruncationPolicy] = None, margin: Optional[int] = None) -> StabilityReport:
    """Rebuild both sides with every summation bound raised by the margin.

    PASS when the widened run reproduces the base windows on both sides.
    """
    rec = lookup(identity_id)
    policy = policy or rec.default_policy
    _check_policy(policy)
    margin = policy.stability_margin if margin is None else margin
    try:
        base = build_sides(rec, policy, 0)
        wide = base if margin == 0 else build_sides(rec, policy, margin)
    except (ArithmeticError, ValueError, RecursionError) as exc:
        return StabilityReport(rec.id, margin, "ERROR", message=f"{type(exc).__name__}: {exc}")
    lc = window_compare(base[0], wide[0], policy)
    rc = window_compare(base[1], wide[1], policy)
    status = "PASS" if lc.equal and rc.equal else "FAIL"
    return StabilityReport(rec.id, margin, status, lc.mismatch, rc.mismatch)


def unclear(series: QSeries, zeta_cap: int) -> QSeries:
    """Multiply by ``1 + zeta + ... + zeta^zeta_cap`` (the window of ``1/(1 - zeta)``)."""
    geo = QSeries.from_terms({(0, k): 1 for k in range(zeta_cap + 1)}, series.qmax)
    return series * geo


def with_window(policy: TruncationPolicy, A: Optional[int] = None, B: Optional[int] = None) -> TruncationPolicy:
    return replace(
        policy,
        zeta_cap=policy.zeta_cap if A is None else A,
        q_cap=policy.q_cap if B is None else B,
    )

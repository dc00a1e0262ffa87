import cmath
import json
import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from mockdepth import numerics as nm
from mockdepth.numerics import (
    DEFAULT_GRID,
    ConvergenceError,
    NumericError,
    NumericPolicy,
    PoleError,
)
from mockdepth.series import QSeries, TruncationPolicy
from mockdepth.special import ZETA, Monomial, ds, loos_m10, loos_m17, mock_nu, mock_phi, mock_rho, r_univ, u_univ

M = Monomial.parse
DOUBLED = NumericPolicy(precision=100, index_scale=2, double_run=False)


def e(x):
    return cmath.exp(2j * math.pi * x)


# ---------------------------------------------------------------------------
# E


def quad_E(z):
    with mpmath.workdps(40):
        return float(2 * mpmath.quad(lambda t: mpmath.exp(-mpmath.pi * t * t), [0, z]))


def test_E_zero():
    assert nm.E_fn(0) == 0


def test_E_one_against_quadrature():
    assert abs(nm.E_fn(1) - quad_E(1)) < 1e-14
    assert abs(nm.E_fn(1) - 0.98776) < 1e-4


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3))
def test_E_odd(z):
    assert abs(nm.E_fn(-z) + nm.E_fn(z)) < 1e-12
    assert abs(nm.E_fn(z) - quad_E(z)) < 1e-12


def test_E_rejects_complex():
    with pytest.raises(NumericError):
        nm.E_fn(1j)


# ---------------------------------------------------------------------------
# R(u; tau)


def naive_R(u, tau, N=40, dps=80):
    """Direct sum with sgn(n) - E(x) evaluated through erf, at high precision."""
    with mpmath.workdps(dps):
        u, tau = mpmath.mpc(u), mpmath.mpc(tau)
        a = mpmath.im(u) / mpmath.im(tau)
        s = 0
        for k in range(-N, N):
            n = k + mpmath.mpf(1) / 2
            x = (n + a) * mpmath.sqrt(2 * mpmath.im(tau))
            w = (1 if n > 0 else -1) - mpmath.erf(mpmath.sqrt(mpmath.pi) * x)
            s += w * (-1) ** k * mpmath.exp(-mpmath.pi * 1j * n * n * tau - 2 * mpmath.pi * 1j * n * u)
        return complex(s)


def test_R_at_i():
    val = nm.R_nh(0.5j, 1j)
    assert abs(val - naive_R(0.5j, 1j)) < 1e-10
    assert abs(val - nm.R_nh(0.5j, 1j, DOUBLED)) < 1e-10


def test_R_large_imaginary_part():
    val = nm.R_nh(1j, 10j)
    assert abs(val) < 1
    assert abs(val - naive_R(1j, 10j, N=12)) < 1e-10


def test_R_generic_point():
    u, tau = 0.3 - 0.7j, -0.2 + 0.6j
    assert abs(nm.R_nh(u, tau) - naive_R(u, tau, N=60, dps=120)) < 1e-10


def test_R_guards():
    with pytest.raises(NumericError):
        nm.R_nh(0.1, 0.01j)
    with pytest.raises(ConvergenceError):
        nm.R_nh(0.1, 0.06j, NumericPolicy(max_terms=5))


# ---------------------------------------------------------------------------
# mu and M


POINT1 = (0.3 + 0.2j, 0.1 + 0.4j, 1j)
POINT2 = (0.25 + 0.3j, -0.15 + 0.35j, 0.1 + 0.8j)


def test_mu_doubling_stable():
    u, v, tau = POINT1
    assert abs(nm.mu_fn(u, v, tau) - nm.mu_fn(u, v, tau, DOUBLED)) < 1e-10


def test_mu_pole():
    with pytest.raises(PoleError):
        nm.mu_fn(0, 0.1 + 0.4j, 1j)
    with pytest.raises(PoleError):
        nm.mu_fn(0.3 + 0.2j, 1j, 1j)  # v = tau


@pytest.mark.parametrize("pt", [POINT1, POINT2])
def test_ramanujan_identity(pt):
    u, v, tau = pt
    a, b, q = e(u), e(v), e(tau)
    lhs = nm.M_choi(u, v, tau)
    rhs = nm.r_univ_num(a, b, q) + nm.u_univ_num(a, b, q)
    assert abs(lhs - rhs) < 1e-9


def test_ramanujan_grid():
    rows = nm.residual_report(DEFAULT_GRID, 1e-9)
    assert len(rows) == 10
    assert all(r["status"] == "PASS" for r in rows)


def test_default_grid_shape():
    for p in DEFAULT_GRID:
        assert 0.5 <= p.tau_im <= 2
        assert nm.lattice_distance(p.u, p.tau) >= 0.05
        assert nm.lattice_distance(p.v, p.tau) >= 0.05


def test_M_periodic_in_u():
    u, v, tau = POINT2
    assert abs(nm.M_choi(u, v, tau) - nm.M_choi(u + 1, v, tau)) < 1e-10


def test_lattice_distance():
    tau = 0.3 + 1.1j
    assert nm.lattice_distance(2 * tau - 1, tau) < 1e-15
    assert abs(nm.lattice_distance(0.5, tau) - 0.5) < 1e-15


# ---------------------------------------------------------------------------
# R, U numerics


def test_r_univ_num_trivial():
    assert nm.r_univ_num(0.3, 0.7j, 0) == 1
    assert nm.u_univ_num(1, 1, 0.4) == 0


def test_r_univ_num_guards():
    with pytest.raises(NumericError):
        nm.r_univ_num(0.3, 0.2, 1.0)
    with pytest.raises(PoleError):
        nm.r_univ_num(1 / 0.5, 0.2, 0.5)  # 1 - alpha q = 0
    with pytest.raises(NumericError):
        nm.u_univ_num(0, 1, 0.3)


def test_r_window_against_numeric():
    z, q = 0.3 + 0.4j, 0.2
    s = r_univ(ZETA, M("-q"), 2, 60)
    assert abs(nm.eval_qseries(s, z, q) - nm.r_univ_num(z, -q, q * q)) < 1e-8


def test_u_window_against_numeric():
    z, q = 0.5 + 0.3j, 0.25
    s = u_univ(ZETA, M("-q"), 2, 60)
    assert abs(nm.eval_qseries(s, z, q) - nm.u_univ_num(z, -q, q * q)) < 1e-6


@pytest.mark.parametrize(
    "build, twin",
    [
        (mock_nu, nm.mock_nu_num),
        (mock_phi, nm.mock_phi_num),
        (mock_rho, nm.mock_rho_num),
        (loos_m10, nm.loos_m10_num),
        (loos_m17, nm.loos_m17_num),
    ],
)
def test_single_variable_coherence(build, twin):
    for q in (0.25, -0.2 + 0.1j):
        assert abs(nm.eval_qseries(build(60), 0, q) - twin(q)) < 1e-6


@pytest.mark.parametrize("j", [1, 2, 3])
def test_double_sum_coherence(j):
    z, q = 0.5 + 0.3j, 0.25
    s = ds(j, 60, TruncationPolicy(zeta_cap=40, q_cap=60)).truncate_zeta(40)
    assert abs(nm.eval_qseries(s, z, q) - nm.ds_num(j, z, q)) < 1e-6


@pytest.mark.parametrize("j", [1, 2, 3])
def test_double_sum_equals_closed_form_numerically(j):
    z, q = -0.4 + 0.2j, 0.3 - 0.1j
    assert abs(nm.ds_num(j, z, q) - nm.f_num(j, z, q)) < 1e-10


def test_double_sum_needs_small_zeta():
    with pytest.raises(NumericError):
        nm.ds_num(1, 0.9, 0.2)


# ---------------------------------------------------------------------------
# completions


def test_C_structure():
    u, v, tau = POINT1
    q = e(tau)
    total = nm.C_completion(u, v, tau)
    pre = (
        -cmath.exp(2j * math.pi * tau / 8) / 2 * (1 - e(u)) * cmath.exp(1j * math.pi * (v - u))
        * complex(mpmath.qp(e(tau - u), q)) * complex(mpmath.qp(e(-v), q))
    )
    assert abs((total - nm.u_univ_num(e(u), e(v), q)) - pre * nm.R_nh(u - v, tau)) < 1e-10


def test_completion_consistency():
    u, v, tau = POINT2
    a, b, q = e(u), e(v), e(tau)
    lhs = nm.r_univ_num(a, b, q) + nm.C_completion(u, v, tau)
    rhs = nm.M_choi(u, v, tau) + nm.C_zwegers(u, v, tau)
    assert abs(lhs - rhs) < 1e-9


def test_argument_assembly():
    tau = 0.15 + 0.9j
    q = e(tau)
    for j, beta in ((1, -q), (2, -q * q), (3, q)):
        u, v, base = nm.completion_args(j, 0.2, tau)
        assert u == 0.2 and base == 2 * tau
        assert abs(e(v) - beta) < 1e-12


def test_completion_nu_stable():
    val = nm.completion_nu(1j)
    assert math.isfinite(abs(val))
    assert abs(val - nm.completion_nu(1j, DOUBLED)) < 1e-10


def test_completion_prefactors():
    tau = 0.1 + 0.7j
    assert abs(nm.completion_nu(tau) + cmath.exp(-1j * math.pi * tau) * nm.R_nh(2 * tau, 12 * tau)) < 1e-12
    assert (3 * tau + 0.5).imag == pytest.approx(3 * tau.imag)
    phi = -cmath.exp(1j * math.pi / 8) * cmath.exp(-2j * math.pi * tau / 8) * nm.R_nh(-tau, 3 * tau + 0.5)
    assert abs(nm.completion_phi(tau) - phi) < 1e-12
    rho = -0.5 * cmath.exp(-3j * math.pi * tau / 2) * nm.R_nh(tau, 6 * tau)
    assert abs(nm.completion_rho(tau) - rho) < 1e-12


@pytest.mark.parametrize("j", [1, 2, 3])
def test_f_hat_finite_and_stable(j):
    val = nm.f_hat(j, 0.2, 1j)
    assert math.isfinite(abs(val))
    assert abs(val - nm.f_hat(j, 0.2, 1j, DOUBLED)) < 1e-9


def test_f_hat_regrouping():
    p = nm.f_hat_parts(1, 0.2, 1j)
    c, w, C = p["c"], p["w"], p["C"]
    printed = -1 + c + w * C + c * w * C
    grouped = (-1 + c) * (1 + w * C) + 2 * w * C
    assert abs(printed - grouped) < 1e-12
    assert abs(printed - nm.f_hat(1, 0.2, 1j)) < 1e-12
    assert abs(c - nm.completion_nu(1j)) < 1e-12


def test_f_hat_pole_at_zeta_one():
    with pytest.raises(PoleError):
        nm.f_hat(1, 0, 1j)
    with pytest.raises(PoleError):
        nm.f_hat(1, 1.0, 1j)


# ---------------------------------------------------------------------------
# eval_qseries


def test_eval_simple():
    s = QSeries.from_terms({(0, 0): 1, (1, 1): 1}, 3)
    assert abs(nm.eval_qseries(s, 2j, 0.5) - (1 + 1j)) < 1e-15


def test_eval_at_q_zero():
    s = QSeries.from_terms({(0, 1): 3, (0, -1): 1, (2, 0): 5}, 4)
    assert nm.eval_qseries(s, 2, 0) == 6.5
    with pytest.raises(PoleError):
        nm.eval_qseries(QSeries.from_terms({(-1, 0): 1}, 4), 1, 0)


def test_eval_laurent():
    s = QSeries.from_terms({(-1, 0): 1, (0, 0): 1}, 5)
    assert abs(nm.eval_qseries(s, 1, 0.5) - 3) < 1e-15


def test_tail_estimate():
    assert nm.tail_estimate(QSeries.one(9), 0.5) == 0.5 ** 10


def test_cleared_double_sum_window_matches_numeric():
    from mockdepth.identities import build_sides, lookup

    pol = TruncationPolicy(zeta_cap=16, q_cap=60)
    _, rhs = build_sides(lookup("ID-C1"), pol)
    z, q = 0.3 + 0.4j, 0.2
    val = nm.eval_qseries(rhs.truncate_zeta(16), z, q)
    assert abs(val - nm.f_cleared_num(1, z, q)) < 1e-6


# ---------------------------------------------------------------------------
# policy and grid I/O


def test_policy_validation():
    with pytest.raises(NumericError):
        NumericPolicy(target_tol=0)
    with pytest.raises(NumericError):
        NumericPolicy(precision=20)


def test_no_global_precision_change():
    before = mpmath.mp.dps
    nm.M_choi(*POINT1, NumericPolicy(precision=80))
    assert mpmath.mp.dps == before


def test_grid_round_trip():
    doc = {"points": [p.__dict__ for p in DEFAULT_GRID[:2]], "tol": 1e-10}
    pts, tol = nm.load_grid(json.dumps(doc))
    assert pts == list(DEFAULT_GRID[:2]) and tol == 1e-10
    with pytest.raises(NumericError):
        nm.load_grid({"points": [{"tau_re": 0}]})


def test_residual_report_flags_errors():
    bad = nm.GridPoint(0, 1, 0, 0, 0.1, 0.4)  # u on the lattice
    (row,) = nm.residual_report([bad])
    assert row["status"] == "ERROR"

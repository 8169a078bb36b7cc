"""Kernel, nonlinearity, sequence, and scaler unit tests.

Derived expectations are computed by independent oracles inside the tests
(dense grid searches, brute-force partial sums with integral tail brackets)
rather than trusted from the implementation under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volterra.seqcore import (
    EnvelopeSpec,
    EvalDomainError,
    KernelSpec,
    NonlinearitySpec,
    RealSeq,
    ScalerSpec,
    SpecError,
)


# ---------------------------------------------------------------- kernels


def test_kernel_l1_geometric_closed_form():
    assert KernelSpec.geometric(1.0, 0.5).l1() == 2.0
    assert KernelSpec.geometric(2.0, -0.5).l1() == 4.0


def test_kernel_l1_finite_sum_of_abs():
    assert KernelSpec.finite([1.0, -2.0, 3.0]).l1() == 6.0
    assert KernelSpec.null().l1() == 0.0


def brute_polynomial_l1(c, beta, terms=10**6):
    """Oracle: partial sum plus the integral bracket midpoint for the tail."""
    j = np.arange(terms, dtype=float)
    head = float(np.sum(np.abs(c) * (j + 1.0) ** -beta))
    upper = float(terms) ** (1.0 - beta) / (beta - 1.0)
    lower = float(terms + 1) ** (1.0 - beta) / (beta - 1.0)
    return head + abs(c) * 0.5 * (upper + lower), abs(c) * 0.5 * (upper - lower)


def test_kernel_l1_polynomial_against_brute_force():
    k = KernelSpec.polynomial(1.0, 2.0)
    oracle, oracle_err = brute_polynomial_l1(1.0, 2.0)
    assert abs(k.l1() - oracle) <= oracle_err + k.trunc_tol
    assert abs(k.l1() - math.pi**2 / 6.0) <= 1e-9  # the series has a known limit


def test_kernel_even_index_sum():
    assert KernelSpec.geometric(1.0, 0.5).even_index_sum() == pytest.approx(4.0 / 3.0, abs=1e-14)
    assert KernelSpec.finite([1.0, 5.0, 2.0, 5.0]).even_index_sum() == 3.0
    # polynomial: sum over odd integers m of m**-2 = pi^2 / 8
    assert KernelSpec.polynomial(1.0, 2.0).even_index_sum() == pytest.approx(math.pi**2 / 8.0, abs=1e-9)


def test_kernel_truncation_certified_against_l1():
    for k in (
        KernelSpec.geometric(1.0, 0.9),
        KernelSpec.geometric(-2.0, 0.5),
        KernelSpec.polynomial(1.0, 2.5),
        KernelSpec.finite([0.3, -0.1, 0.05]),
    ):
        support = k.certified_support()
        length = min(support, 10**6)  # cap for runtime
        coeffs = k.coefficients(length)
        materialised = float(np.sum(np.abs(coeffs)))
        assert k.l1() - materialised <= k.tail_l1(length) + 1e-12
        if support <= 10**6:
            assert abs(k.l1() - materialised) <= k.trunc_tol + 1e-12


def test_kernel_invariants_rejected():
    with pytest.raises(SpecError):
        KernelSpec.geometric(1.0, 1.0)
    with pytest.raises(SpecError):
        KernelSpec.geometric(1.0, -1.5)
    with pytest.raises(SpecError):
        KernelSpec.polynomial(1.0, 1.0)
    with pytest.raises(SpecError):
        KernelSpec.finite([1.0, math.inf])
    with pytest.raises(SpecError):
        KernelSpec(variant="mystery")


def test_kernel_coefficients_match_formula():
    k = KernelSpec.geometric(2.0, -0.5)
    np.testing.assert_allclose(k.coefficients(4), [2.0, -1.0, 0.5, -0.25])
    kp = KernelSpec.polynomial(3.0, 2.0)
    np.testing.assert_allclose(kp.coefficients(3), [3.0, 0.75, 1.0 / 3.0])
    kf = KernelSpec.finite([1.0, 2.0])
    np.testing.assert_allclose(kf.coefficients(4), [1.0, 2.0, 0.0, 0.0])


# ----------------------------------------------------------- nonlinearity


def test_signed_power_values():
    f = NonlinearitySpec.signed_power(0.5)
    assert f.eval(4.0) == 2.0
    assert f.eval(-9.0) == -3.0
    assert f.eval(0.0) == 0.0


def test_bounded_ramp_saturates():
    f = NonlinearitySpec.bounded(3.0)
    assert f.eval(100.0) == 3.0
    assert f.eval(-100.0) == -3.0
    assert f.eval(1.5) == 1.5


def test_table_interpolation_and_domain_error():
    f = NonlinearitySpec.table([-1.0, 0.0, 2.0], [-0.5, 0.0, 1.0])
    assert f.eval(1.0) == 0.5
    with pytest.raises(EvalDomainError):
        f.eval(3.0)


def grid_search_F(alpha, eps):
    """Oracle for the sublinearity constant: maximise u**alpha - eps*u."""
    u = np.concatenate(([0.0], np.logspace(-12, 12, 240001)))
    return float(np.max(u**alpha - eps * u))


@pytest.mark.parametrize("eps,expected", [(0.5, 0.5), (1.0, 0.25)])
def test_sublinearity_bound_signed_power_closed_form(eps, expected):
    f = NonlinearitySpec.signed_power(0.5)
    oracle = grid_search_F(0.5, eps)
    assert f.sublinearity_bound(eps) == pytest.approx(oracle, rel=1e-6)
    assert f.sublinearity_bound(eps) == pytest.approx(expected, rel=1e-12)


def test_sublinearity_bound_bounded_variant():
    assert NonlinearitySpec.bounded(3.0).sublinearity_bound(0.01) == 3.0


def test_sublinearity_bound_rejects_bad_eps():
    with pytest.raises(EvalDomainError):
        NonlinearitySpec.signed_power(0.5).sublinearity_bound(0.0)


@pytest.mark.parametrize(
    "f",
    [
        NonlinearitySpec.signed_power(0.3),
        NonlinearitySpec.signed_power(0.5),
        NonlinearitySpec.signed_power(0.9),
        NonlinearitySpec.bounded(2.0),
        NonlinearitySpec.table([-5.0, -1.0, 0.0, 3.0, 7.0], [-1.0, -0.8, 0.0, 1.1, 1.2]),
    ],
)
@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_sublinearity_envelope_holds_on_log_grid(f, eps):
    big = f.sublinearity_bound(eps)
    xs = np.concatenate(([0.0], np.logspace(-9, 12, 2000)))
    xs = np.concatenate((xs, -xs))
    if f.variant == "table":
        xs = xs[(xs >= f.table_x[0]) & (xs <= f.table_x[-1])]
    vals = np.abs(f.eval_array(xs))
    assert np.all(vals <= big + eps * np.abs(xs) + 1e-12)


@given(st.floats(min_value=-1e12, max_value=1e12, allow_nan=False), st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=200, deadline=None)
def test_signed_power_is_odd(x, alpha):
    f = NonlinearitySpec.signed_power(alpha)
    assert f.eval(-x) == -f.eval(x)


def test_signed_power_default_envelope_matches_exactly():
    f = NonlinearitySpec.signed_power(0.4)
    assert f.envelope is not None and f.envelope.gamma == 0.4
    for x in (0.5, 3.0, 1e6):
        assert abs(f.eval(x)) == pytest.approx(f.envelope.phi(abs(x)), rel=1e-12)


def test_envelope_invariants():
    with pytest.raises(SpecError):
        EnvelopeSpec(gamma=1.5)
    with pytest.raises(SpecError):
        EnvelopeSpec(gamma=0.5, scale=0.0)


# ------------------------------------------------------------- sequences


def test_realseq_rejects_nonfinite_and_bad_start():
    with pytest.raises(SpecError):
        RealSeq(0, np.array([1.0, math.nan]))
    with pytest.raises(SpecError):
        RealSeq(2, np.array([1.0]))


def test_realseq_indexing():
    seq = RealSeq(1, np.array([10.0, 20.0, 30.0]))
    assert seq.at(1) == 10.0 and seq.at(3) == 30.0
    assert seq.end == 3
    with pytest.raises(EvalDomainError):
        seq.at(0)
    np.testing.assert_array_equal(seq.prefix(2).values, [10.0, 20.0])


# --------------------------------------------------------------- scalers


def test_scaler_values():
    a = ScalerSpec.sqrt_log()
    assert a.eval(7) == pytest.approx(math.sqrt(2.0 * math.log(7.0)), rel=1e-15)
    assert ScalerSpec.power(1.0).eval(5) == 5.0
    assert ScalerSpec.exponential(0.1).eval(3) == pytest.approx(math.exp(0.3), rel=1e-15)


def test_scaler_domain():
    with pytest.raises(EvalDomainError):
        ScalerSpec.sqrt_log().eval(1)
    with pytest.raises(SpecError):
        ScalerSpec.exponential(0.0)
    with pytest.raises(SpecError):
        ScalerSpec.power(-1.0)


@pytest.mark.parametrize(
    "a,n_max,bound",
    [
        (ScalerSpec.sqrt_log(), 10**9, 6.0),
        (ScalerSpec.power(0.5), 10**9, 3e4),
        (ScalerSpec.exponential(0.05), 10**3, 1e20),  # exp leaves double range above ~1.4e4
    ],
)
def test_scaler_nondecreasing_and_diverging(a, n_max, bound):
    ns = np.unique(np.logspace(math.log10(a.min_index), math.log10(n_max), 200).astype(np.int64))
    vals = a.eval_array(ns)
    assert np.all(np.diff(vals) >= 0)
    assert vals.min() > 0
    assert a.eval(n_max) > bound

"""Solver unit and property tests: hand-recursion oracles, round trips,
solver-mode equivalence, pathwise envelopes, and overflow reporting."""

import math

import numpy as np
import pytest

from volterra.diagnostics import verify_path_bounds
from volterra.engine import (
    SimConfig,
    SimulationOverflow,
    recover_forcing,
    simulate,
    volterra_term,
)
from volterra.forcing import ForcingSequence, ForcingSpec, generate
from volterra.seqcore import EvalDomainError, KernelSpec, NonlinearitySpec, RealSeq, SpecError

SP = NonlinearitySpec.signed_power


def make_forcing(values):
    return ForcingSequence.from_values(RealSeq(1, np.asarray(values, dtype=float)))


def hand_recursion(H, xi, kern_coeffs, f):
    """Independent oracle: the recursion evaluated directly from its definition."""
    x = [float(xi)]
    for n in range(len(H)):
        acc = 0.0
        for j in range(n + 1):
            lag = n - j
            k = kern_coeffs[lag] if lag < len(kern_coeffs) else 0.0
            acc += k * f.eval(x[j])
        x.append(H[n] + acc)
    return np.asarray(x)


def test_null_kernel_path_equals_forcing():
    cfg = SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=make_forcing([3.0, -1.0]), horizon=2, xi=7.0)
    np.testing.assert_array_equal(simulate(cfg).x.values, [7.0, 3.0, -1.0])


def test_single_lag_hand_example():
    cfg = SimConfig(kernel=KernelSpec.finite([1.0]), f=SP(0.5), forcing=make_forcing([3.0]), horizon=1, xi=4.0)
    np.testing.assert_array_equal(simulate(cfg).x.values, [4.0, 5.0])


def test_two_lag_hand_example():
    cfg = SimConfig(
        kernel=KernelSpec.finite([1.0, 0.5]), f=SP(0.5), forcing=make_forcing([1.0, 1.0, 1.0]), horizon=3, xi=0.0
    )
    path = simulate(cfg)
    expected = hand_recursion([1.0, 1.0, 1.0], 0.0, [1.0, 0.5], SP(0.5))
    np.testing.assert_allclose(path.x.values, expected, rtol=1e-15)
    assert path.x.values[2] == 2.0
    assert path.x.values[3] == pytest.approx(1.0 + math.sqrt(2.0) + 0.5, rel=1e-15)


def test_recursion_identity_exact_as_stored():
    fseq = generate(ForcingSpec.gaussian(2.0, seed=11), 500)
    cfg = SimConfig(kernel=KernelSpec.geometric(1.0, 0.5), f=SP(0.5), forcing=fseq, horizon=500, xi=1.0)
    path = simulate(cfg)
    np.testing.assert_array_equal(path.x.values[1:], fseq.values.values[:500] + path.s.values)


def test_volterra_term_examples():
    assert volterra_term(np.array([5.0, 2.0]), KernelSpec.null(), SP(0.5), 1) == 0.0
    assert volterra_term(np.array([4.0]), KernelSpec.finite([1.0]), SP(0.5), 0) == 2.0
    assert volterra_term(np.array([0.0, 1.0]), KernelSpec.finite([1.0, 0.5]), SP(0.5), 1) == 1.0
    with pytest.raises(EvalDomainError):
        volterra_term(np.array([1.0]), KernelSpec.null(), SP(0.5), 1)


def test_recover_forcing_null_kernel():
    out = recover_forcing(np.array([7.0, 3.0, -1.0]), KernelSpec.null(), SP(0.5))
    assert out.start == 1
    np.testing.assert_array_equal(out.values, [3.0, -1.0])


def test_recover_forcing_hand_example():
    out = recover_forcing(np.array([4.0, 5.0]), KernelSpec.finite([1.0]), SP(0.5))
    np.testing.assert_array_equal(out.values, [3.0])


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5, 6, 7, 8])
def test_round_trip_simulate_recover_simulate(seed):
    """recover_forcing then simulate reproduces the target path bit for bit
    whenever the rounding grid allows; always within an ulp of the
    history-sum scale."""
    rng = np.random.default_rng(seed)
    kernel = KernelSpec.geometric(float(rng.uniform(-1, 1)), float(rng.uniform(-0.8, 0.8)))
    f = SP(float(rng.uniform(0.2, 0.8)))
    y = rng.normal(scale=10.0, size=60)
    H = recover_forcing(y, kernel, f)
    cfg = SimConfig(kernel=kernel, f=f, forcing=ForcingSequence.from_values(H), horizon=59, xi=float(y[0]))
    x = simulate(cfg).x.values
    # one ulp of the history-sum scale per unreachable index, plus bounded
    # cascade through the (contracting) nonlinearity afterwards
    scale = np.maximum(np.abs(y[1:]), np.abs(x[1:]) + np.abs(H.values))
    tol = 64 * np.spacing(scale)
    assert np.all(np.abs(x[1:] - y[1:]) <= tol)
    # and the forward direction: H values reproduce the recursion residuals
    for n in (0, 10, 30):
        s_n = volterra_term(y, kernel, f, n)
        assert H.values[n] + s_n == pytest.approx(y[n + 1], abs=2 * np.spacing(abs(s_n) + abs(y[n + 1])))


def test_round_trip_exact_when_arithmetic_exact():
    # dyadic data keeps every sum exact, so the round trip is bitwise
    y = np.array([1.0, 2.5, -3.25, 0.5, 8.0])
    kernel = KernelSpec.finite([0.5, 0.25])
    f = NonlinearitySpec.bounded(4.0)  # identity on this range
    H = recover_forcing(y, kernel, f)
    cfg = SimConfig(kernel=kernel, f=f, forcing=ForcingSequence.from_values(H), horizon=4, xi=1.0)
    np.testing.assert_array_equal(simulate(cfg).x.values, y)


def random_config(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        kernel = KernelSpec.finite(rng.normal(scale=0.5, size=int(rng.integers(0, 6))))
    elif kind == 1:
        kernel = KernelSpec.geometric(float(rng.uniform(-2, 2)), float(rng.uniform(-0.95, 0.95)))
    else:
        kernel = KernelSpec.polynomial(float(rng.uniform(-1, 1)), float(rng.uniform(1.2, 3.0)))
    fk = rng.integers(0, 2)
    f = SP(float(rng.uniform(0.15, 0.9))) if fk == 0 else NonlinearitySpec.bounded(float(rng.uniform(0.0, 3.0)))
    n = int(np.exp(rng.uniform(np.log(32), np.log(2000))))
    which = rng.integers(0, 3)
    if which == 0:
        forcing = generate(ForcingSpec.gaussian(float(rng.uniform(0.1, 5.0)), seed=int(rng.integers(0, 2**63))), n)
    elif which == 1:
        forcing = generate(ForcingSpec.heavytail(float(rng.uniform(1.0, 3.0)), seed=int(rng.integers(0, 2**63))), n)
    else:
        forcing = generate(ForcingSpec.monotone_power(float(rng.uniform(0.2, 1.5))), n)
    xi = float(rng.normal(scale=3.0))
    return kernel, f, forcing, n, xi


@pytest.mark.parametrize("seed", [101, 202])
def test_auto_matches_reference_spot(seed):
    rng = np.random.default_rng(seed)
    kernel, f, forcing, n, xi = random_config(rng)
    ref = simulate(SimConfig(kernel=kernel, f=f, forcing=forcing, horizon=n, xi=xi, solver="reference"))
    auto = simulate(SimConfig(kernel=kernel, f=f, forcing=forcing, horizon=n, xi=xi, solver="auto"))
    tol = np.maximum(1e-9, 1e-9 * np.abs(ref.x.values))
    assert np.all(np.abs(auto.x.values - ref.x.values) <= tol)


def test_pathwise_envelopes_on_random_paths():
    rng = np.random.default_rng(7)
    for _ in range(10):
        kernel, f, forcing, n, xi = random_config(rng)
        path = simulate(SimConfig(kernel=kernel, f=f, forcing=forcing, horizon=n, xi=xi))
        H = forcing.values.prefix(n)
        violations = verify_path_bounds(path.x, path.s, H, kernel, f)
        assert violations == []


def test_overflow_reports_first_bad_index():
    fseq = generate(ForcingSpec.periodic_exponential(0.8, (1.0, 2.0)), 800)
    cfg = SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=800, xi=0.0, overflow_limit=1e100)
    with pytest.raises(SimulationOverflow) as exc:
        simulate(cfg)
    # e**(0.8 n) * pi crosses 1e100 near n = 287
    assert 280 <= exc.value.index <= 292


def test_config_invariants():
    fseq = make_forcing([1.0, 2.0])
    with pytest.raises(SpecError):
        SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=0)
    with pytest.raises(SpecError):
        SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=5)
    with pytest.raises(SpecError):
        SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=2, solver="magic")


def test_fingerprint_stable_and_sensitive():
    fseq = make_forcing([1.0, 2.0])
    base = SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=2)
    again = SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=2)
    other = SimConfig(kernel=KernelSpec.null(), f=SP(0.5), forcing=fseq, horizon=2, xi=1.0)
    assert base.fingerprint() == again.fingerprint()
    assert base.fingerprint() != other.fingerprint()

"""Acceptance gate: one test per shipped criterion, at full stated size.

Each test prints a single pass/fail line (visible with `pytest -s`) and
asserts both the statistic at its pinned tolerance and the stated runtime
budget.  Run via `pytest tests/test_acceptance.py -v`.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from volterra import theorems
from volterra._rng import derive_seeds
from volterra.diagnostics import (
    estimate_lambda2,
    running_signed_max,
    tail_sup_ratio,
    verify_path_bounds,
)
from volterra.engine import SimConfig, simulate
from volterra.forcing import ForcingSpec, generate
from volterra.seqcore import KernelSpec, NonlinearitySpec, ScalerSpec

SP = NonlinearitySpec.signed_power
GEOM = KernelSpec.geometric(1.0, 0.5)


class Budget:
    def __init__(self, name: str, seconds: float):
        self.name = name
        self.limit = seconds
        self.t0 = time.monotonic()

    def done(self, detail: str = "") -> None:
        elapsed = time.monotonic() - self.t0
        print(f"[{self.name}] PASS {detail} ({elapsed:.1f}s / limit {self.limit:.0f}s)")
        assert elapsed <= self.limit, f"{self.name} exceeded its runtime budget"


# ---------------------------------------------------------------------- 1


def _random_config(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        kernel = KernelSpec.finite(rng.normal(scale=0.5, size=int(rng.integers(0, 6))))
    elif kind == 1:
        kernel = KernelSpec.geometric(float(rng.uniform(-2, 2)), float(rng.uniform(-0.95, 0.95)))
    else:
        kernel = KernelSpec.polynomial(float(rng.uniform(-1, 1)), float(rng.uniform(1.2, 3.0)))
    f = (
        SP(float(rng.uniform(0.15, 0.9)))
        if rng.integers(0, 2) == 0
        else NonlinearitySpec.bounded(float(rng.uniform(0.0, 3.0)))
    )
    n = int(np.exp(rng.uniform(np.log(32), np.log(2000))))
    which = rng.integers(0, 3)
    if which == 0:
        spec = ForcingSpec.gaussian(float(rng.uniform(0.1, 5.0)), seed=int(rng.integers(0, 2**63)))
    elif which == 1:
        spec = ForcingSpec.heavytail(float(rng.uniform(1.0, 3.0)), seed=int(rng.integers(0, 2**63)))
    else:
        spec = ForcingSpec.monotone_power(float(rng.uniform(0.2, 1.5)))
    return kernel, f, generate(spec, n), n, float(rng.normal(scale=3.0))


def test_criterion_1_solver_oracle_equivalence():
    budget = Budget("criterion-1 solver equivalence", 30.0)
    rng = np.random.default_rng(20160701)
    worst = 0.0
    for _ in range(200):
        kernel, f, forcing, n, xi = _random_config(rng)
        ref = simulate(SimConfig(kernel=kernel, f=f, forcing=forcing, horizon=n, xi=xi, solver="reference"))
        auto = simulate(SimConfig(kernel=kernel, f=f, forcing=forcing, horizon=n, xi=xi, solver="auto"))
        tol = np.maximum(1e-9, 1e-9 * np.abs(ref.x.values))
        gap = np.abs(auto.x.values - ref.x.values)
        assert np.all(gap <= tol)
        scaled = gap / tol
        worst = max(worst, float(scaled.max()))
    budget.done(f"200 configs, worst gap {worst:.2e} of tolerance")


# ---------------------------------------------------------------------- 2


def test_criterion_2_pathwise_inequality_suite():
    budget = Budget("criterion-2 pathwise inequalities", 60.0)
    checked = 0
    for sc in theorems.default_suite():
        horizon = min(sc.horizons[-1], 10**5)
        seeds = derive_seeds(theorems.SUITE_SEED_BASE, sc.scenario_id, sc.seed_count) or (None,)
        spec = sc.forcing.with_seed(seeds[0]) if sc.forcing.is_stochastic else sc.forcing
        seq = generate(spec, horizon)
        if sc.negate_forcing:
            from volterra.theorems import _negated

            seq = _negated(seq)
        path = simulate(SimConfig(kernel=sc.kernel, f=sc.f, forcing=seq, horizon=horizon, xi=sc.xi))
        H = seq.values.prefix(horizon)
        violations = verify_path_bounds(path.x, path.s, H, sc.kernel, sc.f, eps_list=(0.5, 0.1, 0.01))
        assert violations == [], (sc.scenario_id, violations[:3])
        checked += 1
    budget.done(f"{checked} scenario paths, zero violations")


# ---------------------------------------------------------------------- 3


def test_criterion_3_max_ratio_and_argmax_coupling():
    budget = Budget("criterion-3 running-max transfer", 60.0)
    ratio = theorems.run_scenario(theorems.scenario_by_id("max-ratio"))
    assert ratio.verdict == "pass", ratio.errors
    assert ratio.errors[-1] <= 0.05
    coupling = theorems.run_scenario(theorems.scenario_by_id("argmax-coupling"))
    assert coupling.verdict == "pass", coupling.errors
    assert coupling.errors[-1] <= 0.05
    budget.done(
        f"median |x*/H*-1|={ratio.errors[-1]:.3g}, worst coupling gap={coupling.errors[-1]:.3g}"
    )


# ---------------------------------------------------------------------- 4


def test_criterion_4_monotone_growth_transfer():
    budget = Budget("criterion-4 growth transfer", 10.0)
    n = 10**5
    seq = generate(ForcingSpec.monotone_power(1.2), n)
    path = simulate(SimConfig(kernel=GEOM, f=SP(0.5), forcing=seq, horizon=n, xi=0.0))
    final_ratio = path.x.values[-1] / seq.values.values[n - 1]
    assert abs(final_ratio - 1.0) <= 0.01
    check = theorems.run_scenario(theorems.scenario_by_id("growth-up"))
    assert check.verdict == "pass"
    budget.done(f"|x(N)/H(N) - 1| = {abs(final_ratio - 1.0):.2e} (budget 2e-3)")


# ---------------------------------------------------------------------- 5


def test_criterion_5_periodic_exponential_modulation():
    budget = Budget("criterion-5 modulated growth", 1.0)
    pi = (1.0, 1.6, 2.0, 1.2, 1.8, 1.1, 1.4)
    n = 2000
    seq = generate(ForcingSpec.periodic_exponential(0.05, pi), n)
    path = simulate(SimConfig(kernel=GEOM, f=SP(0.5), forcing=seq, horizon=n, xi=0.0))
    ns = np.arange(n - 199, n + 1)
    resid = np.abs(path.x.values[ns] / np.exp(0.05 * ns) - np.asarray(pi)[ns % 7])
    assert resid.max() <= 1e-3
    budget.done(f"sup residual over final 200 indices = {resid.max():.2e}")


# ---------------------------------------------------------------------- 6


def test_criterion_6_gaussian_sqrt_log_scaling():
    budget = Budget("criterion-6 Gaussian scaling", 300.0)
    sc = theorems.scenario_by_id("limsup-rho")
    assert sc.seed_count == 20
    check = theorems.run_scenario(sc)
    assert check.verdict == "pass", (check.errors, check.details)
    rho = check.stats[-1]["rho_x"]
    assert 0.85 <= rho <= 1.1
    budget.done(f"median rho over 20 seeds at N=1e6: {rho:.3f} in [0.85, 1.1]")


# ---------------------------------------------------------------------- 7


def test_criterion_7_constructed_alternating_forcing():
    budget = Budget("criterion-7 constructed example", 30.0)
    n = 10**5
    # steep negative side: exact path identity and closed-form negative max
    spec_a = ForcingSpec.constructed_alternating(1.0, 0.7, 0.5, GEOM)
    seq_a = generate(spec_a, n)
    path_a = simulate(SimConfig(kernel=GEOM, f=SP(0.5), forcing=seq_a, horizon=n, xi=1.0))
    assert np.array_equal(path_a.x.values, seq_a.oracle_path.values)  # bit-for-bit
    est_a = estimate_lambda2(seq_a.values.prefix(n), SP(0.5))
    assert est_a.regime == "diverging"
    xminus = running_signed_max(path_a.x, "-").final
    closed = float(n) ** 0.7  # largest odd index n-1 gives (n-1+1)**0.7
    assert abs(xminus / closed - 1.0) <= 0.05

    # shallow negative side: the kernel dominates, lambda2 = even-lag sum 4/3
    spec_b = ForcingSpec.constructed_alternating(1.0, 0.2, 0.5, GEOM)
    seq_b = generate(spec_b, n)
    path_b = simulate(SimConfig(kernel=GEOM, f=SP(0.5), forcing=seq_b, horizon=n, xi=1.0))
    assert np.array_equal(path_b.x.values, seq_b.oracle_path.values)
    est_b = estimate_lambda2(seq_b.values.prefix(n), SP(0.5))
    assert est_b.regime == "finite"
    lambda2_pred = GEOM.even_index_sum()  # 4/3
    assert abs(est_b.value / lambda2_pred - 1.0) <= 0.10
    ratio = running_signed_max(path_b.x, "-").final / running_signed_max(seq_b.values.prefix(n), "-").final
    k1 = GEOM.l1()
    assert 1.0 - k1 / est_b.value - 0.1 <= ratio <= 1.0 + k1 / est_b.value + 0.1
    budget.done(
        f"bitwise path identity, x*-(N)/N^0.7 = {xminus / closed:.4f}, lambda2 = {est_b.value:.4f}"
    )


# ---------------------------------------------------------------------- 8


def test_criterion_8_phi_moment_dichotomies():
    budget = Budget("criterion-8 phi-moment dichotomies", 180.0)
    ergodic = theorems.run_scenario(theorems.scenario_by_id("ergodic-phi"))
    assert ergodic.verdict == "pass", (ergodic.errors, ergodic.details)
    assert ergodic.details["conditions"]["divergence-detector-fires"]
    assert ergodic.details["conditions"]["state-average-bounded"]

    pth = theorems.run_scenario(theorems.scenario_by_id("pth-moment"))
    assert pth.verdict == "pass", (pth.errors, pth.details)
    a_final = pth.stats[-1]["state_average"]
    assert abs(a_final / 2.0 - 1.0) <= 0.10  # exact Pareto mean oracle
    assert pth.details["conditions"]["divergence-detector-fires"]
    budget.done(f"split reproduced; p=1 average {a_final:.3f} vs oracle 2.0")


# ---------------------------------------------------------------------- 9


def test_criterion_9_heavytail_log_exponent():
    budget = Budget("criterion-9 heavy-tail exponent", 180.0)
    sc = theorems.scenario_by_id("limsup-squeeze")
    seeds = derive_seeds(theorems.SUITE_SEED_BASE, sc.scenario_id, 5)
    exponents = []
    n = 10**6
    for seed in seeds:
        seq = generate(sc.forcing.with_seed(seed), n)
        path = simulate(SimConfig(kernel=sc.kernel, f=sc.f, forcing=seq, horizon=n, xi=sc.xi))
        ns = np.arange(10**5, n + 1)
        vals = np.abs(path.x.values[ns])
        keep = vals > 0.0
        exponents.append(float(np.max(np.log(vals[keep]) / np.log(ns[keep]))))
    med = float(np.median(exponents))
    assert abs(med - 0.5) <= 0.1
    budget.done(f"median final-decade sup of log|x|/log n over 5 seeds: {med:.3f}")


# --------------------------------------------------------------------- 10


def test_criterion_10_suite_reproducibility(tmp_path):
    budget = Budget("criterion-10 reproducibility", 600.0)
    from click.testing import CliRunner

    from volterra.cli import main

    runner = CliRunner()
    for d in ("r1", "r2"):
        res = runner.invoke(main, ["verify", "--out", str(tmp_path / d)])
        assert res.exit_code == 0, res.output
    a = (tmp_path / "r1" / "report.jsonl").read_bytes()
    b = (tmp_path / "r2" / "report.jsonl").read_bytes()
    assert a == b
    at = (tmp_path / "r1" / "report.txt").read_bytes()
    bt = (tmp_path / "r2" / "report.txt").read_bytes()
    assert at == bt
    budget.done(f"default verify suite byte-identical across runs ({len(a)} bytes)")

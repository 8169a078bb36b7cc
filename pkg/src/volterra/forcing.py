"""Forcing sequence generators.

Deterministic growth and oscillation patterns, seeded iid noise (Gaussian
and symmetric Pareto-tailed), and the alternating power construction whose
forcing is defined by inverting the recursion along a prescribed target
path.

Stochastic variants draw each value as a pure function of (seed, index)
through a counter-based generator, so realisations are reproducible and a
shorter run is always a prefix of a longer one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import ndtri

from . import _rng
from .engine import (
    DEFAULT_OVERFLOW_LIMIT,
    SimulationOverflow,
    _windowed_sum,
    fingerprint_payload,
    nudged_addend,
)
from .seqcore import KernelSpec, NonlinearitySpec, RealSeq, SpecError

__all__ = [
    "ForcingSpec",
    "ForcingSequence",
    "generate",
    "constructed_H_asymptotics",
    "AlternatingPrediction",
]

_STOCHASTIC = ("gaussian-iid", "heavytail-iid")


@dataclass(frozen=True)
class ForcingSpec:
    """Recipe for a forcing sequence H(1), H(2), ...

    Variants:
      ``monotone-power``          H(n) = n**mu, mu > 0
      ``periodic-exponential``    H(n) = exp(a n) * pi(n mod P), a > 0
      ``gaussian-iid``            iid N(0, sigma^2)
      ``heavytail-iid``           symmetric, P(|H| > x) = x**(-alpha) for x >= 1
      ``bounded-oscillation``     H(n) = amplitude * sin(n)
      ``constructed-alternating`` forcing recovered from the target path
                                  y(n) = (n+1)**mu_plus (n even),
                                  y(n) = -(n+1)**mu_minus (n odd), under the
                                  attached nonnegative kernel and
                                  f(x) = sgn(x) |x|**alpha
    """

    variant: str
    mu: float = 0.0
    a: float = 0.0
    pi: tuple[float, ...] = ()
    sigma: float = 0.0
    alpha: float = 0.0
    amplitude: float = 0.0
    mu_plus: float = 0.0
    mu_minus: float = 0.0
    kernel: Optional[KernelSpec] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        v = self.variant
        if v == "monotone-power":
            if self.mu <= 0.0 or not math.isfinite(self.mu):
                raise SpecError("monotone-power requires mu > 0")
        elif v == "periodic-exponential":
            if self.a <= 0.0 or not math.isfinite(self.a):
                raise SpecError("periodic-exponential requires a > 0")
            if len(self.pi) < 1 or any(p <= 0.0 or not math.isfinite(p) for p in self.pi):
                raise SpecError("periodic modulation values must be positive")
            if max(self.pi) <= min(self.pi):
                raise SpecError("periodic modulation must be nonconstant: max pi > min pi > 0")
        elif v == "gaussian-iid":
            if self.sigma <= 0.0 or not math.isfinite(self.sigma):
                raise SpecError("gaussian-iid requires sigma > 0")
        elif v == "heavytail-iid":
            if self.alpha <= 0.0 or not math.isfinite(self.alpha):
                raise SpecError("heavytail-iid requires alpha > 0")
        elif v == "bounded-oscillation":
            if not math.isfinite(self.amplitude):
                raise SpecError("amplitude must be finite")
        elif v == "constructed-alternating":
            if not (self.mu_plus > self.mu_minus >= 0.0):
                raise SpecError("constructed-alternating requires mu_plus > mu_minus >= 0")
            if not (0.0 < self.alpha < 1.0):
                raise SpecError("constructed-alternating requires alpha in (0, 1)")
            if self.kernel is None:
                raise SpecError("constructed-alternating requires a kernel")
            _require_nonnegative_kernel(self.kernel)
        else:
            raise SpecError(f"unknown forcing variant {v!r}")
        if v in _STOCHASTIC:
            if self.seed is None:
                raise SpecError(f"{v} requires a seed")
            if not (0 <= self.seed < 2**64):
                raise SpecError("seed must be an unsigned 64-bit integer")
        elif self.seed is not None:
            raise SpecError(f"{v} is deterministic and takes no seed")

    @classmethod
    def monotone_power(cls, mu: float) -> "ForcingSpec":
        return cls(variant="monotone-power", mu=float(mu))

    @classmethod
    def periodic_exponential(cls, a: float, pi) -> "ForcingSpec":
        return cls(variant="periodic-exponential", a=float(a), pi=tuple(float(p) for p in pi))

    @classmethod
    def gaussian(cls, sigma: float, seed: int) -> "ForcingSpec":
        return cls(variant="gaussian-iid", sigma=float(sigma), seed=int(seed))

    @classmethod
    def heavytail(cls, alpha: float, seed: int) -> "ForcingSpec":
        return cls(variant="heavytail-iid", alpha=float(alpha), seed=int(seed))

    @classmethod
    def bounded_oscillation(cls, amplitude: float) -> "ForcingSpec":
        return cls(variant="bounded-oscillation", amplitude=float(amplitude))

    @classmethod
    def constructed_alternating(
        cls, mu_plus: float, mu_minus: float, alpha: float, kernel: KernelSpec
    ) -> "ForcingSpec":
        return cls(
            variant="constructed-alternating",
            mu_plus=float(mu_plus),
            mu_minus=float(mu_minus),
            alpha=float(alpha),
            kernel=kernel,
        )

    @property
    def is_stochastic(self) -> bool:
        return self.variant in _STOCHASTIC

    def with_seed(self, seed: int) -> "ForcingSpec":
        if not self.is_stochastic:
            raise SpecError(f"{self.variant} takes no seed")
        return replace(self, seed=int(seed))

    def payload(self) -> dict:
        out: dict = {"variant": self.variant}
        v = self.variant
        if v == "monotone-power":
            out["mu"] = self.mu
        elif v == "periodic-exponential":
            out["a"] = self.a
            out["pi"] = list(self.pi)
        elif v == "gaussian-iid":
            out["sigma"] = self.sigma
        elif v == "heavytail-iid":
            out["alpha"] = self.alpha
        elif v == "bounded-oscillation":
            out["amplitude"] = self.amplitude
        else:
            out["mu_plus"] = self.mu_plus
            out["mu_minus"] = self.mu_minus
            out["alpha"] = self.alpha
            out["kernel"] = self.kernel.payload()
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def fingerprint(self) -> str:
        return fingerprint_payload(self.payload())


def _require_nonnegative_kernel(kernel: KernelSpec) -> None:
    if kernel.variant == "finite":
        if any(v < 0.0 for v in kernel.coeffs):
            raise SpecError("constructed-alternating requires nonnegative kernel weights")
    elif kernel.c < 0.0 or (kernel.variant == "geometric" and kernel.rho < 0.0):
        raise SpecError("constructed-alternating requires nonnegative kernel weights")


@dataclass(frozen=True)
class ForcingSequence:
    """A realised forcing with provenance.

    ``oracle_path`` is only set by the constructed-alternating builder: the
    target path as actually representable in double precision, which the
    solver reproduces bit for bit.
    """

    spec_fingerprint: str
    values: RealSeq
    seed: Optional[int] = None
    oracle_path: Optional[RealSeq] = None

    @property
    def fingerprint(self) -> str:
        return self.spec_fingerprint

    @classmethod
    def from_values(cls, values: RealSeq, label: str = "external") -> "ForcingSequence":
        """Wrap an externally supplied sequence (e.g. replayed from a file)."""
        if values.start != 1:
            raise SpecError("forcing sequences start at index 1")
        digest = fingerprint_payload({"label": label, "n": len(values)})
        return cls(spec_fingerprint=digest, values=values, seed=None)


def generate(spec: ForcingSpec, horizon: int) -> ForcingSequence:
    """Realise H(1..horizon)."""
    if horizon < 1:
        raise SpecError("horizon must be at least 1")
    v = spec.variant
    if v == "monotone-power":
        idx = np.arange(1, horizon + 1, dtype=float)
        vals = idx**spec.mu
    elif v == "periodic-exponential":
        if spec.a * horizon > math.log(DEFAULT_OVERFLOW_LIMIT):
            raise SimulationOverflow(horizon, math.inf, DEFAULT_OVERFLOW_LIMIT)
        idx = np.arange(1, horizon + 1)
        mod = np.asarray(spec.pi)[idx % len(spec.pi)]
        vals = np.exp(spec.a * idx.astype(float)) * mod
    elif v == "gaussian-iid":
        u = _rng.uniform_open01(spec.seed, "gaussian", 1, horizon)
        vals = spec.sigma * ndtri(u)
    elif v == "heavytail-iid":
        u = _rng.uniform_half_open01(spec.seed, "heavytail-mag", 1, horizon)
        signs = _rng.sign_bits(spec.seed, "heavytail-sign", 1, horizon)
        vals = signs * u ** (-1.0 / spec.alpha)
    elif v == "bounded-oscillation":
        idx = np.arange(1, horizon + 1, dtype=float)
        vals = spec.amplitude * np.sin(idx)
    else:
        return _generate_constructed(spec, horizon)
    return ForcingSequence(
        spec_fingerprint=spec.fingerprint(),
        values=RealSeq(1, vals),
        seed=spec.seed,
    )


def _generate_constructed(spec: ForcingSpec, horizon: int) -> ForcingSequence:
    """Forcing recovered from the alternating power target path.

    Walks the recursion forward with exactly the arithmetic the auto solver
    uses for the attached kernel, choosing each H(n+1) so that
    H(n+1) + S(n) rounds to the nearest representable point of the target;
    the realised path (within an ulp of the ideal one) is stored as the
    replay oracle.
    """
    kernel = spec.kernel
    alpha = spec.alpha
    mu_p, mu_m = spec.mu_plus, spec.mu_minus
    n_steps = horizon

    y = [0.0] * (n_steps + 1)
    out = [0.0] * n_steps
    y[0] = 1.0  # (0 + 1)**mu_plus
    yn = 1.0

    if kernel.variant == "geometric":
        c, rho = kernel.c, kernel.rho
        acc = 0.0
        for n in range(n_steps):
            v = abs(yn) ** alpha
            if yn < 0.0:
                v = -v
            acc = rho * acc + c * v
            idx = n + 2.0
            target = idx**mu_p if (n + 1) % 2 == 0 else -(idx**mu_m)
            if not (-DEFAULT_OVERFLOW_LIMIT <= target <= DEFAULT_OVERFLOW_LIMIT):
                raise SimulationOverflow(n + 1, target, DEFAULT_OVERFLOW_LIMIT)
            h = nudged_addend(target, acc)
            yn = h + acc
            out[n] = h
            y[n + 1] = yn
    else:
        support = kernel.certified_support()
        width = min(support, n_steps)
        kern_arr = kernel.coefficients(width)
        kern_list = kern_arr.tolist()
        fx_arr = np.zeros(n_steps)
        fx_list = [0.0] * n_steps
        for n in range(n_steps):
            v = abs(yn) ** alpha
            if yn < 0.0:
                v = -v
            fx_list[n] = v
            fx_arr[n] = v
            acc = _windowed_sum(kern_list, kern_arr, fx_list, fx_arr, n, width) if width else 0.0
            idx = n + 2.0
            target = idx**mu_p if (n + 1) % 2 == 0 else -(idx**mu_m)
            if not (-DEFAULT_OVERFLOW_LIMIT <= target <= DEFAULT_OVERFLOW_LIMIT):
                raise SimulationOverflow(n + 1, target, DEFAULT_OVERFLOW_LIMIT)
            h = nudged_addend(target, acc)
            yn = h + acc
            out[n] = h
            y[n + 1] = yn

    return ForcingSequence(
        spec_fingerprint=spec.fingerprint(),
        values=RealSeq(1, np.asarray(out)),
        seed=None,
        oracle_path=RealSeq(0, np.asarray(y)),
    )


@dataclass(frozen=True)
class AlternatingPrediction:
    """Predicted leading behaviour of the constructed forcing's signed maxima."""

    regime: str  # "negative-exponent" | "kernel-dominated" | "boundary"
    h_plus_exponent: float | None = None
    h_minus_exponent: float | None = None
    h_minus_constant: float | None = None
    lambda2: float | None = None  # None encodes an infinite limit


def constructed_H_asymptotics(spec: ForcingSpec) -> AlternatingPrediction:
    """Leading exponents/constants of H*+- for the constructed forcing.

    When mu_plus * alpha < mu_minus the negative side keeps its own exponent
    mu_minus; when mu_minus < alpha * mu_plus the history term dominates and
    the negative side grows like (sum of even-lag kernel weights) times
    n**(alpha * mu_plus).  The equality case is not predicted.
    """
    if spec.variant != "constructed-alternating":
        raise SpecError("asymptotics are defined for constructed-alternating specs only")
    cross = spec.mu_plus * spec.alpha
    if cross < spec.mu_minus:
        return AlternatingPrediction(
            regime="negative-exponent",
            h_plus_exponent=spec.mu_plus,
            h_minus_exponent=spec.mu_minus,
            lambda2=None,
        )
    if cross > spec.mu_minus:
        even_sum = spec.kernel.even_index_sum()
        return AlternatingPrediction(
            regime="kernel-dominated",
            h_plus_exponent=spec.mu_plus,
            h_minus_exponent=cross,
            h_minus_constant=even_sum,
            lambda2=even_sum,
        )
    return AlternatingPrediction(regime="boundary")

"""Path solver for the forced sublinear Volterra recursion.

Computes x(0), ..., x(N) from

    x(n+1) = H(n+1) + S(n),    S(n) = sum_{j=0}^{n} k(n-j) f(x(j)),

with x(0) = xi.  The reference solver evaluates every S(n) by direct
summation in ascending j (the documented canonical order); the auto solver
keeps the same values up to roundoff, using an O(N) update for geometric
kernels and a certified truncation window for kernels with unbounded
support.  History sums are cached on the returned path, so the recursion
identity x(n+1) = H(n+1) + s(n) holds exactly as stored.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .seqcore import EvalDomainError, KernelSpec, NonlinearitySpec, RealSeq, SpecError

if TYPE_CHECKING:  # pragma: no cover
    from .forcing import ForcingSequence

__all__ = [
    "SimulationOverflow",
    "SimConfig",
    "SimPath",
    "simulate",
    "volterra_term",
    "recover_forcing",
]

DEFAULT_OVERFLOW_LIMIT = 1e300

# when a truncation window is narrower than this, a plain Python inner loop
# beats the numpy dot call overhead
_SMALL_WINDOW = 64


class SimulationOverflow(RuntimeError):
    """A path entry left the representable range; carries the first bad index."""

    def __init__(self, index: int, value: float, limit: float):
        super().__init__(f"|x({index})| exceeded the overflow limit {limit:g} (value {value!r})")
        self.index = index
        self.value = value
        self.limit = limit


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def fingerprint_payload(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one path."""

    kernel: KernelSpec
    f: NonlinearitySpec
    forcing: "ForcingSequence"
    horizon: int
    xi: float = 0.0
    solver: str = "auto"
    overflow_limit: float = DEFAULT_OVERFLOW_LIMIT

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise SpecError("horizon must be at least 1")
        if len(self.forcing.values) < self.horizon:
            raise SpecError(
                f"forcing length {len(self.forcing.values)} is shorter than the horizon {self.horizon}"
            )
        if self.solver not in ("auto", "reference"):
            raise SpecError(f"unknown solver mode {self.solver!r}")
        if not math.isfinite(self.xi):
            raise SpecError("initial condition must be finite")
        if self.overflow_limit <= 0.0:
            raise SpecError("overflow limit must be positive")

    def payload(self) -> dict:
        return {
            "kernel": self.kernel.payload(),
            "f": self.f.payload(),
            "forcing": self.forcing.fingerprint,
            "horizon": self.horizon,
            "xi": self.xi,
            "solver": self.solver,
            "overflow_limit": self.overflow_limit,
        }

    def fingerprint(self) -> str:
        return fingerprint_payload(self.payload())


@dataclass(frozen=True)
class SimPath:
    """A realised path x(0..N) with its cached history sums s(0..N-1)."""

    x: RealSeq
    s: RealSeq
    fingerprint: str
    solver: str
    # certified l1 mass discarded by windowed convolution (0.0 when none);
    # the induced error on s(n) is bounded by trunc_tail * (F(1) + x*(n))
    trunc_tail: float = 0.0

    @property
    def horizon(self) -> int:
        return len(self.x) - 1


def _check(value: float, index: int, limit: float) -> None:
    if not (-limit <= value <= limit):  # also catches NaN
        raise SimulationOverflow(index, value, limit)


def _run_geometric(H: list[float], xi: float, c: float, rho: float, f: NonlinearitySpec, limit: float):
    n_steps = len(H)
    x = [0.0] * (n_steps + 1)
    s = [0.0] * n_steps
    x[0] = xi
    xn = float(xi)
    acc = 0.0
    if f.variant == "signed-power":
        alpha = f.alpha
        for n in range(n_steps):
            v = abs(xn) ** alpha
            if xn < 0.0:
                v = -v
            acc = rho * acc + c * v
            xn = H[n] + acc
            if not (-limit <= xn <= limit):
                raise SimulationOverflow(n + 1, xn, limit)
            x[n + 1] = xn
            s[n] = acc
    elif f.variant == "bounded":
        m = f.bound
        for n in range(n_steps):
            v = xn if -m <= xn <= m else (m if xn > m else -m)
            acc = rho * acc + c * v
            xn = H[n] + acc
            if not (-limit <= xn <= limit):
                raise SimulationOverflow(n + 1, xn, limit)
            x[n + 1] = xn
            s[n] = acc
    else:
        feval = f.eval
        for n in range(n_steps):
            acc = rho * acc + c * feval(xn)
            xn = H[n] + acc
            if not (-limit <= xn <= limit):
                raise SimulationOverflow(n + 1, xn, limit)
            x[n + 1] = xn
            s[n] = acc
    return x, s


def _run_reference(H: list[float], xi: float, kernel: KernelSpec, f: NonlinearitySpec, limit: float):
    n_steps = len(H)
    kern = kernel.coefficients(n_steps).tolist()
    feval = f.eval
    x = [0.0] * (n_steps + 1)
    s = [0.0] * n_steps
    fxs = [0.0] * n_steps
    x[0] = xi
    xn = float(xi)
    for n in range(n_steps):
        fxs[n] = feval(xn)
        acc = 0.0
        for j in range(n + 1):
            acc += kern[n - j] * fxs[j]
        xn = H[n] + acc
        _check(xn, n + 1, limit)
        x[n + 1] = xn
        s[n] = acc
    return x, s


def _windowed_sum(kern_list, kern_arr, fx_list, fx_arr, n: int, width: int) -> float:
    """S(n) over the most recent ``width`` lags; shared by solver and forcing builder."""
    m = width if n + 1 >= width else n + 1
    if width <= _SMALL_WINDOW:
        acc = 0.0
        for i in range(m):
            acc += kern_list[i] * fx_list[n - i]
        return acc
    return float(np.dot(kern_arr[:m], fx_arr[n - m + 1 : n + 1][::-1]))


def _run_windowed(H: list[float], xi: float, kernel: KernelSpec, f: NonlinearitySpec, limit: float):
    n_steps = len(H)
    support = kernel.certified_support()
    width = min(support, n_steps)
    kern_arr = kernel.coefficients(width)
    kern_list = kern_arr.tolist()
    discarded = kernel.tail_l1(width) if width < n_steps else 0.0
    feval = f.eval
    x = [0.0] * (n_steps + 1)
    s = [0.0] * n_steps
    fx_arr = np.zeros(n_steps)
    fx_list = [0.0] * n_steps
    x[0] = xi
    xn = float(xi)
    for n in range(n_steps):
        v = feval(xn)
        fx_list[n] = v
        fx_arr[n] = v
        acc = _windowed_sum(kern_list, kern_arr, fx_list, fx_arr, n, width) if width else 0.0
        xn = H[n] + acc
        _check(xn, n + 1, limit)
        x[n + 1] = xn
        s[n] = acc
    return x, s, discarded


def simulate(config: SimConfig) -> SimPath:
    """Run the recursion for ``config.horizon`` steps.

    Raises SimulationOverflow (with the first offending index) as soon as a
    path entry exceeds the configured limit; growth scenarios are expected
    to trip this when pushed past double-precision range.
    """
    n_steps = config.horizon
    H = config.forcing.values.values[:n_steps].tolist()
    limit = config.overflow_limit
    trunc_tail = 0.0
    if config.solver == "reference":
        x, s = _run_reference(H, config.xi, config.kernel, config.f, limit)
        solver = "reference"
    elif config.kernel.variant == "geometric":
        x, s = _run_geometric(H, config.xi, config.kernel.c, config.kernel.rho, config.f, limit)
        solver = "auto:geometric"
    else:
        x, s, trunc_tail = _run_windowed(H, config.xi, config.kernel, config.f, limit)
        solver = "auto:window"
    return SimPath(
        x=RealSeq(0, np.asarray(x)),
        s=RealSeq(0, np.asarray(s)),
        fingerprint=config.fingerprint(),
        solver=solver,
        trunc_tail=trunc_tail,
    )


def volterra_term(x_prefix, kernel: KernelSpec, f: NonlinearitySpec, n: int) -> float:
    """The history sum S(n) by direct ascending-j summation (reference semantics)."""
    if isinstance(x_prefix, RealSeq):
        if x_prefix.start != 0:
            raise EvalDomainError("state prefix must start at index 0")
        vals = x_prefix.values
    else:
        vals = np.asarray(x_prefix, dtype=float)
    if n < 0 or n >= vals.size:
        raise EvalDomainError(f"need x(0..{n}) but prefix has length {vals.size}")
    kern = kernel.coefficients(n + 1).tolist()
    feval = f.eval
    fxs = [feval(float(v)) for v in vals[: n + 1]]
    acc = 0.0
    for j in range(n + 1):
        acc += kern[n - j] * fxs[j]
    return acc


def nudged_addend(target: float, summand: float) -> float:
    """The double h minimising |(h + summand) - target|, exact when reachable.

    h = target - summand can be off by an ulp after the two roundings; a
    short nextafter walk fixes that whenever the grid of representable
    h + summand values contains the target.
    """
    h = target - summand
    best_h = h
    best_err = abs((h + summand) - target)
    for _ in range(4):
        if best_err == 0.0:
            break
        v = h + summand
        h = math.nextafter(h, math.inf if v < target else -math.inf)
        err = abs((h + summand) - target)
        if err < best_err:
            best_h, best_err = h, err
        else:
            break
    return best_h


def recover_forcing(y, kernel: KernelSpec, f: NonlinearitySpec) -> RealSeq:
    """Invert the recursion: the forcing H(1..N) that reproduces the path y.

    Uses the same ascending-j summation as the reference solver, so
    simulating with the returned forcing and xi = y(0) reproduces y exactly
    whenever the rounding grid allows it (always, up to one ulp of the
    history-sum scale otherwise).
    """
    if isinstance(y, RealSeq):
        if y.start != 0:
            raise EvalDomainError("path to invert must start at index 0")
        vals = y.values
    else:
        vals = np.asarray(y, dtype=float)
    if vals.size < 2:
        raise EvalDomainError("need at least x(0) and x(1) to recover a forcing term")
    n_steps = vals.size - 1
    kern = kernel.coefficients(n_steps).tolist()
    feval = f.eval
    fys = [feval(float(v)) for v in vals[:n_steps]]
    out = [0.0] * n_steps
    for n in range(n_steps):
        acc = 0.0
        for j in range(n + 1):
            acc += kern[n - j] * fys[j]
        if not (-DEFAULT_OVERFLOW_LIMIT <= acc <= DEFAULT_OVERFLOW_LIMIT):
            raise SimulationOverflow(n, acc, DEFAULT_OVERFLOW_LIMIT)
        out[n] = nudged_addend(float(vals[n + 1]), acc)
    return RealSeq(1, np.asarray(out))

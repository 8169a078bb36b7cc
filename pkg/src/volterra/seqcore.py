"""Kernels, nonlinearities, index sequences, and scaling sequences.

Value types shared by the solver, the forcing generators, and the
diagnostics.  Everything here is immutable after construction and every
operation is a pure function, so instances can be shared freely across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpecError",
    "EvalDomainError",
    "KernelSpec",
    "EnvelopeSpec",
    "NonlinearitySpec",
    "RealSeq",
    "ScalerSpec",
]

_MAX_SUPPORT = 2**62


class SpecError(ValueError):
    """A constructor invariant was violated."""


class EvalDomainError(ValueError):
    """An evaluation was requested outside the domain of the object."""


def _abs_power_tail(beta: float, start: int) -> tuple[float, float]:
    """Estimate ``sum_{m >= start} m**(-beta)`` with a certified error bound.

    Euler-Maclaurin with three correction terms; u**(-beta) is completely
    monotone, so the remainder is bounded by the first omitted term.
    """
    m = float(start)
    b012 = beta * (beta + 1.0) * (beta + 2.0)
    est = (
        m ** (1.0 - beta) / (beta - 1.0)
        + 0.5 * m**-beta
        + beta / 12.0 * m ** (-beta - 1.0)
        - b012 / 720.0 * m ** (-beta - 3.0)
    )
    err = b012 * (beta + 3.0) * (beta + 4.0) / 30240.0 * m ** (-beta - 5.0)
    return est, err


def _abs_power_series(beta: float, tol: float, stride: int = 1, offset: int = 1) -> float:
    """``sum_{j >= 0} (stride*j + offset)**(-beta)`` to within ``tol``."""
    m_start = 64
    while True:
        est, err = _abs_power_tail(beta, m_start)
        if err <= max(tol, 1e-300) / max(stride, 1) or m_start >= 2**22:
            break
        m_start *= 2
    head_all = float(np.sum(np.arange(1.0, m_start) ** -beta))
    total = head_all + est
    if stride == 1:
        return total
    if stride == 2 and offset == 1:
        # odd terms only: (1 - 2**-beta) * sum over all m
        return (1.0 - 2.0**-beta) * total
    raise ValueError("unsupported stride/offset")


@dataclass(frozen=True)
class KernelSpec:
    """Absolutely summable convolution weights k(0), k(1), ...

    Variants:
      ``finite``      explicit coefficient list, zero beyond its support
      ``geometric``   k(j) = c * rho**j with |rho| < 1
      ``polynomial``  k(j) = c * (j + 1)**(-beta) with beta > 1

    ``trunc_tol`` is the l1 mass that may be discarded when the kernel is
    materialised to finitely many coefficients; every truncation performed
    by this class is certified against it.
    """

    variant: str
    coeffs: tuple[float, ...] = ()
    c: float = 0.0
    rho: float = 0.0
    beta: float = 0.0
    trunc_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.trunc_tol < 0.0 or not math.isfinite(self.trunc_tol):
            raise SpecError("trunc_tol must be a nonnegative finite real")
        if self.variant == "finite":
            if not all(math.isfinite(v) for v in self.coeffs):
                raise SpecError("finite kernel coefficients must be finite")
        elif self.variant == "geometric":
            if not (math.isfinite(self.c) and math.isfinite(self.rho)):
                raise SpecError("geometric kernel parameters must be finite")
            if abs(self.rho) >= 1.0:
                raise SpecError("geometric kernel requires |rho| < 1")
        elif self.variant == "polynomial":
            if not (math.isfinite(self.c) and math.isfinite(self.beta)):
                raise SpecError("polynomial kernel parameters must be finite")
            if self.beta <= 1.0:
                raise SpecError("polynomial kernel requires beta > 1")
        else:
            raise SpecError(f"unknown kernel variant {self.variant!r}")

    @classmethod
    def finite(cls, coeffs, trunc_tol: float = 1e-12) -> "KernelSpec":
        return cls(variant="finite", coeffs=tuple(float(v) for v in coeffs), trunc_tol=trunc_tol)

    @classmethod
    def null(cls) -> "KernelSpec":
        return cls.finite(())

    @classmethod
    def geometric(cls, c: float, rho: float, trunc_tol: float = 1e-12) -> "KernelSpec":
        return cls(variant="geometric", c=float(c), rho=float(rho), trunc_tol=trunc_tol)

    @classmethod
    def polynomial(cls, c: float, beta: float, trunc_tol: float = 1e-12) -> "KernelSpec":
        return cls(variant="polynomial", c=float(c), beta=float(beta), trunc_tol=trunc_tol)

    @property
    def is_null(self) -> bool:
        if self.variant == "finite":
            return all(v == 0.0 for v in self.coeffs)
        return self.c == 0.0

    def l1(self) -> float:
        """Sum of |k(j)|, exact for finite/geometric, certified to trunc_tol otherwise."""
        if self.variant == "finite":
            return float(np.sum(np.abs(np.asarray(self.coeffs, dtype=float)))) if self.coeffs else 0.0
        if self.variant == "geometric":
            return abs(self.c) / (1.0 - abs(self.rho))
        return abs(self.c) * _abs_power_series(self.beta, self.trunc_tol)

    def even_index_sum(self) -> float:
        """Sum of k(2j) over j >= 0, certified to trunc_tol."""
        if self.variant == "finite":
            return float(sum(self.coeffs[::2]))
        if self.variant == "geometric":
            return self.c / (1.0 - self.rho * self.rho)
        # k(2j) = c * (2j + 1)**(-beta): odd integers only
        return self.c * _abs_power_series(self.beta, self.trunc_tol, stride=2, offset=1)

    def coefficients(self, count: int) -> np.ndarray:
        """Materialise k(0), ..., k(count-1)."""
        if count < 0:
            raise EvalDomainError("coefficient count must be nonnegative")
        if self.variant == "finite":
            out = np.zeros(count)
            m = min(count, len(self.coeffs))
            out[:m] = self.coeffs[:m]
            return out
        j = np.arange(count, dtype=float)
        if self.variant == "geometric":
            if self.rho == 0.0:
                out = np.zeros(count)
                if count:
                    out[0] = self.c
                return out
            return self.c * np.power(self.rho, j)
        return self.c * np.power(j + 1.0, -self.beta)

    def tail_l1(self, length: int) -> float:
        """Upper bound on the discarded mass sum_{j >= length} |k(j)|."""
        if length < 0:
            raise EvalDomainError("length must be nonnegative")
        if self.variant == "finite":
            return float(sum(abs(v) for v in self.coeffs[length:]))
        if self.variant == "geometric":
            return abs(self.c) * abs(self.rho) ** length / (1.0 - abs(self.rho))
        if length == 0:
            return self.l1()
        # sum_{m >= length + 1} m**(-beta) <= integral_{length}^{inf} u**(-beta) du
        return abs(self.c) * float(length) ** (1.0 - self.beta) / (self.beta - 1.0)

    def certified_support(self, tol: float | None = None) -> int:
        """Smallest length whose discarded l1 tail is at most ``tol``.

        Can be astronomically large for slowly decaying kernels; callers cap
        it at their horizon.
        """
        tol = self.trunc_tol if tol is None else tol
        if self.variant == "finite":
            return len(self.coeffs)
        if self.is_null:
            return 0
        if tol <= 0.0:
            return _MAX_SUPPORT
        if self.variant == "geometric":
            if self.rho == 0.0:
                return 1
            bound = tol * (1.0 - abs(self.rho)) / abs(self.c)
            if bound >= 1.0:
                return 0
            return min(_MAX_SUPPORT, int(math.ceil(math.log(bound) / math.log(abs(self.rho)))))
        # |c| * L**(1-beta) / (beta-1) <= tol
        log_l = math.log(abs(self.c) / ((self.beta - 1.0) * tol)) / (self.beta - 1.0)
        if log_l <= 0.0:
            return 1
        if log_l >= math.log(_MAX_SUPPORT):
            return _MAX_SUPPORT
        return int(math.ceil(math.exp(log_l)))

    def payload(self) -> dict:
        out: dict = {"variant": self.variant, "trunc_tol": self.trunc_tol}
        if self.variant == "finite":
            out["coeffs"] = list(self.coeffs)
        elif self.variant == "geometric":
            out["c"] = self.c
            out["rho"] = self.rho
        else:
            out["c"] = self.c
            out["beta"] = self.beta
        return out


@dataclass(frozen=True)
class EnvelopeSpec:
    """Increasing envelope phi(u) = scale * u**gamma on [0, inf).

    gamma <= 1 keeps phi(u)/u nonincreasing beyond ``x0``, which is the shape
    the signed-fluctuation diagnostics rely on.
    """

    gamma: float
    scale: float = 1.0
    x0: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= 1.0):
            raise SpecError("envelope exponent must lie in (0, 1]")
        if self.scale <= 0.0 or not math.isfinite(self.scale):
            raise SpecError("envelope scale must be a positive real")
        if self.x0 < 0.0:
            raise SpecError("envelope x0 must be nonnegative")

    def phi(self, u: float) -> float:
        if u < 0.0:
            raise EvalDomainError("envelope is defined on [0, inf)")
        return self.scale * u**self.gamma

    def payload(self) -> dict:
        return {"gamma": self.gamma, "scale": self.scale, "x0": self.x0}


@dataclass(frozen=True)
class NonlinearitySpec:
    """Continuous sublinear state nonlinearity f.

    Variants:
      ``signed-power``  f(x) = sgn(x) |x|**alpha with alpha in (0, 1)
      ``bounded``       saturating ramp clamped to [-M, M]
      ``table``         linear interpolation of (x, f(x)) pairs; queries
                        outside the table range raise EvalDomainError

    Each variant is sublinear by construction: f(x)/x -> 0 as |x| -> inf
    (the table variant is only defined on its bounded range).
    """

    variant: str
    alpha: float = 0.0
    bound: float = 0.0
    table_x: tuple[float, ...] = ()
    table_y: tuple[float, ...] = ()
    envelope: EnvelopeSpec | None = None

    def __post_init__(self) -> None:
        if self.variant == "signed-power":
            if not (0.0 < self.alpha < 1.0):
                raise SpecError("signed-power exponent must lie in (0, 1)")
        elif self.variant == "bounded":
            if self.bound < 0.0 or not math.isfinite(self.bound):
                raise SpecError("bound M must be a nonnegative real")
        elif self.variant == "table":
            xs, ys = self.table_x, self.table_y
            if len(xs) != len(ys) or len(xs) < 2:
                raise SpecError("table needs at least two (x, f(x)) pairs")
            if not all(math.isfinite(v) for v in xs + ys):
                raise SpecError("table entries must be finite")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise SpecError("table abscissae must be strictly increasing")
        else:
            raise SpecError(f"unknown nonlinearity variant {self.variant!r}")
        if self.envelope is not None:
            self._validate_envelope()

    def _validate_envelope(self) -> None:
        """An attached envelope must dominate |f| within 1% beyond x0 and be
        matched by |f| at large arguments (sampled on a log grid)."""
        env = self.envelope
        if self.variant == "table":
            lo = max(env.x0, self.table_x[0], 1e-9)
            hi = self.table_x[-1]
            if hi <= lo:
                return
            xs = np.geomspace(lo, hi, 200)
            vals = np.abs(self.eval_array(xs))
            phi = env.scale * xs**env.gamma
            if np.any(vals > 1.01 * phi + 1e-12):
                raise SpecError("envelope must dominate |f| within 1% beyond x0")
            return
        xs = np.geomspace(max(env.x0, 1e-6), 1e12, 400)
        vals = np.abs(self.eval_array(xs))
        phi = env.scale * xs**env.gamma
        if np.any(vals > 1.01 * phi + 1e-12):
            raise SpecError("envelope must dominate |f| within 1% beyond x0")
        tail = vals[-40:] / phi[-40:]
        if np.any(tail < 0.9) or np.any(tail > 1.01):
            raise SpecError("|f|/phi must approach 1 at large arguments")

    @classmethod
    def signed_power(cls, alpha: float, envelope: EnvelopeSpec | None = None) -> "NonlinearitySpec":
        alpha = float(alpha)
        if envelope is None and 0.0 < alpha < 1.0:
            # |f(x)| / phi(|x|) == 1 identically for the matching power envelope
            envelope = EnvelopeSpec(gamma=alpha)
        return cls(variant="signed-power", alpha=alpha, envelope=envelope)

    @classmethod
    def bounded(cls, bound: float, envelope: EnvelopeSpec | None = None) -> "NonlinearitySpec":
        return cls(variant="bounded", bound=float(bound), envelope=envelope)

    @classmethod
    def table(cls, xs, ys, envelope: EnvelopeSpec | None = None) -> "NonlinearitySpec":
        return cls(
            variant="table",
            table_x=tuple(float(v) for v in xs),
            table_y=tuple(float(v) for v in ys),
            envelope=envelope,
        )

    def eval(self, x: float) -> float:
        """Evaluate f at a single point."""
        if not math.isfinite(x):
            raise EvalDomainError("f requires a finite argument")
        if self.variant == "signed-power":
            v = abs(x) ** self.alpha
            return -v if x < 0.0 else v
        if self.variant == "bounded":
            m = self.bound
            if x > m:
                return m
            if x < -m:
                return -m
            return x
        if x < self.table_x[0] or x > self.table_x[-1]:
            raise EvalDomainError(f"x={x!r} outside table range [{self.table_x[0]}, {self.table_x[-1]}]")
        return float(np.interp(x, self.table_x, self.table_y))

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.variant == "signed-power":
            return np.sign(xs) * np.abs(xs) ** self.alpha
        if self.variant == "bounded":
            return np.clip(xs, -self.bound, self.bound)
        if xs.size and (xs.min() < self.table_x[0] or xs.max() > self.table_x[-1]):
            raise EvalDomainError("argument outside table range")
        return np.interp(xs, self.table_x, self.table_y)

    def sublinearity_bound(self, eps: float) -> float:
        """Smallest practical F(eps) > 0 with |f(x)| <= F(eps) + eps |x| everywhere.

        Closed form for signed-power (maximise u**alpha - eps*u over u >= 0),
        the saturation level for bounded f, and an exact search over the
        interpolation kinks for tables (with a 1% safety margin).
        """
        if eps <= 0.0 or not math.isfinite(eps):
            raise EvalDomainError("eps must be a positive real")
        if self.variant == "signed-power":
            a = self.alpha
            return (1.0 - a) * (a / eps) ** (a / (1.0 - a))
        if self.variant == "bounded":
            return max(self.bound, 1e-12)
        # |f| - eps|x| is piecewise linear between kinks: table knots, sign
        # changes of the interpolant, and x = 0.
        xs = list(self.table_x)
        ys = list(self.table_y)
        cand = list(xs)
        if xs[0] < 0.0 < xs[-1]:
            cand.append(0.0)
        for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
            if y0 * y1 < 0.0:
                cand.append(x0 + (x1 - x0) * (-y0) / (y1 - y0))
        best = max(abs(self.eval(x)) - eps * abs(x) for x in cand)
        return max(best * 1.01, 1e-12)

    def payload(self) -> dict:
        out: dict = {"variant": self.variant}
        if self.variant == "signed-power":
            out["alpha"] = self.alpha
        elif self.variant == "bounded":
            out["bound"] = self.bound
        else:
            out["table_x"] = list(self.table_x)
            out["table_y"] = list(self.table_y)
        if self.envelope is not None:
            out["envelope"] = self.envelope.payload()
        return out


@dataclass(frozen=True)
class RealSeq:
    """A finite real sequence with an explicit first index (0 or 1).

    State paths are indexed from 0, forcing sequences from 1; keeping the
    start index on the value avoids off-by-one mistakes when the two are
    mixed in diagnostics.
    """

    start: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.start not in (0, 1):
            raise SpecError("start index must be 0 or 1")
        arr = np.ascontiguousarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise SpecError("sequence values must be one-dimensional")
        if arr.size and not np.isfinite(arr).all():
            raise SpecError("sequence entries must all be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> int:
        """Largest valid index."""
        return self.start + len(self) - 1

    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self))

    def at(self, n: int) -> float:
        if n < self.start or n > self.end:
            raise EvalDomainError(f"index {n} outside [{self.start}, {self.end}]")
        return float(self.values[n - self.start])

    def prefix(self, n: int) -> "RealSeq":
        """The subsequence on indices start..n."""
        if n < self.start or n > self.end:
            raise EvalDomainError(f"index {n} outside [{self.start}, {self.end}]")
        return RealSeq(self.start, self.values[: n - self.start + 1])

    def tail_from(self, n: int) -> "RealSeq":
        """The subsequence on indices n..end; n must be 0 or 1."""
        if n < self.start or n > self.end:
            raise EvalDomainError(f"index {n} outside [{self.start}, {self.end}]")
        return RealSeq(n, self.values[n - self.start :])


@dataclass(frozen=True)
class ScalerSpec:
    """Increasing, diverging normalisation sequence a(n) > 0.

    Variants: ``sqrt-log`` a(n) = sqrt(2 log n) (defined for n >= 2),
    ``power`` a(n) = n**p with p > 0, ``exponential`` a(n) = exp(a n) with
    a > 0, and an increasing positive ``table``.
    """

    variant: str
    p: float = 0.0
    a: float = 0.0
    table_n: tuple[int, ...] = ()
    table_a: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.variant == "sqrt-log":
            return
        if self.variant == "power":
            if self.p <= 0.0 or not math.isfinite(self.p):
                raise SpecError("power scaler requires p > 0")
        elif self.variant == "exponential":
            if self.a <= 0.0 or not math.isfinite(self.a):
                raise SpecError("exponential scaler requires a > 0")
        elif self.variant == "table":
            ns, vs = self.table_n, self.table_a
            if len(ns) != len(vs) or len(ns) < 2:
                raise SpecError("scaler table needs at least two entries")
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise SpecError("scaler table indices must be strictly increasing")
            if any(v <= 0.0 for v in vs) or any(b < a for a, b in zip(vs, vs[1:])):
                raise SpecError("scaler table values must be positive and nondecreasing")
        else:
            raise SpecError(f"unknown scaler variant {self.variant!r}")

    @classmethod
    def sqrt_log(cls) -> "ScalerSpec":
        return cls(variant="sqrt-log")

    @classmethod
    def power(cls, p: float) -> "ScalerSpec":
        return cls(variant="power", p=float(p))

    @classmethod
    def exponential(cls, a: float) -> "ScalerSpec":
        return cls(variant="exponential", a=float(a))

    @classmethod
    def table(cls, ns, vals) -> "ScalerSpec":
        return cls(
            variant="table",
            table_n=tuple(int(n) for n in ns),
            table_a=tuple(float(v) for v in vals),
        )

    @property
    def min_index(self) -> int:
        if self.variant == "sqrt-log":
            return 2  # log 1 = 0 would give a(1) = 0
        if self.variant == "table":
            return self.table_n[0]
        return 1

    def eval(self, n: int) -> float:
        if n < self.min_index:
            raise EvalDomainError(f"scaler undefined below n={self.min_index}")
        if self.variant == "sqrt-log":
            return math.sqrt(2.0 * math.log(n))
        if self.variant == "power":
            return float(n) ** self.p
        if self.variant == "exponential":
            return math.exp(self.a * n)
        if n > self.table_n[-1]:
            raise EvalDomainError("index beyond scaler table range")
        return float(np.interp(n, self.table_n, self.table_a))

    def eval_array(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns)
        if ns.size and ns.min() < self.min_index:
            raise EvalDomainError(f"scaler undefined below n={self.min_index}")
        nf = ns.astype(float)
        if self.variant == "sqrt-log":
            return np.sqrt(2.0 * np.log(nf))
        if self.variant == "power":
            return nf**self.p
        if self.variant == "exponential":
            return np.exp(self.a * nf)
        if ns.size and ns.max() > self.table_n[-1]:
            raise EvalDomainError("index beyond scaler table range")
        return np.interp(nf, self.table_n, self.table_a)

    def payload(self) -> dict:
        out: dict = {"variant": self.variant}
        if self.variant == "power":
            out["p"] = self.p
        elif self.variant == "exponential":
            out["a"] = self.a
        elif self.variant == "table":
            out["table_n"] = list(self.table_n)
            out["table_a"] = list(self.table_a)
        return out

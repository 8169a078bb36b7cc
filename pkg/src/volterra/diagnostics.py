"""Derived sequences and estimators for comparing forcing and solution.

Running maxima with record times, signed maxima, guarded ratio tracks, the
negative/positive fluctuation ratio and its nonlinearity-refined variant,
tail sup ratios against a scaling sequence, modulated-growth residuals, and
convex time averages.  All operations are pure and the returned tracks are
immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .seqcore import EvalDomainError, NonlinearitySpec, RealSeq, ScalerSpec, SpecError

__all__ = [
    "DIVISION_GUARD",
    "MaxTrack",
    "RatioTrack",
    "LimitEstimate",
    "ResidualTrack",
    "ConvexWeightSpec",
    "PhiOverflowError",
    "DegenerateSequenceError",
    "running_max_abs",
    "running_signed_max",
    "ratio_track",
    "estimate_lambda",
    "estimate_lambda2",
    "tail_sup_ratio",
    "lambda_a_residual",
    "phi_time_average",
    "pth_moment_track",
    "final_window_size",
    "track_diverges",
    "verify_path_bounds",
]

# absolute division guard: denominators below this produce gaps, not values
DIVISION_GUARD = 1e-300

# a track is called divergent when its dyadic window means grow by at least
# this factor end to end while increasing monotonically
DIVERGENCE_RATIO = 1.25


class DegenerateSequenceError(ValueError):
    """The input sequence never crosses the level required by the estimator."""


class PhiOverflowError(OverflowError):
    """phi((1+eta)|value|) left double range; carries the first bad index."""

    def __init__(self, index: int):
        super().__init__(f"convex weight overflowed at index {index}")
        self.index = index


def final_window_size(length: int, fraction: float = 0.1) -> int:
    return max(1, int(round(length * fraction)))


@dataclass(frozen=True)
class MaxTrack:
    """A running maximum together with the earliest index attaining it."""

    values: RealSeq
    argmax: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != self.argmax.size:
            raise SpecError("argmax track must align with the value track")
        arg = np.ascontiguousarray(self.argmax, dtype=np.int64).copy()
        arg.setflags(write=False)
        object.__setattr__(self, "argmax", arg)

    @property
    def final(self) -> float:
        return float(self.values.values[-1])

    def value_at(self, n: int) -> float:
        return self.values.at(n)

    def time_at(self, n: int) -> int:
        return int(self.argmax[n - self.values.start])


def _running_max(base: np.ndarray, start: int) -> MaxTrack:
    run = np.maximum.accumulate(base)
    prev = np.empty_like(run)
    prev[0] = -np.inf
    prev[1:] = run[:-1]
    record = base > prev  # strict: earliest attaining index wins ties
    idx = np.where(record, np.arange(base.size), 0)
    arg = np.maximum.accumulate(idx) + start
    return MaxTrack(values=RealSeq(start, run), argmax=arg)


def running_max_abs(seq: RealSeq) -> MaxTrack:
    """Running maximum of |seq(j)| from the sequence's own start index."""
    if len(seq) == 0:
        raise EvalDomainError("running maximum of an empty sequence")
    return _running_max(np.abs(seq.values), seq.start)


def running_signed_max(seq: RealSeq, sign: str) -> MaxTrack:
    """Running maximum of seq ("+") or of -seq ("-").

    Values can be negative while the sequence has not yet crossed the
    relevant sign.
    """
    if len(seq) == 0:
        raise EvalDomainError("running maximum of an empty sequence")
    if sign == "+":
        return _running_max(np.asarray(seq.values), seq.start)
    if sign == "-":
        return _running_max(-np.asarray(seq.values), seq.start)
    raise EvalDomainError("sign must be '+' or '-'")


@dataclass(frozen=True)
class RatioTrack:
    """A pointwise quotient with gap markers where the denominator is guarded.

    ``summary`` holds mean/min/max over the non-gap points of the final 10%
    of indices; ``all_gaps`` flags a track with no valid points at all.
    """

    start: int
    values: np.ndarray
    gap_count: int
    all_gaps: bool
    summary: dict

    def __len__(self) -> int:
        return int(self.values.size)


def _window_summary(values: np.ndarray, fraction: float = 0.1) -> dict:
    size = final_window_size(values.size, fraction)
    tail = values[-size:]
    good = tail[np.isfinite(tail)]
    if good.size == 0:
        return {"count": 0, "mean": math.nan, "min": math.nan, "max": math.nan}
    return {
        "count": int(good.size),
        "mean": float(good.mean()),
        "min": float(good.min()),
        "max": float(good.max()),
    }


def ratio_track(num: RealSeq, den: RealSeq, guard: float = DIVISION_GUARD) -> RatioTrack:
    if guard <= 0.0:
        raise EvalDomainError("guard must be positive")
    if num.start != den.start or len(num) != len(den):
        raise EvalDomainError("numerator and denominator must cover the same index range")
    d = den.values
    ok = np.abs(d) >= guard
    vals = np.full(len(num), np.nan)
    np.divide(num.values, d, out=vals, where=ok)
    gaps = int(np.count_nonzero(~ok))
    return RatioTrack(
        start=num.start,
        values=vals,
        gap_count=gaps,
        all_gaps=gaps == len(num),
        summary=_window_summary(vals),
    )


def track_diverges(values: np.ndarray, ratio: float = DIVERGENCE_RATIO) -> bool:
    """Dyadic-window divergence proxy for a nonnegative track.

    The final four dyadic windows must have strictly increasing means with
    total growth at least ``ratio``.  Deliberately conservative: slow
    (logarithmic) divergence is reported as finite at desk scale.
    """
    good = values[np.isfinite(values)]
    n = good.size
    if n < 16:
        return False
    means = []
    hi = n
    for _ in range(4):
        lo = hi // 2
        means.append(float(good[lo:hi].mean()))
        hi = lo
    m0, m1, m2, m3 = means  # m0 is the most recent window
    if not (m0 > m1 > m2 > m3):
        return False
    if m3 <= 0.0:
        # a negative track rising toward zero is converging, not diverging;
        # growth can only be certified from positive territory
        return False
    return m0 / m3 >= ratio


@dataclass(frozen=True)
class LimitEstimate:
    """A final-window limit estimate with a divergence verdict.

    ``value`` is the final-window mean of the track (inf when the track is
    classified as diverging); ``onset`` is the first index at which the
    numerator track became positive, or None if it never did.
    """

    value: float
    regime: str  # "finite" | "diverging"
    track: RatioTrack
    onset: Optional[int] = None


def _limit_estimate(num_vals: np.ndarray, den_vals: np.ndarray, start: int, guard: float) -> LimitEstimate:
    ok = den_vals > guard
    if not ok.any():
        raise DegenerateSequenceError("denominator track never becomes positive")
    vals = np.full(num_vals.size, np.nan)
    np.divide(num_vals, den_vals, out=vals, where=ok)
    gaps = int(np.count_nonzero(~ok))
    track = RatioTrack(
        start=start,
        values=vals,
        gap_count=gaps,
        all_gaps=gaps == num_vals.size,
        summary=_window_summary(vals),
    )
    pos = np.nonzero(num_vals > 0.0)[0]
    onset = int(pos[0]) + start if pos.size else None
    if track_diverges(vals):
        return LimitEstimate(value=math.inf, regime="diverging", track=track, onset=onset)
    return LimitEstimate(value=track.summary["mean"], regime="finite", track=track, onset=onset)


def estimate_lambda(H: RealSeq, guard: float = DIVISION_GUARD) -> LimitEstimate:
    """Ratio of largest negative to largest positive excursion of H.

    Classifies which fluctuation side dominates: near 1 the sides balance,
    near 0 the positive side dominates, diverging means the negative side
    wins.
    """
    pos = running_signed_max(H, "+").values.values
    neg = running_signed_max(H, "-").values.values
    return _limit_estimate(neg, pos, H.start, guard)


def estimate_lambda2(H: RealSeq, f: NonlinearitySpec, guard: float = DIVISION_GUARD) -> LimitEstimate:
    """Refinement of the zero-lambda regime: H*-(n) / f(H*+(n))."""
    pos = running_signed_max(H, "+").values.values
    neg = running_signed_max(H, "-").values.values
    den = np.where(pos > 0.0, f.eval_array(np.maximum(pos, 0.0)), -np.inf)
    return _limit_estimate(neg, den, H.start, guard)


def tail_sup_ratio(
    seq: RealSeq,
    scaler: ScalerSpec,
    tail_fraction: float = 0.9,
    mode: str = "abs",
) -> float:
    """Desk-scale limsup proxy: sup of seq(n)/a(n) over the trailing window.

    ``tail_fraction`` is the trailing share of indices kept (the leading
    share is discarded as burn-in).  ``mode`` selects |seq|, seq, or -seq.
    """
    if not (0.0 < tail_fraction < 1.0):
        raise EvalDomainError("tail_fraction must lie in (0, 1)")
    count = max(1, int(round(len(seq) * tail_fraction)))
    idx = seq.indices()[-count:]
    vals = seq.values[-count:]
    keep = idx >= scaler.min_index
    if not keep.any():
        raise EvalDomainError("tail window is empty after the scaler domain cut")
    idx = idx[keep]
    vals = vals[keep]
    a = scaler.eval_array(idx)
    if mode == "abs":
        vals = np.abs(vals)
    elif mode == "neg":
        vals = -vals
    elif mode != "pos":
        raise EvalDomainError("mode must be 'abs', 'pos', or 'neg'")
    return float(np.max(vals / a))


@dataclass(frozen=True)
class ResidualTrack:
    """Pointwise |seq(n)/a(n) - modulation(n)| with its final-window sup."""

    start: int
    values: np.ndarray
    final_sup: float


def lambda_a_residual(seq: RealSeq, scaler: ScalerSpec, modulation: RealSeq) -> ResidualTrack:
    """How far seq/a sits from a candidate bounded modulation factor."""
    if seq.start != modulation.start or len(seq) != len(modulation):
        raise EvalDomainError("sequence and modulation must cover the same index range")
    if seq.start < scaler.min_index:
        raise EvalDomainError(f"scaler undefined below n={scaler.min_index}; trim the sequence first")
    a = scaler.eval_array(seq.indices())
    if np.any(np.abs(a) < DIVISION_GUARD):
        raise EvalDomainError("scaler values fell below the division guard")
    resid = np.abs(seq.values / a - modulation.values)
    size = final_window_size(resid.size)
    return ResidualTrack(start=seq.start, values=resid, final_sup=float(resid[-size:].max()))


@dataclass(frozen=True)
class ConvexWeightSpec:
    """Increasing convex weight phi for time averages.

    Variants: ``power`` phi(u) = u**p with p >= 1, ``gaussian-exp``
    phi(u) = exp(a u^2) with a > 0.  ``eta`` is the argument inflation
    (1 + eta)|value| applied before phi.
    """

    variant: str
    p: float = 0.0
    a: float = 0.0
    eta: float = 0.0

    def __post_init__(self) -> None:
        if self.variant == "power":
            if self.p < 1.0 or not math.isfinite(self.p):
                raise SpecError("power weight requires p >= 1")
        elif self.variant == "gaussian-exp":
            if self.a <= 0.0 or not math.isfinite(self.a):
                raise SpecError("gaussian-exp weight requires a > 0")
        else:
            raise SpecError(f"unknown weight variant {self.variant!r}")
        if self.eta < 0.0 or not math.isfinite(self.eta):
            raise SpecError("eta must be a nonnegative real")

    @classmethod
    def power(cls, p: float, eta: float = 0.0) -> "ConvexWeightSpec":
        return cls(variant="power", p=float(p), eta=float(eta))

    @classmethod
    def gaussian_exp(cls, a: float, eta: float = 0.0) -> "ConvexWeightSpec":
        return cls(variant="gaussian-exp", a=float(a), eta=float(eta))

    def phi_array(self, u: np.ndarray) -> np.ndarray:
        if self.variant == "power":
            return u**self.p
        with np.errstate(over="ignore"):
            return np.exp(self.a * u * u)

    def payload(self) -> dict:
        out: dict = {"variant": self.variant, "eta": self.eta}
        if self.variant == "power":
            out["p"] = self.p
        else:
            out["a"] = self.a
        return out


def phi_time_average(seq: RealSeq, weight: ConvexWeightSpec) -> RealSeq:
    """Running averages A(n) of phi((1 + eta)|seq(j)|) over j up to n.

    A(n) is the mean over the entries available up to n, counted from the
    sequence's own start index.  Overflow of phi at any index raises
    PhiOverflowError: for gaussian-exp weights that is the signature of the
    divergent regime and callers treat it as divergence evidence.
    """
    u = (1.0 + weight.eta) * np.abs(seq.values)
    vals = weight.phi_array(u)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise PhiOverflowError(int(np.nonzero(bad)[0][0]) + seq.start)
    avg = np.cumsum(vals) / np.arange(1.0, vals.size + 1.0)
    if not np.isfinite(avg).all():
        raise PhiOverflowError(int(np.nonzero(~np.isfinite(avg))[0][0]) + seq.start)
    return RealSeq(seq.start, avg)


def pth_moment_track(seq: RealSeq, p: float) -> RealSeq:
    """Running averages of |seq(j)|**p (power weight, no inflation)."""
    return phi_time_average(seq, ConvexWeightSpec.power(p))


def verify_path_bounds(
    x: RealSeq,
    s: RealSeq,
    H: RealSeq,
    kernel,
    f: NonlinearitySpec,
    eps_list=(0.5, 0.1, 0.01),
    slack: float = 1e-9,
) -> list[dict]:
    """Check the pathwise history-sum and maximum envelopes along a path.

    For each eps: |s(n)| <= |k|1 F(eps) + eps |k|1 x*(n) and
    |H(n)| <= (1 + eps |k|1) x*(n) + |k|1 F(eps); whenever eps |k|1 < 1
    additionally x*(n) <= (|x(0)| + |k|1 F(eps) + H*(n)) / (1 - eps |k|1).
    An eps of 1/(2 |k|1) is always appended so the last bound is exercised
    even when every listed eps is too large.  Returns one record per
    violation (empty list when the path satisfies everything).  ``slack``
    absorbs float evaluation error of the two sides.
    """
    k1 = kernel.l1()
    n_steps = len(s)
    xstar = running_max_abs(x).values.values  # indices 0..N
    hstar = running_max_abs(H.prefix(H.start + n_steps - 1)).values.values  # 1..N
    habs = np.abs(H.values[:n_steps])
    sabs = np.abs(s.values)
    x0 = abs(x.at(0))
    eps_all = list(eps_list)
    if k1 > 0.0:
        half = 1.0 / (2.0 * k1)
        if not any(abs(e - half) < 1e-15 for e in eps_all):
            eps_all.append(half)
    violations: list[dict] = []

    def _record(name, eps, lhs, rhs):
        gap = lhs - rhs
        bad = gap > slack * (1.0 + np.abs(rhs))
        for i in np.nonzero(bad)[0]:
            violations.append(
                {"bound": name, "eps": eps, "index": int(i), "lhs": float(lhs[i]), "rhs": float(rhs[i])}
            )

    for eps in eps_all:
        feps = f.sublinearity_bound(eps)
        _record("history-sum", eps, sabs, k1 * feps + eps * k1 * xstar[:n_steps])
        _record("forcing-from-state", eps, habs, (1.0 + eps * k1) * xstar[1:] + k1 * feps)
        if eps * k1 < 1.0:
            bound = (x0 + k1 * feps + hstar) / (1.0 - eps * k1)
            _record("state-max", eps, xstar[1:], bound)
    return violations

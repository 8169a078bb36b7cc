"""Simulation and asymptotic diagnostics for forced sublinear Volterra recursions.

The package simulates paths of the history-dependent recursion

    x(n+1) = H(n+1) + sum_{j=0}^{n} k(n-j) f(x(j)),    x(0) = xi,

for summable kernels ``k`` and sublinear nonlinearities ``f``, generates the
deterministic and seeded stochastic forcing sequences ``H`` used in practice,
and computes the running-maximum, record-time, fluctuation-ratio, scaling and
time-average diagnostics through which the long-run behaviour of ``x`` can be
compared against that of ``H``.
"""

__version__ = "0.1.0"

from .seqcore import (
    EnvelopeSpec,
    EvalDomainError,
    KernelSpec,
    NonlinearitySpec,
    RealSeq,
    ScalerSpec,
    SpecError,
)
from .engine import SimConfig, SimPath, SimulationOverflow, recover_forcing, simulate, volterra_term
from .forcing import ForcingSequence, ForcingSpec, constructed_H_asymptotics, generate

__all__ = [
    "__version__",
    "EnvelopeSpec",
    "EvalDomainError",
    "KernelSpec",
    "NonlinearitySpec",
    "RealSeq",
    "ScalerSpec",
    "SpecError",
    "SimConfig",
    "SimPath",
    "SimulationOverflow",
    "simulate",
    "volterra_term",
    "recover_forcing",
    "ForcingSpec",
    "ForcingSequence",
    "generate",
    "constructed_H_asymptotics",
]

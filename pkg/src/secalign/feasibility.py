"""Analytic feasibility predictors and the per-iteration flop model.

Solvability of the polynomial alignment system is checked by counting:
a scheme can only be feasible when it has at least as many free variables
as equations. Both schemes reduce to a quadratic constraint on the
artificial-noise dimension ``da``:

* LM:  ``da^2 - da (Ma - 1 - s_d) - (Nb - 1 + s_N) <= 0``
* MEB: ``da^2 - da (Ma - 1 - s_d) - (s_N - s_d)   <= 0``

The conditions are necessary, not sufficient; the simulated boundary can
sit strictly below ``da_max`` (the experiment recipes reproduce that gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import NetworkConfig

__all__ = [
    "FeasibilityReport",
    "FlopEstimate",
    "lm_necessary_condition",
    "meb_necessary_condition",
    "predict_cancellation",
    "estimate_flops",
    "flops_wa",
    "flops_ub",
    "flops_uk_lm",
    "flops_uk_meb",
]

#: Absorbs representation error of perfect-square discriminants before floor.
_SQRT_GUARD = 1e-9


@dataclass(frozen=True)
class FeasibilityReport:
    """Counting summary plus the verdict for one (config, scheme) pair.

    ``quadratic`` is the integer value of the scheme's quadratic form at
    ``config.da`` (feasible requires <= 0) and ``da_max`` the closed-form
    right end of the admissible range; the two views always agree.
    """

    scheme: str
    da: int
    s_d: int
    s_N: int
    s_Ma: int
    N_E: int
    N_V: int
    quadratic: int
    discriminant: float
    da_max: int
    satisfied: bool


def _da_max(Ma, s_d, discriminant):
    right = (Ma - 1 - s_d + math.sqrt(discriminant)) / 2.0
    return min(Ma - 1, math.floor(right + _SQRT_GUARD))


def lm_necessary_condition(config: NetworkConfig) -> FeasibilityReport:
    """Variable/equation counting verdict for leakage-minimization IA."""
    s_d, s_N = config.s_d, config.s_N
    s_Ma = (config.Ma - config.da) * config.da
    n_e = (1 + s_d) * config.da
    n_v = config.Nb - 1 + s_Ma + s_N
    quadratic = config.da**2 - config.da * (config.Ma - 1 - s_d) - (config.Nb - 1 + s_N)
    disc = float((config.Ma - 1 - s_d) ** 2 + 4 * (config.Nb - 1 + s_N))
    return FeasibilityReport(
        scheme="LM",
        da=config.da,
        s_d=s_d,
        s_N=s_N,
        s_Ma=s_Ma,
        N_E=n_e,
        N_V=n_v,
        quadratic=quadratic,
        discriminant=disc,
        da_max=_da_max(config.Ma, s_d, disc),
        satisfied=quadratic <= 0,
    )


def meb_necessary_condition(config: NetworkConfig) -> FeasibilityReport:
    """Counting verdict for the max-eigenmode variant.

    With ``ub`` and ``va`` pinned, the beamforming direction adds ``s_d``
    equations but no variables, and Bob's combiner no longer counts as a
    variable.
    """
    s_d, s_N = config.s_d, config.s_N
    s_Ma = (config.Ma - config.da) * config.da
    n_e = (1 + s_d) * config.da + s_d
    n_v = s_Ma + s_N
    quadratic = config.da**2 - config.da * (config.Ma - 1 - s_d) - (s_N - s_d)
    disc = float((config.Ma - 1 - s_d) ** 2 + 4 * (s_N - s_d))
    return FeasibilityReport(
        scheme="MEB",
        da=config.da,
        s_d=s_d,
        s_N=s_N,
        s_Ma=s_Ma,
        N_E=n_e,
        N_V=n_v,
        quadratic=quadratic,
        discriminant=disc,
        da_max=_da_max(config.Ma, s_d, disc),
        satisfied=quadratic <= 0,
    )


def predict_cancellation(config: NetworkConfig) -> bool:
    """True when cancellation is unavoidable for a feasible LM solution.

    With ``da >= Ma - s_d`` the stacked matrix M must become rank deficient
    for alignment to hold, which forces Bob's row into the span of the
    others and kills the confidential gain.
    """
    return config.da >= config.Ma - config.s_d


# ---------------------------------------------------------------------------
# Flop model of one alternation iteration (analytic, not measured).
# ---------------------------------------------------------------------------


def flops_wa(Ma, Nb, Nks, dks):
    """Cost of the noise-precoder update (stack M, form Gram, decompose)."""
    s_d = sum(dks)
    cross = sum((8 * nk - 2) * d for nk, d in zip(Nks, dks))
    return 126 * Ma**3 + Ma**2 * (4 * s_d + 3) + Ma * (cross + 8 * Nb - 2)


def flops_ub(Nb, da, Ma):
    """Cost of Bob's combiner update in the LM scheme."""
    return 126 * Nb**3 + Nb**2 * (4 * da - 1) + Nb * da * (8 * Ma - 2)


def flops_uk_lm(Nk, da, Ma):
    """Cost of one pair's receive update in the LM scheme."""
    return 126 * Nk**3 + Nk**2 * (4 * da - 1) + Nk * da * (8 * Ma - 2)


def flops_uk_meb(Nk, da, Ma):
    """Cost of one pair's receive update when [Wa, va] is projected jointly."""
    return 126 * Nk**3 + Nk**2 * (4 * da + 3) + Nk * (1 + da) * (8 * Ma - 2)


@dataclass(frozen=True)
class FlopEstimate:
    """Exact integer evaluation of the per-iteration flop polynomials.

    ``S``/``T`` are the size bounds ``max_k max(Mk, Nk)`` and
    ``max(Ma, Nb)`` that drive the O(T^3 + T^2 K S + T K S^2 + K S^3)
    asymptotic envelope.
    """

    scheme: str
    flops_wa: int
    flops_ub: int
    flops_uk: tuple
    per_iteration_total: int
    S: int
    T: int


def estimate_flops(config: NetworkConfig, scheme: str) -> FlopEstimate:
    """Per-iteration flop count for ``scheme`` in {"LM", "MEB"}."""
    scheme = scheme.upper()
    wa = flops_wa(config.Ma, config.Nb, config.Nk, config.dk)
    if scheme == "LM":
        ub = flops_ub(config.Nb, config.da, config.Ma)
        uk = tuple(flops_uk_lm(nk, config.da, config.Ma) for nk in config.Nk)
    elif scheme == "MEB":
        ub = 0
        uk = tuple(flops_uk_meb(nk, config.da, config.Ma) for nk in config.Nk)
    else:
        raise ValueError(f"unknown scheme {scheme!r} (expected 'LM' or 'MEB')")
    s_bound = max((max(mk, nk) for mk, nk in zip(config.Mk, config.Nk)), default=0)
    return FlopEstimate(
        scheme=scheme,
        flops_wa=wa,
        flops_ub=ub,
        flops_uk=uk,
        per_iteration_total=wa + ub + sum(uk),
        S=s_bound,
        T=max(config.Ma, config.Nb),
    )

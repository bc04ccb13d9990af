"""Secrecy analysis under statistical eavesdropper CSI.

With alignment feasible, Bob's SINR is ``theta * Pa * sigma^2`` while each
eavesdropper sees

    gamma_e = theta Pa |h_a^H va|^2 /
              ((1-theta) Pa / da |h_a^H Wa|^2
               + sum_k Pk / dk |h_k^H Vk|^2 + 1)

for fresh CN(0, I) vectors ``h``. Because the filters are orthonormal (and
``va`` orthogonal to ``Wa`` at convergence), the numerator is exponential
and the denominator terms are gamma distributed, which yields a closed-form
outage probability and, through it, a one-dimensional power-split
optimization with provably monotone derivatives. Everything here therefore
reduces to scalar root finding plus an (optional) Monte Carlo oracle that
samples the actual channel vectors.

Endpoint conventions: the artificial-noise log term carries a factor
``(1 - theta)`` so evaluating at ``theta = 1`` removes it exactly, and
``theta = 0`` plugs directly into the same expressions (no singular
parameterizations are ever evaluated).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NumericError
from .linalg import STREAM_EVE, complex_gaussian, stream_rng

__all__ = [
    "PowerProfile",
    "SecrecyModel",
    "EveFilters",
    "EveComponents",
    "MonteCarloSop",
    "SrmBranch",
    "SrmSolution",
    "eve_sinr_ccdf",
    "sinr_eve_sample",
    "sop_closed_form",
    "sample_eve_components",
    "sop_monte_carlo",
    "solve_w",
    "w_prime",
    "rs_of_theta",
    "rs_prime",
    "positive_rate_threshold",
    "srm_solve",
    "theta_high_snr",
    "isotropic_theta",
    "with_theta",
]

_LN2 = math.log(2.0)

#: Relative residual target for the outage-equality root w(theta).
W_RESIDUAL_RTOL = 1e-12

#: Absolute tolerance on Rs'(theta*) for an interior optimum.
RS_PRIME_TOL = 1e-9


@dataclass(frozen=True)
class PowerProfile:
    """Transmit powers (linear scale) and the confidential power split.

    ``theta`` is the fraction of Alice's power spent on the confidential
    signal; the remainder drives the artificial noise.
    """

    Pa: float
    Pk: tuple
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "Pk", tuple(float(p) for p in self.Pk))
        if self.Pa <= 0 or any(p <= 0 for p in self.Pk):
            raise ValueError("powers must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")


@dataclass(frozen=True)
class SecrecyModel:
    """Distribution parameters of the outage analysis.

    ``alpha_a``/``alpha_k`` are the noise/interference subspace dimensions
    (gamma shape parameters), ``sigma2`` the main-channel gain
    ``sigma_max(Hba)^2``, ``eps_th`` the outage ceiling. ``Rb`` (codeword
    rate) is only needed for standalone outage evaluation; the rate
    optimizer eliminates it.
    """

    power: PowerProfile
    alpha_a: int
    alpha_k: tuple
    L: int
    eps_th: float
    sigma2: float
    Rb: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha_k", tuple(int(a) for a in self.alpha_k))
        if len(self.alpha_k) != len(self.power.Pk):
            raise ValueError("alpha_k and Pk must have matching lengths")
        if self.alpha_a < 1 or any(a < 1 for a in self.alpha_k):
            raise ValueError("subspace dimensions must be positive")
        if self.L < 1:
            raise ValueError("L must be positive")
        if not 0.0 < self.eps_th < 1.0:
            raise ValueError("eps_th must lie in (0, 1)")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    @property
    def Pa(self):
        return self.power.Pa

    @property
    def Pk(self):
        return self.power.Pk

    @property
    def theta(self):
        return self.power.theta

    @property
    def gamma_B(self):
        """``Pa * sigma^2``, Bob's SNR at full confidential power."""
        return self.Pa * self.sigma2

    @property
    def lambda_k(self):
        """Gamma rates ``alpha_k / Pk`` of the interference terms."""
        return tuple(a / p for a, p in zip(self.alpha_k, self.Pk))

    @property
    def g_k(self):
        """``Pa * lambda_k``, the interference rates in w-units."""
        return tuple(self.Pa * lk for lk in self.lambda_k)

    @property
    def c(self):
        """Outage budget ``-ln(1 - (1 - eps_th)^(1/L))``."""
        return -math.log1p(-((1.0 - self.eps_th) ** (1.0 / self.L)))

    def lam(self, theta=None):
        """Exponential rate ``1 / (theta Pa)`` of the confidential term."""
        theta = self.theta if theta is None else theta
        if theta <= 0:
            raise ValueError("lambda is undefined at theta = 0")
        return 1.0 / (theta * self.Pa)

    def lambda_a(self, theta=None):
        """Gamma rate ``alpha_a / ((1 - theta) Pa)`` of the noise term."""
        theta = self.theta if theta is None else theta
        if theta >= 1:
            raise ValueError("lambda_a is undefined at theta = 1 (no noise power)")
        return self.alpha_a / ((1.0 - theta) * self.Pa)

    def mu(self, Rs, Rb=None):
        """Outage threshold ``2^(Rb - Rs) - 1``; requires ``Rs <= Rb``."""
        rb = self.Rb if Rb is None else Rb
        if rb is None:
            raise ValueError("codeword rate Rb is required to form the outage threshold")
        if Rs > rb:
            raise ValueError(f"negative redundancy: Rs={Rs} exceeds Rb={rb}")
        return 2.0 ** (rb - Rs) - 1.0


class EveFilters(NamedTuple):
    """Minimal filter bundle accepted by the samplers.

    ``va`` unit vector (Ma), ``Wa`` orthonormal (Ma x da), ``Vk`` sequence
    of orthonormal (Mk x dk); a converged :class:`TransceiverSolution`
    satisfies the same interface.
    """

    va: np.ndarray
    Wa: np.ndarray
    Vk: tuple


def sinr_eve_sample(model: SecrecyModel, h_ea, h_ek, filters) -> float:
    """Evaluate one eavesdropper's SINR for given channel vectors.

    ``h_ea`` is the vector from Alice (length Ma), ``h_ek`` the per-pair
    vectors from each ordinary transmitter. Returns 0 when no confidential
    power is allocated.
    """
    theta = model.theta
    if theta == 0.0:
        return 0.0
    h_ea = np.asarray(h_ea)
    va = np.asarray(filters.va)
    wa = np.asarray(filters.Wa)
    num = theta * model.Pa * abs(h_ea.conj() @ va) ** 2
    den = 1.0
    if theta < 1.0:
        den += (1.0 - theta) * model.Pa / model.alpha_a * np.linalg.norm(h_ea.conj() @ wa) ** 2
    for hk, vk, pk, dk in zip(h_ek, filters.Vk, model.Pk, model.alpha_k):
        den += pk / dk * np.linalg.norm(np.asarray(hk).conj() @ np.asarray(vk)) ** 2
    return float(num / den)


def eve_sinr_ccdf(model: SecrecyModel, r, theta=None) -> float:
    """Per-eavesdropper CCDF ``Pr{gamma_e > r}`` in closed form.

    Product of the exponential tail with the Laplace transforms of the
    gamma-distributed denominator terms, evaluated at ``lambda * r``. At
    ``theta = 1`` the noise factor equals its limit 1.
    """
    theta = model.theta if theta is None else theta
    if not 0.0 < theta <= 1.0:
        raise ValueError("CCDF requires 0 < theta <= 1")
    if r < 0:
        return 1.0
    if r == 0:
        return 1.0
    s = model.lam(theta) * r
    value = math.exp(-s)
    if theta < 1.0:
        la = model.lambda_a(theta)
        value *= (la / (la + s)) ** model.alpha_a
    for ak, lk in zip(model.alpha_k, model.lambda_k):
        value *= (lk / (lk + s)) ** ak
    return value


def sop_closed_form(model: SecrecyModel, Rs: float) -> float:
    """Secrecy outage probability ``1 - (1 - CCDF(mu))^L`` (closed form)."""
    if not 0.0 < model.theta <= 1.0:
        raise ValueError("closed-form outage requires 0 < theta <= 1")
    mu = model.mu(Rs)
    tail = eve_sinr_ccdf(model, mu)
    return 1.0 - (1.0 - tail) ** model.L


@dataclass(frozen=True)
class EveComponents:
    """Raw per-sample projections reusable across power splits.

    ``x = |h_a^H va|^2``, ``y = |h_a^H Wa|^2``, ``z[:, k] = |h_k^H Vk|^2``;
    all power- and theta-free, so a single draw can price an entire
    (theta, redundancy) grid.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    seed: int

    @property
    def n_samples(self):
        return self.x.shape[0]


def sample_eve_components(filters, n_samples, seed, batch_size=1 << 18) -> EveComponents:
    """Draw ``n_samples`` fresh eavesdropper channel realizations.

    Vectors are CN(0, I) toward every transmitter; only the squared filter
    projections are kept.
    """
    va = np.asarray(filters.va)
    wa = np.asarray(filters.Wa)
    vks = [np.asarray(v) for v in filters.Vk]
    n = int(n_samples)
    x = np.empty(n)
    y = np.empty(n)
    z = np.empty((n, len(vks)))
    rng = stream_rng(seed, STREAM_EVE)
    start = 0
    while start < n:
        stop = min(start + batch_size, n)
        rows = stop - start
        ha = complex_gaussian(rng, (rows, va.shape[0]))
        x[start:stop] = np.abs(ha @ va) ** 2
        y[start:stop] = np.linalg.norm(ha @ wa, axis=1) ** 2
        for k, vk in enumerate(vks):
            hk = complex_gaussian(rng, (rows, vk.shape[0]))
            z[start:stop, k] = np.linalg.norm(hk @ vk, axis=1) ** 2
        start = stop
    return EveComponents(x=x, y=y, z=z, seed=int(seed))


def _sinr_from_components(model, comps):
    theta = model.theta
    if theta == 0.0:
        return np.zeros(comps.n_samples)
    den = 1.0 + np.zeros(comps.n_samples)
    if theta < 1.0:
        den = den + (1.0 - theta) * model.Pa / model.alpha_a * comps.y
    for k, (pk, dk) in enumerate(zip(model.Pk, model.alpha_k)):
        den = den + pk / dk * comps.z[:, k]
    return theta * model.Pa * comps.x / den


class MonteCarloSop(NamedTuple):
    estimate: float
    stderr: float
    n_samples: int


def sop_monte_carlo(
    model: SecrecyModel,
    filters,
    Rs: float,
    n_samples: int,
    seed: int,
    samples: EveComponents | None = None,
    all_eves: bool = False,
) -> MonteCarloSop:
    """Estimate the outage probability by sampling eavesdropper channels.

    The default path simulates a single eavesdropper and exponentiates its
    tail estimate (the L receptions are independent); the standard error
    follows by the delta method. ``all_eves=True`` simulates all L
    eavesdroppers per sample and thresholds their maximum, giving a plain
    binomial estimate for structural cross-checks. ``samples`` short-cuts
    the channel draws with a precomputed :class:`EveComponents` (only valid
    for the single-eavesdropper path).
    """
    n = int(n_samples)
    if n < 100:
        raise ValueError("n_samples < 100: the estimate would be meaningless")
    mu = model.mu(Rs)
    if all_eves:
        if samples is not None:
            raise ValueError("precomputed samples apply to the single-eavesdropper path only")
        hits = 0
        rng_seed = seed
        batch = max(1, (1 << 18) // max(1, model.L))
        done = 0
        rng = stream_rng(rng_seed, STREAM_EVE, 1)
        va = np.asarray(filters.va)
        wa = np.asarray(filters.Wa)
        vks = [np.asarray(v) for v in filters.Vk]
        theta = model.theta
        while done < n:
            rows = min(batch, n - done)
            gmax = np.zeros(rows)
            for _ in range(model.L):
                ha = complex_gaussian(rng, (rows, va.shape[0]))
                num = theta * model.Pa * np.abs(ha @ va) ** 2
                den = np.ones(rows)
                if theta < 1.0:
                    den += (1.0 - theta) * model.Pa / model.alpha_a * (
                        np.linalg.norm(ha @ wa, axis=1) ** 2
                    )
                for vk, pk, dk in zip(vks, model.Pk, model.alpha_k):
                    hk = complex_gaussian(rng, (rows, vk.shape[0]))
                    den += pk / dk * np.linalg.norm(hk @ vk, axis=1) ** 2
                gmax = np.maximum(gmax, num / den)
            hits += int(np.count_nonzero(gmax > mu))
            done += rows
        p = hits / n
        return MonteCarloSop(p, math.sqrt(p * (1.0 - p) / n), n)

    comps = samples if samples is not None else sample_eve_components(filters, n, seed)
    if comps.n_samples < n:
        raise ValueError(f"sample cache holds {comps.n_samples} draws, need {n}")
    gamma = _sinr_from_components(model, comps)[:n]
    p = float(np.count_nonzero(gamma > mu)) / n
    se_p = math.sqrt(p * (1.0 - p) / n)
    estimate = 1.0 - (1.0 - p) ** model.L
    stderr = model.L * (1.0 - p) ** (model.L - 1) * se_p
    return MonteCarloSop(estimate, stderr, n)


# ---------------------------------------------------------------------------
# The outage-equality root w(theta) and the secrecy-rate machinery.
# ---------------------------------------------------------------------------


def _w_equation(w, theta, model):
    value = w / model.Pa
    value += model.alpha_a * math.log1p((1.0 - theta) * w / model.alpha_a)
    for ak, gk in zip(model.alpha_k, model.g_k):
        value += ak * math.log1p(w / gk)
    return value


def solve_w(theta, model: SecrecyModel) -> float:
    """Root of the outage-equality equation at power split ``theta``.

    The left side is strictly increasing in ``w`` and bounded below by
    ``w / Pa``, so ``[0, c * Pa]`` always brackets the root; plain bisection
    is globally convergent. ``theta`` covers the closed interval [0, 1] -
    both endpoints plug in exactly.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    c = model.c
    lo, hi = 0.0, c * model.Pa
    # Bracket-doubling guard; mathematically hi already bounds the root.
    for _ in range(64):
        if _w_equation(hi, theta, model) >= c:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericError(f"failed to bracket w(theta) at theta={theta}, c={c}")
    w = 0.5 * (lo + hi)
    for _ in range(300):
        w = 0.5 * (lo + hi)
        residual = _w_equation(w, theta, model) - c
        if abs(residual) < W_RESIDUAL_RTOL * c:
            return w
        if residual < 0.0:
            lo = w
        else:
            hi = w
        if hi - lo <= 1e-17 * max(1.0, hi):
            break
    residual = _w_equation(w, theta, model) - c
    if abs(residual) > 1e-9 * c:
        raise NumericError(
            f"w(theta) bisection stalled: theta={theta}, w={w}, residual={residual:.3e}"
        )
    return w


def w_prime(theta, w, model: SecrecyModel) -> float:
    """Implicit derivative of ``w(theta)`` (closed form, always positive)."""
    aa = model.alpha_a
    num = aa * w / (aa + (1.0 - theta) * w)
    den = 1.0 / model.Pa + (1.0 - theta) * aa / (aa + (1.0 - theta) * w)
    for ak, gk in zip(model.alpha_k, model.g_k):
        den += ak / (gk + w)
    return num / den


def rs_of_theta(theta, model: SecrecyModel) -> float:
    """Secrecy rate ``log2((1 + theta gamma_B) / (1 + theta w(theta)))``.

    Raw signed value; the rate optimizer applies the max(., 0) clamp.
    ``theta = 0`` returns the limit 0.
    """
    if theta == 0.0:
        return 0.0
    w = solve_w(theta, model)
    return math.log2((1.0 + theta * model.gamma_B) / (1.0 + theta * w))


def rs_prime(theta, model: SecrecyModel) -> float:
    """Derivative of the secrecy rate in ``theta`` (strictly decreasing).

    At ``theta = 0`` this evaluates to ``(gamma_B - w(0+)) / ln 2``, the
    sign of which decides whether any positive rate is achievable.
    """
    w = solve_w(theta, model)
    wp = w_prime(theta, w, model)
    gb = model.gamma_B
    return (gb / (1.0 + theta * gb) - (w + theta * wp) / (1.0 + theta * w)) / _LN2


def positive_rate_threshold(model: SecrecyModel) -> float:
    """``w(0+)``: positive secrecy rate is achievable iff ``gamma_B`` exceeds it."""
    return solve_w(0.0, model)


class SrmBranch(enum.Enum):
    FULL_POWER = "full_power"
    SUSPEND = "suspend"
    INTERIOR = "interior"


@dataclass(frozen=True)
class SrmSolution:
    """Optimal power split and achieved secrecy rate.

    For an interior optimum, ``|Rs'(theta_star)| < RS_PRIME_TOL`` and
    ``w_star`` satisfies the outage equality at ``theta_star``.
    """

    theta_star: float
    Rs_star: float
    branch: SrmBranch
    w_star: float
    rs_prime_at_1: float
    rs_prime_at_0: float


def srm_solve(model: SecrecyModel) -> SrmSolution:
    """Maximize the secrecy rate over the power split ``theta``.

    The rate is strictly concave, so the sign of its derivative at the
    endpoints classifies the optimum: nonnegative at 1 means full power on
    the confidential signal, nonpositive at 0+ means transmission is not
    worth it, and otherwise bisection on the strictly decreasing derivative
    finds the unique interior stationary point.
    """
    d1 = rs_prime(1.0, model)
    d0 = rs_prime(0.0, model)
    if d1 >= 0.0:
        w1 = solve_w(1.0, model)
        return SrmSolution(
            theta_star=1.0,
            Rs_star=max(rs_of_theta(1.0, model), 0.0),
            branch=SrmBranch.FULL_POWER,
            w_star=w1,
            rs_prime_at_1=d1,
            rs_prime_at_0=d0,
        )
    if d0 <= 0.0:
        return SrmSolution(
            theta_star=0.0,
            Rs_star=0.0,
            branch=SrmBranch.SUSPEND,
            w_star=positive_rate_threshold(model),
            rs_prime_at_1=d1,
            rs_prime_at_0=d0,
        )
    lo, hi = 0.0, 1.0
    theta = 0.5
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        d = rs_prime(theta, model)
        if abs(d) < RS_PRIME_TOL:
            break
        if d > 0.0:
            lo = theta
        else:
            hi = theta
        if hi - lo <= 1e-16:
            break
    return SrmSolution(
        theta_star=theta,
        Rs_star=max(rs_of_theta(theta, model), 0.0),
        branch=SrmBranch.INTERIOR,
        w_star=solve_w(theta, model),
        rs_prime_at_1=d1,
        rs_prime_at_0=d0,
    )


def theta_high_snr(model: SecrecyModel) -> float:
    """Asymptotic optimal power split as Alice's power grows unbounded.

    Depends only on the noise dimension and the outage budget:
    ``1 / (1 + sqrt(alpha_a B^(-1/alpha_a) - alpha_a))`` with
    ``B = 1 - (1 - eps_th)^(1/L)``.
    """
    b = 1.0 - (1.0 - model.eps_th) ** (1.0 / model.L)
    aa = float(model.alpha_a)
    inner = aa * b ** (-1.0 / aa) - aa
    return 1.0 / (1.0 + math.sqrt(inner))


def isotropic_theta(da: int) -> float:
    """Power split of the heuristic isotropic covariance ``Pa/(1+da) I``."""
    return 1.0 / (1.0 + da)


def with_theta(model: SecrecyModel, theta) -> SecrecyModel:
    """Copy of ``model`` at a different power split."""
    profile = PowerProfile(Pa=model.Pa, Pk=model.Pk, theta=float(theta))
    return SecrecyModel(
        power=profile,
        alpha_a=model.alpha_a,
        alpha_k=model.alpha_k,
        L=model.L,
        eps_th=model.eps_th,
        sigma2=model.sigma2,
        Rb=model.Rb,
    )

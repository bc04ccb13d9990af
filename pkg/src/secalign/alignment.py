"""Interference-alignment solvers for the artificial-noise network.

Two schemes are implemented:

* ``lm_ia_solve`` - classic leakage minimization. Alternates between the
  noise precoder and the receive filters; the beamforming vector ``va`` is
  only chosen afterwards, inside the null space of ``Mbar``, which is what
  makes the scheme vulnerable to confidential-signal cancellation.
* ``meb_ia_solve`` - the cured variant. ``ub`` and ``va`` are pinned to the
  dominant singular pair of the direct channel before iterating, so the
  received confidential gain is exactly ``sigma_max^2`` whenever alignment
  succeeds.

Both return a :class:`TransceiverSolution` whose ``leakage_trace`` is the
objective value after each full iteration (nonincreasing by construction).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .channel import ChannelSet, NetworkConfig, _stack_m, _stack_mk, build_alignment_matrices
from .errors import ConfigurationError, InfeasibilityError, ShapeError
from .linalg import (
    STREAM_INIT,
    fix_phase,
    null_space_basis,
    random_orthonormal,
    random_unit_vector,
    stream_rng,
)

__all__ = [
    "SolverSettings",
    "TransceiverSolution",
    "CancellationCheck",
    "leakage_lm",
    "leakage_meb",
    "lm_ia_solve",
    "meb_ia_solve",
    "refine_va",
    "detect_cancellation",
    "solution_to_json",
    "solution_from_json",
]

#: Frobenius tolerance for the unitarity invariants of a solution.
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class SolverSettings:
    """Iteration limits and tolerances shared by both solvers.

    ``convergence_tol`` is the absolute leakage change that stops the
    alternation; ``feasibility_tol`` is the leakage level below which the
    aligned system counts as solvable. ``refine_va`` picks the gain-optimal
    vector inside ``null(Mbar)`` instead of an arbitrary basis column.
    """

    max_iterations: int = 2000
    convergence_tol: float = 1e-10
    feasibility_tol: float = 1e-6
    refine_va: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.convergence_tol <= 0 or self.feasibility_tol <= 0:
            raise ConfigurationError("tolerances must be > 0")


@dataclass(frozen=True)
class TransceiverSolution:
    """All transmit/receive filters plus the solver's convergence record.

    ``Wa^H Wa = I``, ``Vk^H Vk = I``, ``Uk^H Uk = I`` and the unit norms of
    ``va``/``ub`` hold within :data:`UNITARITY_TOL`; ``leakage_trace`` is
    nonincreasing.
    """

    va: np.ndarray
    Wa: np.ndarray
    ub: np.ndarray
    Vk: tuple
    Uk: tuple
    leakage_trace: np.ndarray
    iterations: int
    converged: bool
    scheme: str
    degenerate: bool = False
    sigma_max: float | None = None

    @property
    def leakage(self):
        """Final objective value."""
        return float(self.leakage_trace[-1])


class CancellationCheck(NamedTuple):
    cancelled: bool
    gain: float


def leakage_lm(channels: ChannelSet, sol) -> float:
    """Noise-subspace leakage ``|ub^H Hba Wa|^2 + sum_k |Uk^H Hka Wa|_F^2``."""
    Wa = np.asarray(sol.Wa)
    if Wa.shape[0] != channels.Hba.shape[1]:
        raise ShapeError(f"Wa has {Wa.shape[0]} rows, expected {channels.Hba.shape[1]}")
    m = _stack_m(channels.Hba, channels.Hka, np.asarray(sol.ub), [np.asarray(u) for u in sol.Uk])
    return float(np.linalg.norm(m @ Wa) ** 2)


def leakage_meb(channels: ChannelSet, sol) -> float:
    """Combined objective ``|M Wa|_F^2 + |Mbar va|^2`` of the cured scheme."""
    mats = build_alignment_matrices(channels, sol)
    wa_term = float(np.linalg.norm(mats.M @ np.asarray(sol.Wa)) ** 2)
    va_term = float(np.linalg.norm(mats.Mbar @ np.asarray(sol.va)) ** 2)
    return wa_term + va_term


def _random_receive_filters(rng, config, channels):
    ub = random_unit_vector(rng, config.Nb)
    uks = [random_orthonormal(rng, nk, d) for nk, d in zip(config.Nk, config.dk)]
    return fix_phase(ub), [fix_phase(u) for u in uks]


def _null_basis_or_raise(matrix, need, name):
    basis = null_space_basis(matrix)
    if basis.shape[1] < need:
        raise InfeasibilityError(
            f"null({name}) has dimension {basis.shape[1]}, need >= {need}"
        )
    return basis


def _zero_force_transmitters(channels, config, ub, Uks):
    """Final ZF step: Vk spans the null space of each stacked Mk."""
    vks = []
    for k in range(config.K):
        mk = _stack_mk(channels, ub, Uks, k)
        basis = _null_basis_or_raise(mk, config.dk[k], f"M_{k + 1}")
        vks.append(basis[:, : config.dk[k]])
    return tuple(vks)


def _refine_from_basis(Hba, ub, basis):
    """Gain-maximizing unit vector in span(basis); falls back to the first
    basis column when the projected direct channel vanishes (cancellation)."""
    projected = basis @ (basis.conj().T @ (Hba.conj().T @ ub))
    norm = np.linalg.norm(projected)
    if norm < 1e-12:
        return fix_phase(basis[:, 0]), True
    return fix_phase(projected / norm), False


def refine_va(channels: ChannelSet, sol) -> np.ndarray:
    """Re-pick ``va`` inside ``null(Mbar)`` to maximize ``|ub^H Hba va|^2``.

    Closed form: project ``Hba^H ub`` onto the null space and normalize.
    When that projection is numerically zero the gain cannot be improved
    (confidential-signal cancellation); any unit null-space vector is
    returned instead.
    """
    mats = build_alignment_matrices(channels, sol)
    basis = _null_basis_or_raise(mats.Mbar, 1, "Mbar")
    va, _ = _refine_from_basis(channels.Hba, np.asarray(sol.ub), basis)
    return va


def detect_cancellation(channels: ChannelSet, sol, threshold: float = 1e-8) -> CancellationCheck:
    """Measure the main-channel gain ``|ub^H Hba va|^2`` against a threshold."""
    gain = float(np.abs(np.asarray(sol.ub).conj() @ channels.Hba @ np.asarray(sol.va)) ** 2)
    return CancellationCheck(cancelled=gain < threshold, gain=gain)


def _check_dimensions(channels, config):
    if channels.Hba.shape != (config.Nb, config.Ma):
        raise ShapeError(
            f"channel set has Hba {channels.Hba.shape}, config expects "
            f"({config.Nb}, {config.Ma})"
        )
    if len(channels.Hka) != config.K:
        raise ShapeError(f"channel set has {len(channels.Hka)} pairs, config has {config.K}")


def lm_ia_solve(
    channels: ChannelSet,
    config: NetworkConfig,
    settings: SolverSettings | None = None,
    seed: int = 0,
    restarts: int = 1,
) -> TransceiverSolution:
    """Solve alignment by leakage minimization.

    When ``Ma >= 1 + da + sum(dk)`` the noise precoder is found in one shot
    as a null-space basis of M (zero forcing); otherwise the alternation
    runs until the leakage change drops below ``convergence_tol``. The best
    of ``restarts`` independently initialized runs is returned.
    """
    settings = settings or SolverSettings()
    _check_dimensions(channels, config)
    best = None
    for r in range(max(1, restarts)):
        rng = stream_rng(seed, STREAM_INIT, r)
        ub0, uk0 = _random_receive_filters(rng, config, channels)
        if config.Ma >= 1 + config.da + config.s_d:
            sol = _lm_zero_force(channels, config, settings, ub0, uk0)
        else:
            sol = _lm_iterate(channels, config, settings, ub0, uk0)
        if best is None or sol.leakage < best.leakage:
            best = sol
    return best


def _lm_finalize(channels, config, settings, ub, uks, trace, iterations, converged, degenerate, Wa):
    mbar = np.vstack([u.conj().T @ h for u, h in zip(uks, channels.Hka)]) if config.K else \
        np.zeros((0, config.Ma), dtype=np.complex128)
    basis = _null_basis_or_raise(mbar, 1, "Mbar")
    if settings.refine_va:
        va, _ = _refine_from_basis(channels.Hba, ub, basis)
    else:
        va = fix_phase(basis[:, 0])
    vks = _zero_force_transmitters(channels, config, ub, uks)
    return TransceiverSolution(
        va=va,
        Wa=Wa,
        ub=ub,
        Vk=vks,
        Uk=tuple(uks),
        leakage_trace=np.asarray(trace, dtype=float),
        iterations=iterations,
        converged=converged,
        scheme="LM",
        degenerate=degenerate,
    )


def _lm_zero_force(channels, config, settings, ub0, uk0):
    m = _stack_m(channels.Hba, channels.Hka, ub0, uk0)
    basis = _null_basis_or_raise(m, config.da, "M")
    Wa = basis[:, : config.da]
    leak = float(np.linalg.norm(m @ Wa) ** 2)
    return _lm_finalize(channels, config, settings, ub0, uk0, [leak], 0, True, False, Wa)


def _lm_iterate(channels, config, settings, ub0, uk0):
    Wa, ub, uks, trace, iterations, converged, degenerate = _backend.lm_alternate(
        channels.Hba,
        list(channels.Hka),
        list(config.dk),
        ub0,
        uk0,
        config.da,
        settings.max_iterations,
        settings.convergence_tol,
    )
    return _lm_finalize(
        channels, config, settings, ub, list(uks), trace, iterations, converged, degenerate, Wa
    )


def meb_ia_solve(
    channels: ChannelSet,
    config: NetworkConfig,
    settings: SolverSettings | None = None,
    seed: int = 0,
    restarts: int = 1,
) -> TransceiverSolution:
    """Solve alignment with the direct link pinned to its max eigenmode.

    ``ub``/``va`` are the dominant left/right singular vectors of ``Hba``;
    only ``Wa`` and the pair receive filters iterate. The main-channel gain
    is ``sigma_max(Hba)^2`` by construction, so cancellation cannot occur.
    """
    settings = settings or SolverSettings()
    _check_dimensions(channels, config)
    u_svd, s_svd, vh_svd = np.linalg.svd(channels.Hba)
    ub = fix_phase(u_svd[:, 0])
    va = fix_phase(vh_svd[0].conj())
    sigma_max = float(s_svd[0])
    m0 = ub.conj() @ channels.Hba

    best = None
    for r in range(max(1, restarts)):
        rng = stream_rng(seed, STREAM_INIT, r)
        _, uk0 = _random_receive_filters(rng, config, channels)
        Wa, _, uks, trace, iterations, converged, degenerate = _backend.meb_alternate(
            m0,
            list(channels.Hka),
            list(config.dk),
            va,
            uk0,
            config.da,
            settings.max_iterations,
            settings.convergence_tol,
        )
        vks = _zero_force_transmitters(channels, config, ub, list(uks))
        sol = TransceiverSolution(
            va=va,
            Wa=Wa,
            ub=ub,
            Vk=vks,
            Uk=tuple(uks),
            leakage_trace=np.asarray(trace, dtype=float),
            iterations=iterations,
            converged=converged,
            scheme="MEB",
            degenerate=degenerate,
            sigma_max=sigma_max,
        )
        if best is None or sol.leakage < best.leakage:
            best = sol
    return best


# ---------------------------------------------------------------------------
# JSON serialization: complex matrices as nested lists of [re, im] pairs.
# ---------------------------------------------------------------------------


def _encode_complex(a):
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _decode_complex(data):
    arr = np.asarray(data, dtype=float)
    return (arr[..., 0] + 1j * arr[..., 1]).astype(np.complex128)


def solution_to_json(sol: TransceiverSolution, seed=None, settings: SolverSettings | None = None) -> str:
    payload = {
        "scheme": sol.scheme,
        "va": _encode_complex(sol.va),
        "Wa": _encode_complex(sol.Wa),
        "ub": _encode_complex(sol.ub),
        "Vk": [_encode_complex(v) for v in sol.Vk],
        "Uk": [_encode_complex(u) for u in sol.Uk],
        "leakage_trace": [float(x) for x in sol.leakage_trace],
        "iterations": sol.iterations,
        "converged": sol.converged,
        "degenerate": sol.degenerate,
        "sigma_max": sol.sigma_max,
        "seed": seed,
        "settings": None
        if settings is None
        else {
            "max_iterations": settings.max_iterations,
            "convergence_tol": settings.convergence_tol,
            "feasibility_tol": settings.feasibility_tol,
            "refine_va": settings.refine_va,
        },
    }
    return json.dumps(payload)


def solution_from_json(text: str) -> TransceiverSolution:
    payload = json.loads(text)
    return TransceiverSolution(
        va=_decode_complex(payload["va"]),
        Wa=_decode_complex(payload["Wa"]),
        ub=_decode_complex(payload["ub"]),
        Vk=tuple(_decode_complex(v) for v in payload["Vk"]),
        Uk=tuple(_decode_complex(u) for u in payload["Uk"]),
        leakage_trace=np.asarray(payload["leakage_trace"], dtype=float),
        iterations=int(payload["iterations"]),
        converged=bool(payload["converged"]),
        scheme=payload["scheme"],
        degenerate=bool(payload.get("degenerate", False)),
        sigma_max=payload.get("sigma_max"),
    )

"""Network configuration, channel generation and stacked alignment matrices.

The network layout is ``(Ma x Nb, [1, da]) prod_k (Mk x Nk, dk)`` with L
single-antenna eavesdroppers: one confidential link (Alice -> Bob) whose
transmitter also emits artificial noise in a ``da``-dimensional subspace,
plus K ordinary transceiver pairs carrying ``dk`` streams each.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ShapeError
from .linalg import STREAM_CHANNEL, complex_gaussian, stream_rng

__all__ = [
    "NetworkConfig",
    "ChannelSet",
    "AlignmentMatrices",
    "generate_channels",
    "build_alignment_matrices",
    "parse_config_text",
]


def _as_int_tuple(value, k, name):
    """Normalize scalar-or-sequence per-pair parameters to a length-K tuple."""
    if np.ndim(value) == 0:
        return (int(value),) * k
    t = tuple(int(v) for v in value)
    if len(t) != k:
        raise ConfigurationError(f"{name} must have one entry per pair: got {len(t)}, K={k}")
    return t


@dataclass(frozen=True)
class NetworkConfig:
    """Antenna/stream layout of the interference network.

    Parameters
    ----------
    Ma, Nb : int
        Antennas at the confidential transmitter and receiver.
    da : int
        Dimension of the artificial-noise subspace, ``1 <= da <= Ma - 1``.
    K : int
        Number of ordinary transceiver pairs.
    Mk, Nk, dk : int or sequence of int
        Per-pair antenna counts and stream counts; scalars are broadcast.
    L : int
        Number of non-colluding single-antenna eavesdroppers.
    """

    Ma: int
    Nb: int
    da: int
    K: int
    Mk: tuple = field(default=())
    Nk: tuple = field(default=())
    dk: tuple = field(default=())

    L: int = 1

    def __post_init__(self):
        object.__setattr__(self, "Ma", int(self.Ma))
        object.__setattr__(self, "Nb", int(self.Nb))
        object.__setattr__(self, "da", int(self.da))
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "Mk", _as_int_tuple(self.Mk, self.K, "Mk") if self.K else ())
        object.__setattr__(self, "Nk", _as_int_tuple(self.Nk, self.K, "Nk") if self.K else ())
        object.__setattr__(self, "dk", _as_int_tuple(self.dk, self.K, "dk") if self.K else ())
        self._validate()

    def _validate(self):
        if self.Ma < 1 or self.Nb < 1:
            raise ConfigurationError("Ma and Nb must be positive")
        if self.K < 0:
            raise ConfigurationError("K must be nonnegative")
        if self.L < 1:
            raise ConfigurationError("L must be positive")
        if not 1 <= self.da <= self.Ma - 1:
            raise ConfigurationError(
                f"da must satisfy 1 <= da <= Ma - 1: da={self.da}, Ma={self.Ma}"
            )
        for k, (mk, nk, d) in enumerate(zip(self.Mk, self.Nk, self.dk), start=1):
            if mk < 1 or nk < 1:
                raise ConfigurationError(f"pair {k}: antenna counts must be positive")
            if not 1 <= d <= min(mk, nk - 1):
                raise ConfigurationError(
                    f"pair {k}: dk must satisfy 1 <= dk <= min(Mk, Nk - 1): "
                    f"dk={d}, Mk={mk}, Nk={nk}"
                )
        sd = self.s_d
        if self.Ma < 1 + sd:
            raise ConfigurationError(
                f"transmit antennas too few: Ma={self.Ma} < 1 + sum(dk)={1 + sd}"
            )
        for k, mk in enumerate(self.Mk, start=1):
            if mk < 1 + sd:
                raise ConfigurationError(
                    f"pair {k}: transmit antennas too few: Mk={mk} < 1 + sum(dk)={1 + sd}"
                )

    @property
    def s_d(self):
        """Total number of ordinary data streams, ``sum(dk)``."""
        return sum(self.dk)

    @property
    def s_N(self):
        """``sum((Nk - dk) * dk)``, the receive-side variable count."""
        return sum((nk - d) * d for nk, d in zip(self.Nk, self.dk))

    @classmethod
    def uniform(cls, Ma, Nb, da, K, Mk, Nk, dk, L=1):
        """Homogeneous-pairs constructor, matching the usual benchmark layouts."""
        return cls(Ma=Ma, Nb=Nb, da=da, K=K, Mk=(Mk,) * K, Nk=(Nk,) * K, dk=(dk,) * K, L=L)

    def to_text(self, seed=None):
        """Serialize as ``Ma=12 Nb=2 da=3 K=4 Mk=9 Nk=4 dk=2 L=16 [seed=7]``.

        Per-pair values collapse to a scalar when homogeneous, otherwise
        they are comma lists.
        """

        def fmt(values):
            if values and all(v == values[0] for v in values):
                return str(values[0])
            return ",".join(str(v) for v in values)

        parts = [f"Ma={self.Ma}", f"Nb={self.Nb}", f"da={self.da}", f"K={self.K}"]
        if self.K:
            parts += [f"Mk={fmt(self.Mk)}", f"Nk={fmt(self.Nk)}", f"dk={fmt(self.dk)}"]
        parts.append(f"L={self.L}")
        if seed is not None:
            parts.append(f"seed={int(seed)}")
        return " ".join(parts)

    @classmethod
    def from_text(cls, text):
        config, _ = parse_config_text(text)
        return config


def parse_config_text(text):
    """Parse the key-value config format; returns ``(config, seed_or_None)``.

    Accepts whitespace-separated ``key=value`` tokens. Per-pair keys take
    either a scalar (broadcast over K) or a comma list.
    """
    fields = {}
    for token in text.replace("\n", " ").split():
        if "=" not in token:
            raise ConfigurationError(f"malformed config token {token!r} (expected key=value)")
        key, _, raw = token.partition("=")
        fields[key] = raw
    seed = int(fields.pop("seed")) if "seed" in fields else None
    try:
        k = int(fields["K"])
    except KeyError:
        raise ConfigurationError("config must define K") from None

    def per_pair(key):
        if key not in fields:
            if k == 0:
                return ()
            raise ConfigurationError(f"config must define {key} when K > 0")
        values = tuple(int(v) for v in fields[key].split(","))
        if len(values) == 1 and k > 1:
            values = values * k
        return values

    known = {"Ma", "Nb", "da", "K", "Mk", "Nk", "dk", "L"}
    unknown = set(fields) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(
        Ma=int(fields["Ma"]),
        Nb=int(fields["Nb"]),
        da=int(fields["da"]),
        K=k,
        Mk=per_pair("Mk"),
        Nk=per_pair("Nk"),
        dk=per_pair("dk"),
    )
    if "L" in fields:
        kwargs["L"] = int(fields["L"])
    return NetworkConfig(**kwargs), seed


def _freeze(a):
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all legitimate channels.

    ``Hba`` is Alice -> Bob; ``Hka[k]`` is Alice -> Rx k; ``Hbk[k]`` is
    Tx k -> Bob; ``Hkj[k][j]`` is Tx j -> Rx k. Eavesdropper channels are
    known only statistically and are drawn by the secrecy module's Monte
    Carlo sampler, never stored here.
    """

    Hba: np.ndarray
    Hka: tuple
    Hbk: tuple
    Hkj: tuple
    seed: int


def generate_channels(config: NetworkConfig, seed: int) -> ChannelSet:
    """Draw every legitimate channel matrix i.i.d. CN(0, 1).

    Deterministic for a fixed ``seed``: the draw order is Hba, then Hka,
    Hbk and Hkj in row-major pair order, all from the channel sub-stream of
    the master seed (Monte Carlo draws use a different sub-stream).
    """
    rng = stream_rng(seed, STREAM_CHANNEL)
    Hba = complex_gaussian(rng, (config.Nb, config.Ma))
    Hka = tuple(complex_gaussian(rng, (nk, config.Ma)) for nk in config.Nk)
    Hbk = tuple(complex_gaussian(rng, (config.Nb, mk)) for mk in config.Mk)
    Hkj = tuple(
        tuple(complex_gaussian(rng, (nk, mj)) for mj in config.Mk) for nk in config.Nk
    )
    _freeze(Hba)
    for group in (Hka, Hbk):
        for h in group:
            _freeze(h)
    for row in Hkj:
        for h in row:
            _freeze(h)
    return ChannelSet(Hba=Hba, Hka=Hka, Hbk=Hbk, Hkj=Hkj, seed=int(seed))


@dataclass(frozen=True)
class AlignmentMatrices:
    """Stacked interference matrices seen from each transmitter.

    ``M`` stacks the combined receive filters against Alice ((1 + s_d) x Ma,
    first row from Bob), ``Mbar`` is ``M`` with Bob's row deleted, and
    ``Mk[k]`` stacks every foreign receive filter against Tx k.
    """

    M: np.ndarray
    Mbar: np.ndarray
    Mk: tuple
    s_d: int


def _stack_m(Hba, Hka, ub, Uks):
    """Rows ``[ub^H Hba; Uk^H Hka ...]`` as one (1 + s_d) x Ma array."""
    rows = [(ub.conj() @ Hba)[None, :]]
    rows += [uk.conj().T @ hka for uk, hka in zip(Uks, Hka)]
    return np.vstack(rows)


def _stack_mk(channels, ub, Uks, k):
    """Rows ``[ub^H Hbk; Uj^H Hjk (j != k) ...]`` against transmitter k."""
    rows = [(ub.conj() @ channels.Hbk[k])[None, :]]
    for j, uj in enumerate(Uks):
        if j == k:
            continue
        rows.append(uj.conj().T @ channels.Hkj[j][k])
    return np.vstack(rows)


def build_alignment_matrices(channels: ChannelSet, sol) -> AlignmentMatrices:
    """Assemble M, Mbar and every Mk from a solution's receive filters.

    ``sol`` must expose unit-norm ``ub`` and unitary ``Uk``. Mbar is exactly
    M with its first row deleted (same underlying values).
    """
    ub = np.asarray(sol.ub)
    Uks = [np.asarray(u) for u in sol.Uk]
    if ub.shape != (channels.Hba.shape[0],):
        raise ShapeError(f"ub has shape {ub.shape}, expected ({channels.Hba.shape[0]},)")
    if len(Uks) != len(channels.Hka):
        raise ShapeError(f"expected {len(channels.Hka)} receive filters, got {len(Uks)}")
    for k, (u, h) in enumerate(zip(Uks, channels.Hka), start=1):
        if u.ndim != 2 or u.shape[0] != h.shape[0]:
            raise ShapeError(f"U_{k} has shape {u.shape}, expected ({h.shape[0]}, d_{k})")
    m = _stack_m(channels.Hba, channels.Hka, ub, Uks)
    mks = tuple(_stack_mk(channels, ub, Uks, k) for k in range(len(Uks)))
    s_d = sum(u.shape[1] for u in Uks)
    return AlignmentMatrices(M=m, Mbar=m[1:], Mk=mks, s_d=s_d)

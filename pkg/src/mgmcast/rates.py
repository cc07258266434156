"""Achievable rates, min-reductions and the weighted sum rate.

All rates are in nats internally; ``RateReport`` exposes bits as well.
Per-user arrays have shape ``(K, L)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .signal_model import PrecoderSet, SignalModelParams, _check_scheme, aggregate_precoder

LN2 = np.log(2.0)


@dataclass(frozen=True)
class RateWeights:
    """Per-cluster multicast weights ``a`` and the common weight ``b``."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float)).copy()
        if np.any(a < 0) or self.b < 0:
            raise ValueError("rate weights must be non-negative")
        if not (np.any(a > 0) or self.b > 0):
            raise ValueError("at least one rate weight must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def uniform(cls, K: int, a: float = 1.0, b: float = 1.0) -> "RateWeights":
        return cls(np.full(K, float(a)), b)


def channel_gains(ch: ChannelSet, ps: PrecoderSet) -> tuple[np.ndarray, np.ndarray]:
    """Composite gains.

    Returns ``g`` with ``g[k, l, i] = h_{l,k} p_i`` and ``g_a`` with
    ``g_a[k, l] = h_{l,k} p_A``.
    """
    if ps.M != ch.M or ps.K != ch.K:
        raise ValueError("precoder set does not match channel dimensions")
    g = np.einsum("klm,im->kli", ch.h, ps.p)
    g_a = ch.h @ aggregate_precoder(ps)
    return g, g_a


def _own(g: np.ndarray) -> np.ndarray:
    K = g.shape[0]
    return g[np.arange(K), :, np.arange(K)]


def effective_noise_variances(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams,
                              delta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Interference-plus-noise seen when decoding the common and the
    multicast message.  ``delta`` scales the residual common-message
    amplitude left after SIC."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    _check_scheme(ps, sm)
    g, g_a = channel_gains(ch, ps)
    p2 = np.abs(g) ** 2
    total = p2.sum(axis=2)
    r_c = sm.C * total + 1.0
    r_u = delta**2 * sm.B * np.abs(g_a) ** 2 + sm.C * (total - np.abs(_own(g)) ** 2) + 1.0
    return r_c, r_u


def user_rates(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams,
               delta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Per-user common and multicast rates (nats), each of shape ``(K, L)``."""
    r_c, r_u = effective_noise_variances(ch, ps, sm, delta)
    g, g_a = channel_gains(ch, ps)
    R_c = np.log1p(sm.B * np.abs(g_a) ** 2 / r_c)
    R_u = np.log1p(sm.C * np.abs(_own(g)) ** 2 / r_u)
    return R_c, R_u


@dataclass(frozen=True)
class RateReport:
    R_c_user: np.ndarray
    R_u_user: np.ndarray
    R_c: float
    R_u: np.ndarray
    wsr: float
    delta: float = 0.0

    @property
    def sum_R_u(self) -> float:
        return float(np.sum(self.R_u))

    @property
    def sum_rate(self) -> float:
        """Unweighted total ``sum_k R_u[k] + R_c``."""
        return self.sum_R_u + self.R_c

    @property
    def R_c_bits(self) -> float:
        return self.R_c / LN2

    @property
    def R_u_bits(self) -> np.ndarray:
        return self.R_u / LN2

    @property
    def sum_R_u_bits(self) -> float:
        return self.sum_R_u / LN2

    @property
    def wsr_bits(self) -> float:
        return self.wsr / LN2


def weighted_sum_rate(R_c_user: np.ndarray, R_u_user: np.ndarray, w: RateWeights,
                      delta: float = 0.0) -> RateReport:
    """Apply the min over users, then ``sum_k a_k R_u[k] + b R_c``."""
    R_c_user = np.asarray(R_c_user, dtype=float)
    R_u_user = np.asarray(R_u_user, dtype=float)
    if w.a.shape != (R_u_user.shape[0],):
        raise ValueError("need one multicast weight per cluster")
    R_c = float(R_c_user.min())
    R_u = R_u_user.min(axis=1)
    wsr = float(np.dot(w.a, R_u) + w.b * R_c)
    return RateReport(R_c_user, R_u_user, R_c, R_u, wsr, float(delta))


def rate_report(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams, w: RateWeights,
                delta: float = 0.0) -> RateReport:
    R_c_user, R_u_user = user_rates(ch, ps, sm, delta)
    return weighted_sum_rate(R_c_user, R_u_user, w, delta)

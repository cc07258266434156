"""Receiver MSEs, MMSE receivers and MMSE error values (perfect SIC).

Users have a single antenna, so every receiver is a complex scalar and the
"matrix inverses" in the receiver formulas are real scalar divisions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .rates import _own, channel_gains
from .signal_model import PrecoderSet, SignalModelParams, _check_scheme


@dataclass(frozen=True)
class ReceiverSet:
    """Common-data receivers ``W`` and multicast receivers ``V``, shape ``(K, L)``."""

    W: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class MseSet:
    eps_c: np.ndarray
    eps_u: np.ndarray
    degenerate: bool = False

    @property
    def eps_c_max(self) -> float:
        return float(self.eps_c.max())

    @property
    def eps_u_max(self) -> np.ndarray:
        return self.eps_u.max(axis=1)


def _powers(ch, ps, sm):
    _check_scheme(ps, sm)
    g, g_a = channel_gains(ch, ps)
    total = (np.abs(g) ** 2).sum(axis=2)
    return g, g_a, total


def mse_values(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams,
               rx: ReceiverSet) -> MseSet:
    """MSE of arbitrary scalar receivers ``rx`` (expanded quadratic forms)."""
    g, g_a, total = _powers(ch, ps, sm)
    B, C = sm.B, sm.C
    W2 = np.abs(rx.W) ** 2
    V2 = np.abs(rx.V) ** 2
    eps_c = (B * np.abs(g_a) ** 2 * W2 + C * total * W2 + W2
             - 2.0 * B * np.real(g_a * rx.W) + B)
    eps_u = C * total * V2 + V2 - 2.0 * C * np.real(_own(g) * rx.V) + C
    return MseSet(eps_c, eps_u, degenerate=(B == 0.0 or C == 0.0))


def mmse_receivers(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams) -> ReceiverSet:
    g, g_a, total = _powers(ch, ps, sm)
    B, C = sm.B, sm.C
    r_c = C * total + 1.0
    W = B * np.conj(g_a) / (B * np.abs(g_a) ** 2 + r_c)
    # C*|h p_k|^2 + r_u collapses to C*sum_i |h p_i|^2 + 1 when delta = 0
    V = C * np.conj(_own(g)) / (C * total + 1.0)
    return ReceiverSet(W, V)


def mmse_errors(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams) -> MseSet:
    """Error variances of the MMSE receivers.

    Written as ``B r_c / (r_c + B |h p_A|^2)`` so that ``B = 0`` (or
    ``C = 0``) gives the zero limit instead of dividing by zero; such sets
    are flagged ``degenerate``.
    """
    g, g_a, total = _powers(ch, ps, sm)
    B, C = sm.B, sm.C
    r_c = C * total + 1.0
    own2 = np.abs(_own(g)) ** 2
    r_u = C * (total - own2) + 1.0
    eps_c = B * r_c / (r_c + B * np.abs(g_a) ** 2)
    eps_u = C * r_u / (r_u + C * own2)
    return MseSet(eps_c, eps_u, degenerate=(B == 0.0 or C == 0.0))
